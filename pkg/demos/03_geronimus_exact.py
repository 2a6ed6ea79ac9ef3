"""Divide by L and add point masses at its zeros, certified in exact arithmetic.

With rational moments, rational zeros and rational masses the perturbed Gram
matrix is rational too (its entries are residue sums), so both routes can be
compared with no rounding at all. The double-precision run is shown alongside.

Run: python3 demos/03_geronimus_exact.py
"""

from fractions import Fraction

from cmvlab import _arith as ar
from cmvlab.functional import one_plus_cos, one_plus_cos_moments
from cmvlab.jets import DiagonalCircle
from cmvlab.laurent import prepared_from_zeros
from cmvlab.transforms import TransformRequest, run_transform

E = ar.exact
half = E(Fraction(1, 2))

# double zeros at 2 and 1/2: the masses carry a value and a first derivative at each
Lx = prepared_from_zeros(E(1), [(E(2), 2), (half, 2)], exact=True)
mx = DiagonalCircle(((E(Fraction(1, 4)), E(Fraction(1, 8))), (E((Fraction(1, 2), Fraction(1, 3))), E(0))))
Ld = prepared_from_zeros(1, [(2, 2), (0.5, 2)])
md = DiagonalCircle(((0.25, 0.125), (0.5 + 1j / 3, 0)))

for side in (1, 2):
    ex = run_transform(TransformRequest("geronimus", side, Lx, one_plus_cos_moments(True), 8, mx, exact=True), samples=4)
    db = run_transform(TransformRequest("geronimus", side, Ld, one_plus_cos(), 8, md), samples=4)
    print(f"side {side}: exact discrepancy {ex.max_discrepancy}, double discrepancy {db.max_discrepancy:.1e}")
    last = ex.records[-1]
    print(f"  H_{last['l']} = {last['H_direct'][0]} + {last['H_direct'][1]} i")
    c = ex.connectors
    print(f"  exact connectors: off-band {max(c['band_first'], c['band_second'])}, ligature {c['ligature']}, "
          f"corner {c['corner']}")
