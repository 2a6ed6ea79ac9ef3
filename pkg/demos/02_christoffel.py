"""Multiply a measure by L(z) = z - 5/2 + 1/z and recover the new basis two ways.

The closed formulas use only the old basis and the values of L at its zeros;
the direct route refactorizes the perturbed Gram matrix. The report compares them.

Run: python3 demos/02_christoffel.py
"""

from cmvlab.functional import bernstein_szego
from cmvlab.laurent import prepared_from_zeros
from cmvlab.transforms import TransformRequest, run_transform

L = prepared_from_zeros(1, [(2, 1), (0.5, 1)])

for side in (1, 2):
    rep = run_transform(TransformRequest("christoffel", side, L, bernstein_szego(0.5), 12), samples=6)
    print(f"side {side}: formula vs direct {rep.max_discrepancy:.1e}")
    for row in rep.records[::4]:
        print(f"  l={row['l']:2d}  H={complex(*row['H_direct']):.10f}  H err={row['H_err']:.1e}")
    c = rep.connectors
    print(f"  connector off-band {max(c['band_first'], c['band_second']):.1e}, ligature {c['ligature']:.1e}")
    worst = max(rep.identities, key=rep.identities.get)
    print(f"  worst connection identity: {worst} {rep.identities[worst]:.1e}")
