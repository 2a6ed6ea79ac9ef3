"""Biorthogonal Laurent polynomials of a circle measure, in double and exact arithmetic.

Run: python3 demos/01_biorthogonal_basis.py
"""

import numpy as np

from cmvlab.functional import gram, one_plus_cos, one_plus_cos_moments
from cmvlab.gaussborel import abc_kernel, biorthogonality_residual, cd_kernel, factorize

N = 10

# (1 + cos theta) d theta / 2 pi, sampled on a grid
u = one_plus_cos()
G = gram(u, N)
sys = factorize(G)
print("H (double):", np.round(sys.H.real, 12))
print("biorthogonality residual:", biorthogonality_residual(u, sys))

# same measure from its three nonzero moments, factorized over the Gaussian rationals
ue = one_plus_cos_moments(True)
sx = factorize(gram(ue, 6, exact=True))
print("H (exact):", [str(h) for h in sx.H])
print("exact residual:", biorthogonality_residual(ue, sx))

# the kernel from the factors against a plain LU solve on the Gram block
z1, z2 = 0.3 + 1.1j, -0.7 + 0.2j
for l in (2, 5, N):
    a, b = cd_kernel(sys, l, z1, z2), abc_kernel(G, l, z1, z2)
    print(f"l={l:2d}  K_cd={complex(a):.12f}  |K_cd - K_abc|={abs(a - b):.1e}")
