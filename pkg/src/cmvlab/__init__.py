"""CMV biorthogonal Laurent polynomials and their Christoffel/Geronimus transforms."""
