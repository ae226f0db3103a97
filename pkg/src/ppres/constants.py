"""CODATA physical constants used throughout the package (SI units)."""
from scipy import constants as _c

hbar = _c.hbar
h = _c.h
mu0 = _c.mu_0
muB = _c.physical_constants["Bohr magneton"][0]
c = _c.c
kB = _c.k

#: Bohr magneton over Planck constant, Hz/T (about 13.996 GHz/T)
muB_over_h = muB / h

#: Landé factors of the two reference spin species
G_FREE_ELECTRON = 2.00231930436
G_ER_CAWO4 = 8.38
