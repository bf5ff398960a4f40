"""
Eigenvalues and couplings of the radial collision operator
==========================================================

Tabulate lambda_2n and the coupling constants for an inverse-power angular
kernel, compare them with the incomplete-beta closed form and look at the
growth of the eigenvalues.
"""

import numpy as np

from radboltz import SingularityModel, build_tables
from radboltz.spectrum import asymptotic_exponent_fit, no_resonance_check, sine_form_tables

model = SingularityModel(s=0.5)
tables = build_tables(model, 64)

print("first eigenvalues:", np.round(tables.lam[:8], 6))

###############################################################################
# For the sine form every entry has a closed form in incomplete beta values.

lam_ref, alpha_ref = sine_form_tables(model, 64)
print("max relative error in lambda:", np.max(np.abs(tables.lam[2:] / lam_ref[2:] - 1)))

###############################################################################
# The spectrum is strictly subadditive, so the cascade never resonates.

rep = no_resonance_check(tables, 30)
print(f"no resonance: {rep.passed}, smallest margin {rep.margin:.4f} at {rep.argmin}")

###############################################################################
# lambda_2k grows like k^s.  The local slope approaches s slowly, so a fit
# over a moderate window sits a little above it.

big = build_tables(model, 200)
slope, rms = asymptotic_exponent_fit(big, 50, 200)
print(f"log-log slope over k in [50, 200]: {slope:.3f} (s = {model.s})")
