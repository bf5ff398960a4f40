"""
Smoothing by grazing collisions
===============================

Start from data whose coefficients decay only like 1/n and watch the solution
acquire exp(-c n^s) decay, the coefficient form of Gelfand-Shilov regularity.
The Fourier-side collision integral is then compared with the tables.
"""

import numpy as np

from radboltz import SingularityModel, build_tables
from radboltz.cascade import InitialData, evaluate, solve_closed_form
from radboltz.field import gelfand_shilov_diagnostic
from radboltz.fourier import FourierProfile, bobylev_apply, fourier_mode

tables = build_tables(SingularityModel(s=0.5), 32)

n = np.arange(33)
b0 = np.zeros(33)
b0[2:] = 1.0 / n[2:]
b0 *= 0.05 / np.linalg.norm(b0)
sol = solve_closed_form(tables, InitialData(b0))

for t in (0.25, 0.5, 1.0):
    c, rms = gelfand_shilov_diagnostic(evaluate(sol, t), tables)
    print(f"t = {t:4.2f}: fitted rate c = {c:.3f} (rms {rms:.2e})")

###############################################################################
# On the Fourier side two basis modes combine into a single mode with the
# tabulated coupling constant.

rho = np.array([0.5, 1.0, 2.0])
left = bobylev_apply(tables.model, FourierProfile.mode(2), FourierProfile.mode(3), rho)
right = tables.w[2, 3] * fourier_mode(5, rho)
print("Fourier integral:", left)
print("table prediction:", right)
