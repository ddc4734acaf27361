"""
Where the momentum integrals get their weight
=============================================

Tabulate the k-space integrands at the reference configuration and
measure how much of each integral comes from modes shorter than the
healing length, where the phonon description stops being accurate.
"""

# %%
from polaron_harvest.oracle import Integrand, sample_integrands, spectral_report
from polaron_harvest.params import Experiment
from polaron_harvest.sweep import fig4_params

p = fig4_params()
xi = Experiment().derived().xi
k_cut = 1 / xi

# %%
# Fraction of absolute weight above 1/xi.
for kind in ("L", "M_plus", "M_minus"):
    rep = spectral_report(Integrand(kind, p), k_cut)
    print(f"{kind:>8}: {rep.fraction_above_cutoff:.3e}")

# %%
# The integrands themselves on a grid out to three times the cutoff.
import numpy as np

k = np.linspace(0, 3 * k_cut, 13)[1:]
table = sample_integrands(p, k)
for i, kk in enumerate(k):
    row = " ".join(f"{table[kind][i]: .3e}" for kind in ("L", "M_plus", "M_minus"))
    print(f"k = {kk * 1e-6:6.2f} 1/um  {row}")

# %%
# Bogoliubov check: the phonon dispersion departs from linear by the
# fraction below at the cutoff.
from polaron_harvest.dispersion import relativistic_error

print(f"relativistic error at 1/xi: {relativistic_error(k_cut, Experiment().derived()):.4f}")
