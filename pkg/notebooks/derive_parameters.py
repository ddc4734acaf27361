"""
From lab units to dimensionless parameters
==========================================

Build the condensate and impurity quantities for the reference
rubidium/potassium setup and map them onto the detector model.
"""

# %%
# The condensate: coupling, sound speed and healing length.
from polaron_harvest.params import A0, AMU, RB87, Experiment, derive_condensate

cond = derive_condensate(RB87)
print(f"g_bb = {cond.g_bb:.4e} J m^3")
print(f"c_s  = {cond.c_s * 1e3:.4f} mm/s")
print(f"xi   = {cond.xi * 1e9:.1f} nm")

# %%
# A detector configuration: 35 krad/s trap, 0.065 ms switching,
# separation tied to 5.25 sound-travel lengths.
from dataclasses import replace

from polaron_harvest.params import PairGeometry

exp = replace(Experiment(), omega_trap=35e3, T_switch=0.065e-3, a_ab=1000 * A0,
              geometry=PairGeometry(constraint_ratio=5.25))
p = exp.dimensionless()
print(p)

# %%
# Everything is now in metres; the ratio of smearing to switching length
# is the single number that controls how much the two detectors overlap.
print(f"sigma / (c_s T) = {p.sigma / p.T_bar:.4f}")
print(f"L / (c_s T)     = {p.L / p.T_bar:.4f}")

# %%
# Observables at this point.
from polaron_harvest.response import harvest

r = harvest(p)
for name, value in zip(("L", "L_AB", "M_plus", "M_minus_im", "|M|", "N", "I"), r.as_row()):
    print(f"{name:>10} = {value: .6e}")
