"""Single-link rates against SNR on a unit-mean Rayleigh gain.

Layered transmission sits between a single outage-optimized layer and the
ergodic capacity. The gap to ergodic settles near a constant at high SNR,
while the gain over the single layer keeps growing. Rates in nats.
"""
import numpy as np

from layercast import ergodic_capacity, expected_rate, optimal_profile, outage_capacity
from layercast import rayleigh_power

law = rayleigh_power(1.0)
print(f"{'P_dB':>6} {'outage':>9} {'layered':>9} {'ergodic':>9} {'s0':>9} {'s1':>6}")
for db in np.arange(-10, 41, 10):
    P = 10 ** (db / 10)
    prof = optimal_profile(law, P)
    print(f"{db:6.0f} {outage_capacity(law, P).rate:9.4f} {expected_rate(prof, law):9.4f} "
          f"{ergodic_capacity(law, P):9.4f} {prof.s0:9.3g} {prof.s1:6.3f}")

# the power residual I(s) tells how much interference layers above s leave
prof = optimal_profile(law, 100.0)
s = np.linspace(prof.s0, prof.s1, 6)
print("\nP = 20 dB, residual power above each gain:")
for si, Ii in zip(s, prof.I(s)):
    print(f"  s = {si:6.3f}   I(s) = {Ii:8.3f}")
