"""Leading profile of a packet crossing a Gaussian nonlinearity.

Three independent solvers of the profile (Burgers) equation are compared,
then level shifts are read off against the linear cosine and turned back
into the line integral of alpha.

Run: python3 demos/burgers_profiles.py
"""

import numpy as np

from westervelt.harmonics import evolve_spectrum, spectrum_to_profile
from westervelt.nonlinearity import GaussianField, Ray, line_integral
from westervelt.profile_core import PhaseProfile, evolve_characteristics, evolve_profile, shock_onset_probe
from westervelt.tomography import measure_tilt, xray_from_second_harmonic

alpha = GaussianField(1.0, 0.3)
ray = Ray([-1.5], [1.0])
M = 1.0

print("accumulated nonlinearity along the ray")
for s in (0.5, 1.0, 1.5, 2.0, 3.0):
    print(f"  s = {s:3.1f}  s_tilde = {line_integral(alpha, ray, 0.0, s):.6f}")

prof = evolve_profile(alpha, ray, M, 3.0)
fan = evolve_characteristics(PhaseProfile.cosine(M, prof.n_theta), prof.s_tilde).to_profile()
spec = spectrum_to_profile(evolve_spectrum(M, prof.s_tilde, 64), prof.n_theta)
print(f"\nafter the bump (s_tilde = {prof.s_tilde:.6f}, shock at 1/M = {1 / M})")
print(f"  implicit vs characteristics  {np.abs(prof.values - fan.values).max():.2e}")
print(f"  implicit vs spectrum (K=64)  {np.abs(prof.values - spec.values).max():.2e}")

print("\nlevel shifts against cos(theta): d/k should equal s_tilde")
for m in measure_tilt(prof, PhaseProfile.cosine(M, prof.n_theta)):
    print(f"  k = {m.level:+.2f}  d = {m.shift:+.6f}  d/k = {m.integral:.9f}")

small = evolve_profile(alpha, Ray([-1.5], [1.0]), M, 0.9)
est = xray_from_second_harmonic(evolve_spectrum(M, small.s_tilde, 32), M)
print(f"\nsecond-harmonic estimate at s_tilde = {small.s_tilde:.5f}: {est:.5f}")
print(f"shock onset probe for M = 2: s_tilde = {shock_onset_probe(2.0):.9f}")
