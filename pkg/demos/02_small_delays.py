"""Three ways to certify an inertial manifold for x' = -x(t - h) - (x - sin x).

Run with ``python3 demos/02_small_delays.py``.
"""

import numpy as np

from delayssm import certify_f_form, certify_small_delay, f_form_hmax, roots_right_of, systems, tau_curves

print("The small-delay bound depends only on the kernel variation and Lip(R) = 2.")
for h in (0.05, 0.066, 0.067, 0.1):
    c = certify_small_delay(systems.sine_delay(h))
    q = c.inequalities[0]
    print(f"   h = {h:<6} {c.verdict:<14} (needs h < {q.rhs:.5f})")

print("\nThe decay curve of the gap route keeps its unit crossings much longer.")
for h in (0.065, 0.13, 0.135, 0.14):
    s = systems.sine_delay(h)
    cv = tau_curves(s, roots_right_of(-3.0, s.kernel, depth=10 / h + 10))
    state = "no crossing" if cv.roots is None else f"crossings at {cv.roots[0]:.3f}, {cv.roots[1]:.3f}"
    print(f"   h = {h:<6} min = {cv.minimum:.4f}  {state}")

print("\nSplitting off beta2 * id gives a test that holds for |beta2| > 192 at tiny delays.")
b = -np.geomspace(200.0, 2e4, 6)
for bb, hh in zip(b, f_form_hmax(b, 3.0)):
    print(f"   beta2 = {bb:9.1f}   h_max = {hh:.6f}")
c = certify_f_form(systems.sine_delay(1e-4), -1000.0)
print(f"   at h = 1e-4, beta2 = -1000: {c.verdict}, kappa = {c.kappa:.2f}")
