"""Condition of nearest-point problems on a parabola and a sphere.

Walks the classic picture: an ambient point a sits at height t above the
parabola's vertex. The osculating circle there has radius 1/2, so the
projection problem is ill-posed exactly at the focal point t = 1/2;
below it errors are amplified by 1/(1-2t), beyond it (and below the
curve) curvature *shrinks* errors. The sphere shows the same mechanism
with its center as the focal set.

Run: python demos/01_parabola_and_sphere.py
"""

import numpy as np

import riemcond as rc

parabola = rc.graph2d(1.0)
vertex = np.array([0.0])

print("condition number of projecting (0, t) onto the parabola y = x^2")
print(f"{'t':>6} {'kappa':>12} {'1/|1-2t|':>12}  regime")
for t in (0.0, 0.1, 0.25, 0.4, 0.49, 0.5, 0.6, 1.0):
    wd = rc.weingarten_data(parabola, vertex, [0.0, t])
    rep = rc.kappa_cpp(wd.H)
    if rep.ill_posed:
        regime = "focal point: ill-posed"
        print(f"{t:6.2f} {'inf':>12} {'inf':>12}  {regime}")
        continue
    if abs(rep.kappa - 1.0) <= 1e-12:
        regime = "neutral"
    else:
        regime = "amplifies" if rep.kappa > 1 else "shrinks"
    print(f"{t:6.2f} {rep.kappa:12.6f} {1/abs(1-2*t):12.6f}  {regime}")

wd_unit = rc.weingarten_data(parabola, vertex, [0.0, 1.0])
offsets = rc.ill_posedness_certificate(rc.principal_curvatures(wd_unit))
print(f"\nsingular offsets along the upward normal: {offsets}")
print(f"critical radii (osculating circles): {rc.critical_radii(rc.principal_curvatures(wd_unit))}")

# First-order meaning: perturb a in the worst direction and re-solve.
t = 0.25
a = np.array([0.0, t])
wd = rc.weingarten_data(parabola, vertex, a)
rep = rc.kappa_cpp(wd.H)
frame = rc.tangent_frame(parabola, vertex)
eps = 1e-6 * np.linalg.norm(a)
a_pert = a + eps * (frame.Q @ rep.worst_input_direction)
res = rc.project_point(parabola, a_pert, vertex)
moved = np.linalg.norm(parabola(res.u_star) - parabola(vertex))
print(f"\nat t = {t}: kappa = {rep.kappa}, observed amplification = {moved / eps:.6f}")

# The sphere: a = alpha x projects to x with kappa = 1/alpha.
sphere = rc.sphere(1.0)
u0 = np.array([0.3, -0.2])
x = sphere(u0)
print("\nunit sphere, ambient input a = alpha * x:")
for alpha in (0.2, 0.5, 2.0, 10.0):
    wd = rc.weingarten_data(sphere, u0, (alpha - 1.0) * x)
    print(f"  alpha = {alpha:5.1f}: kappa = {rc.kappa_cpp(wd.H).kappa:.6f} (expect {1/alpha:.6f})")
wd_out = rc.weingarten_data(sphere, u0, x)
print(f"  center offset along outward normal: "
      f"{rc.ill_posedness_certificate(rc.principal_curvatures(wd_out))} (the center)")
