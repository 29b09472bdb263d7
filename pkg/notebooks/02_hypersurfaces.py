"""
Hypersurfaces: second fundamental form and classification
=========================================================

A hypersurface is given by F(u1, u2, u3). We compute the unit normal, the
second fundamental form h, its covariant derivative and the mean curvature,
then classify a few families.
"""

# %%
import numpy as np

from siklos import ambient, hypersurface
from siklos.ambient import AmbientGeometry
from siklos.catalog import catalog_list, get_entry
from siklos.hypersurface import Immersion

np.set_printoptions(precision=4, suppress=True)
rng = np.random.default_rng(1)

# %% [markdown]
# The slice x3 = 2 in H = x3^4: parallel, not totally geodesic, |tr h| = 1/beta.

# %%
geo = AmbientGeometry("x3^4", beta=1.0)
F = Immersion(["u1", "u3", "2", "u2"])
ex = hypersurface.extrinsic_at(geo, F, [0.3, -0.2, 0.5])
print("normal:", ex.normal, "eps =", ex.epsilon)
print("h =\n", ex.h)
print("mean curvature:", ex.mean_curvature)
print("max |nabla h|:", np.abs(hypersurface.nabla_h(geo, F, [0.3, -0.2, 0.5])).max())

# %% [markdown]
# A hyperplane x4 = 2 x2 + 1 is totally geodesic whenever H does not depend
# on x4. Geodesics launched tangent to it stay on it.

# %%
geo = AmbientGeometry("x3^2*sin(x2)")
plane = Immersion(["u1", "u2", "u3", "2*u2+1"])
print("max |h|:", np.abs(hypersurface.extrinsic_at(geo, plane, [0.1, 0.4, 1.2]).h).max())

traj = ambient.integrate_geodesic(geo, [0, 0.3, 1.2, 1.6], [0.3, 0.5, 0.2, 1.0], 1.0, 1e-3)
x = traj.positions
print("max distance:", np.abs(x[:, 3] - 2 * x[:, 1] - 1).max())
print("norm drift:", traj.norm_drift.max())

# %% [markdown]
# Gauss and Codazzi equations are identities, so their residuals measure
# the numerical error of the whole pipeline.

# %%
inst = get_entry("thm4.3-case4").instantiate()
for u in inst.sample(3, rng):
    print(hypersurface.gauss_codazzi_residuals(inst.geo, inst.F, u))

# %% [markdown]
# Every catalog family against its claimed verdicts.

# %%
for entry in catalog_list():
    inst = entry.instantiate()
    rep = hypersurface.classify(inst.geo, inst.F, inst.sample(20, rng))
    v = rep.verdicts()
    ok = all(v[k] == want for k, want in inst.expected.items())
    flags = " ".join(k[:3] for k, b in v.items() if b)
    print(f"{entry.name:15} ok={ok!s:5} |tr h|={abs(rep.trace_mean):.6f} max|h|={rep.max_h:.2e} max|nabla h|={rep.max_nabla_h:.1e}  [{flags}]")

# %% [markdown]
# Mean curvature of the first parallel family tracks |cos theta| / beta.

# %%
for theta in np.linspace(0.2, 2.9, 6):
    inst = get_entry("thm4.2-fam1").instantiate(theta=theta, beta=1.5)
    rep = hypersurface.classify(inst.geo, inst.F, inst.sample(5, rng))
    print(f"theta={theta:.3f}  |tr h|={abs(rep.trace_mean):.9f}  |cos|/beta={abs(np.cos(theta)) / 1.5:.9f}")
