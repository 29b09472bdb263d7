"""Intrinsic geometry of the Siklos metric

    g = (beta^2 / x3^2) (2 dx1 dx2 + H dx2^2 + dx3^2 + dx4^2),   x3 > 0.

Arrays are 0-based: index 0..3 stands for x1..x4. Christoffel symbols are
stored as ``gamma[k, i, j]`` (upper index first) and the curvature as
``r[l, i, j, k]`` with R(d_i, d_j) d_k = r[l, i, j, k] d_l, where
R(X, Y) = [nabla_X, nabla_Y] - nabla_[X, Y].

Every quantity has two independent routes: the closed-form tables
(``christoffel_closed``, ``riemann_closed``) and generic numerics
(``christoffel_koszul`` from metric jets, ``riemann_from_gamma`` from finite
differences of the connection).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import jets
from .errors import ChartError, ChartExit, SingularMetric, StepError
from .exprparse import H_VARS, Expr, parse
from .numdiff import richardson_derivative

DEFAULT_TOL = 1e-8


class DefiningFunction:
    """H(x2, x3, x4) with order-2 jets, built from an expression."""

    def __init__(self, expr: Expr | str, name: str | None = None):
        if isinstance(expr, str):
            expr = parse(expr, H_VARS)
        if not expr.free_vars <= set(H_VARS):
            raise ValueError(f"H may only depend on {H_VARS}, got {sorted(expr.free_vars)}")
        self.expr = expr
        self.name = name or expr.src

    def __call__(self, x2, x3, x4) -> float:
        return self.expr(x2, x3, x4)

    def jet(self, x2, x3, x4) -> jets.Jet2:
        """Value, (H'_2, H'_3, H'_4) and the Hessian in (x2, x3, x4)."""
        return self.expr.eval_jet(jets.seed([x2, x3, x4]))

    def __repr__(self):
        return f"DefiningFunction({self.name!r})"


@dataclass(frozen=True)
class AmbientGeometry:
    H: DefiningFunction
    beta: float = 1.0

    def __post_init__(self):
        if not isinstance(self.H, DefiningFunction):
            object.__setattr__(self, "H", DefiningFunction(self.H))
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")

    @property
    def cosmological_constant(self) -> float:
        return -3.0 / self.beta**2


class FHelpers(NamedTuple):
    f1: float
    f2: float
    f3: float
    f4: float


@dataclass
class Predicates:
    einstein: bool
    conformally_flat: bool
    constant_curvature: bool
    residuals: dict = field(default_factory=dict)


def _point(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (4,):
        raise ValueError(f"expected 4 coordinates, got shape {p.shape}")
    if not p[2] > 0:
        raise ChartError(f"x3 must be positive, got {p[2]}")
    return p


def _h_jet(geo, p):
    return geo.H.jet(p[1], p[2], p[3])


def metric_at(geo: AmbientGeometry, p) -> np.ndarray:
    p = _point(p)
    conf = geo.beta**2 / p[2] ** 2
    g = np.zeros((4, 4))
    g[0, 1] = g[1, 0] = g[2, 2] = g[3, 3] = conf
    g[1, 1] = conf * geo.H(p[1], p[2], p[3])
    return g


def inverse_metric(g: np.ndarray) -> np.ndarray:
    """Inverse of a Siklos metric matrix (null 2x2 block plus diagonal)."""
    g = np.asarray(g, dtype=float)
    a, b, c = g[0, 0], g[0, 1], g[1, 1]
    det_block = a * c - b * b
    if det_block == 0 or g[2, 2] == 0 or g[3, 3] == 0:
        raise SingularMetric("metric is degenerate")
    off = np.abs(g.copy())
    off[:2, :2] = 0
    off[2, 2] = off[3, 3] = 0
    if off.any():
        # not block shaped; fall back to a general inverse
        if abs(np.linalg.det(g)) == 0:
            raise SingularMetric("metric is degenerate")
        return np.linalg.inv(g)
    inv = np.zeros((4, 4))
    inv[0, 0] = c / det_block
    inv[0, 1] = inv[1, 0] = -b / det_block
    inv[1, 1] = a / det_block
    inv[2, 2] = 1.0 / g[2, 2]
    inv[3, 3] = 1.0 / g[3, 3]
    return inv


def christoffel_closed(geo: AmbientGeometry, p) -> np.ndarray:
    """Connection coefficients transcribed from the closed-form table."""
    p = _point(p)
    x3 = p[2]
    J = _h_jet(geo, p)
    H = J.value
    H2, H3, H4 = J.grad
    G = np.zeros((4, 4, 4))

    def put(k, i, j, val):
        G[k - 1, i - 1, j - 1] = val
        G[k - 1, j - 1, i - 1] = val

    put(3, 1, 2, 1.0 / x3)
    put(1, 1, 3, -1.0 / x3)
    put(1, 2, 2, 0.5 * H2)
    put(3, 2, 2, (2.0 * H - x3 * H3) / (2.0 * x3))
    put(4, 2, 2, -0.5 * H4)
    put(1, 2, 4, 0.5 * H4)
    put(1, 2, 3, 0.5 * H3)
    put(2, 2, 3, -1.0 / x3)
    put(4, 3, 4, -1.0 / x3)
    put(3, 3, 3, -1.0 / x3)
    put(3, 4, 4, 1.0 / x3)
    return G


def metric_jets(geo: AmbientGeometry, p):
    """Metric components as jets over (x2, x3, x4); nothing depends on x1."""
    p = _point(p)
    x2, x3, x4 = jets.seed(p[1:])
    conf = geo.beta**2 * x3.ipow(-2)
    H = geo.H.expr.eval_jet({"x2": x2, "x3": x3, "x4": x4})
    zero = jets.constant(0.0, 3)
    g = [[zero] * 4 for _ in range(4)]
    g[0][1] = g[1][0] = g[2][2] = g[3][3] = conf
    g[1][1] = conf * H
    return g


def metric_derivatives(geo: AmbientGeometry, p):
    """Metric, first and second coordinate derivatives from jets.

    Returns ``(g, dg, ddg)`` with ``dg[c, a, b] = d_c g_ab`` and
    ``ddg[c, d, a, b] = d_c d_d g_ab``.
    """
    gj = metric_jets(geo, p)
    g = np.zeros((4, 4))
    dg = np.zeros((4, 4, 4))
    ddg = np.zeros((4, 4, 4, 4))
    for a in range(4):
        for b in range(4):
            J = gj[a][b]
            g[a, b] = J.value
            dg[1:, a, b] = J.grad
            ddg[1:, 1:, a, b] = J.hess
    return g, dg, ddg


def christoffel_koszul(geo: AmbientGeometry, p) -> np.ndarray:
    """Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij) from metric jets."""
    g, dg, _ = metric_derivatives(geo, p)
    ginv = np.linalg.inv(g)
    # lowered[l, i, j] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    lowered = 0.5 * (
        np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg
    )
    return np.einsum("kl,lij->kij", ginv, lowered)


def f_helpers(geo: AmbientGeometry, p) -> FHelpers:
    p = _point(p)
    x3 = p[2]
    J = _h_jet(geo, p)
    H, H3 = J.value, J.grad[1]
    H33, H44 = J.hess[1, 1], J.hess[2, 2]
    return FHelpers(
        2 * H - x3 * H3 + x3**2 * H33,
        x3 * H33 - H3,
        2 * H - x3 * H3 + x3**2 * H44,
        x3 * H44 - H3,
    )


def _riemann_table(geo, p):
    """Listed components (i, j, k) -> {l: value} of R(d_i, d_j) d_k, 1-based."""
    x3 = p[2]
    J = _h_jet(geo, p)
    H = J.value
    H34 = J.hess[1, 2]
    f1, f2, f3, f4 = f_helpers(geo, p)
    s = 1.0 / x3**2
    return {
        (1, 2, 1): {1: -s},
        (1, 2, 2): {1: -H * s, 2: s},
        (1, 3, 2): {3: s},
        (1, 3, 3): {1: -s},
        (1, 4, 2): {4: s},
        (1, 4, 4): {1: -s},
        (2, 3, 1): {3: s},
        (2, 3, 2): {3: f1 * s / 2, 4: H34 / 2},
        # the f2 and f4 terms carry 1/(2 x3), not 1/(2 x3^2); pair symmetry with
        # R(d2, d3) d2 and R(d2, d4) d2 forces this
        (2, 3, 3): {1: -f2 / (2 * x3), 2: -s},
        (2, 3, 4): {1: -H34 / 2},
        (2, 4, 1): {4: s},
        (2, 4, 2): {4: f3 * s / 2, 3: H34 / 2},
        (2, 4, 3): {1: -H34 / 2},
        (2, 4, 4): {1: -f4 / (2 * x3), 2: -s},
        (3, 4, 3): {4: s},
        (3, 4, 4): {3: -s},
    }


def riemann_closed(geo: AmbientGeometry, p) -> np.ndarray:
    """Curvature transcribed from the closed-form table.

    Each listed R(d_i, d_j) d_k (i < j) is also stored as -R(d_j, d_i) d_k;
    every other component is zero (checked against ``riemann_from_gamma``).
    """
    p = _point(p)
    r = np.zeros((4, 4, 4, 4))
    for (i, j, k), comps in _riemann_table(geo, p).items():
        for l, val in comps.items():
            r[l - 1, i - 1, j - 1, k - 1] = val
            r[l - 1, j - 1, i - 1, k - 1] = -val
    return r


def riemann_from_christoffel(christoffel, p, steps=None) -> np.ndarray:
    """R^l_ijk = d_i G^l_jk - d_j G^l_ik + G^l_im G^m_jk - G^l_jm G^m_ik.

    ``christoffel`` maps a point to a (4, 4, 4) array; its derivatives are taken
    by Richardson-extrapolated central differences. Works in any dimension;
    the hypersurface module reuses it for the induced connection.
    """
    p = np.asarray(p, dtype=float)
    n = p.shape[0]
    G = christoffel(p)
    dG = np.zeros((n, n, n, n))  # dG[i, l, j, k] = d_i G^l_jk
    for i in range(n):
        step = None if steps is None else steps[i]
        dG[i] = richardson_derivative(christoffel, p, i, step)
    return (
        np.einsum("iljk->lijk", dG)
        - np.einsum("jlik->lijk", dG)
        + np.einsum("lim,mjk->lijk", G, G)
        - np.einsum("ljm,mik->lijk", G, G)
    )


def riemann_from_gamma(geo: AmbientGeometry, p) -> np.ndarray:
    """Numeric curvature from finite differences of :func:`christoffel_closed`."""
    p = _point(p)
    return riemann_from_christoffel(lambda q: christoffel_closed(geo, q), p)


def lower_riemann(geo: AmbientGeometry, p, r: np.ndarray) -> np.ndarray:
    """R_ijkm = g(R(d_i, d_j) d_k, d_m)."""
    return np.einsum("lm,lijk->ijkm", metric_at(geo, p), r)


def symmetry_residuals(low: np.ndarray) -> dict:
    """Largest violation of each algebraic symmetry of a lowered curvature tensor."""
    return {
        "antisym_ij": float(np.max(np.abs(low + low.transpose(1, 0, 2, 3)))),
        "antisym_km": float(np.max(np.abs(low + low.transpose(0, 1, 3, 2)))),
        "pair": float(np.max(np.abs(low - low.transpose(2, 3, 0, 1)))),
        "bianchi": float(
            np.max(
                np.abs(
                    low
                    + low.transpose(1, 2, 0, 3)  # R_jkim -> index order (i,j,k,m)
                    + low.transpose(2, 0, 1, 3)
                )
            )
        ),
    }


def sectional_curvature(geo: AmbientGeometry, p, X, Y, r=None) -> float:
    """K(X, Y) = g(R(X, Y) Y, X) / (g(X, X) g(Y, Y) - g(X, Y)^2)."""
    g = metric_at(geo, p)
    if r is None:
        r = riemann_closed(geo, p)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    RXYY = np.einsum("lijk,i,j,k->l", r, X, Y, Y)
    denom = (X @ g @ X) * (Y @ g @ Y) - (X @ g @ Y) ** 2
    return float(RXYY @ g @ X / denom)


def constant_curvature_tensor(geo: AmbientGeometry, p) -> np.ndarray:
    """R(X, Y) Z = -(1/beta^2) (g(Y, Z) X - g(X, Z) Y) in the r[l, i, j, k] layout."""
    g = metric_at(geo, p)
    eye = np.eye(4)
    return -(np.einsum("jk,li->lijk", g, eye) - np.einsum("ik,lj->lijk", g, eye)) / geo.beta**2


def predicates(geo: AmbientGeometry, p, tol: float = DEFAULT_TOL) -> Predicates:
    p = _point(p)
    x3 = p[2]
    J = _h_jet(geo, p)
    H3 = J.grad[1]
    H33, H34, H44 = J.hess[1, 1], J.hess[1, 2], J.hess[2, 2]
    einstein_res = abs(2.0 / x3 * H3 - H33 - H44)
    cf_diag = abs(H33 - H44)
    cf_mixed = abs(H34)
    einstein = bool(einstein_res < tol)
    cflat = bool(cf_diag < tol and cf_mixed < tol)
    return Predicates(
        einstein=einstein,
        conformally_flat=cflat,
        constant_curvature=einstein and cflat,
        residuals={
            "einstein": float(einstein_res),
            "conformally_flat": float(max(cf_diag, cf_mixed)),
            "H33_minus_H44": float(cf_diag),
            "H34": float(cf_mixed),
        },
    )


def codazzi_angle_condition(geo: AmbientGeometry, p, theta: float) -> float:
    """sin(2 theta)(H''_33 - H''_44) - 2 cos(2 theta) H''_34 at ``p``."""
    p = _point(p)
    J = _h_jet(geo, p)
    H33, H34, H44 = J.hess[1, 1], J.hess[1, 2], J.hess[2, 2]
    return float(math.sin(2 * theta) * (H33 - H44) - 2 * math.cos(2 * theta) * H34)


@dataclass
class Trajectory:
    t: np.ndarray
    states: np.ndarray  # rows: x1..x4, v1..v4
    norm: np.ndarray  # g(v, v) along the curve

    @property
    def positions(self):
        return self.states[:, :4]

    @property
    def velocities(self):
        return self.states[:, 4:]

    @property
    def norm_drift(self):
        return np.abs(self.norm - self.norm[0])


def integrate_geodesic(geo: AmbientGeometry, p0, v0, t_end: float, dt: float) -> Trajectory:
    """Classical RK4 for x'' + Gamma(x', x') = 0, sampled at every step."""
    if not dt > 0:
        raise StepError(f"dt must be positive, got {dt}")
    p0 = _point(p0)
    v0 = np.asarray(v0, dtype=float)

    def rhs(y):
        if not y[2] > 0:
            raise ChartExit(f"trajectory left the chart: x3 = {y[2]}")
        G = christoffel_closed(geo, y[:4])
        v = y[4:]
        return np.concatenate([v, -np.einsum("kij,i,j->k", G, v, v)])

    nsteps = int(math.ceil(t_end / dt - 1e-9))
    y = np.concatenate([p0, v0])
    ts = [0.0]
    ys = [y]
    t = 0.0
    for _ in range(nsteps):
        h = min(dt, t_end - t)
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not y[2] > 0:
            raise ChartExit(f"trajectory left the chart at t = {t + h}: x3 = {y[2]}")
        t += h
        ts.append(t)
        ys.append(y)
    states = np.array(ys)
    norms = np.array([s[4:] @ metric_at(geo, s[:4]) @ s[4:] for s in states])
    return Trajectory(np.array(ts), states, norms)
