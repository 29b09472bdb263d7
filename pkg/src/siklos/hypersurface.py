"""Extrinsic geometry of hypersurfaces F(u1, u2, u3) in a Siklos spacetime.

The second fundamental form follows the Gauss formula
nabla_X Y = nabla^M_X Y + h(X, Y) xi with g(xi, xi) = eps, so in the
coordinate frame F_i = dF/du_i

    h_ij = eps * g(F_ij + Gamma(F_i, F_j), xi).

Mean curvature is (1/3) g_M^ij h_ij. The induced connection comes from the
Koszul formula with exact derivatives of the induced metric (chain rule on
the jets of F and of the ambient metric); the outer derivative in nabla^M h
and in the induced curvature is taken by finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import ambient
from .ambient import AmbientGeometry
from .errors import ChartError, NullNormal, RankDeficient, SampleError, SiklosError
from .exprparse import U_VARS, Expr, parse
from .jets import seed
from .numdiff import richardson_derivative

TOL_H = 1e-7
TOL_P = 1e-6

# orientation: first clearly nonzero component among d3, d4, d1, d2 is positive
_ORIENT_ORDER = (2, 3, 0, 1)


class Immersion:
    """Four component expressions F1..F4 of (u1, u2, u3)."""

    def __init__(self, components: Sequence[Expr | str], name: str | None = None):
        if len(components) != 4:
            raise ValueError(f"an immersion needs 4 components, got {len(components)}")
        exprs = []
        for c in components:
            e = parse(c, U_VARS) if isinstance(c, str) else c
            if not e.free_vars <= set(U_VARS):
                raise ValueError(f"immersion components may only use {U_VARS}")
            exprs.append(e)
        self.components = tuple(exprs)
        self.name = name or "(" + ", ".join(e.src for e in exprs) + ")"

    def point(self, u) -> np.ndarray:
        return np.array([e(*u) for e in self.components])

    def jets(self, u):
        """Position, Jacobian ``dF[a, i]`` and second derivatives ``ddF[a, i, j]``."""
        env = dict(zip(U_VARS, seed(u)))
        x = np.zeros(4)
        dF = np.zeros((4, 3))
        ddF = np.zeros((4, 3, 3))
        for a, e in enumerate(self.components):
            J = e.eval_jet(env)
            x[a] = J.value
            dF[a] = J.grad
            ddF[a] = J.hess
        return x, dF, ddF

    def __repr__(self):
        return f"Immersion({self.name!r})"


@dataclass
class ExtrinsicData:
    u: np.ndarray
    point: np.ndarray
    frame: np.ndarray  # (4, 3): columns dF(d/du_i)
    induced: np.ndarray  # (3, 3)
    normal: np.ndarray  # (4,)
    epsilon: int
    h: np.ndarray  # (3, 3)
    mean_curvature: float
    second: np.ndarray = field(repr=False, default=None)  # (4, 3, 3) F_ij

    @property
    def timelike(self) -> bool:
        return self.epsilon == 1 and np.linalg.det(self.induced) < 0


def null_vector(A: np.ndarray, rel_tol: float = 1e-10) -> np.ndarray:
    """Kernel of a 3x4 matrix of rank 3 by elimination with full pivoting."""
    M = np.array(A, dtype=float)
    rows, cols = M.shape
    scale = np.max(np.abs(M)) or 1.0
    col_perm = list(range(cols))
    for r in range(rows):
        sub = np.abs(M[r:, r:])
        pr, pc = np.unravel_index(np.argmax(sub), sub.shape)
        pr += r
        pc += r
        if sub[pr - r, pc - r] <= rel_tol * scale:
            raise RankDeficient("tangent frame does not have rank 3")
        M[[r, pr]] = M[[pr, r]]
        M[:, [r, pc]] = M[:, [pc, r]]
        col_perm[r], col_perm[pc] = col_perm[pc], col_perm[r]
        M[r] /= M[r, r]
        for q in range(rows):
            if q != r:
                M[q] -= M[q, r] * M[r]
    # reduced form [I | c]: pivot variables equal -c times the free one
    y = np.empty(cols)
    y[:rows] = -M[:, rows]
    y[rows] = 1.0
    x = np.empty(cols)
    x[col_perm] = y
    return x


def orient(xi: np.ndarray) -> np.ndarray:
    big = np.max(np.abs(xi))
    for k in _ORIENT_ORDER:
        if abs(xi[k]) > 1e-8 * big:
            return xi if xi[k] > 0 else -xi
    return xi


def extrinsic_at(geo: AmbientGeometry, F: Immersion, u, reference: np.ndarray | None = None) -> ExtrinsicData:
    """Frame, unit normal, induced metric, second fundamental form and mean curvature.

    With ``reference`` the normal is oriented to have a positive Euclidean dot
    product with it instead of following the default orientation rule; finite
    difference stencils use this to keep one orientation.
    """
    u = np.asarray(u, dtype=float)
    x, dF, ddF = F.jets(u)
    if not x[2] > 0:
        raise ChartError(f"F(u) has x3 = {x[2]} <= 0 at u = {u.tolist()}")
    sv = np.linalg.svd(dF, compute_uv=False)
    if sv[-1] <= 1e-10 * max(sv[0], 1e-300):
        raise RankDeficient(f"immersion has rank < 3 at u = {u.tolist()}")
    g = ambient.metric_at(geo, x)
    Gamma = ambient.christoffel_closed(geo, x)
    xi = null_vector(dF.T @ g)
    norm2 = xi @ g @ xi
    if abs(norm2) <= 1e-10 * np.linalg.norm(g, 2) * (xi @ xi):
        raise NullNormal(f"normal is null at u = {u.tolist()}; degenerate hypersurface")
    eps = 1 if norm2 > 0 else -1
    xi = xi / math.sqrt(abs(norm2))
    if reference is None:
        xi = orient(xi)
    elif xi @ reference < 0:
        xi = -xi
    induced = dF.T @ g @ dF
    accel = ddF + np.einsum("abc,bi,cj->aij", Gamma, dF, dF)
    h = eps * np.einsum("aij,ab,b->ij", accel, g, xi)
    mean = float(np.trace(np.linalg.solve(induced, h)) / 3.0)
    return ExtrinsicData(u, x, dF, induced, xi, eps, h, mean, ddF)


def induced_derivatives(geo: AmbientGeometry, F: Immersion, u):
    """Induced metric and its exact first derivatives ``d[k, i, j] = d_k g_M,ij``."""
    u = np.asarray(u, dtype=float)
    x, dF, ddF = F.jets(u)
    g, dg, _ = ambient.metric_derivatives(geo, x)
    induced = dF.T @ g @ dF
    # dg along the immersion: d_k (g_ab o F) = dg[c, a, b] F^c_k
    d = np.einsum("cab,ck,ai,bj->kij", dg, dF, dF, dF)
    t = np.einsum("ab,aik,bj->kij", g, ddF, dF)
    d = d + t + t.transpose(0, 2, 1)
    return induced, d


def induced_christoffel(geo: AmbientGeometry, F: Immersion, u) -> np.ndarray:
    """Levi-Civita connection of the induced metric, ``G[k, i, j]``."""
    induced, d = induced_derivatives(geo, F, u)
    lowered = 0.5 * (np.einsum("ijl->lij", d) + np.einsum("jil->lij", d) - d)
    return np.einsum("kl,lij->kij", np.linalg.inv(induced), lowered)


def induced_riemann(geo: AmbientGeometry, F: Immersion, u) -> np.ndarray:
    """Curvature of the induced metric, ``r[l, i, j, k]``, by differencing the connection."""
    return ambient.riemann_from_christoffel(lambda v: induced_christoffel(geo, F, v), u)


def _h_field(geo, F, reference):
    return lambda v: extrinsic_at(geo, F, v, reference).h


def h_derivatives(geo: AmbientGeometry, F: Immersion, u, steps=None, base: ExtrinsicData | None = None) -> np.ndarray:
    """``dh[i, j, k] = d_i h_jk`` by Richardson-extrapolated central differences."""
    u = np.asarray(u, dtype=float)
    if base is None:
        base = extrinsic_at(geo, F, u)
    field_ = _h_field(geo, F, base.normal)
    return np.array(
        [richardson_derivative(field_, u, i, None if steps is None else steps[i]) for i in range(3)]
    )


def nabla_h(geo: AmbientGeometry, F: Immersion, u, base: ExtrinsicData | None = None, steps=None) -> np.ndarray:
    """t[i, j, k] = (nabla^M h)(d_i, d_j, d_k) = d_i h_jk - G^l_ij h_lk - G^l_ik h_jl."""
    u = np.asarray(u, dtype=float)
    if base is None:
        base = extrinsic_at(geo, F, u)
    dh = h_derivatives(geo, F, u, steps, base)
    G = induced_christoffel(geo, F, u)
    h = base.h
    return dh - np.einsum("lij,lk->ijk", G, h) - np.einsum("lik,jl->ijk", G, h)


def codazzi_asymmetry(t: np.ndarray) -> float:
    return float(np.max(np.abs(t - t.transpose(1, 0, 2))))


def gauss_codazzi_residuals(geo: AmbientGeometry, F: Immersion, u, base=None, t=None) -> dict:
    """Largest violation of the Gauss and Codazzi equations over frame indices."""
    u = np.asarray(u, dtype=float)
    if base is None:
        base = extrinsic_at(geo, F, u)
    if t is None:
        t = nabla_h(geo, F, u, base)
    x, E, h, eps = base.point, base.frame, base.h, base.epsilon
    low = ambient.lower_riemann(geo, x, ambient.riemann_closed(geo, x))
    ambient_tan = np.einsum("abcd,ai,bj,ck,dm->ijkm", low, E, E, E, E)
    rm = induced_riemann(geo, F, u)
    intrinsic = np.einsum("lm,lijk->ijkm", base.induced, rm)
    hh = np.einsum("ik,jm->ijkm", h, h) - np.einsum("im,jk->ijkm", h, h)
    gauss = np.max(np.abs(ambient_tan - intrinsic - eps * hh))
    ambient_norm = np.einsum("abcd,ai,bj,ck,d->ijk", low, E, E, E, base.normal)
    codazzi = np.max(np.abs(ambient_norm - eps * (t - t.transpose(1, 0, 2))))
    return {"gauss": float(gauss), "codazzi": float(codazzi)}


@dataclass
class ClassificationReport:
    totally_geodesic: bool
    parallel: bool
    codazzi: bool
    minimal: bool
    cmc: bool
    max_h: float
    max_nabla_h: float
    max_codazzi_asymmetry: float
    max_abs_trace: float
    trace_min: float
    trace_max: float
    trace_mean: float
    epsilons: list
    all_timelike: bool
    samples: int
    notes: str = ""

    @property
    def trace_spread(self) -> float:
        return self.trace_max - self.trace_min

    def verdicts(self) -> dict:
        return {
            "totally_geodesic": self.totally_geodesic,
            "parallel": self.parallel,
            "codazzi": self.codazzi,
            "minimal": self.minimal,
            "cmc": self.cmc,
        }

    def residuals(self) -> dict:
        return {
            "max_h": self.max_h,
            "max_nabla_h": self.max_nabla_h,
            "max_codazzi_asymmetry": self.max_codazzi_asymmetry,
            "max_abs_trace": self.max_abs_trace,
            "trace_spread": self.trace_spread,
            "trace_mean": self.trace_mean,
        }


def classify(
    geo: AmbientGeometry,
    F: Immersion,
    samples,
    tol_h: float = TOL_H,
    tol_p: float = TOL_P,
) -> ClassificationReport:
    """Evaluate h, nabla^M h and tr h at every sample and reduce to verdicts."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    max_h = max_t = max_asym = 0.0
    traces = []
    epsilons = []
    timelike = True
    failures = []
    for u in samples:
        try:
            ex = extrinsic_at(geo, F, u)
            t = nabla_h(geo, F, u, ex)
        except SiklosError as exc:
            failures.append((u.tolist(), str(exc)))
            continue
        max_h = max(max_h, float(np.max(np.abs(ex.h))))
        max_t = max(max_t, float(np.max(np.abs(t))))
        max_asym = max(max_asym, codazzi_asymmetry(t))
        traces.append(ex.mean_curvature)
        epsilons.append(ex.epsilon)
        timelike = timelike and ex.timelike
    if failures:
        pts = "; ".join(f"u={p}: {msg}" for p, msg in failures[:5])
        raise SampleError(f"{len(failures)} sample(s) failed: {pts}", [p for p, _ in failures])
    traces = np.array(traces)
    return ClassificationReport(
        totally_geodesic=bool(max_h < tol_h),
        parallel=bool(max_t < tol_p),
        codazzi=bool(max_asym < tol_p),
        minimal=bool(np.max(np.abs(traces)) < tol_h),
        cmc=bool(traces.max() - traces.min() < tol_h),
        max_h=max_h,
        max_nabla_h=max_t,
        max_codazzi_asymmetry=max_asym,
        max_abs_trace=float(np.max(np.abs(traces))),
        trace_min=float(traces.min()),
        trace_max=float(traces.max()),
        trace_mean=float(traces.mean()),
        epsilons=sorted(set(epsilons)),
        all_timelike=bool(timelike),
        samples=len(samples),
    )


def project_to_image(F: Immersion, x, u0, iters: int = 30, tol: float = 1e-14):
    """Gauss-Newton foot point of ``x`` on F; returns (coordinate distance, u)."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u0, dtype=float).copy()
    for _ in range(iters):
        p, dF, _ = F.jets(u)
        step = np.linalg.lstsq(dF, x - p, rcond=None)[0]
        u += step
        if np.max(np.abs(step)) < tol:
            break
    return float(np.linalg.norm(x - F.point(u))), u
