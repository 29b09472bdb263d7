"""Defining functions and immersion families with known classification.

Each :class:`CatalogEntry` builds a Siklos ambient space and an immersion from
a handful of parameters and records which properties the family is known to
have (totally geodesic, parallel, Codazzi, minimal, CMC and, where known, the
value of |tr h|). Side conditions the family relies on, such as
``H''_34 = 0`` along the image, are attached as residual functions so they can
be checked before classifying.

    >>> inst = get_entry("thm4.3-case6").instantiate(k=2)
    >>> inst.geo.H.name
    '1.0*x3^(4.0)'
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ambient import AmbientGeometry, DefiningFunction
from .errors import DomainViolation
from .exprparse import H_VARS, U_VARS, parse
from .hypersurface import Immersion
from .jets import seed

FLAGS = ("totally_geodesic", "parallel", "codazzi", "minimal", "cmc")

DEFAULTS = dict(beta=1.0, rho=1.0, C=2.0, D=1.0, E=1.0, lam=2.0, mu=1.0, theta=math.pi / 3)

# homogeneous presets H = eps * x3^(2k)
PRESETS = {
    "defrise": dict(epsilon=1, k=-1.0),
    "kaigorodov": dict(epsilon=1, k=1.5),
    "ozsvath": dict(epsilon=1, k=2.0),
}

WIDE = (-2.0, 2.0)
X3_RANGE = (0.5, 3.0)
RADICAND_MIN = 0.25


def num(x: float) -> str:
    """Format a number for expression text; negatives are parenthesised."""
    text = repr(float(x))
    return f"({text})" if text.startswith("-") else text


def homogeneous_H(epsilon: float, k: float) -> str:
    if epsilon not in (1, -1):
        raise ValueError(f"epsilon must be +1 or -1, got {epsilon}")
    return f"{num(epsilon)}*x3^({float(2 * k)!r})"


def preset_H(name: str, epsilon: float | None = None, k: float | None = None) -> DefiningFunction:
    """Named homogeneous H (``defrise``, ``kaigorodov``, ``ozsvath``) or ``homogeneous``."""
    if name == "homogeneous":
        if epsilon is None or k is None:
            raise ValueError("the homogeneous preset needs epsilon and k")
        return DefiningFunction(homogeneous_H(epsilon, k), name=f"homogeneous(eps={epsilon}, k={k})")
    try:
        p = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown H preset {name!r}; known: {sorted(PRESETS)} or 'homogeneous'") from None
    eps = p["epsilon"] if epsilon is None else epsilon
    return DefiningFunction(homogeneous_H(eps, p["k"]), name=name)


@dataclass(frozen=True)
class Precondition:
    name: str
    residual: Callable  # (instance, u) -> float


@dataclass
class Instance:
    """A catalog entry with concrete parameters."""

    entry: CatalogEntry
    params: dict
    geo: AmbientGeometry
    F: Immersion
    box: list
    expected: dict
    cmc_value: float | None
    notes: str = ""

    @property
    def name(self):
        return self.entry.name

    def admissible(self, u) -> bool:
        u = np.asarray(u, dtype=float)
        lo, hi = np.array(self.box).T
        if np.any(u < lo) or np.any(u > hi):
            return False
        if self.entry.admissible is not None:
            return bool(self.entry.admissible(self.params, u))
        return True

    def sample(self, n: int, rng: np.random.Generator, max_tries: int = 100) -> np.ndarray:
        lo, hi = np.array(self.box).T
        out = []
        tries = 0
        while len(out) < n:
            tries += 1
            if tries > max_tries * n:
                raise DomainViolation(f"{self.name}: could not draw {n} admissible samples")
            u = rng.uniform(lo, hi)
            if self.admissible(u):
                out.append(u)
        return np.array(out)

    def H_along(self, u):
        """Jet of H at F(u) (derivatives in x2, x3, x4)."""
        x = self.F.point(u)
        return self.geo.H.jet(x[1], x[2], x[3])


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    description: str
    defaults: dict
    make_H: Callable[[dict], str]
    make_F: Callable[[dict], list]
    make_box: Callable[[dict], list]
    expected: Callable[[dict], dict]
    cmc_value: Callable[[dict], float | None] = lambda p: None
    preconditions: tuple = ()
    admissible: Callable | None = None
    validate: Callable[[dict], None] = lambda p: None
    assumptions: str = ""
    free_H: bool = False  # whether H may be replaced by a user expression

    def instantiate(self, **overrides) -> Instance:
        unknown = set(overrides) - set(self.defaults) - {"H"}
        if unknown:
            raise ValueError(f"{self.name}: unknown parameter(s) {sorted(unknown)}")
        if "H" in overrides and not self.free_H:
            raise ValueError(f"{self.name}: H is fixed by the family; set epsilon/k instead")
        params = {**self.defaults, **{k: v for k, v in overrides.items() if v is not None}}
        if params.get("beta", 1.0) <= 0:
            raise ValueError("beta must be positive")
        self.validate(params)
        H_text = params["H"] if "H" in params else self.make_H(params)
        geo = AmbientGeometry(DefiningFunction(parse(H_text, H_VARS)), float(params["beta"]))
        F = Immersion(self.make_F(params), name=self.name)
        return Instance(
            entry=self,
            params=params,
            geo=geo,
            F=F,
            box=[tuple(map(float, b)) for b in self.make_box(params)],
            expected=self.expected(params),
            cmc_value=self.cmc_value(params),
            notes=self.assumptions,
        )


def check_preconditions(inst: Instance, samples) -> dict:
    """Largest residual of every side condition of ``inst`` over ``samples``."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    for u in samples:
        if not inst.admissible(u):
            raise DomainViolation(f"{inst.name}: sample {u.tolist()} is outside the admissible region")
    out = {}
    for pre in inst.entry.preconditions:
        out[pre.name] = max(abs(float(pre.residual(inst, u))) for u in samples)
    return out


# -- residual helpers --------------------------------------------------------


def _hess(i, j):
    # H''_ij with 1-based ambient indices among x2, x3, x4
    return lambda inst, u: inst.H_along(u).hess[i - 2, j - 2]


def _grad(i):
    return lambda inst, u: inst.H_along(u).grad[i - 2]


def _ode_residual(inst, u):
    """2 f''(u2) - H'_4(F(u)) for F = (u1, u2, u3, f(u2))."""
    f = inst.F.components[3]
    fpp = f.eval_jet(dict(zip(U_VARS, seed(u)))).hess[1, 1]
    return 2.0 * fpp - inst.H_along(u).grad[2]


def _angle_residual(inst, u):
    """sin(2t)(H''_33 - H''_44) - 2 cos(2t) H''_34 along F."""
    t = inst.params["theta"]
    J = inst.H_along(u)
    return math.sin(2 * t) * (J.hess[1, 1] - J.hess[2, 2]) - 2 * math.cos(2 * t) * J.hess[1, 2]


def _tangent_condition(inst, u):
    """cos(t) H'_3 + sin(t) H'_4 along F, i.e. H'_3 = -tan(t) H'_4."""
    t = inst.params["theta"]
    J = inst.H_along(u)
    return math.cos(t) * J.grad[1] + math.sin(t) * J.grad[2]


def _homogeneous_residual(inst, u):
    p = inst.params
    x = inst.F.point(u)
    return inst.geo.H(x[1], x[2], x[3]) - p["epsilon"] * x[2] ** (2 * p["k"])


def _param_residual(key, target):
    return lambda inst, u: inst.params[key] - target


# -- expectations ----------------------------------------------------------


def _totally_geodesic(p):
    return dict.fromkeys(FLAGS, True)


def _proper_parallel(p):
    return dict(totally_geodesic=False, parallel=True, codazzi=True, cmc=True)


def _free_function(p):
    exp = dict(minimal=True, codazzi=True)
    if "H" not in p and p["f"] == THM32_DEFAULT_F:
        # for the default data the cylinder is not parallel (f'' - H'_4/2 = 2 - u2/2)
        exp.update(parallel=False, totally_geodesic=False)
    return exp


def _log_box(lo_coef, sign=1.0):
    """u-range so that x3 = lo_coef * exp(sign * u) stays in X3_RANGE."""
    if lo_coef <= 0:
        raise ValueError("the x3 coefficient must be positive to stay on the chart x3 > 0")
    a = math.log(X3_RANGE[0] / lo_coef) * sign
    b = math.log(X3_RANGE[1] / lo_coef) * sign
    return (min(a, b), max(a, b))


# -- families ----------------------------------------------------------------

THM32_DEFAULT_F = "u2^2"


def _cylinder_F(p):
    return ["u1", "u2", "u3", p["f"]]


def _validate_cylinder(p):
    parse(p["f"], U_VARS)
    if parse(p["f"], U_VARS).free_vars - {"u2"}:
        raise ValueError("f may only depend on u2")


def _validate_cor35(p):
    if "H" in p and "x4" in parse(p["H"], H_VARS).free_vars:
        raise ValueError("this family needs H independent of x4")


def _validate_angle(p):
    t = p["theta"]
    if abs(math.cos(t)) < 1e-9 or abs(math.sin(t)) < 1e-9:
        raise ValueError("theta must avoid multiples of pi/2 (cot and the normal angle degenerate)")


def _fam1_H(p):
    s, c = math.sin(p["theta"]), math.cos(p["theta"])
    w = f"({num(s)}*x3-{num(c)}*x4)"
    # depends on x3, x4 only through sin(t) x3 - cos(t) x4, so H'_3 = -tan(t) H'_4
    return f"x2*{w}+{w}^2"


def _fam1_F(p):
    t, rho, C = p["theta"], p["rho"], p["C"]
    cot = math.cos(t) / math.sin(t)
    return ["u1", "u3", f"{num(rho)}*exp(u2)", f"{num(-cot * rho)}*exp(u2)+{num(C)}"]


def _validate_positive(*keys):
    def check(p):
        for k in keys:
            if not p[k] > 0:
                raise ValueError(f"{k} must be positive (x3 = {k} * ... must stay on the chart)")

    return check


def _homogeneous_validate(k=None, epsilon=None, k_not=None):
    def check(p):
        if p["epsilon"] not in (1, -1):
            raise ValueError("epsilon must be +1 or -1")
        if k is not None and not math.isclose(p["k"], k, abs_tol=1e-12):
            raise ValueError(f"this case requires k = {k}, got {p['k']}")
        if epsilon is not None and p["epsilon"] != epsilon:
            raise ValueError(f"this case requires epsilon = {epsilon}")
        if k_not is not None and math.isclose(p["k"], k_not, abs_tol=1e-12):
            raise ValueError(f"this case requires k != {k_not}")

    return check


def _chain(*checks):
    def check(p):
        for c in checks:
            c(p)

    return check


def _hom_H(p):
    return homogeneous_H(p["epsilon"], p["k"])


def _case2_K(p):
    return p["C"] * math.cos(p["theta"]) / p["beta"]


def _case2_F(p):
    eps, beta, D, t = p["epsilon"], p["beta"], p["D"], p["theta"]
    K = _case2_K(p)
    cot = math.cos(t) / math.sin(t)
    F2 = f"{num(-eps * 2.0 / K)}*sqrt({num(-eps * K * K)}*u3+{num(D)})"
    return ["u1", F2, f"{num(beta)}*u2", f"{num(-cot)}*({num(beta)}*u2+u3)"]


def _case2_radicand(p, u):
    K = _case2_K(p)
    return -p["epsilon"] * K * K * u[2] + p["D"]


def _case2_box(p):
    beta = p["beta"]
    K2 = _case2_K(p) ** 2
    lo, hi = WIDE
    # keep the radicand above RADICAND_MIN
    bound = (p["D"] - RADICAND_MIN) / K2
    if p["epsilon"] == 1:
        hi = min(hi, bound)
    else:
        lo = max(lo, -bound)
    if not lo < hi:
        raise ValueError("no u3 range keeps the square-root argument positive; increase D")
    return [WIDE, (X3_RANGE[0] / beta, X3_RANGE[1] / beta), (lo, hi)]


def _validate_case2(p):
    _validate_angle(p)
    if p["C"] == 0:
        raise ValueError("C must be nonzero")


_ENTRIES = [
    CatalogEntry(
        name="thm3.2",
        description="Codazzi cylinder (u1, u2, u3, f(u2)) with H''_34 = 0 along it; minimal",
        defaults=dict(beta=1.0, f=THM32_DEFAULT_F),
        make_H=lambda p: "x3^2+x2*x4",
        make_F=_cylinder_F,
        make_box=lambda p: [WIDE, WIDE, X3_RANGE],
        expected=_free_function,
        preconditions=(Precondition("H34", _hess(3, 4)),),
        validate=_validate_cylinder,
        free_H=True,
    ),
    CatalogEntry(
        name="thm3.4",
        description="totally geodesic cylinder (u1, u2, u3, f(u2)) with 2 f'' = H'_4 and H''_34 = 0",
        defaults=dict(beta=1.0, f="exp(u2)"),
        make_H=lambda p: "x3^2+x4^2",
        make_F=_cylinder_F,
        make_box=lambda p: [WIDE, WIDE, X3_RANGE],
        expected=_totally_geodesic,
        preconditions=(Precondition("H34", _hess(3, 4)), Precondition("ode", _ode_residual)),
        validate=_validate_cylinder,
        free_H=True,
    ),
    CatalogEntry(
        name="cor3.5",
        description="hyperplane x4 = lam*x2 + mu for H = H(x2, x3); totally geodesic",
        defaults=dict(beta=1.0, lam=2.0, mu=1.0),
        make_H=lambda p: "x3^2*sin(x2)",
        make_F=lambda p: ["u1", "u2", "u3", f"{num(p['lam'])}*u2+{num(p['mu'])}"],
        make_box=lambda p: [WIDE, WIDE, X3_RANGE],
        expected=_totally_geodesic,
        preconditions=(Precondition("H4", _grad(4)),),
        validate=_validate_cor35,
        free_H=True,
    ),
    CatalogEntry(
        name="thm4.2-fam1",
        description="(u1, u3, rho e^u2, -cot(t) rho e^u2 + C) where H'_3 = -tan(t) H'_4; parallel, |tr h| = |cos t|/beta",
        defaults=dict(beta=1.0, theta=DEFAULTS["theta"], rho=1.0, C=2.0),
        make_H=_fam1_H,
        make_F=_fam1_F,
        make_box=lambda p: [WIDE, _log_box(p["rho"]), WIDE],
        expected=_proper_parallel,
        cmc_value=lambda p: abs(math.cos(p["theta"])) / p["beta"],
        preconditions=(
            Precondition("tangent_condition", _tangent_condition),
            Precondition("angle_condition", _angle_residual),
        ),
        validate=_chain(_validate_angle, _validate_positive("rho")),
        free_H=True,
    ),
    CatalogEntry(
        name="thm4.2-fam2",
        description="(u1, u3, C, u2), the slice x3 = C, where H''_32 = H''_34 = 0; parallel, |tr h| = 1/beta",
        defaults=dict(beta=1.0, C=2.0),
        make_H=lambda p: "x3^4",
        make_F=lambda p: ["u1", "u3", num(p["C"]), "u2"],
        make_box=lambda p: [WIDE, WIDE, WIDE],
        expected=_proper_parallel,
        cmc_value=lambda p: 1.0 / p["beta"],
        preconditions=(Precondition("H32", _hess(3, 2)), Precondition("H34", _hess(3, 4))),
        validate=_validate_positive("C"),
        free_H=True,
    ),
    CatalogEntry(
        name="thm4.3-case1a",
        description="k = 0: (u1, u3, C e^u2, D e^u2)",
        defaults=dict(beta=1.0, epsilon=1, k=0.0, C=2.0, D=1.0),
        make_H=_hom_H,
        make_F=lambda p: ["u1", "u3", f"{num(p['C'])}*exp(u2)", f"{num(p['D'])}*exp(u2)"],
        make_box=lambda p: [WIDE, _log_box(p["C"]), WIDE],
        expected=_proper_parallel,
        preconditions=(Precondition("k", _param_residual("k", 0.0)), Precondition("H3", _grad(3))),
        validate=_chain(_homogeneous_validate(k=0.0), _validate_positive("C")),
        assumptions="C > 0 assumed (implies (C, D) != (0, 0) and keeps x3 > 0)",
    ),
    CatalogEntry(
        name="thm4.3-case1b",
        description="k = 0: (u1, C u3, D e^u2, E e^u2 - u3)",
        defaults=dict(beta=1.0, epsilon=1, k=0.0, C=2.0, D=1.0, E=1.0),
        make_H=_hom_H,
        make_F=lambda p: [
            "u1",
            f"{num(p['C'])}*u3",
            f"{num(p['D'])}*exp(u2)",
            f"{num(p['E'])}*exp(u2)-u3",
        ],
        make_box=lambda p: [WIDE, _log_box(p["D"]), WIDE],
        expected=_proper_parallel,
        preconditions=(Precondition("k", _param_residual("k", 0.0)), Precondition("H3", _grad(3))),
        validate=_chain(_homogeneous_validate(k=0.0), _validate_positive("D")),
    ),
    CatalogEntry(
        name="thm4.3-case2",
        description="k = 1/2: square-root profile in x2 over x3 = beta u2",
        defaults=dict(beta=1.0, epsilon=1, k=0.5, C=1.0, D=1.0, theta=DEFAULTS["theta"]),
        make_H=_hom_H,
        make_F=_case2_F,
        make_box=_case2_box,
        expected=_proper_parallel,
        preconditions=(
            Precondition("H33", _hess(3, 3)),
            Precondition("radicand_margin", lambda inst, u: min(0.0, _case2_radicand(inst.params, u) - RADICAND_MIN)),
        ),
        admissible=lambda p, u: _case2_radicand(p, u) > RADICAND_MIN,
        validate=_chain(_homogeneous_validate(k=0.5), _validate_case2),
        assumptions=(
            f"samples restricted to square-root argument > {RADICAND_MIN}; "
            "x4 uses -cot(t)(beta*u2 + u3), which equals the published form at beta = 1"
        ),
    ),
    CatalogEntry(
        name="thm4.3-case3",
        description="k = 1, eps = 1: (u1, u3, rho e^-u3, -u2 e^-u3)",
        defaults=dict(beta=1.0, epsilon=1, k=1.0, rho=1.0),
        make_H=_hom_H,
        make_F=lambda p: ["u1", "u3", f"{num(p['rho'])}*exp(-u3)", "-u2*exp(-u3)"],
        make_box=lambda p: [WIDE, WIDE, _log_box(p["rho"], -1.0)],
        expected=_proper_parallel,
        preconditions=(Precondition("homogeneous", _homogeneous_residual),),
        validate=_chain(_homogeneous_validate(k=1.0, epsilon=1), _validate_positive("rho")),
    ),
    CatalogEntry(
        name="thm4.3-case4",
        description="k != 1, eps = 1: (u1, u3^(1-k)/(k-1), u3, -u2 u3/beta)",
        defaults=dict(beta=1.0, epsilon=1, k=1.5),
        make_H=_hom_H,
        make_F=lambda p: [
            "u1",
            f"u3^({float(1 - p['k'])!r})/{num(p['k'] - 1)}",
            "u3",
            f"-u2*u3/{num(p['beta'])}",
        ],
        make_box=lambda p: [WIDE, WIDE, X3_RANGE],
        expected=_proper_parallel,
        preconditions=(Precondition("homogeneous", _homogeneous_residual),),
        validate=_homogeneous_validate(epsilon=1, k_not=1.0),
    ),
    CatalogEntry(
        name="thm4.3-case5",
        description="k = -1: (u1, -u3/beta, u3, -u2 u3/beta)",
        defaults=dict(beta=1.0, epsilon=1, k=-1.0),
        make_H=_hom_H,
        make_F=lambda p: ["u1", f"-u3/{num(p['beta'])}", "u3", f"-u2*u3/{num(p['beta'])}"],
        make_box=lambda p: [WIDE, WIDE, X3_RANGE],
        expected=_proper_parallel,
        preconditions=(Precondition("homogeneous", _homogeneous_residual),),
        validate=_homogeneous_validate(k=-1.0),
    ),
    CatalogEntry(
        name="thm4.3-case6",
        description="any k: the slice x3 = C, (u1, u3, C, u2); |tr h| = 1/beta",
        defaults=dict(beta=1.0, epsilon=1, k=2.0, C=2.0),
        make_H=_hom_H,
        make_F=lambda p: ["u1", "u3", num(p["C"]), "u2"],
        make_box=lambda p: [WIDE, WIDE, WIDE],
        expected=_proper_parallel,
        cmc_value=lambda p: 1.0 / p["beta"],
        preconditions=(Precondition("H32", _hess(3, 2)), Precondition("H34", _hess(3, 4))),
        validate=_chain(_homogeneous_validate(), _validate_positive("C")),
    ),
]

_BY_NAME = {e.name: e for e in _ENTRIES}


def catalog_list() -> list[CatalogEntry]:
    return list(_ENTRIES)


def get_entry(name: str) -> CatalogEntry:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise KeyError(f"unknown family {name!r}; known: {', '.join(_BY_NAME)}") from None


def expected_matches(expected: dict, verdicts: dict) -> dict:
    """Per-flag comparison of claimed against observed verdicts (claimed flags only)."""
    return {flag: verdicts[flag] == want for flag, want in expected.items()}


__all__ = [
    "CatalogEntry",
    "Instance",
    "Precondition",
    "catalog_list",
    "get_entry",
    "check_preconditions",
    "preset_H",
    "homogeneous_H",
    "expected_matches",
    "PRESETS",
    "FLAGS",
]
