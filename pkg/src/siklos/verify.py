"""Run the full verification suite and serialise its report.

Every check is isolated: an exception inside one is recorded as a failure
with the message in ``notes`` and the suite carries on. Each check draws from
its own generator seeded by ``(seed, crc32(name))`` so that selecting a
subset of checks does not change their results.
"""

from __future__ import annotations

import json
import math
import zlib
from dataclasses import asdict, dataclass, field

import numpy as np

from . import ambient, catalog, hypersurface
from .ambient import AmbientGeometry, DefiningFunction
from .errors import ConfigError
from .hypersurface import Immersion
from .numdiff import richardson_derivative

ORACLE_H = ("0", "x3", "x3^2", "x3^3", "x3^4", "x3^(-2)", "x3^2+x4^2", "x3^2+x2*x4")

X_BOX = np.array([(-2.0, 2.0), (-2.0, 2.0), (0.5, 3.0), (-2.0, 2.0)])

TOL_CONNECTION = 1e-9
TOL_CURVATURE = 1e-6
TOL_SYMMETRY_CLOSED = 1e-9
TOL_SYMMETRY_NUMERIC = 1e-6
TOL_COMPATIBILITY = 1e-7
TOL_SECTIONAL = 1e-10
TOL_EINSTEIN_EXACT = 1e-10
TOL_GEODESIC = 1e-6
PROPER_MIN_H = 1e-3


@dataclass
class VerificationConfig:
    beta: float = 1.0
    seed: int = 0
    samples_per_check: int = 50
    tol_h: float = hypersurface.TOL_H
    tol_p: float = hypersurface.TOL_P
    tol_identity: float = 1e-5
    only: list | None = None  # check-name prefixes; None means all

    def validate(self):
        if self.samples_per_check < 1:
            raise ConfigError("samples_per_check must be at least 1")
        for name in ("tol_h", "tol_p", "tol_identity", "beta"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise ConfigError(f"{name} must be a positive number, got {v!r}")
        if self.only is not None and isinstance(self.only, str):
            self.only = [self.only]

    def to_dict(self):
        d = asdict(self)
        d["only"] = "all" if self.only is None else list(self.only)
        return d


@dataclass
class CheckResult:
    name: str
    passed: bool
    residuals: dict = field(default_factory=dict)
    samples: int = 0
    notes: str = ""

    def to_dict(self):
        return {
            "name": self.name,
            "pass": bool(self.passed),
            "residuals": {k: _finite(v) for k, v in self.residuals.items()},
            "samples": int(self.samples),
            "notes": self.notes,
        }


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)
    config: dict | None = None

    @property
    def passed(self) -> int:
        return sum(1 for c in self.checks if c.passed)

    @property
    def failed(self) -> int:
        return len(self.checks) - self.passed

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def summary_line(self) -> str:
        return f"{self.passed} passed / {self.failed} failed"

    def by_name(self, name) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _finite(v):
    v = float(v)
    return v if math.isfinite(v) else None


def _rng(seed, name):
    return np.random.default_rng([seed, zlib.crc32(name.encode())])


def random_points(rng, n) -> np.ndarray:
    return rng.uniform(X_BOX[:, 0], X_BOX[:, 1], size=(n, 4))


# -- random smooth test data -------------------------------------------------

_H_TERMS = (
    "x3^{p}",
    "sin({a}*x2)*x3^2",
    "x2*x4*x3",
    "x4^2",
    "exp({a}*x4)*x3",
    "cos({a}*x2+x4)",
    "x2^2*x3^(-1)",
    "sqrt(x3)*x4",
    "cosh({a}*x4)",
)


def random_defining_function(rng) -> DefiningFunction:
    """A smooth H built from a few random terms with random coefficients."""
    picks = rng.choice(len(_H_TERMS), size=3, replace=False)
    terms = []
    for i in sorted(picks):
        c = rng.uniform(-1.5, 1.5)
        t = _H_TERMS[i].format(p=int(rng.integers(-2, 5)), a=catalog.num(rng.uniform(-1, 1)))
        terms.append(f"{catalog.num(c)}*{t}")
    return DefiningFunction("+".join(terms))


def random_immersion(rng) -> Immersion:
    """Small smooth perturbation of the graph x4 = b . (u1, u2, u3) with x3 near 1.5."""
    a = rng.uniform(-0.15, 0.15, size=6)
    b = rng.uniform(-0.4, 0.4, size=3)
    n = catalog.num
    comps = [
        f"u1+{n(a[0])}*sin(u2+u3)",
        f"u2+{n(a[1])}*u1*u3",
        f"1.5+0.4*u3+{n(a[2])}*cos(u1-u2)+{n(a[3])}*u2^2",
        f"{n(0.2 * b[0])}*u1+{n(b[1])}*u2+{n(b[2])}*u3+{n(a[4])}*exp(0.5*u2)+{n(a[5])}*u1*u2",
    ]
    return Immersion(comps, name="random")


# -- checks ----------------------------------------------------------------


def check_connection(cfg, rng):
    worst = 0.0
    for Hs in ORACLE_H:
        geo = AmbientGeometry(DefiningFunction(Hs), cfg.beta)
        for p in random_points(rng, cfg.samples_per_check):
            d = ambient.christoffel_closed(geo, p) - ambient.christoffel_koszul(geo, p)
            worst = max(worst, float(np.max(np.abs(d))))
    n = cfg.samples_per_check * len(ORACLE_H)
    return CheckResult("connection-oracle", worst < TOL_CONNECTION, {"max_abs_diff": worst}, n)


def check_curvature(cfg, rng):
    worst = 0.0
    for Hs in ORACLE_H:
        geo = AmbientGeometry(DefiningFunction(Hs), cfg.beta)
        for p in random_points(rng, cfg.samples_per_check):
            d = ambient.riemann_closed(geo, p) - ambient.riemann_from_gamma(geo, p)
            worst = max(worst, float(np.max(np.abs(d))))
    n = cfg.samples_per_check * len(ORACLE_H)
    return CheckResult("curvature-oracle", worst < TOL_CURVATURE, {"max_abs_diff": worst}, n)


def metric_compatibility(geo, p) -> float:
    """max |d_i g_jk - G^l_ij g_lk - G^l_ik g_jl| with d g by finite differences."""
    g = ambient.metric_at(geo, p)
    G = ambient.christoffel_closed(geo, p)
    dg = np.array([richardson_derivative(lambda q: ambient.metric_at(geo, q), p, i) for i in range(4)])
    res = dg - np.einsum("lij,lk->ijk", G, g) - np.einsum("lik,jl->ijk", G, g)
    return float(np.max(np.abs(res)))


def check_symmetries(cfg, rng):
    closed = numeric = compat = 0.0
    for Hs in ORACLE_H:
        geo = AmbientGeometry(DefiningFunction(Hs), cfg.beta)
        for p in random_points(rng, cfg.samples_per_check):
            rc = ambient.lower_riemann(geo, p, ambient.riemann_closed(geo, p))
            rn = ambient.lower_riemann(geo, p, ambient.riemann_from_gamma(geo, p))
            closed = max(closed, *ambient.symmetry_residuals(rc).values())
            numeric = max(numeric, *ambient.symmetry_residuals(rn).values())
            compat = max(compat, metric_compatibility(geo, p))
    ok = closed < TOL_SYMMETRY_CLOSED and numeric < TOL_SYMMETRY_NUMERIC and compat < TOL_COMPATIBILITY
    return CheckResult(
        "tensor-symmetry",
        ok,
        {"closed": closed, "numeric": numeric, "metric_compatibility": compat},
        cfg.samples_per_check * len(ORACLE_H),
    )


def check_ads(cfg, rng):
    geo = AmbientGeometry(DefiningFunction("0"), cfg.beta)
    sect = form = 0.0
    target = -1.0 / cfg.beta**2
    e3, e4 = np.eye(4)[2], np.eye(4)[3]
    for p in random_points(rng, cfg.samples_per_check):
        sect = max(sect, abs(ambient.sectional_curvature(geo, p, e3, e4) - target))
        rn = ambient.riemann_from_gamma(geo, p)
        form = max(form, float(np.max(np.abs(rn - ambient.constant_curvature_tensor(geo, p)))))
    return CheckResult(
        "ads-constant-curvature",
        sect < TOL_SECTIONAL and form < TOL_CURVATURE,
        {"sectional": sect, "constant_curvature_form": form},
        cfg.samples_per_check,
    )


def check_predicates(cfg, rng):
    p1 = np.array([0.0, 0.3, 1.0, -0.2])
    kai = catalog.preset_H("kaigorodov")
    worst_kai = 0.0
    for p in random_points(rng, cfg.samples_per_check):
        worst_kai = max(worst_kai, ambient.predicates(AmbientGeometry(kai, cfg.beta), p).residuals["einstein"])
    flat = ambient.predicates(AmbientGeometry(DefiningFunction("x3^2+x4^2"), cfg.beta), p1)
    sq = ambient.predicates(AmbientGeometry(DefiningFunction("x3^2"), cfg.beta), p1)
    ok = (
        worst_kai < TOL_EINSTEIN_EXACT
        and flat.conformally_flat
        and flat.einstein
        and flat.constant_curvature
        and not sq.einstein
        and not sq.conformally_flat
        and abs(sq.residuals["einstein"] - 2.0) < 1e-12
        and abs(sq.residuals["conformally_flat"] - 2.0) < 1e-12
    )
    return CheckResult(
        "predicates",
        ok,
        {
            "kaigorodov_einstein": worst_kai,
            "conformally_flat_einstein": flat.residuals["einstein"],
            "conformally_flat_residual": flat.residuals["conformally_flat"],
            "x3sq_einstein": sq.residuals["einstein"],
            "x3sq_conformally_flat": sq.residuals["conformally_flat"],
        },
        cfg.samples_per_check + 2,
        "Kaigorodov Einstein; x3^2+x4^2 constant curvature; x3^2 neither (residuals 2)",
    )


def _identity_residuals(geo, F, samples):
    g = c = 0.0
    for u in samples:
        r = hypersurface.gauss_codazzi_residuals(geo, F, u)
        g = max(g, r["gauss"])
        c = max(c, r["codazzi"])
    return g, c


def check_gauss_codazzi_random(cfg, rng, n_immersions=10, n_points=20):
    g = c = 0.0
    n = 0
    for _ in range(n_immersions):
        geo = AmbientGeometry(random_defining_function(rng), cfg.beta)
        F = random_immersion(rng)
        samples = rng.uniform(-1, 1, size=(min(n_points, cfg.samples_per_check), 3))
        gi, ci = _identity_residuals(geo, F, samples)
        g, c, n = max(g, gi), max(c, ci), n + len(samples)
    return CheckResult(
        "gauss-codazzi-random",
        g < cfg.tol_identity and c < cfg.tol_identity,
        {"gauss": g, "codazzi": c},
        n,
    )


def check_gauss_codazzi_catalog(cfg, rng, n_points=20):
    g = c = 0.0
    n = 0
    for entry in catalog.catalog_list():
        inst = entry.instantiate(beta=cfg.beta)
        samples = inst.sample(min(n_points, cfg.samples_per_check), rng)
        gi, ci = _identity_residuals(inst.geo, inst.F, samples)
        g, c, n = max(g, gi), max(c, ci), n + len(samples)
    return CheckResult(
        "gauss-codazzi-catalog",
        g < cfg.tol_identity and c < cfg.tol_identity,
        {"gauss": g, "codazzi": c},
        n,
    )


def geodesic_confinement(geo, lam, mu, p0, v_tangent, t_end=1.0, dt=1e-3):
    """Distance from the hyperplane x4 = lam x2 + mu and norm drift along a geodesic."""
    traj = ambient.integrate_geodesic(geo, p0, v_tangent, t_end, dt)
    x = traj.positions
    dist = np.abs(x[:, 3] - lam * x[:, 1] - mu)
    return traj, float(dist.max()), float(traj.norm_drift.max())


def check_geodesic(cfg, rng):
    lam, mu = 2.0, 1.0
    geo = AmbientGeometry(DefiningFunction("x3^2"), cfg.beta)
    worst_d = worst_n = 0.0
    runs = 3
    for _ in range(runs):
        x2 = rng.uniform(-0.5, 0.5)
        p0 = np.array([rng.uniform(-1, 1), x2, rng.uniform(1.0, 2.0), lam * x2 + mu])
        v = rng.uniform(-0.5, 0.5, size=3)
        v0 = np.array([v[0], v[1], v[2], lam * v[1]])
        _, d, drift = geodesic_confinement(geo, lam, mu, p0, v0)
        worst_d, worst_n = max(worst_d, d), max(worst_n, drift)
    return CheckResult(
        "geodesic-confinement",
        worst_d < TOL_GEODESIC and worst_n < TOL_GEODESIC,
        {"max_distance": worst_d, "max_norm_drift": worst_n},
        runs,
        "RK4, dt=1e-3, t in [0,1], H=x3^2, hyperplane x4 = 2 x2 + 1",
    )


def classify_entry(inst, samples, cfg) -> CheckResult:
    """Classify one catalog instance and compare with its claimed verdicts."""
    return classify_instance(inst, samples, cfg)[0]


def classify_instance(inst, samples, cfg):
    """Like :func:`classify_entry` but also returns the raw classification."""
    pre = catalog.check_preconditions(inst, samples)
    rep = hypersurface.classify(inst.geo, inst.F, samples, cfg.tol_h, cfg.tol_p)
    verdicts = rep.verdicts()
    matches = catalog.expected_matches(inst.expected, verdicts)
    residuals = dict(rep.residuals())
    residuals.update({f"pre_{k}": v for k, v in pre.items()})
    ok = all(matches.values()) and all(v < cfg.tol_identity for v in pre.values()) and rep.all_timelike
    notes = []
    if inst.expected.get("totally_geodesic") is False:
        # proper families must be clearly away from totally geodesic
        ok = ok and rep.max_h > PROPER_MIN_H
    if inst.cmc_value is not None:
        err = abs(abs(rep.trace_mean) - inst.cmc_value)
        residuals["cmc_value_error"] = err
        ok = ok and err < cfg.tol_p
    bad = [f for f, m in matches.items() if not m]
    if bad:
        notes.append("mismatched: " + ", ".join(bad))
    notes.append("verdicts: " + ", ".join(f"{k}={'T' if v else 'F'}" for k, v in verdicts.items()))
    if not rep.all_timelike:
        notes.append("non-timelike sample")
    if inst.notes:
        notes.append(inst.notes)
    return CheckResult(inst.name, ok, residuals, len(samples), "; ".join(notes)), rep


def _catalog_check(entry):
    def run(cfg, rng):
        inst = entry.instantiate(beta=cfg.beta)
        samples = inst.sample(cfg.samples_per_check, rng)
        return classify_entry(inst, samples, cfg)

    return run


def registry():
    checks = {
        "connection-oracle": check_connection,
        "curvature-oracle": check_curvature,
        "tensor-symmetry": check_symmetries,
        "ads-constant-curvature": check_ads,
        "predicates": check_predicates,
        "gauss-codazzi-random": check_gauss_codazzi_random,
        "gauss-codazzi-catalog": check_gauss_codazzi_catalog,
        "geodesic-confinement": check_geodesic,
    }
    for e in catalog.catalog_list():
        checks[e.name] = _catalog_check(e)
    return checks


def select_checks(only) -> list:
    names = list(registry())
    if not only or only == "all" or "all" in only:
        return names
    chosen = [n for n in names if any(n.startswith(p) for p in only)]
    if not chosen:
        raise ConfigError(f"no check matches {only!r}; known: {', '.join(names)}")
    return chosen


def run_suite(cfg: VerificationConfig | None = None) -> VerificationReport:
    cfg = cfg or VerificationConfig()
    cfg.validate()
    checks = registry()
    report = VerificationReport(config=cfg.to_dict())
    for name in select_checks(cfg.only):
        try:
            result = checks[name](cfg, _rng(cfg.seed, name))
        except Exception as exc:  # noqa: BLE001 - failures are recorded, never raised
            result = CheckResult(name, False, {}, 0, f"error: {type(exc).__name__}: {exc}")
        report.checks.append(result)
    return report


# -- JSON ----------------------------------------------------------------


def report_to_dict(r: VerificationReport) -> dict:
    out = {}
    if r.config is not None:
        out["config"] = r.config
    out["checks"] = [c.to_dict() for c in r.checks]
    out["summary"] = {"passed": r.passed, "failed": r.failed}
    return out


def report_to_json(r: VerificationReport) -> str:
    return json.dumps(report_to_dict(r), allow_nan=False)


def report_from_json(text: str) -> VerificationReport:
    data = json.loads(text)
    checks = [
        CheckResult(c["name"], c["pass"], dict(c["residuals"]), c["samples"], c["notes"])
        for c in data["checks"]
    ]
    return VerificationReport(checks=checks, config=data.get("config"))


REPORT_SCHEMA = {
    "type": "object",
    "required": ["checks", "summary"],
    "additionalProperties": False,
    "properties": {
        "config": {"type": "object"},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "pass", "residuals", "samples", "notes"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "pass": {"type": "boolean"},
                    "residuals": {"type": "object", "additionalProperties": {"type": ["number", "null"]}},
                    "samples": {"type": "integer", "minimum": 0},
                    "notes": {"type": "string"},
                },
            },
        },
        "summary": {
            "type": "object",
            "required": ["passed", "failed"],
            "additionalProperties": False,
            "properties": {
                "passed": {"type": "integer", "minimum": 0},
                "failed": {"type": "integer", "minimum": 0},
            },
        },
    },
}
