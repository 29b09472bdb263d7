"""Command-line front end.

    siklos curvature --H "x3^4" --point 0,0,1,0
    siklos classify --family thm4.3-case6 --immersion.params.k 2
    siklos verify-paper --json --seed 7
    siklos geodesic --H "x3^2" --p0 0,0.3,1.2,1.6 --v0 0.3,0.5,0.2,1 --confine cor3.5

Configuration is a JSON document (``--config PATH``); every field can also be
set with a flag spelling its dotted path, e.g. ``--tolerances.tol_h 1e-9`` or
``--immersion.params.lam 3``. Flag values are parsed as JSON when possible
and kept as strings otherwise.

Exit codes: 0 success, 1 failed check, 2 configuration error, 3 chart error,
4 sampling error, 5 geodesic left the chart.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import sys

import numpy as np

from . import ambient, catalog, hypersurface, verify
from .ambient import AmbientGeometry, DefiningFunction
from .errors import (
    ChartError,
    ChartExit,
    ConfigError,
    DomainViolation,
    NullNormal,
    RankDeficient,
    SampleError,
    SingularMetric,
    StepError,
)
from .exprparse import H_VARS, parse
from .hypersurface import Immersion

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_CHART, EXIT_SAMPLE, EXIT_CHART_EXIT = 0, 1, 2, 3, 4, 5

DIGITS = 9
DEFAULT_POINT = [0.0, 0.0, 1.0, 0.0]
DEFAULT_U_BOX = [[-1.0, 1.0]] * 3
ZERO_REL = 1e-12

DEFAULT_CONFIG = {
    "beta": 1.0,
    "seed": 0,
    "samples": 50,
    "H": None,
    "immersion": None,
    "point": None,
    "u_point": None,
    "box": None,
    "tolerances": {},
    "output": "text",
    "only": None,
    "geodesic": {"p0": None, "v0": None, "t_end": 1.0, "dt": 1e-3, "confine": None},
}

# shorthand flag -> dotted config path
ALIASES = {
    "H": "H.expr",
    "family": "immersion.family",
    "exprs": "immersion.exprs",
    "point": "point",
    "u": "u_point",
    "p0": "geodesic.p0",
    "v0": "geodesic.v0",
    "t_end": "geodesic.t_end",
    "dt": "geodesic.dt",
    "confine": "geodesic.confine",
    "beta": "beta",
    "seed": "seed",
    "samples": "samples",
}


def fmt(v) -> str:
    """A number with 9 significant digits; -0 prints as 0."""
    v = float(v)
    text = f"{v:.{DIGITS}g}"
    return "0" if text == "-0" else text


def rounded(v):
    return None if v is None else float(fmt(v))


def _bool(b) -> str:
    return "true" if b else "false"


# -- configuration -------------------------------------------------------


def _value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _vector(v, n, what):
    if v is None:
        return None
    if isinstance(v, str):
        v = _value(v) if v.strip().startswith("[") else [_value(s) for s in v.split(",")]
    try:
        out = [float(x) for x in v]
    except (TypeError, ValueError):
        raise ConfigError(f"{what} must be {n} numbers, got {v!r}") from None
    if len(out) != n:
        raise ConfigError(f"{what} must have {n} components, got {len(out)}")
    return out


def set_dotted(cfg: dict, path: str, value):
    keys = path.split(".")
    node = cfg
    for k in keys[:-1]:
        if node.get(k) is None:
            node[k] = {}
        if not isinstance(node[k], dict):
            raise ConfigError(f"cannot set {path}: {k} is not an object")
        node = node[k]
    node[keys[-1]] = value


def parse_dotted(extra: list[str]) -> list[tuple[str, object]]:
    """``--a.b value`` / ``--a.b=value`` pairs left over by argparse."""
    out = []
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--") or len(tok) == 2:
            raise ConfigError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, text = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(extra):
                raise ConfigError(f"flag --{key} needs a value")
            text = extra[i + 1]
            i += 2
        out.append((key, _value(text)))
    return out


def load_config(args, extra) -> dict:
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if args.config:
        try:
            with open(args.config) as fh:
                user = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(user) - set(DEFAULT_CONFIG)
        if unknown:
            raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
        for k, v in user.items():
            if isinstance(v, dict) and isinstance(cfg.get(k), dict):
                cfg[k].update(v)
            else:
                cfg[k] = v
    for key, dotted in ALIASES.items():
        v = getattr(args, key, None)
        if v is not None:
            set_dotted(cfg, dotted, v)
    for path, v in parse_dotted(extra):
        if path.split(".")[0] not in DEFAULT_CONFIG:
            raise ConfigError(f"unknown config field {path!r}")
        set_dotted(cfg, path, v)
    if getattr(args, "only", None):
        cfg["only"] = list(args.only)
    if getattr(args, "json", False):
        cfg["output"] = "json"
    _check_config(cfg)
    return cfg


def _check_config(cfg):
    for slot in ("H", "immersion"):
        v = cfg.get(slot)
        if v is not None and not isinstance(v, dict):
            raise ConfigError(f"{slot} must be an object")
    H = cfg.get("H") or {}
    if "expr" in H and "catalog" in H:
        raise ConfigError("H: give exactly one of 'expr' or 'catalog'")
    imm = cfg.get("immersion") or {}
    if "exprs" in imm and "family" in imm:
        raise ConfigError("immersion: give exactly one of 'exprs' or 'family'")
    if "family" in imm:
        try:
            catalog.get_entry(imm["family"])
        except KeyError as exc:
            raise ConfigError(exc.args[0]) from None
    if cfg["output"] not in ("text", "json"):
        raise ConfigError("output must be 'text' or 'json'")
    try:
        cfg["beta"] = float(cfg["beta"])
        cfg["samples"] = int(cfg["samples"])
        cfg["seed"] = int(cfg["seed"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    if not cfg["beta"] > 0:
        raise ConfigError("beta must be positive")
    if cfg["samples"] < 1:
        raise ConfigError("samples must be at least 1")


def build_H(cfg, default: str | None = "0") -> DefiningFunction | None:
    H = cfg.get("H") or {}
    if "expr" in H:
        return DefiningFunction(parse(str(H["expr"]), H_VARS))
    if "catalog" in H:
        return catalog.preset_H(H["catalog"], H.get("epsilon"), H.get("k"))
    return None if default is None else DefiningFunction(default)


def build_instance(cfg) -> catalog.Instance:
    imm = cfg["immersion"]
    entry = catalog.get_entry(imm["family"])
    params = dict(imm.get("params") or {})
    params.setdefault("beta", cfg["beta"])
    H = build_H(cfg, default=None)
    if H is not None:
        params["H"] = str(H.expr)
    inst = entry.instantiate(**params)
    if cfg.get("box") is not None:
        inst.box = [tuple(_vector(b, 2, "box row")) for b in cfg["box"]]
    return inst


def tolerances(cfg) -> dict:
    tol = {"tol_h": hypersurface.TOL_H, "tol_p": hypersurface.TOL_P, "tol_identity": 1e-5}
    unknown = set(cfg["tolerances"]) - set(tol)
    if unknown:
        raise ConfigError(f"unknown tolerance(s): {sorted(unknown)}")
    tol.update({k: float(v) for k, v in cfg["tolerances"].items()})
    if any(not v > 0 for v in tol.values()):
        raise ConfigError("tolerances must be positive")
    return tol


def _emit_json(obj, out):
    out.write(json.dumps(obj, allow_nan=False) + "\n")


# -- curvature ---------------------------------------------------------------


def _nonzero(arr):
    scale = max(1.0, float(np.max(np.abs(arr))))
    return np.abs(arr) > ZERO_REL * scale


def cmd_curvature(cfg, out) -> int:
    geo = AmbientGeometry(build_H(cfg), cfg["beta"])
    p = _vector(cfg.get("point") or DEFAULT_POINT, 4, "point")
    G = ambient.christoffel_closed(geo, p)
    R = ambient.riemann_closed(geo, p)
    f = ambient.f_helpers(geo, p)
    pred = ambient.predicates(geo, p)
    gammas = [
        (k + 1, i + 1, j + 1, G[k, i, j])
        for k in range(4)
        for i in range(4)
        for j in range(i, 4)
        if _nonzero(G)[k, i, j]
    ]
    riem = [
        (l + 1, i + 1, j + 1, k + 1, R[l, i, j, k])
        for i in range(4)
        for j in range(i + 1, 4)
        for k in range(4)
        for l in range(4)
        if _nonzero(R)[l, i, j, k]
    ]
    if cfg["output"] == "json":
        _emit_json(
            {
                "H": str(geo.H.expr),
                "beta": rounded(geo.beta),
                "point": [rounded(x) for x in p],
                "f": {name: rounded(v) for name, v in f._asdict().items()},
                "christoffel": [{"k": k, "i": i, "j": j, "value": rounded(v)} for k, i, j, v in gammas],
                "riemann": [
                    {"l": l, "i": i, "j": j, "k": k, "value": rounded(v)} for l, i, j, k, v in riem
                ],
                "predicates": {
                    "einstein": pred.einstein,
                    "conformally_flat": pred.conformally_flat,
                    "constant_curvature": pred.constant_curvature,
                    "residuals": {k: rounded(v) for k, v in pred.residuals.items()},
                },
            },
            out,
        )
        return EXIT_OK
    w = out.write
    w(f"H = {geo.H.expr}\nbeta = {fmt(geo.beta)}\nLambda = {fmt(geo.cosmological_constant)}\n")
    w("point = (" + ", ".join(fmt(x) for x in p) + ")\n")
    for name, v in f._asdict().items():
        w(f"{name} = {fmt(v)}\n")
    w(f"Christoffel symbols Gamma^k_ij, i <= j ({len(gammas)} nonzero):\n")
    for k, i, j, v in gammas:
        w(f"  Gamma^{k}_{i}{j} = {fmt(v)}\n")
    w(f"Riemann R(d_i, d_j) d_k = R^l_ijk d_l, i < j ({len(riem)} nonzero):\n")
    for l, i, j, k, v in riem:
        w(f"  R^{l}_{i}{j}{k} = {fmt(v)}\n")
    w(f"einstein: {_bool(pred.einstein)} (residual {fmt(pred.residuals['einstein'])})\n")
    w(f"conformally flat: {_bool(pred.conformally_flat)} (residual {fmt(pred.residuals['conformally_flat'])})\n")
    w(f"constant curvature: {_bool(pred.constant_curvature)}\n")
    return EXIT_OK


# -- classify ----------------------------------------------------------------


def sample_chart(F: Immersion, box, n, rng, max_tries=100) -> np.ndarray:
    """Uniform samples in ``box`` whose image lies in the chart x3 > 0."""
    lo, hi = np.array(box, dtype=float).T
    out, bad = [], []
    for _ in range(max_tries * n):
        u = rng.uniform(lo, hi)
        if F.point(u)[2] > 0:
            out.append(u)
            if len(out) == n:
                return np.array(out)
        else:
            bad.append(u.tolist())
    raise SampleError(f"could not draw {n} samples with x3 > 0 in box {np.asarray(box).tolist()}", bad[:5])


def cmd_classify(cfg, out) -> int:
    imm = cfg.get("immersion") or {}
    tol = tolerances(cfg)
    rng = np.random.default_rng(cfg["seed"])
    if "family" in imm:
        inst = build_instance(cfg)
        if cfg.get("u_point") is not None:
            samples = np.array([_vector(cfg["u_point"], 3, "u_point")])
        else:
            samples = inst.sample(cfg["samples"], rng)
        vcfg = verify.VerificationConfig(beta=inst.geo.beta, samples_per_check=len(samples), **tol)
        check, rep = verify.classify_instance(inst, samples, vcfg)
        label, geo, expected, hold = inst.name, inst.geo, inst.expected, check.passed
        residuals = check.residuals
    elif "exprs" in imm:
        exprs = imm["exprs"]
        if isinstance(exprs, str):
            exprs = exprs.split(",")
        if len(exprs) != 4:
            raise ConfigError("immersion.exprs needs four expressions")
        F = Immersion([str(e) for e in exprs])
        geo = AmbientGeometry(build_H(cfg), cfg["beta"])
        if cfg.get("u_point") is not None:
            samples = np.array([_vector(cfg["u_point"], 3, "u_point")])
        else:
            samples = sample_chart(F, cfg.get("box") or DEFAULT_U_BOX, cfg["samples"], rng)
        rep = hypersurface.classify(geo, F, samples, tol["tol_h"], tol["tol_p"])
        label, expected, hold = "(" + ", ".join(map(str, exprs)) + ")", None, None
        residuals = rep.residuals()
    else:
        raise ConfigError("classify needs immersion.family or immersion.exprs")
    verdicts = rep.verdicts()
    if cfg["output"] == "json":
        _emit_json(
            {
                "immersion": label,
                "H": str(geo.H.expr),
                "beta": rounded(geo.beta),
                "samples": rep.samples,
                "verdicts": verdicts,
                "residuals": {k: rounded(v) for k, v in residuals.items()},
                "abs_trace": rounded(abs(rep.trace_mean)),
                "epsilons": rep.epsilons,
                "all_timelike": rep.all_timelike,
                "expected": expected,
                "expected_hold": hold,
            },
            out,
        )
    else:
        w = out.write
        w(f"immersion: {label}\nH = {geo.H.expr}\nbeta = {fmt(geo.beta)}\nsamples: {rep.samples}\n")
        for flag, v in verdicts.items():
            w(f"{flag.replace('_', ' ')}: {_bool(v)}\n")
        w(f"max|h| = {fmt(rep.max_h)}\n")
        w(f"max|nabla h| = {fmt(rep.max_nabla_h)}\n")
        w(f"max codazzi asymmetry = {fmt(rep.max_codazzi_asymmetry)}\n")
        w(f"|tr h| = {fmt(abs(rep.trace_mean))} (spread {fmt(rep.trace_spread)})\n")
        w(f"timelike: {_bool(rep.all_timelike)} (eps = {', '.join(fmt(e) for e in rep.epsilons)})\n")
        if expected is not None:
            claims = ", ".join(f"{k}={_bool(v)}" for k, v in expected.items())
            w(f"expected: {claims}\n")
            w(f"expected verdicts hold: {_bool(hold)}\n")
            if not hold:
                w(f"notes: {check.notes}\n")
    return EXIT_OK if hold in (None, True) else EXIT_FAILED


# -- verify-paper ------------------------------------------------------------


def cmd_verify_paper(cfg, out) -> int:
    vcfg = verify.VerificationConfig(
        beta=cfg["beta"],
        seed=cfg["seed"],
        samples_per_check=cfg["samples"],
        only=cfg.get("only"),
        **tolerances(cfg),
    )
    report = verify.run_suite(vcfg)
    for c in report.checks:
        c.residuals = {k: rounded(v) for k, v in c.residuals.items()}
    if cfg["output"] == "json":
        out.write(verify.report_to_json(report) + "\n")
    else:
        for c in report.checks:
            status = "PASS" if c.passed else "FAIL"
            res = ", ".join(f"{k}={fmt(v)}" for k, v in c.residuals.items() if v is not None)
            out.write(f"{status} {c.name} [{c.samples} samples] {res}\n")
            if not c.passed and c.notes:
                out.write(f"     {c.notes}\n")
        out.write(report.summary_line() + "\n")
    return EXIT_OK if report.ok else EXIT_FAILED


# -- geodesic ----------------------------------------------------------------


def cmd_geodesic(cfg, out) -> int:
    gcfg = cfg["geodesic"]
    p0 = _vector(gcfg.get("p0"), 4, "geodesic.p0")
    v0 = _vector(gcfg.get("v0"), 4, "geodesic.v0")
    if p0 is None or v0 is None:
        raise ConfigError("geodesic needs p0 and v0")
    confine = gcfg.get("confine")
    inst = None
    if confine:
        imm = cfg.get("immersion") or {}
        if imm.get("family") not in (None, confine):
            raise ConfigError("geodesic.confine and immersion.family disagree")
        cfg = copy.deepcopy(cfg)
        cfg["immersion"] = {"family": confine, "params": imm.get("params") or {}}
        inst = build_instance(cfg)
        geo = inst.geo
    else:
        geo = AmbientGeometry(build_H(cfg), cfg["beta"])
    traj = ambient.integrate_geodesic(geo, p0, v0, float(gcfg.get("t_end", 1.0)), float(gcfg.get("dt", 1e-3)))
    writer = csv.writer(out, lineterminator="\n")
    header = ["t", "x1", "x2", "x3", "x4", "norm-drift"]
    if inst is not None:
        header.append("distance")
        lo, hi = np.array(inst.box).T
        u = 0.5 * (lo + hi)
    writer.writerow(header)
    for t, x, d in zip(traj.t, traj.positions, traj.norm_drift):
        row = [fmt(t), *(fmt(c) for c in x), fmt(d)]
        if inst is not None:
            dist, u = hypersurface.project_to_image(inst.F, x, u)
            row.append(fmt(dist))
        writer.writerow(row)
    return EXIT_OK


COMMANDS = {
    "curvature": cmd_curvature,
    "classify": cmd_classify,
    "verify-paper": cmd_verify_paper,
    "geodesic": cmd_geodesic,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument("--config", metavar="PATH", help="JSON configuration file")
    common.add_argument("--json", action="store_true", help="emit JSON instead of text")
    common.add_argument("--seed", type=int)
    common.add_argument("--samples", type=int)
    common.add_argument("--beta", type=float)
    common.add_argument("--family", help="catalog entry name")
    common.add_argument("--H", help="defining function H(x2, x3, x4)")
    common.add_argument("--only", action="append", metavar="NAME", help="check-name prefix (repeatable)")

    parser = argparse.ArgumentParser(
        prog="siklos",
        allow_abbrev=False,
        description="Curvature, hypersurface classification and verification for Siklos spacetimes.",
        epilog="Any config field can be set with --dotted.path VALUE.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("curvature", parents=[common], allow_abbrev=False, help="print connection, curvature and predicates at a point")
    p.add_argument("--point", help="x1,x2,x3,x4")
    p = sub.add_parser("classify", parents=[common], allow_abbrev=False, help="classify a hypersurface")
    p.add_argument("--exprs", help="four comma-separated expressions in u1, u2, u3")
    p.add_argument("--u", help="classify at this single point u1,u2,u3")
    sub.add_parser("verify-paper", parents=[common], allow_abbrev=False, help="run the full verification suite")
    p = sub.add_parser("geodesic", parents=[common], allow_abbrev=False, help="integrate a geodesic and print CSV")
    p.add_argument("--p0")
    p.add_argument("--v0")
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--confine", metavar="FAMILY", help="add distance to this catalog hypersurface")
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    try:
        cfg = load_config(args, extra)
        return COMMANDS[args.command](cfg, out)
    except ChartExit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHART_EXIT
    except (ChartError, SingularMetric) as exc:
        print(f"chart error: {exc}", file=sys.stderr)
        return EXIT_CHART
    except (SampleError, DomainViolation, RankDeficient, NullNormal) as exc:
        print(f"sampling error: {exc}", file=sys.stderr)
        points = getattr(exc, "points", None)
        if points:
            print(f"offending point(s): {points}", file=sys.stderr)
        return EXIT_SAMPLE
    except StepError as exc:
        print(f"StepError: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"config error: {msg}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
