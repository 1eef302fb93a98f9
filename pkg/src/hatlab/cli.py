"""Command line harness.

Every subcommand takes an optional JSON config whose fields are the long
option names (dashes or underscores); explicit flags override the config.
Results go to ``--out`` as JSON, with a CSV of the row data next to it and,
with ``--plot``, an SVG cross-section. Without ``--out`` the JSON report is
printed to stdout.

Exit codes: 0 success, 1 a verification suite failed, 2 invalid input
(JSON error object on stderr), 3 numerical non-convergence (JSON
diagnostics on stderr).
"""

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import report
from .bodies import body_from_spec
from .errors import DegenerateSpikeError, HatlabError, InvalidInputError, NumericFailure, PreconditionError
from .geometry import as_direction, hausdorff_distance
from .hat import CapSpec
from .indicator import anchored_cap, curvature_indicator
from .order import SEQUENCES, AngleSequence, maximal_indicator, verify_certificates
from .spike import perturbation_sample, raise_order, spike
from .verify import SUITES, run_suite

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3

DEFAULTS = {
    "eps": 0.5,
    "delta": 0.25,
    "seq": "harmonic2",
    "imax": 8,
    "seed": 0,
    "scale": 1.0,
    "suite": "all",
    "m": 2,
    "budget": 0.1,
    "theta": 0.05,
    "tol": 1e-6,
    "n": 10,
    "directions": None,
    "eta": None,
    "plane": "0,1",
}


class ConfigError(InvalidInputError):
    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


# option parsing helpers ------------------------------------------------------


def _vector(text, field):
    if isinstance(text, (list, tuple)):
        vals = text
    else:
        try:
            vals = [float(v) for v in str(text).split(",")]
        except ValueError:
            raise ConfigError(f"{field} must be a comma separated list of numbers", field) from None
    arr = np.asarray(vals, dtype=float)
    if arr.ndim != 1 or not np.isfinite(arr).all():
        raise ConfigError(f"{field} must be a finite vector", field)
    return arr


def _load_json(value, field):
    if isinstance(value, dict):
        return value
    text = str(value)
    try:
        if text.lstrip().startswith("{"):
            return json.loads(text)
        with open(text, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {field} file {text!r}: {exc.strerror}", field) from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{field} is not valid JSON: {exc.msg}", field) from None


def _body(value, field="body"):
    if value is None:
        raise ConfigError(f"--{field} is required", field)
    spec = _load_json(value, field)
    try:
        return body_from_spec(spec), spec.get("id", spec["type"])
    except InvalidInputError as exc:
        raise ConfigError(str(exc), field) from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {field}: {exc}", field) from None


def _positive(v, field, allow_zero=False):
    if v is None or not isinstance(v, (int, float)) or not math.isfinite(v) or v < 0 or (v == 0 and not allow_zero):
        raise ConfigError(f"{field} must be a {'non-negative' if allow_zero else 'positive'} number", field)
    return float(v)


def _direction(v, dim, field):
    try:
        return as_direction(_vector(v, field), dim)
    except InvalidInputError as exc:
        raise ConfigError(f"{field}: {exc}", field) from None


# subcommands -----------------------------------------------------------------


def cmd_indicator(o):
    K, bid = _body(o["body"])
    tau = _direction(o["tau"], K.dim, "tau")
    eps, delta = _positive(o["eps"], "eps"), _positive(o["delta"], "delta")
    if not delta < 0.5:
        raise ConfigError("delta must lie in (0, 1/2)", "delta")
    val = curvature_indicator(K, tau, eps, delta, o["directions"])
    row = {"body": bid, "tau": tau, "eps": eps, "delta": delta, "alpha0": val.alpha, "error": val.error,
           "witness": val.witness}
    result = dict(row, tip=val.tip)
    plot = lambda path: _plot(path, K, [anchored_cap(K, tau, eps, delta)], o)  # noqa: E731
    return result, [row], plot


def cmd_order(o):
    K, bid = _body(o["body"])
    seq = AngleSequence.named(o["seq"])
    imax = _int(o["imax"], "imax")
    seq.validate(imax)
    res = maximal_indicator(K, seq, imax, o["eta"], o["directions"])
    verified = verify_certificates(K, res, seq)
    result = dict(res.to_dict(), body=bid, certificates_verified=verified)
    rows = [{"body": bid, "prefix": c["prefix"], "index": i, "eps": 1.0 / i, "delta": seq(i), "tip": c["tip"],
             "axis": c["axis"], "verified": v}
            for c, i, v in zip(result["certificates"], res.index_set, verified)]

    def plot(path):
        caps = []
        for m, (x, u) in enumerate(res.certificates):
            i = res.index_set.elements[m]
            caps.append(CapSpec(x, u, 1.0 / i, seq(i)))
        return _plot(path, K, caps[-3:], o)

    return result, rows, plot


def cmd_spike(o):
    K, bid = _body(o["body"])
    tau = _direction(o["tau"], K.dim, "tau")
    theta = _positive(o["theta"], "theta", allow_zero=True)
    x = K.touching(tau) if o["x"] is None else _vector(o["x"], "x")
    K2 = spike(K, x, tau, theta)
    d = hausdorff_distance(K, K2, tol=o["tol"])
    result = {"body": bid, "x": x, "tau": tau, "theta": theta, "hausdorff": d.value, "hausdorff_error": d.error,
              "spiked": K2.to_spec()}
    row = {k: result[k] for k in ("body", "x", "tau", "theta", "hausdorff")}
    return result, [row], lambda path: _plot(path, K2, [], o)


def cmd_raise_order(o):
    K, bid = _body(o["body"])
    seq = AngleSequence.named(o["seq"])
    m = _int(o["m"], "m")
    imax = max(_int(o["imax"], "imax"), m)
    seq.validate(imax)
    budget = _positive(o["budget"], "budget")
    res = raise_order(K, m, budget, seq, imax, o["eta"], o["directions"], base_id=bid)
    result = {
        "body": bid,
        "target_order": m,
        "budget": budget,
        "success": res.success,
        "hausdorff": res.hausdorff,
        "order": res.order.to_dict(),
        "certificates_verified": res.certificates_verified,
        "records": [r.to_dict() for r in res.records],
        "perturbed": res.body.to_spec(),
    }
    return result, [r.to_dict() for r in res.records], lambda path: _plot(path, res.body, [], o)


def cmd_curvature(o):
    from .curvature import point_curvature

    K, bid = _body(o["body"])
    if o["x"] is not None:
        if o["nu"] is None:
            raise ConfigError("--nu is required together with --x", "nu")
        x, nu = _vector(o["x"], "x"), _direction(o["nu"], K.dim, "nu")
    else:
        if o["tau"] is None:
            raise ConfigError("give --tau (inward normal) or --x with --nu", "tau")
        nu = _direction(o["tau"], K.dim, "tau")
        x = K.touching(-nu)
    est = point_curvature(K, x, nu, o["directions"])
    result = dict(est.to_dict(), body=bid)
    rows = [{"x": xx, "tau": t, "scale": s, "r": r} for xx, t, s, r in est.rows()]

    def plot(path):
        from .plotting import curvature_circles, frame_for_normal, plot_section

        frame = frame_for_normal(x, nu, est.records[0].tau)
        circles = curvature_circles(est)
        return plot_section(path, K, circles=circles, frame=frame if K.dim == 3 else None,
                            title=f"{bid}: kappa_i={est.kappa_i:.4g} kappa_s={est.kappa_s:.4g}")

    return result, rows, plot


def cmd_hausdorff(o):
    K, bid = _body(o["body"])
    L, lid = _body(o["body2"], "body2")
    if K.dim != L.dim:
        raise ConfigError("bodies must share the ambient dimension", "body2")
    d = hausdorff_distance(K, L, tol=_positive(o["tol"], "tol"))
    result = {"body": bid, "body2": lid, "value": d.value, "lower": d.lower, "upper": d.upper, "method": d.method}
    return result, [result], lambda path: _plot(path, K, [], o, extra=L)


def cmd_sample(o):
    K, bid = _body(o["body"])
    budget = _positive(o["budget"], "budget")
    n = _int(o["n"], "n")
    bodies = perturbation_sample(K, budget, seed=_int(o["seed"], "seed", 0), n=n)
    rows = []
    for k, B in enumerate(bodies):
        d = hausdorff_distance(K, B, tol=1e-3 * budget, threshold=budget)
        rows.append({"body": bid, "sample": k, "hausdorff_upper": d.upper, "spec": json.dumps(B.to_spec(), sort_keys=True)})
    result = {"body": bid, "budget": budget, "samples": [dict(r, spec=B.to_spec()) for r, B in zip(rows, bodies)]}
    return result, rows, lambda path: _plot(path, K, [], o, extra=bodies[0])


def cmd_verify(o):
    suite = o["suite"]
    if suite not in SUITES + ("all",):
        raise ConfigError(f"unknown suite {suite!r}; choose from {', '.join(SUITES + ('all',))}", "suite")
    scale = _positive(o["scale"], "scale")
    rep = run_suite(suite, seed=_int(o["seed"], "seed", 0), scale=scale)
    reports = rep["reports"] if suite == "all" else [rep]
    rows = []
    for r in reports:
        for k, c in enumerate(r["cases"]):
            rows.append({"suite": r["suite"], "case": k, "pass": c["pass"],
                         "detail": json.dumps(report._clean(c), sort_keys=True, default=report._default)})
    return rep, rows, None


COMMANDS = {
    "indicator": (cmd_indicator, ["body", "tau", "eps", "delta", "directions"],
                  "curvature indicator of a strictly convex body at direction tau"),
    "order": (cmd_order, ["body", "seq", "imax", "eta", "directions"],
              "maximal indicator and order of curvature up to a horizon"),
    "spike": (cmd_spike, ["body", "tau", "x", "theta", "tol"], "hull of the body with an apex x + theta*tau"),
    "raise-order": (cmd_raise_order, ["body", "m", "budget", "seq", "imax", "eta", "directions"],
                    "spike a body until its order reaches m within a Hausdorff budget"),
    "curvature": (cmd_curvature, ["body", "tau", "x", "nu", "directions"],
                  "directional curvature estimates from osculating radii"),
    "hausdorff": (cmd_hausdorff, ["body", "body2", "tol"], "certified Hausdorff distance of two bodies"),
    "sample": (cmd_sample, ["body", "budget", "n", "seed"], "seeded random bodies within a Hausdorff budget"),
    "verify": (cmd_verify, ["suite", "seed", "scale"], "run a verification suite"),
}

HELP = {
    "body": "body spec: path to a JSON file or an inline JSON object",
    "body2": "second body spec (path or inline JSON)",
    "tau": "direction, comma separated (e.g. 0,1)",
    "x": "boundary point, comma separated",
    "nu": "inward unit normal at --x",
    "eps": "hat radius",
    "delta": "hat angle in units of pi, inside (0, 1/2)",
    "seq": f"angle sequence: {', '.join(sorted(SEQUENCES))}",
    "imax": "index horizon",
    "eta": "tolerance for hat certificates",
    "directions": "direction net size",
    "theta": "spike height",
    "tol": "absolute tolerance",
    "m": "target order",
    "budget": "Hausdorff budget",
    "n": "number of samples",
    "seed": "random seed",
    "suite": f"one of {', '.join(SUITES + ('all',))}",
    "scale": "corpus scale factor",
}

TYPES = {"eps": float, "delta": float, "imax": int, "eta": float, "directions": int, "theta": float, "tol": float,
         "m": int, "budget": float, "n": int, "seed": int, "scale": float}


def _int(v, field, lo=1):
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < lo:
        raise ConfigError(f"{field} must be an integer >= {lo}", field)
    return int(v)


def build_parser():
    p = _Parser(prog="hatlab", description="Hat-based curvature experiments on convex bodies.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    for name, (_, fields, desc) in COMMANDS.items():
        s = sub.add_parser(name, help=desc, description=desc)
        s.add_argument("--config", help="JSON config; flags override its fields")
        for f in fields:
            default = DEFAULTS.get(f)
            h = HELP[f] + (f" (default: {default})" if default is not None else "")
            s.add_argument(f"--{f}", type=TYPES.get(f, str), default=None, help=h)
        s.add_argument("--out", help="JSON report path; a CSV is written next to it")
        if name != "verify":
            s.add_argument("--plot", action="store_true", help="also write an SVG cross-section next to --out")
            s.add_argument("--plane", default=None, help="axes of the plotted 2-plane for 3D bodies (default: 0,1)")
    return p


def resolve(args):
    """Merge defaults, config file and flags into one option dict."""
    _, fields, _ = COMMANDS[args.command]
    opts = {f: DEFAULTS.get(f) for f in fields}
    opts.update({"out": None, "plot": False, "plane": DEFAULTS["plane"]})
    if args.config:
        cfg = _load_json(args.config, "config")
        for key, val in cfg.items():
            k = key.replace("-", "_")
            k = "raise-order" if k == "raise_order" else k
            if k in ("command", "operation"):
                if val != args.command:
                    raise ConfigError(f"config is for {val!r}, not {args.command!r}", key)
                continue
            if k not in opts:
                raise ConfigError(f"unknown config field {key!r}", key)
            opts[k] = val
    for k in opts:
        v = getattr(args, k, None)
        if v is not None and v is not False:
            opts[k] = v
    return opts


def _plot(path, K, caps, o, extra=None):
    from .plotting import plot_section, section_frame

    frame = None
    if K.dim == 3:
        axes = [int(a) for a in str(o["plane"]).split(",")]
        if len(axes) != 2 or len(set(axes)) != 2 or not all(0 <= a < 3 for a in axes):
            raise ConfigError("plane must name two distinct axes out of 0,1,2", "plane")
        frame = section_frame(K, K.bounding_ball()[0], np.eye(3)[axes[0]], np.eye(3)[axes[1]])
    return plot_section(path, K, caps=caps, frame=frame, others=() if extra is None else (extra,))


def _timings(result):
    """Move wall-clock fields out of the payload so it stays reproducible."""
    out = {}
    for r in [result] + list(result.get("reports", [])):
        if "seconds" in r:
            out[r.get("suite", "result")] = r.pop("seconds")
    return out


def run(argv=None):
    """Parse, dispatch and write outputs. Returns (exit code, report or error)."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        raise ConfigError("a subcommand is required: " + ", ".join(COMMANDS))
    opts = resolve(args)
    fn = COMMANDS[args.command][0]
    t0 = time.perf_counter()
    result, rows, plot = fn(opts)
    timing = _timings(result)
    rep = {
        "command": args.command,
        "config": {k: v for k, v in opts.items() if k not in ("out", "plot")},
        "result": result,
        "seed": opts.get("seed"),
        "versions": report.versions(),
        "notes": NOTES.get(args.command, ""),
        "wall_time": {"total": round(time.perf_counter() - t0, 3), **timing},
    }
    code = EXIT_OK
    if args.command == "verify" and not result["ok"]:
        code = EXIT_FAILED
    # serialize before touching the disk so a failure leaves nothing behind
    text = report.dumps(rep)
    if opts["out"]:
        stem = os.path.splitext(opts["out"])[0]
        written = []
        try:
            if rows:
                report.write_csv(stem + ".csv", rows)
                written.append(stem + ".csv")
            if opts["plot"] and plot is not None:
                written.append(stem + ".svg.part")
                plot(stem + ".svg.part")
                os.replace(stem + ".svg.part", stem + ".svg")
                written[-1] = stem + ".svg"
            report.write_atomic(opts["out"], text)
        except BaseException:
            for path in written:
                if os.path.exists(path):
                    os.remove(path)
            raise
    else:
        sys.stdout.write(text)
    return code, rep


NOTES = {
    "indicator": "alpha0 is the sup of closed-form per-point push thresholds over a polished direction net.",
    "order": "each prefix is certified by a hat found by a direction search; certificates rechecked at tol/10.",
    "spike": "distance certified by closed form or Lipschitz branch and bound.",
    "raise-order": "final distance is an upper bound certified against the budget.",
    "curvature": "limits approximated by the extreme radii over the finest scales of a geometric ladder.",
    "hausdorff": "value with certified lower/upper enclosure.",
    "sample": "each sample certified within the budget.",
    "verify": "per-case pass/fail with witnesses.",
}


def _fail(code, payload):
    sys.stderr.write(json.dumps(report._clean(payload), sort_keys=True, default=report._default) + "\n")
    return code


def main(argv=None):
    try:
        code, _ = run(argv)
        return code
    except ConfigError as exc:
        return _fail(EXIT_INVALID, {"error": "invalid-config", "message": str(exc), "field": exc.field})
    except (InvalidInputError, PreconditionError, DegenerateSpikeError) as exc:
        return _fail(EXIT_INVALID, {"error": "invalid-input", "kind": type(exc).__name__, "message": str(exc)})
    except NumericFailure as exc:
        return _fail(EXIT_NUMERIC, {"error": "numeric-failure", "message": str(exc), "bracket": exc.bracket,
                                    "diagnostics": exc.diagnostics})
    except HatlabError as exc:
        return _fail(EXIT_NUMERIC, {"error": "failure", "kind": type(exc).__name__, "message": str(exc)})


if __name__ == "__main__":
    sys.exit(main())
