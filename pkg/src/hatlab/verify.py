"""Executable property suites: each returns a report with one entry per case.

Every trial draws from its own generator seeded by (seed, suite, trial), so
reports do not depend on worker count or scheduling.
"""

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import corpus
from .bodies import Ball, Ellipsoid, Revolution
from .curvature import hat_bound_check, point_curvature
from .errors import HatlabError, InvalidInputError
from .geometry import hausdorff_distance
from .hat import CapFamily, CapSpec, find_hat, has_hat, nesting_check, stability_radius, stability_witness
from .indicator import anchored_cap, ball_indicator, curvature_indicator, indicator_sum, push_thresholds_bisect
from .order import AngleSequence, infinite_curvature_witness, maximal_indicator
from .sphere import direction_net

SUITES = ("ball-oracle", "hat-stability", "conti", "schacht", "cone2", "infty", "hat-bound")
_CODES = {name: i for i, name in enumerate(SUITES)}


def workers():
    try:
        return max(1, int(os.environ.get("HATLAB_THREADS", "1")))
    except ValueError:
        raise InvalidInputError("HATLAB_THREADS must be an integer")


def pmap(fn, items):
    """Map in trial order, over a process pool when HATLAB_THREADS > 1."""
    items = list(items)
    n = workers()
    if n == 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * n))))


def trial_rng(seed, suite, trial):
    return np.random.default_rng([seed, _CODES[suite], trial])


def _count(scale, n):
    return max(1, int(round(scale * n)))


def _report(suite, seed, scale, cases, t0, **extra):
    failed = [c for c in cases if not c["pass"]]
    return {
        "suite": suite,
        "seed": seed,
        "scale": scale,
        "cases": cases,
        "passed": len(cases) - len(failed),
        "failed": len(failed),
        "ok": not failed,
        "seconds": round(time.perf_counter() - t0, 3),
        **extra,
    }


# ball oracle ----------------------------------------------------------------

BALL_GRID = [
    (R, e, dl, d)
    for R in (0.5, 1.0, 2.0)
    for e in (0.25, 0.5, 1.0, 2.0)
    for dl in (0.1, 0.25, 0.4)
    for d in (2, 3)
]


def _ball_case(args):
    R, e, dl, d = args
    K = Ball(np.zeros(d), R)
    tau = np.eye(d)[-1]
    val = curvature_indicator(K, tau, e, dl).alpha
    ref = ball_indicator(R, e, dl)
    return {"name": f"R={R} eps={e} delta={dl} d={d}", "alpha": val, "closed_form": ref,
            "error": abs(val - ref), "pass": abs(val - ref) <= 1e-6}


def bisection_check(R, e, dl, d, n=None):
    """Indicator of a ball from bisection thresholds over a dense boundary net."""
    K = Ball(np.zeros(d), R)
    tau = np.eye(d)[-1]
    cap = anchored_cap(K, tau, e, dl)
    net = direction_net(d, n or (20000 if d == 2 else 40000))
    return float(np.max(push_thresholds_bisect(cap, K._touching(net), tau)))


def ball_oracle(seed=0, scale=1.0):
    t0 = time.perf_counter()
    confirm = []
    for R, e, dl, d in [(2.0, 0.5, 0.25, 2), (1.0, 0.25, 0.4, 3), (0.5, 0.25, 0.1, 2)]:
        b = bisection_check(R, e, dl, d)
        ref = ball_indicator(R, e, dl)
        confirm.append({"name": f"bisection R={R} eps={e} delta={dl} d={d}", "bisection": b,
                        "closed_form": ref, "pass": abs(b - ref) <= 1e-6})
    cases = confirm + pmap(_ball_case, BALL_GRID)
    return _report("ball-oracle", seed, scale, cases, t0)


# hat stability --------------------------------------------------------------

def _stability_trial(args):
    seed, d, trial = args
    rng = trial_rng(seed, "hat-stability", 1000 * d + trial)
    cases = corpus.stability_cases(d)
    name, K, cap = cases[trial % len(cases)]
    Delta = (0.05, 0.1)[(trial // len(cases)) % 2]
    phi = stability_radius(Delta)
    Kp, kind = corpus.perturb(K, phi, rng)
    row = {"name": f"d={d} trial={trial} {name}/{kind}", "trial": trial, "dim": d, "body": name,
           "perturbation": kind, "Delta": Delta, "phi": phi}
    try:
        w = stability_witness(K, cap, Delta, Kp)
    except HatlabError as exc:
        return {**row, "pass": False, "error": str(exc)}
    # the axis bound is in hat-angle units (radians / pi), like delta itself
    ok = w.verified and w.axis_angle_normalized < Delta and w.tip_displacement <= w.displacement_bound
    return {**row, **w.row(trial), "dim": d, "tip": w.cap.tip.tolist(), "axis": w.cap.axis.tolist(),
            "axis_angle_normalized": w.axis_angle_normalized, "hausdorff": w.hausdorff,
            "displacement_bound": w.displacement_bound, "pass": bool(ok)}


def hat_stability(seed=7, scale=1.0):
    t0 = time.perf_counter()
    jobs = [(seed, 2, i) for i in range(_count(scale, 200))] + [(seed, 3, i) for i in range(_count(scale, 100))]
    cases = pmap(_stability_trial, jobs)
    radians = sum(1 for c in cases if c.get("axis_angle", math.inf) < c["Delta"])
    return _report("hat-stability", seed, scale, cases, t0, axis_within_delta_radians=radians)


# continuity (conti) ---------------------------------------------------------

CONTI_SPECS = [(0.25, 0.1), (0.5, 0.25), (1.0, 1.0 / 3.0), (2.0, 0.4)]
IND_TOL = 1e-7


def _zero_hat_case(args):
    d, name, k = args
    K = corpus.strictly_convex_corpus(d)[name]
    taus = direction_net(d, 8 if d == 2 else 12, include_axes=False)
    taus = np.vstack([taus, -np.eye(d)[-1:], np.eye(d)[-1:]])
    out = []
    for tau in taus:
        e, dl = CONTI_SPECS[k]
        a = curvature_indicator(K, tau, e, dl).alpha
        v = has_hat(K, anchored_cap(K, tau, e, dl), tol=IND_TOL, check_tip=False)
        gray = IND_TOL < a <= 10 * IND_TOL or v.status == "indeterminate"
        ok = gray or ((a <= IND_TOL) == bool(v))
        out.append({"name": f"{name} d={d} tau={np.round(tau, 4).tolist()} eps={e} delta={dl:.4g}",
                    "alpha": a, "has_hat": v.status, "gray": bool(gray), "pass": bool(ok)})
    return out


def _strict_perturb(K, budget, rng):
    kinds = ["round"] if isinstance(K, Revolution) else ["translate", "round", "composite"]
    if isinstance(K, (Ball, Ellipsoid)):
        kinds += ["axes", "rotate"]
    return corpus.perturb(K, budget, rng, kinds[int(rng.integers(len(kinds)))])


def _rotate_dir(tau, angle, rng):
    w = rng.standard_normal(len(tau))
    w -= np.dot(w, tau) * tau
    w /= np.linalg.norm(w)
    return math.cos(angle) * tau + math.sin(angle) * w


def _probe(args):
    seed, trial = args
    rng = trial_rng(seed, "conti", trial)
    d = 2 if trial % 3 else 3
    bodies = corpus.strictly_convex_corpus(d)
    name = sorted(bodies)[int(rng.integers(len(bodies)))]
    K = bodies[name]
    total = 1e-3
    Kp, kind = _strict_perturb(K, 0.5 * total, rng)
    dist = hausdorff_distance(K, Kp, tol=1e-2 * total, threshold=0.5 * total)
    angle = max(0.0, total - dist.upper) * rng.uniform(0.0, 1.0)
    tau = rng.standard_normal(d)
    tau /= np.linalg.norm(tau)
    tau2 = _rotate_dir(tau, angle, rng)
    tau2 /= np.linalg.norm(tau2)
    e, dl = CONTI_SPECS[int(rng.integers(len(CONTI_SPECS)))]
    a = curvature_indicator(K, tau, e, dl).alpha
    b = curvature_indicator(Kp, tau2, e, dl).alpha
    gap = abs(a - b)
    return {"name": f"probe {trial} {name}/{kind}", "dim": d, "eps": e, "delta": dl, "hausdorff": dist.upper,
            "angle": angle, "delta_indicator": gap, "pass": bool(dist.upper + angle <= total and gap <= 0.1)}


def conti(seed=0, scale=1.0):
    t0 = time.perf_counter()
    jobs = [(d, name, k) for d in (2, 3) for name in corpus.strictly_convex_corpus(d) for k in range(len(CONTI_SPECS))]
    zero = [c for group in pmap(_zero_hat_case, jobs) for c in group]
    probes = pmap(_probe, [(seed, i) for i in range(_count(scale, 500))])
    worst = max(p["delta_indicator"] for p in probes)
    return _report("conti", seed, scale, zero + probes, t0, max_delta_indicator=worst,
                   gray_cases=sum(c["gray"] for c in zero))


# nested families (schacht) --------------------------------------------------

def _schacht_pair(args):
    seed, trial, samples = args
    rng = trial_rng(seed, "schacht", trial)
    d = 2 if trial % 2 == 0 else 3
    n = int(rng.integers(1, 4))
    eps = np.sort(rng.uniform(0.3, 2.0, n))[::-1] * np.linspace(1.0, 0.7, n)
    delta = np.sort(rng.uniform(0.1, 0.4, n))[::-1]
    degenerate = trial % 5 == 4
    shrink = 1.0 if degenerate else rng.uniform(0.7, 0.95)
    widen = 0.0 if degenerate else rng.uniform(0.01, 0.05)
    tip = rng.standard_normal(d)
    axis = rng.standard_normal(d)
    axis /= np.linalg.norm(axis)
    outer = CapFamily(tip, axis, tuple(eps), tuple(delta))
    inner = CapFamily(tip, axis, tuple(eps * shrink), tuple(np.minimum(delta + widen, 0.49)))
    rep = nesting_check(outer, inner, samples=samples, radius=0.05, seed=int(rng.integers(2**31)))
    ok = rep.violations == 0 and (degenerate or rep.min_boundary_distance > 0)
    return {"name": f"pair {trial} d={d} n={n}{' degenerate' if degenerate else ''}", "dim": d,
            "eps": eps.tolist(), "delta": delta.tolist(), "shrink": shrink, "widen": widen,
            "samples": rep.samples, "violations": rep.violations, "degenerate": rep.degenerate,
            "min_boundary_distance": rep.min_boundary_distance, "pass": bool(ok)}


def schacht(seed=0, scale=1.0):
    t0 = time.perf_counter()
    cases = pmap(_schacht_pair, [(seed, i, 10_000) for i in range(_count(scale, 20))])
    return _report("schacht", seed, scale, cases, t0)


# indicator cone (cone2) -----------------------------------------------------

def _cone2_fixtures():
    seq = AngleSequence.named()
    return [
        ("ball-1/3", Ball([0.0, 0.0], 1.0 / 3.0), seq.specs([1, 2, 3])),
        ("ellipse", Ellipsoid([1.0, 0.5]), seq.specs([1, 2])),
        ("revolution", Revolution(1.5), seq.specs([1, 2, 3, 4])),
        ("sphere-1/2", Ball([0.0, 0.0, 0.0], 0.5), seq.specs([1, 2])),
    ]


def _cone2_part1(args):
    seed, trial = args
    rng = trial_rng(seed, "cone2", trial)
    fixtures = _cone2_fixtures()
    name, K, specs = fixtures[trial % len(fixtures)]
    gap = 0.02
    primed = [(e + gap, dl - gap) for e, dl in specs]
    Kp, kind = _strict_perturb(K, 1e-4, rng) if not isinstance(K, Revolution) else corpus.perturb(K, 1e-4, rng)
    base = find_hat(K, specs)
    found = find_hat(Kp, primed)
    return {"name": f"part1 {trial} {name}/{kind}", "base_found": base is not None,
            "perturbed_found": found is not None, "pass": base is not None and found is not None}


def _cone2_part2(args):
    seed, trial = args
    rng = trial_rng(seed, "cone2", 10_000 + trial)
    seq = AngleSequence.named()
    fixtures = [
        ("ball", Ball([0.0, 0.0], 1.0), seq.specs([1, 2])),
        ("ellipse", Ellipsoid([2.0, 1.0]), [(0.25, 0.3)]),
        ("sphere", Ball([0.0, 0.0, 0.0], 1.0), seq.specs([1, 2])),
    ]
    name, K, specs = fixtures[trial % len(fixtures)]
    Kp, kind = _strict_perturb(K, 1e-3, rng)
    taus = direction_net(K.dim, 64 if K.dim == 2 else 128)
    mins = [min(indicator_sum(B, t, specs) for t in taus) for B in (K, Kp)]
    return {"name": f"part2 {trial} {name}/{kind}", "min_sum": mins[0], "min_sum_perturbed": mins[1],
            "pass": bool(min(mins) > 0)}


def cone2(seed=0, scale=1.0):
    t0 = time.perf_counter()
    n = _count(scale, 8)
    cases = pmap(_cone2_part1, [(seed, i) for i in range(n)]) + pmap(_cone2_part2, [(seed, i) for i in range(n)])
    return _report("cone2", seed, scale, cases, t0)


# infinite curvature (infty) -------------------------------------------------

def infty(seed=0, scale=1.0, dims=(2,)):
    t0 = time.perf_counter()
    cases = []
    for d in dims:
        K = Revolution(1.5, dim=d)
        res = maximal_indicator(K, i_max=8)
        wit = infinite_curvature_witness(K, res, m_max=8)
        pole, nu = np.zeros(d), np.eye(d)[-1]
        est = point_curvature(K, pole, nu)
        cases.append({
            "name": f"revolution p=1.5 d={d}",
            "index_set": list(res.index_set),
            "verdict": res.verdict,
            "witness_point": wit["point"],
            "witness_distance_to_pole": float(np.linalg.norm(wit["point"])),
            "kappa_bound": wit["kappa_lower_bound"],
            "pole_kappa_i": est.kappa_i,
            "finest_scale": float(est.ladder[-1]),
            "pass": bool(res.order >= 8 and wit["kappa_lower_bound"] >= 8
                         and np.linalg.norm(wit["point"]) < 1e-3 * K.diameter()
                         and est.kappa_i >= 1e3 and est.ladder[-1] <= 1e-8),
        })
    for R, m in ((1.0, 1), (1.0 / 3.0, 3)):
        K = Ball([0.0, 0.0], R)
        res = maximal_indicator(K, i_max=8)
        wit = infinite_curvature_witness(K, res, m_max=m)
        cases.append({"name": f"ball R={R:.4g} m_max={m}", "kappa_bound": wit["kappa_lower_bound"],
                      "pass": wit["kappa_lower_bound"] == m})
    return _report("infty", seed, scale, cases, t0)


# hat => curvature -----------------------------------------------------------

def hat_bound(seed=0, scale=1.0):
    t0 = time.perf_counter()
    fixtures = [
        ("unit ball eps=1", Ball([0.0, 0.0], 1.0), CapSpec([0.0, -1.0], [0.0, -1.0], 1.0, 0.3)),
        ("unit ball eps=2", Ball([0.0, 0.0], 1.0), CapSpec([0.0, -1.0], [0.0, -1.0], 2.0, 0.3)),
        ("ellipse vertex", Ellipsoid([2.0, 1.0]), CapSpec([2.0, 0.0], [1.0, 0.0], 1.0, 0.3)),
        ("sphere eps=1.5", Ball([0.0, 0.0, 0.0], 1.0), CapSpec([0.0, 0.0, -1.0], [0.0, 0.0, -1.0], 1.5, 0.25)),
        ("ellipsoid vertex", Ellipsoid([2.0, 1.0, 1.0]), CapSpec([2.0, 0.0, 0.0], [1.0, 0.0, 0.0], 1.0, 0.3)),
        ("revolution pole", Revolution(1.5), CapSpec([0.0, 0.0], [0.0, -1.0], 0.1, 0.1)),
    ]
    cases = []
    for name, K, cap in fixtures:
        r = hat_bound_check(K, cap)
        cases.append({"name": name, "kappa_i": r["kappa_i"], "bound": r["bound"], "pass": r["pass"]})
    return _report("hat-bound", seed, scale, cases, t0)


RUNNERS = {
    "ball-oracle": ball_oracle,
    "hat-stability": hat_stability,
    "conti": conti,
    "schacht": schacht,
    "cone2": cone2,
    "infty": infty,
    "hat-bound": hat_bound,
}


def run_suite(name, seed=0, scale=1.0):
    if name == "all":
        reports = [RUNNERS[s](seed=seed, scale=scale) for s in SUITES]
        return {"suite": "all", "seed": seed, "scale": scale, "reports": reports,
                "ok": all(r["ok"] for r in reports)}
    if name not in RUNNERS:
        raise InvalidInputError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    return RUNNERS[name](seed=seed, scale=scale)
