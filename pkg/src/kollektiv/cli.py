"""Batch experiment runner.

Usage::

    kollektiv <scenario> [--seed u64] [--n u64] [--c real] [--config path]
                         [--format text|json|csv] [--out path]
                         [--schedule N0xK|list] [--selections family]

Config files are flat ``key = value`` lines with ``#`` comments; every key
has a matching flag and flags win. Exit status: 0 when the scenario's
verdicts match their certified expectation, 1 when they do not, 2 on a
configuration error.
"""
from __future__ import annotations

import argparse
import csv
import difflib
import io
import json
import math
import sys
import time
import warnings
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from . import _rng
from .collectives import (
    Collective,
    IIDGenerator,
    check_schedule,
    fit_schedule,
    geometric_schedule,
    oscillating_generator,
    sqrt_tolerance,
    stabilization_audit,
)
from .combining import (
    PairedCollective,
    combinability_audit,
    conditional_frequency,
    independence_audit,
    joint_counts,
    pair,
)
from .errors import BadSchedule, ConfigError
from .ghz import (
    CANONICAL_SETTINGS,
    GHZ_CONSTRAINTS,
    Setting,
    TripleState,
    correlation,
    gedanken_audit,
    joint_feasibility,
    lhv_enumerate,
    products,
    sample_setting_collective,
    wrong_parity_mass,
)
from .measures import (
    FiniteMeasure,
    assignment_space,
    build_singular_resolution,
    ghz_pointwise_identity,
    is_absolutely_continuous,
    is_equivalent,
    kolmogorov_contradiction,
)
from .randomness import arithmetic, builtin_families, parse_family, randomness_audit

SCENARIOS = ("stabilize", "randomness", "combine", "ghz-sample", "lhv", "paradox", "resolve", "gedanken")
FORMATS = ("text", "json", "csv")
KEYS = ("scenario", "seed", "n", "c", "schedule", "selections", "format", "out")

OK, MISMATCH, CONFIG_ERROR = 0, 1, 2


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str = "paradox"
    seed: int = 0
    n: int = 100_000
    schedule: str | None = None
    tolerance_coefficient: float = 5.0
    selections: str | None = None
    output_format: str = "text"
    output_path: str | None = None

    def checkpoints(self) -> list[int]:
        return parse_schedule(self.schedule) if self.schedule else fit_schedule(self.n)

    def tolerance(self):
        return sqrt_tolerance(self.tolerance_coefficient)


def parse_schedule(text: str) -> list[int]:
    """``"1000x8"`` (1000 * 2**k, k < 8) or an explicit ``"1000,2000,4000"``."""
    text = text.strip()
    try:
        if "x" in text:
            start, count = text.split("x")
            return geometric_schedule(int(start), int(count))
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError("schedule", f"cannot parse {text!r}; use N0xK or a comma list") from None


def _as_int(key, value) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        pass
    try:
        f = float(value)
    except (TypeError, ValueError):
        f = math.nan
    if not f.is_integer():
        raise ConfigError(key, f"expected an integer, got {value!r}")
    return int(f)


def read_config_file(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    values = {}
    for num, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(key or f"line {num}", "expected key = value")
        if key not in KEYS:
            hint = difflib.get_close_matches(key, KEYS, n=1)
            raise ConfigError(key, "unknown key" + (f" (did you mean {hint[0]!r}?)" if hint else ""))
        values[key] = value.strip()
    return values


def _build(values: dict) -> ExperimentConfig:
    scenario = values.get("scenario", "paradox")
    if scenario not in SCENARIOS:
        hint = difflib.get_close_matches(scenario, SCENARIOS, n=1)
        raise ConfigError("scenario", f"unknown scenario {scenario!r}" + (f" (did you mean {hint[0]!r}?)" if hint else ""))
    seed = _as_int("seed", values.get("seed", 0))
    if not 0 <= seed <= _rng.MAX_SEED:
        raise ConfigError("seed", "must be an unsigned 64-bit integer")
    n = _as_int("n", values.get("n", 100_000))
    if n < 1:
        raise ConfigError("n", "must be >= 1")
    try:
        c = float(values.get("c", 5.0))
    except ValueError:
        raise ConfigError("c", f"expected a real number, got {values['c']!r}") from None
    if not (c > 0 and math.isfinite(c)):
        raise ConfigError("c", "tolerance coefficient must be > 0")
    fmt = values.get("format", "text")
    if fmt not in FORMATS:
        raise ConfigError("format", f"unknown format {fmt!r}; choose from {', '.join(FORMATS)}")
    schedule = values.get("schedule") or None
    if schedule:
        try:
            check_schedule(parse_schedule(schedule))
        except BadSchedule as exc:
            raise ConfigError("schedule", str(exc)) from None
    selections = values.get("selections") or None
    if selections:
        try:
            parse_family(selections)
        except ValueError as exc:
            raise ConfigError("selections", str(exc)) from None
    return ExperimentConfig(scenario, seed, n, schedule, c, selections, fmt, values.get("out") or None)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError("arguments", message)


def _arg_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kollektiv", description="Frequency-probability and GHZ experiments.")
    p.add_argument("scenario", nargs="?", help="one of: " + ", ".join(SCENARIOS))
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--seed")
    p.add_argument("--n")
    p.add_argument("--c", help="tolerance coefficient c in tau(N) = c/sqrt(N)")
    p.add_argument("--schedule", help="checkpoints: N0xK or a comma list")
    p.add_argument("--selections", help='place selections, e.g. "arithmetic(step=2,offset=1);after_word(word=a)"')
    p.add_argument("--format", help="text, json or csv")
    p.add_argument("--out", help="write the report here instead of stdout")
    return p


def parse_config(argv: list[str] | None = None) -> ExperimentConfig:
    """Merge defaults, an optional config file and flags (flags win)."""
    args = _arg_parser().parse_args([] if argv is None else argv)
    values = read_config_file(args.config) if args.config else {}
    for key in KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return _build(values)


# -- scenarios -----------------------------------------------------------------

def _stabilize(cfg):
    tau = cfg.tolerance()
    schedule = cfg.checkpoints()
    bern = Collective.generate(IIDGenerator(("0", "1"), (0.75, 0.25)), schedule[-1], cfg.seed)
    v_iid = stabilization_audit(bern, schedule, tau)
    v_osc = stabilization_audit(oscillating_generator(), schedule, tau)

    def describe(v):
        out = {"status": v.status, "final": v.final, "max_excess": v.max_excess}
        if v.witness is not None:
            out["witness"] = {"label": v.witness.label, "frequencies": list(v.witness.frequencies)}
        return out

    results = {
        "schedule": schedule,
        "bernoulli_0.25": describe(v_iid),
        "oscillating_ratio_2": describe(v_osc),
    }
    expected = {"bernoulli_0.25": "Stabilized", "oscillating_ratio_2": "NotStabilized"}
    return results, expected, v_iid.stabilized and not v_osc.stabilized


def _randomness(cfg):
    tau = cfg.tolerance()
    n = cfg.n
    iid = Collective.generate(IIDGenerator.uniform(("a", "b")), n, cfg.seed)
    if cfg.selections:
        families = {"configured": parse_family(cfg.selections)}
    else:
        families = builtin_families(("a", "b"))
    family = [s for fam in families.values() for s in fam]
    schedule = parse_schedule(cfg.schedule) if cfg.schedule else fit_schedule(n)
    v_iid = randomness_audit(iid, family, schedule, tau)
    periodic = Collective.from_labels((["a", "b"] * (n // 2 + 1))[:n], ("a", "b"))
    v_per = randomness_audit(periodic, [arithmetic(2, 1), arithmetic(2, 2)], tolerance=tau)

    def describe(v):
        return {
            "status": v.status,
            "max_deviation": v.max_deviation,
            "selections": {
                name: {
                    "length": r.length,
                    "status": "insufficient" if r.insufficient else r.verdict.status,
                    "deviation": r.deviation,
                    "passed": r.passed,
                }
                for name, r in v.per_selection.items()
            },
        }

    results = {"iid_uniform": describe(v_iid), "periodic_ab": describe(v_per)}
    expected = {"iid_uniform": "RandomnessPass", "periodic_ab": "RandomnessFail"}
    return results, expected, v_iid.passed and not v_per.passed


def _spliced(x: Collective, streams: dict) -> Collective:
    """y whose values at positions with x == a come, in order, from ``streams[a]``."""
    codes = np.empty(len(x), dtype=np.int64)
    label_set = next(iter(streams.values())).label_set
    for a, stream in streams.items():
        pos = np.flatnonzero(x.codes == x.label_set.index(a))
        codes[pos] = stream.ensure(len(pos)).codes[:len(pos)]
    return Collective(label_set, codes)


def _combine(cfg):
    tau = cfg.tolerance()
    n = cfg.n
    uni = IIDGenerator.uniform(("a", "b"))
    x = Collective.generate(uni, n, _rng.derive_seed(cfg.seed, 0))
    y = Collective.generate(IIDGenerator.uniform(("u", "v")), n, _rng.derive_seed(cfg.seed, 1))
    schedule = cfg.checkpoints()

    ind = independence_audit(pair(x, y), schedule, tau)
    dep = independence_audit(pair(x, x), schedule, tau)
    mixed = _spliced(x, {
        "a": Collective.generate(uni, n, _rng.derive_seed(cfg.seed, 2)),
        "b": oscillating_generator(),
    })
    counter = combinability_audit(pair(x, mixed), schedule, tau)

    z = pair(x, y)
    limit = min(n, 10_000)
    identity_ok = _exact_identity(z, limit)
    results = {
        "independent_streams": {
            "status": ind.status, "max_deviation": ind.max_deviation, "bound": ind.tolerance,
            "factorization_deviation": ind.factorization_deviation,
            "joint": {f"{a},{b}": p for (a, b), p in ind.combinability.joint.items()},
        },
        "copy": {"status": dep.status, "max_deviation": dep.max_deviation, "bound": dep.tolerance},
        "oscillating_conditional": {"status": counter.status, "witness": counter.witness},
        "exact_identity": {"checked_up_to": limit, "holds": identity_ok},
    }
    expected = {
        "independent_streams": "Independent", "copy": "Dependent",
        "oscillating_conditional": "NotCombinable", "exact_identity": True,
    }
    ok = ind.independent and not dep.independent and not counter.combinable and identity_ok
    return results, expected, ok


def _exact_identity(z: PairedCollective, limit: int) -> bool:
    """``n(a,b)/N == nu(b/a) * nu(a)`` in rationals for every N up to ``limit``."""
    xs, ys = z.x_label_set.labels, z.y_label_set.labels
    cx = np.cumsum(z.x.codes[:limit][:, None] == np.arange(len(xs)), axis=0)
    for i, a in enumerate(xs):
        for k, b in enumerate(ys):
            cab = np.cumsum((z.x.codes[:limit] == i) & (z.y.codes[:limit] == k))
            for N in range(1, limit + 1):
                na = int(cx[N - 1, i])
                if na == 0:
                    continue
                if Fraction(int(cab[N - 1]), N) != Fraction(int(cab[N - 1]), na) * Fraction(na, N):
                    return False
    # spot-check the library path at the final N
    return all(
        conditional_frequency(z, b, a, limit) * Fraction(int(cx[-1, i]), limit)
        == Fraction(int(joint_counts(z, limit)[i, k]), limit)
        for i, a in enumerate(xs) if cx[-1, i] for k, b in enumerate(ys)
    )


def _ghz_sample(cfg):
    state = TripleState.ghz()
    n = cfg.n
    settings = {}
    ok = True
    for i, (s, (pattern, sign)) in enumerate(zip(CANONICAL_SETTINGS, GHZ_CONSTRAINTS)):
        c = sample_setting_collective(state, s, n, _rng.derive_seed(cfg.seed, i))
        prods = products(c)
        frac = float(np.mean(prods == sign))
        wrong = wrong_parity_mass(state, s, sign)
        settings[pattern] = {"certified_sign": sign, "sign_fraction": frac, "wrong_parity_mass": wrong}
        ok &= frac == 1.0 and wrong < 1e-12
    generic = Setting(0.3, 0.5, 0.7)
    c = sample_setting_collective(state, generic, n, _rng.derive_seed(cfg.seed, 4))
    mean = float(products(c).mean())
    target = math.sin(sum(generic))
    bound = 4 / math.sqrt(n)
    ok &= abs(mean - target) <= bound and abs(correlation(state, generic) - target) < 1e-12
    results = {
        "canonical": settings,
        "generic": {"setting": list(generic), "mean_product": mean, "sin_sum": target, "bound": bound},
    }
    return results, {"canonical": "sign_fraction 1.0", "generic": "within 4/sqrt(N)"}, ok


def _lhv(cfg):
    report = lhv_enumerate(GHZ_CONSTRAINTS)
    w = report.witness
    met = sum(w.product(p) == s for p, s in GHZ_CONSTRAINTS)
    results = json.loads(report.to_json())
    results["witness_constraints_met"] = met
    ok = report.satisfying_count == 0 and report.max_satisfiable == 3 and met == 3
    return results, {"satisfying_count": 0, "max_satisfiable": 3}, ok


def _resolution_results():
    res = build_singular_resolution()
    summary = res.summary()
    p = res.measures
    summary["equivalent_pairs"] = sum(is_equivalent(p[i], p[j]) for i in range(4) for j in range(4) if i != j)
    summary["absolutely_continuous_pairs"] = sum(
        is_absolutely_continuous(p[i], p[j]) for i in range(4) for j in range(4) if i != j
    )
    ok = (
        summary["P_i(Omega_i+)"] == [1, 1, 1]
        and summary["P_4(Omega_4-)"] == 1
        and summary["P_4(Sigma+)"] == 0
        and summary["pairwise_singular"]
        and ghz_pointwise_identity(res.tables).holds
    )
    return summary, ok


def _paradox(cfg):
    space, tables = assignment_space()
    ident = ghz_pointwise_identity(tables)
    uniform = kolmogorov_contradiction(FiniteMeasure.uniform(space), tables)
    sigma = sorted(ident.sigma_plus)
    on_sigma = kolmogorov_contradiction(FiniteMeasure.uniform(space, sigma), tables)
    single = {
        "atoms": len(space),
        "identity_violations": len(ident.violations),
        "sigma_plus_size": len(ident.sigma_plus),
        "sigma_meets_omega4_minus": uniform.sigma_meets_omega4_minus,
        "globally_infeasible": uniform.globally_infeasible,
        "uniform_measure": {
            "P(Omega_i+)": list(uniform.omega_plus), "P(Omega_4-)": uniform.omega4_minus,
            "P(Sigma+)": uniform.sigma_plus, "constraints_met": uniform.satisfied,
        },
        "measure_on_sigma_plus": {
            "k1_holds": on_sigma.k1_holds, "P(Sigma+)": on_sigma.sigma_plus,
            "P(Omega_4-)": on_sigma.omega4_minus, "k3_holds": on_sigma.k3_holds,
        },
    }
    resolution, res_ok = _resolution_results()
    ok = (
        uniform.globally_infeasible and not ident.violations
        and on_sigma.k1_holds and not on_sigma.k3_holds and res_ok
    )
    results = {"single_measure": single, "setting_indexed": resolution}
    expected = {"single_measure": "infeasible", "setting_indexed": "P_4(Sigma+) = 0 and no contradiction"}
    return results, expected, ok


def _resolve(cfg):
    resolution, ok = _resolution_results()
    return {"setting_indexed": resolution}, {"setting_indexed": "P_4(Sigma+) = 0 and pairwise singular"}, ok


def _gedanken(cfg):
    rep = gedanken_audit(TripleState.ghz(), cfg.n, cfg.seed)
    records = [
        {"setting": list(r.setting), "correlation": r.correlation, "certified_sign": r.certified_sign,
         "n": r.n, "mean_product": r.mean_product, "sign_fraction": r.sign_fraction}
        for r in rep.records
    ]
    cert = rep.certificate
    results = {
        "settings": records,
        "certificate": {
            "feasible": cert.feasible,
            "satisfying_sizes": [len(s) for s in cert.satisfying_sets],
            "intersection_size": len(cert.intersection),
        },
    }
    return results, {"certificate": "infeasible", "settings": "all certified signs observed"}, (
        rep.empirical_ok and rep.non_combinable
    )


RUNNERS = {
    "stabilize": _stabilize,
    "randomness": _randomness,
    "combine": _combine,
    "ghz-sample": _ghz_sample,
    "lhv": _lhv,
    "paradox": _paradox,
    "resolve": _resolve,
    "gedanken": _gedanken,
}


# -- reports -------------------------------------------------------------------

def _plain(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def run(cfg: ExperimentConfig) -> tuple[dict, int]:
    """Run a scenario; return the report and the exit code."""
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        results, expected, ok = RUNNERS[cfg.scenario](cfg)
    report = {
        "scenario": cfg.scenario,
        "config": asdict(cfg),
        "results": _plain(results),
        "expected": _plain(expected),
        "verdict": "match" if ok else "mismatch",
        "duration_s": round(time.perf_counter() - t0, 6),
    }
    return report, OK if ok else MISMATCH


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and any(isinstance(v, (dict, list)) for v in obj):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    elif isinstance(obj, list):
        yield prefix, " ".join(map(str, obj))
    else:
        yield prefix, obj


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        # keys embed selection names such as "arithmetic(step=2,offset=1)"
        w.writerows((k.replace(",", ";"), v) for k, v in _flatten(report))
        return buf.getvalue()
    lines = [f"scenario: {report['scenario']}  verdict: {report['verdict']}"]
    lines += [f"  {k} = {v}" for k, v in _flatten(report["results"])]
    lines.append(f"expected: {json.dumps(report['expected'])}")
    lines.append(f"duration: {report['duration_s']:.3f} s")
    return "\n".join(lines) + "\n"


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        print(f"kollektiv: config error: {exc}", file=sys.stderr)
        return CONFIG_ERROR
    report, code = run(cfg)
    text = render(report, cfg.output_format)
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
