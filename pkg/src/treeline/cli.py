"""Command-line front end: limit tables, the ball checker, the boundary
extension, bound suites, and probe batteries, with JSON/CSV artifacts.

Exit codes: 0 all requested checks came out as expected, 2 a verdict or
probe failed, 1 usage or configuration error.  JSON bodies are
deterministic for a given configuration and seed; timing goes to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import kernels
from .actions import (
    ConstantsLedger,
    PRESETS,
    covering_radius_sq,
    orbit_limit,
    spec_from_config,
)
from .boundary_map import (
    AnalyticMismatchError,
    NoCoverError,
    NotCauchyError,
    QiEstimate,
    continuity_probe,
    equivariance_check,
    image_spread_check,
    injectivity_probe,
    phibar,
    qi_constants,
    sequence_tracking_suite,
    surjectivity_probe,
    well_definedness_check,
)
from .exactmath import ceil_to_grid, fmt_rational, parse_rational
from .space import Directional, Pole, parse_boundary_point
from .starcheck import InvalidConstantsError, check_condition_star, witness_growth_scan
from .topology import NotConvergentError
from .tree import TreeEnd, common_prefix_length, power_end
from .words import GroupElement, Word

BOUND_SUITES = {
    "tracking": "tracking",
    "spread": "spread",
    "constants": "constants",
    # interface-compat aliases
    "lemma25": "tracking",
    "prop21": "spread",
}


class CliError(Exception):
    pass


def _jnum(x: Fraction) -> dict:
    return {"value": fmt_rational(x), "float": float(x), "exact": True}


def _jfloat(x: float) -> dict:
    return {"value": x, "exact": False}


def _resolve_spec(name: str):
    try:
        return spec_from_config(name)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot resolve action spec {name!r}: {exc}") from exc


def _resolve_radius(text: str, spec, label: str) -> Fraction:
    if text == "auto":
        value = ceil_to_grid(covering_radius_sq(spec), Fraction(1, 8))
        if value == 0:
            value = Fraction(1, 8)
        return value
    value = parse_rational(text)
    if value <= 0:
        raise CliError(f"{label} must be positive")
    return value


def _emit(payload: dict, path: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_csv(rows: list[dict], path: str) -> None:
    if not rows:
        Path(path).write_text("")
        return
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def _ledger_from_args(args, spec_x, spec_y) -> tuple[ConstantsLedger, QiEstimate]:
    n = _resolve_radius(args.N, spec_x, "N")
    m = _resolve_radius(args.M, spec_y, "M")
    est = qi_constants(spec_x, spec_y, min(args.L, 6))
    return ConstantsLedger(N=n, M=m, lam=est.lam, C=est.C), est


# ---------------------------------------------------------------------------


def cmd_limits(args) -> int:
    spec_x = _resolve_spec(args.spec_x)
    spec_y = _resolve_spec(args.spec_y)
    a_end = power_end(Word.from_str("a"))
    rows = []
    for i in range(1, args.i_max + 1):
        gi = GroupElement(Word.from_str("a" * i + "b" * i), 0)
        ai = GroupElement(Word.from_str("a" * i), 0)
        lim_x = orbit_limit(spec_x, gi)
        lim_y = orbit_limit(spec_y, gi)
        lim_ax = orbit_limit(spec_x, ai)
        lim_ay = orbit_limit(spec_y, ai)
        prefix = common_prefix_length(power_end(gi.word), a_end)
        rows.append(
            {
                "i": i,
                "slope_x_mixed": _jnum(lim_x.slope),
                "slope_y_mixed": _jnum(lim_y.slope),
                "slope_x_pure": _jnum(lim_ax.slope),
                "slope_y_pure": _jnum(lim_ay.slope),
                "angle_y_mixed": _jfloat(math.atan(float(lim_y.slope))),
                "shared_prefix_with_pure_end": prefix,
            }
        )
    payload = {
        "command": "limits",
        "spec_x": spec_x.serialize(),
        "spec_y": spec_y.serialize(),
        "rows": rows,
    }
    _emit(payload, args.json)
    if args.csv:
        flat = [
            {
                "i": r["i"],
                "slope_x_mixed": r["slope_x_mixed"]["value"],
                "slope_y_mixed": r["slope_y_mixed"]["value"],
                "slope_x_pure": r["slope_x_pure"]["value"],
                "slope_y_pure": r["slope_y_pure"]["value"],
                "angle_y_mixed": r["angle_y_mixed"]["value"],
                "shared_prefix_with_pure_end": r["shared_prefix_with_pure_end"],
            }
            for r in rows
        ]
        _emit_csv(flat, args.csv)
    return 0


def cmd_check_star(args) -> int:
    spec_x = _resolve_spec(args.spec_x)
    spec_y = _resolve_spec(args.spec_y)
    n = _resolve_radius(args.N, spec_x, "N")
    m = _resolve_radius(args.M, spec_y, "M")
    if args.threads:
        kernels.set_threads(args.threads)
    t0 = time.perf_counter()
    verdict = check_condition_star(
        spec_x, spec_y, n, m, args.L, witness_cap=args.max_witnesses
    )
    elapsed = time.perf_counter() - t0
    payload = {
        "command": "check-star",
        "spec_x": spec_x.serialize(),
        "spec_y": spec_y.serialize(),
        "resolved": {"N": _jnum(n), "M": _jnum(m), "L": args.L},
        "verdict": verdict.to_json(),
    }
    _emit(payload, args.json)
    print(
        f"check-star: {verdict.pairs_scanned} pairs in {elapsed:.2f}s "
        f"[{verdict.backend}]",
        file=sys.stderr,
    )
    if args.expect == "holds":
        return 0 if verdict.holds_on_ball else 2
    if args.expect == "fails":
        return 0 if not verdict.holds_on_ball else 2
    return 0 if verdict.holds_on_ball else 2


def cmd_phibar(args) -> int:
    spec_x = _resolve_spec(args.spec_x)
    spec_y = _resolve_spec(args.spec_y)
    n = _resolve_radius(args.N, spec_x, "N")
    alpha = parse_boundary_point(args.alpha)
    try:
        result = phibar(alpha, spec_x, spec_y, n, k=args.k)
    except (NotCauchyError, NotConvergentError, AnalyticMismatchError, NoCoverError) as exc:
        _emit(
            {
                "command": "phibar",
                "alpha": alpha.serialize(),
                "error": type(exc).__name__,
                "detail": str(exc),
            },
            args.json,
        )
        return 2
    payload = {
        "command": "phibar",
        "spec_x": spec_x.serialize(),
        "spec_y": spec_y.serialize(),
        "N": _jnum(n),
        "result": result.to_json(),
    }
    _emit(payload, args.json)
    return 0


def cmd_bounds(args) -> int:
    spec_x = _resolve_spec(args.spec_x)
    spec_y = _resolve_spec(args.spec_y)
    suite = BOUND_SUITES[args.suite]
    ledger, est = _ledger_from_args(args, spec_x, spec_y)
    payload: dict = {
        "command": "bounds",
        "suite": suite,
        "spec_x": spec_x.serialize(),
        "spec_y": spec_y.serialize(),
        "ledger": {k: _jnum(v) for k, v in ledger.as_dict().items()},
        "qi_ball": est.L,
    }
    ok = True
    if suite == "constants":
        _emit(payload, args.json)
        return 0
    alpha = parse_boundary_point(args.alpha)
    result = phibar(alpha, spec_x, spec_y, ledger.N, k=args.k)
    payload["alpha"] = alpha.serialize()
    payload["image"] = result.output.serialize()
    if suite == "tracking":
        checks = sequence_tracking_suite(
            result, ledger, spec_x, spec_y, max_index=args.k
        )
        payload["checks"] = [c.to_json() for c in checks]
        ok = all(c.holds for c in checks)
        if args.csv:
            _emit_csv([c.to_json() for c in checks], args.csv)
    else:
        radii = [float(parse_rational(r)) for r in args.radii.split(",")]
        checks = image_spread_check(result, ledger, spec_y, radii=radii)
        payload["checks"] = [c.to_json() for c in checks]
        ok = all(c.holds for c in checks)
        if args.csv:
            _emit_csv([c.to_json() for c in checks], args.csv)
    _emit(payload, args.json)
    return 0 if ok else 2


def _sample_boundary_points(rng: random.Random, count: int) -> list:
    """Deterministic sample of directional points and poles with small
    periods and extraction-friendly slopes."""
    periods = ["a", "b", "A", "B", "ab", "ba", "aB", "Ab", "abb", "bab"]
    prefixes = ["", "a", "b", "ab", "Ba"]
    slopes = [Fraction(0), Fraction(1), Fraction(-1), Fraction(1, 2),
              Fraction(-1, 2), Fraction(2), Fraction(-2), Fraction(3, 2)]
    out: list = []
    while len(out) < count:
        if len(out) % 10 == 9:
            out.append(Pole(rng.choice((1, -1))))
            continue
        per = Word.from_str(rng.choice(periods))
        pre = Word.from_str(rng.choice(prefixes))
        try:
            end = TreeEnd(pre, per)
        except ValueError:
            continue
        out.append(Directional(end, rng.choice(slopes)))
    return out


def cmd_probe(args) -> int:
    spec_x = _resolve_spec(args.spec_x)
    spec_y = _resolve_spec(args.spec_y)
    ledger, _ = _ledger_from_args(args, spec_x, spec_y)
    rng = random.Random(args.seed)
    payload: dict = {
        "command": "probe",
        "kind": args.kind,
        "spec_x": spec_x.serialize(),
        "spec_y": spec_y.serialize(),
        "seed": args.seed,
    }
    ok = True
    if args.kind == "continuity":
        alpha = parse_boundary_point(args.alpha)
        report = continuity_probe(
            alpha, spec_x, spec_y, ledger, parse_rational(args.r_bar),
            samples=args.samples, k=args.k,
        )
        payload["report"] = report.to_json()
        ok = report.passed
    elif args.kind == "equivariance":
        results = []
        for _ in range(args.samples):
            alpha = _sample_boundary_points(rng, 1)[0]
            word_len = rng.randint(0, 3)
            letters = []
            for _ in range(word_len):
                x = rng.randrange(4)
                while letters and x == letters[-1] ^ 2:
                    x = rng.randrange(4)
                letters.append(x)
            g = GroupElement(Word(letters), rng.randint(-1, 1))
            res = equivariance_check(g, alpha, spec_x, spec_y, ledger.N, k=args.k)
            results.append(
                {
                    "g": str(g),
                    "alpha": alpha.serialize(),
                    "lhs": res.lhs.serialize(),
                    "rhs": res.rhs.serialize(),
                    "passed": res.passed,
                }
            )
            ok = ok and res.passed
        payload["results"] = results
    elif args.kind == "injectivity":
        alpha = parse_boundary_point(args.alpha)
        alpha2 = parse_boundary_point(args.alpha2)
        report = injectivity_probe(alpha, alpha2, spec_x, spec_y, ledger, k=args.k)
        payload["report"] = {
            "alpha": report.alpha.serialize(),
            "alpha2": report.alpha2.serialize(),
            "image": report.image.serialize(),
            "image2": report.image2.serialize(),
            "distinct": report.distinct,
            "divergence": [
                {
                    "t": fmt_rational(t),
                    "proof_lower_bound": fmt_rational(b),
                    "observed_separation_sq": fmt_rational(o),
                    "exact": True,
                }
                for t, b, o in report.divergence_rows
            ],
        }
        ok = report.distinct
    elif args.kind == "surjectivity":
        targets = (
            [parse_boundary_point(t) for t in args.targets.split(";")]
            if args.targets
            else _sample_boundary_points(rng, args.samples)
        )
        rows = surjectivity_probe(
            spec_x, spec_y, ledger.N, ledger.M, targets, k=args.k
        )
        payload["rows"] = [
            {
                "target": r.target.serialize(),
                "pullback": r.pullback.serialize() if r.pullback else None,
                "hit": r.hit,
                "note": r.note,
            }
            for r in rows
        ]
        ok = all(r.hit for r in rows)
    elif args.kind == "well-definedness":
        alpha = parse_boundary_point(args.alpha)
        res = well_definedness_check(alpha, spec_x, spec_y, ledger.N, k=args.k)
        payload["report"] = {
            "alpha": alpha.serialize(),
            "primary": res.primary.serialize(),
            "alternate": res.alternate.serialize(),
            "interleaved": res.interleaved.serialize(),
            "passed": res.passed,
        }
        ok = res.passed
    payload["passed"] = ok
    _emit(payload, args.json)
    return 0 if ok else 2


def _read_config(path: str) -> dict:
    data: dict = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        data[key.strip()] = value.strip()
    return data


def cmd_report(args) -> int:
    cfg = _read_config(args.config)
    spec_x = _resolve_spec(cfg.get("spec_x", "dot"))
    spec_y = _resolve_spec(cfg.get("spec_y", "star"))
    L = int(cfg.get("L", "6"))
    n = _resolve_radius(cfg.get("N", "auto"), spec_x, "N")
    m = _resolve_radius(cfg.get("M", "auto"), spec_y, "M")
    i_max = int(cfg.get("i_max", "10"))
    seed = int(cfg.get("seed", "0"))
    probes = [p for p in cfg.get("probes", "").split(",") if p]
    expect_holds = cfg.get("expect_holds")
    payload: dict = {
        "command": "report",
        "config": {
            "spec_x": spec_x.serialize(),
            "spec_y": spec_y.serialize(),
            "L": L,
            "N": _jnum(n),
            "M": _jnum(m),
            "i_max": i_max,
            "seed": seed,
        },
    }
    ok = True
    rows = []
    for i in range(1, i_max + 1):
        gi = GroupElement(Word.from_str("a" * i + "b" * i), 0)
        rows.append(
            {
                "i": i,
                "slope_x": _jnum(orbit_limit(spec_x, gi).slope),
                "slope_y": _jnum(orbit_limit(spec_y, gi).slope),
            }
        )
    payload["limits"] = rows
    growth = witness_growth_scan(spec_x, spec_y, n, i_max=i_max)
    payload["witness_growth"] = [
        {"i": i, "d_sq_x": _jnum(dx), "d_sq_y": _jnum(dy)} for i, dx, dy in growth
    ]
    verdict = check_condition_star(spec_x, spec_y, n, m, L, witness_cap=32)
    payload["check_star"] = verdict.to_json()
    if expect_holds is not None:
        ok = ok and (verdict.holds_on_ball == (expect_holds.lower() == "true"))
    else:
        ok = ok and verdict.holds_on_ball
    if probes:
        ledger = ConstantsLedger(
            N=n, M=m, lam=qi_constants(spec_x, spec_y, min(L, 6)).lam,
            C=qi_constants(spec_x, spec_y, min(L, 6)).C,
        )
        rng = random.Random(seed)
        probe_out = {}
        for p in probes:
            if p == "equivariance":
                results = []
                for _ in range(4):
                    alpha = _sample_boundary_points(rng, 1)[0]
                    g = GroupElement(Word.from_str("ab"), 1)
                    res = equivariance_check(g, alpha, spec_x, spec_y, ledger.N)
                    results.append(res.passed)
                probe_out[p] = all(results)
            elif p == "well-definedness":
                alpha = _sample_boundary_points(rng, 1)[0]
                probe_out[p] = well_definedness_check(
                    alpha, spec_x, spec_y, ledger.N
                ).passed
        payload["probes"] = probe_out
        ok = ok and all(probe_out.values())
    _emit(payload, cfg.get("output") or args.json)
    return 0 if ok else 2


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treeline",
        description="Exact geometry and boundary maps on the tree-line product.",
    )
    parser.add_argument("--backend", choices=("numba", "numpy"),
                        help="override the kernel backend for this run")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_specs(p):
        p.add_argument("--spec-x", default="dot",
                       help="preset name or config path (default dot)")
        p.add_argument("--spec-y", default="star",
                       help="preset name or config path (default star)")

    p = sub.add_parser("limits", help="orbit limit table for the mixed family")
    add_specs(p)
    p.add_argument("--i-max", type=int, default=10)
    p.add_argument("--json")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_limits)

    p = sub.add_parser("check-star", help="ball-truncated transfer check")
    add_specs(p)
    p.add_argument("--N", default="auto")
    p.add_argument("--M", default="auto")
    p.add_argument("--L", type=int, default=6)
    p.add_argument("--max-witnesses", type=int, default=100)
    p.add_argument("--expect", choices=("holds", "fails"))
    p.add_argument("--threads", type=int)
    p.add_argument("--json")
    p.set_defaults(func=cmd_check_star)

    p = sub.add_parser("phibar", help="boundary extension at one point")
    add_specs(p)
    p.add_argument("--alpha", required=True,
                   help='boundary point, e.g. "[a^inf,0/1]" or "[pole,+]"')
    p.add_argument("--N", default="auto")
    p.add_argument("--k", type=int, default=24)
    p.add_argument("--json")
    p.set_defaults(func=cmd_phibar)

    p = sub.add_parser("bounds", help="quantitative bound suites")
    add_specs(p)
    p.add_argument("--suite", choices=sorted(BOUND_SUITES), default="tracking")
    p.add_argument("--alpha", default="[(a)^inf, slope=0]")
    p.add_argument("--N", default="auto")
    p.add_argument("--M", default="auto")
    p.add_argument("--L", type=int, default=6)
    p.add_argument("--k", type=int, default=12)
    p.add_argument("--radii", default="1,2,4,8")
    p.add_argument("--json")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("probe", help="continuity/equivariance/injectivity/"
                                     "surjectivity/well-definedness probes")
    add_specs(p)
    p.add_argument("--kind", required=True,
                   choices=("continuity", "equivariance", "injectivity",
                            "surjectivity", "well-definedness"))
    p.add_argument("--alpha", default="[(a)^inf, slope=0]")
    p.add_argument("--alpha2", default="[(b)^inf, slope=0]")
    p.add_argument("--r-bar", default="4")
    p.add_argument("--targets", help="semicolon-separated boundary points")
    p.add_argument("--samples", type=int, default=4)
    p.add_argument("--N", default="auto")
    p.add_argument("--M", default="auto")
    p.add_argument("--L", type=int, default=4)
    p.add_argument("--k", type=int, default=24)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("report", help="run a configured batch and emit one artifact")
    p.add_argument("--config", required=True)
    p.add_argument("--json")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    if args.backend:
        try:
            kernels.set_backend(args.backend)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    try:
        return args.func(args)
    except (CliError, InvalidConstantsError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
