"""Command-line front end.

Exit codes: 0 success, 1 a check failed (table diff or shot band), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import core, statevector, tables, twostage
from .config import FORMATS, Config, load_config
from .errors import InvalidParameterError, SequenceSyntaxError
from .optimizer import SECOND_STAGE_COST, optimize_one_stage, optimize_two_stage
from .sequence import OperatorSequence

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--format", choices=FORMATS, default=None)
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--margin", type=float, default=None)
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--n-cap", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="partial-search",
        description="Quantum search with global and partial diffusion: evaluation, optimisation, tables.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="success probabilities of one sequence")
    p.add_argument("sequence", help='"S(n,m;k1,...,kq)" or a G/L step string')
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--backend", choices=("reduced", "statevector", "both"), default="reduced")
    p.add_argument("--target", help="target as bits or integer (state-vector backend; default 0)")

    p = sub.add_parser("tables", parents=[common], help="regenerate a result table and diff it")
    p.add_argument("which", type=int, choices=(1, 2))

    p = sub.add_parser("trajectory", parents=[common], help="reduced coordinates after every step")
    p.add_argument("sequence")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)

    p = sub.add_parser("optimize", parents=[common], help="exhaustive sequence search")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--budget", type=int, required=True, help="total oracle calls k_tot")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--one-stage", dest="objective", action="store_const", const="one")
    mode.add_argument("--two-stage", dest="objective", action="store_const", const="two")
    p.add_argument("--m-range", help='one-stage local scopes, e.g. "1-5" or "2,3" (default 1..n-1)')
    p.add_argument("--m", type=int, default=2, help="two-stage second-stage scope, 2 or 4")
    p.add_argument("--timing", action="store_true", help="include wall time in the report")

    p = sub.add_parser("plan", parents=[common], help="compose a two-stage plan (JSON)")
    p.add_argument("sequence", help="first-stage sequence")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)

    p = sub.add_parser("shots", parents=[common], help="Monte-Carlo end-to-end two-stage runs")
    p.add_argument("plan", help="plan JSON: a file path or an inline JSON document")
    p.add_argument("--shots", type=int, required=True)
    p.add_argument("--target", help="target as bits or integer (default 0)")
    return parser


def _parse_sequence(text: str, n: Optional[int], m: Optional[int]) -> OperatorSequence:
    try:
        return OperatorSequence.parse(text, n, m)
    except SequenceSyntaxError as exc:
        raise UsageError(f"cannot parse sequence: {exc}") from None


def _parse_target(text: Optional[str], n: int) -> int:
    if text is None:
        return 0
    try:
        if len(text) == n and set(text) <= {"0", "1"}:
            return int(text, 2)
        value = int(text, 0)
    except ValueError:
        raise UsageError(f"bad target {text!r}") from None
    if not 0 <= value < 2**n:
        raise UsageError(f"target {value} out of range for n={n}")
    return value


def _parse_m_range(text: Optional[str], n: int) -> list[int]:
    if text is None:
        return list(range(1, n))
    values: set[int] = set()
    try:
        for part in text.split(","):
            if "-" in part:
                lo, hi = part.split("-", 1)
                values.update(range(int(lo), int(hi) + 1))
            else:
                values.add(int(part))
    except ValueError:
        raise UsageError(f"bad m range {text!r}") from None
    if not values or any(not 1 <= v < n for v in values):
        raise UsageError(f"m range {text!r} must lie within 1..{n - 1}")
    return sorted(values)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return buf.getvalue()


def cmd_eval(args, cfg: Config) -> tuple[str, int]:
    seq = _parse_sequence(args.sequence, args.n, args.m)
    out: dict = {"sequence": seq.tuple_form, "steps": seq.steps, "n": seq.n, "m": seq.m, "backend": args.backend}
    partial = seq.m < seq.n
    if args.backend in ("reduced", "both"):
        if not partial:
            raise UsageError("the reduced backend needs m < n")
        state = core.apply_sequence(seq)
        out["reduced"] = {"pr": state.a_t**2, "pr_partial": 1.0 - state.a_u**2}
    if args.backend in ("statevector", "both"):
        t = _parse_target(args.target, seq.n)
        params = core.SearchParams.from_index(seq.n, seq.m, t, n_cap=cfg.n_cap)
        sv = statevector.run_sequence(params, seq)
        entry = {"target": params.target, "pr": float(sv.amp[t] ** 2)}
        if partial:
            entry["pr_partial"] = float(statevector.measure_prefix(sv, seq.n - seq.m).probabilities[params.block])
        out["statevector"] = entry
        if args.backend == "both":
            out["deviation"] = statevector.crosscheck(params, seq)
    if cfg.format == "json":
        return _dumps(out), EXIT_OK
    if cfg.format == "csv":
        rows = [
            {"backend": b, "pr": out[b]["pr"], "pr_partial": out[b].get("pr_partial", "")}
            for b in ("reduced", "statevector")
            if b in out
        ]
        return _csv(rows), EXIT_OK
    lines = [f"sequence {seq.tuple_form} (steps {seq.steps or '-'})"]
    for b in ("reduced", "statevector"):
        if b in out:
            lines.append(f"[{b}] Pr = {out[b]['pr']:.8f}")
            if "pr_partial" in out[b]:
                lines.append(f"[{b}] Pr(1) = {out[b]['pr_partial']:.8f}")
    if "deviation" in out:
        lines.append(f"max deviation = {out['deviation']:.3e}")
    return "\n".join(lines) + "\n", EXIT_OK


def cmd_tables(args, cfg: Config) -> tuple[str, int]:
    result = tables.regenerate(args.which, margin=cfg.margin, tolerance=cfg.tolerance, workers=cfg.workers)
    code = EXIT_OK if result.ok else EXIT_CHECK_FAILED
    if cfg.format == "json":
        return _dumps(result.to_dict()), code
    if cfg.format == "csv":
        return result.rows_csv() + "\n" + result.diff_csv(), code
    lines = [f"Table {args.which} (tolerance {cfg.tolerance:g}, margin {cfg.margin:g})"]
    header = f"{'n':>2} {'k_opt':>5} {'Grover %':>9} {'budget':>8} {'Pr %':>9} {'count':>6}  operator"
    lines.append(header)
    for r in result.rows():
        lines.append(
            f"{r['n']:>2} {r['k_opt']:>5} {r['grover_pr_pct']:>9} {r['budget']:>8} {r['pr_pct']:>9} "
            f"{r['count_total']:>6}  {r['operator']}"
        )
    lines.append("")
    for c in result.checks:
        if c.status != tables.MATCH:
            lines.append(f"[{c.status}] n={c.n} budget=+{c.budget} {c.column}: "
                         f"reference {c.published}, computed {c.computed}. {c.note}")
    lines.append("result: " + ("ok" if result.ok else "DIFF FAILED"))
    return "\n".join(lines) + "\n", code


def cmd_trajectory(args, cfg: Config) -> tuple[str, int]:
    seq = _parse_sequence(args.sequence, args.n, args.m)
    if not seq.m < seq.n:
        raise UsageError("trajectories need m < n")
    states = core.trajectory(seq)
    tags = ["init"] + list(seq.steps)
    rows = [
        {"step": i, "op": tag, "a_t": s.a_t, "a_ntt": s.a_ntt, "a_u": s.a_u}
        for i, (tag, s) in enumerate(zip(tags, states))
    ]
    if cfg.format == "json":
        return _dumps({"sequence": seq.tuple_form, "rows": rows}), EXIT_OK
    return _csv([{k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()} for r in rows]), EXIT_OK


def cmd_optimize(args, cfg: Config) -> tuple[str, int]:
    if args.n < 2 or args.n > cfg.n_cap:
        raise UsageError(f"--n must be in 2..{cfg.n_cap}")
    if args.objective == "one":
        m_values = _parse_m_range(args.m_range, args.n)
        report = optimize_one_stage(args.n, args.budget, m_values, margin=cfg.margin, workers=cfg.workers)
    else:
        if args.m not in SECOND_STAGE_COST:
            raise UsageError("--m must be 2 or 4 for --two-stage")
        report = optimize_two_stage(args.n, args.budget, args.m, margin=cfg.margin, workers=cfg.workers)
    data = report.to_dict(include_timing=args.timing)
    if cfg.format == "json":
        return _dumps(data), EXIT_OK
    if cfg.format == "csv":
        row = {
            "n": report.n, "k_tot": report.k_tot, "objective": report.objective,
            "baseline": report.baseline, "best": report.best_sequence.tuple_form,
            "steps": report.best_sequence.steps, "probability": report.best_probability,
            "improved": report.improved, "count_total": report.count_above_baseline,
            "evaluated": report.evaluated,
        }
        return _csv([row]), EXIT_OK
    lines = [
        f"{report.objective} search, n={report.n}, k_tot={report.k_tot}, m in {list(report.m_set)}",
        f"Grover baseline   {report.baseline * 100:.5f} %",
    ]
    if report.improved:
        lines.append(f"best operator     {report.best_sequence.tuple_form} ({report.best_sequence.steps})")
        lines.append(f"best probability  {report.best_probability * 100:.5f} %")
    else:
        lines.append("no improvement found (NA)")
        lines.append(f"best scored       {report.best_sequence.tuple_form} at {report.best_probability * 100:.5f} %")
    per_m = ", ".join(f"m={m}: {c}" for m, c in sorted(report.per_m_counts.items()))
    lines.append(f"above baseline    {report.count_above_baseline} ({per_m})")
    lines.append(f"evaluated         {report.evaluated}")
    if args.timing:
        lines.append(f"wall time         {report.wall_time_ms:.1f} ms")
    return "\n".join(lines) + "\n", EXIT_OK


def cmd_plan(args, cfg: Config) -> tuple[str, int]:
    seq = _parse_sequence(args.sequence, args.n, args.m)
    plan = twostage.compose(seq, seq.m)
    data = plan.to_dict()
    data["expected_success"] = twostage.two_stage_success(plan)
    return _dumps(data), EXIT_OK


def _load_plan(text: str) -> twostage.TwoStagePlan:
    source = text
    if not text.lstrip().startswith("{"):
        try:
            source = Path(text).read_text("utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read plan file: {exc}") from None
    try:
        data = json.loads(source)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed plan JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("plan JSON must be an object")
    try:
        return twostage.TwoStagePlan.from_dict(data)
    except (InvalidParameterError, SequenceSyntaxError) as exc:
        raise UsageError(f"invalid plan: {exc}") from None


def cmd_shots(args, cfg: Config) -> tuple[str, int]:
    if args.shots < 1:
        raise UsageError("--shots must be >= 1")
    plan = _load_plan(args.plan)
    t = _parse_target(args.target, plan.n)
    report = twostage.simulate_end_to_end(plan, t, args.shots, cfg.seed)
    data = report.to_dict()
    data["plan"] = plan.to_dict()
    data["target"] = format(t, f"0{plan.n}b")
    code = EXIT_OK if report.within() else EXIT_CHECK_FAILED
    if cfg.format == "json":
        return _dumps(data), code
    if cfg.format == "csv":
        return _csv([report.to_dict()]), code
    lines = [
        f"plan {plan.first_stage.tuple_form} | {plan.second_stage}  ({plan.total_oracles} oracle calls)",
        f"shots {report.shots}, seed {report.seed}, target {data['target']}",
        f"verified fraction {report.verified_fraction:.7f}",
        f"expected          {report.expected:.7f} (sigma {report.sigma:.2e})",
        "within 4 sigma: " + ("yes" if report.within() else "NO"),
    ]
    return "\n".join(lines) + "\n", code


COMMANDS = {
    "eval": cmd_eval,
    "tables": cmd_tables,
    "trajectory": cmd_trajectory,
    "optimize": cmd_optimize,
    "plan": cmd_plan,
    "shots": cmd_shots,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {
        "format": args.format,
        "seed": args.seed,
        "margin": args.margin,
        "tolerance": args.tolerance,
        "n_cap": args.n_cap,
        "workers": args.workers,
    }
    try:
        cfg = load_config(args.config, overrides)
        text, code = COMMANDS[args.command](args, cfg)
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    except (UsageError, InvalidParameterError, SequenceSyntaxError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return code


if __name__ == "__main__":
    sys.exit(main())
