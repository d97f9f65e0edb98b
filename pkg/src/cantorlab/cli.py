"""Command line front end.

Exit codes: 0 on success, 1 for usage/validation problems (bad flags, bad
specs, malformed files), 2 for computation failures (no convergence,
exhausted searches, singular systems) with a one-line JSON diagnostic on
stderr.

A --config FILE of key=value lines is expanded to --key value pairs right
after the subcommand, so explicit flags always win.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from fractions import Fraction

from . import coeffs as _coeffs
from . import fractal, pipeline, solver, stats
from .codec import (
    explicit_digits,
    read_digit_file,
    seeded_uniform_digits,
    write_digit_file,
)
from .errors import CantorError, ComputationError, NoConvergence, SearchExhausted, SingularJacobian
from .sequences import (
    BasicSequence,
    HugeValue,
    classify,
    parse_sequence_spec,
    parse_sset,
    print_sequence_spec,
)

CSV_COLUMNS = ["checkpoint", "kind", "k", "m", "r", "block", "count", "expected", "ratio", "err_bound"]


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, HugeValue):
        return "2^%d*%d" % (obj.exp2, obj.mant)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float):
        return obj
    if hasattr(obj, "_mpf_"):
        return float(obj)
    return obj


def _dump_json(obj, path=None):
    text = json.dumps(_jsonable(obj), sort_keys=True, separators=(",", ":"))
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _write_stats_csv(path, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow({c: row.get(c, "") for c in CSV_COLUMNS})


def _parse_checkpoints(text: str) -> list:
    try:
        cps = sorted({int(x) for x in text.split(",") if x})
    except ValueError:
        raise ValueError("bad checkpoint list %r" % text) from None
    if not cps or cps[0] < 1:
        raise ValueError("checkpoints must be positive integers")
    return cps


def _parse_blocks(text: str) -> list:
    return [stats.parse_block(p) for p in text.split(";") if p]


def _seq_from_args(spec_text: str) -> BasicSequence:
    spec = parse_sequence_spec(spec_text)
    seq = BasicSequence.from_spec(spec)
    return seq


def _fmt_value(v) -> str:
    if isinstance(v, HugeValue):
        return "2^%d*%d" % (v.exp2, v.mant)
    return str(v)


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------


def cmd_sequences(args) -> int:
    if args.named:
        if args.named == "composition":
            seq = pipeline.composition_sequence()
        else:
            raise ValueError("unknown named sequence %r" % args.named)
    else:
        if not args.spec:
            raise ValueError("need --spec or --named")
        seq = _seq_from_args(args.spec)
    out = {}
    if args.print_spec and seq.spec is not None:
        out["spec"] = print_sequence_spec(seq.spec)
    if args.values:
        a, _, b = args.values.partition(":")
        lo, hi = int(a), int(b or a)
        for n in range(lo, hi + 1):
            print("%d\t%s" % (n, _fmt_value(seq.value(n))))
    if args.classify:
        rep = classify(seq, args.classify, k_max=args.kmax, prec=args.precision)
        out["classify"] = {
            "horizon": rep.horizon,
            "monotone_ok": rep.monotone_ok,
            "first_violation": rep.first_violation,
            "tail_min": _fmt_value(rep.tail_min),
            "tail_window": list(rep.tail_window),
            "partial_sums": {str(k): [v, t] for k, (v, t) in rep.partial_sums.items()},
            "caveat": rep.caveat,
        }
    if out:
        _dump_json(out, args.out)
    return 0


def cmd_coeffs(args) -> int:
    sset = parse_sset(args.sset)
    eps = Fraction(args.eps)
    c = _coeffs.coefficients(args.t, eps, sset)
    out = {"t": args.t, "eps": str(eps), "sset": sset.label}
    if args.show_values:
        out["values"] = [str(v) for v in c.values]
    ks = range(1, args.t + 1) if args.all_k else ([args.k] if args.k else [])
    sums = {}
    for k in ks:
        ws = _coeffs.window_sum(c, k)
        cf = _coeffs.closed_form(args.t, eps, sset, k)
        sums[str(k)] = {
            "window_sum": str(ws),
            "window_sum_float": float(ws),
            "closed_form": str(cf),
            "match": ws == cf,
            "per_window": float(ws / (2 * args.t)),
        }
    if sums:
        out["orders"] = sums
    if args.ap1:
        m, _, r = args.ap1.partition(":")
        out["ap1"] = str(_coeffs.ap1_window_sum(c, int(m), int(r)))
    if args.ap2:
        k, m, r = args.ap2.split(":")
        out["ap2"] = str(_coeffs.ap2_window_sum(c, int(k), int(m), int(r)))
    _dump_json(out, args.out)
    return 0


def cmd_solve(args) -> int:
    eps = [float(Fraction(e)) for e in args.eps.split(",")] if args.eps else 0
    if isinstance(eps, list) and len(eps) == 1:
        eps = eps[0]
    guess = [float(x) for x in args.guess.split(",")] if args.guess else None
    sol = solver.newton_solve(args.t, eps=eps, c0=guess, tol=args.tol, max_iter=args.max_iter)
    out = sol.as_dict()
    if args.t in solver.C2_ELIMINANT and len(sol.c) > 1:
        out["c2_polynomial"] = solver.poly_eval(solver.C2_ELIMINANT[args.t], sol.c[1])
    _dump_json(out, args.out)
    return 0


def cmd_scan(args) -> int:
    rows = solver.scan_region(args.t_min, args.t_max, tol=args.tol, max_iter=args.max_iter)
    out = []
    failures = 0
    for row in rows:
        if isinstance(row, solver.Solution):
            out.append(row.as_dict())
        else:
            failures += 1
            out.append(row)
    _dump_json({"solutions": out, "failures": failures}, args.out)
    return 0


def cmd_build(args) -> int:
    seq = _seq_from_args(args.base)
    state = pipeline.build_schedule(
        seq,
        Fraction(args.eps),
        parse_sset(args.sset),
        rule=args.rule,
        mode=args.mode,
        horizon=args.horizon,
        search_cap=args.search_cap,
    )
    text = state.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    for w in state.warnings:
        print("warning: %s" % w, file=sys.stderr)
    return 0


def _load_state(args) -> tuple:
    with open(args.state, "r", encoding="utf-8") as fh:
        state = pipeline.ScheduleState.from_json(fh.read())
    spec_text = args.base or state.base_spec
    if not spec_text:
        raise ValueError("schedule stores no base spec; pass --base")
    return state, _seq_from_args(spec_text)


def cmd_generate(args) -> int:
    if not args.out:
        raise ValueError("generate writes a digit file; pass --out FILE")
    state, seq = _load_state(args)
    stream = pipeline.generate_digits(state, seq, args.seed)
    if args.clip:
        stream = pipeline.target_digits(stream, seq)
    count = min(args.count, state.K_last)
    write_digit_file(args.out, stream, count)
    print("wrote %d digits to %s" % (count, args.out))
    return 0


def cmd_windows(args) -> int:
    state, seq = _load_state(args)
    ks = [int(k) for k in args.k.split(",")]
    per_stage = None if args.per_stage == "all" else int(args.per_stage)
    rows = pipeline.window_ratio_report(
        state,
        seq,
        ks,
        horizon=args.horizon,
        windows_per_stage=per_stage,
        prec=args.precision,
        exact=args.exact,
    )
    cols = ["i", "j", "k", "n_start", "n_end", "t", "const_q", "alpha",
            "p_sum", "q_sum", "ratio", "prediction", "err_bound"]
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols, extrasaction="ignore")
            w.writeheader()
            for row in rows:
                w.writerow({c: _jsonable(row.get(c, "")) for c in cols})
        print("wrote %d rows to %s" % (len(rows), args.out))
    else:
        _dump_json(rows)
    return 0


def cmd_analyze(args) -> int:
    prec = args.precision
    state = None
    if args.digits:
        if not args.base:
            raise ValueError("--digits needs --base for validation")
        seq = _seq_from_args(args.base)
        stream = read_digit_file(args.digits, seq)
    elif args.state:
        state, seq = _load_state(args)
        if args.seed is None:
            raise ValueError("--state analysis needs --seed")
        stream = pipeline.generate_digits(state, seq, args.seed)
        if not args.raw_stream:
            stream = pipeline.target_digits(stream, seq)
    else:
        raise ValueError("need --digits FILE or --state FILE")
    cps = _parse_checkpoints(args.checkpoints)
    top = cps[-1]
    blocks = _parse_blocks(args.blocks) if args.blocks else []
    rows = []
    extras = {}
    if blocks:
        counted = stats.count_blocks(stream.iter_digits(1, top + 1), blocks, cps)
        for n in cps:
            for b in blocks:
                k = len(b)
                exp = stats.qnk(seq, k, n, prec=prec)
                cnt = counted[n][b]
                rows.append(
                    {
                        "checkpoint": n,
                        "kind": "N",
                        "k": k,
                        "m": "",
                        "r": "",
                        "block": stats.format_block(b),
                        "count": cnt,
                        "expected": float(exp.value),
                        "ratio": cnt / float(exp.value) if exp.value > 0 else "",
                        "err_bound": float(exp.err),
                    }
                )
    if args.ap1:
        m = int(args.ap1)
        mblocks = [b for b in blocks if len(b) == m]
        if not mblocks:
            raise ValueError("--ap1 %d needs at least one block of that length" % m)
        counted = stats.count_blocks_ap1(stream.iter_digits(1, top + 1), m, mblocks, cps)
        for n in cps:
            for b in mblocks:
                for r in range(1, m + 1):
                    exp = stats.qnmr(seq, m, r, n, prec=prec)
                    cnt = counted[n][(b, r)]
                    rows.append(
                        {
                            "checkpoint": n,
                            "kind": "API",
                            "k": m,
                            "m": m,
                            "r": r,
                            "block": stats.format_block(b),
                            "count": cnt,
                            "expected": float(exp.value),
                            "ratio": cnt / float(exp.value) if exp.value > 0 else "",
                            "err_bound": float(exp.err),
                        }
                    )
    if args.ap2:
        k_s, m_s, r_s = args.ap2.split(":")
        k2, m2, r2 = int(k_s), int(m_s), int(r_s)
        k2blocks = [b for b in blocks if len(b) == k2]
        if not k2blocks:
            raise ValueError("--ap2 needs at least one block of length %d" % k2)
        counted = stats.count_blocks_ap2(stream, k2, m2, r2, cps, k2blocks)
        for n in cps:
            for b in k2blocks:
                exp = stats.ap2_sum(seq, k2, m2, r2, n, prec=prec)
                cnt = counted[n][b]
                rows.append(
                    {
                        "checkpoint": n,
                        "kind": "APII",
                        "k": k2,
                        "m": m2,
                        "r": r2,
                        "block": stats.format_block(b),
                        "count": cnt,
                        "expected": float(exp.value),
                        "ratio": cnt / float(exp.value) if exp.value > 0 else "",
                        "err_bound": float(exp.err),
                    }
                )
    if args.pairs:
        pair_list = []
        for item in args.pairs.split(";"):
            a, _, b = item.partition("/")
            pair_list.append((stats.parse_block(a), stats.parse_block(b)))
        pair_blocks = sorted({b for p in pair_list for b in p})
        counted = stats.count_blocks(stream.iter_digits(1, top + 1), pair_blocks, cps)
        for n in cps:
            for b1, b2 in pair_list:
                c1, c2 = counted[n][b1], counted[n][b2]
                rows.append(
                    {
                        "checkpoint": n,
                        "kind": "RN",
                        "k": len(b1),
                        "m": "",
                        "r": "",
                        "block": "%s/%s" % (stats.format_block(b1), stats.format_block(b2)),
                        "count": c1,
                        "expected": c2,
                        "ratio": c1 / c2 if c2 else "",
                        "err_bound": "",
                    }
                )
    if args.psi_target:
        target = _seq_from_args(args.psi_target)
        extras["psi_transfer"] = [
            {**row, "block": stats.format_block(row["block"])}
            for row in pipeline.psi_transfer_report(stream, target, blocks, cps)
        ]
    if args.limit_estimate:
        if state is None:
            raise ValueError("--limit-estimate needs --state")
        est = pipeline.limit_ratio_estimate(state, seq, stream, blocks, top)
        extras["limit_estimates"] = [
            {**row, "block": stats.format_block(row["block"])} for row in est
        ]
    if args.out:
        _write_stats_csv(args.out, rows)
        print("wrote %d rows to %s" % (len(rows), args.out))
    if args.json or not args.out:
        payload = {"rows": rows}
        payload.update(extras)
        _dump_json(payload, args.json)
    return 0


def cmd_markov(args) -> int:
    spec = fractal.MarkovSpec(args.b, args.k, args.n)
    out = {"b": args.b, "k": args.k, "n": args.n}
    if args.matrix:
        P = fractal.markov_matrix(spec)
        out["matrix"] = {
            "".join(map(str, s)): {"".join(map(str, s2)): str(p) for s2, p in row.items()}
            for s, row in P.items()
        }
    if args.check_stationary:
        out["uniform_stationary"] = fractal.stationary_uniform_check(spec)
    if args.entropy:
        h = fractal.entropy(spec, prec=args.precision)
        out["entropy_nats"] = float(h.value)
        out["entropy_bits"] = float(h.value) / math.log(2)
        out["entropy_err"] = float(h.err)
        out["max_entropy_ratio"] = float(h.value) / math.log(args.b)
    if args.word:
        word = [int(x) for x in args.word.split(",")]
        out["cylinder"] = str(fractal.cylinder_measure(spec, word))
        out["cylinder_float"] = float(fractal.cylinder_measure(spec, word))
    if args.sample:
        if args.seed is None:
            raise ValueError("--sample needs --seed")
        digits = fractal.sample_markov(spec, args.sample, args.seed)
        if args.digits_out:
            base = BasicSequence.from_values([args.b] * len(digits))
            write_digit_file(args.digits_out, explicit_digits(base, digits), len(digits))
        if args.blocks:
            blocks = _parse_blocks(args.blocks)
            counts = stats.count_blocks(iter(digits), blocks, [len(digits)])[len(digits)]
            freq = {}
            for b in blocks:
                measure = fractal.cylinder_measure(spec, b)
                occ = len(digits) - len(b) + 1
                freq[stats.format_block(b)] = {
                    "count": counts[b],
                    "frequency": counts[b] / occ,
                    "measure": float(measure),
                    "sigma_heuristic": math.sqrt(float(measure) * occ),
                }
            out["sample_blocks"] = freq
        out["sample_length"] = args.sample
    _dump_json(out, args.out)
    return 0


def cmd_moran(args) -> int:
    if args.json_spec:
        with open(args.json_spec, "r", encoding="utf-8") as fh:
            spec = fractal.moran_spec_from_json(json.load(fh))
    else:
        if not (args.n and args.c):
            raise ValueError("need --json-spec FILE or --n and --c lists")
        spec = fractal.MoranSpec(
            tuple(int(x) for x in args.n.split(",")),
            tuple(Fraction(x) for x in args.c.split(",")),
            Fraction(args.delta),
        )
    cps = _parse_checkpoints(args.checkpoints) if args.checkpoints else None
    rep = fractal.moran_bounds(spec, args.stages, prec=args.precision, checkpoints=cps)
    _dump_json(
        {
            "stages": rep.stages,
            "lower_final": rep.lower_final,
            "upper_final": rep.upper_final,
            "lower_tail_min": rep.lower_tail_min,
            "upper_tail_min": rep.upper_tail_min,
            "tail_window": list(rep.tail_window),
            "ones_flagged": rep.ones_flagged,
            "rows": rep.rows,
            "caveat": rep.caveat,
        },
        args.out,
    )
    return 0


def cmd_hdmain(args) -> int:
    build = pipeline.group_build(args.horizon, args.seed, prec=args.precision)
    out = {
        "horizon": args.horizon,
        "copy_count": build.copy_count,
        "bases_match": build.bases_match,
    }
    rows = []
    cps = _parse_checkpoints(args.checkpoints) if args.checkpoints else [args.horizon]
    if args.dxn:
        vdc = stats.van_der_corput(args.horizon)
        dx_rows = pipeline.tail_distance_report(
            build.stream,
            lambda n: vdc[n - 1],
            Fraction(args.delta),
            max(cps),
            cps,
            metric=args.metric,
            prec=args.precision,
        )
        for row in dx_rows:
            rows.append(
                {
                    "checkpoint": row["checkpoint"],
                    "kind": "DXN",
                    "k": "",
                    "m": "",
                    "r": "",
                    "block": "",
                    "count": row["exceedances"],
                    "expected": row["delta"],
                    "ratio": row["density"],
                    "err_bound": "",
                }
            )
        out["dxn"] = dx_rows
    if args.dimension:
        rep = build.dimension_report(checkpoints=cps, prec=args.precision)
        out["dimension"] = {
            "lower_final": rep.lower_final,
            "lower_tail_min": rep.lower_tail_min,
            "lower_max": max((r["lower"] for r in rep.rows), default=rep.lower_final),
            "upper_final": rep.upper_final,
            "ones_flagged": rep.ones_flagged,
            "rows": rep.rows,
            "caveat": rep.caveat,
        }
    if args.out_csv:
        _write_stats_csv(args.out_csv, rows)
    _dump_json(out, args.out)
    return 0


def cmd_discrepancy(args) -> int:
    if args.vdc:
        pts = stats.van_der_corput(args.vdc)
        label = "vdc:%d" % args.vdc
    elif args.points:
        pts = []
        with open(args.points, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    pts.append(Fraction(line))
        label = args.points
    else:
        raise ValueError("need --vdc N or --points FILE")
    d = stats.star_discrepancy(pts)
    out = {
        "source": label,
        "n": len(pts),
        "star_discrepancy": str(d),
        "star_discrepancy_float": float(d),
    }
    if args.csv_out:
        _write_stats_csv(
            args.csv_out,
            [
                {
                    "checkpoint": len(pts),
                    "kind": "DISC",
                    "k": "",
                    "m": "",
                    "r": "",
                    "block": "",
                    "count": len(pts),
                    "expected": "",
                    "ratio": float(d),
                    "err_bound": "",
                }
            ],
        )
    _dump_json(out, args.out)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=128,
                        help="working precision in bits (>= 64)")
    common.add_argument("--config", default=None,
                        help="key=value file expanded to flags (explicit flags win)")
    common.add_argument("--out", default=None, help="write JSON here instead of stdout")

    p = argparse.ArgumentParser(prog="cantorlab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sequences", parents=[common], help="evaluate and classify base sequences")
    s.add_argument("--spec", default=None)
    s.add_argument("--named", choices=["composition"], default=None)
    s.add_argument("--values", default=None, metavar="A:B")
    s.add_argument("--classify", type=int, default=None, metavar="HORIZON")
    s.add_argument("--kmax", type=int, default=3)
    s.add_argument("--print-spec", action="store_true")
    s.set_defaults(func=cmd_sequences)

    s = sub.add_parser("coeffs", parents=[common], help="window coefficient sums")
    s.add_argument("--t", type=int, required=True)
    s.add_argument("--eps", default="0")
    s.add_argument("--sset", default="all")
    s.add_argument("--k", type=int, default=None)
    s.add_argument("--all-k", action="store_true")
    s.add_argument("--show-values", action="store_true")
    s.add_argument("--ap1", default=None, metavar="M:R")
    s.add_argument("--ap2", default=None, metavar="K:M:R")
    s.set_defaults(func=cmd_coeffs)

    s = sub.add_parser("solve", parents=[common], help="solve one window-product system")
    s.add_argument("--t", type=int, required=True)
    s.add_argument("--eps", default=None, help="scalar or comma list for per-order targets")
    s.add_argument("--guess", default=None, metavar="C1,C2,...")
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--max-iter", type=int, default=200)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("scan", parents=[common], help="solve a range of t values")
    s.add_argument("--t-min", type=int, required=True)
    s.add_argument("--t-max", type=int, required=True)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--max-iter", type=int, default=200)
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("build", parents=[common], help="build a stage schedule")
    s.add_argument("--base", required=True, metavar="SPEC")
    s.add_argument("--eps", required=True)
    s.add_argument("--sset", default="all")
    s.add_argument("--rule", default="linear:2")
    s.add_argument("--mode", choices=["plain", "strict"], default="plain")
    s.add_argument("--horizon", type=int, default=10**6)
    s.add_argument("--search-cap", type=int, default=10**9)
    s.set_defaults(func=cmd_build)

    s = sub.add_parser("generate", parents=[common], help="draw digits over a schedule")
    s.add_argument("--state", required=True)
    s.add_argument("--base", default=None, help="override the stored base spec")
    s.add_argument("--seed", required=True)
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--clip", action="store_true",
                   help="re-express digits over the original base")
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("windows", parents=[common], help="per-window ratio report")
    s.add_argument("--state", required=True)
    s.add_argument("--base", default=None)
    s.add_argument("--k", default="1,2")
    s.add_argument("--horizon", type=int, default=None)
    s.add_argument("--per-stage", default="3", help="windows sampled per stage, or 'all'")
    s.add_argument("--exact", action="store_true", help="exact Fraction sums")
    s.set_defaults(func=cmd_windows)

    s = sub.add_parser("analyze", parents=[common], help="block statistics over digit streams")
    s.add_argument("--digits", default=None, metavar="FILE")
    s.add_argument("--base", default=None, metavar="SPEC")
    s.add_argument("--state", default=None, metavar="FILE")
    s.add_argument("--seed", default=None)
    s.add_argument("--raw-stream", action="store_true",
                   help="skip the clip transfer when analyzing a schedule stream")
    s.add_argument("--blocks", default=None, metavar="B1;B2;...")
    s.add_argument("--checkpoints", required=True, metavar="N1,N2,...")
    s.add_argument("--ap1", default=None, metavar="M")
    s.add_argument("--ap2", default=None, metavar="K:M:R")
    s.add_argument("--pairs", default=None, metavar="B1/B2;...")
    s.add_argument("--psi-target", default=None, metavar="SPEC")
    s.add_argument("--limit-estimate", action="store_true")
    s.add_argument("--json", default=None, metavar="FILE")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("markov", parents=[common], help="tilted-uniform Markov measures")
    s.add_argument("--b", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--matrix", action="store_true")
    s.add_argument("--entropy", action="store_true")
    s.add_argument("--check-stationary", action="store_true")
    s.add_argument("--word", default=None, metavar="D1,D2,...")
    s.add_argument("--sample", type=int, default=None, metavar="LENGTH")
    s.add_argument("--seed", default=None)
    s.add_argument("--blocks", default=None, metavar="B1;B2;...")
    s.add_argument("--digits-out", default=None, metavar="FILE")
    s.set_defaults(func=cmd_markov)

    s = sub.add_parser("moran", parents=[common], help="covering dimension bounds")
    s.add_argument("--json-spec", default=None, metavar="FILE")
    s.add_argument("--n", default=None, help="comma list of piece counts")
    s.add_argument("--c", default=None, help="comma list of ratios")
    s.add_argument("--delta", default="1")
    s.add_argument("--stages", type=int, required=True)
    s.add_argument("--checkpoints", default=None)
    s.set_defaults(func=cmd_moran)

    s = sub.add_parser("hdmain", parents=[common], help="grouped construction and its reports")
    s.add_argument("--horizon", type=int, required=True)
    s.add_argument("--seed", required=True)
    s.add_argument("--delta", default="1/20")
    s.add_argument("--metric", choices=["mod1", "abs"], default="mod1")
    s.add_argument("--checkpoints", default=None)
    s.add_argument("--dxn", action="store_true")
    s.add_argument("--dimension", action="store_true")
    s.add_argument("--out-csv", default=None)
    s.set_defaults(func=cmd_hdmain)

    s = sub.add_parser("discrepancy", parents=[common], help="exact star discrepancy")
    s.add_argument("--vdc", type=int, default=None)
    s.add_argument("--points", default=None, metavar="FILE")
    s.add_argument("--csv-out", default=None)
    s.set_defaults(func=cmd_discrepancy)

    return p


def _apply_config(argv: list) -> list:
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        return argv
    path = argv[idx + 1]
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            if not _:
                raise ValueError("%s: expected key=value, got %r" % (path, line))
            pairs.extend(["--" + key.strip(), value.strip()])
    # insert right after the subcommand so later explicit flags override
    for i, tok in enumerate(argv):
        if not tok.startswith("-"):
            return argv[: i + 1] + pairs + argv[i + 1 :]
    return argv + pairs


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config(argv)
    except (OSError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        if args.precision < 64:
            raise ValueError("--precision must be at least 64 bits")
        return args.func(args) or 0
    except ComputationError as exc:
        diag = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, SearchExhausted):
            diag["search_cap"] = exc.search_cap
            diag["reason"] = exc.reason
            if exc.partial:
                diag["partial"] = _jsonable(exc.partial)
        elif isinstance(exc, NoConvergence):
            diag["max_iter"] = exc.max_iter
            diag["best_residual"] = exc.best_residual
        elif isinstance(exc, SingularJacobian):
            diag["pivot"] = exc.pivot
            diag["column"] = exc.column
        print(json.dumps(_jsonable(diag), sort_keys=True, separators=(",", ":")), file=sys.stderr)
        return 2
    except (CantorError, ValueError, OSError, KeyError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
