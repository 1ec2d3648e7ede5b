"""Command-line driver: simulate | gap | nonexample | verify.

Exit codes are a stable contract:

    0   all verdicts pass
    1   a verdict failed
    2   inconclusive (empirical limit not trusted)
    3   no gap certificate at this grid resolution
    64  usage error

All outputs are byte-stable for a fixed (config, seed): floats print
with 17 significant digits, JSON keys are sorted, and nothing
timestamp- or path-dependent is written.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .chains import ContractionChain, build_chain, parse_chain_spec
from .config import DEFAULT, DELTA_GRID, SEED_ENV_VAR
from .corpus import (
    CORPUS_DIMS,
    CORPUS_SEED_COUNT,
    corpus_chains,
    descent_triple_corpus,
    equivalence_corpus,
    monotone_pair_corpus,
)
from .errors import ChainSpecError, ContractionLabError, InvariantError
from .gaps import (
    GapCertificate,
    certificate_search,
    rank_strict_descent_check,
    rate_bound_check,
    write_rate_csv,
)
from .nonexample import (
    build_nonexample,
    givens_factorization,
    givens_to_json,
    sequence_to_json,
    verify_not_totally_bounded,
    verify_step_distances,
    verify_vanishing_conditions,
    write_net_csv,
)
from .operators import (
    check_fixed_vector_equivalence,
    check_projection_monotone,
    diagonal,
    loewner_leq,
)
from .products import (
    check_projection_convergence,
    consecutive_difference_report,
    iterate_products,
    trace_summary,
    write_trace_csv,
)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INCONCLUSIVE = 2
EXIT_NO_CERTIFICATE = 3
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; the contract says 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _env_seed() -> int | None:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ChainSpecError([f"{SEED_ENV_VAR} must be an integer, got {raw!r}"])


def _json_dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_chain(args, parser: argparse.ArgumentParser) -> ContractionChain:
    try:
        document = Path(args.spec).read_text()
    except OSError as exc:
        parser.error(f"cannot read spec file: {exc}")
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as exc:
        parser.error(f"spec is not valid JSON: {exc}")
    seed = args.seed if args.seed is not None else _env_seed()
    if isinstance(raw, dict) and "seed" not in raw and seed is not None:
        raw["seed"] = seed
    try:
        spec = parse_chain_spec(raw)
        return build_chain(spec)
    except ChainSpecError as exc:
        parser.error("; ".join(exc.violations))


def _run_horizon(args, chain: ContractionChain, parser) -> int:
    if args.horizon is None:
        return chain.horizon
    if not 1 <= args.horizon <= chain.horizon:
        parser.error(
            f"--horizon {args.horizon} outside the chain's materialized "
            f"range 1..{chain.horizon}"
        )
    return args.horizon


def _status_exit(status: str) -> int:
    return {
        "pass": EXIT_PASS,
        "inconclusive": EXIT_INCONCLUSIVE,
        "fail": EXIT_FAIL,
    }[status]


def cmd_simulate(args, parser) -> int:
    chain = _load_chain(args, parser)
    horizon = _run_horizon(args, chain, parser)
    tol_eig = args.tol_eig if args.tol_eig is not None else DEFAULT.eig
    trace = iterate_products(
        chain, horizon=horizon, tol_eig=tol_eig, tol_psd=args.tol_psd
    )
    proj_trace = check_projection_convergence(
        chain, horizon, tol_eig=tol_eig, tol_psd=args.tol_psd
    )
    ab = consecutive_difference_report(trace)
    summary = trace_summary(trace, projection_trace=proj_trace, ab_report=ab)
    out = _out_dir(args)
    write_trace_csv(trace, out / "trace.csv")
    _json_dump(summary, out / "summary.json")
    return _status_exit(summary["status"])


def cmd_gap(args, parser) -> int:
    chain = _load_chain(args, parser)
    horizon = _run_horizon(args, chain, parser)
    tol_eig = args.tol_eig if args.tol_eig is not None else DEFAULT.eig
    if args.grid is None:
        grid = DELTA_GRID
    else:
        try:
            grid = tuple(float(x) for x in args.grid.split(","))
        except ValueError:
            parser.error(f"--grid must be a comma list of floats: {args.grid!r}")
    try:
        result = certificate_search(
            chain, horizon, grid, tol_eig=tol_eig, tol_psd=args.tol_psd
        )
    except ContractionLabError as exc:
        if isinstance(exc, InvariantError):
            print(f"invariant violated during search: {exc}", file=sys.stderr)
            return EXIT_FAIL
        parser.error(str(exc))
    out = _out_dir(args)
    if isinstance(result, GapCertificate):
        _json_dump(result.to_json_dict(), out / "certificate.json")
        report = rate_bound_check(
            chain,
            result,
            _perp_probe(chain, tol_eig, args.tol_psd),
            epsilon=args.epsilon,
            tol_eig=tol_eig,
            tol_psd=args.tol_psd,
        )
        write_rate_csv(report, out / "rate_table.csv")
        return EXIT_PASS if report.bound_holds else EXIT_FAIL
    _json_dump(result.to_json_dict(), out / "failure.json")
    return EXIT_NO_CERTIFICATE


def _perp_probe(chain, tol_eig, tol_psd) -> np.ndarray:
    """Seeded unit probe pushed off the limit fixed space when
    possible."""
    from .chains import stream_rng
    from .operators import fixed_point_projection
    from .products import limit_operator

    info = limit_operator(chain)
    proj = fixed_point_projection(
        info.operator, tol_eig=tol_eig, tol_psd=tol_psd
    )
    rng = stream_rng(chain.seed if chain.seed is not None else 0, 17)
    draw = rng.standard_normal(chain.dim)
    if proj.rank < chain.dim:
        draw = draw - proj.matrix @ draw
    norm = np.linalg.norm(draw)
    return draw / norm if norm > 0 else np.eye(chain.dim)[:, 0]


def cmd_nonexample(args, parser) -> int:
    if args.nmax < 2:
        parser.error(f"--nmax must be >= 2, got {args.nmax}")
    if args.epsilon <= 0.0:
        parser.error(f"--epsilon must be positive, got {args.epsilon}")
    seq = build_nonexample(args.nmax)
    distances = verify_step_distances(seq)
    vanishing = verify_vanishing_conditions(seq, k_max=3)
    net = verify_not_totally_bounded(seq, args.epsilon)
    steps = givens_factorization(seq)

    recon_err = 0.0
    rank_ok = True
    carried = seq.vector(1).copy()
    for step in steps:
        carried = step.matrix @ carried
        recon_err = max(
            recon_err,
            float(np.linalg.norm(carried - seq.vector(step.m + 1))),
        )
        singular = np.linalg.svd(
            step.matrix - np.eye(seq.ambient_dim), compute_uv=False
        )
        rank = int((singular > 1e-9).sum())
        if rank != (0 if step.identity else 2):
            rank_ok = False

    verdicts = {
        "within_row_distances": distances.within_row_ok,
        "vanishing_conditions": vanishing.all_ok,
        "givens_reconstruction": recon_err <= 1e-9,
        "givens_rank": rank_ok,
        "net_dominates_rows": net.dominates_row_count,
    }
    summary = {
        "n_max": seq.n_max,
        "count": seq.count,
        "ambient_dim": seq.ambient_dim,
        "epsilon": args.epsilon,
        "max_within_deviation": distances.max_within_deviation,
        "max_cross_deviation": distances.max_cross_deviation,
        "cross_row_matches_formula": distances.cross_row_ok,
        "reconstruction_error": recon_err,
        "net_sizes": list(net.sizes),
        "verdicts": verdicts,
        "status": "pass" if all(verdicts.values()) else "fail",
    }

    out = _out_dir(args)
    _json_dump(sequence_to_json(seq), out / "sequence.json")
    _json_dump(givens_to_json(steps), out / "givens.json")
    write_net_csv(net, out / "net_growth.csv")
    with open(out / "step_distances.csv", "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(("m", "row", "kind", "measured", "expected", "deviation"))
        for s in distances.steps:
            writer.writerow(
                [
                    s.m,
                    s.row,
                    s.kind,
                    format(s.measured, ".17g"),
                    format(s.expected, ".17g"),
                    format(s.deviation, ".17g"),
                ]
            )
    _json_dump(summary, out / "summary.json")
    return EXIT_PASS if summary["status"] == "pass" else EXIT_FAIL


def _faulty_chain() -> ContractionChain:
    """Deliberately broken fixture: eigenvalues increase with n, so the
    chain is not decreasing even though each step is a contraction."""
    return ContractionChain(
        dim=2,
        kind="faulty_increasing",
        horizon=40,
        factory=lambda n: diagonal([1.0, 0.5 + 0.005 * n]),
        analytic_limit=None,
        seed=0,
    )


def cmd_verify(args, parser) -> int:
    if args.seeds < 1:
        parser.error(f"--seeds must be >= 1, got {args.seeds}")
    if args.dims is None:
        dims = CORPUS_DIMS
    else:
        try:
            dims = tuple(int(x) for x in args.dims.split(","))
        except ValueError:
            parser.error(f"--dims must be a comma list of integers: {args.dims!r}")
        if not dims or any(d < 2 for d in dims):
            parser.error("--dims values must all be >= 2")
    tol_eig = args.tol_eig if args.tol_eig is not None else DEFAULT.eig

    chains = corpus_chains(dims, args.seeds)
    if args.include_faulty_fixture:
        chains.append(_faulty_chain())

    properties: dict[str, dict] = {}

    def record(name: str, ok: int, bad: int, inconclusive: int = 0):
        properties[name] = {
            "pass": ok,
            "fail": bad,
            "inconclusive": inconclusive,
            "total": ok + bad + inconclusive,
        }

    ordering_ok = ordering_bad = 0
    ab_ok = ab_bad = 0
    adj_ok = adj_bad = adj_inc = 0
    opnorm_ok = opnorm_bad = opnorm_inc = 0
    for chain in chains:
        stride = max(1, chain.horizon // 50)
        ordered = True
        for n in range(1, chain.horizon, stride):
            step = min(n + stride, chain.horizon)
            if not loewner_leq(
                chain.operator_at(step),
                chain.operator_at(n),
                tol_psd=args.tol_psd,
            ):
                ordered = False
                break
        ordering_ok += ordered
        ordering_bad += not ordered

        trace = iterate_products(
            chain, tol_eig=tol_eig, tol_psd=args.tol_psd
        )
        report = consecutive_difference_report(trace)
        ab_ok += report.all_ok
        ab_bad += not report.all_ok

        if not trace.limit.trustworthy:
            adj_inc += 1
            opnorm_inc += 1
        else:
            adj_pass = float(trace.adj_err[-1].max()) < DEFAULT.convergence
            opn_pass = float(trace.opnorm_err[-1]) < DEFAULT.convergence
            adj_ok += adj_pass
            adj_bad += not adj_pass
            opnorm_ok += opn_pass
            opnorm_bad += not opn_pass
    record("chain_ordering", ordering_ok, ordering_bad)
    record("ab_interleaving", ab_ok, ab_bad)
    record("adjoint_convergence", adj_ok, adj_bad, adj_inc)
    record("operator_norm_convergence", opnorm_ok, opnorm_bad, opnorm_inc)

    eq_ok = eq_bad = eq_amb = 0
    for op, xi in equivalence_corpus(200 * args.seeds):
        report = check_fixed_vector_equivalence(op, xi, tol_psd=args.tol_psd)
        if report.ambiguous:
            eq_amb += 1
        elif report.agree:
            eq_ok += 1
        else:
            eq_bad += 1
    record("fixed_vector_equivalence", eq_ok, eq_bad, eq_amb)

    mono_ok = mono_bad = 0
    for upper, lower in monotone_pair_corpus(100 * args.seeds):
        good = check_projection_monotone(
            lower, upper, tol_eig=tol_eig, tol_psd=args.tol_psd
        )
        mono_ok += good
        mono_bad += not good
    record("projection_monotonicity", mono_ok, mono_bad)

    desc_ok = desc_bad = 0
    for upper, lower, delta in descent_triple_corpus(12 * args.seeds):
        good = rank_strict_descent_check(
            upper, lower, delta, tol_eig=tol_eig, tol_psd=args.tol_psd
        )
        desc_ok += good
        desc_bad += not good
    record("rank_strict_descent", desc_ok, desc_bad)

    failed = any(p["fail"] > 0 for p in properties.values())
    inconclusive = any(p["inconclusive"] > 0 for p in properties.values())
    status = "fail" if failed else ("inconclusive" if inconclusive else "pass")
    verdicts = {
        "corpus": {
            "dims": list(dims),
            "seeds": args.seeds,
            "chains": len(chains),
            "faulty_fixture": bool(args.include_faulty_fixture),
        },
        "properties": properties,
        "status": status,
    }
    _json_dump(verdicts, _out_dir(args) / "verdicts.json")
    return _status_exit(status)


def build_parser() -> _Parser:
    parser = _Parser(
        prog="contraction-lab",
        description=(
            "Numerical laboratory for products of decreasing positive "
            "contractions."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument(
            "--seed",
            type=int,
            default=None,
            help=f"seed (default: ${SEED_ENV_VAR} if set)",
        )
        p.add_argument(
            "--tol-eig",
            type=float,
            default=None,
            help=f"eigenvalue clustering tolerance (default {DEFAULT.eig})",
        )
        p.add_argument(
            "--tol-psd",
            type=float,
            default=None,
            help="PSD slack tolerance (default 1e-10 per dimension)",
        )

    sim = sub.add_parser("simulate", help="run the product engine on a chain")
    sim.add_argument("--spec", required=True, help="chain spec JSON path")
    sim.add_argument("--horizon", type=int, default=None)
    common(sim)

    gap = sub.add_parser("gap", help="search for a spectral gap certificate")
    gap.add_argument("--spec", required=True, help="chain spec JSON path")
    gap.add_argument("--horizon", type=int, default=None)
    gap.add_argument(
        "--grid", default=None, help="descending comma list of candidate deltas"
    )
    gap.add_argument(
        "--epsilon", type=float, default=1e-8, help="rate bound epsilon"
    )
    common(gap)

    non = sub.add_parser("nonexample", help="build and verify the unitary orbit")
    non.add_argument("--nmax", type=int, default=10, help="number of rows")
    non.add_argument(
        "--epsilon", type=float, default=0.5, help="greedy net epsilon"
    )
    common(non)

    ver = sub.add_parser("verify", help="run the property suite on the corpus")
    ver.add_argument("--seeds", type=int, default=CORPUS_SEED_COUNT)
    ver.add_argument(
        "--dims", default=None, help="comma list of dimensions (default 2,4,8,16)"
    )
    ver.add_argument(
        "--include-faulty-fixture",
        action="store_true",
        help="inject a deliberately non-decreasing chain (negative test)",
    )
    common(ver)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            code = cmd_simulate(args, parser)
        elif args.command == "gap":
            code = cmd_gap(args, parser)
        elif args.command == "nonexample":
            code = cmd_nonexample(args, parser)
        else:
            code = cmd_verify(args, parser)
    except ChainSpecError as exc:
        parser.error("; ".join(exc.violations))
    except InvariantError as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_FAIL
    sys.exit(code)


if __name__ == "__main__":
    main()
