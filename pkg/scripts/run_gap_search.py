#!/usr/bin/env python3
"""Certificate search experiment: engineered gap vs near-1 stress chain.

The engineered chain should certify at its designed delta in one stage;
the stress chain should ratchet down the whole grid, shedding one unit
of fixed-space rank per stage, and exhaust it.
"""

import argparse

from contraction_lab import (
    GapCertificate,
    certificate_search,
    gap_engineered_chain,
    near_one_accumulating_chain,
    rate_bound_check,
)
from contraction_lab.chains import stream_rng


def describe(result) -> None:
    if isinstance(result, GapCertificate):
        print(f"certificate: delta={result.delta}, N={result.N}, "
              f"scope={result.scope}")
    else:
        print(f"no certificate (grid {result.grid} exhausted, "
              f"{len(result.violations)} violations)")
    for step in result.rank_trajectory:
        print(f"  n={step.n:>4}  rank={step.rank}  delta_k={step.delta_k}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dim", type=int, default=8)
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--horizon", type=int, default=210)
    args = ap.parse_args()

    print("== gap-engineered chain ==")
    chain = gap_engineered_chain(
        args.dim, args.delta, fixed_rank=2, seed=args.seed,
        horizon=args.horizon,
    )
    result = certificate_search(chain)
    describe(result)
    if isinstance(result, GapCertificate):
        probe = stream_rng(args.seed, 91).standard_normal(args.dim)
        rep = rate_bound_check(chain, result, probe, j_max=args.horizon - 10)
        print(f"rate bound: worst slack {rep.worst_slack:.3e}, "
              f"holds={rep.bound_holds}, fitted slope {rep.fitted_slope}")

    print("\n== near-1 accumulating chain ==")
    stress = near_one_accumulating_chain(
        args.dim, seed=args.seed, horizon=max(args.horizon, 400)
    )
    describe(certificate_search(stress))


if __name__ == "__main__":
    main()
