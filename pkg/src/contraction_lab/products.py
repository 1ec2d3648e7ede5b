"""Ordered products of chain operators and their convergence diagnostics.

The central object is ``S_n = T_n T_{n-1} ... T_1`` (left multiplication,
``S_0 = I``).  For a decreasing chain of positive contractions ``S_n``
converges to the projection onto the limit operator's fixed space; the
trace produced here records how fast, in several topologies at once, and
carries the scalar sequences

    b_n = <S_n xi, S_n xi>,   a_n = <S_{n+1} xi, S_n xi>,

whose interleaving ``0 <= a_n <= b_n`` and ``b_{n+1} <= a_n`` is what the
convergence argument rests on.  The identity

    ||S_{n+1} xi - S_n xi||^2 = b_{n+1} + b_n - 2 Re a_n

is checked against the directly measured step difference.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .chains import ContractionChain, stream_rng
from .config import DEFAULT
from .errors import InvariantError, PreconditionError
from .operators import (
    Operator,
    Projection,
    fixed_point_projection,
)

__all__ = [
    "LimitInfo",
    "ProductState",
    "ConvergenceTrace",
    "ABChainReport",
    "ProjectionTrace",
    "EpsilonNet",
    "limit_operator",
    "default_probes",
    "iterate_products",
    "consecutive_difference_report",
    "check_projection_convergence",
    "orbit_epsilon_net",
    "write_trace_csv",
    "trace_summary",
]

_STREAM_PROBES = 11

TRACE_CSV_HEADER = (
    "n",
    "probe_id",
    "sot_err",
    "adj_err",
    "consec_diff",
    "a_n",
    "b_n",
    "wot_err",
    "opnorm_err",
)


@dataclass(frozen=True)
class LimitInfo:
    """The chain limit together with how much to trust it.

    ``provenance`` is ``"analytic"`` when the generator knows its limit in
    closed form; otherwise the limit is the last materialized operator and
    ``cauchy_gap`` records ``||T_horizon - T_{horizon/2}||`` as a sanity
    measure.  Empirical limits with a large gap should downgrade verdicts
    to inconclusive rather than failing them.
    """

    operator: Operator
    provenance: str
    cauchy_gap: float | None

    @property
    def trustworthy(self) -> bool:
        if self.provenance == "analytic":
            return True
        return self.cauchy_gap is not None and (
            self.cauchy_gap < DEFAULT.cauchy_gap_max
        )


def limit_operator(chain: ContractionChain, horizon: int | None = None) -> LimitInfo:
    """Analytic limit when the generator provides one, else empirical."""
    if chain.analytic_limit is not None:
        return LimitInfo(chain.analytic_limit, "analytic", None)
    h = chain.horizon if horizon is None else horizon
    if not 1 <= h <= chain.horizon:
        raise PreconditionError(
            f"horizon {h} outside materialized range 1..{chain.horizon}"
        )
    last = chain.operator_at(h)
    mid = chain.operator_at(max(1, h // 2))
    gap = float(np.linalg.norm(last.entries - mid.entries, 2))
    return LimitInfo(last, "empirical", gap)


@dataclass(frozen=True, eq=False)
class ProductState:
    """One step of the running product."""

    n: int
    product: np.ndarray

    @property
    def adjoint(self) -> np.ndarray:
        return self.product.conj().T


def default_probes(
    dim: int, projection: Projection, seed: int
) -> tuple[list[str], np.ndarray]:
    """Standard basis + 3 seeded unit vectors + one vector on each side
    of the limit projection (when the ranks allow)."""
    rng = stream_rng(seed, _STREAM_PROBES)
    columns = [np.eye(dim)[:, k] for k in range(dim)]
    ids = [f"e{k + 1}" for k in range(dim)]
    for k in range(3):
        v = rng.standard_normal(dim)
        columns.append(v / np.linalg.norm(v))
        ids.append(f"rand{k + 1}")
    draw = rng.standard_normal(dim)
    if projection.rank > 0:
        v = projection.matrix @ draw
        norm = np.linalg.norm(v)
        if norm > 1e-12:
            columns.append(v / norm)
            ids.append("in_P")
    if projection.rank < dim:
        v = draw - projection.matrix @ draw
        norm = np.linalg.norm(v)
        if norm > 1e-12:
            columns.append(v / norm)
            ids.append("perp_P")
    matrix = np.stack(columns, axis=1)
    if np.iscomplexobj(projection.matrix):
        matrix = matrix.astype(np.complex128)
    return ids, matrix


@dataclass(frozen=True, eq=False)
class ConvergenceTrace:
    """Per-step, per-probe convergence record of a product run.

    Arrays are indexed ``[n - 1, probe]`` for ``n = 1..horizon``; the
    ``a`` and ``consec_diff`` arrays stop at ``horizon - 1`` because they
    look one step ahead.
    """

    chain_kind: str
    dim: int
    horizon: int
    probe_ids: tuple[str, ...]
    probes: np.ndarray
    sot_err: np.ndarray
    adj_err: np.ndarray
    wot_err: np.ndarray
    b: np.ndarray
    a: np.ndarray
    consec_diff: np.ndarray
    opnorm_err: np.ndarray
    product_norm: np.ndarray
    limit: LimitInfo
    projection: Projection

    @property
    def probe_count(self) -> int:
        return len(self.probe_ids)


def iterate_products(
    chain: ContractionChain,
    probes: np.ndarray | None = None,
    horizon: int | None = None,
    *,
    probe_ids: list[str] | None = None,
    tol_eig: float = DEFAULT.eig,
    tol_psd: float | None = None,
    seed: int | None = None,
) -> ConvergenceTrace:
    """Run the product ``S_n = T_n S_{n-1}`` and record the trace.

    Probes default to :func:`default_probes`.  Structural facts that hold
    by theorem (``||S_n|| <= 1``, ``b`` nonincreasing, finiteness) are
    enforced here and raise :class:`InvariantError`; convergence
    quality is recorded, not judged.
    """
    h = chain.horizon if horizon is None else horizon
    if h > chain.horizon:
        raise PreconditionError(
            f"requested horizon {h} exceeds chain horizon {chain.horizon}"
        )
    if h < 1:
        raise PreconditionError(f"horizon must be >= 1, got {h}")
    dim = chain.dim
    tol = DEFAULT.psd(dim) if tol_psd is None else tol_psd

    info = limit_operator(chain)
    proj = fixed_point_projection(info.operator, tol_eig=tol_eig, tol_psd=tol)

    if probes is None:
        effective_seed = seed if seed is not None else chain.seed
        ids, mat = default_probes(
            dim, proj, 0 if effective_seed is None else effective_seed
        )
    else:
        mat = np.asarray(probes)
        if mat.ndim == 1:
            mat = mat[:, None]
        if mat.shape[0] != dim:
            raise PreconditionError(
                f"probes live in dimension {mat.shape[0]}, chain in {dim}"
            )
        norms = np.linalg.norm(mat, axis=0)
        if np.any(norms == 0.0):
            raise PreconditionError("zero probe vector")
        ids = probe_ids or [f"p{k}" for k in range(mat.shape[1])]
        if len(ids) != mat.shape[1]:
            raise PreconditionError("probe_ids length does not match probes")

    count = mat.shape[1]
    p_mat = proj.matrix
    p_probes = p_mat @ mat
    # each probe's weak-convergence partner is the next probe, cyclically
    partners = np.roll(mat, -1, axis=1)

    sot = np.empty((h, count))
    adj = np.empty((h, count))
    wot = np.empty((h, count))
    b = np.empty((h, count))
    a = np.empty((max(h - 1, 0), count))
    consec = np.empty((max(h - 1, 0), count))
    opnorm = np.empty(h)
    snorm = np.empty(h)

    product = np.eye(dim, dtype=p_mat.dtype)
    prev_applied = None
    for n in range(1, h + 1):
        product = chain.operator_at(n).entries @ product
        applied = product @ mat
        deviation = applied - p_probes
        sot[n - 1] = np.linalg.norm(deviation, axis=0)
        adj[n - 1] = np.linalg.norm(product.conj().T @ mat - p_probes, axis=0)
        wot[n - 1] = np.abs(np.sum(partners.conj() * deviation, axis=0))
        b[n - 1] = np.real(np.sum(applied.conj() * applied, axis=0))
        if prev_applied is not None:
            a[n - 2] = np.real(np.sum(applied.conj() * prev_applied, axis=0))
            consec[n - 2] = np.linalg.norm(applied - prev_applied, axis=0)
        opnorm[n - 1] = np.linalg.norm(product - p_mat, 2)
        snorm[n - 1] = np.linalg.norm(product, 2)
        prev_applied = applied

    for name, arr in (
        ("sot_err", sot), ("adj_err", adj), ("wot_err", wot),
        ("b", b), ("a", a), ("consec_diff", consec),
        ("opnorm_err", opnorm), ("product_norm", snorm),
    ):
        if not np.all(np.isfinite(arr)):
            raise InvariantError(f"non-finite values in trace field {name}")
    if np.any(snorm > 1.0 + tol):
        raise InvariantError(
            f"product norm exceeded 1: max {float(snorm.max())}"
        )
    if h > 1:
        probe_norms = np.linalg.norm(mat, axis=0)
        growth = np.diff(b, axis=0) / np.maximum(probe_norms**2, 1.0)
        if np.any(growth > DEFAULT.chain(dim)):
            raise InvariantError("b_n increased along the product")

    return ConvergenceTrace(
        chain_kind=chain.kind,
        dim=dim,
        horizon=h,
        probe_ids=tuple(ids),
        probes=mat,
        sot_err=sot,
        adj_err=adj,
        wot_err=wot,
        b=b,
        a=a,
        consec_diff=consec,
        opnorm_err=opnorm,
        product_norm=snorm,
        limit=info,
        projection=proj,
    )


@dataclass(frozen=True)
class ABChainReport:
    """Verdicts for the scalar interleaving along a trace.

    ``worst_*`` entries give the largest violation found (negative or
    zero means the inequality held everywhere with room to spare).
    """

    tol_chain: float
    tol_identity: float
    worst_a_negative: float
    worst_a_above_b: float
    worst_b_next_above_a: float
    worst_identity_error: float
    a_nonnegative: bool
    a_below_b: bool
    b_next_below_a: bool
    identity_ok: bool

    @property
    def all_ok(self) -> bool:
        return (
            self.a_nonnegative
            and self.a_below_b
            and self.b_next_below_a
            and self.identity_ok
        )


def consecutive_difference_report(
    trace: ConvergenceTrace,
    *,
    tol_chain: float | None = None,
    tol_identity: float = 1e-10,
) -> ABChainReport:
    """Check ``0 <= a_n <= b_n``, ``b_{n+1} <= a_n`` and the step-difference
    identity on every step and probe of a trace."""
    tol = DEFAULT.chain(trace.dim) if tol_chain is None else tol_chain
    if trace.horizon < 2:
        return ABChainReport(
            tol, tol_identity, 0.0, 0.0, 0.0, 0.0, True, True, True, True
        )
    a = trace.a
    b_now = trace.b[:-1]
    b_next = trace.b[1:]
    worst_neg = float((-a).max())
    worst_ab = float((a - b_now).max())
    worst_ba = float((b_next - a).max())
    identity_err = np.abs(
        trace.consec_diff**2 - (b_next + b_now - 2.0 * a)
    )
    worst_id = float(identity_err.max())
    return ABChainReport(
        tol_chain=tol,
        tol_identity=tol_identity,
        worst_a_negative=worst_neg,
        worst_a_above_b=worst_ab,
        worst_b_next_above_a=worst_ba,
        worst_identity_error=worst_id,
        a_nonnegative=worst_neg <= tol,
        a_below_b=worst_ab <= tol,
        b_next_below_a=worst_ba <= tol,
        identity_ok=worst_id <= tol_identity,
    )


@dataclass(frozen=True, eq=False)
class ProjectionTrace:
    """Per-step fixed-space projections compared against the limit's."""

    ranks: np.ndarray
    probe_errors: np.ndarray
    probe_ids: tuple[str, ...]
    limit_rank: int
    ranks_nonincreasing: bool
    final_rank_dominates: bool


def check_projection_convergence(
    chain: ContractionChain,
    horizon: int | None = None,
    probes: np.ndarray | None = None,
    *,
    probe_ids: list[str] | None = None,
    tol_eig: float = DEFAULT.eig,
    tol_psd: float | None = None,
) -> ProjectionTrace:
    """Track ``||(P_n - P) xi||`` per probe and the rank staircase.

    For a decreasing chain the ranks can only step down and can never end
    below the limit's rank; both facts are reported as verdicts.
    """
    h = chain.horizon if horizon is None else horizon
    if not 1 <= h <= chain.horizon:
        raise PreconditionError(
            f"horizon {h} outside materialized range 1..{chain.horizon}"
        )
    info = limit_operator(chain)
    proj = fixed_point_projection(info.operator, tol_eig=tol_eig, tol_psd=tol_psd)
    if probes is None:
        ids, mat = default_probes(chain.dim, proj, chain.seed or 0)
    else:
        mat = np.asarray(probes)
        if mat.ndim == 1:
            mat = mat[:, None]
        ids = probe_ids or [f"p{k}" for k in range(mat.shape[1])]

    ranks = np.empty(h, dtype=int)
    errors = np.empty((h, mat.shape[1]))
    p_probes = proj.matrix @ mat
    for n in range(1, h + 1):
        step = fixed_point_projection(
            chain.operator_at(n), tol_eig=tol_eig, tol_psd=tol_psd
        )
        ranks[n - 1] = step.rank
        errors[n - 1] = np.linalg.norm(step.matrix @ mat - p_probes, axis=0)
    return ProjectionTrace(
        ranks=ranks,
        probe_errors=errors,
        probe_ids=tuple(ids),
        limit_rank=proj.rank,
        ranks_nonincreasing=bool(np.all(np.diff(ranks) <= 0)),
        final_rank_dominates=bool(ranks[-1] >= proj.rank),
    )


@dataclass(frozen=True, eq=False)
class EpsilonNet:
    """Greedy net: members are pairwise more than ``epsilon`` apart and
    every scanned point is within ``epsilon`` of some member."""

    epsilon: float
    member_indices: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.member_indices)


def orbit_epsilon_net(points: np.ndarray, epsilon: float) -> EpsilonNet:
    """Greedy epsilon-net in scan order.

    A point joins the net iff its distance to every current member
    exceeds ``epsilon``.  A net that keeps growing as more of an orbit is
    scanned is direct evidence against total boundedness.
    """
    if epsilon <= 0.0:
        raise PreconditionError(f"epsilon must be positive, got {epsilon}")
    pts = np.asarray(points)
    if pts.ndim != 2:
        raise PreconditionError("points must be a (count, dim) array")
    members: list[int] = []
    for i in range(pts.shape[0]):
        if all(
            np.linalg.norm(pts[i] - pts[j]) > epsilon for j in members
        ):
            members.append(i)
    return EpsilonNet(epsilon=epsilon, member_indices=tuple(members))


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_trace_csv(trace: ConvergenceTrace, path) -> None:
    """One row per (step, probe); fields that look one step ahead are
    blank on the final step."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(TRACE_CSV_HEADER)
        for n in range(1, trace.horizon + 1):
            for p, probe_id in enumerate(trace.probe_ids):
                ahead = n <= trace.horizon - 1
                writer.writerow(
                    [
                        n,
                        probe_id,
                        _fmt(trace.sot_err[n - 1, p]),
                        _fmt(trace.adj_err[n - 1, p]),
                        _fmt(trace.consec_diff[n - 1, p]) if ahead else "",
                        _fmt(trace.a[n - 1, p]) if ahead else "",
                        _fmt(trace.b[n - 1, p]),
                        _fmt(trace.wot_err[n - 1, p]),
                        _fmt(trace.opnorm_err[n - 1]),
                    ]
                )


def trace_summary(
    trace: ConvergenceTrace,
    *,
    threshold: float = DEFAULT.convergence,
    projection_trace: ProjectionTrace | None = None,
    ab_report: ABChainReport | None = None,
) -> dict:
    """Final values plus verdicts, ready for JSON.

    Convergence verdicts become ``"inconclusive"`` rather than booleans
    when the limit is empirical and its Cauchy gap is too large to trust.
    """
    if ab_report is None:
        ab_report = consecutive_difference_report(trace)
    final = {
        "sot_err_max": float(trace.sot_err[-1].max()),
        "adj_err_max": float(trace.adj_err[-1].max()),
        "wot_err_max": float(trace.wot_err[-1].max()),
        "opnorm_err": float(trace.opnorm_err[-1]),
        "consec_diff_max": (
            float(trace.consec_diff[-1].max()) if trace.horizon > 1 else 0.0
        ),
    }
    conclusive = trace.limit.trustworthy
    def convergence_verdict(value: float):
        if not conclusive:
            return "inconclusive"
        return bool(value < threshold)

    verdicts = {
        "product_norm_bounded": bool(
            trace.product_norm.max() <= 1.0 + DEFAULT.psd(trace.dim)
        ),
        "ab_chain": ab_report.all_ok,
        "consec_identity": ab_report.identity_ok,
        "sot_converged": convergence_verdict(final["sot_err_max"]),
        "adj_converged": convergence_verdict(final["adj_err_max"]),
        "wot_converged": convergence_verdict(final["wot_err_max"]),
        "opnorm_converged": convergence_verdict(final["opnorm_err"]),
    }
    if projection_trace is not None:
        verdicts["ranks_nonincreasing"] = projection_trace.ranks_nonincreasing
        verdicts["final_rank_dominates"] = projection_trace.final_rank_dominates

    failed = any(v is False for v in verdicts.values())
    inconclusive = any(v == "inconclusive" for v in verdicts.values())
    status = "fail" if failed else ("inconclusive" if inconclusive else "pass")

    summary = {
        "chain_kind": trace.chain_kind,
        "dim": trace.dim,
        "horizon": trace.horizon,
        "probe_ids": list(trace.probe_ids),
        "limit": {
            "provenance": trace.limit.provenance,
            "cauchy_gap": trace.limit.cauchy_gap,
        },
        "projection_rank": trace.projection.rank,
        "threshold": threshold,
        "final": final,
        "verdicts": verdicts,
        "status": status,
    }
    if projection_trace is not None:
        summary["rank_trajectory"] = [int(r) for r in projection_trace.ranks]
    return summary
