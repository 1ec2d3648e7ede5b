import csv

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from contraction_lab import (
    ContractionChain,
    InvariantError,
    Operator,
    PreconditionError,
    check_projection_convergence,
    conjugated_diagonal_chain,
    consecutive_difference_report,
    const,
    diagonal,
    diagonal_chain,
    fixed_point_projection,
    geometric,
    harmonic_to,
    iterate_products,
    limit_operator,
    orbit_epsilon_net,
    random_schur_chain,
    trace_summary,
    write_trace_csv,
)
from contraction_lab.products import TRACE_CSV_HEADER, default_probes


def telescoping_chain(horizon=50):
    return diagonal_chain([const(1.0), harmonic_to(0.5)], horizon=horizon)


def drift_chain(horizon=40):
    # increasing second coordinate: still contractions, but no analytic
    # limit and a Cauchy gap far too large to trust
    def factory(n):
        return Operator(np.diag([1.0, 0.5 + 0.005 * n]))

    return ContractionChain(2, "drift", horizon, factory)


# ---------------------------------------------------------------------------
# Telescoping oracle: T_n = diag(1, (n+1)/(2n)) gives S_n e2 = (n+1)/2^n e2


def test_telescoping_product_closed_form():
    horizon = 50
    trace = iterate_products(
        telescoping_chain(horizon),
        probes=np.eye(2),
        probe_ids=["e1", "e2"],
    )
    for n in range(1, horizon + 1):
        expected = (n + 1) / 2.0**n
        assert trace.sot_err[n - 1, 1] == pytest.approx(expected, rel=1e-12)
        assert trace.opnorm_err[n - 1] == pytest.approx(expected, rel=1e-12)
        assert trace.b[n - 1, 1] == pytest.approx(expected**2, rel=1e-12)
        assert trace.sot_err[n - 1, 0] == 0.0  # e1 is fixed exactly
    for n in range(1, horizon):
        expected_a = ((n + 1) / 2.0**n) * ((n + 2) / 2.0 ** (n + 1))
        assert trace.a[n - 1, 1] == pytest.approx(expected_a, rel=1e-12)
    # diagonal real products: adjoint orbit coincides with the forward one
    assert np.array_equal(trace.adj_err, trace.sot_err)
    assert trace.limit.provenance == "analytic"
    assert trace.limit.trustworthy


def test_identity_chain_trace_is_exactly_zero():
    chain = diagonal_chain([const(1.0), const(1.0)], horizon=10)
    trace = iterate_products(chain, probes=np.eye(2), probe_ids=["e1", "e2"])
    assert np.all(trace.sot_err == 0.0)
    assert np.all(trace.adj_err == 0.0)
    assert np.all(trace.opnorm_err == 0.0)
    assert np.all(trace.product_norm == 1.0)
    summary = trace_summary(trace)
    assert summary["status"] == "pass"
    assert summary["final"]["sot_err_max"] == 0.0


# ---------------------------------------------------------------------------
# Preconditions and invariants


def test_iterate_products_preconditions():
    chain = telescoping_chain(10)
    with pytest.raises(PreconditionError, match="exceeds chain horizon"):
        iterate_products(chain, horizon=11)
    with pytest.raises(PreconditionError, match="horizon"):
        iterate_products(chain, horizon=0)
    with pytest.raises(PreconditionError, match="dimension"):
        iterate_products(chain, probes=np.eye(3))
    with pytest.raises(PreconditionError, match="zero probe"):
        iterate_products(chain, probes=np.zeros((2, 1)))
    with pytest.raises(PreconditionError, match="probe_ids"):
        iterate_products(chain, probes=np.eye(2), probe_ids=["only_one"])


def test_iterate_products_rejects_expanding_factory():
    def factory(n):
        return Operator(np.diag([1.1, 0.5]))

    chain = ContractionChain(
        2, "broken", 3, factory, analytic_limit=diagonal([1.0, 0.5])
    )
    with pytest.raises(InvariantError, match="norm"):
        iterate_products(chain, probes=np.eye(2))


# ---------------------------------------------------------------------------
# Limit provenance


def test_limit_operator_analytic_and_empirical():
    analytic = limit_operator(telescoping_chain(20))
    assert analytic.provenance == "analytic"
    assert analytic.trustworthy

    schur = limit_operator(random_schur_chain(4, seed=2, horizon=60))
    assert schur.provenance == "empirical"
    assert schur.cauchy_gap is not None and schur.cauchy_gap < 1e-8
    assert schur.trustworthy

    drifting = limit_operator(drift_chain())
    assert drifting.provenance == "empirical"
    assert not drifting.trustworthy


def test_untrusted_limit_yields_inconclusive_summary():
    trace = iterate_products(drift_chain(), probes=np.eye(2))
    summary = trace_summary(trace)
    assert summary["verdicts"]["sot_converged"] == "inconclusive"
    assert summary["status"] == "inconclusive"


def test_tiny_threshold_fails_summary():
    trace = iterate_products(telescoping_chain(30), probes=np.eye(2))
    summary = trace_summary(trace, threshold=1e-30)
    assert summary["verdicts"]["sot_converged"] is False
    assert summary["status"] == "fail"


# ---------------------------------------------------------------------------
# Probes


def test_default_probes_cover_both_sides():
    proj = fixed_point_projection(diagonal([1.0, 0.3, 0.2]))
    ids, mat = default_probes(3, proj, seed=0)
    assert ids[:3] == ["e1", "e2", "e3"]
    assert ids[3:] == ["rand1", "rand2", "rand3", "in_P", "perp_P"]
    assert np.allclose(np.linalg.norm(mat, axis=0), 1.0, atol=1e-12)
    in_p = mat[:, ids.index("in_P")]
    perp = mat[:, ids.index("perp_P")]
    assert np.allclose(proj.matrix @ in_p, in_p, atol=1e-12)
    assert np.allclose(proj.matrix @ perp, 0.0, atol=1e-12)


def test_default_probes_skip_empty_sides():
    rank0 = fixed_point_projection(diagonal([0.3, 0.2]))
    ids, _ = default_probes(2, rank0, seed=0)
    assert "in_P" not in ids and "perp_P" in ids
    full = fixed_point_projection(diagonal([1.0, 1.0]))
    ids, _ = default_probes(2, full, seed=0)
    assert "in_P" in ids and "perp_P" not in ids


# ---------------------------------------------------------------------------
# Scalar interleaving


def test_ab_chain_report_on_conjugated_chain():
    chain = conjugated_diagonal_chain(
        [const(1.0), harmonic_to(0.2), geometric(0.85)],
        horizon=80,
        seed=6,
    )
    trace = iterate_products(chain)
    report = consecutive_difference_report(trace)
    assert report.all_ok
    assert report.worst_a_negative <= report.tol_chain
    assert report.worst_identity_error <= report.tol_identity


def test_wot_bounded_by_sot():
    # |<partner, (S_n - P) xi>| <= ||(S_n - P) xi|| for unit partners
    chain = conjugated_diagonal_chain(
        [const(1.0), harmonic_to(0.2), geometric(0.85)],
        horizon=60,
        seed=9,
    )
    trace = iterate_products(chain)
    assert np.all(trace.wot_err <= trace.sot_err + 1e-12)


# ---------------------------------------------------------------------------
# Projection staircase


def test_projection_convergence_staircase():
    chain = telescoping_chain(10)
    ptrace = check_projection_convergence(chain)
    assert list(ptrace.ranks) == [2] + [1] * 9
    assert ptrace.limit_rank == 1
    assert ptrace.ranks_nonincreasing
    assert ptrace.final_rank_dominates
    e2 = ptrace.probe_ids.index("e2")
    assert ptrace.probe_errors[0, e2] == pytest.approx(1.0)
    assert ptrace.probe_errors[-1, e2] == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(PreconditionError):
        check_projection_convergence(chain, horizon=11)


# ---------------------------------------------------------------------------
# Greedy epsilon nets


def test_orbit_epsilon_net_oracle():
    points = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 0.0]])
    net = orbit_epsilon_net(points, 0.6)
    assert net.member_indices == (0, 1)
    assert net.size == 2
    assert net.epsilon == 0.6


def test_orbit_epsilon_net_rejects_bad_input():
    with pytest.raises(PreconditionError, match="epsilon"):
        orbit_epsilon_net(np.eye(2), 0.0)
    with pytest.raises(PreconditionError, match="points"):
        orbit_epsilon_net(np.zeros(3), 0.5)


@given(
    seed=st.integers(min_value=0, max_value=2_000),
    count=st.integers(min_value=1, max_value=40),
    epsilon=st.floats(min_value=0.05, max_value=2.0),
)
def test_orbit_epsilon_net_properties(seed, count, epsilon):
    rng = np.random.default_rng(seed)
    points = rng.standard_normal((count, 3))
    net = orbit_epsilon_net(points, epsilon)
    members = points[list(net.member_indices)]
    # pairwise separation
    for i in range(net.size):
        for j in range(i + 1, net.size):
            assert np.linalg.norm(members[i] - members[j]) > epsilon
    # coverage
    dists = np.linalg.norm(points[:, None, :] - members[None, :, :], axis=2)
    assert np.all(dists.min(axis=1) <= epsilon)


# ---------------------------------------------------------------------------
# CSV export


def test_write_trace_csv_layout(tmp_path):
    horizon = 12
    trace = iterate_products(
        telescoping_chain(horizon), probes=np.eye(2), probe_ids=["e1", "e2"]
    )
    path = tmp_path / "trace.csv"
    write_trace_csv(trace, path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == list(TRACE_CSV_HEADER)
    assert len(rows) == 1 + horizon * 2
    final_rows = [r for r in rows[1:] if r[0] == str(horizon)]
    assert len(final_rows) == 2
    for row in final_rows:
        assert row[4] == "" and row[5] == ""  # consec_diff, a_n undefined
    # full-precision floats survive the round trip
    n3_e2 = next(r for r in rows[1:] if r[0] == "3" and r[1] == "e2")
    assert float(n3_e2[2]) == trace.sot_err[2, 1]
    assert float(n3_e2[6]) == trace.b[2, 1]
