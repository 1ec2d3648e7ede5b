"""Finite-dimensional Hermitian operators and their spectral calculus.

The objects here are the vocabulary for everything else in the package:
positive contractions ``0 <= T <= I``, their spectral projections, and
the handful of order-theoretic checks the product experiments rely on.

Numerical conventions
---------------------
* Matrices are hermitized on construction: ``(M + M*) / 2``.  This makes
  the Hermitian property exact in floating point, so ``eigh`` semantics
  are unambiguous.
* An eigenvalue ``lambda`` counts as 1 iff ``lambda >= 1 - tol_eig``.
  The same clustering rule drives interval membership in
  :func:`spectral_projection`, so "rank of the fixed space" always means
  the same thing everywhere.
* Real symmetric input stays real (``float64``); anything with an
  imaginary part is handled as ``complex128``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .config import DEFAULT
from .errors import (
    DimensionMismatchError,
    EigensolverError,
    PreconditionError,
)

__all__ = [
    "Operator",
    "SpectralDecomposition",
    "Projection",
    "Interval",
    "Witnessed",
    "FixedVectorReport",
    "identity",
    "diagonal",
    "closed_interval",
    "open_interval",
    "point_interval",
    "spectral_decompose",
    "hermitian_eigenvalues",
    "spectral_projection",
    "fixed_point_projection",
    "is_positive_contraction",
    "loewner_leq",
    "check_fixed_vector_equivalence",
    "check_projection_monotone",
    "operator_to_dict",
    "operator_from_dict",
]


def _coerce_square(matrix) -> np.ndarray:
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] == 0:
        raise ValueError("empty matrices are not supported")
    dtype = np.complex128 if np.iscomplexobj(m) else np.float64
    return m.astype(dtype, copy=True)


@dataclass(frozen=True, eq=False)
class Operator:
    """A Hermitian matrix, hermitized and validated on construction."""

    entries: np.ndarray

    def __post_init__(self):
        m = _coerce_square(self.entries)
        if not np.all(np.isfinite(m)):
            raise ValueError("operator entries must be finite")
        m = (m + m.conj().T) / 2.0
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.entries)

    def apply(self, vector: np.ndarray) -> np.ndarray:
        vec = np.asarray(vector)
        if vec.shape != (self.dim,):
            raise DimensionMismatchError(
                f"vector of shape {vec.shape} does not match dim {self.dim}"
            )
        return self.entries @ vec

    def norm(self) -> float:
        """Operator (spectral) norm."""
        return float(np.linalg.norm(self.entries, 2))


def identity(dim: int) -> Operator:
    return Operator(np.eye(dim))


def diagonal(values: Iterable[float]) -> Operator:
    vals = np.asarray(list(values), dtype=np.float64)
    if vals.ndim != 1 or vals.size == 0:
        raise ValueError("diagonal needs a nonempty 1-d value list")
    return Operator(np.diag(vals))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenvalues in ascending order with matching orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvectors.shape[0]

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


@dataclass(frozen=True, eq=False)
class Projection:
    """An orthogonal projection together with its rank."""

    operator: Operator
    rank: int

    @property
    def dim(self) -> int:
        return self.operator.dim

    @property
    def matrix(self) -> np.ndarray:
        return self.operator.entries

    def complement(self) -> "Projection":
        eye = np.eye(self.dim, dtype=self.matrix.dtype)
        return Projection(Operator(eye - self.matrix), self.dim - self.rank)

    def apply(self, vector: np.ndarray) -> np.ndarray:
        return self.operator.apply(vector)


@dataclass(frozen=True)
class Interval:
    """A real interval with independently open or closed endpoints.

    Membership is tolerance-aware: closed endpoints admit values within
    ``tol`` outside the interval, open endpoints demand clearance by more
    than ``tol``.  This is the clustering rule that makes ``[1, 1]``
    capture eigenvalues within ``tol_eig`` of 1 and makes the open gap
    interval ``(1 - delta, 1)`` exclude the 1-cluster.
    """

    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ValueError("interval endpoints must be finite")
        if self.lo > self.hi:
            raise ValueError(f"empty interval: lo={self.lo} > hi={self.hi}")

    def contains(self, x: float, tol: float) -> bool:
        above = x >= self.lo - tol if self.lo_closed else x > self.lo + tol
        below = x <= self.hi + tol if self.hi_closed else x < self.hi - tol
        return bool(above and below)


def closed_interval(lo: float, hi: float) -> Interval:
    return Interval(lo, hi, True, True)


def open_interval(lo: float, hi: float) -> Interval:
    return Interval(lo, hi, False, False)


def point_interval(value: float) -> Interval:
    return Interval(value, value, True, True)


@dataclass(frozen=True)
class Witnessed:
    """A boolean verdict plus the number that decided it."""

    ok: bool
    witness: float | None = None

    def __bool__(self) -> bool:
        return self.ok


def _eigh(matrix: np.ndarray):
    try:
        return np.linalg.eigh(matrix)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigensolver failed: {exc}") from exc


def _eigvalsh(matrix: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.eigvalsh(matrix)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigensolver failed: {exc}") from exc


def spectral_decompose(op: Operator) -> SpectralDecomposition:
    """Full Hermitian eigendecomposition, eigenvalues ascending."""
    w, v = _eigh(op.entries)
    return SpectralDecomposition(eigenvalues=w, eigenvectors=v)


def hermitian_eigenvalues(op: Operator) -> np.ndarray:
    """Eigenvalues only, ascending."""
    return _eigvalsh(op.entries)


def spectral_projection(
    op: Operator, interval: Interval, *, tol_eig: float = DEFAULT.eig
) -> Projection:
    """Projection onto the eigenspaces with eigenvalue in ``interval``.

    An empty intersection with the spectrum yields the rank-0 projection,
    not an error.
    """
    decomp = spectral_decompose(op)
    mask = np.array(
        [interval.contains(float(w), tol_eig) for w in decomp.eigenvalues]
    )
    rank = int(mask.sum())
    if rank == 0:
        zero = np.zeros((op.dim, op.dim), dtype=op.entries.dtype)
        return Projection(Operator(zero), 0)
    cols = decomp.eigenvectors[:, mask]
    return Projection(Operator(cols @ cols.conj().T), rank)


def is_positive_contraction(
    op: Operator, *, tol_psd: float | None = None
) -> Witnessed:
    """Check ``0 <= T <= I`` up to PSD slack.

    On failure the witness is the offending eigenvalue.
    """
    tol = DEFAULT.psd(op.dim) if tol_psd is None else tol_psd
    w = _eigvalsh(op.entries)
    low, high = float(w[0]), float(w[-1])
    if low < -tol:
        return Witnessed(False, low)
    if high > 1.0 + tol:
        return Witnessed(False, high)
    return Witnessed(True, None)


def fixed_point_projection(
    op: Operator,
    *,
    tol_eig: float = DEFAULT.eig,
    tol_psd: float | None = None,
) -> Projection:
    """Projection onto the fixed-point space of a positive contraction.

    Equivalent to ``spectral_projection(T, [1, 1])`` under the clustering
    rule.  Rejects operators that are not positive contractions.
    """
    check = is_positive_contraction(op, tol_psd=tol_psd)
    if not check:
        raise PreconditionError(
            f"not a positive contraction: offending eigenvalue {check.witness}"
        )
    return spectral_projection(op, point_interval(1.0), tol_eig=tol_eig)


def loewner_leq(
    a: Operator, b: Operator, *, tol_psd: float | None = None
) -> Witnessed:
    """Whether ``A <= B`` in the Loewner order, up to PSD slack.

    The witness is the smallest eigenvalue of ``B - A`` either way.
    """
    if a.dim != b.dim:
        raise DimensionMismatchError(
            f"cannot compare operators of dims {a.dim} and {b.dim}"
        )
    tol = DEFAULT.psd(a.dim) if tol_psd is None else tol_psd
    smallest = float(_eigvalsh(b.entries - a.entries)[0])
    return Witnessed(smallest >= -tol, smallest)


@dataclass(frozen=True)
class FixedVectorReport:
    """Three equivalent fixed-vector conditions, each with its residual.

    For a positive contraction the conditions ``T xi = xi``,
    ``||T xi|| = ||xi||`` and ``<T xi, xi> = ||xi||^2`` agree exactly.
    Thresholded at ``tol_fix`` they can only be trusted to agree when no
    residual lands inside the ambiguity band; near-fixed vectors make the
    norm residual second-order small, which is precisely why the band is
    reported instead of resolved.
    """

    cond1: bool
    cond2: bool
    cond3: bool
    r1: float
    r2: float
    r3: float
    tol_fix: float

    @property
    def residuals(self) -> tuple[float, float, float]:
        return (self.r1, self.r2, self.r3)

    @property
    def band(self) -> tuple[float, float]:
        return (self.tol_fix / 10.0, self.tol_fix * 10.0)

    @property
    def in_band(self) -> tuple[bool, bool, bool]:
        lo, hi = self.band
        return tuple(lo <= r <= hi for r in self.residuals)

    @property
    def ambiguous(self) -> bool:
        return any(self.in_band)

    @property
    def agree(self) -> bool:
        return self.cond1 == self.cond2 == self.cond3


def check_fixed_vector_equivalence(
    op: Operator,
    vector: np.ndarray,
    *,
    tol_fix: float = DEFAULT.fix,
    tol_psd: float | None = None,
) -> FixedVectorReport:
    """Evaluate the three fixed-vector conditions with relative residuals.

    The zero vector satisfies all three trivially.  Rejects operators
    that are not positive contractions, since the equivalence is only a
    theorem for those.
    """
    check = is_positive_contraction(op, tol_psd=tol_psd)
    if not check:
        raise PreconditionError(
            f"not a positive contraction: offending eigenvalue {check.witness}"
        )
    xi = np.asarray(vector)
    if xi.shape != (op.dim,):
        raise DimensionMismatchError(
            f"vector of shape {xi.shape} does not match dim {op.dim}"
        )
    norm_xi = float(np.linalg.norm(xi))
    if norm_xi == 0.0:
        return FixedVectorReport(True, True, True, 0.0, 0.0, 0.0, tol_fix)
    t_xi = op.entries @ xi
    r1 = float(np.linalg.norm(t_xi - xi)) / norm_xi
    r2 = abs(float(np.linalg.norm(t_xi)) - norm_xi) / norm_xi
    # <T xi, xi> is real for Hermitian T up to roundoff
    quad = float(np.real(np.vdot(xi, t_xi)))
    r3 = abs(quad - norm_xi**2) / norm_xi**2
    return FixedVectorReport(
        cond1=r1 <= tol_fix,
        cond2=r2 <= tol_fix,
        cond3=r3 <= tol_fix,
        r1=r1,
        r2=r2,
        r3=r3,
        tol_fix=tol_fix,
    )


def check_projection_monotone(
    t_lower: Operator,
    t_upper: Operator,
    *,
    tol_eig: float = DEFAULT.eig,
    tol_psd: float | None = None,
) -> bool:
    """Whether the fixed spaces satisfy ``P' <= P`` for ``T' <= T``.

    Preconditions (both operators are positive contractions and the
    ordering holds) are enforced; this function answers the projection
    comparison only.
    """
    for name, op in (("lower", t_lower), ("upper", t_upper)):
        check = is_positive_contraction(op, tol_psd=tol_psd)
        if not check:
            raise PreconditionError(
                f"{name} operand is not a positive contraction: "
                f"offending eigenvalue {check.witness}"
            )
    ordering = loewner_leq(t_lower, t_upper, tol_psd=tol_psd)
    if not ordering:
        raise PreconditionError(
            f"operands are not ordered: min eig of difference {ordering.witness}"
        )
    p_lower = fixed_point_projection(t_lower, tol_eig=tol_eig, tol_psd=tol_psd)
    p_upper = fixed_point_projection(t_upper, tol_eig=tol_eig, tol_psd=tol_psd)
    return bool(loewner_leq(p_lower.operator, p_upper.operator, tol_psd=tol_psd))


def operator_to_dict(op: Operator) -> dict:
    """JSON-ready dict: ``dim`` plus row-major ``[re, im]`` entry pairs."""
    entries = [
        [[float(np.real(x)), float(np.imag(x))] for x in row]
        for row in op.entries
    ]
    return {"dim": op.dim, "entries": entries}


def operator_from_dict(data: dict) -> Operator:
    if not isinstance(data, dict) or "dim" not in data or "entries" not in data:
        raise ValueError("operator document needs 'dim' and 'entries'")
    dim = data["dim"]
    rows = data["entries"]
    if not isinstance(dim, int) or dim < 1:
        raise ValueError(f"bad dim: {dim!r}")
    if len(rows) != dim or any(len(row) != dim for row in rows):
        raise ValueError("entries must form a dim x dim grid")
    matrix = np.empty((dim, dim), dtype=np.complex128)
    for i, row in enumerate(rows):
        for j, pair in enumerate(row):
            if len(pair) != 2:
                raise ValueError(f"entry ({i},{j}) is not a [re, im] pair")
            matrix[i, j] = complex(pair[0], pair[1])
    if np.all(matrix.imag == 0.0):
        return Operator(matrix.real)
    return Operator(matrix)
