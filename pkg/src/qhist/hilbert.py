"""Labeled finite-dimensional complex linear algebra.

States, operators and projectors over spaces whose basis vectors carry
symbolic composite labels (e.g. a photon mode together with detector
readiness tokens).  Everything is dense ``complex128``; the scenario
dimensions this engine targets stay below ~100, so sparsity machinery is
not warranted.

All values are immutable after construction and safe to share between
threads; the operations below are pure functions.

Norm conventions: operator-level tolerances use the Frobenius norm
(cheap, basis-stable).  The spectral norm is available where a golden
value is stated in that norm (see :func:`commutator_norm`).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DuplicateLabel,
    EmptySpace,
    SpaceMismatch,
    UnknownLabel,
    ZeroSpan,
)

#: separator used when rendering a composite label as a single string
LABEL_SEPARATOR = ","

#: default tolerance for structural checks (idempotence, hermiticity, norms)
STRUCTURAL_TOL = 1e-10

#: default tolerance for derived integer roundings (projector ranks)
RANK_TOL = 1e-8


@dataclass(frozen=True)
class BasisLabel:
    """Composite basis label: an ordered tuple of subsystem tokens.

    Tokens are non-empty strings that must not contain the rendering
    separator.  Equality is exact token-sequence equality.
    """

    parts: tuple[str, ...]

    def __post_init__(self) -> None:
        parts = tuple(self.parts)
        object.__setattr__(self, "parts", parts)
        if not parts:
            raise ValueError("a basis label needs at least one token")
        for token in parts:
            if not isinstance(token, str) or not token:
                raise ValueError(f"invalid token {token!r} in basis label")
            if LABEL_SEPARATOR in token:
                raise ValueError(
                    f"token {token!r} contains the separator {LABEL_SEPARATOR!r}"
                )

    @classmethod
    def of(cls, *tokens: str) -> "BasisLabel":
        return cls(tuple(tokens))

    def __str__(self) -> str:
        return LABEL_SEPARATOR.join(self.parts)


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered set of distinct basis labels with a position index."""

    labels: tuple[BasisLabel, ...]
    index: dict[BasisLabel, int] = field(compare=False, repr=False, default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if not labels:
            raise EmptySpace("a Hilbert space needs at least one basis label")
        index: dict[BasisLabel, int] = {}
        for pos, label in enumerate(labels):
            if label in index:
                raise DuplicateLabel(f"duplicate basis label {label}")
            index[label] = pos
        object.__setattr__(self, "index", index)

    @property
    def dim(self) -> int:
        return len(self.labels)

    def position(self, label: BasisLabel) -> int:
        try:
            return self.index[label]
        except KeyError:
            raise UnknownLabel(f"label {label} not in space") from None

    def __contains__(self, label: BasisLabel) -> bool:
        return label in self.index


def make_space(labels: Iterable[BasisLabel]) -> HilbertSpace:
    """Build a space with stable ordering equal to the input order."""
    return HilbertSpace(tuple(labels))


def product_space(*factors: Sequence[str]) -> HilbertSpace:
    """Space whose labels are the Cartesian product of per-subsystem tokens.

    Label order follows ``itertools.product`` of the factors, i.e. the last
    factor varies fastest.
    """
    if not factors:
        raise EmptySpace("product space needs at least one factor")
    labels = [BasisLabel(parts) for parts in itertools.product(*factors)]
    return make_space(labels)


def _readonly(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class StateVector:
    """Complex amplitude vector over a space.

    ``normalized`` records whether the 2-norm is within ``STRUCTURAL_TOL``
    of one; it is recomputed by every operation that returns a state.
    """

    space: HilbertSpace
    amplitudes: np.ndarray
    normalized: bool = field(default=False)

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.space.dim,):
            raise SpaceMismatch(
                f"amplitude vector of length {amps.shape} does not match dimension {self.space.dim}"
            )
        object.__setattr__(self, "amplitudes", _readonly(amps.copy()))
        object.__setattr__(
            self, "normalized", bool(abs(np.linalg.norm(amps) - 1.0) <= STRUCTURAL_TOL)
        )

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def amplitude(self, label: BasisLabel) -> complex:
        return complex(self.amplitudes[self.space.position(label)])


@dataclass(frozen=True)
class Operator:
    """Dense square matrix acting on a space."""

    space: HilbertSpace
    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = np.asarray(self.matrix, dtype=np.complex128)
        d = self.space.dim
        if mat.shape != (d, d):
            raise SpaceMismatch(f"matrix shape {mat.shape} does not match dimension {d}")
        object.__setattr__(self, "matrix", _readonly(mat.copy()))


@dataclass(frozen=True)
class Projector:
    """Orthogonal projector: idempotent, Hermitian, integer trace.

    Validated on construction; tolerances can be widened per call site
    through :meth:`from_matrix`.
    """

    operator: Operator
    rank: int

    @property
    def space(self) -> HilbertSpace:
        return self.operator.space

    @property
    def matrix(self) -> np.ndarray:
        return self.operator.matrix

    @classmethod
    def from_matrix(
        cls,
        space: HilbertSpace,
        matrix: np.ndarray,
        *,
        tol: float = STRUCTURAL_TOL,
        rank_tol: float = RANK_TOL,
    ) -> "Projector":
        mat = np.asarray(matrix, dtype=np.complex128)
        op = Operator(space, mat)
        mat = op.matrix
        idem = float(np.linalg.norm(mat @ mat - mat))
        if idem > tol:
            raise ValueError(f"not idempotent: residual {idem:.3e} > {tol:.1e}")
        herm = float(np.linalg.norm(mat - mat.conj().T))
        if herm > tol:
            raise ValueError(f"not Hermitian: residual {herm:.3e} > {tol:.1e}")
        trace = float(np.real(np.trace(mat)))
        rank = int(round(trace))
        if abs(trace - rank) > rank_tol:
            raise ValueError(f"trace {trace!r} is not within {rank_tol:.1e} of an integer")
        return cls(op, rank)


def basis_state(space: HilbertSpace, label: BasisLabel) -> StateVector:
    """Unit basis ket for one label."""
    amps = np.zeros(space.dim, dtype=np.complex128)
    amps[space.position(label)] = 1.0
    return StateVector(space, amps)


def superpose(
    terms: Sequence[tuple[complex, BasisLabel]], space: HilbertSpace
) -> StateVector:
    """Sum of coefficient-weighted basis kets.

    Coefficients for a repeated label accumulate.  The normalized flag is
    set iff the resulting norm is within ``STRUCTURAL_TOL`` of one.
    """
    amps = np.zeros(space.dim, dtype=np.complex128)
    for coeff, label in terms:
        amps[space.position(label)] += coeff
    return StateVector(space, amps)


def _require_same_space(a: HilbertSpace, b: HilbertSpace) -> None:
    if a != b:
        raise SpaceMismatch("operands live on different spaces")


def inner_product(u: StateVector, v: StateVector) -> complex:
    """Hermitian inner product, conjugate-linear in the first argument."""
    _require_same_space(u.space, v.space)
    return complex(np.vdot(u.amplitudes, v.amplitudes))


def apply(op: "Operator | Projector", v: StateVector) -> StateVector:
    """Matrix-vector product; the normalized flag is recomputed."""
    matrix_op = op.operator if isinstance(op, Projector) else op
    _require_same_space(matrix_op.space, v.space)
    return StateVector(v.space, matrix_op.matrix @ v.amplitudes)


def identity(space: HilbertSpace) -> Operator:
    return Operator(space, np.eye(space.dim, dtype=np.complex128))


def orthonormalize(
    vectors: Sequence[np.ndarray], *, drop_tol: float = STRUCTURAL_TOL
) -> list[np.ndarray]:
    """Modified Gram-Schmidt with a second orthogonalization pass.

    Input vectors are normalized first; directions whose residual after
    orthogonalization falls below ``drop_tol`` are dropped.
    """
    basis: list[np.ndarray] = []
    for vec in vectors:
        w = np.asarray(vec, dtype=np.complex128).copy()
        n = np.linalg.norm(w)
        if n < drop_tol:
            continue
        w /= n
        for _ in range(2):
            for b in basis:
                w -= np.vdot(b, w) * b
        n = np.linalg.norm(w)
        if n < drop_tol:
            continue
        basis.append(w / n)
    return basis


def projector_from_vectors(
    vectors: Sequence[StateVector], *, drop_tol: float = STRUCTURAL_TOL
) -> Projector:
    """Orthogonal projector onto the span of the given states.

    Linearly dependent (and numerically zero) inputs are dropped during
    orthonormalization; the rank equals the dimension of the span.
    """
    if not vectors:
        raise ZeroSpan("no vectors given")
    space = vectors[0].space
    for v in vectors[1:]:
        _require_same_space(space, v.space)
    basis = orthonormalize([v.amplitudes for v in vectors], drop_tol=drop_tol)
    if not basis:
        raise ZeroSpan("all input vectors are numerically zero")
    q = np.column_stack(basis)
    return Projector.from_matrix(space, q @ q.conj().T)


def operator_norm(matrix: np.ndarray, kind: str = "frobenius") -> float:
    """Matrix norm used by engine tolerances.

    ``frobenius`` is the engine-wide default; ``spectral`` (largest
    singular value) is exposed for golden values stated in that norm.
    """
    if kind == "frobenius":
        return float(np.linalg.norm(matrix))
    if kind == "spectral":
        return float(np.linalg.norm(matrix, 2))
    raise ValueError(f"unknown norm kind {kind!r}")


def commutator_norm(p: Projector, q: Projector, kind: str = "frobenius") -> float:
    """Norm of ``PQ - QP``; zero (within tolerance) iff the projectors commute."""
    _require_same_space(p.space, q.space)
    comm = p.matrix @ q.matrix - q.matrix @ p.matrix
    return operator_norm(comm, kind)
