"""History families, chain vectors, the decoherence functional and probabilities.

A history family fixes an initial state, a sequence of unitary steps and,
for each time, a sample space: mutually orthogonal projectors summing to
the identity (the exhaustive alternatives at that time).  One choice per
time is a branch; its chain vector ``P_T U_T ... P_1 U_1 |initial>`` has
squared norm equal to the branch weight.

The decoherence functional is the Gram matrix of the chain vectors.  Its
diagonal carries branch probabilities; non-vanishing off-diagonal entries
are the interference obstruction that makes probability assignment
meaningless, so probabilities are refused (not approximated) for families
that fail the consistency test.  The medium criterion is used: the full
complex off-diagonal entry must vanish, not just its real part.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .dynamics import UnitaryStep
from .errors import (
    BadBranch,
    IncompleteSampleSpace,
    InconsistentFamily,
    NotOrthogonal,
    SpaceMismatch,
    ZeroConditioningEvent,
)
from .hilbert import (
    STRUCTURAL_TOL,
    HilbertSpace,
    Projector,
    StateVector,
    apply,
)

#: reserved name for the automatically appended complement alternative
REST = "REST"

#: default consistency tolerance for off-diagonal decoherence entries
CONSISTENCY_TOL = 1e-10

#: branches below this weight are hidden by reports (the math keeps them)
DISPLAY_THRESHOLD = 1e-12


@dataclass(frozen=True)
class SampleSpace:
    """Named, mutually orthogonal projectors for one time index."""

    time_index: int
    projectors: tuple[tuple[str, Projector], ...]

    def __post_init__(self) -> None:
        projectors = tuple(self.projectors)
        object.__setattr__(self, "projectors", projectors)
        names = [name for name, _ in projectors]
        if len(set(names)) != len(names):
            raise BadBranch(f"duplicate alternative names at t{self.time_index}")
        for (name_a, pa), (name_b, pb) in itertools.combinations(projectors, 2):
            if pa.space != pb.space:
                raise SpaceMismatch("sample-space projectors live on different spaces")
            overlap = float(np.linalg.norm(pa.matrix @ pb.matrix))
            if overlap > STRUCTURAL_TOL:
                raise NotOrthogonal(
                    f"alternatives {name_a!r} and {name_b!r} at t{self.time_index} "
                    f"overlap (norm {overlap:.3e})"
                )

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.projectors)

    def projector(self, name: str) -> Projector:
        for candidate, proj in self.projectors:
            if candidate == name:
                return proj
        raise BadBranch(f"no alternative named {name!r} at t{self.time_index}")

    def completeness_residual(self, space: HilbertSpace) -> float:
        total = sum(
            (proj.matrix for _, proj in self.projectors),
            start=np.zeros((space.dim, space.dim), dtype=np.complex128),
        )
        return float(np.linalg.norm(total - np.eye(space.dim)))


def complete_sample_space(ss: SampleSpace, space: HilbertSpace) -> SampleSpace:
    """Append the complement alternative ``REST`` when it is non-trivial.

    Histories that are dynamically impossible still have to exist in the
    formal family, so the listed alternatives are completed to a full
    decomposition of the identity.  An already-complete sample space is
    returned unchanged.
    """
    total = sum(
        (proj.matrix for _, proj in ss.projectors),
        start=np.zeros((space.dim, space.dim), dtype=np.complex128),
    )
    complement = np.eye(space.dim) - total
    trace = float(np.real(np.trace(complement)))
    if trace < 0.5:
        residual = ss.completeness_residual(space)
        if residual > STRUCTURAL_TOL:
            raise IncompleteSampleSpace(
                f"sample space at t{ss.time_index} neither complete nor completable "
                f"(residual {residual:.3e})"
            )
        return ss
    if REST in ss.names:
        raise BadBranch(f"alternative name {REST!r} is reserved for the complement")
    rest = Projector.from_matrix(space, complement)
    return SampleSpace(ss.time_index, ss.projectors + ((REST, rest),))


@dataclass(frozen=True)
class Branch:
    """One projector choice per time."""

    choices: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "choices", tuple(self.choices))

    def __str__(self) -> str:
        return " -> ".join(self.choices)


@dataclass(frozen=True)
class HistoryFamily:
    """Initial state, unitary steps and one complete sample space per step."""

    space: HilbertSpace
    initial: StateVector
    steps: tuple[UnitaryStep, ...]
    sample_spaces: tuple[SampleSpace, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))
        object.__setattr__(self, "sample_spaces", tuple(self.sample_spaces))
        if len(self.steps) != len(self.sample_spaces):
            raise SpaceMismatch(
                f"{len(self.steps)} steps vs {len(self.sample_spaces)} sample spaces"
            )
        if not self.steps:
            raise SpaceMismatch("a history family needs at least one step")
        if self.initial.space != self.space:
            raise SpaceMismatch("initial state lives on a different space")
        if not self.initial.normalized:
            raise SpaceMismatch(
                f"initial state must be normalized (norm {self.initial.norm!r})"
            )
        for step in self.steps:
            if step.space != self.space:
                raise SpaceMismatch("step operator lives on a different space")
        for ss in self.sample_spaces:
            for _, proj in ss.projectors:
                if proj.space != self.space:
                    raise SpaceMismatch("sample-space projector lives on a different space")
            residual = ss.completeness_residual(self.space)
            if residual > STRUCTURAL_TOL:
                raise IncompleteSampleSpace(
                    f"sample space at t{ss.time_index} is incomplete "
                    f"(residual {residual:.3e}); run complete_sample_space first"
                )

    @property
    def times(self) -> tuple[int, ...]:
        return tuple(ss.time_index for ss in self.sample_spaces)

    def branches(self) -> tuple[Branch, ...]:
        """Full Cartesian product of alternatives, names sorted per time."""
        name_lists = [sorted(ss.names) for ss in self.sample_spaces]
        return tuple(Branch(combo) for combo in itertools.product(*name_lists))

    def sample_space_at(self, time_index: int) -> SampleSpace:
        for ss in self.sample_spaces:
            if ss.time_index == time_index:
                return ss
        raise BadBranch(f"family has no sample space at t{time_index}")


def chain_vector(fam: HistoryFamily, branch: Branch) -> StateVector:
    """Unnormalized chain state of one branch; its squared norm is the weight."""
    if len(branch.choices) != len(fam.steps):
        raise BadBranch(
            f"branch has {len(branch.choices)} choices for {len(fam.steps)} times"
        )
    state = fam.initial
    for step, ss, name in zip(fam.steps, fam.sample_spaces, branch.choices):
        state = apply(step.operator, state)
        state = apply(ss.projector(name), state)
    return state


@dataclass(frozen=True)
class DecoherenceMatrix:
    """Gram matrix of chain vectors over the full branch set."""

    branches: tuple[Branch, ...]
    entries: np.ndarray

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=np.complex128)
        n = len(self.branches)
        if entries.shape != (n, n):
            raise SpaceMismatch(f"entry matrix shape {entries.shape} for {n} branches")
        entries = entries.copy()
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)

    @property
    def diagonal(self) -> np.ndarray:
        return np.real(np.diagonal(self.entries))

    @property
    def max_offdiagonal(self) -> float:
        if len(self.branches) < 2:
            return 0.0
        off = self.entries - np.diag(np.diagonal(self.entries))
        return float(np.max(np.abs(off)))

    @property
    def total(self) -> complex:
        return complex(np.sum(self.entries))

    def hermiticity_residual(self) -> float:
        return float(np.linalg.norm(self.entries - self.entries.conj().T))

    def min_eigenvalue(self) -> float:
        sym = (self.entries + self.entries.conj().T) / 2.0
        return float(np.min(np.linalg.eigvalsh(sym)))


def decoherence_functional(fam: HistoryFamily) -> DecoherenceMatrix:
    """Assemble ``D(a, b) = <chain_b | chain_a>`` over all branches.

    Branches are enumerated in deterministic lexicographic order of the
    per-time alternative names; zero-weight branches are kept.
    """
    branches = fam.branches()
    chains = [chain_vector(fam, branch).amplitudes for branch in branches]
    n = len(branches)
    entries = np.zeros((n, n), dtype=np.complex128)
    for a in range(n):
        for b in range(n):
            entries[a, b] = np.vdot(chains[b], chains[a])
    return DecoherenceMatrix(branches, entries)


@dataclass(frozen=True)
class ConsistencyVerdict:
    """Outcome of the consistency test, always reporting the achieved maximum."""

    consistent: bool
    max_offdiagonal: float
    tolerance: float


def check_consistency(
    fam: HistoryFamily, tol: float = CONSISTENCY_TOL
) -> ConsistencyVerdict:
    """Medium consistency: every off-diagonal entry vanishes within ``tol``."""
    matrix = decoherence_functional(fam)
    worst = matrix.max_offdiagonal
    return ConsistencyVerdict(consistent=worst <= tol, max_offdiagonal=worst, tolerance=tol)


def branch_probabilities(
    fam: HistoryFamily, tol: float = CONSISTENCY_TOL
) -> list[tuple[Branch, float]]:
    """Diagonal of the decoherence functional, refused for inconsistent families.

    Zero-probability branches are included; callers filter for display.
    """
    matrix = decoherence_functional(fam)
    worst = matrix.max_offdiagonal
    if worst > tol:
        raise InconsistentFamily(
            f"family fails consistency (max off-diagonal {worst:.3e} > {tol:.1e}); "
            "probabilities cannot be assigned"
        )
    return [
        (branch, float(np.real(matrix.entries[i, i])))
        for i, branch in enumerate(matrix.branches)
    ]


def _matches(branch: Branch, fam: HistoryFamily, constraint: Mapping[int, str]) -> bool:
    times = fam.times
    for time_index, name in constraint.items():
        try:
            position = times.index(time_index)
        except ValueError:
            raise BadBranch(f"family has no sample space at t{time_index}") from None
        if name not in fam.sample_spaces[position].names:
            raise BadBranch(f"no alternative named {name!r} at t{time_index}")
        if branch.choices[position] != name:
            return False
    return True


def event_probability(
    fam: HistoryFamily, event: Mapping[int, str], tol: float = CONSISTENCY_TOL
) -> float:
    """Probability of a partial branch constraint ``{time_index: name}``."""
    return sum(
        p for branch, p in branch_probabilities(fam, tol) if _matches(branch, fam, event)
    )


def conditional_probability(
    fam: HistoryFamily,
    given: Mapping[int, str],
    target: Mapping[int, str],
    tol: float = CONSISTENCY_TOL,
    zero_tol: float = DISPLAY_THRESHOLD,
) -> float:
    """Conditional probability of ``target`` given ``given`` within one family."""
    probabilities = branch_probabilities(fam, tol)
    joint = 0.0
    marginal = 0.0
    for branch, p in probabilities:
        if _matches(branch, fam, given):
            marginal += p
            if _matches(branch, fam, target):
                joint += p
    if marginal <= zero_tol:
        raise ZeroConditioningEvent(
            f"conditioning event has probability {marginal:.3e} <= {zero_tol:.1e}"
        )
    return joint / marginal
