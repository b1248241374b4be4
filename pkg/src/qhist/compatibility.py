"""Whether two history families can be combined into one description.

Two consistent families are compatible iff (i) every pair of same-time
alternatives commutes and (ii) the common refinement — products of the
commuting projectors as the joint sample space — is itself consistent.
Commutation alone is not sufficient.

When families are incompatible the verdict carries a witness: either the
list of non-commuting projector pairs (with times and commutator norms),
or the refinement's failed consistency verdict.  Incompatible families are
the history-level analogue of asking for "spin up along x AND spin up
along z": there is no projector that could represent the conjunction, as
:func:`spin_half_conjunction_check` demonstrates on a two-dimensional
space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DynamicsMismatch, GridMismatch, NonCommuting, SpaceMismatch
from .hilbert import (
    BasisLabel,
    Projector,
    basis_state,
    commutator_norm,
    make_space,
    projector_from_vectors,
    superpose,
)
from .histories import (
    CONSISTENCY_TOL,
    ConsistencyVerdict,
    HistoryFamily,
    SampleSpace,
    check_consistency,
)

#: products with norm at or below this are dropped from refinements
PRODUCT_DROP_TOL = 1e-12


@dataclass(frozen=True)
class CommutationWitness:
    """A non-commuting pair of same-time alternatives."""

    time_index: int
    name_a: str
    name_b: str
    commutator_norm: float


@dataclass(frozen=True)
class CompatibilityVerdict:
    """Verdict with exactly one failure kind recorded when incompatible."""

    compatible: bool
    commutation_witnesses: tuple[CommutationWitness, ...] = ()
    refinement_verdict: ConsistencyVerdict | None = None
    refinement_dropped: tuple[str, ...] = ()


def _require_same_setting(a: HistoryFamily, b: HistoryFamily, tol: float) -> None:
    if a.space != b.space:
        raise SpaceMismatch("families live on different spaces")
    if a.times != b.times:
        raise GridMismatch(f"time grids differ: {a.times} vs {b.times}")
    if float(np.linalg.norm(a.initial.amplitudes - b.initial.amplitudes)) > tol:
        raise DynamicsMismatch("families start from different initial states")
    for step_a, step_b in zip(a.steps, b.steps):
        if float(np.linalg.norm(step_a.matrix - step_b.matrix)) > tol:
            raise DynamicsMismatch("families use different step unitaries")


def _commutation_witnesses(
    a: HistoryFamily, b: HistoryFamily, tol: float
) -> tuple[CommutationWitness, ...]:
    witnesses: list[CommutationWitness] = []
    for ss_a, ss_b in zip(a.sample_spaces, b.sample_spaces):
        for name_a, pa in ss_a.projectors:
            for name_b, pb in ss_b.projectors:
                norm = commutator_norm(pa, pb)
                if norm > tol:
                    witnesses.append(
                        CommutationWitness(ss_a.time_index, name_a, name_b, norm)
                    )
    return tuple(witnesses)


def _refined_sample_spaces(
    a: HistoryFamily, b: HistoryFamily, tol: float, drop_tol: float
) -> tuple[list[SampleSpace], list[str]]:
    refined: list[SampleSpace] = []
    dropped: list[str] = []
    for ss_a, ss_b in zip(a.sample_spaces, b.sample_spaces):
        alternatives: list[tuple[str, Projector]] = []
        for name_a, pa in ss_a.projectors:
            for name_b, pb in ss_b.projectors:
                norm = commutator_norm(pa, pb)
                if norm > tol:
                    raise NonCommuting(
                        f"alternatives {name_a!r} and {name_b!r} at t{ss_a.time_index} "
                        f"do not commute (norm {norm:.3e})"
                    )
                name = f"{name_a}∧{name_b}"
                product = pa.matrix @ pb.matrix
                # products of commuting projectors are projectors; symmetrize
                # away the commutator-sized asymmetry before validating
                product = (product + product.conj().T) / 2.0
                if float(np.linalg.norm(product)) <= drop_tol:
                    dropped.append(f"t{ss_a.time_index}:{name}")
                    continue
                alternatives.append(
                    (name, Projector.from_matrix(a.space, product, tol=max(tol, 10 * norm)))
                )
        refined.append(SampleSpace(ss_a.time_index, tuple(alternatives)))
    return refined, dropped


def common_refinement(
    a: HistoryFamily,
    b: HistoryFamily,
    tol: float = CONSISTENCY_TOL,
    drop_tol: float = PRODUCT_DROP_TOL,
) -> HistoryFamily:
    """Family whose alternatives are the nonzero products of a's and b's.

    Requires every same-time pair to commute within ``tol``; completeness
    is inherited from the factors.
    """
    _require_same_setting(a, b, tol)
    refined, _ = _refined_sample_spaces(a, b, tol, drop_tol)
    return HistoryFamily(a.space, a.initial, a.steps, tuple(refined))


def check_compatibility(
    a: HistoryFamily, b: HistoryFamily, tol: float = CONSISTENCY_TOL
) -> CompatibilityVerdict:
    """Commutation at every common time, then consistency of the refinement."""
    _require_same_setting(a, b, tol)
    witnesses = _commutation_witnesses(a, b, tol)
    if witnesses:
        return CompatibilityVerdict(compatible=False, commutation_witnesses=witnesses)
    refined, dropped = _refined_sample_spaces(a, b, tol, PRODUCT_DROP_TOL)
    refined_family = HistoryFamily(a.space, a.initial, a.steps, tuple(refined))
    verdict = check_consistency(refined_family, tol)
    return CompatibilityVerdict(
        compatible=verdict.consistent,
        refinement_verdict=verdict,
        refinement_dropped=tuple(dropped),
    )


@dataclass(frozen=True)
class ConjunctionReport:
    """Numbers behind "there is no projector for Sx=1/2 AND Sz=1/2"."""

    commutator_frobenius: float
    commutator_spectral: float
    product_idempotence_residual: float
    completeness_residual: float
    self_commutator: float
    self_product_idempotence_residual: float


def spin_half_conjunction_check() -> ConjunctionReport:
    """Self-contained two-dimensional demonstration of incompatibility.

    Builds the projectors for spin-up along z and along x, reports their
    commutator norms and how badly their product fails idempotence: the
    would-be conjunction has no ray to live on.
    """
    up, down = BasisLabel.of("z+"), BasisLabel.of("z-")
    space = make_space([up, down])
    s = 1.0 / math.sqrt(2.0)
    p_z = projector_from_vectors([basis_state(space, up)])
    p_x = projector_from_vectors([superpose([(s, up), (s, down)], space)])
    p_z_down = projector_from_vectors([basis_state(space, down)])

    product = p_x.matrix @ p_z.matrix
    idem = float(np.linalg.norm(product @ product - product))
    completeness = float(np.linalg.norm(p_z.matrix + p_z_down.matrix - np.eye(2)))
    self_product = p_z.matrix @ p_z.matrix
    self_idem = float(np.linalg.norm(self_product @ self_product - self_product))
    return ConjunctionReport(
        commutator_frobenius=commutator_norm(p_x, p_z),
        commutator_spectral=commutator_norm(p_x, p_z, kind="spectral"),
        product_idempotence_residual=idem,
        completeness_residual=completeness,
        self_commutator=commutator_norm(p_z, p_z),
        self_product_idempotence_residual=self_idem,
    )
