"""Run a compiled scenario: verdicts, probability tables, check outcomes.

This is the single orchestration layer behind both front doors (CLI and
HTTP service).  It never raises for a *failing* check — failures are data
in the report; only malformed inputs raise.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compatibility import check_compatibility, spin_half_conjunction_check
from .errors import QHistError
from .hilbert import BasisLabel, basis_state
from .histories import (
    CONSISTENCY_TOL,
    DISPLAY_THRESHOLD,
    branch_probabilities,
    check_consistency,
    conditional_probability,
    event_probability,
)
from .scenarios import Scenario
from .schemas import (
    AnalysisReport,
    BranchReport,
    CheckReport,
    CompatibilityCheckDoc,
    ConditionalCheckDoc,
    ConditionalReport,
    ConsistencyCheckDoc,
    EventTermDoc,
    FamilyReport,
    MarginalAgreementCheckDoc,
    PairReport,
    ProbabilityCheckDoc,
    SpinConjunctionCheckDoc,
    TransportCheckDoc,
    WitnessReport,
)


@dataclass(frozen=True)
class AnalysisOptions:
    tolerance: float = CONSISTENCY_TOL
    show_zero_branches: bool = False
    zero_threshold: float = DISPLAY_THRESHOLD


def _event(terms: list[EventTermDoc]) -> dict[int, str]:
    return {term.time: term.alternative for term in terms}


def _family_report(scenario: Scenario, name: str, options: AnalysisOptions) -> FamilyReport:
    family = scenario.families[name]
    verdict = check_consistency(family, options.tolerance)
    branches = None
    conditionals: list[ConditionalReport] = []
    if verdict.consistent:
        table = branch_probabilities(family, options.tolerance)
        branches = [
            BranchReport(choices=list(branch.choices), probability=p)
            for branch, p in table
            if options.show_zero_branches or p > options.zero_threshold
        ]
        for check in scenario.checks:
            if isinstance(check, ConditionalCheckDoc) and check.family == name:
                try:
                    value = conditional_probability(
                        family,
                        _event(check.given),
                        _event(check.target),
                        tol=options.tolerance,
                    )
                except QHistError:
                    continue
                conditionals.append(
                    ConditionalReport(
                        given=check.given, target=check.target, probability=value
                    )
                )
    return FamilyReport(
        name=name,
        consistent=verdict.consistent,
        max_offdiagonal=verdict.max_offdiagonal,
        tolerance=verdict.tolerance,
        branches=branches,
        conditionals=conditionals,
    )


def _pair_report(
    scenario: Scenario, name_a: str, name_b: str, options: AnalysisOptions
) -> PairReport:
    verdict = check_compatibility(
        scenario.families[name_a], scenario.families[name_b], options.tolerance
    )
    return PairReport(
        family_a=name_a,
        family_b=name_b,
        compatible=verdict.compatible,
        commutation_witnesses=[
            WitnessReport(
                time=w.time_index,
                alternative_a=w.name_a,
                alternative_b=w.name_b,
                commutator_norm=w.commutator_norm,
            )
            for w in verdict.commutation_witnesses
        ],
        refinement_consistent=(
            None
            if verdict.refinement_verdict is None
            else verdict.refinement_verdict.consistent
        ),
        refinement_max_offdiagonal=(
            None
            if verdict.refinement_verdict is None
            else verdict.refinement_verdict.max_offdiagonal
        ),
        refinement_dropped=list(verdict.refinement_dropped),
    )


def run_check(scenario: Scenario, check, options: AnalysisOptions) -> CheckReport:
    """Evaluate one requested check against the scenario."""
    base = dict(name=check.name, kind=check.kind, note=check.note)
    try:
        if isinstance(check, ConsistencyCheckDoc):
            verdict = check_consistency(scenario.families[check.family], options.tolerance)
            return CheckReport(
                **base,
                passed=verdict.consistent == check.expect,
                observed=verdict.consistent,
                expected=check.expect,
                tolerance=options.tolerance,
                detail=f"max off-diagonal {verdict.max_offdiagonal:.3e}",
            )
        if isinstance(check, ProbabilityCheckDoc):
            value = event_probability(
                scenario.families[check.family], _event(check.event), options.tolerance
            )
            return CheckReport(
                **base,
                passed=abs(value - check.expect) <= check.tol,
                observed=value,
                expected=check.expect,
                tolerance=check.tol,
            )
        if isinstance(check, ConditionalCheckDoc):
            value = conditional_probability(
                scenario.families[check.family],
                _event(check.given),
                _event(check.target),
                tol=options.tolerance,
            )
            return CheckReport(
                **base,
                passed=abs(value - check.expect) <= check.tol,
                observed=value,
                expected=check.expect,
                tolerance=check.tol,
            )
        if isinstance(check, CompatibilityCheckDoc):
            verdict = check_compatibility(
                scenario.families[check.family_a],
                scenario.families[check.family_b],
                options.tolerance,
            )
            passed = verdict.compatible == check.expect
            detail = ""
            if check.witness_time is not None and not check.expect:
                witnesses = [
                    w
                    for w in verdict.commutation_witnesses
                    if w.time_index == check.witness_time
                ]
                passed = passed and bool(witnesses)
                if witnesses:
                    w = max(witnesses, key=lambda w: w.commutator_norm)
                    detail = (
                        f"t{w.time_index}: {w.name_a!r} vs {w.name_b!r} "
                        f"(commutator {w.commutator_norm:.3f})"
                    )
                else:
                    detail = f"no commutation witness at t{check.witness_time}"
            return CheckReport(
                **base,
                passed=passed,
                observed=verdict.compatible,
                expected=check.expect,
                tolerance=options.tolerance,
                detail=detail,
            )
        if isinstance(check, MarginalAgreementCheckDoc):
            event = {check.time: check.alternative}
            p_a = event_probability(
                scenario.families[check.family_a], event, options.tolerance
            )
            p_b = event_probability(
                scenario.families[check.family_b], event, options.tolerance
            )
            gap = abs(p_a - p_b)
            return CheckReport(
                **base,
                passed=gap <= check.tol,
                observed=gap,
                expected=0.0,
                tolerance=check.tol,
                detail=f"{check.family_a}: {p_a:.10f}, {check.family_b}: {p_b:.10f}",
            )
        if isinstance(check, TransportCheckDoc):
            state = basis_state(scenario.space, BasisLabel(tuple(check.initial)))
            indices = check.steps if check.steps is not None else range(len(scenario.steps))
            amplitudes = state.amplitudes
            for index in indices:
                amplitudes = scenario.steps[index].matrix @ amplitudes
            target = basis_state(scenario.space, BasisLabel(tuple(check.final)))
            deviation = float(np.linalg.norm(amplitudes - target.amplitudes))
            return CheckReport(
                **base,
                passed=deviation <= check.tol,
                observed=deviation,
                expected=0.0,
                tolerance=check.tol,
            )
        if isinstance(check, SpinConjunctionCheckDoc):
            report = spin_half_conjunction_check()
            passed = (
                abs(report.commutator_spectral - check.expect_commutator) <= check.tol
                and report.product_idempotence_residual
                >= check.min_idempotence_residual
                and report.completeness_residual <= 1e-10
            )
            return CheckReport(
                **base,
                passed=passed,
                observed=report.commutator_spectral,
                expected=check.expect_commutator,
                tolerance=check.tol,
                detail=(
                    f"product idempotence residual {report.product_idempotence_residual:.4f} "
                    f"(needs >= {check.min_idempotence_residual}), "
                    f"basis completeness residual {report.completeness_residual:.1e}"
                ),
            )
        raise QHistError(f"unknown check kind {check.kind!r}")
    except QHistError as exc:
        return CheckReport(**base, passed=False, detail=str(exc))


def analyze(scenario: Scenario, options: AnalysisOptions | None = None) -> AnalysisReport:
    """Full report: per-family verdicts, pairwise compatibility, check outcomes."""
    options = options or AnalysisOptions()
    family_names = list(scenario.families)
    families = [_family_report(scenario, name, options) for name in family_names]
    pairs = [
        _pair_report(scenario, family_names[i], family_names[j], options)
        for i in range(len(family_names))
        for j in range(i + 1, len(family_names))
    ]
    checks = [run_check(scenario, check, options) for check in scenario.checks]
    return AnalysisReport(
        scenario=scenario.name,
        dimension=scenario.space.dim,
        tolerance=options.tolerance,
        notes=list(scenario.notes),
        families=families,
        pairs=pairs,
        checks=checks,
        all_passed=all(check.passed for check in checks),
    )
