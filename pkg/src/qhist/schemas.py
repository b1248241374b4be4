"""JSON document and report schemas (pydantic models).

A scenario document describes a space (subsystem token lists), the unitary
steps (explicit rules or beamsplitter/detection shorthands), an initial
state, history families as per-time projector definitions (vector lists
over labels), and the checks to evaluate.  Complex numbers travel as
two-element ``[re, im]`` arrays; labels as token arrays.

``parse_document`` validates structurally (pydantic) and semantically, and
reports *every* violation, not just the first.  Amplitude vectors whose
norm is within 1e-8 of one are accepted (they are renormalized at compile
time, with a note recorded); anything further off is rejected so that
hand-typed decimals like 0.7071 fail loudly instead of skewing results.
"""
from __future__ import annotations

import json
import math
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .errors import ParseError
from .hilbert import LABEL_SEPARATOR

SCHEMA_VERSION = 1

#: amplitude vectors may be off unit norm by at most this much
NORM_SLACK = 1e-8

Amplitude = tuple[float, float]
Label = tuple[str, ...]
Term = tuple[Amplitude, Label]
Vector = list[Term]


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class SubsystemDoc(_Model):
    name: str
    tokens: list[str]


class SpaceDoc(_Model):
    subsystems: list[SubsystemDoc]


class BeamsplitterStepDoc(_Model):
    kind: Literal["beamsplitter"] = "beamsplitter"
    input1: str
    input2: str
    output1: str
    output2: str
    inputs: Literal["both", "first"] = "both"
    signs: Literal["second-minus", "i-reflection"] = "second-minus"


class DetectionArmDoc(_Model):
    mode: str
    detector: str


class DetectionStepDoc(_Model):
    kind: Literal["detection"] = "detection"
    arms: list[DetectionArmDoc]
    absorbed: str = "∅"


class RuleDoc(_Model):
    source: Label
    targets: Vector


class RulesStepDoc(_Model):
    kind: Literal["rules"] = "rules"
    rules: list[RuleDoc]
    description: str = ""


StepDoc = Annotated[
    Union[BeamsplitterStepDoc, DetectionStepDoc, RulesStepDoc],
    Field(discriminator="kind"),
]


class FamilyTimeDoc(_Model):
    time: int
    alternatives: dict[str, list[Vector]] = Field(default_factory=dict)


class FamilyDoc(_Model):
    times: list[FamilyTimeDoc]


class EventTermDoc(_Model):
    time: int
    alternative: str


class ConsistencyCheckDoc(_Model):
    kind: Literal["consistency"] = "consistency"
    name: str
    family: str
    expect: bool = True
    note: str = ""


class ProbabilityCheckDoc(_Model):
    kind: Literal["probability"] = "probability"
    name: str
    family: str
    event: list[EventTermDoc]
    expect: float
    tol: float = 1e-10
    note: str = ""


class ConditionalCheckDoc(_Model):
    kind: Literal["conditional"] = "conditional"
    name: str
    family: str
    given: list[EventTermDoc]
    target: list[EventTermDoc]
    expect: float
    tol: float = 1e-10
    note: str = ""


class CompatibilityCheckDoc(_Model):
    kind: Literal["compatibility"] = "compatibility"
    name: str
    family_a: str
    family_b: str
    expect: bool
    witness_time: int | None = None
    note: str = ""


class MarginalAgreementCheckDoc(_Model):
    kind: Literal["marginal_agreement"] = "marginal_agreement"
    name: str
    family_a: str
    family_b: str
    time: int
    alternative: str
    tol: float = 1e-10
    note: str = ""


class TransportCheckDoc(_Model):
    kind: Literal["transport"] = "transport"
    name: str
    initial: Label
    final: Label
    steps: list[int] | None = None
    tol: float = 1e-10
    note: str = ""


class SpinConjunctionCheckDoc(_Model):
    kind: Literal["spin_conjunction"] = "spin_conjunction"
    name: str
    expect_commutator: float = 0.5
    tol: float = 1e-10
    min_idempotence_residual: float = 0.2
    note: str = ""


CheckDoc = Annotated[
    Union[
        ConsistencyCheckDoc,
        ProbabilityCheckDoc,
        ConditionalCheckDoc,
        CompatibilityCheckDoc,
        MarginalAgreementCheckDoc,
        TransportCheckDoc,
        SpinConjunctionCheckDoc,
    ],
    Field(discriminator="kind"),
]


class ScenarioDocument(_Model):
    schema_version: int = Field(alias="schemaVersion")
    name: str
    space: SpaceDoc
    steps: list[StepDoc] = Field(default_factory=list)
    initial: Vector
    families: dict[str, FamilyDoc] = Field(default_factory=dict)
    checks: list[CheckDoc] = Field(default_factory=list)


# ---------------------------------------------------------------------------
# semantic validation

def _vector_norm(vector: Vector) -> float:
    return math.sqrt(sum(re * re + im * im for (re, im), _ in vector))


def _check_finite(vector: Vector, where: str, diags: list[str]) -> bool:
    ok = True
    for (re, im), _ in vector:
        if not (math.isfinite(re) and math.isfinite(im)):
            diags.append(f"{where}: non-finite amplitude [{re!r}, {im!r}]")
            ok = False
    return ok


def _check_norm(vector: Vector, where: str, diags: list[str]) -> None:
    if not vector:
        diags.append(f"{where}: empty amplitude vector")
        return
    if not _check_finite(vector, where, diags):
        return
    norm = _vector_norm(vector)
    if abs(norm - 1.0) > NORM_SLACK:
        diags.append(
            f"{where}: norm {norm!r} is more than {NORM_SLACK:.0e} away from 1"
        )


class _LabelChecker:
    def __init__(self, space: SpaceDoc):
        self.token_sets = [set(sub.tokens) for sub in space.subsystems]

    def check(self, label: Label, where: str, diags: list[str]) -> None:
        if len(label) != len(self.token_sets):
            diags.append(
                f"{where}: label {list(label)} has {len(label)} tokens, "
                f"expected {len(self.token_sets)}"
            )
            return
        for i, (token, tokens) in enumerate(zip(label, self.token_sets)):
            if token not in tokens:
                diags.append(
                    f"{where}: undefined label token {token!r} for subsystem {i}"
                )


def document_diagnostics(doc: ScenarioDocument) -> list[str]:
    """All semantic violations of a structurally valid document."""
    diags: list[str] = []
    if doc.schema_version != SCHEMA_VERSION:
        diags.append(
            f"unrecognized schemaVersion {doc.schema_version}; this engine reads {SCHEMA_VERSION}"
        )

    subsystems = doc.space.subsystems
    if not subsystems:
        diags.append("space: needs at least one subsystem")
        return diags
    names = [sub.name for sub in subsystems]
    if len(set(names)) != len(names):
        diags.append("space: subsystem names must be distinct")
    for sub in subsystems:
        if not sub.tokens:
            diags.append(f"space: subsystem {sub.name!r} has no tokens")
        if len(set(sub.tokens)) != len(sub.tokens):
            diags.append(f"space: subsystem {sub.name!r} has duplicate tokens")
        for token in sub.tokens:
            if not token or LABEL_SEPARATOR in token:
                diags.append(f"space: subsystem {sub.name!r} has invalid token {token!r}")
    for sub in subsystems[1:]:
        if len(sub.tokens) != 2:
            diags.append(
                f"space: detector subsystem {sub.name!r} needs exactly "
                f"[ready, triggered] tokens, got {len(sub.tokens)}"
            )

    modes = set(subsystems[0].tokens)
    detector_names = {sub.name for sub in subsystems[1:]}
    labels = _LabelChecker(doc.space)

    for i, step in enumerate(doc.steps):
        where = f"steps[{i}]"
        if isinstance(step, BeamsplitterStepDoc):
            for token in (step.input1, step.input2, step.output1, step.output2):
                if token not in modes:
                    diags.append(f"{where}: unknown mode token {token!r}")
            if step.input1 == step.input2:
                diags.append(f"{where}: beamsplitter inputs collide ({step.input1!r})")
            if step.output1 == step.output2:
                diags.append(f"{where}: beamsplitter outputs collide ({step.output1!r})")
        elif isinstance(step, DetectionStepDoc):
            if not step.arms:
                diags.append(f"{where}: detection step needs at least one arm")
            if step.absorbed not in modes:
                diags.append(f"{where}: unknown absorbed token {step.absorbed!r}")
            arm_modes = [arm.mode for arm in step.arms]
            arm_detectors = [arm.detector for arm in step.arms]
            if len(set(arm_modes)) != len(arm_modes):
                diags.append(f"{where}: detection arms reuse a mode")
            if len(set(arm_detectors)) != len(arm_detectors):
                diags.append(f"{where}: detection arms reuse a detector")
            for arm in step.arms:
                if arm.mode not in modes:
                    diags.append(f"{where}: unknown mode token {arm.mode!r}")
                if arm.detector not in detector_names:
                    diags.append(f"{where}: unknown detector {arm.detector!r}")
        else:
            sources = [rule.source for rule in step.rules]
            if len(set(sources)) != len(sources):
                diags.append(f"{where}: duplicate rule sources")
            for j, rule in enumerate(step.rules):
                rule_where = f"{where}.rules[{j}]"
                labels.check(rule.source, rule_where, diags)
                for _, label in rule.targets:
                    labels.check(label, rule_where, diags)
                _check_norm(rule.targets, rule_where, diags)

    for _, label in doc.initial:
        labels.check(label, "initial", diags)
    _check_norm(doc.initial, "initial", diags)

    n_steps = len(doc.steps)
    for fam_name, fam in doc.families.items():
        where = f"families[{fam_name!r}]"
        times = [t.time for t in fam.times]
        if times != list(range(1, n_steps + 1)):
            diags.append(
                f"{where}: sampled times {times} must be exactly 1..{n_steps}"
            )
        for time_doc in fam.times:
            for alt_name, vectors in time_doc.alternatives.items():
                alt_where = f"{where}.t{time_doc.time}[{alt_name!r}]"
                if alt_name == "REST":
                    diags.append(f"{alt_where}: alternative name 'REST' is reserved")
                if not vectors:
                    diags.append(f"{alt_where}: alternative needs at least one vector")
                for vector in vectors:
                    for _, label in vector:
                        labels.check(label, alt_where, diags)
                    _check_norm(vector, alt_where, diags)

    _check_checks(doc, labels, diags)
    return diags


def _family_alternatives(doc: ScenarioDocument, family: str) -> dict[int, set[str]]:
    alternatives: dict[int, set[str]] = {}
    fam = doc.families.get(family)
    if fam is None:
        return alternatives
    for time_doc in fam.times:
        alternatives[time_doc.time] = set(time_doc.alternatives) | {"REST"}
    return alternatives


def _check_event(
    doc: ScenarioDocument,
    family: str,
    event: list[EventTermDoc],
    where: str,
    diags: list[str],
) -> None:
    known = _family_alternatives(doc, family)
    for term in event:
        if term.time not in known:
            diags.append(f"{where}: family {family!r} has no time t{term.time}")
        elif term.alternative not in known[term.time]:
            diags.append(
                f"{where}: family {family!r} has no alternative "
                f"{term.alternative!r} at t{term.time}"
            )


def _check_checks(
    doc: ScenarioDocument, labels: _LabelChecker, diags: list[str]
) -> None:
    names = [check.name for check in doc.checks]
    if len(set(names)) != len(names):
        diags.append("checks: names must be unique")
    for check in doc.checks:
        where = f"checks[{check.name!r}]"
        for attr in ("family", "family_a", "family_b"):
            family = getattr(check, attr, None)
            if family is not None and family not in doc.families:
                diags.append(f"{where}: unknown family {family!r}")
        if isinstance(check, ProbabilityCheckDoc):
            _check_event(doc, check.family, check.event, where, diags)
        elif isinstance(check, ConditionalCheckDoc):
            _check_event(doc, check.family, check.given, where, diags)
            _check_event(doc, check.family, check.target, where, diags)
        elif isinstance(check, MarginalAgreementCheckDoc):
            for family in (check.family_a, check.family_b):
                _check_event(
                    doc,
                    family,
                    [EventTermDoc(time=check.time, alternative=check.alternative)],
                    where,
                    diags,
                )
        elif isinstance(check, TransportCheckDoc):
            labels.check(check.initial, where, diags)
            labels.check(check.final, where, diags)
            for index in check.steps or []:
                if not 0 <= index < len(doc.steps):
                    diags.append(f"{where}: step index {index} out of range")
        tol = getattr(check, "tol", None)
        if tol is not None and not tol > 0:
            diags.append(f"{where}: tolerance must be positive")


def parse_document(text: str) -> ScenarioDocument:
    """Parse and fully validate a scenario document from JSON text."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError([f"invalid JSON: {exc}"]) from None
    try:
        doc = ScenarioDocument.model_validate(data)
    except ValidationError as exc:
        raise ParseError(
            [
                f"{'.'.join(str(part) for part in err['loc'])}: {err['msg']}"
                for err in exc.errors()
            ]
        ) from None
    diags = document_diagnostics(doc)
    if diags:
        raise ParseError(diags)
    return doc


def emit_document(doc: ScenarioDocument) -> str:
    return doc.model_dump_json(by_alias=True, indent=2)


# ---------------------------------------------------------------------------
# analysis report

class BranchReport(_Model):
    choices: list[str]
    probability: float


class ConditionalReport(_Model):
    given: list[EventTermDoc]
    target: list[EventTermDoc]
    probability: float


class FamilyReport(_Model):
    name: str
    consistent: bool
    max_offdiagonal: float
    tolerance: float
    branches: list[BranchReport] | None = None
    conditionals: list[ConditionalReport] = Field(default_factory=list)


class WitnessReport(_Model):
    time: int
    alternative_a: str
    alternative_b: str
    commutator_norm: float


class PairReport(_Model):
    family_a: str
    family_b: str
    compatible: bool
    commutation_witnesses: list[WitnessReport] = Field(default_factory=list)
    refinement_consistent: bool | None = None
    refinement_max_offdiagonal: float | None = None
    refinement_dropped: list[str] = Field(default_factory=list)


class CheckReport(_Model):
    name: str
    kind: str
    passed: bool
    observed: bool | float | None = None
    expected: bool | float | None = None
    tolerance: float | None = None
    detail: str = ""
    note: str = ""


class AnalysisReport(_Model):
    scenario: str
    dimension: int
    tolerance: float
    notes: list[str] = Field(default_factory=list)
    families: list[FamilyReport] = Field(default_factory=list)
    pairs: list[PairReport] = Field(default_factory=list)
    checks: list[CheckReport] = Field(default_factory=list)
    all_passed: bool = True


def emit_report(report: AnalysisReport) -> str:
    return report.model_dump_json(indent=2)


def parse_report(text: str) -> AnalysisReport:
    try:
        return AnalysisReport.model_validate_json(text)
    except ValidationError as exc:
        raise ParseError([str(exc)]) from None
