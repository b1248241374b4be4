"""Built-in delayed-choice scenarios and the document compiler.

Two Mach-Zehnder configurations are shipped, differing in where the
which-path detectors sit:

* ``fig1a`` — detectors C and D watch the interferometer arms.  Families:
  ``arm`` (photon in a definite arm, then a definite detector fires),
  ``superposition-mqs`` (photon in the coherent arm superposition, then the
  detector pair lands in a macroscopic superposition of its pointer
  states) and ``superposition-pointer`` (coherent superposition at the
  intermediate time, pointer basis at the end).
* ``fig1b`` — the arm detectors are removed; the beams recombine on a
  second beamsplitter followed by detectors E and F.  Families:
  ``superposition`` (coherent state inside, then output channel, then
  pointer) and ``arm-mqs`` (definite arm inside, ending in macroscopic
  superpositions of the E/F pointers).
* ``spin`` — the two-dimensional conjunction demonstration; no dynamics.

Builders construct a :class:`~qhist.schemas.ScenarioDocument` first and
compile it through the same path as user files, so built-ins and documents
can never drift apart.  ``all_detectors=True`` puts all four detectors into
one 96-dimensional space; the extra pair stays passive and every reported
number is unchanged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .dynamics import (
    ABSORBED,
    Detector,
    PartialUnitarySpec,
    Rule,
    SpaceScheme,
    UnitaryStep,
    beamsplitter_spec,
    compile_step,
    detection_spec,
    lift_over_detectors,
)
from .errors import ParseError, UnknownScenario
from .hilbert import BasisLabel, HilbertSpace, StateVector, projector_from_vectors, superpose
from .histories import HistoryFamily, SampleSpace, complete_sample_space
from .schemas import (
    SCHEMA_VERSION,
    BeamsplitterStepDoc,
    CheckDoc,
    CompatibilityCheckDoc,
    ConditionalCheckDoc,
    ConsistencyCheckDoc,
    DetectionArmDoc,
    DetectionStepDoc,
    EventTermDoc,
    FamilyDoc,
    FamilyTimeDoc,
    MarginalAgreementCheckDoc,
    ProbabilityCheckDoc,
    ScenarioDocument,
    SpaceDoc,
    SpinConjunctionCheckDoc,
    SubsystemDoc,
    TransportCheckDoc,
    Vector,
    document_diagnostics,
)

MODES = ("a", "c", "d", "e", "f", ABSORBED)

_S = 1.0 / math.sqrt(2.0)

#: renormalizations smaller than this are not worth a note
_EXACT_TOL = 1e-12


@dataclass(frozen=True)
class Scenario:
    """A compiled scenario: space, dynamics, families and executable checks."""

    name: str
    scheme: SpaceScheme
    space: HilbertSpace
    steps: tuple[UnitaryStep, ...]
    families: dict[str, HistoryFamily]
    checks: tuple[CheckDoc, ...]
    document: ScenarioDocument
    notes: tuple[str, ...] = ()

    def family(self, name: str) -> HistoryFamily:
        try:
            return self.families[name]
        except KeyError:
            raise UnknownScenario(
                f"scenario {self.name!r} has no family {name!r}"
            ) from None


def _compile_vector(
    vector: Vector, space: HilbertSpace, where: str, notes: list[str]
) -> StateVector:
    state = superpose(
        [(complex(re, im), BasisLabel(tuple(label))) for (re, im), label in vector],
        space,
    )
    deviation = abs(state.norm - 1.0)
    if deviation <= _EXACT_TOL:
        return state
    if deviation > 1e-8:
        raise ParseError([f"{where}: norm {state.norm!r} too far from 1"])
    notes.append(f"renormalized {where} (norm was off by {deviation:.2e})")
    return StateVector(space, state.amplitudes / state.norm)


def _compile_steps(
    doc: ScenarioDocument, scheme: SpaceScheme, space: HilbertSpace, notes: list[str]
) -> tuple[UnitaryStep, ...]:
    steps: list[UnitaryStep] = []
    for i, step_doc in enumerate(doc.steps):
        if isinstance(step_doc, BeamsplitterStepDoc):
            spec = beamsplitter_spec(
                step_doc.input1,
                step_doc.input2,
                step_doc.output1,
                step_doc.output2,
                signs=step_doc.signs,
            )
            if step_doc.inputs == "first":
                spec = spec.restricted_to(BasisLabel.of(step_doc.input1))
            spec = lift_over_detectors(spec, scheme)
        elif isinstance(step_doc, DetectionStepDoc):
            spec = detection_spec(
                scheme,
                [(arm.mode, arm.detector) for arm in step_doc.arms],
                absorbed=step_doc.absorbed,
            )
        else:
            rules = []
            for j, rule_doc in enumerate(step_doc.rules):
                where = f"steps[{i}].rules[{j}]"
                norm = math.sqrt(
                    sum(re * re + im * im for (re, im), _ in rule_doc.targets)
                )
                scale = 1.0
                if abs(norm - 1.0) > _EXACT_TOL:
                    notes.append(
                        f"renormalized {where} (norm was off by {abs(norm - 1.0):.2e})"
                    )
                    scale = 1.0 / norm
                rules.append(
                    Rule(
                        BasisLabel(tuple(rule_doc.source)),
                        tuple(
                            (complex(re, im) * scale, BasisLabel(tuple(label)))
                            for (re, im), label in rule_doc.targets
                        ),
                    )
                )
            spec = PartialUnitarySpec(tuple(rules), step_doc.description)
        steps.append(compile_step(space, spec))
    return tuple(steps)


def compile_document(doc: ScenarioDocument) -> Scenario:
    """Build the executable scenario for a validated document."""
    diags = document_diagnostics(doc)
    if diags:
        raise ParseError(diags)
    subsystems = doc.space.subsystems
    scheme = SpaceScheme(
        tuple(subsystems[0].tokens),
        tuple(
            Detector(sub.name, sub.tokens[0], sub.tokens[1]) for sub in subsystems[1:]
        ),
    )
    space = scheme.space()
    notes: list[str] = []
    steps = _compile_steps(doc, scheme, space, notes)
    initial = _compile_vector(doc.initial, space, "initial state", notes)

    families: dict[str, HistoryFamily] = {}
    for fam_name, fam_doc in doc.families.items():
        sample_spaces = []
        for time_doc in fam_doc.times:
            alternatives = []
            for alt_name, vectors in time_doc.alternatives.items():
                where = f"families[{fam_name!r}].t{time_doc.time}[{alt_name!r}]"
                states = [
                    _compile_vector(vector, space, where, notes) for vector in vectors
                ]
                alternatives.append((alt_name, projector_from_vectors(states)))
            sample_spaces.append(
                complete_sample_space(
                    SampleSpace(time_doc.time, tuple(alternatives)), space
                )
            )
        families[fam_name] = HistoryFamily(space, initial, steps, tuple(sample_spaces))

    return Scenario(
        name=doc.name,
        scheme=scheme,
        space=space,
        steps=steps,
        families=families,
        checks=tuple(doc.checks),
        document=doc,
        notes=tuple(notes),
    )


def serialize_scenario(scenario: Scenario) -> ScenarioDocument:
    """The document a scenario was compiled from (round-trip safe)."""
    return scenario.document


# ---------------------------------------------------------------------------
# document builders

def _term(amp: float, label: tuple[str, ...]) -> tuple[tuple[float, float], tuple[str, ...]]:
    return ((float(amp), 0.0), label)


class _Labels:
    """Joint-label helper: mode plus detector tokens, default all ready."""

    def __init__(self, detectors: list[tuple[str, str, str]]):
        self.detectors = detectors

    def __call__(self, mode: str, **states: str) -> tuple[str, ...]:
        parts = [mode]
        for name, ready, triggered in self.detectors:
            token = states.get(name, ready)
            assert token in (ready, triggered)
            parts.append(token)
        return tuple(parts)


def _space_doc(detectors: list[tuple[str, str, str]]) -> SpaceDoc:
    return SpaceDoc(
        subsystems=[SubsystemDoc(name="photon", tokens=list(MODES))]
        + [
            SubsystemDoc(name=name, tokens=[ready, triggered])
            for name, ready, triggered in detectors
        ]
    )


_CD = [("C", "C", "C*"), ("D", "D", "D*")]
_EF = [("E", "E", "E*"), ("F", "F", "F*")]


def fig1a_document(all_detectors: bool = False) -> ScenarioDocument:
    """Which-path configuration: detectors in both interferometer arms."""
    detectors = _CD + (_EF if all_detectors else [])
    label = _Labels(detectors)
    arm_c, arm_d = label("c"), label("d")
    c_fired, d_fired = label(ABSORBED, C="C*"), label(ABSORBED, D="D*")

    families = {
        "arm": FamilyDoc(
            times=[
                FamilyTimeDoc(
                    time=1,
                    alternatives={
                        "c": [[_term(1.0, arm_c)]],
                        "d": [[_term(1.0, arm_d)]],
                    },
                ),
                FamilyTimeDoc(
                    time=2,
                    alternatives={
                        "C*": [[_term(1.0, c_fired)]],
                        "D*": [[_term(1.0, d_fired)]],
                    },
                ),
            ]
        ),
        "superposition-mqs": FamilyDoc(
            times=[
                FamilyTimeDoc(
                    time=1,
                    alternatives={"c+d": [[_term(_S, arm_c), _term(_S, arm_d)]]},
                ),
                FamilyTimeDoc(
                    time=2,
                    alternatives={
                        "mqs+": [[_term(_S, c_fired), _term(_S, d_fired)]]
                    },
                ),
            ]
        ),
        "superposition-pointer": FamilyDoc(
            times=[
                FamilyTimeDoc(
                    time=1,
                    alternatives={"c+d": [[_term(_S, arm_c), _term(_S, arm_d)]]},
                ),
                FamilyTimeDoc(
                    time=2,
                    alternatives={
                        "C*": [[_term(1.0, c_fired)]],
                        "D*": [[_term(1.0, d_fired)]],
                    },
                ),
            ]
        ),
    }

    checks: list[CheckDoc] = [
        ConsistencyCheckDoc(
            name="arm-family-consistent",
            family="arm",
            note="a definite arm followed by a definite detector is a valid description",
        ),
        ProbabilityCheckDoc(
            name="c-detector-fires-half",
            family="arm",
            event=[EventTermDoc(time=2, alternative="C*")],
            expect=0.5,
        ),
        ProbabilityCheckDoc(
            name="d-detector-fires-half",
            family="arm",
            event=[EventTermDoc(time=2, alternative="D*")],
            expect=0.5,
        ),
        ConditionalCheckDoc(
            name="retrodict-arm-from-c-trigger",
            family="arm",
            given=[EventTermDoc(time=2, alternative="C*")],
            target=[EventTermDoc(time=1, alternative="c")],
            expect=1.0,
            note="once C has fired, the photon was certainly in the c arm earlier",
        ),
        ConsistencyCheckDoc(name="mqs-family-consistent", family="superposition-mqs"),
        ProbabilityCheckDoc(
            name="mqs-branch-certain",
            family="superposition-mqs",
            event=[EventTermDoc(time=2, alternative="mqs+")],
            expect=1.0,
            note="the single dynamically possible branch ends in the detector-pair superposition",
        ),
        ConsistencyCheckDoc(
            name="pointer-family-consistent", family="superposition-pointer"
        ),
        CompatibilityCheckDoc(
            name="arm-vs-mqs-incompatible",
            family_a="arm",
            family_b="superposition-mqs",
            expect=False,
            witness_time=2,
            note="pointer outcomes do not commute with the pointer superposition",
        ),
        CompatibilityCheckDoc(
            name="arm-vs-pointer-incompatible",
            family_a="arm",
            family_b="superposition-pointer",
            expect=False,
            witness_time=1,
            note="definite arm and coherent superposition cannot be combined at t1",
        ),
        MarginalAgreementCheckDoc(
            name="c-trigger-probability-agrees",
            family_a="arm",
            family_b="superposition-pointer",
            time=2,
            alternative="C*",
            note="families sharing the pointer event assign it the same probability",
        ),
        MarginalAgreementCheckDoc(
            name="d-trigger-probability-agrees",
            family_a="arm",
            family_b="superposition-pointer",
            time=2,
            alternative="D*",
        ),
    ]

    return ScenarioDocument(
        schema_version=SCHEMA_VERSION,
        name="fig1a" + ("-all-detectors" if all_detectors else ""),
        space=_space_doc(detectors),
        steps=[
            BeamsplitterStepDoc(
                input1="a", input2="d", output1="c", output2="d", inputs="first"
            ),
            DetectionStepDoc(
                arms=[
                    DetectionArmDoc(mode="c", detector="C"),
                    DetectionArmDoc(mode="d", detector="D"),
                ]
            ),
        ],
        initial=[_term(1.0, label("a"))],
        families=families,
        checks=checks,
    )


def fig1b_document(all_detectors: bool = False) -> ScenarioDocument:
    """Interference configuration: arm detectors removed, beams recombined."""
    detectors = (_CD if all_detectors else []) + _EF
    label = _Labels(detectors)
    arm_c, arm_d = label("c"), label("d")
    out_e, out_f = label("e"), label("f")
    e_fired, f_fired = label(ABSORBED, E="E*"), label(ABSORBED, F="F*")

    families = {
        "superposition": FamilyDoc(
            times=[
                FamilyTimeDoc(
                    time=1,
                    alternatives={"c+d": [[_term(_S, arm_c), _term(_S, arm_d)]]},
                ),
                FamilyTimeDoc(
                    time=2,
                    alternatives={
                        "e": [[_term(1.0, out_e)]],
                        "f": [[_term(1.0, out_f)]],
                    },
                ),
                FamilyTimeDoc(
                    time=3,
                    alternatives={
                        "E*": [[_term(1.0, e_fired)]],
                        "F*": [[_term(1.0, f_fired)]],
                    },
                ),
            ]
        ),
        "arm-mqs": FamilyDoc(
            times=[
                FamilyTimeDoc(
                    time=1,
                    alternatives={
                        "c": [[_term(1.0, arm_c)]],
                        "d": [[_term(1.0, arm_d)]],
                    },
                ),
                FamilyTimeDoc(
                    time=2,
                    alternatives={
                        "e+f": [[_term(_S, out_e), _term(_S, out_f)]],
                        "f-e": [[_term(-_S, out_e), _term(_S, out_f)]],
                    },
                ),
                FamilyTimeDoc(
                    time=3,
                    alternatives={
                        "mqs+": [[_term(_S, e_fired), _term(_S, f_fired)]],
                        "mqs-": [[_term(-_S, e_fired), _term(_S, f_fired)]],
                    },
                ),
            ]
        ),
    }

    checks: list[CheckDoc] = [
        TransportCheckDoc(
            name="interference-recombines-into-f",
            initial=label("a"),
            final=out_f,
            steps=[0, 1],
            note="both beamsplitters send the entrance mode into the f channel",
        ),
        ConsistencyCheckDoc(
            name="superposition-family-consistent", family="superposition"
        ),
        ProbabilityCheckDoc(
            name="f-detector-fires-certainly",
            family="superposition",
            event=[EventTermDoc(time=3, alternative="F*")],
            expect=1.0,
        ),
        ProbabilityCheckDoc(
            name="e-detector-never-fires",
            family="superposition",
            event=[EventTermDoc(time=3, alternative="E*")],
            expect=0.0,
            tol=1e-12,
            note="dynamically impossible branch, kept with probability zero",
        ),
        ConditionalCheckDoc(
            name="retrodict-superposition-from-f-trigger",
            family="superposition",
            given=[EventTermDoc(time=3, alternative="F*")],
            target=[EventTermDoc(time=1, alternative="c+d")],
            expect=1.0,
            note="the photon was certainly in the coherent superposition inside",
        ),
        ConsistencyCheckDoc(name="arm-mqs-family-consistent", family="arm-mqs"),
        ProbabilityCheckDoc(
            name="mqs-plus-branch-half",
            family="arm-mqs",
            event=[EventTermDoc(time=3, alternative="mqs+")],
            expect=0.5,
        ),
        ProbabilityCheckDoc(
            name="mqs-minus-branch-half",
            family="arm-mqs",
            event=[EventTermDoc(time=3, alternative="mqs-")],
            expect=0.5,
        ),
        CompatibilityCheckDoc(
            name="superposition-vs-arm-incompatible",
            family_a="superposition",
            family_b="arm-mqs",
            expect=False,
            witness_time=1,
            note="same dynamics, but the two descriptions cannot be combined",
        ),
    ]

    return ScenarioDocument(
        schema_version=SCHEMA_VERSION,
        name="fig1b" + ("-all-detectors" if all_detectors else ""),
        space=_space_doc(detectors),
        steps=[
            BeamsplitterStepDoc(
                input1="a", input2="d", output1="c", output2="d", inputs="first"
            ),
            BeamsplitterStepDoc(input1="c", input2="d", output1="e", output2="f"),
            DetectionStepDoc(
                arms=[
                    DetectionArmDoc(mode="e", detector="E"),
                    DetectionArmDoc(mode="f", detector="F"),
                ]
            ),
        ],
        initial=[_term(1.0, label("a"))],
        families=families,
        checks=checks,
    )


def spin_document() -> ScenarioDocument:
    """Two-dimensional conjunction demonstration; no dynamics, no families."""
    return ScenarioDocument(
        schema_version=SCHEMA_VERSION,
        name="spin",
        space=SpaceDoc(subsystems=[SubsystemDoc(name="spin", tokens=["z+", "z-"])]),
        steps=[],
        initial=[_term(1.0, ("z+",))],
        families={},
        checks=[
            SpinConjunctionCheckDoc(
                name="no-joint-spin-ray",
                note="spin-up-along-x AND spin-up-along-z has no projector to live on",
            )
        ],
    )


def build_fig1a(all_detectors: bool = False) -> Scenario:
    return compile_document(fig1a_document(all_detectors))


def build_fig1b(all_detectors: bool = False) -> Scenario:
    return compile_document(fig1b_document(all_detectors))


def build_spin_half() -> Scenario:
    return compile_document(spin_document())


BUILTIN_BUILDERS = {
    "fig1a": build_fig1a,
    "fig1b": build_fig1b,
    "spin": build_spin_half,
}


def builtin_names() -> list[str]:
    return list(BUILTIN_BUILDERS)


def build_builtin(name: str) -> Scenario:
    try:
        builder = BUILTIN_BUILDERS[name]
    except KeyError:
        raise UnknownScenario(
            f"unknown scenario {name!r}; built-ins: {', '.join(BUILTIN_BUILDERS)}"
        ) from None
    return builder()
