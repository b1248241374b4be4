"""Compilation of partial unitary specifications into verified unitary steps.

A time step is described only by its action on the basis states it
actually moves (beamsplitter rules, detector trigger rules).  Compilation
extends that partial action to a full unitary:

* every label that is neither a rule source nor overlapped by the rule
  targets keeps an identity column;
* the remaining columns are filled by deterministic Gram-Schmidt
  completion of the specified range, seeded in label order.

The chain operators of the shipped scenarios never leave the subspace the
rules reach, so results cannot depend on the completion choice; the step
records which columns were identity and which were completed so tests can
assert exactly that.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DuplicateLabel,
    ExtensionConflict,
    NonIsometricRules,
    NotUnitary,
    TokenCollision,
    UnknownLabel,
    UnknownToken,
)
from .hilbert import (
    STRUCTURAL_TOL,
    BasisLabel,
    HilbertSpace,
    Operator,
    product_space,
)

#: canonical token for "the photon has been absorbed by a detector"
ABSORBED = "∅"

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class Rule:
    """One column of a partial unitary: source ket and its image."""

    source: BasisLabel
    targets: tuple[tuple[complex, BasisLabel], ...]

    def __post_init__(self) -> None:
        targets = tuple((complex(a), l) for a, l in self.targets)
        object.__setattr__(self, "targets", targets)
        norm = math.sqrt(sum(abs(a) ** 2 for a, _ in targets))
        if abs(norm - 1.0) > STRUCTURAL_TOL:
            raise NonIsometricRules(
                f"rule for {self.source} has target norm {norm!r}, expected 1"
            )


@dataclass(frozen=True)
class PartialUnitarySpec:
    """Human-readable partial unitary: a list of source→image rules."""

    rules: tuple[Rule, ...]
    description: str = ""

    def __post_init__(self) -> None:
        rules = tuple(self.rules)
        object.__setattr__(self, "rules", rules)
        seen: set[BasisLabel] = set()
        for rule in rules:
            if rule.source in seen:
                raise DuplicateLabel(f"duplicate rule source {rule.source}")
            seen.add(rule.source)

    def restricted_to(self, *sources: BasisLabel) -> "PartialUnitarySpec":
        """Spec with only the rules for the given sources (single-input use)."""
        wanted = set(sources)
        known = {rule.source for rule in self.rules}
        missing = wanted - known
        if missing:
            raise UnknownLabel(f"no rule for source(s) {sorted(map(str, missing))}")
        kept = tuple(rule for rule in self.rules if rule.source in wanted)
        return PartialUnitarySpec(kept, self.description)


@dataclass(frozen=True)
class UnitaryStep:
    """Verified unitary for one time interval, with a compilation audit."""

    operator: Operator
    provenance: str = ""
    source_labels: tuple[BasisLabel, ...] = ()
    identity_labels: tuple[BasisLabel, ...] = ()
    completed_labels: tuple[BasisLabel, ...] = ()

    def __post_init__(self) -> None:
        u = self.operator.matrix
        eye = np.eye(u.shape[0])
        left = float(np.linalg.norm(u.conj().T @ u - eye))
        right = float(np.linalg.norm(u @ u.conj().T - eye))
        if left > STRUCTURAL_TOL or right > STRUCTURAL_TOL:
            raise NotUnitary(
                f"unitarity residuals {left:.3e} / {right:.3e} exceed {STRUCTURAL_TOL:.1e}"
            )

    @property
    def space(self) -> HilbertSpace:
        return self.operator.space

    @property
    def matrix(self) -> np.ndarray:
        return self.operator.matrix


def compile_step(
    space: HilbertSpace, spec: PartialUnitarySpec, *, tol: float = STRUCTURAL_TOL
) -> UnitaryStep:
    """Compile a partial spec into a full verified unitary on ``space``.

    Raises ``NonIsometricRules`` if the rule images are not orthonormal as
    a set, ``ExtensionConflict`` if the deterministic completion cannot
    find a unit column (unreachable for isometric rules, kept as a guard),
    and ``NotUnitary`` if the assembled matrix fails final verification.
    """
    d = space.dim
    sources = [rule.source for rule in spec.rules]
    for rule in spec.rules:
        space.position(rule.source)
        for _, target in rule.targets:
            space.position(target)

    specified = np.zeros((d, len(sources)), dtype=np.complex128)
    for j, rule in enumerate(spec.rules):
        for amp, target in rule.targets:
            specified[space.position(target), j] += amp
    if sources:
        gram = specified.conj().T @ specified
        residual = float(np.linalg.norm(gram - np.eye(len(sources))))
        if residual > tol:
            raise NonIsometricRules(
                f"rule images are not orthonormal (Gram residual {residual:.3e})"
            )

    matrix = np.zeros((d, d), dtype=np.complex128)
    columns: list[np.ndarray] = []
    for j, rule in enumerate(spec.rules):
        matrix[:, space.position(rule.source)] = specified[:, j]
        columns.append(specified[:, j])

    # Identity columns first: a label keeps its own direction iff that
    # direction is untouched by the specified range.  Doing this before any
    # completion prevents completions from stealing identity directions.
    source_set = set(sources)
    identity_labels: list[BasisLabel] = []
    conflicted: list[BasisLabel] = []
    for label in space.labels:
        if label in source_set:
            continue
        pos = space.position(label)
        overlap = max((abs(col[pos]) for col in columns), default=0.0)
        if overlap <= 1e-12:
            e = np.zeros(d, dtype=np.complex128)
            e[pos] = 1.0
            matrix[:, pos] = e
            columns.append(e)
            identity_labels.append(label)
        else:
            conflicted.append(label)

    completed_labels: list[BasisLabel] = []
    for label in conflicted:
        pos = space.position(label)
        column = _complete_column(space, columns, label)
        matrix[:, pos] = column
        columns.append(column)
        completed_labels.append(label)

    step = UnitaryStep(
        Operator(space, matrix),
        provenance=spec.description,
        source_labels=tuple(sources),
        identity_labels=tuple(identity_labels),
        completed_labels=tuple(completed_labels),
    )
    return step


def _complete_column(
    space: HilbertSpace, columns: Sequence[np.ndarray], label: BasisLabel
) -> np.ndarray:
    """Deterministic Gram-Schmidt completion column, seeded in label order.

    The seed scan starts at the conflicting label itself so a collision
    like "c is a target of the a→(c+d)/√2 rule" resolves to the orthogonal
    direction inside the specified range first.
    """
    d = space.dim
    start = space.position(label)
    order = list(range(start, d)) + list(range(start))
    for seed in order:
        w = np.zeros(d, dtype=np.complex128)
        w[seed] = 1.0
        for _ in range(2):
            for col in columns:
                w -= np.vdot(col, w) * col
        n = float(np.linalg.norm(w))
        if n > 1e-6:
            return w / n
    raise ExtensionConflict(
        f"no orthogonal completion column available for label {label}"
    )


# ---------------------------------------------------------------------------
# space schemes: one mode-carrying subsystem plus two-state detectors

@dataclass(frozen=True)
class Detector:
    """A two-state pointer subsystem: ready vs triggered."""

    name: str
    ready: str
    triggered: str


@dataclass(frozen=True)
class SpaceScheme:
    """Label scheme for one particle subsystem joined with detectors.

    The first label token is the particle mode; each detector contributes
    one further token (its ready or triggered state).
    """

    modes: tuple[str, ...]
    detectors: tuple[Detector, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "detectors", tuple(self.detectors))
        if len(set(self.modes)) != len(self.modes):
            raise TokenCollision("duplicate mode tokens")
        names = [det.name for det in self.detectors]
        if len(set(names)) != len(names):
            raise TokenCollision("duplicate detector names")

    def space(self) -> HilbertSpace:
        factors = [self.modes] + [(d.ready, d.triggered) for d in self.detectors]
        return product_space(*factors)

    def detector(self, name: str) -> Detector:
        for det in self.detectors:
            if det.name == name:
                return det
        raise UnknownToken(f"detector {name!r} not registered in the scheme")

    def require_mode(self, token: str) -> str:
        if token not in self.modes:
            raise UnknownToken(f"mode token {token!r} not registered in the scheme")
        return token

    def label(self, mode: str, detector_states: dict[str, str] | None = None) -> BasisLabel:
        """Joint label for a mode with detector tokens (default: all ready)."""
        states = detector_states or {}
        parts = [self.require_mode(mode)]
        for det in self.detectors:
            token = states.get(det.name, det.ready)
            if token not in (det.ready, det.triggered):
                raise UnknownToken(f"{token!r} is not a state of detector {det.name}")
            parts.append(token)
        return BasisLabel(tuple(parts))

    def detector_contexts(
        self, *, ready_only: Iterable[str] = (), exclude: Iterable[str] = ()
    ) -> list[tuple[str, ...]]:
        """All joint token assignments for the detectors not excluded.

        Detectors in ``ready_only`` are pinned to their ready token;
        detectors in ``exclude`` contribute no token at all (the caller
        fills their slot).  Context tuples follow detector order.
        """
        ready_set = set(ready_only)
        skip = set(exclude)
        choices: list[tuple[str, ...]] = []
        for det in self.detectors:
            if det.name in skip:
                continue
            if det.name in ready_set:
                choices.append((det.ready,))
            else:
                choices.append((det.ready, det.triggered))
        return list(itertools.product(*choices)) if choices else [()]


def beamsplitter_spec(
    in1: str,
    in2: str,
    out1: str,
    out2: str,
    signs: str = "second-minus",
) -> PartialUnitarySpec:
    """Symmetric beamsplitter rules on bare mode labels.

    The default ``second-minus`` convention sends the first input to
    ``(out1 + out2)/√2`` and the second to ``(-out1 + out2)/√2``.  The
    alternative ``i-reflection`` convention puts a factor ``i`` on the
    cross channel instead.  Use :meth:`PartialUnitarySpec.restricted_to`
    for a beamsplitter fed through one input only.
    """
    if in1 == in2:
        raise TokenCollision(f"input modes collide: {in1!r}")
    if out1 == out2:
        raise TokenCollision(f"output modes collide: {out1!r}")
    s = _INV_SQRT2
    o1, o2 = BasisLabel.of(out1), BasisLabel.of(out2)
    if signs == "second-minus":
        rows = [
            Rule(BasisLabel.of(in1), ((s, o1), (s, o2))),
            Rule(BasisLabel.of(in2), ((-s, o1), (s, o2))),
        ]
    elif signs == "i-reflection":
        rows = [
            Rule(BasisLabel.of(in1), ((s, o1), (1j * s, o2))),
            Rule(BasisLabel.of(in2), ((1j * s, o1), (s, o2))),
        ]
    else:
        raise ValueError(f"unknown beamsplitter sign convention {signs!r}")
    return PartialUnitarySpec(
        tuple(rows), description=f"beamsplitter {in1},{in2} -> {out1},{out2}"
    )


def lift_over_detectors(
    spec: PartialUnitarySpec, scheme: SpaceScheme
) -> PartialUnitarySpec:
    """Tensor-extend bare-mode rules over every detector context."""
    rules: list[Rule] = []
    for rule in spec.rules:
        (mode,) = rule.source.parts
        scheme.require_mode(mode)
        for ctx in scheme.detector_contexts():
            targets = []
            for amp, target in rule.targets:
                (target_mode,) = target.parts
                scheme.require_mode(target_mode)
                targets.append((amp, BasisLabel((target_mode,) + ctx)))
            rules.append(Rule(BasisLabel((mode,) + ctx), tuple(targets)))
    return PartialUnitarySpec(tuple(rules), spec.description)


def detection_spec(
    scheme: SpaceScheme,
    arms: Sequence[tuple[str, str]],
    absorbed: str = ABSORBED,
) -> PartialUnitarySpec:
    """Absorptive detection rules for detectors watching distinct modes.

    Each ``(mode, detector)`` arm maps (particle in mode, detector ready)
    to (particle absorbed, detector triggered).  Contexts of detectors not
    participating in this step are enumerated in full; the *other*
    participating detectors are pinned to ready, because a shared absorbed
    token cannot keep two simultaneous triggerings isometric.
    """
    scheme.require_mode(absorbed)
    if not arms:
        raise UnknownToken("detection step needs at least one (mode, detector) arm")
    modes = [m for m, _ in arms]
    names = [n for _, n in arms]
    if len(set(modes)) != len(modes) or len(set(names)) != len(names):
        raise TokenCollision("detection arms must use distinct modes and detectors")
    armed = set(names)
    rules: list[Rule] = []
    for mode, name in arms:
        scheme.require_mode(mode)
        det = scheme.detector(name)
        other_armed = armed - {name}
        for ctx in scheme.detector_contexts(ready_only=other_armed, exclude=(name,)):
            ctx_iter = iter(ctx)
            src_parts, tgt_parts = [mode], [absorbed]
            for d in scheme.detectors:
                if d.name == name:
                    src_parts.append(det.ready)
                    tgt_parts.append(det.triggered)
                else:
                    token = next(ctx_iter)
                    src_parts.append(token)
                    tgt_parts.append(token)
            rules.append(
                Rule(BasisLabel(tuple(src_parts)), ((1.0, BasisLabel(tuple(tgt_parts))),))
            )
    label = "+".join(f"{n}@{m}" for m, n in arms)
    return PartialUnitarySpec(tuple(rules), description=f"detection {label}")


def detector_spec(
    scheme: SpaceScheme, mode: str, detector: str, absorbed: str = ABSORBED
) -> PartialUnitarySpec:
    """Single-detector absorption rules over all other-subsystem contexts."""
    return detection_spec(scheme, [(mode, detector)], absorbed)
