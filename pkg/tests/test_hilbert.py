import itertools
import math

import numpy as np
import pytest

from qhist.errors import DuplicateLabel, EmptySpace, SpaceMismatch, UnknownLabel, ZeroSpan
from qhist.hilbert import (
    BasisLabel,
    Projector,
    basis_state,
    commutator_norm,
    inner_product,
    apply,
    identity,
    make_space,
    product_space,
    projector_from_vectors,
    superpose,
)

S = 1.0 / math.sqrt(2.0)


def two_mode_space():
    return make_space([BasisLabel.of("c"), BasisLabel.of("d")])


def photon_space():
    return make_space([BasisLabel.of(m) for m in ("a", "c", "d", "e", "f", "∅")])


class TestSpaces:
    def test_two_label_space(self):
        space = make_space([BasisLabel.of("z+"), BasisLabel.of("z-")])
        assert space.dim == 2
        assert space.position(BasisLabel.of("z-")) == 1

    def test_product_space_dimension(self):
        # joint space photon x C x D; count checked by independent enumeration
        modes = ("a", "c", "d", "e", "f", "∅")
        space = product_space(modes, ("C", "C*"), ("D", "D*"))
        expected = len(list(itertools.product(modes, ("C", "C*"), ("D", "D*"))))
        assert expected == 24
        assert space.dim == 24
        assert BasisLabel.of("c", "C*", "D") in space

    def test_ordering_is_stable(self):
        labels = [BasisLabel.of(t) for t in ("f", "a", "c")]
        space = make_space(labels)
        assert space.labels == tuple(labels)

    def test_duplicate_label_rejected(self):
        with pytest.raises(DuplicateLabel):
            make_space([BasisLabel.of("x"), BasisLabel.of("x")])

    def test_empty_space_rejected(self):
        with pytest.raises(EmptySpace):
            make_space([])

    def test_label_rendering(self):
        assert str(BasisLabel.of("c", "C*", "D")) == "c,C*,D"

    def test_separator_token_rejected(self):
        with pytest.raises(ValueError):
            BasisLabel.of("c,d")


class TestStates:
    def test_equal_split_superposition(self):
        space = two_mode_space()
        s_state = superpose([(S, BasisLabel.of("c")), (S, BasisLabel.of("d"))], space)
        assert s_state.amplitude(BasisLabel.of("c")) == pytest.approx(S, abs=1e-15)
        assert s_state.amplitude(BasisLabel.of("d")) == pytest.approx(S, abs=1e-15)
        assert s_state.normalized

    def test_single_basis_ket(self):
        space = photon_space()
        a = superpose([(1.0, BasisLabel.of("a"))], space)
        assert a.normalized
        assert a.amplitude(BasisLabel.of("a")) == 1.0

    def test_minus_convention_output_state(self):
        # second beamsplitter output for the lower input: (-e + f)/sqrt(2)
        space = photon_space()
        v = superpose([(-S, BasisLabel.of("e")), (S, BasisLabel.of("f"))], space)
        assert v.amplitude(BasisLabel.of("e")) == pytest.approx(-S, abs=1e-15)
        assert v.normalized

    def test_repeated_label_accumulates(self):
        space = two_mode_space()
        v = superpose(
            [(0.5, BasisLabel.of("c")), (0.5, BasisLabel.of("c"))], space
        )
        assert v.amplitude(BasisLabel.of("c")) == 1.0

    def test_unknown_label(self):
        with pytest.raises(UnknownLabel):
            superpose([(1.0, BasisLabel.of("g"))], two_mode_space())


class TestInnerProduct:
    def test_normalized_state_self_product(self):
        space = two_mode_space()
        s_state = superpose([(S, BasisLabel.of("c")), (S, BasisLabel.of("d"))], space)
        assert inner_product(s_state, s_state) == pytest.approx(1.0, abs=1e-12)

    def test_distinct_basis_labels_orthogonal(self):
        space = two_mode_space()
        c = basis_state(space, BasisLabel.of("c"))
        d = basis_state(space, BasisLabel.of("d"))
        assert inner_product(c, d) == 0.0

    def test_mqs_pair_orthogonal(self):
        # U = (|E*F> + |EF*>)/sqrt2, V = (-|E*F> + |EF*>)/sqrt2:
        # <V|U> = (-1/2) + (1/2) = 0 by hand
        space = make_space([BasisLabel.of("∅", "E*", "F"), BasisLabel.of("∅", "E", "F*")])
        u = superpose([(S, space.labels[0]), (S, space.labels[1])], space)
        v = superpose([(-S, space.labels[0]), (S, space.labels[1])], space)
        assert inner_product(v, u) == pytest.approx(0.0, abs=1e-15)

    def test_conjugate_linearity_first_argument(self):
        space = two_mode_space()
        u = superpose([(0.6, space.labels[0]), (0.8j, space.labels[1])], space)
        v = superpose([(0.3 - 0.4j, space.labels[0]), (0.5, space.labels[1])], space)
        assert inner_product(u, v) == pytest.approx(np.conj(inner_product(v, u)), abs=1e-12)

    def test_space_mismatch(self):
        with pytest.raises(SpaceMismatch):
            inner_product(
                basis_state(two_mode_space(), BasisLabel.of("c")),
                basis_state(photon_space(), BasisLabel.of("c")),
            )


class TestApply:
    def test_identity(self):
        space = two_mode_space()
        s_state = superpose([(S, space.labels[0]), (S, space.labels[1])], space)
        out = apply(identity(space), s_state)
        np.testing.assert_allclose(out.amplitudes, s_state.amplitudes, atol=1e-15)

    def test_normalized_flag_recomputed(self):
        space = two_mode_space()
        from qhist.hilbert import Operator

        half = Operator(space, 0.5 * np.eye(2))
        out = apply(half, basis_state(space, space.labels[0]))
        assert not out.normalized
        assert out.norm == pytest.approx(0.5)


class TestProjectors:
    def test_basis_ray(self):
        space = two_mode_space()
        p = projector_from_vectors([basis_state(space, BasisLabel.of("c"))])
        assert p.rank == 1
        assert np.trace(p.matrix) == pytest.approx(1.0, abs=1e-12)

    def test_dependent_vector_dropped(self):
        # Gram-Schmidt by hand: e_c, e_d, then (e_c + e_d) has zero residual,
        # so the span is exactly the {c, d} plane
        space = photon_space()
        c = basis_state(space, BasisLabel.of("c"))
        d = basis_state(space, BasisLabel.of("d"))
        both = superpose([(1.0, BasisLabel.of("c")), (1.0, BasisLabel.of("d"))], space)
        p = projector_from_vectors([c, d, both])
        assert p.rank == 2
        expected = np.zeros((6, 6), dtype=complex)
        expected[1, 1] = expected[2, 2] = 1.0
        np.testing.assert_allclose(p.matrix, expected, atol=1e-12)

    def test_mqs_ray(self):
        space = make_space([BasisLabel.of("∅", "C*", "D"), BasisLabel.of("∅", "C", "D*")])
        mqs = superpose([(S, space.labels[0]), (S, space.labels[1])], space)
        p = projector_from_vectors([mqs])
        assert p.rank == 1
        residual = np.linalg.norm(p.matrix @ p.matrix - p.matrix)
        assert residual <= 1e-10

    def test_zero_span(self):
        space = two_mode_space()
        zero = superpose([], space)
        with pytest.raises(ZeroSpan):
            projector_from_vectors([zero])

    def test_space_mismatch(self):
        with pytest.raises(SpaceMismatch):
            projector_from_vectors(
                [
                    basis_state(two_mode_space(), BasisLabel.of("c")),
                    basis_state(photon_space(), BasisLabel.of("c")),
                ]
            )

    def test_from_matrix_rejects_non_projector(self):
        space = two_mode_space()
        with pytest.raises(ValueError):
            Projector.from_matrix(space, np.array([[0.5, 0.5], [0.5, 0.6]]))


class TestCommutatorNorm:
    def test_orthogonal_rays_commute(self):
        space = two_mode_space()
        p = projector_from_vectors([basis_state(space, BasisLabel.of("c"))])
        q = projector_from_vectors([basis_state(space, BasisLabel.of("d"))])
        assert commutator_norm(p, q) == pytest.approx(0.0, abs=1e-15)

    def test_spin_axes_spectral_half(self):
        # 2x2 by hand: PQ - QP = [[0, -1], [1, 0]]/2, singular values (1/2, 1/2)
        # => spectral norm 1/2, Frobenius norm sqrt(1/2)
        up, down = BasisLabel.of("z+"), BasisLabel.of("z-")
        space = make_space([up, down])
        p_z = projector_from_vectors([basis_state(space, up)])
        p_x = projector_from_vectors([superpose([(S, up), (S, down)], space)])
        assert commutator_norm(p_z, p_x, kind="spectral") == pytest.approx(0.5, abs=1e-12)
        assert commutator_norm(p_z, p_x) == pytest.approx(math.sqrt(0.5), abs=1e-12)

    def test_superposition_vs_arm_projector(self):
        # explicit 2x2 block computation in the {c, d} plane: nonzero commutator
        space = two_mode_space()
        p_s = projector_from_vectors(
            [superpose([(S, space.labels[0]), (S, space.labels[1])], space)]
        )
        p_c = projector_from_vectors([basis_state(space, space.labels[0])])
        assert commutator_norm(p_s, p_c) > 0.1

    def test_symmetry(self):
        space = two_mode_space()
        p = projector_from_vectors(
            [superpose([(0.6, space.labels[0]), (0.8, space.labels[1])], space)]
        )
        q = projector_from_vectors([basis_state(space, space.labels[0])])
        assert commutator_norm(p, q) == pytest.approx(commutator_norm(q, p), abs=1e-12)
