import numpy as np
import pytest

import opsys.config as config
import opsys.systems as systems
from opsys.errors import (
    DimensionMismatch,
    DomainViolation,
    FieldMismatch,
    UnsupportedSystem,
)
from opsys.linalg import Field, is_psd, operator_norm
from opsys.maps import blockwise_transpose
from opsys.systems import SystemId, SystemKind

ALL_KINDS = list(SystemKind)
CRITERION_KINDS = [SystemKind.S, SystemKind.S_PRIME, SystemKind.T, SystemKind.R]


class TestSystemId:
    def test_field_and_dim(self):
        s = SystemId(SystemKind.R, 3)
        assert s.field is Field.REAL
        assert s.dim == 6
        assert str(s) == "R_3"

    def test_accepts_kind_value(self):
        assert SystemId("S'", 2).kind is SystemKind.S_PRIME

    def test_rejects_non_positive_size(self):
        with pytest.raises(DimensionMismatch, match="positive"):
            SystemId(SystemKind.A, 0)


class TestElement:
    def test_embed_layouts(self):
        C = np.array([[1.0, 2.0], [3.0, 4.0]])
        s = systems.element(SystemId(SystemKind.S, 2), a=1, b=-1, C=C)
        M = systems.embed(s)
        assert np.array_equal(M[:2, 2:], C)
        assert np.array_equal(M[2:, :2], C.T)
        assert np.array_equal(M[:2, :2], np.eye(2))

        t = systems.element(SystemId(SystemKind.T, 2), A=C, b=1j, c=2, d=3)
        M = systems.embed(t)
        assert np.array_equal(M[:2, :2], C)
        assert np.array_equal(M[:2, 2:], 1j * np.eye(2))
        assert np.array_equal(M[2:, 2:], 3 * np.eye(2))

    def test_real_system_rejects_complex_scalar(self):
        with pytest.raises(FieldMismatch, match="must be real"):
            systems.element(SystemId(SystemKind.S, 2), a=1j, b=0, C=np.eye(2))

    def test_real_system_rejects_complex_block(self):
        with pytest.raises(FieldMismatch, match="Block C must be real"):
            systems.element(SystemId(SystemKind.S, 2), a=0, b=0, C=1j * np.eye(2))

    def test_block_size_checked(self):
        with pytest.raises(DimensionMismatch, match="Block A must be 2x2"):
            systems.element(SystemId(SystemKind.T, 2), A=np.eye(3), b=0, c=0, d=0)

    def test_params_type_checked(self):
        params = systems.TransposePairParams(a=0, b=0, C=np.eye(2))
        with pytest.raises(DomainViolation, match="ScalarTailParams"):
            systems.SystemElement(SystemId(SystemKind.T, 2), params)

    def test_equality_compares_embeddings(self):
        s = SystemId(SystemKind.S, 2)
        e1 = systems.element(s, a=1, b=2, C=np.eye(2))
        e2 = systems.element(s, a=1.0, b=2.0, C=np.eye(2))
        assert e1 == e2
        assert e1 != systems.element(s, a=1, b=3, C=np.eye(2))


class TestMembership:
    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_extract_inverts_embed(self, kind):
        s = SystemId(kind, 3)
        e = systems.random_element(s, (5, 1))
        M = systems.embed(e)
        assert systems.contains(s, M)
        assert systems.extract(s, M) == e

    def test_real_system_rejects_complex_matrix(self):
        s = SystemId(SystemKind.R, 2)
        M = systems.embed(systems.random_element(s, 0)).astype(complex)
        assert systems.contains(s, M)
        M[0, 1] += 1j
        assert not systems.contains(s, M)

    def test_transpose_pair_pattern(self):
        s = SystemId(SystemKind.S, 2)
        M = systems.embed(systems.element(s, a=1, b=1, C=np.array([[0, 1], [0, 0]])))
        M[2, 0] = 5.0
        assert not systems.contains(s, M)
        with pytest.raises(DomainViolation, match="does not lie in S_2"):
            systems.extract(s, M)

    def test_carrier_size_checked(self):
        with pytest.raises(DimensionMismatch, match="4x4"):
            systems.contains(SystemId(SystemKind.A, 2), np.eye(6))


class TestCriterion:
    def test_scalar_corner_examples(self):
        s = SystemId(SystemKind.S, 3)
        eye = np.eye(3)
        assert systems.is_positive_by_criterion(
            systems.element(s, a=1, b=1, C=0.5 * eye)
        )
        assert not systems.is_positive_by_criterion(
            systems.element(s, a=1, b=1, C=2 * eye)
        )
        assert systems.is_positive_by_criterion(systems.element(s, a=0, b=1, C=0 * eye))
        assert not systems.is_positive_by_criterion(
            systems.element(s, a=0, b=1, C=np.diag([1.0, 0.0, 0.0]))
        )

    def test_complex_corner_is_not_positive(self):
        s = SystemId(SystemKind.S_PRIME, 2)
        e = systems.element(s, a=1, b=1, C=0.1j * np.eye(2))
        assert not systems.is_positive_by_criterion(e)
        assert not is_psd(systems.embed(e)).psd

    @pytest.mark.parametrize("eps", [1e-2, 1e-5])
    def test_complex_corner_positives_are_real(self, eps):
        s = SystemId(SystemKind.S_PRIME, 3)
        rng = np.random.default_rng(12)
        for _ in range(100):
            a, b = rng.uniform(0.1, 2.0, size=2)
            C = rng.normal(size=(3, 3))
            C *= (1 - 1e-3) * np.sqrt(a * b) / operator_norm(C)
            inside = systems.element(s, a=a, b=b, C=C)
            assert systems.is_positive_by_criterion(inside)
            assert is_psd(systems.embed(inside)).psd

            # the real corner sits just inside the boundary; any imaginary
            # part leaves the cone
            G = rng.normal(size=(3, 3))
            e = systems.element(s, a=a, b=b, C=C + 1j * eps * G)
            assert not systems.is_positive_by_criterion(e)
            check = is_psd(systems.embed(e))
            assert not check.psd
            assert check.reason == "not-hermitian"

    def test_scalar_tail_boundary(self):
        s = SystemId(SystemKind.T, 2)
        on_boundary = systems.element(s, A=np.eye(2), b=1, c=1, d=1)
        outside = systems.element(s, A=np.eye(2), b=1.1, c=1.1, d=1)
        wrong_c = systems.element(s, A=np.eye(2), b=0.5j, c=0.5j, d=1)
        assert systems.is_positive_by_criterion(on_boundary)
        assert not systems.is_positive_by_criterion(outside)
        assert not systems.is_positive_by_criterion(wrong_c)

    def test_zero_tail_needs_zero_corner(self):
        s = SystemId(SystemKind.R, 2)
        assert systems.is_positive_by_criterion(
            systems.element(s, A=np.eye(2), b=0, c=0, d=0)
        )
        assert not systems.is_positive_by_criterion(
            systems.element(s, A=np.eye(2), b=0.1, c=0.1, d=0)
        )

    def test_unsupported_system(self):
        e = systems.random_element(SystemId(SystemKind.A, 2), 0)
        with pytest.raises(UnsupportedSystem, match="is_positive_by_criterion"):
            systems.is_positive_by_criterion(e)

    @pytest.mark.parametrize("kind", CRITERION_KINDS)
    @pytest.mark.parametrize("n", [1, 2, 5])
    def test_agrees_with_eigen_oracle(self, kind, n):
        s = SystemId(kind, n)
        checked = 0
        for trial in range(300):
            e = systems.random_self_adjoint_element(s, (7, n, trial))
            if systems.boundary_margin(e) <= config.BOUNDARY_MARGIN:
                continue
            checked += 1
            assert systems.is_positive_by_criterion(e) == is_psd(systems.embed(e)).psd
        assert checked > 250

    @pytest.mark.parametrize("kind", CRITERION_KINDS)
    def test_self_adjoint_samples_are_balanced(self, kind):
        s = SystemId(kind, 3)
        positives = sum(
            is_psd(systems.embed(systems.random_self_adjoint_element(s, t))).psd
            for t in range(200)
        )
        assert 10 < positives < 190


class TestSampling:
    @pytest.mark.parametrize("kind", CRITERION_KINDS)
    def test_positive_samples(self, kind):
        s = SystemId(kind, 4)
        for trial in range(50):
            zero_corner = trial % 5 == 0
            e = systems.random_positive_element(s, (1, trial), zero_corner)
            assert is_psd(systems.embed(e)).psd
            assert systems.is_positive_by_criterion(e)

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_positive_samples_for_every_kind(self, kind):
        s = SystemId(kind, 2)
        e = systems.random_positive_element(s, (6, ALL_KINDS.index(kind)))
        assert e.system == s
        assert is_psd(systems.embed(e), config.TOL_IDENTITY).psd

    def test_positive_scalar_corner_samples(self):
        s = SystemId(SystemKind.A, 3)
        for trial in range(30):
            e = systems.random_positive_element(s, trial)
            assert np.allclose(e.params.C, e.params.B.conj().T)
            assert is_psd(systems.embed(e)).psd

    def test_zero_corner(self):
        e = systems.random_positive_element(SystemId(SystemKind.S, 3), 0, True)
        assert e.params.a == 0
        assert np.allclose(e.params.C, 0)

    def test_seed_determines_sample(self):
        s = SystemId(SystemKind.T, 3)
        assert systems.random_element(s, (4, 2)) == systems.random_element(s, (4, 2))
        assert systems.random_element(s, (4, 2)) != systems.random_element(s, (4, 3))

    def test_random_element_rejects_bad_scale(self):
        with pytest.raises(ValueError, match="scale"):
            systems.random_element(SystemId(SystemKind.A, 2), 0, scale=0)

    @pytest.mark.parametrize("rank_one", [True, False])
    def test_full_positive(self, rank_one):
        P = systems.random_full_positive(3, Field.COMPLEX, 9, rank_one=rank_one)
        assert P.shape == (6, 6)
        assert is_psd(P).psd
        if rank_one:
            assert np.trace(P).real == pytest.approx(1.0)

    def test_canonical_witness(self):
        for n in range(2, 7):
            W = systems.canonical_witness(n)
            assert is_psd(W).psd
            assert is_psd(blockwise_transpose(W), tol=0).min_eigenvalue == (
                pytest.approx(-1.0, abs=1e-10)
            )

    def test_canonical_witness_needs_two(self):
        with pytest.raises(DimensionMismatch, match="n >= 2"):
            systems.canonical_witness(1)

    def test_full_positive_sample_starts_with_witness(self):
        P = systems.full_positive_sample(3, Field.COMPLEX, 0, 0)
        assert np.array_equal(P, systems.canonical_witness(3))


class TestParameters:
    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_parameter_vector(self, kind):
        s = SystemId(kind, 3)
        e = systems.random_element(s, 2)
        x = systems.element_parameters(e)
        assert x.size == systems.parameter_count(s)
        assert systems.element_from_parameters(s, x) == e

    def test_counts(self):
        assert systems.parameter_count(SystemId(SystemKind.S, 2)) == 6
        assert systems.parameter_count(SystemId(SystemKind.T, 2)) == 14

    def test_wrong_length(self):
        s = SystemId(SystemKind.S, 2)
        with pytest.raises(DimensionMismatch, match="takes 6 parameters"):
            systems.element_from_parameters(s, np.zeros(8))


class TestBoundaryMargin:
    def test_violated_element_reports_violation(self):
        s = SystemId(SystemKind.S, 2)
        e = systems.element(s, a=1, b=1, C=2 * np.eye(2))
        assert systems.boundary_margin(e) == pytest.approx(1.0)

    def test_interior_element(self):
        s = SystemId(SystemKind.S, 2)
        e = systems.element(s, a=1, b=1, C=np.zeros((2, 2)))
        assert systems.boundary_margin(e) == pytest.approx(1.0)
        assert operator_norm(systems.embed(e)) == pytest.approx(1.0)
