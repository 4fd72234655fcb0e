import numpy as np
import pytest

from cohq import coherent, fock, models, rigging
from cohq.coherent import CoherentLabel, QuadratureSpec
from cohq.errors import NotPhysical, UnsupportedModel, UsageError
from cohq.models import ModelSpec


@pytest.fixture(scope="module")
def model_a():
    spec = ModelSpec.build("A", 6, cutoff=20)
    return spec, rigging.projector_for(spec), models.build_generators(spec)


@pytest.fixture(scope="module")
def model_b():
    spec = ModelSpec.build("B", 2, cutoff=24)
    return spec, rigging.projector_for(spec), models.build_generators(spec)


def test_projector_examples(model_a):
    spec, proj, _ = model_a
    assert proj.kernel_dim == 3
    assert (proj.P @ fock.basis_ket(spec.space, 0, 0)).norm() == 0.0
    shell = fock.basis_ket(spec.space, 1, 1)
    np.testing.assert_allclose((proj.P @ shell).amplitudes, shell.amplitudes, atol=1e-14)


@pytest.mark.parametrize("which", ["model_a", "model_b"])
def test_projector_is_idempotent_and_self_adjoint(which, request):
    spec, proj, _ = request.getfixturevalue(which)
    P = proj.P.matrix
    assert np.abs(P @ P - P).max() <= 1e-12
    assert proj.P.hermiticity_error() <= 1e-14


def test_projector_matches_explicit_lambda_average():
    spec = ModelSpec.build("A", 6, cutoff=6)
    phi = models.build_constraint(spec)
    proj = rigging.projector_for(spec)
    averaged = rigging.lambda_average(phi, spec.hbar, nodes=rigging.lambda_nodes_needed(phi, spec.hbar))
    assert np.abs(averaged.matrix - proj.P.matrix).max() <= 1e-12


def test_lambda_average_model_b():
    spec = ModelSpec.build("B", 4, cutoff=6)
    phi = models.build_constraint(spec)
    averaged = rigging.lambda_average(phi, spec.hbar, nodes=40)
    assert np.abs(averaged.matrix - rigging.projector_for(spec).P.matrix).max() <= 1e-12


def test_lambda_average_refuses_coarse_grid():
    spec = ModelSpec.build("A", 6, cutoff=6)
    with pytest.raises(UsageError):
        rigging.lambda_average(models.build_constraint(spec), spec.hbar, nodes=3)


def test_model_c_refused():
    with pytest.raises(UnsupportedModel):
        rigging.projector_for(ModelSpec.build("C", 4, cutoff=4))
    with pytest.raises(UnsupportedModel):
        rigging.group_average_projector(models.build_constraint(ModelSpec.build("C", 4, cutoff=4)))
    with pytest.raises(UnsupportedModel):
        rigging.lambda_averaged_hw_state(ModelSpec.build("C", 4, cutoff=4), 0.1, 0.1)


def test_physical_inner_product_hermitian(model_a):
    spec, proj, _ = model_a
    u = coherent.hw_state(spec.space, 0.5, 0.3j)
    v = coherent.hw_state(spec.space, -0.2, 0.7)
    assert rigging.physical_inner(proj, u, v) == pytest.approx(np.conj(rigging.physical_inner(proj, v, u)))
    assert rigging.physical_inner(proj, u, u).real >= 0


def test_not_physical(model_a):
    spec, proj, gen = model_a
    vac = fock.basis_ket(spec.space, 0, 0)
    with pytest.raises(NotPhysical):
        rigging.physical_expectation(proj, gen.Z, vac)


def test_physical_expectation_of_identity_is_normalised_overlap(model_a):
    spec, proj, _ = model_a
    u = coherent.hw_state(spec.space, 0.5, 0.3j)
    v = coherent.hw_state(spec.space, -0.2, 0.7)
    eye = fock.identity(spec.space)
    norm = np.sqrt(rigging.physical_inner(proj, u, u).real * rigging.physical_inner(proj, v, v).real)
    value = rigging.physical_expectation(proj, eye, u, v)
    assert value == pytest.approx(rigging.physical_inner(proj, u, v) / norm, abs=1e-14)


def test_average_hw_examples(model_a):
    spec, proj, _ = model_a
    s = spec.space
    assert rigging.average_hw_state(proj, 0, 0).norm() == 0.0
    psi = rigging.average_hw_state(proj, 1, 1)
    expected = np.zeros(s.dim, complex)
    for (n1, n2), c in (((0, 2), 1 / np.sqrt(2)), ((1, 1), 1.0), ((2, 0), 1 / np.sqrt(2))):
        expected[s.index(n1, n2)] = c * np.exp(-1)
    np.testing.assert_allclose(psi.amplitudes, expected, atol=1e-13)
    phi = models.build_constraint(spec)
    assert abs(fock.inner(psi, phi @ psi)) <= 1e-13


@pytest.mark.parametrize("model,r_sq,N", [("A", 6, 20), ("B", 2, 22), ("B", 4, 22)])
def test_projector_agrees_with_lambda_averaged_state(model, r_sq, N):
    spec = ModelSpec.build(model, r_sq, cutoff=N)
    proj = rigging.projector_for(spec)
    for z1, z2 in ((0.6, 0.4), (0.3j, 0.5), (-0.4 + 0.1j, 0.2)):
        direct = rigging.average_hw_state(proj, z1, z2)
        quad = rigging.lambda_averaged_hw_state(spec, z1, z2)
        assert (direct - quad).norm() <= 1e-10


def test_projector_commutes_with_generators(model_a, model_b):
    for spec, proj, gen in (model_a, model_b):
        margin = models.required_margin(gen)
        mask = fock.interior_mask(spec.space, margin)
        for G in gen:
            assert fock.interior_deviation(fock.commutator(proj.P, G), mask) <= 1e-12


def test_kin_phys_equality_model_a(model_a):
    spec, proj, gen = model_a
    rep = models.rep_index_from_R("A", 6)
    labels = [CoherentLabel(z, rep) for z in (0, 0.5, 1 + 1j)]
    report = rigging.verify_kin_phys_equality(spec, list(gen), labels, proj=proj)
    assert report.passed, report.summary_lines()
    control = [r for r in report.records if r.name.startswith("negative control")]
    assert control and control[0].deviation > 1e-3


def test_kin_phys_equality_model_b(model_b):
    spec, proj, gen = model_b
    report = rigging.verify_kin_phys_equality(spec, list(gen), [0, 0.3 * np.exp(1j * np.pi / 4)], proj=proj,
                                              tail_eps=1e-12)
    assert report.passed, report.summary_lines()


def test_kin_phys_equality_detects_a_wrong_projector(model_a):
    """Halving the projector breaks the physical norm, so the comparison must fail."""
    spec, proj, gen = model_a
    broken = rigging.PhysicalProjector(fock.scale(0.5, proj.P), proj.kernel_dim, proj.eigen_tolerance)
    report = rigging.verify_kin_phys_equality(spec, list(gen), [0, 0.5], proj=broken)
    assert not report.passed


def test_double_quadrature_overlap(model_a):
    spec, proj, gen = model_a
    emb = coherent.embed_irrep(spec, models.rep_index_from_R("A", 6))
    for z0, z1 in ((0.2, 0.7j), (1.5, -0.3), (0, 0)):
        direct = np.vdot(coherent.su2_amplitudes(1, z0), coherent.su2_amplitudes(1, z1))
        assert abs(rigging.double_quadrature_overlap(emb, z0, z1, QuadratureSpec(64, 64)) - direct) <= 1e-6
