import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from cohq import classical, coherent, models
from cohq.classical import PhasePoint, ReducedCoords
from cohq.errors import DomainError, UnsupportedModel, UsageError
from cohq.models import ModelSpec

CHARTS = [("A", None), ("B", None), ("C", 1), ("C", 2), ("C", 3)]
angles = st.floats(0, 2 * np.pi)
hyper = st.floats(-2, 2)
r_sqs = st.sampled_from([2.0, 4.0, 6.0, 22.0])


def chart_params(model, x, u1, u2):
    if model == "A":
        return (x % (np.pi / 2), u1, u2)
    if model == "B":
        return (abs(x), u1, u2)
    return (x, u1 - np.pi, u2 - np.pi)


def gradient(f, x, h=1e-5):
    out = np.zeros(4)
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        out[i] = (f(x + e) - f(x - e)) / (2 * h)
    return out


def poisson(f, g, x):
    """{f, g} = sum_i df/dq_i dg/dp_i - df/dp_i dg/dq_i, with (q1, p1, q2, p2) ordering."""
    a, b = gradient(f, x), gradient(g, x)
    return a[0] * b[1] - a[1] * b[0] + a[2] * b[3] - a[3] * b[2]


def observable(model, i):
    return lambda y: classical.classical_observables(model, PhasePoint.from_array(y))[i]


def test_surface_examples():
    assert classical.surface_point("A", 4, (0, 0, 0)) == PhasePoint(2, 0, 0, 0)
    assert classical.surface_point("C", 4, (0, 0, 0), case=1) == PhasePoint(0, 2, 0, 0)
    p = classical.surface_point("B", 9, (0, 0.7, 1.3))
    assert p.q2 == 0 and p.p2 == 0 and np.hypot(p.q1, p.p1) == pytest.approx(3)


def test_constraint_residual_examples():
    assert classical.constraint_residual("A", 6, PhasePoint(0, 0, 0, 0)) == -3
    assert classical.constraint_residual("A", 6, PhasePoint(np.sqrt(6), 0, 0, 0)) == pytest.approx(0, abs=1e-15)
    assert classical.constraint_residual("C", 4, PhasePoint(0, 2, 0, 0)) == 0


@settings(max_examples=200, deadline=None)
@given(chart=st.sampled_from(CHARTS), r_sq=r_sqs, x=hyper, u1=angles, u2=angles)
def test_surface_points_satisfy_constraint(chart, r_sq, x, u1, u2):
    model, case = chart
    if case == 3 and abs(x) < 1e-3:
        x = 0.5
    point = classical.surface_point(model, r_sq, chart_params(model, x, u1, u2), case=case)
    assert abs(classical.constraint_residual(model, r_sq, point)) <= 1e-12 * r_sq * max(1, np.cosh(2 * x))
    if model == "C" and abs(x) > 1e-6:
        assert classical.branch_of(point) == case


def test_observable_examples():
    R2 = 6.0
    assert classical.classical_observables("A", classical.surface_point("A", R2, (0, 0, 0)))[2] == pytest.approx(R2 / 4)
    assert classical.classical_observables("A", classical.surface_point("A", R2, (np.pi / 4, 1, 1)))[1] == \
        pytest.approx(0, abs=1e-15)
    assert classical.classical_observables("C", classical.surface_point("C", 4, (0, 0, 0), case=1))[0] == \
        pytest.approx(-1.0)


@pytest.mark.parametrize("theta", [0, 0.3, np.pi / 4, 1.2])
def test_model_a_jz_closed_form(theta):
    R2 = 10.0
    Z = classical.classical_observables("A", classical.surface_point("A", R2, (theta, 0.4, 2.0)))[2]
    assert Z == pytest.approx(R2 / 4 * (2 * np.cos(theta) ** 2 - 1), abs=1e-13)


@pytest.mark.parametrize("xi", [0, 0.2, 1.1])
def test_model_c_kx_closed_form(xi):
    R2 = 4.0
    X = classical.classical_observables("C", classical.surface_point("C", R2, (xi, 0.3, -0.7), case=1))[0]
    assert X == pytest.approx(R2 / 4 * (1 - 2 * np.cosh(xi) ** 2), rel=1e-13)


@pytest.mark.parametrize("model,sign", [("A", 1), ("B", -1), ("C", -1)])
def test_observables_close_the_algebra_under_poisson_brackets(model, sign):
    rng = np.random.default_rng(3)
    for _ in range(5):
        x = rng.normal(size=4)
        X, Y, Z = (observable(model, i)(x) for i in range(3))
        assert poisson(observable(model, 0), observable(model, 1), x) == pytest.approx(sign * Z, abs=1e-8)
        assert poisson(observable(model, 1), observable(model, 2), x) == pytest.approx(X, abs=1e-8)
        assert poisson(observable(model, 2), observable(model, 0), x) == pytest.approx(Y, abs=1e-8)


@pytest.mark.parametrize("model", ["A", "B", "C"])
def test_observables_poisson_commute_with_constraint(model):
    rng = np.random.default_rng(5)
    phi = lambda y: classical.constraint_residual(model, 3.0, PhasePoint.from_array(y))  # noqa: E731
    for _ in range(5):
        x = rng.normal(size=4)
        for i in range(3):
            assert abs(poisson(observable(model, i), phi, x)) <= 1e-8


@pytest.mark.parametrize("model", ["A", "B", "C"])
def test_vector_field_is_hamiltonian(model):
    x = np.array([0.4, -0.3, 1.2, 0.8])
    phi = lambda y: classical.constraint_residual(model, 1.0, PhasePoint.from_array(y))  # noqa: E731
    g = gradient(phi, x)
    expected = np.array([g[1], -g[0], g[3], -g[2]])
    np.testing.assert_allclose(classical.constraint_vector_field(model, PhasePoint.from_array(x)), expected, atol=1e-8)


def test_flow_full_turn_is_identity():
    p = classical.surface_point("A", 6, (0.4, 1.0, 2.0))
    assert classical.gauge_flow("A", p, 2 * np.pi).distance(p) <= 1e-14


@pytest.mark.parametrize("model", ["A", "B", "C"])
@pytest.mark.parametrize("lam", [0.3, -1.1, 2.5])
def test_flow_matches_ode_integration(model, lam):
    p = PhasePoint(0.4, -0.3, 1.2, 0.8)
    sol = solve_ivp(lambda t, y: classical.constraint_vector_field(model, PhasePoint.from_array(y)),
                    (0, lam), p.as_array(), rtol=1e-12, atol=1e-12, method="DOP853")
    closed = classical.gauge_flow(model, p, lam).as_array()
    np.testing.assert_allclose(sol.y[:, -1], closed, atol=1e-9 * max(1, np.abs(closed).max()))


@settings(max_examples=100, deadline=None)
@given(chart=st.sampled_from(CHARTS), x=st.floats(0.05, 1.5), u1=angles, u2=angles,
       a=st.floats(-3, 3), b=st.floats(-3, 3))
def test_flow_group_and_invariance(chart, x, u1, u2, a, b):
    model, case = chart
    r_sq = 4.0
    p = classical.surface_point(model, r_sq, chart_params(model, x, u1, u2), case=case)
    once = classical.gauge_flow(model, classical.gauge_flow(model, p, a), b)
    both = classical.gauge_flow(model, p, a + b)
    scale = max(1.0, np.abs(both.as_array()).max())
    assert once.distance(both) <= 1e-12 * scale**2
    moved = classical.gauge_flow(model, p, a)
    obs0 = np.array(classical.classical_observables(model, p))
    obs1 = np.array(classical.classical_observables(model, moved))
    assert np.abs(obs0 - obs1).max() <= 1e-10 * max(1.0, np.abs(obs0).max(), scale**2)
    assert abs(classical.constraint_residual(model, r_sq, moved)) <= 1e-10 * max(1.0, scale**2)
    if model == "C":
        assert classical.branch_of(moved) == case


@settings(max_examples=100, deadline=None)
@given(chart=st.sampled_from(CHARTS), r_sq=r_sqs, x=st.floats(0.05, 1.5), u1=angles, u2=angles)
def test_classical_casimir_on_surface(chart, r_sq, x, u1, u2):
    model, case = chart
    p = classical.surface_point(model, r_sq, chart_params(model, x, u1, u2), case=case)
    X, Y, Z = classical.classical_observables(model, p)
    scale = max(1.0, X * X + Y * Y + Z * Z)
    expected = classical.casimir_on_surface(model, r_sq)
    assert abs(classical.classical_casimir(model, p) - expected) <= 1e-10 * scale
    assert np.sign(expected) == (-1 if model == "C" else 1)


def test_fourth_sign_combination_never_occurs():
    rng = np.random.default_rng(11)
    r_sq = 4.0
    q1, q2, p2 = rng.normal(scale=3, size=(3, 100_000))
    p1_sq = r_sq + q1**2 + q2**2 - p2**2
    keep = p1_sq >= 0
    p1 = np.sqrt(p1_sq[keep]) * rng.choice([-1, 1], size=keep.sum())
    first = p1**2 - q1[keep] ** 2
    second = q2[keep] ** 2 - p2[keep] ** 2
    assert keep.sum() > 50_000
    assert not np.any((first < 0) & (second > 0))


def test_sign_class_and_branches():
    assert classical.sign_class(PhasePoint(0, 2, 1, 0)) == (1, 1)
    assert classical.branch_of(PhasePoint(0, 2, 1, 0)) == 1
    assert classical.branch_of(PhasePoint(2, 1, 0, 3)) == 2
    assert classical.branch_of(PhasePoint(0, 2, 0, 1)) == 3
    assert classical.branch_of(PhasePoint(1, 1, 0, 0)) is None


def test_coset_examples():
    assert classical.reduced_to_coset("A", ReducedCoords("A", 0, 2.7)) == 0
    assert classical.reduced_to_coset("C", ReducedCoords("C", 0, 0, 1)) == 0
    mu, gamma = classical.inverted_to_coset_angles(0, 0)
    assert mu == 0 and gamma == 0
    assert classical.reduced_to_coset("B", ReducedCoords("B", 0.5, 0)) == pytest.approx(np.tanh(0.5))
    assert classical.reduced_to_coset("A", ReducedCoords("A", np.pi / 4, 0)) == pytest.approx(-1)


def test_model_c_roundtrip_example():
    rc = ReducedCoords("C", 0.3, 0.2, 1)
    back = classical.coset_to_reduced("C", classical.reduced_to_coset("C", rc), case=1)
    assert abs(back.first - 0.3) <= 1e-12 and abs(back.second - 0.2) <= 1e-12


def test_model_c_angles_solve_defining_relations():
    for xi, eta in ((0.3, 0.2), (1.2, -0.7), (0.0, 0.5), (-0.4, 0.1)):
        mu, gamma = classical.inverted_to_coset_angles(xi, eta)
        assert np.sinh(2 * mu) * np.sin(gamma) == pytest.approx(np.sinh(2 * eta), abs=1e-12)
        assert np.sinh(2 * mu) * np.cos(gamma) == pytest.approx(np.sinh(2 * xi) * np.cosh(2 * eta), abs=1e-12)
        assert 0 <= gamma < 2 * np.pi


@settings(max_examples=300, deadline=None)
@given(theta=st.floats(0, np.pi / 2 - 1e-3), phase=angles)
def test_roundtrip_model_a(theta, phase):
    rc = ReducedCoords("A", theta, phase)
    back = classical.coset_to_reduced("A", classical.reduced_to_coset("A", rc))
    assert abs(back.first - theta) <= 1e-10
    if theta > 1e-8:
        assert abs(np.exp(1j * back.second) - np.exp(1j * phase)) <= 1e-10


@settings(max_examples=300, deadline=None)
@given(xi=st.floats(0, 5), phase=angles)
def test_roundtrip_model_b(xi, phase):
    rc = ReducedCoords("B", xi, phase)
    zeta = classical.reduced_to_coset("B", rc)
    if abs(zeta) >= 1 - 1e-8:
        return
    back = classical.coset_to_reduced("B", zeta)
    assert abs(back.first - xi) <= 1e-10 * max(1, 1 / (1 - abs(zeta)))
    if xi > 1e-8:
        assert abs(np.exp(1j * back.second) - np.exp(1j * phase)) <= 1e-10


@settings(max_examples=300, deadline=None)
@given(case=st.sampled_from([1, 2, 3]), xi=st.floats(-1.5, 1.5), eta=st.floats(-1.5, 1.5))
def test_roundtrip_model_c(case, xi, eta):
    if case == 3 and abs(xi) < 1e-6:
        xi = 0.3
    rc = ReducedCoords("C", xi, eta, case)
    back = classical.coset_to_reduced("C", classical.reduced_to_coset("C", rc), case=case)
    assert abs(back.first - xi) <= 1e-10 and abs(back.second - eta) <= 1e-10
    assert back.case == case


@settings(max_examples=200, deadline=None)
@given(r=st.floats(0, 0.99), phase=angles, case=st.sampled_from([1, 2, 3]))
def test_roundtrip_model_c_from_label(r, phase, case):
    zeta = r * np.exp(1j * phase)
    try:
        rc = classical.coset_to_reduced("C", zeta, case=case)
    except DomainError:
        assert case == 3
        return
    assert abs(classical.reduced_to_coset("C", rc) - zeta) <= 1e-10


@pytest.mark.parametrize("xi,eta", [(0.3, 0.2), (0.8, -0.6), (0.1, 1.0)])
def test_readoff_relations_on_branches(xi, eta):
    mu, gamma = classical.inverted_to_coset_angles(xi, eta)
    p1 = classical.reduced_point("C", 4, ReducedCoords("C", xi, eta, 1))
    mu1, g1, g2 = classical.readoff_coset_angles(p1, 4)
    assert mu1 == pytest.approx(mu, abs=1e-12)
    assert np.exp(1j * (g1 + g2)) == pytest.approx(np.exp(1j * gamma), abs=1e-12)
    p2 = classical.reduced_point("C", 4, ReducedCoords("C", xi, eta, 2))
    mu2, h1, h2 = classical.readoff_coset_angles(p2, 4)
    assert mu2 == pytest.approx(mu, abs=1e-12)
    assert np.exp(1j * (h1 + h2)) == pytest.approx(-np.exp(1j * gamma), abs=1e-12)


def test_gauge_fixing():
    pa = classical.reduced_point("A", 6, ReducedCoords("A", 0.4, 0.9))
    assert np.angle(pa.q1 + 1j * pa.p1) == pytest.approx(0.9)
    assert np.angle(pa.q2 + 1j * pa.p2) == pytest.approx(-0.9)
    pb = classical.reduced_point("B", 2, ReducedCoords("B", 0.4, 0.9))
    assert np.angle(pb.q1 + 1j * pb.p1) == pytest.approx(np.angle(pb.q2 + 1j * pb.p2))


def test_domain_errors():
    with pytest.raises(DomainError):
        classical.reduced_to_coset("A", ReducedCoords("A", np.pi / 2, 0))
    with pytest.raises(DomainError):
        classical.reduced_to_coset("A", ReducedCoords("A", -0.1, 0))
    with pytest.raises(DomainError):
        classical.reduced_to_coset("B", ReducedCoords("B", -0.1, 0))
    with pytest.raises(DomainError):
        classical.coset_to_reduced("A", complex("inf"))
    with pytest.raises(DomainError):
        classical.coset_to_reduced("B", 1.0)
    with pytest.raises(DomainError):
        classical.coset_to_reduced("C", 1.2j, case=1)
    with pytest.raises(DomainError):
        classical.surface_point("C", 4, (0, 0.1, 0.2), case=3)
    with pytest.raises(DomainError):
        classical.reduced_to_coset("C", ReducedCoords("C", 0, 0.3, 3))
    with pytest.raises(DomainError):
        classical.coset_angles_to_inverted(-1, 0)
    with pytest.raises(UsageError):
        ReducedCoords("C", 0.1, 0.1)
    with pytest.raises(UsageError):
        classical.surface_point("C", 4, (0, 0, 0), case=4)


def test_angles_wrapped():
    rc = classical.coset_to_reduced("A", -0.5 - 0.5j)
    assert 0 <= rc.second < 2 * np.pi


@pytest.fixture(scope="module")
def model_a():
    spec = ModelSpec.build("A", 6, cutoff=4)
    return spec, models.build_generators(spec)


@pytest.mark.parametrize("theta", [0, 0.3, 1.2])
@pytest.mark.parametrize("phi", [0, 2.5])
def test_semiclassical_model_a_closed_form(model_a, theta, phi):
    spec, gen = model_a
    report = classical.semiclassical_compare(spec, ReducedCoords("A", theta, phi), gen)
    assert report.passed, report.summary_lines()
    z = [r for r in report.tables["semiclassical"] if r["observable"] == "Z"][0]
    assert z["deviation"] == pytest.approx(0.5 * abs(np.cos(2 * theta)), abs=1e-12)
    assert z["deviation_over_hbar"] <= 0.5 + 1e-12


def test_semiclassical_model_a_equator(model_a):
    spec, gen = model_a
    report = classical.semiclassical_compare(spec, ReducedCoords("A", np.pi / 4, 1.0), gen)
    z = [r for r in report.tables["semiclassical"] if r["observable"] == "Z"][0]
    assert abs(z["quantum"]) <= 1e-12 and abs(z["classical"]) <= 1e-12


@pytest.mark.parametrize("r_sq", [6, 22, 102])
def test_semiclassical_deviation_bounded_by_half_hbar(r_sq):
    j = int(round((r_sq / 2 - 1) / 2))
    spec = ModelSpec.build("A", r_sq, cutoff=2 * j)
    gen = models.build_generators(spec)
    worst = 0.0
    for theta in (0, 0.3, np.pi / 4, 1.2):
        table = classical.semiclassical_compare(spec, ReducedCoords("A", theta, 1.0), gen).tables["semiclassical"]
        row = table[2]
        worst = max(worst, row["deviation"])
        assert row["deviation"] <= 2 / r_sq * abs(row["classical"]) + 1e-10
    assert worst <= 0.5 + 1e-10


@pytest.mark.parametrize("xi", [0, 0.3])
def test_semiclassical_model_b(xi):
    spec = ModelSpec.build("B", 2, cutoff=40)
    gen = models.build_generators(spec)
    report = classical.semiclassical_compare(spec, ReducedCoords("B", xi, 1.5), gen)
    assert report.passed, report.summary_lines()
    z = report.tables["semiclassical"][2]
    # <K_z> = hbar k cosh(2 xi) and K_z^cl = (R^2/4) cosh(2 xi); with k = 1, R^2 = 2 they differ by (2 hbar / R^2)|Z_cl|
    assert z["deviation"] == pytest.approx(2 / spec.r_sq * abs(z["classical"]), rel=1e-9)
    assert z["quantum"] == pytest.approx(np.cosh(2 * xi), rel=1e-10)
    assert z["classical"] == pytest.approx(0.5 * np.cosh(2 * xi), rel=1e-12)


def test_reference_signs(model_a):
    spec, gen = model_a
    assert classical.reference_sign(spec, gen) == -1
    spec_b = ModelSpec.build("B", 2, cutoff=30)
    assert classical.reference_sign(spec_b, models.build_generators(spec_b)) == 1


def test_semiclassical_refuses_model_c():
    spec = ModelSpec.build("C", 4, cutoff=4)
    with pytest.raises(UnsupportedModel):
        classical.semiclassical_compare(spec, ReducedCoords("C", 0.1, 0.1, 1), models.build_generators(spec))


def test_coherent_peaks_at_classical_label(model_a):
    """The coherent state built at the label of a chart point has <Z> on the classical side's orientation."""
    spec, gen = model_a
    rc = ReducedCoords("A", 0.3, 0.0)
    emb = coherent.embed_irrep(spec, models.rep_index_from_R("A", 6))
    psi = coherent.coherent_state(emb, classical.reduced_to_coset("A", rc))
    classical_z = classical.classical_observables("A", classical.reduced_point("A", 6, rc))[2]
    assert np.sign(coherent.expectation(gen.Z, psi).real) == -np.sign(classical_z)
