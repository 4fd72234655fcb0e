"""Named verification suites composed from the library operations."""

from __future__ import annotations

import time

import numpy as np

from . import classical, coherent, fock, models, rigging
from .config import SUITES, RunConfig
from .errors import ConfigError, TruncationTooSmall, UnsupportedModel
from .fock import Scheme
from .models import Model, ModelSpec, Series
from .report import CheckReport

# suites that need a discrete-series or spin representation with a Fock embedding
_NOT_FOR_C = ("resolve-identity", "kin-phys-equality", "project-hw", "semiclassical-sweep")


def make_spec(config: RunConfig, r_sq: float | None = None, cutoff: int | None = None) -> ModelSpec:
    c = config.resolved()
    return ModelSpec.build(c.model, c.r_sq if r_sq is None else r_sq, c.hbar,
                           c.cutoff if cutoff is None else cutoff, c.scheme)


def _refuse_c(config: RunConfig, suite: str) -> None:
    if config.model is Model.C:
        raise UnsupportedModel(
            f"{suite}: model C selects a principal continuous-series representation, which has no "
            "discrete Fock embedding and a non-compact averaging group"
        )


def _require_margin(margin: int, need: int) -> None:
    if margin < need:
        raise ConfigError(f"{margin} is below the {need} needed for exact generator products; "
                          f"use --margin {need} or larger", "margin")


def suite_check_algebra(config: RunConfig) -> CheckReport:
    c = config.resolved()
    spec = make_spec(c)
    gen = models.build_generators(spec)
    tol = c.tol("algebra_su2" if gen.signature is models.Signature.COMPACT else "algebra_su11")
    _require_margin(c.margin, models.required_margin(gen))
    report = models.check_algebra(gen, spec.hbar, c.margin, tol, hermiticity_tol=c.tol("hermiticity"))
    report.environment.update(dim=spec.space.dim, required_margin=models.required_margin(gen))
    return report


def suite_casimir_identity(config: RunConfig) -> CheckReport:
    c = config.resolved()
    spec = make_spec(c)
    gen = models.build_generators(spec)
    _require_margin(c.margin, models.required_margin(gen))
    return models.casimir_constraint_identity(spec, gen, c.margin, c.tol("casimir_identity"),
                                              commutator_tol=c.tol("casimir_commutator"))


def suite_select_rep(config: RunConfig) -> CheckReport:
    c = config.resolved()
    spec = make_spec(c)
    rep = models.rep_index_from_R(c.model, c.r_sq, c.hbar)
    report = CheckReport("select-rep")
    report.environment.update(rep=rep.to_dict(), space=spec.space.to_dict())
    report.info("representation label", rep.value, series=rep.series.value, alternate=rep.alternate)
    if c.model is Model.C:
        report.skip("kernel projector", "continuous spectrum: no normalisable kernel on the truncated space")
        return report
    proj = rigging.projector_for(spec, c.tol("eigen_zero"))
    emb = coherent.embed_irrep(spec, rep)
    report.environment.update(kernel_dim=proj.kernel_dim)
    report.require("kernel dimension matches the embedded irrep", proj.kernel_dim == len(emb),
                   kernel_dim=proj.kernel_dim, irrep_states=len(emb))
    if c.model is Model.A:
        report.require("kernel dimension = 2j + 1", proj.kernel_dim == int(round(2 * rep.value)) + 1,
                       kernel_dim=proj.kernel_dim, j=rep.value)
    gen = models.build_generators(spec)
    c2 = models.casimir(spec, gen)
    mask = np.zeros(spec.space.dim, bool)
    mask[list(emb.indices)] = True
    if c.model is Model.B:
        mask &= fock.interior_mask(spec.space, max(c.margin, models.required_margin(gen)))
    target = rep.casimir_value(c.hbar)
    resid = c2 - target * fock.identity(spec.space)
    report.check("casimir eigenvalue on the kernel", fock.interior_deviation(resid, mask), c.tol("casimir_eigenvalue"),
                 expected=target, states=int(mask.sum()))
    return report


def suite_resolve_identity(config: RunConfig) -> CheckReport:
    _refuse_c(config, "resolve-identity")
    c = config.resolved()
    spec = make_spec(c)
    rep = models.rep_index_from_R(c.model, c.r_sq, c.hbar)
    emb = coherent.embed_irrep(spec, rep)
    if rep.series is Series.SU2_SPIN:
        return coherent.resolution_of_identity_check("SU2", emb, c.quadrature, tol=c.tol("resolution_su2"))
    return coherent.resolution_of_identity_check("SU11", emb, c.quadrature, tol=c.tol("resolution_su11"),
                                                 tail_tol=c.tol("resolution_su11_corrected"))


def suite_kin_phys(config: RunConfig) -> CheckReport:
    _refuse_c(config, "kin-phys-equality")
    c = config.resolved()
    spec = make_spec(c)
    rep = models.rep_index_from_R(c.model, c.r_sq, c.hbar)
    labels = [coherent.CoherentLabel(z, rep) for z in c.labels]
    if not labels:
        raise ConfigError("at least one coherent label is required", "labels")
    proj = rigging.projector_for(spec, c.tol("eigen_zero"))
    gen = models.build_generators(spec)
    try:
        report = rigging.verify_kin_phys_equality(
            spec, gen, labels, proj, tol=c.tol("kin_phys"), tail_eps=c.tol("tail_eps"),
            control=c.hw_pairs[0] if c.hw_pairs else None, control_tol=c.tol("negative_control_gap"),
        )
    except TruncationTooSmall as exc:
        raise ConfigError(str(exc), "cutoff") from None
    uncertainty = []
    emb = coherent.embed_irrep(spec, rep)
    for z in c.labels:
        psi = coherent.coherent_state(emb, z, c.tol("tail_eps"))
        product, bound = coherent.uncertainty_product(gen, psi, c.hbar)
        uncertainty.append({"zeta": complex(z), "dX_dY": product, "hbar_half_abs_Z": bound})
        report.check(f"uncertainty dX dY >= (hbar/2)|<Z>| at zeta={complex(z):.3g}",
                     max(0.0, bound - product), c.tol("min_uncertainty"))
        if z == 0:
            report.check("minimum uncertainty at zeta=0", abs(product - bound), c.tol("min_uncertainty"))
    report.tables["uncertainty"] = uncertainty
    return report


def suite_project_hw(config: RunConfig) -> CheckReport:
    _refuse_c(config, "project-hw")
    c = config.resolved()
    report = CheckReport("project-hw")
    small = make_spec(c, cutoff=min(c.cutoff, c.oracle_cutoff))
    phi = models.build_constraint(small)
    oracle = rigging.lambda_average(phi, c.hbar, c.oracle_nodes)
    proj_small = rigging.group_average_projector(phi, c.tol("eigen_zero"))
    report.check("spectral projector = lambda-quadrature average (entrywise)",
                 np.abs(proj_small.P.matrix - oracle.matrix).max(), c.tol("oracle"),
                 cutoff=small.space.cutoff, nodes=c.oracle_nodes)

    spec = make_spec(c)
    proj = rigging.projector_for(spec, c.tol("eigen_zero"))
    gen = models.build_generators(spec)
    rows = []
    for z1, z2 in c.hw_pairs:
        try:
            averaged = rigging.average_hw_state(proj, z1, z2, c.tol("hw_tail_eps"))
            reference = rigging.lambda_averaged_hw_state(spec, z1, z2, tail_eps=c.tol("hw_tail_eps"))
        except TruncationTooSmall as exc:
            raise ConfigError(str(exc), "cutoff") from None
        tag = f"z=({complex(z1):.3g}, {complex(z2):.3g})"
        report.check(f"P|z1,z2> = lambda-average of rotated |z1,z2> at {tag}",
                     (averaged - reference).norm(), c.tol("oracle") * max(1.0, np.sqrt(spec.space.dim)))
        if averaged.norm() == 0.0:
            report.info(f"averaged state vanishes at {tag}", 0.0)
            continue
        # compare physical expectations with the classical values at the labelling point
        s = np.sqrt(2 * c.hbar)
        point = classical.PhasePoint(s * np.real(z1), s * np.imag(z1), s * np.real(z2), s * np.imag(z2))
        cl_vals = classical.classical_observables(c.model, point)
        for name, G, cv in zip("XYZ", gen, cl_vals):
            qv = coherent.expectation(G, averaged).real
            rows.append({"z1": complex(z1), "z2": complex(z2), "observable": name,
                         "physical": qv, "classical": cv, "difference": qv - cv})
            report.info(f"<{name}>_phy - {name}_cl at {tag}", qv - cv)
    report.tables["averaged_hw"] = rows
    report.environment.update(kernel_dim=proj.kernel_dim, space=spec.space.to_dict())
    return report


def suite_classical_maps(config: RunConfig) -> CheckReport:
    c = config.resolved()
    model, r_sq = c.model, c.r_sq
    rng = np.random.default_rng(c.seed)
    n = c.classical_samples
    report = CheckReport("classical-maps")
    report.environment.update(seed=c.seed, samples=n)
    branches = (1, 2, 3) if model is Model.C else (None,)

    for case in branches:
        tag = "" if case is None else f" (branch {case})"
        points, charts = [], []
        for _ in range(n):
            params = _random_chart(model, rng, case)
            charts.append(params)
            points.append(classical.surface_point(model, r_sq, params, case))
        res = max(abs(classical.constraint_residual(model, r_sq, p)) for p in points)
        report.check(f"surface residual / R^2{tag}", res / r_sq, c.tol("surface_residual"))
        # relative to X^2 + Y^2 + Z^2, the size of the terms that cancel in the Casimir
        cas = max(abs(classical.classical_casimir(model, p) - classical.casimir_on_surface(model, r_sq))
                  / max(1.0, float(np.sum(np.square(classical.classical_observables(model, p))))) for p in points)
        report.check(f"classical casimir{tag}", cas, c.tol("classical_casimir"))
        report.check(f"closed-form observables{tag}", _closed_form_dev(model, r_sq, charts, points, case),
                     c.tol("gauge_invariance"))
        if case is not None:
            report.require(f"chart lands on its branch{tag}",
                           all(classical.branch_of(p) == case for p in points[1:]))

        lams = rng.uniform(-3, 3, size=(n, 2))
        inv = flow_dev = res_flow = 0.0
        for p, (a, b) in zip(points, lams):
            moved = classical.gauge_flow(model, p, a)
            scale = max(1.0, np.abs(p.as_array()).max() ** 2)
            inv = max(inv, np.abs(np.subtract(classical.classical_observables(model, moved),
                                              classical.classical_observables(model, p))).max() / scale)
            res_flow = max(res_flow, abs(classical.constraint_residual(model, r_sq, moved)) / r_sq)
            twice = classical.gauge_flow(model, moved, b)
            once = classical.gauge_flow(model, p, a + b)
            flow_dev = max(flow_dev, twice.distance(once) / max(1.0, np.abs(once.as_array()).max()))
        report.check(f"observables invariant along gauge flow{tag}", inv, c.tol("gauge_invariance"))
        report.check(f"constraint preserved along gauge flow{tag}", res_flow, c.tol("gauge_invariance"))
        report.check(f"gauge flow composes as a one-parameter group{tag}", flow_dev, c.tol("flow_group"))

        worst = 0.0
        for _ in range(n):
            rc = _random_reduced(model, rng, case)
            zeta = classical.reduced_to_coset(model, rc)
            back = classical.coset_to_reduced(model, zeta, case)
            worst = max(worst, abs(back.first - rc.first), _angle_dist(model, back.second, rc.second))
        report.check(f"reduced -> coset -> reduced roundtrip{tag}", worst, c.tol("roundtrip"))

    if model is Model.C:
        counts = _sign_census(r_sq, rng, c.sign_samples)
        report.require("fourth sign combination never realised", counts["fourth"] == 0, **counts)
    return report


def _random_chart(model, rng, case):
    if model is Model.A:
        return (rng.uniform(0, np.pi / 2), rng.uniform(0, 2 * np.pi), rng.uniform(0, 2 * np.pi))
    if model is Model.B:
        return (rng.uniform(0, 2), rng.uniform(0, 2 * np.pi), rng.uniform(0, 2 * np.pi))
    xi = rng.uniform(0.01, 2) if case != 1 else rng.uniform(0, 2)
    return (xi, rng.uniform(-2, 2), rng.uniform(-2, 2))


def _random_reduced(model, rng, case):
    if model is Model.A:
        return classical.ReducedCoords(model, rng.uniform(0, 1.5), rng.uniform(0, 2 * np.pi))
    if model is Model.B:
        return classical.ReducedCoords(model, rng.uniform(0, 3), rng.uniform(0, 2 * np.pi))
    return classical.ReducedCoords(model, rng.uniform(0.01, 1.5), rng.uniform(-1.5, 1.5), case)


def _angle_dist(model, a, b):
    if model is Model.C:
        return abs(a - b)
    d = abs(a - b) % (2 * np.pi)
    return min(d, 2 * np.pi - d)


def _closed_form_dev(model, r_sq, charts, points, case):
    """Deviation from the chart closed forms of the diagonal observable."""
    worst = 0.0
    for params, p in zip(charts, points):
        x = params[0]
        obs = classical.classical_observables(model, p)
        if model is Model.A:
            worst = max(worst, abs(obs[2] - r_sq / 4 * np.cos(2 * x)))
        elif model is Model.B:
            worst = max(worst, abs(obs[2] - r_sq / 4 * np.cosh(2 * x)) / np.cosh(2 * x))
        elif case == 1:
            worst = max(worst, abs(obs[0] - r_sq / 4 * (1 - 2 * np.cosh(x) ** 2)) / np.cosh(x) ** 2)
    return worst


def _sign_census(r_sq, rng, n):
    """Sample on-surface points without using any branch chart and classify their signs."""
    q1, p1, q2 = rng.normal(scale=2 * np.sqrt(r_sq), size=(3, n))
    p2_sq = r_sq + q1**2 - p1**2 + q2**2
    keep = p2_sq >= 0
    p2 = np.sqrt(p2_sq[keep]) * rng.choice([-1.0, 1.0], size=keep.sum())
    a = p1[keep] ** 2 - q1[keep] ** 2
    b = q2[keep] ** 2 - p2**2
    return {
        "samples": int(keep.sum()),
        "branch_1": int(np.sum((a > 0) & (b > 0))),
        "branch_2": int(np.sum((a < 0) & (b < 0))),
        "branch_3": int(np.sum((a > 0) & (b < 0))),
        "fourth": int(np.sum((a < 0) & (b > 0))),
    }


def suite_semiclassical(config: RunConfig) -> CheckReport:
    _refuse_c(config, "semiclassical-sweep")
    c = config.resolved()
    report = CheckReport("semiclassical-sweep")
    report.tables["semiclassical"] = []
    scaling = []
    for r_sq in c.sweep_r_sq:
        rep = models.rep_index_from_R(c.model, r_sq, c.hbar)
        spec = _sweep_spec(c, r_sq, rep)
        gen = models.build_generators(spec)
        sign = classical.reference_sign(spec, gen, c.tol("tail_eps"))
        worst = relative = 0.0
        for x in c.sweep_chart1:
            for y in c.sweep_chart2:
                rc = classical.ReducedCoords(c.model, x, y)
                cell = classical.semiclassical_compare(spec, rc, gen, sign, c.tol("semiclassical"), c.tol("tail_eps"))
                report.extend(cell)
                z_row = cell.tables["semiclassical"][2]
                worst = max(worst, z_row["deviation"])
                if abs(z_row["classical"]) > 1e-12 * r_sq:
                    relative = max(relative, z_row["deviation"] / abs(z_row["classical"]))
        if c.sweep_chart1 and c.sweep_chart2:
            scaling.append({"R_sq": r_sq, "max_deviation": worst, "max_deviation_over_hbar": worst / c.hbar,
                            "max_relative_deviation": relative, "bound_2hbar_over_R_sq": 2 * c.hbar / r_sq})
            report.check(f"relative Z deviation <= 2 hbar/R^2 at R^2={r_sq:g}",
                         max(0.0, relative - 2 * c.hbar / r_sq), c.tol("semiclassical"))
    rel = [row["max_relative_deviation"] for row in sorted(scaling, key=lambda r: r["R_sq"])]
    if len(rel) > 1 and any(r > 0 for r in rel):
        report.require("relative deviation shrinks as R^2 grows",
                       all(b < a for a, b in zip(rel, rel[1:])), sequence=rel)
    report.tables["semiclassical_scaling"] = scaling
    report.environment.update(model=c.model.value, grid=[len(c.sweep_r_sq), len(c.sweep_chart1), len(c.sweep_chart2)])
    return report


def _sweep_spec(c: RunConfig, r_sq: float, rep) -> ModelSpec:
    """Per-cell space large enough for every state of the grid."""
    if c.model is Model.A:
        return make_spec(c, r_sq=r_sq, cutoff=max(c.cutoff, int(round(2 * rep.value))))
    k = rep.value
    offset = int(round(2 * k - 1))
    top = max((abs(np.tanh(x)) for x in c.sweep_chart1), default=0.0)
    levels = coherent.su11_levels_needed(k, top, c.tol("tail_eps"))
    need = offset + levels - 1 if c.scheme is Scheme.PERMODE else offset + 2 * (levels - 1)
    return make_spec(c, r_sq=r_sq, cutoff=max(c.cutoff, need))


_RUNNERS = {
    "check-algebra": suite_check_algebra,
    "casimir-identity": suite_casimir_identity,
    "select-rep": suite_select_rep,
    "resolve-identity": suite_resolve_identity,
    "kin-phys-equality": suite_kin_phys,
    "project-hw": suite_project_hw,
    "classical-maps": suite_classical_maps,
    "semiclassical-sweep": suite_semiclassical,
}


def run_suite(config: RunConfig, suite: str) -> CheckReport:
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}", "suite")
    start = time.perf_counter()
    if suite == "full":
        report = CheckReport("full")
        for name, runner in _RUNNERS.items():
            if config.model is Model.C and name in _NOT_FOR_C:
                report.skip(name, "not applicable to model C (principal continuous series)")
                continue
            report.extend(runner(config), prefix=name)
    else:
        report = _RUNNERS[suite](config)
    report.timing["seconds"] = time.perf_counter() - start
    return report
