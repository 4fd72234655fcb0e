"""Group averaging as a spectral projector, and the kinematical/physical comparison.

For the two compact-spectrum models the U(1) average
(1/2pi) int_0^{2pi} dlambda exp(-i lambda phi / hbar) is the projector onto
ker(phi), because phi / hbar has integer spectrum. The projector is built from
an eigendecomposition; the explicit lambda-quadrature is kept as an
independent oracle (:func:`lambda_average`).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np
import scipy.linalg

from . import coherent, fock
from .coherent import QuadratureSpec
from .errors import NotPhysical, UnsupportedModel, UsageError
from .fock import Ket, LinOp
from .models import Model, ModelSpec, build_constraint
from .report import CheckReport

DEFAULT_EIGEN_TOL = 1e-9


@dataclass(frozen=True)
class PhysicalProjector:
    P: LinOp
    kernel_dim: int
    eigen_tolerance: float

    @property
    def space(self):
        return self.P.space


def group_average_projector(phi: LinOp, tol: float = DEFAULT_EIGEN_TOL) -> PhysicalProjector:
    """Sum of eigenprojectors of ``phi`` with |eigenvalue| <= tol * max(1, ||phi||).

    Refuses constraints that are not diagonal in the number basis: on a
    truncated space their spectrum is only a discretisation of a continuous
    one, and the averaging group is non-compact.
    """
    m = phi.matrix
    if phi.hermiticity_error() > 1e-12 * max(1.0, np.abs(m).max()):
        raise UsageError("constraint operator is not self-adjoint")
    if np.abs(m - np.diag(np.diag(m))).max(initial=0.0) > 0:
        raise UnsupportedModel(
            "constraint is not diagonal in the number basis (continuous spectrum, non-compact "
            "gauge group): group averaging is not realised as a projector for this model"
        )
    evals, evecs = np.linalg.eigh(m)
    threshold = tol * max(1.0, float(np.abs(evals).max(initial=0.0)))
    keep = np.abs(evals) <= threshold
    V = evecs[:, keep]
    return PhysicalProjector(LinOp(phi.space, V @ V.conj().T), int(keep.sum()), threshold)


def projector_for(spec: ModelSpec, tol: float = DEFAULT_EIGEN_TOL) -> PhysicalProjector:
    if spec.model is Model.C:
        raise UnsupportedModel(
            "model C: the inverted-oscillator constraint has continuous spectrum and a non-compact "
            "averaging group; the physical projector is not constructed"
        )
    return group_average_projector(build_constraint(spec), tol)


def lambda_nodes_needed(phi: LinOp, hbar: float) -> int:
    """Minimum trapezoid nodes that resolve every frequency of phi / hbar."""
    top = np.abs(np.linalg.eigvalsh(phi.matrix)).max(initial=0.0) / hbar
    return 2 * int(np.ceil(top - 1e-9)) + 1


def lambda_average(phi: LinOp, hbar: float, nodes: int = 64) -> LinOp:
    """(1/2pi) int_0^{2pi} exp(-i lambda phi/hbar) dlambda by the trapezoid rule.

    The exponential is evaluated with a general-purpose matrix exponential so
    that this route shares nothing with the eigendecomposition.
    """
    if nodes < lambda_nodes_needed(phi, hbar):
        raise UsageError(f"{nodes} nodes cannot resolve the spectrum of phi/hbar; "
                         f"need >= {lambda_nodes_needed(phi, hbar)}")
    acc = np.zeros_like(phi.matrix)
    gen = -1j * phi.matrix / hbar
    for lam in 2 * np.pi * np.arange(nodes) / nodes:
        acc = acc + scipy.linalg.expm(lam * gen)
    return LinOp(phi.space, acc / nodes)


# ---------------------------------------------------------------------------
# physical inner product and observables


def physical_inner(proj: PhysicalProjector, psi: Ket, psi2: Ket) -> complex:
    """(psi | psi2> = <psi| P |psi2>."""
    return fock.inner(psi, proj.P @ psi2)


def _physical_norm(proj, psi):
    n2 = physical_inner(proj, psi, psi).real
    if n2 <= 1e-300:
        raise NotPhysical("state has zero physical norm (no component in ker(phi))")
    return np.sqrt(n2)


def physical_expectation(proj: PhysicalProjector, A: LinOp, psi: Ket, psi2: Ket | None = None) -> complex:
    """<psi| P A |psi2> divided by the physical norms of psi and psi2."""
    psi2 = psi if psi2 is None else psi2
    value = fock.inner(psi, proj.P @ (A @ psi2))
    return value / (_physical_norm(proj, psi) * _physical_norm(proj, psi2))


def physical_fluctuation(proj: PhysicalProjector, A: LinOp, psi: Ket) -> float:
    first = physical_expectation(proj, A, psi)
    second = physical_expectation(proj, A @ A, psi)
    return float((second - first * first).real)


def kinematical_expectation(A: LinOp, psi: Ket, psi2: Ket | None = None) -> complex:
    psi2 = psi if psi2 is None else psi2
    return fock.inner(psi, A @ psi2) / (psi.norm() * psi2.norm())


# ---------------------------------------------------------------------------
# explicit averaging of standard coherent states


def _hw_phase_signs(spec: ModelSpec):
    """(offset c, sign on z2) so the averaged integrand is e^{-i lambda c}|z1 e^{i lambda}, z2 e^{+-i lambda}>."""
    x = spec.r_sq / (2 * spec.hbar)
    if spec.model is Model.A:
        return x - 1, 1
    if spec.model is Model.B:
        return x, -1
    raise UnsupportedModel("explicit averaging of standard coherent states is refused for model C")


def average_hw_state(proj: PhysicalProjector, z1: complex, z2: complex,
                     tail_eps: float = coherent.DEFAULT_TAIL_EPS) -> Ket:
    return proj.P @ coherent.hw_state(proj.space, z1, z2, tail_eps)


def lambda_averaged_hw_state(spec: ModelSpec, z1: complex, z2: complex, nodes: int | None = None,
                             tail_eps: float = coherent.DEFAULT_TAIL_EPS) -> Ket:
    """(1/2pi) int dlambda e^{-i lambda c} |z1 e^{i lambda}, z2 e^{+-i lambda}> on a trapezoid grid."""
    offset, sign = _hw_phase_signs(spec)
    space = spec.space
    if nodes is None:
        n1, n2 = space.occupations()
        top = np.abs(n1 + sign * n2 - offset).max()
        nodes = max(64, 2 * int(np.ceil(top)) + 1)
    acc = np.zeros(space.dim, dtype=np.complex128)
    for lam in 2 * np.pi * np.arange(nodes) / nodes:
        rotated = coherent.hw_state(space, z1 * np.exp(1j * lam), z2 * np.exp(sign * 1j * lam), tail_eps)
        acc += np.exp(-1j * lam * offset) * rotated.amplitudes
    return Ket(space, acc / nodes)


# ---------------------------------------------------------------------------
# the central comparison


def verify_kin_phys_equality(spec: ModelSpec, observables, labels, proj: PhysicalProjector | None = None,
                             tol: float = 1e-10, tail_eps: float = coherent.DEFAULT_TAIL_EPS,
                             control: tuple | None = (0.6, 0.4), control_tol: float = 1e-3) -> CheckReport:
    """Compare inner products, matrix elements and fluctuations computed both ways.

    ``labels`` are CoherentLabel instances (or bare zetas) in the selected
    representation. ``control`` is a pair (z1, z2) for a standard coherent
    state that is *not* in the representation; its physical and kinematical
    norms must differ by more than ``control_tol``.
    """
    proj = proj or projector_for(spec)
    report = CheckReport("kin-phys-equality")
    zetas = [getattr(lab, "zeta", lab) for lab in labels]
    rep = labels[0].rep if hasattr(labels[0], "rep") else None
    if rep is None:
        from .models import rep_index_from_R
        rep = rep_index_from_R(spec.model, spec.r_sq, spec.hbar)
    emb = coherent.embed_irrep(spec, rep)
    states = [coherent.coherent_state(emb, z, tail_eps) for z in zetas]
    report.environment.update(space=spec.space.to_dict(), kernel_dim=proj.kernel_dim, rep=rep.to_dict(),
                              labels=[complex(z) for z in zetas])

    inner_dev = max(abs(physical_inner(proj, a, b) - fock.inner(a, b)) for a, b in product(states, states))
    report.check("inner product (kin vs phys)", inner_dev, tol, comparisons=len(states) ** 2)
    for name, A in zip("XYZ", observables):
        dev = max(abs(physical_expectation(proj, A, a, b) - kinematical_expectation(A, a, b))
                  for a, b in product(states, states))
        report.check(f"matrix elements {name} (kin vs phys)", dev, tol, comparisons=len(states) ** 2)
        dev = max(abs(physical_fluctuation(proj, A, s) - coherent.variance(A, s)) for s in states)
        report.check(f"fluctuation {name} (kin vs phys)", dev, tol, comparisons=len(states))
    residual = max((proj.P @ s - s).norm() for s in states)
    report.check("P psi = psi on the selected irrep", residual, 1e-12)

    if control is not None:
        hw = coherent.hw_state(spec.space, control[0], control[1], tail_eps=1e-8)
        gap = abs(fock.inner(hw, hw) - physical_inner(proj, hw, hw))
        report.check_above("negative control: standard coherent state breaks the equality",
                           gap, control_tol, z=[complex(c) for c in control])
    return report


def double_quadrature_overlap(emb, zeta0: complex, zeta1: complex, quadrature: QuadratureSpec | None = None) -> complex:
    """int int dmu dmu' <z0|z><z|z'><z'|z1> with both integrals done by quadrature (SU(2))."""
    quadrature = quadrature or QuadratureSpec()
    j = emb.rep.value
    block = coherent._su2_block(j, quadrature.radial_nodes, max(quadrature.angular_nodes, int(2 * j) + 2))
    c0 = coherent.su2_amplitudes(j, zeta0)
    c1 = coherent.su2_amplitudes(j, zeta1)
    return complex(c0.conj() @ block @ block @ c1)
