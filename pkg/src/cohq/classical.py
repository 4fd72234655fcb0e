"""Classical side: constraint surfaces, gauge flow and maps to coherent labels.

Phase space is R^4 with points (q1, p1, q2, p2). Chart parameters:

* A: (theta, phi1, phi2); reduced coordinates (theta, phi_minus), gauge phi_plus = 0
* B: (xi, phi1, phi2);    reduced coordinates (xi, phi_plus),    gauge phi_minus = 0
* C: branch case in {1, 2, 3} with (xi, eta1, eta2); reduced coordinates
  (xi, eta = eta_minus), gauge eta_plus = 0

The model-C branch is always an explicit input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import coherent, models
from .errors import DomainError, UnsupportedModel, UsageError
from .fock import Ket
from .models import Model, ModelSpec
from .report import CheckReport

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class PhasePoint:
    q1: float
    p1: float
    q2: float
    p2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.q1, self.p1, self.q2, self.p2])

    @classmethod
    def from_array(cls, arr) -> "PhasePoint":
        q1, p1, q2, p2 = (float(x) for x in arr)
        return cls(q1, p1, q2, p2)

    def distance(self, other: "PhasePoint") -> float:
        return float(np.abs(self.as_array() - other.as_array()).max())


@dataclass(frozen=True)
class ReducedCoords:
    """Gauge-invariant chart point.

    ``first``/``second`` are (theta, phi_minus) for A, (xi, phi_plus) for B
    and (xi, eta) for C, where ``case`` selects the model-C branch.
    """

    model: Model
    first: float
    second: float
    case: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "model", Model.parse(self.model))
        if self.model is Model.C and self.case not in (1, 2, 3):
            raise UsageError(f"model C needs an explicit branch case in (1, 2, 3), got {self.case!r}")


def _wrap(angle):
    return float(np.mod(angle, TWO_PI))


def surface_point(model, r_sq: float, params, case: int | None = None) -> PhasePoint:
    """Point on the constraint surface from chart parameters.

    A: params = (theta, phi1, phi2); B: (xi, phi1, phi2); C: (xi, eta1, eta2)
    on branch ``case``.
    """
    model = Model.parse(model)
    R = np.sqrt(r_sq)
    x, u1, u2 = (float(v) for v in params)
    if model is Model.A:
        r1, r2 = R * np.cos(x), R * np.sin(x)
        out = (r1 * np.cos(u1), r1 * np.sin(u1), r2 * np.cos(u2), r2 * np.sin(u2))
    elif model is Model.B:
        r1, r2 = R * np.cosh(x), R * np.sinh(x)
        out = (r1 * np.cos(u1), r1 * np.sin(u1), r2 * np.cos(u2), r2 * np.sin(u2))
    else:
        if case == 1:
            out = (R * np.cosh(x) * np.sinh(u1), R * np.cosh(x) * np.cosh(u1),
                   R * np.sinh(x) * np.cosh(u2), R * np.sinh(x) * np.sinh(u2))
        elif case == 2:
            out = (R * np.sinh(x) * np.cosh(u1), R * np.sinh(x) * np.sinh(u1),
                   R * np.cosh(x) * np.sinh(u2), R * np.cosh(x) * np.cosh(u2))
        elif case == 3:
            if np.tanh(x) == 0.0:
                raise DomainError("branch (iii) chart degenerates at xi = 0: (q2, p2) collapses to the "
                                  "origin, which violates q2^2 - p2^2 < 0")
            out = (R * np.sinh(u1) / np.cosh(x), R * np.cosh(u1) / np.cosh(x),
                   R * np.tanh(x) * np.sinh(u2), R * np.tanh(x) * np.cosh(u2))
        else:
            raise UsageError(f"model C needs an explicit branch case in (1, 2, 3), got {case!r}")
    if not np.all(np.isfinite(out)):
        raise DomainError(f"chart parameters {params} overflow")
    return PhasePoint(*(float(v) for v in out))


def constraint_residual(model, r_sq: float, point: PhasePoint) -> float:
    model = Model.parse(model)
    q1, p1, q2, p2 = point.as_array()
    if model is Model.A:
        return 0.5 * (q1**2 + p1**2 + q2**2 + p2**2 - r_sq)
    if model is Model.B:
        return 0.5 * (q1**2 + p1**2 - q2**2 - p2**2 - r_sq)
    return 0.5 * (-(q1**2) + p1**2 - q2**2 + p2**2 - r_sq)


def classical_observables(model, point: PhasePoint) -> tuple[float, float, float]:
    """Classical values of the generator triple (X, Y, Z)."""
    model = Model.parse(model)
    q1, p1, q2, p2 = (float(v) for v in point.as_array())
    if model is Model.A:
        return (0.5 * (q1 * q2 + p1 * p2), 0.5 * (q1 * p2 - q2 * p1),
                0.25 * (q1**2 + p1**2 - q2**2 - p2**2))
    if model is Model.B:
        return (0.5 * (q1 * p2 + q2 * p1), 0.5 * (q1 * q2 - p1 * p2),
                0.25 * (q1**2 + p1**2 + q2**2 + p2**2))
    return (0.25 * (q1**2 - p1**2 - q2**2 + p2**2), 0.5 * (q1 * q2 - p1 * p2),
            0.5 * (q1 * p2 - q2 * p1))


def classical_casimir(model, point: PhasePoint) -> float:
    """X^2 + Y^2 + Z^2 for A, Z^2 - X^2 - Y^2 for B and C."""
    model = Model.parse(model)
    x, y, z = classical_observables(model, point)
    if model is Model.A:
        return x * x + y * y + z * z
    return z * z - x * x - y * y


def casimir_on_surface(model, r_sq: float) -> float:
    """Value of :func:`classical_casimir` on the constraint surface.

    (R^2/4)^2 for A and B; -(R^2/4)^2 on every branch of C, since there
    Z^2 - X^2 - Y^2 = -((-q1^2 + p1^2) - (q2^2 - p2^2))^2 / 16.
    """
    model = Model.parse(model)
    value = (r_sq / 4) ** 2
    return -value if model is Model.C else value


def gauge_flow(model, point: PhasePoint, lam: float) -> PhasePoint:
    """Hamiltonian flow of the classical constraint for parameter ``lam``."""
    model = Model.parse(model)
    q1, p1, q2, p2 = point.as_array()
    if model is Model.C:
        ch, sh = np.cosh(lam), np.sinh(lam)
        return PhasePoint(q1 * ch + p1 * sh, q1 * sh + p1 * ch, q2 * ch + p2 * sh, q2 * sh + p2 * ch)
    c, s = np.cos(lam), np.sin(lam)
    s2 = s if model is Model.A else -s
    return PhasePoint(q1 * c + p1 * s, -q1 * s + p1 * c, q2 * c + p2 * s2, -q2 * s2 + p2 * c)


def constraint_vector_field(model, point: PhasePoint) -> np.ndarray:
    """(dq1, dp1, dq2, dp2) = (d phi/d p, -d phi/d q) per mode."""
    model = Model.parse(model)
    q1, p1, q2, p2 = point.as_array()
    if model is Model.A:
        return np.array([p1, -q1, p2, -q2])
    if model is Model.B:
        return np.array([p1, -q1, -p2, q2])
    return np.array([p1, q1, p2, q2])


def sign_class(point: PhasePoint) -> tuple[int, int]:
    """Signs of (-q1^2 + p1^2) and (q2^2 - p2^2)."""
    q1, p1, q2, p2 = point.as_array()
    return int(np.sign(p1**2 - q1**2)), int(np.sign(q2**2 - p2**2))


def branch_of(point: PhasePoint) -> int | None:
    """Model-C branch (1, 2, 3) of an on-surface point; None on a boundary."""
    a, b = sign_class(point)
    if a > 0 and b > 0:
        return 1
    if a < 0 and b < 0:
        return 2
    if a > 0 and b < 0:
        return 3
    return None


# ---------------------------------------------------------------------------
# reduced phase space and coset labels


def reduced_point(model, r_sq: float, rc: ReducedCoords) -> PhasePoint:
    """Gauge-fixed surface point for reduced coordinates."""
    model = Model.parse(model)
    if model is Model.A:
        # phi_plus = 0: phi1 = phi_minus, phi2 = -phi_minus
        return surface_point(model, r_sq, (rc.first, rc.second, -rc.second))
    if model is Model.B:
        # phi_minus = 0: phi1 = phi2 = phi_plus
        return surface_point(model, r_sq, (rc.first, rc.second, rc.second))
    # eta_plus = 0: eta1 = eta, eta2 = -eta
    return surface_point(model, r_sq, (rc.first, rc.second, -rc.second), case=rc.case)


def inverted_to_coset_angles(xi: float, eta: float) -> tuple[float, float]:
    """(mu, gamma1 + gamma2) solving
    sinh 2mu sin(g) = sinh 2eta,  sinh 2mu cos(g) = sinh 2xi cosh 2eta."""
    s = np.sinh(2 * eta)
    c = np.sinh(2 * xi) * np.cosh(2 * eta)
    mu = 0.5 * np.arcsinh(np.hypot(s, c))
    return float(mu), _wrap(np.arctan2(s, c))


def coset_angles_to_inverted(mu: float, gamma: float) -> tuple[float, float]:
    if mu < 0:
        raise DomainError(f"mu must be non-negative, got {mu}")
    sh = np.sinh(2 * mu)
    eta = 0.5 * np.arcsinh(sh * np.sin(gamma))
    xi = 0.5 * np.arcsinh(sh * np.cos(gamma) / np.cosh(2 * eta))
    return float(xi), float(eta)


def readoff_coset_angles(point: PhasePoint, r_sq: float) -> tuple[float, float, float]:
    """(mu, gamma1, gamma2) of the hyperbolic group parameterisation of a C point:
    p1 = R cosh mu cos g1, p2 = R cosh mu sin g1, q1 = R sinh mu sin g2, q2 = R sinh mu cos g2."""
    q1, p1, q2, p2 = point.as_array()
    R = np.sqrt(r_sq)
    mu = np.arcsinh(np.hypot(q1, q2) / R)
    return float(mu), _wrap(np.arctan2(p2, p1)), _wrap(np.arctan2(q1, q2))


def reduced_to_coset(model, rc: ReducedCoords) -> complex:
    """Coherent-state label zeta for reduced coordinates.

    A: zeta = -tan(theta) e^{i phi_minus}      (theta in [0, pi/2))
    B: zeta = tanh(xi) e^{i phi_plus}          (xi >= 0)
    C: zeta = tanh(mu) e^{i (gamma1 + gamma2)} via :func:`inverted_to_coset_angles`
    """
    model = Model.parse(model)
    if model is Model.A:
        theta = rc.first
        if not 0.0 <= theta <= np.pi / 2:
            raise DomainError(f"theta must lie in [0, pi/2], got {theta}")
        if np.isclose(theta, np.pi / 2, rtol=0, atol=1e-15):
            raise DomainError("theta = pi/2 is the point at infinity of the stereographic chart")
        return complex(-np.tan(theta) * np.exp(1j * rc.second))
    if model is Model.B:
        if rc.first < 0:
            raise DomainError(f"xi must be non-negative, got {rc.first}")
        return complex(np.tanh(rc.first) * np.exp(1j * rc.second))
    if rc.case == 3 and np.tanh(rc.first) == 0.0:
        raise DomainError("branch (iii) excludes xi = 0")
    mu, gamma = inverted_to_coset_angles(rc.first, rc.second)
    return complex(np.tanh(mu) * np.exp(1j * gamma))


def coset_to_reduced(model, zeta: complex, case: int | None = None) -> ReducedCoords:
    model = Model.parse(model)
    zeta = complex(zeta)
    if not (np.isfinite(zeta.real) and np.isfinite(zeta.imag)):
        raise DomainError("zeta = infinity is the missing point of the chart")
    if model is Model.A:
        phase = _wrap(np.angle(-zeta)) if zeta != 0 else 0.0
        return ReducedCoords(model, float(np.arctan(abs(zeta))), phase)
    if abs(zeta) >= 1:
        raise DomainError(f"|zeta| must be < 1, got {abs(zeta):.6g}")
    phase = _wrap(np.angle(zeta)) if zeta != 0 else 0.0
    if model is Model.B:
        return ReducedCoords(model, float(np.arctanh(abs(zeta))), phase)
    xi, eta = coset_angles_to_inverted(float(np.arctanh(abs(zeta))), phase)
    if case == 3 and np.tanh(xi) == 0.0:
        raise DomainError("branch (iii) excludes xi = 0")
    return ReducedCoords(model, xi, eta, case)


# ---------------------------------------------------------------------------
# quantum-classical comparison


def _coherent_for(spec: ModelSpec, zeta: complex, tail_eps: float) -> Ket:
    rep = models.rep_index_from_R(spec.model, spec.r_sq, spec.hbar)
    emb = coherent.embed_irrep(spec, rep)
    return coherent.coherent_state(emb, zeta, tail_eps)


def reference_sign(spec: ModelSpec, gen, tail_eps: float = coherent.DEFAULT_TAIL_EPS) -> float:
    """Orientation between quantum and classical Z fixed at the chart origin."""
    rc = ReducedCoords(spec.model, 0.0, 0.0)
    quantum = coherent.expectation(gen.Z, _coherent_for(spec, reduced_to_coset(spec.model, rc), tail_eps)).real
    classical = classical_observables(spec.model, reduced_point(spec.model, spec.r_sq, rc))[2]
    return float(np.sign(quantum) * np.sign(classical))


def semiclassical_compare(spec: ModelSpec, rc: ReducedCoords, gen, sign: float | None = None,
                          tol: float = 1e-10, tail_eps: float = coherent.DEFAULT_TAIL_EPS) -> CheckReport:
    """Compare coherent-state expectations with classical values at the matching point.

    Z is asserted: |<Z>| and |Z_cl| differ by at most (2 hbar / R^2)|Z_cl|
    (hbar/2 at most for model A). X and Y are reported only, because the
    chart identification does not fix their azimuthal orientation.
    """
    if spec.model is Model.C:
        raise UnsupportedModel("model C: no discrete-series coherent states to compare")
    sign = reference_sign(spec, gen, tail_eps) if sign is None else sign
    zeta = reduced_to_coset(spec.model, rc)
    psi = _coherent_for(spec, zeta, tail_eps)
    point = reduced_point(spec.model, spec.r_sq, rc)
    classical = classical_observables(spec.model, point)
    quantum = [coherent.expectation(G, psi).real for G in gen]
    hbar = spec.hbar
    report = CheckReport("semiclassical-sweep")
    rows = []
    for name, qv, cv in zip("XYZ", quantum, classical):
        dev = abs(abs(qv) - abs(cv))
        rows.append({
            "model": spec.model.value, "R_sq": spec.r_sq, "hbar": hbar, "chart_1": rc.first,
            "chart_2": rc.second, "observable": name, "quantum": qv, "classical": cv,
            "deviation": dev, "deviation_over_hbar": dev / hbar,
        })
    zrow = rows[2]
    bound = 2 * hbar / spec.r_sq * abs(classical[2])
    tag = f"R^2={spec.r_sq:g} chart=({rc.first:.4g},{rc.second:.4g})"
    report.check(f"|<Z>| vs |Z_cl| within (2 hbar/R^2)|Z_cl| at {tag}", max(0.0, zrow["deviation"] - bound), tol,
                 abs_deviation=zrow["deviation"], bound=bound)
    report.check(f"oriented Z agreement at {tag}", max(0.0, abs(sign * quantum[2] - classical[2]) - bound), tol)
    if spec.model is Model.A:
        report.check(f"|<Z>| vs |Z_cl| <= hbar/2 at {tag}", max(0.0, zrow["deviation"] - hbar / 2), tol)
    for row in rows[:2]:
        report.info(f"{row['observable']} deviation at {tag}", row["deviation"])
    report.tables["semiclassical"] = rows
    report.environment.update(model=spec.model.value, orientation_sign=sign)
    return report
