"""Group coherent states embedded in the two-mode Fock space.

Three families:

* SU(2) spin states |zeta, j>, built on |j, m> = |n1 = j + m, n2 = j - m>
* SU(1,1) discrete-series states |zeta, k>, built on |k, n> = |n + 2k - 1, n>
* product Heisenberg-Weyl states |z1, z2>

Coefficients are evaluated in log space so that j, k up to ~50 do not
overflow. Resolutions of identity are checked with a tensor rule
(Gauss-Legendre in the polar/rapidity variable, trapezoid in the phase).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from . import fock
from .errors import DomainError, TruncationTooSmall, UnsupportedModel, UnsupportedRepresentation, UsageError
from .fock import FockSpace, Ket, LinOp, Scheme
from .models import Model, ModelSpec, RepIndex, Series, build_generators, discrete_offset
from .report import CheckReport

DEFAULT_TAIL_EPS = 1e-12


class Family(str, enum.Enum):
    SU2 = "SU2"
    SU11 = "SU11"


@dataclass(frozen=True)
class CoherentLabel:
    zeta: complex
    rep: RepIndex

    def __post_init__(self):
        z = complex(self.zeta)
        if not (np.isfinite(z.real) and np.isfinite(z.imag)):
            raise DomainError(f"coherent label must be finite, got {z}")
        if self.rep.series is Series.SU11_DISCRETE and abs(z) >= 1:
            raise DomainError(f"discrete-series label needs |zeta| < 1, got |zeta| = {abs(z):.6g}")
        object.__setattr__(self, "zeta", z)


@dataclass(frozen=True)
class QuadratureSpec:
    radial_nodes: int = 64
    angular_nodes: int = 64
    su11_cutoff: float = 1.0 - 1e-6

    def __post_init__(self):
        if self.radial_nodes < 1 or self.angular_nodes < 1:
            raise UsageError("quadrature node counts must be positive")
        if not 0.0 < self.su11_cutoff < 1.0:
            raise UsageError(f"SU(1,1) radial cutoff must lie in (0, 1), got {self.su11_cutoff}")


@dataclass(frozen=True)
class IrrepEmbedding:
    """Unit-weight identification of irrep basis vectors with Fock states.

    ``labels[i]`` is m (SU(2)) or n (SU(1,1)); ``indices[i]`` the Fock index.
    """

    rep: RepIndex
    space: FockSpace
    labels: tuple
    indices: tuple
    hbar: float = 1.0

    def __len__(self):
        return len(self.indices)

    def scatter(self, amplitudes) -> Ket:
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        v = np.zeros(self.space.dim, dtype=np.complex128)
        v[list(self.indices[: len(amplitudes)])] = amplitudes
        return Ket(self.space, v)

    def gather(self, ket: Ket) -> np.ndarray:
        return ket.amplitudes[list(self.indices)]


def embed_irrep(spec: ModelSpec, rep: RepIndex, validate: bool = True) -> IrrepEmbedding:
    space, hbar = spec.space, spec.hbar
    if spec.model is Model.C:
        raise UnsupportedModel("principal-series representations have no Fock ladder embedding here")
    if spec.model is Model.A:
        if rep.series is not Series.SU2_SPIN:
            raise UsageError(f"model A needs an SU(2) spin label, got {rep.series.value}")
        two_j = int(round(2 * rep.value))
        ms = [m / 2 for m in range(-two_j, two_j + 1, 2)]
        pairs = [(int(round(rep.value + m)), int(round(rep.value - m))) for m in ms]
        if not all(space.contains(*p) for p in pairs):
            raise TruncationTooSmall(f"shell n1 + n2 = {two_j} is truncated away", required_cutoff=two_j)
        emb = IrrepEmbedding(rep, space, tuple(ms), tuple(space.index(*p) for p in pairs), hbar)
    else:
        if rep.series is not Series.SU11_DISCRETE:
            raise UsageError(f"model B needs a discrete-series label, got {rep.series.value}")
        offset = discrete_offset(spec, rep)
        ns = []
        n = 0
        while space.contains(n + offset, n):
            ns.append(n)
            n += 1
        if not ns:
            raise TruncationTooSmall(f"no state with n1 - n2 = {offset} fits", required_cutoff=offset)
        emb = IrrepEmbedding(rep, space, tuple(ns), tuple(space.index(n + offset, n) for n in ns), hbar)
    if validate:
        _validate_embedding(spec, emb)
    return emb


def _validate_embedding(spec, emb):
    Z = build_generators(spec).Z
    diag = np.diag(Z.matrix)[list(emb.indices)].real
    if spec.model is Model.A:
        expected = spec.hbar * np.array(emb.labels)
    else:
        expected = spec.hbar * (emb.rep.value + np.array(emb.labels))
    # Z is diagonal in the Fock basis for models A and B
    off = np.abs(Z.matrix[:, list(emb.indices)]).sum(axis=0) - np.abs(diag)
    if np.abs(diag - expected).max() > 1e-12 * max(1.0, np.abs(expected).max()) or off.max() > 1e-12:
        raise UsageError("irrep embedding failed the weight-eigenvalue check")


# ---------------------------------------------------------------------------
# amplitudes


def _log_abs_power(zeta: complex, powers: np.ndarray) -> np.ndarray:
    r = abs(zeta)
    if r == 0.0:
        return np.where(powers == 0, 0.0, -np.inf)
    return powers * np.log(r)


def su2_amplitudes(j: float, zeta: complex) -> np.ndarray:
    """Coefficients of |zeta, j> on |j, m>, m = -j..j (ascending)."""
    two_j = int(round(2 * j))
    p = np.arange(two_j + 1)  # p = j + m
    log_binom = special.gammaln(two_j + 1) - special.gammaln(p + 1) - special.gammaln(two_j - p + 1)
    log_mag = 0.5 * log_binom + _log_abs_power(zeta, p) - 0.5 * two_j * np.log1p(abs(zeta) ** 2)
    return np.exp(log_mag) * np.exp(1j * p * np.angle(zeta))


def su11_amplitudes(k: float, zeta: complex, n_levels: int) -> np.ndarray:
    """First ``n_levels`` coefficients of |zeta, k> on |k, n>."""
    r = abs(zeta)
    if r >= 1:
        raise DomainError(f"discrete-series label needs |zeta| < 1, got {r:.6g}")
    n = np.arange(n_levels)
    log_c = special.gammaln(n + 2 * k) - special.gammaln(n + 1) - special.gammaln(2 * k)
    log_mag = 0.5 * log_c + _log_abs_power(zeta, n) + k * np.log1p(-(r**2))
    return np.exp(log_mag) * np.exp(1j * n * np.angle(zeta))


def su11_tail(k: float, zeta: complex, n_levels: int) -> float:
    """Squared norm of |zeta, k> carried by levels n >= n_levels.

    The level populations are negative-binomial with shape 2k and success
    probability |zeta|^2, so the tail is I_{|zeta|^2}(n_levels, 2k).
    """
    if n_levels <= 0:
        return 1.0
    return float(special.betainc(n_levels, 2 * k, abs(zeta) ** 2))


def su11_levels_needed(k: float, zeta: complex, tail_eps: float) -> int:
    """Smallest number of levels whose dropped tail is <= tail_eps."""
    p = abs(zeta) ** 2
    if p == 0.0:
        return 1
    n = max(1, int(stats.nbinom.isf(tail_eps, 2 * k, 1 - p)))
    while n > 1 and su11_tail(k, zeta, n - 1) <= tail_eps:
        n -= 1
    while su11_tail(k, zeta, n) > tail_eps:
        n += 1
    return n


def su2_state(emb: IrrepEmbedding, zeta: complex) -> Ket:
    if emb.rep.series is not Series.SU2_SPIN:
        raise UsageError("su2_state needs an SU(2) embedding")
    return emb.scatter(su2_amplitudes(emb.rep.value, zeta)).normalize()


def su11_state(emb: IrrepEmbedding, zeta: complex, tail_eps: float = DEFAULT_TAIL_EPS) -> Ket:
    """Truncated |zeta, k>; its squared norm is 1 - tail >= 1 - tail_eps."""
    if emb.rep.series is not Series.SU11_DISCRETE:
        raise UsageError("su11_state needs a discrete-series embedding")
    k = emb.rep.value
    CoherentLabel(zeta, emb.rep)
    levels = len(emb)
    if su11_tail(k, zeta, levels) > tail_eps:
        need = su11_levels_needed(k, zeta, tail_eps)
        offset = int(round(2 * k - 1))
        required = need - 1 + offset if emb.space.scheme is Scheme.PERMODE else 2 * (need - 1) + offset
        raise TruncationTooSmall(
            f"|zeta|={abs(zeta):.4g}, k={k:g}: dropped tail {su11_tail(k, zeta, levels):.3e} > {tail_eps:.1e}",
            required_cutoff=required,
        )
    return emb.scatter(su11_amplitudes(k, zeta, levels))


def coherent_state(emb: IrrepEmbedding, zeta: complex, tail_eps: float = DEFAULT_TAIL_EPS) -> Ket:
    if emb.rep.series is Series.SU2_SPIN:
        return su2_state(emb, zeta)
    return su11_state(emb, zeta, tail_eps)


def _poisson_dropped(space: FockSpace, z1: complex, z2: complex) -> float:
    m1, m2 = abs(z1) ** 2, abs(z2) ** 2
    N = space.cutoff
    if space.scheme is Scheme.TOTAL:
        return float(stats.poisson.sf(N, m1 + m2))
    s1, s2 = stats.poisson.sf(N, m1), stats.poisson.sf(N, m2)
    return float(s1 + s2 - s1 * s2)


def hw_state(space: FockSpace, z1: complex, z2: complex, tail_eps: float = DEFAULT_TAIL_EPS) -> Ket:
    """Product of standard coherent states, a_i |z1, z2> = z_i |z1, z2>."""
    dropped = _poisson_dropped(space, z1, z2)
    if dropped > tail_eps:
        m1, m2 = abs(z1) ** 2, abs(z2) ** 2
        if space.scheme is Scheme.TOTAL:
            need = int(stats.poisson.isf(tail_eps, m1 + m2)) + 1
        else:
            need = max(int(stats.poisson.isf(tail_eps / 2, m)) for m in (m1, m2)) + 1
        raise TruncationTooSmall(f"Poisson tail {dropped:.3e} > {tail_eps:.1e}", required_cutoff=need)
    n1, n2 = space.occupations()
    log_mag = (
        -0.5 * (abs(z1) ** 2 + abs(z2) ** 2)
        + _log_abs_power(z1, n1) + _log_abs_power(z2, n2)
        - 0.5 * (special.gammaln(n1 + 1) + special.gammaln(n2 + 1))
    )
    phase = n1 * np.angle(z1) + n2 * np.angle(z2)
    return Ket(space, np.exp(log_mag + 1j * phase))


# ---------------------------------------------------------------------------
# expectation values


def expectation(A: LinOp, psi: Ket) -> complex:
    nrm = fock.inner(psi, psi).real
    if nrm == 0.0:
        raise UsageError("expectation value of the zero vector")
    return fock.inner(psi, A @ psi) / nrm


def variance(A: LinOp, psi: Ket) -> float:
    nrm = fock.inner(psi, psi).real
    if nrm == 0.0:
        raise UsageError("variance of the zero vector")
    Apsi = A @ psi
    second = fock.inner(psi, A @ Apsi) / nrm
    first = fock.inner(psi, Apsi) / nrm
    return float((second - first * first).real)


def uncertainty_product(gen, psi: Ket, hbar: float) -> tuple[float, float]:
    """(dX * dY, (hbar/2)|<Z>|); the Robertson bound says the first is never smaller."""
    product = np.sqrt(max(variance(gen.X, psi), 0.0) * max(variance(gen.Y, psi), 0.0))
    return float(product), float(hbar / 2 * abs(expectation(gen.Z, psi)))


def gram(kets) -> np.ndarray:
    vecs = np.array([k.amplitudes for k in kets])
    return vecs.conj() @ vecs.T


def su2_jz_closed_form(j: float, zeta: complex, hbar: float = 1.0) -> float:
    r2 = abs(zeta) ** 2
    return -hbar * j * (1 - r2) / (1 + r2)


def su11_kz_closed_form(k: float, zeta: complex, hbar: float = 1.0) -> float:
    r2 = abs(zeta) ** 2
    return hbar * k * (1 + r2) / (1 - r2)


# ---------------------------------------------------------------------------
# resolution of identity


def _su2_block(j: float, radial: int, angular: int) -> np.ndarray:
    # zeta = tan(mu/2) e^{i nu}: d mu(zeta, j) = (2j+1)/(4 pi) sin(mu) dmu dnu
    x, w = np.polynomial.legendre.leggauss(radial)
    mu = 0.5 * np.pi * (x + 1)
    wmu = 0.5 * np.pi * w * (2 * j + 1) / (4 * np.pi) * np.sin(mu)
    nu = 2 * np.pi * np.arange(angular) / angular
    wnu = 2 * np.pi / angular
    dim = int(round(2 * j)) + 1
    acc = np.zeros((dim, dim), dtype=np.complex128)
    for m_, wm in zip(mu, wmu):
        t = np.tan(m_ / 2)
        amps = np.array([su2_amplitudes(j, t * np.exp(1j * v)) for v in nu])
        acc += (wm * wnu) * (amps.T @ amps.conj())
    return acc


def _su11_block(k: float, levels: int, radial: int, angular: int, cutoff: float) -> np.ndarray:
    # zeta = tanh(tau/2) e^{i nu}: d mu(zeta, k) = (2k-1)/(4 pi) sinh(tau) dtau dnu
    tau_max = 2 * np.arctanh(cutoff)
    x, w = np.polynomial.legendre.leggauss(radial)
    tau = 0.5 * tau_max * (x + 1)
    wtau = 0.5 * tau_max * w * (2 * k - 1) / (4 * np.pi) * np.sinh(tau)
    nu = 2 * np.pi * np.arange(angular) / angular
    wnu = 2 * np.pi / angular
    acc = np.zeros((levels, levels), dtype=np.complex128)
    for t_, wt in zip(tau, wtau):
        r = np.tanh(t_ / 2)
        amps = np.array([su11_amplitudes(k, r * np.exp(1j * v), levels) for v in nu])
        acc += (wt * wnu) * (amps.T @ amps.conj())
    return acc


def su11_analytic_tail(k: float, levels: int, cutoff: float) -> np.ndarray:
    """Diagonal mass of the resolution lying outside |zeta| <= cutoff, per level."""
    n = np.arange(levels)
    return special.betaincc(n + 1, 2 * k - 1, cutoff**2)


def _refinements(final: int, start: int = 4) -> list[int]:
    seq = []
    n = start
    while n < final:
        seq.append(n)
        n *= 2
    seq.append(final)
    return seq


def resolution_of_identity_check(family, emb: IrrepEmbedding, quadrature: QuadratureSpec | None = None,
                                 tol: float | None = None, levels: int | None = None,
                                 tail_tol: float = 1e-6) -> CheckReport:
    """Integrate |zeta><zeta| d mu over the chart and compare with the identity.

    SU(2) covers the sphere minus one point (measure zero). SU(1,1) is cut
    at |zeta| = cutoff; the closed-form mass beyond it is reported and the
    tail-corrected deviation isolates the quadrature error.
    """
    family = Family(family)
    quadrature = quadrature or QuadratureSpec()
    report = CheckReport("resolve-identity")
    rep = emb.rep
    if family is Family.SU2:
        if rep.series is not Series.SU2_SPIN:
            raise UsageError("SU2 resolution needs an SU(2) embedding")
        tol = 1e-8 if tol is None else tol
        dim = len(emb)
        report.environment.update(family="SU2", j=rep.value, block_dim=dim,
                                  radial_nodes=quadrature.radial_nodes, angular_nodes=quadrature.angular_nodes)
        rows = []
        for n in _refinements(quadrature.radial_nodes):
            ang = max(quadrature.angular_nodes * n // quadrature.radial_nodes, dim + 1)
            dev = np.linalg.norm(_su2_block(rep.value, n, ang) - np.eye(dim), 2)
            rows.append({"radial_nodes": n, "angular_nodes": ang, "deviation": float(dev)})
        report.tables["roi_convergence_su2"] = rows
        report.check("SU2 resolution of identity", rows[-1]["deviation"], tol)
        report.require("SU2 convergence monotone", _monotone([r["deviation"] for r in rows]),
                       sequence=[r["deviation"] for r in rows])
        return report

    if rep.series is not Series.SU11_DISCRETE:
        raise UsageError("SU11 resolution needs a discrete-series embedding")
    if not rep.has_resolution:
        raise UnsupportedRepresentation(
            f"k = {rep.value:g} <= 1/2: the discrete-series measure weight 2k - 1 is not positive; "
            "only a weak resolution of identity exists, which is not implemented"
        )
    tol = 1e-4 if tol is None else tol
    k = rep.value
    levels = min(len(emb), 11) if levels is None else levels
    report.environment.update(family="SU11", k=k, block_dim=levels, cutoff=quadrature.su11_cutoff,
                              radial_nodes=quadrature.radial_nodes, angular_nodes=quadrature.angular_nodes)
    ang = max(quadrature.angular_nodes, levels + 1)
    rows = []
    cutoffs = [c for c in (0.99, 0.999, 0.9999, 0.99999) if c < quadrature.su11_cutoff] + [quadrature.su11_cutoff]
    for c in cutoffs:
        block = _su11_block(k, levels, quadrature.radial_nodes, ang, c)
        tail = su11_analytic_tail(k, levels, c)
        rows.append({
            "cutoff": c,
            "deviation": float(np.linalg.norm(block - np.eye(levels), 2)),
            "analytic_tail": float(tail.max()),
            "tail_corrected_deviation": float(np.linalg.norm(block + np.diag(tail) - np.eye(levels), 2)),
        })
    report.tables["roi_convergence_su11"] = rows
    final = rows[-1]
    report.check("SU11 resolution of identity", final["deviation"], tol, analytic_tail=final["analytic_tail"])
    report.check("SU11 quadrature error after analytic tail", final["tail_corrected_deviation"], tail_tol)
    report.require("SU11 deviation decreases as cutoff tightens", _monotone([r["deviation"] for r in rows]),
                   sequence=[r["deviation"] for r in rows])
    return report


def _monotone(seq, floor: float = 1e-13) -> bool:
    return all(b <= a * (1 + 1e-9) + floor for a, b in zip(seq, seq[1:]))
