"""Constraint operators, their commuting generator triples and Casimirs.

Three quadratic constraints on the two-mode space, with ladder operators
defined by q = sqrt(hbar/2)(a + a^dag), p = -i sqrt(hbar/2)(a - a^dag):

* A (oscillator sum):   phi = hbar (N1 + N2 + 1 - R^2 / 2 hbar), algebra su(2)
* B (oscillator diff.): phi = hbar (N1 - N2 - R^2 / 2 hbar),     algebra su(1,1)
* C (inverted osc.):    phi = -hbar/2 (a1^dag^2 + a2^dag^2 + a1^2 + a2^2 + R^2/hbar),
                        algebra su(1,1), principal continuous series
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass

import numpy as np
import scipy.sparse

from . import fock
from .errors import ConfigError, NoPhysicalStates, UnsupportedRepresentation, UsageError
from .fock import FockSpace, LinOp, Scheme
from .report import BOUNDARY, CheckRecord, CheckReport

QUANTIZATION_RTOL = 1e-9


class Model(str, enum.Enum):
    A = "A"  # oscillator sum
    B = "B"  # oscillator difference
    C = "C"  # inverted oscillator

    @classmethod
    def parse(cls, value) -> "Model":
        if isinstance(value, Model):
            return value
        key = str(value).strip().upper()
        aliases = {"A_OSCSUM": "A", "B_OSCDIFF": "B", "C_INVERTED": "C"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ConfigError(f"unknown model {value!r}; expected A, B or C", "model") from None


class Series(str, enum.Enum):
    SU2_SPIN = "SU2_spin"
    SU11_DISCRETE = "SU11_discrete"
    SU11_PRINCIPAL = "SU11_principal"


class Signature(str, enum.Enum):
    COMPACT = "compact"        # su(2)
    NONCOMPACT = "noncompact"  # su(1,1)


DEFAULT_SCHEME = {Model.A: Scheme.TOTAL, Model.B: Scheme.PERMODE, Model.C: Scheme.PERMODE}


@dataclass(frozen=True)
class ModelSpec:
    model: Model
    r_sq: float
    hbar: float
    space: FockSpace

    def __post_init__(self):
        object.__setattr__(self, "model", Model.parse(self.model))
        if not np.isfinite(self.r_sq) or self.r_sq <= 0:
            raise ConfigError(f"R^2 must be positive, got {self.r_sq!r}", "R_sq")
        if not np.isfinite(self.hbar) or self.hbar <= 0:
            raise ConfigError(f"hbar must be positive, got {self.hbar!r}", "hbar")
        object.__setattr__(self, "r_sq", float(self.r_sq))
        object.__setattr__(self, "hbar", float(self.hbar))

    @classmethod
    def build(cls, model, r_sq, hbar=1.0, cutoff=10, scheme=None) -> "ModelSpec":
        model = Model.parse(model)
        space = fock.make_space(scheme or DEFAULT_SCHEME[model], cutoff)
        return cls(model, r_sq, hbar, space)

    def to_dict(self) -> dict:
        return {"model": self.model.value, "R_sq": self.r_sq, "hbar": self.hbar,
                "space": self.space.to_dict()}


@dataclass(frozen=True)
class RepIndex:
    series: Series
    value: float
    alternate: bool = False

    def __post_init__(self):
        series = Series(self.series)
        object.__setattr__(self, "series", series)
        v = float(self.value)
        if series is Series.SU2_SPIN:
            twice = 2 * v
            if twice < 0 or abs(twice - round(twice)) > 1e-12:
                raise ValueError(f"spin j={v} must be a non-negative half-integer")
        elif series is Series.SU11_DISCRETE:
            if v < 0.5:
                raise UnsupportedRepresentation(f"discrete-series k={v} < 1/2 has no resolution of identity")
        elif v <= 0:
            raise ValueError(f"principal-series lambda={v} must be positive")

    @property
    def has_resolution(self) -> bool:
        """False for discrete-series k <= 1/2, where d mu vanishes or is negative."""
        return not (self.series is Series.SU11_DISCRETE and self.value <= 0.5)

    def casimir_value(self, hbar: float = 1.0) -> float:
        v = self.value
        if self.series is Series.SU2_SPIN:
            return hbar**2 * v * (v + 1)
        if self.series is Series.SU11_DISCRETE:
            return hbar**2 * v * (v - 1)
        return -(hbar**2) * (v * v + 0.25)

    def to_dict(self) -> dict:
        return {"series": self.series.value, "value": self.value, "alternate": self.alternate}


@dataclass(frozen=True)
class GeneratorTriple:
    X: LinOp
    Y: LinOp
    Z: LinOp
    signature: Signature

    def __iter__(self):
        return iter((self.X, self.Y, self.Z))

    @property
    def space(self) -> FockSpace:
        return self.X.space


def _sparse_ladders(space):
    a1 = scipy.sparse.csr_matrix(fock.annihilation(space, 1).matrix)
    a2 = scipy.sparse.csr_matrix(fock.annihilation(space, 2).matrix)
    return a1, a2, a1.conj().T.tocsr(), a2.conj().T.tocsr()


def _dense(space, sparse) -> LinOp:
    return LinOp(space, sparse.toarray())


@functools.lru_cache(maxsize=8)
def build_constraint(spec: ModelSpec) -> LinOp:
    space, hbar, r_sq = spec.space, spec.hbar, spec.r_sq
    n1, n2 = space.occupations()
    if spec.model is Model.A:
        return LinOp(space, np.diag(hbar * (n1 + n2 + 1) - r_sq / 2))
    if spec.model is Model.B:
        return LinOp(space, np.diag(hbar * (n1 - n2) - r_sq / 2.0))
    a1, a2, c1, c2 = _sparse_ladders(space)
    quad = c1 @ c1 + c2 @ c2 + a1 @ a1 + a2 @ a2
    eye = scipy.sparse.identity(space.dim, format="csr")
    return _dense(space, (-hbar / 2) * quad - (r_sq / 2) * eye)


@functools.lru_cache(maxsize=8)
def build_generators(spec: ModelSpec) -> GeneratorTriple:
    """Generator triple of the model; products are formed sparsely, results are dense and read-only."""
    space, hbar = spec.space, spec.hbar
    a1, a2, c1, c2 = _sparse_ladders(space)
    eye = scipy.sparse.identity(space.dim, format="csr")
    if spec.model is Model.A:
        X = (hbar / 2) * (c1 @ a2 + c2 @ a1)
        Y = (1j * hbar / 2) * (c2 @ a1 - c1 @ a2)
        Z = (hbar / 2) * (c1 @ a1 - c2 @ a2)
        sig = Signature.COMPACT
    elif spec.model is Model.B:
        X = (1j * hbar / 2) * (c1 @ c2 - a1 @ a2)
        Y = (hbar / 2) * (c1 @ c2 + a1 @ a2)
        Z = (hbar / 2) * (c1 @ a1 + c2 @ a2 + eye)
        sig = Signature.NONCOMPACT
    else:
        X = (hbar / 4) * (c1 @ c1 - c2 @ c2 + a1 @ a1 - a2 @ a2)
        Y = (hbar / 2) * (c1 @ c2 + a1 @ a2)
        Z = (1j * hbar / 2) * (c2 @ a1 - c1 @ a2)
        sig = Signature.NONCOMPACT
    return GeneratorTriple(_dense(space, X), _dense(space, Y), _dense(space, Z), sig)


def max_shift(ops) -> int:
    """Largest change of a single mode's occupation produced by any of ``ops``."""
    ops = list(ops)
    space = ops[0].space
    n1, n2 = space.occupations()
    shift = 0
    for op in ops:
        rows, cols = np.nonzero(np.abs(op.matrix) > 0)
        if not rows.size:
            continue
        if space.scheme is Scheme.TOTAL:
            d = np.abs((n1 + n2)[rows] - (n1 + n2)[cols]).max()
        else:
            d = max(np.abs(n1[rows] - n1[cols]).max(), np.abs(n2[rows] - n2[cols]).max())
        shift = max(shift, int(d))
    return shift


def required_margin(gen: GeneratorTriple, factors: int = 2) -> int:
    """Interior margin making a product of ``factors`` generators exact.

    Only the ``factors - 1`` intermediate applications can leave the basis,
    so the margin is that many single-generator shifts.
    """
    return (factors - 1) * max_shift(gen)


def structure_relations(gen: GeneratorTriple, hbar: float):
    """(label, commutator, expected) for the three Lie brackets."""
    X, Y, Z = gen
    s = 1.0 if gen.signature is Signature.COMPACT else -1.0
    return [
        ("[X,Y]", fock.commutator(X, Y), (s * 1j * hbar) * Z),
        ("[Y,Z]", fock.commutator(Y, Z), (1j * hbar) * X),
        ("[Z,X]", fock.commutator(Z, X), (1j * hbar) * Y),
    ]


def _margin_or_raise(gen, margin, factors, boundary_expected):
    need = required_margin(gen, factors)
    if margin < need and not boundary_expected:
        raise UsageError(
            f"margin {margin} too small: products of {factors} generators shift a mode by "
            f"up to {need}; pass boundary_expected=True to report boundary deviations"
        )
    return need


def check_algebra(gen: GeneratorTriple, hbar: float, margin: int, tol: float = 1e-12,
                  boundary_expected: bool = False, hermiticity_tol: float = 1e-13) -> CheckReport:
    need = _margin_or_raise(gen, margin, 2, boundary_expected)
    mask = fock.interior_mask(gen.space, margin) if margin > 0 else np.ones(gen.space.dim, bool)
    report = CheckReport("check-algebra")
    report.environment.update(space=gen.space.to_dict(), margin=margin, signature=gen.signature.value)
    for label, lhs, rhs in structure_relations(gen, hbar):
        dev = fock.interior_deviation(lhs - rhs, mask)
        if margin < need:
            report.records.append(CheckRecord(f"algebra {label}", dev, tol, BOUNDARY,
                                              {"required_margin": need}))
        else:
            report.check(f"algebra {label}", dev, tol)
    for name, G in zip("XYZ", gen):
        report.check(f"self-adjoint {name}", G.hermiticity_error(), hermiticity_tol)
    return report


def casimir(spec: ModelSpec, gen: GeneratorTriple) -> LinOp:
    X, Y, Z = gen
    if gen.signature is Signature.COMPACT:
        return X @ X + Y @ Y + Z @ Z
    return Z @ Z - X @ X - Y @ Y


def casimir_from_constraint(spec: ModelSpec, phi: LinOp) -> LinOp:
    """The Casimir written as a function of the constraint operator."""
    hbar = spec.hbar
    shifted = phi + (spec.r_sq / 2) * fock.identity(phi.space)
    sq = (shifted @ shifted) * (1 / hbar**2)
    eye = fock.identity(phi.space)
    if spec.model is Model.C:
        return (-(hbar**2) / 4) * (sq + eye)
    return (hbar**2 / 4) * (sq - eye)


def casimir_constraint_identity(spec: ModelSpec, gen: GeneratorTriple, margin: int,
                                tol: float = 1e-10, commutator_tol: float = 1e-11) -> CheckReport:
    _margin_or_raise(gen, margin, 2, False)
    space = spec.space
    mask = fock.interior_mask(space, margin) if margin > 0 else np.ones(space.dim, bool)
    phi = build_constraint(spec)
    c2 = casimir(spec, gen)
    report = CheckReport("casimir-identity")
    report.environment.update(space=space.to_dict(), margin=margin, model=spec.model.value)
    report.check("casimir = f(constraint)", fock.interior_deviation(c2 - casimir_from_constraint(spec, phi), mask), tol)

    if spec.model is Model.B:
        n1, n2 = space.occupations()
        diff = LinOp(space, np.diag((spec.hbar**2 / 4) * ((n1 - n2) ** 2 - 1.0)))
        report.check("casimir = hbar^2/4 ((N1-N2)^2 - 1)", fock.interior_deviation(c2 - diff, mask), tol)

    if spec.model in (Model.A, Model.B):
        kern = mask & (np.abs(np.diag(phi.matrix).real) <= kernel_threshold(phi))
        if kern.any():
            target = spec.hbar**2 / 4 * (spec.r_sq**2 / (4 * spec.hbar**2) - 1)
            resid = c2 - target * fock.identity(space)
            report.check("casimir on ker(phi) = (R^4/4 - hbar^2)/4",
                         fock.interior_deviation(resid, kern), tol, kernel_states=int(kern.sum()))
        else:
            report.info("casimir on ker(phi)", 0.0, note="no interior kernel states")

    cmargin = required_margin(gen, 3)
    if margin >= cmargin:
        cmask = fock.interior_mask(space, margin) if margin > 0 else np.ones(space.dim, bool)
        for name, G in zip("XYZ", gen):
            report.check(f"[casimir,{name}] = 0", fock.interior_deviation(fock.commutator(c2, G), cmask), commutator_tol)
    else:
        report.skip("[casimir,G] = 0", f"needs margin >= {cmargin}")
    return report


def kernel_threshold(phi: LinOp) -> float:
    """Zero-eigenvalue cutoff |e| <= 1e-9 max(1, ||phi||)."""
    return 1e-9 * max(1.0, float(np.linalg.norm(phi.matrix, 2)))


def rep_index_from_R(model, r_sq: float, hbar: float = 1.0) -> RepIndex:
    model = Model.parse(model)
    if r_sq <= 0 or hbar <= 0:
        raise ConfigError("R^2 and hbar must be positive", "R_sq")
    x = r_sq / (2 * hbar)
    if model is Model.A:
        two_j = x - 1
        nearest = round(two_j)
        if abs(two_j - nearest) > QUANTIZATION_RTOL * max(1.0, abs(two_j)) or nearest < 0:
            raise NoPhysicalStates(
                f"R^2/(2 hbar) - 1 = {two_j:g} is not a non-negative integer 2j: the constraint "
                "has no zero eigenvalue, so there are no physical states in the kinematical "
                "space or its dual; R itself must take one of the allowed values"
            )
        return RepIndex(Series.SU2_SPIN, nearest / 2)
    if model is Model.B:
        return RepIndex(Series.SU11_DISCRETE, (1 + x) / 2, alternate=r_sq < 2 * hbar)
    return RepIndex(Series.SU11_PRINCIPAL, r_sq / (4 * hbar))


def discrete_offset(spec: ModelSpec, rep: RepIndex) -> int:
    """n1 - n2 = 2k - 1 on the model-B kernel; raises if not an integer."""
    offset = 2 * rep.value - 1
    nearest = round(offset)
    if abs(offset - nearest) > QUANTIZATION_RTOL * max(1.0, abs(offset)) or nearest < 0:
        raise NoPhysicalStates(
            f"R^2/(2 hbar) = {offset:g} is not an integer: N1 - N2 has integer spectrum, "
            "so the constraint has no kernel and R must be discrete"
        )
    return int(nearest)
