"""Truncated two-mode Fock space and dense operator algebra.

Basis states |n1, n2> are ordered lexicographically in (n1 + n2, n1), for
both truncation schemes:

* ``total``   -- keep n1 + n2 <= N, dim = (N + 1)(N + 2) / 2
* ``permode`` -- keep n1 <= N and n2 <= N, dim = (N + 1)**2

Ladder transitions that would leave the truncated basis are dropped.
Statements about operator identities are therefore only made on interior
vectors, selected with :func:`interior_projector`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from numbers import Number

import numpy as np

from .errors import ConfigError, SpaceMismatchError, UsageError

MAX_DIM = 10_000


class Scheme(str, enum.Enum):
    TOTAL = "total"
    PERMODE = "permode"


@dataclass(frozen=True)
class FockSpace:
    scheme: Scheme
    cutoff: int
    basis: tuple = field(init=False, repr=False, compare=False)
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        scheme = Scheme(self.scheme)
        object.__setattr__(self, "scheme", scheme)
        N = self.cutoff
        if scheme is Scheme.TOTAL:
            pairs = [(n1, n2) for n1 in range(N + 1) for n2 in range(N + 1 - n1)]
        else:
            pairs = [(n1, n2) for n1 in range(N + 1) for n2 in range(N + 1)]
        pairs.sort(key=lambda p: (p[0] + p[1], p[0]))
        object.__setattr__(self, "basis", tuple(pairs))
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(pairs)})

    @property
    def dim(self) -> int:
        return len(self.basis)

    def index(self, n1: int, n2: int) -> int:
        """Basis position of |n1, n2>; KeyError if truncated away."""
        return self._index[(n1, n2)]

    def contains(self, n1: int, n2: int) -> bool:
        return (n1, n2) in self._index

    def occupations(self) -> tuple[np.ndarray, np.ndarray]:
        """Arrays (n1, n2) aligned with the basis order."""
        arr = np.array(self.basis, dtype=np.int64).reshape(-1, 2)
        return arr[:, 0], arr[:, 1]

    def to_dict(self) -> dict:
        return {"scheme": self.scheme.value, "N": self.cutoff, "dim": self.dim}

    @classmethod
    def from_dict(cls, data: dict) -> "FockSpace":
        space = make_space(data["scheme"], int(data["N"]))
        if "dim" in data and int(data["dim"]) != space.dim:
            raise ConfigError(f"dim {data['dim']} inconsistent with {space}", "space.dim")
        return space


def expected_dim(scheme, N: int) -> int:
    if Scheme(scheme) is Scheme.TOTAL:
        return (N + 1) * (N + 2) // 2
    return (N + 1) ** 2


def make_space(scheme, N: int) -> FockSpace:
    """Build a truncated two-mode space; N must be >= 1."""
    try:
        scheme = Scheme(scheme)
    except ValueError:
        raise ConfigError(f"unknown truncation scheme {scheme!r}", "truncation.scheme") from None
    if isinstance(N, bool) or not isinstance(N, (int, np.integer)) or N < 1:
        raise ConfigError(f"cutoff must be a positive integer, got {N!r}", "truncation.N")
    if expected_dim(scheme, int(N)) > MAX_DIM:
        raise ConfigError(
            f"dimension {expected_dim(scheme, int(N))} exceeds MAX_DIM={MAX_DIM}",
            "truncation.N",
        )
    return FockSpace(scheme, int(N))


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class LinOp:
    """Dense complex matrix acting on a :class:`FockSpace`."""

    space: FockSpace
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        if m.shape != (self.space.dim, self.space.dim):
            raise UsageError(f"matrix shape {m.shape} does not match dim {self.space.dim}")
        object.__setattr__(self, "matrix", _frozen(m))

    def _check(self, other):
        if other.space != self.space:
            raise SpaceMismatchError(f"{self.space} vs {other.space}")

    def __add__(self, other):
        if isinstance(other, LinOp):
            return add(self, other)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, LinOp):
            return add(self, scale(-1, other))
        return NotImplemented

    def __neg__(self):
        return scale(-1, self)

    def __mul__(self, c):
        if isinstance(c, Number):
            return scale(c, self)
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, LinOp):
            return mul(self, other)
        if isinstance(other, Ket):
            return apply(self, other)
        return NotImplemented

    @property
    def H(self) -> "LinOp":
        return adjoint(self)

    def hermiticity_error(self) -> float:
        return float(np.abs(self.matrix - self.matrix.conj().T).max(initial=0.0))


@dataclass(frozen=True, eq=False)
class Ket:
    space: FockSpace
    amplitudes: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        v = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if v.shape[0] != self.space.dim:
            raise UsageError(f"ket length {v.shape[0]} does not match dim {self.space.dim}")
        if self.normalized and abs(np.vdot(v, v).real - 1.0) > 1e-12:
            raise UsageError("ket flagged normalized but |<psi|psi> - 1| > 1e-12")
        object.__setattr__(self, "amplitudes", _frozen(v))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "Ket":
        n = self.norm()
        if n == 0.0:
            raise UsageError("cannot normalize the zero vector")
        return Ket(self.space, self.amplitudes / n, normalized=True)

    def __add__(self, other):
        if other.space != self.space:
            raise SpaceMismatchError(f"{self.space} vs {other.space}")
        return Ket(self.space, self.amplitudes + other.amplitudes)

    def __sub__(self, other):
        if other.space != self.space:
            raise SpaceMismatchError(f"{self.space} vs {other.space}")
        return Ket(self.space, self.amplitudes - other.amplitudes)

    def __mul__(self, c):
        if isinstance(c, Number):
            return Ket(self.space, c * self.amplitudes)
        return NotImplemented

    __rmul__ = __mul__


# ---------------------------------------------------------------------------
# operator algebra


def add(A: LinOp, B: LinOp) -> LinOp:
    A._check(B)
    return LinOp(A.space, A.matrix + B.matrix)


def scale(c, A: LinOp) -> LinOp:
    return LinOp(A.space, c * A.matrix)


def mul(A: LinOp, B: LinOp) -> LinOp:
    A._check(B)
    return LinOp(A.space, A.matrix @ B.matrix)


def adjoint(A: LinOp) -> LinOp:
    return LinOp(A.space, A.matrix.conj().T)


def commutator(A: LinOp, B: LinOp) -> LinOp:
    A._check(B)
    return LinOp(A.space, A.matrix @ B.matrix - B.matrix @ A.matrix)


def apply(A: LinOp, psi: Ket) -> Ket:
    if A.space != psi.space:
        raise SpaceMismatchError(f"{A.space} vs {psi.space}")
    return Ket(A.space, A.matrix @ psi.amplitudes)


def inner(psi: Ket, phi: Ket) -> complex:
    """<psi|phi>, conjugate-linear in ``psi``."""
    if psi.space != phi.space:
        raise SpaceMismatchError(f"{psi.space} vs {phi.space}")
    return complex(np.vdot(psi.amplitudes, phi.amplitudes))


# ---------------------------------------------------------------------------
# elementary operators and states


def identity(space: FockSpace) -> LinOp:
    return LinOp(space, np.eye(space.dim))


def annihilation(space: FockSpace, mode: int) -> LinOp:
    """a_1 or a_2; <n-1|a|n> = sqrt(n), transitions out of the basis dropped."""
    if mode not in (1, 2):
        raise UsageError(f"mode must be 1 or 2, got {mode!r}")
    m = np.zeros((space.dim, space.dim))
    for col, (n1, n2) in enumerate(space.basis):
        n = n1 if mode == 1 else n2
        if n == 0:
            continue
        target = (n1 - 1, n2) if mode == 1 else (n1, n2 - 1)
        if space.contains(*target):
            m[space.index(*target), col] = np.sqrt(n)
    return LinOp(space, m)


def creation(space: FockSpace, mode: int) -> LinOp:
    return adjoint(annihilation(space, mode))


def number(space: FockSpace, mode: int) -> LinOp:
    n1, n2 = space.occupations()
    return LinOp(space, np.diag((n1 if mode == 1 else n2).astype(float)))


def basis_ket(space: FockSpace, n1: int, n2: int) -> Ket:
    v = np.zeros(space.dim, dtype=np.complex128)
    v[space.index(n1, n2)] = 1.0
    return Ket(space, v, normalized=True)


def interior_mask(space: FockSpace, margin: int) -> np.ndarray:
    """Boolean mask of basis states at least ``margin`` quanta below the cutoff."""
    if isinstance(margin, bool) or not isinstance(margin, (int, np.integer)) or margin < 0:
        raise ConfigError(f"margin must be a non-negative integer, got {margin!r}", "margin")
    if margin > space.cutoff:
        raise ConfigError(f"margin {margin} exceeds cutoff {space.cutoff}", "margin")
    n1, n2 = space.occupations()
    top = space.cutoff - margin
    if space.scheme is Scheme.TOTAL:
        return (n1 + n2) <= top
    return (n1 <= top) & (n2 <= top)


def interior_projector(space: FockSpace, margin: int) -> LinOp:
    return LinOp(space, np.diag(interior_mask(space, margin).astype(float)))


def interior_deviation(op: LinOp, mask: np.ndarray) -> float:
    """max_v ||op v|| over interior basis vectors v."""
    cols = op.matrix[:, mask]
    if cols.size == 0:
        return 0.0
    return float(np.linalg.norm(cols, axis=0).max())
