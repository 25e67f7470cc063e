"""
Exact and floating complex scalars, state vectors over labeled orthonormal
bases, diagonal observables and the isometries used by the derivation.

Exact amplitudes are stored as ``(|c|^2, phase)`` with the phase in rational
turns (angle / 2pi). Refinement (divide |c|^2 by z), phase rotation and
permutation are closed over this representation, while sqrt(2) is not a
rational real part. Sums of exact amplitudes are only exact when the terms are
parallel or antiparallel and their magnitude product is a rational square;
anything else raises ExactClosureError and callers fall back to floats.
"""

import cmath
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import reduce
from typing import Optional, Sequence, Tuple

import numpy as np

from born_engine import settings
from born_engine.errors import (
    BasisMismatchError,
    DimensionMismatchError,
    ExactClosureError,
    IndexOutOfRangeError,
    InvalidAmplitudeError,
)

logger = logging.getLogger(__name__)

HALF_TURN = Fraction(1, 2)


class Mode(str, Enum):
    EXACT = "exact"
    FLOAT = "float"


def exact_sqrt(value: Fraction) -> Optional[Fraction]:
    """Rational square root of a non-negative rational, or None if irrational"""
    value = Fraction(value)
    if value < 0:
        return None
    num, den = value.numerator, value.denominator
    root_num, root_den = math.isqrt(num), math.isqrt(den)
    if root_num * root_num == num and root_den * root_den == den:
        return Fraction(root_num, root_den)
    return None


@dataclass(frozen=True)
class Amplitude:
    """A complex coefficient, exact (mag2, phase turns) or float (re, im)"""

    mode: Mode
    mag2: Fraction = Fraction(0)
    phase: Fraction = Fraction(0)
    re: float = 0.0
    im: float = 0.0

    def __post_init__(self):
        if self.mode is Mode.EXACT:
            mag2 = Fraction(self.mag2)
            if mag2 < 0:
                raise InvalidAmplitudeError(f"negative |c|^2: {mag2}")
            phase = Fraction(self.phase) % 1 if mag2 else Fraction(0)
            object.__setattr__(self, "mag2", mag2)
            object.__setattr__(self, "phase", phase)
            object.__setattr__(self, "re", 0.0)
            object.__setattr__(self, "im", 0.0)
        else:
            re, im = float(self.re), float(self.im)
            if not (math.isfinite(re) and math.isfinite(im)):
                raise InvalidAmplitudeError(f"non-finite amplitude {re}+{im}j")
            object.__setattr__(self, "re", re)
            object.__setattr__(self, "im", im)
            object.__setattr__(self, "mag2", Fraction(0))
            object.__setattr__(self, "phase", Fraction(0))

    # Constructors

    @classmethod
    def exact(cls, mag2, phase=0) -> "Amplitude":
        return cls(Mode.EXACT, mag2=Fraction(mag2), phase=Fraction(phase))

    @classmethod
    def from_complex(cls, value: complex) -> "Amplitude":
        value = complex(value)
        return cls(Mode.FLOAT, re=value.real, im=value.imag)

    @classmethod
    def zero(cls, mode: Mode = Mode.EXACT) -> "Amplitude":
        return cls(mode)

    @classmethod
    def one(cls, mode: Mode = Mode.EXACT) -> "Amplitude":
        if mode is Mode.EXACT:
            return cls.exact(1)
        return cls.from_complex(1.0)

    # Queries

    @property
    def is_exact(self) -> bool:
        return self.mode is Mode.EXACT

    @property
    def is_zero(self) -> bool:
        if self.is_exact:
            return self.mag2 == 0
        return self.re == 0.0 and self.im == 0.0

    def abs2(self):
        """|c|^2, a Fraction in exact mode"""
        if self.is_exact:
            return self.mag2
        return self.re * self.re + self.im * self.im

    def phase_turns(self) -> float:
        if self.is_exact:
            return float(self.phase)
        return (math.atan2(self.im, self.re) / (2 * math.pi)) % 1.0

    def to_complex(self) -> complex:
        if self.is_exact:
            return math.sqrt(self.mag2) * cmath.exp(2j * math.pi * float(self.phase))
        return complex(self.re, self.im)

    def to_float(self) -> "Amplitude":
        if not self.is_exact:
            return self
        return Amplitude.from_complex(self.to_complex())

    def is_close(self, other: "Amplitude", tol: float = settings.FLOAT_TOL) -> bool:
        if self.is_exact and other.is_exact:
            return self == other
        return abs(self.to_complex() - other.to_complex()) <= tol * max(
            1.0, abs(self.to_complex()), abs(other.to_complex())
        )

    # Arithmetic

    def conjugate(self) -> "Amplitude":
        if self.is_exact:
            return Amplitude.exact(self.mag2, -self.phase)
        return Amplitude.from_complex(self.to_complex().conjugate())

    def rotate(self, turns) -> "Amplitude":
        """Multiply by exp(2 pi i turns)"""
        if self.is_exact and isinstance(turns, (int, Fraction)):
            return Amplitude.exact(self.mag2, self.phase + Fraction(turns))
        return Amplitude.from_complex(
            self.to_complex() * cmath.exp(2j * math.pi * float(turns))
        )

    def divide_sqrt(self, z: int) -> "Amplitude":
        """c / sqrt(z)"""
        if self.is_exact:
            return Amplitude.exact(self.mag2 / z, self.phase)
        return Amplitude.from_complex(self.to_complex() / math.sqrt(z))

    def __neg__(self) -> "Amplitude":
        return self.rotate(HALF_TURN)

    def __mul__(self, other: "Amplitude") -> "Amplitude":
        if self.is_exact and other.is_exact:
            return Amplitude.exact(self.mag2 * other.mag2, self.phase + other.phase)
        return Amplitude.from_complex(self.to_complex() * other.to_complex())

    def __add__(self, other: "Amplitude") -> "Amplitude":
        if not (self.is_exact and other.is_exact):
            return Amplitude.from_complex(self.to_complex() + other.to_complex())
        if other.is_zero:
            return self
        if self.is_zero:
            return other
        cross = exact_sqrt(self.mag2 * other.mag2)
        if cross is None:
            raise ExactClosureError(
                f"|c|^2 product {self.mag2 * other.mag2} is not a rational square"
            )
        if self.phase == other.phase:
            return Amplitude.exact(self.mag2 + other.mag2 + 2 * cross, self.phase)
        if (self.phase - other.phase) % 1 == HALF_TURN:
            mag2 = self.mag2 + other.mag2 - 2 * cross
            phase = self.phase if self.mag2 >= other.mag2 else other.phase
            return Amplitude.exact(mag2, phase)
        raise ExactClosureError(
            f"phases {self.phase} and {other.phase} are neither equal nor opposite"
        )

    def __str__(self) -> str:
        if self.is_exact:
            return f"sqrt({self.mag2})*e^(2pi i {self.phase})"
        return f"{self.to_complex()}"


def exact_sum(terms: Sequence[Amplitude]) -> Amplitude:
    """Sum amplitudes, exactly when possible, otherwise in float mode"""
    if not terms:
        return Amplitude.zero()
    if all(term.is_exact for term in terms):
        try:
            return reduce(lambda a, b: a + b, terms)
        except ExactClosureError as exc:
            logger.warning(f"Exact sum not representable, converting to float: {exc}")
    return Amplitude.from_complex(sum(term.to_complex() for term in terms))


@dataclass(frozen=True)
class StateVector:
    """Coefficients of a vector in the orthonormal family named by basis_tag"""

    coeffs: Tuple[Amplitude, ...]
    basis_tag: str = "phi"

    def __post_init__(self):
        coeffs = tuple(self.coeffs)
        if not coeffs:
            raise DimensionMismatchError("a state vector needs at least one coefficient")
        modes = {c.mode for c in coeffs}
        if len(modes) > 1:
            raise InvalidAmplitudeError("exact and float amplitudes cannot be mixed")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def basis(cls, dim: int, k: int, basis_tag: str = "phi", mode: Mode = Mode.EXACT):
        """The unit vector phi_k (0-based k)"""
        if not 0 <= k < dim:
            raise IndexOutOfRangeError(f"basis index {k} outside 0..{dim - 1}")
        return cls(
            tuple(Amplitude.one(mode) if j == k else Amplitude.zero(mode) for j in range(dim)),
            basis_tag,
        )

    @classmethod
    def from_mag2(cls, mag2s: Sequence, phases: Optional[Sequence] = None, basis_tag="phi"):
        phases = phases if phases is not None else [0] * len(mag2s)
        if len(phases) != len(mag2s):
            raise DimensionMismatchError("one phase per coefficient is required")
        return cls(tuple(Amplitude.exact(m, p) for m, p in zip(mag2s, phases)), basis_tag)

    @classmethod
    def from_complex(cls, values: Sequence[complex], basis_tag="phi"):
        return cls(tuple(Amplitude.from_complex(v) for v in values), basis_tag)

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    @property
    def mode(self) -> Mode:
        return self.coeffs[0].mode

    @property
    def is_exact(self) -> bool:
        return self.mode is Mode.EXACT

    def mag2s(self) -> tuple:
        return tuple(c.abs2() for c in self.coeffs)

    def phases(self) -> tuple:
        if self.is_exact:
            return tuple(c.phase for c in self.coeffs)
        return tuple(c.phase_turns() for c in self.coeffs)

    def norm2(self):
        """<v, v>; exact whenever the vector is exact"""
        if self.is_exact:
            return sum(self.mag2s(), Fraction(0))
        return float(sum(self.mag2s()))

    def scaled(self, factor: Amplitude) -> "StateVector":
        return StateVector(tuple(c * factor for c in self.coeffs), self.basis_tag)

    def retagged(self, basis_tag: str) -> "StateVector":
        return StateVector(self.coeffs, basis_tag)

    def to_float(self) -> "StateVector":
        return StateVector(tuple(c.to_float() for c in self.coeffs), self.basis_tag)

    def to_numpy(self) -> np.ndarray:
        return np.array([c.to_complex() for c in self.coeffs], dtype=complex)

    def is_close(self, other: "StateVector", tol: float = settings.FLOAT_TOL) -> bool:
        if self.dim != other.dim:
            return False
        return all(a.is_close(b, tol) for a, b in zip(self.coeffs, other.coeffs))


@dataclass(frozen=True)
class Observable:
    """X = sum_k lambda_k P_k, diagonal in the basis of the associated state.

    ``blocks`` lists the spectral projectors as groups of basis indices; by
    default every basis vector carries its own rank-1 projector.
    """

    eigenvalues: Tuple[Fraction, ...]
    blocks: Optional[Tuple[Tuple[int, ...], ...]] = None

    def __post_init__(self):
        eigenvalues = tuple(Fraction(x) for x in self.eigenvalues)
        if not eigenvalues:
            raise DimensionMismatchError("an observable needs at least one eigenvalue")
        dim = len(eigenvalues)
        blocks = self.blocks
        if blocks is None:
            blocks = tuple((k,) for k in range(dim))
        blocks = tuple(sorted(tuple(sorted(int(k) for k in block)) for block in blocks))
        covered = sorted(k for block in blocks for k in block)
        if covered != list(range(dim)) or any(not block for block in blocks):
            raise DimensionMismatchError(f"projector blocks {blocks} do not partition 0..{dim - 1}")
        for block in blocks:
            if len({eigenvalues[k] for k in block}) != 1:
                raise DimensionMismatchError(f"eigenvalue varies inside projector block {block}")
        object.__setattr__(self, "eigenvalues", eigenvalues)
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def sigma_z(cls) -> "Observable":
        return cls((Fraction(1, 2), Fraction(-1, 2)))

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def spectrum(self) -> Tuple[Fraction, ...]:
        return tuple(sorted(set(self.eigenvalues)))

    def coarsened(self) -> "Observable":
        """Merge the rank-1 projectors sharing an eigenvalue into spectral projectors"""
        groups = {}
        for k, lam in enumerate(self.eigenvalues):
            groups.setdefault(lam, []).append(k)
        blocks = tuple(tuple(groups[lam]) for lam in self.spectrum())
        return Observable(self.eigenvalues, blocks)


class IsometryKind(str, Enum):
    PERMUTATION = "permutation"
    PHASE_ROTATION = "phase"
    REFINEMENT = "refinement"


@dataclass(frozen=True)
class Isometry:
    """A permutation, a phase rotation or a refinement of the channel basis.

    Indices are 0-based: ``Isometry.permutation((1, 0))`` swaps phi_1 and phi_2.
    """

    kind: IsometryKind
    params: tuple = field(default_factory=tuple)

    def __post_init__(self):
        params = tuple(self.params)
        if not params:
            raise DimensionMismatchError("an isometry needs a non-empty parameter list")
        if self.kind is IsometryKind.PERMUTATION:
            params = tuple(int(x) for x in params)
            if sorted(params) != list(range(len(params))):
                raise DimensionMismatchError(f"{params} is not a permutation of 0..{len(params) - 1}")
        elif self.kind is IsometryKind.PHASE_ROTATION:
            params = tuple(Fraction(x) if not isinstance(x, float) else x for x in params)
        else:
            params = tuple(int(x) for x in params)
            if any(z < 1 for z in params):
                raise DimensionMismatchError(f"refinement sizes must be >= 1, got {params}")
        object.__setattr__(self, "params", params)

    @classmethod
    def permutation(cls, pi: Sequence[int]) -> "Isometry":
        return cls(IsometryKind.PERMUTATION, tuple(pi))

    @classmethod
    def phase_rotation(cls, theta: Sequence) -> "Isometry":
        return cls(IsometryKind.PHASE_ROTATION, tuple(theta))

    @classmethod
    def refinement(cls, z: Sequence[int]) -> "Isometry":
        return cls(IsometryKind.REFINEMENT, tuple(z))

    @property
    def source_dim(self) -> int:
        return len(self.params)

    @property
    def target_dim(self) -> int:
        if self.kind is IsometryKind.REFINEMENT:
            return sum(self.params)
        return len(self.params)

    def blocks(self) -> Tuple[Tuple[int, ...], ...]:
        """Target indices receiving each source basis vector"""
        if self.kind is IsometryKind.PERMUTATION:
            return tuple((j,) for j in self.params)
        if self.kind is IsometryKind.PHASE_ROTATION:
            return tuple((k,) for k in range(self.source_dim))
        blocks, start = [], 0
        for z in self.params:
            blocks.append(tuple(range(start, start + z)))
            start += z
        return tuple(blocks)

    def target_tag(self, basis_tag: str) -> str:
        if self.kind is IsometryKind.REFINEMENT and any(z > 1 for z in self.params):
            return f"{basis_tag}/z({','.join(str(z) for z in self.params)})"
        return basis_tag

    def inverse(self) -> "Isometry":
        if self.kind is IsometryKind.PERMUTATION:
            inv = [0] * self.source_dim
            for k, j in enumerate(self.params):
                inv[j] = k
            return Isometry.permutation(inv)
        if self.kind is IsometryKind.PHASE_ROTATION:
            return Isometry.phase_rotation(tuple(-t for t in self.params))
        raise DimensionMismatchError("a refinement is not invertible on the target space")

    def to_matrix(self) -> np.ndarray:
        matrix = np.zeros((self.target_dim, self.source_dim), dtype=complex)
        for k, block in enumerate(self.blocks()):
            if self.kind is IsometryKind.PHASE_ROTATION:
                matrix[k, k] = cmath.exp(2j * math.pi * float(self.params[k]))
            else:
                for j in block:
                    matrix[j, k] = 1.0 / math.sqrt(len(block))
        return matrix


def inner_product(a: StateVector, b: StateVector) -> Amplitude:
    """sum_k conj(a_k) b_k.

    Exact inputs give an exact result whenever the partial sums stay in the
    exact representation; otherwise the result is returned in float mode and a
    warning is logged.
    """
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dimensions differ: {a.dim} != {b.dim}")
    if a.basis_tag != b.basis_tag:
        raise BasisMismatchError(f"bases differ: {a.basis_tag!r} != {b.basis_tag!r}")
    return exact_sum([x.conjugate() * y for x, y in zip(a.coeffs, b.coeffs)])


def apply_isometry(U: Isometry, v: StateVector) -> StateVector:
    if v.dim != U.source_dim:
        raise DimensionMismatchError(
            f"{U.kind.value} acts on dimension {U.source_dim}, vector has {v.dim}"
        )
    if U.kind is IsometryKind.PERMUTATION:
        coeffs = [None] * v.dim
        for k, c in enumerate(v.coeffs):
            coeffs[U.params[k]] = c
    elif U.kind is IsometryKind.PHASE_ROTATION:
        coeffs = [c.rotate(theta) for c, theta in zip(v.coeffs, U.params)]
    else:
        coeffs = [c.divide_sqrt(z) for c, z in zip(v.coeffs, U.params) for _ in range(z)]
    return StateVector(tuple(coeffs), U.target_tag(v.basis_tag))


def projector_expectation(v: StateVector, k: int):
    """<v, P_k v> = |c_k|^2 (0-based k)"""
    if not 0 <= k < v.dim:
        raise IndexOutOfRangeError(f"basis index {k} outside 0..{v.dim - 1}")
    return v.coeffs[k].abs2()


def lp_norm(values, p: float) -> float:
    return float(np.linalg.norm(np.asarray(values, dtype=complex), ord=p))


def parallelogram_defect(x, y, p: float) -> float:
    """||x+y||^2 + ||x-y||^2 - 2||x||^2 - 2||y||^2 in the l^p norm"""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    return (
        lp_norm(x + y, p) ** 2
        + lp_norm(x - y, p) ** 2
        - 2 * lp_norm(x, p) ** 2
        - 2 * lp_norm(y, p) ** 2
    )
