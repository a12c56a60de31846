"""Symbolic operator expressions on (spin-1) x (truncated oscillators).

An :class:`OperatorSpec` is a sum of terms ``coeff * spin * f1 * f2 * ...``
where ``spin`` is a 3x3 matrix in the bare basis ``(|0>, |+1>, |-1>)`` (or
``None`` for the identity) and each ``f`` is a ladder operator of one
mechanical mode. Expressions are realized as sparse matrices on a
:class:`HilbertSpace` only when needed, so the same Hamiltonian can be reused
at any Fock cutoff.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from numbers import Number

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch

#: Spin basis index of each bare state.
ZERO, PLUS1, MINUS1 = 0, 1, 2

DEFAULT_DIM_CAP = 700


@dataclass(frozen=True)
class HilbertSpace:
    """Tensor space of an optional spin-1 and one or more truncated oscillators.

    The spin factor (if present) comes first in the Kronecker ordering,
    followed by the oscillators in mode order.
    """

    spin_dim: int = 3
    fock_dims: tuple[int, ...] = (10,)
    cap: int = DEFAULT_DIM_CAP

    def __post_init__(self):
        object.__setattr__(self, "fock_dims", tuple(int(n) for n in self.fock_dims))
        if self.spin_dim not in (1, 3):
            raise ValueError(f"spin_dim must be 1 or 3, got {self.spin_dim}")
        if any(n < 2 for n in self.fock_dims):
            raise ValueError(f"every Fock dimension must be >= 2, got {self.fock_dims}")
        if self.dim > self.cap:
            raise ValueError(f"total dimension {self.dim} exceeds cap {self.cap}")

    @property
    def dim(self) -> int:
        return self.spin_dim * int(np.prod(self.fock_dims))

    @property
    def dims(self) -> tuple[int, ...]:
        return ((self.spin_dim,) if self.spin_dim > 1 else ()) + self.fock_dims

    def with_fock_dims(self, fock_dims) -> HilbertSpace:
        return HilbertSpace(self.spin_dim, tuple(fock_dims), self.cap)


@dataclass(frozen=True, eq=False)
class Term:
    coeff: complex
    spin: np.ndarray | None = None
    ladder: tuple[tuple[int, bool], ...] = field(default_factory=tuple)


class OperatorSpec:
    """Sum of spin-ladder product terms; supports ``+``, ``-``, ``*`` and ``dag``."""

    def __init__(self, terms=()):
        self.terms = tuple(t for t in terms if t.coeff != 0)

    def __repr__(self):
        return f"OperatorSpec({len(self.terms)} terms)"

    def __add__(self, other):
        if isinstance(other, Number):
            other = identity() * other
        return OperatorSpec(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            return OperatorSpec(
                Term(t.coeff * other, t.spin, t.ladder) for t in self.terms
            )
        out = []
        for a in self.terms:
            for b in other.terms:
                if a.spin is None:
                    spin = b.spin
                elif b.spin is None:
                    spin = a.spin
                else:
                    spin = a.spin @ b.spin
                out.append(Term(a.coeff * b.coeff, spin, a.ladder + b.ladder))
        return OperatorSpec(out)

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    def dag(self) -> OperatorSpec:
        return OperatorSpec(
            Term(
                np.conj(t.coeff),
                None if t.spin is None else t.spin.conj().T,
                tuple((m, not dg) for m, dg in reversed(t.ladder)),
            )
            for t in self.terms
        )

    @property
    def modes(self) -> set[int]:
        return {m for t in self.terms for m, _ in t.ladder}

    @property
    def has_spin(self) -> bool:
        return any(t.spin is not None for t in self.terms)

    def to_matrix(self, space: HilbertSpace) -> sp.csr_matrix:
        """Realize the expression as a sparse matrix on ``space``."""
        if self.has_spin and space.spin_dim != 3:
            raise DimensionMismatch("operator acts on the spin but the space has none")
        if self.modes and max(self.modes) >= len(space.fock_dims):
            raise DimensionMismatch(
                f"operator uses mode {max(self.modes)} but the space has "
                f"{len(space.fock_dims)} mode(s)"
            )
        ops = _ladder_cache(space)
        out = sp.csr_matrix((space.dim, space.dim), dtype=complex)
        for t in self.terms:
            mat = _embed_spin(space, t.spin)
            for m, dg in t.ladder:
                mat = mat @ ops[(m, dg)]
            out = out + t.coeff * mat
        return out.tocsr()


def _embed_spin(space, spin):
    rest = int(np.prod(space.fock_dims))
    if spin is None:
        return sp.identity(space.dim, dtype=complex, format="csr")
    return sp.kron(sp.csr_matrix(spin), sp.identity(rest), format="csr")


_CACHE: dict = {}


def _ladder_cache(space):
    key = (space.spin_dim, space.fock_dims)
    if key not in _CACHE:
        ops = {}
        for m, n in enumerate(space.fock_dims):
            a = sp.diags(np.sqrt(np.arange(1, n, dtype=float)), 1, format="csr")
            factors = [sp.identity(space.spin_dim)] if space.spin_dim > 1 else []
            left = factors + [sp.identity(k) for k in space.fock_dims[:m]]
            right = [sp.identity(k) for k in space.fock_dims[m + 1:]]
            full = reduce(lambda x, y: sp.kron(x, y, format="csr"), left + [a] + right)
            ops[(m, False)] = full.astype(complex).tocsr()
            ops[(m, True)] = full.T.astype(complex).tocsr()
        _CACHE[key] = ops
    return _CACHE[key]


# -- constructors -----------------------------------------------------------

def identity() -> OperatorSpec:
    return OperatorSpec([Term(1.0)])


def destroy(mode: int = 0) -> OperatorSpec:
    return OperatorSpec([Term(1.0, None, ((mode, False),))])


def create(mode: int = 0) -> OperatorSpec:
    return OperatorSpec([Term(1.0, None, ((mode, True),))])


def spin(matrix) -> OperatorSpec:
    return OperatorSpec([Term(1.0, np.asarray(matrix, dtype=complex))])


def ket_bra(i: int, j: int) -> np.ndarray:
    out = np.zeros((3, 3), dtype=complex)
    out[i, j] = 1.0
    return out


def sz() -> np.ndarray:
    return ket_bra(PLUS1, PLUS1) - ket_bra(MINUS1, MINUS1)


def sy() -> np.ndarray:
    return -1j * ket_bra(PLUS1, MINUS1) + 1j * ket_bra(MINUS1, PLUS1)


def sx() -> np.ndarray:
    return ket_bra(PLUS1, MINUS1) + ket_bra(MINUS1, PLUS1)
