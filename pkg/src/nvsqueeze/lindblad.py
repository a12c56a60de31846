"""Brute-force master-equation engine on truncated Fock spaces.

Density matrices are vectorized row-major (``rho.reshape(-1)``), so that
``vec(A @ X @ B) = kron(A, B.T) @ vec(X)``. Superoperators are always sparse;
steady states come from a direct sparse LU solve with one row of the
generator replaced by the trace functional.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from . import operators as ops
from .errors import (
    DegenerateKernel,
    DimensionMismatch,
    InvalidRates,
    NoConvergence,
    StepFailure,
    TruncationCapExceeded,
)
from .model import DressedFrame, SystemParams, bare_hamiltonian, dressed_frame, interaction_hamiltonian
from .operators import MINUS1, PLUS1, ZERO, HilbertSpace, OperatorSpec
from .reduced import GeneratorSpec, thermal_bath

__all__ = [
    "HilbertSpace",
    "Superoperator",
    "Trajectory",
    "assemble",
    "build_operators",
    "evolve",
    "expect",
    "full_model_bare",
    "full_model_rwa",
    "mechanical_marginal",
    "spin_dissipator_effective",
    "spin_marginal",
    "steady_state",
    "steady_state_adaptive",
    "truncation_check",
]

# dense SVD kernel check is affordable up to this Liouville dimension
_SVD_LIMIT = 1600


@dataclass
class Superoperator:
    """Sparse Liouvillian acting on row-major vectorized density matrices."""

    matrix: sp.csr_matrix
    space: HilbertSpace

    @property
    def dim(self) -> int:
        return self.space.dim

    def apply(self, rho: np.ndarray) -> np.ndarray:
        n = self.dim
        return (self.matrix @ np.asarray(rho, dtype=complex).reshape(-1)).reshape(n, n)

    def norm(self) -> float:
        return float(spla.norm(self.matrix, 1))

    def trace_defect(self) -> float:
        """Largest entry of ``vec(I)^T L``; zero for a trace-preserving map."""
        n = self.dim
        tr = np.zeros(n * n)
        tr[:: n + 1] = 1.0
        return float(np.abs(self.matrix.T @ tr).max()) if self.matrix.nnz else 0.0


def build_operators(space: HilbertSpace, frame: DressedFrame | None = None) -> dict:
    """Ladder, spin and dressed-projector matrices on ``space``.

    Keys: ``d{k}`` and ``d{k}_dag`` per mode, ``n{k}``; with a spin factor also
    ``sz``, ``sy``, ``sx`` and, when ``frame`` is given, ``P_ij`` for the
    dressed ket-bras (``P_aa``, ``P_cb``, ...).
    """
    out = {}
    for k in range(len(space.fock_dims)):
        out[f"d{k}"] = ops.destroy(k).to_matrix(space)
        out[f"d{k}_dag"] = ops.create(k).to_matrix(space)
        out[f"n{k}"] = (ops.create(k) * ops.destroy(k)).to_matrix(space)
    if space.spin_dim == 3:
        out["sz"] = ops.spin(ops.sz()).to_matrix(space)
        out["sy"] = ops.spin(ops.sy()).to_matrix(space)
        out["sx"] = ops.spin(ops.sx()).to_matrix(space)
        if frame is not None:
            for i in "abc":
                for j in "abc":
                    out[f"P_{i}{j}"] = ops.spin(frame.ket_bra(i, j)).to_matrix(space)
    return out


def spin_dissipator_effective(Gamma0: float, Gamma1: float) -> list[tuple[OperatorSpec, float]]:
    """Jump operators reproducing the optically pumped spin relaxation.

    Amplitude damping ``|0><+-1|`` at ``Gamma0`` plus pure dephasing of the
    ``|+-1>`` levels at ``Gamma1 - Gamma0``.
    """
    if Gamma0 <= 0:
        raise InvalidRates(f"Gamma0 must be positive, got {Gamma0}")
    if Gamma1 < Gamma0:
        raise InvalidRates(f"Gamma1={Gamma1} < Gamma0={Gamma0} implies negative dephasing")
    chans = [
        (ops.spin(ops.ket_bra(ZERO, PLUS1)), Gamma0),
        (ops.spin(ops.ket_bra(ZERO, MINUS1)), Gamma0),
    ]
    if Gamma1 > Gamma0:
        chans += [
            (ops.spin(ops.ket_bra(PLUS1, PLUS1)), Gamma1 - Gamma0),
            (ops.spin(ops.ket_bra(MINUS1, MINUS1)), Gamma1 - Gamma0),
        ]
    return chans


def _check(op: OperatorSpec, space: HilbertSpace):
    if op.has_spin and space.spin_dim != 3:
        raise DimensionMismatch("generator acts on a spin but the space has none")
    if op.modes and max(op.modes) >= len(space.fock_dims):
        raise DimensionMismatch(
            f"generator uses mode {max(op.modes)}; space has {len(space.fock_dims)} mode(s)"
        )


def assemble(space: HilbertSpace, gen: GeneratorSpec) -> Superoperator:
    """Sparse Liouvillian of ``gen`` on ``space``."""
    n = space.dim
    eye = sp.identity(n, dtype=complex, format="csr")
    L = sp.csr_matrix((n * n, n * n), dtype=complex)
    _check(gen.hamiltonian, space)
    if gen.hamiltonian.terms:
        H = gen.hamiltonian.to_matrix(space)
        L = L - 1j * (sp.kron(H, eye) - sp.kron(eye, H.T))
    for op, rate in gen.lindblad_channels:
        if rate == 0:
            continue
        _check(op, space)
        c = op.to_matrix(space)
        cdc = (c.conj().T @ c).tocsr()
        L = L + rate * (sp.kron(c, c.conj()) - 0.5 * sp.kron(cdc, eye) - 0.5 * sp.kron(eye, cdc.T))
    for coeff, left, right in gen.quadratic_terms:
        if coeff == 0:
            continue
        _check(left, space)
        _check(right, space)
        L = L + coeff * sp.kron(left.to_matrix(space), right.to_matrix(space).T)
    return Superoperator(L.tocsr(), space)


def steady_state(L: Superoperator, method: str = "direct", rtol: float = 1e-9) -> np.ndarray:
    """Unique trace-one fixed point of ``L``.

    ``method="direct"`` uses sparse LU; ``"iterative"`` uses GMRES with an
    incomplete-LU preconditioner and raises :class:`NoConvergence` on failure.
    """
    n = L.dim
    A = L.matrix.tolil(copy=True)
    tr = np.zeros(n * n, dtype=complex)
    tr[:: n + 1] = 1.0
    A[0, :] = tr
    A = A.tocsc()
    b = np.zeros(n * n, dtype=complex)
    b[0] = 1.0
    if n * n <= _SVD_LIMIT:
        sv = np.linalg.svd(L.matrix.toarray(), compute_uv=False)
        if sv[-2] <= 1e-10 * max(sv[0], 1e-300):
            raise DegenerateKernel(f"Liouvillian kernel is at least two-dimensional (sv={sv[-2]:.2e})")
    if method == "direct":
        try:
            x = spla.splu(A).solve(b)
        except RuntimeError as exc:
            raise DegenerateKernel(str(exc)) from exc
    elif method == "iterative":
        ilu = spla.spilu(A, drop_tol=1e-6, fill_factor=20)
        pre = spla.LinearOperator(A.shape, ilu.solve, dtype=complex)
        x, info = spla.gmres(A, b, M=pre, rtol=1e-13, atol=0.0, restart=200, maxiter=200)
        if info != 0:
            raise NoConvergence(f"GMRES stopped with info={info}")
    else:
        raise ValueError(f"unknown method {method!r}")
    rho = x.reshape(n, n)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    resid = np.abs(L.matrix @ rho.reshape(-1)).max()
    if resid > rtol * max(L.norm(), 1.0):
        if method == "iterative":
            raise NoConvergence(f"steady-state residual {resid:.2e}")
        raise DegenerateKernel(f"steady-state residual {resid:.2e} too large")
    return rho


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    trace_drift: float


def evolve(rho0: np.ndarray, L: Superoperator, t_grid, rtol: float = 1e-8, atol: float = 1e-10, method: str = "DOP853") -> Trajectory:
    """Integrate ``drho/dt = L rho`` and return states on ``t_grid``.

    States are renormalized to unit trace; the largest pre-normalization
    deviation is reported as ``trace_drift``.
    """
    n = L.dim
    t_grid = np.asarray(t_grid, dtype=float)
    M = L.matrix
    y0 = np.asarray(rho0, dtype=complex).reshape(-1)
    if M.nnz == 0:
        states = np.repeat(y0.reshape(1, n, n), len(t_grid), axis=0)
        return Trajectory(t_grid, states, 0.0)
    sol = solve_ivp(
        lambda t, y: M @ y,
        (t_grid[0], t_grid[-1]),
        y0,
        t_eval=t_grid,
        method=method,
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise StepFailure(sol.message)
    states = sol.y.T.reshape(len(t_grid), n, n)
    traces = np.einsum("kii->k", states)
    drift = float(np.abs(traces - np.trace(rho0)).max())
    states = states / traces.real[:, None, None] * np.trace(rho0).real
    return Trajectory(t_grid, states, drift)


def expect(rho: np.ndarray, op) -> complex:
    """``tr(op rho)`` for a dense or sparse matrix ``op``."""
    mat = op.toarray() if sp.issparse(op) else np.asarray(op)
    return complex(np.sum(mat.T * rho))


def _as_tensor(rho, space):
    dims = space.dims
    return rho.reshape(dims + dims)


def mechanical_marginal(rho: np.ndarray, space: HilbertSpace, mode: int = 0) -> np.ndarray:
    """Reduced density matrix of one mechanical mode."""
    dims = space.dims
    k = len(dims)
    target = mode + (1 if space.spin_dim == 3 else 0)
    t = _as_tensor(rho, space)
    letters = "abcdefgh"
    row = list(letters[:k])
    col = list(letters[:k])
    col[target] = "z"
    return np.einsum("".join(row) + "".join(col) + "->" + row[target] + "z", t)


def spin_marginal(rho: np.ndarray, space: HilbertSpace) -> np.ndarray:
    if space.spin_dim != 3:
        raise DimensionMismatch("space has no spin factor")
    rest = int(np.prod(space.fock_dims))
    return np.einsum("iaja->ij", rho.reshape(3, rest, 3, rest))


def truncation_check(rho: np.ndarray, space: HilbertSpace, epsilon: float = 1e-9) -> bool:
    """True iff every mode has less than ``epsilon`` population in its top two levels.

    The ground level is never counted, so a two-level space checks level 1 only.
    """
    for mode in range(len(space.fock_dims)):
        pops = np.diag(mechanical_marginal(rho, space, mode)).real
        if pops[max(1, len(pops) - 2) :].sum() >= epsilon:
            return False
    return True


def steady_state_adaptive(build, space: HilbertSpace, epsilon: float = 1e-9, max_doublings: int = 4):
    """Steady state with Fock-cutoff doubling until :func:`truncation_check` passes.

    ``build(space)`` must return a :class:`Superoperator`. Returns
    ``(rho, space)`` for the first space that passes.
    """
    for _ in range(max_doublings + 1):
        rho = steady_state(build(space))
        if truncation_check(rho, space, epsilon):
            return rho, space
        bigger = tuple(2 * n for n in space.fock_dims)
        if space.spin_dim * math.prod(bigger) > space.cap:
            break
        space = space.with_fock_dims(bigger)
    raise TruncationCapExceeded(f"truncation not converged at Fock dims {space.fock_dims}")


def _bath(p: SystemParams) -> GeneratorSpec:
    return thermal_bath(0, p.gamma_m, p.n_th)


def full_model_rwa(p: SystemParams) -> GeneratorSpec:
    """Spin plus one mode in the interaction picture, rotating-wave couplings only."""
    frame = dressed_frame(p)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        H = interaction_hamiltonian(frame, p)
    return GeneratorSpec(H, spin_dissipator_effective(p.Gamma0, p.Gamma1)) + _bath(p)


def full_model_bare(p: SystemParams) -> GeneratorSpec:
    """Spin plus one mode in the microwave frame with the full linear coupling."""
    return GeneratorSpec(bare_hamiltonian(p), spin_dissipator_effective(p.Gamma0, p.Gamma1)) + _bath(p)


def mechanical_moments(rho: np.ndarray, space: HilbertSpace, mode: int = 0) -> tuple[float, complex, complex]:
    """``(<d^dag d>, <d^2>, <d>)`` of one mode."""
    rm = mechanical_marginal(rho, space, mode)
    n = rm.shape[0]
    d = np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1)
    return (
        float(np.trace(d.T @ d @ rm).real),
        complex(np.trace(d @ d @ rm)),
        complex(np.trace(d @ rm)),
    )
