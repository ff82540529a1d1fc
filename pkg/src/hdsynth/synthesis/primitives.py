"""Controlled, multiplexed and uniformly-controlled-rotation gates as CINC circuits.

Every builder returns an L2 :class:`~hdsynth.circuit.Circuit` in application
order that uses only local gates, ``Cinc`` and ``CincDagger``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hdsynth.circuit import (
    Circuit,
    Cinc,
    CincDagger,
    Dims,
    LocalA,
    LocalB,
    increment,
    rotation,
    sigma,
)
from hdsynth.numerics import require_unitary, spectral_decompose_unitary

#: Gates whose full matrix lies within this Frobenius distance of I are dropped when pruning.
PRUNE_TOL = 1e-10


class SynthesisError(RuntimeError):
    """Internal consistency check failed during synthesis."""


def _z_diag(i: int, m: int) -> np.ndarray:
    return np.real(np.diagonal(sigma("z", i - 1, i, m)))


def e_basis(m: int) -> np.ndarray:
    """Columns are the diagonals of ``E_1 = I`` and ``E_i = sz^{i-1,i} - X sz^{i-1,i} X^dag``."""
    x = increment(m)
    cols = [np.ones(m)]
    for i in range(2, m + 1):
        s = sigma("z", i - 1, i, m)
        cols.append(np.real(np.diagonal(s - x @ s @ x.conj().T)))
    return np.column_stack(cols)


@dataclass(frozen=True, eq=False)
class EBasisSolution:
    x: np.ndarray

    def reassemble(self) -> np.ndarray:
        return e_basis(len(self.x)) @ self.x


def solve_e_basis(thetas) -> EBasisSolution:
    """Coefficients ``x`` with ``diag(thetas) = sum_i x_i E_i``."""
    thetas = np.asarray(thetas, dtype=float).reshape(-1)
    m = thetas.shape[0]
    if m < 2:
        raise ValueError("need at least two diagonal entries")
    basis = e_basis(m)
    x = np.linalg.solve(basis, thetas)
    residual = np.linalg.norm(basis @ x - thetas)
    if residual > 1e-12 * max(1.0, np.linalg.norm(thetas)):
        raise SynthesisError(f"E-basis solve residual {residual:.3e} too large")
    return EBasisSolution(x=x)


def _rz_ladder(coeffs: np.ndarray, sign: float) -> np.ndarray:
    """``prod_{i=2}^m R_z^{i-1,i}(sign * 2 x_i)``; the factors are diagonal and commute."""
    m = len(coeffs)
    phase = np.zeros(m)
    for i in range(2, m + 1):
        # R_z(t) = exp(-i t/2 sz) contributes -t/2 * diag(sz)
        phase += -sign * coeffs[i - 1] * _z_diag(i, m)
    return np.diag(np.exp(1j * phase))


def _is_identity(u: np.ndarray, tol: float = PRUNE_TOL) -> bool:
    return float(np.linalg.norm(u - np.eye(u.shape[0]))) <= tol


def synth_controlled_diagonal(k: int, thetas, dims: Dims) -> Circuit:
    """``C_k(diag(exp(1j*thetas)))`` with one CINC and one CINC dagger."""
    if not 1 <= k <= dims.n:
        raise ValueError(f"control level {k} outside 1..{dims.n}")
    thetas = np.asarray(thetas, dtype=float).reshape(-1)
    if thetas.shape != (dims.m,):
        raise ValueError(f"expected {dims.m} angles, got {thetas.shape[0]}")
    x = solve_e_basis(thetas).x
    phase_a = np.ones(dims.n, dtype=complex)
    phase_a[k - 1] = np.exp(1j * x[0])
    gates = [
        CincDagger(k),
        LocalB(_rz_ladder(x, +1)),
        Cinc(k),
        LocalB(_rz_ladder(x, -1)),
        LocalA(np.diag(phase_a)),
    ]
    return Circuit(dims, gates)


def synth_controlled_unitary(k: int, u, dims: Dims, prune: bool = False) -> Circuit:
    """``C_k(u)`` from a controlled diagonal between two local basis changes."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (dims.m, dims.m):
        raise ValueError(f"target must be {dims.m}x{dims.m}, got {u.shape}")
    require_unitary(u)
    if prune and _is_identity(u):
        return Circuit(dims)
    sd = spectral_decompose_unitary(u)
    w = sd.eigvecs
    core = synth_controlled_diagonal(k, sd.phases, dims)
    return Circuit(dims, (LocalB(w.conj().T),) + core.gates + (LocalB(w),))


def synth_multiplexor(branches, pivot: int, dims: Dims, prune: bool = False) -> Circuit:
    """Uniformly controlled unitary as ``I (x) U_pivot`` after ``n - 1`` controlled factors."""
    branches = [np.asarray(b, dtype=complex) for b in branches]
    if len(branches) != dims.n:
        raise ValueError(f"expected {dims.n} branches, got {len(branches)}")
    if not 1 <= pivot <= dims.n:
        raise ValueError(f"pivot {pivot} outside 1..{dims.n}")
    base = branches[pivot - 1]
    base_h = base.conj().T
    gates: list = []
    for level, b in enumerate(branches, start=1):
        if level != pivot:
            gates += synth_controlled_unitary(level, base_h @ b, dims, prune=prune).gates
    if not (prune and _is_identity(base)):
        gates.append(LocalB(base))
    return Circuit(dims, gates)


def synth_ucr_z(i: int, j: int, angles, dims: Dims) -> Circuit:
    """``exp(-1j sz^{ij} (x) diag(angles)) = C_j(e^{iD}) C_i(e^{-iD})``."""
    if not 1 <= i < j <= dims.n:
        raise ValueError(f"level pair must satisfy 1 <= i < j <= {dims.n}, got ({i}, {j})")
    angles = np.asarray(angles, dtype=float)
    first = synth_controlled_diagonal(i, -angles, dims)
    second = synth_controlled_diagonal(j, angles, dims)
    return first.then(second)


def synth_ucr_x(i: int, j: int, angles, dims: Dims) -> Circuit:
    """``exp(-1j sx^{ij} (x) D)`` as a z-type rotation conjugated by ``R_y^{ij}(pi/2)``."""
    core = synth_ucr_z(i, j, angles, dims)
    before = LocalA(rotation("y", i, j, dims.n, -np.pi / 2))
    after = LocalA(rotation("y", i, j, dims.n, np.pi / 2))
    return Circuit(dims, (before,) + core.gates + (after,))
