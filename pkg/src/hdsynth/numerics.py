"""Dense complex linear algebra used by the synthesis passes.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``. The
routines here add the conventions the synthesis code relies on: phase
normalised QR, unitary-safe spectral decomposition and a cosine-sine
decomposition with an uneven 2x2 block partition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

#: Singular values (sines) at or below this are treated as one degenerate cluster.
CLUSTER_TOL = 1e-8

#: Unitarity defect accepted on inputs of the decompositions.
INPUT_UNITARY_TOL = 1e-8


class NotUnitaryError(ValueError):
    """Raised when a matrix that must be unitary is not."""

    def __init__(self, defect: float, tol: float):
        self.defect = defect
        self.tol = tol
        super().__init__(
            f"matrix is not unitary: ||A A^dag - I||_F = {defect:.3e} exceeds {tol:.1e}"
        )


def as_square(a, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    return arr


def unitarity_defect(a: np.ndarray) -> float:
    """Frobenius norm of ``a a^dag - I``."""
    a = np.asarray(a)
    return float(np.linalg.norm(a @ a.conj().T - np.eye(a.shape[0])))


def is_unitary(a: np.ndarray, tol: float = 1e-10) -> bool:
    """True when ``||a a^dag - I||_F <= tol * sqrt(rows)``."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return unitarity_defect(a) <= tol * np.sqrt(a.shape[0])


def require_unitary(a: np.ndarray, tol: float = INPUT_UNITARY_TOL) -> None:
    defect = unitarity_defect(a)
    if defect > tol:
        raise NotUnitaryError(defect, tol)


def qr_decompose(a) -> tuple[np.ndarray, np.ndarray]:
    """QR factorisation with a non-negative real diagonal on ``r``."""
    a = as_square(a)
    q, r = np.linalg.qr(a)
    d = np.diagonal(r)
    mag = np.abs(d)
    phase = np.where(mag > 0, d / np.where(mag > 0, mag, 1), 1)
    q = q * phase[np.newaxis, :]
    r = phase.conj()[:, np.newaxis] * r
    # diagonal is |d| up to rounding in the product above
    r[np.diag_indices_from(r)] = mag
    return q, r


def svd(a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(u, s, v)`` with ``a = u @ diag(s) @ v^dag`` and ``s`` descending."""
    a = as_square(a)
    u, s, vh = np.linalg.svd(a)
    return u, s, vh.conj().T


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """``u = eigvecs @ diag(exp(1j * phases)) @ eigvecs^dag``."""

    eigvecs: np.ndarray
    phases: np.ndarray

    def reconstruct(self) -> np.ndarray:
        w = self.eigvecs
        return (w * np.exp(1j * self.phases)[np.newaxis, :]) @ w.conj().T


def spectral_decompose_unitary(u) -> SpectralDecomposition:
    """Diagonalise a unitary through its complex Schur form.

    For a normal matrix the Schur factor is diagonal up to rounding, so the
    Schur vectors are an orthonormal eigenbasis even when eigenvalues repeat.
    """
    u = as_square(u)
    require_unitary(u)
    t, z = scipy.linalg.schur(u, output="complex")
    d = np.diagonal(t)
    phases = np.arctan2(d.imag, d.real)
    # arctan2 returns [-pi, pi]; fold -pi onto pi
    phases = np.where(phases <= -np.pi, phases + 2 * np.pi, phases)
    return SpectralDecomposition(eigvecs=z, phases=phases)


@dataclass(frozen=True, eq=False)
class CsdFactors:
    """Factors of ``x = diag(u1, u2) @ M(thetas) @ diag(v1, v2)``.

    ``M`` is the cosine-sine matrix ``[[C, -S, 0], [S, C, 0], [0, 0, I]]`` with
    ``C = diag(cos thetas)`` and ``S = diag(sin thetas)``; the identity block has
    size ``q - p``.
    """

    u1: np.ndarray
    u2: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    thetas: np.ndarray

    @property
    def p(self) -> int:
        return self.u1.shape[0]

    @property
    def q(self) -> int:
        return self.u2.shape[0]

    def middle(self) -> np.ndarray:
        p, q = self.p, self.q
        c = np.diag(np.cos(self.thetas))
        s = np.diag(np.sin(self.thetas))
        mid = np.eye(p + q, dtype=complex)
        mid[:p, :p] = c
        mid[:p, p:2 * p] = -s
        mid[p:2 * p, :p] = s
        mid[p:2 * p, p:2 * p] = c
        return mid

    def reconstruct(self) -> np.ndarray:
        left = scipy.linalg.block_diag(self.u1, self.u2)
        right = scipy.linalg.block_diag(self.v1, self.v2)
        return left @ self.middle() @ right


def _orthonormal_columns(a: np.ndarray, small: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unitary ``Q`` whose leading columns are the normalised columns of ``a``.

    ``a`` (rows x k) must have mutually orthogonal columns. Returns
    ``(Q, norms)`` with ``Q[:, i] * norms[i] ~= a[:, i]`` for ``i < k``.
    Columns flagged in ``small`` and the trailing ``rows - k`` columns are
    filled, in order, by an orthonormal completion.
    """
    k = a.shape[1]
    # largest columns first so that tiny columns only touch the completion
    order = np.argsort(np.where(small, 0.0, -np.linalg.norm(a, axis=0)), kind="stable")
    q, r = np.linalg.qr(a[:, order], mode="complete")
    diag = np.diagonal(r)
    norms = np.empty(k)
    norms[order] = np.abs(diag)
    out = np.empty_like(q)
    spare = []
    for t, col in enumerate(order):
        if not small[col]:
            out[:, col] = q[:, t] * (diag[t] / abs(diag[t]))
        else:
            spare.append(t)
    free = list(np.flatnonzero(small)) + list(range(k, q.shape[0]))
    out[:, free] = q[:, spare + list(range(k, q.shape[0]))]
    return out, norms


def _polar_unitary(k: np.ndarray) -> np.ndarray:
    a, _, bh = np.linalg.svd(k)
    return a @ bh


def csd(x, p: int, cluster_tol: float = CLUSTER_TOL) -> CsdFactors:
    """Cosine-sine decomposition of a unitary split as ``p + q`` with ``p <= q``."""
    x = as_square(x)
    dim = x.shape[0]
    if p <= 0 or p >= dim:
        raise ValueError(f"partition p={p} must satisfy 0 < p < {dim}")
    q = dim - p
    if p > q:
        raise ValueError(f"partition requires p <= q, got p={p}, q={q}")
    require_unitary(x)

    x11, x12 = x[:p, :p], x[:p, p:]
    x21, x22 = x[p:, :p], x[p:, p:]

    # cosines descending -> sines ascending
    u1, cos, v1 = svd(x11)
    cos = np.clip(cos, 0.0, 1.0)

    a_left = x21 @ v1
    # x12 = u1 [-S 0] v2  =>  columns of -(u1^dag x12)^dag are sin_i * v2^dag[:, i]
    a_right = -(x12.conj().T @ u1)
    small = 0.5 * (np.linalg.norm(a_left, axis=0) + np.linalg.norm(a_right, axis=0)) <= cluster_tol
    u2, sin = _orthonormal_columns(a_left, small)
    v2h, sin_right = _orthonormal_columns(a_right, small)
    sin = 0.5 * (sin + sin_right)

    # Columns of the (q - p) padding and of vanishing sines were completed
    # independently on both sides; rotate the right basis so that the
    # corresponding block of u2^dag x22 v2^dag becomes the identity.
    cluster = np.concatenate([np.flatnonzero(small), np.arange(p, q)])
    if cluster.size:
        y = u2.conj().T @ x22 @ v2h
        block = y[np.ix_(cluster, cluster)]
        v2h[:, cluster] = v2h[:, cluster] @ _polar_unitary(block).conj().T

    thetas = np.arctan2(sin, cos)
    return CsdFactors(u1=u1, u2=u2, v1=v1.conj().T, v2=v2h.conj().T, thetas=thetas)


def haar_random_unitary(dim: int, seed: int) -> np.ndarray:
    """Haar-distributed unitary from QR of a complex Ginibre matrix."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = np.random.default_rng(seed % 2**64)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, _ = qr_decompose(z)
    return q
