"""Gate set, circuit container and dense simulator for a qudit pair H_n (x) H_m.

Levels are 1-based everywhere in the public API (``|1>, ..., |n>``). Tensor
products are system-1-major: the ``(a, b)`` block of size ``m x m`` in a
full ``nm x nm`` matrix is the ``|a><b|`` component on system 1.

A :class:`Circuit` lists gates in application order: ``gates[0]`` acts
first, so its matrix is ``G[t-1] @ ... @ G[0]``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import ClassVar, Union

import numpy as np
import scipy.linalg

from hdsynth.numerics import is_unitary

GATE_UNITARY_TOL = 1e-10

L2 = "L2"
L3 = "L3"


@dataclass(frozen=True)
class Dims:
    n: int
    m: int

    def __post_init__(self):
        if self.n < 2 or self.m < 2:
            raise ValueError(f"both subsystem dimensions must be >= 2, got n={self.n}, m={self.m}")

    @property
    def total(self) -> int:
        return self.n * self.m


# ---------------------------------------------------------------------------
# single-system matrices


def _check_pair(i: int, j: int, n: int) -> None:
    if not 1 <= i < j <= n:
        raise ValueError(f"level pair must satisfy 1 <= i < j <= n, got i={i}, j={j}, n={n}")


def sigma(kind: str, i: int, j: int, n: int) -> np.ndarray:
    """Generalised Pauli matrix on the two-level subspace ``span{|i>, |j>}``."""
    _check_pair(i, j, n)
    a, b = i - 1, j - 1
    s = np.zeros((n, n), dtype=complex)
    if kind == "z":
        s[a, a], s[b, b] = 1, -1
    elif kind == "x":
        s[a, b] = s[b, a] = 1
    elif kind == "y":
        s[a, b], s[b, a] = -1j, 1j
    else:
        raise ValueError(f"unknown sigma kind {kind!r}")
    return s


def rotation(kind: str, i: int, j: int, n: int, theta: float) -> np.ndarray:
    """``exp(-1j * theta / 2 * sigma(kind, i, j, n))``."""
    s = sigma(kind, i, j, n)
    # sigma restricted to its 2-level subspace squares to the identity there
    proj = np.zeros((n, n), dtype=complex)
    proj[i - 1, i - 1] = proj[j - 1, j - 1] = 1
    return np.eye(n, dtype=complex) - proj + np.cos(theta / 2) * proj - 1j * np.sin(theta / 2) * s


def increment(n: int) -> np.ndarray:
    """Cyclic shift ``|i> -> |i+1 mod n>``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return np.roll(np.eye(n, dtype=complex), 1, axis=0)


def t_matrix(n: int) -> np.ndarray:
    """Involution fixing ``|1>`` and reversing ``|2>..|n>``; conjugates the increment to its inverse."""
    if n < 2:
        raise ValueError("n must be >= 2")
    t = np.zeros((n, n), dtype=complex)
    t[0, 0] = 1
    for i in range(2, n + 1):
        t[i - 1, n + 1 - i] = 1
    return t


def transposition(k: int, l: int, n: int) -> np.ndarray:
    """Permutation matrix swapping levels ``k`` and ``l``."""
    p = np.eye(n, dtype=complex)
    p[[k - 1, l - 1]] = p[[l - 1, k - 1]]
    return p


# ---------------------------------------------------------------------------
# gates


def _matrix(u, size: int, what: str) -> np.ndarray:
    u = np.array(u, dtype=complex)
    if u.shape != (size, size):
        raise ValueError(f"{what} must be {size}x{size}, got shape {u.shape}")
    if not is_unitary(u, GATE_UNITARY_TOL):
        raise ValueError(f"{what} is not unitary")
    u.setflags(write=False)
    return u


def _angles(a, what: str) -> np.ndarray:
    a = np.array(a, dtype=float).reshape(-1)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{what} must be finite")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LocalA:
    u: np.ndarray
    kind: ClassVar[str] = "local_a"

    def __post_init__(self):
        object.__setattr__(self, "u", _matrix(self.u, np.shape(self.u)[0], "LocalA matrix"))


@dataclass(frozen=True, eq=False)
class LocalB:
    u: np.ndarray
    kind: ClassVar[str] = "local_b"

    def __post_init__(self):
        object.__setattr__(self, "u", _matrix(self.u, np.shape(self.u)[0], "LocalB matrix"))


@dataclass(frozen=True)
class Cinc:
    control_level: int
    kind: ClassVar[str] = "cinc"


@dataclass(frozen=True)
class CincDagger:
    control_level: int
    kind: ClassVar[str] = "cinc_dagger"


@dataclass(frozen=True, eq=False)
class ControlledU:
    control_level: int
    u: np.ndarray
    kind: ClassVar[str] = "controlled_u"

    def __post_init__(self):
        object.__setattr__(self, "u", _matrix(self.u, np.shape(self.u)[0], "ControlledU matrix"))


@dataclass(frozen=True, eq=False)
class ControlledDiag:
    """Controlled ``diag(exp(1j * thetas))`` on system 2."""

    control_level: int
    thetas: np.ndarray
    kind: ClassVar[str] = "controlled_diag"

    def __post_init__(self):
        object.__setattr__(self, "thetas", _angles(self.thetas, "ControlledDiag thetas"))


@dataclass(frozen=True, eq=False)
class Multiplexor:
    """Uniformly controlled unitary: branch ``k-1`` acts on system 2 when system 1 is ``|k>``."""

    branches: tuple
    kind: ClassVar[str] = "multiplexor"

    def __post_init__(self):
        bs = list(self.branches)
        if not bs:
            raise ValueError("Multiplexor needs at least one branch")
        size = np.shape(bs[0])[0]
        object.__setattr__(
            self, "branches", tuple(_matrix(b, size, f"Multiplexor branch {k + 1}") for k, b in enumerate(bs))
        )


@dataclass(frozen=True, eq=False)
class UcrZ:
    """``exp(-1j * sigma_z^{ij} (x) diag(angles))``, controlled by system 2."""

    i: int
    j: int
    angles: np.ndarray
    kind: ClassVar[str] = "ucr_z"

    def __post_init__(self):
        if not 1 <= self.i < self.j:
            raise ValueError(f"UcrZ needs 1 <= i < j, got ({self.i}, {self.j})")
        object.__setattr__(self, "angles", _angles(self.angles, "UcrZ angles"))


@dataclass(frozen=True, eq=False)
class UcrX:
    """``exp(-1j * sigma_x^{ij} (x) diag(angles))``, controlled by system 2."""

    i: int
    j: int
    angles: np.ndarray
    kind: ClassVar[str] = "ucr_x"

    def __post_init__(self):
        if not 1 <= self.i < self.j:
            raise ValueError(f"UcrX needs 1 <= i < j, got ({self.i}, {self.j})")
        object.__setattr__(self, "angles", _angles(self.angles, "UcrX angles"))


Gate = Union[LocalA, LocalB, Cinc, CincDagger, ControlledU, ControlledDiag, Multiplexor, UcrZ, UcrX]

GATE_TYPES = (LocalA, LocalB, Cinc, CincDagger, ControlledU, ControlledDiag, Multiplexor, UcrZ, UcrX)
GATE_KINDS = {cls.kind: cls for cls in GATE_TYPES}
L3_TYPES = (LocalA, LocalB, Cinc)


@dataclass(frozen=True, eq=False)
class Circuit:
    dims: Dims
    gates: tuple = ()
    level: str = L2

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.level not in (L2, L3):
            raise ValueError(f"unknown IR level {self.level!r}")
        for g in self.gates:
            if not isinstance(g, GATE_TYPES):
                raise TypeError(f"not a gate: {g!r}")
            if self.level == L3:
                if not isinstance(g, L3_TYPES):
                    raise ValueError(f"{g.kind} is not allowed in an L3 circuit")
                if isinstance(g, Cinc) and g.control_level != self.dims.n:
                    raise ValueError("L3 circuits only contain CINC gates controlled on level n")

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def then(self, other: "Circuit") -> "Circuit":
        """Circuit applying ``self`` first and ``other`` afterwards."""
        if other.dims != self.dims:
            raise ValueError("cannot concatenate circuits over different dims")
        return Circuit(self.dims, self.gates + other.gates, L2)


# ---------------------------------------------------------------------------
# matrix expansion


def _level(k: int, n: int, what: str = "control level") -> int:
    if not 1 <= k <= n:
        raise ValueError(f"{what} {k} outside 1..{n}")
    return k - 1


def _controlled(k: int, u: np.ndarray, dims: Dims) -> np.ndarray:
    blocks = [np.eye(dims.m, dtype=complex)] * dims.n
    blocks = list(blocks)
    blocks[_level(k, dims.n)] = u
    return scipy.linalg.block_diag(*blocks)


def _ucr(kind: str, i: int, j: int, angles: np.ndarray, dims: Dims) -> np.ndarray:
    if angles.shape != (dims.m,):
        raise ValueError(f"expected {dims.m} angles, got {angles.shape[0]}")
    _check_pair(i, j, dims.n)
    out = np.zeros((dims.total, dims.total), dtype=complex)
    for k, theta in enumerate(angles):
        proj = np.zeros((dims.m, dims.m))
        proj[k, k] = 1
        out += np.kron(rotation(kind, i, j, dims.n, 2 * theta), proj)
    return out


def _check_size(u: np.ndarray, size: int, what: str) -> None:
    if u.shape != (size, size):
        raise ValueError(f"{what} is {u.shape[0]}x{u.shape[1]}, dims require {size}x{size}")


def gate_matrix(g: Gate, dims: Dims) -> np.ndarray:
    """Full ``nm x nm`` matrix of a gate."""
    n, m = dims.n, dims.m
    if isinstance(g, LocalA):
        _check_size(g.u, n, "LocalA matrix")
        return np.kron(g.u, np.eye(m))
    if isinstance(g, LocalB):
        _check_size(g.u, m, "LocalB matrix")
        return np.kron(np.eye(n), g.u)
    if isinstance(g, Cinc):
        return _controlled(g.control_level, increment(m), dims)
    if isinstance(g, CincDagger):
        return _controlled(g.control_level, increment(m).conj().T, dims)
    if isinstance(g, ControlledU):
        _check_size(g.u, m, "ControlledU matrix")
        return _controlled(g.control_level, g.u, dims)
    if isinstance(g, ControlledDiag):
        if g.thetas.shape != (m,):
            raise ValueError(f"expected {m} thetas, got {g.thetas.shape[0]}")
        return _controlled(g.control_level, np.diag(np.exp(1j * g.thetas)), dims)
    if isinstance(g, Multiplexor):
        if len(g.branches) != n:
            raise ValueError(f"multiplexor has {len(g.branches)} branches, dims require {n}")
        for b in g.branches:
            _check_size(b, m, "Multiplexor branch")
        return scipy.linalg.block_diag(*g.branches)
    if isinstance(g, UcrZ):
        return _ucr("z", g.i, g.j, g.angles, dims)
    if isinstance(g, UcrX):
        return _ucr("x", g.i, g.j, g.angles, dims)
    raise TypeError(f"not a gate: {g!r}")


def simulate(c: Circuit) -> np.ndarray:
    """Unitary implemented by the circuit (last-applied gate leftmost)."""
    out = np.eye(c.dims.total, dtype=complex)
    for g in c.gates:
        out = gate_matrix(g, c.dims) @ out
    return out


@dataclass
class GateTally:
    counts: Counter = field(default_factory=Counter)

    @property
    def cinc(self) -> int:
        """CINC-class gates; a CINC dagger costs the same as a CINC."""
        return self.counts["cinc"] + self.counts["cinc_dagger"]

    def __getitem__(self, kind: str) -> int:
        return self.counts[kind]

    def as_dict(self) -> dict:
        out = {kind: self.counts[kind] for kind in GATE_KINDS}
        out["cinc_total"] = self.cinc
        return out


def count_gates(c: Circuit) -> GateTally:
    return GateTally(Counter(g.kind for g in c.gates))
