"""Recursive CSD synthesis of an arbitrary unitary on H_n (x) H_m.

Pipeline:

1. :func:`decompose_recursive` splits the unitary into an alternating
   product ``Z V Z V ... Z`` of multiplexors (``Z``) and V-blocks (runs of
   ``UcrX`` gates), ``ceil(log2 n)`` CSD levels deep.
2. :func:`eliminate_commuting` pushes the controlled factors of each
   multiplexor that commute with the neighbouring V-block into the next
   multiplexor.
3. :func:`lower_to_cinc` expands everything to local gates and ``C_n(X_m)``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from hdsynth.circuit import (
    L2,
    L3,
    Cinc,
    CincDagger,
    Circuit,
    ControlledDiag,
    ControlledU,
    Dims,
    LocalA,
    LocalB,
    Multiplexor,
    UcrX,
    UcrZ,
    count_gates,
    gate_matrix,
    simulate,
    t_matrix,
    transposition,
)
from hdsynth.counting import PartitionTree, partition_tree
from hdsynth.numerics import as_square, csd, require_unitary
from hdsynth.synthesis.primitives import (
    PRUNE_TOL,
    synth_controlled_diagonal,
    synth_controlled_unitary,
    synth_multiplexor,
    synth_ucr_x,
    synth_ucr_z,
)


@dataclass(frozen=True)
class SynthOptions:
    prune_identity: bool = False
    run_elimination: bool = True
    target_level: str = L3

    def __post_init__(self):
        if self.target_level not in (L2, L3):
            raise ValueError(f"target_level must be {L2!r} or {L3!r}")


@dataclass(frozen=True, eq=False)
class CsdStepResult:
    """``x = u @ V @ u_prime`` with ``V`` the product of ``v_factors``."""

    u: np.ndarray
    v_factors: tuple
    u_prime: np.ndarray
    n1: int
    m: int

    def blocks(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Diagonal blocks ``(u1, u2, u1', u2')`` of sizes ``n1*m`` and ``(n-n1)*m``."""
        p = self.n1 * self.m
        return self.u[:p, :p], self.u[p:, p:], self.u_prime[:p, :p], self.u_prime[p:, p:]

    def v_matrix(self) -> np.ndarray:
        dims = Dims(self.u.shape[0] // self.m, self.m)
        out = np.eye(dims.total, dtype=complex)
        for g in self.v_factors:
            out = out @ gate_matrix(g, dims)
        return out

    def reconstruct(self) -> np.ndarray:
        return self.u @ self.v_matrix() @ self.u_prime


def csd_step(x, n: int, m: int) -> CsdStepResult:
    """One CSD level with the middle factor written as ``floor(n/2)`` UcrX gates."""
    x = as_square(x)
    if n < 2 or m < 1 or x.shape[0] != n * m:
        raise ValueError(f"matrix of size {x.shape[0]} does not match n={n}, m={m}")
    n1 = n // 2
    p = n1 * m
    q = (n - n1) * m
    f = csd(x, p)
    # move the real sine blocks onto -i S: U2 = U2bar diag(iI, I), U2' = diag(-iI, I) U2bar'
    twist = np.ones(q, dtype=complex)
    twist[:p] = 1j
    u2 = f.u2 * twist[np.newaxis, :]
    u2p = twist.conj()[:, np.newaxis] * f.v2
    angles = f.thetas.reshape(n1, m)
    v_factors = tuple(UcrX(i, n1 + i, angles[i - 1]) for i in range(1, n1 + 1))
    return CsdStepResult(
        u=scipy.linalg.block_diag(f.u1, u2),
        v_factors=v_factors,
        u_prime=scipy.linalg.block_diag(f.v1, u2p),
        n1=n1,
        m=m,
    )


def _expand(mat: np.ndarray, depth: int, tree: PartitionTree, m: int) -> list:
    """Product-order gate list for a matrix block-diagonal on the depth-``depth`` blocks."""
    n = tree.n
    if depth > tree.d:
        return [Multiplexor([mat[k * m:(k + 1) * m, k * m:(k + 1) * m] for k in range(n)])]
    left = np.zeros_like(mat)
    right = np.zeros_like(mat)
    v_gates = []
    for offset, size in tree.blocks(depth):
        sl = slice(offset * m, (offset + size) * m)
        block = mat[sl, sl]
        if size == 1:
            left[sl, sl] = block
            right[sl, sl] = np.eye(m)
            continue
        step = csd_step(block, size, m)
        left[sl, sl] = step.u
        right[sl, sl] = step.u_prime
        v_gates += [UcrX(g.i + offset, g.j + offset, g.angles) for g in step.v_factors]
    return _expand(left, depth + 1, tree, m) + v_gates + _expand(right, depth + 1, tree, m)


def _check_input(x, dims: Dims) -> np.ndarray:
    x = as_square(x)
    if x.shape[0] != dims.total:
        raise ValueError(f"matrix is {x.shape[0]}x{x.shape[0]}, dims require {dims.total}x{dims.total}")
    require_unitary(x)
    return x


def decompose_recursive(x, dims: Dims) -> Circuit:
    """L2 circuit ``Z V Z ... Z`` with ``2^d`` multiplexors and ``2^d - 1`` V-blocks."""
    x = _check_input(x, dims)
    tree = partition_tree(dims.n)
    product = _expand(x, 1, tree, dims.m)
    return Circuit(dims, reversed(product), L2)


# ---------------------------------------------------------------------------
# Z V Z ... Z structure


def split_zv(c: Circuit) -> tuple[list, list]:
    """Multiplexors and V-blocks of a ``Z V Z ... Z`` circuit, in application order."""
    zs, vs = [], []
    run: list = []
    expect_z = True
    for g in c.gates:
        if isinstance(g, Multiplexor):
            if not expect_z and not run:
                raise ValueError("malformed Z V Z circuit: adjacent multiplexors")
            if run:
                vs.append(run)
                run = []
            zs.append(g)
            expect_z = False
        elif isinstance(g, UcrX):
            if expect_z:
                raise ValueError("malformed Z V Z circuit: V-block before the first multiplexor")
            run.append(g)
        else:
            raise ValueError(f"malformed Z V Z circuit: unexpected {g.kind}")
    if run or not zs:
        raise ValueError("malformed Z V Z circuit: must start and end with a multiplexor")
    return zs, vs


def v_support(v_block) -> set[int]:
    out: set[int] = set()
    for g in v_block:
        out |= {g.i, g.j}
    return out


def prune_zv(c: Circuit, tol: float = PRUNE_TOL) -> Circuit:
    """Drop near-identity UcrX gates and fuse multiplexors that become adjacent."""
    eye = np.eye(c.dims.total)
    gates: list = []
    for g in c.gates:
        if isinstance(g, UcrX) and np.linalg.norm(gate_matrix(g, c.dims) - eye) <= tol:
            continue
        if isinstance(g, Multiplexor) and gates and isinstance(gates[-1], Multiplexor):
            prev = gates.pop()
            g = Multiplexor([b @ a for a, b in zip(prev.branches, g.branches)])
        gates.append(g)
    return Circuit(c.dims, gates, L2)


def eliminate_commuting(c: Circuit) -> tuple[Circuit, int]:
    """Migrate controlled factors across the V-blocks they commute with.

    Returns the rewritten L2 circuit and the number of controlled-unitary
    factors that were fused away. Each multiplexor followed (in product
    order) by a V-block is expanded into ``I (x) U_pivot`` and controlled
    factors on the V-block's support; factors on the remaining levels are
    folded into the branches of the multiplexor on the far side of the V-block.
    """
    zs, vs = split_zv(c)
    # product order: leftmost factor first
    zs, vs = zs[::-1], vs[::-1]
    branches = [list(z.branches) for z in zs]
    product: list = []
    eliminated = 0
    for t, v in enumerate(vs):
        support = v_support(v)
        pivot = min(support)
        base = branches[t][pivot - 1]
        base_h = base.conj().T
        product.append(LocalB(base))
        for level in range(1, c.dims.n + 1):
            if level == pivot:
                continue
            factor = base_h @ branches[t][level - 1]
            if level in support:
                product.append(ControlledU(level, factor))
            else:
                branches[t + 1][level - 1] = factor @ branches[t + 1][level - 1]
                eliminated += 1
        product += v
    product.append(Multiplexor(branches[-1]))
    return Circuit(c.dims, reversed(product), L2), eliminated


# ---------------------------------------------------------------------------
# lowering


def _is_identity_gate(g, dims: Dims, tol: float = PRUNE_TOL) -> bool:
    return float(np.linalg.norm(gate_matrix(g, dims) - np.eye(dims.total))) <= tol


def _expand_gate(g, dims: Dims, prune: bool) -> tuple:
    if isinstance(g, (LocalA, LocalB, Cinc, CincDagger)):
        return (g,)
    if prune and _is_identity_gate(g, dims):
        return ()
    if isinstance(g, ControlledU):
        return synth_controlled_unitary(g.control_level, g.u, dims).gates
    if isinstance(g, ControlledDiag):
        return synth_controlled_diagonal(g.control_level, g.thetas, dims).gates
    if isinstance(g, Multiplexor):
        return synth_multiplexor(g.branches, 1, dims, prune=prune).gates
    if isinstance(g, UcrZ):
        return synth_ucr_z(g.i, g.j, g.angles, dims).gates
    if isinstance(g, UcrX):
        return synth_ucr_x(g.i, g.j, g.angles, dims).gates
    raise TypeError(f"cannot lower {g!r}")


def _to_cinc_n(g, dims: Dims) -> tuple:
    """Rewrite CINC daggers with T_m and move every control onto level n."""
    n, m = dims.n, dims.m
    if isinstance(g, CincDagger):
        t = t_matrix(m)
        return (LocalB(t),) + _to_cinc_n(Cinc(g.control_level), dims) + (LocalB(t),)
    if isinstance(g, Cinc) and g.control_level != n:
        p = transposition(g.control_level, n, n)
        return (LocalA(p), Cinc(n), LocalA(p))
    return (g,)


def _merge_locals(gates, dims: Dims, prune: bool) -> list:
    """Collapse every run of local gates between CINCs into one LocalA and one LocalB."""
    out: list = []
    acc_a = np.eye(dims.n, dtype=complex)
    acc_b = np.eye(dims.m, dtype=complex)
    touched_a = touched_b = False

    def flush():
        nonlocal acc_a, acc_b, touched_a, touched_b
        for touched, acc, cls in ((touched_a, acc_a, LocalA), (touched_b, acc_b, LocalB)):
            if not touched:
                continue
            if prune and np.sqrt(dims.total / acc.shape[0]) * np.linalg.norm(acc - np.eye(acc.shape[0])) <= PRUNE_TOL:
                continue
            out.append(cls(acc))
        acc_a = np.eye(dims.n, dtype=complex)
        acc_b = np.eye(dims.m, dtype=complex)
        touched_a = touched_b = False

    for g in gates:
        if isinstance(g, LocalA):
            acc_a = g.u @ acc_a
            touched_a = True
        elif isinstance(g, LocalB):
            acc_b = g.u @ acc_b
            touched_b = True
        else:
            flush()
            out.append(g)
    flush()
    return out


def lower_to_cinc(c: Circuit, opts: SynthOptions = SynthOptions()) -> Circuit:
    """Expand an L2 circuit into LocalA, LocalB and ``Cinc(n)`` only."""
    dims = c.dims
    prune = opts.prune_identity
    expanded = [h for g in c.gates for h in _expand_gate(g, dims, prune)]
    relocated = [h for g in expanded for h in _to_cinc_n(g, dims)]
    return Circuit(dims, _merge_locals(relocated, dims, prune), L3)


# ---------------------------------------------------------------------------
# pipeline


@dataclass
class SynthesisReport:
    cinc_count: int
    eliminated: int
    reconstruction_error: float
    partition_tree: list
    per_kind_counts: dict
    dims: tuple = ()
    options: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def as_dict(self) -> dict:
        return {
            "cinc_count": self.cinc_count,
            "eliminated": self.eliminated,
            "reconstruction_error": self.reconstruction_error,
            "partition_tree": self.partition_tree,
            "per_kind_counts": self.per_kind_counts,
            "dims": list(self.dims),
            "options": self.options,
            "wall_time": self.wall_time,
        }


def synth_unitary(x, dims: Dims, opts: SynthOptions = SynthOptions()) -> tuple[Circuit, SynthesisReport]:
    """Full pipeline; the report's error is ``||simulate(circuit) - x||_F``."""
    start = time.perf_counter()
    x = _check_input(x, dims)
    circuit = decompose_recursive(x, dims)
    if opts.prune_identity:
        circuit = prune_zv(circuit)
    eliminated = 0
    if opts.run_elimination:
        circuit, eliminated = eliminate_commuting(circuit)
    if opts.target_level == L3:
        circuit = lower_to_cinc(circuit, opts)
    tally = count_gates(circuit)
    report = SynthesisReport(
        cinc_count=tally.cinc,
        eliminated=eliminated,
        reconstruction_error=float(np.linalg.norm(simulate(circuit) - x)),
        partition_tree=[list(level) for level in partition_tree(dims.n).levels],
        per_kind_counts=tally.as_dict(),
        dims=(dims.n, dims.m),
        options={
            "prune_identity": opts.prune_identity,
            "run_elimination": opts.run_elimination,
            "target_level": opts.target_level,
        },
        wall_time=time.perf_counter() - start,
    )
    return circuit, report
