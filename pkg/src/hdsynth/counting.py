"""Closed-form CINC counts for the recursive synthesis.

The recursion halves the system-1 dimension ``d = ceil(log2 n)`` times. The
partition tree records the block sizes at each depth; its odd entries are
the levels a V-block leaves untouched, and each of those lets one
controlled-unitary factor migrate across the V-block for free.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass


def _depth(n: int) -> int:
    return (n - 1).bit_length()  # ceil(log2 n) for n >= 1


def _check(n: int) -> None:
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")


@dataclass(frozen=True)
class PartitionTree:
    n: int
    d: int
    levels: tuple[tuple[int, ...], ...]

    def offsets(self, k: int) -> tuple[int, ...]:
        """0-based first level of every block at depth ``k`` (1-based)."""
        out, acc = [], 0
        for size in self.levels[k - 1]:
            out.append(acc)
            acc += size
        return tuple(out)

    def blocks(self, k: int) -> list[tuple[int, int]]:
        """Non-empty ``(offset, size)`` blocks at depth ``k``."""
        return [(o, s) for o, s in zip(self.offsets(k), self.levels[k - 1]) if s > 0]


def partition_tree(n: int) -> PartitionTree:
    """Block sizes for depths ``1..d``; a size ``s`` splits as ``(s // 2, s - s // 2)``.

    Depth ``k`` always has ``2**(k-1)`` entries. Since ``d = ceil(log2 n)``,
    every entry above the last depth is at least 2, so no empty blocks arise.
    """
    _check(n)
    d = _depth(n)
    levels = [(n,)]
    for _ in range(1, d):
        nxt = []
        for s in levels[-1]:
            nxt += [s // 2, s - s // 2]
        levels.append(tuple(nxt))
    return PartitionTree(n=n, d=d, levels=tuple(levels))


def odd_counts(n: int) -> tuple[int, ...]:
    return tuple(sum(s % 2 for s in level) for level in partition_tree(n).levels)


def cinc_upper_bound(n: int) -> int:
    _check(n)
    d = _depth(n)
    odd = odd_counts(n)
    return (2 * n - 1) * 2 ** (d + 1) - 2 * n - sum(2 ** (k + 1) * odd[k - 1] for k in range(1, d + 1))


@dataclass(frozen=True)
class CountBreakdown:
    multiplexor_cinc: int
    ucr_cinc: int
    eliminated_controlled_units: int
    total_cinc: int
    multiplexors: int
    v_blocks: int
    ucr_gates_per_level: tuple[int, ...]

    def as_dict(self) -> dict:
        return asdict(self)


def predict_structure(n: int) -> CountBreakdown:
    tree = partition_tree(n)
    odd = odd_counts(n)
    d = tree.d
    per_level = tuple((n - odd[k - 1]) // 2 for k in range(1, d + 1))
    mux = 2**d * 2 * (n - 1)
    ucr = sum(2 ** (k - 1) * per_level[k - 1] * 4 for k in range(1, d + 1))
    eliminated = sum(2 ** (k - 1) * odd[k - 1] for k in range(1, d + 1))
    return CountBreakdown(
        multiplexor_cinc=mux,
        ucr_cinc=ucr,
        eliminated_controlled_units=eliminated,
        total_cinc=mux + ucr - 2 * eliminated,
        multiplexors=2**d,
        v_blocks=2**d - 1,
        ucr_gates_per_level=per_level,
    )


def count_report(n: int) -> dict:
    """JSON-ready summary of the counting model for one ``n``."""
    tree = partition_tree(n)
    return {
        "n": n,
        "d": tree.d,
        "levels": [list(level) for level in tree.levels],
        "odd_counts": list(odd_counts(n)),
        "bound": cinc_upper_bound(n),
        "breakdown": predict_structure(n).as_dict(),
    }
