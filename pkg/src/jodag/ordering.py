"""Permutations of node labels and the proposal moves of the ordering sampler.

Positions and labels are both 1-indexed: an :class:`Ordering` over ``p`` nodes
stores ``perm`` with ``perm[t-1]`` being the label placed at position ``t``,
and every label in ``{1, ..., p}`` appears exactly once.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "Ordering",
    "predecessors",
    "r2r_move",
    "r2r_moves",
    "r2r_neighborhood",
    "insert_before_moves",
    "insert_before_neighborhood",
    "adj_move",
    "adj_moves",
    "rts_move",
    "rts_moves",
    "neighborhood_moves",
    "apply_move",
    "kendall_tau",
    "swap_first_two",
]


@dataclass(frozen=True)
class Ordering:
    """A permutation of the labels ``{1, ..., p}`` in one-line notation."""

    perm: tuple[int, ...]

    def __post_init__(self):
        p = len(self.perm)
        if p == 0:
            raise ValueError("ordering must contain at least one label")
        if sorted(self.perm) != list(range(1, p + 1)):
            raise ValueError(f"not a permutation of 1..{p}: {self.perm}")

    @property
    def p(self) -> int:
        return len(self.perm)

    @classmethod
    def identity(cls, p: int) -> "Ordering":
        return cls(tuple(range(1, p + 1)))

    @classmethod
    def from_string(cls, text: str) -> "Ordering":
        """Parse the comma-separated serialization, e.g. ``"3,1,2"``."""
        try:
            labels = tuple(int(tok) for tok in text.strip().split(","))
        except ValueError as exc:
            raise ValueError(f"cannot parse ordering {text!r}") from exc
        return cls(labels)

    def to_string(self) -> str:
        return ",".join(str(v) for v in self.perm)

    def __str__(self) -> str:
        return self.to_string()

    def position(self, label: int) -> int:
        """1-indexed position of ``label``."""
        if not 1 <= label <= self.p:
            raise ValueError(f"label {label} out of range 1..{self.p}")
        return self.perm.index(label) + 1

    def inverse(self) -> tuple[int, ...]:
        """Position lookup table: ``inverse()[label-1]`` is the position of ``label``."""
        inv = [0] * self.p
        for pos, label in enumerate(self.perm, start=1):
            inv[label - 1] = pos
        return tuple(inv)

    def reversed(self) -> "Ordering":
        return Ordering(self.perm[::-1])


def predecessors(sigma: Ordering, j: int) -> frozenset[int]:
    """Labels placed before label ``j`` in ``sigma``."""
    pos = sigma.position(j)
    return frozenset(sigma.perm[: pos - 1])


def swap_first_two(sigma: Ordering) -> Ordering:
    """Exchange the labels at the first two positions."""
    if sigma.p < 2:
        raise ValueError("need p >= 2 to swap the first two positions")
    perm = sigma.perm
    return Ordering((perm[1], perm[0]) + perm[2:])


# ---------------------------------------------------------------------------
# Moves.  A move is a pair of positions; ``apply_move`` turns it into a new
# permutation tuple plus the 0-indexed window [lo, hi] of positions whose
# prefix label set changed (nodes outside the window keep their predecessor
# sets, which the sampler exploits for incremental rescoring).
# ---------------------------------------------------------------------------


def _check_positions(p: int, *positions: int) -> None:
    for pos in positions:
        if not 1 <= pos <= p:
            raise ValueError(f"position {pos} out of range 1..{p}")


def _insert_tuple(perm: tuple[int, ...], i: int, j: int) -> tuple[int, ...]:
    # 0-indexed core: remove element at j, reinsert before (i<j) / after (i>j) i.
    if i < j:
        return perm[:i] + (perm[j],) + perm[i:j] + perm[j + 1 :]
    return perm[: j] + perm[j + 1 : i + 1] + (perm[j],) + perm[i + 1 :]


def r2r_move(sigma: Ordering, i: int, j: int) -> Ordering:
    """Remove the element at position ``j`` and reinsert it at position ``i``.

    For ``i < j`` the element lands immediately before the old position ``i``;
    for ``i > j`` it lands immediately after the old position ``i``.
    """
    _check_positions(sigma.p, i, j)
    if i == j:
        raise ValueError("insert move requires two distinct positions")
    return Ordering(_insert_tuple(sigma.perm, i - 1, j - 1))


@lru_cache(maxsize=None)
def r2r_moves(p: int) -> tuple[tuple[int, int], ...]:
    """Canonical (target, source) position pairs enumerating the insert neighborhood.

    Every adjacent swap is representable both as a leftward insert and as a
    rightward insert; only the leftward form is kept, so the list has exactly
    ``(p-1)**2`` entries and the induced neighborhood is duplicate-free.
    """
    if p < 2:
        raise ValueError("need p >= 2 for a non-empty neighborhood")
    moves = [(t, j) for j in range(2, p + 1) for t in range(1, j)]
    moves += [(t, j) for j in range(1, p - 1) for t in range(j + 2, p + 1)]
    return tuple(moves)


def r2r_neighborhood(sigma: Ordering) -> list[Ordering]:
    """All ``(p-1)**2`` distinct orderings one insert move away from ``sigma``."""
    return [r2r_move(sigma, t, j) for t, j in r2r_moves(sigma.p)]


@lru_cache(maxsize=None)
def insert_before_moves(p: int) -> tuple[tuple[int, int], ...]:
    """The leftward-insert half of the neighborhood: pairs with target < source."""
    if p < 2:
        raise ValueError("need p >= 2 for a non-empty neighborhood")
    return tuple((t, j) for j in range(2, p + 1) for t in range(1, j))


def insert_before_neighborhood(sigma: Ordering) -> list[Ordering]:
    return [r2r_move(sigma, t, j) for t, j in insert_before_moves(sigma.p)]


def adj_move(sigma: Ordering, i: int) -> Ordering:
    """Swap the elements at positions ``i`` and ``i+1``."""
    _check_positions(sigma.p, i, i + 1)
    perm = sigma.perm
    return Ordering(perm[: i - 1] + (perm[i], perm[i - 1]) + perm[i + 1 :])


@lru_cache(maxsize=None)
def adj_moves(p: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, i + 1) for i in range(1, p))


def rts_move(sigma: Ordering, i: int, j: int) -> Ordering:
    """Swap the elements at positions ``i < j``, leaving everything else fixed."""
    _check_positions(sigma.p, i, j)
    if i >= j:
        raise ValueError("transposition requires i < j")
    perm = list(sigma.perm)
    perm[i - 1], perm[j - 1] = perm[j - 1], perm[i - 1]
    return Ordering(tuple(perm))


@lru_cache(maxsize=None)
def rts_moves(p: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, j) for i in range(1, p) for j in range(i + 1, p + 1))


def neighborhood_moves(kind: str, p: int) -> tuple[tuple[int, int], ...]:
    """Move list for a named proposal neighborhood (``r2r``, ``adj`` or ``rts``)."""
    if kind == "r2r":
        return r2r_moves(p)
    if kind == "adj":
        return adj_moves(p)
    if kind == "rts":
        return rts_moves(p)
    raise ValueError(f"unknown neighborhood {kind!r}; expected r2r, adj or rts")


def apply_move(perm: tuple[int, ...], kind: str, move: tuple[int, int]):
    """Apply a move to a raw permutation tuple.

    Returns ``(new_perm, affected)`` where ``affected`` is the tuple of labels
    whose predecessor set differs between the two permutations.
    """
    a, b = move
    if kind == "r2r":
        new = _insert_tuple(perm, a - 1, b - 1)
    elif kind == "adj":
        new = perm[: a - 1] + (perm[a], perm[a - 1]) + perm[a + 1 :]
    elif kind == "rts":
        lst = list(perm)
        lst[a - 1], lst[b - 1] = lst[b - 1], lst[a - 1]
        new = tuple(lst)
    else:
        raise ValueError(f"unknown neighborhood {kind!r}")
    lo, hi = min(a, b) - 1, max(a, b) - 1
    return new, new[lo : hi + 1]


def kendall_tau(a: Ordering, b: Ordering) -> float:
    """Rank correlation of two orderings over all label pairs, in ``[-1, 1]``.

    Computed as (concordant - discordant) / (p(p-1)/2) from relative label
    positions; permutations have no ties, so this is the plain tau-a.
    """
    if a.p != b.p:
        raise ValueError(f"length mismatch: {a.p} vs {b.p}")
    if a.p == 1:
        raise ValueError("rank correlation undefined for a single label")
    pa = np.asarray(a.inverse(), dtype=np.int64)
    pb = np.asarray(b.inverse(), dtype=np.int64)
    da = np.sign(pa[:, None] - pa[None, :])
    db = np.sign(pb[:, None] - pb[None, :])
    upper = np.triu_indices(a.p, k=1)
    agree = int(np.sum(da[upper] * db[upper]))
    return agree / (a.p * (a.p - 1) / 2)
