"""Population-level brute-force machinery for identifiability checks.

Everything here works at "desk scale" (roughly ``p <= 10``): Markov
equivalence classes are enumerated by closing a DAG under covered-edge
reversals, essential arrows fall out as the orientation intersection of the
class, and score landscapes over all ``p!`` orderings are computed exactly
from analytic covariance matrices.  These exhaustive routines serve as
independent oracles for the data-driven estimators in the rest of the
package.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dag import Dag, WeightedDag
from .errors import OracleLimitError, SingularDesign
from .ordering import Ordering
from typing import Iterable

__all__ = [
    "Covariance",
    "EquivalenceClass",
    "markov_equivalent",
    "equivalence_class",
    "class_orderings",
    "linear_extensions",
    "all_orderings",
    "order_forcing_edges",
    "population_covariance",
    "population_minimal_imap",
    "sparsest_permutation_score",
    "dsep",
    "dsep_minimal_imap",
    "JointArgmaxResult",
    "joint_argmax",
]

CLASS_ENUMERATION_LIMIT = 10
PERMUTATION_ENUMERATION_LIMIT = 8


class Covariance:
    """A symmetric positive-definite matrix with cached sub-regressions."""

    def __init__(self, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("covariance must be a square matrix")
        if not np.allclose(matrix, matrix.T, atol=1e-12, rtol=0.0):
            raise ValueError("covariance must be symmetric within 1e-12")
        try:
            np.linalg.cholesky(matrix)
        except np.linalg.LinAlgError as exc:
            raise ValueError("covariance must be positive definite") from exc
        matrix = (matrix + matrix.T) / 2.0
        matrix.setflags(write=False)
        self.matrix = matrix
        self._coef_cache: dict[tuple[int, tuple[int, ...]], np.ndarray] = {}

    @property
    def p(self) -> int:
        return self.matrix.shape[0]

    def regression_coefficients(self, j: int, subset: tuple[int, ...]) -> np.ndarray:
        """Coefficients of the linear projection of variable ``j`` on ``subset``."""
        key = (j, subset)
        cached = self._coef_cache.get(key)
        if cached is not None:
            return cached
        if not subset:
            beta = np.zeros(0)
        else:
            idx = np.array(subset, dtype=np.intp) - 1
            sub = self.matrix[np.ix_(idx, idx)]
            rhs = self.matrix[idx, j - 1]
            try:
                chol = np.linalg.cholesky(sub)
            except np.linalg.LinAlgError as exc:
                raise SingularDesign(
                    f"sub-covariance on {subset} is numerically degenerate"
                ) from exc
            y = scipy.linalg.solve_triangular(chol, rhs, lower=True, check_finite=False)
            beta = scipy.linalg.solve_triangular(
                chol.T, y, lower=False, check_finite=False
            )
        self._coef_cache[key] = beta
        return beta


@dataclass(frozen=True)
class EquivalenceClass:
    """A Markov equivalence class: its member DAGs and their shared orientations."""

    members: frozenset[Dag]
    essential: frozenset[tuple[int, int]]


def markov_equivalent(g: Dag, h: Dag) -> bool:
    """Same skeleton and same v-structures (the Verma-Pearl characterization)."""
    if g.p != h.p:
        raise ValueError("graph sizes differ")
    return g.skeleton() == h.skeleton() and g.v_structures() == h.v_structures()


def equivalence_class(g: Dag, limit: int = CLASS_ENUMERATION_LIMIT) -> EquivalenceClass:
    """Breadth-first closure of ``g`` under covered-edge reversals.

    Reversing a covered edge never leaves the Markov equivalence class, and
    repeated reversals reach every member, so the closure is the full class.
    Essential arrows are the edges oriented identically in every member.
    """
    if g.p > limit:
        raise OracleLimitError(f"class enumeration limited to p <= {limit}")
    seen = {g}
    queue = deque([g])
    while queue:
        cur = queue.popleft()
        for i, j in cur.covered_edges():
            nxt = cur.reverse_edge(i, j)
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    essential = frozenset.intersection(*(m.edges for m in seen))
    return EquivalenceClass(members=frozenset(seen), essential=essential)


def linear_extensions(
    edges: Iterable[tuple[int, int]], p: int, limit: int = CLASS_ENUMERATION_LIMIT
) -> frozenset[Ordering]:
    """All orderings placing ``i`` before ``j`` for every constraint ``(i, j)``."""
    if p > limit:
        raise OracleLimitError(f"linear-extension enumeration limited to p <= {limit}")
    succ: dict[int, set[int]] = {i: set() for i in range(1, p + 1)}
    indeg = {i: 0 for i in range(1, p + 1)}
    for i, j in edges:
        if not (1 <= i <= p and 1 <= j <= p) or i == j:
            raise ValueError(f"constraint ({i},{j}) invalid for p={p}")
        if j not in succ[i]:
            succ[i].add(j)
            indeg[j] += 1
    # Dag construction rejects cyclic constraint sets.
    Dag(p, {(i, j) for i, out in succ.items() for j in out})

    out: list[Ordering] = []
    prefix: list[int] = []

    def backtrack():
        if len(prefix) == p:
            out.append(Ordering(tuple(prefix)))
            return
        for node in range(1, p + 1):
            if indeg[node] == 0 and node not in prefix_set:
                prefix.append(node)
                prefix_set.add(node)
                for child in succ[node]:
                    indeg[child] -= 1
                backtrack()
                for child in succ[node]:
                    indeg[child] += 1
                prefix_set.discard(node)
                prefix.pop()

    prefix_set: set[int] = set()
    backtrack()
    return frozenset(out)


def all_orderings(p: int, limit: int = PERMUTATION_ENUMERATION_LIMIT) -> list[Ordering]:
    if p > limit:
        raise OracleLimitError(f"full permutation enumeration limited to p <= {limit}")
    return [Ordering(perm) for perm in itertools.permutations(range(1, p + 1))]


def class_orderings(
    eq_class: EquivalenceClass, limit: int = CLASS_ENUMERATION_LIMIT
) -> frozenset[Ordering]:
    """Union over class members of the orderings consistent with that member."""
    out: set[Ordering] = set()
    for member in eq_class.members:
        out.update(linear_extensions(member.edges, member.p, limit=limit))
    return frozenset(out)


def order_forcing_edges(sigma_star: Ordering) -> frozenset[tuple[int, int]]:
    """The ``p-1`` precedence constraints that pin an ordering up to its first two slots.

    Consists of the chain over positions 2..p plus the extra constraint from
    position 1 to position 3; its linear extensions are exactly the reference
    ordering and its first-two swap.
    """
    if sigma_star.p < 3:
        raise ValueError("need p >= 3")
    perm = sigma_star.perm
    edges = {(perm[j - 1], perm[j]) for j in range(2, sigma_star.p)}
    edges.add((perm[0], perm[2]))
    return frozenset(edges)


# ---------------------------------------------------------------------------
# Population-level scores.
# ---------------------------------------------------------------------------


def population_covariance(scm: WeightedDag) -> Covariance:
    """Analytic covariance of the linear Gaussian model ``X = B^T X + e``."""
    b = scm.coefficient_matrix()
    eye = np.eye(scm.p)
    inv = np.linalg.solve(eye - b.T, eye)
    sigma = inv @ np.diag(scm.noise_vars) @ inv.T
    return Covariance((sigma + sigma.T) / 2.0)


def population_minimal_imap(
    sigma: Ordering, cov: Covariance, tol: float = 1e-9
) -> Dag:
    """Sparsest DAG consistent with ``sigma`` that is an I-map of the distribution.

    Each node is regressed on all of its predecessors; an edge is kept when
    the coefficient is nonzero beyond ``tol`` (scaled by the largest
    coefficient magnitude in that node's regression, with a floor of one).
    """
    if sigma.p != cov.p:
        raise ValueError("ordering and covariance sizes differ")
    edges = []
    perm = sigma.perm
    for pos in range(1, sigma.p):
        j = perm[pos]
        preds = tuple(sorted(perm[:pos]))
        beta = cov.regression_coefficients(j, preds)
        threshold = tol * max(1.0, float(np.max(np.abs(beta))))
        for i, coef in zip(preds, beta):
            if abs(coef) > threshold:
                edges.append((i, j))
    return Dag(sigma.p, edges)


def sparsest_permutation_score(
    sigma: Ordering, cov: Covariance, tol: float = 1e-9
) -> int:
    """Negated edge count of the minimal I-map; higher is sparser."""
    return -population_minimal_imap(sigma, cov, tol=tol).n_edges


# ---------------------------------------------------------------------------
# d-separation, for a combinatorially exact route to the minimal I-map of a
# faithful distribution (cross-checks the numeric route above).
# ---------------------------------------------------------------------------


def dsep(g: Dag, x: int, y: int, given: frozenset[int] | set[int]) -> bool:
    """True iff ``x`` and ``y`` are d-separated by ``given`` in ``g`` (Bayes-ball)."""
    given = frozenset(given)
    if x == y or x in given or y in given:
        raise ValueError("endpoints must be distinct and outside the conditioning set")
    parents = {j: g.parent_set(j) for j in range(1, g.p + 1)}
    children = {j: g.children(j) for j in range(1, g.p + 1)}
    ancestors = set(given)
    stack = list(given)
    while stack:
        node = stack.pop()
        for par in parents[node]:
            if par not in ancestors:
                ancestors.add(par)
                stack.append(par)

    visited: set[tuple[int, bool]] = set()
    # (node, entered_downward): downward means the trail entered along an
    # edge pointing into the node.
    frontier = [(x, False)]
    while frontier:
        node, down = frontier.pop()
        if (node, down) in visited:
            continue
        visited.add((node, down))
        if node == y:
            return False
        if not down:
            if node not in given:
                frontier.extend((par, False) for par in parents[node])
                frontier.extend((ch, True) for ch in children[node])
        else:
            if node not in given:
                frontier.extend((ch, True) for ch in children[node])
            if node in ancestors:
                frontier.extend((par, False) for par in parents[node])
    return True


def dsep_minimal_imap(sigma: Ordering, g: Dag) -> Dag:
    """Minimal I-map of a distribution faithful to ``g``, via d-separation tests."""
    if sigma.p != g.p:
        raise ValueError("ordering and graph sizes differ")
    perm = sigma.perm
    edges = []
    for pos in range(1, sigma.p):
        j = perm[pos]
        preds = perm[:pos]
        for i in preds:
            rest = frozenset(preds) - {i}
            if not dsep(g, i, j, rest):
                edges.append((i, j))
    return Dag(g.p, edges)


# ---------------------------------------------------------------------------
# Joint landscape over all orderings.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JointArgmaxResult:
    """Exhaustive maximizers of the summed sparsest-permutation score.

    ``argmax`` comes from enumerating all ``p!`` orderings numerically;
    ``consistent_orderings`` is the combinatorial prediction (the intersection
    over models of the orderings consistent with some Markov-equivalent DAG),
    computed independently so the two routes can be cross-checked.
    """

    argmax: frozenset[Ordering]
    consistent_orderings: frozenset[Ordering]
    best_score: int


def joint_argmax(
    scms: list[WeightedDag],
    tol: float = 1e-9,
    limit: int = PERMUTATION_ENUMERATION_LIMIT,
) -> JointArgmaxResult:
    """Maximize the summed sparsest-permutation score over every ordering."""
    if not scms:
        raise ValueError("need at least one model")
    p = scms[0].p
    if any(scm.p != p for scm in scms):
        raise ValueError("all models must share the same node count")
    covs = [population_covariance(scm) for scm in scms]

    best: int | None = None
    maximizers: set[Ordering] = set()
    for sigma in all_orderings(p, limit=limit):
        total = sum(sparsest_permutation_score(sigma, cov, tol=tol) for cov in covs)
        if best is None or total > best:
            best = total
            maximizers = {sigma}
        elif total == best:
            maximizers.add(sigma)

    consistent = None
    for scm in scms:
        orders = class_orderings(equivalence_class(scm.dag))
        consistent = orders if consistent is None else (consistent & orders)
    return JointArgmaxResult(
        argmax=frozenset(maximizers),
        consistent_orderings=frozenset(consistent),
        best_score=int(best),
    )
