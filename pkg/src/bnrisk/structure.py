"""Score-based structure discovery: BDs/BDeu scoring and greedy hill climbing.

Both scores are Dirichlet-multinomial log marginal likelihoods and decompose
over families, so the search caches one score per (node, parent set) and
evaluates single-arc moves (add, delete, reverse) as local deltas. BDeu
spreads the imposed sample size over all parent configurations; BDs spreads
it only over configurations observed at least once, which keeps the
effective prior from washing out sparse families.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.special import gammaln

from ._kernels import family_counts
from .data import Dataset
from .model import ArcConstraints, Dag


class IncompleteDataError(ValueError):
    """Scoring requires complete data on the family's columns."""


class InfeasibleStartError(ValueError):
    """The initial graph violates the arc constraints."""


@dataclass(frozen=True)
class ScoreConfig:
    imposed_sample_size: float = 1.0
    score_kind: str = "bds"  # "bds" | "bdeu"

    def __post_init__(self):
        if self.imposed_sample_size <= 0:
            raise ValueError("imposed_sample_size must be positive")
        if self.score_kind not in ("bds", "bdeu"):
            raise ValueError(f"unknown score kind {self.score_kind!r}")


@dataclass(frozen=True)
class SearchConfig:
    max_iterations: int = 200
    tie_break: str = "lexicographic"  # "lexicographic" | "random"
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.tie_break not in ("lexicographic", "random"):
            raise ValueError(f"unknown tie-break rule {self.tie_break!r}")


def family_score(
    node: str, parents: Iterable[str], dataset: Dataset, cfg: ScoreConfig = ScoreConfig()
) -> float:
    """Log marginal likelihood of one family under the configured prior."""
    schema = dataset.schema
    parents = tuple(parents)
    if node in parents:
        raise ValueError(f"{node!r} cannot be its own parent")
    cols = [schema.index(p) for p in parents] + [schema.index(node)]
    cards = schema.cardinalities[cols]
    if np.any(dataset.codes[:, cols] < 0):
        raise IncompleteDataError(f"incomplete data for family of {node!r}")
    counts = family_counts(dataset.codes, cols, cards)
    k = int(cards[-1])
    q = counts.shape[0]
    n_u = counts.sum(axis=1)
    iss = cfg.imposed_sample_size
    if cfg.score_kind == "bdeu":
        a_cell = iss / (q * k)
        observed = np.ones(q, dtype=bool)
    else:
        observed = n_u > 0
        q_tilde = int(observed.sum())
        if q_tilde == 0:
            return 0.0
        a_cell = iss / (q_tilde * k)
    # rows with no data contribute zero either way; restrict for speed
    c = counts[observed]
    nu = n_u[observed]
    row_term = gammaln(k * a_cell) - gammaln(k * a_cell + nu)
    cell_term = gammaln(a_cell + c) - gammaln(a_cell)
    return float(row_term.sum() + cell_term.sum())


def network_score(dag: Dag, dataset: Dataset, cfg: ScoreConfig = ScoreConfig()) -> float:
    """Decomposable network score: sum of family scores over all nodes."""
    if not dag.is_acyclic():
        raise ValueError("graph contains a cycle")
    return sum(family_score(n, dag.parents(n), dataset, cfg) for n in dag.nodes)


@dataclass(frozen=True)
class Move:
    kind: str  # "add" | "delete" | "reverse"
    parent: str
    child: str
    delta: float
    score_after: float


@dataclass(frozen=True)
class HillClimbResult:
    dag: Dag
    score: float
    moves: tuple[Move, ...]


_KIND_RANK = {"add": 0, "delete": 1, "reverse": 2}


class _FamilyCache:
    def __init__(self, dataset: Dataset, cfg: ScoreConfig):
        self.dataset = dataset
        self.cfg = cfg
        self._cache: dict[tuple[str, frozenset[str]], float] = {}

    def score(self, node: str, parents: frozenset[str]) -> float:
        key = (node, parents)
        if key not in self._cache:
            ordered = tuple(sorted(parents, key=self.dataset.schema.index))
            self._cache[key] = family_score(node, ordered, self.dataset, self.cfg)
        return self._cache[key]


def _reaches(arcs: set[tuple[str, str]], src: str, dst: str) -> bool:
    """True if ``dst`` is reachable from ``src`` through ``arcs``."""
    children: dict[str, list[str]] = {}
    for p, c in arcs:
        children.setdefault(p, []).append(c)
    stack = [src]
    seen = set()
    while stack:
        n = stack.pop()
        if n == dst:
            return True
        if n in seen:
            continue
        seen.add(n)
        stack.extend(children.get(n, ()))
    return False


def hill_climb(
    dataset: Dataset,
    constraints: ArcConstraints = ArcConstraints(),
    initial: Dag | None = None,
    score_cfg: ScoreConfig = ScoreConfig(),
    search_cfg: SearchConfig = SearchConfig(),
) -> HillClimbResult:
    """Greedy local search over DAGs with add/delete/reverse arc moves.

    Accepts the best strictly improving legal move each iteration and stops
    when none exists or ``max_iterations`` moves were accepted. Required arcs
    are never deleted or reversed; forbidden arcs are never created; moves
    that would close a directed cycle are not legal. Ties between equal
    deltas fall to the lexicographic (kind, parent, child) order, or to a
    seeded random choice when the tie-break rule is "random".
    """
    schema = dataset.schema
    nodes = schema.names
    if initial is None:
        initial = Dag(nodes, constraints.required)
    if set(initial.nodes) != set(nodes):
        raise ValueError("initial graph nodes do not match the dataset schema")
    if not initial.is_acyclic():
        raise InfeasibleStartError("infeasible start: initial graph has a cycle")
    if not constraints.allows(initial):
        raise InfeasibleStartError("infeasible start: initial graph violates constraints")

    cache = _FamilyCache(dataset, score_cfg)
    arcs: set[tuple[str, str]] = set(initial.arcs)
    parents: dict[str, frozenset[str]] = {
        n: frozenset(p for p, c in arcs if c == n) for n in nodes
    }
    fam: dict[str, float] = {n: cache.score(n, parents[n]) for n in nodes}
    total = sum(fam.values())

    rng = np.random.default_rng(search_cfg.seed)
    moves: list[Move] = []

    for _ in range(search_cfg.max_iterations):
        candidates: list[tuple[float, int, str, str, dict[str, frozenset[str]]]] = []
        for p in nodes:
            for c in nodes:
                if p == c:
                    continue
                arc = (p, c)
                if arc not in arcs:
                    if arc in constraints.forbidden:
                        continue
                    if _reaches(arcs, c, p):
                        continue
                    new_parents = {c: parents[c] | {p}}
                    delta = cache.score(c, new_parents[c]) - fam[c]
                    candidates.append((delta, _KIND_RANK["add"], p, c, new_parents))
                else:
                    if arc not in constraints.required:
                        new_parents = {c: parents[c] - {p}}
                        delta = cache.score(c, new_parents[c]) - fam[c]
                        candidates.append((delta, _KIND_RANK["delete"], p, c, new_parents))
                        if (c, p) not in constraints.forbidden:
                            rest = arcs - {arc}
                            if not _reaches(rest, p, c):
                                new_parents = {
                                    c: parents[c] - {p},
                                    p: parents[p] | {c},
                                }
                                delta = (
                                    cache.score(c, new_parents[c])
                                    - fam[c]
                                    + cache.score(p, new_parents[p])
                                    - fam[p]
                                )
                                candidates.append(
                                    (delta, _KIND_RANK["reverse"], p, c, new_parents)
                                )
        improving = [cand for cand in candidates if cand[0] > 0.0]
        if not improving:
            break
        best_delta = max(cand[0] for cand in improving)
        best = [cand for cand in improving if cand[0] == best_delta]
        best.sort(key=lambda cand: (cand[1], cand[2], cand[3]))
        if search_cfg.tie_break == "random" and len(best) > 1:
            chosen = best[int(rng.integers(len(best)))]
        else:
            chosen = best[0]
        delta, kind_rank, p, c, new_parents = chosen
        kind = ("add", "delete", "reverse")[kind_rank]
        if kind == "add":
            arcs.add((p, c))
        elif kind == "delete":
            arcs.discard((p, c))
        else:
            arcs.discard((p, c))
            arcs.add((c, p))
        for n, ps in new_parents.items():
            parents[n] = ps
            fam[n] = cache.score(n, ps)
        total += delta
        moves.append(Move(kind, p, c, delta, total))

    return HillClimbResult(Dag(nodes, arcs), total, tuple(moves))


def structural_hamming_distance(a: Dag, b: Dag) -> int:
    """Arc insertions/deletions/reversals needed to turn ``a`` into ``b``."""
    sa, sb = set(a.arcs), set(b.arcs)
    reversals = sum(1 for p, c in sa if (c, p) in sb and (p, c) not in sb)
    extra = len(sa - sb) - reversals
    missing = len(sb - sa) - reversals
    return reversals + extra + missing
