"""Dirichlet-multinomial parameter learning over a fixed structure.

Priors are built from per-variable marginal distributions scaled by a single
equivalent-sample-size weight alpha: every parent configuration of a node
starts from the same hyperparameter vector alpha * marginal, so the prior
mean of each conditional equals the marginal. Fitting adds observed counts
cell by cell (conjugacy), which makes year-by-year sequential refits exactly
equivalent to a one-shot fit of the pooled data. Posterior objects are
immutable snapshots; every fit returns a new one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import beta as beta_dist

from ._kernels import family_counts, mixed_radix_strides
from .data import Dataset
from .model import BayesianNetwork, Cpt, Dag, NetworkSchema

#: States with (rounded) zero marginal mass get this floor before scaling by
#: alpha, keeping every Dirichlet proper for states unseen in early years.
MARGINAL_FLOOR = 1e-6


@dataclass(frozen=True)
class PriorSpec:
    """Equivalent-sample-size weight plus per-variable prior means.

    ``marginal_means`` vectors are floored at :data:`MARGINAL_FLOOR` and
    renormalized at construction, so they sum to 1 exactly even when the
    input carries table rounding.
    """

    alpha: float
    marginal_means: dict[str, np.ndarray]

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        cleaned: dict[str, np.ndarray] = {}
        for name, vec in self.marginal_means.items():
            v = np.ascontiguousarray(vec, dtype=np.float64)
            if v.ndim != 1 or v.size < 2:
                raise ValueError(f"marginal for {name!r} must be a vector of >= 2 states")
            if np.any(v < 0):
                raise ValueError(f"marginal for {name!r} has negative mass")
            total = v.sum()
            if abs(total - 1.0) > 1e-3:
                raise ValueError(f"marginal for {name!r} sums to {total!r}, not 1")
            v = np.maximum(v, MARGINAL_FLOOR)
            v = v / v.sum()
            v.setflags(write=False)
            cleaned[name] = v
        object.__setattr__(self, "marginal_means", cleaned)


def build_prior(marginals: Mapping[str, Sequence[float]], alpha: float) -> PriorSpec:
    """Construct the scaled-marginal prior specification."""
    return PriorSpec(alpha=float(alpha), marginal_means={k: np.asarray(v) for k, v in marginals.items()})


@dataclass(frozen=True)
class ParameterPosterior:
    """Per-node, per-parent-configuration Dirichlet hyperparameter tables.

    The prior part (floats) and the absorbed observation counts (integers)
    are kept separate; the effective hyperparameters are their sum, computed
    once at construction. Keeping counts in integers makes any sequential
    decomposition of a fit bit-identical to the one-shot fit of the pooled
    data, not just close.
    """

    schema: NetworkSchema
    dag: Dag
    prior_hyper: dict[str, np.ndarray]  # node -> (Q, K) floats, all > 0
    alpha: float
    provenance: tuple[str, ...] = ()
    counts: dict[str, np.ndarray] | None = None  # node -> (Q, K) int64

    def __post_init__(self):
        if set(self.prior_hyper) != set(self.schema.names):
            raise ValueError("hyperparameter tables do not cover the schema")
        frozen_prior: dict[str, np.ndarray] = {}
        frozen_counts: dict[str, np.ndarray] = {}
        hyper: dict[str, np.ndarray] = {}
        for name in self.schema.names:
            h = np.ascontiguousarray(self.prior_hyper[name], dtype=np.float64)
            parents = self.dag.parents(name)
            q = int(np.prod([self.schema.cardinality(p) for p in parents])) if parents else 1
            k = self.schema.cardinality(name)
            if h.shape != (q, k):
                raise ValueError(
                    f"hyperparameters for {name!r} have shape {h.shape}, expected {(q, k)}"
                )
            if np.any(h <= 0):
                raise ValueError(f"nonpositive hyperparameter in {name!r}")
            if self.counts is None:
                m = np.zeros((q, k), dtype=np.int64)
            else:
                m = np.ascontiguousarray(self.counts[name], dtype=np.int64)
                if m.shape != (q, k):
                    raise ValueError(f"counts for {name!r} have shape {m.shape}, expected {(q, k)}")
                if np.any(m < 0):
                    raise ValueError(f"negative count in {name!r}")
            total = h + m
            for arr in (h, m, total):
                arr.setflags(write=False)
            frozen_prior[name] = h
            frozen_counts[name] = m
            hyper[name] = total
        object.__setattr__(self, "prior_hyper", frozen_prior)
        object.__setattr__(self, "counts", frozen_counts)
        object.__setattr__(self, "_hyper", hyper)
        object.__setattr__(self, "provenance", tuple(self.provenance))

    @property
    def hyper(self) -> dict[str, np.ndarray]:
        """Effective Dirichlet hyperparameters: prior + absorbed counts."""
        return self._hyper

    def parent_row(self, node: str, parent_states: Sequence[int]) -> int:
        parents = self.dag.parents(node)
        if len(parent_states) != len(parents):
            raise ValueError(f"{node!r} has {len(parents)} parents")
        cards = np.array([self.schema.cardinality(p) for p in parents], dtype=np.int64)
        if len(parents) == 0:
            return 0
        return int(np.asarray(parent_states, dtype=np.int64) @ mixed_radix_strides(cards))


def initial_posterior(prior: PriorSpec, schema: NetworkSchema, dag: Dag) -> ParameterPosterior:
    """Expand a PriorSpec to posterior shape (zero observations absorbed)."""
    missing = [n for n in schema.names if n not in prior.marginal_means]
    if missing:
        raise ValueError(f"prior lacks marginals for {missing}")
    hyper = {}
    for name in schema.names:
        parents = dag.parents(name)
        q = int(np.prod([schema.cardinality(p) for p in parents])) if parents else 1
        base = prior.alpha * prior.marginal_means[name]
        hyper[name] = np.tile(base, (q, 1))
    return ParameterPosterior(schema, dag, hyper, prior.alpha, provenance=())


def fit(posterior: ParameterPosterior, dataset: Dataset) -> ParameterPosterior:
    """Absorb a complete dataset: hyperparameter += observed count, cellwise."""
    if dataset.schema != posterior.schema:
        raise ValueError("dataset schema does not match the posterior")
    if not dataset.is_complete():
        raise ValueError("dataset has missing values; fit requires complete cases")
    schema = posterior.schema
    counts = {}
    for name in schema.names:
        parents = posterior.dag.parents(name)
        cols = [schema.index(p) for p in parents] + [schema.index(name)]
        observed = family_counts(dataset.codes, cols, schema.cardinalities[cols])
        counts[name] = posterior.counts[name] + observed
    return ParameterPosterior(
        schema,
        posterior.dag,
        posterior.prior_hyper,
        posterior.alpha,
        provenance=posterior.provenance + (dataset.name,),
        counts=counts,
    )


def sequential_fit(
    prior: PriorSpec, schema: NetworkSchema, dag: Dag, yearly: Sequence[Dataset]
) -> list[ParameterPosterior]:
    """Chain of fits where each year's posterior is the next year's prior.

    Returns every intermediate posterior (one per dataset, in order) so the
    per-year evolution of any conditional can be tabulated.
    """
    posterior = initial_posterior(prior, schema, dag)
    out: list[ParameterPosterior] = []
    for ds in yearly:
        posterior = fit(posterior, ds)
        out.append(posterior)
    return out


def posterior_mean_network(posterior: ParameterPosterior) -> BayesianNetwork:
    """Point-estimate network: each CPT row is its normalized hyperparameters."""
    cpts = []
    for name in posterior.schema.names:
        h = posterior.hyper[name]
        cpts.append(Cpt(name, posterior.dag.parents(name), h / h.sum(axis=1, keepdims=True)))
    return BayesianNetwork(posterior.schema, posterior.dag, cpts)


def sample_parameters(posterior: ParameterPosterior, seed) -> dict[str, np.ndarray]:
    """One full parameter draw: every CPT row sampled from its Dirichlet.

    Uses the gamma representation so whole (Q, K) tables draw in one call.
    Deterministic given the seed; rows renormalize to sum to 1 exactly.
    """
    rng = np.random.default_rng(seed)
    draw = {}
    for name in posterior.schema.names:
        g = rng.gamma(shape=posterior.hyper[name])
        g = np.maximum(g, 1e-300)  # gamma can underflow for tiny shapes
        draw[name] = g / g.sum(axis=1, keepdims=True)
    return draw


def network_from_draw(posterior: ParameterPosterior, draw: Mapping[str, np.ndarray]) -> BayesianNetwork:
    cpts = [Cpt(n, posterior.dag.parents(n), draw[n]) for n in posterior.schema.names]
    return BayesianNetwork(posterior.schema, posterior.dag, cpts)


def credible_interval(
    posterior: ParameterPosterior,
    node: str,
    parent_states: Sequence[int] = (),
    level: float = 0.9,
) -> np.ndarray:
    """Equal-tailed marginal interval for each state's probability.

    The Dirichlet marginal of state k is Beta(a_k, a_total - a_k); returns an
    array of shape (K, 2) with [lo, hi] rows bracketing the posterior mean.
    """
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    row = posterior.hyper[node][posterior.parent_row(node, parent_states)]
    total = row.sum()
    tail = (1.0 - level) / 2.0
    lo = beta_dist.ppf(tail, row, total - row)
    hi = beta_dist.ppf(1.0 - tail, row, total - row)
    return np.column_stack([lo, hi])
