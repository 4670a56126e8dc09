"""Interdependent and independent belief diffusion on a fixed social network.

Agents hold beliefs (edges) in a personal knowledge graph over a shared set
of concepts. In the interdependent condition an agent is susceptible to a
belief whose endpoints are at most two steps apart in its own graph; in the
independent condition susceptibility is a fixed, exogenously drawn set.
Adoption needs susceptibility plus one neighbour who currently holds the
belief.
"""
from __future__ import annotations

import copy
import logging
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import kernels
from .graphs import (
    Belief,
    ConfigError,
    KnowledgeGraph,
    SocialNetwork,
    bounded_distance,
    caveman_ring,
    check_caveman_instance,
    dodecahedron,
    gnm_random_connected,
    load_edgelist,
    n_pairs,
    random_knowledge_graph,
)
from .measures import MeasurementRecord, Measurer

log = logging.getLogger(__name__)

INTERDEPENDENT = "interdependent"
INDEPENDENT = "independent"
NETWORK_KINDS = ("gnm", "dodecahedron", "caveman", "edgelist")


class MatchProbabilityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SimConfig:
    n_agents: int = 60
    degree_avg: float = 3.0
    n_concepts: int = 25
    n_beliefs_per_agent: int = 25
    n_steps: int = 10
    t_match: int = 0
    network_kind: str = "gnm"
    edgelist: str | None = None
    seed: int = 0
    threshold: float = 0.1
    percentiles: tuple[float, float] = (0.05, 0.95)

    def __post_init__(self):
        if self.network_kind not in NETWORK_KINDS:
            raise ConfigError(f"network_kind must be one of {NETWORK_KINDS}, got {self.network_kind!r}")
        if self.network_kind == "edgelist" and not self.edgelist:
            raise ConfigError("network_kind 'edgelist' needs an edgelist path")
        if self.n_steps < 0:
            raise ConfigError("n_steps must be non-negative")
        # t_match == n_steps is allowed only for the degenerate zero-step run
        if not (0 <= self.t_match < self.n_steps or self.t_match == self.n_steps == 0):
            raise ConfigError(f"t_match must satisfy 0 <= t_match < n_steps, got {self.t_match}, {self.n_steps}")
        if self.n_concepts < 2:
            raise ConfigError("need at least 2 concepts")
        if not 0 <= self.n_beliefs_per_agent <= n_pairs(self.n_concepts):
            raise ConfigError(
                f"n_beliefs_per_agent={self.n_beliefs_per_agent} exceeds the "
                f"{n_pairs(self.n_concepts)} beliefs on {self.n_concepts} concepts"
            )
        if not 0 < self.threshold <= 1:
            raise ConfigError(f"threshold must be in (0, 1], got {self.threshold}")
        lo, hi = self.percentiles
        if not 0 <= lo < hi <= 1:
            raise ConfigError(f"percentiles must satisfy 0 <= lo < hi <= 1, got {self.percentiles}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")


@dataclass
class AgentState:
    """One agent's mind, and in the independent condition its susceptibility set.

    Both graphs are views into the owning population's arrays.
    """

    mind: KnowledgeGraph
    susceptibility: KnowledgeGraph | None = None


@dataclass
class Population:
    """Social network plus every agent's knowledge graph.

    ``minds`` has shape ``(n_agents, n_concepts, n_concepts)``;
    ``susceptibility`` has the same shape in the independent condition and is
    None in the interdependent one. ``universe`` is the sorted ``(U, 2)`` array
    of beliefs held by anyone at t=0.
    """

    network: SocialNetwork
    minds: np.ndarray
    universe: np.ndarray
    susceptibility: np.ndarray | None = None

    @property
    def condition(self) -> str:
        return INDEPENDENT if self.susceptibility is not None else INTERDEPENDENT

    @property
    def n_agents(self) -> int:
        return self.minds.shape[0]

    @property
    def n_concepts(self) -> int:
        return self.minds.shape[1]

    def state(self, agent: int) -> AgentState:
        s = None
        if self.susceptibility is not None:
            s = KnowledgeGraph.from_adjacency(self.susceptibility[agent])
        return AgentState(KnowledgeGraph.from_adjacency(self.minds[agent]), s)

    def beliefs(self) -> list[Belief]:
        return [Belief(int(a), int(b)) for a, b in self.universe]

    def copy(self) -> "Population":
        return copy.deepcopy(self)

    @classmethod
    def from_minds(cls, network: SocialNetwork, minds: list[KnowledgeGraph] | np.ndarray,
                   susceptibility=None) -> "Population":
        if not isinstance(minds, np.ndarray):
            minds = np.stack([m.adj for m in minds])
        minds = np.ascontiguousarray(minds, dtype=np.bool_)
        if minds.shape[0] != network.n_agents:
            raise ConfigError(f"{minds.shape[0]} minds for {network.n_agents} agents")
        if susceptibility is not None and not isinstance(susceptibility, np.ndarray):
            susceptibility = np.stack([s.adj for s in susceptibility])
        return cls(network, minds, belief_universe(minds), susceptibility)


def belief_universe(minds: np.ndarray) -> np.ndarray:
    """Sorted array of every belief any agent holds."""
    held = np.triu(minds.any(axis=0), 1)
    return np.argwhere(held).astype(np.int64)


def build_network(config: SimConfig, rng: np.random.Generator) -> SocialNetwork:
    kind = config.network_kind
    if kind == "gnm":
        return gnm_random_connected(config.n_agents, config.degree_avg, rng)
    if kind == "dodecahedron":
        return dodecahedron()
    if kind == "caveman":
        net = caveman_ring()
        if not check_caveman_instance(net):
            raise ConfigError("generated caveman network fails its degree/clustering/path-length checks; pass --edgelist")
        return net
    return load_edgelist(Path(config.edgelist))


def initial_population(config: SimConfig, rng: np.random.Generator) -> Population:
    network = build_network(config, rng)
    minds = [random_knowledge_graph(config.n_concepts, config.n_beliefs_per_agent, rng)
             for _ in range(network.n_agents)]
    return Population.from_minds(network, minds)


def is_susceptible(state: AgentState, belief) -> bool:
    lo, hi = belief
    if state.susceptibility is not None:
        return state.susceptibility.has(lo, hi)
    return bounded_distance(state.mind, lo, hi, 2) is not None


def is_exposed(population: Population, agent: int, belief) -> bool:
    lo, hi = belief
    nbrs = population.network.neighbors(agent)
    return bool(population.minds[nbrs, lo, hi].any())


def will_adopt(population: Population, agent: int, belief) -> bool:
    return is_susceptible(population.state(agent), belief) and is_exposed(population, agent, belief)


def _draw_orders(population: Population, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    n, u = population.n_agents, population.universe.shape[0]
    agent_order = rng.permutation(n).astype(np.int64)
    belief_perms = rng.permuted(np.tile(np.arange(u, dtype=np.int64), (n, 1)), axis=1)
    return agent_order, belief_perms


def sweep(population: Population, rng: np.random.Generator) -> int:
    """Advance one time step in place; return the number of newly adopted beliefs.

    Agents go in a random order; each checks every universe belief once, in
    its own random order, against the live state of itself and its
    neighbours.
    """
    agent_order, belief_perms = _draw_orders(population, rng)
    if population.universe.shape[0] == 0:
        return 0
    susc = population.susceptibility
    use_susc = susc is not None
    if susc is None:
        susc = np.zeros((0, 0, 0), dtype=np.bool_)
    net = population.network
    return int(kernels.sweep(
        population.minds, susc, use_susc, net.indptr, net.indices,
        population.universe[:, 0].copy(), population.universe[:, 1].copy(),
        agent_order, belief_perms,
    ))


def simulate(population: Population, n_steps: int, rng: np.random.Generator,
             measurer: Measurer) -> list[MeasurementRecord]:
    """Measure, then alternate sweep and measure ``n_steps`` times."""
    records = [measurer(population)]
    for _ in range(n_steps):
        sweep(population, rng)
        records.append(measurer(population))
    return records


def compute_match_probability(inter_records, t_match: int, initial_adopted_fraction: float) -> float:
    """Per-belief susceptibility probability for non-held beliefs in the independent condition.

    Chosen so that held beliefs plus Bernoulli(p) over the non-held ones give
    the interdependent run's susceptible fraction at ``t_match`` in
    expectation.
    """
    if not 0 <= t_match < len(inter_records):
        raise IndexError(f"no record for step {t_match} (have {len(inter_records)})")
    a0 = initial_adopted_fraction
    if not 0 <= a0 < 1:
        raise ValueError(f"initial adopted fraction must be in [0, 1), got {a0}")
    target = inter_records[t_match].frac_susceptible
    p = (target - a0) / (1 - a0)
    if not 0 <= p <= 1:
        warnings.warn(f"match probability {p} clamped to [0, 1]", MatchProbabilityWarning, stacklevel=2)
        p = min(1.0, max(0.0, p))
    return p


def assign_independent_susceptibility(population0: Population, p: float, rng: np.random.Generator) -> Population:
    """Copy of ``population0`` where each agent is susceptible to its held beliefs plus a Bernoulli(p) draw of the rest."""
    if not 0 <= p <= 1:
        raise ValueError(f"p must be in [0, 1], got {p}")
    pop = population0.copy()
    n, c = pop.n_agents, pop.n_concepts
    lo, hi = np.triu_indices(c, 1)
    susc = np.zeros_like(pop.minds)
    for agent in range(n):
        held = pop.minds[agent, lo, hi]
        draw = rng.random(lo.shape[0]) < p
        pick = held | draw
        susc[agent, lo[pick], hi[pick]] = True
        susc[agent, hi[pick], lo[pick]] = True
    pop.susceptibility = susc
    return pop


@dataclass(frozen=True)
class BeliefCounts:
    """Per-belief counts over the universe for one condition of one run."""

    initial_adopted: np.ndarray
    initial_susceptible: np.ndarray
    final_adoption: np.ndarray = field(repr=False)

    @property
    def final_popularity(self) -> np.ndarray:
        return self.final_adoption.sum(axis=0)


@dataclass(frozen=True)
class MatchedResult:
    config: SimConfig
    seed: int
    inter: list[MeasurementRecord]
    indep: list[MeasurementRecord]
    match_probability: float
    universe: np.ndarray = field(repr=False)
    inter_counts: BeliefCounts = field(repr=False)
    indep_counts: BeliefCounts = field(repr=False)

    @property
    def steps(self) -> range:
        return range(len(self.inter))


def _counts(measurer: Measurer, population: Population) -> BeliefCounts:
    lo, hi = population.universe[:, 0], population.universe[:, 1]
    return BeliefCounts(measurer.initial_adopted, measurer.initial_susceptible, population.minds[:, lo, hi])


def run_matched_pair(config: SimConfig, seed: int | None = None) -> MatchedResult:
    """Interdependent run and its matched independent control from one shared initial condition.

    The independent susceptibility is calibrated to the interdependent
    susceptible fraction at ``config.t_match``.
    """
    seed = config.seed if seed is None else seed
    setup, inter_dyn, inter_meas, assign, indep_dyn, indep_meas = (
        np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(6)
    )
    q_low, q_high = config.percentiles
    pop0 = initial_population(config, setup)

    inter = pop0.copy()
    m_inter = Measurer(pop0.universe, inter_meas, config.threshold, q_low, q_high)
    inter_records = simulate(inter, config.n_steps, inter_dyn, m_inter)

    a0 = inter_records[0].frac_adopting
    p = compute_match_probability(inter_records, config.t_match, a0)
    indep = assign_independent_susceptibility(pop0, p, assign)
    m_indep = Measurer(pop0.universe, indep_meas, config.threshold, q_low, q_high)
    indep_records = simulate(indep, config.n_steps, indep_dyn, m_indep)

    return MatchedResult(
        config=config,
        seed=seed,
        inter=inter_records,
        indep=indep_records,
        match_probability=p,
        universe=pop0.universe,
        inter_counts=_counts(m_inter, inter),
        indep_counts=_counts(m_indep, indep),
    )


def with_overrides(config: SimConfig, **kw) -> SimConfig:
    return replace(config, **kw)
