"""Approximation-capacity curves and model selection.

For each inverse temperature beta on a grid, the per-object information rate
is assembled from four log-counts:

    info(beta) = (log_nsigma + logDZ - logZ1 - logZ2) / n

where log_nsigma counts the label vectors sharing the training minimizer's
type, logZ1/logZ2 are the single-sample log partition functions, and logDZ
is the joint (two-sample overlap) log partition function. The approximation
width gamma(beta) is the training Boltzmann mean cost in excess of the
empirical minimum, so sweeping beta sweeps gamma monotonically; the optimal
precision is the grid point of maximal info.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from . import exact as ex
from .core import (
    Assignment,
    Correspondence,
    Dataset,
    Kind,
    build_correspondence,
    log_type_class_size,
    type_distribution,
)
from .costs import DEFAULT_BUDGET, CostFunction, KMeansCost, PairwiseCost, erm_search
from .datagen import dissimilarity_from_vectors
from .rng import derive_seed
from .thermo import (
    GibbsConfig,
    default_beta_grid,
    joint_thermo_integrate,
    thermo_integrate_logZ,
)

__all__ = [
    "CapacityPoint",
    "CapacityCurve",
    "CapacityConfig",
    "CandidateScore",
    "SelectionResult",
    "make_cost",
    "capacity_curve",
    "exact_point_at_gamma",
    "optimal_gamma",
    "select_model",
]

COST_FAMILIES = ("kmeans", "pairwise")


@dataclass(frozen=True)
class CapacityPoint:
    beta: float
    gamma: float
    log_nsigma: float
    log_z1: float
    log_z2: float
    log_dz: float
    info: float
    n: int

    def __post_init__(self):
        expected = (self.log_nsigma + self.log_dz - self.log_z1 - self.log_z2) / self.n
        if abs(self.info - expected) > 1e-9:
            raise ValueError("info is inconsistent with its components")


@dataclass(frozen=True)
class CapacityCurve:
    points: tuple[CapacityPoint, ...]
    engine: str
    cost_name: str
    n: int
    k: int

    def __post_init__(self):
        if not self.points:
            raise ValueError("curve must contain at least one point")
        gammas = [p.gamma for p in self.points]
        if any(g2 > g1 + 1e-9 for g1, g2 in zip(gammas, gammas[1:])):
            raise ValueError("gamma must be nonincreasing along the beta ordering")

    @property
    def best(self) -> CapacityPoint:
        """Info-maximizing point; ties resolve toward smaller gamma."""
        return min(self.points, key=lambda p: (-p.info, p.gamma))

    @property
    def total_nats(self) -> float:
        return self.best.info * self.n

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write("beta,gamma,logZ1,logZ2,logDZ,log_nsigma,info\n")
            for p in self.points:
                row = (p.beta, p.gamma, p.log_z1, p.log_z2, p.log_dz, p.log_nsigma, p.info)
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


@dataclass(frozen=True)
class CapacityConfig:
    """Grid, budget and sampler settings shared by both engines."""

    beta_grid: tuple[float, ...] | None = None
    grid_points: int = 25
    budget: int = DEFAULT_BUDGET
    nsigma: str = "multinomial"  # or "asymptotic": exp(n H) in the exponent
    seed: int = 0
    chains: int = 4
    sweeps_burnin: int = 100
    sweeps_measure: int = 400
    restarts: int = 50

    def __post_init__(self):
        if self.nsigma not in ("multinomial", "asymptotic"):
            raise ValueError("nsigma must be 'multinomial' or 'asymptotic'")


def make_cost(cost_family: str, data: Dataset, k: int) -> CostFunction:
    """Bind a named cost family to a dataset; pairwise costs on vector data
    use squared Euclidean dissimilarities."""
    if cost_family == "kmeans":
        return KMeansCost(data, k)
    if cost_family == "pairwise":
        if data.kind is Kind.VECTORS:
            data = dissimilarity_from_vectors(data)
        return PairwiseCost(data, k)
    raise ValueError(f"unknown cost family {cost_family!r}; expected one of {COST_FAMILIES}")


def _resolve_corr(train: Dataset, test: Dataset, corr: Correspondence | None) -> Correspondence:
    return corr if corr is not None else build_correspondence(train, test)


def _log_nsigma_of(minimizer: Assignment, nsigma: str) -> float:
    return log_type_class_size(type_distribution(minimizer), asymptotic=nsigma == "asymptotic")


class _ExactEngine:
    """Tables and reductions shared by the exact curve and point queries."""

    def __init__(self, cost1, cost2, corr, budget):
        self.table1 = ex.enumerate_costs(cost1, budget=budget)
        self.table2 = ex.enumerate_costs(cost2, budget=budget)
        self.joint = ex.joint_cost_table(self.table1, cost2, corr, budget=budget)
        self.joint_min = float(self.joint.min())
        self.n, self.k = cost1.n, cost1.k
        self.minimizer = Assignment(self.table1.minimizer_labels(), cost1.k)

    def log_z(self, table, beta: float) -> float:
        return ex.exact_log_partition(table, beta)

    def log_dz(self, beta: float) -> float:
        if beta == 0.0:
            return self.n * float(np.log(self.k))
        return ex.log_partition_of_costs(self.joint, self.joint_min, beta)

    def gamma(self, beta: float) -> float:
        return ex.exact_mean_cost(self.table1, beta) - self.table1.r_min

    def point(self, beta: float, log_ns: float) -> CapacityPoint:
        lz1 = self.log_z(self.table1, beta)
        lz2 = self.log_z(self.table2, beta)
        ldz = self.log_dz(beta)
        info = (log_ns + ldz - lz1 - lz2) / self.n
        return CapacityPoint(beta=float(beta), gamma=self.gamma(beta), log_nsigma=log_ns,
                             log_z1=lz1, log_z2=lz2, log_dz=ldz, info=info, n=self.n)

    def auto_grid(self, points: int) -> tuple[float, ...]:
        """Geometric beta grid spanning mean-cost excess from ~90% down to
        ~0.1% of the full cost range."""
        span = self.gamma(0.0)
        if span <= 0.0:  # flat landscape
            return (0.0, *np.geomspace(0.1, 10.0, points - 1))

        def solve_excess(target: float) -> float:
            lo, hi = 0.0, 1.0
            while self.gamma(hi) > target:
                hi *= 2.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if self.gamma(mid) > target:
                    lo = mid
                else:
                    hi = mid
            return hi

        beta_lo = solve_excess(0.9 * span)
        beta_hi = solve_excess(1e-3 * span)
        return (0.0, *np.geomspace(beta_lo, beta_hi, points - 1))


def _pick_engine(engine: str, n: int, k: int, budget: int) -> str:
    if engine == "auto":
        return "exact" if k**n <= budget else "sampled"
    if engine not in ("exact", "sampled"):
        raise ValueError(f"unknown engine {engine!r}")
    return engine


def capacity_curve(
    train: Dataset,
    test: Dataset,
    cost_family: str,
    k: int,
    engine: str = "auto",
    cfg: CapacityConfig = CapacityConfig(),
    corr: Correspondence | None = None,
) -> CapacityCurve:
    """Information rate vs beta (equivalently gamma) for one model.

    engine="exact" enumerates the hypothesis class (k^n within budget);
    engine="sampled" estimates all three log partition functions by
    thermodynamic integration of Gibbs-sampled mean costs.
    """
    if train.n != test.n:
        raise ValueError("samples must share n")
    cost1 = make_cost(cost_family, train, k)
    cost2 = make_cost(cost_family, test, k)
    corr = _resolve_corr(train, test, corr)
    mode = _pick_engine(engine, train.n, k, cfg.budget)

    if mode == "exact":
        eng = _ExactEngine(cost1, cost2, corr, cfg.budget)
        log_ns = _log_nsigma_of(eng.minimizer, cfg.nsigma)
        grid = cfg.beta_grid or eng.auto_grid(cfg.grid_points)
        points = tuple(eng.point(float(b), log_ns) for b in grid)
        return CapacityCurve(points=points, engine="exact", cost_name=cost_family,
                             n=train.n, k=k)

    minimizer, r_min = erm_search(cost1, "multistart", restarts=cfg.restarts, seed=cfg.seed)
    log_ns = _log_nsigma_of(minimizer, cfg.nsigma)
    grid = cfg.beta_grid or default_beta_grid(cost1, points=cfg.grid_points, seed=cfg.seed)

    def gibbs(salt: int) -> GibbsConfig:
        return GibbsConfig(beta_grid=grid, sweeps_burnin=cfg.sweeps_burnin,
                           sweeps_measure=cfg.sweeps_measure, chains=cfg.chains,
                           seed=derive_seed(cfg.seed, salt))

    curve1 = thermo_integrate_logZ(cost1, gibbs(1))
    curve2 = thermo_integrate_logZ(cost2, gibbs(2))
    joint = joint_thermo_integrate(cost1, cost2, corr, gibbs(3))
    gammas = np.maximum(curve1.smoothed_mean_cost() - r_min, 0.0)
    points = []
    for i, beta in enumerate(grid):
        info = (log_ns + joint.log_z[i] - curve1.log_z[i] - curve2.log_z[i]) / train.n
        points.append(CapacityPoint(
            beta=float(beta), gamma=float(gammas[i]), log_nsigma=log_ns,
            log_z1=float(curve1.log_z[i]), log_z2=float(curve2.log_z[i]),
            log_dz=float(joint.log_z[i]), info=float(info), n=train.n,
        ))
    return CapacityCurve(points=tuple(points), engine="sampled", cost_name=cost_family,
                         n=train.n, k=k)


def exact_point_at_gamma(
    train: Dataset,
    test: Dataset,
    cost_family: str,
    k: int,
    gamma: float,
    cfg: CapacityConfig = CapacityConfig(),
    corr: Correspondence | None = None,
) -> CapacityPoint:
    """Exact-engine capacity point at a prescribed gamma: beta is calibrated
    by bisection so the training Boltzmann mean cost equals r_min + gamma."""
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    cost1 = make_cost(cost_family, train, k)
    cost2 = make_cost(cost_family, test, k)
    eng = _ExactEngine(cost1, cost2, _resolve_corr(train, test, corr), cfg.budget)
    log_ns = _log_nsigma_of(eng.minimizer, cfg.nsigma)
    span = eng.gamma(0.0)
    if gamma >= span or span <= 0.0:
        return eng.point(0.0, log_ns)
    lo, hi = 0.0, 1.0
    while eng.gamma(hi) > gamma:
        hi *= 2.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if eng.gamma(mid) > gamma:
            lo = mid
        else:
            hi = mid
    return eng.point(hi, log_ns)


def optimal_gamma(curve: CapacityCurve) -> tuple[float, float, float]:
    """(gamma_star, beta_star, info_star) at the curve's argmax."""
    p = curve.best
    return p.gamma, p.beta, p.info


@dataclass(frozen=True)
class CandidateScore:
    cost_family: str
    k: int
    info_star: float
    gamma_star: float
    beta_star: float
    curve: CapacityCurve | None = None

    def summary(self) -> dict:
        return {
            "candidate": {"cost": self.cost_family, "k": self.k},
            "info_star": self.info_star,
            "gamma_star": self.gamma_star,
            "beta_star": self.beta_star,
        }


@dataclass(frozen=True)
class SelectionResult:
    ranking: tuple[CandidateScore, ...]
    failures: tuple[tuple[str, int, str], ...]  # (cost_family, k, message)

    @property
    def best(self) -> CandidateScore:
        if not self.ranking:
            raise ValueError("no candidate succeeded")
        return self.ranking[0]


def select_model(
    candidates: list[tuple[str, int]],
    train: Dataset,
    test: Dataset,
    engine: str = "auto",
    cfg: CapacityConfig = CapacityConfig(),
    corr: Correspondence | None = None,
) -> SelectionResult:
    """Rank (cost_family, k) candidates by their approximation capacity.

    Failing candidates are recorded and excluded; ties keep candidate order.
    """
    if not candidates:
        raise ValueError("candidate list is empty")
    scores: list[CandidateScore] = []
    failures: list[tuple[str, int, str]] = []
    for ci, (family, k) in enumerate(candidates):
        cand_cfg = dataclasses.replace(cfg, seed=derive_seed(cfg.seed, ci))
        try:
            curve = capacity_curve(train, test, family, k, engine=engine,
                                   cfg=cand_cfg, corr=corr)
        except Exception as e:  # noqa: BLE001 - candidate failures must not abort the run
            failures.append((family, k, str(e)))
            continue
        g, b, i = optimal_gamma(curve)
        scores.append(CandidateScore(cost_family=family, k=k, info_star=i,
                                     gamma_star=g, beta_star=b, curve=curve))
    ranking = tuple(sorted(scores, key=lambda s: -s.info_star))
    return SelectionResult(ranking=ranking, failures=tuple(failures))
