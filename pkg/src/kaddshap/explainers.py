"""Model-agnostic Shapley-value explanation of single predictions.

Three estimators share one pipeline: build a value function (expected model
predictions over coalitions of known attribute values, marginalizing the
rest over background data under the independence assumption), induce a game
by subtracting the all-missing expectation, then either

* ``explain_exact``      -- evaluate every coalition and apply the exact
                            Shapley/interaction formulas,
* ``explain_kernel_shap``-- kernel-weighted least squares on an additive
                            surrogate (attributions only),
* ``explain_kadd``       -- least squares on the k-additive
                            interaction-to-payoff transform (attributions
                            plus interaction indices up to order k).

Estimator-style wrappers (fit on background data, then explain/transform
instances) live at the bottom; they follow scikit-learn conventions.
"""

from __future__ import annotations

import itertools
import warnings as _warnings
from dataclasses import dataclass, field
from typing import Protocol, Sequence, runtime_checkable

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .coalitions import Coalition, binomial, cardinal_lex_masks, enumerate_powerset
from .exceptions import BudgetError
from .games import (
    Game,
    InteractionVector,
    build_transform_matrix,
    game_to_interactions,
    shapley_exact,
)
from .wls import WlsProblem, solve_weighted_ls, weighted_pseudoinverse

DEFAULT_BIG_WEIGHT = 1e6
DEFAULT_BATCH_SIZE = 1024


@runtime_checkable
class BlackBoxModel(Protocol):
    """Anything that maps a batch of instances to one prediction per row."""

    def predict_batch(self, X: np.ndarray) -> np.ndarray: ...


class FunctionModel:
    """Adapter turning a vectorized callable into a BlackBoxModel."""

    def __init__(self, fn):
        self._fn = fn

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(self._fn(np.asarray(X, dtype=float)), dtype=float)


@dataclass(frozen=True, eq=False)
class BackgroundSet:
    """Background rows used to marginalize missing attributes.

    ``q`` rows are drawn (seeded, without replacement) once and reused for
    every coalition of an explanation, so coalition payoffs share their
    background noise.
    """

    samples: np.ndarray
    q: int
    seed: int | None = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 2 or samples.shape[0] == 0:
            raise ValueError("background samples must be a nonempty 2-d array")
        if not 1 <= self.q <= samples.shape[0]:
            raise ValueError(
                f"subsample size q={self.q} must be in [1, {samples.shape[0]}]"
            )

    @classmethod
    def full(cls, samples: np.ndarray) -> "BackgroundSet":
        samples = np.asarray(samples, dtype=float)
        return cls(samples=samples, q=samples.shape[0])

    @property
    def m(self) -> int:
        return self.samples.shape[1]

    def subsample(self) -> np.ndarray:
        if self.q == self.samples.shape[0]:
            return self.samples
        rng = np.random.default_rng(self.seed)
        idx = rng.choice(self.samples.shape[0], size=self.q, replace=False)
        return self.samples[idx]


@dataclass(frozen=True, eq=False)
class CoalitionSample:
    """Ordered distinct coalitions whose payoffs will be evaluated."""

    m: int
    masks: tuple[int, ...]
    seed: int | None = None

    def __post_init__(self):
        full = (1 << self.m) - 1
        if len(set(self.masks)) != len(self.masks):
            raise ValueError("coalition sample contains duplicates")
        if 0 not in self.masks or full not in self.masks:
            raise ValueError(
                "coalition sample must contain the empty and grand coalitions"
            )

    @property
    def budget(self) -> int:
        return len(self.masks)

    def coalitions(self) -> list[Coalition]:
        return [Coalition(mask, self.m) for mask in self.masks]


@dataclass(frozen=True, eq=False)
class ValueFunctionEstimate:
    """Expected predictions for one instance over a coalition set."""

    x_star: np.ndarray
    phi0: float
    entries: dict[int, float]
    model_calls: int

    def values_for(self, masks: Sequence[int]) -> np.ndarray:
        return np.array([self.entries[mask] for mask in masks])


@dataclass(frozen=True, eq=False)
class ExplanationResult:
    """Attributions (and, where available, interaction indices) for one instance."""

    method: str
    phi0: float
    shap_values: np.ndarray
    interactions: InteractionVector | None
    efficiency_gap: float
    budget: int
    seed: int | None
    model_calls: int
    warnings: tuple[str, ...] = field(default=())

    @property
    def prediction(self) -> float:
        """The model output this explanation decomposes (up to the gap)."""
        return self.phi0 + float(np.sum(self.shap_values))


def kernel_weight(m: int, cardinality: int, big_weight: float = DEFAULT_BIG_WEIGHT) -> float:
    """Coalition weight used both for sampling and for the kernel WLS.

    Finite for 0 < |A| < m; the empty and grand coalitions get the big
    constant standing in for an infinite weight.
    """
    if not 0 <= cardinality <= m:
        raise ValueError(f"cardinality must be in [0, {m}], got {cardinality}")
    if cardinality == 0 or cardinality == m:
        return big_weight
    return (m - 1) / (binomial(m, cardinality) * cardinality * (m - cardinality))


def _masks_of_cardinality(m: int, r: int) -> list[int]:
    out = []
    for combo in itertools.combinations(range(m), r):
        mask = 0
        for j in combo:
            mask |= 1 << j
        out.append(mask)
    return out


_ENUMERATION_LIMIT = 1 << 16


def sample_coalitions(m: int, budget: int, seed: int | None = None) -> CoalitionSample:
    """Draw a coalition set of the given size without replacement.

    The empty and grand coalitions are always included (their nominally
    infinite weights would select them almost surely anyway, and both are
    required to pin the intercept). The remaining draws follow the kernel
    weights, renormalized over the not-yet-drawn pool after each draw.
    Equal-cardinality coalitions share a weight, so a draw picks a
    cardinality class first and then a uniformly random fresh member.
    """
    if m < 1:
        raise ValueError("m must be positive")
    if not 2 <= budget <= (1 << m):
        raise BudgetError(
            f"budget must be in [2, 2^{m}] = [2, {1 << m}], got {budget}"
        )
    rng = np.random.default_rng(seed)
    masks: list[int] = [0, (1 << m) - 1]
    remaining = np.array([binomial(m, r) for r in range(m + 1)], dtype=np.int64)
    remaining[0] = remaining[m] = 0
    class_weight = np.array(
        [kernel_weight(m, r) if 0 < r < m else 0.0 for r in range(m + 1)]
    )
    drawn: dict[int, set[int]] = {r: set() for r in range(m + 1)}
    for _ in range(budget - 2):
        pool_weight = class_weight * remaining
        total = pool_weight.sum()
        r = int(rng.choice(m + 1, p=pool_weight / total))
        count = binomial(m, r)
        if count <= _ENUMERATION_LIMIT or remaining[r] < count // 2:
            available = [mk for mk in _masks_of_cardinality(m, r) if mk not in drawn[r]]
            mask = available[int(rng.integers(len(available)))]
        else:
            while True:
                members = rng.choice(m, size=r, replace=False)
                mask = 0
                for j in members:
                    mask |= 1 << int(j)
                if mask not in drawn[r]:
                    break
        drawn[r].add(mask)
        remaining[r] -= 1
        masks.append(mask)
    return CoalitionSample(m=m, masks=tuple(masks), seed=seed)


def full_powerset_sample(m: int) -> CoalitionSample:
    """The whole power set in cardinal-lex order, as a coalition sample."""
    return CoalitionSample(m=m, masks=tuple(enumerate_powerset(m).masks))


def _composite_rows(x_star: np.ndarray, mask: int, background: np.ndarray) -> np.ndarray:
    rows = background.copy()
    for j in range(len(x_star)):
        if mask >> j & 1:
            rows[:, j] = x_star[j]
    return rows


def expected_prediction(
    model: BlackBoxModel,
    x_star: np.ndarray,
    coalition: Coalition | int,
    background: BackgroundSet,
) -> float:
    """Expected model output with the coalition's attributes fixed to the
    instance and the rest marginalized over the background subsample."""
    x_star = np.asarray(x_star, dtype=float)
    mask = coalition.mask if isinstance(coalition, Coalition) else int(coalition)
    m = len(x_star)
    if mask == (1 << m) - 1:
        return float(model.predict_batch(x_star[None, :])[0])
    rows = _composite_rows(x_star, mask, background.subsample())
    return float(np.mean(model.predict_batch(rows)))


def build_value_function(
    model: BlackBoxModel,
    x_star: np.ndarray,
    sample: CoalitionSample,
    background: BackgroundSet,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> ValueFunctionEstimate:
    """Evaluate the value function on every sampled coalition.

    All composite rows are assembled in sample order and flushed through the
    model in fixed-size chunks; the grand coalition is a single evaluation
    of the instance itself.
    """
    x_star = np.asarray(x_star, dtype=float)
    m = len(x_star)
    if sample.m != m:
        raise ValueError(f"sample is for m={sample.m}, instance has m={m}")
    bg = background.subsample()
    q = bg.shape[0]
    full = (1 << m) - 1

    blocks = []
    row_counts = []
    for mask in sample.masks:
        if mask == full:
            blocks.append(x_star[None, :])
            row_counts.append(1)
        else:
            blocks.append(_composite_rows(x_star, mask, bg))
            row_counts.append(q)
    stacked = np.concatenate(blocks, axis=0)

    preds = np.empty(stacked.shape[0])
    for start in range(0, stacked.shape[0], batch_size):
        chunk = stacked[start : start + batch_size]
        out = np.asarray(model.predict_batch(chunk), dtype=float).reshape(-1)
        if out.shape[0] != chunk.shape[0]:
            raise ValueError(
                f"model returned {out.shape[0]} predictions for {chunk.shape[0]} rows"
            )
        preds[start : start + batch_size] = out

    entries: dict[int, float] = {}
    cursor = 0
    for mask, count in zip(sample.masks, row_counts):
        entries[mask] = float(np.mean(preds[cursor : cursor + count]))
        cursor += count
    return ValueFunctionEstimate(
        x_star=x_star,
        phi0=entries[0],
        entries=entries,
        model_calls=stacked.shape[0],
    )


def _efficiency_gap(phi0: float, shap_values: np.ndarray, fx: float) -> float:
    return abs(phi0 + float(np.sum(shap_values)) - fx)


def explain_exact(
    model: BlackBoxModel,
    x_star: np.ndarray,
    background: BackgroundSet,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> ExplanationResult:
    """Exact attributions by enumerating the full power set (2^m evaluations)."""
    x_star = np.asarray(x_star, dtype=float)
    m = len(x_star)
    sample = full_powerset_sample(m)
    vf = build_value_function(model, x_star, sample, background, batch_size)
    payoffs = vf.values_for(sample.masks) - vf.phi0
    game = Game.dense(m, payoffs)
    phi = shapley_exact(game)
    interactions = game_to_interactions(game, k=m)
    fx = vf.entries[(1 << m) - 1]
    return ExplanationResult(
        method="exact",
        phi0=vf.phi0,
        shap_values=phi,
        interactions=interactions,
        efficiency_gap=_efficiency_gap(vf.phi0, phi, fx),
        budget=sample.budget,
        seed=background.seed,
        model_calls=vf.model_calls,
    )


@dataclass(frozen=True, eq=False)
class PrecomputedSolver:
    """Instance-independent WLS factor for a fixed coalition sample.

    Only the evaluation vector changes between instances sharing a sample,
    so the pseudo-inverse of the weighted design is computed once and
    reapplied.
    """

    mode: str  # "kernel" or "kadd"
    m: int
    k: int | None
    masks: tuple[int, ...]
    matrix: np.ndarray
    param_count: int
    rank: int

    def apply(self, targets: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(targets, dtype=float)


def _kernel_design(masks: Sequence[int], m: int) -> np.ndarray:
    z = np.zeros((len(masks), m + 1))
    z[:, 0] = 1.0
    for i, mask in enumerate(masks):
        for j in range(m):
            if mask >> j & 1:
                z[i, j + 1] = 1.0
    return z


def _kernel_weights(masks: Sequence[int], m: int, big_weight: float) -> np.ndarray:
    return np.array(
        [kernel_weight(m, mask.bit_count(), big_weight) for mask in masks]
    )


def _kadd_weights(masks: Sequence[int], m: int, big_weight: float) -> np.ndarray:
    full = (1 << m) - 1
    return np.array(
        [big_weight if mask in (0, full) else 1.0 for mask in masks]
    )


def precompute_solver(
    sample: CoalitionSample,
    m: int,
    k: int | None = None,
    big_weight: float = DEFAULT_BIG_WEIGHT,
) -> PrecomputedSolver:
    """Build the reusable solver matrix for a sample.

    ``k=None`` selects kernel mode (intercept plus one column per
    attribute); an integer k selects the k-additive transform columns.
    """
    if k is None:
        design = _kernel_design(sample.masks, m)
        weights = _kernel_weights(sample.masks, m, big_weight)
        mode = "kernel"
    else:
        design = build_transform_matrix(sample.masks, m, k).values
        weights = _kadd_weights(sample.masks, m, big_weight)
        mode = "kadd"
    matrix, rank = weighted_pseudoinverse(design, weights)
    return PrecomputedSolver(
        mode=mode,
        m=m,
        k=k,
        masks=sample.masks,
        matrix=matrix,
        param_count=design.shape[1],
        rank=rank,
    )


def explain_kernel_shap(
    model: BlackBoxModel,
    x_star: np.ndarray,
    sample: CoalitionSample,
    background: BackgroundSet,
    big_weight: float = DEFAULT_BIG_WEIGHT,
    batch_size: int = DEFAULT_BATCH_SIZE,
    solver: PrecomputedSolver | None = None,
    value_function: ValueFunctionEstimate | None = None,
) -> ExplanationResult:
    """Kernel-weighted least squares over an additive surrogate.

    The intercept column plays the role of the mean prediction; big weights
    on the empty and grand coalitions pin the intercept and the efficiency
    constraint. Interaction indices are not produced by this estimator.
    """
    x_star = np.asarray(x_star, dtype=float)
    m = len(x_star)
    vf = value_function or build_value_function(
        model, x_star, sample, background, batch_size
    )
    evaluations = vf.values_for(sample.masks)

    notes: list[str] = []
    if solver is not None:
        if solver.mode != "kernel" or solver.masks != sample.masks:
            raise ValueError("precomputed solver does not match this sample")
        params = solver.apply(evaluations)
        rank = solver.rank
    else:
        problem = WlsProblem(
            design=_kernel_design(sample.masks, m),
            weights=_kernel_weights(sample.masks, m, big_weight),
            targets=evaluations,
        )
        solution = solve_weighted_ls(problem)
        params = solution.params
        rank = solution.rank
    if sample.budget < m + 2 or rank < m + 1:
        notes.append(
            f"rank warning: {sample.budget} coalitions for {m + 1} parameters "
            f"(rank {rank}); solution is minimum-norm"
        )
    phi0 = float(params[0])
    phi = np.asarray(params[1:], dtype=float)
    fx = vf.entries[(1 << m) - 1]
    return ExplanationResult(
        method="kernel",
        phi0=phi0,
        shap_values=phi,
        interactions=None,
        efficiency_gap=_efficiency_gap(phi0, phi, fx),
        budget=sample.budget,
        seed=sample.seed,
        model_calls=vf.model_calls,
        warnings=tuple(notes),
    )


def explain_kadd(
    model: BlackBoxModel,
    x_star: np.ndarray,
    sample: CoalitionSample,
    background: BackgroundSet,
    k: int = 3,
    big_weight: float = DEFAULT_BIG_WEIGHT,
    batch_size: int = DEFAULT_BATCH_SIZE,
    solver: PrecomputedSolver | None = None,
    value_function: ValueFunctionEstimate | None = None,
) -> ExplanationResult:
    """k-additive estimator: least squares on the interaction-to-payoff
    transform restricted to coalitions of cardinality <= k.

    The mean prediction is fixed to the empty coalition's evaluation before
    solving (it is not a free parameter); the big weight on the empty row
    pins the induced game's zero, the one on the grand row pins efficiency.
    Returns attributions plus all interaction indices up to order k.
    """
    x_star = np.asarray(x_star, dtype=float)
    m = len(x_star)
    if not 1 <= k <= m:
        raise ValueError(f"need 1 <= k <= m, got k={k}, m={m}")
    vf = value_function or build_value_function(
        model, x_star, sample, background, batch_size
    )
    targets = vf.values_for(sample.masks) - vf.phi0

    notes: list[str] = []
    param_count = sum(binomial(m, r) for r in range(k + 1))
    if solver is not None:
        if solver.mode != "kadd" or solver.k != k or solver.masks != sample.masks:
            raise ValueError("precomputed solver does not match this sample")
        params = solver.apply(targets)
        rank = solver.rank
    else:
        problem = WlsProblem(
            design=build_transform_matrix(sample.masks, m, k).values,
            weights=_kadd_weights(sample.masks, m, big_weight),
            targets=targets,
        )
        solution = solve_weighted_ls(problem)
        params = solution.params
        rank = solution.rank
    if sample.budget < param_count or rank < param_count:
        notes.append(
            f"rank warning: {sample.budget} coalitions for {param_count} "
            f"parameters (rank {rank}); solution is minimum-norm"
        )
    interactions = InteractionVector(m=m, k=k, values=np.asarray(params, dtype=float))
    phi = interactions.shapley_values()
    fx = vf.entries[(1 << m) - 1]
    return ExplanationResult(
        method=f"kadd({k})",
        phi0=vf.phi0,
        shap_values=phi,
        interactions=interactions,
        efficiency_gap=_efficiency_gap(vf.phi0, phi, fx),
        budget=sample.budget,
        seed=sample.seed,
        model_calls=vf.model_calls,
        warnings=tuple(notes),
    )


# ---------------------------------------------------------------------------
# scikit-learn style estimator surface
# ---------------------------------------------------------------------------


class _BaseShapExplainer(BaseEstimator):
    """Common fit/explain/transform plumbing for the explainer estimators.

    ``fit`` stores validated background data; ``explain`` returns the full
    result for one instance; ``transform`` maps a matrix of instances to
    their attribution matrix.
    """

    def __init__(self, model=None, *, background_size=None, seed=None,
                 big_weight=DEFAULT_BIG_WEIGHT, batch_size=DEFAULT_BATCH_SIZE):
        self.model = model
        self.background_size = background_size
        self.seed = seed
        self.big_weight = big_weight
        self.batch_size = batch_size

    def fit(self, X, y=None):
        X = check_array(X, ensure_2d=True, dtype=float)
        if self.model is None or not isinstance(self.model, BlackBoxModel):
            raise ValueError("model must expose predict_batch(X)")
        q = self.background_size or X.shape[0]
        q = min(q, X.shape[0])
        seeds = np.random.SeedSequence(self.seed).generate_state(2)
        self.background_ = BackgroundSet(samples=X, q=q, seed=int(seeds[0]))
        self.sampling_seed_ = int(seeds[1])
        self.n_features_in_ = X.shape[1]
        self._prepare()
        return self

    def _prepare(self):
        pass

    def explain(self, x) -> ExplanationResult:
        check_is_fitted(self, "background_")
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.n_features_in_:
            raise ValueError(
                f"instance has {x.shape[0]} attributes, expected {self.n_features_in_}"
            )
        result = self._explain_one(x)
        for note in result.warnings:
            _warnings.warn(note, RuntimeWarning, stacklevel=2)
        return result

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "background_")
        X = check_array(X, ensure_2d=True, dtype=float)
        return np.vstack([self._explain_one(row).shap_values for row in X])

    def _explain_one(self, x) -> ExplanationResult:
        raise NotImplementedError


class ExactShapExplainer(_BaseShapExplainer):
    """Exact attributions; cost grows as 2^m model expectations."""

    def _explain_one(self, x) -> ExplanationResult:
        return explain_exact(
            self.model, x, self.background_, batch_size=self.batch_size
        )


class KernelShapExplainer(_BaseShapExplainer):
    """Kernel-weighted sampling estimator of the exact attributions."""

    def __init__(self, model=None, *, budget=None, background_size=None, seed=None,
                 big_weight=DEFAULT_BIG_WEIGHT, batch_size=DEFAULT_BATCH_SIZE):
        super().__init__(model, background_size=background_size, seed=seed,
                         big_weight=big_weight, batch_size=batch_size)
        self.budget = budget

    def _prepare(self):
        m = self.n_features_in_
        if self.budget is None:
            self.sample_ = full_powerset_sample(m)
        else:
            self.sample_ = sample_coalitions(m, self.budget, self.sampling_seed_)
        self.solver_ = precompute_solver(
            self.sample_, m, k=None, big_weight=self.big_weight
        )

    def _explain_one(self, x) -> ExplanationResult:
        return explain_kernel_shap(
            self.model, x, self.sample_, self.background_,
            big_weight=self.big_weight, batch_size=self.batch_size,
            solver=self.solver_,
        )


class KAdditiveShapExplainer(_BaseShapExplainer):
    """Sampling estimator over a k-additive game; also yields interactions."""

    def __init__(self, model=None, *, k=3, budget=None, background_size=None,
                 seed=None, big_weight=DEFAULT_BIG_WEIGHT,
                 batch_size=DEFAULT_BATCH_SIZE):
        super().__init__(model, background_size=background_size, seed=seed,
                         big_weight=big_weight, batch_size=batch_size)
        self.k = k
        self.budget = budget

    def _prepare(self):
        m = self.n_features_in_
        if self.budget is None:
            self.sample_ = full_powerset_sample(m)
        else:
            self.sample_ = sample_coalitions(m, self.budget, self.sampling_seed_)
        self.solver_ = precompute_solver(
            self.sample_, m, k=self.k, big_weight=self.big_weight
        )

    def _explain_one(self, x) -> ExplanationResult:
        return explain_kadd(
            self.model, x, self.sample_, self.background_, k=self.k,
            big_weight=self.big_weight, batch_size=self.batch_size,
            solver=self.solver_,
        )
