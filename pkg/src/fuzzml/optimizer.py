"""Alternating trainer for the robust soft-label fuzzy multilabel model.

The model couples three pieces: a soft-label transform (an L x L matrix
mixing the original labels into soft labels), a consequent matrix mapping
fuzzy features to soft labels, and a correlation penalty tying soft-label
similarity to consequent similarity. The training objective is

    ||(M Y - C Xg)^T||_{2,1} + alpha ||C||_F^2
    + beta ||(Y - M Y)^T||_{2,1} + 2 gamma tr(Y^T M^T Lap M Y)

where M is the mixing transform, C the consequents, Xg the fuzzy feature
matrix, Y the binary label matrix and Lap the correlation Laplacian built
from C. The column-wise L2,1 terms are handled by iterative reweighting:
each outer iteration freezes the inverse column-norm weights, which turns
both subproblems into Sylvester equations solved exactly. Both solves read
the same pre-update (mixing, consequents) snapshot before committing.
"""

import math
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, NormStats, normalize_features
from .rules import RuleBase, fit_antecedents, fuzzy_feature_matrix, DEFAULT_WIDTH_FLOOR
from .sylvester import (
    KRON_GUARD,
    SingularProblemError,
    least_norm_solve,
    solve_sylvester,
)

__all__ = [
    "NumericalError",
    "TrainConfig",
    "LossBreakdown",
    "TrainTrace",
    "ModelParams",
    "ReweightDiagonals",
    "CorrelationLaplacian",
    "l21_columns",
    "objective",
    "stopping_loss",
    "reweight_diagonals",
    "correlation_laplacian",
    "gram_ridge",
    "update_consequents",
    "update_mixing",
    "train",
]

# Auto stopping margin: this fraction of the first iteration's loss magnitude.
AUTO_MARGIN_SCALE = 1e-5


class NumericalError(RuntimeError):
    """Raised when training produces non-finite values."""


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters and numerical guards for one training run.

    ``min_loss_margin=None`` selects the automatic margin
    ``1e-5 * |loss_1|`` fixed after the first iteration. ``ridge_y`` is a
    relative coefficient: the label Gram matrix receives a diagonal shift
    of ``ridge_y * trace(Y Y^T) / L`` before inversion, which keeps the
    mixing subproblem well posed when a label never occurs or two label
    rows coincide.
    """

    alpha: float = 0.1
    beta: float = 10.0
    gamma: float = 0.001
    n_rules: int = 3
    max_iters: int = 50
    min_loss_margin: float | None = None
    epsilon_row: float = 1e-8
    ridge_y: float = 1e-6
    width_floor: float = DEFAULT_WIDTH_FLOOR
    tau: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0 or self.gamma < 0:
            raise ValueError("alpha, beta and gamma must be nonnegative")
        if self.n_rules < 1:
            raise ValueError("n_rules must be at least 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.min_loss_margin is not None and self.min_loss_margin < 0:
            raise ValueError("min_loss_margin must be nonnegative")
        if self.epsilon_row <= 0:
            raise ValueError("epsilon_row must be positive")
        if self.ridge_y < 0:
            raise ValueError("ridge_y must be nonnegative")
        if self.width_floor <= 0:
            raise ValueError("width_floor must be positive")
        if not math.isfinite(self.tau):
            raise ValueError("tau must be finite")


@dataclass(frozen=True)
class LossBreakdown:
    """One evaluation of the training objective, term by term."""

    fit: float
    ridge: float
    soft: float
    corr: float
    total: float


@dataclass(frozen=True)
class TrainTrace:
    """Per-iteration loss values and the reason training stopped.

    ``iterations`` holds the declared objective term by term.
    ``stopping_totals`` holds the bookkeeping loss the stop rules read,
    whose residual norms enter squared; its first value fixes the
    automatic margin.
    """

    iterations: tuple
    stopping_totals: tuple
    stop_reason: str  # "margin", "nonpositive_loss" or "max_iters"

    @property
    def n_iterations(self) -> int:
        return len(self.iterations)

    @property
    def totals(self) -> list:
        return [it.total for it in self.iterations]


@dataclass(frozen=True)
class ModelParams:
    """Everything needed to score new samples.

    Only the consequents, rule base and normalization stats take part in
    prediction; the mixing transform is kept for inspection of learned
    label interactions.
    """

    mixing: np.ndarray
    consequents: np.ndarray
    rulebase: RuleBase
    tau: float
    norm: NormStats
    feature_names: tuple
    label_names: tuple
    config: TrainConfig

    def __post_init__(self):
        k = self.rulebase.n_rules
        d = self.rulebase.n_features
        if self.consequents.shape[1] != k * (d + 1):
            raise ValueError("consequent columns must equal K(D+1) of the rule base")
        if self.mixing.shape != (self.consequents.shape[0],) * 2:
            raise ValueError("mixing transform must be L x L")
        if not math.isfinite(self.tau):
            raise ValueError("tau must be finite")

    @property
    def n_labels(self) -> int:
        return self.consequents.shape[0]


@dataclass(frozen=True)
class ReweightDiagonals:
    """Inverse column-norm weights for the L2,1 terms, one entry per sample.

    ``cons`` equals ``fit`` when both are evaluated at the same point; it
    is carried separately because the consequent solve freezes it while
    the fit residual moves.
    """

    fit: np.ndarray
    soft: np.ndarray
    cons: np.ndarray


@dataclass(frozen=True)
class CorrelationLaplacian:
    """Laplacian of the consequent-similarity graph.

    ``similarity`` is C C^T, ``degree`` its row sums and ``laplacian``
    diag(degree) - similarity. Rows of the Laplacian sum to zero; the
    matrix may be indefinite because similarities can be negative.
    """

    similarity: np.ndarray
    degree: np.ndarray
    laplacian: np.ndarray


def l21_columns(matrix) -> float:
    """Sum of Euclidean norms of the columns (the L2,1 norm of the transpose)."""
    m = np.asarray(matrix, dtype=np.float64)
    return float(np.sqrt((m * m).sum(axis=0)).sum())


def _check_training_shapes(mixing, consequents, fuzzy_x, labels):
    n_labels, n = labels.shape
    if mixing.shape != (n_labels, n_labels):
        raise ValueError("mixing transform must be L x L")
    if fuzzy_x.ndim != 2 or fuzzy_x.shape[1] != n:
        raise ValueError("fuzzy features must have one column per sample")
    if consequents.shape != (n_labels, fuzzy_x.shape[0]):
        raise ValueError("consequents must be L x K(D+1)")


def correlation_laplacian(consequents) -> CorrelationLaplacian:
    """Build the label-correlation Laplacian from the consequent rows."""
    c = np.asarray(consequents, dtype=np.float64)
    similarity = c @ c.T
    degree = similarity.sum(axis=1)
    laplacian = np.diag(degree) - similarity
    return CorrelationLaplacian(similarity, degree, laplacian)


def reweight_diagonals(mixing, consequents, fuzzy_x, labels, epsilon_row) -> ReweightDiagonals:
    """Weights 1 / (2 max(column norm, epsilon_row)) of both residuals."""
    if epsilon_row <= 0:
        raise ValueError("epsilon_row must be positive")
    _check_training_shapes(mixing, consequents, fuzzy_x, labels)
    soft_labels = mixing @ labels
    fit_norms = np.linalg.norm(soft_labels - consequents @ fuzzy_x, axis=0)
    soft_norms = np.linalg.norm(labels - soft_labels, axis=0)
    fit = 1.0 / (2.0 * np.maximum(fit_norms, epsilon_row))
    soft = 1.0 / (2.0 * np.maximum(soft_norms, epsilon_row))
    return ReweightDiagonals(fit=fit, soft=soft, cons=fit)


def objective(mixing, consequents, fuzzy_x, labels, cfg: TrainConfig) -> LossBreakdown:
    """Evaluate the full training objective at (mixing, consequents)."""
    mixing = np.asarray(mixing, dtype=np.float64)
    consequents = np.asarray(consequents, dtype=np.float64)
    fuzzy_x = np.asarray(fuzzy_x, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    _check_training_shapes(mixing, consequents, fuzzy_x, labels)
    soft_labels = mixing @ labels
    fit = l21_columns(soft_labels - consequents @ fuzzy_x)
    ridge = cfg.alpha * float((consequents * consequents).sum())
    soft = cfg.beta * l21_columns(labels - soft_labels)
    lap = correlation_laplacian(consequents).laplacian
    corr = 2.0 * cfg.gamma * float(np.sum(soft_labels * (lap @ soft_labels)))
    total = fit + ridge + soft + corr
    return LossBreakdown(fit=fit, ridge=ridge, soft=soft, corr=corr, total=total)


def stopping_loss(mixing, consequents, fuzzy_x, labels, cfg: TrainConfig) -> float:
    """Bookkeeping loss driving the stop rules, with squared residual norms.

    Equals the objective except that the two column-norm sums enter
    squared. The square keeps the early iterations (whose residuals are
    huge under the all-ones initialization) far above the converged
    plateau, so the relative stopping margin separates the two regimes
    cleanly. The reported objective itself can dip below zero through the
    indefinite correlation term long before the iterates settle, which
    would end training at an arbitrary point.
    """
    mixing = np.asarray(mixing, dtype=np.float64)
    consequents = np.asarray(consequents, dtype=np.float64)
    soft_labels = mixing @ labels
    fit = l21_columns(soft_labels - consequents @ fuzzy_x)
    soft = l21_columns(labels - soft_labels)
    ridge = cfg.alpha * float((consequents * consequents).sum())
    lap = correlation_laplacian(consequents).laplacian
    corr = 2.0 * cfg.gamma * float(np.sum(soft_labels * (lap @ soft_labels)))
    return fit * fit + ridge + cfg.beta * soft * soft + corr


def gram_ridge(labels, ridge_y: float) -> float:
    """Diagonal shift applied to the label Gram matrix before inversion."""
    if ridge_y == 0.0:
        return 0.0
    trace = float((labels * labels).sum())
    n_labels = labels.shape[0]
    scale = trace / n_labels if trace > 0.0 else 1.0
    return ridge_y * scale


def update_consequents(mixing, consequents, fuzzy_x, labels, cfg: TrainConfig) -> np.ndarray:
    """Exact minimizer of the consequent subproblem with frozen weights.

    The reweighting diagonal is evaluated at the given (mixing,
    consequents) pair; the returned matrix satisfies the corresponding
    stationarity condition. The left coefficient combines the ridge with
    the correlation coupling of the soft-label Gram matrix.
    """
    _check_training_shapes(mixing, consequents, fuzzy_x, labels)
    weights = reweight_diagonals(mixing, consequents, fuzzy_x, labels, cfg.epsilon_row)
    soft_labels = mixing @ labels
    soft_gram = soft_labels @ soft_labels.T
    diag = np.diag(soft_gram)
    n_labels = labels.shape[0]
    a = (
        cfg.alpha * np.eye(n_labels)
        + cfg.gamma * (diag[:, None] + diag[None, :])
        - 2.0 * cfg.gamma * soft_gram
    )
    b = (fuzzy_x * weights.cons[None, :]) @ fuzzy_x.T
    z = (soft_labels * weights.cons[None, :]) @ fuzzy_x.T
    return solve_sylvester(a, b, z)


def update_mixing(mixing, consequents, fuzzy_x, labels, cfg: TrainConfig) -> np.ndarray:
    """Exact minimizer of the mixing subproblem with frozen weights.

    The reweighting diagonals and the correlation Laplacian are evaluated
    at the given (mixing, consequents) pair. The label Gram matrix is
    ridged (see :class:`TrainConfig`) and folded into the right-hand
    coefficients, so the solved equation is the stationarity condition
    with the ridged Gram in the Laplacian term.

    The Sylvester operator here is singular whenever the label matrix is
    row-rank deficient (a label that never occurs, or duplicated label
    rows): the Laplacian annihilates the all-ones vector while the right
    coefficient loses rank. The system remains consistent, so for small
    label counts the minimum-norm solve is used, which leaves the
    undetermined directions at zero instead of noise.
    """
    _check_training_shapes(mixing, consequents, fuzzy_x, labels)
    weights = reweight_diagonals(mixing, consequents, fuzzy_x, labels, cfg.epsilon_row)
    lap = correlation_laplacian(consequents).laplacian
    n_labels = labels.shape[0]
    gram = labels @ labels.T + gram_ridge(labels, cfg.ridge_y) * np.eye(n_labels)

    combined = weights.fit + cfg.beta * weights.soft
    b_raw = (labels * combined[None, :]) @ labels.T
    z_raw = (
        (consequents @ fuzzy_x) * weights.fit[None, :]
        + cfg.beta * labels * weights.soft[None, :]
    ) @ labels.T
    try:
        # gram is symmetric, so solving from the left on transposes applies
        # the inverse from the right.
        b = np.linalg.solve(gram, b_raw.T).T
        z = np.linalg.solve(gram, z_raw.T).T
    except np.linalg.LinAlgError as exc:
        raise SingularProblemError("singular label Gram matrix: %s" % exc) from exc
    a = 2.0 * cfg.gamma * lap

    if n_labels * n_labels <= KRON_GUARD:
        return least_norm_solve(a, b, z)
    return solve_sylvester(a, b, z)


def train(data: Dataset, cfg: TrainConfig = TrainConfig()):
    """Fit a model on the dataset with the alternating scheme.

    Per iteration, both subproblem solves read the same pre-update pair:
    the consequent solve freezes its weights at (mixing, consequents) and
    the mixing solve freezes its weights and Laplacian at the same pair,
    including the old consequents in its right-hand side. Both results are
    then committed together. Training stops when the change in the
    bookkeeping loss (see :func:`stopping_loss`) drops to the margin, that
    loss becomes nonpositive, or the iteration budget runs out.

    Returns
    -------
    (ModelParams, TrainTrace)
    """
    normed, stats = normalize_features(data)
    rulebase = fit_antecedents(normed.features, cfg.n_rules, cfg.width_floor)
    fuzzy_x = fuzzy_feature_matrix(normed.features, rulebase)
    labels = normed.labels
    n_labels = labels.shape[0]

    mixing = np.ones((n_labels, n_labels))
    consequents = np.full((n_labels, fuzzy_x.shape[0]), 1.0 / n_labels)

    margin = cfg.min_loss_margin
    prev_total = 0.0
    iterations = []
    stopping_totals = []
    stop_reason = "max_iters"
    for t in range(1, cfg.max_iters + 1):
        try:
            new_consequents = update_consequents(mixing, consequents, fuzzy_x, labels, cfg)
            new_mixing = update_mixing(mixing, consequents, fuzzy_x, labels, cfg)
        except SingularProblemError as exc:
            raise SingularProblemError("iteration %d: %s" % (t, exc)) from exc
        consequents = new_consequents
        mixing = new_mixing

        loss = objective(mixing, consequents, fuzzy_x, labels, cfg)
        total = stopping_loss(mixing, consequents, fuzzy_x, labels, cfg)
        if not (math.isfinite(loss.total) and math.isfinite(total)):
            raise NumericalError(
                "non-finite loss at iteration %d: fit=%r ridge=%r soft=%r corr=%r"
                % (t, loss.fit, loss.ridge, loss.soft, loss.corr)
            )
        iterations.append(loss)
        stopping_totals.append(total)
        if margin is None:
            margin = AUTO_MARGIN_SCALE * abs(total)
        if abs(total - prev_total) <= margin:
            stop_reason = "margin"
            break
        if total <= 0.0:
            stop_reason = "nonpositive_loss"
            break
        prev_total = total

    model = ModelParams(
        mixing=mixing,
        consequents=consequents,
        rulebase=rulebase,
        tau=cfg.tau,
        norm=stats,
        feature_names=data.feature_names,
        label_names=data.label_names,
        config=cfg,
    )
    return model, TrainTrace(tuple(iterations), tuple(stopping_totals), stop_reason)
