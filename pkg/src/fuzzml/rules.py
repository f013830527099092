"""Gaussian fuzzy rule antecedents and the rule-generated feature map.

A rule base holds K Gaussian antecedents over D features. An input vector
is mapped to a K(D+1)-dimensional fuzzy feature vector: each rule's
normalized firing strength scales the bias-augmented input (1, x), and the
per-rule blocks are concatenated in rule order.
"""

import numpy as np

__all__ = [
    "RuleBase",
    "fit_antecedents",
    "membership",
    "firing_strengths",
    "fuzzy_features",
    "fuzzy_feature_matrix",
    "export_rules",
]

DEFAULT_WIDTH_FLOOR = 1e-4


class RuleBase:
    """K Gaussian antecedents: centers and widths are K x D matrices."""

    __slots__ = ("centers", "widths", "width_floor")

    def __init__(self, centers, widths, width_floor=DEFAULT_WIDTH_FLOOR):
        centers = np.array(centers, dtype=np.float64)
        widths = np.array(widths, dtype=np.float64)
        if centers.ndim != 2 or centers.shape != widths.shape:
            raise ValueError("centers and widths must be matching K x D matrices")
        if centers.shape[0] < 1 or centers.shape[1] < 1:
            raise ValueError("rule base needs K >= 1 rules and D >= 1 features")
        if width_floor <= 0.0:
            raise ValueError("width_floor must be positive")
        if np.any(widths < width_floor):
            raise ValueError("all widths must be at least width_floor")
        centers.setflags(write=False)
        widths.setflags(write=False)
        self.centers = centers
        self.widths = widths
        self.width_floor = float(width_floor)

    @property
    def n_rules(self) -> int:
        return self.centers.shape[0]

    @property
    def n_features(self) -> int:
        return self.centers.shape[1]


def fit_antecedents(features, n_rules, width_floor=DEFAULT_WIDTH_FLOOR) -> RuleBase:
    """Fit K rule antecedents by deterministic variance partitioning.

    Starting from one cluster holding every sample, the cluster with the
    largest total within-cluster variance is split K-1 times at the mean of
    its highest-variance feature. Centers are per-cluster feature means and
    widths are per-cluster standard deviations floored at ``width_floor``.

    Parameters
    ----------
    features : (D, N) matrix, one column per sample.
    n_rules : number of rules K, with 1 <= K <= N.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("features must be a D x N matrix")
    d, n = x.shape
    if n_rules < 1:
        raise ValueError("n_rules must be at least 1")
    if n_rules > n:
        raise ValueError("n_rules exceeds the sample count (%d > %d)" % (n_rules, n))

    clusters = [np.arange(n)]
    for _ in range(n_rules - 1):
        totals = [x[:, idx].var(axis=1).sum() for idx in clusters]
        best = int(np.argmax(totals))
        if totals[best] > 0.0:
            idx = clusters[best]
            dim_vars = x[:, idx].var(axis=1)
            dim = int(np.argmax(dim_vars))
            thr = x[dim, idx].mean()
            left = idx[x[dim, idx] <= thr]
            right = idx[x[dim, idx] > thr]
        else:
            # All clusters are point masses; split the largest by sample order
            # so K clusters still come out.
            sizes = [len(idx) for idx in clusters]
            best = int(np.argmax(sizes))
            idx = clusters[best]
            half = len(idx) // 2
            left, right = idx[:half], idx[half:]
        clusters[best] = left
        clusters.append(right)

    centers = np.empty((n_rules, d))
    widths = np.empty((n_rules, d))
    for k, idx in enumerate(clusters):
        centers[k] = x[:, idx].mean(axis=1)
        widths[k] = x[:, idx].std(axis=1)
    widths = np.maximum(widths, width_floor)
    return RuleBase(centers, widths, width_floor)


def membership(x, center, width):
    """Gaussian membership exp(-((x - center) / width)^2 / 2).

    Accepts scalars or broadcastable arrays; the peak value 1 is reached
    at the center and the value decreases strictly with distance.
    """
    z = (np.asarray(x, dtype=np.float64) - center) / width
    return np.exp(-0.5 * z * z)


def firing_strengths(x, rulebase: RuleBase) -> np.ndarray:
    """Normalized per-rule firing strengths for one input vector.

    The raw strength of a rule is the product of its D membership values;
    the returned vector is normalized to sum to 1. Products are evaluated
    in the log domain so distant inputs do not underflow; if every raw
    strength still underflows to zero the uniform vector 1/K is returned.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (rulebase.n_features,):
        raise ValueError("input vector length does not match the rule base")
    z = (x[None, :] - rulebase.centers) / rulebase.widths
    with np.errstate(over="ignore"):
        # overflow to -inf is handled by the uniform fallback below
        log_raw = -0.5 * np.sum(z * z, axis=1)
    shift = log_raw.max()
    if not np.isfinite(shift):
        return np.full(rulebase.n_rules, 1.0 / rulebase.n_rules)
    raw = np.exp(log_raw - shift)
    return raw / raw.sum()


def fuzzy_features(x, rulebase: RuleBase) -> np.ndarray:
    """Map one input to its K(D+1) fuzzy feature vector.

    Block k equals the rule's normalized firing strength times (1, x).
    """
    x = np.asarray(x, dtype=np.float64)
    strengths = firing_strengths(x, rulebase)
    x_ext = np.concatenate(([1.0], x))
    return (strengths[:, None] * x_ext[None, :]).ravel()


def fuzzy_feature_matrix(features, rulebase: RuleBase) -> np.ndarray:
    """Column-wise fuzzy feature map of a D x N matrix, K(D+1) x N."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != rulebase.n_features:
        raise ValueError("features must be a D x N matrix matching the rule base")
    n = x.shape[1]
    out = np.empty((rulebase.n_rules * (rulebase.n_features + 1), n))
    for i in range(n):
        out[:, i] = fuzzy_features(x[:, i], rulebase)
    return out


def _linguistic_terms(n_rules: int) -> list:
    if n_rules == 1:
        return ["Medium"]
    if n_rules == 2:
        return ["Small", "Large"]
    if n_rules == 3:
        return ["Small", "Medium", "Large"]
    return ["Level %d" % (i + 1) for i in range(n_rules)]


def export_rules(model, feature_names=None, label_names=None) -> str:
    """Render a trained model's rule base as deterministic text.

    Per feature, the K rule centers are sorted ascending (ties broken by
    rule index) and assigned terms from an ordered vocabulary, so each
    rule's IF-part reads as a linguistic level. The THEN-part lists one
    affine consequent per label with 6 significant digits.
    """
    rulebase = model.rulebase
    consequents = model.consequents
    k, d = rulebase.centers.shape
    n_labels = consequents.shape[0]
    if feature_names is None:
        feature_names = model.feature_names
    if label_names is None:
        label_names = model.label_names
    terms = _linguistic_terms(k)

    # term_of[rule][feature]: position of the rule's center in the sorted order
    term_of = np.empty((k, d), dtype=np.int64)
    for j in range(d):
        order = sorted(range(k), key=lambda r: (rulebase.centers[r, j], r))
        for pos, r in enumerate(order):
            term_of[r, j] = pos

    def fmt(v):
        return "%.6g" % v

    lines = []
    for r in range(k):
        lines.append("RULE %d" % (r + 1))
        for j in range(d):
            lines.append("IF %s is %s" % (feature_names[j], terms[term_of[r, j]]))
        block = consequents[:, r * (d + 1) : (r + 1) * (d + 1)]
        for l in range(n_labels):
            parts = [fmt(block[l, 0])]
            for j in range(d):
                coef = block[l, j + 1]
                sign = "-" if coef < 0 else "+"
                parts.append("%s %s*x%d" % (sign, fmt(abs(coef)), j + 1))
            lines.append("THEN %s = %s" % (label_names[l], " ".join(parts)))
        lines.append("")
    return "\n".join(lines)
