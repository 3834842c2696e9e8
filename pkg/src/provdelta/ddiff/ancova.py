"""ANCOVA comparison of two predictive models.

Each model is summarised by (estimated, actual) pairs. Regressing actual on
estimated per model gives two lines; the models are taken as equivalent when
neither the slopes nor the intercepts differ significantly.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats


class AncovaError(ValueError):
    pass


@dataclass(frozen=True)
class ModelPredictions:
    estimated: np.ndarray
    actual: np.ndarray

    def __post_init__(self):
        est = np.asarray(self.estimated, dtype=float)
        act = np.asarray(self.actual, dtype=float)
        if est.ndim != 1 or est.shape != act.shape:
            raise AncovaError("estimated and actual must be equal-length vectors")
        if len(est) < 3:
            raise AncovaError(f"need at least 3 prediction pairs, got {len(est)}")
        if not (np.all(np.isfinite(est)) and np.all(np.isfinite(act))):
            raise AncovaError("non-finite prediction values")
        if np.ptp(act) == 0:
            raise AncovaError("actual values are all equal")
        object.__setattr__(self, "estimated", est)
        object.__setattr__(self, "actual", act)

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[float, float]]) -> ModelPredictions:
        arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])

    @classmethod
    def from_csv(cls, data: str | bytes) -> ModelPredictions:
        """Parse ``estimated,actual`` rows; a non-numeric header row is skipped."""
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        rows = [r for r in csv.reader(io.StringIO(data)) if r and any(c.strip() for c in r)]
        pairs = []
        for i, row in enumerate(rows):
            if len(row) < 2:
                raise AncovaError(f"row {i + 1}: expected two columns")
            try:
                pairs.append((float(row[0]), float(row[1])))
            except ValueError:
                if i == 0:
                    continue
                raise AncovaError(f"row {i + 1}: non-numeric value") from None
        return cls.from_pairs(pairs)

    def __len__(self):
        return len(self.estimated)


@dataclass(frozen=True)
class AncovaResult:
    slope_f: float
    slope_p: float
    intercept_f: float
    intercept_p: float
    alpha: float
    df_slope: tuple[int, int]
    df_intercept: tuple[int, int]

    @property
    def equivalent(self) -> bool:
        return self.slope_p >= self.alpha and self.intercept_p >= self.alpha

    def as_dict(self) -> dict:
        return {
            "slopeF": self.slope_f,
            "slopeP": self.slope_p,
            "interceptF": self.intercept_f,
            "interceptP": self.intercept_p,
            "alpha": self.alpha,
            "equivalent": self.equivalent,
        }


def _rss(X: np.ndarray, y: np.ndarray) -> float:
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    return float(resid @ resid)


def _f_test(rss_reduced: float, rss_full: float, df_num: int, df_den: int, scale: float):
    diff = rss_reduced - rss_full
    # round-off guards: identical groups give diff ~ 1e-16 * scale
    tol = 1e-12 * scale
    if diff <= tol:
        return 0.0, 1.0
    if rss_full <= tol:
        return float("inf"), 0.0
    f = (diff / df_num) / (rss_full / df_den)
    return float(f), float(stats.f.sf(f, df_num, df_den))


def ancova_model_diff(left: ModelPredictions, right: ModelPredictions, alpha: float = 0.05) -> AncovaResult:
    """Nested-model F tests for equal slopes and equal intercepts.

    Slope test: ``actual ~ est + group + est:group`` against ``actual ~ est + group``.
    Intercept test: ``actual ~ est + group`` against ``actual ~ est``.
    """
    if not 0 < alpha < 1:
        raise AncovaError("alpha must lie in (0, 1)")
    for name, m in (("left", left), ("right", right)):
        if np.ptp(m.estimated) == 0:
            raise AncovaError(f"{name} estimates have zero variance")

    x = np.concatenate([left.estimated, right.estimated])
    y = np.concatenate([left.actual, right.actual])
    g = np.concatenate([np.zeros(len(left)), np.ones(len(right))])
    n = len(y)
    ones = np.ones(n)

    common = np.column_stack([ones, x])
    parallel = np.column_stack([ones, x, g])
    separate = np.column_stack([ones, x, g, x * g])

    rss_common = _rss(common, y)
    rss_parallel = _rss(parallel, y)
    rss_separate = _rss(separate, y)
    scale = float(np.sum((y - y.mean()) ** 2))

    df_sep = n - 4
    df_par = n - 3
    slope_f, slope_p = _f_test(rss_parallel, rss_separate, 1, df_sep, scale)
    icpt_f, icpt_p = _f_test(rss_common, rss_parallel, 1, df_par, scale)
    return AncovaResult(slope_f, slope_p, icpt_f, icpt_p, alpha, (1, df_sep), (1, df_par))


def model_similarity(left: bytes, right: bytes, options: dict | None = None) -> float:
    """Comparator adapter: 1.0 when the models are ANCOVA-equivalent, else 0.0."""
    alpha = float((options or {}).get("alpha", 0.05))
    result = ancova_model_diff(ModelPredictions.from_csv(left), ModelPredictions.from_csv(right), alpha)
    return 1.0 if result.equivalent else 0.0
