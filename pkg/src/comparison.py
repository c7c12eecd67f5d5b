"""Paired-seed comparison of two simulator modes."""

import logging
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .simkernel.experiment import run_cell
from .simkernel.kernel import SimConfig

logger = logging.getLogger(__name__)


@dataclass
class ModeComparison:
    """Paired metric values of two modes over the same seeds."""

    mode_a: str
    mode_b: str
    metric: str
    seeds: list[int]
    values_a: list[float]
    values_b: list[float]
    mean_difference: float
    median_difference: float
    relative_difference: float
    t_statistic: float
    p_value: float
    wilcoxon_p_value: float
    confidence_interval: tuple[float, float]
    significant: bool

    def summary(self) -> str:
        lines = [
            f"Paired comparison of {self.metric}: {self.mode_a} vs {self.mode_b}",
            "=" * 60,
            f"Seeds: {len(self.seeds)}",
            f"  {self.mode_a} mean: {np.mean(self.values_a):.4f}",
            f"  {self.mode_b} mean: {np.mean(self.values_b):.4f}",
            f"  Mean difference (A - B): {self.mean_difference:+.4f}",
            f"  Median difference: {self.median_difference:+.4f}",
            f"  Relative difference: {self.relative_difference:+.2%}",
            f"  Paired t: {self.t_statistic:.3f} (p={self.p_value:.4f})",
            f"  Wilcoxon p: {self.wilcoxon_p_value:.4f}",
            f"  95% CI: [{self.confidence_interval[0]:.4f}, {self.confidence_interval[1]:.4f}]",
        ]
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "mode_a": self.mode_a,
            "mode_b": self.mode_b,
            "metric": self.metric,
            "seeds": list(self.seeds),
            "values_a": list(self.values_a),
            "values_b": list(self.values_b),
            "mean_difference": self.mean_difference,
            "median_difference": self.median_difference,
            "relative_difference": self.relative_difference,
            "t_statistic": self.t_statistic,
            "p_value": self.p_value,
            "wilcoxon_p_value": self.wilcoxon_p_value,
            "confidence_interval": list(self.confidence_interval),
            "significant": self.significant,
        }

    def to_row(self, app_size: int, horizon_min: int) -> dict:
        """Flat CSV row for one grid cell."""
        return {
            "mode_a": self.mode_a,
            "mode_b": self.mode_b,
            "app_size": app_size,
            "horizon_min": horizon_min,
            "metric": self.metric,
            "seed_count": len(self.seeds),
            "mean_a": float(np.mean(self.values_a)),
            "mean_b": float(np.mean(self.values_b)),
            "mean_difference": self.mean_difference,
            "median_difference": self.median_difference,
            "t_statistic": self.t_statistic,
            "p_value": self.p_value,
            "wilcoxon_p_value": self.wilcoxon_p_value,
            "ci_low": self.confidence_interval[0],
            "ci_high": self.confidence_interval[1],
            "significant": self.significant,
        }


def _wilcoxon_p(diff: np.ndarray) -> float:
    """Signed-rank p over the non-zero differences; 1 when fewer than two remain."""
    nonzero = diff[diff != 0]
    if len(nonzero) < 2:
        return 1.0
    p = float(stats.wilcoxon(nonzero).pvalue)
    return 1.0 if np.isnan(p) else p


def compare_paired(
    values_a: Sequence[float],
    values_b: Sequence[float],
    mode_a: str = "simifed",
    mode_b: str = "none",
    metric: str = "availability_pct",
    seeds: Optional[Sequence[int]] = None,
    significance_level: float = 0.05,
) -> ModeComparison:
    """
    Paired t-test and Wilcoxon signed-rank test on per-seed values.

    Identical samples give p = 1 rather than NaN.
    """
    a = np.asarray(values_a, dtype=np.float64)
    b = np.asarray(values_b, dtype=np.float64)
    if len(a) != len(b) or len(a) < 2:
        raise ValueError(f"Need at least 2 paired values, got {len(a)} and {len(b)}")

    diff = a - b
    if np.allclose(diff, diff[0]) and np.isclose(diff[0], 0.0):
        t_stat, p_value, w_p = 0.0, 1.0, 1.0
    else:
        t_stat, p_value = stats.ttest_rel(a, b)
        w_p = _wilcoxon_p(diff)
        if np.isnan(p_value):
            t_stat, p_value = 0.0, 1.0

    mean_b = float(b.mean())
    relative = float(diff.mean()) / mean_b if mean_b != 0 else 0.0
    margin = 1.96 * float(diff.std(ddof=1)) / np.sqrt(len(diff))
    mean_diff = float(diff.mean())
    return ModeComparison(
        mode_a=mode_a,
        mode_b=mode_b,
        metric=metric,
        seeds=list(seeds) if seeds is not None else list(range(len(a))),
        values_a=a.tolist(),
        values_b=b.tolist(),
        mean_difference=mean_diff,
        median_difference=float(np.median(diff)),
        relative_difference=relative,
        t_statistic=float(t_stat),
        p_value=float(p_value),
        wilcoxon_p_value=w_p,
        confidence_interval=(mean_diff - margin, mean_diff + margin),
        significant=float(p_value) < significance_level,
    )


def compare_modes(
    config: SimConfig,
    seeds: Sequence[int],
    app_size: int,
    horizon_min: int,
    mode_a: str = "simifed",
    mode_b: str = "none",
    metric: str = "availability_pct",
) -> ModeComparison:
    """Run both modes on each seed's cell and compare one metric."""
    values_a, values_b = [], []
    for seed in seeds:
        seeded = replace(config, seed=seed)
        values_a.append(getattr(run_cell(seeded, mode_a, app_size, horizon_min).metrics, metric))
        values_b.append(getattr(run_cell(seeded, mode_b, app_size, horizon_min).metrics, metric))
    result = compare_paired(values_a, values_b, mode_a, mode_b, metric, seeds)
    logger.info(
        f"{metric} {mode_a} vs {mode_b}: mean diff {result.mean_difference:+.4f}, p={result.p_value:.4f}"
    )
    return result


def comparison_rows(
    config: SimConfig,
    seeds: Sequence[int],
    baseline: str = "none",
    metric: str = "availability_pct",
) -> list[dict]:
    """
    Compare every configured mode against the baseline in each grid cell.

    Returns:
        One flat row per (mode, app_size, horizon_min)
    """
    rows = []
    for app_size in config.app_sizes:
        for horizon_min in config.horizons:
            for mode in config.modes:
                if mode == baseline:
                    continue
                result = compare_modes(config, seeds, app_size, horizon_min, mode, baseline, metric)
                rows.append(result.to_row(app_size, horizon_min))
    return rows
