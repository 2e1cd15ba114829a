"""
Cross-arm comparison of finished runs
"""
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import math

import numpy as np

from config.erl_config import ARMS
from harness.runner import CurvePoint, read_curve, read_manifest
from utils.errors import InputError
from utils.helpers import format_steps, format_table


UNREACHED = "unreached"


@dataclass
class ArmSummary:
    """One row of the comparison table"""
    arm: str
    runs: int
    steps_to_threshold: Union[float, str]
    final_mean: float
    final_median: float
    final_std: float
    final_min: float
    final_max: float
    score_difference: float = 0.0

    def cells(self) -> List[str]:
        steps = self.steps_to_threshold
        return [
            self.arm,
            str(self.runs),
            steps if isinstance(steps, str) else format_steps(steps),
            f"{self.final_mean:.2f}",
            f"{self.final_median:.2f}",
            f"{self.final_std:.2f}",
            f"{self.final_min:.2f}",
            f"{self.final_max:.2f}",
            f"{self.score_difference:+.2f}",
        ]


TABLE_HEADER = ['arm', 'runs', 'steps_to_threshold', 'final_mean', 'final_median', 'final_std',
                'final_min', 'final_max', 'difference']


def steps_to_threshold(curve: Sequence[CurvePoint], threshold: float) -> float:
    """Cumulative steps at the first champion score >= threshold; inf if never"""
    for point in curve:
        if point.champion_score >= threshold:
            return float(point.cumulative_steps)
    return math.inf


def compare_runs(run_dirs: Sequence[Union[str, Path]],
                 threshold: Optional[float] = None) -> List[ArmSummary]:
    """
    Summarize runs per algorithm arm

    Args:
        run_dirs: Run directories, any mix of arms and seeds
        threshold: Solve threshold (defaults to the runs' configured one)

    Returns:
        One ArmSummary per arm. score_difference is the arm's final mean
        minus the first row's.

    Raises:
        InputError: no runs, runs on different environments, or an empty curve
    """
    if not run_dirs:
        raise InputError("compare_runs needs at least one run directory")

    by_arm: Dict[str, List[List[CurvePoint]]] = defaultdict(list)
    envs = set()
    thresholds = set()
    for run_dir in run_dirs:
        manifest = read_manifest(run_dir)
        envs.add(manifest.config.env)
        thresholds.add(manifest.config.solve_threshold)
        curve = read_curve(run_dir)
        if not curve:
            raise InputError(f"Run {run_dir} has an empty curve")
        by_arm[manifest.arm].append(curve)

    if len(envs) > 1:
        raise InputError(f"Runs use different environments: {sorted(envs)}")
    if threshold is None:
        if len(thresholds) > 1:
            raise InputError(f"Runs use different solve thresholds: {sorted(thresholds)}")
        threshold = thresholds.pop()

    order = sorted(by_arm, key=lambda a: (ARMS.index(a) if a in ARMS else len(ARMS), a))
    summaries = []
    for arm in order:
        curves = by_arm[arm]
        finals = np.array([c[-1].champion_score for c in curves])
        median = float(np.median([steps_to_threshold(c, threshold) for c in curves]))
        summaries.append(ArmSummary(
            arm=arm,
            runs=len(curves),
            steps_to_threshold=UNREACHED if math.isinf(median) else median,
            final_mean=float(finals.mean()),
            final_median=float(np.median(finals)),
            final_std=float(finals.std()),
            final_min=float(finals.min()),
            final_max=float(finals.max()),
        ))

    reference = summaries[0].final_mean
    for summary in summaries:
        summary.score_difference = summary.final_mean - reference
    return summaries


def render_summary(summaries: Sequence[ArmSummary]) -> str:
    return format_table(TABLE_HEADER, [s.cells() for s in summaries])
