"""Generalization-bound calculators for voting ensembles.

Three classical forms are evaluated as empirical plug-ins.  The
margin-threshold form keeps its two terms separate (its hidden
constant is nobody's to invent); the minimum-margin form carries
domain preconditions surfaced through an `applicable` flag; the
risk/disagreement form is computed from margin moments with the
pairwise definitions as a cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ensemble import PredictionMatrix
from .margins import MarginProfile, compute_margins

BOUND_NAMES = ("schapire", "breiman", "germain")


@dataclass(frozen=True)
class BoundReport:
    name: str
    applicable: bool
    value: float | None = None
    terms: tuple[float, float] | None = None   # (empirical, complexity) pair
    reason: str | None = None
    inputs: dict = field(default_factory=dict)
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if self.name not in BOUND_NAMES:
            raise ValueError(f"name must be one of {BOUND_NAMES}")
        if self.applicable and self.value is not None and not math.isfinite(self.value):
            raise ValueError("an applicable bound must carry a finite value")


def _simplex_margins(profile: MarginProfile) -> bool:
    return bool(np.all(profile.margins >= -1 - 1e-9)
                and np.all(profile.margins <= 1 + 1e-9))


def schapire_terms(profile: MarginProfile, theta: float, d: float, n: int) -> BoundReport:
    """Margin-threshold form: empirical mass at or below theta, and the
    d/(n theta^2) complexity root, reported as separate terms."""
    if theta <= 0:
        raise ValueError("theta must be positive")
    if d <= 0 or n < 1:
        raise ValueError("need a positive capacity d and n >= 1")
    if not _simplex_margins(profile):
        return BoundReport("schapire", applicable=False,
                           reason="margins leave [-1, 1]; weights were not simplex",
                           inputs={"theta": theta, "d": d, "n": n})
    empirical = float(np.mean(profile.margins <= theta))
    complexity = math.sqrt(d / (n * theta * theta))
    return BoundReport(
        "schapire", applicable=True, terms=(empirical, complexity),
        inputs={"theta": theta, "d": d, "n": n},
        flags=("terms reported separately; the hidden constant is not invented",),
    )


def breiman_bound(theta0: float, hspace: float, n: int, delta: float) -> BoundReport:
    """Minimum-margin form over a finite hypothesis space of size hspace."""
    if hspace < 2:
        raise ValueError("hypothesis-space size must be >= 2")
    if n < 1:
        raise ValueError("need n >= 1")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    inputs = {"theta0": theta0, "hspace": hspace, "n": n, "delta": delta}
    gate = 4.0 * math.sqrt(2.0 / hspace)
    if theta0 <= gate:
        return BoundReport("breiman", applicable=False, inputs=inputs,
                           reason=f"theta0 must exceed 4*sqrt(2/|H|) = {gate:.6g}")
    R = (32.0 / (n * theta0 * theta0)) * math.log(2.0 * hspace)
    inputs["R"] = R
    if R > 2.0 * n:
        return BoundReport("breiman", applicable=False, inputs=inputs,
                           reason=f"R = {R:.6g} exceeds 2n")
    value = R * (1.0 + math.log(2.0 * n) + math.log(1.0 / R)) \
        + math.log(hspace / delta) / n
    flags = []
    if not 0.0 <= value <= 1.0:
        flags.append("value outside [0, 1], reported unclamped")
    return BoundReport("breiman", applicable=True, value=value,
                       inputs=inputs, flags=tuple(flags))


def gibbs_risk(matrix: PredictionMatrix, weights) -> float:
    """Vote-weighted average of the individual learner error rates."""
    w = np.asarray(weights, dtype=float)
    wrong = matrix.entries != matrix.labels[:, None]
    return float(w @ wrong.mean(axis=0))


def expected_disagreement(matrix: PredictionMatrix, weights) -> float:
    """Weight-squared average over learner pairs of their disagreement rate."""
    w = np.asarray(weights, dtype=float)
    h = matrix.entries
    n = matrix.n_rows
    # fraction of rows where t and u differ, for all pairs at once
    agree = (h.T @ h) / n                 # in [-1, 1]
    disagree = (1.0 - agree) / 2.0
    return float(w @ disagree @ w)


def germain_bound(matrix: PredictionMatrix, weights) -> BoundReport:
    """Risk/disagreement form, computed from margin moments.

    R = (1 - mean margin)/2 and d_Q = (1 - mean squared margin)/2; both
    identities hold exactly for simplex weights and +-1 predictions.
    """
    w = np.asarray(weights, dtype=float)
    if w.shape != (matrix.n_learners,):
        raise ValueError("one weight per learner required")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise ValueError("weights must be nonnegative and sum to 1")
    profile = compute_margins(matrix, w)
    R = (1.0 - profile.mean) / 2.0
    d_q = (1.0 - profile.second_moment) / 2.0
    inputs = {"gibbs_risk": R, "disagreement": d_q,
              "margin_mean": profile.mean,
              "margin_second_moment": profile.second_moment}
    if profile.mean <= 0:
        return BoundReport("germain", applicable=False, inputs=inputs,
                           reason="margin mean must be positive")
    if abs(d_q - 0.5) <= 1e-12:
        return BoundReport("germain", applicable=False, inputs=inputs,
                           reason="disagreement at 1/2 makes the ratio blow up")
    value = 1.0 - (1.0 - 2.0 * R) / (1.0 - 2.0 * d_q)
    flags = []
    if not 0.0 <= value <= 1.0:
        flags.append("value outside [0, 1], reported unclamped")
    return BoundReport("germain", applicable=True, value=value,
                       inputs=inputs, flags=tuple(flags))


def report_rows(report: BoundReport) -> list[str]:
    """Tab-delimited lines for CLI output."""
    rows = [f"name\t{report.name}", f"applicable\t{report.applicable}"]
    if report.value is not None:
        rows.append(f"value\t{report.value:.10g}")
    if report.terms is not None:
        rows.append(f"empirical_term\t{report.terms[0]:.10g}")
        rows.append(f"complexity_term\t{report.terms[1]:.10g}")
    if report.reason:
        rows.append(f"reason\t{report.reason}")
    for key, val in report.inputs.items():
        rows.append(f"{key}\t{val:.10g}" if isinstance(val, float) else f"{key}\t{val}")
    for flag in report.flags:
        rows.append(f"note\t{flag}")
    return rows
