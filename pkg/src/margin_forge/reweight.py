"""Post-hoc vote reweighting that lifts training margins.

Three families share one engine:

* margin maximization: a linear program that maximizes the r-weighted
  total margin improvement subject to every margin staying at least as
  large as before, over simplex weights.  The r vector encodes the
  emphasis: all-ones, rank-powered, or an indicator of the smallest
  margins.
* targeted lifting: same objective with unit emphasis, but the
  constraints push low margins up to the xi-quantile and the rest to
  the mean; this one can genuinely be infeasible, which is reported,
  not raised.
* variance flattening: least squares through the origin that pulls all
  margins toward a common target, then renormalizes the coefficients
  to sum 1 (they may go negative).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensemble import PredictionMatrix
from .margins import MarginProfile, compute_margins
from .simplex import LpProblem, SimplexError, solve

SCHEMES = ("uws", "ews", "pws", "sm1", "sm2")


@dataclass(frozen=True)
class RewSpec:
    scheme: str
    k: int = 5
    xi: float = 0.05
    target_mean: float | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if self.scheme == "ews" and (int(self.k) != self.k or self.k < 1):
            raise ValueError("ews needs a positive integer power")
        if self.scheme in ("pws", "sm1") and not 0.0 < self.xi < 1.0:
            raise ValueError("the proportion must lie in (0, 1)")

    @property
    def label(self) -> str:
        if self.scheme == "ews":
            return f"ews:{self.k}"
        if self.scheme in ("pws", "sm1"):
            return f"{self.scheme}:{self.xi:g}"
        if self.scheme == "sm2" and self.target_mean is not None:
            return f"sm2:{self.target_mean:g}"
        return self.scheme


def parse_spec(text: str) -> RewSpec:
    """Accepts uws | ews[:k] | pws:xi | sm1[:xi] | sm2[:target_mean]."""
    head, _, arg = text.strip().lower().partition(":")
    if head == "uws":
        if arg:
            raise ValueError("uws takes no parameter")
        return RewSpec("uws")
    if head == "ews":
        return RewSpec("ews", k=int(arg) if arg else 5)
    if head == "pws":
        if not arg:
            raise ValueError("pws needs a proportion, e.g. pws:0.05")
        return RewSpec("pws", xi=float(arg))
    if head == "sm1":
        return RewSpec("sm1", xi=float(arg) if arg else 0.05)
    if head == "sm2":
        return RewSpec("sm2", target_mean=float(arg) if arg else None)
    raise ValueError(f"unknown scheme {text!r}")


@dataclass(frozen=True)
class RewResult:
    scheme: str
    feasible: bool
    weights: np.ndarray | None = None
    old_profile: MarginProfile | None = None
    new_profile: MarginProfile | None = None
    objective: float | None = None
    variance_reduction: float | None = None
    range_reduction: float | None = None
    raw_coefficients: np.ndarray | None = None


def uws_r(n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("need n >= 1")
    return np.ones(n)


def _ascending_ranks(margins) -> np.ndarray:
    # rank 1 = smallest margin; equal margins ranked by observation index
    m = np.asarray(margins, dtype=float)
    order = np.argsort(m, kind="stable")
    ranks = np.empty(m.size, dtype=int)
    ranks[order] = np.arange(1, m.size + 1)
    return ranks


def ews_r(margins, k: int = 5) -> np.ndarray:
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    m = np.asarray(margins, dtype=float)
    n = m.size
    return ((n + 1) - _ascending_ranks(m)).astype(float) ** k


def pws_r(margins, xi: float) -> np.ndarray:
    if not 0.0 < xi < 1.0:
        raise ValueError("xi must lie in (0, 1)")
    m = np.asarray(margins, dtype=float)
    n = m.size
    k = math.ceil(n * xi)
    r = np.zeros(n)
    r[np.argsort(m, kind="stable")[:k]] = 1.0
    return r


def _check_alpha(alpha, T: int) -> np.ndarray:
    a = np.asarray(alpha, dtype=float)
    if a.shape != (T,):
        raise ValueError("one vote weight per learner required")
    if np.any(a < 0) or abs(a.sum() - 1.0) > 1e-9:
        raise ValueError("vote weights must be nonnegative and sum to 1")
    return a


def _signed_design(matrix: PredictionMatrix) -> np.ndarray:
    # x_it = y_i h_it, so margins are plain row sums under the weights
    return matrix.labels[:, None] * matrix.entries


def _finish(scheme: str, matrix, w, old: MarginProfile) -> RewResult:
    new = compute_margins(matrix, w)
    deltas = new.margins - old.margins
    return RewResult(
        scheme=scheme, feasible=True, weights=w,
        old_profile=old, new_profile=new,
        objective=float(deltas.sum()),
        variance_reduction=old.variance - new.variance,
        range_reduction=old.spread - new.spread,
    )


def mm_weights(matrix: PredictionMatrix, alpha, r) -> RewResult:
    """Maximize the r-weighted margin gain, never letting a margin drop.

    Feasible by construction (alpha itself satisfies every constraint),
    so the reported objective is always >= 0 up to solver tolerance.
    The r vector is rescaled by its maximum before entering the solver;
    positive scaling cannot change the set of optimal weight vectors.
    """
    a = _check_alpha(alpha, matrix.n_learners)
    r = np.asarray(r, dtype=float)
    if r.shape != (matrix.n_rows,):
        raise ValueError("one emphasis value per observation required")
    if np.any(r < 0) or not np.any(r > 0):
        raise ValueError("emphasis must be nonnegative and not all zero")
    old = compute_margins(matrix, a)
    signed = _signed_design(matrix)
    scaled = r / r.max()
    problem = LpProblem(
        objective=scaled @ signed,
        ge_rows=list(zip(signed, old.margins)),
        eq_rows=[(np.ones(matrix.n_learners), 1.0)],
    )
    solution = solve(problem)
    if not solution.optimal:
        raise SimplexError(f"margin LP ended {solution.status}, expected optimal")
    w = solution.x / solution.x.sum()
    result = _finish("mm", matrix, w, old)
    # report the objective under the caller's r, not the rescaled one
    deltas = result.new_profile.margins - old.margins
    return RewResult(**{**result.__dict__, "objective": float(r @ deltas)})


def sm1_weights(matrix: PredictionMatrix, alpha, xi: float = 0.05) -> RewResult:
    """Lift the low half of the margins to the xi-quantile and hold the
    rest at the mean; infeasibility is a reported outcome."""
    if not 0.0 < xi < 1.0:
        raise ValueError("xi must lie in (0, 1)")
    a = _check_alpha(alpha, matrix.n_learners)
    old = compute_margins(matrix, a)
    mean = old.mean
    theta = old.percentile(xi)
    floors = np.where(old.margins <= mean, theta, mean)
    signed = _signed_design(matrix)
    problem = LpProblem(
        objective=np.ones(matrix.n_rows) @ signed,
        ge_rows=list(zip(signed, floors)),
        eq_rows=[(np.ones(matrix.n_learners), 1.0)],
    )
    solution = solve(problem)
    if solution.status == "infeasible":
        return RewResult(scheme="sm1", feasible=False, old_profile=old)
    if not solution.optimal:
        raise SimplexError(f"margin LP ended {solution.status}, expected optimal")
    w = solution.x / solution.x.sum()
    return _finish("sm1", matrix, w, old)


def sm2_weights(matrix: PredictionMatrix, alpha, target_mean: float | None = None) -> RewResult:
    """Regress a constant target on the signed predictions through the
    origin, then scale the coefficients to sum 1.

    The objective field reports the residual sum of squares of the
    unnormalized fit; raw_coefficients carries that fit.  Normalized
    weights may be negative, and the resulting margins may leave
    [-1, +1].
    """
    a = _check_alpha(alpha, matrix.n_learners)
    old = compute_margins(matrix, a)
    target = old.mean if target_mean is None else float(target_mean)
    signed = _signed_design(matrix)
    response = np.full(matrix.n_rows, target)
    coef, *_ = np.linalg.lstsq(signed, response, rcond=None)
    total = coef.sum()
    if abs(total) < 1e-9:
        raise ValueError("non-normalizable solution: coefficients sum to zero")
    w = coef / total
    new = compute_margins(matrix, w)
    sse = float(np.sum((signed @ coef - response) ** 2))
    return RewResult(
        scheme="sm2", feasible=True, weights=w,
        old_profile=old, new_profile=new,
        objective=sse,
        variance_reduction=old.variance - new.variance,
        range_reduction=old.spread - new.spread,
        raw_coefficients=coef,
    )


def apply_scheme(spec: RewSpec, matrix: PredictionMatrix, alpha) -> RewResult:
    """Dispatch a parsed scheme against a prediction matrix."""
    if spec.scheme == "sm1":
        result = sm1_weights(matrix, alpha, spec.xi)
    elif spec.scheme == "sm2":
        result = sm2_weights(matrix, alpha, spec.target_mean)
    else:
        a = _check_alpha(alpha, matrix.n_learners)
        old = compute_margins(matrix, a)
        if spec.scheme == "uws":
            r = uws_r(matrix.n_rows)
        elif spec.scheme == "ews":
            r = ews_r(old.margins, spec.k)
        else:
            r = pws_r(old.margins, spec.xi)
        result = mm_weights(matrix, alpha, r)
    return RewResult(**{**result.__dict__, "scheme": spec.label})
