# src/minctx/core/clf.py
"""
Binary linear classifier: L2-regularized L1-hinge loss with per-class
penalty factors and a true (unregularized) bias, trained in the dual.

The bias turns the dual into a problem with the equality constraint
sum_i y_i alpha_i = 0, so coordinates are updated in feasible pairs:
examples are visited in seeded-random order and each is paired with its
maximal violating partner.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from minctx.core.feats import FeatureMatrix, FeatureVector, stack
from minctx.core.value_object import AnimacyLabel, ClassWeights, ConfigError, DatasetError, DimensionError

logger = logging.getLogger(__name__)

LABEL_MAP = {1: AnimacyLabel.ANIMATE, -1: AnimacyLabel.INANIMATE}

_EPS = 1e-12


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float

    @property
    def dim(self) -> int:
        return int(self.weights.shape[0])

    def decision(self, x: Union[FeatureVector, np.ndarray]) -> float:
        if isinstance(x, FeatureVector):
            if x.dim != self.dim:
                raise DimensionError(f"feature dim {x.dim} != model dim {self.dim}")
            if x.is_sparse:
                return float(x.data @ self.weights[x.indices]) + self.bias
            x = x.values
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.dim,):
            raise DimensionError(f"feature dim {x.shape} != model dim {self.dim}")
        return float(x @ self.weights) + self.bias

    def predict(self, x: Union[FeatureVector, np.ndarray]) -> AnimacyLabel:
        return AnimacyLabel.from_sign(self.decision(x))

    def decision_matrix(self, X: FeatureMatrix) -> np.ndarray:
        if X.shape[1] != self.dim:
            raise DimensionError(f"feature dim {X.shape[1]} != model dim {self.dim}")
        return np.asarray(X @ self.weights).ravel() + self.bias

    def predict_matrix(self, X: FeatureMatrix) -> List[AnimacyLabel]:
        return [AnimacyLabel.from_sign(s) for s in self.decision_matrix(X)]


@dataclass
class FitResult:
    model: LinearModel
    alpha: np.ndarray
    upper: np.ndarray
    dual_objectives: List[float] = field(default_factory=list)
    epochs: int = 0
    converged: bool = False


class _Rows:
    """Row access for dense or CSR matrices."""

    def __init__(self, X: FeatureMatrix):
        self.X = X
        self.sparse = sp.issparse(X)
        if self.sparse:
            self.X = sp.csr_matrix(X, dtype=np.float64)
            self.X.sort_indices()
            sq = np.asarray(self.X.multiply(self.X).sum(axis=1)).ravel()
        else:
            self.X = np.asarray(X, dtype=np.float64)
            sq = np.einsum("ij,ij->i", self.X, self.X)
        self.sqnorm = sq

    def _row(self, i: int) -> Tuple[np.ndarray, np.ndarray]:
        lo, hi = self.X.indptr[i], self.X.indptr[i + 1]
        return self.X.indices[lo:hi], self.X.data[lo:hi]

    def dot(self, i: int, w: np.ndarray) -> float:
        if self.sparse:
            idx, val = self._row(i)
            return float(val @ w[idx])
        return float(self.X[i] @ w)

    def cross(self, i: int, j: int) -> float:
        if self.sparse:
            ii, vi = self._row(i)
            jj, vj = self._row(j)
            _, a, b = np.intersect1d(ii, jj, assume_unique=True, return_indices=True)
            return float(vi[a] @ vj[b])
        return float(self.X[i] @ self.X[j])

    def axpy(self, i: int, t: float, w: np.ndarray) -> None:
        if self.sparse:
            idx, val = self._row(i)
            w[idx] += t * val
        else:
            w += t * self.X[i]

    def matvec(self, w: np.ndarray) -> np.ndarray:
        return np.asarray(self.X @ w).ravel()


def _violation(s: np.ndarray, up: np.ndarray, low: np.ndarray) -> Tuple[float, float, float]:
    m = float(s[up].max()) if up.any() else -np.inf
    big_m = float(s[low].min()) if low.any() else np.inf
    if not (np.isfinite(m) and np.isfinite(big_m)):
        return 0.0, m, big_m
    return m - big_m, m, big_m


def _hinge(s: np.ndarray, y: np.ndarray, costs: np.ndarray, bias: float) -> float:
    # 1 - y_i (w.x_i + b) == y_i (s_i - b)
    return float(costs @ np.maximum(0.0, y * (s - bias)))


def _exact_bias(s: np.ndarray, y: np.ndarray, costs: np.ndarray) -> float:
    """Minimizer of the weighted hinge sum over b for fixed w: the first breakpoint with a non-negative right slope."""
    order = np.argsort(s, kind="stable")
    ss, yo, co = s[order], y[order], costs[order]
    neg_left = np.cumsum(np.where(yo < 0, co, 0.0))
    pos = np.where(yo > 0, co, 0.0)
    pos_right = pos.sum() - np.cumsum(pos)
    k = int(np.argmax(neg_left - pos_right >= 0.0))
    return float(ss[k])


def _bias(s: np.ndarray, y: np.ndarray, alpha: np.ndarray, upper: np.ndarray, up: np.ndarray, low: np.ndarray) -> float:
    free = (alpha > _EPS) & (alpha < upper - _EPS)
    if free.any():
        bias = float(s[free].mean())
    else:
        _, m, big_m = _violation(s, up, low)
        if np.isfinite(m) and np.isfinite(big_m):
            bias = 0.5 * (m + big_m)
        else:
            bias = m if np.isfinite(m) else big_m
    exact = _exact_bias(s, y, upper)
    if _hinge(s, y, upper, exact) < _hinge(s, y, upper, bias):
        return exact
    return bias


def fit_matrix(
    X: FeatureMatrix,
    labels: Sequence[AnimacyLabel],
    cw: ClassWeights = ClassWeights(),
    reg: float = 1.0,
    tol: float = 1e-4,
    max_epochs: int = 1000,
    seed: int = 1,
) -> FitResult:
    """
    Minimize 1/2 |w|^2 + reg * sum_i cw(y_i) * max(0, 1 - y_i (w.x_i + b)).

    Stops once the maximal violating pair gap is small and the primal
    objective (bias solved exactly for the current w) is within tol of the
    dual objective, relative to max(1, |dual|); or after max_epochs sweeps.
    """
    n = X.shape[0]
    if n == 0:
        raise DatasetError("no training examples")
    if len(labels) != n:
        raise DimensionError(f"{n} feature rows but {len(labels)} labels")
    if reg <= 0:
        raise ConfigError(f"C must be > 0, got {reg}.")
    y = np.asarray([lab.sign for lab in labels], dtype=np.float64)
    if np.all(y > 0) or np.all(y < 0):
        raise DatasetError("training data contains a single class")

    rows = _Rows(X)
    d = X.shape[1]
    upper = reg * np.where(y > 0, cw.c_animate, cw.c_inanimate)
    alpha = np.zeros(n)
    w = np.zeros(d)
    s = y.copy()  # s_i = -y_i * grad_i = y_i - w.x_i
    up = y > 0
    low = y < 0
    rng = np.random.default_rng(seed)
    result = FitResult(LinearModel(w, 0.0), alpha, upper)

    def refresh(i: int) -> None:
        s[i] = y[i] - rows.dot(i, w)

    def members(i: int) -> None:
        free_up = alpha[i] < upper[i] - _EPS
        free_down = alpha[i] > _EPS
        up[i] = free_up if y[i] > 0 else free_down
        low[i] = free_down if y[i] > 0 else free_up

    def step(u: int, l: int) -> None:
        gap = s[u] - s[l]
        quad = rows.sqnorm[u] + rows.sqnorm[l] - 2.0 * rows.cross(u, l)
        room_u = upper[u] - alpha[u] if y[u] > 0 else alpha[u]
        room_l = alpha[l] if y[l] > 0 else upper[l] - alpha[l]
        t = min(room_u, room_l)
        if quad > _EPS:
            t = min(t, gap / quad)
        if t <= 0:
            return
        alpha[u] = min(upper[u], max(0.0, alpha[u] + y[u] * t))
        alpha[l] = min(upper[l], max(0.0, alpha[l] - y[l] * t))
        rows.axpy(u, t, w)
        rows.axpy(l, -t, w)
        for k in (u, l):
            members(k)
            refresh(k)

    kkt_tol = tol
    for epoch in range(max_epochs):
        s[:] = y - rows.matvec(w)
        gap, _, _ = _violation(s, up, low)
        dual = float(alpha.sum() - 0.5 * (w @ w))
        result.dual_objectives.append(dual)
        if gap < kkt_tol:
            bias = _bias(s, y, alpha, upper, up, low)
            primal = 0.5 * float(w @ w) + _hinge(s, y, upper, bias)
            if primal - dual <= tol * max(1.0, abs(dual)):
                result.converged = True
                break
            kkt_tol = max(0.1 * kkt_tol, _EPS)
            logger.debug("duality gap %.3g after %d sweep(s); pair tolerance now %g", primal - dual, epoch, kkt_tol)
        threshold = 0.5 * kkt_tol
        for i in rng.permutation(n):
            i = int(i)
            refresh(i)
            if up[i] and low.any():
                cand = np.where(low, s, np.inf)
                j = int(np.argmin(cand))
                if j != i:
                    refresh(j)
                    if s[i] - s[j] > threshold:
                        step(i, j)
                        continue
            if low[i] and up.any():
                cand = np.where(up, s, -np.inf)
                j = int(np.argmax(cand))
                if j != i:
                    refresh(j)
                    if s[j] - s[i] > threshold:
                        step(j, i)
        result.epochs = epoch + 1
    else:
        s[:] = y - rows.matvec(w)
        result.dual_objectives.append(float(alpha.sum() - 0.5 * (w @ w)))
        logger.warning("dual coordinate descent hit the epoch cap (%d) before reaching tol %g", max_epochs, tol)

    bias = _bias(s, y, alpha, upper, up, low)
    result.model = LinearModel(w, float(bias))
    logger.info(
        "fit %d example(s), dim %d: %d sweep(s), converged=%s, %d support vector(s)",
        n, d, result.epochs, result.converged, int((alpha > _EPS).sum()),
    )
    return result


def fit(
    data: Sequence[Tuple[FeatureVector, AnimacyLabel]],
    cw: ClassWeights = ClassWeights(),
    reg: float = 1.0,
    tol: float = 1e-4,
    max_epochs: int = 1000,
    seed: int = 1,
) -> LinearModel:
    if not data:
        raise DatasetError("no training examples")
    X = stack([x for x, _ in data])
    return fit_matrix(X, [lab for _, lab in data], cw, reg, tol, max_epochs, seed).model


def primal_objective(
    model: LinearModel,
    X: FeatureMatrix,
    labels: Sequence[AnimacyLabel],
    cw: ClassWeights = ClassWeights(),
    reg: float = 1.0,
) -> float:
    y = np.asarray([lab.sign for lab in labels], dtype=np.float64)
    costs = reg * np.where(y > 0, cw.c_animate, cw.c_inanimate)
    margins = y * model.decision_matrix(X)
    return float(0.5 * (model.weights @ model.weights) + (costs * np.maximum(0.0, 1.0 - margins)).sum())


def predict(model: LinearModel, x: Union[FeatureVector, np.ndarray]) -> AnimacyLabel:
    return model.predict(x)


def decision(model: LinearModel, x: Union[FeatureVector, np.ndarray]) -> float:
    return model.decision(x)


__all__ = [
    "LABEL_MAP",
    "LinearModel",
    "FitResult",
    "fit",
    "fit_matrix",
    "primal_objective",
    "predict",
    "decision",
]
