"""Soft-margin SVM trained from scratch by sequential minimal optimization.

Features are z-scored with statistics fitted on the training data (std
floored at 1e-8), then the dual problem is solved by pairwise coordinate
ascent: sweep the examples, and for each multiplier violating its KKT
condition beyond ``tol``, pick a partner (largest error gap first, then
a seeded random scan) and optimize the pair analytically.  Training is
deterministic for a fixed example ordering and seed.

The default kernel is linear, in which case the model stores an explicit
weight vector; an RBF option is available for comparison runs and keeps
the support vectors instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "LABEL_MAP",
    "SingleClassDataError",
    "SvmModel",
    "kkt_residuals",
    "load_model",
    "predict",
    "save_model",
    "train",
]

LABEL_MAP = {"+1": "fake", "-1": "real"}

_STD_FLOOR = 1e-8


class SingleClassDataError(Exception):
    """Training data contains only one class."""


@dataclass
class SvmModel:
    weights: np.ndarray  # standardized space; empty for rbf models
    bias: float
    mean: np.ndarray
    scale: np.ndarray
    C: float
    tol: float
    kernel: str = "linear"
    gamma: float | None = None
    support_vectors: np.ndarray | None = None  # standardized, rbf only
    dual_coef: np.ndarray | None = None  # alpha_i * y_i, rbf only
    config_hash: str | None = None
    kkt_residual: float = float("nan")
    label_map: dict = field(default_factory=lambda: dict(LABEL_MAP))

    def _standardize(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.mean.shape[0]:
            raise ValueError(
                f"feature length {x.shape[1]} does not match model "
                f"dimension {self.mean.shape[0]}"
            )
        return (x - self.mean) / self.scale

    def decision_function(self, x: np.ndarray) -> np.ndarray:
        """Raw decision scores; the boundary is score = 0."""
        z = self._standardize(x)
        if self.kernel == "linear":
            return z @ self.weights + self.bias
        k = _rbf_kernel(z, self.support_vectors, self.gamma)
        return k @ self.dual_coef + self.bias

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Labels in {-1, +1}; a score of exactly 0 maps to +1."""
        scores = self.decision_function(x)
        return np.where(scores >= 0, 1, -1).astype(np.int64)


def _rbf_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    sq = (
        np.sum(a * a, axis=1)[:, None]
        + np.sum(b * b, axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    return np.exp(-gamma * np.maximum(sq, 0.0))


def kkt_residuals(alpha: np.ndarray, margins: np.ndarray, c: float) -> np.ndarray:
    """Per-example violation of the dual optimality conditions.

    ``margins`` is y_i * f(x_i).  At the optimum: alpha = 0 requires
    margin >= 1, alpha = C requires margin <= 1, interior alphas sit on
    the margin.
    """
    low = np.maximum(0.0, 1.0 - margins)  # binding when alpha can still grow
    high = np.maximum(0.0, margins - 1.0)  # binding when alpha can still shrink
    res = np.where(alpha <= 0, low, np.where(alpha >= c, high, np.maximum(low, high)))
    return res


def train(
    features: np.ndarray,
    labels,
    C: float = 1.0,
    tol: float = 1e-3,
    max_passes: int | None = None,
    kernel: str = "linear",
    gamma: float | None = None,
    seed: int = 0,
    config_hash: str | None = None,
) -> SvmModel:
    """Fit a soft-margin SVM on rows of ``features`` with labels in {-1, +1}.

    ``max_passes`` caps the number of full sweeps over the data
    (default 100 * n_examples); training normally stops much earlier,
    when a sweep finds no multiplier violating KKT by more than ``tol``.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"features must be a 2-D matrix, got shape {x.shape}")
    if y.shape != (x.shape[0],):
        raise ValueError(
            f"{y.shape[0] if y.ndim else 0} labels for {x.shape[0]} feature rows"
        )
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be -1 or +1")
    if np.unique(y).size < 2:
        raise SingleClassDataError("training data contains a single class")
    if not (C > 0 and tol > 0):
        raise ValueError(f"C and tol must be positive, got C={C}, tol={tol}")
    if kernel not in ("linear", "rbf"):
        raise ValueError(f"unknown kernel {kernel!r}")

    n = x.shape[0]
    if max_passes is None:
        max_passes = 100 * n

    mean = x.mean(axis=0)
    scale = np.maximum(x.std(axis=0), _STD_FLOOR)
    z = (x - mean) / scale

    if kernel == "linear":
        gram = z @ z.T
    else:
        if gamma is None:
            gamma = 1.0 / z.shape[1]
        gram = _rbf_kernel(z, z, gamma)

    rng = np.random.default_rng(seed)
    alpha = np.zeros(n)
    bias = 0.0
    # f[i] = sum_j alpha_j y_j K_ij + bias, maintained incrementally.
    f = np.full(n, bias)

    def take_step(i: int, j: int) -> bool:
        nonlocal bias
        if i == j:
            return False
        e_i = f[i] - y[i]
        e_j = f[j] - y[j]
        if y[i] == y[j]:
            lo = max(0.0, alpha[i] + alpha[j] - C)
            hi = min(C, alpha[i] + alpha[j])
        else:
            lo = max(0.0, alpha[j] - alpha[i])
            hi = min(C, C + alpha[j] - alpha[i])
        if lo >= hi:
            return False
        eta = gram[i, i] + gram[j, j] - 2.0 * gram[i, j]
        if eta <= 0:
            return False
        a_j = alpha[j] + y[j] * (e_i - e_j) / eta
        a_j = min(max(a_j, lo), hi)
        if abs(a_j - alpha[j]) < 1e-12 * (a_j + alpha[j] + 1e-12):
            return False
        a_i = alpha[i] + y[i] * y[j] * (alpha[j] - a_j)
        d_i = (a_i - alpha[i]) * y[i]
        d_j = (a_j - alpha[j]) * y[j]
        b_i = bias - e_i - d_i * gram[i, i] - d_j * gram[i, j]
        b_j = bias - e_j - d_i * gram[i, j] - d_j * gram[j, j]
        if 0 < a_i < C:
            new_bias = b_i
        elif 0 < a_j < C:
            new_bias = b_j
        else:
            new_bias = (b_i + b_j) / 2.0
        f += d_i * gram[:, i] + d_j * gram[:, j] + (new_bias - bias)
        alpha[i], alpha[j] = a_i, a_j
        bias = new_bias
        return True

    for _ in range(max_passes):
        changed = 0
        for i in range(n):
            margin = y[i] * f[i]
            violates = (margin < 1.0 - tol and alpha[i] < C) or (
                margin > 1.0 + tol and alpha[i] > 0
            )
            if not violates:
                continue
            errors = f - y
            order = np.argsort(-np.abs(errors - errors[i]), kind="stable")
            stepped = False
            for j in order[:8]:
                if take_step(i, int(j)):
                    stepped = True
                    break
            if not stepped:
                for j in rng.permutation(n):
                    if take_step(i, int(j)):
                        stepped = True
                        break
            if stepped:
                changed += 1
        if changed == 0:
            break

    margins = y * f
    residual = float(kkt_residuals(alpha, margins, C).max())

    if kernel == "linear":
        weights = z.T @ (alpha * y)
        model = SvmModel(
            weights=weights,
            bias=bias,
            mean=mean,
            scale=scale,
            C=C,
            tol=tol,
            kernel=kernel,
            config_hash=config_hash,
            kkt_residual=residual,
        )
    else:
        keep = alpha > 0
        model = SvmModel(
            weights=np.empty(0),
            bias=bias,
            mean=mean,
            scale=scale,
            C=C,
            tol=tol,
            kernel=kernel,
            gamma=gamma,
            support_vectors=z[keep],
            dual_coef=alpha[keep] * y[keep],
            config_hash=config_hash,
            kkt_residual=residual,
        )
    return model


def predict(model: SvmModel, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Labels and raw scores for one or more feature rows."""
    scores = model.decision_function(features)
    labels = np.where(scores >= 0, 1, -1).astype(np.int64)
    return labels, scores


def save_model(path: str | Path, model: SvmModel) -> None:
    doc = {
        "C": model.C,
        "tol": model.tol,
        "mean": model.mean.tolist(),
        "scale": model.scale.tolist(),
        "weights": model.weights.tolist(),
        "bias": model.bias,
        "label_map": model.label_map,
        "pipeline_config_hash": model.config_hash,
        "kernel": model.kernel,
        "gamma": model.gamma,
        "support_vectors": None
        if model.support_vectors is None
        else model.support_vectors.tolist(),
        "dual_coef": None if model.dual_coef is None else model.dual_coef.tolist(),
        "kkt_residual": model.kkt_residual,
    }
    Path(path).write_text(json.dumps(doc) + "\n")


def load_model(path: str | Path, expected_config_hash: str | None = None) -> SvmModel:
    """Load a model; refuses when the stored pipeline hash does not match."""
    doc = json.loads(Path(path).read_text())
    stored = doc.get("pipeline_config_hash")
    if expected_config_hash is not None and stored != expected_config_hash:
        raise ValueError(
            f"{path}: model was trained with pipeline config {stored}, "
            f"current config is {expected_config_hash}"
        )
    return SvmModel(
        weights=np.asarray(doc["weights"], dtype=np.float64),
        bias=float(doc["bias"]),
        mean=np.asarray(doc["mean"], dtype=np.float64),
        scale=np.asarray(doc["scale"], dtype=np.float64),
        C=float(doc["C"]),
        tol=float(doc["tol"]),
        kernel=doc.get("kernel", "linear"),
        gamma=doc.get("gamma"),
        support_vectors=None
        if doc.get("support_vectors") is None
        else np.asarray(doc["support_vectors"], dtype=np.float64),
        dual_coef=None
        if doc.get("dual_coef") is None
        else np.asarray(doc["dual_coef"], dtype=np.float64),
        config_hash=stored,
        kkt_residual=float(doc.get("kkt_residual", float("nan"))),
        label_map=doc.get("label_map", dict(LABEL_MAP)),
    )
