"""Linear SVMs (L2-regularized hinge, L1-regularized squared hinge) with
Platt-scaled probability outputs."""

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from . import _solvers
from .features import SparseVector, as_matrix

MODEL_MAGIC = "linsvm v1"
PLATT_MAGIC = "platt v1"
REGS = ("L1", "L2")


class ConvergenceWarning(UserWarning):
    pass


@dataclass
class LinearModel:
    """One weight row per decision function.

    Binary models have a single row whose positive side is ``classes[1]``;
    multiclass models have one one-vs-rest row per class.
    """

    weights: np.ndarray
    bias: np.ndarray
    classes: Tuple[str, ...]
    reg: str = "L2"
    C: float = 1.0
    converged: bool = True
    objective_trace: List[np.ndarray] = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        self.weights = np.atleast_2d(np.asarray(self.weights, dtype=np.float64))
        self.bias = np.atleast_1d(np.asarray(self.bias, dtype=np.float64))
        self.classes = tuple(self.classes)
        if len(set(self.classes)) != len(self.classes) or not self.classes:
            raise ValueError("classes must be non-empty and distinct")
        expected = 1 if len(self.classes) == 2 else len(self.classes)
        if self.weights.shape[0] != expected or self.bias.shape != (expected,):
            raise ValueError(f"{len(self.classes)} classes need {expected} weight rows")
        if self.reg not in REGS:
            raise ValueError(f"reg must be one of {REGS}")

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    @property
    def binary(self) -> bool:
        return len(self.classes) == 2

    def decision_function(self, X) -> np.ndarray:
        """Decision values: shape (n,) for binary models, (n, k) otherwise."""
        M = as_matrix(X)
        if M.shape[1] != self.dim:
            raise ValueError(f"dimension mismatch: input {M.shape[1]}, model {self.dim}")
        scores = np.asarray(M @ self.weights.T) + self.bias
        return scores[:, 0] if self.binary else scores

    def decision(self, x: SparseVector):
        if x.dim != self.dim:
            raise ValueError(f"dimension mismatch: input {x.dim}, model {self.dim}")
        scores = self.weights[:, x.indices] @ x.values + self.bias
        return float(scores[0]) if self.binary else scores

    def predict(self, X) -> List[str]:
        return [self.classes[i] for i in argmax_rows(scores_per_class(self.decision_function(X)))]

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"{MODEL_MAGIC} {self.reg} {self.C!r} {self.dim} {' '.join(self.classes)}\n")
            for row, b in zip(self.weights, self.bias):
                fh.write(f"bias {float(b)!r}\n")
                for j in np.flatnonzero(row):
                    fh.write(f"{j}:{float(row[j])!r}\n")

    @classmethod
    def load(cls, path) -> "LinearModel":
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().split()
            if header[:2] != MODEL_MAGIC.split():
                raise ValueError(f"{path}: not a linear model file")
            reg, C, dim = header[2], float(header[3]), int(header[4])
            classes = tuple(header[5:])
            rows: List[np.ndarray] = []
            biases: List[float] = []
            for line in fh:
                line = line.strip()
                if line.startswith("bias "):
                    biases.append(float(line[5:]))
                    rows.append(np.zeros(dim))
                elif line:
                    j, v = line.split(":")
                    rows[-1][int(j)] = float(v)
        return cls(np.array(rows).reshape(len(rows), dim), np.array(biases), classes, reg, C)


def scores_per_class(decisions: np.ndarray) -> np.ndarray:
    """(n,) binary decisions -> (n, 2) as (-d, d); (n, k) passes through."""
    d = np.asarray(decisions, dtype=np.float64)
    if d.ndim == 1:
        return np.column_stack([-d, d])
    return d


def argmax_rows(scores: np.ndarray) -> np.ndarray:
    """Row-wise argmax; ties resolve to the lowest column, i.e. the
    lexicographically smallest class since classes are sorted."""
    return np.argmax(scores, axis=1)


def _train_binary(M: sp.csr_matrix, y: np.ndarray, reg: str, C: float, tol: float,
                  max_iter: int, seed: int):
    n, dim = M.shape
    aug = sp.hstack([M, np.ones((n, 1))], format="csr")
    aug.sort_indices()
    if reg == "L2":
        w, _, _, converged, trace = _solvers.dual_cd_hinge(
            aug.indptr.astype(np.int64), aug.indices.astype(np.int64), aug.data,
            y, float(C), float(tol), int(max_iter), int(seed), dim + 1)
    else:
        csc = aug.tocsc()
        csc.sort_indices()
        w, _, converged, trace = _solvers.primal_cd_l1_sqhinge(
            csc.indptr.astype(np.int64), csc.indices.astype(np.int64), csc.data,
            y, float(C), float(tol), int(max_iter), int(seed))
    return w[:dim].copy(), float(w[dim]), bool(converged), np.asarray(trace)


def train(X, y: Sequence[str], reg: str = "L2", C: float = 1.0, tol: float = 1e-4,
          max_iter: int = 1000, seed: int = 0) -> LinearModel:
    """Fit a linear SVM.

    ``reg="L2"``: 0.5*||w||^2 + C * sum of hinge losses, by dual coordinate
    descent. ``reg="L1"``: ||w||_1 + C * sum of squared hinge losses, by
    primal coordinate descent. The bias is an extra constant feature and is
    regularized with the weights. More than two classes are handled one
    versus rest. A run that hits ``max_iter`` still returns its model, with
    ``converged=False`` and a :class:`ConvergenceWarning`.
    """
    if reg not in REGS:
        raise ValueError(f"reg must be one of {REGS}, got {reg!r}")
    if not C > 0:
        raise ValueError("C must be positive")
    M = as_matrix(X)
    y = list(y)
    if M.shape[0] != len(y):
        raise ValueError(f"{M.shape[0]} vectors but {len(y)} labels")
    classes = tuple(sorted(set(y)))
    if len(classes) < 2:
        raise ValueError("training data needs at least two distinct labels")
    labels = np.array(y, dtype=object)
    targets = [classes[1]] if len(classes) == 2 else list(classes)

    rows, biases, traces = [], [], []
    converged = True
    for cls in targets:
        yy = np.where(labels == cls, 1.0, -1.0)
        w, b, ok, trace = _train_binary(M, yy, reg, C, tol, max_iter, seed)
        rows.append(w)
        biases.append(b)
        traces.append(trace)
        converged &= ok
    if not converged:
        warnings.warn(f"{reg} SVM did not converge within {max_iter} passes", ConvergenceWarning)
    return LinearModel(np.vstack(rows), np.array(biases), classes, reg, float(C), converged, traces)


def decision(model: LinearModel, x: SparseVector):
    return model.decision(x)


# --- Platt scaling ---------------------------------------------------------

def _sigmoid_neg(z: np.ndarray) -> np.ndarray:
    """1 / (1 + exp(z)), without overflow."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    ez = np.exp(-z[pos])
    out[pos] = ez / (1.0 + ez)
    out[~pos] = 1.0 / (1.0 + np.exp(z[~pos]))
    return out


@dataclass(frozen=True)
class PlattCalibrator:
    """P(positive | d) = 1 / (1 + exp(a*d + b)), with a <= 0."""

    a: float
    b: float

    _EPS = 1e-12

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("Platt parameters must be finite")

    def __call__(self, d) -> np.ndarray:
        p = _sigmoid_neg(self.a * np.asarray(d, dtype=np.float64) + self.b)
        return np.clip(p, self._EPS, 1.0 - self._EPS)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"{PLATT_MAGIC} {float(self.a)!r} {float(self.b)!r}\n")

    @classmethod
    def load(cls, path) -> "PlattCalibrator":
        with open(path, encoding="utf-8") as fh:
            parts = fh.readline().split()
        if parts[:2] != PLATT_MAGIC.split() or len(parts) != 4:
            raise ValueError(f"{path}: not a Platt calibrator file")
        return cls(float(parts[2]), float(parts[3]))


def _platt_nll(d, t, a, b):
    z = a * d + b
    # t*z + log(1 + exp(-z)) computed stably for both signs of z
    return float(np.sum(np.where(z >= 0, t * z + np.log1p(np.exp(-np.abs(z))),
                                 (t - 1.0) * z + np.log1p(np.exp(-np.abs(z))))))


def fit_platt(decisions, labels, max_iter: int = 100) -> PlattCalibrator:
    """Regularized maximum-likelihood sigmoid fit.

    Newton's method with backtracking on the smoothed targets
    ``(n+ + 1)/(n+ + 2)`` and ``1/(n- + 2)``. The slope is kept
    non-positive so probability never decreases with the decision value;
    if the unconstrained fit wants a positive slope, only the intercept is
    fitted.
    """
    d = np.asarray(decisions, dtype=np.float64).ravel()
    pos = np.asarray(labels).ravel().astype(bool)
    if d.shape != pos.shape:
        raise ValueError("decisions and labels differ in length")
    n_pos = int(pos.sum())
    n_neg = pos.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("Platt scaling needs both classes")
    if np.all(d == d[0]):
        return PlattCalibrator(0.0, math.log(n_neg / n_pos))

    t = np.where(pos, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))
    a, b = 0.0, math.log((n_neg + 1.0) / (n_pos + 1.0))
    fval = _platt_nll(d, t, a, b)
    sigma, min_step = 1e-12, 1e-10
    for _ in range(max_iter):
        p = _sigmoid_neg(a * d + b)
        q = p * (1.0 - p)
        h11 = sigma + np.dot(d * d, q)
        h22 = sigma + q.sum()
        h21 = np.dot(d, q)
        g1 = np.dot(d, t - p)
        g2 = np.sum(t - p)
        if abs(g1) < 1e-5 and abs(g2) < 1e-5:
            break
        det = h11 * h22 - h21 * h21
        da = -(h22 * g1 - h21 * g2) / det
        db = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * da + g2 * db
        step = 1.0
        while step >= min_step:
            na, nb = a + step * da, b + step * db
            nf = _platt_nll(d, t, na, nb)
            if nf < fval + 1e-4 * step * gd:
                a, b, fval = na, nb, nf
                break
            step /= 2.0
        else:
            break
    if a > 0.0:
        mean_t = float(t.mean())
        a, b = 0.0, math.log((1.0 - mean_t) / mean_t)
    return PlattCalibrator(float(a), float(b))


def fit_calibrator(model: LinearModel, decisions: np.ndarray, labels: Sequence[str],
                   max_iter: int = 100) -> PlattCalibrator:
    """Fit the calibrator for ``model`` from (ideally held-out) decisions.

    Multiclass models share one sigmoid across their one-vs-rest scores,
    which keeps the probability ranking identical to the decision ranking.
    """
    labels = np.asarray(list(labels), dtype=object)
    if model.binary:
        return fit_platt(decisions, labels == model.classes[1], max_iter)
    onehot = labels[:, None] == np.array(model.classes, dtype=object)[None, :]
    return fit_platt(np.asarray(decisions).ravel(), onehot.ravel(), max_iter)


def proba_from_decisions(model: LinearModel, calibrator: PlattCalibrator,
                         decisions: np.ndarray) -> np.ndarray:
    p = calibrator(decisions)
    if model.binary:
        return np.column_stack([1.0 - p, p])
    return p / p.sum(axis=1, keepdims=True)


def predict_proba(model: LinearModel, calibrator: PlattCalibrator, X) -> np.ndarray:
    """Class-probability rows, columns in ``model.classes`` order."""
    if isinstance(X, SparseVector):
        X = [X]
    return proba_from_decisions(model, calibrator, model.decision_function(X))
