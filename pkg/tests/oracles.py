"""Independent reference computations used as test oracles.

Nothing here imports the code paths it is used to check.
"""

import itertools
import math
from collections import Counter

import numpy as np


# --- segmentation: exhaustive enumeration ----------------------------------

def seg_score(unigrams, bigrams, total, word, prev):
    if prev is not None and (prev, word) in bigrams and prev in unigrams:
        return math.log(bigrams[(prev, word)] / unigrams[prev])
    if word in unigrams:
        return math.log(unigrams[word] / total)
    return math.log(10.0 / (total * 10.0 ** len(word)))


def seq_score(unigrams, bigrams, total, words):
    s, prev = 0.0, None
    for w in words:
        s += seg_score(unigrams, bigrams, total, w, prev)
        prev = w
    return s


def all_splits(text, max_len):
    n = len(text)
    for mask in range(1 << (n - 1)):
        cuts = [i + 1 for i in range(n - 1) if mask >> i & 1]
        bounds = [0] + cuts + [n]
        words = [text[a:b] for a, b in zip(bounds, bounds[1:])]
        if all(len(w) <= max_len for w in words):
            yield words


def best_split(unigrams, bigrams, total, text, max_len=24):
    """(max score, best split) by brute force over all 2^(L-1) splits."""
    best = None
    for words in all_splits(text, max_len):
        s = seq_score(unigrams, bigrams, total, words)
        if best is None or s > best[0]:
            best = (s, words)
    return best


# --- n-grams: sliding window -----------------------------------------------

def sliding_ngrams(tokens, n_min, n_max):
    low = [t.lower() for t in tokens]
    out = Counter()
    for n in range(n_min, n_max + 1):
        for start in range(0, len(low)):
            window = low[start:start + n]
            if len(window) == n:
                out[" ".join(window)] += 1
    return out


# --- SVM primal QP ---------------------------------------------------------

def svm_l2_qp(X, y, C):
    """min 0.5*(|w|^2 + b^2) + C*sum(xi) s.t. y_i(w.x_i + b) >= 1 - xi, xi >= 0.

    Solved as a generic QP by cvxpy; returns (objective, w, b).
    """
    import cvxpy as cp

    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, d = X.shape
    w = cp.Variable(d)
    b = cp.Variable()
    xi = cp.Variable(n)
    cons = [cp.multiply(y, X @ w + b) >= 1 - xi, xi >= 0]
    prob = cp.Problem(cp.Minimize(0.5 * (cp.sum_squares(w) + cp.square(b)) + C * cp.sum(xi)), cons)
    prob.solve(solver=cp.CLARABEL)
    return prob.value, np.asarray(w.value), float(b.value)


def svm_l2_objective(X, y, C, w, b):
    margins = np.asarray(y) * (np.asarray(X) @ w + b)
    return 0.5 * (np.dot(w, w) + b * b) + C * np.maximum(0.0, 1.0 - margins).sum()


# --- Platt: generic optimizer on the same likelihood ------------------------

def platt_reference(decisions, labels):
    """Regularized-target sigmoid fit via scipy's BFGS; returns (a, b)."""
    from scipy.optimize import minimize

    d = np.asarray(decisions, dtype=float)
    pos = np.asarray(labels, dtype=bool)
    n1, n0 = pos.sum(), (~pos).sum()
    t = np.where(pos, (n1 + 1) / (n1 + 2), 1 / (n0 + 2))

    def nll(p):
        z = p[0] * d + p[1]
        return np.sum(np.logaddexp(0, z) - (1 - t) * z)

    res = minimize(nll, x0=[0.0, math.log((n0 + 1) / (n1 + 1))], method="BFGS",
                   options={"gtol": 1e-10})
    return float(res.x[0]), float(res.x[1])


# --- macro-F1 by definition ------------------------------------------------

def macro_f1_by_definition(gold, pred, classes):
    f1s = []
    for c in classes:
        tp = sum(1 for g, p in zip(gold, pred) if g == c and p == c)
        fp = sum(1 for g, p in zip(gold, pred) if g != c and p == c)
        fn = sum(1 for g, p in zip(gold, pred) if g == c and p != c)
        prec = tp / (tp + fp) if tp + fp > 0 else 0.0
        rec = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1s.append(0.0 if prec + rec == 0 else 2 * prec * rec / (prec + rec))
    return sum(f1s) / len(f1s)


def runs(tokens, token):
    """Lengths of maximal runs of ``token``."""
    return [len(list(g)) for k, g in itertools.groupby(tokens) if k == token]
