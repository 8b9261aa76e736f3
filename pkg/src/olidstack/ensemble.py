"""Multi-view stacking: word n-gram SVM views plus an optional external
score view, fused by a meta linear SVM trained on out-of-fold features."""

import shutil
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .features import Vocabulary, fit_vocabulary, vectorize_many
from .preprocess import TokenStream
from .svm import (
    LinearModel,
    PlattCalibrator,
    argmax_rows,
    fit_calibrator,
    proba_from_decisions,
    scores_per_class,
    train,
)

ENSEMBLE_MAGIC = "ensemble v1"
PIPELINE_C = 1e-5
MAX_N = 6


class MissingExternalScore(KeyError):
    def __str__(self):
        return self.args[0] if self.args else "missing external score"


@dataclass(frozen=True)
class ViewSpec:
    kind: str
    n_range: Tuple[int, int] = (1, 1)
    name: str = ""
    reg: str = "L2"
    C: float = PIPELINE_C
    min_df: int = 2

    def __post_init__(self):
        if self.kind == "ngram":
            lo, hi = self.n_range
            if not 1 <= lo <= hi <= MAX_N:
                raise ValueError(f"n-gram range must lie within (1, {MAX_N}), got {self.n_range}")
        elif self.kind == "external":
            if not self.name or any(ch.isspace() for ch in self.name):
                raise ValueError("external views need a whitespace-free name")
        else:
            raise ValueError(f"unknown view kind {self.kind!r}")
        if self.reg not in ("L1", "L2") or not self.C > 0:
            raise ValueError("views need reg in {L1, L2} and C > 0")

    @classmethod
    def parse(cls, text: str, reg: str = "L2", C: float = PIPELINE_C, min_df: int = 2) -> "ViewSpec":
        """``ngram:1-6``, ``ngram:3`` (same as 3-3) or ``external:<name>``."""
        kind, _, arg = text.strip().partition(":")
        if kind == "ngram":
            lo, _, hi = arg.partition("-")
            return cls("ngram", (int(lo), int(hi or lo)), reg=reg, C=C, min_df=min_df)
        if kind == "external":
            return cls("external", name=arg, reg=reg, C=C, min_df=min_df)
        raise ValueError(f"cannot parse view spec {text!r}")

    def __str__(self):
        if self.kind == "ngram":
            return f"ngram:{self.n_range[0]}-{self.n_range[1]}"
        return f"external:{self.name}"


def cumulative_views(reg: str = "L2", C: float = PIPELINE_C, min_df: int = 2,
                     max_n: int = MAX_N) -> List[ViewSpec]:
    """Views over n-gram ranges (1,1), (1,2), ... (1,max_n)."""
    return [ViewSpec("ngram", (1, n), reg=reg, C=C, min_df=min_df) for n in range(1, max_n + 1)]


class ExternalScores:
    """Per-tweet probability vectors produced by an outside model."""

    def __init__(self, scores: Dict[str, Sequence[float]]):
        clean: Dict[str, np.ndarray] = {}
        dim = None
        for key, vec in scores.items():
            arr = np.asarray(vec, dtype=np.float64).ravel()
            if dim is None:
                dim = arr.size
            if arr.size != dim or dim == 0:
                raise ValueError(f"score vector for {key!r} has length {arr.size}, expected {dim}")
            if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
                raise ValueError(f"scores for {key!r} must lie in [0, 1]")
            clean[key] = arr
        self.scores = clean
        self.dim = dim or 0

    def __len__(self):
        return len(self.scores)

    def __contains__(self, key):
        return key in self.scores

    def get(self, key: str) -> np.ndarray:
        try:
            return self.scores[key]
        except KeyError:
            raise MissingExternalScore(f"no external score for tweet id {key!r}") from None

    def matrix(self, ids: Sequence[str]) -> np.ndarray:
        missing = [i for i in ids if i not in self.scores]
        if missing:
            shown = ", ".join(missing[:10]) + (" ..." if len(missing) > 10 else "")
            raise MissingExternalScore(f"no external score for {len(missing)} id(s): {shown}")
        if not ids:
            return np.zeros((0, self.dim))
        return np.vstack([self.scores[i] for i in ids])

    @classmethod
    def load(cls, path) -> "ExternalScores":
        scores = {}
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n").split("\t")
            if header[0] != "id" or not 2 <= len(header) <= 4:
                raise ValueError(f"{path}: header must be 'id<TAB>p1[<TAB>p2<TAB>p3]'")
            for lineno, line in enumerate(fh, 2):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != len(header):
                    raise ValueError(f"{path}:{lineno}: expected {len(header)} fields")
                if parts[0] in scores:
                    raise ValueError(f"{path}:{lineno}: duplicate id {parts[0]!r}")
                try:
                    scores[parts[0]] = [float(p) for p in parts[1:]]
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: non-numeric score") from None
        try:
            return cls(scores)
        except ValueError as err:
            raise ValueError(f"{path}: {err}") from None

    @classmethod
    def merge(cls, parts: Sequence["ExternalScores"]) -> "ExternalScores":
        merged: Dict[str, np.ndarray] = {}
        for part in parts:
            for key, vec in part.scores.items():
                if key in merged and not np.array_equal(merged[key], vec):
                    raise ValueError(f"conflicting external scores for id {key!r}")
                merged[key] = vec
        return cls(merged)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\t".join(["id"] + [f"p{i + 1}" for i in range(self.dim)]) + "\n")
            for key, vec in self.scores.items():
                fh.write("\t".join([key] + [repr(float(v)) for v in vec]) + "\n")


@dataclass
class View:
    spec: ViewSpec
    vocab: Vocabulary
    model: LinearModel
    calibrator: PlattCalibrator

    def decisions(self, docs: Sequence[Sequence[str]]) -> np.ndarray:
        return self.model.decision_function(vectorize_many(self.vocab, docs))

    def proba(self, docs: Sequence[Sequence[str]]) -> np.ndarray:
        return proba_from_decisions(self.model, self.calibrator, self.decisions(docs))

    @property
    def width(self) -> int:
        return meta_width(self.model.classes)


def meta_width(classes: Sequence[str]) -> int:
    return 1 if len(classes) == 2 else len(classes)


def meta_columns(proba: np.ndarray) -> np.ndarray:
    """Positive-class column for binary problems, every column otherwise."""
    return proba[:, 1:] if proba.shape[1] == 2 else proba


@dataclass
class EnsembleModel:
    task: str
    classes: Tuple[str, ...]
    views: List[View]
    meta: LinearModel
    meta_calibrator: PlattCalibrator
    external: Optional[ViewSpec] = None
    external_dim: int = 0
    folds: List[List[str]] = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        self.classes = tuple(self.classes)
        if (self.external is None) != (self.external_dim == 0):
            raise ValueError("external view and external_dim disagree")
        if self.meta.dim != self.meta_dim:
            raise ValueError(f"meta model has {self.meta.dim} inputs, views supply {self.meta_dim}")

    @property
    def meta_dim(self) -> int:
        return sum(v.width for v in self.views) + self.external_dim

    def meta_features(self, streams: Sequence[TokenStream],
                      external: Optional[ExternalScores] = None) -> np.ndarray:
        return build_meta_features(self.views, external if self.external_dim else None,
                                   streams, self.external_dim)

    def decision_function(self, streams, external=None) -> np.ndarray:
        return self.meta.decision_function(self.meta_features(streams, external))

    def predict_many(self, streams: Sequence[TokenStream],
                     external: Optional[ExternalScores] = None):
        """Labels and meta probability rows for a batch of token streams."""
        dec = self.decision_function(streams, external)
        labels = [self.meta.classes[i] for i in argmax_rows(scores_per_class(dec))]
        return labels, proba_from_decisions(self.meta, self.meta_calibrator, dec)

    def without_view(self, index: int) -> "EnsembleModel":
        """Drop one n-gram view together with its meta-feature columns."""
        start = sum(v.width for v in self.views[:index])
        stop = start + self.views[index].width
        keep = np.r_[0:start, stop:self.meta.dim]
        meta = replace(self.meta, weights=self.meta.weights[:, keep].copy(),
                       objective_trace=[])
        views = self.views[:index] + self.views[index + 1:]
        return replace(self, views=views, meta=meta, folds=[])

    def save(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        for stale in d.glob("view_*"):
            if stale.is_dir():
                shutil.rmtree(stale)
        lines = [ENSEMBLE_MAGIC, f"task {self.task or '-'}", f"classes {' '.join(self.classes)}",
                 f"external_dim {self.external_dim}"]
        for i, view in enumerate(self.views):
            s = view.spec
            lines.append(f"view {s.kind} {s.n_range[0]} {s.n_range[1]} {s.reg} {s.C!r} {s.min_df}")
            vd = d / f"view_{i}"
            vd.mkdir(exist_ok=True)
            view.vocab.save(vd / "vocab.txt")
            view.model.save(vd / "model.txt")
            view.calibrator.save(vd / "platt.txt")
        if self.external is not None:
            lines.append(f"external {self.external.name}")
        (d / "meta").mkdir(exist_ok=True)
        self.meta.save(d / "meta" / "model.txt")
        self.meta_calibrator.save(d / "meta" / "platt.txt")
        with open(d / "manifest.txt", "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, directory) -> "EnsembleModel":
        d = Path(directory)
        manifest = d / "manifest.txt"
        if not manifest.is_file():
            raise ValueError(f"{d}: no manifest.txt, not an ensemble directory")
        with open(manifest, encoding="utf-8") as fh:
            lines = [ln.split() for ln in fh.read().splitlines() if ln.strip()]
        if not lines or " ".join(lines[0]) != ENSEMBLE_MAGIC:
            raise ValueError(f"{manifest}: unsupported manifest version {' '.join(lines[0]) if lines else ''!r}")
        task, classes, external, external_dim, views = "", (), None, 0, []
        for parts in lines[1:]:
            key = parts[0]
            if key == "task":
                task = "" if parts[1] == "-" else parts[1]
            elif key == "classes":
                classes = tuple(parts[1:])
            elif key == "external_dim":
                external_dim = int(parts[1])
            elif key == "external":
                external = ViewSpec("external", name=parts[1])
            elif key == "view":
                _, kind, lo, hi, reg, C, min_df = parts
                spec = ViewSpec(kind, (int(lo), int(hi)), reg=reg, C=float(C), min_df=int(min_df))
                vd = d / f"view_{len(views)}"
                views.append(View(spec, Vocabulary.load(vd / "vocab.txt"),
                                  LinearModel.load(vd / "model.txt"),
                                  PlattCalibrator.load(vd / "platt.txt")))
            else:
                raise ValueError(f"{manifest}: unknown key {key!r}")
        return cls(task, classes, views, LinearModel.load(d / "meta" / "model.txt"),
                   PlattCalibrator.load(d / "meta" / "platt.txt"), external, external_dim)


def build_meta_features(views: Sequence[View], external: Optional[ExternalScores],
                        streams: Sequence[TokenStream], external_dim: int = None) -> np.ndarray:
    """Concatenate view probabilities (in view order) and external scores."""
    if isinstance(streams, TokenStream):
        streams = [streams]
    docs = [s.tokens for s in streams]
    blocks = [meta_columns(v.proba(docs)) for v in views]
    if external_dim is None:
        external_dim = external.dim if external is not None else 0
    if external_dim:
        if external is None:
            raise MissingExternalScore("this ensemble needs external scores")
        if external.dim != external_dim:
            raise ValueError(f"external scores have {external.dim} columns, expected {external_dim}")
        blocks.append(external.matrix([s.source_id for s in streams]))
    width = sum(v.width for v in views) + external_dim
    if not blocks:
        return np.zeros((len(docs), 0))
    out = np.hstack(blocks)
    assert out.shape == (len(docs), width), "meta-feature dimension drift"
    return out


def stratified_folds(labels: Sequence[str], k: int, seed: int = 0) -> np.ndarray:
    """Fold index per instance; every class is dealt round-robin over the
    folds after a seeded shuffle, so each class with at least two members
    appears in every training complement."""
    labels = np.asarray(list(labels), dtype=object)
    rng = np.random.default_rng(seed)
    fold = np.empty(labels.size, dtype=np.int64)
    offset = 0
    for cls in sorted(set(labels.tolist())):
        members = np.flatnonzero(labels == cls)
        members = members[rng.permutation(members.size)]
        fold[members] = (offset + np.arange(members.size)) % k
        offset = (offset + members.size) % k
    return fold


def _fit_view(spec: ViewSpec, docs, labels, fold, k, tol, max_iter, seed) -> Tuple[View, np.ndarray]:
    n = len(docs)
    oof = None
    for f in range(k):
        tr = np.flatnonzero(fold != f)
        te = np.flatnonzero(fold == f)
        if te.size == 0:
            continue
        vocab = fit_vocabulary([docs[i] for i in tr], spec.n_range, spec.min_df)
        model = train(vectorize_many(vocab, [docs[i] for i in tr]), [labels[i] for i in tr],
                      spec.reg, spec.C, tol, max_iter, seed)
        dec = model.decision_function(vectorize_many(vocab, [docs[i] for i in te]))
        if oof is None:
            oof = np.zeros((n,) + dec.shape[1:])
        oof[te] = dec
    vocab = fit_vocabulary(docs, spec.n_range, spec.min_df)
    model = train(vectorize_many(vocab, docs), labels, spec.reg, spec.C, tol, max_iter, seed)
    calibrator = fit_calibrator(model, oof, labels)
    view = View(spec, vocab, model, calibrator)
    return view, meta_columns(proba_from_decisions(model, calibrator, oof))


def train_ensemble(corpus: Sequence[TokenStream], labels: Sequence[str],
                   view_specs: Optional[Sequence[ViewSpec]] = None,
                   external: Optional[ExternalScores] = None,
                   external_spec: Optional[ViewSpec] = None,
                   k_folds: int = 5, meta_reg: str = "L2", meta_C: float = PIPELINE_C,
                   seed: int = 0, tol: float = 1e-4, max_iter: int = 1000,
                   task: str = "", n_jobs: int = 1) -> EnsembleModel:
    """Train every view on all data and the meta SVM on cross-fitted
    view probabilities.

    Training rows are put in id order first, so the result does not depend
    on the order of ``corpus``. Each row's meta-features come from view
    models trained on the other ``k_folds - 1`` folds; view calibrators are
    fitted on those same held-out decisions. External scores are taken as
    given. ``n_jobs > 1`` fits views on threads; the output is identical.
    """
    if view_specs is None:
        view_specs = cumulative_views()
    view_specs = list(view_specs)
    if any(s.kind == "external" for s in view_specs):
        ext = [s for s in view_specs if s.kind == "external"]
        if len(ext) > 1 or (external_spec is not None and external_spec != ext[0]):
            raise ValueError("at most one external view is supported")
        external_spec = ext[0]
        view_specs = [s for s in view_specs if s.kind == "ngram"]
    if external is not None and external_spec is None:
        external_spec = ViewSpec("external", name="external")
    if external_spec is not None and external is None:
        raise MissingExternalScore(f"view {external_spec} configured but no external scores given")
    if k_folds < 2:
        raise ValueError("k_folds must be at least 2")
    corpus = list(corpus)
    labels = list(labels)
    if len(corpus) != len(labels):
        raise ValueError(f"{len(corpus)} token streams but {len(labels)} labels")
    ids = [s.source_id for s in corpus]
    if any(not i for i in ids) or len(set(ids)) != len(ids):
        raise ValueError("token streams need unique, non-empty source ids")
    order = sorted(range(len(ids)), key=ids.__getitem__)
    corpus = [corpus[i] for i in order]
    labels = [labels[i] for i in order]
    ids = [ids[i] for i in order]

    classes = tuple(sorted(set(labels)))
    if len(classes) < 2:
        raise ValueError("training labels contain a single class")
    rare = [c for c in classes if labels.count(c) < 2]
    if rare:
        raise ValueError(f"cannot stratify {k_folds} folds: class(es) {rare} have fewer than 2 instances")
    fold = stratified_folds(labels, k_folds, seed)
    docs = [s.tokens for s in corpus]

    def fit(spec):
        return _fit_view(spec, docs, labels, fold, k_folds, tol, max_iter, seed)

    if n_jobs > 1 and len(view_specs) > 1:
        with ThreadPoolExecutor(max_workers=min(n_jobs, len(view_specs))) as pool:
            fitted = list(pool.map(fit, view_specs))
    else:
        fitted = [fit(s) for s in view_specs]

    blocks = [cols for _, cols in fitted]
    external_dim = 0
    if external is not None:
        blocks.append(external.matrix(ids))
        external_dim = external.dim
    if not blocks:
        raise ValueError("an ensemble needs at least one view")
    meta_X = np.hstack(blocks)
    meta = train(meta_X, labels, meta_reg, meta_C, tol, max_iter, seed)
    meta_cal = fit_calibrator(meta, meta.decision_function(meta_X), labels)
    folds = [[ids[i] for i in np.flatnonzero(fold == f)] for f in range(k_folds)]
    return EnsembleModel(task, classes, [v for v, _ in fitted], meta, meta_cal,
                         external_spec, external_dim, folds)


def predict(ensemble: EnsembleModel, tokens: TokenStream,
            external: Optional[ExternalScores] = None):
    labels, proba = ensemble.predict_many([tokens], external)
    return labels[0], proba[0]

