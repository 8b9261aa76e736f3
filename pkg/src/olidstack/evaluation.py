"""OLID label schema and file formats, gated multi-task prediction, and
macro-averaged F1 reporting."""

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .preprocess import Preprocessor, Tweet

TASKS = ("A", "B", "C")
LABELS: Dict[str, Tuple[str, ...]] = {
    "A": ("NOT", "OFF"),
    "B": ("TIN", "UNT"),
    "C": ("GRP", "IND", "OTH"),
}
COLUMNS = ("id", "tweet", "subtask_a", "subtask_b", "subtask_c")
NULL = "NULL"
MODES = ("gold-gated", "cascade", "all")


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class Row:
    tweet: Tweet
    a: Optional[str] = None
    b: Optional[str] = None
    c: Optional[str] = None

    def label(self, task: str) -> Optional[str]:
        return {"A": self.a, "B": self.b, "C": self.c}[task]

    def consistent(self) -> bool:
        if self.b is not None and self.a != "OFF":
            return False
        if self.c is not None and self.b != "TIN":
            return False
        return True


@dataclass
class Dataset:
    rows: List[Row] = field(default_factory=list)

    def __post_init__(self):
        ids = [r.tweet.id for r in self.rows]
        dup = sorted(k for k, v in Counter(ids).items() if v > 1)
        if dup:
            raise DatasetError(f"duplicate tweet ids: {', '.join(dup[:10])}")
        bad = [r.tweet.id for r in self.rows if not r.consistent()]
        if bad:
            raise DatasetError(f"hierarchy violation (B needs A=OFF, C needs B=TIN) for ids: {', '.join(bad)}")

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def ids(self) -> List[str]:
        return [r.tweet.id for r in self.rows]

    def labelled(self, task: str) -> "Dataset":
        """Rows that carry a gold label for ``task``."""
        return Dataset([r for r in self.rows if r.label(task) is not None])

    def labels(self, task: str) -> List[Optional[str]]:
        return [r.label(task) for r in self.rows]

    def with_texts(self, texts: Sequence[str]) -> "Dataset":
        return Dataset([Row(Tweet(r.tweet.id, t), r.a, r.b, r.c) for r, t in zip(self.rows, texts)])


def _parse_label(value: str, task: str, where: str) -> Optional[str]:
    if value == NULL:
        return None
    if value not in LABELS[task]:
        raise DatasetError(f"{where}: invalid subtask_{task.lower()} label {value!r}")
    return value


def load_olid(path) -> Dataset:
    """Read an OLID-style TSV.

    The header must start with ``id<TAB>tweet``; any of the three
    ``subtask_*`` columns may follow. ``NULL`` marks an absent label. When
    a parent column is missing from the file, rows with a child label get
    the parent label the hierarchy implies.
    """
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\r\n").split("\t")
        if header[:2] != ["id", "tweet"] or not set(header[2:]) <= set(COLUMNS[2:]) \
                or len(set(header)) != len(header):
            raise DatasetError(f"{path}:1: unexpected header {header!r}")
        tasks = [h[-1].upper() for h in header[2:]]
        for lineno, line in enumerate(fh, 2):
            line = line.rstrip("\r\n")
            if not line:
                continue
            parts = line.split("\t")
            where = f"{path}:{lineno}"
            if len(parts) != len(header):
                raise DatasetError(f"{where}: expected {len(header)} fields, found {len(parts)}")
            if not parts[0]:
                raise DatasetError(f"{where}: empty id")
            labels = {t: _parse_label(v, t, where) for t, v in zip(tasks, parts[2:])}
            # a column absent from the file takes the value its child label implies
            if "B" not in tasks and labels.get("C") is not None:
                labels["B"] = "TIN"
            if "A" not in tasks and labels.get("B") is not None:
                labels["A"] = "OFF"
            rows.append(Row(Tweet(parts[0], parts[1]), labels.get("A"), labels.get("B"), labels.get("C")))
    return Dataset(rows)


def write_olid(dataset: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(COLUMNS) + "\n")
        for r in dataset:
            labels = [x if x is not None else NULL for x in (r.a, r.b, r.c)]
            fh.write("\t".join([r.tweet.id, r.tweet.text] + labels) + "\n")


@dataclass
class EvalReport:
    classes: Tuple[str, ...]
    precision: Dict[str, float]
    recall: Dict[str, float]
    f1: Dict[str, float]
    support: Dict[str, int]
    macro_f1: float
    confusion: np.ndarray
    n: int

    def table(self) -> str:
        """Aligned per-class table with the confusion matrix underneath."""
        width = max(9, *(len(c) for c in self.classes))
        lines = [f"{'class':<{width}} {'prec':>8} {'recall':>8} {'f1':>8} {'support':>8}"]
        for c in self.classes:
            lines.append(f"{c:<{width}} {self.precision[c]:>8.4f} {self.recall[c]:>8.4f} "
                         f"{self.f1[c]:>8.4f} {self.support[c]:>8d}")
        lines.append(f"{'macro':<{width}} {'':>8} {'':>8} {self.macro_f1:>8.4f} {self.n:>8d}")
        lines.append("")
        corner = "gold/pred"
        lines.append(f"{corner:<{width}} " + " ".join(f"{c:>8}" for c in self.classes))
        for c, row in zip(self.classes, self.confusion):
            lines.append(f"{c:<{width}} " + " ".join(f"{int(v):>8d}" for v in row))
        return "\n".join(lines)

    def key_values(self) -> str:
        lines = [f"n={self.n}", f"macro_f1={self.macro_f1:.6f}"]
        for c in self.classes:
            lines += [f"precision.{c}={self.precision[c]:.6f}", f"recall.{c}={self.recall[c]:.6f}",
                      f"f1.{c}={self.f1[c]:.6f}", f"support.{c}={self.support[c]}"]
        return "\n".join(lines)


def macro_f1(gold: Sequence[str], pred: Sequence[str], class_set: Sequence[str]) -> EvalReport:
    """Per-class precision/recall/F1 and their unweighted mean over the
    whole ``class_set``; a class never seen in gold nor pred scores 0."""
    gold, pred = list(gold), list(pred)
    if len(gold) != len(pred):
        raise ValueError(f"{len(gold)} gold labels but {len(pred)} predictions")
    if not gold:
        raise ValueError("nothing to evaluate")
    classes = tuple(class_set)
    index = {c: i for i, c in enumerate(classes)}
    unknown = sorted({x for x in gold + pred if x not in index})
    if unknown:
        raise ValueError(f"labels outside the class set: {unknown}")
    conf = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for g, p in zip(gold, pred):
        conf[index[g], index[p]] += 1
    prec, rec, f1, sup = {}, {}, {}, {}
    for i, c in enumerate(classes):
        tp = int(conf[i, i])
        fp = int(conf[:, i].sum()) - tp
        fn = int(conf[i, :].sum()) - tp
        prec[c] = tp / (tp + fp) if tp + fp else 0.0
        rec[c] = tp / (tp + fn) if tp + fn else 0.0
        f1[c] = 2 * prec[c] * rec[c] / (prec[c] + rec[c]) if prec[c] + rec[c] else 0.0
        sup[c] = tp + fn
    return EvalReport(classes, prec, rec, f1, sup, sum(f1.values()) / len(classes), conf, len(gold))


# --- prediction files ------------------------------------------------------

def write_predictions(path, predictions: Sequence[Tuple[str, str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for tid, label in predictions:
            fh.write(f"{tid}\t{label}\n")


def read_predictions(path) -> Dict[str, str]:
    out: Dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DatasetError(f"{path}:{lineno}: expected 'id<TAB>label'")
            if parts[0] in out:
                raise DatasetError(f"{path}:{lineno}: duplicate id {parts[0]!r}")
            out[parts[0]] = parts[1]
    return out


def evaluate_files(gold_path, pred_path, task: str) -> EvalReport:
    """Score a prediction file against the gold labels of one sub-task.

    Every gold-labelled id must be predicted and no other id may appear.
    """
    gold = load_olid(gold_path).labelled(task)
    pred = read_predictions(pred_path)
    gold_ids = set(gold.ids)
    missing = sorted(gold_ids - pred.keys())
    extra = sorted(pred.keys() - gold_ids)
    if missing or extra:
        raise DatasetError(f"id mismatch: {len(missing)} missing from predictions "
                           f"({', '.join(missing[:5])}), {len(extra)} extra ({', '.join(extra[:5])})")
    return macro_f1(gold.labels(task), [pred[i] for i in gold.ids], LABELS[task])


# --- gated prediction across sub-tasks -------------------------------------

def _gate(task: str, mode: str, dataset: Dataset, done: Mapping[str, Dict[str, str]]) -> List[int]:
    n = len(dataset)
    if task == "A" or mode == "all":
        return list(range(n))
    parent, keep = ("A", "OFF") if task == "B" else ("B", "TIN")
    if mode == "gold-gated":
        return [i for i, r in enumerate(dataset.rows) if r.label(parent) == keep]
    if parent not in done:
        raise ValueError(f"cascade mode needs a task {parent} model to gate task {task}")
    return [i for i, r in enumerate(dataset.rows) if done[parent].get(r.tweet.id) == keep]


def cascade_predict(models: Mapping[str, "EnsembleModel"], dataset: Dataset,
                    externals: Optional[Mapping[str, object]] = None,
                    mode: str = "gold-gated",
                    preprocessor: Optional[Preprocessor] = None) -> Dict[str, List[Tuple[str, str]]]:
    """Run per-task ensembles over ``dataset``.

    ``gold-gated`` predicts B for gold A=OFF rows and C for gold B=TIN rows
    (each sub-task on its own annotated subset); ``cascade`` gates on this
    run's own A/B predictions; ``all`` predicts every row for every task.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if preprocessor is None:
        from .preprocess import default_preprocessor
        preprocessor = default_preprocessor()
    externals = dict(externals or {})
    streams = [preprocessor(r.tweet) for r in dataset]
    done: Dict[str, Dict[str, str]] = {}
    out: Dict[str, List[Tuple[str, str]]] = {}
    for task in TASKS:
        if task not in models:
            continue
        idx = _gate(task, mode, dataset, done)
        if idx:
            labels, _ = models[task].predict_many([streams[i] for i in idx], externals.get(task))
        else:
            labels = []
        out[task] = [(dataset.rows[i].tweet.id, lab) for i, lab in zip(idx, labels)]
        done[task] = dict(out[task])
    return out
