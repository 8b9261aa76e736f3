"""Run configuration: a flat ``key = value`` file whose keys mirror the
CLI flags (``k_folds`` <-> ``--k-folds``). Lines starting with ``#`` are
comments."""

from dataclasses import dataclass, fields
from pathlib import Path
from typing import Dict, List, Optional

from .ensemble import PIPELINE_C, ViewSpec, cumulative_views
from .evaluation import MODES, TASKS

HELP = {
    "task": "sub-task to train: A (OFF/NOT), B (TIN/UNT) or C (IND/GRP/OTH)",
    "views": "comma-separated views, e.g. ngram:1-1,...,ngram:1-6,external:bert",
    "reg": "regularization for every SVM: L1, L2 (mSVM-L1 / mSVM-L2 accepted)",
    "C": "inverse regularization strength of the view SVMs",
    "meta_reg": "regularization of the meta SVM (default: same as reg)",
    "meta_C": "C of the meta SVM (default: same as C)",
    "k_folds": "folds used to cross-fit the meta-features",
    "seed": "seed for fold assignment and solver visiting order",
    "min_df": "minimum document frequency of an n-gram",
    "tol": "solver stopping tolerance",
    "max_iter": "maximum solver passes",
    "n_jobs": "threads used to fit views concurrently",
    "train": "training TSV (OLID format)",
    "dev": "optional development TSV; its macro-F1 is printed after training",
    "test": "optional test TSV; its macro-F1 is printed after training",
    "external": "comma-separated external score TSVs (id<TAB>p1[<TAB>p2<TAB>p3])",
    "external_name": "name recorded for an external view added implicitly",
    "emoji_map": "emoji description TSV (default: shipped resource)",
    "emoticons": "emoticon list (default: shipped resource)",
    "unigrams": "unigram frequency list (default: shipped resource)",
    "bigrams": "bigram frequency list (default: shipped resource)",
    "model_dir": "directory the trained ensemble is written to",
    "mode": "gating of B/C predictions: gold-gated, cascade or all",
}


@dataclass
class RunConfig:
    task: str = "A"
    views: str = ",".join(str(v) for v in cumulative_views())
    reg: str = "L2"
    C: float = PIPELINE_C
    meta_reg: Optional[str] = None
    meta_C: Optional[float] = None
    k_folds: int = 5
    seed: int = 0
    min_df: int = 2
    tol: float = 1e-4
    max_iter: int = 1000
    n_jobs: int = 1
    train: Optional[str] = None
    dev: Optional[str] = None
    test: Optional[str] = None
    external: Optional[str] = None
    external_name: str = "external"
    emoji_map: Optional[str] = None
    emoticons: Optional[str] = None
    unigrams: Optional[str] = None
    bigrams: Optional[str] = None
    model_dir: Optional[str] = None
    mode: str = "gold-gated"

    def __post_init__(self):
        self.reg = _norm_reg(self.reg)
        if self.meta_reg is not None:
            self.meta_reg = _norm_reg(self.meta_reg)

    def validate(self, require=("train", "model_dir")) -> None:
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.k_folds < 2:
            raise ValueError("k_folds must be >= 2")
        if not self.C > 0 or (self.meta_C is not None and not self.meta_C > 0):
            raise ValueError("C must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        for key in require:
            if getattr(self, key) is None:
                raise ValueError(f"missing required setting {key!r}")
        for key in ("train", "dev", "test", "emoji_map", "emoticons", "unigrams", "bigrams"):
            value = getattr(self, key)
            if value is not None and not Path(value).is_file():
                raise ValueError(f"{key}: no such file {value!r}")
        for path in self.external_paths():
            if not Path(path).is_file():
                raise ValueError(f"external: no such file {path!r}")
        self.view_specs()

    def external_paths(self) -> List[str]:
        return [p.strip() for p in (self.external or "").split(",") if p.strip()]

    def view_specs(self) -> List[ViewSpec]:
        specs = [ViewSpec.parse(v, self.reg, self.C, self.min_df)
                 for v in self.views.split(",") if v.strip()]
        if self.external_paths() and not any(s.kind == "external" for s in specs):
            specs.append(ViewSpec("external", name=self.external_name, reg=self.reg, C=self.C))
        return specs

    @property
    def effective_meta_reg(self) -> str:
        return self.meta_reg or self.reg

    @property
    def effective_meta_C(self) -> float:
        return self.meta_C if self.meta_C is not None else self.C


def _norm_reg(value: str) -> str:
    v = value.strip()
    if v.lower().startswith("msvm-"):
        v = v[5:]
    v = v.upper()
    if v not in ("L1", "L2"):
        raise ValueError(f"reg must be L1 or L2, got {value!r}")
    return v


def field_types() -> Dict[str, type]:
    out = {}
    for f in fields(RunConfig):
        t = f.type if isinstance(f.type, str) else getattr(f.type, "__name__", "")
        if t in ("", "Optional"):
            t = str(f.type)
        out[f.name] = float if "float" in t else int if "int" in t else str
    return out


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, object]:
    types = field_types()
    values: Dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip().replace("-", "_"), value.strip()
        if not sep or key not in types:
            raise ValueError(f"{source}:{lineno}: unknown or malformed setting {raw.strip()!r}")
        try:
            values[key] = types[key](value)
        except ValueError:
            raise ValueError(f"{source}:{lineno}: bad value for {key}: {value!r}") from None
    return values


def load_config(path=None, overrides: Optional[Dict[str, object]] = None) -> RunConfig:
    values: Dict[str, object] = {}
    if path is not None:
        values.update(parse_config_text(Path(path).read_text(encoding="utf-8"), str(path)))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return RunConfig(**values)
