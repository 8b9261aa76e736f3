"""Word n-gram count features over a fitted vocabulary."""

from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

VOCAB_MAGIC = "ngram-vocab v1"


@dataclass(frozen=True)
class SparseVector:
    indices: np.ndarray
    values: np.ndarray
    dim: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.float64)
        if idx.shape != val.shape or idx.ndim != 1:
            raise ValueError("indices and values must be matching 1-D arrays")
        if idx.size and (idx[0] < 0 or idx[-1] >= self.dim or np.any(np.diff(idx) <= 0)):
            raise ValueError("indices must be strictly increasing and inside [0, dim)")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    @classmethod
    def from_dense(cls, x) -> "SparseVector":
        x = np.asarray(x, dtype=np.float64)
        nz = np.flatnonzero(x)
        return cls(nz, x[nz], x.shape[0])

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out

    def __len__(self):
        return self.dim


def stack(vectors: Sequence[SparseVector], dim: int = None) -> sp.csr_matrix:
    """Rows of a CSR matrix from sparse vectors sharing one dimension."""
    if dim is None:
        if not vectors:
            raise ValueError("cannot infer dimension of an empty batch")
        dim = vectors[0].dim
    indptr = [0]
    for v in vectors:
        if v.dim != dim:
            raise ValueError(f"dimension mismatch: {v.dim} != {dim}")
        indptr.append(indptr[-1] + v.indices.size)
    if vectors:
        indices = np.concatenate([v.indices for v in vectors])
        data = np.concatenate([v.values for v in vectors])
    else:
        indices, data = np.zeros(0, np.int64), np.zeros(0)
    return sp.csr_matrix((data, indices, np.asarray(indptr)), shape=(len(vectors), dim))


def ngrams(tokens: Iterable[str], n_min: int, n_max: int) -> Iterator[str]:
    """Lowercased, space-joined n-grams for every n in [n_min, n_max]."""
    toks = [t.lower() for t in tokens]
    for n in range(n_min, n_max + 1):
        for i in range(len(toks) - n + 1):
            yield " ".join(toks[i:i + n])


@dataclass(frozen=True)
class Vocabulary:
    ngram_to_index: Dict[str, int]
    n_range: Tuple[int, int]
    min_df: int = 1

    def __post_init__(self):
        n_min, n_max = self.n_range
        if not 1 <= n_min <= n_max:
            raise ValueError(f"bad n-gram range {self.n_range}")
        if sorted(self.ngram_to_index.values()) != list(range(len(self.ngram_to_index))):
            raise ValueError("vocabulary indices must be 0..size-1 without gaps")

    def __len__(self):
        return len(self.ngram_to_index)

    @property
    def size(self) -> int:
        return len(self.ngram_to_index)

    def save(self, path) -> None:
        n_min, n_max = self.n_range
        items = sorted(self.ngram_to_index.items(), key=lambda kv: kv[1])
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"{VOCAB_MAGIC} {n_min} {n_max} {len(items)}\n")
            for gram, idx in items:
                fh.write(f"{gram}\t{idx}\n")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().split()
            if header[:2] != VOCAB_MAGIC.split() or len(header) != 5:
                raise ValueError(f"{path}: not an n-gram vocabulary file")
            n_min, n_max, size = map(int, header[2:])
            table = {}
            for line in fh:
                gram, idx = line.rstrip("\n").rsplit("\t", 1)
                table[gram] = int(idx)
        if len(table) != size:
            raise ValueError(f"{path}: header says {size} entries, found {len(table)}")
        return cls(table, (n_min, n_max))


def fit_vocabulary(corpus: Sequence[Iterable[str]], n_range=(1, 1), min_df: int = 2) -> Vocabulary:
    if not corpus:
        raise ValueError("cannot fit a vocabulary on an empty corpus")
    n_min, n_max = n_range
    if not 1 <= n_min <= n_max:
        raise ValueError(f"bad n-gram range {n_range}")
    df: Counter = Counter()
    for doc in corpus:
        df.update(set(ngrams(doc, n_min, n_max)))
    kept = sorted(g for g, c in df.items() if c >= min_df)
    return Vocabulary({g: i for i, g in enumerate(kept)}, (n_min, n_max), min_df)


def vectorize(vocab: Vocabulary, tokens: Iterable[str], normalize: bool = True) -> SparseVector:
    counts: Counter = Counter()
    lookup = vocab.ngram_to_index
    for gram in ngrams(tokens, *vocab.n_range):
        idx = lookup.get(gram)
        if idx is not None:
            counts[idx] += 1
    idx = np.array(sorted(counts), dtype=np.int64)
    val = np.array([counts[i] for i in idx], dtype=np.float64)
    if normalize and val.size:
        val /= np.sqrt(np.dot(val, val))
    return SparseVector(idx, val, vocab.size)


def vectorize_many(vocab: Vocabulary, docs: Sequence[Iterable[str]], normalize: bool = True) -> sp.csr_matrix:
    return stack([vectorize(vocab, d, normalize) for d in docs], vocab.size)


def as_matrix(X) -> sp.csr_matrix:
    """Accept a CSR matrix, a dense array or a sequence of SparseVector."""
    if sp.issparse(X):
        return sp.csr_matrix(X, dtype=np.float64)
    if isinstance(X, np.ndarray):
        return sp.csr_matrix(np.atleast_2d(X).astype(np.float64))
    X = list(X)
    if X and isinstance(X[0], SparseVector):
        return stack(X)
    return sp.csr_matrix(np.asarray(X, dtype=np.float64))


def as_rows(X) -> List[SparseVector]:
    M = as_matrix(X).copy()
    M.sum_duplicates()
    M.eliminate_zeros()
    M.sort_indices()
    return [SparseVector(M.indices[M.indptr[i]:M.indptr[i + 1]],
                         M.data[M.indptr[i]:M.indptr[i + 1]], M.shape[1])
            for i in range(M.shape[0])]
