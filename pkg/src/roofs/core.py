"""Index sets, the retained-feature row store, and restricted linear algebra.

Conventions used throughout the package:

* designs are stored features-as-rows: a feature is a length-n row over
  all samples, and a design block is (n_features x n_samples);
* sample indices live in [0, n) and are kept sorted and unique;
* feature ids are global and stable -- pruning a feature never renumbers
  the survivors, and a later batch may legally re-deliver the same id.
"""

import numpy as np

__all__ = [
    "SampleIndexSet",
    "FeatureIdSet",
    "FeatureBatch",
    "FeatureStore",
    "SparseCoefficients",
    "StreamInconsistencyError",
    "set_union",
    "predict",
    "residual",
    "restricted_objective",
    "round_half_up",
]


class StreamInconsistencyError(ValueError):
    """A re-delivered feature id carried different values than before."""


def round_half_up(x):
    """Symmetric rounding (0.5 always rounds away from zero toward +inf)."""
    return int(np.floor(x + 0.5))


def _as_sorted_unique(values, name):
    arr = np.asarray(values, dtype=np.int64).ravel()
    if arr.size == 0:
        return arr
    srt = np.sort(arr)
    if np.any(srt[1:] == srt[:-1]):
        raise ValueError(f"{name} contains duplicate entries")
    return srt


class SampleIndexSet:
    """Sorted, duplicate-free set of sample positions in [0, bound).

    Used both for the estimated uncorrupted set and for ground truth;
    ``bound`` is the total sample count n.
    """

    __slots__ = ("indices", "bound")

    def __init__(self, indices, bound):
        arr = _as_sorted_unique(indices, "sample index set")
        if arr.size and (arr[0] < 0 or arr[-1] >= bound):
            raise ValueError(f"sample index out of range [0, {bound})")
        self.indices = arr
        self.bound = int(bound)

    @classmethod
    def full(cls, n):
        return cls(np.arange(n, dtype=np.int64), n)

    @classmethod
    def empty(cls, n):
        return cls(np.empty(0, dtype=np.int64), n)

    def complement(self):
        mask = np.ones(self.bound, dtype=bool)
        mask[self.indices] = False
        return SampleIndexSet(np.nonzero(mask)[0], self.bound)

    def intersection(self, other):
        return SampleIndexSet(np.intersect1d(self.indices, other.indices), self.bound)

    def mask(self):
        m = np.zeros(self.bound, dtype=bool)
        m[self.indices] = True
        return m

    def __len__(self):
        return int(self.indices.size)

    def __iter__(self):
        return iter(self.indices.tolist())

    def __contains__(self, i):
        pos = np.searchsorted(self.indices, i)
        return pos < self.indices.size and self.indices[pos] == i

    def __eq__(self, other):
        return (
            isinstance(other, SampleIndexSet)
            and self.bound == other.bound
            and np.array_equal(self.indices, other.indices)
        )

    def __repr__(self):
        return f"SampleIndexSet(size={len(self)}, bound={self.bound})"


class FeatureIdSet:
    """Sorted, duplicate-free set of global feature identifiers."""

    __slots__ = ("ids",)

    def __init__(self, ids):
        self.ids = _as_sorted_unique(ids, "feature id set")

    @classmethod
    def empty(cls):
        return cls(np.empty(0, dtype=np.int64))

    def __len__(self):
        return int(self.ids.size)

    def __iter__(self):
        return iter(self.ids.tolist())

    def __contains__(self, fid):
        pos = np.searchsorted(self.ids, fid)
        return pos < self.ids.size and self.ids[pos] == fid

    def __eq__(self, other):
        return isinstance(other, FeatureIdSet) and np.array_equal(self.ids, other.ids)

    def __repr__(self):
        return f"FeatureIdSet(size={len(self)})"


def set_union(a, b):
    """Sorted union of two feature id sets."""
    return FeatureIdSet(np.union1d(a.ids, b.ids))


class FeatureBatch:
    """One delivery from the feature pool: ``values[i]`` is the row of
    feature ``ids[i]`` across all n samples."""

    __slots__ = ("batch_index", "ids", "values")

    def __init__(self, batch_index, ids, values):
        ids = ids if isinstance(ids, FeatureIdSet) else FeatureIdSet(ids)
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != len(ids):
            raise ValueError("batch values must be one row per feature id")
        if not np.all(np.isfinite(values)):
            raise ValueError("batch values must be finite")
        self.batch_index = int(batch_index)
        self.ids = ids
        self.values = values

    @property
    def n(self):
        return self.values.shape[1]


class FeatureStore:
    """Keyed row store for the currently retained features.

    Holds only the rows for the retained id set, so the total feature
    pool never has to be resident. ``matrix`` results are cached until
    the store is modified.
    """

    def __init__(self, n):
        self.n = int(n)
        self._rows = {}
        self._cache_key = None
        self._cache_val = None

    def add(self, fid, row):
        row = np.asarray(row, dtype=np.float64)
        if row.shape != (self.n,):
            raise ValueError(f"row for feature {fid} must have length {self.n}")
        fid = int(fid)
        if fid in self._rows:
            if not np.array_equal(self._rows[fid], row):
                raise StreamInconsistencyError(
                    f"feature {fid} re-delivered with different values"
                )
            return
        self._rows[fid] = row
        self._cache_key = None

    def add_batch(self, batch):
        for fid, row in zip(batch.ids.ids, batch.values):
            self.add(fid, row)

    def drop(self, ids):
        for fid in np.asarray(ids, dtype=np.int64).ravel():
            self._rows.pop(int(fid), None)
        self._cache_key = None

    def row(self, fid):
        try:
            return self._rows[int(fid)]
        except KeyError:
            raise KeyError(f"feature {fid} not present in store") from None

    def ids(self):
        return FeatureIdSet(np.fromiter(self._rows.keys(), dtype=np.int64, count=len(self._rows)))

    def __contains__(self, fid):
        return int(fid) in self._rows

    def __len__(self):
        return len(self._rows)

    def matrix(self, ids):
        """Stacked (len(ids) x n) block for the given feature ids."""
        key = ids.ids.tobytes()
        if key == self._cache_key:
            return self._cache_val
        if len(ids) == 0:
            out = np.zeros((0, self.n))
        else:
            try:
                out = np.stack([self._rows[int(f)] for f in ids.ids])
            except KeyError as exc:
                raise KeyError(f"feature {exc.args[0]} not present in store") from None
        self._cache_key = key
        self._cache_val = out
        return out


class SparseCoefficients:
    """Sparse coefficient vector keyed by feature id; zeros are not stored."""

    __slots__ = ("entries",)

    def __init__(self, entries=None):
        self.entries = {}
        if entries:
            for fid, w in dict(entries).items():
                w = float(w)
                if w != 0.0:
                    self.entries[int(fid)] = w

    def get(self, fid, default=0.0):
        return self.entries.get(int(fid), default)

    def support(self):
        return FeatureIdSet(np.fromiter(self.entries.keys(), dtype=np.int64, count=len(self.entries)))

    def to_vector(self, ids):
        """Weights aligned with ``ids`` (missing ids read as 0)."""
        return np.array([self.entries.get(int(f), 0.0) for f in ids.ids])

    @classmethod
    def from_vector(cls, ids, vec):
        return cls({int(f): float(w) for f, w in zip(ids.ids, vec)})

    def norm(self):
        if not self.entries:
            return 0.0
        return float(np.linalg.norm(np.fromiter(self.entries.values(), dtype=np.float64)))

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        return isinstance(other, SparseCoefficients) and self.entries == other.entries

    def __repr__(self):
        return f"SparseCoefficients(nnz={len(self)})"


def predict(store, beta, samples):
    """Predicted responses on the given samples: sum_i beta_i * X[i, j].

    Every feature carrying weight must be present in the store; a missing
    id means the solver state is inconsistent.
    """
    out = np.zeros(len(samples))
    if len(samples) == 0:
        return out
    idx = samples.indices
    for fid, w in beta.entries.items():
        try:
            row = store.row(fid)
        except KeyError:
            raise KeyError(
                f"feature {fid} has weight but no stored row (inconsistent solver state)"
            ) from None
        out += w * row[idx]
    return out


def residual(store, beta, y):
    """Elementwise absolute residual |y - X^T beta| over all n samples."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (store.n,):
        raise ValueError(f"response must have length {store.n}")
    pred = predict(store, beta, SampleIndexSet.full(store.n))
    return np.abs(y - pred)


def restricted_objective(store, beta, y, samples):
    """Squared-error objective restricted to a sample subset."""
    if len(samples) == 0:
        return 0.0
    y = np.asarray(y, dtype=np.float64)
    pred = predict(store, beta, samples)
    diff = y[samples.indices] - pred
    return float(diff @ diff)
