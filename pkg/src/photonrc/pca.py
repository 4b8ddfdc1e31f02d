"""Principal component analysis via the covariance method.

Fitting centers the data and eigendecomposes whichever symmetric matrix is
smaller: the D x D covariance Z'Z/(n-1) when n >= D, otherwise the n x n
Gram matrix ZZ'/(n-1), whose eigenvectors u map to covariance eigenvectors
through v = Z'u / sqrt((n-1) mu).  Both routes yield the same subspace;
eigenvalues are clamped at zero and each component's sign is fixed so its
largest-magnitude entry is positive.

The model file is a flat little-endian binary (magic ``RCPCA001``) holding
the sample mean, eigenvalues, components, total variance, and sample count,
all float64, so that saving and loading reproduce the model bit for bit.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParseError, RankError

PCA_MAGIC = b"RCPCA001"
_PCA_HEAD = struct.Struct("<8sQQQd")  # magic, K, D, n_samples, total_variance


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray          # (D,)
    components: np.ndarray    # (K, D), orthonormal rows
    eigenvalues: np.ndarray   # (K,), descending, >= 0
    total_variance: float
    n_samples: int

    @property
    def n_components(self):
        return self.components.shape[0]

    @property
    def feature_dim(self):
        return self.components.shape[1]

    @property
    def explained_variance_ratio(self):
        if self.total_variance == 0.0:
            return np.zeros_like(self.eigenvalues)
        return self.eigenvalues / self.total_variance

    def explained_fraction(self):
        """Fraction of total variance captured by all kept components."""
        return float(np.sum(self.explained_variance_ratio))


def _fix_signs(components):
    # orient each component so its largest-magnitude entry is positive
    idx = np.argmax(np.abs(components), axis=1)
    flip = components[np.arange(components.shape[0]), idx] < 0
    components[flip] *= -1.0
    return components


def fit_pca(data, n_components):
    """Fit a PCA model to ``data`` of shape (n_samples, feature_dim)."""
    X = np.asarray(data, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError("PCA input must be a 2-D array")
    n, dim = X.shape
    if n < 2:
        raise RankError("PCA needs at least two samples")
    k = int(n_components)
    if not 1 <= k <= dim:
        raise DimensionError(f"n_components must lie in [1, {dim}], got {k}")

    mean = X.mean(axis=0)
    Z = X - mean
    denom = n - 1
    total_variance = float(np.einsum("ij,ij->", Z, Z)) / denom

    if n >= dim:
        cov = (Z.T @ Z) / denom
        vals, vecs = np.linalg.eigh(cov)
        order = np.argsort(vals)[::-1][:k]
        eigenvalues = np.maximum(vals[order], 0.0)
        components = vecs[:, order].T.copy()
    else:
        gram = (Z @ Z.T) / denom
        vals, vecs = np.linalg.eigh(gram)
        vals = np.maximum(vals, 0.0)
        tol = max(n, dim) * np.finfo(np.float64).eps * (vals[-1] if vals[-1] > 0 else 1.0)
        rank = int(np.count_nonzero(vals > tol))
        if k > rank:
            raise RankError(
                f"requested {k} components but the centered data has rank {rank}"
            )
        order = np.argsort(vals)[::-1][:k]
        eigenvalues = vals[order]
        # map Gram eigenvectors into feature space and renormalize
        components = (Z.T @ vecs[:, order]).T
        components /= np.sqrt(denom * eigenvalues)[:, None]

    _fix_signs(components)
    return PcaModel(
        mean=mean,
        components=np.ascontiguousarray(components),
        eigenvalues=eigenvalues,
        total_variance=total_variance,
        n_samples=n,
    )


def transform(model, data):
    """Project rows onto the principal axes: (X - mean) @ components'."""
    X = np.asarray(data, dtype=np.float64)
    squeeze = X.ndim == 1
    if squeeze:
        X = X[None, :]
    if X.shape[1] != model.feature_dim:
        raise DimensionError(
            f"data has {X.shape[1]} features, model expects {model.feature_dim}"
        )
    out = (X - model.mean) @ model.components.T
    return out[0] if squeeze else out


def reconstruct(model, projected):
    """Map projected rows back to feature space (lossy unless full rank)."""
    Y = np.asarray(projected, dtype=np.float64)
    squeeze = Y.ndim == 1
    if squeeze:
        Y = Y[None, :]
    if Y.shape[1] != model.n_components:
        raise DimensionError(
            f"projection has {Y.shape[1]} columns, model has {model.n_components}"
        )
    out = Y @ model.components + model.mean
    return out[0] if squeeze else out


def save_pca_model(model, path):
    k, dim = model.components.shape
    with open(path, "wb") as fh:
        fh.write(_PCA_HEAD.pack(PCA_MAGIC, k, dim, model.n_samples, model.total_variance))
        fh.write(np.ascontiguousarray(model.mean, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.eigenvalues, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.components, dtype="<f8").tobytes())


def load_pca_model(path):
    with open(path, "rb") as fh:
        head = fh.read(_PCA_HEAD.size)
        if len(head) < _PCA_HEAD.size:
            raise ParseError(f"{path}: truncated PCA model header")
        magic, k, dim, n_samples, total_variance = _PCA_HEAD.unpack(head)
        if magic != PCA_MAGIC:
            raise ParseError(f"{path}: bad magic {magic!r}")
        body = np.fromfile(fh, dtype="<f8", count=dim + k + k * dim)
    if body.size != dim + k + k * dim:
        raise ParseError(f"{path}: truncated PCA model data")
    mean = body[:dim].copy()
    eigenvalues = body[dim : dim + k].copy()
    components = body[dim + k :].reshape(k, dim).copy()
    return PcaModel(
        mean=mean,
        components=components,
        eigenvalues=eigenvalues,
        total_variance=float(total_variance),
        n_samples=int(n_samples),
    )
