"""Linear readout layer: one-hot targets, ridge training, NMSE diagnostics.

The readout is the only trained part of the machine.  Given reservoir
states X (one row per frame) and one-hot targets D over the six classes,
training solves the regularized normal equations

    (X'X + lambda I) W = X'D

and the readout output is y = X W.  When the reservoir runs in the phase
variant, the detector sees intensities rather than phases, so the readout
reads f(x) = q10(sin^2 x) of the state; that choice is recorded on the
model as its feature transform and applied automatically.

For wide state matrices (more nodes than frames) the equations are solved
through the dual system (XX' + lambda I) A = D with W = X'A, which
satisfies the same normal equations exactly and yields the minimum-norm
interpolator at lambda = 0.  Either route must leave a relative residual
of at most 1e-6 or training fails with SingularError.
"""

import struct
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import (
    DegenerateTargetError,
    DimensionError,
    LabelError,
    ParseError,
    SingularError,
)
from .reservoir import quantize_intensity

N_CLASSES = 6
RESIDUAL_RTOL = 1e-6
DEFAULT_LAMBDA_SCALE = 1e-4  # lambda = scale * trace(X'X) / N when unspecified

TRANSFORM_RAW = "raw"
TRANSFORM_NONLINEAR_PHASE = "nonlinear-phase"
_TRANSFORMS = (TRANSFORM_RAW, TRANSFORM_NONLINEAR_PHASE)


@dataclass(frozen=True)
class TargetEncoding:
    targets: np.ndarray         # (T, 6) of {0.0, 1.0}, one-hot rows
    class_of_frame: np.ndarray  # (T,) int class indices


def encode_targets(frame_classes, n_classes=N_CLASSES):
    """One-hot encode per-frame class indices (0-based)."""
    classes = np.asarray(list(frame_classes), dtype=np.int64)
    if classes.ndim != 1:
        raise DimensionError("frame classes must form a 1-D sequence")
    if classes.size and (classes.min() < 0 or classes.max() >= n_classes):
        bad = classes[(classes < 0) | (classes >= n_classes)][0]
        raise LabelError(f"class index {bad} outside [0, {n_classes})")
    targets = np.zeros((classes.size, n_classes))
    targets[np.arange(classes.size), classes] = 1.0
    return TargetEncoding(targets=targets, class_of_frame=classes)


@dataclass(frozen=True)
class ReadoutModel:
    weights: np.ndarray  # (M, N): output = states @ weights.T
    ridge_lambda: float
    feature_transform: str = TRANSFORM_RAW

    def __post_init__(self):
        if self.feature_transform not in _TRANSFORMS:
            raise ValueError(f"unknown feature transform {self.feature_transform!r}")
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("readout weights must be finite")

    @property
    def n_outputs(self):
        return self.weights.shape[0]

    @property
    def n_features(self):
        return self.weights.shape[1]


def _transform_states(states, feature_transform):
    if feature_transform == TRANSFORM_NONLINEAR_PHASE:
        s = np.sin(states)
        return quantize_intensity(s * s)
    return states


def default_lambda(states):
    """Scale-adaptive default: 1e-4 * trace(X'X) / N."""
    X = np.asarray(states, dtype=np.float64)
    return DEFAULT_LAMBDA_SCALE * float(np.einsum("ij,ij->", X, X)) / X.shape[1]


def train_ridge(states, targets, ridge_lambda=None, feature_transform=TRANSFORM_RAW):
    """Fit the readout weights by ridge regression.

    ``ridge_lambda=None`` picks the scale-adaptive default; 0 is exact
    least squares (minimum-norm when the system is underdetermined).
    """
    X = np.asarray(states, dtype=np.float64)
    D = np.asarray(targets, dtype=np.float64)
    if X.ndim != 2 or D.ndim != 2:
        raise DimensionError("states and targets must be 2-D")
    if X.shape[0] != D.shape[0]:
        raise DimensionError(
            f"{X.shape[0]} state rows vs {D.shape[0]} target rows"
        )
    if X.shape[0] < 1:
        raise DimensionError("need at least one training row")
    X = _transform_states(X, feature_transform)
    if ridge_lambda is None:
        ridge_lambda = default_lambda(X)
    lam = float(ridge_lambda)
    if lam < 0:
        raise ValueError("ridge_lambda must be nonnegative")

    n_rows, n_feat = X.shape
    rhs = X.T @ D
    try:
        if n_rows >= n_feat:
            gram = X.T @ X
            gram[np.diag_indices_from(gram)] += lam
            W = linalg.solve(gram, rhs, assume_a="pos")
        else:
            gram = X @ X.T
            gram[np.diag_indices_from(gram)] += lam
            W = X.T @ linalg.solve(gram, D, assume_a="pos")
    except linalg.LinAlgError as exc:
        raise SingularError(f"regularized system not solvable: {exc}") from exc
    if not np.all(np.isfinite(W)):
        raise SingularError("regularized solve produced non-finite weights")

    # the contract is on the primal normal equations, whichever route ran
    residual = np.linalg.norm((X.T @ (X @ W)) + lam * W - rhs)
    denom = max(np.linalg.norm(rhs), np.finfo(np.float64).tiny)
    if residual > RESIDUAL_RTOL * denom:
        raise SingularError(
            f"normal-equations residual {residual / denom:.3e} exceeds {RESIDUAL_RTOL:.0e}"
        )
    return ReadoutModel(
        weights=np.ascontiguousarray(W.T),
        ridge_lambda=lam,
        feature_transform=feature_transform,
    )


def apply_readout(model, states):
    """Evaluate y = X W' after the model's feature transform."""
    X = np.asarray(states, dtype=np.float64)
    squeeze = X.ndim == 1
    if squeeze:
        X = X[None, :]
    if X.shape[1] != model.n_features:
        raise DimensionError(
            f"states have {X.shape[1]} columns, model expects {model.n_features}"
        )
    X = _transform_states(X, model.feature_transform)
    out = X @ model.weights.T
    return out[0] if squeeze else out


def nmse(outputs, desired):
    """Mean squared error normalized by target variance (0 = perfect, 1 = mean)."""
    y = np.asarray(outputs, dtype=np.float64).ravel()
    d = np.asarray(desired, dtype=np.float64).ravel()
    if y.shape != d.shape:
        raise DimensionError("output and target lengths differ")
    if d.size < 2:
        raise DimensionError("NMSE needs at least two samples")
    var = float(np.mean((d - d.mean()) ** 2))
    if var == 0.0:
        raise DegenerateTargetError("target signal is constant")
    return float(np.mean((y - d) ** 2)) / var


def nmse_per_output(outputs, desired):
    """NMSE column by column; constant target columns yield NaN."""
    Y = np.atleast_2d(np.asarray(outputs, dtype=np.float64))
    D = np.atleast_2d(np.asarray(desired, dtype=np.float64))
    if Y.shape != D.shape:
        raise DimensionError("output and target shapes differ")
    out = np.empty(Y.shape[1])
    for j in range(Y.shape[1]):
        try:
            out[j] = nmse(Y[:, j], D[:, j])
        except DegenerateTargetError:
            out[j] = np.nan
    return out


# ---------------------------------------------------------------------------
# Model files

READOUT_MAGIC = b"RCOUT001"
_OUT_HEAD = struct.Struct("<8sQQdI")  # magic, M, N, lambda, transform code
_TRANSFORM_CODES = {TRANSFORM_RAW: 0, TRANSFORM_NONLINEAR_PHASE: 1}
_TRANSFORM_NAMES = {v: k for k, v in _TRANSFORM_CODES.items()}


def save_readout_model(model, path):
    m, n = model.weights.shape
    code = _TRANSFORM_CODES[model.feature_transform]
    with open(path, "wb") as fh:
        fh.write(_OUT_HEAD.pack(READOUT_MAGIC, m, n, model.ridge_lambda, code))
        fh.write(np.ascontiguousarray(model.weights, dtype="<f8").tobytes())


def load_readout_model(path):
    with open(path, "rb") as fh:
        head = fh.read(_OUT_HEAD.size)
        if len(head) < _OUT_HEAD.size:
            raise ParseError(f"{path}: truncated readout model header")
        magic, m, n, lam, code = _OUT_HEAD.unpack(head)
        if magic != READOUT_MAGIC:
            raise ParseError(f"{path}: bad magic {magic!r}")
        if code not in _TRANSFORM_NAMES:
            raise ParseError(f"{path}: unknown feature-transform code {code}")
        data = np.fromfile(fh, dtype="<f8", count=m * n)
    if data.size != m * n:
        raise ParseError(f"{path}: truncated readout weights")
    return ReadoutModel(
        weights=data.reshape(m, n).copy(),
        ridge_lambda=float(lam),
        feature_transform=_TRANSFORM_NAMES[code],
    )
