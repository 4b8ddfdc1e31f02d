"""Histogram-of-oriented-gradients descriptor for grayscale frames.

Gradients come from the centered-difference kernels (-1, 0, 1) and its
transpose with replicate padding at the borders.  Orientations fold into
[0, 180) degrees (gradient sign ignored) and gradient magnitudes vote into
evenly spaced bins; each pixel splits its vote linearly between the two
nearest bin centers, wrapping between the last and first (with 9 bins the
centers sit at 10, 30, ..., 170 degrees).  Votes aggregate over square
cells, partial cells at the right/bottom border are truncated, and blocks
of cells at a configurable stride are each L2-normalized with
v / (||v|| + eps).

A 160x120 frame under the default config gives 20x15 cells, 19x14 blocks,
and a descriptor of 19 * 14 * 4 * 9 = 9576 values.  The layout tuple is
(19, 14, 4, 9): block columns, block rows, cells per block, bins; the
value array itself is ordered row-major by (block row, block column, cell,
bin).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError


@dataclass(frozen=True)
class HogConfig:
    cell_size: int = 8        # pixels per cell edge
    block_size: int = 2       # cells per block edge
    num_bins: int = 9
    block_stride: int = 1     # cells between block origins
    normalization_epsilon: float = 1e-12

    def __post_init__(self):
        if self.cell_size < 2:
            raise ValueError("cell_size must be at least 2")
        if self.num_bins < 2:
            raise ValueError("num_bins must be at least 2")
        if self.block_size < 1:
            raise ValueError("block_size must be at least 1")
        if self.block_stride < 1:
            raise ValueError("block_stride must be at least 1")
        if self.normalization_epsilon <= 0:
            raise ValueError("normalization_epsilon must be positive")

    @property
    def bin_width(self):
        return 180.0 / self.num_bins


DEFAULT_CONFIG = HogConfig()


def gradient(pixels):
    """Centered-difference gradients with replicate edge padding.

    Returns (dx, dy) as float64 arrays shaped like the input; dx is the
    horizontal derivative (columns), dy the vertical (rows).
    """
    img = np.asarray(pixels, dtype=np.float64)
    if img.ndim != 2:
        raise DimensionError("frame must be a 2-D grayscale array")
    if img.shape[0] < 3 or img.shape[1] < 3:
        raise DimensionError(
            f"frame {img.shape[0]}x{img.shape[1]} smaller than the 3-pixel kernel support"
        )
    dx = np.empty_like(img)
    dx[:, 1:-1] = img[:, 2:] - img[:, :-2]
    dx[:, 0] = img[:, 1] - img[:, 0]
    dx[:, -1] = img[:, -1] - img[:, -2]
    dy = np.empty_like(img)
    dy[1:-1, :] = img[2:, :] - img[:-2, :]
    dy[0, :] = img[1, :] - img[0, :]
    dy[-1, :] = img[-1, :] - img[-2, :]
    return dx, dy


def gradient_field(pixels):
    """Per-pixel (magnitude, orientation-in-degrees) with angles in [0, 180)."""
    dx, dy = gradient(pixels)
    mag = np.hypot(dx, dy)
    theta = np.degrees(np.arctan2(dy, dx)) % 180.0
    theta = np.where(theta >= 180.0, theta - 180.0, theta)  # mod can emit 180.0 exactly
    return mag, theta


def cell_histograms(pixels, config=DEFAULT_CONFIG):
    """Per-cell orientation histograms, shape (cells_y, cells_x, num_bins).

    Pixels beyond the last full cell (right/bottom border) do not vote.
    """
    img = np.asarray(pixels, dtype=np.float64)
    if img.ndim != 2:
        raise DimensionError("frame must be a 2-D grayscale array")
    height, width = img.shape
    cell = config.cell_size
    cells_y = height // cell
    cells_x = width // cell
    if cells_y < config.block_size or cells_x < config.block_size:
        raise DimensionError(
            f"frame {height}x{width} holds no full "
            f"{config.block_size}x{config.block_size}-cell block"
        )

    mag, theta = gradient_field(img)
    # truncate partial cells at the right/bottom border
    mag = mag[: cells_y * cell, : cells_x * cell]
    theta = theta[: cells_y * cell, : cells_x * cell]

    # split each vote between the two nearest bin centers (wrapping)
    first_center = config.bin_width / 2.0
    t = (theta - first_center) / config.bin_width
    base = np.floor(t)
    w_hi = t - base
    bin_lo = base.astype(np.int64) % config.num_bins
    bin_hi = (bin_lo + 1) % config.num_bins

    cell_row = np.arange(cells_y * cell) // cell
    cell_col = np.arange(cells_x * cell) // cell
    cell_id = cell_row[:, None] * cells_x + cell_col[None, :]

    n_slots = cells_y * cells_x * config.num_bins
    hist = np.bincount(
        (cell_id * config.num_bins + bin_lo).ravel(),
        weights=(mag * (1.0 - w_hi)).ravel(),
        minlength=n_slots,
    )
    hist += np.bincount(
        (cell_id * config.num_bins + bin_hi).ravel(),
        weights=(mag * w_hi).ravel(),
        minlength=n_slots,
    )
    return hist.reshape(cells_y, cells_x, config.num_bins)


def _block_grid(cells_y, cells_x, config):
    blocks_y = (cells_y - config.block_size) // config.block_stride + 1
    blocks_x = (cells_x - config.block_size) // config.block_stride + 1
    return blocks_y, blocks_x


def hog_descriptor(pixels, config=DEFAULT_CONFIG):
    """Compute the descriptor of one frame.

    Returns ``(values, layout)``: a flat float64 array plus the layout
    tuple (blocks_x, blocks_y, cells_per_block, bins).
    """
    hist = cell_histograms(pixels, config)
    cells_y, cells_x = hist.shape[:2]
    blocks_y, blocks_x = _block_grid(cells_y, cells_x, config)
    b = config.block_size
    stride = config.block_stride

    cpb = b * b
    blocks = np.empty((blocks_y, blocks_x, cpb, config.num_bins))
    for cy in range(b):
        for cx in range(b):
            blocks[:, :, cy * b + cx] = hist[
                cy : cy + stride * blocks_y : stride,
                cx : cx + stride * blocks_x : stride,
            ]

    norms = np.sqrt(np.einsum("yxcb,yxcb->yx", blocks, blocks))
    blocks /= (norms + config.normalization_epsilon)[:, :, None, None]

    layout = (blocks_x, blocks_y, cpb, config.num_bins)
    return blocks.reshape(-1), layout


def descriptor_layout(resolution, config=DEFAULT_CONFIG):
    """Layout tuple for frames of the given (height, width), without pixels."""
    height, width = resolution
    cells_y = height // config.cell_size
    cells_x = width // config.cell_size
    if cells_y < config.block_size or cells_x < config.block_size:
        raise DimensionError(f"frame {height}x{width} holds no full block")
    blocks_y, blocks_x = _block_grid(cells_y, cells_x, config)
    return (blocks_x, blocks_y, config.block_size**2, config.num_bins)


def feature_count(resolution, config=DEFAULT_CONFIG):
    layout = descriptor_layout(resolution, config)
    return int(np.prod(layout))


def hog_stack(frames, config=DEFAULT_CONFIG):
    """Descriptors for an iterable of frame arrays, stacked as (n, D) float64."""
    rows = []
    layout = None
    for pixels in frames:
        values, layout = hog_descriptor(pixels, config)
        rows.append(values)
    if not rows:
        raise DimensionError("no frames to describe")
    return np.vstack(rows), layout
