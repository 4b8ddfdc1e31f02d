"""Independent brute-force reference implementations used by the tests.

These deliberately avoid the vectorized code paths of the package: plain
Python loops, one pixel and one block at a time, so a bug in the fast path
cannot hide in its own reflection.
"""

import math

import numpy as np


def hog_oracle(pixels, cell_size=8, block_size=2, num_bins=9, stride=1, eps=1e-12):
    """Loop-based HOG descriptor: gradients, votes, blocks, normalization."""
    img = np.asarray(pixels, dtype=np.float64)
    height, width = img.shape

    def px(i, j):
        # replicate padding
        return img[min(max(i, 0), height - 1), min(max(j, 0), width - 1)]

    bin_width = 180.0 / num_bins
    cells_y = height // cell_size
    cells_x = width // cell_size
    hist = np.zeros((cells_y, cells_x, num_bins))
    for i in range(cells_y * cell_size):
        for j in range(cells_x * cell_size):
            dx = px(i, j + 1) - px(i, j - 1)
            dy = px(i + 1, j) - px(i - 1, j)
            mag = math.hypot(dx, dy)
            theta = math.degrees(math.atan2(dy, dx)) % 180.0
            if theta >= 180.0:
                theta -= 180.0
            t = (theta - bin_width / 2.0) / bin_width
            base = math.floor(t)
            w_hi = t - base
            lo = int(base) % num_bins
            hi = (lo + 1) % num_bins
            cy, cx = i // cell_size, j // cell_size
            hist[cy, cx, lo] += mag * (1.0 - w_hi)
            hist[cy, cx, hi] += mag * w_hi

    blocks_y = (cells_y - block_size) // stride + 1
    blocks_x = (cells_x - block_size) // stride + 1
    out = []
    for by in range(blocks_y):
        for bx in range(blocks_x):
            vec = []
            for cy in range(block_size):
                for cx in range(block_size):
                    vec.extend(hist[by * stride + cy, bx * stride + cx])
            vec = np.asarray(vec)
            out.append(vec / (np.linalg.norm(vec) + eps))
    return np.concatenate(out)


def ridge_oracle(states, targets, lam):
    """Explicit normal-equations solve (X'X + lam I) W = X'D."""
    X = np.asarray(states, dtype=np.float64)
    D = np.asarray(targets, dtype=np.float64)
    gram = X.T @ X + lam * np.eye(X.shape[1])
    return np.linalg.solve(gram, X.T @ D)
