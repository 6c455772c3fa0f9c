"""Codemap linearization for sequence modeling.

Top grids flatten time-frame by time-frame, ascending frequency inside
each frame, with one START symbol in front.  Bottom grids flatten as a
zig-zag over patches: patches follow the top order, cells inside a patch
follow the top order again, and D_F*D_T START symbols keep the two
sequences patch-aligned (sequence position i of the bottom always belongs
to top sequence position i // patch_area).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidConfigError, InvalidInputError, InvalidShapeError


@dataclass(frozen=True)
class HierarchyConfig:
    top_shape: tuple[int, int]
    patch: tuple[int, int]  # (D_F, D_T): bottom cells per top cell

    def __post_init__(self):
        if min(self.top_shape) < 1 or min(self.patch) < 1:
            raise InvalidConfigError("hierarchy shapes must be positive")

    @property
    def bottom_shape(self) -> tuple[int, int]:
        return (self.top_shape[0] * self.patch[0], self.top_shape[1] * self.patch[1])

    @property
    def patch_area(self) -> int:
        return self.patch[0] * self.patch[1]

    @property
    def top_seq_len(self) -> int:
        return self.top_shape[0] * self.top_shape[1] + 1

    @property
    def bottom_seq_len(self) -> int:
        return self.patch_area * self.top_seq_len


@dataclass
class LinearSeq:
    """Token sequence with START symbols (id = n_codes) plus, per token,
    the (freq, time) grid cell it came from (None for START)."""

    tokens: np.ndarray
    origins: list
    n_codes: int

    def __len__(self) -> int:
        return len(self.tokens)


def top_order(shape: tuple[int, int]) -> list[tuple[int, int]]:
    """Grid cells in generation order: per time frame, frequency ascending."""
    f_dim, t_dim = shape
    return [(f, t) for t in range(t_dim) for f in range(f_dim)]


def linearize_top(grid: np.ndarray, n_codes: int) -> LinearSeq:
    grid = np.asarray(grid)
    if grid.ndim != 2:
        raise InvalidShapeError("top grid must be 2-D")
    cells = top_order(grid.shape)
    tokens = np.concatenate([[n_codes], [grid[c] for c in cells]]).astype(np.int64)
    return LinearSeq(tokens=tokens, origins=[None] + cells, n_codes=n_codes)


def delinearize_top(seq: LinearSeq, shape: tuple[int, int]) -> np.ndarray:
    if len(seq) != shape[0] * shape[1] + 1:
        raise InvalidInputError(f"sequence of {len(seq)} tokens does not fit grid {shape}")
    grid = np.empty(shape, dtype=np.int64)
    for token, cell in zip(seq.tokens[1:], top_order(shape)):
        grid[cell] = token
    return grid


def patch_cells(hier: HierarchyConfig) -> list[tuple[int, int]]:
    """All bottom cells in zig-zag order (patches in top order, top order
    within each patch)."""
    d_f, d_t = hier.patch
    cells = []
    for pf, pt in top_order(hier.top_shape):
        for wf, wt in top_order(hier.patch):
            cells.append((pf * d_f + wf, pt * d_t + wt))
    return cells


def linearize_bottom(grid: np.ndarray, hier: HierarchyConfig, n_codes: int) -> LinearSeq:
    grid = np.asarray(grid)
    if grid.shape != hier.bottom_shape:
        raise InvalidShapeError(f"bottom grid {grid.shape} does not match hierarchy {hier.bottom_shape}")
    cells = patch_cells(hier)
    starts = hier.patch_area
    tokens = np.concatenate([[n_codes] * starts, [grid[c] for c in cells]]).astype(np.int64)
    return LinearSeq(tokens=tokens, origins=[None] * starts + cells, n_codes=n_codes)


def delinearize_bottom(seq: LinearSeq, hier: HierarchyConfig) -> np.ndarray:
    if len(seq) != hier.bottom_seq_len:
        raise InvalidInputError(f"sequence of {len(seq)} tokens does not fit hierarchy {hier.bottom_shape}")
    grid = np.empty(hier.bottom_shape, dtype=np.int64)
    for token, cell in zip(seq.tokens[hier.patch_area :], patch_cells(hier)):
        grid[cell] = token
    return grid


def parent_index(i: int, hier: HierarchyConfig) -> int:
    """Top sequence position conditioning bottom sequence position ``i``.

    START positions map to the top START (the "first patch" token).
    """
    if i < 0 or i >= hier.bottom_seq_len:
        raise InvalidInputError(f"bottom position {i} outside sequence of {hier.bottom_seq_len}")
    return i // hier.patch_area


def linearize_mask_top(mask: np.ndarray) -> np.ndarray:
    """Grid mask -> per-sequence-position mask; START is never masked."""
    mask = np.asarray(mask, dtype=bool)
    return np.concatenate([[False], [mask[c] for c in top_order(mask.shape)]])


def linearize_mask_bottom(mask: np.ndarray, hier: HierarchyConfig) -> np.ndarray:
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != hier.bottom_shape:
        raise InvalidShapeError(f"mask {mask.shape} does not match hierarchy {hier.bottom_shape}")
    return np.concatenate([[False] * hier.patch_area, [mask[c] for c in patch_cells(hier)]])
