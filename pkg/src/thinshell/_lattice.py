"""Shared helpers for regular-lattice graph structure on masked 2D rasters."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp


def node_index(mask: np.ndarray) -> np.ndarray:
    """Row-major node numbering of the True cells; -1 elsewhere."""
    idx = -np.ones(mask.shape, dtype=np.int64)
    idx[mask] = np.arange(int(mask.sum()))
    return idx


def lattice_edges(mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs (src, dst) of horizontally/vertically adjacent True cells."""
    ny, nx = mask.shape
    idx = node_index(mask)
    srcs, dsts = [], []
    for dy, dx in ((0, 1), (1, 0)):
        both = mask[:ny - dy, :nx - dx] & mask[dy:, dx:]
        srcs.append(idx[:ny - dy, :nx - dx][both])
        dsts.append(idx[dy:, dx:][both])
    return np.concatenate(srcs), np.concatenate(dsts)


def graph_laplacian(n_nodes: int, src: np.ndarray, dst: np.ndarray,
                    edge_weights: np.ndarray) -> sp.csr_matrix:
    """Weighted graph Laplacian: quadratic form sum_e w_e (phi_src - phi_dst)^2."""
    deg = np.zeros(n_nodes)
    np.add.at(deg, src, edge_weights)
    np.add.at(deg, dst, edge_weights)
    rows = np.concatenate([src, dst, np.arange(n_nodes)])
    cols = np.concatenate([dst, src, np.arange(n_nodes)])
    vals = np.concatenate([-edge_weights, -edge_weights, deg])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n_nodes, n_nodes))


def is_connected(n_nodes: int, src: np.ndarray, dst: np.ndarray) -> bool:
    if n_nodes <= 1:
        return True
    adj = sp.csr_matrix((np.ones(src.size), (src, dst)), shape=(n_nodes, n_nodes))
    ncomp = sp.csgraph.connected_components(adj, directed=False, return_labels=False)
    return int(ncomp) == 1


def grid_gradient(mask: np.ndarray, values: np.ndarray, h: float):
    """Per-cell partial derivatives (d/dx, d/dy) on a masked raster.

    Central differences where both neighbors are inside, one-sided next to the
    staircase boundary; values outside the mask are never read.
    """
    out = []
    for axis in (1, 0):  # x first (columns), then y (rows)
        plus = np.zeros_like(values)
        minus = np.zeros_like(values)
        has_p = np.zeros(mask.shape, dtype=bool)
        has_m = np.zeros(mask.shape, dtype=bool)
        sl_lo = [slice(None), slice(None)]
        sl_hi = [slice(None), slice(None)]
        sl_lo[axis] = slice(None, -1)
        sl_hi[axis] = slice(1, None)
        a, f = tuple(sl_lo), tuple(sl_hi)
        both = mask[a] & mask[f]
        plus[a][both] = values[f][both]
        has_p[a] = both
        minus[f][both] = values[a][both]
        has_m[f] = both
        g = np.zeros_like(values)
        central = has_p & has_m & mask
        g[central] = (plus[central] - minus[central]) / (2.0 * h)
        fwd = has_p & ~has_m & mask
        g[fwd] = (plus[fwd] - values[fwd]) / h
        bwd = ~has_p & has_m & mask
        g[bwd] = (values[bwd] - minus[bwd]) / h
        out.append(g)
    return out[0], out[1]
