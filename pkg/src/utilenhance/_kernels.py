"""Compiled per-pixel loops for the hot paths.

Arithmetic here mirrors the plain-numpy float64 formulations bit for bit
(same operation order, no fast-math), so outputs never depend on which
path computed them. Kernels hold no state and release the GIL.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def luma_u8(px, lut_r, lut_g, lut_b):
    """Quantized luma: round-half-to-even of lut_r[R] + lut_g[G] + lut_b[B]."""
    h, w, _ = px.shape
    out = np.empty((h, w), np.uint8)
    for y in range(h):
        for x in range(w):
            t = lut_r[px[y, x, 0]]
            t += lut_g[px[y, x, 1]]
            t += lut_b[px[y, x, 2]]
            r = np.rint(t)
            if r < 0.0:
                r = 0.0
            elif r > 255.0:
                r = 255.0
            out[y, x] = np.uint8(r)
    return out


@njit(cache=True, nogil=True)
def tile_hists(luma, row_tile, col_tile, tiles_y, tiles_x):
    """Per-tile 256-bin luma histograms in one pass; row_tile/col_tile
    assign each coordinate to its tile index."""
    hists = np.zeros((tiles_y, tiles_x, 256), np.int64)
    h, w = luma.shape
    for y in range(h):
        r = row_tile[y]
        for x in range(w):
            hists[r, col_tile[x], luma[y, x]] += 1
    return hists


@njit(cache=True, nogil=True)
def clahe_apply(px, luma, maps, ylo, yhi, wy, xlo, xhi, wx):
    """Bilinear tile-mapping interpolation plus chroma-preserving rescale.

    maps is (tiles_y, tiles_x, 256) float64; (ylo, yhi, wy) / (xlo, xhi,
    wx) give each row/column its bracketing tile indices and blend weight.
    The row blend maps[ylo]*(1-wy) + maps[yhi]*wy is hoisted into a
    per-row table, then each pixel blends the two bracketing column
    tables. Pixels with zero luma take the new luma on all channels.
    """
    h, w, _ = px.shape
    tiles_x = maps.shape[1]
    out = np.empty((h, w, 3), np.uint8)
    row_tbl = np.empty((tiles_x, 256), np.float64)
    for y in range(h):
        a = ylo[y]
        b = yhi[y]
        v_y = wy[y]
        for tx in range(tiles_x):
            for v in range(256):
                row_tbl[tx, v] = maps[a, tx, v] * (1.0 - v_y) + maps[b, tx, v] * v_y
        for x in range(w):
            v = luma[y, x]
            v_x = wx[x]
            m = row_tbl[xlo[x], v] * (1.0 - v_x) + row_tbl[xhi[x], v] * v_x
            if v == 0:
                r = np.rint(m)
                if r < 0.0:
                    r = 0.0
                elif r > 255.0:
                    r = 255.0
                q = np.uint8(r)
                out[y, x, 0] = q
                out[y, x, 1] = q
                out[y, x, 2] = q
            else:
                ratio = m / v
                for c in range(3):
                    r = np.rint(px[y, x, c] * ratio)
                    if r < 0.0:
                        r = 0.0
                    elif r > 255.0:
                        r = 255.0
                    out[y, x, c] = np.uint8(r)
    return out
