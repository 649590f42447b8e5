"""Dense GF(2) matrices packed 64 columns per numpy uint64 word.

Column c lives in word c // 64 at bit c % 64. Pivots are chosen leftmost first,
so the reduced form depends only on the row space and the column order.
"""
from __future__ import annotations

from typing import Iterable, List, Sequence, Tuple

import numpy as np

WORD_BITS = 64
_ONE = np.uint64(1)


def words_for(ncols: int) -> int:
    return max(1, (ncols + WORD_BITS - 1) // WORD_BITS)


def matrix_bytes(nrows: int, ncols: int) -> int:
    return nrows * words_for(ncols) * 8


def pack_rows(rows: Sequence[Iterable[int]], ncols: int) -> np.ndarray:
    """Rows given as column-index collections; repeated indices cancel."""
    M = np.zeros((len(rows), words_for(ncols)), dtype=np.uint64)
    for r, cols in enumerate(rows):
        for c in cols:
            M[r, c >> 6] ^= _ONE << np.uint64(c & 63)
    return M


def unpack_row(row: np.ndarray) -> List[int]:
    cols = []
    for w, word in enumerate(row.tolist()):
        while word:
            low = word & -word
            cols.append(w * WORD_BITS + low.bit_length() - 1)
            word ^= low
    return cols


def column(M: np.ndarray, col: int) -> np.ndarray:
    return ((M[:, col >> 6] >> np.uint64(col & 63)) & _ONE).astype(bool)


def row_reduce(M: np.ndarray, ncols: int) -> Tuple[np.ndarray, List[int]]:
    """Reduced row echelon form; returns the nonzero rows and their pivot columns."""
    R = M.copy()
    nrows = R.shape[0]
    pivots: List[int] = []
    r = 0
    for col in range(ncols):
        if r == nrows:
            break
        w = col >> 6
        hits = np.flatnonzero(column(R[r:], col))
        if hits.size == 0:
            continue
        found = r + int(hits[0])
        if found != r:
            R[[r, found]] = R[[found, r]]
        mask = column(R, col)
        mask[r] = False
        # columns left of the pivot are already clear in row r
        R[mask, w:] ^= R[r, w:]
        pivots.append(col)
        r += 1
    return R[:r], pivots


def rank(M: np.ndarray, ncols: int) -> int:
    return len(row_reduce(M, ncols)[1])


def reduce_against(rows: np.ndarray, basis: np.ndarray, pivots: Sequence[int]) -> np.ndarray:
    """Residues of `rows` modulo a reduced echelon basis with the given pivots."""
    out = rows.copy()
    if out.shape[0] == 0:
        return out
    for i, col in enumerate(pivots):
        mask = column(out, col)
        if mask.any():
            out[mask] ^= basis[i]
    return out


def nonzero_rows(M: np.ndarray) -> np.ndarray:
    return M[M.any(axis=1)]


def span_rank(vectors: Iterable[int]) -> int:
    """Rank over GF(2) of vectors given as integer bitmasks."""
    basis: List[int] = []
    for v in vectors:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
    return len(basis)
