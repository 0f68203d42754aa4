"""Compiled inner loop of the annealer.

The kernel consumes pre-drawn proposals so that the Python single-step API
and the chunked construction loop follow identical trajectories for the
same random stream.
"""

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def anneal_chunk(Q, D, energy, cols, neg_idx, pos_idx, uniforms, params, metropolis):
    """Apply proposals in order, stopping early once the energy reaches zero.

    Proposal ``s`` swaps the ``neg_idx[s]``-th -1 entry and the
    ``pos_idx[s]``-th +1 entry (counted top-down) of column ``cols[s]``.
    Uphill moves are accepted when ``uniforms[s] > params[s]`` (threshold
    mode) or ``uniforms[s] < exp(-dE / params[s])`` (Metropolis mode).
    ``Q`` and ``D`` are updated in place.  Returns
    ``(proposals_consumed, energy, accepted)``.
    """
    m = Q.shape[0]
    n = cols.shape[0]
    accepted = 0
    for s in range(n):
        if energy == 0:
            return s, energy, accepted
        c = cols[s]
        r1 = -1
        r2 = -1
        seen_neg = 0
        seen_pos = 0
        for r in range(m):
            if Q[r, c] < 0:
                if seen_neg == neg_idx[s]:
                    r1 = r
                seen_neg += 1
            else:
                if seen_pos == pos_idx[s]:
                    r2 = r
                seen_pos += 1
        dE = 0
        for j in range(m):
            if j != c:
                d = 2 * (np.int64(Q[r1, j]) - np.int64(Q[r2, j]))
                if d != 0:
                    dE += abs(D[c, j] + d) - abs(D[c, j])
        # D is symmetric; the column and its mirrored row change together.
        dE *= 2
        if dE <= 0:
            accept = True
        elif metropolis:
            accept = uniforms[s] < np.exp(-dE / params[s])
        else:
            accept = uniforms[s] > params[s]
        if accept:
            for j in range(m):
                if j != c:
                    d = 2 * (np.int64(Q[r1, j]) - np.int64(Q[r2, j]))
                    D[c, j] += d
                    D[j, c] += d
            Q[r1, c] = 1
            Q[r2, c] = -1
            energy += dE
            accepted += 1
    return n, energy, accepted
