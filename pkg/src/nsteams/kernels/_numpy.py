"""Pure-numpy implementations of the hot kernels.

These are the fallback path selected by ``NSTEAMS_BACKEND=numpy``; the
numba path must produce bit-identical outputs (asserted in tests and in
the benchmark).
"""

from __future__ import annotations

import numpy as np

from .common import radix_weights


def solve_batch(y_stack, u_codes, pol_block, y_dims):
    """Closed-loop solutions for a policy batch.

    Returns (B, n_omega) int32: the flat index of the unique fixed point,
    -1 when there is none, -2 when there are several.
    """
    n, n_omega, n_u = y_stack.shape
    b = pol_block.shape[0]
    acc = np.ones((b, n_omega, n_u), dtype=bool)
    for i in range(n):
        # pol_block[:, i, :][b, y_stack[i]] -> (B, n_omega, n_u)
        chosen = pol_block[:, i, :][:, y_stack[i]]
        acc &= chosen == u_codes[:, i][None, None, :]
    counts = acc.sum(axis=2)
    first = acc.argmax(axis=2).astype(np.int32)
    sol = np.where(counts == 1, first, np.where(counts == 0, -1, -2)).astype(np.int32)
    return sol


def j_numerators(sol, prior_num, cost_num, support):
    """Integer cost numerators per policy; ok=False where unsolvable on support.

    Caller guarantees the accumulation fits in int64.
    """
    b, n_omega = sol.shape
    ok = ~((sol < 0) & support[None, :]).any(axis=1)
    safe = np.clip(sol, 0, None)
    gathered = np.take_along_axis(
        np.broadcast_to(cost_num, (b, *cost_num.shape)), safe[:, :, None], axis=2
    )[:, :, 0]
    weighted = gathered * prior_num[None, :]
    weighted = np.where(support[None, :], weighted, 0)
    return weighted.sum(axis=1), ok


def df_at_omega(det, grid_pols, u_dims):
    """Deadlock-freeness at one omega over the full policy grid.

    Runs forward reachability over scheduler states (acted set, fixed
    actions); a policy is deadlock-free iff some complete state is
    reachable.  Returns -1 when every policy passes, else the flat index
    (canonical order) of the first failing policy.
    """
    n = len(u_dims)
    w = radix_weights(u_dims)
    grid_shape = tuple(p.shape[0] for p in grid_pols)
    full = (1 << n) - 1
    reach = {(0, 0): np.ones(grid_shape, dtype=bool)}
    done = np.zeros(grid_shape, dtype=bool)
    # BFS by acted-set size: every parent of a state precedes it, so each
    # state's reach mask is complete by the time it is expanded.
    states = [(0, 0)]
    seen = {(0, 0)}
    for mask, code in states:
        r = reach[(mask, code)]
        if mask == full:
            done |= r
            continue
        if not r.any():
            continue
        for i in range(n):
            if mask >> i & 1:
                continue
            y = det[i, mask, code]
            if y < 0:
                continue
            for a in range(u_dims[i]):
                sel = grid_pols[i][:, y] == a
                shape = [1] * n
                shape[i] = grid_shape[i]
                child = (mask | 1 << i, code + a * int(w[i]))
                masked = r & sel.reshape(shape)
                if child in reach:
                    reach[child] |= masked
                else:
                    reach[child] = masked
                if child not in seen:
                    seen.add(child)
                    states.append(child)
    if done.all():
        return -1
    return int(np.flatnonzero(~done.reshape(-1))[0])
