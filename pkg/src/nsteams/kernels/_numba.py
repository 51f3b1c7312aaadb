"""Numba-jitted implementations of the hot kernels.

Same contracts and bit-identical outputs as ``_numpy``; selected by
default when numba imports cleanly.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _solve_batch(y_stack, u_codes, pol_block):
    n, n_omega, n_u = y_stack.shape
    b = pol_block.shape[0]
    sol = np.empty((b, n_omega), dtype=np.int32)
    for bi in range(b):
        for oi in range(n_omega):
            count = 0
            last = -1
            for ui in range(n_u):
                ok = True
                for i in range(n):
                    y = y_stack[i, oi, ui]
                    if pol_block[bi, i, y] != u_codes[ui, i]:
                        ok = False
                        break
                if ok:
                    count += 1
                    last = ui
                    if count > 1:
                        break
            if count == 1:
                sol[bi, oi] = last
            elif count == 0:
                sol[bi, oi] = -1
            else:
                sol[bi, oi] = -2
    return sol


def solve_batch(y_stack, u_codes, pol_block, y_dims):
    return _solve_batch(y_stack, u_codes, pol_block)


@njit(cache=True)
def _j_numerators(sol, prior_num, cost_num, support):
    b, n_omega = sol.shape
    out = np.zeros(b, dtype=np.int64)
    ok = np.ones(b, dtype=np.bool_)
    for bi in range(b):
        total = 0
        for oi in range(n_omega):
            if not support[oi]:
                continue
            s = sol[bi, oi]
            if s < 0:
                ok[bi] = False
                continue
            total += prior_num[oi] * cost_num[oi, s]
        out[bi] = total
    return out, ok


def j_numerators(sol, prior_num, cost_num, support):
    return _j_numerators(sol, prior_num, cost_num, support)


@njit(cache=True)
def _df_scan(det, pol_block, weights, u_dims):
    """First policy (batch index) that deadlocks, or -1.

    Iterative DFS per policy over scheduler states (acted mask, fixed
    action code); succeeds as soon as the full mask is reachable.
    """
    b = pol_block.shape[0]
    n = u_dims.shape[0]
    n_codes = det.shape[2]
    full = (1 << n) - 1
    visited = np.full(((1 << n), n_codes), -1, dtype=np.int64)
    # one push per (state, incoming edge); states = 2^n * n_codes, fan-in <= n
    cap = (1 << n) * n_codes * n + 4
    stack_mask = np.empty(cap, dtype=np.int64)
    stack_code = np.empty(cap, dtype=np.int64)
    for bi in range(b):
        top = 0
        stack_mask[top] = 0
        stack_code[top] = 0
        top += 1
        success = False
        while top > 0 and not success:
            top -= 1
            mask = stack_mask[top]
            code = stack_code[top]
            if visited[mask, code] == bi:
                continue
            visited[mask, code] = bi
            if mask == full:
                success = True
                break
            for i in range(n):
                if mask >> i & 1:
                    continue
                y = det[i, mask, code]
                if y < 0:
                    continue
                a = pol_block[bi, i, y]
                child_code = code + a * weights[i]
                if visited[mask | (1 << i), child_code] != bi:
                    stack_mask[top] = mask | (1 << i)
                    stack_code[top] = child_code
                    top += 1
        if not success:
            return bi
    return -1


def df_scan(det, pol_block, weights, u_dims):
    return _df_scan(
        det,
        pol_block,
        np.asarray(weights, dtype=np.int64),
        np.asarray(u_dims, dtype=np.int64),
    )
