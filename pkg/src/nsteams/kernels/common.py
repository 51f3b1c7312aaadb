"""Backend-agnostic helpers shared by the numba and numpy kernel paths."""

from __future__ import annotations

import numpy as np


def pad_policies(pol_arrays, y_dims) -> np.ndarray:
    """Stack per-DM policy arrays into one (B, N, max_Y) block."""
    b = pol_arrays[0].shape[0] if pol_arrays else 0
    n = len(pol_arrays)
    max_y = max(y_dims) if y_dims else 1
    out = np.zeros((b, n, max_y), dtype=np.int32)
    for i, arr in enumerate(pol_arrays):
        out[:, i, : y_dims[i]] = arr
    return out


def radix_weights(u_dims) -> np.ndarray:
    """Mixed-radix weights so that code(u) = sum_i a_i * w_i matches the
    canonical (lexicographic) flat action index."""
    n = len(u_dims)
    w = np.ones(n, dtype=np.int64)
    for i in range(n - 2, -1, -1):
        w[i] = w[i + 1] * u_dims[i + 1]
    return w


def determined_table(y_stack, u_codes, u_dims, omega_idx) -> np.ndarray:
    """det[i, mask, code]: measurement index of DM i+1 at the given omega when
    the DMs in ``mask`` hold the actions encoded by ``code``, provided the
    measurement is constant over every completion of the free actions;
    -1 when it is not determined.

    ``code`` is the full mixed-radix action code with free digits zeroed.
    """
    n = len(u_dims)
    n_u = y_stack.shape[2]
    w = radix_weights(u_dims)
    det = np.full((n, 1 << n, n_u), -1, dtype=np.int32)
    codes = u_codes.astype(np.int64) @ w  # full code per flat u index
    for mask in range(1 << n):
        in_mask = [i for i in range(n) if mask >> i & 1]
        # zero out free digits to get the state code of each full profile
        state = np.zeros(n_u, dtype=np.int64)
        for i in in_mask:
            state += u_codes[:, i].astype(np.int64) * w[i]
        for i in range(n):
            col = y_stack[i, omega_idx, :]
            groups: dict = {}
            for ui in range(n_u):
                g = groups.setdefault(int(state[ui]), [])
                g.append(col[ui])
            for code, vals in groups.items():
                first = vals[0]
                if all(v == first for v in vals):
                    det[i, mask, code] = first
    return det
