"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The backend is selected once per process from the ``NSTEAMS_BACKEND``
environment variable (``numba`` or ``numpy``); unset, numba is used when
it imports cleanly.  Both paths produce bit-identical results; the
benchmark under ``benchmarks/`` compares them.
"""

from __future__ import annotations

import itertools
import os

import numpy as np

from ..encode import CompiledModel, policy_grid_arrays
from .common import determined_table, pad_policies, radix_weights

_CHUNK = 2048
_INT64_SAFE = 1 << 62

_backend = None


def backend_name() -> str:
    global _backend
    if _backend is None:
        choice = os.environ.get("NSTEAMS_BACKEND", "").strip().lower()
        if choice in ("numba", "numpy"):
            _backend = choice
        elif choice:
            raise ValueError(f"NSTEAMS_BACKEND must be 'numba' or 'numpy', got {choice!r}")
        else:
            try:
                import numba  # noqa: F401

                _backend = "numba"
            except ImportError:
                _backend = "numpy"
    return _backend


def set_backend(name: str | None):
    """Force a backend (tests and benchmarks); None re-reads the environment."""
    global _backend
    if name not in (None, "numba", "numpy"):
        raise ValueError(name)
    _backend = name


def _impl():
    if backend_name() == "numba":
        from . import _numba as mod
    else:
        from . import _numpy as mod
    return mod


def solve_policies(compiled: CompiledModel, policies) -> np.ndarray:
    """(B, n_omega) closed-loop solution indices for a policy batch.

    Entries are the flat action-tuple index of the unique fixed point,
    -1 for no solution, -2 for several.
    """
    pol_arrays = compiled.policy_arrays(policies)
    block = pad_policies(pol_arrays, compiled.y_dims)
    return _impl().solve_batch(compiled.y_stack, compiled.u_codes, block, compiled.y_dims)


def j_batch(compiled: CompiledModel, sol: np.ndarray):
    """Per-policy cost numerators over prior_den*cost_den, plus solvability.

    Falls back to Python big integers when the int64 bound could be hit.
    """
    bound = (
        compiled.n_omega
        * int(max(compiled.prior_num.max(initial=0), 1))
        * int(max(abs(compiled.cost_num).max(initial=0), 1))
    )
    if bound < _INT64_SAFE:
        nums, ok = _impl().j_numerators(
            sol, compiled.prior_num, compiled.cost_num, compiled.support
        )
        return [int(v) for v in nums], ok
    nums, ok = [], np.ones(sol.shape[0], dtype=bool)
    prior = [int(v) for v in compiled.prior_num]
    cost = compiled.cost_num
    for bi in range(sol.shape[0]):
        total = 0
        for oi in range(compiled.n_omega):
            if not compiled.support[oi]:
                continue
            s = sol[bi, oi]
            if s < 0:
                ok[bi] = False
                continue
            total += prior[oi] * int(cost[oi, s])
        nums.append(total)
    return nums, ok


def iter_grid_chunks(compiled: CompiledModel, chunk: int = _CHUNK):
    """Yield (start_index, list of policy keys) over the full grid."""
    it = _grid_keys(compiled.u_dims, compiled.y_dims)
    start = 0
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield start, block
        start += len(block)


def sm_first_violation(compiled: CompiledModel, support=None):
    """Scan every (policy, supported omega) for a non-singleton closed loop.

    Returns None when solvable everywhere, else (policy_key, omega_idx,
    n_solutions) for the first violation in canonical order.
    """
    if support is None:
        support = compiled.support
    for _, keys in iter_grid_chunks(compiled):
        sol = solve_policies(compiled, keys)
        bad = (sol < 0) & support[None, :]
        if bad.any():
            bi, oi = np.argwhere(bad)[0]
            count = 0 if sol[bi, oi] == -1 else 2
            return keys[bi], int(oi), count
    return None


def df_first_violation(compiled: CompiledModel, omega_idx: int):
    """First policy (canonical order) that deadlocks at omega, or None."""
    det = determined_table(compiled.y_stack, compiled.u_codes, compiled.u_dims, omega_idx)
    if backend_name() == "numpy":
        grid = policy_grid_arrays(compiled.u_dims, compiled.y_dims)
        flat = _impl().df_at_omega(det, grid, compiled.u_dims)
        if flat < 0:
            return None
        return _decode_grid_index(compiled, flat)
    weights = radix_weights(compiled.u_dims)
    for start, keys in iter_grid_chunks(compiled):
        block = pad_policies(compiled.policy_arrays(keys), compiled.y_dims)
        hit = _impl().df_scan(det, block, weights, np.asarray(compiled.u_dims))
        if hit >= 0:
            return keys[hit]
    return None


def _grid_keys(u_dims, y_dims):
    per_dm = [
        list(itertools.product(range(nu), repeat=ny)) for nu, ny in zip(u_dims, y_dims)
    ]
    return itertools.product(*per_dm)


def _decode_grid_index(compiled: CompiledModel, flat: int):
    sizes = [nu**ny for nu, ny in zip(compiled.u_dims, compiled.y_dims)]
    idx = []
    for size in reversed(sizes):
        idx.append(flat % size)
        flat //= size
    idx.reverse()
    key = []
    for i, (nu, ny) in enumerate(zip(compiled.u_dims, compiled.y_dims)):
        rows = list(itertools.product(range(nu), repeat=ny))
        key.append(rows[idx[i]])
    return tuple(key)
