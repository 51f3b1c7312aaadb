"""Integer encoding of intrinsic models for the array kernels.

Symbols are mapped to alphabet indices, outcome and action spaces are
flattened in canonical (lexicographic) order, and the prior and cost
tables become integer numerators over fixed common denominators.  The
encoding is exact: kernels compare and sum integers only, and results
are converted back to ``Fraction`` at the API boundary.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .model import IntrinsicModel, PolicyProfile


@dataclass(frozen=True)
class CompiledModel:
    model: IntrinsicModel
    omega_tuples: tuple          # canonical signal-tuple order
    u_tuples: tuple              # canonical action-tuple order
    u_dims: tuple                # |U^i| per DM
    y_dims: tuple                # |Y^i| per DM
    y_tab: tuple                 # per DM: (n_omega, n_u) int32 measurement index
    y_stack: np.ndarray          # (N, n_omega, n_u) int32, stacked y_tab
    u_codes: np.ndarray          # (n_u, N) int32 per-DM action indices
    prior_num: np.ndarray        # int64 numerators
    prior_den: int
    support: np.ndarray          # bool, prior_num > 0
    cost_num: np.ndarray         # (n_omega, n_u) int64 numerators
    cost_den: int

    @property
    def n_omega(self):
        return len(self.omega_tuples)

    @property
    def n_u(self):
        return len(self.u_tuples)

    def policy_key(self, policy: PolicyProfile) -> tuple:
        return policy.key(self.model)

    def policy_from_key(self, key: tuple) -> PolicyProfile:
        tables = []
        for dm, choices in zip(self.model.dms, key):
            tables.append({y: dm.actions[a] for y, a in zip(dm.measurements, choices)})
        return PolicyProfile(tuple(tables))

    def policy_arrays(self, policies) -> list:
        """Stack policy tables into per-DM (batch, |Y^i|) int32 arrays."""
        keys = [self.policy_key(p) if isinstance(p, PolicyProfile) else p for p in policies]
        out = []
        for i in range(len(self.model.dms)):
            out.append(np.array([k[i] for k in keys], dtype=np.int32))
        return out

    def value_from_numerator(self, num: int) -> Fraction:
        return Fraction(int(num), self.prior_den * self.cost_den)


def compile_model(model: IntrinsicModel) -> CompiledModel:
    omega_tuples = tuple(model.signal_tuples())
    u_tuples = tuple(model.action_profiles())
    u_dims = tuple(len(dm.actions) for dm in model.dms)
    y_dims = tuple(len(dm.measurements) for dm in model.dms)
    n_omega, n_u = len(omega_tuples), len(u_tuples)

    y_tab = []
    for dm in model.dms:
        y_index = {y: j for j, y in enumerate(dm.measurements)}
        tab = np.empty((n_omega, n_u), dtype=np.int32)
        for oi, omega in enumerate(omega_tuples):
            for ui, u in enumerate(u_tuples):
                tab[oi, ui] = y_index[model.measurement(dm.index, omega, u)]
        y_tab.append(tab)

    prior_den = math.lcm(*(model.prior_of(o).denominator for o in omega_tuples)) if omega_tuples else 1
    prior_num = np.array(
        [int(model.prior_of(o) * prior_den) for o in omega_tuples], dtype=np.int64
    )

    cost_vals = {}
    for oi, omega in enumerate(omega_tuples):
        for ui, u in enumerate(u_tuples):
            cost_vals[(oi, ui)] = model.cost_of(omega, u)
    cost_den = math.lcm(*(c.denominator for c in cost_vals.values())) if cost_vals else 1
    cost_num = np.empty((n_omega, n_u), dtype=np.int64)
    for (oi, ui), c in cost_vals.items():
        cost_num[oi, ui] = int(c * cost_den)

    y_stack = np.stack(y_tab).astype(np.int32) if y_tab else np.zeros((0, n_omega, n_u), np.int32)
    u_codes = np.empty((n_u, len(u_dims)), dtype=np.int32)
    for ui, u in enumerate(u_tuples):
        for i, dm in enumerate(model.dms):
            u_codes[ui, i] = dm.actions.index(u[i])

    return CompiledModel(
        model=model,
        omega_tuples=omega_tuples,
        u_tuples=u_tuples,
        u_dims=u_dims,
        y_dims=y_dims,
        y_tab=tuple(y_tab),
        y_stack=y_stack,
        u_codes=u_codes,
        prior_num=prior_num,
        prior_den=prior_den,
        support=prior_num > 0,
        cost_num=cost_num,
        cost_den=cost_den,
    )


def u_index(compiled: CompiledModel, u: tuple) -> int:
    return compiled.u_tuples.index(u)


def iter_policy_keys(u_dims, y_dims):
    """Canonical enumeration of all policy keys (tuples of index tuples)."""
    per_dm = []
    for nu, ny in zip(u_dims, y_dims):
        per_dm.append(list(itertools.product(range(nu), repeat=ny)))
    return itertools.product(*per_dm)


def policy_grid_arrays(u_dims, y_dims) -> list:
    """Per-DM arrays of every policy table, shape (|U|^|Y|, |Y|)."""
    out = []
    for nu, ny in zip(u_dims, y_dims):
        rows = list(itertools.product(range(nu), repeat=ny))
        out.append(np.array(rows, dtype=np.int32))
    return out
