"""Deciders for the information-structure properties and the classifier.

Solvability (SM), deadlock-freeness (DF), causal implementability (CI),
causality (C) and random causal sequentiality (RCS) are decided exactly
by exhaustion at desk scale.  Quantification over chance outcomes is
restricted to the support of the prior by default; ``strict=True``
extends it to the whole signal space.  All checkers quantifying over
policies share the evaluation budget (``NSTEAMS_BUDGET``, default 1e7).
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field

import numpy as np

from . import kernels, sigma
from .encode import CompiledModel, compile_model
from .errors import BudgetExceeded, MissingOrdering
from .kernels.common import determined_table, radix_weights
from .model import (
    IntrinsicModel,
    OrderingFunction,
    OrderingStage,
    PolicyProfile,
    action_arg,
    stage_action_arg,
)

DEFAULT_BUDGET = 10_000_000

CLASSICAL = "classical"
PARTIALLY_NESTED = "partially_nested"
NONCLASSICAL = "nonclassical"


def evaluation_budget(budget=None) -> int:
    if budget is not None:
        return int(budget)
    env = os.environ.get("NSTEAMS_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


@dataclass(frozen=True)
class PropertyReport:
    """Outcome of one property check.

    For positive C/CI verdicts the witness is an OrderingFunction; for
    negative verdicts it is a concrete counterexample: (policy, omega)
    for SM/DF, (omega, u) for CI, omega for C.
    """

    name: str
    verdict: bool
    witness: object = None
    detail: str = ""


def _check_budget(compiled: CompiledModel, budget):
    limit = evaluation_budget(budget)
    size = compiled.model.policy_count()
    if size > limit:
        raise BudgetExceeded(size, limit)


def _omega_indices(compiled: CompiledModel, strict: bool):
    if strict:
        return range(compiled.n_omega)
    return [int(i) for i in np.flatnonzero(compiled.support)]


def check_sm(model: IntrinsicModel, strict: bool = False, budget=None) -> PropertyReport:
    """Solvability: every (policy, omega) closed loop has exactly one solution."""
    compiled = compile_model(model)
    _check_budget(compiled, budget)
    support = np.ones(compiled.n_omega, dtype=bool) if strict else None
    violation = kernels.sm_first_violation(compiled, support=support)
    if violation is None:
        return PropertyReport("SM", True)
    key, omega_idx, count = violation
    witness = (compiled.policy_from_key(key), compiled.omega_tuples[omega_idx])
    return PropertyReport(
        "SM", False, witness, detail=f"{count} closed-loop solutions at omega_idx={omega_idx}"
    )


def check_df(model: IntrinsicModel, strict: bool = False, budget=None) -> PropertyReport:
    """Deadlock-freeness: every policy admits a forward-computable ordering.

    For each omega the scheduler may pick any DM whose measurement is
    constant over all completions of the actions fixed so far; the DM then
    acts through the policy.  Backtracking over those choices must reach a
    complete ordering for every policy.
    """
    compiled = compile_model(model)
    _check_budget(compiled, budget)
    for oi in _omega_indices(compiled, strict):
        key = kernels.df_first_violation(compiled, oi)
        if key is not None:
            witness = (compiled.policy_from_key(key), compiled.omega_tuples[oi])
            return PropertyReport("DF", False, witness, detail="no forward ordering")
    return PropertyReport("DF", True)


def check_ci(model: IntrinsicModel, strict: bool = False) -> PropertyReport:
    """Causal implementability, decided pointwise per (omega, u).

    At each point an ordering must exist whose every stage measurement is
    constant over completions of the point's prefix values; the positive
    witness is a flat ordering function assembled from the pointwise
    choices (the map need not be causal).
    """
    compiled = compile_model(model)
    n = len(compiled.u_dims)
    w = radix_weights(compiled.u_dims)
    full = (1 << n) - 1
    flat_table = {}
    for oi in _omega_indices(compiled, strict):
        det = determined_table(compiled.y_stack, compiled.u_codes, compiled.u_dims, oi)
        for ui in range(compiled.n_u):
            codes = compiled.u_codes[ui]
            memo: dict = {}

            def can(mask):
                if mask == full:
                    return ()
                if mask in memo:
                    return memo[mask]
                code = sum(int(codes[i]) * int(w[i]) for i in range(n) if mask >> i & 1)
                result = None
                for i in range(n):
                    if mask >> i & 1:
                        continue
                    if det[i, mask, code] < 0:
                        continue
                    rest = can(mask | 1 << i)
                    if rest is not None:
                        result = (i + 1,) + rest
                        break
                memo[mask] = result
                return result

            order = can(0)
            if order is None:
                witness = (compiled.omega_tuples[oi], compiled.u_tuples[ui])
                return PropertyReport("CI", False, witness, detail="no pointwise ordering")
            flat_table[compiled.omega_tuples[oi] + compiled.u_tuples[ui]] = order
    args = tuple(name for name, _ in model.signals) + tuple(
        action_arg(i) for i in range(1, model.n_dms + 1)
    )
    psi = OrderingFunction("flat", model.n_dms, flat_args=args, flat_table=flat_table)
    return PropertyReport("CI", True, psi)


def _causal_choices(compiled: CompiledModel, oi: int):
    """Per-state next-actor choices making the ordering tree causal at omega.

    State = (acted mask, mixed-radix code of their actions).  A choice is
    valid when the chosen DM's measurement is determined at the state and
    every action it may take leads to a feasible child state.  Returns the
    choice dict, or None when omega is infeasible.
    """
    n = len(compiled.u_dims)
    w = radix_weights(compiled.u_dims)
    det = determined_table(compiled.y_stack, compiled.u_codes, compiled.u_dims, oi)
    full = (1 << n) - 1
    memo: dict = {}

    def feasible(mask, code):
        if mask == full:
            return True
        key = (mask, code)
        if key in memo:
            return memo[key] is not None
        memo[key] = None
        for i in range(n):
            if mask >> i & 1:
                continue
            if det[i, mask, code] < 0:
                continue
            if all(
                feasible(mask | 1 << i, code + a * int(w[i]))
                for a in range(compiled.u_dims[i])
            ):
                memo[key] = i + 1
                break
        return memo[key] is not None

    if not feasible(0, 0):
        return None
    return {k: v for k, v in memo.items() if v is not None}


def verify_causal_ordering(model: IntrinsicModel, psi: OrderingFunction, strict: bool = False) -> bool:
    """Check the causality condition for a supplied ordering function.

    For every stage k and realized k-prefix s, the preimage of s must
    split into full (omega, u^{s_1..s_{k-1}})-cylinder classes, and the
    stage measurement must be constant on each class.
    """
    compiled = compile_model(model)
    omega_ok = set(_omega_indices(compiled, strict))
    points = []
    for oi in omega_ok:
        omega = compiled.omega_tuples[oi]
        for ui, u in enumerate(compiled.u_tuples):
            points.append((oi, omega, ui, u, psi.permutation(model, omega, u)))
    n = model.n_dms
    for k in range(1, n + 1):
        buckets: dict = {}
        for oi, omega, ui, u, perm in points:
            prefix = perm[:k]
            group_key = (prefix, oi) + tuple(u[j - 1] for j in prefix[:-1])
            buckets.setdefault(group_key, []).append((ui, prefix[-1], oi))
        for (prefix, oi, *fixed), members in buckets.items():
            free = [j for j in range(1, n + 1) if j not in prefix[: k - 1]]
            expected = 1
            for j in free:
                expected *= compiled.u_dims[j - 1]
            if len(members) != expected:
                return False  # preimage splits a cylinder class
            actor = prefix[-1]
            vals = {compiled.y_tab[actor - 1][oi, ui] for ui, _, _ in members}
            if len(vals) > 1:
                return False  # stage measurement not determined by the class
    return True


def check_c(model: IntrinsicModel, strict: bool = False) -> PropertyReport:
    """Causality: a causal-tree ordering function exists.

    A supplied model ordering is verified first and returned as the
    witness when valid; otherwise the tree is searched by backtracking
    over next-actor choices with memoized feasibility per state.
    """
    if model.ordering is not None and verify_causal_ordering(model, model.ordering, strict):
        return PropertyReport("C", True, model.ordering)
    compiled = compile_model(model)
    n = model.n_dms
    w = radix_weights(compiled.u_dims)
    per_omega = {}
    for oi in _omega_indices(compiled, strict):
        choices = _causal_choices(compiled, oi)
        if choices is None:
            return PropertyReport(
                "C", False, compiled.omega_tuples[oi], detail="no causal tree at omega"
            )
        per_omega[oi] = choices

    stages = [
        {"args": tuple(name for name, _ in model.signals)
         + tuple(stage_action_arg(j) for j in range(1, k)), "table": {}}
        for k in range(1, n + 1)
    ]

    def walk(oi, omega, mask, code, prefix_actions):
        k = len(prefix_actions) + 1
        actor = per_omega[oi][(mask, code)]
        stages[k - 1]["table"][omega + tuple(prefix_actions)] = actor
        if k == n:
            return
        for ai, a in enumerate(model.dms[actor - 1].actions):
            walk(oi, omega, mask | 1 << (actor - 1), code + ai * int(w[actor - 1]),
                 prefix_actions + [a])

    for oi in per_omega:
        walk(oi, compiled.omega_tuples[oi], 0, 0, [])
    psi = OrderingFunction(
        "tree",
        n,
        stages=tuple(OrderingStage(s["args"], s["table"]) for s in stages),
    )
    return PropertyReport("C", True, psi)


def check_rcs(model: IntrinsicModel, psi: OrderingFunction | None = None, strict: bool = False) -> PropertyReport:
    """Random causal sequentiality of a given ordering function.

    Every prefix preimage must be a union of (omega, earlier-action)
    cylinder classes, i.e. the next actor is determined by chance and the
    actions already taken.
    """
    if psi is None:
        psi = model.ordering
    if psi is None:
        raise MissingOrdering("check_rcs requires an ordering function")
    compiled = compile_model(model)
    n = model.n_dms
    points = []
    for oi in _omega_indices(compiled, strict):
        omega = compiled.omega_tuples[oi]
        for u in compiled.u_tuples:
            points.append((oi, omega, u, psi.permutation(model, omega, u)))
    for k in range(1, n + 1):
        buckets: dict = {}
        for oi, omega, u, perm in points:
            prefix = perm[:k]
            group_key = (prefix, oi) + tuple(u[j - 1] for j in prefix[:-1])
            buckets.setdefault(group_key, set()).add(u)
        for (prefix, oi, *fixed), members in buckets.items():
            free = [j for j in range(1, n + 1) if j not in prefix[: k - 1]]
            expected = 1
            for j in free:
                expected *= compiled.u_dims[j - 1]
            if len(members) != expected:
                witness = (compiled.omega_tuples[oi], next(iter(members)))
                return PropertyReport(
                    "RCS", False, witness,
                    detail=f"prefix {prefix} not determined by omega and earlier actions",
                )
    return PropertyReport("RCS", True, psi)


def _affects(compiled: CompiledModel, actor: int, target: int) -> bool:
    """True when u^actor changes eta^target for some fixed other coordinates."""
    tab = compiled.y_tab[target - 1].reshape((compiled.n_omega, *compiled.u_dims))
    moved = np.moveaxis(tab, 1 + (actor - 1), -1)
    return bool((moved != moved[..., :1]).any())


def classify(model: IntrinsicModel, psi: OrderingFunction, strict: bool = False) -> str:
    """Classify the information structure along realizable orderings.

    Nesting is sigma-field containment of the DMs' induced fields; the
    'affects' clause is syntactic non-constancy of the measurement table
    in the earlier DM's action.  Requires a causality witness.
    """
    compiled = compile_model(model)
    ground = model.full_ground()
    fields = {i: model.information_field(i, ground) for i in range(1, model.n_dms + 1)}
    orderings = set()
    for oi in _omega_indices(compiled, strict):
        omega = compiled.omega_tuples[oi]
        for u in compiled.u_tuples:
            orderings.add(psi.permutation(model, omega, u))
    nested = {}
    affects = {}
    for a in range(1, model.n_dms + 1):
        for b in range(1, model.n_dms + 1):
            if a == b:
                continue
            nested[(a, b)] = sigma.is_coarser(fields[a], fields[b])
            affects[(a, b)] = _affects(compiled, a, b)
    classical = all(
        nested[(s[k], s[i])]
        for s in orderings
        for i in range(1, model.n_dms)
        for k in range(i)
        if s[k] != s[i]
    )
    if classical:
        return CLASSICAL
    partially = all(
        nested[(s[k], s[i])]
        for s in orderings
        for i in range(1, model.n_dms)
        for k in range(i)
        if affects[(s[k], s[i])]
    )
    return PARTIALLY_NESTED if partially else NONCLASSICAL


@dataclass(frozen=True)
class ImplicationViolation:
    model: IntrinsicModel
    reports: dict
    broken: tuple  # e.g. ("C", "CI")


def audit_implications(models, strict: bool = False, budget=None) -> list:
    """Audit C => CI <=> DF => SM on a batch; empty list means no violation."""
    violations = []
    for m in models:
        reports = {
            "SM": check_sm(m, strict, budget),
            "DF": check_df(m, strict, budget),
            "CI": check_ci(m, strict),
            "C": check_c(m, strict),
        }
        broken = []
        if reports["C"].verdict and not reports["CI"].verdict:
            broken.append(("C", "CI"))
        if reports["CI"].verdict != reports["DF"].verdict:
            broken.append(("CI", "DF"))
        if reports["DF"].verdict and not reports["SM"].verdict:
            broken.append(("DF", "SM"))
        for pair in broken:
            violations.append(ImplicationViolation(m, reports, pair))
    return violations
