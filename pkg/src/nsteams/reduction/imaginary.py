"""Imaginary sequential model: stages indexed by time of action.

The construction enumerates, per cost/order-relevant pair (w0, ws0), the
tree of public histories ((actor, measurement, action) triples).  Stage
measurement kernels are exact conditionals of the prior over the
consistent chance outcomes; under causality they are policy independent,
which is certified by recomputing them under distinct random policies.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import NotCausal, PolicyDependenceDetected
from ..model import IntrinsicModel, OrderingFunction, PolicyProfile
from ..properties import check_c


@dataclass
class HistoryNode:
    """One public history: consistent chance outcomes and the next stage."""

    history: tuple                      # ((actor, y, a), ...)
    members: dict                       # omega -> prior mass (positive)
    actor: int | None = None            # identity acting next; None past stage N
    kernel: dict = field(default_factory=dict)   # next measurement -> Fraction
    children: dict = field(default_factory=dict)  # (y, a) -> HistoryNode


def _constant_measurement(model: IntrinsicModel, dm: int, omega: tuple, fixed: dict):
    """Value of eta^dm at omega when constant over completions of ``fixed``;
    None otherwise."""
    value = None
    for u in model.action_profiles():
        if any(u[j - 1] != a for j, a in fixed.items()):
            continue
        y = model.measurement(dm, omega, u)
        if value is None:
            value = y
        elif y != value:
            return None
    return value


def _idx0(omega: tuple) -> tuple:
    return omega[:2]


def history_forest(model: IntrinsicModel, next_actor) -> dict:
    """Expand the public-history tree per (w0, ws0).

    ``next_actor(omega, acted)`` names the DM acting after the prefix
    ``acted`` = ((dm, action), ...).  Raises NotCausal when the next actor
    is not determined by the public history, or when a stage measurement
    is not fixed by chance and the actions already taken.
    """
    roots: dict = {}
    for omega in model.support():
        roots.setdefault(_idx0(omega), {})[omega] = model.prior_of(omega)
    forest = {k: HistoryNode((), members) for k, members in roots.items()}

    def expand(node: HistoryNode):
        if len(node.history) == model.n_dms:
            return
        acted = tuple((i, a) for i, _, a in node.history)
        fixed = {i: a for i, a in acted}
        actors = set()
        for omega in node.members:
            actors.add(next_actor(omega, acted))
        if len(actors) != 1:
            raise NotCausal(
                f"next actor not determined by public history {node.history}: {sorted(actors)}"
            )
        actor = actors.pop()
        node.actor = actor
        total = sum(node.members.values())
        groups: dict = {}
        for omega, mass in node.members.items():
            y = _constant_measurement(model, actor, omega, fixed)
            if y is None:
                raise NotCausal(
                    f"eta^{actor} not determined at omega={omega} given history {node.history}"
                )
            groups.setdefault(y, {})[omega] = mass
        node.kernel = {y: sum(g.values()) / total for y, g in groups.items()}
        for y, g in groups.items():
            for a in model.dms[actor - 1].actions:
                child = HistoryNode(node.history + ((actor, y, a),), g)
                node.children[(y, a)] = child
                expand(child)

    for node in forest.values():
        expand(node)
    return forest


def public_causal_tree(model: IntrinsicModel):
    """Search a next-actor choice measurable in the public history alone.

    Returns a choice dict keyed by (idx0, history of (actor, y, a)) or
    None.  This exists whenever the paper-style reduction applies; a
    causal model whose ordering irreducibly depends on measurement noise
    beyond (w0, ws0) and the realized prefix has none.
    """
    roots: dict = {}
    for omega in model.support():
        roots.setdefault(_idx0(omega), []).append(omega)

    memo: dict = {}

    def feasible(idx0, history, members) -> bool:
        if len(history) == model.n_dms:
            return True
        key = (idx0, history)
        if key in memo:
            return memo[key] is not None
        memo[key] = None
        fixed = {i: a for i, _, a in history}
        for actor in range(1, model.n_dms + 1):
            if actor in fixed:
                continue
            values = {}
            ok = True
            for omega in members:
                y = _constant_measurement(model, actor, omega, fixed)
                if y is None:
                    ok = False
                    break
                values.setdefault(y, []).append(omega)
            if not ok:
                continue
            if all(
                feasible(idx0, history + ((actor, y, a),), group)
                for y, group in values.items()
                for a in model.dms[actor - 1].actions
            ):
                memo[key] = actor
                break
        return memo[key] is not None

    for idx0, members in roots.items():
        if not feasible(idx0, (), members):
            return None
    return {k: v for k, v in memo.items() if v is not None}


def _choice_actor_fn(model: IntrinsicModel, choices: dict):
    """Next-actor function replaying public histories through a choice dict."""

    def next_actor(omega, acted):
        history = []
        partial: dict = {}
        for i, a in acted:
            y = _constant_measurement(model, i, omega, partial)
            history.append((i, y, a))
            partial[i] = a
        key = (_idx0(omega), tuple(history))
        try:
            return choices[key]
        except KeyError:
            raise NotCausal(f"no public-tree choice at history {history}") from None

    return next_actor


def resolve_ordering(model: IntrinsicModel, psi: OrderingFunction | None) -> OrderingFunction:
    """The ordering to reduce with: supplied, else attached, else searched."""
    if psi is not None:
        return psi
    if model.ordering is not None:
        return model.ordering
    report = check_c(model)
    if not report.verdict:
        raise NotCausal(f"model is not causal (witness omega={report.witness})")
    return report.witness


@dataclass(frozen=True)
class ImaginaryModel:
    """Stage-indexed view: kernels and relabelings per public history."""

    model: IntrinsicModel
    ordering: OrderingFunction
    stage_y: tuple            # union measurement alphabet
    stage_u: tuple            # union action alphabet
    actors: dict              # (idx0, history) -> next identity (I/I^u relabeling)
    kernels: dict             # (idx0, history) -> {y: Fraction}
    prior0: dict              # idx0 -> Fraction

    def stage_count(self) -> int:
        return self.model.n_dms


def _replay_history_under_policy(model, forest, policy):
    """Per-history masses realized under a deterministic policy.

    Returns {(idx0, history): {y: mass}} aggregating, over chance outcomes
    reaching each history, the mass of the next stage measurement.
    """
    rows: dict = {}
    for idx0, root in forest.items():
        for omega, mass in root.members.items():
            node = root
            while node.actor is not None:
                fixed = {i: a for i, _, a in node.history}
                y = _constant_measurement(model, node.actor, omega, fixed)
                key = (idx0, node.history)
                rows.setdefault(key, {}).setdefault(y, Fraction(0))
                rows[key][y] += mass
                a = policy.action(node.actor, y)
                node = node.children[(y, a)]
    return rows


def build_imaginary(
    model: IntrinsicModel,
    psi: OrderingFunction | None = None,
    cert_policies: int = 2,
    seed: int = 20250101,
) -> ImaginaryModel:
    """Stage kernels by exact conditioning, certified policy independent.

    Kernels are computed once from the prior; the certificate recomputes
    the measurement conditionals under ``cert_policies`` random distinct
    deterministic policies and asserts exact table equality on each
    policy's reachable histories (a failure would signal a causality
    checker bug, hence PolicyDependenceDetected).
    """
    psi = resolve_ordering(model, psi)
    try:
        forest = history_forest(model, lambda omega, acted: psi.stage_actor(model, omega, acted))
    except NotCausal:
        choices = public_causal_tree(model)
        if choices is None:
            raise
        forest = history_forest(model, _choice_actor_fn(model, choices))

    actors: dict = {}
    kernels: dict = {}

    def collect(idx0, node):
        if node.actor is None:
            return
        actors[(idx0, node.history)] = node.actor
        kernels[(idx0, node.history)] = dict(node.kernel)
        for child in node.children.values():
            collect(idx0, child)

    for idx0, root in forest.items():
        collect(idx0, root)

    _certify_policy_independence(model, forest, kernels, cert_policies, seed)

    stage_y = tuple(sorted({y for dm in model.dms for y in dm.measurements}))
    stage_u = tuple(sorted({a for dm in model.dms for a in dm.actions}))
    prior0: dict = {}
    for omega in model.support():
        prior0[_idx0(omega)] = prior0.get(_idx0(omega), Fraction(0)) + model.prior_of(omega)
    return ImaginaryModel(model, psi, stage_y, stage_u, actors, kernels, prior0)


def _certify_policy_independence(model, forest, kernels, cert_policies, seed):
    from ..generator import random_policy

    rng = random.Random(seed)
    seen = set()
    tried = 0
    while tried < cert_policies:
        policy = random_policy(model, rng)
        key = policy.key(model)
        if key in seen and len(seen) < model.policy_count():
            continue
        seen.add(key)
        tried += 1
        rows = _replay_history_under_policy(model, forest, policy)
        for hkey, masses in rows.items():
            total = sum(masses.values())
            conditional = {y: m / total for y, m in masses.items()}
            reference = kernels[hkey]
            for y, p in conditional.items():
                if reference.get(y, Fraction(0)) != p:
                    raise PolicyDependenceDetected(
                        f"kernel row {hkey} differs under policy {key}: "
                        f"{y}: {p} vs {reference.get(y)}"
                    )
