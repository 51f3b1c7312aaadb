"""Seeded random model generation for audits and property batches.

Parameters are fixed so batches are reproducible: N <= 3, every alphabet
has at most 3 symbols drawn from shared pools, measurement tables are
sampled uniformly, and priors are normalized uniform integer weights.
``random_causal_model`` builds models that are causal by construction: a
two-branch ordering tree on ws0 with per-branch sequential action
dependence, shipped with its ordering function.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from .model import (
    DecisionMaker,
    IntrinsicModel,
    OrderingFunction,
    OrderingStage,
    PolicyProfile,
    action_arg,
    noise_name,
    stage_action_arg,
    validate,
)

ACTION_POOL = ("0", "1", "2")
MEASUREMENT_POOL = ("a", "b", "c")
SIGNAL_POOL = ("0", "1", "2")


def _size(rng: random.Random, weights=(0.25, 0.55, 0.20)) -> int:
    return rng.choices((1, 2, 3), weights=weights)[0]


def _prior(rng: random.Random, signals) -> dict:
    outcomes = list(itertools.product(*(symbols for _, symbols in signals)))
    weights = [rng.randint(0, 4) for _ in outcomes]
    if not any(weights):
        weights[rng.randrange(len(outcomes))] = 1
    total = sum(weights)
    return {o: Fraction(w, total) for o, w in zip(outcomes, weights) if w}


def random_model(seed_or_rng, n_dms: int | None = None) -> IntrinsicModel:
    """One random intrinsic model; no ordering function attached."""
    rng = seed_or_rng if isinstance(seed_or_rng, random.Random) else random.Random(seed_or_rng)
    n = n_dms if n_dms is not None else rng.choices((1, 2, 3), weights=(0.2, 0.4, 0.4))[0]

    signals = [("w0", SIGNAL_POOL[: _size(rng, (0.3, 0.6, 0.1))]),
               ("ws0", SIGNAL_POOL[: _size(rng, (0.3, 0.6, 0.1))])]
    for i in range(1, n + 1):
        signals.append((noise_name(i), SIGNAL_POOL[: _size(rng, (0.45, 0.45, 0.1))]))
    signals = tuple(signals)

    # alphabets first, then tables: a DM's table may read other DMs' actions
    dms = []
    for i in range(1, n + 1):
        actions = ACTION_POOL[: _size(rng)]
        measurements = MEASUREMENT_POOL[: _size(rng)]
        observes = [name for name, _ in signals if rng.random() < 0.5]
        for j in range(1, n + 1):
            p = 0.1 if j == i else 0.4
            if rng.random() < p:
                observes.append(action_arg(j))
        dms.append(DecisionMaker(i, actions, measurements, tuple(observes), {}))
    dms = tuple(_fill_table(rng, dm, signals, dms) for dm in dms)

    cost_args = ("w0",) + tuple(action_arg(i) for i in range(1, n + 1))
    domains = [dict(signals)["w0"]] + [dm.actions for dm in dms]
    cost = {
        key: Fraction(rng.randint(0, 8), rng.choice((1, 1, 2, 4)))
        for key in itertools.product(*domains)
    }

    return validate(
        IntrinsicModel(
            n_dms=n,
            signals=signals,
            prior=_prior(rng, signals),
            dms=dms,
            cost_args=cost_args,
            cost=cost,
        )
    )


def _fill_table(rng, dm: DecisionMaker, signals, dms) -> DecisionMaker:
    sig = dict(signals)
    domains = []
    for arg in dm.observes:
        if arg in sig:
            domains.append(sig[arg])
        else:
            domains.append(dms[int(arg[1:]) - 1].actions)
    table = {
        key: rng.choice(dm.measurements) for key in itertools.product(*domains)
    }
    return DecisionMaker(dm.index, dm.actions, dm.measurements, dm.observes, table)


def random_causal_model(seed_or_rng, n_dms: int | None = None) -> IntrinsicModel:
    """A random model with Property C by construction, ordering attached.

    ws0 is binary and selects one of two DM orderings; each DM's
    measurement may depend on signals freely and, per branch, only on the
    actions of DMs that precede it in that branch's ordering.
    """
    rng = seed_or_rng if isinstance(seed_or_rng, random.Random) else random.Random(seed_or_rng)
    n = n_dms if n_dms is not None else rng.choices((1, 2, 3), weights=(0.15, 0.4, 0.45))[0]

    signals = [("w0", SIGNAL_POOL[: _size(rng, (0.3, 0.6, 0.1))]), ("ws0", ("0", "1"))]
    for i in range(1, n + 1):
        signals.append((noise_name(i), SIGNAL_POOL[: _size(rng, (0.5, 0.4, 0.1))]))
    signals = tuple(signals)
    sig = dict(signals)

    order_a = list(range(1, n + 1))
    rng.shuffle(order_a)
    order_b = list(range(1, n + 1))
    rng.shuffle(order_b)

    actions = [ACTION_POOL[: _size(rng)] for _ in range(n)]
    measurements = [MEASUREMENT_POOL[: _size(rng)] for _ in range(n)]

    dms = []
    for i in range(1, n + 1):
        pred_a = set(order_a[: order_a.index(i)])
        pred_b = set(order_b[: order_b.index(i)])
        sig_args = tuple(name for name, _ in signals if rng.random() < 0.5)
        dep_a = tuple(sorted(j for j in pred_a if rng.random() < 0.6))
        dep_b = tuple(sorted(j for j in pred_b if rng.random() < 0.6))
        observes = tuple(dict.fromkeys(("ws0",) + sig_args)) + tuple(
            action_arg(j) for j in sorted(set(dep_a) | set(dep_b))
        )
        # Per ws0 branch the table only reads that branch's predecessors,
        # so every realized-stage measurement is fixed by chance and the
        # actions already taken.
        branch_tables = {}
        for branch, deps in (("0", dep_a), ("1", dep_b)):
            sub_args = [a for a in observes if a == "ws0" or a in sig or int(a[1:]) in deps]
            sub_domains = [sig[a] if a in sig else actions[int(a[1:]) - 1] for a in sub_args if a != "ws0"]
            keys = itertools.product(*sub_domains)
            branch_tables[branch] = (
                [a for a in sub_args if a != "ws0"],
                {k: rng.choice(measurements[i - 1]) for k in keys},
            )
        domains = [sig[a] if a in sig else actions[int(a[1:]) - 1] for a in observes]
        table = {}
        for key in itertools.product(*domains):
            vals = dict(zip(observes, key))
            sub_args, sub_table = branch_tables[vals["ws0"]]
            table[key] = sub_table[tuple(vals[a] for a in sub_args)]
        dms.append(DecisionMaker(i, actions[i - 1], measurements[i - 1], observes, table))
    dms = tuple(dms)

    stages = []
    for k in range(1, n + 1):
        args = ("ws0",)
        table = {("0",): order_a[k - 1], ("1",): order_b[k - 1]}
        stages.append(OrderingStage(args, table))
    psi = OrderingFunction("tree", n, stages=tuple(stages))

    cost_args = ("w0",) + tuple(action_arg(i) for i in range(1, n + 1))
    domains = [sig["w0"]] + [dm.actions for dm in dms]
    cost = {
        key: Fraction(rng.randint(0, 8), rng.choice((1, 1, 2, 4)))
        for key in itertools.product(*domains)
    }

    return validate(
        IntrinsicModel(
            n_dms=n,
            signals=signals,
            prior=_prior(rng, signals),
            dms=dms,
            cost_args=cost_args,
            cost=cost,
            ordering=psi,
        )
    )


def model_batch(seed: int, count: int, kind: str = "any") -> list:
    """A reproducible batch of models; kind is 'any' or 'causal'."""
    rng = random.Random(seed)
    maker = random_causal_model if kind == "causal" else random_model
    return [maker(rng) for _ in range(count)]


def random_policy(model: IntrinsicModel, rng: random.Random) -> PolicyProfile:
    tables = []
    for dm in model.dms:
        tables.append({y: rng.choice(dm.actions) for y in dm.measurements})
    return PolicyProfile(tuple(tables))


def sample_policies(model: IntrinsicModel, count: int, seed: int) -> list:
    """All policies when the space is small, else a seeded sample."""
    total = model.policy_count()
    if total <= count:
        return list(model.all_policies())
    rng = random.Random(seed)
    seen = set()
    out = []
    while len(out) < count:
        p = random_policy(model, rng)
        k = p.key(model)
        if k not in seen:
            seen.add(k)
            out.append(p)
    return out
