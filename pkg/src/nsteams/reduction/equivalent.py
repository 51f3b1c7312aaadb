"""Equivalent causal model for a causally implementable system.

Stage identity/measurement pairs are redrawn from exact conditional
kernels given the public history, realized functionally through fresh
per-stage noise coordinates by inverse sampling; the resulting model is
causal by construction.  The correspondence certificate checks, policy
by policy, that the joint law of (w0, ws0, measurements, actions) and
the expected cost match the original exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from ..errors import NotCI, ValidationError
from ..model import (
    DecisionMaker,
    IntrinsicModel,
    OrderingFunction,
    OrderingStage,
    PolicyProfile,
    action_arg,
    noise_name,
    solution_map,
    stage_action_arg,
    validate,
)
from ..properties import check_c, check_ci
from .imaginary import _idx0

MAX_EQUIVALENT_OUTCOMES = 250_000


@dataclass(frozen=True)
class EquivalenceCertificate:
    """Correspondence proof data for an equivalent-model construction."""

    policies_checked: int
    laws_match: bool
    values_match: bool
    ordering: OrderingFunction
    noise_sizes: tuple
    mismatches: tuple = ()


def _pointwise_schedules(model: IntrinsicModel) -> dict:
    """Flat schedule per supported point, causal-tree based when possible."""
    c_report = check_c(model)
    if c_report.verdict:
        psi = c_report.witness
        table = {}
        for omega in model.support():
            for u in model.action_profiles():
                table[omega + u] = psi.permutation(model, omega, u)
        return table
    ci_report = check_ci(model)
    if not ci_report.verdict:
        raise NotCI(f"model lacks causal implementability (witness {ci_report.witness})")
    psi = ci_report.witness
    return dict(psi.flat_table)


def _stage_nodes(model: IntrinsicModel, schedules: dict):
    """Exploration-history nodes and joint (identity, measurement) kernels.

    Members carry prior mass with actions explored uniformly; the uniform
    action weights cancel in every conditional.
    """
    roots: dict = {}
    for omega in model.support():
        for u in model.action_profiles():
            key = _idx0(omega)
            roots.setdefault(key, []).append((omega, u, model.prior_of(omega)))

    levels = []
    current = {(idx0, ()): members for idx0, members in roots.items()}
    for k in range(model.n_dms):
        kernels: dict = {}
        nxt: dict = {}
        for (idx0, history), members in current.items():
            total = sum(m for _, _, m in members)
            groups: dict = {}
            for omega, u, mass in members:
                perm = schedules[omega + u]
                i = perm[k]
                b = model.measurement(i, omega, u)
                groups.setdefault((i, b), []).append((omega, u, mass))
            kernels[(idx0, history)] = {
                ib: sum(m for _, _, m in g) / total for ib, g in groups.items()
            }
            for (i, b), g in groups.items():
                for a in model.dms[i - 1].actions:
                    sub = [(o, u, m) for o, u, m in g if u[i - 1] == a]
                    if sub:
                        nxt[(idx0, history + ((i, b, a),))] = sub
        levels.append(kernels)
        current = nxt
    return levels


def _segment_tables(levels, model):
    """Per-stage noise alphabets (quantile segments) and realization maps.

    Each stage noise coordinate takes one symbol per segment of [0,1)
    refined by every node's cumulative kernel breakpoints; its prior puts
    the segment lengths, and inverse sampling resolves (identity,
    measurement) per node deterministically.
    """
    noise_alphabets = []
    noise_priors = []
    realizers = []
    for kernels in levels:
        cuts = {Fraction(0), Fraction(1)}
        ordered_rows = {}
        for key, row in kernels.items():
            items = sorted(row.items(), key=lambda kv: (kv[0][0], str(kv[0][1])))
            acc = Fraction(0)
            bounds = []
            for ib, p in items:
                acc += p
                bounds.append((acc, ib))
                cuts.add(acc)
            ordered_rows[key] = bounds
        points = sorted(cuts)
        segments = list(zip(points[:-1], points[1:]))
        symbols = tuple(f"s{j}" for j in range(len(segments)))
        weights = {sym: hi - lo for sym, (lo, hi) in zip(symbols, segments)}
        realize = {}
        for key, bounds in ordered_rows.items():
            mapping = {}
            for sym, (lo, _hi) in zip(symbols, segments):
                for acc, ib in bounds:
                    if lo < acc:
                        mapping[sym] = ib
                        break
            realize[key] = mapping
        noise_alphabets.append(symbols)
        noise_priors.append(weights)
        realizers.append(realize)
    return noise_alphabets, noise_priors, realizers


def ci_to_c_equivalent(
    model: IntrinsicModel, certificate_policies=None, max_outcomes: int = MAX_EQUIVALENT_OUTCOMES
):
    """Construct an equivalent causal model; returns (model, certificate).

    Raises NotCI when the input lacks causal implementability and
    ValidationError when the realization would exceed the desk-scale
    outcome bound.
    """
    schedules = _pointwise_schedules(model)
    levels = _stage_nodes(model, schedules)
    noise_alphabets, noise_priors, realizers = _segment_tables(levels, model)

    n = model.n_dms
    signals = [model.signals[0], model.signals[1]]
    for k in range(1, n + 1):
        signals.append((noise_name(k), noise_alphabets[k - 1]))
    signals = tuple(signals)

    size = len(signals[0][1]) * len(signals[1][1])
    for k in range(1, n + 1):
        size *= max(len(noise_alphabets[k - 1]), 1)
    for dm in model.dms:
        size *= len(dm.actions)
    if size > max_outcomes:
        raise ValidationError(
            f"equivalent model would have {size} outcome/action rows "
            f"(bound {max_outcomes}); model too large for exact realization"
        )

    prior0: dict = {}
    for omega in model.support():
        prior0[_idx0(omega)] = prior0.get(_idx0(omega), Fraction(0)) + model.prior_of(omega)
    supported_idx0 = set(prior0)

    prior: dict = {}
    for idx0, p0 in prior0.items():
        for noise in itertools.product(*noise_alphabets):
            mass = p0
            for k, sym in enumerate(noise):
                mass *= noise_priors[k][sym]
            if mass:
                prior[idx0 + noise] = mass

    def replay(idx0, noise, u):
        """Stage sequence ((identity, measurement, action) ...) at one outcome."""
        history = ()
        for k in range(n):
            i, b = realizers[k][(idx0, history)][noise[k]]
            history = history + ((i, b, u[i - 1]),)
        return history

    all_args = tuple(name for name, _ in signals) + tuple(
        action_arg(i) for i in range(1, n + 1)
    )
    tables = [dict() for _ in range(n)]
    stage_tables = [dict() for _ in range(n)]
    fallback = tuple(dm.measurements[0] for dm in model.dms)
    signal_space = list(itertools.product(*(symbols for _, symbols in signals)))
    for omega in signal_space:
        idx0, noise = omega[:2], omega[2:]
        if idx0 not in supported_idx0:
            for u in model.action_profiles():
                for i in range(1, n + 1):
                    tables[i - 1][omega + u] = fallback[i - 1]
            continue
        for u in model.action_profiles():
            history = replay(idx0, noise, u)
            for k, (i, b, _a) in enumerate(history):
                tables[i - 1][omega + u] = b
                stage_tables[k][omega + tuple(a for _, _, a in history[:k])] = i

    dms = tuple(
        DecisionMaker(
            dm.index, dm.actions, dm.measurements, all_args, tables[dm.index - 1]
        )
        for dm in model.dms
    )

    stages = []
    for k in range(n):
        args = tuple(name for name, _ in signals) + tuple(
            stage_action_arg(j) for j in range(1, k + 1)
        )
        table = dict(stage_tables[k])
        # off-support chance outcomes never matter; act in index order there
        for omega in signal_space:
            if omega[:2] in supported_idx0:
                continue
            for prefix in itertools.product(*(model.dms[j].actions for j in range(k))):
                table[omega + prefix] = k + 1
        stages.append(OrderingStage(args, table))
    psi = OrderingFunction("tree", n, stages=tuple(stages))

    equivalent = IntrinsicModel(
        n_dms=n,
        signals=signals,
        prior=prior,
        dms=dms,
        cost_args=model.cost_args,
        cost=dict(model.cost),
        ordering=psi,
    )
    equivalent = validate(equivalent)

    cert = certify_equivalence(model, equivalent, certificate_policies)
    return equivalent, cert


def joint_law(model: IntrinsicModel, policy: PolicyProfile) -> dict:
    """Law of (w0, ws0, measurement vector, action vector) under a policy."""
    law: dict = {}
    for omega in model.support():
        u = solution_map(model, policy, omega)
        ys = tuple(model.measurement(i, omega, u) for i in range(1, model.n_dms + 1))
        key = (_idx0(omega), ys, u)
        law[key] = law.get(key, Fraction(0)) + model.prior_of(omega)
    return law


def certify_equivalence(original, equivalent, policies=None) -> EquivalenceCertificate:
    """Exact per-policy law and value comparison between two models."""
    from ..model import expected_cost

    if policies is None:
        if original.policy_count() <= 256:
            policies = list(original.all_policies())
        else:
            from ..generator import sample_policies

            policies = sample_policies(original, 64, seed=20250102)
    mismatches = []
    for policy in policies:
        lo = joint_law(original, policy)
        le = joint_law(equivalent, policy)
        if lo != le:
            mismatches.append((policy, "law"))
            continue
        if expected_cost(original, policy) != expected_cost(equivalent, policy):
            mismatches.append((policy, "value"))
    return EquivalenceCertificate(
        policies_checked=len(policies),
        laws_match=all(kind != "law" for _, kind in mismatches),
        values_match=not mismatches,
        ordering=equivalent.ordering,
        noise_sizes=tuple(len(s) for _, s in equivalent.signals[2:]),
        mismatches=tuple(mismatches),
    )
