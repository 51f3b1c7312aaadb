"""Static reductions: policy-independent under causality, policy-dependent
under solvability only.

The reduced problem draws every stage measurement independently from a
full-support reference measure Q; all action-dependence moves into the
reduced cost via density factors f = conditional / Q together with the
next-actor indicator bookkeeping.  The value condition (exact equality of
the reduced and dynamic expected costs, per policy) is the certificate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import NotSolvable
from ..model import IntrinsicModel, OrderingFunction, PolicyProfile, solution_map
from .imaginary import build_imaginary, _idx0

Q_UNIFORM = "uniform"
Q_DYADIC = "dyadic"


def reference_measure(symbols: tuple, mode: str) -> dict:
    """A full-support reference measure on a finite measurement alphabet.

    ``uniform`` weighs every symbol 1/n.  ``dyadic`` weighs the i-th
    symbol (canonical order, 1-based) proportionally to 2^-i, normalized
    to total mass one on the finite alphabet.
    """
    n = len(symbols)
    if mode == Q_UNIFORM:
        return {s: Fraction(1, n) for s in symbols}
    if mode == Q_DYADIC:
        total = (1 << n) - 1
        return {s: Fraction(1 << (n - i), total) for i, s in enumerate(symbols, start=1)}
    raise ValueError(f"unknown reference mode {mode!r}")


@dataclass(frozen=True)
class ReducedStaticModel:
    """A static problem equivalent to a dynamic non-sequential one.

    Histories are tuples of (actor, measurement, action) triples keyed
    with the (w0, ws0) pair.  ``actors`` resolves the identity acting at
    each reachable history (the sigma_s bookkeeping); ``densities`` holds
    the change-of-measure factors; ``cost`` is the reduced cost table over
    (idx0, stage measurements, stage actions), with omitted rows zero.
    For policy-parameterized reductions the history actions are pinned to
    the parameter policy and the evaluated policy enters the cost
    argument only.
    """

    n_dms: int
    idx0_coords: tuple                 # ((name, alphabet), (name, alphabet))
    prior0: dict
    dm_actions: tuple
    dm_measurements: tuple
    stage_y: tuple
    q_mode: str
    q: tuple                           # per stage: {y: Fraction}
    actors: dict                       # (idx0, history) -> identity
    densities: tuple                   # per stage: {(idx0, history): {y: Fraction}}
    cost: dict                         # (idx0, y_tuple, u_tuple) -> Fraction
    orderings: dict                    # realized s -> stage->DM permutation table
    policy_parameterized: bool = False
    policy: PolicyProfile | None = None

    _leaves: list = field(default_factory=list, repr=False, compare=False)

    def policy_shape(self):
        return tuple(
            (self.dm_measurements[i], self.dm_actions[i]) for i in range(self.n_dms)
        )


def _cost_lookup(model: IntrinsicModel, idx0: tuple, u_by_dm: dict) -> Fraction:
    key = []
    for arg in model.cost_args:
        if arg == "w0":
            key.append(idx0[0])
        elif arg == "ws0":
            key.append(idx0[1])
        else:
            key.append(u_by_dm[int(arg[1:])])
    return model.cost[tuple(key)]


def static_reduce(
    model: IntrinsicModel,
    psi: OrderingFunction | None = None,
    q_mode: str = Q_UNIFORM,
    cert_policies: int = 2,
) -> ReducedStaticModel:
    """Policy-independent static reduction of a causal model.

    Stage reference measures live on the union measurement alphabet;
    density rows divide the imaginary-model kernels by Q; the reduced
    cost multiplies the density factors along each realizable history
    with the relabeled original cost.  Raises NotCausal when no ordering
    measurable in the public history exists.
    """
    imaginary = build_imaginary(model, psi, cert_policies=cert_policies)
    n = model.n_dms
    q_row = reference_measure(imaginary.stage_y, q_mode)
    q = tuple(dict(q_row) for _ in range(n))

    densities = tuple({} for _ in range(n))
    for (idx0, history), kernel in imaginary.kernels.items():
        k = len(history)
        densities[k][(idx0, history)] = {y: p / q[k][y] for y, p in kernel.items()}

    cost: dict = {}
    orderings: dict = {}

    def walk(idx0, history, factor):
        k = len(history)
        if k == n:
            s = tuple(i for i, _, _ in history)
            orderings[s] = {stage + 1: dm for stage, dm in enumerate(s)}
            u_by_dm = {i: a for i, _, a in history}
            base = _cost_lookup(model, idx0, u_by_dm)
            ys = tuple(y for _, y, _ in history)
            us = tuple(a for _, _, a in history)
            value = factor * base
            if value:
                cost[(idx0, ys, us)] = value
            return
        actor = imaginary.actors[(idx0, history)]
        for y, f in densities[k][(idx0, history)].items():
            for a in model.dms[actor - 1].actions:
                walk(idx0, history + ((actor, y, a),), factor * f)

    for idx0 in imaginary.prior0:
        walk(idx0, (), Fraction(1))

    return ReducedStaticModel(
        n_dms=n,
        idx0_coords=(model.signals[0], model.signals[1]),
        prior0=dict(imaginary.prior0),
        dm_actions=tuple(dm.actions for dm in model.dms),
        dm_measurements=tuple(dm.measurements for dm in model.dms),
        stage_y=imaginary.stage_y,
        q_mode=q_mode,
        q=q,
        actors=dict(imaginary.actors),
        densities=densities,
        cost=cost,
        orderings=orderings,
    )


def sm_reduce(
    model: IntrinsicModel,
    policy: PolicyProfile,
    q_mode: str = Q_UNIFORM,
    order: tuple | None = None,
) -> ReducedStaticModel:
    """Policy-dependent static reduction under solvability alone.

    Stages follow a fixed arbitrary DM order (default 1..N).  Kernels are
    conditionals of the closed-loop joint under the supplied policy, so
    the densities and the reduced cost carry the policy as a parameter;
    the value condition holds at that policy only.
    """
    n = model.n_dms
    order = tuple(order) if order is not None else tuple(range(1, n + 1))
    if sorted(order) != list(range(1, n + 1)):
        raise ValueError(f"stage order {order} is not a permutation of 1..{n}")

    # realized measurement/action vectors per supported omega
    realized = []
    for omega in model.support():
        u = solution_map(model, policy, omega)  # NotSolvable names the witness
        ys = {i: model.measurement(i, omega, u) for i in range(1, n + 1)}
        realized.append((omega, model.prior_of(omega), ys, u))

    prior0: dict = {}
    for omega, mass, _, _ in realized:
        prior0[_idx0(omega)] = prior0.get(_idx0(omega), Fraction(0)) + mass

    q = tuple(
        reference_measure(model.dms[dm - 1].measurements, q_mode) for dm in order
    )

    actors: dict = {}
    densities = tuple({} for _ in range(n))
    cost: dict = {}

    def node_members(idx0, history):
        out = []
        for omega, mass, ys, u in realized:
            if _idx0(omega) != idx0:
                continue
            if all(ys[dm] == y for (dm, y, _) in history):
                out.append((omega, mass, ys, u))
        return out

    def walk(idx0, history, factor):
        k = len(history)
        members = node_members(idx0, history)
        if not members:
            return
        if k == n:
            # density factors depend on the measurement path only; the
            # evaluated policy picks the action row through the base cost
            ys = tuple(y for _, y, _ in history)
            for us in itertools.product(*(model.dms[dm - 1].actions for dm in order)):
                u_by_dm = {dm: a for dm, a in zip(order, us)}
                value = factor * _cost_lookup(model, idx0, u_by_dm)
                if value:
                    cost[(idx0, ys, us)] = value
            return
        dm = order[k]
        actors[(idx0, history)] = dm
        total = sum(mass for _, mass, _, _ in members)
        kernel: dict = {}
        for _, mass, ys, _ in members:
            kernel[ys[dm]] = kernel.get(ys[dm], Fraction(0)) + mass
        row = {y: (m / total) / q[k][y] for y, m in kernel.items()}
        densities[k][(idx0, history)] = row
        for y, f in row.items():
            a = policy.action(dm, y)
            walk(idx0, history + ((dm, y, a),), factor * f)

    for idx0 in prior0:
        walk(idx0, (), Fraction(1))

    return ReducedStaticModel(
        n_dms=n,
        idx0_coords=(model.signals[0], model.signals[1]),
        prior0=prior0,
        dm_actions=tuple(dm.actions for dm in model.dms),
        dm_measurements=tuple(dm.measurements for dm in model.dms),
        stage_y=tuple(sorted({y for dm in model.dms for y in dm.measurements})),
        q_mode=q_mode,
        q=q,
        actors=actors,
        densities=densities,
        cost=cost,
        orderings={order: {k + 1: dm for k, dm in enumerate(order)}},
        policy_parameterized=True,
        policy=policy,
    )


def static_value(red: ReducedStaticModel, policy: PolicyProfile) -> Fraction:
    """Expected cost of the reduced static problem under ``policy``.

    Measurements are exogenous draws from Q; identities resolve through
    the actor table; the reduced cost reassembles density and cost
    factors.  For policy-parameterized reductions the history threading
    follows the parameter policy while the evaluated policy only selects
    the cost row.
    """
    total = Fraction(0)
    for leaf_weight, idx0, ys, us, requirements in _leaves(red):
        if all(policy.action(dm, y) == a for dm, y, a in requirements):
            total += leaf_weight
    return total


def _leaves(red: ReducedStaticModel) -> list:
    """Flattened evaluation tree: per leaf, P0*prod(Q)*cost and the policy
    requirements (dm, measurement, action) that select it."""
    if red._leaves:
        return red._leaves
    n = red.n_dms
    out = []

    def emit(idx0, history, qfactor):
        ys = tuple(y for _, y, _ in history)
        stage_dms = tuple(dm for dm, _, _ in history)
        if red.policy_parameterized:
            # histories were threaded with the parameter policy; the
            # evaluated policy selects the action row of the cost table
            for us in itertools.product(*(red.dm_actions[dm - 1] for dm in stage_dms)):
                c = red.cost.get((idx0, ys, us), Fraction(0))
                if c:
                    req = tuple(zip(stage_dms, ys, us))
                    out.append((red.prior0[idx0] * qfactor * c, idx0, ys, us, req))
        else:
            us = tuple(a for _, _, a in history)
            c = red.cost.get((idx0, ys, us), Fraction(0))
            if c:
                req = tuple((dm, y, a) for dm, y, a in history)
                out.append((red.prior0[idx0] * qfactor * c, idx0, ys, us, req))

    def walk(idx0, history, qfactor):
        k = len(history)
        if k == n:
            emit(idx0, history, qfactor)
            return
        key = (idx0, history)
        if key not in red.actors:
            return
        actor = red.actors[key]
        for y in red.q[k]:
            if y not in red.dm_measurements[actor - 1]:
                continue
            if red.policy_parameterized:
                a = red.policy.action(actor, y)
                walk(idx0, history + ((actor, y, a),), qfactor * red.q[k][y])
            else:
                for a in red.dm_actions[actor - 1]:
                    walk(idx0, history + ((actor, y, a),), qfactor * red.q[k][y])

    for idx0 in red.prior0:
        walk(idx0, (), Fraction(1))
    red._leaves.extend(out)
    return red._leaves


def batch_values(red: ReducedStaticModel, policies) -> list:
    """Exact reduced values for many policies via the leaf table."""
    leaves = _leaves(red)
    if not leaves:
        return [Fraction(0) for _ in policies]
    den = math.lcm(*(w.denominator for w, *_ in leaves))
    scaled = [(int(w * den), req) for w, _, _, _, req in leaves]
    out = []
    for policy in policies:
        total = 0
        for num, req in scaled:
            if all(policy.action(dm, y) == a for dm, y, a in req):
                total += num
        out.append(Fraction(total, den))
    return out


def dynamic_values(model: IntrinsicModel, policies) -> list:
    """Exact J(gamma) for many policies via the fixed-point kernels."""
    from .. import kernels
    from ..encode import compile_model

    compiled = compile_model(model)
    policies = list(policies)
    out = []
    chunk = 4096
    for start in range(0, len(policies), chunk):
        batch = policies[start : start + chunk]
        sol = kernels.solve_policies(compiled, batch)
        nums, ok = kernels.j_batch(compiled, sol)
        for bi, (policy, num, good) in enumerate(zip(batch, nums, ok)):
            if not good:
                bad = next(
                    oi for oi in range(compiled.n_omega)
                    if compiled.support[oi] and sol[bi, oi] < 0
                )
                count = 0 if sol[bi, bad] == -1 else 2
                raise NotSolvable(policy, compiled.omega_tuples[bad], count)
            out.append(compiled.value_from_numerator(num))
    return out


def verify_value_condition(
    model: IntrinsicModel, red: ReducedStaticModel, policies
) -> tuple:
    """Exact J_dynamic == J_static per policy; returns (checked, mismatches).

    The dynamic side goes through the closed-loop fixed-point solver,
    fully independent of the reduction machinery.
    """
    policies = list(policies)
    statics = batch_values(red, policies)
    dynamics = dynamic_values(model, policies)
    mismatches = []
    for policy, dv, sv in zip(policies, dynamics, statics):
        if dv != sv:
            mismatches.append((policy, dv, sv))
    return len(policies), mismatches
