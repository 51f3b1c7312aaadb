"""Finite intrinsic models, deterministic policies, and the exact solution map.

All probabilities and costs are ``fractions.Fraction``; the core never
touches floating point, so value-equivalence results can be asserted as
exact equalities.  Models and policies are immutable after construction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from . import sigma
from .errors import (
    MissingEntry,
    NormalizationError,
    NotSolvable,
    ValidationError,
)

SIGNAL_W0 = "w0"
SIGNAL_WS0 = "ws0"


def noise_name(i: int) -> str:
    return f"w{i}"


def action_arg(i: int) -> str:
    return f"u{i}"


def stage_action_arg(k: int) -> str:
    return f"us{k}"


@dataclass(frozen=True)
class DecisionMaker:
    """One DM: action and measurement alphabets plus its measurement table.

    ``observes`` is the declared argument list of the measurement map, a
    mix of signal coordinate names and action names ``u1..uN``; the table
    is keyed by symbol tuples in that order.  A coordinate not listed is
    declared absent and the measurement must genuinely ignore it.
    """

    index: int
    actions: tuple[str, ...]
    measurements: tuple[str, ...]
    observes: tuple[str, ...]
    table: dict = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "table", dict(self.table))


@dataclass(frozen=True)
class OrderingStage:
    """One stage of a causal-tree ordering: args and the decision table."""

    args: tuple[str, ...]
    table: dict = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "table", dict(self.table))


@dataclass(frozen=True)
class OrderingFunction:
    """An ordering function, either a flat table or a causal tree.

    Flat form maps every (signal, action) tuple over ``flat_args`` to a
    full permutation of 1..N.  Tree form gives, per stage k, a table over
    signal coordinates and realized stage actions ``us1..us(k-1)`` whose
    value is the identity of the k-th DM to act.
    """

    kind: str  # "flat" | "tree"
    n_dms: int
    flat_args: tuple[str, ...] = ()
    flat_table: dict = field(default_factory=dict, repr=False)
    stages: tuple[OrderingStage, ...] = ()

    def __post_init__(self):
        if self.kind not in ("flat", "tree"):
            raise ValidationError(f"unknown ordering kind {self.kind!r}")
        object.__setattr__(self, "flat_table", dict(self.flat_table))

    def stage_actor(self, model: "IntrinsicModel", omega: tuple, acted: tuple) -> int:
        """Identity of the next DM after ``acted`` = ((dm, action), ...) at omega."""
        k = len(acted) + 1
        if self.kind == "tree":
            stage = self.stages[k - 1]
            key = []
            for arg in stage.args:
                if arg.startswith("us"):
                    j = int(arg[2:])
                    key.append(acted[j - 1][1])
                else:
                    key.append(omega[model.signal_pos[arg]])
            key = tuple(key)
            if key not in stage.table:
                raise MissingEntry(f"ordering stage {k} undefined at {key}")
            return stage.table[key]
        # Flat form: the k-th entry must be constant over completions of the
        # fixed actions, which holds whenever the ordering satisfies RCS.
        fixed = {dm: a for dm, a in acted}
        seen = set()
        for u in model.action_profiles():
            if all(u[dm - 1] == a for dm, a in fixed.items()):
                seen.add(self.permutation(model, omega, u)[k - 1])
        if len(seen) != 1:
            raise ValidationError(
                f"flat ordering stage {k} not determined by prefix at omega={omega}"
            )
        return seen.pop()

    def permutation(self, model: "IntrinsicModel", omega: tuple, u: tuple) -> tuple:
        """The full N-DM ordering realized at intrinsic outcome (omega, u)."""
        if self.kind == "flat":
            key = []
            for arg in self.flat_args:
                if arg in model.signal_pos:
                    key.append(omega[model.signal_pos[arg]])
                else:
                    key.append(u[int(arg[1:]) - 1])
            key = tuple(key)
            if key not in self.flat_table:
                raise MissingEntry(f"flat ordering undefined at {key}")
            return self.flat_table[key]
        acted = []
        for _ in range(self.n_dms):
            i = self.stage_actor(model, omega, tuple(acted))
            acted.append((i, u[i - 1]))
        return tuple(dm for dm, _ in acted)


@dataclass(frozen=True)
class PolicyProfile:
    """One deterministic measurement-to-action table per DM."""

    tables: tuple  # tuple of dicts, tables[i-1]: Y^i symbol -> U^i symbol

    def __post_init__(self):
        object.__setattr__(self, "tables", tuple(dict(t) for t in self.tables))

    def action(self, dm: int, y: str) -> str:
        table = self.tables[dm - 1]
        if y not in table:
            raise MissingEntry(f"policy for DM {dm} undefined at measurement {y!r}")
        return table[y]

    def key(self, model: "IntrinsicModel") -> tuple:
        """Canonical encoding: action indices listed per DM in alphabet order."""
        out = []
        for dm in model.dms:
            table = self.tables[dm.index - 1]
            out.append(tuple(dm.actions.index(table[y]) for y in dm.measurements))
        return tuple(out)


@dataclass(frozen=True)
class IntrinsicModel:
    """A finite non-sequential system.

    Signal coordinates are ordered ``w0, ws0, w1..wN``; the prior is a
    table over full signal tuples (omitted rows carry zero mass).  The
    cost table declares its arguments, a subset of ``w0, ws0, u1..uN``.
    """

    n_dms: int
    signals: tuple[tuple[str, tuple[str, ...]], ...]
    prior: dict = field(repr=False)
    dms: tuple[DecisionMaker, ...]
    cost_args: tuple[str, ...]
    cost: dict = field(repr=False)
    ordering: OrderingFunction | None = None

    signal_pos: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "prior", dict(self.prior))
        object.__setattr__(self, "cost", dict(self.cost))
        object.__setattr__(
            self, "signal_pos", {name: i for i, (name, _) in enumerate(self.signals)}
        )

    # -- enumeration helpers ------------------------------------------------

    def signal_tuples(self):
        return itertools.product(*(symbols for _, symbols in self.signals))

    def action_profiles(self):
        return itertools.product(*(dm.actions for dm in self.dms))

    def support(self):
        for omega in self.signal_tuples():
            if self.prior.get(omega, Fraction(0)) > 0:
                yield omega

    def prior_of(self, omega: tuple) -> Fraction:
        return self.prior.get(omega, Fraction(0))

    # -- table evaluation ---------------------------------------------------

    def _args_key(self, args: tuple[str, ...], omega: tuple, u: tuple) -> tuple:
        key = []
        for arg in args:
            if arg in self.signal_pos:
                key.append(omega[self.signal_pos[arg]])
            else:
                key.append(u[int(arg[1:]) - 1])
        return tuple(key)

    def measurement(self, dm: int, omega: tuple, u: tuple) -> str:
        d = self.dms[dm - 1]
        key = self._args_key(d.observes, omega, u)
        if key not in d.table:
            raise MissingEntry(f"eta^{dm} undefined at {key}")
        return d.table[key]

    def cost_of(self, omega: tuple, u: tuple) -> Fraction:
        key = self._args_key(self.cost_args, omega, u)
        if key not in self.cost:
            raise MissingEntry(f"cost undefined at {key}")
        return self.cost[key]

    def information_field(self, dm: int, ground: sigma.GroundSet | None = None):
        """The field induced on Omega x prod(U) by eta^dm."""
        if ground is None:
            ground = self.full_ground()
        n = self.n_dms
        return sigma.field_from_map(
            ground,
            lambda elem: self.measurement(dm, elem[: len(elem) - n], elem[len(elem) - n :]),
        )

    def full_ground(self) -> sigma.GroundSet:
        coords = list(self.signals) + [
            (action_arg(i), dm.actions) for i, dm in enumerate(self.dms, start=1)
        ]
        return sigma.GroundSet(tuple(coords))

    def policy_count(self) -> int:
        n = 1
        for dm in self.dms:
            n *= len(dm.actions) ** len(dm.measurements)
        return n

    def all_policies(self):
        """Iterate every deterministic policy profile in canonical order."""
        per_dm = []
        for dm in self.dms:
            per_dm.append(
                [
                    dict(zip(dm.measurements, choice))
                    for choice in itertools.product(dm.actions, repeat=len(dm.measurements))
                ]
            )
        for combo in itertools.product(*per_dm):
            yield PolicyProfile(tuple(combo))


def validate(model: IntrinsicModel) -> IntrinsicModel:
    """Check every structural invariant exhaustively; return the model.

    Raises ``ValidationError`` carrying one diagnostic per violated
    invariant, each naming the offending row.
    """
    diags = []
    names = [name for name, _ in model.signals]
    expected = [SIGNAL_W0, SIGNAL_WS0] + [noise_name(i) for i in range(1, model.n_dms + 1)]
    if names != expected:
        diags.append(f"signal coordinates must be {expected}, got {names}")
    if len(model.dms) != model.n_dms:
        diags.append(f"expected {model.n_dms} DM blocks, got {len(model.dms)}")

    total = Fraction(0)
    for omega, w in model.prior.items():
        if len(omega) != len(model.signals):
            diags.append(f"prior row {omega} has wrong arity")
            continue
        for (name, symbols), val in zip(model.signals, omega):
            if val not in symbols:
                diags.append(f"prior row {omega}: {val!r} not in alphabet of {name}")
        if w < 0:
            diags.append(f"prior row {omega}: negative weight {w}")
        total += w
    if total != 1:
        raise NormalizationError(
            diags + [f"prior weighs {total}, expected exactly 1"]
        )

    valid_args = set(names) | {action_arg(i) for i in range(1, model.n_dms + 1)}
    for dm in model.dms:
        for arg in dm.observes:
            if arg not in valid_args:
                diags.append(f"DM {dm.index}: unknown observed coordinate {arg!r}")
        domains = []
        for arg in dm.observes:
            if arg in model.signal_pos:
                domains.append(model.signals[model.signal_pos[arg]][1])
            else:
                domains.append(model.dms[int(arg[1:]) - 1].actions)
        domain = set(itertools.product(*domains))
        for key in domain:
            if key not in dm.table:
                diags.append(f"DM {dm.index}: eta row missing at {key}")
            elif dm.table[key] not in dm.measurements:
                diags.append(
                    f"DM {dm.index}: eta value {dm.table[key]!r} at {key} "
                    "outside measurement alphabet"
                )
        for key in dm.table:
            if tuple(key) not in domain:
                diags.append(f"DM {dm.index}: eta row {key} outside declared domain")
        # Tables are keyed by their declared arguments only, so a coordinate
        # declared absent is ignored by construction; no constancy sweep needed.

    for arg in model.cost_args:
        if arg not in ({SIGNAL_W0, SIGNAL_WS0} | {action_arg(i) for i in range(1, model.n_dms + 1)}):
            diags.append(f"cost: argument {arg!r} must be one of w0, ws0, u1..uN")
    cost_domains = []
    for arg in model.cost_args:
        if arg in model.signal_pos:
            cost_domains.append(model.signals[model.signal_pos[arg]][1])
        else:
            cost_domains.append(model.dms[int(arg[1:]) - 1].actions)
    for key in itertools.product(*cost_domains):
        if key not in model.cost:
            diags.append(f"cost row missing at {key}")
        elif model.cost[key] < 0:
            diags.append(f"cost row {key}: negative value {model.cost[key]}")

    if model.ordering is not None:
        diags.extend(_validate_ordering(model))

    if diags:
        raise ValidationError(diags)
    return model


def _validate_ordering(model: IntrinsicModel):
    diags = []
    psi = model.ordering
    if psi.n_dms != model.n_dms:
        diags.append(f"ordering declares {psi.n_dms} DMs, model has {model.n_dms}")
        return diags
    if psi.kind == "flat":
        for key, perm in psi.flat_table.items():
            if sorted(perm) != list(range(1, model.n_dms + 1)):
                diags.append(f"ordering row {key}: {perm} is not a permutation of 1..N")
    else:
        if len(psi.stages) != model.n_dms:
            diags.append(f"ordering tree has {len(psi.stages)} stages, expected {model.n_dms}")
            return diags
        for omega in model.signal_tuples():
            for u in model.action_profiles():
                try:
                    perm = psi.permutation(model, omega, u)
                except MissingEntry as exc:
                    diags.append(str(exc))
                    return diags
                if sorted(perm) != list(range(1, model.n_dms + 1)):
                    diags.append(
                        f"ordering at omega={omega}, u={u}: branch reuses index ({perm})"
                    )
                    return diags
    return diags


def solve_closed_loop(model: IntrinsicModel, policy: PolicyProfile, omega: tuple) -> set:
    """All action tuples satisfying u^i = gamma^i(eta^i(omega, u)), by exhaustion.

    The system is solvable at (policy, omega) iff the returned set is a
    singleton; an empty set signals a deadlocked inconsistency.
    """
    out = set()
    for u in model.action_profiles():
        if all(
            policy.action(i, model.measurement(i, omega, u)) == u[i - 1]
            for i in range(1, model.n_dms + 1)
        ):
            out.add(u)
    return out


def solution_map(model: IntrinsicModel, policy: PolicyProfile, omega: tuple) -> tuple:
    """The unique closed-loop action tuple, or NotSolvable naming omega."""
    sols = solve_closed_loop(model, policy, omega)
    if len(sols) != 1:
        raise NotSolvable(policy, omega, len(sols))
    return next(iter(sols))


def expected_cost(model: IntrinsicModel, policy: PolicyProfile) -> Fraction:
    """Exact expected cost J(gamma) over the prior's support."""
    total = Fraction(0)
    for omega in model.support():
        u = solution_map(model, policy, omega)
        total += model.prior_of(omega) * model.cost_of(omega, u)
    return total
