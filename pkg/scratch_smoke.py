"""Scratch smoke test: paper fixtures built programmatically."""
import itertools
from fractions import Fraction

from nsteams.model import (
    DecisionMaker, IntrinsicModel, OrderingFunction, OrderingStage,
    PolicyProfile, validate, solve_closed_loop, expected_cost,
)
from nsteams import properties as props


def example2():
    # N=2, Omega={0,1}; y^1=(w0,u2), y^2=(w0,u1); full-power-set fields
    dm1 = DecisionMaker(
        1, actions=("0", "1"), measurements=("00", "01", "10", "11"),
        observes=("w0", "u2"),
        table={(w, u): w + u for w in "01" for u in "01"},
    )
    dm2 = DecisionMaker(
        2, actions=("0", "1"), measurements=("00", "01", "10", "11"),
        observes=("w0", "u1"),
        table={(w, u): w + u for w in "01" for u in "01"},
    )
    prior = {("0", "x", "x", "x"): Fraction(1, 2), ("1", "x", "x", "x"): Fraction(1, 2)}
    return IntrinsicModel(
        n_dms=2,
        signals=(("w0", ("0", "1")), ("ws0", ("x",)), ("w1", ("x",)), ("w2", ("x",))),
        prior=prior,
        dms=(dm1, dm2),
        cost_args=("w0",),
        cost={("0",): Fraction(0), ("1",): Fraction(1)},
    )


def example1():
    # N=3; y^1 = w*(1-u2)*u3, y^2 = w*(1-u3)*u1, y^3 = w*(1-u1)*u2
    def tab(expr):
        out = {}
        for w, a, b in itertools.product("01", repeat=3):
            out[(w, a, b)] = str(expr(int(w), int(a), int(b)))
        return out

    dm1 = DecisionMaker(1, ("0", "1"), ("0", "1"), ("w0", "u2", "u3"),
                        tab(lambda w, u2, u3: w * (1 - u2) * u3))
    dm2 = DecisionMaker(2, ("0", "1"), ("0", "1"), ("w0", "u3", "u1"),
                        tab(lambda w, u3, u1: w * (1 - u3) * u1))
    dm3 = DecisionMaker(3, ("0", "1"), ("0", "1"), ("w0", "u1", "u2"),
                        tab(lambda w, u1, u2: w * (1 - u1) * u2))
    prior = {("0", "x", "x", "x", "x"): Fraction(1, 2), ("1", "x", "x", "x", "x"): Fraction(1, 2)}
    return IntrinsicModel(
        n_dms=3,
        signals=(("w0", ("0", "1")), ("ws0", ("x",)), ("w1", ("x",)), ("w2", ("x",)), ("w3", ("x",))),
        prior=prior,
        dms=(dm1, dm2, dm3),
        cost_args=("w0",),
        cost={("0",): Fraction(0), ("1",): Fraction(1)},
    )


def example5():
    Y = ("0", "1/2", "1")

    def eta1(w0, ws0, w1, u2, u3):
        if ws0 + w0 == 0:
            return "1"
        if ws0 * w1 * u2 == 1:
            return "0"
        return "1/2"

    def eta2(w0, ws0, w2, u1, u3):
        if ws0 * w0 == 1:
            return "1"
        if ws0 + u1 * u3 == 0:
            return "0"
        return "1/2"

    def eta3(w0, ws0, w3, u1, u2):
        if w3 * u1 == 1:
            return "1"
        if u1 + u2 == 0:
            return "0"
        return "1/2"

    def tab(f, args):
        out = {}
        for vals in itertools.product("01", repeat=len(args)):
            out[vals] = f(*(int(v) for v in vals))
        return out

    dm1 = DecisionMaker(1, ("0", "1"), Y, ("w0", "ws0", "w1", "u2", "u3"),
                        tab(eta1, "abcde"))
    dm2 = DecisionMaker(2, ("0", "1"), Y, ("w0", "ws0", "w2", "u1", "u3"),
                        tab(eta2, "abcde"))
    dm3 = DecisionMaker(3, ("0", "1"), Y, ("w0", "ws0", "w3", "u1", "u2"),
                        tab(eta3, "abcde"))
    prior = {
        w: Fraction(1, 32) for w in itertools.product("01", repeat=5)
    }
    cost = {}
    for w0, u1, u2, u3 in itertools.product("01", repeat=4):
        cost[(w0, u1, u2, u3)] = Fraction(int(w0) + int(u1) + int(u2) + int(u3))
    psi = OrderingFunction(
        "tree", 3,
        stages=(
            OrderingStage(("ws0",), {("0",): 1, ("1",): 2}),
            OrderingStage(("ws0", "us1"), {("0", "0"): 2, ("0", "1"): 3, ("1", "0"): 1, ("1", "1"): 1}),
            OrderingStage(("ws0", "us1", "us2"), {
                ("0", "0", a): 3 for a in "01"} | {("0", "1", a): 2 for a in "01"}
                | {("1", b, a): 3 for a in "01" for b in "01"}),
        ),
    )
    return IntrinsicModel(
        n_dms=3,
        signals=tuple((n, ("0", "1")) for n in ("w0", "ws0", "w1", "w2", "w3")),
        prior=prior,
        dms=(dm1, dm2, dm3),
        cost_args=("w0", "u1", "u2", "u3"),
        cost=cost,
        ordering=psi,
    )


m2 = validate(example2())
copy_policy = PolicyProfile((
    {"00": "0", "01": "1", "10": "0", "11": "1"},
    {"00": "0", "01": "1", "10": "0", "11": "1"},
))
sols = solve_closed_loop(m2, copy_policy, ("0", "x", "x", "x"))
print("example2 copy-policy at w=0:", sorted(sols))
assert sols == {("0", "0"), ("1", "1")}
r = props.check_sm(m2)
print("example2 SM:", r.verdict, r.witness[1] if r.witness else None)
assert not r.verdict

m1 = validate(example1())
rdf = props.check_df(m1)
print("example1 DF:", rdf.verdict)
assert not rdf.verdict
rci = props.check_ci(m1)
print("example1 CI:", rci.verdict, "witness point:", rci.witness)
assert not rci.verdict
rc = props.check_c(m1)
print("example1 C:", rc.verdict)
assert not rc.verdict
rsm1 = props.check_sm(m1)
print("example1 SM:", rsm1.verdict)

m5 = validate(example5())
rc5 = props.check_c(m5)
print("example5 C:", rc5.verdict, "witness is supplied:", rc5.witness is m5.ordering)
assert rc5.verdict and rc5.witness is m5.ordering
rci5 = props.check_ci(m5)
print("example5 CI:", rci5.verdict)
rdf5 = props.check_df(m5)
print("example5 DF:", rdf5.verdict)
rsm5 = props.check_sm(m5)
print("example5 SM:", rsm5.verdict)
assert rci5.verdict and rdf5.verdict and rsm5.verdict

zero_policy = PolicyProfile(tuple({y: "0" for y in ("0", "1/2", "1")} for _ in range(3)))
for omega in m5.support():
    s = solve_closed_loop(m5, zero_policy, omega)
    assert s == {("0", "0", "0")}, (omega, s)
j = expected_cost(m5, zero_policy)
print("example5 J(zero):", j)
assert j == Fraction(1, 2)

rrcs = props.check_rcs(m5, m5.ordering)
print("example5 RCS:", rrcs.verdict)
assert rrcs.verdict

cls = props.classify(m5, m5.ordering)
print("example5 classify:", cls)

viol = props.audit_implications([m1, m2, m5])
print("audit violations:", len(viol))
assert not viol
print("SMOKE OK")
