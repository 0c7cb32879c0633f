"""Shared builders for the bundled vocabularies, constructed by hand.

Tests that exercise the file formats load the shipped data files instead;
building the same objects two ways keeps the two paths honest.
"""

from __future__ import annotations

import pytest

from prooftree.terms import (
    App,
    Connective,
    MetaVar,
    Seq,
    SeqVar,
    Signature,
    Sort,
    mk_seq,
    mk_term,
)


@pytest.fixture(scope="session")
def impl_sig() -> Signature:
    """Implicational sequent vocabulary: Form, Cont = seq of Form, Seq."""
    form = Sort("Form")
    cont = Sort("Cont", element=form)
    seq = Sort("Seq")
    return Signature(
        [form, cont, seq],
        [
            Connective("p", (), form),
            Connective("q", (), form),
            Connective("imp", (form, form), form),
            Connective("|-", (cont, form), seq),
        ],
    )


@pytest.fixture(scope="session")
def impl_min_sig() -> Signature:
    """Single-atom variant used by the exhaustive desk-scale oracles."""
    form = Sort("Form")
    cont = Sort("Cont", element=form)
    seq = Sort("Seq")
    return Signature(
        [form, cont, seq],
        [
            Connective("p", (), form),
            Connective("imp", (form, form), form),
            Connective("|-", (cont, form), seq),
        ],
    )


@pytest.fixture(scope="session")
def intro_sig() -> Signature:
    """The three-sorted adjunction vocabulary with sorts A, B, C."""
    a_sort = Sort("A")
    b_sort = Sort("B")
    c_sort = Sort("C")
    return Signature(
        [a_sort, b_sort, c_sort],
        [
            Connective("a", (), a_sort),
            Connective("r", (b_sort,), a_sort),
            Connective("f", (b_sort,), a_sort),
            Connective("l", (a_sort,), b_sort),
            Connective("g", (a_sort,), b_sort),
            Connective("|-AA", (a_sort, a_sort), c_sort),
            Connective("|-AB", (a_sort, b_sort), c_sort),
            Connective("|-BB", (b_sort, b_sort), c_sort),
        ],
    )


class ImplBuilder:
    """Convenience wrappers for building implicational sequents and patterns."""

    def __init__(self, sig: Signature):
        self.sig = sig
        self.form = sig.sort("Form")
        self.cont = sig.sort("Cont")

    def atom(self, name: str):
        return mk_term(self.sig, name, [])

    def imp(self, a, b):
        return mk_term(self.sig, "imp", [a, b])

    def seqvar(self, name: str):
        return SeqVar(name, self.cont)

    def fvar(self, name: str):
        return MetaVar(name, self.form)

    def sequent(self, ctx, rhs):
        return mk_term(self.sig, "|-", [mk_seq(self.cont, ctx), rhs])


@pytest.fixture(scope="session")
def impl(impl_sig) -> ImplBuilder:
    return ImplBuilder(impl_sig)


@pytest.fixture(scope="session")
def impl_min(impl_min_sig) -> ImplBuilder:
    return ImplBuilder(impl_min_sig)


def build_impl_calculus(sig: Signature, name: str = "ImpL"):
    """Ax, ImpI, ImpE, Weak, Contr, Exch over an implicational signature."""
    from prooftree.calculus import Calculus, SchematicRule
    from prooftree.terms import VariablePool

    b = ImplBuilder(sig)
    ph, ps = b.fvar("ph"), b.fvar("ps")
    ph1, ph2 = b.fvar("ph1"), b.fvar("ph2")
    g, d = b.seqvar("G"), b.seqvar("D")
    rules = [
        SchematicRule("Ax", (), b.sequent([ph], ph)),
        SchematicRule(
            "ImpI", (b.sequent([d, ph], ps),), b.sequent([d], b.imp(ph, ps))
        ),
        SchematicRule(
            "ImpE",
            (b.sequent([d], b.imp(ph, ps)), b.sequent([g], ph)),
            b.sequent([d, g], ps),
        ),
        SchematicRule("Weak", (b.sequent([g], ph),), b.sequent([g, ps], ph)),
        SchematicRule(
            "Contr", (b.sequent([d, ph, ph], ps),), b.sequent([d, ph], ps)
        ),
        SchematicRule(
            "Exch",
            (b.sequent([g, ph1, ph2, d], ps),),
            b.sequent([g, ph2, ph1, d], ps),
        ),
    ]
    pool = VariablePool(
        sig,
        metavariables={
            "ph": b.form, "ps": b.form, "ph1": b.form, "ph2": b.form,
            "G": b.cont, "D": b.cont,
        },
    )
    return Calculus(name, sig, rules, pool)


def build_intro_calculus(sig: Signature, with_f: bool = False):
    """The adjunction calculus: Ax, Ad, Adp, g, gp, and optionally f."""
    from prooftree.calculus import Calculus, SchematicRule
    from prooftree.terms import VariablePool, mk_term

    a_sort, b_sort = sig.sort("A"), sig.sort("B")
    u, v = MetaVar("u", a_sort), MetaVar("v", a_sort)
    s, t = MetaVar("s", b_sort), MetaVar("t", b_sort)

    def aa(x, y):
        return mk_term(sig, "|-AA", [x, y])

    def ab(x, y):
        return mk_term(sig, "|-AB", [x, y])

    def bb(x, y):
        return mk_term(sig, "|-BB", [x, y])

    def r(x):
        return mk_term(sig, "r", [x])

    def l(x):
        return mk_term(sig, "l", [x])

    def gg(x):
        return mk_term(sig, "g", [x])

    def ff(x):
        return mk_term(sig, "f", [x])

    rules = [
        SchematicRule("Ax", (), aa(u, u)),
        SchematicRule("Ad", (aa(u, r(t)),), bb(l(u), t)),
        SchematicRule("Adp", (bb(l(u), t),), aa(u, r(t))),
        SchematicRule("g", (aa(u, v),), ab(u, gg(v))),
        SchematicRule("gp", (ab(u, gg(v)),), aa(u, v)),
    ]
    if with_f:
        rules.append(SchematicRule("f", (bb(s, t),), ab(ff(s), t)))
    pool = VariablePool(
        sig, metavariables={"u": a_sort, "v": a_sort, "s": b_sort, "t": b_sort}
    )
    return Calculus("introK+f" if with_f else "introK", sig, rules, pool)


def build_impl_pta(calc):
    """The hand-drawn implicational PTA with its seven pattern states."""
    from prooftree.pta import SchematicPTA

    b = ImplBuilder(calc.signature)
    x, y = b.fvar("x"), b.fvar("y")
    x1, x2 = b.fvar("x1"), b.fvar("x2")
    g, d = b.seqvar("G"), b.seqvar("D")
    states = [
        ("ax", b.sequent([x], x)),
        ("any", b.sequent([g], x)),
        ("ext", b.sequent([d, x], y)),
        ("dup", b.sequent([d, x, x], y)),
        ("swap", b.sequent([g, x1, x2, d], y)),
        ("join", b.sequent([d, g], y)),
        ("imp", b.sequent([d], b.imp(x, y))),
    ]
    idx = {name: i for i, (name, _) in enumerate(states)}
    delta = [
        ((), "Ax", idx["ax"]),
        ((idx["any"],), "Weak", idx["ext"]),
        ((idx["dup"],), "Contr", idx["ext"]),
        ((idx["swap"],), "Exch", idx["swap"]),
        ((idx["ext"],), "ImpI", idx["imp"]),
        ((idx["imp"], idx["any"]), "ImpE", idx["join"]),
    ]
    delta_eps = [
        (idx["ax"], idx["any"]),
        (idx["any"], idx["ext"]),
        (idx["ext"], idx["any"]),
        (idx["any"], idx["dup"]),
        (idx["any"], idx["imp"]),
        (idx["imp"], idx["any"]),
        (idx["any"], idx["swap"]),
        (idx["swap"], idx["any"]),
        (idx["join"], idx["any"]),
    ]
    return SchematicPTA(calc, states, delta, delta_eps, name="A_ImpL")


@pytest.fixture(scope="session")
def impl_calc(impl_sig):
    return build_impl_calculus(impl_sig)


@pytest.fixture(scope="session")
def impl_min_calc(impl_min_sig):
    return build_impl_calculus(impl_min_sig, name="ImpL1")


@pytest.fixture(scope="session")
def intro_calc(intro_sig):
    return build_intro_calculus(intro_sig)


@pytest.fixture(scope="session")
def intro_f_calc(intro_sig):
    return build_intro_calculus(intro_sig, with_f=True)


@pytest.fixture(scope="session")
def impl_pta(impl_calc):
    return build_impl_pta(impl_calc)


@pytest.fixture(scope="session")
def impl_min_pta(impl_min_calc):
    return build_impl_pta(impl_min_calc)


def arthm_fig_tree():
    """The published example tree: (1+2)+... computing 3 with parity run."""
    from prooftree.calculus import Derivation

    zero = Derivation(0, "0")
    one = Derivation(1, "Incr", (zero,))
    two = Derivation(2, "Incr", (one,))
    right = Derivation(2, "Add", (two, Derivation(0, "0")))
    left = Derivation(1, "Incr", (Derivation(0, "0"),))
    return Derivation(3, "Add", (left, right))
