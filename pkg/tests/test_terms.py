"""Term, matching and unification tests, checked against brute-force oracles."""

from __future__ import annotations

import itertools

import pytest

from prooftree.terms import (
    App,
    ArityMismatch,
    Connective,
    MetaVar,
    Seq,
    SeqVar,
    Signature,
    Sort,
    SortMismatch,
    Substitution,
    ground_terms,
    inhabited,
    instances,
    is_ground,
    match,
    match_many,
    metavars,
    mk_seq,
    mk_term,
    rename_apart,
    render_term,
    subsumes,
    subterms,
    term_size,
    unify,
    validate_signature,
)


# ---------------------------------------------------------------------------
# Brute-force oracles


def oracle_matchers(pattern, term, sig):
    """All ground matchers found by blind search over subterm assignments.

    Tree metavariables draw images from the subterms of `term`; sequence
    metavariables draw images from contiguous slices of the sequence positions
    occurring in `term`.  Complete for matching because any matcher's images
    must occur inside `term`.
    """
    tree_vars = sorted(
        name for name, v in metavars(pattern).items() if not isinstance(v, SeqVar)
    )
    seq_vars = sorted(
        name for name, v in metavars(pattern).items() if isinstance(v, SeqVar)
    )
    var_sorts = {name: v.var_sort for name, v in metavars(pattern).items()}

    tree_pool = {}
    for name in tree_vars:
        tree_pool[name] = [
            s for s in set(subterms(term)) if s.sort() == var_sorts[name]
        ]
    slice_pool = {}
    for name in seq_vars:
        sort = var_sorts[name]
        slices = {(): ()}
        for s in subterms(term):
            if isinstance(s, Seq) and s.seq_sort == sort:
                for i in range(len(s.items)):
                    for j in range(i, len(s.items) + 1):
                        slices[s.items[i:j]] = s.items[i:j]
        slice_pool[name] = list(slices.values())

    found = []
    for tree_choice in itertools.product(*(tree_pool[n] for n in tree_vars)):
        for seq_choice in itertools.product(*(slice_pool[n] for n in seq_vars)):
            sigma = Substitution(
                dict(zip(tree_vars, tree_choice)),
                dict(zip(seq_vars, seq_choice)),
            )
            if sigma.apply(pattern) == term:
                found.append(sigma)
    return found


def enumerate_patterns(builder, max_ctx_items, with_seqvars=True):
    """A deterministic corpus of sequent patterns for the oracle comparisons."""
    b = builder
    forms = [b.atom("p"), b.fvar("x"), b.fvar("y"), b.imp(b.fvar("x"), b.fvar("y"))]
    items_choices = []
    pool = list(forms)
    if with_seqvars:
        pool = [b.seqvar("G"), b.seqvar("D")] + pool
    for n in range(0, max_ctx_items + 1):
        for combo in itertools.product(pool, repeat=n):
            names = [i.name for i in combo if isinstance(i, SeqVar)]
            if len(names) != len(set(names)):
                continue
            items_choices.append(list(combo))
    out = []
    for items in items_choices:
        for rhs in forms:
            out.append(b.sequent(items, rhs))
    return out


# ---------------------------------------------------------------------------
# Signatures


def test_validate_impl_signature(impl_sig):
    assert validate_signature(impl_sig) == []


def test_validate_rejects_empty_sorts():
    sig = Signature([], [])
    errors = validate_signature(sig)
    assert any("empty sort set" in e for e in errors)


def test_validate_rejects_undeclared_sort():
    s = Sort("s")
    ghost = Sort("ghost")
    sig = Signature([s], [Connective("f", (s,), ghost)])
    errors = validate_signature(sig)
    assert any("undeclared sort ghost" in e for e in errors)


def test_validate_rejects_sequence_of_sequence():
    s = Sort("s")
    sq = Sort("sq", element=s)
    sqsq = Sort("sqsq", element=sq)
    sig = Signature([s, sq, sqsq], [Connective("c", (), s)])
    errors = validate_signature(sig)
    assert any("non-atomic base" in e for e in errors)


# ---------------------------------------------------------------------------
# Construction


def test_mk_term_intro(intro_sig):
    a = mk_term(intro_sig, "a", [])
    la = mk_term(intro_sig, "l", [a])
    rla = mk_term(intro_sig, "r", [la])
    assert rla.sort().name == "A"
    assert render_term(rla) == "r(l(a))"
    assert term_size(rla) == 3


def test_mk_term_arity_mismatch(intro_sig):
    with pytest.raises(ArityMismatch):
        mk_term(intro_sig, "r", [])


def test_mk_term_sort_mismatch(intro_sig):
    a = mk_term(intro_sig, "a", [])
    with pytest.raises(SortMismatch):
        mk_term(intro_sig, "r", [a])  # r expects B


def test_mk_term_sequent_with_context(impl):
    p = impl.atom("p")
    t = impl.sequent([p], p)
    assert t.sort().name == "Seq"
    assert is_ground(t)
    assert render_term(t) == "p |- p"
    assert validate_signature(impl.sig) == []


# ---------------------------------------------------------------------------
# Substitution


def test_apply_subst_replaces_metavar(intro_sig):
    a_sort = intro_sig.sort("A")
    b_sort = intro_sig.sort("B")
    u, v = MetaVar("u", a_sort), MetaVar("v", a_sort)
    t = MetaVar("t", b_sort)
    lhs = mk_term(intro_sig, "|-AA", [u, v])
    rt = App(intro_sig.connective("r"), (t,))
    sigma = Substitution({"v": rt})
    out = sigma.apply(lhs)
    assert render_term(out) == "u |-AA r(t)"
    assert out.sort() == lhs.sort()


def test_apply_subst_identity(impl):
    pat = impl.sequent([impl.seqvar("G"), impl.fvar("x")], impl.fvar("y"))
    assert Substitution().apply(pat) == pat


def test_apply_subst_splices_sequences(impl):
    a, b = impl.atom("p"), impl.atom("q")
    pat = impl.sequent([impl.seqvar("G")], impl.fvar("x"))
    sigma = Substitution({"x": b}, {"G": (impl.imp(a, b), a)})
    out = sigma.apply(pat)
    assert is_ground(out)
    assert render_term(out) == "imp(p, q), p |- q"
    assert out.sort().name == "Seq"


# ---------------------------------------------------------------------------
# Matching


def test_match_adjunction_hypothesis(intro_sig):
    a_sort = intro_sig.sort("A")
    b_sort = intro_sig.sort("B")
    u = MetaVar("u", a_sort)
    tv = MetaVar("t", b_sort)
    pat = mk_term(intro_sig, "|-AA", [u, mk_term(intro_sig, "r", [tv])])
    a = mk_term(intro_sig, "a", [])
    la = mk_term(intro_sig, "l", [a])
    rla = mk_term(intro_sig, "r", [la])
    goal = mk_term(intro_sig, "|-AA", [a, rla])
    subs = match(pat, goal)
    assert len(subs) == 1
    assert subs[0].tree == {"u": a, "t": la}


def test_match_repeated_metavar_forces_equality(impl):
    p, q = impl.atom("p"), impl.atom("q")
    x = impl.fvar("x")
    pat = impl.sequent([x], x)
    assert match(pat, impl.sequent([p], q)) == []
    hit = match(pat, impl.sequent([p], p))
    assert len(hit) == 1 and hit[0].tree == {"x": p}


def test_match_context_splits(impl):
    # G*, x1, x2, D* |- y against p, q, r |- s has exactly the two
    # alignments G=[] D=[r] and G=[p] D=[].
    b = impl
    pat = b.sequent(
        [b.seqvar("G"), b.fvar("x1"), b.fvar("x2"), b.seqvar("D")], b.fvar("y")
    )
    p, q = b.atom("p"), b.atom("q")
    r = b.imp(p, q)
    s = b.imp(q, p)
    goal = b.sequent([p, q, r], s)
    subs = match(pat, goal)
    assert len(subs) == 2
    first, second = subs
    assert first.seq == {"G": (), "D": (r,)}
    assert first.tree == {"x1": p, "x2": q, "y": s}
    assert second.seq == {"G": (p,), "D": ()}
    assert second.tree == {"x1": q, "x2": r, "y": s}


def test_match_sort_mismatch_raises(impl, intro_sig):
    with pytest.raises(SortMismatch):
        match(impl.fvar("x"), mk_term(intro_sig, "a", []))


def test_match_agrees_with_oracle_at_desk_scale(impl_min):
    b = impl_min
    patterns = enumerate_patterns(b, max_ctx_items=2)
    grounds = ground_terms(b.sig, b.sig.sort("Seq"), 6)
    checked = 0
    for pat in patterns:
        for t in grounds:
            got = match(pat, t)
            want = oracle_matchers(pat, t, b.sig)
            got_keys = {s.key() for s in got}
            want_keys = {s.key() for s in want}
            assert got_keys == want_keys, (render_term(pat), render_term(t))
            checked += 1
    assert checked > 1000


# ---------------------------------------------------------------------------
# Unification


def test_unify_dashed_edge_witness(intro_sig):
    # u |-AA v meets u' |-AA r(t): the two vertex patterns share instances.
    a_sort = intro_sig.sort("A")
    b_sort = intro_sig.sort("B")
    lhs = mk_term(intro_sig, "|-AA", [MetaVar("u", a_sort), MetaVar("v", a_sort)])
    rhs = mk_term(
        intro_sig,
        "|-AA",
        [MetaVar("u2", a_sort), mk_term(intro_sig, "r", [MetaVar("t", b_sort)])],
    )
    subs = unify(lhs, rhs)
    assert len(subs) == 1
    sigma = subs[0]
    assert sigma.apply(lhs) == sigma.apply(rhs)
    # the common instance a |-AA r(l(a)) really matches both
    a = mk_term(intro_sig, "a", [])
    common = mk_term(intro_sig, "|-AA", [a, mk_term(intro_sig, "r", [mk_term(intro_sig, "l", [a])])])
    assert match(lhs, common) and match(rhs, common)


def test_unify_pattern_with_itself(impl):
    pat = impl.sequent([impl.seqvar("G"), impl.fvar("x")], impl.fvar("y"))
    renamed, _ = rename_apart([pat], {"G", "x", "y"})
    subs = unify(pat, renamed[0])
    assert subs
    sigma = subs[0]
    assert sigma.apply(pat) == sigma.apply(renamed[0])


def test_unify_context_vs_implication(impl):
    # D*, x |- y meets D2* |- imp(x2, y2); a |- imp(p, q) style instances exist.
    b = impl
    left = b.sequent([b.seqvar("D"), b.fvar("x")], b.fvar("y"))
    right = b.sequent([b.seqvar("D2")], b.imp(b.fvar("x2"), b.fvar("y2")))
    subs = unify(left, right)
    assert subs
    for sigma in subs:
        assert sigma.apply(left) == sigma.apply(right)
    # bounded enumeration exhibits a common ground instance
    p = b.atom("p")
    witness = b.sequent([p], b.imp(p, p))
    assert match(left, witness) and match(right, witness)


def test_unify_occurs_check(impl):
    x = impl.fvar("x")
    nested = impl.imp(x, impl.atom("p"))
    assert unify(x, nested) == []


def test_unify_respects_var_rigidity(intro_sig):
    from prooftree.terms import Var

    a_sort = intro_sig.sort("A")
    v = Var("zeta", a_sort)
    m = MetaVar("u", a_sort)
    assert unify(m, v)[0].tree == {"u": v}
    assert unify(v, v) and unify(v, v)[0].key() == Substitution().key()
    a = mk_term(intro_sig, "a", [])
    assert unify(v, a) == []


def test_unify_complete_at_desk_scale(impl_min):
    # Union of instance sets of the unifiers == intersection of instance sets,
    # restricted to ground sequents of size <= 6.
    b = impl_min
    patterns = enumerate_patterns(b, max_ctx_items=2)[:40]
    universe = ground_terms(b.sig, b.sig.sort("Seq"), 6)
    pairs = 0
    for i, p in enumerate(patterns):
        for q in patterns[i:: 7]:
            q_r, _ = rename_apart([q], set(metavars(p)))
            q_r = q_r[0]
            subs = unify(p, q_r)
            via_unify = set()
            for sigma in subs:
                inst = sigma.apply(p)
                for t in universe:
                    if match(inst, t):
                        via_unify.add(t)
            direct = {t for t in universe if match(p, t) and match(q_r, t)}
            assert via_unify == direct, (render_term(p), render_term(q))
            pairs += 1
    assert pairs > 100


# ---------------------------------------------------------------------------
# Subsumption


def test_subsumes_general_context(impl):
    b = impl
    general = b.sequent([b.seqvar("G")], b.fvar("x"))
    specific = b.sequent([b.seqvar("D"), b.fvar("y")], b.fvar("z"))
    assert subsumes(general, specific)
    # sanity: instances of the specific side also match the general side
    for t in instances(specific, b.sig, 6)[:20]:
        assert match(general, t)


def test_subsumes_repeated_metavar_not_implied(impl):
    b = impl
    diag = b.sequent([b.fvar("x")], b.fvar("x"))
    free = b.sequent([b.seqvar("G")], b.fvar("y"))
    assert not subsumes(diag, free)
    assert subsumes(free, diag)


def test_subsumes_reflexive(impl):
    pat = impl.sequent([impl.seqvar("G"), impl.fvar("x")], impl.fvar("y"))
    assert subsumes(pat, pat)


def test_subsumes_sound_on_enumerated_instances(impl_min):
    b = impl_min
    patterns = enumerate_patterns(b, max_ctx_items=2)[:30]
    for p in patterns:
        for q in patterns[::5]:
            q_r, _ = rename_apart([q], set(metavars(p)))
            if subsumes(p, q_r[0]):
                for t in instances(q_r[0], b.sig, 5):
                    assert match(p, t), (render_term(p), render_term(q))


# ---------------------------------------------------------------------------
# Inhabitation


def test_impl_form_inhabited(impl_sig):
    assert inhabited(impl_sig, impl_sig.sort("Form"))
    assert inhabited(impl_sig, impl_sig.sort("Seq"))


def test_uninhabited_without_base_case():
    s = Sort("s")
    sig = Signature([s], [Connective("f", (s, s), s)])
    assert not inhabited(sig, s)


def test_intro_c_inhabited(intro_sig):
    assert inhabited(intro_sig, intro_sig.sort("C"))


def test_ground_enumeration_is_sorted_and_complete(impl_min):
    b = impl_min
    seqs = ground_terms(b.sig, b.sig.sort("Seq"), 5)
    assert all(term_size(t) <= 5 for t in seqs)
    assert len(seqs) == len(set(seqs))
    assert sorted(seqs, key=lambda t: (term_size(t), render_term(t))) == seqs
    # p |- p is present, as is the empty-context sequent |- p
    p = b.atom("p")
    assert b.sequent([p], p) in seqs
    assert b.sequent([], p) in seqs


def test_apply_subst_preserves_sort_everywhere(impl_min):
    b = impl_min
    for pat in enumerate_patterns(b, max_ctx_items=1)[:30]:
        for t in instances(pat, b.sig, 5)[:10]:
            for sigma in match(pat, t):
                assert sigma.apply(pat).sort() == pat.sort()
