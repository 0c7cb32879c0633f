"""Multi-sorted signatures, terms, patterns, substitution, matching and unification.

Terms are finite sort-correct trees of connective applications.  Patterns extend
terms with metavariables; a sort declared as a sequence sort holds an ordered
list of base-sort items, and a *sequence metavariable* stands for a slice of
such a list.  Sequence metavariables must be linear (at most one occurrence per
pattern), which keeps unification finitary.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional


class TermError(Exception):
    pass


class SortMismatch(TermError):
    pass


class ArityMismatch(TermError):
    pass


class LinearityViolation(TermError):
    pass


# ---------------------------------------------------------------------------
# Sorts, connectives, signatures


@dataclass(frozen=True)
class Sort:
    """An atomic sort, or a sequence sort over an atomic base."""

    name: str
    element: Optional["Sort"] = None

    @property
    def is_sequence(self) -> bool:
        return self.element is not None

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Connective:
    name: str
    src: tuple[Sort, ...]
    trg: Sort

    @property
    def arity(self) -> int:
        return len(self.src)

    def __str__(self) -> str:
        args = " ".join(s.name for s in self.src)
        return f"{self.name} : {args} -> {self.trg.name}"


class Signature:
    """A finite vocabulary of sorts and connectives.

    Immutable by convention; hashable by identity so per-signature caches are
    safe.
    """

    def __init__(self, sorts: Iterable[Sort], connectives: Iterable[Connective]):
        self.sorts: tuple[Sort, ...] = tuple(sorts)
        self.connectives: tuple[Connective, ...] = tuple(connectives)
        self.sort_by_name: dict[str, Sort] = {s.name: s for s in self.sorts}
        self.conn_by_name: dict[str, Connective] = {c.name: c for c in self.connectives}
        self._ground_cache: dict[tuple[str, int], list] = {}
        self._inhabited: Optional[frozenset[str]] = None

    def sort(self, name: str) -> Sort:
        return self.sort_by_name[name]

    def connective(self, name: str) -> Connective:
        return self.conn_by_name[name]

    def connectives_into(self, sort: Sort) -> list[Connective]:
        return [c for c in self.connectives if c.trg == sort]


def validate_signature(sig: Signature) -> list[str]:
    """Return the list of well-formedness errors (empty when valid)."""
    errors = []
    if not sig.sorts:
        errors.append("empty sort set")
    seen = set()
    for s in sig.sorts:
        if s.name in seen:
            errors.append(f"duplicate sort name: {s.name}")
        seen.add(s.name)
    for s in sig.sorts:
        if s.is_sequence:
            base = s.element
            if base.name not in sig.sort_by_name or sig.sort_by_name[base.name] != base:
                errors.append(f"sequence sort {s.name} has undeclared base {base.name}")
            elif base.is_sequence:
                errors.append(f"sequence sort {s.name} has non-atomic base {base.name}")
    if not sig.connectives:
        errors.append("empty connective set")
    seen = set()
    for c in sig.connectives:
        if c.name in seen:
            errors.append(f"duplicate connective name: {c.name}")
        seen.add(c.name)
        for s in (*c.src, c.trg):
            if sig.sort_by_name.get(s.name) != s:
                errors.append(f"connective {c.name} uses undeclared sort {s.name}")
    return errors


class VariablePool:
    """Declared variables and metavariables, by name.

    Names must be disjoint from each other and from the signature's
    connectives; metavariables of a sequence sort act as sequence
    metavariables.
    """

    def __init__(self, sig: Signature,
                 variables: dict[str, Sort] | None = None,
                 metavariables: dict[str, Sort] | None = None):
        self.sig = sig
        self.variables = dict(variables or {})
        self.metavariables = dict(metavariables or {})

    def validate(self) -> list[str]:
        errors = []
        for name in self.variables:
            if name in self.sig.conn_by_name:
                errors.append(f"variable {name} clashes with a connective")
        for name in self.metavariables:
            if name in self.sig.conn_by_name:
                errors.append(f"metavariable {name} clashes with a connective")
            if name in self.variables:
                errors.append(f"metavariable {name} clashes with a variable")
        return errors


# ---------------------------------------------------------------------------
# Terms and patterns
#
# One node type family serves both ground terms and patterns; a term is
# "ground" when it contains no metavariables.  Sequence-sort positions are
# always Seq nodes; SeqVar appears only among Seq items.


@dataclass(frozen=True)
class Term:
    def sort(self) -> Sort:
        raise NotImplementedError


@dataclass(frozen=True)
class App(Term):
    conn: Connective
    args: tuple[Term, ...]

    def sort(self) -> Sort:
        return self.conn.trg


@dataclass(frozen=True)
class Seq(Term):
    seq_sort: Sort
    items: tuple[Term, ...]

    def sort(self) -> Sort:
        return self.seq_sort


@dataclass(frozen=True)
class Var(Term):
    """A proper variable: unifies only with itself."""

    name: str
    var_sort: Sort

    def sort(self) -> Sort:
        return self.var_sort


@dataclass(frozen=True)
class MetaVar(Term):
    """A tree metavariable of an atomic sort."""

    name: str
    var_sort: Sort

    def sort(self) -> Sort:
        return self.var_sort


@dataclass(frozen=True)
class SeqVar(Term):
    """A sequence metavariable; stands for a slice of a sequence position."""

    name: str
    var_sort: Sort  # the sequence sort

    def sort(self) -> Sort:
        return self.var_sort


def mk_term(sig: Signature, conn_name: str, children: list[Term]) -> Term:
    """Build a sort-checked application node.

    Children at sequence-sort positions may be given either as Seq nodes or as
    plain lists of base terms.
    """
    if conn_name not in sig.conn_by_name:
        raise TermError(f"undeclared connective: {conn_name}")
    conn = sig.conn_by_name[conn_name]
    if len(children) != conn.arity:
        raise ArityMismatch(
            f"{conn_name} expects {conn.arity} arguments, got {len(children)}"
        )
    args = []
    for want, child in zip(conn.src, children):
        if isinstance(child, (list, tuple)):
            if not want.is_sequence:
                raise SortMismatch(f"{conn_name}: list given at non-sequence position")
            child = mk_seq(want, child)
        if child.sort() != want:
            raise SortMismatch(
                f"{conn_name}: expected {want.name}, got {child.sort().name}"
            )
        args.append(child)
    return App(conn, tuple(args))


def mk_seq(seq_sort: Sort, items: Iterable[Term]) -> Seq:
    items = tuple(items)
    for it in items:
        if isinstance(it, SeqVar):
            if it.var_sort != seq_sort:
                raise SortMismatch(f"sequence metavariable {it.name} has wrong sort")
        elif it.sort() != seq_sort.element:
            raise SortMismatch(
                f"sequence of {seq_sort.element.name} cannot hold {it.sort().name}"
            )
    return Seq(seq_sort, items)


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, App):
        for a in t.args:
            yield from subterms(a)
    elif isinstance(t, Seq):
        for a in t.items:
            yield from subterms(a)


def term_size(t: Term) -> int:
    """Node count; Seq spines are structural and add nothing."""
    if isinstance(t, App):
        return 1 + sum(term_size(a) for a in t.args)
    if isinstance(t, Seq):
        return sum(term_size(a) for a in t.items)
    return 1


def term_depth(t: Term) -> int:
    if isinstance(t, App):
        return 1 + max((term_depth(a) for a in t.args), default=0)
    if isinstance(t, Seq):
        return max((term_depth(a) for a in t.items), default=0)
    return 1


def metavars(t: Term) -> dict[str, Term]:
    """All metavariables (tree and sequence) by name."""
    out: dict[str, Term] = {}
    for s in subterms(t):
        if isinstance(s, (MetaVar, SeqVar)):
            out[s.name] = s
    return out


def is_ground(t: Term) -> bool:
    return not any(isinstance(s, (MetaVar, SeqVar)) for s in subterms(t))


def check_linear(t: Term) -> None:
    """Reject patterns where a sequence metavariable occurs more than once."""
    seen: set[str] = set()
    for s in subterms(t):
        if isinstance(s, SeqVar):
            if s.name in seen:
                raise LinearityViolation(f"sequence metavariable {s.name} repeats")
            seen.add(s.name)


def render_term(t: Term) -> str:
    """Deterministic concrete syntax; infix for connectives named '|-...'."""
    if isinstance(t, (Var, MetaVar)):
        return t.name
    if isinstance(t, SeqVar):
        return t.name + "*"
    if isinstance(t, Seq):
        return ", ".join(render_term(i) for i in t.items)
    assert isinstance(t, App)
    if t.conn.name.startswith("|-") and t.conn.arity == 2:
        lhs, rhs = (render_term(a) for a in t.args)
        return f"{lhs} {t.conn.name} {rhs}".strip()
    if not t.args:
        return t.conn.name
    parts = []
    for a in t.args:
        if isinstance(a, Seq):
            parts.append("[" + render_term(a) + "]")
        else:
            parts.append(render_term(a))
    return t.conn.name + "(" + ", ".join(parts) + ")"


# ---------------------------------------------------------------------------
# Substitution


class Substitution:
    """A sort-preserving map from metavariables to patterns.

    Tree metavariables map to terms of their sort; sequence metavariables map
    to item tuples (base terms and sequence metavariables).
    """

    __slots__ = ("tree", "seq")

    def __init__(self, tree: dict[str, Term] | None = None,
                 seq: dict[str, tuple[Term, ...]] | None = None):
        self.tree: dict[str, Term] = dict(tree or {})
        self.seq: dict[str, tuple[Term, ...]] = {
            k: tuple(v) for k, v in (seq or {}).items()
        }

    def __bool__(self) -> bool:
        return bool(self.tree) or bool(self.seq)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Substitution)
                and self.tree == other.tree and self.seq == other.seq)

    def __repr__(self) -> str:
        parts = [f"{k} -> {render_term(v)}" for k, v in sorted(self.tree.items())]
        parts += [
            f"{k}* -> [{', '.join(render_term(i) for i in v)}]"
            for k, v in sorted(self.seq.items())
        ]
        return "{" + "; ".join(parts) + "}"

    def domain(self) -> set[str]:
        return set(self.tree) | set(self.seq)

    def copy(self) -> "Substitution":
        return Substitution(self.tree, self.seq)

    def apply(self, t: Term) -> Term:
        if isinstance(t, MetaVar):
            return self.tree.get(t.name, t)
        if isinstance(t, App):
            return App(t.conn, tuple(self.apply(a) for a in t.args))
        if isinstance(t, Seq):
            items: list[Term] = []
            for it in t.items:
                if isinstance(it, SeqVar) and it.name in self.seq:
                    items.extend(self.apply(x) for x in self.seq[it.name])
                else:
                    items.append(self.apply(it))
            return Seq(t.seq_sort, tuple(items))
        return t

    def apply_items(self, items: Iterable[Term]) -> tuple[Term, ...]:
        out: list[Term] = []
        for it in items:
            if isinstance(it, SeqVar) and it.name in self.seq:
                out.extend(self.apply(x) for x in self.seq[it.name])
            else:
                out.append(self.apply(it))
        return tuple(out)

    def normalized(self) -> "Substitution":
        """Apply the substitution to its own images until it is idempotent."""
        cur = self
        for _ in range(len(self.tree) + len(self.seq) + 1):
            nxt = Substitution(
                {k: cur.apply(v) for k, v in cur.tree.items()},
                {k: cur.apply_items(v) for k, v in cur.seq.items()},
            )
            if nxt == cur:
                return nxt
            cur = nxt
        return cur

    def restricted(self, names: set[str]) -> "Substitution":
        return Substitution(
            {k: v for k, v in self.tree.items() if k in names},
            {k: v for k, v in self.seq.items() if k in names},
        )

    def is_ground(self) -> bool:
        return all(is_ground(v) for v in self.tree.values()) and all(
            all(is_ground(i) for i in v) for v in self.seq.values()
        )

    def key(self) -> tuple:
        """Canonical comparison key (renders images)."""
        return (
            tuple(sorted((k, render_term(v)) for k, v in self.tree.items())),
            tuple(sorted(
                (k, tuple(render_term(i) for i in v)) for k, v in self.seq.items()
            )),
        )


def apply_subst(t: Term, sigma: Substitution) -> Term:
    return sigma.apply(t)


def rename_apart(terms: list[Term], taken: set[str]) -> tuple[list[Term], Substitution]:
    """Rename the metavariables of `terms` away from `taken` names.

    The input terms share one namespace and are renamed consistently; returns
    the renamed terms and the renaming as a substitution.
    """
    used = set(taken)
    for t in terms:
        used |= set(metavars(t))
    ren = Substitution()
    for t in terms:
        for name, mv in metavars(t).items():
            if name not in taken or name in ren.domain():
                continue
            k = 1
            fresh = f"{name}_{k}"
            while fresh in used:
                k += 1
                fresh = f"{name}_{k}"
            used.add(fresh)
            if isinstance(mv, SeqVar):
                ren.seq[name] = (SeqVar(fresh, mv.var_sort),)
            else:
                ren.tree[name] = MetaVar(fresh, mv.var_sort)
    return [ren.apply(t) for t in terms], ren


# ---------------------------------------------------------------------------
# Matching (one-sided): the target's metavariables, if any, are rigid.


def _match_node(p: Term, t: Term, sigma: Substitution) -> Iterator[Substitution]:
    if isinstance(p, MetaVar):
        if isinstance(t, SeqVar):
            return
        if p.var_sort != t.sort():
            return
        bound = sigma.tree.get(p.name)
        if bound is not None:
            if bound == t:
                yield sigma
            return
        out = sigma.copy()
        out.tree[p.name] = t
        yield out
        return
    if isinstance(p, Var):
        if p == t:
            yield sigma
        return
    if isinstance(p, App):
        if not isinstance(t, App) or t.conn != p.conn:
            return
        yield from _match_all(list(zip(p.args, t.args)), sigma)
        return
    if isinstance(p, Seq):
        if not isinstance(t, Seq) or t.seq_sort != p.seq_sort:
            return
        yield from _match_items(list(p.items), list(t.items), sigma)
        return
    raise TermError("sequence metavariable outside a sequence position")


def _match_all(pairs: list[tuple[Term, Term]], sigma: Substitution) -> Iterator[Substitution]:
    if not pairs:
        yield sigma
        return
    (p, t), rest = pairs[0], pairs[1:]
    for s1 in _match_node(p, t, sigma):
        yield from _match_all(rest, s1)


def _match_items(ps: list[Term], ts: list[Term], sigma: Substitution) -> Iterator[Substitution]:
    if not ps:
        if not ts:
            yield sigma
        return
    head = ps[0]
    if isinstance(head, SeqVar):
        bound = sigma.seq.get(head.name)
        if bound is not None:
            n = len(bound)
            if len(ts) >= n and tuple(ts[:n]) == bound:
                yield from _match_items(ps[1:], ts[n:], sigma)
            return
        # splits in ascending length: deterministic enumeration order
        for k in range(len(ts) + 1):
            out = sigma.copy()
            out.seq[head.name] = tuple(ts[:k])
            yield from _match_items(ps[1:], ts[k:], out)
        return
    if not ts:
        return
    for s1 in _match_node(head, ts[0], sigma):
        yield from _match_items(ps[1:], ts[1:], s1)


def match(pattern: Term, target: Term) -> list[Substitution]:
    """All substitutions s with dom(s) = metavars(pattern) and pattern.s = target.

    The target's own metavariables (when matching pattern against pattern, as
    in subsumption) are treated as rigid constants.
    """
    if pattern.sort() != target.sort():
        raise SortMismatch(
            f"cannot match {pattern.sort().name} against {target.sort().name}"
        )
    results = []
    seen = set()
    for s in _match_node(pattern, target, Substitution()):
        k = s.key()
        if k not in seen:
            seen.add(k)
            results.append(s)
    return results


def match_ground(pattern: Term, term: Term) -> list[Substitution]:
    """Complete set of ground matchers of `pattern` against the ground `term`."""
    return match(pattern, term)


def match_many(patterns: list[Term], targets: list[Term]) -> list[Substitution]:
    """Simultaneous matching with one shared substitution."""
    if len(patterns) != len(targets):
        raise ArityMismatch("pattern/target count mismatch")
    for p, t in zip(patterns, targets):
        if p.sort() != t.sort():
            raise SortMismatch("sort mismatch in simultaneous match")
    results = []
    seen = set()
    for s in _match_all(list(zip(patterns, targets)), Substitution()):
        k = s.key()
        if k not in seen:
            seen.add(k)
            results.append(s)
    return results


def subsumes(general: Term, specific: Term) -> bool:
    """True when every instance of `specific` is an instance of `general`.

    Decided by one-sided matching with `specific`'s metavariables frozen;
    sound, and complete for the linear sequence patterns used here.
    """
    if general.sort() != specific.sort():
        return False
    return bool(match(general, specific))


# ---------------------------------------------------------------------------
# Unification
#
# Tree positions: standard first-order unification with occurs check.
# Sequence positions: finite complete sets of unifiers for linear sequence
# metavariables, by head decomposition; fresh sequence metavariables carry a
# reserved suffix.


class _Unifier:
    def __init__(self):
        self.fresh_counter = 0
        self.solutions: list[Substitution] = []

    def fresh_seqvar(self, like: SeqVar) -> SeqVar:
        self.fresh_counter += 1
        return SeqVar(f"{like.name}%{self.fresh_counter}", like.var_sort)

    # -- helpers over the current (triangular) substitution

    def walk(self, t: Term, sigma: Substitution) -> Term:
        while isinstance(t, MetaVar) and t.name in sigma.tree:
            t = sigma.tree[t.name]
        return t

    def expand_items(self, items: Iterable[Term], sigma: Substitution) -> list[Term]:
        out: list[Term] = []
        for it in items:
            if isinstance(it, SeqVar) and it.name in sigma.seq:
                out.extend(self.expand_items(sigma.seq[it.name], sigma))
            else:
                out.append(it)
        return out

    def occurs(self, name: str, t: Term, sigma: Substitution) -> bool:
        t = self.walk(t, sigma)
        if isinstance(t, MetaVar):
            return t.name == name
        if isinstance(t, App):
            return any(self.occurs(name, a, sigma) for a in t.args)
        if isinstance(t, Seq):
            return any(
                self.occurs(name, i, sigma)
                for i in self.expand_items(t.items, sigma)
            )
        if isinstance(t, SeqVar):
            return t.name == name
        return False

    # -- the solver: equations are ('t', p, q) or ('s', items, items)

    def solve(self, eqs: list, sigma: Substitution) -> Iterator[Substitution]:
        if not eqs:
            yield sigma
            return
        kind = eqs[0][0]
        if kind == "t":
            _, p, q = eqs[0]
            yield from self.solve_tree(p, q, eqs[1:], sigma)
        else:
            _, xs, ys = eqs[0]
            yield from self.solve_items(xs, ys, eqs[1:], sigma)

    def solve_tree(self, p: Term, q: Term, rest: list, sigma: Substitution) -> Iterator[Substitution]:
        p = self.walk(p, sigma)
        q = self.walk(q, sigma)
        if isinstance(p, MetaVar) and isinstance(q, MetaVar) and p.name == q.name:
            yield from self.solve(rest, sigma)
            return
        if isinstance(p, MetaVar):
            if p.var_sort != q.sort() or self.occurs(p.name, q, sigma):
                return
            out = sigma.copy()
            out.tree[p.name] = q
            yield from self.solve(rest, out)
            return
        if isinstance(q, MetaVar):
            yield from self.solve_tree(q, p, rest, sigma)
            return
        if isinstance(p, Var) or isinstance(q, Var):
            if p == q:
                yield from self.solve(rest, sigma)
            return
        if isinstance(p, App) and isinstance(q, App):
            if p.conn != q.conn:
                return
            new = []
            for a, b in zip(p.args, q.args):
                if isinstance(a, Seq):
                    new.append(("s", list(a.items), list(b.items)))
                else:
                    new.append(("t", a, b))
            yield from self.solve(new + rest, sigma)
            return
        if isinstance(p, Seq) and isinstance(q, Seq):
            if p.seq_sort != q.seq_sort:
                return
            yield from self.solve([("s", list(p.items), list(q.items))] + rest, sigma)
            return
        return

    def bind_seq(self, sigma: Substitution, name: str, image: tuple[Term, ...]) -> Substitution:
        out = sigma.copy()
        out.seq[name] = image
        return out

    def solve_items(self, xs: list, ys: list, rest: list, sigma: Substitution) -> Iterator[Substitution]:
        xs = self.expand_items(xs, sigma)
        ys = self.expand_items(ys, sigma)
        if not xs and not ys:
            yield from self.solve(rest, sigma)
            return
        if not xs or not ys:
            longer = ys if not xs else xs
            if all(isinstance(i, SeqVar) for i in longer):
                out = sigma
                for i in longer:
                    out = self.bind_seq(out, i.name, ())
                yield from self.solve(rest, out)
            return
        x0, y0 = xs[0], ys[0]
        if x0 == y0:
            yield from self.solve_items(xs[1:], ys[1:], rest, sigma)
            return
        if isinstance(x0, SeqVar) and isinstance(y0, SeqVar):
            # x0 empty
            yield from self.solve_items(
                xs[1:], ys, rest, self.bind_seq(sigma, x0.name, ())
            )
            # y0 empty
            yield from self.solve_items(
                xs, ys[1:], rest, self.bind_seq(sigma, y0.name, ())
            )
            # x0 starts with all of y0
            fx = self.fresh_seqvar(x0)
            yield from self.solve_items(
                [fx] + xs[1:], ys[1:], rest,
                self.bind_seq(sigma, x0.name, (y0, fx)),
            )
            # y0 starts with all of x0
            fy = self.fresh_seqvar(y0)
            yield from self.solve_items(
                xs[1:], [fy] + ys[1:], rest,
                self.bind_seq(sigma, y0.name, (x0, fy)),
            )
            return
        if isinstance(x0, SeqVar):
            yield from self.solve_items(
                xs[1:], ys, rest, self.bind_seq(sigma, x0.name, ())
            )
            if not self.occurs(x0.name, y0, sigma):
                fx = self.fresh_seqvar(x0)
                yield from self.solve_items(
                    [fx] + xs[1:], ys[1:], rest,
                    self.bind_seq(sigma, x0.name, (y0, fx)),
                )
            return
        if isinstance(y0, SeqVar):
            yield from self.solve_items(ys, xs, rest, sigma)
            return
        yield from self.solve([("t", x0, y0)] + [("s", xs[1:], ys[1:])] + rest, sigma)


def unify(p: Term, q: Term) -> list[Substitution]:
    """A finite complete set of unifiers of two patterns.

    The caller must rename the two metavariable namespaces apart (see
    `rename_apart`); shared metavariables are then unified as equals.
    """
    if p.sort() != q.sort():
        raise SortMismatch(f"cannot unify {p.sort().name} with {q.sort().name}")
    return unify_many([(p, q)])


def unify_many(pairs: list[tuple[Term, Term]]) -> list[Substitution]:
    """Simultaneous unification of several pattern pairs under one substitution."""
    for p, q in pairs:
        check_linear(p)
        check_linear(q)
        if p.sort() != q.sort():
            raise SortMismatch("sort mismatch in simultaneous unification")
    solver = _Unifier()
    eqs = []
    for p, q in pairs:
        if isinstance(p, Seq) and isinstance(q, Seq):
            eqs.append(("s", list(p.items), list(q.items)))
        else:
            eqs.append(("t", p, q))
    results = []
    seen = set()
    for s in solver.solve(eqs, Substitution()):
        s = s.normalized()
        k = s.key()
        if k not in seen:
            seen.add(k)
            results.append(s)
    return results


# ---------------------------------------------------------------------------
# Inhabitation and bounded ground enumeration


def inhabited_sorts(sig: Signature) -> frozenset[str]:
    """Least fixpoint of 'some connective targets s with inhabited sources'.

    A sequence sort counts as inhabited iff its base is: state non-emptiness
    wants a non-empty instance to exist, so the bare empty sequence does not
    witness inhabitation.
    """
    if sig._inhabited is not None:
        return sig._inhabited
    ok: set[str] = set()
    changed = True
    while changed:
        changed = False
        for c in sig.connectives:
            if c.trg.name in ok:
                continue
            if all(
                (s.element.name in ok) if s.is_sequence else (s.name in ok)
                for s in c.src
            ):
                ok.add(c.trg.name)
                changed = True
        for s in sig.sorts:
            if s.is_sequence and s.name not in ok and s.element.name in ok:
                ok.add(s.name)
                changed = True
    sig._inhabited = frozenset(ok)
    return sig._inhabited


def inhabited(sig: Signature, sort: Sort) -> bool:
    return sort.name in inhabited_sorts(sig)


def ground_terms(sig: Signature, sort: Sort, max_size: int) -> list[Term]:
    """All ground terms of `sort` with term_size <= max_size, smallest first.

    Sequence sorts enumerate item tuples, including the empty tuple.
    """
    out: list[Term] = []
    for n in range(0, max_size + 1):
        out.extend(_ground_exact(sig, sort, n))
    return out


def _ground_exact(sig: Signature, sort: Sort, size: int) -> list[Term]:
    key = (sort.name, size)
    cached = sig._ground_cache.get(key)
    if cached is not None:
        return cached
    results: list[Term] = []
    if sort.is_sequence:
        if size == 0:
            results.append(Seq(sort, ()))
        else:
            base = sort.element
            for first_size in range(1, size + 1):
                for first in _ground_exact(sig, base, first_size):
                    for tail in _ground_exact(sig, sort, size - first_size):
                        results.append(Seq(sort, (first,) + tail.items))
    else:
        if size >= 1:
            for c in sorted(sig.connectives_into(sort), key=lambda c: c.name):
                for args in _args_of_size(sig, c.src, size - 1):
                    results.append(App(c, args))
    results.sort(key=lambda t: (term_size(t), render_term(t)))
    sig._ground_cache[key] = results
    return results


def _args_of_size(sig: Signature, srcs: tuple[Sort, ...], budget: int) -> Iterator[tuple[Term, ...]]:
    if not srcs:
        if budget == 0:
            yield ()
        return
    head, rest = srcs[0], srcs[1:]
    min_rest = sum(0 if s.is_sequence else 1 for s in rest)
    lo = 0 if head.is_sequence else 1
    for k in range(lo, budget - min_rest + 1):
        for first in _ground_exact(sig, head, k):
            for tail in _args_of_size(sig, rest, budget - k):
                yield (first,) + tail


def min_ground_term(sig: Signature, sort: Sort, cap: int = 12) -> Optional[Term]:
    """A smallest ground term of the sort, or None if none exists within cap."""
    for n in range(0, cap + 1):
        for t in _ground_exact(sig, sort, n):
            return t
    return None


def instance_substitutions(pattern: Term, sig: Signature, max_size: int) -> Iterator[Substitution]:
    """Ground substitutions closing `pattern` into instances of size <= max_size."""
    mvs = sorted(metavars(pattern).items())
    base = term_size(pattern) - len([1 for _, v in mvs if not isinstance(v, SeqVar)])

    def fill(idx: int, sigma: Substitution) -> Iterator[Substitution]:
        if idx == len(mvs):
            if term_size(sigma.apply(pattern)) <= max_size:
                yield sigma.copy()
            return
        name, mv = mvs[idx]
        budget = max_size - base
        if isinstance(mv, SeqVar):
            for image in ground_terms(sig, mv.var_sort, budget):
                sigma.seq[name] = image.items
                yield from fill(idx + 1, sigma)
            sigma.seq.pop(name, None)
        else:
            for image in ground_terms(sig, mv.var_sort, max(budget, 1)):
                sigma.tree[name] = image
                yield from fill(idx + 1, sigma)
            sigma.tree.pop(name, None)

    yield from fill(0, Substitution())


def instances(pattern: Term, sig: Signature, max_size: int) -> list[Term]:
    """All ground instances of `pattern` with size <= max_size, deduplicated."""
    seen = set()
    out = []
    for sigma in instance_substitutions(pattern, sig, max_size):
        t = sigma.apply(pattern)
        if t not in seen:
            seen.add(t)
            out.append(t)
    out.sort(key=lambda t: (term_size(t), render_term(t)))
    return out
