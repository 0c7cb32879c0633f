"""Deduction rules, term deduction systems, derivations, and bounded enumeration.

A rule is either schematic (hypothesis patterns and a conclusion pattern over
one shared metavariable namespace) or semantic (an oracle deciding instance
membership, with optional enumerators so the rule can take part in bounded
searches).  Derivations store concrete instances at every node together with
the name of the rule applied there.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Iterable, Iterator, Optional

from .terms import (
    Signature,
    Sort,
    Substitution,
    Term,
    VariablePool,
    check_linear,
    inhabited,
    instance_substitutions,
    instances,
    is_ground,
    match_many,
    metavars,
    render_term,
    term_size,
)


class CalculusError(Exception):
    pass


class UnsupportedRule(CalculusError):
    """A semantic rule without enumerator was asked to enumerate."""


class ResourceLimit(CalculusError):
    """An enumeration exceeded its node cap; results would be truncated."""


# ---------------------------------------------------------------------------
# Rules


@dataclass(frozen=True)
class SchematicRule:
    name: str
    hyps: tuple[Term, ...]
    concl: Term

    def __post_init__(self):
        for p in (*self.hyps, self.concl):
            check_linear(p)

    @property
    def arity(self) -> int:
        return len(self.hyps)

    def src_sorts(self) -> tuple[Sort, ...]:
        return tuple(h.sort() for h in self.hyps)

    def trg_sort(self) -> Sort:
        return self.concl.sort()

    def __str__(self) -> str:
        hyps = " ; ".join(render_term(h) for h in self.hyps)
        return f"{self.name}: {hyps} => {render_term(self.concl)}"


@dataclass(frozen=True)
class SemanticRule:
    """A rule given by oracles over an opaque instance universe.

    `member(hyps, concl)` decides instance membership.  `instances_upto(b)`
    enumerates all rule instances whose members have size <= b, and
    `conclusions(hyps, b)` lists the conclusions reachable from fixed
    hypotheses; both are optional but required for enumeration-based checks.
    """

    name: str
    arity: int
    src_sorts_names: tuple[str, ...]
    trg_sort_name: str
    member: Callable[[tuple, Any], bool]
    instances_upto: Optional[Callable[[int], list[tuple[tuple, Any]]]] = None
    conclusions: Optional[Callable[[tuple, int], list]] = None

    def __str__(self) -> str:
        return f"{self.name}: <semantic, arity {self.arity}>"


Rule = "SchematicRule | SemanticRule"


def is_schematic(rule) -> bool:
    return isinstance(rule, SchematicRule)


# ---------------------------------------------------------------------------
# Calculus


class Calculus:
    """A signature, a variable pool, and named sort-consistent rules."""

    def __init__(self, name: str, signature: Signature, rules: Iterable,
                 pool: VariablePool | None = None):
        self.name = name
        self.signature = signature
        self.pool = pool or VariablePool(signature)
        self.rules: dict[str, Any] = {}
        for r in rules:
            if r.name in self.rules:
                raise CalculusError(f"duplicate rule name: {r.name}")
            self.rules[r.name] = r

    def rule(self, name: str):
        if name not in self.rules:
            raise CalculusError(f"unknown rule: {name}")
        return self.rules[name]

    def rule_names(self) -> list[str]:
        return sorted(self.rules)

    def schematic_only(self) -> bool:
        return all(is_schematic(r) for r in self.rules.values())

    def validate(self) -> list[str]:
        errors = list(self.pool.validate())
        for r in self.rules.values():
            if not is_schematic(r):
                continue
            for p in (*r.hyps, r.concl):
                for name, mv in metavars(p).items():
                    sort = mv.sort()
                    if self.signature.sort_by_name.get(sort.name) != sort:
                        errors.append(
                            f"rule {r.name}: metavariable {name} of undeclared sort"
                        )
        return errors


# ---------------------------------------------------------------------------
# Rule instance membership and domain views


def rule_instance_check(rule, hyps: list, concl) -> bool:
    """Is (hyps, concl) an instance of the rule?

    For schematic rules a single simultaneous substitution must match each
    hypothesis and the conclusion; shared metavariables constrain jointly.
    """
    if len(hyps) != (rule.arity if not is_schematic(rule) else len(rule.hyps)):
        raise CalculusError(
            f"rule {rule.name} expects {rule.arity} hypotheses, got {len(hyps)}"
        )
    if is_schematic(rule):
        patterns = list(rule.hyps) + [rule.concl]
        targets = list(hyps) + [concl]
        for p, t in zip(patterns, targets):
            if not isinstance(t, Term) or p.sort() != t.sort():
                return False
        return bool(match_many(patterns, targets))
    return rule.member(tuple(hyps), concl)


@dataclass(frozen=True)
class DomainView:
    """The i-th hypothesis domain (or codomain) of a rule, as a pattern.

    `exact` is False when metavariable sharing across hypotheses means the
    pattern's instance set may strictly contain the projected domain.
    """

    rule: str
    index: int  # 0 = codomain, 1..n = hypotheses
    pattern: Optional[Term]
    exact: bool
    member: Optional[Callable[[Any], bool]] = None


def dom_pattern(rule, index) -> DomainView:
    """Domain views; `index` is 1..n for hypotheses or 0/"codom" for the codomain."""
    if index in ("codom", "codomain"):
        index = 0
    if is_schematic(rule):
        n = len(rule.hyps)
        if not (0 <= index <= n):
            raise CalculusError(f"rule {rule.name}: domain index {index} out of range")
        if index == 0:
            return DomainView(rule.name, 0, rule.concl, True)
        pat = rule.hyps[index - 1]
        shared = set(metavars(pat))
        exact = True
        for j, other in enumerate(rule.hyps):
            if j != index - 1 and shared & set(metavars(other)):
                exact = False
        return DomainView(rule.name, index, pat, exact)
    if not (0 <= index <= rule.arity):
        raise CalculusError(f"rule {rule.name}: domain index {index} out of range")
    if rule.instances_upto is None:
        raise UnsupportedRule(f"rule {rule.name} has no enumerator")

    def member(t, _rule=rule, _i=index):
        for hyps, concl in _rule.instances_upto(_bound_for(t)):
            if _i == 0 and concl == t:
                return True
            if _i > 0 and hyps[_i - 1] == t:
                return True
        return False

    return DomainView(rule.name, index, None, False, member)


def _bound_for(t) -> int:
    return max(int(t) * 2 + 2, 4) if isinstance(t, int) else 16


# ---------------------------------------------------------------------------
# Modularity


@dataclass(frozen=True)
class ModularityReport:
    verdict: str  # "yes" | "yes-up-to-bound" | "no" | "unknown"
    witness: Optional[tuple] = None

    def __bool__(self) -> bool:
        return self.verdict.startswith("yes")


def is_modular(K: Calculus, rule, bound: int = 4) -> ModularityReport:
    """Decide whether dom R factors as the product of its hypothesis domains.

    Hypotheses sharing no metavariable is a sound sufficient criterion; beyond
    it we search for a refuting tuple up to `bound` and otherwise answer
    unknown.
    """
    if is_schematic(rule):
        if rule.arity <= 1:
            return ModularityReport("yes")
        seen: dict[str, int] = {}
        shared = False
        for i, h in enumerate(rule.hyps):
            for name in metavars(h):
                if name in seen and seen[name] != i:
                    shared = True
                seen.setdefault(name, i)
        if not shared:
            return ModularityReport("yes")
        sig = K.signature
        pools = [instances(h, sig, bound) for h in rule.hyps]
        import itertools

        for combo in itertools.product(*pools):
            if not match_many(list(rule.hyps), list(combo)):
                return ModularityReport("no", tuple(combo))
        return ModularityReport("unknown")
    if rule.arity <= 1:
        return ModularityReport("yes")
    if rule.instances_upto is None or rule.conclusions is None:
        return ModularityReport("unknown")
    insts = rule.instances_upto(bound)
    doms = [sorted({h[i] for h, _ in insts}) for i in range(rule.arity)]
    import itertools

    for combo in itertools.product(*doms):
        if not rule.conclusions(tuple(combo), 10 * bound + 10):
            return ModularityReport("no", tuple(combo))
    return ModularityReport("yes-up-to-bound")


# ---------------------------------------------------------------------------
# Derivations


@dataclass(frozen=True)
class Derivation:
    """A tree labelled with (instance, rule name) pairs.

    Instances are ground terms for schematic calculi and opaque values (for
    example naturals) for semantic domains.
    """

    term: Any
    rule: str
    children: tuple["Derivation", ...] = ()

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children), default=0)

    def node_count(self) -> int:
        return 1 + sum(c.node_count() for c in self.children)

    def addresses(self) -> Iterator[tuple[tuple[int, ...], "Derivation"]]:
        """Preorder (Gorn address, node) pairs; children are 1-based."""
        yield (), self
        for i, c in enumerate(self.children, start=1):
            for addr, node in c.addresses():
                yield (i,) + addr, node

    def node(self, address: tuple[int, ...]) -> "Derivation":
        cur = self
        for i in address:
            cur = cur.children[i - 1]
        return cur

    def key(self) -> tuple:
        label = render_term(self.term) if isinstance(self.term, Term) else str(self.term)
        return (label, self.rule, tuple(c.key() for c in self.children))


def render_instance(t) -> str:
    return render_term(t) if isinstance(t, Term) else str(t)


@dataclass(frozen=True)
class DerivationIssue:
    address: tuple[int, ...]
    reason: str

    def __str__(self) -> str:
        addr = ".".join(map(str, self.address)) or "root"
        return f"at {addr}: {self.reason}"


def validate_derivation(K: Calculus, D: Derivation) -> Optional[DerivationIssue]:
    """First locally-invalid node in preorder, or None when D derives in K."""
    for address, node in D.addresses():
        if node.rule not in K.rules:
            return DerivationIssue(address, f"unknown rule {node.rule}")
        rule = K.rules[node.rule]
        arity = len(rule.hyps) if is_schematic(rule) else rule.arity
        if len(node.children) != arity:
            return DerivationIssue(
                address,
                f"rule {node.rule} has arity {arity}, node has {len(node.children)} children",
            )
        hyps = [c.term for c in node.children]
        try:
            ok = rule_instance_check(rule, hyps, node.term)
        except CalculusError as e:
            return DerivationIssue(address, str(e))
        if not ok:
            shown = ", ".join(render_instance(h) for h in hyps)
            return DerivationIssue(
                address,
                f"({shown} / {render_instance(node.term)}) is not an instance of {node.rule}",
            )
    return None


# ---------------------------------------------------------------------------
# Bounded enumeration of derivations


def enumerate_derivations(
    K: Calculus,
    max_depth: int,
    size_bound: int,
    root_sort: str | None = None,
    root_conn: str | None = None,
    node_cap: int = 200_000,
) -> list[Derivation]:
    """All valid derivations with depth <= max_depth and node terms of size
    <= size_bound, in a deterministic order and without duplicates.

    Semantic rules must carry enumerators; exceeding `node_cap` raises
    ResourceLimit rather than silently truncating.
    """
    for r in K.rules.values():
        if not is_schematic(r) and (r.instances_upto is None or r.conclusions is None):
            raise UnsupportedRule(f"rule {r.name} cannot be enumerated")

    sig = K.signature
    levels: list[list[Derivation]] = []  # levels[d-1]: depth exactly d
    seen: set[Derivation] = set()
    total = 0

    def conclusions_schematic(rule: SchematicRule, child_terms: list[Term]) -> Iterator[Term]:
        for p, t in zip(rule.hyps, child_terms):
            if p.sort() != t.sort():
                return
        for sigma in match_many(list(rule.hyps), child_terms):
            partial = sigma.apply(rule.concl)
            if is_ground(partial):
                if term_size(partial) <= size_bound:
                    yield partial
                continue
            for ground_sigma in instance_substitutions(partial, sig, size_bound):
                yield ground_sigma.apply(partial)

    def add(d: Derivation, bucket: list[Derivation]):
        nonlocal total
        if d in seen:
            return
        seen.add(d)
        bucket.append(d)
        total += 1
        if total > node_cap:
            raise ResourceLimit(f"derivation enumeration exceeded cap {node_cap}")

    # depth 1: axioms
    bucket: list[Derivation] = []
    for name in sorted(K.rules):
        rule = K.rules[name]
        arity = len(rule.hyps) if is_schematic(rule) else rule.arity
        if arity != 0:
            continue
        if is_schematic(rule):
            for t in instances(rule.concl, sig, size_bound):
                add(Derivation(t, name), bucket)
        else:
            for hyps, concl in rule.instances_upto(size_bound):
                if not hyps:
                    add(Derivation(concl, name), bucket)
    levels.append(bucket)

    import itertools

    for depth in range(2, max_depth + 1):
        pool = [d for lvl in levels for d in lvl]
        prev = set(levels[-1])
        bucket = []
        for name in sorted(K.rules):
            rule = K.rules[name]
            arity = len(rule.hyps) if is_schematic(rule) else rule.arity
            if arity == 0:
                continue
            if is_schematic(rule):
                # prune each child position by a one-hypothesis match first
                position_pool = []
                for h in rule.hyps:
                    position_pool.append([
                        d for d in pool
                        if isinstance(d.term, Term)
                        and d.term.sort() == h.sort()
                        and match_many([h], [d.term])
                    ])
            else:
                position_pool = [pool] * arity
            for combo in itertools.product(*position_pool):
                if not any(c in prev for c in combo):
                    continue  # depth would not be exactly `depth`
                child_terms = [c.term for c in combo]
                if is_schematic(rule):
                    concls = conclusions_schematic(rule, child_terms)
                else:
                    concls = rule.conclusions(tuple(child_terms), size_bound)
                for t in concls:
                    add(Derivation(t, name, tuple(combo)), bucket)
        levels.append(bucket)

    out = [d for lvl in levels for d in lvl]
    if root_sort is not None:
        out = [
            d for d in out
            if isinstance(d.term, Term) and d.term.sort().name == root_sort
        ]
    if root_conn is not None:
        from .terms import App

        out = [
            d for d in out
            if isinstance(d.term, App) and d.term.conn.name == root_conn
        ]
    decorated = [((d.node_count(), d.key()), d) for d in out]
    decorated.sort(key=lambda pair: pair[0])
    return [d for _, d in decorated]
