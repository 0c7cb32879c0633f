"""Proof tree automata: schematic states, canonical construction, checks.

A schematic PTA keeps its states as patterns (each denoting its instance
set), its transition labels as rule names, and realizes the controlling
relations by rule-instance checking and pattern matching.  All states accept.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .automata import (
    Alphabet,
    Automaton,
    CheckReport,
    ControlOracle,
    InstanceSearch,
    Letter,
    accepts,
)
from .calculus import (
    Calculus,
    CalculusError,
    Derivation,
    SchematicRule,
    dom_pattern,
    enumerate_derivations,
    is_schematic,
    rule_instance_check,
)
from .terms import (
    MetaVar,
    SeqVar,
    Signature,
    Substitution,
    Term,
    inhabited,
    instance_substitutions,
    instances,
    is_ground,
    match,
    match_many,
    metavars,
    rename_apart,
    render_term,
    term_size,
    unify_many,
)


class PtaError(Exception):
    pass


class SchematicPTA:
    """States as patterns, transitions labelled by rule names."""

    def __init__(
        self,
        calculus: Calculus,
        states: list[tuple[str, Term]],
        delta: list[tuple[tuple[int, ...], str, int]],
        delta_eps: list[tuple[int, int]],
        name: str = "pta",
    ):
        self.calculus = calculus
        self.state_names = tuple(n for n, _ in states)
        self.state_patterns = tuple(p for _, p in states)
        self.delta = tuple(sorted((tuple(s), l, t) for s, l, t in delta))
        self.delta_eps = tuple(sorted(delta_eps))
        self.name = name
        self._automaton: Automaton | None = None
        if len(set(self.state_names)) != len(self.state_names):
            raise PtaError("duplicate state names")

    def state_index(self, name: str) -> int:
        return self.state_names.index(name)

    def pattern(self, q: int) -> Term:
        return self.state_patterns[q]

    def automaton(self) -> Automaton:
        if self._automaton is None:
            self._automaton = as_automaton(self)
        return self._automaton


class RuleControl(ControlOracle):
    def __init__(self, P: SchematicPTA):
        self.P = P

    def nabla(self, hyp_instances, letter, instance) -> bool:
        rule = self.P.calculus.rules.get(letter)
        if rule is None:
            return False
        arity = len(rule.hyps) if is_schematic(rule) else rule.arity
        if len(hyp_instances) != arity:
            return False
        try:
            return rule_instance_check(rule, list(hyp_instances), instance)
        except CalculusError:
            return False

    def nabla_eps(self, instance, state: int) -> bool:
        pat = self.P.pattern(state)
        if not isinstance(instance, Term) or pat.sort() != instance.sort():
            return False
        return bool(match(pat, instance))


def _joint_instance_substitutions(patterns, sig, bound):
    """Ground substitutions closing several patterns, each to size <= bound."""
    joined = sorted(
        {name for p in patterns for name in metavars(p)},
    )
    pools = {}
    for p in patterns:
        pools.update(metavars(p))

    def fill(idx, sigma):
        if idx == len(joined):
            if all(term_size(sigma.apply(p)) <= bound for p in patterns):
                yield sigma.copy()
            return
        name = joined[idx]
        mv = pools[name]
        from .terms import ground_terms

        if isinstance(mv, SeqVar):
            for image in ground_terms(sig, mv.var_sort, bound):
                sigma.seq[name] = image.items
                yield from fill(idx + 1, sigma)
            sigma.seq.pop(name, None)
        else:
            for image in ground_terms(sig, mv.var_sort, bound):
                sigma.tree[name] = image
                yield from fill(idx + 1, sigma)
            sigma.tree.pop(name, None)

    yield from fill(0, Substitution())


class SchematicSearch(InstanceSearch):
    def __init__(self, P: SchematicPTA):
        self.P = P
        self.sig = P.calculus.signature

    def state_instances(self, state: int, bound: int) -> list[Term]:
        return instances(self.P.pattern(state), self.sig, bound)

    def letter_instances(self, letter: str, bound: int):
        rule = self.P.calculus.rules[letter]
        if not is_schematic(rule):
            if rule.instances_upto is None:
                return []
            return rule.instances_upto(bound)
        out = []
        pats = list(rule.hyps) + [rule.concl]
        for sigma in _joint_instance_substitutions(pats, self.sig, bound):
            out.append(
                (tuple(sigma.apply(h) for h in rule.hyps), sigma.apply(rule.concl))
            )
        return out

    def conclusions(self, letter: str, hyps: tuple, bound: int) -> list:
        rule = self.P.calculus.rules[letter]
        if not is_schematic(rule):
            if rule.conclusions is None:
                return []
            return rule.conclusions(hyps, bound)
        out = []
        seen = set()
        try:
            sigmas = match_many(list(rule.hyps), list(hyps))
        except Exception:
            return []
        for sigma in sigmas:
            partial = sigma.apply(rule.concl)
            if is_ground(partial):
                candidates = [partial] if term_size(partial) <= bound else []
            else:
                candidates = instances(partial, self.sig, bound)
            for t in candidates:
                if t not in seen:
                    seen.add(t)
                    out.append(t)
        return out

    def instance_size(self, t) -> int:
        return term_size(t)


def as_automaton(P: SchematicPTA) -> Automaton:
    """Realize the schematic PTA as a controlling tree automaton.

    Control is rule-instance membership, epsilon control is pattern matching,
    and every state is accepting.
    """
    sig = P.calculus.signature
    for name, pat in zip(P.state_names, P.state_patterns):
        for var_name, mv in metavars(pat).items():
            sort = mv.var_sort.element if isinstance(mv, SeqVar) else mv.var_sort
            if not inhabited(sig, sort):
                raise PtaError(
                    f"state {name} is empty: sort {sort.name} is uninhabited"
                )
    letters = []
    for rname in sorted(P.calculus.rules):
        rule = P.calculus.rules[rname]
        if is_schematic(rule):
            letters.append(Letter(
                rname,
                tuple(h.sort().name for h in rule.hyps),
                rule.concl.sort().name,
            ))
        else:
            letters.append(Letter(rname, rule.src_sorts_names, rule.trg_sort_name))
    alphabet = Alphabet(letters)
    for srcs, rname, trg in P.delta:
        if rname not in P.calculus.rules:
            raise PtaError(f"transition uses unknown rule {rname}")
    return Automaton(
        alphabet=alphabet,
        states=P.state_names,
        state_sorts=tuple(p.sort().name for p in P.state_patterns),
        delta=P.delta,
        delta_eps=P.delta_eps,
        final=range(len(P.state_names)),
        control=RuleControl(P),
        universe="terms",
        name=P.name,
        search=SchematicSearch(P),
        schematic=P,
    )


def pta_accepts(P: SchematicPTA, D: Derivation) -> bool:
    """Instance-level acceptance, decided at the schematic level by matching."""
    return accepts(P.automaton(), D)


# ---------------------------------------------------------------------------
# Canonical PTA


def _normalize_pattern(p: Term) -> Term:
    """Canonical metavariable renaming in preorder, for dedup up to renaming."""
    mapping: dict[str, Term] = {}
    counter = itertools.count(1)

    def walk(t: Term) -> Term:
        from .terms import App, Seq

        if isinstance(t, MetaVar):
            if t.name not in mapping:
                mapping[t.name] = MetaVar(f"?{next(counter)}", t.var_sort)
            return mapping[t.name]
        if isinstance(t, SeqVar):
            if t.name not in mapping:
                mapping[t.name] = SeqVar(f"?{next(counter)}", t.var_sort)
            return mapping[t.name]
        if isinstance(t, App):
            return App(t.conn, tuple(walk(a) for a in t.args))
        if isinstance(t, Seq):
            return Seq(t.seq_sort, tuple(walk(i) for i in t.items))
        return t

    return walk(p)


@dataclass(frozen=True)
class CanonicalResult:
    pta: SchematicPTA
    warnings: tuple[str, ...]


def canonical_pta(K: Calculus) -> CanonicalResult:
    """States are the per-hypothesis domains and codomains of the rules; one
    transition per rule; dashed edges wherever a codomain meets a hypothesis
    domain.

    For a non-modular rule the hypothesis pattern over-approximates the
    projected domain; this is reported, not silently dropped.
    """
    if not K.schematic_only():
        raise PtaError("canonical construction requires schematic rules")
    warnings = []
    states: list[tuple[str, Term]] = []
    index_of: dict[tuple, int] = {}

    def intern(pattern: Term) -> int:
        key = _normalize_pattern(pattern)
        if key in index_of:
            return index_of[key]
        idx = len(states)
        index_of[key] = idx
        states.append((f"q{idx}", pattern))
        return idx

    delta = []
    codomain_states: list[int] = []
    hyp_states: list[int] = []
    for rname in sorted(K.rules):
        rule = K.rules[rname]
        codom = intern(dom_pattern(rule, 0).pattern)
        hyp_idx = []
        for i in range(1, len(rule.hyps) + 1):
            view = dom_pattern(rule, i)
            if not view.exact:
                warnings.append(
                    f"rule {rname}: hypothesis {i} shares metavariables; "
                    f"state pattern over-approximates the projected domain"
                )
            hyp_idx.append(intern(view.pattern))
        delta.append((tuple(hyp_idx), rname, codom))
        codomain_states.append(codom)
        hyp_states.extend(hyp_idx)

    delta_eps = set()
    for c in sorted(set(codomain_states)):
        for h in sorted(set(hyp_states)):
            pc, _ = rename_apart([states[c][1]], set())
            taken = set(metavars(pc[0]))
            ph, _ = rename_apart([states[h][1]], taken)
            if pc[0].sort() != ph[0].sort():
                continue
            if unify_many([(pc[0], ph[0])]):
                delta_eps.add((c, h))

    pta = SchematicPTA(
        K,
        states,
        delta,
        sorted(delta_eps),
        name=f"canonical({K.name})",
    )
    return CanonicalResult(pta, tuple(warnings))


# ---------------------------------------------------------------------------
# Schematic property checks


def _fresh_rule(rule: SchematicRule, taken: set[str]):
    pats, _ = rename_apart(list(rule.hyps) + [rule.concl], taken)
    return tuple(pats[:-1]), pats[-1]


def check_consistent_schematic(P: SchematicPTA) -> CheckReport:
    """Per transition: unify the source states with the rule's hypotheses and
    require the target state to subsume every resulting conclusion.

    A failed subsumption is refuted by exhibiting a ground counter-instance
    when one exists within a small bound, otherwise reported as an obligation.
    """
    sig = P.calculus.signature
    obligations = []
    for srcs, rname, trg in P.delta:
        rule = P.calculus.rules[rname]
        if not is_schematic(rule):
            obligations.append(
                f"transition on {rname}: semantic rule, use the bounded check"
            )
            continue
        taken: set[str] = set()
        src_pats = []
        for q in srcs:
            pat, _ = rename_apart([P.pattern(q)], taken)
            src_pats.append(pat[0])
            taken |= set(metavars(pat[0]))
        hyps, concl = _fresh_rule(rule, taken)
        trg_pat = P.pattern(trg)
        try:
            sigmas = unify_many(list(zip(src_pats, hyps)))
        except Exception as e:
            obligations.append(f"transition on {rname}: ill-sorted ({e})")
            continue
        for sigma in sigmas:
            image = sigma.apply(concl)
            if trg_pat.sort() == image.sort() and match(trg_pat, image):
                continue
            counter = _ground_counterexample(P, sig, trg_pat, image)
            if counter is not None:
                witness = (
                    f"transition ({', '.join(P.state_names[q] for q in srcs)}; "
                    f"{rname}; {P.state_names[trg]}): conclusion "
                    f"{render_term(counter)} is not in {P.state_names[trg]}"
                )
                return CheckReport("consistent", "refuted", witness=witness)
            obligations.append(
                f"transition on {rname}: cannot place {render_term(image)} "
                f"inside {P.state_names[trg]}"
            )
    if obligations:
        return CheckReport("consistent", "unknown", obligations=tuple(obligations))
    return CheckReport("consistent", "proven")


def _ground_counterexample(P, sig, trg_pat, image, bound: int = 6) -> Optional[Term]:
    budget = max(bound, term_size(image) + 2)
    count = 0
    for sigma in instance_substitutions(image, sig, budget):
        t = sigma.apply(image)
        if not match(trg_pat, t):
            return t
        count += 1
        if count >= 64:
            break
    return None


def check_complete(P: SchematicPTA) -> CheckReport:
    """A sound sufficient completeness check.

    For every rule and tuple of conclusion states, each joint unifier of the
    states with the rule's hypotheses must be discharged: instance-preserving
    dashed paths (through states subsuming the unified hypothesis) must reach
    the sources of a transition on that rule whose target subsumes the
    unified conclusion.  Undischarged unifiers are reported as obligations.
    """
    A = P.automaton()
    concl_states = A.conclusion_states()
    obligations = []
    for rname in sorted(P.calculus.rules):
        rule = P.calculus.rules[rname]
        if not is_schematic(rule):
            obligations.append(f"rule {rname}: semantic rule, use the bounded check")
            continue
        n = len(rule.hyps)
        transitions = [tr for tr in P.delta if tr[1] == rname]
        for state_tuple in itertools.product(concl_states, repeat=n):
            taken: set[str] = set()
            q_pats = []
            for q in state_tuple:
                pat, _ = rename_apart([P.pattern(q)], taken)
                q_pats.append(pat[0])
                taken |= set(metavars(pat[0]))
            hyps, concl = _fresh_rule(rule, taken)
            try:
                sigmas = unify_many(list(zip(q_pats, hyps)))
            except Exception:
                continue
            for sigma in sigmas:
                hyp_images = [sigma.apply(h) for h in hyps]
                concl_image = sigma.apply(concl)
                if _discharge(P, transitions, state_tuple, hyp_images, concl_image):
                    continue
                shown = ", ".join(P.state_names[q] for q in state_tuple)
                obligations.append(
                    f"rule {rname} from states ({shown}): no instance-preserving "
                    f"path to a {rname}-transition for "
                    f"{'; '.join(render_term(h) for h in hyp_images)}"
                )
    if obligations:
        return CheckReport("complete", "unknown", obligations=tuple(obligations))
    return CheckReport("complete", "proven")


def _subsuming_reach(P: SchematicPTA, start: int, image: Term) -> set[int]:
    """States reachable from `start` by dashed steps through subsuming states."""
    seen = {start}
    frontier = [start]
    while frontier:
        q = frontier.pop()
        for (a, b) in P.delta_eps:
            if a != q or b in seen:
                continue
            pat = P.pattern(b)
            if pat.sort() != image.sort() or not match(pat, image):
                continue
            seen.add(b)
            frontier.append(b)
    return seen


def _discharge(P, transitions, state_tuple, hyp_images, concl_image) -> bool:
    reaches = [
        _subsuming_reach(P, q, img) for q, img in zip(state_tuple, hyp_images)
    ]
    for srcs, _, trg in transitions:
        if not all(p in reaches[i] for i, p in enumerate(srcs)):
            continue
        trg_pat = P.pattern(trg)
        if trg_pat.sort() == concl_image.sort() and match(trg_pat, concl_image):
            return True
    return False


def refute_completeness(P: SchematicPTA, depth: int, size: int) -> Optional[Derivation]:
    """A bounded search for a valid derivation the automaton rejects.

    Rejection refutes the language inclusion, hence completeness; finding
    nothing proves nothing.
    """
    for d in enumerate_derivations(P.calculus, depth, size):
        if not pta_accepts(P, d):
            return d
    return None


def check_total(P: SchematicPTA, bound: int = 10) -> CheckReport:
    """Per transition: the schematic sufficient check, then bounded refutation.

    Sufficient: every source state sits inside the corresponding hypothesis
    pattern, the rule is syntactically modular, and the target subsumes the
    induced conclusion.  Otherwise instances of the source states up to
    `bound` are enumerated looking for a tuple with no conclusion in the
    target.
    """
    sig = P.calculus.signature
    details = []
    any_bounded = False
    for srcs, rname, trg in P.delta:
        rule = P.calculus.rules[rname]
        shown = (
            f"({', '.join(P.state_names[q] for q in srcs)}; {rname}; "
            f"{P.state_names[trg]})"
        )
        if not is_schematic(rule):
            any_bounded = True
            verdict = _total_bounded_semantic(P, rule, srcs, trg, bound)
            if verdict is not None:
                return CheckReport("total", "refuted", bound, f"{shown}: {verdict}")
            details.append(f"{shown}: total up to bound {bound}")
            continue
        if _total_schematic(P, rule, srcs, trg):
            details.append(f"{shown}: total (schematic)")
            continue
        any_bounded = True
        witness = _total_bounded(P, sig, rule, srcs, trg, bound)
        if witness is not None:
            return CheckReport("total", "refuted", bound, f"{shown}: {witness}")
        details.append(f"{shown}: total up to bound {bound}")
    verdict = "proven-up-to-bound" if any_bounded else "proven"
    return CheckReport("total", verdict, bound if any_bounded else None,
                       details=tuple(details))


def _total_schematic(P: SchematicPTA, rule: SchematicRule, srcs, trg) -> bool:
    seen: dict[str, int] = {}
    for i, h in enumerate(rule.hyps):
        for name in metavars(h):
            if name in seen and seen[name] != i:
                return False
            seen.setdefault(name, i)
    taken: set[str] = set()
    src_pats = []
    for q in srcs:
        pat, _ = rename_apart([P.pattern(q)], taken)
        src_pats.append(pat[0])
        taken |= set(metavars(pat[0]))
    hyps, concl = _fresh_rule(rule, taken)
    for p, t in zip(hyps, src_pats):
        if p.sort() != t.sort():
            return False
    sigmas = match_many(list(hyps), src_pats)
    trg_pat = P.pattern(trg)
    for sigma in sigmas:
        image = sigma.apply(concl)
        if trg_pat.sort() == image.sort() and match(trg_pat, image):
            return True
    return False


def _total_bounded(P, sig, rule, srcs, trg, bound) -> Optional[str]:
    pools = [instances(P.pattern(q), sig, bound) for q in srcs]
    trg_pat = P.pattern(trg)
    for combo in itertools.product(*pools):
        ok = False
        for sigma in match_many(list(rule.hyps), list(combo)):
            partial = sigma.apply(rule.concl)
            if is_ground(partial):
                candidates = [partial]
            else:
                candidates = instances(partial, sig, term_size(partial) + bound)[:32]
            if any(match(trg_pat, t) for t in candidates):
                ok = True
                break
        if not ok:
            shown = ", ".join(render_term(t) for t in combo)
            return f"no conclusion in target for ({shown})"
    return None


def _total_bounded_semantic(P, rule, srcs, trg, bound) -> Optional[str]:
    A = P.automaton()
    if A.search is None:
        return None
    pools = [A.search.state_instances(q, bound) for q in srcs]
    for combo in itertools.product(*pools):
        concls = rule.conclusions(tuple(combo), 4 * bound + 4) if rule.conclusions else []
        if not any(A.control.nabla_eps(t, trg) for t in concls):
            return f"no conclusion in target for {combo}"
    return None
