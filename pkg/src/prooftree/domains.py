"""Semantic instance domains: oracle-controlled universes with enumerators.

Ships the natural-number domain: a calculus with the infinite rule families
zero / increment / addition, and the parity automaton over it together with
its three published variants.  States are predicates over naturals; le1 shows
a finite two-element state that a single schematic pattern cannot express.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .automata import (
    Alphabet,
    Automaton,
    AutomatonError,
    CheckReport,
    ControlOracle,
    InstanceSearch,
    Letter,
)
from .calculus import Calculus, SemanticRule


class DomainError(Exception):
    pass


# ---------------------------------------------------------------------------
# The natural-number domain


def arthm_rules() -> list[SemanticRule]:
    return [
        SemanticRule(
            "0", 0, (), "Nat",
            member=lambda hyps, concl: concl == 0,
            instances_upto=lambda b: [((), 0)] if b >= 0 else [],
            conclusions=lambda hyps, b: [0] if b >= 0 else [],
        ),
        SemanticRule(
            "Incr", 1, ("Nat",), "Nat",
            member=lambda hyps, concl: concl == hyps[0] + 1,
            instances_upto=lambda b: [((n,), n + 1) for n in range(0, b)],
            conclusions=lambda hyps, b: [hyps[0] + 1] if hyps[0] + 1 <= b else [],
        ),
        SemanticRule(
            "Add", 2, ("Nat", "Nat"), "Nat",
            member=lambda hyps, concl: concl == hyps[0] + hyps[1],
            instances_upto=lambda b: [
                ((n, m), n + m)
                for n in range(0, b + 1)
                for m in range(0, b + 1 - n)
            ],
            conclusions=lambda hyps, b: (
                [hyps[0] + hyps[1]] if hyps[0] + hyps[1] <= b else []
            ),
        ),
    ]


def arthm_calculus() -> Calculus:
    from .terms import Connective, Signature, Sort

    nat = Sort("Nat")
    sig = Signature([nat], [Connective("nat", (), nat)])
    return Calculus("Arthm", sig, arthm_rules())


ARTHM_STATE_PREDICATES: dict[str, Callable[[int], bool]] = {
    "zero": lambda n: n == 0,
    "even": lambda n: n % 2 == 0,
    "odd": lambda n: n % 2 == 1,
    "le1": lambda n: n <= 1,
}


class ArthmControl(ControlOracle):
    def __init__(self, state_names: tuple[str, ...]):
        self.predicates = [ARTHM_STATE_PREDICATES[s] for s in state_names]
        self.rules = {r.name: r for r in arthm_rules()}

    def nabla(self, hyp_instances, letter, instance) -> bool:
        return self.rules[letter].member(hyp_instances, instance)

    def nabla_eps(self, instance, state: int) -> bool:
        return self.predicates[state](instance)


class ArthmSearch(InstanceSearch):
    def __init__(self, state_names: tuple[str, ...]):
        self.state_names = state_names
        self.predicates = [ARTHM_STATE_PREDICATES[s] for s in state_names]
        self.rules = {r.name: r for r in arthm_rules()}

    def state_instances(self, state: int, bound: int) -> list[int]:
        return [n for n in range(0, bound + 1) if self.predicates[state](n)]

    def letter_instances(self, letter: str, bound: int):
        return self.rules[letter].instances_upto(bound)

    def conclusions(self, letter: str, hyps: tuple, bound: int) -> list[int]:
        return self.rules[letter].conclusions(hyps, bound)

    def instance_size(self, t) -> int:
        return int(t)

    # decimal text codec
    def parse_instance(self, text: str) -> int:
        n = int(text)
        if n < 0:
            raise DomainError(f"not a natural number: {text}")
        return n

    def render_instance(self, t) -> str:
        return str(t)


ARTHM_VARIANTS = ("base", "a2", "a3", "a4")


def arthm_automaton(variant: str = "base") -> Automaton:
    """The parity automaton over naturals and its published variants.

    a2 adds the inconsistent axiom transition into odd; a3 drops the
    odd-increment transition; a4 adds the le1 = {0, 1} state reachable by the
    axiom but with no outgoing dashed edge.
    """
    variant = variant.lower()
    if variant not in ARTHM_VARIANTS:
        raise DomainError(f"unknown arithmetic variant: {variant}")
    states = ["zero", "even", "odd"]
    if variant == "a4":
        states.append("le1")
    idx = {s: i for i, s in enumerate(states)}
    delta = [
        ((), "0", idx["zero"]),
        ((idx["even"],), "Incr", idx["odd"]),
        ((idx["even"], idx["even"]), "Add", idx["even"]),
        ((idx["odd"], idx["odd"]), "Add", idx["even"]),
        ((idx["odd"], idx["even"]), "Add", idx["odd"]),
        ((idx["even"], idx["odd"]), "Add", idx["odd"]),
    ]
    if variant != "a3":
        delta.append(((idx["odd"],), "Incr", idx["even"]))
    if variant == "a2":
        delta.append(((), "0", idx["odd"]))
    if variant == "a4":
        delta.append(((), "0", idx["le1"]))
    alphabet = Alphabet([
        Letter("0", (), "Nat"),
        Letter("Incr", ("Nat",), "Nat"),
        Letter("Add", ("Nat", "Nat"), "Nat"),
    ])
    names = tuple(states)
    return Automaton(
        alphabet=alphabet,
        states=names,
        state_sorts=("Nat",) * len(names),
        delta=delta,
        delta_eps=[(idx["zero"], idx["even"])],
        final=range(len(names)),
        control=ArthmControl(names),
        universe="naturals",
        name=f"arthm-{variant}" if variant != "base" else "arthm",
        search=ArthmSearch(names),
    )


# ---------------------------------------------------------------------------
# Bounded definitional checks


def bounded_property_check(A: Automaton, prop: str, bound: int) -> CheckReport:
    """Exhaustively evaluate the defining condition over instances <= bound.

    A refutation carries a replayable witness tuple; a pass is only a
    bounded verdict.
    """
    if A.search is None:
        raise DomainError("automaton has no instance enumerators")
    if prop == "consistent":
        return _bounded_consistent(A, bound)
    if prop == "complete":
        return _bounded_complete(A, bound)
    if prop == "total":
        return _bounded_total(A, bound)
    raise DomainError(f"unknown property: {prop}")


def _hyp_combos(A: Automaton, srcs: tuple[int, ...], bound: int):
    import itertools

    pools = [A.search.state_instances(q, bound) for q in srcs]
    return itertools.product(*pools)


def _bounded_consistent(A: Automaton, bound: int) -> CheckReport:
    for srcs, letter, trg in A.delta:
        for combo in _hyp_combos(A, srcs, bound):
            for t in A.search.conclusions(letter, combo, 2 * bound + 2):
                if not A.control.nabla_eps(t, trg):
                    witness = (
                        f"transition ({', '.join(A.states[q] for q in srcs)}; "
                        f"{letter}; {A.states[trg]}) maps {combo} to {t}, "
                        f"which is not in {A.states[trg]}"
                    )
                    return CheckReport("consistent", "refuted", bound, witness)
    return CheckReport("consistent", "proven-up-to-bound", bound)


def _eps_reach(A: Automaton, t, q0: int) -> set[int]:
    seen = {q0}
    frontier = [q0]
    while frontier:
        q = frontier.pop()
        for q2 in A.eps_successors(q):
            if q2 not in seen and A.control.nabla_eps(t, q2):
                seen.add(q2)
                frontier.append(q2)
    return seen


def _bounded_complete(A: Automaton, bound: int) -> CheckReport:
    import itertools

    concl_states = A.conclusion_states()
    for letter in A.alphabet.names():
        arity = A.alphabet[letter].arity
        transitions = A.transitions_on(letter)
        for state_tuple in itertools.product(concl_states, repeat=arity):
            for combo in _hyp_combos(A, state_tuple, bound):
                for t in A.search.conclusions(letter, combo, 2 * bound + 2):
                    reach = [
                        _eps_reach(A, ti, qi)
                        for ti, qi in zip(combo, state_tuple)
                    ]
                    ok = any(
                        all(p in reach[i] for i, p in enumerate(srcs))
                        and A.control.nabla_eps(t, trg)
                        for srcs, _, trg in transitions
                    )
                    if not ok:
                        witness = (
                            f"rule {letter}, hypothesis states "
                            f"({', '.join(A.states[q] for q in state_tuple)}), "
                            f"instances {combo}, conclusion {t}"
                        )
                        return CheckReport("complete", "refuted", bound, witness)
    return CheckReport("complete", "proven-up-to-bound", bound)


def _bounded_total(A: Automaton, bound: int) -> CheckReport:
    details = []
    for srcs, letter, trg in A.delta:
        shown = f"({', '.join(A.states[q] for q in srcs)}; {letter}; {A.states[trg]})"
        for combo in _hyp_combos(A, srcs, bound):
            if not any(
                A.control.nabla_eps(t, trg)
                for t in A.search.conclusions(letter, combo, 4 * bound + 4)
            ):
                witness = f"transition {shown}: no conclusion in target for {combo}"
                return CheckReport("total", "refuted", bound, witness)
        details.append(f"{shown}: total up to bound {bound}")
    return CheckReport("total", "proven-up-to-bound", bound, details=tuple(details))
