"""Controlling tree automata with epsilon transitions.

An automaton reads trees whose nodes carry a pair (instance, letter); the
instance ranges over a possibly infinite universe.  Two control relations
gate the runs: one per rule transition, one per epsilon step.  States are
kept as dense indices 0..|Q|-1 with display names alongside.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator, Optional

from .calculus import Derivation, render_instance


class AutomatonError(Exception):
    pass


@dataclass(frozen=True)
class Letter:
    name: str
    src: tuple[str, ...]  # sort names
    trg: str

    @property
    def arity(self) -> int:
        return len(self.src)


class Alphabet:
    """A finite ranked alphabet; letters carry a sort-arity."""

    def __init__(self, letters: Iterable[Letter]):
        self.letters: dict[str, Letter] = {}
        for l in letters:
            if l.name in self.letters:
                raise AutomatonError(f"duplicate letter: {l.name}")
            self.letters[l.name] = l

    def __contains__(self, name: str) -> bool:
        return name in self.letters

    def __getitem__(self, name: str) -> Letter:
        return self.letters[name]

    def names(self) -> list[str]:
        return sorted(self.letters)


class ControlOracle:
    """Decidable membership tests for the two control relations."""

    def nabla(self, hyp_instances: tuple, letter: str, instance) -> bool:
        raise NotImplementedError

    def nabla_eps(self, instance, state: int) -> bool:
        raise NotImplementedError


class TrivialControl(ControlOracle):
    """Allows everything; useful for plain tree-automaton behaviour."""

    def nabla(self, hyp_instances, letter, instance) -> bool:
        return True

    def nabla_eps(self, instance, state) -> bool:
        return True


class InstanceSearch:
    """Optional bounded-enumeration capabilities used by the checkers."""

    def state_instances(self, state: int, bound: int) -> list:
        raise NotImplementedError

    def letter_instances(self, letter: str, bound: int) -> list[tuple[tuple, Any]]:
        raise NotImplementedError

    def conclusions(self, letter: str, hyps: tuple, bound: int) -> list:
        raise NotImplementedError

    def instance_size(self, t) -> int:
        raise NotImplementedError


class Automaton:
    def __init__(
        self,
        alphabet: Alphabet,
        states: Iterable[str],
        state_sorts: Iterable[str],
        delta: Iterable[tuple[tuple[int, ...], str, int]],
        delta_eps: Iterable[tuple[int, int]],
        final: Iterable[int],
        control: ControlOracle,
        universe: str = "terms",
        name: str = "automaton",
        search: InstanceSearch | None = None,
        schematic=None,
    ):
        self.alphabet = alphabet
        self.states = tuple(states)
        self.state_sorts = tuple(state_sorts)
        self.delta = tuple(sorted((tuple(s), l, t) for (s, l, t) in delta))
        self.delta_set = set(self.delta)
        self.delta_eps = tuple(sorted((a, b) for (a, b) in delta_eps))
        self.delta_eps_set = set(self.delta_eps)
        self.final = frozenset(final)
        self.control = control
        self.universe = universe
        self.name = name
        self.search = search
        self.schematic = schematic
        self._validate()

    def _validate(self):
        n = len(self.states)
        if len(self.state_sorts) != n:
            raise AutomatonError("state sort map size mismatch")
        for srcs, letter, trg in self.delta:
            if letter not in self.alphabet:
                raise AutomatonError(f"transition uses unknown letter {letter}")
            lt = self.alphabet[letter]
            if len(srcs) != lt.arity:
                raise AutomatonError(
                    f"transition on {letter} has {len(srcs)} sources, arity is {lt.arity}"
                )
            for q in (*srcs, trg):
                if not (0 <= q < n):
                    raise AutomatonError(f"transition state {q} out of range")
            for q, want in zip(srcs, lt.src):
                if self.state_sorts[q] != want:
                    raise AutomatonError(
                        f"transition on {letter}: source state {self.states[q]} "
                        f"has sort {self.state_sorts[q]}, expected {want}"
                    )
            if self.state_sorts[trg] != lt.trg:
                raise AutomatonError(
                    f"transition on {letter}: target sort mismatch"
                )
        for a, b in self.delta_eps:
            if not (0 <= a < n and 0 <= b < n):
                raise AutomatonError("epsilon transition state out of range")
        for q in self.final:
            if not (0 <= q < n):
                raise AutomatonError("final state out of range")

    def state_index(self, name: str) -> int:
        return self.states.index(name)

    def eps_successors(self, q: int) -> list[int]:
        return sorted(b for (a, b) in self.delta_eps if a == q)

    def transitions_on(self, letter: str) -> list[tuple[tuple[int, ...], str, int]]:
        return [tr for tr in self.delta if tr[1] == letter]

    def conclusion_states(self) -> list[int]:
        return sorted({trg for (_, _, trg) in self.delta})


@dataclass(frozen=True)
class Run:
    """A labelling of tree addresses by non-empty state-index words."""

    words: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]

    @staticmethod
    def from_dict(d: dict[tuple[int, ...], tuple[int, ...]]) -> "Run":
        return Run(tuple(sorted(d.items())))

    def word(self, address: tuple[int, ...]) -> tuple[int, ...]:
        for addr, w in self.words:
            if addr == address:
                return w
        raise KeyError(address)

    def as_dict(self) -> dict[tuple[int, ...], tuple[int, ...]]:
        return dict(self.words)

    def render(self, A: Automaton) -> str:
        lines = []
        for addr, w in self.words:
            a = ".".join(map(str, addr)) or "root"
            lines.append(f"{a}: " + " ~> ".join(A.states[q] for q in w))
        return "\n".join(lines)


@dataclass(frozen=True)
class RunIssue:
    address: tuple[int, ...]
    condition: int  # 1 transitions, 2 control, 3 eps-transitions, 4 eps-control
    reason: str

    def __str__(self) -> str:
        addr = ".".join(map(str, self.address)) or "root"
        return f"condition {self.condition} fails at {addr}: {self.reason}"


def validate_run(A: Automaton, D: Derivation, run: Run) -> Optional[RunIssue]:
    """Check the four run conditions at every node of D."""
    words = run.as_dict()
    for address, node in D.addresses():
        if address not in words or not words[address]:
            return RunIssue(address, 1, "missing or empty state word")
    for address, node in D.addresses():
        word = words[address]
        letter = node.rule
        if letter not in A.alphabet:
            return RunIssue(address, 1, f"unknown letter {letter}")
        child_exits = tuple(
            words[address + (i,)][-1] for i in range(1, len(node.children) + 1)
        )
        if (child_exits, letter, word[0]) not in A.delta_set:
            shown = ", ".join(A.states[q] for q in child_exits)
            return RunIssue(
                address, 1,
                f"({shown}; {letter}; {A.states[word[0]]}) is not a transition",
            )
        hyp_instances = tuple(c.term for c in node.children)
        if not A.control.nabla(hyp_instances, letter, node.term):
            return RunIssue(
                address, 2,
                f"control rejects {letter} at {render_instance(node.term)}",
            )
        for i in range(len(word) - 1):
            if (word[i], word[i + 1]) not in A.delta_eps_set:
                return RunIssue(
                    address, 3,
                    f"({A.states[word[i]]}, {A.states[word[i + 1]]}) is not an epsilon transition",
                )
            if not A.control.nabla_eps(node.term, word[i + 1]):
                return RunIssue(
                    address, 4,
                    f"{render_instance(node.term)} not admitted at {A.states[word[i + 1]]}",
                )
    return None


def find_run(A: Automaton, D: Derivation) -> Optional[Run]:
    """Bottom-up run search; returns an accepting run or None.

    Per node: entry states are targets of transitions whose sources are drawn
    from the children's exit sets, exits are the epsilon closure gated by the
    epsilon control.  Acceptance uses the last state of the root word.
    """
    node_info: dict[tuple[int, ...], dict] = {}

    def visit(address: tuple[int, ...], node: Derivation) -> bool:
        for i, child in enumerate(node.children, start=1):
            if not visit(address + (i,), child):
                return False
        hyp_instances = tuple(c.term for c in node.children)
        if not A.control.nabla(hyp_instances, node.rule, node.term):
            return False
        child_exits = [
            node_info[address + (i,)]["exits"]
            for i in range(1, len(node.children) + 1)
        ]
        entry: dict[int, tuple[int, ...]] = {}
        for srcs, letter, trg in A.delta:
            if letter != node.rule:
                continue
            if all(q in child_exits[i] for i, q in enumerate(srcs)):
                entry.setdefault(trg, srcs)
        if not entry:
            return False
        pred: dict[int, Optional[int]] = {q: None for q in entry}
        frontier = sorted(entry)
        visited = set(frontier)
        while frontier:
            nxt = []
            for q in frontier:
                for q2 in A.eps_successors(q):
                    if q2 in visited:
                        continue
                    if not A.control.nabla_eps(node.term, q2):
                        continue
                    visited.add(q2)
                    pred[q2] = q
                    nxt.append(q2)
            frontier = sorted(nxt)
        node_info[address] = {"entry": entry, "pred": pred, "exits": visited}
        return True

    if not visit((), D):
        return None
    root_exits = sorted(node_info[()]["exits"] & A.final)
    if not root_exits:
        return None

    words: dict[tuple[int, ...], tuple[int, ...]] = {}

    def build(address: tuple[int, ...], node: Derivation, exit_state: int):
        info = node_info[address]
        word = [exit_state]
        q = exit_state
        while info["pred"][q] is not None:
            q = info["pred"][q]
            word.append(q)
        word.reverse()
        words[address] = tuple(word)
        combo = info["entry"][word[0]]
        for i, child in enumerate(node.children, start=1):
            build(address + (i,), child, combo[i - 1])

    build((), D, root_exits[0])
    return Run.from_dict(words)


def accepts(A: Automaton, D: Derivation) -> bool:
    return find_run(A, D) is not None


def epsilon_paths(A: Automaton, instance, q0: int) -> list[tuple[int, ...]]:
    """All simple instance-preserving epsilon paths from q0, shortest first.

    Simplicity loses nothing: the run conditions depend only on membership of
    the visited states, so any repeating path shrinks to a simple one with the
    same endpoint.
    """
    if not A.control.nabla_eps(instance, q0):
        raise AutomatonError(
            f"instance {render_instance(instance)} is not admitted at {A.states[q0]}"
        )
    out: list[tuple[int, ...]] = []

    def walk(path: list[int]):
        out.append(tuple(path))
        for q2 in A.eps_successors(path[-1]):
            if q2 in path:
                continue
            if not A.control.nabla_eps(instance, q2):
                continue
            walk(path + [q2])

    walk([q0])
    out.sort(key=lambda p: (len(p), p))
    return out


# ---------------------------------------------------------------------------
# Check reports


@dataclass(frozen=True)
class CheckReport:
    """Outcome of a consistency / completeness / totality check."""

    property: str
    verdict: str  # "proven" | "proven-up-to-bound" | "refuted" | "unknown"
    bound: Optional[int] = None
    witness: Any = None
    obligations: tuple = ()
    details: tuple = ()

    def __bool__(self) -> bool:
        return self.verdict.startswith("proven")

    def describe(self) -> str:
        head = f"{self.property}: {self.verdict}"
        if self.verdict == "proven-up-to-bound" and self.bound is not None:
            head += f" (bound {self.bound})"
        lines = [head]
        if self.witness is not None:
            lines.append(f"  witness: {self.witness}")
        for ob in self.obligations:
            lines.append(f"  obligation: {ob}")
        for d in self.details:
            lines.append(f"  {d}")
        return "\n".join(lines)


def check_consistent(A: Automaton, bound: Optional[int] = None) -> CheckReport:
    """Dispatch to the schematic prover or the bounded enumeration check."""
    if A.schematic is not None and bound is None:
        from .pta import check_consistent_schematic

        return check_consistent_schematic(A.schematic)
    from .domains import bounded_property_check

    return bounded_property_check(A, "consistent", bound if bound is not None else 10)
