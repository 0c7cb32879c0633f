"""Directed hypergraphs with dashed unary edges, hyperwalks, and DOT export.

The underlying graph of an automaton keeps states, transitions and dashed
epsilon edges but forgets control and acceptance.  A hyperwalk is a tree
walking the graph edge by edge; it is correct for an automaton when some
derivation and run realize it, which this module decides by searching for
instance labels.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Iterator, Optional

from .automata import Alphabet, Automaton, ControlOracle, Letter, Run, validate_run
from .calculus import Derivation
from .terms import (
    App,
    Signature,
    Substitution,
    Term,
    ground_terms,
    metavars,
    min_ground_term,
    rename_apart,
    render_term,
    unify_many,
)


class GraphError(Exception):
    pass


@dataclass(frozen=True)
class Edge:
    sources: tuple[int, ...]
    label: str
    target: int


class Hypergraph:
    """Vertices, labelled hyperedges with exactly one target, dashed pairs."""

    def __init__(
        self,
        vertices: list[str],
        edges: list[Edge],
        dashed: list[tuple[int, int]],
        captions: list[str] | None = None,
    ):
        self.vertices = tuple(vertices)
        self.edges = tuple(sorted(edges, key=lambda e: (e.label, e.sources, e.target)))
        self.dashed = tuple(sorted(dashed))
        self.dashed_set = set(self.dashed)
        self.captions = tuple(captions) if captions else self.vertices
        n = len(self.vertices)
        for e in self.edges:
            for v in (*e.sources, e.target):
                if not (0 <= v < n):
                    raise GraphError(f"edge {e} uses unknown vertex {v}")
        for a, b in self.dashed:
            if not (0 <= a < n and 0 <= b < n):
                raise GraphError("dashed edge uses unknown vertex")
        if len(self.captions) != n:
            raise GraphError("caption count mismatch")

    def labels(self) -> list[str]:
        return sorted({e.label for e in self.edges})

    def edge_set(self) -> set[tuple[tuple[int, ...], str, int]]:
        return {(e.sources, e.label, e.target) for e in self.edges}

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Hypergraph)
            and self.vertices == other.vertices
            and self.edges == other.edges
            and self.dashed == other.dashed
        )


SortingMap = tuple  # vertex index -> sort name


def underlying_graph(A: Automaton) -> tuple[Hypergraph, SortingMap]:
    """Forget control and acceptance: vertices are states, edges transitions."""
    captions = list(A.states)
    if A.schematic is not None:
        captions = [render_term(p) for p in A.schematic.state_patterns]
    G = Hypergraph(
        vertices=list(A.states),
        edges=[Edge(srcs, label, trg) for (srcs, label, trg) in A.delta],
        dashed=list(A.delta_eps),
        captions=captions,
    )
    return G, tuple(A.state_sorts)


def check_typing(G: Hypergraph, sig: Signature, h: SortingMap) -> list[str]:
    errors = []
    if len(h) != len(G.vertices):
        return ["sorting map size mismatch"]
    for e in G.edges:
        conn = sig.conn_by_name.get(e.label)
        if conn is None:
            errors.append(f"edge label {e.label} not in signature")
            continue
        if len(e.sources) != conn.arity:
            errors.append(f"edge on {e.label} has wrong arity")
            continue
        if h[e.target] != conn.trg.name:
            errors.append(f"edge on {e.label}: target sort mismatch")
        for v, want in zip(e.sources, conn.src):
            if h[v] != want.name:
                errors.append(f"edge on {e.label}: source sort mismatch")
    return errors


class TermConstructionControl(ControlOracle):
    """The represented automaton's control: the instance at a node is the
    letter applied to the child instances; every instance sits in every
    state."""

    def __init__(self, sig: Signature):
        self.sig = sig

    def nabla(self, hyp_instances, letter, instance) -> bool:
        conn = self.sig.conn_by_name.get(letter)
        if conn is None or len(hyp_instances) != conn.arity:
            return False
        if not all(isinstance(t, Term) for t in hyp_instances):
            return False
        return instance == App(conn, tuple(hyp_instances))

    def nabla_eps(self, instance, state) -> bool:
        return True


def represented_automaton(G: Hypergraph, sig: Signature, h: SortingMap) -> Automaton:
    """The automaton whose underlying graph is G, over the term universe."""
    errors = check_typing(G, sig, h)
    if errors:
        raise GraphError("; ".join(errors))
    letters = [
        Letter(c.name, tuple(s.name for s in c.src), c.trg.name)
        for c in sig.connectives
    ]
    return Automaton(
        alphabet=Alphabet(letters),
        states=G.vertices,
        state_sorts=tuple(h),
        delta=[(e.sources, e.label, e.target) for e in G.edges],
        delta_eps=list(G.dashed),
        final=range(len(G.vertices)),
        control=TermConstructionControl(sig),
        universe="terms",
        name="represented",
    )


# ---------------------------------------------------------------------------
# Hyperwalks


@dataclass(frozen=True)
class Hyperwalk:
    """A tree-shaped walk: one labelled hyperedge, then a dashed chain."""

    label: str
    vertices: tuple[int, ...]
    children: tuple["Hyperwalk", ...] = ()

    def addresses(self) -> Iterator[tuple[tuple[int, ...], "Hyperwalk"]]:
        yield (), self
        for i, c in enumerate(self.children, start=1):
            for addr, node in c.addresses():
                yield (i,) + addr, node

    def node_count(self) -> int:
        return 1 + sum(c.node_count() for c in self.children)

    def last_vertex(self) -> int:
        return self.vertices[-1]


@dataclass(frozen=True)
class WalkIssue:
    address: tuple[int, ...]
    reason: str

    def __str__(self) -> str:
        addr = ".".join(map(str, self.address)) or "root"
        return f"at {addr}: {self.reason}"


def validate_hyperwalk(G: Hypergraph, H: Hyperwalk) -> Optional[WalkIssue]:
    """Structural conditions: the first pair is a hyperedge fed by the
    children's final vertices; later pairs chain dashed edges."""
    edge_set = G.edge_set()
    for address, node in H.addresses():
        if not node.vertices:
            return WalkIssue(address, "empty vertex word")
        srcs = tuple(c.last_vertex() for c in node.children)
        if (srcs, node.label, node.vertices[0]) not in edge_set:
            shown = ", ".join(G.vertices[v] for v in srcs)
            return WalkIssue(
                address,
                f"({shown}; {node.label}; {G.vertices[node.vertices[0]]}) "
                f"is not an edge",
            )
        for i in range(len(node.vertices) - 1):
            pair = (node.vertices[i], node.vertices[i + 1])
            if pair not in G.dashed_set:
                return WalkIssue(
                    address,
                    f"({G.vertices[pair[0]]}, {G.vertices[pair[1]]}) "
                    f"is not a dashed edge",
                )
    return None


# ---------------------------------------------------------------------------
# Correction: find instance labels realizing the walk as a run


@dataclass
class CorrectionResult:
    status: str  # "correct" | "incorrect" | "resource-limit"
    derivation: Optional[Derivation] = None
    run: Optional[Run] = None
    reason: Optional[str] = None

    def __bool__(self) -> bool:
        return self.status == "correct"


def check_hyperwalk_correct(
    A: Automaton, H: Hyperwalk, cap: int = 256, value_bound: int = 64
) -> CorrectionResult:
    """Search for node instances making the walk a run of A.

    Schematic automata are searched with unification over per-node pattern
    constraints; enumerable domains with bounded instance sets.  More than
    `cap` alternatives at one node aborts with a resource-limit result, which
    is distinct from incorrectness.
    """
    G, _ = underlying_graph(A)
    issue = validate_hyperwalk(G, H)
    if issue is not None:
        return CorrectionResult("incorrect", reason=str(issue))
    if A.schematic is not None:
        return _correct_schematic(A, H, cap)
    if A.search is not None:
        return _correct_enumerable(A, H, cap, value_bound)
    raise GraphError("automaton supports neither schematic nor enumerable search")


def _correct_schematic(A: Automaton, H: Hyperwalk, cap: int) -> CorrectionResult:
    P = A.schematic
    sig = P.calculus.signature
    limit_hit = []
    blocked: list[tuple[int, tuple[int, ...]]] = []

    def visit(address, node) -> Optional[list[dict]]:
        """Candidates: maps address-suffix -> pattern, consistent by shared
        metavariables already substituted away."""
        child_candidates = []
        for i, c in enumerate(node.children, start=1):
            got = visit(address + (i,), c)
            if got is None:
                return None
            child_candidates.append(got)
        rule = P.calculus.rules.get(node.label)
        if rule is None or not hasattr(rule, "hyps"):
            blocked.append((len(address), address))
            return None
        out: list[dict] = []
        for combo in itertools.product(*child_candidates):
            taken: set[str] = set()
            for cand in combo:
                for pat in cand.values():
                    taken |= set(metavars(pat))
            pats, _ = rename_apart(list(rule.hyps) + [rule.concl], taken)
            hyps, concl = pats[:-1], pats[-1]
            pairs = []
            ok = True
            for i, cand in enumerate(combo):
                child_root = cand[()]
                if child_root.sort() != hyps[i].sort():
                    ok = False
                    break
                pairs.append((child_root, hyps[i]))
            if not ok:
                continue
            try:
                sigmas = unify_many(pairs)
            except Exception:
                continue
            for sigma in sigmas:
                merged: dict[tuple[int, ...], Term] = {(): sigma.apply(concl)}
                for i, cand in enumerate(combo):
                    for suffix, pat in cand.items():
                        merged[(i + 1,) + suffix] = sigma.apply(pat)
                # refine through the dashed chain's target states
                alternatives = [merged]
                for q in node.vertices[1:]:
                    refined = []
                    for m in alternatives:
                        taken2 = set()
                        for pat in m.values():
                            taken2 |= set(metavars(pat))
                        state_pat, _ = rename_apart([P.pattern(q)], taken2)
                        if state_pat[0].sort() != m[()].sort():
                            continue
                        try:
                            sigmas2 = unify_many([(m[()], state_pat[0])])
                        except Exception:
                            continue
                        for s2 in sigmas2:
                            refined.append(
                                {k: s2.apply(v) for k, v in m.items()}
                            )
                    alternatives = refined[:cap]
                out.extend(alternatives)
                if len(out) > cap:
                    limit_hit.append(address)
                    out = out[:cap]
        if not out:
            blocked.append((len(address), address))
            return None
        return out

    candidates = visit((), H)
    if candidates is None:
        if limit_hit:
            return CorrectionResult("resource-limit", reason="alternative cap exceeded")
        blocked.sort()
        addr = ".".join(map(str, blocked[0][1])) or "root"
        return CorrectionResult(
            "incorrect", reason=f"no admissible instances at {addr}"
        )
    chosen = candidates[0]
    ground = _ground_assignment(chosen, sig)
    derivation = _to_derivation(H, ground, ())
    run = Run.from_dict({
        addr: node.vertices for addr, node in H.addresses()
    })
    issue = validate_run(A, derivation, run)
    if issue is not None:
        if limit_hit:
            return CorrectionResult("resource-limit", reason=str(issue))
        return CorrectionResult("incorrect", reason=str(issue))
    return CorrectionResult("correct", derivation=derivation, run=run)


def _ground_assignment(mapping: dict, sig: Signature) -> dict:
    free: dict[str, Term] = {}
    for pat in mapping.values():
        free.update(metavars(pat))
    sigma = Substitution()
    for name, mv in sorted(free.items()):
        from .terms import SeqVar

        if isinstance(mv, SeqVar):
            sigma.seq[name] = ()
        else:
            t = min_ground_term(sig, mv.var_sort)
            if t is None:
                raise GraphError(f"cannot ground sort {mv.var_sort.name}")
            sigma.tree[name] = t
    return {addr: sigma.apply(pat) for addr, pat in mapping.items()}


def _to_derivation(H: Hyperwalk, ground: dict, address) -> Derivation:
    children = tuple(
        _to_derivation(c, ground, address + (i,))
        for i, c in enumerate(H.children, start=1)
    )
    return Derivation(ground[address], H.label, children)


def _correct_enumerable(A: Automaton, H: Hyperwalk, cap: int, bound: int) -> CorrectionResult:
    blocked: list[tuple[int, tuple[int, ...]]] = []
    limit_hit = []

    def visit(address, node) -> Optional[list[tuple[Any, tuple]]]:
        child_candidates = []
        for i, c in enumerate(node.children, start=1):
            got = visit(address + (i,), c)
            if got is None:
                return None
            child_candidates.append(got)
        out = []
        for combo in itertools.product(*child_candidates):
            hyps = tuple(t for (t, _) in combo)
            for t in A.search.conclusions(node.label, hyps, bound):
                if all(
                    A.control.nabla_eps(t, q) for q in node.vertices[1:]
                ):
                    out.append((t, combo))
                    if len(out) > cap:
                        limit_hit.append(address)
                        out = out[:cap]
                        break
        if not out:
            blocked.append((len(address), address))
            return None
        return out

    candidates = visit((), H)
    if candidates is None:
        if limit_hit:
            return CorrectionResult("resource-limit", reason="alternative cap exceeded")
        blocked.sort()
        addr = ".".join(map(str, blocked[0][1])) or "root"
        return CorrectionResult(
            "incorrect", reason=f"no admissible instances at {addr}"
        )

    def rebuild(node: Hyperwalk, cand) -> Derivation:
        t, combo = cand
        children = tuple(
            rebuild(c, combo[i]) for i, c in enumerate(node.children)
        )
        return Derivation(t, node.label, children)

    derivation = rebuild(H, candidates[0])
    run = Run.from_dict({addr: node.vertices for addr, node in H.addresses()})
    issue = validate_run(A, derivation, run)
    if issue is not None:
        return CorrectionResult("incorrect", reason=str(issue))
    return CorrectionResult("correct", derivation=derivation, run=run)


# ---------------------------------------------------------------------------
# DOT export


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(G: Hypergraph, style: str = "junction", name: str = "ptg") -> str:
    """Deterministic DOT text.

    Junction style routes hyperedges of arity >= 2 through a point-shaped
    node; axiom edges get an invisible start node; bipartite style renders
    every edge as a labelled box.
    """
    if style not in ("junction", "bipartite"):
        raise GraphError(f"unknown dot style: {style}")
    lines = [f"digraph {_quote(name)} {{", "  rankdir=BT;"]
    for i, caption in enumerate(G.captions):
        lines.append(f"  v{i} [shape=box label={_quote(caption)}];")
    for k, e in enumerate(G.edges):
        label = _quote(e.label)
        if style == "bipartite":
            lines.append(f"  e{k} [shape=rect style=rounded label={label}];")
            for pos, s in enumerate(e.sources, start=1):
                lines.append(f"  v{s} -> e{k} [arrowhead=none taillabel=\"{pos}\"];")
            lines.append(f"  e{k} -> v{e.target};")
            continue
        if len(e.sources) == 0:
            lines.append(f"  i{k} [shape=none label=\"\"];")
            lines.append(f"  i{k} -> v{e.target} [label={label}];")
        elif len(e.sources) == 1:
            lines.append(f"  v{e.sources[0]} -> v{e.target} [label={label}];")
        else:
            lines.append(f"  j{k} [shape=point width=0.06];")
            for pos, s in enumerate(e.sources, start=1):
                lines.append(
                    f"  v{s} -> j{k} [arrowhead=none taillabel=\"{pos}\"];"
                )
            lines.append(f"  j{k} -> v{e.target} [label={label}];")
    for a, b in G.dashed:
        lines.append(f"  v{a} -> v{b} [style=dashed];")
    lines.append("}")
    return "\n".join(lines) + "\n"
