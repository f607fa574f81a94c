"""Justification-based truth maintenance network.

A :class:`Network` holds belief nodes and the justifications that support
them, and keeps every node labeled IN (currently believed) or OUT.  The
labeling is always the unique grounded fixpoint: an IN derived node has a
non-circular support chain bottoming out in premises and enabled
assumptions.  Toggling an assumption relabels only the affected cone of
dependents instead of the whole network.

Justifications may carry an out-list (nodes that must be OUT), but any
justification whose out-list edge would participate in a dependency cycle
is rejected at insertion time.  That restriction keeps the grounded
labeling unique and lets the incremental relabeling match a from-scratch
recomputation exactly.

Networks are single-writer: callers must serialize mutating operations per
instance.  Queries are safe to run concurrently with each other.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator

from .errors import (
    IllegalConsequentError,
    NodeIsOutError,
    NonMonotonicCycleError,
    NotAnAssumptionError,
    UnknownNodeError,
)


class Label(str, Enum):
    IN = "IN"
    OUT = "OUT"


class NodeKind(str, Enum):
    PREMISE = "premise"
    ASSUMPTION = "assumption"
    DERIVED = "derived"
    CONTRADICTION = "contradiction"


#: Kinds whose label is computed from justifications rather than set directly.
RELABELED_KINDS = frozenset({NodeKind.DERIVED, NodeKind.CONTRADICTION})

#: A label change as (node_id, old_label, new_label), ascending node id.
LabelDelta = list[tuple[int, Label, Label]]


@dataclass
class BeliefNode:
    """A single belief. ``support`` is the justification currently backing an
    IN derived/contradiction node; ``enabled`` is meaningful only for
    assumptions."""

    id: int
    kind: NodeKind
    label: Label
    support: int | None = None
    enabled: bool = False


@dataclass(frozen=True)
class Justification:
    """Support rule: ``consequent`` holds when every in-list node is IN and
    every out-list node is OUT."""

    id: int
    consequent: int
    in_list: frozenset[int]
    out_list: frozenset[int]


@dataclass
class SupportTree:
    """Well-founded support of an IN node.

    Leaves are premises, enabled assumptions, or ``absent`` markers for
    out-list members (nodes that support the parent by being OUT).
    """

    node_id: int
    kind: NodeKind
    justification_id: int | None = None
    absent: bool = False
    children: list["SupportTree"] = field(default_factory=list)

    def walk(self) -> Iterator["SupportTree"]:
        yield self
        for child in self.children:
            yield from child.walk()


class Network:
    """A mutable truth maintenance network with incremental relabeling."""

    def __init__(self) -> None:
        self._nodes: dict[int, BeliefNode] = {}
        self._justifications: dict[int, Justification] = {}
        # node id -> ids of justifications that reference it (in- or out-list)
        self._dependents: dict[int, set[int]] = {}
        # consequent node id -> its justification ids, ascending
        self._supports: dict[int, list[int]] = {}
        self._next_node_id = 1
        self._next_justification_id = 1

    # -- construction ------------------------------------------------------

    def add_node(self, kind: NodeKind | str) -> int:
        kind = NodeKind(kind)
        node_id = self._next_node_id
        self._next_node_id += 1
        label = Label.IN if kind is NodeKind.PREMISE else Label.OUT
        self._nodes[node_id] = BeliefNode(id=node_id, kind=kind, label=label)
        self._dependents[node_id] = set()
        return node_id

    def add_justification(
        self,
        consequent: int,
        in_list: Iterable[int] = (),
        out_list: Iterable[int] = (),
    ) -> int:
        in_set = frozenset(in_list)
        out_set = frozenset(out_list)
        for node_id in (consequent, *in_set, *out_set):
            self._require(node_id)
        if self._nodes[consequent].kind not in RELABELED_KINDS:
            raise IllegalConsequentError(
                f"node {consequent} is a {self._nodes[consequent].kind.value}; "
                "only derived/contradiction nodes can be justified"
            )
        if in_set & out_set:
            raise ValueError("in_list and out_list must be disjoint")
        if consequent in in_set or consequent in out_set:
            raise ValueError("a justification may not reference its own consequent")

        candidate = Justification(
            id=self._next_justification_id,
            consequent=consequent,
            in_list=in_set,
            out_list=out_set,
        )
        self._reject_cyclic_out_edges(candidate)

        self._next_justification_id += 1
        self._justifications[candidate.id] = candidate
        for antecedent in in_set | out_set:
            self._dependents[antecedent].add(candidate.id)
        bisect.insort(self._supports.setdefault(consequent, []), candidate.id)

        # An invalid justification cannot change the grounded labeling, and a
        # valid one for an already-IN node changes nothing either.
        if self._nodes[consequent].label is Label.OUT and self._valid(candidate.id):
            self._relabel(self._affected(consequent))
        return candidate.id

    # -- assumptions ---------------------------------------------------------

    def enable_assumption(self, node_id: int) -> LabelDelta:
        return self._set_assumption(node_id, True)

    def retract_assumption(self, node_id: int) -> LabelDelta:
        return self._set_assumption(node_id, False)

    def _set_assumption(self, node_id: int, enabled: bool) -> LabelDelta:
        node = self._require(node_id)
        if node.kind is not NodeKind.ASSUMPTION:
            raise NotAnAssumptionError(f"node {node_id} is a {node.kind.value}")
        if node.enabled == enabled:
            return []
        cone = self._affected(node_id)
        before = {n: self._nodes[n].label for n in cone}
        before[node_id] = node.label
        node.enabled = enabled
        node.label = Label.IN if enabled else Label.OUT
        self._relabel(cone)
        delta = [
            (n, old, self._nodes[n].label)
            for n, old in sorted(before.items())
            if self._nodes[n].label is not old
        ]
        return delta

    # -- queries ---------------------------------------------------------------

    def label_of(self, node_id: int) -> Label:
        return self._require(node_id).label

    def is_in(self, node_id: int) -> bool:
        return self.label_of(node_id) is Label.IN

    def node(self, node_id: int) -> BeliefNode:
        """The live node record; treat as read-only."""
        return self._require(node_id)

    def justification(self, justification_id: int) -> Justification:
        try:
            return self._justifications[justification_id]
        except KeyError:
            raise UnknownNodeError(f"unknown justification {justification_id}") from None

    def node_ids(self) -> list[int]:
        return sorted(self._nodes)

    def justification_ids(self) -> list[int]:
        return sorted(self._justifications)

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    def labels(self) -> dict[int, Label]:
        return {n: node.label for n, node in sorted(self._nodes.items())}

    def dependents_of(self, node_id: int) -> frozenset[int]:
        """Justification ids whose in- or out-list mentions the node."""
        self._require(node_id)
        return frozenset(self._dependents[node_id])

    def contradictions(self) -> list[int]:
        return [
            n
            for n, node in sorted(self._nodes.items())
            if node.kind is NodeKind.CONTRADICTION and node.label is Label.IN
        ]

    def explain(self, node_id: int) -> SupportTree:
        node = self._require(node_id)
        if node.label is not Label.IN:
            raise NodeIsOutError(f"node {node_id} is OUT; only IN nodes have support")
        return self._support_tree(node_id)

    def dump(self) -> str:
        """One line per node: ``id kind label support`` (ascending id)."""
        lines = []
        for n, node in sorted(self._nodes.items()):
            support = "-" if node.support is None else str(node.support)
            lines.append(f"{n} {node.kind.value} {node.label.value} {support}")
        return "\n".join(lines) + ("\n" if lines else "")

    # -- internals ---------------------------------------------------------------

    def _require(self, node_id: int) -> BeliefNode:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownNodeError(f"unknown node {node_id}") from None

    def _valid(self, justification_id: int) -> bool:
        j = self._justifications[justification_id]
        return all(self._nodes[i].label is Label.IN for i in j.in_list) and all(
            self._nodes[o].label is Label.OUT for o in j.out_list
        )

    def _first_valid(self, node_id: int) -> int | None:
        for jid in self._supports.get(node_id, ()):
            if self._valid(jid):
                return jid
        return None

    def _affected(self, seed: int) -> set[int]:
        """Derived/contradiction nodes whose label may depend on ``seed``,
        including ``seed`` itself when it is such a node."""
        cone: set[int] = set()
        if self._nodes[seed].kind in RELABELED_KINDS:
            cone.add(seed)
        stack = [seed]
        seen = {seed}
        while stack:
            current = stack.pop()
            for jid in self._dependents[current]:
                consequent = self._justifications[jid].consequent
                if consequent not in seen:
                    seen.add(consequent)
                    cone.add(consequent)
                    stack.append(consequent)
        return cone

    def _relabel(self, cone: set[int]) -> None:
        """Recompute grounded labels inside the affected cone.

        All cone nodes start OUT, then strongly connected components of the
        cone's dependency subgraph are closed in topological order.  Within
        a component only in-list references can point inward (out-list edges
        never lie on cycles), so closure there is monotone and fires each
        node's lowest-id valid justification.
        """
        for n in sorted(cone):
            node = self._nodes[n]
            node.label = Label.OUT
            node.support = None

        successors: dict[int, list[int]] = {n: [] for n in cone}
        for n in cone:
            for jid in self._supports.get(n, ()):
                j = self._justifications[jid]
                for antecedent in j.in_list | j.out_list:
                    if antecedent in cone:
                        successors[antecedent].append(n)

        for component in reversed(_tarjan_sccs(sorted(cone), successors)):
            members = sorted(component)
            changed = True
            while changed:
                changed = False
                for n in members:
                    node = self._nodes[n]
                    if node.label is Label.OUT:
                        jid = self._first_valid(n)
                        if jid is not None:
                            node.label = Label.IN
                            node.support = jid
                            changed = True

    def _reject_cyclic_out_edges(self, candidate: Justification) -> None:
        """Reject the candidate if, with it added, any out-list edge of any
        justification would participate in a dependency cycle."""
        successors: dict[int, set[int]] = {n: set() for n in self._nodes}
        out_edges: list[tuple[int, int, int]] = []
        for j in (*self._justifications.values(), candidate):
            for i in j.in_list:
                successors[i].add(j.consequent)
            for o in j.out_list:
                successors[o].add(j.consequent)
                out_edges.append((o, j.consequent, j.id))
        if not out_edges:
            return
        component_of: dict[int, int] = {}
        for idx, component in enumerate(
            _tarjan_sccs(sorted(self._nodes), {n: sorted(s) for n, s in successors.items()})
        ):
            for n in component:
                component_of[n] = idx
        for antecedent, consequent, jid in out_edges:
            if component_of[antecedent] == component_of[consequent]:
                raise NonMonotonicCycleError(
                    f"out-list edge {antecedent}->{consequent} (justification "
                    f"{jid}) would lie on a dependency cycle"
                )

    def _support_tree(self, node_id: int) -> SupportTree:
        node = self._nodes[node_id]
        if node.kind not in RELABELED_KINDS:
            return SupportTree(node_id=node_id, kind=node.kind)
        j = self._justifications[node.support]  # type: ignore[index]
        children = [self._support_tree(i) for i in sorted(j.in_list)]
        children.extend(
            SupportTree(node_id=o, kind=self._nodes[o].kind, absent=True)
            for o in sorted(j.out_list)
        )
        return SupportTree(
            node_id=node_id, kind=node.kind, justification_id=j.id, children=children
        )


def _tarjan_sccs(
    vertices: Iterable[int], successors: dict[int, list[int]] | dict[int, set[int]]
) -> list[list[int]]:
    """Iterative Tarjan. Components come out in reverse topological order of
    the condensation (consequents before their antecedents)."""
    index: dict[int, int] = {}
    lowlink: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    components: list[list[int]] = []
    counter = 0

    for root in vertices:
        if root in index:
            continue
        work: list[tuple[int, Iterator[int]]] = [(root, iter(sorted(successors.get(root, ()))))]
        index[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            vertex, edges = work[-1]
            advanced = False
            for succ in edges:
                if succ not in index:
                    index[succ] = lowlink[succ] = counter
                    counter += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(sorted(successors.get(succ, ())))))
                    advanced = True
                    break
                if succ in on_stack:
                    lowlink[vertex] = min(lowlink[vertex], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[vertex])
            if lowlink[vertex] == index[vertex]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == vertex:
                        break
                components.append(component)
    return components
