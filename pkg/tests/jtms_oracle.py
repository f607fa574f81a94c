"""Independent reference implementations used to check the network code.

The oracle computes grounded labels from scratch by stratified relaxation:
nodes get a stratum number (an out-list reference bumps the consequent one
stratum above the referenced node, an in-list reference only equalizes),
then strata are closed bottom-up starting all-OUT.  None of the incremental
machinery from the package is reused here.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from studypath.jtms import Label, Network, NodeKind, RELABELED_KINDS
from studypath.errors import NonMonotonicCycleError

Just = tuple[int, int, frozenset[int], frozenset[int]]  # jid, consequent, ins, outs


@dataclass
class OracleNet:
    kinds: dict[int, str] = field(default_factory=dict)
    enabled: set[int] = field(default_factory=set)
    justs: list[Just] = field(default_factory=list)


def grounded_labels(net: OracleNet) -> dict[int, bool]:
    """From-scratch grounded labeling (True = IN)."""
    strata = {n: 0 for n in net.kinds}
    max_passes = 2 + len(net.kinds) * (sum(len(j[3]) for j in net.justs) + 1)
    for _ in range(max_passes):
        changed = False
        for _, consequent, ins, outs in net.justs:
            for i in ins:
                if strata[consequent] < strata[i]:
                    strata[consequent] = strata[i]
                    changed = True
            for o in outs:
                if strata[consequent] < strata[o] + 1:
                    strata[consequent] = strata[o] + 1
                    changed = True
        if not changed:
            break
    else:
        raise AssertionError("stratification did not converge; network is not legal")

    labels: dict[int, bool] = {}
    for n, kind in net.kinds.items():
        if kind == "premise":
            labels[n] = True
        elif kind == "assumption":
            labels[n] = n in net.enabled
        else:
            labels[n] = False

    computed = [n for n, k in net.kinds.items() if k in ("derived", "contradiction")]
    for level in sorted(set(strata.values())):
        members = [n for n in computed if strata[n] == level]
        changed = True
        while changed:
            changed = False
            for n in members:
                if labels[n]:
                    continue
                for _, consequent, ins, outs in net.justs:
                    if consequent != n:
                        continue
                    if all(labels[i] for i in ins) and not any(labels[o] for o in outs):
                        labels[n] = True
                        changed = True
                        break
    return labels


def out_edge_on_cycle(justs: list[Just], candidate: Just | None = None) -> bool:
    """True if any out-list edge lies on a dependency cycle (union graph)."""
    pool = list(justs) + ([candidate] if candidate is not None else [])
    adjacency: dict[int, set[int]] = {}
    out_edges = []
    for _, consequent, ins, outs in pool:
        for i in ins:
            adjacency.setdefault(i, set()).add(consequent)
        for o in outs:
            adjacency.setdefault(o, set()).add(consequent)
            out_edges.append((o, consequent))
    for origin, target in out_edges:
        # the edge origin->target is on a cycle iff target reaches origin
        stack, seen = [target], {target}
        while stack:
            current = stack.pop()
            if current == origin:
                return True
            for succ in adjacency.get(current, ()):
                if succ not in seen:
                    seen.add(succ)
                    stack.append(succ)
    return False


def assert_labels_match(network: Network, oracle: OracleNet) -> None:
    expected = grounded_labels(oracle)
    actual = {n: label is Label.IN for n, label in network.labels().items()}
    assert actual == expected, f"labels diverge from oracle: {actual} != {expected}"


def assert_well_founded(network: Network) -> None:
    """Every IN derived node must ground out in premises/enabled assumptions
    through currently valid supports, without revisiting a node."""
    for n in network.node_ids():
        node = network.node(n)
        if node.kind in RELABELED_KINDS and node.label is Label.IN:
            _walk_support(network, n, frozenset())


def _walk_support(network: Network, node_id: int, path: frozenset[int]) -> None:
    node = network.node(node_id)
    assert node.label is Label.IN, f"support chain reached OUT node {node_id}"
    assert node_id not in path, f"circular support through node {node_id}"
    if node.kind is NodeKind.PREMISE:
        return
    if node.kind is NodeKind.ASSUMPTION:
        assert node.enabled, f"IN assumption {node_id} is not enabled"
        return
    assert node.support is not None, f"IN node {node_id} has no recorded support"
    justification = network.justification(node.support)
    for o in justification.out_list:
        assert network.label_of(o) is Label.OUT, (
            f"support {justification.id} of node {node_id} is stale: {o} is IN"
        )
    for i in justification.in_list:
        _walk_support(network, i, path | {node_id})


def assert_dependents_index_consistent(network: Network) -> None:
    rebuilt: dict[int, set[int]] = {n: set() for n in network.node_ids()}
    for jid in network.justification_ids():
        j = network.justification(jid)
        for antecedent in j.in_list | j.out_list:
            rebuilt[antecedent].add(jid)
    for n in network.node_ids():
        assert network.dependents_of(n) == frozenset(rebuilt[n])


KIND_POOL = (
    [NodeKind.PREMISE] * 2
    + [NodeKind.ASSUMPTION] * 5
    + [NodeKind.DERIVED] * 6
    + [NodeKind.CONTRADICTION] * 1
)


def random_network(
    rng: random.Random, max_nodes: int = 12, max_justifications: int = 20
) -> tuple[Network, OracleNet, list[int]]:
    """Build a random legal network mirrored into an oracle description.

    Also cross-checks that the implementation accepts exactly the candidate
    justifications an independent cycle test deems legal.
    """
    network = Network()
    oracle = OracleNet()
    for _ in range(rng.randint(1, max_nodes)):
        kind = rng.choice(KIND_POOL)
        node_id = network.add_node(kind)
        oracle.kinds[node_id] = kind.value
    node_ids = sorted(oracle.kinds)
    consequent_pool = [n for n, k in oracle.kinds.items() if k in ("derived", "contradiction")]
    assumptions = [n for n, k in oracle.kinds.items() if k == "assumption"]

    next_jid = 1
    for _ in range(rng.randint(0, max_justifications)):
        if not consequent_pool:
            break
        consequent = rng.choice(consequent_pool)
        others = [n for n in node_ids if n != consequent]
        ins = rng.sample(others, rng.randint(0, min(3, len(others))))
        rest = [n for n in others if n not in ins]
        outs = rng.sample(rest, rng.randint(0, min(2, len(rest))))
        candidate: Just = (next_jid, consequent, frozenset(ins), frozenset(outs))
        legal = not out_edge_on_cycle(oracle.justs, candidate)
        try:
            jid = network.add_justification(consequent, ins, outs)
        except NonMonotonicCycleError:
            assert not legal, f"implementation rejected a legal justification {candidate}"
            continue
        assert legal, f"implementation accepted an illegal justification {candidate}"
        assert jid == next_jid
        oracle.justs.append(candidate)
        next_jid += 1
    return network, oracle, assumptions
