"""Hardware-aware qubit mapping and routing.

The device is an undirected coupling graph over physical qubits.  Routing
processes the gate dependency DAG in topological order, keeping a front layer
of ready gates.  Front-layer two-qubit gates whose operands sit on adjacent
physical qubits execute immediately; when every front gate is blocked, the
swap minimizing a distance heuristic is inserted and the layout updated.
Initial placement runs the same router forward and backward over the circuit
a few times (SABRE) and keeps the layout whose forward pass needed the
fewest swaps.

Conventions: inserted swaps are tagged, barriers order the DAG but do not
appear in routed output, and conditional regions are only routable when
their body is a single-qubit gate.
"""

import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, CouplingFormatError, RoutingError
from .ir import (
    Barrier,
    ConditionalRegion,
    Dealloc,
    GateDag,
    Inst,
    Qalloc,
    QRegister,
    QuantumProgram,
    QubitRef,
    build_dag,
)
from .optimizer import NativeGateSet

EXTENDED_SET_SIZE = 20
EXTENDED_SET_WEIGHT = 0.5
DECAY_FACTOR = 1.001
DECAY_RESET_INTERVAL = 5


@dataclass(frozen=True)
class CouplingGraph:
    n_physical: int
    adjacency: tuple[tuple[int, ...], ...]
    distance: tuple[tuple[int, ...], ...]

    @property
    def edges(self) -> list[tuple[int, int]]:
        out = []
        for u, neighbors in enumerate(self.adjacency):
            out.extend((u, v) for v in neighbors if u < v)
        return out

    def adjacent(self, u: int, v: int) -> bool:
        return self.distance[u][v] == 1

    @classmethod
    def from_edges(cls, n_qubits: int, edges) -> "CouplingGraph":
        if not isinstance(n_qubits, int) or n_qubits < 1:
            raise CouplingFormatError("n_qubits must be a positive integer")
        neighbor_sets: list[set[int]] = [set() for _ in range(n_qubits)]
        for edge in edges:
            pair = tuple(edge)
            if len(pair) != 2 or not all(isinstance(x, int) for x in pair):
                raise CouplingFormatError(f"edge {edge!r} is not a pair of qubit indices")
            u, v = pair
            if not (0 <= u < n_qubits and 0 <= v < n_qubits):
                raise CouplingFormatError(f"edge {edge!r} out of range for {n_qubits} qubits")
            if u == v:
                raise CouplingFormatError(f"edge {edge!r} is a self-loop")
            neighbor_sets[u].add(v)
            neighbor_sets[v].add(u)
        adjacency = tuple(tuple(sorted(s)) for s in neighbor_sets)
        distance = tuple(_bfs_distances(adjacency, source) for source in range(n_qubits))
        return cls(n_qubits, adjacency, distance)


def _bfs_distances(adjacency, source: int) -> tuple[int, ...]:
    n = len(adjacency)
    dist = [-1] * n
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in adjacency[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    if any(d < 0 for d in dist):
        raise RoutingError("disconnected coupling graph")
    return tuple(dist)


def load_coupling_graph(path) -> CouplingGraph:
    """Load a device description: JSON {"n_qubits": N, "edges": [[u, v], ...]}."""
    try:
        with open(path) as handle:
            data = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise CouplingFormatError(f"cannot read coupling graph {path}: {exc}") from exc
    if not isinstance(data, dict) or "n_qubits" not in data or "edges" not in data:
        raise CouplingFormatError('coupling graph needs "n_qubits" and "edges" keys')
    if not isinstance(data["edges"], list):
        raise CouplingFormatError('"edges" must be a list of pairs')
    return CouplingGraph.from_edges(data["n_qubits"], data["edges"])


class Layout:
    """Bijection between logical qubits and a subset of physical qubits."""

    def __init__(self, log_to_phys: list[int], n_physical: int):
        if len(set(log_to_phys)) != len(log_to_phys):
            raise RoutingError("layout maps two logical qubits to one physical qubit")
        if any(not (0 <= p < n_physical) for p in log_to_phys):
            raise RoutingError("layout references a physical qubit outside the device")
        self.log_to_phys = list(log_to_phys)
        self.phys_to_log: list[int | None] = [None] * n_physical
        for logical, phys in enumerate(log_to_phys):
            self.phys_to_log[phys] = logical

    @classmethod
    def identity(cls, n_logical: int, n_physical: int) -> "Layout":
        return cls(list(range(n_logical)), n_physical)

    @property
    def n_physical(self) -> int:
        return len(self.phys_to_log)

    def phys(self, logical: int) -> int:
        return self.log_to_phys[logical]

    def copy(self) -> "Layout":
        return Layout(self.log_to_phys, self.n_physical)

    def swap_physical(self, u: int, v: int) -> None:
        lu, lv = self.phys_to_log[u], self.phys_to_log[v]
        self.phys_to_log[u], self.phys_to_log[v] = lv, lu
        if lu is not None:
            self.log_to_phys[lu] = v
        if lv is not None:
            self.log_to_phys[lv] = u

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Layout)
            and self.log_to_phys == other.log_to_phys
            and self.n_physical == other.n_physical
        )

    def __repr__(self) -> str:
        return f"Layout({self.log_to_phys}, n_physical={self.n_physical})"


@dataclass(frozen=True)
class RoutedGate:
    name: str
    params: tuple[float, ...]
    qubits: tuple[int, ...]  # physical indices
    result: object = None
    condition: tuple[int, int] | None = None
    inserted: bool = False


@dataclass
class RoutingResult:
    routed_gates: list[RoutedGate]
    initial_layout: Layout
    final_layout: Layout
    swap_count: int
    # Count of cx gates that replace inserted swaps when the native set has
    # no swap; 0 when swaps are emitted as-is.
    swap_cx_count: int = 0


def _check_routable(node) -> None:
    if len(node.qubits) > 2:
        raise RoutingError(
            f"gate {node.name} acts on {len(node.qubits)} qubits; decompose before routing"
        )
    if node.condition is not None and len(node.qubits) != 1:
        raise RoutingError("conditional regions with multi-qubit bodies are not routable")


def sabre_swap(
    dag: GateDag,
    initial: Layout,
    graph: CouplingGraph,
    seed: int = 0,
    extended_size: int = EXTENDED_SET_SIZE,
    extended_weight: float = EXTENDED_SET_WEIGHT,
    decay_factor: float = DECAY_FACTOR,
    decay_reset: int = DECAY_RESET_INTERVAL,
) -> RoutingResult:
    """Route a gate DAG, inserting swaps when the front layer is blocked.

    The candidate score is the mean front-layer distance plus a weighted mean
    over an extended lookahead set, scaled by a per-qubit decay that
    discourages immediately reusing the same physical qubits.  Ties break on
    the lexicographically smallest edge, so routing is deterministic; the
    seed only matters for initial-layout search.
    """
    for node in dag.nodes:
        _check_routable(node)

    layout = initial.copy()
    indegree = {n.node_id: len(dag.predecessors[n.node_id]) for n in dag.nodes}
    ready = sorted(n.node_id for n in dag.nodes if indegree[n.node_id] == 0)
    node_by_id = {n.node_id: n for n in dag.nodes}
    routed: list[RoutedGate] = []
    swap_count = 0
    decay = [1.0] * graph.n_physical
    swap_budget = 10 * max(len(dag.nodes), 1) * graph.n_physical

    def executable(node) -> bool:
        if len(node.qubits) < 2:
            return True
        u, v = (layout.phys(q) for q in node.qubits)
        return graph.adjacent(u, v)

    def emit(node) -> None:
        routed.append(
            RoutedGate(
                name=node.name,
                params=node.params,
                qubits=tuple(layout.phys(q) for q in node.qubits),
                result=node.result,
                condition=node.condition,
            )
        )

    def release(node_id: int) -> None:
        for succ in dag.successors[node_id]:
            indegree[succ] -= 1
            if indegree[succ] == 0:
                ready.append(succ)

    while ready:
        progressed = True
        while progressed:
            progressed = False
            for node_id in sorted(ready):
                node = node_by_id[node_id]
                if executable(node):
                    emit(node)
                    ready.remove(node_id)
                    release(node_id)
                    progressed = True
        if not ready:
            break

        front = [node_by_id[i] for i in sorted(ready)]
        blocked = [n for n in front if len(n.qubits) == 2]
        if not blocked:
            raise RoutingError("front layer stalled without a blocked two-qubit gate")
        extended = _extended_set(dag, node_by_id, ready, extended_size)

        active = {layout.phys(q) for n in blocked for q in n.qubits}
        candidates = [e for e in graph.edges if e[0] in active or e[1] in active]
        if not candidates:
            raise RoutingError("no candidate swaps touch the blocked front layer")

        best = None
        for u, v in candidates:
            layout.swap_physical(u, v)
            cost = _heuristic_cost(blocked, extended, layout, graph, extended_weight)
            layout.swap_physical(u, v)
            cost *= max(decay[u], decay[v])
            key = (cost, u, v)
            if best is None or key < best:
                best = key
        _, u, v = best
        layout.swap_physical(u, v)
        routed.append(RoutedGate(name="swap", params=(), qubits=(u, v), inserted=True))
        swap_count += 1
        if swap_count > swap_budget:
            raise RoutingError(f"routing exceeded the safety bound of {swap_budget} swaps")
        decay[u] *= decay_factor
        decay[v] *= decay_factor
        if swap_count % decay_reset == 0:
            decay = [1.0] * graph.n_physical

    return RoutingResult(routed, initial.copy(), layout, swap_count)


def _extended_set(dag, node_by_id, ready, limit: int) -> list:
    """Up to `limit` two-qubit gates reachable from the front layer."""
    out = []
    seen = set(ready)
    queue = deque(sorted(ready))
    while queue and len(out) < limit:
        node_id = queue.popleft()
        for succ in dag.successors[node_id]:
            if succ in seen:
                continue
            seen.add(succ)
            node = node_by_id[succ]
            if len(node.qubits) == 2:
                out.append(node)
                if len(out) >= limit:
                    break
            queue.append(succ)
    return out


def _heuristic_cost(front, extended, layout, graph, weight: float) -> float:
    dist = graph.distance
    cost = sum(dist[layout.phys(n.qubits[0])][layout.phys(n.qubits[1])] for n in front) / len(front)
    if extended:
        ext = sum(dist[layout.phys(n.qubits[0])][layout.phys(n.qubits[1])] for n in extended)
        cost += weight * ext / len(extended)
    return cost


def sabre_layout(
    dag: GateDag,
    graph: CouplingGraph,
    iterations: int = 3,
    seed: int = 0,
    n_logical: int | None = None,
) -> Layout:
    """Pick an initial layout by alternating forward and reverse routing.

    Starts from a seeded random permutation; each round routes the circuit
    forward, then routes the reversed circuit starting from the forward
    pass's final layout.  Returns the starting layout whose forward pass
    inserted the fewest swaps, stopping early on a zero-swap pass.
    """
    if n_logical is None:
        n_logical = max((q + 1 for n in dag.nodes for q in n.qubits), default=0)
    if n_logical > graph.n_physical:
        raise CapacityError(f"{n_logical} logical qubits exceed {graph.n_physical} physical")
    rng = np.random.default_rng(seed)
    perm = [int(p) for p in rng.permutation(graph.n_physical)[:n_logical]]
    current = Layout(perm, graph.n_physical)
    if not dag.nodes:
        return current

    reversed_dag = dag.reversed()
    best_layout = current.copy()
    best_swaps = None
    for _ in range(max(iterations, 1)):
        forward = sabre_swap(dag, current, graph)
        if best_swaps is None or forward.swap_count < best_swaps:
            best_swaps = forward.swap_count
            best_layout = current.copy()
        if forward.swap_count == 0:
            break
        backward = sabre_swap(reversed_dag, forward.final_layout, graph)
        current = backward.final_layout
    return best_layout


def route_program(
    program: QuantumProgram,
    graph: CouplingGraph,
    layout: Layout | None = None,
    seed: int = 0,
    native: NativeGateSet | None = None,
    sabre_iterations: int = 3,
) -> tuple[QuantumProgram, RoutingResult]:
    """Map a program onto a device and insert the swaps routing requires.

    Returns the rewritten program over physical qubit indices together with
    the routing report.  When the native gate set lacks swap, each inserted
    swap is expanded to 3 cx in the rewritten program (the report keeps both
    counts).  Barriers constrain routing order but are dropped from the
    routed program.
    """
    n_logical = program.n_qubits
    if n_logical > graph.n_physical:
        raise CapacityError(
            f"program uses {n_logical} qubits but the device has {graph.n_physical}"
        )
    dag = build_dag(program)
    if layout is None:
        layout = sabre_layout(dag, graph, iterations=sabre_iterations, seed=seed, n_logical=n_logical)
    elif len(layout.log_to_phys) < n_logical or layout.n_physical != graph.n_physical:
        raise RoutingError("layout does not cover the program and device")
    result = sabre_swap(dag, layout, graph)

    decompose_swaps = native is not None and "swap" not in native
    device = QRegister(register_id=0, size=graph.n_physical, name="device")
    refs = [QubitRef(register_id=0, index=p, logical_id=p) for p in range(graph.n_physical)]
    ops: list = [Qalloc(register=device)]
    swap_cx = 0
    for gate in result.routed_gates:
        qubits = tuple(refs[p] for p in gate.qubits)
        if gate.inserted and decompose_swaps:
            u, v = qubits
            ops.append(Inst(name="cx", params=(), qubits=(u, v)))
            ops.append(Inst(name="cx", params=(), qubits=(v, u)))
            ops.append(Inst(name="cx", params=(), qubits=(u, v)))
            swap_cx += 3
            continue
        inst = Inst(name=gate.name, params=gate.params, qubits=qubits, result=gate.result)
        if gate.condition is not None:
            creg_id, value = gate.condition
            ops.append(ConditionalRegion(creg_id=creg_id, value=value, body=inst))
        else:
            ops.append(inst)
    ops.append(Dealloc(register=device))
    result.swap_cx_count = swap_cx
    routed = QuantumProgram(registers=[device], cregs=list(program.cregs), ops=ops)
    return routed, result
