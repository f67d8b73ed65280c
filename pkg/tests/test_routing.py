"""Coupling graphs, layouts, SABRE swap insertion, and full-program routing."""

import json

import numpy as np
import pytest

from qcc.errors import CapacityError, CouplingFormatError, RoutingError
from qcc.ir import Barrier, ConditionalRegion, Inst, build_dag, gate_counts
from qcc.optimizer import NativeGateSet, optimize
from qcc.routing import (
    CouplingGraph,
    Layout,
    load_coupling_graph,
    route_program,
    sabre_layout,
    sabre_swap,
)
from qcc.simulator import equiv_up_to_global_phase, permute_qubits, simulate

from conftest import qasm_program

GHZ3 = (
    'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[3];\n'
    "h q[0];\ncx q[0],q[1];\ncx q[1],q[2];\n"
)


def linear(n):
    return CouplingGraph.from_edges(n, [[i, i + 1] for i in range(n - 1)])


# ------------------------------------------------------------- graphs


def test_linear3_distances():
    g = linear(3)
    assert g.distance == ((0, 1, 2), (1, 0, 1), (2, 1, 0))
    assert g.edges == [(0, 1), (1, 2)]
    assert g.adjacent(0, 1) and g.adjacent(2, 1)
    assert not g.adjacent(0, 2)


def test_complete_graph_distances():
    k4 = CouplingGraph.from_edges(4, [[i, j] for i in range(4) for j in range(i + 1, 4)])
    for u in range(4):
        for v in range(4):
            assert k4.distance[u][v] == (0 if u == v else 1)


def test_tshape_distance():
    # 0-1-2 with 1-3-4 hanging off the middle
    g = CouplingGraph.from_edges(5, [[0, 1], [1, 2], [1, 3], [3, 4]])
    assert g.distance[0][4] == 3
    assert g.distance[2][4] == 3
    assert g.distance[0][2] == 2


def _floyd_warshall(n, edges):
    inf = n + 10
    d = [[0 if i == j else inf for j in range(n)] for i in range(n)]
    for u, v in edges:
        d[u][v] = d[v][u] = 1
    for k in range(n):
        for i in range(n):
            for j in range(n):
                d[i][j] = min(d[i][j], d[i][k] + d[k][j])
    return d


def test_distances_match_floyd_warshall(topologies):
    for g in topologies.values():
        ref = _floyd_warshall(g.n_physical, g.edges)
        for u in range(g.n_physical):
            for v in range(g.n_physical):
                assert g.distance[u][v] == ref[u][v]


def test_graph_format_errors():
    with pytest.raises(CouplingFormatError):
        CouplingGraph.from_edges(2, [[0, 0]])  # self loop
    with pytest.raises(CouplingFormatError):
        CouplingGraph.from_edges(2, [[0, 5]])  # out of range
    with pytest.raises(CouplingFormatError):
        CouplingGraph.from_edges(0, [])


def test_disconnected_graph_rejected():
    with pytest.raises(RoutingError, match="disconnected"):
        CouplingGraph.from_edges(4, [[0, 1], [2, 3]])


def test_load_coupling_graph(tmp_path):
    path = tmp_path / "device.json"
    path.write_text(json.dumps({"n_qubits": 3, "edges": [[0, 1], [1, 2]]}))
    g = load_coupling_graph(path)
    assert g.n_physical == 3
    assert g.distance[0][2] == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"edges": [[0, 1]]}))
    with pytest.raises(CouplingFormatError):
        load_coupling_graph(bad)


# ------------------------------------------------------------- layouts


def test_identity_layout():
    lay = Layout.identity(2, 4)
    assert lay.log_to_phys == [0, 1]
    assert lay.phys_to_log == [0, 1, None, None]
    assert lay.phys(1) == 1


def test_layout_rejects_duplicates():
    with pytest.raises(RoutingError):
        Layout([0, 0], 3)
    with pytest.raises(RoutingError):
        Layout([0, 5], 3)


def test_swap_physical_updates_both_maps():
    lay = Layout([0, 1, 2], 3)
    lay.swap_physical(0, 2)
    assert lay.log_to_phys == [2, 1, 0]
    assert lay.phys_to_log == [2, 1, 0]
    # swapping a spare slot works too
    lay2 = Layout([1], 3)
    lay2.swap_physical(1, 2)
    assert lay2.log_to_phys == [2]
    assert lay2.phys_to_log == [None, None, 0]


def test_layout_copy_is_independent():
    lay = Layout([0, 1], 2)
    dup = lay.copy()
    dup.swap_physical(0, 1)
    assert lay.log_to_phys == [0, 1]


# ------------------------------------------------------------- sabre_swap


def test_ghz_on_linear_needs_no_swaps():
    dag = build_dag(qasm_program(GHZ3))
    res = sabre_swap(dag, Layout.identity(3, 3), linear(3))
    assert res.swap_count == 0
    assert [g.name for g in res.routed_gates] == ["h", "cx", "cx"]
    assert res.final_layout.log_to_phys == [0, 1, 2]


def test_distant_cx_needs_exactly_one_swap():
    src = 'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[3];\ncx q[0],q[2];\n'
    dag = build_dag(qasm_program(src))
    res = sabre_swap(dag, Layout.identity(3, 3), linear(3))
    assert res.swap_count == 1
    swap, cx = res.routed_gates
    assert swap.name == "swap" and swap.inserted
    assert cx.name == "cx" and not cx.inserted
    assert linear(3).adjacent(*cx.qubits)


def test_reversed_ghz_also_zero_swaps():
    dag = build_dag(qasm_program(GHZ3)).reversed()
    res = sabre_swap(dag, Layout.identity(3, 3), linear(3))
    assert res.swap_count == 0


def test_empty_dag_routes_to_nothing():
    dag = build_dag(qasm_program("OPENQASM 2.0;\nqreg q[2];\n"))
    res = sabre_swap(dag, Layout.identity(2, 2), linear(2))
    assert res.routed_gates == []
    assert res.swap_count == 0
    assert res.final_layout.log_to_phys == res.initial_layout.log_to_phys


def test_sabre_swap_is_deterministic(corpus_programs, topologies):
    prog = next(p for p, n in corpus_programs if n == 5)
    flat = optimize(prog, 1)
    dag = build_dag(flat)
    reference = None
    for _ in range(10):
        res = sabre_swap(dag, Layout.identity(5, 5), topologies["linear5"], seed=7)
        snapshot = (
            res.swap_count,
            [(g.name, g.qubits, g.inserted) for g in res.routed_gates],
            res.final_layout.log_to_phys,
        )
        if reference is None:
            reference = snapshot
        assert snapshot == reference


def test_all_output_two_qubit_gates_on_edges(corpus_programs, topologies):
    graph = topologies["tshape5"]
    checked = 0
    for prog, n in corpus_programs:
        if checked >= 15:
            break
        if n > 5:
            continue
        checked += 1
        flat = optimize(prog, 1)
        dag = build_dag(flat)
        res = sabre_swap(dag, Layout.identity(n, 5), graph)
        for g in res.routed_gates:
            if len(g.qubits) == 2:
                assert graph.adjacent(*g.qubits)


# ------------------------------------------------------------- sabre_layout


def test_layout_finds_zero_swap_embedding():
    dag = build_dag(qasm_program(GHZ3))
    lay = sabre_layout(dag, linear(3), seed=42)
    assert sabre_swap(dag, lay, linear(3)).swap_count == 0


def test_layout_deterministic_for_fixed_seed():
    dag = build_dag(qasm_program(GHZ3))
    layouts = {tuple(sabre_layout(dag, linear(3), seed=42).log_to_phys) for _ in range(10)}
    assert len(layouts) == 1


def test_layout_seeds_differ():
    src = (
        'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[4];\n'
        "cx q[0],q[3];\ncx q[1],q[2];\ncx q[0],q[1];\n"
    )
    dag = build_dag(qasm_program(src))
    seen = {
        tuple(sabre_layout(dag, linear(4), seed=s).log_to_phys) for s in range(12)
    }
    assert len(seen) > 1  # different seeds explore different permutations


def test_layout_capacity_error():
    dag = build_dag(qasm_program('OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[4];\nh q[0];\n'))
    with pytest.raises(CapacityError):
        sabre_layout(dag, linear(3), n_logical=4)


# ------------------------------------------------------------- route_program


def routing_permutation(result, n_physical):
    """Logical-to-physical assignment extended with spare slots, ascending."""
    perm = [result.final_layout.phys(l) for l in range(len(result.final_layout.log_to_phys))]
    free = sorted(set(range(n_physical)) - set(perm))
    return perm + free


def test_route_program_preserves_semantics(corpus_programs, topologies):
    graph = topologies["ring5"]
    checked = 0
    for prog, n in corpus_programs:
        if checked >= 12:
            break
        checked += 1
        flat = optimize(prog, 1)
        routed, result = route_program(flat, graph, seed=3)
        expected = permute_qubits(simulate(prog, n_qubits=5), routing_permutation(result, 5))
        assert equiv_up_to_global_phase(expected, simulate(routed))


def test_route_program_forced_identity_layout():
    src = 'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[3];\nh q[0];\ncx q[0],q[2];\n'
    prog = qasm_program(src)
    routed, result = route_program(prog, linear(3), layout=Layout.identity(3, 3))
    assert result.swap_count == 1
    expected = permute_qubits(simulate(prog), routing_permutation(result, 3))
    assert equiv_up_to_global_phase(expected, simulate(routed))


def test_route_program_gate_multiset_preserved():
    prog = optimize(qasm_program(GHZ3), 1)
    routed, result = route_program(prog, linear(3), seed=0)
    original = sorted(op.name for op in prog.ops if isinstance(op, Inst))
    output = [op for op in routed.ops if isinstance(op, Inst)]
    kept = sorted(op.name for op in output if op.name != "swap")
    assert kept == original or sorted(op.name for op in output) == original


def test_route_program_too_many_qubits():
    prog = qasm_program('OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[4];\nh q[0];\n')
    with pytest.raises(CapacityError):
        route_program(prog, linear(3))


def test_route_program_rejects_three_qubit_gates():
    prog = qasm_program(
        'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[3];\nccx q[0],q[1],q[2];\n'
    )
    with pytest.raises(RoutingError, match="decompose"):
        route_program(prog, linear(3))


def test_route_program_swap_decomposition_without_native_swap():
    src = 'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[3];\ncx q[0],q[2];\n'
    prog = qasm_program(src)
    native = NativeGateSet.from_names(["rz", "ry", "rx", "cx", "h"])
    routed, result = route_program(
        prog, linear(3), layout=Layout.identity(3, 3), native=native
    )
    assert result.swap_count == 1
    assert result.swap_cx_count == 3
    names = [op.name for op in routed.ops if isinstance(op, Inst)]
    assert names == ["cx", "cx", "cx", "cx"]  # 3 for the swap, then the gate
    expected = permute_qubits(simulate(prog), routing_permutation(result, 3))
    assert equiv_up_to_global_phase(expected, simulate(routed))


def test_route_program_drops_barriers():
    src = (
        'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[2];\n'
        "h q[0];\nbarrier q;\nh q[1];\n"
    )
    routed, _ = route_program(qasm_program(src), linear(2))
    assert not any(isinstance(op, Barrier) for op in routed.ops)


def test_route_program_keeps_measures_and_conditionals():
    src = (
        'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[2];\ncreg c[1];\n'
        "h q[0];\nmeasure q[0] -> c[0];\nif (c == 1) x q[1];\n"
    )
    routed, _ = route_program(qasm_program(src), linear(2))
    insts = [op for op in routed.ops if isinstance(op, Inst)]
    regions = [op for op in routed.ops if isinstance(op, ConditionalRegion)]
    assert any(op.name == "measure" and op.result is not None for op in insts)
    assert len(regions) == 1


def test_route_program_output_register_is_device_sized(topologies):
    prog = qasm_program(GHZ3)
    routed, _ = route_program(prog, topologies["linear5"], seed=1)
    assert len(routed.registers) == 1
    assert routed.registers[0].size == 5
    counts = gate_counts(routed)
    assert counts["total_gates"] >= 3
