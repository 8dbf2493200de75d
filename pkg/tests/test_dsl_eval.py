"""Evaluator semantics: golden assignment tables and totality over the corpus.

Expected tables are frozen as closed-form index arithmetic obtained by
hand-applying the transformation semantics, independent of the evaluator.
"""

import itertools
from pathlib import Path

import pytest

from procmap.dsl import compile_mapper, eval_mapping, parse
from procmap.errors import EvalError, NoBinding
from procmap.spaces import MachineShape

CORPUS = Path(__file__).parent / "corpus"

GPU22 = MachineShape("GPU", 2, 2)
GPU24 = MachineShape("GPU", 2, 4)


def corpus(name: str):
    return parse((CORPUS / name).read_text())


def points(*extents):
    return itertools.product(*(range(e) for e in extents))


def table(program, func, ispace, machine):
    return {
        pt: eval_mapping(program, func, pt, ispace, machine)
        for pt in points(*ispace)
    }


def test_block2d_golden_point():
    program = corpus("block2d_full.mapper")
    assert eval_mapping(program, "block2d", (2, 3), (6, 6), GPU22) == (0, 1)


def test_explicit_block2d_matches_tuple_version():
    explicit = corpus("block2d_explicit.mapper")
    tupleform = corpus("block2d_full.mapper")
    assert eval_mapping(explicit, "block2d", (2, 3), (6, 6), GPU22) == (0, 1)
    for pt in points(6, 6):
        assert eval_mapping(explicit, "block2d", pt, (6, 6), GPU22) == \
            eval_mapping(tupleform, "block2d", pt, (6, 6), GPU22)


def test_block2d_identity_when_ispace_equals_machine_shape():
    program = corpus("block2d_full.mapper")
    for pt in points(2, 2):
        assert eval_mapping(program, "block2d", pt, (2, 2), GPU22) == pt


def test_linear_cyclic_mapper():
    program = corpus("linear_cyclic.mapper")
    assert eval_mapping(program, "linearCyclic", (0, 0), (4, 4), GPU22) == (0, 0)
    # column-major linearization dealt round-robin over the merged space:
    # (i + 4j) % 4 = i, then un-merging gives (i % 2, i // 2)
    for i, j in points(4, 4):
        assert eval_mapping(program, "linearCyclic", (i, j), (4, 4), GPU22) == (i % 2, i // 2)


# hand-applied transformation semantics for the catalog over a (4, 4) space
# on a 2-node x 2-GPU machine
CATALOG_EXPECTED = {
    "block2D": lambda i, j: (i // 2, j // 2),
    "block1D_x": lambda i, j: (j % 2, j // 2),
    "block1D_y": lambda i, j: (i % 2, i // 2),
    "cyclic2D": lambda i, j: (i % 2, j % 2),
    "cyclic1D_x": lambda i, j: (j % 2, j // 2),
    "cyclic1D_y": lambda i, j: (i % 2, i // 2),
    "blockcyclic": lambda i, j: ((i // 2) % 2, (j // 2) % 2),
}


@pytest.mark.parametrize("func", sorted(CATALOG_EXPECTED))
def test_distribution_catalog_tables(func):
    program = corpus("distributions.mapper")
    expected = {(i, j): CATALOG_EXPECTED[func](i, j) for i, j in points(4, 4)}
    assert table(program, func, (4, 4), GPU22) == expected


def test_four_split_hierarchical_3d():
    program = corpus("hier3d_splits.mapper")
    # node blocks x; GPUs block the y-z plane: (i//2, (j//2) + 2*(k//2))
    for i, j, k in points(4, 4, 4):
        node, proc = eval_mapping(program, "hier3d", (i, j, k), (4, 4, 4), GPU24)
        assert (node, proc) == (i // 2, j // 2 + 2 * (k // 2))


def test_matmul_hierarchical_block2d_on_2x2():
    program = corpus("matmul_mappers.mapper")
    got = table(program, "hierarchical_block2D", (4, 4), GPU22)
    # node dimension decomposes to (1, 2), GPU dimension to (2, 1):
    # blocks drive the node index, cyclic drives the GPU index
    assert got == {(i, j): (j // 2, i % 2) for i, j in points(4, 4)}
    counts = {}
    for proc in got.values():
        counts[proc] = counts.get(proc, 0) + 1
    assert counts == {(n, p): 4 for n in range(2) for p in range(2)}


def test_matmul_hierarchical_block2d_on_2x4():
    program = corpus("matmul_mappers.mapper")
    got = table(program, "hierarchical_block2D", (4, 4), GPU24)
    assert got == {(i, j): (j // 2, i % 2 + 2 * (j % 2)) for i, j in points(4, 4)}


def test_matmul_hierarchical_block3d_on_2x4():
    program = corpus("matmul_mappers.mapper")
    got = table(program, "hierarchical_block3D", (4, 4, 4), GPU24)
    expected = {
        (i, j, k): (k // 2, i % 2 + 2 * (j % 2)) for i, j, k in points(4, 4, 4)
    }
    assert got == expected


def test_matmul_linearize_cyclic():
    program = corpus("matmul_mappers.mapper")
    for i, j, k in points(2, 2, 2):
        lin = i + 2 * j + 4 * k
        assert eval_mapping(program, "linearize_cyclic", (i, j, k), (2, 2, 2), GPU24) \
            == (lin % 2, (lin // 2) % 4)


def test_matmul_special_linearize3d():
    program = corpus("matmul_mappers.mapper")
    # node dim 2 decomposes over (1, 1, 1) into (1, 1, 2): gx = 2, gy = 1
    for i, j, k in points(3, 3, 3):
        lin = i + 2 * j + 2 * k
        assert eval_mapping(program, "special_linearize3D", (i, j, k), (3, 3, 3), GPU24) \
            == (lin % 2, 0)


def test_matmul_conditional_linearize3d():
    program = corpus("matmul_mappers.mapper")
    # grid_size = max(ispace[0], ispace[2]) = 3
    for i, j, k in points(2, 1, 3):
        lin = i + 3 * j + 9 * k
        assert eval_mapping(program, "conditional_linearize3D", (i, j, k), (2, 1, 3), GPU22) \
            == (lin % 2, 0)
    # the other ternary branch
    for i, j, k in points(3, 1, 2):
        lin = i + 3 * j + 9 * k
        assert eval_mapping(program, "conditional_linearize3D", (i, j, k), (3, 1, 2), GPU22) \
            == (lin % 2, 0)


def test_corpus_totality():
    cases = [
        ("block2d_full.mapper", "block2d", (6, 6), GPU22),
        ("block2d_explicit.mapper", "block2d", (6, 6), GPU22),
        ("linear_cyclic.mapper", "linearCyclic", (5, 3), GPU22),
        ("hier3d_splits.mapper", "hier3d", (4, 4, 4), GPU24),
        ("distributions.mapper", "block2D", (4, 4), GPU22),
        ("matmul_mappers.mapper", "hierarchical_block3D", (4, 4, 4), GPU24),
        ("matmul_mappers.mapper", "hierarchical_block2D", (4, 4), GPU24),
        ("matmul_mappers.mapper", "linearize_cyclic", (3, 3, 3), GPU24),
        ("matmul_mappers.mapper", "special_linearize3D", (3, 3, 3), GPU24),
        ("matmul_mappers.mapper", "conditional_linearize3D", (2, 1, 3), GPU24),
    ]
    for name, func, ispace, machine in cases:
        program = corpus(name)
        for pt in points(*ispace):
            node, proc = eval_mapping(program, func, pt, ispace, machine)
            assert 0 <= node < machine.nodes
            assert 0 <= proc < machine.procs_per_node


def test_compile_mapper_matches_eval_and_caches():
    program = corpus("matmul_mappers.mapper")
    fn = compile_mapper(program, "cannon_mm", GPU22)
    for ispace in [(4, 4), (6, 6)]:
        for pt in points(*ispace):
            assert fn(pt, ispace) == eval_mapping(
                program, "hierarchical_block2D", pt, ispace, GPU22
            )
    assert set(fn._prefix_cache) == {(4, 4), (6, 6)}


def test_compile_mapper_no_binding():
    program = corpus("block2d_full.mapper")
    with pytest.raises(NoBinding):
        compile_mapper(program, "unbound_task", GPU22)


def test_splat_law():
    program = parse(
        "m = Machine(GPU)\n"
        "def direct(Tuple p, Tuple s):\n"
        "    return m[p[0], p[1]]\n"
        "def splatted(Tuple p, Tuple s):\n"
        "    return m[*p]\n"
        "def whole(Tuple p, Tuple s):\n"
        "    return m[p]\n"
    )
    for pt in points(2, 2):
        results = {
            eval_mapping(program, f, pt, (2, 2), GPU22)
            for f in ("direct", "splatted", "whole")
        }
        assert len(results) == 1


def test_eval_errors():
    program = parse(
        "m = Machine(GPU)\n"
        "def rank_mismatch(Tuple p, Tuple s):\n"
        "    return m[*(p / (1, 2, 3))]\n"
        "def div_zero(Tuple p, Tuple s):\n"
        "    return m[p[0] / 0, 0]\n"
        "def out_of_range(Tuple p, Tuple s):\n"
        "    return m[p[0] + 9, 0]\n"
        "def not_a_proc(Tuple p, Tuple s):\n"
        "    return p\n"
        "def bad_ternary(Tuple p, Tuple s):\n"
        "    x = s ? 1 : 0\n"
        "    return m[0, 0]\n"
    )
    for func in ("rank_mismatch", "div_zero", "out_of_range", "not_a_proc", "bad_ternary"):
        with pytest.raises(EvalError):
            eval_mapping(program, func, (0, 0), (2, 2), GPU22)


def test_machine_kind_mismatch():
    program = corpus("block2d_full.mapper")
    with pytest.raises(EvalError):
        eval_mapping(program, "block2d", (0, 0), (2, 2), MachineShape("CPU", 2, 2))


def test_recursion_guard():
    program = parse(
        "m = Machine(GPU)\n"
        "def loop(Tuple p, Tuple s):\n"
        "    return loop(p, s)\n"
    )
    with pytest.raises(EvalError):
        eval_mapping(program, "loop", (0, 0), (2, 2), GPU22)


def test_compile_mapper_reassignment_taint():
    # reassignments crossing the point-dependent boundary must not be
    # hoisted into the per-ispace prefix
    program = parse(
        "m = Machine(GPU)\n"
        "IndexTaskMap a free_then_tainted\n"
        "IndexTaskMap b tainted_then_free\n"
        "def free_then_tainted(Tuple p, Tuple s):\n"
        "    x = s[0]\n"
        "    x = x + p[0]\n"
        "    y = s[1]\n"
        "    return m[(x + y) % 2, 0]\n"
        "def tainted_then_free(Tuple p, Tuple s):\n"
        "    x = p[0]\n"
        "    x = s[0] - 1\n"
        "    return m[x % 2, p[1] % 2]\n"
    )
    for task, func in [("a", "free_then_tainted"), ("b", "tainted_then_free")]:
        fn = compile_mapper(program, task, GPU22)
        for ispace in [(2, 2), (4, 4)]:
            for pt in points(*ispace):
                assert fn(pt, ispace) == eval_mapping(program, func, pt, ispace, GPU22)
