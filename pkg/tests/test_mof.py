import itertools

import numpy as np
import pytest

from mofkit import algebra as alg
from mofkit import instances
from mofkit import mof as mf
from mofkit.algebra import State, TensorSignature
from mofkit.errors import (
    DimensionMismatch,
    InvalidPartition,
    MetricAxiomViolation,
    NormBoundExceeded,
    NotCentral,
    StateFamilyMismatch,
    StructureViolation,
)

import oracles


def test_e2_values(e2):
    assert e2.points == ("x0", "x1")
    assert e2.bundle["x0"] == alg.signature([1, 1]) and e2.bundle["x1"] == alg.signature([1])
    assert np.allclose(e2.D("x0", "x1").matrix, np.diag([2, 1]))
    assert np.allclose(e2.D("x1", "x0").matrix, np.diag([2, 1]))
    assert np.allclose(e2.D("x0", "x0").matrix, np.diag([0, 1, 1, 0]))
    assert np.allclose(e2.D("x1", "x1").matrix, 0)
    assert e2.is_central() and not e2.is_scalar_valued()


def test_e2_passes_axioms(e2):
    rep = mf.verify_mof(e2)
    assert rep.passed, str(rep)
    assert len(rep.checks) == 4


def test_e2_induced_metrics(e2):
    assert mf.induced_metric_states(e2).values.tolist() == [[0, 2], [2, 0]]
    assert mf.induced_metric_norm(e2).values.tolist() == [[0, 2], [2, 0]]
    uniform = {"x0": State.maximally_mixed(e2.bundle["x0"]), "x1": State.maximally_mixed(e2.bundle["x1"])}
    with pytest.raises(MetricAxiomViolation):
        # uniform state does not annihilate D(x0, x0)
        mf.induced_metric_states(e2, uniform)


def test_triangle_matches_dense_oracle(all_instances):
    for inst in all_instances[::7]:
        m = inst.mof
        for t in itertools.islice(itertools.product(m.points, repeat=3), 30):
            ours = mf.triangle_min_eigenvalue(m, *t)
            ref = oracles.triangle_lambda_full(m, *t)
            assert abs(ours - ref) <= 1e-10 * m.scale(), (inst.label, t)


@pytest.mark.parametrize("axiom", ["(i)", "(ii)", "(iii)", "(iv)"])
def test_negative_controls_fail_one_axiom(e2, axiom):
    rep = mf.verify_mof(oracles.negative_controls(e2)[axiom])
    assert [name.split()[0] for name in rep.failed()] == [axiom], str(rep)


def test_corrupted_triangle_reports_worst_triple(e2):
    rep = mf.verify_mof(oracles.corrupted(e2, ("x0", "x1"), [2, 0.1]))
    c = rep.checks[3]
    assert not c.passed and c.where == ("x0", "x0", "x1")
    assert abs(c.worst - 0.45) < 1e-12


def test_parallel_verification_agrees(e2):
    m = instances.make_instance("pointed", 2).mof
    assert mf.verify_mof(m).to_dict() == mf.verify_mof(m, jobs=3).to_dict()


def test_construction_errors(e2):
    sig = e2.bundle
    D = {k: v for k, v in e2.stored_items()}
    states = e2.metric_states
    missing = dict(D)
    del missing[("x0", "x1")]
    with pytest.raises(StructureViolation):
        mf.MofSpace(e2.points, sig, missing, states)
    with pytest.raises(StructureViolation):
        mf.MofSpace(e2.points, sig, D, {"x0": states["x0"]})
    bad = dict(D)
    bad[("x0", "x1")] = alg.unit(TensorSignature((sig["x0"], sig["x0"])))
    with pytest.raises(DimensionMismatch):
        mf.MofSpace(e2.points, sig, bad, states)
    with pytest.raises(StructureViolation):
        mf.MofSpace(e2.points, sig, D, states, base_point="nowhere")
    both = dict(D)
    both[("x1", "x0")] = e2.D("x1", "x0")
    with pytest.raises(StructureViolation):
        mf.MofSpace(e2.points, sig, both, states)


def test_reverse_orientation_is_flipped(e2):
    D = {("x1", "x0"): e2.D("x1", "x0"), ("x0", "x0"): e2.D("x0", "x0"), ("x1", "x1"): e2.D("x1", "x1")}
    m = mf.MofSpace(e2.points, e2.bundle, D, e2.metric_states)
    assert np.allclose(m.D("x0", "x1").matrix, e2.D("x0", "x1").matrix)


def test_metric_table_axioms():
    t = mf.MetricTable(["a", "b", "c"], [[0, 1, 3], [1, 0, 1], [3, 1, 0]])
    rep = t.axioms()
    assert not rep.passed and rep.failed() == ["triangle"] or "triangle" in " ".join(rep.failed())
    ok = mf.MetricTable.from_function(["a", "b"], lambda x, y: 0.0 if x == y else 2.0)
    assert ok.axioms().passed
    assert ok.lipschitz_constant({"a": 0, "b": 1}) == 0.5


def test_scalar_mof():
    m = mf.scalar_mof(["a", "b", "c"], alg.signature([2, 1]), lambda x, y: 0.0 if x == y else 1.0)
    assert mf.verify_mof(m).passed and m.is_scalar_valued()
    with pytest.raises(MetricAxiomViolation):
        mf.scalar_mof(["a", "b"], alg.signature([1]), lambda x, y: 0.0)


def test_combinations(e2):
    two = mf.scalar_mof(e2.points, e2.bundle, lambda x, y: 0.0 if x == y else 1.0)
    lin = mf.combine_linear(e2, two, 2.0)
    assert np.allclose(lin.D("x0", "x1").matrix, np.diag([5, 3]))
    assert mf.verify_mof(lin).passed
    p2 = mf.combine_p(e2, two, 2.0)
    assert np.allclose(p2.D("x0", "x1").matrix, np.diag([np.sqrt(5), np.sqrt(2)]))
    assert mf.verify_mof(p2).passed
    # p = 1 is the plain sum
    assert np.allclose(mf.combine_p(e2, two, 1.0).D("x0", "x1").matrix, mf.combine_linear(e2, two).D("x0", "x1").matrix)
    with pytest.raises(ValueError):
        mf.combine_p(e2, two, 0.5)


def test_combination_rejects_bad_state_family():
    m1 = oracles.two_point_scalar()
    m2 = m1.replace(D={("p", "p"): alg.diag(m1.D("p", "p").signature, [0, 0, 0, 1])})
    with pytest.raises(StateFamilyMismatch):
        mf.combine_linear(m1, m2)


def test_combine_p_needs_central():
    m = instances.make_instance("quotient", 1).mof
    if m.is_central():
        pytest.skip("instance happens to be central")
    with pytest.raises(NotCentral):
        mf.combine_p(m, m, 2.0)


def test_rescale(e2):
    r = mf.rescale(e2, 0.5)
    assert np.allclose(r.D("x0", "x1").matrix, np.diag([1, 0.5]))
    with pytest.raises(ValueError):
        mf.rescale(e2, 0)


def test_product(e2):
    two = oracles.two_point_scalar()
    P = mf.product_mof(e2, two)
    assert len(P.points) == 4 and mf.verify_mof(P).passed
    x, y = ("x0", "p"), ("x1", "q")
    # (D x R)((x0,p),(x1,q)) lives on (A_x0 ⊗ B_p) ⊗ (A_x1 ⊗ B_q); entries are D + R
    vals = np.real(np.diag(P.D(x, y).matrix))
    assert sorted(set(np.round(vals, 12))) == [2.0, 3.0]


def test_pointed_extension(e2):
    with pytest.raises(NormBoundExceeded):
        mf.pointed_extension(mf.rescale(e2, 2.0))
    plus = mf.pointed_extension(e2, alg.signature([2]))
    assert plus.base_point == mf.INFINITY
    assert np.allclose(plus.D("x0", mf.INFINITY).matrix, np.eye(4))
    assert mf.verify_mof(plus).passed


def test_quotient_embeddings():
    Y = [0.0, 1.0, 3.0]
    rho = lambda a, b: abs(a - b)
    diag = mf.build_quotient_example(Y, rho, [[0.0, 1.0], [3.0]], {"x0": alg.signature([2])})
    assert not diag.is_central() and mf.verify_mof(diag).passed
    central = mf.build_quotient_example(Y, rho, [[0.0, 1.0], [3.0]], {"x0": alg.signature([2, 1])})
    assert central.is_central() and mf.verify_mof(central).passed
    assert np.allclose(np.diag(central.D("x0", "x1").matrix).real, [3, 3, 2])
    with pytest.raises(InvalidPartition):
        mf.build_quotient_example(Y, rho, [[0.0], [3.0]])
    with pytest.raises(InvalidPartition):
        mf.build_quotient_example(Y, rho, [[0.0, 1.0], [1.0, 3.0]])
    with pytest.raises(InvalidPartition):
        mf.build_quotient_example(Y, rho, [[0.0, 1.0], [3.0]], {"x0": alg.signature([3])})


def test_staircase():
    m = mf.build_staircase_example(2, 2)
    assert m.points == ("1", "2", "inf")
    assert m.bundle["1"].total_dim == 3 and m.bundle["inf"].total_dim == 1
    assert np.allclose(np.diag(m.D("1", "inf").matrix).real, [1, np.sqrt(1.25), np.sqrt(2)])
    assert mf.verify_mof(m).passed


def test_all_builders_produce_twenty(all_instances):
    kinds = [i.kind for i in all_instances]
    for k in instances.BUILDERS:
        assert kinds.count(k) == 20
    assert any(not i.mof.is_central() and not i.mof.commutative() for i in all_instances)
