import numpy as np
import pytest

from mofkit import algebra as alg
from mofkit import instances
from mofkit import mof as mf
from mofkit.algebra import State, TensorSignature
from mofkit.errors import NotPositive
from mofkit.probmetric import DiscreteMeasure, ProbMetric, prob_metric, spectral_measure, verify_pm

import oracles


def test_from_atoms_merges_and_clamps():
    mu = DiscreteMeasure.from_atoms([(1.0, 0.25), (1.0 + 1e-12, 0.25), (-1e-13, 0.5)])
    assert mu.values.tolist() == pytest.approx([0.0, 1.0])
    assert mu.weights.tolist() == pytest.approx([0.5, 0.5])
    assert mu.mass() == pytest.approx(1.0)
    # negligible weights are dropped
    mu = DiscreteMeasure.from_atoms([(0.0, 1.0), (3.0, 1e-14)])
    assert mu.atoms == [(0.0, 1.0)]
    with pytest.raises(ValueError):
        DiscreteMeasure.from_atoms([(1.0, 0.0)])


def test_measure_summaries():
    mu = DiscreteMeasure.from_atoms([(1.0, 0.5), (2.0, 0.5)])
    assert mu.mean() == 1.5 and mu.moment(2) == 2.5 and mu.ess_sup() == 2.0
    assert mu.cdf(1.0) == 0.5 and mu.cdf(0.5) == 0.0
    assert mu.distance(DiscreteMeasure.dirac(1.0)) == 0.5
    assert mu.scaled(2.0).values.tolist() == [2.0, 4.0]
    assert DiscreteMeasure.dirac(0.0).is_dirac_zero(1e-12)


def test_uniform_state_on_diagonal_element():
    sig = TensorSignature((alg.signature([1, 1]), alg.signature([1])))
    a = alg.diag(sig, [2, 1])
    mu = State.maximally_mixed(sig)
    assert spectral_measure(a, mu).atoms == [(1.0, 0.5), (2.0, 0.5)]


def test_spectral_measure_matches_dense_oracle(rng):
    sig = alg.signature([2, 3])
    for _ in range(5):
        a = alg.random_psd(sig, rng)
        mu = alg.random_state(sig, rng)
        ours = {round(v, 8): w for v, w in spectral_measure(a, mu).atoms}
        ref = oracles.spectral_atoms_full(a.matrix, mu.rho)
        assert ours.keys() == ref.keys()
        for k in ref:
            assert abs(ours[k] - ref[k]) < 1e-10


def test_spectral_measure_rejects_non_positive():
    sig = alg.signature([1, 1])
    with pytest.raises(NotPositive):
        spectral_measure(alg.diag(sig, [1, -1]), State.maximally_mixed(sig))


def test_mean_is_state_value(rng):
    sig = alg.signature([2, 1])
    a, mu = alg.random_psd(sig, rng), alg.random_state(sig, rng)
    assert abs(spectral_measure(a, mu).mean() - mu(a).real) < 1e-12


def test_e2_prob_metric(e2):
    p = prob_metric(e2)
    assert p[("x0", "x1")].atoms == [(2.0, 1.0)]
    assert p[("x1", "x0")].atoms == [(2.0, 1.0)]
    assert p[("x0", "x0")].is_dirac_zero(1e-12)
    assert verify_pm(p).passed
    assert p.to_dict()["pairs"][1] == {"pair": ["x0", "x1"], "atoms": [[2.0, 1.0]]}


def test_scaling_scales_measures(e2):
    p, q = prob_metric(e2), prob_metric(mf.rescale(e2, 3.0))
    for k in p.table:
        assert np.allclose(q[k].values, 3 * p[k].values) and np.allclose(q[k].weights, p[k].weights)


def test_parallel_matches_serial():
    m = instances.make_instance("linear", 5).mof
    assert prob_metric(m).to_dict() == prob_metric(m, jobs=4).to_dict()


def test_hand_built_tables_fail_single_axioms():
    d = DiscreteMeasure.dirac
    table = {("a", "a"): d(0), ("b", "b"): d(0), ("c", "c"): d(0),
             ("a", "b"): d(1), ("b", "a"): d(1), ("b", "c"): d(1), ("c", "b"): d(1),
             ("a", "c"): d(3), ("c", "a"): d(3)}
    rep = verify_pm(ProbMetric("abc", table))
    assert rep.failed() == ["pm_triangle"]
    table[("a", "c")], table[("c", "a")] = d(2), d(1.5)
    rep = verify_pm(ProbMetric("abc", table))
    assert rep.failed() == ["pm_symmetry"]
    table[("c", "a")] = d(2)
    table[("a", "b")] = table[("b", "a")] = d(0)
    assert "pm_separation" in verify_pm(ProbMetric("abc", table)).failed()


def test_diagonal_measures_are_dirac_zero(all_instances):
    for inst in all_instances[::6]:
        p = prob_metric(inst.mof)
        for x in inst.mof.points:
            assert p[(x, x)].ess_sup() <= 1e-8 * max(1, inst.mof.scale())
