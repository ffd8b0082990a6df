import numpy as np
import pytest

from mofkit import algebra as alg
from mofkit import continuous as ct
from mofkit import instances
from mofkit import lipschitz as lp
from mofkit import mof as mf
from mofkit.errors import AllScalar, PartitionInvalid, TheoremViolation


def test_make_cover_uniform_weights():
    c = ct.make_cover("abc", [{"a", "b"}, {"b", "c"}])
    assert c.bumps[0] == {"a": 1.0, "b": 0.5}
    with pytest.raises(PartitionInvalid):
        ct.make_cover("abc", [{"a"}, {"b"}])
    with pytest.raises(PartitionInvalid):
        ct.make_cover("ab", [{"a"}, {"b"}], [{"a": 1.0}, {"a": 0.5, "b": 1.0}])
    with pytest.raises(PartitionInvalid):
        ct.make_cover("ab", [{"a", "b"}], [{"a": 0.7, "b": 1.0}])


def test_ball_cover_is_partition_of_unity():
    m = mf.build_staircase_example(4, 3)
    for r in (0.1, 0.5, 2.0):
        cov = ct.ball_cover(m, r)
        for x in m.points:
            assert abs(sum(h.get(x, 0.0) for h in cov.bumps) - 1) < 1e-12
    with pytest.raises(ValueError):
        ct.ball_cover(m, 0)


def test_glue_reproduces_global_field(rng):
    m = mf.build_staircase_example(4, 3)
    g = lp.random_commuting_field(m, rng)
    cov = ct.ball_cover(m, 0.5)
    res = ct.glue(cov, [g] * len(cov.sets), m, target=g)
    assert res.defect < 1e-10 and res.commutes


def test_glue_defect_bounded_by_local_defect(rng):
    m = mf.build_staircase_example(3, 2)
    g = lp.random_commuting_field(m, rng)
    cov = ct.ball_cover(m, 0.7)
    eps = 1e-3
    local = []
    for _ in cov.sets:
        noise = lp.random_commuting_field(m, rng)
        local.append(g + noise * (eps / noise.sup_norm()))
    res = ct.glue(cov, local, m, target=g, epsilon=eps)
    assert res.defect <= res.local_defect + 1e-12 and res.defect <= eps + 1e-12
    with pytest.raises(TheoremViolation):
        ct.glue(cov, local, m, target=g, epsilon=eps / 100)
    with pytest.raises(PartitionInvalid):
        ct.glue(cov, local[:-1] if len(local) > 1 else [], m)


def test_membership_is_commutation(e2, e2_identity, rng):
    assert ct.cstar_closure_membership(e2_identity)
    m = next(i.mof for i in instances.corpus(("quotient",)) if not i.mof.is_central())
    assert not ct.cstar_closure_membership(lp.random_field(m, rng))
    assert ct.cstar_closure_membership(lp.random_commuting_field(m, rng))


def test_norm_continuity(e2_identity, rng):
    rep = ct.norm_continuity_check(e2_identity)
    assert rep.passed and rep.worst_excess == 0.0
    m = instances.make_instance("linear", 2).mof
    assert ct.norm_continuity_check(lp.random_commuting_field(m, rng)).passed


def test_generated_words_span(e2, e2_identity):
    words = ct.generated_words([e2_identity])
    # the identity field separates all three underlying points: span is C^3
    assert len(words) == 3
    unreduced = ct.generated_words([e2_identity], reduce=False)
    assert len(unreduced) == 4
    assert ct.generated_words([]) == []


def test_best_local_approximant(e2, e2_identity):
    words = ct.generated_words([e2_identity])
    target = e2_identity @ e2_identity
    f, err = ct.best_local_approximant(target, words, set(e2.points))
    assert err < 1e-12
    assert all(np.allclose(f[x].matrix, target[x].matrix) for x in e2.points)


def test_dixmier_probe_central(e2, e2_identity):
    gens = ct.all_scalar_fields(e2) + [e2_identity]
    probe = ct.dixmier_probe(gens, e2)
    assert probe.passed and probe.n_words == 3
    assert all(p.locally_approximable and p.member for p in probe.probes)


def test_dixmier_probe_flags_non_commuting_probe(rng):
    m = next(i.mof for i in instances.corpus(("quotient",)) if not i.mof.is_central())
    gens = ct.all_scalar_fields(m)
    bad = lp.random_field(m, rng)
    probe = ct.dixmier_probe(gens + [bad], m)
    assert probe.unit_axiom and not probe.passed


def test_nontriviality(e2):
    cert = ct.nontriviality_certificate(e2)
    assert cert.member and cert.distance_to_scalars > 0.1
    with pytest.raises(AllScalar):
        ct.nontriviality_certificate(instances.make_instance("scalar", 1).mof)


def test_cover_to_dict():
    c = ct.make_cover("ab", [{"a", "b"}])
    assert c.to_dict() == {"sets": [["a", "b"]], "bumps": [{"a": 1.0, "b": 1.0}]}
