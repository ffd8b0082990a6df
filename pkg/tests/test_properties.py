import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from mofkit import algebra as alg
from mofkit import instances
from mofkit import lipschitz as lp
from mofkit import mof as mf
from mofkit.probmetric import DiscreteMeasure

KINDS = st.sampled_from(instances.BUILDERS)
SEEDS = st.integers(0, 10_000)


@settings(max_examples=25, deadline=None)
@given(KINDS, SEEDS)
def test_builders_always_give_mof_spaces(kind, seed):
    rep = mf.verify_mof(instances.make_instance(kind, seed).mof)
    assert rep.passed, str(rep)


@settings(max_examples=25, deadline=None)
@given(KINDS, SEEDS, st.integers(0, 2**32 - 1))
def test_commuting_field_identities(kind, seed, draw):
    m = instances.make_instance(kind, seed).mof
    rng = np.random.default_rng(draw)
    f, g = lp.random_commuting_field(m, rng), lp.random_commuting_field(m, rng)
    nf, ng = lp.lip_seminorm(f).seminorm, lp.lip_seminorm(g).seminorm
    assert abs(lp.lip_seminorm_ordered(f) - nf) <= 1e-8 * max(1, nf)
    # Leibniz-type bound
    nfg = lp.lip_seminorm(f @ g).seminorm
    assert nfg <= nf * g.sup_norm() + f.sup_norm() * ng + 1e-8 * max(1, nfg)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 10), st.floats(0.01, 1)), min_size=1, max_size=8))
def test_measures_are_normalised_and_sorted(atoms):
    mu = DiscreteMeasure.from_atoms(atoms)
    assert abs(mu.mass() - 1) < 1e-12
    assert np.all(np.diff(mu.values) > 0)
    assert mu.values.min() >= 0


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(1, 3), min_size=1, max_size=3), st.integers(0, 2**32 - 1))
def test_operator_norm_is_submultiplicative(blocks, draw):
    rng = np.random.default_rng(draw)
    sig = alg.signature(blocks)
    a, b = alg.random_element(sig, rng), alg.random_element(sig, rng)
    assert alg.operator_norm(a @ b) <= alg.operator_norm(a) * alg.operator_norm(b) * (1 + 1e-12)
