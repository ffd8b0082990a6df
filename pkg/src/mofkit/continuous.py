"""The algebra C(D) at finite resolution, partition-of-unity gluing and Dixmier-style probes.

On a finite point set the uniform closure of Lip(D) is Lip(D) itself, which is
the set of fields commuting with D. Membership therefore reduces to a
commutation test.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import algebra as alg
from .errors import PartitionInvalid, TheoremViolation
from .lipschitz import (
    OperatorField,
    commutation_defect,
    commutes_with_D,
    find_nonscalar_witness,
    lip_seminorm,
)
from .mof import MetricTable, MofSpace, induced_metric_norm


@dataclass(frozen=True)
class Cover:
    """Open sets with a subordinate partition of unity ``h_i``."""

    sets: tuple        # tuple of frozensets of points
    bumps: tuple       # tuple of dicts point -> weight

    def validate(self, points, tol: float = alg.DEFAULT_TOL.eq) -> "Cover":
        if len(self.sets) != len(self.bumps) or not self.sets:
            raise PartitionInvalid("cover needs one bump per set and at least one set")
        for x in points:
            total = 0.0
            for U, h in zip(self.sets, self.bumps):
                v = float(h.get(x, 0.0))
                if v < -tol:
                    raise PartitionInvalid(f"negative bump value at {x!r}")
                if x not in U and abs(v) > tol:
                    raise PartitionInvalid(f"bump is nonzero at {x!r} outside its set")
                total += v
            if abs(total - 1.0) > tol:
                raise PartitionInvalid(f"bumps sum to {total:.12g} at {x!r}")
        return self

    def to_dict(self) -> dict:
        return {"sets": [sorted(map(str, U)) for U in self.sets],
                "bumps": [{str(k): v for k, v in h.items()} for h in self.bumps]}


def make_cover(points, sets: Sequence, bumps: Sequence | None = None,
               tol: float = alg.DEFAULT_TOL.eq) -> Cover:
    """Build and validate a cover; without bumps, weights are uniform over the sets containing x."""
    sets = tuple(frozenset(U) for U in sets)
    if bumps is None:
        count = {x: sum(x in U for U in sets) for x in points}
        if any(c == 0 for c in count.values()):
            raise PartitionInvalid("sets do not cover every point")
        bumps = [{x: 1.0 / count[x] for x in U} for U in sets]
    return Cover(sets, tuple(dict(h) for h in bumps)).validate(points, tol)


def ball_cover(m: MofSpace, radius: float, metric: MetricTable | None = None) -> Cover:
    """Open balls of ``D^||.||`` around a greedy net, with normalised tent functions."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    d = induced_metric_norm(m, check=False) if metric is None else metric
    centers = []
    for x in m.points:
        if all(d[(x, c)] >= radius for c in centers):
            centers.append(x)
    raw = [{x: max(0.0, 1.0 - d[(x, c)] / radius) for x in m.points} for c in centers]
    sets = tuple(frozenset(x for x in m.points if d[(x, c)] < radius) for c in centers)
    bumps = []
    for h in raw:
        bumps.append({x: h[x] / sum(r[x] for r in raw) for x in m.points if h[x] > 0})
    return Cover(sets, tuple(bumps)).validate(m.points, m.tol.eq)


def cstar_closure_membership(g: OperatorField, m: MofSpace | None = None) -> bool:
    """Membership in C(D): finite seminorm and commutation with D."""
    return bool(np.isfinite(lip_seminorm(g).seminorm)) and commutes_with_D(g)


@dataclass(frozen=True)
class NormContinuityReport:
    seminorm: float
    worst_excess: float
    where: tuple | None
    commutes: bool
    passed: bool

    def to_dict(self) -> dict:
        return {"seminorm": self.seminorm, "worst_excess": self.worst_excess,
                "where": None if self.where is None else [str(p) for p in self.where],
                "commutes": self.commutes, "passed": self.passed}


def norm_continuity_check(f: OperatorField, metric: MetricTable | None = None) -> NormContinuityReport:
    """``| ||f(x)|| - ||f(y)|| | <= ||f||_D D^||.||(x, y)`` on every pair."""
    m = f.mof
    d = induced_metric_norm(m, check=False) if metric is None else metric
    rep = lip_seminorm(f)
    norms = {x: alg.operator_norm(f[x]) for x in m.points}
    worst, where = 0.0, None
    for x, y in m.pairs():
        excess = abs(norms[x] - norms[y]) - rep.seminorm * d[(x, y)]
        rel = excess / max(1.0, norms[x], norms[y])
        if where is None or rel > worst:
            worst, where = rel, (x, y)
    worst = max(worst, 0.0)
    return NormContinuityReport(rep.seminorm, worst, where, rep.commutes_with_D,
                                rep.commutes_with_D and worst <= m.tol.eq)


@dataclass(frozen=True)
class GlueResult:
    field: OperatorField
    defect: float | None        # ||g - f||_inf
    local_defect: float | None  # max_i sup over U_i with h_i > 0 of ||g - f_i||
    commutes: bool

    def to_dict(self) -> dict:
        return {"defect": self.defect, "local_defect": self.local_defect, "commutes": self.commutes}


def _sup_distance(g: OperatorField, f: OperatorField, points) -> float:
    return max((alg.operator_norm(g[y] - f[y]) for y in points), default=0.0)


def glue(cover: Cover, local_fields: Sequence[OperatorField], m: MofSpace,
         target: OperatorField | None = None, epsilon: float | None = None) -> GlueResult:
    """``f = sum_i h_i f_i``; with a target ``g``, also the global and local defects."""
    cover.validate(m.points, m.tol.eq)
    if len(local_fields) != len(cover.sets):
        raise PartitionInvalid("need one local field per cover set")
    vals = {}
    for x in m.points:
        acc = np.zeros_like(m.unit(x).matrix, dtype=complex)
        for h, fi in zip(cover.bumps, local_fields):
            w = h.get(x, 0.0)
            if w:
                acc = acc + w * fi[x].matrix
        vals[x] = alg.AlgebraElement._wrap(m.bundle[x], acc)
    f = OperatorField(m, vals)
    defect = local = None
    if target is not None:
        defect = _sup_distance(target, f, m.points)
        local = max(_sup_distance(target, fi, [y for y in U if h.get(y, 0.0) > 0])
                    for U, h, fi in zip(cover.sets, cover.bumps, local_fields))
        scale = max(1.0, target.sup_norm())
        if defect > local + m.tol.eq * scale:
            raise TheoremViolation(f"gluing defect {defect:.3e} exceeds local defect {local:.3e}")
        if epsilon is not None and defect > epsilon + m.tol.eq * scale:
            raise TheoremViolation(f"gluing defect {defect:.3e} exceeds epsilon {epsilon:.3e}")
    fi_commute = all(commutes_with_D(fi) for fi in local_fields)
    commutes = commutes_with_D(f)
    if fi_commute and not commutes:
        raise TheoremViolation("gluing commuting local fields produced a non-commuting field")
    return GlueResult(f, defect, local, commutes)


# ---------------------------------------------------------------------------
# Dixmier probe
# ---------------------------------------------------------------------------


def generated_words(generators: Sequence[OperatorField], max_length: int = 3,
                    reduce: bool = True) -> list[OperatorField]:
    """The unit and products of at most ``max_length`` letters from the generators and their adjoints.

    With ``reduce`` a word is kept only if it is linearly independent of the
    words kept so far, which bounds the list by the dimension of the bundle.
    """
    if not generators:
        return []
    m = generators[0].mof
    letters = []
    for g in generators:
        letters.append(g)
        ga = g.adjoint()
        if max(alg.operator_norm(g[x] - ga[x]) for x in m.points) > m.tol.eq * max(1.0, g.sup_norm()):
            letters.append(ga)
    unit = OperatorField.unit(m)
    words, layer = [], []
    basis = np.zeros((sum(m.bundle[x].total_dim ** 2 for x in m.points), 0), dtype=complex)

    def keep(w) -> bool:
        nonlocal basis
        if not reduce:
            return True
        v = _stack([w], m.points)[:, 0]
        nv = np.linalg.norm(v)
        if nv == 0:
            return False
        r = v - basis @ (basis.conj().T @ v)
        r = r - basis @ (basis.conj().T @ r)
        if np.linalg.norm(r) <= 1e-9 * nv:
            return False
        basis = np.hstack([basis, (r / np.linalg.norm(r))[:, None]])
        return True

    if keep(unit):
        words.append(unit)
        layer.append(unit)
    for _ in range(max_length):
        nxt = [w @ a for w in layer for a in letters]
        layer = [w for w in nxt if keep(w)]
        words.extend(layer)
    return words


def _stack(fields: Sequence[OperatorField], points) -> np.ndarray:
    return np.stack([np.concatenate([f[x].matrix.ravel() for x in points]) for f in fields], axis=1)


def best_local_approximant(g: OperatorField, words: Sequence[OperatorField], U) -> tuple[OperatorField, float]:
    """Least-squares combination of the words matching ``g`` on ``U``; returns the field and its sup error on ``U``."""
    pts = [x for x in g.mof.points if x in U]
    W = _stack(words, pts)
    target = np.concatenate([g[x].matrix.ravel() for x in pts])
    coef, *_ = np.linalg.lstsq(W, target, rcond=None)
    m = g.mof
    vals = {x: alg.AlgebraElement._wrap(m.bundle[x], np.tensordot(coef, np.stack([w[x].matrix for w in words]), axes=1))
            for x in m.points}
    f = OperatorField(m, vals)
    return f, _sup_distance(g, f, pts)


@dataclass(frozen=True)
class ProbeOutcome:
    locally_approximable: bool
    local_error: float
    glue_defect: float | None
    member: bool | None

    def to_dict(self) -> dict:
        return {"locally_approximable": self.locally_approximable, "local_error": self.local_error,
                "glue_defect": self.glue_defect, "member": self.member}


@dataclass(frozen=True)
class FieldAlgebraProbe:
    n_generators: int
    n_words: int
    epsilon: float
    unit_axiom: bool
    norm_axiom: bool
    local_axiom: bool
    worst_norm_excess: float
    probes: tuple

    @property
    def passed(self) -> bool:
        return self.unit_axiom and self.norm_axiom and self.local_axiom

    def to_dict(self) -> dict:
        return {"n_generators": self.n_generators, "n_words": self.n_words, "epsilon": self.epsilon,
                "unit_axiom": self.unit_axiom, "norm_axiom": self.norm_axiom, "local_axiom": self.local_axiom,
                "worst_norm_excess": self.worst_norm_excess, "passed": self.passed,
                "probes": [p.to_dict() for p in self.probes]}


def _member_within(g: OperatorField, epsilon: float) -> bool:
    """Commutation with D up to what an epsilon-perturbation of a commuting field allows."""
    m = g.mof
    for x, y in m.pairs():
        dn = alg.operator_norm(m.D(x, y))
        slack = 2.0 * dn * epsilon / (1.0 + dn * max(alg.operator_norm(g[x]), alg.operator_norm(g[y])))
        if commutation_defect(g, x, y) > m.tol.eq + slack:
            return False
    return True


def dixmier_probe(generators: Sequence[OperatorField], m: MofSpace, epsilon: float = 1e-8,
                  probes: Sequence[OperatorField] | None = None, cover: Cover | None = None,
                  max_length: int = 3) -> FieldAlgebraProbe:
    """Check the three continuous-field axioms on the algebra generated by ``generators``."""
    unit = OperatorField.unit(m)
    unit_ok = cstar_closure_membership(unit, m)
    words = generated_words(list(generators), max_length) if generators else [unit]
    metric = induced_metric_norm(m, check=False)
    reports = [norm_continuity_check(w, metric) for w in words]
    norm_ok = all(r.passed for r in reports)
    worst = max(r.worst_excess for r in reports)
    if cover is None:
        off = [metric[p] for p in m.pairs()]
        cover = ball_cover(m, float(np.median(off)) if off else 1.0, metric)
    probes = list(words) if probes is None else list(probes)
    outcomes = []
    local_ok = True
    for g in probes:
        approx = [best_local_approximant(g, words, U) for U in cover.sets]
        err = max(e for _, e in approx)
        scale = max(1.0, g.sup_norm())
        if err > epsilon * scale:
            outcomes.append(ProbeOutcome(False, err, None, None))
            continue
        res = glue(cover, [f for f, _ in approx], m, target=g, epsilon=epsilon * scale)
        member = _member_within(g, epsilon * scale)
        local_ok &= member
        outcomes.append(ProbeOutcome(True, err, res.defect, member))
    return FieldAlgebraProbe(len(generators), len(words), epsilon, unit_ok, norm_ok, local_ok,
                             worst, tuple(outcomes))


@dataclass(frozen=True)
class NontrivialityCertificate:
    base_point: object
    block: int
    nonscalar_at: object
    member: bool
    distance_to_scalars: float

    def to_dict(self) -> dict:
        return {"base_point": str(self.base_point), "block": self.block,
                "nonscalar_at": str(self.nonscalar_at), "member": self.member,
                "distance_to_scalars": self.distance_to_scalars}


def nontriviality_certificate(m: MofSpace) -> NontrivialityCertificate:
    """A non-scalar field in C(D) together with its distance from the scalar fields."""
    w = find_nonscalar_witness(m)
    member = cstar_closure_membership(w.field, m)
    if not member:
        raise TheoremViolation("distance field on a central mof does not commute with D")
    dist = max(alg.distance_to_scalars(w.field[x]) for x in m.points)
    return NontrivialityCertificate(w.base_point, w.block, w.nonscalar_at, member, dist)


def all_scalar_fields(m: MofSpace) -> list[OperatorField]:
    """Indicator scalar fields; their span is every scalar field."""
    return [OperatorField(m, {y: (1.0 if y == x else 0.0) * m.unit(y) for y in m.points}) for x in m.points]

