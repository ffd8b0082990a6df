"""Spectral measures under states and the induced probabilistic metric."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import algebra as alg
from .algebra import AlgebraElement, DEFAULT_TOL, State, ToleranceConfig
from .errors import NotPositive
from .mof import AxiomReport, MofSpace, _Worst


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finitely supported probability measure on ``[0, inf)``.

    ``values`` ascend strictly; ``weights`` are non-negative and sum to one.
    """

    values: np.ndarray
    weights: np.ndarray
    weight_tol: float = field(default=DEFAULT_TOL.weight, compare=False)

    @classmethod
    def from_atoms(cls, atoms, tol: ToleranceConfig = DEFAULT_TOL, scale: float = 1.0) -> "DiscreteMeasure":
        """Sort, clamp and coalesce atoms closer than ``tol.atom * scale``."""
        atoms = sorted((max(float(v), 0.0), max(float(w), 0.0)) for v, w in atoms)
        merged: list[list[float]] = []
        gap = tol.atom * max(scale, 1e-300)
        for v, w in atoms:
            if merged and v - merged[-1][2] <= gap:
                last = merged[-1]
                last[0] += v * w
                last[1] += w
                last[2] = v
                last[3].append(v)
            else:
                merged.append([v * w, w, v, [v]])
        values, weights = [], []
        for vw, w, _, members in merged:
            values.append(vw / w if w > 0 else float(np.mean(members)))
            weights.append(w)
        weights = np.asarray(weights, dtype=float)
        total = weights.sum()
        if total <= 0:
            raise ValueError("measure has no mass")
        weights = weights / total
        keep = weights > tol.weight
        return cls(np.asarray(values, dtype=float)[keep], weights[keep] / weights[keep].sum(), tol.weight)

    @classmethod
    def dirac(cls, value: float = 0.0) -> "DiscreteMeasure":
        return cls(np.array([float(value)]), np.array([1.0]))

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return [(float(v), float(w)) for v, w in zip(self.values, self.weights)]

    def mass(self) -> float:
        return float(self.weights.sum())

    def moment(self, k: int = 1) -> float:
        return float(np.dot(self.weights, self.values ** k))

    def mean(self) -> float:
        return self.moment(1)

    def ess_sup(self) -> float:
        live = self.values[self.weights > self.weight_tol]
        return float(live.max()) if live.size else 0.0

    def cdf(self, r: float) -> float:
        """``P[0, r]``."""
        return float(self.weights[self.values <= r].sum())

    def distance(self, other: "DiscreteMeasure") -> float:
        """Largest gap between the two distribution functions."""
        grid = np.union1d(self.values, other.values)
        return max((abs(self.cdf(r) - other.cdf(r)) for r in grid), default=0.0)

    def is_close(self, other: "DiscreteMeasure", value_tol: float, weight_tol: float) -> bool:
        """Atom-wise equality after merging."""
        if len(self.values) != len(other.values):
            return False
        return bool(np.all(np.abs(self.values - other.values) <= value_tol)
                    and np.all(np.abs(self.weights - other.weights) <= weight_tol))

    def is_dirac_zero(self, value_tol: float) -> bool:
        return self.ess_sup() <= value_tol

    def scaled(self, c: float) -> "DiscreteMeasure":
        return DiscreteMeasure(c * self.values, self.weights, self.weight_tol)

    def to_dict(self) -> dict:
        return {"atoms": [[v, w] for v, w in self.atoms]}


def spectral_measure(a: AlgebraElement, mu: State, tol: ToleranceConfig = DEFAULT_TOL) -> DiscreteMeasure:
    """``G -> mu(E_a(G))`` for the eigenprojections of a positive element."""
    if not alg.is_positive(a, tol.psd):
        raise NotPositive("spectral measures need a positive element")
    if mu.signature.leaves != a.signature.leaves:
        raise ValueError("state and element live on different algebras")
    atoms = []
    rho = mu.rho
    for size, idx in alg.block_structure(a.signature).groups:
        blocks = alg._gather(a.matrix, idx)
        herm = 0.5 * (blocks + np.conj(np.swapaxes(blocks, -1, -2)))
        w, v = np.linalg.eigh(herm)
        rho_b = alg._gather(rho, idx)
        # weight of eigenvector k: <v_k, rho v_k>
        weights = np.einsum("bik,bij,bjk->bk", v.conj(), rho_b, v).real
        atoms.extend(zip(w.ravel(), weights.ravel()))
    return DiscreteMeasure.from_atoms(atoms, tol, scale=alg.operator_norm(a))


class ProbMetric:
    """Table of measures over all ordered pairs, diagonal included."""

    def __init__(self, points, table: dict, tol: ToleranceConfig = DEFAULT_TOL):
        self.points = tuple(points)
        self.table = dict(table)
        self.tol = tol

    def __getitem__(self, pair) -> DiscreteMeasure:
        return self.table[pair]

    def to_dict(self) -> dict:
        return {"pairs": [{"pair": [str(x), str(y)], "atoms": [[v, w] for v, w in self.table[(x, y)].atoms]}
                          for x in self.points for y in self.points]}


def prob_metric(m: MofSpace, jobs: int = 1) -> ProbMetric:
    """``P_{x,y}`` = spectral measure of ``D(x, y)`` under ``mu_x ⊗ mu_y``."""
    pairs = [(x, y) for x in m.points for y in m.points]

    def one(pair):
        x, y = pair
        mu = alg.tensor_state(m.metric_states[x], m.metric_states[y])
        return spectral_measure(m.D(x, y), mu, m.tol)

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(jobs) as ex:
            measures = list(ex.map(one, pairs))
    else:
        measures = [one(p) for p in pairs]
    return ProbMetric(m.points, dict(zip(pairs, measures)), m.tol)


def verify_pm(p: ProbMetric) -> AxiomReport:
    """The four probabilistic-metric axioms, with the triangle axiom in ess-sup form."""
    tol = p.tol
    pts = p.points
    diag = _Worst()
    for x in pts:
        e = p[(x, x)].ess_sup()
        diag.update(e, (x, x), e > tol.atom)
    off = _Worst()
    for x, y in itertools.permutations(pts, 2):
        e = p[(x, y)].ess_sup()
        off.update(max(0.0, tol.atom - e), (x, y), not e > tol.atom)
    sym = _Worst()
    for x, y in itertools.combinations(pts, 2):
        a, b = p[(x, y)], p[(y, x)]
        scale = max(1.0, a.ess_sup(), b.ess_sup())
        ok = a.is_close(b, tol.atom * scale, tol.eq)
        gap = np.abs(a.values - b.values).max() / scale if len(a.values) == len(b.values) else 1.0
        sym.update(max(a.distance(b), gap), (x, y), not ok)
    tri = _Worst()
    sup = {k: v.ess_sup() for k, v in p.table.items()}
    for x, y, z in itertools.product(pts, repeat=3):
        excess = sup[(x, z)] - sup[(x, y)] - sup[(y, z)]
        tri.update(max(0.0, excess), (x, y, z), excess > tol.eq)
    return AxiomReport((
        diag.check("pm_diagonal", "P(x,x) is the point mass at 0"),
        off.check("pm_separation", "P(x,y) is not the point mass at 0 for x != y"),
        sym.check("pm_symmetry", "P(x,y) = P(y,x)"),
        tri.check("pm_triangle", "ess sup P(x,z) <= ess sup P(x,y) + ess sup P(y,z)"),
    ))
