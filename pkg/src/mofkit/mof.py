"""Metric operator fields: the data structure, axiom verification, induced
metrics and the standard constructions."""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from . import algebra as alg
from .algebra import (
    DEFAULT_TOL,
    AlgebraElement,
    AlgebraSignature,
    Signature,
    State,
    TensorSignature,
    ToleranceConfig,
)
from .errors import (
    BundleMismatch,
    DimensionMismatch,
    InvalidPartition,
    MetricAxiomViolation,
    NormBoundExceeded,
    NotCentral,
    StateFamilyMismatch,
    StructureViolation,
    TheoremViolation,
)

Point = Hashable


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AxiomCheck:
    name: str
    passed: bool
    worst: float = 0.0
    where: tuple | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "worst_violation": self.worst,
            "where": None if self.where is None else [str(p) for p in self.where],
            "detail": self.detail,
        }


@dataclass(frozen=True)
class AxiomReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def worst(self) -> float:
        return max((c.worst for c in self.checks), default=0.0)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> AxiomCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_dict() for c in self.checks]}

    def __str__(self):
        lines = []
        for c in self.checks:
            flag = "PASS" if c.passed else "FAIL"
            where = "" if c.where is None else f" at {tuple(str(p) for p in c.where)}"
            lines.append(f"[{flag}] {c.name}: worst={c.worst:.3e}{where} {c.detail}".rstrip())
        return "\n".join(lines)


class _Worst:
    """Running maximum of a violation together with its location."""

    def __init__(self):
        self.value = 0.0
        self.where = None
        self.failed = False

    def update(self, value: float, where: tuple, failed: bool = False):
        if failed:
            if not self.failed or value > self.value:
                self.failed, self.value, self.where = True, value, where
        elif not self.failed and (self.where is None or value > self.value):
            self.value, self.where = value, where

    def check(self, name: str, detail: str = "") -> AxiomCheck:
        return AxiomCheck(name, not self.failed, self.value, self.where, detail)


# ---------------------------------------------------------------------------
# MofSpace
# ---------------------------------------------------------------------------


class MofSpace:
    """A finite point set with an algebra bundle and a metric operator field.

    ``D`` is stored one-sided: only pairs ``(x, y)`` with ``index(x) <= index(y)``.
    The opposite orientation is produced by the flip, so flip symmetry holds by
    construction.  Construction validates structure only (keys, signatures,
    block support); the metric axioms are checked by :func:`verify_mof`.
    """

    def __init__(
        self,
        points: Sequence[Point],
        bundle: Mapping[Point, Signature],
        D: Mapping[tuple, AlgebraElement],
        metric_states: Mapping[Point, State],
        base_point: Point | None = None,
        tol: ToleranceConfig = DEFAULT_TOL,
    ):
        self.points = tuple(points)
        if len(set(self.points)) != len(self.points):
            raise StructureViolation("duplicate point ids")
        if not self.points:
            raise StructureViolation("a mof space needs at least one point")
        self.index = {p: i for i, p in enumerate(self.points)}
        self.bundle = {p: bundle[p] for p in self.points}
        self.tol = tol
        if base_point is not None and base_point not in self.index:
            raise StructureViolation(f"base point {base_point!r} is not a point")
        self.base_point = base_point

        stored: dict[tuple, AlgebraElement] = {}
        for (x, y), value in D.items():
            if x not in self.index or y not in self.index:
                raise StructureViolation(f"D given for unknown pair {(x, y)!r}")
            if self.index[x] > self.index[y]:
                x, y, value = y, x, alg.flip(value)
            if (x, y) in stored:
                raise StructureViolation(f"D given twice for pair {(x, y)!r}")
            expected = TensorSignature((self.bundle[x], self.bundle[y]))
            if value.signature != expected:
                if value.signature.leaves == expected.leaves:
                    value = alg.regroup(value, expected)
                else:
                    raise DimensionMismatch(
                        f"D{(x, y)!r} lives in {value.signature}, expected {expected}")
            stored[(x, y)] = value
        for i, x in enumerate(self.points):
            for y in self.points[i:]:
                if (x, y) not in stored:
                    raise StructureViolation(f"D missing for pair {(x, y)!r}")
        self._D = stored

        self.metric_states = {}
        for p in self.points:
            if p not in metric_states:
                raise StructureViolation(f"no metric state for point {p!r}")
            mu = metric_states[p]
            if mu.signature != self.bundle[p]:
                raise DimensionMismatch(f"metric state at {p!r} is on {mu.signature}, "
                                        f"expected {self.bundle[p]}")
            self.metric_states[p] = mu
        self._cache: dict = {}

    # access -----------------------------------------------------------------
    def D(self, x: Point, y: Point) -> AlgebraElement:
        if self.index[x] <= self.index[y]:
            return self._D[(x, y)]
        key = ("flip", x, y)
        if key not in self._cache:
            self._cache[key] = alg.flip(self._D[(y, x)])
        return self._cache[key]

    def stored_items(self):
        return self._D.items()

    def unit(self, x: Point) -> AlgebraElement:
        return alg.unit(self.bundle[x])

    def __len__(self):
        return len(self.points)

    def pairs(self):
        """Unordered off-diagonal pairs in lexicographic index order."""
        return itertools.combinations(self.points, 2)

    def ordered_pairs(self):
        return ((x, y) for x in self.points for y in self.points if x != y)

    def inv_sqrt(self, x: Point, y: Point) -> AlgebraElement:
        key = ("isqrt", x, y)
        if key not in self._cache:
            self._cache[key] = alg.psd_power(self.D(x, y), -0.5, self.tol)
        return self._cache[key]

    def inverse(self, x: Point, y: Point) -> AlgebraElement:
        key = ("inv", x, y)
        if key not in self._cache:
            self._cache[key] = alg.psd_power(self.D(x, y), -1.0, self.tol)
        return self._cache[key]

    def D_norm(self, x: Point, y: Point) -> float:
        key = ("norm", x, y) if self.index[x] <= self.index[y] else ("norm", y, x)
        if key not in self._cache:
            self._cache[key] = alg.operator_norm(self._D[key[1:]])
        return self._cache[key]

    def norm_bound(self) -> float:
        """``sup ||D(x, y)||`` over all pairs, diagonal included."""
        if "norm" not in self._cache:
            self._cache["norm"] = max(alg.operator_norm(v) for v in self._D.values())
        return self._cache["norm"]

    def scale(self) -> float:
        s = self.norm_bound()
        return s if s > 0 else 1.0

    def is_central(self) -> bool:
        return all(alg.is_central(v, self.tol) for v in self._D.values())

    def is_scalar_valued(self) -> bool:
        return all(alg.is_scalar(v, self.tol) for v in self._D.values())

    def commutative(self) -> bool:
        return all(s.commutative() for s in self.bundle.values())

    # derived copies ---------------------------------------------------------
    def replace(self, *, D=None, metric_states=None, base_point=..., tol=None) -> "MofSpace":
        new_D = dict(self._D)
        if D is not None:
            for (x, y), v in D.items():
                if self.index[x] > self.index[y]:
                    x, y, v = y, x, alg.flip(v)
                new_D[(x, y)] = v
        return MofSpace(
            self.points,
            self.bundle,
            new_D,
            self.metric_states if metric_states is None else metric_states,
            self.base_point if base_point is ... else base_point,
            self.tol if tol is None else tol,
        )

    def __repr__(self):
        return f"MofSpace({len(self.points)} points, central={self.is_central()})"


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


def _triangle_operator(m: MofSpace, x, y, z) -> AlgebraElement:
    """``D(x,y) ⊗ 1 + 1 ⊗ D(y,z) - M D(x,z)`` in ``A_x ⊗ A_y ⊗ A_z``."""
    ax, ay, az = m.bundle[x], m.bundle[y], m.bundle[z]
    sig = TensorSignature((ax, ay, az))
    left = np.kron(m.D(x, y).matrix, np.eye(az.total_dim))
    right = np.kron(np.eye(ax.total_dim), m.D(y, z).matrix)
    middle = alg.insert_unit_middle(m.D(x, z), ay).matrix
    return AlgebraElement._wrap(sig, left + right - middle)


def triangle_min_eigenvalue(m: MofSpace, x, y, z) -> float:
    return alg.min_eigenvalue(_triangle_operator(m, x, y, z))


def verify_mof(m: MofSpace, jobs: int = 1) -> AxiomReport:
    """Check the four mof axioms over all points, pairs and ordered triples."""
    tol = m.tol
    S = m.scale()

    diag = _Worst()
    for x in m.points:
        d = m.D(x, x)
        mu = m.metric_states[x]
        pairing = abs(alg.apply_state(alg.tensor_state(mu, mu), d))
        nrm = alg.operator_norm(d)
        herm = alg.hermitian_defect(d)
        lam = alg.min_eigenvalue(d)
        bad = (pairing > tol.eq * S or herm > tol.psd * S or -lam > tol.psd * S
               or (nrm > 0 and lam > tol.inv * nrm))
        diag.update(max(pairing, herm, max(0.0, -lam)) / S, (x, x), bad)

    pos = _Worst()
    for x, y in m.pairs():
        d = m.D(x, y)
        nrm = alg.operator_norm(d)
        herm = alg.hermitian_defect(d)
        lam = alg.min_eigenvalue(d)
        bad = herm > tol.psd * nrm or not lam > tol.inv * nrm
        value = max(herm, max(0.0, tol.inv * nrm - lam)) / S
        pos.update(value, (x, y), bad)

    sym = _Worst()
    for i, x in enumerate(m.points):
        for y in m.points[i:]:
            defect = alg.operator_norm(m.D(x, y) - alg.flip(m.D(y, x))) / S
            sym.update(defect, (x, y), defect > tol.eq)

    tri = _Worst()
    triples = list(itertools.product(m.points, repeat=3))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            lams = list(pool.map(lambda t: triangle_min_eigenvalue(m, *t), triples))
    else:
        lams = [triangle_min_eigenvalue(m, *t) for t in triples]
    for t, lam in zip(triples, lams):
        tri.update(max(0.0, -lam) / S, t, -lam > tol.psd * S)

    return AxiomReport((
        diag.check("(i) metric states annihilate the diagonal",
                   "D(x,x) PSD, non-invertible, (mu_x ⊗ mu_x) D(x,x) = 0"),
        pos.check("(ii) positive invertible off the diagonal"),
        sym.check("(iii) flip symmetry"),
        tri.check("(iv) tensor triangle inequality", f"{len(triples)} ordered triples"),
    ))


# ---------------------------------------------------------------------------
# Ordinary metrics
# ---------------------------------------------------------------------------


class MetricTable:
    """Symmetric table of distances on an ordered point set."""

    def __init__(self, points: Sequence[Point], values):
        self.points = tuple(points)
        self.index = {p: i for i, p in enumerate(self.points)}
        v = np.array(values, dtype=float)
        n = len(self.points)
        if v.shape != (n, n):
            raise DimensionMismatch(f"metric table must be {n}x{n}, got {v.shape}")
        v.setflags(write=False)
        self.values = v

    @classmethod
    def from_function(cls, points: Sequence[Point], d: Callable) -> "MetricTable":
        return cls(points, [[d(x, y) for y in points] for x in points])

    def __getitem__(self, pair) -> float:
        x, y = pair
        return float(self.values[self.index[x], self.index[y]])

    def axioms(self, tol: float = DEFAULT_TOL.eq) -> AxiomReport:
        v = self.values
        n = len(self.points)
        S = max(float(np.abs(v).max()) if n else 0.0, 1e-300)
        sym, ident, tri = _Worst(), _Worst(), _Worst()
        for i in range(n):
            ident.update(abs(v[i, i]) / S, (self.points[i],), abs(v[i, i]) > tol * S)
            for j in range(n):
                if i == j:
                    continue
                sym.update(abs(v[i, j] - v[j, i]) / S, (self.points[i], self.points[j]),
                           abs(v[i, j] - v[j, i]) > tol * S)
                ident.update(0.0 if v[i, j] > tol * S else 1.0, (self.points[i], self.points[j]),
                             not v[i, j] > tol * S)
        excess = v[:, None, :] - v[:, :, None] - v[None, :, :]  # d(i,k) - d(i,j) - d(j,k)
        idx = np.unravel_index(int(np.argmax(excess)), excess.shape) if n else None
        if idx is not None:
            worst = float(excess[idx])
            where = (self.points[idx[0]], self.points[idx[1]], self.points[idx[2]])
            tri.update(max(0.0, worst) / S, where, worst > tol * S)
        return AxiomReport((
            sym.check("symmetry"),
            ident.check("identity of indiscernibles"),
            tri.check("triangle inequality"),
        ))

    def lipschitz_constant(self, values: Mapping[Point, complex]) -> float:
        """``sup |c(x) - c(y)| / d(x, y)`` over distinct points."""
        best = 0.0
        for i, x in enumerate(self.points):
            for y in self.points[i + 1:]:
                best = max(best, abs(values[x] - values[y]) / self[x, y])
        return best

    def to_dict(self) -> dict:
        return {"points": [str(p) for p in self.points], "values": self.values.tolist()}


def induced_metric_states(m: MofSpace, states: Mapping[Point, State] | None = None,
                          check: bool = True) -> MetricTable:
    """``D^mu(x, y) = (mu_x ⊗ mu_y) D(x, y)``."""
    states = m.metric_states if states is None else states
    S = m.scale()
    n = len(m.points)
    vals = np.zeros((n, n))
    for i, x in enumerate(m.points):
        for j in range(i, n):
            y = m.points[j]
            z = alg.apply_state(alg.tensor_state(states[x], states[y]), m.D(x, y))
            if check and abs(z.imag) > m.tol.eq * S:
                raise MetricAxiomViolation(f"D^mu{(x, y)!r} has imaginary part {z.imag:.3g}")
            if i == j:
                if check and abs(z) > m.tol.eq * S:
                    raise MetricAxiomViolation(f"D^mu({x!r},{x!r}) = {z.real:.3g} is not zero")
                continue
            vals[i, j] = vals[j, i] = z.real
    table = MetricTable(m.points, vals)
    if check:
        report = table.axioms(m.tol.eq)
        if not report.passed:
            raise MetricAxiomViolation(f"D^mu violates {report.failed()}")
    return table


def induced_metric_norm(m: MofSpace, check: bool = True) -> MetricTable:
    """``D^||·||(x, y) = ||D(x, y)||`` off the diagonal, zero on it."""
    n = len(m.points)
    vals = np.zeros((n, n))
    for (x, y) in m.pairs():
        i, j = m.index[x], m.index[y]
        vals[i, j] = vals[j, i] = alg.operator_norm(m.D(x, y))
    table = MetricTable(m.points, vals)
    if check:
        dmu = induced_metric_states(m, check=False).values
        excess = float((dmu - vals).max())
        if excess > m.tol.eq * m.scale():
            raise TheoremViolation(f"D^mu exceeds D^||.|| by {excess:.3g}")
    return table


# ---------------------------------------------------------------------------
# Constructions
# ---------------------------------------------------------------------------


def _as_bundle(points, bundle) -> dict:
    if isinstance(bundle, (AlgebraSignature, TensorSignature)):
        return {p: bundle for p in points}
    return {p: bundle[p] for p in points}


def _as_metric(points, d) -> MetricTable:
    if isinstance(d, MetricTable):
        if d.points != tuple(points):
            raise DimensionMismatch("metric table points differ from the mof points")
        return d
    if callable(d):
        return MetricTable.from_function(points, d)
    return MetricTable(points, d)


def scalar_mof(points, bundle, d, state_family: Mapping[Point, State] | None = None,
               tol: ToleranceConfig = DEFAULT_TOL, base_point=None) -> MofSpace:
    """``D(x, y) = d(x, y) 1_x ⊗ 1_y`` for an ordinary metric ``d``."""
    points = tuple(points)
    bundle = _as_bundle(points, bundle)
    table = _as_metric(points, d)
    report = table.axioms(tol.eq)
    if not report.passed:
        raise MetricAxiomViolation(f"d is not a metric: {report.failed()}")
    D = {}
    for i, x in enumerate(points):
        for y in points[i:]:
            sig = TensorSignature((bundle[x], bundle[y]))
            val = 0.0 if x == y else table[x, y]
            D[(x, y)] = val * alg.unit(sig)
    if state_family is None:
        state_family = {p: State.maximally_mixed(bundle[p]) for p in points}
    return MofSpace(points, bundle, D, state_family, base_point, tol)


def _check_same_bundle(m1: MofSpace, m2: MofSpace):
    if m1.points != m2.points or any(m1.bundle[p] != m2.bundle[p] for p in m1.points):
        raise BundleMismatch("mofs must share points and bundle")


def _reverify_states(m: MofSpace) -> MofSpace:
    S = m.scale()
    for x in m.points:
        mu = m.metric_states[x]
        z = alg.apply_state(alg.tensor_state(mu, mu), m.D(x, x))
        if abs(z) > m.tol.eq * S:
            raise StateFamilyMismatch(f"reused metric state at {x!r} gives pairing {abs(z):.3g}")
    return m


def combine_linear(m1: MofSpace, m2: MofSpace, r: float = 1.0) -> MofSpace:
    """``r D1 + D2``; the metric states of ``m1`` are reused."""
    if not r > 0:
        raise ValueError("r must be positive")
    _check_same_bundle(m1, m2)
    D = {k: r * v + m2.D(*k) for k, v in m1.stored_items()}
    return _reverify_states(m1.replace(D=D))


def combine_p(m1: MofSpace, m2: MofSpace, p: float) -> MofSpace:
    """``(D1^p + D2^p)^(1/p)`` for central mofs and ``p >= 1``."""
    if not p >= 1:
        raise ValueError("p must be >= 1")
    _check_same_bundle(m1, m2)
    if not (m1.is_central() and m2.is_central()):
        raise NotCentral("combine_p requires both mofs to be central")
    tol = m1.tol
    D = {}
    for k, v in m1.stored_items():
        s = alg.psd_power(v, p, tol) + alg.psd_power(m2.D(*k), p, tol)
        D[k] = alg.psd_power(s, 1.0 / p, tol)
    return _reverify_states(m1.replace(D=D))


def rescale(m: MofSpace, c: float) -> MofSpace:
    if not c > 0:
        raise ValueError("scaling factor must be positive")
    return m.replace(D={k: c * v for k, v in m.stored_items()})


def product_mof(m: MofSpace, r: MofSpace) -> MofSpace:
    """``D × R`` on the bundle ``{A_x ⊗ B_y}`` over ``X × Y``."""
    points = [(x, y) for x in m.points for y in r.points]
    bundle = {(x, y): TensorSignature((m.bundle[x], r.bundle[y])) for x, y in points}
    D = {}
    for i, (x, y) in enumerate(points):
        for (x2, y2) in points[i:]:
            ax, ax2, by, by2 = m.bundle[x], m.bundle[x2], r.bundle[y], r.bundle[y2]
            flat = TensorSignature((ax, ax2, by, by2))
            first = np.kron(m.D(x, x2).matrix, np.eye(by.total_dim * by2.total_dim))
            second = np.kron(np.eye(ax.total_dim * ax2.total_dim), r.D(y, y2).matrix)
            w = AlgebraElement._wrap(flat, first + second)
            w = alg.permute_factors(w, [0, 2, 1, 3])
            target = TensorSignature((bundle[(x, y)], bundle[(x2, y2)]))
            D[((x, y), (x2, y2))] = alg.regroup(w, target)
    states = {(x, y): alg.tensor_state(m.metric_states[x], r.metric_states[y]) for x, y in points}
    base = None
    if m.base_point is not None and r.base_point is not None:
        base = (m.base_point, r.base_point)
    return MofSpace(points, bundle, D, states, base, m.tol)


INFINITY = "inf"


def pointed_extension(m: MofSpace, algebra_at_infinity: Signature = AlgebraSignature((1,)),
                      label: Point = INFINITY) -> MofSpace:
    """Adjoin a point at infinity with ``D+(inf, x) = 1`` and ``D+(inf, inf) = 0``."""
    bound = m.norm_bound()
    if bound > 2.0 * (1.0 + m.tol.eq):
        raise NormBoundExceeded(f"||D||_inf = {bound:.6g} exceeds 2")
    if label in m.index:
        raise StructureViolation(f"label {label!r} is already a point")
    points = m.points + (label,)
    bundle = dict(m.bundle)
    bundle[label] = algebra_at_infinity
    D = dict(m.stored_items())
    for x in m.points:
        D[(x, label)] = alg.unit(TensorSignature((m.bundle[x], algebra_at_infinity)))
    D[(label, label)] = alg.zero(TensorSignature((algebra_at_infinity, algebra_at_infinity)))
    states = dict(m.metric_states)
    states[label] = State.maximally_mixed(algebra_at_infinity)
    return MofSpace(points, bundle, D, states, label, m.tol)


@dataclass(frozen=True)
class QuotientModel:
    """Finite metric space ``(Y, rho)`` cut into classes, each class ``x``
    embedded into ``A_x`` through a commutative subalgebra ``C(x)``.

    Two embeddings are supported.  If ``A_x.total_dim == |x|`` the members of
    ``x`` go to the diagonal matrix units (``C(x)`` is the diagonal; central
    only when ``A_x`` is commutative).  If ``A_x`` has exactly ``|x|`` blocks
    they go to the block identities (``C(x)`` is the centre).
    """

    Y: tuple
    rho: np.ndarray = field(repr=False)
    classes: tuple
    names: tuple
    signatures: tuple

    def projections(self, i: int) -> np.ndarray:
        """Rows are the diagonals of the projections assigned to the members of class ``i``."""
        sig = self.signatures[i]
        k = len(self.classes[i])
        n = sig.total_dim
        u = np.zeros((k, n))
        if n == k:
            u[np.arange(k), np.arange(k)] = 1.0
        else:
            for j, b in enumerate(alg.block_structure(sig).blocks):
                u[j, b] = 1.0
        return u

    def embed(self, i: int, values: Sequence[complex]) -> AlgebraElement:
        """The element of ``C(x_i)`` given by a function on the class."""
        u = self.projections(i)
        return alg.diag(self.signatures[i], np.asarray(values, dtype=complex) @ u)

    def field_values(self, g: Callable | Mapping | Sequence) -> dict:
        """Class-wise embedding of a function on ``Y`` (callable, mapping, or sequence by position)."""
        out = {}
        for i, cls in enumerate(self.classes):
            if callable(g):
                vals = [g(self.Y[j]) for j in cls]
            elif isinstance(g, Mapping):
                vals = [g[self.Y[j]] for j in cls]
            else:
                vals = [g[j] for j in cls]
            out[self.names[i]] = self.embed(i, vals)
        return out

    def mof(self, tol: ToleranceConfig = DEFAULT_TOL) -> MofSpace:
        bundle = dict(zip(self.names, self.signatures))
        D = {}
        for i, ci in enumerate(self.classes):
            ui = self.projections(i)
            for j in range(i, len(self.classes)):
                cj = self.classes[j]
                uj = self.projections(j)
                block = self.rho[np.ix_(ci, cj)]
                vec = (ui.T @ block @ uj).ravel()
                sig = TensorSignature((self.signatures[i], self.signatures[j]))
                D[(self.names[i], self.names[j])] = alg.diag(sig, vec)
        states = {}
        for i, name in enumerate(self.names):
            p = self.projections(i)[0]
            states[name] = State._wrap(self.signatures[i], np.diag(p / p.sum()).astype(complex))
        return MofSpace(self.names, bundle, D, states, None, tol)


def quotient_model(Y: Sequence, rho, partition: Sequence[Sequence], embeddings=None,
                   names: Sequence[Point] | None = None) -> QuotientModel:
    Y = tuple(Y)
    pos = {y: i for i, y in enumerate(Y)}
    if len(pos) != len(Y):
        raise InvalidPartition("Y has repeated members")
    if callable(rho):
        R = np.array([[float(rho(a, b)) for b in Y] for a in Y])
    else:
        R = np.array(rho, dtype=float)
    report = MetricTable(range(len(Y)), R).axioms()
    if not report.passed:
        raise MetricAxiomViolation(f"rho is not a metric: {report.failed()}")
    classes = []
    seen = set()
    for cls in partition:
        if not len(cls):
            raise InvalidPartition("empty class")
        idx = []
        for y in cls:
            if y not in pos:
                raise InvalidPartition(f"{y!r} is not a member of Y")
            if y in seen:
                raise InvalidPartition(f"{y!r} belongs to two classes")
            seen.add(y)
            idx.append(pos[y])
        classes.append(tuple(idx))
    if len(seen) != len(Y):
        raise InvalidPartition("classes do not cover Y")
    names = tuple(names) if names is not None else tuple(f"x{i}" for i in range(len(classes)))
    if len(names) != len(classes):
        raise InvalidPartition("one name per class required")
    sigs = []
    for i, cls in enumerate(classes):
        sig = None
        if embeddings is not None:
            sig = embeddings.get(names[i]) if isinstance(embeddings, Mapping) else embeddings[i]
        if sig is None:
            sig = AlgebraSignature((1,) * len(cls))
        elif not isinstance(sig, (AlgebraSignature, TensorSignature)):
            sig = AlgebraSignature(tuple(sig))
        k = len(cls)
        n_blocks = len(alg.block_structure(sig).blocks)
        if sig.total_dim != k and n_blocks != k:
            raise InvalidPartition(
                f"class {names[i]!r} has {k} members; {sig} admits neither a diagonal "
                f"nor a central embedding")
        sigs.append(sig)
    return QuotientModel(Y, R, tuple(classes), names, tuple(sigs))


def build_quotient_example(Y: Sequence, rho, partition: Sequence[Sequence], embeddings=None,
                           names: Sequence[Point] | None = None,
                           tol: ToleranceConfig = DEFAULT_TOL) -> MofSpace:
    return quotient_model(Y, rho, partition, embeddings, names).mof(tol)


def staircase_model(n_max: int, mesh: int) -> QuotientModel:
    """Segments ``{1/n} x [0, 1/n]`` sampled at ``mesh + 1`` points, plus the origin."""
    if n_max < 1 or mesh < 1:
        raise ValueError("n_max and mesh must be >= 1")
    Y, partition = [], []
    for n in range(1, n_max + 1):
        cls = [(1.0 / n, k / (n * mesh)) for k in range(mesh + 1)]
        Y.extend(cls)
        partition.append(cls)
    Y.append((0.0, 0.0))
    partition.append([(0.0, 0.0)])
    names = [str(n) for n in range(1, n_max + 1)] + [INFINITY]
    return quotient_model(Y, lambda a, b: float(np.hypot(a[0] - b[0], a[1] - b[1])),
                          partition, names=names)


def build_staircase_example(n_max: int, mesh: int, tol: ToleranceConfig = DEFAULT_TOL) -> MofSpace:
    return staircase_model(n_max, mesh).mof(tol)


def non_scalar_pairs(m: MofSpace) -> Iterable[tuple]:
    """Stored pairs whose value is not a scalar multiple of the unit."""
    return [k for k, v in m.stored_items() if not alg.is_scalar(v, m.tol)]
