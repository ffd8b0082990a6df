"""Operator fields, Lipschitz seminorms and the de Leeuw derivation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import algebra as alg
from .algebra import AlgebraElement, State
from .errors import (
    AllScalar,
    DimensionMismatch,
    NoBasePoint,
    NotCentral,
    NotCommuting,
    NotNormal,
    NotScalarMof,
    SamePoint,
    StructureViolation,
    TheoremViolation,
    TooFewPoints,
)
from .mof import INFINITY, MofSpace, induced_metric_norm, non_scalar_pairs, pointed_extension, product_mof


class OperatorField:
    """A vector field ``x -> f(x) in A_x`` over the points of a mof space."""

    __slots__ = ("mof", "values", "_norms")

    def __init__(self, mof: MofSpace, values: Mapping):
        vals = {}
        for x in mof.points:
            if x not in values:
                raise StructureViolation(f"field has no value at {x!r}")
            v = values[x]
            if not isinstance(v, AlgebraElement):
                v = alg.make_element(mof.bundle[x], v, mof.tol)
            if v.signature != mof.bundle[x]:
                if v.signature.leaves != mof.bundle[x].leaves:
                    raise DimensionMismatch(f"value at {x!r} lives in {v.signature}, "
                                            f"expected {mof.bundle[x]}")
                v = alg.regroup(v, mof.bundle[x])
            vals[x] = v
        object.__setattr__(self, "mof", mof)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_norms", {})

    def __setattr__(self, name, value):
        raise AttributeError("OperatorField is immutable")

    def norm_at(self, x) -> float:
        """``||f(x)||``, cached."""
        if x not in self._norms:
            self._norms[x] = alg.operator_norm(self.values[x])
        return self._norms[x]

    def __getitem__(self, x) -> AlgebraElement:
        return self.values[x]

    def _pointwise(self, other, op):
        if not isinstance(other, OperatorField):
            return NotImplemented
        if other.mof.points != self.mof.points:
            raise DimensionMismatch("fields live on different point sets")
        return OperatorField(self.mof, {x: op(self[x], other[x]) for x in self.mof.points})

    def __add__(self, other):
        return self._pointwise(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._pointwise(other, lambda a, b: a - b)

    def __matmul__(self, other):
        return self._pointwise(other, lambda a, b: a @ b)

    def __mul__(self, c):
        if isinstance(c, OperatorField):
            return NotImplemented
        return OperatorField(self.mof, {x: c * v for x, v in self.values.items()})

    __rmul__ = __mul__

    def __neg__(self):
        return -1.0 * self

    def adjoint(self) -> "OperatorField":
        return OperatorField(self.mof, {x: v.adjoint() for x, v in self.values.items()})

    def sup_norm(self) -> float:
        return max(self.norm_at(x) for x in self.values)

    def restrict(self, mof: MofSpace) -> "OperatorField":
        """The same values on a mof space whose points are a subset of ours."""
        return OperatorField(mof, {x: self[x] for x in mof.points})

    def extend(self, mof: MofSpace, fill: Callable | None = None) -> "OperatorField":
        """Extend to a larger mof space; new points get ``fill(x)`` (default zero)."""
        vals = {}
        for x in mof.points:
            if x in self.values:
                vals[x] = self.values[x]
            else:
                vals[x] = fill(x) if fill else alg.zero(mof.bundle[x])
        return OperatorField(mof, vals)

    @classmethod
    def unit(cls, mof: MofSpace) -> "OperatorField":
        return cls(mof, {x: mof.unit(x) for x in mof.points})

    @classmethod
    def zero(cls, mof: MofSpace) -> "OperatorField":
        return cls(mof, {x: alg.zero(mof.bundle[x]) for x in mof.points})

    def __repr__(self):
        return f"OperatorField({len(self.values)} points)"


class BiField:
    """A field on off-diagonal ordered pairs with values in ``A_x ⊗ A_y``."""

    __slots__ = ("mof", "values", "_norms")

    def __init__(self, mof: MofSpace, values: Mapping):
        object.__setattr__(self, "mof", mof)
        object.__setattr__(self, "values", dict(values))

    def __setattr__(self, name, value):
        raise AttributeError("BiField is immutable")

    def __getitem__(self, pair) -> AlgebraElement:
        return self.values[pair]

    def _pointwise(self, other, op):
        if not isinstance(other, BiField):
            return NotImplemented
        return BiField(self.mof, {k: op(v, other[k]) for k, v in self.values.items()})

    def __add__(self, other):
        return self._pointwise(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._pointwise(other, lambda a, b: a - b)

    def __mul__(self, c):
        return BiField(self.mof, {k: c * v for k, v in self.values.items()})

    __rmul__ = __mul__

    def sup_norm(self) -> float:
        return max((alg.operator_norm(v) for v in self.values.values()), default=0.0)


# ---------------------------------------------------------------------------
# Seminorms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LipReport:
    seminorm: float
    sup_norm: float
    commutes_with_D: bool
    argmax: tuple | None

    @property
    def lip(self) -> float:
        return self.sup_norm + self.seminorm

    @property
    def lip_prime(self) -> float:
        return max(self.sup_norm, self.seminorm)

    def to_dict(self) -> dict:
        return {
            "seminorm": self.seminorm,
            "sup_norm": self.sup_norm,
            "lip_norm": self.lip,
            "lip_prime_norm": self.lip_prime,
            "commutes_with_D": self.commutes_with_D,
            "argmax": None if self.argmax is None else [str(p) for p in self.argmax],
        }


def _kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n, m = a.shape[0], b.shape[0]
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(n * m, n * m)


def _lift_left(a: AlgebraElement, other) -> np.ndarray:
    return _kron(a.matrix, np.eye(other.total_dim))


def _lift_right(other, a: AlgebraElement) -> np.ndarray:
    return _kron(np.eye(other.total_dim), a.matrix)


def _lifts(f: "OperatorField", x, y) -> tuple[np.ndarray, np.ndarray]:
    m = f.mof
    return _lift_left(f[x], m.bundle[y]), _lift_right(m.bundle[x], f[y])


def delta(f: OperatorField, x, y) -> AlgebraElement:
    """``f(x) ⊗ 1 - 1 ⊗ f(y)``."""
    if x == y:
        raise SamePoint("delta needs two distinct points")
    left, right = _lifts(f, x, y)
    return AlgebraElement._wrap(f.mof.D(x, y).signature, left - right)


def _sandwich(f: OperatorField, x, y, left, right) -> AlgebraElement:
    s = f.mof.inv_sqrt(x, y).matrix
    return AlgebraElement._wrap(f.mof.D(x, y).signature, s @ (left - right) @ s)


def sandwich(f: OperatorField, x, y) -> AlgebraElement:
    """``D^{-1/2} (f(x) ⊗ 1 - 1 ⊗ f(y)) D^{-1/2}``."""
    if x == y:
        raise SamePoint("the sandwich needs two distinct points")
    return _sandwich(f, x, y, *_lifts(f, x, y))


def _commutation_defect(f: OperatorField, x, y, left, right) -> float:
    m = f.mof
    D = m.D(x, y)
    d = D.matrix
    sig = D.signature
    c1 = alg.operator_norm(AlgebraElement._wrap(sig, d @ left - left @ d))
    c2 = alg.operator_norm(AlgebraElement._wrap(sig, d @ right - right @ d))
    scale = 1.0 + m.D_norm(x, y) * max(f.norm_at(x), f.norm_at(y))
    return max(c1, c2) / scale


def _commutes_pair(f: OperatorField, x, y, left, right) -> bool:
    # The Frobenius norm bounds the operator norm, so a small one settles the test without an SVD.
    m = f.mof
    d = m.D(x, y).matrix
    scale = 1.0 + m.D_norm(x, y) * max(f.norm_at(x), f.norm_at(y))
    bound = m.tol.eq * scale
    if all(np.linalg.norm(d @ a - a @ d) <= bound for a in (left, right)):
        return True
    return _commutation_defect(f, x, y, left, right) <= m.tol.eq


def commutation_defect(f: OperatorField, x, y) -> float:
    """Largest of ``||[D, f(x) ⊗ 1]||`` and ``||[D, 1 ⊗ f(y)]||`` relative to the commuting tolerance."""
    return _commutation_defect(f, x, y, *_lifts(f, x, y))


def commutes_with_D(f: OperatorField) -> bool:
    return all(_commutes_pair(f, x, y, *_lifts(f, x, y)) for x, y in f.mof.pairs())


def lip_seminorm(f: OperatorField) -> LipReport:
    """``||f||_D`` as the largest sandwiched difference over unordered pairs.

    The two orientations of a pair give sandwiches that differ by a flip and a
    sign, so one orientation suffices.
    """
    m = f.mof
    best, where, commutes = 0.0, None, True
    for x, y in m.pairs():
        left, right = _lifts(f, x, y)
        val = alg.operator_norm(_sandwich(f, x, y, left, right))
        if where is None or val > best:
            best, where = val, (x, y)
        if commutes and not _commutes_pair(f, x, y, left, right):
            commutes = False
    return LipReport(best, f.sup_norm(), commutes, where)


def lip_seminorm_ordered(f: OperatorField) -> float:
    """Least ``r`` with ``|f(x) ⊗ 1 - 1 ⊗ f(y)| <= r D(x, y)``; needs ``f`` to commute with ``D``."""
    if not commutes_with_D(f):
        raise NotCommuting("the order formulation needs a field commuting with D")
    m = f.mof
    best = 0.0
    for x, y in m.pairs():
        s = m.inv_sqrt(x, y)
        best = max(best, alg.operator_norm(s @ alg.abs_element(delta(f, x, y)) @ s))
    return best


@dataclass(frozen=True)
class Membership:
    in_L: bool
    in_Lip: bool
    in_L0: bool | None
    in_Lip0: bool | None

    def to_dict(self) -> dict:
        return {"in_L": self.in_L, "in_Lip": self.in_Lip, "in_L0": self.in_L0, "in_Lip0": self.in_Lip0}


def membership(f: OperatorField, pointed: bool | None = None, report: LipReport | None = None) -> Membership:
    """Flags for ``L(D)``, ``Lip(D)`` and, on pointed spaces, ``L0(D)``, ``Lip0(D)``."""
    m = f.mof
    if pointed and m.base_point is None:
        raise NoBasePoint("pointed membership needs a base point")
    pointed = m.base_point is not None if pointed is None else pointed
    report = lip_seminorm(f) if report is None else report
    # Finite X: every field is bounded.
    in_L = bool(np.isfinite(report.seminorm))
    in_Lip = in_L and report.commutes_with_D
    if not pointed:
        return Membership(in_L, in_Lip, None, None)
    vanishes = alg.operator_norm(f[m.base_point]) <= m.tol.eq
    return Membership(in_L, in_Lip, in_L and vanishes, in_Lip and vanishes)


# ---------------------------------------------------------------------------
# Special fields
# ---------------------------------------------------------------------------


def scalar_field(c: Mapping | Callable, m: MofSpace) -> OperatorField:
    """``x -> c(x) 1_x``."""
    get = c if callable(c) else c.__getitem__
    return OperatorField(m, {x: complex(get(x)) * m.unit(x) for x in m.points})


@dataclass(frozen=True)
class ScalarFieldConstants:
    seminorm: float            # ||c~||_D
    norm_metric_constant: float  # Lipschitz constant of c for D^||.||
    inverse_constant: float    # sup |c(x) - c(y)| ||D(x,y)^{-1}||


def scalar_field_constants(c: Mapping, m: MofSpace) -> ScalarFieldConstants:
    """The seminorm of ``c~`` next to two classical Lipschitz constants of ``c``.

    ``||c~||_D`` always equals the third value; it equals the second exactly
    when every ``D(x, y)`` is scalar on pairs where the supremum is attained.
    """
    f = scalar_field(c, m)
    table = induced_metric_norm(m, check=False)
    inv = 0.0
    for x, y in m.pairs():
        inv = max(inv, abs(c[x] - c[y]) * alg.operator_norm(m.inverse(x, y)))
    return ScalarFieldConstants(lip_seminorm(f).seminorm, table.lipschitz_constant(c), inv)


def distance_field(m: MofSpace, x0, mu: State, check: bool = True) -> OperatorField:
    """``x -> (mu ⊗ id) D(x0, x)``; its seminorm never exceeds one."""
    f = OperatorField(m, {x: alg.partial_apply_left(mu, m.D(x0, x)) for x in m.points})
    if check:
        s = lip_seminorm(f).seminorm
        if s > 1.0 + m.tol.eq:
            raise TheoremViolation(f"distance field from {x0!r} has seminorm {s:.12g} > 1")
    return f


@dataclass(frozen=True)
class NonScalarWitness:
    base_point: object
    state: State
    block: int
    field: OperatorField
    nonscalar_at: object
    defect: float


def find_nonscalar_witness(m: MofSpace) -> NonScalarWitness:
    """A distance field that is not scalar valued, built from a character of a centre."""
    if not m.is_central():
        raise NotCentral("witness search needs a central mof")
    candidates = non_scalar_pairs(m)
    if not candidates:
        raise AllScalar("D is scalar valued")
    for x0, x1 in candidates:
        for base, other in ((x0, x1), (x1, x0)):
            sig = m.bundle[base]
            for b in range(len(alg.block_structure(sig).blocks)):
                mu = State.block(sig, b)
                if alg.is_scalar(alg.partial_apply_left(mu, m.D(base, other)), m.tol):
                    continue
                f = distance_field(m, base, mu)
                defects = {x: alg.scalar_defect(f[x]) for x in m.points}
                at = max(m.points, key=lambda x: defects[x])
                if defects[at] > m.tol.eq:
                    return NonScalarWitness(base, mu, b, f, at, defects[at])
    raise AllScalar("no character produced a non-scalar distance field")


def field_D_on_product(m: MofSpace):
    """``(x, y) -> D(x, y)`` as a field on ``D × D`` together with its LipReport."""
    if len(m.points) < 2:
        raise TooFewPoints("need at least two points")
    if not m.is_central():
        raise NotCentral("D as a Lipschitz field on D × D needs a central mof")
    P = product_mof(m, m)
    F = OperatorField(P, {(x, y): m.D(x, y) for x, y in P.points})
    report = lip_seminorm(F)
    if report.seminorm > 1.0 + m.tol.eq:
        raise TheoremViolation(f"||D||_(DxD) = {report.seminorm:.12g} > 1")
    return F, report


def normal_spectral_seminorm(f: OperatorField, check: bool = True) -> float:
    """``max |l - l'| / d(x, y)`` over eigenvalue pairs, for normal fields on scalar mofs."""
    m = f.mof
    if not m.is_scalar_valued():
        raise NotScalarMof("the spectral formula needs a scalar valued mof")
    for x in m.points:
        if not alg.is_normal(f[x], m.tol.eq):
            raise NotNormal(f"f({x!r}) is not normal")
    spectra = {x: alg.spectrum(f[x]) for x in m.points}
    best = 0.0
    for x, y in m.pairs():
        d = alg.scalar_part(m.D(x, y)).real
        gap = np.abs(spectra[x][:, None] - spectra[y][None, :]).max()
        best = max(best, float(gap) / d)
    if check:
        direct = lip_seminorm(f).seminorm
        if abs(direct - best) > m.tol.eq * max(1.0, best):
            raise TheoremViolation(f"spectral seminorm {best:.12g} != sandwich seminorm {direct:.12g}")
    return best


# ---------------------------------------------------------------------------
# de Leeuw map
# ---------------------------------------------------------------------------


def de_leeuw(f: OperatorField) -> BiField:
    """``Phi(f)(x, y) = D^{-1/2} (f(x) ⊗ 1 - 1 ⊗ f(y)) D^{-1/2}`` on ordered pairs."""
    return BiField(f.mof, {(x, y): sandwich(f, x, y) for x, y in f.mof.ordered_pairs()})


def bimodule_act(f: OperatorField, F: BiField, side: str = "left") -> BiField:
    """``(f.F)(x,y) = (f(x) ⊗ 1) F(x,y)``, ``(F.f)(x,y) = F(x,y) (1 ⊗ f(y))``."""
    m = f.mof
    out = {}
    for (x, y), w in F.values.items():
        if side == "left":
            out[(x, y)] = AlgebraElement._wrap(w.signature, _lift_left(f[x], m.bundle[y]) @ w.matrix)
        elif side == "right":
            out[(x, y)] = AlgebraElement._wrap(w.signature, w.matrix @ _lift_right(m.bundle[x], f[y]))
        else:
            raise ValueError("side must be 'left' or 'right'")
    return BiField(F.mof, out)


def inverse_field(m: MofSpace) -> BiField:
    return BiField(m, {(x, y): m.inverse(x, y) for x, y in m.ordered_pairs()})


def derivation_residual(f: OperatorField, g: OperatorField) -> float:
    """``||Phi(fg) - f.Phi(g) - Phi(f).g||_inf``."""
    lhs = de_leeuw(f @ g)
    rhs = bimodule_act(f, de_leeuw(g), "left") + bimodule_act(g, de_leeuw(f), "right")
    return (lhs - rhs).sup_norm()


def inner_residual(f: OperatorField, F: BiField | None = None) -> float:
    """``||Phi(f) - (f.F - F.f)||_inf`` with ``F = D^{-1}`` by default."""
    F = inverse_field(f.mof) if F is None else F
    return (de_leeuw(f) - (bimodule_act(f, F, "left") - bimodule_act(f, F, "right"))).sup_norm()


@dataclass(frozen=True)
class InnerWitnessReport:
    residuals: tuple
    excluded: tuple
    worst: float
    passed: bool

    def to_dict(self) -> dict:
        return {"residuals": list(self.residuals), "excluded": list(self.excluded),
                "worst": self.worst, "passed": self.passed}


def inner_witness_check(m: MofSpace, fields: Iterable[OperatorField]) -> InnerWitnessReport:
    """Check ``Phi(f) = f.D^{-1} - D^{-1}.f`` on the fields of the suite lying in ``Lip(D)``."""
    F = inverse_field(m)
    residuals, excluded = [], []
    for i, f in enumerate(fields):
        if not commutes_with_D(f):
            excluded.append(i)
            continue
        residuals.append(inner_residual(f, F) / max(1.0, de_leeuw(f).sup_norm()))
    worst = max(residuals, default=0.0)
    return InnerWitnessReport(tuple(residuals), tuple(excluded), worst, worst <= m.tol.eq)


@dataclass(frozen=True)
class RestrictionReport:
    residuals: tuple
    worst: float
    passed: bool

    def to_dict(self) -> dict:
        return {"residuals": list(self.residuals), "worst": self.worst, "passed": self.passed}


def restriction_isometry_check(m: MofSpace, fields: Sequence[OperatorField],
                               algebra_at_infinity=alg.AlgebraSignature((1,))) -> RestrictionReport:
    """Compare ``||g||_{D+}`` with ``max(||g|X||_D, ||g|X||_inf)`` for ``g`` vanishing at infinity."""
    label = INFINITY
    while label in m.index:
        label += "'"
    mplus = pointed_extension(m, algebra_at_infinity, label)
    residuals = []
    for f in fields:
        g = f.extend(mplus)
        if not membership(g, pointed=True).in_L0:
            raise TheoremViolation("extension by zero is not in L0(D+)")
        lhs = lip_seminorm(g).seminorm
        rhs = lip_seminorm(g.restrict(m)).lip_prime
        residuals.append(abs(lhs - rhs) / max(1.0, rhs))
    worst = max(residuals, default=0.0)
    return RestrictionReport(tuple(residuals), worst, worst <= m.tol.eq)


# ---------------------------------------------------------------------------
# Sampling fields
# ---------------------------------------------------------------------------


def commutant_basis(m: MofSpace, x) -> list[np.ndarray]:
    """Basis of ``{a in A_x : [D(x, y), a ⊗ 1] = 0 for all y != x}``."""
    sig = m.bundle[x]
    n = sig.total_dim
    units = []
    for b in alg.iter_blocks(sig):
        for i in b:
            for j in b:
                e = np.zeros((n, n), dtype=complex)
                e[i, j] = 1.0
                units.append(e)
    rows = []
    for y in m.points:
        if y == x:
            continue
        d = m.D(x, y).matrix
        eye = np.eye(m.bundle[y].total_dim)
        cols = []
        for e in units:
            lifted = np.kron(e, eye)
            cols.append((d @ lifted - lifted @ d).ravel())
        rows.append(np.stack(cols, axis=1))
    if not rows:
        return units
    C = np.vstack(rows)
    _, s, vh = np.linalg.svd(C, full_matrices=True)
    cutoff = 1e-10 * (s[0] if s.size and s[0] > 0 else 1.0)
    rank = int((s > cutoff).sum())
    null = vh[rank:].conj()
    return [np.tensordot(v, np.stack(units), axes=1) for v in null]


def random_commuting_field(m: MofSpace, rng: np.random.Generator, hermitian: bool = False,
                           vanish_at=None, bases: Mapping | None = None) -> OperatorField:
    """A random field commuting with ``D`` (drawn from the pointwise commutants)."""
    vals = {}
    for x in m.points:
        basis = commutant_basis(m, x) if bases is None else bases[x]
        c = rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
        a = np.tensordot(c, np.stack(basis), axes=1) if basis else np.zeros((m.bundle[x].total_dim,) * 2)
        if hermitian:
            a = 0.5 * (a + a.conj().T)
        if x == vanish_at:
            a = np.zeros_like(a)
        vals[x] = AlgebraElement(m.bundle[x], a)
    return OperatorField(m, vals)


def commutant_bases(m: MofSpace) -> dict:
    return {x: commutant_basis(m, x) for x in m.points}


def random_field(m: MofSpace, rng: np.random.Generator, hermitian: bool = False) -> OperatorField:
    make = alg.random_hermitian if hermitian else alg.random_element
    return OperatorField(m, {x: make(m.bundle[x], rng) for x in m.points})


def random_normal_field(m: MofSpace, rng: np.random.Generator) -> OperatorField:
    vals = {}
    for x in m.points:
        sig = m.bundle[x]
        u = alg.random_unitary(sig, rng)
        lam = rng.normal(size=sig.total_dim) + 1j * rng.normal(size=sig.total_dim)
        vals[x] = u @ alg.diag(sig, lam) @ u.adjoint()
    return OperatorField(m, vals)
