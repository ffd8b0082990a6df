"""Finite-dimensional C*-algebra arithmetic.

Every algebra is a finite direct sum of full matrix algebras, stored as
block-diagonal complex matrices inside ``M_N``.  Tensor products are
Kronecker products; their blocks are the index sets of products of factor
blocks, which are generally not contiguous.  All numerical routines work block
by block, batching blocks of equal size.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    NotInvertible,
    NotPositive,
    NotTwoFactor,
    StructureViolation,
)


@dataclass(frozen=True)
class ToleranceConfig:
    """Dimensionless thresholds used by every check in the package.

    ``psd`` and ``inv`` are relative to the operator norm of the element being
    tested; ``struct`` is relative to the largest entry of a matrix; ``atom``
    is the spectral clustering width (relative to ``||a||``) and ``weight`` the
    smallest weight counted in an essential supremum.
    """

    psd: float = 1e-9
    inv: float = 1e-9
    eq: float = 1e-8
    struct: float = 1e-10
    atom: float = 1e-8
    weight: float = 1e-10

    def __post_init__(self):
        for name in ("psd", "inv", "eq", "struct", "atom", "weight"):
            if not getattr(self, name) > 0:
                raise ValueError(f"tolerance {name!r} must be strictly positive")
        if self.inv < self.psd:
            raise ValueError("tolerance 'inv' must be >= 'psd'")

    def with_overrides(self, **overrides) -> "ToleranceConfig":
        return replace(self, **overrides)


DEFAULT_TOL = ToleranceConfig()


# ---------------------------------------------------------------------------
# Signatures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AlgebraSignature:
    """``M_{n_1} + ... + M_{n_k}`` with contiguous diagonal blocks."""

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(int(b) for b in self.blocks)
        if not blocks or any(b < 1 for b in blocks):
            raise StructureViolation(f"invalid block list {self.blocks!r}")
        object.__setattr__(self, "blocks", blocks)

    @property
    def total_dim(self) -> int:
        return sum(self.blocks)

    @property
    def leaves(self) -> tuple:
        return (self,)

    def commutative(self) -> bool:
        return all(b == 1 for b in self.blocks)

    @property
    def center_dim(self) -> int:
        return len(self.blocks)

    def __str__(self):
        return "+".join("C" if b == 1 else f"M{b}" for b in self.blocks)


@dataclass(frozen=True)
class TensorSignature:
    """Spatial tensor product of the factor algebras (Kronecker ordering)."""

    factors: tuple

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise StructureViolation("a tensor signature needs at least one factor")
        object.__setattr__(self, "factors", factors)

    @property
    def total_dim(self) -> int:
        return math.prod(f.total_dim for f in self.factors)

    @property
    def leaves(self) -> tuple:
        return tuple(leaf for f in self.factors for leaf in f.leaves)

    def commutative(self) -> bool:
        return all(f.commutative() for f in self.factors)

    @property
    def center_dim(self) -> int:
        return math.prod(f.center_dim for f in self.factors)

    def __str__(self):
        return "(" + " ⊗ ".join(str(f) for f in self.factors) + ")"


Signature = Union[AlgebraSignature, TensorSignature]


def signature(blocks: Sequence[int]) -> AlgebraSignature:
    return AlgebraSignature(tuple(blocks))


def tensor_signature(*factors: Signature) -> TensorSignature:
    return TensorSignature(tuple(factors))


@dataclass(frozen=True)
class _Structure:
    dim: int
    blocks: tuple  # tuple of sorted index arrays, one per minimal central projection
    groups: tuple  # tuple of (size, int array of shape (count, size))
    mask: np.ndarray = field(repr=False)


@functools.lru_cache(maxsize=4096)
def block_structure(sig: Signature) -> _Structure:
    if isinstance(sig, AlgebraSignature):
        offsets = np.cumsum((0,) + sig.blocks)
        blocks = tuple(np.arange(offsets[i], offsets[i + 1]) for i in range(len(sig.blocks)))
    else:
        subs = [block_structure(f) for f in sig.factors]
        dims = [s.dim for s in subs]
        strides = [math.prod(dims[j + 1:]) for j in range(len(dims))]
        blocks = []
        for combo in itertools.product(*(s.blocks for s in subs)):
            idx = np.zeros(1, dtype=np.int64)
            for part, stride in zip(combo, strides):
                idx = (idx[:, None] + part[None, :] * stride).ravel()
            blocks.append(idx)
        blocks = tuple(blocks)
    dim = sig.total_dim
    by_size: dict[int, list] = {}
    for b in blocks:
        by_size.setdefault(len(b), []).append(b)
    groups = tuple((s, np.stack(bs)) for s, bs in sorted(by_size.items()))
    mask = np.zeros((dim, dim), dtype=bool)
    for b in blocks:
        mask[np.ix_(b, b)] = True
    mask.setflags(write=False)
    return _Structure(dim, blocks, groups, mask)


def _gather(matrix: np.ndarray, idx: np.ndarray) -> np.ndarray:
    return matrix[idx[:, :, None], idx[:, None, :]]


# ---------------------------------------------------------------------------
# Elements
# ---------------------------------------------------------------------------


class AlgebraElement:
    """Immutable element of a finite-dimensional C*-algebra.

    Use :func:`make_element` (or the constructor) to validate block support.
    ``@`` is the algebra product, ``*`` scales by a complex number.
    """

    __slots__ = ("signature", "matrix")

    def __init__(self, signature: Signature, matrix, *, tol: ToleranceConfig = DEFAULT_TOL):
        m = np.array(matrix, dtype=complex)
        n = signature.total_dim
        if m.shape != (n, n):
            raise DimensionMismatch(f"expected {n}x{n} matrix for {signature}, got shape {m.shape}")
        mask = block_structure(signature).mask
        if not mask.all():
            off = np.abs(m[~mask])
            worst = float(off.max()) if off.size else 0.0
            scale = max(1.0, float(np.abs(m).max()))
            if worst > tol.struct * scale:
                raise StructureViolation(
                    f"off-block entry of size {worst:.3g} for signature {signature}"
                )
            m[~mask] = 0.0
        m.setflags(write=False)
        object.__setattr__(self, "signature", signature)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def _wrap(cls, signature: Signature, matrix: np.ndarray) -> "AlgebraElement":
        """Trusted constructor: ``matrix`` is already block supported."""
        obj = cls.__new__(cls)
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.flags.writeable:
            matrix.setflags(write=False)
        object.__setattr__(obj, "signature", signature)
        object.__setattr__(obj, "matrix", matrix)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("AlgebraElement is immutable")

    # arithmetic -----------------------------------------------------------
    def _check(self, other: "AlgebraElement"):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        if other.signature != self.signature:
            raise DimensionMismatch(f"signature mismatch: {self.signature} vs {other.signature}")
        return None

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement._wrap(self.signature, self.matrix + other.matrix)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement._wrap(self.signature, self.matrix - other.matrix)

    def __neg__(self):
        return AlgebraElement._wrap(self.signature, -self.matrix)

    def __matmul__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement._wrap(self.signature, self.matrix @ other.matrix)

    def __mul__(self, c):
        if isinstance(c, AlgebraElement):
            return NotImplemented
        return AlgebraElement._wrap(self.signature, complex(c) * self.matrix)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / complex(c))

    def adjoint(self) -> "AlgebraElement":
        return AlgebraElement._wrap(self.signature, self.matrix.conj().T)

    @property
    def H(self) -> "AlgebraElement":
        return self.adjoint()

    def norm(self) -> float:
        return operator_norm(self)

    @property
    def dim(self) -> int:
        return self.signature.total_dim

    def __repr__(self):
        return f"AlgebraElement({self.signature}, shape={self.matrix.shape})"


def make_element(sig: Signature, matrix, tol: ToleranceConfig = DEFAULT_TOL) -> AlgebraElement:
    return AlgebraElement(sig, matrix, tol=tol)


def unit(sig: Signature) -> AlgebraElement:
    return AlgebraElement._wrap(sig, np.eye(sig.total_dim, dtype=complex))


def zero(sig: Signature) -> AlgebraElement:
    return AlgebraElement._wrap(sig, np.zeros((sig.total_dim,) * 2, dtype=complex))


def diag(sig: Signature, values) -> AlgebraElement:
    return AlgebraElement._wrap(sig, np.diag(np.asarray(values, dtype=complex)))


def block_identity(sig: Signature, index: int) -> AlgebraElement:
    """Minimal central projection of block ``index``."""
    b = block_structure(sig).blocks[index]
    m = np.zeros((sig.total_dim,) * 2, dtype=complex)
    m[b, b] = 1.0
    return AlgebraElement._wrap(sig, m)


def mul(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    return a @ b


def add(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    return a + b


def scale(c: complex, a: AlgebraElement) -> AlgebraElement:
    return c * a


def adjoint(a: AlgebraElement) -> AlgebraElement:
    return a.adjoint()


# ---------------------------------------------------------------------------
# Spectral routines
# ---------------------------------------------------------------------------


def operator_norm(a: AlgebraElement) -> float:
    """Largest singular value, computed block by block."""
    best = 0.0
    for _, idx in block_structure(a.signature).groups:
        sub = _gather(a.matrix, idx)
        if sub.shape[-1] == 1:
            val = float(np.abs(sub).max())
        else:
            val = float(np.linalg.svd(sub, compute_uv=False)[:, 0].max())
        best = max(best, val)
    return best


def spectrum(a: AlgebraElement) -> np.ndarray:
    """Eigenvalues with multiplicity, as the union of the per-block spectra."""
    parts = [np.linalg.eigvals(_gather(a.matrix, idx)).ravel()
             for _, idx in block_structure(a.signature).groups]
    vals = np.concatenate(parts)
    return vals[np.lexsort((vals.imag, vals.real))]


def hermitian_defect(a: AlgebraElement) -> float:
    return float(np.abs(a.matrix - a.matrix.conj().T).max()) if a.dim else 0.0


def is_hermitian(a: AlgebraElement, rel_tol: float = DEFAULT_TOL.psd) -> bool:
    return hermitian_defect(a) <= rel_tol * operator_norm(a)


def blockwise_eigh(a: AlgebraElement):
    """Yield ``(idx, evals, evecs)`` per group of equal-size blocks of the Hermitian part."""
    herm = 0.5 * (a.matrix + a.matrix.conj().T)
    for _, idx in block_structure(a.signature).groups:
        w, v = np.linalg.eigh(_gather(herm, idx))
        yield idx, w, v


def eigvalsh(a: AlgebraElement) -> np.ndarray:
    """Sorted eigenvalues of the Hermitian part of ``a``."""
    herm = 0.5 * (a.matrix + a.matrix.conj().T)
    parts = [np.linalg.eigvalsh(_gather(herm, idx)).ravel()
             for _, idx in block_structure(a.signature).groups]
    return np.sort(np.concatenate(parts))


def min_eigenvalue(a: AlgebraElement) -> float:
    return float(eigvalsh(a)[0])


def is_positive(a: AlgebraElement, tol: float = DEFAULT_TOL.psd) -> bool:
    nrm = operator_norm(a)
    if hermitian_defect(a) > tol * nrm:
        return False
    return min_eigenvalue(a) >= -tol * nrm


def is_positive_invertible(a: AlgebraElement, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    nrm = operator_norm(a)
    if hermitian_defect(a) > tol.psd * nrm:
        return False
    return min_eigenvalue(a) > tol.inv * nrm


def _from_eigh(a: AlgebraElement, fn) -> AlgebraElement:
    out = np.zeros_like(a.matrix)
    for idx, w, v in blockwise_eigh(a):
        sub = np.einsum("bij,bj,bkj->bik", v, fn(w), v.conj())
        out[idx[:, :, None], idx[:, None, :]] = sub
    return AlgebraElement._wrap(a.signature, out)


def psd_power(a: AlgebraElement, p: float, tol: ToleranceConfig = DEFAULT_TOL) -> AlgebraElement:
    """``a**p`` for positive ``a``; negative eigenvalue dust is clamped to zero."""
    if not is_positive(a, tol.psd):
        raise NotPositive(f"element is not positive (min eigenvalue {min_eigenvalue(a):.3g})")
    if p < 0 and not is_positive_invertible(a, tol):
        raise NotInvertible(f"negative power of a non-invertible element (p={p})")

    def fn(w):
        w = np.maximum(w, 0.0)
        if p == 0:
            return np.ones_like(w)
        return w ** p

    return _from_eigh(a, fn)


def hermitian_function(a: AlgebraElement, fn) -> AlgebraElement:
    """Apply a real function to the Hermitian part of ``a`` by functional calculus."""
    return _from_eigh(a, fn)


def abs_element(a: AlgebraElement) -> AlgebraElement:
    """``|a| = (a* a)^{1/2}``, taken from a per-block SVD ``a = U S V*`` as ``V S V*``."""
    out = np.zeros_like(a.matrix)
    for _, idx in block_structure(a.signature).groups:
        _, s, vh = np.linalg.svd(_gather(a.matrix, idx))
        sub = np.einsum("bji,bj,bjk->bik", vh.conj(), s, vh)
        out[idx[:, :, None], idx[:, None, :]] = sub
    return AlgebraElement._wrap(a.signature, out)


def is_normal(a: AlgebraElement, rel_tol: float = DEFAULT_TOL.eq) -> bool:
    m = a.matrix
    defect = np.abs(m @ m.conj().T - m.conj().T @ m).max() if a.dim else 0.0
    return defect <= rel_tol * max(operator_norm(a) ** 2, 1e-300)


# ---------------------------------------------------------------------------
# Centre and scalars
# ---------------------------------------------------------------------------


def center_defect(a: AlgebraElement) -> float:
    """Largest Frobenius distance of a block component from a scalar multiple of its unit."""
    worst = 0.0
    for size, idx in block_structure(a.signature).groups:
        sub = _gather(a.matrix, idx)
        c = np.trace(sub, axis1=1, axis2=2) / size
        resid = sub - c[:, None, None] * np.eye(size)
        worst = max(worst, float(np.sqrt((np.abs(resid) ** 2).sum(axis=(1, 2))).max()))
    return worst


def in_center(a: AlgebraElement, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    return center_defect(a) <= tol.eq * max(1.0, operator_norm(a))


def is_central(w: AlgebraElement, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Whether ``w`` lies in ``Z(A) ⊗ Z(B)`` (which equals the centre of ``A ⊗ B``)."""
    _two_factors(w)
    return in_center(w, tol)


def scalar_part(a: AlgebraElement) -> complex:
    return complex(np.trace(a.matrix) / a.dim)


def scalar_defect(a: AlgebraElement) -> float:
    """``||a - (tr a / N) 1||``."""
    return operator_norm(a - scalar_part(a) * unit(a.signature))


def is_scalar(a: AlgebraElement, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    return scalar_defect(a) <= tol.eq * max(1.0, operator_norm(a))


def distance_to_scalars(a: AlgebraElement) -> float:
    """``min_c ||a - c 1||``; exact for Hermitian ``a``, numerical otherwise."""
    if hermitian_defect(a) <= 1e-12 * max(1.0, operator_norm(a)):
        ev = eigvalsh(a)
        return float(ev[-1] - ev[0]) / 2.0
    from scipy.optimize import minimize

    one = unit(a.signature)
    c0 = scalar_part(a)
    res = minimize(lambda z: operator_norm(a - complex(z[0], z[1]) * one),
                   x0=[c0.real, c0.imag], method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-13, "maxiter": 4000})
    return float(res.fun)


# ---------------------------------------------------------------------------
# Tensor calculus
# ---------------------------------------------------------------------------


def _two_factors(w: AlgebraElement) -> tuple:
    sig = w.signature
    if not isinstance(sig, TensorSignature) or len(sig.factors) != 2:
        raise NotTwoFactor(f"expected an element of a two-factor tensor product, got {sig}")
    return sig.factors


def tensor(*elements: AlgebraElement) -> AlgebraElement:
    """Kronecker product; the signature keeps the given factors as its top level."""
    if len(elements) < 2:
        raise ValueError("tensor needs at least two elements")
    m = elements[0].matrix
    for e in elements[1:]:
        m = np.kron(m, e.matrix)
    return AlgebraElement._wrap(TensorSignature(tuple(e.signature for e in elements)), m)


def permute_factors(w: AlgebraElement, perm: Sequence[int]) -> AlgebraElement:
    """Reorder the top-level tensor factors of ``w``: new factor ``j`` is old factor ``perm[j]``."""
    sig = w.signature
    if not isinstance(sig, TensorSignature):
        raise NotTwoFactor(f"expected a tensor signature, got {sig}")
    k = len(sig.factors)
    perm = list(perm)
    if sorted(perm) != list(range(k)):
        raise ValueError(f"invalid permutation {perm} for {k} factors")
    dims = [f.total_dim for f in sig.factors]
    t = w.matrix.reshape(dims + dims)
    t = t.transpose(perm + [k + p for p in perm])
    n = sig.total_dim
    new_sig = TensorSignature(tuple(sig.factors[p] for p in perm))
    return AlgebraElement._wrap(new_sig, np.ascontiguousarray(t).reshape(n, n))


def flip(w: AlgebraElement) -> AlgebraElement:
    """The flip ``A ⊗ B -> B ⊗ A``: conjugation by the commutation matrix."""
    _two_factors(w)
    return permute_factors(w, [1, 0])


def insert_unit_middle(w: AlgebraElement, middle: Signature) -> AlgebraElement:
    """``a ⊗ c -> a ⊗ 1_B ⊗ c`` extended linearly."""
    a_sig, c_sig = _two_factors(w)
    n, k, m = a_sig.total_dim, c_sig.total_dim, middle.total_dim
    t = w.matrix.reshape(n, k, n, k)
    out = np.einsum("ikjl,mp->imkjpl", t, np.eye(m))
    new_sig = TensorSignature((a_sig, middle, c_sig))
    return AlgebraElement._wrap(new_sig, out.reshape(n * m * k, n * m * k))


def regroup(w: AlgebraElement, sig: Signature) -> AlgebraElement:
    """Reinterpret ``w`` under a different bracketing of the same leaf factors."""
    if w.signature.leaves != sig.leaves:
        raise DimensionMismatch(f"cannot regroup {w.signature} as {sig}")
    return AlgebraElement._wrap(sig, w.matrix)


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------


class State:
    """State ``a -> trace(rho a)`` given by a block-supported density matrix."""

    __slots__ = ("signature", "rho")

    def __init__(self, signature: Signature, rho, *, tol: ToleranceConfig = DEFAULT_TOL):
        el = AlgebraElement(signature, rho, tol=tol)
        if not is_positive(el, tol.psd):
            raise NotPositive("density matrix is not positive semidefinite")
        tr = np.trace(el.matrix)
        if abs(tr - 1.0) > max(tol.psd, 1e-12):
            raise NotPositive(f"density matrix has trace {tr:.6g}, expected 1")
        object.__setattr__(self, "signature", signature)
        object.__setattr__(self, "rho", el.matrix)

    @classmethod
    def _wrap(cls, signature: Signature, rho: np.ndarray) -> "State":
        obj = cls.__new__(cls)
        rho = np.asarray(rho, dtype=complex)
        rho.setflags(write=False)
        object.__setattr__(obj, "signature", signature)
        object.__setattr__(obj, "rho", rho)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("State is immutable")

    @classmethod
    def maximally_mixed(cls, sig: Signature) -> "State":
        n = sig.total_dim
        return cls._wrap(sig, np.eye(n, dtype=complex) / n)

    @classmethod
    def vector(cls, sig: Signature, index: int) -> "State":
        """Vector state at basis vector ``index``."""
        rho = np.zeros((sig.total_dim,) * 2, dtype=complex)
        rho[index, index] = 1.0
        return cls._wrap(sig, rho)

    @classmethod
    def block(cls, sig: Signature, index: int) -> "State":
        """Normalised minimal central projection; a character on the centre."""
        p = block_identity(sig, index).matrix
        return cls._wrap(sig, p / np.trace(p).real)

    def __call__(self, a: AlgebraElement) -> complex:
        return apply_state(self, a)

    def element(self) -> AlgebraElement:
        return AlgebraElement._wrap(self.signature, self.rho)

    def __repr__(self):
        return f"State({self.signature})"


def apply_state(mu: State, a: AlgebraElement) -> complex:
    if mu.signature != a.signature:
        raise DimensionMismatch(f"state on {mu.signature} applied to element of {a.signature}")
    return complex(np.einsum("ij,ji->", mu.rho, a.matrix))


def partial_apply_left(mu: State, w: AlgebraElement) -> AlgebraElement:
    """``(mu ⊗ id)(w)``."""
    a_sig, b_sig = _two_factors(w)
    if a_sig != mu.signature:
        raise DimensionMismatch(f"state on {mu.signature} applied to left factor {a_sig}")
    n, m = a_sig.total_dim, b_sig.total_dim
    out = np.einsum("ji,ikjl->kl", mu.rho, w.matrix.reshape(n, m, n, m))
    return AlgebraElement._wrap(b_sig, out)


def tensor_state(mu: State, nu: State) -> State:
    return State._wrap(TensorSignature((mu.signature, nu.signature)), np.kron(mu.rho, nu.rho))


# ---------------------------------------------------------------------------
# Random samplers
# ---------------------------------------------------------------------------


def _fill_blocks(sig: Signature, make) -> np.ndarray:
    out = np.zeros((sig.total_dim,) * 2, dtype=complex)
    for b in block_structure(sig).blocks:
        out[np.ix_(b, b)] = make(len(b))
    return out


def random_element(sig: Signature, rng: np.random.Generator) -> AlgebraElement:
    return AlgebraElement._wrap(
        sig, _fill_blocks(sig, lambda n: rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))))


def random_hermitian(sig: Signature, rng: np.random.Generator) -> AlgebraElement:
    g = random_element(sig, rng)
    return 0.5 * (g + g.adjoint())


def random_psd(sig: Signature, rng: np.random.Generator) -> AlgebraElement:
    g = random_element(sig, rng)
    return g.adjoint() @ g


def random_unitary(sig: Signature, rng: np.random.Generator) -> AlgebraElement:
    def make(n):
        q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
        return q * (np.diag(r) / np.abs(np.diag(r)))

    return AlgebraElement._wrap(sig, _fill_blocks(sig, make))


def random_state(sig: Signature, rng: np.random.Generator) -> State:
    p = random_psd(sig, rng).matrix
    return State._wrap(sig, p / np.trace(p).real)


def elements_close(a: AlgebraElement, b: AlgebraElement, atol: float) -> bool:
    return a.signature.leaves == b.signature.leaves and bool(np.abs(a.matrix - b.matrix).max() <= atol)


def iter_blocks(sig: Signature) -> Iterable[np.ndarray]:
    return iter(block_structure(sig).blocks)
