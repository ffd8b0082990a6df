"""Seeded mof factories used by the test corpus and the CLI ``example`` command."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import algebra as alg
from .algebra import AlgebraSignature, State
from .mof import (
    MofSpace,
    QuotientModel,
    combine_linear,
    combine_p,
    pointed_extension,
    product_mof,
    quotient_model,
    rescale,
    scalar_mof,
    staircase_model,
)

BUILDERS = ("quotient", "staircase", "scalar", "linear", "pcomb", "product", "pointed")

_SMALL_SIGS = ((1,), (2,), (1, 1), (2, 1))


@dataclass(frozen=True)
class Instance:
    kind: str
    seed: int
    mof: MofSpace
    model: QuotientModel | None = None

    @property
    def label(self) -> str:
        return f"{self.kind}-{self.seed}"


def _plane_metric(rng: np.random.Generator, n: int) -> np.ndarray:
    pts = rng.uniform(0.0, 1.0, size=(n, 2))
    return np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)


def random_quotient_model(rng: np.random.Generator, n_points: int | None = None,
                          n_classes: int | None = None, mixed: bool = True,
                          central: bool = False) -> QuotientModel:
    """Random planar points cut into classes; embeddings mix diagonal, full-matrix and central corners.

    ``central`` skips the full-matrix corner, so the result is a central mof.
    """
    n = int(rng.integers(3, 7)) if n_points is None else n_points
    k = int(rng.integers(2, min(n, 4) + 1)) if n_classes is None else n_classes
    labels = np.concatenate([np.arange(k), rng.integers(0, k, size=n - k)])
    rng.shuffle(labels)
    partition = [[int(j) for j in np.flatnonzero(labels == c)] for c in range(k)]
    R = _plane_metric(rng, n)
    sigs = []
    for cls in partition:
        size = len(cls)
        choice = int(rng.integers(0, 3)) if mixed else 0
        if choice == 1 and size >= 2 and not central:
            sigs.append(AlgebraSignature((size,)))          # diagonal of a full matrix algebra
        elif choice == 2 and size <= 3:
            blocks = tuple(int(b) for b in rng.integers(1, 3, size=size))
            if sum(blocks) > 4:
                blocks = (1,) * size
            sigs.append(AlgebraSignature(blocks))           # block identities: the centre
        else:
            sigs.append(AlgebraSignature((1,) * size))
    return quotient_model(range(n), R, partition, embeddings=sigs)


def quotient_instance(seed: int) -> Instance:
    model = random_quotient_model(np.random.default_rng(seed))
    return Instance("quotient", seed, model.mof(), model)


def staircase_instance(seed: int) -> Instance:
    n_max = 1 + seed % 3
    mesh = 1 + (seed // 3) % 2
    model = staircase_model(n_max, mesh)
    return Instance("staircase", seed, model.mof(), model)


def random_scalar_mof(rng: np.random.Generator, n: int | None = None, bundle=None) -> MofSpace:
    n = int(rng.integers(2, 6)) if n is None else n
    points = [f"p{i}" for i in range(n)]
    if bundle is None:
        bundle = {p: AlgebraSignature(_SMALL_SIGS[int(rng.integers(len(_SMALL_SIGS)))]) for p in points}
    else:
        bundle = {p: bundle[p] for p in points}
    R = _plane_metric(rng, n)
    d = {(x, y): R[i, j] for i, x in enumerate(points) for j, y in enumerate(points)}
    states = {p: alg.random_state(bundle[p], rng) for p in points}
    return scalar_mof(points, bundle, lambda x, y: d[(x, y)], states)


def scalar_instance(seed: int) -> Instance:
    return Instance("scalar", seed, random_scalar_mof(np.random.default_rng(seed)))


def _scalar_partner(m: MofSpace, rng: np.random.Generator) -> MofSpace:
    R = _plane_metric(rng, len(m.points))
    idx = m.index
    states = {p: State.maximally_mixed(m.bundle[p]) for p in m.points}
    return scalar_mof(m.points, m.bundle, lambda x, y: R[idx[x], idx[y]], states)


def linear_instance(seed: int) -> Instance:
    rng = np.random.default_rng(seed)
    model = random_quotient_model(rng)
    m1 = model.mof()
    r = float(rng.uniform(0.5, 2.0))
    return Instance("linear", seed, combine_linear(m1, _scalar_partner(m1, rng), r), model)


def pcomb_instance(seed: int) -> Instance:
    rng = np.random.default_rng(seed)
    model = random_quotient_model(rng, central=True)
    m1 = model.mof()
    p = float(rng.uniform(1.0, 3.0))
    return Instance("pcomb", seed, combine_p(m1, _scalar_partner(m1, rng), p), model)


def _small_factor(rng: np.random.Generator) -> MofSpace:
    if rng.integers(2):
        return random_quotient_model(rng, n_points=int(rng.integers(2, 4)), n_classes=2, mixed=False).mof()
    bundle = {f"p{i}": AlgebraSignature(((1,), (1, 1))[int(rng.integers(2))]) for i in range(2)}
    return random_scalar_mof(rng, 2, bundle)


def product_instance(seed: int) -> Instance:
    rng = np.random.default_rng(seed)
    return Instance("product", seed, product_mof(_small_factor(rng), _small_factor(rng)))


def bounded_copy(m: MofSpace, bound: float = 2.0) -> MofSpace:
    """Rescale so that ``sup ||D|| <= bound``."""
    s = m.norm_bound()
    return m if s <= bound else rescale(m, bound / s)


def pointed_instance(seed: int) -> Instance:
    rng = np.random.default_rng(seed)
    model = random_quotient_model(rng)
    base = bounded_copy(model.mof(), float(rng.uniform(1.0, 2.0)))
    a_inf = AlgebraSignature(_SMALL_SIGS[int(rng.integers(len(_SMALL_SIGS)))])
    return Instance("pointed", seed, pointed_extension(base, a_inf), model)


FACTORIES = {
    "quotient": quotient_instance,
    "staircase": staircase_instance,
    "scalar": scalar_instance,
    "linear": linear_instance,
    "pcomb": pcomb_instance,
    "product": product_instance,
    "pointed": pointed_instance,
}


def make_instance(kind: str, seed: int) -> Instance:
    try:
        return FACTORIES[kind](seed)
    except KeyError:
        raise ValueError(f"unknown builder {kind!r}; choose from {BUILDERS}") from None


def corpus(kinds=BUILDERS, n: int = 20, base_seed: int = 0) -> list[Instance]:
    return [make_instance(k, base_seed + i) for k in kinds for i in range(n)]


def e2_model() -> QuotientModel:
    """Three points on a line, two classes: the smallest non-scalar central example."""
    return quotient_model([0, 1, 2], lambda a, b: abs(a - b), [[0, 1], [2]])
