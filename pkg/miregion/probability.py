"""Finite probability arithmetic: pmfs, channels, entropies in bits."""

import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.special import entr

from .errors import (
    AlphabetTooLarge,
    DimensionMismatch,
    EmptyMatrix,
    MassDeviationTooLarge,
    NegativeEntry,
    PmfValidationError,
)

logger = logging.getLogger(__name__)

SUPPORT_TOL = 1e-12
MASS_TOL = 1e-9
ROW_TOL = 1e-9
LN2 = float(np.log(2.0))


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class JointPmf:
    """Validated joint pmf p(x,y) over named alphabets. Build with `validate_pmf`."""

    x_alphabet: tuple[str, ...]
    y_alphabet: tuple[str, ...]
    p: np.ndarray
    mass_deviation: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "p", _frozen(self.p))

    @property
    def nx(self) -> int:
        return self.p.shape[0]

    @property
    def ny(self) -> int:
        return self.p.shape[1]

    @property
    def px(self) -> np.ndarray:
        return self.p.sum(axis=1)

    @property
    def py(self) -> np.ndarray:
        return self.p.sum(axis=0)

    @property
    def support(self) -> np.ndarray:
        return self.p > SUPPORT_TOL

    @property
    def default_u_size(self) -> int:
        return self.nx * self.ny + 2

    def transpose(self) -> "JointPmf":
        return JointPmf(self.y_alphabet, self.x_alphabet, self.p.T, self.mass_deviation)


@dataclass(frozen=True, eq=False)
class Channel:
    """Conditional pmf q(u|x,y) stored as an |X| x |Y| x |U| array."""

    q: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        if q.ndim != 3 or q.shape[2] < 1:
            raise DimensionMismatch(f"channel must be |X| x |Y| x |U|, got shape {q.shape}")
        if (q < -1e-12).any():
            raise NegativeEntry("channel has negative entries")
        q = np.clip(q, 0.0, None)
        rows = q.sum(axis=2)
        if np.abs(rows - 1.0).max() > ROW_TOL:
            raise PmfValidationError(
                f"channel rows must sum to 1 (worst deviation {np.abs(rows - 1.0).max():.3e})"
            )
        object.__setattr__(self, "q", _frozen(q / rows[:, :, None]))

    @property
    def u_size(self) -> int:
        return self.q.shape[2]

    def check_source(self, p: JointPmf) -> None:
        if self.q.shape[:2] != p.p.shape:
            raise DimensionMismatch(
                f"channel is for a {self.q.shape[0]}x{self.q.shape[1]} source, pmf is {p.nx}x{p.ny}"
            )


@dataclass(frozen=True, eq=False)
class TriplePmf:
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", _frozen(self.p))


class MiPoint(NamedTuple):
    """(I(X;U), I(Y;U), I(X,Y;U)) in bits."""

    v_x: float
    v_y: float
    v_xy: float

    def dot(self, b) -> float:
        return float(np.dot(np.asarray(b, dtype=float), self))

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=float)

    @classmethod
    def of(cls, arr) -> "MiPoint":
        return cls(*(float(a) for a in arr))


@dataclass(frozen=True)
class EntropyProfile:
    """The seven joint entropies of (X,Y,U); every quantity below is a combination of them."""

    h_x: float
    h_y: float
    h_u: float
    h_xy: float
    h_xu: float
    h_yu: float
    h_xyu: float

    @property
    def point(self) -> MiPoint:
        return MiPoint(self.i_xu, self.i_yu, self.i_xyu)

    @property
    def i_xu(self) -> float:
        return self.h_x + self.h_u - self.h_xu

    @property
    def i_yu(self) -> float:
        return self.h_y + self.h_u - self.h_yu

    @property
    def i_xyu(self) -> float:
        return self.h_xy + self.h_u - self.h_xyu

    @property
    def i_xy(self) -> float:
        return self.h_x + self.h_y - self.h_xy

    @property
    def i_xy_given_u(self) -> float:
        return self.h_xu + self.h_yu - self.h_u - self.h_xyu

    @property
    def i_yu_given_x(self) -> float:
        return self.h_xu + self.h_xy - self.h_x - self.h_xyu

    @property
    def i_xu_given_y(self) -> float:
        return self.h_yu + self.h_xy - self.h_y - self.h_xyu

    @property
    def h_x_given_yu(self) -> float:
        return self.h_xyu - self.h_yu

    @property
    def h_y_given_xu(self) -> float:
        return self.h_xyu - self.h_xu

    @property
    def h_u_given_x(self) -> float:
        return self.h_xu - self.h_x

    @property
    def h_u_given_y(self) -> float:
        return self.h_yu - self.h_y

    @property
    def h_x_given_u(self) -> float:
        return self.h_xu - self.h_u

    @property
    def h_y_given_u(self) -> float:
        return self.h_yu - self.h_u


def entropy(dist) -> float:
    """H = sum l(p_i) in bits with l(t) = -t log2 t and l(0) = 0. Works on any array shape."""
    total = float(entr(np.asarray(dist, dtype=float)).sum()) / LN2
    return max(total, 0.0)


def conditional_entropy(p: JointPmf, given: str = "y") -> float:
    """H(X|Y) for given="y", H(Y|X) for given="x"."""
    if given == "y":
        return max(entropy(p.p) - entropy(p.py), 0.0)
    if given == "x":
        return max(entropy(p.p) - entropy(p.px), 0.0)
    raise ValueError(f"Unknown conditioning variable {given}")


def mutual_information(p: JointPmf) -> float:
    return max(entropy(p.px) + entropy(p.py) - entropy(p.p), 0.0)


def is_independent(p: JointPmf, tol: float = 1e-9) -> bool:
    return bool(np.abs(p.p - np.outer(p.px, p.py)).max() <= tol)


def validate_pmf(raw, x_labels: Optional[Sequence[str]] = None,
                 y_labels: Optional[Sequence[str]] = None) -> JointPmf:
    """Build a JointPmf from a nested list/array, renormalizing mass errors up to 1e-9."""
    if raw is None or len(raw) == 0:
        raise EmptyMatrix("pmf matrix is empty")
    try:
        arr = np.array(raw, dtype=float)
    except ValueError as exc:
        raise DimensionMismatch(f"pmf matrix is not rectangular: {exc}") from exc
    if arr.ndim != 2:
        raise DimensionMismatch(f"pmf must be a 2-D matrix, got {arr.ndim} dimension(s)")
    if arr.size == 0:
        raise EmptyMatrix("pmf matrix has no entries")
    if not np.isfinite(arr).all():
        raise PmfValidationError("pmf has non-finite entries")
    if (arr < 0).any():
        i, j = np.argwhere(arr < 0)[0]
        raise NegativeEntry(f"p[{i}][{j}] = {arr[i, j]} is negative")

    mass = float(arr.sum())
    deviation = mass - 1.0
    if abs(deviation) > MASS_TOL:
        raise MassDeviationTooLarge(f"pmf mass is {mass!r}, deviation {deviation:.3e} exceeds {MASS_TOL}")
    if deviation != 0.0:
        logger.debug("renormalizing pmf with mass deviation %.3e", deviation)
        arr = arr / mass

    nx, ny = arr.shape
    xs = tuple(str(s) for s in x_labels) if x_labels is not None else tuple(f"x{i}" for i in range(nx))
    ys = tuple(str(s) for s in y_labels) if y_labels is not None else tuple(f"y{j}" for j in range(ny))
    if len(xs) != nx or len(ys) != ny:
        raise DimensionMismatch(f"{len(xs)}x{len(ys)} labels for a {nx}x{ny} pmf")
    if len(set(xs)) != nx or len(set(ys)) != ny:
        raise PmfValidationError("alphabet labels must be distinct")
    return JointPmf(xs, ys, arr, deviation)


def extend(p: JointPmf, c: Channel) -> TriplePmf:
    """p(x,y,u) = p(x,y) q(u|x,y)."""
    c.check_source(p)
    return TriplePmf(p.p[:, :, None] * c.q)


def entropy_profile(t) -> EntropyProfile:
    arr = t.p if isinstance(t, TriplePmf) else np.asarray(t, dtype=float)
    return EntropyProfile(
        h_x=entropy(arr.sum(axis=(1, 2))),
        h_y=entropy(arr.sum(axis=(0, 2))),
        h_u=entropy(arr.sum(axis=(0, 1))),
        h_xy=entropy(arr.sum(axis=2)),
        h_xu=entropy(arr.sum(axis=1)),
        h_yu=entropy(arr.sum(axis=0)),
        h_xyu=entropy(arr),
    )


def mixture_channel(c0: Channel, c1: Channel, lam: float) -> Channel:
    """U = (Q, U_Q) with Q ~ Bern(lam) independent of (X,Y)."""
    return mixture_of([c0, c1], [1.0 - lam, lam])


def mixture_of(channels: Sequence[Channel], weights: Sequence[float]) -> Channel:
    w = np.asarray(weights, dtype=float)
    if len(channels) == 0 or len(channels) != len(w):
        raise ValueError("need one weight per channel")
    if (w < -1e-12).any() or abs(w.sum() - 1.0) > 1e-9:
        raise ValueError(f"mixture weights must form a pmf, got {w.tolist()}")
    w = np.clip(w, 0.0, None) / np.clip(w, 0.0, None).sum()
    shape = channels[0].q.shape[:2]
    if any(c.q.shape[:2] != shape for c in channels):
        raise DimensionMismatch("mixture components are for different sources")
    return Channel(np.concatenate([wi * c.q for wi, c in zip(w, channels)], axis=2))


def product_joint(p1: JointPmf, p2: JointPmf, max_states: int = 64) -> JointPmf:
    nx, ny = p1.nx * p2.nx, p1.ny * p2.ny
    if nx > max_states or ny > max_states:
        raise AlphabetTooLarge(f"product alphabet {nx}x{ny} exceeds {max_states} states per axis")
    p = np.einsum("ab,cd->acbd", p1.p, p2.p).reshape(nx, ny)
    xs = tuple(f"({a},{b})" for a in p1.x_alphabet for b in p2.x_alphabet)
    ys = tuple(f"({a},{b})" for a in p1.y_alphabet for b in p2.y_alphabet)
    return JointPmf(xs, ys, p)


def product_channel(c1: Channel, c2: Channel) -> Channel:
    """U = (U1, U2) acting on the product source, component-wise."""
    a, b, u = c1.q.shape
    c, d, v = c2.q.shape
    return Channel(np.einsum("abu,cdv->acbduv", c1.q, c2.q).reshape(a * c, b * d, u * v))


def tensor_power(p: JointPmf, n: int, max_states: int = 64) -> JointPmf:
    if n == 1:
        return p
    if n == 2:
        return product_joint(p, p, max_states=max_states)
    raise ValueError(f"tensor_power supports n in {{1, 2}}, got {n}")


def deterministic_channel(labels, u_size: Optional[int] = None) -> Channel:
    """One-hot channel u = labels[x, y]."""
    labels = np.asarray(labels, dtype=int)
    k = int(labels.max()) + 1 if u_size is None else u_size
    if labels.min() < 0 or labels.max() >= k:
        raise ValueError("labels out of range for u_size")
    q = np.zeros(labels.shape + (k,))
    np.put_along_axis(q, labels[:, :, None], 1.0, axis=2)
    return Channel(q)


def trivial_channel(p: JointPmf) -> Channel:
    return Channel(np.ones((p.nx, p.ny, 1)))


def reveal_x(p: JointPmf) -> Channel:
    return deterministic_channel(np.repeat(np.arange(p.nx)[:, None], p.ny, axis=1))


def reveal_y(p: JointPmf) -> Channel:
    return deterministic_channel(np.repeat(np.arange(p.ny)[None, :], p.nx, axis=0))


def reveal_xy(p: JointPmf) -> Channel:
    return deterministic_channel(np.arange(p.nx * p.ny).reshape(p.nx, p.ny))


def random_channel(rng: np.random.Generator, nx: int, ny: int, u_size: int) -> Channel:
    return Channel(rng.dirichlet(np.ones(u_size), size=(nx, ny)))


def prune_channel(p: JointPmf, c: Channel, tol: float = 1e-10) -> Channel:
    """Drop U symbols whose total mass is below tol."""
    mass = extend(p, c).p.sum(axis=(0, 1))
    keep = mass >= tol
    if keep.all():
        return c
    if not keep.any():
        keep[int(np.argmax(mass))] = True
    q = c.q[:, :, keep].copy()
    rows = q.sum(axis=2)
    empty = rows <= 0.0
    q[empty] = 1.0 / q.shape[2]
    rows[empty] = 1.0
    return Channel(q / rows[:, :, None])


def random_pmf(rng: np.random.Generator, nx: int, ny: int) -> JointPmf:
    return validate_pmf(rng.dirichlet(np.ones(nx * ny)).reshape(nx, ny))
