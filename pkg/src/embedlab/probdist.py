"""Classical information theory over finite joint distributions.

All logarithms are base 2 and ``0 log 0 = 0``.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import MalformedTable, NegativeProbability, NotNormalized, ParseError, ValidationError

BOT = "_bot"
NORMALIZATION_TOL = 1e-12
VECTOR_NORMALIZATION_TOL = 1e-9
TV_TOL = 1e-9


def display_label(label: str) -> str:
    return "⊥" if label == BOT else label


@dataclass(frozen=True)
class Alphabet:
    """Ordered, duplicate-free list of symbol labels."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        symbols = tuple(self.symbols)
        if not symbols:
            raise ValidationError("alphabet must be non-empty")
        for s in symbols:
            if not isinstance(s, str):
                raise ValidationError(f"alphabet labels must be strings, got {s!r}")
        if len(set(symbols)) != len(symbols):
            dupes = sorted({s for s in symbols if symbols.count(s) > 1})
            raise ValidationError(f"duplicate alphabet labels: {dupes}")
        object.__setattr__(self, "symbols", symbols)

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __getitem__(self, i):
        return self.symbols[i]

    def index(self, label: str) -> int:
        try:
            return self.symbols.index(label)
        except ValueError:
            raise KeyError(label) from None

    def display(self) -> list[str]:
        return [display_label(s) for s in self.symbols]


def _as_alphabet(a) -> Alphabet:
    return a if isinstance(a, Alphabet) else Alphabet(tuple(a))


class JointDistribution:
    """Joint probability table ``P[x, y]`` over two labelled alphabets.

    Symbols with zero marginal are dropped on construction (with a warning);
    what was dropped is kept in :attr:`notes`. Instances are immutable.
    """

    __slots__ = ("_x", "_y", "_p", "_notes")

    def __init__(self, x, y, probs):
        x = _as_alphabet(x)
        y = _as_alphabet(y)
        try:
            p = np.array(probs, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"probability table is not numeric: {exc}") from None
        if p.shape != (len(x), len(y)):
            raise ValidationError(
                f"probability table has shape {p.shape}, expected {(len(x), len(y))}"
            )
        bad = np.argwhere(~np.isfinite(p))
        if len(bad):
            i, j = bad[0]
            raise ValidationError(f"non-finite probability at row {i}, col {j}")
        neg = np.argwhere(p < 0)
        if len(neg):
            i, j = (int(v) for v in neg[0])
            raise NegativeProbability(f"negative probability {p[i, j]!r} at row {i}, col {j}", i, j)
        total = float(p.sum())
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise NotNormalized(f"probabilities sum to {total!r}, not 1")

        notes = []
        keep_x = p.sum(axis=1) > 0
        keep_y = p.sum(axis=0) > 0
        if not keep_x.all() or not keep_y.all():
            dropped_x = [x[i] for i in np.flatnonzero(~keep_x)]
            dropped_y = [y[j] for j in np.flatnonzero(~keep_y)]
            note = f"dropped zero-marginal symbols x={dropped_x} y={dropped_y}"
            warnings.warn(note, stacklevel=2)
            notes.append(note)
            p = p[keep_x][:, keep_y]
            x = Alphabet(tuple(s for s, k in zip(x, keep_x) if k))
            y = Alphabet(tuple(s for s, k in zip(y, keep_y) if k))
        p.setflags(write=False)
        self._x, self._y, self._p, self._notes = x, y, p, tuple(notes)

    # -- accessors -----------------------------------------------------
    @property
    def x(self) -> Alphabet:
        return self._x

    @property
    def y(self) -> Alphabet:
        return self._y

    @property
    def probs(self) -> np.ndarray:
        return self._p

    @property
    def notes(self) -> tuple[str, ...]:
        return self._notes

    @property
    def shape(self) -> tuple[int, int]:
        return self._p.shape

    @property
    def px(self) -> np.ndarray:
        return self._p.sum(axis=1)

    @property
    def py(self) -> np.ndarray:
        return self._p.sum(axis=0)

    @property
    def support(self) -> list[tuple[int, int]]:
        """Support pairs ``(i, j)`` in row-major order."""
        return [(int(i), int(j)) for i, j in np.argwhere(self._p > 0)]

    def prob(self, x_label: str, y_label: str) -> float:
        return float(self._p[self._x.index(x_label), self._y.index(y_label)])

    def transpose(self) -> "JointDistribution":
        return JointDistribution(self._y, self._x, self._p.T)

    def __repr__(self):
        return f"JointDistribution(|X|={len(self._x)}, |Y|={len(self._y)}, support={int((self._p > 0).sum())})"

    def __eq__(self, other):
        if not isinstance(other, JointDistribution):
            return NotImplemented
        return self._x == other._x and self._y == other._y and np.array_equal(self._p, other._p)

    def __hash__(self):
        return hash((self._x, self._y, self._p.tobytes()))

    # -- serialization -------------------------------------------------
    def to_dict(self) -> dict:
        return {"x": list(self._x), "y": list(self._y), "p": self._p.tolist()}

    @classmethod
    def from_dict(cls, d: Mapping) -> "JointDistribution":
        if not isinstance(d, Mapping):
            raise ParseError("distribution JSON must be an object")
        missing = [k for k in ("x", "y", "p") if k not in d]
        if missing:
            raise ParseError(f"distribution JSON is missing keys {missing}")
        x, y, p = d["x"], d["y"], d["p"]
        if not isinstance(x, list) or not isinstance(y, list):
            raise ParseError('"x" and "y" must be lists of labels')
        if not isinstance(p, list) or any(not isinstance(row, list) for row in p):
            raise ParseError('"p" must be a list of rows')
        for i, row in enumerate(p):
            if len(row) != len(y):
                raise ValidationError(f"row {i} has {len(row)} entries, expected {len(y)}")
            for j, v in enumerate(row):
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise ValidationError(f"entry at row {i}, col {j} is not a number: {v!r}")
        return cls(x, y, p)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> "JointDistribution":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from None
        return cls.from_dict(d)

    @classmethod
    def load(cls, path) -> "JointDistribution":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json(indent=2))


# ----------------------------------------------------------------------
# entropies


def shannon_entropy(dist) -> float:
    """Shannon entropy in bits of a probability vector."""
    p = np.asarray(dist, dtype=float).ravel()
    neg = np.flatnonzero(p < 0)
    if len(neg):
        raise NegativeProbability(f"negative probability {p[neg[0]]!r} at index {neg[0]}", int(neg[0]))
    total = p.sum()
    if abs(total - 1.0) > VECTOR_NORMALIZATION_TOL:
        raise NotNormalized(f"probabilities sum to {total!r}, not 1")
    return _entropy(p)


def _entropy(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p))) + 0.0


def joint_entropy(P: JointDistribution) -> float:
    return _entropy(P.probs.ravel())


def mutual_information(P: JointDistribution) -> float:
    """I(X;Y) = H(X) + H(Y) - H(XY)."""
    value = _entropy(P.px) + _entropy(P.py) - _entropy(P.probs.ravel())
    return max(value, 0.0)


def conditional_entropy(P: JointDistribution, given: str = "x") -> float:
    """H(Y|X) by default; ``given="y"`` returns H(X|Y)."""
    if given == "x":
        marginal = P.px
    elif given == "y":
        marginal = P.py
    else:
        raise ValueError(f"given must be 'x' or 'y', not {given!r}")
    return max(_entropy(P.probs.ravel()) - _entropy(marginal), 0.0)


# ----------------------------------------------------------------------
# dependent part


@dataclass(frozen=True)
class DependentPartMap:
    source_to_class: tuple[int, ...]
    class_representatives: tuple[int, ...]
    collapsed: JointDistribution
    side: str = "x"

    @property
    def n_classes(self) -> int:
        return len(self.class_representatives)

    def partition(self) -> frozenset[frozenset[int]]:
        groups: dict[int, set[int]] = {}
        for i, k in enumerate(self.source_to_class):
            groups.setdefault(k, set()).add(i)
        return frozenset(frozenset(g) for g in groups.values())


def _dependent_part_rows(P: JointDistribution, tol: float) -> tuple[list[int], list[int]]:
    cond = P.probs / P.px[:, None]
    order = sorted(range(len(P.x)), key=lambda i: P.x[i])
    reps: list[int] = []
    assign = [-1] * len(P.x)
    for i in order:
        for k, r in enumerate(reps):
            if 0.5 * np.abs(cond[i] - cond[r]).sum() <= tol:
                assign[i] = k
                break
        else:
            assign[i] = len(reps)
            reps.append(i)
    return assign, reps


def dependent_part(P: JointDistribution, of: str = "x", tol: float = TV_TOL) -> DependentPartMap:
    """Collapse symbols of one side that induce the same conditional law on the other.

    ``of="x"`` gives X↘Y (classes of x-symbols), ``of="y"`` gives Y↘X. Two
    symbols share a class when their conditionals are within total
    variation ``tol``; each class is labelled by its lexicographically
    smallest member.
    """
    if of == "y":
        dp = dependent_part(P.transpose(), of="x", tol=tol)
        return DependentPartMap(dp.source_to_class, dp.class_representatives, dp.collapsed.transpose(), side="y")
    if of != "x":
        raise ValueError(f"of must be 'x' or 'y', not {of!r}")
    assign, reps = _dependent_part_rows(P, tol)
    collapsed = np.zeros((len(reps), len(P.y)))
    np.add.at(collapsed, np.asarray(assign), P.probs)
    labels = [P.x[r] for r in reps]
    return DependentPartMap(tuple(assign), tuple(reps), JointDistribution(labels, P.y, collapsed), side="x")


def collapse(P: JointDistribution, tol: float = TV_TOL) -> JointDistribution:
    """The primitive P_{X↘Y, Y↘X}."""
    px = dependent_part(P, of="x", tol=tol).collapsed
    return dependent_part(px, of="y", tol=tol).collapsed


class TrivialityReport(NamedTuple):
    trivial: bool
    h_xdep_given_y: float
    h_ydep_given_x: float

    @property
    def consistent(self) -> bool:
        """Whether the two zero-tests agree (they must, classically)."""
        return (self.h_xdep_given_y < TV_TOL) == (self.h_ydep_given_x < TV_TOL)

    def __bool__(self):
        return self.trivial


def is_trivial(P: JointDistribution, tol: float = TV_TOL) -> TrivialityReport:
    """Test H(X↘Y|Y) = 0 and report H(Y↘X|X) alongside."""
    hx = conditional_entropy(dependent_part(P, of="x").collapsed, given="y")
    hy = conditional_entropy(dependent_part(P, of="y").collapsed, given="x")
    return TrivialityReport(hx < tol, hx, hy)


# ----------------------------------------------------------------------
# connected components


@dataclass(frozen=True)
class ComponentPartition:
    edge_components: dict
    x_component: tuple[int, ...]
    y_component: tuple[int, ...]
    weights: tuple[float, ...]

    @property
    def count(self) -> int:
        return len(self.weights)


def connected_components(P: JointDistribution) -> ComponentPartition:
    nx, ny = P.shape
    parent = list(range(nx + ny))

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    support = P.support
    for i, j in support:
        ri, rj = find(i), find(nx + j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    # label components in order of their smallest vertex (x before y)
    labels: dict[int, int] = {}
    for v in range(nx + ny):
        labels.setdefault(find(v), len(labels))
    xc = tuple(labels[find(i)] for i in range(nx))
    yc = tuple(labels[find(nx + j)] for j in range(ny))
    weights = np.zeros(len(labels))
    for i in range(nx):
        weights[xc[i]] += P.px[i]
    edges = {(i, j): xc[i] for i, j in support}
    return ComponentPartition(edges, xc, yc, tuple(float(w) for w in weights))


def split_components(P: JointDistribution) -> list[tuple[float, JointDistribution]]:
    """Each component's weight and its conditional single-component distribution."""
    part = connected_components(P)
    out = []
    for c, w in enumerate(part.weights):
        rows = [i for i, k in enumerate(part.x_component) if k == c]
        cols = [j for j, k in enumerate(part.y_component) if k == c]
        block = P.probs[np.ix_(rows, cols)] / w
        block = block / block.sum()
        out.append((w, JointDistribution([P.x[i] for i in rows], [P.y[j] for j in cols], block)))
    return out


def component_entropy(P: JointDistribution) -> float:
    """H(C) for the component variable C."""
    return _entropy(np.array(connected_components(P).weights))


def mutual_information_given_components(P: JointDistribution) -> float:
    """I(X;Y|C)."""
    return float(sum(w * mutual_information(Q) for w, Q in split_components(P)))


# ----------------------------------------------------------------------
# randomized functions


def randomize_function(
    table: Mapping | Iterable, sep: str = ","
) -> JointDistribution:
    """Joint output distribution of ``f(a, b) = (w, z)`` on uniform inputs.

    ``table`` maps ``(a, b)`` to ``(w, z)``; it may also be an iterable of
    ``((a, b), (w, z))`` pairs. Alice's output is ``(a, w)`` and Bob's is
    ``(b, z)``, labelled ``f"{a}{sep}{w}"`` and ``f"{b}{sep}{z}"``.
    """
    items = list(table.items()) if isinstance(table, Mapping) else list(table)
    entries: dict[tuple[str, str], tuple[str, str]] = {}
    a_vals: list[str] = []
    b_vals: list[str] = []
    for item in items:
        try:
            (a, b), out = item
        except (TypeError, ValueError):
            raise MalformedTable(f"entry {item!r} is not ((a, b), (w, z))") from None
        if not isinstance(out, Sequence) or isinstance(out, str) or len(out) != 2:
            raise MalformedTable(f"output for input {(a, b)!r} is not a pair (w, z): {out!r}")
        key = (str(a), str(b))
        val = (str(out[0]), str(out[1]))
        if key in entries and entries[key] != val:
            raise MalformedTable(f"conflicting outputs for input {key!r}")
        entries[key] = val
        if key[0] not in a_vals:
            a_vals.append(key[0])
        if key[1] not in b_vals:
            b_vals.append(key[1])
    if not entries:
        raise MalformedTable("empty function table")
    missing = [(a, b) for a in a_vals for b in b_vals if (a, b) not in entries]
    if missing:
        raise MalformedTable(f"function is not total; missing inputs {missing[:5]}")

    weight = 1.0 / (len(a_vals) * len(b_vals))
    x_labels: list[str] = []
    y_labels: list[str] = []
    mass: dict[tuple[str, str], float] = {}
    for (a, b), (w, z) in entries.items():
        xl, yl = f"{a}{sep}{w}", f"{b}{sep}{z}"
        if xl not in x_labels:
            x_labels.append(xl)
        if yl not in y_labels:
            y_labels.append(yl)
        mass[(xl, yl)] = mass.get((xl, yl), 0.0) + weight
    p = np.zeros((len(x_labels), len(y_labels)))
    for (xl, yl), m in mass.items():
        p[x_labels.index(xl), y_labels.index(yl)] = m
    return JointDistribution(x_labels, y_labels, p)
