"""Quantum embeddings of joint distributions and their leakage.

A regular embedding of P places amplitude ``e^{iθ(x,y)} √P(x,y)`` on
``|x>_A |y>_B``. General embeddings add work registers A' and B', and
tripartite ones an environment E. Leakage is the extra information a
party's registers hold about the other party's output beyond I(X;Y).
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Mapping, NamedTuple

import numpy as np

from . import linalg
from .errors import LayoutMismatch, PhaseKeyMismatch, ValidationError
from .probdist import (
    JointDistribution,
    conditional_entropy,
    connected_components,
    mutual_information,
)
from .quantum import (
    DensityMatrix,
    RegisterLayout,
    StateVector,
    _clamp,
    entropy_of_spectrum,
    partial_trace,
)

TWO_PI = 2.0 * math.pi
STRICT_TOL = 1e-9
REPRODUCE_TOL = 1e-9
DEGENERACY_TOL = 1e-9


def _fold(values) -> np.ndarray:
    v = np.mod(np.asarray(values, dtype=float), TWO_PI)
    # mod can return exactly 2π for tiny negative inputs
    return np.where(v >= TWO_PI, 0.0, v)


class PhaseAssignment:
    """Phase θ(x, y) on each support point of a distribution.

    ``values`` are aligned with ``source.support`` (row-major order) and are
    stored folded into [0, 2π).
    """

    __slots__ = ("_source", "_values")

    def __init__(self, source: JointDistribution, values):
        values = np.array(values, dtype=float).ravel()
        n = len(source.support)
        if values.shape != (n,):
            raise PhaseKeyMismatch(f"{values.size} phases for a support of size {n}")
        if not np.isfinite(values).all():
            raise ValidationError("phases must be finite")
        values = _fold(values)
        values.setflags(write=False)
        self._source = source
        self._values = values

    @classmethod
    def zeros(cls, source: JointDistribution) -> "PhaseAssignment":
        return cls(source, np.zeros(len(source.support)))

    @classmethod
    def from_mapping(cls, source: JointDistribution, theta: Mapping) -> "PhaseAssignment":
        """Build from ``{(x_label, y_label): angle}``; keys must equal the support."""
        keys = [(source.x[i], source.y[j]) for i, j in source.support]
        got = set(theta)
        want = set(keys)
        if got != want:
            missing = sorted(want - got)[:3]
            extra = sorted(got - want, key=repr)[:3]
            raise PhaseKeyMismatch(f"phase keys differ from support (missing {missing}, unexpected {extra})")
        return cls(source, [theta[k] for k in keys])

    @property
    def source(self) -> JointDistribution:
        return self._source

    @property
    def values(self) -> np.ndarray:
        return self._values

    def as_mapping(self) -> dict:
        s = self._source
        return {(s.x[i], s.y[j]): float(v) for (i, j), v in zip(s.support, self._values)}

    def matrix(self) -> np.ndarray:
        """Phase angles as an |X|x|Y| array (zero off the support)."""
        out = np.zeros(self._source.shape)
        if len(self._values):
            i, j = zip(*self._source.support)
            out[list(i), list(j)] = self._values
        return out

    def __len__(self):
        return len(self._values)

    def __repr__(self):
        return f"PhaseAssignment({np.round(self._values, 6).tolist()})"


def _amplitude_matrix(P: JointDistribution, theta: np.ndarray | None) -> np.ndarray:
    m = np.sqrt(P.probs).astype(complex)
    if theta is not None and len(theta):
        i, j = zip(*P.support)
        m[list(i), list(j)] *= np.exp(1j * np.asarray(theta))
    return m


@dataclass(frozen=True, eq=False)
class RegularEmbedding:
    source: JointDistribution
    phases: PhaseAssignment

    @cached_property
    def amplitudes(self) -> np.ndarray:
        """Amplitudes as an |X|x|Y| matrix (rows index A, columns B)."""
        m = _amplitude_matrix(self.source, self.phases.values)
        m.setflags(write=False)
        return m

    @cached_property
    def state(self) -> StateVector:
        nx, ny = self.source.shape
        return StateVector(RegisterLayout((("A", nx), ("B", ny))), self.amplitudes.ravel())

    def lift(self) -> "EmbeddingState":
        """The same state with one-dimensional work registers attached."""
        nx, ny = self.source.shape
        layout = RegisterLayout((("A", nx), ("A'", 1), ("B", ny), ("B'", 1)))
        return EmbeddingState(self.source, StateVector(layout, self.amplitudes.ravel()))

    def to_dict(self) -> dict:
        return {"primitive": self.source.to_dict(), "phases": self.phases.values.tolist()}


def build_regular(P: JointDistribution, theta) -> RegularEmbedding:
    """Regular embedding of ``P`` with phases ``theta``.

    ``theta`` may be a :class:`PhaseAssignment` for ``P``, a mapping keyed by
    support label pairs, or a vector aligned with ``P.support``.
    """
    if isinstance(theta, PhaseAssignment):
        if theta.source is not P and theta.source != P:
            raise PhaseKeyMismatch("phase assignment belongs to a different distribution")
    elif isinstance(theta, Mapping):
        theta = PhaseAssignment.from_mapping(P, theta)
    else:
        theta = PhaseAssignment(P, theta)
    return RegularEmbedding(P, theta)


def canonical(P: JointDistribution) -> RegularEmbedding:
    return RegularEmbedding(P, PhaseAssignment.zeros(P))


# ----------------------------------------------------------------------
# gauge fixing


class GaugeFixing:
    """Free phase coordinates modulo local diagonal unitaries.

    Phases on a spanning forest of the bipartite support graph can be
    absorbed into ``α_x + β_y``; the remaining ``count`` edges (one per
    independent cycle) carry the physical phases. Unpacks as
    ``count, embed``.
    """

    def __init__(self, P: JointDistribution):
        self.source = P
        support = P.support
        nx, ny = P.shape
        adj: dict[int, list[tuple[int, int]]] = {v: [] for v in range(nx + ny)}
        for e, (i, j) in enumerate(support):
            adj[i].append((nx + j, e))
            adj[nx + j].append((i, e))
        tree = set()
        seen = [False] * (nx + ny)
        # parent edge of each vertex, for potentials
        self._order: list[tuple[int, int | None]] = []
        for root in range(nx + ny):
            if seen[root]:
                continue
            seen[root] = True
            self._order.append((root, None))
            queue = deque([root])
            while queue:
                u = queue.popleft()
                for v, e in adj[u]:
                    if not seen[v]:
                        seen[v] = True
                        tree.add(e)
                        self._order.append((v, e))
                        queue.append(v)
        self.tree_edges = tuple(sorted(tree))
        self.free_edges = tuple(e for e in range(len(support)) if e not in tree)
        self._nx = nx

    @property
    def count(self) -> int:
        return len(self.free_edges)

    def free_labels(self) -> list[tuple[str, str]]:
        P = self.source
        return [(P.x[P.support[e][0]], P.y[P.support[e][1]]) for e in self.free_edges]

    def embed(self, coords) -> PhaseAssignment:
        coords = np.asarray(coords, dtype=float).ravel()
        if coords.shape != (self.count,):
            raise ValidationError(f"expected {self.count} coordinates, got {coords.size}")
        theta = np.zeros(len(self.source.support))
        theta[list(self.free_edges)] = coords
        return PhaseAssignment(self.source, theta)

    def reduce(self, phases: PhaseAssignment) -> np.ndarray:
        """Gauge-fixed coordinates of an arbitrary phase assignment."""
        P = self.source
        theta = phases.values
        nx = self._nx
        # potentials with θ(e) + pot[x] + pot[y] = 0 on tree edges
        pot = np.zeros(nx + P.shape[1])
        for v, e in self._order:
            if e is None:
                continue
            i, j = P.support[e]
            other = i if v == nx + j else nx + j
            pot[v] = -theta[e] - pot[other]
        out = [theta[e] + pot[P.support[e][0]] + pot[nx + P.support[e][1]] for e in self.free_edges]
        return _fold(out)

    def __iter__(self) -> Iterator:
        return iter((self.count, self.embed))


def free_phase_coordinates(P: JointDistribution) -> GaugeFixing:
    return GaugeFixing(P)


# ----------------------------------------------------------------------
# leakage


@dataclass(frozen=True)
class LeakageReport:
    toward_bob: float
    toward_alice: float
    s_x_bb: float
    s_aa_y: float
    mutual_information: float

    @property
    def delta(self) -> float:
        return max(self.toward_bob, self.toward_alice)

    @property
    def asymmetry(self) -> float:
        return abs(self.toward_bob - self.toward_alice)

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "toward_bob": self.toward_bob,
            "toward_alice": self.toward_alice,
            "S_X_BBp": self.s_x_bb,
            "S_AAp_Y": self.s_aa_y,
            "I_XY": self.mutual_information,
        }


def _gram_entropy(m: np.ndarray) -> float:
    """Entropy of ``m m^†`` (equivalently ``m^† m``), using the smaller Gram."""
    g = m @ m.conj().T if m.shape[0] <= m.shape[1] else m.conj().T @ m
    tr = np.trace(g).real
    if tr <= 0:
        return 0.0
    return entropy_of_spectrum(_clamp(linalg.eigvalsh(g / tr)))


def _hermitian_entropy(m: np.ndarray) -> float:
    tr = np.trace(m).real
    if tr <= 0:
        return 0.0
    return entropy_of_spectrum(_clamp(linalg.eigvalsh(m / tr)))


def leakage_regular(e: RegularEmbedding) -> LeakageReport:
    """Δ = S(ρ_A) − I(X;Y); both directions coincide for regular embeddings."""
    s = _gram_entropy(np.asarray(e.amplitudes))
    mi = mutual_information(e.source)
    d = s - mi
    return LeakageReport(d, d, s, s, mi)


def _holevo_blocks(blocks: np.ndarray) -> float:
    """χ of the ensemble given by unnormalised blocks ``p_k ρ_k``."""
    weights = np.einsum("kii->k", blocks).real
    avg = _hermitian_entropy(blocks.sum(axis=0))
    inner = sum(w * _hermitian_entropy(b) for w, b in zip(weights, blocks) if w > 1e-15)
    return avg - inner


def _holevo_pure_blocks(vecs: np.ndarray, total: np.ndarray) -> float:
    """χ when each block is ``M_k M_k^†`` for the rows-by-columns factor ``vecs[k]``.

    ``total`` is a factor of the average state (its Gram gives Σ_k blocks).
    """
    weights = np.einsum("kij,kij->k", vecs, vecs.conj()).real
    avg = _gram_entropy(total)
    inner = sum(w * _gram_entropy(v) for w, v in zip(weights, vecs) if w > 1e-15)
    return avg - inner


_WORK_REGISTERS = ("A", "A'", "B", "B'")


def _normalize_layout(obj, allow_env: bool):
    """Return ``obj`` with registers padded/reordered to [E?, A, A', B, B']."""
    layout = obj.layout
    names = set(layout.names)
    allowed = set(_WORK_REGISTERS) | ({"E"} if allow_env else set())
    if not {"A", "B"} <= names or not names <= allowed:
        raise LayoutMismatch(f"layout {list(layout.names)} must contain A and B and only {sorted(allowed)}")
    regs = dict(layout.registers)
    order = (["E"] if "E" in regs else []) + list(_WORK_REGISTERS)
    padded = RegisterLayout(tuple((n, regs.get(n, 1)) for n in order))
    perm = [layout.position(n) for n in order if n in regs]
    if isinstance(obj, StateVector):
        t = obj.tensor().transpose(perm)
        return StateVector(padded, t.ravel())
    k = len(perm)
    t = obj.matrix.reshape(layout.dims * 2).transpose(perm + [p + k for p in perm])
    return DensityMatrix(padded, t.reshape(padded.dim, padded.dim))


def _measured_distribution(obj) -> np.ndarray:
    """P(x, y) from measuring A and B of a [.., A, A', B, B'] object."""
    dims = obj.layout.dims[-4:]
    if isinstance(obj, StateVector):
        t = np.abs(obj.amplitudes.reshape(-1, *dims)) ** 2
        return t.sum(axis=(0, 2, 4))
    diag = np.diagonal(obj.matrix).real.reshape(-1, *dims)
    return diag.sum(axis=(0, 2, 4))


def _mi(pxy: np.ndarray) -> float:
    px, py = pxy.sum(1), pxy.sum(0)
    return entropy_of_spectrum(px) + entropy_of_spectrum(py) - entropy_of_spectrum(pxy.ravel())


def _directed_pure(psi: StateVector) -> tuple[float, float]:
    """(S(X;BB'), S(AA';Y)) of a pure state on [A, A', B, B']."""
    da, dap, db, dbp = psi.layout.dims
    t = psi.amplitudes.reshape(da, dap, db, dbp)
    # block x: residual on BB' is (row-space of) t[x] reshaped (A', BB')
    s_xb = _holevo_pure_blocks(t.reshape(da, dap, db * dbp), t.reshape(da * dap, db * dbp))
    ty = t.transpose(2, 3, 0, 1)  # (B, B', A, A')
    s_ay = _holevo_pure_blocks(ty.reshape(db, dbp, da * dap), ty.reshape(db * dbp, da * dap))
    return s_xb, s_ay


def _directed_mixed(rho: DensityMatrix) -> tuple[float, float]:
    da, dap, db, dbp = rho.layout.dims
    t = rho.matrix.reshape(da, dap, db * dbp, da, dap, db * dbp)
    blocks_x = np.einsum("xajxak->xjk", t)
    t = rho.matrix.reshape(da * dap, db, dbp, da * dap, db, dbp)
    blocks_y = np.einsum("iybjyb->yij", t)
    return _holevo_blocks(blocks_x), _holevo_blocks(blocks_y)


def _as_quantum(e):
    if isinstance(e, RegularEmbedding):
        return e.lift().state
    if isinstance(e, (EmbeddingState, TripartiteState)):
        return e.state
    if isinstance(e, (StateVector, DensityMatrix)):
        return e
    raise TypeError(f"cannot compute leakage of {type(e).__name__}")


def leakage_general(e) -> LeakageReport:
    """Directed leakages of an embedding, pure or mixed.

    Accepts an :class:`EmbeddingState`, a :class:`RegularEmbedding`, or a
    raw :class:`StateVector` / :class:`DensityMatrix` over A, A', B, B' (the
    work registers may be absent). An E register, if present, is traced
    out. I(X;Y) is taken from the measured distribution of A and B.
    """
    obj = _normalize_layout(_as_quantum(e), allow_env=True)
    if "E" in obj.layout:
        if obj.layout.dim_of("E") == 1 and isinstance(obj, StateVector):
            obj = StateVector(obj.layout.without(["E"]), obj.amplitudes)
        else:
            obj = partial_trace(obj, list(_WORK_REGISTERS))
    mi = _mi(_measured_distribution(obj))
    if isinstance(obj, StateVector):
        s_xb, s_ay = _directed_pure(obj)
    else:
        s_xb, s_ay = _directed_mixed(obj)
    return LeakageReport(float(s_xb - mi), float(s_ay - mi), float(s_xb), float(s_ay), float(mi))


# ----------------------------------------------------------------------
# general and tripartite embeddings


def _check_reproduces(P: JointDistribution, obj) -> None:
    da, _, db, _ = obj.layout.dims[-4:]
    if (da, db) != P.shape:
        raise LayoutMismatch(f"registers A, B have dimensions {(da, db)} but the distribution is {P.shape}")
    tv = 0.5 * float(np.abs(_measured_distribution(obj) - P.probs).sum())
    if tv > REPRODUCE_TOL:
        raise ValidationError(f"measuring A, B gives a distribution at total variation {tv:.3g} from P")


def _infer_source(obj, x_labels=None, y_labels=None) -> JointDistribution:
    pxy = _measured_distribution(obj)
    da, db = pxy.shape
    x_labels = list(x_labels) if x_labels is not None else [str(i) for i in range(da)]
    y_labels = list(y_labels) if y_labels is not None else [str(i) for i in range(db)]
    if (pxy.sum(1) <= 0).any() or (pxy.sum(0) <= 0).any():
        raise ValidationError("register A or B has a basis state that never occurs")
    return JointDistribution(x_labels, y_labels, pxy / pxy.sum())


class StrictnessResult(NamedTuple):
    passed: bool
    residual_bob: float
    residual_alice: float
    tol: float

    def __bool__(self):
        return self.passed


@dataclass(frozen=True, eq=False)
class EmbeddingState:
    source: JointDistribution
    state: StateVector

    def __post_init__(self):
        state = _normalize_layout(self.state, allow_env=False)
        _check_reproduces(self.source, state)
        object.__setattr__(self, "state", state)

    @classmethod
    def from_state(cls, state: StateVector, x_labels=None, y_labels=None) -> "EmbeddingState":
        state = _normalize_layout(state, allow_env=False)
        return cls(_infer_source(state, x_labels, y_labels), state)

    @cached_property
    def strictness(self) -> StrictnessResult:
        return strict_correctness_check(self)

    @property
    def strict(self) -> bool:
        return self.strictness.passed


def _conditional_holevo(blocks: np.ndarray) -> float:
    """Σ_y P(y) χ({P(x|y), ρ^{x,y}}) from unnormalised blocks[y, x]."""
    total = 0.0
    for by in blocks:
        py = float(np.einsum("kii->", by).real)
        if py > 1e-15:
            total += py * _holevo_blocks(by / py)
    return total


def strict_correctness_check(e: EmbeddingState, tol: float = STRICT_TOL) -> StrictnessResult:
    """Markov-condition residuals S(X;YB') − I(X;Y) and S(XA';Y) − I(X;Y).

    Uses S(X;YB') − I(X;Y) = Σ_y P(y) χ({P(x|y), ρ_{B'}^{x,y}}) and the
    mirror identity for A'.
    """
    da, dap, db, dbp = e.state.layout.dims
    t = e.state.amplitudes.reshape(da, dap, db, dbp)
    # rho_{B'}^{x,y} ∝ Σ_a' t[x,a',y,:] t[x,a',y,:]^*
    blocks_b = np.einsum("xayj,xayk->yxjk", t, t.conj())
    blocks_a = np.einsum("xjyb,xkyb->xyjk", t, t.conj())
    rb = _conditional_holevo(blocks_b)
    ra = _conditional_holevo(blocks_a)
    return StrictnessResult(bool(abs(rb) < tol and abs(ra) < tol), float(rb), float(ra), tol)


@dataclass(frozen=True, eq=False)
class TripartiteState:
    source: JointDistribution
    state: StateVector

    def __post_init__(self):
        state = _normalize_layout(self.state, allow_env=True)
        if "E" not in state.layout:
            state = StateVector(RegisterLayout((("E", 1),) + state.layout.registers), state.amplitudes)
        _check_reproduces(self.source, state)
        object.__setattr__(self, "state", state)

    @classmethod
    def from_state(cls, state: StateVector, x_labels=None, y_labels=None) -> "TripartiteState":
        state = _normalize_layout(state, allow_env=True)
        return cls(_infer_source(state, x_labels, y_labels), state)

    def reduced(self) -> DensityMatrix:
        return partial_trace(self.state, list(_WORK_REGISTERS))


def tripartite_leakage(t: TripartiteState) -> LeakageReport:
    """Leakage of the E-traced mixed state; the directions may differ."""
    return leakage_general(t)


def ideal_functionality(P: JointDistribution) -> TripartiteState:
    """Σ √P(x,y) |x,y>_E |x>_A |y>_B with E indexed by (x, y)."""
    nx, ny = P.shape
    amps = np.zeros((nx * ny, nx, ny), dtype=complex)
    for i, j in P.support:
        amps[i * ny + j, i, j] = math.sqrt(P.probs[i, j])
    layout = RegisterLayout((("E", nx * ny), ("A", nx), ("B", ny)))
    return TripartiteState(P, StateVector(layout, amps.ravel()))


class EnvironmentMonotones(NamedTuple):
    s_w_given_xa: float
    s_w_given_yb: float
    h_y_given_x: float
    h_x_given_y: float
    degenerate: bool

    def holds(self, tol: float = 1e-9) -> bool:
        return self.s_w_given_xa >= self.h_y_given_x - tol and self.s_w_given_yb >= self.h_x_given_y - tol


def _cq_conditional(blocks: np.ndarray) -> float:
    """S(W|ZR) for blocks[w, z] = p(w,z) σ_{w,z} on R."""
    pwz = np.einsum("wzii->wz", blocks).real
    pz = pwz.sum(0)
    s_wzr = entropy_of_spectrum(pwz.ravel()) + sum(
        pwz[w, z] * _hermitian_entropy(blocks[w, z])
        for w in range(pwz.shape[0])
        for z in range(pwz.shape[1])
        if pwz[w, z] > 1e-15
    )
    zb = blocks.sum(0)
    s_zr = entropy_of_spectrum(pz) + sum(pz[z] * _hermitian_entropy(zb[z]) for z in range(len(pz)) if pz[z] > 1e-15)
    return s_wzr - s_zr


def environment_monotones(t: TripartiteState) -> EnvironmentMonotones:
    """S(W|XA'), S(W|YB'), H(Y|X), H(X|Y) with W a Schmidt-basis measurement of E.

    The basis is the eigenbasis of ρ_E returned by the Jacobi solver; when
    ρ_E has a repeated nonzero eigenvalue that basis is not unique and
    ``degenerate`` is set.
    """
    de, da, dap, db, dbp = t.state.layout.dims
    psi = t.state.amplitudes.reshape(de, -1)
    rho_e = psi @ psi.conj().T
    w, v = linalg.eigh(rho_e)
    nz = w[w > 1e-12]
    degenerate = bool(len(nz) > 1 and np.any(np.abs(np.diff(nz)) < DEGENERACY_TOL))
    phi = (v.conj().T @ psi).reshape(de, da, dap, db, dbp)
    blocks_xa = np.einsum("wxajb,wxkjb->wxak", phi, phi.conj())
    blocks_yb = np.einsum("wxayj,wxayk->wyjk", phi, phi.conj())
    return EnvironmentMonotones(
        float(_cq_conditional(blocks_xa)),
        float(_cq_conditional(blocks_yb)),
        conditional_entropy(t.source, given="x"),
        conditional_entropy(t.source, given="y"),
        degenerate,
    )


def component_leakages(P: JointDistribution, phases) -> list[tuple[float, float]]:
    """(weight, Δ) per connected component of a regular embedding.

    ``phases`` accepts the same forms as :func:`build_regular`.
    """
    parts = connected_components(P)
    theta = build_regular(P, phases).phases.matrix()
    out = []
    for c in range(parts.count):
        rows = [i for i, k in enumerate(parts.x_component) if k == c]
        cols = [j for j, k in enumerate(parts.y_component) if k == c]
        sub = P.probs[np.ix_(rows, cols)]
        w = float(sub.sum())
        Q = JointDistribution([P.x[i] for i in rows], [P.y[j] for j in cols], sub / w)
        th = theta[np.ix_(rows, cols)]
        e = build_regular(Q, [th[i, j] for i, j in Q.support])
        out.append((w, leakage_regular(e).delta))
    return out
