"""Dense linear algebra on small multi-register Hilbert spaces.

States carry a :class:`RegisterLayout`; amplitudes are indexed row-major
over the registers in layout order. Entropies are in bits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .errors import (
    DimensionMismatch,
    KindMismatch,
    NegativeEigenvalue,
    NotHermitian,
    NotNormalized,
    UnknownRegister,
    ValidationError,
)
from .probdist import Alphabet

CANONICAL_ORDER = ("E", "A", "A'", "B", "B'")
NORM_TOL = 1e-10
HERMITIAN_TOL = 1e-10
CLAMP_TOL = 1e-10
ENTROPY_CUTOFF = 1e-15
POVM_COMPLETENESS_TOL = 1e-9


@dataclass(frozen=True)
class RegisterLayout:
    registers: tuple[tuple[str, int], ...]

    def __post_init__(self):
        regs = tuple((str(n), int(d)) for n, d in self.registers)
        names = [n for n, _ in regs]
        if len(set(names)) != len(names):
            raise ValidationError(f"register names must be unique: {names}")
        for n, d in regs:
            if d < 1:
                raise ValidationError(f"register {n!r} has dimension {d} < 1")
        object.__setattr__(self, "registers", regs)

    @classmethod
    def of(cls, *pairs) -> "RegisterLayout":
        return cls(tuple(pairs))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.registers)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.registers)

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    def __contains__(self, name):
        return name in self.names

    def position(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownRegister(f"unknown register {name!r}; layout has {list(self.names)}") from None

    def dim_of(self, name: str) -> int:
        return self.registers[self.position(name)][1]

    def subset(self, names: Iterable[str]) -> "RegisterLayout":
        wanted = set(names)
        for n in wanted:
            self.position(n)
        return RegisterLayout(tuple(r for r in self.registers if r[0] in wanted))

    def without(self, names: Iterable[str]) -> "RegisterLayout":
        drop = set(names)
        for n in drop:
            self.position(n)
        return RegisterLayout(tuple(r for r in self.registers if r[0] not in drop))

    def concat(self, other: "RegisterLayout") -> "RegisterLayout":
        return RegisterLayout(self.registers + other.registers)


def _layout(layout) -> RegisterLayout:
    return layout if isinstance(layout, RegisterLayout) else RegisterLayout(tuple(layout))


@dataclass(frozen=True, eq=False)
class StateVector:
    layout: RegisterLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        layout = _layout(self.layout)
        amps = np.array(self.amplitudes, dtype=complex).ravel()
        if amps.shape != (layout.dim,):
            raise DimensionMismatch(f"{amps.size} amplitudes for a layout of dimension {layout.dim}")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > NORM_TOL:
            raise NotNormalized(f"state norm {norm!r} differs from 1")
        amps.setflags(write=False)
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.layout.dim

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.layout.dims)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.layout, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace matrix on a register layout.

    Positivity is not checked here (it costs a full diagonalisation); it is
    enforced whenever a spectrum is computed.
    """

    layout: RegisterLayout
    matrix: np.ndarray

    def __post_init__(self):
        layout = _layout(self.layout)
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (layout.dim, layout.dim):
            raise DimensionMismatch(f"matrix shape {m.shape} does not fit layout dimension {layout.dim}")
        _check_hermitian(m)
        tr = np.trace(m).real
        if abs(tr - 1.0) > NORM_TOL:
            raise NotNormalized(f"trace {tr!r} differs from 1")
        m.setflags(write=False)
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.layout.dim


def _check_hermitian(m: np.ndarray) -> None:
    scale = max(1.0, float(np.abs(m).max(initial=0.0)))
    err = float(np.abs(m - m.conj().T).max(initial=0.0))
    if err > HERMITIAN_TOL * scale:
        raise NotHermitian(f"matrix deviates from Hermitian by {err:.3g}")


def ket(layout, *indices) -> StateVector:
    """Computational basis state ``|i1 i2 ...>``."""
    layout = _layout(layout)
    amps = np.zeros(layout.dims, dtype=complex)
    amps[tuple(indices)] = 1.0
    return StateVector(layout, amps.ravel())


def qubits(*names: str) -> RegisterLayout:
    return RegisterLayout(tuple((n, 2) for n in names))


# ----------------------------------------------------------------------
# structural operations


def _permute(obj, names: Sequence[str]):
    layout = obj.layout
    perm = [layout.position(n) for n in names]
    new_layout = RegisterLayout(tuple(layout.registers[p] for p in perm))
    if isinstance(obj, StateVector):
        return StateVector(new_layout, obj.tensor().transpose(perm).ravel())
    k = len(perm)
    t = obj.matrix.reshape(layout.dims * 2).transpose(perm + [p + k for p in perm])
    return DensityMatrix(new_layout, t.reshape(new_layout.dim, new_layout.dim))


def permute_registers(obj, names: Sequence[str]):
    """Reorder registers; ``names`` must list every register once."""
    if sorted(names) != sorted(obj.layout.names):
        raise ValidationError(f"{list(names)} is not a permutation of {list(obj.layout.names)}")
    return _permute(obj, names)


def tensor_product(a, b):
    """Kronecker product of two states of the same kind.

    When every register name belongs to the canonical set
    ``E, A, A', B, B'`` the result is reordered into that order.
    """
    if type(a) is not type(b) or not isinstance(a, (StateVector, DensityMatrix)):
        raise KindMismatch(f"cannot tensor {type(a).__name__} with {type(b).__name__}")
    layout = a.layout.concat(b.layout)
    if isinstance(a, StateVector):
        out = StateVector(layout, np.kron(a.amplitudes, b.amplitudes))
    else:
        out = DensityMatrix(layout, np.kron(a.matrix, b.matrix))
    if all(n in CANONICAL_ORDER for n in layout.names):
        order = [n for n in CANONICAL_ORDER if n in layout.names]
        if tuple(order) != layout.names:
            out = _permute(out, order)
    return out


def _reduced_matrix_from_vector(psi: StateVector, keep: Sequence[str]) -> np.ndarray:
    layout = psi.layout
    keep_pos = [i for i, n in enumerate(layout.names) if n in keep]
    rest = [i for i in range(len(layout.names)) if i not in keep_pos]
    dk = math.prod(layout.dims[i] for i in keep_pos)
    m = psi.tensor().transpose(keep_pos + rest).reshape(dk, -1)
    return m @ m.conj().T


def _reduced_matrix(rho: np.ndarray, layout: RegisterLayout, keep: Sequence[str]) -> np.ndarray:
    n = len(layout.names)
    keep_pos = [i for i, name in enumerate(layout.names) if name in keep]
    letters = "abcdefghijklmnopqrstuvwxyz"
    if 2 * n > len(letters):
        raise ValidationError("too many registers for partial trace")
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for i in range(n):
        if i not in keep_pos:
            col[i] = row[i]
    out = "".join(row[i] for i in keep_pos) + "".join(col[i] for i in keep_pos)
    t = np.einsum("".join(row) + "".join(col) + "->" + out, rho.reshape(layout.dims * 2))
    dk = math.prod(layout.dims[i] for i in keep_pos)
    return t.reshape(dk, dk)


def partial_trace(rho, keep: Iterable[str]) -> DensityMatrix:
    """Trace out every register not in ``keep``.

    Accepts a :class:`DensityMatrix` or a :class:`StateVector`; the kept
    registers stay in layout order.
    """
    keep = list(keep)
    for name in keep:
        rho.layout.position(name)
    sub = rho.layout.subset(keep)
    if isinstance(rho, StateVector):
        m = _reduced_matrix_from_vector(rho, keep)
    else:
        m = _reduced_matrix(rho.matrix, rho.layout, keep)
    return DensityMatrix(sub, m)


def apply_unitary(obj, register: str, u: np.ndarray):
    """Apply ``u`` to one register of a state or density matrix."""
    layout = obj.layout
    pos = layout.position(register)
    u = np.asarray(u, dtype=complex)
    d = layout.dims[pos]
    if u.shape != (d, d):
        raise DimensionMismatch(f"unitary of shape {u.shape} on register of dimension {d}")
    if isinstance(obj, StateVector):
        t = np.moveaxis(obj.tensor(), pos, 0)
        t = np.tensordot(u, t, axes=1)
        return StateVector(layout, np.moveaxis(t, 0, pos).ravel())
    full = _embed_operator(u, layout, register)
    return DensityMatrix(layout, full @ obj.matrix @ full.conj().T)


def _embed_operator(op: np.ndarray, layout: RegisterLayout, register: str) -> np.ndarray:
    pos = layout.position(register)
    before = math.prod(layout.dims[:pos])
    after = math.prod(layout.dims[pos + 1 :])
    return np.kron(np.kron(np.eye(before), op), np.eye(after))


# ----------------------------------------------------------------------
# spectra and entropies


def _matrix_of(m) -> np.ndarray:
    return m.matrix if isinstance(m, DensityMatrix) else np.asarray(m, dtype=complex)


def eigenvalues_hermitian(m, psd: bool = True) -> np.ndarray:
    """Real spectrum of a Hermitian matrix, in descending order.

    With ``psd`` (the default) eigenvalues in ``(-1e-10, 0)`` are clamped to
    zero and anything more negative raises :class:`NegativeEigenvalue`.
    """
    a = _matrix_of(m)
    _check_hermitian(a)
    w = linalg.eigvalsh(a)
    if psd:
        w = _clamp(w)
    return w


def _clamp(w: np.ndarray) -> np.ndarray:
    if len(w) and w[-1] < -CLAMP_TOL:
        raise NegativeEigenvalue(f"eigenvalue {w[-1]!r} below -{CLAMP_TOL}")
    return np.where(w < 0, 0.0, w)


def entropy_of_spectrum(w: np.ndarray) -> float:
    w = np.asarray(w, dtype=float)
    w = w[w >= ENTROPY_CUTOFF]
    return float(-np.sum(w * np.log2(w))) + 0.0


def von_neumann_entropy(rho) -> float:
    return entropy_of_spectrum(eigenvalues_hermitian(rho))


def _entropy_unchecked(m: np.ndarray) -> float:
    # for matrices we built ourselves as Hermitian PSD
    return entropy_of_spectrum(_clamp(linalg.eigvalsh(m)))


def trace_norm(m) -> float:
    """Sum of singular values."""
    a = _matrix_of(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"trace norm needs a square matrix, got {a.shape}")
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False).sum())


def conditional_vn_entropy(rho, given: Iterable[str], of: Iterable[str] | None = None) -> float:
    """S(of | given) = S(of ∪ given) - S(given); ``of`` defaults to the rest."""
    if isinstance(rho, StateVector):
        rho = rho.density()
    given = list(given)
    for n in given:
        rho.layout.position(n)
    if of is None:
        of = [n for n in rho.layout.names if n not in given]
    joint = list(of) + [n for n in given if n not in of]
    s_joint = von_neumann_entropy(partial_trace(rho, joint))
    s_given = von_neumann_entropy(partial_trace(rho, given)) if given else 0.0
    return s_joint - s_given


# ----------------------------------------------------------------------
# classical-quantum ensembles


@dataclass(frozen=True, eq=False)
class CqEnsemble:
    labels: Alphabet
    weights: np.ndarray
    states: tuple[DensityMatrix, ...]

    def __post_init__(self):
        labels = self.labels if isinstance(self.labels, Alphabet) else Alphabet(tuple(self.labels))
        w = np.array(self.weights, dtype=float)
        states = tuple(self.states)
        if not (len(labels) == len(w) == len(states)):
            raise ValidationError("labels, weights and states must have equal length")
        if (w < 0).any():
            raise ValidationError("ensemble weights must be non-negative")
        if abs(w.sum() - 1.0) > NORM_TOL:
            raise NotNormalized(f"ensemble weights sum to {w.sum()!r}")
        layouts = {s.layout for s in states}
        if len(layouts) > 1:
            raise ValidationError("ensemble states must share one layout")
        w.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "states", states)

    @property
    def layout(self) -> RegisterLayout:
        return self.states[0].layout

    def average(self) -> np.ndarray:
        return sum(w * s.matrix for w, s in zip(self.weights, self.states))


def measure_subsystem(state, register: str, labels: Sequence[str] | None = None) -> CqEnsemble:
    """Measure one register in the computational basis.

    Zero-probability outcomes are omitted. Residual states live on the
    remaining registers (a 1x1 matrix when nothing remains).
    """
    layout = state.layout
    pos = layout.position(register)
    d = layout.dims[pos]
    if labels is None:
        labels = [str(i) for i in range(d)]
    elif len(labels) != d:
        raise ValidationError(f"{len(labels)} labels for a register of dimension {d}")
    rest = layout.without([register])
    out_labels, weights, states = [], [], []
    if isinstance(state, StateVector):
        t = np.moveaxis(state.tensor(), pos, 0).reshape(d, -1)
        for i in range(d):
            vec = t[i]
            p = float(np.vdot(vec, vec).real)
            if p <= ENTROPY_CUTOFF:
                continue
            vec = vec / math.sqrt(p)
            out_labels.append(labels[i])
            weights.append(p)
            states.append(DensityMatrix(rest, np.outer(vec, vec.conj())))
    else:
        k = len(layout.dims)
        axes = [pos] + [i for i in range(k) if i != pos]
        t = state.matrix.reshape(layout.dims * 2).transpose(axes + [a + k for a in axes])
        t = t.reshape(d, rest.dim, d, rest.dim)
        for i in range(d):
            block = t[i, :, i, :]
            p = float(np.trace(block).real)
            if p <= ENTROPY_CUTOFF:
                continue
            out_labels.append(labels[i])
            weights.append(p)
            states.append(DensityMatrix(rest, block / p))
    weights = np.asarray(weights)
    return CqEnsemble(Alphabet(tuple(out_labels)), weights / weights.sum(), tuple(states))


def holevo_information(e: CqEnsemble) -> float:
    """χ = S(Σ p ρ) - Σ p S(ρ)."""
    avg = _entropy_unchecked(e.average())
    return avg - float(sum(w * _entropy_unchecked(s.matrix) for w, s in zip(e.weights, e.states)))


# ----------------------------------------------------------------------
# POVMs


@dataclass(frozen=True, eq=False)
class Povm:
    elements: tuple[tuple[str, np.ndarray], ...]
    _roots: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        elems = []
        dim = None
        for label, m in self.elements:
            m = np.array(m, dtype=complex)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise DimensionMismatch(f"POVM element {label!r} is not square")
            if dim is None:
                dim = m.shape[0]
            elif m.shape[0] != dim:
                raise DimensionMismatch("POVM elements have different dimensions")
            _check_hermitian(m)
            w = linalg.eigvalsh(m)
            if len(w) and w[-1] < -CLAMP_TOL:
                raise NegativeEigenvalue(f"POVM element {label!r} is not PSD (eigenvalue {w[-1]:.3g})")
            m.setflags(write=False)
            elems.append((str(label), m))
        if not elems:
            raise ValidationError("POVM needs at least one element")
        labels = [l for l, _ in elems]
        if len(set(labels)) != len(labels):
            raise ValidationError(f"duplicate POVM labels {labels}")
        total = sum(m for _, m in elems)
        err = float(np.abs(total - np.eye(dim)).max())
        if err > POVM_COMPLETENESS_TOL:
            raise ValidationError(f"POVM elements sum to identity only within {err:.3g}")
        object.__setattr__(self, "elements", tuple(elems))

    @property
    def dim(self) -> int:
        return self.elements[0][1].shape[0]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(l for l, _ in self.elements)

    def element(self, label: str) -> np.ndarray:
        for l, m in self.elements:
            if l == label:
                return m
        raise KeyError(label)

    def sqrt_element(self, label: str) -> np.ndarray:
        if label not in self._roots:
            w, v = linalg.eigh(self.element(label))
            self._roots[label] = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
        return self._roots[label]


@dataclass(frozen=True, eq=False)
class PovmOutcome:
    label: str
    probability: float
    post_state: DensityMatrix | None


def apply_povm(povm: Povm, rho, register: str | None = None) -> list[PovmOutcome]:
    """Outcome probabilities tr(E ρ) and post-measurement states √E ρ √E / p.

    With ``register`` the POVM acts on that register only (identity on the
    rest); otherwise its dimension must equal the state's.
    """
    if isinstance(rho, StateVector):
        rho = rho.density()
    if register is None:
        if povm.dim != rho.dim:
            raise DimensionMismatch(f"POVM dimension {povm.dim} vs state dimension {rho.dim}")
        lift = lambda op: op  # noqa: E731
    else:
        if povm.dim != rho.layout.dim_of(register):
            raise DimensionMismatch(
                f"POVM dimension {povm.dim} vs register {register!r} of dimension {rho.layout.dim_of(register)}"
            )
        lift = lambda op: _embed_operator(op, rho.layout, register)  # noqa: E731
    out = []
    for label, elem in povm.elements:
        p = float(np.trace(lift(elem) @ rho.matrix).real)
        p = min(max(p, 0.0), 1.0)
        post = None
        if p > ENTROPY_CUTOFF:
            root = lift(povm.sqrt_element(label))
            m = root @ rho.matrix @ root.conj().T
            m = 0.5 * (m + m.conj().T) / np.trace(m).real
            post = DensityMatrix(rho.layout, m)
        out.append(PovmOutcome(label, p, post))
    return out


# ----------------------------------------------------------------------
# debug serialisation


def matrix_to_json(m) -> list:
    """Nested lists of ``[re, im]`` pairs."""
    a = np.asarray(_matrix_of(m) if not isinstance(m, StateVector) else m.amplitudes)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def matrix_from_json(data) -> np.ndarray:
    a = np.asarray(data, dtype=float)
    if a.shape[-1] != 2:
        raise ValidationError("expected trailing [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]
