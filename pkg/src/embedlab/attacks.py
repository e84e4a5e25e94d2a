"""Measurement attacks on regular embeddings and the average-encoding bound.

Attacks are computed exactly: for a POVM on one party's register we form
the joint distribution of (outcome, other party's output) and score each
conclusive outcome as a guess of a target function of that output.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .embeddings import RegularEmbedding
from .errors import DimensionMismatch, ValidationError
from .probdist import Alphabet
from .quantum import CqEnsemble, DensityMatrix, Povm, RegisterLayout, apply_povm, holevo_information, trace_norm

INCONCLUSIVE = "?"

_PLUS = np.array([1.0, 1.0]) / math.sqrt(2)
_MINUS = np.array([1.0, -1.0]) / math.sqrt(2)


def _proj(*factors: np.ndarray) -> np.ndarray:
    v = factors[0]
    for f in factors[1:]:
        v = np.kron(v, f)
    return np.outer(v, v.conj()).astype(complex)


def bob_xor_povm() -> Povm:
    """Bob's measurement on his (c, y) register that can reveal x0 ⊕ x1.

    ``B_0 = |+->`` and ``B_1 = |-->`` projectors; ``B_?`` completes the
    measurement as ``I - B_0 - B_1``.
    """
    b0 = _proj(_PLUS, _MINUS)
    b1 = _proj(_MINUS, _MINUS)
    return Povm((("0", b0), ("1", b1), (INCONCLUSIVE, np.eye(4) - b0 - b1)))


def alice_choice_povm() -> Povm:
    """Alice's measurement on her (x0, x1) register that can reveal c."""
    a0 = _proj(_MINUS, _PLUS)
    a1 = _proj(_PLUS, _MINUS)
    return Povm((("0", a0), ("1", a1), (INCONCLUSIVE, np.eye(4) - a0 - a1)))


def xor_of_bits(label: str) -> str:
    return str(sum(int(b) for b in label) % 2)


def selection_bit(label: str) -> str:
    return label.split(":", 1)[0]


@dataclass(frozen=True)
class AttackOutcome:
    conclusive_probability: float
    conditional_correctness: float
    outcome_table: list[tuple[str, float, str | None]]
    joint: dict = field(repr=False, default_factory=dict)

    @property
    def success_probability(self) -> float:
        return self.conclusive_probability * self.conditional_correctness

    def to_dict(self) -> dict:
        return {
            "conclusive_probability": self.conclusive_probability,
            "conditional_correctness": self.conditional_correctness,
            "outcomes": [{"label": l, "probability": p, "inferred": v} for l, p, v in self.outcome_table],
        }


def _side_vectors(e: RegularEmbedding, side: str):
    m = np.asarray(e.amplitudes)
    if side == "B":
        # Bob measures; condition on Alice's x
        return m, e.source.x
    if side == "A":
        return m.T, e.source.y
    raise ValidationError(f"side must be 'A' or 'B', got {side!r}")


def run_povm_attack(
    e: RegularEmbedding,
    povm: Povm,
    side: str,
    target: Callable[[str], str],
    inconclusive: str = INCONCLUSIVE,
) -> AttackOutcome:
    """Score ``povm`` applied to ``side``'s register as a guess of ``target``.

    ``target`` maps the other party's output label to the value the
    attacker tries to learn. Outcome labels other than ``inconclusive``
    are taken as the guessed value.
    """
    vecs, other = _side_vectors(e, side)
    if povm.dim != vecs.shape[1]:
        raise DimensionMismatch(f"POVM dimension {povm.dim} vs register dimension {vecs.shape[1]}")
    joint = {}
    table = []
    conclusive = 0.0
    correct = 0.0
    for label, elem in povm.elements:
        # Pr[outcome, other = o] = <v_o| E |v_o>
        probs = np.einsum("oi,ij,oj->o", vecs.conj(), elem, vecs).real
        probs = np.clip(probs, 0.0, None)
        total = float(probs.sum())
        joint[label] = {o: float(p) for o, p in zip(other, probs)}
        if label == inconclusive:
            table.append((label, total, None))
            continue
        table.append((label, total, label))
        conclusive += total
        correct += float(sum(p for o, p in zip(other, probs) if target(o) == label))
    correctness = correct / conclusive if conclusive > 1e-15 else 0.0
    return AttackOutcome(conclusive, min(correctness, 1.0), table, joint)


def attack_cross_check(e: RegularEmbedding, povm: Povm, side: str) -> float:
    """Largest gap between joint probabilities computed two ways.

    The second way conditions on the other party's output first and then
    applies the POVM to the residual state with :func:`apply_povm`.
    """
    vecs, other = _side_vectors(e, side)
    outcome = run_povm_attack(e, povm, side, target=lambda o: None)
    layout = RegisterLayout((("R", vecs.shape[1]),))
    gap = 0.0
    for o, v in zip(other, vecs):
        p = float(np.vdot(v, v).real)
        if p <= 1e-15:
            continue
        rho = DensityMatrix(layout, np.outer(v, v.conj()) / p)
        for res in apply_povm(povm, rho):
            gap = max(gap, abs(p * res.probability - outcome.joint[res.label][o]))
    return gap


def conditional_ensemble(e: RegularEmbedding, side: str, key: Callable[[str], str]) -> CqEnsemble:
    """States of ``side``'s register grouped by ``key`` of the other output.

    With ``side="A"`` and ``key=selection_bit`` this is Alice's view
    conditioned on Bob's choice.
    """
    vecs, other = _side_vectors(e, side)
    groups: dict[str, np.ndarray] = {}
    for o, v in zip(other, vecs):
        k = key(o)
        groups[k] = groups.get(k, 0) + np.outer(v, v.conj())
    labels = sorted(groups)
    weights = np.array([np.trace(groups[k]).real for k in labels])
    layout = RegisterLayout(((side, vecs.shape[1]),))
    states = [DensityMatrix(layout, groups[k] / w) for k, w in zip(labels, weights)]
    return CqEnsemble(Alphabet(tuple(labels)), weights / weights.sum(), tuple(states))


def average_encoding_gap(e: CqEnsemble) -> tuple[float, float]:
    """(Σ p_x ‖ρ − ρ_x‖₁, √(2 ln 2 · χ)); the first never exceeds the second."""
    avg = e.average()
    lhs = float(sum(w * trace_norm(avg - s.matrix) for w, s in zip(e.weights, e.states)))
    chi = max(holevo_information(e), 0.0)
    return lhs, math.sqrt(2 * math.log(2) * chi)
