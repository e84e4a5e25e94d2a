"""Randomised property suites run by ``embedlab check`` and the test suite.

Each property draws its instances from a generator seeded by the suite seed
and the property name, so suites are reproducible individually.
"""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import attacks, embeddings as em, optimize, primitives, probdist as pd, quantum as q

SUITES = ("symmetry", "markov", "holevo", "monotone", "reduction")


@dataclass
class PropertyResult:
    name: str
    passed: int = 0
    total: int = 0
    worst: float = 0.0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def record(self, ok: bool, margin: float = 0.0, detail=None) -> None:
        self.total += 1
        self.worst = max(self.worst, margin)
        if ok:
            self.passed += 1
        elif len(self.failures) < 5:
            self.failures.append(detail)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "total": self.total, "worst": self.worst, "ok": self.ok}


@dataclass
class SuiteReport:
    suite: str
    seed: int
    properties: list[PropertyResult]

    @property
    def ok(self) -> bool:
        return all(p.ok for p in self.properties)

    def to_dict(self) -> dict:
        return {"suite": self.suite, "seed": self.seed, "ok": self.ok, "properties": [p.to_dict() for p in self.properties]}


def _rng(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(name.encode())])


# ----------------------------------------------------------------------
# random instances


def random_distribution(rng, max_x: int = 4, max_y: int = 4, sparsity: float = 0.3) -> pd.JointDistribution:
    nx = int(rng.integers(2, max_x + 1))
    ny = int(rng.integers(2, max_y + 1))
    p = rng.random((nx, ny)) * (rng.random((nx, ny)) > sparsity)
    # keep every row and column populated
    p[np.arange(nx), rng.integers(0, ny, nx)] += rng.random(nx) + 0.05
    p[rng.integers(0, nx, ny), np.arange(ny)] += rng.random(ny) + 0.05
    return pd.JointDistribution([str(i) for i in range(nx)], [str(j) for j in range(ny)], p / p.sum())


def with_duplicate_rows(rng, P: pd.JointDistribution, copies: int = 2) -> pd.JointDistribution:
    """Split each x into up to ``copies`` labels sharing its conditional P(y|x)."""
    rows, labels = [], []
    for i, x in enumerate(P.x):
        k = int(rng.integers(1, copies + 1))
        w = rng.dirichlet(np.ones(k))
        for c in range(k):
            rows.append(P.probs[i] * w[c])
            labels.append(f"{x}.{c}")
    return pd.JointDistribution(labels, P.y, np.array(rows))


def random_density(rng, d: int, rank: int | None = None) -> np.ndarray:
    rank = rank or d
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_unit_vectors(rng, n: int, d: int) -> np.ndarray:
    v = rng.normal(size=(n, d)) + 1j * rng.normal(size=(n, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def random_ensemble(rng, max_dim: int = 8, max_labels: int = 4) -> q.CqEnsemble:
    d = int(rng.integers(2, max_dim + 1))
    n = int(rng.integers(2, max_labels + 1))
    layout = q.RegisterLayout((("R", d),))
    states = [q.DensityMatrix(layout, random_density(rng, d, int(rng.integers(1, d + 1)))) for _ in range(n)]
    return q.CqEnsemble(pd.Alphabet(tuple(str(i) for i in range(n))), rng.dirichlet(np.ones(n)), tuple(states))


def markov_embedding(rng, P: pd.JointDistribution, dap: int = 2, dbp: int = 2) -> em.EmbeddingState:
    """Random strictly correct embedding: A' depends on x only, B' on y only."""
    nx, ny = P.shape
    theta = rng.uniform(0, 2 * math.pi, size=(nx, ny))
    amp = np.sqrt(P.probs) * np.exp(1j * theta)
    phi = random_unit_vectors(rng, nx, dap)
    chi = random_unit_vectors(rng, ny, dbp)
    t = np.einsum("xy,xa,yb->xayb", amp, phi, chi)
    layout = q.RegisterLayout((("A", nx), ("A'", dap), ("B", ny), ("B'", dbp)))
    return em.EmbeddingState(P, q.StateVector(layout, t.ravel()))


def copy_embedding(P: pd.JointDistribution, into: str, of: str) -> em.EmbeddingState:
    """Regular embedding plus a work register ``into`` holding a copy of ``of``."""
    nx, ny = P.shape
    amp = np.sqrt(P.probs)
    d = nx if of == "x" else ny
    t = np.zeros((nx, d, ny) if into == "A'" else (nx, ny, d), dtype=complex)
    for i, j in P.support:
        k = i if of == "x" else j
        if into == "A'":
            t[i, k, j] = amp[i, j]
        else:
            t[i, j, k] = amp[i, j]
    if into == "A'":
        layout = q.RegisterLayout((("A", nx), ("A'", d), ("B", ny)))
    else:
        layout = q.RegisterLayout((("A", nx), ("B", ny), ("B'", d)))
    return em.EmbeddingState(P, q.StateVector(layout, t.ravel()))


def block_mixture(rng, blocks: int = 2) -> tuple[pd.JointDistribution, np.ndarray]:
    """A block-diagonal P with random phases; returns (P, phase vector)."""
    parts = [random_distribution(rng, 3, 3, sparsity=0.2) for _ in range(blocks)]
    w = rng.dirichlet(np.ones(blocks))
    nx = sum(p.shape[0] for p in parts)
    ny = sum(p.shape[1] for p in parts)
    table = np.zeros((nx, ny))
    xl, yl = [], []
    r = c = 0
    for b, (part, wb) in enumerate(zip(parts, w)):
        table[r : r + part.shape[0], c : c + part.shape[1]] = wb * part.probs
        xl += [f"{b}.{s}" for s in part.x]
        yl += [f"{b}.{s}" for s in part.y]
        r += part.shape[0]
        c += part.shape[1]
    P = pd.JointDistribution(xl, yl, table)
    return P, rng.uniform(0, 2 * math.pi, len(P.support))


# ----------------------------------------------------------------------
# suites


def suite_symmetry(seed: int) -> list[PropertyResult]:
    rng = _rng(seed, "symmetry")
    symmetric = PropertyResult("directed leakages agree on strictly correct embeddings")
    for _ in range(100):
        P = random_distribution(rng)
        e = markov_embedding(rng, P, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
        rep = em.leakage_general(e)
        symmetric.record(rep.asymmetry < 1e-8 and rep.delta > -1e-9, rep.asymmetry, P.to_dict())
    local = PropertyResult("leakage invariant under local unitaries")
    for _ in range(20):
        P = random_distribution(rng)
        e = em.build_regular(P, rng.uniform(0, 2 * math.pi, len(P.support)))
        base = em.leakage_regular(e).delta
        u, _ = np.linalg.qr(rng.normal(size=(P.shape[0],) * 2) + 1j * rng.normal(size=(P.shape[0],) * 2))
        rotated = q.apply_unitary(e.state, "A", u)
        diff = abs(em._gram_entropy(rotated.amplitudes.reshape(P.shape)) - pd.mutual_information(P) - base)
        local.record(diff < 1e-9, diff)
    return [symmetric, local]


def suite_markov(seed: int) -> list[PropertyResult]:
    rng = _rng(seed, "markov")
    strict = PropertyResult("work registers depending on own output pass strictness")
    violated = PropertyResult("copy of X in B' fails with residual H(X|Y)")
    for _ in range(50):
        P = random_distribution(rng)
        res = em.strict_correctness_check(markov_embedding(rng, P))
        strict.record(res.passed, max(abs(res.residual_bob), abs(res.residual_alice)))
        bad = em.strict_correctness_check(copy_embedding(P, "B'", "x"))
        h = pd.conditional_entropy(P, given="y")
        gap = abs(bad.residual_bob - h)
        violated.record(gap < 1e-9 and (bad.passed == (h < bad.tol)), gap)
    dep = PropertyResult("dependent part preserves I(X;Y) and H(Y|X)")
    for k in range(100):
        P = random_distribution(rng)
        if k % 2:
            P = with_duplicate_rows(rng, P)
        m = pd.dependent_part(P, of="x")
        C = m.collapsed
        d1 = abs(pd.mutual_information(P) - pd.mutual_information(C))
        d2 = abs(pd.conditional_entropy(P, given="x") - pd.conditional_entropy(C, given="x"))
        dep.record(max(d1, d2) < 1e-9, max(d1, d2))
    return [strict, violated, dep]


def suite_holevo(seed: int) -> list[PropertyResult]:
    rng = _rng(seed, "holevo")
    dom = PropertyResult("basis measurement information at most Holevo chi")
    for _ in range(200):
        e = random_ensemble(rng)
        joint = np.array([w * np.diagonal(s.matrix).real for w, s in zip(e.weights, e.states)])
        acc = _mi_raw(np.clip(joint, 0, None))
        chi = q.holevo_information(e)
        dom.record(acc <= chi + 1e-9, acc - chi)
    enc = PropertyResult("average encoding inequality")
    for _ in range(200):
        lhs, rhs = attacks.average_encoding_gap(random_ensemble(rng))
        enc.record(lhs <= rhs + 1e-9, lhs - rhs)
    return [dom, enc]


def _mi_raw(joint: np.ndarray) -> float:
    joint = joint / joint.sum()
    return (
        q.entropy_of_spectrum(joint.sum(1)) + q.entropy_of_spectrum(joint.sum(0)) - q.entropy_of_spectrum(joint.ravel())
    )


def suite_monotone(seed: int) -> list[PropertyResult]:
    rng = _rng(seed, "monotone")
    res = PropertyResult("environment monotones on ideal-functionality states")
    cases = [primitives.resolve(n).dist for n in ("rot/1", "ot/1", "sand", "correlated", "independent")]
    cases += [random_distribution(rng, 3, 3) for _ in range(10)]
    for P in cases:
        C = pd.collapse(P)
        t = em.ideal_functionality(C)
        mono = em.environment_monotones(t)
        leak = em.tripartite_leakage(t)
        slack = min(mono.s_w_given_xa - mono.h_y_given_x, mono.s_w_given_yb - mono.h_x_given_y)
        res.record(mono.holds() and abs(leak.delta) < 1e-9, -slack, C.to_dict())
    return [res]


def suite_reduction(seed: int) -> list[PropertyResult]:
    rng = _rng(seed, "reduction")
    add = PropertyResult("leakage additive over connected components")
    for _ in range(50):
        P, theta = block_mixture(rng, int(rng.integers(2, 4)))
        e = em.build_regular(P, theta)
        total = em.leakage_regular(e).delta
        parts = em.component_leakages(P, e.phases)
        diff = abs(total - sum(w * d for w, d in parts))
        add.record(diff < 1e-9, diff)
    cfg = optimize.OptimizerConfig(restarts=8, seed=seed)
    mono = PropertyResult("min leakage does not increase when collapsing to dependent parts")
    for _ in range(8):
        base = random_distribution(rng, 2, 3, sparsity=0.0)
        P = with_duplicate_rows(rng, base)
        full = optimize.minimize_leakage(P, cfg).best_delta
        coll = optimize.minimize_leakage(pd.collapse(P), cfg).best_delta
        mono.record(full >= coll - 1e-4, coll - full)
    red = PropertyResult("min leakage of ot/1 at least leakage of rot/1")
    ot = optimize.minimize_leakage(primitives.make_ot(1).dist, optimize.OptimizerConfig(seed=seed)).best_delta
    rot = em.leakage_regular(em.canonical(primitives.make_rot(1).dist)).delta
    red.record(ot >= rot - 1e-4, rot - ot)
    return [add, mono, red]


_RUNNERS: dict[str, Callable[[int], list[PropertyResult]]] = {
    "symmetry": suite_symmetry,
    "markov": suite_markov,
    "holevo": suite_holevo,
    "monotone": suite_monotone,
    "reduction": suite_reduction,
}


def run_suite(name: str, seed: int = 7) -> list[SuiteReport]:
    if name == "all":
        return [SuiteReport(n, seed, _RUNNERS[n](seed)) for n in SUITES]
    if name not in _RUNNERS:
        raise KeyError(f"unknown suite {name!r}; choose from {list(SUITES) + ['all']}")
    return [SuiteReport(name, seed, _RUNNERS[name](seed))]
