"""Catalog of two-party primitives and their closed-form leakage values.

Labels: bit strings for bit-valued outputs, ``"c:y"`` for a selection bit
with its value, and ``"_bot"`` for the erasure symbol.
"""
from __future__ import annotations

import itertools
import math
import re
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import OutOfValidity, OutOfValidityWarning, ParameterOutOfRange, ParseError
from .probdist import BOT, JointDistribution, shannon_entropy

ROT_MAX_R = 12
OT_MAX_R = 6
OTP_THRESHOLD = 0.5 - 1.0 / (2.0 * math.sqrt(2.0))


@dataclass(frozen=True, eq=False)
class PrimitiveSpec:
    name: str
    params: tuple
    dist: JointDistribution

    @property
    def identifier(self) -> str:
        if not self.params:
            return self.name
        return self.name + "/" + "/".join(format(p, "g") if isinstance(p, float) else str(p) for p in self.params)

    def __repr__(self):
        return f"PrimitiveSpec({self.identifier!r}, shape={self.dist.shape})"


def _bits(r: int) -> list[str]:
    return ["".join(b) for b in itertools.product("01", repeat=r)]


def _check_r(r, lo: int, hi: int, what: str) -> int:
    if isinstance(r, bool) or int(r) != r or not lo <= r <= hi:
        raise ParameterOutOfRange(f"{what} needs an integer r in [{lo}, {hi}], got {r!r}")
    return int(r)


def make_rot(r: int = 1) -> PrimitiveSpec:
    """Randomized 1-out-of-2^r erasure: Bob gets x or ⊥, each w.p. 1/2."""
    r = _check_r(r, 1, ROT_MAX_R, "rot")
    n = 2**r
    p = np.zeros((n, n + 1))
    w = 2.0 ** (-r - 1)
    p[np.arange(n), np.arange(n)] = w
    p[:, n] = w
    xs = _bits(r)
    return PrimitiveSpec("rot", (r,), JointDistribution(xs, xs + [BOT], p))


def make_ot(r: int = 1) -> PrimitiveSpec:
    """Randomized 1-2 OT of r-bit strings: X = (x0, x1), Y = (c, x_c)."""
    r = _check_r(r, 1, OT_MAX_R, "ot")
    xs = _bits(2 * r)
    strs = _bits(r)
    ys = [f"{c}:{y}" for c in "01" for y in strs]
    n = 2**r
    p = np.zeros((len(xs), len(ys)))
    w = 2.0 ** (-2 * r - 1)
    for i, x in enumerate(xs):
        for c in range(2):
            p[i, c * n + int(x[c * r : (c + 1) * r], 2)] = w
    return PrimitiveSpec("ot", (r,), JointDistribution(xs, ys, p))


def make_sand() -> PrimitiveSpec:
    """Randomized AND sharing: outputs (x, a), (y, b) with a ⊕ b = x ∧ y."""
    labels = ["00", "01", "10", "11"]
    p = np.zeros((4, 4))
    for i, xa in enumerate(labels):
        for j, yb in enumerate(labels):
            x, a = int(xa[0]), int(xa[1])
            y, b = int(yb[0]), int(yb[1])
            if a ^ b == x & y:
                p[i, j] = 1 / 8
    return PrimitiveSpec("sand", (), JointDistribution(labels, labels, p))


def make_otp(p: float) -> PrimitiveSpec:
    """1-2 OT of bits where Bob's value is flipped with probability p."""
    p = float(p)
    if not 0.0 < p < 0.5:
        raise ParameterOutOfRange(f"otp needs 0 < p < 1/2, got {p!r}")
    xs = _bits(2)
    ys = [f"{c}:{y}" for c in "01" for y in "01"]
    t = np.zeros((4, 4))
    for i, x in enumerate(xs):
        for c in range(2):
            for y in range(2):
                t[i, c * 2 + y] = (1 - p) / 8 if y == int(x[c]) else p / 8
    return PrimitiveSpec("otp", (p,), JointDistribution(xs, ys, t))


def make_independent() -> PrimitiveSpec:
    return PrimitiveSpec("independent", (), JointDistribution(["0", "1"], ["0", "1"], np.full((2, 2), 0.25)))


def make_correlated() -> PrimitiveSpec:
    return PrimitiveSpec("correlated", (), JointDistribution(["0", "1"], ["0", "1"], np.diag([0.5, 0.5])))


CATALOG = {
    "rot": make_rot,
    "ot": make_ot,
    "sand": make_sand,
    "otp": make_otp,
    "independent": make_independent,
    "correlated": make_correlated,
}

_ID = re.compile(r"^(?:primitive://)?([a-z]+)(?:/([^/]+))?$")


def resolve(identifier: str) -> PrimitiveSpec:
    """Parse ``rot/3``, ``primitive://ot/1``, ``otp/0.05`` or ``sand``."""
    m = _ID.match(identifier.strip())
    if not m or m.group(1) not in CATALOG:
        raise ParseError(f"unknown primitive identifier {identifier!r}; known: {sorted(CATALOG)}")
    name, arg = m.groups()
    make = CATALOG[name]
    if name in ("rot", "ot", "otp"):
        if arg is None:
            if name == "otp":
                raise ParseError("otp needs a noise parameter, e.g. otp/0.05")
            return make()
        kind = float if name == "otp" else int
        try:
            value = kind(arg)
        except ValueError:
            raise ParseError(f"{name} parameter must be {'a number' if kind is float else 'an integer'}, got {arg!r}") from None
        return make(value)
    if arg is not None:
        raise ParseError(f"{name} takes no parameter")
    return make()


# ----------------------------------------------------------------------
# closed forms


class RotClosedForm(NamedTuple):
    spectrum: np.ndarray
    s_a: float
    delta: float


def rot_leakage_closed(r: int) -> RotClosedForm:
    """Spectrum of ρ_A, S(A) and Δ for any regular embedding of rot/r."""
    if isinstance(r, bool) or int(r) != r or r < 1:
        raise ParameterOutOfRange(f"r must be a positive integer, got {r!r}")
    r = int(r)
    small = 2.0 ** (-(r + 1))
    big = 0.5 + small
    s_a = -big * math.log2(big) + (2**r - 1) * small * (r + 1)
    # beyond the catalog range only the distinct eigenvalues are returned
    spectrum = np.full(2**r if r <= ROT_MAX_R else 2, small)
    spectrum[0] = big
    return RotClosedForm(spectrum, s_a, s_a - r / 2)


def _h(p: float) -> float:
    return shannon_entropy([p, 1 - p]) if 0 < p < 1 else 0.0


class OtClosedForm(NamedTuple):
    spectrum: np.ndarray
    s_aprime: float


def ot_entropy_closed(omega: float) -> OtClosedForm:
    """Spectrum and entropy of the reduced state of the one-phase OT embedding.

    ``omega`` is the phase on the single cycle of the ot/1 support graph.
    """
    omega = float(omega)
    if not 0.0 <= omega < 2 * math.pi:
        raise ParameterOutOfRange(f"omega must lie in [0, 2π), got {omega!r}")
    c, s = math.cos(omega / 4), math.sin(omega / 4)
    spectrum = np.sort(np.array([1 + c, 1 - c, 1 + s, 1 - s]) / 4)[::-1]
    s_ap = 1 + (_h((1 - c) / 2) + _h((1 - s) / 2)) / 2
    return OtClosedForm(spectrum, s_ap)


def ot_single_phase_phases(omega: float) -> dict:
    """Phase map on ot/1 putting ``omega`` on ``(11, 1:1)`` and zero elsewhere."""
    P = make_ot(1).dist
    theta = {(P.x[i], P.y[j]): 0.0 for i, j in P.support}
    theta[("11", "1:1")] = float(omega)
    return theta


def otp_lower_bound(p: float, strict: bool = False) -> float:
    """(1/2 − p − √(p(1−p)))² / (32 ln 2), valid for p below 1/2 − 1/(2√2).

    Outside validity returns 0 with an :class:`OutOfValidityWarning`, or
    raises :class:`OutOfValidity` when ``strict``.
    """
    p = float(p)
    if not 0.0 <= p < 0.5:
        raise ParameterOutOfRange(f"p must lie in [0, 1/2), got {p!r}")
    if p >= OTP_THRESHOLD:
        msg = f"bound only holds for p < {OTP_THRESHOLD:.6f}, got {p!r}"
        if strict:
            raise OutOfValidity(msg)
        warnings.warn(msg, OutOfValidityWarning, stacklevel=2)
        return 0.0
    return (0.5 - p - math.sqrt(p * (1 - p))) ** 2 / (32 * math.log(2))
