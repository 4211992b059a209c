"""Exact exponent calculus for NLKG on R^d x M^k.

Every exponent is a :class:`fractions.Fraction`; ``INF`` stands for +infinity
and compares correctly against fractions.  Borderline cases such as
``2k/(k - 2 gamma) == 2p`` at ``p == p_c`` are decided exactly.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational as _RationalABC
from typing import NamedTuple, Union

Rational = Fraction
INF = math.inf
Extended = Union[Fraction, float]  # a Fraction or INF


def as_rational(value) -> Fraction:
    """Parse ``value`` into an exact Fraction.

    Accepts ints, Fractions and strings such as ``"7/3"`` or ``"2.5"``.
    Floats are refused: a binary float is not the rational the user meant.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not exponents")
    if isinstance(value, _RationalABC):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if text.lower() in {"inf", "+inf", "infinity", "nan"}:
            raise ValueError(f"exponent must be a finite rational, got {value!r}")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational number: {value!r}") from exc
    raise TypeError(f"expected int, Fraction or 'NUM/DEN' string, got {type(value).__name__}")


def fmt(value: Extended | None) -> str:
    if value is None:
        return ""
    if value == INF:
        return "inf"
    return str(value)


class Route(enum.Enum):
    SOBOLEV = "SobolevEmbedding"
    MORREY = "MorreyFiniteVolume"
    NONE = "NotApplicable"


@dataclass(frozen=True)
class Verdict:
    applicable: bool
    route: Route
    failed_conditions: tuple[str, ...] = ()
    # (lo, hi) ranges of p stated at theorem level and at Strichartz-proposition level
    theorem_range: tuple[Extended, Extended] | None = None
    proposition_range: tuple[Extended, Extended] | None = None

    def __post_init__(self):
        if self.applicable == bool(self.failed_conditions):
            raise ValueError("applicable must be equivalent to an empty failed_conditions list")
        if (self.route is Route.NONE) == self.applicable:
            raise ValueError("route NotApplicable must coincide with applicable=False")

    @classmethod
    def from_checks(cls, failed, route, **ranges) -> "Verdict":
        failed = tuple(failed)
        return cls(not failed, Route.NONE if failed else route, failed, **ranges)

    def to_dict(self) -> dict:
        out = {
            "applicable": self.applicable,
            "route": self.route.value,
            "failed_conditions": list(self.failed_conditions),
        }
        if self.theorem_range is not None:
            out["theorem_range"] = [fmt(x) for x in self.theorem_range]
        if self.proposition_range is not None:
            out["proposition_range"] = [fmt(x) for x in self.proposition_range]
        return out


class CriticalExponents(NamedTuple):
    p0: Fraction
    pc: Fraction
    p_sob: Fraction


class Applicability(NamedTuple):
    thm1: Verdict
    thm2: Verdict


@dataclass(frozen=True)
class ExponentProfile:
    """Strichartz exponents attached to ``(q, rho) = (p, 2p)``."""

    d: int
    k: int
    p: Fraction
    q: Fraction
    r: Fraction
    s: Fraction
    gamma: Fraction
    rho: Fraction
    r_star: Extended
    notes: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "k": self.k,
            **{name: fmt(getattr(self, name)) for name in ("p", "q", "r", "s", "gamma", "rho", "r_star")},
        }


def _check_dims(d: int, k: int) -> None:
    if int(d) != d or int(k) != k or d < 1 or k < 1:
        raise ValueError(f"d and k must be positive integers, got d={d}, k={k}")


def critical_exponents(d: int, k: int) -> CriticalExponents:
    _check_dims(d, k)
    if d + k <= 2:
        raise ValueError(f"p_c = 1 + 4/(d+k-2) is undefined for d+k={d + k}")
    p0 = max(Fraction(2), 1 + Fraction(4, d))
    pc = 1 + Fraction(4, d + k - 2)
    p_sob = Fraction(d + 2, d + k - 2)
    return CriticalExponents(p0, pc, p_sob)


def p0_exponent(d: int) -> Fraction:
    return max(Fraction(2), 1 + Fraction(4, d))


def theorem2_cap(d: int) -> Extended:
    """Upper bound on p for the mixed-norm estimate: (d^2+2d-4)/(d^2-2d), INF for d <= 2."""
    if d <= 2:
        return INF
    return Fraction(d * d + 2 * d - 4, d * d - 2 * d)


def _inv(x: Extended) -> Fraction:
    return Fraction(0) if x == INF else 1 / Fraction(x)


def admissible_r(d: int, q) -> Extended:
    """Solve ``2/q = d(1/2 - 1/r)`` for r and check the admissible range."""
    q = INF if q == INF else as_rational(q)
    if q < 2:
        raise ValueError(f"q must be >= 2, got {fmt(q)}")
    inv_r = Fraction(1, 2) - 2 * _inv(q) / d
    if inv_r < 0:
        raise ValueError(f"no admissible r for d={d}, q={fmt(q)} (needs q >= 4 when d = 1)")
    r = INF if inv_r == 0 else 1 / inv_r
    if r == INF and d >= 2:
        raise ValueError(f"r = inf is not admissible for d={d}")
    return r


def is_admissible(d: int, q, r) -> bool:
    """Range and identity check, with the endpoint ``q = 2`` accepted only for d >= 4."""
    q = INF if q == INF else as_rational(q)
    r = INF if r == INF else as_rational(r)
    if q < 2 or r < 2:
        return False
    if 2 * _inv(q) != d * (Fraction(1, 2) - _inv(r)):
        return False
    if d == 1:
        return True
    if d == 2:
        return r != INF
    if r > Fraction(2 * d, d - 2):
        return False
    return not (q == 2 and d <= 3)


def is_endpoint(d: int, q, r) -> bool:
    """True for the pair ``(2, 2d/(d-2))``, d >= 3, whether or not it is admitted."""
    return d >= 3 and q == 2 and r == Fraction(2 * d, d - 2)


def strichartz_s(d: int, r) -> Fraction:
    r = INF if r == INF else as_rational(r)
    if r < 2:
        raise ValueError(f"r must be >= 2, got {fmt(r)}")
    return 1 - Fraction(1, 2) * (Fraction(d, 2) + 1) * (1 - 2 * _inv(r))


def sobolev_target(d: int, s: Fraction, r: Extended) -> Extended:
    """r* with ``s - d/r = -d/r*``; INF once ``d <= s r``."""
    sr = s * r if r != INF else INF
    if sr >= d:
        return INF
    return d * r / (d - sr)


def derived_profile(d: int, k: int, p) -> ExponentProfile:
    _check_dims(d, k)
    p = as_rational(p)
    if d * p <= 4:
        raise ValueError(f"r(p) = 2dp/(dp-4) needs dp > 4, got d={d}, p={p}")
    r = Fraction(2 * d) * p / (d * p - 4)
    s = (d * p - d - 2) / (d * p)
    gamma = (d + 2 + 2 * p - d * p) / (2 * p)
    return ExponentProfile(d, k, p, p, r, s, gamma, 2 * p, sobolev_target(d, s, r))


def embedding_euclidean(d: int, s, r, rho) -> bool:
    """Besov ``B^s_{r,2}(R^d)`` into ``L^rho``: ``2 <= r <= rho <= r*``."""
    s = as_rational(s)
    if s <= 0:
        raise ValueError(f"embedding needs s > 0, got {s}")
    r = INF if r == INF else as_rational(r)
    rho = INF if rho == INF else as_rational(rho)
    if r < 2:
        raise ValueError(f"embedding needs r >= 2, got {fmt(r)}")
    return r <= rho <= sobolev_target(d, s, r)


def embedding_compact(k: int, gamma, p, finite_volume: bool = True) -> Verdict:
    """Decide ``H^gamma(M^k)`` into ``L^{2p}(M^k)`` and by which route."""
    gamma, p = as_rational(gamma), as_rational(p)
    if gamma < 0 or p < 1:
        raise ValueError(f"needs gamma >= 0 and p >= 1, got gamma={gamma}, p={p}")
    if k >= 2 * gamma:
        target = INF if k == 2 * gamma else Fraction(2 * k) / (k - 2 * gamma)
        failed = [] if target >= 2 * p else ["sobolev_exponent"]
        return Verdict.from_checks(failed, Route.SOBOLEV)
    failed = [] if finite_volume else ["finite_volume"]
    return Verdict.from_checks(failed, Route.MORREY)


def _theorem1(d: int, k: int, p: Fraction) -> Verdict:
    failed = []
    p0 = p0_exponent(d)
    if k > 2:
        failed.append("k_le_2")
    if not 3 <= d + k <= 6:
        failed.append("dim_sum_in_3_6")
    if p < p0:
        failed.append("p_ge_p0")
    pc = None
    if d + k >= 3:
        pc = critical_exponents(d, k).pc
        if p > pc:
            failed.append("p_le_pc")
    route = Route.SOBOLEV
    if d * p <= 4:
        failed.append("r_defined")
    else:
        prof = derived_profile(d, k, p)
        if prof.s <= 0 or not embedding_euclidean(d, prof.s, prof.r, prof.rho):
            failed.append("euclidean_embedding")
        if prof.gamma < 0:
            failed.append("gamma_nonnegative")
        else:
            compact = embedding_compact(k, prof.gamma, p, finite_volume=True)
            if compact.applicable:
                route = compact.route
            else:
                failed.append("compact_embedding")
    hi = pc if pc is not None else None
    return Verdict.from_checks(failed, route, theorem_range=(p0, hi), proposition_range=(p0, hi))


def _theorem2(d: int, k: int, p: Fraction, gamma_extra: Fraction | None) -> Verdict:
    failed = []
    p0 = p0_exponent(d)
    cap = theorem2_cap(d)
    if d > 5:
        failed.append("d_le_5")
    if d == 1 and k < 2:
        failed.append("k_ge_2_if_d_eq_1")
    if p < p0:
        failed.append("p_ge_p0")
    if p > cap:
        failed.append("p_le_cap")
    if gamma_extra is not None and gamma_extra <= Fraction(k, 2):
        failed.append("gamma_gt_k_half")
    # The theorem states p < inf for d = 2; the proposition lists p >= 3 (= p0).
    prop_lo = Fraction(3) if d == 2 else p0
    return Verdict.from_checks(failed, Route.SOBOLEV, theorem_range=(p0, cap), proposition_range=(prop_lo, cap))


def theorem_applicability(d: int, k: int, p, gamma_extra=None) -> Applicability:
    _check_dims(d, k)
    p = as_rational(p)
    if gamma_extra is not None:
        gamma_extra = as_rational(gamma_extra)
    return Applicability(_theorem1(d, k, p), _theorem2(d, k, p, gamma_extra))


# --- restriction table -------------------------------------------------------

TABLE_COLUMNS = ("d", "k", "p_lo", "p_hi", "thm1", "thm2", "route")


def _breakpoints(d: int, k: int) -> list[Fraction]:
    points = {Fraction(2), p0_exponent(d)}
    if d + k >= 3:
        crit = critical_exponents(d, k)
        points.update({crit.pc, crit.p_sob})
    if d >= 3:
        points.add(theorem2_cap(d))
    if d == 1:
        points.add(Fraction(4))
    return sorted(x for x in points if x >= 2)


def restriction_rows(d_range=range(1, 6), k_range=range(1, 4)) -> list[dict]:
    """Piecewise-constant classification of p >= 2 for each (d, k).

    A row with ``p_lo == p_hi`` is the single point; otherwise it is the open
    interval between consecutive breakpoints (``p_hi`` may be INF).
    """
    rows = []
    for d in d_range:
        for k in k_range:
            pts = _breakpoints(d, k)
            cells: list[tuple[Fraction, Extended, Fraction]] = []
            for i, b in enumerate(pts):
                cells.append((b, b, b))
                nxt = pts[i + 1] if i + 1 < len(pts) else INF
                sample = (b + nxt) / 2 if nxt != INF else b + 1
                cells.append((b, nxt, sample))
            for lo, hi, sample in cells:
                v = theorem_applicability(d, k, sample)
                route = v.thm1.route if v.thm1.applicable else v.thm2.route
                rows.append({
                    "d": d, "k": k, "p_lo": lo, "p_hi": hi,
                    "thm1": v.thm1.applicable, "thm2": v.thm2.applicable, "route": route,
                })
    return rows


def format_table(rows) -> str:
    lines = [",".join(TABLE_COLUMNS)]
    for row in rows:
        lines.append(",".join([
            str(row["d"]), str(row["k"]), fmt(row["p_lo"]), fmt(row["p_hi"]),
            "yes" if row["thm1"] else "no", "yes" if row["thm2"] else "no", row["route"].value,
        ]))
    return "\n".join(lines) + "\n"
