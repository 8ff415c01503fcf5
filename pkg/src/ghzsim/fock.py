"""Exact symbolic algebra for polynomials in bosonic creation operators.

States are formal sums of creation-operator monomials over a fixed, finite
set of polarization modes.  Coefficients live in the ring Q(i)[sqrt(2)]
(Gaussian rationals extended by sqrt(2)), so every amplitude produced by a
50/50 beamsplitter network with circular analyzers is represented exactly
and equality is decidable with no tolerance.

Each amplitude additionally carries an integer ``order`` tag counting powers
of the pair-creation coupling gamma.  Orders add under multiplication and
amplitudes of different order never sum: they belong to different
perturbation orders and only acquire a relative scale once a numeric
pair-creation probability is supplied (see the Monte Carlo sampler in
:mod:`ghzsim.events`).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import factorial
from typing import Callable, Iterable, Mapping, Tuple, Union


class GhzsimError(Exception):
    """Base class for all errors raised by this package."""


class InvalidModeError(GhzsimError):
    """A (beam, polarization) pair outside the modeled setup."""


class OrderMixError(GhzsimError):
    """Amplitudes of different coupling order were combined."""


class IrrationalValueError(GhzsimError):
    """A value expected to be a plain rational has a sqrt(2) or imaginary part."""


# ---------------------------------------------------------------------------
# Coefficient ring Q(i)[sqrt2], tagged with a gamma exponent
# ---------------------------------------------------------------------------

RationalLike = Union[int, Fraction]


@dataclass(frozen=True)
class Amplitude:
    """Element ``(re + im*i) + (re_sqrt2 + im_sqrt2*i)*sqrt(2)`` times gamma^order."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)
    re_sqrt2: Fraction = Fraction(0)
    im_sqrt2: Fraction = Fraction(0)
    order: int = 0

    def __post_init__(self) -> None:
        for field in ("re", "im", "re_sqrt2", "im_sqrt2"):
            value = getattr(self, field)
            if not isinstance(value, Fraction):
                object.__setattr__(self, field, Fraction(value))
        if self.order < 0:
            raise OrderMixError("gamma order must be non-negative")
        # canonical zero: a vanishing value carries order 0
        if self.order and not any(
            (self.re, self.im, self.re_sqrt2, self.im_sqrt2)
        ):
            object.__setattr__(self, "order", 0)

    @property
    def is_zero(self) -> bool:
        return not any((self.re, self.im, self.re_sqrt2, self.im_sqrt2))

    def __add__(self, other: "Amplitude") -> "Amplitude":
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        if self.order != other.order:
            raise OrderMixError(
                f"cannot add amplitudes of order {self.order} and {other.order}"
            )
        return Amplitude(
            self.re + other.re,
            self.im + other.im,
            self.re_sqrt2 + other.re_sqrt2,
            self.im_sqrt2 + other.im_sqrt2,
            self.order,
        )

    def __neg__(self) -> "Amplitude":
        return Amplitude(-self.re, -self.im, -self.re_sqrt2, -self.im_sqrt2, self.order)

    def __sub__(self, other: "Amplitude") -> "Amplitude":
        return self + (-other)

    def __mul__(self, other: Union["Amplitude", RationalLike]) -> "Amplitude":
        if isinstance(other, (int, Fraction)):
            other = Amplitude(other)
        # complex parts: p = re + im*i, q = re_sqrt2 + im_sqrt2*i
        # (p1 + q1 s)(p2 + q2 s) = (p1 p2 + 2 q1 q2) + (p1 q2 + q1 p2) s  with s = sqrt2
        p1, q1 = (self.re, self.im), (self.re_sqrt2, self.im_sqrt2)
        p2, q2 = (other.re, other.im), (other.re_sqrt2, other.im_sqrt2)

        def cmul(a, b):
            return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])

        def cadd(a, b):
            return (a[0] + b[0], a[1] + b[1])

        p = cadd(cmul(p1, p2), tuple(2 * v for v in cmul(q1, q2)))
        q = cadd(cmul(p1, q2), cmul(q1, p2))
        return Amplitude(p[0], p[1], q[0], q[1], self.order + other.order)

    __rmul__ = __mul__

    def conjugate(self) -> "Amplitude":
        return Amplitude(self.re, -self.im, self.re_sqrt2, -self.im_sqrt2, self.order)

    def abs_squared(self) -> "Amplitude":
        """|value|^2 with gamma normalized to 1 (order dropped)."""
        product = self * self.conjugate()
        if product.im or product.im_sqrt2:
            raise AssertionError("modulus squared must be real")
        return Amplitude(product.re, 0, product.re_sqrt2, 0, 0)

    def inverse(self) -> "Amplitude":
        if self.is_zero:
            raise ZeroDivisionError("zero amplitude has no inverse")
        if self.order:
            raise OrderMixError("only order-0 amplitudes are invertible")
        # 1/(p + q s) = (p - q s) / (p^2 - 2 q^2); the denominator is a nonzero
        # Gaussian rational because sqrt2 is not an element of Q(i).
        p, q = (self.re, self.im), (self.re_sqrt2, self.im_sqrt2)

        def cmul(a, b):
            return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])

        den = (
            p[0] * p[0] - p[1] * p[1] - 2 * (q[0] * q[0] - q[1] * q[1]),
            2 * p[0] * p[1] - 4 * q[0] * q[1],
        )
        norm = den[0] * den[0] + den[1] * den[1]
        inv_den = (den[0] / norm, -den[1] / norm)
        new_p = cmul(p, inv_den)
        new_q = cmul((-q[0], -q[1]), inv_den)
        return Amplitude(new_p[0], new_p[1], new_q[0], new_q[1], 0)

    def __truediv__(self, other: "Amplitude") -> "Amplitude":
        return self * other.inverse()

    @property
    def is_rational(self) -> bool:
        return not (self.im or self.re_sqrt2 or self.im_sqrt2)

    def to_fraction(self) -> Fraction:
        if not self.is_rational or self.order:
            raise IrrationalValueError(f"{self} is not a plain rational")
        return self.re

    def __str__(self) -> str:
        return render_amplitude(self)


ZERO = Amplitude()
ONE = Amplitude(1)
I_UNIT = Amplitude(0, 1)
SQRT2 = Amplitude(0, 0, 1)
INV_SQRT2 = Amplitude(0, 0, Fraction(1, 2))


def rational(value: RationalLike, order: int = 0) -> Amplitude:
    return Amplitude(Fraction(value), 0, 0, 0, order)


def gamma_power(order: int) -> Amplitude:
    """The bare coupling factor gamma^order with unit coefficient."""
    return Amplitude(1, 0, 0, 0, order)


def _render_gaussian(re: Fraction, im: Fraction) -> str:
    if not im:
        return str(re)
    if im == 1:
        im_part = "i"
    elif im == -1:
        im_part = "-i"
    else:
        im_part = f"{im}i"
    if not re:
        return im_part
    sign = "+" if im > 0 else "-"
    mag = im_part.lstrip("-")
    return f"({re}{sign}{mag})"


def render_amplitude(amp: Amplitude) -> str:
    """Canonical ``p + q*sqrt2`` text form of the value (gamma not included)."""
    if amp.is_zero:
        return "0"
    plain = _render_gaussian(amp.re, amp.im)
    root = _render_gaussian(amp.re_sqrt2, amp.im_sqrt2)
    if not (amp.re_sqrt2 or amp.im_sqrt2):
        return plain
    if root == "1":
        root_part = "√2"
    elif root == "-1":
        root_part = "-√2"
    else:
        root_part = f"{root}·√2"
    if not (amp.re or amp.im):
        return root_part
    if root_part.startswith("-"):
        return f"{plain} - {root_part[1:]}"
    return f"{plain} + {root_part}"


def amplitude_to_json(amp: Amplitude) -> dict:
    return {
        "re": str(amp.re),
        "im": str(amp.im),
        "re_sqrt2": str(amp.re_sqrt2),
        "im_sqrt2": str(amp.im_sqrt2),
        "gamma_order": amp.order,
    }


def amplitude_from_json(obj: Mapping[str, object]) -> Amplitude:
    return Amplitude(
        Fraction(str(obj["re"])),
        Fraction(str(obj["im"])),
        Fraction(str(obj["re_sqrt2"])),
        Fraction(str(obj["im_sqrt2"])),
        int(obj["gamma_order"]),  # type: ignore[arg-type]
    )


# ---------------------------------------------------------------------------
# Modes
# ---------------------------------------------------------------------------


class Polarization(Enum):
    H = "H"
    V = "V"


class Beam(Enum):
    """Spatial beams of the three-photon setup.

    ``A``/``B`` are the two down-conversion beams, ``C`` the beamsplitter
    output that feeds the second polarizing beamsplitter, ``G``/``H``/``Z``
    the observation stations, ``A_H`` the transmitted trigger arm, ``A_V``
    the reflected arm, ``A_45`` that arm after the half-wave plate, and
    ``VETO`` the heralding mode that registers photons removed by the
    spectral filters.
    """

    A = "a"
    A_H = "a_H"
    A_V = "a_V"
    A_45 = "a_45"
    B = "b"
    C = "c"
    G = "g"
    H = "h"
    Z = "z"
    VETO = "trigger-veto"


_BEAM_ORDER = {beam: index for index, beam in enumerate(Beam)}
_POL_ORDER = {Polarization.H: 0, Polarization.V: 1}


@dataclass(frozen=True, order=False)
class Mode:
    """One bosonic mode: a beam together with a polarization."""

    beam: Beam
    polarization: Polarization

    def __post_init__(self) -> None:
        if (self.beam, self.polarization) not in MODE_NAMES:
            raise InvalidModeError(
                f"beam {self.beam.value!r} does not carry polarization "
                f"{self.polarization.value!r} in this setup"
            )

    @property
    def sort_key(self) -> Tuple[int, int]:
        return (_BEAM_ORDER[self.beam], _POL_ORDER[self.polarization])

    def __lt__(self, other: "Mode") -> bool:
        return self.sort_key < other.sort_key

    @property
    def name(self) -> str:
        return MODE_NAMES[(self.beam, self.polarization)]

    def __str__(self) -> str:
        return self.name


# Single naming table shared by the text rendering and the JSON codecs.
# The single-polarization arms render as their bare beam label.
MODE_NAMES: Mapping[Tuple[Beam, Polarization], str] = {
    (Beam.A, Polarization.H): "aH",
    (Beam.A, Polarization.V): "aV",
    (Beam.A_H, Polarization.H): "a_H",
    (Beam.A_V, Polarization.V): "a_V",
    (Beam.A_45, Polarization.H): "a45H",
    (Beam.A_45, Polarization.V): "a45V",
    (Beam.B, Polarization.H): "bH",
    (Beam.B, Polarization.V): "bV",
    (Beam.C, Polarization.H): "cH",
    (Beam.C, Polarization.V): "cV",
    (Beam.G, Polarization.H): "g_H",
    (Beam.G, Polarization.V): "g_V",
    (Beam.H, Polarization.H): "h_H",
    (Beam.H, Polarization.V): "h_V",
    (Beam.Z, Polarization.H): "z_H",
    (Beam.Z, Polarization.V): "z_V",
    (Beam.VETO, Polarization.H): "veto_H",
    (Beam.VETO, Polarization.V): "veto_V",
}

MODE_BY_NAME: Mapping[str, Mode] = {}


def _build_modes() -> None:
    names = dict(MODE_BY_NAME)
    for (beam, pol) in MODE_NAMES:
        mode = Mode(beam, pol)
        names[mode.name] = mode
    globals()["MODE_BY_NAME"] = names


_build_modes()

AH = MODE_BY_NAME["aH"]
AV = MODE_BY_NAME["aV"]
BH = MODE_BY_NAME["bH"]
BV = MODE_BY_NAME["bV"]
CH = MODE_BY_NAME["cH"]
CV = MODE_BY_NAME["cV"]
GH = MODE_BY_NAME["g_H"]
GV = MODE_BY_NAME["g_V"]
HH = MODE_BY_NAME["h_H"]
HV = MODE_BY_NAME["h_V"]
ZH = MODE_BY_NAME["z_H"]
ZV = MODE_BY_NAME["z_V"]
TRIGGER = MODE_BY_NAME["a_H"]
REFLECT_ARM = MODE_BY_NAME["a_V"]
A45H = MODE_BY_NAME["a45H"]
A45V = MODE_BY_NAME["a45V"]
VETOH = MODE_BY_NAME["veto_H"]
VETOV = MODE_BY_NAME["veto_V"]


# ---------------------------------------------------------------------------
# Occupation patterns and polynomials
# ---------------------------------------------------------------------------

# canonical: sorted by mode, every count positive
Pattern = Tuple[Tuple[Mode, int], ...]
PatternLike = Union[Pattern, Mapping[Mode, int], Iterable[Tuple[Mode, int]]]


def as_pattern(obj: PatternLike) -> Pattern:
    items = obj.items() if isinstance(obj, Mapping) else obj
    counts: dict = {}
    for mode, count in items:
        if not isinstance(mode, Mode):
            raise TypeError(f"pattern keys must be Mode, got {mode!r}")
        count = int(count)
        if count < 0:
            raise ValueError("occupation counts must be non-negative")
        if count:
            counts[mode] = counts.get(mode, 0) + count
    return tuple(sorted(counts.items(), key=lambda kv: kv[0].sort_key))


def occupation(pattern: Pattern, mode: Mode) -> int:
    for m, n in pattern:
        if m == mode:
            return n
    return 0


def total_photons(pattern: Pattern) -> int:
    return sum(n for _, n in pattern)


def beam_photons(pattern: Pattern, beam: Beam) -> int:
    return sum(n for m, n in pattern if m.beam == beam)


def pattern_to_json(pattern: Pattern) -> dict:
    return {mode.name: count for mode, count in pattern}


def pattern_from_json(obj: Mapping[str, int]) -> Pattern:
    try:
        return as_pattern({MODE_BY_NAME[name]: count for name, count in obj.items()})
    except KeyError as exc:
        raise InvalidModeError(f"unknown mode name {exc.args[0]!r}") from None


class StatePolynomial:
    """A formal sum of creation-operator monomials with exact coefficients.

    Instances are immutable values; all arithmetic returns new canonical
    polynomials (terms sorted, zero coefficients dropped).  Two polynomials
    are equal exactly when their term maps are equal.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Union[Mapping[PatternLike, Amplitude], Iterable[Tuple[PatternLike, Amplitude]]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        canonical: dict = {}
        for pattern_like, coeff in items:
            pattern = as_pattern(pattern_like)
            if pattern in canonical:
                coeff = canonical[pattern] + coeff
            if coeff.is_zero:
                canonical.pop(pattern, None)
            else:
                canonical[pattern] = coeff
        self._terms = dict(
            sorted(canonical.items(), key=lambda kv: _pattern_sort_key(kv[0]))
        )

    @property
    def terms(self) -> Mapping[Pattern, Amplitude]:
        return dict(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StatePolynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):  # pragma: no cover - polynomials are not hashable
        raise TypeError("StatePolynomial is unhashable")

    def __add__(self, other: "StatePolynomial") -> "StatePolynomial":
        merged = list(self._terms.items()) + list(other._terms.items())
        return StatePolynomial(merged)

    def __neg__(self) -> "StatePolynomial":
        return StatePolynomial({p: -c for p, c in self._terms.items()})

    def __sub__(self, other: "StatePolynomial") -> "StatePolynomial":
        return self + (-other)

    def __mul__(self, other: Union["StatePolynomial", Amplitude, RationalLike]) -> "StatePolynomial":
        if isinstance(other, StatePolynomial):
            return multiply(self, other)
        if isinstance(other, (int, Fraction)):
            other = Amplitude(other)
        return StatePolynomial({p: c * other for p, c in self._terms.items()})

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "StatePolynomial":
        if exponent < 0:
            raise ValueError("negative powers are not defined")
        result = scalar(ONE)
        for _ in range(exponent):
            result = multiply(result, self)
        return result

    def __str__(self) -> str:
        return render_polynomial(self)

    def __repr__(self) -> str:
        return f"StatePolynomial({render_polynomial(self)})"


def _pattern_sort_key(pattern: Pattern):
    return tuple((m.sort_key, n) for m, n in pattern)


def scalar(coeff: Amplitude) -> StatePolynomial:
    """The polynomial ``coeff * 1`` (vacuum unit scaled)."""
    return StatePolynomial({(): coeff})


def vacuum_unit() -> StatePolynomial:
    return scalar(ONE)


def creation(mode: Mode, coeff: Amplitude = ONE) -> StatePolynomial:
    """The single creation operator acting on the vacuum."""
    return StatePolynomial({((mode, 1),): coeff})


def monomial(pattern: PatternLike, coeff: Amplitude = ONE) -> StatePolynomial:
    return StatePolynomial({as_pattern(pattern): coeff})


def multiply(p: StatePolynomial, q: StatePolynomial) -> StatePolynomial:
    """Distributive product; commuting operators add their occupations."""
    out: dict = {}
    for pat_a, coeff_a in p._terms.items():
        for pat_b, coeff_b in q._terms.items():
            merged: dict = dict(pat_a)
            for mode, count in pat_b:
                merged[mode] = merged.get(mode, 0) + count
            key = tuple(sorted(merged.items(), key=lambda kv: kv[0].sort_key))
            coeff = coeff_a * coeff_b
            if key in out:
                coeff = out[key] + coeff
            if coeff.is_zero:
                out.pop(key, None)
            else:
                out[key] = coeff
    return StatePolynomial(out)


RuleTargets = Tuple[Tuple[Mode, Amplitude], ...]


def _rules_of(transform) -> Mapping[Mode, RuleTargets]:
    rules = getattr(transform, "rules", transform)
    if not isinstance(rules, Mapping):
        raise TypeError("substitute expects a ModeTransform or a rules mapping")
    return rules


def substitute(p: StatePolynomial, transform) -> StatePolynomial:
    """Replace each ruled creation operator by its linear combination.

    Substitution is simultaneous: rule targets are never re-substituted.
    Modes without a rule pass through unchanged.  Powers expand
    multinomially, so total photon number is preserved term by term.
    """
    rules = _rules_of(transform)
    result = StatePolynomial()
    for pattern, coeff in p._terms.items():
        acc = scalar(coeff)
        for mode, count in pattern:
            targets = rules.get(mode)
            if targets is None:
                factor = creation(mode)
            else:
                factor = StatePolynomial(
                    [(((target, 1),), amp) for target, amp in targets]
                )
            for _ in range(count):
                acc = multiply(acc, factor)
        result = result + acc
    return result


def filter_terms(p: StatePolynomial, predicate: Callable[[Pattern], bool]) -> StatePolynomial:
    """Keep exactly the terms whose occupation pattern satisfies ``predicate``."""
    return StatePolynomial({pat: c for pat, c in p._terms.items() if predicate(pat)})


def amplitude(p: StatePolynomial, pattern: PatternLike) -> Amplitude:
    return p._terms.get(as_pattern(pattern), ZERO)


def norm_squared(p: StatePolynomial) -> Amplitude:
    """Fock-space squared norm with gamma treated as 1.

    ``sum |coeff|^2 * prod_modes n!`` over all terms.  All terms must share
    one coupling order, otherwise the relative gamma scale is ambiguous.
    """
    orders = {c.order for c in p._terms.values()}
    if len(orders) > 1:
        raise OrderMixError(
            f"norm of a mixed-order state is ambiguous (orders {sorted(orders)}); "
            "separate the orders first"
        )
    total = ZERO
    for pattern, coeff in p._terms.items():
        weight = coeff.abs_squared()
        for _, count in pattern:
            weight = weight * factorial(count)
        total = total + weight
    return total


def equal_up_to_phase(p: StatePolynomial, q: StatePolynomial) -> bool:
    """True when ``p == phase * q`` for a single unit-modulus ring element.

    Decided by cross-multiplication, so no division is needed and the
    coupling orders of the two sides may differ term-for-term consistently.
    """
    if p.is_zero or q.is_zero:
        return p.is_zero and q.is_zero
    if set(p._terms) != set(q._terms):
        return False
    ref = next(iter(p._terms))
    cp_ref, cq_ref = p._terms[ref], q._terms[ref]
    if cp_ref.abs_squared() != cq_ref.abs_squared():
        return False  # the single phase must have modulus 1
    return all(
        p._terms[pat] * cq_ref == q._terms[pat] * cp_ref for pat in p._terms
    )


def render_polynomial(p: StatePolynomial) -> str:
    """Debug text form, canonical term order, e.g. ``(-2)·γ^2·aH†·aV†·bH†·bV†``."""
    if p.is_zero:
        return "0"
    chunks = []
    for pattern, coeff in p._terms.items():
        parts = [f"({render_amplitude(coeff)})"]
        if coeff.order == 1:
            parts.append("γ")
        elif coeff.order > 1:
            parts.append(f"γ^{coeff.order}")
        for mode, count in pattern:
            parts.append(f"{mode.name}†" + (f"^{count}" if count > 1 else ""))
        chunks.append("·".join(parts))
    return " + ".join(chunks)
