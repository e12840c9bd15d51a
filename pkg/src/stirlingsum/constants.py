"""Mathematical constants for formula heads, served at arbitrary precision.

The constants that appear in summation-formula heads (Euler's gamma, the
first Stieltjes constant, zeta values at integer and half-integer points,
zeta derivatives) are *recovered* from the package's own convergent series
rather than computed by unrelated special-function algorithms: the catalog
rearranges each summation identity to isolate its constant term.  Every
value served by :class:`ConstantStore` is cross-checked against an embedded
reference-digits file (independently computed, checksummed) before it is
returned, so a defect anywhere in the pipeline surfaces as a loud
:class:`ReferenceMismatchError` instead of silently wrong digits.

Purely elementary values (pi and logarithms) come straight from the
arithmetic layer; see :func:`elementary`.
"""

from __future__ import annotations

import hashlib
import os
import re
import threading
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

from mpmath import mp, mpf

from .exactnum import DomainError
from .transform import _PRECISION_LOCK

__all__ = [
    "ConstantId",
    "ConstantStore",
    "ReferenceMismatchError",
    "GAMMA",
    "STIELTJES1",
    "PI",
    "LOG2",
    "LOG_PI",
    "LOG_2PI",
    "zeta",
    "zeta_prime",
    "default_store",
    "get_constant",
    "recover_constant",
    "elementary",
    "truncate_decimal",
    "format_decimal",
    "digits_agree",
]

REFERENCE_PATH_ENV = "STIRLINGSUM_REFERENCE_DIGITS"
_REFERENCE_RESOURCE = "data/reference_digits.txt"

_SIMPLE_TAGS = frozenset({"gamma", "stieltjes1", "pi", "log2", "log_pi", "log_2pi"})
_PARAM_TAGS = frozenset({"zeta", "zeta_prime"})


@dataclass(frozen=True)
class ConstantId:
    """Identity of a mathematical constant, e.g. ``zeta(3/2)`` or ``log_2pi``."""

    tag: str
    s: Fraction | None = None

    def __post_init__(self) -> None:
        if self.tag in _SIMPLE_TAGS:
            if self.s is not None:
                raise DomainError(f"{self.tag} takes no argument")
        elif self.tag in _PARAM_TAGS:
            if self.s is None:
                raise DomainError(f"{self.tag} needs an argument")
            object.__setattr__(self, "s", Fraction(self.s))
        else:
            raise DomainError(f"unknown constant tag {self.tag!r}")

    def __str__(self) -> str:
        if self.s is None:
            return self.tag
        return f"{self.tag}({_render_fraction(self.s)})"

    @classmethod
    def parse(cls, text: str) -> "ConstantId":
        text = text.strip()
        if text in _SIMPLE_TAGS:
            return cls(text)
        m = re.fullmatch(r"(zeta|zeta_prime)\((-?\d+(?:/\d+)?)\)", text)
        if not m:
            raise DomainError(f"cannot parse constant id {text!r}")
        return cls(m.group(1), Fraction(m.group(2)))


def _render_fraction(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


GAMMA = ConstantId("gamma")
STIELTJES1 = ConstantId("stieltjes1")
PI = ConstantId("pi")
LOG2 = ConstantId("log2")
LOG_PI = ConstantId("log_pi")
LOG_2PI = ConstantId("log_2pi")


def zeta(s) -> ConstantId:
    return ConstantId("zeta", Fraction(s))


def zeta_prime(s) -> ConstantId:
    return ConstantId("zeta_prime", Fraction(s))


# pi and logarithms come from the arithmetic layer; everything else is
# recovered through a catalog formula whose head isolates it.
ELEMENTARY_IDS = frozenset({PI, LOG2, LOG_PI, LOG_2PI})

RECOVERY_FORMULA: dict[ConstantId, str] = {
    GAMMA: "1.1",
    zeta(2): "2.1",
    zeta(3): "3.1",
    zeta(Fraction(1, 2)): "7.1",
    zeta(Fraction(3, 2)): "8.1",
    zeta(Fraction(5, 2)): "9.1",
    zeta(Fraction(7, 2)): "6.1",
    zeta_prime(-1): "11.1",
    zeta_prime(2): "13.1",
    STIELTJES1: "12.1",
}

_SERVABLE = ELEMENTARY_IDS | set(RECOVERY_FORMULA)


class ReferenceMismatchError(ArithmeticError):
    """A computed constant disagrees with its embedded reference digits."""


# ---------------------------------------------------------------------------
# Exact decimal rendering
# ---------------------------------------------------------------------------


def _exact_fraction(value) -> Fraction:
    """The exact rational a finite binary float represents."""
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    sign, man, exp, _ = value._mpf_
    if man == 0:
        if value == 0:
            return Fraction(0)
        raise DomainError("cannot render a non-finite value")
    frac = Fraction(int(man)) * Fraction(2) ** int(exp)
    return -frac if sign else frac


def truncate_decimal(value, digits: int) -> str:
    """Decimal string with exactly ``digits`` fractional digits, truncated
    toward zero.  Exact: works on the binary value itself, not a reprint."""
    if digits < 1:
        raise DomainError(f"need digits >= 1, got {digits}")
    f = _exact_fraction(value)
    scaled = abs(f.numerator) * 10**digits // f.denominator
    s = str(scaled).rjust(digits + 1, "0")
    sign = "-" if f < 0 else ""
    return f"{sign}{s[:-digits]}.{s[-digits:]}"


def format_decimal(value, digits: int) -> str:
    """Decimal string with ``digits`` fractional digits, rounded half away
    from zero — the display form used by the command-line surface."""
    if digits < 1:
        raise DomainError(f"need digits >= 1, got {digits}")
    f = _exact_fraction(value)
    num = abs(f.numerator) * 10**digits
    scaled = (2 * num + f.denominator) // (2 * f.denominator)
    s = str(scaled).rjust(digits + 1, "0")
    sign = "-" if f < 0 else ""
    return f"{sign}{s[:-digits]}.{s[-digits:]}"


_DECIMAL_RE = re.compile(r"(-?)(\d+)\.(\d+)")


def _split_decimal(text: str) -> tuple[str, str, str]:
    m = _DECIMAL_RE.fullmatch(text)
    if not m:
        raise DomainError(f"malformed decimal string {text!r}")
    return m.group(1), m.group(2), m.group(3)


def digits_agree(value, reference: str, digits: int) -> bool:
    """True when ``value`` truncated at ``digits`` fractional digits matches
    the reference decimal string's sign, integer part, and digit prefix."""
    ref_sign, ref_int, ref_frac = _split_decimal(reference)
    use = min(digits, len(ref_frac))
    v_sign, v_int, v_frac = _split_decimal(truncate_decimal(value, use))
    if v_int != ref_int or v_frac != ref_frac[:use]:
        return False
    if v_sign != ref_sign:
        # -0.000…0 and 0.000…0 agree; anything else with a sign flip does not
        return v_int == "0" and set(v_frac) <= {"0"}
    return True


# ---------------------------------------------------------------------------
# Reference digits file
# ---------------------------------------------------------------------------


def _load_references(path: str | os.PathLike | None) -> dict[str, str]:
    if path is None:
        path = os.environ.get(REFERENCE_PATH_ENV)
    if path is not None:
        with open(path, encoding="ascii") as fh:
            text = fh.read()
    else:
        text = (
            resources.files("stirlingsum").joinpath(_REFERENCE_RESOURCE).read_text("ascii")
        )
    header, _, body = text.partition("\n")
    fields = header.split()
    if len(fields) != 3 or fields[0] != "checksum" or fields[1] != "sha256":
        raise DomainError("reference digits file: missing checksum header")
    if hashlib.sha256(body.encode("ascii")).hexdigest() != fields[2]:
        raise DomainError("reference digits file: checksum mismatch")
    refs: dict[str, str] = {}
    for line in body.splitlines():
        name, digits_string = line.split()
        _split_decimal(digits_string)  # validates the shape
        refs[str(ConstantId.parse(name))] = digits_string
    return refs


# ---------------------------------------------------------------------------
# The store
# ---------------------------------------------------------------------------


class ConstantStore:
    """Cache and provenance checks for head constants.

    Cache reads are lock-free; computation is serialized per constant, so
    distinct constants may be recovered concurrently.  ``compute_count``
    increments once per fresh computation (never on a cache hit).
    """

    def __init__(self, reference_path: str | os.PathLike | None = None):
        self._reference_path = reference_path
        self._references: dict[str, str] | None = None
        self._cache: dict[ConstantId, tuple[int, mpf]] = {}
        self._meta = threading.Lock()
        self._locks: dict[ConstantId, threading.Lock] = {}
        self.compute_count = 0

    @property
    def references(self) -> dict[str, str]:
        if self._references is None:
            with self._meta:
                if self._references is None:
                    self._references = _load_references(self._reference_path)
        return self._references

    def reference_digits(self, cid: ConstantId | str) -> str:
        try:
            return self.references[str(cid)]
        except KeyError:
            raise DomainError(f"no reference digits for {cid}") from None

    def cached_digits(self, cid: ConstantId) -> int:
        """Digits available in cache for ``cid`` (0 when absent)."""
        hit = self._cache.get(cid)
        return hit[0] if hit else 0

    def get(self, cid: ConstantId, digits: int) -> mpf:
        if digits < 1:
            raise DomainError(f"need digits >= 1, got {digits}")
        if cid not in _SERVABLE:
            raise DomainError(f"constant {cid} is not servable")
        hit = self._cache.get(cid)
        if hit is not None and hit[0] >= digits:
            return hit[1]
        with self._lock_for(cid):
            hit = self._cache.get(cid)
            if hit is not None and hit[0] >= digits:
                return hit[1]
            value = self._compute(cid, digits)
            self._admit(cid, digits, value)
            return value

    def _lock_for(self, cid: ConstantId) -> threading.Lock:
        with self._meta:
            return self._locks.setdefault(cid, threading.Lock())

    def _admit(self, cid: ConstantId, digits: int, value: mpf) -> None:
        if not digits_agree(value, self.reference_digits(cid), min(digits, 1000)):
            raise ReferenceMismatchError(
                f"{cid} at {digits} digits disagrees with the embedded reference"
            )
        with self._meta:
            best = self._cache.get(cid)
            if best is None or best[0] < digits:
                self._cache[cid] = (digits, value)

    def _compute(self, cid: ConstantId, digits: int) -> mpf:
        with self._meta:
            self.compute_count += 1
        if cid in ELEMENTARY_IDS:
            with _PRECISION_LOCK, mp.workdps(digits + 10):
                if cid == PI:
                    return +mp.pi
                if cid == LOG2:
                    return mp.log(mpf(2))
                if cid == LOG_PI:
                    return mp.log(mp.pi)
                return mp.log(2 * mp.pi)
        from . import catalog

        return catalog.recover_details(
            RECOVERY_FORMULA[cid], digits=digits, store=self
        ).value


_DEFAULT_STORE = ConstantStore()


def default_store() -> ConstantStore:
    """The process-wide store used when no explicit store is passed."""
    return _DEFAULT_STORE


def get_constant(cid: ConstantId, digits: int) -> mpf:
    """Value of ``cid`` correct to ``digits`` decimal digits (cached)."""
    return _DEFAULT_STORE.get(cid, digits)


def recover_constant(formula, n0: int | None = None, digits: int = 30, store=None):
    """Recover the single unknown head constant of ``formula`` at ``digits``.

    ``n0`` is the initial summation anchor (default digits + 10); it is
    raised automatically until the series stop rule fires.
    """
    if n0 is not None and n0 < 2:
        raise DomainError(f"need n0 >= 2, got {n0}")
    from . import catalog

    return catalog.recover_details(
        formula, digits=digits, n0=n0, store=store or _DEFAULT_STORE
    ).value


def elementary(op: str, digits: int, x=None, r=None) -> mpf:
    """Elementary values at requested precision: ``pi``, ``log``, ``power``."""
    if digits < 1:
        raise DomainError(f"need digits >= 1, got {digits}")
    with _PRECISION_LOCK, mp.workdps(digits + 10):
        if op == "pi":
            return +mp.pi
        if op == "log":
            xv = _as_mpf(x)
            if xv <= 0:
                raise DomainError(f"log needs x > 0, got {xv}")
            return mp.log(xv)
        if op == "power":
            xv = _as_mpf(x)
            if xv <= 0:
                raise DomainError(f"power needs x > 0, got {xv}")
            rf = Fraction(r)
            return mp.power(xv, mpf(rf.numerator) / rf.denominator)
        raise DomainError(f"unknown elementary op {op!r}")


def _as_mpf(x) -> mpf:
    if x is None:
        raise DomainError("missing argument")
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    return mpf(x)
