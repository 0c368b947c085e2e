"""Entire functions given by finitely many Taylor coefficients at the origin."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError

__all__ = ["PowerSeriesFunction", "parse_coefficients"]


@dataclass(frozen=True, eq=False)
class PowerSeriesFunction:
    """``f(z) = sum_k coeffs[k] z**k``.

    Coefficients are held as a read-only complex array.  Trailing zeros are
    kept (they do not change the function) but ``degree`` ignores them.
    """

    coeffs: np.ndarray

    def __init__(self, coeffs):
        arr = np.array(coeffs, dtype=complex).ravel()
        if arr.size == 0:
            arr = np.zeros(1, dtype=complex)
        if not np.all(np.isfinite(arr)):
            raise DomainError("coefficients must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @classmethod
    def monomial(cls, k: int, coeff: complex = 1.0) -> "PowerSeriesFunction":
        c = np.zeros(k + 1, dtype=complex)
        c[k] = coeff
        return cls(c)

    @property
    def degree(self) -> int:
        """Index of the last nonzero coefficient; -1 for the zero function."""
        nz = np.flatnonzero(self.coeffs)
        return int(nz[-1]) if nz.size else -1

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        acc = np.zeros_like(z)
        for c in self.coeffs[: self.degree + 1][::-1]:
            acc = acc * z + c
        return acc

    def __eq__(self, other):
        if not isinstance(other, PowerSeriesFunction):
            return NotImplemented
        n = max(self.degree, other.degree) + 1
        return np.array_equal(self._padded(n), other._padded(n))

    def __hash__(self):
        return hash(tuple(self.coeffs[: self.degree + 1]))

    def __repr__(self):
        return f"PowerSeriesFunction({[complex(c) for c in self.coeffs[: max(self.degree, 0) + 1]]})"

    def _padded(self, n):
        out = np.zeros(n, dtype=complex)
        m = min(n, self.coeffs.size)
        out[:m] = self.coeffs[:m]
        return out

    def is_zero(self) -> bool:
        return self.degree < 0

    def is_constant(self) -> bool:
        return self.degree <= 0

    def monomial_index(self):
        """``(k, a_k)`` if f is a nonzero multiple of z**k, else None."""
        nz = np.flatnonzero(self.coeffs)
        if nz.size != 1:
            return None
        k = int(nz[0])
        return k, complex(self.coeffs[k])

    def derivative(self) -> "PowerSeriesFunction":
        if self.degree <= 0:
            return PowerSeriesFunction([0.0])
        k = np.arange(1, self.degree + 1)
        return PowerSeriesFunction(self.coeffs[1 : self.degree + 1] * k)

    def times_z_power(self, m: int) -> "PowerSeriesFunction":
        """``z**m f(z)``."""
        if m < 0:
            raise DomainError("m must be nonnegative")
        return PowerSeriesFunction(np.concatenate([np.zeros(m, dtype=complex), self.coeffs]))

    def scaled(self, c: complex) -> "PowerSeriesFunction":
        return PowerSeriesFunction(self.coeffs * c)

    @cached_property
    def _roots(self) -> np.ndarray:
        if self.degree <= 0:
            return np.zeros(0, dtype=complex)
        return np.roots(self.coeffs[: self.degree + 1][::-1])

    def roots(self) -> np.ndarray:
        return self._roots.copy()

    def abs_coeff_bound(self, r: float) -> float:
        """``sum_k |a_k| r**k`` -- an upper bound for ``max_{|z|=r} |f(z)|``."""
        k = np.arange(self.coeffs.size)
        return float(np.sum(np.abs(self.coeffs) * float(r) ** k))


def parse_coefficients(text: str) -> PowerSeriesFunction:
    """Parse ``"1,0.5-2i,3"`` (plain reals or ``re+im i`` entries) into a function."""
    parts = [p.strip() for p in text.split(",")]
    if not parts or any(not p for p in parts):
        raise DomainError(f"malformed coefficient list {text!r}")
    vals = []
    for p in parts:
        token = p.replace(" ", "").replace("i", "j")
        # bare imaginary unit: "i", "+i", "2-i"
        token = re.sub(r"(^|[+-])j", r"\g<1>1j", token)
        try:
            vals.append(complex(token))
        except ValueError as exc:
            raise DomainError(f"malformed coefficient {p!r}") from exc
    return PowerSeriesFunction(vals)
