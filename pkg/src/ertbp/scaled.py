"""Scaled floating point: value = mantissa * exp(log_factor).

The harmonics of order q in the time angle all carry a factor
exp(-q G^3/3), which at G = 32 is exp(-10922.67) and underflows any IEEE
double.  ScaledReal keeps that exponent as an explicit payload so the
mantissa arithmetic stays exact, which makes the G = 32..128 regime
computable.

Normalization uses frexp, so renormalizing never rounds the mantissa;
only the log_factor accumulates O(eps) bookkeeping error.
"""

import math

__all__ = ["ScaledReal"]

_LN2 = math.log(2.0)

# Below this gap in log_factor the smaller addend is under 1 ulp of the
# larger mantissa even after the worst-case mantissa ratio (100x).
_ADD_CUTOFF = 60.0


def _split(x):
    """Decompose a float as (mantissa in [0.5,1), log_factor), exactly."""
    if x == 0.0:
        return 0.0, 0.0
    m, k = math.frexp(x)
    return m, k * _LN2


class ScaledReal:
    """A real number stored as mantissa * exp(log_factor)."""

    __slots__ = ("mantissa", "log_factor")

    def __init__(self, mantissa=0.0, log_factor=0.0):
        if mantissa == 0.0:
            self.mantissa = 0.0
            self.log_factor = 0.0
            return
        if not math.isfinite(mantissa) or not math.isfinite(log_factor):
            raise ValueError("non-finite ScaledReal components")
        m, k = math.frexp(mantissa)
        self.mantissa = m
        self.log_factor = log_factor + k * _LN2

    @classmethod
    def from_float(cls, x):
        return cls(float(x), 0.0)

    @classmethod
    def from_log(cls, mantissa, log_factor):
        """Build mantissa * exp(log_factor) without evaluating exp."""
        return cls(mantissa, log_factor)

    @classmethod
    def exp(cls, log_value):
        """exp(log_value) as a ScaledReal (never under/overflows)."""
        return cls(1.0, float(log_value))

    def is_zero(self):
        return self.mantissa == 0.0

    def to_float(self):
        """Collapse to a plain float; may under/overflow to 0.0 / inf."""
        if self.mantissa == 0.0:
            return 0.0
        try:
            return self.mantissa * math.exp(self.log_factor)
        except OverflowError:
            return math.copysign(math.inf, self.mantissa)

    __float__ = to_float

    @property
    def log_abs(self):
        """log |value|; -inf for zero."""
        if self.mantissa == 0.0:
            return -math.inf
        return self.log_factor + math.log(abs(self.mantissa))

    @property
    def sign(self):
        return 0.0 if self.mantissa == 0.0 else math.copysign(1.0, self.mantissa)

    def log10_abs(self):
        if self.mantissa == 0.0:
            return -math.inf
        return self.log_abs / math.log(10.0)

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, ScaledReal):
            return other
        if isinstance(other, (int, float)):
            return ScaledReal(float(other), 0.0)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if self.mantissa == 0.0:
            return ScaledReal(o.mantissa, o.log_factor)
        if o.mantissa == 0.0:
            return ScaledReal(self.mantissa, self.log_factor)
        a, b = self, o
        if a.log_factor < b.log_factor:
            a, b = b, a
        d = b.log_factor - a.log_factor
        if d < -_ADD_CUTOFF:
            return ScaledReal(a.mantissa, a.log_factor)
        return ScaledReal(a.mantissa + b.mantissa * math.exp(d), a.log_factor)

    __radd__ = __add__

    def __neg__(self):
        return ScaledReal(-self.mantissa, self.log_factor)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self.__add__(-o)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if self.mantissa == 0.0 or o.mantissa == 0.0:
            return ScaledReal()
        return ScaledReal(self.mantissa * o.mantissa,
                          self.log_factor + o.log_factor)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o.mantissa == 0.0:
            raise ZeroDivisionError("ScaledReal division by zero")
        if self.mantissa == 0.0:
            return ScaledReal()
        return ScaledReal(self.mantissa / o.mantissa,
                          self.log_factor - o.log_factor)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o.__truediv__(self)

    def __abs__(self):
        return ScaledReal(abs(self.mantissa), self.log_factor)

    # -- comparisons --------------------------------------------------------

    def _cmp(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        sa, sb = self.sign, o.sign
        if sa != sb:
            return -1 if sa < sb else 1
        if sa == 0.0:
            return 0
        ka = self.log_abs
        kb = o.log_abs
        if ka == kb:
            return 0
        mag = 1 if ka > kb else -1
        return mag if sa > 0 else -mag

    def __lt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c >= 0

    def __eq__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c == 0

    def __ne__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c != 0

    # -- helpers ------------------------------------------------------------

    def ratio(self, other):
        """self/other collapsed to a float (exponents mostly cancel)."""
        o = self._coerce(other)
        return (self / o).to_float()

    def rel_diff(self, other):
        """|self-other| / max(|self|, |other|) as a float; 0 if both zero."""
        o = self._coerce(other)
        num = abs(self - o)
        den = max(abs(self), abs(o))
        if den.is_zero():
            return 0.0
        return num.ratio(den)

    def decimal_parts(self):
        """(mantissa10, exponent10) with mantissa10 in [1, 10)."""
        if self.mantissa == 0.0:
            return 0.0, 0
        l10 = self.log10_abs()
        e10 = math.floor(l10)
        m10 = self.sign * 10.0 ** (l10 - e10)
        return m10, int(e10)

    def __repr__(self):
        if self.mantissa == 0.0:
            return "ScaledReal(0)"
        m10, e10 = self.decimal_parts()
        return f"ScaledReal({m10:.12g}e{e10:+d})"
