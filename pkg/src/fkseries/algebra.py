"""Exact sparse arithmetic for Laurent polynomials / truncated series in q and x.

All exponents live on the half-integer lattice and are stored *doubled*
("Exp2" convention): the stored integer e2 represents the exponent e2/2.
Coefficients are exact (int, promoted to Fraction only when halves appear).

A BiSeries carries its own validity metadata:

  * ``q_valid2``  -- coefficients with q-exponent >= q_valid2/2 are unknown
                     (the series was truncated there); None means exact in q.
  * ``x_window``  -- pair (lo2, hi2): coefficients with x-exponent inside
                     [lo2/2, hi2/2] are certified, outside they are unknown;
                     None means the stored terms are the complete x-support.

Arithmetic propagates this metadata conservatively, so mixing series of
different precision can never silently produce uncertified coefficients.
"""

from __future__ import annotations

from fractions import Fraction

# Type alias for doubled exponents; kept as plain int for speed.
Exp2 = int

_INF = float("inf")


def _norm_coeff(c):
    """Collapse Fractions with denominator 1 back to int."""
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c)
    return c


def _fmt_exp2(e2: int) -> str:
    if e2 % 2 == 0:
        e = e2 // 2
        return str(e) if e >= 0 else f"({e})"
    return f"({e2}/2)"


def _fmt_coeff(c) -> str:
    if isinstance(c, Fraction):
        return f"{c.numerator}/{c.denominator}" if c.numerator >= 0 else f"-{-c.numerator}/{c.denominator}"
    return str(c)


class BiSeries:
    """Sparse exact series in q and x with half-integer exponents.

    Immutable by convention: all operations return new instances and never
    mutate ``terms`` after construction, so values are safe to share across
    threads and to memoize.
    """

    __slots__ = ("terms", "x_window", "q_valid2")

    def __init__(self, terms=None, x_window=None, q_valid2=None):
        tt = {}
        if terms:
            for (q2, x2), c in terms.items():
                c = _norm_coeff(c)
                if c == 0:
                    continue
                if q_valid2 is not None and q2 >= q_valid2:
                    continue
                if x_window is not None and not (x_window[0] <= x2 <= x_window[1]):
                    continue
                tt[(q2, x2)] = c
        self.terms = tt
        self.x_window = tuple(x_window) if x_window is not None else None
        self.q_valid2 = q_valid2

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def one(cls):
        return cls({(0, 0): 1})

    @classmethod
    def monomial(cls, c, q2=0, x2=0):
        return cls({(q2, x2): c})

    # -- basic structure ----------------------------------------------

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, BiSeries):
            return NotImplemented
        return (
            self.terms == other.terms
            and self.x_window == other.x_window
            and self.q_valid2 == other.q_valid2
        )

    __hash__ = None

    def coeff(self, q2, x2):
        return self.terms.get((q2, x2), 0)

    def q_support_min(self):
        """Smallest q-exponent the true series could have (doubled)."""
        if self.terms:
            return min(q2 for q2, _ in self.terms)
        if self.q_valid2 is not None:
            return self.q_valid2
        return _INF

    def x_support(self):
        """(min2, max2) over stored terms, or None if no terms."""
        if not self.terms:
            return None
        xs = [x2 for _, x2 in self.terms]
        return min(xs), max(xs)

    def x_possible_support(self):
        """Bounds on where the true series may be nonzero."""
        if self.x_window is not None:
            return (-_INF, _INF)
        s = self.x_support()
        return s if s is not None else (_INF, -_INF)

    # -- arithmetic ----------------------------------------------------

    def _meta_add(self, other):
        if self.q_valid2 is None:
            qv = other.q_valid2
        elif other.q_valid2 is None:
            qv = self.q_valid2
        else:
            qv = min(self.q_valid2, other.q_valid2)
        if self.x_window is None:
            xw = other.x_window
        elif other.x_window is None:
            xw = self.x_window
        else:
            xw = (max(self.x_window[0], other.x_window[0]),
                  min(self.x_window[1], other.x_window[1]))
        return xw, qv

    def __add__(self, other):
        if isinstance(other, int) or isinstance(other, Fraction):
            other = BiSeries.monomial(other)
        if not isinstance(other, BiSeries):
            return NotImplemented
        xw, qv = self._meta_add(other)
        tt = dict(self.terms)
        for k, c in other.terms.items():
            v = tt.get(k, 0) + c
            if v == 0:
                tt.pop(k, None)
            else:
                tt[k] = v
        return BiSeries(tt, xw, qv)

    __radd__ = __add__

    def __neg__(self):
        return BiSeries({k: -c for k, c in self.terms.items()}, self.x_window, self.q_valid2)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scalar_mul(self, c):
        if c == 0:
            return BiSeries(None, self.x_window, self.q_valid2)
        return BiSeries({k: v * c for k, v in self.terms.items()}, self.x_window, self.q_valid2)

    def _meta_mul(self, other):
        # q: the unknown tail of one factor pollutes products starting at
        # (its q_valid) + (least possible q-exponent of the other factor).
        qv = None
        for a, b in ((self, other), (other, self)):
            if a.q_valid2 is not None:
                m = b.q_support_min()
                if m != _INF:
                    v = a.q_valid2 + m
                    qv = v if qv is None else min(qv, v)
        # x: a factor truncated in x pollutes everything outside
        # [its lo + other's max support, its hi + other's min support].
        lo, hi = -_INF, _INF
        for a, b in ((self, other), (other, self)):
            if a.x_window is not None:
                blo, bhi = b.x_possible_support()
                if blo == _INF:  # b is exactly zero
                    continue
                lo = max(lo, a.x_window[0] + bhi)
                hi = min(hi, a.x_window[1] + blo)
        if lo == -_INF and hi == _INF:
            xw = None
        else:
            # Infinite edges are placeholders: a -inf lo / +inf hi is later
            # clamped to the realized support; +inf lo / -inf hi encode an
            # empty certified window (both factors truncated).
            slo = -(1 << 62) if lo == -_INF else ((1 << 62) if lo == _INF else int(lo))
            shi = (1 << 62) if hi == _INF else (-(1 << 62) if hi == -_INF else int(hi))
            xw = (slo, shi)
        return xw, qv

    def __mul__(self, other):
        if isinstance(other, int) or isinstance(other, Fraction):
            return self.scalar_mul(other)
        if not isinstance(other, BiSeries):
            return NotImplemented
        if not self.terms or not other.terms:
            # product of stored parts is zero; metadata still applies
            xw, qv = self._meta_mul(other)
            return BiSeries(None, _tidy_window(xw, {}), qv)
        xw, qv = self._meta_mul(other)
        a, b = self.terms, other.terms
        if len(a) > len(b):
            a, b = b, a
        tt = {}
        for (qa, xa), ca in a.items():
            for (qb, xb), cb in b.items():
                k = (qa + qb, xa + xb)
                v = tt.get(k, 0) + ca * cb
                if v == 0:
                    tt.pop(k, None)
                else:
                    tt[k] = v
        return BiSeries(tt, _tidy_window(xw, tt), qv)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers")
        out = BiSeries.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    # -- truncation ------------------------------------------------------

    def truncated(self, x_window=None, q_valid2=None):
        """Restrict validity (intersect with current metadata)."""
        xw, qv = self.x_window, self.q_valid2
        if x_window is not None:
            xw = x_window if xw is None else (max(xw[0], x_window[0]), min(xw[1], x_window[1]))
        if q_valid2 is not None:
            qv = q_valid2 if qv is None else min(qv, q_valid2)
        return BiSeries(self.terms, xw, qv)

    # -- substitutions ----------------------------------------------------

    def sub_x_inv(self):
        """x -> 1/x."""
        xw = None
        if self.x_window is not None:
            xw = (-self.x_window[1], -self.x_window[0])
        return BiSeries({(q2, -x2): c for (q2, x2), c in self.terms.items()}, xw, self.q_valid2)

    def sub_q_inv(self):
        """q -> 1/q; requires a series exact in q."""
        if self.q_valid2 is not None:
            raise ValidityError("q -> 1/q on a q-truncated series is validity-unbounded")
        return BiSeries({(-q2, x2): c for (q2, x2), c in self.terms.items()}, self.x_window, None)

    def sub_x_one(self):
        """x -> 1; requires a series exact in x."""
        if self.x_window is not None:
            raise ValidityError("x -> 1 on an x-truncated series is validity-unbounded")
        tt = {}
        for (q2, x2), c in self.terms.items():
            tt[(q2, 0)] = tt.get((q2, 0), 0) + c
        return BiSeries(tt, None, self.q_valid2)

    def sub_x_qn(self, n: int, tail_min_q2=None):
        """x -> q^n.

        For an x-truncated series the substitution folds unknown x-terms into
        unknown q-terms; certification then needs ``tail_min_q2``, a callable
        x2 -> least possible q-exponent (doubled) of the unknown coefficient
        at that x-exponent.  Without a finite certified order this raises.
        """
        tt = {}
        for (q2, x2), c in self.terms.items():
            k = (q2 + n * x2, 0)
            v = tt.get(k, 0) + c
            if v == 0:
                tt.pop(k, None)
            else:
                tt[k] = v
        qv = self.q_valid2
        if self.x_window is not None:
            lo2, hi2 = self.x_window
            best = None
            for x2, direction in ((lo2 - 1, -1), (hi2 + 1, 1)):
                if tail_min_q2 is None:
                    raise ValidityError(
                        "x -> q^n on an x-truncated series needs a tail q-degree bound")
                # scan outward until the image order stops decreasing
                cur = x2
                seen_best = None
                for _ in range(4096):
                    img = n * cur + tail_min_q2(cur)
                    if seen_best is None or img < seen_best:
                        seen_best = img
                    elif img > seen_best + 4 * abs(n) + 8:
                        break
                    cur += direction
                else:
                    raise ValidityError("validity-unbounded: tail bound does not dominate x -> q^n")
                best = seen_best if best is None else min(best, seen_best)
            qv = best if qv is None else min(qv, best)
        out = BiSeries(tt, None, qv)
        return out

    def sub_q_one(self):
        """q -> 1; requires a series exact in q."""
        if self.q_valid2 is not None:
            raise ValidityError("q -> 1 on a q-truncated series is validity-unbounded")
        tt = {}
        for (q2, x2), c in self.terms.items():
            tt[(0, x2)] = tt.get((0, x2), 0) + c
        return BiSeries(tt, self.x_window, None)

    def map_x_shift_q(self, k2: int):
        """x-exponent-dependent q-shift: q^e x^f -> q^(e + k2*f) x^f.

        This is the action of f(x) -> f(q^(k2/2) x) on each monomial; it is
        what a shift operator in the x-variable does term by term.
        """
        out = {}
        for (q2, x2), c in self.terms.items():
            e2 = k2 * x2
            if e2 % 2 != 0:
                raise ValidityError("q-shift leaves the half-integer lattice")
            out[(q2 + e2 // 2, x2)] = c
        qv = self.q_valid2
        if qv is not None:
            # each x-column's validity shifts with it; keep per-column info
            # by taking the worst case over the window
            if self.x_window is not None:
                lo2, hi2 = self.x_window
                cand = [qv + (k2 * lo2) // 2, qv + (k2 * hi2) // 2]
                qv = min(cand)
            # exact-in-x series: worst case over stored support
            elif self.terms:
                qv = min(qv + (k2 * x2) // 2 for (_, x2) in self.terms)
        return BiSeries(out, self.x_window, qv)

    # -- serialization ----------------------------------------------------

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: (kv[0][1], kv[0][0]))

    def text(self) -> str:
        """Canonical text form, bit-exact for golden tests.

        Terms sorted by ascending x-exponent then ascending q-exponent,
        each printed as ``c*q^(a/2)*x^(b/2)`` with zero exponents omitted.
        """
        if not self.terms:
            return "0"
        parts = []
        for (q2, x2), c in self.sorted_terms():
            factors = []
            neg = c < 0
            ca = -c if neg else c
            if q2 != 0:
                factors.append(f"q^{_fmt_exp2(q2)}")
            if x2 != 0:
                factors.append(f"x^{_fmt_exp2(x2)}")
            if ca != 1 or not factors:
                factors.insert(0, _fmt_coeff(ca))
            term = "*".join(factors)
            if not parts:
                parts.append(("-" if neg else "") + term)
            else:
                parts.append(("- " if neg else "+ ") + term)
        return " ".join(parts)

    def to_json(self):
        terms = []
        for (q2, x2), c in self.sorted_terms():
            f = Fraction(c)
            terms.append({"q2": q2, "x2": x2, "num": str(f.numerator), "den": str(f.denominator)})
        return {
            "terms": terms,
            "x_window2": list(self.x_window) if self.x_window is not None else None,
            "q_valid2": self.q_valid2,
        }

    @classmethod
    def from_json(cls, obj):
        tt = {}
        for t in obj["terms"]:
            c = Fraction(int(t["num"]), int(t["den"]))
            tt[(int(t["q2"]), int(t["x2"]))] = c
        xw = obj.get("x_window2")
        return cls(tt, tuple(xw) if xw is not None else None, obj.get("q_valid2"))

    def __repr__(self):
        meta = []
        if self.x_window is not None:
            meta.append(f"x_window2={self.x_window}")
        if self.q_valid2 is not None:
            meta.append(f"q_valid2={self.q_valid2}")
        tail = ("; " + ", ".join(meta)) if meta else ""
        return f"<BiSeries {self.text()}{tail}>"


def _tidy_window(xw, terms):
    """Clamp an over-wide synthetic window to the stored support."""
    if xw is None:
        return None
    lo, hi = xw
    if lo <= -(1 << 61) or hi >= (1 << 61):
        xs = [x2 for _, x2 in terms] or [0]
        if lo <= -(1 << 61):
            lo = min(xs)
        if hi >= (1 << 61):
            hi = max(xs)
    return (lo, hi)


class ValidityError(ValueError):
    """A requested operation cannot certify any output order."""


# ---------------------------------------------------------------------------
# q-combinatorics (balanced conventions)
# ---------------------------------------------------------------------------

_QINT_CACHE: dict = {}
_QBINOM_CACHE: dict = {}
_POCH_CACHE: dict = {}
_GAUSS_CACHE: dict = {}


def qint(n: int) -> BiSeries:
    """Balanced q-integer [n] = (q^{n/2} - q^{-n/2}) / (q^{1/2} - q^{-1/2})."""
    s = _QINT_CACHE.get(n)
    if s is not None:
        return s
    if n < 0:
        s = -qint(-n)
    else:
        s = BiSeries({(n - 1 - 2 * j, 0): 1 for j in range(n)})
    _QINT_CACHE[n] = s
    return s


def qbinom(n: int, k: int) -> BiSeries:
    """Balanced q-binomial [n]! / ([k]! [n-k]!); zero outside 0 <= k <= n."""
    if n < 0:
        raise ValueError("qbinom needs n >= 0")
    if k < 0 or k > n:
        return BiSeries.zero()
    if k == 0 or k == n:
        return BiSeries.one()
    k = min(k, n - k)
    key = (n, k)
    s = _QBINOM_CACHE.get(key)
    if s is not None:
        return s
    # balanced Pascal: [n;k] = q^{k/2} [n-1;k] + q^{-(n-k)/2} [n-1;k-1]
    a = qbinom(n - 1, k) * BiSeries.monomial(1, q2=k)
    b = qbinom(n - 1, k - 1) * BiSeries.monomial(1, q2=-(n - k))
    s = a + b
    _QBINOM_CACHE[key] = s
    return s


def gauss_binom(n: int, k: int) -> BiSeries:
    """Gaussian q-binomial with integer q-powers: prod (1-q^{n-k+i})/(1-q^i)."""
    if k < 0 or (n >= 0 and k > n):
        return BiSeries.zero()
    # relate to the balanced one: gauss = q^{k(n-k)/2} * balanced
    key = (n, k)
    s = _GAUSS_CACHE.get(key)
    if s is None:
        s = qbinom(n, k) * BiSeries.monomial(1, q2=k * (n - k))
        _GAUSS_CACHE[key] = s
    return s


def poch_x(j: int, k: int) -> BiSeries:
    """prod_{1<=l<=k} (1 - x^{-1} q^{j+l}); empty product for k = 0."""
    if j < 0 or k < 0:
        raise ValueError("poch_x needs j, k >= 0")
    key = (j, k)
    s = _POCH_CACHE.get(key)
    if s is not None:
        return s
    if k == 0:
        s = BiSeries.one()
    else:
        s = poch_x(j, k - 1) * BiSeries({(0, 0): 1, (2 * (j + k), -2): -1})
    _POCH_CACHE[key] = s
    return s


def x_half_diff() -> BiSeries:
    """x^{1/2} - x^{-1/2}."""
    return BiSeries({(0, 1): 1, (0, -1): -1})


def q_half_diff() -> BiSeries:
    """q^{1/2} - q^{-1/2}."""
    return BiSeries({(1, 0): 1, (-1, 0): -1})


def divide_exact_q(a: BiSeries, b: BiSeries) -> BiSeries:
    """Exact division by a Laurent polynomial in q alone; raises if inexact."""
    if a.x_window is not None or a.q_valid2 is not None:
        raise ValidityError("exact division needs exact operands")
    if any(x2 != 0 for _, x2 in b.terms):
        raise ValueError("divisor must be a polynomial in q only")
    if not b.terms:
        raise ZeroDivisionError
    bt = sorted(((q2, c) for (q2, _), c in b.terms.items()), reverse=True)
    lead_q2, lead_c = bt[0]
    # split a into x-columns and long-divide each by b
    cols = {}
    for (q2, x2), c in a.terms.items():
        cols.setdefault(x2, {})[q2] = c
    out = {}
    for x2, col in cols.items():
        quo = {}
        while col:
            top = max(col)
            f = Fraction(col[top], lead_c)
            f = _norm_coeff(f)
            e = top - lead_q2
            quo[e] = f
            for q2, c in bt:
                k = e + q2
                v = col.get(k, 0) - f * c
                if v == 0:
                    col.pop(k, None)
                else:
                    col[k] = v
        for e, f in quo.items():
            out[(e, x2)] = f
    return BiSeries(out)


def divide_series_q(a: BiSeries, b: BiSeries, q_order2: int) -> BiSeries:
    """a / b as an ascending power series in q, to q-exponents < q_order2/2.

    The divisor must be a q-only Laurent polynomial whose lowest term is a
    unit coefficient; the quotient's validity combines a's with the order.
    """
    if any(x2 != 0 for _, x2 in b.terms):
        raise ValueError("divisor must be a polynomial in q only")
    if not b.terms:
        raise ZeroDivisionError
    items = sorted((q2, c) for (q2, _), c in b.terms.items())
    e0, c0 = items[0]
    rest = [(q2 - e0, c) for q2, c in items[1:]]
    if c0 not in (1, -1):
        inv0 = Fraction(1, c0)
    else:
        inv0 = c0
    qv = q_order2
    if a.q_valid2 is not None:
        qv = min(qv, a.q_valid2 - e0)
    cols = {}
    for (q2, x2), c in a.terms.items():
        cols.setdefault(x2, {})[q2 - e0] = c
    out = {}
    for x2, col in cols.items():
        quo = {}
        if not col:
            continue
        lo = min(col)
        e = lo
        while e < qv:
            c = col.get(e, 0)
            for de, bc in rest:
                if e - de in quo:
                    c -= bc * quo[e - de]
            if c:
                quo[e] = _norm_coeff(c * inv0)
            e += 1
        for e, c in quo.items():
            out[(e, x2)] = c
    return BiSeries(out, a.x_window, qv)


def invert_x_series(p: BiSeries, direction: int, x_order2: int) -> BiSeries:
    """Series inverse of a q-free Laurent polynomial in x.

    ``direction=+1`` expands in increasing x-powers (anchored at the lowest
    term of p), ``direction=-1`` in decreasing powers (anchored at the
    highest).  Result is truncated to |relative x-exponent| <= x_order2.
    """
    if any(q2 != 0 for q2, _ in p.terms):
        raise ValueError("invert_x_series expects a q-free polynomial")
    if not p.terms:
        raise ZeroDivisionError
    items = sorted(((x2, c) for (_, x2), c in p.terms.items()), reverse=(direction < 0))
    lead_x2, lead_c = items[0]
    if lead_c not in (1, -1):
        lead_inv = Fraction(1, lead_c)
    else:
        lead_inv = lead_c
    # 1/p = x^{-lead} * lead_inv * 1/(1 + r) with r supported strictly
    # later in the expansion direction
    rest = [(x2 - lead_x2, _norm_coeff(c * lead_inv)) for x2, c in items[1:]]
    maxrel = x_order2
    # dynamic programming over the relative (doubled) exponent grid
    offs = [(abs(e), c) for e, c in rest]
    coeffs = {0: 1}
    for t in range(1, maxrel + 1):
        acc = 0
        for e, c in offs:
            if e <= t and (t - e) in coeffs:
                acc += c * coeffs[t - e]
        if acc:
            coeffs[t] = _norm_coeff(-acc)
    tt = {}
    for t, c in coeffs.items():
        x2 = -lead_x2 + direction * t
        tt[(0, x2)] = _norm_coeff(c * lead_inv)
    lo = -lead_x2 - maxrel if direction < 0 else -lead_x2
    hi = -lead_x2 if direction < 0 else -lead_x2 + maxrel
    return BiSeries(tt, (lo, hi), None)


# ---------------------------------------------------------------------------
# Multivariable series (one q plus several x-variables) for links
# ---------------------------------------------------------------------------

_VARNAMES = ("x", "y", "z", "w")


class MultiSeries:
    """Sparse exact series in q and x_1..x_n, doubled-exponent keys.

    Keys are ``(q2, (e2_1, ..., e2_n))``.  Used for link invariants and the
    mixed-color crossing coefficients; the two-variable workhorse stays
    BiSeries.
    """

    __slots__ = ("nvars", "terms", "x_windows", "q_valid2")

    def __init__(self, nvars, terms=None, x_windows=None, q_valid2=None):
        self.nvars = nvars
        xw = list(x_windows) if x_windows is not None else [None] * nvars
        if len(xw) != nvars:
            raise ValueError("window count mismatch")
        tt = {}
        if terms:
            for (q2, xs), c in terms.items():
                c = _norm_coeff(c)
                if c == 0:
                    continue
                if q_valid2 is not None and q2 >= q_valid2:
                    continue
                ok = True
                for i, w in enumerate(xw):
                    if w is not None and not (w[0] <= xs[i] <= w[1]):
                        ok = False
                        break
                if ok:
                    tt[(q2, tuple(xs))] = c
        self.terms = tt
        self.x_windows = [tuple(w) if w is not None else None for w in xw]
        self.q_valid2 = q_valid2

    @classmethod
    def monomial(cls, nvars, c, q2=0, xs=None):
        xs = tuple(xs) if xs is not None else (0,) * nvars
        return cls(nvars, {(q2, xs): c})

    @classmethod
    def one(cls, nvars):
        return cls.monomial(nvars, 1)

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, MultiSeries):
            return NotImplemented
        return (self.nvars == other.nvars and self.terms == other.terms
                and self.x_windows == other.x_windows and self.q_valid2 == other.q_valid2)

    __hash__ = None

    def q_support_min(self):
        if self.terms:
            return min(q2 for q2, _ in self.terms)
        if self.q_valid2 is not None:
            return self.q_valid2
        return _INF

    def var_support(self, i):
        if not self.terms:
            return None
        vals = [xs[i] for _, xs in self.terms]
        return min(vals), max(vals)

    def _meta_combine(self, other, mul):
        if self.nvars != other.nvars:
            raise ValueError("variable count mismatch")
        if not mul:
            if self.q_valid2 is None:
                qv = other.q_valid2
            elif other.q_valid2 is None:
                qv = self.q_valid2
            else:
                qv = min(self.q_valid2, other.q_valid2)
            xw = []
            for a, b in zip(self.x_windows, other.x_windows):
                if a is None:
                    xw.append(b)
                elif b is None:
                    xw.append(a)
                else:
                    xw.append((max(a[0], b[0]), min(a[1], b[1])))
            return xw, qv
        qv = None
        for a, b in ((self, other), (other, self)):
            if a.q_valid2 is not None:
                m = b.q_support_min()
                if m != _INF:
                    v = a.q_valid2 + m
                    qv = v if qv is None else min(qv, v)
        xw = []
        for i in range(self.nvars):
            lo, hi = -_INF, _INF
            for a, b in ((self, other), (other, self)):
                if a.x_windows[i] is not None:
                    if b.x_windows[i] is not None:
                        bs = (-_INF, _INF)
                    else:
                        bs = b.var_support(i) or (_INF, -_INF)
                    if bs[0] == _INF:
                        continue
                    lo = max(lo, a.x_windows[i][0] + bs[1])
                    hi = min(hi, a.x_windows[i][1] + bs[0])
            if lo == -_INF and hi == _INF:
                xw.append(None)
            else:
                xw.append((-(1 << 61) if lo == -_INF else ((1 << 61) if lo == _INF else int(lo)),
                           (1 << 61) if hi == _INF else (-(1 << 61) if hi == -_INF else int(hi))))
        return xw, qv

    def __add__(self, other):
        xw, qv = self._meta_combine(other, mul=False)
        tt = dict(self.terms)
        for k, c in other.terms.items():
            v = tt.get(k, 0) + c
            if v == 0:
                tt.pop(k, None)
            else:
                tt[k] = v
        return MultiSeries(self.nvars, tt, xw, qv)

    def __neg__(self):
        return MultiSeries(self.nvars, {k: -c for k, c in self.terms.items()},
                           self.x_windows, self.q_valid2)

    def __sub__(self, other):
        return self + (-other)

    def scalar_mul(self, c):
        if c == 0:
            return MultiSeries(self.nvars, None, self.x_windows, self.q_valid2)
        return MultiSeries(self.nvars, {k: v * c for k, v in self.terms.items()},
                           self.x_windows, self.q_valid2)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scalar_mul(other)
        xw, qv = self._meta_combine(other, mul=True)
        a, b = self.terms, other.terms
        if len(a) > len(b):
            a, b = b, a
        tt = {}
        for (qa, xa), ca in a.items():
            for (qb, xb), cb in b.items():
                k = (qa + qb, tuple(u + v for u, v in zip(xa, xb)))
                v = tt.get(k, 0) + ca * cb
                if v == 0:
                    tt.pop(k, None)
                else:
                    tt[k] = v
        # clamp synthetic one-sided windows to realized support
        xw2 = []
        for i, w in enumerate(xw):
            if w is None:
                xw2.append(None)
                continue
            lo, hi = w
            if lo <= -(1 << 60) or hi >= (1 << 60):
                vals = [xs[i] for _, xs in tt] or [0]
                if lo <= -(1 << 60):
                    lo = min(vals)
                if hi >= (1 << 60):
                    hi = max(vals)
            xw2.append((lo, hi))
        return MultiSeries(self.nvars, tt, xw2, qv)

    __rmul__ = __mul__

    def truncated(self, x_windows=None, q_valid2=None):
        xw = list(self.x_windows)
        if x_windows is not None:
            for i, w in enumerate(x_windows):
                if w is None:
                    continue
                xw[i] = w if xw[i] is None else (max(xw[i][0], w[0]), min(xw[i][1], w[1]))
        qv = self.q_valid2
        if q_valid2 is not None:
            qv = q_valid2 if qv is None else min(qv, q_valid2)
        return MultiSeries(self.nvars, self.terms, xw, qv)

    def set_vars_equal(self) -> BiSeries:
        """Identify all x-variables; validity = intersection of windows."""
        tt = {}
        for (q2, xs), c in self.terms.items():
            k = (q2, sum(xs))
            v = tt.get(k, 0) + c
            if v == 0:
                tt.pop(k, None)
            else:
                tt[k] = v
        xw = None
        for w in self.x_windows:
            if w is not None:
                xw = w if xw is None else (max(xw[0], w[0]), min(xw[1], w[1]))
        return BiSeries(tt, xw, self.q_valid2)

    def coeff_of_var_power(self, i, e2):
        """Extract the coefficient of x_i^{e2/2} as a MultiSeries in the rest."""
        tt = {}
        for (q2, xs), c in self.terms.items():
            if xs[i] == e2:
                rest = xs[:i] + xs[i + 1:]
                tt[(q2, rest)] = c
        xw = self.x_windows[:i] + self.x_windows[i + 1:]
        return MultiSeries(self.nvars - 1, tt, xw, self.q_valid2)

    def rename_to_bi(self) -> BiSeries:
        if self.nvars != 1:
            raise ValueError("rename_to_bi needs exactly one x-variable")
        return BiSeries({(q2, xs[0]): c for (q2, xs), c in self.terms.items()},
                        self.x_windows[0], self.q_valid2)

    @classmethod
    def from_bi(cls, s: BiSeries, nvars: int, at: int):
        tt = {}
        for (q2, x2), c in s.terms.items():
            xs = [0] * nvars
            xs[at] = x2
            tt[(q2, tuple(xs))] = c
        xw = [None] * nvars
        xw[at] = s.x_window
        return cls(nvars, tt, xw, s.q_valid2)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: (kv[0][1], kv[0][0]))

    def text(self) -> str:
        if not self.terms:
            return "0"
        names = _VARNAMES if self.nvars <= len(_VARNAMES) else tuple(
            f"x{i+1}" for i in range(self.nvars))
        parts = []
        for (q2, xs), c in self.sorted_terms():
            factors = []
            neg = c < 0
            ca = -c if neg else c
            if q2 != 0:
                factors.append(f"q^{_fmt_exp2(q2)}")
            for i, e2 in enumerate(xs):
                if e2 != 0:
                    factors.append(f"{names[i]}^{_fmt_exp2(e2)}")
            if ca != 1 or not factors:
                factors.insert(0, _fmt_coeff(ca))
            term = "*".join(factors)
            if not parts:
                parts.append(("-" if neg else "") + term)
            else:
                parts.append(("- " if neg else "+ ") + term)
        return " ".join(parts)

    def to_json(self):
        terms = []
        for (q2, xs), c in self.sorted_terms():
            f = Fraction(c)
            terms.append({"q2": q2, "x2": list(xs), "num": str(f.numerator), "den": str(f.denominator)})
        return {
            "nvars": self.nvars,
            "terms": terms,
            "x_windows2": [list(w) if w is not None else None for w in self.x_windows],
            "q_valid2": self.q_valid2,
        }

    @classmethod
    def from_json(cls, obj):
        tt = {}
        for t in obj["terms"]:
            tt[(int(t["q2"]), tuple(int(v) for v in t["x2"]))] = Fraction(int(t["num"]), int(t["den"]))
        xw = [tuple(w) if w is not None else None for w in obj["x_windows2"]]
        return cls(int(obj["nvars"]), tt, xw, obj.get("q_valid2"))

    def __repr__(self):
        return f"<MultiSeries({self.nvars}) {self.text()}>"
