"""Finite-color invariants: colored Jones, Kashaev evaluation, difference-
operator annihilation checks and the x = 1 series of a balanced expansion.

The colored Jones trace works over V_n with the explicit writhe prefactor;
entries carry quarter powers of q internally (quadrupled exponents), which
always cancel for knots.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction

from .algebra import BiSeries, ValidityError, divide_exact_q, qint
from .braid import BraidWord, closure_info
from . import rmatrix


def _finite_back_reach(b: BraidWord, n: int, finals):
    """Per-step tuple sets that can still reach a diagonal readout."""
    nl = len(b.letters)
    sets = [None] * (nl + 1)
    sets[nl] = set(finals)
    for t in range(nl - 1, -1, -1):
        letter = b.letters[t]
        p = abs(letter) - 1
        sign = 1 if letter > 0 else -1
        cur = set()
        for tup in sets[t + 1]:
            oa, ob = tup[p], tup[p + 1]
            pre, post = tup[:p], tup[p + 2:]
            # invert (a,b) -> (b -+ 2k, a +- 2k)
            for k in range(n):
                if sign > 0:
                    a, bb = ob - 2 * k, oa + 2 * k
                else:
                    a, bb = ob + 2 * k, oa - 2 * k
                if abs(a) <= n - 1 and abs(bb) <= n - 1:
                    cur.add(pre + (a, bb) + post)
        sets[t] = cur
    return sets


def _colored_trace(b: BraidWord, n: int, pinned: bool) -> dict:
    """Quantum trace over V_n^{(x) N}; returns packed (q4 -> coeff) dict.

    ``pinned`` fixes the first strand's label to n-1 (reduced trace);
    otherwise the first strand closes with its own twist like the rest.
    """
    N = b.strands
    labels = [n - 1 - 2 * j for j in range(n)]
    first = [n - 1] if pinned else labels
    acc: dict = {}
    for i1 in first:
        bottoms = []

        def extend(prefix):
            if len(prefix) == N:
                bottoms.append(prefix)
                return
            for l in labels:
                extend(prefix + (l,))

        extend((i1,))
        reach = _finite_back_reach(b, n, bottoms)
        for bottom in bottoms:
            if bottom not in reach[0]:
                continue
            state = {bottom: {0: 1}}
            for t, letter in enumerate(b.letters):
                p = abs(letter) - 1
                sign = 1 if letter > 0 else -1
                live = reach[t + 1]
                new_state: dict = {}
                for tup, coeff in state.items():
                    a, bb = tup[p], tup[p + 1]
                    for (oa, ob), ec in rmatrix.finite_rows(n, n, sign, a, bb):
                        if not ec.terms:
                            continue
                        ntup = tup[:p] + (oa, ob) + tup[p + 2:]
                        if ntup not in live:
                            continue
                        dst = new_state.setdefault(ntup, {})
                        for (eq4, _), cv in ec.terms.items():
                            for q4, sv in coeff.items():
                                k = q4 + eq4
                                v = dst.get(k, 0) + cv * sv
                                if v == 0:
                                    del dst[k]
                                else:
                                    dst[k] = v
                state = {k: v for k, v in new_state.items() if v}
            d = state.get(bottom)
            if not d:
                continue
            tw4 = sum(2 * i for i in bottom[1:])
            if not pinned:
                tw4 += 2 * bottom[0]
            for q4, c in d.items():
                k = q4 + tw4
                v = acc.get(k, 0) + c
                if v == 0:
                    acc.pop(k, None)
                else:
                    acc[k] = v
    return acc


def colored_jones(b: BraidWord, n: int, reduced: bool = True) -> BiSeries:
    """Colored Jones polynomial of the braid closure for the color V_n.

    Includes the writhe prefactor q^{-(n^2-1) w / 4}; the reduced
    normalization gives 1 on the unknot, the unreduced one gives the
    quantum dimension [n].
    """
    if n < 1:
        raise ValueError("color must be >= 1")
    if closure_info(b).components != 1:
        raise ValueError("not a knot: closure is a link")
    if n == 1:
        return BiSeries.one() if reduced else BiSeries.one()
    acc = _colored_trace(b, n, pinned=reduced)
    w = b.writhe()
    shift4 = -(n * n - 1) * w
    tt = {}
    for q4, c in acc.items():
        e4 = q4 + shift4
        if e4 % 2 != 0:
            raise ArithmeticError("quarter powers failed to cancel for a knot")
        tt[(e4 // 2, 0)] = c
    return BiSeries(tt)


def kashaev(b: BraidWord, n: int):
    """Kashaev invariant: the reduced colored Jones at q = e^{2 pi i / n}.

    The polynomial is evaluated exactly in Z[zeta_{2n}] (exponent folding)
    and floated once at the end; returns a complex number.
    """
    if n < 2:
        raise ValueError("kashaev needs n >= 2")
    j = colored_jones(b, n, reduced=True)
    vec = [Fraction(0)] * (2 * n)
    for (q2, _), c in j.terms.items():
        vec[q2 % (2 * n)] += c
    out = 0 + 0j
    for k, c in enumerate(vec):
        if c:
            out += float(c) * cmath.exp(1j * cmath.pi * k / n)
    return out


# ---------------------------------------------------------------------------
# difference-operator annihilation
# ---------------------------------------------------------------------------

@dataclass
class AnnihilatorOp:
    """Operator sum_k a_k(x, q) yhat^k with yhat f(x) = f(q^{+-1} x)."""

    coeffs: list  # list of BiSeries, index = power of yhat

    def __post_init__(self):
        while self.coeffs and self.coeffs[-1].is_zero():
            self.coeffs.pop()

    @classmethod
    def from_json(cls, obj):
        return cls([BiSeries.from_json(t) for t in obj["coeffs"]])

    def to_json(self):
        return {"coeffs": [c.to_json() for c in self.coeffs]}


@dataclass
class AnnihilationReport:
    results: dict           # convention -> {"status": ..., "residual": BiSeries}

    def annihilating_conventions(self):
        return [k for k, v in self.results.items() if v["status"] == "annihilates"]

    def summary(self):
        lines = []
        for conv, info in sorted(self.results.items()):
            lines.append(f"yhat: x -> {conv}: {info['status']}" + (
                f" on window {info['residual'].x_window} (q_valid2={info['residual'].q_valid2})"
                if info["residual"] is not None else ""))
        return "\n".join(lines)


def check_annihilator(op: AnnihilatorOp, f) -> AnnihilationReport:
    """Apply the operator to a computed series under both shift conventions.

    ``f`` may be an FKResult or a BiSeries with window metadata.  For each
    convention the residual sum_k a_k(x,q) f(q^{+-k} x) is formed on the
    jointly certified window and classified as annihilating, nonzero, or
    window-too-small.
    """
    series = f.series if hasattr(f, "series") else f
    if series.x_window is None:
        raise ValidityError("annihilator check needs a windowed series")
    results = {}
    for conv, k2 in (("q*x", 2), ("x/q", -2)):
        residual = None
        for k, a in enumerate(op.coeffs):
            if a.is_zero():
                continue
            shifted = series if k == 0 else series.map_x_shift_q(k2 * k)
            term = a * shifted
            residual = term if residual is None else residual + term
        if residual is None:
            residual = BiSeries.zero()
        window_ok = (residual.x_window is None
                     or residual.x_window[0] <= residual.x_window[1])
        qv_ok = residual.q_valid2 is None or residual.q_valid2 > _min_possible_q2(residual)
        if not window_ok or not qv_ok:
            results[conv] = {"status": "window too small", "residual": residual}
            continue
        status = "annihilates" if residual.is_zero() else "nonzero residual"
        results[conv] = {"status": status, "residual": residual}
    return AnnihilationReport(results)


def _min_possible_q2(s: BiSeries):
    if s.terms:
        return min(q2 for q2, _ in s.terms)
    return -(1 << 40)


# ---------------------------------------------------------------------------
# x = 1 specialization of a balanced expansion
# ---------------------------------------------------------------------------

def strange_series(f, tail_min_q2=None) -> BiSeries:
    """The q-series F^{+-}(x,q) / (x^{1/2} - x^{-1/2}) at x = 1.

    For a balanced expansion (1/2) sum_m f_m (x^{m+1/2} - x^{-m-1/2}) the
    quotient is a balanced x-integer times f_m, so the value at x = 1 is
    sum_m (2m+1) f_m / 2 ... with the sum running over the certified
    window.  ``tail_min_q2`` bounds (doubled) the least q-exponent of the
    uncomputed f_m for m beyond the window; without it no q-order can be
    certified and a ValidityError reports the observed degree growth.
    """
    series = f.series if hasattr(f, "series") else f
    expansion = getattr(f, "expansion", "balanced")
    if expansion != "balanced":
        raise ValueError("strange_series needs the balanced expansion")
    coeffs = {}
    for (q2, x2), c in series.terms.items():
        if x2 <= 0:
            continue
        m = (x2 - 1) // 2
        coeffs.setdefault(m, {})[q2] = c
    out = {}
    for m, col in coeffs.items():
        for q2, c in col.items():
            k = (q2, 0)
            out[k] = out.get(k, 0) + (2 * m + 1) * c
    # validity: the window certifies m <= M; the tail starts at M+1
    qv = series.q_valid2
    if series.x_window is not None:
        m_max = (series.x_window[1] - 1) // 2
        if tail_min_q2 is None:
            grow = sorted((m, min(col)) for m, col in coeffs.items())
            raise ValidityError(
                "validity-unbounded: no tail bound for m > %d; observed "
                "min q2 per m: %s" % (m_max, grow))
        tail = tail_min_q2(m_max + 1)
        qv = tail if qv is None else min(qv, tail)
    return BiSeries(out, None, qv)


def positive_braid_tail_bound(strands: int):
    """Sound lower bound on the least q-exponent (doubled) of f_m for a
    positive braid knot on the given strand count: every crossing's
    q-degree dominates its x-drop, and deep strata pay the weight w, giving
    min deg f_m >= m / (2 N - 1)."""
    def bound(m):
        return max(0, (2 * m) // (2 * strands - 1))
    return bound


# ---------------------------------------------------------------------------
# MMR-type consistency helper
# ---------------------------------------------------------------------------

def reduced_from_unreduced(b: BraidWord, n: int) -> BiSeries:
    """Unreduced trace divided exactly by the quantum dimension [n].

    The division resolving the 0/0 at q = 1 is done on exact polynomials;
    it must be exact for a knot, which is itself a strong consistency
    check of the trace normalization.
    """
    unred = colored_jones(b, n, reduced=False)
    return divide_exact_q(unred, qint(n))
