"""Weight-stratified reduced quantum traces of braid representations.

This is the engine that produces the two-variable series of a knot
complement from a braid word: exact for positive braids (each coefficient
a genuine polynomial), stabilization-detected for general words, and in a
multivariable flavor for links with one open component.

Conventions locked here (and exercised by the tests):

  * words act bottom to top; the first strand is the open one, pinned to
    the weight-0 basis vector at top and bottom;
  * the w-stratum carries its full share of the trace prefactor: closing
    strand k in state i contributes the twist x^{1/2} q^{-1/2-i} in the
    highest-weight module and x^{-1/2} q^{1/2+i} in the lowest-weight one;
  * the output is (x^{1/2} - x^{-1/2}) times the reduced trace, i.e. the
    negative expansion for hw words and the positive one for lw words.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import BiSeries, MultiSeries, x_half_diff
from .braid import BraidWord, closure_info
from . import rmatrix

EXACT = "exact_polynomial_coeffs"
STABILIZED = "stabilized"

# packed coefficient keys: key = q2 * _STRIDE + (x2 + _XOFF)
_STRIDE = 1 << 22
_XOFF = 1 << 21


def _pack(q2, x2):
    return q2 * _STRIDE + (x2 + _XOFF)


def _unpack(key):
    q2, r = divmod(key, _STRIDE)
    return q2, r - _XOFF


class StateVector:
    """Sparse map from weight tuples to coefficient dictionaries.

    The open strand's index is pinned at the bottom; crossings act as
    sparse linear maps.  Coefficients are packed-exponent dicts internally
    and only become BiSeries at the API boundary.
    """

    __slots__ = ("entries", "fixed_first")

    def __init__(self, entries=None, fixed_first=0):
        self.entries = entries if entries is not None else {}
        self.fixed_first = fixed_first

    @classmethod
    def seed(cls, tup, fixed_first=0):
        return cls({tuple(tup): {_pack(0, 0): 1}}, fixed_first)

    def to_biseries(self):
        return {t: BiSeries({_unpack(k): c for k, c in d.items()})
                for t, d in self.entries.items()}


def _support_bounds(letters, w, final_box):
    """Backward support-function bounds for sound in-flight pruning.

    Every positive crossing coefficient term moves the doubled exponents by
    (dq, dx) inside the cone dx in [-(1+3w), -1], -dx <= dq <= L*(-dx) with
    L = 2w + 4 (an entry's q-degree dominates its x-drop, and is bounded by
    a stratum-dependent multiple of it); negative crossings use the
    mirrored cone.  Propagating upper bounds on the eight functionals
    q, -q, x, -x, q+x, -(q+x), q+Lx, -(q+Lx) backward from the final
    window gives a per-step membership test: a term (q2, x2) can only
    contribute if d.(q2, x2) <= u_t(d) for every direction d.
    """
    L = 2 * w + 4
    X = 1 + 3 * w
    dirs = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, L), (-1, -L))
    # cone vertices as (dq, dx)
    pos_cone = ((1, -1), (L, -1), (X, -X), (L * X, -X))
    neg_cone = ((-1, 1), (-L, 1), (-X, X), (-L * X, X))
    qlo, qhi, xlo, xhi = final_box
    corners = ((qlo, xlo), (qlo, xhi), (qhi, xlo), (qhi, xhi))
    nl = len(letters)
    bounds = [None] * (nl + 1)
    cur = [max(a * q + b * x for q, x in corners) for a, b in dirs]
    bounds[nl] = tuple(cur)
    for t in range(nl - 1, -1, -1):
        cone = pos_cone if letters[t] > 0 else neg_cone
        cur = [u - min(a * dq + b * dx for dq, dx in cone)
               for u, (a, b) in zip(cur, dirs)]
        bounds[t] = tuple(cur)
    return dirs, bounds


def _preimages(module, sign, oa, ob):
    """Input pairs that can map to output pair (oa, ob) under one crossing."""
    if (module == "hw" and sign > 0) or (module == "lw" and sign < 0):
        # out (b+k, a-k): a = ob+k, b = oa-k
        return [(ob + k, oa - k) for k in range(oa + 1)]
    # out (b-k, a+k): a = ob-k, b = oa+k
    return [(ob - k, oa + k) for k in range(ob + 1)]


def _back_reach(letters, module, finals):
    """Per-step sets of tuples that can still reach a diagonal readout."""
    nl = len(letters)
    sets = [None] * (nl + 1)
    sets[nl] = set(finals)
    for t in range(nl - 1, -1, -1):
        p = abs(letters[t]) - 1
        sign = 1 if letters[t] > 0 else -1
        cur = set()
        for tup in sets[t + 1]:
            oa, ob = tup[p], tup[p + 1]
            pre, post = tup[:p], tup[p + 2:]
            for a, b in _preimages(module, sign, oa, ob):
                cur.add(pre + (a, b) + post)
        sets[t] = cur
    return sets


def best_rotation(b: BraidWord) -> int:
    """Cyclic shift that consumes positive letters as early as possible.

    The stratified trace is conjugation invariant, so any rotation computes
    the same invariant; fronting the positive letters makes the in-flight
    exponent bounds much tighter for mostly-negative words (and vice versa
    has no effect on one-sign words).
    """
    letters = b.letters
    nl = len(letters)
    if nl == 0:
        return 0
    npos = sum(1 for k in letters if k > 0)
    nneg = nl - npos
    minority_positive = npos <= nneg
    best, best_score = 0, None
    for r in range(nl):
        rot = letters[r:] + letters[:r]
        score = 0
        for t in range(nl):
            tail = rot[t:]
            score += sum(1 for k in tail if (k > 0) == minority_positive)
        if best_score is None or score < best_score:
            best, best_score = r, score
    return best


def stratum_trace(b: BraidWord, module: str, w: int,
                  x_window2=None, q_ceil2=None, q_floor2=None,
                  strand_cap=None, rotation=0) -> BiSeries:
    """Total-weight-w stratum of the reduced quantum trace.

    Enumerates bottom tuples with the open strand pinned to 0 and weight w
    on the closed strands, pushes each through the crossings, reads the
    diagonal coefficient and applies the closure twists.  The optional
    window/ceiling arguments prune exponents that provably cannot affect
    the requested range (they never change in-window values); ``rotation``
    conjugates the word by a cyclic shift first, which leaves every stratum
    unchanged (weight subspaces are finite dimensional).
    """
    if w < 0:
        raise ValueError("stratum weight must be >= 0")
    b = b.conjugated(rotation)
    n = b.strands
    letters = b.letters
    closure_x2 = (n - 1) if module == "hw" else -(n - 1)
    closure_q2 = (-(n - 1) - 2 * w) if module == "hw" else ((n - 1) + 2 * w)
    big = 1 << 60
    final_box = (
        (q_floor2 - closure_q2) if q_floor2 is not None else -big,
        (q_ceil2 - closure_q2) if q_ceil2 is not None else big,
        (x_window2[0] - closure_x2) if x_window2 else -big,
        (x_window2[1] - closure_x2) if x_window2 else big,
    )
    dirs, bounds = _support_bounds(letters, w, final_box)

    bottoms = _bottom_tuples(n, w, strand_cap)
    reach = _back_reach(letters, module, bottoms)
    acc: dict = {}
    for bottom in bottoms:
        if bottom not in reach[0]:
            continue
        final = _push(bottom, letters, module, dirs, bounds, reach)
        d = final.get(bottom)
        if not d:
            continue
        # closure twists for strands 2..N
        tw_q2 = 0
        for i in bottom[1:]:
            tw_q2 += (-1 - 2 * i) if module == "hw" else (1 + 2 * i)
        tw_x2 = closure_x2
        for key, c in d.items():
            k2 = key + tw_q2 * _STRIDE + tw_x2
            v = acc.get(k2, 0) + c
            if v == 0:
                acc.pop(k2, None)
            else:
                acc[k2] = v
    return BiSeries({_unpack(k): c for k, c in acc.items()})


def _bottom_tuples(n, w, strand_cap):
    """Tuples (0, i_2, ..., i_N) with sum w, each entry <= strand_cap."""
    cap = strand_cap if strand_cap is not None else w
    out = []

    def rec(prefix, remaining, slots):
        if slots == 0:
            if remaining == 0:
                out.append(tuple(prefix))
            return
        lo = 0
        for v in range(min(cap, remaining), -1, -1):
            if remaining - v > cap * (slots - 1):
                continue
            prefix.append(v)
            rec(prefix, remaining - v, slots - 1)
            prefix.pop()

    if n == 1:
        return [(0,)] if w == 0 else []
    rec([0], w, n - 1)
    return out


def _push(bottom, letters, module, dirs, bounds, reach=None):
    """Apply the crossing sequence to a seeded state vector."""
    state = {tuple(bottom): {_pack(0, 0): 1}}
    stride, xoff = _STRIDE, _XOFF
    L = dirs[6][1]
    for t, letter in enumerate(letters):
        p = abs(letter) - 1
        sign = 1 if letter > 0 else -1
        uq, unq, ux, unx, us, uns, uL, unL = bounds[t + 1]
        live = reach[t + 1] if reach is not None else None
        new_state: dict = {}
        rows = rmatrix.rows
        for tup, coeff in state.items():
            a, b = tup[p], tup[p + 1]
            pre, post = tup[:p], tup[p + 2:]
            for (oa, ob), eterms in rows(module, sign, a, b):
                if not eterms:
                    continue
                ntup = pre + (oa, ob) + post
                if live is not None and ntup not in live:
                    continue
                dst = new_state.get(ntup)
                if dst is None:
                    dst = new_state[ntup] = {}
                for key, sv in coeff.items():
                    q2s, r = divmod(key, stride)
                    x2s = r - xoff
                    # eterms is ascending in x2: positive letters shrink x,
                    # so iterate from the top and stop below the floor
                    if sign > 0:
                        for ex2, eq2, cv in reversed(eterms):
                            x2 = x2s + ex2
                            if x2 < -unx:
                                break
                            if x2 > ux:
                                continue
                            q2 = q2s + eq2
                            if q2 > uq or -q2 > unq:
                                continue
                            s = q2 + x2
                            if s > us or -s > uns:
                                continue
                            sL = q2 + L * x2
                            if sL > uL or -sL > unL:
                                continue
                            k2 = q2 * stride + (x2 + xoff)
                            v = dst.get(k2, 0) + cv * sv
                            if v == 0:
                                del dst[k2]
                            else:
                                dst[k2] = v
                    else:
                        for ex2, eq2, cv in eterms:
                            x2 = x2s + ex2
                            if x2 > ux:
                                break
                            if x2 < -unx:
                                continue
                            q2 = q2s + eq2
                            if q2 > uq or -q2 > unq:
                                continue
                            s = q2 + x2
                            if s > us or -s > uns:
                                continue
                            sL = q2 + L * x2
                            if sL > uL or -sL > unL:
                                continue
                            k2 = q2 * stride + (x2 + xoff)
                            v = dst.get(k2, 0) + cv * sv
                            if v == 0:
                                del dst[k2]
                            else:
                                dst[k2] = v
        state = {k: v for k, v in new_state.items() if v}
    return state


@dataclass
class FKResult:
    """A computed expansion of the knot-complement series.

    ``series`` already includes the (x^{1/2} - x^{-1/2}) factor.  For
    stabilized results ``coeff_q_valid2`` maps each certified x-exponent
    (doubled) to its certified q-order (doubled).
    """

    series: BiSeries
    expansion: str              # "negative" | "positive" | "balanced"
    exactness: str              # EXACT | STABILIZED
    strata_used: int
    coeff_q_valid2: dict | None = None
    diagnostics: list = field(default_factory=list)

    def f_coefficient(self, m: int) -> BiSeries:
        """f_m(q): the series is -x^{-1/2} sum f_m x^{-m} (negative) or
        x^{1/2} sum f_m x^m (positive)."""
        if self.expansion == "negative":
            x2 = -1 - 2 * m
            sgn = -1
        elif self.expansion == "positive":
            x2 = 1 + 2 * m
            sgn = 1
        else:
            raise ValueError("f-coefficients need a one-sided expansion")
        tt = {(q2, 0): sgn * c for (q2, xx2), c in self.series.terms.items() if xx2 == x2}
        qv = None
        if self.coeff_q_valid2 is not None:
            qv = self.coeff_q_valid2.get(x2)
        elif self.series.q_valid2 is not None:
            qv = self.series.q_valid2
        return BiSeries(tt, None, qv)

    def to_json(self):
        return {
            "series": self.series.to_json(),
            "expansion": self.expansion,
            "exactness": self.exactness,
            "strata_used": self.strata_used,
            "coeff_q_valid2": ({str(k): v for k, v in self.coeff_q_valid2.items()}
                               if self.coeff_q_valid2 is not None else None),
            "diagnostics": list(self.diagnostics),
        }


def _workers():
    try:
        return max(1, int(os.environ.get("FK_WORKERS", "1")))
    except ValueError:
        return 1


def _stratum_job(args):
    b, module, w, x_window2, q_ceil2, q_floor2, cap, rot = args
    return w, stratum_trace(b, module, w, x_window2, q_ceil2, q_floor2, cap, rot)


def _map_strata(b, module, ws, x_window2, q_ceil2, q_floor2, cap, rot=0):
    """Compute strata, serially or on a worker pool; order-stable output."""
    jobs = [(b, module, w, x_window2, q_ceil2, q_floor2, cap, rot) for w in ws]
    nw = _workers()
    if nw <= 1 or len(jobs) <= 1:
        return [_stratum_job(j) for j in jobs]
    import multiprocessing as mp
    with mp.Pool(min(nw, len(jobs))) as pool:
        out = pool.map(_stratum_job, jobs)
    return sorted(out, key=lambda t: t[0])


def fk_positive(b: BraidWord, x_order: int, q_order=None) -> FKResult:
    """Negative expansion for a positive braid knot, exact coefficients.

    Certified for all x-exponents >= -x_order - 1/2.  Termination comes
    from the degree bound of the crossing entries: a state whose maximal
    closed-strand weight is M only contributes x-degrees <= -M/2, so
    strands are capped at 2*x_order + 1 and the enumeration is finite.
    If ``q_order`` is given, coefficients are additionally truncated there
    (useful for deep windows); otherwise they are exact polynomials.
    """
    if not b.is_positive():
        raise ValueError("not positive: word contains inverse letters")
    if closure_info(b).components != 1:
        raise ValueError("not a knot: closure is a link")
    cap = 2 * x_order + 1
    # the +1 column keeps the unknot's x^{1/2} term; for genuine knots it
    # certifies a zero (negative expansions are supported in x <= -1/2)
    f_window = (-(2 * x_order + 1), 1)
    tr_window = (f_window[0] - 1, f_window[1] + 1)
    q_ceil2 = None if q_order is None else 2 * q_order + 2
    total = BiSeries.zero()
    n = b.strands
    ws = list(range(0, cap * max(1, n - 1) + 1))
    for _, piece in _map_strata(b, "hw", ws, tr_window, q_ceil2, None, cap):
        total = total + piece
    series = (total * x_half_diff()).truncated(x_window=f_window)
    if q_order is not None:
        series = series.truncated(q_valid2=2 * q_order + 1)
    return FKResult(series, "negative",
                    EXACT if q_order is None else STABILIZED,
                    len(ws),
                    coeff_q_valid2=None if q_order is None else
                    {x2: 2 * q_order + 1 for x2 in range(f_window[0], f_window[1] + 1, 2)})


def fk_stratified(b: BraidWord, module: str, x_order: int, q_order: int,
                  max_strata: int = 120, settle: int = 3, rotation=None) -> FKResult:
    """Stratified trace with stabilization detection for general words.

    A coefficient of x^j is certified to q-order ``q_order`` once it is
    unchanged for ``settle`` consecutive strata.  Reaching ``max_strata``
    without full stabilization is reported in ``diagnostics`` (and the
    partially certified data returned), never silently.

    ``rotation=None`` lets the engine conjugate the word into the cheapest
    cyclic rotation (the stratified trace is conjugation invariant); pass
    an explicit shift to pin the word as given.
    """
    if closure_info(b).components != 1:
        raise ValueError("not a knot: closure is a link")
    if module not in ("hw", "lw"):
        raise ValueError("module must be 'hw' or 'lw'")
    rot = best_rotation(b) if rotation is None else rotation
    expansion = "negative" if module == "hw" else "positive"
    if expansion == "negative":
        f_window = (-(2 * x_order + 1), 1)
    else:
        f_window = (-1, 2 * x_order + 1)
    tr_window = (f_window[0] - 1, f_window[1] + 1)
    q_ceil2 = 2 * q_order + 2
    q_floor2 = -2 * q_order - 2 * x_order - 2 * len(b.letters) - 8
    cols: dict = {}          # x2 -> dict q2 -> coeff (trace accumulator)
    streak: dict = {}        # x2 -> consecutive unchanged strata
    certified: dict = {}     # x2 -> certified (True once streak >= settle)
    targets = list(range(tr_window[0], tr_window[1] + 1))
    w = 0
    used = 0
    while w <= max_strata:
        piece = stratum_trace(b, module, w, tr_window, q_ceil2, q_floor2, rotation=rot)
        used = w + 1
        changed = set()
        for (q2, x2), c in piece.terms.items():
            col = cols.setdefault(x2, {})
            v = col.get(q2, 0) + c
            if v == 0:
                col.pop(q2, None)
            else:
                col[q2] = v
            if q2 <= 2 * q_order:
                changed.add(x2)
        for x2 in targets:
            if x2 in changed:
                streak[x2] = 0
            else:
                streak[x2] = streak.get(x2, 0) + 1
                if streak[x2] >= settle:
                    certified[x2] = True
        if all(certified.get(x2) for x2 in targets):
            break
        w += 1
    diagnostics = []
    if not all(certified.get(x2) for x2 in targets):
        missing = [x2 for x2 in targets if not certified.get(x2)]
        diagnostics.append(
            f"no stabilization: columns x2={missing} still moving after {used} strata")
    trace = BiSeries({(q2, x2): c for x2, col in cols.items() for q2, c in col.items()},
                     tr_window, 2 * q_order + 1)
    series = (trace * x_half_diff()).truncated(x_window=f_window)
    coeff_valid = {x2: 2 * q_order + 1 for x2 in range(f_window[0], f_window[1] + 1, 2)
                   if certified.get(x2 - 1) and certified.get(x2 + 1)}
    return FKResult(series, expansion, STABILIZED, used,
                    coeff_q_valid2=coeff_valid, diagnostics=diagnostics)


def weyl_transforms(r: FKResult):
    """Mirror expansion (F+ <-> F-) and the balanced average of the two.

    Returns (mirror, balanced).  Uses F+(x, q) = -F-(1/x, q); the balanced
    series is supported on both sides, each certified by its one-sided
    parent, so the union window is sound.
    """
    if r.expansion not in ("negative", "positive"):
        raise ValueError("weyl_transforms needs a one-sided expansion")
    mirror_series = -r.series.sub_x_inv()
    mirror = FKResult(mirror_series,
                      "positive" if r.expansion == "negative" else "negative",
                      r.exactness, r.strata_used,
                      coeff_q_valid2=None if r.coeff_q_valid2 is None else
                      {-x2: v for x2, v in r.coeff_q_valid2.items()},
                      diagnostics=list(r.diagnostics))
    half = Fraction(1, 2)
    terms = {}
    for (q2, x2), c in r.series.terms.items():
        terms[(q2, x2)] = terms.get((q2, x2), 0) + half * c
    for (q2, x2), c in mirror_series.terms.items():
        terms[(q2, x2)] = terms.get((q2, x2), 0) + half * c
    lo = min(r.series.x_window[0], mirror_series.x_window[0]) \
        if r.series.x_window and mirror_series.x_window else None
    hi = max(r.series.x_window[1], mirror_series.x_window[1]) \
        if r.series.x_window and mirror_series.x_window else None
    window = (lo, hi) if lo is not None else None
    qv = r.series.q_valid2
    balanced = FKResult(BiSeries(terms, window, qv), "balanced", r.exactness,
                        r.strata_used,
                        coeff_q_valid2=None if r.coeff_q_valid2 is None else
                        {**r.coeff_q_valid2,
                         **{-x2: v for x2, v in r.coeff_q_valid2.items()}},
                        diagnostics=list(r.diagnostics))
    return mirror, balanced


# ---------------------------------------------------------------------------
# multivariable links
# ---------------------------------------------------------------------------

@dataclass
class LinkResult:
    """Multivariable series for a link with one open component.

    ``series`` includes the open-variable (x^{1/2} - x^{-1/2}) factor and
    the linking-number normalization; exponents are on the half lattice.
    """

    series: MultiSeries
    variables: tuple
    expansion: str
    exactness: str
    strata_used: int
    diagnostics: list = field(default_factory=list)


def _color_track(b: BraidWord, strand_var):
    """Variable carried by each position before each letter is applied."""
    cur = [strand_var[s] for s in range(b.strands)]
    seq = []
    for k in b.letters:
        seq.append(tuple(cur))
        p = abs(k) - 1
        cur[p], cur[p + 1] = cur[p + 1], cur[p]
    seq.append(tuple(cur))
    return seq


def fk_multivariable(b: BraidWord, coloring, x_orders, q_order=None,
                     module: str = "hw", max_strata: int = 60, settle: int = 3) -> LinkResult:
    """Series invariant of a braid-closure link, one variable per component.

    ``coloring`` maps strand index -> variable index; all strands of a
    component must share a variable and strand 0's component is the open
    one (its variable gets the half-difference prefactor).  ``x_orders``
    bounds the certified total degree window.  Positive words terminate by
    the degree bound; otherwise strata are stabilization-detected like
    fk_stratified (requires ``q_order``).
    """
    info = closure_info(b)
    if info.components < 2:
        raise ValueError("fk_multivariable needs a link of >= 2 components")
    nv = max(coloring.values()) + 1
    by_comp = {}
    for s in range(b.strands):
        c = info.component_of_strand[s]
        v = coloring[s]
        if c in by_comp and by_comp[c] != v:
            raise ValueError("inconsistent coloring: component %d gets two variables" % c)
        by_comp[c] = v
    if len(set(by_comp.values())) != len(by_comp):
        raise ValueError("inconsistent coloring: two components share a variable")
    open_var = coloring[0]
    positive = b.is_positive()
    if not positive and q_order is None:
        raise ValueError("non-positive words need q_order for stabilization")

    letters = b.letters
    colorseq = _color_track(b, coloring)
    n = b.strands
    # total-degree window (quadrupled): every positive crossing lowers the
    # total x-degree by at least 1/2, negative raises it likewise
    tot_order4 = 4 * (sum(x_orders) + nv)
    lo4 = -tot_order4 - 4 if module == "hw" else -tot_order4 - 4
    hi4 = tot_order4 + 4
    q_ceil2 = None if q_order is None else 2 * q_order + 2
    q_floor2 = None if q_order is None else -2 * q_order - tot_order4 - 2 * len(letters) - 8
    cap = 2 * max(x_orders) * max(1, nv) + 2 if positive else None

    def one_stratum(w):
        min_dx, max_dx, min_dq, max_dq = _mixed_letter_bounds(letters, w)
        closure_tot4 = 2 * (n - 1) * (1 if module == "hw" else -1)
        closure_q2 = (-(n - 1) - 2 * w) if module == "hw" else ((n - 1) + 2 * w)

        def keep(t, q2, tot4):
            if tot4 + max_dx[t] + closure_tot4 < lo4:
                return False
            if tot4 + min_dx[t] + closure_tot4 > hi4:
                return False
            if q_ceil2 is not None and q2 + min_dq[t] + closure_q2 > q_ceil2:
                return False
            if q_floor2 is not None and q2 + max_dq[t] + closure_q2 < q_floor2:
                return False
            return True

        acc = {}
        for bottom in _bottom_tuples(n, w, cap if cap is not None else w):
            state = {tuple(bottom): {(0, (0,) * nv): 1}}
            for t, letter in enumerate(letters):
                p = abs(letter) - 1
                sign = 1 if letter > 0 else -1
                ca, cb = colorseq[t][p], colorseq[t][p + 1]
                new_state = {}
                for tup, coeff in state.items():
                    a, bb = tup[p], tup[p + 1]
                    for (oa, ob), ec, role in rmatrix.mixed_rows(module, sign, a, bb):
                        if not ec.terms:
                            continue
                        vi, vj = (ca, cb) if role == 0 else (cb, ca)
                        ntup = tup[:p] + (oa, ob) + tup[p + 2:]
                        dst = new_state.setdefault(ntup, {})
                        for (eq2, (ex4, ey4)), cv in ec.terms.items():
                            for (q2, xs), sv in coeff.items():
                                nq2 = q2 + eq2
                                nxs = list(xs)
                                nxs[vi] += ex4
                                nxs[vj] += ey4
                                if not keep(t + 1, nq2, sum(nxs)):
                                    continue
                                kk = (nq2, tuple(nxs))
                                v = dst.get(kk, 0) + cv * sv
                                if v == 0:
                                    del dst[kk]
                                else:
                                    dst[kk] = v
                state = {k: v for k, v in new_state.items() if v}
            d = state.get(tuple(bottom))
            if not d:
                continue
            tw_q2 = 0
            tw_xs = [0] * nv
            for s_idx in range(1, n):
                i = bottom[s_idx]
                var = coloring[s_idx]
                if module == "hw":
                    tw_q2 += -1 - 2 * i
                    tw_xs[var] += 2
                else:
                    tw_q2 += 1 + 2 * i
                    tw_xs[var] -= 2
            for (q2, xs), c in d.items():
                kk = (q2 + tw_q2, tuple(e + t2 for e, t2 in zip(xs, tw_xs)))
                v = acc.get(kk, 0) + c
                if v == 0:
                    acc.pop(kk, None)
                else:
                    acc[kk] = v
        return acc

    cols: dict = {}
    diagnostics: list = []
    if positive and q_order is None:
        top = cap * (n - 1)
        for w in range(top + 1):
            for kk, c in one_stratum(w).items():
                v = cols.get(kk, 0) + c
                if v == 0:
                    cols.pop(kk, None)
                else:
                    cols[kk] = v
        used = top + 1
        exactness = EXACT
    else:
        streak = 0
        used = 0
        w = 0
        while w <= max_strata:
            delta = one_stratum(w)
            changed = False
            for kk, c in delta.items():
                v = cols.get(kk, 0) + c
                if v == 0:
                    cols.pop(kk, None)
                else:
                    cols[kk] = v
                if kk[0] <= 2 * q_order:
                    changed = True
            used = w + 1
            streak = 0 if changed else streak + 1
            if streak >= settle:
                break
            w += 1
        if streak < settle:
            diagnostics.append(f"no stabilization after {used} strata")
        exactness = STABILIZED

    # open-variable half-difference prefactor (quadrupled exponents +-2)
    total = {}
    for (q2, xs), c in cols.items():
        for s4, sgn in ((2, 1), (-2, -1)):
            nxs = list(xs)
            nxs[open_var] += s4
            kk = (q2, tuple(nxs))
            v = total.get(kk, 0) + sgn * c
            if v == 0:
                total.pop(kk, None)
            else:
                total[kk] = v
    # linking-number normalization: multiply by prod (x_c x_c')^{lk/2},
    # which restores the per-variable grading the stripped framing carries
    lk_shift4 = [0] * nv
    for c1 in range(info.components):
        for c2 in range(c1 + 1, info.components):
            l = info.pairwise_linking[c1][c2]
            lk_shift4[by_comp[c1]] += int(2 * l)
            lk_shift4[by_comp[c2]] += int(2 * l)
    shifted = {}
    for (q2, xs), c in total.items():
        shifted[(q2, tuple(e + s for e, s in zip(xs, lk_shift4)))] = c
    # back to the half lattice
    out_terms = {}
    for (q2, xs), c in shifted.items():
        if any(e % 2 for e in xs):
            raise ArithmeticError("quarter powers failed to cancel in the closure")
        out_terms[(q2, tuple(e // 2 for e in xs))] = c
    windows = [(-2 * x_orders[i] - 1, 2 * x_orders[i] + 1) for i in range(nv)]
    qv = None if (positive and q_order is None) else 2 * q_order + 1
    series = MultiSeries(nv, out_terms, windows, qv)
    return LinkResult(series, tuple(range(nv)),
                      "negative" if module == "hw" else "positive",
                      exactness, used, diagnostics)


def _mixed_letter_bounds(letters, w):
    """Total-degree analog of _letter_bounds on the quadrupled lattice."""
    qmax = 2 * w * w + 4 * w + 4
    n = len(letters)
    min_dx = [0] * (n + 1)
    max_dx = [0] * (n + 1)
    min_dq = [0] * (n + 1)
    max_dq = [0] * (n + 1)
    for t in range(n - 1, -1, -1):
        pos = letters[t] > 0
        min_dx[t] = min_dx[t + 1] + (-(2 + 6 * w) if pos else 2)
        max_dx[t] = max_dx[t + 1] + (-2 if pos else 2 + 6 * w)
        min_dq[t] = min_dq[t + 1] + (1 if pos else -qmax)
        max_dq[t] = max_dq[t + 1] + (qmax if pos else -1)
    return min_dx, max_dx, min_dq, max_dq


def _first_strand_of(info, comp):
    for s in sorted(info.component_of_strand):
        if info.component_of_strand[s] == comp:
            return s
    raise KeyError(comp)
