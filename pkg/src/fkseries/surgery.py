"""Laplace-transform surgery: q-series of Dehn fillings from knot/link series.

The transform sends x^u to a pure q-power on a congruence class of u and
kills everything else, one output series per coset label; rational
surgeries on knots, integer-matrix surgeries on links, partial surgery
that keeps some components open, and the inverse problem (recovering a
link's series from a family of its fillings).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import BiSeries, MultiSeries, ValidityError


class SurgeryError(ValueError):
    pass


@dataclass
class QSeriesBundle:
    """One q-series per Spin^c coset of a surgery.

    ``terms`` maps exact rational q-exponents to coefficients; ``d`` is the
    exponent of the lowest term and ``eps`` the sign of its coefficient, so
    the normalized series (lowest term +1) is eps * q^{-d} * (this one).
    ``q_valid`` bounds the certified exponents.
    """

    spinc: object               # Fraction, or tuple of Fractions for links
    terms: dict
    q_valid: object             # Fraction | None

    @property
    def d(self):
        if not self.terms:
            return None
        return min(self.terms)

    @property
    def eps(self):
        if not self.terms:
            return 1
        return 1 if self.terms[self.d] > 0 else -1

    def normalized_terms(self):
        """Exponent -> coefficient relative to the lowest term, made +1."""
        if not self.terms:
            return {}
        d, e = self.d, self.eps
        return {k - d: e * v for k, v in self.terms.items()}

    def normalized_valid(self):
        if self.q_valid is None or not self.terms:
            return self.q_valid
        return self.q_valid - self.d

    def to_json(self):
        def r(v):
            f = Fraction(v)
            return [f.numerator, f.denominator]
        return {
            "spinc": r(self.spinc) if not isinstance(self.spinc, tuple)
                     else [r(v) for v in self.spinc],
            "terms": [[r(k), r(v)] for k, v in sorted(self.terms.items())],
            "q_valid": r(self.q_valid) if self.q_valid is not None else None,
            "d": r(self.d) if self.terms else None,
            "eps": self.eps,
        }


def _series_of(f):
    return f.series if hasattr(f, "series") else f


def _coeff_valid_map(f):
    if hasattr(f, "coeff_q_valid2") and f.coeff_q_valid2:
        return f.coeff_q_valid2
    return None


def laplace_knot(f, p: int, r: int = 1) -> list:
    """Surgery series of the p/r filling from a knot's expansion window.

    Multiplies by (x^{1/(2r)} - x^{-1/(2r)}), groups monomial exponents u
    by the congruence class of r*u mod p, and maps x^u to q^{-(r/p) u^2};
    the direction check requires -r/p > 0 on a nonempty lattice, otherwise
    the filling is outside this formula's reach ("divergent direction").

    Output bundles are sorted by coset representative in [0, |p|); each
    carries its own certified q-order, derived from the first x-exponent
    outside the input window (unknown coefficients there) and from the
    per-coefficient q-validity inside it.
    """
    if p == 0 or r == 0:
        raise SurgeryError("surgery coefficients need p != 0, r != 0")
    series = _series_of(f)
    if series.x_window is None:
        raise SurgeryError("empty window: surgery needs a finite x-window")
    if Fraction(-r, p) <= 0:
        raise SurgeryError("divergent direction: -r/p must be positive")
    coeff_valid = _coeff_valid_map(f)
    expansion = getattr(f, "expansion", "balanced")
    # which window edges hide unknown coefficients: a one-sided expansion
    # is exact beyond its support edge (knot series live on odd doubled
    # x-exponents, so even columns are exactly zero as well)
    low_unknown = expansion in ("negative", "balanced")
    high_unknown = expansion in ("positive", "balanced")
    pa = abs(p)

    def image(u):
        return Fraction(-r, p) * u * u

    def coset(u):
        return (u * r) % pa

    bundles: dict = {}
    q_valid: dict = {}
    lo2, hi2 = series.x_window
    global_floor2 = min([0] + [q2 for q2, _ in series.terms])
    # certified terms
    for (q2, x2), c in series.terms.items():
        for s, sgn in ((Fraction(1, 2 * r), 1), (Fraction(-1, 2 * r), -1)):
            u = Fraction(x2, 2) + s
            b = coset(u)
            e = image(u) + Fraction(q2, 2)
            d = bundles.setdefault(b, {})
            v = d.get(e, 0) + sgn * c
            if v == 0:
                d.pop(e, None)
            else:
                d[e] = v
    # every Spin^c coset the shifted half-integer lattice can reach
    reps = sorted({coset(Fraction(k, 2 * r)) for k in range(4 * r * pa)})
    edges = []
    if low_unknown:
        edges.append((lo2 - 2, -2))
    if high_unknown:
        edges.append((hi2 + 2, 2))
    for b in reps:
        best = None
        # unknown coefficients start just outside the truncated edge, on
        # the odd-column lattice of the knot series
        for edge2, step2 in edges:
            for s in (Fraction(1, 2 * r), Fraction(-1, 2 * r)):
                x2 = edge2
                for _ in range(4 * pa * r + 8):
                    u = Fraction(x2, 2) + s
                    if coset(u) == b:
                        cand = image(u) + Fraction(global_floor2, 2)
                        best = cand if best is None else min(best, cand)
                        break
                    x2 += step2
        # interior per-coefficient q-validity
        for x2 in range(lo2, hi2 + 1):
            if coeff_valid is not None:
                if x2 not in coeff_valid:
                    continue  # columns outside the support parity are exact
                qv2 = coeff_valid[x2]
            else:
                qv2 = series.q_valid2
            if qv2 is None:
                continue
            for s in (Fraction(1, 2 * r), Fraction(-1, 2 * r)):
                u = Fraction(x2, 2) + s
                if coset(u) == b:
                    cand = image(u) + Fraction(qv2, 2)
                    best = cand if best is None else min(best, cand)
        q_valid[b] = best
    out = []
    for b in reps:
        terms = bundles.get(b, {})
        qv = q_valid.get(b)
        if qv is not None:
            terms = {k: v for k, v in terms.items() if k < qv}
        if not terms and qv is None:
            continue  # coset the series provably never meets
        out.append(QSeriesBundle(Fraction(b), terms, qv))
    return out


def laplace_link(f, B) -> list:
    """Integer-matrix surgery on a link series (one variable per component).

    ``B`` is the symmetric linking matrix with the surgery coefficients on
    the diagonal; requires -B^{-1} positive definite (else the quadratic
    form does not grow and the direction diverges).  Components are indexed
    like the series variables; the coset label of u is the fractional part
    vector of B^{-1} u.
    """
    series = _series_of(f)
    nv = series.nvars
    if len(B) != nv or any(len(row) != nv for row in B):
        raise SurgeryError("linking matrix size mismatch")
    for i in range(nv):
        for j in range(nv):
            if B[i][j] != B[j][i]:
                raise SurgeryError("linking matrix must be symmetric")
    det, inv = _invert_symmetric(B)
    if det == 0:
        raise SurgeryError("singular B")
    if not _neg_definite(B):
        raise SurgeryError("divergent direction: -B^{-1} must be positive definite")

    def image(u):
        # -(u, B^{-1} u)
        s = Fraction(0)
        for i in range(nv):
            for j in range(nv):
                s += u[i] * inv[i][j] * u[j]
        return -s

    def coset(u):
        v = [sum(inv[i][j] * u[j] for j in range(nv)) for i in range(nv)]
        return tuple(x - _floor_frac(x) for x in v)

    # prefactor: product over components of (x_i^{1/2} - x_i^{-1/2})
    pref = MultiSeries.one(nv)
    for i in range(nv):
        shift = [0] * nv
        shift[i] = 1
        pos = MultiSeries.monomial(nv, 1, 0, tuple(shift))
        shift[i] = -1
        neg = MultiSeries.monomial(nv, 1, 0, tuple(shift))
        pref = pref * (pos - neg)
    g = pref * series
    bundles: dict = {}
    for (q2, xs), c in g.terms.items():
        u = tuple(Fraction(e, 2) for e in xs)
        b = coset(u)
        e = image(u) + Fraction(q2, 2)
        d = bundles.setdefault(b, {})
        v = d.get(e, 0) + c
        if v == 0:
            d.pop(e, None)
        else:
            d[e] = v
    # validity: smallest image of a lattice point with any variable outside
    # its window
    global_floor2 = min([0] + [q2 for q2, _ in series.terms])
    qv_global = None
    if any(w is not None for w in g.x_windows):
        best = None
        # scan a box around the windows for out-of-window lattice points
        spans = []
        for i, w in enumerate(g.x_windows):
            if w is None:
                s = series.var_support(i) or (0, 0)
                spans.append((s[0], s[1], False))
            else:
                spans.append((w[0], w[1], True))
        margin = 2 * max(abs(v) for row in B for v in row) * nv + 4
        best = _min_outside_image(spans, margin, image)
        qv_global = best + Fraction(global_floor2, 2) if best is not None else None
    if series.q_valid2 is not None:
        inner = min((image(tuple(Fraction(e, 2) for e in xs)) for (_, xs) in g.terms),
                    default=Fraction(0))
        cand = inner + Fraction(series.q_valid2, 2)
        qv_global = cand if qv_global is None else min(qv_global, cand)
    out = []
    for b in sorted(bundles.keys()):
        terms = bundles[b]
        if qv_global is not None:
            terms = {k: v for k, v in terms.items() if k < qv_global}
        out.append(QSeriesBundle(b, terms, qv_global))
    return out


def _floor_frac(x: Fraction) -> int:
    return x.numerator // x.denominator


def _invert_symmetric(B):
    n = len(B)
    a = [[Fraction(B[i][j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)]
         for i in range(n)]
    det = Fraction(1)
    for col in range(n):
        piv = None
        for row in range(col, n):
            if a[row][col] != 0:
                piv = row
                break
        if piv is None:
            return 0, None
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for row in range(n):
            if row != col and a[row][col] != 0:
                f = a[row][col]
                a[row] = [x - f * y for x, y in zip(a[row], a[col])]
    return det, [row[n:] for row in a]


def _neg_definite(B):
    n = len(B)
    sign = -1
    for k in range(1, n + 1):
        minor = [[Fraction(B[i][j]) for j in range(k)] for i in range(k)]
        d = _det_frac(minor)
        if sign * d <= 0:
            return False
        sign = -sign if False else sign
        sign = (-1) ** (k + 1)
    return True


def _det_frac(m):
    n = len(m)
    m = [row[:] for row in m]
    det = Fraction(1)
    for col in range(n):
        piv = None
        for row in range(col, n):
            if m[row][col] != 0:
                piv = row
                break
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for row in range(col + 1, n):
            if m[row][col] != 0:
                f = m[row][col] * inv
                m[row] = [x - f * y for x, y in zip(m[row], m[col])]
    return det


def _min_outside_image(spans, margin, image):
    """Least image of a half-lattice point just outside the window box."""
    best = None
    n = len(spans)

    def rec(i, u, outside):
        nonlocal best
        if i == n:
            if outside:
                v = image(tuple(u))
                if best is None or v < best:
                    best = v
            return
        lo, hi, windowed = spans[i]
        for e2 in range(lo - (2 * margin if windowed else 0),
                        hi + (2 * margin if windowed else 0) + 1):
            out_here = windowed and not (lo <= e2 <= hi)
            u.append(Fraction(e2, 2))
            rec(i + 1, u, outside or out_here)
            u.pop()

    rec(0, [], False)
    return best


# ---------------------------------------------------------------------------
# partial surgery and reverse engineering
# ---------------------------------------------------------------------------

@dataclass
class PartialSurgeryResult:
    """Series after filling one component; defined up to a unit.

    The transform produces a uniform fractional q-offset (r + 1/r)/4, which
    is stripped into ``unit_q_offset`` so the series lives back on the
    half-integer lattice.
    """

    series: MultiSeries
    unit_q_offset: Fraction
    surgered_variable: int


def partial_surgery(f, component: int, r: int, lk) -> PartialSurgeryResult:
    """-1/r filling of one unknotted component, keeping the others open.

    Applies (x0^{1/(2r)} - x0^{-1/(2r)}) and maps x0^u to
    q^{r u^2} prod_i x_i^{r lk_i u}; the surgered component's variable must
    carry a finite window.
    """
    series = _series_of(f)
    nv = series.nvars
    if r < 1:
        raise SurgeryError("partial surgery implemented for -1/r with r >= 1")
    if not (0 <= component < nv):
        raise SurgeryError("no such component")
    if series.x_windows[component] is None:
        raise SurgeryError("window too small: surgered variable needs a finite window")
    if len(lk) != nv:
        raise SurgeryError("need one linking number per variable (0 for the filled one)")
    offset = Fraction(r, 4) + Fraction(1, 4 * r)
    out: dict = {}
    for (q2, xs), c in series.terms.items():
        for s, sgn in ((Fraction(1, 2 * r), 1), (Fraction(-1, 2 * r), -1)):
            u = Fraction(xs[component], 2) + s
            img = r * u * u - offset + Fraction(q2, 2)
            img2 = 2 * img
            if img2.denominator != 1:
                raise ArithmeticError("offset normalization failed")
            nxs = []
            for i in range(nv):
                if i == component:
                    continue
                shift2 = 2 * r * lk[i] * u  # doubled exponent shift, integer
                if Fraction(shift2).denominator != 1:
                    raise ArithmeticError("linking shift off the half lattice")
                nxs.append(xs[i] + int(shift2))
            key = (int(img2), tuple(nxs))
            v = out.get(key, 0) + sgn * c
            if v == 0:
                out.pop(key, None)
            else:
                out[key] = v
    windows = [w for i, w in enumerate(series.x_windows) if i != component]
    # validity: unknown coefficients beyond the filled variable's window
    lo2, hi2 = series.x_windows[component]
    floor2 = min([0] + [q2 for q2, _ in series.terms])
    best = None
    for edge2, step in ((lo2 - 2, -1), (hi2 + 2, 1)):
        u = Fraction(edge2, 2) + Fraction(1, 2 * r) * (1 if step > 0 else -1)
        cand = r * u * u - offset + Fraction(floor2, 2)
        best = cand if best is None else min(best, cand)
    qv2 = int(2 * best) if best is not None else None
    if series.q_valid2 is not None:
        inner = min((r * (Fraction(xs[component], 2) - Fraction(1, 2 * r)) ** 2
                     for _, xs in series.terms), default=Fraction(0))
        cand2 = int(2 * (inner - offset)) + series.q_valid2
        qv2 = cand2 if qv2 is None else min(qv2, cand2)
    return PartialSurgeryResult(MultiSeries(nv - 1, out, windows, qv2),
                                offset, component)


def required_filling_r(i_max: int, row_halfwidth: int = None) -> int:
    """Least r whose -1/r filling separates blocks up to i_max.

    The i-th block's content spans about 2i + 3 exponents (rows reach
    q^{+-(i+1)}), and consecutive blocks are 2r(i+1) apart, so r = 2 already
    resolves every i >= 0 with a margin of one; wider rows need larger r.
    """
    hw = row_halfwidth if row_halfwidth is not None else 1
    r = 1
    while any(2 * r * (i + 1) < (2 * i + 2 * hw + 2) for i in range(i_max + 1)):
        r += 1
    return r


def reverse_engineer(family, i_max: int, j_max: int, q_order: int,
                     r_pair=(2, 1)) -> MultiSeries:
    """Recover a two-component link series from its -1/r fillings.

    ``family(r)`` must return the filled knot's positive expansion (an
    FKResult or BiSeries).  The first element of ``r_pair`` drives the
    block-resolved recovery: filling spreads the coefficient of x^{i+1/2}
    into the q-block around r*i*(i+1) with the two branches q^{+-(i+1/2)},
    so each row coefficient is read off by an ascending division by
    (1 - q^{2i+1}) inside its block.  The array is then verified by
    forward-filling against the second family member; a mismatch raises
    SurgeryError("inconsistent family").  The global unit is not
    recoverable, so the output is normalized to leading coefficient +1.
    """
    r0, r1 = r_pair
    if r0 == r1:
        raise SurgeryError("need two distinct r values")
    if r0 < required_filling_r(i_max):
        raise SurgeryError("insufficient r range: r=%d cannot separate blocks "
                           "through i=%d" % (r0, i_max))
    src = family(r0)
    series = _series_of(src)
    qv2 = series.q_valid2 if series.q_valid2 is not None else 2 * q_order + 1
    cv = _coeff_valid_map(src)

    def anchor(i):
        # lower block edge with padding for the rows' negative exponents
        return r0 * i * (i + 1) - i - (i + 2)

    # global alignment: the row-0 block of f_{0, j} sits at exponent
    # B_0- = 0 up to one unit; read it off the j = 0 column's lowest term
    col0 = {q2: c for (q2, x2), c in series.terms.items() if x2 == 1}
    if not col0:
        raise SurgeryError("empty window: family member has no first row")
    dhat2 = min(col0)  # doubled exponent of the lowest term, = 2(d + mindeg f00)

    recovered: dict = {}
    min_validity2 = None
    for j in range(j_max + 1):
        col = {}
        for (q2, x2), c in series.terms.items():
            if x2 == 2 * j + 1:
                e2 = q2 - dhat2
                if e2 % 2:
                    raise SurgeryError("family member off the expected lattice")
                col[e2 // 2] = c
        colv = ((cv.get(2 * j + 1, qv2) if cv else qv2) - dhat2) // 2
        for i in range(i_max + 1):
            a = anchor(i)
            a_next = anchor(i + 1)
            width = min(a_next, colv) - a
            pad = i + 2
            if width <= pad + 1:
                raise SurgeryError(
                    "insufficient r range: block %d unresolved at this order" % i)
            # block = -q^{pad} (1 - q^{2i+1}) f_ij  restricted to the window
            h = {}
            for t in range(width):
                v = -col.get(a + t, 0)
                if t - (2 * i + 1) >= 0:
                    v += h.get(t - (2 * i + 1), 0)
                if v:
                    h[t] = v
            fij = {t - pad: v for t, v in h.items()}
            # strip both branches of this block from the column, everywhere
            base_m = r0 * i * (i + 1) - i
            base_p = r0 * i * (i + 1) + i + 1
            for t, v in fij.items():
                for ee, sgn in ((base_m + t, -1), (base_p + t, 1)):
                    nv2 = col.get(ee, 0) - sgn * v
                    if nv2 == 0:
                        col.pop(ee, None)
                    else:
                        col[ee] = nv2
            fv2 = 2 * (width - pad)  # certified doubled order of this row
            min_validity2 = fv2 if min_validity2 is None else min(min_validity2, fv2)
            for t, v in fij.items():
                recovered[(2 * t, (2 * i, 2 * j))] = v
        bad = [e for e, c in col.items() if c and e < min(anchor(i_max + 1), colv)]
        if bad:
            raise SurgeryError("inconsistent family: residue at %s in row %d"
                               % (sorted(bad)[:3], j))
    w = MultiSeries(2, recovered,
                    [(0, 2 * i_max), (0, 2 * j_max)], min_validity2)
    w = _normalize_lowest(w)
    _forward_check(w, r1, _series_of(family(r1)), q_order)
    return w


def _normalize_lowest(w: MultiSeries) -> MultiSeries:
    if not w.terms:
        return w
    key = min(w.terms, key=lambda k: (k[0], k[1]))
    c = w.terms[key]
    if c == 1:
        return w
    if c == -1:
        return MultiSeries(w.nvars, {k: -v for k, v in w.terms.items()},
                           w.x_windows, w.q_valid2)
    raise SurgeryError("cannot normalize: lowest coefficient %s is not a unit" % c)


def _forward_check(w: MultiSeries, r: int, target: BiSeries, q_order: int):
    """Fill the first variable of w by -1/r and compare with the target."""
    # lift the coefficient array to the link series' half-integer lattice
    lifted = {}
    for (q2, xs), c in w.terms.items():
        lifted[(q2, (xs[0] + 1, xs[1] + 1))] = c
    ms = MultiSeries(2, lifted,
                     [(w.x_windows[0][0] + 1, w.x_windows[0][1] + 1),
                      (w.x_windows[1][0] + 1, w.x_windows[1][1] + 1)],
                     w.q_valid2)
    filled = partial_surgery(ms, component=0, r=r, lk=[0, 0])
    got = filled.series.rename_to_bi()
    window = got.x_window
    if target.x_window is not None and window is not None:
        window = (max(window[0], target.x_window[0]),
                  min(window[1], target.x_window[1]))
    qcap = min(v for v in (got.q_valid2, target.q_valid2, 2 * q_order + 1)
               if v is not None)
    if _unit_match(got, target, window, qcap) is None:
        raise SurgeryError("inconsistent family: filled series does not match "
                           "the r=%d member up to a unit" % r)


def _unit_match(a: BiSeries, b: BiSeries, window, qcap2):
    """Check a == eps q^d b on the window below qcap2; None if impossible."""
    def restrict(s, shift2=0):
        return {(q2 + shift2, x2): c for (q2, x2), c in s.terms.items()
                if (window is None or window[0] <= x2 <= window[1])}
    at = restrict(a)
    bt = restrict(b)
    at = {k: c for k, c in at.items() if k[0] < qcap2}
    if not at or not bt:
        return None
    ka = min(at, key=lambda k: (k[1], k[0]))
    kb = min(bt, key=lambda k: (k[1], k[0]))
    if ka[1] != kb[1]:
        return None
    d2 = ka[0] - kb[0]
    ca, cb = at[ka], bt[kb]
    if abs(ca) != abs(cb):
        return None
    eps = 1 if ca == cb else -1
    bshift = {(q2 + d2, x2): eps * c for (q2, x2), c in bt.items()}
    keys = {k for k in at} | {k for k in bshift if k[0] < qcap2}
    for k in keys:
        if at.get(k, 0) != bshift.get(k, 0):
            return None
    return (eps, Fraction(d2, 2))
