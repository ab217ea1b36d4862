"""Braid words, their closures, and the Burau/Alexander classical data.

Words are read bottom to top: ``[1, 2]`` means the crossing of strands 1,2
at the bottom of the diagram and the crossing of strands 2,3 above it.
Letter ``k > 0`` is the positive generator on strands (k, k+1), ``k < 0``
its inverse.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import BiSeries, ValidityError


class BraidError(ValueError):
    pass


@dataclass(frozen=True)
class BraidWord:
    strands: int
    letters: tuple

    def __post_init__(self):
        if self.strands < 1:
            raise BraidError("need at least one strand")
        for k in self.letters:
            if k == 0 or abs(k) >= self.strands:
                raise BraidError(f"letter {k} invalid on {self.strands} strands")
        object.__setattr__(self, "letters", tuple(self.letters))

    def writhe(self) -> int:
        return sum(1 if k > 0 else -1 for k in self.letters)

    def is_positive(self) -> bool:
        return all(k > 0 for k in self.letters)

    def permutation(self):
        """Image in S_N as a tuple: strand i at the bottom exits at perm[i]."""
        perm = list(range(self.strands))
        for k in self.letters:
            i = abs(k) - 1
            perm[i], perm[i + 1] = perm[i + 1], perm[i]
        # perm as built maps positions: invert the bookkeeping so that
        # result[i] = top position of the strand entering at bottom i
        out = [0] * self.strands
        for pos, strand in enumerate(perm):
            out[strand] = pos
        return tuple(out)

    def conjugated(self, shift: int) -> "BraidWord":
        """Cyclic rotation of the word (conjugation of the closure)."""
        n = len(self.letters)
        if n == 0:
            return self
        s = shift % n
        return BraidWord(self.strands, self.letters[s:] + self.letters[:s])

    def stabilized(self, sign: int = 1) -> "BraidWord":
        """Markov stabilization: embed in N+1 strands, append sigma_N^{+-1}."""
        return BraidWord(self.strands + 1, self.letters + (sign * self.strands,))

    def mirror(self) -> "BraidWord":
        return BraidWord(self.strands, tuple(-k for k in self.letters))

    def text(self) -> str:
        return ",".join(str(k) for k in self.letters) if self.letters else ""


_TOKEN = re.compile(r"^(-?\d+)(?:\^(\d+))?$")


def parse(text: str, strands: int) -> BraidWord:
    """Parse a comma- or space-separated braid word, with caret powers.

    ``"1^3,-2"`` on 3 strands gives letters (1, 1, 1, -2).
    """
    letters = []
    toks = [t for t in re.split(r"[,\s]+", text.strip()) if t]
    for tok in toks:
        m = _TOKEN.match(tok)
        if not m:
            raise BraidError(f"malformed braid token: {tok!r}")
        k = int(m.group(1))
        power = int(m.group(2)) if m.group(2) else 1
        if k == 0:
            raise BraidError("0 is not a braid generator")
        if abs(k) >= strands:
            raise BraidError(f"generator {k} needs more than {strands} strands")
        letters.extend([k] * power)
    return BraidWord(strands, tuple(letters))


@dataclass
class LinkClosure:
    components: int
    component_of_strand: dict
    pairwise_linking: list

    def to_json(self):
        n = len(self.component_of_strand)
        return {
            "components": self.components,
            "component_of_strand": [self.component_of_strand[i] for i in range(n)],
            "pairwise_linking": [list(row) for row in self.pairwise_linking],
        }


def closure_info(b: BraidWord) -> LinkClosure:
    """Component structure and linking numbers of the braid closure."""
    perm = b.permutation()
    comp_of = {}
    comp = 0
    for start in range(b.strands):
        if start in comp_of:
            continue
        s = start
        while s not in comp_of:
            comp_of[s] = comp
            s = perm[s]
        comp += 1
    # linking number = half the signed count of inter-component crossings
    twice_lk = [[0] * comp for _ in range(comp)]
    pos = list(range(b.strands))  # strand occupying each position
    inv = list(range(b.strands))
    for k in b.letters:
        i = abs(k) - 1
        sa, sb = inv[i], inv[i + 1]
        ca, cb = comp_of[sa], comp_of[sb]
        if ca != cb:
            s = 1 if k > 0 else -1
            twice_lk[ca][cb] += s
            twice_lk[cb][ca] += s
        inv[i], inv[i + 1] = inv[i + 1], inv[i]
    lk = [[Fraction(v, 2) for v in row] for row in twice_lk]
    lk = [[int(v) if v.denominator == 1 else v for v in row] for row in lk]
    return LinkClosure(comp, comp_of, lk)


def is_knot(b: BraidWord) -> bool:
    return closure_info(b).components == 1


# ---------------------------------------------------------------------------
# Burau representation and the Alexander polynomial
# ---------------------------------------------------------------------------

def _x(e2, c=1):
    return BiSeries.monomial(c, q2=0, x2=e2)


# generator block in the weight-one basis and its exact inverse
_BLOCK = (
    (_x(0) - _x(-2), _x(-1)),
    (_x(-1), BiSeries.zero()),
)
_BLOCK_INV = (
    (BiSeries.zero(), _x(1)),
    (_x(1), _x(0) - _x(2)),
)


def _mat_identity(n):
    return [[BiSeries.one() if i == j else BiSeries.zero() for j in range(n)] for i in range(n)]


def _mat_mul(a, b):
    n = len(a)
    out = [[BiSeries.zero()] * n for _ in range(n)]
    for i in range(n):
        for k in range(n):
            if a[i][k].is_zero():
                continue
            row = b[k]
            for j in range(n):
                if not row[j].is_zero():
                    out[i][j] = out[i][j] + a[i][k] * row[j]
    return out


def burau(b: BraidWord):
    """Unreduced Burau matrix of the word, entries Laurent in x^{1/2}.

    The product is taken bottom to top, so the matrix of ``uv`` is
    ``M(v) M(u)`` acting on column vectors of strand labels.
    """
    n = b.strands
    m = _mat_identity(n)
    for k in b.letters:
        i = abs(k) - 1
        block = _BLOCK if k > 0 else _BLOCK_INV
        g = _mat_identity(n)
        g[i][i] = block[0][0]
        g[i][i + 1] = block[0][1]
        g[i + 1][i] = block[1][0]
        g[i + 1][i + 1] = block[1][1]
        m = _mat_mul(g, m)
    return m


def _det(mat):
    n = len(mat)
    if n == 0:
        return BiSeries.one()
    if n == 1:
        return mat[0][0]
    out = BiSeries.zero()
    for j in range(n):
        if mat[0][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in mat[1:]]
        term = mat[0][j] * _det(minor)
        out = out + (term if j % 2 == 0 else -term)
    return out


def alexander(b: BraidWord) -> BiSeries:
    """Alexander polynomial of the braid closure, normalized.

    Computed as x^{-(N-1-w)/2} det(I - B') where B' is the Burau submatrix
    on strands 2..N; the result is then symmetrized in x -> 1/x and scaled
    to Delta(1) = 1 (the formula fixes Delta only up to a unit).
    """
    info = closure_info(b)
    if info.components != 1:
        raise BraidError("not a knot: closure has %d components" % info.components)
    n = b.strands
    m = burau(b)
    sub = [[m[i][j] for j in range(1, n)] for i in range(1, n)]
    eye = _mat_identity(n - 1)
    diff = [[eye[i][j] - sub[i][j] for j in range(n - 1)] for i in range(n - 1)]
    d = _det(diff)
    pref2 = -(n - 1 - b.writhe())  # doubled exponent of the x-prefactor
    d = d * BiSeries.monomial(1, q2=0, x2=pref2)
    # normalize: recenter so Delta(x) = Delta(1/x), then sign-fix Delta(1)=1
    if d.is_zero():
        raise BraidError("degenerate Alexander determinant")
    xs = sorted(x2 for _, x2 in d.terms)
    center = xs[0] + xs[-1]
    if center % 2 != 0:
        raise BraidError("Alexander support cannot be symmetrized")
    d = d * BiSeries.monomial(1, q2=0, x2=-center // 2)
    at_one = sum(d.terms.values())
    if at_one == 0:
        raise BraidError("Alexander polynomial vanishes at 1")
    if at_one < 0:
        d = -d
        at_one = -at_one
    if at_one != 1:
        raise BraidError("Alexander normalization failed: Delta(1) = %s" % at_one)
    sym = d.sub_x_inv()
    if sym.terms != d.terms:
        raise BraidError("Alexander polynomial not symmetric; check the word")
    return d
