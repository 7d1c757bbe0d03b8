"""Exterior algebra over F2 on torsor coordinates, with a formal {2}.

Elements live in F2[s]/(s^2) tensor Lambda(t_1, ..., t_k): s stands for
the symbol {2}, the t_i for the square classes attached to the frame
generator at each coordinate position.  {-1} = 0 throughout (the base
field has -1 a square), which forces {a}{a} = 0 and s^2 = 0; both are
baked into the monomial representation, so the relations cannot be
violated by construction.

A monomial is (var_mask, two_flag): a subset of coordinate slots plus at
most one factor s.  Sums are term sets with XOR semantics.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, NamedTuple, Optional, Sequence

from .errors import ContextMismatchError

__all__ = [
    "Monomial",
    "KInvariant",
    "CoordinateMap",
    "XIndex",
    "BnContext",
    "kinv",
    "zero",
    "one",
    "two",
    "var",
    "x_monomial",
    "x_basis",
    "lambda_indices",
    "substitute",
    "linear_independence",
    "stacked_independence",
    "IndependenceResult",
    "orbit_sums",
    "degree_part",
    "parse_terms",
]


class Monomial(NamedTuple):
    var_mask: int
    two_flag: bool

    @property
    def degree(self) -> int:
        return self.var_mask.bit_count() + (1 if self.two_flag else 0)


_ONE = Monomial(0, False)
_S = Monomial(0, True)


@dataclass(frozen=True)
class KInvariant:
    """An F2 sum of monomials over a fixed tuple of coordinate labels."""

    labels: tuple[str, ...]
    terms: frozenset[Monomial]

    def __post_init__(self) -> None:
        limit = 1 << len(self.labels)
        for m in self.terms:
            if m.var_mask >= limit or m.var_mask < 0:
                raise ValueError("monomial references a coordinate outside the context")

    def _check_context(self, other: "KInvariant") -> None:
        if self.labels != other.labels:
            raise ContextMismatchError(
                f"coordinate contexts differ: {self.labels} vs {other.labels}"
            )

    def __add__(self, other: "KInvariant") -> "KInvariant":
        self._check_context(other)
        return KInvariant(self.labels, self.terms ^ other.terms)

    # subtraction is addition in characteristic 2; kept for readability
    # when transcribing formulas stated with minus signs
    __sub__ = __add__

    def __mul__(self, other: "KInvariant") -> "KInvariant":
        self._check_context(other)
        acc: set[Monomial] = set()
        for m1 in self.terms:
            for m2 in other.terms:
                if m1.var_mask & m2.var_mask:
                    continue  # t_i^2 = 0
                if m1.two_flag and m2.two_flag:
                    continue  # s^2 = 0
                prod = Monomial(m1.var_mask | m2.var_mask, m1.two_flag or m2.two_flag)
                acc.symmetric_difference_update((prod,))
        return KInvariant(self.labels, frozenset(acc))

    def is_zero(self) -> bool:
        return not self.terms

    def degree_part(self, d: int) -> "KInvariant":
        return KInvariant(
            self.labels, frozenset(m for m in self.terms if m.degree == d)
        )

    def max_degree(self) -> int:
        return max((m.degree for m in self.terms), default=0)

    def mod_s(self) -> "KInvariant":
        """Image in the quotient by (s): drop every term carrying {2}."""
        return KInvariant(
            self.labels, frozenset(m for m in self.terms if not m.two_flag)
        )

    def sorted_terms(self) -> list[Monomial]:
        return sorted(self.terms, key=lambda m: (m.degree, m.two_flag, m.var_mask))

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in self.sorted_terms():
            if m == _ONE:
                parts.append("1")
                continue
            text = "{2}" if m.two_flag else ""
            for i, name in enumerate(self.labels):
                if (m.var_mask >> i) & 1:
                    text += "{" + name + "}"
            parts.append(text)
        return " + ".join(parts)

    def to_json(self) -> list[dict]:
        out = []
        for m in self.sorted_terms():
            names = [
                name for i, name in enumerate(self.labels) if (m.var_mask >> i) & 1
            ]
            out.append({"vars": names, "two": m.two_flag})
        return out


def kinv(labels: Sequence[str], terms: Iterable[Monomial] = ()) -> KInvariant:
    acc: set[Monomial] = set()
    for m in terms:
        acc.symmetric_difference_update((m,))
    return KInvariant(tuple(labels), frozenset(acc))


def zero(labels: Sequence[str]) -> KInvariant:
    return KInvariant(tuple(labels), frozenset())


def one(labels: Sequence[str]) -> KInvariant:
    return KInvariant(tuple(labels), frozenset((_ONE,)))


def two(labels: Sequence[str]) -> KInvariant:
    """The symbol {2}."""
    return KInvariant(tuple(labels), frozenset((_S,)))


def var(labels: Sequence[str], name: str) -> KInvariant:
    """The degree-1 symbol of one coordinate, looked up by label."""
    idx = list(labels).index(name)
    return KInvariant(tuple(labels), frozenset((Monomial(1 << idx, False),)))


def x_monomial(labels: Sequence[str], names: Iterable[str], two_flag: bool = False) -> KInvariant:
    mask = 0
    labels = tuple(labels)
    for name in names:
        mask |= 1 << labels.index(name)
    return KInvariant(labels, frozenset((Monomial(mask, two_flag),)))


def parse_terms(labels: Sequence[str], text: str) -> KInvariant:
    """Inverse of render for test fixtures: "{2}{a1}{b2} + {e3}" etc."""
    labels = tuple(labels)
    result = zero(labels)
    for part in text.split("+"):
        part = part.strip()
        if part == "0":
            continue
        if part == "1":
            result = result + one(labels)
            continue
        names = [p for p in part.replace("}", "").split("{") if p]
        flag = "2" in names
        names = [p for p in names if p != "2"]
        result = result + x_monomial(labels, names, flag)
    return result


# ---------------------------------------------------------------------------
# the B_n index bookkeeping


@dataclass(frozen=True)
class XIndex:
    """Index tuple (A, B, C, E) of the reindexed restriction basis.

    A, B, C are pairwise disjoint subsets of the pair slots [1; L]; E is
    a subset of the tail slots [2L+1; n].  The monomial it names has
    degree |A| + |B| + 2|C| + |E|.
    """

    A: frozenset[int]
    B: frozenset[int]
    C: frozenset[int]
    E: frozenset[int]

    @property
    def degree(self) -> int:
        return len(self.A) + len(self.B) + 2 * len(self.C) + len(self.E)

    def validate(self, L: int, n: int) -> None:
        if (self.A & self.B) or (self.A & self.C) or (self.B & self.C):
            raise ValueError("A, B, C must be pairwise disjoint")
        pairs = set(range(1, L + 1))
        if not (self.A <= pairs and self.B <= pairs and self.C <= pairs):
            raise ValueError(f"pair indices must lie in [1; {L}]")
        tail = set(range(2 * L + 1, n + 1))
        if not self.E <= tail:
            raise ValueError(f"tail indices must lie in [{2 * L + 1}; {n}]")


@dataclass(frozen=True)
class BnContext:
    """Coordinate context of the frame X_L inside B_n (or its D_n/A_n cuts).

    Label layout: a1, b1, ..., aL, bL, then e_{2L+1}, ..., e_n; the
    position of e_j is j - 1, which keeps tail masks independent of L.
    """

    L: int
    n: int

    @property
    def labels(self) -> tuple[str, ...]:
        out = []
        for i in range(1, self.L + 1):
            out += [f"a{i}", f"b{i}"]
        out += [f"e{j}" for j in range(2 * self.L + 1, self.n + 1)]
        return tuple(out)

    def a_pos(self, i: int) -> int:
        return 2 * (i - 1)

    def b_pos(self, i: int) -> int:
        return 2 * (i - 1) + 1

    def e_pos(self, j: int) -> int:
        return j - 1


def x_basis(idx: XIndex, ctx: BnContext) -> KInvariant:
    """The monomial x_{A,B,C,E} in the context's coordinates."""
    idx.validate(ctx.L, ctx.n)
    mask = 0
    for a in idx.A:
        mask |= 1 << ctx.a_pos(a)
    for b in idx.B:
        mask |= 1 << ctx.b_pos(b)
    for c in idx.C:
        mask |= (1 << ctx.a_pos(c)) | (1 << ctx.b_pos(c))
    for e in idx.E:
        mask |= 1 << ctx.e_pos(e)
    return KInvariant(ctx.labels, frozenset((Monomial(mask, False),)))


def lambda_indices(L: int, n: int, d: int) -> tuple[XIndex, ...]:
    """All of Lambda^d_L, deterministically ordered."""
    pairs = list(range(1, L + 1))
    tail = list(range(2 * L + 1, n + 1))
    out = []
    # assign each pair slot one of: unused, A, B, C
    for assignment in _assignments(pairs):
        A, B, C = assignment
        base = len(A) + len(B) + 2 * len(C)
        if base > d:
            continue
        for E in combinations(tail, d - base):
            out.append(
                XIndex(frozenset(A), frozenset(B), frozenset(C), frozenset(E))
            )
    out.sort(key=lambda i: (sorted(i.A), sorted(i.B), sorted(i.C), sorted(i.E)))
    return tuple(out)


def _assignments(pairs: list[int]):
    if not pairs:
        yield ([], [], [])
        return
    head, rest = pairs[0], pairs[1:]
    for A, B, C in _assignments(rest):
        yield (A, B, C)
        yield ([head] + A, B, C)
        yield (A, [head] + B, C)
        yield (A, B, [head] + C)


# ---------------------------------------------------------------------------
# substitution


@dataclass(frozen=True)
class CoordinateMap:
    """F2-linear map on degree-1 symbols, with optional {2} offsets.

    rows[i] = (target_mask, s_flag): the source coordinate i maps to the
    sum of the masked target coordinates, plus {2} when s_flag is set.
    """

    source_labels: tuple[str, ...]
    target_labels: tuple[str, ...]
    rows: tuple[tuple[int, bool], ...]

    def __post_init__(self) -> None:
        if len(self.rows) != len(self.source_labels):
            raise ValueError("one row per source coordinate required")
        limit = 1 << len(self.target_labels)
        for mask, _ in self.rows:
            if mask >= limit or mask < 0:
                raise ValueError("row references a coordinate outside the target")

    @staticmethod
    def identity(labels: Sequence[str]) -> "CoordinateMap":
        labels = tuple(labels)
        return CoordinateMap(
            labels, labels, tuple((1 << i, False) for i in range(len(labels)))
        )

    @staticmethod
    def from_permutation(
        labels: Sequence[str], position_images: Sequence[int]
    ) -> "CoordinateMap":
        """Relabeling map t_p -> t_{position_images[p]} (same label set)."""
        labels = tuple(labels)
        return CoordinateMap(
            labels,
            labels,
            tuple((1 << position_images[p], False) for p in range(len(labels))),
        )

    def then(self, other: "CoordinateMap") -> "CoordinateMap":
        """Composite source --self--> mid --other--> target."""
        if self.target_labels != other.source_labels:
            raise ContextMismatchError("maps do not chain: label mismatch")
        rows = []
        for mask, flag in self.rows:
            out_mask, out_flag = 0, flag
            for j in range(mask.bit_length()):
                if (mask >> j) & 1:
                    m2, f2 = other.rows[j]
                    out_mask ^= m2
                    out_flag ^= f2
            rows.append((out_mask, out_flag))
        return CoordinateMap(self.source_labels, other.target_labels, tuple(rows))

    def apply(self, inv: KInvariant) -> KInvariant:
        if inv.labels != self.source_labels:
            raise ContextMismatchError(
                f"invariant context {inv.labels} does not match map source"
            )
        acc: set[Monomial] = set()
        for m in inv.terms:
            expanded = {Monomial(0, m.two_flag)}
            v = m.var_mask
            while v:
                i = (v & -v).bit_length() - 1
                v &= v - 1
                row_mask, row_flag = self.rows[i]
                nxt: set[Monomial] = set()
                for cur in expanded:
                    t = row_mask
                    while t:
                        j = (t & -t).bit_length() - 1
                        t &= t - 1
                        if (cur.var_mask >> j) & 1:
                            continue
                        nxt.symmetric_difference_update(
                            (Monomial(cur.var_mask | (1 << j), cur.two_flag),)
                        )
                    if row_flag and not cur.two_flag:
                        nxt.symmetric_difference_update(
                            (Monomial(cur.var_mask, True),)
                        )
                expanded = nxt
            acc.symmetric_difference_update(expanded)
        return KInvariant(self.target_labels, frozenset(acc))


def substitute(inv: KInvariant, cmap: CoordinateMap) -> KInvariant:
    return cmap.apply(inv)


# ---------------------------------------------------------------------------
# independence


@dataclass(frozen=True)
class IndependenceResult:
    independent: bool
    rank: int
    # non-trivial combination of input indices summing to 0 mod s, when dependent
    dependency: Optional[tuple[int, ...]] = None


def _rank_certificate(vectors: list[int]) -> IndependenceResult:
    """F2 Gaussian elimination with row tracking.

    Each vector is an int bitset.  The tracked combination recovers an
    explicit dependency when one exists.
    """
    rows = []  # (vector, combination-bitset over input indices)
    for i, v in enumerate(vectors):
        comb = 1 << i
        cur = v
        for rv, rc in rows:
            low = rv & -rv
            if cur & low:
                cur ^= rv
                comb ^= rc
        if cur == 0:
            deps = tuple(j for j in range(len(vectors)) if (comb >> j) & 1)
            return IndependenceResult(False, len(rows), deps)
        rows.append((cur, comb))
        rows.sort(key=lambda t: t[0] & -t[0])
    return IndependenceResult(True, len(rows), None)


def linear_independence(vs: Sequence[KInvariant]) -> IndependenceResult:
    """Independence of the s-reductions over F2.

    Independence mod s implies independence over F2[s]/(s^2): if some
    non-trivial combination Sum (c_i + d_i s) v_i = 0 with not all c_i
    zero, reducing mod s gives a dependency; if all c_i = 0, dividing by
    s (s annihilates only s-multiples) gives Sum d_i (v_i mod s) = 0, a
    dependency again.  So mod-s rank is conclusive for verdicts of
    independence; a mod-s dependency is reported with its combination.
    """
    if not vs:
        return IndependenceResult(True, 0, None)
    labels = vs[0].labels
    for v in vs[1:]:
        if v.labels != labels:
            raise ContextMismatchError("independence needs a common context")
    vectors = []
    for v in vs:
        bits = 0
        for m in v.mod_s().terms:
            bits |= 1 << m.var_mask
        vectors.append(bits)
    return _rank_certificate(vectors)


def stacked_independence(
    rows: Sequence[Sequence[KInvariant]],
) -> IndependenceResult:
    """Independence of tuples of invariants over several contexts.

    Row j is (v_{j,1}, ..., v_{j,r}) with column c in a fixed context;
    this is the direct-sum vector used when stacking restrictions over
    several frames.  Reduction mod s and F2 rank as above.
    """
    if not rows:
        return IndependenceResult(True, 0, None)
    ncols = len(rows[0])
    for row in rows:
        if len(row) != ncols:
            raise ValueError("rows have differing column counts")
        for c in range(ncols):
            if row[c].labels != rows[0][c].labels:
                raise ContextMismatchError(f"column {c} contexts differ")
    # assign one bit per (column, var_mask) pair
    key_bits: dict[tuple[int, int], int] = {}
    vectors = []
    for row in rows:
        bits = 0
        for c, v in enumerate(row):
            for m in v.mod_s().terms:
                key = (c, m.var_mask)
                if key not in key_bits:
                    key_bits[key] = len(key_bits)
                bits |= 1 << key_bits[key]
        vectors.append(bits)
    return _rank_certificate(vectors)


# ---------------------------------------------------------------------------
# orbit sums


def orbit_sums(
    monomials: Iterable[Monomial],
    position_perms: Sequence[Sequence[int]],
    labels: Sequence[str],
) -> list[KInvariant]:
    """One invariant per orbit of the coordinate action on a monomial set.

    The permutations must map the given monomial set to itself (checked);
    the orbit sums then span the subspace of invariant combinations
    supported on that set.
    """
    labels = tuple(labels)
    pool = set(monomials)

    def act(m: Monomial, perm: Sequence[int]) -> Monomial:
        mask = 0
        v = m.var_mask
        while v:
            i = (v & -v).bit_length() - 1
            v &= v - 1
            mask |= 1 << perm[i]
        return Monomial(mask, m.two_flag)

    for m in pool:
        for perm in position_perms:
            if act(m, perm) not in pool:
                raise ValueError(
                    "the permutations do not preserve the monomial set"
                )
    out = []
    remaining = set(pool)
    for m in sorted(pool, key=lambda t: (t.degree, t.var_mask, t.two_flag)):
        if m not in remaining:
            continue
        orbit = {m}
        frontier = [m]
        while frontier:
            nxt = []
            for cur in frontier:
                for perm in position_perms:
                    img = act(cur, perm)
                    if img not in orbit:
                        orbit.add(img)
                        nxt.append(img)
            frontier = nxt
        remaining -= orbit
        out.append(KInvariant(labels, frozenset(orbit)))
    return out


def degree_part(inv: KInvariant, d: int) -> KInvariant:
    return inv.degree_part(d)
