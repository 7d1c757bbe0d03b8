"""Torsor-parameterized quadratic forms and their symbol-algebra images.

Two routes from an embedding of (Z/2)^k into an orthogonal group to a
diagonal form over the torsor coordinates:

 * linear route: simultaneous exact eigenspace splitting of the
   commuting involution matrices; each twisted basis vector contributes
   one diagonal entry 2^a * (product of coordinates where the character
   is -1).
 * permutation route: the action on a finite point set decomposes into
   orbits; each orbit of size 2^f is a scaled f-fold Pfister form whose
   slots are pullbacks of the dual basis of P/kernel.

Entries are square classes: only 2-power scales times coordinate
monomials occur for the embeddings treated here, and anything else
raises UnsupportedEmbeddingError instead of approximating.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .algebra import KInvariant, Monomial, kinv, one, zero
from .errors import CertificateError, UnsupportedEmbeddingError

__all__ = [
    "DiagonalForm",
    "OrbitPfister",
    "OrbitPfisterDecomp",
    "form_of_involutions",
    "form_of_linear_action",
    "reflection_matrix",
    "form_of_permutation_action",
    "expand_to_diagonal",
    "total_sw",
    "sw_class",
    "twist_by_two",
    "modified_sw",
    "e_fold",
    "pfister_gram_check",
]


@dataclass(frozen=True)
class DiagonalForm:
    """<2^a * prod(coords), ...> over a fixed coordinate context."""

    labels: tuple[str, ...]
    entries: tuple[tuple[int, int], ...]  # (two_exponent, var_mask)

    def __post_init__(self) -> None:
        limit = 1 << len(self.labels)
        for a, mask in self.entries:
            if a < 0:
                raise ValueError("negative 2-exponent")
            if not 0 <= mask < limit:
                raise ValueError("entry references a coordinate outside the context")

    @property
    def dim(self) -> int:
        return len(self.entries)

    def concat(self, other: "DiagonalForm") -> "DiagonalForm":
        if other.labels != self.labels:
            raise ValueError("direct sum needs a common context")
        return DiagonalForm(self.labels, self.entries + other.entries)

    def render(self) -> str:
        parts = []
        for a, mask in self.entries:
            prefix = "" if a == 0 else "2" if a == 1 else f"2^{a}"
            names = "".join(
                name for i, name in enumerate(self.labels) if (mask >> i) & 1
            )
            text = prefix + names
            parts.append(text if text else "1")
        return "<" + ", ".join(parts) + ">"

    def to_json(self) -> list[dict]:
        out = []
        for a, mask in self.entries:
            names = [
                name for i, name in enumerate(self.labels) if (mask >> i) & 1
            ]
            out.append({"two_exponent": a, "vars": names})
        return out


# ---------------------------------------------------------------------------
# linear route


def _rref(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    rows = [list(r) for r in rows]
    basis: list[list[Fraction]] = []
    width = len(rows[0]) if rows else 0
    pivots = []
    for row in rows:
        for piv, b in zip(pivots, basis):
            if row[piv]:
                f = row[piv] / b[piv]
                row = [x - f * y for x, y in zip(row, b)]
        lead = next((i for i in range(width) if row[i]), None)
        if lead is None:
            continue
        basis.append(row)
        pivots.append(lead)
    order = sorted(range(len(basis)), key=lambda i: pivots[i])
    return [basis[i] for i in order]


def _mat_vec(m: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> list[Fraction]:
    return [sum(row[j] * v[j] for j in range(len(v))) for row in m]


def _square_free_two_part(x: Fraction) -> Optional[int]:
    """x = 2^a * square -> a mod 2; None when the odd square-free part != 1."""
    if x <= 0:
        return None
    n = x.numerator * x.denominator
    a = 0
    while n % 2 == 0:
        n //= 2
        a += 1
    # strip odd square factors
    f = 3
    while f * f <= n:
        while n % (f * f) == 0:
            n //= f * f
        f += 2
    if n != 1:
        return None
    return a % 2


def form_of_involutions(
    matrices: Sequence[Sequence[Sequence]],
    labels: Sequence[str],
) -> DiagonalForm:
    """Diagonal form of the torsor twist for commuting orthogonal involutions.

    The matrices act on the standard inner-product space.  A common
    eigenbasis is computed exactly; a vector u with character chi and
    squared norm 2^a * (square) yields the entry 2^a * prod_{i in chi} c_i.
    """
    k = len(matrices)
    if k != len(labels):
        raise ValueError("one label per generator required")
    mats = [
        [[Fraction(x) for x in row] for row in m] for m in matrices
    ]
    dim = len(mats[0]) if mats else 0
    ident = [[Fraction(int(i == j)) for j in range(dim)] for i in range(dim)]

    def mat_mul(a, b):
        return [
            [sum(a[i][t] * b[t][j] for t in range(dim)) for j in range(dim)]
            for i in range(dim)
        ]

    for m in mats:
        if len(m) != dim or any(len(row) != dim for row in m):
            raise ValueError("matrices must be square of equal size")
        if mat_mul(m, m) != ident:
            raise ValueError("generator is not an involution")
        mt = [[m[j][i] for j in range(dim)] for i in range(dim)]
        if mat_mul(mt, m) != ident:
            raise ValueError("generator is not orthogonal")
    for i in range(k):
        for j in range(i + 1, k):
            if mat_mul(mats[i], mats[j]) != mat_mul(mats[j], mats[i]):
                raise ValueError("generators do not commute")

    # split into simultaneous character spaces
    spaces: list[tuple[int, list[list[Fraction]]]] = [(0, [row[:] for row in ident])]
    for gi, m in enumerate(mats):
        nxt = []
        for chi, basis in spaces:
            plus, minus = [], []
            for v in basis:
                mv = _mat_vec(m, v)
                plus.append([x + y for x, y in zip(v, mv)])
                minus.append([x - y for x, y in zip(v, mv)])
            pb, mb = _rref(plus), _rref(minus)
            if pb:
                nxt.append((chi, pb))
            if mb:
                nxt.append((chi | (1 << gi), mb))
        spaces = nxt
    if sum(len(b) for _, b in spaces) != dim:
        raise AssertionError("character spaces do not fill the ambient space")

    entries = []
    for chi, basis in spaces:
        # unnormalized Gram-Schmidt inside the character space
        ortho: list[list[Fraction]] = []
        for v in basis:
            w = list(v)
            for u in ortho:
                uu = sum(x * x for x in u)
                uv = sum(x * y for x, y in zip(u, w))
                if uv:
                    w = [x - (uv / uu) * y for x, y in zip(w, u)]
            ortho.append(w)
        for u in ortho:
            norm = sum(x * x for x in u)
            a = _square_free_two_part(norm)
            if a is None:
                raise UnsupportedEmbeddingError(
                    f"eigenvector norm {norm} is not 2^a times a square"
                )
            entries.append((a, chi))
    entries.sort(key=lambda e: (e[1] == 0, e[1], e[0]))
    return DiagonalForm(tuple(labels), tuple(entries))


def reflection_matrix(sys_, root_idx: int) -> list[list[Fraction]]:
    """Exact ambient matrix of the reflection at a root."""
    d = sys_.roots[root_idx].doubled
    dd = sum(x * x for x in d)
    n = len(d)
    return [
        [
            Fraction(int(i == j)) - Fraction(2 * d[i] * d[j], dd)
            for j in range(n)
        ]
        for i in range(n)
    ]


def form_of_linear_action(
    sys_, frame_roots: Sequence[int], labels: Optional[Sequence[str]] = None
) -> DiagonalForm:
    """Diagonal form of a frame acting on the root system's ambient space."""
    from .groups import OrthogonalFrame, root_label

    if isinstance(frame_roots, OrthogonalFrame):
        frame_roots = frame_roots.root_indices
    if labels is None:
        labels = [root_label(sys_, r) for r in frame_roots]
    mats = [reflection_matrix(sys_, r) for r in frame_roots]
    return form_of_involutions(mats, labels)


# ---------------------------------------------------------------------------
# permutation route


@dataclass(frozen=True)
class OrbitPfister:
    fold: int
    delta_masks: tuple[int, ...]
    scale_exponent: int

    def __post_init__(self) -> None:
        if len(self.delta_masks) != self.fold:
            raise ValueError("need one delta per fold")


@dataclass(frozen=True)
class OrbitPfisterDecomp:
    labels: tuple[str, ...]
    orbits: tuple[OrbitPfister, ...]

    @property
    def ambient_dim(self) -> int:
        return sum(1 << o.fold for o in self.orbits)

    @property
    def min_fold(self) -> int:
        return min((o.fold for o in self.orbits), default=0)


def _f2_kernel_basis(vectors: list[int], width: int) -> list[int]:
    """Deterministic basis of {x : x . v = 0 for all v} in F2^width."""
    # row-reduce the constraint matrix, then back-substitute free variables
    rows = []
    for v in vectors:
        cur = v
        for r in rows:
            low = r & -r
            if cur & low:
                cur ^= r
        if cur:
            rows.append(cur)
            rows.sort(key=lambda r: r & -r)
    pivots = [(r & -r).bit_length() - 1 for r in rows]
    free = [i for i in range(width) if i not in pivots]
    basis = []
    for f in free:
        x = 1 << f
        # solve pivot coordinates; rows are in ascending pivot order, and
        # each row may involve free vars and later pivots, so sweep from
        # the highest pivot down
        for r, p in sorted(zip(rows, pivots), key=lambda t: -t[1]):
            if (r & x).bit_count() % 2:
                x ^= 1 << p
        basis.append(x)
    return sorted(basis)


def form_of_permutation_action(
    gens: Sequence[Sequence[int]], labels: Sequence[str]
) -> OrbitPfisterDecomp:
    """Orbit-by-orbit Pfister decomposition of a permutation embedding.

    gens[i] is the point-image tuple of the i-th frame generator.  Every
    orbit of the generated abelian 2-group has 2^f points on which the
    quotient by the kernel acts simply transitively; the delta masks are
    the kernel's annihilator basis.
    """
    k = len(gens)
    if k != len(labels):
        raise ValueError("one label per generator required")
    npts = len(gens[0]) if gens else 0
    for g in gens:
        if sorted(g) != list(range(npts)):
            raise ValueError("generator is not a permutation")
        if any(g[g[i]] != i for i in range(npts)):
            raise ValueError("generator is not an involution")
    for i in range(k):
        for j in range(i + 1, k):
            gi, gj = gens[i], gens[j]
            if any(gi[gj[p]] != gj[gi[p]] for p in range(npts)):
                raise ValueError("generators do not commute")

    seen = [False] * npts
    orbits = []
    for base in range(npts):
        if seen[base]:
            continue
        # image of each group element applied to base, keyed by exponent vector
        images = {0: base}
        frontier = [(0, base)]
        while frontier:
            vec, pt = frontier.pop()
            for i, g in enumerate(gens):
                nvec = vec ^ (1 << i)
                npt = g[pt]
                if nvec not in images:
                    images[nvec] = npt
                    frontier.append((nvec, npt))
        orbit_pts = set(images.values())
        for p in orbit_pts:
            seen[p] = True
        size = len(orbit_pts)
        fold = size.bit_length() - 1
        if 1 << fold != size:
            raise AssertionError(
                "orbit size is not a power of two; the action is not by a "
                "commuting involution family"
            )
        kernel = [v for v, pt in images.items() if pt == base]
        if len(kernel) != (1 << k) // size:
            # defensive: for a transitive abelian action every stabilizer
            # equals the kernel, so this cannot happen
            raise AssertionError("quotient action is not simply transitive")
        # kernel is a subspace; delta masks annihilate it
        deltas = _f2_kernel_basis(kernel, k)
        if len(deltas) != fold:
            raise AssertionError("annihilator dimension mismatch")
        orbits.append(
            OrbitPfister(
                fold=fold,
                delta_masks=tuple(deltas),
                scale_exponent=fold,
            )
        )
    return OrbitPfisterDecomp(tuple(labels), tuple(orbits))


def expand_to_diagonal(decomp: OrbitPfisterDecomp) -> DiagonalForm:
    """Multiply out every orbit's scaled Pfister factor.

    <<-d_1, ..., -d_f>> has diagonal entries prod_{j in S} d_j over all
    subsets S (signs vanish since {-1} = 0 and entries are square
    classes, which multiply by XOR of coordinate masks).
    """
    entries = []
    for o in decomp.orbits:
        for s in range(1 << o.fold):
            mask = 0
            for j in range(o.fold):
                if (s >> j) & 1:
                    mask ^= o.delta_masks[j]
            entries.append((o.scale_exponent, mask))
    return DiagonalForm(decomp.labels, tuple(entries))


# ---------------------------------------------------------------------------
# invariant images


def _entry_class(labels: tuple[str, ...], a: int, mask: int) -> KInvariant:
    terms = []
    if a % 2:
        terms.append(Monomial(0, True))
    v = mask
    while v:
        low = v & -v
        v ^= low
        terms.append(Monomial(low, False))
    return kinv(labels, terms)


def total_sw(form: DiagonalForm) -> KInvariant:
    """prod over entries of (1 + {entry})."""
    acc = one(form.labels)
    for a, mask in form.entries:
        acc = acc * (one(form.labels) + _entry_class(form.labels, a, mask))
    return acc


def sw_class(form: DiagonalForm, d: int) -> KInvariant:
    return total_sw(form).degree_part(d)


def twist_by_two(form: DiagonalForm) -> DiagonalForm:
    return DiagonalForm(
        form.labels, tuple((a + 1, mask) for a, mask in form.entries)
    )


def modified_sw(
    form: DiagonalForm, d: int, ambient_parity: Optional[int] = None
) -> KInvariant:
    """The d-th modified Stiefel-Whitney class of the form.

    Even ambient dimension: w_d of the <2>-twisted form.  Odd: the
    recursion starting at 1 that subtracts the {2}-multiple of the
    previous class at each step.  The parity defaults to the entry
    count; callers whose form sits in a larger ambient space than the
    listed entries pass the true parity explicitly.
    """
    parity = (form.dim if ambient_parity is None else ambient_parity) % 2
    twisted = total_sw(twist_by_two(form))
    if parity == 0:
        return twisted.degree_part(d)
    current = one(form.labels)
    s = kinv(form.labels, [Monomial(0, True)])
    for deg in range(1, d + 1):
        current = twisted.degree_part(deg) + s * current
    return current


def e_fold(decomp: OrbitPfisterDecomp, m: int) -> KInvariant:
    """e_m of the decomposition: fold-m orbits contribute their symbol products.

    Requires every fold >= m (the I^m membership certificate); orbits of
    larger fold lie in I^{m+1} and contribute nothing.  The 2-power
    scales are dropped: the graded Witt ring here is an F2 algebra and
    the <2^m> normalization of the defining invariants absorbs them.
    """
    if decomp.orbits and decomp.min_fold < m:
        raise CertificateError(
            f"decomposition has fold {decomp.min_fold} < {m}: not in I^{m}"
        )
    acc = zero(decomp.labels)
    for o in decomp.orbits:
        if o.fold != m:
            continue
        term = one(decomp.labels)
        for dmask in o.delta_masks:
            term = term * kinv(
                decomp.labels,
                [Monomial(1 << i, False) for i in range(dmask.bit_length()) if (dmask >> i) & 1],
            )
        acc = acc + term
    return acc


# ---------------------------------------------------------------------------
# the symbolic Gram check


def pfister_gram_check(n: int) -> bool:
    """Brute-force the 2^n-point embedding's Gram identities symbolically.

    Vectors v_p have entries (-1)^{|b(p) & b(l)|} prod_{i in b(p)} sqrt(e_i);
    the check confirms pairwise orthogonality and |v_p|^2 = 2^n prod e_i.
    Exponential in n, so capped at 4.
    """
    if not 0 <= n <= 4:
        raise ValueError("symbolic check is limited to n <= 4")
    size = 1 << n

    def bilinear(p: int, q: int) -> dict[tuple[int, ...], int]:
        out: dict[tuple[int, ...], int] = {}
        for ell in range(size):
            sign = (-1) ** (((p & ell).bit_count() + (q & ell).bit_count()) % 2)
            exps = tuple(
                ((p >> i) & 1) + ((q >> i) & 1) for i in range(n)
            )
            out[exps] = out.get(exps, 0) + sign
        return {k: v for k, v in out.items() if v}

    for p in range(size):
        for q in range(size):
            val = bilinear(p, q)
            if p != q:
                if val:
                    return False
            else:
                expected = {tuple(2 * ((p >> i) & 1) for i in range(n)): size}
                if val != expected:
                    return False
    return True
