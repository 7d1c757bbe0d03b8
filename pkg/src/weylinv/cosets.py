"""Coset spaces U\\W without enumerating W, and their fold certificates.

A coset Ug is keyed by the vector g^{-1}(v_U), where v_U is an integer
vector in the root lattice fixed by U and orthogonal to no root outside
the subsystem Sigma_U.  The stabiliser of a vector in a reflection group
is generated by the reflections fixing it, so that orthogonality
condition makes the stabiliser exactly U and the key map injective on
cosets.  This keeps E8 tractable: the 17280 cosets are found by BFS on
8-tuples of integers instead of walking 7 x 10^8 group elements.  The
order identity |orbit| x |U| = |W| is still re-checked at build time.

Frame actions on the cosets decompose into orbits whose sizes are powers
of two; the fold certificate records, per orbit, the generator subset
that acts simply transitively, which is exactly the datum needed to
place the associated form in a power of the fundamental ideal.
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .algebra import KInvariant
from .errors import (
    CacheFormatError,
    CapExceededError,
    CertificateError,
    CosetValidationError,
)
from .forms import OrbitPfister, OrbitPfisterDecomp, e_fold, form_of_permutation_action
from .groups import root_label, weyl_order
from .roots import RootSystem

__all__ = [
    "CosetSpace",
    "FoldCertificate",
    "CertOrbit",
    "standard_u_gens",
    "build_coset_space",
    "p_orbits",
    "full_check",
    "compare_support",
    "f_restriction",
    "cache_path",
    "clear_cache",
    "CACHE_FORMAT_VERSION",
]

CACHE_FORMAT_VERSION = 1
U_ELEMENT_CAP = 100_000

Key = tuple[int, ...]


@dataclass(frozen=True)
class CertOrbit:
    members: tuple[int, ...]
    a_set: tuple[int, ...]  # frame positions acting non-trivially
    fold: int
    delta_masks: tuple[int, ...]


@dataclass(frozen=True)
class FoldCertificate:
    frame_roots: tuple[int, ...]
    labels: tuple[str, ...]
    orbits: tuple[CertOrbit, ...]

    @property
    def min_fold(self) -> int:
        return min((o.fold for o in self.orbits), default=0)

    def fold_count(self, m: int) -> int:
        return sum(1 for o in self.orbits if o.fold == m)

    def decomp(self) -> OrbitPfisterDecomp:
        return OrbitPfisterDecomp(
            self.labels,
            tuple(
                OrbitPfister(o.fold, o.delta_masks, o.fold) for o in self.orbits
            ),
        )


@dataclass(frozen=True)
class CosetSpace:
    """U\\W as vector keys with per-simple-reflection action tables.

    representatives[i] is a doubled-coordinate integer tuple; they are
    sorted ascending, and the action tables are computed from that
    sorted order, so rebuilt and cached spaces agree byte for byte.
    """

    type_label: str
    rank: int
    u_gen_roots: tuple[tuple[int, ...], ...]  # doubled coordinates
    u_order: int
    representatives: tuple[Key, ...]
    action_tables: tuple[tuple[int, ...], ...]
    certificate: Optional[FoldCertificate] = None

    @property
    def size(self) -> int:
        return len(self.representatives)


def standard_u_gens(sys_: RootSystem) -> tuple[int, ...]:
    """The reflection subgroup used for the coset construction.

    D_n: the S_n of coordinate permutations.  E7/E8: the A-type
    subsystems spanned by e1+e2 and the tail of coordinate differences
    (for E7 the chain breaks at e6 and picks up e7-e8 separately).
    """
    label, n = sys_.type_label, sys_.rank
    ambient = len(sys_.roots[0].doubled)

    def idx(pos_a: int, val_a: int, pos_b: int, val_b: int) -> int:
        d = [0] * ambient
        d[pos_a] = val_a
        d[pos_b] = val_b
        return sys_.index[tuple(d)]

    if label == "D":
        return tuple(idx(i, 2, i + 1, -2) for i in range(n - 1))
    if label == "E" and n == 7:
        gens = [idx(0, 2, 1, 2)]
        gens += [idx(i, 2, i + 1, -2) for i in range(1, 5)]
        gens.append(idx(6, 2, 7, -2))
        return tuple(gens)
    if label == "E" and n == 8:
        gens = [idx(0, 2, 1, 2)]
        gens += [idx(i, 2, i + 1, -2) for i in range(1, 7)]
        return tuple(gens)
    raise ValueError(f"no standard coset subgroup recorded for {label}{n}")


def _closure_lines(sys_: RootSystem, gen_roots: Sequence[int]) -> list[int]:
    """Line positions of the reflection-closed subsystem Sigma_U."""
    from .roots import reflect

    roots = {sys_.roots[sys_.canonical_rep[g]] for g in gen_roots}
    frontier = list(roots)
    while frontier:
        nxt = []
        for r in list(roots):
            for s in frontier:
                img = reflect(r, s).sign_canonical()
                if img not in roots:
                    roots.add(img)
                    nxt.append(img)
        frontier = nxt
    positions = sorted(sys_.line_of[sys_.root_index(r)] for r in roots)
    return positions


def _enumerate_u_order(
    sys_: RootSystem, gen_roots: Sequence[int], domain_lines: list[int]
) -> int:
    """|U| by BFS on the subsystem's own roots (faithful restriction)."""
    domain = []
    for pos in domain_lines:
        r = sys_.lines[pos]
        domain.append(r)
        domain.append(sys_.negation[r])
    domain.sort()
    local = {r: i for i, r in enumerate(domain)}
    deg = len(domain)
    tables = []
    for g in gen_roots:
        images = sys_.reflection_images(g)
        tables.append(bytes(local[images[r]] for r in domain).ljust(256, b"\0"))
    identity = bytes(range(deg))
    seen = {identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for p in frontier:
            for t in tables:
                q = p.translate(t)
                if q not in seen:
                    if len(seen) >= U_ELEMENT_CAP:
                        raise CapExceededError(
                            "subgroup enumeration exceeded the cap", U_ELEMENT_CAP
                        )
                    seen.add(q)
                    nxt.append(q)
        frontier = nxt
    return len(seen)


def _reflector(sys_: RootSystem, root_idx: int) -> tuple[Key, int]:
    """(doubled root, squared length x 4) for fast integral reflections."""
    d = sys_.roots[root_idx].doubled
    return d, sum(a * a for a in d)


def _reflect_key(key: Key, d_r: Key, rr4: int) -> Key:
    # s_r(v) = v - (2(r,v)/(r,r)) r; with both in doubled coordinates the
    # coefficient is 2 * <d_r, key> / <d_r, d_r>, an integer whenever key
    # lies in the root lattice
    q, rem = divmod(2 * sum(a * b for a, b in zip(d_r, key)), rr4)
    if rem:
        raise CosetValidationError("coset key left the root lattice")
    return tuple(kv - q * dr for kv, dr in zip(key, d_r))


def _u_orbit_sums(sys_: RootSystem, gen_roots: Sequence[int]) -> list[Key]:
    """Sum of roots over each U-orbit, in BFS discovery order."""
    images = [sys_.reflection_images(g) for g in gen_roots]
    ambient = len(sys_.roots[0].doubled)
    seen = [False] * len(sys_.roots)
    sums = []
    for start in range(len(sys_.roots)):
        if seen[start]:
            continue
        seen[start] = True
        orbit = [start]
        frontier = [start]
        while frontier:
            nxt = []
            for r in frontier:
                for img in images:
                    s = img[r]
                    if not seen[s]:
                        seen[s] = True
                        orbit.append(s)
                        nxt.append(s)
            frontier = nxt
        vec = [0] * ambient
        for r in orbit:
            for i, d in enumerate(sys_.roots[r].doubled):
                vec[i] += d
        sums.append(tuple(vec))
    return sums


def _invariant_vector(
    sys_: RootSystem, gen_roots: Sequence[int], domain_lines: list[int]
) -> Key:
    """A root-lattice vector whose stabiliser in W is exactly U.

    Candidates are weighted sums of the U-orbit sums of the roots (each
    summand is U-invariant and lies in the root lattice).  A candidate
    is accepted when the set of roots orthogonal to it is precisely
    Sigma_U: by Steinberg's theorem the stabiliser of a vector is
    generated by the reflections fixing it, so acceptance proves
    Stab(v) = U and the coset key g^{-1}(v) is collision-free.
    """
    sums = _u_orbit_sums(sys_, gen_roots)
    wanted = set(domain_lines)
    for t in range(1, 65):
        vec = [0] * len(sums[0])
        weight = 1
        for s in sums:
            for i, d in enumerate(s):
                vec[i] += weight * d
            weight *= t
        if not any(vec):
            continue
        perp = {
            pos
            for pos in range(len(sys_.lines))
            if sum(
                a * b for a, b in zip(sys_.roots[sys_.lines[pos]].doubled, vec)
            )
            == 0
        }
        if perp == wanted:
            return tuple(vec)
    raise CosetValidationError(
        "no generic invariant vector found; the orbit-sum family does not "
        "span the fixed space of this subgroup"
    )


def build_coset_space(
    sys_: RootSystem,
    u_gen_roots: Optional[Sequence[int]] = None,
    cache_dir: Optional[str] = None,
) -> CosetSpace:
    """Enumerate U\\W(sys) and validate the order identity.

    With cache_dir set, a previously built space for the same
    (type, rank, generators, format version) is loaded instead, and a
    fresh build is written back together with the canonical frame's
    fold certificate in a single pass.
    """
    if u_gen_roots is None:
        u_gen_roots = standard_u_gens(sys_)
    u_gen_roots = tuple(u_gen_roots)
    if cache_dir is not None:
        path = cache_path(sys_, u_gen_roots, cache_dir)
        if os.path.exists(path):
            return _load_space(sys_, u_gen_roots, path)
    space = _build_space(sys_, u_gen_roots)
    if cache_dir is not None:
        space = replace(space, certificate=_canonical_certificate(sys_, space))
        _write_space(space, path)
    return space


def _build_space(sys_: RootSystem, u_gen_roots: tuple[int, ...]) -> CosetSpace:
    domain_lines = _closure_lines(sys_, u_gen_roots)
    u_order = _enumerate_u_order(sys_, u_gen_roots, domain_lines)
    start = _invariant_vector(sys_, u_gen_roots, domain_lines)
    reflectors = [_reflector(sys_, i) for i in sys_.simple_indices]
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for key in frontier:
            for d_r, rr4 in reflectors:
                img = _reflect_key(key, d_r, rr4)
                if img not in seen:
                    seen.add(img)
                    nxt.append(img)
        frontier = nxt
    reps = tuple(sorted(seen))
    expected = weyl_order(sys_)
    if len(reps) * u_order != expected:
        raise CosetValidationError(
            f"|orbit| x |U| = {len(reps)} x {u_order} != |W| = {expected}: "
            "the coset enumeration is inconsistent with the group order"
        )
    index = {key: i for i, key in enumerate(reps)}
    tables = []
    for d_r, rr4 in reflectors:
        table = tuple(index[_reflect_key(key, d_r, rr4)] for key in reps)
        if sorted(table) != list(range(len(reps))):
            raise CosetValidationError("action table is not a bijection")
        tables.append(table)
    return CosetSpace(
        type_label=sys_.type_label,
        rank=sys_.rank,
        u_gen_roots=tuple(sys_.roots[g].doubled for g in u_gen_roots),
        u_order=u_order,
        representatives=reps,
        action_tables=tuple(tables),
    )


# ---------------------------------------------------------------------------
# frame actions


def _frame_tables(
    sys_: RootSystem, space: CosetSpace, frame_roots: Sequence[int]
) -> list[tuple[int, ...]]:
    index = {key: i for i, key in enumerate(space.representatives)}
    tables = []
    for r in frame_roots:
        d_r, rr4 = _reflector(sys_, r)
        tables.append(
            tuple(
                index[_reflect_key(key, d_r, rr4)]
                for key in space.representatives
            )
        )
    return tables


def p_orbits(
    sys_: RootSystem, space: CosetSpace, frame_roots: Sequence[int]
) -> list[tuple[int, ...]]:
    """Orbit partition of the coset indices under the frame generators."""
    tables = _frame_tables(sys_, space, frame_roots)
    seen = [False] * space.size
    orbits = []
    for start in range(space.size):
        if seen[start]:
            continue
        orbit = {start}
        frontier = [start]
        seen[start] = True
        while frontier:
            nxt = []
            for p in frontier:
                for t in tables:
                    q = t[p]
                    if q not in orbit:
                        orbit.add(q)
                        seen[q] = True
                        nxt.append(q)
            frontier = nxt
        orbits.append(tuple(sorted(orbit)))
    return orbits


def full_check(
    sys_: RootSystem, space: CosetSpace, frame_roots: Sequence[int]
) -> FoldCertificate:
    """Certify that every frame orbit is simply transitive for its A_k.

    A_k is the set of generators moving some point of the orbit; the
    certificate requires |O_k| = 2^|A_k|, which pins the orbit's form to
    an |A_k|-fold Pfister class.  There is no a-priori reason for this
    to hold; failure raises CertificateError naming the orbit.
    """
    frame_roots = tuple(frame_roots)
    if space.certificate is not None and _same_frame(
        sys_, space.certificate.frame_roots, frame_roots
    ):
        return space.certificate
    labels = tuple(root_label(sys_, r) for r in frame_roots)
    tables = _frame_tables(sys_, space, frame_roots)
    orbits = p_orbits(sys_, space, frame_roots)
    cert_orbits = []
    for oi, members in enumerate(orbits):
        relabel = {m: j for j, m in enumerate(members)}
        local = [
            tuple(relabel[t[m]] for m in members) for t in tables
        ]
        a_set = tuple(
            i for i, g in enumerate(local) if any(g[j] != j for j in range(len(members)))
        )
        if (1 << len(a_set)) != len(members):
            raise CertificateError(
                f"orbit {oi} (size {len(members)}) is not simply transitive "
                f"under its {len(a_set)} active generators"
            )
        decomp = form_of_permutation_action(local, labels)
        if len(decomp.orbits) != 1:
            raise AssertionError("orbit decomposed further; partition bug")
        pf = decomp.orbits[0]
        cert_orbits.append(
            CertOrbit(
                members=members,
                a_set=a_set,
                fold=pf.fold,
                delta_masks=pf.delta_masks,
            )
        )
    if sum(len(o.members) for o in cert_orbits) != space.size:
        raise AssertionError("orbit sizes do not sum to the coset count")
    return FoldCertificate(
        frame_roots=frame_roots, labels=labels, orbits=tuple(cert_orbits)
    )


def _same_frame(
    sys_: RootSystem, a: Sequence[int], b: Sequence[int]
) -> bool:
    canon = sys_.canonical_rep
    return [canon[r] for r in a] == [canon[r] for r in b]


def _canonical_certificate(
    sys_: RootSystem, space: CosetSpace
) -> Optional[FoldCertificate]:
    from .groups import standard_frames

    try:
        frames = standard_frames(sys_)
    except Exception:
        return None
    if len(frames) != 1:
        return None
    _, frame_roots = frames[0]
    return full_check(sys_, space, frame_roots)


# ---------------------------------------------------------------------------
# certificate consumers


def compare_support(cert: FoldCertificate, expected: KInvariant) -> bool:
    """Do the fold-m orbit products biject onto the expected monomials?

    m is the minimal fold and also the uniform degree of `expected`.
    Each fold-m orbit contributes the product of its delta symbols; the
    comparison demands that these products are single monomials hitting
    each expected term exactly once.
    """
    if not cert.orbits:
        return expected.is_zero()
    m = cert.min_fold
    from .algebra import Monomial, kinv, one

    products = []
    for o in cert.orbits:
        if o.fold != m:
            continue
        term = one(cert.labels)
        for dmask in o.delta_masks:
            term = term * kinv(
                cert.labels,
                [
                    Monomial(1 << i, False)
                    for i in range(dmask.bit_length())
                    if (dmask >> i) & 1
                ],
            )
        products.append(frozenset(term.terms))
    if expected.labels != cert.labels:
        raise ValueError("expected invariant uses a different context")
    targets = {frozenset((t,)) for t in expected.terms}
    if len(products) != len(expected.terms):
        return False
    return sorted(products, key=sorted) == sorted(targets, key=sorted)


def f_restriction(cert: FoldCertificate, m: int) -> KInvariant:
    """e_m of the certified decomposition (the f_m restriction values)."""
    return e_fold(cert.decomp(), m)


# ---------------------------------------------------------------------------
# cache


def cache_path(
    sys_: RootSystem, u_gen_roots: Sequence[int], cache_dir: str
) -> str:
    payload = json.dumps(
        {
            "format_version": CACHE_FORMAT_VERSION,
            "type": sys_.type_label,
            "rank": sys_.rank,
            "u_gens": sorted(sys_.roots[g].doubled for g in u_gen_roots),
        },
        sort_keys=True,
    )
    digest = hashlib.sha256(payload.encode()).hexdigest()[:16]
    name = f"cosets-{sys_.type_label}{sys_.rank}-{digest}.json"
    return os.path.join(cache_dir, name)


def _write_space(space: CosetSpace, path: str) -> None:
    cert = space.certificate
    cert_json = None
    if cert is not None:
        cert_json = {
            "frame_roots": list(cert.frame_roots),
            "labels": list(cert.labels),
            "orbits": [
                {
                    "members": list(o.members),
                    "a_set": list(o.a_set),
                    "fold": o.fold,
                    "delta_masks": list(o.delta_masks),
                }
                for o in cert.orbits
            ],
        }
    doc = {
        "format_version": CACHE_FORMAT_VERSION,
        "type": space.type_label,
        "rank": space.rank,
        "u_gens": [list(g) for g in space.u_gen_roots],
        "u_order": space.u_order,
        "size": space.size,
        "representatives": [list(k) for k in space.representatives],
        "action_tables": [list(t) for t in space.action_tables],
        "certificate": cert_json,
    }
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    # unique per writer: concurrent builders of the same space must not
    # share a scratch file (the final replace is atomic either way)
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def _load_space(
    sys_: RootSystem, u_gen_roots: tuple[int, ...], path: str
) -> CosetSpace:
    with open(path) as fh:
        doc = json.load(fh)
    version = doc.get("format_version")
    if version != CACHE_FORMAT_VERSION:
        raise CacheFormatError(
            f"cache file {path} has format_version {version!r}; "
            f"expected {CACHE_FORMAT_VERSION}"
        )
    if doc["type"] != sys_.type_label or doc["rank"] != sys_.rank:
        raise CacheFormatError(f"cache file {path} is for {doc['type']}{doc['rank']}")
    expected_gens = sorted(tuple(sys_.roots[g].doubled) for g in u_gen_roots)
    if sorted(tuple(g) for g in doc["u_gens"]) != expected_gens:
        raise CacheFormatError("cache file was built from different generators")
    cert = None
    if doc.get("certificate"):
        c = doc["certificate"]
        cert = FoldCertificate(
            frame_roots=tuple(c["frame_roots"]),
            labels=tuple(c["labels"]),
            orbits=tuple(
                CertOrbit(
                    members=tuple(o["members"]),
                    a_set=tuple(o["a_set"]),
                    fold=o["fold"],
                    delta_masks=tuple(o["delta_masks"]),
                )
                for o in c["orbits"]
            ),
        )
    return CosetSpace(
        type_label=doc["type"],
        rank=doc["rank"],
        u_gen_roots=tuple(tuple(g) for g in doc["u_gens"]),
        u_order=doc["u_order"],
        representatives=tuple(tuple(k) for k in doc["representatives"]),
        action_tables=tuple(tuple(t) for t in doc["action_tables"]),
        certificate=cert,
    )


def clear_cache(cache_dir: str) -> list[str]:
    """Remove coset cache files; returns the removed names."""
    removed = []
    if not os.path.isdir(cache_dir):
        return removed
    for name in sorted(os.listdir(cache_dir)):
        if name.startswith("cosets-") and name.endswith(".json"):
            os.remove(os.path.join(cache_dir, name))
            removed.append(name)
    return removed
