"""Coset spaces, fold certificates, and their disk cache."""
from __future__ import annotations

import json

import pytest

from weylinv.algebra import x_monomial, zero
from weylinv.cosets import (
    CertOrbit,
    FoldCertificate,
    build_coset_space,
    cache_path,
    clear_cache,
    compare_support,
    f_restriction,
    full_check,
    p_orbits,
    standard_u_gens,
)
from weylinv.errors import CacheFormatError, CertificateError, CosetValidationError
from weylinv.groups import standard_frames
from weylinv.roots import build_root_system

D4_LABELS = ("a1", "b1", "a2", "b2")


@pytest.fixture(scope="module")
def d4_space():
    sys_ = build_root_system("D", 4)
    return sys_, build_coset_space(sys_)


def test_d4_coset_count(d4_space):
    sys_, space = d4_space
    assert space.size == 8  # 2^(n-1)
    assert space.u_order == 24
    assert space.representatives == tuple(sorted(space.representatives))


@pytest.mark.parametrize("n,expected", [(5, 16), (6, 32)])
def test_dn_coset_counts(n, expected):
    sys_ = build_root_system("D", n)
    space = build_coset_space(sys_)
    assert space.size == expected


def test_nonstandard_subgroup_b2():
    # U = <s_{e1}> works through the generic-vector key: 4 x 2 = |W|
    sys_ = build_root_system("B", 2)
    e1 = sys_.index[(2, 0)]
    space = build_coset_space(sys_, [e1])
    assert space.size == 4
    assert space.u_order == 2


def test_validation_failure_full_rank_subgroup():
    # U = <s_{e1}, s_{e2}> has no nonzero invariant vector (its span
    # meets extra roots), so no key can separate the 2 cosets
    sys_ = build_root_system("B", 2)
    e1 = sys_.index[(2, 0)]
    e2 = sys_.index[(0, 2)]
    with pytest.raises(CosetValidationError):
        build_coset_space(sys_, [e1, e2])


def test_standard_u_gens_unknown():
    with pytest.raises(ValueError):
        standard_u_gens(build_root_system("B", 3))


def test_d4_orbits(d4_space):
    sys_, space = d4_space
    (_, frame), = standard_frames(sys_)
    orbits = p_orbits(sys_, space, frame)
    assert sorted(len(o) for o in orbits) == [4, 4]
    # empty frame: everything is a singleton
    singletons = p_orbits(sys_, space, ())
    assert len(singletons) == space.size


def test_d4_certificate(d4_space):
    sys_, space = d4_space
    (_, frame), = standard_frames(sys_)
    cert = full_check(sys_, space, frame)
    assert cert.labels == D4_LABELS
    assert len(cert.orbits) == 2
    assert all(o.fold == 2 for o in cert.orbits)
    assert cert.min_fold == 2
    # Each orbit activates one of a_i/b_i per coordinate pair, with an
    # even number of a-choices: {a1, a2} and {b1, b2}.
    a_sets = sorted(o.a_set for o in cert.orbits)
    assert a_sets == [(0, 2), (1, 3)]
    for o in cert.orbits:
        assert o.delta_masks == tuple(1 << p for p in o.a_set)


def test_d4_e2_restriction(d4_space):
    sys_, space = d4_space
    (_, frame), = standard_frames(sys_)
    cert = full_check(sys_, space, frame)
    expected = x_monomial(D4_LABELS, ["a1", "a2"]) + x_monomial(
        D4_LABELS, ["b1", "b2"]
    )
    assert f_restriction(cert, 2) == expected
    assert compare_support(cert, expected)
    wrong = x_monomial(D4_LABELS, ["a1", "b1"]) + x_monomial(
        D4_LABELS, ["b1", "b2"]
    )
    assert not compare_support(cert, wrong)


def test_d6_certificate_pattern():
    sys_ = build_root_system("D", 6)
    space = build_coset_space(sys_)
    assert space.size == 32
    (_, frame), = standard_frames(sys_)
    cert = full_check(sys_, space, frame)
    assert len(cert.orbits) == 4  # 2^(m-1) with m = 3
    assert all(o.fold == 3 for o in cert.orbits)
    # pattern: one generator per pair, even number of a-slots
    labels = cert.labels
    a_choice_sets = []
    for o in cert.orbits:
        names = [labels[p] for p in o.a_set]
        pairs = {n[1] for n in names}
        assert pairs == {"1", "2", "3"}
        a_choice_sets.append(frozenset(n for n in names if n[0] == "a"))
    assert sorted(len(s) for s in a_choice_sets) == [0, 2, 2, 2]
    # res e_3 = sum over even-|A| patterns
    expected = zero(labels)
    import itertools

    for a_part in [(), (1, 2), (1, 3), (2, 3)]:
        names = [f"a{i}" if i in a_part else f"b{i}" for i in (1, 2, 3)]
        expected = expected + x_monomial(labels, names)
    assert f_restriction(cert, 3) == expected
    assert compare_support(cert, expected)


def test_f_restriction_degree_zero():
    cert = FoldCertificate(frame_roots=(), labels=(), orbits=())
    assert compare_support(cert, zero(()))
    # 8 fold-0 orbits have even parity
    orbits = tuple(
        CertOrbit(members=(i,), a_set=(), fold=0, delta_masks=()) for i in range(8)
    )
    cert8 = FoldCertificate(frame_roots=(), labels=(), orbits=orbits)
    assert f_restriction(cert8, 0).is_zero()


def test_fold_failure_reported():
    # a frame that is not maximal gives orbits with |O| != 2^|A_k| in
    # general; manufacture one directly on D_4 with a repeated generator
    sys_ = build_root_system("D", 4)
    space = build_coset_space(sys_)
    (_, frame), = standard_frames(sys_)
    a1 = frame[0]
    with pytest.raises(CertificateError):
        full_check(sys_, space, (a1, a1, frame[1]))


def test_e7_coset_space():
    sys_ = build_root_system("E", 7)
    space = build_coset_space(sys_)
    assert space.size == 2016
    assert space.u_order == 1440
    assert space.size * space.u_order == 2903040
    (_, frame), = standard_frames(sys_)
    cert = full_check(sys_, space, frame)
    hist = {}
    for o in cert.orbits:
        hist[o.fold] = hist.get(o.fold, 0) + 1
    assert hist == {3: 28, 4: 28, 6: 21}


def test_e8_coset_space():
    sys_ = build_root_system("E", 8)
    space = build_coset_space(sys_)
    assert space.size == 17280
    assert space.u_order == 40320
    assert space.size * space.u_order == 696729600
    (_, frame), = standard_frames(sys_)
    cert = full_check(sys_, space, frame)
    hist = {}
    for o in cert.orbits:
        hist[o.fold] = hist.get(o.fold, 0) + 1
    assert hist == {4: 56, 5: 224, 7: 56, 8: 8}


def test_d8_certificate_fold_pattern():
    sys_ = build_root_system("D", 8)
    space = build_coset_space(sys_)
    assert space.size == 128
    (_, frame), = standard_frames(sys_)
    cert = full_check(sys_, space, frame)
    assert len(cert.orbits) == 8
    assert all(o.fold == 4 for o in cert.orbits)


# ---------------------------------------------------------------------------
# cache


def test_cache_roundtrip(tmp_path, d4_space):
    sys_, fresh = d4_space
    cache = str(tmp_path)
    built = build_coset_space(sys_, cache_dir=cache)
    assert built.representatives == fresh.representatives
    assert built.certificate is not None  # canonical frame certified at build
    path = cache_path(sys_, standard_u_gens(sys_), cache)
    first_bytes = open(path, "rb").read()
    loaded = build_coset_space(sys_, cache_dir=cache)
    assert loaded.representatives == built.representatives
    assert loaded.action_tables == built.action_tables
    assert loaded.certificate == built.certificate
    # cold rebuild produces identical bytes
    assert clear_cache(cache) == [path.split("/")[-1]]
    build_coset_space(sys_, cache_dir=cache)
    assert open(path, "rb").read() == first_bytes


def test_cache_format_version_rejected(tmp_path, d4_space):
    sys_, _ = d4_space
    cache = str(tmp_path)
    build_coset_space(sys_, cache_dir=cache)
    path = cache_path(sys_, standard_u_gens(sys_), cache)
    doc = json.load(open(path))
    doc["format_version"] = 99
    json.dump(doc, open(path, "w"))
    with pytest.raises(CacheFormatError):
        build_coset_space(sys_, cache_dir=cache)


def test_cached_certificate_reused(tmp_path):
    sys_ = build_root_system("D", 4)
    space = build_coset_space(sys_, cache_dir=str(tmp_path))
    (_, frame), = standard_frames(sys_)
    cert = full_check(sys_, space, frame)
    assert cert is space.certificate
