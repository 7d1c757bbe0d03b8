"""Permutation-group layer: orders, frames, Omega classes, dihedral groups."""
from __future__ import annotations

import pytest

from weylinv.errors import CapExceededError, NormalizerError
from weylinv.groups import (
    DihedralGroup,
    OrthogonalFrame,
    build_dihedral,
    classify_frame,
    compose,
    dihedral_omega,
    enumerate_subgroup,
    g2_split_check,
    group_order,
    make_frame,
    maximal_orthogonal_frames,
    normalizer_action,
    omega_classes,
    perm_of_reflection,
    root_label,
    standard_frames,
    validate_root_permutation,
    weyl_order,
)
from weylinv.roots import RootVector, build_root_system


def _root_idx(sys_, doubled):
    return sys_.index[tuple(doubled)]


def test_reflection_perm_is_involution():
    sys_ = build_root_system("B", 3)
    for i in sys_.simple_indices:
        p = perm_of_reflection(sys_, i)
        assert p.after(p).is_identity()
        assert not p.is_identity()


def test_validate_rejects_broken_images():
    sys_ = build_root_system("A", 2)
    n = len(sys_.roots)
    with pytest.raises(ValueError):
        validate_root_permutation(sys_, [0] * n)
    # swap two roots that have different inner products with the rest
    images = list(range(n))
    images[0], images[1] = images[1], images[0]
    with pytest.raises(ValueError):
        validate_root_permutation(sys_, images)


def test_compose_against_after():
    sys_ = build_root_system("B", 2)
    s0 = perm_of_reflection(sys_, sys_.simple_indices[0])
    s1 = perm_of_reflection(sys_, sys_.simple_indices[1])
    # compose(p, q) applies p first; q.after(p) is the same map
    assert compose(s0, s1).images == s1.after(s0).images


ENUMERATED_ORDERS = [
    ("A", 2, 6),
    ("A", 3, 24),
    ("B", 2, 8),
    ("B", 3, 48),
    ("B", 4, 384),
    ("B", 5, 3840),
    ("D", 4, 192),
    ("F", 4, 1152),
]


@pytest.mark.parametrize("label,rank,expected", ENUMERATED_ORDERS)
def test_enumerated_orders(label, rank, expected):
    sys_ = build_root_system(label, rank)
    gens = [perm_of_reflection(sys_, i) for i in sys_.simple_indices]
    group = enumerate_subgroup(gens)
    assert group.order == expected
    assert weyl_order(sys_) == expected


def test_group_order_dispatch_small():
    assert group_order(build_root_system("B", 5)) == 3840
    assert group_order(build_root_system("E", 6)) == 51840


def test_enumeration_cap():
    sys_ = build_root_system("B", 4)
    gens = [perm_of_reflection(sys_, i) for i in sys_.simple_indices]
    with pytest.raises(CapExceededError):
        enumerate_subgroup(gens, element_cap=100)


def test_single_reflection_subgroup():
    sys_ = build_root_system("B", 2)
    s = perm_of_reflection(sys_, sys_.simple_indices[0])
    assert enumerate_subgroup([s]).order == 2


def test_b2_frames():
    sys_ = build_root_system("B", 2)
    frames = maximal_orthogonal_frames(sys_)
    # {e1, e2} and {e1 - e2, e1 + e2}
    assert len(frames) == 2
    sizes = sorted(len(f) for f in frames)
    assert sizes == [2, 2]
    e1 = _root_idx(sys_, (2, 0))
    e2 = _root_idx(sys_, (0, 2))
    assert OrthogonalFrame(tuple(sorted((e1, e2)))) in frames


def test_frames_all_have_full_rank_size():
    # every maximal frame in these systems has exactly rank members
    for label, rank in [("B", 3), ("D", 4), ("F", 4)]:
        sys_ = build_root_system(label, rank)
        for f in maximal_orthogonal_frames(sys_):
            assert len(f) == rank


def test_a_type_frame_size():
    sys_ = build_root_system("A", 4)
    sizes = {len(f) for f in maximal_orthogonal_frames(sys_)}
    assert sizes == {2}  # floor(5/2)


def test_make_frame_validates():
    sys_ = build_root_system("B", 2)
    e1 = _root_idx(sys_, (2, 0))
    a1 = _root_idx(sys_, (2, -2))
    with pytest.raises(ValueError):
        make_frame(sys_, [e1, a1])  # not orthogonal
    with pytest.raises(ValueError):
        make_frame(sys_, [e1], require_maximal=True)  # e2 extends it
    assert make_frame(sys_, [e1], require_maximal=False).root_indices == (
        sys_.canonical_rep[e1],
    )


OMEGA_COUNTS = [
    ("A", 2, 1),
    ("A", 5, 1),
    ("B", 2, 2),
    ("B", 3, 2),
    ("B", 4, 3),
    ("B", 5, 3),
    ("B", 6, 4),
    ("D", 4, 1),
    ("D", 6, 1),
    ("F", 4, 3),
    ("E", 6, 1),
]


@pytest.mark.parametrize("label,rank,expected", OMEGA_COUNTS)
def test_omega_class_counts(label, rank, expected):
    sys_ = build_root_system(label, rank)
    omega = omega_classes(sys_)
    assert omega.method == "bfs"
    assert len(omega.representatives) == expected
    assert omega.orbit_sizes is not None
    total = sum(omega.orbit_sizes)
    assert total == len(maximal_orthogonal_frames(sys_))


def test_omega_standard_frames_hit_distinct_classes():
    for label, rank in [("B", 4), ("F", 4), ("E", 6)]:
        sys_ = build_root_system(label, rank)
        omega = omega_classes(sys_)
        seen = set()
        for _, roots in standard_frames(sys_):
            seen.add(classify_frame(sys_, omega, make_frame(sys_, roots)))
        assert seen == set(range(len(omega.representatives)))


def test_omega_inductive_fallback():
    sys_ = build_root_system("B", 4)
    omega = omega_classes(sys_, max_frames=2)
    assert omega.method == "inductive"
    assert omega.orbit_sizes is None
    assert len(omega.representatives) == 3
    # classification still works through the pair-count invariant
    full = omega_classes(sys_)
    frame = make_frame(sys_, standard_frames(sys_)[1][1])
    assert classify_frame(sys_, omega, frame) in range(3)
    assert classify_frame(sys_, full, frame) in range(3)


def test_orbit_stabilizer_identity_b3():
    sys_ = build_root_system("B", 3)
    omega = omega_classes(sys_)
    gens = [perm_of_reflection(sys_, i) for i in sys_.simple_indices]
    group = enumerate_subgroup(gens)
    canonical = sys_.canonical_rep
    for rep, orbit_size in zip(omega.representatives, omega.orbit_sizes):
        target = set(rep.root_indices)
        stab = 0
        for images in group.elements:
            if {canonical[images[r]] for r in rep.root_indices} == target:
                stab += 1
        assert stab * orbit_size == group.order


def test_standard_frame_labels():
    sys_ = build_root_system("B", 4)
    names = [name for name, _ in standard_frames(sys_)]
    assert names == ["P_0", "P_1", "P_2"]
    _, x1 = standard_frames(sys_)[1]
    assert [root_label(sys_, r) for r in x1] == ["a1", "b1", "e3", "e4"]


def test_standard_frames_e_types():
    e6 = build_root_system("E", 6)
    (_, frame6), = standard_frames(e6)
    assert [root_label(e6, r) for r in frame6] == ["a1", "b1", "a2", "b2"]
    e7 = build_root_system("E", 7)
    (_, frame7), = standard_frames(e7)
    assert [root_label(e7, r) for r in frame7] == [
        "a1", "b1", "a2", "b2", "a3", "b3", "a4",
    ]
    e8 = build_root_system("E", 8)
    (_, frame8), = standard_frames(e8)
    assert [root_label(e8, r) for r in frame8] == [
        "a1", "b1", "a2", "b2", "a3", "b3", "a4", "b4",
    ]


def test_e6_torsor_generator_action():
    """The product of the two half-vector reflections swaps a1 and b2."""
    sys_ = build_root_system("E", 6)
    r1 = _root_idx(sys_, (1, -1, -1, -1, -1, -1, -1, 1))
    r2 = _root_idx(sys_, (-1, 1, 1, 1, -1, -1, -1, 1))
    g = perm_of_reflection(sys_, r2).after(perm_of_reflection(sys_, r1))
    (_, frame), = standard_frames(sys_)
    action = normalizer_action(sys_, g, frame)
    # positions: a1 b1 a2 b2 -> swap 0 and 3
    assert action == (3, 1, 2, 0)


def test_e7_torsor_generator_action():
    sys_ = build_root_system("E", 7)
    r1 = _root_idx(sys_, (1, -1, -1, -1, -1, -1, -1, 1))
    r2 = _root_idx(sys_, (-1, 1, 1, 1, -1, -1, -1, 1))
    g = perm_of_reflection(sys_, r2).after(perm_of_reflection(sys_, r1))
    (_, frame), = standard_frames(sys_)
    action = normalizer_action(sys_, g, frame)
    # a1 <-> b2 and b3 <-> a4; b1, a2, a3 fixed
    assert action == (3, 1, 2, 0, 4, 6, 5)


def test_f4_extra_normalizer_element():
    """s_{(e1+e2+e3+e4)/2} swaps b1 and b2 on the P_2 frame."""
    sys_ = build_root_system("F", 4)
    r = _root_idx(sys_, (1, 1, 1, 1))
    g = perm_of_reflection(sys_, r)
    frame = standard_frames(sys_)[2][1]
    action = normalizer_action(sys_, g, frame)
    assert action == (0, 3, 2, 1)


def test_normalizer_rejects_outsider():
    sys_ = build_root_system("B", 3)
    e1 = _root_idx(sys_, (2, 0, 0))
    frame = standard_frames(sys_)[1][1]  # (a1, b1, e3)
    # s_{e1} sends a1 to the b1 line: still a frame normalizer
    assert normalizer_action(sys_, perm_of_reflection(sys_, e1), frame) == (
        1, 0, 2,
    )
    # s_{e2-e3} sends a1 = e1-e2 to e1-e3, which is not a frame line
    outsider = perm_of_reflection(sys_, _root_idx(sys_, (0, 2, -2)))
    with pytest.raises(NormalizerError):
        normalizer_action(sys_, outsider, frame)


def test_pair_swap_normalizer_element_b4():
    """s_{e1-e3} s_{e2-e4} exchanges the two coordinate pairs of P_2."""
    sys_ = build_root_system("B", 4)
    g = compose(
        perm_of_reflection(sys_, _root_idx(sys_, (2, 0, -2, 0))),
        perm_of_reflection(sys_, _root_idx(sys_, (0, 2, 0, -2))),
    )
    frame = standard_frames(sys_)[2][1]  # a1 b1 a2 b2
    assert normalizer_action(sys_, g, frame) == (2, 3, 0, 1)


def test_single_flip_normalizer_element_b3():
    """s_{e2} negates e2, swapping a1 and b1 in X_1 = (a1, b1, e3)."""
    sys_ = build_root_system("B", 3)
    g = perm_of_reflection(sys_, _root_idx(sys_, (0, 2, 0)))
    frame = standard_frames(sys_)[1][1]
    assert normalizer_action(sys_, g, frame) == (1, 0, 2)


def test_double_flip_normalizer_element_d4():
    """s_{e1-e3} s_{e1+e3} negates coordinates 1 and 3: a1 <-> b1, a2 <-> b2."""
    sys_ = build_root_system("D", 4)
    g = compose(
        perm_of_reflection(sys_, _root_idx(sys_, (2, 0, -2, 0))),
        perm_of_reflection(sys_, _root_idx(sys_, (2, 0, 2, 0))),
    )
    (_, frame), = standard_frames(sys_)
    assert normalizer_action(sys_, g, frame) == (1, 0, 3, 2)


# ---------------------------------------------------------------------------
# dihedral


def test_dihedral_basics():
    g = build_dihedral(5)
    assert g.order == 10
    assert len(g.elements) == 10
    assert len(set(g.elements)) == 10
    for r in g.reflection_ids:
        assert g.mul(r, r) == 0


def test_dihedral_omega_odd():
    g = build_dihedral(5)
    classes = dihedral_omega(g)
    assert len(classes) == 1
    assert sorted(len(f) for f in classes[0]) == [1] * 5


def test_dihedral_omega_singly_even():
    g = build_dihedral(6)
    classes = dihedral_omega(g)
    assert len(classes) == 1
    assert len(classes[0]) == 3
    assert all(len(f) == 2 for f in classes[0])


def test_dihedral_omega_doubly_even():
    g = build_dihedral(4)
    classes = dihedral_omega(g)
    assert len(classes) == 2
    assert all(len(f) == 2 for cls in classes for f in cls)
    g8 = build_dihedral(8)
    assert len(dihedral_omega(g8)) == 2


def test_g2_split():
    g = build_dihedral(6)
    checks = g2_split_check(g)
    assert checks == {
        "unique_normal_order3": True,
        "splits_as_p_semidirect_u": True,
        "one_omega_class": True,
    }


def test_b2_matches_dihedral_of_order_8():
    sys_ = build_root_system("B", 2)
    gens = [perm_of_reflection(sys_, i) for i in sys_.simple_indices]
    group = enumerate_subgroup(gens)
    dih = build_dihedral(4)
    assert group.order == dih.order
    # same number of reflections: one per root line
    assert len(sys_.lines) == len(dih.reflection_ids)
