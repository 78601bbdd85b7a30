"""Loop algebras, affinizations, Chevalley pair lifts, and the catalogue."""

import itertools
import random

import pytest

from ealie.affinization import (
    AffineDatum,
    ChevalleyPair,
    CoordinateAlgebra,
    GradingMap,
    affine_algebra,
    affine_generators,
    affinize,
    build_realization,
    check_sigma,
    check_table,
    cyclotomic_copy,
    degree_classes_by_length,
    diagonal_automorphism,
    diagonal_commutation,
    diagram_automorphism,
    e7_involution_pair,
    export_table,
    fixed_point_check,
    identity_automorphism,
    lift_chevalley_pair,
    loop_algebra,
    loop_twist_automorphism,
    multiloop,
    pi_projection,
    realization_from_json,
    realization_names,
    slice_weight_dims,
    sln_quantum_example,
    stepwise_dims_agree,
    untwisted_loop,
    verify_case_split,
)
from ealie.errors import (
    BadCosets,
    DomainMismatch,
    HypothesisFailed,
    NonCommuting,
    OrderMismatch,
    PairInvalid,
    SigmaConditionsViolated,
    UnknownName,
)
from ealie.lie_core import (
    GradedAutomorphism,
    bracket,
    build_finite_simple,
    canonical_chevalley,
    check_chevalley,
    compose_autos,
    form,
    jacobi_residual,
    verify_structure_constants,
)
from ealie.root_systems import build_finite
from ealie.scalars import CyclotomicField


@pytest.fixture(scope="module")
def a2():
    return build_finite_simple(build_finite("A", 2))


@pytest.fixture(scope="module")
def a2_hat():
    return affine_algebra("A", 2)


# ---------------------------------------------------------------------------
# coordinate algebras and grading maps


def test_plain_coordinate_algebra_is_trivial():
    A = CoordinateAlgebra(2)
    assert A.mu((3, -1), (0, 5)) == 1
    assert A.eps((1, 2), (-1, -2)) == 1
    assert A.eps((1, 2), (1, 2)) == 0
    assert A.commutative


def test_sign_pairing_twists_but_stays_commutative():
    A = CoordinateAlgebra(2, pairing=[[1, 0], [0, 0]])
    assert A.mu((1, 0), (1, 0)) == -1
    assert A.mu((0, 1), (0, 1)) == 1
    assert A.eps((1, 0), (-1, 0)) == -1
    assert A.commutative
    # mu is symmetric under joint negation, the identity every lift uses
    for lam in itertools.product((-1, 0, 1), repeat=2):
        for tau in itertools.product((-1, 0, 1), repeat=2):
            neg = tuple(-x for x in lam), tuple(-x for x in tau)
            assert A.mu(lam, tau) == A.mu(*neg)


def test_coordinate_algebra_rejects_general_cocycles():
    with pytest.raises(ValueError):
        CoordinateAlgebra(2, pairing=[[0, 1], [0, 0]])
    with pytest.raises(ValueError):
        CoordinateAlgebra(2, pairing=[[2, 0], [0, 0]])
    with pytest.raises(ValueError):
        CoordinateAlgebra(0)


def test_grading_map_surjectivity():
    rho = GradingMap.cyclic(3, nu=2, coeffs=[1, 2])
    assert rho((1, 1)) == (0,)
    assert rho((1, 0)) == (1,)
    with pytest.raises(ValueError):
        GradingMap((2,), ((0,),))
    with pytest.raises(ValueError):
        GradingMap((2, 2), ((1, 0), (1, 0)))
    ident = GradingMap.identity((2, 3))
    assert ident((5, 7)) == (1, 1)


# ---------------------------------------------------------------------------
# untwisted loops and affinization


def test_untwisted_slices_are_the_whole_base(a2):
    lp = untwisted_loop(a2, 1)
    for lam in ((0,), (1,), (-1,)):
        assert len(lp.slice_basis(lam, 1)) == 8


def test_affinization_bracket_and_form(a2_hat):
    ghat = a2_hat
    fin = ghat.base.base
    th = fin.frs.theta_long
    x = ghat.el(("L", ("x", th), (1,)))
    y = ghat.el(("L", ("x", tuple(-t for t in th)), (-1,)))
    # the degree cocycle contributes exactly (x, y) lam c
    expect = ghat.el(("L", ("h", 0), (0,))) + ghat.el(("L", ("h", 1), (0,))) + ghat.el(("c", 0))
    assert bracket(x, y) == expect
    assert form(ghat.el(("c", 0)), ghat.el(("d", 0))) == 1
    assert form(ghat.el(("c", 0)), ghat.el(("c", 0))) == 0
    e0 = ghat.el(("L", ("x", tuple(-t for t in th)), (1,)))
    assert bracket(ghat.el(("d", 0)), e0) == e0
    assert bracket(ghat.el(("d", 0)), ghat.el(("c", 0))) == ghat.zero()


def test_affinization_jacobi_sampled(a2_hat):
    rng = random.Random(11)
    probes = a2_hat.probe_elements(1)
    for _ in range(150):
        x, y, z = rng.sample(probes, 3)
        assert not jacobi_residual(x, y, z)


def test_affine_node_zero_generators(a2_hat):
    gens = affine_generators(a2_hat)
    E0, F0 = gens[0]
    H0 = bracket(E0, F0)
    # the node-0 coroot is c minus the highest coroot
    expect = a2_hat.el(("c", 0)) - a2_hat.el(("L", ("h", 0), (0,))) - a2_hat.el(("L", ("h", 1), (0,)))
    assert H0 == expect
    assert bracket(H0, E0) == E0.scale(2)


def test_affinize_requires_outer_degrees(a2):
    with pytest.raises(DomainMismatch):
        affinize(a2)


def test_affine_structure_constants_full_window(a2_hat):
    rep = verify_structure_constants(a2_hat, window=2, datum=AffineDatum(a2_hat))
    assert rep.passed
    assert rep.pairs_checked > 100


# ---------------------------------------------------------------------------
# eigenprojections


def test_pi_family_invariants(a2):
    entry = diagram_automorphism("A2-order2")
    lp = loop_algebra(entry.algebra, entry.sigma, check=False)
    tw = loop_twist_automorphism(lp)
    x = lp.el(("L", ("x", entry.algebra.frs.simple[0]), (1,)))
    parts = [pi_projection(tw, j, x) for j in range(2)]
    assert parts[0] + parts[1] == x
    assert pi_projection(tw, 0, parts[0]) == parts[0]
    assert not pi_projection(tw, 1, parts[0])
    # each projection lands in the omega^j eigenspace
    assert tw.apply(parts[1]) == parts[1].scale(-1)
    assert tw.apply(parts[0]) == parts[0]


def test_pi_projection_order_mismatch(a2):
    # claims order 2 but squares to multiplication by 4
    fake = GradedAutomorphism(a2, lambda s: a2.el(s, 2 if s[0] == "x" else 1), 2, "fake")
    with pytest.raises(OrderMismatch):
        pi_projection(fake, 1, a2.el(("x", a2.frs.simple[0])))


def test_pi_projection_needs_cyclotomic_root(a2):
    # an honest order-3 automorphism over Q still has no omega
    entry = diagram_automorphism("D4-triality")
    with pytest.raises(OrderMismatch):
        pi_projection(entry.sigma, 1, entry.algebra.el(("x", entry.algebra.frs.simple[0])))


# ---------------------------------------------------------------------------
# the twisting conditions


def test_identity_satisfies_sigma_conditions(a2):
    assert check_sigma(a2, identity_automorphism(a2), 1).passed


def test_chevalley_map_fails_sigma_conditions(a2):
    # tau sends every root space to the opposite one, so all the orbit
    # averages of roots vanish and nothing pairs
    rep = check_sigma(a2, canonical_chevalley(a2), 1)
    assert not rep.passed
    assert not rep.pairing_ok


def test_loop_algebra_rejects_bad_sigma(a2):
    with pytest.raises(SigmaConditionsViolated):
        loop_algebra(a2, canonical_chevalley(a2))


def test_flip_loop_slice_dimensions():
    entry = diagram_automorphism("A2-order2")
    lp = loop_algebra(entry.algebra, entry.sigma)
    assert [len(lp.slice_basis((j,), 1)) for j in (0, 1)] == [3, 5]
    assert fixed_point_check(lp, 1)


def test_triality_loop_slice_dimensions():
    entry = diagram_automorphism("D4-triality")
    lp = loop_algebra(entry.algebra, entry.sigma)
    assert isinstance(lp.domain, CyclotomicField) and lp.domain.m == 3
    assert [len(lp.slice_basis((j,), 1)) for j in (0, 1, 2)] == [14, 7, 7]
    assert fixed_point_check(lp, 1)


def test_twisted_loop_brackets_respect_slices():
    entry = diagram_automorphism("A2-order2")
    lp = loop_algebra(entry.algebra, entry.sigma)
    tw = loop_twist_automorphism(lp)
    b0 = lp.slice_basis((0,), 1)
    b1 = lp.slice_basis((1,), 1)
    for x in b0[:3]:
        for y in b1[:3]:
            z = bracket(x, y)
            if z:
                assert tw.apply(z) == z


def test_slice_weight_dims_group_by_restricted_weight():
    entry = diagram_automorphism("A2-order2")
    lp = loop_algebra(entry.algebra, entry.sigma)
    dims = slice_weight_dims(lp, (0,), 1)
    # so(3) inside sl(3): a Cartan line and two restricted root lines
    assert sorted(dims.values()) == [1, 1, 1]
    zero = [k for k in dims if k is not None and not any(k)]
    assert len(zero) == 1


# ---------------------------------------------------------------------------
# Chevalley pairs and lifts


def test_identity_pair_lift_formula(a2_hat):
    fin = a2_hat.base.base
    taubar = lift_chevalley_pair(ChevalleyPair(canonical_chevalley(fin), None), a2_hat)
    a = fin.frs.simple[0]
    na = tuple(-t for t in a)
    assert taubar.apply(a2_hat.el(("L", ("x", a), (2,)))) == a2_hat.el(("L", ("x", na), (-2,)), -1)
    assert taubar.apply(a2_hat.el(("c", 0))) == a2_hat.el(("c", 0), -1)
    assert taubar.apply(a2_hat.el(("d", 0))) == a2_hat.el(("d", 0), -1)
    assert taubar.order == 2
    rep = check_chevalley(taubar, window=1)
    assert rep.passed


def test_lift_rejects_foreign_pair(a2, a2_hat):
    g2 = build_finite_simple(build_finite("G", 2))
    with pytest.raises(PairInvalid):
        lift_chevalley_pair(ChevalleyPair(canonical_chevalley(g2), None), a2_hat)


def test_pair_validation_catches_broken_psi(a2_hat):
    fin = a2_hat.base.base
    tau = canonical_chevalley(fin)
    # a diagonal of order 3 does not commute with tau, so it cannot be psi
    entry = diagram_automorphism("D4-triality")
    lp = loop_algebra(entry.algebra, entry.sigma)
    alg = entry.algebra
    bad = diagonal_automorphism(alg, [1, -1, 1, 1], order=2, name="bad-psi")
    pair = ChevalleyPair(canonical_chevalley(alg), bad)
    rep = pair.validate(lp.sigmas, 1)
    assert not rep.psi_twist_ok or not rep.commute_ok


# ---------------------------------------------------------------------------
# the diagram-automorphism catalogue


FINITE_PERMS = {
    "A2-order2": {1: 2, 2: 1},
    "A5-order2": {1: 5, 2: 4, 3: 3, 4: 2, 5: 1},
    "D4-order2": {1: 1, 2: 2, 3: 4, 4: 3},
    "E6-order2": {1: 6, 6: 1, 3: 5, 5: 3, 2: 2, 4: 4},
    "D4-triality": {1: 3, 3: 4, 4: 1, 2: 2},
}

AFFINE_PERMS = {
    "A2(1)-order2": {0: 0, 1: 2, 2: 1},
    "A3(1)-order2": {0: 0, 1: 3, 2: 2, 3: 1},
    "C3(1)-order2": {0: 3, 3: 0, 1: 2, 2: 1},
    "D4(1)-order2": {0: 0, 1: 1, 2: 2, 3: 4, 4: 3},
    "D5(1)-order2": {0: 0, 1: 1, 2: 2, 3: 3, 4: 5, 5: 4},
    "E6(1)-order2": {0: 0, 1: 6, 6: 1, 3: 5, 5: 3, 2: 2, 4: 4},
    "D4(1)-order3": {0: 0, 2: 2, 1: 3, 3: 4, 4: 1},
    "E6(1)-order3": {2: 3, 3: 5, 5: 2, 0: 1, 1: 6, 6: 0, 4: 4},
    "D4(1)-order4": {1: 4, 4: 0, 0: 3, 3: 1, 2: 2},
    "D5(1)-order4": {0: 4, 4: 1, 1: 5, 5: 0, 2: 3, 3: 2},
    "D6(1)-order4": {0: 5, 5: 1, 1: 6, 6: 0, 2: 4, 4: 2, 3: 3},
}


@pytest.mark.parametrize("name", sorted(FINITE_PERMS))
def test_finite_catalogue_permutes_generators(name):
    entry = diagram_automorphism(name)
    perm = FINITE_PERMS[name]
    for i, (E, F) in entry.generators.items():
        assert entry.sigma.apply(E) == entry.generators[perm[i]][0]
        assert entry.sigma.apply(F) == entry.generators[perm[i]][1]
    probes = entry.algebra.probe_elements(1)
    assert entry.sigma.verified_order(probes, cap=2 * entry.order) == entry.order
    assert verify_case_split(entry).ok


@pytest.mark.parametrize("name", sorted(AFFINE_PERMS))
def test_affine_catalogue_permutes_generators(name):
    entry = diagram_automorphism(name)
    perm = AFFINE_PERMS[name]
    for i, (E, F) in entry.generators.items():
        assert entry.sigma.apply(E) == entry.generators[perm[i]][0]
        assert entry.sigma.apply(F) == entry.generators[perm[i]][1]
    probes = entry.algebra.probe_elements(1)
    assert entry.sigma.verified_order(probes, cap=2 * entry.order) == entry.order
    if entry.psi is not None:
        assert entry.psi.verified_order(probes, cap=4) == 2
        # psi inverts sigma, the dihedral relation behind the case split
        x = entry.generators[0][0]
        lhs = entry.psi.apply(entry.sigma.apply(x))
        rhs = entry.sigma.power(entry.order - 1).apply(entry.psi.apply(x))
        assert lhs == rhs
    assert verify_case_split(entry).ok


def test_unknown_catalogue_names_rejected():
    for name in ("B3-order2", "A1-order2", "E6-triality", "D3(1)-order4", "nonsense"):
        with pytest.raises(UnknownName):
            diagram_automorphism(name)


@pytest.mark.parametrize("name", ["A2(1)-order2", "C3(1)-order2", "D4(1)-order3", "D4(1)-order4"])
def test_catalogue_pairs_lift_to_chevalley_maps(name):
    entry = diagram_automorphism(name)
    lp = loop_algebra(entry.algebra, entry.sigma, check=True)
    ghat2 = affinize(lp)
    taubar = lift_chevalley_pair(ChevalleyPair(entry.tau, entry.psi), ghat2, check=True)
    rep = check_chevalley(taubar, window=1, signature=ghat2.signature)
    assert rep.passed, rep.failures


def test_triality_pair_lift():
    entry = diagram_automorphism("D4-triality")
    lp = loop_algebra(entry.algebra, entry.sigma, check=True)
    ghat2 = affinize(lp)
    taubar = lift_chevalley_pair(ChevalleyPair(entry.tau, entry.psi), ghat2, check=True)
    rep = check_chevalley(taubar, window=1, signature=ghat2.signature)
    assert rep.passed, rep.failures


# ---------------------------------------------------------------------------
# multiloops


def test_multiloop_rejects_noncommuting():
    e = diagram_automorphism("D4-triality")
    with pytest.raises(NonCommuting):
        multiloop(e.algebra, (e.sigma, e.psi))


def test_multiloop_rejects_bad_hypotheses(a2):
    with pytest.raises(HypothesisFailed):
        multiloop(a2, (canonical_chevalley(a2),))


def test_e7_pair_gives_f4_tower():
    alg, s1, s2 = e7_involution_pair()
    lp, rep = multiloop(alg, (s1, s2))
    assert rep.passed
    assert rep.fixed_dims == (79, 52)
    dims = {lam: len(lp.slice_basis(lam, 1)) for lam in itertools.product((0, 1), repeat=2)}
    assert dims == {(0, 0): 52, (0, 1): 27, (1, 0): 27, (1, 1): 27}


def test_e7_joint_fixed_part_looks_like_f4():
    alg, s1, s2 = e7_involution_pair()
    lp, _ = multiloop(alg, (s1, s2))
    dims = slice_weight_dims(lp, (0, 0), 1)
    nonzero = {k: v for k, v in dims.items() if k is not None and any(k)}
    zero = sum(v for k, v in dims.items() if k is not None and not any(k))
    assert zero == 4
    assert len(nonzero) == 48
    assert all(v == 1 for v in nonzero.values())


def test_stepwise_matches_joint_projection():
    alg, s1, s2 = e7_involution_pair()
    assert stepwise_dims_agree(alg, (s1, s2), 1)


def test_single_twist_multiloop_matches_loop_algebra(a2):
    entry = diagram_automorphism("A2-order2")
    lp1 = loop_algebra(entry.algebra, entry.sigma)
    lp2, rep = multiloop(entry.algebra, (entry.sigma,))
    assert rep.passed
    for j in (0, 1):
        assert len(lp1.slice_basis((j,), 1)) == len(lp2.slice_basis((j,), 1))


# ---------------------------------------------------------------------------
# the matrix realization


def test_matrix_algebra_is_a_lie_algebra():
    real = sln_quantum_example(3, 3, [(0, 0), (1, 0), (0, 1)])
    rng = random.Random(5)
    probes = real.full.probe_elements(1)
    for _ in range(150):
        x, y, z = rng.sample(probes, 3)
        assert not jacobi_residual(x, y, z)
        assert form(bracket(x, y), z) == form(x, bracket(y, z))


def test_matrix_involution_properties():
    real = sln_quantum_example(3, 3, [(0, 0), (1, 0), (0, 1)])
    full, sig, tau = real.full, real.sigma, real.tau
    probes = full.probe_elements(1)
    assert sig.verified_order(probes, cap=4) == 2
    assert tau.verified_order(probes, cap=4) == 2
    assert all(sig.apply(tau.apply(e)) == tau.apply(sig.apply(e)) for e in probes)
    rng = random.Random(9)
    for _ in range(80):
        x, y = rng.sample(probes, 2)
        assert sig.apply(bracket(x, y)) == bracket(sig.apply(x), sig.apply(y))
        assert form(sig.apply(x), sig.apply(y)) == form(x, y)


def test_matrix_fixed_points_have_type_b():
    real = sln_quantum_example(3, 3, [(0, 0), (1, 0), (0, 1)])
    classes = degree_classes_by_length(real, 1)
    assert classes["short"] == {(0, 0), (1, 0), (0, 1)}
    assert classes["long"] == {(0, 0)}
    ears = real.ears
    assert ears is not None
    assert ears.frs.letter == "B" and ears.frs.rank == 3
    assert ears.S.index == 3
    assert ears.L.index == 4
    assert ears.twist == 2


def test_matrix_chevalley_lift():
    real = sln_quantum_example(3, 3, [(0, 0), (1, 0), (0, 1)])
    rep = check_chevalley(real.tau_hat, window=1)
    assert rep.passed, rep.failures
    assert real.tau_hat.apply(real.ghat.el(("c", 1))) == real.ghat.el(("c", 1), -1)


def test_matrix_small_cases_and_gates():
    r2 = sln_quantum_example(2, 1, [(0,)])
    assert r2.ears is not None
    assert r2.ears.frs.letter == "B" and r2.ears.frs.rank == 2
    assert r2.ears.twist == 0
    r1 = sln_quantum_example(1, 2, [(0,), (1,)])
    assert r1.ears is None
    assert (r1.finite_letter, r1.finite_rank) == ("A", 1)


def test_matrix_coset_validation():
    with pytest.raises(BadCosets):
        sln_quantum_example(2, 2, [(1, 0), (0, 1)])
    with pytest.raises(BadCosets):
        sln_quantum_example(2, 2, [(0, 0), (2, 0)])
    with pytest.raises(BadCosets):
        sln_quantum_example(2, 3, [(0, 0), (1, 0)])
    with pytest.raises(BadCosets):
        sln_quantum_example(0, 1, [(0,)])


# ---------------------------------------------------------------------------
# diagonal twists


def test_diagonal_commutation_matches_order(a2):
    tau = canonical_chevalley(a2)
    d2 = diagonal_automorphism(a2, [1, -1])
    assert d2.order == 2
    assert diagonal_commutation(d2, tau)
    cp = cyclotomic_copy(a2, 3)
    z = cp.domain.zeta
    d3 = diagonal_automorphism(cp, [z, cp.domain.one])
    assert d3.order == 3
    assert not diagonal_commutation(d3, canonical_chevalley(cp))


def test_diagonal_composite_is_still_chevalley(a2):
    cp = cyclotomic_copy(a2, 3)
    z = cp.domain.zeta
    d3 = diagonal_automorphism(cp, [z, cp.domain.one])
    taud = compose_autos(d3, canonical_chevalley(cp), 2, "dtau")
    rep = check_chevalley(taud, window=1)
    assert rep.passed and rep.order == 2


# ---------------------------------------------------------------------------
# tables


def test_symbol_table_round_trip(a2_hat):
    data = export_table(a2_hat, 1)
    assert "basis" in data
    rep = check_table(data)
    assert rep.passed
    assert rep.jacobi_checked > 500


def test_element_table_checks():
    entry = diagram_automorphism("A2-order2")
    lp = loop_algebra(entry.algebra, entry.sigma)
    data = export_table(lp, 1)
    assert data["kind"] == "element-table"
    assert data["dim"] == sum(len(lp.slice_basis((j,), 1)) for j in (-1, 0, 1))
    rep = check_table(data)
    assert rep.passed, rep.failures
    # corrupting one structure constant must be caught
    bad = {k: v for k, v in data.items()}
    bad["brackets"] = [list(row) for row in data["brackets"]]
    for row in bad["brackets"]:
        if row[2]:
            row[2] = [[row[2][0][0], "7/2"]] + row[2][1:]
            break
    assert not check_table(bad).passed


# ---------------------------------------------------------------------------
# named realizations


def test_realization_names_cover_the_catalogue():
    names = realization_names()
    for required in (
        "A2-untwisted", "B3-untwisted", "G2-untwisted", "C3-twisted",
        "G2-twisted", "A2-toroidal", "B3-matrix", "F4-multiloop",
    ):
        assert required in names


def test_untwisted_realization_shape():
    r = build_realization("B3-untwisted")
    assert r.ears.frs.letter == "B"
    assert r.ears.nu == 1 and r.ears.twist == 0
    assert r.ghat.nu == 1
    assert check_chevalley(r.tau, window=1).passed


def test_toroidal_realization_shape():
    r = build_realization("A2-toroidal")
    assert r.ghat.nu == 2
    assert r.ears.nu == 2
    gens = r.ghat.base.base.frs.simple
    x = r.ghat.el(("L", ("x", gens[0]), (1, -2)))
    assert r.tau.apply(x) == r.ghat.el(("L", ("x", tuple(-t for t in gens[0])), (-1, 2)), -1)
    assert bracket(r.ghat.el(("d", 1)), x) == x.scale(-2)


def test_twisted_realizations_have_marked_axes():
    c3 = build_realization("C3-twisted")
    assert c3.ears.twist == 1
    assert c3.ears.frs.k == 2
    g2 = build_realization("G2-twisted")
    assert g2.ears.twist == 1
    assert g2.ears.frs.k == 3
    assert isinstance(g2.ghat.domain, CyclotomicField)


def test_realization_json_grammar():
    r = realization_from_json({"realization": "untwisted-loop", "base": "G2"})
    assert r.name == "G2-untwisted"
    r = realization_from_json({"realization": "toroidal", "base": "A2", "nullity": 2})
    assert r.ghat.nu == 2
    r = realization_from_json(
        {"realization": "twisted-loop", "base": "A5", "automorphism": "A5-order2", "rho": [1]}
    )
    assert r.ears.frs.letter == "C"
    r = realization_from_json(
        {"realization": "matrix-quantum", "l": 3, "cosets": [[0, 0], [1, 0], [0, 1]]}
    )
    assert r.ears.S.index == 3
    with pytest.raises(UnknownName):
        realization_from_json({"realization": "mystery"})
    with pytest.raises(UnknownName):
        realization_from_json({"realization": "multiloop", "base": "E8", "automorphisms": "f4-pair"})
