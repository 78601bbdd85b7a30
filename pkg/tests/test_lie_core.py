"""Tests for the finite Chevalley algebras and their verification helpers."""

import itertools
import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ealie.errors import DomainMismatch, NilpotencyCapExceeded, UnsupportedType
from ealie.lie_core import (
    GradedAutomorphism,
    algebra_from_structure_json,
    bracket,
    build_finite_simple,
    canonical_chevalley,
    check_chevalley,
    compose_autos,
    element_coords,
    exp_ad,
    extend_automorphism,
    form,
    jacobi_residual,
    span_rank,
    structure_json,
    verify_structure_constants,
)
from ealie.root_systems import build_finite

DIMS = {
    ("A", 2): 8,
    ("A", 3): 15,
    ("B", 2): 10,
    ("B", 3): 21,
    ("C", 3): 21,
    ("D", 4): 28,
    ("F", 4): 52,
    ("G", 2): 14,
    ("E", 6): 78,
}


def alg_of(key_or_letter, rank=None):
    if rank is None:
        letter, rank = key_or_letter
    else:
        letter = key_or_letter
    return build_finite_simple(build_finite(letter, rank))


@pytest.mark.parametrize("letter,rank", sorted(DIMS))
def test_dimensions(letter, rank):
    assert alg_of(letter, rank).dimension == DIMS[(letter, rank)]


def test_rank_one_rejected():
    with pytest.raises(UnsupportedType):
        build_finite_simple(build_finite("A", 1))


def test_sl3_bracket_basics():
    a2 = alg_of("A", 2)
    x = a2.el(("x", (1, 0)))
    y = a2.el(("x", (-1, 0)))
    h = bracket(x, y)
    assert h == a2.el(("h", 0))
    assert bracket(h, x) == x.scale(2)
    assert bracket(h, y) == y.scale(-2)
    assert not bracket(x, x)
    # frozen sign of the cocycle: [x_{a1}, x_{a2}] = -x_{a1+a2}
    assert bracket(x, a2.el(("x", (0, 1)))) == a2.el(("x", (1, 1)), -1)


def test_g2_double_constant():
    g2 = alg_of("G", 2)
    br = bracket(g2.el(("x", (1, 0))), g2.el(("x", (1, 1))))
    assert sorted(br.coeffs) == [("x", (2, 1))]
    assert abs(br.coeff(("x", (2, 1)))) == 2


def test_chevalley_normalization_everywhere():
    for letter, rank in sorted(DIMS):
        alg = alg_of(letter, rank)
        frs = alg.frs
        for a in frs.roots:
            h = bracket(alg.el(("x", a)), alg.el(("x", tuple(-c for c in a))))
            assert h == alg.coroot_element(a), (letter, rank, a)


@pytest.mark.parametrize("letter,rank", [("A", 2), ("B", 2), ("G", 2)])
def test_jacobi_exhaustive_small(letter, rank):
    alg = alg_of(letter, rank)
    syms = alg.probe_symbols()
    for s, t, u in itertools.combinations(syms, 3):
        assert not jacobi_residual(alg.el(s), alg.el(t), alg.el(u))


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_jacobi_sampled_f4(data):
    alg = alg_of("F", 4)
    syms = alg.probe_symbols()
    pick = st.sampled_from(syms)
    s, t, u = data.draw(pick), data.draw(pick), data.draw(pick)
    assert not jacobi_residual(alg.el(s), alg.el(t), alg.el(u))


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_form_invariance_sampled(data):
    alg = alg_of(data.draw(st.sampled_from([("A", 2), ("C", 3), ("G", 2)])))
    syms = alg.probe_symbols()
    pick = st.sampled_from(syms)
    x, y, z = (alg.el(data.draw(pick)) for _ in range(3))
    assert form(bracket(x, y), z) == form(x, bracket(y, z))


def test_weight_additivity():
    alg = alg_of("B", 3)
    for s, t in itertools.islice(itertools.combinations(alg.probe_symbols(), 2), 500):
        res = bracket(alg.el(s), alg.el(t))
        want = tuple(a + b for a, b in zip(alg.weight(s), alg.weight(t)))
        for u in res.coeffs:
            assert alg.weight(u) == want


def test_form_values():
    a2 = alg_of("A", 2)
    x = a2.el(("x", (1, 0)))
    y = a2.el(("x", (-1, 0)))
    assert form(x, y) == Fraction(1)  # 2/(a,a) with (a,a) = 2
    assert form(x, x) == 0
    assert form(a2.el(("h", 0)), a2.el(("h", 0))) == 2
    assert form(a2.el(("h", 0)), a2.el(("h", 1))) == -1
    g2 = alg_of("G", 2)
    # long coroots are short for the form: (h_2, h_2) = 4*6/36 = 2/3
    assert form(g2.el(("h", 1)), g2.el(("h", 1))) == Fraction(2, 3)
    long_root = (3, 2)
    assert form(g2.el(("x", long_root)), g2.el(("x", (-3, -2)))) == Fraction(2, 6)


def test_exp_ad_example_and_inverse():
    a2 = alg_of("A", 2)
    x = a2.el(("x", (1, 0)))
    y = a2.el(("x", (-1, 0)))
    h = bracket(x, y)
    assert exp_ad(x, y) == y + h - x
    for s in a2.probe_symbols():
        v = a2.el(s)
        assert exp_ad(x.scale(-1), exp_ad(x, v)) == v


def test_exp_ad_cap():
    a2 = alg_of("A", 2)
    h = a2.el(("h", 0))
    with pytest.raises(NilpotencyCapExceeded):
        exp_ad(h, a2.el(("x", (1, 0))))


def test_exp_ad_rejects_finite_characteristic():
    from ealie.scalars import FieldSpec, FiniteField

    a2 = alg_of("A", 2)
    data = structure_json(a2)
    back = algebra_from_structure_json(data)
    back.domain = FiniteField(FieldSpec(5))
    x = back.el(("x", (1, 0)))
    with pytest.raises(DomainMismatch):
        exp_ad(x, x)


def test_canonical_tau_passes():
    for letter, rank in sorted(DIMS):
        alg = alg_of(letter, rank)
        rep = check_chevalley(canonical_chevalley(alg))
        assert rep.passed and rep.order == 2, (letter, rank, rep.failures)


def test_identity_fails_chevalley():
    a2 = alg_of("A", 2)
    rep = check_chevalley(GradedAutomorphism(a2, a2.el, 1, "id"))
    assert not rep.passed
    assert not rep.cartan_negated


def test_tau_composed_with_diagonal_passes():
    a2 = alg_of("A", 2)
    tau = canonical_chevalley(a2)

    def diag(sym):
        if sym[0] == "x":
            return a2.el(sym, -1 if sym[1][0] % 2 else 1)
        return a2.el(sym)

    sigma = GradedAutomorphism(a2, diag, 2, "diag")
    rep = check_chevalley(compose_autos(tau, sigma, order=2))
    assert rep.passed and rep.order == 2


def test_structure_constants_a2():
    rep = verify_structure_constants(alg_of("A", 2))
    assert rep.passed
    assert rep.pairs_checked == 6


@pytest.mark.parametrize("letter,rank", sorted(DIMS))
def test_structure_constants_all(letter, rank):
    rep = verify_structure_constants(alg_of(letter, rank))
    assert rep.passed, rep.violations[:5]


def test_extend_automorphism_diagram_flip():
    a2 = alg_of("A", 2)
    gens = {
        ("x", (1, 0)): a2.el(("x", (0, 1))),
        ("x", (0, 1)): a2.el(("x", (1, 0))),
        ("x", (-1, 0)): a2.el(("x", (0, -1))),
        ("x", (0, -1)): a2.el(("x", (-1, 0))),
    }
    sigma = extend_automorphism(a2, gens, order=2, name="flip")
    probes = a2.probe_elements()
    assert sigma.verified_order(probes) == 2
    for x in probes:
        for y in probes:
            assert sigma.apply(bracket(x, y)) == bracket(sigma.apply(x), sigma.apply(y))


def test_structure_json_round_trip():
    for letter, rank in [("A", 2), ("G", 2), ("C", 3)]:
        alg = alg_of(letter, rank)
        blob = json.dumps(structure_json(alg), sort_keys=True)
        back = algebra_from_structure_json(json.loads(blob))
        assert json.dumps(structure_json(back), sort_keys=True) == blob


def test_table_algebra_matches_source():
    alg = alg_of("B", 2)
    back = algebra_from_structure_json(structure_json(alg))
    for s in alg.probe_symbols():
        for t in alg.probe_symbols():
            lhs = bracket(alg.el(s), alg.el(t)).coeffs
            rhs = bracket(back.el(s), back.el(t)).coeffs
            assert lhs == rhs


def test_linear_helpers():
    a2 = alg_of("A", 2)
    basis = [a2.el(("h", 0)), a2.el(("h", 1))]
    v = a2.el(("h", 0)).scale(3) - a2.el(("h", 1)).scale(Fraction(1, 2))
    coords = element_coords(v, basis)
    assert coords == [Fraction(3), Fraction(-1, 2)]
    assert element_coords(a2.el(("x", (1, 0))), basis) is None
    assert span_rank(basis + [basis[0] + basis[1]]) == 2
