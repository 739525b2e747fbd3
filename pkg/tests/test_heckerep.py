import itertools

import pytest
from hypothesis import given, strategies as st

from cmslab import heckerep as hr
from cmslab.exactfun import VariableSet
from cmslab.spinspace import identity_perm, transposition

Q, S = hr.QUANTUM, hr.SEMICLASSICAL


def _all_pass(reports):
    bad = [(r.identity, r.parameters, r.witness) for r in reports if not r.passed]
    assert not bad, bad[:3]


def test_momentum_is_euler_operator():
    vs = VariableSet.cms(2)
    z1, hbar = vs.gen("z1"), vs.gen("hbar")
    p = hr.NormalOrderedOperator.momentum(2, Q, 1)
    z = hr.NormalOrderedOperator.scalar(2, Q, z1)
    assert p * z == z1 * p + hbar * z1


def test_reflection_moves_coordinates():
    vs = VariableSet.cms(2)
    K = hr.K(1, 2, 2, Q)
    lhs = K * hr.NormalOrderedOperator.scalar(2, Q, vs.gen("z1"))
    rhs = vs.gen("z2") * K
    assert lhs == rhs
    assert K * K == hr.NormalOrderedOperator.scalar(2, Q, 1)


def _atom(n, kind, choice):
    vs = VariableSet.cms(n)
    tag, i = choice
    if tag == "z":
        return hr.NormalOrderedOperator.scalar(n, kind, vs.gen(f"z{i}") + vs.gen("hbar"))
    if tag == "p":
        return hr.NormalOrderedOperator.momentum(n, kind, i)
    w = list(itertools.permutations(range(n)))[i]
    return hr.NormalOrderedOperator.perm(n, kind, w)


atoms = st.tuples(st.sampled_from(["z", "p", "K"]), st.integers(1, 3))


@given(st.lists(atoms, min_size=3, max_size=3), st.sampled_from([Q, S]))
def test_multiplication_is_associative(choices, kind):
    a, b, c = (_atom(3, kind, ch) for ch in choices)
    assert (a * b) * c == a * (b * c)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("kind", [Q, S])
def test_hecke_and_coordinate_relations(n, kind):
    _all_pass(hr.hecke_relations(n, kind))
    _all_pass(hr.coordinate_relations(n, kind))


def test_hecke_report_names():
    reports = hr.hecke_relations(3, Q)
    assert any("degenerate affine Hecke" in r.identity for r in reports)


def test_kcancel_three_sites():
    _all_pass(hr.kcancel(3))


@pytest.mark.parametrize("k,n", [(2, 2), (2, 3), (3, 3)])
def test_goldens(k, n):
    assert hr.hamiltonian_golden(k, n).passed


def test_untwisted_restriction_flips_exchange_sign():
    built = hr.restrict_to_symmetric(hr.symmetric_hamiltonian(2, 2, Q), twist=False)
    assert hr.spin_table_difference(built, hr.displayed_h2(2)) is not None


@pytest.mark.parametrize("k,n", [(1, 2), (2, 2), (2, 3), (3, 3)])
def test_unity_lemma(k, n):
    assert hr.unity_lemma(k, n).passed


@pytest.mark.parametrize("k,n", [(2, 2), (2, 3), (3, 3), (3, 4)])
def test_weyl_h1_matches_closed_form_table(k, n):
    split = hr.semiclassical_split(hr.symmetric_hamiltonian(k, n, Q))
    table = hr.displayed_h1_table(k, n)
    got = split.weyl_h1()
    assert set(got) == set(table)
    assert all(got[w] == table[w] for w in table)


def test_ordering_correction_nonzero_for_quartic():
    split = hr.semiclassical_split(hr.symmetric_hamiltonian(4, 3, Q))
    ident = identity_perm(3)
    assert split.h1.get(ident) != split.weyl_h1().get(ident)


def test_lax_determinant_two_sites():
    vs = VariableSet.cms(2)
    z1, z2, p1, p2, lam = (vs.gen(v) for v in ("z1", "z2", "p1", "p2", "lam"))
    direct = (lam + p1) * (lam + p2) - (z1 / (z1 - z2)) * (z2 / (z2 - z1))
    assert hr.lax_determinant(2) == direct


def test_generating_function_three_sites():
    _all_pass(hr.classical_generating_check(3, samples=3, seed=1))


def test_cost_guard():
    with pytest.raises(hr.CostGuardError):
        hr.symmetric_hamiltonian(2, 9, Q)
    with pytest.raises(ValueError):
        hr.NormalOrderedOperator.momentum(2, "weird", 1)


def test_kind_mismatch():
    with pytest.raises(TypeError):
        hr.K(1, 2, 2, Q) + hr.K(1, 2, 2, S)


def test_transposition_word():
    w = transposition(1, 3, 3)
    assert hr.perm_word(w)


def test_symmetrised_exchange_breaks_commutativity():
    # z_i/(z_i - z_j) K_ij for every i != j (no Cherednik asymmetry) is not a commuting family
    vs = VariableSet.cms(3)
    z = [None] + [vs.gen(f"z{i}") for i in range(1, 4)]

    def bad(j):
        op = hr.NormalOrderedOperator.momentum(3, Q, j)
        for i in range(1, 4):
            if i != j:
                op = op + hr.NormalOrderedOperator.perm(3, Q, transposition(i, j, 3), z[i] / (z[i] - z[j]))
        return op

    assert not hr.commutator(bad(1), bad(2)).is_zero()


def test_doubled_coupling_breaks_hecke_relation():
    def bad(j):
        d = hr.dunkl(j, 3, Q)
        p = hr.NormalOrderedOperator.momentum(3, Q, j)
        return p + (d - p) * 2

    K12 = hr.K(1, 2, 3, Q)
    assert K12 * bad(1) - bad(2) * K12 != hr.NormalOrderedOperator.scalar(3, Q, 1)
