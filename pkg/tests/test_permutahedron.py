import random
from fractions import Fraction
from itertools import permutations

import pytest

from eps_field.field import EpsPoly
from errors import MassTooSmall, NetworkDoesNotSort, TooManyFacets
from polytopes.permutahedron import (
    EQ,
    FACET,
    GE,
    NETWORK,
    ComparatorNetwork,
    PermSpec,
    base_vector,
    batcher_network,
    block_for,
    facet_system,
    is_satisfied,
    membership,
    network_membership,
    network_system,
    smallest_sum,
    sorts_all_binary,
)
from solvers.simplex import LpInstance, is_feasible

SAMPLES = [Fraction(1, 100), Fraction(1, 10**4)]


def variables(m):
    return [("x", i) for i in range(m)]


def random_member(rng, alpha):
    """Convex combination of three random permutations of ``alpha``."""
    weights = [Fraction(rng.randint(1, 9)) for _ in range(3)]
    total = sum(weights)
    m = len(alpha)
    x = [Fraction(0)] * m
    for w in weights:
        perm = rng.sample(range(m), m)
        for i in range(m):
            x[i] += w / total * alpha[perm[i]]
    return x


def random_point(rng, alpha):
    """A member, or a member nudged along e_i − e_j (which may leave the polytope)."""
    x = random_member(rng, alpha)
    if rng.random() < 0.5:
        i, j = rng.sample(range(len(x)), 2)
        t = Fraction(rng.randint(1, 20), 40) * alpha[-1]
        x[i] += t
        x[j] -= t
    return x


def vertex_membership(alpha, x):
    """x in conv{permutations of alpha}, decided by an exact LP over the m! vertices."""
    perms = list(permutations(alpha))
    rows = [[Fraction(p[i]) for p in perms] for i in range(len(alpha))]
    rows.append([Fraction(1)] * len(perms))
    return is_feasible(LpInstance([Fraction(0)] * len(perms), rows, [EQ] * len(rows),
                                  list(x) + [Fraction(1)]))


class TestBaseVector:
    def test_numeric_examples(self):
        assert base_vector(1, 0, 3, Fraction(1, 10)) == [Fraction(89, 100), Fraction(1, 10), Fraction(1, 100)]
        assert base_vector(Fraction(1, 10), 1, 2, Fraction(1, 10)) == [Fraction(9, 100), Fraction(1, 100)]

    def test_single_coordinate(self):
        assert base_vector(EpsPoly.one(), 2, 1) == [EpsPoly.one()]

    def test_symbolic_sum_is_mass(self):
        rho = EpsPoly([1, 3])
        for k in range(3):
            for m in range(1, 6):
                assert sum(base_vector(rho, k, m), EpsPoly.zero()) == rho

    def test_mass_too_small(self):
        with pytest.raises(MassTooSmall):
            base_vector(EpsPoly.eps_power(2), 1, 3)
        with pytest.raises(MassTooSmall):
            base_vector(Fraction(1, 200), 1, 2, Fraction(1, 10))

    def test_ratio_property(self):
        rng = random.Random(3)
        for _ in range(200):
            eps0 = Fraction(1, rng.randint(3, 40))
            k, m = rng.randint(0, 3), rng.randint(2, 6)
            rho = eps0 ** k + Fraction(rng.randint(0, 50), 50)
            p = base_vector(rho, k, m, eps0)
            assert all(p[i] >= p[i + 1] / (2 * eps0) for i in range(m - 1))


class TestFacetSystem:
    def test_counts(self):
        block = facet_system(PermSpec(0, 3), variables(3))
        assert len(block.equalities) == 1
        assert len(block.inequalities) == 6
        assert block.provenance == FACET

    def test_bounds_for_three_coordinates(self):
        assert smallest_sum(0, 3, 1) == EpsPoly.eps_power(2)
        assert smallest_sum(0, 3, 2) == EpsPoly([0, 1, 1])

    @pytest.mark.parametrize("k", [0, 1, 3])
    def test_binary_block_is_box_plus_mass(self, k):
        xa, xb = ("x", "a"), ("x", "b")
        block = facet_system(PermSpec(k, 2), [xa, xb])
        one = Fraction(1)
        expected = {
            (((xa, one), (xb, one)), EQ, EpsPoly.one()),
            (((xa, one),), GE, EpsPoly.eps_power(k + 1)),
            (((xb, one),), GE, EpsPoly.eps_power(k + 1)),
        }
        assert {(c.coeffs, c.sense, c.rhs) for c in block.constraints} == expected

    def test_variable_mass_moves_to_lhs(self):
        parent = ("x", "parent")
        block = facet_system(PermSpec(1, 2, mass_var=parent), variables(2))
        mass = block.equalities[0]
        assert (parent, Fraction(-1)) in mass.coeffs
        assert mass.rhs.is_zero

    def test_threshold(self):
        with pytest.raises(TooManyFacets):
            facet_system(PermSpec(0, 4), variables(4), threshold=3)
        assert block_for(PermSpec(0, 4), variables(4), threshold=3).provenance == NETWORK


class TestNetworks:
    @pytest.mark.parametrize("m,gates", [(1, 0), (2, 1), (3, 3), (4, 5)])
    def test_gate_counts(self, m, gates):
        assert len(batcher_network(m).gates) == gates

    @pytest.mark.parametrize("m", range(1, 10))
    def test_zero_one_principle(self, m):
        assert sorts_all_binary(batcher_network(m))

    def test_rejects_non_sorting_network(self):
        with pytest.raises(NetworkDoesNotSort):
            network_system(PermSpec(0, 3), variables(3), ComparatorNetwork(3, ((0, 1),)))

    def test_single_wire_is_pinned_to_mass(self):
        block = network_system(PermSpec(0, 1), variables(1))
        assert block.wires == ()
        assert [(c.sense, c.rhs) for c in block.constraints] == [(EQ, EpsPoly.one())]

    def test_two_wires(self):
        block = network_system(PermSpec(0, 2), variables(2))
        assert len(block.wires) == 2
        assert len(block.inequalities) == 2
        eps0 = Fraction(1, 10)
        assert network_membership(block, [Fraction(9, 10), Fraction(1, 10)], eps0)
        assert network_membership(block, [Fraction(1, 2), Fraction(1, 2)], eps0)
        assert not network_membership(block, [Fraction(19, 20), Fraction(1, 20)], eps0)


class TestMembership:
    def test_examples(self):
        spec = PermSpec(0, 3)
        eps0 = Fraction(1, 10)
        assert membership(spec, [Fraction(1, 3)] * 3, eps0)
        assert not membership(spec, [Fraction(1, 2), Fraction(1, 2) - Fraction(1, 1000), Fraction(1, 1000)], eps0)
        for perm in permutations(base_vector(1, 0, 3, eps0)):
            assert membership(spec, perm, eps0)

    @pytest.mark.parametrize("m", [2, 3, 4])
    @pytest.mark.parametrize("k", [0, 2])
    @pytest.mark.parametrize("eps0", SAMPLES)
    def test_facets_agree_with_vertices(self, m, k, eps0):
        rng = random.Random(1000 * m + 10 * k + eps0.denominator)
        spec = PermSpec(k, m)
        alpha = base_vector(1, k, m, eps0)
        block = facet_system(spec, variables(m))
        for _ in range(100):
            x = random_point(rng, alpha)
            expected = vertex_membership(alpha, x)
            assert membership(spec, x, eps0) == expected
            assert is_satisfied(block, dict(zip(variables(m), x)), eps0) == expected

    @pytest.mark.parametrize("m", [3, 4, 5])
    @pytest.mark.parametrize("eps0", [Fraction(1, 5), *SAMPLES])
    def test_network_agrees_with_facets(self, m, eps0):
        rng = random.Random(m * eps0.denominator)
        spec = PermSpec(1, m)
        alpha = base_vector(1, 1, m, eps0)
        block = network_system(spec, variables(m))
        for _ in range(100):
            x = random_point(rng, alpha)
            assert network_membership(block, x, eps0) == membership(spec, x, eps0)


class TestModifications:
    def test_moving_mass_towards_a_small_coordinate(self):
        rng = random.Random(5)
        eps0 = Fraction(1, 5)
        for _ in range(200):
            m, k = rng.randint(2, 4), rng.randint(0, 2)
            spec = PermSpec(k, m)
            x = random_member(rng, base_vector(1, k, m, eps0))
            c, other = rng.sample(range(m), 2)
            if not x[c] > 2 * eps0 * x[other]:
                continue
            delta = x[c]
            for _ in range(80):
                y = list(x)
                y[c] -= delta
                y[other] += delta
                if membership(spec, y, eps0):
                    break
                delta /= 2
            else:
                pytest.fail(f"no admissible shift for {x} from {c} to {other}")

    def test_adding_mass(self):
        rng = random.Random(6)
        eps0 = Fraction(1, 4)
        for _ in range(200):
            m, k = rng.randint(2, 4), rng.randint(0, 2)
            rho = Fraction(1)
            x = random_member(rng, base_vector(rho, k, m, eps0))
            delta = Fraction(rng.randint(1, 30), 10)
            c = rng.randrange(m)
            x[c] += delta
            assert membership(PermSpec(k, m), x, eps0, rho=rho + delta)

    def test_removing_mass_from_the_largest_coordinate(self):
        rng = random.Random(7)
        eps0 = Fraction(1, 10)
        for _ in range(200):
            m, k = rng.randint(2, 4), rng.randint(0, 2)
            rho = Fraction(3, 2)
            assert rho > max(eps0 ** k, 2 * m * eps0 ** (k + 1))
            x = random_member(rng, base_vector(rho, k, m, eps0))
            c = max(range(m), key=lambda i: x[i])
            bound = min(rho - eps0 ** k, rho / m - 2 * eps0 ** (k + 1))
            delta = bound * Fraction(rng.randint(1, 10), 10)
            x[c] -= delta
            assert membership(PermSpec(k, m), x, eps0, rho=rho - delta)
