import random
from fractions import Fraction

import pytest

from exactinterp.bounds import (
    BoundSet,
    DuplicateNodeError,
    NodeStats,
    coefficient_error_bound,
    epsilon_multivariate,
    epsilon_univariate,
    estimate_degree_bounds,
    estimate_denominator_bound,
    node_stats,
)
from exactinterp.expr import Det, Var, parse_infix
from exactinterp.rational import parse_rational
from oracles import expand, random_expr

import cases

F = Fraction


def stats(lam, m):
    return NodeStats(parse_rational(lam), parse_rational(m))


class TestNodeStats:
    def test_univariate_case_nodes(self):
        s = node_stats([parse_rational(x) for x in cases.UNI_NODES])
        assert s == NodeStats(F("0.4001"), F("7.2001"))

    def test_unit_spaced(self):
        for n in (1, 4, 9):
            s = node_stats([F(i) for i in range(n + 1)])
            assert s.lam == 1 and s.m_bound == max(1, n)

    def test_bivariate_case_x(self):
        s = node_stats([F(x) for x in ("0.1", "0.5", "1.2", "1.3")])
        assert s.lam == F(1, 10) and s.m_bound == F(13, 10)

    def test_magnitude_floor_and_negatives(self):
        s = node_stats([F(-1, 2), F(1, 4)])
        assert s.m_bound == 1 and s.lam == F(3, 4)
        assert node_stats([F(-3), F(0)]).m_bound == 3

    def test_singleton(self):
        assert node_stats([F(5)]) == NodeStats(F(1), F(5))

    def test_duplicate(self):
        with pytest.raises(DuplicateNodeError):
            node_stats([F(1), F(2), F(1)])


class TestEpsilon:
    def test_univariate_case(self):
        eps = epsilon_univariate(8, stats("0.4001", "7.2001"), 181)
        assert abs(eps - cases.UNI_EPS_PRINTED) / eps <= F(1, 1000)

    def test_degree_one_by_hand(self):
        assert epsilon_univariate(1, NodeStats(F(1), F(1)), 2) == F(1, 16)

    def test_degree_zero(self):
        assert epsilon_univariate(0, stats("0.3", "4"), 7) == F(1, 2 * 49)

    def test_bivariate_formula_value(self):
        # direct substitution into the two-variable budget
        lx, ly, mx, my = F("0.1"), F("0.5"), F("1.3"), F("2.6")
        by_hand = lx**3 * ly**3 / (2 * 4 * 4 * 3 * 3 * mx**3 * my**3 * 13**2)
        eps = epsilon_multivariate([3, 3], [NodeStats(lx, mx), NodeStats(ly, my)], 13)
        assert eps == by_hand
        assert abs(float(eps) - 6.6509e-11) < 1e-15

    def test_one_variable_reduces(self):
        s = stats("0.25", "3")
        assert epsilon_multivariate([5], [s], 17) == epsilon_univariate(5, s, 17)

    def test_trivariate_stated_stats(self):
        ss = [stats("0.6", "2.7"), stats("0.7", "2.2"), stats("0.4", "2.8")]
        eps = epsilon_multivariate([3, 2, 3], ss, 231)
        by_hand = (F("0.6")**3 * F("0.7")**2 * F("0.4")**3
                   / (2 * 231**2 * (4 * 3 * F("2.7")**3) * (3 * 2 * F("2.2")**2) * (4 * 3 * F("2.8")**3)))
        assert eps == by_hand
        assert abs(float(eps) - 3.51e-14) / 3.51e-14 < 1e-3

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            epsilon_multivariate([1], [], 5)
        with pytest.raises(ValueError):
            epsilon_univariate(2, NodeStats(F(1), F(1)), 1)
        with pytest.raises(ValueError):
            NodeStats(F(0), F(1))
        with pytest.raises(ValueError):
            NodeStats(F(1), F(1, 2))


def random_stats(rng):
    return NodeStats(F(rng.randint(1, 40), rng.randint(1, 20)), F(rng.randint(20, 90), rng.randint(1, 20)) + 1)


def test_inverse_identity_random():
    rng = random.Random(13)
    for _ in range(200):
        r = rng.randint(1, 4)
        degs = [rng.randint(0, 6) for _ in range(r)]
        ss = [random_stats(rng) for _ in range(r)]
        N = rng.randint(2, 10**4)
        eps = epsilon_multivariate(degs, ss, N)
        assert coefficient_error_bound(degs, ss, eps) == F(1, 2 * N * N)


def test_coefficient_bound_examples():
    s = stats("0.4001", "7.2001")
    eps = epsilon_univariate(8, s, 181)
    assert coefficient_error_bound([8], [s], eps) == F(1, 2 * 181**2)
    assert coefficient_error_bound([8], [s], F(0)) == 0


def stats_from_nodes(rng, count):
    nodes = set()
    while len(nodes) < count:
        nodes.add(F(rng.randint(-60, 60), rng.randint(1, 12)))
    return node_stats(sorted(nodes))


def test_monotonicity():
    # stats come from real node sets big enough for the raised degree, so the
    # gap can never exceed what that many nodes allow
    rng = random.Random(17)
    for _ in range(200):
        r = rng.randint(1, 3)
        degs = [rng.randint(0, 5) for _ in range(r)]
        ss = [stats_from_nodes(rng, d + 2) for d in degs]
        N = rng.randint(2, 500)
        base = epsilon_multivariate(degs, ss, N)
        k = rng.randrange(r)
        more_deg = list(degs)
        more_deg[k] += 1
        bigger_m = list(ss)
        bigger_m[k] = NodeStats(ss[k].lam, ss[k].m_bound + F(1, 3))
        bigger_lam = list(ss)
        bigger_lam[k] = NodeStats(ss[k].lam * F(3, 2), ss[k].m_bound)
        assert epsilon_multivariate(more_deg, ss, N) < base
        assert epsilon_multivariate(degs, ss, N + 1) < base
        if degs[k] == 0:
            # a single-node axis contributes no node-dependent factor
            assert epsilon_multivariate(degs, bigger_m, N) == base
        else:
            assert epsilon_multivariate(degs, bigger_m, N) < base
            assert epsilon_multivariate(degs, bigger_lam, N) > base


def test_boundset_consistency():
    ss = (stats("0.1", "1.3"), stats("0.5", "2.6"))
    b = BoundSet.build([3, 3], ss, 13)
    assert b.coefficient_tolerance == F(1, 2 * 13**2)
    with pytest.raises(ValueError):
        BoundSet((3, 3), 13, ss, b.epsilon * 2)


class TestStructuralBounds:
    def test_cube(self):
        assert estimate_degree_bounds(parse_infix("(x+1)^3"), ["x"]) == [3]

    def test_det_degree(self):
        x = Var("x")
        assert estimate_degree_bounds(Det(((x, 1), (1, x))), ["x"]) == [2]

    def test_two_vars(self):
        assert estimate_degree_bounds(parse_infix("x^2*y + y^3"), ["x", "y"]) == [2, 3]

    def test_denominators(self):
        assert estimate_denominator_bound(parse_infix("1/2*x + 1/3")) == 6
        assert estimate_denominator_bound(parse_infix("3*x^2 - 7")) == 2
        x = Var("x")
        m = Det(((x / 2, Fraction(1, 3)), (1, x)))
        assert estimate_denominator_bound(m) == 6

    def test_soundness_random(self):
        rng = random.Random(23)
        variables = ["x", "y"]
        for _ in range(250):
            e = random_expr(rng, variables)
            terms = expand(e, variables)
            degs = estimate_degree_bounds(e, variables)
            N = estimate_denominator_bound(e)
            for exps, c in terms.items():
                assert all(a <= d for a, d in zip(exps, degs))
                assert c.denominator <= N
                assert N % c.denominator == 0
