import math
import random
import unittest
from fractions import Fraction

from core.arith import ModulusClass, RTag, build_sieve, classify_modulus, is_squarefree, prime_list, tau
from core.character import make_character, partial_sum
from core.sift import (BurgessParams, SiftPrimeSet, burgess_term, decompose, inner_sieve_weight,
                       large_gcd_count, large_gcd_count_bound, optimal_r, reduced_modulus_bound,
                       sifted_sum, squarefree_divisors, theorem_rhs)
from tests import oracles
from utils.errors import DomainError, UsageError

ANY_R_MILLION = ModulusClass(RTag.ANY_R, 10**6)


class SiftPrimeSetTests(unittest.TestCase):
    def test_of_sorts_and_deduplicates(self):
        P = SiftPrimeSet.of([5, 3, 5])
        self.assertEqual(P.primes, (3, 5))
        self.assertEqual(len(P), 2)
        self.assertTrue(P.divides(10))
        self.assertFalse(P.divides(14))
        self.assertEqual(P.gcd_with(30), 15)

    def test_rejects_composites_and_unsorted(self):
        with self.assertRaises(UsageError):
            SiftPrimeSet.of([3, 9])
        with self.assertRaises(UsageError):
            SiftPrimeSet.of([1])
        with self.assertRaises(UsageError):
            SiftPrimeSet((5, 3))


class DivisorEnumerationTests(unittest.TestCase):
    def test_matches_brute_force_filtering(self):
        rng = random.Random(7)
        pool = [int(p) for p in prime_list(40)]
        for _ in range(60):
            primes = sorted(rng.sample(pool, rng.randint(0, 8)))
            upper = rng.choice([1, 10, 100, 1000, 10**5])
            lower = rng.choice([0, 1, 5, 50])
            got = sorted(t for t, _ in squarefree_divisors(primes, upper, lower))
            self.assertEqual(got, oracles.squarefree_products(primes, lower, upper), (primes, lower, upper))

    def test_twelve_primes(self):
        primes = [int(p) for p in prime_list(37)]
        self.assertEqual(len(primes), 12)
        got = sorted(t for t, _ in squarefree_divisors(primes, 10**6))
        self.assertEqual(got, oracles.squarefree_products(primes, 0, 10**6))

    def test_signs_are_mobius(self):
        for t, mu in squarefree_divisors([2, 3, 5, 7], 210):
            self.assertEqual(mu, oracles.mobius(t))

    def test_upper_below_one_is_empty(self):
        self.assertEqual(list(squarefree_divisors([3, 5], 0.5)), [])


class InnerWeightTests(unittest.TestCase):
    def test_examples(self):
        P = SiftPrimeSet((3, 5))
        self.assertEqual(inner_sieve_weight(7, P, 10), 1)
        self.assertEqual(inner_sieve_weight(15, P, 20), 0)
        self.assertEqual(inner_sieve_weight(15, P, 4), 0)
        self.assertEqual(inner_sieve_weight(15, P, 2), 1)

    def test_vanishes_when_gcd_at_most_R(self):
        rng = random.Random(11)
        pool = [int(p) for p in prime_list(30)]
        for _ in range(20):
            P = SiftPrimeSet(tuple(sorted(rng.sample(pool, rng.randint(1, 6)))))
            R = rng.choice([2, 5, 30, 100, 1000])
            for n in range(1, 10_001):
                weight = inner_sieve_weight(n, P, R)
                g = P.gcd_with(n)
                if 1 < g <= R:
                    self.assertEqual(weight, 0, (n, P, R))
                if g == 1:
                    self.assertEqual(weight, 1)
                self.assertLessEqual(abs(weight), tau(n))

    def test_matches_subset_oracle(self):
        P = SiftPrimeSet((2, 3, 5, 7, 11))
        for n in range(1, 2311):
            for R in (1, 6, 35, 100):
                self.assertEqual(inner_sieve_weight(n, P, R), oracles.inner_weight(n, P.primes, R))


class SiftedSumTests(unittest.TestCase):
    def test_examples(self):
        chi163 = make_character(-163)
        self.assertEqual(sifted_sum(chi163, 6.32, SiftPrimeSet((3, 5))), 1)
        self.assertEqual(sifted_sum(chi163, 500, SiftPrimeSet()), partial_sum(chi163, 500))
        self.assertEqual(sifted_sum(make_character(-7), 0.5, SiftPrimeSet((3,))), 0)

    def test_against_oracle(self):
        for d in (-7, -71, -163, -1155):
            for primes in ((), (3,), (3, 5), (2, 7, 11)):
                self.assertEqual(sifted_sum(make_character(d), 300, SiftPrimeSet(primes)),
                                 oracles.sifted_sum(d, 300, primes))


class DecomposeTests(unittest.TestCase):
    def test_hand_example(self):
        report = decompose(make_character(-163), 6, SiftPrimeSet((3, 5)), 1)
        self.assertEqual(report.sigma1_direct, -1)
        self.assertEqual(report.sigma2, -2)
        self.assertEqual(report.sifted, 1)
        self.assertTrue(report.identity_holds)
        self.assertFalse(report.R_in_range)

    def test_empty_sieve(self):
        chi = make_character(-71)
        report = decompose(chi, 250, SiftPrimeSet(), 10)
        self.assertEqual(report.sigma2, 0)
        self.assertEqual(report.sifted, report.sigma1_direct)
        self.assertEqual(report.sifted, partial_sum(chi, 250))

    def test_R_below_one_is_rejected(self):
        with self.assertRaises(UsageError):
            decompose(make_character(-7), 10, SiftPrimeSet(), 0.5)

    def test_nonpositive_r_is_rejected(self):
        chi = make_character(-163)
        for r in (0, -2):
            with self.assertRaisesRegex(DomainError, "positive integer"):
                decompose(chi, 6, SiftPrimeSet((3, 5)), 2, r=r)
        with self.assertRaises(DomainError):
            decompose(chi, 0.5, SiftPrimeSet(), 1, r=0)

    def test_exact_identity_on_random_tuples(self):
        rng = random.Random(1729)
        table = build_sieve(20_000)
        radicands = [m for m in range(1, 10_001) if is_squarefree(m, table)]
        pool = [int(p) for p in prime_list(50)]
        for _ in range(1000):
            d = -rng.choice(radicands)
            x = rng.uniform(1, 500)
            R = rng.uniform(1, x)
            P = SiftPrimeSet(tuple(sorted(rng.sample(pool, rng.randint(0, len(pool))))))
            report = decompose(make_character(d, table=table), x, P, R, r=1, table=table)
            self.assertEqual(report.sifted, report.sigma1_direct - report.sigma2, (d, x, R, P))
            self.assertEqual(report.sigma1_direct, report.sigma1_interchanged, (d, x, R, P))

    def test_sigma2_counts_only_non_coprime_terms(self):
        chi = make_character(-163)
        P = SiftPrimeSet((3, 5, 7))
        report = decompose(chi, 120, P, 16)
        expected = sum(oracles.chi(-163, n) * oracles.inner_weight(n, P.primes, 16)
                       for n in range(1, 121) if P.divides(n))
        self.assertEqual(report.sigma2, expected)

    def test_reference_terms_use_chosen_r(self):
        report = decompose(make_character(-163), 6, SiftPrimeSet((3, 5)), 2, r=1)
        self.assertEqual(report.r_used, 1)
        self.assertAlmostEqual(report.burgess_reference, 2 * math.sqrt(652), places=6)
        self.assertAlmostEqual(report.tail_reference, 3.2, places=9)


class BurgessTests(unittest.TestCase):
    def test_term_examples(self):
        q652 = classify_modulus(652)
        self.assertAlmostEqual(burgess_term(BurgessParams(652, 6, 1, q652)), 25.5343, delta=1e-3)
        self.assertAlmostEqual(burgess_term(BurgessParams(10**6, 10**3, 2, ANY_R_MILLION)), 421.70, delta=0.01)

    def test_restricted_modulus_rejects_r4(self):
        with self.assertRaises(DomainError):
            burgess_term(BurgessParams.for_modulus(27, 100, 4))

    def test_x_below_one(self):
        with self.assertRaises(UsageError):
            burgess_term(BurgessParams(652, 0.5, 1, classify_modulus(652)))

    def test_optimal_r_examples(self):
        r, bound = optimal_r(10**6, 10**3, ANY_R_MILLION, 10)
        self.assertEqual(r, 2)
        self.assertAlmostEqual(bound, 421.70, delta=0.01)

        cls = classify_modulus(652)
        r, bound = optimal_r(652, 6, cls, 8)
        candidates = [burgess_term(BurgessParams(652, 6, k, cls)) for k in range(1, 9)]
        self.assertEqual(bound, min(candidates))
        self.assertEqual(r, candidates.index(min(candidates)) + 1)

    def test_optimal_r_at_x_one(self):
        for q in (28, 652, 27, 10**6):
            cls = classify_modulus(q)
            r, bound = optimal_r(q, 1, cls, 10)
            self.assertLessEqual(bound, burgess_term(BurgessParams(q, 1, 1, cls)))

    def test_restricted_cap(self):
        r, _ = optimal_r(10**6, 10**6, classify_modulus(10**6), 10)
        self.assertLessEqual(r, 3)


class TheoremRhsTests(unittest.TestCase):
    def test_examples(self):
        _, tail = theorem_rhs(652, 6, 2, 1, SiftPrimeSet())
        self.assertEqual(tail, 0)

        main, tail = theorem_rhs(652, 6, 2, 1, SiftPrimeSet((3, 5)))
        self.assertAlmostEqual(main, 51.07, delta=0.01)
        self.assertAlmostEqual(tail, 3.2, places=9)

    def test_inadmissible_r(self):
        with self.assertRaises(DomainError):
            theorem_rhs(27, 100, 2, 4, SiftPrimeSet())

    def test_main_term_monotone_in_R_and_q(self):
        P = SiftPrimeSet((3, 5, 7))
        mains = [theorem_rhs(652, 100, R, 3, P)[0] for R in (1, 2, 5, 10, 50, 100)]
        self.assertEqual(mains, sorted(mains))
        mains = [theorem_rhs(4 * m, 100, 10, 3, P)[0] for m in (7, 71, 163, 1155, 9999)]
        self.assertEqual(mains, sorted(mains))

    def test_tail_is_exact_reciprocal_sum(self):
        P = SiftPrimeSet((3, 5, 7, 11))
        _, tail = theorem_rhs(652, 200, 10, 2, P)
        expected = 200 * sum(Fraction(1, t) for t in oracles.squarefree_products(P.primes, 10, 200))
        self.assertAlmostEqual(tail, float(expected), places=9)


class LargeGcdTests(unittest.TestCase):
    def test_count_bounded_by_divisor_sum(self):
        for primes in ((3, 5), (2, 3, 5, 7), (3, 7, 11, 13, 17)):
            P = SiftPrimeSet(primes)
            for R in (1, 3, 10, 40):
                count = large_gcd_count(500, P, R)
                self.assertEqual(count, sum(1 for n in range(1, 501) if P.gcd_with(n) > R))
                self.assertLessEqual(count, large_gcd_count_bound(500, P, R))

    def test_reduced_modulus_bound(self):
        value = reduced_modulus_bound(4, 163, 100, 2)
        self.assertAlmostEqual(value, 4 * 25 ** 0.5 * 163 ** (3 / 16), places=9)
        with self.assertRaises(DomainError):
            reduced_modulus_bound(4, 6, 100, 2)


if __name__ == "__main__":
    unittest.main()
