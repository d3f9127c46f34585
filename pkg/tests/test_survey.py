import math
import unittest
from types import SimpleNamespace

from core.app_state import SurveyState
from core.character import make_character
from core.record_writer import OrderedRecordWriter
from core.sift import decompose
from core.survey import (GrowthFit, SurveyOptions, SurveyRunner, burgess_ratio_diagnostic, find_small_zimmert,
                         fit_growth, fit_power_law, plan_discriminants, run_survey, sample_discriminants,
                         squarefree_discriminants, summarize, survey_record)
from core.zimmert import corollary_check, zimmert_set
from tests import oracles
from utils.errors import DomainError, UsageError


def fake_record(abs_d, size, error=None):
    return SimpleNamespace(abs_d=abs_d, zimmert_size=size, error=error)


def stable_fields(records):
    """Everything but the timing column."""
    return [(r.d, r.zimmert_size, r.sifted, r.sigma1, r.sigma2, r.burgess_reference, r.holds) for r in records]


class DiscriminantTests(unittest.TestCase):
    def test_examples(self):
        self.assertEqual(squarefree_discriminants(3, 15), [-3, -5, -6, -7, -10, -11, -13, -14, -15])
        self.assertEqual(squarefree_discriminants(4, 4), [])
        self.assertEqual(squarefree_discriminants(1, 2), [-1, -2])

    def test_matches_oracle(self):
        expected = [-m for m in range(500, 3001) if oracles.is_squarefree(m)]
        self.assertEqual(squarefree_discriminants(500, 3000), expected)

    def test_fundamental_filter(self):
        ds = squarefree_discriminants(1, 100, fundamental=True)
        self.assertTrue(all(-d % 4 == 3 for d in ds))
        self.assertIn(-7, ds)
        self.assertNotIn(-5, ds)
        self.assertIn(-163, squarefree_discriminants(100, 200, fundamental=True))

    def test_invalid_ranges(self):
        with self.assertRaises(UsageError):
            squarefree_discriminants(10, 5)
        with self.assertRaises(UsageError):
            squarefree_discriminants(0, 5)

    def test_geometric_sample(self):
        ds = sample_discriminants(1000, 10**6, 50)
        ms = [-d for d in ds]
        self.assertEqual(ms, sorted(set(ms)))
        self.assertTrue(all(1000 <= m <= 10**6 and oracles.is_squarefree(m) for m in ms))
        self.assertGreater(len(ms), 140)
        self.assertLessEqual(len(ms), 151)

    def test_plan_switches_to_sampling(self):
        exhaustive = plan_discriminants(7, 500, exhaustive_limit=1000)
        self.assertEqual(exhaustive, squarefree_discriminants(7, 500))
        mixed = plan_discriminants(7, 10**5, exhaustive_limit=1000, default_density=20)
        self.assertEqual(mixed[:len(exhaustive)], exhaustive)
        self.assertLess(len(mixed), 700)
        self.assertEqual([abs(d) for d in mixed], sorted(abs(d) for d in mixed))


class SurveyRecordTests(unittest.TestCase):
    def test_record_for_163_matches_standalone_calls(self):
        options = SurveyOptions()
        record = survey_record(-163, options)
        report = corollary_check(-163)
        self.assertEqual(record.nmax, 6)
        self.assertEqual(record.zimmert_size, 5)
        self.assertEqual(record.rank_lower_bound, 5)
        self.assertEqual(record.prime_support_size, 2)
        self.assertEqual((record.pi_x, record.omega_d, record.sifted), (report.pi_x, report.omega_d, report.sifted))
        self.assertEqual(record.sifted, record.sigma1 - record.sigma2)
        self.assertTrue(record.holds)
        self.assertAlmostEqual(record.burgess_reference, math.sqrt(report.x) * 652 ** (3 / 16), places=9)

        split = decompose(make_character(-163), report.x, zimmert_set(-163).prime_support, 163 ** 0.2, r=2)
        self.assertEqual((record.sigma1, record.sigma2), (split.sigma1_direct, split.sigma2))

    def test_sums_can_be_skipped(self):
        record = survey_record(-163, SurveyOptions(compute_sums=False))
        self.assertIsNone(record.sigma1)
        self.assertIsNone(record.sigma2)
        self.assertEqual(record.sifted, 1)

    def test_domain_errors_become_flagged_records(self):
        record = survey_record(-12, SurveyOptions())
        self.assertIsNotNone(record.error)
        self.assertIn("squarefree", record.error)
        self.assertFalse(record.holds)

    def test_tiny_discriminants(self):
        record = survey_record(-3, SurveyOptions())
        self.assertEqual((record.nmax, record.zimmert_size, record.sigma1, record.sigma2), (0, 0, 0, 0))
        self.assertIsNone(record.burgess_reference)
        self.assertTrue(record.holds)


class RunSurveyTests(unittest.TestCase):
    def test_small_range_all_hold(self):
        records = run_survey(squarefree_discriminants(7, 20), SurveyOptions())
        self.assertEqual([r.abs_d for r in records], [7, 10, 11, 13, 14, 15, 17, 19])
        self.assertTrue(all(r.holds for r in records))

    def test_empty_input(self):
        self.assertEqual(run_survey([], SurveyOptions()), [])

    def test_order_is_independent_of_input_order_and_blocks(self):
        ds = squarefree_discriminants(7, 400)
        reference = run_survey(ds, SurveyOptions(block_size=1000))
        shuffled = list(reversed(ds))
        chunked = run_survey(shuffled, SurveyOptions(block_size=7))
        self.assertEqual(stable_fields(reference), stable_fields(chunked))

    def test_process_pool_matches_in_process_run(self):
        ds = squarefree_discriminants(7, 600)
        serial = run_survey(ds, SurveyOptions(block_size=50))
        parallel = run_survey(ds, SurveyOptions(block_size=50, workers=2, sieve_limit=10_000))
        self.assertEqual(stable_fields(serial), stable_fields(parallel))

    def test_runner_streams_blocks_to_sink(self):
        seen = []
        runner = SurveyRunner(SurveyOptions(block_size=10), sink=lambda block: seen.extend(r.d for r in block))
        records = runner.run(squarefree_discriminants(7, 100))
        self.assertEqual(seen, [r.d for r in records])
        self.assertEqual(runner.state.progress, len(records))
        self.assertEqual(runner.state.failed, 0)
        self.assertFalse(runner.state.is_running)
        self.assertEqual(runner.state.percent, 100.0)


class GrowthFitTests(unittest.TestCase):
    def test_two_point_fit(self):
        fit = fit_growth([fake_record(100, 10), fake_record(10000, 100)])
        self.assertAlmostEqual(fit.alpha, 0.5, places=12)
        self.assertAlmostEqual(fit.log_c, 0.0, places=10)
        self.assertEqual(fit.count, 2)

    def test_recovers_synthetic_power_law(self):
        abs_ds = [-d for d in sample_discriminants(10**4, 10**5, 200)]
        records = [fake_record(m, round(2 * m ** 0.5)) for m in abs_ds]
        fit = fit_growth(records)
        self.assertAlmostEqual(fit.alpha, 0.5, delta=0.02)
        self.assertAlmostEqual(fit.log_c, math.log(2), delta=0.05)

    def test_zero_sizes_are_excluded_and_counted(self):
        fit = fit_growth([fake_record(5, 0), fake_record(6, 0), fake_record(100, 10), fake_record(10000, 100)])
        self.assertEqual((fit.count, fit.excluded), (2, 2))
        self.assertIn("excluded=2", fit.summary_line())

    def test_too_few_points(self):
        with self.assertRaises(DomainError):
            fit_growth([fake_record(100, 10), fake_record(100, 12), fake_record(7, 0)])
        with self.assertRaises(DomainError):
            fit_power_law([])

    def test_summary_line_format(self):
        line = GrowthFit(count=3, log_c=0.5, alpha=0.25, residual_rms=0.1, excluded=1).summary_line()
        self.assertEqual(line, "alpha=0.25 logc=0.5 n=3 excluded=1")

    def test_sampled_growth_exceeds_quarter(self):
        ds = sample_discriminants(10**3, 10**6, 20)
        records = run_survey(ds, SurveyOptions(compute_sums=False))
        fit = fit_growth(records)
        self.assertGreaterEqual(fit.alpha, 0.25)
        self.assertGreaterEqual(fit.residual_rms, 0.0)


class SmallZimmertTests(unittest.TestCase):
    def test_empty_sets_below_seven(self):
        self.assertEqual(find_small_zimmert(1, 10, 0), [-1, -2, -3, -5, -6])

    def test_size_one(self):
        found = find_small_zimmert(7, 100, 1)
        self.assertIn(-7, found)
        self.assertIn(-71, found)
        self.assertEqual(found, [d for d in squarefree_discriminants(7, 100)
                                 if len(oracles.zimmert_set(d)) <= 1])

    def test_huge_threshold_keeps_everything(self):
        self.assertEqual(find_small_zimmert(50, 400, 10**6), squarefree_discriminants(50, 400))

    def test_negative_threshold(self):
        with self.assertRaises(UsageError):
            find_small_zimmert(1, 10, -1)


class DiagnosticsTests(unittest.TestCase):
    def test_ratio_and_summary(self):
        records = run_survey(squarefree_discriminants(7, 300), SurveyOptions(compute_sums=False))
        ratio, ratio_d = burgess_ratio_diagnostic(records)
        expected = max(abs(r.partial_sum) / r.burgess_reference for r in records)
        self.assertAlmostEqual(ratio, expected)
        self.assertIn(ratio_d, [r.d for r in records])

        summary = summarize(records)
        self.assertEqual(summary["total"], len(records))
        self.assertEqual(summary["holds"], len(records))
        self.assertEqual(summary["failed"], 0)
        self.assertEqual(summary["min_zimmert"], 1)


class OrderedRecordWriterTests(unittest.TestCase):
    def test_out_of_order_blocks_are_released_in_order(self):
        released = []
        writer = OrderedRecordWriter(sink=released.append)
        self.assertEqual(writer.submit(2, ["c"]), 0)
        self.assertEqual(writer.submit(1, ["b"]), 0)
        self.assertEqual(writer.pending_blocks, 2)
        self.assertEqual(writer.submit(0, ["a"]), 3)
        self.assertEqual(released, [["a"], ["b"], ["c"]])
        self.assertEqual(writer.close(), ["a", "b", "c"])

    def test_duplicates_are_ignored(self):
        writer = OrderedRecordWriter()
        writer.submit(0, [1])
        with self.assertLogs(level="WARNING"):
            self.assertEqual(writer.submit(0, [1]), 0)
        self.assertEqual(writer.close(), [1])

    def test_gap_is_reported_on_close(self):
        writer = OrderedRecordWriter()
        writer.submit(1, [2])
        with self.assertLogs(level="ERROR"):
            self.assertEqual(writer.close(), [])


class SurveyStateTests(unittest.TestCase):
    def test_counts_and_extremes(self):
        state = SurveyState()
        state.total = 3
        records = [
            SimpleNamespace(d=-7, zimmert_size=1, holds=True, error=None, partial_sum=1, burgess_reference=2.0),
            SimpleNamespace(d=-163, zimmert_size=5, holds=False, error=None, partial_sum=3, burgess_reference=2.0),
            SimpleNamespace(d=-12, zimmert_size=0, holds=False, error="d must be squarefree", partial_sum=0,
                            burgess_reference=None),
        ]
        state.update_stats(records)
        self.assertEqual((state.progress, state.failed, state.errors, state.blocks_done), (3, 1, 1, 1))
        self.assertEqual((state.stats["min_zimmert"], state.stats["max_zimmert"]), (1, 5))
        self.assertEqual(state.stats["max_ratio_d"], -163)
        self.assertEqual(state.percent, 100.0)
        state.reset()
        self.assertEqual(state.progress, 0)


if __name__ == "__main__":
    unittest.main()
