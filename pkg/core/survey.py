"""
Range sweeps over discriminants.

Each squarefree |d| in a range becomes one SurveyRecord holding the Zimmert
set size, the corollary quantities and (optionally) the sigma1/sigma2 split.
SurveyRunner spreads blocks of discriminants over a process pool and merges
them back into ascending |d| order.
"""
import asyncio
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from time import perf_counter
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import psutil

from core.app_state import SurveyState
from core.arith import (DEFAULT_SIEVE_LIMIT, FactorTable, build_sieve, default_table,
                        is_squarefree, prime_list, use_table)
from core.character import make_character, partial_sum
from core.record_writer import OrderedRecordWriter
from core.sift import BurgessParams, burgess_term, decompose
from core.zimmert import corollary_report, zimmert_set
from utils.errors import DomainError, LabError, UsageError


@dataclass(frozen=True)
class SurveyOptions:
    compute_sums: bool = True
    workers: int = 1
    block_size: int = 500
    burgess_r: int = 2
    c: float = 0.2
    epsilon: float = 0.0
    sieve_limit: int = DEFAULT_SIEVE_LIMIT


@dataclass(frozen=True)
class SurveyRecord:
    d: int
    abs_d: int
    nmax: int
    zimmert_size: int
    prime_support_size: int
    rank_lower_bound: int
    pi_x: int
    omega_d: int
    sifted: int
    sigma1: Optional[int]
    sigma2: Optional[int]
    burgess_reference: Optional[float]
    holds: bool
    elapsed: float
    nonneg_ok: bool = True
    partial_sum: int = 0
    error: Optional[str] = None


@dataclass(frozen=True)
class GrowthFit:
    count: int
    log_c: float
    alpha: float
    residual_rms: float
    excluded: int = 0

    def summary_line(self) -> str:
        return (f"alpha={self.alpha:.6g} logc={self.log_c:.6g} "
                f"n={self.count} excluded={self.excluded}")


def squarefree_discriminants(lo: int, hi: int, fundamental: bool = False) -> List[int]:
    """d = -m for squarefree lo <= m <= hi, ascending in |d|.

    With `fundamental`, only m = 3 (mod 4), i.e. -m itself a fundamental
    discriminant.
    """
    if lo < 1 or lo > hi:
        raise UsageError(f"invalid range {lo}:{hi}")
    keep = np.ones(hi - lo + 1, dtype=bool)
    for p in prime_list(math.isqrt(hi)):
        square = int(p) * int(p)
        first = -(-lo // square) * square
        keep[first - lo::square] = False
    ms = np.flatnonzero(keep) + lo
    if fundamental:
        ms = ms[ms % 4 == 3]
    return [-int(m) for m in ms]


def sample_discriminants(lo: int, hi: int, density: int, fundamental: bool = False) -> List[int]:
    """Geometric sample: the next admissible m at or above lo * 10^(k / density)."""
    if lo < 1 or lo > hi:
        raise UsageError(f"invalid range {lo}:{hi}")
    if density < 1:
        raise UsageError(f"sample density must be positive, got {density}")

    picked: List[int] = []
    k = 0
    while True:
        target = math.ceil(lo * 10 ** (k / density))
        if target > hi:
            break
        k += 1
        m = max(target, picked[-1] + 1 if picked else lo)
        while m <= hi and not (is_squarefree(m) and (not fundamental or m % 4 == 3)):
            m += 1
        if m > hi:
            break
        picked.append(m)
    return [-m for m in picked]


def plan_discriminants(lo: int, hi: int,
                       density: Optional[int] = None,
                       exhaustive_limit: int = 100_000,
                       default_density: int = 200,
                       fundamental: bool = False) -> List[int]:
    """Explicit density samples the whole range; otherwise exhaustive up to
    exhaustive_limit and geometric sampling above it."""
    if density is not None:
        return sample_discriminants(lo, hi, density, fundamental)
    if hi <= exhaustive_limit:
        return squarefree_discriminants(lo, hi, fundamental)
    head = squarefree_discriminants(lo, exhaustive_limit, fundamental) if lo <= exhaustive_limit else []
    tail = sample_discriminants(max(lo, exhaustive_limit + 1), hi, default_density, fundamental)
    return head + tail


def survey_record(d: int, options: SurveyOptions, table: Optional[FactorTable] = None) -> SurveyRecord:
    """One SurveyRecord; domain failures come back as a flagged record."""
    start = perf_counter()
    abs_d = -d
    try:
        table = table or default_table()
        zset = zimmert_set(d, table)
        chi = make_character(d, table=table)
        report = corollary_report(zset, chi, table)

        sigma1 = sigma2 = None
        if options.compute_sums:
            if report.x_floor >= 1:
                R = max(1.0, abs_d ** options.c)
                split = decompose(chi, report.x, zset.prime_support, R,
                                  r=options.burgess_r, epsilon=options.epsilon, table=table)
                sigma1, sigma2 = split.sigma1_direct, split.sigma2
            else:
                sigma1 = sigma2 = 0

        burgess_reference = None
        if report.x >= 1:
            burgess_reference = burgess_term(
                BurgessParams.for_modulus(chi.q, report.x, options.burgess_r, options.epsilon, table))

        return SurveyRecord(
            d=d,
            abs_d=abs_d,
            nmax=zset.nmax,
            zimmert_size=zset.size,
            prime_support_size=len(zset.prime_support),
            rank_lower_bound=zset.size,
            pi_x=report.pi_x,
            omega_d=report.omega_d,
            sifted=report.sifted,
            sigma1=sigma1,
            sigma2=sigma2,
            burgess_reference=burgess_reference,
            holds=report.holds,
            elapsed=perf_counter() - start,
            nonneg_ok=report.nonneg_ok,
            partial_sum=partial_sum(chi, report.x, table),
        )
    except LabError as e:
        return SurveyRecord(
            d=d, abs_d=abs_d, nmax=0, zimmert_size=0, prime_support_size=0, rank_lower_bound=0,
            pi_x=0, omega_d=0, sifted=0, sigma1=None, sigma2=None, burgess_reference=None,
            holds=False, elapsed=perf_counter() - start, nonneg_ok=False, error=str(e),
        )


def survey_block(ds: Sequence[int], options: SurveyOptions) -> List[SurveyRecord]:
    return [survey_record(d, options) for d in ds]


def _init_worker(sieve_limit: int) -> None:
    use_table(build_sieve(sieve_limit))


class SurveyRunner:
    """Runs survey blocks on a bounded worker pool."""

    def __init__(self,
                 options: SurveyOptions,
                 logger: Optional[logging.Logger] = None,
                 sink: Optional[Callable[[List[SurveyRecord]], None]] = None):
        self.options = options
        self.logger = logger or logging.getLogger(__name__)
        self.state = SurveyState()
        self.writer = OrderedRecordWriter(sink=sink, logger=self.logger)

    def run(self, discriminants: Sequence[int]) -> List[SurveyRecord]:
        """Entry point: one record per discriminant, ascending |d|."""
        ordered = sorted(discriminants, key=abs)
        size = max(self.options.block_size, 1)
        blocks = [ordered[i:i + size] for i in range(0, len(ordered), size)]

        self.state.reset()
        self.state.total = len(ordered)
        self.state.is_running = True
        try:
            if self.options.workers <= 1 or len(blocks) <= 1:
                for index, block in enumerate(blocks):
                    self._finish_block(index, survey_block(block, self.options))
            else:
                asyncio.run(self._async_run(blocks))
        finally:
            self.state.is_running = False

        records = self.writer.close()
        self._log_summary()
        return records

    async def _async_run(self, blocks: List[List[int]]):
        loop = asyncio.get_running_loop()
        semaphore = asyncio.Semaphore(self.options.workers * 2)

        with ProcessPoolExecutor(max_workers=self.options.workers,
                                 initializer=_init_worker,
                                 initargs=(self.options.sieve_limit,)) as pool:
            async def run_block(index: int, block: List[int]):
                async with semaphore:
                    records = await loop.run_in_executor(pool, survey_block, block, self.options)
                self._finish_block(index, records)

            await asyncio.gather(*(run_block(i, b) for i, b in enumerate(blocks)))

    def _finish_block(self, index: int, records: List[SurveyRecord]):
        self.writer.submit(index, records)
        self.state.update_stats(records)
        for record in records:
            if record.error is not None:
                self.logger.warning(f"d={record.d} flagged: {record.error}")
            elif not record.holds:
                self.logger.error(f"Corollary inequality FAILS for d={record.d}")
        self.logger.info(f"Progress: {self.state.progress}/{self.state.total} "
                         f"({self.state.percent:.1f}%) | Failed: {self.state.failed} | Errors: {self.state.errors}")

    def _log_summary(self):
        stats = self.state.stats
        if stats["max_ratio"] is not None:
            self.logger.info(f"Max |partial sum| / Burgess reference: {stats['max_ratio']:.6g} "
                             f"at d={stats['max_ratio_d']}")
        rss = psutil.Process().memory_info().rss / 2**20
        self.logger.info(f"Survey done: {self.state.progress} records, {self.state.failed} failed, "
                         f"{self.state.errors} flagged, |Z_d| in [{stats['min_zimmert']}, {stats['max_zimmert']}], "
                         f"RSS {rss:.0f} MiB")


def run_survey(discriminants: Sequence[int], options: SurveyOptions,
               logger: Optional[logging.Logger] = None) -> List[SurveyRecord]:
    return SurveyRunner(options, logger).run(discriminants)


def fit_power_law(points: Iterable[Tuple[float, float]], excluded: int = 0) -> GrowthFit:
    """Least squares for log y = log_c + alpha * log x."""
    pts = list(points)
    if len({x for x, _ in pts}) < 2:
        raise DomainError(f"need at least 2 distinct |d| with |Z_d| >= 1, got {len(pts)} points")
    log_x = np.log(np.array([x for x, _ in pts], dtype=float))
    log_y = np.log(np.array([y for _, y in pts], dtype=float))
    alpha, log_c = np.polyfit(log_x, log_y, 1)
    residuals = log_y - (log_c + alpha * log_x)
    return GrowthFit(
        count=len(pts),
        log_c=float(log_c),
        alpha=float(alpha),
        residual_rms=float(np.sqrt(np.mean(residuals ** 2))),
        excluded=excluded,
    )


def fit_growth(records: Iterable) -> GrowthFit:
    """Power-law fit of |Z_d| against |d|; empty Zimmert sets are excluded and counted."""
    records = list(records)
    usable = [(r.abs_d, r.zimmert_size) for r in records
              if r.zimmert_size >= 1 and getattr(r, "error", None) is None]
    return fit_power_law(usable, excluded=len(records) - len(usable))


def find_small_zimmert(lo: int, hi: int, k: int, fundamental: bool = False) -> List[int]:
    """Squarefree d with lo <= |d| <= hi and |Z_d| <= k, ascending |d|."""
    if k < 0:
        raise UsageError(f"threshold must be non-negative, got {k}")
    return [d for d in squarefree_discriminants(lo, hi, fundamental) if zimmert_set(d).size <= k]


def burgess_ratio_diagnostic(records: Iterable[SurveyRecord]) -> Tuple[float, Optional[int]]:
    """max |sum_{n <= x} chi(n)| / burgess_reference and the d attaining it."""
    best, best_d = 0.0, None
    for record in records:
        if record.error is None and record.burgess_reference:
            ratio = abs(record.partial_sum) / record.burgess_reference
            if ratio > best:
                best, best_d = ratio, record.d
    return best, best_d


def summarize(records: Sequence[SurveyRecord]) -> dict:
    valid = [r for r in records if r.error is None]
    sizes = [r.zimmert_size for r in valid]
    ratio, ratio_d = burgess_ratio_diagnostic(valid)
    return {
        "total": len(records),
        "holds": sum(1 for r in valid if r.holds),
        "failed": sum(1 for r in valid if not r.holds),
        "errors": len(records) - len(valid),
        "min_zimmert": min(sizes) if sizes else None,
        "max_zimmert": max(sizes) if sizes else None,
        "max_ratio": ratio,
        "max_ratio_d": ratio_d,
    }
