import argparse
import logging
import sys
from contextlib import ExitStack
from typing import Optional, TextIO

from config.lab_config import LabConfig
from core.arith import classify_modulus, factorize, squarefree_kernel
from core.character import make_character, max_partial_sum, partial_sum
from core.export_manager import CsvStream, ExportManager, format_value
from core.sift import (BurgessParams, SiftPrimeSet, burgess_term, decompose, optimal_r,
                       reduced_modulus_bound)
from core.survey import (SurveyOptions, SurveyRunner, burgess_ratio_diagnostic,
                         find_small_zimmert, fit_growth, plan_discriminants, squarefree_discriminants)
from core.zimmert import (CorollaryReport, corollary_check, corollary_estimate, corollary_params,
                          corollary_x, zimmert_set)
from utils.errors import DomainError, ExportError, LabError, UsageError, VerificationError, log_error
from utils.input_validator import InputValidator

EXIT_OK = 0


def _flag(value: bool) -> str:
    return "true" if value else "false"


class CLIRunner:
    """Executes one parsed subcommand and maps its outcome to an exit code."""

    def __init__(self,
                 config: LabConfig,
                 validator: InputValidator,
                 export_manager: ExportManager,
                 logger: logging.Logger,
                 stdout: Optional[TextIO] = None,
                 stderr: Optional[TextIO] = None):
        self.config = config
        self.validator = validator
        self.export_manager = export_manager
        self.logger = logger
        self.stdout = stdout or sys.stdout
        self.stderr = stderr or sys.stderr

    def run(self, args: argparse.Namespace) -> int:
        """Entry point for CLI execution."""
        handlers = {
            "zset": self.cmd_zset,
            "verify": self.cmd_verify,
            "charsum": self.cmd_charsum,
            "burgess": self.cmd_burgess,
            "survey": self.cmd_survey,
        }
        try:
            return handlers[args.command](args)
        except LabError as e:
            log_error(self.logger, e, args.command)
            print(f"error: {e}", file=self.stderr)
            return e.exit_code
        except KeyboardInterrupt:
            print("\nOperation cancelled by user.", file=self.stderr)
            return 2

    def _emit(self, line: str = "") -> None:
        print(line, file=self.stdout)

    # --- zset -----------------------------------------------------------------

    def cmd_zset(self, args: argparse.Namespace) -> int:
        d = self.validator.resolve_d(args.d, args.abs_d)
        if getattr(args, "reduce", False) and d < 0:
            reduced = -squarefree_kernel(-d)
            if reduced != d:
                self.logger.info(f"Reduced d={d} to its squarefree kernel {reduced}")
            d = reduced

        zset = zimmert_set(d)
        self._emit(" ".join(str(n) for n in zset.elements))
        self._emit(f"size={zset.size} primes={' '.join(str(p) for p in zset.prime_support)}")
        return EXIT_OK

    # --- verify ---------------------------------------------------------------

    @staticmethod
    def _verify_line(d: int, x: float, pi_x: int, zimmert_size: int, omega_d: int,
                     sifted: int, holds: bool, nonneg_ok: bool) -> str:
        lhs = pi_x - zimmert_size - omega_d
        return (f"d={d} x={format_value(x)} pi_x={pi_x} zimmert_size={zimmert_size} "
                f"omega_d={omega_d} lhs={lhs} S={sifted} holds={_flag(holds)} nonneg_ok={_flag(nonneg_ok)}")

    def _report_line(self, report: CorollaryReport) -> str:
        return self._verify_line(report.d, report.x, report.pi_x, report.zimmert_size,
                                 report.omega_d, report.sifted, report.holds, report.nonneg_ok)

    def cmd_verify(self, args: argparse.Namespace) -> int:
        want_params = args.c is not None or args.c_prime is not None
        c = args.c if args.c is not None else self.config.C
        c_prime = args.c_prime if args.c_prime is not None else self.config.C_PRIME
        if want_params:
            self.validator.validate_corollary_params(c, c_prime)

        if args.range:
            return self._verify_range(args)

        d = self.validator.resolve_d(args.d, args.abs_d)
        report = corollary_check(d)
        self._emit(self._report_line(report))

        failed = not report.holds or not report.nonneg_ok
        if report.x_floor >= 1:
            R = max(1.0, abs(d) ** self.config.C)
            split = decompose(make_character(d), report.x, SiftPrimeSet(report.prime_support), R,
                              r=self.config.BURGESS_R, epsilon=self.config.EPSILON)
            if not split.identity_holds:
                self.logger.error(f"Sifted sum does not split as sigma1 - sigma2 for d={d}")
                failed = True

        if want_params:
            params = corollary_params(d, c, c_prime)
            estimate = corollary_estimate(d, params, epsilon=self.config.EPSILON)
            self._emit(f"c={format_value(params.c)} c_prime={format_value(params.c_prime)} "
                       f"R={format_value(params.R)} r={params.r} main={format_value(estimate.main)} "
                       f"tail={format_value(estimate.tail)} divisors={estimate.divisor_count}")

        if failed:
            raise VerificationError(f"corollary inequality check FAILED for d={d}")
        return EXIT_OK

    def _verify_range(self, args: argparse.Namespace) -> int:
        lo, hi = self.validator.parse_range(args.range)
        if lo < 7:
            raise DomainError(f"corollary check needs |d| >= 7, got range {lo}:{hi}")

        records = self._runner(compute_sums=True).run(squarefree_discriminants(lo, hi))
        failures = 0
        for record in records:
            if record.error is not None:
                raise DomainError(f"d={record.d}: {record.error}")
            self._emit(self._verify_line(record.d, corollary_x(record.d), record.pi_x,
                                         record.zimmert_size, record.omega_d, record.sifted,
                                         record.holds, record.nonneg_ok))
            split_ok = record.sigma1 is None or record.sifted == record.sigma1 - record.sigma2
            if not (record.holds and record.nonneg_ok and split_ok):
                failures += 1

        if failures:
            raise VerificationError(f"corollary inequality check FAILED for {failures} "
                                    f"of {len(records)} discriminants")
        self.logger.info(f"Verified {len(records)} discriminants in {lo}:{hi}")
        return EXIT_OK

    # --- charsum --------------------------------------------------------------

    def cmd_charsum(self, args: argparse.Namespace) -> int:
        d = self.validator.resolve_d(args.d, args.abs_d)
        x = args.x
        if x < 0:
            raise UsageError(f"x must be non-negative, got {x}")
        R = self.validator.validate_positive("R", args.R)

        chi = make_character(d, memoize=True, memo_limit=self.config.MEMO_LIMIT)
        if args.support:
            P = zimmert_set(d).prime_support
        else:
            P = SiftPrimeSet.of(self.validator.parse_primes(args.P))

        split = decompose(chi, x, P, R, r=args.r, r_max=args.r_max or self.config.R_MAX,
                          epsilon=self._epsilon(args))
        self._emit(f"d={d} x={format_value(float(x))} R={format_value(float(R))} "
                   f"P={','.join(str(p) for p in P)}")
        self._emit(f"S={partial_sum(chi, x)} max_S={max_partial_sum(chi, x)} sifted={split.sifted} "
                   f"sigma1={split.sigma1_direct} sigma1_interchanged={split.sigma1_interchanged} "
                   f"sigma2={split.sigma2} identity={_flag(split.identity_holds)}")
        if x >= 1:
            self._emit(f"r={split.r_used} main={format_value(split.burgess_reference)} "
                       f"tail={format_value(split.tail_reference)} R_in_range={_flag(split.R_in_range)}")

        if not split.identity_holds:
            raise VerificationError(f"sifted sum does not split as sigma1 - sigma2 for d={d}, x={x}, R={R}")
        return EXIT_OK

    # --- burgess --------------------------------------------------------------

    def cmd_burgess(self, args: argparse.Namespace) -> int:
        q = self.validator.validate_positive("q", args.q)
        x = self.validator.validate_positive("x", args.x)
        epsilon = self._epsilon(args)
        modulus_class = classify_modulus(q)

        if args.r is None:
            r, bound = optimal_r(q, x, modulus_class, args.r_max or self.config.R_MAX, epsilon)
        else:
            r = args.r
            bound = burgess_term(BurgessParams(q, x, r, modulus_class, epsilon))
        line = f"q={q} class={modulus_class} r={r} bound={format_value(bound)}"

        if args.q1 is not None:
            q1 = self.validator.validate_positive("q1", args.q1)
            if q % q1:
                raise UsageError(f"q1={q1} does not divide q={q}")
            q2 = q // q1
            split = reduced_modulus_bound(q1, q2, x, r, epsilon)
            line += f" q1={q1} q2={q2} split_bound={format_value(split)}"

        self._emit(line)
        self.logger.debug(f"factorization of q: {factorize(q).factors}")
        return EXIT_OK

    # --- survey ---------------------------------------------------------------

    def cmd_survey(self, args: argparse.Namespace) -> int:
        lo, hi = self.validator.parse_range(args.range)

        if args.small is not None:
            for d in find_small_zimmert(lo, hi, args.small, fundamental=args.fundamental):
                self._emit(str(d))
            return EXIT_OK

        ds = plan_discriminants(lo, hi,
                                density=args.sample,
                                exhaustive_limit=self.config.EXHAUSTIVE_LIMIT,
                                default_density=self.config.SAMPLE_DENSITY,
                                fundamental=args.fundamental)
        self.logger.info(f"Surveying {len(ds)} discriminants in {lo}:{hi}")

        fmt = args.format
        output = self.validator.validate_output_path(args.output) if args.output else None

        with ExitStack() as stack:
            sink = None
            if fmt == "csv":
                stream = self.stdout
                if output:
                    try:
                        stream = stack.enter_context(open(output, "w", encoding="utf-8", newline=""))
                    except OSError as e:
                        raise ExportError(f"cannot write {output}: {e}", original_exception=e)
                csv_stream = CsvStream(stream)
                sink = csv_stream.write_rows

            records = self._runner(compute_sums=not args.no_sums, sink=sink,
                                   c=args.c if args.c is not None else self.config.C,
                                   burgess_r=args.burgess_r or self.config.BURGESS_R).run(ds)

        if fmt != "csv":
            if output:
                self.export_manager.write_file(records, fmt, output)
            else:
                self.export_manager.write(records, fmt, self.stdout)
        elif output:
            self.logger.info(f"Wrote {len(records)} records to {output}")

        ratio, ratio_d = burgess_ratio_diagnostic(records)
        if ratio_d is not None:
            self.logger.info(f"Diagnostic: max |S| / Burgess reference = {ratio:.6g} at d={ratio_d}")

        if args.fit:
            self._emit(fit_growth(records).summary_line())

        failed = [r.d for r in records if r.error is None and not r.holds]
        if failed:
            raise VerificationError(f"corollary inequality FAILS for {len(failed)} discriminants, "
                                    f"first {failed[:10]}")
        return EXIT_OK

    # --- helpers --------------------------------------------------------------

    def _epsilon(self, args: argparse.Namespace) -> float:
        epsilon = getattr(args, "epsilon", None)
        return self.config.EPSILON if epsilon is None else epsilon

    def _runner(self, compute_sums: bool, sink=None, c: Optional[float] = None,
                burgess_r: Optional[int] = None) -> SurveyRunner:
        options = SurveyOptions(
            compute_sums=compute_sums,
            workers=self.validator.validate_workers(self.config.WORKERS),
            block_size=self.config.BLOCK_SIZE,
            burgess_r=burgess_r or self.config.BURGESS_R,
            c=self.config.C if c is None else c,
            epsilon=self.config.EPSILON,
            sieve_limit=self.config.SIEVE_LIMIT,
        )
        return SurveyRunner(options, self.logger, sink=sink)
