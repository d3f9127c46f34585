import sys
import logging
import argparse
from typing import List, Optional

# Import modules
from config.lab_config import LabConfig
from utils.logger import setup_logger
from utils.input_validator import InputValidator
from core.arith import DEFAULT_SIEVE_LIMIT, build_sieve, use_table
from core.export_manager import ExportManager, FORMATS
from core.cli_runner import CLIRunner

ZIMMERT_CONDITIONS = """\
Z_d is the set of integers n such that
  (1) 4n^2 + 3 <= |d| and n != 2;
  (2) d is a quadratic non-residue modulo p for all odd prime factors p of n;
  (3) If d ≢ 5 (mod 8), then n is odd.

Negative d may be given as "-d -163" or as "--abs-d 163".
Exit codes: 0 success, 1 a verification failed, 2 usage or domain error.
"""


def _add_discriminant(parser: argparse.ArgumentParser, allow_range: bool = False):
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument('-d', type=int, help='Squarefree radicand d < 0, e.g. -d -163')
    group.add_argument('--abs-d', type=int, help='|d|, e.g. --abs-d 163')
    if allow_range:
        group.add_argument('--range', help='Range of |d| as lo:hi')


def build_parser(config: LabConfig) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zimmert-lab",
        description=f"{config.APP_NAME} {config.APP_VERSION}\n\n{ZIMMERT_CONDITIONS}",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument('--debug', action='store_true', help='Enable debug logging')
    parser.add_argument('--log-file', default=config.LOG_FILE or None, help='Also log to this file')
    parser.add_argument('--workers', type=int, default=None, help=f'Survey worker processes (default {config.WORKERS})')
    parser.add_argument('--sieve-limit', type=int, default=None,
                        help=f'Smallest-prime-factor table size (default {config.SIEVE_LIMIT})')

    subparsers = parser.add_subparsers(dest='command', required=True)

    zset = subparsers.add_parser('zset', help='Enumerate the Zimmert set Z_d',
                                 description=ZIMMERT_CONDITIONS,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_discriminant(zset)
    zset.add_argument('--reduce', action='store_true', help='Replace |d| by its squarefree kernel first')

    verify = subparsers.add_parser('verify', help='Check the corollary inequality at x = sqrt(|d| - 3) / 2')
    _add_discriminant(verify, allow_range=True)
    verify.add_argument('--c', type=float, default=None, help='Sieve level exponent, R = |d|^c')
    verify.add_argument('--c-prime', type=float, default=None, help="Exponent c' with c < c' < 1/4")

    charsum = subparsers.add_parser('charsum', help='Partial and sifted character sums')
    _add_discriminant(charsum)
    charsum.add_argument('--x', type=float, required=True, help='Summation length')
    charsum.add_argument('--R', type=float, default=1.0, help='Truncation level of the Moebius weight')
    sieve = charsum.add_mutually_exclusive_group()
    sieve.add_argument('--P', default='', help='Comma-separated sieve primes')
    sieve.add_argument('--support', action='store_true', help='Sieve by the prime support of Z_d')
    charsum.add_argument('--r', type=int, default=None, help='Burgess exponent (default: optimal)')
    charsum.add_argument('--r-max', type=int, default=None, help='Largest r tried when optimizing')
    charsum.add_argument('--epsilon', type=float, default=None)

    burgess = subparsers.add_parser('burgess', help='Burgess reference terms and optimal r')
    burgess.add_argument('--q', type=int, required=True, help='Modulus')
    burgess.add_argument('--x', type=float, required=True, help='Summation length')
    burgess.add_argument('--r', type=int, default=None, help='Burgess exponent (default: optimal)')
    burgess.add_argument('--r-max', type=int, default=None, help='Largest r tried when optimizing')
    burgess.add_argument('--q1', type=int, default=None, help='Split q = q1 * q2 and report the reduced bound')
    burgess.add_argument('--epsilon', type=float, default=None)

    survey = subparsers.add_parser('survey', help='Sweep a range of |d| and export records')
    survey.add_argument('--range', required=True, help='Range of |d| as lo:hi')
    survey.add_argument('--format', choices=FORMATS, default='csv', help='Output format')
    survey.add_argument('--output', default=None, help='Write records to this file instead of stdout')
    survey.add_argument('--sample', type=int, default=None, help='Geometric sample density (points per decade)')
    survey.add_argument('--fit', action='store_true', help='Append the growth-exponent fit line')
    survey.add_argument('--no-sums', action='store_true', help='Skip the sigma1/sigma2 split')
    survey.add_argument('--small', type=int, default=None, metavar='K', help='Only list d with |Z_d| <= K')
    survey.add_argument('--fundamental', action='store_true', help='Keep only |d| = 3 (mod 4)')
    survey.add_argument('--c', type=float, default=None, help='Sieve level exponent for the split, R = |d|^c')
    survey.add_argument('--burgess-r', type=int, default=None, help='Burgess exponent of the reference column')

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    # 1. Initialize Configuration
    config = LabConfig()

    # 2. Parse CLI Arguments
    args = build_parser(config).parse_args(argv)
    if args.workers is not None:
        config.WORKERS = args.workers
    if args.sieve_limit is not None:
        config.SIEVE_LIMIT = args.sieve_limit

    # 3. Setup Logging
    logger = setup_logger(
        name="ZimmertLab",
        log_file=args.log_file,
        level=logging.DEBUG if args.debug else logging.INFO
    )

    # 4. Install the factor table when it differs from the lazy default
    if config.SIEVE_LIMIT != DEFAULT_SIEVE_LIMIT:
        try:
            use_table(build_sieve(config.SIEVE_LIMIT))
        except Exception as e:
            print(f"error: {e}", file=sys.stderr)
            return 2

    # 5. Initialize Core Dependencies (Dependency Injection)
    runner = CLIRunner(
        config=config,
        validator=InputValidator(logger=logger),
        export_manager=ExportManager(logger=logger),
        logger=logger
    )
    return runner.run(args)


if __name__ == "__main__":
    sys.exit(main())
