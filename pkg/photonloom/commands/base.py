"""
Base class for the simulate.py subcommands.

A command declares its own flags in add_arguments() and does its work in
handle(), which receives the effective RunConfig: defaults, overridden by the
--config file, overridden by any flag given on the command line.
"""
import argparse
import math
import sys

from ..config import RunConfig, load_config
from ..detection import DetectorSemantics
from ..elements import (
    DuplicatePortError,
    NonIsometricTransformError,
    TransmittanceError,
)
from ..emission import DuplicateAtomError
from ..fock import (
    AtomCountMismatchError,
    ModeOverlapError,
    NonUniformOccupationError,
    TruncationError,
    ZeroNormError,
)
from ..oracle import DenseBasisError

# Raised from inside the simulation rather than by bad options.
ENGINE_ERRORS = (
    AtomCountMismatchError,
    DenseBasisError,
    DuplicateAtomError,
    DuplicatePortError,
    ModeOverlapError,
    NonIsometricTransformError,
    NonUniformOccupationError,
    TransmittanceError,
    TruncationError,
    ZeroNormError,
)


class CommandError(Exception):
    """Stops a command and sets the process exit code."""

    def __init__(self, message, returncode=1):
        super().__init__(message)
        self.returncode = returncode


def common_parser():
    """Flags shared by every subcommand."""

    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--lambda-l", type=float, help="Coupling λ_l (default 1)")
    parser.add_argument("--lambda-r", type=float, help="Coupling λ_r (default 1)")
    parser.add_argument(
        "--theta",
        type=float,
        help=f"Emission angle in radians (default π/2 = {math.pi / 2:.6f})",
    )
    parser.add_argument(
        "--semantics",
        choices=[s.value for s in DetectorSemantics],
        help="Detector model (default exact1)",
    )
    parser.add_argument(
        "--keep-vacuum",
        action="store_true",
        default=None,
        help="Keep the cos θ |e> term of every emitter",
    )
    parser.add_argument("--config", help="Run configuration file")
    parser.add_argument(
        "--out", help="Write CSV to this path instead of a table to stdout"
    )
    return parser


class BaseCommand:
    help = ""

    def __init__(self, stdout=None):
        self.stdout = stdout or sys.stdout

    def add_arguments(self, parser):
        pass

    def handle(self, config, options):
        raise NotImplementedError

    def overrides(self, options):
        """Config values set by this command's own flags."""

        return {}

    def execute(self, options):
        config = load_config(options.config) if options.config else RunConfig()
        config = config.override(
            lambda_l=options.lambda_l,
            lambda_r=options.lambda_r,
            theta=options.theta,
            semantics=options.semantics and DetectorSemantics(options.semantics),
            keep_vacuum=options.keep_vacuum,
            out=options.out,
            **self.overrides(options),
        )
        self.handle(config, options)

    def output(self, config, table, write_csv):
        """Print table, or hand an open file to write_csv when --out is set."""

        if config.out is None:
            self.stdout.write(table)
            return
        try:
            with open(config.out, "w", newline="", encoding="utf-8") as f:
                write_csv(f)
        except OSError as e:
            raise CommandError(f"cannot write {config.out}: {e}", returncode=2)
