from .. import presenters
from ..oracle import verify_protocol
from ..protocols import Variant
from .base import BaseCommand, CommandError


class Command(BaseCommand):
    help = "Re-run a setup in the dense engine and compare with the sparse engine"

    def add_arguments(self, parser):
        parser.add_argument(
            "--variant",
            type=Variant.parse,
            help=f"One of {', '.join(v.value for v in Variant)} (default ghz)",
        )
        parser.add_argument(
            "--tolerance", type=float, default=1e-10, help="Default 1e-10"
        )

    def overrides(self, options):
        return {"variant": options.variant}

    def handle(self, config, options):
        variant = config.variant or Variant.GHZ
        result = verify_protocol(
            variant, config.protocol_params(variant), tol=options.tolerance
        )
        self.output(
            config,
            presenters.format_verification(result),
            lambda f: presenters.write_verification_csv(result, f),
        )
        if not result.passed:
            raise CommandError("dense and sparse engines disagree", returncode=1)
