from .. import presenters
from ..protocols import run_protocol
from .base import BaseCommand


class Command(BaseCommand):
    help = "Run the W setup that bunches photons on beam splitters"

    def add_arguments(self, parser):
        parser.add_argument(
            "--f2",
            action="store_true",
            default=None,
            help="Also herald on the F2 output of BS2'",
        )
        parser.add_argument(
            "--f1-aux",
            action="store_true",
            default=None,
            help="Also use the s' bunching with an auxiliary atom (implies --f2)",
        )

    def overrides(self, options):
        return {"f2": options.f2, "f1_aux": options.f1_aux}

    def handle(self, config, options):
        report = run_protocol(config.protocol_params(config.bunching_variant()))
        self.output(
            config,
            presenters.format_report(report),
            lambda f: presenters.write_outcomes_csv(report, f),
        )
