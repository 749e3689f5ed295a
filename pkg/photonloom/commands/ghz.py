from .. import presenters
from ..protocols import Variant, run_protocol
from .base import BaseCommand


class Command(BaseCommand):
    help = "Run the GHZ setup and list its heralded click patterns"

    def handle(self, config, options):
        report = run_protocol(config.protocol_params(Variant.GHZ))
        self.output(
            config,
            presenters.format_report(report),
            lambda f: presenters.write_outcomes_csv(report, f),
        )
