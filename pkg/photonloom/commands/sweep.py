from .. import presenters
from ..protocols import Variant, sweep_bs_imbalance, sweep_coupling_ratio
from .base import ENGINE_ERRORS, BaseCommand, CommandError

PARAMETERS = {
    "ratio": ("ratio", sweep_coupling_ratio),
    "bs-t": ("bs_t", sweep_bs_imbalance),
}


def parse_values(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise CommandError(f"--values must be a comma-separated list: {text}", 2)
    if not values:
        raise CommandError("--values is empty", 2)
    return values


class Command(BaseCommand):
    help = "Run a setup over a list of coupling ratios or transmittances"

    def add_arguments(self, parser):
        parser.add_argument("--param", required=True, choices=sorted(PARAMETERS))
        parser.add_argument(
            "--values", required=True, help="Comma-separated values, eg 1.0,1.1"
        )
        parser.add_argument(
            "--variant",
            type=Variant.parse,
            help=f"One of {', '.join(v.value for v in Variant)} (default ghz)",
        )

    def overrides(self, options):
        return {"variant": options.variant}

    def handle(self, config, options):
        column, sweep = PARAMETERS[options.param]
        values = parse_values(options.values)
        variant = config.variant or Variant.GHZ
        try:
            rows = sweep(variant, values, config.protocol_params(variant))
        except ENGINE_ERRORS:
            raise
        except ValueError as e:
            raise CommandError(str(e), 2)

        self.output(
            config,
            presenters.format_sweep(rows, column),
            lambda f: presenters.write_sweep_csv(rows, column, f),
        )
