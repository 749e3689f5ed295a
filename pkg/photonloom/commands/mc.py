from .. import presenters
from ..noise import estimate
from ..protocols import Variant
from .base import BaseCommand, CommandError


class Command(BaseCommand):
    help = "Estimate herald yield and fidelity by Monte Carlo under noise"

    def add_arguments(self, parser):
        parser.add_argument("--trials", type=int, help="Number of trials")
        parser.add_argument("--seed", type=int, help="Base random seed (default 0)")
        parser.add_argument(
            "--variant",
            type=Variant.parse,
            help=f"One of {', '.join(v.value for v in Variant)} (default ghz)",
        )
        parser.add_argument("--p-excitation", type=float)
        parser.add_argument("--p-collect", type=float)
        parser.add_argument("--p-detect", type=float)
        parser.add_argument("--dark-rate", type=float, help="Mean dark counts")
        parser.add_argument("--p-window", type=float)
        parser.add_argument("--trials-csv", help="Write one CSV row per trial")

    def overrides(self, options):
        return {
            "variant": options.variant,
            "trials": options.trials,
            "seed": options.seed,
            "p_excitation": options.p_excitation,
            "p_collect": options.p_collect,
            "p_detect": options.p_detect,
            "dark_rate": options.dark_rate,
            "p_window": options.p_window,
            "trials_csv": options.trials_csv,
        }

    def handle(self, config, options):
        variant = config.variant or Variant.GHZ
        if config.trials < 1:
            raise CommandError(f"--trials must be >= 1, got {config.trials}", 2)

        result = estimate(
            config.protocol_params(variant),
            config.noise_params(),
            config.trials,
            keep_records=config.trials_csv is not None,
        )
        if config.trials_csv is not None:
            try:
                with open(config.trials_csv, "w", newline="", encoding="utf-8") as f:
                    presenters.write_trials_csv(result.records, f)
            except OSError as e:
                raise CommandError(f"cannot write {config.trials_csv}: {e}", 2)

        self.output(
            config,
            presenters.format_estimate(variant, result),
            lambda f: presenters.write_estimate_csv(variant, result, f),
        )
