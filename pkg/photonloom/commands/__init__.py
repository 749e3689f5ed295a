from . import ghz, mc, sweep, verify, w_bunching, w_direct

COMMANDS = {
    "ghz": ghz.Command,
    "w-direct": w_direct.Command,
    "w-bunching": w_bunching.Command,
    "sweep": sweep.Command,
    "mc": mc.Command,
    "verify": verify.Command,
}
