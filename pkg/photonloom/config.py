"""
Run configuration files.

A RunConfig file is an INI-style document read with configobj:

    [coupling]
    lambda_l = 1.1
    lambda_r = 1.0

    [protocol]
    semantics = threshold
    f2 = yes

Only the sections and keys in SCHEMA are accepted.  Every error names the line
it was found on and the offending key.
"""
import math
import re

import attr
import configobj
import structlog

from .detection import DetectorSemantics
from .emission import CouplingParams
from .noise import NoiseParams
from .protocols import ProtocolParams, Variant

logger = structlog.get_logger()


class ConfigError(ValueError):
    returncode = 2

    def __init__(self, message, line_number=None, key=None):
        super().__init__(message)
        self.message = message
        self.line_number = line_number
        self.key = key

    def __str__(self):
        where = []
        if self.line_number is not None:
            where.append(f"line {self.line_number}")
        if self.key is not None:
            where.append(self.key)
        prefix = ": ".join(where)
        return f"{prefix}: {self.message}" if prefix else self.message


def _float(value):
    number = float(value)
    if not math.isfinite(number):
        raise ValueError(f"must be a finite number, got {value}")
    return number


def _positive(value):
    number = _float(value)
    if not number > 0:
        raise ValueError(f"must be > 0, got {value}")
    return number


def _non_negative(value):
    number = _float(value)
    if number < 0:
        raise ValueError(f"must be >= 0, got {value}")
    return number


def _probability(value):
    number = _float(value)
    if not 0 <= number <= 1:
        raise ValueError(f"must lie in [0, 1], got {value}")
    return number


def _seed(value):
    number = int(value)
    if not 0 <= number < 2 ** 64:
        raise ValueError(f"must be a 64-bit unsigned integer, got {value}")
    return number


def _trials(value):
    number = int(value)
    if number < 1:
        raise ValueError(f"must be >= 1, got {value}")
    return number


BOOLEANS = {
    "1": True,
    "true": True,
    "yes": True,
    "on": True,
    "0": False,
    "false": False,
    "no": False,
    "off": False,
}


def _boolean(value):
    try:
        return BOOLEANS[value.strip().lower()]
    except KeyError:
        raise ValueError(f"must be a boolean (yes/no, true/false), got {value}")


def _path(value):
    if not value.strip():
        raise ValueError("must not be empty")
    return value.strip()


SCHEMA = {
    "coupling": {
        "lambda_l": _positive,
        "lambda_r": _positive,
        "theta": _float,
    },
    "protocol": {
        "variant": Variant.parse,
        "semantics": DetectorSemantics,
        "keep_vacuum": _boolean,
        "bs_t": _probability,
        "f2": _boolean,
        "f1_aux": _boolean,
    },
    "noise": {
        "p_excitation": _probability,
        "p_collect": _probability,
        "p_detect": _probability,
        "dark_rate": _non_negative,
        "p_window": _probability,
        "seed": _seed,
        "trials": _trials,
    },
    "output": {
        "out": _path,
        "trials_csv": _path,
    },
}


@attr.s(frozen=True)
class RunConfig:
    lambda_l = attr.ib(default=1.0)
    lambda_r = attr.ib(default=1.0)
    theta = attr.ib(default=math.pi / 2)
    variant = attr.ib(default=None)
    semantics = attr.ib(default=DetectorSemantics.EXACTLY_ONE)
    keep_vacuum = attr.ib(default=False)
    bs_t = attr.ib(default=0.5)
    f2 = attr.ib(default=False)
    f1_aux = attr.ib(default=False)
    p_excitation = attr.ib(default=1.0)
    p_collect = attr.ib(default=1.0)
    p_detect = attr.ib(default=1.0)
    dark_rate = attr.ib(default=0.0)
    p_window = attr.ib(default=1.0)
    seed = attr.ib(default=0)
    trials = attr.ib(default=10_000)
    out = attr.ib(default=None)
    trials_csv = attr.ib(default=None)

    def override(self, **values):
        """Return a copy with every value that is not None replaced."""

        return attr.evolve(self, **{k: v for k, v in values.items() if v is not None})

    def coupling(self):
        return CouplingParams(self.lambda_l, self.lambda_r, self.theta)

    def bunching_variant(self):
        if self.f1_aux:
            return Variant.W_BUNCHING_WITH_F1_AUX
        if self.f2:
            return Variant.W_BUNCHING_WITH_F2
        return Variant.W_BUNCHING

    def protocol_params(self, variant=None):
        variant = variant or self.variant or Variant.GHZ
        return ProtocolParams(
            self.coupling(),
            semantics=self.semantics,
            keep_vacuum_term=self.keep_vacuum,
            bs_transmittance=self.bs_t,
            variant=variant,
        )

    def noise_params(self):
        return NoiseParams(
            p_excitation=self.p_excitation,
            p_collect=self.p_collect,
            p_detect=self.p_detect,
            dark_rate=self.dark_rate,
            p_window=self.p_window,
            seed=self.seed,
        )


SECTION_RE = re.compile(r"^\s*\[+\s*([^\]]*?)\s*\]+")
KEY_RE = re.compile(r"^\s*([^#\[=\s][^=]*?)\s*=")


def _line_numbers(lines):
    """Map (section, key) and (section, None) to the line they start on."""

    numbers = {}
    section = None
    for number, line in enumerate(lines, 1):
        match = SECTION_RE.match(line)
        if match:
            section = match.group(1)
            numbers.setdefault((section, None), number)
            continue
        match = KEY_RE.match(line)
        if match:
            numbers.setdefault((section, match.group(1)), number)
    return numbers


def parse_config(text):
    """Parse the text of a RunConfig file.  Raises ConfigError."""

    lines = text.splitlines()
    try:
        parsed = configobj.ConfigObj(
            lines, list_values=False, interpolation=False, raise_errors=True
        )
    except configobj.ConfigObjError as e:
        raise ConfigError(
            getattr(e, "msg", None) or str(e), getattr(e, "line_number", None)
        )

    numbers = _line_numbers(lines)
    if parsed.scalars:
        key = parsed.scalars[0]
        raise ConfigError("key outside a section", numbers.get((None, key)), key=key)

    values = {}
    for section in parsed.sections:
        schema = SCHEMA.get(section)
        if schema is None:
            raise ConfigError(
                f"unknown section [{section}]",
                numbers.get((section, None)),
                key=section,
            )
        if parsed[section].sections:
            nested = parsed[section].sections[0]
            raise ConfigError(
                f"nested section [[{nested}]] is not allowed",
                numbers.get((nested, None)),
                key=nested,
            )
        for key, raw in parsed[section].items():
            line_number = numbers.get((section, key))
            convert = schema.get(key)
            if convert is None:
                raise ConfigError(f"unknown key in [{section}]", line_number, key=key)
            try:
                values[key] = convert(raw)
            except ValueError as e:
                raise ConfigError(str(e), line_number, key=key)

    logger.info("Parsed Config", keys=sorted(values))
    return RunConfig(**values)


def load_config(path):
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigError(f"cannot read {path}: {e}")
    return parse_config(text)
