import math

import pytest

from photonloom.config import ConfigError, RunConfig, load_config, parse_config
from photonloom.detection import DetectorSemantics
from photonloom.protocols import Variant

VALID = """\
# a full run configuration
[coupling]
lambda_l = 1.1
lambda_r = 0.9
theta = 1.2

[protocol]
variant = w-direct
semantics = threshold
keep_vacuum = yes
bs_t = 0.3

[noise]
p_detect = 0.8
dark_rate = 0.01
seed = 7
trials = 500

[output]
out = results.csv
"""


def test_empty_config_gives_defaults():
    config = parse_config("")
    assert config == RunConfig()
    assert config.theta == pytest.approx(math.pi / 2)
    assert config.protocol_params().variant is Variant.GHZ


def test_valid_config():
    config = parse_config(VALID)
    assert config.lambda_l == 1.1
    assert config.lambda_r == 0.9
    assert config.theta == 1.2
    assert config.variant is Variant.W_DIRECT
    assert config.semantics is DetectorSemantics.THRESHOLD
    assert config.keep_vacuum is True
    assert config.trials == 500
    assert config.out == "results.csv"

    p = config.protocol_params()
    assert p.variant is Variant.W_DIRECT
    assert p.bs_transmittance == 0.3
    assert p.keep_vacuum_term
    assert p.coupling.theta == 1.2

    n = config.noise_params()
    assert n.p_detect == 0.8
    assert n.dark_rate == 0.01
    assert n.seed == 7


@pytest.mark.parametrize(
    "text,line_number,key",
    [
        ("[coupling]\nlambda_l = -1\n", 2, "lambda_l"),
        ("[coupling]\nlambda_l = 1.1\nspeed = 3\n", 3, "speed"),
        ("\n[cavity]\nlength = 3\n", 2, "cavity"),
        ("[protocol]\nsemantics = sometimes\n", 2, "semantics"),
        ("[protocol]\nvariant = bell\n", 2, "variant"),
        ("[protocol]\nf2 = maybe\n", 2, "f2"),
        ("[noise]\ntrials = 0\n", 2, "trials"),
        ("[noise]\nseed = lots\n", 2, "seed"),
        ("[coupling]\ntheta = nan\n", 2, "theta"),
        ("lambda_l = 1.1\n[coupling]\n", 1, "lambda_l"),
        ("[coupling]\n[[inner]]\nlambda_l = 1\n", 2, "inner"),
    ],
)
def test_config_errors_name_line_and_key(text, line_number, key):
    with pytest.raises(ConfigError) as e:
        parse_config(text)
    assert e.value.line_number == line_number
    assert e.value.key == key
    assert str(e.value).startswith(f"line {line_number}: {key}: ")
    assert e.value.returncode == 2


@pytest.mark.parametrize(
    "text,line_number",
    [
        ("[coupling]\nlambda_l = 1\nlambda_l = 2\n", 3),
        ("[coupling]\nlambda_l 1.1\n", 2),
    ],
)
def test_config_syntax_errors(text, line_number):
    with pytest.raises(ConfigError) as e:
        parse_config(text)
    assert e.value.line_number == line_number
    assert str(e.value).startswith(f"line {line_number}: ")


def test_override_ignores_unset_values():
    config = RunConfig(lambda_l=2.0, seed=3)
    overridden = config.override(lambda_l=None, lambda_r=3.0, seed=0)
    assert overridden.lambda_l == 2.0
    assert overridden.lambda_r == 3.0
    assert overridden.seed == 0


def test_bunching_variant():
    assert RunConfig().bunching_variant() is Variant.W_BUNCHING
    assert RunConfig(f2=True).bunching_variant() is Variant.W_BUNCHING_WITH_F2
    assert (
        RunConfig(f1_aux=True).bunching_variant() is Variant.W_BUNCHING_WITH_F1_AUX
    )


def test_load_config(config_file):
    config = load_config(config_file("[coupling]\nlambda_r = 2\n"))
    assert config.lambda_r == 2.0


def test_load_missing_config(tmp_path):
    with pytest.raises(ConfigError) as e:
        load_config(str(tmp_path / "missing.ini"))
    assert "cannot read" in str(e.value)
    assert e.value.line_number is None
