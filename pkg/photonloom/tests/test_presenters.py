import csv
import io

from photonloom import presenters
from photonloom.noise import TrialRecord
from photonloom.oracle import verify_protocol
from photonloom.protocols import ProtocolParams, Variant, run_protocol


def rows_of(write):
    f = io.StringIO()
    write(f)
    return list(csv.reader(io.StringIO(f.getvalue())))


def test_format_report(ghz_params):
    text = presenters.format_report(run_protocol(ghz_params))
    assert "stage P2" in text
    assert "yield GHZ+" in text
    assert "ledger no-click" in text
    assert "P_GHZ = 0.25000000 matches P1³·P2·P3 = 0.25000000" in text


def test_outcomes_csv_uses_full_precision():
    report = run_protocol(ProtocolParams.ideal(Variant.W_DIRECT))
    header, *rows = rows_of(lambda f: presenters.write_outcomes_csv(report, f))
    assert header == presenters.OUTCOME_HEADERS
    assert len(rows) == 4
    probability = rows[0][header.index("probability")]
    assert float(probability) == report.outcomes[0].probability
    assert rows[0][header.index("variant")] == "w_direct"


def test_trial_rows():
    rows = presenters.build_trial_rows([TrialRecord(trial=0, heralded=False)])
    assert rows == [
        {
            "trial": 0,
            "heralded": False,
            "pattern": "",
            "fidelity": None,
            "false_herald": False,
        }
    ]
    assert presenters._csv_value(True) == "1"
    assert presenters._csv_value(None) == ""
    assert presenters._csv_value(0.1) == "0.10000000000000001"


def test_verification_output():
    result = verify_protocol(Variant.GHZ)
    text = presenters.format_verification(result)
    assert "agreement" in text
    assert "pass" in text
    header, row = rows_of(lambda f: presenters.write_verification_csv(result, f))
    assert header == presenters.VERIFICATION_HEADERS
    assert row[header.index("passed")] == "1"
    assert row[header.index("variant")] == "ghz"
