import math

import pytest

from hybridqc import harness as hs
from hybridqc.errors import ReportParseError, UnsupportedVersion
from hybridqc.scenario import preset


@pytest.fixture(scope="module")
def report():
    cfg = preset("default-5.1", trials=30, pairs_per_symbol=2000, master_seed=5, attack="PassiveTap")
    return hs.run_scenario(cfg)


def test_round_trip(report, tmp_path):
    path = tmp_path / "r.txt"
    hs.persist_report(report, path)
    loaded = hs.load_report(path)
    assert loaded == report
    assert hs.format_report(loaded) == path.read_text()


def test_round_trip_with_undefined_sigma(tmp_path):
    rep = hs.run_scenario(preset("default-5.1", trials=1, pairs_per_symbol=200, master_seed=3))
    hs.persist_report(rep, tmp_path / "one.txt")
    loaded = hs.load_report(tmp_path / "one.txt")
    assert loaded == rep
    assert loaded.role("Bob").fid_sigma is None


def test_header_fields(report):
    text = hs.format_report(report)
    assert text.splitlines()[1] == "format_version = 1"
    assert "master_seed = 5" in text
    assert "config.attack = PassiveTap" in text


@pytest.mark.parametrize("cut", [10, 200, -1, -5])
def test_truncated(report, cut):
    data = hs.format_report(report).encode()
    with pytest.raises(ReportParseError):
        hs.parse_report(data[:cut])


def test_truncated_at_line_boundary(report):
    lines = hs.format_report(report).encode().splitlines(keepends=True)
    with pytest.raises(ReportParseError) as exc:
        hs.parse_report(b"".join(lines[:-1]))
    assert exc.value.field == "[end]"


def test_unsupported_version(report):
    data = hs.format_report(report).replace("format_version = 1", "format_version = 99").encode()
    with pytest.raises(UnsupportedVersion) as exc:
        hs.parse_report(data)
    assert exc.value.field == "format_version"


def test_bad_number_names_offset_and_field(report):
    text = hs.format_report(report)
    bad = text.replace("fidelity=", "fidelity=abc", 1)
    with pytest.raises(ReportParseError) as exc:
        hs.parse_report(bad.encode())
    assert exc.value.field == "fidelity"
    assert bad.encode()[exc.value.offset:].startswith(b"fidelity=abc")


def test_record_count_mismatch(report):
    text = hs.format_report(report)
    lines = text.splitlines(keepends=True)
    del lines[-2]
    with pytest.raises(ReportParseError) as exc:
        hs.parse_report("".join(lines).encode())
    assert exc.value.field == "records"


def test_bad_config_echo(report):
    text = hs.format_report(report).replace("config.depolarizing_p = 0.01", "config.depolarizing_p = 2")
    with pytest.raises(ReportParseError) as exc:
        hs.parse_report(text.encode())
    assert exc.value.field == "config.depolarizing_p"


def test_not_utf8():
    with pytest.raises(ReportParseError):
        hs.parse_report(b"\xff\xfe")


def test_dump_trials(report, tmp_path):
    path = tmp_path / "trials.tsv"
    hs.dump_trials(report.records, path)
    lines = path.read_text().splitlines()
    assert lines[0].split("\t") == ["trial", "role", "phi_true", "phi_est", "circ_err", "fidelity", "flags"]
    assert len(lines) == 1 + len(report.records)
    row = lines[1].split("\t")
    assert row[1] == "Bob"
    assert 0 <= float(row[4]) <= math.pi
