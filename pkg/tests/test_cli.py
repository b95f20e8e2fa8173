import csv
import io
import json
import math

import pytest

from cli import runner, selfcheck
from cli.output import ResultTable, error_record, format_value, render, split_complex
from cli.runner import (
    RunConfig,
    SweepSpec,
    build_parser,
    config_from_args,
    main,
    parse_values,
    run,
)
from cli.selfcheck import CHECKS, CheckStatus, run_selfcheck
from core.errors import RootNotBracketed
from decay import rates
from decay.rates import rate_semiclassical
from dynamics.path_series import path_coefficients
from modes.params import CavityParams


def data_rows(text: str) -> list[list[str]]:
    """csv rows without the '#' header block"""
    lines = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.reader(lines))


class TestArguments:
    """test sweep and value parsing"""

    def test_sweep_spec(self):
        """inclusive grids"""
        sweep = SweepSpec.parse("1:3:5")
        assert sweep.values() == [1.0, 1.5, 2.0, 2.5, 3.0]
        assert str(sweep) == "1.0:3.0:5"

    def test_invalid_sweeps(self):
        """malformed grids are rejected"""
        for text in ("3:1:5", "1:3:1", "1:3", "a:b:c"):
            with pytest.raises(ValueError):
                SweepSpec.parse(text)

    def test_parse_values(self):
        """single values, lists and grids"""
        test_cases = [
            ("0.5", (0.5,)),
            ("0.01,5", (0.01, 5.0)),
            ("0:1:3", (0.0, 0.5, 1.0)),
            ([1, 2], (1.0, 2.0)),
        ]
        for text, expected in test_cases:
            assert parse_values(text) == expected
        assert parse_values("0,1,10", int) == (0, 1, 10)

    def test_axial_labels_set_u(self):
        """--n outside quantize selects u = pi(n + 1/2)"""
        args = build_parser().parse_args(["rate", "--n", "0,2"])
        config = config_from_args(args)
        assert config.u_values() == [math.pi / 2, 2.5 * math.pi]

    def test_config_file_overrides_flags(self, tmp_path):
        """--config keys win over the command line"""
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"u": 3.0, "m_max": 4}), encoding="utf-8")
        args = build_parser().parse_args(["rate", "--u", "1.0", "--config", str(path)])
        config = config_from_args(args)
        assert config.params.u == 3.0
        assert config.params.m_max == 4

    def test_unknown_command(self):
        """RunConfig validates command and format"""
        with pytest.raises(ValueError):
            RunConfig(command="plot", params=CavityParams(u=1.0))
        with pytest.raises(ValueError):
            RunConfig(command="rate", params=CavityParams(u=1.0), format="xml")


class TestOutput:
    """test result tables and serialisation"""

    def test_split_complex(self):
        """modulus and phase"""
        modulus, phase = split_complex(-1.0 + 0j)
        assert modulus == 1.0
        assert phase == pytest.approx(math.pi)

    def test_format_value(self):
        """floats round-trip through repr"""
        assert format_value(0.1) == "0.1"
        assert float(format_value(1 / 3)) == 1 / 3
        assert format_value(True) == "true"
        assert format_value(math.nan) == "nan"

    def test_row_width(self):
        """rows must match the columns"""
        table = ResultTable(command="rate", columns=["u", "exact"])
        with pytest.raises(ValueError):
            table.add_row(1.0)

    def test_csv_and_json(self):
        """csv carries '#' headers, json the same content"""
        table = ResultTable(command="rate", columns=["u", "semiclassical"], meta={"config": {"u": 2.0}})
        table.add_row(2.0, 0.75)
        text = render(table, "csv")
        assert text.startswith("# paraqed ")
        assert data_rows(text) == [["u", "semiclassical"], ["2.0", "0.75"]]
        document = json.loads(render(table, "json"))
        assert document["rows"] == [[2.0, 0.75]]
        assert document["meta"]["config"] == {"u": 2.0}
        with pytest.raises(ValueError):
            render(table, "xml")

    def test_error_record(self):
        """errors serialise with their context"""
        record = json.loads(error_record(RootNotBracketed("not bracketed", n=3, bracket=[0.0, 1.0])))
        assert record == {
            "error": "RootNotBracketed",
            "message": "not bracketed",
            "context": {"n": 3, "bracket": [0.0, 1.0]},
        }
        assert json.loads(error_record(ValueError("bad")))["error"] == "ValueError"


class TestCommands:
    """test end-to-end runs"""

    def test_deterministic_output(self, tmp_path):
        """identical configurations give byte-identical files"""
        argv = ["rate", "--u-sweep", "1:5:9", "--method", "semiclassical,linear", "--threads", "2"]
        first, second = tmp_path / "first.csv", tmp_path / "second.csv"
        assert main([*argv, "--out", str(first)]) == 0
        assert main([*argv, "--out", str(second)]) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_config_reproduces_file(self, tmp_path):
        """the header configuration fed back through --config reproduces the table"""
        first = tmp_path / "first.csv"
        assert main(["rate", "--u-sweep", "2:4:3", "--method", "semiclassical", "--out", str(first)]) == 0
        header = [line for line in first.read_text().splitlines() if line.startswith("# config: ")][0]
        config_path = tmp_path / "config.json"
        config_path.write_text(header[len("# config: ") :], encoding="utf-8")

        second = tmp_path / "second.csv"
        assert main(["rate", "--config", str(config_path), "--out", str(second)]) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_quantize_axial_mode(self):
        """quantize reports alpha = 0 on the axial resonance"""
        args = build_parser().parse_args(["quantize", "--u", repr(math.pi / 2), "--n", "0"])
        stream = io.StringIO()
        assert run(config_from_args(args), stream) == 0
        rows = data_rows(stream.getvalue())
        assert rows[0][:3] == ["u", "n", "alpha_over_k"]
        assert abs(float(rows[1][2])) < 1e-8

    def test_decay_columns(self):
        """decay splits every method into modulus and phase"""
        args = build_parser().parse_args(
            ["decay", "--n", "0", "--gamma-s-T", "0.01", "--t", "0:2:5", "--method", "path,pole", "--format", "json"]
        )
        stream = io.StringIO()
        assert run(config_from_args(args), stream) == 0
        document = json.loads(stream.getvalue())
        assert document["columns"] == ["u", "gamma_s_T", "t_over_T", "path_abs", "path_phase", "pole_abs", "pole_phase"]
        assert len(document["rows"]) == 5
        assert document["rows"][0][3] == 1.0

    def test_tdist_reports_integral(self):
        """tdist header carries the plane integral"""
        args = build_parser().parse_args(["tdist", "--n", "1", "--y", "0:4:9", "--format", "json"])
        stream = io.StringIO()
        assert run(config_from_args(args), stream) == 0
        document = json.loads(stream.getvalue())
        (integral,) = document["meta"]["plane_integral"].values()
        assert integral == pytest.approx(1.0, abs=1e-6)
        assert len(document["rows"]) == 9

    def test_invalid_arguments_exit_code(self, tmp_path, capsys):
        """bad configuration exits 2 with a json error record on stderr"""
        assert main(["rate", "--u-sweep", "5:1:3"]) == 2
        assert main(["rate", "--u", "1", "--out", str(tmp_path / "missing" / "x.csv")]) == 2
        record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert record["error"] == "ValueError"

    def test_runtime_failure_exit_code(self, capsys):
        """failures while computing exit 1"""
        assert main(["rate", "--u", "2", "--method", "bogus"]) == 1
        assert "unknown rate method" in capsys.readouterr().err

    def test_unexpected_failure_exit_code(self, monkeypatch, capsys):
        """an error outside the package hierarchy still exits 1 with a json record"""

        def broken(config):
            raise ZeroDivisionError("division by zero")

        monkeypatch.setitem(runner.HANDLERS, "rate", broken)
        assert main(["rate", "--u", "2"]) == 1
        record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert record["error"] == "ZeroDivisionError"
        assert record["message"] == "division by zero"


class TestSelfcheck:
    """test the invariant suite"""

    def test_all_checks_pass(self):
        """the default truncation passes every invariant"""
        results = run_selfcheck()
        assert len(results) == len(CHECKS)
        failed = [r.name for r in results if r.status is CheckStatus.FAIL]
        assert failed == []
        assert all(r.status is CheckStatus.PASS for r in results)

    def test_reflection_checks_skip_without_reflections(self):
        """m_max = 0 skips the checks that need bounce terms"""
        results = {r.name: r for r in run_selfcheck(m_max=0)}
        assert results["path series matches the contour oracle"].status is CheckStatus.SKIP
        assert results["advanced and retarded moduli agree"].status is CheckStatus.SKIP
        assert results["unarrived reflections do not contribute"].status is CheckStatus.SKIP
        assert results["exact and semiclassical rates agree"].status is CheckStatus.SKIP
        assert results["resonant self-energy gives the rate"].status is CheckStatus.PASS
        assert results["transverse distribution carries one photon"].status is CheckStatus.PASS
        assert results["reflection-free amplitude is the free exponential"].status is CheckStatus.PASS

    def test_only_selected_checks(self):
        """a name filter runs just those checks and rejects unknown names"""
        results = run_selfcheck(only=["sinh kernels are even"])
        assert [r.name for r in results] == ["sinh kernels are even"]
        with pytest.raises(ValueError):
            run_selfcheck(only=["no such check"])

    def test_broken_coupling_is_reported(self, monkeypatch):
        """a wrong coupling prefactor breaks the one-photon normalization"""
        name = "transverse distribution carries one photon"
        rate_semiclassical.cache_clear()
        path_coefficients.cache_clear()
        monkeypatch.setattr(rates, "COUPLING_PREFACTOR", 2.0 * rates.COUPLING_PREFACTOR)
        try:
            (result,) = run_selfcheck(only=[name])
        finally:
            monkeypatch.undo()
            rate_semiclassical.cache_clear()
            path_coefficients.cache_clear()
        assert result.status is CheckStatus.FAIL
        assert result.measured > result.tolerance

    def test_raising_check_is_a_failure(self, monkeypatch):
        """a check that raises any exception is recorded as FAIL and the rest still run"""

        def broken(m_max):
            raise ZeroDivisionError("division by zero")

        name = "sinh kernels are even"
        checks = [(n, broken if n == name else fn, tol) for n, fn, tol in CHECKS]
        monkeypatch.setattr(selfcheck, "CHECKS", checks)
        results = {r.name: r for r in run_selfcheck(only=[name, "free emission pattern carries one photon"])}
        assert results[name].status is CheckStatus.FAIL
        assert math.isnan(results[name].measured)
        assert results["free emission pattern carries one photon"].status is CheckStatus.PASS
