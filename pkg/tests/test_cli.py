import csv

import pytest

from qmmofdm.cli import main, parse_curve, read_config_file
from qmmofdm.errors import ConfigurationError
from qmmofdm.simulation import PLOT_HEADER, RECORD_HEADER

TABLE_3_3 = """\
rank,bits,codeword,used
0,000,0 0 0,1
1,001,0 1 2,1
2,010,0 2 1,1
3,011,1 0 2,1
4,100,1 1 1,1
5,101,1 2 0,1
6,110,2 0 1,1
7,111,2 1 0,1
8,,2 2 2,0
"""


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestTable:
    def test_q3_n3_exact(self, capsys):
        assert main(["table", "--q", "3", "--n", "3"]) == 0
        assert capsys.readouterr().out == TABLE_3_3

    def test_to_file(self, tmp_path):
        out = tmp_path / "t.csv"
        assert main(["table", "--q", "2", "--n", "4", "--out", str(out)]) == 0
        got = rows(out)
        assert len(got) == 8 and all(r["used"] == "1" for r in got)

    def test_single_mode_has_one_codeword(self, capsys):
        assert main(["table", "--q", "1", "--n", "3"]) == 0
        assert capsys.readouterr().out.splitlines()[1:] == ["0,,0 0 0,1"]

    def test_invalid_q(self):
        assert main(["table", "--q", "0", "--n", "3"]) == 2


class TestConstellation:
    def test_qpsk(self, tmp_path):
        out = tmp_path / "c.csv"
        assert main(["constellation", "--q", "1", "--m", "4", "--out", str(out)]) == 0
        pts = [(float(r["re"]), float(r["im"])) for r in rows(out)]
        assert pts == [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]

    def test_qam_row_count(self, tmp_path):
        out = tmp_path / "c.csv"
        assert main(["constellation", "--family", "qam", "--q", "4", "--m", "4", "--out", str(out)]) == 0
        got = rows(out)
        assert len(got) == 16
        assert sum(float(r["re"]) ** 2 + float(r["im"]) ** 2 for r in got) == pytest.approx(16)

    def test_unsupported_size(self, capsys):
        assert main(["constellation", "--family", "qam", "--q", "3", "--m", "2"]) == 2
        assert "error" in capsys.readouterr().err


class TestBound:
    def test_columns_and_monotone(self, tmp_path):
        out = tmp_path / "b.csv"
        assert main(["bound", "--q", "4", "--n", "4", "--m", "2", "--snr-db", "10:30:10", "--out", str(out)]) == 0
        got = rows(out)
        assert list(got[0]) == ["snr_db", "union_bound"]
        vals = [float(r["union_bound"]) for r in got]
        assert vals[0] > vals[1] > vals[2]

    def test_guard_rail_exit_code(self, capsys):
        assert main(["bound", "--q", "16", "--n", "4", "--m", "2"]) == 3
        assert "guard rail" in capsys.readouterr().err


class TestSimulate:
    ARGS = ["simulate", "--q", "3", "--n", "3", "--m", "1", "--min-bit-errors", "100", "--batch-blocks", "256"]

    def test_csv_and_plot_data(self, tmp_path):
        out, plot = tmp_path / "r.csv", tmp_path / "p.csv"
        assert main(self.ARGS + ["--snr-db=-50,10", "--out", str(out), "--plot-out", str(plot)]) == 0
        with open(out) as fh:
            assert fh.readline().strip() == ",".join(RECORD_HEADER)
        got = rows(out)
        assert [float(r["snr_db"]) for r in got] == [-50.0, 10.0]
        assert abs(float(got[0]["ber"]) - 0.5) < 0.05
        assert plot.read_text().splitlines()[0] == ",".join(PLOT_HEADER)

    def test_repeatable(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(self.ARGS + ["--snr-db", "5", "--seed", "11", "--out", str(a)])
        main(self.ARGS + ["--snr-db", "5", "--seed", "11", "--out", str(b)])
        assert a.read_text() == b.read_text()

    def test_bad_grid(self):
        assert main(self.ARGS + ["--snr-db", "10,5"]) == 2

    def test_lcml_rejected_for_baseline(self):
        assert main(["simulate", "--scheme", "ofdm", "--detector", "lcml"]) == 2

    def test_unknown_flag(self):
        assert main(["simulate", "--colour", "red"]) == 2


class TestConfigFile:
    def test_parse(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("# sweep\nq = 8\nmin-bit-errors = 50  # short\n\n")
        assert read_config_file(cfg) == {"q": "8", "min_bit_errors": "50"}

    def test_malformed(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("q 8\n")
        with pytest.raises(ConfigurationError):
            read_config_file(cfg)

    def test_flags_override_file(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("q = 2\nn = 3\n")
        out = tmp_path / "t.csv"
        assert main(["table", "--config", str(cfg), "--q", "3", "--out", str(out)]) == 0
        assert len(rows(out)) == 9
        assert main(["table", "--config", str(cfg), "--out", str(out)]) == 0
        assert len(rows(out)) == 4

    def test_unknown_key(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("detector = ml\n")
        assert main(["table", "--config", str(cfg)]) == 2


class TestCompare:
    def test_empty_is_header_only(self, capsys):
        assert main(["compare"]) == 0
        assert capsys.readouterr().out == ",".join(RECORD_HEADER) + "\n"

    def test_curves_merge(self, tmp_path):
        out = tmp_path / "c.csv"
        args = [
            "compare",
            "--curve", "scheme=qmm,q=3,n=3,m=1",
            "--curve", "scheme=ofdm,n=3,m=2",
            "--curve", "scheme=qmm,q=3,n=3,m=1,detector=bound",
            "--snr-db", "10", "--min-bit-errors", "50", "--out", str(out),
        ]
        assert main(args) == 0
        keys = {(r["scheme"], r["detector"]) for r in rows(out)}
        assert keys == {("qmm-psk(3,3,1)", "ml"), ("qmm-psk(3,3,1)", "bound"), ("qmm-psk(1,3,2)", "ml")}

    def test_bad_curve(self):
        with pytest.raises(ConfigurationError):
            parse_curve("scheme")
        assert main(["compare", "--curve", "scheme=qmm,colour=red"]) == 2
