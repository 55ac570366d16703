import json
import shutil
import subprocess
import sys

import pytest

from oddm_plots.cli import main
from oddm_plots.render import FigureSpec, RenderError, Table, dump_table, load_tables, render

RESULTS_HEADER = (
    "scheme,channel,mod_order,alpha,snr_db,frames,bits,bit_errors,ber,"
    "wrap_rate_tx,bound_pl,bound_mnl,bound_msl,bound_max,redraws"
)
BOUNDS_HEADER = "mod_order,alpha,snr_db,sigma_h1_sq,bound_pl,bound_mnl,bound_msl,bound_max"


def results_csv(tmp_path, name, rows):
    path = tmp_path / name
    path.write_text("\n".join([RESULTS_HEADER] + rows) + "\n")
    return str(path)


def sample_rows(scheme="oddm-thp", snrs=(30.0,), alphas=(1.0, 2.0)):
    rows = []
    for alpha in alphas:
        for snr in snrs:
            ber = 0.1 / (alpha * (1 + snr))
            bounds = f"{ber/3:.6g},{ber/2:.6g},{ber/4:.6g},{ber/2:.6g}" \
                if scheme == "oddm-thp" else "nan,nan,nan,nan"
            wrap = "0.01" if scheme == "oddm-thp" else "nan"
            rows.append(f"{scheme},eva,4,{alpha},{snr},32,4096,17,{ber:.6g},"
                        f"{wrap},{bounds},0")
    return rows


def is_png(path):
    with open(path, "rb") as fh:
        return fh.read(8) == b"\x89PNG\r\n\x1a\n"


class TestRenderKinds:
    def test_ber_vs_alpha(self, tmp_path):
        src = results_csv(tmp_path, "a.csv", sample_rows())
        out = tmp_path / "fig.png"
        assert main(["--kind", "ber-vs-alpha", "--in", src, "--out", str(out)]) == 0
        assert is_png(out)

    def test_ber_vs_snr_two_schemes(self, tmp_path):
        a = results_csv(tmp_path, "thp.csv",
                        sample_rows(snrs=(10.0, 20.0, 30.0), alphas=(2.0,)))
        b = results_csv(tmp_path, "ofdm.csv",
                        sample_rows("ofdm-single-tap", snrs=(10.0, 20.0, 30.0),
                                    alphas=(2.0,)))
        out = tmp_path / "fig.png"
        assert main(["--kind", "ber-vs-snr", "--in", a, b, "--out", str(out)]) == 0
        assert is_png(out)

    def test_bounds_overlay(self, tmp_path):
        path = tmp_path / "bounds.csv"
        rows = [f"4,{a},30,1,{0.01/a:.6g},{0.02/a:.6g},{0.03/a:.6g},{0.03/a:.6g}"
                for a in (0.6, 1.0, 1.4)]
        path.write_text("\n".join([BOUNDS_HEADER] + rows) + "\n")
        out = tmp_path / "fig.png"
        assert main(["--kind", "bounds-overlay", "--in", str(path),
                     "--out", str(out)]) == 0
        assert is_png(out)

    def test_linear_y(self, tmp_path):
        src = results_csv(tmp_path, "a.csv", sample_rows())
        out = tmp_path / "fig.png"
        assert main(["--kind", "ber-vs-alpha", "--in", src, "--out", str(out),
                     "--no-log-y"]) == 0
        assert is_png(out)


class TestDumpTable:
    def test_echoes_rows_exactly(self, tmp_path, capsys):
        rows = sample_rows()
        src = results_csv(tmp_path, "a.csv", rows)
        out = tmp_path / "fig.png"
        code = main(["--kind", "ber-vs-alpha", "--in", src, "--out", str(out),
                     "--dump-table"])
        assert code == 0
        got = capsys.readouterr().out.strip().split("\n")
        assert got[0] == RESULTS_HEADER
        assert got[1:] == rows

    def test_preserves_input_order(self, tmp_path):
        rows = sample_rows(alphas=(2.0, 0.6, 1.4))  # deliberately unsorted
        table = load_tables([results_csv(tmp_path, "a.csv", rows)])
        assert dump_table(table).split("\n")[1:] == rows


class TestErrors:
    def test_missing_column_named(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("alpha,foo\n1.0,2.0\n")
        out = tmp_path / "fig.png"
        code = main(["--kind", "ber-vs-alpha", "--in", str(path), "--out", str(out)])
        assert code == 2
        assert "ber" in capsys.readouterr().err
        assert not out.exists()

    def test_empty_csv(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text(RESULTS_HEADER + "\n")
        out = tmp_path / "fig.png"
        assert main(["--kind", "ber-vs-alpha", "--in", str(path),
                     "--out", str(out)]) == 2
        assert not out.exists()

    def test_header_mismatch(self, tmp_path):
        a = results_csv(tmp_path, "a.csv", sample_rows())
        b = tmp_path / "b.csv"
        b.write_text("alpha,ber\n1,0.1\n")
        with pytest.raises(RenderError):
            load_tables([a, str(b)])

    def test_unknown_kind(self, tmp_path):
        src = results_csv(tmp_path, "a.csv", sample_rows())
        with pytest.raises(RenderError, match="unknown figure kind"):
            render(FigureSpec(kind="pie", inputs=[src], output="x.png"))


@pytest.mark.skipif(shutil.which("oddm-thp") is None,
                    reason="simulator CLI not installed")
class TestCriterion10:
    """Acceptance: render the three kinds from real simulator CSVs."""

    def _run_sim(self, tmp_path, name, scheme, alphas, snrs):
        cfg = {
            "scheme": scheme,
            "grid": {"m_delay": 16, "n_doppler": 8, "delta_f": 15000.0, "cp_len": 4},
            "thp": {"order": 4},
            "channel": "eva" if scheme == "oddm-thp" else "hsr",
            "snr_db_list": snrs,
            "alpha_list": alphas,
            "max_frames": 4,
            "target_errors": 100,
            "seed": 10,
        }
        cfg_path = tmp_path / f"{name}.json"
        cfg_path.write_text(json.dumps(cfg))
        out = tmp_path / f"{name}.csv"
        subprocess.run(["oddm-thp", "sweep", "--config", str(cfg_path),
                        "--out", str(out)], check=True, capture_output=True)
        return str(out)

    def test_all_three_kinds_from_simulator_output(self, tmp_path, capsys):
        alpha_csv = self._run_sim(tmp_path, "c6", "oddm-thp",
                                  [0.8, 1.6, 2.4], [30.0])
        snr_thp = self._run_sim(tmp_path, "c7a", "oddm-thp", [2.0],
                                [10.0, 20.0, 30.0])
        snr_ofdm = self._run_sim(tmp_path, "c7b", "ofdm-single-tap", [2.0],
                                 [10.0, 20.0, 30.0])
        bounds_csv = tmp_path / "bounds.csv"
        subprocess.run(["oddm-thp", "bounds", "--mod", "4", "--alpha",
                        "0.6:3.0:0.4", "--snr-db", "30",
                        "--sigma-h1-sq", "0.9", "--out", str(bounds_csv)],
                       check=True, capture_output=True)

        ok = True
        for kind, inputs in (
            ("ber-vs-alpha", [alpha_csv]),
            ("ber-vs-snr", [snr_thp, snr_ofdm]),
            ("bounds-overlay", [str(bounds_csv)]),
        ):
            out = tmp_path / f"{kind}.png"
            code = main(["--kind", kind, "--in", *inputs, "--out", str(out),
                         "--dump-table"])
            dumped = capsys.readouterr().out.strip().split("\n")
            source_rows = []
            header = None
            for path in inputs:
                lines = open(path).read().strip().split("\n")
                header = lines[0]
                source_rows.extend(lines[1:])
            ok = ok and code == 0 and is_png(out)
            ok = ok and dumped[0] == header and dumped[1:] == source_rows
        status = "PASS" if ok else "FAIL"
        print(f"ACCEPTANCE 10: three figure kinds render from simulator CSVs: {status}")
        assert ok
