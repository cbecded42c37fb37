import json
import re
from fractions import Fraction as F

import pytest

from ccbp import harness
from ccbp.cli import main
from ccbp.core import parse_instance
from ccbp.generators import gen_batched, gen_poc_general, gen_wf_k2_lower
from ccbp.harness import CSV_COLUMNS, IncompatibleProcedure, expand_grid, fuzz, read_csv, run, sweep
from ccbp.plot import emit_plot


class TestRun:
    def test_batched(self):
        rep = run(gen_batched(4, 8, 2), "batched_cost")
        assert (rep.measured_cost, rep.opt_cost, rep.ratio, rep.prediction_match) == (14, 8, F(7, 4), True)

    def test_wf_k2(self):
        rep = run(gen_wf_k2_lower(2), "worst_fit")
        assert (rep.measured_cost, rep.opt_cost, rep.ratio) == (6, 4, F(3, 2))

    def test_poc_row(self):
        row = run(gen_poc_general(3, 10)).row()
        assert row["ratio_exact"] == "49/20" and row["ratio_dec"] == "2.45"
        assert row["measured"] == "98" and row["opt"] == "40" and row["match"] == "true"
        assert list(row) == list(CSV_COLUMNS)

    def test_incompatible(self):
        with pytest.raises(IncompatibleProcedure):
            run(gen_poc_general(3, 4), "batched_cost")

    def test_ratio_decimal_six_digits(self):
        assert harness.ratio_decimal(F(173, 64)) == "2.70312"
        assert harness.ratio_decimal(F(55, 26)) == "2.11538"


class TestSweep:
    def test_poc_sweep_increasing(self):
        rows = read_csv(sweep("poc_general", {"k": [3], "N": list(range(4, 21))}))
        assert len(rows) == 17
        ratios = [F(r["ratio_exact"]) for r in rows]
        assert all(a < b for a, b in zip(ratios, ratios[1:]))
        assert all(r["match"] == "true" for r in rows)

    def test_nf_points(self):
        rows = read_csv(sweep("nf_lower", [{"k": k, "N": 8 * k} for k in (2, 4, 8)]))
        assert [r["ratio_exact"] for r in rows] == ["29/16", "77/32", "173/64"]
        gaps = [3 - F(2, int(r["k"])) - F(r["ratio_exact"]) for r in rows]
        assert all(0 < g < F(1, 2) for g in gaps)

    def test_empty_grid(self):
        assert sweep("poc_general", {}) == ",".join(CSV_COLUMNS) + "\n"

    def test_error_rows_continue(self):
        rows = read_csv(sweep("poc_general", {"k": [3], "N": [3, 4]}))
        assert rows[0]["error"] and not rows[0]["measured"]
        assert rows[1]["measured"] == "38" and not rows[1]["error"]

    def test_parallel_matches_serial(self):
        grid = {"k": [3, 4], "N": [5, 6, 7]}
        assert sweep("poc_general", grid, workers=2) == sweep("poc_general", grid)

    def test_expand_grid_order(self):
        assert expand_grid({"k": [2, 3], "N": [4]}) == [{"k": 2, "N": 4}, {"k": 3, "N": 4}]


class TestFuzz:
    def test_zero_count(self):
        rep = fuzz(1, 0)
        assert rep.passed and all(v == 0 for v in rep.checked.values())

    def test_forced_singletons(self):
        rep = fuzz(3, 50, k_min=2, k_max=2, min_size=F(1, 2), checks=("nf", "wf"))
        assert rep.passed and rep.checked == {"nf": 50, "wf": 50}

    def test_deterministic_and_parallel(self):
        a = fuzz(7, 40, checks=("poc", "batched"))
        b = fuzz(7, 40, checks=("poc", "batched"), workers=2)
        assert a.checked == b.checked and a.violations == b.violations

    def test_detects_a_broken_packer(self, monkeypatch):
        # with k = 2 and tiny items, one bin per item exceeds (3/2) OPT + 1 once n >= 6
        from ccbp import algorithms
        from ccbp.core import Packing

        monkeypatch.setattr(
            algorithms, "worst_fit", lambda inst: Packing.from_ids(inst, [[it.id] for it in inst.items])
        )
        rep = fuzz(1, 60, k_min=2, k_max=2, beta=F(1, 32), checks=("wf",))
        assert rep.violations
        bad = rep.violations[0]
        assert bad.check == "wf" and parse_instance(bad.instance).n >= 6

    def test_unknown_check(self):
        with pytest.raises(ValueError):
            fuzz(1, 1, checks=("bogus",))


class TestPlot:
    def test_empty(self):
        svg = emit_plot(sweep("poc_general", {}))
        assert svg.startswith("<svg") and "<circle" not in svg and "<polyline" not in svg

    def test_single_point(self):
        svg = emit_plot(sweep("poc_general", {"k": [3], "N": [4]}))
        assert svg.count("<circle") == 1 and "<polyline" not in svg
        assert 'stroke-dasharray="6,4"' in svg

    def test_curve_below_target(self):
        svg = emit_plot(sweep("poc_general", {"k": [3], "N": list(range(4, 12))}))
        target_y = float(re.search(r'<line x1="60" y1="([\d.]+)" x2="620" y2="[\d.]+" stroke="#', svg).group(1))
        ys = [float(y) for y in re.findall(r'<circle cx="[\d.]+" cy="([\d.]+)"', svg)]
        assert len(ys) == 8 and all(y > target_y for y in ys)  # SVG y grows downward
        assert ys == sorted(ys, reverse=True)

    def test_deterministic(self):
        csv_text = sweep("wf_lower", {"k": [4], "N": [4, 8]})
        assert emit_plot(csv_text) == emit_plot(csv_text)


class TestCli:
    def test_run(self, capsys):
        assert main(["run", "poc_general", "--k", "3", "--N", "10"]) == 0
        assert "ratio=49/20" in capsys.readouterr().out

    def test_run_incompatible_is_usage_error(self, capsys):
        assert main(["run", "batched", "--k", "4", "--N", "8", "--q", "2", "--procedure", "next_fit"]) == 2

    def test_gen_opt_poc_batched(self, tmp_path, capsys):
        path = str(tmp_path / "b.txt")
        assert main(["gen", "batched", "--k", "4", "--N", "8", "--q", "2", "--out", path]) == 0
        meta = json.loads(open(path + ".json").read())
        assert meta["predicted_cost"] == 14 and meta["target_ratio"] == "7/4" and len(meta["opt_packing"]) == 8
        assert main(["opt", path]) == 0
        assert "opt=8" in capsys.readouterr().out
        assert main(["batched", path, "--q", "2", "--repack"]) == 0
        out = capsys.readouterr().out
        assert "batched=14" in out and "repack=14" in out
        cpath = str(tmp_path / "c.txt")
        main(["gen", "poc_general", "--k", "2", "--N", "3", "--out", cpath])
        capsys.readouterr()
        assert main(["poc", cpath]) == 0
        assert "clustered=16 opt=9" in capsys.readouterr().out

    def test_verify_weights(self, capsys):
        assert main(["verify-weights", "nf_lower", "--k", "4", "--N", "8", "--weight", "nf"]) == 0
        assert main(["verify-weights", "nf_lower", "--k", "4", "--N", "8", "--weight", "nf", "--slack", "-1"]) == 1

    def test_sweep_and_plot_byte_identical(self, tmp_path):
        outs = []
        for name in ("a", "b"):
            csv_path, svg_path = tmp_path / f"{name}.csv", tmp_path / f"{name}.svg"
            assert main(["sweep", "poc_general", "--k", "3", "--N", "4..8", "--out", str(csv_path)]) == 0
            assert main(["plot", str(csv_path), "--out", str(svg_path)]) == 0
            outs.append((csv_path.read_bytes(), svg_path.read_bytes()))
        assert outs[0] == outs[1]

    def test_sweep_nonzero_on_error_row(self, tmp_path):
        assert main(["sweep", "nf_lower", "--point", "k=3,N=5", "--out", str(tmp_path / "x.csv")]) == 1

    def test_fuzz(self, capsys):
        assert main(["fuzz", "--count", "20", "--checks", "nf,vp"]) == 0
        assert "violations: 0" in capsys.readouterr().out
