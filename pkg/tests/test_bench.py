"""Measurement harness tests.

Timing numbers are machine-dependent, so these tests pin down everything
else: grid shape, pacing guarantees, audit aborts, CSV and SVG artifacts.
"""

import math

import pytest

from pqc2 import bench, channel
from pqc2.errors import (
    AuditFailure,
    BadConfig,
    ConfigError,
    EmptyInput,
    UnknownScheme,
)

# small grids keep this file fast; the defaults are exercised by acceptance
SIZES = (64, 256)
REPS = 3


@pytest.fixture(scope="module")
def sv_records():
    return bench.bench_sign_verify(schemes=(1, 2), sizes=SIZES, reps=REPS)


class TestSignVerify:
    def test_grid_shape(self, sv_records):
        assert len(sv_records) == 2 * len(SIZES)
        cells = [(r.scheme, r.size_bytes) for r in sv_records]
        assert cells == [
            ("hash-merkle", 64), ("hash-merkle", 256),
            ("rsa-2048", 64), ("rsa-2048", 256),
        ]

    def test_reps_echoed(self, sv_records):
        assert all(r.reps == REPS for r in sv_records)

    def test_stats_positive_and_ordered(self, sv_records):
        for r in sv_records:
            assert r.sign_mean_us > 0 and r.verify_mean_us > 0
            # nearest-rank p95 can never fall below the median
            assert r.sign_p95_us >= r.sign_median_us
            assert r.verify_p95_us >= r.verify_median_us

    @pytest.mark.parametrize("kwargs", [
        {"reps": 0},
        {"schemes": ()},
        {"sizes": ()},
        {"sizes": (0,)},
        {"sizes": (-5,)},
    ])
    def test_bad_config(self, kwargs):
        with pytest.raises(BadConfig):
            bench.bench_sign_verify(**{"schemes": (1,), "sizes": (64,),
                                       "reps": 1, **kwargs})

    def test_unknown_scheme_rejected_before_any_work(self):
        with pytest.raises(UnknownScheme):
            bench.bench_sign_verify(schemes=(99,), sizes=(64,), reps=1)

    def test_verify_false_aborts(self, monkeypatch):
        monkeypatch.setattr(bench.crypto, "verify",
                            lambda *a, **k: False)
        with pytest.raises(AuditFailure):
            bench.bench_sign_verify(schemes=(2,), sizes=(64,), reps=1)

    def test_crossover_notes_mention_both_ratios(self, sv_records):
        notes = bench.crossover_notes(sv_records, at_size=256)
        assert len(notes) == 2
        assert any("sign" in n for n in notes)
        assert any("verify" in n for n in notes)
        for n in notes:
            assert "within 2x" in n or "outside 2x" in n

    def test_crossover_notes_absent_size(self, sv_records):
        assert bench.crossover_notes(sv_records, at_size=999) == []


class TestP95:
    def test_nearest_rank_oracle(self):
        # rank = ceil(0.95 * n); 1-indexed into the sorted list
        assert bench._p95(list(range(1, 21))) == 19
        assert bench._p95(list(range(1, 101))) == 95
        assert bench._p95([7.0]) == 7.0

    def test_order_independent(self):
        vals = [5.0, 1.0, 4.0, 2.0, 3.0]
        assert bench._p95(vals) == bench._p95(sorted(vals)) == 5.0


class TestThroughput:
    def test_cannot_overshoot_target(self):
        recs = bench.bench_throughput(modes=("none",), sizes=(706,),
                                      rates=(40,), duration=0.5)
        (rec,) = recs
        # exactly floor(duration*rate) sends on an absolute schedule
        assert rec.achieved_hz <= rec.target_hz * 1.0000001
        assert rec.achieved_hz == pytest.approx(40.0, rel=0.02)

    def test_secure_mode_cell(self):
        (rec,) = bench.bench_throughput(modes=("both",), sizes=(706,),
                                        rates=(25,), duration=0.4)
        assert rec.mode == "both"
        assert rec.achieved_hz > 0
        assert rec.achieved_hz <= rec.target_hz * 1.0000001

    def test_grid_order(self):
        recs = bench.bench_throughput(modes=("none",), sizes=(706, 1306),
                                      rates=(20, 40), duration=0.2)
        assert [(r.size_bytes, r.target_hz) for r in recs] == [
            (706, 20.0), (706, 40.0), (1306, 20.0), (1306, 40.0)]

    @pytest.mark.parametrize("kwargs,exc", [
        ({"duration": 0}, BadConfig),
        ({"duration": -1}, BadConfig),
        ({"rates": ()}, BadConfig),
        ({"rates": (0,)}, BadConfig),
        ({"sizes": ()}, BadConfig),
        ({"modes": ()}, BadConfig),
        ({"modes": ("tls",)}, ConfigError),
    ])
    def test_bad_config(self, kwargs, exc):
        base = {"modes": ("none",), "sizes": (706,), "rates": (10,),
                "duration": 0.2}
        with pytest.raises(exc):
            bench.bench_throughput(**{**base, **kwargs})


class TestHandshake:
    def test_both_default_suites(self):
        recs = bench.bench_handshake(reps=2)
        assert len(recs) == len(channel.DEFAULT_SUITES)
        for r in recs:
            assert r.suite.count("+") == 2  # sig+kem+aead naming
            assert r.reps == 2
            assert r.mean_ms > 0 and r.median_ms > 0

    def test_bad_config(self):
        with pytest.raises(BadConfig):
            bench.bench_handshake(reps=0)
        with pytest.raises(BadConfig):
            bench.bench_handshake(suites=[], reps=1)


class TestKernels:
    def test_every_backend_measured(self):
        from pqc2.kernels import available_backends
        recs = bench.bench_kernels(reps=1, leaves=64)
        by_backend = {}
        for r in recs:
            by_backend.setdefault(r.backend, set()).add(r.op)
            assert r.mean_us > 0
        assert set(by_backend) == set(available_backends())
        for ops in by_backend.values():
            assert ops == {"ots_leaf_hashes", "hash_tree_level"}

    def test_bad_config(self):
        with pytest.raises(BadConfig):
            bench.bench_kernels(reps=0)


class TestCsv:
    HEADERS = {
        "sign_verify": ("scheme,size_bytes,reps,sign_mean_us,sign_median_us,"
                        "sign_p95_us,verify_mean_us,verify_median_us,"
                        "verify_p95_us"),
        "throughput": "mode,size_bytes,target_hz,achieved_hz,duration_s",
        "handshake": "suite,reps,mean_ms,median_ms",
        "kernels": "backend,op,reps,mean_us",
    }

    def test_sign_verify_header_and_rows(self, sv_records, tmp_path):
        path = tmp_path / "sv.csv"
        bench.write_csv(sv_records, str(path))
        lines = path.read_text().splitlines()
        assert lines[0] == self.HEADERS["sign_verify"]
        assert len(lines) == 1 + len(sv_records)
        first = lines[1].split(",")
        assert first[0] == "hash-merkle"
        assert int(first[1]) == 64

    def test_float_cells_are_six_significant_digits(self, tmp_path):
        rec = bench.ThroughputRecord(mode="none", size_bytes=706,
                                     target_hz=5.0,
                                     achieved_hz=4.987654321,
                                     duration_s=10.0)
        path = tmp_path / "tp.csv"
        bench.write_csv([rec], str(path))
        lines = path.read_text().splitlines()
        assert lines[0] == self.HEADERS["throughput"]
        cells = lines[1].split(",")
        assert cells[3] == "4.98765"
        assert float(cells[3]) == pytest.approx(rec.achieved_hz, rel=1e-5)

    def test_handshake_and_kernel_headers(self, tmp_path):
        hs = bench.HandshakeRecord(suite="a+b+c", reps=2, mean_ms=1.5,
                                   median_ms=1.25)
        kr = bench.KernelRecord(backend="python", op="ots_leaf_hashes",
                                reps=1, mean_us=10.0)
        p1, p2 = tmp_path / "hs.csv", tmp_path / "kr.csv"
        bench.write_csv([hs], str(p1))
        bench.write_csv([kr], str(p2))
        assert p1.read_text().splitlines()[0] == self.HEADERS["handshake"]
        assert p2.read_text().splitlines()[0] == self.HEADERS["kernels"]

    def test_empty_input(self, tmp_path):
        with pytest.raises(EmptyInput):
            bench.write_csv([], str(tmp_path / "x.csv"))

    def test_mixed_record_types(self, tmp_path):
        hs = bench.HandshakeRecord(suite="a+b+c", reps=1, mean_ms=1.0,
                                   median_ms=1.0)
        kr = bench.KernelRecord(backend="python", op="x", reps=1, mean_us=1.0)
        with pytest.raises(BadConfig):
            bench.write_csv([hs, kr], str(tmp_path / "x.csv"))

    def test_unknown_record_type(self, tmp_path):
        with pytest.raises(BadConfig):
            bench.write_csv([object()], str(tmp_path / "x.csv"))


class TestPlots:
    def test_line_chart_svg(self, sv_records, tmp_path):
        path = tmp_path / "sv.svg"
        bench.emit_plot(sv_records, str(path))
        text = path.read_text()
        assert text.startswith("<svg")
        assert text.rstrip().endswith("</svg>")
        assert "polyline" in text
        assert "hash-merkle sign" in text  # legend

    def test_bar_chart_svg(self, tmp_path):
        recs = [bench.HandshakeRecord(suite=f"s{i}+k+a", reps=1,
                                      mean_ms=1.0 + i, median_ms=1.0 + i)
                for i in range(3)]
        path = tmp_path / "hs.svg"
        bench.emit_plot(recs, str(path))
        text = path.read_text()
        assert "<rect" in text
        assert "s2+k+a" in text

    def test_label_escaping(self, tmp_path):
        recs = [bench.KernelRecord(backend="a<b", op="x&y", reps=1,
                                   mean_us=5.0)]
        path = tmp_path / "k.svg"
        bench.emit_plot(recs, str(path))
        text = path.read_text()
        assert "a<b" not in text.split(">", 1)[1]
        assert "&amp;" in text

    def test_empty_input(self, tmp_path):
        with pytest.raises(EmptyInput):
            bench.emit_plot([], str(tmp_path / "x.svg"))

    def test_unknown_record_type(self, tmp_path):
        with pytest.raises(BadConfig):
            bench.emit_plot([object()], str(tmp_path / "x.svg"))


class TestStatsHelpers:
    def test_us_scaling(self):
        mean, median, p95 = bench._us([0.001, 0.002, 0.003])
        assert mean == pytest.approx(2000.0)
        assert median == pytest.approx(2000.0)
        assert p95 == pytest.approx(3000.0)

    def test_log_axis_uses_log10(self):
        # the size axis must spread decades evenly, or the small sizes all
        # collapse onto one pixel column
        assert math.log10(SIZES[1]) - math.log10(SIZES[0]) == pytest.approx(
            math.log10(4))
