import subprocess
import sys

import numpy as np
import pytest

from amrc.cli import main, read_sidecar
from amrc.errors import DataError
from amrc.fields import layered, smooth


def write_inputs(tmp_path, array, dims, value_kind, extra_meta=""):
    raw = tmp_path / "data.raw"
    meta = tmp_path / "data.meta"
    np.ascontiguousarray(array).tofile(raw)
    meta.write_text(
        f"# test sidecar\ndims={','.join(str(d) for d in dims)}\n"
        f"value_kind={value_kind}\norder=row-major-last-fastest\n" + extra_meta)
    return raw, meta


class TestSidecar:
    def test_parse(self, tmp_path):
        p = tmp_path / "m"
        p.write_text("dims=4,4\nvalue_kind=f32\norder=row-major-last-fastest\n"
                     "scale_factor=0.5\noffset=2.0\n")
        meta = read_sidecar(p)
        assert meta.dims == (4, 4) and meta.value_kind == "f32"
        assert meta.scale_factor == 0.5 and meta.offset == 2.0

    def test_missing_value_note_rejected(self, tmp_path):
        p = tmp_path / "m"
        p.write_text("dims=4,4\nvalue_kind=f32\norder=row-major-last-fastest\n"
                     "missing_value=-999\n")
        with pytest.raises(DataError):
            read_sidecar(p)

    def test_unknown_key_rejected(self, tmp_path):
        p = tmp_path / "m"
        p.write_text("dims=4,4\nvalue_kind=f32\norder=row-major-last-fastest\nfoo=1\n")
        with pytest.raises(DataError):
            read_sidecar(p)

    def test_wrong_order_rejected(self, tmp_path):
        p = tmp_path / "m"
        p.write_text("dims=4,4\nvalue_kind=f32\norder=column-major\n")
        with pytest.raises(DataError):
            read_sidecar(p)


class TestCompressDecompress:
    def test_constant_field_huge_ratio(self, tmp_path, capsys):
        data = np.full((64, 64), 4.5, dtype=np.float32)
        raw, meta = write_inputs(tmp_path, data, (64, 64), "f32")
        out = tmp_path / "a.amrc"
        assert main(["compress", "--input", str(raw), "--meta", str(meta),
                     "--abs", "0.1", "--output", str(out)]) == 0
        stats = capsys.readouterr().out
        ratio = float(stats.split("ratio=")[1].split()[0])
        assert ratio > 100
        assert "leaves=1" in stats

        back = tmp_path / "back.raw"
        assert main(["decompress", "--input", str(out), "--output", str(back)]) == 0
        assert np.array_equal(np.fromfile(back, dtype="<f4"), data.reshape(-1))

    def test_zero_bound_roundtrip_byte_identical(self, tmp_path, capsys):
        rng = np.random.default_rng(5)
        data = rng.normal(size=(13, 9)).astype(np.float64)
        raw, meta = write_inputs(tmp_path, data, (13, 9), "f64")
        out = tmp_path / "a.amrc"
        assert main(["compress", "--input", str(raw), "--meta", str(meta),
                     "--abs", "0", "--output", str(out)]) == 0
        # mesh overhead only: output payload at least the input payload
        stats = capsys.readouterr().out
        outb = int(stats.split("output_bytes=")[1].split()[0])
        assert outb >= data.nbytes
        back = tmp_path / "b.raw"
        assert main(["decompress", "--input", str(out), "--output", str(back)]) == 0
        assert back.read_bytes() == raw.read_bytes()

    def test_domain_corner_bit_exact(self, tmp_path, capsys):
        field = smooth((32, 32), seed=21).astype(np.float64) * 10
        raw, meta = write_inputs(tmp_path, field, (32, 32), "f64")
        out = tmp_path / "a.amrc"
        assert main(["compress", "--input", str(raw), "--meta", str(meta),
                     "--abs", "5.0", "--domain", "0:8,0:8=0.0",
                     "--output", str(out)]) == 0
        back = tmp_path / "b.raw"
        assert main(["decompress", "--input", str(out), "--output", str(back)]) == 0
        got = np.fromfile(back, dtype="<f8").reshape(32, 32)
        assert np.array_equal(got[:8, :8], field[:8, :8])
        assert np.abs(got - field).max() <= 5.0

    def test_split_axis_roundtrip(self, tmp_path, capsys):
        field = layered((6, 16, 16), seed=3)
        raw, meta = write_inputs(tmp_path, field, (6, 16, 16), "f64")
        out = tmp_path / "a.amrc"
        assert main(["compress", "--input", str(raw), "--meta", str(meta),
                     "--abs", "1.0", "--split-axis", "0",
                     "--mode", "one-for-all", "--output", str(out)]) == 0
        back = tmp_path / "b.raw"
        assert main(["decompress", "--input", str(out), "--output", str(back),
                     "--split-axis", "0"]) == 0
        got = np.fromfile(back, dtype="<f8").reshape(6, 16, 16)
        assert np.abs(got - field).max() <= 1.0

    def test_packed_sidecar(self, tmp_path, capsys):
        rng = np.random.default_rng(8)
        data = rng.integers(-200, 200, size=(16, 16)).astype(np.int16)
        raw, meta = write_inputs(tmp_path, data, (16, 16), "i16",
                                 extra_meta="scale_factor=0.0078125\noffset=100.0\n")
        out = tmp_path / "a.amrc"
        assert main(["compress", "--input", str(raw), "--meta", str(meta),
                     "--abs", "0.5", "--output", str(out)]) == 0
        back = tmp_path / "b.raw"
        assert main(["decompress", "--input", str(out), "--output", str(back)]) == 0
        got = np.fromfile(back, dtype="<i2").astype(np.float64)
        unpacked = 0.0078125 * got + 100.0
        orig = 0.0078125 * data.reshape(-1).astype(np.float64) + 100.0
        assert np.abs(unpacked - orig).max() <= 0.5

    def test_rel_with_packing_rejected(self, tmp_path, capsys):
        data = np.ones((4, 4), dtype=np.int16)
        raw, meta = write_inputs(tmp_path, data, (4, 4), "i16",
                                 extra_meta="scale_factor=0.5\n")
        rc = main(["compress", "--input", str(raw), "--meta", str(meta),
                   "--rel", "0.01", "--output", str(tmp_path / "a.amrc")])
        assert rc == 3

    def test_size_mismatch_is_data_error(self, tmp_path, capsys):
        data = np.ones(10, dtype=np.float32)
        raw, meta = write_inputs(tmp_path, data, (4, 4), "f32")
        rc = main(["compress", "--input", str(raw), "--meta", str(meta),
                   "--abs", "1", "--output", str(tmp_path / "a.amrc")])
        assert rc == 3

    def test_invalid_domain_box_rejected(self, tmp_path, capsys):
        data = np.ones((4, 4), dtype=np.float32)
        raw, meta = write_inputs(tmp_path, data, (4, 4), "f32")
        rc = main(["compress", "--input", str(raw), "--meta", str(meta),
                   "--abs", "1", "--domain", "6:9,0:4=0.1",
                   "--output", str(tmp_path / "a.amrc")])
        assert rc == 3


class TestInfoAndErrors:
    def test_info_root_only(self, tmp_path, capsys):
        data = np.full((8, 8), 2.0, dtype=np.float32)
        raw, meta = write_inputs(tmp_path, data, (8, 8), "f32")
        out = tmp_path / "a.amrc"
        main(["compress", "--input", str(raw), "--meta", str(meta),
              "--abs", "1", "--output", str(out)])
        capsys.readouterr()
        assert main(["info", "--input", str(out)]) == 0
        text = capsys.readouterr().out
        assert "levels: {0: 1}" in text
        assert "variables: 1" in text

    def test_info_multi_variable(self, tmp_path, capsys):
        field = layered((3, 8, 8), seed=1)
        raw, meta = write_inputs(tmp_path, field, (3, 8, 8), "f64")
        out = tmp_path / "a.amrc"
        main(["compress", "--input", str(raw), "--meta", str(meta),
              "--abs", "1", "--split-axis", "0", "--output", str(out)])
        capsys.readouterr()
        main(["info", "--input", str(out)])
        text = capsys.readouterr().out
        assert "variables: 3" in text
        assert text.count("variable ") == 3

    def test_truncated_artifact_exit_4(self, tmp_path, capsys):
        data = np.full((8, 8), 2.0, dtype=np.float32)
        raw, meta = write_inputs(tmp_path, data, (8, 8), "f32")
        out = tmp_path / "a.amrc"
        main(["compress", "--input", str(raw), "--meta", str(meta),
              "--abs", "1", "--output", str(out)])
        out.write_bytes(out.read_bytes()[:-3])
        rc = main(["decompress", "--input", str(out), "--output", str(tmp_path / "b")])
        assert rc == 4
        assert "offset" in capsys.readouterr().err

    def test_usage_error_exit_2(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["compress", "--input", "x", "--meta", "y", "--output", "z"])
        assert exc.value.code == 2

    def test_module_entry_point(self, tmp_path):
        result = subprocess.run(
            [sys.executable, "-m", "amrc", "info", "--input", str(tmp_path / "missing")],
            capture_output=True, text=True)
        assert result.returncode == 3  # OSError on missing file


class TestSweep:
    def test_smooth_abs_sweep_monotone(self, capsys):
        assert main(["sweep", "--generator", "smooth", "--dims", "32,32",
                     "--errors", "0.01,0.05,0.2,1.0", "--criterion", "abs"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "error,bytes,ratio,max_observed_error"
        rows = [line.split(",") for line in lines[1:]]
        sizes = [int(r[1]) for r in rows]
        assert sizes == sorted(sizes, reverse=True)
        for r in rows:
            assert float(r[3]) <= float(r[0])

    def test_noise_tiny_eps_near_input_size(self, capsys):
        assert main(["sweep", "--generator", "noise", "--dims", "16,16",
                     "--errors", "1e-12", "--criterion", "abs"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        nbytes = int(lines[1].split(",")[1])
        assert nbytes >= 16 * 16 * 8  # payload at least the raw data

    def test_rel_sweep_bound_respected(self, capsys):
        assert main(["sweep", "--generator", "smooth", "--dims", "24,24",
                     "--errors", "0.005,0.025", "--criterion", "rel"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        for line in lines[1:]:
            cols = line.split(",")
            assert float(cols[3]) <= float(cols[0])

    def test_layered_split_smaller_than_3d(self, capsys):
        args = ["sweep", "--generator", "layered", "--dims", "8,16,16",
                "--errors", "1.0", "--criterion", "abs"]
        assert main(args) == 0
        whole = int(capsys.readouterr().out.strip().splitlines()[1].split(",")[1])
        assert main(args + ["--split-axis", "0"]) == 0
        split = int(capsys.readouterr().out.strip().splitlines()[1].split(",")[1])
        assert split < whole
