import numpy as np
import pytest

from mmml.errors import DegenerateSetError, DimensionError, FormatError, PreconditionError, ProtocolError
from mmml.harness.data import (ManifestEntry, ingest, read_manifest, read_set_file,
                               write_dataset, write_manifest, write_set_file)
from mmml.harness.synth import PRESETS, synth_generate
from mmml.set_modeling import ImageSet, model_set


def _dataset(tmp_path, sets):
    return read_manifest(write_dataset(tmp_path, sets, "unit test"))


class TestSetFiles:
    def test_round_trip_exact(self, tmp_path, rng):
        samples = rng.standard_normal((7, 5)) * 1e3
        write_set_file(tmp_path / "a.txt", samples)
        np.testing.assert_array_equal(read_set_file(tmp_path / "a.txt").T, samples)

    def test_eth_geometry(self, tmp_path, rng):
        write_set_file(tmp_path / "s.txt", rng.uniform(0, 255, (400, 41)))
        write_manifest(tmp_path / "m.csv", [ManifestEntry("s.txt", "a", "s"), ManifestEntry("s.txt", "b", "t")])
        sets = ingest(read_manifest(tmp_path / "m.csv"))
        assert (sets[0].d, sets[0].n) == (400, 41)

    def test_comments_and_commas(self, tmp_path):
        (tmp_path / "a.txt").write_text("# header\n1, 2, 3\n\n4 5 6\n")
        np.testing.assert_array_equal(read_set_file(tmp_path / "a.txt"), [[1, 2, 3], [4, 5, 6]])

    def test_parse_error_names_row(self, tmp_path):
        (tmp_path / "a.txt").write_text("1 2\n3 x\n")
        with pytest.raises(FormatError, match=r"a\.txt:2"):
            read_set_file(tmp_path / "a.txt")

    def test_ragged(self, tmp_path):
        (tmp_path / "a.txt").write_text("1 2\n3 4 5\n")
        with pytest.raises(FormatError, match=r"a\.txt:2: row has 3 values"):
            read_set_file(tmp_path / "a.txt")

    def test_dimension_mismatch(self, tmp_path):
        (tmp_path / "a.txt").write_text("1 2\n3 4\n")
        with pytest.raises(DimensionError, match="expected d = 3 columns, found 2"):
            read_set_file(tmp_path / "a.txt", d=3)

    def test_empty(self, tmp_path):
        (tmp_path / "a.txt").write_text("# nothing\n")
        with pytest.raises(FormatError, match="no data"):
            read_set_file(tmp_path / "a.txt")

    def test_image_directory(self, tmp_path, rng):
        image = pytest.importorskip("PIL.Image")
        d = tmp_path / "frames"
        d.mkdir()
        for k in range(3):
            image.fromarray(rng.integers(0, 256, (32, 40), dtype=np.uint8)).save(d / f"f{k}.png")
        (d / "notes.txt").write_text("ignored")
        rows = read_set_file(d)
        assert rows.shape == (3, 400)
        assert rows.min() >= 0 and rows.max() <= 255

    def test_constant_image_directory_is_rejected(self, tmp_path):
        image = pytest.importorskip("PIL.Image")
        d = tmp_path / "frames"
        d.mkdir()
        for k in range(2):
            image.fromarray(np.full((20, 20), 7, dtype=np.uint8)).save(d / f"f{k}.png")
        with pytest.raises(DegenerateSetError):
            model_set(read_set_file(d).T, q=1)


class TestManifest:
    def test_round_trip(self, tmp_path):
        sets = synth_generate(2, 3, 5, 4, seed=1)
        m = _dataset(tmp_path, sets)
        assert m.d == 4 and m.source_note == "unit test"
        assert [e.set_id for e in m.entries] == [s.set_id for s in sets]
        back = ingest(m)
        for a, b in zip(sets, back):
            np.testing.assert_array_equal(a.samples, b.samples)
            assert (a.label, a.set_id) == (b.label, b.set_id)

    def test_normalize(self, tmp_path):
        sets = [ImageSet(np.full((2, 3), 255.0) + np.arange(3), lab, lab) for lab in "ab"]
        out = ingest(_dataset(tmp_path, sets), normalize=True)
        np.testing.assert_allclose(out[0].samples, sets[0].samples / 255.0)

    def test_one_class(self, tmp_path):
        sets = synth_generate(1, 3, 5, 4)
        with pytest.raises(ProtocolError, match="at least 2"):
            ingest(_dataset(tmp_path, sets))

    def test_missing_file(self, tmp_path):
        write_manifest(tmp_path / "m.csv", [ManifestEntry("x.txt", "a", "x"), ManifestEntry("y.txt", "b", "y")])
        with pytest.raises(FormatError, match="does not exist"):
            ingest(read_manifest(tmp_path / "m.csv"))

    def test_single_row_set(self, tmp_path):
        (tmp_path / "a.txt").write_text("1 2 3\n")
        (tmp_path / "b.txt").write_text("1 2 3\n4 5 6\n")
        write_manifest(tmp_path / "m.csv", [ManifestEntry("a.txt", "a", "a"), ManifestEntry("b.txt", "b", "b")])
        with pytest.raises(DegenerateSetError, match=r"a\.txt"):
            ingest(read_manifest(tmp_path / "m.csv"))

    def test_dimension_across_sets(self, tmp_path):
        (tmp_path / "a.txt").write_text("1 2 3\n4 5 6\n")
        (tmp_path / "b.txt").write_text("1 2\n4 5\n")
        write_manifest(tmp_path / "m.csv", [ManifestEntry("a.txt", "a", "a"), ManifestEntry("b.txt", "b", "b")])
        with pytest.raises(DimensionError, match="b.txt: expected d = 3"):
            ingest(read_manifest(tmp_path / "m.csv"))

    def test_bad_header(self, tmp_path):
        (tmp_path / "m.csv").write_text("file,class\na.txt,a\n")
        with pytest.raises(FormatError, match="header"):
            read_manifest(tmp_path / "m.csv")

    def test_default_set_id(self, tmp_path):
        (tmp_path / "m.csv").write_text("# d: 3\npath,label\nsets/abc.txt,a\n")
        m = read_manifest(tmp_path / "m.csv")
        assert m.entries == [ManifestEntry("sets/abc.txt", "a", "abc")] and m.d == 3


class TestSynth:
    @pytest.mark.parametrize("preset", PRESETS)
    def test_deterministic_bytes(self, tmp_path, preset):
        a = write_dataset(tmp_path / "a", synth_generate(3, 2, 6, 8, 2.0, seed=9, preset=preset))
        b = write_dataset(tmp_path / "b", synth_generate(3, 2, 6, 8, 2.0, seed=9, preset=preset))
        for e in read_manifest(a).entries:
            assert (a.parent / e.path).read_bytes() == (b.parent / e.path).read_bytes()

    def test_seed_changes_output(self):
        a = synth_generate(2, 2, 5, 4, seed=0)
        b = synth_generate(2, 2, 5, 4, seed=1)
        assert not np.array_equal(a[0].samples, b[0].samples)

    def test_geometry_and_labels(self):
        sets = synth_generate(3, 4, 7, 5)
        assert len(sets) == 12
        assert {s.label for s in sets} == {"c00", "c01", "c02"}
        assert sets[5].set_id == "c01_s01"
        assert all((s.d, s.n) == (5, 7) for s in sets)

    def test_bounds(self):
        with pytest.raises(PreconditionError):
            synth_generate(2, 2, 1, 4)
        with pytest.raises(PreconditionError):
            synth_generate(2, 2, 5, 4, separation=-1.0)
        with pytest.raises(PreconditionError):
            synth_generate(2, 2, 5, 4, preset="nope")
