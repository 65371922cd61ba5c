"""Tests for digests, version ordering and dependency tables."""

import io
import random

import pytest

from src.audio.wavio import scan_media
from src.dependency import (
    ZERO_DIGEST,
    DepEntry,
    DependencyError,
    DependencyTable,
    EntryNotFoundError,
    apply,
    compute_digest,
    diff,
    digest_file,
    latest,
    parse_deps,
    serialize_deps,
    sort_versions,
)
from src.dependency.dependencies import ATTACHMENT, HEADER, MEDIA, TABLE, archive_id, classify, list_root_files
from src.dependency.digest import EMPTY_DIGEST, digest_bytes
from src.dependency.version import is_newer

from .conftest import random_text, write_emodb, write_tone

DIGEST_A = "a" * 32
DIGEST_B = "b" * 32


def media_entry(path, digest=DIGEST_A, origin="1.0.0", removed=False):
    return DepEntry(
        file=path,
        kind=MEDIA,
        archive=archive_id(path, digest),
        digest=digest,
        origin_version=origin,
        removed=removed,
        bit_depth=16,
        channels=1,
        sampling_rate=16000,
        duration=250_000_000,
        format="wav",
    )


def first_publish(root):
    changes = diff(root, None)
    meta = {p: scan_media(root / p) for p in changes.changed if classify(p) == MEDIA}
    return apply(None, changes, "1.0.0", meta)


@pytest.mark.unit
class TestDigest:
    """Tests for content digests."""

    def test_empty(self):
        """Test the digest of no bytes."""
        assert compute_digest(io.BytesIO(b"")) == EMPTY_DIGEST
        assert digest_bytes(b"") == EMPTY_DIGEST

    def test_chunking_does_not_matter(self):
        """Test small chunks give the same digest."""
        data = bytes(range(256)) * 100
        assert compute_digest(io.BytesIO(data), chunk_size=7) == digest_bytes(data)

    def test_file(self, temp_dir):
        """Test file digest equals in-memory digest."""
        path = temp_dir / "x.bin"
        path.write_bytes(b"audio")
        assert digest_file(path) == digest_bytes(b"audio")


@pytest.mark.unit
class TestVersionOrdering:
    """Tests for version ordering."""

    def test_numeric_segments(self):
        """Test segments compare as numbers."""
        assert sort_versions(["1.10.0", "1.2.0", "1.9.1"]) == ["1.2.0", "1.9.1", "1.10.0"]

    def test_prerelease_before_release(self):
        """Test a pre-release sorts before its release."""
        assert sort_versions(["1.0.0", "1.0.0-rc1", "0.9.0"]) == ["0.9.0", "1.0.0-rc1", "1.0.0"]
        assert is_newer("1.0.0", "1.0.0-rc1")

    def test_latest(self):
        """Test the highest version wins."""
        assert latest(["1.0.0", "1.1.1", "1.2.0"]) == "1.2.0"
        assert latest(["2.0.0"]) == "2.0.0"
        assert latest([]) is None

    def test_non_numeric_segments(self):
        """Test alphanumeric segments sort after numbers."""
        assert sort_versions(["1.a", "1.2"]) == ["1.2", "1.a"]

    def test_duplicates_removed(self):
        """Test duplicates collapse."""
        assert sort_versions(["1.0", "1.0"]) == ["1.0"]


@pytest.mark.unit
class TestEntries:
    """Tests for dependency entries and tables."""

    def test_classify(self):
        """Test kinds from paths."""
        assert classify("db.yaml") == HEADER
        assert classify("db.emotion.csv") == TABLE
        assert classify("db.emotion.test.csv") == TABLE
        assert classify("wav/db.x.csv") == ATTACHMENT
        assert classify("docs/README.txt") == ATTACHMENT
        assert classify("wav/a.wav") == MEDIA
        assert classify("wav/A.WAV") == MEDIA

    def test_archive_ids(self):
        """Test archive naming per kind."""
        assert archive_id("db.yaml", DIGEST_A) == "db.yaml"
        assert archive_id("db.files.csv", DIGEST_A) == "meta/files"
        assert archive_id("wav/a.wav", DIGEST_A) == f"media/aa/{DIGEST_A}"
        assert archive_id("docs/README.txt", DIGEST_A) == f"attachment/aa/{DIGEST_A}"

    def test_backend_path(self):
        """Test archives live under their origin version."""
        entry = media_entry("wav/a.wav", origin="1.0.0")
        assert entry.backend_path("emodb") == f"emodb/1.0.0/media/aa/{DIGEST_A}.zip"

    def test_bad_digest(self):
        """Test malformed digests are rejected."""
        with pytest.raises(DependencyError):
            media_entry("wav/a.wav", digest="xyz")

    def test_zero_digest_requires_removed(self):
        """Test zero digest is only valid for removed entries."""
        with pytest.raises(DependencyError):
            media_entry("wav/a.wav", digest=ZERO_DIGEST)
        assert media_entry("wav/a.wav", digest=ZERO_DIGEST, removed=True).removed

    def test_duplicate_entries(self):
        """Test two entries for one path are rejected."""
        with pytest.raises(DependencyError):
            DependencyTable([media_entry("a.wav"), media_entry("a.wav")], "1.0.0")

    def test_origin_after_version(self):
        """Test origin versions cannot be newer than the table."""
        with pytest.raises(DependencyError):
            DependencyTable([media_entry("a.wav", origin="2.0.0")], "1.0.0")

    def test_lookup(self):
        """Test accessors and the not-found error."""
        deps = DependencyTable([media_entry("b.wav"), media_entry("a.wav", DIGEST_B)], "1.0.0")
        assert deps.files == ["a.wav", "b.wav"]
        assert deps.digest("a.wav") == DIGEST_B
        assert deps.sampling_rate("a.wav") == 16000
        with pytest.raises(EntryNotFoundError):
            deps.entry("c.wav")
        with pytest.raises(KeyError):
            deps.entry("c.wav")

    def test_with_removed(self):
        """Test flagging removal zeroes the digest and leaves others alone."""
        deps = DependencyTable([media_entry("a.wav"), media_entry("b.wav")], "1.0.0")
        removed = deps.with_removed(["a.wav"])
        assert removed.is_removed("a.wav")
        assert removed.digest("a.wav") == ZERO_DIGEST
        assert removed.entry("b.wav") == deps.entry("b.wav")
        assert not deps.is_removed("a.wav")
        assert removed.removed() == ["a.wav"]


@pytest.mark.unit
class TestDiffApply:
    """Tests for change detection and building new tables."""

    def test_root_listing_skips_hidden(self, emodb_root):
        """Test hidden files and the deps file are not listed."""
        (emodb_root / ".DS_Store").write_text("x")
        (emodb_root / "db.deps.csv").write_text("x")
        files = list_root_files(emodb_root)
        assert ".DS_Store" not in files
        assert "db.deps.csv" not in files
        assert "db.yaml" in files
        assert "wav/f00.wav" in files

    def test_first_publish_adds_everything(self, emodb_root):
        """Test every file is added without a previous table."""
        changes = diff(emodb_root, None)
        assert len(changes.added) == 15
        assert changes.modified == changes.unchanged == changes.deleted == []

    def test_media_properties(self, emodb_root):
        """Test media entries carry scanned properties."""
        deps = first_publish(emodb_root)
        entry = deps.entry("wav/f00.wav")
        assert (entry.bit_depth, entry.channels, entry.sampling_rate) == (16, 1, 16000)
        assert entry.duration == 250_000_000
        assert entry.origin_version == "1.0.0"
        assert deps.entry("db.yaml").bit_depth is None

    def test_modify_one_file(self, emodb_root):
        """Test one modified file keeps the origin of all others."""
        v1 = first_publish(emodb_root)
        write_tone(emodb_root / "wav/f03.wav", frequency=999.0)
        changes = diff(emodb_root, v1)
        assert changes.modified == ["wav/f03.wav"]
        assert len(changes.unchanged) == 14
        meta = {"wav/f03.wav": scan_media(emodb_root / "wav/f03.wav")}
        v2 = apply(v1, changes, "2.0.0", meta)
        assert v2.origin_version("wav/f03.wav") == "2.0.0"
        assert v2.origin_version("wav/f04.wav") == "1.0.0"
        assert v2.origin_version("db.yaml") == "1.0.0"

    def test_deleted_file(self, emodb_root):
        """Test files missing from the root are deleted."""
        v1 = first_publish(emodb_root)
        (emodb_root / "wav/f09.wav").unlink()
        changes = diff(emodb_root, v1)
        assert changes.deleted == ["wav/f09.wav"]
        assert "wav/f09.wav" not in apply(v1, changes, "2.0.0")

    def test_removed_entry_never_deleted(self, emodb_root):
        """Test removed entries are carried forward, not deleted."""
        v1 = first_publish(emodb_root).with_removed(["wav/f09.wav"])
        (emodb_root / "wav/f09.wav").unlink()
        changes = diff(emodb_root, v1)
        assert changes.deleted == []
        v2 = apply(v1, changes, "2.0.0")
        assert v2.is_removed("wav/f09.wav")

    def test_removed_file_reappearing_is_modified(self, emodb_root):
        """Test a removed path present again counts as modified."""
        v1 = first_publish(emodb_root).with_removed(["wav/f09.wav"])
        changes = diff(emodb_root, v1)
        assert "wav/f09.wav" in changes.modified

    def test_missing_media_properties(self, emodb_root):
        """Test apply needs properties for changed media."""
        with pytest.raises(DependencyError):
            apply(None, diff(emodb_root, None), "1.0.0", {})

    def test_explicit_file_list(self, emodb_root):
        """Test diff can be restricted to given files."""
        changes = diff(emodb_root, None, files=["db.yaml", "wav/f00.wav"])
        assert changes.added == ["db.yaml", "wav/f00.wav"]

    @pytest.mark.parametrize("seed", range(30))
    def test_randomized_partition(self, seed, temp_dir):
        """Test random edits split every path into exactly one sorted change list."""
        rng = random.Random(seed)
        root = temp_dir / "ds"
        write_emodb(root, n_files=rng.randint(1, 6), seconds=0.05)
        previous = first_publish(root)
        before = set(list_root_files(root))

        modified, deleted, added = set(), set(), set()
        for path in sorted(before):
            roll = rng.random()
            if roll < 0.2:
                (root / path).unlink()
                deleted.add(path)
            elif roll < 0.4:
                if path.endswith(".wav"):
                    write_tone(root / path, frequency=rng.uniform(2000.0, 5000.0), seconds=0.05)
                else:
                    (root / path).write_bytes((root / path).read_bytes() + b"\n")
                modified.add(path)
        for i in range(rng.randint(0, 3)):
            path = f"docs/{i}.txt"
            (root / "docs").mkdir(exist_ok=True)
            (root / path).write_text(random_text(rng), encoding="utf-8")
            added.add(path)

        changes = diff(root, previous)
        lists = [changes.added, changes.modified, changes.unchanged, changes.deleted]
        every = [p for paths in lists for p in paths]
        assert len(every) == len(set(every))
        assert set(every) == before | added
        assert all(paths == sorted(paths) for paths in lists)
        assert set(changes.added) == added
        assert set(changes.modified) == modified
        assert set(changes.deleted) == deleted
        assert set(changes.unchanged) == before - modified - deleted
        assert set(changes.digests) == (before | added) - deleted

    @pytest.mark.parametrize("seed", range(30))
    def test_apply_then_diff_is_unchanged(self, seed, temp_dir):
        """Test diffing a root against the table built from it reports nothing new."""
        rng = random.Random(seed)
        root = temp_dir / "ds"
        files = write_emodb(root, n_files=rng.randint(2, 6), seconds=0.05)
        previous = first_publish(root)

        for path in files:
            roll = rng.random()
            if roll < 0.2:
                (root / path).unlink()
                if rng.random() < 0.5:
                    previous = previous.with_removed([path])
            elif roll < 0.4:
                write_tone(root / path, frequency=rng.uniform(2000.0, 5000.0), seconds=0.05)
        if rng.random() < 0.5:
            (root / "docs").mkdir()
            (root / "docs/README.txt").write_text(random_text(rng), encoding="utf-8")

        changes = diff(root, previous)
        meta = {p: scan_media(root / p) for p in changes.changed if classify(p) == MEDIA}
        current = apply(previous, changes, "2.0.0", meta)

        again = diff(root, current)
        assert again.added == again.modified == again.deleted == []
        assert again.unchanged == list_root_files(root)
        assert apply(current, again, "3.0.0").entries == current.entries


@pytest.mark.unit
class TestDepsCsv:
    """Tests for the dependency CSV."""

    def test_round_trip(self, emodb_root):
        """Test serializing then parsing gives an equal table."""
        deps = first_publish(emodb_root).with_removed(["wav/f01.wav"])
        text = serialize_deps(deps)
        assert parse_deps(text, "1.0.0") == deps
        assert serialize_deps(parse_deps(text, "1.0.0")) == text

    def test_header_row(self):
        """Test unexpected columns are rejected."""
        with pytest.raises(DependencyError):
            parse_deps("file,digest\n", "1.0.0")

    def test_empty(self):
        """Test an empty document is rejected."""
        with pytest.raises(DependencyError):
            parse_deps("", "1.0.0")

    def test_bad_removed_flag(self, emodb_root):
        """Test the removed flag must be True or False."""
        text = serialize_deps(first_publish(emodb_root)).replace(",False,", ",maybe,", 1)
        with pytest.raises(DependencyError, match="removed"):
            parse_deps(text, "1.0.0")

    def test_rows_sorted(self, emodb_root):
        """Test rows are written sorted by path."""
        lines = serialize_deps(first_publish(emodb_root)).splitlines()[1:]
        paths = [line.split(",")[0] for line in lines]
        assert paths == sorted(paths)
