"""Test configuration and fixtures."""

import csv
import datetime
import random
import tempfile
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import pytest
import soundfile as sf

from src.backend.registry import clear_instances
from src.backend.repository import Repository
from src.core import (
    FILEWISE,
    MISC,
    SEGMENTED,
    Column,
    ColumnDecl,
    Header,
    Index,
    RaterDecl,
    Scheme,
    SplitDecl,
    Table,
    TableDecl,
    filewise_index,
)

SPEAKERS = ["spk01", "spk02", "spk03"]
EMOTIONS = ["anger", "happiness", "neutral", "sadness"]

EMODB_HEADER = """\
name: emodb
source: https://example.org/emodb
usage: research
author: Test Author
description: Emotional speech test fixture.
languages:
- deu
license: CC0-1.0
organisation: Test Lab
schemes:
  age:
    dtype: integer
    minimum: 0
  emotion:
    dtype: string
    labels: [anger, happiness, neutral, sadness]
  gender:
    dtype: string
    labels: [female, male]
  speaker:
    dtype: string
    labels: speakers
splits:
  test:
    type: test
tables:
  speakers:
    type: misc
    levels:
      speaker: string
    columns:
      age:
        scheme_id: age
      gender:
        scheme_id: gender
  files:
    type: filewise
    columns:
      speaker:
        scheme_id: speaker
  emotion:
    type: filewise
    split_id: test
    columns:
      emotion:
        scheme_id: emotion
  segments:
    type: segmented
    columns:
      emotion:
        scheme_id: emotion
"""


def write_tone(
    path: Path,
    sampling_rate: int = 16000,
    channels: int = 1,
    seconds: float = 0.25,
    bit_depth: int = 16,
    frequency: float = 440.0,
    amplitude: float = 0.5,
) -> Path:
    """Write a sine tone as integer PCM WAV."""
    frames = int(round(seconds * sampling_rate))
    t = np.arange(frames) / sampling_rate
    tone = amplitude * np.sin(2 * np.pi * frequency * t)
    data = np.stack([tone * (1.0 - 0.1 * c) for c in range(channels)], axis=1)
    subtype = {16: "PCM_16", 24: "PCM_24", 32: "PCM_32"}[bit_depth]
    path.parent.mkdir(parents=True, exist_ok=True)
    sf.write(str(path), data, sampling_rate, subtype=subtype, format="WAV")
    return path


def _write_csv(path: Path, header: List[str], rows: List[List[object]]) -> None:
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_emodb(
    root: Path,
    n_files: int = 10,
    sampling_rate: int = 16000,
    channels: int = 1,
    seconds: float = 0.25,
) -> List[str]:
    """Write the emodb fixture dataset; return its media paths."""
    root.mkdir(parents=True, exist_ok=True)
    files = [f"wav/f{i:02d}.wav" for i in range(n_files)]
    for i, file in enumerate(files):
        write_tone(
            root / file,
            sampling_rate=sampling_rate,
            channels=channels,
            seconds=seconds,
            frequency=200.0 + 37.0 * i,
        )

    (root / "db.yaml").write_text(EMODB_HEADER, encoding="utf-8")
    _write_csv(
        root / "db.speakers.csv",
        ["speaker", "age", "gender"],
        [["spk01", 19, "female"], ["spk02", 21, "male"], ["spk03", 34, "female"]],
    )
    _write_csv(
        root / "db.files.csv",
        ["file", "speaker"],
        [[file, SPEAKERS[i % len(SPEAKERS)]] for i, file in enumerate(files)],
    )
    _write_csv(
        root / "db.emotion.csv",
        ["file", "emotion"],
        [[file, EMOTIONS[i % len(EMOTIONS)]] for i, file in enumerate(files)],
    )
    segments = []
    for i, file in enumerate(files):
        segments.append([file, "0 days 00:00:00", "0 days 00:00:00.100000000", EMOTIONS[i % len(EMOTIONS)]])
        segments.append([file, "0 days 00:00:00.100000000", "", EMOTIONS[(i + 1) % len(EMOTIONS)]])
    _write_csv(root / "db.segments.csv", ["file", "start", "end", "emotion"], segments)
    return files


# =============================================================================
# Random models
# =============================================================================

TEXT_ALPHABET = "abcdefgXYZ 0189:#,;'\"-_/äéß"
CELL_DTYPES = ("bool", "date", "float", "integer", "string", "time")


def random_text(rng: random.Random, max_length: int = 12) -> str:
    """Non-empty text with characters that need quoting in YAML and CSV."""
    return "".join(rng.choice(TEXT_ALPHABET) for _ in range(rng.randint(1, max_length)))


def random_value(rng: random.Random, dtype: str) -> Any:
    """Random cell value of ``dtype``; sometimes missing."""
    if rng.random() < 0.1:
        return None
    if dtype == "bool":
        return rng.random() < 0.5
    if dtype == "date":
        return datetime.date(1990, 1, 1) + datetime.timedelta(days=rng.randint(0, 15000))
    if dtype == "float":
        return rng.uniform(-1e6, 1e6)
    if dtype == "integer":
        return rng.randint(-10**9, 10**9)
    if dtype == "time":
        return rng.randint(0, 10**13)
    return random_text(rng)


def random_header(rng: random.Random) -> Header:
    """Valid header with random metadata and declarations."""
    schemes: Dict[str, Scheme] = {}
    for i in range(rng.randint(0, 4)):
        dtype = rng.choice(CELL_DTYPES)
        kwargs: Dict[str, Any] = {}
        if dtype == "integer" and rng.random() < 0.5:
            low = rng.randint(-10, 10)
            kwargs.update(minimum=low, maximum=low + rng.randint(0, 100))
        elif dtype == "float" and rng.random() < 0.5:
            kwargs.update(minimum=round(rng.uniform(-1, 0), 3), maximum=round(rng.uniform(0, 1), 3))
        elif dtype == "string" and rng.random() < 0.5:
            kwargs.update(labels=sorted({random_text(rng) for _ in range(rng.randint(1, 5))}))
        if rng.random() < 0.3:
            kwargs.update(description=random_text(rng, 40))
        schemes[f"scheme{i}"] = Scheme(dtype, **kwargs)

    splits = {
        f"split{i}": SplitDecl(rng.choice(["train", "dev", "test", "other"]), rng.choice([None, random_text(rng)]))
        for i in range(rng.randint(0, 3))
    }
    raters = {
        f"rater{i}": RaterDecl(rng.choice(["human", "machine", "other"]), rng.choice([None, random_text(rng)]))
        for i in range(rng.randint(0, 2))
    }

    tables: Dict[str, TableDecl] = {}
    if rng.random() < 0.5:
        tables["speakers"] = TableDecl(type=MISC, levels=(("speaker", "string"), ("session", "integer")))
        schemes["speaker"] = Scheme("string", labels="speakers")
    for i in range(rng.randint(0, 3)):
        columns = {
            f"c{j}": ColumnDecl(
                scheme_id=rng.choice([None, *schemes]),
                rater_id=rng.choice([None, *raters]),
                description=rng.choice([None, random_text(rng)]),
            )
            for j in range(rng.randint(0, 3))
        }
        tables[f"table{i}"] = TableDecl(
            type=rng.choice([FILEWISE, SEGMENTED]),
            columns=columns,
            split_id=rng.choice([None, *splits]),
            description=rng.choice([None, random_text(rng, 40)]),
        )

    header = Header(
        name=rng.choice(["emodb", "crema-d", "vox_small"]),
        source=f"https://example.org/{random_text(rng)}",
        usage=rng.choice(["research", "commercial", "unrestricted"]),
        author=rng.choice([None, random_text(rng)]),
        description=rng.choice([None, random_text(rng, 60)]),
        expires=rng.choice([None, datetime.date(2030, 1, 1) + datetime.timedelta(days=rng.randint(0, 999))]),
        languages=rng.sample(["deu", "eng", "fra", "spa"], rng.randint(0, 3)),
        license=rng.choice([None, "CC0-1.0", "CC-BY-4.0"]),
        organisation=rng.choice([None, random_text(rng)]),
        custom={"funding": random_text(rng)} if rng.random() < 0.3 else {},
        schemes=schemes,
        tables=tables,
        splits=splits,
        raters=raters,
        attachments={"readme": "docs/README.txt"} if rng.random() < 0.3 else {},
    )
    header.validate()
    return header


def random_table(rng: random.Random, table_id: str = "random") -> Table:
    """Valid table of random kind, size and column dtypes."""
    kind = rng.choice([FILEWISE, SEGMENTED, MISC])
    n_rows = rng.randint(0, 8)
    if kind == FILEWISE:
        index = filewise_index(rng.sample([f"wav/{i:03d}.wav" for i in range(20)], n_rows))
    elif kind == SEGMENTED:
        rows: List[Tuple[str, int, Optional[int]]] = []
        while len(rows) < n_rows:
            start = rng.randint(0, 10**10)
            end = None if rng.random() < 0.2 else start + rng.randint(1, 10**10)
            row = (f"wav/{rng.randint(0, 4):03d}.wav", start, end)
            if row not in rows:
                rows.append(row)
        index = Index(SEGMENTED, rows)
    else:
        keys = rng.sample(range(100), n_rows)
        index = Index(MISC, [(f"spk{k:02d}", k % 7) for k in keys], [("speaker", "string"), ("session", "integer")])

    schemes: Dict[str, Scheme] = {}
    columns: Dict[str, Column] = {}
    for j in range(rng.randint(0, 4)):
        dtype = rng.choice(CELL_DTYPES + ("object",))
        if dtype == "object":
            values = [random_value(rng, "string") for _ in range(n_rows)]
            columns[f"c{j}"] = Column(values)
            continue
        schemes[f"s{j}"] = Scheme(dtype)
        values = [random_value(rng, dtype) for _ in range(n_rows)]
        columns[f"c{j}"] = Column(values, f"s{j}", description=rng.choice([None, random_text(rng)]))
    return Table(table_id, index, columns, schemes)


@pytest.fixture(autouse=True)
def isolated_env(monkeypatch, tmp_path):
    """Keep tests away from user configuration, caches and shared backend instances."""
    monkeypatch.delenv("AUDVAULT_CONFIG", raising=False)
    monkeypatch.delenv("AUDVAULT_CACHE_ROOT", raising=False)
    monkeypatch.setenv("HOME", str(tmp_path / "home"))
    monkeypatch.chdir(tmp_path)
    clear_instances()
    yield
    clear_instances()


@pytest.fixture
def temp_dir():
    """Create a temporary directory for test files."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def make_wav(temp_dir) -> Callable[..., Path]:
    """Factory writing sine-tone WAV files below the temp dir."""

    def make(name: str = "tone.wav", **kwargs) -> Path:
        return write_tone(temp_dir / name, **kwargs)

    return make


@pytest.fixture
def emodb_root(temp_dir) -> Path:
    """Dataset folder with 10 mono 16 kHz media files and four tables."""
    root = temp_dir / "emodb"
    write_emodb(root)
    return root


@pytest.fixture
def repository(temp_dir) -> Repository:
    """File-system repository below the temp dir."""
    host = temp_dir / "host"
    host.mkdir()
    return Repository("test-repo", str(host))


@pytest.fixture
def cache_root(temp_dir) -> Path:
    """Empty cache root."""
    return temp_dir / "cache"


@pytest.fixture
def backend(repository):
    """Shared backend instance of the test repository."""
    from src.backend.registry import get_backend

    return get_backend(repository)


@pytest.fixture
def mapping_root(temp_dir) -> Path:
    """Dataset with a misc speaker table backing the speaker column of a filewise table."""
    root = temp_dir / "mapping"
    root.mkdir()
    (root / "db.yaml").write_text(
        """\
name: mapping
source: https://example.org/mapping
usage: research
schemes:
  age:
    dtype: integer
  emotion:
    dtype: string
    labels: [calm, happy]
  speaker:
    dtype: string
    labels: speakers
tables:
  speakers:
    type: misc
    levels:
      speaker: string
    columns:
      age:
        scheme_id: age
  files:
    type: filewise
    columns:
      speaker:
        scheme_id: speaker
  emotion:
    type: segmented
    columns:
      emotion:
        scheme_id: emotion
""",
        encoding="utf-8",
    )
    (root / "db.speakers.csv").write_text("speaker,age\nspk01,19\nspk02,21\n", encoding="utf-8")
    (root / "db.files.csv").write_text("file,speaker\na.wav,spk01\nb.wav,spk02\n", encoding="utf-8")
    (root / "db.emotion.csv").write_text(
        "file,start,end,emotion\na.wav,0,0 days 00:00:01,happy\na.wav,0,0 days 00:00:02,calm\n",
        encoding="utf-8",
    )
    return root


def media_files(root: Path) -> List[str]:
    """Relative paths of the WAV files below ``root``."""
    return sorted(p.relative_to(root).as_posix() for p in root.rglob("*.wav"))


def read_optional(path: Path) -> Optional[bytes]:
    return path.read_bytes() if path.exists() else None
