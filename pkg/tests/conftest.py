import csv
import time
from pathlib import Path

import numpy as np
import pytest

from voiceprint.audio import read_wav, resample
from voiceprint.dataset import MANIFEST_COLUMNS
from voiceprint.embedder import TcnConfig, TrainConfig, init_weights, train
from voiceprint.features import audio_path, extract
from voiceprint.seeding import derive_seed
from voiceprint.synth import TABLE1_CALL_TYPES, TABLE1_COUNTS, TABLE1_INDIVIDUALS, synthesize_corpus, table1_spec, \
    uniform_spec

MASTER_SEED = 7

# filled by fixtures and the acceptance module
TIMINGS: dict[str, float] = {}
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def write_table1_manifest(path: Path) -> Path:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(MANIFEST_COLUMNS)
        for ind, row in zip(TABLE1_INDIVIDUALS, TABLE1_COUNTS):
            for ct, n in zip(TABLE1_CALL_TYPES, row):
                for k in range(n):
                    w.writerow([f"{ind}_{ct}_{k}", ind, ct, f"audio/{ind}_{ct}_{k}.wav", "1.0"])
    return path


@pytest.fixture
def table1_manifest_path(tmp_path):
    return write_table1_manifest(tmp_path / "manifest.csv")


@pytest.fixture(scope="session")
def table1_corpus(tmp_path_factory):
    """Synthetic reference-layout corpus (identity cues shared across call types)."""
    out = tmp_path_factory.mktemp("table1")
    res = synthesize_corpus(table1_spec(MASTER_SEED), MASTER_SEED, out)
    return out / "manifest.csv", res


@pytest.fixture(scope="session")
def null_corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("table1_null")
    res = synthesize_corpus(table1_spec(MASTER_SEED, null_identity=True), MASTER_SEED, out)
    return out / "manifest.csv", res


@pytest.fixture(scope="session")
def speaker_corpus(tmp_path_factory):
    """Ten training speakers x 12 snippets, disjoint from the reference individuals."""
    out = tmp_path_factory.mktemp("speakers")
    seed = derive_seed(MASTER_SEED, "speakers")
    res = synthesize_corpus(uniform_spec(10, 4, seed), seed, out)
    return out / "manifest.csv", res


@pytest.fixture(scope="session")
def trained_embedder(speaker_corpus):
    """Default-config embedder trained for 300 steps; returns (initial, trained, loss trace)."""
    t0 = time.perf_counter()
    manifest_path, res = speaker_corpus
    clips = {}
    for r in res.manifest:
        w = resample(read_wav(audio_path(manifest_path, r.audio_path)), 16000)
        clips.setdefault(r.individual_id, []).append(np.asarray(w.samples))
    w0 = init_weights(TcnConfig(), derive_seed(MASTER_SEED, "embedder/init"))
    tc = TrainConfig(steps=300, seed=derive_seed(MASTER_SEED, "embedder/train"))
    w, trace = train(w0, tc, clips)
    TIMINGS["train_embedder"] = time.perf_counter() - t0
    return w0, w, trace


@pytest.fixture(scope="session")
def table1_features(table1_corpus, trained_embedder):
    manifest_path, res = table1_corpus
    _, w, _ = trained_embedder
    t0 = time.perf_counter()
    out = {"mfcc": extract(res.manifest, manifest_path, "mfcc"),
           "learnt": extract(res.manifest, manifest_path, "learnt", w)}
    TIMINGS["extract_table1"] = time.perf_counter() - t0
    return out


@pytest.fixture(scope="session")
def null_features(null_corpus, trained_embedder):
    manifest_path, res = null_corpus
    _, w, _ = trained_embedder
    return {"mfcc": extract(res.manifest, manifest_path, "mfcc"),
            "learnt": extract(res.manifest, manifest_path, "learnt", w)}
