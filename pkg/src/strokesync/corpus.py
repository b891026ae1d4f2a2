"""On-disk corpus layout.

A corpus directory holds one `.excalidraw` scene and one `.words.json`
transcript per demo, plus a `corpus.json` manifest mapping demo ids to
topics. Synthetic corpora additionally carry `ground_truth.json` with the
generator's intended alignment and recorded statistics.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import StrokeSyncError
from .jsonio import atomic_write_text, canonical_dumps
from .scene import Scene, parse_scene_file, scene_to_excalidraw
from .synth import SynthCorpus
from .transcript import Transcript, parse_transcript_file, transcript_to_records

MANIFEST_NAME = "corpus.json"
GROUND_TRUTH_NAME = "ground_truth.json"


class CorpusError(StrokeSyncError):
    pass


@dataclass(frozen=True)
class CorpusDemo:
    demo_id: str
    topic: str
    scene: Scene
    transcript: Transcript | None
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class Corpus:
    root: Path
    demos: tuple[CorpusDemo, ...]

    def topics(self) -> list[tuple[str, str]]:
        return [(d.demo_id, d.topic) for d in self.demos]


def scene_path(root: Path, demo_id: str) -> Path:
    return root / f"{demo_id}.excalidraw"


def transcript_path(root: Path, demo_id: str) -> Path:
    return root / f"{demo_id}.words.json"


def write_corpus(corpus: SynthCorpus, out_dir: str | Path) -> None:
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    for demo in corpus.demos:
        atomic_write_text(
            scene_path(root, demo.demo_id),
            canonical_dumps(scene_to_excalidraw(demo.scene)),
        )
        atomic_write_text(
            transcript_path(root, demo.demo_id),
            canonical_dumps(transcript_to_records(demo.transcript)),
        )
    manifest = {
        "seed": corpus.spec.seed,
        "demos": [{"id": d.demo_id, "topic": d.topic} for d in corpus.demos],
    }
    atomic_write_text(root / MANIFEST_NAME, canonical_dumps(manifest))
    ground_truth = {
        "demos": {
            d.demo_id: {
                "intended_word_index": list(d.intended_word_index),
                "intended_onset_s": list(d.intended_onset_s),
            }
            for d in corpus.demos
        },
        "stats": corpus.recorded_stats,
    }
    atomic_write_text(root / GROUND_TRUTH_NAME, canonical_dumps(ground_truth))


def load_corpus(root: str | Path) -> Corpus:
    """Load every demo listed in the manifest. A demo with a missing
    transcript is kept with transcript=None and a warning so callers can
    skip it without aborting the run."""
    root = Path(root)
    manifest_file = root / MANIFEST_NAME
    if not manifest_file.is_file():
        raise CorpusError(f"no {MANIFEST_NAME} manifest in {root}")
    manifest = json.loads(manifest_file.read_text(encoding="utf-8"))
    demos = []
    for entry in manifest.get("demos", []):
        demo_id = entry["id"]
        topic = entry.get("topic", "unknown")
        sp = scene_path(root, demo_id)
        if not sp.is_file():
            raise CorpusError(f"scene file missing for demo {demo_id!r}: {sp}")
        parsed = parse_scene_file(sp)
        warnings = list(parsed.warnings)
        tp = transcript_path(root, demo_id)
        transcript = None
        if tp.is_file():
            transcript = parse_transcript_file(tp, demo_id=demo_id)
        else:
            warnings.append(f"transcript missing for demo {demo_id!r}; demo will be skipped")
        demos.append(
            CorpusDemo(demo_id, topic, parsed.scene, transcript, tuple(warnings))
        )
    return Corpus(root=root, demos=tuple(demos))


def load_ground_truth(root: str | Path) -> dict:
    return json.loads((Path(root) / GROUND_TRUTH_NAME).read_text(encoding="utf-8"))
