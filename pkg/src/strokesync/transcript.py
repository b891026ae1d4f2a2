"""Word-level speech transcripts with start/end timestamps."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import StrokeSyncError


class TranscriptError(StrokeSyncError):
    pass


class MalformedRecordError(TranscriptError):
    pass


class NegativeTimeError(TranscriptError):
    pass


class EndBeforeStartError(TranscriptError):
    pass


class IndexOutOfRangeError(TranscriptError):
    pass


@dataclass(frozen=True)
class Word:
    word: str
    start_s: float
    end_s: float

    def __post_init__(self) -> None:
        if not self.word:
            raise MalformedRecordError("word text must be non-empty")
        if self.start_s < 0:
            raise NegativeTimeError(f"word {self.word!r}: start_s {self.start_s} < 0")
        if self.end_s < self.start_s:
            raise EndBeforeStartError(
                f"word {self.word!r}: end_s {self.end_s} < start_s {self.start_s}"
            )


@dataclass(frozen=True)
class Transcript:
    """Words ordered by start_s; ties keep input order."""

    words: tuple[Word, ...]
    demo_id: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "words", tuple(self.words))
        for a, b in zip(self.words, self.words[1:]):
            if b.start_s < a.start_s:
                raise TranscriptError("words must be sorted by start_s")

    def __len__(self) -> int:
        return len(self.words)


def _word_from_record(rec: object, where: str) -> Word:
    if not isinstance(rec, dict):
        raise MalformedRecordError(f"{where}: record is not an object")
    missing = [k for k in ("word", "start_s", "end_s") if k not in rec]
    if missing:
        raise MalformedRecordError(f"{where}: missing field(s) {missing}")
    word = rec["word"]
    if not isinstance(word, str) or not word:
        raise MalformedRecordError(f"{where}: 'word' must be a non-empty string")
    try:
        start_s = float(rec["start_s"])
        end_s = float(rec["end_s"])
    except (TypeError, ValueError) as exc:
        raise MalformedRecordError(f"{where}: non-numeric timestamp ({exc})") from exc
    return Word(word=word, start_s=start_s, end_s=end_s)


def parse_transcript(raw: bytes | str, demo_id: str = "") -> Transcript:
    """Parse a JSON array or JSON-lines stream of {word, start_s, end_s}."""
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    text = raw.strip()
    records: list[object]
    try:
        doc = json.loads(text) if text else []
        if not isinstance(doc, list):
            raise MalformedRecordError("top-level JSON must be an array of records")
        records = doc
    except json.JSONDecodeError:
        records = []
        for n, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise MalformedRecordError(f"line {n}: not valid JSON ({exc})") from exc
    words = [_word_from_record(rec, f"record {i}") for i, rec in enumerate(records)]
    words.sort(key=lambda w: w.start_s)
    return Transcript(tuple(words), demo_id=demo_id)


def parse_transcript_file(path: str | Path, demo_id: str = "") -> Transcript:
    path = Path(path)
    return parse_transcript(path.read_bytes(), demo_id=demo_id or path.stem)


def transcript_to_records(t: Transcript) -> list[dict]:
    return [{"word": w.word, "start_s": w.start_s, "end_s": w.end_s} for w in t.words]


def context_window(t: Transcript, center: int, k: int) -> list[Word]:
    """Words[center-k .. center+k], clamped to transcript bounds."""
    if k < 0:
        raise ValueError("window radius k must be >= 0")
    if not 0 <= center < len(t.words):
        raise IndexOutOfRangeError(
            f"center {center} outside transcript of {len(t.words)} words"
        )
    lo = max(0, center - k)
    hi = min(len(t.words) - 1, center + k)
    return list(t.words[lo : hi + 1])
