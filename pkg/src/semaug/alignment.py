"""Forced-alignment ingestion: CTM parsing and word-level frame spans."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .lexicon import TaggedSentence

# tolerated excess of the last aligned frame over the feature length
OVERSHOOT_FRAMES = 2
_EPS = 1e-9


class AlignmentError(ValueError):
    pass


class MalformedCtmLine(AlignmentError):
    def __init__(self, lineno: int, line: str, why: str = ""):
        super().__init__(f"malformed CTM line {lineno}: {line!r}" + (f" ({why})" if why else ""))
        self.lineno = lineno


class NegativeTime(AlignmentError):
    pass


class OverlappingEntries(AlignmentError):
    def __init__(self, utt_id: str):
        super().__init__(f"overlapping CTM entries in {utt_id}")
        self.utt_id = utt_id


class AlignmentTextMismatch(AlignmentError):
    pass


class SpanOverflow(AlignmentError):
    pass


@dataclass(frozen=True)
class CtmEntry:
    utt_id: str
    channel: int
    start_sec: float
    dur_sec: float
    word: str
    confidence: float | None = None

    @property
    def end_sec(self) -> float:
        return self.start_sec + self.dur_sec


def parse_ctm(stream: Iterable[str]) -> dict[str, list[CtmEntry]]:
    """Group ``utt channel start dur word [conf]`` lines by utterance, time-sorted."""
    grouped: dict[str, list[CtmEntry]] = defaultdict(list)
    for lineno, raw in enumerate(stream, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) not in (5, 6):
            raise MalformedCtmLine(lineno, line, "expected 5 or 6 fields")
        try:
            channel = int(fields[1])
            start, dur = float(fields[2]), float(fields[3])
            conf = float(fields[5]) if len(fields) == 6 else None
        except ValueError:
            raise MalformedCtmLine(lineno, line) from None
        if not (np.isfinite(start) and np.isfinite(dur)):
            raise MalformedCtmLine(lineno, line, "non-finite time")
        if start < 0 or dur < 0:
            raise NegativeTime(f"line {lineno}: negative time in {line!r}")
        if dur == 0:
            raise MalformedCtmLine(lineno, line, "zero duration")
        if conf is not None and not 0.0 <= conf <= 1.0:
            raise MalformedCtmLine(lineno, line, "confidence outside [0, 1]")
        grouped[fields[0]].append(CtmEntry(fields[0], channel, start, dur, fields[4], conf))

    out = {}
    for utt_id, entries in grouped.items():
        entries.sort(key=lambda e: e.start_sec)
        for prev, cur in zip(entries, entries[1:]):
            if cur.start_sec < prev.end_sec - _EPS:
                raise OverlappingEntries(utt_id)
        out[utt_id] = entries
    return out


def group_to_tokens(entries: Sequence[CtmEntry], sentence: TaggedSentence
                    ) -> list[tuple[int, float, float]]:
    """Merge (character- or word-level) CTM entries into one interval per token."""
    groups = []
    k = 0
    for tok in sentence.tokens:
        spelled = ""
        first = k
        while k < len(entries) and len(spelled) < len(tok.surface):
            spelled += entries[k].word
            k += 1
        if spelled != tok.surface:
            raise AlignmentTextMismatch(
                f"{sentence.utt_id}: token {tok.index} {tok.surface!r} vs alignment {spelled!r}")
        groups.append((tok.index, entries[first].start_sec, entries[k - 1].end_sec))
    if k != len(entries):
        extra = "".join(e.word for e in entries[k:])
        raise AlignmentTextMismatch(f"{sentence.utt_id}: alignment has extra text {extra!r}")
    return groups


@dataclass(frozen=True)
class WordSpan:
    token_index: int
    start_frame: int
    num_frames: int

    @property
    def end_frame(self) -> int:
        return self.start_frame + self.num_frames


@dataclass(frozen=True)
class UtteranceAlignment:
    utt_id: str
    spans: tuple[WordSpan, ...]
    total_frames: int
    frame_shift_ms: float = 10.0
    frame_len_ms: float = 25.0

    def __post_init__(self):
        if self.total_frames <= 0:
            raise AlignmentError(f"{self.utt_id}: total_frames must be positive")
        pos = 0
        for span in self.spans:
            if span.start_frame != pos or span.num_frames <= 0:
                raise AlignmentError(f"{self.utt_id}: spans do not partition the frames at {span}")
            pos = span.end_frame
        if pos != self.total_frames:
            raise AlignmentError(f"{self.utt_id}: spans cover {pos} of {self.total_frames} frames")

    def __len__(self) -> int:
        return len(self.spans)

    def boundaries(self) -> list[tuple[int, int]]:
        return [(s.start_frame, s.end_frame) for s in self.spans]


def to_frame_spans(groups: Sequence[tuple[int, float, float]], total_frames: int,
                   frame_shift_ms: float = 10.0, frame_len_ms: float = 25.0,
                   utt_id: str = "") -> UtteranceAlignment:
    """Convert token time intervals to a gap-free frame partition.

    A silence gap between two tokens is owned by the token that follows it;
    the leading gap goes to the first token and the trailing gap to the last.
    """
    if not groups:
        raise AlignmentError(f"{utt_id}: no tokens to align")
    to_frame = lambda sec: int(round(sec * 1000.0 / frame_shift_ms))
    starts = [0]
    for (_, _, prev_end), (_, start, _) in zip(groups, groups[1:]):
        if start < prev_end - _EPS:
            raise AlignmentError(f"{utt_id}: token intervals overlap")
        starts.append(to_frame(prev_end))
    last_end = to_frame(groups[-1][2])
    if last_end > total_frames + OVERSHOOT_FRAMES:
        raise SpanOverflow(f"{utt_id}: alignment ends at frame {last_end}, features have {total_frames}")
    for s in starts:
        if s >= total_frames:
            raise SpanOverflow(f"{utt_id}: span starts at frame {s} >= {total_frames}")
    ends = starts[1:] + [total_frames]
    spans = []
    for (idx, _, _), s, e in zip(groups, starts, ends):
        if e <= s:
            raise AlignmentError(f"{utt_id}: token {idx} rounds to an empty span")
        spans.append(WordSpan(idx, s, e - s))
    return UtteranceAlignment(utt_id, tuple(spans), total_frames, frame_shift_ms, frame_len_ms)


def synth_alignment(sentence: TaggedSentence, frames_per_char: int, seed: int,
                    jitter: float = 0.3, frame_shift_ms: float = 10.0) -> UtteranceAlignment:
    """Make up a plausible alignment: about ``frames_per_char`` frames per character.

    Each span length is scaled by a uniform factor in ``[1 - jitter, 1 + jitter]``
    drawn from a generator seeded with ``seed``.
    """
    if frames_per_char <= 0:
        raise ValueError("frames_per_char must be positive")
    rng = np.random.default_rng(seed)
    spans = []
    pos = 0
    for tok in sentence.tokens:
        base = frames_per_char * len(tok.surface)
        factor = 1.0 + jitter * rng.uniform(-1.0, 1.0) if jitter else 1.0
        length = max(1, int(round(base * factor)))
        spans.append(WordSpan(tok.index, pos, length))
        pos += length
    return UtteranceAlignment(sentence.utt_id, tuple(spans), pos, frame_shift_ms)


def alignment_to_ctm(alignment: UtteranceAlignment, sentence: TaggedSentence,
                     per_char: bool = False, channel: int = 1) -> list[str]:
    """Render an alignment as CTM lines (used to fabricate aligner output)."""
    shift = alignment.frame_shift_ms / 1000.0
    lines = []
    for span, tok in zip(alignment.spans, sentence.tokens):
        if per_char:
            n = len(tok.surface)
            cuts = [span.start_frame + (span.num_frames * c) // n for c in range(n + 1)]
            pieces = [(ch, cuts[c], cuts[c + 1]) for c, ch in enumerate(tok.surface)]
        else:
            pieces = [(tok.surface, span.start_frame, span.end_frame)]
        for word, s, e in pieces:
            if e <= s:
                raise AlignmentError(f"{alignment.utt_id}: cannot split {tok.surface!r} per character")
            lines.append(f"{alignment.utt_id} {channel} {s * shift:.3f} {(e - s) * shift:.3f} {word}")
    return lines


def format_alignment(alignment: UtteranceAlignment) -> str:
    """``utt_id<TAB>total_frames<TAB>frame_shift_ms<TAB>start:len start:len ...``"""
    spans = " ".join(f"{s.start_frame}:{s.num_frames}" for s in alignment.spans)
    return f"{alignment.utt_id}\t{alignment.total_frames}\t{alignment.frame_shift_ms:g}\t{spans}"


def parse_alignment_line(line: str) -> UtteranceAlignment:
    try:
        utt_id, total, shift, body = line.rstrip("\r\n").split("\t")
        spans = []
        for i, item in enumerate(body.split()):
            start, length = item.split(":")
            spans.append(WordSpan(i, int(start), int(length)))
        return UtteranceAlignment(utt_id, tuple(spans), int(total), float(shift))
    except ValueError as exc:
        if isinstance(exc, AlignmentError):
            raise
        raise AlignmentError(f"bad alignment line {line!r}") from None


def permute_alignment(alignment: UtteranceAlignment, mapping: Sequence[int],
                      utt_id: str | None = None) -> UtteranceAlignment:
    """Spans of the spliced utterance: output token ``i`` takes source span ``mapping[i]``."""
    spans = []
    pos = 0
    for i, src in enumerate(mapping):
        length = alignment.spans[src].num_frames
        spans.append(WordSpan(i, pos, length))
        pos += length
    return UtteranceAlignment(utt_id or alignment.utt_id, tuple(spans), alignment.total_frames,
                              alignment.frame_shift_ms, alignment.frame_len_ms)
