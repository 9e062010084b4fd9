"""Feature splicing, augmented-corpus generation and ratio-mixed manifests."""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .alignment import AlignmentError, UtteranceAlignment
from .archive import ArchiveWriter, read_ref
from .lexicon import TaggedSentence
from .syntax import Rule, TokenPermutation, format_variant, parse_rules, transpose_all


class SpliceError(ValueError):
    pass


class SpanMismatch(SpliceError):
    pass


class PermLengthMismatch(SpliceError):
    pass


class InsufficientSource(ValueError):
    def __init__(self, tag: str, needed: int, available: int):
        super().__init__(f"source {tag}: need {needed} records, only {available} available")
        self.tag, self.needed, self.available = tag, needed, available


class SourceTag(str, enum.Enum):
    Raw = "Raw"
    R1 = "R1"
    R2 = "R2"
    R3 = "R3"
    R4 = "R4"
    R5 = "R5"
    R6 = "R6"
    R7 = "R7"


def splice(features: np.ndarray, alignment: UtteranceAlignment,
           perm: TokenPermutation | Sequence[int]) -> np.ndarray:
    """Concatenate the word blocks of ``features`` in permuted order."""
    mapping = perm.mapping if isinstance(perm, TokenPermutation) else tuple(perm)
    if features.shape[0] != alignment.total_frames:
        raise SpanMismatch(f"{alignment.utt_id}: alignment covers {alignment.total_frames} frames, "
                           f"features have {features.shape[0]}")
    if len(mapping) != len(alignment.spans):
        raise PermLengthMismatch(f"{alignment.utt_id}: permutation of {len(mapping)} "
                                 f"for {len(alignment.spans)} spans")
    blocks = [features[alignment.spans[src].start_frame:alignment.spans[src].end_frame]
              for src in mapping]
    return np.concatenate(blocks, axis=0)


@dataclass(frozen=True)
class UtteranceRecord:
    utt_id: str
    transcript: str
    feature_ref: str  # "archive_path:offset"
    num_frames: int
    source_tag: SourceTag = SourceTag.Raw

    def to_line(self) -> str:
        return "\t".join([self.utt_id, self.feature_ref, str(self.num_frames),
                          self.source_tag.value, self.transcript])

    @classmethod
    def from_line(cls, line: str) -> "UtteranceRecord":
        fields = line.rstrip("\r\n").split("\t")
        if len(fields) != 5:
            raise ValueError(f"manifest line needs 5 tab-separated fields: {line!r}")
        utt_id, ref, frames, tag, text = fields
        return cls(utt_id, text, ref, int(frames), SourceTag(tag))


def augmented_id(utt_id: str, rule: Rule | str) -> str:
    return f"{utt_id}#{Rule(rule).value}"


def base_id(utt_id: str) -> str:
    return utt_id.split("#", 1)[0]


class Manifest(list):
    """Ordered list of UtteranceRecord with unique ids."""

    def __init__(self, records: Iterable[UtteranceRecord] = ()):
        super().__init__(records)
        seen = set()
        for r in self:
            if r.utt_id in seen:
                raise ValueError(f"duplicate utterance id {r.utt_id!r} in manifest")
            seen.add(r.utt_id)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for r in self:
                f.write(r.to_line() + "\n")

    @classmethod
    def read(cls, path) -> "Manifest":
        with open(path, encoding="utf-8") as f:
            return cls(UtteranceRecord.from_line(line) for line in f if line.strip())

    def by_tag(self) -> dict[SourceTag, list[UtteranceRecord]]:
        out: dict[SourceTag, list[UtteranceRecord]] = {}
        for r in self:
            out.setdefault(r.source_tag, []).append(r)
        return out


@dataclass
class AugmentResult:
    records: list[UtteranceRecord] = field(default_factory=list)
    variant_log: list[str] = field(default_factory=list)
    skips: list[tuple[str, str]] = field(default_factory=list)
    failures: list[tuple[str, str]] = field(default_factory=list)

    def counts_by_rule(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for r in self.records:
            out[r.source_tag.value] = out.get(r.source_tag.value, 0) + 1
        return out

    def skip_reasons(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for _, reason in self.skips:
            key = reason.split(":", 1)[0]
            out[key] = out.get(key, 0) + 1
        return out


def augment_corpus(records: Sequence[UtteranceRecord],
                   sentences: Mapping[str, TaggedSentence],
                   alignments: Mapping[str, UtteranceAlignment],
                   rules: Iterable[Rule | str],
                   writer: ArchiveWriter,
                   load_features: Callable[[str], np.ndarray] = read_ref,
                   r7_final: bool = False,
                   workers: int = 1) -> AugmentResult:
    """Generate rule variants for every raw record and archive their spliced features.

    Utterances without a sentence or an alignment, or with no applicable
    rule, produce no variants and are listed in ``skips``.  A failure on
    one utterance is recorded there as well and does not stop the corpus.
    """
    rules = parse_rules(rules)
    result = AugmentResult()
    if not rules:
        return result

    def work(record: UtteranceRecord):
        sentence = sentences.get(record.utt_id)
        if sentence is None:
            return "no-sentence", None
        alignment = alignments.get(record.utt_id)
        if alignment is None:
            return "no-alignment", None
        if len(alignment.spans) != len(sentence):
            return "span-count-mismatch", None
        variants = transpose_all(sentence, rules, r7_final)
        if not variants:
            return "no-variant", None
        try:
            feats = load_features(record.feature_ref)
            return None, [(v, splice(feats, alignment, v.permutation)) for v in variants]
        except (SpliceError, AlignmentError, ValueError, OSError) as exc:
            return f"error:{type(exc).__name__}: {exc}", None

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        # map() yields in input order, so archive offsets stay deterministic
        for record, (reason, produced) in zip(records, pool.map(work, records)):
            if reason is not None:
                result.skips.append((record.utt_id, reason))
                if reason.startswith("error:"):
                    result.failures.append((record.utt_id, reason))
                continue
            sentence = sentences[record.utt_id]
            for variant, feats in produced:
                new_id = augmented_id(record.utt_id, variant.rule)
                offset = writer.write(new_id, feats)
                result.records.append(UtteranceRecord(
                    new_id, variant.sentence.text, f"{writer.data_path}:{offset}",
                    feats.shape[0], SourceTag(variant.rule.value)))
                result.variant_log.append(format_variant(sentence, variant))
    return result


@dataclass(frozen=True)
class CombinationSpec:
    ratios: tuple[tuple[SourceTag, float], ...]
    seed: int = 0
    target_size: int = 1

    def __post_init__(self):
        tags = [t for t, _ in self.ratios]
        if len(set(tags)) != len(tags):
            raise ValueError("a source tag appears twice in the ratios")
        for t, w in self.ratios:
            if not 0.0 <= w <= 1.0:
                raise ValueError(f"weight {w} for {t.value} outside [0, 1]")
        total = math.fsum(w for _, w in self.ratios)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"ratio weights sum to {total}, not 1")
        if self.target_size <= 0:
            raise ValueError("target_size must be positive")

    @classmethod
    def parse(cls, text: str, seed: int = 0, target_size: int = 1) -> "CombinationSpec":
        """``"Raw=0.8,R1=0.05,..."``"""
        ratios = []
        for item in text.split(","):
            if not item.strip():
                continue
            name, sep, weight = item.partition("=")
            if not sep:
                raise ValueError(f"ratio item {item!r} is not TAG=weight")
            ratios.append((SourceTag(name.strip()), float(weight)))
        return cls(tuple(ratios), seed, target_size)

    def allocate(self) -> dict[SourceTag, int]:
        """Largest-remainder split of target_size; ties go to the earlier tag."""
        quotas = [w * self.target_size for _, w in self.ratios]
        counts = [int(math.floor(q)) for q in quotas]
        left = self.target_size - sum(counts)
        order = sorted(range(len(quotas)), key=lambda i: (-(quotas[i] - counts[i]), i))
        for i in order[:left]:
            counts[i] += 1
        return {t: c for (t, _), c in zip(self.ratios, counts)}


def combine(raw: Sequence[UtteranceRecord], augmented: Sequence[UtteranceRecord],
            spec: CombinationSpec) -> Manifest:
    pools = Manifest(list(raw) + list(augmented)).by_tag()
    rng = np.random.default_rng(spec.seed)
    chosen: list[UtteranceRecord] = []
    for tag, count in spec.allocate().items():
        pool = pools.get(tag, [])
        if count > len(pool):
            raise InsufficientSource(tag.value, count, len(pool))
        if count:
            picks = rng.choice(len(pool), size=count, replace=False)
            chosen.extend(pool[i] for i in picks)
    order = rng.permutation(len(chosen))
    return Manifest(chosen[i] for i in order)
