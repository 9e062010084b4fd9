"""Toy lexicon, sentence generator and synthetic corpus for tests and demos."""
from __future__ import annotations

from functools import lru_cache
from pathlib import Path

import numpy as np

from .alignment import alignment_to_ctm, synth_alignment
from .features import write_wav
from .lexicon import NOUN_LIKE, Lexicon, PosTag, TaggedSentence, segment

TOY_WORDS: dict[PosTag, tuple[str, ...]] = {
    PosTag.Pronoun: ("我", "你", "他", "她", "我们"),
    PosTag.Noun: ("朋友", "公园", "手机", "老师", "学生", "电影", "苹果", "猫", "狗", "书"),
    PosTag.TimeNoun: ("今天", "明天", "昨天", "现在"),
    PosTag.Verb: ("喜欢", "要", "去", "看", "买", "吃", "想"),
    PosTag.Adjective: ("高兴", "漂亮", "新", "好", "大", "帅", "丑"),
    PosTag.Adverb: ("很", "非常", "也", "都", "真"),
}


@lru_cache(maxsize=None)
def toy_lexicon() -> Lexicon:
    return Lexicon.from_pairs((w, t) for t, words in TOY_WORDS.items() for w in words)


def toy_lexicon_lines() -> list[str]:
    lines = ["# toy lexicon: word<TAB>tag"]
    for t, words in TOY_WORDS.items():
        lines.extend(f"{w}\t{t.value}" for w in words)
    return lines


def _pick(rng: np.random.Generator, tag: PosTag) -> str:
    words = TOY_WORDS[tag]
    return words[int(rng.integers(len(words)))]


def _nominal(rng, allow_attr: bool = True) -> list[tuple[str, PosTag]]:
    out = []
    if allow_attr and rng.random() < 0.3:
        out.append((_pick(rng, PosTag.Adjective), PosTag.Adjective))
    tag = PosTag.Pronoun if rng.random() < 0.5 else PosTag.Noun
    out.append((_pick(rng, tag), tag))
    return out


def random_sentence(rng: np.random.Generator, utt_id: str = "",
                    kinds: tuple[str, ...] = ("svo", "sadvvo", "sadvadj")) -> TaggedSentence:
    """A sentence fitting one of the transposable patterns.

    Subject and object surfaces always differ, so at least one of R1..R4
    produces a variant.
    """
    kind = kinds[int(rng.integers(len(kinds)))]
    while True:
        words = _nominal(rng)
        if kind in ("sadvvo", "sadvadj"):
            if rng.random() < 0.4:
                words.append((_pick(rng, PosTag.TimeNoun), PosTag.TimeNoun))
            for _ in range(int(rng.integers(1, 3))):
                words.append((_pick(rng, PosTag.Adverb), PosTag.Adverb))
        if kind == "sadvadj":
            words.append((_pick(rng, PosTag.Adjective), PosTag.Adjective))
        else:
            for _ in range(int(rng.integers(1, 3))):
                words.append((_pick(rng, PosTag.Verb), PosTag.Verb))
            obj = _nominal(rng)
            subject = next(w for w, t in words if t in NOUN_LIKE)
            if obj[-1][0] == subject:
                continue
            words.extend(obj)
        surfaces = [w for w, _ in words]
        # the generated words must survive a round trip through segmentation
        if segment("".join(surfaces), toy_lexicon()) == surfaces:
            return TaggedSentence.build(utt_id, words)


def _tone_block(rng, num_samples: int, sample_rate: int) -> np.ndarray:
    t = np.arange(num_samples) / sample_rate
    f0 = rng.uniform(150.0, 3000.0)
    block = 0.3 * np.sin(2 * np.pi * f0 * t) + 0.15 * np.sin(2 * np.pi * 2.3 * f0 * t)
    return block + 0.01 * rng.standard_normal(num_samples)


def make_corpus(out_dir, num_utts: int = 20, seed: int = 0, sample_rate: int = 16000,
                frames_per_char: int = 12, per_char_ctm: bool = True) -> dict[str, Path]:
    """Write lexicon, transcripts, WAVs, wav.scp and a CTM under ``out_dir``.

    Each word is a tone burst whose length matches a synthetic alignment, so
    the CTM agrees with the audio at a 10 ms frame shift.
    """
    out = Path(out_dir)
    wav_dir = out / "wav"
    wav_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    shift = sample_rate // 100
    frame_len = sample_rate * 25 // 1000

    paths = {
        "lexicon": out / "lexicon.txt",
        "transcripts": out / "transcripts.txt",
        "wav_scp": out / "wav.scp",
        "ctm": out / "ctm.txt",
    }
    transcripts, scp, ctm = [], [], []
    for k in range(num_utts):
        utt_id = f"utt{k:04d}"
        sentence = random_sentence(rng, utt_id)
        ali = synth_alignment(sentence, frames_per_char, seed=seed * 100003 + k)
        num_samples = (ali.total_frames - 1) * shift + frame_len
        audio = np.zeros(num_samples)
        for span in ali.spans:
            lo = span.start_frame * shift
            hi = num_samples if span is ali.spans[-1] else span.end_frame * shift
            audio[lo:hi] = _tone_block(rng, hi - lo, sample_rate)
        wav_path = wav_dir / f"{utt_id}.wav"
        write_wav(wav_path, audio, sample_rate)
        transcripts.append(f"{utt_id}\t{sentence.text}")
        scp.append(f"{utt_id}\t{wav_path}")
        ctm.extend(alignment_to_ctm(ali, sentence, per_char=per_char_ctm))

    for key, lines in (("lexicon", toy_lexicon_lines()), ("transcripts", transcripts),
                       ("wav_scp", scp), ("ctm", ctm)):
        paths[key].write_text("\n".join(lines) + "\n", encoding="utf-8")
    return paths
