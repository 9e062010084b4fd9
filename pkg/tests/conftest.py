from pathlib import Path

import pytest

from semaug.lexicon import Lexicon, PosTag, TaggedSentence

GOLDEN = Path(__file__).parent / "golden"

P, T, N, V, A, D, O = (PosTag.Pronoun, PosTag.TimeNoun, PosTag.Noun, PosTag.Verb,
                       PosTag.Adjective, PosTag.Adverb, PosTag.Other)


def sent(*pairs, utt_id="u"):
    """sent(("我", P), ("很", D), ...)"""
    return TaggedSentence.build(utt_id, pairs)


@pytest.fixture
def example_lexicon():
    return Lexicon.from_pairs([
        ("我", P), ("今天", T), ("今", N), ("要", V), ("去", V), ("公园", N),
        ("很", D), ("喜欢", V), ("朋友", N), ("高兴", A), ("猫", N),
    ])
