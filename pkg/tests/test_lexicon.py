import io

import pytest
from hypothesis import given, settings, strategies as st

from semaug.lexicon import (DEFAULT_TAGSET, EmptyLexicon, EmptyTranscript, Lexicon,
                            MalformedLine, MalformedToken, PosTag, UnknownTag, format_tagged,
                            load_lexicon, load_tagset, parse_tagged, segment, tag, tag_text)

from conftest import GOLDEN, A, D, N, O, P, T, V


def lex(text):
    return load_lexicon(io.StringIO(text))


class TestLoadLexicon:
    def test_two_entries(self):
        lx = lex("公园\tNoun\n我\tPronoun\n")
        assert len(lx) == 2
        assert lx.max_word_len == 2
        assert lx.entries["公园"] == (PosTag.Noun,)

    def test_duplicates_merge_in_order(self):
        lx = lex("去\tVerb\n去\tAdverb\n")
        assert lx.entries["去"] == (PosTag.Verb, PosTag.Adverb)

    def test_multi_tag_line_and_comments(self):
        lx = lex("# comment\n\n好\tAdjective,Adverb\n好\tAdjective\n")
        assert lx.entries["好"] == (PosTag.Adjective, PosTag.Adverb)

    def test_missing_tab_reports_line(self):
        with pytest.raises(MalformedLine) as err:
            lex("# header\n我\tPronoun\n公园\n")
        assert err.value.lineno == 3

    def test_unknown_tag(self):
        with pytest.raises(UnknownTag) as err:
            lex("我\tPN\n")
        assert err.value.tag == "PN"

    def test_empty(self):
        with pytest.raises(EmptyLexicon):
            lex("# nothing here\n\n")

    def test_max_word_len_is_longest_key(self):
        lx = lex("中华人民共和国\tNoun\n人\tNoun\n")
        assert lx.max_word_len == 7


class TestSegment:
    def test_forward_maximum_matching(self, example_lexicon):
        # hand trace: 我 | 今天 (beats 今) | 要 | 去 | 公园
        assert segment("我今天要去公园", example_lexicon) == ["我", "今天", "要", "去", "公园"]

    def test_longest_match_wins(self):
        lx = Lexicon.from_pairs([("公园", N), ("公", N), ("园", N)])
        assert segment("公园", lx) == ["公园"]

    def test_oov_single_character(self, example_lexicon):
        assert segment("狗", example_lexicon) == ["狗"]
        assert segment("我爱猫", example_lexicon) == ["我", "爱", "猫"]

    def test_whitespace_stripped(self, example_lexicon):
        assert segment(" 我 今天\t要去 公园\n", example_lexicon) == ["我", "今天", "要", "去", "公园"]

    def test_empty_rejected(self, example_lexicon):
        with pytest.raises(EmptyTranscript):
            segment("  \t", example_lexicon)


class TestTag:
    def test_priority_tags(self, example_lexicon):
        s = tag(["我", "今天", "要", "去", "公园"], example_lexicon, "u1")
        assert s.tags == [P, T, V, V, N]
        assert [t.index for t in s.tokens] == [0, 1, 2, 3, 4]
        assert s.text == "我今天要去公园"

    def test_single_word(self, example_lexicon):
        s = tag(["猫"], example_lexicon)
        assert s.tags == [N]

    def test_oov_other(self, example_lexicon):
        assert tag(["狗"], example_lexicon).tags == [O]

    def test_first_tag_wins(self):
        lx = Lexicon.from_pairs([("去", V), ("去", D)])
        assert tag(["去"], lx).tags == [V]


class TestParseTagged:
    def test_default_mapping(self):
        s = parse_tagged("u1\t我/PN 很/AD 喜欢/VV 朋友/NN")
        assert s.utt_id == "u1"
        assert s.surfaces == ["我", "很", "喜欢", "朋友"]
        assert s.tags == [P, D, V, N]

    def test_unmapped_tag_is_other(self):
        assert parse_tagged("u2\t猫/XX").tags == [O]

    def test_missing_slash(self):
        with pytest.raises(MalformedToken):
            parse_tagged("u3\t猫")

    def test_empty_transcript(self):
        with pytest.raises(EmptyTranscript):
            parse_tagged("u4\t   ")

    def test_word_containing_slash_uses_last_slash(self):
        assert parse_tagged("u\t1/2/NN").surfaces == ["1/2"]

    def test_custom_tagset(self):
        mapping = load_tagset(io.StringIO("# ext\tours\nn\tNoun\nv\tVerb\n"))
        assert parse_tagged("u\t猫/n 吃/v", mapping).tags == [N, V]
        with pytest.raises(UnknownTag):
            load_tagset(io.StringIO("n\tNN\n"))

    def test_default_table(self):
        assert DEFAULT_TAGSET["VA"] is A and DEFAULT_TAGSET["JJ"] is A
        assert DEFAULT_TAGSET["NT"] is T

    def test_golden_round_trip(self):
        ctb = (GOLDEN / "tagged_ctb.txt").read_text(encoding="utf-8").splitlines()
        internal = (GOLDEN / "tagged_internal.txt").read_text(encoding="utf-8").splitlines()
        for ext_line, ours in zip(ctb, internal):
            assert format_tagged(parse_tagged(ext_line)) == ours
            # our own serialization reads back unchanged
            assert format_tagged(parse_tagged(ours)) == ours


cjk = st.text(alphabet=st.characters(min_codepoint=0x4E00, max_codepoint=0x4E0F), min_size=1,
              max_size=30)
lexicons = st.lists(st.tuples(cjk.filter(lambda w: len(w) <= 4), st.sampled_from(list(PosTag))),
                    min_size=1, max_size=20).map(Lexicon.from_pairs)


@settings(max_examples=300, deadline=None)
@given(text=cjk, lexicon=lexicons)
def test_segmentation_total_and_longest_match(text, lexicon):
    words = segment(text, lexicon)
    assert "".join(words) == text
    pos = 0
    for w in words:
        assert w in lexicon or len(w) == 1
        # no longer lexicon word starts at this position
        for size in range(len(w) + 1, lexicon.max_word_len + 1):
            assert text[pos:pos + size] not in lexicon or pos + size > len(text)
        pos += len(w)
    assert segment(text, lexicon) == words
    s = tag_text(text, lexicon)
    assert s.text == text
    assert all(t.pos is lexicon.tag_of(t.surface) for t in s.tokens)
