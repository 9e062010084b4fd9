from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semaug.lexicon import parse_tagged
from semaug.synth import random_sentence
from semaug.syntax import (NotApplicable, Pattern, Role, Rule, TokenPermutation, apply_rule,
                           format_variant, match_pattern, parse_rules, parse_variant_line,
                           transpose_all)

from conftest import A, D, N, O, P, T, V, sent

LIKE_FRIENDS = sent(("我", P), ("很", D), ("喜欢", V), ("朋友", N))
GO_PARK_TODAY = sent(("我", P), ("今天", T), ("要", V), ("去", V), ("公园", N))
HAPPY_TODAY = sent(("我", P), ("今天", T), ("很", D), ("高兴", A))
GO_PARK = sent(("我", P), ("要", V), ("去", V), ("公园", N))


class TestMatchPattern:
    def test_sadvvo(self):
        m = match_pattern(LIKE_FRIENDS)
        assert m.pattern is Pattern.SAdvVO
        assert [r for _, r in m.roles] == [Role.Subject, Role.Adverbial, Role.Predicate, Role.Object]

    def test_lone_noun_and_adjective(self):
        assert match_pattern(sent(("猫", N))).pattern is Pattern.LoneNoun
        assert match_pattern(sent(("我", P))).pattern is Pattern.LoneNoun
        assert match_pattern(sent(("今天", T))).pattern is Pattern.LoneNoun
        assert match_pattern(sent(("好", A))).pattern is Pattern.LoneAdj
        assert match_pattern(sent(("去", V))).pattern is Pattern.NoPattern

    def test_time_noun_is_adverbial(self):
        m = match_pattern(HAPPY_TODAY)
        assert m.pattern is Pattern.SAdvAdvAdj
        assert [r for _, r in m.roles] == [Role.Subject, Role.Adverbial, Role.Adverbial,
                                           Role.Attribute]

    def test_table_rows(self):
        assert match_pattern(sent(("猫", N), ("吃", V), ("鱼", N))).pattern is Pattern.SVO
        two_adverbs = sent(("他", P), ("非常", D), ("很", D), ("帅", A))
        assert match_pattern(two_adverbs).pattern is Pattern.SAdvAdvAdj

    def test_multi_verb_predicate(self):
        m = match_pattern(GO_PARK_TODAY)
        assert m.pattern is Pattern.SAdvVO
        assert m.indices(Role.Predicate) == [2, 3]
        assert m.indices(Role.Adverbial) == [1]

    def test_attributes(self):
        s = sent(("好", A), ("朋友", N), ("买", V), ("新", A), ("手机", N))
        m = match_pattern(s)
        assert m.pattern is Pattern.SVO
        assert [r for _, r in m.roles] == [Role.Attribute, Role.Subject, Role.Predicate,
                                           Role.Attribute, Role.Object]

    @pytest.mark.parametrize("pairs", [
        [("我", P), ("很", D), ("喜欢", V), ("朋友", O)],     # Other tag
        [("我", P), ("朋友", N)],                             # no predicate
        [("我", P), ("喜欢", V)],                             # no object
        [("我", P), ("喜欢", V), ("朋友", N), ("很", D)],      # trailing leftover
        [("很", D), ("我", P), ("喜欢", V), ("朋友", N)],      # leading adverb
        [("我", P), ("高兴", A)],                             # adjective without adverbial
        [("我", P), ("很", D), ("高兴", A), ("朋友", N)],      # adjective not trailing
    ])
    def test_unlabelled_tokens_give_no_pattern(self, pairs):
        m = match_pattern(sent(*pairs))
        assert m.pattern is Pattern.NoPattern
        assert m.roles == ()

    def test_roles_cover_all_tokens(self):
        rng = np.random.default_rng(5)
        for k in range(200):
            s = random_sentence(rng, f"u{k}")
            m = match_pattern(s)
            assert m.pattern not in (Pattern.NoPattern, Pattern.LoneNoun, Pattern.LoneAdj)
            assert [i for i, _ in m.roles] == list(range(len(s)))
            if m.pattern is not Pattern.SAdvAdvAdj:
                assert len(m.indices(Role.Subject)) == 1 and len(m.indices(Role.Object)) == 1


class TestApplyRule:
    def test_r1_canonical_example(self):
        new, perm = apply_rule(Rule.R1, match_pattern(LIKE_FRIENDS), LIKE_FRIENDS)
        assert new.text == "朋友很喜欢我"
        assert perm.mapping == (3, 1, 2, 0)

    def test_r2_canonical_example(self):
        new, perm = apply_rule(Rule.R2, None, GO_PARK_TODAY)
        assert new.text == "公园我今天要去"
        assert perm.mapping == (4, 0, 1, 2, 3)

    def test_r7_fronts_the_time_adverbial(self):
        new, perm = apply_rule("R7", None, HAPPY_TODAY)
        assert new.text == "今天我很高兴"
        assert perm.mapping == (1, 0, 2, 3)

    def test_r7_final_variant(self):
        new, _ = apply_rule(Rule.R7, None, HAPPY_TODAY, r7_final=True)
        assert new.text == "我很高兴今天"

    def test_r5_moves_predicate_block(self):
        new, perm = apply_rule(Rule.R5, None, GO_PARK)
        assert new.text == "要去我公园"
        assert perm.mapping == (1, 2, 0, 3)

    def test_r3_moves_attribute(self):
        s = sent(("他", P), ("买", V), ("新", A), ("手机", N))
        new, perm = apply_rule(Rule.R3, None, s)
        assert new.text == "新他买手机"
        assert perm.mapping[0] == 2

    def test_r4_swaps_adjective_and_adverb(self):
        new, perm = apply_rule(Rule.R4, None, HAPPY_TODAY)
        assert new.text == "我今天高兴很"
        assert perm.mapping == (0, 1, 3, 2)

    def test_r6_swaps_two_adjectives(self):
        s = sent(("帅", A), ("我", P), ("喜欢", V), ("丑", A), ("他", P))
        new, perm = apply_rule(Rule.R6, None, s)
        assert new.text == "丑我喜欢帅他"
        assert perm.mapping == (3, 1, 2, 0, 4)

    def test_r1_moves_attributes_with_heads(self):
        s = sent(("帅", A), ("我", P), ("喜欢", V), ("丑", A), ("他", P))
        new, perm = apply_rule(Rule.R1, None, s)
        assert new.text == "丑他喜欢帅我"
        assert perm.mapping == (3, 4, 2, 0, 1)

    def test_not_applicable(self):
        with pytest.raises(NotApplicable):
            apply_rule(Rule.R1, None, HAPPY_TODAY)  # no object
        with pytest.raises(NotApplicable):
            apply_rule(Rule.R6, None, LIKE_FRIENDS)
        with pytest.raises(NotApplicable):
            apply_rule(Rule.R7, None, sent(("猫", N), ("吃", V), ("鱼", N)))
        for lone in (sent(("猫", N)), sent(("好", A))):
            for rule in Rule:
                with pytest.raises(NotApplicable):
                    apply_rule(rule, None, lone)

    def test_r1_twice_is_identity(self):
        m = match_pattern(LIKE_FRIENDS)
        once, p1 = apply_rule(Rule.R1, m, LIKE_FRIENDS)
        twice, p2 = apply_rule(Rule.R1, m.permuted(p1), once)
        assert twice.text == LIKE_FRIENDS.text
        assert p1.then(p2).is_identity()
        # re-matching the variant gives the same answer for R1
        again, _ = apply_rule(Rule.R1, None, once)
        assert again.text == LIKE_FRIENDS.text


class TestTransposeAll:
    def test_lone_noun_has_no_variants(self):
        assert transpose_all(sent(("猫", N)), parse_rules("R1,R2,R3,R4")) == []

    def test_one_variant_for_r1(self):
        out = transpose_all(LIKE_FRIENDS, [Rule.R1])
        assert [(v.rule, v.sentence.text) for v in out] == [(Rule.R1, "朋友很喜欢我")]

    def test_same_subject_and_object_dropped(self):
        s = sent(("我", P), ("爱", V), ("我", P))
        assert transpose_all(s, ["R1"]) == []

    def test_all_rules(self):
        out = transpose_all(GO_PARK_TODAY, list(Rule))
        texts = {v.rule: v.sentence.text for v in out}
        assert texts == {Rule.R1: "公园今天要去我", Rule.R2: "公园我今天要去",
                         Rule.R5: "要去我今天公园", Rule.R7: "今天我要去公园"}

    def test_variant_log_round_trip(self):
        v = transpose_all(LIKE_FRIENDS, ["R1"])[0]
        line = format_variant(LIKE_FRIENDS, v)
        assert line == "u\tR1\t我很喜欢朋友\t朋友很喜欢我\t3,1,2,0"
        assert parse_variant_line(line) == ("u", Rule.R1, "我很喜欢朋友", "朋友很喜欢我",
                                            TokenPermutation((3, 1, 2, 0)))

    def test_parse_rules(self):
        assert parse_rules("R1, r2,R1") == (Rule.R1, Rule.R2)
        with pytest.raises(ValueError):
            parse_rules("R8")


class TestTokenPermutation:
    def test_rejects_non_bijection(self):
        with pytest.raises(ValueError):
            TokenPermutation((0, 0, 1))

    def test_compose_and_inverse(self):
        p = TokenPermutation((2, 0, 1))
        assert p.then(p.inverse()).is_identity()
        q = TokenPermutation((1, 0, 2))
        items = list("abc")
        assert p.then(q).apply(items) == q.apply(p.apply(items))


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), rules=st.sets(st.sampled_from(list(Rule)), min_size=1))
def test_variant_properties(seed, rules):
    s = random_sentence(np.random.default_rng(seed), "p")
    for v in transpose_all(s, sorted(rules)):
        # multiset preserved, permutation reproduces the variant
        assert Counter(v.sentence.surfaces) == Counter(s.surfaces)
        assert v.permutation.apply(s.surfaces) == v.sentence.surfaces
        assert v.permutation.apply(s.tags) == v.sentence.tags
        assert sorted(v.permutation.mapping) == list(range(len(s)))
        assert v.sentence.text != s.text


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_front_placement(seed):
    s = random_sentence(np.random.default_rng(seed), "p")
    m = match_pattern(s)
    roles = [r for _, r in m.roles]
    obj = roles.index(Role.Object) if Role.Object in roles else None
    if obj is not None:
        while obj > 0 and roles[obj - 1] is Role.Attribute:
            obj -= 1
    attr = next((i for i in range(1, len(s)) if roles[i] is Role.Attribute
                 and roles[i - 1] is not Role.Attribute), None)
    first = {
        Rule.R2: obj,
        Rule.R3: attr,
        Rule.R5: roles.index(Role.Predicate) if Role.Predicate in roles else None,
        Rule.R7: roles.index(Role.Adverbial) if Role.Adverbial in roles else None,
    }
    for rule, expected in first.items():
        if expected is None:
            with pytest.raises(NotApplicable):
                apply_rule(rule, m, s)
            continue
        _, perm = apply_rule(rule, m, s)
        assert perm.mapping[0] == expected


def test_tagged_input_example():
    s = parse_tagged("u1\t我/PN 很/AD 喜欢/VV 朋友/NN")
    assert transpose_all(s, ["R1"])[0].sentence.text == "朋友很喜欢我"
