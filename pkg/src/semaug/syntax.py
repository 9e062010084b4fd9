"""Sentence-pattern matching and word-order transposition rules.

A tagged sentence is labelled with grammatical roles by a single
left-to-right pass.  Each rule R1..R7 rewrites word order by moving or
swapping role blocks and reports the move as a token permutation, which is
what the feature splicer consumes.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

from .lexicon import NOUN_LIKE, PosTag, TaggedSentence, Token


class Role(str, enum.Enum):
    Subject = "Subject"
    Predicate = "Predicate"
    Object = "Object"
    Adverbial = "Adverbial"
    Attribute = "Attribute"
    SingleNoun = "SingleNoun"
    SingleAdjective = "SingleAdjective"


class Pattern(str, enum.Enum):
    SVO = "SVO"
    SAdvAdvAdj = "SAdvAdvAdj"
    SAdvVO = "SAdvVO"
    LoneNoun = "LoneNoun"
    LoneAdj = "LoneAdj"
    NoPattern = "NoPattern"


class Rule(str, enum.Enum):
    R1 = "R1"  # swap subject and object
    R2 = "R2"  # object to the front
    R3 = "R3"  # attribute to the front
    R4 = "R4"  # swap adjacent adjective/adverb
    R5 = "R5"  # predicate to the front
    R6 = "R6"  # swap the two adjectives
    R7 = "R7"  # adverbial to the front


DEFAULT_RULES = (Rule.R1, Rule.R2, Rule.R3, Rule.R4)

UNTRANSPOSABLE = frozenset({Pattern.LoneNoun, Pattern.LoneAdj, Pattern.NoPattern})


class NotApplicable(Exception):
    """The rule needs roles that the matched pattern does not have."""


def parse_rules(text: str | Iterable[str]) -> tuple[Rule, ...]:
    """``"R1,R2"`` -> (Rule.R1, Rule.R2); order is preserved, duplicates dropped."""
    names = text.split(",") if isinstance(text, str) else list(text)
    out: list[Rule] = []
    for name in names:
        name = name.value if isinstance(name, Rule) else str(name).strip()
        if not name:
            continue
        try:
            rule = Rule(name.upper())
        except ValueError:
            raise ValueError(f"unknown rule {name!r}") from None
        if rule not in out:
            out.append(rule)
    return tuple(out)


@dataclass(frozen=True)
class PatternMatch:
    pattern: Pattern
    roles: tuple[tuple[int, Role], ...] = ()

    def role_of(self, index: int) -> Role:
        return self.roles[index][1]

    def indices(self, role: Role) -> list[int]:
        return [i for i, r in self.roles if r is role]

    def permuted(self, perm: "TokenPermutation") -> "PatternMatch":
        """Carry the role labels along with the tokens they belong to."""
        if self.pattern in UNTRANSPOSABLE:
            return self
        return PatternMatch(self.pattern,
                            tuple((i, self.roles[src][1]) for i, src in enumerate(perm.mapping)))


@dataclass(frozen=True)
class TokenPermutation:
    """Entry ``i`` of ``mapping`` is the source index placed at output position ``i``."""

    mapping: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.mapping) != list(range(len(self.mapping))):
            raise ValueError(f"not a permutation: {self.mapping}")

    @classmethod
    def identity(cls, n: int) -> "TokenPermutation":
        return cls(tuple(range(n)))

    def __len__(self) -> int:
        return len(self.mapping)

    def apply(self, items: Sequence):
        return [items[src] for src in self.mapping]

    def then(self, other: "TokenPermutation") -> "TokenPermutation":
        """Permutation equivalent to applying ``self`` first and ``other`` second."""
        return TokenPermutation(tuple(self.mapping[j] for j in other.mapping))

    def inverse(self) -> "TokenPermutation":
        inv = [0] * len(self.mapping)
        for out_pos, src in enumerate(self.mapping):
            inv[src] = out_pos
        return TokenPermutation(tuple(inv))

    def is_identity(self) -> bool:
        return all(i == src for i, src in enumerate(self.mapping))

    def __str__(self) -> str:
        return ",".join(map(str, self.mapping))

    @classmethod
    def parse(cls, text: str) -> "TokenPermutation":
        return cls(tuple(int(x) for x in text.split(",")))


def match_pattern(sentence: TaggedSentence) -> PatternMatch:
    tags = sentence.tags
    n = len(tags)
    if n == 0 or PosTag.Other in tags:
        return PatternMatch(Pattern.NoPattern)
    if n == 1:
        if tags[0] in NOUN_LIKE:
            return PatternMatch(Pattern.LoneNoun, ((0, Role.SingleNoun),))
        if tags[0] is PosTag.Adjective:
            return PatternMatch(Pattern.LoneAdj, ((0, Role.SingleAdjective),))
        return PatternMatch(Pattern.NoPattern)

    roles: list[Role] = []
    i = 0

    def noun_phrase(role: Role) -> bool:
        # adjectives count as attributes only when a noun follows them directly
        nonlocal i
        j = i
        while j < n and tags[j] is PosTag.Adjective:
            j += 1
        if j >= n or tags[j] not in NOUN_LIKE:
            return False
        roles.extend([Role.Attribute] * (j - i))
        roles.append(role)
        i = j + 1
        return True

    if not noun_phrase(Role.Subject):
        return PatternMatch(Pattern.NoPattern)
    num_adverbials = 0
    while i < n and tags[i] in (PosTag.Adverb, PosTag.TimeNoun):
        roles.append(Role.Adverbial)
        num_adverbials += 1
        i += 1

    if i < n and tags[i] is PosTag.Verb:
        while i < n and tags[i] is PosTag.Verb:
            roles.append(Role.Predicate)
            i += 1
        if not noun_phrase(Role.Object) or i != n:
            return PatternMatch(Pattern.NoPattern)
        pattern = Pattern.SAdvVO if num_adverbials else Pattern.SVO
    elif num_adverbials and i == n - 1 and tags[i] is PosTag.Adjective:
        roles.append(Role.Attribute)
        i += 1
        pattern = Pattern.SAdvAdvAdj
    else:
        return PatternMatch(Pattern.NoPattern)
    return PatternMatch(pattern, tuple(enumerate(roles)))


def _blocks(match: PatternMatch, role: Role) -> list[list[int]]:
    """Maximal runs of consecutive indices holding ``role``."""
    runs: list[list[int]] = []
    for i in match.indices(role):
        if runs and runs[-1][-1] == i - 1:
            runs[-1].append(i)
        else:
            runs.append([i])
    return runs


def _phrase(match: PatternMatch, head: Role) -> list[int]:
    """The head token of ``head`` role plus the attributes directly before it."""
    idx = match.indices(head)
    if not idx:
        raise NotApplicable(f"no {head.value}")
    start = idx[0]
    while start > 0 and match.role_of(start - 1) is Role.Attribute:
        start -= 1
    return list(range(start, idx[-1] + 1))


def _move_front(n: int, block: list[int]) -> list[int]:
    rest = [i for i in range(n) if i not in block]
    return block + rest


def _move_back(n: int, block: list[int]) -> list[int]:
    rest = [i for i in range(n) if i not in block]
    return rest + block


def _swap_blocks(n: int, first: list[int], second: list[int]) -> list[int]:
    if first[0] > second[0]:
        first, second = second, first
    order = list(range(n))
    a0, a1 = first[0], first[-1] + 1
    b0, b1 = second[0], second[-1] + 1
    return order[:a0] + order[b0:b1] + order[a1:b0] + order[a0:a1] + order[b1:]


def _permutation_for(rule: Rule, match: PatternMatch, sentence: TaggedSentence,
                     r7_final: bool) -> list[int]:
    n = len(sentence)
    tags = sentence.tags
    if rule is Rule.R1:
        return _swap_blocks(n, _phrase(match, Role.Subject), _phrase(match, Role.Object))
    if rule is Rule.R2:
        return _move_front(n, _phrase(match, Role.Object))
    if rule is Rule.R3:
        runs = [r for r in _blocks(match, Role.Attribute) if r[0] != 0]
        if not runs:
            raise NotApplicable("no attribute away from the front")
        return _move_front(n, runs[0])
    if rule is Rule.R4:
        # rightmost pair, so that a second application undoes the first
        for i in range(n - 2, -1, -1):
            if {tags[i], tags[i + 1]} == {PosTag.Adjective, PosTag.Adverb}:
                return _swap_blocks(n, [i], [i + 1])
        raise NotApplicable("no adjacent adjective/adverb pair")
    if rule is Rule.R5:
        runs = _blocks(match, Role.Predicate)
        if not runs:
            raise NotApplicable("no predicate")
        return _move_front(n, runs[0])
    if rule is Rule.R6:
        adj = [i for i, t in enumerate(tags) if t is PosTag.Adjective]
        if len(adj) != 2:
            raise NotApplicable("R6 needs exactly two adjectives")
        return _swap_blocks(n, [adj[0]], [adj[1]])
    if rule is Rule.R7:
        runs = _blocks(match, Role.Adverbial)
        if not runs:
            raise NotApplicable("no adverbial")
        # a time word and the degree adverb after it (今天|很) are separate blocks
        block = runs[0]
        block = block[:next((k for k, i in enumerate(block) if tags[i] is not tags[block[0]]),
                            len(block))]
        return _move_back(n, block) if r7_final else _move_front(n, block)
    raise NotApplicable(f"unknown rule {rule}")


def apply_rule(rule: Rule | str, match: PatternMatch | None, sentence: TaggedSentence,
               r7_final: bool = False) -> tuple[TaggedSentence, TokenPermutation]:
    """Rewrite ``sentence`` under ``rule``.

    Raises NotApplicable when the sentence is untransposable or lacks the
    roles the rule moves.  With ``r7_final`` the R7 adverbial goes to the end
    of the sentence instead of the front.
    """
    rule = Rule(rule)
    if match is None:
        match = match_pattern(sentence)
    if match.pattern in UNTRANSPOSABLE:
        raise NotApplicable(f"pattern {match.pattern.value} is never transposed")
    if len(match.roles) != len(sentence):
        raise ValueError("pattern match does not belong to this sentence")
    perm = TokenPermutation(tuple(_permutation_for(rule, match, sentence, r7_final)))
    tokens = tuple(Token(sentence.tokens[src].surface, sentence.tokens[src].pos, i)
                   for i, src in enumerate(perm.mapping))
    return TaggedSentence(sentence.utt_id, tokens), perm


@dataclass(frozen=True)
class Variant:
    rule: Rule
    sentence: TaggedSentence
    permutation: TokenPermutation


def transpose_all(sentence: TaggedSentence, rules: Iterable[Rule | str],
                  r7_final: bool = False) -> list[Variant]:
    """One variant per applicable rule, skipping those that leave the text unchanged."""
    match = match_pattern(sentence)
    if match.pattern in UNTRANSPOSABLE:
        return []
    original = sentence.text
    out = []
    for rule in parse_rules(rules):
        try:
            new, perm = apply_rule(rule, match, sentence, r7_final)
        except NotApplicable:
            continue
        if new.text != original:
            out.append(Variant(rule, new, perm))
    return out


def format_variant(sentence: TaggedSentence, variant: Variant) -> str:
    return "\t".join([sentence.utt_id, variant.rule.value, sentence.text,
                      variant.sentence.text, str(variant.permutation)])


def parse_variant_line(line: str) -> tuple[str, Rule, str, str, TokenPermutation]:
    utt_id, rule, original, transposed, perm = line.rstrip("\r\n").split("\t")
    return utt_id, Rule(rule), original, transposed, TokenPermutation.parse(perm)
