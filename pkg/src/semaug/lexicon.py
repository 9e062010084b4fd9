"""Dictionary-based word segmentation and part-of-speech tagging.

Mandarin transcripts are segmented with greedy forward maximum matching
against a user lexicon; each word takes the first tag listed for it.
Externally tagged text (``word/TAG`` tokens) can be ingested instead.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping


class PosTag(str, enum.Enum):
    Noun = "Noun"
    Pronoun = "Pronoun"
    TimeNoun = "TimeNoun"
    Verb = "Verb"
    Adjective = "Adjective"
    Adverb = "Adverb"
    Other = "Other"


NOUN_LIKE = frozenset({PosTag.Noun, PosTag.Pronoun, PosTag.TimeNoun})


class LexiconError(ValueError):
    pass


class MalformedLine(LexiconError):
    def __init__(self, lineno: int, line: str):
        super().__init__(f"malformed lexicon line {lineno}: {line!r}")
        self.lineno = lineno


class UnknownTag(LexiconError):
    def __init__(self, tag: str, lineno: int | None = None):
        where = f" (line {lineno})" if lineno is not None else ""
        super().__init__(f"unknown POS tag {tag!r}{where}")
        self.tag = tag


class EmptyLexicon(LexiconError):
    pass


class MalformedToken(ValueError):
    pass


class EmptyTranscript(ValueError):
    pass


def _parse_tag(name: str, lineno: int | None = None) -> PosTag:
    try:
        return PosTag(name.strip())
    except ValueError:
        raise UnknownTag(name.strip(), lineno) from None


@dataclass(frozen=True)
class Lexicon:
    entries: Mapping[str, tuple[PosTag, ...]]
    max_word_len: int = field(init=False)

    def __post_init__(self):
        if not self.entries:
            raise EmptyLexicon("lexicon has no entries")
        for word, tags in self.entries.items():
            if not word or not tags:
                raise LexiconError(f"invalid entry {word!r} -> {tags!r}")
        object.__setattr__(self, "max_word_len", max(len(w) for w in self.entries))

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def tag_of(self, word: str) -> PosTag:
        tags = self.entries.get(word)
        return tags[0] if tags else PosTag.Other

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, PosTag | str]]) -> "Lexicon":
        merged: dict[str, list[PosTag]] = {}
        for word, tag in pairs:
            tags = merged.setdefault(word, [])
            tag = PosTag(tag)
            if tag not in tags:
                tags.append(tag)
        return cls({w: tuple(t) for w, t in merged.items()})


def load_lexicon(source: Iterable[str]) -> Lexicon:
    """Read ``word<TAB>tag[,tag...]`` lines; ``#`` starts a comment line.

    Repeated words merge their tag lists, keeping first-seen order.
    """
    merged: dict[str, list[PosTag]] = {}
    for lineno, raw in enumerate(source, 1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
            raise MalformedLine(lineno, line)
        word = parts[0].strip()
        tags = merged.setdefault(word, [])
        for name in parts[1].split(","):
            if not name.strip():
                raise MalformedLine(lineno, line)
            tag = _parse_tag(name, lineno)
            if tag not in tags:
                tags.append(tag)
    if not merged:
        raise EmptyLexicon("no entries found in lexicon source")
    return Lexicon({w: tuple(t) for w, t in merged.items()})


def normalize_text(text: str) -> str:
    return "".join(text.split())


def segment(text: str, lexicon: Lexicon) -> list[str]:
    """Forward maximum matching; unknown characters become one-char words."""
    text = normalize_text(text)
    if not text:
        raise EmptyTranscript("nothing to segment")
    words = []
    pos, n = 0, len(text)
    while pos < n:
        for size in range(min(lexicon.max_word_len, n - pos), 0, -1):
            if text[pos:pos + size] in lexicon.entries:
                break
        else:
            size = 1
        words.append(text[pos:pos + size])
        pos += size
    return words


@dataclass(frozen=True)
class Token:
    surface: str
    pos: PosTag
    index: int


@dataclass(frozen=True)
class TaggedSentence:
    utt_id: str
    tokens: tuple[Token, ...]

    def __post_init__(self):
        for i, tok in enumerate(self.tokens):
            if tok.index != i:
                raise ValueError(f"token index {tok.index} at position {i}")
            if not tok.surface:
                raise ValueError("empty token surface")

    @classmethod
    def build(cls, utt_id: str, pairs: Iterable[tuple[str, PosTag | str]]) -> "TaggedSentence":
        toks = tuple(Token(s, PosTag(p), i) for i, (s, p) in enumerate(pairs))
        return cls(utt_id, toks)

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def text(self) -> str:
        return "".join(t.surface for t in self.tokens)

    @property
    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]

    @property
    def tags(self) -> list[PosTag]:
        return [t.pos for t in self.tokens]


def tag(words: list[str], lexicon: Lexicon, utt_id: str = "") -> TaggedSentence:
    return TaggedSentence.build(utt_id, ((w, lexicon.tag_of(w)) for w in words))


def tag_text(text: str, lexicon: Lexicon, utt_id: str = "") -> TaggedSentence:
    return tag(segment(text, lexicon), lexicon, utt_id)


# CTB-style tags; the tool that produced the tagged text is not known, so this
# is only a default and can be replaced with load_tagset().
DEFAULT_TAGSET: dict[str, PosTag] = {
    "NN": PosTag.Noun,
    "NR": PosTag.Noun,
    "PN": PosTag.Pronoun,
    "NT": PosTag.TimeNoun,
    "VV": PosTag.Verb,
    "VA": PosTag.Adjective,
    "JJ": PosTag.Adjective,
    "AD": PosTag.Adverb,
}


def load_tagset(source: Iterable[str]) -> dict[str, PosTag]:
    """Read an external-tag mapping file of ``EXTERNAL<TAB>PosTag`` lines."""
    mapping = {}
    for lineno, raw in enumerate(source, 1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].strip():
            raise MalformedLine(lineno, line)
        mapping[parts[0].strip()] = _parse_tag(parts[1], lineno)
    return mapping


def map_tag(name: str, tagset: Mapping[str, PosTag] | None = None) -> PosTag:
    tagset = DEFAULT_TAGSET if tagset is None else tagset
    if name in tagset:
        return tagset[name]
    # our own tag names pass through so format_tagged output reads back
    try:
        return PosTag(name)
    except ValueError:
        return PosTag.Other


def parse_tagged(line: str, tagset: Mapping[str, PosTag] | None = None) -> TaggedSentence:
    """Parse ``utt_id<TAB>word/TAG word/TAG ...`` into a TaggedSentence."""
    line = line.rstrip("\r\n")
    utt_id, sep, body = line.partition("\t")
    if not sep:
        raise MalformedToken(f"missing tab after utterance id in {line!r}")
    items = body.split()
    if not items:
        raise EmptyTranscript(f"no tokens for {utt_id!r}")
    pairs = []
    for item in items:
        word, slash, ext = item.rpartition("/")
        if not slash or not word or not ext:
            raise MalformedToken(f"{utt_id}: bad token {item!r}")
        pairs.append((word, map_tag(ext, tagset)))
    return TaggedSentence.build(utt_id, pairs)


def format_tagged(sentence: TaggedSentence) -> str:
    body = " ".join(f"{t.surface}/{t.pos.value}" for t in sentence.tokens)
    return f"{sentence.utt_id}\t{body}"
