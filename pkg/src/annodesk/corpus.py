"""Value types for raw and annotated parallel corpora, plus alignment and statistics.

Everything here is an immutable value; operations are pure functions. Mutation
happens only by constructing new values, so these types are safe to share
across any number of readers.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, replace

from .errors import ConflictingText, EmptyInput, MissingLanguage

_LANG_RE = re.compile(r"^[a-z]{2,8}$")
_DOMAIN_RE = re.compile(r"^[a-z][a-z0-9_-]*$")
_SERIAL_MAX = 999_999

# Fixed detachable punctuation, including the Devanagari danda and double danda.
PUNCTUATION = frozenset(".,!?;:\"'()।॥")


class LanguageCode(str):
    """Lowercase ASCII language identifier, e.g. ``hin`` or ``eng``."""

    def __new__(cls, code: str) -> "LanguageCode":
        if not _LANG_RE.match(code):
            raise ValueError(f"invalid language code {code!r} (want [a-z]{{2,8}})")
        return super().__new__(cls, code)


class DomainLabel(str):
    """Lowercase domain identifier, e.g. ``health`` or ``tourism``."""

    def __new__(cls, label: str) -> "DomainLabel":
        if not _DOMAIN_RE.match(label):
            raise ValueError(f"invalid domain label {label!r}")
        return super().__new__(cls, label)


@dataclass(frozen=True, slots=True, order=True)
class SentenceId:
    """Unique sentence identifier, shared by all language versions of one unit.

    Canonical text form is ``<domain>-<serial zero-padded to 6 digits>``,
    which sorts the same lexically and numerically.
    """

    domain: DomainLabel
    serial: int

    def __post_init__(self):
        if not isinstance(self.domain, DomainLabel):
            object.__setattr__(self, "domain", DomainLabel(self.domain))
        if not 1 <= self.serial <= _SERIAL_MAX:
            raise ValueError(f"serial {self.serial} out of range 1..{_SERIAL_MAX}")

    def __str__(self) -> str:
        return f"{self.domain}-{self.serial:06d}"

    @classmethod
    def parse(cls, text: str) -> "SentenceId":
        domain, sep, serial = text.rpartition("-")
        if not sep or not serial.isdigit() or len(serial) != 6:
            raise ValueError(f"invalid sentence id {text!r}")
        return cls(DomainLabel(domain), int(serial))


@dataclass(frozen=True, slots=True)
class Token:
    """One word-level unit: NFC surface form plus its 0-based position."""

    surface: str
    index: int

    def __post_init__(self):
        if not self.surface:
            raise ValueError("token surface must be non-empty")
        if any(c.isspace() for c in self.surface):
            raise ValueError(f"token surface {self.surface!r} contains whitespace")
        if unicodedata.normalize("NFC", self.surface) != self.surface:
            raise ValueError(f"token surface {self.surface!r} is not NFC-normalized")
        if self.index < 0:
            raise ValueError("token index must be >= 0")


@dataclass(frozen=True)
class Tagset:
    """A named, ordered inventory of permitted tag labels. Tagsets are data, not code."""

    name: str
    labels: tuple[str, ...]

    def __post_init__(self):
        if not self.labels:
            raise ValueError("tagset must contain at least one label")
        seen = set()
        for label in self.labels:
            if not label or not label.isascii():
                raise ValueError(f"tag label {label!r} must be non-empty ASCII")
            if any(c.isspace() for c in label):
                raise ValueError(f"tag label {label!r} contains whitespace")
            if label == "_":
                raise ValueError("tag label '_' is reserved as the absent-tag marker")
            if label in seen:
                raise ValueError(f"duplicate tag label {label!r}")
            seen.add(label)
        object.__setattr__(self, "_label_set", seen)

    def __contains__(self, label: str) -> bool:
        return label in self._label_set


@dataclass(frozen=True)
class AnnotatedSentence:
    """One sentence: parallel tuples of tokens and their optional tag labels."""

    id: SentenceId
    tokens: tuple[Token, ...]
    tags: tuple[str | None, ...]

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("sentence must contain at least one token")
        if len(self.tokens) != len(self.tags):
            raise ValueError("tokens and tags must have equal length")
        for pos, token in enumerate(self.tokens):
            if token.index != pos:
                raise ValueError(f"token index {token.index} at position {pos} is not contiguous")

    @property
    def surfaces(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tokens)

    @property
    def text(self) -> str:
        return " ".join(self.surfaces)

    def is_complete(self) -> bool:
        return all(tag is not None for tag in self.tags)


@dataclass(frozen=True)
class CorpusFile:
    """An ordered block of sentences of one language and one domain."""

    language: LanguageCode
    domain: DomainLabel
    sentences: tuple[AnnotatedSentence, ...]

    def __post_init__(self):
        if not isinstance(self.language, LanguageCode):
            object.__setattr__(self, "language", LanguageCode(self.language))
        if not isinstance(self.domain, DomainLabel):
            object.__setattr__(self, "domain", DomainLabel(self.domain))
        last_serial = 0
        for sentence in self.sentences:
            if sentence.id.domain != self.domain:
                raise ValueError(f"sentence {sentence.id} does not match file domain {self.domain}")
            if sentence.id.serial <= last_serial:
                raise ValueError(f"sentence ids must be strictly ascending at {sentence.id}")
            last_serial = sentence.id.serial

    def sentence_index(self) -> dict[str, int]:
        return {str(s.id): i for i, s in enumerate(self.sentences)}


@dataclass(frozen=True)
class ParallelUnit:
    """One sentence id together with every language version that carries it."""

    id: SentenceId
    versions: dict[LanguageCode, AnnotatedSentence]

    def __post_init__(self):
        if not self.versions:
            raise ValueError("parallel unit must contain at least one language")
        for lang, sentence in self.versions.items():
            if sentence.id != self.id:
                raise ValueError(f"sentence id {sentence.id} in {lang} does not match unit id {self.id}")


@dataclass(frozen=True)
class WordAlignment:
    """Partial word-level links between two language versions of one unit."""

    id: SentenceId
    lang_pair: tuple[LanguageCode, LanguageCode]
    links: frozenset[tuple[int, int]]

    def __post_init__(self):
        if self.lang_pair[0] == self.lang_pair[1]:
            raise ValueError("alignment pair languages must be distinct")


@dataclass(frozen=True, slots=True)
class CorpusStats:
    sentence_count: int
    token_count: int
    mean_tokens_per_sentence: float


def tokenize(text: str) -> list[Token]:
    """Split text into word tokens.

    Splits on Unicode whitespace, then detaches each maximal leading or
    trailing run of detachable punctuation as its own token. Surfaces are
    NFC-normalized. A field consisting solely of punctuation stays one token.
    """
    if not text.strip():
        raise EmptyInput("text is empty or all whitespace")
    surfaces: list[str] = []
    for field in text.split():
        lead = 0
        while lead < len(field) and field[lead] in PUNCTUATION:
            lead += 1
        if lead == len(field):
            surfaces.append(field)
            continue
        tail = len(field)
        while tail > lead and field[tail - 1] in PUNCTUATION:
            tail -= 1
        if lead:
            surfaces.append(field[:lead])
        surfaces.append(field[lead:tail])
        if tail < len(field):
            surfaces.append(field[tail:])
    return [
        Token(unicodedata.normalize("NFC", surface), i)
        for i, surface in enumerate(surfaces)
    ]


def untagged_sentence(sid: SentenceId, text: str) -> AnnotatedSentence:
    tokens = tuple(tokenize(text))
    return AnnotatedSentence(id=sid, tokens=tokens, tags=(None,) * len(tokens))


def build_parallel_units(
    files: list[CorpusFile],
) -> tuple[list[ParallelUnit], list[tuple[SentenceId, list[LanguageCode]]]]:
    """Key sentences by id across files; report which languages miss which ids.

    The gap report contains one ``(id, missing languages)`` entry for every id
    that is absent from at least one language seen in the input; it is empty
    iff all files share an identical id set.
    """
    by_id: dict[SentenceId, dict[LanguageCode, AnnotatedSentence]] = {}
    languages: set[LanguageCode] = set()
    for file in files:
        languages.add(file.language)
        for sentence in file.sentences:
            versions = by_id.setdefault(sentence.id, {})
            if file.language in versions:
                raise ConflictingText(
                    f"sentence {sentence.id} appears twice for language {file.language}",
                    entity=f"sentence:{sentence.id}",
                )
            versions[file.language] = sentence
    units = [ParallelUnit(sid, versions) for sid, versions in sorted(by_id.items())]
    gaps = [
        (unit.id, sorted(languages - unit.versions.keys()))
        for unit in units
        if languages - unit.versions.keys()
    ]
    return units, gaps


def corpus_stats(file: CorpusFile) -> CorpusStats:
    sentence_count = len(file.sentences)
    token_count = sum(len(s.tokens) for s in file.sentences)
    mean = token_count / sentence_count if sentence_count else 0.0
    return CorpusStats(sentence_count, token_count, mean)


def validate_word_alignment(align: WordAlignment, unit: ParallelUnit) -> list[str]:
    """Return a description of every out-of-bounds link; empty means valid.

    Partial (even empty) link sets are legal; only bounds are checked.
    """
    if align.id != unit.id:
        raise ValueError(f"alignment id {align.id} does not match unit id {unit.id}")
    src_lang, tgt_lang = align.lang_pair
    for lang in (src_lang, tgt_lang):
        if lang not in unit.versions:
            raise MissingLanguage(f"language {lang} absent from unit {unit.id}", entity=f"unit:{unit.id}")
    src_len = len(unit.versions[src_lang].tokens)
    tgt_len = len(unit.versions[tgt_lang].tokens)
    violations = []
    for i, j in sorted(align.links):
        if not 0 <= i < src_len:
            violations.append(f"source index {i} out of bounds 0..{src_len - 1}")
        if not 0 <= j < tgt_len:
            violations.append(f"target index {j} out of bounds 0..{tgt_len - 1}")
    return violations


def retag(sentence: AnnotatedSentence, index: int, tag: str | None) -> AnnotatedSentence:
    """Replace the tag at one position, leaving every other token untouched."""
    tags = list(sentence.tags)
    tags[index] = tag
    return replace(sentence, tags=tuple(tags))
