"""Rough gloss translation via a bilingual dictionary.

The gloss is word-for-word in source order: each token is replaced by its
first dictionary candidate; out-of-vocabulary tokens pass through unchanged
and are flagged so a UI can highlight them. Nothing smarter is attempted.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass

from .corpus import AnnotatedSentence, CorpusFile, LanguageCode
from .errors import FormatError, LanguageMismatch


@dataclass(frozen=True)
class BilingualDictionary:
    pair: tuple[LanguageCode, LanguageCode]
    entries: dict[str, tuple[str, ...]]

    def __post_init__(self):
        if self.pair[0] == self.pair[1]:
            raise ValueError("dictionary pair languages must be distinct")
        for source, candidates in self.entries.items():
            if not candidates:
                raise ValueError(f"entry {source!r} has no candidates")


@dataclass(frozen=True, slots=True)
class GlossToken:
    source: str
    output: str
    translated: bool


def load_dictionary(data: bytes) -> BilingualDictionary:
    """Parse ``#PAIR <src> <tgt>`` then ``<source>\\t<cand1>|<cand2>|...`` lines.

    Duplicate source keys merge, preserving first-seen candidate order and
    dropping repeated candidates.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(0, f"not valid UTF-8: {exc}") from None
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0].startswith("#PAIR "):
        raise FormatError(1, "expected '#PAIR <src> <tgt>' header")
    pair_fields = lines[0][6:].split(" ")
    if len(pair_fields) != 2:
        raise FormatError(1, f"expected two language codes, got {lines[0]!r}")
    try:
        pair = (LanguageCode(pair_fields[0]), LanguageCode(pair_fields[1]))
    except ValueError as exc:
        raise FormatError(1, str(exc)) from None
    entries: dict[str, list[str]] = {}
    for line_no, line in enumerate(lines[1:], start=2):
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise FormatError(line_no, f"expected '<source>\\t<candidates>', got {line!r}")
        source, cand_field = parts
        if any(c.isspace() for c in source):
            raise FormatError(line_no, f"source {source!r} contains whitespace")
        candidates = cand_field.split("|")
        if any(not c for c in candidates):
            raise FormatError(line_no, f"empty candidate in {cand_field!r}")
        bucket = entries.setdefault(unicodedata.normalize("NFC", source), [])
        for candidate in candidates:
            if candidate not in bucket:
                bucket.append(candidate)
    return BilingualDictionary(pair, {k: tuple(v) for k, v in entries.items()})


def serialize_dictionary(dictionary: BilingualDictionary) -> bytes:
    lines = [f"#PAIR {dictionary.pair[0]} {dictionary.pair[1]}"]
    for source in sorted(dictionary.entries, key=lambda s: s.encode("utf-8")):
        lines.append(f"{source}\t{'|'.join(dictionary.entries[source])}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def rough_translate(sentence: AnnotatedSentence, dictionary: BilingualDictionary) -> list[GlossToken]:
    """Gloss one sentence: first candidate per token, OOV passthrough, order kept."""
    gloss = []
    for token in sentence.tokens:
        candidates = dictionary.entries.get(token.surface)
        if candidates:
            gloss.append(GlossToken(token.surface, candidates[0], True))
        else:
            gloss.append(GlossToken(token.surface, token.surface, False))
    return gloss


def translate_file(file: CorpusFile, dictionary: BilingualDictionary) -> list[tuple[str, list[GlossToken]]]:
    """Gloss every sentence of a file; the file language must be the dictionary source."""
    if file.language != dictionary.pair[0]:
        raise LanguageMismatch(
            f"file language {file.language} does not match dictionary source {dictionary.pair[0]}"
        )
    return [(str(s.id), rough_translate(s, dictionary)) for s in file.sentences]
