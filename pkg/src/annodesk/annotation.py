"""Tagset-constrained word-level annotation and closed-class auto-tagging.

Auto-tagging is assistive: it fills untagged tokens from a per-language
closed-class lexicon and never overwrites a human-assigned tag. Sentence
edits preserve existing tags along a longest-common-subsequence match of
old and new surfaces.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, replace
from datetime import datetime

from .corpus import AnnotatedSentence, CorpusFile, LanguageCode, SentenceId, Tagset, tokenize
from .errors import (
    EmptyEdit,
    EmptyInput,
    FormatError,
    IndexOutOfRange,
    LanguageMismatch,
    NoChange,
    TagNotInTagset,
    UnknownTag,
)


@dataclass(frozen=True)
class ClosedClassLexicon:
    """Per-language surface→tag table for closed grammatical categories.

    The version increases by one on every successful update, including no-op
    re-adds and deletions; "version changed" is the propagation signal.
    """

    language: LanguageCode
    entries: dict[str, str]
    version: int = 0


@dataclass(frozen=True)
class EditRecord:
    id: SentenceId
    old_text: str
    new_text: str
    editor: str
    at: datetime

    def __post_init__(self):
        if self.old_text == self.new_text:
            raise ValueError("edit record requires old and new text to differ")


@dataclass(frozen=True, slots=True)
class CompletionStatus:
    complete: int
    total: int
    fraction: float


def assign_tag(sentence: AnnotatedSentence, index: int, tag: str, tagset: Tagset) -> AnnotatedSentence:
    """Set the tag at one token position; free-text tags are impossible by construction."""
    if tag not in tagset:
        raise TagNotInTagset(f"tag {tag!r} not in tagset {tagset.name!r}", tag=tag)
    if not 0 <= index < len(sentence.tokens):
        raise IndexOutOfRange(f"token index {index} out of range 0..{len(sentence.tokens) - 1}")
    tags = list(sentence.tags)
    tags[index] = tag
    return replace(sentence, tags=tuple(tags))


def auto_tag(sentence: AnnotatedSentence, lexicon: ClosedClassLexicon) -> tuple[AnnotatedSentence, int]:
    """Fill every untagged token whose surface is a lexicon key; idempotent."""
    tags = list(sentence.tags)
    applied = 0
    for i, token in enumerate(sentence.tokens):
        if tags[i] is None and token.surface in lexicon.entries:
            tags[i] = lexicon.entries[token.surface]
            applied += 1
    if not applied:
        return sentence, 0
    return replace(sentence, tags=tuple(tags)), applied


def auto_tag_file(file: CorpusFile, lexicon: ClosedClassLexicon) -> tuple[CorpusFile, int]:
    if lexicon.language != file.language:
        raise LanguageMismatch(
            f"lexicon language {lexicon.language} does not match file language {file.language}"
        )
    sentences = []
    total = 0
    for sentence in file.sentences:
        tagged, applied = auto_tag(sentence, lexicon)
        sentences.append(tagged)
        total += applied
    if not total:
        return file, 0
    return replace(file, sentences=tuple(sentences)), total


def _clean_surface(surface: str) -> str:
    if not surface or any(c.isspace() for c in surface):
        raise ValueError(f"lexicon surface {surface!r} must be non-empty and whitespace-free")
    return unicodedata.normalize("NFC", surface)


def update_lexicon(
    lexicon: ClosedClassLexicon, surface: str, tag: str, tagset: Tagset
) -> ClosedClassLexicon:
    """Upsert one entry. The version increments even on a no-op re-add."""
    if tag not in tagset:
        raise TagNotInTagset(f"tag {tag!r} not in tagset {tagset.name!r}", tag=tag)
    surface = _clean_surface(surface)
    entries = dict(lexicon.entries)
    entries[surface] = tag
    return ClosedClassLexicon(lexicon.language, entries, lexicon.version + 1)


def remove_lexicon_entry(lexicon: ClosedClassLexicon, surface: str) -> ClosedClassLexicon:
    """The distinguished delete request; removing an absent key still bumps the version."""
    surface = _clean_surface(surface)
    entries = dict(lexicon.entries)
    entries.pop(surface, None)
    return ClosedClassLexicon(lexicon.language, entries, lexicon.version + 1)


def _lcs_matches(old: tuple[str, ...], new: tuple[str, ...]) -> list[tuple[int, int]]:
    # Suffix-LCS table walked from the front so ties break toward the earliest match.
    n, m = len(old), len(new)
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row, next_row = dp[i], dp[i + 1]
        for j in range(m - 1, -1, -1):
            if old[i] == new[j]:
                row[j] = next_row[j + 1] + 1
            else:
                row[j] = next_row[j] if next_row[j] >= row[j + 1] else row[j + 1]
    matches = []
    i = j = 0
    while i < n and j < m:
        if old[i] == new[j] and dp[i][j] == dp[i + 1][j + 1] + 1:
            matches.append((i, j))
            i += 1
            j += 1
        elif dp[i + 1][j] >= dp[i][j + 1]:
            i += 1
        else:
            j += 1
    return matches


def edit_sentence(
    sentence: AnnotatedSentence, new_text: str, editor: str, at: datetime
) -> tuple[AnnotatedSentence, EditRecord]:
    """Replace a sentence's text, carrying tags over to LCS-matched tokens."""
    try:
        new_tokens = tokenize(new_text)
    except EmptyInput:
        raise EmptyEdit("edited text is empty") from None
    new_surfaces = tuple(t.surface for t in new_tokens)
    if new_surfaces == sentence.surfaces:
        raise NoChange("edited text equals the current text", entity=f"sentence:{sentence.id}")
    tags: list[str | None] = [None] * len(new_tokens)
    for i, j in _lcs_matches(sentence.surfaces, new_surfaces):
        tags[j] = sentence.tags[i]
    edited = AnnotatedSentence(id=sentence.id, tokens=tuple(new_tokens), tags=tuple(tags))
    record = EditRecord(
        id=sentence.id,
        old_text=sentence.text,
        new_text=edited.text,
        editor=editor,
        at=at,
    )
    return edited, record


def completion_status(file: CorpusFile) -> CompletionStatus:
    """A sentence counts as complete only when every token carries a tag."""
    total = len(file.sentences)
    complete = sum(1 for s in file.sentences if s.is_complete())
    fraction = complete / total if total else 0.0
    return CompletionStatus(complete, total, fraction)


# --- lexicon file format ------------------------------------------------------

def serialize_lexicon(lexicon: ClosedClassLexicon) -> bytes:
    """Canonical lexicon file: header plus entries sorted by surface byte order."""
    lines = [f"#LANG {lexicon.language}"]
    for surface in sorted(lexicon.entries, key=lambda s: s.encode("utf-8")):
        lines.append(f"{surface}\t{lexicon.entries[surface]}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_lexicon(data: bytes, tagset: Tagset | None = None, version: int = 0) -> ClosedClassLexicon:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(0, f"not valid UTF-8: {exc}") from None
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0].startswith("#LANG ") or not lines[0][6:]:
        raise FormatError(1, "expected '#LANG <code>' header")
    try:
        language = LanguageCode(lines[0][6:])
    except ValueError as exc:
        raise FormatError(1, str(exc)) from None
    entries: dict[str, str] = {}
    for line_no, line in enumerate(lines[1:], start=2):
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise FormatError(line_no, f"expected '<surface>\\t<tag>', got {line!r}")
        surface, tag = parts
        if any(c.isspace() for c in surface) or any(c.isspace() for c in tag):
            raise FormatError(line_no, f"whitespace inside fields: {line!r}")
        if tagset is not None and tag not in tagset:
            raise UnknownTag(tag, line_no)
        entries[unicodedata.normalize("NFC", surface)] = tag
    return ClosedClassLexicon(language, entries, version)
