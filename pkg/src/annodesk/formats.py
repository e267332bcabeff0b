"""Bit-exact corpus file formats: raw, annotated and word-alignment files.

All formats are UTF-8 with LF line endings. ``parse_*`` and ``serialize_*``
are exact inverses on valid input; untagged tokens serialize with the in-band
absent marker ``_``.
"""

from __future__ import annotations

import unicodedata

from .corpus import (
    AnnotatedSentence,
    CorpusFile,
    DomainLabel,
    LanguageCode,
    SentenceId,
    Tagset,
    Token,
    WordAlignment,
    tokenize,
)
from .errors import DuplicateId, EmptyInput, FormatError, IdDomainMismatch, UnknownTag

ABSENT_TAG = "_"


def _decode(data: bytes) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(0, f"not valid UTF-8: {exc}") from None


def _split_lines(text: str) -> list[str]:
    # Every well-formed file ends with a final LF, leaving one trailing empty
    # element that is not part of the content.
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def _parse_header(lines: list[str], key: str, line_no: int) -> str:
    if len(lines) < line_no:
        raise FormatError(line_no, f"missing {key} header")
    line = lines[line_no - 1]
    prefix = f"#{key} "
    if not line.startswith(prefix) or not line[len(prefix):]:
        raise FormatError(line_no, f"expected '#{key} <value>', got {line!r}")
    return line[len(prefix):]


def _parse_language(lines: list[str]) -> LanguageCode:
    value = _parse_header(lines, "LANG", 1)
    try:
        return LanguageCode(value)
    except ValueError as exc:
        raise FormatError(1, str(exc)) from None


def _parse_domain(lines: list[str]) -> DomainLabel:
    value = _parse_header(lines, "DOMAIN", 2)
    try:
        return DomainLabel(value)
    except ValueError as exc:
        raise FormatError(2, str(exc)) from None


def parse_raw_file(data: bytes) -> CorpusFile:
    """Parse an untagged corpus file: two header lines then ``<id>\\t<text>`` lines."""
    lines = _split_lines(_decode(data))
    language = _parse_language(lines)
    domain = _parse_domain(lines)
    sentences = []
    seen: set[SentenceId] = set()
    last_serial = 0
    for line_no, line in enumerate(lines[2:], start=3):
        parts = line.split("\t")
        if len(parts) != 2:
            raise FormatError(line_no, f"expected '<id>\\t<text>', got {line!r}")
        id_text, text = parts
        try:
            sid = SentenceId.parse(id_text)
        except ValueError as exc:
            raise FormatError(line_no, str(exc)) from None
        if sid.domain != domain:
            raise IdDomainMismatch(
                f"line {line_no}: id {sid} does not match file domain {domain}",
                entity=f"sentence:{sid}",
            )
        if sid in seen:
            raise DuplicateId(f"line {line_no}: duplicate sentence id {sid}", entity=f"sentence:{sid}")
        if sid.serial <= last_serial:
            raise FormatError(line_no, f"sentence id {sid} not in ascending order")
        seen.add(sid)
        last_serial = sid.serial
        try:
            tokens = tuple(tokenize(text))
        except EmptyInput:
            raise FormatError(line_no, "sentence text is empty") from None
        sentences.append(AnnotatedSentence(id=sid, tokens=tokens, tags=(None,) * len(tokens)))
    return CorpusFile(language=language, domain=domain, sentences=tuple(sentences))


def serialize_raw_file(file: CorpusFile) -> bytes:
    lines = [f"#LANG {file.language}", f"#DOMAIN {file.domain}"]
    lines.extend(f"{s.id}\t{s.text}" for s in file.sentences)
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_annotated_file(data: bytes, tagset: Tagset | None = None) -> CorpusFile:
    """Parse an annotated corpus file; validate tags when a tagset is supplied.

    Per sentence: a ``#SID <id>`` line, one ``<surface>\\t<tag-or-_>`` line per
    token and exactly one blank line after the sentence.
    """
    lines = _split_lines(_decode(data))
    language = _parse_language(lines)
    domain = _parse_domain(lines)
    sentences = []
    seen: set[SentenceId] = set()
    last_serial = 0

    line_no = 3
    total = len(lines)
    while line_no <= total:
        line = lines[line_no - 1]
        if not line.startswith("#SID "):
            raise FormatError(line_no, f"expected '#SID <id>', got {line!r}")
        try:
            sid = SentenceId.parse(line[5:])
        except ValueError as exc:
            raise FormatError(line_no, str(exc)) from None
        if sid.domain != domain:
            raise IdDomainMismatch(
                f"line {line_no}: id {sid} does not match file domain {domain}",
                entity=f"sentence:{sid}",
            )
        if sid in seen:
            raise DuplicateId(f"line {line_no}: duplicate sentence id {sid}", entity=f"sentence:{sid}")
        if sid.serial <= last_serial:
            raise FormatError(line_no, f"sentence id {sid} not in ascending order")
        seen.add(sid)
        last_serial = sid.serial
        line_no += 1

        tokens: list[Token] = []
        tags: list[str | None] = []
        while line_no <= total and lines[line_no - 1] != "":
            surface, tag = _parse_token_line(lines[line_no - 1], line_no, tagset)
            tokens.append(Token(surface, len(tokens)))
            tags.append(tag)
            line_no += 1
        if not tokens:
            raise FormatError(line_no, f"sentence {sid} has no tokens")
        if line_no > total:
            raise FormatError(line_no, f"missing blank line after sentence {sid}")
        line_no += 1  # consume the blank separator
        sentences.append(AnnotatedSentence(id=sid, tokens=tuple(tokens), tags=tuple(tags)))

    return CorpusFile(language=language, domain=domain, sentences=tuple(sentences))


def _parse_token_line(line: str, line_no: int, tagset: Tagset | None) -> tuple[str, str | None]:
    parts = line.split("\t")
    if len(parts) != 2:
        raise FormatError(line_no, f"expected '<surface>\\t<tag>', got {line!r}")
    surface, tag_field = parts
    if not surface or any(c.isspace() for c in surface):
        raise FormatError(line_no, f"bad token surface {surface!r}")
    if not tag_field or any(c.isspace() for c in tag_field):
        raise FormatError(line_no, f"bad tag field {tag_field!r}")
    surface = unicodedata.normalize("NFC", surface)
    if tag_field == ABSENT_TAG:
        return surface, None
    if tagset is not None and tag_field not in tagset:
        raise UnknownTag(tag_field, line_no)
    return surface, tag_field


def serialize_annotated_file(file: CorpusFile) -> bytes:
    lines = [f"#LANG {file.language}", f"#DOMAIN {file.domain}"]
    for sentence in file.sentences:
        lines.append(f"#SID {sentence.id}")
        for token, tag in zip(sentence.tokens, sentence.tags):
            lines.append(f"{token.surface}\t{tag if tag is not None else ABSENT_TAG}")
        lines.append("")
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_alignment_file(data: bytes) -> WordAlignment:
    """Parse one word alignment: ``#SID``, ``#PAIR src tgt``, then ``<i>\\t<j>`` lines."""
    lines = _split_lines(_decode(data))
    if not lines or not lines[0].startswith("#SID "):
        raise FormatError(1, "expected '#SID <id>' header")
    try:
        sid = SentenceId.parse(lines[0][5:])
    except ValueError as exc:
        raise FormatError(1, str(exc)) from None
    if len(lines) < 2 or not lines[1].startswith("#PAIR "):
        raise FormatError(2, "expected '#PAIR <src> <tgt>' header")
    pair_fields = lines[1][6:].split(" ")
    if len(pair_fields) != 2:
        raise FormatError(2, f"expected two language codes, got {lines[1]!r}")
    try:
        pair = (LanguageCode(pair_fields[0]), LanguageCode(pair_fields[1]))
    except ValueError as exc:
        raise FormatError(2, str(exc)) from None
    links = set()
    for line_no, line in enumerate(lines[2:], start=3):
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].isdigit() or not parts[1].isdigit():
            raise FormatError(line_no, f"expected '<i>\\t<j>', got {line!r}")
        links.add((int(parts[0]), int(parts[1])))
    return WordAlignment(id=sid, lang_pair=pair, links=frozenset(links))


def serialize_alignment_file(align: WordAlignment) -> bytes:
    lines = [f"#SID {align.id}", f"#PAIR {align.lang_pair[0]} {align.lang_pair[1]}"]
    lines.extend(f"{i}\t{j}" for i, j in sorted(align.links))
    return ("\n".join(lines) + "\n").encode("utf-8")


# --- JSON object form (event log, snapshots, API bodies) ---------------------

def file_to_obj(file: CorpusFile) -> dict:
    return {
        "language": str(file.language),
        "domain": str(file.domain),
        "sentences": [sentence_to_obj(s) for s in file.sentences],
    }


def file_from_obj(obj: dict) -> CorpusFile:
    return CorpusFile(
        language=LanguageCode(obj["language"]),
        domain=DomainLabel(obj["domain"]),
        sentences=tuple(sentence_from_obj(s) for s in obj["sentences"]),
    )


def sentence_to_obj(sentence: AnnotatedSentence) -> dict:
    return {
        "id": str(sentence.id),
        "tokens": list(sentence.surfaces),
        "tags": list(sentence.tags),
    }


def sentence_from_obj(obj: dict) -> AnnotatedSentence:
    return AnnotatedSentence(
        id=SentenceId.parse(obj["id"]),
        tokens=tuple(Token(s, i) for i, s in enumerate(obj["tokens"])),
        tags=tuple(obj["tags"]),
    )
