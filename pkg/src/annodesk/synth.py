"""Synthetic desk-scale corpora: random parallel files, sentences and lexicons.

Generation is deterministic given a seeded ``random.Random``. Surfaces are
drawn from NFC-stable alphabets (Latin, Devanagari, Bengali) so generated
values satisfy every corpus invariant without post-processing.
"""

from __future__ import annotations

import random

from .annotation import ClosedClassLexicon
from .corpus import (
    AnnotatedSentence,
    CorpusFile,
    DomainLabel,
    LanguageCode,
    SentenceId,
    Tagset,
    Token,
)

LATIN = "abcdefghijklmnopqrstuvwxyz"
DEVANAGARI = "कखगघचछजझटठडढतथदधनपफबभमयरलवशषसह"
DEVANAGARI_MATRAS = "ािीुूेैोौ"
BENGALI = "কখগঘচছজঝটঠডঢতথদধনপফবভমযরলশষসহ"

SCRIPTS = {
    "latin": (LATIN, ""),
    "devanagari": (DEVANAGARI, DEVANAGARI_MATRAS),
    "bengali": (BENGALI, ""),
}


def random_surface(rng: random.Random, script: str = "latin", max_len: int = 8) -> str:
    letters, marks = SCRIPTS[script]
    length = rng.randint(1, max_len)
    chars = []
    for _ in range(length):
        chars.append(rng.choice(letters))
        if marks and rng.random() < 0.3:
            chars.append(rng.choice(marks))
    return "".join(chars)


def random_sentence(
    rng: random.Random,
    sid: SentenceId,
    script: str = "latin",
    n_tokens: int | None = None,
    tagset: Tagset | None = None,
    tag_probability: float = 0.0,
) -> AnnotatedSentence:
    if n_tokens is None:
        n_tokens = rng.randint(1, 20)
    tokens = tuple(Token(random_surface(rng, script), i) for i in range(n_tokens))
    tags = tuple(
        rng.choice(tagset.labels) if tagset and rng.random() < tag_probability else None
        for _ in range(n_tokens)
    )
    return AnnotatedSentence(id=sid, tokens=tokens, tags=tags)


def random_file(
    rng: random.Random,
    language: str = "hin",
    domain: str = "health",
    min_sentences: int = 1,
    max_sentences: int = 50,
    script: str | None = None,
    tagset: Tagset | None = None,
    tag_probability: float = 0.5,
) -> CorpusFile:
    n = rng.randint(min_sentences, max_sentences)
    sentences = []
    for serial in range(1, n + 1):
        chosen = script or rng.choice(list(SCRIPTS))
        sentences.append(random_sentence(
            rng,
            SentenceId(DomainLabel(domain), serial),
            script=chosen,
            tagset=tagset,
            tag_probability=tag_probability,
        ))
    return CorpusFile(
        language=LanguageCode(language),
        domain=DomainLabel(domain),
        sentences=tuple(sentences),
    )


def make_parallel_corpus(
    rng: random.Random,
    n_sentences: int,
    languages: list[str],
    domain: str = "health",
    mean_tokens: int = 16,
) -> list[CorpusFile]:
    """Aligned untagged files, one per language, sharing one id range.

    Per-sentence token counts are uniform on ``mean±8``, so the corpus-wide
    mean concentrates tightly around the target.
    """
    scripts = list(SCRIPTS)
    files = []
    lengths = [rng.randint(mean_tokens - 8, mean_tokens + 8) for _ in range(n_sentences)]
    for li, language in enumerate(languages):
        script = scripts[li % len(scripts)]
        sentences = []
        for serial in range(1, n_sentences + 1):
            sid = SentenceId(DomainLabel(domain), serial)
            sentences.append(random_sentence(rng, sid, script=script, n_tokens=lengths[serial - 1]))
        files.append(CorpusFile(
            language=LanguageCode(language),
            domain=DomainLabel(domain),
            sentences=tuple(sentences),
        ))
    return files


def random_lexicon(
    rng: random.Random,
    language: str,
    tagset: Tagset,
    n_entries: int = 20,
    script: str = "latin",
    version: int = 0,
) -> ClosedClassLexicon:
    entries = {}
    for _ in range(n_entries):
        entries[random_surface(rng, script, max_len=4)] = rng.choice(tagset.labels)
    return ClosedClassLexicon(LanguageCode(language), entries, version)
