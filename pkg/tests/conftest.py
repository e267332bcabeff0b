"""Shared fixtures and hypothesis strategies for the test suite."""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import strategies as st

from annodesk.admin import ANNOTATOR, MASTER_ADMIN, Project, ProjectConfig, Role
from annodesk.corpus import (
    AnnotatedSentence,
    CorpusFile,
    DomainLabel,
    LanguageCode,
    SentenceId,
    Tagset,
    Token,
)

TAGS = ("N", "V", "PRP", "PSP", "CC", "QT")

# NFC-stable alphabets: round-trip and lookup tests rely on surfaces that
# normalization leaves untouched.
LATIN = "abcdefghijklmnopqrstuvwxyz"
DEVANAGARI = "कखगघचजटडतदनपबमयरलवशषसह"
BENGALI = "কখগঘচজটডতদনপবমযরলশষসহ"
WORD_ALPHABET = LATIN + DEVANAGARI + BENGALI


@pytest.fixture
def tagset() -> Tagset:
    return Tagset("test", TAGS)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20260810)


class TickingClock:
    """Deterministic strictly-increasing UTC clock for event timestamps."""

    def __init__(self, start: datetime | None = None):
        self.now = start or datetime(2026, 1, 1, tzinfo=timezone.utc)

    def __call__(self) -> datetime:
        self.now += timedelta(seconds=1)
        return self.now


@pytest.fixture
def clock() -> TickingClock:
    return TickingClock()


def make_project(
    languages=("hin", "eng"),
    max_active=3,
    open_registration=False,
    clock=None,
) -> Project:
    config = ProjectConfig(
        languages=tuple(LanguageCode(lang) for lang in languages),
        tagset=Tagset("test", TAGS),
        max_active_assignments=max_active,
        open_registration=open_registration,
    )
    return Project(config, clock or TickingClock())


def seed_master(project: Project, user_id="root", credential="secret") -> str:
    from annodesk.store import _bootstrap_master_admin

    _bootstrap_master_admin(project, user_id, credential)
    return user_id


def add_user(project, actor, user_id, kind=ANNOTATOR, language="hin", credential="pw"):
    role = Role(kind, LanguageCode(language) if kind != MASTER_ADMIN else None)
    project.create_user(actor, user_id, user_id.title(), role, credential)
    return user_id


def raw_file_bytes(language="hin", domain="health", texts=("यह घर है", "वह गया")) -> bytes:
    lines = [f"#LANG {language}", f"#DOMAIN {domain}"]
    for i, text in enumerate(texts, start=1):
        lines.append(f"{domain}-{i:06d}\t{text}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def sentence(serial: int, surfaces: list[str], tags: list | None = None, domain="health"):
    toks = tuple(Token(s, i) for i, s in enumerate(surfaces))
    tag_tuple = tuple(tags) if tags is not None else (None,) * len(surfaces)
    return AnnotatedSentence(id=SentenceId(DomainLabel(domain), serial), tokens=toks, tags=tag_tuple)


def corpus_file(sentences, language="hin", domain="health"):
    return CorpusFile(
        language=LanguageCode(language), domain=DomainLabel(domain), sentences=tuple(sentences)
    )


# --- hypothesis strategies ------------------------------------------------------

def surfaces_st():
    return st.text(alphabet=WORD_ALPHABET, min_size=1, max_size=8)


def sentence_st(serial: int, tagged: bool = True):
    def build(surfaces, tag_flags):
        tags = tuple(
            tag if tagged and flag else None
            for flag, tag in zip(tag_flags, (TAGS[i % len(TAGS)] for i in range(len(surfaces))))
        )
        tokens = tuple(Token(s, i) for i, s in enumerate(surfaces))
        return AnnotatedSentence(
            id=SentenceId(DomainLabel("health"), serial), tokens=tokens, tags=tags[: len(tokens)]
        )

    return st.lists(surfaces_st(), min_size=1, max_size=12).flatmap(
        lambda surfaces: st.lists(
            st.booleans(), min_size=len(surfaces), max_size=len(surfaces)
        ).map(lambda flags: build(surfaces, flags))
    )


def file_st(max_sentences: int = 8, language: str = "hin", tagged: bool = True):
    def build(sentence_list):
        return CorpusFile(
            language=LanguageCode(language),
            domain=DomainLabel("health"),
            sentences=tuple(sentence_list),
        )

    return st.integers(min_value=1, max_value=max_sentences).flatmap(
        lambda n: st.tuples(*[sentence_st(serial, tagged) for serial in range(1, n + 1)]).map(
            lambda sents: build(list(sents))
        )
    )


def lexicon_st(language: str = "hin"):
    from annodesk.annotation import ClosedClassLexicon

    return st.dictionaries(
        keys=surfaces_st(), values=st.sampled_from(TAGS), min_size=0, max_size=10
    ).map(lambda entries: ClosedClassLexicon(LanguageCode(language), entries, 0))
