"""Diff and merge annotation versions; compute inter-annotator agreement.

Merging is conservative: a gold tag requires a strict majority of annotator
votes (tag-or-absent values), and every contested position goes to a human
adjudication queue. Agreement scores only positions tagged by both
annotators, so partially annotated files are not penalized.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .corpus import AnnotatedSentence, CorpusFile
from .errors import NoJointPositions, TextMismatch


@dataclass(frozen=True)
class AnnotationVersion:
    file_id: str
    annotator: str
    file: CorpusFile


@dataclass(frozen=True)
class Disagreement:
    id: str
    index: int
    per_annotator: dict[str, str | None]


@dataclass(frozen=True, slots=True)
class AgreementResult:
    p_o: float
    joint_positions: int
    matches: int


@dataclass(frozen=True, slots=True)
class KappaResult:
    kappa: float
    p_o: float
    p_e: float
    joint_positions: int


def _check_comparable(a: AnnotationVersion, b: AnnotationVersion) -> None:
    if a.file_id != b.file_id:
        raise ValueError(f"versions compare different files: {a.file_id} vs {b.file_id}")
    ids_a = [str(s.id) for s in a.file.sentences]
    ids_b = [str(s.id) for s in b.file.sentences]
    if ids_a != ids_b:
        missing = set(ids_a).symmetric_difference(ids_b)
        first = sorted(missing)[0] if missing else ids_a[0]
        raise TextMismatch(f"sentence id sets differ at {first}", entity=f"sentence:{first}")
    for sa, sb in zip(a.file.sentences, b.file.sentences):
        if sa.surfaces != sb.surfaces:
            raise TextMismatch(
                f"token surfaces differ in sentence {sa.id}", entity=f"sentence:{sa.id}"
            )


def _positions(a: AnnotationVersion, b: AnnotationVersion):
    for sa, sb in zip(a.file.sentences, b.file.sentences):
        for index in range(len(sa.tokens)):
            yield sa, index, sa.tags[index], sb.tags[index]


def diff_annotations(a: AnnotationVersion, b: AnnotationVersion) -> list[Disagreement]:
    """One entry per token position where the two tags differ (absent is a value)."""
    _check_comparable(a, b)
    out = []
    for sentence, index, tag_a, tag_b in _positions(a, b):
        if tag_a != tag_b:
            out.append(Disagreement(
                id=str(sentence.id),
                index=index,
                per_annotator={a.annotator: tag_a, b.annotator: tag_b},
            ))
    return out


def merge_gold(
    versions: list[AnnotationVersion], policy: str = "majority"
) -> tuple[CorpusFile, list[Disagreement]]:
    """Merge n versions into a gold file; contested positions join the queue.

    A tag wins a position only with a strict majority of all votes, counting
    absent as a vote value. Positions with at least two distinct values and no
    winning tag are queued for adjudication; unanimous positions never are.
    """
    if policy != "majority":
        raise ValueError(f"unknown merge policy {policy!r}")
    if len(versions) < 2:
        raise ValueError("merging requires at least two versions")
    first = versions[0]
    for other in versions[1:]:
        _check_comparable(first, other)

    n = len(versions)
    gold_sentences = []
    queue: list[Disagreement] = []
    for si, sentence in enumerate(first.file.sentences):
        tags: list[str | None] = []
        for index in range(len(sentence.tokens)):
            votes = [v.file.sentences[si].tags[index] for v in versions]
            counts = Counter(votes)
            winner = None
            for tag, count in counts.items():
                if tag is not None and count * 2 > n:
                    winner = tag
                    break
            tags.append(winner)
            if winner is None and len(counts) > 1:
                queue.append(Disagreement(
                    id=str(sentence.id),
                    index=index,
                    per_annotator={v.annotator: votes[vi] for vi, v in enumerate(versions)},
                ))
        gold_sentences.append(AnnotatedSentence(
            id=sentence.id, tokens=sentence.tokens, tags=tuple(tags),
        ))
    gold = CorpusFile(
        language=first.file.language,
        domain=first.file.domain,
        sentences=tuple(gold_sentences),
    )
    return gold, queue


def observed_agreement(a: AnnotationVersion, b: AnnotationVersion) -> AgreementResult:
    """Fraction of jointly tagged positions with equal tags; vacuously 1.0 on none."""
    _check_comparable(a, b)
    joint = 0
    matches = 0
    for _, _, tag_a, tag_b in _positions(a, b):
        if tag_a is not None and tag_b is not None:
            joint += 1
            if tag_a == tag_b:
                matches += 1
    p_o = matches / joint if joint else 1.0
    return AgreementResult(p_o=p_o, joint_positions=joint, matches=matches)


def cohen_kappa(a: AnnotationVersion, b: AnnotationVersion) -> KappaResult:
    """Chance-corrected agreement over jointly tagged positions.

    kappa = (p_o - p_e) / (1 - p_e) with marginals taken from the jointly
    tagged positions only; the degenerate single-tag table (p_e = 1, which
    forces p_o = 1) is defined as kappa = 1.0.
    """
    _check_comparable(a, b)
    marg_a: Counter = Counter()
    marg_b: Counter = Counter()
    joint = 0
    matches = 0
    for _, _, tag_a, tag_b in _positions(a, b):
        if tag_a is not None and tag_b is not None:
            joint += 1
            marg_a[tag_a] += 1
            marg_b[tag_b] += 1
            if tag_a == tag_b:
                matches += 1
    if not joint:
        raise NoJointPositions("no positions tagged by both annotators")
    p_o = matches / joint
    p_e = sum((marg_a[t] / joint) * (marg_b[t] / joint) for t in marg_a.keys() | marg_b.keys())
    if p_e >= 1.0:
        kappa = 1.0
    else:
        kappa = (p_o - p_e) / (1.0 - p_e)
    return KappaResult(kappa=kappa, p_o=p_o, p_e=p_e, joint_positions=joint)


REPORT_HEADER = "file_id\tannotator_a\tannotator_b\tjoint\tp_o\tp_e\tkappa"


def format_agreement_report(rows: list[tuple[str, str, str, KappaResult]]) -> str:
    """Tab-separated agreement table, floats to 4 decimal places."""
    lines = [REPORT_HEADER]
    for file_id, annotator_a, annotator_b, result in rows:
        lines.append(
            f"{file_id}\t{annotator_a}\t{annotator_b}\t{result.joint_positions}"
            f"\t{result.p_o:.4f}\t{result.p_e:.4f}\t{result.kappa:.4f}"
        )
    return "\n".join(lines) + "\n"
