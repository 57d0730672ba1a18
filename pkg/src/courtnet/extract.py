"""Entity and outcome extraction from segmented judgments.

Covers the three record-level extractions: counsel names (anchored on
honorifics), cited statute articles, and the appeal outcome read off the
operative part of the decision.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Mapping

from .errors import NoDeterminedOutcomes
from .segmenter import SegmentedJudgment, split_sentences
from .textmetrics import fold, fold_aligned

if TYPE_CHECKING:
    from .corpus import Document


@dataclass(frozen=True)
class LawyerName:
    canonical: str
    display: str


@dataclass(frozen=True)
class ArticleRef:
    code: str
    number: str


class Outcome(Enum):
    APPELLANT_WINS = "appellant_wins"
    APPELLEE_WINS = "appellee_wins"
    UNDETERMINED = "undetermined"


# Name captures anchor on an honorific or on the "represented by" formula.
# Matching runs on a length-preserving folded shadow of the sentence so the
# match end is a valid index into the original text.
_ANCHOR_RE = re.compile(r"\bme\b|\bmaitre\b|\brepresentee?\s+par\b")
_HONORIFICS = {"me", "maitre"}

# lowercase particles tolerated inside a name run
_PARTICLES = {"de", "du", "le", "la"}

_MAX_NAME_TOKENS = 4

_LEADING_PUNCT = "(\"'«„“‘"
_TRAILING_PUNCT = ",;:!?)»”\""


def _capture_after(sentence: str, start: int) -> str | None:
    """Read a name run starting at `start`: up to 4 capitalized tokens with
    optional particles between them. Returns the display form or None."""
    tokens: list[str] = []  # collected run, particles included
    caps = 0
    for raw in re.finditer(r"\S+", sentence[start:]):
        token = raw.group().lstrip(_LEADING_PUNCT)
        stop_after = False
        while token and token[-1] in _TRAILING_PUNCT:
            token = token[:-1]
            stop_after = True
        if token.endswith("."):
            core = token[:-1]
            if len(core) == 1 and core.isalpha():
                pass  # an initial keeps its period and the run continues
            else:
                token = core
                stop_after = True
        if not token:
            break
        folded = fold(token)
        if folded in _HONORIFICS:
            break  # next honorific anchors its own capture
        if token[0].isalpha() and token[0].isupper():
            caps += 1
            tokens.append(token)
            if caps == _MAX_NAME_TOKENS or stop_after:
                break
        elif folded in _PARTICLES and caps:
            if stop_after:
                break
            tokens.append(token)
        else:
            break
    while tokens and fold(tokens[-1]) in _PARTICLES:
        tokens.pop()
    return " ".join(tokens) if tokens else None


def _canonical(display: str) -> str:
    words = fold(display).split()
    while words and words[0] in _HONORIFICS:
        words = words[1:]
    return " ".join(words)


def _names_in(text: str) -> list[LawyerName]:
    found: dict[str, LawyerName] = {}
    for sentence in split_sentences(text):
        shadow = fold_aligned(sentence)
        for m in _ANCHOR_RE.finditer(shadow):
            display = _capture_after(sentence, m.end())
            if not display:
                continue
            canonical = _canonical(display)
            if canonical and canonical not in found:
                found[canonical] = LawyerName(canonical=canonical, display=display)
    return list(found.values())


def extract_lawyers(
    seg: SegmentedJudgment, doc: "Document"
) -> tuple[list[LawyerName], list[LawyerName]]:
    """Counsel names per side, order of first appearance, deduplicated by
    canonical form.

    When a side has a counsel segment, only that segment is searched; the
    party segment is the fallback used only when the counsel segment is
    absent altogether.
    """
    sides = []
    for counsel, party in (
        ("appellant_counsel", "appellant"),
        ("appellee_counsel", "appellee"),
    ):
        name = counsel if seg.get(counsel) is not None else party
        sides.append(_names_in(seg.slice(doc.text, name)))
    return sides[0], sides[1]


# "article(s) N [et N]* [du <code>]" over folded text; letter-prefixed numbers
# (L. 145-41) keep their prefix as part of the number.
_NUM = r"(?:[lrd]\.?\s*)?\d+(?:[-.]\d+)*"
_ARTICLE_RE = re.compile(
    rf"\barticles?\s+({_NUM}(?:\s+et\s+{_NUM})*)"
    rf"(?:\s+(?:du|de\s+la|de\s+l')\s+([^\n.,;:()]+))?"
)
_NUM_SPLIT_RE = re.compile(r"\s+et\s+")
_PREFIX_RE = re.compile(r"^([lrd])\.?\s*(\d.*)$")

UNKNOWN_CODE = "unknown"


def _load_default_codes() -> dict[str, str]:
    data = resources.files("courtnet.data").joinpath("article_codes.json")
    return json.loads(data.read_text(encoding="utf-8"))


_DEFAULT_CODES: dict[str, str] | None = None


def default_code_table() -> dict[str, str]:
    global _DEFAULT_CODES
    if _DEFAULT_CODES is None:
        _DEFAULT_CODES = _load_default_codes()
    return _DEFAULT_CODES


def load_code_table(path: str | Path) -> dict[str, str]:
    """Code canonicalization table from JSON: folded spelling -> canonical."""
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _norm_number(raw: str) -> str:
    m = _PREFIX_RE.match(raw.strip())
    if m:
        return f"{m.group(1).upper()}. {m.group(2)}"
    return raw.strip()


def extract_articles(
    text: str, code_table: Mapping[str, str] | None = None
) -> set[ArticleRef]:
    """Cited articles as a set of (code, number) references.

    Citations without a code name get code "unknown". Code names are folded,
    whitespace-collapsed and passed through the canonicalization table;
    unlisted codes are kept as folded.
    """
    table = default_code_table() if code_table is None else code_table
    folded = fold(text)
    refs: set[ArticleRef] = set()
    for m in _ARTICLE_RE.finditer(folded):
        numbers, code_raw = m.group(1), m.group(2)
        if code_raw is None:
            code = UNKNOWN_CODE
        else:
            code = " ".join(code_raw.split())
            code = table.get(code, code)
        for number in _NUM_SPLIT_RE.split(numbers):
            refs.add(ArticleRef(code=code, number=_norm_number(number)))
    return refs


# Token stems deciding the outcome of the appeal. Confirmation of the first
# ruling is a win for the appellee; reversal a win for the appellant.
CONFIRM_STEMS = ("confirme", "rejete", "irrecevable")
REVERSE_STEMS = ("infirme", "rectifi", "reform")

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def classify_outcome(text: str) -> tuple[Outcome, int, int]:
    """Majority vote over outcome keyword stems in the operative part.

    Returns (outcome, confirm_count, reverse_count); ties, including zero
    counts, are Undetermined.
    """
    confirm = 0
    reverse = 0
    for token in _TOKEN_RE.findall(fold(text)):
        if token.startswith(CONFIRM_STEMS):
            confirm += 1
        elif token.startswith(REVERSE_STEMS):
            reverse += 1
    if confirm > reverse:
        return Outcome.APPELLEE_WINS, confirm, reverse
    if reverse > confirm:
        return Outcome.APPELLANT_WINS, confirm, reverse
    return Outcome.UNDETERMINED, confirm, reverse


def rejection_rate(outcomes: Iterable[Outcome]) -> float:
    """Share of determined outcomes that went to the appellee."""
    confirmed = 0
    determined = 0
    for outcome in outcomes:
        if outcome == Outcome.APPELLEE_WINS:
            confirmed += 1
            determined += 1
        elif outcome == Outcome.APPELLANT_WINS:
            determined += 1
    if determined == 0:
        raise NoDeterminedOutcomes("no determined outcomes")
    return confirmed / determined


@dataclass(frozen=True)
class ExtractionRecord:
    """Per-document extraction result, the pipeline's working record."""
    doc_id: str
    appellant_lawyers: tuple[LawyerName, ...]
    appellee_lawyers: tuple[LawyerName, ...]
    articles: frozenset[ArticleRef]
    outcome: Outcome
    confirm_count: int
    reverse_count: int


def extraction_to_dict(rec: ExtractionRecord) -> dict:
    return {
        "doc_id": rec.doc_id,
        "appellant_lawyers": [
            {"canonical": n.canonical, "display": n.display}
            for n in rec.appellant_lawyers
        ],
        "appellee_lawyers": [
            {"canonical": n.canonical, "display": n.display}
            for n in rec.appellee_lawyers
        ],
        "articles": [
            {"code": a.code, "number": a.number}
            for a in sorted(rec.articles, key=lambda a: (a.code, a.number))
        ],
        "outcome": rec.outcome.value,
        "confirm_count": rec.confirm_count,
        "reverse_count": rec.reverse_count,
    }


def extraction_from_dict(data: dict) -> ExtractionRecord:
    return ExtractionRecord(
        doc_id=data["doc_id"],
        appellant_lawyers=tuple(
            LawyerName(n["canonical"], n["display"]) for n in data["appellant_lawyers"]
        ),
        appellee_lawyers=tuple(
            LawyerName(n["canonical"], n["display"]) for n in data["appellee_lawyers"]
        ),
        articles=frozenset(
            ArticleRef(a["code"], a["number"]) for a in data["articles"]
        ),
        outcome=Outcome(data["outcome"]),
        confirm_count=data["confirm_count"],
        reverse_count=data["reverse_count"],
    )


def write_extracted(path: str | Path, records: Iterable[ExtractionRecord]) -> None:
    rows = sorted(records, key=lambda r: r.doc_id)
    with open(path, "w", encoding="utf-8") as fh:
        for rec in rows:
            fh.write(json.dumps(extraction_to_dict(rec), ensure_ascii=False,
                                sort_keys=True, separators=(",", ":")) + "\n")


def read_extracted(path: str | Path) -> list[ExtractionRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(extraction_from_dict(json.loads(line)))
    return records
