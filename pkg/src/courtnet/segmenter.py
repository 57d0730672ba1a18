"""Keyword-driven segmentation of judgment texts and sentence-level flow graphs.

French appellate decisions follow a quasi-standard layout whose section
headings vary in spelling across courts. A KeywordProfile lists, in document
order, the heading variants for each segment; matching is fuzzy (Jaro above
the profile threshold) or by prefix, so INTIMÉE, INTIMEE and "INTIMEE :" all
hit the same marker.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Sequence

from . import graphio
from .errors import MissingConclusion, OutOfOrderMarkers
from .textmetrics import DEFAULT_THRESHOLD, fold, jaro_similarity, same_node

if TYPE_CHECKING:
    from .corpus import Document

CONCLUSION_HEADING = "PAR CES MOTIFS"

# Segment names, in canonical document order. "header" is implicit: it is
# whatever precedes the first matched marker and has no marker of its own.
SEGMENT_NAMES = (
    "header",
    "appellant",
    "appellant_counsel",
    "appellee",
    "appellee_counsel",
    "court_entities",
    "debate",
    "conclusion",
)


@dataclass(frozen=True)
class Marker:
    segment: str
    variants: tuple[str, ...]


@dataclass(frozen=True)
class KeywordProfile:
    jurisdiction: str
    markers: tuple[Marker, ...]
    jaro_threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        names = [m.segment for m in self.markers]
        if len(set(names)) != len(names):
            raise ValueError("duplicate segment names in profile")
        unknown = set(names) - set(SEGMENT_NAMES)
        if unknown or "header" in names:
            raise ValueError(f"invalid segment names: {sorted(unknown | ({'header'} & set(names)))}")
        if not names or names[-1] != "conclusion":
            raise ValueError("profile must end with a conclusion marker")
        for m in self.markers:
            if not m.variants:
                raise ValueError(f"marker {m.segment!r} has no variants")
        conclusion = self.markers[-1]
        if CONCLUSION_HEADING not in conclusion.variants:
            raise ValueError(f"conclusion variants must include {CONCLUSION_HEADING!r}")
        if not 0.0 <= self.jaro_threshold <= 1.0:
            raise ValueError(f"jaro_threshold must be in [0, 1], got {self.jaro_threshold!r}")


def _profile(jurisdiction: str, markers: list[tuple[str, list[str]]], threshold: float = DEFAULT_THRESHOLD) -> KeywordProfile:
    return KeywordProfile(
        jurisdiction=jurisdiction,
        markers=tuple(Marker(seg, tuple(variants)) for seg, variants in markers),
        jaro_threshold=threshold,
    )


# Built-in profiles. Douai-style decisions head the parties with
# APPELANT/INTIMEE and have no separate counsel blocks; Agen-style ones use
# ENTRE/ET with an AYANT POUR AVOCAT block per side. The generic profile
# accepts either convention.
PROFILES: dict[str, KeywordProfile] = {
    "douai": _profile("douai", [
        ("appellant", ["APPELANT", "APPELANTE", "APPELANTS"]),
        ("appellee", ["INTIME", "INTIMEE", "INTIMES"]),
        ("court_entities", ["COMPOSITION DE LA COUR"]),
        ("debate", ["DEBATS"]),
        ("conclusion", [CONCLUSION_HEADING]),
    ]),
    "agen": _profile("agen", [
        ("appellant", ["ENTRE"]),
        ("appellant_counsel", ["AYANT POUR AVOCAT"]),
        ("appellee", ["ET"]),
        ("appellee_counsel", ["AYANT POUR AVOCAT"]),
        ("court_entities", ["COMPOSITION DE LA COUR"]),
        ("debate", ["FAITS ET PROCEDURE", "DEBATS"]),
        ("conclusion", [CONCLUSION_HEADING]),
    ]),
    "generic": _profile("generic", [
        ("appellant", ["APPELANT", "APPELANTE", "ENTRE"]),
        ("appellant_counsel", ["AYANT POUR AVOCAT"]),
        ("appellee", ["INTIME", "INTIMEE", "ET"]),
        ("appellee_counsel", ["AYANT POUR AVOCAT"]),
        ("court_entities", ["COMPOSITION DE LA COUR"]),
        ("debate", ["DEBATS", "FAITS ET PROCEDURE", "MOTIFS DE LA DECISION"]),
        ("conclusion", [CONCLUSION_HEADING]),
    ]),
}


def get_profile(name: str) -> KeywordProfile:
    try:
        return PROFILES[name]
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; built-ins: {sorted(PROFILES)}") from None


def profile_to_dict(profile: KeywordProfile) -> dict:
    return {
        "jurisdiction": profile.jurisdiction,
        "jaro_threshold": profile.jaro_threshold,
        "markers": [
            {"segment": m.segment, "variants": list(m.variants)} for m in profile.markers
        ],
    }


def profile_from_dict(data: dict) -> KeywordProfile:
    return _profile(
        data["jurisdiction"],
        [(m["segment"], m["variants"]) for m in data["markers"]],
        data.get("jaro_threshold", DEFAULT_THRESHOLD),
    )


def load_profile(path: str | Path) -> KeywordProfile:
    """Load a keyword profile from its JSON form."""
    return profile_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class Segment:
    name: str
    start: int
    end: int


@dataclass
class SegmentedJudgment:
    doc_id: str
    segments: list[Segment] = field(default_factory=list)

    def get(self, name: str) -> Segment | None:
        for seg in self.segments:
            if seg.name == name:
                return seg
        return None

    def slice(self, text: str, name: str) -> str:
        """Text of the named segment, empty string when absent."""
        seg = self.get(name)
        return text[seg.start:seg.end] if seg else ""


def _lines_with_offsets(text: str) -> list[tuple[int, int, str]]:
    """(start, end_including_newline, content) for each line."""
    out = []
    pos = 0
    for raw in text.splitlines(keepends=True):
        content = raw.rstrip("\r\n\v\f\x1c\x1d\x1e\x85  ")
        out.append((pos, pos + len(raw), content))
        pos += len(raw)
    return out


def _marker_hits(line: str, marker: Marker, threshold: float) -> bool:
    stripped = line.strip()
    if not stripped:
        return False
    folded = fold(stripped)
    for variant in marker.variants:
        fv = fold(variant)
        if folded.startswith(fv) or same_node(stripped, variant, threshold):
            return True
    return False


def segment(doc: "Document", profile: KeywordProfile) -> SegmentedJudgment:
    """Locate profile markers in order and cut the text into segments.

    Markers are matched line by line, each searched only after the previous
    match. A segment runs from the end of its marker line to the start of the
    next matched marker line; the conclusion keeps its marker line and runs to
    the end of the text; everything before the first marker is the header.
    Unmatched optional markers are simply omitted. A mandatory marker found
    only before the current position raises OutOfOrderMarkers; an absent
    conclusion raises MissingConclusion.
    """
    text = doc.text
    lines = _lines_with_offsets(text)
    threshold = profile.jaro_threshold

    matched: list[tuple[str, int]] = []  # (segment name, line index)
    pos = 0
    for marker in profile.markers:
        hit = None
        for li in range(pos, len(lines)):
            if _marker_hits(lines[li][2], marker, threshold):
                hit = li
                break
        if hit is not None:
            matched.append((marker.segment, hit))
            pos = hit + 1
            continue
        # not found ahead; decide between omission and a hard error
        earlier = any(
            _marker_hits(lines[li][2], marker, threshold) for li in range(0, pos)
        )
        if earlier:
            raise OutOfOrderMarkers(
                f"{doc.doc_id}: {marker.segment} marker appears before an earlier segment"
            )
        if marker.segment == "conclusion":
            raise MissingConclusion(f"{doc.doc_id}: no conclusion marker found")

    segments: list[Segment] = []
    first_start = lines[matched[0][1]][0]
    if first_start > 0:
        segments.append(Segment("header", 0, first_start))
    for idx, (name, li) in enumerate(matched):
        if name == "conclusion":
            segments.append(Segment(name, lines[li][0], len(text)))
        else:
            start = lines[li][1]
            end = lines[matched[idx + 1][1]][0]
            segments.append(Segment(name, start, end))
    return SegmentedJudgment(doc_id=doc.doc_id, segments=segments)


# Tokens that block a sentence split at a following period: honorifics and
# the abbreviation for "article".
_NO_SPLIT_BEFORE_PERIOD = {"me", "mme", "art"}
_TERMINATORS = ".!?;"


def _is_caps_line(line: str) -> bool:
    has_alpha = False
    for ch in line:
        if ch.isalpha():
            has_alpha = True
            if ch.islower():
                return False
    return has_alpha


def _word_before(text: str, index: int) -> str:
    # apostrophes separate words so that elided forms like "l'art" expose
    # the abbreviation itself
    j = index
    while j > 0 and (text[j - 1].isalnum() or text[j - 1] == "-"):
        j -= 1
    return text[j:index]


def split_sentences(text: str) -> list[str]:
    """Cut text into sentences.

    Splits after . ! ? ; when followed by whitespace and an uppercase letter
    or digit, except after single-letter initials and the abbreviations
    me/mme/art. Lines written entirely in capitals end a sentence at their
    line break even without punctuation.
    """
    if not text:
        return []
    breaks = set()
    for i, ch in enumerate(text):
        if ch not in _TERMINATORS:
            continue
        j = i + 1
        while j < len(text) and text[j].isspace():
            j += 1
        if j == i + 1 or j >= len(text):
            continue  # needs at least one whitespace before the next sentence
        nxt = text[j]
        if not (nxt.isupper() or nxt.isdigit()):
            continue
        if ch == ".":
            word = _word_before(text, i)
            if len(word) == 1 and word.isalpha():
                continue
            if fold(word) in _NO_SPLIT_BEFORE_PERIOD:
                continue
        breaks.add(i + 1)
    pos = 0
    for raw in text.splitlines(keepends=True):
        content = raw.rstrip("\r\n\v\f\x1c\x1d\x1e\x85  ")
        if _is_caps_line(content):
            breaks.add(pos + len(content))
        pos += len(raw)
    breaks.add(len(text))

    sentences = []
    start = 0
    for b in sorted(breaks):
        piece = text[start:b].strip()
        if piece:
            sentences.append(piece)
        start = b
    return sentences


LONG_SENTENCE_WORDS = 6  # sentences this long get positional names


@dataclass
class FlowGraph:
    """Sentence-transition graph over a corpus.

    nodes maps node label to its occurrence count; edges maps (source label,
    target label) to the number of consecutive-sentence traversals.
    """
    nodes: dict[str, int]
    edges: dict[tuple[str, str], int]


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            # keep the smaller index as root so labels stay first-seen
            if rx > ry:
                rx, ry = ry, rx
            self.parent[ry] = rx


def _contract(texts: list[str], threshold: float) -> list[int]:
    """Single-linkage grouping of texts by pairwise same_node; returns roots."""
    folded = [fold(t) for t in texts]
    uf = _UnionFind(len(texts))
    for i in range(len(texts)):
        li = len(folded[i])
        for j in range(i + 1, len(texts)):
            if uf.find(i) == uf.find(j):
                continue
            lj = len(folded[j])
            if li == 0 or lj == 0:
                continue
            # upper bound on jaro given only the lengths; skip hopeless pairs
            lm = min(li, lj)
            if (lm / li + lm / lj + 1.0) / 3.0 <= threshold:
                continue
            if jaro_similarity(texts[i], texts[j]) > threshold:
                uf.union(i, j)
    return [uf.find(i) for i in range(len(texts))]


def build_flow_graph(corpus: Sequence["Document"], threshold: float = DEFAULT_THRESHOLD) -> FlowGraph:
    """Build the sentence flow graph of a corpus.

    Sentences of LONG_SENTENCE_WORDS or more words are renamed Long_Text_i_j
    (document index, sentence index) before contraction, so boilerplate keeps
    its text as label while long free text does not. Contraction then merges
    nodes whose underlying sentences satisfy same_node, long and short
    sentences never merging with each other. The first-seen node of each
    group provides the surviving label.
    """
    doc_sentences = [split_sentences(doc.text) for doc in corpus]

    # one entry per distinct sentence text within each length class
    order: dict[tuple[bool, str], int] = {}
    texts: list[str] = []
    labels: list[str] = []
    classes: list[bool] = []

    def node_index(i: int, j: int, sentence: str) -> int:
        is_long = len(sentence.split()) >= LONG_SENTENCE_WORDS
        key = (is_long, sentence)
        if key not in order:
            order[key] = len(texts)
            texts.append(sentence)
            labels.append(f"Long_Text_{i}_{j}" if is_long else sentence)
            classes.append(is_long)
        return order[key]

    occ_index: list[list[int]] = []
    for i, sentences in enumerate(doc_sentences):
        occ_index.append([node_index(i, j, s) for j, s in enumerate(sentences)])

    # contract each class separately over distinct texts
    roots = list(range(len(texts)))
    for is_long in (False, True):
        members = [idx for idx, c in enumerate(classes) if c == is_long]
        group_roots = _contract([texts[idx] for idx in members], threshold)
        for local, idx in enumerate(members):
            roots[idx] = members[group_roots[local]]

    nodes: dict[str, int] = {}
    edges: dict[tuple[str, str], int] = {}
    for doc_occ in occ_index:
        path = [labels[roots[idx]] for idx in doc_occ]
        for label in path:
            nodes[label] = nodes.get(label, 0) + 1
        for a, b in zip(path, path[1:]):
            edges[(a, b)] = edges.get((a, b), 0) + 1
    return FlowGraph(nodes=nodes, edges=edges)


def write_flow_graphml(path: str | Path, graph: FlowGraph) -> None:
    graphio.write_graphml(
        path,
        directed=True,
        node_attrs=[("occurrences", "long")],
        edge_attrs=[("count", "long")],
        nodes=[(label, {"occurrences": n}) for label, n in sorted(graph.nodes.items())],
        edges=[
            (a, b, {"count": c}) for (a, b), c in sorted(graph.edges.items())
        ],
    )


def write_flow_dot(path: str | Path, graph: FlowGraph) -> None:
    graphio.write_dot(
        path,
        directed=True,
        nodes=[
            (label, [("occurrences", n)]) for label, n in sorted(graph.nodes.items())
        ],
        edges=[
            (a, b, [("count", c)]) for (a, b), c in sorted(graph.edges.items())
        ],
    )
