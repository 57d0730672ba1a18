"""Lawyer and case networks derived from extraction results.

Three structures: a directed opposing network whose edges point from the
less to the more successful of two opposing lawyers, an undirected
collaboration network over same-side pairs, and an undirected case graph
linking decisions that cite enough common articles. Community detection runs
on the unweighted skeleton of whichever graph it is given.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import AbstractSet, Iterable, Mapping, Sequence

from . import graphio
from .extract import ArticleRef, Outcome

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CaseResult:
    """One decided appeal reduced to who stood where and who won."""
    doc_id: str
    appellant_lawyers: tuple[str, ...]
    appellee_lawyers: tuple[str, ...]
    outcome: Outcome


@dataclass(frozen=True)
class NetworkParams:
    a: float = 2.0         # value of a win obtained for the appellant
    b: float = 1.0         # value of a win obtained for the appellee
    min_cases: int = 2     # node survival threshold in the opposing network
    collab_min: int = 2    # minimum shared cases for a collaboration edge

    def __post_init__(self):
        if not self.a > 0 or not self.b > 0:
            raise ValueError(f"win weights must be positive, got a={self.a}, b={self.b}")
        if self.min_cases < 0 or self.collab_min < 0:
            raise ValueError("thresholds must be non-negative")


def _check_results(results: Sequence[CaseResult]) -> None:
    for r in results:
        if r.outcome is Outcome.UNDETERMINED:
            raise ValueError(f"{r.doc_id}: undetermined outcome in network input")
        if not (r.appellant_lawyers or r.appellee_lawyers):
            raise ValueError(f"{r.doc_id}: case result carries no lawyers")


def lawyer_tallies(results: Iterable[CaseResult]) -> dict[str, tuple[int, int, int]]:
    """Per lawyer: (total cases, wins, losses).

    Total counts every case the lawyer appears in, undetermined ones
    included; wins and losses come from determined cases only. A lawyer
    listed on both sides of one case gets neither a win nor a loss from it.
    """
    stats: dict[str, list[int]] = {}
    for r in results:
        app = set(r.appellant_lawyers)
        ape = set(r.appellee_lawyers)
        for lawyer in app | ape:
            t = stats.setdefault(lawyer, [0, 0, 0])
            t[0] += 1
            if r.outcome is Outcome.UNDETERMINED or (lawyer in app and lawyer in ape):
                continue
            won = (lawyer in app) == (r.outcome is Outcome.APPELLANT_WINS)
            t[1 if won else 2] += 1
    return {lawyer: tuple(t) for lawyer, t in stats.items()}


def pair_wins(
    results: Sequence[CaseResult], params: NetworkParams | None = None
) -> dict[tuple[str, str], float]:
    """Directed win mass between opposing lawyers.

    wins[(i, j)] accumulates params.a for every case i won over j from the
    appellant side and params.b for every case won from the appellee side.
    """
    params = params or NetworkParams()
    _check_results(results)
    wins: dict[tuple[str, str], float] = {}
    for r in results:
        for i in dict.fromkeys(r.appellant_lawyers):
            for j in dict.fromkeys(r.appellee_lawyers):
                if i == j:
                    logger.warning(
                        "%s: %s appears on both sides, pair skipped", r.doc_id, i
                    )
                    continue
                if r.outcome is Outcome.APPELLANT_WINS:
                    wins[(i, j)] = wins.get((i, j), 0.0) + params.a
                else:
                    wins[(j, i)] = wins.get((j, i), 0.0) + params.b
    return wins


@dataclass(frozen=True)
class OpposingEdge:
    source: str     # the lawyer with fewer wins in the pair
    target: str     # the lawyer with more wins
    weight: float
    wins_fw: float  # target's win mass over source
    wins_bw: float  # source's win mass over target


@dataclass(frozen=True)
class LawyerStats:
    total_cases: int
    wins: int
    losses: int


@dataclass
class OpposingNetwork:
    nodes: dict[str, LawyerStats]
    edges: list[OpposingEdge]


def collapse(wins: Mapping[tuple[str, str], float]) -> list[OpposingEdge]:
    """Fold the two directions of each pair into one weighted edge.

    Weight is |delta| * ln(total + 1) where delta is the difference of the
    two win masses and total their sum; the edge points at the pair's
    winner. Balanced pairs produce no edge.
    """
    edges: list[OpposingEdge] = []
    unordered = sorted({(min(i, j), max(i, j)) for i, j in wins})
    for x, y in unordered:
        wxy = wins.get((x, y), 0.0)
        wyx = wins.get((y, x), 0.0)
        if wxy == wyx:
            continue
        weight = abs(wxy - wyx) * math.log(wxy + wyx + 1.0)
        if wxy > wyx:
            edges.append(OpposingEdge(y, x, weight, wxy, wyx))
        else:
            edges.append(OpposingEdge(x, y, weight, wyx, wxy))
    return edges


def build_opposing_network(
    results: Sequence[CaseResult], params: NetworkParams | None = None
) -> OpposingNetwork:
    """Collapsed opposing network with low-volume lawyers pruned.

    Lawyers with fewer than params.min_cases cases are removed after edge
    weighting, together with their incident edges; isolated survivors stay.
    """
    params = params or NetworkParams()
    wins = pair_wins(results, params)
    edges = collapse(wins)
    tallies = lawyer_tallies(results)
    keep = {l for l, (total, _, _) in tallies.items() if total >= params.min_cases}
    nodes = {l: LawyerStats(*tallies[l]) for l in sorted(keep)}
    edges = [e for e in edges if e.source in keep and e.target in keep]
    return OpposingNetwork(nodes=nodes, edges=edges)


@dataclass(frozen=True)
class CollabEdge:
    u: str
    v: str
    weight: int          # wins minus losses over shared cases
    wins: int
    losses: int
    collaborations: int


@dataclass
class CollaborationGraph:
    nodes: list[str]
    edges: list[CollabEdge]

    def node_ids(self) -> list[str]:
        return list(self.nodes)

    def undirected_edges(self) -> list[tuple[str, str]]:
        return [(e.u, e.v) for e in self.edges]


def build_collaboration_network(
    results: Sequence[CaseResult], params: NetworkParams | None = None
) -> CollaborationGraph:
    """Same-side pairs weighted by shared wins minus shared losses.

    Pairs below params.collab_min shared cases are dropped; only lawyers
    incident to a surviving edge appear as nodes.
    """
    params = params or NetworkParams()
    _check_results(results)
    stats: dict[tuple[str, str], list[int]] = {}
    for r in results:
        for side, won_outcome in (
            (r.appellant_lawyers, Outcome.APPELLANT_WINS),
            (r.appellee_lawyers, Outcome.APPELLEE_WINS),
        ):
            won = r.outcome is won_outcome
            for u, v in combinations(sorted(set(side)), 2):
                s = stats.setdefault((u, v), [0, 0])
                s[0 if won else 1] += 1
    edges: list[CollabEdge] = []
    for u, v in sorted(stats):
        wins_, losses = stats[(u, v)]
        if wins_ + losses < params.collab_min:
            continue
        edges.append(CollabEdge(u, v, wins_ - losses, wins_, losses, wins_ + losses))
    nodes = sorted({e.u for e in edges} | {e.v for e in edges})
    return CollaborationGraph(nodes=nodes, edges=edges)


@dataclass(frozen=True)
class CaseEdge:
    u: str
    v: str
    shared_articles: int


@dataclass
class CaseGraph:
    nodes: dict[str, Outcome]
    edges: list[CaseEdge]
    k: int

    def node_ids(self) -> list[str]:
        return list(self.nodes)

    def undirected_edges(self) -> list[tuple[str, str]]:
        return [(e.u, e.v) for e in self.edges]


def build_case_graph(
    articles: Mapping[str, AbstractSet[ArticleRef]],
    outcomes: Mapping[str, Outcome],
    k: int = 3,
) -> CaseGraph:
    """Link cases sharing at least k cited articles.

    Nodes cover every case in `articles`, isolated ones included. Built via
    an inverted article index, so only co-citing pairs are ever touched.
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    doc_ids = sorted(articles)
    index: dict[ArticleRef, list[str]] = {}
    for doc_id in doc_ids:
        for ref in articles[doc_id]:
            index.setdefault(ref, []).append(doc_id)
    shared: dict[tuple[str, str], int] = {}
    for docs in index.values():
        for u, v in combinations(docs, 2):
            shared[(u, v)] = shared.get((u, v), 0) + 1
    edges = [
        CaseEdge(u, v, count)
        for (u, v), count in sorted(shared.items())
        if count >= k
    ]
    nodes = {d: outcomes.get(d, Outcome.UNDETERMINED) for d in doc_ids}
    return CaseGraph(nodes=nodes, edges=edges, k=k)


# ---------------------------------------------------------------------------
# Community detection: Louvain with fixed tie-breaking so results are
# reproducible. Operates on the unweighted skeleton of the input graph.

_GAIN_EPS = 1e-9


def _louvain_level(adj: list[dict[int, float]]) -> tuple[list[int], bool]:
    """One local-move phase. Self-loop weights are stored pre-doubled, so a
    node's degree is simply its row sum."""
    n = len(adj)
    k = [sum(nbrs.values()) for nbrs in adj]
    two_m = sum(k)
    comm = list(range(n))
    if two_m == 0:
        return comm, False
    sum_tot = k[:]
    moved_any = False
    improved = True
    while improved:
        improved = False
        for v in range(n):
            cv = comm[v]
            kv = k[v]
            weight_to: dict[int, float] = {}
            for u, w in adj[v].items():
                if u != v:
                    cu = comm[u]
                    weight_to[cu] = weight_to.get(cu, 0.0) + w
            base = (
                2.0 * weight_to.get(cv, 0.0) / two_m
                - 2.0 * (sum_tot[cv] - kv) * kv / (two_m * two_m)
            )
            best_gain = _GAIN_EPS
            best_c = cv
            for c in sorted(weight_to):
                if c == cv:
                    continue
                gain = (
                    2.0 * weight_to[c] / two_m
                    - 2.0 * sum_tot[c] * kv / (two_m * two_m)
                    - base
                )
                if gain > best_gain:
                    best_gain = gain
                    best_c = c
            if best_c != cv:
                sum_tot[cv] -= kv
                sum_tot[best_c] += kv
                comm[v] = best_c
                improved = True
                moved_any = True
    return comm, moved_any


def _dense_renumber(values: list[int]) -> list[int]:
    mapping: dict[int, int] = {}
    out = []
    for v in values:
        if v not in mapping:
            mapping[v] = len(mapping)
        out.append(mapping[v])
    return out


def _aggregate(adj: list[dict[int, float]], labels: list[int]) -> list[dict[int, float]]:
    size = max(labels) + 1
    new: list[dict[int, float]] = [{} for _ in range(size)]
    for i, nbrs in enumerate(adj):
        ci = labels[i]
        row = new[ci]
        for j, w in nbrs.items():
            cj = labels[j]
            row[cj] = row.get(cj, 0.0) + w
    return new


def _louvain(adj: list[dict[int, float]]) -> list[int]:
    node_comm = list(range(len(adj)))
    level_adj = adj
    while True:
        comm, moved = _louvain_level(level_adj)
        labels = _dense_renumber(comm)
        node_comm = [labels[c] for c in node_comm]
        if not moved:
            return node_comm
        level_adj = _aggregate(level_adj, labels)


@dataclass
class CommunityPartition:
    assignment: dict[str, int]

    @property
    def sizes(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for cid in self.assignment.values():
            out[cid] = out.get(cid, 0) + 1
        return out

    def communities(self) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {}
        for node in sorted(self.assignment):
            out.setdefault(self.assignment[node], []).append(node)
        return out


def detect_communities(graph) -> CommunityPartition:
    """Louvain communities of the graph's unweighted skeleton.

    Deterministic: nodes are swept in ascending id order, ties go to the
    smallest community id, moves need a modularity gain above 1e-9, and the
    final ids are numbered by each community's smallest member.
    """
    node_ids = sorted(graph.node_ids())
    index = {nid: i for i, nid in enumerate(node_ids)}
    adj: list[dict[int, float]] = [{} for _ in node_ids]
    for u, v in graph.undirected_edges():
        i, j = index[u], index[v]
        if i == j or j in adj[i]:
            continue
        adj[i][j] = 1.0
        adj[j][i] = 1.0
    labels = _dense_renumber(_louvain(adj))
    return CommunityPartition({nid: labels[i] for i, nid in enumerate(node_ids)})


def community_win_rate(
    partition: CommunityPartition, outcomes: Mapping[str, Outcome]
) -> dict[int, float]:
    """Appellant win rate per community over its determined members.

    Communities without any determined member are absent from the result.
    """
    won: dict[int, int] = {}
    determined: dict[int, int] = {}
    for node, cid in partition.assignment.items():
        outcome = outcomes.get(node, Outcome.UNDETERMINED)
        if outcome is Outcome.UNDETERMINED:
            continue
        determined[cid] = determined.get(cid, 0) + 1
        if outcome is Outcome.APPELLANT_WINS:
            won[cid] = won.get(cid, 0) + 1
    return {cid: won.get(cid, 0) / total for cid, total in determined.items()}


def write_communities_csv(
    path: str | Path,
    partition: CommunityPartition,
    outcomes: Mapping[str, Outcome],
) -> None:
    rates = community_win_rate(partition, outcomes)
    sizes = partition.sizes
    lines = ["community_id,size,appellant_win_rate"]
    for cid in sorted(sizes):
        rate = repr(rates[cid]) if cid in rates else ""
        lines.append(f"{cid},{sizes[cid]},{rate}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# GraphML / DOT export and re-import for the pipeline artifacts

def write_opposing_graphml(path: str | Path, net: OpposingNetwork) -> None:
    graphio.write_graphml(
        path,
        directed=True,
        node_attrs=[("total_cases", "long"), ("wins", "long"), ("losses", "long")],
        edge_attrs=[("weight", "double"), ("wins_fw", "double"), ("wins_bw", "double")],
        nodes=[
            (l, {"total_cases": s.total_cases, "wins": s.wins, "losses": s.losses})
            for l, s in sorted(net.nodes.items())
        ],
        edges=[
            (e.source, e.target,
             {"weight": e.weight, "wins_fw": e.wins_fw, "wins_bw": e.wins_bw})
            for e in sorted(net.edges, key=lambda e: (e.source, e.target))
        ],
    )


def read_opposing_graphml(path: str | Path) -> OpposingNetwork:
    directed, nodes, edges = graphio.read_graphml(path)
    if not directed:
        raise ValueError(f"{path}: opposing network must be directed")
    return OpposingNetwork(
        nodes={
            nid: LawyerStats(a["total_cases"], a["wins"], a["losses"])
            for nid, a in nodes
        },
        edges=[
            OpposingEdge(src, tgt, a["weight"], a["wins_fw"], a["wins_bw"])
            for src, tgt, a in edges
        ],
    )


def write_opposing_dot(path: str | Path, net: OpposingNetwork) -> None:
    graphio.write_dot(
        path,
        directed=True,
        nodes=[
            (l, [("total_cases", s.total_cases), ("wins", s.wins), ("losses", s.losses)])
            for l, s in sorted(net.nodes.items())
        ],
        edges=[
            (e.source, e.target, [("weight", e.weight)])
            for e in sorted(net.edges, key=lambda e: (e.source, e.target))
        ],
    )


def write_collaboration_graphml(path: str | Path, graph: CollaborationGraph) -> None:
    graphio.write_graphml(
        path,
        directed=False,
        node_attrs=[],
        edge_attrs=[
            ("weight", "long"), ("wins", "long"),
            ("losses", "long"), ("collaborations", "long"),
        ],
        nodes=[(n, {}) for n in sorted(graph.nodes)],
        edges=[
            (e.u, e.v, {"weight": e.weight, "wins": e.wins,
                        "losses": e.losses, "collaborations": e.collaborations})
            for e in sorted(graph.edges, key=lambda e: (e.u, e.v))
        ],
    )


def read_collaboration_graphml(path: str | Path) -> CollaborationGraph:
    directed, nodes, edges = graphio.read_graphml(path)
    if directed:
        raise ValueError(f"{path}: collaboration graph must be undirected")
    return CollaborationGraph(
        nodes=[nid for nid, _ in nodes],
        edges=[
            CollabEdge(u, v, a["weight"], a["wins"], a["losses"], a["collaborations"])
            for u, v, a in edges
        ],
    )


def write_collaboration_dot(path: str | Path, graph: CollaborationGraph) -> None:
    graphio.write_dot(
        path,
        directed=False,
        nodes=[(n, []) for n in sorted(graph.nodes)],
        edges=[
            (e.u, e.v, [("weight", e.weight), ("collaborations", e.collaborations)])
            for e in sorted(graph.edges, key=lambda e: (e.u, e.v))
        ],
    )


def write_case_graphml(
    path: str | Path,
    graph: CaseGraph,
    communities: Mapping[str, int] | None = None,
) -> None:
    node_attrs = [("outcome", "string")]
    if communities is not None:
        node_attrs.append(("community", "long"))

    def attrs(doc_id: str, outcome: Outcome) -> dict:
        a = {"outcome": outcome.value}
        if communities is not None:
            a["community"] = communities[doc_id]
        return a

    graphio.write_graphml(
        path,
        directed=False,
        node_attrs=node_attrs,
        edge_attrs=[("shared_articles", "long")],
        nodes=[(d, attrs(d, o)) for d, o in sorted(graph.nodes.items())],
        edges=[
            (e.u, e.v, {"shared_articles": e.shared_articles})
            for e in sorted(graph.edges, key=lambda e: (e.u, e.v))
        ],
    )


def read_case_graphml(path: str | Path, k: int = 1) -> CaseGraph:
    directed, nodes, edges = graphio.read_graphml(path)
    if directed:
        raise ValueError(f"{path}: case graph must be undirected")
    return CaseGraph(
        nodes={nid: Outcome(a["outcome"]) for nid, a in nodes},
        edges=[CaseEdge(u, v, a["shared_articles"]) for u, v, a in edges],
        k=k,
    )


def write_case_dot(path: str | Path, graph: CaseGraph) -> None:
    graphio.write_dot(
        path,
        directed=False,
        nodes=[(d, [("outcome", o.value)]) for d, o in sorted(graph.nodes.items())],
        edges=[
            (e.u, e.v, [("shared_articles", e.shared_articles)])
            for e in sorted(graph.edges, key=lambda e: (e.u, e.v))
        ],
    )
