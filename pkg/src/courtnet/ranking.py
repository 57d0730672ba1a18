"""Lawyer performance metrics and the final ranking table.

Three views of the same population: raw experience (cases pleaded), win rate
over determined cases, and PageRank centrality on the opposing network,
where incoming weight flows from the lawyers one has beaten.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import EmptyNetwork, NoDeterminedCases, UnknownLawyer
from .networks import CaseResult, OpposingNetwork, lawyer_tallies

logger = logging.getLogger(__name__)

DEFAULT_DAMPING = 0.85
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10000


def experience(results: Sequence[CaseResult], lawyer: str) -> int:
    """Number of distinct cases the lawyer appears in, on either side.

    Undetermined cases count: pleading them is experience even when no
    outcome can be scored.
    """
    docs = {
        r.doc_id
        for r in results
        if lawyer in r.appellant_lawyers or lawyer in r.appellee_lawyers
    }
    if not docs:
        raise UnknownLawyer(f"{lawyer!r} appears in no case result")
    return len(docs)


def win_rate(results: Sequence[CaseResult], lawyer: str) -> float:
    """Wins over determined cases; raises when nothing is determined."""
    tallies = lawyer_tallies(results)
    if lawyer not in tallies:
        raise UnknownLawyer(f"{lawyer!r} appears in no case result")
    _, wins, losses = tallies[lawyer]
    if wins + losses == 0:
        raise NoDeterminedCases(f"{lawyer!r} has no determined case")
    return wins / (wins + losses)


def pagerank(
    network: OpposingNetwork,
    damping: float = DEFAULT_DAMPING,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> dict[str, float]:
    """Weighted PageRank over the opposing network.

    Power iteration on out-probabilities proportional to edge weights; the
    rank mass of dangling nodes is spread uniformly over all nodes. Stops
    when the L1 change drops below tol; hitting max_iter first logs a
    warning and returns the last iterate.
    """
    if not network.nodes:
        raise EmptyNetwork("opposing network has no nodes")
    if not 0.0 < damping < 1.0:
        raise ValueError(f"damping must be in (0, 1), got {damping!r}")
    if tol <= 0 or max_iter < 1:
        raise ValueError("tol must be positive and max_iter at least 1")

    nodes = sorted(network.nodes)
    out_weight = {v: 0.0 for v in nodes}
    in_edges: dict[str, list[tuple[str, float]]] = {v: [] for v in nodes}
    for e in sorted(network.edges, key=lambda e: (e.source, e.target)):
        out_weight[e.source] += e.weight
        in_edges[e.target].append((e.source, e.weight))

    n = len(nodes)
    rank = {v: 1.0 / n for v in nodes}
    base = (1.0 - damping) / n
    delta = None
    for _ in range(max_iter):
        dangling = sum(rank[v] for v in nodes if out_weight[v] == 0.0)
        spread = dangling / n
        new = {}
        for v in nodes:
            acc = 0.0
            for u, w in in_edges[v]:
                acc += rank[u] * (w / out_weight[u])
            new[v] = base + damping * (acc + spread)
        delta = sum(abs(new[v] - rank[v]) for v in nodes)
        rank = new
        if delta < tol:
            break
    else:
        logger.warning(
            "pagerank stopped after %d iterations without converging "
            "(residual %.3e)", max_iter, delta,
        )
    return rank


@dataclass(frozen=True)
class RankRow:
    lawyer_canonical: str
    lawyer_display: str
    experience: int
    wins: int
    losses: int
    win_rate: float | None
    pagerank: float


def rank_table(
    results: Sequence[CaseResult],
    network: OpposingNetwork,
    damping: float = DEFAULT_DAMPING,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    display: Mapping[str, str] | None = None,
) -> list[RankRow]:
    """One row per network survivor, sorted by PageRank then name.

    `results` should be the full extraction output including undetermined
    cases so that experience is complete; win/loss tallies ignore the
    undetermined ones on their own. `display` maps canonical names to the
    spelling to print, defaulting to the canonical form itself.
    """
    scores = pagerank(network, damping=damping, tol=tol, max_iter=max_iter)
    tallies = lawyer_tallies(results)
    display = display or {}
    rows = []
    for lawyer in sorted(network.nodes):
        total, wins, losses = tallies.get(lawyer, (0, 0, 0))
        rate = wins / (wins + losses) if wins + losses else None
        rows.append(RankRow(
            lawyer_canonical=lawyer,
            lawyer_display=display.get(lawyer, lawyer),
            experience=total,
            wins=wins,
            losses=losses,
            win_rate=rate,
            pagerank=scores[lawyer],
        ))
    rows.sort(key=lambda r: (-r.pagerank, r.lawyer_canonical))
    return rows


def write_rankings_csv(path: str | Path, rows: Iterable[RankRow]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "lawyer_canonical", "lawyer_display", "experience",
            "wins", "losses", "win_rate", "pagerank",
        ])
        for r in rows:
            writer.writerow([
                r.lawyer_canonical, r.lawyer_display, r.experience,
                r.wins, r.losses,
                "" if r.win_rate is None else repr(r.win_rate),
                repr(r.pagerank),
            ])
