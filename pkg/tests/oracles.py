"""Reference implementations the tests compare against.

Everything here is written independently of the package modules, in the
most obvious way available, so that agreement is meaningful: dense numpy
linear algebra for PageRank, exhaustive set-partition enumeration for
modularity, quadratic scans elsewhere.
"""

from itertools import combinations
import unicodedata

import numpy as np


def fold_reference(text):
    out = []
    for ch in unicodedata.normalize("NFKD", text):
        if not unicodedata.combining(ch):
            out.append(ch)
    return "".join(out).casefold()


def jaro_reference(s1, s2):
    """Jaro similarity with greedy windowed matching and floored
    transposition halving, computed over folded strings."""
    a = fold_reference(s1)
    b = fold_reference(s2)
    if a == b:
        return 1.0
    if not a or not b:
        return 0.0
    window = max(max(len(a), len(b)) // 2 - 1, 0)
    used = [False] * len(b)
    pairs = []
    for i, ch in enumerate(a):
        lo = max(0, i - window)
        hi = min(len(b), i + window + 1)
        for j in range(lo, hi):
            if not used[j] and b[j] == ch:
                used[j] = True
                pairs.append((i, j))
                break
    m = len(pairs)
    if m == 0:
        return 0.0
    seq_a = [a[i] for i, _ in pairs]
    seq_b = [b[j] for _, j in sorted(pairs, key=lambda p: p[1])]
    diff = sum(1 for x, y in zip(seq_a, seq_b) if x != y)
    t = diff // 2
    return (m / len(a) + m / len(b) + (m - t) / m) / 3.0


def pagerank_reference(node_ids, edges, damping, tol=1e-14, max_iter=100000):
    """Dense power iteration. Edges are (source, target, weight) triples;
    dangling nodes spread their mass uniformly over all nodes."""
    nodes = sorted(node_ids)
    n = len(nodes)
    index = {v: i for i, v in enumerate(nodes)}
    out = np.zeros(n)
    weight = np.zeros((n, n))  # weight[j, i] = mass i sends to j
    for u, v, w in edges:
        weight[index[v], index[u]] += w
        out[index[u]] += w
    matrix = np.zeros((n, n))
    for i in range(n):
        if out[i] > 0:
            matrix[:, i] = weight[:, i] / out[i]
        else:
            matrix[:, i] = 1.0 / n
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        new = (1.0 - damping) / n + damping * (matrix @ x)
        if np.abs(new - x).sum() < tol:
            x = new
            break
        x = new
    return {v: float(x[index[v]]) for v in nodes}


def modularity_reference(n, edges, assignment):
    """Newman modularity of an unweighted simple graph. Edges are unique
    index pairs without self loops; assignment maps index to community."""
    m = len(edges)
    if m == 0:
        return 0.0
    degree = [0] * n
    for u, v in edges:
        degree[u] += 1
        degree[v] += 1
    intra = {}
    total = {}
    for u, v in edges:
        if assignment[u] == assignment[v]:
            intra[assignment[u]] = intra.get(assignment[u], 0) + 1
    for v in range(n):
        total[assignment[v]] = total.get(assignment[v], 0) + degree[v]
    return sum(
        intra.get(c, 0) / m - (total[c] / (2.0 * m)) ** 2 for c in total
    )


def partitions_of(n):
    """All set partitions of range(n), as restricted growth strings."""
    a = [0] * n
    while True:
        yield list(a)
        # advance to the next restricted growth string
        i = n - 1
        while i > 0:
            if a[i] <= max(a[:i]):
                a[i] += 1
                for j in range(i + 1, n):
                    a[j] = 0
                break
            a[i] = 0
            i -= 1
        else:
            return


def best_partition_reference(n, edges):
    """Exhaustively maximal modularity: (best value, list of partitions
    reaching it, each a frozenset of frozensets of node indices)."""
    best_q = float("-inf")
    best = []
    for assignment in partitions_of(n):
        q = modularity_reference(n, edges, assignment)
        if q > best_q + 1e-12:
            best_q = q
            best = [assignment[:]]
        elif abs(q - best_q) <= 1e-12:
            best.append(assignment[:])
    as_sets = []
    for assignment in best:
        groups = {}
        for v, c in enumerate(assignment):
            groups.setdefault(c, set()).add(v)
        as_sets.append(frozenset(frozenset(g) for g in groups.values()))
    return best_q, as_sets


def case_edges_reference(articles, k):
    """Quadratic scan: every unordered case pair sharing at least k
    article references, mapped to the intersection size."""
    out = {}
    for u, v in combinations(sorted(articles), 2):
        shared = len(articles[u] & articles[v])
        if shared >= k:
            out[(u, v)] = shared
    return out
