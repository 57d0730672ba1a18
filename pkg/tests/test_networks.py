"""Opposing and collaboration networks, case graph, communities."""

import logging
import math
import random

import pytest

from courtnet.extract import ArticleRef, Outcome
from courtnet.networks import (
    CaseResult,
    CollabEdge,
    LawyerStats,
    NetworkParams,
    OpposingEdge,
    build_case_graph,
    build_collaboration_network,
    build_opposing_network,
    collapse,
    community_win_rate,
    detect_communities,
    lawyer_tallies,
    pair_wins,
    read_case_graphml,
    read_collaboration_graphml,
    read_opposing_graphml,
    write_case_graphml,
    write_collaboration_graphml,
    write_communities_csv,
    write_opposing_graphml,
)

from oracles import best_partition_reference, case_edges_reference, modularity_reference


def _case(doc_id, appellants, appellees, outcome):
    return CaseResult(
        doc_id=doc_id,
        appellant_lawyers=tuple(appellants),
        appellee_lawyers=tuple(appellees),
        outcome=outcome,
    )


class _Graph:
    """Anything with node_ids and undirected_edges works for communities."""

    def __init__(self, nodes, edges):
        self._nodes = nodes
        self._edges = edges

    def node_ids(self):
        return list(self._nodes)

    def undirected_edges(self):
        return list(self._edges)


def test_network_params_validation():
    NetworkParams()
    with pytest.raises(ValueError):
        NetworkParams(a=0.0)
    with pytest.raises(ValueError):
        NetworkParams(b=-1.0)
    with pytest.raises(ValueError):
        NetworkParams(min_cases=-1)
    with pytest.raises(ValueError):
        NetworkParams(collab_min=-2)


def test_lawyer_tallies():
    results = [
        _case("c1", ["x"], ["y"], Outcome.APPELLANT_WINS),
        _case("c2", ["x"], ["z"], Outcome.APPELLEE_WINS),
        _case("c3", ["y"], ["x"], Outcome.UNDETERMINED),
    ]
    tallies = lawyer_tallies(results)
    # undetermined cases count toward totals but not wins or losses
    assert tallies["x"] == (3, 1, 1)
    assert tallies["y"] == (2, 0, 1)
    assert tallies["z"] == (1, 1, 0)


def test_lawyer_tallies_both_sides_is_neutral():
    results = [_case("c1", ["x", "y"], ["x"], Outcome.APPELLANT_WINS)]
    tallies = lawyer_tallies(results)
    assert tallies["x"] == (1, 0, 0)
    assert tallies["y"] == (1, 1, 0)


def test_pair_wins_weights():
    params = NetworkParams(a=2.0, b=1.0)
    results = [
        _case("c1", ["x"], ["y"], Outcome.APPELLANT_WINS),
        _case("c2", ["x"], ["y"], Outcome.APPELLANT_WINS),
        _case("c3", ["y"], ["x"], Outcome.APPELLANT_WINS),
        _case("c4", ["x"], ["y"], Outcome.APPELLEE_WINS),
    ]
    wins = pair_wins(results, params)
    # x beat y twice as appellant; y beat x once as appellant and once
    # as appellee
    assert wins == {("x", "y"): 4.0, ("y", "x"): 3.0}


def test_pair_wins_rejects_undetermined():
    with pytest.raises(ValueError):
        pair_wins([_case("c1", ["x"], ["y"], Outcome.UNDETERMINED)])


def test_pair_wins_skips_lawyer_on_both_sides(caplog):
    results = [_case("c1", ["x", "y"], ["x"], Outcome.APPELLANT_WINS)]
    with caplog.at_level(logging.WARNING, logger="courtnet.networks"):
        wins = pair_wins(results)
    assert wins == {("y", "x"): 2.0}
    assert any("both sides" in r.message for r in caplog.records)


def test_collapse_direction_and_weight():
    edges = collapse({("x", "y"): 4.0, ("y", "x"): 2.0})
    assert edges == [
        OpposingEdge("y", "x", 2.0 * math.log(7.0), 4.0, 2.0)
    ]
    # one-sided records still collapse
    edges = collapse({("a", "b"): 2.0})
    assert edges == [OpposingEdge("b", "a", 2.0 * math.log(3.0), 2.0, 0.0)]
    # balanced pairs vanish
    assert collapse({("a", "b"): 3.0, ("b", "a"): 3.0}) == []


def test_build_opposing_network_prunes_thin_nodes():
    results = [
        _case("c1", ["x"], ["y"], Outcome.APPELLANT_WINS),
        _case("c2", ["x"], ["y"], Outcome.APPELLANT_WINS),
        _case("c3", ["x"], ["z"], Outcome.APPELLEE_WINS),
    ]
    network = build_opposing_network(results, NetworkParams(min_cases=2))
    # z only has one case and is dropped, together with its edge
    assert set(network.nodes) == {"x", "y"}
    assert network.nodes["x"] == LawyerStats(total_cases=3, wins=2, losses=1)
    assert [(e.source, e.target) for e in network.edges] == [("y", "x")]
    assert network.edges[0].weight == pytest.approx(4.0 * math.log(5.0))


def test_build_opposing_network_keeps_isolated_survivors():
    results = [
        # x takes 2.0 as winning appellant, y takes 1.0 twice as winning
        # appellee, so the pair balances and no edge survives
        _case("c1", ["x"], ["y"], Outcome.APPELLANT_WINS),
        _case("c2", ["x"], ["y"], Outcome.APPELLEE_WINS),
        _case("c3", ["x"], ["y"], Outcome.APPELLEE_WINS),
    ]
    network = build_opposing_network(results, NetworkParams(min_cases=2))
    assert set(network.nodes) == {"x", "y"}
    assert network.edges == []


def test_collaboration_network():
    results = [
        _case("c1", ["x", "y"], ["z"], Outcome.APPELLANT_WINS),
        _case("c2", ["x", "y"], ["z"], Outcome.APPELLEE_WINS),
        _case("c3", ["z"], ["x", "y"], Outcome.APPELLANT_WINS),
        _case("c4", ["a", "b"], ["z"], Outcome.APPELLANT_WINS),
    ]
    graph = build_collaboration_network(results, NetworkParams(collab_min=2))
    # x and y collaborated three times: one win, two losses
    assert graph.edges == [CollabEdge("x", "y", -1, 1, 2, 3)]
    # a-b collaborated once, below the cutoff; nodes are edge-incident only
    assert graph.nodes == ["x", "y"]


def test_collaboration_requires_determined_outcomes():
    with pytest.raises(ValueError):
        build_collaboration_network(
            [_case("c1", ["x", "y"], ["z"], Outcome.UNDETERMINED)]
        )


def _random_articles(rng, n_cases):
    themes = [ArticleRef("code", str(num)) for num in range(12)]
    return {
        f"case{idx:03d}": frozenset(rng.sample(themes, rng.randrange(0, 6)))
        for idx in range(n_cases)
    }


def test_case_graph_matches_brute_force():
    rng = random.Random(97)
    for trial in range(10):
        articles = _random_articles(rng, 40)
        outcomes = {doc: Outcome.UNDETERMINED for doc in articles}
        for k in (1, 2, 3):
            graph = build_case_graph(articles, outcomes, k)
            got = {(e.u, e.v): e.shared_articles for e in graph.edges}
            assert got == case_edges_reference(articles, k)
            assert set(graph.nodes) == set(articles)


def test_case_graph_edges_shrink_as_k_grows():
    rng = random.Random(31)
    articles = _random_articles(rng, 60)
    outcomes = {doc: Outcome.APPELLANT_WINS for doc in articles}
    sizes = [len(build_case_graph(articles, outcomes, k).edges) for k in (1, 2, 3, 4)]
    assert sizes == sorted(sizes, reverse=True)


def test_case_graph_rejects_bad_k():
    with pytest.raises(ValueError):
        build_case_graph({}, {}, 0)


def test_communities_split_joined_cliques():
    nodes = [f"n{i}" for i in range(8)]
    edges = [(f"n{i}", f"n{j}") for i in range(4) for j in range(i + 1, 4)]
    edges += [(f"n{i}", f"n{j}") for i in range(4, 8) for j in range(i + 1, 8)]
    edges.append(("n0", "n4"))
    partition = detect_communities(_Graph(nodes, edges))
    groups = partition.communities()
    assert len(groups) == 2
    assert sorted(map(tuple, groups.values())) == [
        ("n0", "n1", "n2", "n3"), ("n4", "n5", "n6", "n7"),
    ]


def test_communities_on_edgeless_graph_are_singletons():
    partition = detect_communities(_Graph(["a", "b", "c"], []))
    assert partition.assignment == {"a": 0, "b": 1, "c": 2}
    assert detect_communities(_Graph([], [])).assignment == {}


def test_community_ids_are_dense_and_ordered_by_smallest_member():
    nodes = ["a", "b", "c", "d"]
    edges = [("c", "d"), ("a", "b")]
    partition = detect_communities(_Graph(nodes, edges))
    assert partition.assignment == {"a": 0, "b": 0, "c": 1, "d": 1}
    assert partition.sizes == {0: 2, 1: 2}


def test_communities_ignore_insertion_order():
    rng = random.Random(5)
    nodes = [f"n{i}" for i in range(10)]
    edges = [(f"n{i}", f"n{j}") for i in range(10) for j in range(i + 1, 10)
             if rng.random() < 0.4]
    baseline = detect_communities(_Graph(nodes, edges)).assignment
    for _ in range(5):
        shuffled_nodes = nodes[:]
        shuffled_edges = [e if rng.random() < 0.5 else (e[1], e[0]) for e in edges]
        rng.shuffle(shuffled_nodes)
        rng.shuffle(shuffled_edges)
        assert detect_communities(_Graph(shuffled_nodes, shuffled_edges)).assignment == baseline


def test_detected_partition_is_near_exhaustive_optimum():
    rng = random.Random(271)
    for trial in range(12):
        n = rng.randrange(4, 8)
        nodes = list(range(n))
        edges = [(i, j) for i in range(n) for j in range(i + 1, n)
                 if rng.random() < 0.45]
        partition = detect_communities(_Graph(nodes, edges))
        best_q, _ = best_partition_reference(n, edges)
        got_q = modularity_reference(n, edges, [partition.assignment[v] for v in nodes])
        assert got_q >= best_q - 0.05


def test_community_win_rate():
    partition = detect_communities(_Graph(["a", "b", "c", "d"], [("a", "b"), ("c", "d")]))
    outcomes = {
        "a": Outcome.APPELLANT_WINS,
        "b": Outcome.APPELLEE_WINS,
        "c": Outcome.UNDETERMINED,
        "d": Outcome.UNDETERMINED,
    }
    rates = community_win_rate(partition, outcomes)
    # the all-undetermined community has no rate at all
    assert rates == {0: 0.5}


def test_communities_csv(tmp_path):
    partition = detect_communities(_Graph(["a", "b", "c"], [("a", "b")]))
    outcomes = {
        "a": Outcome.APPELLANT_WINS,
        "b": Outcome.APPELLANT_WINS,
        "c": Outcome.UNDETERMINED,
    }
    path = tmp_path / "communities.csv"
    write_communities_csv(path, partition, outcomes)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "community_id,size,appellant_win_rate"
    assert lines[1] == "0,2,1.0"
    assert lines[2] == "1,1,"


def test_opposing_graphml_round_trip(tmp_path):
    results = [
        _case("c1", ["x"], ["y"], Outcome.APPELLANT_WINS),
        _case("c2", ["x"], ["y"], Outcome.APPELLANT_WINS),
        _case("c3", ["y"], ["z"], Outcome.APPELLEE_WINS),
        _case("c4", ["z"], ["y"], Outcome.APPELLEE_WINS),
    ]
    network = build_opposing_network(results, NetworkParams(min_cases=1))
    path = tmp_path / "opposing.graphml"
    write_opposing_graphml(path, network)
    again = read_opposing_graphml(path)
    assert again.nodes == network.nodes
    assert again.edges == network.edges


def test_collaboration_graphml_round_trip(tmp_path):
    results = [
        _case("c1", ["x", "y"], ["z", "w"], Outcome.APPELLANT_WINS),
        _case("c2", ["x", "y"], ["z", "w"], Outcome.APPELLEE_WINS),
    ]
    graph = build_collaboration_network(results, NetworkParams(collab_min=1))
    path = tmp_path / "collab.graphml"
    write_collaboration_graphml(path, graph)
    again = read_collaboration_graphml(path)
    assert again.nodes == graph.nodes
    assert again.edges == graph.edges


def test_case_graphml_round_trip_with_communities(tmp_path):
    articles = {
        "c1": frozenset({ArticleRef("code civil", "1240"), ArticleRef("code civil", "1103")}),
        "c2": frozenset({ArticleRef("code civil", "1240"), ArticleRef("code civil", "1103")}),
        "c3": frozenset(),
    }
    outcomes = {
        "c1": Outcome.APPELLANT_WINS,
        "c2": Outcome.APPELLEE_WINS,
        "c3": Outcome.UNDETERMINED,
    }
    graph = build_case_graph(articles, outcomes, 2)
    partition = detect_communities(graph)
    path = tmp_path / "cases.graphml"
    write_case_graphml(path, graph, communities=partition.assignment)
    again = read_case_graphml(path, k=2)
    assert again.nodes == graph.nodes
    assert again.edges == graph.edges
    assert again.k == 2
    # the community attribute is carried for viewers but ignored on read
    text = path.read_text(encoding="utf-8")
    assert "community" in text
