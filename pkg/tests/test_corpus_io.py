import json
import logging

import numpy as np
import pytest

from coref_meter.corpus import (
    Document,
    EntityPartition,
    Mention,
    ScoreGrid,
    Triple,
    TripleCounts,
    align_trees,
    build_hierarchy,
    format_conll_coref,
    format_conllu,
    format_score_grids,
    format_triples,
    load_documents,
    parse_conll_coref,
    parse_conllu,
    parse_hierarchy,
    parse_jsonl_documents,
    parse_score_grid,
    parse_triples,
    write_conll_coref,
    write_hierarchy,
    write_jsonl_documents,
    write_triples,
)
from coref_meter.corpus.model import make_mention
from coref_meter.errors import ParseError, ValidationError


def conll(rows, name="test/doc"):
    lines = [f"#begin document ({name}); part 000"]
    for r in rows:
        if r is None:
            lines.append("")
        else:
            i, tok, coref = r
            lines.append(f"{name}\t0\t{i}\t{tok}\t-\t-\t-\t-\t-\tspk\t*\t{coref}")
    lines.append("#end document")
    return "\n".join(lines) + "\n"


def test_conll_two_sentences_one_entity(tmp_path):
    p = tmp_path / "a.conll"
    p.write_text(conll([(0, "Kim", "(0)"), (1, "ran", "-"), None, (0, "Kim", "(0)"), (1, "sat", "-")]))
    (doc,) = parse_conll_coref(p)
    assert doc.doc_id == "test/doc/part_000"
    assert doc.sentences == (("Kim", "ran"), ("Kim", "sat"))
    assert doc.gold.entities == (frozenset({Mention(0, 0), Mention(2, 2)}),)
    assert doc.speakers == ("spk",) * 4


def test_conll_multi_token_and_nested(tmp_path):
    p = tmp_path / "a.conll"
    p.write_text(conll([(0, "the", "(1|(2"), (1, "dog", "2)"), (2, "barked", "1)")]))
    (doc,) = parse_conll_coref(p, "predicted")
    assert doc.predicted.mentions == {Mention(0, 2), Mention(0, 1)}
    assert doc.gold.entities == ()


def test_conll_dangling_open_fails_at_end_of_document(tmp_path):
    p = tmp_path / "a.conll"
    p.write_text(conll([(0, "a", "(3"), (1, "b", "-")]))
    with pytest.raises(ParseError) as e:
        parse_conll_coref(p)
    assert "a.conll" in str(e.value) and e.value.line == 4


def test_conll_unbalanced_close_names_line(tmp_path):
    p = tmp_path / "a.conll"
    p.write_text(conll([(0, "a", "-"), (1, "b", "4)")]))
    with pytest.raises(ParseError) as e:
        parse_conll_coref(p)
    assert e.value.line == 3


def test_conll_duplicate_span_dedup_warning(tmp_path, caplog):
    p = tmp_path / "a.conll"
    p.write_text(conll([(0, "a", "(5)|(5)"), (1, "b", "(5)")]))
    with caplog.at_level(logging.WARNING):
        (doc,) = parse_conll_coref(p)
    assert len(doc.gold.mentions) == 2
    assert any("duplicate" in r.message for r in caplog.records)


def test_conll_span_in_two_clusters_is_an_error(tmp_path):
    p = tmp_path / "a.conll"
    p.write_text(conll([(0, "a", "(5)|(6)"), (1, "b", "(5)")]))
    with pytest.raises(ParseError):
        parse_conll_coref(p)


def test_conll_inconsistent_columns(tmp_path):
    p = tmp_path / "a.conll"
    p.write_text("#begin document (x); part 000\nx\t0\t0\ta\t-\t-\nx\t0\t1\tb\t-\t-\t-\n#end document\n")
    with pytest.raises(ParseError) as e:
        parse_conll_coref(p)
    assert e.value.line == 3
    p.write_text("#begin document (x); part 000\nx\t0\t0\ta\n#end document\n")
    with pytest.raises(ParseError):
        parse_conll_coref(p)


def test_conll_fixture_round_trip(fixtures):
    docs = parse_conll_coref(fixtures / "docs.conll")
    assert [d.doc_id for d in docs] == ["nw/fix/00/doc_a/part_000", "bc/fix/00/doc_b/part_000"]
    assert docs[0].genre == "nw"
    again = format_conll_coref(docs)
    assert again == (fixtures / "docs.conll").read_text()


def test_jsonl_and_conll_agree(fixtures):
    a = parse_conll_coref(fixtures / "docs.conll")
    b = parse_jsonl_documents(fixtures / "docs.jsonl")
    for x, y in zip(a, b):
        assert x.sentences == y.sentences and x.gold == y.gold


def test_jsonl_round_trip(tmp_path, fixtures):
    docs = parse_jsonl_documents(fixtures / "docs.jsonl")
    write_jsonl_documents(docs, tmp_path / "d.jsonl")
    assert parse_jsonl_documents(tmp_path / "d.jsonl") == docs


def test_jsonl_discontinuous_dropped_with_warning(tmp_path):
    rec = {"doc_id": "d", "sentences": [["a", "b", "c"]], "clusters": [[[0, 0], [[1, 1], [2, 2]]]]}
    p = tmp_path / "d.jsonl"
    p.write_text(json.dumps(rec) + "\n")
    (doc,) = parse_jsonl_documents(p)
    assert doc.gold.mentions == {Mention(0, 0)}
    assert len(doc.warnings) == 1


def test_load_documents_predicted_side(fixtures):
    docs = load_documents(fixtures / "pred.conll", "predicted")
    assert all(d.predicted is not None for d in docs)


def test_document_invariants():
    with pytest.raises(ValidationError):
        Document("d", (("a", "b"), ("c",)), EntityPartition.from_clusters([[(1, 2)]]))
    with pytest.raises(ValidationError):
        Document("d", (("a",),), EntityPartition.from_clusters([[(0, 3)]]))
    with pytest.raises(ValidationError):
        EntityPartition.from_clusters([[(0, 0)], [(0, 0)]])
    with pytest.raises(ValidationError):
        make_mention(2, 1)
    d = Document("d", (("a", "b"), ("c",)))
    assert d.n_tokens == 3 and d.offsets == (0, 2)


# --- CoNLL-U ------------------------------------------------------------------


def conllu(rows):
    return "".join(
        f"{i}\t{f}\t{f}\tX\tX\t_\t{h}\tdep\t_\t_\n" for i, (f, h) in enumerate(rows, 1)
    ) + "\n"


def test_conllu_valid_tree(tmp_path):
    p = tmp_path / "t.conllu"
    p.write_text(conllu([("a", 2), ("b", 0), ("c", 2)]))
    (t,) = parse_conllu(p)
    assert t.root == 2 and [x.id for x in t.children(2)] == [1, 3]


def test_conllu_cycle(tmp_path):
    p = tmp_path / "t.conllu"
    p.write_text(conllu([("a", 2), ("b", 3), ("c", 2), ("d", 0)]))
    with pytest.raises(ParseError, match="cycl"):
        parse_conllu(p)


def test_conllu_head_out_of_range(tmp_path):
    p = tmp_path / "t.conllu"
    p.write_text(conllu([("a", 0), ("b", 7)]))
    with pytest.raises(ParseError):
        parse_conllu(p)


def test_conllu_two_roots(tmp_path):
    p = tmp_path / "t.conllu"
    p.write_text(conllu([("a", 0), ("b", 0)]))
    with pytest.raises(ParseError):
        parse_conllu(p)


def test_conllu_multiword_lines_skipped_and_preserved(tmp_path):
    text = (
        "# text = del mar\n"
        "1-2\tdel\t_\t_\t_\t_\t_\t_\t_\t_\n"
        "1\tde\tde\tADP\tIN\t_\t3\tcase\t_\t_\n"
        "2\tel\tel\tDET\tDT\t_\t3\tdet\t_\t_\n"
        "3\tmar\tmar\tNOUN\tNN\t_\t0\troot\t_\t_\n\n"
    )
    p = tmp_path / "t.conllu"
    p.write_text(text)
    (t,) = parse_conllu(p)
    assert t.forms == ("de", "el", "mar")
    assert format_conllu([t]) == text


def test_conllu_fixture_byte_identical(fixtures):
    text = (fixtures / "docs.conllu").read_text()
    assert format_conllu(parse_conllu(fixtures / "docs.conllu")) == text


def test_align_trees_rejects_mismatch(fixtures):
    docs = parse_conll_coref(fixtures / "docs.conll")
    trees = parse_conllu(fixtures / "docs.conllu")
    aligned = align_trees(docs, trees)
    assert aligned[0].deps[0].forms == docs[0].sentences[0]
    with pytest.raises(ValidationError):
        align_trees(docs, trees[:-1])
    with pytest.raises(ValidationError):
        align_trees(docs[::-1], trees)


# --- triples ----------------------------------------------------------------------


def test_triples_duplicates_summed(tmp_path):
    p = tmp_path / "t.tsv"
    p.write_text("man\teat\tapple\t3\nman\teat\tapple\t4\n")
    tc = parse_triples(p)
    assert tc[("man", "eat", "apple")] == 7 and tc.total == 7


def test_triples_empty(tmp_path):
    p = tmp_path / "t.tsv"
    p.write_text("")
    tc = parse_triples(p)
    assert len(tc) == 0 and tc.total == 0


def test_triples_bad_count_line(tmp_path):
    p = tmp_path / "t.tsv"
    p.write_text("a\tb\tc\t1\na\tb\tc\tx\n")
    with pytest.raises(ParseError) as e:
        parse_triples(p)
    assert e.value.line == 2 and e.value.column == 4


def test_triples_cap(tmp_path):
    p = tmp_path / "t.tsv"
    p.write_text("a\tb\tc\t800\na\tb\tc\t700\nx\ty\tz\t5\n")
    tc = parse_triples(p, cap_per_triple=1000)
    assert tc[("a", "b", "c")] == 1000 and tc[("x", "y", "z")] == 5


def test_triples_round_trip_and_marginals(tmp_path, fixtures):
    tc = parse_triples(fixtures / "triples.tsv")
    write_triples(tc, tmp_path / "t.tsv")
    assert parse_triples(tmp_path / "t.tsv") == tc
    assert tc.n == 3 * tc.total
    for (s, v), c in tc.pair("sv").items():
        assert tc.position("s")[s] >= c and tc.position("v")[v] >= c
    assert sum(tc.unigram.values()) == tc.n


# --- hierarchy --------------------------------------------------------------------


def chain_h(min_depth=1):
    edges = [("organism", "entity"), ("animal", "organism"), ("dog", "animal")]
    return build_hierarchy(edges, {"dog": ["dog"]}, min_depth=min_depth)


def test_hierarchy_depths():
    h = chain_h()
    assert h.depth == {"entity": 1, "organism": 2, "animal": 3, "dog": 4}
    assert h.chain("dog") == ("entity", "organism", "animal", "dog")


def test_hierarchy_min_depth_filter():
    h = chain_h(min_depth=4)
    assert h.concepts == {"dog"}
    assert h.chain("dog") == ("dog",)


def test_hierarchy_diamond_takes_shortest():
    edges = [("a", "root"), ("b", "a"), ("c", "b"), ("x", "c"), ("x", "a")]
    h = build_hierarchy(edges, {})
    assert h.depth["x"] == 3
    assert h.chain("x") == ("root", "a", "x")
    for c, ps in h.parents.items():
        for p in ps:
            assert h.depth[p] >= h.depth[c] - 1


def test_hierarchy_multiple_roots():
    with pytest.raises(ValidationError):
        build_hierarchy([("a", "r1"), ("b", "r2")], {})
    h = build_hierarchy([("a", "r1"), ("b", "r2")], {}, root="r1")
    assert h.concepts == {"r1", "a"}


def test_hierarchy_cycle():
    with pytest.raises(ValidationError):
        build_hierarchy([("a", "root"), ("b", "a"), ("a", "b")], {})


def test_hierarchy_unknown_sense_dropped(caplog):
    with caplog.at_level(logging.WARNING):
        h = build_hierarchy([("a", "root")], {"w": ["a", "nope"]})
    assert h.word_senses("w") == ("a",)
    assert caplog.records


def test_hierarchy_round_trip(tmp_path, fixtures):
    h = parse_hierarchy(fixtures / "hierarchy_edges.tsv", fixtures / "senses.tsv")
    write_hierarchy(h, tmp_path / "e.tsv", tmp_path / "s.tsv")
    h2 = parse_hierarchy(tmp_path / "e.tsv", tmp_path / "s.tsv")
    assert h2.parents == h.parents and h2.senses == h.senses and h2.depth == h.depth
    assert h.word_senses("fish") == ("fish.n.01", "fish.n.02")
    assert h.lemma("fish.n.02") == "fish"


# --- grids ---------------------------------------------------------------------------


def test_grid_one_by_one(tmp_path):
    p = tmp_path / "g.jsonl"
    p.write_text(json.dumps({"event": ["a", "b", "c"], "subject_chain": ["x"], "object_chain": ["y"], "scores": [[0.5]]}) + "\n")
    (g,) = parse_score_grid(p)
    assert g.shape == (1, 1) and g.event == Triple("a", "b", "c")


def test_grid_shape_mismatch_names_event(tmp_path):
    p = tmp_path / "g.jsonl"
    rec = {"event": ["cat", "eat", "fish"], "subject_chain": ["a", "b"], "object_chain": ["c", "d", "e"],
           "scores": [[0, 0], [0, 0], [0, 0]]}
    p.write_text(json.dumps(rec) + "\n")
    with pytest.raises(ParseError, match="cat"):
        parse_score_grid(p)


def test_grid_hierarchy_check(tmp_path, fixtures):
    h = parse_hierarchy(fixtures / "hierarchy_edges.tsv", fixtures / "senses.tsv")
    grids = parse_score_grid(fixtures / "grids.jsonl", h)
    assert len(grids) == 6
    bad = ScoreGrid(Triple("dog", "eat", "meat"), ("animal.n.01", "dog.n.01"), ("meat.n.01",), np.zeros((2, 1)))
    p = tmp_path / "g.jsonl"
    p.write_text(format_score_grids([bad]))
    assert parse_score_grid(p)[0] == bad
    with pytest.raises(ParseError, match="chain"):
        parse_score_grid(p, h)


def test_grid_round_trip(tmp_path, fixtures):
    grids = parse_score_grid(fixtures / "grids.jsonl")
    p = tmp_path / "g.jsonl"
    p.write_text(format_score_grids(grids))
    assert parse_score_grid(p) == grids
    assert p.read_text() == (fixtures / "grids.jsonl").read_text()


def test_triple_counts_merge_and_hash():
    a = TripleCounts({Triple("a", "b", "c"): 2})
    b = TripleCounts({Triple("a", "b", "c"): 3, Triple("x", "y", "z"): 1})
    m = a.merge(b)
    assert m[("a", "b", "c")] == 5 and m.total == 6
    assert m.corpus_hash() == b.merge(a).corpus_hash()
    assert format_triples(m).count("\n") == 2
