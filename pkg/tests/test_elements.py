import pytest
from hypothesis import given, strategies as st

from worldtag.errors import UnsupportedKindError, UsageError
from worldtag.metrics import align_elements, jaccard
from worldtag.model import TagKind

from conftest import token_doc
from corpus_factory import scripted_corpus
from reference_tables import CHARACTER_JACCARD

C, P = TagKind.CHARACTER, TagKind.PLACE
small_sets = st.frozensets(st.integers(0, 8), max_size=6)


def test_jaccard_examples():
    assert jaccard({1, 2}, {1, 2}) == 1.0
    assert jaccard({1}, {2}) == 0.0
    assert jaccard({"a", "b"}, {"b", "c"}) == pytest.approx(1 / 3)
    assert jaccard(set(), set()) == 1.0
    assert jaccard({1}, set()) == 0.0


@given(small_sets, small_sets)
def test_jaccard_bounds_and_extremes(a, b):
    j = jaccard(a, b)
    assert 0.0 <= j <= 1.0
    assert j == jaccard(b, a)
    assert (j == 1.0) == (a == b)
    if a | b:
        assert (j == 0.0) == (not a & b)


@pytest.mark.parametrize("values, printed", CHARACTER_JACCARD)
def test_published_means_match_their_rows(values, printed):
    """Each printed mean agrees with its ten pairwise values at the printed precision."""
    mean = sum(values) / len(values)
    decimals = len(printed.split(".")[1])
    assert abs(mean - float(printed)) <= 0.5 * 10 ** -decimals + 1e-9


def test_published_spot_values():
    third, last = CHARACTER_JACCARD[2][0], CHARACTER_JACCARD[15][0]
    assert round(sum(third) / 10, 3) == 0.912
    assert round(sum(last) / 10, 3) == 0.707


def test_identical_tags_agree_fully():
    docs = [token_doc(a, [(C, 0, 0, 1), (C, 5, 5, 1)]) for a in ("a", "b")]
    [alignment] = align_elements(docs, C)
    assert alignment.pairwise_j == {("a", "b"): 1.0}
    assert alignment.mean_j == 1.0
    assert alignment.label == "w0"


def test_absent_annotator_scores_zero():
    docs = [
        token_doc("a", [(C, 1, 1, 1), (C, 4, 4, 1), (C, 7, 7, 1)]),
        token_doc("b", [(C, 1, 1, 1), (C, 4, 4, 1)]),
        token_doc("c", [(P, 2, 2, 1)]),
    ]
    [alignment] = align_elements(docs, C)
    pairs = alignment.pairwise_j
    assert pairs[("a", "b")] == pytest.approx(2 / 3)
    assert pairs[("a", "c")] == 0.0
    assert pairs[("b", "c")] == 0.0
    assert alignment.mean_j == pytest.approx(pairs[("a", "b")] / 3)
    assert alignment.members["c"] is None


def test_ids_are_not_trusted_across_annotators():
    # the same second character is c4, c5 and c2 depending on the annotator
    docs = [
        token_doc("a", [(C, 0, 0, 1), (C, 3, 3, 4), (C, 6, 6, 4)]),
        token_doc("b", [(C, 0, 0, 1), (C, 3, 3, 5), (C, 6, 6, 5)]),
        token_doc("c", [(C, 0, 0, 1), (C, 3, 3, 2)]),
    ]
    alignments = align_elements(docs, C)
    assert len(alignments) == 2
    kirsten = alignments[1]
    assert {a: m.element_id for a, m in kirsten.members.items()} == {"a": 4, "b": 5, "c": 2}
    assert kirsten.pairwise_j[("a", "b")] == 1.0
    assert kirsten.pairwise_j[("a", "c")] == 0.5


def test_one_member_per_annotator_per_cluster():
    # b splits what a tags as one element
    docs = [
        token_doc("a", [(P, 0, 0, 1), (P, 1, 1, 1)]),
        token_doc("b", [(P, 0, 0, 1), (P, 1, 1, 2)]),
    ]
    alignments = align_elements(docs, P)
    assert len(alignments) == 2
    assert [a.pairwise_j[("a", "b")] for a in alignments] == [0.5, 0.0]


def test_surface_form_mode():
    text = "he saw he left he"
    docs = [
        token_doc("a", [(C, 0, 0, 1), (C, 2, 2, 1)], text=text),
        token_doc("b", [(C, 0, 0, 1)], text=text),
    ]
    [positions] = align_elements(docs, C, mode="positions")
    [forms] = align_elements(docs, C, mode="forms")
    assert positions.mean_j == 0.5
    assert forms.mean_j == 1.0


def test_annotator_subset():
    docs = [token_doc(a, [(C, 0, 0, 1)]) for a in ("a", "b", "c")]
    [alignment] = align_elements(docs, C, annotators=["c", "a"])
    assert list(alignment.pairwise_j) == [("c", "a")]
    with pytest.raises(UsageError):
        align_elements(docs, C, annotators=["a", "zz"])


def test_unsupported_kinds_and_modes():
    docs = [token_doc(a, []) for a in ("a", "b")]
    for kind in (TagKind.TIME, TagKind.SWITCH, TagKind.TEXT_WORLD):
        with pytest.raises(UnsupportedKindError):
            align_elements(docs, kind)
    with pytest.raises(UsageError):
        align_elements(docs, C, mode="lemmas")


def test_scripted_corpus_means_are_exact_averages():
    docs = scripted_corpus()
    alignments = align_elements(docs, C)
    assert alignments
    for alignment in alignments:
        assert len(alignment.pairwise_j) == 15
        assert alignment.mean_j == sum(alignment.pairwise_j.values()) / 15
        assert all(0.0 <= j <= 1.0 for j in alignment.pairwise_j.values())
    # annotator 6 relabels character ids yet its main character still clusters
    first = alignments[0]
    assert all(m is not None for m in first.members.values())
