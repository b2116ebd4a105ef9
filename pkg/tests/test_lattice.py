import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aliasmine import _lattice_py
from aliasmine.classify import NormalizedConfusionMatrix
from aliasmine.lattice import (
    BRUTE_FORCE_MAX,
    FuzzyPattern,
    PatternConcept,
    brute_force_concepts,
    concepts_to_json,
    enumerate_concepts,
    extent_to_intent,
    intent_to_extent,
    lattice_backend,
    leq,
    meet,
    pattern_score,
    row_pattern,
    write_concepts_json,
)
from tests.conftest import EXAMPLE_LABELS, random_row_stochastic

A15 = EXAMPLE_LABELS


def pat(*degrees):
    return FuzzyPattern(tuple(degrees), A15)


class TestFuzzyPattern:
    def test_length_and_range_validated(self):
        with pytest.raises(ValueError, match="degrees"):
            FuzzyPattern((0.5, 0.5), ("a",))
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            pat(0.1, 1.2, 0, 0, 0)


class TestMeet:
    def test_worked_example(self, example_matrix):
        p = row_pattern(example_matrix, "a1")
        q = row_pattern(example_matrix, "a2")
        assert meet(p, q).degrees == (0.4, 0.4, 0.0, 0.0, 0.0)

    def test_idempotent(self):
        p = pat(0.3, 0.7, 0.1, 0.0, 1.0)
        assert meet(p, p) == p

    def test_zero_vector_absorbs(self):
        p = pat(0.3, 0.7, 0.1, 0.0, 1.0)
        zero = pat(0, 0, 0, 0, 0)
        assert meet(p, zero) == zero

    def test_commutative_and_associative(self):
        p, q, r = pat(0.3, 0.7, 0, 1, 0.2), pat(0.5, 0.2, 1, 0, 0.2), pat(1, 1, 0.5, 0.5, 0.5)
        assert meet(p, q) == meet(q, p)
        assert meet(meet(p, q), r) == meet(p, meet(q, r))

    def test_label_space_mismatch_rejected(self):
        p = pat(0, 0, 0, 0, 0)
        q = FuzzyPattern((0.0,), ("other",))
        with pytest.raises(ValueError, match="label spaces"):
            meet(p, q)


class TestLeq:
    def test_componentwise_dominance(self):
        assert leq(pat(0.4, 0.4, 0, 0, 0), pat(0.6, 0.4, 0, 0, 0))

    def test_reflexive(self):
        p = pat(0.6, 0.4, 0, 0, 0)
        assert leq(p, p)

    def test_incomparable_rows(self, example_matrix):
        p = row_pattern(example_matrix, "a1")
        q = row_pattern(example_matrix, "a2")
        assert not leq(p, q) and not leq(q, p)

    def test_agrees_with_meet(self):
        p, q = pat(0.2, 0.4, 0, 0, 0.1), pat(0.3, 0.4, 0.2, 0, 0.5)
        assert leq(p, q) == (meet(p, q) == p)


class TestDerivationOperators:
    def test_pair_extent_to_intent(self, example_matrix):
        d = extent_to_intent({"a1", "a2"}, example_matrix)
        assert d.degrees == (0.4, 0.4, 0.0, 0.0, 0.0)

    def test_singleton_is_its_row(self, example_matrix):
        d = extent_to_intent({"a3"}, example_matrix)
        assert d.degrees == (0.0, 0.0, 0.8, 0.15, 0.05)

    def test_triple_extent_to_intent(self, example_matrix):
        d = extent_to_intent({"a1", "a2", "a4"}, example_matrix)
        assert d.degrees == (0.0, 0.05, 0.0, 0.0, 0.0)

    def test_unknown_label_and_empty_set_rejected(self, example_matrix):
        with pytest.raises(KeyError, match="zz"):
            extent_to_intent({"zz"}, example_matrix)
        with pytest.raises(ValueError, match="non-empty"):
            extent_to_intent(set(), example_matrix)

    def test_intent_to_extent_recovers_pair(self, example_matrix):
        assert intent_to_extent(pat(0.4, 0.4, 0, 0, 0), example_matrix) == {"a1", "a2"}

    def test_zero_pattern_covers_everyone(self, example_matrix):
        assert intent_to_extent(pat(0, 0, 0, 0, 0), example_matrix) == set(A15)

    def test_all_ones_covers_no_one(self, example_matrix):
        assert intent_to_extent(pat(1, 1, 1, 1, 1), example_matrix) == frozenset()

    def test_wrong_label_space_rejected(self, example_matrix):
        with pytest.raises(ValueError, match="labels"):
            intent_to_extent(FuzzyPattern((0.0,), ("other",)), example_matrix)


class TestEnumerateConcepts:
    def test_worked_example_family(self, example_matrix):
        concepts = enumerate_concepts(example_matrix, 0.0)
        extents = {c.extent for c in concepts}
        assert frozenset({"a1", "a2"}) in extents
        by_extent = {c.extent: c.intent.degrees for c in concepts}
        assert by_extent[frozenset({"a1", "a2"})] == (0.4, 0.4, 0.0, 0.0, 0.0)
        assert by_extent[frozenset()] == (1.0,) * 5
        assert len(concepts) == 12

    def test_equals_brute_force_on_worked_example(self, example_matrix):
        assert enumerate_concepts(example_matrix, 0.0) == brute_force_concepts(
            example_matrix
        )

    def test_every_concept_is_closed(self, example_matrix):
        for c in enumerate_concepts(example_matrix, 0.0):
            if c.extent:
                assert extent_to_intent(c.extent, example_matrix) == c.intent
            assert intent_to_extent(c.intent, example_matrix) == c.extent

    def test_canonical_order(self, example_matrix):
        concepts = enumerate_concepts(example_matrix, 0.0)
        keys = [(len(c.extent), tuple(sorted(c.extent))) for c in concepts]
        assert keys == sorted(keys)

    def test_min_score_equals_post_filtering(self, example_matrix):
        full = enumerate_concepts(example_matrix, 0.0)
        for threshold in (0.05, 0.2, 0.5, 1.0):
            pruned = enumerate_concepts(example_matrix, threshold)
            assert pruned == [
                c for c in full if pattern_score(c.intent) >= threshold
            ]

    def test_one_by_one_matrix(self):
        m = NormalizedConfusionMatrix(("a1",), np.array([[1.0]]))
        concepts = enumerate_concepts(m, 0.0)
        assert concepts == [
            PatternConcept(frozenset({"a1"}), FuzzyPattern((1.0,), ("a1",)))
        ]
        assert concepts == brute_force_concepts(m)

    def test_duplicate_rows_share_one_concept(self):
        rows = np.array([[0.5, 0.5], [0.5, 0.5]])
        m = NormalizedConfusionMatrix(("a", "b"), rows)
        concepts = enumerate_concepts(m, 0.0)
        assert concepts == brute_force_concepts(m)
        assert {c.extent for c in concepts} == {
            frozenset(),
            frozenset({"a", "b"}),
        }

    def test_negative_min_score_rejected(self, example_matrix):
        with pytest.raises(ValueError):
            enumerate_concepts(example_matrix, -0.1)


class TestBruteForce:
    def test_diagonal_family(self):
        m = NormalizedConfusionMatrix(("a", "b", "c"), np.eye(3))
        concepts = brute_force_concepts(m)
        extents = {c.extent for c in concepts}
        assert extents == {
            frozenset(),
            frozenset({"a"}),
            frozenset({"b"}),
            frozenset({"c"}),
            frozenset({"a", "b", "c"}),
        }
        full = next(c for c in concepts if len(c.extent) == 3)
        assert full.intent.degrees == (0.0, 0.0, 0.0)

    def test_size_guard(self):
        n = BRUTE_FORCE_MAX + 1
        m = NormalizedConfusionMatrix(
            tuple(f"a{i}" for i in range(n)), np.eye(n)
        )
        with pytest.raises(ValueError, match="limited"):
            brute_force_concepts(m)


class TestBackends:
    def test_backend_reports_a_name(self):
        assert lattice_backend() in ("compiled", "python")

    def test_twins_agree_bit_for_bit(self):
        try:
            from aliasmine import _lattice_cy
        except ImportError:
            pytest.skip("compiled core not built")
        rng = np.random.default_rng(99)
        for _ in range(40):
            n = int(rng.integers(1, 9))
            m = random_row_stochastic(rng, n)
            rows = [tuple(r) for r in m.rows.tolist()]
            assert _lattice_py.enumerate_closed(rows) == _lattice_cy.enumerate_closed(
                rows
            )

    def test_empty_table(self):
        assert _lattice_py.enumerate_closed([]) == []


class TestGaloisConnection:
    @settings(max_examples=200, deadline=None)
    @given(
        data=st.data(),
        n=st.integers(min_value=2, max_value=6),
    )
    def test_adjunction(self, data, n):
        rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
        m = random_row_stochastic(rng, n)
        subset = data.draw(
            st.sets(st.sampled_from(m.labels), min_size=1, max_size=n)
        )
        degrees = tuple(
            data.draw(
                st.lists(
                    st.sampled_from([0.0, 0.05, 0.25, 0.5, 0.75, 1.0]),
                    min_size=n,
                    max_size=n,
                )
            )
        )
        d = FuzzyPattern(degrees, m.labels)
        lhs = subset <= intent_to_extent(d, m)
        rhs = leq(d, extent_to_intent(subset, m))
        assert lhs == rhs

    def test_closure_grows_and_is_idempotent(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            n = int(rng.integers(2, 8))
            m = random_row_stochastic(rng, n)
            subset = set(
                rng.choice(m.labels, size=int(rng.integers(1, n + 1)), replace=False)
            )
            closed = intent_to_extent(extent_to_intent(subset, m), m)
            assert subset <= closed
            again = intent_to_extent(extent_to_intent(closed, m), m)
            assert again == closed

    def test_concept_order_is_antitone(self, example_matrix):
        # on closed pairs, extent inclusion and reversed intent dominance
        # are the same order
        concepts = enumerate_concepts(example_matrix, 0.0)
        nonempty = [c for c in concepts if c.extent]
        for c1 in nonempty:
            for c2 in nonempty:
                assert (c1.extent <= c2.extent) == leq(c2.intent, c1.intent)


class TestConceptExport:
    def test_json_schema_and_order(self, example_matrix, tmp_path):
        concepts = enumerate_concepts(example_matrix, 0.5)
        payload = concepts_to_json(concepts)
        assert payload[0].keys() == {"extent", "intent", "score"}
        sizes = [len(entry["extent"]) for entry in payload]
        assert sizes == sorted(sizes)
        pair = next(e for e in payload if e["extent"] == ["a1", "a2"])
        assert pair["score"] == pytest.approx(0.8)
        path = tmp_path / "concepts.json"
        write_concepts_json(path, concepts)
        assert json.loads(path.read_text()) == payload
