import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from galileo.errors import CodeRangeError, DegenerateEvidenceWarning, SchemaError
from galileo.model import (AttributeSpec, ClusterAssignment, Component, Dataset, MixtureModel,
                           Schema, component_probability, normalize_log, posterior,
                           record_likelihood)

from conftest import make_dataset, make_schema


def comp(*counts, prior=1.0):
    return Component([np.asarray(c, float) for c in counts], float(np.sum(counts[0])), prior)


class TestSchema:
    def test_offsets_and_width(self):
        s = make_schema([2, 3, 1])
        assert s.offsets.tolist() == [0, 2, 5, 6]
        assert s.width == 6
        assert s.column_attribute.tolist() == [0, 0, 1, 1, 1, 2]

    def test_duplicate_names_rejected(self):
        with pytest.raises(SchemaError):
            Schema.from_values([("a", ["x"]), ("a", ["y"])])

    def test_duplicate_values_rejected(self):
        with pytest.raises(SchemaError):
            AttributeSpec("a", ("x", "x"))

    def test_empty_attribute_rejected(self):
        with pytest.raises(SchemaError):
            AttributeSpec("a", ())

    def test_code_lookup(self):
        a = AttributeSpec("colour", ("red", "blue"))
        assert a.code("blue") == 1
        with pytest.raises(CodeRangeError):
            a.code("green")


class TestDataset:
    def test_code_out_of_range(self):
        with pytest.raises(CodeRangeError):
            Dataset(make_schema([2]), np.array([[0], [2]]))

    def test_bad_weights(self):
        with pytest.raises(SchemaError):
            Dataset(make_schema([2]), np.array([[0], [1]]), np.array([1.0, 0.0]))

    def test_empty_rejected(self):
        with pytest.raises(SchemaError):
            Dataset(make_schema([2]), np.zeros((0, 1), int))

    def test_global_counts_weighted(self):
        ds = make_dataset([[0, 1], [1, 1], [0, 0]], weights=[2.0, 1.0, 1.0])
        assert ds.global_counts().tolist() == [3.0, 1.0, 1.0, 3.0]
        assert ds.total_weight == 4.0

    def test_collapse_preserves_weight(self):
        ds = make_dataset([[0, 1], [0, 1], [1, 0], [0, 1]])
        col, inv = ds.collapsed()
        assert col.n_records == 2
        assert col.total_weight == 4.0
        np.testing.assert_array_equal(col.codes[inv], ds.codes)
        np.testing.assert_allclose(col.global_counts(), ds.global_counts())


class TestComponentProbability:
    def test_direct_ratio(self):
        assert component_probability(comp([3, 1]), 0, 0) == 0.75

    def test_smoothing_by_hand(self):
        # (0 + 1) / (4 + 2)
        assert component_probability(comp([0, 4]), 0, 0, smoothing=1.0) == pytest.approx(1 / 6)

    @pytest.mark.parametrize("s", [0.0, 0.3, 5.0])
    def test_symmetric_counts(self, s):
        assert component_probability(comp([2, 2]), 0, 0, s) == pytest.approx(0.5)

    def test_out_of_range(self):
        with pytest.raises(CodeRangeError):
            component_probability(comp([2, 2]), 0, 2)

    def test_counts_must_match_size(self):
        with pytest.raises(ValueError):
            Component([np.array([1.0, 1.0])], 3.0, 1.0)

    @given(st.lists(st.floats(0, 100), min_size=2, max_size=6).filter(lambda c: sum(c) > 1e-3),
           st.floats(0, 10), st.floats(1e-3, 1e3))
    def test_normalized_and_scale_invariant(self, counts, s, scale):
        c = comp(counts)
        probs = [component_probability(c, 0, v, s) for v in range(len(counts))]
        assert math.isclose(sum(probs), 1.0, rel_tol=1e-9)
        scaled = comp(np.asarray(counts) * scale)
        p0 = [component_probability(scaled, 0, v) for v in range(len(counts))]
        q0 = [component_probability(c, 0, v) for v in range(len(counts))]
        np.testing.assert_allclose(p0, q0, rtol=1e-9, atol=1e-15)


class TestRecordLikelihood:
    def test_product_rule(self):
        c = comp([2, 2], [1, 3])
        assert record_likelihood(c, [0, 0]) == pytest.approx(math.log(0.125))

    def test_point_mass(self):
        c = comp([5, 0, 0], [0, 5])
        assert record_likelihood(c, [0, 1]) == 0.0

    def test_reconstructed_histogram(self):
        assert record_likelihood(comp([3, 3, 1, 1]), [0]) == pytest.approx(math.log(0.375))

    def test_zero_factor_is_minus_inf(self):
        assert record_likelihood(comp([4, 0]), [1]) == -math.inf

    @given(st.data())
    def test_permutation_equivariant(self, data):
        m = data.draw(st.integers(1, 5))
        counts = [data.draw(st.lists(st.integers(1, 9), min_size=2, max_size=4)) for _ in range(m)]
        # rescale every attribute to the same total
        total = 60.0
        counts = [np.asarray(c, float) / sum(c) * total for c in counts]
        x = [data.draw(st.integers(0, len(c) - 1)) for c in counts]
        order = data.draw(st.permutations(range(m)))
        a = record_likelihood(Component(counts, total, 1.0), x)
        b = record_likelihood(Component([counts[i] for i in order], total, 1.0), [x[i] for i in order])
        assert a == pytest.approx(b, rel=1e-12)


def mixture(likelihoods, priors):
    """Single binary attribute whose value 0 has the given likelihood per component."""
    counts = [[p, 1 - p] for p in likelihoods]
    return MixtureModel(make_schema([2]), counts, [1.0] * len(counts), priors)


class TestPosterior:
    def test_equal_priors(self):
        np.testing.assert_allclose(posterior(mixture([0.2, 0.1], [0.5, 0.5]), [0], 0.0),
                                   [2 / 3, 1 / 3])

    def test_identical_components(self):
        np.testing.assert_allclose(posterior(mixture([0.3] * 3, [1 / 3] * 3), [0], 0.0),
                                   [1 / 3] * 3)

    def test_priors_offset_likelihoods(self):
        np.testing.assert_allclose(posterior(mixture([0.1, 0.9], [0.9, 0.1]), [0], 0.0),
                                   [0.5, 0.5])

    def test_degenerate_evidence(self):
        m = mixture([0.0, 0.0], [0.5, 0.5])
        with pytest.warns(DegenerateEvidenceWarning):
            p = posterior(m, [0], 0.0)
        np.testing.assert_allclose(p, [0.5, 0.5])

    def test_no_underflow_with_many_attributes(self):
        # 400 factors of 1e-3 underflow a direct product
        schema = make_schema([1000] * 400)
        counts = np.zeros((2, schema.width))
        counts[0, schema.offsets[:-1]] = 1.0
        counts[0, schema.offsets[:-1] + 1] = 999.0
        counts[1, schema.offsets[:-1]] = 2.0
        counts[1, schema.offsets[:-1] + 1] = 998.0
        m = MixtureModel(schema, counts, [1000.0, 1000.0], [0.5, 0.5])
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            p = posterior(m, np.zeros(400, int), 0.0)
        assert p.sum() == pytest.approx(1.0)
        assert p[1] == pytest.approx(1.0)

    @given(st.lists(st.floats(-50, 50), min_size=1, max_size=8))
    def test_normalize_log_rows_sum_to_one(self, logits):
        p, deg = normalize_log(np.array(logits))
        assert not deg
        assert abs(p.sum() - 1.0) < 1e-9


class TestMixtureModel:
    def test_priors_must_sum_to_one(self):
        with pytest.raises(ValueError):
            MixtureModel(make_schema([2]), [[1, 1], [1, 1]], [2, 2], [0.5, 0.6])

    def test_select_renormalizes(self):
        m = MixtureModel(make_schema([2]), [[1, 1], [2, 0], [0, 1]], [2, 2, 1], [0.2, 0.3, 0.5])
        sub = m.select([2, 0])
        np.testing.assert_allclose(sub.priors, [0.5 / 0.7, 0.2 / 0.7])
        np.testing.assert_array_equal(sub.counts, [[0, 1], [1, 1]])

    def test_component_round_trip(self):
        schema = make_schema([2, 3])
        c = Component([np.array([1.0, 3.0]), np.array([0.0, 2.0, 2.0])], 4.0, 1.0)
        m = MixtureModel.from_components(schema, [c])
        back = m.component(0)
        assert back.effective_size == 4.0
        np.testing.assert_array_equal(back.counts[1], [0, 2, 2])

    def test_log_tables_relative_smoothing(self):
        m = MixtureModel(make_schema([2]), [[4.0, 0.0]], [4.0], [1.0])
        lt = m.log_tables(None)
        assert lt[0, 0] == pytest.approx(0.0, abs=1e-8)
        assert lt[0, 1] == pytest.approx(math.log(1e-9 / (1 + 2e-9)))

    def test_empty_component_reads_uniform(self):
        m = MixtureModel(make_schema([4]), [[0, 0, 0, 0], [1, 1, 1, 1]], [0.0, 4.0], [0.0, 1.0])
        np.testing.assert_allclose(m.log_tables(0.0)[0], np.log(0.25))


class TestClusterAssignment:
    def test_rows_must_sum_to_one(self):
        with pytest.raises(ValueError):
            ClusterAssignment(np.array([0, 1]), 2, np.array([[0.5, 0.4], [0, 1]]))

    def test_label_range(self):
        with pytest.raises(ValueError):
            ClusterAssignment(np.array([0, 2]), 2)

    def test_sizes(self):
        a = ClusterAssignment(np.array([0, 1, 1]), 3)
        assert a.sizes().tolist() == [1, 2, 0]
