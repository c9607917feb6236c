from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from hclab.linalg import basis_vector, cvec, norm, op_norm
from hclab.zoo import (
    Diagonal,
    DirectSum,
    Identity,
    UnknownOperatorError,
    WeightedBackwardShift,
    ZooError,
    check_guard,
    direct_sum,
    exponent_cap,
    identity_plus,
    make_operator,
    rank_one,
    weighted_backward_shift,
    zoo_entries,
)
from hclab.zoo import GuardBandError


def e(i, d):
    return basis_vector(i, d)


class TestMaterialize:
    def test_doubled_shift_matrix(self):
        T = make_operator("rolewicz:2.0")
        expected = np.array([[0, 2, 0], [0, 0, 2], [0, 0, 0]], dtype=complex)
        assert np.array_equal(T.materialize(3), expected)

    def test_diagonal(self):
        D = Diagonal(lambda i: 1.0 / i)
        assert np.array_equal(D.materialize(3), np.diag([1.0, 0.5, 1 / 3]).astype(complex))

    def test_identity_plus_shift(self):
        T = identity_plus(WeightedBackwardShift(1.0))
        assert np.array_equal(T.materialize(2), np.array([[1, 1], [0, 1]], dtype=complex))

    def test_cache_read_only(self):
        T = make_operator("rolewicz:2.0")
        M = T.materialize(4)
        with pytest.raises(ValueError):
            M[0, 0] = 5.0

    def test_concurrent_materialize_agrees(self):
        T = make_operator("maclane")
        with ThreadPoolExecutor(max_workers=4) as pool:
            mats = list(pool.map(lambda _: T.materialize(12), range(8)))
        assert all(np.array_equal(m, mats[0]) for m in mats)


class TestShiftAction:
    def test_plain_shift_action(self):
        T = weighted_backward_shift(1.0)
        assert np.array_equal(T.materialize(4) @ e(2, 4), e(1, 4))

    def test_rolewicz_kernel(self):
        T = make_operator("rolewicz:2.0")
        assert norm(T.materialize(4) @ e(1, 4)) == 0.0

    def test_maclane_action(self):
        T = make_operator("maclane")
        assert np.array_equal(T.materialize(4) @ e(3, 4), 2.0 * e(2, 4))
        # (Tx)_i = i * x_{i+1} against a hand expansion
        x = cvec([1, 2, 3, 4])
        assert np.array_equal(T.materialize(4) @ x, cvec([2, 6, 12, 0]))


class TestRankOne:
    def test_definition(self):
        op = rank_one(e(1, 4), e(2, 4))
        assert np.array_equal(op.materialize(4) @ e(2, 4), e(1, 4))
        assert norm(op.materialize(4) @ e(1, 4)) == 0.0

    def test_hs_norm_is_product_of_norms(self):
        g = 2.0 * e(1, 5)
        h = cvec([0, 3.0, 0, 0, 0])
        M = rank_one(g, h).materialize(5)
        # brute column sum for the Hilbert-Schmidt norm
        brute = np.sqrt(sum(norm(M @ e(i, 5)) ** 2 for i in range(1, 6)))
        assert brute == pytest.approx(6.0, rel=1e-12)

    def test_rejects_zero_factor(self):
        with pytest.raises(ZooError):
            rank_one(np.zeros(3), e(1, 3))


class TestDirectSum:
    def test_single_copy_is_same_operator(self):
        T = make_operator("rolewicz:2.0")
        S = direct_sum(T, 1)
        for d in (2, 5, 9):
            assert np.array_equal(S.materialize(d), T.materialize(d))

    def test_blockwise_action(self):
        T = make_operator("rolewicz:2.0")
        S = direct_sum(T, 2)
        db = 4
        x = np.concatenate([e(2, db), e(2, db)])
        out = S.materialize(2 * db) @ x
        assert np.array_equal(out, np.concatenate([2 * e(1, db), 2 * e(1, db)]))

    def test_norm_matches_single_block(self):
        T = make_operator("rolewicz:2.0")
        S = direct_sum(T, 3)
        assert op_norm(S.materialize(6)) == pytest.approx(op_norm(T.materialize(2)), abs=1e-12)

    def test_dimension_must_divide(self):
        S = direct_sum(make_operator("identity"), 3)
        with pytest.raises(ZooError):
            S.materialize(7)


class TestTruncationConsistency:
    @pytest.mark.parametrize(
        "op",
        [
            make_operator("rolewicz:2.0"),
            make_operator("maclane"),
            Diagonal(lambda i: 1.0 / i),
            rank_one(cvec([1, 2j, 0.5]), cvec([0.5, 0, 1])),
        ],
        ids=["shift", "maclane", "diagonal", "rank-one"],
    )
    def test_top_left_block(self, op):
        big = op.materialize(10)
        for k in (3, 5, 8):
            assert np.array_equal(big[:k, :k], op.materialize(k))

    def test_shift_power_exact_inside_guard(self):
        # applying the truncated matrix equals the untruncated action for
        # vectors supported away from the edge
        T = make_operator("rolewicz:2.0")
        d = 12
        x = cvec([1, -2, 3j, 0.5])
        x = np.concatenate([x, np.zeros(d - 4, dtype=complex)])
        M = T.materialize(d)
        out = M @ M @ M @ x
        bigger = T.materialize(d + 10)
        xb = np.concatenate([x, np.zeros(10, dtype=complex)])
        expected = bigger @ bigger @ bigger @ xb
        assert np.array_equal(out, expected[:d])


class TestRightInverse:
    @pytest.mark.parametrize("weight", [1.0, 2.0, 0.5, 2.0j], ids=str)
    def test_exact_right_inverse_dyadic(self, weight):
        T = WeightedBackwardShift(weight)
        S = T.right_inverse
        d = 8
        prod = T.materialize(d) @ S.materialize(d)
        expected = np.eye(d, dtype=complex)
        expected[-1, -1] = 0.0  # e_d is annihilated at the truncation edge
        assert np.array_equal(prod, expected)

    def test_left_inverse_off_first_coordinate(self):
        T = WeightedBackwardShift(2.0)
        S = T.right_inverse
        d = 6
        prod = S.materialize(d) @ T.materialize(d)
        for i in range(2, d + 1):
            assert np.array_equal(prod @ e(i, d), e(i, d))
        assert norm(prod @ e(1, d)) == 0.0

    def test_general_weights_near_exact(self):
        T = make_operator("maclane")
        S = T.right_inverse
        d = 10
        prod = T.materialize(d) @ S.materialize(d)
        expected = np.eye(d)
        expected[-1, -1] = 0.0
        assert np.allclose(prod, expected, atol=5e-16)

    def test_zero_weight_rejected(self):
        T = WeightedBackwardShift(lambda i: 0.0 if i == 2 else 1.0)
        with pytest.raises(ZooError):
            T.right_inverse.materialize(4)

    def test_zero_constant_rejected_at_request(self):
        with pytest.raises(ZooError):
            WeightedBackwardShift(0.0).right_inverse


class TestNormFormula:
    @pytest.mark.parametrize(
        "op",
        [
            make_operator("rolewicz:2.0"),
            make_operator("maclane"),
            Diagonal(lambda i: 1.0 / i),
            DirectSum(WeightedBackwardShift(1.5), 2),
        ],
        ids=["rolewicz", "maclane", "diagonal", "direct-sum"],
    )
    def test_matches_svd(self, op):
        for d in (8, 12):
            formula = op.norm_formula(d)
            assert formula is not None
            assert abs(formula - op_norm(op.materialize(d))) <= 1e-9


class TestGuards:
    def test_weight_guard_refuses_before_allocating(self):
        T = make_operator("maclane")
        with pytest.raises(ZooError, match="refusing"):
            T.materialize(2_000_000)

    def test_check_guard_names_required_dim(self):
        T = make_operator("rolewicz:2.0")
        with pytest.raises(GuardBandError) as err:
            check_guard(T, [e(3, 8)], 10, 8)
        assert err.value.required == 13

    def test_exponent_cap(self):
        T = make_operator("rolewicz:2.0")
        assert exponent_cap(T, [e(2, 16)], 16, 64) == 14
        assert exponent_cap(make_operator("identity"), [e(2, 16)], 16, 64) == 64

    def test_direct_sum_guard_is_per_block(self):
        S = direct_sum(make_operator("rolewicz:2.0"), 2)
        db = 8
        x = np.concatenate([e(2, db), e(2, db)])
        check_guard(S, [x], 6, 2 * db)  # 2 + 6 <= 8
        with pytest.raises(GuardBandError):
            check_guard(S, [x], 7, 2 * db)


class TestCombinators:
    def test_scaled_matrix_and_norm(self):
        from hclab.zoo import Scaled

        B = WeightedBackwardShift(1.0)
        T = Scaled(2j, B)
        assert np.array_equal(T.materialize(4), 2j * B.materialize(4))
        assert T.norm_formula(6) == pytest.approx(2.0)

    def test_scaled_right_inverse(self):
        from hclab.zoo import Scaled

        T = Scaled(2.0, WeightedBackwardShift(1.0))
        S = T.right_inverse
        d = 5
        prod = T.materialize(d) @ S.materialize(d)
        expected = np.eye(d, dtype=complex)
        expected[-1, -1] = 0.0
        assert np.array_equal(prod, expected)

    def test_composition_is_matrix_product(self):
        from hclab.zoo import Composed

        B = WeightedBackwardShift(1.0)
        T = Composed([B, B])
        assert T.shift_width == 2
        assert np.array_equal(T.materialize(5), B.materialize(5) @ B.materialize(5))

    def test_apply_convenience(self):
        T = make_operator("rolewicz:2.0")
        assert np.array_equal(T.apply(e(2, 4)), 2 * e(1, 4))


class TestRegistry:
    def test_known_ids_resolve(self):
        for op_id in ("identity", "backshift", "rolewicz:3.0", "salas:ones", "maclane", "diag:0.25"):
            assert make_operator(op_id).materialize(4).shape == (4, 4)

    def test_unknown_id_lists_known(self):
        with pytest.raises(UnknownOperatorError, match="known ids"):
            make_operator("frobnicate:1")

    def test_listing_nonempty(self):
        entries = zoo_entries()
        assert len(entries) >= 5
        assert all(len(row) == 2 for row in entries)

    def test_identity_right_inverse_is_itself(self):
        T = Identity()
        assert T.right_inverse is T
