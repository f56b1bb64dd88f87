"""Activation zoo and the threshold-adaptive family.

Expected values were frozen from high-precision evaluations of the
defining formulas; structural identities are checked against
independently computed routes (brute-force statistics, the generalized
form, finite differences).
"""

import numpy as np
import pytest

from ashlab import activations as act
from ashlab import autodiff as ad
from ashlab import stats as st
from ashlab.tensor import RngState, Tensor, randn

SIGMOID_2 = 0.8807970779778823
SWISH_1 = 0.7310585786300049     # S(1)
PHI_1 = 0.8413447460685429
SOFTPLUS_1 = 1.3132616875182228
ELU_M1 = -0.6321205588285577     # e^-1 - 1


class TestSigmoid:
    def test_half_at_zero(self):
        assert act.sigmoid(Tensor([0.0])).data[0] == 0.5

    def test_reference_value(self):
        assert act.sigmoid(Tensor([2.0])).data[0] == pytest.approx(SIGMOID_2, abs=1e-15)

    def test_symmetry_identity(self):
        x = np.linspace(-30, 30, 2001)
        s = act.sigmoid(Tensor(x)).data + act.sigmoid(Tensor(-x)).data
        np.testing.assert_allclose(s, 1.0, atol=1e-15)

    def test_no_overflow_at_700(self):
        out = act.sigmoid(Tensor([-700.0, 700.0, -745.0, 745.0])).data
        assert np.all(np.isfinite(out))
        assert out[0] == pytest.approx(0.0, abs=1e-300)
        assert out[1] == 1.0


class TestBaselines:
    def test_relu(self):
        assert act.relu(Tensor([-3.0])).data[0] == 0.0
        assert act.relu(Tensor([3.0])).data[0] == 3.0

    def test_lrelu(self):
        out = act.lrelu(Tensor([-2.0, 2.0]), 0.01).data
        np.testing.assert_allclose(out, [-0.02, 2.0], atol=1e-15)

    def test_softplus(self):
        assert act.softplus(Tensor([1.0])).data[0] == pytest.approx(SOFTPLUS_1, abs=1e-14)
        big = act.softplus(Tensor([800.0])).data[0]
        assert big == pytest.approx(800.0, abs=1e-9)

    def test_elu(self):
        out = act.elu(Tensor([-1.0, 2.0])).data
        assert out[0] == pytest.approx(ELU_M1, abs=1e-14)
        assert out[1] == 2.0

    def test_selu_at_one(self):
        assert act.selu(Tensor([1.0])).data[0] == pytest.approx(1.0507, abs=1e-4)

    def test_gelu_and_swish_at_zero(self):
        assert act.gelu(Tensor([0.0])).data[0] == 0.0
        assert act.swish(Tensor([0.0])).data[0] == 0.0

    def test_gelu_uses_exact_normal_cdf(self):
        assert act.gelu(Tensor([1.0])).data[0] == pytest.approx(PHI_1, abs=1e-12)

    def test_swish_reference(self):
        assert act.swish(Tensor([1.0])).data[0] == pytest.approx(SWISH_1, abs=1e-14)

    def test_baseline_dispatch_unknown(self):
        with pytest.raises(ValueError):
            act.baseline("mish", Tensor([1.0]))


class TestHeaviside:
    def test_values(self):
        assert act.heaviside(Tensor([-1.0, 0.0, 2.0])).tolist() == [0.0, 0.0, 1.0]

    def test_gate_recovers_relu_off_zero(self):
        x = np.array([-2.0, -0.1, 0.3, 5.0])
        prod = act.heaviside(Tensor(x)).data * x
        assert np.array_equal(prod, np.maximum(x, 0.0))

    def test_gradient_blocked(self):
        t = ad.Tape()
        xv = t.variable(Tensor([-1.0, 0.5]), requires_grad=True)
        ad.backward(ad.sum_all(act.heaviside(xv)))
        assert np.all(xv.grad.data == 0.0)


class TestHardForm:
    def test_one_to_ten_top30(self):
        x = Tensor(np.arange(1.0, 11.0))
        z = st.z_from_percentile(30.0)
        assert st.compute_stats(x).threshold(z) == pytest.approx(7.006, abs=1e-3)
        out = act.hard_ash(x, z)
        assert out.tolist() == [0, 0, 0, 0, 0, 0, 0, 8, 9, 10]

    def test_huge_negative_z_is_identity(self):
        x = Tensor(np.random.default_rng(0).normal(size=64))
        assert np.array_equal(act.hard_ash(x, -1e6).data, x.data)

    def test_huge_positive_z_zeroes_bounded_input(self):
        x = Tensor(np.random.default_rng(0).normal(size=64))
        assert np.all(act.hard_ash(x, 1e6).data == 0.0)

    def test_boundary_element_is_kept(self):
        # mu = 2, sigma floored comparison: with z = 0, threshold = mu,
        # and the element equal to it must pass through.
        x = Tensor([1.0, 2.0, 3.0])
        out = act.hard_ash(x, 0.0)
        assert out.tolist() == [0.0, 2.0, 3.0]

    def test_step_form_drops_boundary(self):
        x = Tensor([1.0, 2.0, 3.0])
        out = act.heaviside_ash(x, 0.0)
        assert out.tolist() == [0.0, 0.0, 3.0]

    def test_purity(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            data = rng.normal(size=100)
            out = act.hard_ash(Tensor(data), float(rng.normal()))
            assert np.all((out.data == 0.0) | (out.data == data))

    def test_positive_homogeneity(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            data = rng.normal(size=100)
            c = float(rng.uniform(0.05, 20.0))
            z = float(rng.normal())
            lhs = act.hard_ash(Tensor(c * data), z).data
            rhs = c * act.hard_ash(Tensor(data), z).data
            np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)

    def test_explicit_stats_override(self):
        x = Tensor([0.0, 1.0, 2.0])
        out = act.hard_ash(x, 0.0, stats=st.InputStats(mu=1.5, sigma=0.0, n=3))
        assert out.tolist() == [0.0, 0.0, 2.0]

    def test_trainable_z_gets_zero_grad(self):
        t = ad.Tape()
        xv = t.variable(Tensor(np.random.default_rng(1).normal(size=32)), requires_grad=True)
        zv = t.variable(Tensor([0.3]), requires_grad=True)
        ad.backward(ad.sum_all(act.hard_ash(xv, zv)))
        assert np.all(zv.grad.data == 0.0)
        assert set(np.unique(xv.grad.data)) <= {0.0, 1.0}


class TestSmoothForm:
    def test_unit_element_value(self):
        # Input [1, -1] has mu = 0, sigma = 1, so the element at 1 with
        # z = 0, alpha = 1 is 1 * S(2).
        out = act.smooth_ash(Tensor([1.0, -1.0]), z_k=0.0, alpha=1.0)
        assert out.data[0] == pytest.approx(SIGMOID_2, abs=1e-15)

    def test_zeros_stay_zero(self):
        out = act.smooth_ash(Tensor(np.zeros(16)), z_k=0.7)
        assert np.all(out.data == 0.0)

    def test_zk_gradient_matches_fd(self):
        xx = Tensor(np.random.default_rng(10).normal(size=300))

        def f(zv):
            return ad.sum_all(act.smooth_ash(zv.tape.variable(xx), z_k=zv, alpha=1.2))

        rep = ad.fd_check(f, Tensor([0.4]))
        assert rep.max_rel_err < 1e-4
        assert abs(rep.analytic[0]) > 0.0

    def test_x_gradient_matches_fd_through_stats(self):
        x = Tensor(np.random.default_rng(11).normal(0, 1.5, 64))
        rep = ad.fd_check(lambda v: ad.sum_all(act.smooth_ash(v, z_k=0.2, alpha=1.5)), x)
        assert rep.max_rel_err < 1e-4

    def test_stop_stats_equals_frozen_threshold_gradient(self):
        # Freezing mu and sigma must give exactly the gradient of the
        # generalized form with constant a = 2*alpha, b = -2*alpha*thr.
        data = Tensor(np.random.default_rng(12).normal(size=128))
        alpha, z = 1.3, 0.25
        stats = st.compute_stats(data)

        t = ad.Tape()
        xv = t.variable(data, requires_grad=True)
        ad.backward(ad.sum_all(act.smooth_ash(xv, z_k=z, alpha=alpha, grad_mode="stop-stats")))
        g_stop = xv.grad.data.copy()

        t = ad.Tape()
        xv = t.variable(data, requires_grad=True)
        a = 2.0 * alpha
        b = -2.0 * alpha * (stats.mu + z * stats.sigma)
        ad.backward(ad.sum_all(act.gen_swish(xv, a, b)))
        np.testing.assert_allclose(g_stop, xv.grad.data, rtol=1e-9, atol=1e-12)

    def test_scale_relation(self):
        rng = np.random.default_rng(13)
        for _ in range(25):
            data = rng.normal(size=80)
            c = float(rng.uniform(0.1, 4.0))
            alpha = float(rng.uniform(0.5, 2.0))
            z = float(rng.normal() * 0.6)
            lhs = act.smooth_ash(Tensor(c * data), z_k=z, alpha=alpha).data
            rhs = c * act.smooth_ash(Tensor(data), z_k=z, alpha=alpha * c).data
            np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)

    def test_sandwich_bound(self):
        rng = np.random.default_rng(14)
        for _ in range(25):
            data = rng.normal(size=80)
            z = float(rng.normal() * 0.6)
            smooth = act.smooth_ash(Tensor(data), z_k=z).data
            hard = act.hard_ash(Tensor(data), z).data
            assert np.all(np.abs(smooth - hard) <= np.abs(data) + 1e-15)

    def test_tanh_and_sigmoid_forms_agree(self):
        x = Tensor(np.random.default_rng(15).normal(0, 3, 1000))
        for alpha in (0.5, 1.0, 4.0):
            sig = act.smooth_ash(x, z_k=0.3, alpha=alpha).data
            tnh = act.smooth_ash_tanh(x, z_k=0.3, alpha=alpha).data
            assert np.max(np.abs(sig - tnh)) < 1e-12

    def test_sharpness_limit(self):
        x = randn([5000], RngState(16))
        stats = st.compute_stats(x)
        thr = stats.threshold(0.25)
        off_band = np.abs(x.data - thr) >= 0.01
        smooth = act.smooth_ash(x, z_k=0.25, alpha=1000.0).data
        hard = act.hard_ash(x, 0.25, stats=stats).data
        assert np.max(np.abs(smooth - hard)[off_band]) < 1e-3

    def test_constant_input_uses_sigma_floor(self):
        out = act.smooth_ash(Tensor(np.full(8, 2.0)), z_k=0.0)
        # threshold = 2.0 exactly (z = 0), so the gate is S(0) = 1/2
        np.testing.assert_allclose(out.data, 1.0, atol=1e-15)


class TestStatsModes:
    def test_per_sample_rows_independent(self):
        a = np.random.default_rng(17).normal(size=16)
        b = a + 7.5  # same mask by shift invariance
        batch = Tensor(np.stack([a, b]))
        out = act.smooth_ash(batch, z_k=0.2).data
        row0 = act.smooth_ash(Tensor(a), z_k=0.2).data
        np.testing.assert_allclose(out[0], row0, atol=1e-14)
        # gates match between the shifted rows
        gate0 = out[0] / np.where(a == 0, 1, a)
        gate1 = out[1] / np.where(b == 0, 1, b)
        np.testing.assert_allclose(gate0, gate1, atol=1e-10)

    def test_per_channel_grouping(self):
        rng = np.random.default_rng(18)
        x = rng.normal(size=(2, 4, 4, 3))
        out = act.smooth_ash(Tensor(x), z_k=0.1, stats_mode="per-channel").data
        for b in range(2):
            for c in range(3):
                cell = x[b, :, :, c].reshape(-1)
                expect = act.smooth_ash(Tensor(cell), z_k=0.1).data
                np.testing.assert_allclose(out[b, :, :, c].reshape(-1), expect, atol=1e-13)

    def test_per_channel_needs_spatial_axes(self):
        with pytest.raises(ValueError):
            act.smooth_ash(Tensor(np.zeros((4, 8)) + 1.0), stats_mode="per-channel")

    def test_vector_z_per_channel(self):
        rng = np.random.default_rng(19)
        x = Tensor(rng.normal(size=(2, 4, 4, 3)))
        zvec = Tensor([0.1, -0.3, 0.6])
        t = ad.Tape()
        xv = t.variable(x)
        zv = t.variable(zvec, requires_grad=True)
        out = act.smooth_ash(xv, z_k=zv, stats_mode="per-channel")
        assert out.value.shape == (2, 4, 4, 3)
        ad.backward(ad.sum_all(out))
        assert zv.grad.shape == (3,)
        assert np.all(zv.grad.data != 0.0)

    def test_vector_z_gradients_match_fd(self):
        # A channel z varies inside per-sample stats groups, exercising
        # the group-sum coupling terms of the backward rule.
        rng = np.random.default_rng(20)
        zvec = Tensor([0.3, -0.4, 0.1, 0.5])
        for mode, shape in (("per-sample", (5, 4)), ("per-channel", (2, 3, 3, 4))):
            x = Tensor(rng.normal(size=shape))

            def f_x(v):
                zc = v.tape.variable(zvec)
                return ad.sum_all(act.smooth_ash(v, z_k=zc, stats_mode=mode))

            rep = ad.fd_check(f_x, x)
            assert rep.max_rel_err < 1e-4, f"{mode} x-grad: {rep.max_rel_err:.2e}"

            def f_z(zv):
                xc = zv.tape.variable(x)
                return ad.sum_all(act.smooth_ash(xc, z_k=zv, stats_mode=mode))

            rep = ad.fd_check(f_z, zvec)
            assert rep.max_rel_err < 1e-4, f"{mode} z-grad: {rep.max_rel_err:.2e}"


class TestGeneralizedSwish:
    def test_recovers_swish_exactly(self):
        grid = Tensor(np.linspace(-10, 10, 10_000))
        diff = np.abs(act.gen_swish(grid, 1.0, 0.0).data - act.swish(grid).data)
        assert np.max(diff) < 1e-12

    def test_a_zero_halves_input(self):
        x = Tensor(np.linspace(-5, 5, 101))
        np.testing.assert_array_equal(act.gen_swish(x, 0.0, 0.0).data, x.data / 2.0)

    def test_matches_smooth_form_algebraically(self):
        rng = np.random.default_rng(20)
        for _ in range(10):
            x = Tensor(rng.normal(rng.normal(), 1 + rng.uniform(), 400))
            alpha = float(rng.uniform(0.5, 2.5))
            z = float(rng.normal() * 0.7)
            s = st.compute_stats(x)
            lhs = act.gen_swish(x, 2 * alpha, -2 * alpha * (s.mu + z * s.sigma)).data
            rhs = act.smooth_ash(x, z_k=z, alpha=alpha, grad_mode="stop-stats").data
            assert np.max(np.abs(lhs - rhs)) < 1e-12

    def test_param_gradients(self):
        base = Tensor(np.random.default_rng(21).normal(size=100))
        for make in (lambda p: act.gen_swish(p.tape.variable(base), p, 0.2),
                     lambda p: act.gen_swish(p.tape.variable(base), 1.4, p)):
            rep = ad.fd_check(lambda p: ad.sum_all(make(p)), Tensor([0.8]))
            assert rep.max_rel_err < 1e-4


class TestLeakyForm:
    def test_zero_leak_identical_to_smooth(self):
        x = Tensor(np.random.default_rng(22).normal(size=64))
        lk = act.leaky_ash(x, z_k=0.5, leak=0.0).data
        sm = act.smooth_ash(x, z_k=0.5).data
        assert np.array_equal(lk, sm)

    def test_full_leak_is_identity(self):
        x = Tensor(np.random.default_rng(23).normal(size=64))
        assert np.max(np.abs(act.leaky_ash(x, z_k=0.5, leak=1.0).data - x.data)) < 1e-15

    def test_sharp_limit_passes_leak_below(self):
        x = Tensor(np.arange(1.0, 11.0))
        z = st.z_from_percentile(30.0)
        out = act.leaky_ash(x, z_k=z, leak=0.1, alpha=1000.0).data
        expect = np.array([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 8.0, 9.0, 10.0])
        np.testing.assert_allclose(out, expect, atol=1e-3)

    def test_negative_leak_rejected(self):
        with pytest.raises(ValueError):
            act.leaky_ash(Tensor([1.0, 2.0]), leak=-0.1)


class TestFixedForm:
    def test_fifty_percent_equals_zero_z(self):
        x = Tensor(np.random.default_rng(24).normal(size=256))
        fixed = act.fixed_ash(x, k=50.0).data
        smooth = act.smooth_ash(x, z_k=st.z_from_percentile(50.0)).data
        assert np.array_equal(fixed, smooth)

    def test_ninety_percent_sharp_gate_keeps_ninety(self):
        x = randn([20_000], RngState(3))
        out = act.fixed_ash(x, k=90.0, alpha=1000.0).data
        frac = float(np.mean(np.abs(out - x.data) < 1e-6))
        assert abs(frac - 0.9) < 0.02

    def test_no_trainable_parameters(self):
        spec = act.preset("f_ash_10")
        assert act.trainable_params(spec) == {}

    def test_k_validation(self):
        with pytest.raises(ValueError):
            act.fixed_ash(Tensor([1.0, 2.0]), k=0.0)
        with pytest.raises(ValueError):
            act.fixed_ash(Tensor([1.0, 2.0]), k=101.0)


class TestSpecSerialization:
    @pytest.mark.parametrize("obj", [
        {"kind": "relu"},
        {"kind": "lrelu", "slope": 0.2},
        {"kind": "prelu", "slope_init": 0.3},
        {"kind": "elu", "a": 0.7},
        {"kind": "smooth_ash", "alpha": 1.0, "z_k_init": 0.0, "grad_mode": "through-stats"},
        {"kind": "smooth_ash", "z_k_init": 0.5, "stats_mode": "per-channel",
         "trainable_alpha": True},
        {"kind": "smooth_ash", "per_channel_z": True, "channels": 8},
        {"kind": "gen_swish", "a_init": 2.0, "b_init": -1.0, "frozen": True},
        {"kind": "leaky_ash", "leak_init": 0.05},
        {"kind": "fixed_ash", "k": 25.0, "alpha": 4.0},
        {"kind": "hard_ash", "z_k_init": 0.1},
        {"kind": "heaviside_ash"},
    ])
    def test_round_trip(self, obj):
        spec = act.spec_from_json(obj)
        again = act.spec_from_json(act.spec_to_json(spec))
        assert spec == again

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            act.spec_from_json({"kind": "mish"})

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError):
            act.spec_from_json({"kind": "relu", "slope": 0.1})
        with pytest.raises(ValueError):
            act.spec_from_json({"kind": "smooth_ash", "zk": 0.0})

    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            act.spec_from_json({"kind": "smooth_ash", "alpha": -1.0})
        with pytest.raises(ValueError):
            act.spec_from_json({"kind": "fixed_ash", "k": 0.0})
        with pytest.raises(ValueError):
            act.spec_from_json({"kind": "smooth_ash", "per_channel_z": True})

    def test_presets(self):
        assert act.preset("ash").kind == "smooth_ash"
        assert act.preset("l_ash").kind == "leaky_ash"
        assert act.preset("f_ash_10").fixed.k == 10.0
        assert act.preset("f_ash_90").fixed.k == 90.0
        frozen = act.preset("gen_swish_frozen")
        assert frozen.gen == act.GeneralizedSwishParams(1.0, 0.0, True)
        with pytest.raises(ValueError):
            act.preset("not_an_activation")
        with pytest.raises(ValueError):
            act.preset("f_ash_abc")


class TestZooGradients:
    """Every differentiable activation passes the fd oracle off its kinks."""

    @pytest.mark.parametrize("name,f", [
        ("relu", lambda v: ad.sum_all(act.relu(v))),
        ("lrelu", lambda v: ad.sum_all(act.lrelu(v, 0.01))),
        ("softplus", lambda v: ad.sum_all(act.softplus(v))),
        ("elu", lambda v: ad.sum_all(act.elu(v))),
        ("selu", lambda v: ad.sum_all(act.selu(v))),
        ("gelu", lambda v: ad.sum_all(act.gelu(v))),
        ("swish", lambda v: ad.sum_all(act.swish(v))),
        ("gen_swish", lambda v: ad.sum_all(act.gen_swish(v, 1.3, -0.4))),
        ("smooth_ash", lambda v: ad.sum_all(act.smooth_ash(v, z_k=0.3, alpha=1.5))),
        ("leaky_ash", lambda v: ad.sum_all(act.leaky_ash(v, z_k=0.2, leak=0.1))),
        ("fixed_ash", lambda v: ad.sum_all(act.fixed_ash(v, k=30.0))),
    ])
    def test_fd(self, name, f):
        rng = np.random.default_rng(777)
        d = rng.normal(0, 2, 100)
        while np.any(np.abs(d) < 1e-5):
            d = np.where(np.abs(d) < 1e-5, rng.normal(0, 2, 100), d)
        rep = ad.fd_check(f, Tensor(d))
        assert rep.max_rel_err < 1e-4, f"{name}: {rep.max_rel_err:.2e}"
