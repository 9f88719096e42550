"""Loss terms against frozen values and scalar loop oracles."""
import math

import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from regionswap.config import LossWeights
from regionswap.losses import (
    adv_disc_loss,
    adv_gen_loss,
    attr_bce,
    kl_loss,
    recon_l1,
    recon_l1_masked,
    total_loss,
)

from .helpers import (
    oracle_bce,
    oracle_disc,
    oracle_gen,
    oracle_kl,
    oracle_l1,
    oracle_l1_masked,
)

EPS = 1e-7


def _t(data):
    return torch.tensor(data, dtype=torch.float64)


def _log_var_for_sigma(sigma):
    # sampler std is exp(log_var / 2), so log_var = 2 log sigma
    return [[2.0 * math.log(s) for s in row] for row in sigma]


class TestFrozenValues:
    def test_kl_standard_normal_is_zero(self):
        assert float(kl_loss(_t([[0.0]]), _t([[0.0]]))) == 0.0

    def test_kl_unit_mean_unit_sigma(self):
        value = kl_loss(_t([[1.0]]), _t(_log_var_for_sigma([[1.0]])))
        assert abs(float(value) - 0.5) < 1e-12

    def test_kl_two_dims_sigma_two(self):
        value = kl_loss(_t([[0.0, 0.0]]), _t(_log_var_for_sigma([[2.0, 2.0]])))
        assert abs(float(value) - (1.0 - math.log(2.0))) < 1e-12

    def test_kl_standard_flag_uses_variance(self):
        log_var = _t(_log_var_for_sigma([[2.0]]))
        printed = float(kl_loss(_t([[0.0]]), log_var))
        standard = float(kl_loss(_t([[0.0]]), log_var, standard=True))
        assert abs(printed - 0.5 * (2.0 - math.log(2.0) - 1.0)) < 1e-12
        assert abs(standard - 0.5 * (4.0 - math.log(4.0) - 1.0)) < 1e-12

    def test_disc_loss_at_half(self):
        half = _t([0.5, 0.5])
        value = adv_disc_loss(half, [half, half], EPS)
        assert abs(float(value) - 3.0 * math.log(2.0)) < 1e-6

    def test_gen_loss_at_half(self):
        half = _t([0.5])
        value = adv_gen_loss([half, half], EPS)
        assert abs(float(value) - 2.0 * math.log(2.0)) < 1e-6

    def test_bce_single(self):
        value = attr_bce(_t([[1.0]]), _t([[0.5]]), EPS)
        assert abs(float(value) - math.log(2.0)) < 1e-6

    def test_bce_two_attrs(self):
        value = attr_bce(_t([[1.0, 0.0]]), _t([[0.9, 0.1]]), EPS)
        assert abs(float(value) - (-2.0 * math.log(0.9))) < 1e-9

    def test_total_with_unit_components(self):
        one = _t(1.0)
        value = total_loss(one, one, one, [one] * 4, one, one, one, one, LossWeights())
        assert float(value) == pytest.approx(12105.0, abs=1e-9)


class TestLoopOracles:
    def test_kl_matches_oracle(self):
        gen = torch.Generator().manual_seed(11)
        for _ in range(100):
            b = int(torch.randint(1, 5, (1,), generator=gen))
            d = int(torch.randint(1, 9, (1,), generator=gen))
            mu = torch.randn(b, d, generator=gen, dtype=torch.float64)
            lv = torch.randn(b, d, generator=gen, dtype=torch.float64)
            for standard in (False, True):
                ours = float(kl_loss(mu, lv, standard=standard))
                ref = oracle_kl(mu.tolist(), lv.tolist(), standard=standard)
                assert abs(ours - ref) <= 1e-6 * max(1.0, abs(ref))

    def test_l1_terms_match_oracle(self):
        gen = torch.Generator().manual_seed(12)
        for _ in range(100):
            b = int(torch.randint(1, 3, (1,), generator=gen))
            s = int(torch.randint(2, 7, (1,), generator=gen))
            x = torch.randn(b, 3, s, s, generator=gen, dtype=torch.float64)
            y = torch.randn(b, 3, s, s, generator=gen, dtype=torch.float64)
            mask = (torch.rand(b, 1, s, s, generator=gen) > 0.5).double()
            plain = float(recon_l1(x, y))
            assert abs(plain - oracle_l1(x.numpy(), y.numpy())) <= 1e-6
            masked = float(recon_l1_masked(x, y, mask, 0.5))
            ref = oracle_l1_masked(x.numpy(), y.numpy(), mask.numpy(), 0.5)
            assert abs(masked - ref) <= 1e-6

    def test_adv_terms_match_oracle(self):
        gen = torch.Generator().manual_seed(13)
        for _ in range(100):
            b = int(torch.randint(1, 5, (1,), generator=gen))
            p = int(torch.randint(1, 17, (1,), generator=gen))
            real = torch.rand(b, generator=gen, dtype=torch.float64)
            fake1 = torch.rand(b, p, generator=gen, dtype=torch.float64)
            fake2 = torch.rand(b, p, generator=gen, dtype=torch.float64)
            ours = float(adv_disc_loss(real, [fake1, fake2], EPS))
            ref = oracle_disc(real.numpy(), [fake1.numpy(), fake2.numpy()], EPS)
            assert abs(ours - ref) <= 1e-6 * max(1.0, abs(ref))
            ours_g = float(adv_gen_loss([fake1, fake2], EPS))
            ref_g = oracle_gen([fake1.numpy(), fake2.numpy()], EPS)
            assert abs(ours_g - ref_g) <= 1e-6 * max(1.0, abs(ref_g))

    def test_bce_matches_oracle(self):
        gen = torch.Generator().manual_seed(14)
        for _ in range(100):
            b = int(torch.randint(1, 5, (1,), generator=gen))
            a = int(torch.randint(1, 13, (1,), generator=gen))
            target = (torch.rand(b, a, generator=gen) > 0.5).double()
            prob = torch.rand(b, a, generator=gen, dtype=torch.float64)
            ours = float(attr_bce(target, prob, EPS))
            ref = oracle_bce(target.tolist(), prob.tolist(), EPS)
            assert abs(ours - ref) <= 1e-6 * max(1.0, abs(ref))


class TestClamping:
    def test_extreme_probabilities_stay_finite(self):
        zero = _t([0.0])
        one = _t([1.0])
        assert math.isfinite(float(adv_disc_loss(zero, [one, one], EPS)))
        assert math.isfinite(float(adv_gen_loss([zero], EPS)))
        assert math.isfinite(float(attr_bce(_t([[1.0]]), _t([[0.0]]), EPS)))
        expected = -math.log(EPS)
        assert float(adv_gen_loss([zero], EPS)) == pytest.approx(expected, rel=1e-9)


class TestProperties:
    @given(
        st.lists(st.floats(-3, 3), min_size=1, max_size=6),
        st.lists(st.floats(-3, 3), min_size=1, max_size=6),
        st.booleans(),
    )
    @settings(max_examples=60, deadline=None)
    def test_kl_nonnegative(self, mu, lv, standard):
        n = min(len(mu), len(lv))
        value = float(kl_loss(_t([mu[:n]]), _t([lv[:n]]), standard=standard))
        assert value >= -1e-12

    @given(st.integers(0, 2 ** 32 - 1), st.floats(0.0, 1.0))
    @settings(max_examples=40, deadline=None)
    def test_background_weighting_never_increases_l1(self, seed, beta):
        gen = torch.Generator().manual_seed(seed)
        x = torch.randn(2, 3, 4, 4, generator=gen, dtype=torch.float64)
        y = torch.randn(2, 3, 4, 4, generator=gen, dtype=torch.float64)
        mask = (torch.rand(2, 1, 4, 4, generator=gen) > 0.5).double()
        assert float(recon_l1_masked(x, y, mask, beta)) <= float(recon_l1(x, y)) + 1e-12

    @given(st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=20, deadline=None)
    def test_identical_images_have_zero_l1(self, seed):
        gen = torch.Generator().manual_seed(seed)
        x = torch.randn(1, 3, 5, 5, generator=gen, dtype=torch.float64)
        mask = torch.ones(1, 1, 5, 5, dtype=torch.float64)
        assert float(recon_l1(x, x)) == 0.0
        assert float(recon_l1_masked(x, x, mask, 0.5)) == 0.0
