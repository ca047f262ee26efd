"""Ring-key embedding, classification and the three-way recovery experiment."""

import numpy as np
import pytest
import torch

from fixinv.models import pair_from_matrices
from fixinv.utils.errors import DimensionMismatch, EmptyInput, EmptyStrategies, InvalidRadius, InvalidSpec
from fixinv.watermark import (LatentGrid, RingKey, WatermarkConfig, classify_ring, embed_ring, key_pattern,
                              make_keys, ring_distance, ring_mask, run_watermark_experiment)


def random_grid(seed, h=8, w=8):
    gen = torch.Generator().manual_seed(seed)
    return LatentGrid(torch.randn(h, w, generator=gen, dtype=torch.float64))


@pytest.fixture
def keys():
    return make_keys(3, [1, 3], 2.0, 1000)


class TestRingMask:

    def test_radius_one_bins(self):
        mask = ring_mask((8, 8), [1])
        # (±1, 0), (0, ±1), (±1, ±1) all round to radius 1
        assert int(mask.sum()) == 8
        assert bool(mask[0, 1]) and bool(mask[7, 0]) and bool(mask[1, 1])
        assert not bool(mask[0, 0])

    def test_mask_is_symmetric_under_negation(self):
        mask = ring_mask((8, 8), [1, 3])
        idx = (-torch.arange(8)) % 8
        assert torch.equal(mask, mask[idx][:, idx])

    @pytest.mark.parametrize('radius', [0, 4, 9])
    def test_invalid_radius(self, radius):
        with pytest.raises(InvalidRadius):
            ring_mask((8, 8), [radius])


class TestEmbedRing:

    def test_ring_coefficients_equal_pattern(self, keys):
        for key in keys:
            z = embed_ring(random_grid(key.key_id), key)
            mask, pattern = key_pattern(key, z.shape)
            spec = torch.fft.fft2(z.values)
            np.testing.assert_allclose(spec[mask].numpy(), pattern[mask].numpy(), rtol=0, atol=1e-10)
            assert ring_distance(z, key) <= 1e-10

    def test_pattern_is_hermitian(self, keys):
        for key in keys:
            mask, pattern = key_pattern(key, (8, 8))
            spec = torch.fft.fft2(random_grid(5).values)
            spec = torch.where(mask, pattern, spec)
            assert float(torch.fft.ifft2(spec).imag.abs().max()) <= 1e-12

    def test_off_ring_bins_untouched(self, keys):
        z = random_grid(3)
        out = embed_ring(z, keys[0])
        mask, _ = key_pattern(keys[0], z.shape)
        before, after = torch.fft.fft2(z.values), torch.fft.fft2(out.values)
        np.testing.assert_allclose(after[~mask].numpy(), before[~mask].numpy(), rtol=0, atol=1e-10)

    def test_zero_amplitude_is_identity(self):
        key = RingKey(key_id=0, radii=(1, 3), amplitude=0.0, phase_seed=1000)
        z = random_grid(1)
        np.testing.assert_allclose(embed_ring(z, key).values.numpy(), z.values.numpy(), rtol=0, atol=1e-12)

    def test_fft_round_trip(self):
        for seed in range(50):
            z = random_grid(seed).values
            np.testing.assert_allclose(torch.fft.ifft2(torch.fft.fft2(z)).real.numpy(), z.numpy(),
                                       rtol=0, atol=1e-10)

    def test_vector_round_trip(self):
        v = torch.arange(64, dtype=torch.float64)
        grid = LatentGrid.from_vector(v, 8, 8)
        assert float(grid.values[1, 0]) == 8.0
        assert torch.equal(grid.to_vector(), v)
        with pytest.raises(DimensionMismatch):
            LatentGrid.from_vector(v, 4, 8)


class TestClassifyRing:

    def test_distinct_keys_are_separated(self, keys):
        size = int(ring_mask((8, 8), [1, 3]).sum())
        for a in keys:
            for b in keys:
                if a.key_id < b.key_id:
                    z = embed_ring(random_grid(0), a)
                    assert ring_distance(z, b) >= 2.0 * np.sqrt(size) / 2

    def test_clean_embedding_is_recovered(self, keys):
        for seed in range(10):
            for key in keys:
                assert classify_ring(embed_ring(random_grid(seed), key), keys) == key.key_id

    def test_key_order_does_not_matter(self, keys):
        z = embed_ring(random_grid(2), keys[1])
        assert classify_ring(z, list(reversed(keys))) == classify_ring(z, keys) == 1

    def test_ties_go_to_lowest_id(self):
        twins = [RingKey(key_id=i, radii=(1,), amplitude=1.0, phase_seed=7) for i in (4, 2, 9)]
        assert classify_ring(random_grid(0), twins) == 2

    def test_no_keys(self):
        with pytest.raises(EmptyInput):
            classify_ring(random_grid(0), [])

    def test_single_key_is_rejected(self, keys):
        with pytest.raises(InvalidSpec):
            classify_ring(embed_ring(random_grid(0), keys[0]), keys[:1])


class TestWatermarkExperiment:

    def test_zero_distortion_pair(self):
        eye = torch.eye(64, dtype=torch.float64)
        config = WatermarkConfig(trials=12)
        outcomes = run_watermark_experiment(config, pair=pair_from_matrices(eye, eye))
        assert set(outcomes) == {'EncoderOnly', 'GradBased', 'GradFree'}
        for outcome in outcomes.values():
            assert outcome.accuracy == 1.0
            assert outcome.confusion == [[4, 0, 0], [0, 4, 0], [0, 0, 4]]

    def test_no_strategies(self):
        with pytest.raises(EmptyStrategies):
            run_watermark_experiment(WatermarkConfig(strategies=[]))

    def test_grid_must_match_latent(self):
        eye = torch.eye(16, dtype=torch.float64)
        with pytest.raises(DimensionMismatch):
            run_watermark_experiment(WatermarkConfig(trials=1), pair=pair_from_matrices(eye, eye))

    def test_deterministic(self):
        config = WatermarkConfig(trials=6, strategies=['EncoderOnly', 'GradFree'])
        a = run_watermark_experiment(config)
        b = run_watermark_experiment(config.model_copy(update={'max_workers': 1}))
        assert {k: v.to_dict() for k, v in a.items()} == {k: v.to_dict() for k, v in b.items()}

    @pytest.mark.slow
    def test_default_grid(self):
        outcomes = run_watermark_experiment(WatermarkConfig())
        free, based, enc = (outcomes[s].accuracy for s in ('GradFree', 'GradBased', 'EncoderOnly'))
        assert free >= enc
        assert abs(free - based) <= 0.05
        for outcome in outcomes.values():
            assert len(outcome.confusion) == 3
            assert sum(map(sum, outcome.confusion)) == 100
            assert [sum(row) for row in outcome.confusion] == [34, 33, 33]
