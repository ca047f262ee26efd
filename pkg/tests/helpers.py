"""Instance builders shared by the test modules."""

import torch

from fixinv.cli.experiment import make_instance
from fixinv.models import LinearPairSpec, LossySpectrum, PcaOptimal


def vec(*values):
    return torch.tensor(values, dtype=torch.float64)


def lossy_instance(seed, condition_number=100.0, pixel_dim=64, latent_dim=16):
    spec = LinearPairSpec(pixel_dim=pixel_dim, latent_dim=latent_dim,
                          variant=LossySpectrum(condition_number=condition_number))
    return make_instance(spec, seed)


def pca_instance(seed, pixel_dim=64, latent_dim=16):
    return make_instance(LinearPairSpec(pixel_dim=pixel_dim, latent_dim=latent_dim, variant=PcaOptimal()), seed)
