"""Dual-discriminator GANs with tunable losses: closed-form theory
oracles, a small numpy training stack, and the ring-of-Gaussians
benchmark."""

from .data import RingSpec, mode_centers, ring_density, sample_noise, sample_ring
from .divergences import (
    ConvexGenerator,
    DiscreteDistribution,
    arimoto_divergence,
    cpe_induced_f,
    f_divergence,
    fc_closed_form,
    fc_generic,
    kl_family,
)
from .losses import (
    INFINITY,
    ONE,
    AlphaLimit,
    LossFn,
    LossPair,
    alpha_loss,
    alpha_loss_deriv,
    alpha_loss_fn,
    alpha_pair,
    custom_loss,
    d2_pair,
    make_loss_pair,
)
from .metrics import ModeReport, mode_coverage, symmetric_kl, wasserstein
from .theory import (
    DiscriminatorField,
    GanTheorySetting,
    balanced_discriminator_root,
    divergence_objective,
    divergence_objective_generic,
    kl_limit_report,
    objective_min_value,
    optimal_discriminators,
    pointwise_bruteforce_opt,
    value_function,
)
from .trainer import RunRecord, TrainConfig, batch_value_and_grads, resume, train
from .verify import run_verification

__version__ = "0.1.0"
