"""Desk-scale synthetic data generators: a per-class Gaussian mixture sampler
and an MLP GAN trainer with several adversarial objectives."""

from .base import MATCH_REAL, UNIFORM, TableTemplate, largest_remainder
from .gan import (Batch, GanGenerator, GanSpec, TrainTrace, d_terms, discriminator_objective,
                  g_terms, gan_sample, generator_objective, gradient_penalty, train_gan,
                  vanilla_gan_risk)
from .gmm import ClassMixture, GmmClassSampler, fit_gmm_sampler, fit_mixture, sample
from .io import generator_from_dict, generator_to_dict, load_generator, save_generator
from .nn import MLP

__all__ = [
    "MATCH_REAL", "UNIFORM", "TableTemplate", "largest_remainder",
    "Batch", "GanGenerator", "GanSpec", "TrainTrace", "d_terms", "discriminator_objective",
    "g_terms", "gan_sample", "generator_objective", "gradient_penalty", "train_gan",
    "vanilla_gan_risk",
    "ClassMixture", "GmmClassSampler", "fit_gmm_sampler", "fit_mixture", "sample",
    "generator_from_dict", "generator_to_dict", "load_generator", "save_generator",
    "MLP",
]
