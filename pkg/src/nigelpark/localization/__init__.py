from .likelihood_field import LikelihoodField, build_likelihood_field
from .mcl import (
    ParticleSet,
    MeasurementModel,
    KldParams,
    DEFAULT_ALPHAS,
    init_particles,
    motion_update,
    measurement_update,
    resample_adaptive,
    low_variance_resample,
    kld_sample_count,
    estimate,
)

__all__ = [
    "LikelihoodField",
    "build_likelihood_field",
    "ParticleSet",
    "MeasurementModel",
    "KldParams",
    "DEFAULT_ALPHAS",
    "init_particles",
    "motion_update",
    "measurement_update",
    "resample_adaptive",
    "low_variance_resample",
    "kld_sample_count",
    "estimate",
]
