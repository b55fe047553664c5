"""Tabular actor-critic agents and a small beta-VAE encoder."""
from .policy import (
    SoftmaxPolicy,
    ValueTable,
    discounted_return,
    estimate_values,
    policy_gradient,
    softmax,
    tail_returns,
    trajectory_gradient,
)
from .vae import (
    GaussianVae,
    VaeConfig,
    elbo,
    elbo_terms,
    kl_term,
    mean_elbo,
    train_encoder,
    vae_gradient,
)
from .actor_critic import (
    Representation,
    RepresentationKind,
    TrainConfig,
    TrainResult,
    build_representation,
    learning_curve,
    observation_vectors,
    run_episode,
    train_actor_critic,
    view_of,
)

__all__ = [name for name in dir() if not name.startswith("_")]
