"""Edge-cache drift detection and policy transfer."""

from edgecache._core import (
    ConfigError,
    convergence_trial,
    cosine_similarity,
    kl_divergence,
    recovery_trial,
    run,
    swap_ranks,
    trailing_means,
    zipf_probabilities,
)

__all__ = [
    "ConfigError",
    "convergence_trial",
    "cosine_similarity",
    "kl_divergence",
    "recovery_trial",
    "run",
    "swap_ranks",
    "trailing_means",
    "zipf_probabilities",
]
