from ._ganova import (
    Checkpoint,
    GanovaError,
    gradcheck,
    load_checkpoint,
    mixture_fidelity,
    mixture_samples,
    render_pgm,
    train_mixture,
)

__all__ = [
    "Checkpoint",
    "GanovaError",
    "gradcheck",
    "load_checkpoint",
    "mixture_fidelity",
    "mixture_samples",
    "render_pgm",
    "train_mixture",
]
