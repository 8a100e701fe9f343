"""Taxonomic-conditional protein sequence diffusion.

Thin python surface over the C++ core: residue codec, noise schedules,
diffusion algebra, the patchify-transformer denoiser, training, guided
sampling, checkpoints, FASTA IO, and taxonomy reclassification.
"""

from taxdiff._core import (
    ALPHABET,
    ModelConfig,
    ModelParams,
    Schedule,
    TrainConfig,
    TrainingState,
    __version__,
    decode,
    encode,
    forward,
    guided_epsilon,
    kl_gaussian_diag,
    load_checkpoint,
    loss_mse,
    loss_vlb,
    p_mean_variance,
    posterior_mean_variance,
    predict_x0_from_eps,
    q_sample,
    read_fasta,
    reclassify_taxdump,
    sample,
    save_checkpoint,
    toy_corpus,
    train,
    write_fasta,
)

__all__ = [
    "ALPHABET",
    "ModelConfig",
    "ModelParams",
    "Schedule",
    "TrainConfig",
    "TrainingState",
    "__version__",
    "decode",
    "encode",
    "forward",
    "guided_epsilon",
    "kl_gaussian_diag",
    "load_checkpoint",
    "loss_mse",
    "loss_vlb",
    "p_mean_variance",
    "posterior_mean_variance",
    "predict_x0_from_eps",
    "q_sample",
    "read_fasta",
    "reclassify_taxdump",
    "sample",
    "save_checkpoint",
    "toy_corpus",
    "train",
    "write_fasta",
]
