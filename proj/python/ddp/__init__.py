"""VAE patch prior and POCS reconstruction for undersampled MRI."""

from ._ddp import (
    CartesianMask,
    EncodingOperator,
    Error,
    InvalidArgument,
    Phantom,
    RadialTrajectory,
    VaeModel,
    binary_erode,
    cn,
    cnr,
    extract_training_patches,
    fft2,
    gen_cartesian_mask,
    gen_phantom,
    gen_radial_trajectory,
    ifft2,
    reconstruct,
    rmse,
    run_cli,
    simulate_coil_maps,
)

__all__ = [
    "CartesianMask",
    "EncodingOperator",
    "Error",
    "InvalidArgument",
    "Phantom",
    "RadialTrajectory",
    "VaeModel",
    "binary_erode",
    "cn",
    "cnr",
    "extract_training_patches",
    "fft2",
    "gen_cartesian_mask",
    "gen_phantom",
    "gen_radial_trajectory",
    "ifft2",
    "reconstruct",
    "rmse",
    "run_cli",
    "simulate_coil_maps",
]
