"""Deep linear networks trained by gradient descent with weight decay on
synthetic low-dimensional inverse problems."""

from ._core import (
    ConfigError,
    CsvError,
    DeepNet,
    NetDims,
    Param,
    ProblemInstance,
    aggregate_csv,
    assemble,
    child_seed,
    derive_hyperparams,
    gamma_cap,
    gaussian,
    gen_basis,
    gen_coefficients,
    gen_measurement,
    generate_instance,
    grad_check,
    gradients,
    init_fanin,
    init_standard_normal,
    loss,
    numerical_rank,
    off_subspace_error,
    op_norm_power,
    oracle_map,
    oracle_noise_error,
    pinv,
    plot_csv,
    preset_config,
    recon_error,
    reduce_samples,
    reparameterize,
    run_experiment,
    singular_values,
    tau_upper_bound,
    test_robustness,
    train,
)

__all__ = [name for name in dir() if not name.startswith("_")]
