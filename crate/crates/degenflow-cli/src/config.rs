//! Scenario configuration: which flags each scenario needs, validated up
//! front so a bad invocation never produces partial output files.

use std::fmt;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::ValueEnum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    /// T1 from the jump datum on an even grid and on the next odd grid.
    ParityDemo,
    /// Eigenvalues, kernel dimension, and decomposition quality checks.
    Spectrum,
    /// Singularity exponent of the smoothing kernel, 1D and 2D.
    KernelExponent,
    /// Decay exponent of the edge-detector diffusivity near the jump set.
    DiffusivityExponent,
    /// Errors of the viscosity-regularized flow against the limit flow.
    ViscosityLimit,
    /// Long-time limits of the four flows on one seeded datum.
    FlowsCompare,
    /// Recovery-sequence energies and fitted rates across mollifier scales.
    GammaReport,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Scenario::ParityDemo => "parity-demo",
            Scenario::Spectrum => "spectrum",
            Scenario::KernelExponent => "kernel-exponent",
            Scenario::DiffusivityExponent => "diffusivity-exponent",
            Scenario::ViscosityLimit => "viscosity-limit",
            Scenario::FlowsCompare => "flows-compare",
            Scenario::GammaReport => "gamma-report",
        };
        f.write_str(name)
    }
}

/// Raw flag values as parsed; validation turns them into a scenario run.
#[derive(Debug)]
pub struct RawOptions {
    pub scenario: Scenario,
    pub m: Option<usize>,
    pub sigma: Option<f64>,
    pub eps: Option<f64>,
    pub t_final: Option<f64>,
    pub h_step: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub m: usize,
    pub sigma: f64,
    pub eps: f64,
    pub t_final: f64,
    pub seed: u64,
    pub out: PathBuf,
}

struct Needs {
    sigma: bool,
    eps: bool,
    t_final: bool,
    seed: bool,
}

fn needs(scenario: Scenario) -> Needs {
    match scenario {
        Scenario::ParityDemo | Scenario::Spectrum | Scenario::GammaReport => Needs {
            sigma: true,
            eps: false,
            t_final: false,
            seed: false,
        },
        Scenario::KernelExponent | Scenario::DiffusivityExponent => Needs {
            sigma: false,
            eps: true,
            t_final: false,
            seed: false,
        },
        Scenario::ViscosityLimit => Needs {
            sigma: true,
            eps: false,
            t_final: true,
            seed: false,
        },
        Scenario::FlowsCompare => Needs {
            sigma: true,
            eps: false,
            t_final: false,
            seed: true,
        },
    }
}

pub fn validate(raw: RawOptions) -> Result<ExperimentConfig> {
    let scenario = raw.scenario;
    let need = needs(scenario);

    let Some(m) = raw.m else {
        bail!("scenario {scenario} requires --m");
    };
    let Some(out) = raw.out else {
        bail!("scenario {scenario} requires --out");
    };

    macro_rules! take {
        ($field:ident, $flag:literal, $needed:expr, $default:expr) => {
            match (raw.$field, $needed) {
                (Some(v), true) => v,
                (None, true) => bail!("scenario {scenario} requires {}", $flag),
                (Some(_), false) => {
                    bail!("scenario {scenario} does not use {}", $flag)
                }
                (None, false) => $default,
            }
        };
    }

    let sigma = take!(sigma, "--sigma", need.sigma, 0.0);
    let eps = take!(eps, "--eps", need.eps, 0.0);
    let t_final = take!(t_final, "--t-final", need.t_final, 0.0);
    let seed = take!(seed, "--seed", need.seed, 0);
    if raw.h_step.is_some() {
        bail!("scenario {scenario} does not use --h-step");
    }

    match scenario {
        Scenario::ParityDemo | Scenario::DiffusivityExponent | Scenario::FlowsCompare => {
            if m % 2 != 0 || m == 0 {
                bail!("scenario {scenario} requires an even --m, got {m}");
            }
        }
        Scenario::ViscosityLimit => {
            if m % 2 == 0 {
                bail!("scenario {scenario} requires an odd --m, got {m}");
            }
        }
        Scenario::KernelExponent => {
            if m < 64 {
                bail!("scenario {scenario} requires --m >= 64, got {m}");
            }
        }
        Scenario::GammaReport => {
            if m < 1024 {
                bail!(
                    "scenario {scenario} requires --m >= 1024 to resolve the finest mollifier, got {m}"
                );
            }
        }
        Scenario::Spectrum => {
            if m == 0 {
                bail!("scenario {scenario} requires --m >= 1");
            }
        }
    }
    if need.sigma && !(0.0..1.0).contains(&sigma) {
        bail!("--sigma must lie in [0, 1), got {sigma}");
    }
    if need.eps && !(eps > 0.0 && eps < 1.0) {
        bail!("--eps must lie in (0, 1), got {eps}");
    }
    if need.t_final && t_final <= 0.0 {
        bail!("--t-final must be positive, got {t_final}");
    }

    Ok(ExperimentConfig {
        scenario,
        m,
        sigma,
        eps,
        t_final,
        seed,
        out,
    })
}
