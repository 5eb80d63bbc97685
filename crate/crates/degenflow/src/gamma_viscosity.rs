//! Mollifiers, viscosity-regularized energies, and the diagnostics for the
//! variational convergence of `E^m = E_{alpha + 1/m}` to `E_alpha`.
//!
//! The recovery sequence for a state `u` is its mollification at scale `m`
//! (support radius `1/m`, unit discrete mass). The report tracks, per
//! scale, the viscosity part `(1/m) * 1/2 ||grad u_m||^2` and the weighted
//! part `E_alpha(u_m)` of the regularized energy, together with log-log
//! rate fits across scales.

use crate::disc_ops::{delta_plus, discrete_energy, shifted_energy, State};
use crate::flows::{evolve, FlowKind};
use crate::grid::Grid1D;
use crate::weights::Weight;
use crate::Error;

/// Discrete bump kernel with unit mass, radial and radially non-increasing,
/// supported on a radius of `1/scale`.
#[derive(Clone, Debug)]
pub struct Mollifier {
    scale: usize,
    /// Samples at integer node offsets `-J..=J`.
    samples: Vec<f64>,
    half_width: usize,
    grid_m: usize,
}

impl Mollifier {
    pub fn scale(&self) -> usize {
        self.scale
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }
}

/// Build the standard compactly supported bump `exp(-1/(1-s^2))` at the
/// given scale, sampled on the grid and renormalized to unit discrete mass.
pub fn make_mollifier(grid: &Grid1D, scale: usize) -> Result<Mollifier, Error> {
    if scale == 0 {
        return Err(Error::InvalidParameter {
            what: "mollifier scale",
            why: "must be positive".into(),
        });
    }
    let d = grid.spacing();
    let radius = 1.0 / scale as f64;
    let half_width = (radius / d).floor() as usize;
    if half_width < 2 {
        return Err(Error::UnresolvedScale { scale, spacing: d });
    }
    let bump = |s: f64| -> f64 {
        if s.abs() < 1.0 {
            (-1.0 / (1.0 - s * s)).exp()
        } else {
            0.0
        }
    };
    let raw: Vec<f64> = (-(half_width as isize)..=half_width as isize)
        .map(|j| bump(j as f64 * d / radius))
        .collect();
    let total: f64 = raw.iter().sum::<f64>() * d;
    let samples = raw.iter().map(|v| v / total).collect();
    Ok(Mollifier {
        scale,
        samples,
        half_width,
        grid_m: grid.m(),
    })
}

/// Periodic discrete convolution `(u * phi)_i = sum_j phi_j u_{i-j} d_m`.
/// Preserves the mean exactly and contracts the weighted norm.
pub fn mollify(u: &State, mol: &Mollifier) -> Result<State, Error> {
    if u.grid().m() != mol.grid_m {
        return Err(Error::GridMismatch {
            expected: 2 * mol.grid_m,
            got: u.len(),
        });
    }
    let n = u.len();
    let d = u.grid().spacing();
    let hw = mol.half_width as isize;
    let v = u.values();
    let mut out = State::zeros(u.grid().clone());
    for i in 0..n as isize {
        let mut acc = 0.0;
        for (idx, j) in (-hw..=hw).enumerate() {
            let src = ((i - j) % n as isize + n as isize) % n as isize;
            acc += mol.samples[idx] * v[src as usize];
        }
        out.values_mut()[i as usize] = acc * d;
    }
    Ok(out)
}

/// Energy with viscosity: `1/2 sum (alpha_i + delta) [(delta_plus u)_i]^2 d_m`.
/// `delta = 0` reduces exactly to the plain weighted energy.
pub fn regularized_energy(u: &State, w: &Weight, delta: f64) -> Result<f64, Error> {
    if delta < 0.0 {
        return Err(Error::InvalidParameter {
            what: "viscosity delta",
            why: format!("must be nonnegative, got {delta}"),
        });
    }
    shifted_energy(u, w, delta)
}

/// Per-scale energies of the mollified recovery sequence and fitted rates.
#[derive(Clone, Debug)]
pub struct GammaReport {
    pub scales: Vec<usize>,
    /// Total regularized energy `E^{1/scale}(u_scale)` per scale.
    pub energies: Vec<f64>,
    /// Viscosity part `(1/scale) * 1/2 ||grad u_scale||^2` per scale.
    pub viscosity_terms: Vec<f64>,
    /// Weighted part `E_alpha(u_scale)` per scale.
    pub weighted_terms: Vec<f64>,
    /// `E_alpha(u)` of the unmollified state.
    pub limit_energy: f64,
    /// Whether `E_alpha(u_scale) <= E^{1/scale}(u_scale)` held at every scale.
    pub liminf_ok: bool,
    /// Log-log slope of the viscosity term against the scale.
    pub recovery_rate: Option<f64>,
    /// Log-log slope of the weighted term against the scale.
    pub energy_rate: Option<f64>,
}

fn rate_fit(scales: &[usize], values: &[f64]) -> Option<f64> {
    if values.iter().any(|&v| v <= 0.0) {
        return None;
    }
    let n = scales.len() as f64;
    let xs: Vec<f64> = scales.iter().map(|&s| (s as f64).ln()).collect();
    let ys: Vec<f64> = values.iter().map(|&v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys.iter())
        .map(|(x, y)| (x - mx) * (y - my))
        .sum();
    Some(sxy / sxx)
}

/// Evaluate the regularized energies of the mollified recovery sequence
/// across scales and fit the decay/growth rates.
pub fn recovery_sequence_report(
    u: &State,
    w: &Weight,
    scales: &[usize],
) -> Result<GammaReport, Error> {
    if scales.len() < 2 || scales.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::InvalidParameter {
            what: "recovery scales",
            why: "need at least two strictly increasing scales".into(),
        });
    }
    let mut energies = Vec::with_capacity(scales.len());
    let mut viscosity_terms = Vec::with_capacity(scales.len());
    let mut weighted_terms = Vec::with_capacity(scales.len());
    let mut liminf_ok = true;
    for &s in scales {
        let mol = make_mollifier(u.grid(), s)?;
        let us = mollify(u, &mol)?;
        let weighted = discrete_energy(&us, w)?;
        let total = regularized_energy(&us, w, 1.0 / s as f64)?;
        let grad = delta_plus(&us);
        let visc = 0.5 * grad.values().norm_squared() * u.grid().spacing() / s as f64;
        liminf_ok &= weighted <= total;
        energies.push(total);
        viscosity_terms.push(visc);
        weighted_terms.push(weighted);
    }
    Ok(GammaReport {
        recovery_rate: rate_fit(scales, &viscosity_terms),
        energy_rate: rate_fit(scales, &weighted_terms),
        scales: scales.to_vec(),
        energies,
        viscosity_terms,
        weighted_terms,
        limit_energy: discrete_energy(u, w)?,
        liminf_ok,
    })
}

/// For each viscosity `delta`, evolve `u0` under the operator with weight
/// `alpha + delta` and report the weighted-norm distance to the limit flow
/// at time `t`. Rows are `(delta, error)`.
pub fn viscosity_flow_compare(
    u0: &State,
    w: &Weight,
    deltas: &[f64],
    t: f64,
) -> Result<Vec<(f64, f64)>, Error> {
    if t <= 0.0 {
        return Err(Error::InvalidParameter {
            what: "comparison time",
            why: format!("must be positive, got {t}"),
        });
    }
    let baseline = evolve(FlowKind::T1, u0, w, t)?;
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let wd = w.with_viscosity(delta)?;
        let ud = evolve(FlowKind::T1, u0, &wd, t)?;
        let err = ud.axpy(-1.0, &baseline).weighted_norm();
        rows.push((delta, err));
    }
    Ok(rows)
}
