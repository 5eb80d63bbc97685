//! The seven experiment scenarios. Built-in pass tolerances mirror the
//! acceptance suite of the library, so a CI run of the CLI checks the
//! same contracts.

use anyhow::{anyhow, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use degenflow::*;

use crate::config::{ExperimentConfig, Scenario};
use crate::parallel::run_jobs;
use crate::report::{CsvCell, CsvFile, ExperimentReport};

type Job<T> = Box<dyn FnOnce() -> Result<T> + Send>;

const KERNEL_WINDOW_1D: (f64, f64) = (0.005, 0.05);
const KERNEL_WINDOW_2D: (f64, f64) = (0.01, 0.08);
const DIFFUSIVITY_WINDOW: (f64, f64) = (0.005, 0.05);
const GAMMA_SCALES: [usize; 4] = [16, 32, 64, 128];
const VISCOSITY_DELTAS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

pub fn run(config: &ExperimentConfig) -> Result<(ExperimentReport, Vec<CsvFile>)> {
    match config.scenario {
        Scenario::ParityDemo => parity_demo(config),
        Scenario::Spectrum => spectrum(config),
        Scenario::KernelExponent => kernel_exponent(config),
        Scenario::DiffusivityExponent => diffusivity_exponent(config),
        Scenario::ViscosityLimit => viscosity_limit(config),
        Scenario::FlowsCompare => flows_compare(config),
        Scenario::GammaReport => gamma_report(config),
    }
}

fn lib(err: Error) -> anyhow::Error {
    anyhow!(err.to_string())
}

fn spectral_gap_for(grid: &Grid1D, w: &Weight) -> Result<f64> {
    let dec = eigendecompose(&assemble_operator(w, grid).map_err(lib)?).map_err(lib)?;
    dec.spectral_gap()
        .ok_or_else(|| anyhow!("operator has no spectral gap"))
}

fn state_csv(suffix: &str, state: &State) -> CsvFile {
    let mut csv = CsvFile::new(suffix, "x,value");
    for (j, &x) in state.grid().nodes().iter().enumerate() {
        csv.row(&[CsvCell::Real(x), CsvCell::Real(state.values()[j])]);
    }
    csv
}

fn parity_demo(config: &ExperimentConfig) -> Result<(ExperimentReport, Vec<CsvFile>)> {
    let sigma = config.sigma;
    let run_grid = move |m: usize| -> Result<(f64, State, f64)> {
        let grid = Grid1D::new(m).map_err(lib)?;
        let w = power_weight(&grid, &GammaSet::OneD, sigma).map_err(lib)?;
        let h = make_h(&grid);
        let gap = spectral_gap_for(&grid, &w)?;
        let t = 40.0 / gap;
        let evolved = evolve(FlowKind::T1, &h, &w, t).map_err(lib)?;
        Ok((gap, evolved, t))
    };
    let m_even = config.m;
    let m_odd = config.m + 1;
    let mut results = run_jobs(vec![
        Box::new(move || run_grid(m_even)) as Box<dyn FnOnce() -> _ + Send>,
        Box::new(move || run_grid(m_odd)),
    ]);
    let (gap_odd, odd_state, t_odd) = results.pop().unwrap()?;
    let (gap_even, even_state, t_even) = results.pop().unwrap()?;

    let grid_even = Grid1D::new(m_even).map_err(lib)?;
    let h_even = make_h(&grid_even);
    let residual_even = even_state.clone().axpy(-1.0, &h_even).weighted_norm();

    let grid_odd = Grid1D::new(m_odd).map_err(lib)?;
    let h_odd = make_h(&grid_odd);
    let flat = State::constant(grid_odd, h_odd.mean());
    let residual_odd = odd_state.clone().axpy(-1.0, &flat).weighted_norm();

    let mut report = ExperimentReport::new("parity-demo");
    report.metric("m_even", m_even as f64);
    report.metric("m_odd", m_odd as f64);
    report.metric("sigma", sigma);
    report.metric("gap_even", gap_even);
    report.metric("gap_odd", gap_odd);
    report.metric("t_even", t_even);
    report.metric("t_odd", t_odd);
    report.metric("residual_even_vs_jump", residual_even);
    report.metric("residual_odd_vs_mean", residual_odd);
    report.flag("even_grid_keeps_jump", residual_even <= 1e-10);
    report.flag("odd_grid_averages_out", residual_odd <= 1e-8);

    let csvs = vec![
        state_csv("even_final", &even_state),
        state_csv("odd_final", &odd_state),
    ];
    Ok((report, csvs))
}

fn spectrum(config: &ExperimentConfig) -> Result<(ExperimentReport, Vec<CsvFile>)> {
    let grid = Grid1D::new(config.m).map_err(lib)?;
    let w = power_weight(&grid, &GammaSet::OneD, config.sigma).map_err(lib)?;
    let op = assemble_operator(&w, &grid).map_err(lib)?;
    let dec = eigendecompose(&op).map_err(lib)?;

    let mut max_residual: f64 = 0.0;
    let mut max_gram_dev: f64 = 0.0;
    for k in 0..dec.len() {
        let phi = dec.eigenvector(k);
        let mu = dec.eigenvalues()[k];
        let residual = op.apply(&phi).map_err(lib)?.axpy(-mu, &phi).weighted_norm();
        max_residual = max_residual.max(residual / mu.max(1.0));
        for j in k..dec.len() {
            let dot = phi.weighted_dot(&dec.eigenvector(j));
            let expect = if j == k { 1.0 } else { 0.0 };
            max_gram_dev = max_gram_dev.max((dot - expect).abs());
        }
    }
    let expected_kernel = if config.m.is_multiple_of(2) && config.sigma > 0.0 {
        2
    } else {
        1
    };

    let mut report = ExperimentReport::new("spectrum");
    report.metric("m", config.m as f64);
    report.metric("sigma", config.sigma);
    report.metric("kernel_dim", dec.kernel_dim() as f64);
    report.metric("max_relative_residual", max_residual);
    report.metric("max_orthonormality_deviation", max_gram_dev);
    if let Some(gap) = dec.spectral_gap() {
        report.metric("spectral_gap", gap);
        report.metric("poincare_constant", poincare_constant(&dec).map_err(lib)?);
    }
    report.flag("residuals_within_1e8", max_residual <= 1e-8);
    report.flag("orthonormal_within_1e10", max_gram_dev <= 1e-10);
    report.flag(
        "kernel_dim_matches_parity",
        dec.kernel_dim() == expected_kernel,
    );

    let mut csv = CsvFile::new("eigenvalues", "k,mu");
    for (k, &mu) in dec.eigenvalues().iter().enumerate() {
        csv.row(&[CsvCell::Int(k as i64), CsvCell::Real(mu)]);
    }
    Ok((report, vec![csv]))
}

fn kernel_exponent(config: &ExperimentConfig) -> Result<(ExperimentReport, Vec<CsvFile>)> {
    let eps = config.eps;
    let m_1d = config.m;
    let m_2d = config.m.min(512);

    let one_d = move || -> Result<(State, ExponentFit)> {
        let grid = Grid1D::new(m_1d).map_err(lib)?;
        let spec = MultiplierSpec::one_d(eps).map_err(lib)?;
        let samples = kernel_samples(&spec, &grid).map_err(lib)?;
        let fit =
            fit_power_law_with_offset(&samples, &SingularityLocus::KernelOrigin, KERNEL_WINDOW_1D)
                .map_err(lib)?;
        Ok((samples, fit))
    };
    let two_d = move || -> Result<ExponentFit> {
        let grid = Grid2D::new(m_2d).map_err(lib)?;
        let gamma = GammaSet::default_circle();
        let delta = circle_line_delta(&grid, &gamma).map_err(lib)?;
        let spec = MultiplierSpec::two_d(eps).map_err(lib)?;
        let smoothed = apply_multiplier_2d(&delta, &spec).map_err(lib)?;
        fit_ray_power_law_with_offset(&smoothed, &gamma, KERNEL_WINDOW_2D).map_err(lib)
    };

    let jobs: Vec<Job<KernelHalf>> = vec![
        Box::new(move || one_d().map(KernelHalf::OneD)),
        Box::new(move || two_d().map(KernelHalf::TwoD)),
    ];
    let mut results = run_jobs(jobs);
    let fit_2d = match results.pop().unwrap()? {
        KernelHalf::TwoD(f) => f,
        _ => unreachable!(),
    };
    let (samples, fit_1d) = match results.pop().unwrap()? {
        KernelHalf::OneD(p) => p,
        _ => unreachable!(),
    };

    let target = eps - 1.0;
    let dev_1d = (fit_1d.slope - target).abs();
    let dev_2d = (fit_2d.slope - target).abs();

    let mut report = ExperimentReport::new("kernel-exponent");
    report.metric("eps", eps);
    report.metric("m_1d", m_1d as f64);
    report.metric("m_2d", m_2d as f64);
    report.metric("target_exponent", target);
    report.metric("slope_1d", fit_1d.slope);
    report.metric("slope_2d", fit_2d.slope);
    report.metric("deviation_1d", dev_1d);
    report.metric("deviation_2d", dev_2d);
    report.flag("one_d_within_0p05", dev_1d <= 0.05);
    report.flag("two_d_within_0p1", dev_2d <= 0.1);

    let mut fits = CsvFile::new("fits", "fit,slope,intercept,r_squared,r_min,r_max");
    for (name, fit) in [("kernel_1d", &fit_1d), ("circle_2d", &fit_2d)] {
        fits.row(&[
            CsvCell::Text(name.to_string()),
            CsvCell::Real(fit.slope),
            CsvCell::Real(fit.intercept),
            CsvCell::Real(fit.r_squared),
            CsvCell::Real(fit.window.0),
            CsvCell::Real(fit.window.1),
        ]);
    }
    Ok((report, vec![state_csv("kernel_1d", &samples), fits]))
}

enum KernelHalf {
    OneD((State, ExponentFit)),
    TwoD(ExponentFit),
}

fn sampled_indicator(grid: &Grid1D) -> State {
    let m = grid.m() as isize;
    let mut chi = State::zeros(grid.clone());
    for i in -m / 2 + 1..=m / 2 {
        chi.values_mut()[grid.storage_index(i)] = 1.0;
    }
    chi
}

fn diffusivity_exponent(config: &ExperimentConfig) -> Result<(ExperimentReport, Vec<CsvFile>)> {
    let grid = Grid1D::new(config.m).map_err(lib)?;
    let chi = sampled_indicator(&grid);
    let w = edge_diffusivity(&chi, config.eps).map_err(lib)?;
    let fit =
        weights::fit_edge_exponent(&w, &grid, &GammaSet::OneD, DIFFUSIVITY_WINDOW).map_err(lib)?;
    let alpha_exponent = -2.0 * fit.slope;
    let target = 2.0 - 2.0 * config.eps;
    let dev = (alpha_exponent - target).abs();

    let mut report = ExperimentReport::new("diffusivity-exponent");
    report.metric("m", config.m as f64);
    report.metric("eps", config.eps);
    report.metric("alpha_exponent", alpha_exponent);
    report.metric("target_exponent", target);
    report.metric("deviation", dev);
    report.flag("exponent_within_0p1", dev <= 0.1);

    let samples =
        State::from_vec(grid.clone(), w.samples().iter().copied().collect()).map_err(lib)?;
    Ok((report, vec![state_csv("diffusivity", &samples)]))
}

fn viscosity_limit(config: &ExperimentConfig) -> Result<(ExperimentReport, Vec<CsvFile>)> {
    let grid = Grid1D::new(config.m).map_err(lib)?;
    let w = power_weight(&grid, &GammaSet::OneD, config.sigma).map_err(lib)?;
    let u0 = State::from_fn(grid, |x| (PI * x).cos());
    let rows = viscosity_flow_compare(&u0, &w, &VISCOSITY_DELTAS, config.t_final).map_err(lib)?;
    let decreasing = rows.windows(2).all(|p| p[1].1 < p[0].1);

    let mut report = ExperimentReport::new("viscosity-limit");
    report.metric("m", config.m as f64);
    report.metric("sigma", config.sigma);
    report.metric("t_final", config.t_final);
    for (delta, err) in &rows {
        report.metric(&format!("error_delta_{delta:.0e}"), *err);
    }
    report.flag("errors_strictly_decreasing", decreasing);

    let mut csv = CsvFile::new("errors", "delta,error");
    for (delta, err) in &rows {
        csv.row(&[CsvCell::Real(*delta), CsvCell::Real(*err)]);
    }
    Ok((report, vec![csv]))
}

fn flows_compare(config: &ExperimentConfig) -> Result<(ExperimentReport, Vec<CsvFile>)> {
    let grid = Grid1D::new(config.m).map_err(lib)?;
    let weak = power_weight(&grid, &GammaSet::OneD, config.sigma).map_err(lib)?;
    let strong =
        strong_weight(&grid, &GammaSet::OneD, config.sigma.max(f64::MIN_POSITIVE)).map_err(lib)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let u0 = State::from_fn(grid.clone(), |_| rng.gen_range(-1.0..1.0));

    let runs: Vec<(&'static str, FlowKind, Weight)> = vec![
        ("t1", FlowKind::T1, weak.clone()),
        ("t2", FlowKind::T2, weak.clone()),
        ("t3", FlowKind::T3, weak),
        ("strong", FlowKind::Strong, strong),
    ];
    let jobs: Vec<Job<(State, State)>> = runs
        .iter()
        .map(|(_, kind, w)| {
            let kind = *kind;
            let w = w.clone();
            let grid = grid.clone();
            let u0 = u0.clone();
            Box::new(move || -> Result<(State, State)> {
                let gap = spectral_gap_for(&grid, &w)?;
                let evolved = evolve(kind, &u0, &w, 40.0 / gap).map_err(lib)?;
                let closed = steady_state(kind, &u0, &w).map_err(lib)?;
                Ok((evolved, closed))
            }) as Job<(State, State)>
        })
        .collect();
    let mut limits = Vec::new();
    let mut report = ExperimentReport::new("flows-compare");
    report.metric("m", config.m as f64);
    report.metric("sigma", config.sigma);
    report.metric("seed", config.seed as f64);
    for ((name, _, _), result) in runs.iter().zip(run_jobs(jobs)) {
        let (evolved, closed) = result?;
        let dev = evolved.clone().axpy(-1.0, &closed).weighted_norm();
        report.metric(&format!("closed_form_deviation_{name}"), dev);
        report.flag(&format!("{name}_limit_matches_closed_form"), dev <= 1e-6);
        limits.push((*name, closed));
    }

    // pairwise distances between the T2, T3, and Strong limits
    let mut distinct = true;
    for a in 1..limits.len() {
        for b in a + 1..limits.len() {
            let d = limits[a].1.clone().axpy(-1.0, &limits[b].1).weighted_norm();
            report.metric(&format!("distance_{}_{}", limits[a].0, limits[b].0), d);
            distinct &= d >= 1e-3;
        }
    }
    report.flag("limits_pairwise_distinct", distinct);

    let mut csv = CsvFile::new("limits", "x,t1,t2,t3,strong");
    for (j, &x) in grid.nodes().iter().enumerate() {
        csv.row(&[
            CsvCell::Real(x),
            CsvCell::Real(limits[0].1.values()[j]),
            CsvCell::Real(limits[1].1.values()[j]),
            CsvCell::Real(limits[2].1.values()[j]),
            CsvCell::Real(limits[3].1.values()[j]),
        ]);
    }
    Ok((report, vec![csv]))
}

fn gamma_report(config: &ExperimentConfig) -> Result<(ExperimentReport, Vec<CsvFile>)> {
    let grid = Grid1D::new(config.m).map_err(lib)?;
    let gamma = GammaSet::OneD;
    let weak = power_weight(&grid, &gamma, config.sigma).map_err(lib)?;
    let strong = strong_weight(&grid, &gamma, config.sigma.max(f64::MIN_POSITIVE)).map_err(lib)?;
    let smooth = State::from_fn(grid.clone(), |x| (PI * x).cos());
    let jump = make_h(&grid);

    let smooth_report = recovery_sequence_report(&smooth, &weak, &GAMMA_SCALES).map_err(lib)?;
    let jump_weak = recovery_sequence_report(&jump, &weak, &GAMMA_SCALES).map_err(lib)?;
    let jump_strong = recovery_sequence_report(&jump, &strong, &GAMMA_SCALES).map_err(lib)?;

    let visc_rate = smooth_report
        .recovery_rate
        .ok_or_else(|| anyhow!("viscosity terms vanished"))?;
    let weak_rate = jump_weak
        .energy_rate
        .ok_or_else(|| anyhow!("weak-weight energies vanished"))?;
    let strong_rate = jump_strong
        .energy_rate
        .ok_or_else(|| anyhow!("strong-weight energies vanished"))?;

    let mut report = ExperimentReport::new("gamma-report");
    report.metric("m", config.m as f64);
    report.metric("sigma", config.sigma);
    report.metric("smooth_viscosity_rate", visc_rate);
    report.metric("smooth_limit_energy", smooth_report.limit_energy);
    report.metric("jump_weak_energy_rate", weak_rate);
    report.metric("jump_strong_energy_rate", strong_rate);
    report.flag(
        "smooth_viscosity_rate_near_sigma_minus_1",
        (visc_rate - (config.sigma - 1.0)).abs() <= 0.15,
    );
    report.flag(
        "jump_weak_growth_near_1_minus_sigma",
        (weak_rate - (1.0 - config.sigma)).abs() <= 0.15,
    );
    report.flag(
        "jump_strong_decay_near_minus_sigma",
        (strong_rate + config.sigma).abs() <= 0.15,
    );
    report.flag(
        "liminf_inequality",
        smooth_report.liminf_ok && jump_weak.liminf_ok && jump_strong.liminf_ok,
    );

    let mut csv = CsvFile::new(
        "energies",
        "dataset,scale,viscosity_term,weighted_term,total",
    );
    for (name, rep) in [
        ("smooth_weak", &smooth_report),
        ("jump_weak", &jump_weak),
        ("jump_strong", &jump_strong),
    ] {
        for (i, &scale) in rep.scales.iter().enumerate() {
            csv.row(&[
                CsvCell::Text(name.to_string()),
                CsvCell::Int(scale as i64),
                CsvCell::Real(rep.viscosity_terms[i]),
                CsvCell::Real(rep.weighted_terms[i]),
                CsvCell::Real(rep.energies[i]),
            ]);
        }
    }
    Ok((report, vec![csv]))
}
