//! The smoothing Fourier multiplier `N_eps`, its convolution kernel, and
//! singularity-exponent measurement.
//!
//! On the period-2 box the Fourier modes are `e^{i pi k . x}` with
//! `k` integer (per axis, `k = -m..m-1` on a `2m`-node grid). The operator
//! multiplies the coefficient of mode `k` by `|k|^{-eps}` and annihilates
//! the zero mode, so it is linear, self-adjoint in the `d_m`-weighted inner
//! product, mean-free, and translation invariant. Its convolution kernel
//! behaves like `|x|^{eps-n}` near the origin up to a smooth remainder; the
//! exponent is measured by a log-log fit at small distances, where the
//! remainder is negligible.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::disc_ops::State;
use crate::grid::{torus_wrap, GammaSet, Grid1D, Grid2D};
use crate::Error;

/// Spatial dimension the multiplier acts in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelDim {
    One,
    Two,
}

/// Fourier multiplier `|k|^{-eps}` with the zero mode annihilated.
#[derive(Clone, Copy, Debug)]
pub struct MultiplierSpec {
    eps: f64,
    dim: KernelDim,
}

impl MultiplierSpec {
    pub fn new(eps: f64, dim: KernelDim) -> Result<Self, Error> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter {
                what: "multiplier exponent eps",
                why: format!("must lie in (0, 1), got {eps}"),
            });
        }
        Ok(Self { eps, dim })
    }

    pub fn one_d(eps: f64) -> Result<Self, Error> {
        Self::new(eps, KernelDim::One)
    }

    pub fn two_d(eps: f64) -> Result<Self, Error> {
        Self::new(eps, KernelDim::Two)
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn dim(&self) -> KernelDim {
        self.dim
    }
}

/// Signed frequency of DFT bin `idx` on an `n`-point grid.
fn signed_freq(idx: usize, n: usize) -> i64 {
    if 2 * idx < n {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

/// Verify the inverse transform is real up to roundoff and strip the
/// imaginary parts. The residue check is relative to the output scale.
fn realize(buf: &[Complex64], scale: f64) -> Vec<f64> {
    let max_re = buf.iter().map(|c| c.re.abs()).fold(0.0, f64::max) * scale;
    let max_im = buf.iter().map(|c| c.im.abs()).fold(0.0, f64::max) * scale;
    assert!(
        max_im <= 1e-10 * max_re.max(1.0),
        "imaginary residue {max_im:e} exceeds tolerance for output scale {max_re:e}"
    );
    buf.iter().map(|c| c.re * scale).collect()
}

/// Apply the 1D multiplier: `F^-1 [ |k|^{-eps} F v ]` with the mean killed.
pub fn apply_multiplier(v: &State, spec: &MultiplierSpec) -> Result<State, Error> {
    if spec.dim != KernelDim::One {
        return Err(Error::DimensionMismatch {
            expected: "1D multiplier",
            got: "2D spec",
        });
    }
    let n = v.len();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = v.values().iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fwd.process(&mut buf);
    for (idx, c) in buf.iter_mut().enumerate() {
        let k = signed_freq(idx, n);
        *c *= if k == 0 {
            0.0
        } else {
            (k.abs() as f64).powf(-spec.eps)
        };
    }
    inv.process(&mut buf);
    let values = realize(&buf, 1.0 / n as f64);
    State::new(v.grid().clone(), nalgebra::DVector::from_vec(values))
}

/// Real-valued lattice function on a square periodic grid, stored row-major
/// with `x` as the fast axis.
#[derive(Clone, Debug)]
pub struct Field2D {
    values: Vec<f64>,
    grid: Grid2D,
}

impl Field2D {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self, Error> {
        let n = grid.axis_len();
        if values.len() != n * n {
            return Err(Error::GridMismatch {
                expected: n * n,
                got: values.len(),
            });
        }
        Ok(Self { values, grid })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        let n = grid.axis_len();
        Self {
            values: vec![0.0; n * n],
            grid,
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.grid.axis_len() + ix]
    }

    pub fn value_mut(&mut self, ix: usize, iy: usize) -> &mut f64 {
        let n = self.grid.axis_len();
        &mut self.values[iy * n + ix]
    }

    /// Riemann sum `sum f * spacing^2`.
    pub fn integral(&self) -> f64 {
        let d = self.grid.spacing();
        self.values.iter().sum::<f64>() * d * d
    }
}

fn transpose(buf: &mut Vec<Complex64>, n: usize) {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for r in 0..n {
        for c in 0..n {
            out[c * n + r] = buf[r * n + c];
        }
    }
    *buf = out;
}

/// Apply the 2D multiplier `(kx^2 + ky^2)^{-eps/2}`, zero mode annihilated.
pub fn apply_multiplier_2d(f: &Field2D, spec: &MultiplierSpec) -> Result<Field2D, Error> {
    if spec.dim != KernelDim::Two {
        return Err(Error::DimensionMismatch {
            expected: "2D multiplier",
            got: "1D spec",
        });
    }
    let n = f.grid.axis_len();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let mut buf: Vec<Complex64> = f.values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    for row in buf.chunks_exact_mut(n) {
        fwd.process(row);
    }
    transpose(&mut buf, n);
    for row in buf.chunks_exact_mut(n) {
        fwd.process(row);
    }
    // layout after the two passes: index kx * n + ky
    for kx_idx in 0..n {
        let kx = signed_freq(kx_idx, n) as f64;
        for ky_idx in 0..n {
            let ky = signed_freq(ky_idx, n) as f64;
            let k2 = kx * kx + ky * ky;
            let m = if k2 == 0.0 {
                0.0
            } else {
                k2.powf(-0.5 * spec.eps)
            };
            buf[kx_idx * n + ky_idx] *= m;
        }
    }
    for row in buf.chunks_exact_mut(n) {
        inv.process(row);
    }
    transpose(&mut buf, n);
    for row in buf.chunks_exact_mut(n) {
        inv.process(row);
    }
    let values = realize(&buf, 1.0 / (n * n) as f64);
    Field2D::new(f.grid.clone(), values)
}

const MIN_KERNEL_RESOLUTION: usize = 64;

/// Kernel samples `G = N_eps(delta_0)` where the discrete delta carries the
/// value `1/d_m` at the node `x = 0`.
pub fn kernel_samples(spec: &MultiplierSpec, grid: &Grid1D) -> Result<State, Error> {
    if grid.m() < MIN_KERNEL_RESOLUTION {
        return Err(Error::InvalidParameter {
            what: "kernel grid resolution",
            why: format!("need m >= {MIN_KERNEL_RESOLUTION}, got {}", grid.m()),
        });
    }
    let mut delta = State::zeros(grid.clone());
    let origin = grid.storage_index(0);
    delta.values_mut()[origin] = 1.0 / grid.spacing();
    apply_multiplier(&delta, spec)
}

/// 2D kernel samples from the discrete delta of value `1/d_m^2` at the origin.
pub fn kernel_samples_2d(spec: &MultiplierSpec, grid: &Grid2D) -> Result<Field2D, Error> {
    if grid.m() < MIN_KERNEL_RESOLUTION {
        return Err(Error::InvalidParameter {
            what: "kernel grid resolution",
            why: format!("need m >= {MIN_KERNEL_RESOLUTION}, got {}", grid.m()),
        });
    }
    let mut delta = Field2D::zeros(grid.clone());
    let origin = grid.m();
    let d = grid.spacing();
    *delta.value_mut(origin, origin) = 1.0 / (d * d);
    apply_multiplier_2d(&delta, spec)
}

/// Where a power-law singularity is anchored for exponent fits.
#[derive(Clone, Debug)]
pub enum SingularityLocus {
    /// The kernel origin `x = 0`.
    KernelOrigin,
    /// The degeneration set.
    Gamma(GammaSet),
}

impl SingularityLocus {
    fn distance_1d(&self, x: f64) -> f64 {
        match self {
            SingularityLocus::KernelOrigin => torus_wrap(x).abs(),
            SingularityLocus::Gamma(g) => g.distance_1d(x),
        }
    }
}

/// Least-squares fit of `log(sample)` against `log(distance)` over a
/// distance window.
#[derive(Clone, Copy, Debug)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub points: usize,
}

fn log_log_fit(pairs: &[(f64, f64)], window: (f64, f64)) -> Result<ExponentFit, Error> {
    if pairs.len() < 8 {
        return Err(Error::InvalidParameter {
            what: "exponent fit",
            why: format!(
                "need at least 8 sample points in the window, got {}",
                pairs.len()
            ),
        });
    }
    if pairs.iter().any(|&(_, v)| v <= 0.0) {
        return Err(Error::NonpositiveSamples);
    }
    let n = pairs.len() as f64;
    let logs: Vec<(f64, f64)> = pairs.iter().map(|&(d, v)| (d.ln(), v.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for &(x, y) in &logs {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(ExponentFit {
        slope,
        intercept,
        r_squared,
        window,
        points: pairs.len(),
    })
}

/// Fit `value = c * distance^p + b` over the window and report `p`.
///
/// Kernel samples carry a smooth remainder on top of the singular power,
/// which shows up as an additive offset at small distances and biases the
/// plain log-log slope; profiling the exponent with `c` and `b` eliminated
/// by linear least squares measures the asymptotic exponent itself. The
/// returned `intercept` is the fitted offset `b`.
pub fn fit_power_law_with_offset(
    samples: &State,
    locus: &SingularityLocus,
    window: (f64, f64),
) -> Result<ExponentFit, Error> {
    check_window(window, samples.grid().spacing())?;
    let pairs: Vec<(f64, f64)> = samples
        .grid()
        .nodes()
        .iter()
        .zip(samples.values().iter())
        .filter_map(|(&x, &v)| {
            let d = locus.distance_1d(x);
            (d >= window.0 && d <= window.1).then_some((d, v))
        })
        .collect();
    offset_power_fit(&pairs, window)
}

fn offset_power_fit(pairs: &[(f64, f64)], window: (f64, f64)) -> Result<ExponentFit, Error> {
    if pairs.len() < 8 {
        return Err(Error::InvalidParameter {
            what: "exponent fit",
            why: format!(
                "need at least 8 sample points in the window, got {}",
                pairs.len()
            ),
        });
    }
    let n = pairs.len() as f64;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let tss: f64 = pairs.iter().map(|&(_, y)| (y - my) * (y - my)).sum();

    // linear least squares in (c, b) for a fixed exponent
    let rss_at = |p: f64| -> (f64, f64, f64) {
        let xs: Vec<f64> = pairs.iter().map(|&(d, _)| d.powf(p)).collect();
        let mx = xs.iter().sum::<f64>() / n;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        for (&x, &(_, y)) in xs.iter().zip(pairs.iter()) {
            sxx += (x - mx) * (x - mx);
            sxy += (x - mx) * (y - my);
        }
        let c = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        let b = my - c * mx;
        let rss: f64 = xs
            .iter()
            .zip(pairs.iter())
            .map(|(&x, &(_, y))| (y - c * x - b) * (y - c * x - b))
            .sum();
        (rss, c, b)
    };

    // coarse scan, then golden-section refinement around the best exponent
    let (lo, hi) = (-1.95, 1.95);
    let coarse = 160;
    let mut best_p = lo;
    let mut best_rss = f64::INFINITY;
    for i in 0..=coarse {
        let p = lo + (hi - lo) * i as f64 / coarse as f64;
        let (rss, _, _) = rss_at(p);
        if rss < best_rss {
            best_rss = rss;
            best_p = p;
        }
    }
    let step = (hi - lo) / coarse as f64;
    let (mut a, mut b_end) = (best_p - step, best_p + step);
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b_end - phi * (b_end - a);
    let mut x2 = a + phi * (b_end - a);
    let (mut f1, mut f2) = (rss_at(x1).0, rss_at(x2).0);
    for _ in 0..80 {
        if f1 <= f2 {
            b_end = x2;
            x2 = x1;
            f2 = f1;
            x1 = b_end - phi * (b_end - a);
            f1 = rss_at(x1).0;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b_end - a);
            f2 = rss_at(x2).0;
        }
    }
    let p = 0.5 * (a + b_end);
    let (rss, _, offset) = rss_at(p);
    Ok(ExponentFit {
        slope: p,
        intercept: offset,
        r_squared: if tss == 0.0 { 1.0 } else { 1.0 - rss / tss },
        window,
        points: pairs.len(),
    })
}

/// Offset-aware exponent fit along the horizontal ray through the circle
/// center; see [`fit_power_law_with_offset`].
pub fn fit_ray_power_law_with_offset(
    field: &Field2D,
    gamma: &GammaSet,
    window: (f64, f64),
) -> Result<ExponentFit, Error> {
    let pairs = ray_pairs(field, gamma, window)?;
    offset_power_fit(&pairs, window)
}

fn check_window(window: (f64, f64), spacing: f64) -> Result<(), Error> {
    let (r_min, r_max) = window;
    if !(r_min < r_max && r_min >= 2.0 * spacing && r_max <= 0.25) {
        return Err(Error::InvalidParameter {
            what: "fit window",
            why: format!(
                "window ({r_min}, {r_max}) must satisfy 2*spacing <= r_min < r_max <= 0.25 \
                 (spacing {spacing})"
            ),
        });
    }
    Ok(())
}

/// Fit the singularity exponent of 1D samples against the distance to the
/// locus over `window = (r_min, r_max)`.
pub fn fit_singularity_exponent(
    samples: &State,
    locus: &SingularityLocus,
    window: (f64, f64),
) -> Result<ExponentFit, Error> {
    check_window(window, samples.grid().spacing())?;
    let pairs: Vec<(f64, f64)> = samples
        .grid()
        .nodes()
        .iter()
        .zip(samples.values().iter())
        .filter_map(|(&x, &v)| {
            let d = locus.distance_1d(x);
            (d >= window.0 && d <= window.1).then_some((d, v))
        })
        .collect();
    log_log_fit(&pairs, window)
}

fn ray_pairs(
    field: &Field2D,
    gamma: &GammaSet,
    window: (f64, f64),
) -> Result<Vec<(f64, f64)>, Error> {
    let (center, radius) = match gamma {
        GammaSet::Circle { center, radius } => (*center, *radius),
        GammaSet::OneD => {
            return Err(Error::DimensionMismatch {
                expected: "circle degeneration set",
                got: "1D set",
            })
        }
    };
    check_window(window, field.grid().spacing())?;
    let n = field.grid().axis_len();
    let nodes = field.grid().axis_nodes();
    // row of nodes closest to the center height
    let iy = (0..n)
        .min_by(|&a, &b| {
            let da = torus_wrap(nodes[a] - center.1).abs();
            let db = torus_wrap(nodes[b] - center.1).abs();
            da.partial_cmp(&db).unwrap()
        })
        .unwrap();
    Ok((0..n)
        .filter_map(|ix| {
            let d = (torus_wrap(nodes[ix] - center.0).abs() - radius).abs();
            (d >= window.0 && d <= window.1).then(|| (d, field.value(ix, iy)))
        })
        .collect())
}

/// Fit the exponent of a 2D field along the horizontal ray through the
/// circle center, against the distance to the circle.
pub fn fit_exponent_along_axis(
    field: &Field2D,
    gamma: &GammaSet,
    window: (f64, f64),
) -> Result<ExponentFit, Error> {
    let pairs = ray_pairs(field, gamma, window)?;
    log_log_fit(&pairs, window)
}

/// Lattice approximation of the line measure along a circle: a nonnegative
/// function supported within one cell of the curve whose Riemann sum equals
/// the circumference.
///
/// The circle is parametrized by equispaced points each carrying an equal
/// share of the circumference and deposited bilinearly onto the four
/// surrounding lattice nodes, which conserves total mass exactly.
pub fn circle_line_delta(grid: &Grid2D, gamma: &GammaSet) -> Result<Field2D, Error> {
    let (center, radius) = match gamma {
        GammaSet::Circle { center, radius } => (*center, *radius),
        GammaSet::OneD => {
            return Err(Error::DimensionMismatch {
                expected: "circle degeneration set",
                got: "1D set",
            })
        }
    };
    let d = grid.spacing();
    if radius <= 4.0 * d {
        return Err(Error::InvalidParameter {
            what: "circle radius",
            why: format!("radius {radius} too small for grid spacing {d}"),
        });
    }
    let n = grid.axis_len();
    let circumference = 2.0 * std::f64::consts::PI * radius;
    // dense parametrization: many points per crossed cell
    let points = ((circumference / d).ceil() as usize) * 8;
    let mass = circumference / points as f64;
    let cell_mass = mass / (d * d);
    let mut field = Field2D::zeros(grid.clone());
    for p in 0..points {
        let theta = 2.0 * std::f64::consts::PI * (p as f64) / (points as f64);
        let x = center.0 + radius * theta.cos();
        let y = center.1 + radius * theta.sin();
        // fractional lattice coordinates relative to the node at (-1,-1)
        let fx = (torus_wrap(x) + 1.0) / d;
        let fy = (torus_wrap(y) + 1.0) / d;
        let ix = fx.floor() as usize % n;
        let iy = fy.floor() as usize % n;
        let tx = fx - fx.floor();
        let ty = fy - fy.floor();
        let ix1 = (ix + 1) % n;
        let iy1 = (iy + 1) % n;
        *field.value_mut(ix, iy) += cell_mass * (1.0 - tx) * (1.0 - ty);
        *field.value_mut(ix1, iy) += cell_mass * tx * (1.0 - ty);
        *field.value_mut(ix, iy1) += cell_mass * (1.0 - tx) * ty;
        *field.value_mut(ix1, iy1) += cell_mass * tx * ty;
    }
    Ok(field)
}
