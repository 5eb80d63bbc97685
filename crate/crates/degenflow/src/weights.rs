//! Diffusivity construction: power-law weights vanishing on the
//! degeneration set, and the fractional edge detector built from an
//! initial image.

use nalgebra::DVector;

use crate::disc_ops::{delta_plus, State};
use crate::frac_kernel::{apply_multiplier, MultiplierSpec};
use crate::grid::{GammaSet, Grid1D};
use crate::Error;

/// Degeneration class of a sampled diffusivity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightClass {
    /// `alpha ~ d(x,Gamma)^sigma` with `sigma` in `[0,1)`; `1/alpha` stays
    /// integrable and the energy space is connected.
    Weak,
    /// `alpha ~ d(x,Gamma)^{1+sigma}` with `sigma > 0`; `1/alpha` is not
    /// integrable and discontinuous zero-energy minimizers appear.
    Strong,
    /// `alpha = 1 / (1 + N_eps(|grad u0|)^2)` for a frozen image `u0`.
    EdgeDetector { eps: f64 },
}

/// Diffusivity sampled pointwise at the grid nodes.
#[derive(Clone, Debug)]
pub struct Weight {
    samples: DVector<f64>,
    sigma: f64,
    class: WeightClass,
}

impl Weight {
    pub fn samples(&self) -> &DVector<f64> {
        &self.samples
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn class(&self) -> WeightClass {
        self.class
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Indices of nodes where the sample vanishes exactly.
    pub fn zero_nodes(&self) -> Vec<usize> {
        self.samples
            .iter()
            .enumerate()
            .filter_map(|(j, &a)| (a == 0.0).then_some(j))
            .collect()
    }

    /// The weight with every sample shifted by a viscosity `delta >= 0`.
    /// The class tag is kept; it refers to the base weight.
    pub fn with_viscosity(&self, delta: f64) -> Result<Weight, Error> {
        if delta < 0.0 {
            return Err(Error::InvalidParameter {
                what: "viscosity delta",
                why: format!("must be nonnegative, got {delta}"),
            });
        }
        Ok(Weight {
            samples: self.samples.add_scalar(delta),
            sigma: self.sigma,
            class: self.class,
        })
    }
}

/// Weakly degenerate power weight `alpha_i = d(x_i, Gamma)^sigma`,
/// `sigma` in `[0, 1)`.
pub fn power_weight(grid: &Grid1D, gamma: &GammaSet, sigma: f64) -> Result<Weight, Error> {
    if !(0.0..1.0).contains(&sigma) {
        return Err(Error::InvalidParameter {
            what: "weak weight exponent sigma",
            why: format!("must lie in [0, 1), got {sigma}"),
        });
    }
    let samples = DVector::from_iterator(
        grid.len(),
        grid.nodes()
            .iter()
            .map(|&x| gamma.distance_1d(x).powf(sigma)),
    );
    Ok(Weight {
        samples,
        sigma,
        class: WeightClass::Weak,
    })
}

/// Strongly degenerate weight `alpha_i = d(x_i, Gamma)^{1+sigma}`,
/// `sigma > 0`.
pub fn strong_weight(grid: &Grid1D, gamma: &GammaSet, sigma: f64) -> Result<Weight, Error> {
    if sigma <= 0.0 {
        return Err(Error::InvalidParameter {
            what: "strong weight exponent sigma",
            why: format!("must be positive, got {sigma}"),
        });
    }
    let p = 1.0 + sigma;
    let samples = DVector::from_iterator(
        grid.len(),
        grid.nodes().iter().map(|&x| gamma.distance_1d(x).powf(p)),
    );
    Ok(Weight {
        samples,
        sigma,
        class: WeightClass::Strong,
    })
}

/// Edge-detector diffusivity `alpha_i = 1 / (1 + N_eps(|grad u0|)_i^2)`.
///
/// The gradient magnitude is the forward-difference magnitude, so a sampled
/// jump becomes a single-node spike of height `jump/d_m` — the discrete
/// delta carried by the jump.
pub fn edge_diffusivity(u0: &State, eps: f64) -> Result<Weight, Error> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter {
            what: "edge detector exponent eps",
            why: format!("must lie in (0, 1), got {eps}"),
        });
    }
    let spec = MultiplierSpec::one_d(eps)?;
    let mut grad_mag = delta_plus(u0);
    for g in grad_mag.values_mut().iter_mut() {
        *g = g.abs();
    }
    let smoothed = apply_multiplier(&grad_mag, &spec)?;
    let samples = DVector::from_iterator(
        u0.len(),
        smoothed.values().iter().map(|&n| 1.0 / (1.0 + n * n)),
    );
    Ok(Weight {
        samples,
        sigma: 0.0,
        class: WeightClass::EdgeDetector { eps },
    })
}

/// Measure the decay exponent of an edge-detector diffusivity near the
/// degeneration set.
///
/// Inverts `alpha = 1/(1 + N^2)` into `|N| = sqrt(1/alpha - 1)`, which is
/// a singular power plus a smooth offset, and fits that with the
/// offset-aware power law. The diffusivity itself then scales like
/// `d^{-2 * slope}`, so the returned fit's `slope` relates to the alpha
/// exponent by a factor of `-2`.
pub fn fit_edge_exponent(
    w: &Weight,
    grid: &Grid1D,
    gamma: &GammaSet,
    window: (f64, f64),
) -> Result<crate::frac_kernel::ExponentFit, Error> {
    if w.len() != grid.len() {
        return Err(Error::GridMismatch {
            expected: grid.len(),
            got: w.len(),
        });
    }
    let transformed = State::new(
        grid.clone(),
        DVector::from_iterator(
            grid.len(),
            w.samples().iter().map(|&a| (1.0 / a - 1.0).max(0.0).sqrt()),
        ),
    )?;
    crate::frac_kernel::fit_power_law_with_offset(
        &transformed,
        &crate::frac_kernel::SingularityLocus::Gamma(gamma.clone()),
        window,
    )
}
