//! Forward/backward difference operators, the weighted discrete Dirichlet
//! energy, its gradient, and the assembled symmetric operator.
//!
//! Everything lives in the `d_m`-weighted inner product
//! `<u, v> = sum_i u_i v_i d_m`, the Riemann-sum analogue of the `L^2`
//! pairing on `[-1,1)`. The energy is
//!
//! ```text
//! E(u) = 1/2 sum_i  alpha_i [(u_{i+1} - u_i)/d_m]^2  d_m
//! ```
//!
//! and its gradient with respect to that inner product is
//! `grad E(u) = -delta_minus(alpha * delta_plus(u))`, so the diffusion flow
//! reads `du/dt = -A u` with `A u = grad E(u)`.

use nalgebra::{DMatrix, DVector};

use crate::grid::Grid1D;
use crate::weights::Weight;
use crate::Error;

/// Periodic sample vector tied to a grid.
#[derive(Clone, Debug)]
pub struct State {
    values: DVector<f64>,
    grid: Grid1D,
}

impl State {
    pub fn new(grid: Grid1D, values: DVector<f64>) -> Result<Self, Error> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                what: "state values",
                why: "entries must be finite".into(),
            });
        }
        Ok(Self { values, grid })
    }

    /// Sample a function at the grid nodes.
    pub fn from_fn(grid: Grid1D, mut f: impl FnMut(f64) -> f64) -> Self {
        let values = DVector::from_iterator(grid.len(), grid.nodes().iter().map(|&x| f(x)));
        Self { values, grid }
    }

    pub fn from_vec(grid: Grid1D, values: Vec<f64>) -> Result<Self, Error> {
        Self::new(grid, DVector::from_vec(values))
    }

    pub fn zeros(grid: Grid1D) -> Self {
        let values = DVector::zeros(grid.len());
        Self { values, grid }
    }

    /// Constant state with the given value.
    pub fn constant(grid: Grid1D, c: f64) -> Self {
        let values = DVector::from_element(grid.len(), c);
        Self { values, grid }
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut DVector<f64> {
        &mut self.values
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `d_m`-weighted inner product `sum_i u_i v_i d_m`.
    pub fn weighted_dot(&self, other: &State) -> f64 {
        self.values.dot(&other.values) * self.grid.spacing()
    }

    /// Norm induced by [`State::weighted_dot`].
    pub fn weighted_norm(&self) -> f64 {
        (self.values.norm_squared() * self.grid.spacing()).sqrt()
    }

    /// Mean value over the box: `(1/2) sum_i u_i d_m`.
    pub fn mean(&self) -> f64 {
        0.5 * self.values.sum() * self.grid.spacing()
    }

    /// Pointwise linear combination `self + c * other` on a shared grid.
    pub fn axpy(&self, c: f64, other: &State) -> State {
        debug_assert!(self.grid.same_as(&other.grid));
        State {
            values: &self.values + c * &other.values,
            grid: self.grid.clone(),
        }
    }

    pub(crate) fn from_raw(grid: Grid1D, values: DVector<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { values, grid }
    }
}

fn check_same_grid(u: &State, n: usize) -> Result<(), Error> {
    if u.len() != n {
        return Err(Error::GridMismatch {
            expected: n,
            got: u.len(),
        });
    }
    Ok(())
}

/// Forward difference `(u_{i+1} - u_i)/d_m`, indices wrapping modulo `2m`.
pub fn delta_plus(u: &State) -> State {
    let n = u.len();
    let d = u.grid().spacing();
    let v = u.values();
    let values = DVector::from_fn(n, |j, _| (v[(j + 1) % n] - v[j]) / d);
    State::from_raw(u.grid().clone(), values)
}

/// Backward difference `(u_i - u_{i-1})/d_m`, indices wrapping modulo `2m`.
pub fn delta_minus(u: &State) -> State {
    let n = u.len();
    let d = u.grid().spacing();
    let v = u.values();
    let values = DVector::from_fn(n, |j, _| (v[j] - v[(j + n - 1) % n]) / d);
    State::from_raw(u.grid().clone(), values)
}

/// Weighted Dirichlet energy `1/2 sum_i alpha_i [(delta_plus u)_i]^2 d_m`.
///
/// Vanishes exactly when the forward difference vanishes at every node
/// where the weight is positive; jumps across zero-weight nodes are free.
pub fn discrete_energy(u: &State, w: &Weight) -> Result<f64, Error> {
    check_same_grid(u, w.len())?;
    let du = delta_plus(u);
    let d = u.grid().spacing();
    let mut e = 0.0;
    for (a, g) in w.samples().iter().zip(du.values().iter()) {
        e += a * g * g;
    }
    Ok(0.5 * e * d)
}

/// Energy with every weight sample shifted by `delta >= 0`; `delta = 0`
/// reduces exactly to [`discrete_energy`].
pub fn shifted_energy(u: &State, w: &Weight, delta: f64) -> Result<f64, Error> {
    check_same_grid(u, w.len())?;
    let du = delta_plus(u);
    let d = u.grid().spacing();
    let mut e = 0.0;
    for (a, g) in w.samples().iter().zip(du.values().iter()) {
        e += (a + delta) * g * g;
    }
    Ok(0.5 * e * d)
}

/// Gradient of [`discrete_energy`] in the `d_m`-weighted inner product:
/// `grad E(u) = -delta_minus(alpha * delta_plus(u))`.
pub fn energy_gradient(u: &State, w: &Weight) -> Result<State, Error> {
    check_same_grid(u, w.len())?;
    let mut flux = delta_plus(u);
    for (g, a) in flux.values_mut().iter_mut().zip(w.samples().iter()) {
        *g *= a;
    }
    let mut out = delta_minus(&flux);
    out.values_mut().neg_mut();
    Ok(out)
}

/// Centered-difference energy `1/2 sum_i alpha_i [(u_{i+1}-u_{i-1})/(2 d_m)]^2 d_m`.
///
/// Kept for comparison only: sampled jumps are not zero-energy for this
/// scheme even when the jump sits on zero-weight nodes, and the alternating
/// vector `(+1,-1,...)` is a spurious zero mode.
pub fn centered_energy(u: &State, w: &Weight) -> Result<f64, Error> {
    check_same_grid(u, w.len())?;
    let n = u.len();
    let d = u.grid().spacing();
    let v = u.values();
    let mut e = 0.0;
    for j in 0..n {
        let g = (v[(j + 1) % n] - v[(j + n - 1) % n]) / (2.0 * d);
        e += w.samples()[j] * g * g;
    }
    Ok(0.5 * e * d)
}

/// Dense symmetric positive semidefinite matrix `A` with
/// `A u = energy_gradient(u, w)` for every `u`.
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    matrix: DMatrix<f64>,
    grid: Grid1D,
    weight: Weight,
}

impl DiscreteOperator {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `A u` as a state on the same grid.
    pub fn apply(&self, u: &State) -> Result<State, Error> {
        check_same_grid(u, self.len())?;
        Ok(State::from_raw(
            self.grid.clone(),
            &self.matrix * u.values(),
        ))
    }

    #[cfg(test)]
    pub(crate) fn matrix_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.matrix
    }
}

/// Assemble the operator matrix edge by edge: the coupling between nodes
/// `i` and `i+1` carries stiffness `alpha_i / d_m^2`. Assembly is exactly
/// symmetric and every row sums to zero up to one rounding in the diagonal
/// accumulation.
pub fn assemble_operator(w: &Weight, grid: &Grid1D) -> Result<DiscreteOperator, Error> {
    if w.len() != grid.len() {
        return Err(Error::GridMismatch {
            expected: grid.len(),
            got: w.len(),
        });
    }
    let n = grid.len();
    let inv_d2 = 1.0 / (grid.spacing() * grid.spacing());
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let j = (i + 1) % n;
        let c = w.samples()[i] * inv_d2;
        a[(i, i)] += c;
        a[(j, j)] += c;
        a[(i, j)] -= c;
        a[(j, i)] -= c;
    }
    Ok(DiscreteOperator {
        matrix: a,
        grid: grid.clone(),
        weight: w.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GammaSet;
    use crate::weights::power_weight;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn state(m: usize, vals: &[f64]) -> State {
        let g = Grid1D::new(m).unwrap();
        State::new(g, DVector::from_row_slice(vals)).unwrap()
    }

    #[test]
    fn differences_of_constants_vanish() {
        let u = State::constant(Grid1D::new(5).unwrap(), 3.25);
        assert!(delta_plus(&u).values().amax() == 0.0);
        assert!(delta_minus(&u).values().amax() == 0.0);
    }

    #[test]
    fn forward_difference_wrap_entry() {
        // u = the nodes themselves on m=2; the wrap drop is (-1 - 0.5)/0.5.
        let u = state(2, &[-1.0, -0.5, 0.0, 0.5]);
        let du = delta_plus(&u);
        assert_eq!(du.values().as_slice(), &[1.0, 1.0, 1.0, -3.0]);
    }

    #[test]
    fn hand_energy_m2() {
        let g = Grid1D::new(2).unwrap();
        let w = power_weight(&g, &GammaSet::OneD, 0.5).unwrap();
        let u = state(2, &[0.0, 1.0, 0.0, 0.0]);
        let e = discrete_energy(&u, &w).unwrap();
        assert_relative_eq!(e, FRAC_1_SQRT_2, max_relative = 1e-14);
    }

    #[test]
    fn constant_states_have_zero_energy_and_gradient() {
        let g = Grid1D::new(8).unwrap();
        let w = power_weight(&g, &GammaSet::OneD, 0.5).unwrap();
        let u = State::constant(g, -2.0);
        assert_eq!(discrete_energy(&u, &w).unwrap(), 0.0);
        assert_eq!(energy_gradient(&u, &w).unwrap().values().amax(), 0.0);
        assert_eq!(centered_energy(&u, &w).unwrap(), 0.0);
    }

    #[test]
    fn discrete_h_is_flat_for_forward_but_not_centered_scheme() {
        let m = 8;
        let g = Grid1D::new(m).unwrap();
        let w = power_weight(&g, &GammaSet::OneD, 0.5).unwrap();
        let h = crate::flows::make_h(&g);
        assert_eq!(discrete_energy(&h, &w).unwrap(), 0.0);
        assert_eq!(energy_gradient(&h, &w).unwrap().values().amax(), 0.0);
        assert!(centered_energy(&h, &w).unwrap() > 1e-3);
    }

    #[test]
    fn centered_scheme_annihilates_alternating_vector() {
        let m = 4;
        let g = Grid1D::new(m).unwrap();
        let w = power_weight(&g, &GammaSet::OneD, 0.5).unwrap();
        let alt = State::from_fn(g, |_| 0.0);
        let mut alt = alt;
        for (j, v) in alt.values_mut().iter_mut().enumerate() {
            *v = if j % 2 == 0 { 1.0 } else { -1.0 };
        }
        assert_eq!(centered_energy(&alt, &w).unwrap(), 0.0);
    }

    #[test]
    fn gradient_matches_central_finite_differences() {
        // Central differences are exact for quadratic functionals up to
        // rounding; the gradient lives in the d_m-weighted inner product,
        // hence the 1/d_m rescaling of the directional derivatives.
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for &(m, sigma) in &[(4usize, 0.0), (8, 0.5), (16, 0.5)] {
            let g = Grid1D::new(m).unwrap();
            let w = power_weight(&g, &GammaSet::OneD, sigma).unwrap();
            let u = State::from_fn(g.clone(), |_| rng.gen_range(-1.0..1.0));
            let grad = energy_gradient(&u, &w).unwrap();
            let eps = 1e-5;
            for j in 0..u.len() {
                let mut up = u.clone();
                up.values_mut()[j] += eps;
                let mut dn = u.clone();
                dn.values_mut()[j] -= eps;
                let cdiff = (discrete_energy(&up, &w).unwrap() - discrete_energy(&dn, &w).unwrap())
                    / (2.0 * eps);
                let oracle = cdiff / g.spacing();
                let scale = grad.values().amax().max(1.0);
                assert!(
                    (grad.values()[j] - oracle).abs() <= 1e-6 * scale,
                    "m={m} sigma={sigma} j={j}: {} vs {}",
                    grad.values()[j],
                    oracle
                );
            }
        }
    }

    #[test]
    fn operator_agrees_with_gradient_on_basis_vectors() {
        let g = Grid1D::new(6).unwrap();
        let w = power_weight(&g, &GammaSet::OneD, 0.5).unwrap();
        let a = assemble_operator(&w, &g).unwrap();
        for j in 0..g.len() {
            let mut e = State::zeros(g.clone());
            e.values_mut()[j] = 1.0;
            let via_matrix = a.apply(&e).unwrap();
            let via_grad = energy_gradient(&e, &w).unwrap();
            for k in 0..g.len() {
                assert!((via_matrix.values()[k] - via_grad.values()[k]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn operator_m2_decouples_into_two_blocks() {
        let g = Grid1D::new(2).unwrap();
        let w = power_weight(&g, &GammaSet::OneD, 0.5).unwrap();
        let a = assemble_operator(&w, &g).unwrap();
        let c = 4.0 * FRAC_1_SQRT_2;
        let expect = DMatrix::from_row_slice(
            4,
            4,
            &[
                c, -c, 0.0, 0.0, //
                -c, c, 0.0, 0.0, //
                0.0, 0.0, c, -c, //
                0.0, 0.0, -c, c,
            ],
        );
        assert!((a.matrix() - expect).amax() <= 1e-14);
    }

    #[test]
    fn sigma_zero_gives_periodic_second_difference() {
        let g = Grid1D::new(4).unwrap();
        let w = power_weight(&g, &GammaSet::OneD, 0.0).unwrap();
        let a = assemble_operator(&w, &g).unwrap();
        let n = g.len();
        let s = 1.0 / (g.spacing() * g.spacing());
        for i in 0..n {
            assert_relative_eq!(a.matrix()[(i, i)], 2.0 * s, max_relative = 1e-14);
            assert_relative_eq!(a.matrix()[(i, (i + 1) % n)], -s, max_relative = 1e-14);
        }
    }

    #[test]
    fn rows_sum_to_zero_and_matrix_is_symmetric() {
        for &(m, sigma) in &[(5usize, 0.5), (6, 0.25), (16, 0.75)] {
            let g = Grid1D::new(m).unwrap();
            let w = power_weight(&g, &GammaSet::OneD, sigma).unwrap();
            let a = assemble_operator(&w, &g).unwrap();
            let asym = (a.matrix() - a.matrix().transpose()).amax();
            assert!(asym <= 1e-12);
            let ones = State::constant(g.clone(), 1.0);
            let au = a.apply(&ones).unwrap();
            let scale = a.matrix().amax();
            assert!(au.values().amax() <= 1e-14 * scale.max(1.0));
        }
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let g4 = Grid1D::new(4).unwrap();
        let g5 = Grid1D::new(5).unwrap();
        let w = power_weight(&g4, &GammaSet::OneD, 0.5).unwrap();
        let u = State::zeros(g5);
        assert!(matches!(
            discrete_energy(&u, &w),
            Err(Error::GridMismatch { .. })
        ));
        assert!(energy_gradient(&u, &w).is_err());
        assert!(centered_energy(&u, &w).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        // Summation by parts: <delta_plus u, v> = -<u, delta_minus v>.
        #[test]
        fn difference_adjointness(
            u in prop::collection::vec(-1.0f64..1.0, 8),
            v in prop::collection::vec(-1.0f64..1.0, 8),
        ) {
            let u = state(4, &u);
            let v = state(4, &v);
            let lhs = delta_plus(&u).weighted_dot(&v);
            let rhs = -u.weighted_dot(&delta_minus(&v));
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        }

        // <A u, v> = sum alpha (delta_plus u)(delta_plus v) d_m and
        // <A u, u> = 2 E(u).
        #[test]
        fn operator_bilinear_form_identity(
            u in prop::collection::vec(-1.0f64..1.0, 12),
            v in prop::collection::vec(-1.0f64..1.0, 12),
        ) {
            let g = Grid1D::new(6).unwrap();
            let w = power_weight(&g, &GammaSet::OneD, 0.5).unwrap();
            let u = state(6, &u);
            let v = state(6, &v);
            let a = assemble_operator(&w, &g).unwrap();
            let au = a.apply(&u).unwrap();
            let av = a.apply(&v).unwrap();
            let lhs = au.weighted_dot(&v);
            let sym = u.weighted_dot(&av);
            let du = delta_plus(&u);
            let dv = delta_plus(&v);
            let mut form = 0.0;
            for ((a, x), y) in w.samples().iter().zip(du.values().iter()).zip(dv.values().iter()) {
                form += a * x * y;
            }
            form *= g.spacing();
            prop_assert!((lhs - sym).abs() <= 1e-10 * (1.0 + lhs.abs()));
            prop_assert!((lhs - form).abs() <= 1e-10 * (1.0 + form.abs()));
            let quad = au.weighted_dot(&u);
            let energy = discrete_energy(&u, &w).unwrap();
            prop_assert!((quad - 2.0 * energy).abs() <= 1e-10 * (1.0 + quad.abs()));
        }

        // Mass invariance: <A u, 1> = 0.
        #[test]
        fn operator_annihilates_mass(
            u in prop::collection::vec(-1.0f64..1.0, 12),
        ) {
            let g = Grid1D::new(6).unwrap();
            let w = power_weight(&g, &GammaSet::OneD, 0.5).unwrap();
            let u = state(6, &u);
            let a = assemble_operator(&w, &g).unwrap();
            let au = a.apply(&u).unwrap();
            let ones = State::constant(g, 1.0);
            prop_assert!(au.weighted_dot(&ones).abs() <= 1e-12 * a.matrix().amax());
        }
    }
}
