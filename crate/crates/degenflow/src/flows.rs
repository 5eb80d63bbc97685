//! The competing evolutions generated by one and the same energy.
//!
//! * `T1` — the regularizing flow: the exact semigroup of the assembled
//!   operator. On odd grids it averages everything out; on even grids the
//!   two interface nodes decouple the lattice and the discrete jump mode
//!   `h` survives.
//! * `T2` — the singular flow: the coefficient of `h` is frozen and only
//!   the complement evolves under `T1`.
//! * `T3` — the split flow: the lattice is cut at the two zero-weight
//!   nodes and each block runs its own flow with the coupling through the
//!   interface severed.
//! * `Strong` — `T1` machinery driven by a strongly degenerate weight.
//!
//! `make_h` builds the normalized piecewise-constant mode: on even grids
//! the exact jump vector (zero energy), on odd grids its pointwise sample.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::FRAC_1_SQRT_2;

use crate::disc_ops::{assemble_operator, DiscreteOperator, State};
use crate::grid::Grid1D;
use crate::spectral::{eigendecompose, semigroup_apply};
use crate::weights::{Weight, WeightClass};
use crate::Error;

/// Which interpretation of the gradient flow to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowKind {
    T1,
    T2,
    T3,
    Strong,
}

/// The normalized jump mode: `+1/sqrt(2)` on the inner region, `-1/sqrt(2)`
/// outside, with `<h, 1> = 0` and `<h, h> = 1` in the weighted inner
/// product.
///
/// Even grids place the jumps exactly on the zero-weight nodes
/// (`+` for `-m/2 < i <= m/2`); odd grids sample the function pointwise.
pub fn make_h(grid: &Grid1D) -> State {
    let m = grid.m() as isize;
    let mut values = DVector::from_element(grid.len(), -FRAC_1_SQRT_2);
    let inner: std::ops::RangeInclusive<isize> = if m % 2 == 0 {
        (-m / 2 + 1)..=(m / 2)
    } else {
        (-(m - 1) / 2)..=((m - 1) / 2)
    };
    for i in inner {
        values[grid.storage_index(i)] = FRAC_1_SQRT_2;
    }
    State::from_raw(grid.clone(), values)
}

fn check_compatible(kind: FlowKind, grid: &Grid1D, w: &Weight) -> Result<(), Error> {
    if w.len() != grid.len() {
        return Err(Error::GridMismatch {
            expected: grid.len(),
            got: w.len(),
        });
    }
    match kind {
        FlowKind::T3 if !grid.m().is_multiple_of(2) => Err(Error::IncompatibleFlow {
            kind: "T3",
            why: "requires an even grid so the interfaces sit on nodes".into(),
        }),
        FlowKind::Strong if w.class() != WeightClass::Strong => Err(Error::IncompatibleFlow {
            kind: "Strong",
            why: "requires a strongly degenerate weight".into(),
        }),
        _ => Ok(()),
    }
}

/// Storage-index blocks `(j1, j2]` and `(j2, j1]` (cyclically) between the
/// two zero-weight nodes. Each interface node ends up at the block end
/// whose inward coupling is positive, so both blocks stay connected and
/// their sub-operators keep only constants in the kernel.
fn split_blocks(w: &Weight, n: usize) -> Result<(Vec<usize>, Vec<usize>), Error> {
    let zeros = w.zero_nodes();
    if zeros.len() != 2 {
        return Err(Error::IncompatibleFlow {
            kind: "T3",
            why: format!(
                "weight must vanish at exactly the two interface nodes, found {} zeros",
                zeros.len()
            ),
        });
    }
    let (j1, j2) = (zeros[0], zeros[1]);
    let block_a: Vec<usize> = (j1 + 1..=j2).collect();
    let block_b: Vec<usize> = (j2 + 1..n).chain(0..=j1).collect();
    Ok((block_a, block_b))
}

/// Evolve a sub-vector exactly under a symmetric PSD sub-matrix, clamping
/// near-kernel eigenvalues to zero as in the full decomposition.
fn sub_evolve(a: &DMatrix<f64>, v: &DVector<f64>, t: f64) -> DVector<f64> {
    let (eigenvalues, eigenvectors) = crate::spectral::symmetric_eigen(a);
    let mu_max = eigenvalues[eigenvalues.len() - 1].max(0.0);
    let tol = 1e-10 * mu_max;
    let coeffs = eigenvectors.transpose() * v;
    let damped = DVector::from_fn(coeffs.len(), |k, _| {
        let mu = if eigenvalues[k] < tol {
            0.0
        } else {
            eigenvalues[k]
        };
        coeffs[k] * (-mu * t).exp()
    });
    &eigenvectors * damped
}

/// Run the chosen flow for time `t`.
pub fn evolve(kind: FlowKind, u0: &State, w: &Weight, t: f64) -> Result<State, Error> {
    if t < 0.0 {
        return Err(Error::InvalidParameter {
            what: "flow time",
            why: format!("must be nonnegative, got {t}"),
        });
    }
    let grid = u0.grid().clone();
    check_compatible(kind, &grid, w)?;
    match kind {
        FlowKind::T1 | FlowKind::Strong => {
            let op = assemble_operator(w, &grid)?;
            let dec = eigendecompose(&op)?;
            semigroup_apply(&dec, t, u0)
        }
        FlowKind::T2 => {
            let h = make_h(&grid);
            let c = u0.weighted_dot(&h);
            let complement = u0.axpy(-c, &h);
            let op = assemble_operator(w, &grid)?;
            let dec = eigendecompose(&op)?;
            let evolved = semigroup_apply(&dec, t, &complement)?;
            Ok(evolved.axpy(c, &h))
        }
        FlowKind::T3 => {
            let op = assemble_operator(w, &grid)?;
            let (block_a, block_b) = split_blocks(w, grid.len())?;
            let mut out = State::zeros(grid.clone());
            for block in [&block_a, &block_b] {
                let sub = op
                    .matrix()
                    .select_rows(block.iter())
                    .select_columns(block.iter());
                let v = DVector::from_iterator(block.len(), block.iter().map(|&j| u0.values()[j]));
                let evolved = sub_evolve(&sub, &v, t);
                for (local, &j) in block.iter().enumerate() {
                    out.values_mut()[j] = evolved[local];
                }
            }
            Ok(out)
        }
    }
}

/// Whether the weight vanishes exactly at the two even-grid interface
/// nodes, which is what lets the jump mode survive the `T1` flow.
fn has_interface_zeros(grid: &Grid1D, w: &Weight) -> bool {
    if !grid.m().is_multiple_of(2) {
        return false;
    }
    let m = grid.m() as isize;
    let zeros = w.zero_nodes();
    zeros == vec![grid.storage_index(-m / 2), grid.storage_index(m / 2)]
}

/// Closed-form `t -> infinity` limit of each flow.
pub fn steady_state(kind: FlowKind, u0: &State, w: &Weight) -> Result<State, Error> {
    let grid = u0.grid().clone();
    check_compatible(kind, &grid, w)?;
    let mean = u0.mean();
    match kind {
        FlowKind::T1 => {
            let mut out = State::constant(grid.clone(), mean);
            if has_interface_zeros(&grid, w) {
                let h = make_h(&grid);
                out = out.axpy(u0.weighted_dot(&h), &h);
            }
            Ok(out)
        }
        FlowKind::T2 | FlowKind::Strong => {
            let h = make_h(&grid);
            let out = State::constant(grid.clone(), mean);
            Ok(out.axpy(u0.weighted_dot(&h), &h))
        }
        FlowKind::T3 => {
            let (block_a, block_b) = split_blocks(w, grid.len())?;
            let mut out = State::zeros(grid.clone());
            for block in [&block_a, &block_b] {
                let avg: f64 =
                    block.iter().map(|&j| u0.values()[j]).sum::<f64>() / block.len() as f64;
                for &j in block {
                    out.values_mut()[j] = avg;
                }
            }
            Ok(out)
        }
    }
}

/// One implicit Euler (proximal) step: the unique solution of
/// `(I + h A) v = u`, equivalently the minimizer of
/// `E(v) + ||v - u||^2 / (2h)`.
pub fn implicit_euler_step(u: &State, op: &DiscreteOperator, h_step: f64) -> Result<State, Error> {
    if h_step <= 0.0 {
        return Err(Error::InvalidParameter {
            what: "implicit Euler step size",
            why: format!("must be positive, got {h_step}"),
        });
    }
    if u.len() != op.len() {
        return Err(Error::GridMismatch {
            expected: op.len(),
            got: u.len(),
        });
    }
    let n = op.len();
    let system = DMatrix::identity(n, n) + op.matrix() * h_step;
    let chol = nalgebra::Cholesky::new(system).ok_or(Error::SolveFailed)?;
    Ok(State::from_raw(u.grid().clone(), chol.solve(u.values())))
}

/// Minimizing movement: `floor(t_final / h_step)` implicit Euler steps,
/// i.e. the resolvent iteration `(I + h A)^{-k} u0`. First-order accurate
/// against the exact semigroup as `h_step -> 0`.
pub fn minimizing_movement(
    u0: &State,
    op: &DiscreteOperator,
    h_step: f64,
    t_final: f64,
) -> Result<State, Error> {
    if h_step <= 0.0 {
        return Err(Error::InvalidParameter {
            what: "implicit Euler step size",
            why: format!("must be positive, got {h_step}"),
        });
    }
    if t_final < 0.0 {
        return Err(Error::InvalidParameter {
            what: "final time",
            why: format!("must be nonnegative, got {t_final}"),
        });
    }
    if u0.len() != op.len() {
        return Err(Error::GridMismatch {
            expected: op.len(),
            got: u0.len(),
        });
    }
    let steps = (t_final / h_step).floor() as usize;
    let n = op.len();
    let system = DMatrix::identity(n, n) + op.matrix() * h_step;
    let chol = nalgebra::Cholesky::new(system).ok_or(Error::SolveFailed)?;
    let mut v = u0.values().clone();
    for _ in 0..steps {
        v = chol.solve(&v);
    }
    Ok(State::from_raw(u0.grid().clone(), v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc_ops::discrete_energy;
    use crate::grid::GammaSet;
    use crate::spectral::SpectralDecomposition;
    use crate::weights::{power_weight, strong_weight};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn setup(m: usize, sigma: f64) -> (Grid1D, Weight) {
        let g = Grid1D::new(m).unwrap();
        let w = power_weight(&g, &GammaSet::OneD, sigma).unwrap();
        (g, w)
    }

    fn decomposition(g: &Grid1D, w: &Weight) -> SpectralDecomposition {
        eigendecompose(&assemble_operator(w, g).unwrap()).unwrap()
    }

    fn random_state(g: &Grid1D, seed: u64) -> State {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        State::from_fn(g.clone(), |_| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn h_vector_m2_and_inner_products() {
        let g = Grid1D::new(2).unwrap();
        let h = make_h(&g);
        let c = FRAC_1_SQRT_2;
        assert_eq!(h.values().as_slice(), &[-c, -c, c, c]);

        for m in [2usize, 5, 16, 33] {
            let g = Grid1D::new(m).unwrap();
            let h = make_h(&g);
            let ones = State::constant(g, 1.0);
            assert_eq!(h.weighted_dot(&ones), 0.0, "m={m}");
            assert!((h.weighted_dot(&h) - 1.0).abs() <= 1e-14, "m={m}");
        }
    }

    #[test]
    fn h_has_zero_energy_on_even_grids() {
        for m in [2usize, 8, 64] {
            let (g, w) = setup(m, 0.5);
            let h = make_h(&g);
            assert_eq!(discrete_energy(&h, &w).unwrap(), 0.0, "m={m}");
        }
    }

    #[test]
    fn parity_witness_even_stationary_odd_decays() {
        // same scheme, same datum: the even grid keeps the jump forever,
        // the odd grid averages it away
        let (ge, we) = setup(8, 0.5);
        let h = make_h(&ge);
        let dec = decomposition(&ge, &we);
        let t = 40.0 / dec.spectral_gap().unwrap();
        let even = evolve(FlowKind::T1, &h, &we, t).unwrap();
        assert!(even.axpy(-1.0, &h).weighted_norm() <= 1e-10);

        let (go, wo) = setup(9, 0.5);
        let ho = make_h(&go);
        let dec = decomposition(&go, &wo);
        let t = 40.0 / dec.spectral_gap().unwrap();
        let odd = evolve(FlowKind::T1, &ho, &wo, t).unwrap();
        assert!(odd.weighted_norm() <= 1e-8, "norm {}", odd.weighted_norm());

        // the closed form agrees: the jump datum is its own even-grid limit
        let closed = steady_state(FlowKind::T1, &h, &we).unwrap();
        assert!(closed.axpy(-1.0, &h).weighted_norm() <= 1e-14);
    }

    #[test]
    fn even_grid_limit_matches_projection_formula() {
        let (g, w) = setup(16, 0.5);
        let u0 = random_state(&g, 2);
        let dec = decomposition(&g, &w);
        let t = 40.0 / dec.spectral_gap().unwrap();
        let evolved = evolve(FlowKind::T1, &u0, &w, t).unwrap();
        let closed = steady_state(FlowKind::T1, &u0, &w).unwrap();
        assert!(evolved.axpy(-1.0, &closed).weighted_norm() <= 1e-6);
        // the closed form is the projection onto span{1, h}
        let h = make_h(&g);
        let manual = State::constant(g, u0.mean()).axpy(u0.weighted_dot(&h), &h);
        assert!(closed.axpy(-1.0, &manual).weighted_norm() <= 1e-14);
    }

    #[test]
    fn t1_odd_steady_state_of_mean_zero_data_vanishes() {
        let (g, w) = setup(9, 0.5);
        let mut u0 = random_state(&g, 21);
        let mean = u0.mean();
        for v in u0.values_mut().iter_mut() {
            *v -= mean;
        }
        let ss = steady_state(FlowKind::T1, &u0, &w).unwrap();
        assert!(ss.weighted_norm() <= 1e-12);
    }

    #[test]
    fn t1_steady_state_without_interface_zeros_is_the_mean() {
        // sigma = 0 keeps the weight positive everywhere, so even grids
        // still average out
        let (g, w) = setup(8, 0.0);
        let u0 = random_state(&g, 3);
        let ss = steady_state(FlowKind::T1, &u0, &w).unwrap();
        for &v in ss.values().iter() {
            assert_relative_eq!(v, u0.mean(), max_relative = 1e-12);
        }
        let dec = decomposition(&g, &w);
        let t = 40.0 / dec.spectral_gap().unwrap();
        let evolved = evolve(FlowKind::T1, &u0, &w, t).unwrap();
        assert!(evolved.axpy(-1.0, &ss).weighted_norm() <= 1e-8);
    }

    #[test]
    fn t2_preserves_the_frozen_component_and_reaches_its_limit() {
        let (g, w) = setup(16, 0.5);
        let u0 = random_state(&g, 4);
        let h = make_h(&g);
        let c0 = u0.weighted_dot(&h);
        let dec = decomposition(&g, &w);
        let gap = dec.spectral_gap().unwrap();
        for t in [0.0, 0.01, 0.1, 1.0, 40.0 / gap] {
            let ut = evolve(FlowKind::T2, &u0, &w, t).unwrap();
            assert!((ut.weighted_dot(&h) - c0).abs() <= 1e-10, "t={t}");
        }
        let limit = evolve(FlowKind::T2, &u0, &w, 40.0 / gap).unwrap();
        let closed = steady_state(FlowKind::T2, &u0, &w).unwrap();
        assert!(limit.axpy(-1.0, &closed).weighted_norm() <= 1e-6);
    }

    #[test]
    fn t2_flow_map_shifts_exactly_by_the_h_mode() {
        // adding delta * h to the datum shifts every snapshot by exactly
        // delta * h; the mode never decays, unlike every T1 mode on odd
        // grids
        for m in [9usize, 16] {
            let (g, w) = setup(m, 0.5);
            let u0 = random_state(&g, 5);
            let h = make_h(&g);
            let delta = 0.37;
            let shifted = u0.axpy(delta, &h);
            for t in [0.05, 0.7] {
                let a = evolve(FlowKind::T2, &u0, &w, t).unwrap();
                let b = evolve(FlowKind::T2, &shifted, &w, t).unwrap();
                let diff = b.axpy(-1.0, &a).axpy(-delta, &h);
                assert!(diff.weighted_norm() <= 1e-12, "m={m} t={t}");
            }
        }
    }

    #[test]
    fn t3_reaches_per_block_averages() {
        let (g, w) = setup(16, 0.5);
        let u0 = random_state(&g, 6);
        let dec = decomposition(&g, &w);
        let t = 40.0 / dec.spectral_gap().unwrap();
        let evolved = evolve(FlowKind::T3, &u0, &w, t).unwrap();
        let closed = steady_state(FlowKind::T3, &u0, &w).unwrap();
        assert!(evolved.axpy(-1.0, &closed).weighted_norm() <= 1e-6);

        // blocks follow the sign pattern of h: averages over m nodes each
        let h = make_h(&g);
        let m = g.m();
        let (mut sum_in, mut sum_out) = (0.0, 0.0);
        for j in 0..g.len() {
            if h.values()[j] > 0.0 {
                sum_in += u0.values()[j];
            } else {
                sum_out += u0.values()[j];
            }
        }
        for j in 0..g.len() {
            let expect = if h.values()[j] > 0.0 {
                sum_in / m as f64
            } else {
                sum_out / m as f64
            };
            assert_relative_eq!(closed.values()[j], expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn t3_coincides_with_t1_on_even_grids() {
        // the interface couplings carry zero weight, so cutting them does
        // not change the operator: the split flow and the full flow agree
        let (g, w) = setup(16, 0.5);
        let u0 = random_state(&g, 7);
        for t in [0.01, 0.3, 2.0] {
            let a = evolve(FlowKind::T1, &u0, &w, t).unwrap();
            let b = evolve(FlowKind::T3, &u0, &w, t).unwrap();
            assert!(a.axpy(-1.0, &b).weighted_norm() <= 1e-9, "t={t}");
        }
    }

    #[test]
    fn strong_flow_limit_matches_even_grid_formula() {
        let g = Grid1D::new(16).unwrap();
        let w = strong_weight(&g, &GammaSet::OneD, 0.5).unwrap();
        let u0 = random_state(&g, 8);
        let dec = decomposition(&g, &w);
        let t = 40.0 / dec.spectral_gap().unwrap();
        let evolved = evolve(FlowKind::Strong, &u0, &w, t).unwrap();
        let closed = steady_state(FlowKind::Strong, &u0, &w).unwrap();
        assert!(evolved.axpy(-1.0, &closed).weighted_norm() <= 1e-6);

        let weak = power_weight(&g, &GammaSet::OneD, 0.5).unwrap();
        let t1_closed = steady_state(FlowKind::T1, &u0, &weak).unwrap();
        assert!(closed.axpy(-1.0, &t1_closed).weighted_norm() <= 1e-14);
    }

    #[test]
    fn incompatible_flows_are_rejected() {
        let (g_odd, w_odd) = setup(9, 0.5);
        let u = State::zeros(g_odd.clone());
        assert!(matches!(
            evolve(FlowKind::T3, &u, &w_odd, 1.0),
            Err(Error::IncompatibleFlow { .. })
        ));
        let (g, w) = setup(8, 0.5);
        let u = State::zeros(g.clone());
        assert!(matches!(
            evolve(FlowKind::Strong, &u, &w, 1.0),
            Err(Error::IncompatibleFlow { .. })
        ));
        assert!(evolve(FlowKind::T1, &u, &w, -0.5).is_err());

        let op = assemble_operator(&w, &g).unwrap();
        assert!(implicit_euler_step(&u, &op, 0.0).is_err());
        assert!(implicit_euler_step(&u, &op, -0.1).is_err());
        assert!(minimizing_movement(&u, &op, 0.1, -1.0).is_err());
    }

    #[test]
    fn mass_energy_and_norm_behave_along_trajectories() {
        let (g, w) = setup(16, 0.5);
        let u0 = random_state(&g, 9);
        let dec = decomposition(&g, &w);
        let t_max = 40.0 / dec.spectral_gap().unwrap();
        for kind in [FlowKind::T1, FlowKind::T2, FlowKind::T3] {
            let mut prev_energy = f64::INFINITY;
            for k in 0..20 {
                let t = t_max * k as f64 / 19.0;
                let ut = evolve(kind, &u0, &w, t).unwrap();
                assert!(
                    (ut.mean() - u0.mean()).abs() <= 1e-10,
                    "{kind:?} mass at t={t}"
                );
                let e = discrete_energy(&ut, &w).unwrap();
                assert!(e <= prev_energy + 1e-12, "{kind:?} energy at t={t}");
                prev_energy = e;
                assert!(ut.weighted_norm() <= u0.weighted_norm() * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn implicit_euler_fixes_constants_and_scales_modes() {
        let (g, w) = setup(8, 0.5);
        let op = assemble_operator(&w, &g).unwrap();
        let c = State::constant(g.clone(), 2.0);
        let out = implicit_euler_step(&c, &op, 0.5).unwrap();
        assert!(out.axpy(-1.0, &c).weighted_norm() <= 1e-12);

        let dec = decomposition(&g, &w);
        let k = dec.kernel_dim();
        let mu = dec.eigenvalues()[k];
        let phi = dec.eigenvector(k);
        let h_step = 0.25;
        let stepped = implicit_euler_step(&phi, &op, h_step).unwrap();
        let expect = phi.axpy(1.0 / (1.0 + h_step * mu) - 1.0, &phi);
        assert!(stepped.axpy(-1.0, &expect).weighted_norm() <= 1e-10);
    }

    #[test]
    fn implicit_euler_satisfies_proximal_optimality() {
        // the step minimizes E(v) + ||v - u||^2/(2h): its gradient
        // A v + (v - u)/h must vanish
        let g = Grid1D::new(2).unwrap();
        let w = power_weight(&g, &GammaSet::OneD, 0.5).unwrap();
        let op = assemble_operator(&w, &g).unwrap();
        let u = State::new(g.clone(), DVector::from_row_slice(&[1.0, 0.0, 0.0, 0.0])).unwrap();
        let h_step = 0.25;
        let v = implicit_euler_step(&u, &op, h_step).unwrap();
        let grad = op.apply(&v).unwrap().axpy(1.0 / h_step, &v.axpy(-1.0, &u));
        assert!(
            grad.weighted_norm() <= 1e-10,
            "residual {}",
            grad.weighted_norm()
        );
    }

    #[test]
    fn minimizing_movement_converges_first_order() {
        let (g, w) = setup(9, 0.5);
        let op = assemble_operator(&w, &g).unwrap();
        let dec = decomposition(&g, &w);
        let u0 = random_state(&g, 10);
        let t = 0.1;
        let exact = semigroup_apply(&dec, t, &u0).unwrap();
        let errs: Vec<f64> = [t / 8.0, t / 16.0, t / 32.0]
            .iter()
            .map(|&h| {
                minimizing_movement(&u0, &op, h, t)
                    .unwrap()
                    .axpy(-1.0, &exact)
                    .weighted_norm()
            })
            .collect();
        let order1 = (errs[0] / errs[1]).log2();
        let order2 = (errs[1] / errs[2]).log2();
        assert!(order1 >= 0.9 && order2 >= 0.9, "orders {order1} {order2}");

        let at0 = minimizing_movement(&u0, &op, 0.01, 0.0).unwrap();
        assert!(at0.axpy(-1.0, &u0).weighted_norm() == 0.0);
    }

    #[test]
    fn resolvent_iteration_matches_scalar_exponential_on_modes() {
        let (g, w) = setup(8, 0.5);
        let op = assemble_operator(&w, &g).unwrap();
        let dec = decomposition(&g, &w);
        let k = dec.kernel_dim();
        let mu = dec.eigenvalues()[k];
        let phi = dec.eigenvector(k);
        let t = 0.5 / mu;
        for steps in [4usize, 16, 64] {
            let h = t / steps as f64;
            let out = minimizing_movement(&phi, &op, h, t).unwrap();
            let scalar = (1.0 + h * mu).powi(-(steps as i32));
            let expect = phi.axpy(scalar - 1.0, &phi);
            let err = out.axpy(-1.0, &expect).weighted_norm();
            assert!(err <= 1e-9, "steps={steps} err={err}");
            let vs_exp = (scalar - (-mu * t).exp()).abs();
            assert!(vs_exp <= 2.0 * mu * mu * t * t / steps as f64 + 1e-12);
        }
    }

    #[test]
    fn cosine_datum_decays_at_the_laplacian_rate() {
        // sanity anchor for sigma = 0: mode k=1 of the discrete Laplacian
        let (g, w) = setup(32, 0.0);
        let u0 = State::from_fn(g.clone(), |x| (PI * x).cos());
        let d = g.spacing();
        let mu = 2.0 * (1.0 - (PI * d).cos()) / (d * d);
        let t = 0.05;
        let out = evolve(FlowKind::T1, &u0, &w, t).unwrap();
        let expect = u0.axpy((-mu * t).exp() - 1.0, &u0);
        assert!(out.axpy(-1.0, &expect).weighted_norm() <= 1e-9);
    }
}
