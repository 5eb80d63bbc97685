//! Eigen-decomposition of the assembled operator and the exact semigroup
//! built from it.
//!
//! Eigenpairs `(mu_k, phi_k)` are sorted ascending and the eigenvectors are
//! orthonormal in the `d_m`-weighted inner product. The kernel (eigenvalues
//! below `1e-10 * mu_max`) is rotated so that `phi_0` is the normalized
//! constant `1/sqrt(2)`; eigenvalues inside the kernel are clamped to zero
//! so that `e^{-t A}` conserves the kernel components exactly for large `t`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::disc_ops::{DiscreteOperator, State};
use crate::grid::Grid1D;
use crate::Error;

/// Relative threshold below which an eigenvalue counts as kernel.
const KERNEL_TOL_REL: f64 = 1e-10;

/// Dense symmetric eigensolver: cyclic Jacobi with threshold skipping.
///
/// Returns eigenvalues in ascending order with the eigenvectors as the
/// matching columns, orthonormal in the plain inner product. Jacobi
/// converges quadratically once the off-diagonal mass is small and keeps
/// the accumulated rotations orthogonal to machine precision, which is
/// what the downstream semigroup arithmetic relies on.
pub(crate) fn symmetric_eigen(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut b = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = a.amax();
    if n > 1 && scale > 0.0 {
        let stop = f64::EPSILON * scale;
        for _sweep in 0..64 {
            let mut off: f64 = 0.0;
            for p in 0..n {
                for q in p + 1..n {
                    off = off.max(b[(p, q)].abs());
                }
            }
            if off <= stop {
                break;
            }
            // rotating entries far below the current off-diagonal scale
            // cannot help convergence yet; the max entry always qualifies
            let threshold = (1e-3 * off).max(stop);
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let bpq = b[(p, q)];
                    if bpq.abs() < threshold {
                        continue;
                    }
                    let theta = (b[(q, q)] - b[(p, p)]) / (2.0 * bpq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    let bpp = b[(p, p)];
                    let bqq = b[(q, q)];
                    b[(p, p)] = c * c * bpp - 2.0 * s * c * bpq + s * s * bqq;
                    b[(q, q)] = s * s * bpp + 2.0 * s * c * bpq + c * c * bqq;
                    b[(p, q)] = 0.0;
                    b[(q, p)] = 0.0;
                    for r in 0..n {
                        if r == p || r == q {
                            continue;
                        }
                        let brp = b[(r, p)];
                        let brq = b[(r, q)];
                        b[(r, p)] = c * brp - s * brq;
                        b[(p, r)] = b[(r, p)];
                        b[(r, q)] = s * brp + c * brq;
                        b[(q, r)] = b[(r, q)];
                    }
                    for r in 0..n {
                        let vrp = v[(r, p)];
                        let vrq = v[(r, q)];
                        v[(r, p)] = c * vrp - s * vrq;
                        v[(r, q)] = s * vrp + c * vrq;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| b[(i, i)].partial_cmp(&b[(j, j)]).unwrap());
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| b[(i, i)]));
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        eigenvectors.set_column(k, &v.column(src));
    }
    (eigenvalues, eigenvectors)
}

#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: DVector<f64>,
    /// Columns are the weighted-orthonormal eigenvectors.
    eigenvectors: DMatrix<f64>,
    kernel_dim: usize,
    grid: Grid1D,
}

impl SpectralDecomposition {
    /// Eigenvalues in ascending order; the first `kernel_dim` are zero.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, k: usize) -> State {
        State::from_raw(self.grid.clone(), self.eigenvectors.column(k).into())
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel_dim
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Smallest eigenvalue above the kernel, when one exists.
    pub fn spectral_gap(&self) -> Option<f64> {
        (self.kernel_dim < self.len()).then(|| self.eigenvalues[self.kernel_dim])
    }

    /// Coefficients `<u, phi_k>` in the weighted inner product.
    pub fn coefficients(&self, u: &State) -> DVector<f64> {
        self.eigenvectors.transpose() * u.values() * self.grid.spacing()
    }
}

/// Full decomposition of a symmetric positive semidefinite operator.
pub fn eigendecompose(op: &DiscreteOperator) -> Result<SpectralDecomposition, Error> {
    let a = op.matrix();
    let scale = a.amax().max(1.0);
    let asym = (a - a.transpose()).amax();
    if asym > 1e-12 * scale {
        return Err(Error::NotSymmetric { deviation: asym });
    }
    let n = a.nrows();
    let d_m = op.grid().spacing();

    let (mut eigenvalues, mut eigenvectors) = symmetric_eigen(a);
    eigenvectors *= 1.0 / d_m.sqrt();

    let mu_max = eigenvalues[n - 1].max(0.0);
    let tol = KERNEL_TOL_REL * mu_max;
    let kernel_dim = eigenvalues.iter().take_while(|&&mu| mu < tol).count();
    for k in 0..kernel_dim {
        eigenvalues[k] = 0.0;
    }

    if kernel_dim > 0 {
        rotate_kernel(&mut eigenvectors, kernel_dim, d_m, n);
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        kernel_dim,
        grid: op.grid().clone(),
    })
}

/// Rotate the kernel columns so the first one is the normalized constant
/// `1/sqrt(2) * 1`; the rest are rebuilt by modified Gram-Schmidt in the
/// weighted inner product, largest residual first.
fn rotate_kernel(vectors: &mut DMatrix<f64>, kernel_dim: usize, d_m: f64, n: usize) {
    let wdot = |a: &DVector<f64>, b: &DVector<f64>| a.dot(b) * d_m;
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(kernel_dim);
    basis.push(DVector::from_element(n, std::f64::consts::FRAC_1_SQRT_2));

    let mut candidates: Vec<DVector<f64>> =
        (0..kernel_dim).map(|k| vectors.column(k).into()).collect();
    while basis.len() < kernel_dim {
        let mut best: Option<(usize, DVector<f64>, f64)> = None;
        for (i, cand) in candidates.iter().enumerate() {
            let mut r = cand.clone();
            for b in &basis {
                let c = wdot(&r, b);
                r.axpy(-c, b, 1.0);
            }
            let norm = (wdot(&r, &r)).sqrt();
            if best.as_ref().is_none_or(|(_, _, bn)| norm > *bn) {
                best = Some((i, r, norm));
            }
        }
        let (idx, r, norm) = best.expect("kernel candidates exhausted");
        debug_assert!(norm > 1e-6, "kernel does not contain the constant vector");
        basis.push(r / norm);
        candidates.swap_remove(idx);
    }
    for (k, b) in basis.iter().enumerate() {
        vectors.set_column(k, b);
    }
}

/// `e^{-t A} u0` evaluated exactly through the decomposition.
pub fn semigroup_apply(dec: &SpectralDecomposition, t: f64, u0: &State) -> Result<State, Error> {
    if t < 0.0 {
        return Err(Error::InvalidParameter {
            what: "semigroup time",
            why: format!("must be nonnegative, got {t}"),
        });
    }
    if u0.len() != dec.len() {
        return Err(Error::GridMismatch {
            expected: dec.len(),
            got: u0.len(),
        });
    }
    let mut coeffs = dec.coefficients(u0);
    for (c, &mu) in coeffs.iter_mut().zip(dec.eigenvalues.iter()) {
        *c *= (-mu * t).exp();
    }
    Ok(State::from_raw(
        dec.grid.clone(),
        &dec.eigenvectors * coeffs,
    ))
}

/// Discrete Poincare constant: the reciprocal of the smallest eigenvalue
/// above the kernel.
pub fn poincare_constant(dec: &SpectralDecomposition) -> Result<f64, Error> {
    match dec.spectral_gap() {
        Some(gap) if gap > 0.0 => Ok(1.0 / gap),
        _ => Err(Error::DegenerateSpectrum),
    }
}

/// `|| t A e^{-t A} u0 ||` in the weighted norm, computed spectrally.
pub fn smoothing_norm(dec: &SpectralDecomposition, t: f64, u0: &State) -> f64 {
    let coeffs = dec.coefficients(u0);
    let mut s = 0.0;
    for (c, &mu) in coeffs.iter().zip(dec.eigenvalues.iter()) {
        let w = t * mu * (-t * mu).exp() * c;
        s += w * w;
    }
    s.sqrt()
}

/// Max of [`smoothing_norm`] over the time grid and random unit probes.
/// The scalar bound `sup_s s e^{-s} = 1/e` caps the result.
pub fn analyticity_bound(
    dec: &SpectralDecomposition,
    t_grid: &[f64],
    rng: &mut impl Rng,
) -> Result<f64, Error> {
    if t_grid.iter().any(|&t| t <= 0.0) {
        return Err(Error::InvalidParameter {
            what: "analyticity time grid",
            why: "all times must be positive".into(),
        });
    }
    let n = dec.len();
    let mut bound: f64 = 0.0;
    for _ in 0..8 {
        let mut probe = State::from_raw(
            dec.grid.clone(),
            DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)),
        );
        let norm = probe.weighted_norm();
        if norm == 0.0 {
            continue;
        }
        *probe.values_mut() /= norm;
        for &t in t_grid {
            bound = bound.max(smoothing_norm(dec, t, &probe));
        }
    }
    Ok(bound)
}
