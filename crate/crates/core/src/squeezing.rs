//! The Gaussian resource theory of squeezing: the maximal-squeezing
//! monotone and its relatives, the closed-form assisted value, the
//! constructive pure-lower-bound algorithm, and the instance showing that
//! the optimal helper strategy depends on the monotone.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::layout::ModeLayout;
use crate::linalg;
use crate::symplectic::{embed_unitary, Qcm, SymplecticMatrix, DEFAULT_VALIDITY_TOL};

/// Summary of the squeezing monotones of one state.
#[derive(Debug, Clone)]
pub struct SqueezingReport {
    /// Maximal squeezing `S(V) = max{1, 1/lambda_min}`.
    pub s_value: f64,
    /// Assisted value `lambda_max(V)`.
    pub s_assist: f64,
    /// Assisted entanglement potential in bits; single-mode states only.
    pub ep_assist: Option<f64>,
    /// `kappa_i` for `i = 1..2n`; non-increasing, `kappa_1 = S(V)`.
    pub kappa: Vec<f64>,
}

/// A pure state `tau <= V` fixing a chosen eigenpair of `V`; certifies the
/// assisted-squeezing optimum.
#[derive(Debug, Clone)]
pub struct PureLowerBoundCertificate {
    pub tau: Qcm,
    pub eigvec: DVector<f64>,
    pub eigval: f64,
}

impl PureLowerBoundCertificate {
    /// Re-check the three certificate invariants; returns the worst defect
    /// of (ordering, eigen-equation, purity).
    pub fn defects(&self, v: &Qcm) -> Result<(f64, f64, f64)> {
        let vx = v.to_xxpp();
        let order = -linalg::min_eigenvalue(&(vx.matrix() - self.tau.matrix()));
        let eig = (self.tau.matrix() * &self.eigvec - &self.eigvec * self.eigval).norm();
        let purity = self.tau.purity_defect()?;
        Ok((order.max(0.0), eig, purity))
    }
}

fn require_valid(v: &Qcm) -> Result<Qcm> {
    let vx = v.to_xxpp();
    let (ok, witness) = vx.validity(DEFAULT_VALIDITY_TOL)?;
    if !ok {
        return Err(Error::InvalidQcm { min_nu: witness });
    }
    Ok(vx)
}

/// Maximal squeezing `S(V) = max{1, 1/lambda_min(V)}`: twice the minimal
/// quadrature variance over all phase-space directions, floored at the
/// vacuum level.
pub fn max_squeezing(v: &Qcm) -> Result<f64> {
    let vx = require_valid(v)?;
    Ok((1.0 / vx.min_eigenvalue()).max(1.0))
}

/// `kappa_i(V) = max{1/lambda_i^up(V), 1}` for 1-based `i`; non-increasing
/// in `i`, with `kappa_1` equal to the maximal squeezing.
pub fn kappa(v: &Qcm, i: usize) -> Result<f64> {
    let all = kappas(v)?;
    if i == 0 || i > all.len() {
        return Err(Error::IndexOutOfRange(format!(
            "kappa index {i} outside 1..={}",
            all.len()
        )));
    }
    Ok(all[i - 1])
}

/// All `kappa_i`, `i = 1..2n`.
pub fn kappas(v: &Qcm) -> Result<Vec<f64>> {
    let vx = require_valid(v)?;
    let mut evals = vx.eigenvalues();
    evals.reverse(); // ascending
    Ok(evals.iter().map(|&l| (1.0 / l).max(1.0)).collect())
}

/// The Gaussian maximal squeezing of assistance: `lambda_max(V)`.
pub fn squeezing_of_assistance(v: &Qcm) -> Result<f64> {
    let vx = require_valid(v)?;
    Ok(vx.max_eigenvalue())
}

/// Assisted entanglement potential of a single-mode state, in bits:
/// `(1/2) log2 lambda_max(V)`.
pub fn ep_of_assistance(v: &Qcm) -> Result<f64> {
    if v.n_modes() != 1 {
        return Err(Error::ShapeMismatch {
            expected: "single-mode state".into(),
            got: format!("{} modes", v.n_modes()),
        });
    }
    Ok(0.5 * squeezing_of_assistance(v)?.log2())
}

/// Squeezing before and assisted squeezing after mixing a pure squeezed
/// state `diag(lambda, 1/lambda)` with vacuum on a beam splitter of
/// transmissivity `tau`: `(lambda, tau*lambda + 1 - tau)`. The second entry
/// is strictly smaller unless `tau = 1` or `lambda = 1`.
pub fn cyclic_gap(lambda: f64, tau: f64) -> Result<(f64, f64)> {
    if lambda < 1.0 {
        return Err(Error::ParameterRange(format!("lambda must be >= 1, got {lambda}")));
    }
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::ParameterRange(format!("tau must be in [0,1], got {tau}")));
    }
    Ok((lambda, tau * lambda + 1.0 - tau))
}

/// Full squeezing summary.
pub fn report(v: &Qcm) -> Result<SqueezingReport> {
    let s_value = max_squeezing(v)?;
    let s_assist = squeezing_of_assistance(v)?;
    let ep_assist = if v.n_modes() == 1 { Some(ep_of_assistance(v)?) } else { None };
    Ok(SqueezingReport { s_value, s_assist, ep_assist, kappa: kappas(v)? })
}

/// Orthogonal symplectic `K` with `K x = e_1`, for a unit vector `x`
/// (`Xxpp` ordering). Built through the unitary embedding: the orthogonal
/// symplectic group acts transitively on the unit sphere.
pub fn map_vector_to_e1(x: &DVector<f64>) -> Result<SymplecticMatrix> {
    let dim = x.len();
    if dim == 0 || dim % 2 != 0 {
        return Err(Error::ShapeMismatch {
            expected: "even-dimensional vector".into(),
            got: format!("{dim}"),
        });
    }
    let n = dim / 2;
    let norm = x.norm();
    if norm < 1e-12 {
        return Err(Error::ParameterRange("cannot rotate the zero vector".into()));
    }
    // complexify: z_j = x_j + i p_j
    let z = DVector::from_fn(n, |j, _| Complex::new(x[j] / norm, x[n + j] / norm));
    let alpha = if z[0].norm() > 0.0 { z[0] / z[0].norm() } else { Complex::new(1.0, 0.0) };
    // Householder reflection sending z to alpha * e_1, then a phase fix.
    let mut w = z.clone();
    w[0] -= alpha;
    let wn2 = w.dot(&w.map(|c| c.conj())).re;
    let mut u = DMatrix::from_diagonal_element(n, n, Complex::new(1.0, 0.0));
    if wn2 > 1e-24 {
        for i in 0..n {
            for j in 0..n {
                u[(i, j)] -= w[i] * w[j].conj() * Complex::new(2.0 / wn2, 0.0);
            }
        }
    }
    // phase fix: premultiply row 0 by conj(alpha)
    for j in 0..n {
        u[(0, j)] *= alpha.conj();
    }
    let k = embed_unitary(&u);
    let ks = SymplecticMatrix::new_unchecked(k, ModeLayout::xxpp(n));
    let mapped = ks.matrix() * (x / norm);
    let mut e1 = DVector::zeros(dim);
    e1[0] = 1.0;
    if (mapped - e1).norm() > 1e-10 {
        return Err(Error::Numerical("rotation to e1 failed its postcondition".into()));
    }
    Ok(ks)
}

/// Constructive pure lower bound: for `V` valid and an eigenpair
/// `V x = lambda x`, returns a pure `tau <= V` with `tau x = lambda x`.
///
/// The construction rotates the eigenvector onto the first axis, splits off
/// the pure `(lambda, 1/lambda)` mode, and recurses on the Schur-complement
/// remainder `V' - s s^T / (a - 1/lambda)`.
pub fn pure_lower_bound(v: &Qcm, eigvec: &DVector<f64>) -> Result<PureLowerBoundCertificate> {
    let vx = require_valid(v)?;
    let dim = vx.layout().dim();
    if eigvec.len() != dim {
        return Err(Error::ShapeMismatch {
            expected: format!("vector of length {dim}"),
            got: format!("{}", eigvec.len()),
        });
    }
    let norm = eigvec.norm();
    if norm < 1e-12 {
        return Err(Error::ParameterRange("eigvec must be nonzero".into()));
    }
    let x = eigvec / norm;
    let lam = (vx.matrix() * &x).dot(&x);
    let residual = (vx.matrix() * &x - &x * lam).norm();
    if residual > 1e-6 * lam.max(1.0) {
        return Err(Error::ParameterRange(format!(
            "eigvec is not an eigenvector (residual {residual:.3e})"
        )));
    }
    let tau_mat = pure_lower_bound_rec(vx.matrix(), &x, lam)?;
    let tau = Qcm::raw(tau_mat, vx.layout());
    Ok(PureLowerBoundCertificate { tau, eigvec: x, eigval: lam })
}

/// Recursive core, all in `Xxpp` ordering. `x` must be unit with
/// `m x = lam x` up to small residual.
fn pure_lower_bound_rec(m: &DMatrix<f64>, x: &DVector<f64>, lam: f64) -> Result<DMatrix<f64>> {
    let dim = m.nrows();
    let n = dim / 2;
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let k = map_vector_to_e1(x)?;
    let km = k.matrix();
    let rotated = km * m * km.transpose();
    if n == 1 {
        let tau_rot = DMatrix::from_row_slice(2, 2, &[lam, 0.0, 0.0, 1.0 / lam]);
        return Ok(km.transpose() * tau_rot * km);
    }
    // coordinates: 0 = rotated eigvec direction (x of mode 1), n = its
    // momentum partner; the rest form an (n-1)-mode Xxpp system.
    let rest: Vec<usize> = (1..n).chain(n + 1..2 * n).collect();
    let a = rotated[(n, n)];
    let s = DVector::from_iterator(rest.len(), rest.iter().map(|&c| rotated[(n, c)]));
    let v_rest = DMatrix::from_fn(rest.len(), rest.len(), |i, j| rotated[(rest[i], rest[j])]);
    let slack = a - 1.0 / lam;
    let reduced = if slack > 1e-9 {
        &v_rest - (&s * s.transpose()) / slack
    } else {
        // the first mode is already pure; s vanishes up to noise
        v_rest.clone()
    };
    let reduced = linalg::symmetrize(&reduced);
    // recurse on the top eigenpair of the remainder
    let (vals, vecs) = linalg::sym_eig_sorted(&reduced);
    let top = vecs.column(0).clone_owned();
    let tau_rest = pure_lower_bound_rec(&reduced, &top, vals[0])?;
    let mut tau_rot = DMatrix::zeros(dim, dim);
    tau_rot[(0, 0)] = lam;
    tau_rot[(n, n)] = 1.0 / lam;
    for (i, &ci) in rest.iter().enumerate() {
        for (j, &cj) in rest.iter().enumerate() {
            tau_rot[(ci, cj)] = tau_rest[(i, j)];
        }
    }
    Ok(km.transpose() * tau_rot * km)
}

/// Diagnostics of the monotone-dependence instance.
#[derive(Debug, Clone)]
pub struct CounterexampleDiagnostics {
    pub b: f64,
    pub eta_plus: f64,
    /// `lambda_2^down(tau_1) = a - b`
    pub lambda2_tau1: f64,
    /// `lambda_2^down(tau_2) = 2`
    pub lambda2_tau2: f64,
    pub kappa2_tau1: f64,
    pub kappa2_tau2: f64,
    /// worst PSD defect of `V - tau_1`, `V - tau_2`
    pub ordering_defect: f64,
    /// worst purity defect of `tau_1`, `tau_2`
    pub purity_defect: f64,
    /// `kappa_2(tau_2) > kappa_2(tau_1)` blocks `tau_1 -> tau_2`
    pub conversion_blocked: bool,
}

/// The monotone-dependence instance.
#[derive(Debug, Clone)]
pub struct CounterexampleInstance {
    pub a: f64,
    pub v: Qcm,
    pub tau1: Qcm,
    pub tau2: Qcm,
    pub diagnostics: CounterexampleDiagnostics,
}

/// Two-mode instance with two incomparable optimal helper strategies:
/// `tau_1` maximizes the top eigenvalue chain while `tau_2` beats it on
/// `kappa_2`, so no single post-measurement state is best for every
/// monotone. Requires `a > 2` inside the window where `a - b > eta_+`.
pub fn counterexample_instance(a: f64) -> Result<CounterexampleInstance> {
    if a <= 2.0 {
        return Err(Error::ParameterRange(format!("counterexample requires a > 2, got {a}")));
    }
    let b = ((a - 2.0) * (a - 0.5)).sqrt();
    let t = a + b;
    let eta_plus = 0.25 * (5.0 - 4.0 * t + (9.0 + 16.0 * t * t).sqrt());
    if a - b <= eta_plus {
        return Err(Error::ParameterRange(format!(
            "a = {a} is outside the admissible window: a - b = {} <= eta_+ = {eta_plus}",
            a - b
        )));
    }
    let layout = ModeLayout::xpxp(2);
    #[rustfmt::skip]
    let v_mat = DMatrix::from_row_slice(4, 4, &[
        0.5, 0.0, 0.0, 0.0,
        0.0, a,   b,   0.0,
        0.0, b,   a,   0.0,
        0.0, 0.0, 0.0, 2.0,
    ]);
    let d = a * a - b * b;
    #[rustfmt::skip]
    let tau1_mat = DMatrix::from_row_slice(4, 4, &[
        a / d, 0.0, 0.0, b / d,
        0.0,   a,   b,   0.0,
        0.0,   b,   a,   0.0,
        b / d, 0.0, 0.0, a / d,
    ]);
    #[rustfmt::skip]
    let tau2_mat = DMatrix::from_row_slice(4, 4, &[
        0.5, 0.0, 0.0, 0.0,
        0.0, 2.0, 0.0, 0.0,
        0.0, 0.0, 0.5, 0.0,
        0.0, 0.0, 0.0, 2.0,
    ]);
    let v = Qcm::raw(v_mat, layout).to_xxpp();
    let tau1 = Qcm::raw(tau1_mat, layout).to_xxpp();
    let tau2 = Qcm::raw(tau2_mat, layout).to_xxpp();

    let d1 = -linalg::min_eigenvalue(&(v.matrix() - tau1.matrix()));
    let d2 = -linalg::min_eigenvalue(&(v.matrix() - tau2.matrix()));
    let ordering_defect = d1.max(d2).max(0.0);
    let purity_defect = tau1.purity_defect()?.max(tau2.purity_defect()?);
    let lambda2_tau1 = tau1.eigenvalues()[1];
    let lambda2_tau2 = tau2.eigenvalues()[1];
    let kappa2_tau1 = kappa(&tau1, 2)?;
    let kappa2_tau2 = kappa(&tau2, 2)?;
    let diagnostics = CounterexampleDiagnostics {
        b,
        eta_plus,
        lambda2_tau1,
        lambda2_tau2,
        kappa2_tau1,
        kappa2_tau2,
        ordering_defect,
        purity_defect,
        conversion_blocked: kappa2_tau2 > kappa2_tau1 + 1e-9,
    };
    Ok(CounterexampleInstance { a, v, tau1, tau2, diagnostics })
}
