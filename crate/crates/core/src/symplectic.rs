//! Real symplectic linear algebra on phase space: candidate quantum
//! covariance matrices, symplectic spectra, Williamson and Euler
//! decompositions, Schur complements and seeded random instances.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::layout::{permute_matrix, ModeLayout, QuadratureOrder};
use crate::linalg;
use crate::rng;

/// Validity / purity tolerance on symplectic eigenvalues.
pub const DEFAULT_VALIDITY_TOL: f64 = 1e-7;
/// Reconstruction tolerance for decompositions.
pub const DEFAULT_DECOMP_TOL: f64 = 1e-9;
/// Tolerance on the symplectic condition `S Omega S^T = Omega`.
pub const DEFAULT_SYMPLECTIC_TOL: f64 = 1e-8;
/// Tolerance on input symmetry.
pub const DEFAULT_SYMMETRY_TOL: f64 = 1e-8;

/// A candidate quantum covariance matrix: real symmetric `2n x 2n` with a
/// declared mode layout (vacuum = identity convention). Validity as a
/// quantum state is a separate check, see [`Qcm::validity`].
#[derive(Debug, Clone, PartialEq)]
pub struct Qcm {
    layout: ModeLayout,
    mat: DMatrix<f64>,
}

impl Qcm {
    /// Build from a matrix, checking shape and symmetry; the stored matrix
    /// is symmetrized.
    pub fn new(mat: DMatrix<f64>, layout: ModeLayout) -> Result<Self> {
        check_shape(&mat, layout)?;
        let asym = linalg::asymmetry(&mat);
        let tol = DEFAULT_SYMMETRY_TOL * linalg::max_abs(&mat).max(1.0);
        if asym > tol {
            return Err(Error::NotSymmetric { asymmetry: asym, tol });
        }
        Ok(Qcm { layout, mat: linalg::symmetrize(&mat) })
    }

    /// Build in canonical `Xxpp` ordering, inferring the mode count.
    pub fn from_xxpp(mat: DMatrix<f64>) -> Result<Self> {
        let n = even_modes(&mat)?;
        Qcm::new(mat, ModeLayout::xxpp(n))
    }

    pub(crate) fn raw(mat: DMatrix<f64>, layout: ModeLayout) -> Self {
        debug_assert!(mat.nrows() == layout.dim());
        Qcm { layout, mat: linalg::symmetrize(&mat) }
    }

    /// Vacuum state on `n` modes.
    pub fn identity(n_modes: usize, order: QuadratureOrder) -> Self {
        Qcm {
            layout: ModeLayout { order, n_modes },
            mat: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.layout.n_modes
    }

    pub fn order(&self) -> QuadratureOrder {
        self.layout.order
    }

    pub fn layout(&self) -> ModeLayout {
        self.layout
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }

    /// The same state expressed in `target` quadrature ordering. Converting
    /// twice returns the original matrix bit-identically.
    pub fn to_order(&self, target: QuadratureOrder) -> Qcm {
        if self.layout.order == target {
            return self.clone();
        }
        let perm = self.layout.permutation_to(target);
        Qcm {
            layout: self.layout.with_order(target),
            mat: permute_matrix(&self.mat, &perm),
        }
    }

    pub fn to_xxpp(&self) -> Qcm {
        self.to_order(QuadratureOrder::Xxpp)
    }

    /// Symplectic eigenvalues, sorted descending (one per mode).
    ///
    /// Computed from the eigenvalues of `Omega V` (positive imaginary
    /// parts), falling back to a symmetrized route through `V^{1/2}` when
    /// the non-symmetric eigenproblem looks unreliable.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        let v = self.to_xxpp();
        let m = &v.mat;
        let n = v.n_modes();
        let evals = linalg::sym_eigenvalues(m);
        let min = *evals.last().unwrap();
        if min <= 0.0 || min <= evals[0] * 1e-14 {
            return Err(Error::NotPositiveDefinite { min_eig: min });
        }
        let omega = v.layout.omega();
        let scale = linalg::max_abs(m).max(1.0);

        let complex = (&omega * m).complex_eigenvalues();
        let mut nus: Vec<f64> = complex.iter().filter(|c| c.im > 0.0).map(|c| c.im).collect();
        let max_re = complex.iter().fold(0.0f64, |acc, c| acc.max(c.re.abs()));
        if nus.len() == n && max_re <= 1e-9 * scale {
            nus.sort_by(|a, b| b.partial_cmp(a).unwrap());
            return Ok(nus);
        }

        // Fallback: B = V^{1/2} Omega V^{1/2} is antisymmetric and similar to
        // Omega V; the eigenvalues of B^T B are the squared symplectic
        // eigenvalues, doubled.
        let w = linalg::sqrt_psd(m);
        let b = &w * &omega * &w;
        let g = b.transpose() * &b;
        let vals = linalg::sym_eigenvalues(&g);
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let pair = 0.5 * (vals[2 * j] + vals[2 * j + 1]);
            out.push(pair.max(0.0).sqrt());
        }
        Ok(out)
    }

    /// Minimal symplectic eigenvalue; the validity witness.
    pub fn validity_witness(&self) -> Result<f64> {
        Ok(*self
            .symplectic_eigenvalues()?
            .last()
            .ok_or_else(|| Error::Numerical("empty spectrum".into()))?)
    }

    /// Whether the matrix is a bona fide quantum covariance matrix, together
    /// with the witness (minimal symplectic eigenvalue).
    pub fn validity(&self, tol: f64) -> Result<(bool, f64)> {
        match self.validity_witness() {
            Ok(w) => Ok((w >= 1.0 - tol, w)),
            // Not positive definite certainly means not a valid state; the
            // witness is the offending eigenvalue.
            Err(Error::NotPositiveDefinite { min_eig }) => Ok((false, min_eig)),
            Err(e) => Err(e),
        }
    }

    pub fn is_valid(&self, tol: f64) -> Result<bool> {
        Ok(self.validity(tol)?.0)
    }

    /// Pure iff valid and every symplectic eigenvalue is 1 within `tol`.
    pub fn is_pure(&self, tol: f64) -> Result<bool> {
        match self.symplectic_eigenvalues() {
            Ok(nus) => Ok(nus.iter().all(|nu| (nu - 1.0).abs() <= tol)),
            Err(Error::NotPositiveDefinite { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// Largest deviation of the symplectic spectrum from 1.
    pub fn purity_defect(&self) -> Result<f64> {
        let nus = self.symplectic_eigenvalues()?;
        Ok(nus.iter().fold(0.0f64, |acc, nu| acc.max((nu - 1.0).abs())))
    }

    /// Smallest ordinary eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.mat)
    }

    /// Largest ordinary eigenvalue (= operator norm for valid states).
    pub fn max_eigenvalue(&self) -> f64 {
        linalg::max_eigenvalue(&self.mat)
    }

    /// Ordinary eigenvalues, sorted descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::sym_eigenvalues(&self.mat)
    }

    /// Williamson normal form `V = S (D ⊕ D) S^T` with `D = diag(nu)`,
    /// `nu` sorted descending (canonical `Xxpp` ordering).
    pub fn williamson(&self) -> Result<WilliamsonDecomposition> {
        let v = self.to_xxpp();
        let n = v.n_modes();
        let m = &v.mat;
        let inv_sqrt = linalg::inv_sqrt_pd(m)?;
        let omega = v.layout.omega();
        let a = &inv_sqrt * &omega * &inv_sqrt;
        let a = (&a - a.transpose()) * 0.5;
        // kappa ascending = nu descending
        let pairs = antisymmetric_pairs(&a)?;
        let dim = 2 * n;
        // Columns (v_j, u_j) give the per-mode interleaved normal form of A.
        let mut q = DMatrix::zeros(dim, dim);
        let mut nu = Vec::with_capacity(n);
        for (j, (kappa, u, vv)) in pairs.iter().enumerate() {
            q.set_column(2 * j, vv);
            q.set_column(2 * j + 1, u);
            nu.push(1.0 / kappa);
        }
        // Interleaved scaling, then reshuffle into Xxpp ordering.
        let mut lambda = DMatrix::zeros(dim, dim);
        for j in 0..n {
            let s = nu[j].sqrt();
            lambda[(2 * j, 2 * j)] = s;
            lambda[(2 * j + 1, 2 * j + 1)] = s;
        }
        let xp_to_xx = ModeLayout::xpxp(n).permutation_to(QuadratureOrder::Xxpp);
        // c maps interleaved coordinates to Xxpp coordinates
        let mut c = DMatrix::zeros(dim, dim);
        for (i, &src) in xp_to_xx.iter().enumerate() {
            c[(i, src)] = 1.0;
        }
        let s_diag = &c * &lambda * q.transpose() * &inv_sqrt;
        // s_diag V s_diag^T = D ⊕ D; the stored factor reconstructs V.
        let s_rec = symplectic_inverse_xxpp(&s_diag, &omega);
        let s = SymplecticMatrix::new_unchecked(s_rec, ModeLayout::xxpp(n));
        Ok(WilliamsonDecomposition { s, nu })
    }
}

/// A real symplectic matrix `S` with `S Omega S^T = Omega`; encodes a
/// Gaussian unitary at the covariance-matrix level.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    layout: ModeLayout,
    mat: DMatrix<f64>,
}

impl SymplecticMatrix {
    pub fn new(mat: DMatrix<f64>, layout: ModeLayout) -> Result<Self> {
        Self::new_with_tol(mat, layout, DEFAULT_SYMPLECTIC_TOL)
    }

    pub fn new_with_tol(mat: DMatrix<f64>, layout: ModeLayout, tol: f64) -> Result<Self> {
        check_shape(&mat, layout)?;
        let defect = symplectic_defect(&mat, layout);
        if defect > tol {
            return Err(Error::NotSymplectic { defect, tol });
        }
        Ok(SymplecticMatrix { layout, mat })
    }

    pub(crate) fn new_unchecked(mat: DMatrix<f64>, layout: ModeLayout) -> Self {
        SymplecticMatrix { layout, mat }
    }

    pub fn identity(n_modes: usize, order: QuadratureOrder) -> Self {
        SymplecticMatrix {
            layout: ModeLayout { order, n_modes },
            mat: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.layout.n_modes
    }

    pub fn order(&self) -> QuadratureOrder {
        self.layout.order
    }

    pub fn layout(&self) -> ModeLayout {
        self.layout
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }

    pub fn to_order(&self, target: QuadratureOrder) -> SymplecticMatrix {
        if self.layout.order == target {
            return self.clone();
        }
        let perm = self.layout.permutation_to(target);
        SymplecticMatrix {
            layout: self.layout.with_order(target),
            mat: permute_matrix(&self.mat, &perm),
        }
    }

    pub fn to_xxpp(&self) -> SymplecticMatrix {
        self.to_order(QuadratureOrder::Xxpp)
    }

    /// Deviation from the symplectic condition (max-abs of `S Omega S^T - Omega`).
    pub fn defect(&self) -> f64 {
        symplectic_defect(&self.mat, self.layout)
    }

    pub fn is_symplectic(&self, tol: f64) -> bool {
        self.defect() <= tol
    }

    /// Group inverse, computed as `Omega S^T Omega^T` (no linear solve).
    pub fn inverse(&self) -> SymplecticMatrix {
        let omega = self.layout.omega();
        SymplecticMatrix {
            layout: self.layout,
            mat: symplectic_inverse(&self.mat, &omega),
        }
    }

    pub fn transpose(&self) -> SymplecticMatrix {
        SymplecticMatrix { layout: self.layout, mat: self.mat.transpose() }
    }

    /// Euler (Bloch-Messiah) factorization `S = K1 (Z ⊕ Z^{-1}) K2` with
    /// `K1`, `K2` orthogonal symplectic and `z >= 1` sorted descending.
    pub fn euler(&self) -> Result<EulerDecomposition> {
        let s = self.to_xxpp();
        let defect = s.defect();
        if defect > DEFAULT_SYMPLECTIC_TOL {
            return Err(Error::NotSymplectic { defect, tol: DEFAULT_SYMPLECTIC_TOL });
        }
        let n = s.n_modes();
        let dim = 2 * n;
        let layout = s.layout;
        let omega = layout.omega();
        // Polar part P = (S S^T)^{1/2} is symmetric positive definite and
        // symplectic; its eigenvalues come in (z, 1/z) pairs with
        // eigenvectors exchanged by Omega.
        let p = linalg::sqrt_psd(&(&s.mat * s.mat.transpose()));
        let (vals, vecs) = linalg::sym_eig_sorted(&p);
        let mut claimed: Vec<DVector<f64>> = Vec::new();
        let mut cols_u: Vec<DVector<f64>> = Vec::new();
        let mut z = Vec::with_capacity(n);
        for idx in 0..dim {
            if cols_u.len() == n {
                break;
            }
            let mut u = vecs.column(idx).clone_owned();
            for c in &claimed {
                let d = c.dot(&u);
                u -= c * d;
            }
            let norm = u.norm();
            if norm < 1e-3 {
                continue;
            }
            u /= norm;
            let w = -(&omega * &u);
            z.push(vals[idx].max(1.0));
            claimed.push(u.clone());
            claimed.push(w);
            cols_u.push(u);
        }
        if cols_u.len() != n {
            return Err(Error::Numerical("failed to pair Euler eigenvectors".into()));
        }
        let mut k1 = DMatrix::zeros(dim, dim);
        for (j, u) in cols_u.iter().enumerate() {
            k1.set_column(j, u);
            let w = -(&omega * u);
            k1.set_column(n + j, &w);
        }
        // K2 = (K1 D)^{-1} S with D the squeezing core of the polar part
        let mut d_inv = DVector::zeros(dim);
        for j in 0..n {
            d_inv[j] = 1.0 / z[j];
            d_inv[n + j] = z[j];
        }
        let k2 = DMatrix::from_diagonal(&d_inv) * k1.transpose() * &s.mat;
        Ok(EulerDecomposition {
            k1: SymplecticMatrix::new_unchecked(k1, layout),
            z,
            k2: SymplecticMatrix::new_unchecked(k2, layout),
        })
    }
}

/// Williamson normal form: `S (diag(nu) ⊕ diag(nu)) S^T` reconstructs the
/// decomposed matrix; `nu` sorted descending.
#[derive(Debug, Clone)]
pub struct WilliamsonDecomposition {
    pub s: SymplecticMatrix,
    pub nu: Vec<f64>,
}

impl WilliamsonDecomposition {
    pub fn reconstruct(&self) -> Qcm {
        let s = self.s.to_xxpp();
        let n = s.n_modes();
        let mut d = DVector::zeros(2 * n);
        for j in 0..n {
            d[j] = self.nu[j];
            d[n + j] = self.nu[j];
        }
        let m = &s.mat * DMatrix::from_diagonal(&d) * s.mat.transpose();
        Qcm::raw(m, s.layout)
    }

    /// The pure factor `S S^T`, always a valid pure state below the input.
    pub fn pure_factor(&self) -> Qcm {
        let s = self.s.to_xxpp();
        Qcm::raw(&s.mat * s.mat.transpose(), s.layout)
    }
}

/// Euler factorization `K1 (Z ⊕ Z^{-1}) K2` of a symplectic matrix.
#[derive(Debug, Clone)]
pub struct EulerDecomposition {
    pub k1: SymplecticMatrix,
    pub z: Vec<f64>,
    pub k2: SymplecticMatrix,
}

impl EulerDecomposition {
    pub fn compose(&self) -> SymplecticMatrix {
        euler_compose(&self.k1, &self.z, &self.k2)
    }
}

/// Assemble `K1 (Z ⊕ Z^{-1}) K2` in `Xxpp` ordering.
pub fn euler_compose(
    k1: &SymplecticMatrix,
    z: &[f64],
    k2: &SymplecticMatrix,
) -> SymplecticMatrix {
    let k1 = k1.to_xxpp();
    let k2 = k2.to_xxpp();
    let n = k1.n_modes();
    assert_eq!(z.len(), n, "squeezing count must match mode count");
    let mut d = DVector::zeros(2 * n);
    for j in 0..n {
        d[j] = z[j];
        d[n + j] = 1.0 / z[j];
    }
    let m = &k1.mat * DMatrix::from_diagonal(&d) * &k2.mat;
    SymplecticMatrix::new_unchecked(m, k1.layout)
}

/// Embed a complex unitary as an orthogonal symplectic matrix in `Xxpp`
/// ordering: `U = A - iB` maps to `[[A, B], [-B, A]]`.
pub(crate) fn embed_unitary(u: &DMatrix<Complex<f64>>) -> DMatrix<f64> {
    let n = u.nrows();
    let mut k = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let a = u[(i, j)].re;
            let b = -u[(i, j)].im;
            k[(i, j)] = a;
            k[(i, n + j)] = b;
            k[(n + i, j)] = -b;
            k[(n + i, n + j)] = a;
        }
    }
    k
}

/// Haar-like random orthogonal symplectic matrix via QR of a complex
/// Ginibre sample on the unitary embedding.
pub(crate) fn random_orthogonal_symplectic<R: Rng>(n: usize, r: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| Complex::new(rng::normal(r), rng::normal(r)));
    let qr = g.qr();
    let rm = qr.r();
    let mut q = qr.q();
    // Fix the phase convention so the distribution is Haar.
    for j in 0..n {
        let d = rm[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    embed_unitary(&q)
}

/// Seeded random symplectic matrix with squeezing values log-uniform in
/// `[1, squeeze_bound]`. Deterministic per seed.
pub fn random_symplectic(n_modes: usize, seed: u64, squeeze_bound: f64) -> SymplecticMatrix {
    assert!(squeeze_bound >= 1.0, "squeeze_bound must be >= 1");
    let mut r = rng::seeded(seed);
    random_symplectic_from(n_modes, squeeze_bound, &mut r)
}

pub(crate) fn random_symplectic_from<R: Rng>(
    n_modes: usize,
    squeeze_bound: f64,
    r: &mut R,
) -> SymplecticMatrix {
    let k1 = random_orthogonal_symplectic(n_modes, r);
    let k2 = random_orthogonal_symplectic(n_modes, r);
    let z: Vec<f64> = (0..n_modes).map(|_| rng::log_uniform(r, 1.0, squeeze_bound)).collect();
    let layout = ModeLayout::xxpp(n_modes);
    euler_compose(
        &SymplecticMatrix::new_unchecked(k1, layout),
        &z,
        &SymplecticMatrix::new_unchecked(k2, layout),
    )
}

/// Seeded random valid state `S (D ⊕ D) S^T` with symplectic spectrum
/// log-uniform in `[1, nu_bound]`. Deterministic per seed.
pub fn random_qcm(n_modes: usize, seed: u64, nu_bound: f64) -> Qcm {
    assert!(nu_bound >= 1.0, "nu_bound must be >= 1");
    let mut r = rng::seeded(seed);
    let mut nu: Vec<f64> = (0..n_modes).map(|_| rng::log_uniform(&mut r, 1.0, nu_bound)).collect();
    nu.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let s = random_symplectic_from(n_modes, nu_bound, &mut r);
    WilliamsonDecomposition { s, nu }.reconstruct()
}

/// Outcome of a Schur complement with the pseudo-inverse fallback.
#[derive(Debug, Clone)]
pub struct SchurComplement {
    pub matrix: DMatrix<f64>,
    /// Set when rank-deficient directions of the eliminated block were dropped.
    pub used_pseudo_inverse: bool,
}

/// Schur complement `M/B = A - X B^{-1} X^T` keeping the indices in `keep`.
/// Errors if the eliminated block is singular.
pub fn schur_complement(m: &DMatrix<f64>, keep: &[usize]) -> Result<DMatrix<f64>> {
    let out = schur_impl(m, keep, false)?;
    Ok(out.matrix)
}

/// Schur complement with a pseudo-inverse fallback on a singular eliminated
/// block; the flag records whether the fallback fired.
pub fn schur_complement_with_fallback(
    m: &DMatrix<f64>,
    keep: &[usize],
) -> Result<SchurComplement> {
    schur_impl(m, keep, true)
}

fn schur_impl(m: &DMatrix<f64>, keep: &[usize], allow_pseudo: bool) -> Result<SchurComplement> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::ShapeMismatch {
            expected: "square matrix".into(),
            got: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    let mut seen = vec![false; n];
    for &k in keep {
        if k >= n {
            return Err(Error::IndexOutOfRange(format!("keep index {k} >= {n}")));
        }
        if seen[k] {
            return Err(Error::IndexOutOfRange(format!("duplicate keep index {k}")));
        }
        seen[k] = true;
    }
    let elim: Vec<usize> = (0..n).filter(|i| !seen[*i]).collect();
    let a = linalg::principal_submatrix(m, keep);
    if elim.is_empty() {
        return Ok(SchurComplement { matrix: a, used_pseudo_inverse: false });
    }
    let b = linalg::principal_submatrix(m, &elim);
    let x = linalg::block(m, keep, &elim);

    // Pivoted solve on the PD fast path, never an explicit inverse.
    if let Some(chol) = b.clone().cholesky() {
        let y = chol.solve(&x.transpose());
        let out = &a - &x * y;
        return Ok(SchurComplement { matrix: linalg::symmetrize(&out), used_pseudo_inverse: false });
    }
    if let Some(lu_solved) = b.clone().lu().solve(&x.transpose()) {
        let residual = linalg::max_abs(&(&b * &lu_solved - x.transpose()));
        let scale = linalg::max_abs(&x).max(1.0);
        if residual <= 1e-9 * scale {
            let out = &a - &x * lu_solved;
            return Ok(SchurComplement {
                matrix: linalg::symmetrize(&out),
                used_pseudo_inverse: false,
            });
        }
    }
    if !allow_pseudo {
        return Err(Error::SingularBlock);
    }
    let (vals, vecs) = linalg::sym_eig_sorted(&b);
    let scale = vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let cutoff = scale * 1e-12;
    let mut dropped = false;
    let inv = DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&v| {
            if v.abs() <= cutoff {
                dropped = true;
                0.0
            } else {
                1.0 / v
            }
        }),
    );
    let b_pinv = &vecs * DMatrix::from_diagonal(&inv) * vecs.transpose();
    let out = &a - &x * b_pinv * x.transpose();
    Ok(SchurComplement { matrix: linalg::symmetrize(&out), used_pseudo_inverse: dropped })
}

/// Max-abs deviation of `S Omega S^T` from `Omega`.
pub fn symplectic_defect(mat: &DMatrix<f64>, layout: ModeLayout) -> f64 {
    let omega = layout.omega();
    linalg::max_abs(&(mat * &omega * mat.transpose() - &omega))
}

fn symplectic_inverse(s: &DMatrix<f64>, omega: &DMatrix<f64>) -> DMatrix<f64> {
    omega * s.transpose() * omega.transpose()
}

fn symplectic_inverse_xxpp(s: &DMatrix<f64>, omega: &DMatrix<f64>) -> DMatrix<f64> {
    symplectic_inverse(s, omega)
}

fn check_shape(mat: &DMatrix<f64>, layout: ModeLayout) -> Result<()> {
    let dim = layout.dim();
    if mat.nrows() != dim || mat.ncols() != dim {
        return Err(Error::ShapeMismatch {
            expected: format!("{dim}x{dim} for {} modes", layout.n_modes),
            got: format!("{}x{}", mat.nrows(), mat.ncols()),
        });
    }
    Ok(())
}

fn even_modes(mat: &DMatrix<f64>) -> Result<usize> {
    if mat.nrows() != mat.ncols() || mat.nrows() % 2 != 0 || mat.nrows() == 0 {
        return Err(Error::ShapeMismatch {
            expected: "square matrix of even dimension".into(),
            got: format!("{}x{}", mat.nrows(), mat.ncols()),
        });
    }
    Ok(mat.nrows() / 2)
}

/// Canonical pairs of an invertible antisymmetric matrix: `(kappa, u, v)`
/// with `A u = kappa v`, `A v = -kappa u`, all orthonormal, `kappa`
/// ascending.
fn antisymmetric_pairs(a: &DMatrix<f64>) -> Result<Vec<(f64, DVector<f64>, DVector<f64>)>> {
    let dim = a.nrows();
    let n = dim / 2;
    let g = a.transpose() * a;
    let (vals, vecs) = linalg::sym_eig_sorted(&g);
    let mut claimed: Vec<DVector<f64>> = Vec::new();
    let mut out: Vec<(f64, DVector<f64>, DVector<f64>)> = Vec::new();
    for idx in (0..dim).rev() {
        if out.len() == n {
            break;
        }
        let mut u = vecs.column(idx).clone_owned();
        for c in &claimed {
            let d = c.dot(&u);
            u -= c * d;
        }
        let norm = u.norm();
        if norm < 1e-3 {
            continue;
        }
        u /= norm;
        let kappa = vals[idx].max(0.0).sqrt();
        if kappa <= 1e-300 {
            return Err(Error::Numerical(
                "degenerate near-singular input: antisymmetric pairing hit zero".into(),
            ));
        }
        let mut v = (a * &u) / kappa;
        for c in &claimed {
            let d = c.dot(&v);
            v -= c * d;
        }
        let vd = u.dot(&v);
        v -= &u * vd;
        let vn = v.norm();
        if vn < 0.5 {
            return Err(Error::Numerical("antisymmetric pairing degenerated".into()));
        }
        v /= vn;
        claimed.push(u.clone());
        claimed.push(v.clone());
        out.push((kappa, u, v));
    }
    if out.len() != n {
        return Err(Error::Numerical("failed to pair antisymmetric eigenvectors".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dm(rows: usize, data: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, rows, data)
    }

    #[test]
    fn one_mode_spectrum_is_sqrt_det() {
        let v = Qcm::from_xxpp(dm(2, &[2.0, 0.0, 0.0, 3.0])).unwrap();
        let nus = v.symplectic_eigenvalues().unwrap();
        assert_eq!(nus.len(), 1);
        assert_abs_diff_eq!(nus[0], 6.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn vacuum_spectrum_is_all_ones() {
        for n in 1..4 {
            let v = Qcm::identity(n, QuadratureOrder::Xxpp);
            for nu in v.symplectic_eigenvalues().unwrap() {
                assert_abs_diff_eq!(nu, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn non_positive_definite_rejected() {
        let v = Qcm::from_xxpp(dm(2, &[1.0, 0.0, 0.0, -1.0])).unwrap();
        assert!(matches!(
            v.symplectic_eigenvalues(),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn validity_examples() {
        let half = Qcm::from_xxpp(dm(2, &[0.5, 0.0, 0.0, 0.5])).unwrap();
        let (ok, w) = half.validity(DEFAULT_VALIDITY_TOL).unwrap();
        assert!(!ok);
        assert_abs_diff_eq!(w, 0.5, epsilon = 1e-12);

        let squeezed = Qcm::from_xxpp(dm(2, &[2.0, 0.0, 0.0, 0.5])).unwrap();
        let (ok, w) = squeezed.validity(DEFAULT_VALIDITY_TOL).unwrap();
        assert!(ok);
        assert_abs_diff_eq!(w, 1.0, epsilon = 1e-10);

        let invalid = Qcm::from_xxpp(dm(2, &[2.0, 0.0, 0.0, 0.4])).unwrap();
        let (ok, w) = invalid.validity(DEFAULT_VALIDITY_TOL).unwrap();
        assert!(!ok);
        assert_abs_diff_eq!(w, 0.8f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn purity_examples() {
        assert!(Qcm::identity(2, QuadratureOrder::Xxpp).is_pure(1e-7).unwrap());
        let thermal = Qcm::from_xxpp(dm(2, &[2.0, 0.0, 0.0, 2.0])).unwrap();
        assert!(!thermal.is_pure(1e-7).unwrap());
        // squeezed vacuum is pure
        let sq = Qcm::from_xxpp(dm(2, &[2.0, 0.0, 0.0, 0.5])).unwrap();
        assert!(sq.is_pure(1e-7).unwrap());
    }

    #[test]
    fn pure_iff_symplectic_for_positive_definite() {
        let v = random_qcm(2, 11, 3.0);
        let wil = v.williamson().unwrap();
        let pure = wil.pure_factor();
        assert!(pure.is_pure(1e-7).unwrap());
        assert!(
            SymplecticMatrix::new(pure.matrix().clone(), pure.layout()).is_ok(),
            "a pure state matrix must itself be symplectic"
        );
        // a thermal state is positive definite but not symplectic
        let thermal = Qcm::from_xxpp(dm(2, &[2.0, 0.0, 0.0, 2.0])).unwrap();
        assert!(SymplecticMatrix::new(thermal.matrix().clone(), thermal.layout()).is_err());
    }

    #[test]
    fn layout_round_trip_is_bit_identical() {
        let v = random_qcm(3, 5, 2.0);
        let back = v.to_order(QuadratureOrder::Xpxp).to_order(QuadratureOrder::Xxpp);
        assert_eq!(v.matrix(), back.matrix());
    }

    #[test]
    fn one_mode_layout_conversion_is_identity() {
        let v = Qcm::from_xxpp(dm(2, &[2.0, 0.0, 0.0, 3.0])).unwrap();
        let conv = v.to_order(QuadratureOrder::Xpxp);
        assert_eq!(v.matrix(), conv.matrix());
    }

    #[test]
    fn spectrum_invariant_under_layout_conversion() {
        let v = random_qcm(3, 17, 3.0);
        let a = v.symplectic_eigenvalues().unwrap();
        let b = v.to_order(QuadratureOrder::Xpxp).symplectic_eigenvalues().unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-10);
        }
    }

    #[test]
    fn williamson_diagonal_input() {
        let v = Qcm::from_xxpp(dm(2, &[2.0, 0.0, 0.0, 2.0])).unwrap();
        let wil = v.williamson().unwrap();
        assert_abs_diff_eq!(wil.nu[0], 2.0, epsilon = 1e-10);
        let rec = wil.reconstruct();
        assert!(linalg::max_abs(&(rec.matrix() - v.matrix())) < 1e-10);
    }

    #[test]
    fn williamson_thermal_multiple_of_identity() {
        let kappa = 1.7;
        let v = Qcm::raw(DMatrix::identity(6, 6) * kappa, ModeLayout::xxpp(3));
        let wil = v.williamson().unwrap();
        for nu in &wil.nu {
            assert_abs_diff_eq!(*nu, kappa, epsilon = 1e-10);
        }
        // S must be orthogonal (up to tolerance) since V is isotropic
        let s = wil.s.matrix();
        let should_be_id = s * s.transpose();
        assert!(linalg::max_abs(&(should_be_id - DMatrix::identity(6, 6))) < 1e-9);
    }

    #[test]
    fn williamson_construct_then_decompose() {
        let s0 = random_symplectic(2, 42, 2.0);
        let mut d = DVector::zeros(4);
        d[0] = 2.5;
        d[1] = 1.5;
        d[2] = 2.5;
        d[3] = 1.5;
        let m = s0.matrix() * DMatrix::from_diagonal(&d) * s0.matrix().transpose();
        let v = Qcm::from_xxpp(m).unwrap();
        let wil = v.williamson().unwrap();
        assert_abs_diff_eq!(wil.nu[0], 2.5, epsilon = 1e-9);
        assert_abs_diff_eq!(wil.nu[1], 1.5, epsilon = 1e-9);
        let rec = wil.reconstruct();
        assert!(linalg::max_abs(&(rec.matrix() - v.matrix())) < 1e-9);
        assert!(wil.s.is_symplectic(1e-9));
    }

    #[test]
    fn euler_identity() {
        let s = SymplecticMatrix::identity(2, QuadratureOrder::Xxpp);
        let e = s.euler().unwrap();
        for z in &e.z {
            assert_abs_diff_eq!(*z, 1.0, epsilon = 1e-12);
        }
        let rec = e.compose();
        assert!(linalg::max_abs(&(rec.matrix() - s.matrix())) < 1e-10);
    }

    #[test]
    fn euler_diagonal_squeezer() {
        let s = SymplecticMatrix::new(dm(2, &[2.0, 0.0, 0.0, 0.5]), ModeLayout::xxpp(1)).unwrap();
        let e = s.euler().unwrap();
        assert_abs_diff_eq!(e.z[0], 2.0, epsilon = 1e-10);
        let k1k2 = e.k1.matrix() * e.k2.matrix();
        // K1 K2 is the identity up to the sign convention of the pair
        let id = DMatrix::identity(2, 2);
        let dev_plus = linalg::max_abs(&(&k1k2 - &id));
        let dev_minus = linalg::max_abs(&(&k1k2 + &id));
        assert!(dev_plus < 1e-9 || dev_minus < 1e-9);
    }

    #[test]
    fn euler_round_trip_random() {
        let s = random_symplectic(2, 7, 3.0);
        let e = s.euler().unwrap();
        for z in &e.z {
            assert!(*z >= 1.0);
        }
        assert!(e.k1.is_symplectic(1e-9));
        assert!(e.k2.is_symplectic(1e-9));
        // orthogonality of the factors
        let k1 = e.k1.matrix();
        assert!(linalg::max_abs(&(k1 * k1.transpose() - DMatrix::identity(4, 4))) < 1e-9);
        let rec = e.compose();
        assert!(linalg::max_abs(&(rec.matrix() - s.matrix())) < 1e-9);
    }

    #[test]
    fn euler_rejects_non_symplectic() {
        let m = dm(2, &[2.0, 0.0, 0.0, 2.0]);
        let s = SymplecticMatrix::new_unchecked(m, ModeLayout::xxpp(1));
        assert!(matches!(s.euler(), Err(Error::NotSymplectic { .. })));
    }

    #[test]
    fn random_symplectic_is_deterministic() {
        let a = random_symplectic(1, 7, 2.0);
        let b = random_symplectic(1, 7, 2.0);
        assert_eq!(a.matrix(), b.matrix());
        assert!(a.is_symplectic(1e-9));
    }

    #[test]
    fn random_symplectic_without_squeezing_is_orthogonal() {
        let s = random_symplectic(3, 3, 1.0);
        let m = s.matrix();
        assert!(linalg::max_abs(&(m * m.transpose() - DMatrix::identity(6, 6))) < 1e-9);
    }

    #[test]
    fn random_qcm_is_valid() {
        for seed in 0..10 {
            let v = random_qcm(2, seed, 3.0);
            let (ok, w) = v.validity(DEFAULT_VALIDITY_TOL).unwrap();
            assert!(ok, "seed {seed}: witness {w}");
            let nus = v.symplectic_eigenvalues().unwrap();
            assert!(nus[0] <= 3.0 + 1e-9);
        }
    }

    #[test]
    fn schur_two_by_two() {
        let m = dm(2, &[2.0, 1.0, 1.0, 2.0]);
        let out = schur_complement(&m, &[0]).unwrap();
        assert_abs_diff_eq!(out[(0, 0)], 1.5, epsilon = 1e-14);
    }

    #[test]
    fn schur_block_diagonal_keeps_a() {
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 0)] = 2.0;
        m[(1, 1)] = 3.0;
        m[(2, 2)] = 4.0;
        m[(3, 3)] = 5.0;
        m[(0, 1)] = 0.5;
        m[(1, 0)] = 0.5;
        let out = schur_complement(&m, &[0, 1]).unwrap();
        assert_abs_diff_eq!(out[(0, 0)], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(out[(0, 1)], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(out[(1, 1)], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn schur_singular_block_errors_without_fallback() {
        let m = dm(2, &[2.0, 1.0, 1.0, 0.0]);
        // eliminated block is the zero scalar
        assert!(matches!(schur_complement(&m, &[0]), Err(Error::SingularBlock)));
        let out = schur_complement_with_fallback(&m, &[0]).unwrap();
        assert!(out.used_pseudo_inverse);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let mut m = dm(2, &[1.0, 0.0, 0.0, 1.0]);
        m[(0, 1)] = 1e-3;
        assert!(matches!(
            Qcm::from_xxpp(m),
            Err(Error::NotSymmetric { .. })
        ));
    }
}
