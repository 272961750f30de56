//! Gaussian entanglement monotones built from local symplectic spectra,
//! closed-form assisted values for product and GLEMS states, the
//! variational bound through symplectic extensions, and the comparison
//! with unrestricted protocols on thermal states.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gaussian::{marginal, Partition};
use crate::layout::ModeLayout;
use crate::linalg;
use crate::rng;
use crate::symplectic::{Qcm, SymplecticMatrix, DEFAULT_VALIDITY_TOL};

/// Logarithm base for entropy-like quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogBase {
    Natural,
    Base2,
}

impl LogBase {
    fn convert(&self, natural: f64) -> f64 {
        match self {
            LogBase::Natural => natural,
            LogBase::Base2 => natural / std::f64::consts::LN_2,
        }
    }
}

#[derive(Debug, Clone)]
enum MonotoneKind {
    /// Thermal entropy of a symplectic eigenvalue; yields the entanglement
    /// entropy on pure states.
    EntropyS1,
    /// `log nu`; yields the Renyi-2 entanglement entropy.
    Renyi2S2,
    /// Monotone piecewise-linear user profile on `[1, max knot]`,
    /// extended linearly beyond the last knot.
    Table { knots: Vec<(f64, f64)>, concave: bool },
}

/// A scalar resource profile `f` on `[1, ∞)` with `f(1) = 0`,
/// non-decreasing; generates pure-state entanglement measures
/// `E = Σ_j f(nu_j)` over local symplectic eigenvalues.
#[derive(Debug, Clone)]
pub struct MonotoneF {
    kind: MonotoneKind,
    base: LogBase,
}

impl MonotoneF {
    /// The entropy profile `s1` (entanglement entropy), natural log.
    pub fn entropy() -> Self {
        MonotoneF { kind: MonotoneKind::EntropyS1, base: LogBase::Natural }
    }

    /// The `s2(nu) = log nu` profile (Renyi-2), natural log.
    pub fn renyi2() -> Self {
        MonotoneF { kind: MonotoneKind::Renyi2S2, base: LogBase::Natural }
    }

    pub fn with_base(mut self, base: LogBase) -> Self {
        self.base = base;
        self
    }

    /// Named profile lookup ("s1" | "s2").
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "s1" => Ok(Self::entropy()),
            "s2" => Ok(Self::renyi2()),
            other => Err(Error::ParameterRange(format!("unknown monotone '{other}'"))),
        }
    }

    /// User table of `(nu, f)` knots. Requires `f(1) = 0`, non-decreasing
    /// values, strictly increasing knots starting at `nu = 1`.
    pub fn table(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidTable("need at least two knots".into()));
        }
        if (knots[0].0 - 1.0).abs() > 1e-12 || knots[0].1.abs() > 1e-12 {
            return Err(Error::InvalidTable("first knot must be (1, 0)".into()));
        }
        for w in knots.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidTable("knot abscissae must increase".into()));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::InvalidTable("profile must be non-decreasing".into()));
            }
        }
        // concave iff chord slopes are non-increasing
        let mut concave = true;
        let mut prev_slope = f64::INFINITY;
        for w in knots.windows(2) {
            let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            if slope > prev_slope + 1e-12 {
                concave = false;
            }
            prev_slope = slope;
        }
        Ok(MonotoneF { kind: MonotoneKind::Table { knots, concave }, base: LogBase::Natural })
    }

    /// Whether the profile is concave (required by the variational bound).
    pub fn is_concave(&self) -> bool {
        match &self.kind {
            MonotoneKind::EntropyS1 | MonotoneKind::Renyi2S2 => true,
            MonotoneKind::Table { concave, .. } => *concave,
        }
    }

    pub fn name(&self) -> &'static str {
        match &self.kind {
            MonotoneKind::EntropyS1 => "s1",
            MonotoneKind::Renyi2S2 => "s2",
            MonotoneKind::Table { .. } => "table",
        }
    }

    /// Evaluate the profile. Arguments within `1e-9` below 1 are clamped;
    /// anything lower is a domain error.
    pub fn eval(&self, nu: f64) -> Result<f64> {
        if nu < 1.0 - 1e-9 {
            return Err(Error::ParameterRange(format!("monotone argument {nu} below 1")));
        }
        let nu = nu.max(1.0);
        let natural = match &self.kind {
            MonotoneKind::EntropyS1 => s1_natural(nu),
            MonotoneKind::Renyi2S2 => nu.ln(),
            MonotoneKind::Table { knots, .. } => {
                return Ok(self.base.convert(table_eval(knots, nu)));
            }
        };
        Ok(self.base.convert(natural))
    }
}

/// `s1(nu) = ((nu+1)/2) log((nu+1)/2) - ((nu-1)/2) log((nu-1)/2)`, with the
/// continuous limit 0 at `nu = 1`.
fn s1_natural(nu: f64) -> f64 {
    let plus = (nu + 1.0) / 2.0;
    let minus = (nu - 1.0) / 2.0;
    let tail = if minus > 0.0 { minus * minus.ln() } else { 0.0 };
    plus * plus.ln() - tail
}

fn table_eval(knots: &[(f64, f64)], nu: f64) -> f64 {
    let last = knots.len() - 1;
    if nu >= knots[last].0 {
        // extend with the final slope
        let (x0, y0) = knots[last - 1];
        let (x1, y1) = knots[last];
        let slope = (y1 - y0) / (x1 - x0);
        return y1 + slope * (nu - x1);
    }
    let mut lo = 0;
    for i in 0..last {
        if knots[i].0 <= nu {
            lo = i;
        }
    }
    let (x0, y0) = knots[lo];
    let (x1, y1) = knots[lo + 1];
    y0 + (y1 - y0) * (nu - x0) / (x1 - x0)
}

/// Entanglement of a pure bipartite state: `Σ_j f(nu_j)` over the
/// symplectic eigenvalues of the `A`-marginal. Symmetric in `A <-> B`.
pub fn pure_entanglement(tau: &Qcm, part: &Partition, f: &MonotoneF) -> Result<f64> {
    if part.n_groups() != 2 {
        return Err(Error::ParameterRange("pure entanglement needs a bipartition".into()));
    }
    if part.n_modes() != tau.n_modes() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} modes", tau.n_modes()),
            got: format!("partition over {}", part.n_modes()),
        });
    }
    if !tau.is_pure(1e-6)? {
        return Err(Error::NotPure { defect: tau.purity_defect()? });
    }
    // sum over the smaller party's spectrum; the other adds only f(1) = 0
    let side = if part.group(0).len() <= part.group(1).len() { 0 } else { 1 };
    local_spectrum_sum(tau, part.group(side), f)
}

fn local_spectrum_sum(v: &Qcm, modes: &[usize], f: &MonotoneF) -> Result<f64> {
    let local = marginal(v, modes)?;
    let mut acc = 0.0;
    for nu in local.symplectic_eigenvalues()? {
        acc += f.eval(nu)?;
    }
    Ok(acc)
}

/// Two-mode standard form `[[a 1, Delta], [Delta, b 1]]` with
/// `Delta = diag(k_x, k_p)`, `k_x >= |k_p|`, reachable by local symplectic
/// transformations.
#[derive(Debug, Clone, Copy)]
pub struct StandardForm2Mode {
    pub a: f64,
    pub b: f64,
    pub k_x: f64,
    pub k_p: f64,
}

impl StandardForm2Mode {
    /// Assemble the standard-form matrix (`Xxpp` ordering).
    pub fn to_qcm(&self) -> Qcm {
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(4, 4, &[
            self.a,  self.k_x, 0.0,     0.0,
            self.k_x, self.b,  0.0,     0.0,
            0.0,     0.0,      self.a,  self.k_p,
            0.0,     0.0,      self.k_p, self.b,
        ]);
        Qcm::raw(m, ModeLayout::xxpp(2))
    }

    /// The inverse global purity `g = sqrt((ab - k_x^2)(ab - k_p^2))`.
    pub fn g(&self) -> f64 {
        let ab = self.a * self.b;
        ((ab - self.k_x * self.k_x) * (ab - self.k_p * self.k_p)).max(0.0).sqrt()
    }
}

/// Reduce a two-mode state to its standard form through the four local
/// symplectic invariants `det V_A`, `det V_B`, `det C`, `det V`.
pub fn standard_form(v: &Qcm) -> Result<StandardForm2Mode> {
    if v.n_modes() != 2 {
        return Err(Error::ShapeMismatch {
            expected: "two-mode state".into(),
            got: format!("{} modes", v.n_modes()),
        });
    }
    let (ok, witness) = v.validity(DEFAULT_VALIDITY_TOL)?;
    if !ok {
        return Err(Error::InvalidQcm { min_nu: witness });
    }
    let vx = v.to_xxpp();
    let m = vx.matrix();
    // mode blocks in Xxpp: A holds coords {0, 2}, B holds {1, 3}
    let a_blk = linalg::principal_submatrix(m, &[0, 2]);
    let b_blk = linalg::principal_submatrix(m, &[1, 3]);
    let c_blk = linalg::block(m, &[0, 2], &[1, 3]);
    let det_a = det2(&a_blk);
    let det_b = det2(&b_blk);
    let det_c = det2(&c_blk);
    let det_v = m.determinant();
    let a = det_a.max(0.0).sqrt();
    let b = det_b.max(0.0).sqrt();
    let ab = a * b;
    if ab <= 0.0 {
        return Err(Error::Numerical("vanishing local invariant".into()));
    }
    // k_x^2 + k_p^2 and k_x^2 k_p^2 from the invariants
    let sum = ((ab * ab + det_c * det_c - det_v) / ab).max(0.0);
    let disc = (sum * sum - 4.0 * det_c * det_c).max(0.0).sqrt();
    let kx2 = 0.5 * (sum + disc);
    let kp2 = 0.5 * (sum - disc).max(0.0);
    let k_x = kx2.sqrt();
    let k_p = kp2.sqrt().copysign(if det_c == 0.0 { 1.0 } else { det_c });
    Ok(StandardForm2Mode { a, b, k_x, k_p })
}

fn det2(m: &DMatrix<f64>) -> f64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// Assisted entanglement of a product state with local symplectic
/// eigenvalues `a`, `b`: `f((1 + ab)/(a + b))`. The optimum is reached on a
/// two-mode squeezed vacuum with parameter [`product_optimal_c`].
pub fn assist_product(a: f64, b: f64, f: &MonotoneF) -> Result<f64> {
    if a < 1.0 || b < 1.0 {
        return Err(Error::ParameterRange(format!(
            "local symplectic eigenvalues must be >= 1, got ({a}, {b})"
        )));
    }
    f.eval(product_optimal_c(a, b))
}

/// The optimal two-mode-squeezed-vacuum parameter `(ab + 1)/(a + b)`.
pub fn product_optimal_c(a: f64, b: f64) -> f64 {
    (a * b + 1.0) / (a + b)
}

/// Parameters of a Gaussian least-entangled mixed state: local invariants
/// `a`, `b` and inverse global purity `g` (symplectic spectrum `{1, g}`).
#[derive(Debug, Clone, Copy)]
pub struct GlemsParams {
    pub a: f64,
    pub b: f64,
    pub g: f64,
}

impl GlemsParams {
    pub fn new(a: f64, b: f64, g: f64) -> Result<Self> {
        if a < 1.0 || b < 1.0 || g < 1.0 {
            return Err(Error::ParameterRange(format!(
                "GLEMS parameters must be >= 1, got ({a}, {b}, {g})"
            )));
        }
        if g > a * b + 1e-12 {
            return Err(Error::ParameterRange(format!(
                "inverse purity g = {g} exceeds ab = {}",
                a * b
            )));
        }
        Ok(GlemsParams { a, b, g })
    }
}

/// Correlation entries `(k_x, k_p)` of the GLEMS standard form, determined
/// by `(a, b, g)`. Errors when either radicand is negative (outside the
/// physical window).
pub fn glems_correlations(p: &GlemsParams) -> Result<(f64, f64)> {
    let GlemsParams { a, b, g } = *p;
    let dm = (a - b) * (a - b);
    let dp = (a + b) * (a + b);
    let gp = (g + 1.0) * (g + 1.0);
    let gm = (g - 1.0) * (g - 1.0);
    let r1 = (dm - gp) * (dm - gm);
    let r2 = (dp - gp) * (dp - gm);
    let tol = 1e-10 * (1.0 + dp * dp);
    if r1 < -tol || r2 < -tol {
        return Err(Error::ParameterRange(format!(
            "GLEMS window violated: radicands ({r1:.3e}, {r2:.3e}) for (a,b,g)=({a},{b},{g})"
        )));
    }
    let s1 = r1.max(0.0).sqrt();
    let s2 = r2.max(0.0).sqrt();
    let denom = 4.0 * (a * b).sqrt();
    Ok(((s1 + s2) / denom, (s1 - s2) / denom))
}

/// The standard-form state of the given GLEMS instance.
pub fn glems_qcm(p: &GlemsParams) -> Result<Qcm> {
    let (k_x, k_p) = glems_correlations(p)?;
    Ok(StandardForm2Mode { a: p.a, b: p.b, k_x, k_p }.to_qcm())
}

/// The reduced objective `m(theta)` for GLEMS standard-form parameters:
/// the squared local symplectic eigenvalue of the candidate pure state at
/// homodyne angle `theta`; its global maximum sits at `theta = 0`.
pub fn glems_m(theta: f64, sf: &StandardForm2Mode) -> f64 {
    let ab = sf.a * sf.b;
    let kp2 = sf.k_p * sf.k_p;
    let g = sf.g();
    let big_a = sf.k_x * (ab - kp2) + sf.k_p;
    let big_b = sf.k_x * (ab - kp2) - sf.k_p;
    let num = big_a * theta.cos() + big_b;
    let den = 2.0 * (ab - kp2) * ((g * g - 1.0) * theta.cos() + g * g + 1.0);
    1.0 + num * num / den
}

/// The nonzero stationary angle `theta*` of `m(theta)`, when the arccos
/// argument falls in `[-1, 1]`; reported absent otherwise.
pub fn glems_theta_star(sf: &StandardForm2Mode) -> Option<f64> {
    let ab = sf.a * sf.b;
    let kp2 = sf.k_p * sf.k_p;
    let g = sf.g();
    if (g - 1.0).abs() < 1e-12 {
        return None;
    }
    let arg = (3.0 + g * g) / (1.0 - g * g)
        - 2.0 * sf.k_p / (sf.k_x * (ab - kp2) + sf.k_p);
    if (-1.0..=1.0).contains(&arg) {
        Some(arg.acos())
    } else {
        None
    }
}

/// Local symplectic eigenvalue of the optimal pure state for a GLEMS
/// instance: `sqrt(1 + k_x^2/(ab - k_x^2))`.
pub fn glems_nu_star(p: &GlemsParams) -> Result<f64> {
    let (k_x, _) = glems_correlations(p)?;
    let ab = p.a * p.b;
    Ok((1.0 + k_x * k_x / (ab - k_x * k_x)).sqrt())
}

/// Assisted entanglement of a GLEMS state.
///
/// `m(0) = 1 + k_x^2/(ab - k_x^2)` is the squared local symplectic
/// eigenvalue of the optimal pure state (it arises as the determinant of
/// the reduced state), so the default applies `f` to `sqrt(m(0))`; the
/// `literal` flag applies `f` to `m(0)` itself instead.
pub fn assist_glems(p: &GlemsParams, f: &MonotoneF, literal: bool) -> Result<f64> {
    let nu_star = glems_nu_star(p)?;
    if literal {
        f.eval(nu_star * nu_star)
    } else {
        f.eval(nu_star)
    }
}

/// Variational upper bound on the assisted entanglement (single-shot and
/// regularized): `n f((|V|^2 + 1)/(2 |V|))` with `n = min(n_A, n_B)` and
/// `|V|` the operator norm. Requires a concave profile.
pub fn assist_upper_bound(v: &Qcm, part: &Partition, f: &MonotoneF) -> Result<f64> {
    if !f.is_concave() {
        return Err(Error::NonConcaveMonotone);
    }
    if part.n_groups() != 2 {
        return Err(Error::ParameterRange("bound needs a bipartition".into()));
    }
    let (ok, witness) = v.validity(DEFAULT_VALIDITY_TOL)?;
    if !ok {
        return Err(Error::InvalidQcm { min_nu: witness });
    }
    let n = part.group(0).len().min(part.group(1).len()) as f64;
    let norm = v.max_eigenvalue();
    Ok(n * f.eval((norm * norm + 1.0) / (2.0 * norm))?)
}

/// Exact assisted entanglement of `k * identity` over `n = min(n_A, n_B)`
/// mode pairs: `n f((k^2 + 1)/(2k))`; also the regularized value.
pub fn assist_thermal(k: f64, n: usize, f: &MonotoneF) -> Result<f64> {
    if k < 1.0 {
        return Err(Error::ParameterRange(format!("thermal parameter k must be >= 1, got {k}")));
    }
    Ok(n as f64 * f.eval((k * k + 1.0) / (2.0 * k))?)
}

/// Gaussian vs unrestricted assisted entanglement on thermal states.
#[derive(Debug, Clone, Copy)]
pub struct GapRecord {
    pub k: f64,
    /// Gaussian protocols: `n s1((k^2+1)/(2k))`.
    pub gauss: f64,
    /// Unrestricted protocols reach the minimal local entropy `n s1(k)`.
    pub nongauss: f64,
    pub diff: f64,
    pub ratio: f64,
}

/// The comparison record at thermal parameter `k` (natural log). The
/// difference tends to `ln 2` for large `k`; the ratio diverges as
/// `k -> 1`.
pub fn nongaussian_gap(k: f64, n: usize) -> Result<GapRecord> {
    if k < 1.0 {
        return Err(Error::ParameterRange(format!("thermal parameter k must be >= 1, got {k}")));
    }
    let f = MonotoneF::entropy();
    let gauss = assist_thermal(k, n, &f)?;
    let nongauss = n as f64 * f.eval(k)?;
    let diff = nongauss - gauss;
    let ratio = if gauss > 0.0 {
        nongauss / gauss
    } else if nongauss > 0.0 {
        f64::INFINITY
    } else {
        f64::NAN
    };
    Ok(GapRecord { k, gauss, nongauss, diff, ratio })
}

/// Paired diagonal averages of a `2n x 2n` symmetric matrix in `Xxpp`
/// ordering: the `n x n` diagonal matrix with entries `(X_ii + P_ii)/2`.
pub fn delta_s(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let dim = a.nrows();
    if a.ncols() != dim || dim % 2 != 0 {
        return Err(Error::ShapeMismatch {
            expected: "square matrix of even dimension".into(),
            got: format!("{}x{}", a.nrows(), a.ncols()),
        });
    }
    let n = dim / 2;
    let d = DVector::from_fn(n, |i, _| 0.5 * (a[(i, i)] + a[(n + i, n + i)]));
    Ok(DMatrix::from_diagonal(&d))
}

/// Symplectic extension `F(A) = Σ_i f(nu_i)` over the symplectic
/// eigenvalues of a positive definite `A` (`Xxpp` ordering).
pub fn symplectic_extension_f(a: &DMatrix<f64>, f: &MonotoneF) -> Result<f64> {
    let n = a.nrows() / 2;
    let qcm = Qcm::raw(a.clone(), ModeLayout::xxpp(n));
    let mut acc = 0.0;
    for nu in qcm.symplectic_eigenvalues()? {
        acc += f.eval(nu)?;
    }
    Ok(acc)
}

/// One probe record of the variational identity
/// `F(A) = min over symplectic M of f(Delta_s(M A M^T))`.
#[derive(Debug, Clone, Copy)]
pub struct ProbeRecord {
    pub f_value: f64,
    pub sampled_min: f64,
    /// `sampled_min - f_value`; zero because the Williamson point is probed.
    pub equality_gap: f64,
}

/// Probe the variational identity with `trials` random symplectic
/// congruences plus the Williamson point (which attains the minimum).
/// Every probe is `>= F(A)` up to rounding.
pub fn f_variational_probe(
    a: &DMatrix<f64>,
    f: &MonotoneF,
    trials: usize,
    rng_seed: u64,
) -> Result<ProbeRecord> {
    if !f.is_concave() {
        return Err(Error::NonConcaveMonotone);
    }
    let n = a.nrows() / 2;
    let qcm = Qcm::raw(a.clone(), ModeLayout::xxpp(n));
    let f_value = symplectic_extension_f(a, f)?;
    // Williamson point: M0 A M0^T = D ⊕ D exactly attains F(A)
    let wil = qcm.williamson()?;
    let m0 = wil.s.inverse();
    let mut sampled_min = probe_value(a, m0.matrix(), f)?;
    let mut r = rng::seeded(rng_seed);
    for _ in 0..trials {
        let m = crate::symplectic::random_symplectic_from(n, 3.0, &mut r);
        let val = probe_value(a, m.matrix(), f)?;
        sampled_min = sampled_min.min(val);
    }
    Ok(ProbeRecord { f_value, sampled_min, equality_gap: sampled_min - f_value })
}

fn probe_value(a: &DMatrix<f64>, m: &DMatrix<f64>, f: &MonotoneF) -> Result<f64> {
    let conj = m * a * m.transpose();
    let d = delta_s(&conj)?;
    let mut acc = 0.0;
    for i in 0..d.nrows() {
        acc += f.eval(d[(i, i)])?;
    }
    Ok(acc)
}

/// The `n x n` doubly superstochastic matrix built from the blocks of a
/// symplectic `M = [[P, Q], [R, S]]`:
/// `M~_ij = (P_ij^2 + Q_ij^2 + R_ij^2 + S_ij^2)/2`. For Williamson-form
/// `A = D ⊕ D` it satisfies `diag(Delta_s(M A M^T)) = M~ nu`.
pub fn mtilde(m: &SymplecticMatrix) -> DMatrix<f64> {
    let mx = m.to_xxpp();
    let n = mx.n_modes();
    let s = mx.matrix();
    DMatrix::from_fn(n, n, |i, j| {
        0.5 * (s[(i, j)] * s[(i, j)]
            + s[(i, n + j)] * s[(i, n + j)]
            + s[(n + i, j)] * s[(n + i, j)]
            + s[(n + i, n + j)] * s[(n + i, n + j)])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{tensor, tmsv};
    use crate::symplectic::{random_qcm, random_symplectic};
    use approx::assert_abs_diff_eq;

    #[test]
    fn monotone_values() {
        let s1 = MonotoneF::entropy();
        let s2 = MonotoneF::renyi2();
        assert_abs_diff_eq!(s2.eval(1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(s1.eval(1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(s1.eval(2.0).unwrap(), 0.9547712524422192, epsilon = 1e-12);
        assert_abs_diff_eq!(s2.eval(3.0).unwrap(), 3.0f64.ln(), epsilon = 1e-15);
        assert!(s1.eval(0.5).is_err());
        let bits = MonotoneF::renyi2().with_base(LogBase::Base2);
        assert_abs_diff_eq!(bits.eval(2.0).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn monotones_are_concave_on_midpoints() {
        let mut r = crate::rng::seeded(12);
        use rand::Rng;
        for f in [MonotoneF::entropy(), MonotoneF::renyi2()] {
            assert!(f.is_concave());
            for _ in 0..50 {
                let x: f64 = r.random_range(1.0..20.0);
                let y: f64 = r.random_range(1.0..20.0);
                let mid = f.eval(0.5 * (x + y)).unwrap();
                let avg = 0.5 * (f.eval(x).unwrap() + f.eval(y).unwrap());
                assert!(mid >= avg - 1e-12);
            }
        }
    }

    #[test]
    fn table_profiles() {
        let t = MonotoneF::table(vec![(1.0, 0.0), (2.0, 1.0), (4.0, 1.5)]).unwrap();
        assert!(t.is_concave());
        assert_abs_diff_eq!(t.eval(1.5).unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(t.eval(3.0).unwrap(), 1.25, epsilon = 1e-12);
        // linear extension beyond the last knot
        assert_abs_diff_eq!(t.eval(6.0).unwrap(), 2.0, epsilon = 1e-12);

        assert!(MonotoneF::table(vec![(1.0, 0.1), (2.0, 1.0)]).is_err());
        assert!(MonotoneF::table(vec![(1.0, 0.0), (2.0, -1.0)]).is_err());
        let convex = MonotoneF::table(vec![(1.0, 0.0), (2.0, 0.1), (3.0, 1.0)]).unwrap();
        assert!(!convex.is_concave());
    }

    #[test]
    fn pure_entanglement_examples() {
        let f = MonotoneF::renyi2();
        let part = Partition::bipartite(1, 1);
        // product pure state has none
        let tau = tensor(
            &Qcm::identity(1, crate::layout::QuadratureOrder::Xxpp),
            &Qcm::identity(1, crate::layout::QuadratureOrder::Xxpp),
        );
        assert_abs_diff_eq!(pure_entanglement(&tau, &part, &f).unwrap(), 0.0);

        let v = tmsv(3.0).unwrap();
        assert_abs_diff_eq!(
            pure_entanglement(&v, &part, &f).unwrap(),
            3.0f64.ln(),
            epsilon = 1e-10
        );

        // impure input rejected
        let thermal = tensor(
            &crate::symplectic::random_qcm(1, 1, 2.0),
            &crate::symplectic::random_qcm(1, 2, 2.0),
        );
        if !thermal.is_pure(1e-6).unwrap() {
            assert!(pure_entanglement(&thermal, &part, &f).is_err());
        }
    }

    #[test]
    fn pure_entanglement_is_additive() {
        let f = MonotoneF::entropy();
        for s in 0..5 {
            let t1 = tmsv(1.0 + 0.4 * (s as f64 + 1.0)).unwrap();
            let t2 = tmsv(1.0 + 0.7 * (s as f64 + 1.0)).unwrap();
            let joint = tensor(&t1, &t2);
            // modes 0,1 = first pair; 2,3 = second; A gets one mode of each
            let part = Partition::new(
                4,
                vec![vec![0, 2], vec![1, 3]],
                vec!["A".into(), "B".into()],
            )
            .unwrap();
            let sum = pure_entanglement(&t1, &Partition::bipartite(1, 1), &f).unwrap()
                + pure_entanglement(&t2, &Partition::bipartite(1, 1), &f).unwrap();
            let joint_val = pure_entanglement(&joint, &part, &f).unwrap();
            assert_abs_diff_eq!(joint_val, sum, epsilon = 1e-9);
        }
    }

    #[test]
    fn pure_entanglement_symmetric_between_parties() {
        let f = MonotoneF::entropy();
        let v = tmsv(2.5).unwrap();
        let part = Partition::bipartite(1, 1);
        let swapped =
            Partition::new(2, vec![vec![1], vec![0]], vec!["A".into(), "B".into()]).unwrap();
        assert_abs_diff_eq!(
            pure_entanglement(&v, &part, &f).unwrap(),
            pure_entanglement(&v, &swapped, &f).unwrap(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn standard_form_of_tmsv() {
        let nu = 2.3;
        let sf = standard_form(&tmsv(nu).unwrap()).unwrap();
        assert_abs_diff_eq!(sf.a, nu, epsilon = 1e-10);
        assert_abs_diff_eq!(sf.b, nu, epsilon = 1e-10);
        let c = (nu * nu - 1.0).sqrt();
        assert_abs_diff_eq!(sf.k_x, c, epsilon = 1e-10);
        assert_abs_diff_eq!(sf.k_p, -c, epsilon = 1e-10);
    }

    #[test]
    fn standard_form_of_product_state() {
        let v = tensor(&random_qcm(1, 51, 2.0), &random_qcm(1, 52, 2.0));
        let sf = standard_form(&v).unwrap();
        assert_abs_diff_eq!(sf.k_x, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(sf.k_p, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn standard_form_recovery_under_local_rotations() {
        use crate::gaussian::{apply_symplectic, rotation};
        use crate::gaussian::embed_operator;
        for s in 0..10 {
            let base = StandardForm2Mode {
                a: 1.5 + 0.1 * s as f64,
                b: 2.0,
                k_x: 0.8,
                k_p: -0.3,
            };
            let v = base.to_qcm();
            // local rotations leave the invariants alone
            let ra = rotation(0.3 + s as f64 * 0.1);
            let rb = rotation(-0.8);
            let sa = embed_operator(ra.matrix(), 2, &[0]);
            let sab = sa * embed_operator(rb.matrix(), 2, &[1]);
            let s_loc =
                SymplecticMatrix::new(sab, ModeLayout::xxpp(2)).expect("local product");
            let rotated = apply_symplectic(&s_loc, &v).unwrap();
            let sf = standard_form(&rotated).unwrap();
            assert_abs_diff_eq!(sf.a, base.a, epsilon = 1e-8);
            assert_abs_diff_eq!(sf.b, base.b, epsilon = 1e-8);
            assert_abs_diff_eq!(sf.k_x, base.k_x, epsilon = 1e-8);
            assert_abs_diff_eq!(sf.k_p, base.k_p, epsilon = 1e-8);
        }
    }

    #[test]
    fn assist_product_examples() {
        let s2 = MonotoneF::renyi2();
        assert_abs_diff_eq!(assist_product(1.0, 3.0, &s2).unwrap(), 0.0, epsilon = 1e-12);
        // a = b = k matches the thermal identity at one mode pair
        let k = 2.0;
        assert_abs_diff_eq!(
            assist_product(k, k, &s2).unwrap(),
            assist_thermal(k, 1, &s2).unwrap(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            assist_product(2.0, 3.0, &s2).unwrap(),
            0.3364722366212129,
            epsilon = 1e-12
        );
    }

    #[test]
    fn glems_correlation_examples() {
        let pure = GlemsParams::new(2.0, 2.0, 1.0).unwrap();
        let (kx, kp) = glems_correlations(&pure).unwrap();
        assert_abs_diff_eq!(kx, 3.0f64.sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(kp, -(3.0f64.sqrt()), epsilon = 1e-10);

        let mixed = GlemsParams::new(2.0, 2.0, 2.0).unwrap();
        let (kx, kp) = glems_correlations(&mixed).unwrap();
        assert_abs_diff_eq!(kx, 1.6558688457449498, epsilon = 1e-10);
        assert_abs_diff_eq!(kp, -0.9058688457449498, epsilon = 1e-10);
        // g reproduction
        let ab = 4.0;
        let g2 = (ab - kx * kx) * (ab - kp * kp);
        assert_abs_diff_eq!(g2, 4.0, epsilon = 1e-9);

        // product of thermals is only GLEMS on the boundary a = 1 or b = 1
        assert!(glems_correlations(&GlemsParams::new(2.0, 2.0, 4.0).unwrap()).is_err());
        let edge = GlemsParams::new(1.0, 3.0, 3.0).unwrap();
        let (kx, kp) = glems_correlations(&edge).unwrap();
        assert_abs_diff_eq!(kx, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(kp, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn glems_spectrum_is_one_and_g() {
        for (a, b, g) in [(2.0, 2.0, 2.0), (1.7, 2.4, 1.9), (3.0, 1.2, 2.9), (2.0, 2.0, 1.0)] {
            let p = GlemsParams::new(a, b, g).unwrap();
            let v = glems_qcm(&p).unwrap();
            let nus = v.symplectic_eigenvalues().unwrap();
            assert_abs_diff_eq!(nus[0], g, epsilon = 1e-8);
            assert_abs_diff_eq!(nus[1], 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn glems_m_closed_forms() {
        let p = GlemsParams::new(2.0, 2.0, 2.0).unwrap();
        let (k_x, k_p) = glems_correlations(&p).unwrap();
        let sf = StandardForm2Mode { a: 2.0, b: 2.0, k_x, k_p };
        let ab = 4.0;
        let m0 = glems_m(0.0, &sf);
        assert_abs_diff_eq!(m0, 1.0 + k_x * k_x / (ab - k_x * k_x), epsilon = 1e-10);
        assert_abs_diff_eq!(m0, 3.1794016343087123, epsilon = 1e-10);
        // displayed difference m(0) - m(pi)
        let g = sf.g();
        let diff = glems_m(0.0, &sf) - glems_m(std::f64::consts::PI, &sf);
        let expected = (-k_p * k_p + k_x * k_x * (ab - k_p * k_p).powi(2) / (g * g))
            / (ab - k_p * k_p);
        assert_abs_diff_eq!(diff, expected, epsilon = 1e-10);
        assert!(diff >= 0.0);
    }

    #[test]
    fn glems_theta_zero_is_grid_max() {
        let mut r = crate::rng::seeded(77);
        use rand::Rng;
        let mut checked = 0;
        while checked < 20 {
            let a: f64 = r.random_range(1.0..3.0);
            let b: f64 = r.random_range(1.0..3.0);
            let lo = (a - b).abs() + 1.0;
            let hi = (a + b - 1.0).min(a * b);
            if hi <= lo {
                continue;
            }
            let g: f64 = r.random_range(lo..hi);
            let p = match GlemsParams::new(a, b, g) {
                Ok(p) => p,
                Err(_) => continue,
            };
            let (k_x, k_p) = match glems_correlations(&p) {
                Ok(k) => k,
                Err(_) => continue,
            };
            let sf = StandardForm2Mode { a, b, k_x, k_p };
            let m0 = glems_m(0.0, &sf);
            for i in 0..200 {
                let theta = -std::f64::consts::PI
                    + 2.0 * std::f64::consts::PI * (i as f64) / 199.0;
                assert!(
                    glems_m(theta, &sf) <= m0 + 1e-9,
                    "m({theta}) exceeds m(0) at (a,b,g)=({a},{b},{g})"
                );
            }
            if let Some(ts) = glems_theta_star(&sf) {
                assert!(glems_m(ts, &sf) <= m0 + 1e-9);
            }
            checked += 1;
        }
    }

    #[test]
    fn assist_glems_examples() {
        let f = MonotoneF::renyi2();
        // pure boundary: the state is its own optimum
        let pure = GlemsParams::new(2.0, 2.0, 1.0).unwrap();
        assert_abs_diff_eq!(glems_nu_star(&pure).unwrap(), 2.0, epsilon = 1e-9);
        let v = glems_qcm(&pure).unwrap();
        let part = Partition::bipartite(1, 1);
        assert_abs_diff_eq!(
            assist_glems(&pure, &f, false).unwrap(),
            pure_entanglement(&v, &part, &f).unwrap(),
            epsilon = 1e-9
        );

        let mixed = GlemsParams::new(2.0, 2.0, 2.0).unwrap();
        assert_abs_diff_eq!(glems_nu_star(&mixed).unwrap(), 1.7830876687108551, epsilon = 1e-9);
        // the literal reading applies f to the squared eigenvalue
        let lit = assist_glems(&mixed, &f, true).unwrap();
        assert_abs_diff_eq!(lit, (1.7830876687108551f64 * 1.7830876687108551).ln(), epsilon = 1e-9);

        // k_x = 0 means no extractable entanglement
        let edge = GlemsParams::new(1.0, 3.0, 3.0).unwrap();
        assert_abs_diff_eq!(assist_glems(&edge, &f, false).unwrap(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn upper_bound_examples() {
        let part = Partition::bipartite(1, 1);
        let f = MonotoneF::renyi2();
        // V = k identity: the bound is tight
        let k = 2.0;
        let v = Qcm::raw(DMatrix::identity(4, 4) * k, ModeLayout::xxpp(2));
        assert_abs_diff_eq!(
            assist_upper_bound(&v, &part, &f).unwrap(),
            assist_thermal(k, 1, &f).unwrap(),
            epsilon = 1e-12
        );
        // pure tmsv: the bound dominates the exact value
        let nu = 2.7;
        let v = tmsv(nu).unwrap();
        let exact = pure_entanglement(&v, &part, &f).unwrap();
        assert!(assist_upper_bound(&v, &part, &f).unwrap() >= exact - 1e-12);

        let convex = MonotoneF::table(vec![(1.0, 0.0), (2.0, 0.1), (3.0, 1.0)]).unwrap();
        assert!(matches!(
            assist_upper_bound(&v, &part, &convex),
            Err(Error::NonConcaveMonotone)
        ));
    }

    #[test]
    fn thermal_gap_limits() {
        let rec = nongaussian_gap(1.0, 1).unwrap();
        assert_abs_diff_eq!(rec.gauss, 0.0);
        assert_abs_diff_eq!(rec.nongauss, 0.0);

        let rec = nongaussian_gap(100.0, 1).unwrap();
        assert!((rec.diff - std::f64::consts::LN_2).abs() < 0.01, "diff {}", rec.diff);

        let rec = nongaussian_gap(1.001, 1).unwrap();
        assert!(rec.ratio > 100.0, "ratio {}", rec.ratio);
    }

    #[test]
    fn delta_s_examples() {
        let mut a = DMatrix::zeros(4, 4);
        a[(0, 0)] = 1.0;
        a[(1, 1)] = 2.0;
        a[(2, 2)] = 3.0;
        a[(3, 3)] = 4.0;
        let d = delta_s(&a).unwrap();
        assert_abs_diff_eq!(d[(0, 0)], 2.0);
        assert_abs_diff_eq!(d[(1, 1)], 3.0);
    }

    #[test]
    fn f_on_thermal_identity() {
        let f = MonotoneF::renyi2();
        let kappa = 1.9;
        for n in 1..4 {
            let a = DMatrix::identity(2 * n, 2 * n) * kappa;
            assert_abs_diff_eq!(
                symplectic_extension_f(&a, &f).unwrap(),
                n as f64 * kappa.ln(),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn williamson_point_attains_f() {
        let f = MonotoneF::entropy();
        // A already in Williamson form: the identity congruence attains F
        let mut a = DMatrix::zeros(4, 4);
        for (i, v) in [1.5, 2.5, 1.5, 2.5].iter().enumerate() {
            a[(i, i)] = *v;
        }
        let d = delta_s(&a).unwrap();
        let direct = f.eval(d[(0, 0)]).unwrap() + f.eval(d[(1, 1)]).unwrap();
        assert_abs_diff_eq!(
            direct,
            symplectic_extension_f(&a, &f).unwrap(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn variational_probe_never_goes_below_f() {
        for (seed, f) in [(1u64, MonotoneF::entropy()), (2, MonotoneF::renyi2())] {
            let v = random_qcm(2, 400 + seed, 3.0);
            let probe = f_variational_probe(v.matrix(), &f, 200, 99 + seed).unwrap();
            assert!(probe.sampled_min >= probe.f_value - 1e-9);
            assert!(probe.equality_gap.abs() <= 1e-9, "gap {}", probe.equality_gap);
        }
    }

    #[test]
    fn mtilde_properties() {
        // single-mode rotation: row sums c^2 + s^2 = 1
        let r = crate::gaussian::rotation(0.7);
        let mt = mtilde(&r);
        assert_abs_diff_eq!(mt[(0, 0)], 1.0, epsilon = 1e-12);

        let id = SymplecticMatrix::identity(3, crate::layout::QuadratureOrder::Xxpp);
        let mt = mtilde(&id);
        assert!((mt - DMatrix::identity(3, 3)).norm() < 1e-12);

        // doubly superstochastic and the diagonal identity on Williamson forms
        for s in 0..10 {
            let m = random_symplectic(3, 500 + s, 3.0);
            let mt = mtilde(&m);
            for i in 0..3 {
                let row: f64 = (0..3).map(|j| mt[(i, j)]).sum();
                let col: f64 = (0..3).map(|j| mt[(j, i)]).sum();
                assert!(row >= 1.0 - 1e-10, "row sum {row}");
                assert!(col >= 1.0 - 1e-10, "col sum {col}");
            }
            let nu = DVector::from_row_slice(&[2.0, 1.5, 1.2]);
            let mut a = DMatrix::zeros(6, 6);
            for i in 0..3 {
                a[(i, i)] = nu[i];
                a[(3 + i, 3 + i)] = nu[i];
            }
            let d = delta_s(&(m.matrix() * &a * m.matrix().transpose())).unwrap();
            let expected = &mt * &nu;
            for i in 0..3 {
                assert_abs_diff_eq!(d[(i, i)], expected[i], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn f_is_monotone_and_concave_on_valid_states() {
        let f = MonotoneF::entropy();
        for s in 0..20 {
            let b = random_qcm(2, 600 + s, 2.0);
            let bump = random_qcm(2, 700 + s, 1.5);
            let a_mat = b.matrix() + bump.matrix() * 0.3;
            // A >= B > 0 implies F(A) >= F(B)
            let fa = symplectic_extension_f(&a_mat, &f).unwrap();
            let fb = symplectic_extension_f(b.matrix(), &f).unwrap();
            assert!(fa >= fb - 1e-8, "seed {s}: {fa} < {fb}");

            // midpoint concavity
            let c = random_qcm(2, 800 + s, 2.5);
            let mid = (b.matrix() + c.matrix()) * 0.5;
            let fm = symplectic_extension_f(&mid, &f).unwrap();
            let avg = 0.5 * (fb + symplectic_extension_f(c.matrix(), &f).unwrap());
            assert!(fm >= avg - 1e-8, "seed {s}: midpoint {fm} < {avg}");
        }
    }

    #[test]
    fn omega_conjugation_leaves_f_alone() {
        let f = MonotoneF::entropy();
        for s in 0..10 {
            let tau = random_qcm(2, 900 + s, 2.0);
            let omega = ModeLayout::xxpp(2).omega();
            let conj = &omega * tau.matrix() * omega.transpose();
            assert_abs_diff_eq!(
                symplectic_extension_f(tau.matrix(), &f).unwrap(),
                symplectic_extension_f(&conj, &f).unwrap(),
                epsilon = 1e-9
            );
        }
    }
}
