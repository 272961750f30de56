//! Gaussian dynamics at the covariance-matrix level: measurement updates,
//! channel action, purification, standard constructors, tensoring and
//! marginals.
//!
//! Mean vectors are carried by [`GaussianState`] but every resource
//! quantity in this crate depends on the covariance matrix only; outcome
//! sampling is provided for demonstration.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::layout::{ModeLayout, QuadratureOrder};
use crate::linalg;
use crate::rng;
use crate::symplectic::{schur_complement, Qcm, SymplecticMatrix, DEFAULT_VALIDITY_TOL};

/// Assignment of modes to named parties; defines marginals and local spectra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    n_modes: usize,
    groups: Vec<Vec<usize>>,
    labels: Vec<String>,
}

impl Partition {
    /// Groups must be nonempty, disjoint, and cover `0..n_modes`.
    pub fn new(n_modes: usize, groups: Vec<Vec<usize>>, labels: Vec<String>) -> Result<Self> {
        if groups.len() != labels.len() {
            return Err(Error::ParameterRange("one label per group required".into()));
        }
        let mut seen = vec![false; n_modes];
        for g in &groups {
            if g.is_empty() {
                return Err(Error::ParameterRange("empty party in partition".into()));
            }
            for &m in g {
                if m >= n_modes {
                    return Err(Error::IndexOutOfRange(format!("mode {m} >= {n_modes}")));
                }
                if seen[m] {
                    return Err(Error::ParameterRange(format!("mode {m} assigned twice")));
                }
                seen[m] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::ParameterRange("partition must cover all modes".into()));
        }
        let groups = groups
            .into_iter()
            .map(|mut g| {
                g.sort_unstable();
                g
            })
            .collect();
        Ok(Partition { n_modes, groups, labels })
    }

    /// The standard `A|B` split with `A` holding the first `n_a` modes.
    pub fn bipartite(n_a: usize, n_b: usize) -> Self {
        Partition {
            n_modes: n_a + n_b,
            groups: vec![(0..n_a).collect(), (n_a..n_a + n_b).collect()],
            labels: vec!["A".into(), "B".into()],
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn group(&self, idx: usize) -> &[usize] {
        &self.groups[idx]
    }

    pub fn label(&self, idx: usize) -> &str {
        &self.labels[idx]
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Modes not in group `idx`, sorted.
    pub fn complement(&self, idx: usize) -> Vec<usize> {
        (0..self.n_modes).filter(|m| !self.groups[idx].contains(m)).collect()
    }

    /// Partition of `ell` stacked copies: each party keeps the union of its
    /// modes across copies.
    pub fn stacked_copies(&self, ell: usize) -> Partition {
        let groups = self
            .groups
            .iter()
            .map(|g| {
                let mut out = Vec::with_capacity(g.len() * ell);
                for c in 0..ell {
                    out.extend(g.iter().map(|&m| c * self.n_modes + m));
                }
                out
            })
            .collect();
        Partition { n_modes: self.n_modes * ell, groups, labels: self.labels.clone() }
    }
}

/// The seed of a Gaussian measurement: a valid state on the measured modes.
#[derive(Debug, Clone)]
pub struct MeasurementSeed {
    gamma: Qcm,
    pure: bool,
}

impl MeasurementSeed {
    pub fn new(gamma: Qcm) -> Result<Self> {
        let (ok, witness) = gamma.validity(DEFAULT_VALIDITY_TOL)?;
        if !ok {
            return Err(Error::InvalidQcm { min_nu: witness });
        }
        let pure = gamma.is_pure(DEFAULT_VALIDITY_TOL)?;
        Ok(MeasurementSeed { gamma, pure })
    }

    /// Heterodyne seed (vacuum seed) on `n` modes.
    pub fn heterodyne(n_modes: usize) -> Self {
        MeasurementSeed { gamma: Qcm::identity(n_modes, QuadratureOrder::Xxpp), pure: true }
    }

    /// Seed from a state already known to be pure (chart outputs).
    pub(crate) fn pure_unchecked(gamma: Qcm) -> Self {
        MeasurementSeed { gamma, pure: true }
    }

    pub fn gamma(&self) -> &Qcm {
        &self.gamma
    }

    pub fn is_pure(&self) -> bool {
        self.pure
    }
}

/// A deterministic Gaussian operation characterized by a state over
/// input ⊕ output modes.
#[derive(Debug, Clone)]
pub struct GaussianChannel {
    gamma_ab: Qcm,
    n_in: usize,
    n_out: usize,
}

impl GaussianChannel {
    pub fn new(gamma_ab: Qcm, n_in: usize, n_out: usize) -> Result<Self> {
        if gamma_ab.n_modes() != n_in + n_out {
            return Err(Error::ShapeMismatch {
                expected: format!("{} modes", n_in + n_out),
                got: format!("{} modes", gamma_ab.n_modes()),
            });
        }
        let (ok, witness) = gamma_ab.validity(DEFAULT_VALIDITY_TOL)?;
        if !ok {
            return Err(Error::InvalidQcm { min_nu: witness });
        }
        Ok(GaussianChannel { gamma_ab: gamma_ab.to_xxpp(), n_in, n_out })
    }

    pub fn gamma(&self) -> &Qcm {
        &self.gamma_ab
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    /// Whether the channel maps `{V >= 1}` into itself, i.e. whether
    /// `Gamma_AB >= (-1_A) ⊕ 1_B` within `tol`.
    pub fn preserves_free_set(&self, tol: f64) -> bool {
        let n = self.n_in + self.n_out;
        let layout = ModeLayout::xxpp(n);
        let mut shift = DMatrix::zeros(2 * n, 2 * n);
        for m in 0..n {
            let sign = if m < self.n_in { -1.0 } else { 1.0 };
            shift[(layout.x_index(m), layout.x_index(m))] = sign;
            shift[(layout.p_index(m), layout.p_index(m))] = sign;
        }
        linalg::min_eigenvalue(&(self.gamma_ab.matrix() - shift)) >= -tol
    }
}

/// A Gaussian state: covariance matrix plus mean (displacement) vector.
#[derive(Debug, Clone)]
pub struct GaussianState {
    pub v: Qcm,
    pub t: DVector<f64>,
}

impl GaussianState {
    pub fn new(v: Qcm, t: DVector<f64>) -> Result<Self> {
        if t.len() != v.layout().dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("mean of length {}", v.layout().dim()),
                got: format!("{}", t.len()),
            });
        }
        Ok(GaussianState { v, t })
    }

    pub fn centered(v: Qcm) -> Self {
        let dim = v.layout().dim();
        GaussianState { v, t: DVector::zeros(dim) }
    }

    /// `(S V S^T, S t)`.
    pub fn apply_symplectic(&self, s: &SymplecticMatrix) -> Result<GaussianState> {
        let v = apply_symplectic(s, &self.v)?;
        let sx = s.to_order(self.v.order());
        Ok(GaussianState { t: sx.matrix() * &self.t, v })
    }
}

/// Coordinate indices (x block then p block) of the given modes in an
/// `Xxpp` system of `n_modes` modes.
fn coords_xxpp(n_modes: usize, modes: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(2 * modes.len());
    out.extend(modes.iter().copied());
    out.extend(modes.iter().map(|&m| n_modes + m));
    out
}

/// Place a `2k x 2k` `Xxpp` matrix over the listed modes of an `n`-mode
/// `Xxpp` system, zero elsewhere.
fn embed_xxpp(small: &DMatrix<f64>, n_modes: usize, modes: &[usize]) -> DMatrix<f64> {
    let coords = coords_xxpp(n_modes, modes);
    let mut out = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for (i, &ci) in coords.iter().enumerate() {
        for (j, &cj) in coords.iter().enumerate() {
            out[(ci, cj)] = small[(i, j)];
        }
    }
    out
}

/// Post-measurement state on the kept parties after a Gaussian measurement
/// with the given seed on the `measured` party:
/// `(V + gamma_B) / (V_B + gamma_B)` restricted to the kept modes.
/// The update is independent of the measurement outcome.
pub fn measurement_update(
    v: &Qcm,
    part: &Partition,
    measured: usize,
    seed: &MeasurementSeed,
) -> Result<Qcm> {
    if part.n_modes() != v.n_modes() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} modes", v.n_modes()),
            got: format!("partition over {}", part.n_modes()),
        });
    }
    if measured >= part.n_groups() {
        return Err(Error::IndexOutOfRange(format!("party {measured}")));
    }
    let vx = v.to_xxpp();
    let n = vx.n_modes();
    let b_modes = part.group(measured);
    if seed.gamma().n_modes() != b_modes.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("seed on {} modes", b_modes.len()),
            got: format!("{} modes", seed.gamma().n_modes()),
        });
    }
    let kept = part.complement(measured);
    let gamma = seed.gamma().to_xxpp();
    let m = vx.matrix() + embed_xxpp(gamma.matrix(), n, b_modes);
    let keep_coords = coords_xxpp(n, &kept);
    let out = schur_complement(&m, &keep_coords).map_err(|e| match e {
        Error::SingularBlock => {
            Error::Numerical("measurement update hit a singular V_B + gamma_B".into())
        }
        other => other,
    })?;
    Ok(Qcm::raw(out, ModeLayout::xxpp(kept.len())))
}

/// Classical covariance of the measurement outcome: `(V_B + gamma)/2`.
pub fn outcome_covariance(v_b: &Qcm, seed: &MeasurementSeed) -> Result<DMatrix<f64>> {
    let vb = v_b.to_xxpp();
    let g = seed.gamma().to_xxpp();
    if vb.n_modes() != g.n_modes() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} modes", vb.n_modes()),
            got: format!("{} modes", g.n_modes()),
        });
    }
    Ok((vb.matrix() + g.matrix()) * 0.5)
}

/// Action of a Gaussian channel:
/// `(Gamma_AB + Sigma_A V Sigma_A) / (Gamma_A + Sigma_A V Sigma_A)` on the
/// output modes, where `Sigma` flips the sign of the momenta.
pub fn apply_channel(ch: &GaussianChannel, v_in: &Qcm) -> Result<Qcm> {
    if v_in.n_modes() != ch.n_in {
        return Err(Error::ShapeMismatch {
            expected: format!("{} input modes", ch.n_in),
            got: format!("{}", v_in.n_modes()),
        });
    }
    let vx = v_in.to_xxpp();
    let k = ch.n_in;
    let n = ch.n_in + ch.n_out;
    // Sigma V Sigma in Xxpp ordering flips the x-p cross blocks.
    let mut svs = vx.matrix().clone();
    for i in 0..k {
        for j in 0..k {
            svs[(i, k + j)] = -svs[(i, k + j)];
            svs[(k + i, j)] = -svs[(k + i, j)];
        }
    }
    let in_modes: Vec<usize> = (0..k).collect();
    let out_modes: Vec<usize> = (k..n).collect();
    let m = ch.gamma_ab.matrix() + embed_xxpp(&svs, n, &in_modes);
    let keep_coords = coords_xxpp(n, &out_modes);
    let out = schur_complement(&m, &keep_coords).map_err(|e| match e {
        Error::SingularBlock => {
            Error::Numerical("channel action hit a singular Gamma_A + Sigma V Sigma".into())
        }
        other => other,
    })?;
    Ok(Qcm::raw(out, ModeLayout::xxpp(ch.n_out)))
}

/// Gaussian-unitary action `S V S^T`.
pub fn apply_symplectic(s: &SymplecticMatrix, v: &Qcm) -> Result<Qcm> {
    if s.n_modes() != v.n_modes() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} modes", v.n_modes()),
            got: format!("{}", s.n_modes()),
        });
    }
    let sx = s.to_xxpp();
    let vx = v.to_xxpp();
    Ok(Qcm::raw(sx.matrix() * vx.matrix() * sx.matrix().transpose(), vx.layout()))
}

/// Direct sum of two states (block-diagonal in mode space).
pub fn tensor(v1: &Qcm, v2: &Qcm) -> Qcm {
    let a = v1.to_xxpp();
    let b = v2.to_xxpp();
    let n1 = a.n_modes();
    let n = n1 + b.n_modes();
    let first: Vec<usize> = (0..n1).collect();
    let second: Vec<usize> = (n1..n).collect();
    let m = embed_xxpp(a.matrix(), n, &first) + embed_xxpp(b.matrix(), n, &second);
    Qcm::raw(m, ModeLayout::xxpp(n))
}

/// Direct sum of `ell` copies.
pub fn tensor_copies(v: &Qcm, ell: usize) -> Qcm {
    assert!(ell >= 1);
    let mut out = v.to_xxpp();
    for _ in 1..ell {
        out = tensor(&out, v);
    }
    out
}

/// Principal submatrix on the listed modes.
pub fn marginal(v: &Qcm, modes: &[usize]) -> Result<Qcm> {
    let vx = v.to_xxpp();
    let n = vx.n_modes();
    let mut seen = vec![false; n];
    for &m in modes {
        if m >= n {
            return Err(Error::IndexOutOfRange(format!("mode {m} >= {n}")));
        }
        if seen[m] {
            return Err(Error::IndexOutOfRange(format!("duplicate mode {m}")));
        }
        seen[m] = true;
    }
    let mut sorted = modes.to_vec();
    sorted.sort_unstable();
    let coords = coords_xxpp(n, &sorted);
    Ok(Qcm::raw(
        linalg::principal_submatrix(vx.matrix(), &coords),
        ModeLayout::xxpp(sorted.len()),
    ))
}

/// Minimal-mode purification: a pure state on `A ⊕ B` whose marginal on `A`
/// is the input. One ancilla mode is spent per symplectic eigenvalue above
/// `1 + tol`; eigenvalues within `tol` of 1 get none.
pub fn purify(v_a: &Qcm) -> Result<Qcm> {
    let vx = v_a.to_xxpp();
    let (ok, witness) = vx.validity(DEFAULT_VALIDITY_TOL)?;
    if !ok {
        return Err(Error::InvalidQcm { min_nu: witness });
    }
    let wil = vx.williamson()?;
    let n = vx.n_modes();
    let ancillas: Vec<usize> =
        (0..n).filter(|&j| wil.nu[j] > 1.0 + DEFAULT_VALIDITY_TOL).collect();
    let m = ancillas.len();
    if m == 0 {
        return Ok(vx);
    }
    let total = n + m;
    let layout = ModeLayout::xxpp(total);
    // Williamson core with one squeezed-vacuum pair per mixed mode.
    let mut w = DMatrix::identity(2 * total, 2 * total);
    for j in 0..n {
        let nu = wil.nu[j];
        w[(layout.x_index(j), layout.x_index(j))] = nu;
        w[(layout.p_index(j), layout.p_index(j))] = nu;
    }
    for (k, &j) in ancillas.iter().enumerate() {
        let nu = wil.nu[j];
        let c = (nu * nu - 1.0).sqrt();
        let anc = n + k;
        w[(layout.x_index(anc), layout.x_index(anc))] = nu;
        w[(layout.p_index(anc), layout.p_index(anc))] = nu;
        w[(layout.x_index(j), layout.x_index(anc))] = c;
        w[(layout.x_index(anc), layout.x_index(j))] = c;
        w[(layout.p_index(j), layout.p_index(anc))] = -c;
        w[(layout.p_index(anc), layout.p_index(j))] = -c;
    }
    let a_modes: Vec<usize> = (0..n).collect();
    let s_full = embed_operator(wil.s.to_xxpp().matrix(), total, &a_modes);
    Ok(Qcm::raw(&s_full * w * s_full.transpose(), layout))
}

/// Two-mode squeezed vacuum with local symplectic eigenvalue `nu`.
pub fn tmsv(nu: f64) -> Result<Qcm> {
    if nu < 1.0 {
        return Err(Error::ParameterRange(format!("tmsv requires nu >= 1, got {nu}")));
    }
    let c = (nu * nu - 1.0).sqrt();
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        nu,  c,   0.0, 0.0,
        c,   nu,  0.0, 0.0,
        0.0, 0.0, nu,  -c,
        0.0, 0.0, -c,  nu,
    ]);
    Ok(Qcm::raw(m, ModeLayout::xxpp(2)))
}

/// Beam splitter with transmissivity `tau` (orthogonal symplectic).
pub fn beam_splitter(tau: f64) -> Result<SymplecticMatrix> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::ParameterRange(format!(
            "transmissivity must be in [0,1], got {tau}"
        )));
    }
    let t = tau.sqrt();
    let r = (1.0 - tau).sqrt();
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        t,   r,   0.0, 0.0,
        -r,  t,   0.0, 0.0,
        0.0, 0.0, t,   r,
        0.0, 0.0, -r,  t,
    ]);
    Ok(SymplecticMatrix::new_unchecked(m, ModeLayout::xxpp(2)))
}

/// Single-mode phase-space rotation.
pub fn rotation(theta: f64) -> SymplecticMatrix {
    let (s, c) = theta.sin_cos();
    let m = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
    SymplecticMatrix::new_unchecked(m, ModeLayout::xxpp(1))
}

/// Single-mode squeezer `diag(z, 1/z)`.
pub fn squeezer(z: f64) -> Result<SymplecticMatrix> {
    if z < 1.0 {
        return Err(Error::ParameterRange(format!("squeezer requires z >= 1, got {z}")));
    }
    let m = DMatrix::from_row_slice(2, 2, &[z, 0.0, 0.0, 1.0 / z]);
    Ok(SymplecticMatrix::new_unchecked(m, ModeLayout::xxpp(1)))
}

/// Draw one measurement outcome (demonstration only; the covariance update
/// never depends on it). The outcome is normal with mean `t_B` and
/// covariance `(V_B + gamma)/2`.
pub fn sample_outcome(
    state: &GaussianState,
    part: &Partition,
    measured: usize,
    seed: &MeasurementSeed,
    rng_seed: u64,
) -> Result<DVector<f64>> {
    let b_modes = part.group(measured);
    let v_b = marginal(&state.v, b_modes)?;
    let cov = outcome_covariance(&v_b, seed)?;
    let chol = cov
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("outcome covariance not positive definite".into()))?;
    let vx = state.v.to_xxpp();
    let coords = coords_xxpp(vx.n_modes(), b_modes);
    let mean = DVector::from_iterator(coords.len(), coords.iter().map(|&c| state.t[c]));
    let mut r = rng::seeded(rng_seed);
    let noise = DVector::from_fn(coords.len(), |_, _| rng::normal(&mut r));
    Ok(mean + chol.l() * noise)
}

/// Embed a local operator over the given modes as a global one acting as
/// the identity elsewhere (`Xxpp`).
pub fn embed_operator(op: &DMatrix<f64>, n_modes: usize, modes: &[usize]) -> DMatrix<f64> {
    let coords = coords_xxpp(n_modes, modes);
    let mut out = DMatrix::identity(2 * n_modes, 2 * n_modes);
    for (i, &ci) in coords.iter().enumerate() {
        for (j, &cj) in coords.iter().enumerate() {
            out[(ci, cj)] = op[(i, j)];
        }
    }
    out
}

impl Qcm {
    /// Convenience marginal by mode list.
    pub fn marginal(&self, modes: &[usize]) -> Result<Qcm> {
        marginal(self, modes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::random_qcm;
    use approx::assert_abs_diff_eq;

    fn diag_qcm(entries: &[f64]) -> Qcm {
        let n = entries.len() / 2;
        let m = DMatrix::from_diagonal(&DVector::from_row_slice(entries));
        Qcm::new(m, ModeLayout::xxpp(n)).unwrap()
    }

    #[test]
    fn product_state_update_leaves_a_unchanged() {
        let v_a = random_qcm(1, 3, 2.0);
        let v_b = random_qcm(1, 4, 2.0);
        let v = tensor(&v_a, &v_b);
        let part = Partition::bipartite(1, 1);
        let seed = MeasurementSeed::new(random_qcm(1, 5, 1.5)).unwrap();
        let out = measurement_update(&v, &part, 1, &seed).unwrap();
        assert!(linalg::max_abs(&(out.matrix() - v_a.matrix())) < 1e-12);
    }

    #[test]
    fn tmsv_heterodyne_projects_to_vacuum() {
        let v = tmsv(2.0).unwrap();
        let part = Partition::bipartite(1, 1);
        let seed = MeasurementSeed::heterodyne(1);
        let out = measurement_update(&v, &part, 1, &seed).unwrap();
        assert!(linalg::max_abs(&(out.matrix() - DMatrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn update_output_is_valid() {
        for s in 0..20 {
            let v = random_qcm(2, 100 + s, 3.0);
            let part = Partition::bipartite(1, 1);
            let seed = MeasurementSeed::new(random_qcm(1, 200 + s, 2.0)).unwrap();
            let out = measurement_update(&v, &part, 1, &seed).unwrap();
            assert!(out.is_valid(1e-7).unwrap(), "seed {s}");
        }
    }

    #[test]
    fn outcome_covariance_examples() {
        let i1 = Qcm::identity(1, QuadratureOrder::Xxpp);
        let seed = MeasurementSeed::heterodyne(1);
        let c = outcome_covariance(&i1, &seed).unwrap();
        assert!(linalg::max_abs(&(&c - DMatrix::identity(2, 2))) < 1e-15);

        let v3 = diag_qcm(&[3.0, 3.0]);
        let c = outcome_covariance(&v3, &seed).unwrap();
        assert!(linalg::max_abs(&(&c - DMatrix::identity(2, 2) * 2.0)) < 1e-15);

        // symmetric in its arguments
        let a = random_qcm(1, 8, 2.0);
        let b = random_qcm(1, 9, 2.0);
        let ab = outcome_covariance(&a, &MeasurementSeed::new(b.clone()).unwrap()).unwrap();
        let ba = outcome_covariance(&b, &MeasurementSeed::new(a).unwrap()).unwrap();
        assert!(linalg::max_abs(&(ab - ba)) < 1e-14);
    }

    #[test]
    fn uncorrelated_channel_prepares_vacuum() {
        let ch = GaussianChannel::new(Qcm::identity(2, QuadratureOrder::Xxpp), 1, 1).unwrap();
        for s in 0..5 {
            let v = random_qcm(1, s, 3.0);
            let out = apply_channel(&ch, &v).unwrap();
            assert!(linalg::max_abs(&(out.matrix() - DMatrix::identity(2, 2))) < 1e-12);
        }
    }

    #[test]
    fn tmsv_channel_approximates_identity() {
        let ch = GaussianChannel::new(tmsv(100.0).unwrap(), 1, 1).unwrap();
        let v = diag_qcm(&[2.0, 0.5]);
        let out = apply_channel(&ch, &v).unwrap();
        assert!(linalg::max_abs(&(out.matrix() - v.matrix())) < 0.05);
    }

    #[test]
    fn free_channel_maps_vacuum_above_identity() {
        // Gamma = tmsv sits exactly on the free-class boundary
        let ch = GaussianChannel::new(tmsv(3.0).unwrap(), 1, 1).unwrap();
        assert!(ch.preserves_free_set(1e-9));
        let out = apply_channel(&ch, &Qcm::identity(1, QuadratureOrder::Xxpp)).unwrap();
        assert!(linalg::min_eigenvalue(&(out.matrix() - DMatrix::identity(2, 2))) >= -1e-9);
    }

    #[test]
    fn symplectic_action_and_marginals() {
        let v = random_qcm(2, 21, 2.0);
        let id = SymplecticMatrix::identity(2, QuadratureOrder::Xxpp);
        let out = apply_symplectic(&id, &v).unwrap();
        assert!(linalg::max_abs(&(out.matrix() - v.matrix())) < 1e-15);

        let v1 = random_qcm(1, 22, 2.0);
        let v2 = random_qcm(2, 23, 2.0);
        let t = tensor(&v1, &v2);
        let back = marginal(&t, &[0]).unwrap();
        assert!(linalg::max_abs(&(back.matrix() - v1.matrix())) < 1e-15);
        let back2 = marginal(&t, &[1, 2]).unwrap();
        assert!(linalg::max_abs(&(back2.matrix() - v2.matrix())) < 1e-15);
    }

    #[test]
    fn tensor_copies_spectrum_is_multiset() {
        let v = random_qcm(1, 31, 3.0);
        let nu = v.symplectic_eigenvalues().unwrap()[0];
        let t = tensor_copies(&v, 3);
        let nus = t.symplectic_eigenvalues().unwrap();
        assert_eq!(nus.len(), 3);
        for x in nus {
            assert_abs_diff_eq!(x, nu, epsilon = 1e-9);
        }
    }

    #[test]
    fn purify_pure_input_is_identity_map() {
        let v = diag_qcm(&[2.0, 0.5]);
        let p = purify(&v).unwrap();
        assert_eq!(p.n_modes(), 1);
        assert!(linalg::max_abs(&(p.matrix() - v.matrix())) < 1e-12);
    }

    #[test]
    fn purify_thermal_gives_tmsv() {
        let v = diag_qcm(&[2.0, 2.0]);
        let p = purify(&v).unwrap();
        assert_eq!(p.n_modes(), 2);
        assert!(p.is_pure(1e-7).unwrap());
        let back = marginal(&p, &[0]).unwrap();
        assert!(linalg::max_abs(&(back.matrix() - v.matrix())) < 1e-8);
    }

    #[test]
    fn purify_one_mode_mixed_squeezed() {
        let v = diag_qcm(&[2.0, 3.0]);
        let p = purify(&v).unwrap();
        assert_eq!(p.n_modes(), 2);
        assert!(p.is_pure(1e-7).unwrap());
        let back = marginal(&p, &[0]).unwrap();
        assert!(linalg::max_abs(&(back.matrix() - v.matrix())) < 1e-8);
    }

    #[test]
    fn purify_random_inputs() {
        for s in 0..10 {
            let v = random_qcm(3, 300 + s, 3.0);
            let p = purify(&v).unwrap();
            assert!(p.is_pure(1e-7).unwrap(), "seed {s}");
            let back = marginal(&p, &[0, 1, 2]).unwrap();
            assert!(
                linalg::max_abs(&(back.matrix() - v.to_xxpp().matrix())) < 1e-8,
                "seed {s}"
            );
        }
    }

    #[test]
    fn tmsv_examples() {
        let v = tmsv(1.0).unwrap();
        assert!(linalg::max_abs(&(v.matrix() - DMatrix::identity(4, 4))) < 1e-15);

        let v = tmsv(3.0).unwrap();
        for mode in [0usize, 1] {
            let m = marginal(&v, &[mode]).unwrap();
            assert!(linalg::max_abs(&(m.matrix() - DMatrix::identity(2, 2) * 3.0)) < 1e-12);
        }
        assert!(v.is_pure(1e-7).unwrap());
        let locals = marginal(&v, &[0]).unwrap().symplectic_eigenvalues().unwrap();
        assert_abs_diff_eq!(locals[0], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn beam_splitter_mixes_with_vacuum() {
        let bs = beam_splitter(0.5).unwrap();
        assert!(bs.is_symplectic(1e-12));
        let m = bs.matrix();
        assert!(linalg::max_abs(&(m * m.transpose() - DMatrix::identity(4, 4))) < 1e-12);

        let v_a = diag_qcm(&[4.0, 0.25]);
        let joint = tensor(&v_a, &Qcm::identity(1, QuadratureOrder::Xxpp));
        let out = apply_symplectic(&bs, &joint).unwrap();
        let a = marginal(&out, &[0]).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_row_slice(&[2.5, 0.625]));
        assert!(linalg::max_abs(&(a.matrix() - expected)) < 1e-12);
    }

    #[test]
    fn parameter_ranges_rejected() {
        assert!(tmsv(0.5).is_err());
        assert!(beam_splitter(1.5).is_err());
        assert!(squeezer(0.9).is_err());
    }

    #[test]
    fn stacked_partition_interleaves_copies() {
        let part = Partition::bipartite(1, 1);
        let two = part.stacked_copies(2);
        assert_eq!(two.group(0), &[0, 2]);
        assert_eq!(two.group(1), &[1, 3]);
    }

    #[test]
    fn outcome_sampling_is_deterministic() {
        let v = tmsv(2.0).unwrap();
        let st = GaussianState::centered(v);
        let part = Partition::bipartite(1, 1);
        let seed = MeasurementSeed::heterodyne(1);
        let a = sample_outcome(&st, &part, 1, &seed, 99).unwrap();
        let b = sample_outcome(&st, &part, 1, &seed, 99).unwrap();
        assert_eq!(a, b);
    }
}
