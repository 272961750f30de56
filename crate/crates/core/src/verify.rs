//! One-shot verification suite: every closed form is checked against the
//! variational oracle and the structural identities behind it, at pinned
//! tolerances, from fixed seeds. Hermetic and deterministic.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;

use crate::entanglement::{
    assist_thermal, assist_upper_bound, f_variational_probe, glems_correlations, glems_m,
    glems_nu_star, glems_qcm, mtilde, nongaussian_gap, product_optimal_c,
    symplectic_extension_f, GlemsParams, MonotoneF, StandardForm2Mode,
};
use crate::gaussian::{marginal, purify, Partition};
use crate::layout::ModeLayout;
use crate::linalg;
use crate::oracle::{
    numeric_assistance_objective, regularized_estimate, AssistObjective, OptimizerConfig,
};
use crate::rng;
use crate::squeezing::{counterexample_instance, pure_lower_bound};
use crate::symplectic::{random_qcm, random_symplectic, schur_complement, Qcm};

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {}: {} ({:.1}s) - {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

/// Run the full suite from a base seed. Same seed, same results.
pub fn run_all(seed: u64) -> Vec<CriterionReport> {
    vec![
        c1_assisted_squeezing(seed),
        c2_product_states(seed),
        c3_glems(seed),
        c4_upper_bound_and_additivity(seed),
        c5_gap_limits(),
        c6_counterexample(),
        c7_structural(seed),
    ]
}

pub fn all_pass(reports: &[CriterionReport]) -> bool {
    reports.iter().all(|r| r.pass)
}

fn report(id: u32, name: &str, start: Instant, pass: bool, detail: String) -> CriterionReport {
    CriterionReport {
        id,
        name: name.to_string(),
        pass,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Assisted squeezing equals the top eigenvalue, oracle-checked on 20
/// random states of 1-2 modes within 1e-3, in at most 60 s.
fn c1_assisted_squeezing(seed: u64) -> CriterionReport {
    let t0 = Instant::now();
    let cfg = OptimizerConfig::default().with_seed(seed);
    let mut worst = 0.0f64;
    let mut pass = true;
    for i in 0..20u64 {
        let n = 1 + (i % 2) as usize;
        let v = random_qcm(n, seed.wrapping_mul(1000).wrapping_add(i), 4.0);
        let out = match numeric_assistance_objective(&v, &AssistObjective::LambdaMax, &cfg) {
            Ok(o) => o,
            Err(e) => {
                return report(1, "assisted squeezing vs oracle", t0, false, format!("{e}"))
            }
        };
        let err = (out.value - v.max_eigenvalue()).abs();
        worst = worst.max(err);
        pass &= err <= 1e-3 && out.feasibility >= -1e-7;
    }
    let secs = t0.elapsed().as_secs_f64();
    pass &= secs <= 60.0;
    report(
        1,
        "assisted squeezing vs oracle",
        t0,
        pass,
        format!("20 instances, worst |oracle - lambda_max| = {worst:.2e}, budget 60s"),
    )
}

/// Product-state assisted entanglement `f((1+ab)/(a+b))`, oracle-checked,
/// with the optimal state certified as a two-mode squeezed vacuum.
fn c2_product_states(seed: u64) -> CriterionReport {
    let t0 = Instant::now();
    let cfg = OptimizerConfig::default().with_seed(seed ^ 0x02);
    let mut r = rng::seeded(seed ^ 0xab2);
    let f = MonotoneF::renyi2();
    let mut worst_value = 0.0f64;
    let mut worst_c = 0.0f64;
    let mut pass = true;
    for _ in 0..20 {
        let a: f64 = r.random_range(1.0..4.0);
        let b: f64 = r.random_range(1.0..4.0);
        let mut m = DMatrix::zeros(4, 4);
        for (i, val) in [a, b, a, b].iter().enumerate() {
            m[(i, i)] = *val;
        }
        let v = Qcm::raw(m, ModeLayout::xxpp(2));
        let part = Partition::bipartite(1, 1);
        let obj =
            AssistObjective::Entanglement { partition: part, monotone: f.clone() };
        let out = match numeric_assistance_objective(&v, &obj, &cfg) {
            Ok(o) => o,
            Err(e) => return report(2, "product-state assistance", t0, false, format!("{e}")),
        };
        let c = product_optimal_c(a, b);
        let expected = f.eval(c).unwrap();
        let err = (out.value - expected).abs();
        worst_value = worst_value.max(err);
        // the optimizing pure state must be a two-mode squeezed vacuum up
        // to local symplectics: both local symplectic eigenvalues equal c
        for mode in [0usize, 1] {
            let loc = marginal(&out.tau_opt, &[mode]).unwrap();
            let c_opt = loc.matrix().determinant().max(0.0).sqrt();
            let errc = (c_opt - c).abs();
            worst_c = worst_c.max(errc);
            pass &= errc <= 5e-3;
        }
        pass &= err <= 1e-3;
    }
    report(
        2,
        "product-state assistance",
        t0,
        pass,
        format!("20 instances, worst value err {worst_value:.2e}, worst tmsv-parameter err {worst_c:.2e}"),
    )
}

/// GLEMS assisted entanglement: the oracle's optimal local symplectic
/// eigenvalue matches `sqrt(1 + k_x^2/(ab - k_x^2))` and the reduced
/// objective peaks at angle zero.
fn c3_glems(seed: u64) -> CriterionReport {
    let t0 = Instant::now();
    let cfg = OptimizerConfig::default().with_seed(seed ^ 0x03);
    let mut r = rng::seeded(seed ^ 0xab3);
    let f = MonotoneF::renyi2();
    let mut worst_nu = 0.0f64;
    let mut pass = true;
    let mut checked = 0;
    while checked < 20 {
        let a: f64 = r.random_range(1.05..3.0);
        let b: f64 = r.random_range(1.05..3.0);
        let lo = (a - b).abs() + 1.0;
        let hi = (a + b - 1.0).min(a * b);
        if hi <= lo + 1e-3 {
            continue;
        }
        let t: f64 = r.random_range(0.1..0.9);
        let g = lo + t * (hi - lo);
        let p = match GlemsParams::new(a, b, g) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let v = match glems_qcm(&p) {
            Ok(v) => v,
            Err(_) => continue,
        };
        if !v.is_valid(1e-7).unwrap_or(false) {
            continue;
        }
        checked += 1;
        let nu_star = glems_nu_star(&p).unwrap();
        let part = Partition::bipartite(1, 1);
        let obj =
            AssistObjective::Entanglement { partition: part, monotone: f.clone() };
        let out = match numeric_assistance_objective(&v, &obj, &cfg) {
            Ok(o) => o,
            Err(e) => return report(3, "GLEMS assistance", t0, false, format!("{e}")),
        };
        let loc = marginal(&out.tau_opt, &[0]).unwrap();
        let nu_opt = loc.matrix().determinant().max(0.0).sqrt();
        let err = (nu_opt - nu_star).abs();
        worst_nu = worst_nu.max(err);
        pass &= err <= 2e-3;
        // angle grid: the maximum sits at zero within grid resolution
        let (k_x, k_p) = glems_correlations(&p).unwrap();
        let sf = StandardForm2Mode { a, b, k_x, k_p };
        let m0 = glems_m(0.0, &sf);
        for i in 0..200 {
            let theta = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * (i as f64) / 199.0;
            if glems_m(theta, &sf) > m0 + 1e-9 {
                pass = false;
            }
        }
    }
    report(
        3,
        "GLEMS assistance",
        t0,
        pass,
        format!("20 instances, worst local-eigenvalue err {worst_nu:.2e}; grid max at angle 0"),
    )
}

/// The variational upper bound dominates the oracle on 50 random two-mode
/// states for both profiles, is attained on multiples of the identity, and
/// the two-copy regularized estimate shows additivity there.
fn c4_upper_bound_and_additivity(seed: u64) -> CriterionReport {
    let t0 = Instant::now();
    let cfg = OptimizerConfig::default().with_seed(seed ^ 0x04);
    let part = Partition::bipartite(1, 1);
    let mut pass = true;
    let mut worst_violation = f64::NEG_INFINITY;
    for i in 0..50u64 {
        let v = random_qcm(2, seed.wrapping_mul(77).wrapping_add(i), 3.0);
        for f in [MonotoneF::entropy(), MonotoneF::renyi2()] {
            let bound = assist_upper_bound(&v, &part, &f).unwrap();
            let obj = AssistObjective::Entanglement {
                partition: part.clone(),
                monotone: f.clone(),
            };
            let out = match numeric_assistance_objective(&v, &obj, &cfg) {
                Ok(o) => o,
                Err(e) => {
                    return report(4, "variational bound and additivity", t0, false, format!("{e}"))
                }
            };
            let violation = out.value - bound;
            worst_violation = worst_violation.max(violation);
            pass &= violation <= 1e-6;
        }
    }
    let mut worst_single = 0.0f64;
    let mut worst_reg = 0.0f64;
    let heavy = OptimizerConfig::scaled_for(4).with_seed(seed ^ 0x44);
    for &k in &[1.5, 2.0, 5.0] {
        let v = Qcm::raw(DMatrix::identity(4, 4) * k, ModeLayout::xxpp(2));
        for f in [MonotoneF::entropy(), MonotoneF::renyi2()] {
            let expected = assist_thermal(k, 1, &f).unwrap();
            let obj = AssistObjective::Entanglement {
                partition: part.clone(),
                monotone: f.clone(),
            };
            let single = match numeric_assistance_objective(&v, &obj, &cfg) {
                Ok(o) => o.value,
                Err(e) => {
                    return report(4, "variational bound and additivity", t0, false, format!("{e}"))
                }
            };
            worst_single = worst_single.max((single - expected).abs());
            pass &= (single - expected).abs() <= 1e-3;
            let reg = match regularized_estimate(&v, &obj, 2, &heavy) {
                Ok(x) => x,
                Err(e) => {
                    return report(4, "variational bound and additivity", t0, false, format!("{e}"))
                }
            };
            worst_reg = worst_reg.max((reg - expected).abs());
            pass &= (reg - expected).abs() <= 2e-3;
            // regularization never loses value
            pass &= reg >= single - 1e-3;
        }
    }
    report(
        4,
        "variational bound and additivity",
        t0,
        pass,
        format!(
            "50x2 bound checks (worst slack violation {worst_violation:.2e}), \
             identity multiples worst single {worst_single:.2e}, two-copy {worst_reg:.2e}"
        ),
    )
}

/// Gaussian vs unrestricted gap on thermal states: constant `ln 2` at
/// large `k`, diverging ratio near the pure limit.
fn c5_gap_limits() -> CriterionReport {
    let t0 = Instant::now();
    let big = nongaussian_gap(100.0, 1).unwrap();
    let near = nongaussian_gap(1.001, 1).unwrap();
    let ln2 = std::f64::consts::LN_2;
    let pass = (big.diff - ln2).abs() <= 0.01 && near.ratio >= 100.0;
    report(
        5,
        "thermal-state gap limits",
        t0,
        pass,
        format!("diff(k=100) = {:.4} (ln 2 = {ln2:.4}), ratio(k=1.001) = {:.0}", big.diff, near.ratio),
    )
}

/// The two incomparable optimal strategies at `a = 2.25`.
fn c6_counterexample() -> CriterionReport {
    let t0 = Instant::now();
    let inst = match counterexample_instance(2.25) {
        Ok(i) => i,
        Err(e) => return report(6, "monotone-dependence instance", t0, false, format!("{e}")),
    };
    let d = &inst.diagnostics;
    let a_minus_b = inst.a - d.b;
    let pass = d.ordering_defect <= 1e-8
        && d.purity_defect <= 1e-8
        && (d.lambda2_tau1 - a_minus_b).abs() <= 1e-9
        && (a_minus_b - 1.588562).abs() <= 1e-6
        && (d.lambda2_tau2 - 2.0).abs() <= 1e-12
        && d.lambda2_tau1 < d.lambda2_tau2
        && d.conversion_blocked;
    report(
        6,
        "monotone-dependence instance",
        t0,
        pass,
        format!(
            "a-b = {a_minus_b:.6}, lambda2(tau1) = {:.6} < 2 = lambda2(tau2), \
             kappa_2: {:.6} vs {:.6}, defects <= 1e-8",
            d.lambda2_tau1, d.kappa2_tau1, d.kappa2_tau2
        ),
    )
}

struct Suite {
    name: &'static str,
    pass: bool,
    worst: f64,
}

/// Structural identities, 100 seeded instances each, 5-minute budget.
fn c7_structural(seed: u64) -> CriterionReport {
    let t0 = Instant::now();
    let mut suites: Vec<Suite> = Vec::new();

    // Williamson round trip at 1e-9
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let n = 1 + (i % 4) as usize;
        let v = random_qcm(n, seed.wrapping_add(10_000 + i), 4.0);
        let wil = v.williamson().unwrap();
        let err = rel_err(wil.reconstruct().matrix(), v.matrix());
        worst = worst.max(err);
        worst = worst.max(wil.s.defect());
    }
    suites.push(Suite { name: "williamson round trip", pass: worst <= 1e-9, worst });

    // symplectic-spectrum congruence invariance at 1e-8
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let n = 1 + (i % 3) as usize;
        let v = random_qcm(n, seed.wrapping_add(20_000 + i), 3.0);
        let s = random_symplectic(n, seed.wrapping_add(21_000 + i), 2.5);
        let conj = Qcm::raw(
            s.matrix() * v.matrix() * s.matrix().transpose(),
            ModeLayout::xxpp(n),
        );
        let a = v.symplectic_eigenvalues().unwrap();
        let b = conj.symplectic_eigenvalues().unwrap();
        for (x, y) in a.iter().zip(&b) {
            worst = worst.max((x - y).abs());
        }
    }
    suites.push(Suite { name: "spectrum congruence invariance", pass: worst <= 1e-8, worst });

    // symplectic-eigenvalue monotonicity under >=
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let n = 1 + (i % 3) as usize;
        let b = random_qcm(n, seed.wrapping_add(30_000 + i), 3.0);
        let bump = psd_bump(n, seed.wrapping_add(31_000 + i), 0.6);
        let a = Qcm::raw(b.matrix() + bump, ModeLayout::xxpp(n));
        let nb = b.symplectic_eigenvalues().unwrap();
        let na = a.symplectic_eigenvalues().unwrap();
        for (x, y) in na.iter().zip(&nb) {
            worst = worst.max(y - x); // requires nu_i(A) >= nu_i(B)
        }
    }
    suites.push(Suite { name: "symplectic eigenvalue monotonicity", pass: worst <= 1e-8, worst });

    // Schur complement monotonicity
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let mp = spd_matrix(6, seed.wrapping_add(40_000 + i));
        let m = &mp + psd_bump_dim(6, seed.wrapping_add(41_000 + i), 0.8);
        let keep = [0usize, 1, 2];
        let sa = schur_complement(&m, &keep).unwrap();
        let sb = schur_complement(&mp, &keep).unwrap();
        let slack = linalg::min_eigenvalue(&(sa - sb));
        worst = worst.max(-slack);
    }
    suites.push(Suite { name: "schur complement monotonicity", pass: worst <= 1e-8, worst });

    // F concavity / monotonicity midpoints
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let f = if i % 2 == 0 { MonotoneF::entropy() } else { MonotoneF::renyi2() };
        let b = random_qcm(2, seed.wrapping_add(50_000 + i), 2.5);
        let c = random_qcm(2, seed.wrapping_add(51_000 + i), 2.5);
        let fb = symplectic_extension_f(b.matrix(), &f).unwrap();
        let fc = symplectic_extension_f(c.matrix(), &f).unwrap();
        let mid = (b.matrix() + c.matrix()) * 0.5;
        let fm = symplectic_extension_f(&mid, &f).unwrap();
        worst = worst.max(0.5 * (fb + fc) - fm); // concavity defect
        let a = Qcm::raw(
            b.matrix() + psd_bump(2, seed.wrapping_add(52_000 + i), 0.5),
            ModeLayout::xxpp(2),
        );
        let fa = symplectic_extension_f(a.matrix(), &f).unwrap();
        worst = worst.max(fb - fa); // monotonicity defect
    }
    suites.push(Suite { name: "F concavity and monotonicity", pass: worst <= 1e-8, worst });

    // variational probe: every sample >= F(A), Williamson point closes the gap
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let f = if i % 2 == 0 { MonotoneF::entropy() } else { MonotoneF::renyi2() };
        let v = random_qcm(2, seed.wrapping_add(60_000 + i), 3.0);
        let probe =
            f_variational_probe(v.matrix(), &f, 50, seed.wrapping_add(61_000 + i)).unwrap();
        worst = worst.max(probe.f_value - probe.sampled_min); // must stay <= 0
        worst = worst.max(probe.equality_gap.abs());
    }
    suites.push(Suite { name: "variational probe floor and gap", pass: worst <= 1e-9, worst });

    // mtilde doubly superstochastic
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let n = 1 + (i % 3) as usize;
        let m = random_symplectic(n, seed.wrapping_add(70_000 + i), 3.0);
        let mt = mtilde(&m);
        for r in 0..n {
            let mut row = 0.0;
            let mut col = 0.0;
            for c in 0..n {
                worst = worst.max(-mt[(r, c)]); // nonnegativity
                row += mt[(r, c)];
                col += mt[(c, r)];
            }
            worst = worst.max(1.0 - row);
            worst = worst.max(1.0 - col);
        }
    }
    suites.push(Suite { name: "mtilde doubly superstochastic", pass: worst <= 1e-10, worst });

    // pure lower bound certificates at 1e-8
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let n = 1 + (i % 3) as usize;
        let v = random_qcm(n, seed.wrapping_add(80_000 + i), 3.0);
        let (_, vecs) = linalg::sym_eig_sorted(v.matrix());
        let cert = pure_lower_bound(&v, &vecs.column(0).clone_owned()).unwrap();
        let (order, eig, purity) = cert.defects(&v).unwrap();
        worst = worst.max(order).max(eig).max(purity);
    }
    suites.push(Suite { name: "pure lower bound certificates", pass: worst <= 1e-8, worst });

    // purify: purity at 1e-7, marginal at 1e-8
    let mut worst_purity = 0.0f64;
    let mut worst_marginal = 0.0f64;
    for i in 0..100u64 {
        let n = 1 + (i % 3) as usize;
        let v = random_qcm(n, seed.wrapping_add(90_000 + i), 3.0);
        let p = purify(&v).unwrap();
        worst_purity = worst_purity.max(p.purity_defect().unwrap());
        let modes: Vec<usize> = (0..n).collect();
        let back = marginal(&p, &modes).unwrap();
        worst_marginal = worst_marginal.max(linalg::max_abs(&(back.matrix() - v.matrix())));
    }
    suites.push(Suite {
        name: "purification purity",
        pass: worst_purity <= 1e-7,
        worst: worst_purity,
    });
    suites.push(Suite {
        name: "purification marginal",
        pass: worst_marginal <= 1e-8,
        worst: worst_marginal,
    });

    let secs = t0.elapsed().as_secs_f64();
    let mut pass = secs <= 300.0;
    let mut detail = String::new();
    for s in &suites {
        pass &= s.pass;
        detail.push_str(&format!(
            "{}={} ({:.1e}); ",
            s.name,
            if s.pass { "ok" } else { "FAIL" },
            s.worst
        ));
    }
    detail.push_str("budget 300s");
    report(7, "structural suites (100 instances each)", t0, pass, detail)
}

fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    linalg::max_abs(&(a - b)) / linalg::max_abs(b).max(1.0)
}

fn psd_bump(n_modes: usize, seed: u64, scale: f64) -> DMatrix<f64> {
    psd_bump_dim(2 * n_modes, seed, scale)
}

fn psd_bump_dim(dim: usize, seed: u64, scale: f64) -> DMatrix<f64> {
    let mut r = rng::seeded(seed);
    let g = DMatrix::from_fn(dim, dim, |_, _| rng::normal(&mut r));
    (&g * g.transpose()) * (scale / dim as f64)
}

fn spd_matrix(dim: usize, seed: u64) -> DMatrix<f64> {
    psd_bump_dim(dim, seed, 1.0) + DMatrix::identity(dim, dim) * 0.5
}

/// Ordinary eigenvalue monotonicity under the PSD order; the workhorse
/// behind the assisted-squeezing theorem.
pub fn weyl_monotonicity_check(seed: u64, instances: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..instances as u64 {
        let b = spd_matrix(4, seed.wrapping_add(i));
        let a = &b + psd_bump_dim(4, seed.wrapping_add(1000 + i), 0.7);
        let ea = linalg::sym_eigenvalues(&a);
        let eb = linalg::sym_eigenvalues(&b);
        for (x, y) in ea.iter().zip(&eb) {
            worst = worst.max(y - x);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_and_counterexample_criteria_pass_quickly() {
        assert!(c5_gap_limits().pass);
        let c6 = c6_counterexample();
        assert!(c6.pass, "{}", c6.detail);
    }

    #[test]
    fn weyl_monotonicity_holds() {
        assert!(weyl_monotonicity_check(5, 100) <= 1e-10);
    }
}
