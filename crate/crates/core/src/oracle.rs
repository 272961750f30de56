//! Independent numerical verification: derivative-free maximization of
//! resource monotones over pure states `tau <= V` and over pure
//! measurement seeds, plus finite-copy regularized estimates.
//!
//! The optimizer never consults the closed forms it is used to check: it
//! searches a chart of the pure-state manifold with a penalized
//! multi-start simplex method and reports values only from certified
//! feasible points, so every result is a true lower bound on the supremum.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use crate::entanglement::MonotoneF;
use crate::error::{Error, Result};
use crate::gaussian::{
    marginal, measurement_update, tensor_copies, MeasurementSeed, Partition,
};
use crate::layout::ModeLayout;
use crate::linalg;
use crate::rng;
use crate::symplectic::{embed_unitary, Qcm, DEFAULT_VALIDITY_TOL};

/// Restart budget, tolerances and seeding for the variational oracle.
/// Identical configs on identical inputs give bit-identical results.
#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    /// Independent restarts (first ones are structured seeds, rest random).
    pub restarts: usize,
    /// Simplex iteration budget per restart (split across refinement stages).
    pub max_iters: usize,
    /// Weight of the quadratic penalty on ordering violations.
    pub penalty_weight: f64,
    /// Feasibility certification threshold on `lambda_min(V - tau)`.
    pub constraint_tol: f64,
    /// Simplex convergence tolerance on objective spread.
    pub value_tol: f64,
    pub rng_seed: u64,
}

impl Default for OptimizerConfig {
    /// Defaults sized for systems up to 2 modes. For 3-4 total modes raise
    /// `restarts` to ~96 and `max_iters` to ~8000 (see `scaled_for`).
    fn default() -> Self {
        OptimizerConfig {
            restarts: 64,
            max_iters: 2000,
            penalty_weight: 1e6,
            constraint_tol: 1e-7,
            value_tol: 1e-9,
            rng_seed: 7,
        }
    }
}

impl OptimizerConfig {
    /// Budget guidance by total mode count: defaults up to 2 modes, a
    /// heavier budget for 3-4.
    pub fn scaled_for(n_modes: usize) -> Self {
        let mut cfg = OptimizerConfig::default();
        if n_modes >= 3 {
            cfg.restarts = 96;
            cfg.max_iters = 8000;
        }
        cfg
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }
}

/// Per-restart best value and its feasibility slack.
#[derive(Debug, Clone, Copy)]
pub struct RestartTrace {
    pub restart: usize,
    /// Best certified-feasible value of the restart; `-inf` when the
    /// restart failed to recover a feasible point.
    pub value: f64,
    pub feasibility: f64,
}

/// Oracle output: a certified lower bound on the supremum.
#[derive(Debug, Clone)]
pub struct OptResult {
    pub value: f64,
    /// The optimizing pure state (the pure seed, for the seed oracle).
    pub tau_opt: Qcm,
    /// `lambda_min(V - tau_opt)`; `>= -constraint_tol` always.
    pub feasibility: f64,
    pub trace: Vec<RestartTrace>,
}

/// Chart dimension over `n` modes: `n^2` orthogonal-symplectic angles plus
/// `n` log-squeezings.
pub fn chart_dim(n_modes: usize) -> usize {
    n_modes * n_modes + n_modes
}

/// Chart of the pure-state manifold: `tau = K (Z^2 ⊕ Z^{-2}) K^T` with `K`
/// the unitary embedding of `exp(iH)` and `z_j = exp(r_j)`. The zero
/// vector maps to the vacuum; the chart is onto the pure states.
pub fn parameterize_pure(params: &[f64], n_modes: usize) -> Result<Qcm> {
    if params.len() != chart_dim(n_modes) {
        return Err(Error::ShapeMismatch {
            expected: format!("{} chart parameters", chart_dim(n_modes)),
            got: format!("{}", params.len()),
        });
    }
    Ok(Qcm::raw(chart_matrix(params, n_modes), ModeLayout::xxpp(n_modes)))
}

fn chart_matrix(params: &[f64], n: usize) -> DMatrix<f64> {
    let k = orthogonal_symplectic_from(&params[..n * n], n);
    let r = &params[n * n..];
    let mut d = DVector::zeros(2 * n);
    for j in 0..n {
        let e = (2.0 * r[j]).exp();
        d[j] = e;
        d[n + j] = 1.0 / e;
    }
    let kd = &k * DMatrix::from_diagonal(&d);
    kd * k.transpose()
}

/// Exponential chart of the orthogonal symplectic group through `U(n)`:
/// `n` diagonal angles plus `n(n-1)/2` complex off-diagonal entries of a
/// Hermitian generator.
fn orthogonal_symplectic_from(p: &[f64], n: usize) -> DMatrix<f64> {
    let mut h = DMatrix::from_element(n, n, Complex::new(0.0, 0.0));
    let mut idx = 0;
    for i in 0..n {
        h[(i, i)] = Complex::new(p[idx], 0.0);
        idx += 1;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let c = Complex::new(p[idx], p[idx + 1]);
            idx += 2;
            h[(i, j)] = c;
            h[(j, i)] = c.conj();
        }
    }
    debug_assert_eq!(idx, n * n);
    let eig = h.symmetric_eigen();
    let phases: Vec<Complex<f64>> = eig
        .eigenvalues
        .iter()
        .map(|&lam| Complex::new(lam.cos(), lam.sin()))
        .collect();
    let w = &eig.eigenvectors;
    let mut u = DMatrix::from_element(n, n, Complex::new(0.0, 0.0));
    for a in 0..n {
        for b in 0..n {
            let mut acc = Complex::new(0.0, 0.0);
            for k in 0..n {
                acc += w[(a, k)] * phases[k] * w[(b, k)].conj();
            }
            u[(a, b)] = acc;
        }
    }
    embed_unitary(&u)
}

/// Named objectives for the assisted-concentration oracles.
#[derive(Debug, Clone)]
pub enum AssistObjective {
    /// Largest ordinary eigenvalue.
    LambdaMax,
    /// Maximal squeezing `max{1, 1/lambda_min}`.
    MaxSqueezing,
    /// `Σ f(nu_j)` over the local symplectic spectrum of one party.
    Entanglement { partition: Partition, monotone: MonotoneF },
}

impl AssistObjective {
    pub fn evaluate(&self, tau: &Qcm) -> Result<f64> {
        match self {
            AssistObjective::LambdaMax => Ok(tau.max_eigenvalue()),
            AssistObjective::MaxSqueezing => Ok((1.0 / tau.min_eigenvalue()).max(1.0)),
            AssistObjective::Entanglement { partition, monotone } => {
                let side =
                    if partition.group(0).len() <= partition.group(1).len() { 0 } else { 1 };
                let local = marginal(tau, partition.group(side))?;
                let mut acc = 0.0;
                for nu in local.symplectic_eigenvalues()? {
                    acc += monotone.eval(nu)?;
                }
                Ok(acc)
            }
        }
    }

    /// The same objective on `ell` stacked copies of the system.
    pub fn stacked(&self, ell: usize) -> AssistObjective {
        match self {
            AssistObjective::Entanglement { partition, monotone } => {
                AssistObjective::Entanglement {
                    partition: partition.stacked_copies(ell),
                    monotone: monotone.clone(),
                }
            }
            other => other.clone(),
        }
    }
}

struct RestartOutcome {
    value: f64,
    params: Vec<f64>,
    slack: f64,
}

/// Maximize a continuous monotone over pure `tau <= V` by penalized
/// multi-start simplex search. The reported value comes from a certified
/// feasible point (`lambda_min(V - tau) >= -constraint_tol`), so it lower
/// bounds the supremum up to that tolerance.
pub fn numeric_assistance(
    v: &Qcm,
    objective: &(impl Fn(&Qcm) -> Result<f64> + Sync),
    cfg: &OptimizerConfig,
) -> Result<OptResult> {
    let vx = v.to_xxpp();
    let (ok, witness) = vx.validity(DEFAULT_VALIDITY_TOL)?;
    if !ok {
        return Err(Error::InvalidQcm { min_nu: witness });
    }
    let n = vx.n_modes();
    let dim = chart_dim(n);
    let wil = vx.williamson()?;
    // Frame: tau(params) = G chart(params) G^T with G the Williamson
    // factor, so the chart origin is the always-feasible pure factor SS^T.
    let frame = wil.s.to_xxpp().matrix().clone();
    let frame_t = frame.transpose();
    let v_mat = vx.matrix().clone();

    let tau_of = |params: &[f64]| -> DMatrix<f64> {
        let c = chart_matrix(params, n);
        &frame * c * &frame_t
    };
    let slack_of = |tau: &DMatrix<f64>| -> f64 { linalg::min_eigenvalue(&(&v_mat - tau)) };
    let value_of = |tau: DMatrix<f64>| -> f64 {
        match objective(&Qcm::raw(tau, ModeLayout::xxpp(n))) {
            Ok(x) if x.is_finite() => x,
            _ => f64::NEG_INFINITY,
        }
    };

    let seeds = restart_seeds(cfg, n, dim, &wil.nu, vx.max_eigenvalue());

    let outcomes: Vec<Option<RestartOutcome>> = seeds
        .into_par_iter()
        .map(|start| run_restart(&start, cfg, &tau_of, &slack_of, &value_of))
        .collect();

    let mut trace = Vec::with_capacity(outcomes.len());
    let mut best: Option<(usize, &RestartOutcome)> = None;
    for (i, out) in outcomes.iter().enumerate() {
        match out {
            Some(o) => {
                trace.push(RestartTrace { restart: i, value: o.value, feasibility: o.slack });
                if best.map_or(true, |(_, b)| o.value > b.value) {
                    best = Some((i, o));
                }
            }
            None => trace.push(RestartTrace {
                restart: i,
                value: f64::NEG_INFINITY,
                feasibility: f64::NEG_INFINITY,
            }),
        }
    }
    let (_, winner) = best.ok_or_else(|| {
        Error::Infeasible("no restart recovered a feasible point".into())
    })?;

    // Deterministic polish of the single winner with a finer simplex.
    let polished = polish_restart(&winner.params, cfg, &tau_of, &slack_of, &value_of);
    let final_pt = match polished {
        Some(p) if p.value > winner.value => p,
        _ => RestartOutcome {
            value: winner.value,
            params: winner.params.clone(),
            slack: winner.slack,
        },
    };

    let tau_mat = tau_of(&final_pt.params);
    let feasibility = slack_of(&tau_mat);
    Ok(OptResult {
        value: final_pt.value,
        tau_opt: Qcm::raw(tau_mat, ModeLayout::xxpp(n)),
        feasibility,
        trace,
    })
}

/// Convenience wrapper for the named objectives.
pub fn numeric_assistance_objective(
    v: &Qcm,
    objective: &AssistObjective,
    cfg: &OptimizerConfig,
) -> Result<OptResult> {
    numeric_assistance(v, &|tau: &Qcm| objective.evaluate(tau), cfg)
}

fn restart_seeds(
    cfg: &OptimizerConfig,
    n: usize,
    dim: usize,
    nu: &[f64],
    lambda_max: f64,
) -> Vec<Vec<f64>> {
    let mut seeds = Vec::with_capacity(cfg.restarts);
    // (i) the chart origin: the Williamson pure factor
    seeds.push(vec![0.0; dim]);
    // (ii) Williamson-aligned squeezers
    if seeds.len() < cfg.restarts {
        let mut s = vec![0.0; dim];
        for j in 0..n {
            s[n * n + j] = 0.5 * nu[j].ln();
        }
        seeds.push(s);
    }
    if seeds.len() < cfg.restarts {
        let mut s = vec![0.0; dim];
        for j in 0..n {
            s[n * n + j] = -0.5 * nu[j].ln();
        }
        seeds.push(s);
    }
    // (iii) random draws
    let r_max = 0.5 * lambda_max.max(1.0).ln() + 0.3;
    let mut idx = seeds.len() as u64;
    while seeds.len() < cfg.restarts {
        let mut r = rng::derived(cfg.rng_seed, idx);
        idx += 1;
        let mut s = vec![0.0; dim];
        for val in s.iter_mut().take(n * n) {
            *val = 0.7 * rng::normal(&mut r);
        }
        for val in s.iter_mut().skip(n * n) {
            *val = r.random_range(-r_max..r_max);
        }
        seeds.push(s);
    }
    seeds
}

fn run_restart(
    start: &[f64],
    cfg: &OptimizerConfig,
    tau_of: &impl Fn(&[f64]) -> DMatrix<f64>,
    slack_of: &impl Fn(&DMatrix<f64>) -> f64,
    value_of: &impl Fn(DMatrix<f64>) -> f64,
) -> Option<RestartOutcome> {
    let mut best_feasible: Option<(f64, Vec<f64>, f64)> = None;
    let stage_iters = (cfg.max_iters / 3).max(50);
    let mut x = start.to_vec();
    for step in [0.4, 0.08, 0.016] {
        let mut penalized = |p: &[f64]| -> f64 {
            let tau = tau_of(p);
            let slack = slack_of(&tau);
            let val = value_of(tau);
            if !val.is_finite() {
                return f64::INFINITY;
            }
            if slack >= -cfg.constraint_tol {
                match &mut best_feasible {
                    Some((bv, bp, bs)) if val > *bv => {
                        *bv = val;
                        bp.copy_from_slice(p);
                        *bs = slack;
                    }
                    None => best_feasible = Some((val, p.to_vec(), slack)),
                    _ => {}
                }
            }
            -val + cfg.penalty_weight * (-slack).max(0.0).powi(2)
        };
        let (nx, _) = nelder_mead(&mut penalized, &x, step, stage_iters, cfg.value_tol);
        x = nx;
    }
    // Project the simplex end point back to feasibility by shrinking the
    // chart vector toward the feasible origin.
    if let Some((val, params, slack)) = project_feasible(&x, cfg, tau_of, slack_of, value_of) {
        match &best_feasible {
            Some((bv, _, _)) if *bv >= val => {}
            _ => best_feasible = Some((val, params, slack)),
        }
    }
    best_feasible.map(|(value, params, slack)| RestartOutcome { value, params, slack })
}

fn polish_restart(
    start: &[f64],
    cfg: &OptimizerConfig,
    tau_of: &impl Fn(&[f64]) -> DMatrix<f64>,
    slack_of: &impl Fn(&DMatrix<f64>) -> f64,
    value_of: &impl Fn(DMatrix<f64>) -> f64,
) -> Option<RestartOutcome> {
    let mut best_feasible: Option<(f64, Vec<f64>, f64)> = None;
    let mut x = start.to_vec();
    for step in [0.01, 0.002] {
        let mut penalized = |p: &[f64]| -> f64 {
            let tau = tau_of(p);
            let slack = slack_of(&tau);
            let val = value_of(tau);
            if !val.is_finite() {
                return f64::INFINITY;
            }
            if slack >= -cfg.constraint_tol {
                match &mut best_feasible {
                    Some((bv, bp, bs)) if val > *bv => {
                        *bv = val;
                        bp.copy_from_slice(p);
                        *bs = slack;
                    }
                    None => best_feasible = Some((val, p.to_vec(), slack)),
                    _ => {}
                }
            }
            -val + cfg.penalty_weight * (-slack).max(0.0).powi(2)
        };
        let (nx, _) = nelder_mead(&mut penalized, &x, step, cfg.max_iters, cfg.value_tol);
        x = nx;
    }
    if let Some((val, params, slack)) = project_feasible(&x, cfg, tau_of, slack_of, value_of) {
        match &best_feasible {
            Some((bv, _, _)) if *bv >= val => {}
            _ => best_feasible = Some((val, params, slack)),
        }
    }
    best_feasible.map(|(value, params, slack)| RestartOutcome { value, params, slack })
}

/// Shrink the chart vector toward the origin (the feasible Williamson
/// point) until the ordering constraint certifies.
fn project_feasible(
    x: &[f64],
    cfg: &OptimizerConfig,
    tau_of: &impl Fn(&[f64]) -> DMatrix<f64>,
    slack_of: &impl Fn(&DMatrix<f64>) -> f64,
    value_of: &impl Fn(DMatrix<f64>) -> f64,
) -> Option<(f64, Vec<f64>, f64)> {
    let target = -0.5 * cfg.constraint_tol;
    let feasible_at = |t: f64| -> (Vec<f64>, f64) {
        let p: Vec<f64> = x.iter().map(|v| v * t).collect();
        let slack = slack_of(&tau_of(&p));
        (p, slack)
    };
    let (p1, s1) = feasible_at(1.0);
    if s1 >= target {
        let val = value_of(tau_of(&p1));
        return val.is_finite().then_some((val, p1, s1));
    }
    let (_, s0) = feasible_at(0.0);
    if s0 < target {
        return None;
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let (_, s) = feasible_at(mid);
        if s >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (p, s) = feasible_at(lo);
    let val = value_of(tau_of(&p));
    val.is_finite().then_some((val, p, s))
}

/// Maximize the objective of the post-measurement state over pure seeds on
/// the measured party. For pure joint states this agrees with
/// [`numeric_assistance`]. `tau_opt` holds the optimal seed;
/// `feasibility` is 0 (every pure seed is admissible).
pub fn numeric_one_way_seed(
    v_ab: &Qcm,
    part: &Partition,
    measured: usize,
    objective: &(impl Fn(&Qcm) -> Result<f64> + Sync),
    cfg: &OptimizerConfig,
) -> Result<OptResult> {
    let vx = v_ab.to_xxpp();
    let (ok, witness) = vx.validity(DEFAULT_VALIDITY_TOL)?;
    if !ok {
        return Err(Error::InvalidQcm { min_nu: witness });
    }
    if measured >= part.n_groups() {
        return Err(Error::IndexOutOfRange(format!("party {measured}")));
    }
    let n_b = part.group(measured).len();
    let dim = chart_dim(n_b);

    let value_of = |params: &[f64]| -> f64 {
        let gamma = Qcm::raw(chart_matrix(params, n_b), ModeLayout::xxpp(n_b));
        let seed = MeasurementSeed::pure_unchecked(gamma);
        match measurement_update(&vx, part, measured, &seed) {
            Ok(post) => match objective(&post) {
                Ok(x) if x.is_finite() => x,
                _ => f64::NEG_INFINITY,
            },
            Err(_) => f64::NEG_INFINITY,
        }
    };

    let seeds = seed_chart_starts(cfg, n_b, dim);
    let stage_iters = (cfg.max_iters / 3).max(50);
    let outcomes: Vec<RestartOutcome> = seeds
        .into_par_iter()
        .map(|start| {
            let mut x = start;
            let mut best = (value_of(&x), x.clone());
            for step in [0.4, 0.08, 0.016] {
                let mut neg = |p: &[f64]| -> f64 {
                    let v = value_of(p);
                    if v > best.0 {
                        best = (v, p.to_vec());
                    }
                    -v
                };
                let (nx, _) = nelder_mead(&mut neg, &x, step, stage_iters, cfg.value_tol);
                x = nx;
            }
            RestartOutcome { value: best.0, params: best.1, slack: 0.0 }
        })
        .collect();

    let mut trace = Vec::with_capacity(outcomes.len());
    let mut best: Option<&RestartOutcome> = None;
    for (i, o) in outcomes.iter().enumerate() {
        trace.push(RestartTrace { restart: i, value: o.value, feasibility: o.slack });
        if best.map_or(true, |b| o.value > b.value) {
            best = Some(o);
        }
    }
    let winner = best.ok_or_else(|| Error::Infeasible("no restarts configured".into()))?;
    if !winner.value.is_finite() {
        return Err(Error::Infeasible("seed search produced no finite value".into()));
    }
    let gamma = Qcm::raw(chart_matrix(&winner.params, n_b), ModeLayout::xxpp(n_b));
    Ok(OptResult { value: winner.value, tau_opt: gamma, feasibility: 0.0, trace })
}

fn seed_chart_starts(cfg: &OptimizerConfig, n: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut seeds = Vec::with_capacity(cfg.restarts);
    seeds.push(vec![0.0; dim]); // heterodyne
    let mut idx = 1u64;
    while seeds.len() < cfg.restarts {
        let mut r = rng::derived(cfg.rng_seed ^ 0x5eed, idx);
        idx += 1;
        let mut s = vec![0.0; dim];
        for val in s.iter_mut().take(n * n) {
            *val = 0.7 * rng::normal(&mut r);
        }
        for val in s.iter_mut().skip(n * n) {
            *val = r.random_range(-2.0..2.0);
        }
        seeds.push(s);
    }
    seeds
}

/// Finite-copy regularized estimate `(1/ell) * assistance(V^{⊕ell})` with
/// the partition stacked per copy. Desk scale supports `ell` in {1, 2}.
pub fn regularized_estimate(
    v: &Qcm,
    objective: &AssistObjective,
    ell: usize,
    cfg: &OptimizerConfig,
) -> Result<f64> {
    match ell {
        1 => Ok(numeric_assistance_objective(v, objective, cfg)?.value),
        2 => {
            let doubled = tensor_copies(v, 2);
            let obj = objective.stacked(2);
            Ok(numeric_assistance_objective(&doubled, &obj, cfg)?.value / 2.0)
        }
        other => Err(Error::UnsupportedCopies(other)),
    }
}

/// Plain Nelder-Mead minimization with an axis-aligned initial simplex.
/// Deterministic; returns the best vertex.
fn nelder_mead(
    f: &mut impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    max_iters: usize,
    ftol: f64,
) -> (Vec<f64>, f64) {
    let d = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..d {
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    for _ in 0..max_iters {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let best = simplex[0].1;
        let worst = simplex[d].1;
        if (worst - best).abs() <= ftol * (1.0 + best.abs()) {
            break;
        }
        // centroid of all but the worst
        let mut centroid = vec![0.0; d];
        for (x, _) in simplex.iter().take(d) {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / d as f64;
            }
        }
        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&simplex[d].0)
            .map(|(c, w)| c + alpha * (c - w))
            .collect();
        let fr = f(&reflect);
        if fr < simplex[0].1 {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&reflect)
                .map(|(c, r)| c + gamma * (r - c))
                .collect();
            let fe = f(&expand);
            simplex[d] = if fe < fr { (expand, fe) } else { (reflect, fr) };
            continue;
        }
        if fr < simplex[d - 1].1 {
            simplex[d] = (reflect, fr);
            continue;
        }
        let contract: Vec<f64> = centroid
            .iter()
            .zip(&simplex[d].0)
            .map(|(c, w)| c + rho * (w - c))
            .collect();
        let fc = f(&contract);
        if fc < simplex[d].1 {
            simplex[d] = (contract, fc);
            continue;
        }
        // shrink toward the best vertex
        let best_x = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = best_x
                .iter()
                .zip(&entry.0)
                .map(|(b, xi)| b + sigma * (xi - b))
                .collect();
            let fx = f(&x);
            *entry = (x, fx);
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    let (x, fx) = simplex.swap_remove(0);
    (x, fx)
}
