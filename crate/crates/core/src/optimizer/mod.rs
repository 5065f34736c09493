//! Numerical minimization of the Reid product over local symplectics.
//!
//! The search runs over the `(u_A, v_A, u_B, v_B)` chart with `w_A = w_B = 1`.
//! Dropping `w` loses nothing: `S(u, v, w) = diag(1/w, w) · S(u, v, 1)`, and a
//! diagonal rescaling of Alice's quadratures is absorbed by the linear
//! estimator while on Bob's side it multiplies the two inference variances by
//! `1/w²` and `w²`. [`sweep_w_invariance`] checks this numerically.
//!
//! Restarts are independent and run on the rayon pool. Their results are
//! merged by value, ties going to the lower start index, so the outcome does
//! not depend on scheduling.

mod nelder_mead;

pub use nelder_mead::{NelderMead, SimplexOutcome};

use nalgebra::{Matrix2, Matrix4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{apply_local, CovMatrix, LocalSymplectic, SymplecticParams};
use crate::linalg::direct_sum;
use crate::report::sig12;
use crate::steering::{det_schur_complement_b, optimal_params, reid_product, reid_product_raw};

pub const DEFAULT_RESTARTS: usize = 16;
/// Random starts are uniform in `[-SEARCH_BOX, SEARCH_BOX]⁴`.
pub const SEARCH_BOX: f64 = 2.0;
/// Distance from `uv = 1` inside which the objective is `+∞`.
pub const CHART_GUARD: f64 = 1e-6;
/// Agreement with `det M_σ^B` that counts as converged.
pub const CONVERGENCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Number of seeded random starts.
    pub restarts: usize,
    pub seed: u64,
    pub search_box: f64,
    /// Also start from the closed-form minimizer.
    pub analytic_start: bool,
    pub simplex: NelderMead,
}

impl OptimizerConfig {
    pub fn new(restarts: usize, seed: u64) -> Self {
        Self {
            restarts,
            seed,
            search_box: SEARCH_BOX,
            analytic_start: true,
            simplex: NelderMead::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    #[serde(serialize_with = "sig12")]
    pub min_value: f64,
    /// `(params_A, params_B)` at the minimum, `w = 1`.
    pub argmin: (SymplecticParams, SymplecticParams),
    /// Simplex iterations summed over all starts.
    pub iterations: usize,
    /// Number of starts run, including the closed-form one.
    pub restarts_used: usize,
    pub converged: bool,
    /// Closed-form minimum `det M_σ^B`.
    #[serde(serialize_with = "sig12")]
    pub det_m_b: f64,
    /// `|min_value - det M_σ^B|`.
    #[serde(serialize_with = "sig12")]
    pub gap: f64,
}

impl OptimizationResult {
    pub fn argmin_transform(&self) -> LocalSymplectic {
        LocalSymplectic::from_params(&self.argmin.0, &self.argmin.1)
            .expect("argmin lies inside the chart")
    }
}

fn chart(u: f64, v: f64) -> Option<Matrix2<f64>> {
    let d = 1.0 - u * v;
    if d.abs() < CHART_GUARD {
        return None;
    }
    Some(Matrix2::new(1.0 / d, v / d, u, 1.0))
}

/// Reid product of `S σ Sᵀ` with `S` given by chart coordinates (`w = 1`).
pub fn reid_objective(cm: &Matrix4<f64>, x: &[f64; 4]) -> f64 {
    let (Some(s_a), Some(s_b)) = (chart(x[0], x[1]), chart(x[2], x[3])) else {
        return f64::INFINITY;
    };
    let s = direct_sum(&s_a, &s_b);
    reid_product_raw(&(s * cm * s.transpose())).unwrap_or(f64::INFINITY)
}

/// Chart coordinates (`w = 1`) of a closed-form minimizer expressed in the
/// basis of `cm`, i.e. the optimal transform composed with the reduction of
/// `cm` to standard form.
pub fn analytic_start(cm: &CovMatrix) -> Option<[f64; 4]> {
    let (sf, to_sf) = cm.to_standard_form();
    for v_b in [0.0, 0.5, -0.5, 1.0] {
        let Ok((pa, pb)) = optimal_params(&sf, v_b, 1.0, 1.0) else {
            continue;
        };
        let Ok(opt) = LocalSymplectic::from_params(&pa, &pb) else {
            continue;
        };
        let total = opt.compose(&to_sf);
        if let (Some(a), Some(b)) = (
            SymplecticParams::from_matrix(total.s_a()),
            SymplecticParams::from_matrix(total.s_b()),
        ) {
            let x = [a.u, a.v, b.u, b.v];
            if x.iter().all(|c| c.is_finite()) && reid_objective(cm.matrix(), &x).is_finite() {
                return Some(x);
            }
        }
    }
    None
}

/// Minimizes the Reid product over local Gaussian unitaries with the default
/// configuration plus `restarts` random starts.
pub fn minimize_reid(cm: &CovMatrix, restarts: usize, seed: u64) -> Result<OptimizationResult> {
    minimize_reid_with(cm, &OptimizerConfig::new(restarts, seed))
}

pub fn minimize_reid_with(cm: &CovMatrix, config: &OptimizerConfig) -> Result<OptimizationResult> {
    let det_m_b = det_schur_complement_b(cm)?;

    let mut starts: Vec<[f64; 4]> = Vec::with_capacity(config.restarts + 1);
    if config.analytic_start {
        starts.extend(analytic_start(cm));
    }
    let half = config.search_box;
    starts.extend((0..config.restarts).map(|i| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(i as u64));
        std::array::from_fn(|_| rng.random_range(-half..=half))
    }));
    if starts.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one start is required".into(),
        ));
    }

    let m = *cm.matrix();
    let outcomes: Vec<SimplexOutcome<4>> = starts
        .par_iter()
        .map(|x0| config.simplex.minimize(|x| reid_objective(&m, x), *x0))
        .collect();

    let iterations = outcomes.iter().map(|o| o.iterations).sum();
    let best = outcomes
        .iter()
        .reduce(|best, o| if o.value < best.value { o } else { best })
        .expect("non-empty");

    let gap = (best.value - det_m_b).abs();
    let converged = best.value.is_finite()
        && (gap <= CONVERGENCE_TOL || best.diameter < config.simplex.diameter_tol);
    if !converged {
        return Err(Error::NoConvergence {
            best_value: best.value,
            target: det_m_b,
        });
    }
    let x = best.x;
    Ok(OptimizationResult {
        min_value: best.value,
        argmin: (
            SymplecticParams {
                u: x[0],
                v: x[1],
                w: 1.0,
            },
            SymplecticParams {
                u: x[2],
                v: x[3],
                w: 1.0,
            },
        ),
        iterations,
        restarts_used: starts.len(),
        converged,
        det_m_b,
        gap,
    })
}

/// Lower bound on the steering measure from Gaussian local unitaries:
/// `max{0, -½ ln F}` with `F` the optimized Reid product.
pub fn estimate_steering_lower(cm: &CovMatrix, restarts: usize, seed: u64) -> Result<f64> {
    let res = minimize_reid(cm, restarts, seed)?;
    Ok((-0.5 * res.min_value.ln()).max(0.0))
}

/// Largest deviation `|Reid(optimal params with w) - det M_σ^B|` over a grid
/// of `(w_A, w_B)`, evaluated on the standard form of `cm`.
pub fn sweep_w_invariance(cm: &CovMatrix, grid: &[(f64, f64)], v_b: f64) -> Result<f64> {
    let (sf, _) = cm.to_standard_form();
    let base = sf.to_cov_matrix();
    let target = det_schur_complement_b(cm)?;
    grid.iter().try_fold(0.0_f64, |worst, &(w_a, w_b)| {
        let (pa, pb) = optimal_params(&sf, v_b, w_a, w_b)?;
        let s = LocalSymplectic::from_params(&pa, &pb)?;
        let value = reid_product(&apply_local(&base, &s))?;
        Ok(worst.max((value - target).abs()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{random_cm, tmsv};
    use approx::assert_relative_eq;

    #[test]
    fn vacuum_minimum_is_one() {
        let res = minimize_reid(&CovMatrix::vacuum(), 4, 1).unwrap();
        assert_relative_eq!(res.min_value, 1.0, epsilon = 1e-9);
        assert!(res.converged);
    }

    #[test]
    fn tmsv_minimum_is_sech_squared() {
        let res = minimize_reid(&tmsv(1.0).unwrap().cm, DEFAULT_RESTARTS, 42).unwrap();
        let sech2 = 1.0 / 2.0_f64.cosh().powi(2);
        assert_relative_eq!(res.min_value, sech2, epsilon = 1e-6);
        assert_relative_eq!(sech2, 0.07065, epsilon = 1e-5);
    }

    #[test]
    fn argmin_reproduces_value() {
        let cm = random_cm(5, 3.0).unwrap().cm;
        let res = minimize_reid(&cm, 8, 9).unwrap();
        let again = reid_product(&apply_local(&cm, &res.argmin_transform())).unwrap();
        assert_relative_eq!(again, res.min_value, max_relative = 1e-10);
        assert!(res.min_value >= res.det_m_b - 1e-6);
    }

    #[test]
    fn analytic_start_is_stationary() {
        for seed in 0..20 {
            let cm = random_cm(seed, 4.0).unwrap().cm;
            let x0 = analytic_start(&cm).expect("representable");
            let target = det_schur_complement_b(&cm).unwrap();
            assert_relative_eq!(
                reid_objective(cm.matrix(), &x0),
                target,
                max_relative = 1e-9
            );
            let out = NelderMead::default().minimize(|x| reid_objective(cm.matrix(), x), x0);
            // The minimum is a valley, so the simplex may slide along it.
            assert_relative_eq!(out.value, target, max_relative = 1e-10);
            assert!(
                out.iterations < 200,
                "seed {seed}: {} iterations",
                out.iterations
            );
        }
    }

    #[test]
    fn random_starts_alone_find_closed_form_minimum() {
        for seed in 0..20 {
            let cm = random_cm(1000 + seed, 3.0).unwrap().cm;
            let cfg = OptimizerConfig {
                analytic_start: false,
                ..OptimizerConfig::new(DEFAULT_RESTARTS, seed)
            };
            let res = minimize_reid_with(&cm, &cfg).unwrap();
            assert!(res.gap < CONVERGENCE_TOL, "seed {seed}: {res:?}");
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let cm = random_cm(77, 2.0).unwrap().cm;
        assert_eq!(
            minimize_reid(&cm, 6, 3).unwrap(),
            minimize_reid(&cm, 6, 3).unwrap()
        );
    }

    #[test]
    fn steering_lower_bound_matches_gaussian_steering() {
        use crate::steering::gaussian_steering_a_to_b;
        assert!(estimate_steering_lower(&CovMatrix::vacuum(), 4, 0).unwrap() < 1e-12);
        let t = tmsv(1.0).unwrap().cm;
        let s = estimate_steering_lower(&t, DEFAULT_RESTARTS, 0).unwrap();
        assert_relative_eq!(s, 2.0_f64.cosh().ln(), epsilon = 1e-5);
        assert_relative_eq!(s, gaussian_steering_a_to_b(&t).unwrap(), epsilon = 1e-5);

        let p = |v: f64| SymplecticParams::new(v / (1.0 + v * v), v, 1.0 + v * v).unwrap();
        let rotated = apply_local(
            &t,
            &LocalSymplectic::from_params(&p(0.16), &p(0.19)).unwrap(),
        );
        assert_relative_eq!(
            estimate_steering_lower(&rotated, DEFAULT_RESTARTS, 0).unwrap(),
            s,
            epsilon = 1e-5
        );
    }

    #[test]
    fn w_sweep_is_flat() {
        let grid: Vec<(f64, f64)> = [0.5, 1.0, 2.0]
            .iter()
            .flat_map(|&a| [0.5, 1.0, 2.0].map(move |b| (a, b)))
            .collect();
        assert!(sweep_w_invariance(&tmsv(1.0).unwrap().cm, &grid, 0.3).unwrap() < 1e-9);
        assert!(sweep_w_invariance(&CovMatrix::vacuum(), &grid, 0.3).unwrap() < 1e-15);
        assert!(sweep_w_invariance(&random_cm(4, 3.0).unwrap().cm, &grid, 0.3).unwrap() < 1e-9);
    }

    #[test]
    fn objective_guards_singular_chart() {
        assert_eq!(
            reid_objective(&Matrix4::identity(), &[2.0, 0.5, 0.0, 0.0]),
            f64::INFINITY
        );
    }
}
