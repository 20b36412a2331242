//! Generic optimizer loops over fallible objectives.
//!
//! Both optimizers work on plain `f(x)` closures so they can be tested on
//! analytic surrogates and driven by shot-based energy estimators alike. The
//! derivative-free method is a diagonal-quadratic trust-region scheme: per
//! iteration it evaluates a symmetric coordinate stencil, fits an
//! axis-separable quadratic model, and takes the model minimizer within an
//! infinity-norm trust region, growing or shrinking the region on the usual
//! agreement-ratio test.

use super::{TracePoint, VqeTrace};
use crate::{Error, Result};

/// Adam hyperparameters.
#[derive(Clone, Copy, Debug)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams { learning_rate: 0.05, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// Adam descent with bias-corrected moments.
///
/// `gradient(x, iter)` supplies the descent direction and reports how many
/// objective evaluations it consumed; `objective(x, iter)` is called once per
/// recorded iterate. The trace records the initial point and every iterate.
pub fn adam<G, F>(
    x0: &[f64],
    hyper: &AdamParams,
    max_iters: usize,
    mut gradient: G,
    mut objective: F,
) -> Result<VqeTrace>
where
    G: FnMut(&[f64], usize) -> Result<(Vec<f64>, usize)>,
    F: FnMut(&[f64], usize) -> Result<f64>,
{
    if max_iters == 0 {
        return Err(Error::input("max_iters must be at least 1".to_string()));
    }
    let dim = x0.len();
    let mut x = x0.to_vec();
    let mut m = vec![0.0f64; dim];
    let mut v = vec![0.0f64; dim];
    let mut evaluations = 1usize;
    let mut iterations = vec![TracePoint {
        params: x.clone(),
        energy: objective(&x, 0)?,
        evaluations_used: evaluations,
    }];
    for iter in 1..=max_iters {
        let (g, evals) = gradient(&x, iter)?;
        if g.len() != dim {
            return Err(Error::validation(format!(
                "gradient has {} components, expected {dim}",
                g.len()
            )));
        }
        evaluations += evals;
        let bias1 = 1.0 - hyper.beta1.powi(iter as i32);
        let bias2 = 1.0 - hyper.beta2.powi(iter as i32);
        for j in 0..dim {
            m[j] = hyper.beta1 * m[j] + (1.0 - hyper.beta1) * g[j];
            v[j] = hyper.beta2 * v[j] + (1.0 - hyper.beta2) * g[j] * g[j];
            let m_hat = m[j] / bias1;
            let v_hat = v[j] / bias2;
            x[j] -= hyper.learning_rate * m_hat / (v_hat.sqrt() + hyper.epsilon);
        }
        evaluations += 1;
        iterations.push(TracePoint {
            params: x.clone(),
            energy: objective(&x, iter)?,
            evaluations_used: evaluations,
        });
    }
    Ok(VqeTrace::from_iterations(iterations))
}

/// Trust-region radii for the model-based optimizer.
#[derive(Clone, Copy, Debug)]
pub struct TrustRegionParams {
    pub initial_radius: f64,
    pub final_radius: f64,
}

impl Default for TrustRegionParams {
    fn default() -> Self {
        TrustRegionParams { initial_radius: 0.4, final_radius: 1e-5 }
    }
}

const RATIO_EXPAND: f64 = 0.7;
const RATIO_SHRINK: f64 = 0.25;
const EXPAND_FACTOR: f64 = 1.4;
const SHRINK_FACTOR: f64 = 0.5;

/// Derivative-free minimization with a separable quadratic model.
///
/// Each iteration spends `2·dim` evaluations on the coordinate stencil
/// `x ± Δ·eⱼ` plus one on the trial step, so `budget` must be at least
/// `2·dim + 1`. Optional `bounds` clamp both stencil and trial points.
/// Stops when the region shrinks below `final_radius` or the budget is
/// exhausted; the trace records accepted iterates only, so its energies are
/// non-increasing for a deterministic objective.
pub fn model_based<F>(
    x0: &[f64],
    budget: usize,
    region: &TrustRegionParams,
    bounds: Option<&[(f64, f64)]>,
    mut objective: F,
) -> Result<VqeTrace>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let dim = x0.len();
    if budget < 2 * dim + 1 {
        return Err(Error::input(format!(
            "budget {budget} too small: the stencil alone needs {} evaluations",
            2 * dim + 1
        )));
    }
    if !(region.initial_radius > 0.0) || !(region.final_radius > 0.0) {
        return Err(Error::input("trust-region radii must be positive".to_string()));
    }
    if let Some(bounds) = bounds {
        if bounds.len() != dim {
            return Err(Error::input(format!(
                "{} bounds for {dim} parameters",
                bounds.len()
            )));
        }
        for (j, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo <= x0[j] && x0[j] <= hi) {
                return Err(Error::input(format!("x0[{j}] = {} outside [{lo}, {hi}]", x0[j])));
            }
        }
    }
    let clamp = |x: &mut [f64]| {
        if let Some(bounds) = bounds {
            for (value, &(lo, hi)) in x.iter_mut().zip(bounds) {
                *value = value.clamp(lo, hi);
            }
        }
    };

    let mut x = x0.to_vec();
    let mut evaluations = 1usize;
    let mut f_center = objective(&x)?;
    let mut delta = region.initial_radius;
    let mut iterations =
        vec![TracePoint { params: x.clone(), energy: f_center, evaluations_used: evaluations }];

    while delta >= region.final_radius && evaluations + 2 * dim + 1 <= budget {
        // Symmetric stencil, clamped into bounds; track the actual offsets.
        let mut gradient = vec![0.0f64; dim];
        let mut curvature = vec![0.0f64; dim];
        let mut best_stencil: Option<(Vec<f64>, f64)> = None;
        for j in 0..dim {
            let mut plus = x.clone();
            plus[j] += delta;
            clamp(&mut plus);
            let mut minus = x.clone();
            minus[j] -= delta;
            clamp(&mut minus);
            let d_plus = plus[j] - x[j];
            let d_minus = x[j] - minus[j];
            let f_plus = objective(&plus)?;
            let f_minus = objective(&minus)?;
            evaluations += 2;
            for (point, value) in [(plus, f_plus), (minus, f_minus)] {
                if best_stencil.as_ref().is_none_or(|(_, best)| value < *best) {
                    best_stencil = Some((point, value));
                }
            }
            // Bounds can collapse one side of the stencil; fall back to a
            // one-sided linear estimate there.
            let tiny = 1e-12;
            if d_plus <= tiny && d_minus <= tiny {
                continue;
            }
            if d_plus <= tiny {
                gradient[j] = (f_center - f_minus) / d_minus;
                continue;
            }
            if d_minus <= tiny {
                gradient[j] = (f_plus - f_center) / d_plus;
                continue;
            }
            // Asymmetric three-point fit: f(x+s) = f0 + g s + h s²/2.
            let span = d_plus + d_minus;
            gradient[j] = (f_plus * d_minus * d_minus - f_minus * d_plus * d_plus
                + f_center * (d_plus * d_plus - d_minus * d_minus))
                / (d_plus * d_minus * span);
            curvature[j] =
                2.0 * (f_plus * d_minus + f_minus * d_plus - f_center * span) / (d_plus * d_minus * span);
        }

        // Separable model minimizer within the infinity-norm region.
        let mut step = vec![0.0f64; dim];
        for j in 0..dim {
            step[j] = if curvature[j] > f64::EPSILON {
                (-gradient[j] / curvature[j]).clamp(-delta, delta)
            } else if gradient[j] != 0.0 {
                -gradient[j].signum() * delta
            } else {
                0.0
            };
        }
        let predicted: f64 = (0..dim)
            .map(|j| -(gradient[j] * step[j] + 0.5 * curvature[j] * step[j] * step[j]))
            .sum();
        let mut trial: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a + s).collect();
        clamp(&mut trial);
        let f_trial = objective(&trial)?;
        evaluations += 1;

        // Fall back to the best stencil point if it beats the model step.
        let (candidate, f_candidate) = match best_stencil {
            Some((point, value)) if value < f_trial => (point, value),
            _ => (trial, f_trial),
        };

        if f_candidate < f_center {
            let ratio = if predicted > f64::EPSILON {
                (f_center - f_candidate) / predicted
            } else {
                1.0
            };
            x = candidate;
            f_center = f_candidate;
            iterations.push(TracePoint {
                params: x.clone(),
                energy: f_center,
                evaluations_used: evaluations,
            });
            if ratio > RATIO_EXPAND {
                delta *= EXPAND_FACTOR;
            } else if ratio < RATIO_SHRINK {
                delta *= SHRINK_FACTOR;
            }
        } else {
            delta *= SHRINK_FACTOR;
        }
    }
    Ok(VqeTrace::from_iterations(iterations))
}
