//! Plain Picard iteration x_{n+1} = T(x_n).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{Point, SelfMap};

/// When to stop iterating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StoppingRule {
    /// Stop once a step distance d(x_n, x_{n+1}) drops below this.
    pub tol: f64,
    pub max_iter: u64,
    /// Abort once d(x_0, x_n) exceeds this.
    pub divergence_radius: f64,
}

impl StoppingRule {
    pub fn new(tol: f64, max_iter: u64, divergence_radius: f64) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::Usage(format!("tol must be positive, got {tol}")));
        }
        if max_iter == 0 {
            return Err(Error::Usage("max_iter must be at least 1".into()));
        }
        if !(divergence_radius > 0.0) {
            return Err(Error::Usage(format!(
                "divergence radius must be positive, got {divergence_radius}"
            )));
        }
        Ok(StoppingRule {
            tol,
            max_iter,
            divergence_radius,
        })
    }

    /// `tol` and `max_iter` with the default radius: 10⁶ × the sampled diameter.
    pub fn for_map(map: &SelfMap, tol: f64, max_iter: u64) -> Result<Self> {
        Self::new(tol, max_iter, 1e6 * map.space().sampled_diameter())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PicardVerdict {
    /// `u` is the last iterate; `residual` = d(u, T(u)) ≤ tol.
    Converged { u: Point, residual: f64 },
    MaxIterExceeded,
    Diverged { distance_from_start: f64 },
    SelfMapViolation { input: Point, output: Point },
}

/// Everything computed by one Picard run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardTrace {
    /// x_0, x_1 = T(x_0), …
    pub iterates: Vec<Point>,
    /// d(x_k, x_{k+1}) for every computed step.
    pub step_distances: Vec<f64>,
    pub verdict: PicardVerdict,
}

impl PicardTrace {
    pub fn converged(&self) -> bool {
        matches!(self.verdict, PicardVerdict::Converged { .. })
    }

    pub fn fixed_point(&self) -> Option<&Point> {
        match &self.verdict {
            PicardVerdict::Converged { u, .. } => Some(u),
            _ => None,
        }
    }

    pub fn steps(&self) -> usize {
        self.step_distances.len()
    }
}

/// Iterate `map` from `x0` until the step distance drops below `stop.tol`.
///
/// On a small step the candidate `u` (the newest iterate) is confirmed by
/// evaluating its residual d(u, T(u)); the run only reports convergence when
/// that residual is within `tol`, otherwise iteration continues. Failing
/// outcomes are encoded in the verdict; the only error is an `x0` outside
/// the domain.
pub fn picard_iterate(map: &SelfMap, x0: &Point, stop: &StoppingRule) -> Result<PicardTrace> {
    let space = map.space();
    space.check_point(x0)?;
    let mut iterates = vec![x0.clone()];
    let mut steps = Vec::new();
    let mut x = x0.clone();
    let verdict = loop {
        if steps.len() as u64 >= stop.max_iter {
            break PicardVerdict::MaxIterExceeded;
        }
        let y = match map.apply(&x) {
            Ok(y) => y,
            Err(Error::SelfMapViolation { input, output }) => {
                break PicardVerdict::SelfMapViolation { input, output }
            }
            Err(e) => return Err(e),
        };
        let step = space.distance(&x, &y)?;
        steps.push(step);
        iterates.push(y.clone());
        let from_start = space.distance(x0, &y)?;
        if from_start > stop.divergence_radius {
            break PicardVerdict::Diverged {
                distance_from_start: from_start,
            };
        }
        if step < stop.tol {
            if let Ok(ty) = map.apply(&y) {
                let residual = space.distance(&y, &ty)?;
                if residual <= stop.tol {
                    break PicardVerdict::Converged { u: y, residual };
                }
            }
        }
        x = y;
    };
    Ok(PicardTrace {
        iterates,
        step_distances: steps,
        verdict,
    })
}

/// λⁿ·d(x_0, x_1)/(1 − λ), the a priori distance from x_n to the fixed point
/// of a λ-Banach contraction.
pub fn banach_a_priori_bound(lambda: f64, d01: f64, n: u32) -> Result<f64> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::Usage(format!("lambda must lie in [0, 1), got {lambda}")));
    }
    if !(d01 >= 0.0 && d01.is_finite()) {
        return Err(Error::Usage(format!("d(x0, x1) must be non-negative, got {d01}")));
    }
    Ok(lambda.powi(n as i32) * d01 / (1.0 - lambda))
}
