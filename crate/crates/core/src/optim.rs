//! Thin wrappers over argmin for the small dense minimizations used by the
//! variational modules.

use argmin::core::{CostFunction, Error as ArgminError, Executor, State};
use argmin::solver::brent::BrentOpt;
use argmin::solver::neldermead::NelderMead;

use crate::error::{Error, Result};

struct Cost<'a, F: Fn(&[f64]) -> f64>(&'a F);

impl<F: Fn(&[f64]) -> f64> CostFunction for Cost<'_, F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, ArgminError> {
        Ok((self.0)(p))
    }
}

struct Cost1<'a, F: Fn(f64) -> f64>(&'a F);

impl<F: Fn(f64) -> f64> CostFunction for Cost1<'_, F> {
    type Param = f64;
    type Output = f64;

    fn cost(&self, p: &f64) -> std::result::Result<f64, ArgminError> {
        Ok((self.0)(*p))
    }
}

fn wrap(e: ArgminError) -> Error {
    Error::InvalidArgument(format!("optimizer: {e}"))
}

/// Nelder-Mead from `x0` with an axis-aligned initial simplex of size `step`.
/// Restarts once from the result to escape a collapsed simplex.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: &F,
    x0: &[f64],
    step: f64,
    max_iters: u64,
) -> Result<(Vec<f64>, f64)> {
    let mut best = (x0.to_vec(), f(x0));
    for scale in [step, step * 1e-3] {
        let mut simplex = vec![best.0.clone()];
        for i in 0..x0.len() {
            let mut v = best.0.clone();
            v[i] += scale;
            simplex.push(v);
        }
        let solver = NelderMead::new(simplex).with_sd_tolerance(1e-15).map_err(wrap)?;
        let res = Executor::new(Cost(f), solver)
            .configure(|s| s.max_iters(max_iters))
            .run()
            .map_err(wrap)?;
        let state = res.state();
        if let Some(p) = state.get_best_param() {
            if state.get_best_cost() <= best.1 {
                best = (p.clone(), state.get_best_cost());
            }
        }
    }
    Ok(best)
}

/// Brent minimization of a bracketed one-dimensional function.
pub fn brent<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let solver = BrentOpt::new(lo, hi).set_tolerance(1e-10, 1e-14);
    let res = Executor::new(Cost1(f), solver)
        .configure(|s| s.max_iters(500))
        .run()
        .map_err(wrap)?;
    let state = res.state();
    let x = state
        .get_best_param()
        .copied()
        .ok_or_else(|| Error::NotConverged(f64::NAN))?;
    Ok((x, state.get_best_cost()))
}
