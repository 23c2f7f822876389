//! Central finite-difference verification of analytic gradients.

use super::params::ParamSet;
use super::tape::{Graph, Var};
use super::NnError;

/// Outcome of a finite-difference sweep over every parameter element.
#[derive(Debug, Clone, Copy)]
pub struct GradCheckReport {
    /// Max of |analytic - numeric| / max(|analytic|, |numeric|) over
    /// elements where either magnitude exceeds `SMALL_GRAD`.
    pub max_rel_error: f64,
    /// Max absolute difference over the remaining (near-zero) elements.
    pub max_small_abs_error: f64,
    pub elements_checked: usize,
}

const SMALL_GRAD: f64 = 1e-6;

impl GradCheckReport {
    pub fn passes(&self, rel_tol: f64) -> bool {
        self.max_rel_error < rel_tol && self.max_small_abs_error < 1e-7
    }
}

/// Compare analytic gradients of `build`'s scalar loss against central
/// finite differences for every element of every parameter.
///
/// `build` must be a pure function of the parameter values; it is re-run
/// under ±epsilon perturbations of each element.
#[allow(clippy::needless_range_loop)] // params are mutated while analytic is read
pub fn check_gradients<F>(
    params: &mut ParamSet,
    epsilon: f64,
    build: F,
) -> Result<GradCheckReport, NnError>
where
    F: Fn(&mut Graph, &ParamSet) -> Result<Var, NnError>,
{
    params.zero_grads();
    let mut graph = Graph::new();
    let loss = build(&mut graph, params)?;
    graph.backward(loss, params)?;
    let analytic: Vec<Vec<f64>> = params.iter().map(|p| p.grad.data().to_vec()).collect();

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        max_small_abs_error: 0.0,
        elements_checked: 0,
    };

    let n_params = params.len();
    for pi in 0..n_params {
        let n_elems = {
            let p = params.iter().nth(pi).expect("index in range");
            p.value.len()
        };
        for ei in 0..n_elems {
            let original = params.iter().nth(pi).expect("index in range").value.data()[ei];

            set_elem(params, pi, ei, original + epsilon);
            let plus = eval_loss(params, &build)?;
            set_elem(params, pi, ei, original - epsilon);
            let minus = eval_loss(params, &build)?;
            set_elem(params, pi, ei, original);

            let numeric = (plus - minus) / (2.0 * epsilon);
            let exact = analytic[pi][ei];
            let magnitude = exact.abs().max(numeric.abs());
            let diff = (exact - numeric).abs();
            if magnitude > SMALL_GRAD {
                report.max_rel_error = report.max_rel_error.max(diff / magnitude);
            } else {
                report.max_small_abs_error = report.max_small_abs_error.max(diff);
            }
            report.elements_checked += 1;
        }
    }
    params.zero_grads();
    Ok(report)
}

fn set_elem(params: &mut ParamSet, param_index: usize, elem_index: usize, value: f64) {
    let p = params.iter_mut().nth(param_index).expect("index in range");
    p.value.data_mut()[elem_index] = value;
}

fn eval_loss<F>(params: &ParamSet, build: &F) -> Result<f64, NnError>
where
    F: Fn(&mut Graph, &ParamSet) -> Result<Var, NnError>,
{
    let mut graph = Graph::new();
    let loss = build(&mut graph, params)?;
    Ok(graph.value(loss).item())
}
