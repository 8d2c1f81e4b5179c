use super::net::{loss, loss_and_grad, Example};
use super::params::ParamSet;
use super::NeuralError;

pub const FD_STEP: f64 = 1e-3;
// Guards the division when both gradients are exactly zero.
const FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    /// Worst relative error per tensor, in `ParamSet::tensors` order.
    pub per_tensor: Vec<(&'static str, f64)>,
    pub analytic: ParamSet,
}

/// Compares the analytic gradient with a five-point central difference on
/// every entry of every tensor.
pub fn gradient_check(p: &ParamSet, ex: &Example, lambda: f64) -> Result<GradCheckReport, NeuralError> {
    let mut analytic = p.zeros_like();
    loss_and_grad(p, ex, lambda, &mut analytic, None)?;
    let mut work = p.clone();
    let mut per_tensor = Vec::new();
    let names: Vec<&'static str> = p.tensors().iter().map(|(n, _)| *n).collect();
    for (ti, name) in names.into_iter().enumerate() {
        let len = p.tensors()[ti].1.data.len();
        let mut worst: f64 = 0.0;
        for k in 0..len {
            let orig = p.tensors()[ti].1.data[k];
            let mut at = |d: f64| -> Result<f64, NeuralError> {
                work.tensors_mut()[ti].1.data[k] = orig + d;
                Ok(loss(&work, ex, lambda)?.loss)
            };
            let near = at(FD_STEP)? - at(-FD_STEP)?;
            let far = at(2.0 * FD_STEP)? - at(-2.0 * FD_STEP)?;
            work.tensors_mut()[ti].1.data[k] = orig;
            let numeric = (8.0 * near - far) / (12.0 * FD_STEP);
            let a = analytic.tensors()[ti].1.data[k];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(FLOOR);
            worst = worst.max(rel);
        }
        per_tensor.push((name, worst));
    }
    let max_relative_error = per_tensor.iter().map(|(_, e)| *e).fold(0.0, f64::max);
    Ok(GradCheckReport {
        max_relative_error,
        per_tensor,
        analytic,
    })
}
