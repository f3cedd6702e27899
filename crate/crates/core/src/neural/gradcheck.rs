use super::{check_len, NeuralError};

/// Denominator floor for the relative error, so exactly-zero gradients do not
/// divide by zero.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub worst_index: Option<usize>,
    pub checked: usize,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_relative_error < self.tolerance
    }
}

/// `|a - n| / max(|a|, |n|, floor)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_ERROR_FLOOR)
}

/// Compares `analytic` with central differences of `loss` at every coordinate
/// of `params`.
pub fn gradient_check<F>(
    loss: F,
    params: &[f64],
    analytic: &[f64],
    eps: f64,
    tolerance: f64,
) -> Result<GradCheckReport, NeuralError>
where
    F: FnMut(&[f64]) -> f64,
{
    let all: Vec<usize> = (0..params.len()).collect();
    gradient_check_indices(loss, params, analytic, &all, eps, tolerance)
}

/// Like [`gradient_check`] on a subset of coordinates.
pub fn gradient_check_indices<F>(
    mut loss: F,
    params: &[f64],
    analytic: &[f64],
    indices: &[usize],
    eps: f64,
    tolerance: f64,
) -> Result<GradCheckReport, NeuralError>
where
    F: FnMut(&[f64]) -> f64,
{
    check_len("analytic gradient", analytic.len(), params.len())?;
    if !(eps > 0.0) {
        return Err(NeuralError::Config(
            "finite-difference step must be > 0".into(),
        ));
    }
    let mut work = params.to_vec();
    let mut worst = (0.0, None);
    for &i in indices {
        if i >= params.len() {
            return Err(NeuralError::Dimension(format!("index {i} out of range")));
        }
        work[i] = params[i] + eps;
        let up = loss(&work);
        work[i] = params[i] - eps;
        let down = loss(&work);
        work[i] = params[i];
        let numeric = (up - down) / (2.0 * eps);
        if !numeric.is_finite() {
            return Err(NeuralError::NonFinite(format!("loss near coordinate {i}")));
        }
        let err = relative_error(analytic[i], numeric);
        if err > worst.0 || worst.1.is_none() {
            worst = (err, Some(i));
        }
    }
    Ok(GradCheckReport {
        max_relative_error: worst.0,
        worst_index: worst.1,
        checked: indices.len(),
        tolerance,
    })
}
