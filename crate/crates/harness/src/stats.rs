use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least two samples, got {0}")]
    TooFew(usize),
    #[error("a sample has zero variance")]
    DegenerateVariance,
    #[error("predictor value {0} is not positive")]
    NonPositive(String),
    #[error("sample contains a non-finite value")]
    NonFinite,
}

fn check(x: &[f64], y: &[f64]) -> Result<(), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::TooFew(x.len()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Centered sums of squares and cross products.
fn moments(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let (mx, my) = (mean(x), mean(y));
    x.iter()
        .zip(y)
        .fold((0.0, 0.0, 0.0), |(sxx, syy, sxy), (a, b)| {
            let (dx, dy) = (a - mx, b - my);
            (sxx + dx * dx, syy + dy * dy, sxy + dx * dy)
        })
}

/// Product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    check(x, y)?;
    let (sxx, syy, sxy) = moments(x, y);
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r: f64,
}

/// Ordinary least squares of `y` on `x`.
pub fn regress(x: &[f64], y: &[f64]) -> Result<LinearFit, StatsError> {
    let r = pearson(x, y)?;
    let (sxx, _, sxy) = moments(x, y);
    let slope = sxy / sxx;
    Ok(LinearFit {
        slope,
        intercept: mean(y) - slope * mean(x),
        r,
    })
}

/// Ordinary least squares of `response` on log10(`predictor`).
pub fn regress_loglinear(predictor: &[f64], response: &[f64]) -> Result<LinearFit, StatsError> {
    if let Some(bad) = predictor.iter().find(|p| p.is_nan() || **p <= 0.0) {
        return Err(StatsError::NonPositive(bad.to_string()));
    }
    let logs: Vec<f64> = predictor.iter().map(|p| p.log10()).collect();
    regress(&logs, response)
}
