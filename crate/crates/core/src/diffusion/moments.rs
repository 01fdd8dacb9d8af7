//! Moment records emitted by the evolution drivers.

/// Snapshot of the first two moments of the velocity distribution.
///
/// Serialized as one CSV row `time,mean_v,variance,total_mass` by the
/// experiment runner; for ensembles, `total_mass` is one by construction
/// and `variance` is the unbiased sample variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRecord {
    pub time: f64,
    pub mean_v: f64,
    pub variance: f64,
    pub total_mass: f64,
}

/// Least-squares slope of `y` against `x`; `None` for fewer than two
/// points or a degenerate abscissa.
pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let x_mean = points.iter().map(|&(x, _)| x).sum::<f64>() / n;
    let y_mean = points.iter().map(|&(_, y)| y).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in points {
        sxx += (x - x_mean) * (x - x_mean);
        sxy += (x - x_mean) * (y - y_mean);
    }
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Slope of the mean velocity over a moment series: the fitted drift.
pub fn fitted_drift(records: &[MomentRecord]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = records.iter().map(|r| (r.time, r.mean_v)).collect();
    least_squares_slope(&pts)
}

/// Slope of the variance over a moment series: the fitted heating rate.
pub fn fitted_heating_rate(records: &[MomentRecord]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = records.iter().map(|r| (r.time, r.variance)).collect();
    least_squares_slope(&pts)
}
