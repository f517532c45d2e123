//! Post-processing helpers: period averaging, decay-rate fitting, grid norms.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("window [{t0}, {t1}] holds fewer than {min} full periods")]
    WindowTooShort { t0: f64, t1: f64, min: usize },
    #[error("series must share one grid; lengths {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("fewer than two zero crossings found")]
    TooFewCrossings,
    #[error("non-positive values cannot be log-fitted")]
    NonPositiveValues,
}

/// Trapezoid mean of `values` over consecutive windows of length `period`
/// inside `[t0, t1]`, returned as `(window midpoint, mean)` pairs.
///
/// `times` must be an increasing uniform grid covering the window.
pub fn period_averages(
    times: &[f64],
    values: &[f64],
    period: f64,
    t0: f64,
    t1: f64,
) -> Vec<(f64, f64)> {
    assert_eq!(times.len(), values.len());
    let mut out = Vec::new();
    if times.len() < 2 {
        return out;
    }
    let dt = times[1] - times[0];
    let mut start = t0;
    while start + period <= t1 + 1e-12 * period {
        let i0 = ((start - times[0]) / dt).ceil().max(0.0) as usize;
        let i1 = (((start + period) - times[0]) / dt).floor() as usize;
        let i1 = i1.min(times.len() - 1);
        if i1 > i0 + 1 {
            let mut acc = 0.0;
            for i in i0..i1 {
                acc += 0.5 * (values[i] + values[i + 1]) * (times[i + 1] - times[i]);
            }
            out.push((start + 0.5 * period, acc / (times[i1] - times[i0])));
        }
        start += period;
    }
    out
}

/// Least-squares decay rate of `values ~ exp(-rate t)` from the log of the
/// period-averaged signal over `[t0, t1]`, excluding the first and last
/// window so the 2-omega wiggles and edge effects stay out of the fit.
pub fn fitted_decay_rate(
    times: &[f64],
    values: &[f64],
    period: f64,
    t0: f64,
    t1: f64,
) -> Result<f64, FitError> {
    let windows = period_averages(times, values, period, t0, t1);
    if windows.len() < 4 {
        return Err(FitError::WindowTooShort { t0, t1, min: 4 });
    }
    let inner = &windows[1..windows.len() - 1];
    if inner.iter().any(|&(_, v)| v <= 0.0) {
        return Err(FitError::NonPositiveValues);
    }
    let n = inner.len() as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for &(t, v) in inner {
        let y = v.ln();
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    let slope = (n * sty - st * sy) / (n * stt - st * st);
    Ok(-slope)
}

/// Oscillation angular frequency from the mean spacing of sign changes.
pub fn zero_crossing_frequency(times: &[f64], values: &[f64]) -> Result<f64, FitError> {
    if times.len() != values.len() {
        return Err(FitError::LengthMismatch(times.len(), values.len()));
    }
    let mut crossings = Vec::new();
    for i in 1..values.len() {
        if values[i - 1] != 0.0 && values[i - 1] * values[i] < 0.0 {
            // linear interpolation of the crossing time
            let f = values[i - 1] / (values[i - 1] - values[i]);
            crossings.push(times[i - 1] + f * (times[i] - times[i - 1]));
        }
    }
    if crossings.len() < 2 {
        return Err(FitError::TooFewCrossings);
    }
    let span = crossings.last().unwrap() - crossings.first().unwrap();
    let mean_half_period = span / (crossings.len() - 1) as f64;
    Ok(std::f64::consts::PI / mean_half_period)
}

/// Max-abs difference of two equally sampled series.
pub fn linf(a: &[f64], b: &[f64]) -> Result<f64, FitError> {
    if a.len() != b.len() {
        return Err(FitError::LengthMismatch(a.len(), b.len()));
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Root-mean-square difference of two equally sampled series.
pub fn l2(a: &[f64], b: &[f64]) -> Result<f64, FitError> {
    if a.len() != b.len() {
        return Err(FitError::LengthMismatch(a.len(), b.len()));
    }
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((s / a.len() as f64).sqrt())
}
