// SPDX-License-Identifier: MIT OR Apache-2.0

use crate::error::{Error, Result};
use crate::series::IrregularSeries;

/// Kernel support in bandwidths; mass beyond it is below `exp(-4.5)`.
const KERNEL_CUTOFF: f64 = 3.0;

/// Nadaraya–Watson smooth with a Gaussian kernel in time units, evaluated at
/// each sample time.
pub fn gaussian_smooth(series: &IrregularSeries, bandwidth: f64) -> Result<Vec<f64>> {
    if !(bandwidth > 0.0) {
        return Err(Error::invalid(format!(
            "kernel bandwidth must be positive, got {bandwidth}"
        )));
    }
    let times = series.times();
    let values = series.values();
    let reach = KERNEL_CUTOFF * bandwidth;
    let inv = 1.0 / (2.0 * bandwidth * bandwidth);
    let mut lo = 0;
    let mut hi = 0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        while times[lo] < t - reach {
            lo += 1;
        }
        while hi < times.len() && times[hi] <= t + reach {
            hi += 1;
        }
        let (mut num, mut den) = (0.0, 0.0);
        for j in lo..hi {
            let d = times[j] - t;
            let k = (-d * d * inv).exp();
            num += k * values[j];
            den += k;
        }
        out.push(num / den);
    }
    Ok(out)
}

/// Series minus its Gaussian-kernel smooth.
pub fn gaussian_detrend(series: &IrregularSeries, bandwidth: f64) -> Result<IrregularSeries> {
    let trend = gaussian_smooth(series, bandwidth)?;
    let anomalies = series
        .values()
        .iter()
        .zip(&trend)
        .map(|(v, m)| v - m)
        .collect();
    let out = IrregularSeries::new(series.times().to_vec(), anomalies)?;
    Ok(out.with_units(series.time_unit.clone(), series.value_unit.clone()))
}

/// Keeps every `stride`-th sample, starting with the first.
pub fn downsample_uniform(series: &IrregularSeries, stride: usize) -> Result<IrregularSeries> {
    if stride < 1 {
        return Err(Error::invalid("downsampling stride must be >= 1"));
    }
    let times: Vec<f64> = series.times().iter().step_by(stride).copied().collect();
    let values: Vec<f64> = series.values().iter().step_by(stride).copied().collect();
    let out = IrregularSeries::new(times, values)?;
    Ok(out.with_units(series.time_unit.clone(), series.value_unit.clone()))
}
