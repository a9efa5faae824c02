use serde::{Deserialize, Serialize};

use crate::wave_fd::FluxSeries;

/// What the lag `r` in `exp(-r^2 / 4)` counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelUnit {
    /// Samples of the series being smoothed.
    #[default]
    Sample,
    /// Physical time; the kernel then spans several time units.
    Time,
}

/// Standard deviation of `exp(-r^2 / 4)` in units of `r`.
const KERNEL_SIGMA: f64 = std::f64::consts::SQRT_2;

/// Causal kernel `K_r ∝ exp(-(r u)^2 / 4)`, `u` the lag unit in kernel coordinates,
/// truncated at six standard deviations and normalised to unit sum.
pub fn gaussian_kernel(step: f64, unit: KernelUnit) -> Vec<f64> {
    let u = match unit {
        KernelUnit::Sample => 1.0,
        KernelUnit::Time => step,
    };
    let reach = (6.0 * KERNEL_SIGMA / u).floor() as usize;
    let mut k: Vec<f64> = (0..=reach).map(|r| (-(r as f64 * u).powi(2) / 4.0).exp()).collect();
    let total: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= total);
    k
}

/// `|sum_r K_r (-1)^r|`: the gain applied to a `+1, -1, ...` sequence far from the start.
pub fn alternating_response(kernel: &[f64]) -> f64 {
    kernel.iter().enumerate().map(|(r, k)| if r % 2 == 0 { *k } else { -*k }).sum::<f64>().abs()
}

/// `passes` rounds of `m^n <- sum_{r >= 0} K_r m^{n-r}`, with `m^{n-r} = m^0` before the start.
pub fn gaussian_regularize(series: &FluxSeries, passes: usize, unit: KernelUnit) -> FluxSeries {
    if passes == 0 || series.len() < 2 {
        return series.clone();
    }
    let kernel = gaussian_kernel(series.step(), unit);
    let mut cur = series.values.clone();
    let mut next = vec![0.0; cur.len()];
    for _ in 0..passes {
        for (n, out) in next.iter_mut().enumerate() {
            *out = kernel.iter().enumerate().map(|(r, k)| k * cur[n.saturating_sub(r)]).sum();
        }
        std::mem::swap(&mut cur, &mut next);
    }
    FluxSeries { times: series.times.clone(), values: cur }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(values: Vec<f64>, dt: f64) -> FluxSeries {
        let times = (0..values.len()).map(|k| k as f64 * dt).collect();
        FluxSeries::new(times, values).unwrap()
    }

    #[test]
    fn constants_preserved() {
        let s = series(vec![-1.7; 300], 0.01);
        for unit in [KernelUnit::Sample, KernelUnit::Time] {
            let r = gaussian_regularize(&s, 4, unit);
            assert!(r.values.iter().all(|v| (v + 1.7).abs() < 1e-13));
        }
    }

    #[test]
    fn zero_passes_is_identity() {
        let s = series((0..50).map(|k| (k as f64).sin()).collect(), 0.01);
        assert_eq!(gaussian_regularize(&s, 0, KernelUnit::Sample), s);
    }

    #[test]
    fn kernel_shape() {
        let k = gaussian_kernel(0.01, KernelUnit::Sample);
        assert_eq!(k.len(), 9);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(k.windows(2).all(|w| w[1] < w[0]));
        let kt = gaussian_kernel(0.01, KernelUnit::Time);
        assert_eq!(kt.len(), 849);
    }

    #[test]
    fn alternating_response_matches_direct_filtering() {
        // Independent check: filter a long alternating sequence and read the steady amplitude.
        for unit in [KernelUnit::Sample, KernelUnit::Time] {
            let dt = 0.01;
            let k = gaussian_kernel(dt, unit);
            let s = series((0..3000).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect(), dt);
            let out = gaussian_regularize(&s, 1, unit);
            let tail = out.values[2000..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!((tail - alternating_response(&k)).abs() < 1e-12);
        }
        let sample = alternating_response(&gaussian_kernel(0.01, KernelUnit::Sample));
        assert!(sample > 0.2 && sample < 0.25, "{sample}");
        assert!(alternating_response(&gaussian_kernel(0.01, KernelUnit::Time)) < 0.1);
    }
}
