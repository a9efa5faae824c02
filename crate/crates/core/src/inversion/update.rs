use crate::error::{Error, Result};
use crate::grid_weights::CarlemanWeight;
use crate::wave_fd::PotentialField;

/// Pointwise clamp to `[-m, m]`.
pub fn truncate_tm(q: &PotentialField, m: f64) -> PotentialField {
    PotentialField { values: q.values.iter().map(|v| v.clamp(-m, m)).collect(), bound: m }
}

/// Nodes where `|w0| >= alpha_floor`.
pub fn floor_mask(w0: &[f64], alpha_floor: f64) -> Result<Vec<bool>> {
    if alpha_floor == 0.0 {
        if let Some(node) = w0.iter().position(|&w| w == 0.0) {
            return Err(Error::DegenerateInitialData { node: node + 1 });
        }
        return Ok(vec![true; w0.len()]);
    }
    Ok(w0.iter().map(|w| w.abs() >= alpha_floor).collect())
}

/// `T_m(q_k + rate / w0)` where `|w0| >= alpha_floor`, `0` elsewhere.
pub fn update_potential(q_k: &PotentialField, rate: &[f64], w0: &[f64], alpha_floor: f64) -> Result<PotentialField> {
    if rate.len() != q_k.len() || w0.len() != q_k.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} nodes", q_k.len()),
            got: format!("rate {}, w0 {}", rate.len(), w0.len()),
        });
    }
    let mask = floor_mask(w0, alpha_floor)?;
    let values = q_k
        .values
        .iter()
        .zip(rate)
        .zip(w0)
        .zip(&mask)
        .map(|(((q, r), w), ok)| if *ok { q + r / w } else { 0.0 })
        .collect();
    Ok(truncate_tm(&PotentialField { values, bound: q_k.bound }, q_k.bound))
}

/// Replaces masked-out nodes by linear interpolation between the nearest valid neighbours;
/// runs touching an end take the single available neighbour.
pub fn interpolate_dead_zone(q: &PotentialField, valid: &[bool]) -> PotentialField {
    let v = &q.values;
    let mut out = v.clone();
    let n = v.len();
    let mut j = 0;
    while j < n {
        if valid[j] {
            j += 1;
            continue;
        }
        let start = j;
        while j < n && !valid[j] {
            j += 1;
        }
        let left = start.checked_sub(1);
        let right = (j < n).then_some(j);
        for k in start..j {
            out[k] = match (left, right) {
                (Some(l), Some(r)) => v[l] + (v[r] - v[l]) * (k - l) as f64 / (r - l) as f64,
                (Some(l), None) => v[l],
                (None, Some(r)) => v[r],
                (None, None) => v[k],
            };
        }
    }
    PotentialField { values: out, bound: q.bound }
}

/// `h sum_j e^{2 s (phi(0, x_j) - max phi(0, .))} |q_j - Q_j|^2` and the shift used.
pub fn weighted_error(q: &PotentialField, reference: &PotentialField, weight: &CarlemanWeight, positions: &[f64], h: f64) -> (f64, f64) {
    let s = weight.s();
    let levels: Vec<f64> = positions.iter().map(|&x| weight.phi(0.0, x)).collect();
    let shift = levels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let err = h * q
        .values
        .iter()
        .zip(&reference.values)
        .zip(&levels)
        .map(|((a, b), p)| (2.0 * s * (p - shift)).exp() * (a - b).powi(2))
        .sum::<f64>();
    (err, shift)
}

/// Sum of squared second differences over the interior nodes.
pub fn hf_energy(q: &PotentialField) -> f64 {
    q.values.windows(3).map(|w| (w[2] - 2.0 * w[1] + w[0]).powi(2)).sum()
}

pub fn relative_change(new: &PotentialField, old: &PotentialField) -> f64 {
    let diff = new.values.iter().zip(&old.values).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    diff / old.l2_norm().max(1e-30)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_examples() {
        let q = PotentialField::new(vec![5.0, -1.0, -4.0, 3.0], 3.0);
        assert_eq!(truncate_tm(&q, 3.0).values, vec![3.0, -1.0, -3.0, 3.0]);
    }

    #[test]
    fn zero_rate_is_fixed_point() {
        let q = PotentialField::new(vec![0.5, -0.2, 1.0], 3.0);
        let next = update_potential(&q, &[0.0; 3], &[2.0, 2.5, 3.0], 0.0).unwrap();
        assert_eq!(next, q);
        let big = PotentialField::new(vec![4.0, -0.2], 3.0);
        assert_eq!(update_potential(&big, &[0.0; 2], &[1.0, 1.0], 0.0).unwrap().values, vec![3.0, -0.2]);
    }

    #[test]
    fn exact_rate_recovers_reference() {
        let xs: Vec<f64> = (1..20).map(|j| j as f64 / 20.0).collect();
        let big_q: Vec<f64> = xs.iter().map(|x| (2.0 * std::f64::consts::PI * x).sin()).collect();
        let w0: Vec<f64> = xs.iter().map(|x| 2.0 + (std::f64::consts::PI * x).sin()).collect();
        let q = PotentialField::new(xs.iter().map(|x| 0.3 * x).collect(), 3.0);
        let rate: Vec<f64> = big_q.iter().zip(&q.values).zip(&w0).map(|((a, b), w)| (a - b) * w).collect();
        let next = update_potential(&q, &rate, &w0, 0.0).unwrap();
        for (a, b) in next.values.iter().zip(&big_q) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn floor_zeroes_degenerate_nodes() {
        // w0(x) = -a + x with alpha = 1e-2.
        let a = 0.5;
        let xs: Vec<f64> = (1..100).map(|j| j as f64 / 100.0).collect();
        let w0: Vec<f64> = xs.iter().map(|x| x - a).collect();
        let q = PotentialField::new(vec![0.7; xs.len()], 3.0);
        let next = update_potential(&q, &vec![0.1; xs.len()], &w0, 1e-2).unwrap();
        for ((x, w), v) in xs.iter().zip(&w0).zip(&next.values) {
            if (x - a).abs() < 1e-2 - 1e-12 {
                assert_eq!(*v, 0.0);
            } else {
                assert!((v - (0.7 + 0.1 / w).clamp(-3.0, 3.0)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_w0_without_floor_is_an_error() {
        let q = PotentialField::zeros(3, 1.0);
        assert!(matches!(
            update_potential(&q, &[0.0; 3], &[1.0, 0.0, 1.0], 0.0),
            Err(Error::DegenerateInitialData { node: 2 })
        ));
    }

    #[test]
    fn dead_zone_interpolation() {
        let q = PotentialField::new(vec![1.0, 0.0, 0.0, 4.0, 0.0], 5.0);
        let out = interpolate_dead_zone(&q, &[true, false, false, true, false]);
        assert_eq!(out.values, vec![1.0, 2.0, 3.0, 4.0, 4.0]);
    }

    #[test]
    fn weighted_error_limits() {
        let xs: Vec<f64> = (1..10).map(|j| j as f64 / 10.0).collect();
        let q = PotentialField::new(xs.iter().map(|x| x * x).collect(), 1.0);
        let r = PotentialField::new(xs.clone(), 1.0);
        let w = CarlemanWeight::new(-0.3, 0.99, 100.0, 1.0).unwrap();
        assert_eq!(weighted_error(&q, &q, &w, &xs, 0.1).0, 0.0);
        let (e0, _) = weighted_error(&q, &r, &w.with_s(0.0), &xs, 0.1);
        let plain: f64 = 0.1 * q.values.iter().zip(&r.values).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        assert!((e0 - plain).abs() < 1e-15);
        let (e, shift) = weighted_error(&q, &r, &w, &xs, 0.1);
        assert!(e.is_finite() && e > 0.0);
        assert!((shift - w.phi(0.0, 0.9)).abs() < 1e-15);
    }

    #[test]
    fn hf_energy_of_linear_is_zero() {
        assert_eq!(hf_energy(&PotentialField::new(vec![1.0, 2.0, 3.0, 4.0], 5.0)), 0.0);
        assert_eq!(hf_energy(&PotentialField::new(vec![1.0, -1.0, 1.0], 5.0)), 16.0);
    }
}
