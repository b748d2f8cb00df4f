// SPDX-License-Identifier: MIT OR Apache-2.0

//! Closed forms for exponential sampling: interval and count distributions,
//! modified Bessel functions, Marcum's Q and the folded Skellam law.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const SERIES_TOL: f64 = 1e-14;
const MAX_TERMS: usize = 100_000;
/// Largest rate accepted by the folded Skellam pmf.
pub const SKELLAM_MAX_RATE: f64 = 20.0;

fn check_rate(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "rate must be positive and finite, got {lambda}"
        )))
    }
}

/// `λ e^{-λΔ}` for `Δ ≥ 0`, zero for negative `Δ`.
pub fn exponential_pdf(delta: f64, lambda: f64) -> Result<f64> {
    check_rate(lambda)?;
    Ok(if delta < 0.0 {
        0.0
    } else {
        lambda * (-lambda * delta).exp()
    })
}

/// `λ^k e^{-λ} / k!`.
pub fn poisson_pmf(k: u64, lambda: f64) -> Result<f64> {
    check_rate(lambda)?;
    let k = k as f64;
    Ok((k * lambda.ln() - lambda - ln_gamma(k + 1.0)).exp())
}

/// Density of the `n`-th arrival time, `λ^n t^{n-1} e^{-λt} / (n-1)!`.
pub fn erlang_pdf(t: f64, n: u64, lambda: f64) -> Result<f64> {
    check_rate(lambda)?;
    if n == 0 {
        return Err(Error::invalid("Erlang order must be >= 1"));
    }
    if t < 0.0 {
        return Ok(0.0);
    }
    if t == 0.0 {
        return Ok(if n == 1 { lambda } else { 0.0 });
    }
    let n = n as f64;
    Ok((n * lambda.ln() + (n - 1.0) * t.ln() - lambda * t - ln_gamma(n)).exp())
}

/// Modified Bessel function of the first kind `I_k(a)` for integer order,
/// by its power series. `I_{-k} = I_k`.
pub fn bessel_i(k: i64, a: f64) -> f64 {
    assert!(a >= 0.0, "bessel_i needs a >= 0");
    let k = k.unsigned_abs();
    if a == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * a;
    let q = half * half;
    // First term (a/2)^k / k!, in logs to survive large k.
    let mut term = (k as f64 * half.ln() - ln_gamma(k as f64 + 1.0)).exp();
    let mut sum = term;
    for m in 1..MAX_TERMS {
        term *= q / (m as f64 * (m as u64 + k) as f64);
        sum += term;
        if term <= SERIES_TOL * sum {
            break;
        }
    }
    sum
}

/// First-order Marcum Q function `Q_1(a, b)`.
pub fn marcum_q(a: f64, b: f64) -> f64 {
    assert!(a >= 0.0 && b >= 0.0, "marcum_q needs a, b >= 0");
    if b == 0.0 {
        return 1.0;
    }
    let x = a * b;
    let scale = (-(a * a + b * b) / 2.0).exp();
    if a < b {
        let r = a / b;
        let mut sum = 0.0;
        let mut rk = 1.0;
        for k in 0..MAX_TERMS as i64 {
            let term = rk * bessel_i(k, x);
            sum += term;
            if term <= SERIES_TOL * sum {
                break;
            }
            rk *= r;
        }
        (scale * sum).clamp(0.0, 1.0)
    } else {
        // Complementary series, convergent for b <= a.
        let r = b / a;
        let mut sum = 0.0;
        let mut rk = r;
        for k in 1..MAX_TERMS as i64 {
            let term = rk * bessel_i(k, x);
            sum += term;
            if term <= SERIES_TOL * sum || term == 0.0 {
                break;
            }
            rk *= r;
        }
        (1.0 - scale * sum).clamp(0.0, 1.0)
    }
}

/// Probability that `|X - Y| = k` for independent Poisson `X ~ λ1`,
/// `Y ~ λ2`.
pub fn skellam_pmf(k: i64, lambda1: f64, lambda2: f64) -> Result<f64> {
    check_rate(lambda1)?;
    check_rate(lambda2)?;
    if k < 0 {
        return Err(Error::invalid("folded Skellam support is k >= 0"));
    }
    if lambda1 > SKELLAM_MAX_RATE || lambda2 > SKELLAM_MAX_RATE {
        return Err(Error::invalid(format!(
            "folded Skellam pmf is limited to rates <= {SKELLAM_MAX_RATE}"
        )));
    }
    let x = 2.0 * (lambda1 * lambda2).sqrt();
    let base = (-lambda1 - lambda2).exp() * bessel_i(k, x);
    if k == 0 {
        return Ok(base);
    }
    let half = k as f64 / 2.0;
    Ok(base * ((lambda1 / lambda2).powf(half) + (lambda2 / lambda1).powf(half)))
}

/// `E|X - Y|` for independent Poisson `X ~ λ1`, `Y ~ λ2`.
pub fn expected_abs_difference(lambda1: f64, lambda2: f64) -> Result<f64> {
    check_rate(lambda1)?;
    check_rate(lambda2)?;
    let g = (lambda1 * lambda2).sqrt();
    let bessel = 2.0
        * (-lambda1 - lambda2).exp()
        * (lambda2 * bessel_i(0, 2.0 * g) + g * bessel_i(1, 2.0 * g));
    let q = marcum_q((2.0 * lambda1).sqrt(), (2.0 * lambda2).sqrt());
    Ok(bessel + (lambda2 - lambda1) * (1.0 - 2.0 * q))
}

/// Expected cost of the unavoidable deletions between segments whose sizes
/// are Poisson with means `λ1` and `λ2`.
pub fn expected_deletion_cost(lambda1: f64, lambda2: f64, indel_cost: f64) -> Result<f64> {
    Ok(indel_cost * expected_abs_difference(lambda1, lambda2)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `I_k(a) = (1/π) ∫_0^π e^{a cos θ} cos(kθ) dθ`, by composite Simpson.
    fn bessel_quadrature(k: i64, a: f64) -> f64 {
        let n = 20_000;
        let h = std::f64::consts::PI / n as f64;
        let f = |t: f64| (a * t.cos()).exp() * (k as f64 * t).cos();
        let mut s = f(0.0) + f(std::f64::consts::PI);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        s * h / 3.0 / std::f64::consts::PI
    }

    #[test]
    fn pdf_values() {
        assert_eq!(exponential_pdf(0.0, 2.5).unwrap(), 2.5);
        assert_eq!(exponential_pdf(-1.0, 2.5).unwrap(), 0.0);
        for t in [0.0, 0.3, 1.0, 4.2] {
            let e = erlang_pdf(t, 1, 1.7).unwrap();
            assert!((e - exponential_pdf(t, 1.7).unwrap()).abs() < 1e-14 * e.max(1.0));
        }
        assert!((poisson_pmf(0, 3.0).unwrap() - (-3.0f64).exp()).abs() < 1e-16);
        assert!(exponential_pdf(1.0, 0.0).is_err());
        assert!(erlang_pdf(1.0, 0, 1.0).is_err());
    }

    #[test]
    fn poisson_normalization() {
        for lambda in [0.1, 1.0, 5.5, 20.0] {
            let s: f64 = (0..=200).map(|k| poisson_pmf(k, lambda).unwrap()).sum();
            assert!((s - 1.0).abs() < 1e-12, "λ={lambda}: {s}");
        }
    }

    #[test]
    fn bessel_values() {
        assert_eq!(bessel_i(0, 0.0), 1.0);
        assert_eq!(bessel_i(3, 0.0), 0.0);
        assert!((bessel_i(0, 2.0) - 2.279_585_302_336_067).abs() < 1e-14);
        for k in 0..6 {
            assert_eq!(bessel_i(k, 1.3), bessel_i(-k, 1.3));
        }
    }

    #[test]
    fn bessel_matches_integral_representation() {
        for k in 0..5 {
            for a in [0.1, 1.0, 2.0, 6.5, 15.0] {
                let s = bessel_i(k, a);
                let q = bessel_quadrature(k, a);
                assert!((s - q).abs() <= 1e-10 * s + 1e-15, "I_{k}({a}) {s} vs {q}");
            }
        }
    }

    #[test]
    fn marcum_limits_and_identity() {
        assert_eq!(marcum_q(1.3, 0.0), 1.0);
        assert!(marcum_q(1.0, 12.0) < 1e-20);
        let s2 = 2.0f64.sqrt();
        let expected = 0.5 * (1.0 + skellam_pmf(0, 1.0, 1.0).unwrap());
        assert!((marcum_q(s2, s2) - expected).abs() < 1e-14);
        assert!((marcum_q(s2, s2) - 0.654_254_161_276_835_6).abs() < 1e-13);
    }

    #[test]
    fn marcum_monotone() {
        let grid: Vec<f64> = (0..30).map(|i| 0.25 * i as f64).collect();
        for &a in &grid {
            for w in grid.windows(2) {
                assert!(marcum_q(a, w[1]) <= marcum_q(a, w[0]) + 1e-15);
            }
        }
        for &b in &grid {
            for w in grid.windows(2) {
                assert!(marcum_q(w[1], b) >= marcum_q(w[0], b) - 1e-15);
            }
        }
    }

    #[test]
    fn skellam_values_and_normalization() {
        let p0 = skellam_pmf(0, 1.0, 1.0).unwrap();
        assert!((p0 - 0.308_508_322_553_671).abs() < 1e-12);
        for (l1, l2) in [(1.0, 1.0), (0.5, 8.0), (3.1, 2.6), (20.0, 0.3)] {
            let s: f64 = (0..=200).map(|k| skellam_pmf(k, l1, l2).unwrap()).sum();
            assert!((s - 1.0).abs() < 1e-10, "({l1}, {l2}): {s}");
            for k in 0..30 {
                let a = skellam_pmf(k, l1, l2).unwrap();
                let b = skellam_pmf(k, l2, l1).unwrap();
                assert!((a - b).abs() <= 1e-15 * a.max(1e-300));
            }
        }
        assert!(skellam_pmf(-1, 1.0, 1.0).is_err());
        assert!(skellam_pmf(0, 21.0, 1.0).is_err());
    }

    #[test]
    fn expected_difference_reference_values() {
        // Reference values from an independent implementation.
        let cases = [
            (1.0, 1.0, 1.047_555_223_605_217_5),
            (2.0, 4.0, 2.521_253_464_639_31),
            (4.0, 2.0, 2.521_253_464_639_31),
            (0.5, 8.0, 7.501_393_316_289_837),
            (3.1, 2.0, 1.960_809_094_886_872_2),
        ];
        for (l1, l2, e) in cases {
            let got = expected_abs_difference(l1, l2).unwrap();
            assert!((got - e).abs() < 1e-12, "({l1}, {l2}): {got} vs {e}");
        }
    }

    #[test]
    fn expected_difference_matches_direct_sum() {
        for (l1, l2) in [(1.0, 1.0), (0.7, 5.0), (6.0, 2.5)] {
            let direct: f64 = (0..=200)
                .map(|k| k as f64 * skellam_pmf(k, l1, l2).unwrap())
                .sum();
            let closed = expected_abs_difference(l1, l2).unwrap();
            assert!((direct - closed).abs() < 1e-8, "({l1}, {l2})");
        }
    }

    #[test]
    fn equal_rates_reduce_to_bessel_terms() {
        for lambda in [0.3, 1.0, 4.0] {
            let e = expected_deletion_cost(lambda, lambda, 2.0).unwrap();
            let b = 2.0
                * 2.0
                * (-2.0 * lambda).exp()
                * lambda
                * (bessel_i(0, 2.0 * lambda) + bessel_i(1, 2.0 * lambda));
            assert!((e - b).abs() < 1e-13);
            assert!(e > 0.0);
        }
    }
}
