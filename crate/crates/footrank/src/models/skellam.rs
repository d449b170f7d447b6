//! Skellam model for the goal difference d = home goals - away goals.
//!
//! The home and away goal counts are Poisson with intensities
//! mu_h = e^{c + z + b*eta} and mu_a = e^{c - z - b*eta}, so their difference
//! follows the Skellam distribution. Since mu_h * mu_a = e^{2c}, the negated
//! log-likelihood reduces to
//!
//! ```text
//! l(z; d) = (mu_h + mu_a) - d (z + b*eta) - 2 e^c - ln Ĩ_{|d|}(2 e^c)
//! ```
//!
//! with the scaled Bessel function Ĩ from [`crate::models::bessel`]. Outcome
//! probabilities (win/draw/loss) have no closed form and are produced by
//! truncated sums over d.

use crate::error::{Error, Result};
use crate::models::bessel::bessel_i_scaled;
use crate::models::{OutcomeProbs, SkellamParams};

/// Largest admissible |z + b*eta|; beyond this the Poisson intensities are
/// numerically meaningless.
pub const MAX_ADJUSTED_Z: f64 = 30.0;

fn adjusted(z_scaled: f64, home_venue: bool, p: &SkellamParams) -> Result<f64> {
    let w = z_scaled + if home_venue { p.eta } else { 0.0 };
    if w.abs() > MAX_ADJUSTED_Z {
        return Err(Error::IntensityOverflow(w.abs()));
    }
    Ok(w)
}

/// Negated log-probability of the goal difference d.
pub fn log_likelihood(z_scaled: f64, home_venue: bool, d: i64, p: &SkellamParams) -> Result<f64> {
    let w = adjusted(z_scaled, home_venue, p)?;
    let ec = p.c.exp();
    let mu_h = (p.c + w).exp();
    let mu_a = (p.c - w).exp();
    let order = u32::try_from(d.unsigned_abs().min(u64::from(u32::MAX))).unwrap();
    Ok((mu_h + mu_a) - d as f64 * w - 2.0 * ec - bessel_i_scaled(order, 2.0 * ec).ln())
}

/// Expected goal difference F̄(z) = mu_h - mu_a.
pub fn expected_diff(z_scaled: f64, home_venue: bool, p: &SkellamParams) -> Result<f64> {
    let w = adjusted(z_scaled, home_venue, p)?;
    Ok(p.c.exp() * (w.exp() - (-w).exp()))
}

/// d/dz of the negated log-likelihood: g(z; d) = -(d - F̄(z)).
pub fn gradient(z_scaled: f64, home_venue: bool, d: i64, p: &SkellamParams) -> Result<f64> {
    Ok(-(d as f64 - expected_diff(z_scaled, home_venue, p)?))
}

/// Second derivative h(z) = mu_h + mu_a; strictly positive.
pub fn hessian(z_scaled: f64, home_venue: bool, p: &SkellamParams) -> Result<f64> {
    let w = adjusted(z_scaled, home_venue, p)?;
    Ok(p.c.exp() * (w.exp() + (-w).exp()))
}

/// Win/draw/loss probabilities from truncated sums over d in [-D, D].
/// With D = 50 the total mass is within 1e-4 of one for |z + b*eta| <= 2.
pub fn outcome_probs(z_scaled: f64, home_venue: bool, p: &SkellamParams) -> Result<OutcomeProbs> {
    let w = adjusted(z_scaled, home_venue, p)?;
    let ec = p.c.exp();
    let mu_h = (p.c + w).exp();
    let mu_a = (p.c - w).exp();
    let base = (mu_h + mu_a) - 2.0 * ec;

    // One Bessel row serves every d: the argument 2 e^c does not depend on z.
    let d_max = p.truncation;
    let mut home = 0.0;
    let mut away = 0.0;
    let mut draw = 0.0;
    for v in 0..=d_max {
        let scaled_bessel = bessel_i_scaled(v, 2.0 * ec);
        let log_bessel = scaled_bessel.ln();
        let d = v as f64;
        if v == 0 {
            draw = (-(base) + log_bessel).exp();
        } else {
            home += (-(base - d * w) + log_bessel).exp();
            away += (-(base + d * w) + log_bessel).exp();
        }
    }
    Ok(OutcomeProbs { home, draw, away })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(c: f64, eta: f64) -> SkellamParams {
        SkellamParams::new(c, eta, 1.0, SkellamParams::DEFAULT_TRUNCATION).unwrap()
    }

    #[test]
    fn draw_loss_at_origin() {
        // mu_h = mu_a = 1: P(d=0) = e^{-2} I_0(2) ~ 0.30851.
        let l = log_likelihood(0.0, false, 0, &params(0.0, 0.0)).unwrap();
        assert!((l - 1.1760064585170437).abs() < 1e-12);
        assert!(((-l).exp() - 0.308_508_322_553_671).abs() < 1e-12);
    }

    #[test]
    fn swap_symmetry_on_neutral_ground() {
        let p = params(0.3, 0.2);
        for (z, d) in [(0.7, 2), (-1.1, 0), (0.4, -3), (1.9, 5)] {
            let lhs = log_likelihood(z, false, d, &p).unwrap();
            let rhs = log_likelihood(-z, false, -d, &p).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn truncated_mass_is_close_to_one() {
        let p = params(0.0, 0.0);
        for z in [-2.0, -0.5, 0.0, 1.0, 2.0] {
            let mut total = 0.0;
            for d in -50i64..=50 {
                total += (-log_likelihood(z, false, d, &p).unwrap()).exp();
            }
            assert!((1.0 - total).abs() < 1e-4, "z={z}: total={total}");
        }
    }

    #[test]
    fn expected_diff_known_values() {
        let p = params(0.0, 0.0);
        assert_eq!(expected_diff(0.0, false, &p).unwrap(), 0.0);
        let one = expected_diff(1.0, false, &p).unwrap();
        assert!((one - 2.3504023872876029).abs() < 1e-12); // e - 1/e

        // Same point reached through the venue boost.
        let boosted = params(0.0, 1.0);
        let via_venue = expected_diff(0.0, true, &boosted).unwrap();
        assert!((via_venue - one).abs() < 1e-12);
    }

    #[test]
    fn expected_diff_matches_truncated_moment() {
        let p = params(0.0, 0.0);
        for z in [-1.0, -0.2, 0.5, 1.3] {
            let mut moment = 0.0;
            for d in -50i64..=50 {
                moment += d as f64 * (-log_likelihood(z, false, d, &p).unwrap()).exp();
            }
            let direct = expected_diff(z, false, &p).unwrap();
            assert!((moment - direct).abs() < 1e-3, "z={z}: {moment} vs {direct}");
        }
    }

    #[test]
    fn gradient_and_hessian_basics() {
        let p = params(0.0, 0.0);
        assert_eq!(gradient(0.0, false, 0, &p).unwrap(), 0.0);
        assert!((hessian(0.0, false, &p).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let cases = [
            (0.4, false, 0.0, 0.0, 1i64),
            (-0.9, true, -0.1, 0.2, -2),
            (1.5, false, 0.3, 0.0, 0),
            (0.0, true, 0.5, 0.4, 3),
        ];
        let step = 1e-5;
        for (z, venue, c, eta, d) in cases {
            let p = params(c, eta);
            let loss = |z: f64| log_likelihood(z, venue, d, &p).unwrap();
            let fd_grad = (loss(z + step) - loss(z - step)) / (2.0 * step);
            let g = gradient(z, venue, d, &p).unwrap();
            assert!(
                (g - fd_grad).abs() <= 1e-6 * fd_grad.abs().max(1.0),
                "gradient mismatch at z={z}: {g} vs {fd_grad}"
            );
            let fd_hess = (gradient(z + step, venue, d, &p).unwrap()
                - gradient(z - step, venue, d, &p).unwrap())
                / (2.0 * step);
            let h = hessian(z, venue, &p).unwrap();
            assert!(
                (h - fd_hess).abs() <= 1e-6 * fd_hess.abs(),
                "hessian mismatch at z={z}: {h} vs {fd_hess}"
            );
        }
    }

    #[test]
    fn outcome_probs_symmetry_and_limits() {
        let p = params(0.0, 0.0);
        let probs = outcome_probs(0.0, false, &p).unwrap();
        assert!((probs.home - probs.away).abs() < 1e-12);
        assert!((probs.draw - 0.308_508_322_553_671).abs() < 1e-12);
        assert!((probs.sum() - 1.0).abs() < 1e-4);

        // Vanishing intensities: every game is a goalless draw.
        let cold = params(-8.0, 0.0);
        assert!(outcome_probs(0.0, false, &cold).unwrap().draw > 0.999);

        // Strong favorite.
        let probs = outcome_probs(3.0, false, &p).unwrap();
        assert!(probs.home > 0.99);
    }

    #[test]
    fn probs_agree_with_per_d_losses() {
        let p = params(0.2, 0.3);
        for (z, venue) in [(0.6, true), (-1.2, false), (0.0, true)] {
            let probs = outcome_probs(z, venue, &p).unwrap();
            let mut home = 0.0;
            let mut away = 0.0;
            for d in 1i64..=50 {
                home += (-log_likelihood(z, venue, d, &p).unwrap()).exp();
                away += (-log_likelihood(z, venue, -d, &p).unwrap()).exp();
            }
            let draw = (-log_likelihood(z, venue, 0, &p).unwrap()).exp();
            assert!((probs.home - home).abs() < 1e-12);
            assert!((probs.away - away).abs() < 1e-12);
            assert!((probs.draw - draw).abs() < 1e-12);
        }
    }

    #[test]
    fn intensity_overflow_is_rejected() {
        let p = params(0.0, 0.0);
        let err = log_likelihood(31.0, false, 0, &p).unwrap_err();
        assert!(err.to_string().contains("intensity overflow"));
        assert!(outcome_probs(-30.5, false, &p).is_err());
        // Boundary itself is fine.
        assert!(log_likelihood(30.0, false, 0, &p).is_ok());
    }
}
