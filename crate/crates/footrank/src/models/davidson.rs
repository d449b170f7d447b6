//! Davidson win/draw/loss model with home-field advantage.
//!
//! With w = z + eta*b the outcome probabilities are
//!
//! ```text
//! L(z; H) = 10^{w/2} / (10^{w/2} + kappa + 10^{-w/2})
//! L(z; A) = 10^{-w/2} / (10^{w/2} + kappa + 10^{-w/2})
//! L(z; D) = kappa sqrt(L(z;H) L(z;A))
//! ```
//!
//! kappa controls the draw propensity (kappa = 0 removes draws entirely) and
//! the gradient of the negated log-likelihood collapses to
//! -ln(10) (y̌ - F_kappa(z)), the Elo-style update direction.

use crate::match_data::Outcome;
use crate::models::{DavidsonParams, OutcomeProbs};

const LN_10: f64 = std::f64::consts::LN_10;

fn adjusted(z_scaled: f64, home_venue: bool, p: &DavidsonParams) -> f64 {
    z_scaled + if home_venue { p.eta } else { 0.0 }
}

/// All three outcome probabilities at once; they sum to one by construction.
/// Everything is expressed through e = 10^{-|w|/2} in (0, 1], so extreme
/// skill differences saturate instead of overflowing.
pub fn outcome_probs(z_scaled: f64, home_venue: bool, p: &DavidsonParams) -> OutcomeProbs {
    let w = adjusted(z_scaled, home_venue, p);
    let e = 10f64.powf(-0.5 * w.abs());
    let denom = 1.0 + p.kappa * e + e * e;
    let favorite = 1.0 / denom;
    let draw = p.kappa * e / denom;
    let underdog = e * e / denom;
    if w >= 0.0 {
        OutcomeProbs {
            home: favorite,
            draw,
            away: underdog,
        }
    } else {
        OutcomeProbs {
            home: underdog,
            draw,
            away: favorite,
        }
    }
}

/// Probability of a single outcome y.
pub fn likelihood(z_scaled: f64, home_venue: bool, y: Outcome, p: &DavidsonParams) -> f64 {
    outcome_probs(z_scaled, home_venue, p).prob(y)
}

/// Conditional expected score F_kappa(z) = sum_y y̌ L(z; y).
pub fn expected_score(z_scaled: f64, home_venue: bool, p: &DavidsonParams) -> f64 {
    let w = adjusted(z_scaled, home_venue, p);
    let e = 10f64.powf(-0.5 * w.abs());
    let denom = 1.0 + p.kappa * e + e * e;
    if w >= 0.0 {
        (0.5 * p.kappa * e + 1.0) / denom
    } else {
        (0.5 * p.kappa * e + e * e) / denom
    }
}

/// d/dz of the negated log-likelihood: g(z; y) = -ln(10) (y̌ - F_kappa(z)).
pub fn gradient(z_scaled: f64, home_venue: bool, y: Outcome, p: &DavidsonParams) -> f64 {
    -LN_10 * (y.score() - expected_score(z_scaled, home_venue, p))
}

/// Second derivative of the negated log-likelihood; strictly positive and
/// independent of the observed outcome.
pub fn hessian(z_scaled: f64, home_venue: bool, p: &DavidsonParams) -> f64 {
    let w = adjusted(z_scaled, home_venue, p);
    let e = 10f64.powf(-0.5 * w.abs());
    let denom = 1.0 + p.kappa * e + e * e;
    0.25 * LN_10 * LN_10 * e * (p.kappa + 4.0 * e + p.kappa * e * e) / (denom * denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::fifa_expected_score;
    use proptest::prelude::*;

    fn params(eta: f64, kappa: f64) -> DavidsonParams {
        DavidsonParams::new(eta, kappa, 1.0).unwrap()
    }

    /// Independent transcription of the three likelihood formulas, kept
    /// deliberately separate from the implementation above.
    fn oracle_probs(z: f64, b: f64, eta: f64, kappa: f64) -> (f64, f64, f64) {
        let h = 10f64.powf(0.5 * (z + eta * b))
            / (10f64.powf(0.5 * (z + eta * b)) + kappa + 10f64.powf(-0.5 * (z + eta * b)));
        let a = 10f64.powf(0.5 * (-z - eta * b))
            / (10f64.powf(0.5 * (-z - eta * b)) + kappa + 10f64.powf(-0.5 * (-z - eta * b)));
        let d = kappa * (h * a).sqrt();
        (h, d, a)
    }

    #[test]
    fn symmetric_point_kappa_two() {
        let p = params(0.0, 2.0);
        let probs = outcome_probs(0.0, false, &p);
        assert!((probs.home - 0.25).abs() < 1e-15);
        assert!((probs.away - 0.25).abs() < 1e-15);
        assert!((probs.draw - 0.5).abs() < 1e-15);
    }

    #[test]
    fn kappa_zero_kills_draws() {
        let p = params(0.0, 0.0);
        let probs = outcome_probs(0.0, false, &p);
        assert_eq!(probs.draw, 0.0);
        assert!((probs.home - 0.5).abs() < 1e-15);
        assert!((probs.away - 0.5).abs() < 1e-15);
    }

    #[test]
    fn matches_formula_oracle() {
        let p = params(0.4, 0.8);
        let probs = outcome_probs(1.0, true, &p);
        let (h, d, a) = oracle_probs(1.0, 1.0, 0.4, 0.8);
        assert!((probs.home - h).abs() < 1e-14);
        assert!((probs.draw - d).abs() < 1e-14);
        assert!((probs.away - a).abs() < 1e-14);
        assert!((probs.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn extreme_differences_saturate_without_nan() {
        let p = params(0.3, 0.8);
        for z in [-5000.0, -800.0, 800.0, 5000.0] {
            let probs = outcome_probs(z, true, &p);
            assert!(probs.home.is_finite() && probs.draw.is_finite() && probs.away.is_finite());
            assert!((probs.sum() - 1.0).abs() < 1e-12, "z={z}");
            let f = expected_score(z, true, &p);
            assert!((0.0..=1.0).contains(&f));
            assert!(hessian(z, true, &p) >= 0.0);
        }
        assert!((outcome_probs(5000.0, false, &p).home - 1.0).abs() < 1e-300);
        assert!((expected_score(-5000.0, false, &p)).abs() < 1e-300);
    }

    #[test]
    fn away_is_mirrored_home_on_neutral_ground() {
        let p = params(0.7, 1.3);
        for z in [-2.0, -0.4, 0.0, 0.9, 3.1] {
            let lhs = likelihood(z, false, Outcome::Away, &p);
            let rhs = likelihood(-z, false, Outcome::Home, &p);
            assert!((lhs - rhs).abs() < 1e-14);
        }
    }

    #[test]
    fn expected_score_identities() {
        // F_0(z) = F(z) and F_2(z) = F(z/2) when eta = 0.
        for i in 0..=100 {
            let z = -5.0 + 0.1 * i as f64;
            let f0 = expected_score(z, false, &params(0.0, 0.0));
            assert!((f0 - fifa_expected_score(z)).abs() < 1e-12);
            let f2 = expected_score(z, false, &params(0.0, 2.0));
            assert!((f2 - fifa_expected_score(0.5 * z)).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_known_values() {
        let p = params(0.0, 1.7);
        assert_eq!(gradient(0.0, false, Outcome::Draw, &p), 0.0);
        let g = gradient(0.0, false, Outcome::Home, &p);
        assert!((g + 0.5 * LN_10).abs() < 1e-14); // -ln10 * 0.5 ~ -1.1513
    }

    #[test]
    fn hessian_known_value() {
        let h = hessian(0.0, false, &params(0.0, 2.0));
        assert!((h - LN_10 * LN_10 / 8.0).abs() < 1e-14);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let cases = [
            (0.3, false, 0.0, 0.9, Outcome::Home),
            (-1.2, true, 0.4, 0.8, Outcome::Away),
            (0.0, true, 0.25, 2.0, Outcome::Draw),
            (2.4, false, 0.0, 0.1, Outcome::Away),
            (-0.7, true, 0.6, 1.4, Outcome::Home),
        ];
        let step = 1e-5;
        for (z, venue, eta, kappa, y) in cases {
            let p = params(eta, kappa);
            let loss = |z: f64| -likelihood(z, venue, y, &p).ln();
            let fd_grad = (loss(z + step) - loss(z - step)) / (2.0 * step);
            let g = gradient(z, venue, y, &p);
            assert!(
                (g - fd_grad).abs() <= 1e-6 * fd_grad.abs().max(1.0),
                "gradient mismatch at z={z}: {g} vs {fd_grad}"
            );
            let fd_hess = (gradient(z + step, venue, y, &p) - gradient(z - step, venue, y, &p))
                / (2.0 * step);
            let h = hessian(z, venue, &p);
            assert!(
                (h - fd_hess).abs() <= 1e-6 * fd_hess.abs().max(1.0),
                "hessian mismatch at z={z}: {h} vs {fd_hess}"
            );
        }
    }

    proptest! {
        #[test]
        fn probabilities_sum_to_one(
            z in -6.0..6.0f64,
            eta in 0.0..1.0f64,
            kappa in 0.0..4.0f64,
            venue in any::<bool>(),
        ) {
            let p = params(eta, kappa);
            let probs = outcome_probs(z, venue, &p);
            prop_assert!((probs.sum() - 1.0).abs() < 1e-12);
            prop_assert!(probs.home >= 0.0 && probs.draw >= 0.0 && probs.away >= 0.0);
        }

        #[test]
        fn expected_score_is_probability_weighted(
            z in -6.0..6.0f64,
            eta in 0.0..1.0f64,
            kappa in 0.0..4.0f64,
            venue in any::<bool>(),
        ) {
            let p = params(eta, kappa);
            let probs = outcome_probs(z, venue, &p);
            let weighted = probs.home + 0.5 * probs.draw;
            prop_assert!((expected_score(z, venue, &p) - weighted).abs() < 1e-12);
        }

        #[test]
        fn hessian_positive_and_even(
            z in -6.0..6.0f64,
            kappa in 0.0..4.0f64,
        ) {
            let p = params(0.0, kappa);
            prop_assert!(hessian(z, false, &p) > 0.0);
            prop_assert!((hessian(z, false, &p) - hessian(-z, false, &p)).abs() < 1e-12);
        }
    }
}
