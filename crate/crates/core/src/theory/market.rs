//! Quantity-setting stage for a fixed policy vector.

use serde::{Deserialize, Serialize};

use super::{ModelParams, PolicyVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CournotOutcome {
    pub quantities: [f64; 2],
    pub profits: [f64; 2],
}

/// Output of the merged firm, by product. Only the product with the larger
/// private component is produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonopolyOutcome {
    pub quantities: [f64; 2],
    pub total_quantity: f64,
    pub profit: f64,
    /// Index (0 or 1) of the product carrying all output.
    pub active_product: usize,
}

/// Cournot-Nash quantities `q_i = (A + aR + b(2F_i - F_j)) / 3`; profits are `q_i^2`.
pub fn cournot_duopoly(params: &ModelParams, policy: &PolicyVector) -> Result<CournotOutcome> {
    params.validate()?;
    let base = params.market_size + params.common_effect * policy.common;
    let b = params.private_effect;
    let [f1, f2] = policy.private;
    let quantities = [(base + b * (2.0 * f1 - f2)) / 3.0, (base + b * (2.0 * f2 - f1)) / 3.0];
    for (firm, &q) in quantities.iter().enumerate() {
        if q < 0.0 {
            return Err(Error::NegativeQuantity { firm: firm + 1, quantity: q });
        }
    }
    Ok(CournotOutcome { quantities, profits: quantities.map(|q| q * q) })
}

/// Merged-firm optimum. Ties in `F` keep production on product 1.
pub fn monopoly_profit(params: &ModelParams, policy: &PolicyVector) -> Result<MonopolyOutcome> {
    params.validate()?;
    let [f1, f2] = policy.private;
    let active_product = if f2 > f1 { 1 } else { 0 };
    let f = policy.private[active_product];
    let q = (params.market_size + params.common_effect * policy.common + params.private_effect * f) / 2.0;
    if q < 0.0 {
        return Err(Error::NegativeQuantity { firm: 1, quantity: q });
    }
    let mut quantities = [0.0; 2];
    quantities[active_product] = q;
    Ok(MonopolyOutcome { quantities, total_quantity: q, profit: q * q, active_product })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a_cap: f64, a: f64, b: f64) -> ModelParams {
        ModelParams::new(a_cap, a, b, 9.0, 9.0).unwrap()
    }

    /// Best response by brute force over a quantity grid.
    fn grid_best_response(intercept: f64, rival: f64) -> f64 {
        let n = 200_001;
        let hi = intercept.max(0.0);
        (0..n)
            .map(|i| hi * i as f64 / (n - 1) as f64)
            .map(|q| (q, (intercept - q - rival) * q))
            .fold((0.0, f64::NEG_INFINITY), |acc, (q, v)| if v > acc.1 { (q, v) } else { acc })
            .0
    }

    #[test]
    fn symmetric_no_policy() {
        let out = cournot_duopoly(&params(1.0, 0.0, 0.0), &PolicyVector::default()).unwrap();
        for i in 0..2 {
            assert!((out.quantities[i] - 1.0 / 3.0).abs() < 1e-15);
            assert!((out.profits[i] - 1.0 / 9.0).abs() < 1e-15);
        }
    }

    #[test]
    fn private_component_shifts_output() {
        let out = cournot_duopoly(&params(1.0, 1.0, 1.0), &PolicyVector::new(0.0, 0.1, 0.0)).unwrap();
        assert!((out.quantities[0] - 0.4).abs() < 1e-15);
        assert!((out.quantities[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn negative_quantity_rejected() {
        let err = cournot_duopoly(&params(1.0, 0.0, 1.0), &PolicyVector::new(0.0, -2.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::NegativeQuantity { firm: 1, .. }));
    }

    #[test]
    fn cournot_is_mutual_best_response() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let p = params(rng.random_range(0.5..2.0), rng.random_range(0.0..1.5), rng.random_range(0.0..1.5));
            let policy = PolicyVector::new(
                rng.random_range(-0.1..0.1),
                rng.random_range(-0.1..0.1),
                rng.random_range(-0.1..0.1),
            );
            let out = cournot_duopoly(&p, &policy).unwrap();
            for i in 0..2 {
                let intercept = p.market_size + p.common_effect * policy.common + p.private_effect * policy.private[i];
                let br = grid_best_response(intercept, out.quantities[1 - i]);
                assert!((br - out.quantities[i]).abs() < 1e-4, "firm {i}: {br} vs {}", out.quantities[i]);
            }
        }
    }

    #[test]
    fn textbook_monopoly() {
        let out = monopoly_profit(&params(1.0, 0.0, 0.0), &PolicyVector::default()).unwrap();
        assert!((out.total_quantity - 0.5).abs() < 1e-15);
        assert!((out.profit - 0.25).abs() < 1e-15);
    }

    #[test]
    fn monopoly_produces_product_with_larger_private_component() {
        let out = monopoly_profit(&params(1.0, 0.5, 1.0), &PolicyVector::new(0.0, 0.01, 0.05)).unwrap();
        assert_eq!(out.active_product, 1);
        assert_eq!(out.quantities[0], 0.0);
        assert!((out.quantities[1] - (1.0 + 0.05) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn monopoly_profit_matches_grid() {
        let p = params(1.3, 0.7, 0.9);
        let policy = PolicyVector::new(0.05, 0.08, -0.02);
        let out = monopoly_profit(&p, &policy).unwrap();
        let intercept = p.market_size + p.common_effect * 0.05 + p.private_effect * 0.08;
        let q = grid_best_response(intercept, 0.0);
        assert!(((intercept - q) * q - out.profit).abs() < 1e-8);
    }

    #[test]
    fn single_product_beats_any_split() {
        // Revenue with split (q1, q2): (A + aR - Q) Q + b (F1 q1 + F2 q2).
        let p = params(1.0, 0.4, 0.8);
        let policy = PolicyVector::new(0.02, 0.03, 0.07);
        let out = monopoly_profit(&p, &policy).unwrap();
        let base = p.market_size + p.common_effect * policy.common;
        for i in 0..=100 {
            for j in 0..=100 {
                let (q1, q2) = (i as f64 / 100.0, j as f64 / 100.0);
                let total = q1 + q2;
                let v = (base - total) * total + p.private_effect * (policy.private[0] * q1 + policy.private[1] * q2);
                assert!(v <= out.profit + 1e-12);
            }
        }
    }
}
