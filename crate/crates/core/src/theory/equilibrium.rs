//! Closed-form truthful equilibria.
//!
//! Policies are written as `4 A a / (9 w1 - 4 a^2)` rather than
//! `4 A k_R / a / (9 - 4 k_R)` so that `a = 0` needs no special case.

use super::{cournot_duopoly, monopoly_profit, EquilibriumSolution, MarketStructure, ModelParams, PolicyVector};
use crate::error::{Error, Result};

/// Duopoly lobbying over the common component only (`b` is ignored).
///
/// Total contributions equal the policy-maker's welfare loss `w1 R*^2 / 2`;
/// the split between firms is indeterminate and the symmetric one is returned.
pub fn duopoly_common_equilibrium(params: &ModelParams) -> Result<EquilibriumSolution> {
    params.validate()?;
    let params = params.without_private();
    params.require_common_interior()?;
    let (a_cap, a, w1) = (params.market_size, params.common_effect, params.common_weight);
    let k = params.k_common();
    let r = 4.0 * a_cap * a / (9.0 * w1 - 4.0 * a * a);
    let per_firm = 4.0 * a_cap * a_cap * k / (9.0 - 4.0 * k).powi(2);
    let policy = PolicyVector::new(r, 0.0, 0.0);
    let market = cournot_duopoly(&params, &policy)?;
    Ok(EquilibriumSolution::new(
        MarketStructure::DuopolyCommon,
        policy,
        market.quantities.to_vec(),
        market.profits.to_vec(),
        vec![per_firm, per_firm],
    ))
}

/// Duopoly lobbying over the private components only (`a` is ignored).
pub fn duopoly_private_equilibrium(params: &ModelParams) -> Result<EquilibriumSolution> {
    params.validate()?;
    let params = params.without_common();
    params.require_private_interior()?;
    let (a_cap, b, w2) = (params.market_size, params.private_effect, params.private_weight);
    let k = params.k_private();
    let f = 2.0 * a_cap * b / (9.0 * w2 - 2.0 * b * b);
    let per_firm =
        18.0 * a_cap * a_cap * k * (5.0 - 2.0 * k) / ((9.0 - 2.0 * k).powi(2) * (9.0 - 10.0 * k));
    let policy = PolicyVector::new(0.0, f, f);
    let market = cournot_duopoly(&params, &policy)?;
    Ok(EquilibriumSolution::new(
        MarketStructure::DuopolyPrivate,
        policy,
        market.quantities.to_vec(),
        market.profits.to_vec(),
        vec![per_firm, per_firm],
    ))
}

/// Post-merger monopoly choosing `(R, F1)` jointly; product 2 is shut down.
pub fn monopoly_equilibrium(params: &ModelParams) -> Result<EquilibriumSolution> {
    params.validate()?;
    params.require_common_interior()?;
    params.require_private_interior()?;
    let (k_r, k_f) = (params.k_common(), params.k_private());
    let denom = 2.0 - k_r - k_f;
    if denom <= 0.0 {
        return Err(Error::InteriorityViolated(format!("k_R + k_F = {} >= 2", k_r + k_f)));
    }
    let a_cap = params.market_size;
    let r = a_cap * params.common_effect / (params.common_weight * denom);
    let f = a_cap * params.private_effect / (params.private_weight * denom);
    let transfer = a_cap * a_cap * (k_r + k_f) / (2.0 * denom * denom);
    let policy = PolicyVector::new(r, f, 0.0);
    let market = monopoly_profit(params, &policy)?;
    Ok(EquilibriumSolution::new(
        MarketStructure::Monopoly,
        policy,
        vec![market.total_quantity],
        vec![market.profit],
        vec![transfer],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, b: f64) -> ModelParams {
        ModelParams::new(1.0, a, b, 9.0, 9.0).unwrap()
    }

    #[test]
    fn common_worked_point() {
        let eq = duopoly_common_equilibrium(&p(1.0, 1.0)).unwrap();
        assert!((eq.policy.common - 4.0 / 77.0).abs() < 1e-15);
        assert!((eq.total_transfers - 72.0 / 5929.0).abs() < 1e-15);
        // Total contributions equal the welfare loss.
        let loss = 9.0 * eq.policy.common.powi(2) / 2.0;
        assert!((eq.total_transfers - loss).abs() <= 1e-12 * loss);
        assert_eq!(eq.policy.private, [0.0, 0.0]);
    }

    #[test]
    fn private_worked_point() {
        let eq = duopoly_private_equilibrium(&p(1.0, 1.0)).unwrap();
        assert!((eq.policy.private[0] - 2.0 / 79.0).abs() < 1e-15);
        assert_eq!(eq.policy.private[0], eq.policy.private[1]);
        // 2 * 6966 / 443111
        assert!((eq.total_transfers - 13932.0 / 443111.0).abs() < 1e-15);
        assert!((eq.total_transfers - 0.031441).abs() < 1e-6);
    }

    #[test]
    fn monopoly_worked_points() {
        let eq = monopoly_equilibrium(&p(1.0, 0.0)).unwrap();
        assert!((eq.policy.common - 1.0 / 17.0).abs() < 1e-15);
        assert!((eq.total_transfers - 9.0 / 578.0).abs() < 1e-15);
        let joint = monopoly_equilibrium(&p(1.0, 1.0)).unwrap();
        assert!((joint.policy.common - 0.0625).abs() < 1e-15);
        assert!((joint.policy.private[0] - 0.0625).abs() < 1e-15);
        assert_eq!(joint.policy.private[1], 0.0);
    }

    #[test]
    fn zero_effectiveness_means_no_lobbying() {
        for eq in [
            duopoly_common_equilibrium(&p(0.0, 0.0)).unwrap(),
            duopoly_private_equilibrium(&p(0.0, 0.0)).unwrap(),
            monopoly_equilibrium(&p(0.0, 0.0)).unwrap(),
        ] {
            assert_eq!(eq.policy, PolicyVector::default());
            assert_eq!(eq.total_transfers, 0.0);
        }
    }

    #[test]
    fn interiority_rejected() {
        let bad = ModelParams::new(1.0, 1.0, 1.0, 4.5, 4.5).unwrap();
        assert!(matches!(duopoly_common_equilibrium(&bad), Err(Error::InteriorityViolated(_))));
        assert!(matches!(duopoly_private_equilibrium(&bad), Err(Error::InteriorityViolated(_))));
        assert!(matches!(monopoly_equilibrium(&bad), Err(Error::InteriorityViolated(_))));
    }

    #[test]
    fn common_regime_ignores_private_effect() {
        let a = duopoly_common_equilibrium(&p(1.0, 0.0)).unwrap();
        let b = duopoly_common_equilibrium(&ModelParams::new(1.0, 1.0, 5.0, 9.0, 1.0).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
