//! Coalition optima and the contribution constraints they imply.
//!
//! In a coalition-proof equilibrium each firm must pay at least what the
//! policy-maker would gain by dealing only with the remaining firms, and the
//! firms together must cover the policy-maker's welfare loss. Both bounds are
//! computed here from grid-searched coalition optima, so the contribution
//! schedule never relies on a closed form.

use serde::{Deserialize, Serialize};

use super::grid::GridSearch;
use super::{ModelParams, PolicyVector};
use crate::error::{Error, Result};

/// Which policy components the policy-maker may move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolicyRegime {
    CommonOnly,
    PrivateOnly,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoalitionOptimum {
    /// Firm ids (1-based) left out of the coalition.
    pub excluded: Vec<usize>,
    pub policy: PolicyVector,
    pub objective_value: f64,
}

fn duopoly_profit(params: &ModelParams, policy: &PolicyVector, firm: usize) -> f64 {
    let (own, rival) = (policy.private[firm], policy.private[1 - firm]);
    let q = (params.market_size + params.common_effect * policy.common + params.private_effect * (2.0 * own - rival))
        / 3.0;
    q * q
}

fn members(excluded: &[usize]) -> [bool; 2] {
    [!excluded.contains(&1), !excluded.contains(&2)]
}

fn objective_for(params: &ModelParams, policy: &PolicyVector, members: [bool; 2]) -> f64 {
    let mut v = params.welfare(policy);
    for (firm, &m) in members.iter().enumerate() {
        if m {
            v += duopoly_profit(params, policy, firm);
        }
    }
    v
}

/// Policy-maker value when courted by the firms not in `excluded`.
pub fn coalition_objective(params: &ModelParams, policy: &PolicyVector, excluded: &[usize]) -> f64 {
    objective_for(params, policy, members(excluded))
}

pub fn coalition_optimum(params: &ModelParams, excluded: &[usize], regime: PolicyRegime) -> Result<CoalitionOptimum> {
    coalition_optimum_with(&GridSearch::default(), params, excluded, regime)
}

pub fn coalition_optimum_with(
    grid: &GridSearch,
    params: &ModelParams,
    excluded: &[usize],
    regime: PolicyRegime,
) -> Result<CoalitionOptimum> {
    params.validate()?;
    if let Some(bad) = excluded.iter().find(|&&id| id != 1 && id != 2) {
        return Err(Error::InvalidParams(format!("firm id {bad} is not in {{1, 2}}")));
    }
    let mut excluded = excluded.to_vec();
    excluded.sort_unstable();
    excluded.dedup();

    let to_policy = |x: &[f64]| match regime {
        PolicyRegime::CommonOnly => PolicyVector::new(x[0], 0.0, 0.0),
        PolicyRegime::PrivateOnly => PolicyVector::new(0.0, x[0], x[1]),
        PolicyRegime::Both => PolicyVector::new(x[0], x[1], x[2]),
    };
    let (lo, hi) = GridSearch::bracket(params);
    let m = members(&excluded);
    // One closure per regime keeps the inner loop free of branching.
    let opt = match regime {
        PolicyRegime::CommonOnly => {
            grid.maximize(1, lo, hi, |x| objective_for(params, &PolicyVector::new(x[0], 0.0, 0.0), m))
        }
        PolicyRegime::PrivateOnly => {
            grid.maximize(2, lo, hi, |x| objective_for(params, &PolicyVector::new(0.0, x[0], x[1]), m))
        }
        PolicyRegime::Both => grid.maximize(3, lo, hi, |x| objective_for(params, &PolicyVector::new(x[0], x[1], x[2]), m)),
    };
    Ok(CoalitionOptimum { excluded, policy: to_policy(&opt.argmax), objective_value: opt.value })
}

/// Grid optimum of the merged firm's profit plus welfare over `(R, F1)`,
/// with product 2 shut down.
pub fn monopoly_optimum_with(grid: &GridSearch, params: &ModelParams) -> Result<CoalitionOptimum> {
    params.validate()?;
    let objective = |x: &[f64]| {
        let policy = PolicyVector::new(x[0], x[1], 0.0);
        let q = (params.market_size + params.common_effect * x[0] + params.private_effect * x[1]) / 2.0;
        q * q + params.welfare(&policy)
    };
    let (lo, hi) = GridSearch::bracket(params);
    let opt = grid.maximize(2, lo, hi, objective);
    Ok(CoalitionOptimum {
        excluded: vec![],
        policy: PolicyVector::new(opt.argmax[0], opt.argmax[1], 0.0),
        objective_value: opt.value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransferRegime {
    /// Lobbying over `R` only (`b = 0`).
    Common,
    /// Lobbying over `F1, F2` only (`a = 0`).
    Private,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Binding {
    /// The joint welfare-loss constraint binds; split is symmetric.
    Grand,
    /// Each firm's own punishment constraint binds.
    Individual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferBounds {
    pub regime: TransferRegime,
    pub equilibrium_policy: PolicyVector,
    /// Lower bound on each firm's contribution from the one-firm coalitions.
    pub individual: [f64; 2],
    /// Lower bound on total contributions (welfare loss at the equilibrium policy).
    pub grand: f64,
    pub binding: Binding,
    pub transfers: [f64; 2],
    pub total: f64,
    /// Grid optima of the coalitions excluding firm 1 and firm 2.
    pub punishment_policies: [PolicyVector; 2],
}

pub fn transfer_bounds(params: &ModelParams, regime: TransferRegime) -> Result<TransferBounds> {
    transfer_bounds_with(&GridSearch::fine(), params, regime)
}

pub fn transfer_bounds_with(grid: &GridSearch, params: &ModelParams, regime: TransferRegime) -> Result<TransferBounds> {
    params.validate()?;
    let (params, policy_regime) = match regime {
        TransferRegime::Common => {
            let p = params.without_private();
            p.require_common_interior()?;
            (p, PolicyRegime::CommonOnly)
        }
        TransferRegime::Private => {
            let p = params.without_common();
            p.require_private_interior()?;
            (p, PolicyRegime::PrivateOnly)
        }
    };

    let grand_opt = coalition_optimum_with(grid, &params, &[], policy_regime)?;
    let star = grand_opt.policy;
    let mut individual = [0.0; 2];
    let mut punishment_policies = [PolicyVector::default(); 2];
    for firm in 1..=2 {
        let alt = coalition_optimum_with(grid, &params, &[firm], policy_regime)?;
        let at_star = coalition_objective(&params, &star, &[firm]);
        individual[firm - 1] = (alt.objective_value - at_star).max(0.0);
        punishment_policies[firm - 1] = alt.policy;
    }
    let welfare_max = coalition_optimum_with(grid, &params, &[1, 2], policy_regime)?.objective_value;
    let grand = (welfare_max - params.welfare(&star)).max(0.0);

    let (binding, transfers) = if individual[0] + individual[1] >= grand {
        (Binding::Individual, individual)
    } else {
        let half = grand / 2.0;
        let t = if half >= individual[0] && half >= individual[1] {
            [half, half]
        } else if individual[0] > individual[1] {
            [individual[0], grand - individual[0]]
        } else {
            [grand - individual[1], individual[1]]
        };
        (Binding::Grand, t)
    };
    Ok(TransferBounds {
        regime,
        equilibrium_policy: star,
        individual,
        grand,
        binding,
        transfers,
        total: transfers[0] + transfers[1],
        punishment_policies,
    })
}
