//! Two-firm Cournot competition with lobbying over regulation.
//!
//! Firms face inverse demand `P_i = A + a R + b F_i - Q`, where `R` is a
//! common regulation level benefiting the whole industry and `F_i` a private
//! component favouring firm `i` alone. A policy-maker trades off the firms'
//! contributions against the quadratic welfare loss
//! `w(P) = -w1 R^2 / 2 - w2 (F1^2 + F2^2) / 2`. Policy and contributions are
//! set in a truthful menu-auction equilibrium; quantities are then set
//! competitively.
//!
//! The closed-form equilibria live in [`equilibrium`]; [`grid`] holds the
//! derivative-free maximizer used both by [`coalition`] and as an oracle for
//! the closed forms.

pub mod coalition;
pub mod equilibrium;
pub mod grid;
pub mod market;
pub mod statics;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use coalition::{coalition_optimum, transfer_bounds, Binding, CoalitionOptimum, PolicyRegime, TransferBounds, TransferRegime};
pub use equilibrium::{duopoly_common_equilibrium, duopoly_private_equilibrium, monopoly_equilibrium};
pub use market::{cournot_duopoly, monopoly_profit, CournotOutcome, MonopolyOutcome};
pub use statics::{merger_comparative_statics, verify_sweep, MergerStatics, SweepConfig, SweepReport};

/// Interior solutions require `k < 2/9` for each lobbying dimension.
pub const INTERIORITY_BOUND: f64 = 2.0 / 9.0;

/// Primitive parameters of the lobbying game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Demand intercept `A`.
    pub market_size: f64,
    /// Effectiveness `a` of the common regulation.
    pub common_effect: f64,
    /// Effectiveness `b` of the private regulation.
    pub private_effect: f64,
    /// Welfare weight `w1` on the common dimension.
    pub common_weight: f64,
    /// Welfare weight `w2` on each private dimension.
    pub private_weight: f64,
}

impl ModelParams {
    pub fn new(
        market_size: f64,
        common_effect: f64,
        private_effect: f64,
        common_weight: f64,
        private_weight: f64,
    ) -> Result<Self> {
        let p = ModelParams { market_size, common_effect, private_effect, common_weight, private_weight };
        p.validate()?;
        Ok(p)
    }

    /// Checks finiteness and signs. Interiority is checked by each operation
    /// against the dimensions it actually uses.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("market_size", self.market_size),
            ("common_effect", self.common_effect),
            ("private_effect", self.private_effect),
            ("common_weight", self.common_weight),
            ("private_weight", self.private_weight),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} is not finite")));
            }
        }
        if self.market_size <= 0.0 {
            return Err(Error::InvalidParams("market_size must be > 0".into()));
        }
        if self.common_effect < 0.0 || self.private_effect < 0.0 {
            return Err(Error::InvalidParams("lobbying effectiveness must be >= 0".into()));
        }
        if self.common_weight <= 0.0 || self.private_weight <= 0.0 {
            return Err(Error::InvalidParams("welfare weights must be > 0".into()));
        }
        Ok(())
    }

    /// `k_R = a^2 / w1`.
    pub fn k_common(&self) -> f64 {
        self.common_effect * self.common_effect / self.common_weight
    }

    /// `k_F = b^2 / w2`.
    pub fn k_private(&self) -> f64 {
        self.private_effect * self.private_effect / self.private_weight
    }

    pub fn without_private(mut self) -> Self {
        self.private_effect = 0.0;
        self
    }

    pub fn without_common(mut self) -> Self {
        self.common_effect = 0.0;
        self
    }

    pub(crate) fn require_common_interior(&self) -> Result<()> {
        let k = self.k_common();
        if k >= INTERIORITY_BOUND {
            return Err(Error::InteriorityViolated(format!("k_R = {k} >= 2/9")));
        }
        Ok(())
    }

    pub(crate) fn require_private_interior(&self) -> Result<()> {
        let k = self.k_private();
        if k >= INTERIORITY_BOUND {
            return Err(Error::InteriorityViolated(format!("k_F = {k} >= 2/9")));
        }
        Ok(())
    }

    /// Policy-maker welfare `w(P)`.
    pub fn welfare(&self, policy: &PolicyVector) -> f64 {
        -self.common_weight * policy.common * policy.common / 2.0
            - self.private_weight * (policy.private[0].powi(2) + policy.private[1].powi(2)) / 2.0
    }
}

/// Regulation levels `{R, F1, F2}`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PolicyVector {
    pub common: f64,
    pub private: [f64; 2],
}

impl PolicyVector {
    pub fn new(common: f64, f1: f64, f2: f64) -> Self {
        PolicyVector { common, private: [f1, f2] }
    }

    pub fn is_finite(&self) -> bool {
        self.common.is_finite() && self.private.iter().all(|f| f.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MarketStructure {
    DuopolyCommon,
    DuopolyPrivate,
    Monopoly,
}

/// Policy, output, profit and contributions in one equilibrium. Vectors are
/// indexed by firm; the monopoly has a single entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolution {
    pub structure: MarketStructure,
    pub policy: PolicyVector,
    pub quantities: Vec<f64>,
    pub profits: Vec<f64>,
    pub transfers: Vec<f64>,
    pub total_transfers: f64,
}

impl EquilibriumSolution {
    pub(crate) fn new(
        structure: MarketStructure,
        policy: PolicyVector,
        quantities: Vec<f64>,
        profits: Vec<f64>,
        transfers: Vec<f64>,
    ) -> Self {
        let total_transfers = transfers.iter().sum();
        EquilibriumSolution { structure, policy, quantities, profits, transfers, total_transfers }
    }
}
