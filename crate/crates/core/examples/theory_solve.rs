//! Lobbying equilibria before and after a merger, plus a random sweep
//! against the grid-search oracle.
//!
//! cargo run --release --example theory_solve

use mergelobby::theory::{
    duopoly_common_equilibrium, duopoly_private_equilibrium, merger_comparative_statics, monopoly_equilibrium,
    transfer_bounds, verify_sweep, ModelParams, SweepConfig, TransferRegime,
};

fn main() -> mergelobby::Result<()> {
    let params = ModelParams::new(1.0, 1.0, 1.0, 9.0, 9.0)?;
    println!("k_R = {:.4}, k_F = {:.4}", params.k_common(), params.k_private());

    let common = duopoly_common_equilibrium(&params)?;
    let private = duopoly_private_equilibrium(&params)?;
    let monopoly = monopoly_equilibrium(&params)?;
    for (label, eq) in [("duopoly, R only", &common), ("duopoly, F only", &private), ("monopoly", &monopoly)] {
        println!(
            "{label:16} R = {:.6}  F = [{:.6}, {:.6}]  transfers = {:.6}",
            eq.policy.common, eq.policy.private[0], eq.policy.private[1], eq.total_transfers
        );
    }

    // Contribution floors from the punishment coalitions, solved on the grid.
    for regime in [TransferRegime::Common, TransferRegime::Private] {
        let b = transfer_bounds(&params, regime)?;
        println!(
            "{regime:?}: individual floors [{:.6}, {:.6}], welfare loss {:.6}, binding {:?}",
            b.individual[0], b.individual[1], b.grand, b.binding
        );
    }

    let s = merger_comparative_statics(&params)?;
    for (label, c) in [("R", &s.common), ("F1", &s.private)] {
        println!(
            "{label:2} duopoly {:.6} -> monopoly {:.6}; transfers {:.6} -> {:.6}; holds {}",
            c.duopoly_policy, c.monopoly_policy, c.duopoly_transfers, c.monopoly_transfers, c.holds
        );
    }

    let report = verify_sweep(&SweepConfig { draws: 25, ..SweepConfig::default() })?;
    println!(
        "sweep of {} draws: max gap {:.2e}, statics hold {}/{} (R) and {}/{} (F)",
        report.draws,
        report.max_gap,
        report.common_statics_pass,
        report.draws,
        report.private_statics_pass,
        report.draws
    );
    Ok(())
}
