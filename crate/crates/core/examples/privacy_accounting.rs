//! zCDP to (ε, δ) conversion, the largest ρ for a target, and the tight
//! Gaussian-mechanism δ.

use dp_lumberjack::privacy::{gaussian_tight_delta, max_rho_for, zcdp_to_dp, EpsilonDelta, ZcdpBudget};

fn main() -> dp_lumberjack::Result<()> {
    println!("{:>8} {:>8} {:>14}", "rho", "eps", "delta");
    for &rho in &[0.01, 0.05, 0.1, 0.5, 1.0] {
        for &eps in &[1.0, 2.0, 4.0] {
            println!("{rho:>8} {eps:>8} {:>14.6e}", zcdp_to_dp(ZcdpBudget::new(rho)?, eps)?);
        }
    }

    println!();
    for &(eps, delta) in &[(0.5, 5e-7), (1.0, 1e-6), (2.0, 1e-6), (4.0, 1e-8)] {
        let rho = max_rho_for(EpsilonDelta::new(eps, delta)?)?;
        println!("largest rho for ({eps}, {delta:e})-DP: {:.6}", rho.rho());
    }

    println!();
    for &sigma in &[1.0, 2.0, 4.224678889326835, 8.0] {
        println!("Gaussian sigma={sigma:<18} eps=1  delta={:.6e}", gaussian_tight_delta(sigma, 1.0));
    }
    Ok(())
}
