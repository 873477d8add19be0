//! Poissonian bootstrap error bars on a reconstructed fidelity, and their
//! 1/√N scaling with the number of counts.

use hybrid_qudit::quantum::fidelity_pure;
use hybrid_qudit::states::{bell_state, mix_with_white_noise, BellKind};
use hybrid_qudit::tomography::{
    bootstrap_estimate, complete_pauli_set, mle_reconstruct, simulate_counts, BootstrapOptions, MleOptions,
};

fn main() -> hybrid_qudit::Result<()> {
    let phi = bell_state(BellKind::PhiPlus);
    let rho = mix_with_white_noise(&phi.to_density(), 0.9)?;
    let settings = complete_pauli_set(2)?;
    let mle = MleOptions::default();
    for shots in [1_000, 4_000, 16_000] {
        let records = simulate_counts(&rho, &settings, shots, 1)?;
        let est = bootstrap_estimate(
            &records,
            |r| fidelity_pure(&mle_reconstruct(r, &settings, &mle)?.state, &phi),
            &BootstrapOptions::new(200, 99),
        )?;
        println!(
            "{shots:>6} shots: F = {:.4} ± {:.4} ({} resamples{})",
            est.mean,
            est.standard_error,
            est.resamples,
            if est.converged { ", spread settled" } else { "" }
        );
    }
    Ok(())
}
