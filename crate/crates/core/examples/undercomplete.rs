//! Reconstruction from projector sets that do not span the full operator
//! space. The result reproduces every measured probability, but directions
//! outside the measured span are fixed only by the starting point.

use hybrid_qudit::quantum::fidelity_pure;
use hybrid_qudit::states::hyperentangled_state;
use hybrid_qudit::tomography::{
    complete_pauli_set, default_restricted_set, expected_counts, gauge_freedom, measurement_rank, mle_reconstruct,
    predicted_probabilities, xz_pauli_set, MleOptions,
};

fn main() -> hybrid_qudit::Result<()> {
    let psi = hyperentangled_state();
    let rho = psi.to_density();
    for (name, settings) in
        [("complete", complete_pauli_set(4)?), ("no mode Y", default_restricted_set()), ("X/Z only", xz_pauli_set(4)?)]
    {
        let records = expected_counts(&rho, &settings, 10_000_000)?;
        let rec = mle_reconstruct(&records, &settings, &MleOptions::default())?;
        let pairs: Vec<(usize, usize)> =
            settings.iter().enumerate().flat_map(|(i, s)| (0..s.outcomes().len()).map(move |k| (i, k))).collect();
        let want = predicted_probabilities(&rho, &settings, &pairs)?;
        let got = predicted_probabilities(&rec.state, &settings, &pairs)?;
        let worst = want.iter().zip(&got).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!(
            "{name:>9}: {:>2} settings, rank {:>3}, gauge freedom {:>3}, worst |Δp| {worst:.1e}, fidelity {:.4}",
            settings.len(),
            measurement_rank(&settings)?,
            gauge_freedom(&settings)?,
            fidelity_pure(&rec.state, &psi)?
        );
    }
    Ok(())
}
