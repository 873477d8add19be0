//! Canonical two-photon states and their entanglement entropies.

use hybrid_qudit::quantum::{average_entropy, entanglement_entropy, single_qubit_bipartitions};
use hybrid_qudit::states::{ghz4_state, hyperentangled_state, MODE_SIGNAL, PATH_SIGNAL, QUBIT_DIMS};

fn main() -> hybrid_qudit::Result<()> {
    let photon = [MODE_SIGNAL, PATH_SIGNAL];
    let cuts = single_qubit_bipartitions(4);
    for (name, psi) in [("GHZ4", ghz4_state()), ("hyperentangled", hyperentangled_state())] {
        let rho = psi.to_density();
        let nonzero: Vec<String> = (0..16)
            .filter(|&i| psi.amplitude(i).norm() > 0.0)
            .map(|i| format!("|{i:04b}⟩ {:.4}", psi.amplitude(i).re))
            .collect();
        println!("{name}: {}", nonzero.join(" + "));
        println!(
            "  photon entropy (base 4) {:.4}, mean single-qubit entropy (base 2) {:.4}",
            entanglement_entropy(&rho, &QUBIT_DIMS, &photon, 4.0)?,
            average_entropy(&rho, &QUBIT_DIMS, &cuts, 2.0)?
        );
    }
    Ok(())
}
