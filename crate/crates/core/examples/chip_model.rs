//! Pumping the four sources in different combinations, with and without
//! partial distinguishability between them.

use hybrid_qudit::chip::{biphoton_state, PumpConfig, SourceModel};
use hybrid_qudit::quantum::fidelity_pure;
use hybrid_qudit::states::{ghz4_state, hyperentangled_state};

fn main() -> hybrid_qudit::Result<()> {
    for v in [1.0, 0.95, 0.9, 0.5] {
        let src = SourceModel::uniform(v)?;
        let ghz = biphoton_state(&PumpConfig::ghz4(), &src)?;
        let he = biphoton_state(&PumpConfig::hyperentangled(), &src)?;
        println!(
            "V = {v:.2}: GHZ4 fidelity {:.4} (purity {:.4}), hyperentangled fidelity {:.4} (purity {:.4})",
            fidelity_pure(&ghz, &ghz4_state())?,
            ghz.purity(),
            fidelity_pure(&he, &hyperentangled_state())?,
            he.purity()
        );
    }
    // one weak source: the pair amplitude goes as the square of the pump amplitude
    let src = SourceModel::ideal().with_efficiency([1.0, 1.0, 1.0, 0.5])?;
    let he = biphoton_state(&PumpConfig::hyperentangled(), &src)?;
    println!("one source at half efficiency: fidelity {:.4}", fidelity_pure(&he, &hyperentangled_state())?);
    Ok(())
}
