//! Reverse Hong-Ou-Mandel fringes: coincidences oscillate at twice the
//! classical frequency, and source distinguishability shows up as lost
//! visibility.

use std::f64::consts::TAU;

use hybrid_qudit::chip::{
    classical_fringe, fit_fringe_frequency, fringe_visibility, phase_grid, rhom_coincidence, rhom_fringe_noisy,
};

fn main() -> hybrid_qudit::Result<()> {
    let grid = phase_grid(0.0, TAU, 1001);
    let quantum: Vec<f64> = grid.iter().map(|&p| rhom_coincidence(p)).collect();
    let classical: Vec<f64> = grid.iter().map(|&p| classical_fringe(p)).collect();
    println!(
        "dominant frequency: coincidences {:.3}, classical {:.3} (cycles per 2π)",
        fit_fringe_frequency(&grid, &quantum)?,
        fit_fringe_frequency(&grid, &classical)?
    );
    for v in [0.99, 0.93, 0.90] {
        let samples = grid.iter().map(|&p| rhom_fringe_noisy(p, v)).collect::<Result<Vec<_>, _>>()?;
        println!("source visibility {v:.2} -> fitted {:.6}", fringe_visibility(&samples)?);
    }
    Ok(())
}
