//! Independent reference computations for the integration tests. Nothing
//! here calls into the library: states are plain real arrays indexed as
//! `8·mode_s + 4·mode_i + 2·path_s + path_i`.
#![allow(dead_code)]

pub const HALF: f64 = 0.5;

/// Hyperentangled state: 1/2 on |0000⟩, |0011⟩, |1100⟩, |1111⟩.
pub fn hyper_amplitudes() -> [f64; 16] {
    let mut a = [0.0; 16];
    for i in [0, 3, 12, 15] {
        a[i] = HALF;
    }
    a
}

const FLIP_IDLER_PATH: usize = 0b0001;
const FLIP_IDLER_MODE: usize = 0b0100;

fn cnot_index(i: usize) -> usize {
    let (ms, mi, ps, pi) = (i >> 3 & 1, i >> 2 & 1, i >> 1 & 1, i & 1);
    8 * (ms ^ ps) + 4 * (mi ^ pi) + 2 * ps + pi
}

/// Applies an index permutation to a real state vector.
fn permute(a: &[f64; 16], f: impl Fn(usize) -> usize) -> [f64; 16] {
    let mut out = [0.0; 16];
    for i in 0..16 {
        out[f(i)] = a[i];
    }
    out
}

/// `Σ_s w_s |ψ_s⟩⟨ψ_s|` over the four flip scenarios on the idler photon,
/// each optionally followed by the per-photon CNOT.
pub fn mixed_scenarios(psi: &[f64; 16], p: f64, cnot: bool) -> [[f64; 16]; 16] {
    let weights = [(1.0 - p) * (1.0 - p), p * (1.0 - p), p * (1.0 - p), p * p];
    let masks = [0, FLIP_IDLER_PATH, FLIP_IDLER_MODE, FLIP_IDLER_PATH | FLIP_IDLER_MODE];
    let mut rho = [[0.0; 16]; 16];
    for (w, mask) in weights.iter().zip(masks) {
        let mut v = permute(psi, |i| i ^ mask);
        if cnot {
            v = permute(&v, cnot_index);
        }
        for i in 0..16 {
            for j in 0..16 {
                rho[i][j] += w * v[i] * v[j];
            }
        }
    }
    rho
}

/// Path-pair state after keeping `keep(mode_s, mode_i)` mode outcomes, and
/// the kept probability. Not renormalized.
pub fn path_block(rho: &[[f64; 16]; 16], keep: impl Fn(usize, usize) -> bool) -> ([[f64; 4]; 4], f64) {
    let mut out = [[0.0; 4]; 4];
    for ms in 0..2 {
        for mi in 0..2 {
            if !keep(ms, mi) {
                continue;
            }
            for a in 0..4 {
                for b in 0..4 {
                    out[a][b] += rho[8 * ms + 4 * mi + a][8 * ms + 4 * mi + b];
                }
            }
        }
    }
    let tr = (0..4).map(|k| out[k][k]).sum();
    (out, tr)
}

/// ⟨Φ⁺|σ|Φ⁺⟩ / Tr σ.
pub fn phi_plus_fidelity(sigma: &[[f64; 4]; 4], trace: f64) -> f64 {
    (sigma[0][0] + sigma[0][3] + sigma[3][0] + sigma[3][3]) / 2.0 / trace
}

/// Brute-force fidelities `(undistilled, distilled, success)` for bit-flip
/// probability `p` on the resource `psi`, keeping mode-correlated events.
pub fn distillation_point(psi: &[f64; 16], p: f64) -> (f64, f64, f64) {
    let (plain, tr) = path_block(&mixed_scenarios(psi, p, false), |_, _| true);
    let (kept, success) = path_block(&mixed_scenarios(psi, p, true), |a, b| a == b);
    (phi_plus_fidelity(&plain, tr), phi_plus_fidelity(&kept, success), success)
}

/// Same for a mixed resource given as `λ|ψ⟩⟨ψ| + (1−λ) I/16`: the
/// identity part is invariant under every flip and the CNOT.
pub fn noisy_distillation_point(psi: &[f64; 16], lambda: f64, p: f64) -> (f64, f64) {
    let mut plain = mixed_scenarios(psi, p, false);
    let mut cnot = mixed_scenarios(psi, p, true);
    for m in [&mut plain, &mut cnot] {
        for i in 0..16 {
            for j in 0..16 {
                m[i][j] *= lambda;
            }
            m[i][i] += (1.0 - lambda) / 16.0;
        }
    }
    let (a, ta) = path_block(&plain, |_, _| true);
    let (b, tb) = path_block(&cnot, |x, y| x == y);
    (phi_plus_fidelity(&a, ta), phi_plus_fidelity(&b, tb))
}

/// Trapezoidal average of `f` sampled at `xs` over `[xs[0], xs[last]]`.
pub fn trapezoid_mean(xs: &[f64], ys: &[f64]) -> f64 {
    let area: f64 = (1..xs.len()).map(|k| 0.5 * (xs[k] - xs[k - 1]) * (ys[k] + ys[k - 1])).sum();
    area / (xs[xs.len() - 1] - xs[0])
}

/// `⟨ψ|ρ|ψ⟩` with `ρ` given by entries `(i, j) -> (re, im)` and complex `ψ`.
pub fn overlap(psi: &[(f64, f64)], rho: impl Fn(usize, usize) -> (f64, f64)) -> f64 {
    let mut acc = 0.0;
    for i in 0..psi.len() {
        for j in 0..psi.len() {
            let (ar, ai) = psi[i];
            let (br, bi) = psi[j];
            let (rr, ri) = rho(i, j);
            // conj(a) · r · b, real part
            let (xr, xi) = (ar * rr + ai * ri, ar * ri - ai * rr);
            acc += xr * br - xi * bi;
        }
    }
    acc
}

/// Von Neumann entropy in `base` from a list of eigenvalues.
pub fn shannon(probs: &[f64], base: f64) -> f64 {
    -probs.iter().filter(|p| **p > 0.0).map(|p| p * p.log(base)).sum::<f64>()
}
