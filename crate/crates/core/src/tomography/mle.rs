//! Iterative maximum-likelihood reconstruction.
//!
//! Fixed-point update `ρ ← N[R(ρ) ρ R(ρ)]` with
//! `R(ρ) = Σᵢ fᵢ / pᵢ(ρ) Πᵢ`, starting from `I/d`. The objective is
//! `Σᵢ fᵢ ln pᵢ(ρ)` where the frequencies `fᵢ` are normalized per setting, so
//! every setting with data carries equal weight and the objective scales with
//! the number of settings. When a step would lower the objective the update
//! operator is diluted towards the identity, `R' = (1 − α) I + α R`, halving
//! `α` until the objective no longer decreases.
//!
//! For undercomplete settings the maximizer is not unique; the returned state
//! is the fixed point reached from `I/d`.

use log::{debug, warn};

use super::{observed_frequencies, CountRecord, MeasurementSetting};
use crate::error::{Error, Result};
use crate::quantum::{c, CMatrix, Complex64, DensityMatrix};

/// Predicted probabilities below this are raised to it when the outcome was
/// observed, so `fᵢ/pᵢ` stays finite.
pub const PROBABILITY_FLOOR: f64 = 1e-14;

/// Smallest dilution weight tried before a step is declared stalled.
const MIN_DILUTION: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct MleOptions {
    pub max_iterations: usize,
    /// Stop once one accepted step raises the log-likelihood by less than this.
    pub convergence_threshold: f64,
    /// Initial weight `α ∈ (0, 1]` of `R` in each step; `1` is undiluted.
    pub dilution: f64,
    /// Keep the log-likelihood of every accepted iterate.
    pub record_history: bool,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self { max_iterations: 100_000, convergence_threshold: 1e-10, dilution: 1.0, record_history: false }
    }
}

impl MleOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::input("max_iterations must be positive"));
        }
        if !(self.convergence_threshold >= 0.0) || !self.convergence_threshold.is_finite() {
            return Err(Error::input("convergence_threshold must be a non-negative number"));
        }
        if !(self.dilution > 0.0 && self.dilution <= 1.0) {
            return Err(Error::input(format!("dilution {} is outside (0, 1]", self.dilution)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MleReconstruction {
    pub state: DensityMatrix,
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
    /// Log-likelihood of the starting point followed by every accepted iterate
    /// (empty unless requested).
    pub history: Vec<f64>,
    /// Number of times a step had to be diluted.
    pub dilution_halvings: usize,
    /// Number of (iteration, outcome) pairs where the probability floor applied.
    pub floor_hits: usize,
}

struct Term {
    /// Nonzero entries of the projector as (column-major index, value). With
    /// `Π` Hermitian, `Tr(Πρ) = Σₖ Re(conj(Πₖ) ρₖ)` over the same indices.
    /// Pauli eigenprojectors are mostly zeros, so this is much shorter than d².
    entries: Vec<(usize, Complex64)>,
    freq: f64,
}

struct Problem {
    dim: usize,
    terms: Vec<Term>,
}

impl Problem {
    fn probabilities(&self, rho: &CMatrix, out: &mut [f64]) {
        let r = rho.as_slice();
        for (t, slot) in self.terms.iter().zip(out.iter_mut()) {
            let mut acc = 0.0;
            for &(k, a) in &t.entries {
                let b = r[k];
                acc += a.re * b.re + a.im * b.im;
            }
            *slot = acc;
        }
    }

    fn log_likelihood(&self, probs: &[f64], floor_hits: &mut usize) -> f64 {
        let mut ll = 0.0;
        for (t, &p) in self.terms.iter().zip(probs) {
            let p = if p < PROBABILITY_FLOOR {
                *floor_hits += 1;
                PROBABILITY_FLOOR
            } else {
                p
            };
            ll += t.freq * p.ln();
        }
        ll
    }

    fn update_operator(&self, probs: &[f64]) -> CMatrix {
        let d = self.dim;
        let mut r = vec![c(0.0, 0.0); d * d];
        for (t, &p) in self.terms.iter().zip(probs) {
            let w = t.freq / p.max(PROBABILITY_FLOOR);
            for &(k, a) in &t.entries {
                r[k] += a * w;
            }
        }
        CMatrix::from_vec(d, d, r)
    }
}

fn build_problem(records: &[CountRecord], settings: &[MeasurementSetting]) -> Result<Problem> {
    if records.is_empty() {
        return Err(Error::input("no count records to reconstruct from"));
    }
    let freqs = observed_frequencies(records, settings)?;
    let total: f64 = freqs.iter().map(|f| f.2).sum();
    if !(total > 0.0) {
        return Err(Error::input("count records contain no counts"));
    }
    let dim = settings[freqs[0].0].dim();
    // outcomes never observed contribute neither to the likelihood nor to R
    let terms = freqs
        .iter()
        .filter(|f| f.2 > 0.0)
        .map(|&(si, k, f)| {
            let proj = settings[si].outcomes()[k].entries();
            if proj.nrows() != dim {
                return Err(Error::input("settings with data have different dimensions"));
            }
            let entries = proj.iter().copied().enumerate().filter(|(_, a)| a.re != 0.0 || a.im != 0.0).collect();
            Ok(Term { entries, freq: f })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Problem { dim, terms })
}

fn normalized_sandwich(r: &CMatrix, rho: &CMatrix) -> CMatrix {
    let m = r * rho * r;
    let h = (&m + m.adjoint()) * c(0.5, 0.0);
    let tr = h.trace().re;
    h / c(tr, 0.0)
}

/// Reconstructs the state most likely to have produced `records`.
pub fn mle_reconstruct(
    records: &[CountRecord],
    settings: &[MeasurementSetting],
    opts: &MleOptions,
) -> Result<MleReconstruction> {
    opts.validate()?;
    let problem = build_problem(records, settings)?;
    let d = problem.dim;
    let eye = CMatrix::identity(d, d);

    let mut rho = eye.clone() / c(d as f64, 0.0);
    let mut probs = vec![0.0; problem.terms.len()];
    let mut cand_probs = probs.clone();
    let mut floor_hits = 0;
    problem.probabilities(&rho, &mut probs);
    let mut ll = problem.log_likelihood(&probs, &mut floor_hits);
    let mut history = if opts.record_history { vec![ll] } else { Vec::new() };
    let mut halvings = 0;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        iterations += 1;
        let r = problem.update_operator(&probs);
        let mut alpha = opts.dilution;
        let accepted = loop {
            let step = if alpha >= 1.0 { r.clone() } else { &eye * c(1.0 - alpha, 0.0) + &r * c(alpha, 0.0) };
            let cand = normalized_sandwich(&step, &rho);
            problem.probabilities(&cand, &mut cand_probs);
            let mut hits = 0;
            let cand_ll = problem.log_likelihood(&cand_probs, &mut hits);
            if cand_ll >= ll {
                floor_hits += hits;
                break Some((cand, cand_ll));
            }
            alpha *= 0.5;
            halvings += 1;
            if alpha < MIN_DILUTION {
                break None;
            }
        };
        let Some((cand, cand_ll)) = accepted else {
            debug!("MLE step stalled after {iterations} iterations; treating as converged");
            converged = true;
            break;
        };
        let gain = cand_ll - ll;
        rho = cand;
        ll = cand_ll;
        std::mem::swap(&mut probs, &mut cand_probs);
        if opts.record_history {
            history.push(ll);
        }
        if gain < opts.convergence_threshold {
            converged = true;
            break;
        }
    }

    if floor_hits > 0 {
        warn!("probability floor {PROBABILITY_FLOOR:e} applied {floor_hits} times: observed outcomes the model deems impossible");
    }
    if !converged {
        debug!("MLE reached max_iterations = {} without converging", opts.max_iterations);
    }
    let state = DensityMatrix::from_numerical(rho)?;
    Ok(MleReconstruction {
        state,
        iterations,
        converged,
        log_likelihood: ll,
        history,
        dilution_halvings: halvings,
        floor_hits,
    })
}

/// Predicted probability `Tr(Πρ)` for each `(setting index, outcome index)` pair.
pub fn predicted_probabilities(
    rho: &DensityMatrix,
    settings: &[MeasurementSetting],
    pairs: &[(usize, usize)],
) -> Result<Vec<f64>> {
    pairs
        .iter()
        .map(|&(si, k)| crate::quantum::born_probability(rho, &settings[si].outcomes()[k]))
        .collect()
}
