use std::collections::HashMap;
use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::MeasurementSetting;
use crate::error::{Error, Result};
use crate::quantum::{born_probability, DensityMatrix};

/// Coincidence counts for one outcome of one setting.
///
/// `shots` is the number of post-selected pair events for the setting. Under
/// Poisson sampling the realized total may exceed the nominal value, in which
/// case `shots` is raised to the realized total.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub setting_id: String,
    pub outcome_index: usize,
    pub counts: u64,
    pub shots: u64,
}

/// Draws `Poisson(mean)`; a zero mean gives zero.
pub(crate) fn poisson_draw(mean: f64, rng: &mut ChaCha8Rng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive finite mean");
    dist.sample(rng) as u64
}

/// Poisson counts with mean `shots · Tr(Π ρ)` for every outcome of every
/// setting, in setting order then outcome order. Deterministic in `seed`.
pub fn simulate_counts(
    rho: &DensityMatrix,
    settings: &[MeasurementSetting],
    shots: u64,
    seed: u64,
) -> Result<Vec<CountRecord>> {
    if shots == 0 {
        return Err(Error::input("shots must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    for setting in settings {
        let start = records.len();
        let mut realized = 0u64;
        for (k, proj) in setting.outcomes().iter().enumerate() {
            let p = born_probability(rho, proj)?;
            let n = poisson_draw(shots as f64 * p, &mut rng);
            realized += n;
            records.push(CountRecord { setting_id: setting.id().to_string(), outcome_index: k, counts: n, shots });
        }
        let setting_shots = shots.max(realized);
        for r in &mut records[start..] {
            r.shots = setting_shots;
        }
    }
    Ok(records)
}

/// Noise-free counts `round(shots · Tr(Π ρ))`. As with sampled counts, a
/// setting whose rounded total exceeds `shots` records that total instead.
pub fn expected_counts(rho: &DensityMatrix, settings: &[MeasurementSetting], shots: u64) -> Result<Vec<CountRecord>> {
    if shots == 0 {
        return Err(Error::input("shots must be positive"));
    }
    let mut records = Vec::new();
    for setting in settings {
        let start = records.len();
        let mut total = 0u64;
        for (k, proj) in setting.outcomes().iter().enumerate() {
            let n = (shots as f64 * born_probability(rho, proj)?).round() as u64;
            total += n;
            records.push(CountRecord { setting_id: setting.id().to_string(), outcome_index: k, counts: n, shots });
        }
        for r in &mut records[start..] {
            r.shots = shots.max(total);
        }
    }
    Ok(records)
}

/// Records grouped by setting index, as `(outcome_index, counts)` plus the
/// setting's shot count. Fails on unknown settings/outcomes, duplicate
/// records, or inconsistent shot counts.
pub(crate) struct GroupedCounts {
    pub per_setting: Vec<Option<(Vec<u64>, u64)>>,
}

pub(crate) fn group_records(records: &[CountRecord], settings: &[MeasurementSetting]) -> Result<GroupedCounts> {
    let index: HashMap<&str, usize> = settings.iter().enumerate().map(|(i, s)| (s.id(), i)).collect();
    let mut per_setting: Vec<Option<(Vec<u64>, u64)>> = vec![None; settings.len()];
    let mut seen: Vec<Vec<bool>> = settings.iter().map(|s| vec![false; s.outcomes().len()]).collect();
    for r in records {
        let &si = index
            .get(r.setting_id.as_str())
            .ok_or_else(|| Error::input(format!("record references unknown setting {:?}", r.setting_id)))?;
        let n_out = settings[si].outcomes().len();
        if r.outcome_index >= n_out {
            return Err(Error::input(format!(
                "record references outcome {} of setting {:?}, which has {n_out} outcomes",
                r.outcome_index, r.setting_id
            )));
        }
        if r.shots == 0 {
            return Err(Error::input(format!("record for setting {:?} has zero shots", r.setting_id)));
        }
        if r.counts > r.shots {
            return Err(Error::input(format!(
                "record for setting {:?} outcome {} has {} counts but only {} shots",
                r.setting_id, r.outcome_index, r.counts, r.shots
            )));
        }
        if std::mem::replace(&mut seen[si][r.outcome_index], true) {
            return Err(Error::input(format!(
                "duplicate record for setting {:?} outcome {}",
                r.setting_id, r.outcome_index
            )));
        }
        let entry = per_setting[si].get_or_insert_with(|| (vec![0; n_out], r.shots));
        if entry.1 != r.shots {
            return Err(Error::input(format!("setting {:?} has inconsistent shot counts", r.setting_id)));
        }
        entry.0[r.outcome_index] = r.counts;
    }
    for (si, group) in per_setting.iter().enumerate() {
        if let Some((counts, shots)) = group {
            let total: u64 = counts.iter().sum();
            if total > *shots {
                return Err(Error::input(format!(
                    "setting {:?} has {total} counts in total but only {shots} shots",
                    settings[si].id()
                )));
            }
        }
    }
    Ok(GroupedCounts { per_setting })
}

/// Observed frequency of every outcome of every setting that has data:
/// `(setting index, outcome index, frequency)`.
///
/// Complete settings are normalized by their realized total counts; settings
/// whose outcomes do not sum to the identity are normalized by `shots`.
pub fn observed_frequencies(
    records: &[CountRecord],
    settings: &[MeasurementSetting],
) -> Result<Vec<(usize, usize, f64)>> {
    let grouped = group_records(records, settings)?;
    let mut out = Vec::new();
    for (si, group) in grouped.per_setting.iter().enumerate() {
        let Some((counts, shots)) = group else { continue };
        let total: u64 = counts.iter().sum();
        let denom = if settings[si].is_complete() { total } else { *shots };
        if denom == 0 {
            continue;
        }
        for (k, &n) in counts.iter().enumerate() {
            out.push((si, k, n as f64 / denom as f64));
        }
    }
    Ok(out)
}

/// `Σ sign(outcome) · counts / Σ counts` for a `±1`-valued observable, using
/// the first setting whose outcomes all lie in eigenspaces of `observable`.
pub fn expectation_from_counts(
    records: &[CountRecord],
    settings: &[MeasurementSetting],
    observable: &crate::quantum::ObservableOperator,
) -> Result<f64> {
    let dim = observable.dim();
    let o = observable.entries();
    let square = o * o;
    if (square - crate::quantum::CMatrix::identity(dim, dim)).camax() > 1e-9 {
        return Err(Error::input("observable does not have ±1 eigenvalues"));
    }
    let grouped = group_records(records, settings)?;
    for (si, setting) in settings.iter().enumerate() {
        if setting.dim() != dim {
            continue;
        }
        let signs = match outcome_eigenvalues(setting, observable) {
            Some(s) => s,
            None => continue,
        };
        let Some((counts, _)) = &grouped.per_setting[si] else { continue };
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::UndefinedExpectation(format!("setting {:?} has zero total counts", setting.id())));
        }
        let signed: f64 = counts.iter().zip(&signs).map(|(&n, &s)| s * n as f64).sum();
        return Ok(signed / total as f64);
    }
    Err(Error::input(format!(
        "no setting with data measures the eigenbasis of {}",
        observable.label().unwrap_or("the observable")
    )))
}

fn outcome_eigenvalues(setting: &MeasurementSetting, observable: &crate::quantum::ObservableOperator) -> Option<Vec<f64>> {
    let o = observable.entries();
    let mut signs = Vec::with_capacity(setting.outcomes().len());
    for proj in setting.outcomes() {
        let p = proj.entries();
        let weight = proj.rank_weight();
        if weight < 1e-12 {
            return None;
        }
        let lambda = crate::quantum::trace_of_product(o, p).re / weight;
        let sign = if lambda >= 0.0 { 1.0 } else { -1.0 };
        if (o * p - p * crate::quantum::c(sign, 0.0)).camax() > 1e-9 {
            return None;
        }
        signs.push(sign);
    }
    Some(signs)
}

pub const COUNT_CSV_HEADER: &str = "setting_id,outcome_index,counts,shots";

/// Writes the count-record CSV (`setting_id,outcome_index,counts,shots`, LF).
pub fn write_count_csv<W: Write>(writer: W, records: &[CountRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_count_csv<R: Read>(reader: R) -> Result<Vec<CountRecord>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let found: Vec<&str> = headers.iter().collect();
    if found.join(",") != COUNT_CSV_HEADER {
        return Err(Error::input(format!("count file header {:?}, expected {COUNT_CSV_HEADER:?}", found.join(","))));
    }
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{pauli_string, Projector, StateVector};
    use crate::states::{bell_state, BellKind};
    use crate::tomography::{complete_pauli_set, pauli_setting};

    fn z_setting() -> MeasurementSetting {
        pauli_setting("Z").unwrap()
    }

    #[test]
    fn impossible_outcome_never_fires() {
        let rho = StateVector::basis(2, 0).unwrap().to_density();
        for seed in 0..20 {
            let recs = simulate_counts(&rho, &[z_setting()], 1000, seed).unwrap();
            assert_eq!(recs[1].counts, 0);
        }
    }

    #[test]
    fn simulation_is_deterministic_in_seed() {
        let rho = DensityMatrix::maximally_mixed(4);
        let settings = complete_pauli_set(2).unwrap();
        let a = simulate_counts(&rho, &settings, 5000, 11).unwrap();
        let b = simulate_counts(&rho, &settings, 5000, 11).unwrap();
        let c = simulate_counts(&rho, &settings, 5000, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn poisson_counts_stay_within_five_sigma() {
        let rho = DensityMatrix::maximally_mixed(2);
        let recs = simulate_counts(&rho, &[z_setting()], 1_000_000, 3).unwrap();
        let sigma = 500_000f64.sqrt();
        for r in &recs {
            assert!((r.counts as f64 - 500_000.0).abs() < 5.0 * sigma, "{}", r.counts);
            assert!(r.shots >= 1_000_000);
        }
    }

    #[test]
    fn shots_cover_realized_totals() {
        let rho = DensityMatrix::maximally_mixed(4);
        let recs = simulate_counts(&rho, &complete_pauli_set(2).unwrap(), 100, 5).unwrap();
        for chunk in recs.chunks(4) {
            let total: u64 = chunk.iter().map(|r| r.counts).sum();
            assert!(chunk.iter().all(|r| r.shots >= total && r.shots == chunk[0].shots));
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(simulate_counts(&rho, &[z_setting()], 10, 0).is_err());
    }

    #[test]
    fn expectation_edge_cases() {
        let settings = vec![z_setting()];
        let z = pauli_string("Z").unwrap();
        let rec = |a, b| {
            vec![
                CountRecord { setting_id: "Z".into(), outcome_index: 0, counts: a, shots: 100 },
                CountRecord { setting_id: "Z".into(), outcome_index: 1, counts: b, shots: 100 },
            ]
        };
        assert_eq!(expectation_from_counts(&rec(40, 0), &settings, &z).unwrap(), 1.0);
        assert_eq!(expectation_from_counts(&rec(30, 30), &settings, &z).unwrap(), 0.0);
        assert!(matches!(
            expectation_from_counts(&rec(0, 0), &settings, &z),
            Err(Error::UndefinedExpectation(_))
        ));
        let x = pauli_string("X").unwrap();
        assert!(expectation_from_counts(&rec(1, 1), &settings, &x).is_err());
    }

    #[test]
    fn bell_xx_expectation_from_exact_counts() {
        let rho = bell_state(BellKind::PhiPlus).to_density();
        let settings = complete_pauli_set(2).unwrap();
        let recs = expected_counts(&rho, &settings, 100_000).unwrap();
        for (label, expected) in [("XX", 1.0), ("YY", -1.0), ("ZZ", 1.0), ("XZ", 0.0)] {
            let obs = pauli_string(label).unwrap();
            assert!((expectation_from_counts(&recs, &settings, &obs).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn grouping_rejects_bad_records() {
        let settings = vec![z_setting()];
        let bad_setting = vec![CountRecord { setting_id: "Q".into(), outcome_index: 0, counts: 1, shots: 2 }];
        assert!(observed_frequencies(&bad_setting, &settings).is_err());
        let bad_outcome = vec![CountRecord { setting_id: "Z".into(), outcome_index: 2, counts: 1, shots: 2 }];
        assert!(observed_frequencies(&bad_outcome, &settings).is_err());
        let over = vec![
            CountRecord { setting_id: "Z".into(), outcome_index: 0, counts: 2, shots: 3 },
            CountRecord { setting_id: "Z".into(), outcome_index: 1, counts: 2, shots: 3 },
        ];
        assert!(observed_frequencies(&over, &settings).is_err());
    }

    #[test]
    fn incomplete_settings_normalize_by_shots() {
        let half = MeasurementSetting::new(
            "z+",
            vec![Projector::from_state(&StateVector::basis(2, 0).unwrap())],
            None,
        )
        .unwrap();
        let recs = vec![CountRecord { setting_id: "z+".into(), outcome_index: 0, counts: 25, shots: 100 }];
        let f = observed_frequencies(&recs, &[half]).unwrap();
        assert_eq!(f, vec![(0, 0, 0.25)]);
    }

    #[test]
    fn csv_round_trip_and_header() {
        let recs = simulate_counts(&DensityMatrix::maximally_mixed(2), &[z_setting()], 50, 1).unwrap();
        let mut buf = Vec::new();
        write_count_csv(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("setting_id,outcome_index,counts,shots\n"));
        assert!(!text.contains('\r'));
        assert_eq!(read_count_csv(buf.as_slice()).unwrap(), recs);
        assert!(read_count_csv("a,b,c,d\n".as_bytes()).is_err());
    }
}
