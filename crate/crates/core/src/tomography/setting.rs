use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{
    c, hermitian_eigenvalues, pauli_eigenstate, CMatrix, Pauli, Projector, StateVector,
};

/// Slack allowed on `Σ outcomes ≤ I`.
const COMPLETENESS_TOLERANCE: f64 = 1e-9;

/// One measurement configuration and its outcome operators.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSetting {
    id: String,
    outcomes: Vec<Projector>,
    label: Option<String>,
    pauli_basis: Option<Vec<Pauli>>,
    complete: bool,
}

impl MeasurementSetting {
    /// Checks that all outcomes share one dimension and that they sum to at
    /// most the identity.
    pub fn new(id: impl Into<String>, outcomes: Vec<Projector>, label: Option<String>) -> Result<Self> {
        let id = id.into();
        let first = outcomes
            .first()
            .ok_or_else(|| Error::input(format!("setting {id:?} has no outcomes")))?;
        let dim = first.dim();
        if outcomes.iter().any(|o| o.dim() != dim) {
            return Err(Error::input(format!("setting {id:?} mixes outcome dimensions")));
        }
        let mut total = CMatrix::zeros(dim, dim);
        for o in &outcomes {
            total += o.entries();
        }
        let slack = CMatrix::identity(dim, dim) - &total;
        let eig = hermitian_eigenvalues(&slack);
        if eig[0] < -COMPLETENESS_TOLERANCE {
            return Err(Error::input(format!(
                "outcomes of setting {id:?} sum to more than the identity (eigenvalue {:e})",
                eig[0]
            )));
        }
        let complete = eig[eig.len() - 1] <= COMPLETENESS_TOLERANCE;
        Ok(Self { id, outcomes, label, pauli_basis: None, complete })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn outcomes(&self) -> &[Projector] {
        &self.outcomes
    }

    pub fn dim(&self) -> usize {
        self.outcomes[0].dim()
    }

    /// True when the outcomes sum to the identity.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// Local Pauli bases, when this is a product Pauli setting.
    pub fn pauli_basis(&self) -> Option<&[Pauli]> {
        self.pauli_basis.as_deref()
    }

    /// Same setting with every outcome conjugated by `unitary`.
    pub fn rotated(&self, unitary: &CMatrix) -> Result<Self> {
        let outcomes = self.outcomes.iter().map(|o| o.rotated(unitary)).collect::<Result<Vec<_>>>()?;
        MeasurementSetting::new(self.id.clone(), outcomes, self.label.clone())
    }
}

/// Sign pattern of outcome `index` in a product Pauli setting on `n` qubits:
/// bit `n−1−q` of the index is set when qubit `q` gave `−1`.
pub fn outcome_signs(index: usize, n_qubits: usize) -> Vec<bool> {
    (0..n_qubits).map(|q| (index >> (n_qubits - 1 - q)) & 1 == 0).collect()
}

fn sign_string(signs: &[bool]) -> String {
    signs.iter().map(|&s| if s { '+' } else { '-' }).collect()
}

/// Product projector for a local Pauli basis and sign pattern (`true` = `+1`).
pub fn pauli_projector(bases: &[Pauli], signs: &[bool]) -> Result<Projector> {
    if bases.len() != signs.len() || bases.is_empty() {
        return Err(Error::input("basis and sign patterns must have the same non-zero length"));
    }
    let mut state: Option<StateVector> = None;
    for (&b, &s) in bases.iter().zip(signs) {
        let factor = pauli_eigenstate(b, s)?;
        state = Some(match state {
            None => factor,
            Some(acc) => acc.tensor(&factor),
        });
    }
    Ok(Projector::from_state(&state.expect("non-empty")))
}

/// Parses outcome strings such as `"XZ:+-"`.
pub fn parse_pauli_outcome(spec: &str) -> Result<Projector> {
    let (basis, signs) = spec
        .split_once(':')
        .ok_or_else(|| Error::input(format!("outcome {spec:?} is not of the form BASIS:SIGNS")))?;
    let bases = Pauli::parse_string(basis)?;
    let signs = signs
        .chars()
        .map(|ch| match ch {
            '+' => Ok(true),
            '-' => Ok(false),
            other => Err(Error::input(format!("invalid sign {other:?} in outcome {spec:?}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    if bases.contains(&Pauli::I) {
        return Err(Error::input(format!("outcome {spec:?} uses I, which has no eigenbasis")));
    }
    pauli_projector(&bases, &signs)
}

/// Product Pauli setting with all `2ⁿ` sign outcomes, e.g. `"XZ"`.
pub fn pauli_setting(basis: &str) -> Result<MeasurementSetting> {
    let bases = Pauli::parse_string(basis)?;
    if bases.contains(&Pauli::I) {
        return Err(Error::input(format!("setting {basis:?} uses I, which has no eigenbasis")));
    }
    let n = bases.len();
    let outcomes = (0..1usize << n)
        .map(|i| pauli_projector(&bases, &outcome_signs(i, n)))
        .collect::<Result<Vec<_>>>()?;
    let mut setting = MeasurementSetting::new(basis, outcomes, Some(basis.to_string()))?;
    setting.pauli_basis = Some(bases);
    Ok(setting)
}

/// Label of outcome `index` of a product Pauli setting, e.g. `"XZ:+-"`.
pub fn pauli_outcome_label(basis: &str, index: usize) -> String {
    format!("{basis}:{}", sign_string(&outcome_signs(index, basis.len())))
}

/// Every product Pauli setting whose qubit `q` uses one of `allowed[q]`.
pub fn restricted_pauli_set(allowed: &[Vec<Pauli>]) -> Result<Vec<MeasurementSetting>> {
    if allowed.is_empty() || allowed.iter().any(|a| a.is_empty()) {
        return Err(Error::input("each qubit needs at least one allowed basis"));
    }
    let mut labels = vec![String::new()];
    for choices in allowed {
        labels = labels
            .iter()
            .flat_map(|prefix| choices.iter().map(move |p| format!("{prefix}{p}")))
            .collect();
    }
    labels.iter().map(|l| pauli_setting(l)).collect()
}

/// All `3ⁿ` product Pauli settings (`6ⁿ` distinct projectors).
pub fn complete_pauli_set(n_qubits: usize) -> Result<Vec<MeasurementSetting>> {
    restricted_pauli_set(&vec![vec![Pauli::X, Pauli::Y, Pauli::Z]; n_qubits])
}

/// Default restricted set for the two-photon chip: no Y basis on either TE
/// mode qubit (qubits 0 and 1), full X/Y/Z on both path qubits. 36 settings.
pub fn default_restricted_set() -> Vec<MeasurementSetting> {
    let xz = vec![Pauli::X, Pauli::Z];
    let xyz = vec![Pauli::X, Pauli::Y, Pauli::Z];
    restricted_pauli_set(&[xz.clone(), xz, xyz.clone(), xyz]).expect("static bases are valid")
}

/// X and Z bases only on every qubit: `2ⁿ` settings, `4ⁿ` projectors. On
/// four qubits this is 256 configurations with measurement-matrix rank 81
/// (80 traceless directions plus the trace).
pub fn xz_pauli_set(n_qubits: usize) -> Result<Vec<MeasurementSetting>> {
    restricted_pauli_set(&vec![vec![Pauli::X, Pauli::Z]; n_qubits])
}

/// Projector-set file: a JSON list of settings.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProjectorSetFile {
    pub settings: Vec<SettingSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SettingSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Omitted outcomes mean "every sign outcome of the Pauli basis in `label`".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcomes: Option<Vec<OutcomeSpec>>,
}

/// Either `"XZ:+-"` or an explicit matrix of `[re, im]` pairs (row-major).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum OutcomeSpec {
    Pauli(String),
    Matrix(Vec<Vec<[f64; 2]>>),
}

impl OutcomeSpec {
    fn to_projector(&self) -> Result<Projector> {
        match self {
            OutcomeSpec::Pauli(s) => parse_pauli_outcome(s),
            OutcomeSpec::Matrix(rows) => {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err(Error::input("projector matrix must be square"));
                }
                Projector::new(CMatrix::from_fn(n, n, |i, j| c(rows[i][j][0], rows[i][j][1])))
            }
        }
    }

    fn from_matrix(m: &CMatrix) -> Self {
        OutcomeSpec::Matrix((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect())
    }
}

impl SettingSpec {
    pub fn to_setting(&self) -> Result<MeasurementSetting> {
        match &self.outcomes {
            None => {
                let basis = self
                    .label
                    .as_deref()
                    .ok_or_else(|| Error::input(format!("setting {:?} has neither outcomes nor a Pauli label", self.id)))?;
                let mut s = pauli_setting(basis)?;
                s.id = self.id.clone();
                Ok(s)
            }
            Some(outs) => {
                let projectors = outs.iter().map(|o| o.to_projector()).collect::<Result<Vec<_>>>()?;
                MeasurementSetting::new(self.id.clone(), projectors, self.label.clone())
            }
        }
    }

    pub fn from_setting(setting: &MeasurementSetting) -> Self {
        let outcomes = match setting.pauli_basis() {
            Some(bases) => {
                let basis: String = bases.iter().map(|p| p.as_char()).collect();
                (0..setting.outcomes().len()).map(|i| OutcomeSpec::Pauli(pauli_outcome_label(&basis, i))).collect()
            }
            None => setting.outcomes().iter().map(|o| OutcomeSpec::from_matrix(o.entries())).collect(),
        };
        SettingSpec { id: setting.id().to_string(), label: setting.label().map(str::to_string), outcomes: Some(outcomes) }
    }
}

impl ProjectorSetFile {
    pub fn to_settings(&self) -> Result<Vec<MeasurementSetting>> {
        let settings = self.settings.iter().map(SettingSpec::to_setting).collect::<Result<Vec<_>>>()?;
        validate_settings(&settings)?;
        Ok(settings)
    }

    pub fn from_settings(settings: &[MeasurementSetting]) -> Self {
        Self { settings: settings.iter().map(SettingSpec::from_setting).collect() }
    }
}

/// Non-empty, unique ids, one common dimension.
pub fn validate_settings(settings: &[MeasurementSetting]) -> Result<()> {
    let first = settings.first().ok_or_else(|| Error::input("no measurement settings"))?;
    let mut ids = std::collections::HashSet::new();
    for s in settings {
        if s.dim() != first.dim() {
            return Err(Error::input(format!("setting {:?} has dimension {}, expected {}", s.id(), s.dim(), first.dim())));
        }
        if !ids.insert(s.id()) {
            return Err(Error::input(format!("duplicate setting id {:?}", s.id())));
        }
    }
    Ok(())
}

pub fn read_projector_set(path: &Path) -> Result<Vec<MeasurementSetting>> {
    let text = fs::read_to_string(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    let file: ProjectorSetFile = serde_json::from_str(&text)?;
    file.to_settings()
}

pub fn write_projector_set(path: &Path, settings: &[MeasurementSetting]) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&ProjectorSetFile::from_settings(settings))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
