//! JSON model files.
//!
//! ```json
//! {
//!   "version": 1,
//!   "arms": [
//!     {"name": "link",
//!      "active": {"P": [[...]], "beta": [...], "R": [...], "D": [...], "labels": [...]},
//!      "passive": "identity"}
//!   ],
//!   "switch_delay": 0.0,
//!   "initial": {"arm_states": [0], "active_arm": 0}
//! }
//! ```
//!
//! `passive` may be omitted (same as `"identity"`: `P = I`, `beta = 1`,
//! `R = 0`, `D = 1`) or given as a full chain. `initial` holds either
//! `arm_states` (one local state per arm) or `joint_alpha` (a distribution
//! over joint states, arm 0 most significant); `active_arm` defaults to 0.

use std::fmt;
use std::path::Path;

use ratiobandit::bandit::{BanditModel, InitialState};
use ratiobandit::model::{Arm, SemiMarkovChain, ValidationReport};
use ratiobandit::numerics::Matrix;
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    pub beta: Vec<f64>,
    #[serde(rename = "R")]
    pub r: Vec<f64>,
    #[serde(rename = "D")]
    pub d: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PassiveSpec {
    Keyword(PassiveKeyword),
    Chain(ChainSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PassiveKeyword {
    Identity,
}

impl Default for PassiveSpec {
    fn default() -> Self {
        PassiveSpec::Keyword(PassiveKeyword::Identity)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub active: ChainSpec,
    #[serde(default)]
    pub passive: PassiveSpec,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arm_states: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint_alpha: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active_arm: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub version: u32,
    pub arms: Vec<ArmSpec>,
    #[serde(default)]
    pub switch_delay: f64,
    #[serde(default)]
    pub initial: InitialSpec,
}

/// Why a model file could not be used.
#[derive(Debug)]
pub enum LoadError {
    /// Unreadable, malformed, or structurally wrong (shapes, version).
    Parse(String),
    /// Well-formed but some chain violates an invariant.
    Invalid(Vec<String>),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Parse(msg) => write!(f, "{msg}"),
            LoadError::Invalid(lines) => write!(f, "{}", lines.join("\n")),
        }
    }
}

impl std::error::Error for LoadError {}

impl ChainSpec {
    pub fn to_chain(&self) -> Result<SemiMarkovChain, String> {
        let p = Matrix::from_rows(&self.p).map_err(|e| e.to_string())?;
        let chain = SemiMarkovChain::new(p, self.beta.clone(), self.r.clone(), self.d.clone()).map_err(|e| e.to_string())?;
        match &self.labels {
            Some(l) => chain.with_labels(l.clone()).map_err(|e| e.to_string()),
            None => Ok(chain),
        }
    }

    pub fn from_chain(chain: &SemiMarkovChain) -> Self {
        Self {
            p: chain.p().to_rows(),
            beta: chain.beta().to_vec(),
            r: chain.r().to_vec(),
            d: chain.d().to_vec(),
            labels: chain.labels().map(<[String]>::to_vec),
        }
    }
}

impl ArmSpec {
    pub fn display_name(&self, index: usize) -> String {
        self.name.clone().unwrap_or_else(|| index.to_string())
    }

    fn chains(&self) -> Result<(SemiMarkovChain, SemiMarkovChain), String> {
        let active = self.active.to_chain()?;
        let passive = match &self.passive {
            PassiveSpec::Keyword(PassiveKeyword::Identity) => SemiMarkovChain::identity(active.n()),
            PassiveSpec::Chain(c) => c.to_chain()?,
        };
        if passive.n() != active.n() {
            return Err(format!("passive chain has {} states, active has {}", passive.n(), active.n()));
        }
        Ok((active, passive))
    }
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self, LoadError> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| LoadError::Parse(format!("malformed model file: {e}")))?;
        if file.version != FORMAT_VERSION {
            return Err(LoadError::Parse(format!(
                "unsupported model file version {} (expected {FORMAT_VERSION})",
                file.version
            )));
        }
        if file.arms.is_empty() {
            return Err(LoadError::Parse("model file has no arms".into()));
        }
        for (k, arm) in file.arms.iter().enumerate() {
            arm.chains().map_err(|e| LoadError::Parse(format!("arm {}: {e}", arm.display_name(k))))?;
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|e| LoadError::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Every chain's validation report, labelled `arm <name> active|passive`.
    pub fn validate(&self) -> Vec<(String, ValidationReport)> {
        let mut out = Vec::new();
        for (k, arm) in self.arms.iter().enumerate() {
            let (active, passive) = arm.chains().expect("checked when parsed");
            let name = arm.display_name(k);
            out.push((format!("arm {name} active"), active.validate()));
            out.push((format!("arm {name} passive"), passive.validate()));
        }
        out
    }

    fn violations(&self) -> Vec<String> {
        self.validate()
            .into_iter()
            .flat_map(|(what, report)| report.violations.into_iter().map(move |v| format!("{what}: {v}")))
            .collect()
    }

    pub fn arm_index(&self, key: &str) -> Option<usize> {
        self.arms
            .iter()
            .position(|a| a.name.as_deref() == Some(key))
            .or_else(|| key.parse().ok().filter(|&k: &usize| k < self.arms.len()))
    }

    pub fn arm(&self, index: usize) -> Result<Arm, LoadError> {
        let spec = &self.arms[index];
        let (active, passive) = spec.chains().map_err(LoadError::Parse)?;
        let arm = Arm::new(active, passive).map_err(|_| LoadError::Invalid(self.violations()))?;
        Ok(match &spec.name {
            Some(n) => arm.named(n.clone()),
            None => arm,
        })
    }

    pub fn to_model(&self) -> Result<BanditModel, LoadError> {
        let violations = self.violations();
        if !violations.is_empty() {
            return Err(LoadError::Invalid(violations));
        }
        let arms = (0..self.arms.len()).map(|k| self.arm(k)).collect::<Result<Vec<_>, _>>()?;
        let active = self.initial.active_arm.unwrap_or(0);
        let initial = match (&self.initial.arm_states, &self.initial.joint_alpha) {
            (Some(states), None) => InitialState::ArmStates { states: states.clone(), active },
            (None, Some(alpha)) => InitialState::Joint { alpha: alpha.clone(), active },
            (None, None) => InitialState::ArmStates { states: vec![0; arms.len()], active },
            (Some(_), Some(_)) => {
                return Err(LoadError::Parse("initial: give either arm_states or joint_alpha, not both".into()))
            }
        };
        BanditModel::new(arms, self.switch_delay, initial).map_err(|e| LoadError::Parse(e.to_string()))
    }

    pub fn from_model(model: &BanditModel) -> Self {
        let arms = model
            .arms()
            .iter()
            .map(|arm| ArmSpec {
                name: arm.name().map(str::to_owned),
                active: ChainSpec::from_chain(arm.active_source()),
                passive: if arm.has_identity_passive() {
                    PassiveSpec::default()
                } else {
                    PassiveSpec::Chain(ChainSpec::from_chain(arm.passive_source()))
                },
            })
            .collect();
        let initial = match model.initial() {
            InitialState::ArmStates { states, active } => InitialSpec {
                arm_states: Some(states.clone()),
                joint_alpha: None,
                active_arm: Some(*active),
            },
            InitialState::Joint { alpha, active } => InitialSpec {
                arm_states: None,
                joint_alpha: Some(alpha.clone()),
                active_arm: Some(*active),
            },
        };
        Self {
            version: FORMAT_VERSION,
            arms,
            switch_delay: model.switch_delay(),
            initial,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model files serialize");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = r#"{
        "version": 1,
        "arms": [{"active": {"P": [[1.0]], "beta": [0.5], "R": [2.0], "D": [1.0]}}]
    }"#;

    #[test]
    fn passive_defaults_to_identity() {
        let file = ModelFile::parse(TINY).unwrap();
        let model = file.to_model().unwrap();
        assert!(model.is_restful());
        assert_eq!(model.initial(), &InitialState::ArmStates { states: vec![0], active: 0 });
    }

    #[test]
    fn round_trip() {
        let file = ModelFile::parse(TINY).unwrap();
        let again = ModelFile::parse(&ModelFile::from_model(&file.to_model().unwrap()).to_json()).unwrap();
        assert_eq!(again.to_model().unwrap(), file.to_model().unwrap());
    }

    #[test]
    fn shape_errors_are_parse_errors() {
        let bad = TINY.replace("\"beta\": [0.5]", "\"beta\": [0.5, 0.5]");
        assert!(matches!(ModelFile::parse(&bad), Err(LoadError::Parse(_))));
        let bad = TINY.replace("\"version\": 1", "\"version\": 7");
        assert!(matches!(ModelFile::parse(&bad), Err(LoadError::Parse(_))));
    }

    #[test]
    fn invalid_rows_are_reported() {
        let bad = TINY.replace("[[1.0]]", "[[0.9]]");
        let file = ModelFile::parse(&bad).unwrap();
        match file.to_model() {
            Err(LoadError::Invalid(lines)) => assert_eq!(lines, vec!["arm 0 active: row 0 sums to 0.9"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn arm_lookup_by_name_or_number() {
        let text = TINY.replace("{\"active\"", "{\"name\": \"solo\", \"active\"");
        let file = ModelFile::parse(&text).unwrap();
        assert_eq!(file.arm_index("solo"), Some(0));
        assert_eq!(file.arm_index("0"), Some(0));
        assert_eq!(file.arm_index("1"), None);
    }
}
