//! Declarative scenario files.

use log::warn;
use num_complex::Complex;
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::CliError;
use crate::cavity::{assemble_general, BlockHamiltonian, CavityParams, DipoleQubit};
use crate::propagate::{block_drives, hamiltonian_from_drives, BlockDrive, DriveReading, Method};
use crate::tbq::{Basis, StateVector};

/// Tolerance on the norm of parsed initial states.
pub const INITIAL_NORM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub cavity: CavityParams<f64>,
    pub qubits: Vec<DipoleQubit<f64>>,
    pub initial_state: InitialState,
    pub time: TimeGrid,
    #[serde(default = "default_method")]
    pub propagator: Method,
    /// Oracle steps across the whole run; `None` picks a resolution from the
    /// Hamiltonian norm.
    #[serde(default)]
    pub oracle_steps: Option<usize>,
    #[serde(default)]
    pub drive_reading: DriveReading,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<Output>,
}

fn default_method() -> Method {
    Method::ExpIntegral
}

fn default_outputs() -> Vec<Output> {
    vec![
        Output::SiteProbabilities,
        Output::CavityPopulations,
        Output::Entropy,
        Output::Norm,
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub samples: usize,
}

impl TimeGrid {
    /// `samples` uniformly spaced times; the last one is exactly `t1`.
    pub fn times(&self) -> Vec<f64> {
        let step = (self.t1 - self.t0) / (self.samples - 1) as f64;
        (0..self.samples)
            .map(|k| if k + 1 == self.samples { self.t1 } else { self.t0 + step * k as f64 })
            .collect()
    }
}

/// Observables written to the time series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    SiteProbabilities,
    CavityPopulations,
    Amplitudes,
    ReducedCavity,
    ReducedQubits,
    Entropy,
    Norm,
    Multiphoton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Lowest eigenvector of cavity block 1 at `t0`.
    GroundBlock1,
    /// Cavity level 1 with every qubit on site 1.
    Site1Level1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SuperpositionTag {
    EnergySuperposition,
}

/// Starting state: a preset or explicit position-basis amplitudes `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum InitialState {
    Preset(Preset),
    /// `c_e1|E1⟩ + c_e2|E2⟩` over the two lowest eigenvectors of block 1 at `t0`.
    EnergySuperposition {
        preset: SuperpositionTag,
        c_e1: [f64; 2],
        c_e2: [f64; 2],
    },
    Amplitudes {
        amplitudes: Vec<[f64; 2]>,
    },
}

impl InitialState {
    fn from_value(v: &Value) -> Result<Self, String> {
        const PRESETS: &str = "\"ground_block1\", \"site1_level1\" or {\"preset\": \"energy_superposition\", ...}";
        let pair = |key: &str, obj: &serde_json::Map<String, Value>| -> Result<[f64; 2], String> {
            let raw = obj.get(key).ok_or_else(|| format!("missing field `{key}`"))?;
            serde_json::from_value(raw.clone()).map_err(|e| format!("`{key}` must be [re, im]: {e}"))
        };
        match v {
            Value::String(s) => match s.as_str() {
                "ground_block1" => Ok(Self::Preset(Preset::GroundBlock1)),
                "site1_level1" => Ok(Self::Preset(Preset::Site1Level1)),
                other => Err(format!("unknown preset `{other}`, expected {PRESETS}")),
            },
            Value::Object(obj) if obj.contains_key("amplitudes") => {
                if obj.len() != 1 {
                    return Err("`amplitudes` cannot be combined with other fields".into());
                }
                let amplitudes = serde_json::from_value(obj["amplitudes"].clone())
                    .map_err(|e| format!("`amplitudes` must be a list of [re, im]: {e}"))?;
                Ok(Self::Amplitudes { amplitudes })
            }
            Value::Object(obj) => match obj.get("preset").and_then(Value::as_str) {
                Some("energy_superposition") => {
                    if let Some(extra) = obj.keys().find(|k| !["preset", "c_e1", "c_e2"].contains(&k.as_str())) {
                        return Err(format!("unknown field `{extra}`"));
                    }
                    Ok(Self::EnergySuperposition {
                        preset: SuperpositionTag::EnergySuperposition,
                        c_e1: pair("c_e1", obj)?,
                        c_e2: pair("c_e2", obj)?,
                    })
                }
                _ => Err(format!("expected {PRESETS} or {{\"amplitudes\": [[re, im], ...]}}")),
            },
            _ => Err(format!("expected {PRESETS} or {{\"amplitudes\": [[re, im], ...]}}")),
        }
    }
}

impl<'de> Deserialize<'de> for InitialState {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        Self::from_value(&v).map_err(|e| de::Error::custom(format!("initial_state: {e}")))
    }
}

/// Hamiltonian of a scenario, plus the 2×2 block drives when there is a
/// single qubit.
#[derive(Debug, Clone)]
pub struct Model {
    pub hamiltonian: BlockHamiltonian<f64>,
    pub drives: Option<Vec<BlockDrive<f64>>>,
}

impl Model {
    pub fn factor_dims(&self) -> &[usize] {
        self.hamiltonian.factor_dims()
    }

    pub fn total_dim(&self) -> usize {
        self.hamiltonian.total_dim()
    }
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Scenario {
    /// Parses and validates a scenario document.
    pub fn from_json_str(text: &str) -> Result<Self, CliError> {
        let scn: Self = serde_json::from_str(text).map_err(|e| config(e.to_string()))?;
        scn.validate()?;
        Ok(scn)
    }

    pub fn from_value(v: Value) -> Result<Self, CliError> {
        let scn: Self = serde_json::from_value(v).map_err(|e| config(e.to_string()))?;
        scn.validate()?;
        Ok(scn)
    }

    /// The scenario with every default filled in.
    pub fn resolved(&self) -> Value {
        serde_json::to_value(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.cavity.validate().map_err(|e| config(e.to_string()))?;
        if self.qubits.is_empty() {
            return Err(config("qubits: at least one qubit is required"));
        }
        for (k, q) in self.qubits.iter().enumerate() {
            if q.couplings.len() != self.cavity.n_levels {
                return Err(config(format!(
                    "qubits[{k}].couplings: expected {} entries (cavity.n_levels), found {}",
                    self.cavity.n_levels,
                    q.couplings.len()
                )));
            }
            for (name, v) in [("dipole_length", q.dipole_length), ("charge", q.charge)] {
                if !v.is_finite() {
                    return Err(config(format!("qubits[{k}].{name} must be finite")));
                }
            }
        }
        let TimeGrid { t0, t1, samples } = self.time;
        if samples < 2 {
            return Err(config(format!("time.samples must be at least 2, got {samples}")));
        }
        if !(t0.is_finite() && t1.is_finite()) {
            return Err(config("time.t0 and time.t1 must be finite"));
        }
        if !(t1 > t0) {
            return Err(config(format!("time.t1 ({t1}) must exceed time.t0 ({t0})")));
        }
        let step = (t1 - t0) / (samples - 1) as f64;
        if !(t0 + step > t0) {
            return Err(config(format!(
                "time: the sample step {step:e} is below the resolution of time.t0 = {t0}"
            )));
        }
        if self.propagator == Method::ClosedForm && self.qubits.len() != 1 {
            return Err(config("propagator: closed_form is defined for a single qubit only"));
        }
        if self.drive_reading == DriveReading::SharedModes && self.qubits.len() != 1 {
            return Err(config("drive_reading: section4_independent is defined for a single qubit only"));
        }
        if self.oracle_steps == Some(0) {
            return Err(config("oracle_steps must be positive"));
        }
        for (k, o) in self.outputs.iter().enumerate() {
            if self.outputs[..k].contains(o) {
                return Err(config(format!("outputs: {o:?} is listed twice")));
            }
        }
        Ok(())
    }

    pub fn model(&self) -> Result<Model, CliError> {
        if self.qubits.len() == 1 {
            let drives = block_drives(&self.cavity, &self.qubits[0], self.drive_reading)
                .map_err(|e| config(e.to_string()))?;
            Ok(Model {
                hamiltonian: hamiltonian_from_drives(&drives, self.cavity.hbar),
                drives: Some(drives),
            })
        } else {
            let hamiltonian = assemble_general(&self.cavity, &self.qubits).map_err(|e| config(e.to_string()))?;
            Ok(Model {
                hamiltonian,
                drives: None,
            })
        }
    }

    /// Normalized initial state in the position basis.
    pub fn initial_state(&self, model: &Model) -> Result<StateVector<f64>, CliError> {
        let dim = model.total_dim();
        let t0 = self.time.t0;
        match &self.initial_state {
            InitialState::Preset(Preset::Site1Level1) => Ok(StateVector::basis_state(dim, 0)),
            InitialState::Preset(Preset::GroundBlock1) => {
                let (_, vecs) = block1_eigenvectors(model, t0);
                Ok(embed_block1(&vecs.column(0), dim))
            }
            InitialState::EnergySuperposition { c_e1, c_e2, .. } => {
                let c1 = Complex::new(c_e1[0], c_e1[1]);
                let c2 = Complex::new(c_e2[0], c_e2[1]);
                let norm_sq = c1.norm_sqr() + c2.norm_sqr();
                if (norm_sq - 1.0).abs() > INITIAL_NORM_TOL {
                    return Err(config(format!(
                        "initial_state: |c_e1|^2 + |c_e2|^2 = {norm_sq}, expected 1 within {INITIAL_NORM_TOL:e}"
                    )));
                }
                let (_, vecs) = block1_eigenvectors(model, t0);
                let (v1, v2) = (vecs.column(0), vecs.column(1));
                let block: Vec<_> = v1.iter().zip(&v2).map(|(&a, &b)| c1 * a + c2 * b).collect();
                Ok(embed_block1(&block, dim))
            }
            InitialState::Amplitudes { amplitudes } => {
                if amplitudes.len() != dim {
                    return Err(config(format!(
                        "initial_state.amplitudes: expected {dim} entries, found {}",
                        amplitudes.len()
                    )));
                }
                let psi = StateVector::new(
                    amplitudes.iter().map(|&[re, im]| Complex::new(re, im)).collect(),
                    Basis::Position,
                );
                let norm_sq = psi.norm_sqr();
                if !norm_sq.is_finite() || norm_sq < 1e-20 {
                    return Err(config("initial_state.amplitudes: the state has zero norm"));
                }
                if (norm_sq - 1.0).abs() > INITIAL_NORM_TOL {
                    warn!("initial_state.amplitudes has squared norm {norm_sq}; renormalizing");
                    return psi.normalized().map_err(|e| config(e.to_string()));
                }
                Ok(psi)
            }
        }
    }
}

/// Eigen-decomposition of cavity block 1 at `t`, eigenvalues ascending.
pub(crate) fn block1_eigenvectors(model: &Model, t: f64) -> (Vec<f64>, crate::linalg::CMatrix<f64>) {
    model.hamiltonian.blocks()[0].eval(t).eigh()
}

fn embed_block1(block: &[Complex<f64>], dim: usize) -> StateVector<f64> {
    let mut amplitudes = vec![Complex::new(0.0, 0.0); dim];
    amplitudes[..block.len()].copy_from_slice(block);
    StateVector::new(amplitudes, Basis::Position)
}

/// Replaces the number at a dotted path such as `qubits.0.ts_mag.value`.
pub fn set_parameter(doc: &mut Value, path: &str, value: f64) -> Result<(), CliError> {
    let unknown = || CliError::UnknownParameterPath(path.to_string());
    let mut node = doc;
    for segment in path.split('.') {
        node = match node {
            Value::Object(map) => map.get_mut(segment).ok_or_else(unknown)?,
            Value::Array(items) => {
                let index: usize = segment.parse().map_err(|_| unknown())?;
                items.get_mut(index).ok_or_else(unknown)?
            }
            _ => return Err(unknown()),
        };
    }
    if !node.is_number() {
        return Err(unknown());
    }
    *node = serde_json::Number::from_f64(value)
        .map(Value::Number)
        .ok_or_else(|| config(format!("sweep value {value} is not finite")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn base() -> Value {
        json!({
            "cavity": {"omega": 1.0, "n_levels": 2, "epsilon": 1.0},
            "qubits": [{
                "ep1": {"kind": "constant", "value": 0.0},
                "ep2": {"kind": "constant", "value": 0.0},
                "ts_mag": {"kind": "constant", "value": 0.5},
                "alpha": {"kind": "constant", "value": 0.0},
                "dipole_length": 1.0,
                "couplings": [0.1, 0.2]
            }],
            "initial_state": "site1_level1",
            "time": {"t0": 0.0, "t1": 1.0, "samples": 3}
        })
    }

    #[test]
    fn defaults_are_expanded() {
        let scn = Scenario::from_value(base()).unwrap();
        let r = scn.resolved();
        assert_eq!(r["propagator"], "exp_integral");
        assert_eq!(r["drive_reading"], "section2_signed");
        assert_eq!(r["cavity"]["hbar"], 1.0);
        assert_eq!(r["cavity"]["mode_parity"], "general");
        assert_eq!(r["qubits"][0]["charge"], 1.0);
        assert_eq!(r["outputs"].as_array().unwrap().len(), 4);
        assert_eq!(Scenario::from_value(r).unwrap(), scn);
    }

    #[test]
    fn initial_state_forms() {
        let mut v = base();
        v["initial_state"] = json!({"preset": "energy_superposition", "c_e1": [0.6, 0.0], "c_e2": [0.0, 0.8]});
        let scn = Scenario::from_value(v.clone()).unwrap();
        let model = scn.model().unwrap();
        let psi = scn.initial_state(&model).unwrap();
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(psi.amplitudes[2..].iter().all(|z| z.norm() == 0.0));

        v["initial_state"] = json!({"amplitudes": [[1.0, 0.0], [1.0, 0.0], [0.0, 0.0], [0.0, 0.0]]});
        let scn = Scenario::from_value(v.clone()).unwrap();
        let psi = scn.initial_state(&scn.model().unwrap()).unwrap();
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-15);

        v["initial_state"] = json!({"amplitudes": [[1.0, 0.0]]});
        let scn = Scenario::from_value(v.clone()).unwrap();
        assert!(matches!(scn.initial_state(&scn.model().unwrap()), Err(CliError::Config(_))));

        v["initial_state"] = json!("ground_state");
        let err = Scenario::from_value(v).unwrap_err().to_string();
        assert!(err.contains("initial_state"), "{err}");
    }

    #[test]
    fn ground_block1_is_lowest_eigenvector() {
        let mut v = base();
        v["initial_state"] = json!("ground_block1");
        let scn = Scenario::from_value(v).unwrap();
        let model = scn.model().unwrap();
        let psi = scn.initial_state(&model).unwrap();
        let h = model.hamiltonian.blocks()[0].eval(0.0);
        let hv = h.mul_vec(&psi.amplitudes[..2]);
        let e = crate::linalg::inner(&psi.amplitudes[..2], &hv).re;
        let (e1, _) = crate::tbq::eigenenergies(&scn.qubits[0].params, 0.0);
        assert!((e - (e1 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn validation_names_the_field() {
        let mut v = base();
        v["qubits"][0]["couplings"] = json!([0.1]);
        let err = Scenario::from_value(v).unwrap_err().to_string();
        assert!(err.contains("qubits[0].couplings"), "{err}");

        let mut v = base();
        v["time"]["t1"] = json!(0.0);
        assert!(Scenario::from_value(v).unwrap_err().to_string().contains("time.t1"));

        let mut v = base();
        v["time"]["samples"] = json!(1);
        assert!(Scenario::from_value(v).unwrap_err().to_string().contains("time.samples"));

        let mut v = base();
        v["qubits"] = json!([v["qubits"][0].clone(), v["qubits"][0].clone()]);
        v["propagator"] = json!("closed_form");
        assert!(Scenario::from_value(v).unwrap_err().to_string().contains("propagator"));

        let err = Scenario::from_json_str("{\n  \"cavity\": {\"omega\": 1.0}\n}").unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn times_end_exactly_at_t1() {
        let grid = TimeGrid {
            t0: 0.1,
            t1: 0.7,
            samples: 7,
        };
        let times = grid.times();
        assert_eq!(times.len(), 7);
        assert_eq!(times[0], 0.1);
        assert_eq!(times[6], 0.7);
    }

    #[test]
    fn parameter_paths() {
        let mut v = base();
        set_parameter(&mut v, "qubits.0.ts_mag.value", 0.25).unwrap();
        assert_eq!(v["qubits"][0]["ts_mag"]["value"], 0.25);
        set_parameter(&mut v, "cavity.omega", 2.0).unwrap();
        assert_eq!(v["cavity"]["omega"], 2.0);
        for bad in ["qubits.3.ts_mag.value", "cavity.nope", "qubits.x", "cavity", "initial_state"] {
            assert!(matches!(
                set_parameter(&mut v, bad, 1.0),
                Err(CliError::UnknownParameterPath(_))
            ));
        }
    }
}
