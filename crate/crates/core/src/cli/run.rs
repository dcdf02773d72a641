//! Eigen reports, simulations and sweeps.

use std::fs;
use std::path::Path;

use log::info;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::format::{csv_line, float, json as json_text};
use super::scenario::{set_parameter, Model, Output, Scenario};
use super::CliError;
use crate::error::Error;
use crate::observe::{
    cavity_population, density_from_state, multiphoton_probability, rabi_frequency_estimate, reduce, site_probability,
    von_neumann_entropy, Site,
};
use crate::propagate::{propagate_state, Method, Propagator};
use crate::tbq::StateVector;

fn numerical(context: impl Into<String>) -> impl FnOnce(Error) -> CliError {
    let context = context.into();
    move |source| CliError::Numerical { context, source }
}

/// Instantaneous eigenpairs of every cavity block at `t`.
pub fn run_eigen(scn: &Scenario, t: f64) -> Result<Value, CliError> {
    let model = scn.model()?;
    let blocks = model
        .hamiltonian
        .blocks()
        .iter()
        .enumerate()
        .map(|(k, block)| {
            let h = block.eval(t);
            let (energies, vectors) = if let Some(drives) = &model.drives {
                let (e, v) = crate::propagate::eigen_block(&drives[k], t)
                    .map_err(numerical(format!("cavity block {}", k + 1)))?;
                let m = crate::linalg::CMatrix::from_fn(2, 2, |i, j| v[j].amplitudes[i]);
                (e.to_vec(), m)
            } else {
                h.eigh()
            };
            let d = h.rows();
            let mut residuals = Vec::with_capacity(d);
            let mut vecs = Vec::with_capacity(d);
            for (j, &e) in energies.iter().enumerate() {
                let v = vectors.column(j);
                let hv = h.mul_vec(&v);
                let r = hv
                    .iter()
                    .zip(&v)
                    .fold(0.0f64, |m, (a, b)| m.max((a - b.scale(e)).norm()));
                residuals.push(r);
                vecs.push(v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>());
            }
            Ok(json!({
                "level": k + 1,
                "energies": energies,
                "eigenvectors": vecs,
                "residuals": residuals,
            }))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(json!({
        "time": t,
        "blocks": blocks,
        "scenario": scn.resolved(),
    }))
}

/// Column names for the requested observables, after `time`.
pub fn header(scn: &Scenario) -> Vec<String> {
    let levels = scn.cavity.n_levels;
    let n_qubits = scn.qubits.len();
    let dim = levels << n_qubits;
    let mut cols = vec!["time".to_string()];
    for out in &scn.outputs {
        match out {
            Output::SiteProbabilities => {
                for q in 0..n_qubits {
                    for site in ["x1", "x2"] {
                        cols.push(if n_qubits == 1 { format!("P_{site}") } else { format!("P_q{q}_{site}") });
                    }
                }
            }
            Output::CavityPopulations => cols.extend((1..=levels).map(|n| format!("P_c{n}"))),
            Output::Amplitudes => {
                for i in 0..dim {
                    cols.push(format!("re_{i}"));
                    cols.push(format!("im_{i}"));
                }
            }
            Output::ReducedCavity => {
                for i in 1..=levels {
                    cols.push(format!("rho_c_{i}_{i}"));
                    for j in i + 1..=levels {
                        cols.push(format!("rho_c_{i}_{j}_re"));
                        cols.push(format!("rho_c_{i}_{j}_im"));
                    }
                }
            }
            Output::ReducedQubits => {
                for q in 0..n_qubits {
                    cols.extend(
                        ["1_1", "1_2_re", "1_2_im", "2_2"]
                            .iter()
                            .map(|s| format!("rho_q{q}_{s}")),
                    );
                }
            }
            Output::Entropy => cols.push("entropy".into()),
            Output::Norm => cols.push("norm".into()),
            Output::Multiphoton => cols.extend((1..=levels).map(|n| format!("M_c{n}"))),
        }
    }
    cols
}

/// Observables of one sample, in header order.
fn row(scn: &Scenario, dims: &[usize], t: f64, psi0: &StateVector<f64>, psi: &StateVector<f64>) -> Result<Vec<f64>, Error> {
    let levels = dims[0];
    let n_qubits = dims.len() - 1;
    let rho = density_from_state(psi, dims)?;
    let mut out = vec![t];
    for o in &scn.outputs {
        match o {
            Output::SiteProbabilities => {
                for q in 0..n_qubits {
                    out.push(site_probability(&rho, q, Site::X1)?);
                    out.push(site_probability(&rho, q, Site::X2)?);
                }
            }
            Output::CavityPopulations => {
                for n in 1..=levels {
                    out.push(cavity_population(&rho, n)?);
                }
            }
            Output::Amplitudes => {
                for z in &psi.amplitudes {
                    out.push(z.re);
                    out.push(z.im);
                }
            }
            Output::ReducedCavity => {
                let rc = reduce(&rho, 0)?;
                for i in 0..levels {
                    out.push(rc.matrix[(i, i)].re);
                    for j in i + 1..levels {
                        out.push(rc.matrix[(i, j)].re);
                        out.push(rc.matrix[(i, j)].im);
                    }
                }
            }
            Output::ReducedQubits => {
                for q in 0..n_qubits {
                    let rq = reduce(&rho, q + 1)?;
                    out.push(rq.matrix[(0, 0)].re);
                    out.push(rq.matrix[(0, 1)].re);
                    out.push(rq.matrix[(0, 1)].im);
                    out.push(rq.matrix[(1, 1)].re);
                }
            }
            Output::Entropy => out.push(von_neumann_entropy(&reduce(&rho, 0)?)?),
            Output::Norm => out.push(psi.norm_sqr()),
            Output::Multiphoton => {
                for n in 1..=levels {
                    out.push(multiphoton_probability(psi0, psi, n, dims)?);
                }
            }
        }
    }
    Ok(out)
}

/// Scalar results of one simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    /// Fitted angular frequency of `P(x1)` of qubit 0; `None` when the series
    /// shows no oscillation.
    pub rabi_omega: Option<f64>,
    pub max_norm_drift: f64,
    pub max_cavity_population_drift: f64,
    /// Entanglement entropy of the cavity factor at `t1`.
    pub final_entropy: f64,
    /// Max-element distance between the run's propagator at `t1` and an
    /// oracle reference (exp_integral runs only).
    pub oracle_deviation: Option<f64>,
}

impl Summary {
    pub fn to_json(&self, scn: &Scenario) -> Value {
        json!({
            "rabi_omega": self.rabi_omega,
            "max_norm_drift": self.max_norm_drift,
            "max_cavity_population_drift": self.max_cavity_population_drift,
            "final_entropy": self.final_entropy,
            "oracle_deviation": self.oracle_deviation,
            "scenario": scn.resolved(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub summary: Summary,
}

impl Simulation {
    pub fn csv(&self) -> String {
        let mut s = csv_line(&self.header);
        for r in &self.rows {
            s.push_str(&csv_line(&r.iter().map(|&x| float(x)).collect::<Vec<_>>()));
        }
        s
    }
}

fn oracle_steps_per_interval(scn: &Scenario) -> Option<usize> {
    scn.oracle_steps.map(|total| total.div_ceil(scn.time.samples - 1).max(1))
}

fn propagator(scn: &Scenario, model: &Model, t: f64) -> Result<Propagator<f64>, CliError> {
    let t0 = scn.time.t0;
    let hbar = scn.cavity.hbar;
    let context = || {
        let phases: Vec<String> = scn
            .qubits
            .iter()
            .enumerate()
            .filter(|(_, q)| q.params.alpha.as_constant().is_none())
            .map(|(k, _)| format!("qubits[{k}].alpha"))
            .collect();
        if phases.is_empty() {
            format!("integrating the Hamiltonian over [{t0}, {t}]")
        } else {
            format!("integrating the hopping with {} over [{t0}, {t}]", phases.join(", "))
        }
    };
    match scn.propagator {
        Method::ClosedForm => {
            let drives = model.drives.as_ref().expect("closed_form is validated to a single qubit");
            Propagator::closed_form(drives, t0, t, hbar).map_err(numerical(context()))
        }
        Method::ExpIntegral => Propagator::exp_of_integral(&model.hamiltonian, t0, t).map_err(numerical(context())),
        Method::Oracle => Ok(Propagator::oracle(&model.hamiltonian, t0, t, scn.oracle_steps)),
    }
}

/// States at every sample time.
fn trajectory(scn: &Scenario, model: &Model, psi0: &StateVector<f64>, times: &[f64]) -> Result<Vec<StateVector<f64>>, CliError> {
    let apply = |prop: &Propagator<f64>, psi: &StateVector<f64>| propagate_state(prop, psi).map_err(numerical("applying the propagator"));
    match scn.propagator {
        Method::Oracle => {
            let steps = oracle_steps_per_interval(scn);
            let mut states = Vec::with_capacity(times.len());
            states.push(psi0.clone());
            for w in times.windows(2) {
                let prop = Propagator::oracle(&model.hamiltonian, w[0], w[1], steps);
                let next = apply(&prop, states.last().expect("non-empty"))?;
                states.push(next);
            }
            Ok(states)
        }
        _ => times
            .par_iter()
            .map(|&t| apply(&propagator(scn, model, t)?, psi0))
            .collect(),
    }
}

pub fn run_simulate(scn: &Scenario) -> Result<Simulation, CliError> {
    let model = scn.model()?;
    let dims = model.factor_dims().to_vec();
    let psi0 = scn.initial_state(&model)?;
    let times = scn.time.times();
    let states = trajectory(scn, &model, &psi0, &times)?;

    let rows = times
        .par_iter()
        .zip(&states)
        .map(|(&t, psi)| row(scn, &dims, t, &psi0, psi))
        .collect::<Result<Vec<_>, Error>>()
        .map_err(numerical("evaluating observables"))?;

    let diagnostics = |psi: &StateVector<f64>| -> Result<(f64, Vec<f64>, f64), Error> {
        let rho = density_from_state(psi, &dims)?;
        let pops = (1..=dims[0]).map(|n| cavity_population(&rho, n)).collect::<Result<Vec<_>, _>>()?;
        Ok((psi.norm_sqr(), pops, site_probability(&rho, 0, Site::X1)?))
    };
    let diag = states
        .par_iter()
        .map(diagnostics)
        .collect::<Result<Vec<_>, Error>>()
        .map_err(numerical("evaluating diagnostics"))?;
    let (norm0, pops0, _) = &diag[0];
    let mut max_norm_drift = 0.0f64;
    let mut max_pop_drift = 0.0f64;
    for (norm, pops, _) in &diag {
        max_norm_drift = max_norm_drift.max((norm - norm0).abs());
        for (p, p0) in pops.iter().zip(pops0) {
            max_pop_drift = max_pop_drift.max((p - p0).abs());
        }
    }

    let series: Vec<(f64, f64)> = times.iter().zip(&diag).map(|(&t, d)| (t, d.2)).collect();
    let rabi_omega = match rabi_frequency_estimate(&series) {
        Ok(w) => Some(w),
        Err(e) => {
            info!("no Rabi frequency: {e}");
            None
        }
    };

    let last = states.last().expect("at least two samples");
    let final_entropy = density_from_state(last, &dims)
        .and_then(|rho| reduce(&rho, 0))
        .and_then(|rc| von_neumann_entropy(&rc))
        .map_err(numerical("final entropy"))?;

    let oracle_deviation = if scn.propagator == Method::ExpIntegral {
        let (t0, t1) = (scn.time.t0, scn.time.t1);
        let run = propagator(scn, &model, t1)?;
        let reference = Propagator::oracle(&model.hamiltonian, t0, t1, scn.oracle_steps);
        Some(run.max_abs_diff(&reference))
    } else {
        None
    };

    Ok(Simulation {
        header: header(scn),
        rows,
        summary: Summary {
            rabi_omega,
            max_norm_drift,
            max_cavity_population_drift: max_pop_drift,
            final_entropy,
            oracle_deviation,
        },
    })
}

/// Writes `timeseries.csv` and `summary.json` into `out`.
pub fn write_simulation(scn: &Scenario, sim: &Simulation, out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    let write = |name: &str, text: String| {
        let path = out.join(name);
        fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    };
    write("timeseries.csv", sim.csv())?;
    write("summary.json", json_text(&sim.summary.to_json(scn)))
}

pub const SWEEP_COLUMNS: [&str; 5] = [
    "rabi_omega",
    "max_norm_drift",
    "max_cavity_population_drift",
    "final_entropy",
    "oracle_deviation",
];

/// One simulation summary per value, in the given order, as CSV. Missing
/// summary entries are left empty.
pub fn run_sweep(doc: &Value, path: &str, values: &[f64]) -> Result<String, CliError> {
    // Resolve the path once so an empty sweep still rejects unknown paths.
    set_parameter(&mut doc.clone(), path, 0.0)?;
    let summaries = values
        .par_iter()
        .map(|&v| {
            let mut d = doc.clone();
            set_parameter(&mut d, path, v)?;
            let scn = Scenario::from_value(d)?;
            Ok(run_simulate(&scn)?.summary)
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut header = vec![path.to_string()];
    header.extend(SWEEP_COLUMNS.iter().map(|s| s.to_string()));
    let mut csv = csv_line(&header);
    let opt = |x: Option<f64>| x.map(float).unwrap_or_default();
    for (&v, s) in values.iter().zip(&summaries) {
        csv.push_str(&csv_line(&[
            float(v),
            opt(s.rabi_omega),
            float(s.max_norm_drift),
            float(s.max_cavity_population_drift),
            float(s.final_entropy),
            opt(s.oracle_deviation),
        ]));
    }
    Ok(csv)
}
