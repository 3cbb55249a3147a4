//! Settings search over qubit Bloch angles: a coordinate-block grid sweep
//! followed by Nelder–Mead, from several seeded starts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{chained_bell, monogamy_sum, s_lgi, CorrelatorSpec, EvaluationMode, MonogamySpec};
use crate::error::{argument, Result};
use crate::linalg::ComplexMatrix;
use crate::optim::{nelder_mead, NelderMeadConfig};
use crate::report::fmt_sig;
use crate::twostate::MeasurementSetting;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochAngles {
    pub theta: f64,
    pub phi: f64,
}

impl BlochAngles {
    pub fn new(theta: f64, phi: f64) -> Self {
        BlochAngles { theta, phi }
    }

    pub fn setting(&self, label: &str) -> MeasurementSetting {
        MeasurementSetting::bloch(self.theta, self.phi).with_label(label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    SLgi,
    MonogamySum(EvaluationMode),
    ChainedBell(usize),
}

impl Objective {
    /// Names of the optimized settings, in parameter order.
    pub fn setting_names(&self) -> Vec<String> {
        match self {
            Objective::SLgi => ["A1", "A2", "B1", "B2"].map(String::from).to_vec(),
            Objective::MonogamySum(_) => ["A1", "A2", "B1", "B2", "C1", "C2"]
                .map(String::from)
                .to_vec(),
            Objective::ChainedBell(n) => (0..=*n)
                .flat_map(|i| [format!("A{i}_1"), format!("A{i}_2")])
                .collect(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Objective::SLgi => "s_lgi".into(),
            Objective::MonogamySum(m) => format!("monogamy_sum[{}]", m.name()),
            Objective::ChainedBell(n) => format!("chained_bell[{n}]"),
        }
    }

    fn evaluate(
        &self,
        rho: &ComplexMatrix,
        u: &ComplexMatrix,
        names: &[String],
        angles: &[BlochAngles],
    ) -> Result<f64> {
        let s: Vec<MeasurementSetting> = angles
            .iter()
            .zip(names)
            .map(|(a, n)| a.setting(n))
            .collect();
        let pair = |i: usize| [s[2 * i].clone(), s[2 * i + 1].clone()];
        match self {
            Objective::SLgi => {
                let mut spec = CorrelatorSpec::new(rho.clone(), pair(0), pair(1));
                spec.interval_unitaries = vec![u.clone()];
                Ok(s_lgi(&spec)?.value)
            }
            Objective::MonogamySum(mode) => {
                let mut spec = MonogamySpec::trivial(rho.clone(), pair(0), pair(1), pair(2), *mode);
                spec.unitaries = [u.clone(), u.clone()];
                Ok(monogamy_sum(&spec)?.sum)
            }
            Objective::ChainedBell(n) => {
                let pairs: Vec<_> = (0..=*n).map(pair).collect();
                Ok(chained_bell(*n, &pairs, rho, u)?.sum)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub grid_theta: usize,
    pub grid_phi: usize,
    /// Passes of the coordinate-block grid over all free settings.
    pub sweeps: usize,
    pub restarts: usize,
    pub seed: u64,
    pub local: NelderMeadConfig,
    /// Settings held fixed, by parameter index; `None` entries are optimized.
    pub frozen: Vec<Option<BlochAngles>>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            grid_theta: 12,
            grid_phi: 24,
            sweeps: 2,
            restarts: 4,
            seed: 0,
            local: NelderMeadConfig {
                tol: 1e-10,
                max_evals: 10_000,
                initial_step: 0.2,
            },
            frozen: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub stage: String,
    /// `θ, φ` per setting, flattened.
    pub angles: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub objective: String,
    pub settings: Vec<(String, BlochAngles)>,
    pub value: f64,
    pub converged: bool,
    pub evaluations: usize,
    pub restart: usize,
    pub trace: Vec<TraceEntry>,
}

impl OptimizeResult {
    /// `iteration,stage,theta_<name>,phi_<name>,…,value`.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,stage");
        for (name, _) in &self.settings {
            out.push_str(&format!(",theta_{name},phi_{name}"));
        }
        out.push_str(",value\n");
        for row in &self.trace {
            out.push_str(&format!("{},{}", row.iteration, row.stage));
            for a in &row.angles {
                out.push_str(&format!(",{}", fmt_sig(*a, 12)));
            }
            out.push_str(&format!(",{}\n", fmt_sig(row.value, 12)));
        }
        out
    }
}

struct Run {
    angles: Vec<BlochAngles>,
    value: f64,
    converged: bool,
    evaluations: usize,
    trace: Vec<TraceEntry>,
}

fn flatten(a: &[BlochAngles]) -> Vec<f64> {
    a.iter().flat_map(|b| [b.theta, b.phi]).collect()
}

/// Maximizes the objective over Bloch angles.
///
/// Each restart begins from seeded random angles, sweeps every free setting
/// over a `grid_theta × grid_phi` grid with the others held fixed, then
/// refines all free angles together with Nelder–Mead. Restarts run in
/// parallel; the best value wins and ties go to the lowest restart index.
pub fn optimize_settings(
    objective: Objective,
    initial: &ComplexMatrix,
    u: &ComplexMatrix,
    cfg: &OptimizerConfig,
) -> Result<OptimizeResult> {
    let names = objective.setting_names();
    let k = names.len();
    if initial.rows() != 2 {
        return Err(argument("the settings optimizer works on qubits"));
    }
    if cfg.frozen.len() > k {
        return Err(argument(format!(
            "{} frozen entries for {k} settings",
            cfg.frozen.len()
        )));
    }
    if cfg.grid_theta < 2 || cfg.grid_phi < 1 {
        return Err(argument(
            "grid needs at least 2 polar and 1 azimuthal points",
        ));
    }
    // Validate the inputs once so evaluation errors cannot occur later.
    objective.evaluate(initial, u, &names, &vec![BlochAngles::new(0.0, 0.0); k])?;
    let frozen = |i: usize| cfg.frozen.get(i).copied().flatten();
    let free: Vec<usize> = (0..k).filter(|&i| frozen(i).is_none()).collect();
    let f = |a: &[BlochAngles]| {
        objective
            .evaluate(initial, u, &names, a)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let grid: Vec<BlochAngles> = (0..cfg.grid_theta)
        .flat_map(|i| {
            (0..cfg.grid_phi).map(move |j| {
                BlochAngles::new(
                    PI * i as f64 / (cfg.grid_theta - 1) as f64,
                    2.0 * PI * j as f64 / cfg.grid_phi as f64,
                )
            })
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let starts: Vec<Vec<BlochAngles>> = (0..cfg.restarts.max(1))
        .map(|_| {
            (0..k)
                .map(|i| {
                    let t = rng.random_range(0.0..PI);
                    let p = rng.random_range(0.0..2.0 * PI);
                    frozen(i).unwrap_or(BlochAngles::new(t, p))
                })
                .collect()
        })
        .collect();

    let runs: Vec<Run> =
        starts
            .into_par_iter()
            .map(|mut angles| {
                let mut evaluations = 0;
                let mut trace = Vec::new();
                let mut value = f(&angles);
                evaluations += 1;
                let mut iteration = 0;
                for _ in 0..cfg.sweeps {
                    for &s in &free {
                        let scores: Vec<f64> = grid
                            .par_iter()
                            .map(|g| {
                                let mut trial = angles.clone();
                                trial[s] = *g;
                                f(&trial)
                            })
                            .collect();
                        evaluations += scores.len();
                        let (best, &v) = scores.iter().enumerate().fold(
                            (0, &f64::NEG_INFINITY),
                            |acc, (i, v)| if *v > *acc.1 { (i, v) } else { acc },
                        );
                        if v > value {
                            angles[s] = grid[best];
                            value = v;
                        }
                        trace.push(TraceEntry {
                            iteration,
                            stage: "grid".into(),
                            angles: flatten(&angles),
                            value,
                        });
                        iteration += 1;
                    }
                }
                let x0: Vec<f64> = free
                    .iter()
                    .flat_map(|&i| [angles[i].theta, angles[i].phi])
                    .collect();
                let place = |x: &[f64], base: &[BlochAngles]| {
                    let mut a = base.to_vec();
                    for (n, &i) in free.iter().enumerate() {
                        a[i] = BlochAngles::new(x[2 * n], x[2 * n + 1]);
                    }
                    a
                };
                let base = angles.clone();
                let m = nelder_mead(|x| -f(&place(x, &base)), &x0, &cfg.local);
                evaluations += m.evals;
                for row in &m.trace {
                    trace.push(TraceEntry {
                        iteration: iteration + row.iteration,
                        stage: "local".into(),
                        angles: flatten(&place(&row.x, &base)),
                        value: -row.value,
                    });
                }
                if -m.value >= value {
                    angles = place(&m.x, &base);
                    value = -m.value;
                }
                Run {
                    angles,
                    value,
                    converged: m.converged,
                    evaluations,
                    trace,
                }
            })
            .collect();

    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.value > runs[best].value {
            best = i;
        }
    }
    let evaluations = runs.iter().map(|r| r.evaluations).sum();
    let run = runs.into_iter().nth(best).expect("at least one restart");
    Ok(OptimizeResult {
        objective: objective.name(),
        settings: names
            .into_iter()
            .zip(run.angles.into_iter().map(normalize_angles))
            .collect(),
        value: run.value,
        converged: run.converged,
        evaluations,
        restart: best,
        trace: run.trace,
    })
}

/// Folds angles into `θ ∈ [0, π]`, `φ ∈ [0, 2π)` without changing the direction.
fn normalize_angles(a: BlochAngles) -> BlochAngles {
    let mut theta = a.theta.rem_euclid(2.0 * PI);
    let mut phi = a.phi;
    if theta > PI {
        theta = 2.0 * PI - theta;
        phi += PI;
    }
    BlochAngles::new(theta, phi.rem_euclid(2.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{presets, QUANTUM_BOUND};
    use crate::linalg::qubit;
    use crate::twostate::maximally_mixed;

    fn id() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    #[test]
    fn normalized_angles_keep_direction() {
        for (t, p) in [(4.0, 1.0), (-1.0, 0.5), (7.0, -3.0)] {
            let a = normalize_angles(BlochAngles::new(t, p));
            assert!((0.0..=PI).contains(&a.theta));
            assert!(qubit::bloch_observable(t, p)
                .approx_eq(&qubit::bloch_observable(a.theta, a.phi), 1e-12));
        }
    }

    #[test]
    fn s_lgi_reaches_tsirelson() {
        let r = optimize_settings(
            Objective::SLgi,
            &maximally_mixed(2),
            &id(),
            &OptimizerConfig::default(),
        )
        .unwrap();
        assert!((r.value - QUANTUM_BOUND).abs() < 1e-6, "{}", r.value);
        assert!(r.value <= QUANTUM_BOUND + 1e-9);
        assert!(r.converged);
        let preset = crate::bell::s_lgi(&presets::tsirelson(maximally_mixed(2)))
            .unwrap()
            .value;
        assert!((r.value - preset).abs() < 1e-6);
    }

    #[test]
    fn all_frozen_to_z_gives_two() {
        let cfg = OptimizerConfig {
            frozen: vec![Some(BlochAngles::new(0.0, 0.0)); 4],
            ..OptimizerConfig::default()
        };
        let r = optimize_settings(Objective::SLgi, &maximally_mixed(2), &id(), &cfg).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = OptimizerConfig {
            restarts: 2,
            seed: 11,
            ..OptimizerConfig::default()
        };
        let a = optimize_settings(Objective::SLgi, &maximally_mixed(2), &id(), &cfg).unwrap();
        let b = optimize_settings(Objective::SLgi, &maximally_mixed(2), &id(), &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a
            .trace_csv()
            .starts_with("iteration,stage,theta_A1,phi_A1,"));
    }

    #[test]
    fn tight_budget_is_flagged() {
        let cfg = OptimizerConfig {
            restarts: 1,
            sweeps: 0,
            local: NelderMeadConfig {
                tol: 0.0,
                max_evals: 20,
                initial_step: 0.2,
            },
            ..OptimizerConfig::default()
        };
        let r = optimize_settings(Objective::SLgi, &maximally_mixed(2), &id(), &cfg).unwrap();
        assert!(!r.converged);
    }
}
