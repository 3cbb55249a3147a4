//! Temporal correlators and Bell-type functionals built from sequential
//! projective measurements on one system.
//!
//! A correlator `c_ij` is the expectation of the product of the outcomes of
//! `A_i` at the earlier time and `B_j` at the later time, with Lüders collapse
//! after the first measurement.

mod functional;
mod optimize;
pub mod presets;

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{argument, shape, Result};
use crate::linalg::{dagger, trace, ComplexMatrix, DEFAULT_TOL};
use crate::report::{csv_field, fmt_sig};
use crate::twostate::{mixed_sequence_distribution, MeasurementSetting, OutcomeDistribution, Sign};

pub use functional::{classical_bound_bruteforce, LinearFunctional};
pub use optimize::{optimize_settings, BlochAngles, Objective, OptimizeResult, OptimizerConfig};

pub const CLASSICAL_BOUND: f64 = 2.0;
pub const QUANTUM_BOUND: f64 = 2.0 * SQRT_2;
/// Spatial monogamy cap on `S_AB + S_BC`.
pub const SPATIAL_MONOGAMY_BOUND: f64 = 4.0;
pub const MONOGAMY_QUANTUM_REFERENCE: f64 = 4.0 * SQRT_2;
/// Reports flag saturation of the quantum bound within this distance.
pub const SATURATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaluationMode {
    /// Each correlator comes from a fresh run prepared in the initial state.
    IndependentEnsembles,
    /// One run over all times; later pairs see the state left by earlier measurements.
    ChainedSingleSystem,
}

impl EvaluationMode {
    pub fn name(self) -> &'static str {
        match self {
            EvaluationMode::IndependentEnsembles => "independent_ensembles",
            EvaluationMode::ChainedSingleSystem => "chained_single_system",
        }
    }
}

fn check_density(rho: &ComplexMatrix) -> Result<()> {
    if !rho.is_square() || !rho.is_hermitian(DEFAULT_TOL) {
        return Err(argument("initial state must be a Hermitian square matrix"));
    }
    if (trace(rho)?.re - 1.0).abs() > DEFAULT_TOL {
        return Err(argument("initial state must have unit trace"));
    }
    Ok(())
}

/// `E = Σ_ab a·b·Tr(P_b U P_a ρ P_a U† P_b)`.
pub fn temporal_correlator(
    rho: &ComplexMatrix,
    a: &MeasurementSetting,
    u: &ComplexMatrix,
    b: &MeasurementSetting,
) -> Result<f64> {
    let d = rho.rows();
    if a.dim() != d || b.dim() != d || u.rows() != d || u.cols() != d {
        return Err(shape("correlator operands have mismatched dimensions"));
    }
    let ud = dagger(u);
    let mut e = 0.0;
    for sa in Sign::BOTH {
        let pa = a.projector(sa);
        let after = &(&(u * pa) * rho) * &(pa * &ud);
        // Σ_b b Tr(P_b σ) = Tr(B σ)
        e += sa.value() * trace(&(b.observable() * &after))?.re;
    }
    Ok(e)
}

/// Joint outcome table of `A` then `B`, separated by `U`.
pub fn joint_distribution(
    rho: &ComplexMatrix,
    a: &MeasurementSetting,
    u: &ComplexMatrix,
    b: &MeasurementSetting,
) -> Result<OutcomeDistribution> {
    let id = ComplexMatrix::identity(rho.rows());
    mixed_sequence_distribution(
        rho,
        &[Some(a.clone()), Some(b.clone())],
        &[id.clone(), u.clone(), id],
        None,
    )
}

/// Two-time functional input: state before the first measurement, evolution
/// between the two times, two settings per time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorSpec {
    pub initial: ComplexMatrix,
    pub interval_unitaries: Vec<ComplexMatrix>,
    pub alice: [MeasurementSetting; 2],
    pub bob: [MeasurementSetting; 2],
    pub mode: EvaluationMode,
}

impl CorrelatorSpec {
    /// Trivial evolution, independent ensembles.
    pub fn new(
        initial: ComplexMatrix,
        alice: [MeasurementSetting; 2],
        bob: [MeasurementSetting; 2],
    ) -> Self {
        let d = initial.rows();
        CorrelatorSpec {
            initial,
            interval_unitaries: vec![ComplexMatrix::identity(d)],
            alice,
            bob,
            mode: EvaluationMode::IndependentEnsembles,
        }
    }

    fn unitary(&self) -> Result<ComplexMatrix> {
        match self.interval_unitaries.as_slice() {
            [] => Ok(ComplexMatrix::identity(self.initial.rows())),
            [u] => Ok(u.clone()),
            _ => Err(argument("a two-time functional has exactly one interval")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellReport {
    /// `c[i][j]` for the earlier setting `i` and the later setting `j`.
    pub correlators: [[f64; 2]; 2],
    pub value: f64,
    pub classical_bound: f64,
    pub quantum_bound: f64,
    pub settings_used: Vec<String>,
    pub mode: EvaluationMode,
    pub exceeds_classical: bool,
    pub saturates_quantum: bool,
}

impl BellReport {
    pub fn from_correlators(
        c: [[f64; 2]; 2],
        settings_used: Vec<String>,
        mode: EvaluationMode,
    ) -> Self {
        let value = c[0][0] + c[0][1] + c[1][0] - c[1][1];
        BellReport {
            correlators: c,
            value,
            classical_bound: CLASSICAL_BOUND,
            quantum_bound: QUANTUM_BOUND,
            settings_used,
            mode,
            exceeds_classical: value > CLASSICAL_BOUND + DEFAULT_TOL,
            saturates_quantum: (value - QUANTUM_BOUND).abs() <= SATURATION_TOL,
        }
    }

    /// `quantity,value` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("quantity,value\n");
        for i in 0..2 {
            for j in 0..2 {
                out.push_str(&format!(
                    "c{}{},{}\n",
                    i + 1,
                    j + 1,
                    fmt_sig(self.correlators[i][j], 12)
                ));
            }
        }
        out.push_str(&format!("value,{}\n", fmt_sig(self.value, 12)));
        out.push_str(&format!(
            "classical_bound,{}\n",
            fmt_sig(self.classical_bound, 12)
        ));
        out.push_str(&format!(
            "quantum_bound,{}\n",
            fmt_sig(self.quantum_bound, 12)
        ));
        out.push_str(&format!("mode,{}\n", self.mode.name()));
        out.push_str(&format!(
            "settings,{}\n",
            csv_field(&self.settings_used.join(" "))
        ));
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn labels(alice: &[MeasurementSetting; 2], bob: &[MeasurementSetting; 2]) -> Vec<String> {
    alice
        .iter()
        .chain(bob)
        .map(|s| s.label().to_string())
        .collect()
}

/// Four correlators from fresh runs; `S = c11 + c12 + c21 − c22`.
///
/// With a single pair of times both modes coincide; the mode is recorded.
pub fn s_lgi(spec: &CorrelatorSpec) -> Result<BellReport> {
    check_density(&spec.initial)?;
    let u = spec.unitary()?;
    let mut c = [[0.0; 2]; 2];
    for (i, a) in spec.alice.iter().enumerate() {
        for (j, b) in spec.bob.iter().enumerate() {
            c[i][j] = temporal_correlator(&spec.initial, a, &u, b)?;
        }
    }
    Ok(BellReport::from_correlators(
        c,
        labels(&spec.alice, &spec.bob),
        spec.mode,
    ))
}

/// Report from measured joint tables keyed by setting indices `(i, j)`.
pub fn lgi_from_distributions(
    dists: &BTreeMap<(usize, usize), OutcomeDistribution>,
) -> Result<BellReport> {
    let mut c = [[0.0; 2]; 2];
    let mut names = vec![String::new(); 4];
    for i in 0..2 {
        for j in 0..2 {
            let d = dists.get(&(i, j)).ok_or_else(|| {
                argument(format!("missing distribution for setting pair ({i}, {j})"))
            })?;
            if d.settings().len() != 2 {
                return Err(argument("each distribution must cover two measured times"));
            }
            c[i][j] = d.correlator();
            names[i] = d.settings()[0].clone();
            names[2 + j] = d.settings()[1].clone();
        }
    }
    Ok(BellReport::from_correlators(
        c,
        names,
        EvaluationMode::IndependentEnsembles,
    ))
}

/// Three ordered times with shared middle settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonogamySpec {
    pub initial: ComplexMatrix,
    /// Evolution t1→t2 and t2→t3.
    pub unitaries: [ComplexMatrix; 2],
    pub a: [MeasurementSetting; 2],
    pub b: [MeasurementSetting; 2],
    pub c: [MeasurementSetting; 2],
    pub mode: EvaluationMode,
}

impl MonogamySpec {
    pub fn trivial(
        initial: ComplexMatrix,
        a: [MeasurementSetting; 2],
        b: [MeasurementSetting; 2],
        c: [MeasurementSetting; 2],
        mode: EvaluationMode,
    ) -> Self {
        let id = ComplexMatrix::identity(initial.rows());
        MonogamySpec {
            initial,
            unitaries: [id.clone(), id],
            a,
            b,
            c,
            mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonogamyReport {
    pub ab: BellReport,
    pub bc: BellReport,
    pub sum: f64,
    pub quantum_reference: f64,
    pub spatial_bound: f64,
    pub mode: EvaluationMode,
}

impl MonogamyReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("quantity,value\n");
        for (tag, r) in [("ab", &self.ab), ("bc", &self.bc)] {
            for i in 0..2 {
                for j in 0..2 {
                    out.push_str(&format!(
                        "{tag}_c{}{},{}\n",
                        i + 1,
                        j + 1,
                        fmt_sig(r.correlators[i][j], 12)
                    ));
                }
            }
            out.push_str(&format!("{tag}_value,{}\n", fmt_sig(r.value, 12)));
        }
        out.push_str(&format!("sum,{}\n", fmt_sig(self.sum, 12)));
        out.push_str(&format!(
            "quantum_reference,{}\n",
            fmt_sig(self.quantum_reference, 12)
        ));
        out.push_str(&format!(
            "spatial_bound,{}\n",
            fmt_sig(self.spatial_bound, 12)
        ));
        out.push_str(&format!("mode,{}\n", self.mode.name()));
        out
    }
}

/// `S_τAB + S_τBC`.
///
/// Independent mode evaluates the BC pair on fresh runs whose state at the
/// middle time is `U1 ρ U1†`. Chained mode measures all three times in one
/// run; the AB correlators are the (a, b) marginals and the BC correlators the
/// (b, c) marginals, each averaged uniformly over the setting of the third time.
pub fn monogamy_sum(spec: &MonogamySpec) -> Result<MonogamyReport> {
    check_density(&spec.initial)?;
    let [u1, u2] = &spec.unitaries;
    let (ab, bc) = match spec.mode {
        EvaluationMode::IndependentEnsembles => {
            let ab = s_lgi(&CorrelatorSpec {
                initial: spec.initial.clone(),
                interval_unitaries: vec![u1.clone()],
                alice: spec.a.clone(),
                bob: spec.b.clone(),
                mode: spec.mode,
            })?;
            let bc = s_lgi(&CorrelatorSpec {
                initial: spec.initial.conjugate_by(u1)?,
                interval_unitaries: vec![u2.clone()],
                alice: spec.b.clone(),
                bob: spec.c.clone(),
                mode: spec.mode,
            })?;
            (ab, bc)
        }
        EvaluationMode::ChainedSingleSystem => {
            let id = ComplexMatrix::identity(spec.initial.rows());
            let mut cab = [[0.0; 2]; 2];
            let mut cbc = [[0.0; 2]; 2];
            for (x, a) in spec.a.iter().enumerate() {
                for (y, b) in spec.b.iter().enumerate() {
                    for (z, c) in spec.c.iter().enumerate() {
                        let d = mixed_sequence_distribution(
                            &spec.initial,
                            &[Some(a.clone()), Some(b.clone()), Some(c.clone())],
                            &[id.clone(), u1.clone(), u2.clone(), id.clone()],
                            None,
                        )?;
                        for (k, p) in d.table() {
                            let s = k.signs();
                            cab[x][y] += 0.5 * p * s[0].value() * s[1].value();
                            cbc[y][z] += 0.5 * p * s[1].value() * s[2].value();
                        }
                    }
                }
            }
            (
                BellReport::from_correlators(cab, labels(&spec.a, &spec.b), spec.mode),
                BellReport::from_correlators(cbc, labels(&spec.b, &spec.c), spec.mode),
            )
        }
    };
    Ok(MonogamyReport {
        sum: ab.value + bc.value,
        ab,
        bc,
        quantum_reference: MONOGAMY_QUANTUM_REFERENCE,
        spatial_bound: SPATIAL_MONOGAMY_BOUND,
        mode: spec.mode,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainedReport {
    pub n: usize,
    /// `B_τ(A_i, A_{i+1})` per block.
    pub values: Vec<f64>,
    pub sum: f64,
    pub bound: f64,
    pub classical_bound: f64,
}

impl ChainedReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("block,value\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{i},{}\n", fmt_sig(*v, 12)));
        }
        out.push_str(&format!("sum,{}\n", fmt_sig(self.sum, 12)));
        out.push_str(&format!("bound,{}\n", fmt_sig(self.bound, 12)));
        out.push_str(&format!(
            "classical_bound,{}\n",
            fmt_sig(self.classical_bound, 12)
        ));
        out
    }
}

/// `Σ_{i<n} B_τ(A_i, A_{i+1})`, each block on a fresh ensemble from `initial`
/// with evolution `u` between its two times.
///
/// `settings` holds the setting pairs `A_0 … A_n`; a list of length 2 is
/// repeated as the loop `A_0, A_1, A_0, A_1, …`.
pub fn chained_bell(
    n: usize,
    settings: &[[MeasurementSetting; 2]],
    initial: &ComplexMatrix,
    u: &ComplexMatrix,
) -> Result<ChainedReport> {
    if n == 0 {
        return Err(argument("chained functional needs n ≥ 1"));
    }
    let pick = |i: usize| -> Result<&[MeasurementSetting; 2]> {
        if settings.len() == 2 {
            Ok(&settings[i % 2])
        } else if settings.len() == n + 1 {
            Ok(&settings[i])
        } else {
            Err(argument(format!(
                "need 2 or {} setting pairs for n = {n}, got {}",
                n + 1,
                settings.len()
            )))
        }
    };
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let mut spec = CorrelatorSpec::new(initial.clone(), pick(i)?.clone(), pick(i + 1)?.clone());
        spec.interval_unitaries = vec![u.clone()];
        values.push(s_lgi(&spec)?.value);
    }
    Ok(ChainedReport {
        n,
        sum: values.iter().sum(),
        values,
        bound: QUANTUM_BOUND * n as f64,
        classical_bound: classical_bound_bruteforce(&LinearFunctional::chained(n)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{qubit, r};
    use crate::twostate::maximally_mixed;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn id() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    fn zx_plus() -> MeasurementSetting {
        MeasurementSetting::new(
            "(Z+X)/√2",
            (&qubit::sigma_z() + &qubit::sigma_x()).scale(r(FRAC_1_SQRT_2)),
        )
        .unwrap()
    }

    #[test]
    fn correlator_examples() {
        let rho = maximally_mixed(2);
        let (z, x) = (MeasurementSetting::z(), MeasurementSetting::x());
        assert!((temporal_correlator(&rho, &z, &id(), &z).unwrap() - 1.0).abs() < 1e-12);
        assert!(temporal_correlator(&rho, &z, &id(), &x).unwrap().abs() < 1e-12);
        assert!(
            (temporal_correlator(&rho, &z, &id(), &zx_plus()).unwrap() - FRAC_1_SQRT_2).abs()
                < 1e-12
        );
    }

    #[test]
    fn correlator_matches_joint_table() {
        let rho = qubit::plus_y().density();
        let (a, b) = (
            MeasurementSetting::bloch(0.3, 1.1),
            MeasurementSetting::bloch(2.0, -0.4),
        );
        let u = qubit::hadamard();
        let e = temporal_correlator(&rho, &a, &u, &b).unwrap();
        let d = joint_distribution(&rho, &a, &u, &b).unwrap();
        assert!((e - d.correlator()).abs() < 1e-12);
    }

    #[test]
    fn s_lgi_examples() {
        let rho = maximally_mixed(2);
        let r1 = s_lgi(&presets::tsirelson(rho.clone())).unwrap();
        assert!((r1.value - QUANTUM_BOUND).abs() < 1e-12);
        assert!(r1.saturates_quantum && r1.exceeds_classical);
        for row in r1.correlators {
            for c in row {
                assert!((c.abs() - FRAC_1_SQRT_2).abs() < 1e-12);
            }
        }
        let z = MeasurementSetting::z();
        let zz = [z.clone(), z.clone()];
        let r2 = s_lgi(&CorrelatorSpec::new(rho, zz.clone(), zz.clone())).unwrap();
        assert!((r2.value - 2.0).abs() < 1e-12);
        let r3 = s_lgi(&CorrelatorSpec::new(
            qubit::zero().density(),
            zz.clone(),
            zz,
        ))
        .unwrap();
        assert!((r3.value - 2.0).abs() < 1e-12);
        assert!(!r3.exceeds_classical);
    }

    #[test]
    fn paper_quoted_settings_fall_short() {
        let rep = s_lgi(&presets::paper_quoted(maximally_mixed(2))).unwrap();
        assert!((rep.value - (1.0 + SQRT_2)).abs() < 1e-12);
    }

    #[test]
    fn monogamy_examples() {
        let rep = monogamy_sum(&presets::monogamy(
            maximally_mixed(2),
            EvaluationMode::IndependentEnsembles,
        ))
        .unwrap();
        assert!((rep.sum - 4.0 * SQRT_2).abs() < 1e-12);
        assert!(rep.sum > SPATIAL_MONOGAMY_BOUND);
        let chained = monogamy_sum(&presets::monogamy(
            maximally_mixed(2),
            EvaluationMode::ChainedSingleSystem,
        ))
        .unwrap();
        // Dephasing leaves I/2 unchanged, so the chained run sees the same middle state.
        assert!((chained.sum - 4.0 * SQRT_2).abs() < 1e-12);
        let pure = monogamy_sum(&presets::monogamy(
            qubit::zero().density(),
            EvaluationMode::ChainedSingleSystem,
        ))
        .unwrap();
        assert!(pure.sum.is_finite());
    }

    #[test]
    fn chained_examples() {
        let rho = maximally_mixed(2);
        let t = presets::tsirelson(rho.clone());
        let settings = [t.alice.clone(), t.bob.clone()];
        for n in [1, 4] {
            let rep = chained_bell(n, &settings, &rho, &id()).unwrap();
            assert!((rep.sum - QUANTUM_BOUND * n as f64).abs() < 1e-12);
            assert_eq!(rep.classical_bound, 2.0 * n as f64);
        }
        assert!(chained_bell(0, &settings, &rho, &id()).is_err());
        assert!(chained_bell(3, &settings[..1], &rho, &id()).is_err());
    }

    #[test]
    fn lgi_from_distribution_examples() {
        let rho = maximally_mixed(2);
        let spec = presets::tsirelson(rho.clone());
        let mut dists = BTreeMap::new();
        for (i, a) in spec.alice.iter().enumerate() {
            for (j, b) in spec.bob.iter().enumerate() {
                dists.insert((i, j), joint_distribution(&rho, a, &id(), b).unwrap());
            }
        }
        let a = lgi_from_distributions(&dists).unwrap();
        let b = s_lgi(&spec).unwrap();
        assert!((a.value - b.value).abs() < 1e-12);

        let uniform: BTreeMap<_, _> = crate::twostate::OutcomeString::all(2)
            .into_iter()
            .map(|k| (k, 0.25))
            .collect();
        let u = OutcomeDistribution::new(vec!["A".into(), "B".into()], uniform).unwrap();
        let mut flat = BTreeMap::new();
        for i in 0..2 {
            for j in 0..2 {
                flat.insert((i, j), u.clone());
            }
        }
        let rep = lgi_from_distributions(&flat).unwrap();
        assert!(rep.value.abs() < 1e-15);
        flat.remove(&(1, 1));
        assert!(lgi_from_distributions(&flat).is_err());
    }

    #[test]
    fn report_csv_shape() {
        let rep = s_lgi(&presets::tsirelson(maximally_mixed(2))).unwrap();
        let csv = rep.to_csv();
        assert!(csv.starts_with("quantity,value\nc11,0.707106781187\n"));
        assert!(csv.contains("value,2.82842712475\n"));
        let back: BellReport = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(back, rep);
    }
}
