//! Pre- and post-selected experiments: the ABL rule, sequential-measurement
//! outcome distributions, history bundles and marginal checks.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{argument, shape, Error, Result};
use crate::histories::{
    chain_operator_sum, weight, BridgingSet, ElementaryHistory, HistoryState, TimeGrid,
};
use crate::linalg::{qubit, trace, ComplexMatrix, Ket, DEFAULT_TOL};
use crate::report::fmt_sig;

/// Normalizers at or below this make post-selection impossible.
pub const POSTSELECTION_FLOOR: f64 = 1e-15;

/// Dichotomic observable `A` (Hermitian, `A² = I`) with its spectral
/// projectors `P± = (I ± A)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSetting {
    label: String,
    observable: ComplexMatrix,
    plus: ComplexMatrix,
    minus: ComplexMatrix,
}

impl MeasurementSetting {
    pub fn new(label: impl Into<String>, observable: ComplexMatrix) -> Result<Self> {
        if !observable.is_square() {
            return Err(shape("observable must be square"));
        }
        if !observable.is_hermitian(DEFAULT_TOL) {
            return Err(argument("observable must be Hermitian"));
        }
        let d = observable.rows();
        let id = ComplexMatrix::identity(d);
        if !(&observable * &observable).approx_eq(&id, DEFAULT_TOL) {
            return Err(argument("observable must square to the identity"));
        }
        let half = Complex64::new(0.5, 0.0);
        let plus = (&id + &observable).scale(half);
        let minus = (&id - &observable).scale(half);
        Ok(MeasurementSetting {
            label: label.into(),
            observable,
            plus,
            minus,
        })
    }

    pub fn x() -> Self {
        Self::new("X", qubit::sigma_x()).expect("σx is dichotomic")
    }

    pub fn y() -> Self {
        Self::new("Y", qubit::sigma_y()).expect("σy is dichotomic")
    }

    pub fn z() -> Self {
        Self::new("Z", qubit::sigma_z()).expect("σz is dichotomic")
    }

    /// Qubit observable `n̂·σ` for the Bloch direction `(θ, φ)`.
    pub fn bloch(theta: f64, phi: f64) -> Self {
        Self::new(
            format!("bloch({theta:.6},{phi:.6})"),
            qubit::bloch_observable(theta, phi),
        )
        .expect("Bloch observables are dichotomic")
    }

    pub fn named(name: &str) -> Result<Self> {
        match name {
            "X" | "x" => Ok(Self::x()),
            "Y" | "y" => Ok(Self::y()),
            "Z" | "z" => Ok(Self::z()),
            other => Err(argument(format!(
                "unknown setting name {other:?}; use X, Y or Z"
            ))),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn observable(&self) -> &ComplexMatrix {
        &self.observable
    }

    pub fn dim(&self) -> usize {
        self.observable.rows()
    }

    pub fn projector(&self, s: Sign) -> &ComplexMatrix {
        match s {
            Sign::Plus => &self.plus,
            Sign::Minus => &self.minus,
        }
    }

    /// Conjugates the observable by `u`: `u A u†`.
    pub fn conjugated(&self, u: &ComplexMatrix) -> Result<Self> {
        Self::new(self.label.clone(), self.observable.conjugate_by(u)?)
    }
}

impl Serialize for MeasurementSetting {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Doc<'a> {
            label: &'a str,
            observable: &'a ComplexMatrix,
        }
        Doc {
            label: &self.label,
            observable: &self.observable,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MeasurementSetting {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Doc {
            Named(String),
            Bloch {
                theta: f64,
                phi: f64,
                label: Option<String>,
            },
            Matrix {
                label: String,
                observable: ComplexMatrix,
            },
        }
        let setting = match Doc::deserialize(d)? {
            Doc::Named(name) => MeasurementSetting::named(&name),
            Doc::Bloch { theta, phi, label } => {
                let s = MeasurementSetting::bloch(theta, phi);
                Ok(match label {
                    Some(l) => s.with_label(l),
                    None => s,
                })
            }
            Doc::Matrix { label, observable } => MeasurementSetting::new(label, observable),
        };
        setting.map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// Outcomes of the measured slots, earliest first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OutcomeString(pub Vec<Sign>);

impl OutcomeString {
    /// All `2^len` strings in lexicographic order (`+` before `-`).
    pub fn all(len: usize) -> Vec<OutcomeString> {
        (0..1usize << len)
            .map(|bits| {
                OutcomeString(
                    (0..len)
                        .map(|i| {
                            if bits >> (len - 1 - i) & 1 == 0 {
                                Sign::Plus
                            } else {
                                Sign::Minus
                            }
                        })
                        .collect(),
                )
            })
            .collect()
    }

    pub fn signs(&self) -> &[Sign] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Product of the ±1 values.
    pub fn parity(&self) -> f64 {
        self.0.iter().map(|s| s.value()).product()
    }

    /// `t1:+ t2:-` style rendering with explicit time labels.
    pub fn labelled(&self, labels: &[String]) -> String {
        self.0
            .iter()
            .zip(labels)
            .map(|(s, l)| format!("{l}:{}", s.symbol()))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for OutcomeString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{}", s.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for OutcomeString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '+' => Ok(Sign::Plus),
                '-' | '−' => Ok(Sign::Minus),
                other => Err(argument(format!("bad outcome symbol {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(OutcomeString)
    }
}

impl Serialize for OutcomeString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for OutcomeString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Probability table over outcome strings of the measured slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionDoc")]
pub struct OutcomeDistribution {
    settings: Vec<String>,
    table: BTreeMap<OutcomeString, f64>,
}

#[derive(Deserialize)]
struct DistributionDoc {
    settings: Vec<String>,
    table: BTreeMap<OutcomeString, f64>,
}

impl TryFrom<DistributionDoc> for OutcomeDistribution {
    type Error = Error;

    fn try_from(d: DistributionDoc) -> Result<Self> {
        OutcomeDistribution::new(d.settings, d.table)
    }
}

impl OutcomeDistribution {
    pub fn new(settings: Vec<String>, table: BTreeMap<OutcomeString, f64>) -> Result<Self> {
        if table.keys().any(|k| k.len() != settings.len()) {
            return Err(argument("outcome strings must have one sign per setting"));
        }
        if table.values().any(|p| !p.is_finite() || *p < -1e-12) {
            return Err(argument("probabilities must be non-negative"));
        }
        let total: f64 = table.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(argument(format!("probabilities sum to {total}, not 1")));
        }
        Ok(OutcomeDistribution { settings, table })
    }

    /// Normalizes non-negative weights into a distribution.
    fn from_weights(settings: Vec<String>, weights: Vec<(OutcomeString, f64)>) -> Result<Self> {
        let total: f64 = weights.iter().map(|(_, w)| w).sum();
        if total <= POSTSELECTION_FLOOR {
            return Err(Error::ImpossiblePostselection { normalizer: total });
        }
        let table = weights.into_iter().map(|(k, w)| (k, w / total)).collect();
        Self::new(settings, table)
    }

    pub fn settings(&self) -> &[String] {
        &self.settings
    }

    pub fn table(&self) -> &BTreeMap<OutcomeString, f64> {
        &self.table
    }

    /// Probability of an outcome string such as `"+-"`; missing strings have probability 0.
    pub fn probability(&self, outcome: &str) -> Result<f64> {
        let k: OutcomeString = outcome.parse()?;
        Ok(self.table.get(&k).copied().unwrap_or(0.0))
    }

    /// `[p(+), p(-)]` for measured slot `index`.
    pub fn marginal(&self, index: usize) -> Result<[f64; 2]> {
        if index >= self.settings.len() {
            return Err(argument(format!("no measured slot {index}")));
        }
        let mut m = [0.0; 2];
        for (k, p) in &self.table {
            m[if k.0[index] == Sign::Plus { 0 } else { 1 }] += p;
        }
        Ok(m)
    }

    /// `Σ p(ā) Π a_i`.
    pub fn correlator(&self) -> f64 {
        self.table.iter().map(|(k, p)| k.parity() * p).sum()
    }

    /// `outcome,probability` rows, probabilities with 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("outcome,probability\n");
        for (k, p) in &self.table {
            out.push_str(&format!("{k},{}\n", fmt_sig(*p, 12)));
        }
        out
    }

    /// Rows rendered with time labels, e.g. `t1:+ t2:-  0.5`.
    pub fn labelled_rows(&self, labels: &[String]) -> Vec<(String, f64)> {
        self.table
            .iter()
            .map(|(k, p)| (k.labelled(labels), *p))
            .collect()
    }
}

/// Pre-selected state, optional post-selection, measurement settings at the
/// intermediate times and one unitary per interval (`slots.len() + 1`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoTimeExperiment {
    pre: Ket,
    post: Option<Ket>,
    slots: Vec<Option<MeasurementSetting>>,
    unitaries: Vec<ComplexMatrix>,
}

#[derive(Deserialize)]
struct ExperimentDoc {
    pre: Ket,
    #[serde(default)]
    post: Option<Ket>,
    slots: Vec<Option<MeasurementSetting>>,
    #[serde(default)]
    unitaries: Vec<ComplexMatrix>,
}

impl<'de> Deserialize<'de> for TwoTimeExperiment {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = ExperimentDoc::deserialize(d)?;
        let built = if doc.unitaries.is_empty() {
            TwoTimeExperiment::trivial(doc.pre, doc.post, doc.slots)
        } else {
            TwoTimeExperiment::new(doc.pre, doc.post, doc.slots, doc.unitaries)
        };
        built.map_err(serde::de::Error::custom)
    }
}

impl TwoTimeExperiment {
    pub fn new(
        pre: Ket,
        post: Option<Ket>,
        slots: Vec<Option<MeasurementSetting>>,
        unitaries: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        let d = pre.dim();
        if !pre.is_normalized(DEFAULT_TOL) {
            return Err(argument("pre-selected state must be normalized"));
        }
        if let Some(p) = &post {
            if p.dim() != d {
                return Err(shape("post-selected state dimension differs from pre"));
            }
            if !p.is_normalized(DEFAULT_TOL) {
                return Err(argument("post-selected state must be normalized"));
            }
        }
        if slots.iter().flatten().any(|s| s.dim() != d) {
            return Err(shape("setting dimension differs from the state dimension"));
        }
        if unitaries.len() != slots.len() + 1 {
            return Err(argument(format!(
                "{} slots need {} interval unitaries, got {}",
                slots.len(),
                slots.len() + 1,
                unitaries.len()
            )));
        }
        for u in &unitaries {
            if u.rows() != d || u.cols() != d {
                return Err(shape("interval unitary has the wrong dimension"));
            }
            if !u.is_unitary(DEFAULT_TOL) {
                return Err(argument("interval operator is not unitary"));
            }
        }
        Ok(TwoTimeExperiment {
            pre,
            post,
            slots,
            unitaries,
        })
    }

    /// Identity evolution on every interval.
    pub fn trivial(
        pre: Ket,
        post: Option<Ket>,
        slots: Vec<Option<MeasurementSetting>>,
    ) -> Result<Self> {
        let id = ComplexMatrix::identity(pre.dim());
        let n = slots.len() + 1;
        Self::new(pre, post, slots, vec![id; n])
    }

    pub fn pre(&self) -> &Ket {
        &self.pre
    }

    pub fn post(&self) -> Option<&Ket> {
        self.post.as_ref()
    }

    pub fn slots(&self) -> &[Option<MeasurementSetting>] {
        &self.slots
    }

    pub fn unitaries(&self) -> &[ComplexMatrix] {
        &self.unitaries
    }

    pub fn measured_slots(&self) -> Vec<usize> {
        (0..self.slots.len())
            .filter(|&i| self.slots[i].is_some())
            .collect()
    }

    fn setting_labels(&self) -> Vec<String> {
        self.slots
            .iter()
            .flatten()
            .map(|s| s.label().to_string())
            .collect()
    }

    /// `U_m P_m … U_1 P_1 U_0 |pre⟩` for one outcome string over the measured slots.
    fn collapsed(&self, outcome: &OutcomeString) -> Result<Ket> {
        let mut v = self.pre.clone();
        let mut signs = outcome.0.iter();
        for (u, slot) in self.unitaries.iter().zip(&self.slots) {
            v = u.apply(&v)?;
            if let Some(s) = slot {
                let sign = signs
                    .next()
                    .ok_or_else(|| argument("outcome string too short"))?;
                v = s.projector(*sign).apply(&v)?;
            }
        }
        v = self
            .unitaries
            .last()
            .expect("at least one interval")
            .apply(&v)?;
        Ok(v)
    }

    fn outcome_weight(&self, outcome: &OutcomeString) -> Result<f64> {
        let v = self.collapsed(outcome)?;
        Ok(match &self.post {
            Some(p) => p.inner(&v)?.norm_sqr(),
            None => v.norm_sqr(),
        })
    }

    fn weights(&self) -> Result<Vec<(OutcomeString, f64)>> {
        let m = self.measured_slots().len();
        if m == 0 {
            return Err(argument("experiment has no measured slot"));
        }
        OutcomeString::all(m)
            .into_iter()
            .map(|k| {
                let w = self.outcome_weight(&k)?;
                Ok((k, w))
            })
            .collect()
    }
}

/// ABL probability of `outcome` at the single measured `slot`.
pub fn abl_probability(exp: &TwoTimeExperiment, slot: usize, outcome: Sign) -> Result<f64> {
    if exp.post.is_none() {
        return Err(argument("the ABL rule needs a post-selected state"));
    }
    let measured = exp.measured_slots();
    if measured.len() != 1 {
        return Err(argument(format!(
            "the ABL rule takes exactly one measured slot, found {}",
            measured.len()
        )));
    }
    if measured[0] != slot {
        return Err(argument(format!("slot {slot} is not the measured slot")));
    }
    let w = |s: Sign| exp.outcome_weight(&OutcomeString(vec![s]));
    let norm = w(Sign::Plus)? + w(Sign::Minus)?;
    if norm <= POSTSELECTION_FLOOR {
        return Err(Error::ImpossiblePostselection { normalizer: norm });
    }
    Ok(w(outcome)? / norm)
}

/// Joint distribution of the measured outcomes, conditioned on the post-selection if any.
pub fn sequence_distribution(exp: &TwoTimeExperiment) -> Result<OutcomeDistribution> {
    OutcomeDistribution::from_weights(exp.setting_labels(), exp.weights()?)
}

/// Sequential-collapse distribution for a density-matrix start.
pub fn mixed_sequence_distribution(
    rho0: &ComplexMatrix,
    slots: &[Option<MeasurementSetting>],
    unitaries: &[ComplexMatrix],
    post: Option<&Ket>,
) -> Result<OutcomeDistribution> {
    let d = rho0.rows();
    if !rho0.is_square() || !rho0.is_hermitian(DEFAULT_TOL) {
        return Err(argument("initial density must be square and Hermitian"));
    }
    if (trace(rho0)?.re - 1.0).abs() > DEFAULT_TOL {
        return Err(argument("initial density must have unit trace"));
    }
    let unitaries: Vec<ComplexMatrix> = if unitaries.is_empty() {
        vec![ComplexMatrix::identity(d); slots.len() + 1]
    } else {
        unitaries.to_vec()
    };
    if unitaries.len() != slots.len() + 1 {
        return Err(argument("need one unitary per interval"));
    }
    if unitaries
        .iter()
        .any(|u| u.rows() != d || !u.is_unitary(DEFAULT_TOL))
        || slots.iter().flatten().any(|s| s.dim() != d)
        || post.is_some_and(|p| p.dim() != d)
    {
        return Err(shape(
            "dimensions or unitarity of the experiment are inconsistent",
        ));
    }
    let labels: Vec<String> = slots
        .iter()
        .flatten()
        .map(|s| s.label().to_string())
        .collect();
    if labels.is_empty() {
        return Err(argument("experiment has no measured slot"));
    }
    let post_proj = post.map(ComplexMatrix::projector);
    let weights = OutcomeString::all(labels.len())
        .into_iter()
        .map(|k| {
            let mut rho = rho0.clone();
            let mut signs = k.0.iter();
            for (u, slot) in unitaries.iter().zip(slots) {
                rho = rho.conjugate_by(u)?;
                if let Some(s) = slot {
                    let p = s.projector(*signs.next().expect("one sign per measured slot"));
                    rho = &(p * &rho) * p;
                }
            }
            rho = rho.conjugate_by(unitaries.last().expect("non-empty"))?;
            let w = match &post_proj {
                Some(p) => trace(&(p * &rho))?.re,
                None => trace(&rho)?.re,
            };
            Ok((k, w.max(0.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    OutcomeDistribution::from_weights(labels, weights)
}

/// Coherent-amplitude value for one outcome string inserted into a history.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherentBundle {
    /// `Tr K` of the history with outcome projectors inserted.
    pub amplitude: Complex64,
    /// `|amplitude|²`.
    pub weight: f64,
    /// `Σ |amplitude|²` over every outcome string of the measured slots.
    pub normalizer: f64,
    /// `weight / normalizer`.
    pub probability: f64,
}

/// Replaces the operators at `measured` slots in every branch of `h` with the
/// outcome projectors of `outcome`, closes the chain with a trace, and sums
/// the branch amplitudes coherently.
pub fn coherent_bundle_probability(
    h: &HistoryState,
    b: &BridgingSet,
    measured: &[(usize, MeasurementSetting)],
    outcome: &OutcomeString,
) -> Result<CoherentBundle> {
    if outcome.len() != measured.len() {
        return Err(argument("one outcome per measured slot is required"));
    }
    let h = crate::histories::normalize(h)?;
    let amplitude_for = |k: &OutcomeString| -> Result<Complex64> {
        let inserted =
            h.map_slots(
                |slot, op| match measured.iter().position(|(s, _)| *s == slot) {
                    Some(i) => Ok(measured[i].1.projector(k.0[i]).clone()),
                    None => Ok(op.clone()),
                },
            )?;
        if inserted.is_zero() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        trace(&chain_operator_sum(&inserted, b)?)
    };
    let amplitude = amplitude_for(outcome)?;
    let mut normalizer = 0.0;
    for k in OutcomeString::all(measured.len()) {
        normalizer += amplitude_for(&k)?.norm_sqr();
    }
    if normalizer <= POSTSELECTION_FLOOR {
        return Err(Error::ImpossiblePostselection { normalizer });
    }
    Ok(CoherentBundle {
        amplitude,
        weight: amplitude.norm_sqr(),
        normalizer,
        probability: amplitude.norm_sqr() / normalizer,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BundleEntry {
    pub outcome: OutcomeString,
    pub history: HistoryState,
    pub probability: f64,
}

/// Histories `[post]⊙P_m⊙…⊙P_1⊙[pre]` of an experiment, one per outcome
/// string with non-zero probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryBundle {
    pub bridging: BridgingSet,
    pub entries: Vec<BundleEntry>,
}

impl HistoryBundle {
    /// Largest gap between the stored probabilities and the normalized chain-operator weights.
    pub fn max_weight_deviation(&self) -> Result<f64> {
        let weights = self
            .entries
            .iter()
            .map(|e| weight(&e.history, &self.bridging))
            .collect::<Result<Vec<_>>>()?;
        let total: f64 = weights.iter().sum();
        if total <= POSTSELECTION_FLOOR {
            return Err(Error::ZeroTotal("bundle weights vanish".into()));
        }
        Ok(self
            .entries
            .iter()
            .zip(&weights)
            .map(|(e, w)| (e.probability - w / total).abs())
            .fold(0.0, f64::max))
    }
}

pub fn history_bundle(exp: &TwoTimeExperiment) -> Result<HistoryBundle> {
    let dist = sequence_distribution(exp)?;
    let d = exp.pre.dim();
    let grid = TimeGrid::uniform(exp.slots.len() + 2, d)?;
    let bridging = BridgingSet::new(grid.clone(), exp.unitaries.clone())?;
    let id = ComplexMatrix::identity(d);
    let last = match &exp.post {
        Some(p) => ComplexMatrix::projector(p),
        None => id.clone(),
    };
    let mut entries = Vec::new();
    for (k, p) in dist.table() {
        if *p <= POSTSELECTION_FLOOR {
            continue;
        }
        let mut signs = k.0.iter();
        let mut slots = vec![ComplexMatrix::projector(&exp.pre)];
        for s in &exp.slots {
            slots.push(match s {
                Some(s) => s.projector(*signs.next().expect("sign per slot")).clone(),
                None => id.clone(),
            });
        }
        slots.push(last.clone());
        entries.push(BundleEntry {
            outcome: k.clone(),
            history: ElementaryHistory::new(grid.clone(), slots)?.into(),
            probability: *p,
        });
    }
    Ok(HistoryBundle { bridging, entries })
}

/// Deviations of single-time marginals under a change of the other time's setting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalReport {
    /// `max |p(a|x,y) − p(a|x,y′)|` for the earlier outcome.
    pub earlier_deviation: f64,
    /// `max |p(b|x,y) − p(b|x′,y)|` for the later outcome.
    pub later_deviation: f64,
    pub tol: f64,
    /// Only the earlier deviation is flagged; later-time dependence is expected
    /// whenever the earlier measurement disturbs the state.
    pub earlier_violation: bool,
}

/// Compares marginals across a family of two-slot distributions keyed by the
/// setting labels `(x, y)` of the earlier and later time.
pub fn marginal_independence_check(
    family: &BTreeMap<(String, String), OutcomeDistribution>,
    tol: f64,
) -> Result<MarginalReport> {
    for d in family.values() {
        if d.settings().len() != 2 {
            return Err(argument(
                "marginal check needs two measured slots per distribution",
            ));
        }
    }
    let mut earlier: f64 = 0.0;
    let mut later: f64 = 0.0;
    for ((x1, y1), d1) in family {
        for ((x2, y2), d2) in family {
            if x1 == x2 {
                let (a, b) = (d1.marginal(0)?, d2.marginal(0)?);
                earlier = earlier.max((a[0] - b[0]).abs()).max((a[1] - b[1]).abs());
            }
            if y1 == y2 {
                let (a, b) = (d1.marginal(1)?, d2.marginal(1)?);
                later = later.max((a[0] - b[0]).abs()).max((a[1] - b[1]).abs());
            }
        }
    }
    Ok(MarginalReport {
        earlier_deviation: earlier,
        later_deviation: later,
        tol,
        earlier_violation: earlier > tol,
    })
}

/// The maximally mixed state `I/d`.
pub fn maximally_mixed(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d).scale(Complex64::new(1.0 / d as f64, 0.0))
}
