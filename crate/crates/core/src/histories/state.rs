use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{argument, grid, shape, Error, Result};
use crate::linalg::{dagger, is_projector, qubit, ComplexMatrix, Ket, DEFAULT_TOL, ONE, ZERO};

/// Terms whose slots agree this closely are merged.
const MERGE_TOL: f64 = 1e-12;
/// Coefficients below this magnitude are dropped after merging.
const DROP_TOL: f64 = 1e-14;

/// Ordered time labels with a Hilbert-space dimension per slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridDoc")]
pub struct TimeGrid {
    labels: Vec<f64>,
    slot_dims: Vec<usize>,
}

#[derive(Deserialize)]
struct GridDoc {
    labels: Vec<f64>,
    slot_dims: Vec<usize>,
}

impl TryFrom<GridDoc> for TimeGrid {
    type Error = Error;

    fn try_from(doc: GridDoc) -> Result<Self> {
        Self::build(doc.labels, doc.slot_dims, 1)
    }
}

impl TimeGrid {
    /// A grid of at least two slots with strictly increasing labels.
    pub fn new(labels: Vec<f64>, slot_dims: Vec<usize>) -> Result<Self> {
        Self::build(labels, slot_dims, 2)
    }

    /// `n` slots labelled `0, 1, …, n−1`, each of dimension `dim`.
    pub fn uniform(n: usize, dim: usize) -> Result<Self> {
        Self::new((0..n).map(|t| t as f64).collect(), vec![dim; n])
    }

    fn build(labels: Vec<f64>, slot_dims: Vec<usize>, min_slots: usize) -> Result<Self> {
        if labels.len() != slot_dims.len() {
            return Err(grid(format!(
                "{} labels for {} slot dimensions",
                labels.len(),
                slot_dims.len()
            )));
        }
        if labels.len() < min_slots {
            return Err(grid(format!(
                "a time grid needs at least {min_slots} slots"
            )));
        }
        if labels.iter().any(|t| !t.is_finite()) || labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(grid("time labels must be finite and strictly increasing"));
        }
        if slot_dims.iter().any(|&d| d < 2) {
            return Err(grid("every slot dimension must be at least 2"));
        }
        Ok(Self { labels, slot_dims })
    }

    /// The grid restricted to `slots` (sorted, distinct). May hold a single slot.
    pub fn select(&self, slots: &[usize]) -> Result<Self> {
        if slots.windows(2).any(|w| w[0] >= w[1]) || slots.iter().any(|&s| s >= self.len()) {
            return Err(argument(format!("invalid slot selection {slots:?}")));
        }
        Self::build(
            slots.iter().map(|&s| self.labels[s]).collect(),
            slots.iter().map(|&s| self.slot_dims[s]).collect(),
            1,
        )
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn slot_dims(&self) -> &[usize] {
        &self.slot_dims
    }

    pub(crate) fn check_same(&self, other: &TimeGrid) -> Result<()> {
        if self != other {
            return Err(grid(format!(
                "grid mismatch: {:?}/{:?} vs {:?}/{:?}",
                self.labels, self.slot_dims, other.labels, other.slot_dims
            )));
        }
        Ok(())
    }
}

/// One operator per time slot, earliest first.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementaryHistory {
    grid: TimeGrid,
    slots: Vec<ComplexMatrix>,
}

impl ElementaryHistory {
    pub fn new(grid: TimeGrid, slots: Vec<ComplexMatrix>) -> Result<Self> {
        if slots.len() != grid.len() {
            return Err(grid_err_count(slots.len(), grid.len()));
        }
        for (j, (m, &d)) in slots.iter().zip(grid.slot_dims()).enumerate() {
            if m.rows() != d || m.cols() != d {
                return Err(shape(format!(
                    "slot {j} holds a {}x{} operator, grid expects {d}x{d}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Ok(Self { grid, slots })
    }

    /// A string of projectors; every slot must pass [`is_projector`].
    pub fn projectors(grid: TimeGrid, slots: Vec<ComplexMatrix>) -> Result<Self> {
        if let Some(j) = slots.iter().position(|m| !is_projector(m, DEFAULT_TOL)) {
            return Err(argument(format!("slot {j} is not a projector")));
        }
        Self::new(grid, slots)
    }

    /// Rank-one projector string `[k_n]⊙…⊙[k_0]` on a default grid.
    pub fn from_kets(kets: &[Ket]) -> Result<Self> {
        let grid = TimeGrid::new(
            (0..kets.len()).map(|t| t as f64).collect(),
            kets.iter().map(Ket::dim).collect(),
        )?;
        Self::new(grid, kets.iter().map(ComplexMatrix::projector).collect())
    }

    /// Operator string on a default grid labelled `0..n`.
    pub fn from_slots(slots: Vec<ComplexMatrix>) -> Result<Self> {
        let grid = TimeGrid::new(
            (0..slots.len()).map(|t| t as f64).collect(),
            slots.iter().map(ComplexMatrix::rows).collect(),
        )?;
        Self::new(grid, slots)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn slots(&self) -> &[ComplexMatrix] {
        &self.slots
    }

    pub fn is_projector_string(&self, tol: f64) -> bool {
        self.slots.iter().all(|m| is_projector(m, tol))
    }

    /// `Π_j Tr(A_j† B_j)`.
    pub fn hs_inner(&self, other: &Self) -> Result<Complex64> {
        self.grid.check_same(&other.grid)?;
        self.slots
            .iter()
            .zip(&other.slots)
            .try_fold(ONE, |acc, (a, b)| Ok(acc * a.hs_inner(b)?))
    }

    pub(crate) fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.grid == other.grid
            && self
                .slots
                .iter()
                .zip(&other.slots)
                .all(|(a, b)| a.approx_eq(b, tol))
    }

    pub(crate) fn with_slots(&self, slots: Vec<ComplexMatrix>) -> Result<Self> {
        Self::new(self.grid.clone(), slots)
    }
}

fn grid_err_count(got: usize, want: usize) -> Error {
    grid(format!("{got} slots supplied for a {want}-slot grid"))
}

/// Complex superposition of elementary histories sharing one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryState {
    grid: TimeGrid,
    terms: Vec<(Complex64, ElementaryHistory)>,
}

impl HistoryState {
    /// Builds the canonical form: equal strings merged, vanishing terms dropped.
    pub fn new(grid: TimeGrid, terms: Vec<(Complex64, ElementaryHistory)>) -> Result<Self> {
        for (_, e) in &terms {
            grid.check_same(e.grid())?;
        }
        let mut merged: Vec<(Complex64, ElementaryHistory)> = Vec::with_capacity(terms.len());
        for (coeff, e) in terms {
            match merged.iter_mut().find(|(_, m)| m.approx_eq(&e, MERGE_TOL)) {
                Some((acc, _)) => *acc += coeff,
                None => merged.push((coeff, e)),
            }
        }
        merged.retain(|(z, _)| z.norm() > DROP_TOL);
        Ok(Self {
            grid,
            terms: merged,
        })
    }

    pub fn from_elementary(e: ElementaryHistory) -> Self {
        Self {
            grid: e.grid().clone(),
            terms: vec![(ONE, e)],
        }
    }

    /// Superposition of rank-one projector strings given as kets, earliest first.
    pub fn from_ket_strings(terms: &[(Complex64, Vec<Ket>)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| argument("at least one term is required"))?;
        let grid = ElementaryHistory::from_kets(&first.1)?.grid.clone();
        let built = terms
            .iter()
            .map(|(z, kets)| {
                let slots = kets.iter().map(ComplexMatrix::projector).collect();
                Ok((*z, ElementaryHistory::new(grid.clone(), slots)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, built)
    }

    /// Superposition of operator strings on a default grid.
    pub fn from_slot_strings(terms: Vec<(Complex64, Vec<ComplexMatrix>)>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| argument("at least one term is required"))?;
        let grid = ElementaryHistory::from_slots(first.1.clone())?.grid.clone();
        Self::on_grid(&grid, terms)
    }

    /// Superposition of operator strings on an explicit grid.
    pub fn on_grid(grid: &TimeGrid, terms: Vec<(Complex64, Vec<ComplexMatrix>)>) -> Result<Self> {
        let built = terms
            .into_iter()
            .map(|(z, slots)| Ok((z, ElementaryHistory::new(grid.clone(), slots)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid.clone(), built)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn terms(&self) -> &[(Complex64, ElementaryHistory)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, z: Complex64) -> Self {
        let terms = self.terms.iter().map(|(c, e)| (c * z, e.clone())).collect();
        Self::new(self.grid.clone(), terms).expect("same grid")
    }

    /// `self + other`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let terms = self.terms.iter().chain(&other.terms).cloned().collect();
        Self::new(self.grid.clone(), terms)
    }

    /// Linear combination `Σ c_i h_i` of states on a common grid.
    pub fn combine(parts: &[(Complex64, &HistoryState)]) -> Result<Self> {
        let (_, first) = parts
            .first()
            .ok_or_else(|| argument("empty linear combination"))?;
        let mut terms = Vec::new();
        for (z, h) in parts {
            first.grid.check_same(&h.grid)?;
            terms.extend(h.terms.iter().map(|(c, e)| (c * z, e.clone())));
        }
        Self::new(first.grid.clone(), terms)
    }

    /// `(self|self)`.
    pub fn norm_sqr(&self) -> f64 {
        hs_inner(self, self).map(|z| z.re).unwrap_or(0.0)
    }

    /// Applies `f` to every slot operator of every term.
    pub fn map_slots(
        &self,
        mut f: impl FnMut(usize, &ComplexMatrix) -> Result<ComplexMatrix>,
    ) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|(z, e)| {
                let slots = e
                    .slots()
                    .iter()
                    .enumerate()
                    .map(|(j, m)| f(j, m))
                    .collect::<Result<Vec<_>>>()?;
                Ok((*z, e.with_slots(slots)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.grid.clone(), terms)
    }

    /// Partial inner product with `op` on one slot: the result lives on the
    /// remaining slots and has coefficients scaled by `Tr(op† A_slot)`.
    pub fn contract_slot(&self, slot: usize, op: &ComplexMatrix) -> Result<Self> {
        if slot >= self.grid.len() {
            return Err(argument(format!("slot {slot} out of range")));
        }
        let rest: Vec<usize> = (0..self.grid.len()).filter(|&s| s != slot).collect();
        let sub = self.grid.select(&rest)?;
        let terms = self
            .terms
            .iter()
            .map(|(z, e)| {
                let factor = op.hs_inner(&e.slots()[slot])?;
                let slots = rest.iter().map(|&s| e.slots()[s].clone()).collect();
                Ok((z * factor, ElementaryHistory::new(sub.clone(), slots)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(sub, terms)
    }
}

impl From<ElementaryHistory> for HistoryState {
    fn from(e: ElementaryHistory) -> Self {
        Self::from_elementary(e)
    }
}

/// Slot-wise Hilbert–Schmidt inner product `(h1|h2)`, antilinear in `h1`.
pub fn hs_inner(h1: &HistoryState, h2: &HistoryState) -> Result<Complex64> {
    h1.grid.check_same(&h2.grid)?;
    let mut acc = ZERO;
    for (c1, e1) in &h1.terms {
        for (c2, e2) in &h2.terms {
            acc += c1.conj() * c2 * e1.hs_inner(e2)?;
        }
    }
    Ok(acc)
}

/// Rescales `h` to unit HS norm.
pub fn normalize(h: &HistoryState) -> Result<HistoryState> {
    let n2 = hs_inner(h, h)?.re;
    if n2 <= 1e-24 {
        return Err(Error::DegenerateState(
            "cannot normalize a zero-norm history".into(),
        ));
    }
    Ok(h.scale(Complex64::new(1.0 / n2.sqrt(), 0.0)))
}

/// Unitaries `T(t_{j+1}, t_j)`, one per adjacent pair of slots.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgingSet {
    grid: TimeGrid,
    unitaries: Vec<ComplexMatrix>,
}

impl BridgingSet {
    pub fn new(grid: TimeGrid, unitaries: Vec<ComplexMatrix>) -> Result<Self> {
        if unitaries.len() + 1 != grid.len() {
            return Err(crate::error::grid(format!(
                "{} bridging unitaries for {} slots",
                unitaries.len(),
                grid.len()
            )));
        }
        for (j, u) in unitaries.iter().enumerate() {
            let (din, dout) = (grid.slot_dims()[j], grid.slot_dims()[j + 1]);
            if u.rows() != dout || u.cols() != din {
                return Err(shape(format!(
                    "bridging {j} is {}x{}, expected {dout}x{din}",
                    u.rows(),
                    u.cols()
                )));
            }
            if !u.is_unitary(DEFAULT_TOL) {
                return Err(argument(format!("bridging operator {j} is not unitary")));
            }
        }
        Ok(Self { grid, unitaries })
    }

    /// `T = I` on every interval.
    pub fn trivial(grid: &TimeGrid) -> Result<Self> {
        let unitaries = grid
            .slot_dims()
            .windows(2)
            .map(|w| {
                if w[0] == w[1] {
                    Ok(ComplexMatrix::identity(w[0]))
                } else {
                    Err(shape("trivial bridging needs equal slot dimensions"))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid.clone(), unitaries)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn unitaries(&self) -> &[ComplexMatrix] {
        &self.unitaries
    }

    /// `T(t_j, t_i)` for `i ≤ j`, composed from the adjacent intervals.
    pub fn between(&self, i: usize, j: usize) -> Result<ComplexMatrix> {
        if i > j || j >= self.grid.len() {
            return Err(argument(format!("no propagator from slot {i} to slot {j}")));
        }
        let mut acc = ComplexMatrix::identity(self.grid.slot_dims()[i]);
        for u in &self.unitaries[i..j] {
            acc = u * &acc;
        }
        Ok(acc)
    }

    /// Reverse propagator `T(t_i, t_j) = T(t_j, t_i)†`.
    pub fn backward(&self, i: usize, j: usize) -> Result<ComplexMatrix> {
        Ok(dagger(&self.between(i, j)?))
    }
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    coefficient: Complex64,
    slots: Vec<ComplexMatrix>,
}

#[derive(Serialize, Deserialize)]
struct HistoryDoc {
    grid: TimeGrid,
    terms: Vec<TermDoc>,
}

impl Serialize for HistoryState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HistoryDoc {
            grid: self.grid.clone(),
            terms: self
                .terms
                .iter()
                .map(|(z, e)| TermDoc {
                    coefficient: *z,
                    slots: e.slots.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HistoryState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = HistoryDoc::deserialize(d)?;
        let terms = doc
            .terms
            .into_iter()
            .map(|t| (t.coefficient, t.slots))
            .collect();
        HistoryState::on_grid(&doc.grid, terms).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct BridgingDoc {
    grid: TimeGrid,
    unitaries: Vec<ComplexMatrix>,
}

impl Serialize for BridgingSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BridgingDoc {
            grid: self.grid.clone(),
            unitaries: self.unitaries.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BridgingSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = BridgingDoc::deserialize(d)?;
        BridgingSet::new(doc.grid, doc.unitaries).map_err(serde::de::Error::custom)
    }
}

/// Short name for common qubit slot operators, used when rendering.
fn slot_name(m: &ComplexMatrix) -> String {
    if m.rows() == 2 {
        let named = [
            ("z+", ComplexMatrix::projector(&qubit::zero())),
            ("z-", ComplexMatrix::projector(&qubit::one())),
            ("x+", ComplexMatrix::projector(&qubit::plus_x())),
            ("x-", ComplexMatrix::projector(&qubit::minus_x())),
            ("y+", ComplexMatrix::projector(&qubit::plus_y())),
            ("y-", ComplexMatrix::projector(&qubit::minus_y())),
            ("I", ComplexMatrix::identity(2)),
            ("X", qubit::sigma_x()),
            ("Y", qubit::sigma_y()),
            ("Z", qubit::sigma_z()),
        ];
        for (name, op) in &named {
            if m.approx_eq(op, 1e-9) {
                return name.to_string();
            }
        }
    }
    if m.approx_eq(&ComplexMatrix::identity(m.rows()), 1e-9) {
        return "I".into();
    }
    if m.rows() == 4 && m.approx_eq(&qubit::phi_plus().density(), 1e-9) {
        return "Φ+".into();
    }
    format!("M{}", m.rows())
}

impl fmt::Display for ElementaryHistory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .slots
            .iter()
            .rev()
            .map(|m| format!("[{}]", slot_name(m)))
            .collect();
        write!(f, "{}", parts.join("⊙"))
    }
}

impl fmt::Display for HistoryState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (z, e)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if z.im.abs() < 1e-12 {
                write!(f, "{:.6}·{e}", z.re)?;
            } else {
                write!(f, "({:.6}{:+.6}i)·{e}", z.re, z.im)?;
            }
        }
        Ok(())
    }
}
