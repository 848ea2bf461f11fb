//! Integration of component estimates into a system estimate: additive
//! utility, ordinal integration tables, vector sums, count profiles, quality
//! vectors with compatibility, TOPSIS-like distances and multiset medians.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::multiset::{enumerate_estimates, median_like, MedianResult, Metric, MultisetError, MultisetEstimate};
use crate::poset::{quality_dominates, PosetView};
use crate::scales::{Level, MultisetScale, OrdinalScale, QualityVector};
use crate::system::{Composition, NodeKind, SystemNode};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrationError {
    #[error("design alternative `{da}` has no {kind} estimate")]
    MissingEstimate { da: String, kind: &'static str },
    #[error("{path}: no table cell for inputs {key:?}")]
    MissingCell { path: String, key: Vec<Level> },
    #[error("{path}: no integration table")]
    MissingTable { path: String },
    #[error("{path}: {message}")]
    Mismatch { path: String, message: String },
    #[error("level {level} outside 1..={size} for `{da}`")]
    LevelOutOfRange { da: String, level: Level, size: Level },
    #[error("no compatibility estimate for pair ({0}, {1})")]
    MissingCompat(String, String),
    #[error("expected {expected} components, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("composition selects nothing")]
    EmptyComposition,
    #[error("invalid integration table: {0}")]
    InvalidTable(String),
    #[error("invalid TOPSIS configuration: {0}")]
    InvalidTopsis(String),
    #[error("point {0} coincides with both a best and a worst point")]
    DegenerateCloseness(usize),
    #[error(transparent)]
    Multiset(#[from] MultisetError),
}

/// One input of an integration table: its ordinal scale and the levels that
/// actually occur (ascending; defaults to the whole scale).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableInput {
    pub scale: OrdinalScale,
    pub levels: Vec<Level>,
}

impl TableInput {
    pub fn full(scale: OrdinalScale) -> Self {
        Self {
            scale,
            levels: (1..=scale.size).collect(),
        }
    }

    pub fn restricted(scale: OrdinalScale, mut levels: Vec<Level>) -> Self {
        levels.sort_unstable();
        levels.dedup();
        Self { scale, levels }
    }
}

/// A problem found while checking an integration table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "issue")]
pub enum TableIssue {
    MissingCell {
        key: Vec<Level>,
    },
    CellOutsideDomain {
        key: Vec<Level>,
    },
    DuplicateCell {
        key: Vec<Level>,
    },
    OutputOutOfRange {
        key: Vec<Level>,
        level: Level,
    },
    DomainOutOfRange {
        input: usize,
        level: Level,
    },
    NotMonotone {
        key: Vec<Level>,
        improved: Vec<Level>,
        input: usize,
    },
}

impl std::fmt::Display for TableIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TableIssue::MissingCell { key } => write!(f, "missing cell {key:?}"),
            TableIssue::CellOutsideDomain { key } => write!(f, "cell {key:?} outside the input domain"),
            TableIssue::DuplicateCell { key } => write!(f, "duplicate cell {key:?}"),
            TableIssue::OutputOutOfRange { key, level } => {
                write!(f, "cell {key:?} maps to level {level} outside the output scale")
            }
            TableIssue::DomainOutOfRange { input, level } => {
                write!(f, "input {input} lists level {level} outside its scale")
            }
            TableIssue::NotMonotone { key, improved, input } => write!(
                f,
                "improving input {input} from {key:?} to {improved:?} worsens the output"
            ),
        }
    }
}

impl TableIssue {
    pub fn is_monotonicity(&self) -> bool {
        matches!(self, TableIssue::NotMonotone { .. })
    }
}

/// Dense lookup table from a tuple of input levels to an output level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegrationTable {
    inputs: Vec<TableInput>,
    output: OrdinalScale,
    cells: BTreeMap<Vec<Level>, Level>,
    duplicates: Vec<Vec<Level>>,
}

impl IntegrationTable {
    /// Builds a table without checking it; see [`IntegrationTable::issues`].
    pub fn from_cells(
        inputs: Vec<TableInput>,
        output: OrdinalScale,
        cells: impl IntoIterator<Item = (Vec<Level>, Level)>,
    ) -> Self {
        let mut map = BTreeMap::new();
        let mut duplicates = Vec::new();
        for (k, v) in cells {
            if map.insert(k.clone(), v).is_some() {
                duplicates.push(k);
            }
        }
        Self {
            inputs,
            output,
            cells: map,
            duplicates,
        }
    }

    /// Builds a table that must be dense and monotone.
    pub fn new(
        inputs: Vec<TableInput>,
        output: OrdinalScale,
        cells: impl IntoIterator<Item = (Vec<Level>, Level)>,
    ) -> Result<Self, IntegrationError> {
        let t = Self::from_cells(inputs, output, cells);
        if let Some(issue) = t.issues().into_iter().next() {
            return Err(IntegrationError::InvalidTable(issue.to_string()));
        }
        Ok(t)
    }

    pub fn inputs(&self) -> &[TableInput] {
        &self.inputs
    }

    pub fn output(&self) -> OrdinalScale {
        self.output
    }

    pub fn cells(&self) -> impl Iterator<Item = (&Vec<Level>, &Level)> {
        self.cells.iter()
    }

    /// Every input tuple of the declared domain, last input varying fastest.
    pub fn domain(&self) -> Vec<Vec<Level>> {
        let mut out = vec![Vec::new()];
        for input in &self.inputs {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    input.levels.iter().map(move |&l| {
                        let mut p = prefix.clone();
                        p.push(l);
                        p
                    })
                })
                .collect();
        }
        out
    }

    /// Structural problems: missing cells, stray or duplicate cells and
    /// out-of-range levels.
    pub fn density_issues(&self) -> Vec<TableIssue> {
        let mut issues = Vec::new();
        for (i, input) in self.inputs.iter().enumerate() {
            for &l in &input.levels {
                if !input.scale.contains(l) {
                    issues.push(TableIssue::DomainOutOfRange { input: i, level: l });
                }
            }
        }
        for key in self.duplicates.iter() {
            issues.push(TableIssue::DuplicateCell { key: key.clone() });
        }
        let domain: BTreeSet<Vec<Level>> = self.domain().into_iter().collect();
        for key in &domain {
            if !self.cells.contains_key(key) {
                issues.push(TableIssue::MissingCell { key: key.clone() });
            }
        }
        for (key, &level) in &self.cells {
            if !domain.contains(key) {
                issues.push(TableIssue::CellOutsideDomain { key: key.clone() });
            }
            if !self.output.contains(level) {
                issues.push(TableIssue::OutputOutOfRange {
                    key: key.clone(),
                    level,
                });
            }
        }
        issues
    }

    /// Cells where moving one input to the next better level of its domain
    /// gives a worse output.
    pub fn monotonicity_violations(&self) -> Vec<TableIssue> {
        let mut issues = Vec::new();
        for (key, &out) in &self.cells {
            for (i, input) in self.inputs.iter().enumerate() {
                let Some(pos) = input.levels.iter().position(|&l| l == key[i]) else {
                    continue;
                };
                if pos == 0 {
                    continue;
                }
                let mut improved = key.clone();
                improved[i] = input.levels[pos - 1];
                if let Some(&better_out) = self.cells.get(&improved) {
                    if better_out > out {
                        issues.push(TableIssue::NotMonotone {
                            key: key.clone(),
                            improved,
                            input: i,
                        });
                    }
                }
            }
        }
        issues
    }

    pub fn issues(&self) -> Vec<TableIssue> {
        let mut v = self.density_issues();
        v.extend(self.monotonicity_violations());
        v
    }

    pub fn lookup(&self, key: &[Level]) -> Option<Level> {
        self.cells.get(key).copied()
    }
}

/// Reference points and Minkowski exponent for TOPSIS-like ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopsisConfig {
    best_points: Vec<Vec<f64>>,
    worst_points: Vec<Vec<f64>>,
    exponent: u8,
}

impl TopsisConfig {
    pub fn new(
        best_points: Vec<Vec<f64>>,
        worst_points: Vec<Vec<f64>>,
        exponent: u8,
    ) -> Result<Self, IntegrationError> {
        if best_points.is_empty() || worst_points.is_empty() {
            return Err(IntegrationError::InvalidTopsis(
                "best and worst point sets must be non-empty".into(),
            ));
        }
        if exponent != 1 && exponent != 2 {
            return Err(IntegrationError::InvalidTopsis(format!(
                "exponent must be 1 or 2, got {exponent}"
            )));
        }
        let arity = best_points[0].len();
        if best_points.iter().chain(&worst_points).any(|p| p.len() != arity) {
            return Err(IntegrationError::InvalidTopsis(
                "reference points have different arities".into(),
            ));
        }
        Ok(Self {
            best_points,
            worst_points,
            exponent,
        })
    }

    pub fn arity(&self) -> usize {
        self.best_points[0].len()
    }

    pub fn best_points(&self) -> &[Vec<f64>] {
        &self.best_points
    }

    pub fn worst_points(&self) -> &[Vec<f64>] {
        &self.worst_points
    }

    pub fn exponent(&self) -> u8 {
        self.exponent
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopsisResult {
    pub rho_plus: f64,
    pub rho_minus: f64,
    pub closeness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopsisReport {
    pub results: Vec<TopsisResult>,
    /// Indices by descending closeness; ties keep input order.
    pub ranking: Vec<usize>,
    /// `(a, b)`: `a` is no farther from the best points and no closer to the
    /// worst points than `b`, strictly in at least one of the two.
    pub outranks: Vec<(usize, usize)>,
}

fn minkowski(a: &[f64], b: &[f64], p: u8) -> f64 {
    match p {
        1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        _ => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
    }
}

fn nearest(point: &[f64], set: &[Vec<f64>], p: u8) -> f64 {
    set.iter().map(|q| minkowski(point, q, p)).fold(f64::INFINITY, f64::min)
}

pub fn topsis_rank(points: &[Vec<f64>], config: &TopsisConfig) -> Result<TopsisReport, IntegrationError> {
    let mut results = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        if p.len() != config.arity() {
            return Err(IntegrationError::Arity {
                expected: config.arity(),
                found: p.len(),
            });
        }
        let rho_plus = nearest(p, &config.best_points, config.exponent);
        let rho_minus = nearest(p, &config.worst_points, config.exponent);
        let denom = rho_plus + rho_minus;
        if denom == 0.0 {
            return Err(IntegrationError::DegenerateCloseness(i));
        }
        results.push(TopsisResult {
            rho_plus,
            rho_minus,
            closeness: rho_minus / denom,
        });
    }
    let mut ranking: Vec<usize> = (0..points.len()).collect();
    ranking.sort_by(|&a, &b| results[b].closeness.total_cmp(&results[a].closeness));
    let mut outranks = Vec::new();
    for (a, ra) in results.iter().enumerate() {
        for (b, rb) in results.iter().enumerate() {
            let weak = ra.rho_plus <= rb.rho_plus && ra.rho_minus >= rb.rho_minus;
            let strict = ra.rho_plus < rb.rho_plus || ra.rho_minus > rb.rho_minus;
            if a != b && weak && strict {
                outranks.push((a, b));
            }
        }
    }
    Ok(TopsisReport {
        results,
        ranking,
        outranks,
    })
}

/// Pairwise compatibility levels between design alternatives of different
/// components. Levels run `1..=nu` (or `0..=nu` with a zero level), higher
/// is better.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatTable {
    nu: Level,
    zero_level: bool,
    entries: BTreeMap<(String, String), Level>,
}

impl CompatTable {
    pub fn new(nu: Level, zero_level: bool) -> Self {
        Self {
            nu,
            zero_level,
            entries: BTreeMap::new(),
        }
    }

    fn key(a: &str, b: &str) -> (String, String) {
        if a <= b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        }
    }

    /// Inserts a symmetric entry; returns the previous level if any.
    pub fn insert(&mut self, a: &str, b: &str, level: Level) -> Option<Level> {
        self.entries.insert(Self::key(a, b), level)
    }

    pub fn get(&self, a: &str, b: &str) -> Option<Level> {
        self.entries.get(&Self::key(a, b)).copied()
    }

    pub fn nu(&self) -> Level {
        self.nu
    }

    pub fn zero_level(&self) -> bool {
        self.zero_level
    }

    pub fn worst_level(&self) -> Level {
        if self.zero_level {
            0
        } else {
            1
        }
    }

    pub fn contains_level(&self, l: Level) -> bool {
        l >= self.worst_level() && l <= self.nu
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(String, String), &Level)> {
        self.entries.iter()
    }
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, da: &str, kind: &'static str) -> Result<&'a T, IntegrationError> {
    map.get(da).ok_or_else(|| IntegrationError::MissingEstimate {
        da: da.to_string(),
        kind,
    })
}

/// Sum of the selected alternatives' quantitative estimates.
pub fn additive_utility(comp: &Composition, estimates: &BTreeMap<String, f64>) -> Result<f64, IntegrationError> {
    if comp.is_empty() {
        return Err(IntegrationError::EmptyComposition);
    }
    comp.das()
        .map(|da| lookup(estimates, da, "quantitative").copied())
        .sum()
}

/// Bottom-up table lookup from `node` down to the leaves.
pub fn table_eval(
    node: &SystemNode,
    comp: &Composition,
    levels: &BTreeMap<String, Level>,
    tables: &BTreeMap<String, IntegrationTable>,
) -> Result<Level, IntegrationError> {
    table_eval_at(node, comp, levels, tables, &node.id)
}

fn table_eval_at(
    node: &SystemNode,
    comp: &Composition,
    levels: &BTreeMap<String, Level>,
    tables: &BTreeMap<String, IntegrationTable>,
    path: &str,
) -> Result<Level, IntegrationError> {
    match &node.kind {
        NodeKind::Leaf { .. } => {
            let da = comp.da_for(&node.id).ok_or_else(|| IntegrationError::Mismatch {
                path: path.to_string(),
                message: "composition selects nothing for this component".into(),
            })?;
            lookup(levels, da, "ordinal").copied()
        }
        NodeKind::Internal { children } => {
            let table = tables
                .get(&node.id)
                .ok_or_else(|| IntegrationError::MissingTable { path: path.to_string() })?;
            if table.inputs().len() != children.len() {
                return Err(IntegrationError::Mismatch {
                    path: path.to_string(),
                    message: format!(
                        "table has {} inputs, node has {} children",
                        table.inputs().len(),
                        children.len()
                    ),
                });
            }
            let key = children
                .iter()
                .map(|c| table_eval_at(c, comp, levels, tables, &format!("{path}/{}", c.id)))
                .collect::<Result<Vec<_>, _>>()?;
            table.lookup(&key).ok_or_else(|| IntegrationError::MissingCell {
                path: path.to_string(),
                key,
            })
        }
    }
}

pub(crate) fn add_vectors(acc: &mut [f64], v: &[f64]) -> Result<(), IntegrationError> {
    if acc.len() != v.len() {
        return Err(IntegrationError::Arity {
            expected: acc.len(),
            found: v.len(),
        });
    }
    acc.iter_mut().zip(v).for_each(|(a, b)| *a += b);
    Ok(())
}

/// Componentwise sum of the selected alternatives' vector estimates.
pub fn vector_sum(comp: &Composition, estimates: &BTreeMap<String, Vec<f64>>) -> Result<Vec<f64>, IntegrationError> {
    let mut das = comp.das();
    let first = das.next().ok_or(IntegrationError::EmptyComposition)?;
    let mut acc = lookup(estimates, first, "vector")?.clone();
    for da in das {
        add_vectors(&mut acc, lookup(estimates, da, "vector")?)?;
    }
    Ok(acc)
}

/// `eta_r` = number of selected alternatives at ordinal level `r`.
pub fn count_profile(
    comp: &Composition,
    levels: &BTreeMap<String, Level>,
    k: Level,
) -> Result<Vec<u32>, IntegrationError> {
    let mut counts = vec![0u32; k as usize];
    for da in comp.das() {
        let l = *lookup(levels, da, "ordinal")?;
        if l == 0 || l > k {
            return Err(IntegrationError::LevelOutOfRange {
                da: da.to_string(),
                level: l,
                size: k,
            });
        }
        counts[l as usize - 1] += 1;
    }
    Ok(counts)
}

/// Minimum compatibility over all pairs of selected alternatives. A single
/// component has no pairs and gets the best level `nu`.
pub fn min_compatibility(comp: &Composition, compat: &CompatTable) -> Result<Level, IntegrationError> {
    let das: Vec<&str> = comp.das().collect();
    min_compat_between(&das, &das, compat, true)
}

pub(crate) fn min_compat_between(
    left: &[&str],
    right: &[&str],
    compat: &CompatTable,
    same_group: bool,
) -> Result<Level, IntegrationError> {
    let mut w = compat.nu();
    for (i, a) in left.iter().enumerate() {
        let start = if same_group { i + 1 } else { 0 };
        for b in &right[start..] {
            let l = compat
                .get(a, b)
                .ok_or_else(|| IntegrationError::MissingCompat(a.to_string(), b.to_string()))?;
            w = w.min(l);
        }
    }
    Ok(w)
}

pub fn quality_vector(
    comp: &Composition,
    levels: &BTreeMap<String, Level>,
    k: Level,
    compat: &CompatTable,
) -> Result<QualityVector, IntegrationError> {
    let counts = count_profile(comp, levels, k)?;
    let w = min_compatibility(comp, compat)?;
    Ok(QualityVector::new(w, counts))
}

/// Median-like aggregate of the selected alternatives' multiset estimates.
pub fn multiset_integrate(
    comp: &Composition,
    estimates: &BTreeMap<String, MultisetEstimate>,
    metric: Metric,
) -> Result<MedianResult, IntegrationError> {
    let inputs = comp
        .das()
        .map(|da| lookup(estimates, da, "multiset").cloned())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(median_like(&inputs, metric)?)
}

/// Product of the compatibility chain `1..=nu` (higher better) with the scale
/// poset of `P^{l,n}`. Elements are ordered by descending `w`, then canonical
/// estimate order, so the top `(nu; n,0,..,0)` comes first.
pub fn compat_extended_poset(scale: &MultisetScale, nu: Level) -> PosetView<QualityVector> {
    let estimates = enumerate_estimates(scale);
    let elements = (1..=nu.max(1))
        .rev()
        .flat_map(|w| {
            estimates
                .iter()
                .map(move |e| QualityVector::new(w, e.counts().to_vec()))
        })
        .collect();
    PosetView::new(elements, quality_dominates)
}
