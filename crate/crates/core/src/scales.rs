//! Assessment scales and the estimates that live on them.
//!
//! Five scale kinds are supported: quantitative intervals, ordinal ladders,
//! vectors of quantitative/ordinal criteria, count posets `n = (eta_1..eta_k)`
//! and interval multiset scales `P^{l,n}`. Ordinal level 1 is always the best
//! level; quantitative scales carry explicit `best`/`worst` endpoints.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poset::cumulative_dominates;

/// An ordinal level. Level 1 is the best.
pub type Level = u32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScaleError {
    #[error("quantitative scale endpoints must differ and be finite (worst={worst}, best={best})")]
    DegenerateInterval { worst: f64, best: f64 },
    #[error("ordinal scale must have at least one level")]
    EmptyOrdinal,
    #[error("vector scale must have at least one criterion")]
    EmptyVector,
    #[error("count scale needs levels >= 1 and elements >= 1 (got {levels}, {elements})")]
    EmptyCounts { levels: usize, elements: u32 },
    #[error("unknown scale `{0}`")]
    UnknownScale(String),
    #[error("estimates are on different scales (`{0}` vs `{1}`)")]
    ScaleMismatch(String, String),
    #[error("estimate on scale `{scale}` is invalid: {violation}")]
    Invalid { scale: String, violation: Violation },
}

/// Quantitative interval `(worst, best)`. Orientation follows from the
/// endpoints: if `best < worst` lower values are better.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantScale {
    pub worst: f64,
    pub best: f64,
}

impl QuantScale {
    pub fn new(worst: f64, best: f64) -> Result<Self, ScaleError> {
        if !worst.is_finite() || !best.is_finite() || worst == best {
            return Err(ScaleError::DegenerateInterval { worst, best });
        }
        Ok(Self { worst, best })
    }

    pub fn lower_is_better(&self) -> bool {
        self.best < self.worst
    }

    pub fn min(&self) -> f64 {
        self.worst.min(self.best)
    }

    pub fn max(&self) -> f64 {
        self.worst.max(self.best)
    }

    pub fn contains(&self, x: f64) -> bool {
        x.is_finite() && x >= self.min() && x <= self.max()
    }

    /// Is `a` strictly better than `b` under this orientation?
    pub fn strictly_better(&self, a: f64, b: f64) -> bool {
        if self.lower_is_better() {
            a < b
        } else {
            a > b
        }
    }

    pub fn compare(&self, a: f64, b: f64) -> Preference {
        if a == b {
            Preference::Tie
        } else if self.strictly_better(a, b) {
            Preference::First
        } else {
            Preference::Second
        }
    }

    /// Scale of the sum of one value from `self` and one from `other`.
    pub fn sum(&self, other: &QuantScale) -> QuantScale {
        QuantScale {
            worst: self.worst + other.worst,
            best: self.best + other.best,
        }
    }

    /// Scale of a sum of `m` values drawn from this scale.
    pub fn times(&self, m: usize) -> QuantScale {
        QuantScale {
            worst: self.worst * m as f64,
            best: self.best * m as f64,
        }
    }
}

/// Ordinal ladder `1..=size`, level 1 best.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrdinalScale {
    pub size: Level,
}

impl OrdinalScale {
    pub fn new(size: Level) -> Result<Self, ScaleError> {
        if size == 0 {
            return Err(ScaleError::EmptyOrdinal);
        }
        Ok(Self { size })
    }

    pub fn contains(&self, level: Level) -> bool {
        (1..=self.size).contains(&level)
    }

    pub fn compare(&self, a: Level, b: Level) -> Preference {
        match a.cmp(&b) {
            std::cmp::Ordering::Equal => Preference::Tie,
            std::cmp::Ordering::Less => Preference::First,
            std::cmp::Ordering::Greater => Preference::Second,
        }
    }
}

/// One criterion of a vector scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Criterion {
    Quantitative(QuantScale),
    Ordinal(OrdinalScale),
}

impl Criterion {
    pub fn lower_is_better(&self) -> bool {
        match self {
            Criterion::Quantitative(q) => q.lower_is_better(),
            Criterion::Ordinal(_) => true,
        }
    }

    pub fn strictly_better(&self, a: f64, b: f64) -> bool {
        if self.lower_is_better() {
            a < b
        } else {
            a > b
        }
    }

    fn check(&self, x: f64) -> Result<(), Violation> {
        match self {
            Criterion::Quantitative(q) => {
                if !q.contains(x) {
                    return Err(Violation::OutOfRange {
                        value: x,
                        min: q.min(),
                        max: q.max(),
                    });
                }
            }
            Criterion::Ordinal(o) => {
                if x.fract() != 0.0 || x < 1.0 || x > f64::from(o.size) {
                    return Err(Violation::NotALevel { value: x, size: o.size });
                }
            }
        }
        Ok(())
    }

    /// Best and worst endpoints viewed as numbers.
    pub fn endpoints(&self) -> QuantScale {
        match self {
            Criterion::Quantitative(q) => *q,
            Criterion::Ordinal(o) => QuantScale {
                worst: f64::from(o.size),
                best: 1.0,
            },
        }
    }
}

/// Ordered list of criteria; criterion order is significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorScale {
    criteria: Vec<Criterion>,
}

impl VectorScale {
    pub fn new(criteria: Vec<Criterion>) -> Result<Self, ScaleError> {
        if criteria.is_empty() {
            return Err(ScaleError::EmptyVector);
        }
        Ok(Self { criteria })
    }

    pub fn criteria(&self) -> &[Criterion] {
        &self.criteria
    }

    pub fn arity(&self) -> usize {
        self.criteria.len()
    }

    /// Componentwise dominance: no criterion worse, at least one strictly better.
    /// Only orientation is used, so sums of estimates can be compared too.
    pub fn dominates(&self, a: &[f64], b: &[f64]) -> bool {
        let mut strict = false;
        for ((c, &x), &y) in self.criteria.iter().zip(a).zip(b) {
            if c.strictly_better(y, x) {
                return false;
            }
            if c.strictly_better(x, y) {
                strict = true;
            }
        }
        strict
    }

    pub fn compare(&self, a: &[f64], b: &[f64]) -> Preference {
        if a == b {
            Preference::Tie
        } else if self.dominates(a, b) {
            Preference::First
        } else if self.dominates(b, a) {
            Preference::Second
        } else {
            Preference::Incomparable
        }
    }

    /// Scale of the componentwise sum of `m` vectors from this scale; every
    /// criterion becomes quantitative.
    pub fn times(&self, m: usize) -> VectorScale {
        VectorScale {
            criteria: self
                .criteria
                .iter()
                .map(|c| Criterion::Quantitative(c.endpoints().times(m)))
                .collect(),
        }
    }

    pub fn sum(&self, other: &VectorScale) -> VectorScale {
        VectorScale {
            criteria: self
                .criteria
                .iter()
                .zip(&other.criteria)
                .map(|(a, b)| Criterion::Quantitative(a.endpoints().sum(&b.endpoints())))
                .collect(),
        }
    }

    pub fn best_point(&self) -> Vec<f64> {
        self.criteria.iter().map(|c| c.endpoints().best).collect()
    }

    pub fn worst_point(&self) -> Vec<f64> {
        self.criteria.iter().map(|c| c.endpoints().worst).collect()
    }
}

/// Count poset: vectors `(eta_1..eta_k)` with `sum = m`, level 1 best.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountPosetScale {
    pub levels: usize,
    pub elements: u32,
}

impl CountPosetScale {
    pub fn new(levels: usize, elements: u32) -> Result<Self, ScaleError> {
        if levels == 0 || elements == 0 {
            return Err(ScaleError::EmptyCounts { levels, elements });
        }
        Ok(Self { levels, elements })
    }

    pub fn check(&self, counts: &[u32]) -> Result<(), Violation> {
        check_counts(counts, self.levels, self.elements)
    }
}

/// Interval multiset scale `P^{l,n}`: count vectors over `l` levels with sum
/// `n` whose non-zero levels form a contiguous run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultisetScale {
    pub levels: usize,
    pub elements: u32,
}

impl MultisetScale {
    pub fn new(levels: usize, elements: u32) -> Result<Self, ScaleError> {
        if levels == 0 || elements == 0 {
            return Err(ScaleError::EmptyCounts { levels, elements });
        }
        Ok(Self { levels, elements })
    }

    pub fn check(&self, counts: &[u32]) -> Result<(), Violation> {
        check_counts(counts, self.levels, self.elements)?;
        if !has_contiguous_support(counts) {
            return Err(Violation::NonContiguousSupport {
                counts: counts.to_vec(),
            });
        }
        Ok(())
    }
}

fn check_counts(counts: &[u32], levels: usize, elements: u32) -> Result<(), Violation> {
    if counts.len() != levels {
        return Err(Violation::Arity {
            expected: levels,
            found: counts.len(),
        });
    }
    let sum: u64 = counts.iter().map(|&c| u64::from(c)).sum();
    if sum != u64::from(elements) {
        return Err(Violation::CountSum {
            expected: elements,
            found: sum,
        });
    }
    Ok(())
}

/// True when the levels with non-zero count form one contiguous run.
pub fn has_contiguous_support(counts: &[u32]) -> bool {
    let first = counts.iter().position(|&c| c > 0);
    let last = counts.iter().rposition(|&c| c > 0);
    match (first, last) {
        (Some(f), Some(l)) => counts[f..=l].iter().all(|&c| c > 0),
        _ => true,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Scale {
    Quantitative(QuantScale),
    Ordinal(OrdinalScale),
    Vector(VectorScale),
    CountPoset(CountPosetScale),
    Multiset(MultisetScale),
}

impl Scale {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Scale::Quantitative(_) => "quantitative",
            Scale::Ordinal(_) => "ordinal",
            Scale::Vector(_) => "vector",
            Scale::CountPoset(_) => "count",
            Scale::Multiset(_) => "multiset",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EstimateValue {
    Real(f64),
    Level(Level),
    Vector(Vec<f64>),
    Counts(Vec<u32>),
}

impl EstimateValue {
    pub fn kind_name(&self) -> &'static str {
        match self {
            EstimateValue::Real(_) => "real",
            EstimateValue::Level(_) => "level",
            EstimateValue::Vector(_) => "vector",
            EstimateValue::Counts(_) => "counts",
        }
    }
}

/// A value tagged with the id of the scale it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub scale: String,
    pub value: EstimateValue,
}

impl Estimate {
    pub fn new(scale: impl Into<String>, value: EstimateValue) -> Self {
        Self {
            scale: scale.into(),
            value,
        }
    }
}

/// Which estimate invariant failed.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Violation {
    #[error("value kind `{value}` does not fit a {scale} scale")]
    KindMismatch { scale: &'static str, value: &'static str },
    #[error("value {value} outside [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },
    #[error("level {level} outside 1..={size}")]
    LevelOutOfRange { level: Level, size: Level },
    #[error("{value} is not a level of an ordinal criterion with {size} levels")]
    NotALevel { value: f64, size: Level },
    #[error("expected {expected} components, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("counts sum to {found}, expected {expected}")]
    CountSum { expected: u32, found: u64 },
    #[error("non-contiguous support in {counts:?}")]
    NonContiguousSupport { counts: Vec<u32> },
}

/// Named scale registry; estimates refer to scales by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScaleSet {
    scales: BTreeMap<String, Scale>,
}

impl ScaleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: impl Into<String>, scale: Scale) -> Option<Scale> {
        self.scales.insert(id.into(), scale)
    }

    pub fn get(&self, id: &str) -> Option<&Scale> {
        self.scales.get(id)
    }

    pub fn resolve(&self, id: &str) -> Result<&Scale, ScaleError> {
        self.get(id).ok_or_else(|| ScaleError::UnknownScale(id.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Scale)> {
        self.scales.iter()
    }
}

/// Check a value against a scale.
pub fn check_value(scale: &Scale, value: &EstimateValue) -> Result<(), Violation> {
    match (scale, value) {
        (Scale::Quantitative(q), EstimateValue::Real(x)) => {
            if q.contains(*x) {
                Ok(())
            } else {
                Err(Violation::OutOfRange {
                    value: *x,
                    min: q.min(),
                    max: q.max(),
                })
            }
        }
        (Scale::Ordinal(o), EstimateValue::Level(l)) => {
            if o.contains(*l) {
                Ok(())
            } else {
                Err(Violation::LevelOutOfRange {
                    level: *l,
                    size: o.size,
                })
            }
        }
        (Scale::Vector(v), EstimateValue::Vector(xs)) => {
            if xs.len() != v.arity() {
                return Err(Violation::Arity {
                    expected: v.arity(),
                    found: xs.len(),
                });
            }
            v.criteria.iter().zip(xs).try_for_each(|(c, &x)| c.check(x))
        }
        (Scale::CountPoset(c), EstimateValue::Counts(n)) => c.check(n),
        (Scale::Multiset(m), EstimateValue::Counts(n)) => m.check(n),
        (s, v) => Err(Violation::KindMismatch {
            scale: s.kind_name(),
            value: v.kind_name(),
        }),
    }
}

/// Validate an estimate against its (registered) scale.
///
/// A dangling scale id is reported as [`ScaleError::UnknownScale`]; any other
/// failure is [`ScaleError::Invalid`] carrying the violated invariant.
pub fn validate_estimate(scales: &ScaleSet, e: &Estimate) -> Result<(), ScaleError> {
    let scale = scales.resolve(&e.scale)?;
    check_value(scale, &e.value).map_err(|violation| ScaleError::Invalid {
        scale: e.scale.clone(),
        violation,
    })
}

/// Outcome of comparing two estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preference {
    First,
    Second,
    Tie,
    Incomparable,
}

/// Compare two estimates on the same scale.
pub fn better_of(scales: &ScaleSet, a: &Estimate, b: &Estimate) -> Result<Preference, ScaleError> {
    if a.scale != b.scale {
        return Err(ScaleError::ScaleMismatch(a.scale.clone(), b.scale.clone()));
    }
    validate_estimate(scales, a)?;
    validate_estimate(scales, b)?;
    let scale = scales.resolve(&a.scale)?;
    let pref = match (scale, &a.value, &b.value) {
        (Scale::Quantitative(q), EstimateValue::Real(x), EstimateValue::Real(y)) => q.compare(*x, *y),
        (Scale::Ordinal(o), EstimateValue::Level(x), EstimateValue::Level(y)) => o.compare(*x, *y),
        (Scale::Vector(v), EstimateValue::Vector(x), EstimateValue::Vector(y)) => v.compare(x, y),
        (Scale::CountPoset(_) | Scale::Multiset(_), EstimateValue::Counts(x), EstimateValue::Counts(y)) => {
            counts_preference(x, y)
        }
        // validated above, so kinds already agree with the scale
        _ => unreachable!("estimate kinds validated against scale"),
    };
    Ok(pref)
}

pub(crate) fn counts_preference(a: &[u32], b: &[u32]) -> Preference {
    if a == b {
        Preference::Tie
    } else if cumulative_dominates(a, b) {
        Preference::First
    } else if cumulative_dominates(b, a) {
        Preference::Second
    } else {
        Preference::Incomparable
    }
}

/// `N(S) = (w; n)`: minimum pairwise compatibility paired with a count profile.
/// Higher `w` is better.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QualityVector {
    pub w: Level,
    pub counts: Vec<u32>,
}

impl QualityVector {
    pub fn new(w: Level, counts: Vec<u32>) -> Self {
        Self { w, counts }
    }
}

impl fmt::Display for QualityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({};", self.w)?;
        write_joined(f, &self.counts)?;
        write!(f, ")")
    }
}

pub(crate) fn write_joined<T: fmt::Display>(f: &mut fmt::Formatter<'_>, xs: &[T]) -> fmt::Result {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}
