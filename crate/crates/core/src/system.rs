//! Hierarchical system model: components, design alternatives (DAs),
//! compositions, recursive evaluation and ranking.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::integrators::{
    add_vectors, min_compat_between, topsis_rank, CompatTable, IntegrationError, IntegrationTable, TopsisConfig,
    TopsisResult,
};
use crate::multiset::{median_like, MedianResult, Metric, MultisetEstimate};
use crate::poset::{self, cumulative_dominates, quality_dominates, DLabel};
use crate::scales::{
    check_value, EstimateValue, Level, OrdinalScale, QualityVector, QuantScale, Scale, ScaleSet, VectorScale,
};
use crate::transforms::{OrdinalMap, ThresholdSpec};

/// Enumeration stops after this many compositions unless told otherwise.
pub const DEFAULT_COMPOSITION_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    Leaf { das: Vec<String> },
    Internal { children: Vec<SystemNode> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemNode {
    pub id: String,
    pub kind: NodeKind,
}

impl SystemNode {
    pub fn leaf(id: impl Into<String>, das: Vec<String>) -> Self {
        Self {
            id: id.into(),
            kind: NodeKind::Leaf { das },
        }
    }

    pub fn internal(id: impl Into<String>, children: Vec<SystemNode>) -> Self {
        Self {
            id: id.into(),
            kind: NodeKind::Internal { children },
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf { .. })
    }

    pub fn children(&self) -> &[SystemNode] {
        match &self.kind {
            NodeKind::Leaf { .. } => &[],
            NodeKind::Internal { children } => children,
        }
    }

    pub fn das(&self) -> &[String] {
        match &self.kind {
            NodeKind::Leaf { das } => das,
            NodeKind::Internal { .. } => &[],
        }
    }

    /// Leaves in depth-first, left-to-right order.
    pub fn leaves(&self) -> Vec<&SystemNode> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a SystemNode>) {
        match &self.kind {
            NodeKind::Leaf { .. } => out.push(self),
            NodeKind::Internal { children } => children.iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    /// Every node with its slash-separated path, pre-order.
    pub fn walk(&self) -> Vec<(String, &SystemNode)> {
        let mut out = Vec::new();
        self.walk_into(self.id.clone(), &mut out);
        out
    }

    fn walk_into<'a>(&'a self, path: String, out: &mut Vec<(String, &'a SystemNode)>) {
        out.push((path.clone(), self));
        for c in self.children() {
            c.walk_into(format!("{path}/{}", c.id), out);
        }
    }

    pub fn find(&self, id: &str) -> Option<&SystemNode> {
        if self.id == id {
            return Some(self);
        }
        self.children().iter().find_map(|c| c.find(id))
    }
}

/// One selected DA per leaf, kept in leaf order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Composition {
    selection: Vec<(String, String)>,
}

impl Composition {
    pub fn new(selection: Vec<(String, String)>) -> Self {
        Self { selection }
    }

    pub fn da_for(&self, leaf: &str) -> Option<&str> {
        self.selection.iter().find(|(l, _)| l == leaf).map(|(_, d)| d.as_str())
    }

    pub fn das(&self) -> impl Iterator<Item = &str> {
        self.selection.iter().map(|(_, d)| d.as_str())
    }

    pub fn selection(&self) -> &[(String, String)] {
        &self.selection
    }

    pub fn len(&self) -> usize {
        self.selection.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selection.is_empty()
    }

    /// `L1*Q1*G1*H1` style label.
    pub fn label(&self) -> String {
        self.das().collect::<Vec<_>>().join("*")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Additive,
    Tables,
    VectorSum,
    CountProfile,
    QualityVector,
    MultisetMedian,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Additive,
        Method::Tables,
        Method::VectorSum,
        Method::CountProfile,
        Method::QualityVector,
        Method::MultisetMedian,
    ];

    /// Kind of DA estimate consumed at the leaves.
    pub fn leaf_kind(self) -> EstimateKind {
        match self {
            Method::Additive => EstimateKind::Quantitative,
            Method::Tables | Method::CountProfile | Method::QualityVector => EstimateKind::Ordinal,
            Method::VectorSum => EstimateKind::Vector,
            Method::MultisetMedian => EstimateKind::Multiset,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Additive => "additive",
            Method::Tables => "tables",
            Method::VectorSum => "vector-sum",
            Method::CountProfile => "count-profile",
            Method::QualityVector => "quality-vector",
            Method::MultisetMedian => "multiset-median",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateKind {
    Quantitative,
    Ordinal,
    Vector,
    Multiset,
}

impl EstimateKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimateKind::Quantitative => "quantitative",
            EstimateKind::Ordinal => "ordinal",
            EstimateKind::Vector => "vector",
            EstimateKind::Multiset => "multiset",
        }
    }

    fn accepts(self, scale: &Scale) -> bool {
        matches!(
            (self, scale),
            (EstimateKind::Quantitative, Scale::Quantitative(_))
                | (EstimateKind::Ordinal, Scale::Ordinal(_))
                | (EstimateKind::Vector, Scale::Vector(_))
                | (EstimateKind::Multiset, Scale::Multiset(_))
        )
    }
}

/// A DA estimate: scale id plus value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DaEstimate {
    pub scale: String,
    pub value: EstimateValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Da {
    pub id: String,
    pub estimates: BTreeMap<EstimateKind, DaEstimate>,
}

/// A loaded model. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    pub name: String,
    pub notes: Vec<String>,
    pub scales: ScaleSet,
    pub das: BTreeMap<String, Da>,
    pub root: SystemNode,
    pub compat: Option<CompatTable>,
    /// Integration tables keyed by the internal node they belong to.
    pub tables: BTreeMap<String, IntegrationTable>,
    /// Per-node method bindings.
    pub methods: BTreeMap<String, Method>,
    pub thresholds: BTreeMap<String, (QuantScale, ThresholdSpec)>,
    pub ordinal_maps: BTreeMap<String, OrdinalMap>,
    pub topsis: BTreeMap<String, TopsisConfig>,
    pub compositions: Vec<(String, Composition)>,
    pub metric: Metric,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("{path}: {source}")]
    At {
        path: String,
        #[source]
        source: IntegrationError,
    },
    #[error("{path}: no method bound and none given")]
    NoMethod { path: String },
    #[error("unknown composition `{0}`")]
    UnknownComposition(String),
    #[error("nothing to rank")]
    NothingToRank,
    #[error("evaluations of different kinds cannot be ranked together")]
    MixedKinds,
    #[error(transparent)]
    Topsis(IntegrationError),
}

fn at(path: &str, source: IntegrationError) -> EvalError {
    EvalError::At {
        path: path.to_string(),
        source,
    }
}

fn mismatch(path: &str, message: impl Into<String>) -> EvalError {
    at(
        path,
        IntegrationError::Mismatch {
            path: path.to_string(),
            message: message.into(),
        },
    )
}

/// Result of evaluating a node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Evaluation {
    Quantity { value: f64, scale: QuantScale },
    Level { level: Level, scale: OrdinalScale },
    Vector { value: Vec<f64>, scale: VectorScale },
    Counts { eta: Vec<u32> },
    Quality { w: Level, eta: Vec<u32> },
    Multiset { eta: MultisetEstimate },
    Median(MedianResult),
}

/// Comparable form of an evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum RankKey {
    Real { value: f64, scale: QuantScale },
    Level(Level),
    Vector { value: Vec<f64>, scale: VectorScale },
    Counts(Vec<u32>),
    Quality(QualityVector),
}

impl RankKey {
    pub fn dominates(&self, other: &RankKey) -> bool {
        match (self, other) {
            (RankKey::Real { value: a, scale }, RankKey::Real { value: b, .. }) => scale.strictly_better(*a, *b),
            (RankKey::Level(a), RankKey::Level(b)) => a < b,
            (RankKey::Vector { value: a, scale }, RankKey::Vector { value: b, .. }) => scale.dominates(a, b),
            (RankKey::Counts(a), RankKey::Counts(b)) => cumulative_dominates(a, b),
            (RankKey::Quality(a), RankKey::Quality(b)) => quality_dominates(a, b),
            _ => false,
        }
    }

    fn same_kind(&self, other: &RankKey) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }

    pub fn coordinates(&self) -> Vec<f64> {
        match self {
            RankKey::Real { value, .. } => vec![*value],
            RankKey::Level(l) => vec![f64::from(*l)],
            RankKey::Vector { value, .. } => value.clone(),
            RankKey::Counts(c) => c.iter().map(|&x| f64::from(x)).collect(),
            RankKey::Quality(q) => std::iter::once(f64::from(q.w))
                .chain(q.counts.iter().map(|&x| f64::from(x)))
                .collect(),
        }
    }
}

fn count_corners(eta: &[u32]) -> (Vec<u32>, Vec<u32>) {
    let m: u32 = eta.iter().sum();
    let k = eta.len();
    let mut best = vec![0; k];
    let mut worst = vec![0; k];
    if k > 0 {
        best[0] = m;
        worst[k - 1] = m;
    }
    (best, worst)
}

impl Evaluation {
    pub fn rank_key(&self) -> RankKey {
        match self {
            Evaluation::Quantity { value, scale } => RankKey::Real {
                value: *value,
                scale: *scale,
            },
            Evaluation::Level { level, .. } => RankKey::Level(*level),
            Evaluation::Vector { value, scale } => RankKey::Vector {
                value: value.clone(),
                scale: scale.clone(),
            },
            Evaluation::Counts { eta } => RankKey::Counts(eta.clone()),
            Evaluation::Quality { w, eta } => RankKey::Quality(QualityVector::new(*w, eta.clone())),
            Evaluation::Multiset { eta } => RankKey::Counts(eta.counts().to_vec()),
            Evaluation::Median(m) => RankKey::Counts(m.representative.counts().to_vec()),
        }
    }

    /// Best and worst corners of the scale this evaluation lives on.
    pub fn corners(&self, compat: Option<&CompatTable>) -> (RankKey, RankKey) {
        match self {
            Evaluation::Quantity { scale, .. } => (
                RankKey::Real {
                    value: scale.best,
                    scale: *scale,
                },
                RankKey::Real {
                    value: scale.worst,
                    scale: *scale,
                },
            ),
            Evaluation::Level { scale, .. } => (RankKey::Level(1), RankKey::Level(scale.size)),
            Evaluation::Vector { scale, .. } => (
                RankKey::Vector {
                    value: scale.best_point(),
                    scale: scale.clone(),
                },
                RankKey::Vector {
                    value: scale.worst_point(),
                    scale: scale.clone(),
                },
            ),
            Evaluation::Quality { eta, .. } => {
                let (b, w) = count_corners(eta);
                let (nu, low) = compat.map_or((1, 1), |c| (c.nu(), c.worst_level()));
                (
                    RankKey::Quality(QualityVector::new(nu, b)),
                    RankKey::Quality(QualityVector::new(low, w)),
                )
            }
            other => {
                let RankKey::Counts(eta) = other.rank_key() else {
                    unreachable!("count-like evaluation")
                };
                let (b, w) = count_corners(&eta);
                (RankKey::Counts(b), RankKey::Counts(w))
            }
        }
    }
}

/// Which method each internal node uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    /// The same method at every internal node.
    Uniform(Method),
    /// Use the model's per-node bindings.
    Bound,
}

impl From<Option<Method>> for MethodChoice {
    fn from(m: Option<Method>) -> Self {
        m.map_or(MethodChoice::Bound, MethodChoice::Uniform)
    }
}

impl From<Method> for MethodChoice {
    fn from(m: Method) -> Self {
        MethodChoice::Uniform(m)
    }
}

impl SystemModel {
    pub fn leaf_of(&self, da: &str) -> Option<&SystemNode> {
        self.root.leaves().into_iter().find(|l| l.das().iter().any(|d| d == da))
    }

    pub fn composition(&self, name: &str) -> Option<&Composition> {
        self.compositions.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    fn method_at(&self, node: &SystemNode, path: &str, choice: MethodChoice) -> Result<Method, EvalError> {
        match choice {
            MethodChoice::Uniform(m) => Ok(m),
            MethodChoice::Bound => self
                .methods
                .get(&node.id)
                .copied()
                .ok_or_else(|| EvalError::NoMethod { path: path.to_string() }),
        }
    }

    fn leaf_eval(
        &self,
        node: &SystemNode,
        comp: &Composition,
        kind: EstimateKind,
        path: &str,
    ) -> Result<Evaluation, EvalError> {
        let da_id = comp
            .da_for(&node.id)
            .ok_or_else(|| mismatch(path, "composition selects nothing for this component"))?;
        if !node.das().iter().any(|d| d == da_id) {
            return Err(mismatch(
                path,
                format!("`{da_id}` is not an alternative of this component"),
            ));
        }
        let missing = || {
            at(
                path,
                IntegrationError::MissingEstimate {
                    da: da_id.to_string(),
                    kind: kind.name(),
                },
            )
        };
        let est = self
            .das
            .get(da_id)
            .and_then(|d| d.estimates.get(&kind))
            .ok_or_else(missing)?;
        let scale = self
            .scales
            .get(&est.scale)
            .ok_or_else(|| mismatch(path, format!("unknown scale `{}`", est.scale)))?;
        check_value(scale, &est.value).map_err(|v| mismatch(path, format!("`{da_id}`: {v}")))?;
        let e = match (scale, &est.value) {
            (Scale::Quantitative(q), EstimateValue::Real(x)) => Evaluation::Quantity { value: *x, scale: *q },
            (Scale::Ordinal(o), EstimateValue::Level(l)) => Evaluation::Level { level: *l, scale: *o },
            (Scale::Vector(v), EstimateValue::Vector(x)) => Evaluation::Vector {
                value: x.clone(),
                scale: v.clone(),
            },
            (Scale::Multiset(_), EstimateValue::Counts(c)) => Evaluation::Multiset {
                eta: MultisetEstimate::from_counts(c.clone()).map_err(|e| mismatch(path, e.to_string()))?,
            },
            _ => {
                return Err(mismatch(
                    path,
                    format!("{} estimate on a {} scale", kind.name(), scale.kind_name()),
                ))
            }
        };
        Ok(e)
    }

    fn node_eval(
        &self,
        node: &SystemNode,
        comp: &Composition,
        choice: MethodChoice,
        leaf_kind: EstimateKind,
        path: &str,
    ) -> Result<Evaluation, EvalError> {
        let children = match &node.kind {
            NodeKind::Leaf { .. } => return self.leaf_eval(node, comp, leaf_kind, path),
            NodeKind::Internal { children } => children,
        };
        let method = self.method_at(node, path, choice)?;
        let evals = children
            .iter()
            .map(|c| self.node_eval(c, comp, choice, method.leaf_kind(), &format!("{path}/{}", c.id)))
            .collect::<Result<Vec<_>, _>>()?;
        match method {
            Method::Additive => self.combine_additive(&evals, path),
            Method::Tables => self.combine_tables(node, &evals, path),
            Method::VectorSum => combine_vectors(&evals, path),
            Method::CountProfile => combine_counts(&evals, path).map(|eta| Evaluation::Counts { eta }),
            Method::QualityVector => self.combine_quality(node, comp, &evals, path),
            Method::MultisetMedian => self.combine_median(&evals, path),
        }
    }

    fn combine_additive(&self, evals: &[Evaluation], path: &str) -> Result<Evaluation, EvalError> {
        let mut acc: Option<(f64, QuantScale)> = None;
        for e in evals {
            let Evaluation::Quantity { value, scale } = e else {
                return Err(mismatch(path, "additive integration needs quantitative inputs"));
            };
            acc = Some(match acc {
                None => (*value, *scale),
                Some((v, s)) => (v + value, s.sum(scale)),
            });
        }
        let (value, scale) = acc.ok_or_else(|| at(path, IntegrationError::EmptyComposition))?;
        Ok(Evaluation::Quantity { value, scale })
    }

    fn combine_tables(&self, node: &SystemNode, evals: &[Evaluation], path: &str) -> Result<Evaluation, EvalError> {
        let table = self
            .tables
            .get(&node.id)
            .ok_or_else(|| at(path, IntegrationError::MissingTable { path: path.to_string() }))?;
        if table.inputs().len() != evals.len() {
            return Err(mismatch(
                path,
                format!(
                    "table has {} inputs, node has {} children",
                    table.inputs().len(),
                    evals.len()
                ),
            ));
        }
        let mut key = Vec::with_capacity(evals.len());
        for (i, (e, input)) in evals.iter().zip(table.inputs()).enumerate() {
            let Evaluation::Level { level, scale } = e else {
                return Err(mismatch(path, "table integration needs ordinal inputs"));
            };
            if scale.size != input.scale.size {
                return Err(mismatch(
                    path,
                    format!(
                        "input {i} expects a {}-level scale, child produces {} levels",
                        input.scale.size, scale.size
                    ),
                ));
            }
            key.push(*level);
        }
        let level = table.lookup(&key).ok_or_else(|| {
            at(
                path,
                IntegrationError::MissingCell {
                    path: path.to_string(),
                    key: key.clone(),
                },
            )
        })?;
        Ok(Evaluation::Level {
            level,
            scale: table.output(),
        })
    }

    fn combine_quality(
        &self,
        node: &SystemNode,
        comp: &Composition,
        evals: &[Evaluation],
        path: &str,
    ) -> Result<Evaluation, EvalError> {
        let compat = self
            .compat
            .as_ref()
            .ok_or_else(|| mismatch(path, "quality-vector integration needs a compatibility table"))?;
        let mut w = compat.nu();
        let mut count_inputs = Vec::with_capacity(evals.len());
        for e in evals {
            match e {
                Evaluation::Quality { w: cw, eta } => {
                    w = w.min(*cw);
                    count_inputs.push(Evaluation::Counts { eta: eta.clone() });
                }
                other => count_inputs.push(other.clone()),
            }
        }
        let eta = combine_counts(&count_inputs, path)?;
        let groups: Vec<Vec<&str>> = node
            .children()
            .iter()
            .map(|c| c.leaves().iter().filter_map(|l| comp.da_for(&l.id)).collect())
            .collect();
        for i in 0..groups.len() {
            for j in i + 1..groups.len() {
                let cw = min_compat_between(&groups[i], &groups[j], compat, false).map_err(|e| at(path, e))?;
                w = w.min(cw);
            }
        }
        Ok(Evaluation::Quality { w, eta })
    }

    fn combine_median(&self, evals: &[Evaluation], path: &str) -> Result<Evaluation, EvalError> {
        let inputs = evals
            .iter()
            .map(|e| match e {
                Evaluation::Multiset { eta } => Ok(eta.clone()),
                Evaluation::Median(m) => Ok(m.representative.clone()),
                _ => Err(mismatch(path, "multiset integration needs multiset inputs")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let r = median_like(&inputs, self.metric).map_err(|e| at(path, e.into()))?;
        Ok(Evaluation::Median(r))
    }

    /// Compositions that differ from `comp` in exactly one leaf.
    pub fn one_swaps(&self, comp: &Composition) -> Vec<Composition> {
        let mut out = Vec::new();
        for (i, (leaf, da)) in comp.selection().iter().enumerate() {
            let Some(node) = self.root.find(leaf) else { continue };
            for other in node.das() {
                if other != da {
                    let mut sel = comp.selection().to_vec();
                    sel[i].1 = other.clone();
                    out.push(Composition::new(sel));
                }
            }
        }
        out
    }
}

fn combine_vectors(evals: &[Evaluation], path: &str) -> Result<Evaluation, EvalError> {
    let mut acc: Option<(Vec<f64>, VectorScale)> = None;
    for e in evals {
        let Evaluation::Vector { value, scale } = e else {
            return Err(mismatch(path, "vector summation needs vector inputs"));
        };
        acc = Some(match acc {
            None => (value.clone(), scale.times(1)),
            Some((mut v, s)) => {
                add_vectors(&mut v, value).map_err(|e| at(path, e))?;
                (v, s.sum(scale))
            }
        });
    }
    let (value, scale) = acc.ok_or_else(|| at(path, IntegrationError::EmptyComposition))?;
    Ok(Evaluation::Vector { value, scale })
}

fn combine_counts(evals: &[Evaluation], path: &str) -> Result<Vec<u32>, EvalError> {
    let k = evals
        .iter()
        .map(|e| match e {
            Evaluation::Level { scale, .. } => Ok(scale.size as usize),
            Evaluation::Counts { eta } => Ok(eta.len()),
            _ => Err(mismatch(path, "count profiles need ordinal or count inputs")),
        })
        .collect::<Result<BTreeSet<_>, _>>()?;
    if k.len() != 1 {
        return Err(mismatch(path, "count profile inputs use different numbers of levels"));
    }
    let k = *k.iter().next().expect("one level count");
    let mut eta = vec![0u32; k];
    for e in evals {
        match e {
            Evaluation::Level { level, .. } => eta[*level as usize - 1] += 1,
            Evaluation::Counts { eta: c } => eta.iter_mut().zip(c).for_each(|(a, b)| *a += b),
            _ => unreachable!("checked above"),
        }
    }
    Ok(eta)
}

/// Evaluate one composition, recursively bottom-up.
pub fn evaluate(
    model: &SystemModel,
    comp: &Composition,
    method: impl Into<MethodChoice>,
) -> Result<Evaluation, EvalError> {
    let choice = method.into();
    let root = &model.root;
    let leaf_kind = match (&root.kind, choice) {
        (NodeKind::Leaf { .. }, MethodChoice::Uniform(m)) => m.leaf_kind(),
        (NodeKind::Leaf { .. }, MethodChoice::Bound) => {
            let m = model.method_at(root, &root.id, choice)?;
            m.leaf_kind()
        }
        // internal roots pick the kind per node
        (NodeKind::Internal { .. }, _) => EstimateKind::Ordinal,
    };
    model.node_eval(root, comp, choice, leaf_kind, &root.id)
}

/// Compositions in lexicographic order of DA indices (first leaf most
/// significant). `truncated` is set when the product exceeded `limit`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub compositions: Vec<Composition>,
    pub truncated: bool,
}

pub fn enumerate_compositions(model: &SystemModel, limit: usize) -> Enumeration {
    let leaves = model.root.leaves();
    let mut compositions = Vec::new();
    if leaves.iter().any(|l| l.das().is_empty()) {
        return Enumeration {
            compositions,
            truncated: false,
        };
    }
    let mut idx = vec![0usize; leaves.len()];
    loop {
        if compositions.len() == limit {
            return Enumeration {
                compositions,
                truncated: true,
            };
        }
        compositions.push(Composition::new(
            leaves
                .iter()
                .zip(&idx)
                .map(|(l, &i)| (l.id.clone(), l.das()[i].clone()))
                .collect(),
        ));
        // odometer, last leaf fastest
        let mut pos = leaves.len();
        loop {
            if pos == 0 {
                return Enumeration {
                    compositions,
                    truncated: false,
                };
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < leaves[pos].das().len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Reduction {
    Layers,
    LabelD,
    Closeness,
}

impl FromStr for Reduction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "layers" => Ok(Reduction::Layers),
            "labelD" => Ok(Reduction::LabelD),
            "closeness" => Ok(Reduction::Closeness),
            other => Err(format!(
                "unknown reduction `{other}` (expected layers, labelD or closeness)"
            )),
        }
    }
}

impl fmt::Display for Reduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reduction::Layers => "layers",
            Reduction::LabelD => "labelD",
            Reduction::Closeness => "closeness",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub name: String,
    pub evaluation: Evaluation,
    /// Ordinal priority, 1 best.
    pub priority: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<DLabel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topsis: Option<TopsisResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub reduction: Reduction,
    /// Entries in input order.
    pub entries: Vec<RankEntry>,
    /// Entry indices by priority; ties keep input order.
    pub order: Vec<usize>,
}

/// Evaluate every named composition and reduce the results to priorities.
///
/// `topsis` overrides the default TOPSIS reference points (the ideal and
/// worst corners of the evaluation scale) for the closeness reduction.
pub fn rank(
    model: &SystemModel,
    compositions: &[(String, Composition)],
    method: impl Into<MethodChoice>,
    reduction: Reduction,
    topsis: Option<&TopsisConfig>,
) -> Result<RankReport, EvalError> {
    let choice = method.into();
    if compositions.is_empty() {
        return Err(EvalError::NothingToRank);
    }
    let evaluations = compositions
        .iter()
        .map(|(_, c)| evaluate(model, c, choice))
        .collect::<Result<Vec<_>, _>>()?;
    let keys: Vec<RankKey> = evaluations.iter().map(Evaluation::rank_key).collect();
    if keys.iter().any(|k| !k.same_kind(&keys[0])) {
        return Err(EvalError::MixedKinds);
    }
    let n = keys.len();
    let mut labels = vec![None; n];
    let mut results = vec![None; n];
    let priorities: Vec<usize> = match reduction {
        Reduction::Layers => poset::peel_layers(&keys, RankKey::dominates),
        Reduction::LabelD => {
            let (best, worst) = evaluations[0].corners(model.compat.as_ref());
            let l = poset::label_d(&keys, RankKey::dominates, &best, &worst);
            let present: BTreeSet<DLabel> = l.iter().copied().collect();
            let p = l
                .iter()
                .map(|x| present.iter().position(|y| y == x).expect("present") + 1)
                .collect();
            labels = l.into_iter().map(Some).collect();
            p
        }
        Reduction::Closeness => {
            let points: Vec<Vec<f64>> = keys.iter().map(RankKey::coordinates).collect();
            let cfg = match topsis {
                Some(c) => c.clone(),
                None => {
                    let (best, worst) = evaluations[0].corners(model.compat.as_ref());
                    TopsisConfig::new(vec![best.coordinates()], vec![worst.coordinates()], 2)
                        .map_err(EvalError::Topsis)?
                }
            };
            let report = topsis_rank(&points, &cfg).map_err(EvalError::Topsis)?;
            let mut p = vec![0; n];
            for (pos, &i) in report.ranking.iter().enumerate() {
                p[i] = pos + 1;
            }
            results = report.results.into_iter().map(Some).collect();
            p
        }
    };
    let entries: Vec<RankEntry> = compositions
        .iter()
        .zip(evaluations)
        .enumerate()
        .map(|(i, ((name, _), evaluation))| RankEntry {
            name: name.clone(),
            evaluation,
            priority: priorities[i],
            label: labels[i],
            topsis: results[i],
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| entries[i].priority);
    Ok(RankReport {
        reduction,
        entries,
        order,
    })
}

/// Non-Pareto compositions that become Pareto-efficient by swapping one DA.
pub fn near_pareto_compositions(
    model: &SystemModel,
    compositions: &[Composition],
    method: impl Into<MethodChoice>,
) -> Result<Vec<usize>, EvalError> {
    let choice = method.into();
    poset::near_pareto_by_swap(
        compositions,
        |c| evaluate(model, c, choice).map(|e| e.rank_key()),
        |c| model.one_swaps(c),
        RankKey::dominates,
    )
}

/// One problem found by [`validate_model`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelViolation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ModelViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<ModelViolation>,
    pub warnings: Vec<ModelViolation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(ModelViolation {
            path: path.into(),
            message: message.into(),
        });
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ValidationOptions {
    /// Report non-monotone integration tables as warnings instead of violations.
    pub warn_monotone: bool,
}

pub fn validate_model(model: &SystemModel) -> ValidationReport {
    validate_model_with(model, ValidationOptions::default())
}

pub fn validate_model_with(model: &SystemModel, opts: ValidationOptions) -> ValidationReport {
    let mut r = ValidationReport::default();
    check_tree(model, &mut r);
    check_das(model, &mut r);
    check_tables(model, opts, &mut r);
    check_methods(model, &mut r);
    check_compat(model, &mut r);
    check_compositions(model, &mut r);
    r
}

fn check_tree(model: &SystemModel, r: &mut ValidationReport) {
    let mut seen = BTreeSet::new();
    let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
    for (path, node) in model.root.walk() {
        if !seen.insert(node.id.as_str()) {
            r.push(&path, format!("duplicate node id `{}`", node.id));
        }
        match &node.kind {
            NodeKind::Leaf { das } => {
                if das.is_empty() {
                    r.push(&path, "leaf has no DAs");
                }
                for da in das {
                    if let Some(prev) = owner.insert(da, &node.id) {
                        r.push(&path, format!("DA `{da}` already belongs to component `{prev}`"));
                    }
                    if !model.das.contains_key(da) {
                        r.push(&path, format!("unknown DA `{da}`"));
                    }
                }
            }
            NodeKind::Internal { children } => {
                if children.is_empty() {
                    r.push(&path, "internal node has no children");
                }
            }
        }
    }
    for id in model.das.keys() {
        if !owner.contains_key(id.as_str()) {
            r.push(format!("das/{id}"), "DA does not belong to any component");
        }
    }
}

fn check_das(model: &SystemModel, r: &mut ValidationReport) {
    for (id, da) in &model.das {
        for (kind, est) in &da.estimates {
            let path = format!("das/{id}/{}", kind.name());
            match model.scales.get(&est.scale) {
                None => r.push(path, format!("unknown scale `{}`", est.scale)),
                Some(scale) => {
                    if !kind.accepts(scale) {
                        r.push(
                            &path,
                            format!(
                                "{} estimate on {} scale `{}`",
                                kind.name(),
                                scale.kind_name(),
                                est.scale
                            ),
                        );
                    } else if let Err(v) = check_value(scale, &est.value) {
                        r.push(path, v.to_string());
                    }
                }
            }
        }
    }
}

/// Output scale size produced by a child under table integration, if known.
fn produced_levels(model: &SystemModel, node: &SystemNode) -> Option<BTreeSet<(Level, Level)>> {
    match &node.kind {
        NodeKind::Leaf { das } => {
            let mut out = BTreeSet::new();
            for da in das {
                let est = model.das.get(da)?.estimates.get(&EstimateKind::Ordinal)?;
                let Some(Scale::Ordinal(o)) = model.scales.get(&est.scale) else {
                    return None;
                };
                let EstimateValue::Level(l) = est.value else {
                    return None;
                };
                out.insert((o.size, l));
            }
            Some(out)
        }
        NodeKind::Internal { .. } => {
            let t = model.tables.get(&node.id)?;
            Some(t.cells().map(|(_, &l)| (t.output().size, l)).collect())
        }
    }
}

fn check_tables(model: &SystemModel, opts: ValidationOptions, r: &mut ValidationReport) {
    for (node_id, table) in &model.tables {
        let path = format!("tables/{node_id}");
        for issue in table.issues() {
            let v = ModelViolation {
                path: path.clone(),
                message: issue.to_string(),
            };
            if issue.is_monotonicity() && opts.warn_monotone {
                r.warnings.push(v);
            } else {
                r.violations.push(v);
            }
        }
        let Some(node) = model.root.find(node_id) else {
            r.push(&path, format!("no node `{node_id}`"));
            continue;
        };
        if node.is_leaf() {
            r.push(&path, format!("`{node_id}` is a leaf"));
            continue;
        }
        if node.children().len() != table.inputs().len() {
            r.push(
                &path,
                format!("{} inputs for {} children", table.inputs().len(), node.children().len()),
            );
            continue;
        }
        for (i, (child, input)) in node.children().iter().zip(table.inputs()).enumerate() {
            let Some(produced) = produced_levels(model, child) else {
                continue;
            };
            for (size, level) in produced {
                if size != input.scale.size {
                    r.push(
                        &path,
                        format!(
                            "input {i} (`{}`) has {} levels but the child yields {size}",
                            child.id, input.scale.size
                        ),
                    );
                    break;
                }
                if !input.levels.contains(&level) {
                    r.push(
                        &path,
                        format!(
                            "input {i} (`{}`) can take level {level}, which the table does not cover",
                            child.id
                        ),
                    );
                }
            }
        }
    }
}

fn check_methods(model: &SystemModel, r: &mut ValidationReport) {
    for (node_id, method) in &model.methods {
        let path = format!("methods/{node_id}");
        let Some(node) = model.root.find(node_id) else {
            r.push(path, format!("no node `{node_id}`"));
            continue;
        };
        match method {
            Method::Tables if !node.is_leaf() && !model.tables.contains_key(node_id) => {
                r.push(path, "tables method without an integration table");
            }
            Method::QualityVector => match &model.compat {
                None => r.push(path, "quality-vector method without a compatibility table"),
                Some(compat) => {
                    let leaves = node.leaves();
                    for (i, a) in leaves.iter().enumerate() {
                        for b in &leaves[i + 1..] {
                            for da in a.das() {
                                for db in b.das() {
                                    if compat.get(da, db).is_none() {
                                        r.push(&path, format!("missing compatibility for ({da}, {db})"));
                                    }
                                }
                            }
                        }
                    }
                }
            },
            _ => {}
        }
    }
}

fn check_compat(model: &SystemModel, r: &mut ValidationReport) {
    let Some(compat) = &model.compat else { return };
    if compat.nu() == 0 {
        r.push("compat", "nu must be at least 1");
    }
    for ((a, b), &level) in compat.entries() {
        let path = format!("compat/{a}-{b}");
        if !compat.contains_level(level) {
            r.push(&path, format!("level {level} outside the compatibility scale"));
        }
        match (model.leaf_of(a), model.leaf_of(b)) {
            (Some(la), Some(lb)) if la.id == lb.id => {
                r.push(&path, format!("both DAs belong to component `{}`", la.id));
            }
            (None, _) => r.push(&path, format!("unknown DA `{a}`")),
            (_, None) => r.push(&path, format!("unknown DA `{b}`")),
            _ => {}
        }
    }
}

fn check_compositions(model: &SystemModel, r: &mut ValidationReport) {
    let leaves = model.root.leaves();
    let mut names = BTreeSet::new();
    for (name, comp) in &model.compositions {
        let path = format!("compositions/{name}");
        if !names.insert(name.as_str()) {
            r.push(&path, "duplicate composition name");
        }
        for leaf in &leaves {
            match comp.da_for(&leaf.id) {
                None => r.push(&path, format!("no DA selected for `{}`", leaf.id)),
                Some(da) if !leaf.das().iter().any(|d| d == da) => {
                    r.push(&path, format!("`{da}` is not an alternative of `{}`", leaf.id));
                }
                _ => {}
            }
        }
        if comp.len() != leaves.len() {
            r.push(
                &path,
                format!("selects {} DAs for {} components", comp.len(), leaves.len()),
            );
        }
    }
}
