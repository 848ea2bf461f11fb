//! Model files (JSON), conversion into a [`SystemModel`], DOT export and
//! number formatting for reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::integrators::{CompatTable, IntegrationTable, TableInput, TopsisConfig};
use crate::multiset::Metric;
use crate::poset::PosetView;
use crate::scales::{
    CountPosetScale, Criterion, EstimateValue, Level, MultisetScale, OrdinalScale, QuantScale, Scale, ScaleSet,
    VectorScale,
};
use crate::system::{Composition, Da, DaEstimate, EstimateKind, Method, SystemModel, SystemNode};
use crate::transforms::{OrdinalMap, ThresholdSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> ModelError {
    ModelError::Invalid {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CriterionDecl {
    Quantitative { worst: f64, best: f64 },
    Ordinal { size: Level },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScaleDecl {
    Quantitative { worst: f64, best: f64 },
    Ordinal { size: Level },
    Vector { criteria: Vec<CriterionDecl> },
    CountPoset { levels: usize, elements: u32 },
    Multiset { levels: usize, elements: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantDecl {
    pub scale: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrdinalDecl {
    pub scale: String,
    pub level: Level,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorDecl {
    pub scale: String,
    pub value: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultisetDecl {
    pub scale: String,
    pub eta: Vec<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DaDecl {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantitative: Option<QuantDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordinal: Option<OrdinalDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<VectorDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiset: Option<MultisetDecl>,
}

/// A tree node: internal nodes list `children`, leaves list `das`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDecl {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub children: Option<Vec<NodeDecl>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub das: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompatEntry {
    pub a: String,
    pub b: String,
    pub w: Level,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompatDecl {
    pub nu: Level,
    #[serde(default)]
    pub zero_level: bool,
    #[serde(default)]
    pub entries: Vec<CompatEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableInputDecl {
    pub scale: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<Level>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellDecl {
    #[serde(rename = "in")]
    pub input: Vec<Level>,
    pub out: Level,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableDecl {
    pub node: String,
    pub inputs: Vec<TableInputDecl>,
    pub output: String,
    pub cells: Vec<CellDecl>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdDecl {
    pub source: String,
    pub target: String,
    /// Ordered from the best class boundary to the worst.
    pub thresholds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrdinalMapDecl {
    pub source: String,
    pub target: String,
    pub table: Vec<Level>,
    #[serde(default)]
    pub reverse: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopsisDecl {
    pub best: Vec<Vec<f64>>,
    pub worst: Vec<Vec<f64>>,
    #[serde(default = "default_exponent")]
    pub exponent: u8,
}

fn default_exponent() -> u8 {
    2
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositionDecl {
    pub name: String,
    /// Leaf id to selected DA id.
    pub selection: BTreeMap<String, String>,
}

/// On-disk model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default)]
    pub metric: Metric,
    pub scales: BTreeMap<String, ScaleDecl>,
    pub das: BTreeMap<String, DaDecl>,
    pub tree: NodeDecl,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub methods: BTreeMap<String, Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compat: Option<CompatDecl>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tables: Vec<TableDecl>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub thresholds: BTreeMap<String, ThresholdDecl>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub ordinal_maps: BTreeMap<String, OrdinalMapDecl>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub topsis: BTreeMap<String, TopsisDecl>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub compositions: Vec<CompositionDecl>,
}

/// Parse a model file and check that every reference resolves.
pub fn parse_model(text: &str) -> Result<ModelFile, Vec<ModelError>> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| {
        vec![ModelError::Syntax {
            line: e.line().max(1),
            column: e.column().max(1),
            message: strip_position(&e.to_string()),
        }]
    })?;
    let errors = check_references(&file);
    if errors.is_empty() {
        Ok(file)
    } else {
        Err(errors)
    }
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

pub fn to_json(file: &ModelFile) -> String {
    serde_json::to_string_pretty(file).expect("model files always serialize")
}

fn collect_nodes<'a>(node: &'a NodeDecl, path: String, out: &mut Vec<(String, &'a NodeDecl)>) {
    for c in node.children.iter().flatten() {
        collect_nodes(c, format!("{path}/{}", c.id), out);
    }
    out.push((path, node));
}

fn scale_kind<'a>(file: &'a ModelFile, id: &str) -> Option<&'a ScaleDecl> {
    file.scales.get(id)
}

fn check_references(file: &ModelFile) -> Vec<ModelError> {
    let mut errs = Vec::new();
    let need_scale = |errs: &mut Vec<ModelError>, path: &str, id: &str, want: &str| match scale_kind(file, id) {
        None => errs.push(invalid(path, format!("unknown scale `{id}`"))),
        Some(s) => {
            let kind = decl_kind(s);
            if kind != want {
                errs.push(invalid(path, format!("scale `{id}` is {kind}, expected {want}")));
            }
        }
    };
    for (id, da) in &file.das {
        let base = format!("das/{id}");
        if let Some(e) = &da.quantitative {
            need_scale(&mut errs, &format!("{base}/quantitative"), &e.scale, "quantitative");
        }
        if let Some(e) = &da.ordinal {
            need_scale(&mut errs, &format!("{base}/ordinal"), &e.scale, "ordinal");
        }
        if let Some(e) = &da.vector {
            need_scale(&mut errs, &format!("{base}/vector"), &e.scale, "vector");
        }
        if let Some(e) = &da.multiset {
            need_scale(&mut errs, &format!("{base}/multiset"), &e.scale, "multiset");
        }
    }

    let mut nodes = Vec::new();
    collect_nodes(&file.tree, format!("tree/{}", file.tree.id), &mut nodes);
    let mut node_ids = BTreeSet::new();
    let mut leaf_das: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (path, n) in &nodes {
        node_ids.insert(n.id.as_str());
        match (&n.children, &n.das) {
            (Some(_), Some(_)) => errs.push(invalid(path, "node has both `children` and `das`")),
            (None, None) => errs.push(invalid(path, "node needs `children` or `das`")),
            (Some(c), None) if c.is_empty() => errs.push(invalid(path, "`children` is empty")),
            (None, Some(das)) => {
                for da in das {
                    if !file.das.contains_key(da) {
                        errs.push(invalid(path, format!("unknown DA `{da}`")));
                    }
                }
                leaf_das.insert(&n.id, das.iter().map(String::as_str).collect());
            }
            _ => {}
        }
    }

    for node in file.methods.keys() {
        if !node_ids.contains(node.as_str()) {
            errs.push(invalid(format!("methods/{node}"), format!("unknown node `{node}`")));
        }
    }
    if let Some(c) = &file.compat {
        for (i, e) in c.entries.iter().enumerate() {
            for da in [&e.a, &e.b] {
                if !file.das.contains_key(da) {
                    errs.push(invalid(format!("compat/entries/{i}"), format!("unknown DA `{da}`")));
                }
            }
        }
    }
    for (i, t) in file.tables.iter().enumerate() {
        let path = format!("tables/{i}");
        if !node_ids.contains(t.node.as_str()) {
            errs.push(invalid(&path, format!("unknown node `{}`", t.node)));
        }
        for (j, input) in t.inputs.iter().enumerate() {
            need_scale(&mut errs, &format!("{path}/inputs/{j}"), &input.scale, "ordinal");
        }
        need_scale(&mut errs, &format!("{path}/output"), &t.output, "ordinal");
    }
    for (id, t) in &file.thresholds {
        let path = format!("thresholds/{id}");
        need_scale(&mut errs, &path, &t.source, "quantitative");
        need_scale(&mut errs, &path, &t.target, "ordinal");
    }
    for (id, m) in &file.ordinal_maps {
        let path = format!("ordinal_maps/{id}");
        need_scale(&mut errs, &path, &m.source, "ordinal");
        need_scale(&mut errs, &path, &m.target, "ordinal");
    }
    for c in &file.compositions {
        let path = format!("compositions/{}", c.name);
        for (leaf, da) in &c.selection {
            match leaf_das.get(leaf.as_str()) {
                None => errs.push(invalid(&path, format!("unknown component `{leaf}`"))),
                Some(_) if !file.das.contains_key(da) => errs.push(invalid(&path, format!("unknown DA `{da}`"))),
                _ => {}
            }
        }
    }
    errs
}

fn decl_kind(s: &ScaleDecl) -> &'static str {
    match s {
        ScaleDecl::Quantitative { .. } => "quantitative",
        ScaleDecl::Ordinal { .. } => "ordinal",
        ScaleDecl::Vector { .. } => "vector",
        ScaleDecl::CountPoset { .. } => "count-poset",
        ScaleDecl::Multiset { .. } => "multiset",
    }
}

fn build_scale(decl: &ScaleDecl) -> Result<Scale, String> {
    let s = match decl {
        ScaleDecl::Quantitative { worst, best } => {
            Scale::Quantitative(QuantScale::new(*worst, *best).map_err(|e| e.to_string())?)
        }
        ScaleDecl::Ordinal { size } => Scale::Ordinal(OrdinalScale::new(*size).map_err(|e| e.to_string())?),
        ScaleDecl::Vector { criteria } => {
            let cs = criteria
                .iter()
                .map(|c| match c {
                    CriterionDecl::Quantitative { worst, best } => {
                        QuantScale::new(*worst, *best).map(Criterion::Quantitative)
                    }
                    CriterionDecl::Ordinal { size } => OrdinalScale::new(*size).map(Criterion::Ordinal),
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| e.to_string())?;
            Scale::Vector(VectorScale::new(cs).map_err(|e| e.to_string())?)
        }
        ScaleDecl::CountPoset { levels, elements } => {
            Scale::CountPoset(CountPosetScale::new(*levels, *elements).map_err(|e| e.to_string())?)
        }
        ScaleDecl::Multiset { levels, elements } => {
            Scale::Multiset(MultisetScale::new(*levels, *elements).map_err(|e| e.to_string())?)
        }
    };
    Ok(s)
}

fn build_node(decl: &NodeDecl) -> SystemNode {
    match &decl.children {
        Some(children) => SystemNode::internal(decl.id.clone(), children.iter().map(build_node).collect()),
        None => SystemNode::leaf(decl.id.clone(), decl.das.clone().unwrap_or_default()),
    }
}

fn ordinal(scales: &ScaleSet, id: &str) -> Option<OrdinalScale> {
    match scales.get(id) {
        Some(Scale::Ordinal(o)) => Some(*o),
        _ => None,
    }
}

fn quant(scales: &ScaleSet, id: &str) -> Option<QuantScale> {
    match scales.get(id) {
        Some(Scale::Quantitative(q)) => Some(*q),
        _ => None,
    }
}

/// Build an in-memory model from a parsed file. Semantic problems that the
/// model can still represent (sparse tables, bad estimates, ...) are left
/// for [`crate::system::validate_model`].
pub fn build_model(file: &ModelFile) -> Result<SystemModel, Vec<ModelError>> {
    let mut errs = Vec::new();
    let mut scales = ScaleSet::new();
    for (id, decl) in &file.scales {
        match build_scale(decl) {
            Ok(s) => {
                scales.insert(id.clone(), s);
            }
            Err(m) => errs.push(invalid(format!("scales/{id}"), m)),
        }
    }

    let das = file
        .das
        .iter()
        .map(|(id, d)| {
            let mut estimates = BTreeMap::new();
            if let Some(e) = &d.quantitative {
                estimates.insert(
                    EstimateKind::Quantitative,
                    DaEstimate {
                        scale: e.scale.clone(),
                        value: EstimateValue::Real(e.value),
                    },
                );
            }
            if let Some(e) = &d.ordinal {
                estimates.insert(
                    EstimateKind::Ordinal,
                    DaEstimate {
                        scale: e.scale.clone(),
                        value: EstimateValue::Level(e.level),
                    },
                );
            }
            if let Some(e) = &d.vector {
                estimates.insert(
                    EstimateKind::Vector,
                    DaEstimate {
                        scale: e.scale.clone(),
                        value: EstimateValue::Vector(e.value.clone()),
                    },
                );
            }
            if let Some(e) = &d.multiset {
                estimates.insert(
                    EstimateKind::Multiset,
                    DaEstimate {
                        scale: e.scale.clone(),
                        value: EstimateValue::Counts(e.eta.clone()),
                    },
                );
            }
            (
                id.clone(),
                Da {
                    id: id.clone(),
                    estimates,
                },
            )
        })
        .collect();

    let root = build_node(&file.tree);
    let leaves: Vec<String> = root.leaves().iter().map(|l| l.id.clone()).collect();

    let compat = file.compat.as_ref().map(|c| {
        let mut t = CompatTable::new(c.nu, c.zero_level);
        for (i, e) in c.entries.iter().enumerate() {
            if let Some(prev) = t.insert(&e.a, &e.b, e.w) {
                if prev != e.w {
                    errs.push(invalid(
                        format!("compat/entries/{i}"),
                        format!("conflicting levels {prev} and {} for ({}, {})", e.w, e.a, e.b),
                    ));
                }
            }
        }
        t
    });

    let mut tables = BTreeMap::new();
    for (i, t) in file.tables.iter().enumerate() {
        let path = format!("tables/{i}");
        let inputs: Option<Vec<TableInput>> = t
            .inputs
            .iter()
            .map(|inp| {
                ordinal(&scales, &inp.scale).map(|o| match &inp.levels {
                    Some(l) => TableInput::restricted(o, l.clone()),
                    None => TableInput::full(o),
                })
            })
            .collect();
        let (Some(inputs), Some(output)) = (inputs, ordinal(&scales, &t.output)) else {
            errs.push(invalid(&path, "table scales must be ordinal"));
            continue;
        };
        let table = IntegrationTable::from_cells(inputs, output, t.cells.iter().map(|c| (c.input.clone(), c.out)));
        if tables.insert(t.node.clone(), table).is_some() {
            errs.push(invalid(&path, format!("second table for node `{}`", t.node)));
        }
    }

    let mut thresholds = BTreeMap::new();
    for (id, t) in &file.thresholds {
        let path = format!("thresholds/{id}");
        let (Some(src), Some(dst)) = (quant(&scales, &t.source), ordinal(&scales, &t.target)) else {
            errs.push(invalid(&path, "threshold scales must be quantitative to ordinal"));
            continue;
        };
        match ThresholdSpec::new(t.thresholds.clone(), dst, &src) {
            Ok(ts) => {
                thresholds.insert(id.clone(), (src, ts));
            }
            Err(e) => errs.push(invalid(path, e.to_string())),
        }
    }

    let mut ordinal_maps = BTreeMap::new();
    for (id, m) in &file.ordinal_maps {
        let path = format!("ordinal_maps/{id}");
        let (Some(src), Some(dst)) = (ordinal(&scales, &m.source), ordinal(&scales, &m.target)) else {
            errs.push(invalid(&path, "ordinal maps need ordinal scales"));
            continue;
        };
        match OrdinalMap::new(src, dst, m.table.clone(), m.reverse) {
            Ok(map) => {
                ordinal_maps.insert(id.clone(), map);
            }
            Err(e) => errs.push(invalid(path, e.to_string())),
        }
    }

    let mut topsis = BTreeMap::new();
    for (id, t) in &file.topsis {
        match TopsisConfig::new(t.best.clone(), t.worst.clone(), t.exponent) {
            Ok(c) => {
                topsis.insert(id.clone(), c);
            }
            Err(e) => errs.push(invalid(format!("topsis/{id}"), e.to_string())),
        }
    }

    let compositions = file
        .compositions
        .iter()
        .map(|c| {
            // leaf order from the tree, unknown leaves last
            let mut sel: Vec<(String, String)> = leaves
                .iter()
                .filter_map(|l| c.selection.get(l).map(|d| (l.clone(), d.clone())))
                .collect();
            sel.extend(
                c.selection
                    .iter()
                    .filter(|(l, _)| !leaves.contains(l))
                    .map(|(l, d)| (l.clone(), d.clone())),
            );
            (c.name.clone(), Composition::new(sel))
        })
        .collect();

    if !errs.is_empty() {
        return Err(errs);
    }
    Ok(SystemModel {
        name: file.name.clone(),
        notes: file.notes.clone(),
        scales,
        das,
        root,
        compat,
        tables,
        methods: file.methods.clone(),
        thresholds,
        ordinal_maps,
        topsis,
        compositions,
        metric: file.metric,
    })
}

/// Parse and build in one step.
pub fn load_model(text: &str) -> Result<SystemModel, Vec<ModelError>> {
    build_model(&parse_model(text)?)
}

/// Graphviz rendering of a poset's Hasse diagram, best elements on top.
pub fn export_dot<T: fmt::Display>(view: &PosetView<T>, name: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "digraph \"{}\" {{", escape(name));
    let _ = writeln!(s, "  rankdir=BT;");
    let _ = writeln!(s, "  node [shape=box];");
    for (i, e) in view.elements().iter().enumerate() {
        let _ = writeln!(s, "  n{i} [label=\"{}\"];", escape(&e.to_string()));
    }
    for &(hi, lo) in view.covers() {
        let _ = writeln!(s, "  n{lo} -> n{hi};");
    }
    s.push_str("}\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Shortest decimal that round-trips after rounding to 15 significant digits,
/// so `1.5 + 1.1 + 1.2 + 1.4` prints as `5.2`.
pub fn fmt_real(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.14e}").parse().expect("scientific notation parses");
    if rounded == 0.0 {
        return "0".to_string();
    }
    rounded.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt_real_hides_summation_noise() {
        assert_eq!(fmt_real(1.5 + 1.1 + 1.2 + 1.4), "5.2");
        assert_eq!(fmt_real(8.4), "8.4");
        assert_eq!(fmt_real(-0.0), "0");
        assert_eq!(fmt_real(3.0), "3");
        assert_eq!(fmt_real(0.1 + 0.2), "0.3");
        assert_eq!(fmt_real(1e-20), "0.00000000000000000001");
    }

    #[test]
    fn empty_input_reports_first_position() {
        let err = parse_model("").unwrap_err();
        assert!(
            matches!(err[0], ModelError::Syntax { line: 1, column: 1, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_model("{\n  \"name\": \"x\",\n  oops\n}").unwrap_err();
        let ModelError::Syntax { line, column, .. } = &err[0] else {
            panic!("{err:?}")
        };
        assert_eq!((*line, *column), (3, 3));
    }

    const TINY: &str = r#"{
      "name": "tiny",
      "scales": {"o3": {"kind": "ordinal", "size": 3}},
      "das": {"A1": {"ordinal": {"scale": "o3", "level": 1}},
              "B1": {"ordinal": {"scale": "o3", "level": 2}}},
      "tree": {"id": "S", "children": [{"id": "A", "das": ["A1"]}, {"id": "B", "das": ["B1"]}]},
      "methods": {"S": "count-profile"},
      "compositions": [{"name": "c", "selection": {"A": "A1", "B": "B1"}}]
    }"#;

    #[test]
    fn round_trip() {
        let m = parse_model(TINY).unwrap();
        assert_eq!(parse_model(&to_json(&m)).unwrap(), m);
    }

    #[test]
    fn unresolved_references_are_reported() {
        let bad = TINY
            .replace("\"B1\"]", "\"B9\"]")
            .replace("\"scale\": \"o3\", \"level\": 1", "\"scale\": \"o4\", \"level\": 1");
        let errs = parse_model(&bad).unwrap_err();
        let text: Vec<String> = errs.iter().map(|e| e.to_string()).collect();
        assert!(text.iter().any(|t| t.contains("unknown scale `o4`")), "{text:?}");
        assert!(text.iter().any(|t| t.contains("unknown DA `B9`")), "{text:?}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = TINY.replace("\"name\": \"tiny\",", "\"name\": \"tiny\", \"extra\": 1,");
        assert!(matches!(parse_model(&bad).unwrap_err()[0], ModelError::Syntax { .. }));
    }

    #[test]
    fn build_orders_selection_by_tree() {
        let m = load_model(TINY).unwrap();
        assert_eq!(m.compositions[0].1.label(), "A1*B1");
        assert_eq!(m.root.leaves().len(), 2);
    }

    #[test]
    fn dot_is_deterministic() {
        let v = PosetView::new(vec![3u32, 2, 1], |a: &u32, b: &u32| a > b);
        let d = export_dot(&v, "chain");
        assert_eq!(d, export_dot(&v, "chain"));
        assert!(d.contains("n1 -> n0;") && d.contains("n2 -> n1;") && !d.contains("n2 -> n0;"));
    }
}
