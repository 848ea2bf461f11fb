//! Dominance, Pareto layers, cover (Hasse) edges and the ordinal quality
//! ladder `D` (ideal, layer 1, layer 2, ..., worst).
//!
//! The generic functions take the strict dominance relation as a closure
//! `dominates(a, b)` which must be irreflexive and transitive. Results only
//! depend on input order, never on scheduling.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scales::QualityVector;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PosetError {
    #[error("count vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("count vectors have different totals ({0} vs {1})")]
    SumMismatch(u64, u64),
}

/// Cumulative (first-order) dominance on count vectors, level 1 best.
///
/// Assumes equal length and equal totals.
pub fn cumulative_dominates(a: &[u32], b: &[u32]) -> bool {
    let (mut ca, mut cb) = (0u64, 0u64);
    let mut strict = false;
    for (&x, &y) in a.iter().zip(b) {
        ca += u64::from(x);
        cb += u64::from(y);
        if ca < cb {
            return false;
        }
        if ca > cb {
            strict = true;
        }
    }
    strict
}

/// Does count profile `a` dominate `b`? Both must have the same length and total.
pub fn dominates_counts(a: &[u32], b: &[u32]) -> Result<bool, PosetError> {
    if a.len() != b.len() {
        return Err(PosetError::LengthMismatch(a.len(), b.len()));
    }
    let sa: u64 = a.iter().map(|&x| u64::from(x)).sum();
    let sb: u64 = b.iter().map(|&x| u64::from(x)).sum();
    if sa != sb {
        return Err(PosetError::SumMismatch(sa, sb));
    }
    Ok(cumulative_dominates(a, b))
}

pub(crate) fn quality_dominates(a: &QualityVector, b: &QualityVector) -> bool {
    a.w >= b.w && (a.counts == b.counts || cumulative_dominates(&a.counts, &b.counts)) && a != b
}

/// Dominance on `N(S) = (w; n)`: compatibility no worse, counts equal or
/// dominating, and the two vectors differ.
pub fn dominates_quality(a: &QualityVector, b: &QualityVector) -> Result<bool, PosetError> {
    dominates_counts(&a.counts, &b.counts)?;
    Ok(quality_dominates(a, b))
}

/// Indices of points not dominated by any other point, in input order.
pub fn pareto_layer<T, F>(points: &[T], dominates: F) -> Vec<usize>
where
    F: Fn(&T, &T) -> bool,
{
    let all: Vec<usize> = (0..points.len()).collect();
    front_of(points, &all, &dominates)
}

fn front_of<T, F>(points: &[T], pool: &[usize], dominates: &F) -> Vec<usize>
where
    F: Fn(&T, &T) -> bool,
{
    pool.iter()
        .copied()
        .filter(|&i| !pool.iter().any(|&j| j != i && dominates(&points[j], &points[i])))
        .collect()
}

/// Nondominated sorting: returns the 1-based layer of every point.
pub fn peel_layers<T, F>(points: &[T], dominates: F) -> Vec<usize>
where
    F: Fn(&T, &T) -> bool,
{
    let mut layer = vec![0usize; points.len()];
    let mut remaining: Vec<usize> = (0..points.len()).collect();
    let mut k = 1;
    while !remaining.is_empty() {
        let front = front_of(points, &remaining, &dominates);
        // a strict partial order on a finite set always has a minimal element
        assert!(!front.is_empty(), "dominance relation has a cycle");
        for &i in &front {
            layer[i] = k;
        }
        remaining.retain(|i| layer[*i] == 0);
        k += 1;
    }
    layer
}

/// Cover edges `(a, b)`: `a` dominates `b` with nothing in between.
/// Sorted by `(a, b)`.
pub fn cover_edges<T, F>(points: &[T], dominates: F) -> Vec<(usize, usize)>
where
    F: Fn(&T, &T) -> bool,
{
    let n = points.len();
    let rel = relation_matrix(points, &dominates);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if rel[a * n + b] && !(0..n).any(|c| rel[a * n + c] && rel[c * n + b]) {
                edges.push((a, b));
            }
        }
    }
    edges
}

fn relation_matrix<T, F>(points: &[T], dominates: &F) -> Vec<bool>
where
    F: Fn(&T, &T) -> bool,
{
    let n = points.len();
    let mut rel = vec![false; n * n];
    for a in 0..n {
        for b in 0..n {
            rel[a * n + b] = a != b && dominates(&points[a], &points[b]);
        }
    }
    rel
}

/// A finite poset with its dominance matrix, cover edges and layer indices.
#[derive(Debug, Clone, PartialEq)]
pub struct PosetView<T> {
    elements: Vec<T>,
    dominance: Vec<bool>,
    covers: Vec<(usize, usize)>,
    layer_of: Vec<usize>,
}

impl<T> PosetView<T> {
    pub fn new<F>(elements: Vec<T>, dominates: F) -> Self
    where
        F: Fn(&T, &T) -> bool,
    {
        let dominance = relation_matrix(&elements, &dominates);
        let n = elements.len();
        let idx: Vec<usize> = (0..n).collect();
        let covers = cover_edges(&idx, |&a, &b| dominance[a * n + b]);
        let layer_of = peel_layers(&idx, |&a, &b| dominance[a * n + b]);
        Self {
            elements,
            dominance,
            covers,
            layer_of,
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[T] {
        &self.elements
    }

    pub fn dominates(&self, a: usize, b: usize) -> bool {
        self.dominance[a * self.len() + b]
    }

    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    /// 1-based Pareto layer of element `i`.
    pub fn layer_of(&self, i: usize) -> usize {
        self.layer_of[i]
    }

    /// Elements directly above `i` in the Hasse diagram.
    pub fn upper_covers(&self, i: usize) -> Vec<usize> {
        self.covers.iter().filter(|e| e.1 == i).map(|e| e.0).collect()
    }

    /// Elements directly below `i` in the Hasse diagram.
    pub fn lower_covers(&self, i: usize) -> Vec<usize> {
        self.covers.iter().filter(|e| e.0 == i).map(|e| e.1).collect()
    }

    pub fn position(&self, x: &T) -> Option<usize>
    where
        T: PartialEq,
    {
        self.elements.iter().position(|e| e == x)
    }

    /// Undirected shortest path lengths in the cover graph from `from`.
    /// Unreachable elements get `None`.
    pub fn hasse_distances(&self, from: usize) -> Vec<Option<u64>> {
        let n = self.len();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &self.covers {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut dist = vec![None; n];
        dist[from] = Some(0);
        let mut queue = std::collections::VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0);
            for &v in &adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// Position on the ordinal quality ladder `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DLabel {
    Ideal,
    Layer(usize),
    Worst,
}

impl fmt::Display for DLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DLabel::Ideal => write!(f, "ideal"),
            DLabel::Layer(k) => write!(f, "layer-{k}"),
            DLabel::Worst => write!(f, "worst"),
        }
    }
}

/// Label points on the `D` ladder: points equal to the scale's best corner are
/// `Ideal`, points equal to the worst corner are `Worst`, the rest are peeled
/// into layers after the corner points are removed.
pub fn label_d<T, F>(points: &[T], dominates: F, best_corner: &T, worst_corner: &T) -> Vec<DLabel>
where
    T: PartialEq,
    F: Fn(&T, &T) -> bool,
{
    let mut labels: Vec<Option<DLabel>> = points
        .iter()
        .map(|p| {
            if p == best_corner {
                Some(DLabel::Ideal)
            } else if p == worst_corner {
                Some(DLabel::Worst)
            } else {
                None
            }
        })
        .collect();
    let rest: Vec<usize> = (0..points.len()).filter(|&i| labels[i].is_none()).collect();
    let layers = peel_layers(&rest, |&a, &b| dominates(&points[a], &points[b]));
    for (&i, k) in rest.iter().zip(layers) {
        labels[i] = Some(DLabel::Layer(k));
    }
    labels.into_iter().map(|l| l.expect("every point labelled")).collect()
}

/// Non-Pareto compositions that a single-element swap turns into a
/// Pareto-efficient one.
///
/// `one_swaps(c)` lists every composition differing from `c` in exactly one
/// selected element. A swapped composition counts as Pareto-efficient when its
/// evaluation is not dominated by the evaluation of any composition in the
/// candidate set. Returns indices into `compositions`.
pub fn near_pareto_by_swap<C, P, E, Ev, Sw, D>(
    compositions: &[C],
    evaluate: Ev,
    one_swaps: Sw,
    dominates: D,
) -> Result<Vec<usize>, E>
where
    Ev: Fn(&C) -> Result<P, E>,
    Sw: Fn(&C) -> Vec<C>,
    D: Fn(&P, &P) -> bool,
{
    let points = compositions.iter().map(&evaluate).collect::<Result<Vec<_>, E>>()?;
    let front = pareto_layer(&points, &dominates);
    let mut out = Vec::new();
    for (i, c) in compositions.iter().enumerate() {
        if front.contains(&i) {
            continue;
        }
        for swapped in one_swaps(c) {
            let p = evaluate(&swapped)?;
            if !points.iter().any(|q| dominates(q, &p)) {
                out.push(i);
                break;
            }
        }
    }
    Ok(out)
}
