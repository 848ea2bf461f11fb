//! Interval multiset estimates over `P^{l,n}`: enumeration of valid
//! estimates, the scale poset, distances and median-like aggregation.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poset::{cumulative_dominates, PosetView};
use crate::scales::{has_contiguous_support, Level, MultisetScale, Violation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MultisetError {
    #[error("invalid multiset estimate: {0}")]
    Invalid(String),
    #[error("support of {counts:?} is not contiguous")]
    NonContiguous { counts: Vec<u32> },
    #[error("level {level} outside 1..={levels}")]
    LevelOutOfRange { level: Level, levels: usize },
    #[error("estimates belong to different scales")]
    ScaleMismatch,
    #[error("median of an empty set of estimates")]
    Empty,
}

impl From<Violation> for MultisetError {
    fn from(v: Violation) -> Self {
        match v {
            Violation::NonContiguousSupport { counts } => MultisetError::NonContiguous { counts },
            other => MultisetError::Invalid(other.to_string()),
        }
    }
}

/// Count vector `(eta_1..eta_l)` with contiguous support.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultisetEstimate(Vec<u32>);

impl MultisetEstimate {
    pub fn new(counts: Vec<u32>, scale: &MultisetScale) -> Result<Self, MultisetError> {
        scale.check(&counts)?;
        Ok(Self(counts))
    }

    /// Builds an estimate without checking a particular scale; only the
    /// contiguity rule is enforced.
    pub fn from_counts(counts: Vec<u32>) -> Result<Self, MultisetError> {
        if counts.is_empty() {
            return Err(MultisetError::Invalid("no levels".into()));
        }
        if !has_contiguous_support(&counts) {
            return Err(MultisetError::NonContiguous { counts });
        }
        Ok(Self(counts))
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn into_counts(self) -> Vec<u32> {
        self.0
    }

    pub fn scale(&self) -> MultisetScale {
        MultisetScale {
            levels: self.0.len(),
            elements: self.0.iter().sum(),
        }
    }

    pub fn cumulative(&self) -> Vec<u64> {
        cumulative(&self.0)
    }

    pub fn dominates(&self, other: &Self) -> bool {
        cumulative_dominates(&self.0, &other.0)
    }
}

impl fmt::Display for MultisetEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        crate::scales::write_joined(f, &self.0)?;
        write!(f, ")")
    }
}

fn cumulative(counts: &[u32]) -> Vec<u64> {
    counts
        .iter()
        .scan(0u64, |acc, &c| {
            *acc += u64::from(c);
            Some(*acc)
        })
        .collect()
}

/// All count vectors of length `levels` summing to `elements`, in canonical
/// order: descending total of the cumulative sums (a linear extension of
/// cumulative dominance), ties broken by descending lexicographic counts.
pub fn enumerate_count_vectors(levels: usize, elements: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(levels);
    compositions_into(levels, elements, &mut cur, &mut out);
    sort_canonical(&mut out);
    out
}

fn compositions_into(levels: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if levels == 0 {
        return;
    }
    if levels == 1 {
        cur.push(left);
        out.push(cur.clone());
        cur.pop();
        return;
    }
    for first in (0..=left).rev() {
        cur.push(first);
        compositions_into(levels - 1, left - first, cur, out);
        cur.pop();
    }
}

fn sort_canonical(v: &mut [Vec<u32>]) {
    v.sort_by(|a, b| {
        let sa: u64 = cumulative(a).iter().sum();
        let sb: u64 = cumulative(b).iter().sum();
        sb.cmp(&sa).then_with(|| b.cmp(a))
    });
}

/// Every valid estimate of `P^{l,n}` in canonical order.
pub fn enumerate_estimates(scale: &MultisetScale) -> Vec<MultisetEstimate> {
    enumerate_count_vectors(scale.levels, scale.elements)
        .into_iter()
        .filter(|c| has_contiguous_support(c))
        .map(MultisetEstimate)
        .collect()
}

/// The poset of all valid estimates of a multiset scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalePoset {
    pub scale: MultisetScale,
    pub view: PosetView<MultisetEstimate>,
}

impl ScalePoset {
    pub fn top(&self) -> &MultisetEstimate {
        &self.view.elements()[0]
    }

    pub fn bottom(&self) -> &MultisetEstimate {
        self.view.elements().last().expect("scale poset is never empty")
    }

    pub fn index_of(&self, e: &MultisetEstimate) -> Option<usize> {
        self.view.position(e)
    }

    pub fn distance(&self, a: &MultisetEstimate, b: &MultisetEstimate, metric: Metric) -> Result<u64, MultisetError> {
        match metric {
            Metric::CumulativeL1 => cumulative_l1(a, b),
            Metric::HassePath => {
                let ia = self.index_of(a).ok_or(MultisetError::ScaleMismatch)?;
                let ib = self.index_of(b).ok_or(MultisetError::ScaleMismatch)?;
                self.view.hasse_distances(ia)[ib].ok_or(MultisetError::ScaleMismatch)
            }
        }
    }
}

pub fn build_scale_poset(scale: &MultisetScale) -> ScalePoset {
    ScalePoset {
        scale: *scale,
        view: PosetView::new(enumerate_estimates(scale), MultisetEstimate::dominates),
    }
}

/// Distance used by the median search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Metric {
    /// Sum of absolute differences of cumulative counts.
    #[default]
    #[serde(rename = "cumL1")]
    CumulativeL1,
    /// Shortest undirected path in the cover graph of the scale poset.
    #[serde(rename = "hasse")]
    HassePath,
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cumL1" => Ok(Metric::CumulativeL1),
            "hasse" => Ok(Metric::HassePath),
            other => Err(format!("unknown metric `{other}` (expected cumL1 or hasse)")),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::CumulativeL1 => "cumL1",
            Metric::HassePath => "hasse",
        })
    }
}

fn cumulative_l1(a: &MultisetEstimate, b: &MultisetEstimate) -> Result<u64, MultisetError> {
    if a.scale() != b.scale() {
        return Err(MultisetError::ScaleMismatch);
    }
    Ok(a.cumulative()
        .iter()
        .zip(b.cumulative())
        .map(|(x, y)| x.abs_diff(y))
        .sum())
}

pub fn multiset_distance(a: &MultisetEstimate, b: &MultisetEstimate, metric: Metric) -> Result<u64, MultisetError> {
    if a.scale() != b.scale() {
        return Err(MultisetError::ScaleMismatch);
    }
    match metric {
        Metric::CumulativeL1 => cumulative_l1(a, b),
        Metric::HassePath => build_scale_poset(&a.scale()).distance(a, b, metric),
    }
}

/// Median-like aggregate. `argmin_set` is the answer; `representative` is
/// only a deterministic pick for downstream ordering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MedianResult {
    pub argmin_set: Vec<MultisetEstimate>,
    pub representative: MultisetEstimate,
    pub total_distance: u64,
    pub tie_broken: bool,
}

/// Valid estimates minimising the total distance to `estimates`.
///
/// The argmin set is returned in canonical enumeration order and the
/// representative is its first member.
pub fn median_like(estimates: &[MultisetEstimate], metric: Metric) -> Result<MedianResult, MultisetError> {
    let first = estimates.first().ok_or(MultisetError::Empty)?;
    let scale = first.scale();
    if estimates.iter().any(|e| e.scale() != scale) {
        return Err(MultisetError::ScaleMismatch);
    }
    let poset = build_scale_poset(&scale);
    let candidates = poset.view.elements();

    // distance rows from each input, indexed by candidate
    let rows: Vec<Vec<u64>> = match metric {
        Metric::CumulativeL1 => estimates
            .iter()
            .map(|e| {
                candidates
                    .iter()
                    .map(|c| cumulative_l1(e, c))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?,
        Metric::HassePath => estimates
            .iter()
            .map(|e| {
                let i = poset.index_of(e).ok_or(MultisetError::ScaleMismatch)?;
                poset
                    .view
                    .hasse_distances(i)
                    .into_iter()
                    .map(|d| d.ok_or(MultisetError::ScaleMismatch))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?,
    };

    let totals: Vec<u64> = (0..candidates.len()).map(|c| rows.iter().map(|r| r[c]).sum()).collect();
    let best = *totals.iter().min().expect("at least one candidate");
    let argmin_set: Vec<MultisetEstimate> = candidates
        .iter()
        .zip(&totals)
        .filter(|(_, &t)| t == best)
        .map(|(c, _)| c.clone())
        .collect();
    Ok(MedianResult {
        representative: argmin_set[0].clone(),
        tie_broken: argmin_set.len() > 1,
        argmin_set,
        total_distance: best,
    })
}

/// Multiplicity of each level among `levels` (1-based, over `l` levels).
pub fn counts_from_ordinals(levels: &[Level], l: usize) -> Result<MultisetEstimate, MultisetError> {
    let mut counts = vec![0u32; l];
    for &lv in levels {
        if lv == 0 || lv as usize > l {
            return Err(MultisetError::LevelOutOfRange { level: lv, levels: l });
        }
        counts[lv as usize - 1] += 1;
    }
    MultisetEstimate::from_counts(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(l: usize, n: u32) -> MultisetScale {
        MultisetScale::new(l, n).unwrap()
    }

    fn m(c: &[u32]) -> MultisetEstimate {
        MultisetEstimate::from_counts(c.to_vec()).unwrap()
    }

    #[test]
    fn p34_has_twelve_estimates() {
        let all = enumerate_estimates(&p(3, 4));
        assert_eq!(all.len(), 12);
        for bad in [[2, 0, 2], [3, 0, 1], [1, 0, 3]] {
            assert!(!all.contains(&MultisetEstimate(bad.to_vec())));
        }
        assert_eq!(all[0], m(&[4, 0, 0]));
        assert_eq!(all[11], m(&[0, 0, 4]));
    }

    #[test]
    fn p1n_and_p32() {
        assert_eq!(enumerate_estimates(&p(1, 5)), vec![m(&[5])]);
        let p32: Vec<_> = enumerate_estimates(&p(3, 2))
            .into_iter()
            .map(MultisetEstimate::into_counts)
            .collect();
        assert_eq!(p32.len(), 5);
        assert!(!p32.contains(&vec![1, 0, 1]));
    }

    #[test]
    fn canonical_order_is_linear_extension() {
        let all = enumerate_estimates(&p(4, 4));
        for i in 0..all.len() {
            for j in 0..i {
                assert!(!all[i].dominates(&all[j]));
            }
        }
    }

    #[test]
    fn p34_poset_chain_and_covers() {
        let sp = build_scale_poset(&p(3, 4));
        assert_eq!(sp.top(), &m(&[4, 0, 0]));
        assert_eq!(sp.bottom(), &m(&[0, 0, 4]));
        let chain = [
            [4, 0, 0],
            [3, 1, 0],
            [2, 2, 0],
            [1, 3, 0],
            [0, 4, 0],
            [0, 3, 1],
            [0, 2, 2],
            [0, 1, 3],
            [0, 0, 4],
        ];
        for w in chain.windows(2) {
            let a = sp.index_of(&m(&w[0])).unwrap();
            let b = sp.index_of(&m(&w[1])).unwrap();
            assert!(sp.view.covers().contains(&(a, b)), "{:?} -> {:?}", w[0], w[1]);
        }
        let i = sp.index_of(&m(&[2, 1, 1])).unwrap();
        let up: Vec<_> = sp
            .view
            .upper_covers(i)
            .into_iter()
            .map(|j| sp.view.elements()[j].clone())
            .collect();
        let down: Vec<_> = sp
            .view
            .lower_covers(i)
            .into_iter()
            .map(|j| sp.view.elements()[j].clone())
            .collect();
        assert_eq!(up, vec![m(&[2, 2, 0])]);
        assert_eq!(down, vec![m(&[1, 2, 1])]);
    }

    #[test]
    fn p11_single_node() {
        let sp = build_scale_poset(&p(1, 1));
        assert_eq!(sp.view.len(), 1);
        assert!(sp.view.covers().is_empty());
    }

    #[test]
    fn distances() {
        for metric in [Metric::CumulativeL1, Metric::HassePath] {
            assert_eq!(multiset_distance(&m(&[4, 0, 0]), &m(&[3, 1, 0]), metric).unwrap(), 1);
            assert_eq!(multiset_distance(&m(&[2, 1, 1]), &m(&[2, 1, 1]), metric).unwrap(), 0);
            assert_eq!(multiset_distance(&m(&[4, 0, 0]), &m(&[0, 0, 4]), metric).unwrap(), 8);
        }
        assert_eq!(
            multiset_distance(&m(&[4, 0, 0]), &m(&[3, 0]), Metric::CumulativeL1),
            Err(MultisetError::ScaleMismatch)
        );
    }

    #[test]
    fn median_of_first_team() {
        let inputs = [m(&[3, 1, 0]), m(&[4, 0, 0]), m(&[3, 1, 0]), m(&[2, 2, 0])];
        for metric in [Metric::CumulativeL1, Metric::HassePath] {
            let r = median_like(&inputs, metric).unwrap();
            assert_eq!(r.argmin_set, vec![m(&[3, 1, 0])]);
            assert!(!r.tie_broken);
        }
    }

    #[test]
    fn median_single_and_empty() {
        let r = median_like(&[m(&[1, 2, 1])], Metric::CumulativeL1).unwrap();
        assert_eq!(r.argmin_set, vec![m(&[1, 2, 1])]);
        assert_eq!(r.total_distance, 0);
        assert_eq!(median_like(&[], Metric::CumulativeL1), Err(MultisetError::Empty));
    }

    #[test]
    fn median_ties_are_reported() {
        let inputs = [m(&[0, 4, 0]), m(&[4, 0, 0]), m(&[1, 2, 1]), m(&[0, 2, 2])];
        let r = median_like(&inputs, Metric::CumulativeL1).unwrap();
        assert!(r.tie_broken);
        assert_eq!(r.total_distance, 8);
        assert_eq!(r.representative, r.argmin_set[0]);
        assert!(r.argmin_set.contains(&m(&[0, 4, 0])));
    }

    #[test]
    fn counts_from_levels() {
        assert_eq!(counts_from_ordinals(&[1, 1, 1, 2], 3).unwrap(), m(&[3, 1, 0]));
        assert_eq!(counts_from_ordinals(&[2, 2, 2, 2], 3).unwrap(), m(&[0, 4, 0]));
        assert_eq!(
            counts_from_ordinals(&[1, 3, 3, 3], 3),
            Err(MultisetError::NonContiguous { counts: vec![1, 0, 3] })
        );
        assert!(matches!(
            counts_from_ordinals(&[4], 3),
            Err(MultisetError::LevelOutOfRange { .. })
        ));
    }
}
