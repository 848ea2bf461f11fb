//! Scale transformations: affine remapping of quantitative scales, threshold
//! quantization, ordinal remapping tables and the reductions of vector and
//! poset estimates to ordinal layers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poset::peel_layers;
use crate::scales::{Level, OrdinalScale, QuantScale, VectorScale};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("value {value} outside source scale [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },
    #[error("expected {expected} thresholds for {size} target levels, got {found}")]
    ThresholdCount { expected: usize, found: usize, size: Level },
    #[error("thresholds must run strictly from the best side to the worst side inside the source scale")]
    ThresholdOrder,
    #[error("ordinal map table has {found} entries, source scale has {expected} levels")]
    TableLength { expected: usize, found: usize },
    #[error("ordinal map entry {level} outside target 1..={size}")]
    TableRange { level: Level, size: Level },
    #[error("ordinal map is not {0}")]
    NotMonotone(&'static str),
    #[error("ordinal map does not reach target level {0}")]
    NotSurjective(Level),
    #[error("level {level} outside 1..={size}")]
    LevelOutOfRange { level: Level, size: Level },
    #[error("expected {expected} components, found {found}")]
    Arity { expected: usize, found: usize },
}

/// Affine map sending `src.worst -> dst.worst` and `src.best -> dst.best`.
pub fn linear_map(x: f64, src: &QuantScale, dst: &QuantScale) -> Result<f64, TransformError> {
    if !src.contains(x) {
        return Err(TransformError::OutOfRange {
            value: x,
            min: src.min(),
            max: src.max(),
        });
    }
    let t = (x - src.worst) / (src.best - src.worst);
    // exact at t = 0 and t = 1
    Ok((1.0 - t) * dst.worst + t * dst.best)
}

/// Cut points dividing a quantitative scale into the classes of an ordinal scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSpec {
    thresholds: Vec<f64>,
    target: OrdinalScale,
}

impl ThresholdSpec {
    /// `thresholds` are listed from the best side of `src` to the worst side.
    pub fn new(thresholds: Vec<f64>, target: OrdinalScale, src: &QuantScale) -> Result<Self, TransformError> {
        let expected = target.size as usize - 1;
        if thresholds.len() != expected {
            return Err(TransformError::ThresholdCount {
                expected,
                found: thresholds.len(),
                size: target.size,
            });
        }
        let inside = thresholds
            .iter()
            .all(|&t| t.is_finite() && t > src.min() && t < src.max());
        let ordered = thresholds.windows(2).all(|w| src.strictly_better(w[0], w[1]));
        if !inside || !ordered {
            return Err(TransformError::ThresholdOrder);
        }
        Ok(Self { thresholds, target })
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn target(&self) -> OrdinalScale {
        self.target
    }
}

/// Ordinal class of `x`, counted from the best end. A value exactly on a
/// threshold goes to the better class.
pub fn quantize(x: f64, ts: &ThresholdSpec, src: &QuantScale) -> Result<Level, TransformError> {
    if !src.contains(x) {
        return Err(TransformError::OutOfRange {
            value: x,
            min: src.min(),
            max: src.max(),
        });
    }
    let worse_than = ts.thresholds.iter().filter(|&&t| src.strictly_better(t, x)).count();
    Ok(1 + worse_than as Level)
}

/// Monotone (or, with `reverse`, anti-monotone) table between ordinal scales.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrdinalMap {
    source: OrdinalScale,
    target: OrdinalScale,
    table: Vec<Level>,
    reverse: bool,
}

impl OrdinalMap {
    pub fn new(
        source: OrdinalScale,
        target: OrdinalScale,
        table: Vec<Level>,
        reverse: bool,
    ) -> Result<Self, TransformError> {
        if table.len() != source.size as usize {
            return Err(TransformError::TableLength {
                expected: source.size as usize,
                found: table.len(),
            });
        }
        if let Some(&level) = table.iter().find(|&&l| !target.contains(l)) {
            return Err(TransformError::TableRange {
                level,
                size: target.size,
            });
        }
        let monotone = if reverse {
            table.windows(2).all(|w| w[0] >= w[1])
        } else {
            table.windows(2).all(|w| w[0] <= w[1])
        };
        if !monotone {
            return Err(TransformError::NotMonotone(if reverse {
                "non-increasing"
            } else {
                "non-decreasing"
            }));
        }
        if let Some(missing) = (1..=target.size).find(|l| !table.contains(l)) {
            return Err(TransformError::NotSurjective(missing));
        }
        Ok(Self {
            source,
            target,
            table,
            reverse,
        })
    }

    pub fn identity(scale: OrdinalScale) -> Self {
        Self {
            source: scale,
            target: scale,
            table: (1..=scale.size).collect(),
            reverse: false,
        }
    }

    pub fn source(&self) -> OrdinalScale {
        self.source
    }

    pub fn target(&self) -> OrdinalScale {
        self.target
    }

    pub fn table(&self) -> &[Level] {
        &self.table
    }

    pub fn reverse(&self) -> bool {
        self.reverse
    }
}

pub fn ordinal_remap(level: Level, map: &OrdinalMap) -> Result<Level, TransformError> {
    if !map.source.contains(level) {
        return Err(TransformError::LevelOutOfRange {
            level,
            size: map.source.size,
        });
    }
    Ok(map.table[level as usize - 1])
}

/// Orientation of a utility value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    LowerIsBetter,
    HigherIsBetter,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityReduction {
    pub values: Vec<f64>,
    pub orientation: Orientation,
}

/// Weighted sum per vector. Ordinal criteria contribute their level number.
pub fn utility_reduce(
    vectors: &[Vec<f64>],
    weights: &[f64],
    scale: &VectorScale,
) -> Result<UtilityReduction, TransformError> {
    if weights.len() != scale.arity() {
        return Err(TransformError::Arity {
            expected: scale.arity(),
            found: weights.len(),
        });
    }
    let mut values = Vec::with_capacity(vectors.len());
    for v in vectors {
        if v.len() != weights.len() {
            return Err(TransformError::Arity {
                expected: weights.len(),
                found: v.len(),
            });
        }
        values.push(v.iter().zip(weights).map(|(x, w)| x * w).sum());
    }
    let lower = scale.criteria().iter().filter(|c| c.lower_is_better()).count();
    let orientation = if lower == scale.arity() {
        Orientation::LowerIsBetter
    } else if lower == 0 {
        Orientation::HigherIsBetter
    } else {
        Orientation::Mixed
    };
    Ok(UtilityReduction { values, orientation })
}

/// Pareto-layer index of each vector under componentwise dominance.
pub fn vectors_to_ordinal(vectors: &[Vec<f64>], scale: &VectorScale) -> Result<Vec<usize>, TransformError> {
    if let Some(v) = vectors.iter().find(|v| v.len() != scale.arity()) {
        return Err(TransformError::Arity {
            expected: scale.arity(),
            found: v.len(),
        });
    }
    Ok(peel_layers(vectors, |a, b| scale.dominates(a, b)))
}

/// Pareto-layer index of each point of a poset-valued scale.
pub fn poset_to_ordinal<T, F>(points: &[T], dominates: F) -> Vec<usize>
where
    F: Fn(&T, &T) -> bool,
{
    peel_layers(points, dominates)
}
