use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probkit::{Channel, TensionPoint};

use super::DirectionWeights;

/// Inner points with `r3` at most this count as lying on the `z = 0` slice.
pub const SLICE_POINT_TOLERANCE: f64 = 1e-4;

/// An achieved tension point, with the channel that achieves it when the
/// point is still a tension of the original joint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerPoint {
    pub point: TensionPoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Channel>,
}

/// Best value found for a direction. An upper bound on the support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportEntry {
    pub lambda: DirectionWeights,
    pub value: f64,
    /// Restricted to the `z = 0` slice (`lambda` has no third component).
    #[serde(default)]
    pub slice: bool,
    /// The optimizer hit its iteration cap on this direction.
    #[serde(default)]
    pub flagged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceKind {
    /// A proved property of the distribution.
    Proved,
    /// Computed exactly by the combinatorial routines.
    Exact,
    /// Brute-force grid enumeration; sound up to grid resolution.
    Oracle,
    /// Numerical estimate supplied by the caller.
    Numerical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: EvidenceKind,
    pub citation: String,
}

impl Provenance {
    pub fn proved(citation: impl Into<String>) -> Self {
        Self {
            kind: EvidenceKind::Proved,
            citation: citation.into(),
        }
    }

    pub fn oracle(steps: usize, q_cardinality: usize) -> Self {
        Self {
            kind: EvidenceKind::Oracle,
            citation: format!("grid enumeration at resolution 1/{steps}, |Q| = {q_cardinality}"),
        }
    }

    pub fn numerical(note: impl Into<String>) -> Self {
        Self {
            kind: EvidenceKind::Numerical,
            citation: note.into(),
        }
    }

    fn combine(&self, other: &Provenance, op: &str) -> Provenance {
        Provenance {
            kind: self.kind.max(other.kind),
            citation: if self.citation == other.citation {
                format!("{op}({})", self.citation)
            } else {
                format!("{op}({}; {})", self.citation, other.citation)
            },
        }
    }
}

/// A lower bound `λ·t ≥ value` valid on the whole region, or on its
/// `z = 0` slice when `slice` is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedBound {
    pub lambda: DirectionWeights,
    pub value: f64,
    #[serde(default)]
    pub slice: bool,
    pub provenance: Provenance,
}

impl CertifiedBound {
    /// `lambda` is normalized; `value` must refer to the normalized direction.
    pub fn halfspace(lambda: DirectionWeights, value: f64, provenance: Provenance) -> Self {
        Self {
            lambda: lambda.normalized(),
            value,
            slice: false,
            provenance,
        }
    }

    /// `a·r1 + b·r2 ≥ value` whenever `(r1, r2, 0)` is in the region, with
    /// `(a, b)` normalized to unit sum.
    pub fn slice(a: f64, b: f64, value: f64, provenance: Provenance) -> Result<Self> {
        Ok(Self {
            lambda: DirectionWeights::new(a, b, 0.0)?.normalized(),
            value,
            slice: true,
            provenance,
        })
    }

    /// Whether `p` satisfies this bound within `tol`. Off-slice points
    /// trivially satisfy slice bounds.
    pub fn admits(&self, p: TensionPoint, tol: f64) -> bool {
        if self.slice && p.r3 > SLICE_POINT_TOLERANCE {
            return true;
        }
        self.lambda.dot(p) >= self.value - tol
    }
}

/// Inner and outer evidence about one region of tension.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RegionApprox {
    pub inner_points: Vec<InnerPoint>,
    pub support_upper: Vec<SupportEntry>,
    pub certified: Vec<CertifiedBound>,
    /// Set once scaling or summation has detached points from channels.
    #[serde(default)]
    pub witnesses_dropped: bool,
}

impl RegionApprox {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_point(&mut self, point: TensionPoint, witness: Option<Channel>) {
        self.inner_points.push(InnerPoint { point, witness });
    }

    pub fn is_empty(&self) -> bool {
        self.inner_points.is_empty() && self.support_upper.is_empty()
    }

    /// Some inner point is the origin (within `tol`).
    pub fn contains_origin(&self, tol: f64) -> bool {
        self.inner_points
            .iter()
            .any(|p| p.point.dominated_by(TensionPoint::ORIGIN, tol))
    }

    /// `point` dominates some inner point (within `tol`), which puts it in
    /// the region because the region is upward closed.
    pub fn certifies_membership(&self, point: TensionPoint, tol: f64) -> bool {
        self.inner_points
            .iter()
            .any(|p| p.point.dominated_by(point, tol))
    }

    /// Inner point minimizing `λ·t`, with its value.
    pub fn best_inner(&self, lam: &DirectionWeights) -> Option<(f64, TensionPoint)> {
        let lam = lam.normalized();
        self.inner_points
            .iter()
            .map(|p| (lam.dot(p.point), p.point))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }

    /// Slice point minimizing `a·r1 + b·r2` among inner points with
    /// `r3 ≤ SLICE_POINT_TOLERANCE`.
    pub fn best_slice_inner(&self, lam: &DirectionWeights) -> Option<(f64, TensionPoint)> {
        let lam = lam.normalized();
        self.inner_points
            .iter()
            .filter(|p| p.point.r3 <= SLICE_POINT_TOLERANCE)
            .map(|p| (lam.l1() * p.point.r1 + lam.l2() * p.point.r2, p.point))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }

    fn stored_upper(&self, lam: &DirectionWeights, slice: bool) -> Option<f64> {
        let key = lam.normalized();
        self.support_upper
            .iter()
            .filter(|e| e.slice == slice && e.lambda.same_direction(&key))
            .map(|e| e.value)
            .min_by(f64::total_cmp)
    }

    /// Upper bound on `min_{t in region} λ·t` for normalized `λ`.
    pub fn support_upper(&self, lam: &DirectionWeights) -> Result<f64> {
        let inner = self.best_inner(lam).map(|(v, _)| v);
        let stored = self.stored_upper(lam, false);
        match (inner, stored) {
            (None, None) => Err(Error::EmptyRegion),
            (a, b) => Ok(a.unwrap_or(f64::INFINITY).min(b.unwrap_or(f64::INFINITY))),
        }
    }

    /// Upper bound on the slice support `min a·r1 + b·r2` over `(r1, r2, 0)`
    /// in the region; `None` when no slice evidence exists.
    pub fn slice_support_upper(&self, lam: &DirectionWeights) -> Option<f64> {
        let inner = self.best_slice_inner(lam).map(|(v, _)| v);
        let stored = self.stored_upper(lam, true);
        match (inner, stored) {
            (None, None) => None,
            (a, b) => Some(a.unwrap_or(f64::INFINITY).min(b.unwrap_or(f64::INFINITY))),
        }
    }

    /// Strongest certified bound for the direction of `lam`.
    pub fn best_certified(&self, lam: &DirectionWeights, slice: bool) -> Option<&CertifiedBound> {
        let key = lam.normalized();
        self.certified
            .iter()
            .filter(|c| c.slice == slice && c.lambda.same_direction(&key))
            .max_by(|a, b| a.value.total_cmp(&b.value))
    }

    /// Certified bounds that exceed the matching support estimate by more
    /// than `tol`; empty for a consistent region.
    pub fn inconsistencies(&self, tol: f64) -> Vec<&CertifiedBound> {
        self.certified
            .iter()
            .filter(|c| {
                let upper = if c.slice {
                    self.slice_support_upper(&c.lambda)
                } else {
                    self.support_upper(&c.lambda).ok()
                };
                upper.is_some_and(|u| c.value > u + tol)
            })
            .collect()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("region serializes")
    }
}

/// Helpers shared with the region algebra.
impl CertifiedBound {
    pub(crate) fn scaled(&self, f: f64) -> Self {
        Self {
            value: self.value * f,
            provenance: Provenance {
                kind: self.provenance.kind,
                citation: format!("{f} x ({})", self.provenance.citation),
            },
            ..self.clone()
        }
    }

    pub(crate) fn plus(&self, other: &CertifiedBound) -> Option<Self> {
        (self.slice == other.slice && self.lambda.same_direction(&other.lambda)).then(|| Self {
            lambda: self.lambda,
            value: self.value + other.value,
            slice: self.slice,
            provenance: self.provenance.combine(&other.provenance, "sum"),
        })
    }
}
