//! Region algebra and secure-sampling rate bounds.
//!
//! A rate `r` of sampling a target pair from a setup pair requires the setup
//! region to lie inside `r` times the target region. Dividing an achieved
//! setup value (an upper bound on its support) by a certified target value
//! (a lower bound on its support) therefore bounds every achievable rate.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::probkit::{binary_entropy, TensionPoint};
use crate::tension_opt::{
    CertifiedBound, DirectionWeights, InnerPoint, Provenance, RegionApprox, SupportEntry,
    SLICE_POINT_TOLERANCE,
};

/// Slack allowed before an inner point counts as violating a bound.
pub const CONTAINMENT_TOLERANCE: f64 = 1e-6;
/// A target inner point this close to the origin makes the target trivial.
pub const ORIGIN_TOLERANCE: f64 = 1e-9;

/// Serializes non-finite values as the token `"inf"`.
pub mod inf_token {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Tok(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Tok(t) if t == "inf" => Ok(f64::INFINITY),
            Raw::Tok(t) => Err(serde::de::Error::custom(format!("unexpected token {t:?}"))),
        }
    }
}

fn check_factor(factor: f64) -> Result<()> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "scale factor {factor} must be positive and finite"
        )));
    }
    Ok(())
}

/// `factor · r`. Points no longer come from channels of the original joint,
/// so witnesses are dropped.
pub fn scale_region(r: &RegionApprox, factor: f64) -> Result<RegionApprox> {
    check_factor(factor)?;
    Ok(RegionApprox {
        inner_points: r
            .inner_points
            .iter()
            .map(|p| InnerPoint {
                point: p.point.scaled(factor),
                witness: None,
            })
            .collect(),
        support_upper: r
            .support_upper
            .iter()
            .map(|e| SupportEntry {
                value: e.value * factor,
                ..e.clone()
            })
            .collect(),
        certified: r.certified.iter().map(|c| c.scaled(factor)).collect(),
        witnesses_dropped: true,
    })
}

fn nonnegativity(lambda: DirectionWeights, slice: bool) -> CertifiedBound {
    CertifiedBound {
        lambda,
        value: 0.0,
        slice,
        provenance: Provenance::proved("coordinates of the region are nonnegative"),
    }
}

/// Region of the independent pair. Supports add, so matching certificates
/// add; a direction certified on one side only is paired with the trivial
/// bound `λ·t ≥ 0` on the other.
pub fn minkowski_sum(a: &RegionApprox, b: &RegionApprox) -> RegionApprox {
    let mut out = RegionApprox::new();
    out.witnesses_dropped = true;
    for p in &a.inner_points {
        for q in &b.inner_points {
            out.push_point(p.point + q.point, None);
        }
    }

    let mut keys: Vec<(DirectionWeights, bool)> = Vec::new();
    for c in a.certified.iter().chain(&b.certified) {
        if !keys
            .iter()
            .any(|(l, s)| *s == c.slice && l.same_direction(&c.lambda))
        {
            keys.push((c.lambda, c.slice));
        }
    }
    for (lam, slice) in keys {
        let ca = a
            .best_certified(&lam, slice)
            .cloned()
            .unwrap_or_else(|| nonnegativity(lam, slice));
        let cb = b
            .best_certified(&lam, slice)
            .cloned()
            .unwrap_or_else(|| nonnegativity(lam, slice));
        out.certified.push(ca.plus(&cb).expect("same direction"));
    }

    for e in &a.support_upper {
        let other = if e.slice {
            b.slice_support_upper(&e.lambda)
        } else {
            b.support_upper(&e.lambda).ok()
        };
        if let Some(v) = other {
            out.support_upper.push(SupportEntry {
                value: e.value + v,
                flagged: e.flagged,
                ..e.clone()
            });
        }
    }
    out
}

/// The direction a rate bound was obtained from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BindingDirection {
    pub lambda: DirectionWeights,
    /// The bound compares `z = 0` slices.
    pub slice: bool,
}

/// Setup side of the binding ratio.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetupEvidence {
    /// `λ·t`, or `λ1 r1 + λ2 r2` for slice evidence.
    pub value: f64,
    /// The inner point achieving `value`, when it came from one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<TensionPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateBoundReport {
    #[serde(with = "inf_token")]
    pub bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binding_direction: Option<BindingDirection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub setup_evidence: Option<SetupEvidence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_evidence: Option<CertifiedBound>,
    pub caveats: Vec<String>,
}

impl RateBoundReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn setup_value(setup: &RegionApprox, c: &CertifiedBound) -> Option<SetupEvidence> {
    let inner = if c.slice {
        setup.best_slice_inner(&c.lambda)
    } else {
        setup.best_inner(&c.lambda)
    };
    let stored = setup
        .support_upper
        .iter()
        .filter(|e| e.slice == c.slice && e.lambda.same_direction(&c.lambda))
        .map(|e| e.value)
        .min_by(f64::total_cmp);
    match (inner, stored) {
        (Some((v, _)), Some(s)) if s < v => Some(SetupEvidence {
            value: s,
            point: None,
        }),
        (Some((v, p)), _) => Some(SetupEvidence {
            value: v,
            point: Some(p),
        }),
        (None, Some(s)) => Some(SetupEvidence {
            value: s,
            point: None,
        }),
        (None, None) => None,
    }
}

/// Sound upper bound on the rate at which `target` can be securely sampled
/// from `setup`.
///
/// Refuses when the target carries no positive certified bound, since no
/// ratio could then be justified.
pub fn rate_upper_bound(setup: &RegionApprox, target: &RegionApprox) -> Result<RateBoundReport> {
    if target.contains_origin(ORIGIN_TOLERANCE) {
        return Ok(RateBoundReport {
            bound: f64::INFINITY,
            binding_direction: None,
            setup_evidence: None,
            target_evidence: None,
            caveats: vec![
                "target region contains the origin: a perfectly resolvable target is sampled at any rate".into(),
            ],
        });
    }
    let certs: Vec<&CertifiedBound> = target.certified.iter().filter(|c| c.value > 0.0).collect();
    if certs.is_empty() {
        return Err(Error::Refused(
            "target region has no positive certified bound; a sound rate bound cannot be established".into(),
        ));
    }
    let mut best: Option<(f64, &CertifiedBound, SetupEvidence)> = None;
    let mut caveats = Vec::new();
    for c in certs {
        let Some(ev) = setup_value(setup, c) else {
            caveats.push(format!(
                "setup has no evidence for certified direction {:?}{}",
                c.lambda.weights(),
                if c.slice { " (slice)" } else { "" }
            ));
            continue;
        };
        let ratio = ev.value / c.value;
        if best.as_ref().is_none_or(|(r, _, _)| ratio < *r) {
            best = Some((ratio, c, ev));
        }
    }
    let Some((bound, c, ev)) = best else {
        return Err(Error::Refused(
            "setup region has no evidence in any certified target direction".into(),
        ));
    };
    if c.slice {
        if let Some(p) = ev.point.filter(|p| p.r3 > 0.0) {
            caveats.push(format!(
                "setup slice point has residual I(X;Y|Q) = {:.3e} (accepted up to {SLICE_POINT_TOLERANCE:e})",
                p.r3
            ));
        }
    }
    if setup.support_upper.iter().any(|e| e.flagged) {
        caveats.push("some setup support estimates stopped at the iteration cap".into());
    }
    Ok(RateBoundReport {
        bound,
        binding_direction: Some(BindingDirection {
            lambda: c.lambda,
            slice: c.slice,
        }),
        setup_evidence: Some(ev),
        target_evidence: Some(c.clone()),
        caveats,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Refuted,
    Consistent,
}

/// An inner point of `a` outside a certified bound of `factor · b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub point: TensionPoint,
    pub bound: CertifiedBound,
    /// `bound.value - λ·point`.
    pub excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainmentVerdict {
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violation: Option<Violation>,
    pub note: String,
}

/// Tests `a ⊆ factor · b` against the certified evidence of `b`. Only a
/// refutation is conclusive.
pub fn containment_check(
    a: &RegionApprox,
    b: &RegionApprox,
    factor: f64,
) -> Result<ContainmentVerdict> {
    let scaled = scale_region(b, factor)?;
    let mut worst: Option<Violation> = None;
    for p in &a.inner_points {
        for c in &scaled.certified {
            if c.admits(p.point, CONTAINMENT_TOLERANCE) {
                continue;
            }
            let excess = c.value - c.lambda.dot(p.point);
            if worst.as_ref().is_none_or(|w| excess > w.excess) {
                worst = Some(Violation {
                    point: p.point,
                    bound: c.clone(),
                    excess,
                });
            }
        }
    }
    Ok(match worst {
        Some(v) => ContainmentVerdict {
            verdict: Verdict::Refuted,
            note: format!("inner point violates a certified bound by {:.6}", v.excess),
            violation: Some(v),
        },
        None => ContainmentVerdict {
            verdict: Verdict::Consistent,
            violation: None,
            note: "no certified bound of the scaled region is violated; this does not prove containment".into(),
        },
    })
}

/// `δ(ε) = 2 H2(ε) + ε log2 max(|X|, |Y|)`.
pub fn statistical_shift(epsilon: f64, x_size: usize, y_size: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::OutOfRange(format!(
            "epsilon {epsilon} outside [0, 1]"
        )));
    }
    let m = x_size.max(y_size).max(1) as f64;
    Ok(2.0 * binary_entropy(epsilon)? + epsilon * m.log2())
}

/// `r - δ` clamped to the nonnegative octant, then upward closed.
///
/// Halfspace bounds lose `δ` times their weight sum; stored support
/// estimates and slice bounds do not survive the shift and are dropped.
pub fn shifted_region(r: &RegionApprox, delta: f64) -> Result<RegionApprox> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "shift {delta} must be nonnegative and finite"
        )));
    }
    if delta == 0.0 {
        return Ok(r.clone());
    }
    let shift = |p: TensionPoint| {
        TensionPoint::new(
            (p.r1 - delta).max(0.0),
            (p.r2 - delta).max(0.0),
            (p.r3 - delta).max(0.0),
        )
    };
    Ok(RegionApprox {
        inner_points: r
            .inner_points
            .iter()
            .map(|p| InnerPoint {
                point: shift(p.point),
                witness: None,
            })
            .collect(),
        support_upper: Vec::new(),
        certified: r
            .certified
            .iter()
            .filter(|c| !c.slice)
            .filter_map(|c| {
                let value = c.value - delta * c.lambda.norm1();
                (value > 0.0).then(|| CertifiedBound {
                    value,
                    provenance: Provenance {
                        kind: c.provenance.kind,
                        citation: format!("shifted by {delta} ({})", c.provenance.citation),
                    },
                    ..c.clone()
                })
            })
            .collect(),
        witnesses_dropped: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slice_cert(value: f64) -> CertifiedBound {
        CertifiedBound::slice(1.0, 1.0, value, Provenance::proved("test")).unwrap()
    }

    fn region(points: &[[f64; 3]], certs: Vec<CertifiedBound>) -> RegionApprox {
        let mut r = RegionApprox::new();
        for p in points {
            r.push_point(TensionPoint::clamped(*p), None);
        }
        r.certified = certs;
        r
    }

    #[test]
    fn scaling_examples() {
        let r = region(&[[1.0, 1.0, 0.0]], vec![slice_cert(0.5)]);
        assert_eq!(scale_region(&r, 1.0).unwrap().inner_points, r.inner_points);
        let s = scale_region(&r, 2.0).unwrap();
        assert_eq!(s.inner_points[0].point, TensionPoint::new(2.0, 2.0, 0.0));
        assert!((s.certified[0].value - 1.0).abs() < 1e-12);
        assert!(scale_region(&r, 0.0).is_err());
    }

    #[test]
    fn sum_with_trivial_region_keeps_evidence() {
        let r = region(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], vec![slice_cert(0.5)]);
        let trivial = region(&[[0.0, 0.0, 0.0]], vec![]);
        let s = minkowski_sum(&r, &trivial);
        let pts: Vec<_> = s.inner_points.iter().map(|p| p.point).collect();
        assert_eq!(
            pts,
            vec![
                TensionPoint::new(1.0, 0.0, 0.0),
                TensionPoint::new(0.0, 1.0, 0.0)
            ]
        );
        assert!((s.certified[0].value - 0.5).abs() < 1e-12);
        let double = minkowski_sum(&r, &r);
        assert!((double.certified[0].value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rate_bound_examples() {
        let setup = region(&[[1.0, 1.0, 0.0]], vec![]);
        let target = region(&[[2.0, 0.0, 0.0]], vec![slice_cert(1.0)]);
        let rep = rate_upper_bound(&setup, &target).unwrap();
        assert!((rep.bound - 1.0).abs() < 1e-12);
        assert!(rep.binding_direction.unwrap().slice);

        let resolvable = region(&[[0.0, 0.0, 0.0]], vec![]);
        let rep = rate_upper_bound(&setup, &resolvable).unwrap();
        assert!(rep.bound.is_infinite());
        assert!(rep.to_json_string().contains("\"inf\""));

        let bare = region(&[[1.0, 1.0, 0.0]], vec![]);
        assert!(matches!(
            rate_upper_bound(&setup, &bare),
            Err(Error::Refused(_))
        ));
    }

    #[test]
    fn report_round_trips() {
        let setup = region(&[[1.0, 1.0, 0.0]], vec![]);
        let target = region(&[[2.0, 0.0, 0.0]], vec![slice_cert(1.0)]);
        let rep = rate_upper_bound(&setup, &target).unwrap();
        let back: RateBoundReport = serde_json::from_str(&rep.to_json_string()).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn containment_examples() {
        let a = region(&[[1.0, 1.0, 0.0]], vec![]);
        let b = region(&[[2.0, 0.0, 0.0]], vec![slice_cert(1.0)]);
        assert_eq!(
            containment_check(&b, &b, 1.0).unwrap().verdict,
            Verdict::Consistent
        );
        let v = containment_check(&a, &b, 1.2).unwrap();
        assert_eq!(v.verdict, Verdict::Refuted);
        assert!((v.violation.unwrap().excess - 0.2).abs() < 1e-12);
    }

    #[test]
    fn shift_examples() {
        assert_eq!(statistical_shift(0.0, 2, 2).unwrap(), 0.0);
        assert!((statistical_shift(0.5, 2, 2).unwrap() - 2.5).abs() < 1e-12);
        assert!((statistical_shift(0.01, 4, 4).unwrap() - 0.181586).abs() < 1e-6);
        assert!(statistical_shift(1.5, 2, 2).is_err());

        let r = region(&[[1.0, 1.0, 0.0]], vec![]);
        assert_eq!(shifted_region(&r, 0.0).unwrap(), r);
        let s = shifted_region(&r, 0.1).unwrap();
        assert!(
            s.inner_points[0]
                .point
                .max_abs_diff(TensionPoint::new(0.9, 0.9, 0.0))
                < 1e-12
        );
    }
}
