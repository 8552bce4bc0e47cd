//! Built-in joint distributions with the region facts known for them.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::probkit::{tension_of, Alphabet, Channel, JointPMF, TensionPoint};
use crate::structure::{
    gk_common_information, intercept_witnesses, intercepts_exact, is_perfectly_resolvable,
};
use crate::tension_opt::{
    CertifiedBound, DirectionWeights, EvidenceKind, Provenance, RegionApprox,
};

/// Largest string length accepted by [`string_ot_pair`]; each side has
/// `2^(1+3L)` symbols.
pub const STRING_OT_MAX_L: usize = 3;
/// Tolerance for re-verifying shipped facts.
pub const VERIFY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Fact {
    Intercepts {
        tx: f64,
        ty: f64,
        tz: f64,
    },
    InnerPoint {
        point: TensionPoint,
        witness: Channel,
    },
    /// `a·r1 + b·r2 ≥ value` on the `z = 0` slice, `a + b = 1`.
    Slice {
        a: f64,
        b: f64,
        value: f64,
    },
    /// `λ·t ≥ value` on the whole region, `λ` of unit sum.
    Halfspace {
        lambda: DirectionWeights,
        value: f64,
    },
    Resolvable,
    CommonInformation {
        gk: f64,
        wyner: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedFact {
    pub description: String,
    pub fact: Fact,
    pub kind: EvidenceKind,
    pub citation: String,
}

impl CertifiedFact {
    fn proved(description: impl Into<String>, fact: Fact, citation: impl Into<String>) -> Self {
        Self {
            description: description.into(),
            fact,
            kind: EvidenceKind::Proved,
            citation: citation.into(),
        }
    }

    fn exact(description: impl Into<String>, fact: Fact) -> Self {
        Self {
            description: description.into(),
            fact,
            kind: EvidenceKind::Exact,
            citation: "computed exactly at construction".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub parameters: BTreeMap<String, Value>,
    pub joint: JointPMF,
    pub certified_facts: Vec<CertifiedFact>,
}

impl CatalogEntry {
    fn new(
        name: &str,
        parameters: BTreeMap<String, Value>,
        joint: JointPMF,
        facts: Vec<CertifiedFact>,
    ) -> Result<Self> {
        let entry = Self {
            name: name.into(),
            parameters,
            joint,
            certified_facts: facts,
        };
        entry.verify()?;
        Ok(entry)
    }

    /// Recomputes every fact that has an exact counterpart.
    pub fn verify(&self) -> Result<()> {
        let j = &self.joint;
        let fail = |what: &str, detail: String| {
            Err(Error::Verification(format!(
                "{}: {what}: {detail}",
                self.name
            )))
        };
        for f in &self.certified_facts {
            match &f.fact {
                Fact::Intercepts { tx, ty, tz } => {
                    let got = intercepts_exact(j);
                    let err = (got.tx - tx)
                        .abs()
                        .max((got.ty - ty).abs())
                        .max((got.tz - tz).abs());
                    if err > VERIFY_TOLERANCE {
                        return fail(&f.description, format!("exact intercepts {got:?}"));
                    }
                }
                Fact::InnerPoint { point, witness } => {
                    let got = tension_of(j, witness)?;
                    if got.max_abs_diff(*point) > VERIFY_TOLERANCE {
                        return fail(&f.description, format!("witness achieves {got:?}"));
                    }
                }
                Fact::Resolvable => {
                    if !is_perfectly_resolvable(j).0 {
                        return fail(&f.description, "joint is not perfectly resolvable".into());
                    }
                }
                Fact::CommonInformation { gk, .. } => {
                    let got = gk_common_information(j);
                    if (got - gk).abs() > VERIFY_TOLERANCE {
                        return fail(&f.description, format!("exact value {got}"));
                    }
                }
                Fact::Slice { .. } | Fact::Halfspace { .. } => {}
            }
        }
        Ok(())
    }

    /// Evidence known without optimization: shipped inner points and
    /// bounds, plus the exact axis-intercept points.
    pub fn seed_region(&self) -> Result<RegionApprox> {
        let mut r = RegionApprox::new();
        for f in &self.certified_facts {
            let prov = Provenance {
                kind: f.kind,
                citation: f.citation.clone(),
            };
            match &f.fact {
                Fact::InnerPoint { point, witness } => r.push_point(*point, Some(witness.clone())),
                Fact::Slice { a, b, value } => r
                    .certified
                    .push(CertifiedBound::slice(*a, *b, *value, prov)?),
                Fact::Halfspace { lambda, value } => r
                    .certified
                    .push(CertifiedBound::halfspace(*lambda, *value, prov)),
                _ => {}
            }
        }
        for w in intercept_witnesses(&self.joint) {
            r.push_point(tension_of(&self.joint, &w)?, Some(w));
        }
        Ok(r)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("entry serializes")
    }
}

fn params<const N: usize>(pairs: [(&str, Value); N]) -> BTreeMap<String, Value> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn bits(v: usize, width: usize) -> String {
    (0..width)
        .rev()
        .map(|i| if v >> i & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Certified slice bounds of `scale` copies of bit-OT: the slice is
/// `{r1 + r2 ≥ scale}`, so `a·r1 + b·r2 ≥ scale·min(a, b)`.
fn ot_slice_facts(scale: f64, citation: &str) -> Vec<CertifiedFact> {
    [0.25, 0.5, 0.75]
        .into_iter()
        .map(|a: f64| {
            let b = 1.0 - a;
            CertifiedFact::proved(
                format!("slice bound at weights ({a}, {b})"),
                Fact::Slice {
                    a,
                    b,
                    value: scale * a.min(b),
                },
                citation,
            )
        })
        .collect()
}

/// `A = (S1, S2)` two uniform bits, `B = (C, S_C)` with `C ∈ {1, 2}`
/// uniform: the 8-cycle.
pub fn bit_ot() -> Result<CatalogEntry> {
    let a = Alphabet::new((0..4).map(|v| format!("(s1={},s2={})", v >> 1, v & 1)))?;
    let b = Alphabet::new((0..4).map(|v| format!("(c={},s={})", (v >> 1) + 1, v & 1)))?;
    let mut mass = vec![0.0; 16];
    for s1 in 0..2 {
        for s2 in 0..2 {
            let x = s1 * 2 + s2;
            mass[x * 4 + s1] = 0.125;
            mass[x * 4 + 2 + s2] = 0.125;
        }
    }
    let j = JointPMF::new(a, b, mass)?;
    let reveal_b = Channel::reveal_y(4, j.y_alphabet());
    let reveal_a = Channel::reveal_x(j.x_alphabet(), 4);
    let mut facts = vec![
        CertifiedFact::proved(
            "axis intercepts",
            Fact::Intercepts {
                tx: 1.0,
                ty: 1.0,
                tz: 1.0,
            },
            "bit-OT axis intercepts",
        ),
        CertifiedFact::proved(
            "slice endpoint (1,0,0): Q = B",
            Fact::InnerPoint {
                point: TensionPoint::new(1.0, 0.0, 0.0),
                witness: reveal_b,
            },
            "bit-OT slice segment endpoint",
        ),
        CertifiedFact::proved(
            "slice endpoint (0,1,0): Q = A",
            Fact::InnerPoint {
                point: TensionPoint::new(0.0, 1.0, 0.0),
                witness: reveal_a,
            },
            "bit-OT slice segment endpoint",
        ),
    ];
    facts.extend(ot_slice_facts(
        1.0,
        "bit-OT minimum slice sum-rate equals 1",
    ));
    CatalogEntry::new("bit-ot", BTreeMap::new(), j, facts)
}

/// Index layout of one side of the string-OT pair: choice bit, own two
/// strings, received string.
fn ot_side(c: usize, s1: usize, s2: usize, got: usize, l: usize) -> usize {
    ((c << l | s1) << l | s2) << l | got
}

fn string_ot_joint(l: usize) -> Result<JointPMF> {
    let n = 1usize << (1 + 3 * l);
    let strings = 1usize << l;
    let label = |c: usize, s1: usize, s2: usize, got: usize, me: char, other: char| {
        format!(
            "(c{me}={},s{me}1={},s{me}2={},s{other}_c{me}={})",
            c + 1,
            bits(s1, l),
            bits(s2, l),
            bits(got, l)
        )
    };
    let mut xs = vec![String::new(); n];
    let mut ys = vec![String::new(); n];
    for c in 0..2 {
        for s1 in 0..strings {
            for s2 in 0..strings {
                for got in 0..strings {
                    let i = ot_side(c, s1, s2, got, l);
                    xs[i] = label(c, s1, s2, got, 'A', 'B');
                    ys[i] = label(c, s1, s2, got, 'B', 'A');
                }
            }
        }
    }
    let w = 1.0 / (4 * strings.pow(4)) as f64;
    let mut mass = vec![0.0; n * n];
    for ca in 0..2 {
        for cb in 0..2 {
            for sa1 in 0..strings {
                for sa2 in 0..strings {
                    let sa_cb = if cb == 0 { sa1 } else { sa2 };
                    for sb1 in 0..strings {
                        for sb2 in 0..strings {
                            let sb_ca = if ca == 0 { sb1 } else { sb2 };
                            let x = ot_side(ca, sa1, sa2, sb_ca, l);
                            let y = ot_side(cb, sb1, sb2, sa_cb, l);
                            mass[x * n + y] += w;
                        }
                    }
                }
            }
        }
    }
    JointPMF::new(Alphabet::new(xs)?, Alphabet::new(ys)?, mass)
}

/// `Q = (C_A, C_B, S_{A,C_B}, S_{B,C_A})`, read off `(X, Y)`.
fn string_ot_witness(j: &JointPMF, l: usize) -> Result<Channel> {
    let strings = 1usize << l;
    let n = j.nx();
    let mask = strings - 1;
    let q_labels = (0..4 * strings * strings).map(|q| {
        let (cs, sa, sb) = (
            q / (strings * strings),
            (q / strings) % strings,
            q % strings,
        );
        format!(
            "(cA={},cB={},sA_cB={},sB_cA={})",
            cs / 2 + 1,
            cs % 2 + 1,
            bits(sa, l),
            bits(sb, l)
        )
    });
    let mut map = vec![0; n * n];
    for x in 0..n {
        let (ca, sb_ca) = (x >> (3 * l), x & mask);
        for y in 0..n {
            if j.p(x, y) > 0.0 {
                let (cb, sa_cb) = (y >> (3 * l), y & mask);
                map[x * n + y] = ((ca * 2 + cb) * strings + sa_cb) * strings + sb_ca;
            }
        }
    }
    Channel::deterministic(Alphabet::new(q_labels)?, map)
}

fn string_ot_facts(j: &JointPMF, l: usize) -> Result<Vec<CertifiedFact>> {
    let lf = l as f64;
    Ok(vec![
        CertifiedFact::proved(
            "axis intercepts",
            Fact::Intercepts {
                tx: 1.0 + lf,
                ty: 1.0 + lf,
                tz: 2.0 * lf,
            },
            "string-OT pair axis intercepts",
        ),
        CertifiedFact::proved(
            "point (1,1,0): Q = (C_A, C_B, S_{A,C_B}, S_{B,C_A})",
            Fact::InnerPoint {
                point: TensionPoint::new(1.0, 1.0, 0.0),
                witness: string_ot_witness(j, l)?,
            },
            "string-OT pair point independent of the string length",
        ),
    ])
}

/// Two `L`-bit string-OTs in opposite directions:
/// `X = (C_A, S_{A,1}, S_{A,2}, S_{B,C_A})`, `Y = (C_B, S_{B,1}, S_{B,2}, S_{A,C_B})`.
pub fn string_ot_pair(l: usize) -> Result<CatalogEntry> {
    if !(1..=STRING_OT_MAX_L).contains(&l) {
        return Err(Error::OutOfRange(format!(
            "string length L = {l} outside 1..={STRING_OT_MAX_L}"
        )));
    }
    let j = string_ot_joint(l)?;
    let facts = string_ot_facts(&j, l)?;
    CatalogEntry::new("string-ot", params([("L", Value::from(l))]), j, facts)
}

/// Two bit-OTs in opposite directions, the `L = 1` string-OT pair, whose
/// slice is `{r1 + r2 ≥ 2}`.
pub fn two_bit_ot() -> Result<CatalogEntry> {
    let j = string_ot_joint(1)?;
    let mut facts = string_ot_facts(&j, 1)?;
    facts.extend(ot_slice_facts(
        2.0,
        "slice sum-rates of independent bit-OTs add to 2",
    ));
    CatalogEntry::new("two-bit-ot", BTreeMap::new(), j, facts)
}

/// `p(0,0) = p(1,1) = p`, `p(0,1) = 0`, `p(1,0) = 1 - 2p`.
pub fn z_source(p: f64) -> Result<CatalogEntry> {
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::OutOfRange(format!(
            "z-source p = {p} outside (0, 1/2)"
        )));
    }
    let j = JointPMF::from_matrix(2, 2, vec![p, 0.0, 1.0 - 2.0 * p, p])?;
    let facts = vec![exact_intercepts(&j)];
    CatalogEntry::new("z-source", params([("p", Value::from(p))]), j, facts)
}

fn exact_intercepts(j: &JointPMF) -> CertifiedFact {
    let i = intercepts_exact(j);
    CertifiedFact::exact(
        "axis intercepts",
        Fact::Intercepts {
            tx: i.tx,
            ty: i.ty,
            tz: i.tz,
        },
    )
}

/// Two 2×2 blocks of mass `(1-δ)/8` per cell joined by cross-block cells
/// of mass `δ/8`.
pub fn connected_example(delta: f64) -> Result<CatalogEntry> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::OutOfRange(format!("delta = {delta} outside [0, 1]")));
    }
    let mut mass = vec![0.0; 16];
    for x in 0..4 {
        for y in 0..4 {
            mass[x * 4 + y] = if x / 2 == y / 2 {
                (1.0 - delta) / 8.0
            } else {
                delta / 8.0
            };
        }
    }
    let j = JointPMF::from_matrix(4, 4, mass)?;
    let mut facts = vec![exact_intercepts(&j)];
    if delta == 0.0 {
        facts.push(CertifiedFact::proved(
            "perfectly resolvable",
            Fact::Resolvable,
            "block-diagonal joint",
        ));
    }
    CatalogEntry::new(
        "connected",
        params([("delta", Value::from(delta))]),
        j,
        facts,
    )
}

/// `X = (X', Q)`, `Y = (Y', Q)` with `X', Y', Q` independent and uniform.
pub fn uniform_common(k: usize, x_extra: usize, y_extra: usize) -> Result<CatalogEntry> {
    if k == 0 || x_extra == 0 || y_extra == 0 {
        return Err(Error::OutOfRange(
            "uniform-common sizes must be positive".into(),
        ));
    }
    let q = Alphabet::new((0..k).map(|i| format!("q={i}")))?;
    let xa = Alphabet::new((0..x_extra).map(|i| format!("x'={i}")))?.product(&q);
    let ya = Alphabet::new((0..y_extra).map(|i| format!("y'={i}")))?.product(&q);
    let (nx, ny) = (x_extra * k, y_extra * k);
    let w = 1.0 / (k * x_extra * y_extra) as f64;
    let mut mass = vec![0.0; nx * ny];
    for xp in 0..x_extra {
        for yp in 0..y_extra {
            for c in 0..k {
                mass[(xp * k + c) * ny + yp * k + c] = w;
            }
        }
    }
    let j = JointPMF::new(xa, ya, mass)?;
    let ci = (k as f64).log2();
    let citation = "shared uniform component";
    let facts = vec![
        CertifiedFact::proved("perfectly resolvable", Fact::Resolvable, citation),
        CertifiedFact::proved(
            "common information equals the entropy of the shared component",
            Fact::CommonInformation { gk: ci, wyner: ci },
            citation,
        ),
        CertifiedFact::proved(
            "axis intercepts",
            Fact::Intercepts {
                tx: 0.0,
                ty: 0.0,
                tz: 0.0,
            },
            citation,
        ),
    ];
    let parameters = params([
        ("k", Value::from(k)),
        ("x_extra", Value::from(x_extra)),
        ("y_extra", Value::from(y_extra)),
    ]);
    CatalogEntry::new("uniform-common", parameters, j, facts)
}

/// A joint read from a JSON file in the probkit schema; no facts attached.
pub fn from_file(path: impl AsRef<Path>) -> Result<CatalogEntry> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let j = JointPMF::from_json_str(&text)?;
    let name = path
        .file_stem()
        .map_or("file".into(), |s| s.to_string_lossy().into_owned());
    CatalogEntry::new(
        &name,
        params([("path", Value::from(path.display().to_string()))]),
        j,
        Vec::new(),
    )
}

/// Parameters accepted by [`by_name`]; unset values take the defaults
/// listed by [`list`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CatalogParams {
    pub l: Option<usize>,
    pub k: Option<usize>,
    pub x_extra: Option<usize>,
    pub y_extra: Option<usize>,
    pub p: Option<f64>,
    pub delta: Option<f64>,
}

/// Names and one-line descriptions of the built-in entries.
pub fn list() -> Vec<(&'static str, &'static str)> {
    vec![
        (
            "bit-ot",
            "bit oblivious transfer, an 8-cycle on 4x4 symbols",
        ),
        ("two-bit-ot", "two bit-OTs in opposite directions"),
        (
            "string-ot",
            "two L-bit string-OTs in opposite directions (--L, default 1, at most 3)",
        ),
        (
            "z-source",
            "binary joint with p(0,1) = 0 (--p, default 0.25)",
        ),
        (
            "connected",
            "two 2x2 blocks joined by mass delta (--delta, default 0.05)",
        ),
        (
            "uniform-common",
            "shared uniform component (--k, --x-extra, --y-extra, default 2, 1, 1)",
        ),
    ]
}

pub fn by_name(name: &str, p: &CatalogParams) -> Result<CatalogEntry> {
    match name {
        "bit-ot" => bit_ot(),
        "two-bit-ot" => two_bit_ot(),
        "string-ot" => string_ot_pair(p.l.unwrap_or(1)),
        "z-source" => z_source(p.p.unwrap_or(0.25)),
        "connected" => connected_example(p.delta.unwrap_or(0.05)),
        "uniform-common" => uniform_common(
            p.k.unwrap_or(2),
            p.x_extra.unwrap_or(1),
            p.y_extra.unwrap_or(1),
        ),
        other => Err(Error::OutOfRange(format!(
            "unknown catalog entry {other:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::characteristic_graph;

    #[test]
    fn bit_ot_shape() {
        let e = bit_ot().unwrap();
        let j = &e.joint;
        assert!(j.x_marginal().iter().all(|p| (p - 0.25).abs() < 1e-15));
        assert!((j.mutual_information() - 1.0).abs() < 1e-12);
        let g = characteristic_graph(j);
        assert_eq!((g.component_count, g.edge_count), (1, 8));
    }

    #[test]
    fn string_ot_l1() {
        let e = string_ot_pair(1).unwrap();
        assert_eq!((e.joint.nx(), e.joint.ny()), (16, 16));
        assert!((e.joint.mutual_information() - 2.0).abs() < 1e-12);
        assert_eq!(e.joint.x_alphabet().label(0), "(cA=1,sA1=0,sA2=0,sB_cA=0)");
        assert!(string_ot_pair(0).is_err());
        assert!(string_ot_pair(STRING_OT_MAX_L + 1).is_err());
    }

    #[test]
    fn z_source_masses() {
        let e = z_source(0.25).unwrap();
        assert_eq!(e.joint.masses(), &[0.25, 0.0, 0.5, 0.25]);
        let u = z_source(1.0 / 3.0).unwrap();
        for m in [0, 2, 3] {
            assert!((u.joint.masses()[m] - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(z_source(0.5).is_err());
    }

    #[test]
    fn connected_examples() {
        let e = connected_example(0.0).unwrap();
        assert!((gk_common_information(&e.joint) - 1.0).abs() < 1e-12);
        assert!(intercepts_exact(&e.joint).max_abs() < 1e-12);
        let e = connected_example(0.05).unwrap();
        assert!(gk_common_information(&e.joint).abs() < 1e-12);
    }

    #[test]
    fn uniform_common_examples() {
        let e = uniform_common(2, 1, 1).unwrap();
        assert_eq!(e.joint.masses(), &[0.5, 0.0, 0.0, 0.5]);
        let e = uniform_common(4, 2, 3).unwrap();
        assert!((gk_common_information(&e.joint) - 2.0).abs() < 1e-12);
        assert!(e.seed_region().unwrap().contains_origin(1e-12));
    }

    #[test]
    fn tampered_fact_is_rejected() {
        let mut e = bit_ot().unwrap();
        e.certified_facts[0].fact = Fact::Intercepts {
            tx: 1.0,
            ty: 1.0,
            tz: 0.5,
        };
        assert!(matches!(e.verify(), Err(Error::Verification(_))));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ot.json");
        std::fs::write(&path, bit_ot().unwrap().joint.to_json_string()).unwrap();
        assert_eq!(from_file(&path).unwrap().joint, bit_ot().unwrap().joint);
        std::fs::write(
            &path,
            r#"{"x_alphabet":["a","b"],"y_alphabet":["0"],"pmf":[[0.5],[0.6]]}"#,
        )
        .unwrap();
        let err = from_file(&path).unwrap_err().to_string();
        assert!(err.contains("row 1"), "{err}");
    }
}
