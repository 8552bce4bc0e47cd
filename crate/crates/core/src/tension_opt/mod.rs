//! Numerical computation of the region of tension.
//!
//! The region is convex and upward closed, so it is determined by its
//! support function `h(λ) = min λ·T(X;Y|Q)` over nonnegative directions.
//! [`scalarized_min`] estimates `h(λ)` from above with a multi-restart
//! exponentiated-gradient search over channels; [`trace_region`] sweeps a
//! set of directions and [`slice_z`] follows the `z = 0` slice with an
//! escalating penalty on `I(X;Y|Q)`.

mod descent;
mod region;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::probkit::{tension_of, Alphabet, Channel, JointPMF, TensionPoint};
use crate::structure;

use descent::Objective;
pub use region::{
    CertifiedBound, EvidenceKind, InnerPoint, Provenance, RegionApprox, SupportEntry,
    SLICE_POINT_TOLERANCE,
};

/// Kernel entries below this are dropped when polishing a result.
const POLISH_THRESHOLD: f64 = 1e-9;
/// Mixing weight toward uniform for anchor-based starts.
const ANCHOR_SMOOTHING: f64 = 0.05;
/// Mixing weight toward uniform when warm-starting the next penalty level.
const WARM_SMOOTHING: f64 = 1e-4;
/// Smallest weight on either rate at the ends of a slice sweep.
pub const SLICE_EDGE_WEIGHT: f64 = 1e-3;

/// Nonnegative scalarization weights `(λ1, λ2, λ3)`, not all zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectionWeights {
    w: [f64; 3],
}

impl DirectionWeights {
    pub fn new(l1: f64, l2: f64, l3: f64) -> Result<Self> {
        let w = [l1, l2, l3];
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) || w.iter().all(|v| *v == 0.0) {
            return Err(Error::OutOfRange(format!(
                "direction {w:?} must be nonnegative and nonzero"
            )));
        }
        Ok(Self { w })
    }

    pub fn l1(&self) -> f64 {
        self.w[0]
    }

    pub fn l2(&self) -> f64 {
        self.w[1]
    }

    pub fn l3(&self) -> f64 {
        self.w[2]
    }

    pub fn weights(&self) -> [f64; 3] {
        self.w
    }

    pub fn norm1(&self) -> f64 {
        self.w.iter().sum()
    }

    /// Scaled to unit 1-norm.
    pub fn normalized(&self) -> Self {
        let n = self.norm1();
        Self {
            w: self.w.map(|v| v / n),
        }
    }

    pub fn dot(&self, p: TensionPoint) -> f64 {
        p.dot(self.w)
    }

    pub fn same_direction(&self, other: &DirectionWeights) -> bool {
        let (a, b) = (self.normalized(), other.normalized());
        a.w.iter().zip(b.w).all(|(x, y)| (x - y).abs() <= 1e-12)
    }
}

impl Serialize for DirectionWeights {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.w.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DirectionWeights {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [a, b, c] = <[f64; 3]>::deserialize(d)?;
        DirectionWeights::new(a, b, c).map_err(serde::de::Error::custom)
    }
}

/// Directions spread over the nonnegative octant of the unit sphere by a
/// golden-angle spiral, each normalized to unit 1-norm.
pub fn octant_directions(n: usize) -> Vec<DirectionWeights> {
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    (0..n)
        .map(|i| {
            let z = 1.0 - (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = (i as f64 * golden).fract() * std::f64::consts::FRAC_PI_2;
            DirectionWeights::new(r * phi.cos(), r * phi.sin(), z)
                .expect("spiral point lies in the octant")
                .normalized()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Size of the auxiliary alphabet; `None` uses `|X||Y| + 2`.
    pub q_cardinality: Option<usize>,
    pub restarts: usize,
    pub max_iterations: usize,
    /// Stop once one step improves the objective by less than this (bits).
    pub step_tolerance: f64,
    pub seed: u64,
    /// Penalty weights on `I(X;Y|Q)` tried in order by slice computations.
    pub penalty_schedule: Vec<f64>,
    /// Largest `I(X;Y|Q)` accepted as lying on the `z = 0` slice.
    pub slice_tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            q_cardinality: None,
            restarts: 32,
            max_iterations: 2000,
            step_tolerance: 1e-10,
            seed: 0,
            penalty_schedule: vec![1.0, 4.0, 16.0, 64.0, 256.0],
            slice_tolerance: 1e-4,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Resolved `|Q|` for `j`; errors when above the `|X||Y| + 2` cap.
    pub fn q_for(&self, j: &JointPMF) -> Result<usize> {
        let cap = j.nx() * j.ny() + 2;
        match self.q_cardinality {
            None => Ok(cap),
            Some(0) => Err(Error::OutOfRange("q_cardinality must be positive".into())),
            Some(q) if q > cap => Err(Error::OutOfRange(format!(
                "q_cardinality {q} exceeds the cap |X||Y|+2 = {cap}"
            ))),
            Some(q) => Ok(q),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iterations == 0 {
            return Err(Error::OutOfRange(
                "restarts and max_iterations must be positive".into(),
            ));
        }
        if self.penalty_schedule.is_empty()
            || self.penalty_schedule.iter().any(|m| m.is_nan() || *m < 0.0)
        {
            return Err(Error::OutOfRange(
                "penalty schedule must be nonempty and nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Result of one scalarized minimization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarizedResult {
    /// `λ·point`, for the raw (unnormalized) weights.
    pub value: f64,
    pub point: TensionPoint,
    pub witness: Channel,
    /// False when the winning run stopped at `max_iterations`.
    pub converged: bool,
}

struct Candidate {
    value: f64,
    kernel: Vec<f64>,
    converged: bool,
}

fn better(a: &Candidate, b: &Candidate) -> bool {
    match a.value.total_cmp(&b.value) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => {
            for (x, y) in a.kernel.iter().zip(&b.kernel) {
                match x.total_cmp(y) {
                    std::cmp::Ordering::Less => return true,
                    std::cmp::Ordering::Greater => return false,
                    std::cmp::Ordering::Equal => {}
                }
            }
            false
        }
    }
}

/// Deterministic channels worth trying first: constant, `X`, `Y`, `(X,Y)`,
/// the common part and both dependent parts, when they fit in `nq` symbols.
fn anchor_kernels(j: &JointPMF, nq: usize) -> Vec<Vec<f64>> {
    let mut chans = vec![
        Channel::constant(j.nx() * j.ny()),
        Channel::reveal_x(j.x_alphabet(), j.ny()),
        Channel::reveal_y(j.nx(), j.y_alphabet()),
        Channel::reveal_xy(j.x_alphabet(), j.y_alphabet()),
    ];
    chans.extend(structure::intercept_witnesses(j));
    let mut out: Vec<Vec<f64>> = Vec::new();
    for c in chans {
        if let Ok(p) = c.padded_to(nq) {
            let k = p.to_dense();
            if !out.contains(&k) {
                out.push(k);
            }
        }
    }
    out
}

fn random_kernel(rng: &mut ChaCha8Rng, cells: usize, nq: usize) -> Vec<f64> {
    let mut k = vec![0.0; cells * nq];
    for row in k.chunks_mut(nq) {
        // symmetric Dirichlet(1) via normalized exponentials
        for v in row.iter_mut() {
            let u: f64 = rng.random::<f64>();
            *v = -(1.0 - u).ln() + 1e-12;
        }
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= s);
    }
    k
}

fn smoothed(kernel: &[f64], nq: usize, tau: f64) -> Vec<f64> {
    kernel
        .iter()
        .map(|v| (1.0 - tau) * v + tau / nq as f64)
        .collect()
}

fn kernel_to_channel(kernel: Vec<f64>, cells: usize, nq: usize) -> Channel {
    let mut kernel = kernel;
    for row in kernel.chunks_mut(nq) {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= s);
    }
    Channel::new(Alphabet::indexed(nq), cells, kernel).expect("rows are normalized")
}

/// Core search shared by all public entry points. `stream` selects an
/// independent random stream; `warm` are extra starting kernels.
fn minimize(
    j: &JointPMF,
    weights: [f64; 3],
    cfg: &OptimizerConfig,
    stream: u64,
    warm: &[Vec<f64>],
) -> Result<ScalarizedResult> {
    cfg.validate()?;
    let nq = cfg.q_for(j)?;
    let cells = j.nx() * j.ny();
    let obj = Objective::new(j, weights, nq);
    let mut s = obj.scratch();

    let anchors = anchor_kernels(j, nq);
    let mut starts: Vec<Vec<f64>> = anchors
        .iter()
        .map(|k| smoothed(k, nq, ANCHOR_SMOOTHING))
        .collect();
    starts.extend(warm.iter().cloned());
    let fixed_starts = starts.len();

    let runs: Vec<Candidate> = (0..fixed_starts + cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let init = if i < fixed_starts {
                starts[i].clone()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream((stream << 24) | (i - fixed_starts) as u64);
                random_kernel(&mut rng, cells, nq)
            };
            let run = obj.descend(init, cfg.max_iterations, cfg.step_tolerance);
            let mut scratch = obj.scratch();
            let polished = obj.sparsified(&run.kernel, POLISH_THRESHOLD);
            let pv = obj.value(&polished, &mut scratch);
            if pv <= run.value {
                Candidate {
                    value: pv,
                    kernel: polished,
                    converged: run.converged,
                }
            } else {
                Candidate {
                    value: run.value,
                    kernel: run.kernel,
                    converged: run.converged,
                }
            }
        })
        .collect();

    let mut best: Option<Candidate> = None;
    for k in anchors {
        let value = obj.value(&k, &mut s);
        let c = Candidate {
            value,
            kernel: k,
            converged: true,
        };
        if best.as_ref().is_none_or(|b| better(&c, b)) {
            best = Some(c);
        }
    }
    for c in runs {
        if best.as_ref().is_none_or(|b| better(&c, b)) {
            best = Some(c);
        }
    }
    let best = best.expect("at least one anchor");
    let witness = kernel_to_channel(best.kernel, cells, nq);
    let point = tension_of(j, &witness)?;
    Ok(ScalarizedResult {
        value: point.dot(weights),
        point,
        witness,
        converged: best.converged,
    })
}

/// Smallest `λ1 I(Y;Q|X) + λ2 I(X;Q|Y) + λ3 I(X;Y|Q)` found over channels.
/// The value is achieved by the returned witness, so it bounds the support
/// function from above.
pub fn scalarized_min(
    j: &JointPMF,
    lam: &DirectionWeights,
    cfg: &OptimizerConfig,
) -> Result<ScalarizedResult> {
    minimize(j, lam.weights(), cfg, 0, &[])
}

/// Evaluate every direction and collect the achieved points, together with
/// the three exact axis-intercept witnesses.
pub fn trace_region(
    j: &JointPMF,
    directions: &[DirectionWeights],
    cfg: &OptimizerConfig,
) -> Result<RegionApprox> {
    if directions.is_empty() {
        return Err(Error::OutOfRange(
            "trace needs at least one direction".into(),
        ));
    }
    cfg.validate()?;
    let mut region = RegionApprox::new();
    let (resolvable, common) = structure::is_perfectly_resolvable(j);
    if resolvable {
        let w = common.witness(j);
        region.push_point(tension_of(j, &w)?, Some(w));
        for d in directions {
            region.support_upper.push(SupportEntry {
                lambda: d.normalized(),
                value: 0.0,
                slice: false,
                flagged: false,
            });
        }
    } else {
        let results: Vec<Result<ScalarizedResult>> = directions
            .par_iter()
            .enumerate()
            .map(|(i, d)| minimize(j, d.normalized().weights(), cfg, i as u64 + 1, &[]))
            .collect();
        for (d, r) in directions.iter().zip(results) {
            let r = r?;
            region.support_upper.push(SupportEntry {
                lambda: d.normalized(),
                value: r.value,
                slice: false,
                flagged: !r.converged,
            });
            region.push_point(r.point, Some(r.witness));
        }
    }
    for w in structure::intercept_witnesses(j) {
        region.push_point(tension_of(j, &w)?, Some(w));
    }
    Ok(region)
}

/// One point of the `z = 0` slice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlicePoint {
    pub alpha: f64,
    pub r1: f64,
    pub r2: f64,
    /// `I(X;Y|Q)` at the witness.
    pub residual: f64,
    /// Penalty weight at which the residual was accepted (or the last tried).
    pub penalty: f64,
    /// Residual within the slice tolerance.
    pub feasible: bool,
    pub converged: bool,
    pub witness: Channel,
}

impl SlicePoint {
    pub fn point(&self) -> TensionPoint {
        TensionPoint::new(self.r1, self.r2, self.residual)
    }
}

/// Weights used at grid position `alpha`; the ends keep a small weight on
/// the other rate so ties resolve toward the axis intercepts.
pub fn slice_weights(alpha: f64) -> (f64, f64) {
    (
        alpha.max(SLICE_EDGE_WEIGHT),
        (1.0 - alpha).max(SLICE_EDGE_WEIGHT),
    )
}

/// Boundary of the `z = 0` slice at `grid` evenly spaced mixing weights.
/// A perfectly resolvable joint yields the single point `(0, 0)`.
pub fn slice_z(j: &JointPMF, grid: usize, cfg: &OptimizerConfig) -> Result<Vec<SlicePoint>> {
    if grid < 2 {
        return Err(Error::OutOfRange(format!(
            "slice grid {grid} must be at least 2"
        )));
    }
    cfg.validate()?;
    let (resolvable, common) = structure::is_perfectly_resolvable(j);
    if resolvable {
        return Ok(vec![resolvable_slice_point(j, &common, 0.5)?]);
    }
    let alphas: Vec<f64> = (0..grid).map(|i| i as f64 / (grid - 1) as f64).collect();
    alphas
        .par_iter()
        .enumerate()
        .map(|(i, &alpha)| slice_point(j, alpha, i as u64, cfg))
        .collect()
}

/// A single slice point at mixing weight `alpha`.
pub fn slice_at(j: &JointPMF, alpha: f64, cfg: &OptimizerConfig) -> Result<SlicePoint> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::OutOfRange(format!("alpha {alpha} outside [0, 1]")));
    }
    cfg.validate()?;
    let (resolvable, common) = structure::is_perfectly_resolvable(j);
    if resolvable {
        return resolvable_slice_point(j, &common, alpha);
    }
    slice_point(j, alpha, 0, cfg)
}

fn resolvable_slice_point(
    j: &JointPMF,
    common: &structure::CommonPart,
    alpha: f64,
) -> Result<SlicePoint> {
    let w = common.witness(j);
    let t = tension_of(j, &w)?;
    Ok(SlicePoint {
        alpha,
        r1: t.r1,
        r2: t.r2,
        residual: t.r3,
        penalty: 0.0,
        feasible: true,
        converged: true,
        witness: w,
    })
}

fn slice_point(j: &JointPMF, alpha: f64, index: u64, cfg: &OptimizerConfig) -> Result<SlicePoint> {
    let nq = cfg.q_for(j)?;
    let (a, b) = slice_weights(alpha);
    let mut warm: Vec<Vec<f64>> = Vec::new();
    let mut last = None;
    for (level, &m) in cfg.penalty_schedule.iter().enumerate() {
        let stream = 1 + (index << 8) + level as u64;
        let r = minimize(j, [a, b, m], cfg, stream, &warm)?;
        let done = r.point.r3 <= cfg.slice_tolerance;
        warm = vec![smoothed(&r.witness.to_dense(), nq, WARM_SMOOTHING)];
        last = Some((m, r));
        if done {
            break;
        }
    }
    let (penalty, r) = last.expect("schedule is nonempty");
    Ok(SlicePoint {
        alpha,
        r1: r.point.r1,
        r2: r.point.r2,
        residual: r.point.r3,
        penalty,
        feasible: r.point.r3 <= cfg.slice_tolerance,
        converged: r.converged,
        witness: r.witness,
    })
}

/// `min` over stored evidence of `λ·t`; see [`RegionApprox::support_upper`].
pub fn support_upper(region: &RegionApprox, lam: &DirectionWeights) -> Result<f64> {
    region.support_upper(lam)
}
