//! Brute-force certification on tiny instances.
//!
//! Every channel whose rows are compositions of `steps` quanta into
//! `q_cardinality` parts is enumerated. Relabeling `Q` leaves the tension
//! unchanged, so the first positive-mass row only ranges over nonincreasing
//! compositions. Zero-mass rows do not affect the tension and are fixed to
//! `Q = 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probkit::{entropy_unchecked, h_term, Alphabet, Channel, JointPMF, TensionPoint};
use crate::tension_opt::DirectionWeights;

pub const DEFAULT_BUDGET: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub q_cardinality: usize,
    /// Mass quantum is `1/steps`.
    pub steps: usize,
    /// Largest number of channels enumerated.
    pub budget: f64,
    /// Enforce `|X||Y| ≤ 4`, `q ≤ 4`, `steps ≤ 8`.
    pub guarded: bool,
}

impl GridSpec {
    pub fn new(q_cardinality: usize, steps: usize) -> Self {
        Self {
            q_cardinality,
            steps,
            budget: DEFAULT_BUDGET,
            guarded: true,
        }
    }
}

/// All compositions of `steps` into `parts` nonnegative parts, in
/// lexicographic order.
fn compositions(steps: usize, parts: usize) -> Vec<Vec<u8>> {
    fn rec(left: usize, parts: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if parts == 1 {
            cur.push(left as u8);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for v in 0..=left {
            cur.push(v as u8);
            rec(left - v, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(steps, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

struct Grid {
    active: Vec<usize>,
    first: Vec<Vec<u8>>,
    all: Vec<Vec<u8>>,
}

fn build_grid(j: &JointPMF, g: &GridSpec) -> Result<Grid> {
    if g.q_cardinality == 0 || g.steps == 0 {
        return Err(Error::OutOfRange(
            "grid needs positive q_cardinality and steps".into(),
        ));
    }
    if g.steps > u8::MAX as usize {
        return Err(Error::OutOfRange(format!("steps {} too large", g.steps)));
    }
    let active: Vec<usize> = (0..j.masses().len())
        .filter(|&c| j.masses()[c] > 0.0)
        .collect();
    if g.guarded && (active.len() > 4 || g.q_cardinality > 4 || g.steps > 8) {
        return Err(Error::Refused(format!(
            "oracle guard: {} active cells, q = {}, steps = {} (limits 4, 4, 8)",
            active.len(),
            g.q_cardinality,
            g.steps
        )));
    }
    let all = compositions(g.steps, g.q_cardinality);
    let first: Vec<Vec<u8>> = all
        .iter()
        .filter(|c| c.windows(2).all(|w| w[0] >= w[1]))
        .cloned()
        .collect();
    let size = first.len() as f64 * (all.len() as f64).powi(active.len() as i32 - 1);
    if size > g.budget {
        return Err(Error::BudgetExceeded {
            size,
            budget: g.budget,
        });
    }
    Ok(Grid { active, first, all })
}

/// Number of channels the enumeration would visit.
pub fn enumeration_size(j: &JointPMF, g: &GridSpec) -> Result<f64> {
    let grid = build_grid(
        j,
        &GridSpec {
            budget: f64::INFINITY,
            ..*g
        },
    )?;
    Ok(grid.first.len() as f64 * (grid.all.len() as f64).powi(grid.active.len() as i32 - 1))
}

struct Acc {
    pxq: Vec<f64>,
    pyq: Vec<f64>,
    pq: Vec<f64>,
    hxyq: f64,
}

struct Walker<'a> {
    j: &'a JointPMF,
    grid: &'a Grid,
    nq: usize,
    steps: f64,
    hx: f64,
    hy: f64,
    hxy: f64,
}

impl Walker<'_> {
    fn add_row(&self, from: &Acc, to: &mut Acc, cell: usize, comp: &[u8]) {
        let ny = self.j.ny();
        let (x, y) = (cell / ny, cell % ny);
        let w = self.j.masses()[cell];
        to.pxq.copy_from_slice(&from.pxq);
        to.pyq.copy_from_slice(&from.pyq);
        to.pq.copy_from_slice(&from.pq);
        to.hxyq = from.hxyq;
        for (q, &c) in comp.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let m = w * c as f64 / self.steps;
            to.pxq[x * self.nq + q] += m;
            to.pyq[y * self.nq + q] += m;
            to.pq[q] += m;
            to.hxyq += h_term(m);
        }
    }

    fn point(&self, a: &Acc) -> TensionPoint {
        let hxq = entropy_unchecked(a.pxq.iter().copied());
        let hyq = entropy_unchecked(a.pyq.iter().copied());
        let hq = entropy_unchecked(a.pq.iter().copied());
        TensionPoint::clamped([
            self.hxy - self.hx - a.hxyq + hxq,
            self.hxy - self.hy - a.hxyq + hyq,
            hxq + hyq - a.hxyq - hq,
        ])
    }

    fn acc(&self) -> Acc {
        Acc {
            pxq: vec![0.0; self.j.nx() * self.nq],
            pyq: vec![0.0; self.j.ny() * self.nq],
            pq: vec![0.0; self.nq],
            hxyq: 0.0,
        }
    }

    /// Visit every channel whose first active row is `first[fi]`, in
    /// enumeration order.
    fn walk_partition(&self, fi: usize, f: &mut dyn FnMut(TensionPoint)) {
        let m = self.grid.active.len();
        let mut accs: Vec<Acc> = (0..=m).map(|_| self.acc()).collect();
        let (head, tail) = accs.split_at_mut(1);
        self.add_row(
            &head[0],
            &mut tail[0],
            self.grid.active[0],
            &self.grid.first[fi],
        );
        self.recurse(1, &mut accs, f);
    }

    fn recurse(&self, depth: usize, accs: &mut [Acc], f: &mut dyn FnMut(TensionPoint)) {
        let m = self.grid.active.len();
        if depth == m {
            f(self.point(&accs[m]));
            return;
        }
        for comp in &self.grid.all {
            let (head, tail) = accs.split_at_mut(depth + 1);
            self.add_row(&head[depth], &mut tail[0], self.grid.active[depth], comp);
            self.recurse(depth + 1, accs, f);
        }
    }
}

fn walker<'a>(j: &'a JointPMF, grid: &'a Grid, g: &GridSpec) -> Walker<'a> {
    Walker {
        j,
        grid,
        nq: g.q_cardinality,
        steps: g.steps as f64,
        hx: j.entropy_x(),
        hy: j.entropy_y(),
        hxy: j.entropy_xy(),
    }
}

/// Tension points of every grid channel, in enumeration order.
pub fn brute_force_points(j: &JointPMF, g: &GridSpec) -> Result<Vec<TensionPoint>> {
    let grid = build_grid(j, g)?;
    let w = walker(j, &grid, g);
    let parts: Vec<Vec<TensionPoint>> = (0..grid.first.len())
        .into_par_iter()
        .map(|fi| {
            let mut v = Vec::new();
            w.walk_partition(fi, &mut |p| v.push(p));
            v
        })
        .collect();
    Ok(parts.concat())
}

/// The grid channel at position `ordinal` of the enumeration.
pub fn grid_channel(j: &JointPMF, g: &GridSpec, ordinal: usize) -> Result<Channel> {
    let grid = build_grid(j, g)?;
    let per_first = grid.all.len().pow(grid.active.len() as u32 - 1);
    let fi = ordinal / per_first;
    if fi >= grid.first.len() {
        return Err(Error::OutOfRange(format!(
            "ordinal {ordinal} beyond the enumeration"
        )));
    }
    let nq = g.q_cardinality;
    let mut kernel = vec![0.0; j.masses().len() * nq];
    for row in kernel.chunks_mut(nq) {
        row[0] = 1.0;
    }
    let mut rest = ordinal % per_first;
    let mut digits = vec![0; grid.active.len()];
    for d in (1..grid.active.len()).rev() {
        digits[d] = rest % grid.all.len();
        rest /= grid.all.len();
    }
    for (d, &cell) in grid.active.iter().enumerate() {
        let comp = if d == 0 {
            &grid.first[fi]
        } else {
            &grid.all[digits[d]]
        };
        for (q, &c) in comp.iter().enumerate() {
            kernel[cell * nq + q] = c as f64 / g.steps as f64;
        }
    }
    Channel::new(Alphabet::indexed(nq), j.masses().len(), kernel)
}

/// Grid minimum of `λ·t` for one direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSupport {
    pub lambda: DirectionWeights,
    /// Minimum of the raw-weighted `λ·t` over the grid.
    pub value: f64,
    pub argmin: TensionPoint,
    pub steps: usize,
    pub q_cardinality: usize,
}

/// Grid minima for several directions in one pass.
pub fn brute_force_supports(
    j: &JointPMF,
    lams: &[DirectionWeights],
    g: &GridSpec,
) -> Result<Vec<OracleSupport>> {
    let grid = build_grid(j, g)?;
    let w = walker(j, &grid, g);
    let weights: Vec<[f64; 3]> = lams.iter().map(|l| l.weights()).collect();
    let init = || vec![(f64::INFINITY, TensionPoint::ORIGIN); weights.len()];
    let best = (0..grid.first.len())
        .into_par_iter()
        .map(|fi| {
            let mut best = init();
            w.walk_partition(fi, &mut |p| {
                for (b, lw) in best.iter_mut().zip(&weights) {
                    let v = p.dot(*lw);
                    if v < b.0 {
                        *b = (v, p);
                    }
                }
            });
            best
        })
        .reduce(init, |a, b| {
            a.into_iter()
                .zip(b)
                .map(|(x, y)| if y.0 < x.0 { y } else { x })
                .collect()
        });
    Ok(lams
        .iter()
        .zip(best)
        .map(|(l, (value, argmin))| OracleSupport {
            lambda: *l,
            value,
            argmin,
            steps: g.steps,
            q_cardinality: g.q_cardinality,
        })
        .collect())
}

/// Grid minimum of `λ·t`; sound as a support estimate up to grid resolution.
pub fn brute_force_support(
    j: &JointPMF,
    lam: &DirectionWeights,
    g: &GridSpec,
) -> Result<OracleSupport> {
    Ok(brute_force_supports(j, std::slice::from_ref(lam), g)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probkit::tension_of;

    fn copy_bit() -> JointPMF {
        JointPMF::from_matrix(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap()
    }

    fn independent_bits() -> JointPMF {
        JointPMF::from_matrix(2, 2, vec![0.25; 4]).unwrap()
    }

    #[test]
    fn composition_counts() {
        assert_eq!(compositions(8, 4).len(), 165);
        assert_eq!(compositions(2, 2), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
    }

    #[test]
    fn copy_bit_grid_contains_origin() {
        let pts = brute_force_points(&copy_bit(), &GridSpec::new(2, 2)).unwrap();
        assert!(pts
            .iter()
            .any(|p| p.max_abs_diff(TensionPoint::ORIGIN) < 1e-12));
    }

    #[test]
    fn independent_bits_stay_near_zero_r3() {
        let pts = brute_force_points(&independent_bits(), &GridSpec::new(2, 2)).unwrap();
        assert!(pts
            .iter()
            .any(|p| p.max_abs_diff(TensionPoint::ORIGIN) < 1e-12));
        for p in pts.iter().filter(|p| p.r1 < 1e-12 && p.r2 < 1e-12) {
            assert!(p.r3 < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn support_examples() {
        let j = copy_bit();
        let g = GridSpec::new(2, 4);
        let lam = DirectionWeights::new(1.0, 0.0, 0.0).unwrap();
        assert!(brute_force_support(&j, &lam, &g).unwrap().value.abs() < 1e-12);
        let lam = DirectionWeights::new(0.0, 0.0, 1.0).unwrap();
        assert!(brute_force_support(&j, &lam, &g).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn points_reproduce_through_channels() {
        let j = JointPMF::from_matrix(2, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let g = GridSpec::new(3, 3);
        let pts = brute_force_points(&j, &g).unwrap();
        assert_eq!(pts.len() as f64, enumeration_size(&j, &g).unwrap());
        for ordinal in (0..pts.len()).step_by(97) {
            let c = grid_channel(&j, &g, ordinal).unwrap();
            let t = tension_of(&j, &c).unwrap();
            assert!(t.max_abs_diff(pts[ordinal]) < 1e-12, "ordinal {ordinal}");
        }
    }

    #[test]
    fn budget_and_guard_refuse() {
        let j = JointPMF::from_matrix(2, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let g = GridSpec {
            budget: 10.0,
            ..GridSpec::new(4, 8)
        };
        assert!(matches!(
            brute_force_points(&j, &g),
            Err(Error::BudgetExceeded { .. })
        ));
        let big = JointPMF::from_matrix(3, 2, vec![1.0 / 6.0; 6]).unwrap();
        assert!(matches!(
            brute_force_points(&big, &GridSpec::new(2, 2)),
            Err(Error::Refused(_))
        ));
    }
}
