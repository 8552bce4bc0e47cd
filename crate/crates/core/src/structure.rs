//! Exact combinatorics of the characteristic bipartite graph.
//!
//! The common part `X∧Y` is the connected-component variable of the graph
//! with an edge wherever `p(x,y) > 0`. The dependent part `Y↘X` quotients
//! `Y` by equality of the conditional rows `p(x|y)`. Together they give the
//! three axis intercepts of the region of tension in closed form.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::probkit::{entropy_unchecked, tension_of, Alphabet, Channel, JointPMF};

/// Masses at or below this are not edges.
pub const EDGE_THRESHOLD: f64 = 1e-12;

/// Relative per-entry tolerance for equal conditional rows.
pub const MERGE_TOLERANCE: f64 = 1e-9;

/// `I(X;Y | X∧Y)` at or below this counts as zero.
pub const RESOLVE_TOLERANCE: f64 = 1e-9;

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller index as root
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Components of the characteristic bipartite graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacteristicGraph {
    pub edge_count: usize,
    /// Component of each x-symbol; `None` for isolated (zero-mass) symbols.
    pub x_component: Vec<Option<usize>>,
    pub y_component: Vec<Option<usize>>,
    pub component_count: usize,
}

/// Components are numbered in order of their lowest-index member,
/// x-symbols first.
pub fn characteristic_graph(j: &JointPMF) -> CharacteristicGraph {
    let (nx, ny) = (j.nx(), j.ny());
    let mut uf = UnionFind::new(nx + ny);
    let mut touched = vec![false; nx + ny];
    let mut edge_count = 0;
    for x in 0..nx {
        for y in 0..ny {
            if j.p(x, y) > EDGE_THRESHOLD {
                edge_count += 1;
                uf.union(x, nx + y);
                touched[x] = true;
                touched[nx + y] = true;
            }
        }
    }
    let mut ids: HashMap<usize, usize> = HashMap::new();
    let mut assign = |node: usize, uf: &mut UnionFind| -> Option<usize> {
        if !touched[node] {
            return None;
        }
        let root = uf.find(node);
        let next = ids.len();
        Some(*ids.entry(root).or_insert(next))
    };
    let x_component = (0..nx).map(|x| assign(x, &mut uf)).collect();
    let y_component = (0..ny).map(|y| assign(nx + y, &mut uf)).collect();
    CharacteristicGraph {
        edge_count,
        x_component,
        y_component,
        component_count: ids.len(),
    }
}

/// The common part `X∧Y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommonPart {
    pub graph: CharacteristicGraph,
    /// Probability of each component.
    pub distribution: Vec<f64>,
    pub entropy_bits: f64,
}

impl CommonPart {
    pub fn of(j: &JointPMF) -> Self {
        let graph = characteristic_graph(j);
        let mut distribution = vec![0.0; graph.component_count.max(1)];
        for (comp, m) in graph.x_component.iter().zip(j.x_marginal()) {
            if let Some(c) = comp {
                distribution[*c] += m;
            }
        }
        let entropy_bits = entropy_unchecked(distribution.iter().copied());
        Self {
            graph,
            distribution,
            entropy_bits,
        }
    }

    /// Component of cell `(x,y)`. Cells off the support are sent to the
    /// component of `x` (or of `y`, or component 0).
    fn component_of_cell(&self, x: usize, y: usize) -> usize {
        self.graph.x_component[x]
            .or(self.graph.y_component[y])
            .unwrap_or(0)
    }

    /// Deterministic channel `Q = X∧Y`.
    pub fn witness(&self, j: &JointPMF) -> Channel {
        let ny = j.ny();
        let map = (0..j.nx() * ny)
            .map(|cell| self.component_of_cell(cell / ny, cell % ny))
            .collect();
        let size = self.distribution.len();
        Channel::deterministic(
            Alphabet::new((0..size).map(|k| format!("K{k}"))).unwrap(),
            map,
        )
        .expect("component ids are in range")
    }
}

/// GK common information: entropy of the connected-component variable.
pub fn gk_common_information(j: &JointPMF) -> f64 {
    CommonPart::of(j).entropy_bits
}

/// Whether some common function of `X` and of `Y` makes them
/// conditionally independent. The witness is the common part.
pub fn is_perfectly_resolvable(j: &JointPMF) -> (bool, CommonPart) {
    let common = CommonPart::of(j);
    let t = tension_of(j, &common.witness(j)).expect("witness matches joint");
    (t.r3 <= RESOLVE_TOLERANCE, common)
}

/// Which variable is quotiented.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// `Y↘X`: classes of `y` by the row `p(x|y)`.
    YtoX,
    /// `X↘Y`: classes of `x` by the row `p(y|x)`.
    XtoY,
}

/// The dependent part of one variable on the other.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependentPart {
    pub direction: Direction,
    /// Class id of each symbol of the quotiented variable.
    pub class_of: Vec<usize>,
    pub class_count: usize,
    /// Zero-marginal symbols; each got a singleton class.
    pub flagged: Vec<usize>,
}

impl DependentPart {
    /// Deterministic channel `Q = class(Y)` (or `class(X)`).
    pub fn witness(&self, j: &JointPMF) -> Channel {
        let ny = j.ny();
        let map = (0..j.nx() * ny)
            .map(|cell| match self.direction {
                Direction::YtoX => self.class_of[cell % ny],
                Direction::XtoY => self.class_of[cell / ny],
            })
            .collect();
        Channel::deterministic(
            Alphabet::new((0..self.class_count).map(|k| format!("C{k}"))).unwrap(),
            map,
        )
        .expect("class ids are in range")
    }
}

fn rows_match(a: &[(usize, f64)], b: &[(usize, f64)]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(&(ia, va), &(ib, vb))| {
            ia == ib && (va - vb).abs() <= MERGE_TOLERANCE * va.abs().max(vb.abs())
        })
}

/// `(symbol, conditional probability)` pairs of one conditional row.
type SparseRow = Vec<(usize, f64)>;

/// Partition of the quotiented variable's symbols by equal conditional rows.
pub fn dependent_part(j: &JointPMF, direction: Direction) -> DependentPart {
    let (n, other) = match direction {
        Direction::YtoX => (j.ny(), j.nx()),
        Direction::XtoY => (j.nx(), j.ny()),
    };
    let cell = |s: usize, o: usize| match direction {
        Direction::YtoX => j.p(o, s),
        Direction::XtoY => j.p(s, o),
    };

    let mut class_of = vec![usize::MAX; n];
    let mut flagged = Vec::new();
    // Sparse conditional rows bucketed by support pattern; a row can only
    // match a representative with the same support.
    let mut reps: HashMap<Vec<usize>, Vec<(usize, SparseRow)>> = HashMap::new();
    let mut class_count = 0;
    for (s, class) in class_of.iter_mut().enumerate() {
        let marginal: f64 = (0..other).map(|o| cell(s, o)).sum();
        if marginal <= 0.0 {
            flagged.push(s);
            *class = class_count;
            class_count += 1;
            continue;
        }
        let row: SparseRow = (0..other)
            .filter_map(|o| {
                let v = cell(s, o);
                (v > EDGE_THRESHOLD).then(|| (o, v / marginal))
            })
            .collect();
        let support: Vec<usize> = row.iter().map(|(o, _)| *o).collect();
        let bucket = reps.entry(support).or_default();
        match bucket.iter().find(|(_, rep)| rows_match(rep, &row)) {
            Some((c, _)) => *class = *c,
            None => {
                *class = class_count;
                bucket.push((class_count, row));
                class_count += 1;
            }
        }
    }
    DependentPart {
        direction,
        class_of,
        class_count,
        flagged,
    }
}

/// Axis intercepts of the region of tension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Intercepts {
    pub tx: f64,
    pub ty: f64,
    pub tz: f64,
}

impl Intercepts {
    pub fn max_abs(&self) -> f64 {
        self.tx.abs().max(self.ty.abs()).max(self.tz.abs())
    }
}

/// `H(class | other)` from the joint of the other variable and the class.
fn class_conditional_entropy(j: &JointPMF, dep: &DependentPart) -> f64 {
    let (nx, ny) = (j.nx(), j.ny());
    let k = dep.class_count;
    let (n_other, mut joint) = match dep.direction {
        Direction::YtoX => (nx, vec![0.0; nx * k]),
        Direction::XtoY => (ny, vec![0.0; ny * k]),
    };
    for x in 0..nx {
        for y in 0..ny {
            let w = j.p(x, y);
            match dep.direction {
                Direction::YtoX => joint[x * k + dep.class_of[y]] += w,
                Direction::XtoY => joint[y * k + dep.class_of[x]] += w,
            }
        }
    }
    let h_other = entropy_unchecked(joint.chunks(k).map(|r| r.iter().sum::<f64>()));
    debug_assert_eq!(joint.len(), n_other * k);
    (entropy_unchecked(joint) - h_other).max(0.0)
}

/// `I(X;Y | X∧Y)` as the component-weighted sum of per-component
/// mutual informations.
fn residual_given_common(j: &JointPMF, common: &CommonPart) -> f64 {
    let (nx, ny) = (j.nx(), j.ny());
    let mut total = 0.0;
    for (c, &pc) in common.distribution.iter().enumerate() {
        if pc <= 0.0 {
            continue;
        }
        let xs: Vec<usize> = (0..nx)
            .filter(|&x| common.graph.x_component[x] == Some(c))
            .collect();
        let ys: Vec<usize> = (0..ny)
            .filter(|&y| common.graph.y_component[y] == Some(c))
            .collect();
        let px: Vec<f64> = xs
            .iter()
            .map(|&x| ys.iter().map(|&y| j.p(x, y)).sum::<f64>() / pc)
            .collect();
        let py: Vec<f64> = ys
            .iter()
            .map(|&y| xs.iter().map(|&x| j.p(x, y)).sum::<f64>() / pc)
            .collect();
        let mut mi = 0.0;
        for (ix, &x) in xs.iter().enumerate() {
            for (iy, &y) in ys.iter().enumerate() {
                let p = j.p(x, y) / pc;
                if p > 0.0 {
                    mi += p * (p / (px[ix] * py[iy])).log2();
                }
            }
        }
        total += pc * mi;
    }
    total.max(0.0)
}

/// `(H(Y↘X|X), H(X↘Y|Y), I(X;Y|X∧Y))`.
pub fn intercepts_exact(j: &JointPMF) -> Intercepts {
    let tx = class_conditional_entropy(j, &dependent_part(j, Direction::YtoX));
    let ty = class_conditional_entropy(j, &dependent_part(j, Direction::XtoY));
    let tz = residual_given_common(j, &CommonPart::of(j));
    Intercepts { tx, ty, tz }
}

/// Channels achieving `(tx,0,0)`, `(0,ty,0)` and `(0,0,tz)`.
pub fn intercept_witnesses(j: &JointPMF) -> [Channel; 3] {
    [
        dependent_part(j, Direction::YtoX).witness(j),
        dependent_part(j, Direction::XtoY).witness(j),
        CommonPart::of(j).witness(j),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probkit::TensionPoint;

    fn z_source(p: f64) -> JointPMF {
        JointPMF::from_matrix(2, 2, vec![p, 0.0, 1.0 - 2.0 * p, p]).unwrap()
    }

    fn copy_bit() -> JointPMF {
        JointPMF::from_matrix(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap()
    }

    fn independent() -> JointPMF {
        JointPMF::from_matrix(2, 3, vec![0.1, 0.2, 0.1, 0.15, 0.3, 0.15]).unwrap()
    }

    #[test]
    fn graph_components() {
        assert_eq!(characteristic_graph(&z_source(0.25)).component_count, 1);
        let g = characteristic_graph(&copy_bit());
        assert_eq!(g.component_count, 2);
        assert_eq!(g.x_component, vec![Some(0), Some(1)]);
        assert_eq!(g.y_component, vec![Some(0), Some(1)]);
    }

    #[test]
    fn zero_mass_symbols_are_isolated() {
        let j = JointPMF::from_matrix(3, 2, vec![0.5, 0.0, 0.0, 0.0, 0.0, 0.5]).unwrap();
        let g = characteristic_graph(&j);
        assert_eq!(g.x_component, vec![Some(0), None, Some(1)]);
        let dep = dependent_part(&j, Direction::XtoY);
        assert_eq!(dep.flagged, vec![1]);
        assert_eq!(dep.class_count, 3);
    }

    #[test]
    fn gk_examples() {
        assert!(gk_common_information(&z_source(0.25)).abs() < 1e-15);
        assert!(gk_common_information(&independent()).abs() < 1e-15);
        assert!((gk_common_information(&copy_bit()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn resolvability_examples() {
        assert!(is_perfectly_resolvable(&copy_bit()).0);
        assert!(is_perfectly_resolvable(&independent()).0);
        assert!(!is_perfectly_resolvable(&z_source(0.25)).0);
    }

    #[test]
    fn dependent_part_examples() {
        let d = dependent_part(&copy_bit(), Direction::YtoX);
        assert_eq!(d.class_of, vec![0, 1]);
        let d = dependent_part(&independent(), Direction::YtoX);
        assert_eq!(d.class_count, 1);
        let d = dependent_part(&independent(), Direction::XtoY);
        assert_eq!(d.class_count, 1);
    }

    #[test]
    fn near_ties_merge() {
        let e = 1e-13;
        let j = JointPMF::from_matrix(2, 2, vec![0.25 + e, 0.25 - e, 0.25, 0.25]).unwrap();
        assert_eq!(dependent_part(&j, Direction::XtoY).class_count, 1);
        let e = 1e-6;
        let j = JointPMF::from_matrix(2, 2, vec![0.25 + e, 0.25 - e, 0.25, 0.25]).unwrap();
        assert_eq!(dependent_part(&j, Direction::XtoY).class_count, 2);
    }

    #[test]
    fn intercepts_of_z_source() {
        // tx = H(Y|X): every column of the z-source has a distinct conditional row.
        let j = z_source(0.25);
        let i = intercepts_exact(&j);
        let hy_x = j.entropy_xy() - j.entropy_x();
        let hx_y = j.entropy_xy() - j.entropy_y();
        assert!((i.tx - hy_x).abs() < 1e-12);
        assert!((i.ty - hx_y).abs() < 1e-12);
        assert!((i.tz - j.mutual_information()).abs() < 1e-12);
    }

    #[test]
    fn witnesses_hit_the_axes() {
        for j in [z_source(0.25), z_source(0.1), copy_bit(), independent()] {
            let i = intercepts_exact(&j);
            let [wx, wy, wz] = intercept_witnesses(&j);
            let t = tension_of(&j, &wx).unwrap();
            assert!(t.max_abs_diff(TensionPoint::new(i.tx, 0.0, 0.0)) < 1e-12);
            let t = tension_of(&j, &wy).unwrap();
            assert!(t.max_abs_diff(TensionPoint::new(0.0, i.ty, 0.0)) < 1e-12);
            let t = tension_of(&j, &wz).unwrap();
            assert!(t.max_abs_diff(TensionPoint::new(0.0, 0.0, i.tz)) < 1e-12);
        }
    }
}
