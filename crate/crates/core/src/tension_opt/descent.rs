//! Exponentiated-gradient descent on the channel kernel `p(q|x,y)`.
//!
//! With `Λ = λ1+λ2+λ3` the scalarized objective is, up to constants,
//!
//! ```text
//! F = (λ1+λ3) H(XQ) + (λ2+λ3) H(YQ) - Λ H(XYQ) - λ3 H(Q)
//! ```
//!
//! and its derivative with respect to `p(q|x,y)`, divided by `p(x,y)`, is
//!
//! ```text
//! s(q|x,y) = Λ log p(x,y,q) - (λ1+λ3) log p(x,q) - (λ2+λ3) log p(y,q) + λ3 log p(q)
//! ```
//!
//! Each row moves by `k ← k·exp(-η s)` and is renormalized; `η` is chosen
//! by backtracking so the objective never increases.

use crate::probkit::{entropy_unchecked, h_term, JointPMF};

/// Floor inside logarithms so empty cells give finite scores.
const LOG_FLOOR: f64 = 1e-300;
const MAX_STEP: f64 = 1e4;
const MAX_BACKTRACKS: usize = 60;

pub(crate) struct Objective {
    w: Vec<f64>,
    nx: usize,
    ny: usize,
    pub nq: usize,
    active: Vec<usize>,
    weights: [f64; 3],
    hx: f64,
    hy: f64,
    hxy: f64,
}

pub(crate) struct Scratch {
    pxq: Vec<f64>,
    pyq: Vec<f64>,
    pq: Vec<f64>,
}

#[derive(Clone, Debug)]
pub(crate) struct Run {
    pub kernel: Vec<f64>,
    pub value: f64,
    pub converged: bool,
}

impl Objective {
    pub fn new(j: &JointPMF, weights: [f64; 3], nq: usize) -> Self {
        let w = j.masses().to_vec();
        let active = (0..w.len()).filter(|&c| w[c] > 0.0).collect();
        Self {
            w,
            nx: j.nx(),
            ny: j.ny(),
            nq,
            active,
            weights,
            hx: j.entropy_x(),
            hy: j.entropy_y(),
            hxy: j.entropy_xy(),
        }
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn scratch(&self) -> Scratch {
        Scratch {
            pxq: vec![0.0; self.nx * self.nq],
            pyq: vec![0.0; self.ny * self.nq],
            pq: vec![0.0; self.nq],
        }
    }

    /// Raw tension triple; leaves the marginals of `kernel` in `s`.
    pub fn tension(&self, kernel: &[f64], s: &mut Scratch) -> [f64; 3] {
        let nq = self.nq;
        s.pxq.iter_mut().for_each(|v| *v = 0.0);
        s.pyq.iter_mut().for_each(|v| *v = 0.0);
        s.pq.iter_mut().for_each(|v| *v = 0.0);
        let mut hxyq = 0.0;
        for &c in &self.active {
            let (x, y) = (c / self.ny, c % self.ny);
            let w = self.w[c];
            let row = &kernel[c * nq..(c + 1) * nq];
            for (q, &k) in row.iter().enumerate() {
                let m = w * k;
                s.pxq[x * nq + q] += m;
                s.pyq[y * nq + q] += m;
                s.pq[q] += m;
                hxyq += h_term(m);
            }
        }
        let hxq = entropy_unchecked(s.pxq.iter().copied());
        let hyq = entropy_unchecked(s.pyq.iter().copied());
        let hq = entropy_unchecked(s.pq.iter().copied());
        [
            self.hxy - self.hx - hxyq + hxq,
            self.hxy - self.hy - hxyq + hyq,
            hxq + hyq - hxyq - hq,
        ]
    }

    pub fn value_of(&self, t: [f64; 3]) -> f64 {
        self.weights[0] * t[0] + self.weights[1] * t[1] + self.weights[2] * t[2]
    }

    pub fn value(&self, kernel: &[f64], s: &mut Scratch) -> f64 {
        let t = self.tension(kernel, s);
        self.value_of(t)
    }

    /// Per-row scores at the marginals currently held in `s`.
    fn scores(&self, kernel: &[f64], s: &Scratch, out: &mut [f64]) {
        let [l1, l2, l3] = self.weights;
        let total = l1 + l2 + l3;
        let nq = self.nq;
        for &c in &self.active {
            let (x, y) = (c / self.ny, c % self.ny);
            let w = self.w[c];
            for q in 0..nq {
                let pxyq = w * kernel[c * nq + q];
                out[c * nq + q] = total * pxyq.max(LOG_FLOOR).log2()
                    - (l1 + l3) * s.pxq[x * nq + q].max(LOG_FLOOR).log2()
                    - (l2 + l3) * s.pyq[y * nq + q].max(LOG_FLOOR).log2()
                    + l3 * s.pq[q].max(LOG_FLOOR).log2();
            }
        }
    }

    fn step(&self, kernel: &[f64], scores: &[f64], eta: f64, out: &mut [f64]) {
        let nq = self.nq;
        for &c in &self.active {
            let r = c * nq..(c + 1) * nq;
            let sc = &scores[r.clone()];
            let min = sc.iter().copied().fold(f64::INFINITY, f64::min);
            let mut total = 0.0;
            for (o, (&k, &g)) in out[r.clone()]
                .iter_mut()
                .zip(kernel[r.clone()].iter().zip(sc))
            {
                *o = k * (-eta * (g - min)).exp();
                total += *o;
            }
            if total > 0.0 && total.is_finite() {
                out[r].iter_mut().for_each(|v| *v /= total);
            } else {
                out[r.clone()].copy_from_slice(&kernel[r]);
            }
        }
    }

    /// Drops entries below `threshold` and renormalizes each row.
    pub fn sparsified(&self, kernel: &[f64], threshold: f64) -> Vec<f64> {
        let nq = self.nq;
        let mut k = kernel.to_vec();
        for &c in &self.active {
            let row = &mut k[c * nq..(c + 1) * nq];
            let keep: f64 = row.iter().filter(|v| **v >= threshold).sum();
            if keep > 0.0 {
                row.iter_mut()
                    .for_each(|v| *v = if *v >= threshold { *v / keep } else { 0.0 });
            }
        }
        k
    }

    pub fn descend(&self, init: Vec<f64>, max_iterations: usize, tolerance: f64) -> Run {
        let n = self.cells() * self.nq;
        let mut s = self.scratch();
        let mut kernel = init;
        let mut value = self.value(&kernel, &mut s);
        let mut scores = vec![0.0; n];
        let mut cand = kernel.clone();
        let mut eta = 1.0;
        let mut converged = false;
        let mut iterations = 0;
        while iterations < max_iterations {
            iterations += 1;
            self.value(&kernel, &mut s);
            self.scores(&kernel, &s, &mut scores);
            let mut accepted = None;
            for _ in 0..MAX_BACKTRACKS {
                self.step(&kernel, &scores, eta, &mut cand);
                let v = self.value(&cand, &mut s);
                if v <= value {
                    accepted = Some(v);
                    break;
                }
                eta *= 0.5;
            }
            let Some(v) = accepted else {
                converged = true;
                break;
            };
            let gain = value - v;
            std::mem::swap(&mut kernel, &mut cand);
            value = v;
            eta = (eta * 2.0).min(MAX_STEP);
            if gain < tolerance {
                converged = true;
                break;
            }
        }
        Run {
            kernel,
            value,
            converged,
        }
    }
}
