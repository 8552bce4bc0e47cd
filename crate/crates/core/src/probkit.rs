//! Finite-alphabet probability core.
//!
//! Joint distributions over `X × Y`, channels `p(q|x,y)` and the
//! information quantities built from them. Every quantity is in bits.
//! Zero-probability cells contribute nothing (`0·log 0 = 0`).

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Inputs must sum to one within this absolute tolerance.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Information values this close below zero are floating-point noise.
pub const NOISE_FLOOR: f64 = 1e-9;

/// `-p log2 p` with the continuous extension at zero.
#[inline]
pub(crate) fn h_term(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

pub(crate) fn entropy_unchecked<I: IntoIterator<Item = f64>>(masses: I) -> f64 {
    masses.into_iter().map(h_term).sum::<f64>() + 0.0
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidDistribution("empty distribution".into()));
    }
    for (i, &v) in p.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidDistribution(format!("entry {i} is {v}")));
        }
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::InvalidDistribution(format!("masses sum to {total}")));
    }
    Ok(())
}

/// Shannon entropy of a probability vector.
pub fn entropy(p: &[f64]) -> Result<f64> {
    check_distribution(p)?;
    Ok(entropy_unchecked(p.iter().copied()))
}

/// `H2(p) = p log(1/p) + (1-p) log(1/(1-p))`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!(
            "binary entropy argument {p} outside [0,1]"
        )));
    }
    Ok(h_term(p) + h_term(1.0 - p))
}

/// Ordered list of distinct symbol names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Alphabet {
    labels: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidDistribution(
                "alphabet must not be empty".into(),
            ));
        }
        let mut seen = std::collections::HashSet::with_capacity(labels.len());
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidDistribution(format!(
                    "duplicate symbol {l:?}"
                )));
            }
        }
        Ok(Self { labels })
    }

    /// Symbols `"0"`, `"1"`, ... `"n-1"`.
    pub fn indexed(n: usize) -> Self {
        assert!(n >= 1, "alphabet size must be positive");
        Self {
            labels: (0..n).map(|i| i.to_string()).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    /// Cartesian product with labels rendered as `"(a,b)"`.
    pub fn product(&self, other: &Alphabet) -> Alphabet {
        let mut labels = Vec::with_capacity(self.size() * other.size());
        for a in &self.labels {
            for b in &other.labels {
                labels.push(format!("({a},{b})"));
            }
        }
        Alphabet { labels }
    }
}

impl<'de> Deserialize<'de> for Alphabet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let labels = Vec::<String>::deserialize(d)?;
        Alphabet::new(labels).map_err(serde::de::Error::custom)
    }
}

/// Joint distribution `p(x,y)` stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct JointPMF {
    x_alphabet: Alphabet,
    y_alphabet: Alphabet,
    mass: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct JointFile {
    x_alphabet: Alphabet,
    y_alphabet: Alphabet,
    pmf: Vec<Vec<f64>>,
}

impl JointPMF {
    /// Validates shape, sign and normalization. Nothing is renormalized.
    pub fn new(x_alphabet: Alphabet, y_alphabet: Alphabet, mass: Vec<f64>) -> Result<Self> {
        let (nx, ny) = (x_alphabet.size(), y_alphabet.size());
        if mass.len() != nx * ny {
            return Err(Error::DimensionMismatch(format!(
                "{} masses for a {nx}x{ny} alphabet",
                mass.len()
            )));
        }
        for (i, &v) in mass.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "pmf[{}][{}] = {v} is not a nonnegative number",
                    i / ny,
                    i % ny
                )));
            }
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            let row_sums: Vec<String> = mass
                .chunks(ny)
                .enumerate()
                .map(|(r, row)| format!("row {r} sums to {}", row.iter().sum::<f64>()))
                .collect();
            return Err(Error::InvalidDistribution(format!(
                "pmf sums to {total}, not 1 ({})",
                row_sums.join(", ")
            )));
        }
        Ok(Self {
            x_alphabet,
            y_alphabet,
            mass,
        })
    }

    pub fn from_rows(
        x_alphabet: Alphabet,
        y_alphabet: Alphabet,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if rows.len() != x_alphabet.size() {
            return Err(Error::DimensionMismatch(format!(
                "{} pmf rows for {} x-symbols",
                rows.len(),
                x_alphabet.size()
            )));
        }
        let ny = y_alphabet.size();
        let mut mass = Vec::with_capacity(rows.len() * ny);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != ny {
                return Err(Error::DimensionMismatch(format!(
                    "pmf row {r} has {} entries, expected {ny}",
                    row.len()
                )));
            }
            mass.extend(row);
        }
        Self::new(x_alphabet, y_alphabet, mass)
    }

    /// Joint with `"0".."n-1"` labels on both sides.
    pub fn from_matrix(nx: usize, ny: usize, mass: Vec<f64>) -> Result<Self> {
        Self::new(Alphabet::indexed(nx), Alphabet::indexed(ny), mass)
    }

    pub fn x_alphabet(&self) -> &Alphabet {
        &self.x_alphabet
    }

    pub fn y_alphabet(&self) -> &Alphabet {
        &self.y_alphabet
    }

    pub fn nx(&self) -> usize {
        self.x_alphabet.size()
    }

    pub fn ny(&self) -> usize {
        self.y_alphabet.size()
    }

    #[inline]
    pub fn p(&self, x: usize, y: usize) -> f64 {
        self.mass[x * self.ny() + y]
    }

    /// Row-major masses.
    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.mass.chunks(self.ny())
    }

    pub fn x_marginal(&self) -> Vec<f64> {
        self.rows().map(|r| r.iter().sum()).collect()
    }

    pub fn y_marginal(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.ny()];
        for row in self.rows() {
            for (acc, v) in m.iter_mut().zip(row) {
                *acc += v;
            }
        }
        m
    }

    pub fn entropy_xy(&self) -> f64 {
        entropy_unchecked(self.mass.iter().copied())
    }

    pub fn entropy_x(&self) -> f64 {
        entropy_unchecked(self.x_marginal())
    }

    pub fn entropy_y(&self) -> f64 {
        entropy_unchecked(self.y_marginal())
    }

    /// `I(X;Y)`, clamped at zero.
    pub fn mutual_information(&self) -> f64 {
        (self.entropy_x() + self.entropy_y() - self.entropy_xy()).max(0.0)
    }

    /// Symbols with zero marginal probability: `(x symbols, y symbols)`.
    pub fn zero_mass_symbols(&self) -> (Vec<usize>, Vec<usize>) {
        let zx = self
            .x_marginal()
            .iter()
            .enumerate()
            .filter(|(_, &m)| m <= 0.0)
            .map(|(i, _)| i)
            .collect();
        let zy = self
            .y_marginal()
            .iter()
            .enumerate()
            .filter(|(_, &m)| m <= 0.0)
            .map(|(i, _)| i)
            .collect();
        (zx, zy)
    }

    /// The same joint with X and Y exchanged.
    pub fn transposed(&self) -> JointPMF {
        let (nx, ny) = (self.nx(), self.ny());
        let mut mass = vec![0.0; nx * ny];
        for x in 0..nx {
            for y in 0..ny {
                mass[y * nx + x] = self.p(x, y);
            }
        }
        JointPMF {
            x_alphabet: self.y_alphabet.clone(),
            y_alphabet: self.x_alphabet.clone(),
            mass,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("joint serializes")
    }
}

impl Serialize for JointPMF {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        JointFile {
            x_alphabet: self.x_alphabet.clone(),
            y_alphabet: self.y_alphabet.clone(),
            pmf: self.rows().map(<[f64]>::to_vec).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for JointPMF {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = JointFile::deserialize(d)?;
        JointPMF::from_rows(f.x_alphabet, f.y_alphabet, f.pmf).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Kernel {
    /// Row-major `rows × q` matrix.
    Dense(Vec<f64>),
    /// Row `r` maps to symbol `map[r]` with probability one.
    Deterministic(Vec<usize>),
}

/// Conditional distribution `p(q|x,y)`; row index is `x * |Y| + y`.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    q_alphabet: Alphabet,
    rows: usize,
    kernel: Kernel,
}

impl Channel {
    pub fn new(q_alphabet: Alphabet, rows: usize, kernel: Vec<f64>) -> Result<Self> {
        let nq = q_alphabet.size();
        if kernel.len() != rows * nq {
            return Err(Error::DimensionMismatch(format!(
                "{} kernel entries for {rows} rows of {nq} symbols",
                kernel.len()
            )));
        }
        for (r, row) in kernel.chunks(nq).enumerate() {
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "kernel row {r} has a negative entry"
                )));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > NORMALIZATION_TOLERANCE {
                return Err(Error::InvalidDistribution(format!(
                    "kernel row {r} sums to {s}"
                )));
            }
        }
        Ok(Self {
            q_alphabet,
            rows,
            kernel: Kernel::Dense(kernel),
        })
    }

    pub fn from_rows(q_alphabet: Alphabet, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let nq = q_alphabet.size();
        let mut data = Vec::with_capacity(n * nq);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != nq {
                return Err(Error::DimensionMismatch(format!(
                    "kernel row {r} has {} entries, expected {nq}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Self::new(q_alphabet, n, data)
    }

    /// `Q = map(x,y)` deterministically.
    pub fn deterministic(q_alphabet: Alphabet, map: Vec<usize>) -> Result<Self> {
        if let Some((r, &q)) = map
            .iter()
            .enumerate()
            .find(|(_, &q)| q >= q_alphabet.size())
        {
            return Err(Error::DimensionMismatch(format!(
                "row {r} maps to symbol {q} outside an alphabet of {}",
                q_alphabet.size()
            )));
        }
        Ok(Self {
            q_alphabet,
            rows: map.len(),
            kernel: Kernel::Deterministic(map),
        })
    }

    /// `Q` constant.
    pub fn constant(rows: usize) -> Self {
        Self {
            q_alphabet: Alphabet::indexed(1),
            rows,
            kernel: Kernel::Deterministic(vec![0; rows]),
        }
    }

    /// `Q = X` for a joint with `nx × ny` cells.
    pub fn reveal_x(x_alphabet: &Alphabet, ny: usize) -> Self {
        let nx = x_alphabet.size();
        let map = (0..nx * ny).map(|r| r / ny).collect();
        Self {
            q_alphabet: x_alphabet.clone(),
            rows: nx * ny,
            kernel: Kernel::Deterministic(map),
        }
    }

    /// `Q = Y` for a joint with `nx × ny` cells.
    pub fn reveal_y(nx: usize, y_alphabet: &Alphabet) -> Self {
        let ny = y_alphabet.size();
        let map = (0..nx * ny).map(|r| r % ny).collect();
        Self {
            q_alphabet: y_alphabet.clone(),
            rows: nx * ny,
            kernel: Kernel::Deterministic(map),
        }
    }

    /// `Q = (X,Y)`.
    pub fn reveal_xy(x_alphabet: &Alphabet, y_alphabet: &Alphabet) -> Self {
        let n = x_alphabet.size() * y_alphabet.size();
        Self {
            q_alphabet: x_alphabet.product(y_alphabet),
            rows: n,
            kernel: Kernel::Deterministic((0..n).collect()),
        }
    }

    pub fn q_alphabet(&self) -> &Alphabet {
        &self.q_alphabet
    }

    pub fn q_size(&self) -> usize {
        self.q_alphabet.size()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self.kernel, Kernel::Deterministic(_))
    }

    pub fn prob(&self, row: usize, q: usize) -> f64 {
        match &self.kernel {
            Kernel::Dense(k) => k[row * self.q_size() + q],
            Kernel::Deterministic(m) => {
                if m[row] == q {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Calls `f(q, p)` for every symbol of `row` with positive probability.
    #[inline]
    pub fn for_each_in_row(&self, row: usize, mut f: impl FnMut(usize, f64)) {
        match &self.kernel {
            Kernel::Dense(k) => {
                let nq = self.q_size();
                for (q, &p) in k[row * nq..(row + 1) * nq].iter().enumerate() {
                    if p > 0.0 {
                        f(q, p);
                    }
                }
            }
            Kernel::Deterministic(m) => f(m[row], 1.0),
        }
    }

    /// Row-major dense kernel.
    pub fn to_dense(&self) -> Vec<f64> {
        match &self.kernel {
            Kernel::Dense(k) => k.clone(),
            Kernel::Deterministic(m) => {
                let nq = self.q_size();
                let mut k = vec![0.0; self.rows * nq];
                for (r, &q) in m.iter().enumerate() {
                    k[r * nq + q] = 1.0;
                }
                k
            }
        }
    }

    /// Same channel with `extra` unused symbols appended to the alphabet.
    pub fn padded_to(&self, q_size: usize) -> Result<Channel> {
        let nq = self.q_size();
        if q_size < nq {
            return Err(Error::DimensionMismatch(format!(
                "cannot pad a {nq}-symbol channel down to {q_size}"
            )));
        }
        let mut labels = self.q_alphabet.labels().to_vec();
        let mut k = 0;
        while labels.len() < q_size {
            let candidate = format!("unused{k}");
            if !labels.contains(&candidate) {
                labels.push(candidate);
            }
            k += 1;
        }
        let q_alphabet = Alphabet { labels };
        Ok(match &self.kernel {
            Kernel::Deterministic(m) => Channel {
                q_alphabet,
                rows: self.rows,
                kernel: Kernel::Deterministic(m.clone()),
            },
            Kernel::Dense(d) => {
                let mut data = vec![0.0; self.rows * q_size];
                for r in 0..self.rows {
                    data[r * q_size..r * q_size + nq].copy_from_slice(&d[r * nq..(r + 1) * nq]);
                }
                Channel {
                    q_alphabet,
                    rows: self.rows,
                    kernel: Kernel::Dense(data),
                }
            }
        })
    }
}

#[derive(Serialize, Deserialize)]
struct ChannelFile {
    q_alphabet: Alphabet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kernel: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    map: Option<Vec<usize>>,
}

impl Serialize for Channel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let file = match &self.kernel {
            Kernel::Dense(k) => ChannelFile {
                q_alphabet: self.q_alphabet.clone(),
                kernel: Some(k.chunks(self.q_size()).map(<[f64]>::to_vec).collect()),
                map: None,
            },
            Kernel::Deterministic(m) => ChannelFile {
                q_alphabet: self.q_alphabet.clone(),
                kernel: None,
                map: Some(m.clone()),
            },
        };
        file.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Channel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let f = ChannelFile::deserialize(d)?;
        match (f.kernel, f.map) {
            (Some(rows), None) => Channel::from_rows(f.q_alphabet, rows).map_err(D::Error::custom),
            (None, Some(map)) => {
                Channel::deterministic(f.q_alphabet, map).map_err(D::Error::custom)
            }
            _ => Err(D::Error::custom(
                "channel needs exactly one of `kernel` or `map`",
            )),
        }
    }
}

pub(crate) fn check_channel(j: &JointPMF, c: &Channel) -> Result<()> {
    if c.rows() != j.nx() * j.ny() {
        return Err(Error::DimensionMismatch(format!(
            "channel has {} rows but the joint has {}x{} cells",
            c.rows(),
            j.nx(),
            j.ny()
        )));
    }
    Ok(())
}

/// A variable of the extended triple `(X, Y, Q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
    Q,
}

/// Dense `p(x,y,q) = p(x,y) p(q|x,y)`.
#[derive(Clone, Debug)]
pub struct ExtendedJoint {
    nx: usize,
    ny: usize,
    nq: usize,
    mass3: Vec<f64>,
}

impl ExtendedJoint {
    pub fn new(base: &JointPMF, channel: &Channel) -> Result<Self> {
        check_channel(base, channel)?;
        let (nx, ny, nq) = (base.nx(), base.ny(), channel.q_size());
        let mut mass3 = vec![0.0; nx * ny * nq];
        for (cell, &w) in base.masses().iter().enumerate() {
            channel.for_each_in_row(cell, |q, k| mass3[cell * nq + q] = w * k);
        }
        Ok(Self { nx, ny, nq, mass3 })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nq)
    }

    #[inline]
    pub fn p(&self, x: usize, y: usize, q: usize) -> f64 {
        self.mass3[(x * self.ny + y) * self.nq + q]
    }

    /// Marginal over `(X, Y)`.
    pub fn base_marginal(&self) -> Vec<f64> {
        self.mass3.chunks(self.nq).map(|c| c.iter().sum()).collect()
    }

    /// Joint entropy of the listed variables.
    pub fn entropy_of(&self, vars: &[Var]) -> f64 {
        let keep = |v: Var| vars.contains(&v);
        let dx = if keep(Var::X) { self.nx } else { 1 };
        let dy = if keep(Var::Y) { self.ny } else { 1 };
        let dq = if keep(Var::Q) { self.nq } else { 1 };
        let mut m = vec![0.0; dx * dy * dq];
        for x in 0..self.nx {
            let ix = if keep(Var::X) { x } else { 0 };
            for y in 0..self.ny {
                let iy = if keep(Var::Y) { y } else { 0 };
                for q in 0..self.nq {
                    let iq = if keep(Var::Q) { q } else { 0 };
                    m[(ix * dy + iy) * dq + iq] += self.p(x, y, q);
                }
            }
        }
        entropy_unchecked(m)
    }
}

/// `I(A;B|C)` for distinct `A, B, C` drawn from `{X, Y, Q}`.
pub fn conditional_mutual_information(j: &ExtendedJoint, a: Var, b: Var, c: Var) -> Result<f64> {
    if a == b || a == c || b == c {
        return Err(Error::OutOfRange(format!(
            "variables {a:?}, {b:?}, {c:?} must be pairwise distinct"
        )));
    }
    let v = j.entropy_of(&[a, c]) + j.entropy_of(&[b, c])
        - j.entropy_of(&[a, b, c])
        - j.entropy_of(&[c]);
    Ok(v.max(0.0))
}

/// `(I(Y;Q|X), I(X;Q|Y), I(X;Y|Q))` in bits.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct TensionPoint {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl TensionPoint {
    pub const ORIGIN: TensionPoint = TensionPoint {
        r1: 0.0,
        r2: 0.0,
        r3: 0.0,
    };

    pub fn new(r1: f64, r2: f64, r3: f64) -> Self {
        Self { r1, r2, r3 }
    }

    /// Clamps numerical noise below zero.
    pub fn clamped(raw: [f64; 3]) -> Self {
        debug_assert!(
            raw.iter().all(|v| *v >= -NOISE_FLOOR * 1e3),
            "information quantity far below zero: {raw:?}"
        );
        Self::new(
            raw[0].max(0.0) + 0.0,
            raw[1].max(0.0) + 0.0,
            raw[2].max(0.0) + 0.0,
        )
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.r1, self.r2, self.r3]
    }

    pub fn dot(self, w: [f64; 3]) -> f64 {
        self.r1 * w[0] + self.r2 * w[1] + self.r3 * w[2]
    }

    pub fn sum(self) -> f64 {
        self.r1 + self.r2 + self.r3
    }

    pub fn max_abs_diff(self, other: TensionPoint) -> f64 {
        (self.r1 - other.r1)
            .abs()
            .max((self.r2 - other.r2).abs())
            .max((self.r3 - other.r3).abs())
    }

    /// Componentwise `self ≤ other + tol`.
    pub fn dominated_by(self, other: TensionPoint, tol: f64) -> bool {
        self.r1 <= other.r1 + tol && self.r2 <= other.r2 + tol && self.r3 <= other.r3 + tol
    }

    pub fn scaled(self, f: f64) -> Self {
        Self::new(self.r1 * f, self.r2 * f, self.r3 * f)
    }
}

impl std::ops::Add for TensionPoint {
    type Output = TensionPoint;

    fn add(self, o: TensionPoint) -> TensionPoint {
        TensionPoint::new(self.r1 + o.r1, self.r2 + o.r2, self.r3 + o.r3)
    }
}

impl Serialize for TensionPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_array().serialize(s)
    }
}

impl<'de> Deserialize<'de> for TensionPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [r1, r2, r3] = <[f64; 3]>::deserialize(d)?;
        Ok(TensionPoint::new(r1, r2, r3))
    }
}

/// Entropies `H(XQ), H(YQ), H(XYQ), H(Q)` accumulated without building
/// the dense `p(x,y,q)` tensor.
pub(crate) struct ChannelEntropies {
    pub hxq: f64,
    pub hyq: f64,
    pub hxyq: f64,
    pub hq: f64,
}

pub(crate) fn channel_entropies(j: &JointPMF, c: &Channel) -> ChannelEntropies {
    let (nx, ny, nq) = (j.nx(), j.ny(), c.q_size());
    let mut pxq = vec![0.0; nx * nq];
    let mut pyq = vec![0.0; ny * nq];
    let mut pq = vec![0.0; nq];
    let mut hxyq = 0.0;
    for x in 0..nx {
        for y in 0..ny {
            let w = j.p(x, y);
            if w <= 0.0 {
                continue;
            }
            c.for_each_in_row(x * ny + y, |q, k| {
                let m = w * k;
                pxq[x * nq + q] += m;
                pyq[y * nq + q] += m;
                pq[q] += m;
                hxyq += h_term(m);
            });
        }
    }
    ChannelEntropies {
        hxq: entropy_unchecked(pxq),
        hyq: entropy_unchecked(pyq),
        hxyq,
        hq: entropy_unchecked(pq),
    }
}

/// Unclamped tension triple.
pub(crate) fn tension_raw(j: &JointPMF, c: &Channel) -> Result<[f64; 3]> {
    check_channel(j, c)?;
    let e = channel_entropies(j, c);
    let (hx, hy, hxy) = (j.entropy_x(), j.entropy_y(), j.entropy_xy());
    Ok([
        hxy - hx - e.hxyq + e.hxq,
        hxy - hy - e.hxyq + e.hyq,
        e.hxq + e.hyq - e.hxyq - e.hq,
    ])
}

/// The tension of `(X,Y)` given `Q`.
pub fn tension_of(j: &JointPMF, c: &Channel) -> Result<TensionPoint> {
    tension_raw(j, c).map(TensionPoint::clamped)
}

/// Total variation distance `½ Σ |p - q|`.
pub fn total_variation(p: &JointPMF, q: &JointPMF) -> Result<f64> {
    if p.nx() != q.nx() || p.ny() != q.ny() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{} alphabets",
            p.nx(),
            p.ny(),
            q.nx(),
            q.ny()
        )));
    }
    let d: f64 = p
        .masses()
        .iter()
        .zip(q.masses())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok((0.5 * d).min(1.0))
}

/// Independent pair `((X1,X2), (Y1,Y2))` with tensor-product masses.
pub fn product(j1: &JointPMF, j2: &JointPMF) -> JointPMF {
    let (nx1, ny1, nx2, ny2) = (j1.nx(), j1.ny(), j2.nx(), j2.ny());
    let ny = ny1 * ny2;
    let mut mass = vec![0.0; nx1 * nx2 * ny];
    for x1 in 0..nx1 {
        for x2 in 0..nx2 {
            let x = x1 * nx2 + x2;
            for y1 in 0..ny1 {
                let a = j1.p(x1, y1);
                for y2 in 0..ny2 {
                    mass[x * ny + y1 * ny2 + y2] = a * j2.p(x2, y2);
                }
            }
        }
    }
    JointPMF {
        x_alphabet: j1.x_alphabet.product(&j2.x_alphabet),
        y_alphabet: j1.y_alphabet.product(&j2.y_alphabet),
        mass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z_source(p: f64) -> JointPMF {
        JointPMF::from_matrix(2, 2, vec![p, 0.0, 1.0 - 2.0 * p, p]).unwrap()
    }

    fn bit_ot() -> JointPMF {
        // A = (s1,s2), B = (c,s_c)
        let mut m = vec![0.0; 16];
        for s1 in 0..2 {
            for s2 in 0..2 {
                let a = s1 * 2 + s2;
                m[a * 4 + s1] = 0.125;
                m[a * 4 + 2 + s2] = 0.125;
            }
        }
        JointPMF::from_matrix(4, 4, m).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&[0.5, 0.5]).unwrap(), 1.0);
        assert_eq!(entropy(&[0.0, 1.0, 0.0]).unwrap(), 0.0);
        let third = 1.0 / 3.0;
        let direct = third * 3f64.log2() + 2.0 * third * (1.5f64).log2();
        assert!((entropy(&[third, 2.0 * third]).unwrap() - direct).abs() < 1e-15);
        assert!((direct - 0.918_295_834_054_489_6).abs() < 1e-12);
        assert!(entropy(&[0.6, 0.6]).is_err());
        assert!(entropy(&[-0.1, 1.1]).is_err());
    }

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        let direct = -0.11 * 0.11f64.log2() - 0.89 * 0.89f64.log2();
        assert!((binary_entropy(0.11).unwrap() - direct).abs() < 1e-15);
        assert!((direct - 0.499_915_958_164_528_3).abs() < 1e-12);
        assert!((binary_entropy(0.3).unwrap() - binary_entropy(0.7).unwrap()).abs() < 1e-15);
        assert!(binary_entropy(1.2).is_err());
    }

    #[test]
    fn joint_validation_names_location() {
        let err = JointPMF::from_matrix(2, 2, vec![0.5, -0.1, 0.3, 0.3]).unwrap_err();
        assert!(err.to_string().contains("pmf[0][1]"), "{err}");
        let err = JointPMF::from_matrix(2, 2, vec![0.5, 0.2, 0.3, 0.3]).unwrap_err();
        assert!(err.to_string().contains("row 0 sums to 0.7"), "{err}");
        assert!(Alphabet::new(["a", "a"]).is_err());
    }

    #[test]
    fn cmi_examples() {
        let j = z_source(0.25);
        let ext = ExtendedJoint::new(&j, &Channel::constant(4)).unwrap();
        let v = conditional_mutual_information(&ext, Var::X, Var::Y, Var::Q).unwrap();
        assert!((v - j.mutual_information()).abs() < 1e-12);

        let ext = ExtendedJoint::new(&j, &Channel::reveal_x(j.x_alphabet(), 2)).unwrap();
        let v = conditional_mutual_information(&ext, Var::Y, Var::Q, Var::X).unwrap();
        assert!(v.abs() < 1e-12);

        let ot = bit_ot();
        let ext = ExtendedJoint::new(&ot, &Channel::constant(16)).unwrap();
        let v = conditional_mutual_information(&ext, Var::X, Var::Y, Var::Q).unwrap();
        assert!((v - 1.0).abs() < 1e-12);

        assert!(conditional_mutual_information(&ext, Var::X, Var::X, Var::Q).is_err());
    }

    #[test]
    fn tension_of_trivial_channels() {
        let j = z_source(0.25);
        let t = tension_of(&j, &Channel::constant(4)).unwrap();
        assert!(t.max_abs_diff(TensionPoint::new(0.0, 0.0, j.mutual_information())) < 1e-12);
        let t = tension_of(&j, &Channel::reveal_xy(j.x_alphabet(), j.y_alphabet())).unwrap();
        let hy_x = j.entropy_xy() - j.entropy_x();
        let hx_y = j.entropy_xy() - j.entropy_y();
        assert!(t.max_abs_diff(TensionPoint::new(hy_x, hx_y, 0.0)) < 1e-12);
        assert!(tension_of(&j, &Channel::constant(3)).is_err());
    }

    #[test]
    fn tension_routes_agree() {
        let j = bit_ot();
        let c = Channel::new(
            Alphabet::indexed(3),
            16,
            (0..48).map(|i| [0.2, 0.3, 0.5][i % 3]).collect(),
        )
        .unwrap();
        let t = tension_of(&j, &c).unwrap();
        let ext = ExtendedJoint::new(&j, &c).unwrap();
        let r1 = conditional_mutual_information(&ext, Var::Y, Var::Q, Var::X).unwrap();
        let r2 = conditional_mutual_information(&ext, Var::X, Var::Q, Var::Y).unwrap();
        let r3 = conditional_mutual_information(&ext, Var::X, Var::Y, Var::Q).unwrap();
        assert!(t.max_abs_diff(TensionPoint::new(r1, r2, r3)) < 1e-12);
    }

    #[test]
    fn total_variation_examples() {
        let a = z_source(0.25);
        assert_eq!(total_variation(&a, &a).unwrap(), 0.0);
        let d = total_variation(&a, &z_source(0.20)).unwrap();
        assert!((d - 0.10).abs() < 1e-12);
        let p = JointPMF::from_matrix(2, 2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let q = JointPMF::from_matrix(2, 2, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(total_variation(&p, &q).unwrap(), 1.0);
        assert!(total_variation(&a, &bit_ot()).is_err());
    }

    #[test]
    fn product_examples() {
        let bit = JointPMF::from_matrix(2, 1, vec![0.5, 0.5]).unwrap();
        let uni = product(&bit, &bit);
        assert_eq!(uni.nx(), 4);
        assert!(uni.masses().iter().all(|&m| m == 0.25));

        let point = JointPMF::from_matrix(1, 1, vec![1.0]).unwrap();
        let z = z_source(0.25);
        assert_eq!(product(&z, &point).masses(), z.masses());

        let ot2 = product(&bit_ot(), &bit_ot());
        assert_eq!((ot2.nx(), ot2.ny()), (16, 16));
        assert!((ot2.mutual_information() - 2.0).abs() < 1e-12);
        assert_eq!(ot2.x_alphabet().label(5), "(1,1)");
    }

    #[test]
    fn channel_json_forms() {
        let c = Channel::reveal_x(&Alphabet::indexed(2), 2);
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, r#"{"q_alphabet":["0","1"],"map":[0,0,1,1]}"#);
        let back: Channel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        let dense: Channel =
            serde_json::from_str(r#"{"q_alphabet":["a","b"],"kernel":[[0.5,0.5],[1,0]]}"#).unwrap();
        assert_eq!(dense.prob(1, 0), 1.0);
        assert!(
            serde_json::from_str::<Channel>(r#"{"q_alphabet":["a"],"kernel":[[0.5]]}"#).is_err()
        );
    }
}
