//! The finest grading group `K₀ = ℤ^{n+m}/im(P₀ᵀ)` and its degree map.
//!
//! The quotient is presented through a Smith normal form `U·P₀ᵀ·V = D` with
//! both transforms unimodular and `U⁻¹` tracked alongside `U`. Writing
//! `y = U·v`, the class of `v` is read off coordinatewise: positions whose
//! invariant factor is `1` vanish, positions with factor `d ≥ 2` live in
//! `ℤ/d`, and the remaining positions are free. Generator degrees, the
//! common block degree `μ`, the `S`-coordinate functionals and the
//! compatibility check for externally proposed gradings all reduce to
//! integer linear algebra against `U` and `U⁻¹`.

use num::{BigInt, One, Signed, Zero};
use std::fmt;
use thiserror::Error;

use crate::model::{TrinomialData, TrinomialKind, ValidationReport};
use crate::polyring::Monomial;

/// A dense integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMat {
    rows: usize,
    cols: usize,
    data: Vec<Vec<BigInt>>,
}

impl IntMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMat { rows, cols, data: vec![vec![BigInt::zero(); cols]; rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMat::zeros(n, n);
        for i in 0..n {
            m.data[i][i] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        IntMat { rows: r, cols: c, data: rows }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        IntMat::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i][j] = v;
    }

    pub fn transpose(&self) -> IntMat {
        let mut out = IntMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j][i] = self.data[i][j].clone();
            }
        }
        out
    }

    pub fn mul(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.data[i][k].is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = &self.data[i][k] * &other.data[k][j];
                    out.data[i][j] += prod;
                }
            }
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == IntMat::identity(self.rows)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|row| row.iter().all(Zero::is_zero))
    }

    /// Matrix–vector product.
    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        self.data
            .iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn swap_rows(&mut self, i: usize, k: usize) {
        self.data.swap(i, k);
    }

    fn swap_cols(&mut self, j: usize, k: usize) {
        for row in &mut self.data {
            row.swap(j, k);
        }
    }

    /// `row_i += c · row_k`.
    fn add_row(&mut self, i: usize, k: usize, c: &BigInt) {
        for j in 0..self.cols {
            let delta = c * &self.data[k][j];
            self.data[i][j] += delta;
        }
    }

    /// `col_j += c · col_k`.
    fn add_col(&mut self, j: usize, k: usize, c: &BigInt) {
        for row in &mut self.data {
            let delta = c * &row[k];
            row[j] += delta;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for x in &mut self.data[i] {
            *x = -std::mem::take(x);
        }
    }

    fn negate_col(&mut self, j: usize) {
        for row in &mut self.data {
            row[j] = -std::mem::take(&mut row[j]);
        }
    }
}

impl fmt::Display for IntMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, row) in self.data.iter().enumerate() {
            if n > 0 {
                writeln!(f)?;
            }
            write!(f, "[")?;
            for (k, x) in row.iter().enumerate() {
                if k > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

/// How the elimination picks its next pivot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotStrategy {
    /// Smallest nonzero absolute value in the working submatrix; keeps
    /// intermediate entries small.
    SmallestAbs,
    /// First nonzero entry in row-major order.
    FirstNonzero,
}

/// A Smith normal form `u · m · v = d` with `u`, `v` unimodular, `d`
/// diagonal with non-negative entries in a divisibility chain, and the
/// inverse of `u` tracked exactly.
#[derive(Debug, Clone)]
pub struct SnfResult {
    pub u: IntMat,
    pub u_inv: IntMat,
    pub d: IntMat,
    pub v: IntMat,
}

impl SnfResult {
    /// Diagonal entries that are nonzero, in chain order.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        let k = self.d.rows().min(self.d.cols());
        (0..k)
            .map(|i| self.d.get(i, i).clone())
            .filter(|x| !x.is_zero())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }
}

pub fn smith_normal_form(m: &IntMat) -> SnfResult {
    smith_normal_form_with(m, PivotStrategy::SmallestAbs)
}

pub fn smith_normal_form_with(m: &IntMat, strategy: PivotStrategy) -> SnfResult {
    let rows = m.rows();
    let cols = m.cols();
    let mut d = m.clone();
    let mut u = IntMat::identity(rows);
    let mut u_inv = IntMat::identity(rows);
    let mut v = IntMat::identity(cols);

    // Bookkeeping rules: a row operation on `d` is mirrored on `u` and
    // inverted on the columns of `u_inv`; a column operation goes to `v`.
    let mut t = 0;
    while t < rows.min(cols) {
        let Some((pi, pj)) = find_pivot(&d, t, strategy) else {
            break;
        };
        if pi != t {
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            u_inv.swap_cols(t, pi);
        }
        if pj != t {
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);
        }
        loop {
            // Clear the pivot column.
            let mut dirty = false;
            for i in (t + 1)..rows {
                while !d.get(i, t).is_zero() {
                    let q = d.get(i, t) / d.get(t, t);
                    if !q.is_zero() {
                        let c = -q;
                        d.add_row(i, t, &c);
                        u.add_row(i, t, &c);
                        u_inv.add_col(t, i, &-&c);
                    }
                    if !d.get(i, t).is_zero() {
                        // Remainder smaller than the pivot: promote it.
                        d.swap_rows(t, i);
                        u.swap_rows(t, i);
                        u_inv.swap_cols(t, i);
                        dirty = true;
                    }
                }
            }
            // Clear the pivot row.
            for j in (t + 1)..cols {
                while !d.get(t, j).is_zero() {
                    let q = d.get(t, j) / d.get(t, t);
                    if !q.is_zero() {
                        let c = -q;
                        d.add_col(j, t, &c);
                        v.add_col(j, t, &c);
                    }
                    if !d.get(t, j).is_zero() {
                        d.swap_cols(t, j);
                        v.swap_cols(t, j);
                        dirty = true;
                    }
                }
            }
            if dirty {
                continue;
            }
            // Enforce the divisibility chain: fold a non-divisible entry
            // into the pivot row and restart the clearing pass.
            let mut fixed = true;
            'scan: for i in (t + 1)..rows {
                for j in (t + 1)..cols {
                    if !(d.get(i, j) % d.get(t, t)).is_zero() {
                        let one = BigInt::one();
                        d.add_row(t, i, &one);
                        u.add_row(t, i, &one);
                        u_inv.add_col(i, t, &-&one);
                        fixed = false;
                        break 'scan;
                    }
                }
            }
            if fixed {
                break;
            }
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
            u_inv.negate_col(t);
        }
        t += 1;
    }
    debug_assert!(u.mul(m).mul(&v) == d, "transform identity violated");
    debug_assert!(u.mul(&u_inv).is_identity(), "inverse tracking violated");
    SnfResult { u, u_inv, d, v }
}

fn find_pivot(d: &IntMat, t: usize, strategy: PivotStrategy) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..d.rows() {
        for j in t..d.cols() {
            if d.get(i, j).is_zero() {
                continue;
            }
            match strategy {
                PivotStrategy::FirstNonzero => return Some((i, j)),
                PivotStrategy::SmallestAbs => {
                    if best.is_none_or(|(bi, bj)| d.get(i, j).abs() < d.get(bi, bj).abs()) {
                        best = Some((i, j));
                    }
                }
            }
        }
    }
    best
}

/// An element of `K₀` in the pinned coordinates: a free integer vector and
/// torsion residues reduced to `[0, d_t)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement {
    free: Vec<BigInt>,
    torsion: Vec<BigInt>,
}

impl GroupElement {
    pub fn free_part(&self) -> &[BigInt] {
        &self.free
    }

    pub fn torsion_part(&self) -> &[BigInt] {
        &self.torsion
    }

    pub fn is_zero(&self) -> bool {
        self.free.iter().all(Zero::is_zero) && self.torsion.iter().all(Zero::is_zero)
    }
}

/// Failures of grading construction or compatibility checking.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GradingError {
    #[error("defining data is invalid: {0}")]
    InvalidData(ValidationReport),
    #[error("assignment does not make relation {0} homogeneous")]
    Incompatible(usize),
    #[error("internal consistency violation: {0}")]
    InternalInconsistency(String),
}

/// The grading group `K₀` with the degree data of one algebra.
#[derive(Debug, Clone)]
pub struct GradingGroup {
    ctx: u64,
    nvars: usize,
    n: usize,
    m: usize,
    free_rank: usize,
    torsion: Vec<BigInt>,
    u: IntMat,
    u_inv: IntMat,
    /// Row indices of `u` that carry free coordinates.
    free_rows: Vec<usize>,
    /// Row indices of `u` carrying torsion coordinates, parallel to `torsion`.
    torsion_rows: Vec<usize>,
    gen_degrees: Vec<GroupElement>,
    mu: GroupElement,
}

/// Builds the grading group of a validated algebra.
pub fn build_grading(data: &TrinomialData) -> Result<GradingGroup, GradingError> {
    let report = data.validate();
    if !report.is_valid() {
        return Err(GradingError::InvalidData(report));
    }
    let p0 = IntMat::from_rows(data.p0());
    let p0t = p0.transpose();
    let snf = smith_normal_form(&p0t);
    let nvars = data.num_gens();
    let rank = snf.rank();
    let mut torsion = Vec::new();
    let mut torsion_rows = Vec::new();
    for (i, f) in snf.invariant_factors().into_iter().enumerate() {
        if f > BigInt::one() {
            torsion_rows.push(i);
            torsion.push(f);
        }
    }
    let free_rows: Vec<usize> = (rank..nvars).collect();
    let mut g = GradingGroup {
        ctx: data.fingerprint(),
        nvars,
        n: data.n(),
        m: data.m(),
        free_rank: free_rows.len(),
        torsion,
        u: snf.u,
        u_inv: snf.u_inv,
        free_rows,
        torsion_rows,
        gen_degrees: Vec::new(),
        mu: GroupElement { free: Vec::new(), torsion: Vec::new() },
    };
    g.gen_degrees = (0..nvars)
        .map(|idx| {
            let mut exps = vec![0u32; nvars];
            exps[idx] = 1;
            g.degree_of_exps(&exps)
        })
        .collect();
    // μ: the common degree of all block monomials. Degree-preservation of
    // the rewriting and homogeneity of the relations both rest on this.
    let mut mu: Option<GroupElement> = None;
    for label in data.block_labels() {
        let deg = g.degree_of_exps(&data.block_monomial_exps(label));
        match &mu {
            None => mu = Some(deg),
            Some(m0) if *m0 == deg => {}
            Some(_) => {
                return Err(GradingError::InternalInconsistency(format!(
                    "block monomial degrees disagree at block {label}"
                )))
            }
        }
    }
    g.mu = mu.expect("at least two blocks");
    // The S-coordinate functionals must kill every torsion and unit
    // coordinate; this is forced by the zero S-columns of P₀.
    for k in 0..g.m {
        let row = g.n + k;
        for i in 0..rank {
            if !g.u_inv.get(row, i).is_zero() {
                return Err(GradingError::InternalInconsistency(format!(
                    "S-functional {} meets a finite-order coordinate",
                    k + 1
                )));
            }
        }
    }
    Ok(g)
}

impl GradingGroup {
    pub(crate) fn ctx(&self) -> u64 {
        self.ctx
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    /// Invariant factors greater than one, in divisibility order.
    pub fn torsion(&self) -> &[BigInt] {
        &self.torsion
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn zero_element(&self) -> GroupElement {
        GroupElement {
            free: vec![BigInt::zero(); self.free_rank],
            torsion: vec![BigInt::zero(); self.torsion.len()],
        }
    }

    fn normalize(&self, mut e: GroupElement) -> GroupElement {
        for (t, d) in e.torsion.iter_mut().zip(&self.torsion) {
            *t = ((&*t % d) + d) % d;
        }
        e
    }

    pub fn element(&self, free: Vec<BigInt>, torsion: Vec<BigInt>) -> GroupElement {
        assert_eq!(free.len(), self.free_rank, "free part length");
        assert_eq!(torsion.len(), self.torsion.len(), "torsion part length");
        self.normalize(GroupElement { free, torsion })
    }

    pub fn element_from_i64(&self, free: &[i64], torsion: &[i64]) -> GroupElement {
        self.element(
            free.iter().map(|&x| BigInt::from(x)).collect(),
            torsion.iter().map(|&x| BigInt::from(x)).collect(),
        )
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.normalize(GroupElement {
            free: a.free.iter().zip(&b.free).map(|(x, y)| x + y).collect(),
            torsion: a.torsion.iter().zip(&b.torsion).map(|(x, y)| x + y).collect(),
        })
    }

    pub fn sub(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.normalize(GroupElement {
            free: a.free.iter().zip(&b.free).map(|(x, y)| x - y).collect(),
            torsion: a.torsion.iter().zip(&b.torsion).map(|(x, y)| x - y).collect(),
        })
    }

    pub fn neg(&self, a: &GroupElement) -> GroupElement {
        self.normalize(GroupElement {
            free: a.free.iter().map(|x| -x).collect(),
            torsion: a.torsion.iter().map(|x| -x).collect(),
        })
    }

    pub fn scale(&self, c: &BigInt, a: &GroupElement) -> GroupElement {
        self.normalize(GroupElement {
            free: a.free.iter().map(|x| c * x).collect(),
            torsion: a.torsion.iter().map(|x| c * x).collect(),
        })
    }

    /// Degree of a monomial given by its exponent vector.
    pub fn degree_of_exps(&self, exps: &[u32]) -> GroupElement {
        assert_eq!(exps.len(), self.nvars, "exponent vector length");
        let v: Vec<BigInt> = exps.iter().map(|&e| BigInt::from(e)).collect();
        let y = self.u.apply(&v);
        self.normalize(GroupElement {
            free: self.free_rows.iter().map(|&i| y[i].clone()).collect(),
            torsion: self.torsion_rows.iter().map(|&i| y[i].clone()).collect(),
        })
    }

    pub fn degree_of_monomial(&self, mono: &Monomial) -> GroupElement {
        self.degree_of_exps(mono.exps())
    }

    /// Degree of a single generator by its linear index.
    pub fn degree_of_gen(&self, idx: usize) -> &GroupElement {
        &self.gen_degrees[idx]
    }

    /// The common degree of all block monomials `T_i^{l_i}`.
    pub fn mu(&self) -> &GroupElement {
        &self.mu
    }

    /// The `e_k`-coefficient of `v`: for degrees of monomials this recovers
    /// the `S_k`-exponent. `k` is 1-based, matching `S[k]`.
    pub fn e_coeff(&self, k: usize, v: &GroupElement) -> BigInt {
        assert!(k >= 1 && k <= self.m, "S index out of range");
        let row = self.n + (k - 1);
        self.free_rows
            .iter()
            .enumerate()
            .map(|(j, &col)| self.u_inv.get(row, col) * &v.free[j])
            .sum()
    }

    /// An integer vector whose class is the given element.
    pub fn preimage(&self, v: &GroupElement) -> Vec<BigInt> {
        let mut y = vec![BigInt::zero(); self.nvars];
        for (j, &row) in self.free_rows.iter().enumerate() {
            y[row] = v.free[j].clone();
        }
        for (j, &row) in self.torsion_rows.iter().enumerate() {
            y[row] = v.torsion[j].clone();
        }
        self.u_inv.apply(&y)
    }

    /// Checks that a proposed assignment of weight vectors in `ℤ^q` (one
    /// column per generator) makes every defining relation homogeneous; on
    /// success returns the matrix `ψ` with `weights = ψ ∘ (free part of deg)`.
    pub fn factor_grading(
        &self,
        data: &TrinomialData,
        assignment: &IntMat,
    ) -> Result<IntMat, GradingError> {
        assert_eq!(assignment.cols(), self.nvars, "one column per generator");
        let q = assignment.rows();
        // A relation is homogeneous iff its monomials share a weight; the
        // constant term of a type-1 relation forces that weight to zero.
        for (pos, label) in data.relation_labels().into_iter().enumerate() {
            let weight = |exps: &[u32]| -> Vec<BigInt> {
                (0..q)
                    .map(|row| {
                        exps.iter()
                            .enumerate()
                            .map(|(idx, &e)| assignment.get(row, idx) * BigInt::from(e))
                            .sum()
                    })
                    .collect()
            };
            let homogeneous = match data.kind() {
                TrinomialKind::Type1 => {
                    let w1 = weight(&data.block_monomial_exps(label));
                    let w2 = weight(&data.block_monomial_exps(label + 1));
                    let zero = vec![BigInt::zero(); q];
                    w1 == w2 && w1 == zero
                }
                TrinomialKind::Type2 => {
                    let w1 = weight(&data.block_monomial_exps(pos));
                    let w2 = weight(&data.block_monomial_exps(pos + 1));
                    let w3 = weight(&data.block_monomial_exps(pos + 2));
                    w1 == w2 && w2 == w3
                }
            };
            if !homogeneous {
                return Err(GradingError::Incompatible(label));
            }
        }
        // ψ = (assignment · U⁻¹) restricted to the free columns; the unit and
        // torsion columns vanish automatically once the relations pass.
        let full = assignment.mul(&self.u_inv);
        let mut psi = IntMat::zeros(q, self.free_rank);
        for row in 0..q {
            for (j, &col) in self.free_rows.iter().enumerate() {
                psi.set(row, j, full.get(row, col).clone());
            }
        }
        Ok(psi)
    }

    /// Renders an element as `(f_1, …, f_k, [t_1 mod d_1], …)`.
    pub fn render_element(&self, v: &GroupElement) -> String {
        let mut parts: Vec<String> = v.free.iter().map(BigInt::to_string).collect();
        for (t, d) in v.torsion.iter().zip(&self.torsion) {
            parts.push(format!("[{t} mod {d}]"));
        }
        if parts.is_empty() {
            "()".to_string()
        } else {
            format!("({})", parts.join(", "))
        }
    }

    /// Renders the group shape as `Z^a (+) Z/d1 (+) …`.
    pub fn render_group(&self) -> String {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            k => parts.push(format!("Z^{k}")),
        }
        for d in &self.torsion {
            parts.push(format!("Z/{d}"));
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" (+) ")
        }
    }
}
