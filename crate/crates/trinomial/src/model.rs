//! Defining data of a trinomial algebra and its validation.
//!
//! An algebra is described by exponent blocks `l_i = (l_i1, …, l_i n_i)`,
//! a count `m` of free variables `S_1..S_m`, and scalar data attached to the
//! relations:
//!
//! * **Type 1** — blocks are labelled `1..r`, the scalars are pairwise
//!   distinct rationals `a_1..a_r`, and the relations are the chain
//!   `g_i = T_i^{l_i} − T_{i+1}^{l_{i+1}} − (a_{i+1} − a_i)` for `1 ≤ i < r`.
//! * **Type 2** — blocks are labelled `0..r`, the scalars form a rational
//!   `2×(r+1)` matrix with pairwise linearly independent columns
//!   `a_0..a_r`, and `g_i` is the determinant of the 2×3 array stacking
//!   `(T_i^{l_i}, T_{i+1}^{l_{i+1}}, T_{i+2}^{l_{i+2}})` over
//!   `(a_i, a_{i+1}, a_{i+2})`, expanded along the first row.

use num::{BigInt, BigRational, One, Zero};
use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use thiserror::Error;

use crate::polyring::Poly;

/// Selects the shape of the scalar data and of the relations `g_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TrinomialKind {
    Type1,
    Type2,
}

/// A rational column of the type-2 scalar matrix.
pub type Column = [BigRational; 2];

/// Scalar data attached to the relations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ScalarData {
    /// `a_1..a_r`, one rational per block.
    Type1(Vec<BigRational>),
    /// Columns `a_0..a_r` of a rational 2×(r+1) matrix, one per block.
    Type2(Vec<Column>),
}

/// One generator of the ambient polynomial ring.
///
/// `T { block, pos }` uses the block label (`1..r` for type 1, `0..r` for
/// type 2) and a 1-based position inside the block; `S { index }` is 1-based.
/// The derived order — all `T`s by (block, pos), then all `S`s — is the fixed
/// generator order used for monomials everywhere in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GeneratorId {
    T { block: usize, pos: usize },
    S { index: usize },
}

impl fmt::Display for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorId::T { block, pos } => write!(f, "T[{block}][{pos}]"),
            GeneratorId::S { index } => write!(f, "S[{index}]"),
        }
    }
}

/// Structural problems that make the data impossible to even index.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShapeError {
    #[error("at least one exponent block is required")]
    NoBlocks,
    #[error("exponent block {0} is empty")]
    EmptyBlock(usize),
    #[error("scalar data covers {scalars} blocks but {blocks} exponent blocks were given")]
    ScalarCountMismatch { scalars: usize, blocks: usize },
}

/// A violated hypothesis found by [`TrinomialData::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationIssue {
    /// Fewer blocks than needed for a single relation to exist.
    TooFewBlocks { required: usize, found: usize },
    /// `l[block][pos] < 1`.
    BadExponent { block: usize, pos: usize },
    /// Type 1: `a_i = a_j` for `i < j`.
    DuplicateScalar { i: usize, j: usize },
    /// Type 2: `det(a_i, a_j) = 0` for `i < j`.
    DependentColumns { i: usize, j: usize },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::TooFewBlocks { required, found } => {
                write!(f, "too few exponent blocks: need {required}, found {found}")
            }
            ValidationIssue::BadExponent { block, pos } => {
                write!(f, "exponent l[{block}][{pos}] must be at least 1")
            }
            ValidationIssue::DuplicateScalar { i, j } => {
                write!(f, "scalars a_{i} and a_{j} coincide")
            }
            ValidationIssue::DependentColumns { i, j } => {
                write!(f, "matrix columns a_{i} and a_{j} are linearly dependent")
            }
        }
    }
}

/// Outcome of validating a [`TrinomialData`] against its hypotheses.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            write!(f, "OK")
        } else {
            for (n, issue) in self.issues.iter().enumerate() {
                if n > 0 {
                    writeln!(f)?;
                }
                write!(f, "{issue}")?;
            }
            Ok(())
        }
    }
}

/// The full defining data of a trinomial algebra.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TrinomialData {
    blocks: Vec<Vec<u32>>,
    scalars: ScalarData,
    m: usize,
}

impl TrinomialData {
    /// Type-1 data: blocks `l_1..l_r` and scalars `a_1..a_r`.
    pub fn type1(
        blocks: Vec<Vec<u32>>,
        scalars: Vec<BigRational>,
        m: usize,
    ) -> Result<Self, ShapeError> {
        Self::check_shape(&blocks, scalars.len(), 1)?;
        Ok(TrinomialData { blocks, scalars: ScalarData::Type1(scalars), m })
    }

    /// Type-2 data: blocks `l_0..l_r` and matrix columns `a_0..a_r`.
    pub fn type2(
        blocks: Vec<Vec<u32>>,
        columns: Vec<Column>,
        m: usize,
    ) -> Result<Self, ShapeError> {
        Self::check_shape(&blocks, columns.len(), 0)?;
        Ok(TrinomialData { blocks, scalars: ScalarData::Type2(columns), m })
    }

    fn check_shape(blocks: &[Vec<u32>], scalar_count: usize, iota: usize) -> Result<(), ShapeError> {
        if blocks.is_empty() {
            return Err(ShapeError::NoBlocks);
        }
        for (idx, b) in blocks.iter().enumerate() {
            if b.is_empty() {
                return Err(ShapeError::EmptyBlock(idx + iota));
            }
        }
        if scalar_count != blocks.len() {
            return Err(ShapeError::ScalarCountMismatch {
                scalars: scalar_count,
                blocks: blocks.len(),
            });
        }
        Ok(())
    }

    pub fn kind(&self) -> TrinomialKind {
        match self.scalars {
            ScalarData::Type1(_) => TrinomialKind::Type1,
            ScalarData::Type2(_) => TrinomialKind::Type2,
        }
    }

    /// Label of the first block: 1 for type 1, 0 for type 2.
    pub fn iota(&self) -> usize {
        match self.kind() {
            TrinomialKind::Type1 => 1,
            TrinomialKind::Type2 => 0,
        }
    }

    /// Label of the last block; blocks are labelled `iota()..=r()`.
    pub fn r(&self) -> usize {
        self.blocks.len() - 1 + self.iota()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Block labels in order.
    pub fn block_labels(&self) -> impl Iterator<Item = usize> {
        self.iota()..=self.r()
    }

    /// Exponent tuple of the block with the given label.
    pub fn l(&self, label: usize) -> &[u32] {
        &self.blocks[label - self.iota()]
    }

    pub fn block_size(&self, label: usize) -> usize {
        self.l(label).len()
    }

    pub fn scalars(&self) -> &ScalarData {
        &self.scalars
    }

    /// Type-2 column `a_label`; panics on type-1 data.
    pub fn column(&self, label: usize) -> &Column {
        match &self.scalars {
            ScalarData::Type2(cols) => &cols[label],
            ScalarData::Type1(_) => panic!("type-1 data has no matrix columns"),
        }
    }

    /// Type-1 scalar `a_label`; panics on type-2 data.
    pub fn scalar(&self, label: usize) -> &BigRational {
        match &self.scalars {
            ScalarData::Type1(a) => &a[label - 1],
            ScalarData::Type2(_) => panic!("type-2 data has no scalar list"),
        }
    }

    /// Number of `T` generators.
    pub fn n(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    /// Number of `S` generators.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Total number of generators `n + m`.
    pub fn num_gens(&self) -> usize {
        self.n() + self.m
    }

    /// Linear index of the first generator of the given block.
    pub fn block_offset(&self, label: usize) -> usize {
        self.blocks[..label - self.iota()].iter().map(Vec::len).sum()
    }

    /// All generators in the fixed order.
    pub fn generators(&self) -> Vec<GeneratorId> {
        let mut out = Vec::with_capacity(self.num_gens());
        for label in self.block_labels() {
            for pos in 1..=self.block_size(label) {
                out.push(GeneratorId::T { block: label, pos });
            }
        }
        for index in 1..=self.m {
            out.push(GeneratorId::S { index });
        }
        out
    }

    /// Linear index of a generator, if its indices are in bounds.
    pub fn gen_index(&self, g: GeneratorId) -> Option<usize> {
        match g {
            GeneratorId::T { block, pos } => {
                if block < self.iota() || block > self.r() {
                    return None;
                }
                if pos == 0 || pos > self.block_size(block) {
                    return None;
                }
                Some(self.block_offset(block) + pos - 1)
            }
            GeneratorId::S { index } => {
                if index == 0 || index > self.m {
                    return None;
                }
                Some(self.n() + index - 1)
            }
        }
    }

    /// Generator at a linear index; panics when out of range.
    pub fn gen_at(&self, idx: usize) -> GeneratorId {
        let n = self.n();
        if idx >= n {
            assert!(idx < self.num_gens(), "generator index out of range");
            return GeneratorId::S { index: idx - n + 1 };
        }
        let mut rest = idx;
        for label in self.block_labels() {
            let size = self.block_size(label);
            if rest < size {
                return GeneratorId::T { block: label, pos: rest + 1 };
            }
            rest -= size;
        }
        unreachable!()
    }

    /// Exponent vector (over all generators) of the block monomial `T_i^{l_i}`.
    pub fn block_monomial_exps(&self, label: usize) -> Vec<u32> {
        let mut exps = vec![0u32; self.num_gens()];
        let off = self.block_offset(label);
        for (j, &e) in self.l(label).iter().enumerate() {
            exps[off + j] = e;
        }
        exps
    }

    /// Exponent matrix `P0` (one row per relation-driving block pair).
    ///
    /// Type 1: row `i-1` places `l_i` in block `i` (`i = 1..r`).
    /// Type 2: row `i-1` places `−l_0` in block 0 and `l_i` in block `i`.
    pub fn p0(&self) -> Vec<Vec<BigInt>> {
        let cols = self.num_gens();
        let mut rows = Vec::new();
        match self.kind() {
            TrinomialKind::Type1 => {
                for label in 1..=self.r() {
                    let mut row = vec![BigInt::zero(); cols];
                    let off = self.block_offset(label);
                    for (j, &e) in self.l(label).iter().enumerate() {
                        row[off + j] = BigInt::from(e);
                    }
                    rows.push(row);
                }
            }
            TrinomialKind::Type2 => {
                for label in 1..=self.r() {
                    let mut row = vec![BigInt::zero(); cols];
                    for (j, &e) in self.l(0).iter().enumerate() {
                        row[j] = -BigInt::from(e);
                    }
                    let off = self.block_offset(label);
                    for (j, &e) in self.l(label).iter().enumerate() {
                        row[off + j] = BigInt::from(e);
                    }
                    rows.push(row);
                }
            }
        }
        rows
    }

    /// Deterministic fingerprint used to detect mixed-algebra operands.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.hash(&mut h);
        h.finish()
    }

    /// Checks the defining hypotheses; the report lists every violation.
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        let required = match self.kind() {
            TrinomialKind::Type1 => 2,
            TrinomialKind::Type2 => 3,
        };
        if self.num_blocks() < required {
            issues.push(ValidationIssue::TooFewBlocks { required, found: self.num_blocks() });
        }
        for label in self.block_labels() {
            for (j, &e) in self.l(label).iter().enumerate() {
                if e == 0 {
                    issues.push(ValidationIssue::BadExponent { block: label, pos: j + 1 });
                }
            }
        }
        match &self.scalars {
            ScalarData::Type1(a) => {
                for i in 0..a.len() {
                    for j in i + 1..a.len() {
                        if a[i] == a[j] {
                            issues.push(ValidationIssue::DuplicateScalar { i: i + 1, j: j + 1 });
                        }
                    }
                }
            }
            ScalarData::Type2(cols) => {
                for i in 0..cols.len() {
                    for j in i + 1..cols.len() {
                        if det2(&cols[i], &cols[j]).is_zero() {
                            issues.push(ValidationIssue::DependentColumns { i, j });
                        }
                    }
                }
            }
        }
        ValidationReport { issues }
    }

    /// Labels of the relations `g_i`: `1..r-1` for type 1, `0..r-2` for type 2.
    pub fn relation_labels(&self) -> Vec<usize> {
        match self.kind() {
            TrinomialKind::Type1 => (1..self.r()).collect(),
            TrinomialKind::Type2 => (0..self.r().saturating_sub(1)).collect(),
        }
    }

    /// The defining polynomials `g_i` in the free ring, in label order.
    pub fn defining_polynomials(&self) -> Vec<Poly> {
        let ctx = self.fingerprint();
        let nvars = self.num_gens();
        let block = |label: usize, coeff: BigRational| {
            Poly::from_term(ctx, nvars, self.block_monomial_exps(label), coeff)
        };
        let mut out = Vec::new();
        match &self.scalars {
            ScalarData::Type1(a) => {
                for i in 1..self.r() {
                    let mut g = block(i, BigRational::one());
                    g = g.sub_ref(&block(i + 1, BigRational::one()));
                    let c = &a[i] - &a[i - 1]; // a_{i+1} - a_i with 0-based storage
                    g = g.sub_ref(&Poly::from_term(ctx, nvars, vec![0; nvars], c));
                    out.push(g);
                }
            }
            ScalarData::Type2(cols) => {
                for i in self.relation_labels() {
                    let c0 = det2(&cols[i + 1], &cols[i + 2]);
                    let c1 = det2(&cols[i], &cols[i + 2]);
                    let c2 = det2(&cols[i], &cols[i + 1]);
                    let g = block(i, c0)
                        .sub_ref(&block(i + 1, c1))
                        .add_ref(&block(i + 2, c2));
                    out.push(g);
                }
            }
        }
        out
    }
}

/// 2×2 determinant of two rational columns.
pub fn det2(x: &Column, y: &Column) -> BigRational {
    &x[0] * &y[1] - &x[1] * &y[0]
}

/// Convenience constructor for integer-valued rationals.
pub fn rat(p: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(p))
}

/// Convenience constructor for `p/q`.
pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}
