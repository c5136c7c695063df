//! Template derivations and the enumeration of their families.
//!
//! Three templates generate everything: the free-variable derivative
//! `∂/∂S_p`; for type 1, `δ_C` sending each selected variable `T_{i,c_i}` to
//! `∏_{k≠i} ∂T_k^{l_k}/∂T_{k,c_k}`; and for type 2, `δ_{C,β}` weighting the
//! same products by a vector `β` from the row space of the column matrix,
//! either with no zero entry (all blocks participate) or with exactly one
//! zero at `i₀` (block `i₀` drops out of every image). The selected
//! exponents must be 1 outside at most one block — that lone block is what
//! keeps the iteration finite. Enumeration lists every admissible choice
//! once, together with the degree the grading assigns to it.

use std::collections::BTreeMap;

use itertools::Itertools;
use num::{BigInt, BigRational, One, Signed, Zero};
use thiserror::Error;

use crate::derivation::Derivation;
use crate::grading::{GradingGroup, GroupElement};
use crate::model::{GeneratorId, TrinomialData, TrinomialKind};
use crate::par::map_maybe_par;
use crate::polyring::QuotientRing;
use crate::ratmat::{nullspace, QMat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElementaryError {
    #[error("free-variable index {p} out of range 1..={m}")]
    IndexOutOfRange { p: usize, m: usize },
    #[error("template requires {expected:?} data")]
    WrongKind { expected: TrinomialKind },
    #[error("tuple must select one variable per block, within each block's size")]
    TupleOutOfRange,
    #[error("selected exponents exceed 1 in blocks {blocks:?}; at most one is allowed")]
    InvalidTuple { blocks: Vec<usize> },
    #[error("beta must have one entry per block")]
    BetaShape { expected: usize },
    #[error("beta must be nonzero with at most one zero entry; zeros at {zeros:?}")]
    BetaZeroPattern { zeros: Vec<usize> },
    #[error("beta does not lie in the row space of the column matrix")]
    BetaNotInRowSpace,
}

/// Which template a family instantiates, with its discrete parameters.
/// `c` entries follow block-label order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FamilyKind {
    Ds { p: usize },
    DeltaC { c: Vec<usize> },
    DeltaCBeta21 { c: Vec<usize> },
    DeltaCBeta22 { c: Vec<usize>, i0: usize },
}

/// One elementary family: a template plus the parameter space of its `β`
/// (empty for templates without one) and the degree of every member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementaryFamily {
    pub kind: FamilyKind,
    /// Basis of the admissible β-space, each vector indexed by block label;
    /// case 2.1 carries the full row space, case 2.2 its line `β_{i₀} = 0`.
    pub beta_basis: Vec<Vec<BigRational>>,
    pub degree: GroupElement,
}

impl ElementaryFamily {
    /// Instantiates the family at a canonical parameter point: the lone
    /// basis vector in case 2.2, and for case 2.1 a small integer
    /// combination of the basis avoiding every coordinate hyperplane.
    pub fn instantiate(&self, ring: &QuotientRing) -> Result<Derivation, ElementaryError> {
        self.instance(ring).map(|inst| inst.delta)
    }

    /// Like [`instantiate`](Self::instantiate), but keeps the parameters
    /// alongside the derivation.
    pub fn instance(&self, ring: &QuotientRing) -> Result<ElementaryInstance, ElementaryError> {
        match &self.kind {
            FamilyKind::Ds { p } => ElementaryInstance::ds(ring, *p),
            FamilyKind::DeltaC { c } => ElementaryInstance::delta_c(ring, c),
            FamilyKind::DeltaCBeta22 { c, .. } => {
                ElementaryInstance::delta_c_beta(ring, c, &self.beta_basis[0])
            }
            FamilyKind::DeltaCBeta21 { c } => {
                let beta = self
                    .beta_points()
                    .find(|beta| beta.iter().all(|b| !b.is_zero()))
                    .expect("a two-dimensional space is not a finite union of lines");
                ElementaryInstance::delta_c_beta(ring, c, &beta)
            }
        }
    }

    /// Small integer combinations of the basis vectors, for sampling the
    /// β-parameterization.
    pub fn beta_points(&self) -> impl Iterator<Item = Vec<BigRational>> + '_ {
        let len = self.beta_basis.first().map_or(0, Vec::len);
        (1i64..)
            .flat_map(|radius| {
                let coeffs: Vec<i64> = (-radius..=radius).collect();
                std::iter::repeat_n(coeffs, self.beta_basis.len()).multi_cartesian_product()
            })
            .map(move |coeffs| {
                let mut beta = vec![BigRational::zero(); len];
                for (coeff, vector) in coeffs.iter().zip(&self.beta_basis) {
                    let c = BigRational::from_integer(BigInt::from(*coeff));
                    for (slot, entry) in beta.iter_mut().zip(vector) {
                        *slot += &c * entry;
                    }
                }
                beta
            })
    }
}

/// A concrete family member: the template parameters used to build it plus
/// the resulting derivation. Kernel characterizations need the parameters,
/// not only the images.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementaryInstance {
    kind: FamilyKind,
    beta: Option<Vec<BigRational>>,
    delta: Derivation,
}

impl ElementaryInstance {
    pub fn ds(ring: &QuotientRing, p: usize) -> Result<Self, ElementaryError> {
        let delta = make_ds(ring, p)?;
        Ok(ElementaryInstance { kind: FamilyKind::Ds { p }, beta: None, delta })
    }

    pub fn delta_c(ring: &QuotientRing, c: &[usize]) -> Result<Self, ElementaryError> {
        let delta = make_delta_c(ring, c)?;
        Ok(ElementaryInstance {
            kind: FamilyKind::DeltaC { c: c.to_vec() },
            beta: None,
            delta,
        })
    }

    pub fn delta_c_beta(
        ring: &QuotientRing,
        c: &[usize],
        beta: &[BigRational],
    ) -> Result<Self, ElementaryError> {
        let delta = make_delta_c_beta(ring, c, beta)?;
        let zero_at = ring
            .data()
            .block_labels()
            .zip(beta)
            .find(|(_, b)| b.is_zero())
            .map(|(label, _)| label);
        let kind = match zero_at {
            Some(i0) => FamilyKind::DeltaCBeta22 { c: c.to_vec(), i0 },
            None => FamilyKind::DeltaCBeta21 { c: c.to_vec() },
        };
        Ok(ElementaryInstance { kind, beta: Some(beta.to_vec()), delta })
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn beta(&self) -> Option<&[BigRational]> {
        self.beta.as_deref()
    }

    pub fn derivation(&self) -> &Derivation {
        &self.delta
    }
}

/// `∂/∂S_p`: the free variable maps to 1, everything else to 0.
pub fn make_ds(ring: &QuotientRing, p: usize) -> Result<Derivation, ElementaryError> {
    let m = ring.data().m();
    if p == 0 || p > m {
        return Err(ElementaryError::IndexOutOfRange { p, m });
    }
    let pairs = [(GeneratorId::S { index: p }, ring.one())];
    Ok(Derivation::new(ring, &pairs).expect("template is well defined"))
}

/// The derivative of the block monomial `T_k^{l_k}` with respect to its
/// selected variable, as `(coefficient, exponent vector)`.
fn block_partial(data: &TrinomialData, label: usize, c: usize) -> (BigInt, Vec<u32>) {
    let mut exps = data.block_monomial_exps(label);
    let idx = data.block_offset(label) + (c - 1);
    let e = exps[idx];
    exps[idx] = e - 1;
    (BigInt::from(e), exps)
}

/// Product of block partials over `labels`, a single monomial.
fn partial_product(
    data: &TrinomialData,
    labels: impl Iterator<Item = usize>,
    c: &BTreeMap<usize, usize>,
) -> (BigInt, Vec<u32>) {
    let mut coeff = BigInt::one();
    let mut exps = vec![0u32; data.num_gens()];
    for label in labels {
        let (k, part) = block_partial(data, label, c[&label]);
        coeff *= k;
        for (slot, e) in exps.iter_mut().zip(part) {
            *slot += e;
        }
    }
    (coeff, exps)
}

fn tuple_map(data: &TrinomialData, c: &[usize]) -> Result<BTreeMap<usize, usize>, ElementaryError> {
    let labels: Vec<usize> = data.block_labels().collect();
    if c.len() != labels.len() {
        return Err(ElementaryError::TupleOutOfRange);
    }
    let mut map = BTreeMap::new();
    for (&label, &ci) in labels.iter().zip(c) {
        if ci == 0 || ci > data.block_size(label) {
            return Err(ElementaryError::TupleOutOfRange);
        }
        map.insert(label, ci);
    }
    Ok(map)
}

/// Block labels whose selected exponent exceeds 1, skipping `skip`.
fn violating_blocks(
    data: &TrinomialData,
    c: &BTreeMap<usize, usize>,
    skip: Option<usize>,
) -> Vec<usize> {
    data.block_labels()
        .filter(|&label| Some(label) != skip && data.l(label)[c[&label] - 1] > 1)
        .collect()
}

/// `δ_C` for type 1: each selected variable maps to the product of the other
/// blocks' partials.
pub fn make_delta_c(ring: &QuotientRing, c: &[usize]) -> Result<Derivation, ElementaryError> {
    let data = ring.data();
    if data.kind() != TrinomialKind::Type1 {
        return Err(ElementaryError::WrongKind { expected: TrinomialKind::Type1 });
    }
    let map = tuple_map(data, c)?;
    let violating = violating_blocks(data, &map, None);
    if violating.len() > 1 {
        return Err(ElementaryError::InvalidTuple { blocks: violating });
    }
    let mut pairs = Vec::new();
    for label in data.block_labels() {
        let (coeff, exps) = partial_product(data, data.block_labels().filter(|&k| k != label), &map);
        pairs.push((
            GeneratorId::T { block: label, pos: map[&label] },
            ring.poly_from_exps(exps, BigRational::from_integer(coeff)),
        ));
    }
    Ok(Derivation::new(ring, &pairs).expect("template is well defined"))
}

/// The 2×(r+1) column matrix of a type 2 algebra.
fn column_matrix(data: &TrinomialData) -> QMat {
    (0..2)
        .map(|row| {
            data.block_labels()
                .map(|label| data.column(label)[row].clone())
                .collect()
        })
        .collect()
}

fn beta_in_row_space(data: &TrinomialData, beta: &[BigRational]) -> bool {
    let a = column_matrix(data);
    let kernel = nullspace(&a, beta.len());
    kernel.iter().all(|v| {
        v.iter()
            .zip(beta)
            .map(|(x, y)| x * y)
            .sum::<BigRational>()
            .is_zero()
    })
}

/// `δ_{C,β}` for type 2. The zero pattern of `β` selects the case: no zeros
/// (all blocks contribute) or exactly one zero at `i₀` (block `i₀` is
/// excluded from every image and its own image vanishes).
pub fn make_delta_c_beta(
    ring: &QuotientRing,
    c: &[usize],
    beta: &[BigRational],
) -> Result<Derivation, ElementaryError> {
    let data = ring.data();
    if data.kind() != TrinomialKind::Type2 {
        return Err(ElementaryError::WrongKind { expected: TrinomialKind::Type2 });
    }
    let map = tuple_map(data, c)?;
    let labels: Vec<usize> = data.block_labels().collect();
    if beta.len() != labels.len() {
        return Err(ElementaryError::BetaShape { expected: labels.len() });
    }
    let zeros: Vec<usize> = labels
        .iter()
        .zip(beta)
        .filter(|(_, b)| b.is_zero())
        .map(|(&label, _)| label)
        .collect();
    let i0 = match zeros.len() {
        0 => None,
        1 => Some(zeros[0]),
        _ => return Err(ElementaryError::BetaZeroPattern { zeros }),
    };
    if !beta_in_row_space(data, beta) {
        return Err(ElementaryError::BetaNotInRowSpace);
    }
    let violating = violating_blocks(data, &map, i0);
    if violating.len() > 1 {
        return Err(ElementaryError::InvalidTuple { blocks: violating });
    }
    let mut pairs = Vec::new();
    for (&label, b) in labels.iter().zip(beta) {
        if b.is_zero() {
            continue;
        }
        let others = labels.iter().copied().filter(|&k| k != label && Some(k) != i0);
        let (coeff, exps) = partial_product(data, others, &map);
        pairs.push((
            GeneratorId::T { block: label, pos: map[&label] },
            ring.poly_from_exps(exps, BigRational::from_integer(coeff) * b),
        ));
    }
    Ok(Derivation::new(ring, &pairs).expect("template is well defined"))
}

/// Degree of every member of a family, from the closed formulas: `−deg S_p`,
/// `−Σ deg T_{k,c_k}`, `rμ − Σ_k deg T_{k,c_k}`, and
/// `(r−1)μ − Σ_{k≠i₀} deg T_{k,c_k}`.
pub fn family_degree(
    data: &TrinomialData,
    g: &GradingGroup,
    kind: &FamilyKind,
) -> GroupElement {
    let selected_sum = |c: &[usize], skip: Option<usize>| {
        let mut total = g.zero_element();
        for (label, &ci) in data.block_labels().zip(c) {
            if Some(label) == skip {
                continue;
            }
            let idx = data.block_offset(label) + (ci - 1);
            total = g.add(&total, g.degree_of_gen(idx));
        }
        total
    };
    match kind {
        FamilyKind::Ds { p } => g.neg(g.degree_of_gen(data.n() + p - 1)),
        FamilyKind::DeltaC { c } => g.neg(&selected_sum(c, None)),
        FamilyKind::DeltaCBeta21 { c } => {
            let r = BigInt::from(data.r());
            g.sub(&g.scale(&r, g.mu()), &selected_sum(c, None))
        }
        FamilyKind::DeltaCBeta22 { c, i0 } => {
            let r1 = BigInt::from(data.r() - 1);
            g.sub(&g.scale(&r1, g.mu()), &selected_sum(c, Some(*i0)))
        }
    }
}

/// Scales a rational vector to a primitive integer vector with positive
/// leading entry.
fn primitive(beta: Vec<BigRational>) -> Vec<BigRational> {
    let mut denom_lcm = BigInt::one();
    for b in &beta {
        denom_lcm = num::integer::lcm(denom_lcm, b.denom().clone());
    }
    let ints: Vec<BigInt> = beta
        .iter()
        .map(|b| (b * BigRational::from_integer(denom_lcm.clone())).to_integer())
        .collect();
    let mut gcd = BigInt::zero();
    for x in &ints {
        gcd = num::integer::gcd(gcd, x.clone());
    }
    if gcd.is_zero() {
        return beta;
    }
    let lead_negative = ints.iter().find(|x| !x.is_zero()).is_some_and(Signed::is_negative);
    if lead_negative {
        gcd = -gcd;
    }
    ints.into_iter()
        .map(|x| BigRational::from_integer(x / &gcd))
        .collect()
}

/// The β-line of case 2.2 at `i₀`: entries `det(a_{i₀}, a_i)`, which lie in
/// the row space, vanish exactly at `i₀`, and are nonzero elsewhere by
/// pairwise independence of the columns.
fn beta_line_22(data: &TrinomialData, i0: usize) -> Vec<BigRational> {
    let a0 = data.column(i0);
    let beta = data
        .block_labels()
        .map(|label| {
            let a = data.column(label);
            &a0[0] * &a[1] - &a0[1] * &a[0]
        })
        .collect();
    primitive(beta)
}

/// All tuples `C` selecting one variable per block, restricted to canonical
/// `c = 1` on `fixed` when given.
fn candidate_tuples(data: &TrinomialData, fixed: Option<usize>) -> Vec<Vec<usize>> {
    data.block_labels()
        .map(|label| {
            if Some(label) == fixed {
                vec![1usize]
            } else {
                (1..=data.block_size(label)).collect()
            }
        })
        .multi_cartesian_product()
        .collect()
}

/// Every elementary family of the algebra, duplicate-free, in canonical
/// order. Empty exactly when no template applies.
pub fn enumerate_families(ring: &QuotientRing, g: &GradingGroup) -> Vec<ElementaryFamily> {
    enumerate_families_with(ring, g, true)
}

/// Like [`enumerate_families`] but with explicit control over the parallel
/// driver; `parallel = false` forces the sequential path.
pub fn enumerate_families_with(
    ring: &QuotientRing,
    g: &GradingGroup,
    parallel: bool,
) -> Vec<ElementaryFamily> {
    let data = ring.data();
    let mut kinds: Vec<FamilyKind> = Vec::new();
    for p in 1..=data.m() {
        kinds.push(FamilyKind::Ds { p });
    }
    match data.kind() {
        TrinomialKind::Type1 => {
            for c in candidate_tuples(data, None) {
                let map = tuple_map(data, &c).expect("generated in range");
                if violating_blocks(data, &map, None).len() <= 1 {
                    kinds.push(FamilyKind::DeltaC { c });
                }
            }
        }
        TrinomialKind::Type2 => {
            for c in candidate_tuples(data, None) {
                let map = tuple_map(data, &c).expect("generated in range");
                if violating_blocks(data, &map, None).len() <= 1 {
                    kinds.push(FamilyKind::DeltaCBeta21 { c });
                }
            }
            for i0 in data.block_labels() {
                for c in candidate_tuples(data, Some(i0)) {
                    let map = tuple_map(data, &c).expect("generated in range");
                    if violating_blocks(data, &map, Some(i0)).len() <= 1 {
                        kinds.push(FamilyKind::DeltaCBeta22 { c, i0 });
                    }
                }
            }
        }
    }
    kinds.sort();
    debug_assert!(kinds.windows(2).all(|w| w[0] != w[1]));
    let row_basis: Vec<Vec<BigRational>> = match data.kind() {
        TrinomialKind::Type2 => column_matrix(data),
        TrinomialKind::Type1 => Vec::new(),
    };
    map_maybe_par(parallel, kinds, |kind| {
        let beta_basis = match &kind {
            FamilyKind::Ds { .. } | FamilyKind::DeltaC { .. } => Vec::new(),
            FamilyKind::DeltaCBeta21 { .. } => row_basis.clone(),
            FamilyKind::DeltaCBeta22 { i0, .. } => vec![beta_line_22(data, *i0)],
        };
        let degree = family_degree(data, g, &kind);
        ElementaryFamily { kind, beta_basis, degree }
    })
}
