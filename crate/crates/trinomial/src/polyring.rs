//! Sparse multivariate polynomials over exact rationals and the canonical
//! normal form modulo the defining ideal.
//!
//! Monomials are exponent vectors over the fixed generator order
//! `T_{ι1}, …, T_{r n_r}, S_1, …, S_m`, stored under graded lexicographic
//! order. The normal form never rewrites blocks `ι` and `1`; any monomial
//! whose block-`i` exponents (`i ≥ 2`) dominate `l_i` componentwise has the
//! factor `T_i^{l_i}` replaced by an affine (type 1) or linear (type 2)
//! expression in the block-`ι..1` monomials, derived once from the defining
//! relations. Distinct rules touch disjoint blocks, so the result is a
//! unique normal form and equality in the quotient is decidable.

use num::{BigInt, BigRational, One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

use crate::grading::{GradingGroup, GroupElement};
use crate::model::{det2, GeneratorId, TrinomialData, TrinomialKind, ValidationReport};

/// An exponent vector over the fixed generator order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial { exps: vec![0; nvars] }
    }

    pub fn from_exps(exps: Vec<u32>) -> Self {
        Monomial { exps }
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn exp(&self, idx: usize) -> u32 {
        self.exps[idx]
    }

    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.exps.len(), other.exps.len());
        Monomial {
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect(),
        }
    }

    /// Componentwise quotient, or `None` when `other` does not divide `self`.
    pub fn try_div(&self, other: &Monomial) -> Option<Monomial> {
        debug_assert_eq!(self.exps.len(), other.exps.len());
        let mut exps = Vec::with_capacity(self.exps.len());
        for (a, b) in self.exps.iter().zip(&other.exps) {
            exps.push(a.checked_sub(*b)?);
        }
        Some(Monomial { exps })
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Graded lexicographic: total degree first, then the leftmost
        // differing exponent decides (earlier generators rank higher).
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A sparse polynomial in the free ring over all generators.
///
/// Values are produced through a [`QuotientRing`], which stamps them with a
/// fingerprint of the owning algebra so that operands from different
/// algebras are rejected instead of silently combined.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Poly {
    ctx: u64,
    nvars: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub(crate) fn zero(ctx: u64, nvars: usize) -> Self {
        Poly { ctx, nvars, terms: BTreeMap::new() }
    }

    pub(crate) fn from_term(ctx: u64, nvars: usize, exps: Vec<u32>, coeff: BigRational) -> Self {
        let mut p = Poly::zero(ctx, nvars);
        p.add_term(Monomial::from_exps(exps), coeff);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    /// The maximal term under the monomial order.
    pub fn leading(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn coeff(&self, mono: &Monomial) -> BigRational {
        self.terms.get(mono).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Maximum total degree over the support, `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::total_degree).max()
    }

    pub(crate) fn add_term(&mut self, mono: Monomial, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        debug_assert_eq!(mono.nvars(), self.nvars);
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub(crate) fn add_ref(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.ctx, other.ctx);
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub(crate) fn sub_ref(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.ctx, other.ctx);
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub(crate) fn neg_ref(&self) -> Poly {
        let mut out = Poly::zero(self.ctx, self.nvars);
        for (m, c) in self.terms() {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub(crate) fn scale_ref(&self, c: &BigRational) -> Poly {
        let mut out = Poly::zero(self.ctx, self.nvars);
        if c.is_zero() {
            return out;
        }
        for (m, k) in self.terms() {
            out.add_term(m.clone(), k * c);
        }
        out
    }

    pub(crate) fn mul_term(&self, mono: &Monomial, coeff: &BigRational) -> Poly {
        let mut out = Poly::zero(self.ctx, self.nvars);
        if coeff.is_zero() {
            return out;
        }
        for (m, c) in self.terms() {
            out.add_term(m.mul(mono), c * coeff);
        }
        out
    }

    pub(crate) fn mul_ref(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.ctx, other.ctx);
        let mut out = Poly::zero(self.ctx, self.nvars);
        for (m, c) in other.terms() {
            for (m2, c2) in self.terms() {
                out.add_term(m2.mul(m), c2 * c);
            }
        }
        out
    }

    pub(crate) fn pow_u32(&self, k: u32) -> Poly {
        let mut out = Poly::from_term(self.ctx, self.nvars, vec![0; self.nvars], BigRational::one());
        for _ in 0..k {
            out = out.mul_ref(self);
        }
        out
    }

    /// Formal partial derivative in the free ring.
    pub(crate) fn derivative_var(&self, idx: usize) -> Poly {
        let mut out = Poly::zero(self.ctx, self.nvars);
        for (m, c) in self.terms() {
            let e = m.exp(idx);
            if e == 0 {
                continue;
            }
            let mut exps = m.exps().to_vec();
            exps[idx] -= 1;
            out.add_term(Monomial::from_exps(exps), c * BigRational::from_integer(BigInt::from(e)));
        }
        out
    }

    /// Exact division in the free ring: `Some(q)` with `self = q·divisor`,
    /// or `None` when no such polynomial exists.
    pub(crate) fn div_exact_free(&self, divisor: &Poly) -> Option<Poly> {
        debug_assert_eq!(self.ctx, divisor.ctx);
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let (dm, dc) = divisor.leading().expect("nonzero divisor");
        let mut quotient = Poly::zero(self.ctx, self.nvars);
        let mut rem = self.clone();
        while let Some((rm, rc)) = rem.leading() {
            let t = rm.try_div(dm)?;
            let c = rc / dc;
            rem = rem.sub_ref(&divisor.mul_term(&t, &c));
            quotient.add_term(t, c);
        }
        Some(quotient)
    }
}

/// A polynomial in canonical normal form modulo the defining ideal.
///
/// Equality of `QuotientPoly` values is equality in the quotient algebra.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct QuotientPoly {
    poly: Poly,
}

impl QuotientPoly {
    pub(crate) fn from_normal(poly: Poly) -> Self {
        QuotientPoly { poly }
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn into_poly(self) -> Poly {
        self.poly
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }
}

/// Context and precondition failures of ring operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("operands belong to different algebras")]
    MixedContext,
    #[error("defining data is invalid: {0}")]
    InvalidData(ValidationReport),
}

/// Failures of the homogeneous structure decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("zero polynomial has no structure decomposition")]
    ZeroPolynomial,
    #[error("structure decomposition failed on a homogeneous input: internal bug")]
    DecompositionFailed,
}

/// Text-grammar failure with a byte offset into the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at column {column}: {message}")]
pub struct ParseError {
    pub column: usize,
    pub message: String,
}

/// The block-polynomial part of a structure decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructureForm {
    /// `F(u) = Σ c_q u^q` with `u` standing for the block-1 monomial.
    Univariate(Vec<(u32, BigRational)>),
    /// Homogeneous `F(u, v) = Σ c_a u^a v^(total−a)` with `(u, v)` standing
    /// for the block-1 and block-2 monomials.
    Bivariate { total: u32, coeffs: Vec<(u32, BigRational)> },
}

/// A homogeneous element written as `F · ∏ T^b · ∏ S^d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureDecomposition {
    pub form: StructureForm,
    pub factor: Monomial,
}

/// One rewrite rule: whenever a monomial dominates `l` on the block at
/// `offset`, the factor `T_i^{l_i}` is replaced by `replacement`.
#[derive(Debug, Clone)]
struct Rule {
    offset: usize,
    l: Vec<u32>,
    replacement: Poly,
}

/// Internal decomposition of a normal form: shifts of the block-0/1
/// monomials (block 0 only for type 2) against a common residual monomial.
struct RawDecomposition {
    factor: Vec<u32>,
    /// Triples `(q0, q1, coeff)`; `q0 = 0` throughout for type 1.
    terms: Vec<(u32, u32, BigRational)>,
}

/// The quotient algebra: owns the defining data, the rewrite rules, and all
/// checked polynomial operations.
#[derive(Debug, Clone)]
pub struct QuotientRing {
    data: TrinomialData,
    ctx: u64,
    nvars: usize,
    rules: Vec<Rule>,
    /// For type 2, the coefficients `(λ, ν)` with `T_2^{l_2} ≡ λ·M_0 + ν·M_1`.
    block2_lin: Option<(BigRational, BigRational)>,
    defining: Vec<Poly>,
}

impl QuotientRing {
    pub fn new(data: TrinomialData) -> Result<Self, RingError> {
        let report = data.validate();
        if !report.is_valid() {
            return Err(RingError::InvalidData(report));
        }
        let ctx = data.fingerprint();
        let nvars = data.num_gens();
        let block_poly = |label: usize, coeff: BigRational| {
            Poly::from_term(ctx, nvars, data.block_monomial_exps(label), coeff)
        };
        let mut rules = Vec::new();
        let mut block2_lin = None;
        for label in 2..=data.r() {
            let replacement = match data.kind() {
                TrinomialKind::Type1 => {
                    // T_i^{l_i} ≡ T_1^{l_1} − (a_i − a_1), telescoping the chain.
                    let c = data.scalar(label) - data.scalar(1);
                    block_poly(1, BigRational::one()).sub_ref(&Poly::from_term(
                        ctx,
                        nvars,
                        vec![0; nvars],
                        c,
                    ))
                }
                TrinomialKind::Type2 => {
                    // T_i^{l_i} ≡ λ·T_0^{l_0} + ν·T_1^{l_1} where (λ, ν) are the
                    // coordinates of column a_i in the basis (a_0, a_1).
                    let det = det2(data.column(0), data.column(1));
                    let lambda = det2(data.column(label), data.column(1)) / &det;
                    let nu = det2(data.column(0), data.column(label)) / &det;
                    if label == 2 {
                        block2_lin = Some((lambda.clone(), nu.clone()));
                    }
                    block_poly(0, lambda).add_ref(&block_poly(1, nu))
                }
            };
            rules.push(Rule {
                offset: data.block_offset(label),
                l: data.l(label).to_vec(),
                replacement,
            });
        }
        let defining = data.defining_polynomials();
        Ok(QuotientRing { data, ctx, nvars, rules, block2_lin, defining })
    }

    pub fn data(&self) -> &TrinomialData {
        &self.data
    }

    pub(crate) fn ctx(&self) -> u64 {
        self.ctx
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// The defining polynomials `g_i` in label order.
    pub fn defining_polynomials(&self) -> &[Poly] {
        &self.defining
    }

    fn check(&self, p: &Poly) -> Result<(), RingError> {
        if p.ctx != self.ctx {
            return Err(RingError::MixedContext);
        }
        Ok(())
    }

    fn check_grading(&self, g: &GradingGroup) -> Result<(), RingError> {
        if g.ctx() != self.ctx {
            return Err(RingError::MixedContext);
        }
        Ok(())
    }

    // ------------------------------------------------------------------
    // Construction of polynomials
    // ------------------------------------------------------------------

    pub fn zero(&self) -> Poly {
        Poly::zero(self.ctx, self.nvars)
    }

    pub fn one(&self) -> Poly {
        self.constant(BigRational::one())
    }

    pub fn constant(&self, c: BigRational) -> Poly {
        Poly::from_term(self.ctx, self.nvars, vec![0; self.nvars], c)
    }

    /// The generator as a polynomial; panics when the id is out of bounds.
    pub fn var(&self, g: GeneratorId) -> Poly {
        let idx = self.data.gen_index(g).expect("generator out of bounds");
        let mut exps = vec![0; self.nvars];
        exps[idx] = 1;
        Poly::from_term(self.ctx, self.nvars, exps, BigRational::one())
    }

    /// `coeff · ∏ gen^e`; panics when an id is out of bounds.
    pub fn monomial(&self, factors: &[(GeneratorId, u32)], coeff: BigRational) -> Poly {
        let mut exps = vec![0; self.nvars];
        for (g, e) in factors {
            let idx = self.data.gen_index(*g).expect("generator out of bounds");
            exps[idx] += e;
        }
        Poly::from_term(self.ctx, self.nvars, exps, coeff)
    }

    pub(crate) fn poly_from_exps(&self, exps: Vec<u32>, coeff: BigRational) -> Poly {
        Poly::from_term(self.ctx, self.nvars, exps, coeff)
    }

    /// The block monomial `T_label^{l_label}` as a polynomial.
    pub fn block_monomial(&self, label: usize) -> Poly {
        Poly::from_term(
            self.ctx,
            self.nvars,
            self.data.block_monomial_exps(label),
            BigRational::one(),
        )
    }

    // ------------------------------------------------------------------
    // Checked arithmetic
    // ------------------------------------------------------------------

    pub fn add(&self, p: &Poly, q: &Poly) -> Result<Poly, RingError> {
        self.check(p)?;
        self.check(q)?;
        Ok(p.add_ref(q))
    }

    pub fn sub(&self, p: &Poly, q: &Poly) -> Result<Poly, RingError> {
        self.check(p)?;
        self.check(q)?;
        Ok(p.sub_ref(q))
    }

    pub fn mul(&self, p: &Poly, q: &Poly) -> Result<Poly, RingError> {
        self.check(p)?;
        self.check(q)?;
        Ok(p.mul_ref(q))
    }

    pub fn neg(&self, p: &Poly) -> Result<Poly, RingError> {
        self.check(p)?;
        Ok(p.neg_ref())
    }

    pub fn scale(&self, c: &BigRational, p: &Poly) -> Result<Poly, RingError> {
        self.check(p)?;
        Ok(p.scale_ref(c))
    }

    pub fn pow(&self, p: &Poly, k: u32) -> Result<Poly, RingError> {
        self.check(p)?;
        Ok(p.pow_u32(k))
    }

    // ------------------------------------------------------------------
    // Normal form and quotient equality
    // ------------------------------------------------------------------

    fn is_normal_exps(&self, exps: &[u32]) -> bool {
        self.rules.iter().all(|rule| {
            rule.l
                .iter()
                .enumerate()
                .any(|(j, &lj)| exps[rule.offset + j] < lj)
        })
    }

    pub fn is_normal_monomial(&self, mono: &Monomial) -> bool {
        self.is_normal_exps(mono.exps())
    }

    /// Canonical normal form of `p` modulo the defining ideal.
    pub fn reduce(&self, p: &Poly) -> Result<QuotientPoly, RingError> {
        self.check(p)?;
        let mut out = Poly::zero(self.ctx, self.nvars);
        for (mono, coeff) in p.terms() {
            let mut residual = mono.exps().to_vec();
            let mut shifts: Vec<(usize, u32)> = Vec::new();
            for (ri, rule) in self.rules.iter().enumerate() {
                let q = rule
                    .l
                    .iter()
                    .enumerate()
                    .map(|(j, &lj)| residual[rule.offset + j] / lj)
                    .min()
                    .unwrap_or(0);
                if q > 0 {
                    for (j, &lj) in rule.l.iter().enumerate() {
                        residual[rule.offset + j] -= q * lj;
                    }
                    shifts.push((ri, q));
                }
            }
            if shifts.is_empty() {
                out.add_term(mono.clone(), coeff.clone());
                continue;
            }
            let mut acc = Poly::from_term(self.ctx, self.nvars, residual, coeff.clone());
            for (ri, q) in shifts {
                acc = acc.mul_ref(&self.rules[ri].replacement.pow_u32(q));
            }
            out = out.add_ref(&acc);
        }
        debug_assert!(out.terms.keys().all(|m| self.is_normal_exps(m.exps())));
        Ok(QuotientPoly { poly: out })
    }

    pub fn equals_in_quotient(&self, p: &Poly, q: &Poly) -> Result<bool, RingError> {
        Ok(self.reduce(&p.sub_ref(q))?.is_zero())
    }

    // ------------------------------------------------------------------
    // Quotient-level helpers (operands already in normal form)
    // ------------------------------------------------------------------

    /// Sum of normal forms is a normal form; no rewriting needed.
    pub fn q_add(&self, a: &QuotientPoly, b: &QuotientPoly) -> QuotientPoly {
        QuotientPoly { poly: a.poly.add_ref(&b.poly) }
    }

    pub fn q_sub(&self, a: &QuotientPoly, b: &QuotientPoly) -> QuotientPoly {
        QuotientPoly { poly: a.poly.sub_ref(&b.poly) }
    }

    pub fn q_mul(&self, a: &QuotientPoly, b: &QuotientPoly) -> QuotientPoly {
        self.reduce(&a.poly.mul_ref(&b.poly)).expect("same context")
    }

    pub fn q_scale(&self, c: &BigRational, a: &QuotientPoly) -> QuotientPoly {
        QuotientPoly { poly: a.poly.scale_ref(c) }
    }

    pub fn q_zero(&self) -> QuotientPoly {
        QuotientPoly { poly: self.zero() }
    }

    pub fn q_one(&self) -> QuotientPoly {
        QuotientPoly { poly: self.one() }
    }

    // ------------------------------------------------------------------
    // Homogeneity
    // ------------------------------------------------------------------

    /// Splits a normal form by degree; summing the parts recovers `p`.
    pub fn homogeneous_components(
        &self,
        g: &GradingGroup,
        p: &QuotientPoly,
    ) -> Result<BTreeMap<GroupElement, QuotientPoly>, RingError> {
        self.check(&p.poly)?;
        self.check_grading(g)?;
        let mut out: BTreeMap<GroupElement, QuotientPoly> = BTreeMap::new();
        for (mono, coeff) in p.poly.terms() {
            let deg = g.degree_of_monomial(mono);
            out.entry(deg)
                .or_insert_with(|| QuotientPoly { poly: self.zero() })
                .poly
                .add_term(mono.clone(), coeff.clone());
        }
        Ok(out)
    }

    /// `Some(degree)` when `p` is homogeneous (the zero polynomial reports
    /// the zero degree), `None` otherwise.
    pub fn homogeneous_degree(
        &self,
        g: &GradingGroup,
        p: &QuotientPoly,
    ) -> Result<Option<GroupElement>, RingError> {
        let comps = self.homogeneous_components(g, p)?;
        Ok(match comps.len() {
            0 => Some(g.zero_element()),
            1 => comps.into_keys().next(),
            _ => None,
        })
    }

    // ------------------------------------------------------------------
    // Structure decomposition
    // ------------------------------------------------------------------

    fn block1_offset_len(&self) -> (usize, usize) {
        (self.data.block_offset(1), self.data.block_size(1))
    }

    fn raw_decomposition(&self, p: &QuotientPoly) -> Result<RawDecomposition, PolyError> {
        if p.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let type2 = self.data.kind() == TrinomialKind::Type2;
        let (off1, _) = self.block1_offset_len();
        let l1 = self.data.l(1);
        let (off0, l0) = if type2 {
            (self.data.block_offset(0), self.data.l(0))
        } else {
            (0, &[][..])
        };
        let mut factor: Option<Vec<u32>> = None;
        let mut total: Option<u32> = None;
        let mut terms = Vec::new();
        for (mono, coeff) in p.poly.terms() {
            let mut residual = mono.exps().to_vec();
            let strip = |residual: &mut Vec<u32>, off: usize, l: &[u32]| -> u32 {
                let q = l
                    .iter()
                    .enumerate()
                    .map(|(j, &lj)| residual[off + j] / lj)
                    .min()
                    .unwrap_or(0);
                for (j, &lj) in l.iter().enumerate() {
                    residual[off + j] -= q * lj;
                }
                q
            };
            let q0 = if type2 { strip(&mut residual, off0, l0) } else { 0 };
            let q1 = strip(&mut residual, off1, l1);
            match &factor {
                None => factor = Some(residual),
                Some(f) if *f == residual => {}
                Some(_) => return Err(PolyError::DecompositionFailed),
            }
            if type2 {
                match total {
                    None => total = Some(q0 + q1),
                    Some(t) if t == q0 + q1 => {}
                    Some(_) => return Err(PolyError::DecompositionFailed),
                }
            }
            terms.push((q0, q1, coeff.clone()));
        }
        Ok(RawDecomposition { factor: factor.expect("nonzero input"), terms })
    }

    /// Writes a homogeneous `p` as `F · ∏ T^b · ∏ S^d` where `F` is
    /// univariate in the block-1 monomial (type 1) or homogeneous bivariate
    /// in the block-1/block-2 monomials (type 2).
    pub fn structure_decomposition(
        &self,
        g: &GradingGroup,
        p: &QuotientPoly,
    ) -> Result<StructureDecomposition, PolyError> {
        if p.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let homogeneous = self
            .homogeneous_degree(g, p)
            .map_err(|_| PolyError::DecompositionFailed)?
            .is_some();
        if !homogeneous {
            return Err(PolyError::NotHomogeneous);
        }
        let raw = self.raw_decomposition(p)?;
        let dec = match self.data.kind() {
            TrinomialKind::Type1 => {
                let mut coeffs: Vec<(u32, BigRational)> =
                    raw.terms.into_iter().map(|(_, q1, c)| (q1, c)).collect();
                coeffs.sort_by_key(|&(q, _)| q);
                StructureDecomposition {
                    form: StructureForm::Univariate(coeffs),
                    factor: Monomial::from_exps(raw.factor),
                }
            }
            TrinomialKind::Type2 => {
                // Convert from the internal (M_0, M_1) coordinates to (M_1, M_2)
                // via M_0 = σ_1·M_1 + σ_2·M_2, inverted from M_2 ≡ λ·M_0 + ν·M_1.
                let (lambda, nu) = self.block2_lin.clone().expect("type-2 ring");
                let sigma1 = -&nu / &lambda;
                let sigma2 = lambda.recip();
                let total = raw.terms[0].0 + raw.terms[0].1;
                let mut acc: BTreeMap<u32, BigRational> = BTreeMap::new();
                for (q0, q1, c) in &raw.terms {
                    // c · (σ1 u + σ2 v)^{q0} · u^{q1}
                    let mut binom = BigRational::one();
                    for k in 0..=*q0 {
                        // binomial(q0, k) · σ1^k · σ2^(q0−k), built incrementally
                        let coeff = &binom
                            * sigma1.clone().pow(k as i32)
                            * sigma2.clone().pow((*q0 - k) as i32)
                            * c;
                        let u_exp = q1 + k;
                        let entry = acc.entry(u_exp).or_insert_with(BigRational::zero);
                        *entry += coeff;
                        if k < *q0 {
                            binom = binom * BigRational::from_integer(BigInt::from(*q0 - k))
                                / BigRational::from_integer(BigInt::from(k + 1));
                        }
                    }
                }
                let coeffs: Vec<(u32, BigRational)> =
                    acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
                StructureDecomposition {
                    form: StructureForm::Bivariate { total, coeffs },
                    factor: Monomial::from_exps(raw.factor),
                }
            }
        };
        // Reproduce the input from the decomposition as a final guard.
        let realized = self.realize_decomposition(&dec);
        if &self.reduce(&realized).expect("same context") != p {
            return Err(PolyError::DecompositionFailed);
        }
        Ok(dec)
    }

    /// Expands a decomposition back into the free ring.
    pub fn realize_decomposition(&self, dec: &StructureDecomposition) -> Poly {
        let factor = Poly::from_term(
            self.ctx,
            self.nvars,
            dec.factor.exps().to_vec(),
            BigRational::one(),
        );
        let m1 = self.block_monomial(1);
        match &dec.form {
            StructureForm::Univariate(coeffs) => {
                let mut out = self.zero();
                for (q, c) in coeffs {
                    out = out.add_ref(&m1.pow_u32(*q).scale_ref(c));
                }
                out.mul_ref(&factor)
            }
            StructureForm::Bivariate { total, coeffs } => {
                let m2 = self.block_monomial(2);
                let mut out = self.zero();
                for (a, c) in coeffs {
                    out = out.add_ref(&m1.pow_u32(*a).mul_ref(&m2.pow_u32(total - a)).scale_ref(c));
                }
                out.mul_ref(&factor)
            }
        }
    }

    // ------------------------------------------------------------------
    // Division helpers
    // ------------------------------------------------------------------

    /// Divides a homogeneous quotient element by a single term
    /// `coeff · mono`, returning the exact quotient in normal form when the
    /// term divides `f` in the quotient algebra. Returns `None` when it does
    /// not divide, when `f` is inhomogeneous, or when `mono` is not normal.
    ///
    /// Divisor content in a block `i ≥ 2` is handled through the rewrite
    /// rule: a quotient monomial can only supply it via whole powers of
    /// `T_i^{l_i}`, whose number is forced by normality, so the block-form
    /// polynomial of `f` must divide exactly by the corresponding power of
    /// the rule's replacement form.
    pub fn divide_by_term(
        &self,
        f: &QuotientPoly,
        coeff: &BigRational,
        mono: &Monomial,
    ) -> Option<QuotientPoly> {
        if coeff.is_zero() || !self.is_normal_exps(mono.exps()) {
            return None;
        }
        if f.is_zero() {
            return Some(self.q_zero());
        }
        let raw = self.raw_decomposition(f).ok()?;
        let type2 = self.data.kind() == TrinomialKind::Type2;
        let (off1, _) = self.block1_offset_len();
        let l1 = self.data.l(1).to_vec();
        let (off0, l0) = if type2 {
            (self.data.block_offset(0), self.data.l(0).to_vec())
        } else {
            (0, Vec::new())
        };
        // Factor with rewritten-block residuals adjusted for the divisor,
        // and the list of exact form divisions the quotient's existence
        // forces. `e_left` keeps the divisor components outside blocks ≥ 2.
        let mut factor = raw.factor.clone();
        let mut e_left = mono.exps().to_vec();
        let mut form = raw.terms.clone();
        for (ri, rule) in self.rules.iter().enumerate() {
            let mut k: u32 = 0;
            for (j, &lj) in rule.l.iter().enumerate() {
                let e = mono.exp(rule.offset + j);
                let b = raw.factor[rule.offset + j];
                if e > b {
                    k = k.max((e - b).div_ceil(lj));
                }
            }
            if k == 0 {
                continue;
            }
            for (j, &lj) in rule.l.iter().enumerate() {
                let slot = rule.offset + j;
                factor[slot] = raw.factor[slot] + k * lj - mono.exp(slot);
                e_left[slot] = 0;
            }
            for _ in 0..k {
                form = self.divide_form_once(form, ri)?;
            }
        }
        // Remaining divisor content must sit inside the adjusted factor
        // plus the guaranteed block-0/1 content of the smallest powers.
        let p_min = form.iter().map(|t| t.0).min().unwrap();
        let q_min = form.iter().map(|t| t.1).min().unwrap();
        let mut valuation = factor.clone();
        for (j, &lj) in l1.iter().enumerate() {
            valuation[off1 + j] += q_min * lj;
        }
        for (j, &lj) in l0.iter().enumerate() {
            valuation[off0 + j] += p_min * lj;
        }
        if e_left.iter().zip(&valuation).any(|(e, v)| e > v) {
            return None;
        }
        let mut quotient = Poly::zero(self.ctx, self.nvars);
        for (q0, q1, c) in &form {
            let mut exps = factor.clone();
            for (j, &lj) in l1.iter().enumerate() {
                exps[off1 + j] += q1 * lj;
            }
            for (j, &lj) in l0.iter().enumerate() {
                exps[off0 + j] += q0 * lj;
            }
            for (idx, &e) in e_left.iter().enumerate() {
                exps[idx] -= e;
            }
            quotient.add_term(Monomial::from_exps(exps), c / coeff);
        }
        // Multiply back as a guard against any gap in the logic above.
        let check = self
            .reduce(&quotient.mul_term(mono, coeff))
            .expect("same context");
        if &check != f {
            return None;
        }
        Some(QuotientPoly { poly: quotient })
    }

    /// Divides the block-form polynomial once by the replacement form of
    /// rule `ri`: `M₁ − c` (type 1) or `λM₀ + νM₁` (type 2). Exact or `None`.
    fn divide_form_once(
        &self,
        form: Vec<(u32, u32, BigRational)>,
        ri: usize,
    ) -> Option<Vec<(u32, u32, BigRational)>> {
        match self.data.kind() {
            TrinomialKind::Type1 => {
                // Synthetic division of Σ g_q u^q by (u − c).
                let c = self.rule_constant(ri);
                let deg = form.iter().map(|t| t.1).max()?;
                if deg == 0 {
                    return None;
                }
                let mut g = vec![BigRational::zero(); (deg + 1) as usize];
                for (_, q, v) in &form {
                    g[*q as usize] += v;
                }
                let mut out = vec![BigRational::zero(); deg as usize];
                out[(deg - 1) as usize] = g[deg as usize].clone();
                for q in (1..deg).rev() {
                    out[(q - 1) as usize] = &g[q as usize] + &c * &out[q as usize];
                }
                if !(&g[0] + &c * &out[0]).is_zero() {
                    return None;
                }
                Some(
                    out.into_iter()
                        .enumerate()
                        .filter(|(_, v)| !v.is_zero())
                        .map(|(q, v)| (0, q as u32, v))
                        .collect(),
                )
            }
            TrinomialKind::Type2 => {
                // Division of the binary form Σ g_p M₀^p M₁^{t−p} by λM₀ + νM₁.
                let (lambda, nu) = self.rule_linear(ri);
                let total = form.iter().map(|(p, q, _)| p + q).max()?;
                if total == 0 || form.iter().any(|(p, q, _)| p + q != total) {
                    return None;
                }
                let mut g = vec![BigRational::zero(); (total + 1) as usize];
                for (p, _, v) in &form {
                    g[*p as usize] += v;
                }
                let mut out = vec![BigRational::zero(); total as usize];
                out[(total - 1) as usize] = &g[total as usize] / &lambda;
                for p in (1..total).rev() {
                    out[(p - 1) as usize] = (&g[p as usize] - &nu * &out[p as usize]) / &lambda;
                }
                if g[0] != &nu * &out[0] {
                    return None;
                }
                Some(
                    out.into_iter()
                        .enumerate()
                        .filter(|(_, v)| !v.is_zero())
                        .map(|(p, v)| (p as u32, total - 1 - p as u32, v))
                        .collect(),
                )
            }
        }
    }

    /// The constant `c` with rule `ri` reading `T_i^{l_i} ≡ M₁ − c` (type 1).
    fn rule_constant(&self, ri: usize) -> BigRational {
        self.data.scalar(ri + 2) - self.data.scalar(1)
    }

    /// The pair `(λ, ν)` with rule `ri` reading `T_i^{l_i} ≡ λM₀ + νM₁` (type 2).
    fn rule_linear(&self, ri: usize) -> (BigRational, BigRational) {
        let det = det2(self.data.column(0), self.data.column(1));
        let label = ri + 2;
        (
            det2(self.data.column(label), self.data.column(1)) / &det,
            det2(self.data.column(0), self.data.column(label)) / &det,
        )
    }

    // ------------------------------------------------------------------
    // Monomial enumeration
    // ------------------------------------------------------------------

    /// All normal-form monomials of total degree at most `bound`, ascending.
    pub fn monomials_up_to_degree(&self, bound: u32) -> Vec<Monomial> {
        let mut out = BTreeSet::new();
        let mut exps = vec![0u32; self.nvars];
        self.enumerate_rec(0, bound, &mut exps, &mut out);
        out.into_iter().collect()
    }

    fn enumerate_rec(
        &self,
        idx: usize,
        remaining: u32,
        exps: &mut Vec<u32>,
        out: &mut BTreeSet<Monomial>,
    ) {
        if idx == self.nvars {
            if self.is_normal_exps(exps) {
                out.insert(Monomial::from_exps(exps.clone()));
            }
            return;
        }
        for e in 0..=remaining {
            exps[idx] = e;
            self.enumerate_rec(idx + 1, remaining - e, exps, out);
        }
        exps[idx] = 0;
    }

    // ------------------------------------------------------------------
    // Text grammar
    // ------------------------------------------------------------------

    /// Renders a polynomial with terms in descending monomial order.
    pub fn render_poly(&self, p: &Poly) -> String {
        if p.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (n, (mono, coeff)) in p.terms.iter().rev().enumerate() {
            let negative = coeff.is_negative();
            let mag = coeff.abs();
            if n == 0 {
                if negative {
                    out.push('-');
                }
            } else if negative {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            out.push_str(&self.render_term(mono, &mag));
        }
        out
    }

    pub fn render_quotient(&self, p: &QuotientPoly) -> String {
        self.render_poly(&p.poly)
    }

    fn render_term(&self, mono: &Monomial, mag: &BigRational) -> String {
        let mut factors = Vec::new();
        if mono.is_one() || !mag.is_one() {
            factors.push(render_rational(mag));
        }
        for (idx, &e) in mono.exps().iter().enumerate() {
            if e == 0 {
                continue;
            }
            let name = self.data.gen_at(idx).to_string();
            if e == 1 {
                factors.push(name);
            } else {
                factors.push(format!("{name}^{e}"));
            }
        }
        factors.join("*")
    }

    /// Parses the same grammar `render_poly` emits, plus arbitrary whitespace.
    pub fn parse_poly(&self, input: &str) -> Result<Poly, ParseError> {
        Parser { ring: self, input: input.as_bytes(), pos: 0 }.parse()
    }

    /// Parses and reduces in one step.
    pub fn parse_quotient(&self, input: &str) -> Result<QuotientPoly, ParseError> {
        let p = self.parse_poly(input)?;
        Ok(self.reduce(&p).expect("same context"))
    }
}

/// Canonical rational rendering: `p` or `p/q` in lowest terms.
pub fn render_rational(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

struct Parser<'a> {
    ring: &'a QuotientRing,
    input: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { column: self.pos + 1, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn expect(&mut self, byte: u8) -> Result<(), ParseError> {
        if self.peek() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            self.error(format!("expected '{}'", byte as char))
        }
    }

    fn parse_uint(&mut self) -> Result<u64, ParseError> {
        let start = self.pos;
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.error("expected a digit");
        }
        std::str::from_utf8(&self.input[start..self.pos])
            .unwrap()
            .parse::<u64>()
            .map_err(|_| ParseError { column: start + 1, message: "number too large".into() })
    }

    fn parse_rational(&mut self) -> Result<BigRational, ParseError> {
        let p = self.parse_uint()?;
        let mut value = BigRational::from_integer(BigInt::from(p));
        if self.peek() == Some(b'/') {
            self.pos += 1;
            let at = self.pos;
            let q = self.parse_uint()?;
            if q == 0 {
                return Err(ParseError { column: at + 1, message: "zero denominator".into() });
            }
            value /= BigRational::from_integer(BigInt::from(q));
        }
        Ok(value)
    }

    fn parse_index(&mut self) -> Result<usize, ParseError> {
        self.expect(b'[')?;
        let v = self.parse_uint()? as usize;
        self.expect(b']')?;
        Ok(v)
    }

    /// One factor: a rational, or a generator with an optional exponent.
    fn parse_factor(&mut self) -> Result<(BigRational, Option<(usize, u32)>), ParseError> {
        match self.peek() {
            Some(b'T') => {
                self.pos += 1;
                let at = self.pos;
                let block = self.parse_index()?;
                let pos = self.parse_index()?;
                let g = GeneratorId::T { block, pos };
                let Some(idx) = self.ring.data.gen_index(g) else {
                    return Err(ParseError {
                        column: at + 1,
                        message: format!("unknown generator {g}"),
                    });
                };
                let e = self.parse_exponent()?;
                Ok((BigRational::one(), Some((idx, e))))
            }
            Some(b'S') => {
                self.pos += 1;
                let at = self.pos;
                let index = self.parse_index()?;
                let g = GeneratorId::S { index };
                let Some(idx) = self.ring.data.gen_index(g) else {
                    return Err(ParseError {
                        column: at + 1,
                        message: format!("unknown generator {g}"),
                    });
                };
                let e = self.parse_exponent()?;
                Ok((BigRational::one(), Some((idx, e))))
            }
            Some(c) if c.is_ascii_digit() => Ok((self.parse_rational()?, None)),
            _ => self.error("expected a coefficient or a generator"),
        }
    }

    fn parse_exponent(&mut self) -> Result<u32, ParseError> {
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.parse_uint()?;
            u32::try_from(e)
                .map_err(|_| ParseError { column: self.pos, message: "exponent too large".into() })
        } else {
            Ok(1)
        }
    }

    fn parse_term(&mut self) -> Result<(BigRational, Vec<u32>), ParseError> {
        let mut coeff = BigRational::one();
        let mut exps = vec![0u32; self.ring.nvars];
        loop {
            self.skip_ws();
            let (c, var) = self.parse_factor()?;
            coeff *= c;
            if let Some((idx, e)) = var {
                exps[idx] += e;
            }
            self.skip_ws();
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok((coeff, exps))
    }

    fn parse(mut self) -> Result<Poly, ParseError> {
        let mut out = Poly::zero(self.ring.ctx, self.ring.nvars);
        let mut first = true;
        loop {
            self.skip_ws();
            let sign = match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    BigRational::one()
                }
                Some(b'-') => {
                    self.pos += 1;
                    -BigRational::one()
                }
                None if first => return self.error("empty polynomial"),
                None => return self.error("dangling term separator"),
                Some(_) if first => BigRational::one(),
                Some(_) => return self.error("expected '+' or '-' between terms"),
            };
            let (coeff, exps) = self.parse_term()?;
            out.add_term(Monomial::from_exps(exps), sign * coeff);
            first = false;
            self.skip_ws();
            if self.peek().is_none() {
                return Ok(out);
            }
        }
    }
}

impl fmt::Display for StructureForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructureForm::Univariate(coeffs) => {
                let parts: Vec<String> = coeffs
                    .iter()
                    .map(|(q, c)| match q {
                        0 => render_rational(c),
                        1 => format!("{}*u", render_rational(c)),
                        _ => format!("{}*u^{q}", render_rational(c)),
                    })
                    .collect();
                write!(f, "{}", parts.join(" + "))
            }
            StructureForm::Bivariate { total, coeffs } => {
                let parts: Vec<String> = coeffs
                    .iter()
                    .map(|(a, c)| {
                        let b = total - a;
                        let mut s = render_rational(c);
                        if *a > 0 {
                            s.push_str(&format!("*u^{a}"));
                        }
                        if b > 0 {
                            s.push_str(&format!("*v^{b}"));
                        }
                        s
                    })
                    .collect();
                write!(f, "{}", parts.join(" + "))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{context, quartic_threefold, quartic_threefold_m1, rigid_pair_m1, sl2};
    use crate::grading::GradingGroup;
    use num::ToPrimitive;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn quartic_ctx() -> &'static (QuotientRing, GradingGroup) {
        static CTX: OnceLock<(QuotientRing, GradingGroup)> = OnceLock::new();
        CTX.get_or_init(|| context(&quartic_threefold()))
    }

    fn sl2_ctx() -> &'static (QuotientRing, GradingGroup) {
        static CTX: OnceLock<(QuotientRing, GradingGroup)> = OnceLock::new();
        CTX.get_or_init(|| context(&sl2()))
    }

    fn one() -> BigRational {
        BigRational::one()
    }

    fn build(ring: &QuotientRing, raw: &[(Vec<u32>, i64)]) -> Poly {
        let mut p = ring.zero();
        for (exps, c) in raw {
            p = p.add_ref(&ring.poly_from_exps(
                exps.clone(),
                BigRational::from_integer(BigInt::from(*c)),
            ));
        }
        p
    }

    #[test]
    fn arithmetic_basics() {
        let (ring, _) = sl2_ctx();
        let t11 = ring.parse_poly("T[1][1]").unwrap();
        assert!(ring.add(&t11, &t11.neg_ref()).unwrap().is_zero());
        let prod = ring
            .mul(
                &ring.parse_poly("T[1][1] + 1").unwrap(),
                &ring.parse_poly("T[1][1] - 1").unwrap(),
            )
            .unwrap();
        assert_eq!(prod, ring.parse_poly("T[1][1]^2 - 1").unwrap());
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        assert_eq!(
            ring.scale(&half, &ring.parse_poly("2*T[1][1]").unwrap()).unwrap(),
            t11
        );
    }

    #[test]
    fn mixed_contexts_are_rejected() {
        let (r1, _) = sl2_ctx();
        let (r2, _) = quartic_ctx();
        let p = r1.parse_poly("T[1][1]").unwrap();
        let q = r2.parse_poly("T[1][1]").unwrap();
        assert_eq!(r1.add(&p, &q), Err(RingError::MixedContext));
        assert_eq!(r1.reduce(&q).err(), Some(RingError::MixedContext));
    }

    #[test]
    fn reduce_matches_hand_values_on_the_quartic() {
        let (ring, _) = quartic_ctx();
        let got = ring.reduce(&ring.parse_poly("T[2][1]^4").unwrap()).unwrap();
        let want = ring.parse_poly("-T[0][1]^2 - T[1][1]^2*T[1][2]").unwrap();
        assert_eq!(got.poly(), &want);
        let cubed = ring.parse_poly("T[2][1]^3").unwrap();
        assert_eq!(ring.reduce(&cubed).unwrap().poly(), &cubed);
    }

    #[test]
    fn defining_polynomials_reduce_to_zero_on_all_fixtures() {
        for (name, data) in crate::fixtures::all_fixtures() {
            let ring = QuotientRing::new(data).unwrap();
            for g in ring.defining_polynomials() {
                assert!(
                    ring.reduce(g).unwrap().is_zero(),
                    "{name}: defining polynomial does not vanish"
                );
            }
        }
    }

    #[test]
    fn quotient_equality() {
        let (ring, _) = quartic_ctx();
        let lhs = ring.parse_poly("T[2][1]^4").unwrap();
        let rhs = ring.parse_poly("-T[0][1]^2 - T[1][1]^2*T[1][2]").unwrap();
        assert!(ring.equals_in_quotient(&lhs, &rhs).unwrap());
        assert!(ring.equals_in_quotient(&lhs, &lhs).unwrap());
        let (sl2_ring, _) = sl2_ctx();
        let a = sl2_ring.parse_poly("T[1][1]").unwrap();
        let b = sl2_ring.parse_poly("T[1][2]").unwrap();
        assert!(!sl2_ring.equals_in_quotient(&a, &b).unwrap());
    }

    #[test]
    fn components_split_by_degree() {
        let data = rigid_pair_m1();
        let (ring, g) = context(&data);
        let p = ring.reduce(&ring.parse_poly("T[1][1] + S[1]").unwrap()).unwrap();
        let comps = ring.homogeneous_components(&g, &p).unwrap();
        assert_eq!(comps.len(), 2);
        let mut sum = ring.q_zero();
        for part in comps.values() {
            sum = ring.q_add(&sum, part);
        }
        assert_eq!(sum, p);
        assert!(ring
            .homogeneous_components(&g, &ring.q_zero())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn relations_are_homogeneous_of_degree_mu() {
        for (name, data) in crate::fixtures::all_fixtures() {
            let (ring, g) = context(&data);
            for rel in ring.defining_polynomials() {
                // Inspect the free-ring polynomial monomial by monomial: the
                // quotient form is zero, so classify degrees directly.
                let mut degs: Vec<_> = rel
                    .terms()
                    .map(|(m, _)| g.degree_of_monomial(m))
                    .collect();
                degs.dedup();
                assert_eq!(degs.len(), 1, "{name}: relation not homogeneous");
                assert_eq!(&degs[0], g.mu(), "{name}: relation degree is not mu");
            }
        }
    }

    #[test]
    fn structure_decomposition_on_the_determinant_surface() {
        let (ring, g) = sl2_ctx();
        let p = ring.reduce(&ring.parse_poly("T[1][1]*T[1][2]").unwrap()).unwrap();
        let dec = ring.structure_decomposition(g, &p).unwrap();
        assert!(dec.factor.is_one());
        assert_eq!(
            dec.form,
            StructureForm::Univariate(vec![(1, one())])
        );
    }

    #[test]
    fn structure_decomposition_of_a_monomial_with_s_factor() {
        let data = quartic_threefold_m1();
        let (ring, g) = context(&data);
        let p = ring.reduce(&ring.parse_poly("T[1][1]^2*S[1]").unwrap()).unwrap();
        let dec = ring.structure_decomposition(&g, &p).unwrap();
        assert_eq!(
            dec.form,
            StructureForm::Bivariate { total: 0, coeffs: vec![(0, one())] }
        );
        assert_eq!(dec.factor, Monomial::from_exps(vec![0, 2, 0, 0, 1]));
    }

    #[test]
    fn structure_decomposition_recovers_the_bivariate_form() {
        let (ring, g) = quartic_ctx();
        let p = ring
            .reduce(&ring.parse_poly("T[1][1]^2*T[1][2] + T[2][1]^4").unwrap())
            .unwrap();
        let dec = ring.structure_decomposition(g, &p).unwrap();
        assert!(dec.factor.is_one());
        assert_eq!(
            dec.form,
            StructureForm::Bivariate { total: 1, coeffs: vec![(0, one()), (1, one())] }
        );
        assert_eq!(
            ring.reduce(&ring.realize_decomposition(&dec)).unwrap(),
            p
        );
    }

    #[test]
    fn structure_decomposition_rejects_bad_inputs() {
        let (ring, g) = sl2_ctx();
        assert_eq!(
            ring.structure_decomposition(g, &ring.q_zero()),
            Err(PolyError::ZeroPolynomial)
        );
        let p = ring.reduce(&ring.parse_poly("T[1][1] + 1").unwrap()).unwrap();
        assert_eq!(
            ring.structure_decomposition(g, &p),
            Err(PolyError::NotHomogeneous)
        );
    }

    #[test]
    fn divide_by_term_inverts_multiplication() {
        let (ring, _) = quartic_ctx();
        let base = ring.reduce(&ring.parse_poly("T[2][1]^4").unwrap()).unwrap();
        let t11 = Monomial::from_exps(vec![0, 1, 0, 0]);
        let f = ring.q_mul(&base, &QuotientPoly::from_normal(ring.parse_poly("T[1][1]").unwrap()));
        let q = ring.divide_by_term(&f, &one(), &t11).unwrap();
        assert_eq!(q, base);
        let t12 = Monomial::from_exps(vec![0, 0, 1, 0]);
        assert!(ring.divide_by_term(&f, &one(), &t12).is_none());
        assert!(ring.divide_by_term(&ring.q_zero(), &one(), &t11).unwrap().is_zero());
    }

    #[test]
    fn free_division_is_exact_or_fails() {
        let (ring, _) = quartic_ctx();
        let b = ring.parse_poly("T[1][1]^2*T[1][2] + T[2][1]^4").unwrap();
        let c = ring.parse_poly("T[0][1] + 3*T[1][1]").unwrap();
        let prod = b.mul_ref(&c);
        assert_eq!(prod.div_exact_free(&b), Some(c));
        let off = prod.add_ref(&ring.one());
        assert_eq!(off.div_exact_free(&b), None);
    }

    #[test]
    fn normal_monomials_below_a_degree_bound() {
        let (ring, _) = sl2_ctx();
        let monos = ring.monomials_up_to_degree(2);
        // 15 monomials of degree ≤ 2 in four variables, minus T₂₁T₂₂.
        assert_eq!(monos.len(), 14);
        assert!(monos.iter().all(|m| ring.is_normal_monomial(m)));
        assert!(!monos.contains(&Monomial::from_exps(vec![0, 0, 1, 1])));
    }

    #[test]
    fn rendering_uses_descending_order_and_signs() {
        let (ring, _) = quartic_ctx();
        let p = ring.reduce(&ring.parse_poly("T[2][1]^4").unwrap()).unwrap();
        assert_eq!(
            ring.render_quotient(&p),
            "-T[1][1]^2*T[1][2] - T[0][1]^2"
        );
        assert_eq!(ring.render_poly(&ring.zero()), "0");
        let q = ring.parse_poly("1/2*T[0][1] - 2").unwrap();
        assert_eq!(ring.render_poly(&q), "1/2*T[0][1] - 2");
    }

    #[test]
    fn parse_errors_carry_positions() {
        let (ring, _) = quartic_ctx();
        let err = ring.parse_poly("1//2").unwrap_err();
        assert_eq!(err.column, 3);
        let err = ring.parse_poly("T[9][1]").unwrap_err();
        assert!(err.message.contains("unknown generator"));
        let err = ring.parse_poly("2*").unwrap_err();
        assert_eq!(err.column, 3);
        assert!(ring.parse_poly("").is_err());
        let err = ring.parse_poly("T[1][1] T[1][2]").unwrap_err();
        assert!(err.message.contains("expected '+' or '-'"));
    }

    fn raw_terms(nvars: usize) -> impl Strategy<Value = Vec<(Vec<u32>, i64)>> {
        prop::collection::vec(
            (prop::collection::vec(0u32..4, nvars), -5i64..=5i64),
            0..6,
        )
    }

    proptest! {
        #[test]
        fn reduce_is_idempotent(raw in raw_terms(4)) {
            let (ring, _) = quartic_ctx();
            let p = build(ring, &raw);
            let r1 = ring.reduce(&p).unwrap();
            let r2 = ring.reduce(r1.poly()).unwrap();
            prop_assert_eq!(r1, r2);
        }

        #[test]
        fn reduce_is_additive(a in raw_terms(4), b in raw_terms(4)) {
            let (ring, _) = quartic_ctx();
            let p = build(ring, &a);
            let q = build(ring, &b);
            let lhs = ring.reduce(&p.add_ref(&q)).unwrap();
            let rhs = ring.q_add(&ring.reduce(&p).unwrap(), &ring.reduce(&q).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn reduce_is_multiplicative(a in raw_terms(4), b in raw_terms(4)) {
            let (ring, _) = quartic_ctx();
            let p = build(ring, &a);
            let q = build(ring, &b);
            let lhs = ring.reduce(&p.mul_ref(&q)).unwrap();
            let rhs = ring.q_mul(&ring.reduce(&p).unwrap(), &ring.reduce(&q).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn ideal_multiples_vanish(raw in raw_terms(4), which in 0usize..2) {
            let (ring, _) = quartic_ctx();
            let (sl2_ring, _) = sl2_ctx();
            let (ring, raw_ring): (&QuotientRing, &QuotientRing) = if which == 0 {
                (ring, ring)
            } else {
                (sl2_ring, sl2_ring)
            };
            let h = build(raw_ring, &raw);
            for g in ring.defining_polynomials() {
                prop_assert!(ring.reduce(&g.mul_ref(&h)).unwrap().is_zero());
            }
        }

        #[test]
        fn rewriting_preserves_degree(exps in prop::collection::vec(0u32..6, 4)) {
            let (ring, g) = quartic_ctx();
            let mono = ring.poly_from_exps(exps.clone(), BigRational::one());
            let deg = g.degree_of_exps(&exps);
            let reduced = ring.reduce(&mono).unwrap();
            for (m, _) in reduced.poly().terms() {
                prop_assert_eq!(g.degree_of_monomial(m), deg.clone());
            }
        }

        #[test]
        fn render_parse_round_trip(raw in raw_terms(4)) {
            let (ring, _) = quartic_ctx();
            let p = build(ring, &raw);
            let text = ring.render_poly(&p);
            let back = ring.parse_poly(&text).unwrap();
            prop_assert_eq!(p, back);
        }

        #[test]
        fn structure_decomposition_round_trips_homogeneous_inputs(
            exps in prop::collection::vec(0u32..5, 4),
            extra in raw_terms(4),
        ) {
            // Build a homogeneous element: project a random polynomial onto
            // the degree class of a random monomial, then decompose.
            let (ring, g) = quartic_ctx();
            let deg = g.degree_of_exps(&exps);
            let mut p = ring.poly_from_exps(exps, BigRational::one());
            for (e, c) in &extra {
                if g.degree_of_exps(e) == deg {
                    p = p.add_ref(&ring.poly_from_exps(
                        e.clone(),
                        BigRational::from_integer(BigInt::from(*c)),
                    ));
                }
            }
            let q = ring.reduce(&p).unwrap();
            if !q.is_zero() {
                let dec = ring.structure_decomposition(g, &q).unwrap();
                let back = ring.reduce(&ring.realize_decomposition(&dec)).unwrap();
                prop_assert_eq!(back, q);
            }
        }

        #[test]
        fn divide_by_term_is_sound(raw in raw_terms(4), divisor in prop::collection::vec(0u32..3, 4)) {
            let (ring, g) = quartic_ctx();
            // Make the dividend homogeneous by projection, then multiply by
            // the divisor term and divide back.
            let p = build(ring, &raw);
            let q = ring.reduce(&p).unwrap();
            let comps = ring.homogeneous_components(g, &q).unwrap();
            let Some(part) = comps.into_values().find(|v| !v.is_zero()) else {
                return Ok(());
            };
            let mono = Monomial::from_exps(divisor);
            if !ring.is_normal_monomial(&mono) {
                return Ok(());
            }
            let c = BigRational::from_integer(BigInt::from(3));
            let f = ring.reduce(&part.poly().mul_term(&mono, &c)).unwrap();
            let got = ring.divide_by_term(&f, &c, &mono);
            prop_assert!(got.is_some());
            prop_assert_eq!(got.unwrap(), part);
        }
    }

    #[test]
    fn leading_term_agrees_with_grlex() {
        let (ring, _) = sl2_ctx();
        let p = ring.parse_poly("T[2][2] + T[1][1]^2").unwrap();
        let (m, _) = p.leading().unwrap();
        assert_eq!(m.total_degree().to_usize().unwrap(), 2);
    }
}
