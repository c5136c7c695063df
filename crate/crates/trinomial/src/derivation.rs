//! Derivations of the quotient algebra, given by their values on generators
//! and extended by linearity and the Leibniz rule.
//!
//! A candidate assignment is a derivation of the quotient exactly when the
//! Leibniz extension kills every defining polynomial modulo the ideal; the
//! certificate lists the residues per relation. On top of `apply` the module
//! decides homogeneity (and the degree), verifies local nilpotency on
//! generators up to a cap, and computes the exponential flow
//! `x ↦ Σ t^k δ^k(x)/k!` together with its relation-preservation check.

use num::{BigInt, BigRational, One};
use thiserror::Error;

use crate::grading::{GradingGroup, GroupElement};
use crate::model::GeneratorId;
use crate::polyring::{Monomial, Poly, QuotientPoly, QuotientRing, RingError};

/// Residues `reduce(δ(g_i))`, one per relation label; all zero iff the
/// assignment defines a derivation of the quotient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WellDefinedness {
    pub residues: Vec<(usize, QuotientPoly)>,
}

impl WellDefinedness {
    pub fn is_ok(&self) -> bool {
        self.residues.iter().all(|(_, r)| r.is_zero())
    }

    pub fn failing_labels(&self) -> Vec<usize> {
        self.residues
            .iter()
            .filter(|(_, r)| !r.is_zero())
            .map(|(label, _)| *label)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DerivationError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("generator {0} does not belong to the algebra")]
    UnknownGenerator(GeneratorId),
    #[error("images do not define a derivation; failing relations: {labels:?}")]
    NotWellDefined { labels: Vec<usize> },
    #[error("local nilpotency not verified within the cap")]
    NotNilpotent,
}

/// Result of iterating a derivation on one generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nilpotency {
    /// Smallest `n` with `δⁿ(x) = 0`.
    Index(u32),
    /// No vanishing up to and including the cap.
    NotVerified(u32),
}

impl Nilpotency {
    pub fn is_verified(&self) -> bool {
        matches!(self, Nilpotency::Index(_))
    }
}

/// Outcome of the generator-wise local-nilpotency check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LndStatus {
    /// Nilpotency indices per generator, in generator order.
    Verified { indices: Vec<u32> },
    /// First generator that survived the cap.
    NotVerified { generator: GeneratorId, cap: u32 },
}

impl LndStatus {
    pub fn is_lnd(&self) -> bool {
        matches!(self, LndStatus::Verified { .. })
    }
}

/// A well-defined derivation of one quotient algebra.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Derivation {
    ctx: u64,
    images: Vec<QuotientPoly>,
}

/// Computes the well-definedness certificate of an image assignment.
pub fn well_definedness(
    ring: &QuotientRing,
    images: &[QuotientPoly],
) -> Result<WellDefinedness, RingError> {
    assert_eq!(images.len(), ring.nvars(), "one image per generator");
    let mut residues = Vec::new();
    for (label, g) in ring
        .data()
        .relation_labels()
        .into_iter()
        .zip(ring.defining_polynomials())
    {
        let image = apply_free(ring, images, g)?;
        residues.push((label, ring.reduce(&image)?));
    }
    Ok(WellDefinedness { residues })
}

/// Leibniz extension applied to a free-ring polynomial, before reduction.
fn apply_free(
    ring: &QuotientRing,
    images: &[QuotientPoly],
    p: &Poly,
) -> Result<Poly, RingError> {
    let mut out = ring.zero();
    for (idx, image) in images.iter().enumerate() {
        if image.is_zero() {
            continue;
        }
        let partial = p.derivative_var(idx);
        if partial.is_zero() {
            continue;
        }
        out = ring.add(&out, &ring.mul(&partial, image.poly())?)?;
    }
    Ok(out)
}

impl Derivation {
    /// Builds a derivation from images on some generators (missing ones get
    /// zero), verifying well-definedness.
    pub fn new(
        ring: &QuotientRing,
        pairs: &[(GeneratorId, Poly)],
    ) -> Result<Self, DerivationError> {
        let mut images = vec![ring.q_zero(); ring.nvars()];
        for (g, p) in pairs {
            let idx = ring
                .data()
                .gen_index(*g)
                .ok_or(DerivationError::UnknownGenerator(*g))?;
            images[idx] = ring.reduce(p)?;
        }
        Self::from_quotient_images(ring, images)
    }

    /// Builds a derivation from a full image vector in generator order.
    pub fn from_quotient_images(
        ring: &QuotientRing,
        images: Vec<QuotientPoly>,
    ) -> Result<Self, DerivationError> {
        let cert = well_definedness(ring, &images)?;
        if !cert.is_ok() {
            return Err(DerivationError::NotWellDefined { labels: cert.failing_labels() });
        }
        Ok(Derivation { ctx: ring.ctx(), images })
    }

    pub fn zero(ring: &QuotientRing) -> Self {
        Derivation { ctx: ring.ctx(), images: vec![ring.q_zero(); ring.nvars()] }
    }

    pub fn is_zero(&self) -> bool {
        self.images.iter().all(QuotientPoly::is_zero)
    }

    /// Image of the generator with linear index `idx`.
    pub fn image(&self, idx: usize) -> &QuotientPoly {
        &self.images[idx]
    }

    pub fn images(&self) -> &[QuotientPoly] {
        &self.images
    }

    pub fn image_of(&self, ring: &QuotientRing, g: GeneratorId) -> Option<&QuotientPoly> {
        ring.data().gen_index(g).map(|idx| &self.images[idx])
    }

    fn check(&self, ring: &QuotientRing) -> Result<(), RingError> {
        if self.ctx != ring.ctx() {
            return Err(RingError::MixedContext);
        }
        Ok(())
    }

    /// Applies the derivation to a quotient element.
    pub fn apply(
        &self,
        ring: &QuotientRing,
        p: &QuotientPoly,
    ) -> Result<QuotientPoly, RingError> {
        self.check(ring)?;
        let image = apply_free(ring, &self.images, p.poly())?;
        ring.reduce(&image)
    }

    /// The multiple `h·δ`, with every image multiplied by `h`.
    pub fn multiplied_by(
        &self,
        ring: &QuotientRing,
        h: &QuotientPoly,
    ) -> Result<Derivation, DerivationError> {
        self.check(ring)?;
        let images: Vec<QuotientPoly> =
            self.images.iter().map(|im| ring.q_mul(im, h)).collect();
        Derivation::from_quotient_images(ring, images)
    }

    /// `Some(d)` when every nonzero image is homogeneous and the shifts
    /// `deg δ(x) − deg x` agree; the zero derivation reports the zero degree.
    pub fn degree_of(
        &self,
        ring: &QuotientRing,
        g: &GradingGroup,
    ) -> Result<Option<GroupElement>, RingError> {
        self.check(ring)?;
        let mut common: Option<GroupElement> = None;
        for (idx, image) in self.images.iter().enumerate() {
            if image.is_zero() {
                continue;
            }
            let Some(image_deg) = ring.homogeneous_degree(g, image)? else {
                return Ok(None);
            };
            let shift = g.sub(&image_deg, g.degree_of_gen(idx));
            match &common {
                None => common = Some(shift),
                Some(d) if *d == shift => {}
                Some(_) => return Ok(None),
            }
        }
        Ok(Some(common.unwrap_or_else(|| g.zero_element())))
    }

    /// Smallest `n ≤ cap` with `δⁿ(x) = 0` for the generator `x`.
    pub fn nilpotency_index(
        &self,
        ring: &QuotientRing,
        x: GeneratorId,
        cap: u32,
    ) -> Result<Nilpotency, DerivationError> {
        self.check(ring)?;
        assert!(cap >= 1, "cap must be positive");
        let idx = ring
            .data()
            .gen_index(x)
            .ok_or(DerivationError::UnknownGenerator(x))?;
        let mut cur = self.images[idx].clone();
        for n in 1..=cap {
            if cur.is_zero() {
                return Ok(Nilpotency::Index(n));
            }
            cur = self.apply(ring, &cur)?;
        }
        Ok(Nilpotency::NotVerified(cap))
    }

    /// Checks local nilpotency generator by generator; sufficiency on
    /// generators follows from the Leibniz rule.
    pub fn is_locally_nilpotent_on_generators(
        &self,
        ring: &QuotientRing,
        cap: u32,
    ) -> Result<LndStatus, DerivationError> {
        self.check(ring)?;
        let mut indices = Vec::with_capacity(ring.nvars());
        for (idx, g) in ring.data().generators().into_iter().enumerate() {
            let _ = idx;
            match self.nilpotency_index(ring, g, cap)? {
                Nilpotency::Index(n) => indices.push(n),
                Nilpotency::NotVerified(c) => {
                    return Ok(LndStatus::NotVerified { generator: g, cap: c })
                }
            }
        }
        Ok(LndStatus::Verified { indices })
    }

    /// A generator `x` with `δ(x) ≠ 0` divisible by `x`: in a domain this
    /// rules out local nilpotency outright, catching Euler-type derivations
    /// the iteration cap would merely fail to verify.
    pub fn self_divisibility_obstruction(&self, ring: &QuotientRing) -> Option<GeneratorId> {
        for (idx, image) in self.images.iter().enumerate() {
            if image.is_zero() {
                continue;
            }
            let mut exps = vec![0u32; ring.nvars()];
            exps[idx] = 1;
            let mono = Monomial::from_exps(exps);
            if ring
                .divide_by_term(image, &BigRational::one(), &mono)
                .is_some()
            {
                return Some(ring.data().gen_at(idx));
            }
        }
        None
    }

    /// Looks for a rotation-style certificate of non-nilpotency: a generator
    /// `x` and depth `k ≤ depth` with `δᵏ(x) = c·x` for some nonzero `c`
    /// killed by `δ`. Then `δ^{mk}(x) = cᵐ·x` never vanishes in a domain, so
    /// the derivation is definitively not locally nilpotent.
    pub fn non_nilpotency_certificate(
        &self,
        ring: &QuotientRing,
        depth: u32,
    ) -> Result<Option<(GeneratorId, u32, QuotientPoly)>, DerivationError> {
        for idx in 0..ring.nvars() {
            if self.images[idx].is_zero() {
                continue;
            }
            let mut exps = vec![0u32; ring.nvars()];
            exps[idx] = 1;
            let mono = Monomial::from_exps(exps);
            let mut current = self.images[idx].clone();
            for k in 1..=depth {
                if current.is_zero() {
                    break;
                }
                if let Some(c) = ring.divide_by_term(&current, &BigRational::one(), &mono) {
                    if !c.is_zero() && self.apply(ring, &c)?.is_zero() {
                        return Ok(Some((ring.data().gen_at(idx), k, c)));
                    }
                }
                current = self.apply(ring, &current)?;
            }
        }
        Ok(None)
    }

    /// A generous iteration cap: enough for every template derivation, whose
    /// chains shrink block content strictly on each step.
    pub fn default_cap(&self, ring: &QuotientRing) -> u32 {
        let block_total: u32 = ring
            .data()
            .block_labels()
            .map(|label| ring.data().l(label).iter().sum::<u32>())
            .sum();
        let image_total: u32 = self
            .images
            .iter()
            .filter_map(|im| im.poly().total_degree())
            .sum();
        2 + block_total + image_total
    }

    /// Renders nonzero images, one line per generator.
    pub fn render(&self, ring: &QuotientRing) -> String {
        let mut lines = Vec::new();
        for (idx, image) in self.images.iter().enumerate() {
            if image.is_zero() {
                continue;
            }
            let g = ring.data().gen_at(idx);
            lines.push(format!("D({g}) = {}", ring.render_quotient(image)));
        }
        if lines.is_empty() {
            lines.push("D = 0".to_string());
        }
        lines.join("\n")
    }
}

/// A polynomial in the flow parameter `t` with quotient coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TPoly {
    /// Coefficient of `t^k` at index `k`; no trailing zeros.
    coeffs: Vec<QuotientPoly>,
}

impl TPoly {
    pub fn zero() -> Self {
        TPoly { coeffs: Vec::new() }
    }

    pub fn constant(value: QuotientPoly) -> Self {
        let mut p = TPoly { coeffs: vec![value] };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(QuotientPoly::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree in `t`, or `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, k: usize, ring: &QuotientRing) -> QuotientPoly {
        self.coeffs.get(k).cloned().unwrap_or_else(|| ring.q_zero())
    }

    pub fn coeffs(&self) -> &[QuotientPoly] {
        &self.coeffs
    }

    pub fn push_term(&mut self, k: usize, value: QuotientPoly, ring: &QuotientRing) {
        while self.coeffs.len() <= k {
            self.coeffs.push(ring.q_zero());
        }
        self.coeffs[k] = ring.q_add(&self.coeffs[k], &value);
        self.trim();
    }

    pub fn add(&self, other: &TPoly, ring: &QuotientRing) -> TPoly {
        let mut coeffs = Vec::new();
        for k in 0..self.coeffs.len().max(other.coeffs.len()) {
            coeffs.push(ring.q_add(&self.coeff(k, ring), &other.coeff(k, ring)));
        }
        let mut out = TPoly { coeffs };
        out.trim();
        out
    }

    pub fn mul(&self, other: &TPoly, ring: &QuotientRing) -> TPoly {
        if self.is_zero() || other.is_zero() {
            return TPoly::zero();
        }
        let mut coeffs =
            vec![ring.q_zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = ring.q_add(&coeffs[i + j], &ring.q_mul(a, b));
            }
        }
        let mut out = TPoly { coeffs };
        out.trim();
        out
    }

    pub fn scale(&self, c: &BigRational, ring: &QuotientRing) -> TPoly {
        let mut out = TPoly {
            coeffs: self.coeffs.iter().map(|q| ring.q_scale(c, q)).collect(),
        };
        out.trim();
        out
    }

    pub fn pow(&self, e: u32, ring: &QuotientRing) -> TPoly {
        let mut out = TPoly::constant(ring.q_one());
        for _ in 0..e {
            out = out.mul(self, ring);
        }
        out
    }

    /// Renders as `c0 + t*c1 + t^2*c2 + …`, parenthesizing multi-term
    /// coefficients.
    pub fn render(&self, ring: &QuotientRing) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let body = ring.render_quotient(c);
            let piece = match k {
                0 => body,
                _ => {
                    let t = if k == 1 { "t".to_string() } else { format!("t^{k}") };
                    if c.poly().num_terms() == 1 && !body.starts_with('-') {
                        if body == "1" {
                            t
                        } else {
                            format!("{t}*{body}")
                        }
                    } else {
                        format!("{t}*({body})")
                    }
                }
            };
            parts.push(piece);
        }
        parts.join(" + ")
    }
}

/// The exponential flow of a locally nilpotent derivation: per generator,
/// the finite sum `Σ t^k δ^k(x)/k!`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flow {
    images: Vec<TPoly>,
}

/// Computes the flow after verifying nilpotency on generators within `cap`.
pub fn flow(
    ring: &QuotientRing,
    delta: &Derivation,
    cap: u32,
) -> Result<Flow, DerivationError> {
    if !delta.is_locally_nilpotent_on_generators(ring, cap)?.is_lnd() {
        return Err(DerivationError::NotNilpotent);
    }
    let mut images = Vec::with_capacity(ring.nvars());
    for idx in 0..ring.nvars() {
        let mut exps = vec![0u32; ring.nvars()];
        exps[idx] = 1;
        let x = QuotientPoly::from_normal(ring.poly_from_exps(exps, BigRational::one()));
        let mut series = TPoly::zero();
        let mut cur = x;
        let mut factorial = BigInt::one();
        let mut k = 0usize;
        while !cur.is_zero() {
            let inv = BigRational::new(BigInt::one(), factorial.clone());
            series.push_term(k, ring.q_scale(&inv, &cur), ring);
            cur = delta.apply(ring, &cur)?;
            k += 1;
            factorial *= BigInt::from(k);
        }
        images.push(series);
    }
    Ok(Flow { images })
}

impl Flow {
    pub fn image(&self, idx: usize) -> &TPoly {
        &self.images[idx]
    }

    pub fn images(&self) -> &[TPoly] {
        &self.images
    }

    /// Substitutes the flow images into a free-ring polynomial.
    pub fn substitute(&self, ring: &QuotientRing, p: &Poly) -> TPoly {
        let mut out = TPoly::zero();
        for (mono, coeff) in p.terms() {
            let mut term = TPoly::constant(ring.q_one());
            for (idx, &e) in mono.exps().iter().enumerate() {
                if e > 0 {
                    term = term.mul(&self.images[idx].pow(e, ring), ring);
                }
            }
            out = out.add(&term.scale(coeff, ring), ring);
        }
        out
    }

    /// True when substituting the flow into every defining polynomial yields
    /// the zero polynomial in `t`.
    pub fn preserves_relations(&self, ring: &QuotientRing) -> bool {
        ring.defining_polynomials()
            .iter()
            .all(|g| self.substitute(ring, g).is_zero())
    }

    /// Renders one `x -> exp(t d)(x)` line per generator.
    pub fn render(&self, ring: &QuotientRing) -> String {
        let mut lines = Vec::new();
        for (idx, series) in self.images.iter().enumerate() {
            let g = ring.data().gen_at(idx);
            lines.push(format!("{g} -> {}", series.render(ring)));
        }
        lines.join("\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{context, quartic_threefold, rigid_pair_m1, sl2};
    use crate::grading::GradingGroup;
    use num::One;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn sl2_ctx() -> &'static (QuotientRing, GradingGroup) {
        static CTX: OnceLock<(QuotientRing, GradingGroup)> = OnceLock::new();
        CTX.get_or_init(|| context(&sl2()))
    }

    fn quartic_ctx() -> &'static (QuotientRing, GradingGroup) {
        static CTX: OnceLock<(QuotientRing, GradingGroup)> = OnceLock::new();
        CTX.get_or_init(|| context(&quartic_threefold()))
    }

    fn t(block: usize, pos: usize) -> GeneratorId {
        GeneratorId::T { block, pos }
    }

    fn s(index: usize) -> GeneratorId {
        GeneratorId::S { index }
    }

    /// δ(T₁₁) = T₂₂, δ(T₂₁) = T₁₂ on the determinant surface.
    fn sl2_delta() -> Derivation {
        let (ring, _) = sl2_ctx();
        Derivation::new(
            ring,
            &[
                (t(1, 1), ring.parse_poly("T[2][2]").unwrap()),
                (t(2, 1), ring.parse_poly("T[1][2]").unwrap()),
            ],
        )
        .unwrap()
    }

    /// δ(T₀₁) = T₁₁², δ(T₁₂) = −2T₀₁ on the quartic threefold.
    fn quartic_delta_b() -> Derivation {
        let (ring, _) = quartic_ctx();
        Derivation::new(
            ring,
            &[
                (t(0, 1), ring.parse_poly("T[1][1]^2").unwrap()),
                (t(1, 2), ring.parse_poly("-2*T[0][1]").unwrap()),
            ],
        )
        .unwrap()
    }

    #[test]
    fn hand_built_derivations_are_well_defined() {
        let _ = sl2_delta();
        let _ = quartic_delta_b();
    }

    #[test]
    fn bad_images_are_rejected_with_the_failing_relation() {
        let (ring, _) = sl2_ctx();
        let err = Derivation::new(ring, &[(t(1, 1), ring.one())]).unwrap_err();
        assert_eq!(err, DerivationError::NotWellDefined { labels: vec![1] });
    }

    #[test]
    fn apply_follows_the_leibniz_rule_on_hand_values() {
        let (ring, _) = quartic_ctx();
        let delta = quartic_delta_b();
        let p = ring.reduce(&ring.parse_poly("T[0][1]*T[1][2]").unwrap()).unwrap();
        let got = delta.apply(ring, &p).unwrap();
        let want = ring
            .reduce(&ring.parse_poly("T[1][1]^2*T[1][2] - 2*T[0][1]^2").unwrap())
            .unwrap();
        assert_eq!(got, want);
        let c = ring.reduce(&ring.parse_poly("7").unwrap()).unwrap();
        assert!(delta.apply(ring, &c).unwrap().is_zero());
    }

    #[test]
    fn sl2_delta_kills_the_relation() {
        let (ring, _) = sl2_ctx();
        let delta = sl2_delta();
        for g in ring.defining_polynomials() {
            let image = delta.apply(ring, &ring.reduce(g).unwrap()).unwrap();
            assert!(image.is_zero());
        }
    }

    #[test]
    fn degree_of_matches_the_grading_relations() {
        let (ring, g) = quartic_ctx();
        let delta = quartic_delta_b();
        let d = delta.degree_of(ring, g).unwrap().expect("homogeneous");
        // d = 2·deg T₁₁ − deg T₀₁ = μ − deg T₀₁ − deg T₁₂.
        let two = BigInt::from(2);
        let want = g.sub(&g.scale(&two, g.degree_of_gen(1)), g.degree_of_gen(0));
        assert_eq!(d, want);
        let alt = g.sub(
            &g.sub(g.mu(), g.degree_of_gen(0)),
            g.degree_of_gen(2),
        );
        assert_eq!(d, alt);
    }

    #[test]
    fn zero_derivation_has_zero_degree_and_is_lnd() {
        let (ring, g) = sl2_ctx();
        let z = Derivation::zero(ring);
        assert_eq!(z.degree_of(ring, g).unwrap(), Some(g.zero_element()));
        assert!(z.is_locally_nilpotent_on_generators(ring, 1).unwrap().is_lnd());
        let f = flow(ring, &z, 1).unwrap();
        for idx in 0..ring.nvars() {
            assert_eq!(f.image(idx).degree(), Some(0));
        }
    }

    #[test]
    fn inhomogeneous_images_yield_no_degree() {
        let data = rigid_pair_m1();
        let (ring, g) = context(&data);
        let delta =
            Derivation::new(&ring, &[(s(1), ring.parse_poly("S[1] + 1").unwrap())]).unwrap();
        assert_eq!(delta.degree_of(&ring, &g).unwrap(), None);
    }

    #[test]
    fn nilpotency_indices_match_hand_chains() {
        let (ring, _) = sl2_ctx();
        let delta = sl2_delta();
        assert_eq!(
            delta.nilpotency_index(ring, t(1, 1), 10).unwrap(),
            Nilpotency::Index(2)
        );
        assert_eq!(
            delta.nilpotency_index(ring, t(2, 2), 10).unwrap(),
            Nilpotency::Index(1)
        );
        let (qring, _) = quartic_ctx();
        let qdelta = quartic_delta_b();
        assert_eq!(
            qdelta.nilpotency_index(qring, t(1, 2), 10).unwrap(),
            Nilpotency::Index(3)
        );
        assert!(delta
            .is_locally_nilpotent_on_generators(ring, 10)
            .unwrap()
            .is_lnd());
    }

    #[test]
    fn euler_type_derivations_are_obstructed() {
        let data = rigid_pair_m1();
        let (ring, _) = context(&data);
        let euler =
            Derivation::new(&ring, &[(s(1), ring.parse_poly("S[1]").unwrap())]).unwrap();
        assert_eq!(
            euler.nilpotency_index(&ring, s(1), 25).unwrap(),
            Nilpotency::NotVerified(25)
        );
        assert_eq!(euler.self_divisibility_obstruction(&ring), Some(s(1)));
        let ds = Derivation::new(&ring, &[(s(1), ring.one())]).unwrap();
        assert_eq!(ds.self_divisibility_obstruction(&ring), None);
        assert_eq!(flow(&ring, &euler, 5).unwrap_err(), DerivationError::NotNilpotent);
    }

    #[test]
    fn rotations_are_certified_non_nilpotent() {
        let (ring, _) = quartic_ctx();
        // δT₀₁ = T₁₁T₁₂, δT₁₁ = −T₀₁ rotates the first two block monomials
        // into each other; δ² scales each support generator by −T₁₂, which δ
        // kills, so no power of δ annihilates T₀₁.
        let rotation = Derivation::new(
            ring,
            &[
                (t(0, 1), ring.parse_poly("T[1][1]*T[1][2]").unwrap()),
                (t(1, 1), ring.parse_poly("-T[0][1]").unwrap()),
            ],
        )
        .unwrap();
        assert_eq!(rotation.self_divisibility_obstruction(ring), None);
        let (gen, depth, c) = rotation
            .non_nilpotency_certificate(ring, 4)
            .unwrap()
            .expect("rotation certificate");
        assert_eq!(gen, t(0, 1));
        assert_eq!(depth, 2);
        assert_eq!(ring.render_quotient(&c), "-T[1][2]");
        assert!(!rotation
            .is_locally_nilpotent_on_generators(ring, 40)
            .unwrap()
            .is_lnd());
        // Genuine locally nilpotent derivations never produce a certificate.
        assert_eq!(quartic_delta_b().non_nilpotency_certificate(ring, 8).unwrap(), None);
    }

    #[test]
    fn flow_of_the_sl2_derivation_matches_hand_values() {
        let (ring, _) = sl2_ctx();
        let delta = sl2_delta();
        let f = flow(ring, &delta, delta.default_cap(ring)).unwrap();
        let rendered = f.render(ring);
        assert!(rendered.contains("T[1][1] -> T[1][1] + t*T[2][2]"));
        assert!(rendered.contains("T[2][1] -> T[2][1] + t*T[1][2]"));
        assert!(rendered.contains("T[1][2] -> T[1][2]"));
        assert!(rendered.contains("T[2][2] -> T[2][2]"));
        assert!(f.preserves_relations(ring));
    }

    #[test]
    fn translation_flow_of_a_free_variable() {
        let data = rigid_pair_m1();
        let (ring, _) = context(&data);
        let ds = Derivation::new(&ring, &[(s(1), ring.one())]).unwrap();
        let f = flow(&ring, &ds, 5).unwrap();
        assert!(f.render(&ring).contains("S[1] -> S[1] + t"));
        assert!(f.preserves_relations(&ring));
    }

    #[test]
    fn flow_of_the_quartic_derivation_preserves_the_relation() {
        let (ring, _) = quartic_ctx();
        let delta = quartic_delta_b();
        let f = flow(ring, &delta, delta.default_cap(ring)).unwrap();
        assert!(f.preserves_relations(ring));
        // T₁₂ flows through degree 2 in t: −2T₀₁ then −2T₁₁², halved by 2!.
        let series = f.image(2);
        assert_eq!(series.degree(), Some(2));
        let want = ring.q_scale(
            &BigRational::from_integer(BigInt::from(-1)),
            &ring.reduce(&ring.parse_poly("T[1][1]^2").unwrap()).unwrap(),
        );
        assert_eq!(series.coeff(2, ring), want);
    }

    #[test]
    fn render_lists_nonzero_images_only() {
        let (ring, _) = sl2_ctx();
        let delta = sl2_delta();
        let text = delta.render(ring);
        assert_eq!(text, "D(T[1][1]) = T[2][2]\nD(T[2][1]) = T[1][2]");
        assert_eq!(Derivation::zero(ring).render(ring), "D = 0");
    }

    fn raw_terms() -> impl Strategy<Value = Vec<(Vec<u32>, i64)>> {
        prop::collection::vec(
            (prop::collection::vec(0u32..3, 4), -4i64..=4i64),
            0..5,
        )
    }

    fn build(ring: &QuotientRing, raw: &[(Vec<u32>, i64)]) -> QuotientPoly {
        let mut p = ring.zero();
        for (exps, c) in raw {
            p = p.add_ref(&ring.poly_from_exps(
                exps.clone(),
                BigRational::from_integer(BigInt::from(*c)),
            ));
        }
        ring.reduce(&p).unwrap()
    }

    proptest! {
        #[test]
        fn leibniz_identity(a in raw_terms(), b in raw_terms()) {
            let (ring, _) = quartic_ctx();
            let delta = quartic_delta_b();
            let p = build(ring, &a);
            let q = build(ring, &b);
            let lhs = delta.apply(ring, &ring.q_mul(&p, &q)).unwrap();
            let rhs = ring.q_add(
                &ring.q_mul(&delta.apply(ring, &p).unwrap(), &q),
                &ring.q_mul(&p, &delta.apply(ring, &q).unwrap()),
            );
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn linearity(a in raw_terms(), b in raw_terms(), ca in -3i64..=3, cb in -3i64..=3) {
            let (ring, _) = quartic_ctx();
            let delta = quartic_delta_b();
            let p = build(ring, &a);
            let q = build(ring, &b);
            let ca = BigRational::from_integer(BigInt::from(ca));
            let cb = BigRational::from_integer(BigInt::from(cb));
            let combo = ring.q_add(&ring.q_scale(&ca, &p), &ring.q_scale(&cb, &q));
            let lhs = delta.apply(ring, &combo).unwrap();
            let rhs = ring.q_add(
                &ring.q_scale(&ca, &delta.apply(ring, &p).unwrap()),
                &ring.q_scale(&cb, &delta.apply(ring, &q).unwrap()),
            );
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn homogeneity_transport(exps in prop::collection::vec(0u32..4, 4)) {
            let (ring, g) = quartic_ctx();
            let delta = quartic_delta_b();
            let d = delta.degree_of(ring, g).unwrap().unwrap();
            let p = ring.reduce(&ring.poly_from_exps(exps.clone(), BigRational::one())).unwrap();
            let w = g.degree_of_exps(&exps);
            let image = delta.apply(ring, &p).unwrap();
            if !image.is_zero() {
                let image_deg = ring.homogeneous_degree(g, &image).unwrap();
                prop_assert_eq!(image_deg, Some(g.add(&w, &d)));
            }
        }
    }
}
