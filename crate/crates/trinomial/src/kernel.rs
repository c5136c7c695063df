//! Kernel membership, kernel-element generation, and multiples `h·δ`.
//!
//! Membership of a homogeneous element runs through two independent engines
//! whose agreement is asserted on every call: engine A evaluates `δ(h)` and
//! tests for zero, engine B matches `h` against the closed form its template
//! admits — absence of `S_p` for `∂/∂S_p`; a single term supported on kernel
//! variables for `δ_C`; and for `δ_{C,β}` a power of the binomial
//! `β₂T₁^{l₁} − β₁T₂^{l₂}` stripped off by exact division, times such a
//! term. Generation enumerates the closed forms directly, so every emitted
//! element arrives with a pattern certificate.

use std::collections::BTreeSet;

use num::{BigRational, One};
use thiserror::Error;

use crate::derivation::{Derivation, DerivationError};
use crate::elementary::{ElementaryInstance, FamilyKind};
use crate::grading::GradingGroup;
use crate::model::TrinomialKind;
use crate::par::map_maybe_par;
use crate::polyring::{
    Monomial, Poly, QuotientPoly, QuotientRing, RingError, StructureDecomposition, StructureForm,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Derivation(#[from] DerivationError),
    #[error("kernel membership is characterized for homogeneous elements only")]
    NotHomogeneous,
    #[error("membership engines disagree on `{rendered}`; this is a bug")]
    EngineDisagreement { rendered: String },
    #[error("multiplier is not a kernel element")]
    NotInKernel,
}

/// A homogeneous kernel element in closed form: `α · F · B^e · ∏T^b · ∏S^d`
/// with `F` a structural polynomial in the low block monomials (derivative
/// templates only) and `B` the β-binomial (`δ_{C,β}` only).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelPattern {
    pub alpha: BigRational,
    pub f: Option<StructureForm>,
    pub binomial_exp: u32,
    /// Exponents on the `T` variables, supported on kernel variables.
    pub b: Vec<u32>,
    /// Exponents on the `S` variables; the differentiated one stays 0.
    pub d: Vec<u32>,
}

impl KernelPattern {
    /// The monomial `∏T^b·∏S^d` with coefficient `alpha`.
    fn monomial_part(&self, ring: &QuotientRing) -> Poly {
        let data = ring.data();
        let mut exps = vec![0u32; ring.nvars()];
        exps[..data.n()].copy_from_slice(&self.b);
        exps[data.n()..].copy_from_slice(&self.d);
        ring.poly_from_exps(exps, self.alpha.clone())
    }

    /// Builds the element the pattern denotes, in normal form.
    pub fn realize(&self, ring: &QuotientRing, inst: &ElementaryInstance) -> QuotientPoly {
        let mut p = self.monomial_part(ring);
        if let Some(form) = &self.f {
            let dec = StructureDecomposition {
                form: form.clone(),
                factor: Monomial::one(ring.nvars()),
            };
            p = p.mul_ref(&ring.realize_decomposition(&dec));
        }
        if self.binomial_exp > 0 {
            let beta = inst.beta().expect("binomial patterns come from δ_{C,β}");
            p = p.mul_ref(&binomial_poly(ring, beta).pow_u32(self.binomial_exp));
        }
        ring.reduce(&p).expect("same context")
    }
}

/// The binomial `β₂T₁^{l₁} − β₁T₂^{l₂}`, killed by `δ_{C,β}`.
pub fn binomial_poly(ring: &QuotientRing, beta: &[BigRational]) -> Poly {
    ring.block_monomial(1)
        .scale_ref(&beta[2])
        .sub_ref(&ring.block_monomial(2).scale_ref(&beta[1]))
}

/// Indices of `T` variables with nonzero image.
fn non_kernel_vars(ring: &QuotientRing, inst: &ElementaryInstance) -> Vec<usize> {
    (0..ring.data().n())
        .filter(|&idx| !inst.derivation().image(idx).is_zero())
        .collect()
}

/// True when `p` is a single term whose `T`-support avoids every non-kernel
/// variable.
fn single_kernel_term(p: &Poly, non_kernel: &[usize]) -> bool {
    if p.num_terms() != 1 {
        return false;
    }
    let (mono, _) = p.leading().expect("single term");
    non_kernel.iter().all(|&idx| mono.exp(idx) == 0)
}

/// Pattern matcher against the closed form of the instance's template.
fn engine_b(ring: &QuotientRing, inst: &ElementaryInstance, h: &QuotientPoly) -> bool {
    if h.is_zero() {
        return true;
    }
    match inst.kind() {
        FamilyKind::Ds { p } => {
            let sidx = ring.data().n() + p - 1;
            h.poly().terms().all(|(mono, _)| mono.exp(sidx) == 0)
        }
        FamilyKind::DeltaC { .. } => {
            single_kernel_term(h.poly(), &non_kernel_vars(ring, inst))
        }
        FamilyKind::DeltaCBeta21 { .. } | FamilyKind::DeltaCBeta22 { .. } => {
            let beta = inst.beta().expect("δ_{C,β} instance carries β");
            let bnf = ring
                .reduce(&binomial_poly(ring, beta))
                .expect("same context");
            let mut cur = h.poly().clone();
            while let Some(q) = cur.div_exact_free(bnf.poly()) {
                cur = q;
            }
            single_kernel_term(&cur, &non_kernel_vars(ring, inst))
        }
    }
}

/// Decides `h ∈ Ker δ` for homogeneous `h`, running both engines and
/// asserting their agreement.
pub fn kernel_membership(
    ring: &QuotientRing,
    g: &GradingGroup,
    inst: &ElementaryInstance,
    h: &QuotientPoly,
) -> Result<bool, KernelError> {
    if ring.homogeneous_degree(g, h)?.is_none() {
        return Err(KernelError::NotHomogeneous);
    }
    let verdict_a = inst.derivation().apply(ring, h)?.is_zero();
    let verdict_b = engine_b(ring, inst, h);
    if verdict_a != verdict_b {
        return Err(KernelError::EngineDisagreement { rendered: ring.render_quotient(h) });
    }
    Ok(verdict_a)
}

/// Bounds for kernel-element generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelBounds {
    /// Maximum degree of the structural part: `F`-degree or binomial power.
    pub structural: u32,
    /// Maximum total degree of the kernel-variable monomial `∏T^b`.
    pub support: u32,
    /// Maximum exponent of each free variable `S_k`.
    pub free: u32,
}

/// Exponent vectors over `slots` with entries bounded by `total` and total
/// degree at most `total`.
fn bounded_exps(slots: &[usize], total: u32, len: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32; len]];
    for &slot in slots {
        let mut next = Vec::new();
        for exps in out {
            let used: u32 = exps.iter().sum();
            for e in 0..=(total - used) {
                let mut v = exps.clone();
                v[slot] = e;
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Structural forms with coefficients in `{−1, 0, 1}`, not all zero.
fn sign_patterns(len: usize) -> Vec<Vec<i8>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::new();
        for pat in out {
            for s in [-1i8, 0, 1] {
                let mut v = pat.clone();
                v.push(s);
                next.push(v);
            }
        }
        out = next;
    }
    out.retain(|pat| pat.iter().any(|&s| s != 0));
    out
}

fn structural_forms(
    kind: TrinomialKind,
    structural: u32,
) -> Vec<StructureForm> {
    let mut out = Vec::new();
    match kind {
        TrinomialKind::Type1 => {
            // Coefficient patterns on powers 0..=structural of T₁^{l₁}.
            for pat in sign_patterns(structural as usize + 1) {
                let coeffs: Vec<(u32, BigRational)> = pat
                    .iter()
                    .enumerate()
                    .filter(|(_, &s)| s != 0)
                    .map(|(q, &s)| (q as u32, BigRational::from_integer(s.into())))
                    .collect();
                out.push(StructureForm::Univariate(coeffs));
            }
        }
        TrinomialKind::Type2 => {
            for total in 0..=structural {
                for pat in sign_patterns(total as usize + 1) {
                    let coeffs: Vec<(u32, BigRational)> = pat
                        .iter()
                        .enumerate()
                        .filter(|(_, &s)| s != 0)
                        .map(|(a, &s)| (a as u32, BigRational::from_integer(s.into())))
                        .collect();
                    out.push(StructureForm::Bivariate { total, coeffs });
                }
            }
        }
    }
    out
}

/// Enumerates the closed-form patterns of the instance's template within
/// the bounds.
pub fn enumerate_kernel_patterns(
    ring: &QuotientRing,
    inst: &ElementaryInstance,
    bounds: KernelBounds,
) -> Vec<KernelPattern> {
    let data = ring.data();
    let n = data.n();
    let m = data.m();
    let kernel_t: Vec<usize> = (0..n)
        .filter(|&idx| inst.derivation().image(idx).is_zero())
        .collect();
    let s_slots: Vec<usize> = match inst.kind() {
        FamilyKind::Ds { p } => (0..m).filter(|&k| k + 1 != *p).collect(),
        _ => (0..m).collect(),
    };
    let b_choices = bounded_exps(&kernel_t, bounds.support, n);
    let d_choices = bounded_exps(&s_slots, bounds.free * s_slots.len() as u32, m);
    let mut patterns = Vec::new();
    let base = KernelPattern {
        alpha: BigRational::one(),
        f: None,
        binomial_exp: 0,
        b: vec![0; n],
        d: vec![0; m],
    };
    for b in &b_choices {
        for d in &d_choices {
            if d.iter().any(|&e| e > bounds.free) {
                continue;
            }
            let stem = KernelPattern { b: b.clone(), d: d.clone(), ..base.clone() };
            match inst.kind() {
                FamilyKind::Ds { .. } => {
                    for form in structural_forms(data.kind(), bounds.structural) {
                        patterns.push(KernelPattern { f: Some(form), ..stem.clone() });
                    }
                }
                FamilyKind::DeltaC { .. } => patterns.push(stem),
                FamilyKind::DeltaCBeta21 { .. } | FamilyKind::DeltaCBeta22 { .. } => {
                    for e in 0..=bounds.structural {
                        patterns.push(KernelPattern { binomial_exp: e, ..stem.clone() });
                    }
                }
            }
        }
    }
    patterns
}

/// Emits the distinct kernel elements the patterns denote, each certified
/// by direct evaluation. Deterministic given the bounds.
pub fn generate_kernel_elements(
    ring: &QuotientRing,
    inst: &ElementaryInstance,
    bounds: KernelBounds,
) -> Vec<QuotientPoly> {
    generate_kernel_elements_with(ring, inst, bounds, true)
}

/// Like [`generate_kernel_elements`] but with explicit control over the
/// parallel driver; `parallel = false` forces the sequential path.
pub fn generate_kernel_elements_with(
    ring: &QuotientRing,
    inst: &ElementaryInstance,
    bounds: KernelBounds,
    parallel: bool,
) -> Vec<QuotientPoly> {
    let patterns = enumerate_kernel_patterns(ring, inst, bounds);
    let realized = map_maybe_par(parallel, patterns, |pat| {
        let h = pat.realize(ring, inst);
        let image = inst
            .derivation()
            .apply(ring, &h)
            .expect("same context");
        assert!(
            image.is_zero(),
            "pattern `{}` escaped the kernel; this is a bug",
            ring.render_quotient(&h),
        );
        h
    });
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for h in realized {
        if seen.insert(ring.render_quotient(&h)) {
            out.push(h);
        }
    }
    out
}

/// The general form `h·δ`: every image multiplied by the kernel element
/// `h`. Local nilpotency survives because the chains only pick up powers
/// of `h`.
pub fn general_lnd_form(
    ring: &QuotientRing,
    g: &GradingGroup,
    inst: &ElementaryInstance,
    h: &QuotientPoly,
) -> Result<Derivation, KernelError> {
    if !kernel_membership(ring, g, inst, h)? {
        return Err(KernelError::NotInKernel);
    }
    let hd = inst.derivation().multiplied_by(ring, h)?;
    let cap = hd.default_cap(ring);
    if !hd.is_locally_nilpotent_on_generators(ring, cap)?.is_lnd() {
        return Err(KernelError::Derivation(DerivationError::NotNilpotent));
    }
    Ok(hd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{context, quartic_threefold, rigid_pair_m1, sl2};
    use crate::model::rat;
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

    /// Case-a instance on the quartic threefold: i₀ = 0, β = (0, 1, −1).
    fn case_a() -> ElementaryInstance {
        let (ring, _) = quartic_ctx();
        ElementaryInstance::delta_c_beta(ring, &[1, 2, 1], &[rat(0), rat(1), rat(-1)]).unwrap()
    }

    /// Case-b instance: i₀ = 2, β = (1, −1, 0).
    fn case_b() -> ElementaryInstance {
        let (ring, _) = quartic_ctx();
        ElementaryInstance::delta_c_beta(ring, &[1, 2, 1], &[rat(1), rat(-1), rat(0)]).unwrap()
    }

    fn member(inst: &ElementaryInstance, ctx: &(QuotientRing, GradingGroup), src: &str) -> bool {
        let (ring, g) = ctx;
        let h = ring.reduce(&ring.parse_poly(src).unwrap()).unwrap();
        kernel_membership(ring, g, inst, &h).unwrap()
    }

    #[test]
    fn case_a_membership_hand_values() {
        let inst = case_a();
        let ctx = quartic_ctx();
        assert!(member(&inst, ctx, "T[1][1]"));
        assert!(member(&inst, ctx, "T[0][1]"));
        assert!(!member(&inst, ctx, "T[1][2]"));
        assert!(!member(&inst, ctx, "T[2][1]"));
        // The β-binomial is a kernel element; here it reduces to T₀₁².
        let (ring, _) = ctx;
        let b = ring
            .reduce(&ring.parse_poly("-T[1][1]^2*T[1][2] - T[2][1]^4").unwrap())
            .unwrap();
        assert_eq!(b, ring.reduce(&ring.parse_poly("T[0][1]^2").unwrap()).unwrap());
        assert!(member(&inst, ctx, "-T[1][1]^2*T[1][2] - T[2][1]^4"));
    }

    #[test]
    fn case_b_membership_hand_values() {
        let inst = case_b();
        let ctx = quartic_ctx();
        // Exceptional block 2: its generator is a kernel variable.
        assert!(member(&inst, ctx, "T[2][1]"));
        assert!(member(&inst, ctx, "T[1][1]"));
        assert!(!member(&inst, ctx, "T[0][1]"));
        assert!(!member(&inst, ctx, "T[1][2]"));
        // β-binomial: −T₁₁²T₁₂ − T₂₁⁴ with β = (1,−1,0) gives −M₁·β₂ + ...
        // here B = 0·M₁ + 1·M₂ = T₂₁⁴, which is a kernel monomial.
        assert!(member(&inst, ctx, "T[2][1]^4"));
    }

    #[test]
    fn sl2_membership_and_inhomogeneous_error() {
        let (ring, g) = sl2_ctx();
        let inst = ElementaryInstance::delta_c(ring, &[1, 1]).unwrap();
        let ctx = sl2_ctx();
        assert!(member(&inst, ctx, "T[1][2]"));
        assert!(member(&inst, ctx, "T[2][2]"));
        assert!(member(&inst, ctx, "5*T[1][2]^2*T[2][2]"));
        assert!(member(&inst, ctx, "3"));
        assert!(!member(&inst, ctx, "T[1][1]"));
        assert!(!member(&inst, ctx, "T[1][1]*T[1][2]"));
        let h = ring.reduce(&ring.parse_poly("T[1][2] + T[2][2]").unwrap()).unwrap();
        assert_eq!(
            kernel_membership(ring, g, &inst, &h).unwrap_err(),
            KernelError::NotHomogeneous
        );
    }

    #[test]
    fn ds_membership_is_s_absence() {
        let (ring, g) = context(&rigid_pair_m1());
        let inst = ElementaryInstance::ds(&ring, 1).unwrap();
        let member = |src: &str| {
            let h = ring.reduce(&ring.parse_poly(src).unwrap()).unwrap();
            kernel_membership(&ring, &g, &inst, &h).unwrap()
        };
        assert!(member("T[1][1]^2 - 1"));
        assert!(member("T[1][1]*T[2][1]"));
        assert!(!member("S[1]"));
        assert!(!member("S[1]*T[1][1]"));
    }

    #[test]
    fn generation_emits_the_expected_sl2_elements() {
        let (ring, _) = sl2_ctx();
        let inst = ElementaryInstance::delta_c(ring, &[1, 1]).unwrap();
        let bounds = KernelBounds { structural: 0, support: 2, free: 0 };
        let elems = generate_kernel_elements(ring, &inst, bounds);
        let rendered: Vec<String> =
            elems.iter().map(|h| ring.render_quotient(h)).collect();
        for want in ["1", "T[1][2]", "T[2][2]", "T[1][2]*T[2][2]"] {
            assert!(rendered.iter().any(|r| r == want), "missing {want}");
        }
    }

    #[test]
    fn generation_certifies_and_membership_confirms() {
        let (ring, g) = quartic_ctx();
        for inst in [case_a(), case_b()] {
            let bounds = KernelBounds { structural: 2, support: 3, free: 1 };
            let elems = generate_kernel_elements(ring, &inst, bounds);
            assert!(elems.len() > 10);
            for h in &elems {
                assert!(kernel_membership(ring, g, &inst, h).unwrap());
            }
        }
    }

    #[test]
    fn ds_generation_keeps_the_differentiated_variable_out() {
        let (ring, g) = context(&rigid_pair_m1());
        let inst = ElementaryInstance::ds(&ring, 1).unwrap();
        let bounds = KernelBounds { structural: 2, support: 2, free: 2 };
        let sidx = ring.nvars() - 1;
        let elems = generate_kernel_elements(&ring, &inst, bounds);
        // F(T₁^{l₁}) shapes appear, e.g. T₁₁² − 1.
        let rendered: Vec<String> =
            elems.iter().map(|h| ring.render_quotient(h)).collect();
        assert!(rendered.iter().any(|r| r == "T[1][1]^2 - 1"));
        for h in &elems {
            assert!(h.poly().terms().all(|(mono, _)| mono.exp(sidx) == 0));
            assert!(kernel_membership(&ring, &g, &inst, h).unwrap());
        }
    }

    #[test]
    fn general_form_multiplies_images() {
        let (ring, g) = sl2_ctx();
        let inst = ElementaryInstance::delta_c(ring, &[1, 1]).unwrap();
        let h = ring.reduce(&ring.parse_poly("T[2][2]").unwrap()).unwrap();
        let hd = general_lnd_form(ring, g, &inst, &h).unwrap();
        assert_eq!(
            hd.render(ring),
            "D(T[1][1]) = T[2][2]^2\nD(T[2][1]) = T[1][2]*T[2][2]"
        );
        let one = ring.reduce(&ring.one()).unwrap();
        assert_eq!(&general_lnd_form(ring, g, &inst, &one).unwrap(), inst.derivation());
        let bad = ring.reduce(&ring.parse_poly("T[1][1]").unwrap()).unwrap();
        assert_eq!(
            general_lnd_form(ring, g, &inst, &bad).unwrap_err(),
            KernelError::NotInKernel
        );
    }

    #[test]
    fn multiplied_derivations_stay_lnd_on_generated_kernel_elements() {
        let (ring, g) = quartic_ctx();
        let inst = case_a();
        let bounds = KernelBounds { structural: 1, support: 2, free: 0 };
        for h in generate_kernel_elements(ring, &inst, bounds).into_iter().take(20) {
            let hd = general_lnd_form(ring, g, &inst, &h).unwrap();
            let cap = hd.default_cap(ring);
            assert!(hd.is_locally_nilpotent_on_generators(ring, cap).unwrap().is_lnd());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        /// Kernels are factorially closed: a certified product certifies
        /// its factors.
        #[test]
        fn factorial_closedness_spot_check(
            e1 in prop::collection::vec(0u32..3, 4),
            e2 in prop::collection::vec(0u32..3, 4),
        ) {
            let (ring, g) = quartic_ctx();
            let inst = case_a();
            let h1 = ring.reduce(&ring.poly_from_exps(e1, rat(1))).unwrap();
            let h2 = ring.reduce(&ring.poly_from_exps(e2, rat(1))).unwrap();
            let product = ring.q_mul(&h1, &h2);
            if kernel_membership(ring, g, &inst, &product).unwrap() {
                prop_assert!(kernel_membership(ring, g, &inst, &h1).unwrap());
                prop_assert!(kernel_membership(ring, g, &inst, &h2).unwrap());
            }
        }

        /// Engines agree on random homogeneous single terms (the assertion
        /// lives inside kernel_membership).
        #[test]
        fn engines_agree_on_random_terms(
            exps in prop::collection::vec(0u32..4, 4),
            num in -4i64..=4,
        ) {
            prop_assume!(num != 0);
            let (ring, g) = quartic_ctx();
            for inst in [case_a(), case_b()] {
                let h = ring
                    .reduce(&ring.poly_from_exps(exps.clone(), rat(num)))
                    .unwrap();
                let _ = kernel_membership(ring, g, &inst, &h).unwrap();
            }
        }
    }
}
