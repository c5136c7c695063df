//! Small named algebras used throughout the test suites and benchmarks.
//!
//! Each constructor returns validated defining data; [`context`] bundles the
//! quotient ring and grading group most callers want alongside it.

use crate::grading::{build_grading, GradingGroup};
use crate::model::{rat, TrinomialData};
use crate::polyring::QuotientRing;

/// The ring and grading of one algebra, built in one step.
pub fn context(data: &TrinomialData) -> (QuotientRing, GradingGroup) {
    let ring = QuotientRing::new(data.clone()).expect("fixture data is valid");
    let grading = build_grading(data).expect("fixture data is valid");
    (ring, grading)
}

/// `T₁₁T₁₂ − T₂₁T₂₂ = 1`: the special linear group of rank one as a
/// type-1 algebra with unit exponents everywhere.
pub fn sl2() -> TrinomialData {
    TrinomialData::type1(vec![vec![1, 1], vec![1, 1]], vec![rat(0), rat(1)], 0)
        .expect("well-shaped")
}

/// `T₀₁² + T₁₁²T₁₂ + T₂₁⁴ = 0`: a type-2 threefold with
/// `K₀ ≅ ℤ² ⊕ ℤ/2` and exactly two elementary families.
pub fn quartic_threefold() -> TrinomialData {
    TrinomialData::type2(
        vec![vec![2], vec![2, 1], vec![4]],
        vec![
            [rat(0), rat(1)],
            [rat(-1), rat(-1)],
            [rat(1), rat(0)],
        ],
        0,
    )
    .expect("well-shaped")
}

/// The quartic threefold with one free variable `S₁` adjoined.
pub fn quartic_threefold_m1() -> TrinomialData {
    TrinomialData::type2(
        vec![vec![2], vec![2, 1], vec![4]],
        vec![
            [rat(0), rat(1)],
            [rat(-1), rat(-1)],
            [rat(1), rat(0)],
        ],
        1,
    )
    .expect("well-shaped")
}

/// `T₁₁² − T₂₁³ = 1`: both blocks lack unit exponents and `m = 0`,
/// so no homogeneous locally nilpotent derivation exists.
pub fn rigid_pair() -> TrinomialData {
    TrinomialData::type1(vec![vec![2], vec![3]], vec![rat(0), rat(1)], 0)
        .expect("well-shaped")
}

/// The rigid pair with one free variable adjoined, which restores a
/// derivation in the `S` direction.
pub fn rigid_pair_m1() -> TrinomialData {
    TrinomialData::type1(vec![vec![2], vec![3]], vec![rat(0), rat(1)], 1)
        .expect("well-shaped")
}

/// A type-2 algebra on the boundary described by the rigidity gap: three
/// blocks without unit exponents, two of them all-even containing a 2, the
/// third with all exponents above 1.
pub fn cor1_boundary() -> TrinomialData {
    TrinomialData::type2(
        vec![vec![2, 2], vec![2], vec![3, 2]],
        vec![
            [rat(1), rat(0)],
            [rat(0), rat(1)],
            [rat(-1), rat(-1)],
        ],
        0,
    )
    .expect("well-shaped")
}

/// A three-block type-1 chain with unit exponents:
/// `T₁₁ − T₂₁ = 1`, `T₂₁ − T₃₁ = 2`.
pub fn chain3() -> TrinomialData {
    TrinomialData::type1(
        vec![vec![1], vec![1], vec![1]],
        vec![rat(0), rat(1), rat(3)],
        0,
    )
    .expect("well-shaped")
}

/// Every fixture, paired with a short stable name.
pub fn all_fixtures() -> Vec<(&'static str, TrinomialData)> {
    vec![
        ("sl2", sl2()),
        ("quartic_threefold", quartic_threefold()),
        ("quartic_threefold_m1", quartic_threefold_m1()),
        ("rigid_pair", rigid_pair()),
        ("rigid_pair_m1", rigid_pair_m1()),
        ("cor1_boundary", cor1_boundary()),
        ("chain3", chain3()),
    ]
}
