//! Exact computer algebra for trinomial algebras.
//!
//! A trinomial algebra `R` is the quotient of a polynomial ring
//! `K[T_ij, S_k]` by relations `g_i`, each a signed sum of at most three
//! terms built from block monomials `T_i^{l_i}`. Two kinds of relation
//! chains are supported: affine binomial chains (type 1) and determinantal
//! trinomials driven by a rational 2-row matrix (type 2).
//!
//! The crate computes, entirely over exact big rationals / big integers:
//!
//! * the finest abelian grading of `R` — the group `K0` presented by the
//!   Smith normal form of the transposed exponent matrix ([`grading`]);
//! * canonical normal forms modulo the defining ideal, giving decidable
//!   equality in `R` ([`polyring`]);
//! * derivations given on generators, extended by the Leibniz rule, with
//!   homogeneity, local-nilpotency, and flow computations ([`derivation`]);
//! * the elementary derivation templates and their exhaustive enumeration
//!   ([`elementary`]);
//! * kernel membership by two independent engines and kernel-element
//!   generation ([`kernel`]);
//! * existence/rigidity predicates and a brute-force completeness oracle
//!   for homogeneous locally nilpotent derivations ([`classify`]).
//!
//! Heavy enumeration loops are data-parallel via `rayon` when the default
//! `parallel` feature is enabled; the same code paths run sequentially
//! without it.

pub mod classify;
pub mod derivation;
pub mod elementary;
pub mod fixtures;
pub mod grading;
pub mod kernel;
pub mod model;
pub mod polyring;

mod par;
mod ratmat;
