//! Shared helpers for the integration suites: seeded random defining data
//! and random polynomial sampling.
#![allow(dead_code)]

use num::BigRational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use trinomial::model::{rat, Column, TrinomialData};
use trinomial::polyring::{Poly, QuotientRing};

/// A random valid small algebra: at most three/four blocks, block sizes up
/// to 3, exponents up to 4, at most two free variables.
pub fn random_data(rng: &mut ChaCha8Rng) -> TrinomialData {
    loop {
        let type2 = rng.gen_bool(0.5);
        let nblocks = if type2 { rng.gen_range(3..=4) } else { rng.gen_range(2..=3) };
        let blocks: Vec<Vec<u32>> = (0..nblocks)
            .map(|_| {
                let size = rng.gen_range(1..=3);
                (0..size).map(|_| rng.gen_range(1..=4)).collect()
            })
            .collect();
        let m = rng.gen_range(0..=2);
        let built = if type2 {
            let columns: Vec<Column> = (0..nblocks)
                .map(|_| [rat(rng.gen_range(-3..=3)), rat(rng.gen_range(-3..=3))])
                .collect();
            TrinomialData::type2(blocks, columns, m)
        } else {
            let scalars: Vec<BigRational> =
                (0..nblocks).map(|_| rat(rng.gen_range(-5..=5))).collect();
            TrinomialData::type1(blocks, scalars, m)
        };
        if let Ok(data) = built {
            if data.validate().is_valid() {
                return data;
            }
        }
    }
}

/// A random polynomial with up to three small terms.
pub fn random_poly(ring: &QuotientRing, rng: &mut ChaCha8Rng) -> Poly {
    let data = ring.data();
    let mut p = ring.zero();
    for _ in 0..rng.gen_range(1..=3) {
        let mut factors = Vec::new();
        for idx in 0..ring.nvars() {
            let e = rng.gen_range(0..=2);
            if e > 0 {
                factors.push((data.gen_at(idx), e));
            }
        }
        let mut c = rng.gen_range(-3..=3);
        if c == 0 {
            c = 1;
        }
        let term = ring.monomial(&factors, rat(c));
        p = ring.add(&p, &term).expect("same context");
    }
    p
}
