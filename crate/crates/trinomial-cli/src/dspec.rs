//! Derivation specifications on the command line.
//!
//! Grammar: `ds:p` for the free-variable template d/dS_p; `dc:c_1,...,c_r`
//! for delta_C on type-1 data; `dcb:c_0,...,c_r;b_0,...,b_r` for
//! delta_{C,beta} on type-2 data, with rational beta entries written as
//! integers or `p/q`.

use crate::descriptor::parse_rational_str;
use crate::CliError;
use num::BigRational;
use std::fmt::Display;
use trinomial::elementary::ElementaryInstance;
use trinomial::polyring::QuotientRing;

pub fn parse(ring: &QuotientRing, spec: &str) -> Result<ElementaryInstance, CliError> {
    let (head, rest) = spec
        .split_once(':')
        .ok_or_else(|| bad(spec, "expected ds:..., dc:..., or dcb:..."))?;
    let built = match head {
        "ds" => {
            let p = rest
                .trim()
                .parse::<usize>()
                .map_err(|_| bad(spec, format!("`{rest}` is not a free-variable index")))?;
            ElementaryInstance::ds(ring, p)
        }
        "dc" => {
            let c = positions(rest).map_err(|m| bad(spec, m))?;
            ElementaryInstance::delta_c(ring, &c)
        }
        "dcb" => {
            let (cs, bs) = rest
                .split_once(';')
                .ok_or_else(|| bad(spec, "expected `;` between C and beta"))?;
            let c = positions(cs).map_err(|m| bad(spec, m))?;
            let beta = rationals(bs).map_err(|m| bad(spec, m))?;
            ElementaryInstance::delta_c_beta(ring, &c, &beta)
        }
        other => return Err(bad(spec, format!("unknown template `{other}`; expected ds, dc, or dcb"))),
    };
    built.map_err(|e| bad(spec, e))
}

fn bad(spec: &str, message: impl Display) -> CliError {
    CliError::Input(format!("derivation spec `{spec}`: {message}"))
}

fn positions(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|t| {
            t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not a position index"))
        })
        .collect()
}

fn rationals(s: &str) -> Result<Vec<BigRational>, String> {
    s.split(',').map(|t| parse_rational_str(t.trim())).collect()
}
