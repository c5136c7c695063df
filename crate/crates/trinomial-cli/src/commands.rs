//! One handler per subcommand, each producing a text report and a JSON
//! report carrying the same content.

use crate::{descriptor, dspec, issue_code, CliError};
use num::{BigInt, BigRational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::Path;
use trinomial::classify;
use trinomial::classify::SearchConfig;
use trinomial::derivation::{self, well_definedness, Derivation, LndStatus};
use trinomial::elementary::{enumerate_families, FamilyKind};
use trinomial::grading::{build_grading, smith_normal_form, GradingGroup, IntMat};
use trinomial::kernel::{generate_kernel_elements, kernel_membership, KernelBounds, KernelError};
use trinomial::model::{TrinomialData, TrinomialKind};
use trinomial::polyring::{render_rational, QuotientPoly, QuotientRing};

/// The two renderings of one command's result, plus the exit code.
pub struct CmdOutput {
    pub human: String,
    pub machine: Value,
    pub exit: u8,
}

impl CmdOutput {
    fn ok(human: String, machine: Value) -> Self {
        CmdOutput { human, machine, exit: 0 }
    }
}

struct Ctx {
    data: TrinomialData,
    ring: QuotientRing,
    g: GradingGroup,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Io { path: path.to_path_buf(), message: e.to_string() })
}

fn load(path: &Path) -> Result<Ctx, CliError> {
    let text = read(path)?;
    let data = descriptor::parse(&text)?;
    let report = data.validate();
    if !report.is_valid() {
        return Err(CliError::Invalid(report));
    }
    let ring =
        QuotientRing::new(data.clone()).map_err(|e| CliError::Compute(e.to_string()))?;
    let g = build_grading(&data).map_err(|e| CliError::Compute(e.to_string()))?;
    Ok(Ctx { data, ring, g })
}

fn compute(e: impl std::fmt::Display) -> CliError {
    CliError::Compute(e.to_string())
}

fn kind_name(kind: TrinomialKind) -> &'static str {
    match kind {
        TrinomialKind::Type1 => "type1",
        TrinomialKind::Type2 => "type2",
    }
}

fn yesno(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn validate(path: &Path) -> Result<CmdOutput, CliError> {
    let text = read(path)?;
    let data = descriptor::parse(&text)?;
    let report = data.validate();
    let issues: Vec<Value> = report
        .issues
        .iter()
        .map(|i| json!({ "code": issue_code(i), "message": i.to_string() }))
        .collect();
    let machine = json!({
        "valid": report.is_valid(),
        "kind": kind_name(data.kind()),
        "blocks": data.num_blocks(),
        "n": data.n(),
        "m": data.m(),
        "issues": issues,
    });
    if report.is_valid() {
        let human = format!(
            "OK: {}, {} blocks, n = {}, m = {}",
            kind_name(data.kind()),
            data.num_blocks(),
            data.n(),
            data.m()
        );
        Ok(CmdOutput::ok(human, machine))
    } else {
        let mut human = String::from("invalid descriptor:");
        for issue in &report.issues {
            write!(human, "\n  {}: {issue}", issue_code(issue)).unwrap();
        }
        Ok(CmdOutput { human, machine, exit: 2 })
    }
}

pub fn grading(path: &Path) -> Result<CmdOutput, CliError> {
    let ctx = load(path)?;
    let (data, ring, g) = (&ctx.data, &ctx.ring, &ctx.g);
    let p0t = IntMat::from_rows(data.p0()).transpose();
    let factors = smith_normal_form(&p0t).invariant_factors();
    let mu = g.mu();
    let homogeneous = ring
        .defining_polynomials()
        .iter()
        .all(|rel| rel.terms().all(|(mono, _)| g.degree_of_monomial(mono) == *mu));

    let mut human = String::new();
    writeln!(human, "K₀ ≅ {}", k0_shape(g)).unwrap();
    writeln!(human, "free rank: {}", g.free_rank()).unwrap();
    writeln!(human, "torsion: {}", comma_or(g.torsion(), "none")).unwrap();
    writeln!(human, "invariant factors of P₀ᵀ: {}", comma_or(&factors, "none")).unwrap();
    writeln!(human, "μ = {}", g.render_element(mu)).unwrap();
    writeln!(human, "generator degrees:").unwrap();
    for (idx, gen) in data.generators().into_iter().enumerate() {
        writeln!(human, "  {gen} -> {}", g.render_element(g.degree_of_gen(idx))).unwrap();
    }
    write!(human, "all 𝔤_i homogeneous: {}", yesno(homogeneous)).unwrap();

    let degrees: Vec<Value> = data
        .generators()
        .into_iter()
        .enumerate()
        .map(|(idx, gen)| {
            json!({
                "generator": gen.to_string(),
                "degree": g.render_element(g.degree_of_gen(idx)),
            })
        })
        .collect();
    let machine = json!({
        "group": k0_shape(g),
        "group_ascii": g.render_group(),
        "free_rank": g.free_rank(),
        "torsion": big_strings(g.torsion()),
        "invariant_factors": big_strings(&factors),
        "mu": g.render_element(mu),
        "degrees": degrees,
        "relations_homogeneous": homogeneous,
    });
    Ok(CmdOutput::ok(human, machine))
}

pub fn derivations(path: &Path) -> Result<CmdOutput, CliError> {
    let ctx = load(path)?;
    let families = enumerate_families(&ctx.ring, &ctx.g);
    let mut paragraphs = Vec::new();
    let mut fam_json = Vec::new();
    for (i, fam) in families.iter().enumerate() {
        let inst = fam.instance(&ctx.ring).map_err(compute)?;
        let delta = inst.derivation();
        let mut para = format!(
            "{}. {}\n   degree: {}",
            i + 1,
            kind_label(&fam.kind),
            ctx.g.render_element(&fam.degree)
        );
        for basis_vector in &fam.beta_basis {
            write!(para, "\n   beta basis: {}", rational_tuple(basis_vector)).unwrap();
        }
        match inst.beta() {
            Some(beta) => {
                write!(para, "\n   member at beta = {}:", rational_tuple(beta)).unwrap()
            }
            None => para.push_str("\n   member:"),
        }
        for line in delta.render(&ctx.ring).lines() {
            write!(para, "\n     {line}").unwrap();
        }
        paragraphs.push(para);

        let mut entry = kind_json(&fam.kind);
        let obj = entry.as_object_mut().expect("kind_json is an object");
        obj.insert("degree".into(), json!(ctx.g.render_element(&fam.degree)));
        obj.insert(
            "beta_basis".into(),
            json!(fam
                .beta_basis
                .iter()
                .map(|v| v.iter().map(render_rational).collect::<Vec<_>>())
                .collect::<Vec<_>>()),
        );
        obj.insert(
            "member".into(),
            json!({
                "beta": inst.beta().map(|b| b.iter().map(render_rational).collect::<Vec<_>>()),
                "images": images_json(&ctx.ring, delta),
            }),
        );
        fam_json.push(entry);
    }
    let human = if families.is_empty() {
        "no elementary families".to_string()
    } else {
        let noun = if families.len() == 1 { "family" } else { "families" };
        format!("{} elementary {noun}\n\n{}", families.len(), paragraphs.join("\n\n"))
    };
    let machine = json!({ "count": families.len(), "families": fam_json });
    Ok(CmdOutput::ok(human, machine))
}

pub fn classify(path: &Path) -> Result<CmdOutput, CliError> {
    let text = read(path)?;
    let data = descriptor::parse(&text)?;
    let report = data.validate();
    if !report.is_valid() {
        return Err(CliError::Invalid(report));
    }
    let rep = classify::classify(&data);
    let blocks = if rep.exceptional_blocks.is_empty() {
        "none".to_string()
    } else {
        rep.exceptional_blocks.iter().map(usize::to_string).collect::<Vec<_>>().join(", ")
    };
    let mut human = format!(
        "has_homogeneous_lnd: {}\ncor1_gap: {}\nrigid: {}\nexceptional blocks: {blocks}",
        rep.has_homogeneous_lnd, rep.cor1_gap, rep.rigid
    );
    if let Some(([even1, even2], hard)) = rep.gap_witness {
        write!(
            human,
            "\ngap witness: blocks {even1} and {even2} are all-even with an exponent 2; \
             block {hard} has no unit exponent"
        )
        .unwrap();
    }
    let machine = json!({
        "has_homogeneous_lnd": rep.has_homogeneous_lnd,
        "cor1_gap": rep.cor1_gap,
        "rigid": rep.rigid,
        "exceptional_blocks": rep.exceptional_blocks,
        "gap_witness": rep.gap_witness.map(|([even1, even2], hard)| {
            json!({ "even_blocks": [even1, even2], "hard_block": hard })
        }),
    });
    Ok(CmdOutput::ok(human, machine))
}

pub fn apply(path: &Path, spec: &str, poly: &str) -> Result<CmdOutput, CliError> {
    let ctx = load(path)?;
    let inst = dspec::parse(&ctx.ring, spec)?;
    let p = parse_quotient(&ctx.ring, poly)?;
    let image = inst.derivation().apply(&ctx.ring, &p).map_err(compute)?;
    let rendered = ctx.ring.render_quotient(&image);
    let machine = json!({
        "derivation": spec,
        "input": ctx.ring.render_quotient(&p),
        "result": rendered,
    });
    Ok(CmdOutput::ok(rendered, machine))
}

pub fn kernel(
    path: &Path,
    spec: &str,
    poly: Option<&str>,
    generate: bool,
    bounds: KernelBounds,
) -> Result<CmdOutput, CliError> {
    let ctx = load(path)?;
    let inst = dspec::parse(&ctx.ring, spec)?;
    if generate {
        let elements = generate_kernel_elements(&ctx.ring, &inst, bounds);
        let rendered: Vec<String> =
            elements.iter().map(|h| ctx.ring.render_quotient(h)).collect();
        let human = if rendered.is_empty() {
            "no kernel elements within the bounds".to_string()
        } else {
            rendered.join("\n")
        };
        let machine = json!({
            "derivation": spec,
            "bounds": {
                "structural": bounds.structural,
                "support": bounds.support,
                "free": bounds.free,
            },
            "count": rendered.len(),
            "elements": rendered,
        });
        Ok(CmdOutput::ok(human, machine))
    } else {
        let text = poly.expect("clap requires poly unless --generate");
        let h = parse_quotient(&ctx.ring, text)?;
        let member = kernel_membership(&ctx.ring, &ctx.g, &inst, &h).map_err(|e| match e {
            KernelError::NotHomogeneous => CliError::Input(e.to_string()),
            other => compute(other),
        })?;
        let machine = json!({
            "derivation": spec,
            "poly": ctx.ring.render_quotient(&h),
            "member": member,
        });
        Ok(CmdOutput::ok(format!("member: {}", yesno(member)), machine))
    }
}

pub fn flow(path: &Path, spec: &str, cap: Option<u32>) -> Result<CmdOutput, CliError> {
    let ctx = load(path)?;
    let inst = dspec::parse(&ctx.ring, spec)?;
    let delta = inst.derivation();
    let cap = cap.unwrap_or_else(|| delta.default_cap(&ctx.ring));
    let fl = derivation::flow(&ctx.ring, delta, cap).map_err(compute)?;
    let preserved = fl.preserves_relations(&ctx.ring);
    let human = format!("{}\nrelations preserved: {}", fl.render(&ctx.ring), yesno(preserved));
    let images: Vec<Value> = fl
        .images()
        .iter()
        .enumerate()
        .map(|(idx, series)| {
            json!({
                "generator": ctx.data.gen_at(idx).to_string(),
                "series": series.render(&ctx.ring),
            })
        })
        .collect();
    let machine = json!({
        "derivation": spec,
        "cap": cap,
        "images": images,
        "relations_preserved": preserved,
    });
    Ok(CmdOutput::ok(human, machine))
}

pub fn search(path: &Path, max_degree: u32, cap: Option<u32>) -> Result<CmdOutput, CliError> {
    let ctx = load(path)?;
    let config = SearchConfig {
        degree_bound: max_degree,
        nilpotency_cap: cap,
        ..SearchConfig::default()
    };
    let report =
        classify::search_homogeneous_lnds(&ctx.ring, &ctx.g, &config).map_err(compute)?;

    let mut human = String::new();
    writeln!(human, "degree bound: {max_degree}").unwrap();
    writeln!(human, "candidates examined: {}", report.candidates_examined).unwrap();
    write!(human, "survivors: {}", report.survivors.len()).unwrap();
    for (i, survivor) in report.survivors.iter().enumerate() {
        write!(human, "\n\n{}. degree {}", i + 1, ctx.g.render_element(&survivor.degree))
            .unwrap();
        for line in survivor.derivation.render(&ctx.ring).lines() {
            write!(human, "\n   {line}").unwrap();
        }
        match &survivor.matched {
            Some(m) => write!(
                human,
                "\n   matched: {}; multiplier {}",
                kind_label(&m.kind),
                ctx.ring.render_quotient(&m.multiplier)
            )
            .unwrap(),
            None => human.push_str("\n   matched: none"),
        }
    }
    if !report.unverified.is_empty() {
        write!(
            human,
            "\n\nunverified candidates (nilpotency unsettled within the cap): {}",
            report.unverified.len()
        )
        .unwrap();
        for (i, delta) in report.unverified.iter().enumerate() {
            write!(human, "\n{}.", i + 1).unwrap();
            for line in delta.render(&ctx.ring).lines() {
                write!(human, "\n   {line}").unwrap();
            }
        }
    }

    let survivors: Vec<Value> = report
        .survivors
        .iter()
        .map(|survivor| {
            json!({
                "degree": ctx.g.render_element(&survivor.degree),
                "images": images_json(&ctx.ring, &survivor.derivation),
                "matched": survivor.matched.as_ref().map(|m| {
                    let mut entry = kind_json(&m.kind);
                    entry.as_object_mut().expect("object").insert(
                        "multiplier".into(),
                        json!(ctx.ring.render_quotient(&m.multiplier)),
                    );
                    entry
                }),
            })
        })
        .collect();
    let unverified: Vec<Value> = report
        .unverified
        .iter()
        .map(|delta| json!({ "images": images_json(&ctx.ring, delta) }))
        .collect();
    let machine = json!({
        "degree_bound": max_degree,
        "cap": cap,
        "candidates_examined": report.candidates_examined,
        "survivors": survivors,
        "unverified": unverified,
        "all_matched": report.all_matched(),
    });
    Ok(CmdOutput::ok(human, machine))
}

pub fn check(
    path: &Path,
    pairs: u32,
    cap: Option<u32>,
    seed: u64,
) -> Result<CmdOutput, CliError> {
    let ctx = load(path)?;
    let families = enumerate_families(&ctx.ring, &ctx.g);
    if families.is_empty() {
        let machine = json!({ "seed": seed, "families": [], "all_passed": true });
        return Ok(CmdOutput::ok("no elementary families to check".to_string(), machine));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines = vec![format!("seed {seed}, {pairs} Leibniz pairs per family")];
    let mut fam_json = Vec::new();
    let mut all_passed = true;
    for (i, fam) in families.iter().enumerate() {
        let inst = fam.instance(&ctx.ring).map_err(compute)?;
        let delta = inst.derivation();
        let well_defined =
            well_definedness(&ctx.ring, delta.images()).map_err(compute)?.is_ok();
        let degree_matches = delta.degree_of(&ctx.ring, &ctx.g).map_err(compute)?
            == Some(fam.degree.clone());
        let cap_used = cap.unwrap_or_else(|| delta.default_cap(&ctx.ring));
        let status =
            delta.is_locally_nilpotent_on_generators(&ctx.ring, cap_used).map_err(compute)?;
        let nilpotent = status.is_lnd();
        let max_index = match &status {
            LndStatus::Verified { indices } => indices.iter().max().copied(),
            LndStatus::NotVerified { .. } => None,
        };
        let mut leibniz_ok = true;
        for _ in 0..pairs {
            let p = random_poly(&ctx.ring, &mut rng);
            let q = random_poly(&ctx.ring, &mut rng);
            let lhs = delta.apply(&ctx.ring, &ctx.ring.q_mul(&p, &q)).map_err(compute)?;
            let dp = delta.apply(&ctx.ring, &p).map_err(compute)?;
            let dq = delta.apply(&ctx.ring, &q).map_err(compute)?;
            let rhs = ctx.ring.q_add(&ctx.ring.q_mul(&dp, &q), &ctx.ring.q_mul(&p, &dq));
            if lhs != rhs {
                leibniz_ok = false;
                break;
            }
        }
        let passed = well_defined && degree_matches && nilpotent && leibniz_ok;
        all_passed &= passed;
        let verdict = |ok: bool, label: &str| {
            if ok {
                label.to_string()
            } else {
                format!("{label} FAILED")
            }
        };
        let nilpotency_label = match max_index {
            Some(n) => format!("nilpotent (max index {n})"),
            None => "nilpotent FAILED".to_string(),
        };
        lines.push(format!(
            "{}. {}: {}; {}; {}; {}",
            i + 1,
            kind_label(&fam.kind),
            verdict(well_defined, "well defined"),
            verdict(degree_matches, "degree matches"),
            nilpotency_label,
            verdict(leibniz_ok, "Leibniz ok"),
        ));
        let mut entry = kind_json(&fam.kind);
        let obj = entry.as_object_mut().expect("object");
        obj.insert("well_defined".into(), json!(well_defined));
        obj.insert("degree_matches".into(), json!(degree_matches));
        obj.insert("nilpotent".into(), json!(nilpotent));
        obj.insert("nilpotency_index".into(), json!(max_index));
        obj.insert("leibniz_pairs".into(), json!(pairs));
        obj.insert("leibniz_ok".into(), json!(leibniz_ok));
        fam_json.push(entry);
    }
    lines.push(format!(
        "{} families checked: {}",
        families.len(),
        if all_passed { "all passed" } else { "FAILURES above" }
    ));
    let machine = json!({
        "seed": seed,
        "pairs": pairs,
        "families": fam_json,
        "all_passed": all_passed,
    });
    Ok(CmdOutput { human: lines.join("\n"), machine, exit: u8::from(!all_passed) })
}

fn parse_quotient(ring: &QuotientRing, text: &str) -> Result<QuotientPoly, CliError> {
    ring.parse_quotient(text)
        .map_err(|e| CliError::Input(format!("in polynomial `{text}`: {e}")))
}

fn random_poly(ring: &QuotientRing, rng: &mut ChaCha8Rng) -> QuotientPoly {
    let data = ring.data();
    let mut acc = ring.q_zero();
    for _ in 0..rng.gen_range(1..=3) {
        let mut factors = Vec::new();
        for idx in 0..ring.nvars() {
            let e = rng.gen_range(0..=2u32);
            if e > 0 {
                factors.push((data.gen_at(idx), e));
            }
        }
        let mut c = 0i64;
        while c == 0 {
            c = rng.gen_range(-3..=3);
        }
        let term = ring.monomial(&factors, BigRational::from_integer(BigInt::from(c)));
        acc = ring.q_add(&acc, &ring.reduce(&term).expect("same context"));
    }
    acc
}

fn kind_label(kind: &FamilyKind) -> String {
    match kind {
        FamilyKind::Ds { p } => format!("d/dS_{p}"),
        FamilyKind::DeltaC { c } => format!("delta_C, C = {}", usize_tuple(c)),
        FamilyKind::DeltaCBeta21 { c } => {
            format!("delta_C,beta (case 2.1), C = {}", usize_tuple(c))
        }
        FamilyKind::DeltaCBeta22 { c, i0 } => {
            format!("delta_C,beta (case 2.2), C = {}, i0 = {i0}", usize_tuple(c))
        }
    }
}

fn kind_json(kind: &FamilyKind) -> Value {
    match kind {
        FamilyKind::Ds { p } => json!({ "kind": "ds", "p": p }),
        FamilyKind::DeltaC { c } => json!({ "kind": "delta_c", "c": c }),
        FamilyKind::DeltaCBeta21 { c } => json!({ "kind": "delta_c_beta_21", "c": c }),
        FamilyKind::DeltaCBeta22 { c, i0 } => {
            json!({ "kind": "delta_c_beta_22", "c": c, "i0": i0 })
        }
    }
}

fn images_json(ring: &QuotientRing, delta: &Derivation) -> Value {
    let mut out = Vec::new();
    for (idx, image) in delta.images().iter().enumerate() {
        if image.is_zero() {
            continue;
        }
        out.push(json!({
            "generator": ring.data().gen_at(idx).to_string(),
            "image": ring.render_quotient(image),
        }));
    }
    Value::Array(out)
}

fn usize_tuple(xs: &[usize]) -> String {
    format!("({})", xs.iter().map(usize::to_string).collect::<Vec<_>>().join(", "))
}

fn rational_tuple(xs: &[BigRational]) -> String {
    format!("({})", xs.iter().map(render_rational).collect::<Vec<_>>().join(", "))
}

fn big_strings(xs: &[BigInt]) -> Vec<String> {
    xs.iter().map(BigInt::to_string).collect()
}

fn comma_or(xs: &[BigInt], empty: &str) -> String {
    if xs.is_empty() {
        empty.to_string()
    } else {
        xs.iter().map(BigInt::to_string).collect::<Vec<_>>().join(", ")
    }
}

/// `ℤ^a ⊕ ℤ/d₁ ⊕ …` with unicode superscripts, the zero group as `0`.
fn k0_shape(g: &GradingGroup) -> String {
    let mut parts = Vec::new();
    match g.free_rank() {
        0 => {}
        1 => parts.push("ℤ".to_string()),
        k => parts.push(format!("ℤ{}", superscript(k))),
    }
    for d in g.torsion() {
        parts.push(format!("ℤ/{d}"));
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" ⊕ ")
    }
}

fn superscript(k: usize) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    k.to_string()
        .chars()
        .map(|c| DIGITS[c.to_digit(10).expect("decimal digit") as usize])
        .collect()
}
