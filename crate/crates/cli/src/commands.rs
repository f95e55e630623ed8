use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use quadrifold::chow::verify_height_formula;
use quadrifold::fibration::{genus_residue, sample_census, Case, FibrationSpec};
use quadrifold::gfpoly::{projective_roots, Extension, Field};
use quadrifold::hecke::elementary_transform;
use quadrifold::lines::{galois_swap_check, section_to_line_data, smooth_fiber_points};
use quadrifold::sections::{
    check_stability_hypothesis, count_by_height, enumerate_sections, existence_bound, min_height_section, weak_approx_search, SearchOptions,
};

use crate::config::{Command, RunConfig};
use crate::error::CliError;
use crate::input::{fibration_json, field_tag, line_json, parse_point, scalar_json, section_json, vector_json, Source};

fn options(cfg: &RunConfig) -> SearchOptions {
    SearchOptions { max_ext: cfg.max_ext, ..SearchOptions::with_budget(cfg.budget) }
}

pub fn execute(cfg: &RunConfig, fib: Option<&FibrationSpec>) -> Result<Value, CliError> {
    let opts = options(cfg);
    let need = || fib.ok_or_else(|| CliError::Internal("fibration not loaded".into()));
    match &cfg.command {
        Command::Invariants { .. } => Ok(json!(need()?.invariants())),
        Command::Discriminant { .. } => discriminant(need()?, cfg),
        Command::Sections { height, strategy, .. } => {
            let opts = SearchOptions { strategy: (*strategy).into(), ..opts };
            let found = enumerate_sections(need()?, *height, &opts)?;
            Ok(json!({
                "height": found.height,
                "f": found.f,
                "strategy": found.strategy,
                "cost": found.cost,
                "count": found.sections.len(),
                "sections": found.sections.iter().map(section_json).collect::<Vec<_>>(),
            }))
        }
        Command::MinHeight { max, .. } => {
            let fib = need()?;
            Ok(match min_height_section(fib, *max, &opts)? {
                Some(m) => json!({
                    "found": true,
                    "height": m.height,
                    "count": m.count,
                    "bound": m.bound,
                    "within_bound": m.within_bound,
                    "witness": section_json(&m.witness),
                }),
                None => json!({ "found": false, "max": max, "bound": existence_bound(fib) }),
            })
        }
        Command::WeakApprox { constraints, max, .. } => {
            let fib = need()?;
            let list = Source::read(constraints)?.constraints(fib.field())?;
            Ok(match weak_approx_search(fib, &list, *max, &opts)? {
                Some(w) => {
                    let satisfied = list.iter().map(|c| c.satisfied_by(fib, &w.section)).collect::<Result<Vec<_>, _>>()?;
                    if satisfied.iter().any(|ok| !ok) {
                        return Err(CliError::Internal("constrained section misses a constraint point".into()));
                    }
                    json!({
                        "found": true,
                        "height": w.height,
                        "bound": w.bound,
                        "within_bound": w.within_bound,
                        "subspace_dim": w.subspace_dim,
                        "section": section_json(&w.section),
                    })
                }
                None => json!({ "found": false, "max": max }),
            })
        }
        Command::Correspondence { height, .. } => correspondence(need()?, *height, cfg),
        Command::Stability { .. } => {
            let r = check_stability_hypothesis(need()?, &opts)?;
            Ok(json!({
                "threshold": r.threshold,
                "heights_scanned": r.heights_scanned,
                "hypothesis_holds": r.hypothesis_holds,
                "offending": r.offending.iter().map(section_json).collect::<Vec<_>>(),
                "semistable": r.semistable,
            }))
        }
        Command::Hecke { p, line, swap_blocks, height, .. } => hecke(need()?, p, line, *swap_blocks, *height, &opts),
        Command::Census { case, n, samples, p, k, tries } => census(cfg.seed, *case, *n, *samples, *p, *k, *tries),
        Command::Chow { n } => Ok(json!(verify_height_formula(*n)?)),
        Command::Counts { from, to, .. } => {
            let fib = need()?;
            if from > to {
                return Err(CliError::Usage(format!("empty height range {from}..{to}")));
            }
            let counts = count_by_height(fib, *from, *to, &opts)?;
            Ok(json!({ "parity": (fib.sum_d() + fib.e()).rem_euclid(2), "counts": counts }))
        }
    }
}

fn discriminant(fib: &FibrationSpec, cfg: &RunConfig) -> Result<Value, CliError> {
    let disc = fib.discriminant();
    let roots = projective_roots(disc, cfg.max_ext, cfg.budget)?;
    let ranks = fib.singular_fiber_ranks(cfg.max_ext, cfg.budget)?;
    Ok(json!({
        "form": disc.to_string(),
        "coefficients": vector_json(fib.field(), disc.coeffs()),
        "degree": fib.delta(),
        "squarefree": fib.has_squarefree_discriminant(),
        "corank_one": fib.singular_fibers_have_corank_one(),
        "roots": roots.iter().map(|r| r.report()).collect::<Vec<_>>(),
        "singular_fibers": ranks
            .iter()
            .map(|(deg, point, rank)| json!({ "ext_degree": deg, "point": point, "rank": rank }))
            .collect::<Vec<_>>(),
    }))
}

fn correspondence(fib: &FibrationSpec, height: i64, cfg: &RunConfig) -> Result<Value, CliError> {
    let found = enumerate_sections(fib, height, &options(cfg))?;
    let points = smooth_fiber_points(fib, cfg.max_ext)?;
    let mut all_round_trip = true;
    let mut all_opposite = true;
    let mut sections = Vec::new();
    for sec in &found.sections {
        let data = section_to_line_data(fib, sec, &points)?;
        let mut fibers = serde_json::Map::new();
        for c in &data {
            all_round_trip &= c.round_trip;
            all_opposite &= c.opposite_labels;
            for l in &c.lines {
                fibers.insert(
                    l.key(),
                    json!({
                        "ext_degree": c.ext_degree,
                        "point": vector_json(&l.line_field, &lift_point(fib.field(), c.ext_degree, &c.point, &l.line_field)),
                        "sqrt_disc": scalar_json(&l.line_field, l.sqrt_disc),
                        "line": line_json(&l.line_field, &l.line),
                    }),
                );
            }
        }
        sections.push(json!({ "section": section_json(sec), "fibers": fibers }));
    }
    if !all_round_trip || !all_opposite {
        return Err(CliError::Internal("a fiber correspondence failed to round-trip".into()));
    }
    let ident = Extension::identity(fib.field());
    let swaps = fib
        .smooth_points(&ident)
        .iter()
        .map(|b| {
            let s = galois_swap_check(fib, &ident, b)?;
            Ok(json!({
                "b": b.display(fib.field()),
                "disc_nonsquare": s.disc_nonsquare,
                "lines_conjugate": s.lines_conjugate,
                "agrees": s.agrees(),
            }))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(json!({
        "height": height,
        "fiber_points": points.len(),
        "count": found.sections.len(),
        "round_trip": all_round_trip,
        "opposite_labels": all_opposite,
        "sections": sections,
        "galois_swap": swaps,
    }))
}

/// A fiber point over `F_{q^m}` written in the field its lines live in.
fn lift_point(base: &Field, m: u32, x: &[quadrifold::gfpoly::Fe], target: &Field) -> Vec<quadrifold::gfpoly::Fe> {
    if target.order() == base.order().pow(m) {
        return x.to_vec();
    }
    let ext = Extension::new(base, m).expect("fits");
    let quad = Extension::new(ext.field(), 2).expect("fits");
    x.iter().map(|&c| quad.embed(c)).collect()
}

fn hecke(
    fib: &FibrationSpec,
    p: &str,
    line_file: &std::path::Path,
    swap_blocks: bool,
    height: Option<i64>,
    opts: &SearchOptions,
) -> Result<Value, CliError> {
    let field = fib.field();
    let b = parse_point(field, p)?;
    let line = Source::read(line_file)?.line(field, b)?;
    let r = elementary_transform(fib, &b, &line, swap_blocks)?;
    let det2 = field.mul(r.det_u, r.det_u);
    let disc_ok = r.output.discriminant() == &fib.discriminant().scale(det2);
    if r.output.delta() != fib.delta() || !disc_ok {
        return Err(CliError::Internal("the transformation changed the discriminant".into()));
    }
    let mut out = json!({
        "p": b.display(field),
        "line": line_json(field, &line),
        "swap_blocks": swap_blocks,
        "input": fibration_json(fib),
        "output": fibration_json(&r.output),
        "basis_change_at_p": r.basis_change_at_p.iter().map(|row| vector_json(field, row)).collect::<Vec<_>>(),
        "basis_change": r.basis_change.iter().map(|row| row.iter().map(|f| f.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "det_u": scalar_json(field, r.det_u),
        "shift": r.shift,
        "delta": [fib.delta(), r.output.delta()],
        "epsilon": [fib.e(), r.output.e()],
        "discriminant_scaled_by_det_u_squared": disc_ok,
        "inverse_line": line_json(field, &r.inverse_line()),
        "output_invariants": r.output.invariants(),
    });
    if let Some(h) = height {
        let found = enumerate_sections(fib, h, opts)?;
        let moved = found
            .sections
            .iter()
            .map(|s| {
                let (t, fate) = r.transform_section(s)?;
                if t.height() != s.height() + fate.height_change() {
                    return Err(CliError::Internal("transformed height is off".into()));
                }
                Ok(json!({ "fate": format!("{fate:?}"), "from": section_json(s), "to": section_json(&t) }))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        out["sections"] = Value::Array(moved);
    }
    Ok(out)
}

fn census(seed: u64, case: u32, n: i64, samples: u32, p: u64, k: u32, tries: u64) -> Result<Value, CliError> {
    let case = Case::from_index(case).ok_or_else(|| CliError::Usage(format!("unknown case {case}")))?;
    let field = Field::new(p, k)?;
    let row = case.census_row(n)?;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut all_match = true;
    let mut list = Vec::new();
    for index in 0..samples {
        let sub_seed = master.next_u64();
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
        let (fib, used) = sample_census(&field, case, n, tries, &mut rng)?;
        let inv = fib.invariants();
        let genus = inv.delta / 2 - 1;
        let checks = json!({
            "delta_mod_8": inv.delta.rem_euclid(8) == row.delta_mod_8,
            "epsilon": inv.epsilon == row.epsilon,
            "genus_mod_4": genus_residue(genus) == row.genus_mod_4,
            "delta_is_2g_plus_2": inv.delta == 2 * genus + 2,
            "squarefree": inv.squarefree,
            "corank_one": fib.singular_fibers_have_corank_one(),
        });
        let ok = checks.as_object().expect("object").values().all(|v| v == &json!(true));
        all_match &= ok;
        list.push(json!({
            "index": index,
            "sub_seed": sub_seed,
            "tries": used,
            "fibration": fibration_json(&fib),
            "invariants": inv,
            "genus": genus,
            "checks": checks,
            "ok": ok,
        }));
    }
    Ok(json!({
        "case": case,
        "n": n,
        "field": field_tag(&field),
        "expected": row,
        "all_match": all_match,
        "samples": list,
    }))
}
