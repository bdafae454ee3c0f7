//! One function per subcommand. Each fills a [`Report`] and returns it; the caller
//! decides the exit status from the checks.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use rhoforge::barcx::{hom_to_bar, ChainFile};
use rhoforge::bigint_to_json as big;
use rhoforge::fingroup::{FiniteAbelianGroup, GroupElement};
use rhoforge::gcp::ColoredPolytope;
use rhoforge::hyperb::{
    count_table, hyperbolization_constant, hyperbolized_simplex, relative_hyperbolization_count, z_formula,
};
use rhoforge::lensrho::{
    complexity_lower_bound, divisor_count, homotopy_invariant_count, invariant_count, lens_complex, lens_count,
    rho_atiyah_bott, rho_lower_bound, rho_lower_bound_check, BoundCheck, LensSpec,
};
use rhoforge::simplicia::{ComplexJson, DeltaComplex, HomologySummary};
use rhoforge::towers::{
    bordism_constant, boundary_cylinder, bounding_chain_from_cells, bounding_chain_from_polytopes, catalan_factor,
    complexity_bound, full_tower, global_multiplicity, BoundingOptions, DEFAULT_CELL_CAP,
};

use crate::report::{write_atomic, Envelope, Report, Status};

pub const CELL_CAP_VAR: &str = "RHOFORGE_CELL_CAP";

/// Error class that maps to the "resource cap exceeded" exit status.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct CapExceeded(pub String);

pub fn cell_cap() -> anyhow::Result<usize> {
    match std::env::var(CELL_CAP_VAR) {
        Ok(v) => v.trim().parse().with_context(|| format!("{CELL_CAP_VAR}={v:?} is not a cell count")),
        Err(_) => Ok(DEFAULT_CELL_CAP),
    }
}

/// `2`, `2,2` or `2x3x3`.
pub fn parse_group(s: &str) -> anyhow::Result<FiniteAbelianGroup> {
    let moduli = s
        .split([',', 'x'])
        .map(|p| p.trim().parse::<u64>().with_context(|| format!("bad modulus {p:?} in group {s:?}")))
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(FiniteAbelianGroup::new(moduli)?)
}

fn tower_error(e: rhoforge::towers::TowerError) -> anyhow::Error {
    match e {
        rhoforge::towers::TowerError::CellCap { .. } => CapExceeded(e.to_string()).into(),
        e => e.into(),
    }
}

fn homology_json(h: &HomologySummary) -> Value {
    json!(h
        .groups
        .iter()
        .map(
            |g| json!({"rank": g.rank, "torsion": g.torsion.iter().map(big).collect::<Vec<_>>(), "text": g.to_string()})
        )
        .collect::<Vec<_>>())
}

// ---- bound-chain ----------------------------------------------------------------------

pub struct BoundChainArgs {
    pub group: String,
    pub cycle: Option<PathBuf>,
    pub polytope: Option<PathBuf>,
    pub strict: bool,
    pub emit_chain: bool,
}

pub fn bound_chain(env: &mut Envelope, a: &BoundChainArgs) -> anyhow::Result<Report> {
    let g = parse_group(&a.group)?;
    let opts = BoundingOptions { cell_cap: cell_cap()?, allow_degenerate: !a.strict };
    let b = match (&a.cycle, &a.polytope) {
        (Some(p), None) => {
            let file = ChainFile::parse(&g, &env.read_input(p)?)?;
            bounding_chain_from_cells(&g, file.degree, &file.cells, opts)
        }
        (None, Some(p)) => {
            let poly = ColoredPolytope::from_json_str(&g, &env.read_input(p)?, !a.strict)?;
            bounding_chain_from_polytopes(&g, poly.degree(), &[poly], opts)
        }
        _ => bail!("give exactly one of --cycle and --polytope"),
    }
    .map_err(tower_error)?;

    let mut r = Report::default();
    let bound = b.complexity_bound(&g);
    r.check(
        "boundary identity du = N(C - E)",
        Status::from_bool(b.identity_holds),
        json!({
            "identity": format!("du = {}(C - E)", b.multiplicity),
            "N": big(&b.multiplicity),
            "shadow_is_zero": b.shadow.is_zero(),
        }),
    );
    r.check("tower boundaries cancel", Status::from_bool(b.boundary_cancels), json!({}));
    r.check(
        "complexity within bound",
        Status::from_bool(b.complexity() <= bound),
        json!({"complexity": big(&b.complexity()), "bound": big(&bound)}),
    );
    r.result("group", json!(g.to_string()));
    r.result("degree", json!(b.degree));
    r.result("cells", json!(b.cell_count));
    r.result("multiplicity", big(&b.multiplicity));
    r.result("global_multiplicity", big(&b.global_multiplicity(&g)));
    r.result("complexity", big(&b.complexity()));
    r.result("bound", big(&bound));
    r.result("cycle", b.cycle.to_json_value());
    r.result("shadow", b.shadow.to_json_value());
    r.result(
        "polytopes",
        json!(b
            .polytopes
            .iter()
            .map(|p| json!({"cells": p.cells, "pairs": p.pairs, "heights": p.heights, "copies": p.copies, "tower_cells": p.tower_cells}))
            .collect::<Vec<_>>()),
    );
    r.result(
        "holonomy_extensions",
        json!(b
            .extensions
            .iter()
            .map(|e| json!({"pair": e.pair, "residual": e.residual.residues(), "old_height": e.old_height, "new_height": e.new_height}))
            .collect::<Vec<_>>()),
    );
    if a.emit_chain {
        r.result("u", b.u.to_json_value());
    }
    Ok(r)
}

// ---- verify-polytope ------------------------------------------------------------------

pub struct VerifyArgs {
    pub group: String,
    pub polytope: PathBuf,
    pub strict: bool,
    pub trials: usize,
    pub tower: bool,
}

fn random_element(g: &FiniteAbelianGroup, rng: &mut ChaCha8Rng) -> GroupElement {
    let r: Vec<i64> = g.moduli().iter().map(|&m| rng.gen_range(0..m as i64)).collect();
    g.element(&r).expect("residues in range")
}

pub fn verify_polytope(env: &mut Envelope, a: &VerifyArgs) -> anyhow::Result<Report> {
    let g = parse_group(&a.group)?;
    let p = ColoredPolytope::from_json_str(&g, &env.read_input(&a.polytope)?, !a.strict)?;
    let mut r = Report::default();
    let classes = p.vertex_classes();
    r.check("gluings valid", Status::Pass, json!({"cells": p.cells().len(), "gluings": p.gluings().len()}));
    let is_cycle = p.chain_of().boundary(&g).is_zero();
    r.check("chain is a cycle", Status::from_bool(is_cycle), json!({}));
    let colored = p.check_coloring(&g);
    r.check(
        "coloring",
        Status::from_bool(colored),
        json!({"vertices": classes.count, "components": classes.components}),
    );
    let pairs = p.boundary_pairs(&g);
    r.check(
        "unglued faces pair up",
        Status::from_bool(pairs.is_ok()),
        match &pairs {
            Ok(ps) => json!({"pairs": ps.len()}),
            Err(e) => json!({"error": e.to_string()}),
        },
    );
    if colored {
        let mut rng = ChaCha8Rng::seed_from_u64(env.seed);
        let mut bad = 0;
        for _ in 0..a.trials {
            let bases: Vec<GroupElement> = (0..classes.components).map(|_| random_element(&g, &mut rng)).collect();
            let lab = p.endow_labels(&g, &bases)?;
            let recovered = p.cells().iter().all(|c| hom_to_bar(&g, &lab.cell_labels(c.id)).1 == c.gen);
            if !recovered {
                bad += 1;
            }
        }
        r.check("labels recover generators", Status::from_bool(bad == 0), json!({"trials": a.trials, "failures": bad}));
    }
    if a.tower && colored && pairs.is_ok() {
        let t = full_tower(&g, &p, cell_cap()?).map_err(tower_error)?;
        let lab = t.result.endow_identity(&g)?;
        let cancels = boundary_cylinder(&g, &t.result, &lab).is_zero();
        r.check(
            "tower boundary cylinder cancels",
            Status::from_bool(cancels && t.result.check_coloring(&g)),
            json!({"copies": t.copies, "heights": t.heights, "cells": t.cell_count(), "extensions": t.extensions.len()}),
        );
    }
    r.result("polytope", p.to_json_value(&g));
    Ok(r)
}

// ---- complexes ------------------------------------------------------------------------

/// A complex read from a JSON file or built as a lens space.
pub enum ComplexSource {
    File(PathBuf),
    Lens(u64, u32),
}

pub fn parse_lens_pair(s: &str) -> Result<(u64, u32), String> {
    let (n, d) = s.split_once(',').ok_or_else(|| format!("expected N,d, got {s:?}"))?;
    Ok((
        n.trim().parse().map_err(|_| format!("bad N in {s:?}"))?,
        d.trim().parse().map_err(|_| format!("bad d in {s:?}"))?,
    ))
}

fn load_complex(env: &mut Envelope, src: &ComplexSource) -> anyhow::Result<DeltaComplex> {
    match src {
        ComplexSource::File(p) => {
            let j: ComplexJson =
                serde_json::from_str(&env.read_input(p)?).with_context(|| format!("parsing {}", p.display()))?;
            Ok(DeltaComplex::from_json(j)?)
        }
        ComplexSource::Lens(n, d) => Ok(lens_complex(LensSpec::new(*n, *d))?),
    }
}

fn counts_json(k: &DeltaComplex) -> Value {
    json!({"f_vector": k.f_vector(), "total": k.total_cells(), "top": k.top_cells(), "dimension": k.dim(), "euler": k.euler()})
}

pub fn fvector(env: &mut Envelope, src: &ComplexSource) -> anyhow::Result<Report> {
    let k = load_complex(env, src)?;
    let mut r = Report::default();
    r.check("counts", Status::Info, counts_json(&k));
    r.result("counts", counts_json(&k));
    Ok(r)
}

pub fn homology(env: &mut Envelope, src: &ComplexSource) -> anyhow::Result<Report> {
    let k = load_complex(env, src)?;
    let h = k.homology();
    let mut r = Report::default();
    r.check(
        "Euler characteristic from ranks",
        Status::from_bool(h.euler() == k.euler()),
        json!({"from_counts": k.euler(), "from_homology": h.euler()}),
    );
    r.result("counts", counts_json(&k));
    r.result("homology", homology_json(&h));
    Ok(r)
}

fn shuffled_permutations(k: &DeltaComplex, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    k.f_vector()
        .iter()
        .map(|&n| {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(rng);
            p
        })
        .collect()
}

pub fn torsion(env: &mut Envelope, src: &ComplexSource, trials: usize) -> anyhow::Result<Report> {
    let k = load_complex(env, src)?;
    let t = k.laplacian_torsion();
    let mut rng = ChaCha8Rng::seed_from_u64(env.seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let other = k.permuted(&shuffled_permutations(&k, &mut rng))?.laplacian_torsion();
        worst = worst.max((other.log_torsion - t.log_torsion).abs() / t.log_torsion.abs().max(1.0));
    }
    let mut r = Report::default();
    r.check(
        "relabeling invariance",
        Status::from_bool(worst <= 1e-9),
        json!({"trials": trials, "worst_relative_change": worst, "tolerance": 1e-9}),
    );
    r.result("counts", counts_json(&k));
    r.result("log_dets", json!(t.log_dets));
    r.result("log_torsion", json!(t.log_torsion));
    r.result("torsion", json!(t.value()));
    Ok(r)
}

// ---- hyperbolize ----------------------------------------------------------------------

pub fn hyperbolize(dim: usize) -> anyhow::Result<Report> {
    if !(1..=2).contains(&dim) {
        bail!("--dim must be 1 or 2, got {dim}");
    }
    let h = hyperbolized_simplex(dim + 1)?;
    let sphere = &h.spheres[dim - 1];
    let k = &sphere.complex;
    let hom = k.homology();
    let closed = k.boundary().f_vector().is_empty();
    let orientable_closed = closed && hom.h(0).is(1, &[]) && hom.h(dim).is(1, &[]) && hom.is_torsion_free();
    let mut r = Report::default();
    r.check(
        "closed orientable manifold homology",
        Status::from_bool(orientable_closed),
        json!({"closed": closed, "torsion_free": hom.is_torsion_free()}),
    );
    r.check(
        "carriers over the boundary of the target simplex",
        Status::Info,
        json!({"target_dim": sphere.target_dim, "injective_colouring": sphere.is_nondegenerate()}),
    );
    let table: Vec<Value> = count_table()?
        .iter()
        .map(|row| {
            json!({
                "n": row.n,
                "construction": big(&row.construction),
                "built": row.built,
                "formula": row.formula.as_ref().map(big),
                "ratio": row.ratio(),
            })
        })
        .collect();
    r.check("top-cell counts against the closed formula", Status::Info, json!(table));
    r.result("dimension", json!(dim));
    r.result("counts", counts_json(k));
    r.result("homology", homology_json(&hom));
    if dim == 2 {
        r.result("genus", json!(hom.h(1).rank / 2));
    }
    r.result(
        "stages",
        json!(h
            .simplices
            .iter()
            .map(|x| json!({"f_vector": x.complex.f_vector(), "euler": x.complex.euler()}))
            .collect::<Vec<_>>()),
    );
    r.result("count_table", json!(table));
    r.result("complex", sphere.to_json_value());
    Ok(r)
}

// ---- lens ------------------------------------------------------------------------------

pub fn lens(n: u64, d: u32, with_torsion: bool) -> anyhow::Result<Report> {
    let spec = LensSpec::new(n, d);
    let k = lens_complex(spec)?;
    let counts = lens_count(spec)?;
    let h = k.homology();
    let mut r = Report::default();
    let want_top = (n as u128).pow(d - 1);
    r.check(
        "top cells = N^(d-1)",
        Status::from_bool(counts.top as u128 == want_top),
        json!({"top": counts.top, "expected": want_top.to_string()}),
    );
    let h1 = if d == 1 { h.h(1).is(1, &[]) } else { h.h(1).is(0, &[n]) };
    r.check("first homology", Status::from_bool(h1), json!({"H1": h.h(1).to_string()}));
    let rho = rho_atiyah_bott(spec)?;
    let lb = rho_lower_bound(spec);
    let status = rho_lower_bound_check(spec)?;
    r.check(
        "(N/pi)^d < rho",
        match status {
            BoundCheck::Holds => Status::Pass,
            BoundCheck::Fails => Status::Fail,
            BoundCheck::OutOfHypothesis => Status::Info,
        },
        json!({"rho": rho, "lower_bound": lb, "outcome": status.as_str()}),
    );
    let dim = u64::from(spec.dimension());
    r.result("N", json!(n));
    r.result("d", json!(d));
    r.result("manifold_dimension", json!(dim));
    r.result("counts", counts_json(&k));
    r.result("homology", homology_json(&h));
    r.result("rho", json!(rho));
    r.result("lower_bound", json!(lb));
    r.result("complexity_lower_bound_per_unit_constant", json!(complexity_lower_bound(spec, 1.0)));
    r.result(
        "invariant_counts",
        json!({
            "rho_distinguished": invariant_count(n, dim)?,
            "homotopy_types": homotopy_invariant_count(n, dim)?,
            "divisors": divisor_count(n),
        }),
    );
    if with_torsion {
        let t = k.laplacian_torsion();
        r.result("log_torsion", json!(t.log_torsion));
        r.result("torsion", json!(t.value()));
    }
    Ok(r)
}

// ---- rho-sweep -------------------------------------------------------------------------

pub struct SweepRow {
    pub n: u64,
    pub rho: f64,
    pub lower_bound: f64,
    pub outcome: BoundCheck,
}

pub fn sweep_rows(d: u32, from: u64, to: u64) -> anyhow::Result<Vec<SweepRow>> {
    if from < 2 || to < from {
        bail!("need 2 <= --from <= --to, got {from}..{to}");
    }
    (from..=to)
        .into_par_iter()
        .map(|n| {
            let spec = LensSpec::new(n, d);
            Ok(SweepRow {
                n,
                rho: rho_atiyah_bott(spec)?,
                lower_bound: rho_lower_bound(spec),
                outcome: rho_lower_bound_check(spec)?,
            })
        })
        .collect()
}

pub fn rho_sweep(d: u32, from: u64, to: u64, csv_path: Option<&Path>) -> anyhow::Result<Report> {
    let rows = sweep_rows(d, from, to)?;
    let mut r = Report::default();
    let failing: Vec<Value> = rows
        .iter()
        .filter(|row| row.outcome == BoundCheck::Fails)
        .map(|row| json!({"N": row.n, "rho": row.rho, "lower_bound": row.lower_bound}))
        .collect();
    let tested = rows.iter().filter(|row| row.outcome != BoundCheck::OutOfHypothesis).count();
    r.check(
        "(N/pi)^d < rho",
        Status::from_bool(failing.is_empty()),
        json!({"rows": rows.len(), "in_hypothesis": tested, "failing": failing}),
    );
    if d == 2 {
        let worst = rows
            .iter()
            .filter(|row| row.n >= 3)
            .map(|row| {
                let want = ((row.n - 1) * (row.n - 2)) as f64 / 3.0;
                (row.rho - want).abs() / want
            })
            .fold(0.0f64, f64::max);
        r.check(
            "closed form (N-1)(N-2)/3",
            Status::from_bool(worst <= 1e-9),
            json!({"worst_relative_error": worst, "tolerance": 1e-9}),
        );
    }
    if d % 2 == 1 {
        let worst = rows.iter().map(|row| row.rho.abs()).fold(0.0f64, f64::max);
        r.check("odd powers vanish", Status::from_bool(worst < 1e-9), json!({"worst_abs": worst, "tolerance": 1e-9}));
    }
    if let Some(path) = csv_path {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["N", "rho", "lower_bound", "pass"])?;
        for row in &rows {
            let pass = match row.outcome {
                BoundCheck::Holds => "true",
                BoundCheck::Fails => "false",
                BoundCheck::OutOfHypothesis => "out-of-hypothesis",
            };
            w.write_record([row.n.to_string(), row.rho.to_string(), row.lower_bound.to_string(), pass.to_string()])?;
        }
        write_atomic(path, &w.into_inner()?)?;
        r.result("csv", json!(path.display().to_string()));
    }
    r.result("d", json!(d));
    r.result("from", json!(from));
    r.result("to", json!(to));
    Ok(r)
}

// ---- constants -------------------------------------------------------------------------

pub struct ConstantsArgs {
    pub k: u64,
    pub group_order: u64,
    pub simplices: u64,
    pub dimension_factor: Option<String>,
    pub degree: usize,
    pub cells: usize,
}

pub fn constants(a: &ConstantsArgs) -> anyhow::Result<Report> {
    if a.k == 0 {
        bail!("--k must be at least 1");
    }
    let mut r = Report::default();
    let z4 = z_formula(4) == Some(BigInt::from(1728));
    let c1 = hyperbolization_constant(1) == BigInt::from(2_764_800u64);
    let cat: Vec<BigInt> = (1..=5).map(catalan_factor).collect();
    r.check("z(4) = 1728", Status::from_bool(z4), json!({}));
    r.check("hyperbolization constant at k = 1 is 2764800", Status::from_bool(c1), json!({}));
    r.check(
        "Catalan factors 1, 2, 5, 14, 42",
        Status::from_bool(cat == [1, 2, 5, 14, 42].map(BigInt::from)),
        json!(cat.iter().map(big).collect::<Vec<_>>()),
    );
    let k = a.k;
    let bc = bordism_constant(k, a.group_order);
    r.result("k", json!(k));
    r.result("z", big(&z_formula(4 * k).expect("4k >= 4")));
    r.result("hyperbolization_constant", big(&hyperbolization_constant(k)));
    r.result(
        "relative_hyperbolization_count",
        json!({"simplices": a.simplices, "count": big(&relative_hyperbolization_count(k, a.simplices))}),
    );
    let factor = match &a.dimension_factor {
        Some(s) => Some(s.parse::<BigInt>().with_context(|| format!("bad --dimension-factor {s:?}"))?),
        None => None,
    };
    r.result(
        "bordism_constant",
        json!({
            "group_order": a.group_order,
            "catalan": big(&bc.catalan),
            "known_part": big(&bc.known_part()),
            "dimension_factor": factor.as_ref().map(big),
            "value": factor.as_ref().map(|c| big(&bc.evaluate(c))),
        }),
    );
    r.result(
        "chain_bounds",
        json!({
            "degree": a.degree,
            "cells": a.cells,
            "complexity_bound": big(&complexity_bound(a.degree, a.group_order, a.cells)),
            "global_multiplicity": big(&global_multiplicity(a.degree, a.group_order, a.cells)),
        }),
    );
    Ok(r)
}
