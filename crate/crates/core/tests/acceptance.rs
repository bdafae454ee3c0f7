//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rhoforge::barcx::{BarChain, BarGenerator, Sign};
use rhoforge::fingroup::{FiniteAbelianGroup, GroupElement};
use rhoforge::gcp::{assemble_polytopes, octagon, octagon_cells};
use rhoforge::hyperb::{count_table, hyperbolization_constant, hyperbolized_simplex, z_formula};
use rhoforge::lensrho::{
    divisor_count, growth_exponent, homotopy_invariant_count, invariant_count, lens_complex, lens_count,
    rho_atiyah_bott, rho_lower_bound, CountKind, LensSpec,
};
use rhoforge::simplicia::DeltaComplex;
use rhoforge::towers::{
    boundary_cylinder, bounding_chain_from_polytopes, catalan_factor, complexity_bound, covering,
    cylinder_identity_holds, full_tower, BoundingOptions, LabeledCell, DEFAULT_CELL_CAP,
};

const SEED: u64 = 0x5eed;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn random_element(g: &FiniteAbelianGroup, rng: &mut ChaCha8Rng) -> GroupElement {
    let r: Vec<i64> = g.moduli().iter().map(|&m| rng.gen_range(0..m as i64)).collect();
    g.element(&r).unwrap()
}

fn random_chain(g: &FiniteAbelianGroup, n: usize, rng: &mut ChaCha8Rng) -> BarChain {
    let mut c = BarChain::zero(n);
    for _ in 0..rng.gen_range(1..=6) {
        let gen = BarGenerator::new((0..n).map(|_| random_element(g, rng)).collect());
        c.add_term(gen, BigInt::from(rng.gen_range(-3i64..=3))).unwrap();
    }
    c
}

fn soundness() -> Outcome {
    let start = Instant::now();
    let groups = [vec![2], vec![3], vec![6], vec![2, 2]];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut checked = 0;
    for moduli in groups {
        let g = FiniteAbelianGroup::new(moduli).unwrap();
        for n in 1..=5 {
            for _ in 0..500 {
                let c = random_chain(&g, n, &mut rng);
                if !c.boundary(&g).boundary(&g).is_zero() {
                    return outcome(false, format!("d(d c) != 0 for {c} over {g}"));
                }
                checked += 1;
            }
        }
    }
    let t = start.elapsed();
    outcome(
        t < Duration::from_secs(5),
        format!("{checked} chains, d(d c) = 0 exactly, {} ms (limit 5000)", t.as_millis()),
    )
}

fn worked_cycle() -> Outcome {
    let g = FiniteAbelianGroup::new(vec![3, 3, 3, 3]).unwrap();
    let [a, b, c, d] = [0, 1, 2, 3].map(|i| g.generator(i));
    let cells = octagon_cells(&g, &a, &b, &c, &d).unwrap();
    let chain = BarChain::from_signed(2, &cells).unwrap();
    let cycle = chain.boundary(&g).is_zero();
    let polys = assemble_polytopes(&g, 2, &cells, false).unwrap();
    let one = polys.len() == 1 && polys[0].cells().len() == 6;
    let colored = polys.iter().all(|p| p.check_coloring(&g));
    let p = octagon(&g, &a, &b, &c, &d).unwrap();
    let lab = p.endow_identity(&g).unwrap();
    let at = |cell, pos| lab.label(lab.class_of(cell, pos)).clone();
    let got = [at(0, 0), at(0, 1), at(0, 2), at(1, 2), at(2, 1), at(3, 1), at(4, 1), at(5, 0)];
    let ab = g.mul_checked(&a, &b);
    let want = [
        g.identity(),
        a.clone(),
        ab.clone(),
        g.mul_checked(&ab, &c),
        ab,
        b.clone(),
        g.mul_checked(&b, &g.inverse(&d).unwrap()),
        g.inverse(&d).unwrap(),
    ];
    let labels = got == want;
    // the same chain over Z_2 and Z_3 with a = b = c = d
    let small = [2u64, 3].iter().all(|&m| {
        let g = FiniteAbelianGroup::cyclic(m).unwrap();
        let x = g.generator(0);
        BarChain::from_signed(2, &octagon_cells(&g, &x, &x, &x, &x).unwrap()).unwrap().boundary(&g).is_zero()
    });
    outcome(
        cycle && small && one && colored && labels,
        format!(
            "dC = 0: {cycle} (also over Z_2, Z_3: {small}); one polytope of 6 cells: {one}; colored: {colored}; labels A..H = (e, a, ab, abc, ab, b, bd^-1, d^-1): {labels}"
        ),
    )
}

fn bounding_master() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (m, want_n) in [(2u64, 16), (3, 81)] {
        let start = Instant::now();
        let g = FiniteAbelianGroup::cyclic(m).unwrap();
        let x = g.generator(0);
        let p = octagon(&g, &x, &x, &x, &x).unwrap();
        let b = bounding_chain_from_polytopes(&g, 2, &[p], BoundingOptions::default()).unwrap();
        let t = start.elapsed();
        let bound = complexity_bound(2, m, b.cell_count);
        let ok = b.identity_holds
            && b.multiplicity == BigInt::from(want_n)
            && b.complexity() <= bound
            && t < Duration::from_secs(10);
        pass &= ok;
        parts.push(format!(
            "Z_{m}: N = {}, du = N(C - E) {}, |u| = {} <= {bound}, E {}, {} ms",
            b.multiplicity,
            if b.identity_holds { "verified" } else { "FAILED" },
            b.complexity(),
            if b.shadow.is_zero() { "= 0".to_string() } else { format!("= {}", b.shadow) },
            t.as_millis()
        ));
    }
    outcome(pass, parts.join("; "))
}

fn cylinder_identity() -> Outcome {
    let g = FiniteAbelianGroup::cyclic(6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let mut failures = 0;
    for trial in 0..50 {
        let n = trial % 3;
        let cells: Vec<LabeledCell> = (0..rng.gen_range(1..=5))
            .map(|_| LabeledCell {
                sign: if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus },
                labels: (0..=n).map(|_| random_element(&g, &mut rng)).collect(),
            })
            .collect();
        if !cylinder_identity_holds(&g, &cells, n) {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("50 random labeled chains of degree 0..=2 over Z_6, {failures} failures"))
}

fn towers() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut extensions = 0;
    // covering of the octagon over Z_5 along each of its four pairs
    let g = FiniteAbelianGroup::cyclic(5).unwrap();
    let el = |r| g.element(&[r]).unwrap();
    let p = octagon(&g, &el(1), &el(2), &el(3), &el(4)).unwrap();
    for pair in p.boundary_pairs(&g).unwrap() {
        let t = covering(&g, &p, pair, DEFAULT_CELL_CAP).unwrap();
        extensions += t.extensions.len();
        pass &= t.cell_count() == 5 * p.cells().len() && t.result.check_coloring(&g);
    }
    parts.push("Z_5 coverings: 30 cells each".to_string());
    let cases: Vec<(FiniteAbelianGroup, [i64; 4])> = vec![
        (FiniteAbelianGroup::cyclic(2).unwrap(), [1, 1, 1, 1]),
        (FiniteAbelianGroup::cyclic(3).unwrap(), [1, 1, 1, 1]),
        (FiniteAbelianGroup::cyclic(3).unwrap(), [1, 2, 1, 2]),
        (FiniteAbelianGroup::cyclic(5).unwrap(), [1, 2, 3, 4]),
        (FiniteAbelianGroup::cyclic(6).unwrap(), [1, 2, 5, 3]),
    ];
    for (g, r) in cases {
        let [a, b, c, d] = r.map(|x| g.element(&[x]).unwrap());
        let p = octagon(&g, &a, &b, &c, &d).unwrap();
        let s = p.boundary_pairs(&g).unwrap().len() as u32;
        let t = full_tower(&g, &p, DEFAULT_CELL_CAP).unwrap();
        extensions += t.extensions.len();
        let expected = (g.order().pow(s)) as usize * p.cells().len();
        let lab = t.result.endow_identity(&g).unwrap();
        let cancels = boundary_cylinder(&g, &t.result, &lab).is_zero();
        let ok = (t.extensions.is_empty() && t.cell_count() == expected || !t.extensions.is_empty())
            && t.result.check_coloring(&g)
            && cancels
            && t.result.chain_of() == p.chain_of().scaled(&BigInt::from(t.copies));
        pass &= ok;
        parts.push(format!("{g} {r:?}: s = {s}, {} cells", t.cell_count()));
    }
    parts.push(format!("holonomy extensions: {extensions}"));
    outcome(pass, parts.join("; "))
}

fn lens_growth() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let ns: Vec<u64> = (3..=12).collect();
    for d in [2u32, 3] {
        for &n in &ns {
            let c = lens_count(LensSpec::new(n, d)).unwrap();
            pass &= c.top as u64 == n.pow(d - 1);
        }
    }
    let slope2 = growth_exponent(2, &ns, CountKind::Top).unwrap();
    let slope3 = growth_exponent(3, &ns, CountKind::Top).unwrap();
    pass &= (slope2 - 1.0).abs() <= 0.15 && (slope3 - 2.0).abs() <= 0.15;
    let total2 = growth_exponent(2, &ns, CountKind::Total).unwrap();
    let total3 = growth_exponent(3, &ns, CountKind::Total).unwrap();
    for n in 3..=7u64 {
        let h = lens_complex(LensSpec::new(n, 2)).unwrap().homology();
        pass &= h.h(1).is(0, &[n]);
    }
    let t = start.elapsed();
    pass &= t < Duration::from_secs(30);
    outcome(
        pass,
        format!(
            "top cells = N^(d-1) for N in 3..=12, d in {{2,3}}; top-cell slopes {slope2:.4}, {slope3:.4} (all-cell slopes {total2:.4}, {total3:.4}); H1 = Z_N for N in 3..=7; {} ms",
            t.as_millis()
        ),
    )
}

fn rho_formulas() -> Outcome {
    let mut worst_rel = 0.0f64;
    for n in 3..=200u64 {
        let want = ((n - 1) * (n - 2)) as f64 / 3.0;
        let got = rho_atiyah_bott(LensSpec::new(n, 2)).unwrap();
        worst_rel = worst_rel.max((got - want).abs() / want);
    }
    let mut violations = Vec::new();
    for d in [2u32, 4, 6] {
        for n in 4..=50u64 {
            let s = LensSpec::new(n, d);
            let (lb, rho) = (rho_lower_bound(s), rho_atiyah_bott(s).unwrap());
            if lb >= rho {
                violations.push(format!("(N={n}, d={d}: {lb:.4} >= {rho:.4})"));
            }
        }
    }
    let bound_ok = violations.is_empty();
    let mut worst_odd = 0.0f64;
    for d in [1u32, 3, 5, 7] {
        for n in 2..=200u64 {
            worst_odd = worst_odd.max(rho_atiyah_bott(LensSpec::new(n, d)).unwrap().abs());
        }
    }
    outcome(
        worst_rel <= 1e-9 && bound_ok && worst_odd < 1e-9,
        format!(
            "d = 2 closed form: worst relative error {worst_rel:.2e} (limit 1e-9); (N/pi)^d < rho for N in 4..=50, d in {{2,4,6}}: {bound_ok} {}; odd d: worst |sum| {worst_odd:.2e} (limit 1e-9)",
            violations.join(" ")
        ),
    )
}

fn hyperbolization() -> Outcome {
    let h = hyperbolized_simplex(3).unwrap();
    let y1 = &h.spheres[0].complex;
    let y1_ok = y1.f_vector() == vec![6, 6] && y1.homology().h(1).is(1, &[]) && y1.homology().h(0).is(1, &[]);
    let x2 = &h.simplices[1].complex;
    let bd = x2.boundary();
    let x2_ok = x2.euler() == 0
        && x2.homology().h(1).is(1, &[])
        && bd.homology().h(0).is(2, &[])
        && bd.homology().h(1).is(2, &[])
        && bd.f_vector() == vec![12, 12];
    let y2 = &h.spheres[1].complex;
    let hy = y2.homology();
    let y2_ok = y2.top_cells() == 288
        && y2.boundary().f_vector().is_empty()
        && hy.h(0).is(1, &[])
        && hy.h(2).is(1, &[])
        && hy.is_torsion_free();
    let genus = hy.h(1).rank / 2;
    let table = count_table().unwrap();
    let rows: Vec<String> = table
        .iter()
        .map(|r| {
            format!(
                "n={} construction {}{} formula {} ratio {}",
                r.n,
                r.construction,
                if r.built { "" } else { " (extrapolated)" },
                r.formula.as_ref().map_or("n/a".to_string(), |f| f.to_string()),
                r.ratio().map_or("n/a".to_string(), |x| format!("{x}")),
            )
        })
        .collect();
    outcome(
        y1_ok && x2_ok && y2_ok,
        format!(
            "Y1 6-edge circle: {y1_ok}; X2 annulus (chi 0, H1 = Z, two 6-edge boundary circles): {x2_ok}; Y2 closed orientable, 288 triangles, chi {}, genus {genus}: {y2_ok}; counts [{}]",
            y2.euler(),
            rows.join(" | ")
        ),
    )
}

fn constants() -> Outcome {
    let z4 = z_formula(4) == Some(BigInt::from(1728));
    let c1 = hyperbolization_constant(1) == BigInt::from(2_764_800);
    let catalan: Vec<BigInt> = (1..=5).map(catalan_factor).collect();
    let cat = catalan == [1, 2, 5, 14, 42].map(BigInt::from).to_vec();
    let counts = invariant_count(5, 7) == Ok(2)
        && invariant_count(6, 7) == Ok(3)
        && divisor_count(6) == 4
        && homotopy_invariant_count(6, 7) == Ok(3);
    outcome(
        z4 && c1 && cat && counts,
        format!("z(4) = 1728: {z4}; size constant at k = 1 is 2764800: {c1}; Catalan factors 1,2,5,14,42: {cat}; invariant counts (5,7)->2, (6,7)->3, d(6)=4, homotopy (6,7)->3: {counts}"),
    )
}

fn torsion() -> Outcome {
    let mut tree_ok = true;
    for n in 3..=10usize {
        let t = DeltaComplex::polygon(n).laplacian_torsion();
        let want = (n * n) as f64;
        tree_ok &= (t.det(0) - want).abs() <= 1e-9 * want;
    }
    let k = lens_complex(LensSpec::new(5, 2)).unwrap();
    let base = k.laplacian_torsion().value();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 10);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let perms: Vec<Vec<usize>> = k
            .f_vector()
            .iter()
            .map(|&n| {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(&mut rng);
                p
            })
            .collect();
        let t = k.permuted(&perms).unwrap().laplacian_torsion().value();
        worst = worst.max((t - base).abs() / base.abs().max(1.0));
    }
    outcome(
        tree_ok && worst <= 1e-9,
        format!("det' of vertex Laplacian = N^2 for N-gons, N in 3..=10: {tree_ok}; torsion of L(5;1,1) = {base:.6}, worst relative change over 20 relabelings {worst:.2e}"),
    )
}

trait CheckedMul {
    fn mul_checked(&self, a: &GroupElement, b: &GroupElement) -> GroupElement;
}

impl CheckedMul for FiniteAbelianGroup {
    fn mul_checked(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.multiply(a, b).unwrap()
    }
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("chain-complex soundness", soundness),
        ("worked octagon cycle", worked_cycle),
        ("bounding chain", bounding_master),
        ("cylinder identity", cylinder_identity),
        ("covering and tower combinatorics", towers),
        ("lens growth", lens_growth),
        ("rho formulas", rho_formulas),
        ("hyperbolization", hyperbolization),
        ("constants", constants),
        ("laplacian torsion", torsion),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("[{}] {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
