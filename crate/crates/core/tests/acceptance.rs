//! Acceptance suite: one PASS/FAIL line per criterion, each checked against
//! oracles computed here rather than by the library.

use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use blockholo::funcspace::{
    cross_block_derivative_check, generate_family, holomorphy_check, triangular_check, wirtinger_at, BlackBox,
    BuiltinSpec, CheckParams, CnFunction, Component, FamilyOptions, MixedTerm,
};
use blockholo::hull::{
    axis_circles_sample, band_width, compactness_diagnostic, hull_approx, product_decomposition_check,
    product_sample, torus_sample, ConvexityStatus, DiagnosticBands,
};
use blockholo::leafspace::{build_leaf_graph, descent_discrepancy, lift_branch_log, LeafLift};
use blockholo::recipe::{make_region, DomainRecipe};
use blockholo::region::{BlockShape, CompactSample, Grid, Region};
use blockholo::suites::{convex_corpus, n1_corpus, probe_sample, product_law_corpus, ProductCase};
use blockholo::witness::{build_witness, choose_scale_power_from_moduli, verify_witness};
use num_complex::Complex64;

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn lib<T>(r: blockholo::Result<T>) -> Result<T, String> {
    r.map_err(|e| format!("library error: {e}"))
}

/// Sup-norm Hausdorff distance between cell-centre sets, by brute force over
/// the cells present in only one of the masks.
fn hausdorff_oracle(grid: &Grid, a: &[bool], b: &[bool]) -> f64 {
    let centres = |m: &[bool]| (0..m.len()).filter(|&i| m[i]).map(|i| grid.center_point(i).0).collect::<Vec<_>>();
    let only = |x: &[bool], y: &[bool]| {
        (0..x.len()).filter(|&i| x[i] && !y[i]).map(|i| grid.center_point(i).0).collect::<Vec<_>>()
    };
    let (ca, cb) = (centres(a), centres(b));
    let dist = |p: &[Complex64], set: &[Vec<Complex64>]| {
        set.iter()
            .map(|q| p.iter().zip(q).map(|(s, t)| (s - t).norm()).fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min)
    };
    let d1 = only(a, b).iter().map(|p| dist(p, &cb)).fold(0.0, f64::max);
    let d2 = only(b, a).iter().map(|p| dist(p, &ca)).fold(0.0, f64::max);
    d1.max(d2)
}

// ---------------------------------------------------------------- criterion 1

/// Polynomial tuple: per component, `(coeff, exponents over all coords)`.
struct PolyTuple {
    label: &'static str,
    comps: Vec<Vec<(f64, [u32; 2])>>,
    /// Analytic: some `d f_i / d z_k` with `k` outside block `i` is nonzero.
    crosses: bool,
}

fn tuple_fn(shape: &BlockShape, t: &PolyTuple) -> CnFunction {
    let comps = t
        .comps
        .iter()
        .map(|terms| {
            if terms.is_empty() {
                return Component::Zero;
            }
            let mixed = terms.iter().map(|(a, e)| MixedTerm { coeff: c(*a, 0.0), z: e.to_vec(), zbar: vec![0, 0] }).collect();
            Component::BlackBox(BlackBox::from_spec(BuiltinSpec::Mixed(mixed)))
        })
        .collect();
    CnFunction::new(shape.clone(), comps, t.label).unwrap()
}

/// `d f_i / d z_k` of a polynomial tuple, by differentiating the monomials.
fn analytic_dz(t: &PolyTuple, i: usize, k: usize, z: &[Complex64]) -> Complex64 {
    t.comps[i]
        .iter()
        .filter(|(_, e)| e[k] > 0)
        .map(|(a, e)| {
            let mut term = c(*a * e[k] as f64, 0.0);
            for (j, &p) in e.iter().enumerate() {
                let p = if j == k { p - 1 } else { p };
                term *= z[j].powu(p);
            }
            term
        })
        .sum()
}

fn criterion_1() -> Outcome {
    let u = lib(make_region(&DomainRecipe::polydisk(&[1.0, 1.0]), 1.0 / 16.0))?;
    let shape = u.shape().clone();
    let t = |label, comps, crosses| PolyTuple { label, comps, crosses };
    let corpus = vec![
        t("(z1^2, z2^3)", vec![vec![(1.0, [2, 0])], vec![(1.0, [0, 3])]], false),
        t("(z1, z2)", vec![vec![(1.0, [1, 0])], vec![(1.0, [0, 1])]], false),
        t("(z1^3+2z1, z2^2-z2)", vec![vec![(1.0, [3, 0]), (2.0, [1, 0])], vec![(1.0, [0, 2]), (-1.0, [0, 1])]], false),
        t("(0, z2^4)", vec![vec![], vec![(1.0, [0, 4])]], false),
        t("(5z1^5, 0)", vec![vec![(5.0, [5, 0])], vec![]], false),
        t("(z1 z2, 0)", vec![vec![(1.0, [1, 1])], vec![]], true),
        t("(z2, z1)", vec![vec![(1.0, [0, 1])], vec![(1.0, [1, 0])]], true),
        t("(z1 + z2^2, z2)", vec![vec![(1.0, [1, 0]), (1.0, [0, 2])], vec![(1.0, [0, 1])]], true),
        t("(z1, z1 z2^2)", vec![vec![(1.0, [1, 0])], vec![(1.0, [1, 2])]], true),
        t("(0, z1^3)", vec![vec![], vec![(1.0, [3, 0])]], true),
    ];
    let params = CheckParams::default();
    let step = (u.h() / 10.0).max(1e-4);
    let seq = lib(u.dense_sequence())?;
    let mut worst_fd = 0.0f64;
    let mut checked = 0;
    for tup in &corpus {
        let f = tuple_fn(&shape, tup);
        let rep = lib(cross_block_derivative_check(&f, &u, &params))?;
        ensure(rep.pass == !tup.crosses, format!("{}: verdict {} disagrees with analytic ground truth", tup.label, rep.pass))?;
        if tup.label == "(z1 z2, 0)" {
            ensure(rep.worst_point.is_some(), "(z1 z2, 0) has no worst point")?;
        }
        // the samples the check uses: the first `samples` dense points clear of the boundary
        for kk in 0..params.samples.min(seq.len()) {
            let z = seq.point(kk);
            if lib(u.dist_to_complement(&z))? <= 2.0 * step {
                continue;
            }
            let w = lib(wirtinger_at(&f, &z.0, step))?;
            for i in 0..2 {
                for k in 0..2 {
                    worst_fd = worst_fd.max((w.dz(i, k) - analytic_dz(tup, i, k, &z.0)).norm());
                }
            }
            checked += 1;
        }
    }
    ensure(worst_fd <= 1e-3, format!("finite-difference error {worst_fd:e} exceeds 1e-3"))?;
    Ok(format!("10 tuples (5 pass, 5 fail) match; max |dz - analytic| = {worst_fd:.2e} over {checked} samples"))
}

// ---------------------------------------------------------------- criterion 2

/// Components of the z2-slice over the cell containing `a1`, by flood fill
/// over the region's mask.
fn slice_components_oracle(u: &Region, a1: Complex64) -> usize {
    let g = u.grid();
    let base = g.cell_of_point(&[a1, c(0.0, 0.0)]).map(|f| (g.axis_index(f, 0), g.axis_index(f, 1)));
    let (i0, i1) = base.expect("a1 on the grid");
    let (n2, n3) = (g.counts()[2], g.counts()[3]);
    let flat = |x: usize, y: usize| i0 * g.strides()[0] + i1 * g.strides()[1] + x * g.strides()[2] + y * g.strides()[3];
    let mut seen = vec![false; n2 * n3];
    let mut count = 0;
    for x in 0..n2 {
        for y in 0..n3 {
            if seen[x * n3 + y] || !u.is_inside_cell(flat(x, y)) {
                continue;
            }
            count += 1;
            let mut stack = vec![(x, y)];
            seen[x * n3 + y] = true;
            while let Some((p, q)) = stack.pop() {
                let nb = [(p.wrapping_sub(1), q), (p + 1, q), (p, q.wrapping_sub(1)), (p, q + 1)];
                for (a, b) in nb {
                    if a < n2 && b < n3 && !seen[a * n3 + b] && u.is_inside_cell(flat(a, b)) {
                        seen[a * n3 + b] = true;
                        stack.push((a, b));
                    }
                }
            }
        }
    }
    count
}

fn criterion_2() -> Outcome {
    let u = lib(make_region(&DomainRecipe::Spiral { eps: 0.1, turns: 3 }, 1.0 / 32.0))?;
    let g = lib(build_leaf_graph(&u, 0))?;
    ensure(g.cycle_rank() == Some(0) && g.component_count() == 1, format!("leaf graph not acyclic: rank {:?}", g.cycle_rank()))?;
    let over = lib(g.nodes_at(&[c(1.0, 0.0)]))?;
    ensure(over.len() == 3, format!("{} nodes over a1 = 1", over.len()))?;
    let oracle = slice_components_oracle(&u, c(1.0, 0.0));
    ensure(oracle == 3, format!("flood fill finds {oracle} slice components"))?;
    let lift = lib(LeafLift::anchored(&u, 0, &[c(1.0, 0.0), c(0.0, 0.0)], c(0.0, 0.0)))?;
    let mut worst = 0.0f64;
    for k in 0..2 {
        let a = lib(lift.eval(&[c(1.0, 0.0), c(TAU * k as f64, 0.0)]))?;
        let b = lib(lift.eval(&[c(1.0, 0.0), c(TAU * (k + 1) as f64, 0.0)]))?;
        worst = worst.max((b - a - c(0.0, TAU)).norm());
    }
    ensure(worst <= 0.05, format!("turn-to-turn difference off 2 pi i by {worst}"))?;
    // single-valued on the projection would need equal values over a1 = 1
    let assign = lib(lift_branch_log(&g, c(0.0, 0.0)))?;
    let mut vals: Vec<f64> = over.map(|n| assign.values[n].im).collect();
    vals.sort_by(f64::total_cmp);
    let min_gap = vals.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    ensure((min_gap - TAU).abs() <= 0.05, format!("projection values differ by {min_gap}, not about 2 pi"))?;
    ensure(descent_discrepancy(&g, &assign) > PI, "lift descends to the projection")?;
    Ok(format!("acyclic, 3 nodes over a1=1 (flood fill agrees), 2 pi i steps off by {worst:.1e}, projection gap {min_gap:.4}"))
}

// ---------------------------------------------------------------- criterion 3

fn bidisk_oracle(u: &Region, r: f64) -> Vec<bool> {
    let g = u.grid();
    (0..g.total_cells())
        .map(|f| u.is_inside_cell(f) && g.center_point(f).0.iter().all(|z| z.norm() <= r))
        .collect()
}

fn criterion_3() -> Outcome {
    let u = lib(make_region(&DomainRecipe::polydisk(&[1.0, 1.0]), 1.0 / 32.0))?;
    let k = lib(torus_sample(&u, &[0.5, 0.5], 64))?;
    let fam = lib(generate_family(&u, 6, FamilyOptions::default()))?;
    let hull = lib(hull_approx(&u, &k, &fam, 1e-9))?;
    let d = hausdorff_oracle(u.grid(), &hull.mask(), &bidisk_oracle(&u, 0.5));
    ensure(d <= 2.0 * u.h(), format!("Hausdorff distance {d} > 2h"))?;
    let v = lib(compactness_diagnostic(&u, &k, &hull, DiagnosticBands::for_region(&u)))?;
    ensure(v.status == ConvexityStatus::CompactLike, format!("verdict {}", v.status))?;
    Ok(format!("{} hull cells, Hausdorff to oracle {d:.4} <= 2h = {:.4}, {}", hull.len(), 2.0 * u.h(), v.status))
}

// ---------------------------------------------------------------- criterion 4

fn criterion_4() -> Outcome {
    let h = 1.0 / 16.0;
    let mut lines = Vec::new();
    let mut annulus_laurent = false;
    for case in product_law_corpus(0) {
        let regions = case.factors.iter().map(|f| make_region(f, h)).collect::<blockholo::Result<Vec<_>>>();
        let regions = lib(regions)?;
        let ks = lib(regions.iter().zip(&case.ks).map(|(u, k)| ProductCase::factor_sample(u, *k, 64)).collect::<blockholo::Result<Vec<_>>>())?;
        annulus_laurent |= case.options.poles && case.factors.iter().any(|f| matches!(f, DomainRecipe::AnnulusProduct { .. }));
        // per-factor oracle: the product of the factor hulls
        let mut factor_masks = Vec::new();
        for (f, k) in regions.iter().zip(&ks) {
            let fam = lib(generate_family(f, 6, case.options))?;
            factor_masks.push(lib(hull_approx(f, k, &fam, 1e-9))?.mask());
        }
        let refs: Vec<&Region> = regions.iter().collect();
        let product = lib(Region::product(&refs))?;
        let krefs: Vec<&CompactSample> = ks.iter().collect();
        let kp = lib(product_sample(&product, &krefs))?;
        let fam = lib(generate_family(&product, 6, case.options))?;
        let hull = lib(hull_approx(&product, &kp, &fam, 1e-9))?.mask();
        let n2 = regions[1].grid().total_cells();
        let expected: Vec<bool> = (0..hull.len()).map(|f| factor_masks[0][f / n2] && factor_masks[1][f % n2]).collect();
        let symdiff = expected.iter().zip(&hull).filter(|(a, b)| a != b).count();
        let band = band_width(product.grid(), &expected, &hull, 4);
        ensure(band <= 2, format!("{}: symmetric difference {symdiff} cells, band {band}", case.name))?;
        lines.push(format!("{}: {} cells, symdiff {symdiff}", case.name, expected.iter().filter(|b| **b).count()));
    }
    ensure(annulus_laurent, "no annulus factor with Laurent terms")?;
    Ok(lines.join("; "))
}

// ---------------------------------------------------------------- criterion 5

/// Sup-norm distance from a point to the complement of a domain that only
/// depends on the coordinate moduli: the sup-ball of radius `d` reaches
/// exactly the moduli in `[rho_k - d, rho_k + d]`, scanned on a fine grid.
fn modulus_domain_dist(rho: [f64; 2], inside: &dyn Fn(f64, f64) -> bool, step: f64) -> f64 {
    let mut d = 0.0;
    while d < 2.0 {
        let n = (2.0 * d / step).ceil() as usize + 1;
        for i in 0..n {
            for j in 0..n {
                let a = (rho[0] - d + 2.0 * d * i as f64 / (n - 1).max(1) as f64).max(0.0);
                let b = (rho[1] - d + 2.0 * d * j as f64 / (n - 1).max(1) as f64).max(0.0);
                if !inside(a, b) {
                    return d;
                }
            }
        }
        d += step;
    }
    d
}

fn escaping_case(u: &Region, k: &CompactSample, inside: &dyn Fn(f64, f64) -> bool) -> Result<(f64, f64), String> {
    let fam = lib(generate_family(u, 6, FamilyOptions::default()))?;
    let hull = lib(hull_approx(u, k, &fam, 1e-9))?;
    let v = lib(compactness_diagnostic(u, k, &hull, DiagnosticBands::for_region(u)))?;
    ensure(v.status == ConvexityStatus::Escaping, format!("{}: verdict {}", u.recipe().text, v.status))?;
    let step = 1e-3;
    // the distance only depends on the moduli, so scan each distinct pair once
    let mut moduli: Vec<[f64; 2]> = k.iter().map(|p| [p.0[0].norm(), p.0[1].norm()]).collect();
    moduli.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    moduli.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
    let k_dist = moduli.iter().map(|&rho| modulus_domain_dist(rho, inside, step)).fold(f64::INFINITY, f64::min);
    let w = v.witness.ok_or("no escaping hull point")?;
    let w_dist = modulus_domain_dist([w.0[0].norm(), w.0[1].norm()], inside, step);
    ensure(w_dist <= 2.0 * u.h() + step, format!("closest hull point is {w_dist} from the complement on the fine scan"))?;
    Ok((k_dist, w_dist))
}

fn criterion_5() -> Outcome {
    let h = 1.0 / 32.0;
    let hartogs = lib(make_region(&DomainRecipe::HartogsFigure { inner: 0.5 }, h))?;
    let k = lib(torus_sample(&hartogs, &[0.6, 0.7], 64))?;
    let in_hartogs = |a: f64, b: f64| a < 1.0 && b < 1.0 && !(a >= 0.5 && b <= 0.5);
    let (kd, wd) = escaping_case(&hartogs, &k, &in_hartogs)?;
    ensure(kd >= 0.19 - 1e-3, format!("fine-scan dist(K, complement) = {kd} < 0.19"))?;
    let ball = lib(make_region(&DomainRecipe::EuclideanBall { dims: vec![1, 1], radius: 1.0 }, h))?;
    let kb = lib(axis_circles_sample(&ball, 0.75, 64))?;
    let in_ball = |a: f64, b: f64| a * a + b * b < 1.0;
    let (bkd, bwd) = escaping_case(&ball, &kb, &in_ball)?;
    ensure(bkd > 2.0 * h, format!("ball circles only {bkd} from the complement"))?;
    Ok(format!(
        "hartogs ESCAPING (fine-scan dist(K) {kd:.3}, hull point {wd:.3}); ball ESCAPING (dist(K) {bkd:.3}, hull point {bwd:.3})"
    ))
}

// ---------------------------------------------------------------- criterion 6

fn criterion_6() -> Outcome {
    let h = 1.0 / 16.0;
    let mut rows = Vec::new();
    for case in convex_corpus(0) {
        let u = lib(make_region(&case.recipe, h))?;
        let k = match case.k {
            Some(spec) => lib(blockholo::commands::parse_k_spec(&u, spec, 64))?,
            None => lib(probe_sample(&u, 64))?,
        };
        let fam = lib(generate_family(&u, 6, FamilyOptions::default()))?;
        let hull = lib(hull_approx(&u, &k, &fam, 1e-9))?;
        let v = lib(compactness_diagnostic(&u, &k, &hull, DiagnosticBands::for_region(&u)))?;
        let p = lib(product_decomposition_check(&u, Some(&v)))?;
        // independent product oracle: U equals the product of its projections
        // iff the inside count is the product of the projection counts
        let p1 = lib(u.project(0))?.inside_count();
        let p2 = lib(u.project(1))?.inside_count();
        let is_product = u.inside_count() == p1 * p2;
        ensure(is_product == p.equal, format!("{}: product verdict {} vs oracle {is_product}", case.name, p.equal))?;
        ensure(
            !(u.recipe().flags.convex && v.status == ConvexityStatus::CompactLike && !is_product),
            format!("{}: convex, COMPACT-LIKE and not a product", case.name),
        )?;
        match case.name {
            "ball" => {
                // (0.75, 0) and (0, 0.75) lie in the ball, (0.75, 0.75) does not
                ensure(!is_product && v.status != ConvexityStatus::CompactLike, format!("ball: product={is_product} {}", v.status))?
            }
            "bidisk" => ensure(is_product && v.status == ConvexityStatus::CompactLike, format!("bidisk: product={is_product} {}", v.status))?,
            _ => {}
        }
        rows.push(format!("{} {}{}", case.name, v.status, if is_product { " product" } else { " non-product" }));
    }
    Ok(rows.join("; "))
}

// ---------------------------------------------------------------- criterion 7

fn criterion_7() -> Outcome {
    let sp = lib(choose_scale_power_from_moduli(0.5, 0.75, &[], 1))?;
    let c_oracle = 1.0 / (0.5f64 * 0.75).sqrt();
    let k_oracle = (1..).find(|&k| (c_oracle * 0.5).powi(k) <= 1.0 && (c_oracle * 0.75).powi(k) >= 2.0).unwrap();
    ensure((sp.c - 1.63299).abs() < 5e-6 && (sp.c - c_oracle).abs() < 1e-12, format!("c = {}", sp.c))?;
    ensure(sp.k == 4 && sp.k == k_oracle as u64, format!("k = {} (oracle {k_oracle})", sp.k))?;

    let u = lib(make_region(&DomainRecipe::polydisk(&[1.0, 1.0]), 1.0 / 32.0))?;
    let fam = lib(generate_family(&u, 6, FamilyOptions::default()))?;
    let (plan, series) = lib(build_witness(&u, &fam, 5))?;
    let v = lib(verify_witness(&u, &plan, &series))?;
    ensure(v.stored_match && v.plan_ok, "stored certificates or plan do not re-verify")?;
    for t in &v.terms {
        ensure(t.sup_ok && t.growth_ok, format!("term {} certificates fail", t.m))?;
        ensure(t.tail <= 2f64.powi(2 - t.m as i32), format!("tail {} > 2^-(m-2) at m={}", t.tail, t.m))?;
        ensure(t.value_at_p >= t.m as f64, format!("|f(p_{})| = {} < m", t.m, t.value_at_p))?;
    }
    // direct evaluation of the truncated series at each p_m
    for (m, p) in plan.p_seq.iter().enumerate() {
        let mut acc = [c(0.0, 0.0); 2];
        for t in &series.terms {
            let mut vals = [c(0.0, 0.0); 2];
            lib(t.g.eval_into(&p.0, &mut vals))?;
            for (a, v) in acc.iter_mut().zip(vals) {
                *a += (v * t.c).powu(t.k as u32);
            }
        }
        let modulus = acc[0].norm().max(acc[1].norm());
        ensure(modulus >= (m + 1) as f64, format!("direct |f(p_{})| = {modulus}", m + 1))?;
    }
    let (plan2, series2) = lib(build_witness(&u, &fam, 5))?;
    let same = plan.plan_csv() == plan2.plan_csv()
        && series.terms_csv() == series2.terms_csv()
        && series.terms.iter().zip(&series2.terms).all(|(a, b)| {
            a.c.to_bits() == b.c.to_bits() && a.log_sup.to_bits() == b.log_sup.to_bits() && a.log_value.to_bits() == b.log_value.to_bits()
        });
    ensure(same, "rerun differs")?;
    let ks: Vec<String> = series.terms.iter().map(|t| t.k.to_string()).collect();
    Ok(format!("c = {:.5}, k = {}; M=5 certified (k = {}), rerun bit-identical", sp.c, sp.k, ks.join(",")))
}

// ---------------------------------------------------------------- criterion 8

fn criterion_8() -> Outcome {
    let h = 1.0 / 32.0;
    let u = lib(make_region(&DomainRecipe::parse("polydisk dims=2 radii=1").map_err(|e| e.to_string())?, h))?;
    ensure(u.shape().n_blocks() == 1 && u.shape().dim(0) == 2, "not n=1, l=2")?;
    let params = CheckParams::default();
    for (f, holo) in lib(n1_corpus(2))? {
        let a = lib(holomorphy_check(&f, &u, &params))?.pass;
        let t = lib(triangular_check(&f, &u, &params))?.pass;
        let x = lib(cross_block_derivative_check(&f, &u, &params))?.pass;
        ensure(a == holo && t == holo && x == holo, format!("{}: holomorphy {a}, triangular {t}, cross {x}, truth {holo}", f.label))?;
    }
    // classical polynomial hull: every monomial z1^a z2^b with 1 <= a+b <= 6
    let k = lib(torus_sample(&u, &[0.5, 0.5], 64))?;
    let exps: Vec<(u32, u32)> = (1..=6u32).flat_map(|d| (0..=d).map(move |a| (a, d - a))).collect();
    let mono = |z: &[Complex64], (a, b): (u32, u32)| (z[0].powu(a) * z[1].powu(b)).norm();
    let maxk: Vec<f64> = exps.iter().map(|&e| k.iter().map(|p| mono(&p.0, e)).fold(0.0, f64::max)).collect();
    let g = u.grid();
    let classical: Vec<bool> = (0..g.total_cells())
        .map(|f| {
            u.is_inside_cell(f) && {
                let z = g.center_point(f).0;
                exps.iter().zip(&maxk).all(|(&e, &m)| mono(&z, e) <= (1.0 + 1e-9) * m + 1e-12)
            }
        })
        .collect();
    let fam = lib(generate_family(&u, 6, FamilyOptions::default()))?;
    let hull = lib(hull_approx(&u, &k, &fam, 1e-9))?.mask();
    let diff = hull.iter().zip(&classical).filter(|(a, b)| a != b).count();
    ensure(diff == 0, format!("one-block hull differs from the classical hull in {diff} cells"))?;
    let d = hausdorff_oracle(g, &hull, &bidisk_oracle(&u, 0.5));
    ensure(d <= 2.0 * h, format!("Hausdorff to bidisk oracle {d}"))?;
    Ok(format!("triangular == holomorphic on the corpus; hull equals the classical polynomial hull ({} cells)", hull.iter().filter(|b| **b).count()))
}

#[test]
fn acceptance() {
    let criteria: [(u32, &str, Duration, fn() -> Outcome); 8] = [
        (1, "block-holomorphy checker", Duration::from_secs(5), criterion_1),
        (2, "spiral monodromy", Duration::from_secs(30), criterion_2),
        (3, "hull oracle equivalence", Duration::from_secs(60), criterion_3),
        (4, "product law", Duration::from_secs(120), criterion_4),
        (5, "non-convexity detection", Duration::from_secs(120), criterion_5),
        (6, "convex decomposition consistency", Duration::from_secs(60), criterion_6),
        (7, "witness construction", Duration::from_secs(120), criterion_7),
        (8, "n=1 classical reduction", Duration::from_secs(60), criterion_8),
    ];
    let mut failed = Vec::new();
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= budget => (true, d),
            Ok(d) => (false, format!("{d}; over the {budget:?} budget")),
            Err(e) => (false, e),
        };
        println!("criterion {id} [{name}] {} ({:.1} s): {detail}", if ok { "PASS" } else { "FAIL" }, elapsed.as_secs_f64());
        if !ok {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
