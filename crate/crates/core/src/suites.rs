//! Property suites run by `blockholo verify`. Each appends per-case rows to
//! the report and folds their outcome into its status.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::commands::{parse_k_spec, RunConfig};
use crate::error::Result;
use crate::funcspace::{
    cross_block_derivative_check, generate_family, holomorphy_check, triangular_check, BlackBox, BlockPolynomial,
    BuiltinSpec, CheckParams, CnFunction, Component, FamilyOptions, LeafFunction, MixedTerm,
};
use crate::hull::{
    axis_circles_at, compactness_diagnostic, hausdorff, hull_approx, hull_product_check,
    product_decomposition_check, torus_sample, ConvexityStatus, DiagnosticBands,
};
use crate::leafspace::{build_leaf_graph, descent_discrepancy, lift_branch_log, LeafLift};
use crate::recipe::{make_region, DomainRecipe};
use crate::region::{BlockShape, CompactSample, PointZ, Region};
use crate::report::{Report, Status};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Compact set chosen per factor of a product case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FactorK {
    /// Circle `|z| = r` (`r = 0` is the origin).
    Circle(f64),
    /// `{dist >= frac * max_depth}`.
    Sublevel(f64),
}

#[derive(Clone, Debug)]
pub struct ProductCase {
    pub name: String,
    pub factors: Vec<DomainRecipe>,
    pub ks: Vec<FactorK>,
    pub options: FamilyOptions,
}

impl ProductCase {
    pub fn factor_sample(region: &Region, k: FactorK, per_circle: usize) -> Result<CompactSample> {
        match k {
            FactorK::Circle(r) => torus_sample(region, &[r], per_circle),
            FactorK::Sublevel(frac) => {
                let s = region.sublevel_compact(frac * region.max_depth(), 4.0);
                if s.empty {
                    Err(crate::Error::EmptySample)
                } else {
                    Ok(s)
                }
            }
        }
    }
}

/// Five two-factor cases with parameters drawn from `seed`; two of them
/// contain an annulus factor with Laurent terms enabled.
pub fn product_law_corpus(seed: u64) -> Vec<ProductCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let disk = |rng: &mut ChaCha8Rng| DomainRecipe::polydisk(&[rng.gen_range(0.8..=1.0)]);
    let annulus = |rng: &mut ChaCha8Rng| DomainRecipe::AnnulusProduct { inner: vec![rng.gen_range(0.3..0.4)], outer: vec![1.0] };
    let plain = FamilyOptions::default();
    let laurent = FamilyOptions { poles: true, leaf_lifts: false };
    let d1 = disk(&mut rng);
    let d2 = disk(&mut rng);
    let (r1, r2) = (rng.gen_range(0.4..0.6), rng.gen_range(0.4..0.6));
    let d3 = disk(&mut rng);
    let a3 = annulus(&mut rng);
    let a4 = annulus(&mut rng);
    let a5 = annulus(&mut rng);
    let d6 = disk(&mut rng);
    let poly_seed = rng.gen_range(0..1000);
    let d7 = disk(&mut rng);
    let d8 = disk(&mut rng);
    vec![
        ProductCase {
            name: "disk x disk, circles".into(),
            factors: vec![d1, d2],
            ks: vec![FactorK::Circle(r1), FactorK::Circle(r2)],
            options: plain,
        },
        ProductCase {
            name: "disk x annulus, laurent".into(),
            factors: vec![d3, a3],
            ks: vec![FactorK::Circle(0.5), FactorK::Sublevel(0.5)],
            options: laurent,
        },
        ProductCase {
            name: "annulus x annulus, laurent".into(),
            factors: vec![a4, a5],
            ks: vec![FactorK::Sublevel(0.5), FactorK::Sublevel(0.6)],
            options: laurent,
        },
        ProductCase {
            name: "disk x polygon".into(),
            factors: vec![d6, DomainRecipe::ConvexPolytope { dims: vec![1], faces: 6, seed: poly_seed }],
            ks: vec![FactorK::Circle(0.45), FactorK::Sublevel(0.5)],
            options: plain,
        },
        ProductCase {
            name: "disk x disk, unequal circles".into(),
            factors: vec![d7, d8],
            ks: vec![FactorK::Circle(0.25), FactorK::Circle(0.6)],
            options: plain,
        },
    ]
}

/// `hull(K_1 x K_2)` against `hull(K_1) x hull(K_2)` on every case.
pub fn product_law(cfg: &RunConfig, r: &mut Report) -> Result<()> {
    let h = cfg.h.unwrap_or(1.0 / 16.0);
    let mut table = String::from("case,recipes,product_hull_cells,factor_product_cells,symmetric_difference,band,pass\n");
    for case in product_law_corpus(cfg.seed) {
        let regions = case.factors.iter().map(|f| make_region(f, h)).collect::<Result<Vec<_>>>()?;
        let ks = regions
            .iter()
            .zip(&case.ks)
            .map(|(u, k)| ProductCase::factor_sample(u, *k, cfg.per_circle))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&Region> = regions.iter().collect();
        let krefs: Vec<&CompactSample> = ks.iter().collect();
        let rep = hull_product_check(&refs, &krefs, cfg.degree, cfg.hull_tol(), case.options)?;
        let recipes: Vec<String> = case.factors.iter().map(|f| f.to_string()).collect();
        let _ = writeln!(
            table,
            "\"{}\",\"{}\",{},{},{},{},{}",
            case.name,
            recipes.join(" x "),
            rep.product_hull_cells,
            rep.factor_product_cells,
            rep.symmetric_difference,
            rep.band,
            rep.pass
        );
        r.fold_status(Status::from_bool(rep.pass));
    }
    r.entry("h", format!("{h:?}"));
    r.table("cases", table);
    Ok(())
}

/// A region of the convexity corpus with its probe set and, where known,
/// the expected (product, verdict) pair.
#[derive(Clone, Debug)]
pub struct ConvexCase {
    pub name: &'static str,
    pub recipe: DomainRecipe,
    /// K spec text; `None` uses [`probe_sample`].
    pub k: Option<&'static str>,
    pub expect: Option<(bool, ConvexityStatus)>,
}

pub fn convex_corpus(seed: u64) -> Vec<ConvexCase> {
    vec![
        ConvexCase {
            name: "bidisk",
            recipe: DomainRecipe::polydisk(&[1.0, 1.0]),
            k: Some("torus 0.5 0.5"),
            expect: Some((true, ConvexityStatus::CompactLike)),
        },
        ConvexCase {
            name: "ball",
            recipe: DomainRecipe::EuclideanBall { dims: vec![1, 1], radius: 1.0 },
            k: Some("axis_circles 0.75"),
            expect: Some((false, ConvexityStatus::Escaping)),
        },
        ConvexCase {
            name: "hartogs",
            recipe: DomainRecipe::HartogsFigure { inner: 0.5 },
            k: Some("torus 0.6 0.75"),
            expect: Some((false, ConvexityStatus::Escaping)),
        },
        ConvexCase {
            name: "polydisk 1 x 0.6",
            recipe: DomainRecipe::polydisk(&[1.0, 0.6]),
            k: Some("torus 0.5 0.3"),
            expect: Some((true, ConvexityStatus::CompactLike)),
        },
        ConvexCase {
            name: "annulus product",
            recipe: DomainRecipe::AnnulusProduct { inner: vec![0.3, 0.3], outer: vec![1.0, 1.0] },
            k: Some("torus 0.65 0.65"),
            expect: None,
        },
        ConvexCase {
            name: "polytope",
            recipe: DomainRecipe::ConvexPolytope { dims: vec![1, 1], faces: 8, seed },
            k: None,
            expect: None,
        },
    ]
}

/// Probe compact for regions with two one-dimensional blocks that are not
/// the product of their projections. A gap cell `(a, b)` (both projections
/// inside, the cell outside) with deep fibre points `(a, y)` and `(x, b)`
/// gives `K = C(a, r) x {y} ∪ {x} x C(b, r)`, whose block hull contains
/// `D(a, r) x D(b, r) ∩ U`; that bidisk reaches the complement around
/// `(a, b)`. Candidates go by decreasing fibre depth; the first whose bidisk
/// holds an inside cell within `2h` of the complement is used. `None` for
/// products and other shapes.
pub fn product_gap_probe(region: &Region, per_circle: usize) -> Result<Option<CompactSample>> {
    if region.shape().dims() != [1, 1] {
        return Ok(None);
    }
    let g = region.grid();
    let h = region.h();
    let bg = g.sub_grid(&region.block_axes(0));
    let cg = g.sub_grid(&region.block_axes(1));
    let mut deep1 = vec![(f64::NEG_INFINITY, usize::MAX); bg.total_cells()];
    let mut deep2 = vec![(f64::NEG_INFINITY, usize::MAX); cg.total_cells()];
    for flat in region.inside_cells() {
        let (a, b) = region.split_cell(flat, &bg, &cg, 0);
        let d = region.cell_dist(flat);
        if d > deep1[a].0 {
            deep1[a] = (d, flat);
        }
        if d > deep2[b].0 {
            deep2[b] = (d, flat);
        }
    }
    let mut gaps: Vec<(f64, usize, usize)> = Vec::new();
    for (a, &(d1, f1)) in deep1.iter().enumerate() {
        for (b, &(d2, f2)) in deep2.iter().enumerate() {
            if f1 == usize::MAX || f2 == usize::MAX || region.is_inside_cell(region.join_cell(a, b, &bg, &cg, 0)) {
                continue;
            }
            gaps.push((d1.min(d2), a, b));
        }
    }
    gaps.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    for &(depth, a, b) in gaps.iter().take(32) {
        // point samples have margin `dist - h`; keep it above the 2h escape band
        let r = depth - 3.5 * h;
        if r < h {
            break;
        }
        let (pa, pb) = (g.center_point(deep1[a].1).0, g.center_point(deep2[b].1).0);
        let (ca, cb) = (pa[0], pb[1]);
        let reaches = region.inside_cells().any(|flat| {
            let p = g.center_point(flat).0;
            region.cell_dist(flat) <= 2.0 * h && (p[0] - ca).norm() <= r && (p[1] - cb).norm() <= r
        });
        if !reaches {
            continue;
        }
        let mut points = Vec::with_capacity(2 * per_circle);
        for t in 0..per_circle {
            let e = Complex64::from_polar(r, std::f64::consts::TAU * t as f64 / per_circle as f64);
            points.push(PointZ(vec![pa[0] + e, pa[1]]));
            points.push(PointZ(vec![pb[0], pb[1] + e]));
        }
        return Ok(Some(CompactSample::from_points(region, points)?));
    }
    Ok(None)
}

/// [`product_gap_probe`] when it applies, otherwise the largest centred
/// axis circles with margin above `3h`.
pub fn probe_sample(region: &Region, per_circle: usize) -> Result<CompactSample> {
    if let Some(k) = product_gap_probe(region, per_circle)? {
        return Ok(k);
    }
    let origin = vec![Complex64::new(0.0, 0.0); region.shape().total_dim()];
    let mut best = None;
    let mut r = region.h();
    while let Ok(k) = axis_circles_at(region, &origin, r, per_circle) {
        if k.margin <= 3.0 * region.h() {
            break;
        }
        best = Some(k);
        r += region.h();
    }
    best.ok_or(crate::Error::EmptySample)
}

/// Diagnostic and product verdict per corpus region; fails on a
/// convex-flagged, COMPACT-LIKE, non-product case or a missed expectation.
pub fn convex_decomposition(cfg: &RunConfig, r: &mut Report) -> Result<()> {
    let h = cfg.h.unwrap_or(1.0 / 16.0);
    let mut table =
        String::from("case,recipe,convex_flag,k_samples,k_margin,min_boundary_dist,verdict,product,contradiction,expected,pass\n");
    for case in convex_corpus(cfg.seed) {
        let u = make_region(&case.recipe, h)?;
        let k = match case.k {
            Some(spec) => parse_k_spec(&u, spec, cfg.per_circle)?,
            None => probe_sample(&u, cfg.per_circle)?,
        };
        let family = generate_family(&u, cfg.degree, FamilyOptions::default())?;
        let hull = hull_approx(&u, &k, &family, cfg.hull_tol())?;
        let v = compactness_diagnostic(&u, &k, &hull, DiagnosticBands::for_region(&u))?;
        let p = product_decomposition_check(&u, Some(&v))?;
        let expected_ok = case.expect.is_none_or(|(prod, st)| prod == p.equal && st == v.status);
        let ok = p.contradiction.is_none() && expected_ok;
        let _ = writeln!(
            table,
            "\"{}\",\"{}\",{},{},{:?},{:?},{},{},{},{},{}",
            case.name,
            u.recipe().text,
            u.recipe().flags.convex,
            k.len(),
            k.margin,
            v.min_boundary_dist,
            v.status,
            p.equal,
            p.contradiction.is_some(),
            case.expect.map_or("-".to_string(), |(prod, st)| format!("product={prod} {st}")),
            ok
        );
        r.fold_status(Status::from_bool(ok));
    }
    r.entry("h", format!("{h:?}"));
    r.table("cases", table);
    Ok(())
}

/// Functions on a single block of dimension `dim` with their plain
/// holomorphy: polynomials, a Laurent term, and non-holomorphic black boxes.
pub fn n1_corpus(dim: usize) -> Result<Vec<(CnFunction, bool)>> {
    let shape = BlockShape::new(vec![dim])?;
    let one = c(1.0, 0.0);
    let e = |k: usize, p: u32| {
        let mut v = vec![0; dim];
        v[k] = p;
        v
    };
    let mut out = Vec::new();
    let square = BlockPolynomial::zero(&shape, 0)?.with_monomial(e(0, 2), one)?;
    out.push((CnFunction::new(shape.clone(), vec![Component::Poly(square)], "z1^2")?, true));
    let laurent = BlockPolynomial::zero(&shape, 0)?.with_laurent(0, c(2.0, 0.0), 1, one)?;
    out.push((CnFunction::new(shape.clone(), vec![Component::Poly(laurent)], "(z1-2)^-1")?, true));
    let conj = BlackBox::from_spec(BuiltinSpec::Mixed(vec![MixedTerm { coeff: one, z: vec![0; dim], zbar: e(0, 1) }]));
    out.push((CnFunction::new(shape.clone(), vec![Component::BlackBox(conj)], "conj(z1)")?, false));
    let modulus = BlackBox::from_spec(BuiltinSpec::Modulus(0));
    out.push((CnFunction::new(shape.clone(), vec![Component::BlackBox(modulus)], "|z1|")?, false));
    if dim >= 2 {
        let mut both = vec![1; 2];
        both.resize(dim, 0);
        let prod = BlockPolynomial::zero(&shape, 0)?.with_monomial(both, one)?.with_monomial(e(1, 3), c(3.0, 0.0))?;
        out.push((CnFunction::new(shape.clone(), vec![Component::Poly(prod)], "z1*z2+3z2^3")?, true));
        let mixed = BlackBox::from_spec(BuiltinSpec::Mixed(vec![MixedTerm { coeff: one, z: e(0, 1), zbar: e(1, 1) }]));
        out.push((CnFunction::new(shape.clone(), vec![Component::BlackBox(mixed)], "z1*conj(z2)")?, false));
    }
    Ok(out)
}

/// With one block every toolkit check reduces to plain holomorphy, and the
/// hull of the torus under the one-block family is the classical polynomial
/// hull, compared here with the two-block hull and the bidisk oracle.
pub fn n1_classical(cfg: &RunConfig, r: &mut Report) -> Result<()> {
    let h = cfg.h.unwrap_or(1.0 / 16.0);
    let params = CheckParams { tol: cfg.tol.unwrap_or(crate::funcspace::DEFAULT_TOL), ..CheckParams::default() };
    let mut table = String::from("l,function,holomorphic,holomorphy,cross,triangular,agree\n");
    for (dim, recipe) in [(1, "polydisk radii=1"), (2, "polydisk dims=2 radii=1")] {
        let u = make_region(&DomainRecipe::parse(recipe)?, h)?;
        for (f, holo) in n1_corpus(dim)? {
            let a = holomorphy_check(&f, &u, &params)?.pass;
            let b = cross_block_derivative_check(&f, &u, &params)?.pass;
            let t = triangular_check(&f, &u, &params)?.pass;
            let agree = a == holo && b == holo && t == holo;
            let _ = writeln!(table, "{dim},\"{}\",{holo},{a},{b},{t},{agree}", f.label);
            r.fold_status(Status::from_bool(agree));
        }
    }
    r.table("checks", table);
    let one = make_region(&DomainRecipe::parse("polydisk dims=2 radii=1")?, h)?;
    let two = make_region(&DomainRecipe::polydisk(&[1.0, 1.0]), h)?;
    let k1 = torus_sample(&one, &[0.5, 0.5], cfg.per_circle)?;
    let k2 = torus_sample(&two, &[0.5, 0.5], cfg.per_circle)?;
    let h1 = hull_approx(&one, &k1, &generate_family(&one, cfg.degree, FamilyOptions::default())?, cfg.hull_tol())?;
    let h2 = hull_approx(&two, &k2, &generate_family(&two, cfg.degree, FamilyOptions::default())?, cfg.hull_tol())?;
    let oracle = crate::hull::coordinate_box_hull(&one, &k1);
    let to_oracle = hausdorff(one.grid(), &h1.mask(), &oracle);
    let to_blocks = hausdorff(one.grid(), &h1.mask(), &h2.mask());
    r.entry("n1_hull_cells", h1.len())
        .entry("n2_hull_cells", h2.len())
        .entry("hausdorff_to_oracle", format!("{to_oracle:?}"))
        .entry("hausdorff_to_block_hull", format!("{to_blocks:?}"));
    r.fold_status(Status::from_bool(to_oracle <= 2.0 * h && to_blocks <= 2.0 * h));
    Ok(())
}

/// Leaf graph and lifted logarithm of the spiral: acyclic graph, one node per
/// turn over `a_1 = 1`, consecutive branches `2 pi` apart, and a lift that
/// does not descend to the projection.
pub fn spiral_leaf(cfg: &RunConfig, r: &mut Report) -> Result<()> {
    let h = cfg.h.unwrap_or(1.0 / 32.0);
    let u = make_region(&DomainRecipe::spiral_default(), h)?;
    let g = build_leaf_graph(&u, 0)?;
    let lift = lift_branch_log(&g, c(0.0, 0.0))?;
    let over = g.nodes_at(&[c(1.0, 0.0)])?;
    let mut ims: Vec<f64> = over.clone().map(|n| lift.values[n].im).collect();
    ims.sort_by(f64::total_cmp);
    let steps: Vec<f64> = ims.windows(2).map(|w| w[1] - w[0]).collect();
    let steps_ok = !steps.is_empty() && steps.iter().all(|s| (s - 2.0 * PI).abs() < 0.05);
    let disc = descent_discrepancy(&g, &lift);
    let turns = disc / (2.0 * PI);
    let not_single_valued = turns >= 1.0 - 1e-9 && (turns - turns.round()).abs() < 1e-6;
    let leaf = LeafFunction {
        poly: BlockPolynomial::zero(u.shape(), 0)?,
        log_powers: vec![(1, c(1.0, 0.0))],
        lift: LeafLift::anchored(&u, 0, &[c(1.0, 0.0), c(0.0, 0.0)], c(0.0, 0.0))?,
    };
    let f = CnFunction::single(u.shape(), Component::Leaf(leaf), "L1")?;
    let params = CheckParams { tol: cfg.tol.unwrap_or(crate::funcspace::DEFAULT_TOL), ..CheckParams::default() };
    let check = cross_block_derivative_check(&f, &u, &params)?;
    r.entry("h", format!("{h:?}"))
        .entry("nodes", g.nodes().len())
        .entry("edges", g.edges().len())
        .entry("components", g.component_count())
        .entry("cycle_rank", g.cycle_rank().map_or("-".into(), |x| x.to_string()))
        .entry("nodes_over_a1", over.len())
        .entry("lift_residual", format!("{:?}", lift.residual))
        .entry("turn_steps", steps.iter().map(|s| format!("{s:?}")).collect::<Vec<_>>().join(" "))
        .entry("descent_discrepancy", format!("{disc:?}"))
        .entry("descent_discrepancy_turns", format!("{turns:?}"))
        .entry("log_cross_check", check.pass)
        .entry("log_max_scaled", format!("{:?}", check.max_scaled));
    let ok = over.len() == 3
        && g.component_count() == 1
        && g.cycle_rank() == Some(0)
        && lift.residual < 1e-9
        && steps_ok
        && not_single_valued
        && check.pass;
    r.fold_status(Status::from_bool(ok));
    Ok(())
}
