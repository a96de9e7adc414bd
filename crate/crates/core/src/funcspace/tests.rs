use std::f64::consts::PI;

use num_complex::Complex64;

use super::*;
use crate::leafspace::LeafLift;
use crate::recipe::{make_region, DomainRecipe};
use crate::region::{Region, PointZ};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn one() -> Complex64 {
    c(1.0, 0.0)
}

fn shape2() -> BlockShape {
    BlockShape::new(vec![1, 1]).unwrap()
}

fn mono(shape: &BlockShape, j: usize, e: u32) -> Component {
    Component::Poly(BlockPolynomial::zero(shape, j).unwrap().with_monomial(vec![e], one()).unwrap())
}

fn tuple(shape: &BlockShape, comps: Vec<Component>) -> CnFunction {
    CnFunction::new(shape.clone(), comps, "f").unwrap()
}

fn mixed(coeff: Complex64, z: [u32; 2], zbar: [u32; 2]) -> MixedTerm {
    MixedTerm { coeff, z: z.to_vec(), zbar: zbar.to_vec() }
}

fn bidisk(h: f64) -> Region {
    make_region(&DomainRecipe::polydisk(&[1.0, 1.0]), h).unwrap()
}

#[test]
fn evaluate_examples() {
    let s = shape2();
    let f = tuple(&s, vec![mono(&s, 0, 2), mono(&s, 1, 1)]);
    let p = PointZ::new(vec![c(2.0, 0.0), c(0.0, 3.0)]);
    assert_eq!(f.eval(&p).unwrap(), vec![c(4.0, 0.0), c(0.0, 3.0)]);
    assert_eq!(f.modulus_at(p.coords()).unwrap(), 4.0);
    let z = CnFunction::zero(s);
    assert_eq!(z.eval(&p).unwrap(), vec![c(0.0, 0.0); 2]);
    assert_eq!(z.modulus_at(p.coords()).unwrap(), 0.0);
}

#[test]
fn block_local_components_must_sit_at_their_block() {
    let s = shape2();
    let err = CnFunction::new(s.clone(), vec![mono(&s, 1, 1), Component::Zero], "bad");
    assert!(matches!(err, Err(Error::InvalidShape(_))));
}

#[test]
fn wirtinger_of_cross_product_matches_analytic() {
    let s = shape2();
    let f = tuple(&s, vec![Component::BlackBox(BlackBox::polynomial(&[(one(), vec![1, 1])], 2)), Component::Zero]);
    let z = [c(0.5, 0.0), c(0.5, 0.0)];
    let step = 1e-3;
    let w = wirtinger_at(&f, &z, step).unwrap();
    // d(z1 z2)/dz2 = z1, d/dz1 = z2, no antiholomorphic part
    assert!((w.dz(0, 1) - z[0]).norm() < step * step * 10.0);
    assert!((w.dz(0, 0) - z[1]).norm() < step * step * 10.0);
    assert!(w.dzbar(0, 0).norm() < 1e-9 && w.dzbar(0, 1).norm() < 1e-9);
    let report = cross_block_derivative_check(&f, &bidisk(1.0 / 8.0), &CheckParams::default()).unwrap();
    assert!(!report.pass);
    assert!(report.max_cross > 0.4);
}

#[test]
fn block_diagonal_tuple_passes() {
    let s = shape2();
    let f = tuple(&s, vec![mono(&s, 0, 2), mono(&s, 1, 3)]);
    let u = bidisk(1.0 / 8.0);
    let r = cross_block_derivative_check(&f, &u, &CheckParams::default()).unwrap();
    assert!(r.pass, "{r:?}");
    assert!(r.max_cross < 1e-12);
    assert!(r.samples_used > 0);
    assert!(holomorphy_check(&f, &u, &CheckParams::default()).unwrap().pass);
}

#[test]
fn conjugate_fails_holomorphy_with_unit_residual() {
    let s = shape2();
    let f = tuple(&s, vec![Component::BlackBox(BlackBox::from_spec(BuiltinSpec::Mixed(vec![mixed(one(), [0, 0], [1, 0])]))), Component::Zero]);
    let r = holomorphy_check(&f, &bidisk(1.0 / 8.0), &CheckParams::default()).unwrap();
    assert!(!r.pass);
    assert!((r.max_anti - 1.0).abs() < 1e-9);
}

#[test]
fn modulus_fails_holomorphy() {
    let s = shape2();
    let f = tuple(&s, vec![Component::BlackBox(BlackBox::from_spec(BuiltinSpec::Modulus(0))), Component::Zero]);
    // d|z|/dzbar = z / (2|z|), modulus 1/2 away from 0
    let z = [c(0.3, 0.4), c(0.0, 0.0)];
    let w = wirtinger_at(&f, &z, 1e-4).unwrap();
    assert!((w.dzbar(0, 0) - z[0] / (2.0 * z[0].norm())).norm() < 1e-6);
    let r = holomorphy_check(&f, &bidisk(1.0 / 8.0), &CheckParams::default()).unwrap();
    assert!(!r.pass);
    assert!((r.max_anti - 0.5).abs() < 1e-3);
}

#[test]
fn triangular_versus_cross_block() {
    let s = shape2();
    let sum = BlackBox::polynomial(&[(one(), vec![1, 0]), (one(), vec![0, 1])], 2);
    let f = tuple(&s, vec![mono(&s, 0, 1), Component::BlackBox(sum)]);
    let u = bidisk(1.0 / 8.0);
    let p = CheckParams::default();
    assert!(triangular_check(&f, &u, &p).unwrap().pass);
    assert!(!cross_block_derivative_check(&f, &u, &p).unwrap().pass);
    // upper-triangular dependence is the failing direction
    let g = tuple(&s, vec![Component::BlackBox(BlackBox::polynomial(&[(one(), vec![0, 1])], 2)), Component::Zero]);
    assert!(!triangular_check(&g, &u, &p).unwrap().pass);
}

#[test]
fn single_block_checks_coincide() {
    let s = BlockShape::new(vec![2]).unwrap();
    let u = make_region(&DomainRecipe::Polydisk { dims: vec![2], radii: vec![1.0] }, 1.0 / 8.0).unwrap();
    let p = CheckParams::default();
    let holo = Component::BlackBox(BlackBox::polynomial(&[(one(), vec![1, 1]), (c(0.0, 2.0), vec![3, 0])], 2));
    let anti = Component::BlackBox(BlackBox::from_spec(BuiltinSpec::Mixed(vec![mixed(one(), [1, 0], [0, 1])])));
    for comp in [holo, anti] {
        let f = tuple(&s, vec![comp]);
        let a = holomorphy_check(&f, &u, &p).unwrap();
        let b = triangular_check(&f, &u, &p).unwrap();
        let x = cross_block_derivative_check(&f, &u, &p).unwrap();
        assert_eq!(a.pass, b.pass);
        assert_eq!(a.pass, x.pass);
        assert_eq!(a.max_scaled, b.max_scaled);
        assert_eq!(b.max_cross, 0.0);
    }
}

#[test]
fn central_differences_converge_at_second_order() {
    let s = shape2();
    let f = tuple(&s, vec![mono(&s, 0, 5), Component::Zero]);
    let z = [c(0.4, -0.3), c(0.1, 0.1)];
    let exact = 5.0 * z[0].powu(4);
    let w = |step: f64| wirtinger_at(&f, &z, step).unwrap();
    // the antiholomorphic residual of a holomorphic map is pure O(step^2)
    // truncation error; the holomorphic part cancels to O(step^4)
    let (a1, a2) = (w(1e-2).dzbar(0, 0).norm(), w(5e-3).dzbar(0, 0).norm());
    assert!((a1 / a2 - 4.0).abs() < 0.05, "ratio {}", a1 / a2);
    let (e1, e2) = ((w(1e-2).dz(0, 0) - exact).norm(), (w(5e-3).dz(0, 0) - exact).norm());
    assert!(e1 / e2 > 3.9, "ratio {}", e1 / e2);
}

#[test]
fn boundary_samples_are_skipped() {
    let s = shape2();
    let f = tuple(&s, vec![mono(&s, 0, 1), Component::Zero]);
    let u = bidisk(1.0 / 8.0);
    let p = CheckParams { samples: u.inside_count(), step: Some(0.2), tol: 1e-3 };
    let r = cross_block_derivative_check(&f, &u, &p).unwrap();
    assert!(r.skipped > 0);
    assert_eq!(r.samples_used + r.skipped, u.inside_count());
}

#[test]
fn family_contains_coordinates_and_passes() {
    let u = bidisk(1.0 / 8.0);
    let fam = generate_family(&u, 1, FamilyOptions::default()).unwrap();
    let labels: Vec<&str> = fam.members.iter().map(|m| m.label.as_str()).collect();
    assert_eq!(labels, ["z1", "z2"]);
    let fam = generate_family(&u, 3, FamilyOptions::default()).unwrap();
    assert_eq!(fam.len(), 6);
    for r in fam.verify(&u, &CheckParams::default()).unwrap() {
        assert!(r.pass);
    }
}

#[test]
fn off_centre_family_keeps_plain_coordinates() {
    let u = make_region(&DomainRecipe::ConvexPolytope { dims: vec![1, 1], faces: 6, seed: 7 }, 1.0 / 8.0).unwrap();
    let fam = generate_family(&u, 2, FamilyOptions::default()).unwrap();
    for (j, c) in fam.provenance.centers.iter().enumerate() {
        let unit = u.h() / 2.0;
        assert_eq!((c[0].re / unit).fract(), 0.0);
        assert_eq!((c[0].im / unit).fract(), 0.0);
        if c[0] != Complex64::new(0.0, 0.0) {
            assert!(fam.members.iter().any(|m| m.label == format!("z{}", j + 1)));
        }
    }
}

#[test]
fn annulus_family_has_laurent_terms() {
    let u = make_region(&DomainRecipe::AnnulusProduct { inner: vec![0.3, 0.3], outer: vec![1.0, 1.0] }, 1.0 / 8.0).unwrap();
    let fam = generate_family(&u, 2, FamilyOptions { poles: true, leaf_lifts: false }).unwrap();
    let laurent: Vec<&CnFunction> =
        fam.members.iter().filter(|m| matches!(&m.components[m.components.iter().position(|c| !c.is_zero()).unwrap()], Component::Poly(p) if !p.laurent.is_empty())).collect();
    assert_eq!(laurent.len(), 4);
    let p = [c(0.5, 0.0), c(0.0, -0.5)];
    assert!((laurent[0].modulus_at(&p).unwrap() - 2.0).abs() < 1e-12);
    // near the inner circle z^-2 needs step^2 |f'''| / 6 below tol |f|
    let params = CheckParams { step: Some(1e-3), ..CheckParams::default() };
    for r in fam.verify(&u, &params).unwrap() {
        assert!(r.pass);
    }
}

#[test]
fn pole_inside_projection_is_rejected() {
    let u = bidisk(1.0 / 8.0);
    let mut tag = u.recipe().clone();
    tag.poles = vec![crate::region::PoleDecl { block: 0, coord: 0, location: c(0.0, 0.0) }];
    let u = u.with_recipe(tag);
    assert!(matches!(generate_family(&u, 2, FamilyOptions { poles: true, leaf_lifts: false }), Err(Error::PoleInside(_))));
}

#[test]
fn closure_under_products() {
    let u = make_region(&DomainRecipe::HartogsFigure { inner: 0.5 }, 1.0 / 8.0).unwrap();
    let fam = generate_family(&u, 2, FamilyOptions::default()).unwrap();
    let p = CheckParams::default();
    for a in &fam.members {
        for b in &fam.members {
            let prod = a.product(b).unwrap();
            assert!(cross_block_derivative_check(&prod, &u, &p).unwrap().pass, "{}", prod.label);
        }
    }
    // a sum across blocks is not a member of the algebra, but each product is
    let s = u.shape().clone();
    let mixed_tuple = tuple(&s, vec![mono(&s, 0, 1), mono(&s, 1, 2)]);
    let square = mixed_tuple.product(&mixed_tuple).unwrap();
    let v = square.eval(&PointZ::new(vec![c(0.2, 0.0), c(0.0, 0.3)])).unwrap();
    assert!((v[0] - c(0.04, 0.0)).norm() < 1e-15);
    assert!((v[1] - c(0.0081, 0.0)).norm() < 1e-15);
}

#[test]
fn spiral_log_is_block_holomorphic_and_branch_tracked() {
    let u = make_region(&DomainRecipe::spiral_default(), 1.0 / 16.0).unwrap();
    let lift = LeafLift::anchored(&u, 0, &[one(), c(0.0, 0.0)], c(0.0, 0.0)).unwrap();
    let log = Component::Leaf(LeafFunction { poly: BlockPolynomial::zero(u.shape(), 0).unwrap(), log_powers: vec![(1, one())], lift });
    let f = tuple(u.shape(), vec![log, Component::Zero]);
    let v = f.eval(&PointZ::new(vec![one(), c(2.0 * PI, 0.0)])).unwrap();
    assert!((v[0] - c(0.0, 2.0 * PI)).norm() < 1e-12);
    assert_eq!(v[1], c(0.0, 0.0));
    let r = cross_block_derivative_check(&f, &u, &CheckParams::default()).unwrap();
    assert!(r.pass, "{r:?}");
    let fam = generate_family(&u, 2, FamilyOptions { poles: false, leaf_lifts: true }).unwrap();
    assert_eq!(fam.provenance.leaf_lifts, vec![0]);
    assert!(fam.members.iter().any(|m| m.label == "L1^2"));
}

#[test]
fn extension_to_product_restricts_to_the_original() {
    let ball = make_region(&DomainRecipe::EuclideanBall { dims: vec![1, 1], radius: 1.0 }, 1.0 / 8.0).unwrap();
    let s = ball.shape().clone();
    let f = tuple(&s, vec![mono(&s, 0, 2), mono(&s, 1, 1)]);
    let (g, prod) = extend_to_product(&f, &ball).unwrap();
    assert_eq!(prod.inside_count(), ball.project(0).unwrap().inside_count() * ball.project(1).unwrap().inside_count());
    let z = [c(0.8, 0.1), c(0.7, -0.2)];
    assert!(!ball.contains_coords(&z) && prod.contains_coords(&z));
    assert_eq!(g.eval(&PointZ::new(z.to_vec())).unwrap(), vec![z[0] * z[0], z[1]]);

    let constant = tuple(&s, vec![Component::Poly(BlockPolynomial::zero(&s, 0).unwrap().with_monomial(vec![0], c(3.0, 1.0)).unwrap()), Component::Zero]);
    let (gc, _) = extend_to_product(&constant, &ball).unwrap();
    assert_eq!(gc.eval(&PointZ::new(z.to_vec())).unwrap()[0], c(3.0, 1.0));

    let hartogs = make_region(&DomainRecipe::HartogsFigure { inner: 0.5 }, 1.0 / 8.0).unwrap();
    assert!(matches!(extend_to_product(&f, &hartogs), Err(Error::RecipeFlag("convex"))));
}

#[test]
fn extension_is_exact_on_random_polytopes() {
    for seed in 0..3 {
        let u = make_region(&DomainRecipe::ConvexPolytope { dims: vec![1, 1], faces: 5, seed }, 1.0 / 8.0).unwrap();
        let s = u.shape().clone();
        let p0 = BlockPolynomial::new(&s, 0, vec![c(0.25, 0.0)]).unwrap().with_monomial(vec![3], c(0.5, -1.25)).unwrap().with_monomial(vec![1], c(2.0, 0.0)).unwrap();
        let p1 = BlockPolynomial::zero(&s, 1).unwrap().with_monomial(vec![2], c(0.0, 1.5)).unwrap();
        let f = tuple(&s, vec![Component::Poly(p0), Component::Poly(p1)]);
        let (g, _) = extend_to_product(&f, &u).unwrap();
        let mut worst = 0.0f64;
        for flat in u.inside_cells() {
            let p = u.cell_center(flat);
            let (a, b) = (f.eval(&p).unwrap(), g.eval(&p).unwrap());
            worst = worst.max(a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max));
        }
        assert!(worst <= 1e-12, "seed {seed}: {worst}");
    }
}

#[test]
fn family_text_roundtrip() {
    let u = make_region(&DomainRecipe::AnnulusProduct { inner: vec![0.3, 0.3], outer: vec![1.0, 1.0] }, 1.0 / 8.0).unwrap();
    let mut fam = generate_family(&u, 3, FamilyOptions { poles: true, leaf_lifts: false }).unwrap();
    let s = u.shape().clone();
    fam.members.push(tuple(&s, vec![Component::BlackBox(BlackBox::from_spec(BuiltinSpec::Mixed(vec![mixed(c(0.1, 0.3), [1, 1], [0, 2])]))), Component::BlackBox(BlackBox::from_spec(BuiltinSpec::Modulus(1)))]));
    let text = fam.to_text().unwrap();
    let back = FunctionFamily::parse(&text, None).unwrap();
    assert_eq!(back.to_text().unwrap(), text);
    assert_eq!(back.provenance, fam.provenance);
    let z = [c(0.45, -0.35), c(-0.6, 0.2)];
    for (a, b) in fam.members.iter().zip(&back.members) {
        assert_eq!(a.modulus_at(&z).unwrap().to_bits(), b.modulus_at(&z).unwrap().to_bits());
    }
}

#[test]
fn leaf_family_roundtrip_needs_region() {
    let u = make_region(&DomainRecipe::spiral_default(), 1.0 / 16.0).unwrap();
    let fam = generate_family(&u, 1, FamilyOptions { poles: false, leaf_lifts: true }).unwrap();
    let text = fam.to_text().unwrap();
    assert!(matches!(FunctionFamily::parse(&text, None), Err(Error::Parse { .. })));
    let back = FunctionFamily::parse(&text, Some(&u)).unwrap();
    let z = [Complex64::from_polar(1.0, 0.3), c(0.3 + 2.0 * PI, 0.0)];
    for (a, b) in fam.members.iter().zip(&back.members) {
        assert_eq!(a.eval(&PointZ::new(z.to_vec())).unwrap(), b.eval(&PointZ::new(z.to_vec())).unwrap());
    }
}

#[test]
fn malformed_family_files_are_rejected() {
    for text in [
        "nope",
        "blockholo-family v1\nshape 1 1\nmember x\ncomp 0 poly 0 0\nmono 1 2 1 0\ncomp 1 zero\nend\n",
        "blockholo-family v1\nshape 1 1\nmember x\ncomp 0 zero\nend\n",
        "blockholo-family v1\nshape 1 1\nmember x\ncomp 0 zero\ncomp 1 zero\n",
        "blockholo-family v1\nshape 1 1\nmember x\ncomp 1 poly 0 0\nmono 1 1 0\ncomp 0 zero\nbogus\nend\n",
    ] {
        assert!(FunctionFamily::parse(text, None).is_err(), "{text}");
    }
}
