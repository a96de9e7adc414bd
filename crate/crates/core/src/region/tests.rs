use num_complex::Complex64;

use super::*;
use crate::recipe::{make_region, DomainRecipe};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pt(v: &[Complex64]) -> PointZ {
    PointZ::new(v.to_vec())
}

fn bidisk(h: f64) -> Region {
    make_region(&DomainRecipe::polydisk(&[1.0, 1.0]), h).unwrap()
}

/// Brute-force sup-norm distance from a cell centre to every complement
/// cell box inside the bounding box.
pub(crate) fn brute_force_dist(region: &Region, flat: usize) -> f64 {
    let g = region.grid();
    let h = g.h();
    let p = g.center_point(flat);
    let mut best = f64::INFINITY;
    let mut idx = vec![0; g.axes()];
    for other in 0..g.total_cells() {
        if region.is_inside_cell(other) {
            continue;
        }
        g.unflat(other, &mut idx);
        let mut d = 0.0f64;
        for (k, z) in p.coords().iter().enumerate() {
            let gap = |v: f64, axis: usize| {
                let lo = g.lo(axis) + idx[axis] as f64 * h;
                let hi = lo + h;
                if v < lo {
                    lo - v
                } else if v > hi {
                    v - hi
                } else {
                    0.0
                }
            };
            let dx = gap(z.re, 2 * k);
            let dy = gap(z.im, 2 * k + 1);
            d = d.max((dx * dx + dy * dy).sqrt());
        }
        best = best.min(d);
    }
    best
}

#[test]
fn sup_norm_examples() {
    assert_eq!(sup_norm(&pt(&[c(1.0, 0.0), c(0.0, 0.0)]), &pt(&[c(0.0, 0.0), c(0.0, 0.0)])).unwrap(), 1.0);
    assert_eq!(sup_norm(&pt(&[c(3.0, 4.0), c(1.0, 0.0)]), &pt(&[c(0.0, 0.0), c(1.0, 0.0)])).unwrap(), 5.0);
    let a = pt(&[c(0.3, -0.2), c(0.1, 0.7)]);
    assert_eq!(sup_norm(&a, &a).unwrap(), 0.0);
    assert!(matches!(sup_norm(&a, &pt(&[c(0.0, 0.0)])), Err(Error::ShapeMismatch { .. })));
}

#[test]
fn block_shape_limits() {
    assert!(BlockShape::new(vec![1, 1, 1]).is_ok());
    assert!(matches!(BlockShape::new(vec![2, 2]), Err(Error::InvalidShape(_))));
    assert!(BlockShape::new(vec![]).is_err());
    assert!(BlockShape::new(vec![1, 0]).is_err());
    let s = BlockShape::new(vec![2, 1]).unwrap();
    assert_eq!(s.block_range(1), 2..3);
    assert_eq!(s.block_of(1), 0);
    assert_eq!(s.block_of(2), 1);
    assert_eq!(s.without(0).unwrap().dims(), &[1]);
}

#[test]
fn contains_examples() {
    let u = bidisk(1.0 / 8.0);
    assert!(u.contains(&pt(&[c(0.0, 0.0), c(0.0, 0.0)])));
    assert!(!u.contains(&pt(&[c(2.0, 0.0), c(0.0, 0.0)])));
    assert!(!u.contains(&pt(&[c(50.0, 0.0), c(0.0, 0.0)])));
    // lower-inclusive cells: a point on a cell face belongs to the upper cell
    let g = u.grid();
    assert_eq!(g.cell_of(0, 0.0), Some((-g.origin()[0]) as usize));
    assert_eq!(g.cell_of(0, -1e-12), Some((-g.origin()[0] - 1) as usize));
}

#[test]
fn polydisk_distances() {
    let h = 1.0 / 16.0;
    let u = bidisk(h);
    let d0 = u.dist_to_complement(&pt(&[c(0.0, 0.0), c(0.0, 0.0)])).unwrap();
    assert!((d0 - 1.0).abs() <= h, "{d0}");
    let d1 = u.dist_to_complement(&pt(&[c(0.5, 0.0), c(0.0, 0.0)])).unwrap();
    assert!((d1 - 0.5).abs() <= h, "{d1}");
    assert!(matches!(u.dist_to_complement(&pt(&[c(1.5, 0.0), c(0.0, 0.0)])), Err(Error::NotInRegion)));
}

#[test]
fn distance_matches_brute_force() {
    let h = 1.0 / 4.0;
    for recipe in [
        DomainRecipe::HartogsFigure { inner: 0.5 },
        DomainRecipe::EuclideanBall { dims: vec![1, 1], radius: 1.0 },
        DomainRecipe::AnnulusProduct { inner: vec![0.3, 0.4], outer: vec![1.0, 1.0] },
    ] {
        let u = make_region(&recipe, h).unwrap();
        for flat in u.inside_cells() {
            let fast = u.cell_dist(flat);
            let slow = brute_force_dist(&u, flat);
            assert!(fast > 0.0);
            assert!((fast - slow).abs() <= h, "{recipe}: cell {flat} fast {fast} slow {slow}");
        }
    }
}

#[test]
fn projection_of_product_is_factor() {
    let h = 1.0 / 8.0;
    let f1 = make_region(&DomainRecipe::polydisk(&[1.0]), h).unwrap();
    let f2 = make_region(&DomainRecipe::AnnulusProduct { inner: vec![0.3], outer: vec![0.9] }, h).unwrap();
    let prod = Region::product(&[&f1, &f2]).unwrap();
    assert_eq!(prod.project(0).unwrap().mask(), f1.mask());
    assert_eq!(prod.project(1).unwrap().mask(), f2.mask());
    assert!(matches!(prod.project(2), Err(Error::BlockOutOfRange { .. })));
    assert_eq!(prod.recipe().poles.len(), 1);
    assert_eq!(prod.recipe().poles[0].block, 1);
}

#[test]
fn spiral_projection_is_annulus() {
    let h = 1.0 / 16.0;
    let u = make_region(&DomainRecipe::spiral_default(), h).unwrap();
    let p = u.project(0).unwrap();
    for flat in 0..p.grid().total_cells() {
        let z = p.grid().center_point(flat).0[0];
        let r = z.norm();
        if r < 0.9 - h || r > 1.1 + h {
            assert!(!p.is_inside_cell(flat), "cell at radius {r} should be outside");
        }
        if (r - 1.0).abs() < 0.1 - 2.0 * h {
            assert!(p.is_inside_cell(flat), "cell at radius {r} should be inside");
        }
    }
}

#[test]
fn slices() {
    let h = 1.0 / 8.0;
    let f1 = make_region(&DomainRecipe::polydisk(&[1.0]), h).unwrap();
    let f2 = make_region(&DomainRecipe::polydisk(&[0.5]), h).unwrap();
    let prod = Region::product(&[&f1, &f2]).unwrap();
    let s = prod.slice(0, &[c(0.3, 0.2)]).unwrap();
    assert_eq!(s.mask(), f2.mask());
    // outside the projection: empty slice
    let s = prod.slice(0, &[c(1.05, 0.0)]).unwrap();
    assert!(s.is_empty());
    assert!(matches!(prod.slice(0, &[c(40.0, 0.0)]), Err(Error::OffGrid)));
}

#[test]
fn slice_nonempty_iff_in_projection() {
    let u = make_region(&DomainRecipe::EuclideanBall { dims: vec![1, 1], radius: 1.0 }, 1.0 / 8.0).unwrap();
    let p = u.project(1).unwrap();
    for b in 0..p.grid().total_cells() {
        assert_eq!(!u.slice_at_cell(1, b).unwrap().is_empty(), p.is_inside_cell(b));
    }
}

#[test]
fn sublevel_compact_examples() {
    let h = 1.0 / 16.0;
    let u = bidisk(h);
    let k = u.sublevel_compact(0.5, 1.0);
    assert!(!k.empty && k.robust);
    for p in k.iter() {
        let d = u.dist_to_complement(&p).unwrap();
        assert!(d >= 0.5);
        assert!(modulus(p.coords()) <= 1.0);
        assert!(modulus(p.coords()) <= 0.5 + h);
        assert!(k.margin <= d);
    }
    let empty = u.sublevel_compact(1.0, 1.0);
    assert!(empty.empty);
    let inner = u.sublevel_compact(0.6, 0.8);
    let outer: std::collections::HashSet<u32> = u.sublevel_compact(0.5, 1.0).cells().unwrap().iter().copied().collect();
    assert!(inner.cells().unwrap().iter().all(|c| outer.contains(c)));
    assert!(!u.sublevel_compact(0.1, 1.0).robust);
}

#[test]
fn dense_sequence_enumerates_once() {
    let u = bidisk(1.0 / 8.0);
    let seq = u.dense_sequence().unwrap();
    assert_eq!(seq.len(), u.inside_count());
    let mut cells = seq.cells().to_vec();
    cells.sort_unstable();
    cells.dedup();
    assert_eq!(cells.len(), u.inside_count());
    assert_eq!(seq.cells(), u.dense_sequence().unwrap().cells());
}

#[test]
fn dense_sequence_approaches_every_point() {
    let h = 1.0 / 8.0;
    let u = make_region(&DomainRecipe::HartogsFigure { inner: 0.5 }, h).unwrap();
    let seq = u.dense_sequence().unwrap();
    let target = pt(&[c(0.8, -0.3), c(0.6, 0.2)]);
    let mut best = f64::INFINITY;
    let mut checkpoints = Vec::new();
    for (m, p) in seq.iter().enumerate() {
        best = best.min(sup_norm(&p, &target).unwrap());
        if (m + 1).is_power_of_two() {
            checkpoints.push(best);
        }
    }
    assert!(checkpoints.windows(2).all(|w| w[1] <= w[0]));
    assert!(best <= h);
}

#[test]
fn empty_region_has_no_sequence() {
    let u = bidisk(1.0 / 8.0);
    let empty = u.slice(0, &[c(1.05, 0.0)]).unwrap();
    assert!(matches!(empty.dense_sequence(), Err(Error::EmptyRegion)));
}

#[test]
fn region_file_roundtrip_is_bit_exact() {
    let u = make_region(&DomainRecipe::spiral_default(), 1.0 / 8.0).unwrap();
    let text = u.to_text();
    let back = io::RegionFile::parse(&text).unwrap().into_region().unwrap();
    assert_eq!(back.mask(), u.mask());
    assert_eq!(back.grid(), u.grid());
    assert_eq!(back.recipe(), u.recipe());
    assert_eq!(back.to_text(), text);
}

#[test]
fn unbounded_mask_is_rejected() {
    let shape = BlockShape::new(vec![1]).unwrap();
    let grid = Grid::new(0.5, vec![-2, -2], vec![4, 4]);
    let mut mask = vec![false; 16];
    mask[0] = true;
    let err = Region::from_mask(shape, grid, mask, RecipeTag::new("raw", RecipeFlags::default()));
    assert!(matches!(err, Err(Error::Unbounded(_))));
}
