//! Approximate block-holomorphically convex hulls.
//!
//! The hull of `K` relative to a finite family `F` is the set of grid points
//! `p` with `|f(p)| <= (1 + tol) max_K |f| + floor` for every `f` in `F`.
//! A finite family gives a superset of the true hull and a finite sample of
//! `K` a slightly smaller maximum; both directions are reported, not hidden.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::funcspace::{generate_family, CnFunction, FamilyOptions, FunctionFamily};
use crate::region::{CompactSample, Grid, PointZ, Region, SampleSet};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const ABS_FLOOR: f64 = 1e-12;
/// Samples per circle for the generated compact sets.
pub const DEFAULT_PER_CIRCLE: usize = 64;

/// `|f(z)| <= (1 + tol) max_K |f| + ABS_FLOOR` for every member.
#[derive(Clone, Debug)]
pub struct HullFilter {
    pub max_k: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub tol: f64,
}

/// Outcome of testing one point against a [`HullFilter`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointTest {
    pub inside: bool,
    /// Member with the largest ratio `|f(p)| / threshold`; for excluded
    /// points the first member found above its threshold.
    pub member: u32,
    pub ratio: f64,
}

impl HullFilter {
    pub fn new(family: &FunctionFamily, k: &CompactSample, tol: f64) -> Result<Self> {
        if family.is_empty() {
            return Err(Error::EmptyFamily);
        }
        if k.is_empty() {
            return Err(Error::EmptySample);
        }
        let max_k = sample_max_all(family, k)?;
        let thresholds = max_k.iter().map(|m| (1.0 + tol) * m + ABS_FLOOR).collect();
        Ok(Self { max_k, thresholds, tol })
    }

    /// Evaluates members in family order, stopping at the first one above
    /// its threshold.
    pub fn test(&self, family: &FunctionFamily, z: &[Complex64]) -> Result<PointTest> {
        let mut best = PointTest { inside: true, member: 0, ratio: f64::NEG_INFINITY };
        for (i, f) in family.members.iter().enumerate() {
            let v = f.modulus_at(z)?;
            let ratio = v / self.thresholds[i];
            if v > self.thresholds[i] {
                return Ok(PointTest { inside: false, member: i as u32, ratio });
            }
            if ratio > best.ratio {
                best.ratio = ratio;
                best.member = i as u32;
            }
        }
        Ok(best)
    }
}

/// `max_{w in K} |f(w)|`, failing if any sample cannot be evaluated.
pub fn sample_max(f: &CnFunction, k: &CompactSample) -> Result<f64> {
    let dim = k.dim();
    (0..k.len())
        .into_par_iter()
        .map_init(
            || vec![Complex64::new(0.0, 0.0); dim],
            |buf, i| {
                k.write_point(i, buf);
                f.modulus_at(buf)
            },
        )
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// `max_K |f|` for every member in one pass over the samples.
pub fn sample_max_all(family: &FunctionFamily, k: &CompactSample) -> Result<Vec<f64>> {
    let dim = k.dim();
    let n = family.len();
    (0..k.len())
        .into_par_iter()
        .try_fold(
            || (vec![Complex64::new(0.0, 0.0); dim], vec![0.0f64; n]),
            |(mut buf, mut acc), i| {
                k.write_point(i, &mut buf);
                for (a, f) in acc.iter_mut().zip(&family.members) {
                    *a = a.max(f.modulus_at(&buf)?);
                }
                Ok::<_, Error>((buf, acc))
            },
        )
        .map(|r| r.map(|(_, acc)| acc))
        .try_reduce(|| vec![0.0; n], |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect()))
}

#[derive(Clone, Debug)]
pub struct HullResult {
    pub grid: Grid,
    pub filter: HullFilter,
    /// Hull cells in grid order.
    pub cells: Vec<u32>,
    /// Worst-certificate member per hull cell.
    pub worst_member: Vec<u32>,
    pub worst_ratio: Vec<f64>,
    /// `min dist_to_complement` over hull cells and the cell attaining it.
    pub min_boundary_dist: f64,
    pub min_boundary_cell: Option<u32>,
    /// Inside cells whose evaluation failed; they are excluded.
    pub eval_failures: usize,
    pub inside_cells: usize,
}

impl HullResult {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains_cell(&self, flat: usize) -> bool {
        self.cells.binary_search(&(flat as u32)).is_ok()
    }

    /// Membership mask over the whole grid.
    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.grid.total_cells()];
        for &c in &self.cells {
            m[c as usize] = true;
        }
        m
    }

    /// The hull cells as a compact sample of `region`.
    pub fn as_sample(&self, region: &Region) -> CompactSample {
        CompactSample {
            set: SampleSet::Cells { grid: self.grid.clone(), cells: self.cells.clone() },
            margin: (self.min_boundary_dist - region.h()).max(0.0),
            empty: self.cells.is_empty(),
            robust: true,
        }
    }

    /// `cell,re_1,im_1,...,member,label,ratio` rows.
    pub fn to_csv(&self, family: &FunctionFamily) -> String {
        let dim = self.grid.axes() / 2;
        let mut out = String::from("cell");
        for k in 1..=dim {
            let _ = write!(out, ",re{k},im{k}");
        }
        out.push_str(",member,label,ratio\n");
        let mut buf = vec![Complex64::new(0.0, 0.0); dim];
        for (i, &c) in self.cells.iter().enumerate() {
            self.grid.write_center(c as usize, &mut buf);
            let _ = write!(out, "{c}");
            for z in &buf {
                let _ = write!(out, ",{:?},{:?}", z.re, z.im);
            }
            let m = self.worst_member[i] as usize;
            let _ = writeln!(out, ",{m},\"{}\",{:?}", family.members[m].label, self.worst_ratio[i]);
        }
        out
    }
}

/// Cell ids from the first column of [`HullResult::to_csv`] output, sorted.
pub fn hull_cells_from_csv(text: &str) -> Result<Vec<u32>> {
    let mut cells = text
        .lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let tok = l.split(',').next().unwrap_or("");
            tok.parse::<u32>().map_err(|_| Error::Parse { line: i + 1, msg: format!("bad cell id `{tok}`") })
        })
        .collect::<Result<Vec<u32>>>()?;
    cells.sort_unstable();
    Ok(cells)
}

/// Filters every inside grid point of `region` against the family maxima on `k`.
pub fn hull_approx(region: &Region, k: &CompactSample, family: &FunctionFamily, tol: f64) -> Result<HullResult> {
    if family.shape != *region.shape() {
        return Err(Error::InvalidShape(format!("family on {} used on region {}", family.shape, region.shape())));
    }
    let filter = HullFilter::new(family, k, tol)?;
    let grid = region.grid();
    let dim = region.shape().total_dim();
    let tests: Vec<(u32, Option<PointTest>)> = (0..grid.total_cells())
        .into_par_iter()
        .filter(|&flat| region.is_inside_cell(flat))
        .map_init(
            || vec![Complex64::new(0.0, 0.0); dim],
            |buf, flat| {
                grid.write_center(flat, buf);
                match filter.test(family, buf) {
                    Ok(t) if t.inside => Some((flat as u32, Some(t))),
                    Ok(_) => None,
                    Err(_) => Some((flat as u32, None)),
                }
            },
        )
        .flatten()
        .collect();
    let mut result = HullResult {
        grid: grid.clone(),
        filter,
        cells: Vec::new(),
        worst_member: Vec::new(),
        worst_ratio: Vec::new(),
        min_boundary_dist: f64::INFINITY,
        min_boundary_cell: None,
        eval_failures: 0,
        inside_cells: region.inside_count(),
    };
    for (cell, t) in tests {
        let Some(t) = t else {
            result.eval_failures += 1;
            continue;
        };
        let d = region.cell_dist(cell as usize);
        if d < result.min_boundary_dist {
            result.min_boundary_dist = d;
            result.min_boundary_cell = Some(cell);
        }
        result.cells.push(cell);
        result.worst_member.push(t.member);
        result.worst_ratio.push(t.ratio);
    }
    Ok(result)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvexityStatus {
    CompactLike,
    Escaping,
    Inconclusive,
}

impl std::fmt::Display for ConvexityStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ConvexityStatus::CompactLike => "COMPACT-LIKE",
            ConvexityStatus::Escaping => "ESCAPING",
            ConvexityStatus::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// Band widths of the diagnostic, in absolute distance.
#[derive(Clone, Copy, Debug)]
pub struct DiagnosticBands {
    /// Hull cells closer than this to the complement count as escaping.
    pub escape: f64,
    /// Fraction of the K margin a compact-like hull must keep.
    pub compact_fraction: f64,
}

impl DiagnosticBands {
    pub fn for_region(region: &Region) -> Self {
        Self { escape: 2.0 * region.h(), compact_fraction: 0.5 }
    }
}

#[derive(Clone, Debug)]
pub struct ConvexityVerdict {
    pub status: ConvexityStatus,
    pub min_boundary_dist: f64,
    /// `min_{w in K} dist_to_complement(w)`.
    pub k_dist: f64,
    pub k_margin: f64,
    /// Hull point closest to the complement.
    pub witness: Option<PointZ>,
    pub bands: DiagnosticBands,
}

impl ConvexityVerdict {
    /// The hull is a superset of the true hull: ESCAPING is evidence,
    /// COMPACT-LIKE a certificate relative to the family only.
    pub fn note(&self) -> &'static str {
        match self.status {
            ConvexityStatus::Escaping => "evidence only: the family hull is a superset of the true hull",
            ConvexityStatus::CompactLike => "certificate relative to the finite family",
            ConvexityStatus::Inconclusive => "hull stays between the escape band and half the K margin",
        }
    }
}

/// ESCAPING when hull points come within `bands.escape` of the complement
/// while `K` keeps a larger margin; COMPACT-LIKE when the hull keeps at least
/// `compact_fraction` of the K margin; INCONCLUSIVE otherwise.
pub fn compactness_diagnostic(region: &Region, k: &CompactSample, hull: &HullResult, bands: DiagnosticBands) -> Result<ConvexityVerdict> {
    let dim = k.dim();
    let mut k_dist = f64::INFINITY;
    let mut buf = vec![Complex64::new(0.0, 0.0); dim];
    for i in 0..k.len() {
        k.write_point(i, &mut buf);
        k_dist = k_dist.min(region.dist_to_complement(&PointZ(buf.clone()))?);
    }
    let status = if hull.min_boundary_dist <= bands.escape && k.margin > bands.escape {
        ConvexityStatus::Escaping
    } else if hull.min_boundary_dist >= bands.compact_fraction * k.margin {
        ConvexityStatus::CompactLike
    } else {
        ConvexityStatus::Inconclusive
    };
    Ok(ConvexityVerdict {
        status,
        min_boundary_dist: hull.min_boundary_dist,
        k_dist,
        k_margin: k.margin,
        witness: hull.min_boundary_cell.map(|c| region.grid().center_point(c as usize)),
        bands,
    })
}

#[derive(Clone, Debug)]
pub struct ProductVerdict {
    pub equal: bool,
    /// Cells of the product of projections missing from the region.
    pub missing_cells: usize,
    pub product_cells: usize,
    pub region_cells: usize,
    /// Set when a convex recipe with a COMPACT-LIKE diagnostic is not a product.
    pub contradiction: Option<String>,
}

/// Compares the region with the product of its projections.
pub fn product_decomposition_check(region: &Region, diagnostic: Option<&ConvexityVerdict>) -> Result<ProductVerdict> {
    let prod = region.product_of_projections()?;
    let missing = prod.mask().par_iter().zip(region.mask().par_iter()).filter(|(p, u)| **p && !**u).count();
    let equal = missing == 0;
    let contradiction = match diagnostic {
        Some(v) if !equal && region.recipe().flags.convex && v.status == ConvexityStatus::CompactLike => Some(format!(
            "convex recipe `{}` is COMPACT-LIKE but not the product of its projections",
            region.recipe().text
        )),
        _ => None,
    };
    Ok(ProductVerdict {
        equal,
        missing_cells: missing,
        product_cells: prod.inside_count(),
        region_cells: region.inside_count(),
        contradiction,
    })
}

/// Largest L-infinity index distance (capped at `cap`) from a cell where two
/// masks differ to the nearest cell whose membership in `reference` differs
/// from the cell's own.
pub fn band_width(grid: &Grid, reference: &[bool], other: &[bool], cap: usize) -> usize {
    let axes = grid.axes();
    let counts = grid.counts();
    let diffs: Vec<usize> = (0..reference.len()).filter(|&i| reference[i] != other[i]).collect();
    diffs
        .par_iter()
        .map(|&cell| {
            let own = reference[cell];
            let mut idx = vec![0; axes];
            grid.unflat(cell, &mut idx);
            for r in 1..=cap {
                let mut off = vec![-(r as i64); axes];
                loop {
                    if off.iter().any(|o| o.unsigned_abs() as usize == r) {
                        let mut flat = 0usize;
                        let mut valid = true;
                        for a in 0..axes {
                            let v = idx[a] as i64 + off[a];
                            if v < 0 || v >= counts[a] as i64 {
                                valid = false;
                                break;
                            }
                            flat += v as usize * grid.strides()[a];
                        }
                        // off-grid cells are outside every mask
                        let member = valid && reference[flat];
                        if member != own {
                            return r;
                        }
                    }
                    let mut a = 0;
                    while a < axes {
                        off[a] += 1;
                        if off[a] <= r as i64 {
                            break;
                        }
                        off[a] = -(r as i64);
                        a += 1;
                    }
                    if a == axes {
                        break;
                    }
                }
            }
            cap + 1
        })
        .max()
        .unwrap_or(0)
}

#[derive(Clone, Debug)]
pub struct ProductLawReport {
    pub product_hull_cells: usize,
    pub factor_product_cells: usize,
    pub symmetric_difference: usize,
    /// Band width of the symmetric difference around the product of factor
    /// hulls, in cells (capped at 8, `9` meaning wider).
    pub band: usize,
    pub factor_hull_cells: Vec<usize>,
    pub pass: bool,
}

/// Cartesian product of per-factor samples as explicit points.
pub fn product_sample(region: &Region, factors: &[&CompactSample]) -> Result<CompactSample> {
    let mut points: Vec<Vec<Complex64>> = vec![Vec::new()];
    for k in factors {
        let mut next = Vec::with_capacity(points.len() * k.len());
        for p in &points {
            for q in k.iter() {
                let mut v = p.clone();
                v.extend_from_slice(q.coords());
                next.push(v);
            }
        }
        points = next;
    }
    CompactSample::from_points(region, points.into_iter().map(PointZ).collect())
}

/// Compares the hull of `K_1 x ... x K_n` in the product region with the
/// product of the factor hulls, using families generated with the same
/// degree and options on the product and on each factor.
pub fn hull_product_check(
    factors: &[&Region],
    ks: &[&CompactSample],
    d: u32,
    tol: f64,
    options: FamilyOptions,
) -> Result<ProductLawReport> {
    if factors.len() != ks.len() {
        return Err(Error::ShapeMismatch { expected: factors.len(), got: ks.len() });
    }
    if factors.iter().any(|f| !f.recipe().flags.connected) {
        return Err(Error::RecipeFlag("connected"));
    }
    let product = Region::product(factors)?;
    let k = product_sample(&product, ks)?;
    let family = generate_family(&product, d, options)?;
    let hull = hull_approx(&product, &k, &family, tol)?;
    let mut factor_masks = Vec::with_capacity(factors.len());
    let mut factor_hull_cells = Vec::with_capacity(factors.len());
    for (f, kf) in factors.iter().zip(ks) {
        let fam = generate_family(f, d, options)?;
        let h = hull_approx(f, kf, &fam, tol)?;
        factor_hull_cells.push(h.len());
        factor_masks.push(h.mask());
    }
    let sizes: Vec<usize> = factors.iter().map(|f| f.grid().total_cells()).collect();
    let expected: Vec<bool> = (0..product.grid().total_cells())
        .into_par_iter()
        .map(|flat| {
            let mut rest = flat;
            let mut ok = true;
            for i in (0..factors.len()).rev() {
                ok &= factor_masks[i][rest % sizes[i]];
                rest /= sizes[i];
            }
            ok
        })
        .collect();
    let actual = hull.mask();
    let symmetric_difference = expected.par_iter().zip(actual.par_iter()).filter(|(a, b)| a != b).count();
    let band = band_width(product.grid(), &expected, &actual, 8);
    Ok(ProductLawReport {
        product_hull_cells: hull.len(),
        factor_product_cells: expected.iter().filter(|b| **b).count(),
        symmetric_difference,
        band,
        factor_hull_cells,
        pass: band <= 2,
    })
}

/// CSV matrix over the plane of coordinate `coord` through `through`:
/// `0` outside the region, `1` inside, `2` in the hull. Rows run over the
/// imaginary axis (ascending), columns over the real axis.
pub fn heatmap_csv(region: &Region, hull: &HullResult, coord: usize, through: &[Complex64]) -> Result<String> {
    heatmap_from_cells(region, &hull.cells, coord, through)
}

/// [`heatmap_csv`] from a sorted list of hull cells, e.g. one read back with
/// [`hull_cells_from_csv`].
pub fn heatmap_from_cells(region: &Region, cells: &[u32], coord: usize, through: &[Complex64]) -> Result<String> {
    let g = region.grid();
    if through.len() != g.axes() / 2 {
        return Err(Error::ShapeMismatch { expected: g.axes() / 2, got: through.len() });
    }
    let base = g.cell_of_point(through).ok_or(Error::OffGrid)?;
    let (ax, ay) = (2 * coord, 2 * coord + 1);
    let strip = base - g.axis_index(base, ax) * g.strides()[ax] - g.axis_index(base, ay) * g.strides()[ay];
    let mut out = String::new();
    for iy in 0..g.counts()[ay] {
        let row: Vec<&str> = (0..g.counts()[ax])
            .map(|ix| {
                let flat = strip + ix * g.strides()[ax] + iy * g.strides()[ay];
                if cells.binary_search(&(flat as u32)).is_ok() {
                    "2"
                } else if region.is_inside_cell(flat) {
                    "1"
                } else {
                    "0"
                }
            })
            .collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    Ok(out)
}

/// Product of circles `|z_k| = radii[k]` with `per_circle` angles each
/// (`radii[k] = 0` pins the coordinate at the origin).
pub fn torus_sample(region: &Region, radii: &[f64], per_circle: usize) -> Result<CompactSample> {
    let dim = region.shape().total_dim();
    if radii.len() != dim {
        return Err(Error::ShapeMismatch { expected: dim, got: radii.len() });
    }
    let mut points: Vec<Vec<Complex64>> = vec![Vec::new()];
    for &r in radii {
        let angles = if r == 0.0 { 1 } else { per_circle };
        let mut next = Vec::with_capacity(points.len() * angles);
        for p in &points {
            for a in 0..angles {
                let mut v = p.clone();
                v.push(Complex64::from_polar(r, std::f64::consts::TAU * a as f64 / angles as f64));
                next.push(v);
            }
        }
        points = next;
    }
    CompactSample::from_points(region, points.into_iter().map(PointZ).collect())
}

/// Union of circles of radius `r` in each coordinate axis disk (other
/// coordinates zero).
pub fn axis_circles_sample(region: &Region, r: f64, per_circle: usize) -> Result<CompactSample> {
    axis_circles_at(region, &vec![Complex64::new(0.0, 0.0); region.shape().total_dim()], r, per_circle)
}

/// Circles of radius `r` in each coordinate plane through `center`.
pub fn axis_circles_at(region: &Region, center: &[Complex64], r: f64, per_circle: usize) -> Result<CompactSample> {
    let dim = region.shape().total_dim();
    if center.len() != dim {
        return Err(Error::ShapeMismatch { expected: dim, got: center.len() });
    }
    let mut points = Vec::with_capacity(dim * per_circle);
    for k in 0..dim {
        for a in 0..per_circle {
            let mut v = center.to_vec();
            v[k] += Complex64::from_polar(r, std::f64::consts::TAU * a as f64 / per_circle as f64);
            points.push(PointZ(v));
        }
    }
    CompactSample::from_points(region, points)
}

/// Brute-force polynomial hull of a torus-like sample for the monomial
/// family centred at the origin: a grid point is kept iff every coordinate
/// modulus stays below the sample maximum of that coordinate.
pub fn coordinate_box_hull(region: &Region, k: &CompactSample) -> Vec<bool> {
    let dim = k.dim();
    let mut bounds = vec![0.0f64; dim];
    for p in k.iter() {
        for (b, z) in bounds.iter_mut().zip(p.coords()) {
            *b = b.max(z.norm());
        }
    }
    let g = region.grid();
    (0..g.total_cells())
        .into_par_iter()
        .map_init(
            || vec![Complex64::new(0.0, 0.0); dim],
            |buf, flat| {
                if !region.is_inside_cell(flat) {
                    return false;
                }
                g.write_center(flat, buf);
                buf.iter().zip(&bounds).all(|(z, b)| z.norm() <= *b * (1.0 + DEFAULT_TOL) + ABS_FLOOR)
            },
        )
        .collect()
}

/// Hausdorff distance (sup norm, between cell centres) between two masks on
/// the same grid; infinite when exactly one is empty. Only cells of one mask
/// missing from the other contribute, so the scan runs over the symmetric
/// difference.
pub fn hausdorff(grid: &Grid, a: &[bool], b: &[bool]) -> f64 {
    let pts = |m: &[bool], not: &[bool]| -> Vec<Vec<Complex64>> {
        (0..m.len()).filter(|&i| m[i] && !not[i]).map(|i| grid.center_point(i).0).collect()
    };
    let none = vec![false; a.len()];
    let (na, nb) = (a.iter().filter(|x| **x).count(), b.iter().filter(|x| **x).count());
    if na == 0 && nb == 0 {
        return 0.0;
    }
    if na == 0 || nb == 0 {
        return f64::INFINITY;
    }
    let (only_a, only_b) = (pts(a, b), pts(b, a));
    if only_a.is_empty() && only_b.is_empty() {
        return 0.0;
    }
    let (pa, pb) = (pts(a, &none), pts(b, &none));
    let directed = |x: &[Vec<Complex64>], y: &[Vec<Complex64>]| {
        x.par_iter()
            .map(|p| {
                y.iter()
                    .map(|q| p.iter().zip(q).map(|(s, t)| (s - t).norm()).fold(0.0, f64::max))
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| 0.0, f64::max)
    };
    directed(&only_a, &pb).max(directed(&only_b, &pa))
}
