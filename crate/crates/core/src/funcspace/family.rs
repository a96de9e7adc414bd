//! Finite function families standing in for the full algebra of
//! `C^n`-holomorphic tuples on a region.

use num_complex::Complex64;

use super::derivative::{cross_block_derivative_check, CheckParams, DerivativeReport};
use super::{BlockPolynomial, CnFunction, Component, LeafFunction};
use crate::error::{Error, Result};
use crate::leafspace::{build_leaf_graph, LeafLift};
use crate::region::{BlockShape, PoleDecl, Region};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FamilyOptions {
    /// Laurent terms at the recipe's declared poles.
    pub poles: bool,
    /// Powers of the lifted logarithm on nontrivial leaf graphs.
    pub leaf_lifts: bool,
}

/// Generation parameters recorded with a family.
#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub degree: u32,
    /// Monomial centre per block.
    pub centers: Vec<Vec<Complex64>>,
    pub poles: Vec<PoleDecl>,
    /// Blocks whose lifted logarithm was included.
    pub leaf_lifts: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct FunctionFamily {
    pub shape: BlockShape,
    pub members: Vec<CnFunction>,
    pub provenance: Provenance,
}

impl FunctionFamily {
    pub fn new(shape: BlockShape, members: Vec<CnFunction>, provenance: Provenance) -> Result<Self> {
        if let Some(m) = members.iter().find(|m| m.shape != shape) {
            return Err(Error::InvalidShape(format!("member `{}` is on shape {}", m.label, m.shape)));
        }
        Ok(Self { shape, members, provenance })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Runs the cross-block check on every member.
    pub fn verify(&self, region: &Region, params: &CheckParams) -> Result<Vec<DerivativeReport>> {
        self.members.iter().map(|m| cross_block_derivative_check(m, region, params)).collect()
    }

    /// Shifted monomials of degree `1..=d` and the coordinate functions, per
    /// block, with the given centres.
    pub fn monomials(shape: &BlockShape, centers: &[Vec<Complex64>], d: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::Unsupported("family degree must be at least 1".into()));
        }
        if centers.len() != shape.n_blocks() {
            return Err(Error::ShapeMismatch { expected: shape.n_blocks(), got: centers.len() });
        }
        let mut members = Vec::new();
        for (j, center) in centers.iter().enumerate() {
            members.extend(block_monomials(shape, j, center, d)?);
        }
        Self::new(
            shape.clone(),
            members,
            Provenance { degree: d, centers: centers.to_vec(), poles: Vec::new(), leaf_lifts: Vec::new() },
        )
    }

    /// Appends the members of `other` that are not already present by label.
    pub fn extend_from(&mut self, other: FunctionFamily) {
        for m in other.members {
            if !self.members.iter().any(|x| x.label == m.label) {
                self.members.push(m);
            }
        }
    }
}

fn coord_name(shape: &BlockShape, j: usize, k: usize) -> String {
    format!("z{}", shape.block_range(j).start + k + 1)
}

fn shifted_name(shape: &BlockShape, j: usize, k: usize, c: Complex64) -> String {
    let name = coord_name(shape, j, k);
    if c == Complex64::new(0.0, 0.0) {
        name
    } else {
        format!("({name}-({}{:+}i))", c.re, c.im)
    }
}

/// Exponent vectors of length `dim` with total degree `1..=d`, graded, then
/// lexicographically descending within each degree.
pub fn exponents(dim: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(dim: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == dim {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e);
            rec(dim, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for total in 1..=d {
        rec(dim, total, &mut Vec::new(), &mut out);
    }
    out
}

fn block_monomials(shape: &BlockShape, j: usize, center: &[Complex64], d: u32) -> Result<Vec<CnFunction>> {
    let dim = shape.dim(j);
    let mut out = Vec::new();
    for k in 0..dim {
        if center[k] != Complex64::new(0.0, 0.0) {
            let mut e = vec![0; dim];
            e[k] = 1;
            let p = BlockPolynomial::zero(shape, j)?.with_monomial(e, Complex64::new(1.0, 0.0))?;
            out.push(CnFunction::single(shape, Component::Poly(p), coord_name(shape, j, k))?);
        }
    }
    for alpha in exponents(dim, d) {
        let label = alpha
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(k, &e)| {
                let base = shifted_name(shape, j, k, center[k]);
                if e == 1 {
                    base
                } else {
                    format!("{base}^{e}")
                }
            })
            .collect::<Vec<_>>()
            .join("*");
        let p = BlockPolynomial::new(shape, j, center.to_vec())?.with_monomial(alpha, Complex64::new(1.0, 0.0))?;
        out.push(CnFunction::single(shape, Component::Poly(p), label)?);
    }
    Ok(out)
}

/// Centroid of the projection's cell centres, snapped to a multiple of `h/2`.
pub fn projection_centroid(region: &Region, j: usize) -> Result<Vec<Complex64>> {
    let proj = region.project(j)?;
    if proj.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let dim = region.shape().dim(j);
    let mut sum = vec![Complex64::new(0.0, 0.0); dim];
    let mut buf = sum.clone();
    let mut count = 0usize;
    for flat in proj.inside_cells() {
        proj.grid().write_center(flat, &mut buf);
        for (s, b) in sum.iter_mut().zip(&buf) {
            *s += b;
        }
        count += 1;
    }
    let unit = 0.5 * region.h();
    let snap = |x: f64| (x / count as f64 / unit).round() * unit;
    Ok(sum.iter().map(|s| Complex64::new(snap(s.re), snap(s.im))).collect())
}

/// Fails when `pole` lies in the closure of the block-`j` projection along
/// coordinate `coord`.
fn check_pole(region: &Region, pole: &PoleDecl) -> Result<()> {
    let proj = region.project(pole.block)?;
    let g = proj.grid();
    let h = g.h();
    let (ax, ay) = (2 * pole.coord, 2 * pole.coord + 1);
    for flat in proj.inside_cells() {
        let lx = g.lo(ax) + g.axis_index(flat, ax) as f64 * h;
        let ly = g.lo(ay) + g.axis_index(flat, ay) as f64 * h;
        let (x, y) = (pole.location.re, pole.location.im);
        if x >= lx && x <= lx + h && y >= ly && y <= ly + h {
            return Err(Error::PoleInside(format!("{}", pole.location)));
        }
    }
    Ok(())
}

/// Builds the finite family for `region`: per block, shifted monomials up to
/// degree `d` about the projection centroid and the coordinate functions;
/// optionally Laurent terms at declared poles and powers of lifted logs.
pub fn generate_family(region: &Region, d: u32, options: FamilyOptions) -> Result<FunctionFamily> {
    let shape = region.shape().clone();
    let centers = (0..shape.n_blocks()).map(|j| projection_centroid(region, j)).collect::<Result<Vec<_>>>()?;
    let mut family = FunctionFamily::monomials(&shape, &centers, d)?;
    if options.poles {
        for pole in &region.recipe().poles {
            check_pole(region, pole)?;
            for p in 1..=d {
                let poly = BlockPolynomial::zero(&shape, pole.block)?.with_laurent(
                    pole.coord,
                    pole.location,
                    p,
                    Complex64::new(1.0, 0.0),
                )?;
                let c = pole.location;
                let label = format!("({}-({}{:+}i))^-{p}", coord_name(&shape, pole.block, pole.coord), c.re, c.im);
                family.members.push(CnFunction::single(&shape, Component::Poly(poly), label)?);
            }
            family.provenance.poles.push(pole.clone());
        }
    }
    if options.leaf_lifts && shape.n_blocks() >= 2 {
        for j in 0..shape.n_blocks() {
            if shape.dim(j) != 1 {
                continue;
            }
            let graph = build_leaf_graph(region, j)?;
            if graph.nodes().len() == graph.slices().len() {
                continue;
            }
            let lift = LeafLift::new(region, j)?;
            for p in 1..=d {
                let leaf = LeafFunction {
                    poly: BlockPolynomial::zero(&shape, j)?,
                    log_powers: vec![(p, Complex64::new(1.0, 0.0))],
                    lift: lift.clone(),
                };
                let label = if p == 1 { format!("L{}", j + 1) } else { format!("L{}^{p}", j + 1) };
                family.members.push(CnFunction::single(&shape, Component::Leaf(leaf), label)?);
            }
            family.provenance.leaf_lifts.push(j);
        }
    }
    Ok(family)
}
