//! Function tuples on block-structured regions.
//!
//! A [`CnFunction`] holds one [`Component`] per block. Component `i` of a
//! `C^n`-holomorphic tuple may depend only on block `i`; the checkers in
//! [`derivative`] verify that numerically, and nothing else assumes it.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::leafspace::LeafLift;
use crate::region::{BlockShape, PointZ};

pub mod derivative;
pub mod extend;
pub mod family;
pub mod io;

pub use derivative::{
    cross_block_derivative_check, holomorphy_check, triangular_check, wirtinger_at, CheckParams, DerivativeReport,
    Wirtinger, DEFAULT_SAMPLES, DEFAULT_TOL,
};
pub use extend::extend_to_product;
pub use family::{generate_family, FamilyOptions, FunctionFamily, Provenance};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `coeff * prod_k (z_{j,k} - center_k)^exponents[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub exponents: Vec<u32>,
    pub coeff: Complex64,
}

/// `coeff * (z_{j,coord} - pole)^(-power)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentTerm {
    pub coord: usize,
    pub pole: Complex64,
    pub power: u32,
    pub coeff: Complex64,
}

/// Polynomial (plus optional Laurent terms) in the coordinates of one block.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockPolynomial {
    pub block: usize,
    /// Index of the block's first coordinate in the full point.
    offset: usize,
    pub center: Vec<Complex64>,
    pub terms: Vec<Monomial>,
    pub laurent: Vec<LaurentTerm>,
}

impl BlockPolynomial {
    pub fn new(shape: &BlockShape, block: usize, center: Vec<Complex64>) -> Result<Self> {
        shape.check_block(block)?;
        if center.len() != shape.dim(block) {
            return Err(Error::ShapeMismatch { expected: shape.dim(block), got: center.len() });
        }
        Ok(Self { block, offset: shape.block_range(block).start, center, terms: Vec::new(), laurent: Vec::new() })
    }

    /// Unshifted polynomial with no terms.
    pub fn zero(shape: &BlockShape, block: usize) -> Result<Self> {
        Self::new(shape, block, vec![ZERO; shape.dim(block)])
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn with_monomial(mut self, exponents: Vec<u32>, coeff: Complex64) -> Result<Self> {
        if exponents.len() != self.dim() {
            return Err(Error::ShapeMismatch { expected: self.dim(), got: exponents.len() });
        }
        self.terms.push(Monomial { exponents, coeff });
        Ok(self)
    }

    pub fn with_laurent(mut self, coord: usize, pole: Complex64, power: u32, coeff: Complex64) -> Result<Self> {
        if coord >= self.dim() {
            return Err(Error::ShapeMismatch { expected: self.dim(), got: coord + 1 });
        }
        self.laurent.push(LaurentTerm { coord, pole, power, coeff });
        Ok(self)
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|m| m.exponents.iter().sum::<u32>()).max().unwrap_or(0)
    }

    /// Evaluates on the block's own coordinates.
    pub fn eval_block(&self, w: &[Complex64]) -> Complex64 {
        let mut acc = ZERO;
        for m in &self.terms {
            let mut v = m.coeff;
            for (k, &e) in m.exponents.iter().enumerate() {
                if e > 0 {
                    v *= (w[k] - self.center[k]).powu(e);
                }
            }
            acc += v;
        }
        for t in &self.laurent {
            acc += t.coeff / (w[t.coord] - t.pole).powu(t.power);
        }
        acc
    }

    fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.eval_block(&z[self.offset..self.offset + self.dim()])
    }
}

/// Polynomial in `z_j` plus powers of the lifted logarithm of `z_j`.
#[derive(Clone, Debug)]
pub struct LeafFunction {
    pub poly: BlockPolynomial,
    /// `(p, coeff)` for `coeff * L^p`.
    pub log_powers: Vec<(u32, Complex64)>,
    pub lift: LeafLift,
}

impl LeafFunction {
    fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        let l = self.lift.eval(z)?;
        let mut acc = self.poly.eval(z);
        for &(p, c) in &self.log_powers {
            acc += c * l.powu(p);
        }
        Ok(acc)
    }
}

/// Caller-supplied evaluator over the full point. `spec` is the textual form
/// when the evaluator is one of the serialisable builtins.
#[derive(Clone)]
pub struct BlackBox {
    pub name: String,
    pub spec: Option<BuiltinSpec>,
    eval: Arc<dyn Fn(&[Complex64]) -> Complex64 + Send + Sync>,
}

impl fmt::Debug for BlackBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BlackBox({})", self.name)
    }
}

/// `coeff * prod z^a * conj(z)^b` over all coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedTerm {
    pub coeff: Complex64,
    pub z: Vec<u32>,
    pub zbar: Vec<u32>,
}

/// Serialisable black boxes.
#[derive(Clone, Debug, PartialEq)]
pub enum BuiltinSpec {
    /// Polynomial in all coordinates and their conjugates.
    Mixed(Vec<MixedTerm>),
    /// `|z_k|`.
    Modulus(usize),
}

impl BlackBox {
    pub fn new(name: impl Into<String>, f: impl Fn(&[Complex64]) -> Complex64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), spec: None, eval: Arc::new(f) }
    }

    pub fn from_spec(spec: BuiltinSpec) -> Self {
        let (name, eval): (String, Arc<dyn Fn(&[Complex64]) -> Complex64 + Send + Sync>) = match &spec {
            BuiltinSpec::Mixed(terms) => {
                let terms = terms.clone();
                (
                    "mixed".into(),
                    Arc::new(move |z: &[Complex64]| {
                        terms
                            .iter()
                            .map(|t| {
                                let mut v = t.coeff;
                                for (k, w) in z.iter().enumerate() {
                                    let (a, b) = (t.z.get(k).copied().unwrap_or(0), t.zbar.get(k).copied().unwrap_or(0));
                                    if a > 0 {
                                        v *= w.powu(a);
                                    }
                                    if b > 0 {
                                        v *= w.conj().powu(b);
                                    }
                                }
                                v
                            })
                            .sum()
                    }),
                )
            }
            BuiltinSpec::Modulus(k) => {
                let k = *k;
                (format!("modulus z{}", k + 1), Arc::new(move |z: &[Complex64]| Complex64::new(z[k].norm(), 0.0)))
            }
        };
        Self { name, spec: Some(spec), eval }
    }

    /// `coeff * prod z^a`, a holomorphic polynomial in all coordinates.
    pub fn polynomial(terms: &[(Complex64, Vec<u32>)], dim: usize) -> Self {
        Self::from_spec(BuiltinSpec::Mixed(
            terms.iter().map(|(c, a)| MixedTerm { coeff: *c, z: a.clone(), zbar: vec![0; dim] }).collect(),
        ))
    }
}

/// `g_j` on the product of projections: `f_j` evaluated at `(z_j, rep)` where
/// `rep` is a stored slice point over the block cell of `z_j`.
#[derive(Clone, Debug)]
pub struct ExtendedComponent {
    pub source: Arc<Component>,
    pub(crate) block: usize,
    pub(crate) shape: BlockShape,
    pub(crate) block_grid: crate::region::Grid,
    /// `(block cell, full representative point)` sorted by cell.
    pub(crate) reps: Vec<(u32, Vec<Complex64>)>,
}

impl ExtendedComponent {
    fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        let range = self.shape.block_range(self.block);
        let cell = self.block_grid.cell_of_point(&z[range.clone()]).ok_or(Error::NotInRegion)? as u32;
        let i = self.reps.binary_search_by_key(&cell, |(c, _)| *c).map_err(|_| Error::NotInRegion)?;
        let mut p = self.reps[i].1.clone();
        p[range.clone()].copy_from_slice(&z[range]);
        self.source.eval(&p)
    }
}

#[derive(Clone, Debug)]
pub enum Component {
    Zero,
    Poly(BlockPolynomial),
    Leaf(LeafFunction),
    BlackBox(BlackBox),
    Extended(ExtendedComponent),
    /// Pointwise product.
    Product(Arc<Component>, Arc<Component>),
}

impl Component {
    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        match self {
            Component::Zero => Ok(ZERO),
            Component::Poly(p) => Ok(p.eval(z)),
            Component::Leaf(l) => l.eval(z),
            Component::BlackBox(b) => Ok((b.eval)(z)),
            Component::Extended(e) => e.eval(z),
            Component::Product(a, b) => Ok(a.eval(z)? * b.eval(z)?),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Component::Zero)
    }

    /// Block the component is declared to depend on, if any.
    pub fn declared_block(&self) -> Option<usize> {
        match self {
            Component::Poly(p) => Some(p.block),
            Component::Leaf(l) => Some(l.poly.block),
            Component::Extended(e) => Some(e.block),
            _ => None,
        }
    }
}

/// An `n`-tuple of components on a block shape.
#[derive(Clone, Debug)]
pub struct CnFunction {
    pub shape: BlockShape,
    pub components: Vec<Component>,
    pub label: String,
}

impl CnFunction {
    /// Checks that block-local components sit at their own block index.
    pub fn new(shape: BlockShape, components: Vec<Component>, label: impl Into<String>) -> Result<Self> {
        if components.len() != shape.n_blocks() {
            return Err(Error::ShapeMismatch { expected: shape.n_blocks(), got: components.len() });
        }
        for (i, c) in components.iter().enumerate() {
            if let Some(b) = c.declared_block() {
                if b != i {
                    return Err(Error::InvalidShape(format!("component {} references block {} variables", i + 1, b + 1)));
                }
            }
        }
        Ok(Self { shape, components, label: label.into() })
    }

    pub fn zero(shape: BlockShape) -> Self {
        let n = shape.n_blocks();
        Self { shape, components: vec![Component::Zero; n], label: "0".into() }
    }

    /// Tuple whose only nonzero entry is `component` at its declared block.
    pub fn single(shape: &BlockShape, component: Component, label: impl Into<String>) -> Result<Self> {
        let j = component.declared_block().ok_or_else(|| Error::Unsupported("component has no block".into()))?;
        let mut components = vec![Component::Zero; shape.n_blocks()];
        components[j] = component;
        Self::new(shape.clone(), components, label)
    }

    pub fn n_blocks(&self) -> usize {
        self.components.len()
    }

    pub fn eval_into(&self, z: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        if z.len() != self.shape.total_dim() {
            return Err(Error::ShapeMismatch { expected: self.shape.total_dim(), got: z.len() });
        }
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.eval(z)?;
        }
        Ok(())
    }

    pub fn eval(&self, p: &PointZ) -> Result<Vec<Complex64>> {
        let mut out = vec![ZERO; self.n_blocks()];
        self.eval_into(p.coords(), &mut out)?;
        Ok(out)
    }

    /// `|f(z)| = max_i |f_i(z)|`.
    pub fn modulus_at(&self, z: &[Complex64]) -> Result<f64> {
        if z.len() != self.shape.total_dim() {
            return Err(Error::ShapeMismatch { expected: self.shape.total_dim(), got: z.len() });
        }
        let mut m = 0.0f64;
        for c in &self.components {
            if !c.is_zero() {
                m = m.max(c.eval(z)?.norm());
            }
        }
        Ok(m)
    }

    /// Component-wise product.
    pub fn product(&self, other: &CnFunction) -> Result<CnFunction> {
        if self.shape != other.shape {
            return Err(Error::InvalidShape("product of tuples on different shapes".into()));
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| match (a, b) {
                (Component::Zero, _) | (_, Component::Zero) => Component::Zero,
                _ => Component::Product(Arc::new(a.clone()), Arc::new(b.clone())),
            })
            .collect();
        Ok(CnFunction { shape: self.shape.clone(), components, label: format!("({})*({})", self.label, other.label) })
    }

    /// True when every component is a serialisable kind.
    pub fn is_serialisable(&self) -> bool {
        fn ok(c: &Component) -> bool {
            match c {
                Component::Zero | Component::Poly(_) | Component::Leaf(_) => true,
                Component::BlackBox(b) => b.spec.is_some(),
                Component::Extended(_) => false,
                Component::Product(a, b) => ok(a) && ok(b),
            }
        }
        self.components.iter().all(ok)
    }
}

#[cfg(test)]
mod tests;
