//! Grid geometry for open sets of `C^{l_1} x ... x C^{l_n}`.
//!
//! A [`Region`] is a boolean mask over a uniform Cartesian grid in the
//! `2 * sum(l_j)` real coordinates. Cells are half-open and lower-inclusive;
//! the open set is the union of inside cells. Real axis `2c` is the real part
//! of complex coordinate `c`, axis `2c + 1` its imaginary part.

mod distance;
pub mod io;

use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub use distance::DistanceField;

/// Default bound on the total complex dimension `sum(l_j)`.
pub const DEFAULT_MAX_COMPLEX_DIM: usize = 3;
/// Default bound on the number of grid cells of a region.
pub const DEFAULT_MAX_CELLS: usize = 1 << 25;

/// Block structure `(l_1, ..., l_n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockShape {
    dims: Vec<usize>,
    offsets: Vec<usize>,
}

impl BlockShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        Self::with_limit(dims, DEFAULT_MAX_COMPLEX_DIM)
    }

    pub fn with_limit(dims: Vec<usize>, max_complex_dim: usize) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("at least one block is required".into()));
        }
        if dims.iter().any(|&l| l == 0) {
            return Err(Error::InvalidShape("every block dimension must be >= 1".into()));
        }
        let total: usize = dims.iter().sum();
        if total > max_complex_dim {
            return Err(Error::InvalidShape(format!(
                "total complex dimension {total} exceeds the limit {max_complex_dim}"
            )));
        }
        let mut offsets = Vec::with_capacity(dims.len());
        let mut acc = 0;
        for &l in &dims {
            offsets.push(acc);
            acc += l;
        }
        Ok(Self { dims, offsets })
    }

    pub fn n_blocks(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, j: usize) -> usize {
        self.dims[j]
    }

    /// Total complex dimension.
    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Complex coordinate indices belonging to block `j`.
    pub fn block_range(&self, j: usize) -> std::ops::Range<usize> {
        self.offsets[j]..self.offsets[j] + self.dims[j]
    }

    pub fn block_of(&self, coord: usize) -> usize {
        self.offsets.iter().rposition(|&o| o <= coord).unwrap_or(0)
    }

    pub fn check_block(&self, j: usize) -> Result<()> {
        if j < self.n_blocks() {
            Ok(())
        } else {
            Err(Error::BlockOutOfRange { index: j, blocks: self.n_blocks() })
        }
    }

    /// Shape of the blocks other than `j`.
    pub fn without(&self, j: usize) -> Result<Self> {
        self.check_block(j)?;
        if self.n_blocks() == 1 {
            return Err(Error::InvalidShape("a single block has no complementary blocks".into()));
        }
        let dims = self
            .dims
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, &l)| l)
            .collect();
        Self::with_limit(dims, usize::MAX)
    }

    /// Concatenation of block lists.
    pub fn concat(shapes: &[&BlockShape]) -> Result<Self> {
        let dims = shapes.iter().flat_map(|s| s.dims.iter().copied()).collect();
        Self::with_limit(dims, usize::MAX)
    }
}

impl fmt::Display for BlockShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|l| l.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A point `z = (z_1, ..., z_n)` stored as its flat list of complex coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct PointZ(pub Vec<Complex64>);

impl PointZ {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Self(coords)
    }

    pub fn origin(dim: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); dim])
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Coordinates of block `j`.
    pub fn block<'a>(&'a self, shape: &BlockShape, j: usize) -> &'a [Complex64] {
        &self.0[shape.block_range(j)]
    }
}

impl From<Vec<Complex64>> for PointZ {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

/// `max_k |a_k - b_k|` over all scalar complex coordinates.
pub fn sup_norm(a: &PointZ, b: &PointZ) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch { expected: a.len(), got: b.len() });
    }
    Ok(sup_norm_slices(&a.0, &b.0))
}

pub(crate) fn sup_norm_slices(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub(crate) fn modulus(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Uniform grid with spacing `h`. Cell `i` on an axis covers
/// `[(origin + i) h, (origin + i + 1) h)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    h: f64,
    origin: Vec<i64>,
    counts: Vec<usize>,
    strides: Vec<usize>,
}

impl Grid {
    pub fn new(h: f64, origin: Vec<i64>, counts: Vec<usize>) -> Self {
        assert_eq!(origin.len(), counts.len());
        let mut strides = vec![1; counts.len()];
        for a in (0..counts.len().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * counts[a + 1];
        }
        Self { h, origin, counts, strides }
    }

    /// Smallest grid aligned to multiples of `h` covering `[lo, hi]` on every
    /// axis, padded by `margin` cells.
    pub fn covering(h: f64, lo: &[f64], hi: &[f64], margin: i64) -> Self {
        let origin: Vec<i64> = lo.iter().map(|&x| (x / h).floor() as i64 - margin).collect();
        let counts = hi
            .iter()
            .zip(&origin)
            .map(|(&x, &o)| ((x / h).ceil() as i64 + margin - o).max(1) as usize)
            .collect();
        Self::new(h, origin, counts)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn axes(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn origin(&self) -> &[i64] {
        &self.origin
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn total_cells(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn lo(&self, axis: usize) -> f64 {
        self.origin[axis] as f64 * self.h
    }

    pub fn hi(&self, axis: usize) -> f64 {
        (self.origin[axis] + self.counts[axis] as i64) as f64 * self.h
    }

    pub fn center(&self, axis: usize, i: usize) -> f64 {
        (self.origin[axis] as f64 + i as f64 + 0.5) * self.h
    }

    /// Cell index on `axis` containing `x`, if inside the bounding box.
    pub fn cell_of(&self, axis: usize, x: f64) -> Option<usize> {
        if !x.is_finite() {
            return None;
        }
        let k = (x / self.h).floor() as i64 - self.origin[axis];
        (k >= 0 && (k as usize) < self.counts[axis]).then_some(k as usize)
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn unflat(&self, mut flat: usize, idx: &mut [usize]) {
        for (a, s) in self.strides.iter().enumerate() {
            idx[a] = flat / s;
            flat %= s;
        }
    }

    pub fn axis_index(&self, flat: usize, axis: usize) -> usize {
        (flat / self.strides[axis]) % self.counts[axis]
    }

    /// Cell containing the point with complex coordinates `z`.
    pub fn cell_of_point(&self, z: &[Complex64]) -> Option<usize> {
        if 2 * z.len() != self.axes() {
            return None;
        }
        let mut flat = 0;
        for (c, v) in z.iter().enumerate() {
            flat += self.cell_of(2 * c, v.re)? * self.strides[2 * c];
            flat += self.cell_of(2 * c + 1, v.im)? * self.strides[2 * c + 1];
        }
        Some(flat)
    }

    /// Writes the centre of cell `flat` as complex coordinates into `out`.
    pub fn write_center(&self, flat: usize, out: &mut [Complex64]) {
        for (c, slot) in out.iter_mut().enumerate() {
            let re = self.center(2 * c, self.axis_index(flat, 2 * c));
            let im = self.center(2 * c + 1, self.axis_index(flat, 2 * c + 1));
            *slot = Complex64::new(re, im);
        }
    }

    pub fn center_point(&self, flat: usize) -> PointZ {
        let mut v = vec![Complex64::new(0.0, 0.0); self.axes() / 2];
        self.write_center(flat, &mut v);
        PointZ(v)
    }

    /// Grid restricted to the listed axes (kept in order).
    pub fn sub_grid(&self, axes: &[usize]) -> Grid {
        Grid::new(
            self.h,
            axes.iter().map(|&a| self.origin[a]).collect(),
            axes.iter().map(|&a| self.counts[a]).collect(),
        )
    }

    pub fn concat(grids: &[&Grid]) -> Grid {
        let h = grids[0].h;
        Grid::new(
            h,
            grids.iter().flat_map(|g| g.origin.iter().copied()).collect(),
            grids.iter().flat_map(|g| g.counts.iter().copied()).collect(),
        )
    }

    /// Calls `f` with the flat index of every face neighbour of `flat`.
    pub fn for_each_neighbor(&self, flat: usize, mut f: impl FnMut(usize)) {
        for a in 0..self.axes() {
            let i = self.axis_index(flat, a);
            if i > 0 {
                f(flat - self.strides[a]);
            }
            if i + 1 < self.counts[a] {
                f(flat + self.strides[a]);
            }
        }
    }
}

/// Declared properties of the generator that built a region. These are
/// truthful by construction of each recipe, never detected from the mask.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RecipeFlags {
    pub bounded: bool,
    pub convex: bool,
    pub connected: bool,
    pub product: bool,
}

impl RecipeFlags {
    pub fn names(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.bounded {
            v.push("bounded");
        }
        if self.convex {
            v.push("convex");
        }
        if self.connected {
            v.push("connected");
        }
        if self.product {
            v.push("product");
        }
        v
    }
}

/// A bounded complement component of a block projection, used as a Laurent
/// pole location: coordinate `coord` (within the block) at `location`.
#[derive(Clone, Debug, PartialEq)]
pub struct PoleDecl {
    pub block: usize,
    pub coord: usize,
    pub location: Complex64,
}

/// Provenance of a region.
#[derive(Clone, Debug, PartialEq)]
pub struct RecipeTag {
    pub text: String,
    pub flags: RecipeFlags,
    pub poles: Vec<PoleDecl>,
}

impl RecipeTag {
    pub fn new(text: impl Into<String>, flags: RecipeFlags) -> Self {
        Self { text: text.into(), flags, poles: Vec::new() }
    }
}

/// Grid limits applied when constructing regions.
#[derive(Clone, Copy, Debug)]
pub struct GridLimits {
    pub max_cells: usize,
}

impl Default for GridLimits {
    fn default() -> Self {
        Self { max_cells: DEFAULT_MAX_CELLS }
    }
}

/// Discretised open set.
#[derive(Debug)]
pub struct Region {
    shape: BlockShape,
    grid: Grid,
    inside: Vec<bool>,
    recipe: RecipeTag,
    distance: OnceLock<DistanceField>,
}

impl Clone for Region {
    fn clone(&self) -> Self {
        Self {
            shape: self.shape.clone(),
            grid: self.grid.clone(),
            inside: self.inside.clone(),
            recipe: self.recipe.clone(),
            distance: OnceLock::new(),
        }
    }
}

impl Region {
    /// Builds a region from a raw mask. Inside cells must keep one cell of
    /// margin from the bounding box.
    pub fn from_mask(shape: BlockShape, grid: Grid, inside: Vec<bool>, recipe: RecipeTag) -> Result<Self> {
        if grid.axes() != 2 * shape.total_dim() {
            return Err(Error::ShapeMismatch { expected: 2 * shape.total_dim(), got: grid.axes() / 2 });
        }
        if inside.len() != grid.total_cells() {
            return Err(Error::InvalidShape(format!(
                "mask has {} cells, grid has {}",
                inside.len(),
                grid.total_cells()
            )));
        }
        if !(grid.h() > 0.0) {
            return Err(Error::InvalidShape("grid spacing must be positive".into()));
        }
        let region = Self { shape, grid, inside, recipe, distance: OnceLock::new() };
        if let Some(cell) = region.first_cell_on_box_boundary() {
            return Err(Error::Unbounded(format!(
                "inside cell {cell} touches the bounding box of recipe `{}`",
                region.recipe.text
            )));
        }
        Ok(region)
    }

    /// Builds a region by testing every cell centre with `member`. The grid
    /// covers `[lo, hi]` per real axis plus one cell of margin.
    pub fn from_membership<F>(
        shape: BlockShape,
        h: f64,
        lo: &[f64],
        hi: &[f64],
        recipe: RecipeTag,
        limits: GridLimits,
        member: F,
    ) -> Result<Self>
    where
        F: Fn(&[Complex64]) -> bool + Sync,
    {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidRecipe(format!("grid spacing h = {h} must be positive")));
        }
        let grid = Grid::covering(h, lo, hi, 1);
        let cells = grid.total_cells();
        if cells > limits.max_cells {
            return Err(Error::GridTooLarge { cells, limit: limits.max_cells });
        }
        let dim = shape.total_dim();
        let inside: Vec<bool> = (0..cells)
            .into_par_iter()
            .map_init(
                || vec![Complex64::new(0.0, 0.0); dim],
                |buf, flat| {
                    grid.write_center(flat, buf);
                    member(buf)
                },
            )
            .collect();
        Self::from_mask(shape, grid, inside, recipe)
    }

    fn first_cell_on_box_boundary(&self) -> Option<usize> {
        let mut idx = vec![0; self.grid.axes()];
        self.inside_cells().find(|&flat| {
            self.grid.unflat(flat, &mut idx);
            idx.iter()
                .zip(self.grid.counts())
                .any(|(&i, &n)| i == 0 || i + 1 == n)
        })
    }

    pub fn shape(&self) -> &BlockShape {
        &self.shape
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    pub fn recipe(&self) -> &RecipeTag {
        &self.recipe
    }

    /// Replaces the recipe tag; the mask is unchanged.
    pub fn with_recipe(mut self, recipe: RecipeTag) -> Self {
        self.recipe = recipe;
        self
    }

    pub fn mask(&self) -> &[bool] {
        &self.inside
    }

    pub fn is_inside_cell(&self, flat: usize) -> bool {
        self.inside[flat]
    }

    pub fn inside_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.inside.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn inside_count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.inside.iter().any(|&b| b)
    }

    pub fn cell_center(&self, flat: usize) -> PointZ {
        self.grid.center_point(flat)
    }

    pub fn cell_of(&self, p: &PointZ) -> Option<usize> {
        self.grid.cell_of_point(&p.0)
    }

    /// True iff the cell containing `p` is inside; points outside the
    /// bounding box are not contained.
    pub fn contains(&self, p: &PointZ) -> bool {
        self.contains_coords(&p.0)
    }

    pub fn contains_coords(&self, z: &[Complex64]) -> bool {
        self.grid.cell_of_point(z).is_some_and(|c| self.inside[c])
    }

    pub fn distance_field(&self) -> &DistanceField {
        self.distance.get_or_init(|| DistanceField::compute(self))
    }

    /// Sup-norm distance from the centre of an inside cell to the complement.
    pub fn cell_dist(&self, flat: usize) -> f64 {
        self.distance_field().dist(flat)
    }

    /// Sup-norm distance from `p` to the complement. Grid centres get the
    /// field value; other points are measured against the nearest complement
    /// cell of their containing cell.
    pub fn dist_to_complement(&self, p: &PointZ) -> Result<f64> {
        if p.len() != self.shape.total_dim() {
            return Err(Error::ShapeMismatch { expected: self.shape.total_dim(), got: p.len() });
        }
        match self.cell_of(p) {
            Some(c) if self.inside[c] => {
                if self.grid.center_point(c) == *p {
                    Ok(self.cell_dist(c))
                } else {
                    Ok(self.distance_field().dist_point(&self.grid, c, &p.0))
                }
            }
            _ => Err(Error::NotInRegion),
        }
    }

    /// Largest distance to the complement over inside grid points.
    pub fn max_depth(&self) -> f64 {
        self.distance_field().max_dist()
    }

    /// Real axes belonging to block `j`.
    pub fn block_axes(&self, j: usize) -> Vec<usize> {
        self.shape.block_range(j).flat_map(|c| [2 * c, 2 * c + 1]).collect()
    }

    /// Real axes of all blocks except `j`.
    pub fn complement_axes(&self, j: usize) -> Vec<usize> {
        let own = self.block_axes(j);
        (0..self.grid.axes()).filter(|a| !own.contains(a)).collect()
    }

    /// Decomposes a flat cell index into (block-`j` cell, complementary cell)
    /// indices of the respective sub-grids.
    pub(crate) fn split_cell(&self, flat: usize, block_grid: &Grid, comp_grid: &Grid, j: usize) -> (usize, usize) {
        let own = self.block_axes(j);
        let mut b = 0;
        let mut c = 0;
        let mut bi = 0;
        let mut ci = 0;
        for a in 0..self.grid.axes() {
            let i = self.grid.axis_index(flat, a);
            if own.contains(&a) {
                b += i * block_grid.strides()[bi];
                bi += 1;
            } else {
                c += i * comp_grid.strides()[ci];
                ci += 1;
            }
        }
        (b, c)
    }

    pub(crate) fn join_cell(&self, block_cell: usize, comp_cell: usize, block_grid: &Grid, comp_grid: &Grid, j: usize) -> usize {
        let own = self.block_axes(j);
        let mut flat = 0;
        let mut bi = 0;
        let mut ci = 0;
        for a in 0..self.grid.axes() {
            let i = if own.contains(&a) {
                let i = block_grid.axis_index(block_cell, bi);
                bi += 1;
                i
            } else {
                let i = comp_grid.axis_index(comp_cell, ci);
                ci += 1;
                i
            };
            flat += i * self.grid.strides()[a];
        }
        flat
    }

    /// `pi_j(U)` as a single-block region over block `j`'s coordinates.
    pub fn project(&self, j: usize) -> Result<Region> {
        self.shape.check_block(j)?;
        let axes = self.block_axes(j);
        let block_grid = self.grid.sub_grid(&axes);
        let comp_grid = self.grid.sub_grid(&self.complement_axes(j));
        let mut mask = vec![false; block_grid.total_cells()];
        for flat in self.inside_cells() {
            let (b, _) = self.split_cell(flat, &block_grid, &comp_grid, j);
            mask[b] = true;
        }
        let shape = BlockShape::with_limit(vec![self.shape.dim(j)], usize::MAX)?;
        let flags = RecipeFlags {
            bounded: self.recipe.flags.bounded,
            convex: self.recipe.flags.convex,
            connected: self.recipe.flags.connected,
            product: true,
        };
        let mut tag = RecipeTag::new(format!("project({}; block={j})", self.recipe.text), flags);
        tag.poles = self
            .recipe
            .poles
            .iter()
            .filter(|p| p.block == j)
            .map(|p| PoleDecl { block: 0, ..p.clone() })
            .collect();
        Region::from_mask(shape, block_grid, mask, tag)
    }

    /// Block-`j` cell containing the block value `a_j`.
    pub fn block_cell_of(&self, j: usize, a_j: &[Complex64]) -> Result<usize> {
        self.shape.check_block(j)?;
        if a_j.len() != self.shape.dim(j) {
            return Err(Error::ShapeMismatch { expected: self.shape.dim(j), got: a_j.len() });
        }
        let block_grid = self.grid.sub_grid(&self.block_axes(j));
        block_grid.cell_of_point(a_j).ok_or(Error::OffGrid)
    }

    /// `U ∩ pi_j^{-1}({a_j})` as a region over the complementary blocks.
    pub fn slice(&self, j: usize, a_j: &[Complex64]) -> Result<Region> {
        let b = self.block_cell_of(j, a_j)?;
        self.slice_at_cell(j, b)
    }

    pub fn slice_at_cell(&self, j: usize, block_cell: usize) -> Result<Region> {
        let comp_shape = self.shape.without(j)?;
        let block_grid = self.grid.sub_grid(&self.block_axes(j));
        let comp_grid = self.grid.sub_grid(&self.complement_axes(j));
        let mask: Vec<bool> = (0..comp_grid.total_cells())
            .map(|c| self.inside[self.join_cell(block_cell, c, &block_grid, &comp_grid, j)])
            .collect();
        let mut tag = RecipeTag::new(
            format!("slice({}; block={j}, cell={block_cell})", self.recipe.text),
            RecipeFlags { bounded: self.recipe.flags.bounded, ..Default::default() },
        );
        tag.poles = self
            .recipe
            .poles
            .iter()
            .filter(|p| p.block != j)
            .map(|p| PoleDecl { block: if p.block > j { p.block - 1 } else { p.block }, ..p.clone() })
            .collect();
        Region::from_mask(comp_shape, comp_grid, mask, tag)
    }

    /// Cartesian product of regions sharing a grid spacing.
    pub fn product(factors: &[&Region]) -> Result<Region> {
        let Some(first) = factors.first() else {
            return Err(Error::InvalidShape("product of no factors".into()));
        };
        if factors.iter().any(|f| (f.h() - first.h()).abs() > 0.0) {
            return Err(Error::InvalidShape("product factors must share the grid spacing".into()));
        }
        let shape = BlockShape::concat(&factors.iter().map(|f| &f.shape).collect::<Vec<_>>())?;
        let grid = Grid::concat(&factors.iter().map(|f| &f.grid).collect::<Vec<_>>());
        if grid.total_cells() > DEFAULT_MAX_CELLS {
            return Err(Error::GridTooLarge { cells: grid.total_cells(), limit: DEFAULT_MAX_CELLS });
        }
        let sizes: Vec<usize> = factors.iter().map(|f| f.grid.total_cells()).collect();
        let mask: Vec<bool> = (0..grid.total_cells())
            .into_par_iter()
            .map(|flat| {
                let mut rest = flat;
                let mut ok = true;
                for (k, f) in factors.iter().enumerate().rev() {
                    let local = rest % sizes[k];
                    rest /= sizes[k];
                    ok &= f.inside[local];
                }
                ok
            })
            .collect();
        let flags = RecipeFlags {
            bounded: factors.iter().all(|f| f.recipe.flags.bounded),
            convex: factors.iter().all(|f| f.recipe.flags.convex),
            connected: factors.iter().all(|f| f.recipe.flags.connected),
            product: true,
        };
        let texts: Vec<&str> = factors.iter().map(|f| f.recipe.text.as_str()).collect();
        let mut tag = RecipeTag::new(format!("product_of({})", texts.join(" x ")), flags);
        let mut block0 = 0;
        for f in factors {
            for p in &f.recipe.poles {
                tag.poles.push(PoleDecl { block: p.block + block0, ..p.clone() });
            }
            block0 += f.shape.n_blocks();
        }
        Region::from_mask(shape, grid, mask, tag)
    }

    /// `pi_1(U) x ... x pi_n(U)` on the same grid as `self`.
    pub fn product_of_projections(&self) -> Result<Region> {
        let projections = (0..self.shape.n_blocks())
            .map(|j| self.project(j))
            .collect::<Result<Vec<_>>>()?;
        let mut prod = Region::product(&projections.iter().collect::<Vec<_>>())?;
        debug_assert_eq!(prod.grid, self.grid);
        prod.shape = self.shape.clone();
        Ok(prod)
    }

    /// Grid points `p` with `dist_to_complement(p) >= r` and `|p| <= big_r`.
    pub fn sublevel_compact(&self, r: f64, big_r: f64) -> CompactSample {
        let dim = self.shape.total_dim();
        let cells: Vec<u32> = self
            .inside
            .par_iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map_init(
                || vec![Complex64::new(0.0, 0.0); dim],
                |buf, (flat, _)| {
                    if self.cell_dist(flat) < r {
                        return None;
                    }
                    self.grid.write_center(flat, buf);
                    (modulus(buf) <= big_r).then_some(flat as u32)
                },
            )
            .flatten()
            .collect();
        let empty = cells.is_empty();
        CompactSample {
            set: SampleSet::Cells { grid: self.grid.clone(), cells },
            margin: (r - self.h()).max(0.0),
            empty,
            robust: r > 2.0 * self.h(),
        }
    }

    /// Deterministic coarse-to-fine enumeration of every inside cell. Cells
    /// are ordered by dyadic depth band `floor(log2(max_depth / dist))`
    /// (deepest first), then by sub-lattice level (cells whose indices are
    /// all divisible by `2^L` before finer ones, index 0 counting as
    /// coarsest), then by grid order.
    pub fn dense_sequence(&self) -> Result<DenseSequence> {
        if self.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let deepest = self.max_depth();
        let mut keyed: Vec<(u32, u32, u32)> = self
            .inside_cells()
            .map(|flat| {
                let level = (0..self.grid.axes())
                    .map(|a| {
                        let i = self.grid.axis_index(flat, a);
                        if i == 0 { 31 } else { i.trailing_zeros().min(31) }
                    })
                    .min()
                    .unwrap_or(0);
                let band = (deepest / self.cell_dist(flat)).log2().floor().clamp(0.0, 63.0) as u32;
                (band, 31 - level, flat as u32)
            })
            .collect();
        keyed.par_sort_unstable();
        Ok(DenseSequence { grid: self.grid.clone(), cells: keyed.into_iter().map(|(_, _, c)| c).collect() })
    }
}

/// Enumeration `a_1, a_2, ...` of grid points (cell centres).
#[derive(Clone, Debug)]
pub struct DenseSequence {
    grid: Grid,
    cells: Vec<u32>,
}

impl DenseSequence {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[u32] {
        &self.cells
    }

    pub fn point(&self, k: usize) -> PointZ {
        self.grid.center_point(self.cells[k] as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = PointZ> + '_ {
        self.cells.iter().map(|&c| self.grid.center_point(c as usize))
    }
}

/// Finite sample of a compact set, either explicit points or grid cells.
#[derive(Clone, Debug)]
pub enum SampleSet {
    Points { dim: usize, coords: Vec<Complex64> },
    Cells { grid: Grid, cells: Vec<u32> },
}

/// Finite sample of a compact subset `K` of a region with a guaranteed
/// distance `margin` to the complement.
#[derive(Clone, Debug)]
pub struct CompactSample {
    pub set: SampleSet,
    pub margin: f64,
    /// Set when the defining inequalities selected no point.
    pub empty: bool,
    /// False when the sample was requested with `r <= 2h`.
    pub robust: bool,
}

impl CompactSample {
    /// Explicit sample; the margin is computed from the region as the
    /// smallest cell distance minus one grid spacing.
    pub fn from_points(region: &Region, points: Vec<PointZ>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySample);
        }
        let dim = region.shape().total_dim();
        let mut margin = f64::INFINITY;
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in &points {
            margin = margin.min(region.dist_to_complement(p)?);
            coords.extend_from_slice(&p.0);
        }
        Ok(Self {
            set: SampleSet::Points { dim, coords },
            margin: (margin - region.h()).max(0.0),
            empty: false,
            robust: true,
        })
    }

    pub fn len(&self) -> usize {
        match &self.set {
            SampleSet::Points { dim, coords } => coords.len() / dim.max(&1),
            SampleSet::Cells { cells, .. } => cells.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match &self.set {
            SampleSet::Points { dim, .. } => *dim,
            SampleSet::Cells { grid, .. } => grid.axes() / 2,
        }
    }

    pub fn write_point(&self, k: usize, out: &mut [Complex64]) {
        match &self.set {
            SampleSet::Points { dim, coords } => out.copy_from_slice(&coords[k * dim..(k + 1) * dim]),
            SampleSet::Cells { grid, cells } => grid.write_center(cells[k] as usize, out),
        }
    }

    pub fn point(&self, k: usize) -> PointZ {
        let mut v = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.write_point(k, &mut v);
        PointZ(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = PointZ> + '_ {
        (0..self.len()).map(|k| self.point(k))
    }

    /// Grid cells of the sample, when it is in cell form.
    pub fn cells(&self) -> Option<&[u32]> {
        match &self.set {
            SampleSet::Cells { cells, .. } => Some(cells),
            SampleSet::Points { .. } => None,
        }
    }

    /// `max_{w in K} F(w)` for a per-point function, computed in parallel.
    pub fn par_max<F>(&self, f: F) -> f64
    where
        F: Fn(&[Complex64]) -> f64 + Sync,
    {
        let dim = self.dim();
        (0..self.len())
            .into_par_iter()
            .map_init(
                || vec![Complex64::new(0.0, 0.0); dim],
                |buf, k| {
                    self.write_point(k, buf);
                    f(buf)
                },
            )
            .reduce(|| f64::NEG_INFINITY, f64::max)
    }

    /// Union of two samples (explicit form).
    pub fn union(&self, other: &CompactSample) -> CompactSample {
        let dim = self.dim();
        let mut coords = Vec::with_capacity((self.len() + other.len()) * dim);
        let mut buf = vec![Complex64::new(0.0, 0.0); dim];
        for s in [self, other] {
            for k in 0..s.len() {
                s.write_point(k, &mut buf);
                coords.extend_from_slice(&buf);
            }
        }
        CompactSample {
            set: SampleSet::Points { dim, coords },
            margin: self.margin.min(other.margin),
            empty: self.empty && other.empty,
            robust: self.robust && other.robust,
        }
    }
}

#[cfg(test)]
mod tests;
