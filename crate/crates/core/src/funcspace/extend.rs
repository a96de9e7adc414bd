//! Extension of a `C^n`-holomorphic tuple on a convex region to the product
//! of its projections.

use std::sync::Arc;

use num_complex::Complex64;

use super::{CnFunction, Component, ExtendedComponent};
use crate::error::{Error, Result};
use crate::region::Region;

/// Returns `g` on `project(U,1) x ... x project(U,n)` with `g_j(z) = f_j(z_j, w)`
/// for a fixed point `w` of the slice over the block cell of `z_j`: the
/// lexicographically smallest slice cell centre. Convex slices are connected,
/// so the choice does not matter for block-local `f`.
pub fn extend_to_product(f: &CnFunction, region: &Region) -> Result<(CnFunction, Region)> {
    if !region.recipe().flags.convex {
        return Err(Error::RecipeFlag("convex"));
    }
    if f.shape != *region.shape() {
        return Err(Error::InvalidShape(format!("function on {} extended from region {}", f.shape, region.shape())));
    }
    let product = region.product_of_projections()?;
    let grid = region.grid();
    let dim = region.shape().total_dim();
    let mut components = Vec::with_capacity(f.n_blocks());
    for (j, source) in f.components.iter().enumerate() {
        if source.is_zero() {
            components.push(Component::Zero);
            continue;
        }
        let block_grid = grid.sub_grid(&region.block_axes(j));
        let comp_grid = grid.sub_grid(&region.complement_axes(j));
        let mut reps: Vec<(u32, Vec<Complex64>)> = Vec::new();
        for flat in region.inside_cells() {
            let (b, _) = region.split_cell(flat, &block_grid, &comp_grid, j);
            match reps.binary_search_by_key(&(b as u32), |(c, _)| *c) {
                Ok(_) => {}
                Err(pos) => {
                    let mut p = vec![Complex64::new(0.0, 0.0); dim];
                    grid.write_center(flat, &mut p);
                    reps.insert(pos, (b as u32, p));
                }
            }
        }
        if reps.is_empty() {
            return Err(Error::EmptySlice);
        }
        components.push(Component::Extended(ExtendedComponent {
            source: Arc::new(source.clone()),
            block: j,
            shape: f.shape.clone(),
            block_grid,
            reps,
        }));
    }
    let g = CnFunction::new(f.shape.clone(), components, format!("ext({})", f.label))?;
    Ok((g, product))
}
