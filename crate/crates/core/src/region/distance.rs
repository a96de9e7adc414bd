use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{Grid, Region};

/// Sup-norm distance from every inside cell centre to the complement, where
/// complement cells count as closed boxes.
///
/// Distances are exact integers in squared half-cell units per complex plane
/// (`d = h/2 * sqrt(v)`), propagated from boundary complement cells by a
/// nearest-site Dijkstra over inside cells.
#[derive(Clone, Debug)]
pub struct DistanceField {
    h: f64,
    sq: Vec<u32>,
    site: Vec<u32>,
    max_sq: u32,
}

/// Squared half-unit distance from the centre of cell `from` to the box of
/// cell `site`: per axis `max(2|i - c| - 1, 0)`, combined as Euclidean within
/// each complex plane and maximised across planes.
pub(crate) fn half_unit_sq(grid: &Grid, from: usize, site: usize) -> u32 {
    let mut best = 0u32;
    for plane in 0..grid.axes() / 2 {
        let mut s = 0u32;
        for a in [2 * plane, 2 * plane + 1] {
            let i = grid.axis_index(from, a) as i64;
            let c = grid.axis_index(site, a) as i64;
            let d = (2 * (i - c).abs() - 1).max(0) as u32;
            s += d * d;
        }
        best = best.max(s);
    }
    best
}

impl DistanceField {
    pub(crate) fn compute(region: &Region) -> Self {
        let grid = region.grid();
        let n = grid.total_cells();
        let mut sq = vec![0u32; n];
        let mut site = vec![u32::MAX; n];
        let mut heap = BinaryHeap::new();

        for flat in region.inside_cells() {
            sq[flat] = u32::MAX;
        }
        for flat in 0..n {
            if region.is_inside_cell(flat) {
                continue;
            }
            grid.for_each_neighbor(flat, |nb| {
                if region.is_inside_cell(nb) {
                    let d = half_unit_sq(grid, nb, flat);
                    if d < sq[nb] || (d == sq[nb] && (flat as u32) < site[nb]) {
                        sq[nb] = d;
                        site[nb] = flat as u32;
                        heap.push(Reverse((d, nb as u32)));
                    }
                }
            });
        }

        while let Some(Reverse((d, cell))) = heap.pop() {
            let cell = cell as usize;
            if d != sq[cell] {
                continue;
            }
            let s = site[cell];
            grid.for_each_neighbor(cell, |nb| {
                if !region.is_inside_cell(nb) {
                    return;
                }
                let cand = half_unit_sq(grid, nb, s as usize);
                if cand < sq[nb] || (cand == sq[nb] && s < site[nb]) {
                    let improved = cand < sq[nb];
                    sq[nb] = cand;
                    site[nb] = s;
                    if improved {
                        heap.push(Reverse((cand, nb as u32)));
                    }
                }
            });
        }

        let max_sq = region.inside_cells().map(|c| sq[c]).max().unwrap_or(0);
        Self { h: grid.h(), sq, site, max_sq }
    }

    /// Distance of cell `flat`'s centre; zero for complement cells.
    pub fn dist(&self, flat: usize) -> f64 {
        0.5 * self.h * (self.sq[flat] as f64).sqrt()
    }

    /// Largest distance over inside cells.
    pub fn max_dist(&self) -> f64 {
        0.5 * self.h * (self.max_sq as f64).sqrt()
    }

    /// Distance from an arbitrary point in cell `flat` to the box of the
    /// cell's nearest complement site.
    pub fn dist_point(&self, grid: &Grid, flat: usize, z: &[num_complex::Complex64]) -> f64 {
        let site = self.site[flat];
        if site == u32::MAX {
            return 0.0;
        }
        let h = grid.h();
        let mut best = 0.0f64;
        for (k, w) in z.iter().enumerate() {
            let gap = |v: f64, axis: usize| {
                let lo = grid.lo(axis) + grid.axis_index(site as usize, axis) as f64 * h;
                let hi = lo + h;
                (lo - v).max(v - hi).max(0.0)
            };
            let dx = gap(w.re, 2 * k);
            let dy = gap(w.im, 2 * k + 1);
            best = best.max((dx * dx + dy * dy).sqrt());
        }
        best
    }

    pub fn raw(&self, flat: usize) -> u32 {
        self.sq[flat]
    }
}
