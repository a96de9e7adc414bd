//! Textual region files.
//!
//! ```text
//! blockholo-region v1
//! shape 1 1
//! h 0.0625
//! bbox -1.0625 1.0625 -1.0625 1.0625 ...
//! recipe polydisk radii=1,1
//! flags bounded convex connected product
//! pole 0 0 0 0
//! mask rle
//! r 34 12 ...
//! end
//! ```
//!
//! `bbox` lists `lo hi` per real axis. The mask section is optional; each
//! `r` line run-length encodes one row along the last axis, alternating
//! outside/inside runs and starting with an outside run. Floats are written
//! in shortest round-trip form so files reload bit-exactly.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::{BlockShape, Grid, PoleDecl, RecipeFlags, RecipeTag, Region};
use crate::error::{Error, Result};

pub const REGION_MAGIC: &str = "blockholo-region v1";

/// Parsed contents of a region file.
#[derive(Clone, Debug)]
pub struct RegionFile {
    pub dims: Vec<usize>,
    pub h: f64,
    pub bbox: Option<Vec<(f64, f64)>>,
    pub recipe: String,
    pub flags: Option<RecipeFlags>,
    pub poles: Vec<PoleDecl>,
    pub mask: Option<Vec<bool>>,
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>().map_err(|_| perr(line, format!("bad number `{tok}`")))
}

impl RegionFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        match lines.next() {
            Some((_, l)) if l == REGION_MAGIC => {}
            _ => return Err(perr(1, format!("expected header `{REGION_MAGIC}`"))),
        }
        let mut dims = None;
        let mut h = None;
        let mut bbox = None;
        let mut recipe = None;
        let mut flags = None;
        let mut poles = Vec::new();
        let mut rows: Option<Vec<Vec<usize>>> = None;
        for (ln, line) in lines {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let toks: Vec<&str> = rest.split_whitespace().collect();
            match key {
                "shape" => {
                    dims = Some(
                        toks.iter()
                            .map(|t| t.parse::<usize>().map_err(|_| perr(ln, "bad block dimension")))
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                "h" => h = Some(parse_f64(toks.first().ok_or_else(|| perr(ln, "missing h"))?, ln)?),
                "bbox" => {
                    if toks.len() % 2 != 0 {
                        return Err(perr(ln, "bbox needs lo/hi pairs"));
                    }
                    let vals = toks.iter().map(|t| parse_f64(t, ln)).collect::<Result<Vec<_>>>()?;
                    bbox = Some(vals.chunks(2).map(|c| (c[0], c[1])).collect());
                }
                "recipe" => recipe = Some(rest.trim().to_string()),
                "flags" => {
                    let mut f = RecipeFlags::default();
                    for t in &toks {
                        match *t {
                            "bounded" => f.bounded = true,
                            "convex" => f.convex = true,
                            "connected" => f.connected = true,
                            "product" => f.product = true,
                            other => return Err(perr(ln, format!("unknown flag `{other}`"))),
                        }
                    }
                    flags = Some(f);
                }
                "pole" => {
                    if toks.len() != 4 {
                        return Err(perr(ln, "pole needs: block coord re im"));
                    }
                    poles.push(PoleDecl {
                        block: toks[0].parse().map_err(|_| perr(ln, "bad pole block"))?,
                        coord: toks[1].parse().map_err(|_| perr(ln, "bad pole coordinate"))?,
                        location: Complex64::new(parse_f64(toks[2], ln)?, parse_f64(toks[3], ln)?),
                    });
                }
                "mask" => {
                    if toks.first() != Some(&"rle") {
                        return Err(perr(ln, "only `mask rle` is supported"));
                    }
                    rows = Some(Vec::new());
                }
                "r" => {
                    let runs = toks
                        .iter()
                        .map(|t| t.parse::<usize>().map_err(|_| perr(ln, "bad run length")))
                        .collect::<Result<Vec<_>>>()?;
                    rows.as_mut().ok_or_else(|| perr(ln, "row before `mask rle`"))?.push(runs);
                }
                "end" => break,
                other => return Err(perr(ln, format!("unknown key `{other}`"))),
            }
        }
        let dims = dims.ok_or_else(|| perr(0, "missing `shape`"))?;
        let h = h.ok_or_else(|| perr(0, "missing `h`"))?;
        let recipe = recipe.ok_or_else(|| perr(0, "missing `recipe`"))?;
        let mask = match rows {
            None => None,
            Some(rows) => {
                let mut mask = Vec::new();
                for runs in rows {
                    let mut inside = false;
                    for r in runs {
                        mask.extend(std::iter::repeat_n(inside, r));
                        inside = !inside;
                    }
                }
                Some(mask)
            }
        };
        Ok(Self { dims, h, bbox, recipe, flags, poles, mask })
    }

    /// Builds the region from an explicit mask. Fails if the file has none.
    pub fn into_region(self) -> Result<Region> {
        let shape = BlockShape::new(self.dims)?;
        let bbox = self.bbox.ok_or_else(|| perr(0, "a stored mask requires `bbox`"))?;
        let mask = self.mask.ok_or_else(|| perr(0, "file has no mask section"))?;
        let h = self.h;
        let origin: Vec<i64> = bbox.iter().map(|(lo, _)| (lo / h).round() as i64).collect();
        let counts: Vec<usize> = bbox
            .iter()
            .zip(&origin)
            .map(|((_, hi), o)| ((hi / h).round() as i64 - o) as usize)
            .collect();
        let grid = Grid::new(h, origin, counts);
        let mut tag = RecipeTag::new(self.recipe, self.flags.unwrap_or_default());
        tag.poles = self.poles;
        Region::from_mask(shape, grid, mask, tag)
    }
}

impl Region {
    /// Serialises the region including its run-length encoded mask.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let g = self.grid();
        let _ = writeln!(out, "{REGION_MAGIC}");
        let dims: Vec<String> = self.shape().dims().iter().map(|d| d.to_string()).collect();
        let _ = writeln!(out, "shape {}", dims.join(" "));
        let _ = writeln!(out, "h {:?}", g.h());
        let bbox: Vec<String> = (0..g.axes()).map(|a| format!("{:?} {:?}", g.lo(a), g.hi(a))).collect();
        let _ = writeln!(out, "bbox {}", bbox.join(" "));
        let _ = writeln!(out, "recipe {}", self.recipe().text);
        let _ = writeln!(out, "flags {}", self.recipe().flags.names().join(" "));
        for p in &self.recipe().poles {
            let _ = writeln!(out, "pole {} {} {:?} {:?}", p.block, p.coord, p.location.re, p.location.im);
        }
        let _ = writeln!(out, "mask rle");
        let row_len = *g.counts().last().unwrap_or(&1);
        for row in self.mask().chunks(row_len) {
            let mut runs = Vec::new();
            let mut current = false;
            let mut len = 0usize;
            for &b in row {
                if b == current {
                    len += 1;
                } else {
                    runs.push(len);
                    current = b;
                    len = 1;
                }
            }
            runs.push(len);
            let runs: Vec<String> = runs.iter().map(|r| r.to_string()).collect();
            let _ = writeln!(out, "r {}", runs.join(" "));
        }
        let _ = writeln!(out, "end");
        out
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}
