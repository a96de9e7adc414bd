//! Domain corpus generators.
//!
//! Every recipe builds its mask from an exact analytic membership test at
//! cell centres and declares truthful flags (bounded, convex, connected,
//! product) by construction.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::region::{BlockShape, GridLimits, PoleDecl, RecipeFlags, RecipeTag, Region};

#[derive(Clone, Debug, PartialEq)]
pub enum DomainRecipe {
    /// Product of discs `|z_{j,k}| < radius_j`.
    Polydisk { dims: Vec<usize>, radii: Vec<f64> },
    /// Product of annuli `inner_j < |z_j| < outer_j`, one coordinate per block.
    AnnulusProduct { inner: Vec<f64>, outer: Vec<f64> },
    /// `sum |z|^2 < radius^2`.
    EuclideanBall { dims: Vec<usize>, radius: f64 },
    /// `{|z_1| < 1, |z_2| < 1} \ {|z_1| >= inner, |z_2| <= inner}`.
    HartogsFigure { inner: f64 },
    /// Union over `theta` of `D(e^{i theta}, eps) x D(theta, eps)`, with
    /// `theta` in `[-pi, 2 pi turns - pi]`.
    Spiral { eps: f64, turns: u32 },
    /// Intersection of `seed`-generated half-spaces with the unit cube in the
    /// real coordinates.
    ConvexPolytope { dims: Vec<usize>, faces: usize, seed: u64 },
    ProductOf(Vec<DomainRecipe>),
}

pub const SPIRAL_DEFAULT_EPS: f64 = 0.1;
pub const SPIRAL_DEFAULT_TURNS: u32 = 3;

fn list<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for DomainRecipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Polydisk { dims, radii } => write!(f, "polydisk dims={} radii={}", list(dims), list(radii)),
            Self::AnnulusProduct { inner, outer } => {
                write!(f, "annulus_product inner={} outer={}", list(inner), list(outer))
            }
            Self::EuclideanBall { dims, radius } => write!(f, "euclidean_ball dims={} radius={radius}", list(dims)),
            Self::HartogsFigure { inner } => write!(f, "hartogs_figure inner={inner}"),
            Self::Spiral { eps, turns } => write!(f, "spiral eps={eps} turns={turns}"),
            Self::ConvexPolytope { dims, faces, seed } => {
                write!(f, "convex_polytope dims={} faces={faces} seed={seed}", list(dims))
            }
            Self::ProductOf(parts) => {
                let inner: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "product_of[{}]", inner.join("; "))
            }
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidRecipe(msg.into())
}

fn parse_list<T: std::str::FromStr>(v: &str, key: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| invalid(format!("bad value `{t}` for `{key}`"))))
        .collect()
}

/// Splits `a; b; c` at top-level semicolons (ignoring nested brackets).
fn split_top(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            ';' if depth == 0 => {
                parts.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(s[start..].trim());
    parts.into_iter().filter(|p| !p.is_empty()).collect()
}

impl DomainRecipe {
    pub fn polydisk(radii: &[f64]) -> Self {
        Self::Polydisk { dims: vec![1; radii.len()], radii: radii.to_vec() }
    }

    pub fn spiral_default() -> Self {
        Self::Spiral { eps: SPIRAL_DEFAULT_EPS, turns: SPIRAL_DEFAULT_TURNS }
    }

    /// Parses the textual form produced by `Display`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some(inner) = text.strip_prefix("product_of[").and_then(|t| t.strip_suffix(']')) {
            let parts = split_top(inner).into_iter().map(Self::parse).collect::<Result<Vec<_>>>()?;
            let r = Self::ProductOf(parts);
            r.validate()?;
            return Ok(r);
        }
        let mut toks = text.split_whitespace();
        let name = toks.next().ok_or_else(|| invalid("empty recipe"))?;
        let mut kv = std::collections::BTreeMap::new();
        for t in toks {
            let (k, v) = t.split_once('=').ok_or_else(|| invalid(format!("expected key=value, got `{t}`")))?;
            kv.insert(k.to_string(), v.to_string());
        }
        let get = |k: &str| kv.get(k).map(String::as_str);
        let num = |k: &str, default: Option<f64>| -> Result<f64> {
            match get(k) {
                Some(v) => v.parse().map_err(|_| invalid(format!("bad `{k}`"))),
                None => default.ok_or_else(|| invalid(format!("missing `{k}`"))),
            }
        };
        let recipe = match name {
            "polydisk" => {
                let radii: Vec<f64> = parse_list(get("radii").unwrap_or("1,1"), "radii")?;
                let dims = match get("dims") {
                    Some(d) => parse_list(d, "dims")?,
                    None => vec![1; radii.len()],
                };
                let radii = if radii.len() == 1 { vec![radii[0]; dims.len()] } else { radii };
                Self::Polydisk { dims, radii }
            }
            "annulus_product" => Self::AnnulusProduct {
                inner: parse_list(get("inner").ok_or_else(|| invalid("missing `inner`"))?, "inner")?,
                outer: parse_list(get("outer").ok_or_else(|| invalid("missing `outer`"))?, "outer")?,
            },
            "euclidean_ball" => Self::EuclideanBall {
                dims: parse_list(get("dims").unwrap_or("1,1"), "dims")?,
                radius: num("radius", Some(1.0))?,
            },
            "hartogs_figure" => Self::HartogsFigure { inner: num("inner", Some(0.5))? },
            "spiral" => Self::Spiral {
                eps: num("eps", Some(SPIRAL_DEFAULT_EPS))?,
                turns: match get("turns") {
                    Some(v) => v.parse().map_err(|_| invalid("bad `turns`"))?,
                    None => SPIRAL_DEFAULT_TURNS,
                },
            },
            "convex_polytope" => Self::ConvexPolytope {
                dims: parse_list(get("dims").unwrap_or("1,1"), "dims")?,
                faces: num("faces", Some(8.0))? as usize,
                seed: num("seed", Some(0.0))? as u64,
            },
            other => return Err(invalid(format!("unknown recipe `{other}`"))),
        };
        recipe.validate()?;
        Ok(recipe)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64, what: &str| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!("{what} must be positive and finite")))
            }
        };
        match self {
            Self::Polydisk { dims, radii } => {
                if dims.len() != radii.len() {
                    return Err(invalid("polydisk needs one radius per block"));
                }
                radii.iter().try_for_each(|&r| positive(r, "radius"))
            }
            Self::AnnulusProduct { inner, outer } => {
                if inner.len() != outer.len() || inner.is_empty() {
                    return Err(invalid("annulus_product needs matching inner/outer lists"));
                }
                for (&a, &b) in inner.iter().zip(outer) {
                    positive(a, "inner radius")?;
                    if b <= a {
                        return Err(invalid("outer radius must exceed inner radius"));
                    }
                }
                Ok(())
            }
            Self::EuclideanBall { radius, .. } => positive(*radius, "radius"),
            Self::HartogsFigure { inner } => {
                if *inner > 0.0 && *inner < 1.0 {
                    Ok(())
                } else {
                    Err(invalid("hartogs inner radius must lie in (0, 1)"))
                }
            }
            Self::Spiral { eps, turns } => {
                if !(*eps > 0.0 && *eps < 0.5) {
                    return Err(invalid("spiral requires 0 < eps < 0.5"));
                }
                if *turns == 0 {
                    return Err(invalid("spiral requires at least one turn"));
                }
                Ok(())
            }
            Self::ConvexPolytope { faces, .. } => {
                if *faces == 0 {
                    Err(invalid("convex_polytope needs at least one face"))
                } else {
                    Ok(())
                }
            }
            Self::ProductOf(parts) => {
                if parts.is_empty() {
                    return Err(invalid("product_of needs factors"));
                }
                parts.iter().try_for_each(|p| p.validate())
            }
        }
    }

    pub fn flags(&self) -> RecipeFlags {
        match self {
            Self::Polydisk { .. } => RecipeFlags { bounded: true, convex: true, connected: true, product: true },
            Self::AnnulusProduct { .. } => RecipeFlags { bounded: true, convex: false, connected: true, product: true },
            Self::EuclideanBall { dims, .. } | Self::ConvexPolytope { dims, .. } => {
                RecipeFlags { bounded: true, convex: true, connected: true, product: dims.len() == 1 }
            }
            Self::HartogsFigure { .. } | Self::Spiral { .. } => {
                RecipeFlags { bounded: true, convex: false, connected: true, product: false }
            }
            Self::ProductOf(parts) => {
                let f: Vec<RecipeFlags> = parts.iter().map(|p| p.flags()).collect();
                RecipeFlags {
                    bounded: f.iter().all(|x| x.bounded),
                    convex: f.iter().all(|x| x.convex),
                    connected: f.iter().all(|x| x.connected),
                    product: true,
                }
            }
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        match self {
            Self::Polydisk { dims, .. } | Self::EuclideanBall { dims, .. } | Self::ConvexPolytope { dims, .. } => {
                dims.clone()
            }
            Self::AnnulusProduct { inner, .. } => vec![1; inner.len()],
            Self::HartogsFigure { .. } | Self::Spiral { .. } => vec![1, 1],
            Self::ProductOf(parts) => parts.iter().flat_map(|p| p.dims()).collect(),
        }
    }

    /// Declared bounded complement components of the block projections.
    pub fn poles(&self) -> Vec<PoleDecl> {
        let zero = Complex64::new(0.0, 0.0);
        match self {
            Self::AnnulusProduct { inner, .. } => {
                (0..inner.len()).map(|b| PoleDecl { block: b, coord: 0, location: zero }).collect()
            }
            Self::Spiral { .. } => vec![PoleDecl { block: 0, coord: 0, location: zero }],
            Self::ProductOf(parts) => {
                let mut out = Vec::new();
                let mut offset = 0;
                for p in parts {
                    for pole in p.poles() {
                        out.push(PoleDecl { block: pole.block + offset, ..pole });
                    }
                    offset += p.dims().len();
                }
                out
            }
            _ => Vec::new(),
        }
    }

    /// Per-real-axis bounding box of the open set.
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let total: usize = self.dims().iter().sum();
        match self {
            Self::Polydisk { dims, radii } => {
                let mut hi = Vec::new();
                for (&l, &r) in dims.iter().zip(radii) {
                    hi.extend(std::iter::repeat_n(r, 2 * l));
                }
                (hi.iter().map(|x| -x).collect(), hi)
            }
            Self::AnnulusProduct { outer, .. } => {
                let hi: Vec<f64> = outer.iter().flat_map(|&r| [r, r]).collect();
                (hi.iter().map(|x| -x).collect(), hi)
            }
            Self::EuclideanBall { radius, .. } => (vec![-radius; 2 * total], vec![*radius; 2 * total]),
            Self::HartogsFigure { .. } => (vec![-1.0; 4], vec![1.0; 4]),
            Self::ConvexPolytope { .. } => (vec![-1.0; 2 * total], vec![1.0; 2 * total]),
            Self::Spiral { eps, turns } => {
                let (t0, t1) = spiral_range(*turns);
                let r = 1.0 + eps;
                (vec![-r, -r, t0 - eps, -eps], vec![r, r, t1 + eps, *eps])
            }
            Self::ProductOf(parts) => {
                let mut lo = Vec::new();
                let mut hi = Vec::new();
                for p in parts {
                    let (a, b) = p.bounds();
                    lo.extend(a);
                    hi.extend(b);
                }
                (lo, hi)
            }
        }
    }

    fn membership(&self) -> Box<dyn Fn(&[Complex64]) -> bool + Sync + Send> {
        match self.clone() {
            Self::Polydisk { dims, radii } => {
                let per_coord: Vec<f64> =
                    dims.iter().zip(&radii).flat_map(|(&l, &r)| std::iter::repeat_n(r, l)).collect();
                Box::new(move |z| z.iter().zip(&per_coord).all(|(w, &r)| w.norm() < r))
            }
            Self::AnnulusProduct { inner, outer } => Box::new(move |z| {
                z.iter().zip(inner.iter().zip(&outer)).all(|(w, (&a, &b))| {
                    let m = w.norm();
                    a < m && m < b
                })
            }),
            Self::EuclideanBall { radius, .. } => {
                Box::new(move |z| z.iter().map(|w| w.norm_sqr()).sum::<f64>() < radius * radius)
            }
            Self::HartogsFigure { inner } => Box::new(move |z| {
                let (a, b) = (z[0].norm(), z[1].norm());
                a < 1.0 && b < 1.0 && !(a >= inner && b <= inner)
            }),
            Self::Spiral { eps, turns } => Box::new(move |z| spiral_contains(z[0], z[1], eps, turns)),
            Self::ConvexPolytope { dims, faces, seed } => {
                let axes = 2 * dims.iter().sum::<usize>();
                let planes = polytope_planes(axes, faces, seed);
                Box::new(move |z| {
                    let x: Vec<f64> = z.iter().flat_map(|w| [w.re, w.im]).collect();
                    x.iter().all(|v| v.abs() < 1.0)
                        && planes.iter().all(|(a, b)| a.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() < *b)
                })
            }
            Self::ProductOf(parts) => {
                let tests: Vec<(usize, Box<dyn Fn(&[Complex64]) -> bool + Sync + Send>)> =
                    parts.iter().map(|p| (p.dims().iter().sum(), p.membership())).collect();
                Box::new(move |z| {
                    let mut start = 0;
                    tests.iter().all(|(len, t)| {
                        let ok = t(&z[start..start + len]);
                        start += len;
                        ok
                    })
                })
            }
        }
    }
}

fn spiral_range(turns: u32) -> (f64, f64) {
    (-PI, 2.0 * PI * turns as f64 - PI)
}

/// Exact membership in the truncated spiral domain.
pub fn spiral_contains(z1: Complex64, z2: Complex64, eps: f64, turns: u32) -> bool {
    let (t0, t1) = spiral_range(turns);
    let y2 = z2.im * z2.im;
    if y2 >= eps * eps {
        return false;
    }
    let s = (eps * eps - y2).sqrt();
    let lo = (z2.re - s).max(t0);
    let hi = (z2.re + s).min(t1);
    if lo > hi {
        return false;
    }
    let r = z1.norm();
    if r == 0.0 {
        return false;
    }
    let phi = z1.arg();
    let dist_sq = |theta: f64| (z1 - Complex64::from_polar(1.0, theta)).norm_sqr();
    let mut best = dist_sq(lo).min(dist_sq(hi));
    let k_lo = ((lo - phi) / (2.0 * PI)).ceil() as i64;
    let k_hi = ((hi - phi) / (2.0 * PI)).floor() as i64;
    for k in k_lo..=k_hi {
        best = best.min(dist_sq(phi + 2.0 * PI * k as f64));
    }
    best < eps * eps
}

fn polytope_planes(axes: usize, faces: usize, seed: u64) -> Vec<(Vec<f64>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..faces)
        .map(|_| {
            let mut a: Vec<f64> = (0..axes).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            a.iter_mut().for_each(|x| *x /= norm);
            (a, rng.gen_range(0.4..0.9))
        })
        .collect()
}

/// Builds the grid region of a recipe at spacing `h`.
pub fn make_region(recipe: &DomainRecipe, h: f64) -> Result<Region> {
    make_region_with(recipe, h, GridLimits::default())
}

pub fn make_region_with(recipe: &DomainRecipe, h: f64, limits: GridLimits) -> Result<Region> {
    recipe.validate()?;
    let shape = BlockShape::new(recipe.dims())?;
    let (lo, hi) = recipe.bounds();
    let mut tag = RecipeTag::new(recipe.to_string(), recipe.flags());
    tag.poles = recipe.poles();
    let member = recipe.membership();
    Region::from_membership(shape, h, &lo, &hi, tag, limits, member)
}


/// Builds a region from a region file: a stored mask is loaded bit-exactly,
/// otherwise the recipe is regenerated at the file's spacing (or `h_override`).
pub fn region_from_text(text: &str, h_override: Option<f64>) -> Result<Region> {
    let file = crate::region::io::RegionFile::parse(text)?;
    if file.mask.is_some() {
        return file.into_region();
    }
    let recipe = DomainRecipe::parse(&file.recipe)?;
    make_region(&recipe, h_override.unwrap_or(file.h))
}
