//! Textual function and family files.
//!
//! ```text
//! blockholo-family v1
//! shape 1 1
//! degree 2
//! center 0 0.0 0.0
//! center 1 0.0 0.0
//! pole 1 0 0.0 0.0
//! leaf 0
//! member z1^2
//! comp 0 poly 0.0 0.0
//! mono 2 1.0 0.0
//! comp 1 zero
//! end
//! ```
//!
//! A `poly` or `leaf` line carries the centre (`re im` per block
//! coordinate); `mono` lines give exponents then the coefficient, and
//! `laurent coord pole_re pole_im power re im` a Laurent term. `leaf`
//! components add `logpow p re im` lines and rebuild their lift from the
//! region at load time. Black boxes are limited to `mixed` (with
//! `mterm re im z a.. zbar b..` lines) and `modulus k`. Floats are written in
//! shortest round-trip form.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::family::{FunctionFamily, Provenance};
use super::{BlackBox, BlockPolynomial, BuiltinSpec, CnFunction, Component, LeafFunction, MixedTerm};
use crate::error::{Error, Result};
use crate::leafspace::LeafLift;
use crate::region::{BlockShape, PoleDecl, Region};

pub const FAMILY_MAGIC: &str = "blockholo-family v1";

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn fmt_c(c: Complex64) -> String {
    format!("{:?} {:?}", c.re, c.im)
}

fn write_poly_terms(out: &mut String, p: &BlockPolynomial) {
    for m in &p.terms {
        let e: Vec<String> = m.exponents.iter().map(|e| e.to_string()).collect();
        let _ = writeln!(out, "mono {} {}", e.join(" "), fmt_c(m.coeff));
    }
    for t in &p.laurent {
        let _ = writeln!(out, "laurent {} {} {} {}", t.coord, fmt_c(t.pole), t.power, fmt_c(t.coeff));
    }
}

fn centre_text(p: &BlockPolynomial) -> String {
    p.center.iter().map(|c| fmt_c(*c)).collect::<Vec<_>>().join(" ")
}

fn write_component(out: &mut String, i: usize, c: &Component) -> Result<()> {
    match c {
        Component::Zero => {
            let _ = writeln!(out, "comp {i} zero");
        }
        Component::Poly(p) => {
            let _ = writeln!(out, "comp {i} poly {}", centre_text(p));
            write_poly_terms(out, p);
        }
        Component::Leaf(l) => {
            let _ = writeln!(out, "comp {i} leaf {}", centre_text(&l.poly));
            write_poly_terms(out, &l.poly);
            for &(p, c) in &l.log_powers {
                let _ = writeln!(out, "logpow {p} {}", fmt_c(c));
            }
        }
        Component::BlackBox(b) => match &b.spec {
            Some(BuiltinSpec::Mixed(terms)) => {
                let _ = writeln!(out, "comp {i} mixed");
                for t in terms {
                    let z: Vec<String> = t.z.iter().map(|e| e.to_string()).collect();
                    let zb: Vec<String> = t.zbar.iter().map(|e| e.to_string()).collect();
                    let _ = writeln!(out, "mterm {} z {} zbar {}", fmt_c(t.coeff), z.join(" "), zb.join(" "));
                }
            }
            Some(BuiltinSpec::Modulus(k)) => {
                let _ = writeln!(out, "comp {i} modulus {k}");
            }
            None => return Err(Error::Unsupported(format!("black box `{}` has no textual form", b.name))),
        },
        Component::Extended(_) | Component::Product(..) => {
            return Err(Error::Unsupported("derived components have no textual form".into()))
        }
    }
    Ok(())
}

impl FunctionFamily {
    pub fn to_text(&self) -> Result<String> {
        let mut out = String::new();
        let _ = writeln!(out, "{FAMILY_MAGIC}");
        let dims: Vec<String> = self.shape.dims().iter().map(|d| d.to_string()).collect();
        let _ = writeln!(out, "shape {}", dims.join(" "));
        let _ = writeln!(out, "degree {}", self.provenance.degree);
        for (j, c) in self.provenance.centers.iter().enumerate() {
            let cs: Vec<String> = c.iter().map(|c| fmt_c(*c)).collect();
            let _ = writeln!(out, "center {j} {}", cs.join(" "));
        }
        for p in &self.provenance.poles {
            let _ = writeln!(out, "pole {} {} {}", p.block, p.coord, fmt_c(p.location));
        }
        for j in &self.provenance.leaf_lifts {
            let _ = writeln!(out, "leaf {j}");
        }
        for m in &self.members {
            let _ = writeln!(out, "member {}", m.label);
            for (i, c) in m.components.iter().enumerate() {
                write_component(&mut out, i, c)?;
            }
        }
        let _ = writeln!(out, "end");
        Ok(out)
    }

    /// Parses a family file. Leaf components need `region` to rebuild their
    /// lifts.
    pub fn parse(text: &str, region: Option<&Region>) -> Result<Self> {
        Parser::new(text, region)?.run()
    }

    pub fn load(path: &std::path::Path, region: Option<&Region>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, region)
    }
}

enum Pending {
    None,
    Poly(BlockPolynomial),
    Leaf(BlockPolynomial, Vec<(u32, Complex64)>),
    Mixed(Vec<MixedTerm>),
}

struct MemberBuilder {
    label: String,
    comps: Vec<Option<Component>>,
    current: Option<usize>,
    pending: Pending,
}

struct Parser<'a> {
    lines: Vec<(usize, &'a str)>,
    region: Option<&'a Region>,
    lifts: Vec<Option<LeafLift>>,
}

fn nums(toks: &[&str], ln: usize) -> Result<Vec<f64>> {
    toks.iter().map(|t| t.parse::<f64>().map_err(|_| perr(ln, format!("bad number `{t}`")))).collect()
}

fn ints<T: std::str::FromStr>(toks: &[&str], ln: usize) -> Result<Vec<T>> {
    toks.iter().map(|t| t.parse::<T>().map_err(|_| perr(ln, format!("bad integer `{t}`")))).collect()
}

fn complexes(vals: &[f64]) -> Vec<Complex64> {
    vals.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, region: Option<&'a Region>) -> Result<Self> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        match lines.first() {
            Some((_, l)) if *l == FAMILY_MAGIC => {}
            _ => return Err(perr(1, format!("expected header `{FAMILY_MAGIC}`"))),
        }
        Ok(Self { lines, region, lifts: Vec::new() })
    }

    fn lift(&mut self, j: usize, ln: usize) -> Result<LeafLift> {
        let region = self.region.ok_or_else(|| perr(ln, "leaf components need a region"))?;
        if self.lifts.len() <= j {
            self.lifts.resize(j + 1, None);
        }
        if self.lifts[j].is_none() {
            self.lifts[j] = Some(LeafLift::new(region, j)?);
        }
        Ok(self.lifts[j].clone().expect("lift just built"))
    }

    fn finish_component(&mut self, shape: &BlockShape, m: &mut MemberBuilder, ln: usize) -> Result<()> {
        let Some(i) = m.current.take() else { return Ok(()) };
        let comp = match std::mem::replace(&mut m.pending, Pending::None) {
            Pending::None => return Ok(()),
            Pending::Poly(p) => Component::Poly(p),
            Pending::Leaf(poly, log_powers) => {
                let lift = self.lift(poly.block, ln)?;
                Component::Leaf(LeafFunction { poly, log_powers, lift })
            }
            Pending::Mixed(terms) => {
                if terms.iter().any(|t| t.z.len() != shape.total_dim() || t.zbar.len() != shape.total_dim()) {
                    return Err(perr(ln, "mixed term exponents must cover every coordinate"));
                }
                Component::BlackBox(BlackBox::from_spec(BuiltinSpec::Mixed(terms)))
            }
        };
        m.comps[i] = Some(comp);
        Ok(())
    }

    fn finish_member(&mut self, shape: &BlockShape, mut m: MemberBuilder, ln: usize) -> Result<CnFunction> {
        self.finish_component(shape, &mut m, ln)?;
        let comps = m
            .comps
            .into_iter()
            .enumerate()
            .map(|(i, c)| c.ok_or_else(|| perr(ln, format!("member `{}` lacks component {i}", m.label))))
            .collect::<Result<Vec<_>>>()?;
        CnFunction::new(shape.clone(), comps, m.label)
    }

    fn run(mut self) -> Result<FunctionFamily> {
        let lines = std::mem::take(&mut self.lines);
        let mut shape: Option<BlockShape> = None;
        let mut prov = Provenance { degree: 0, centers: Vec::new(), poles: Vec::new(), leaf_lifts: Vec::new() };
        let mut members = Vec::new();
        let mut member: Option<MemberBuilder> = None;
        let mut ended = false;
        for &(ln, line) in &lines[1..] {
            let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let toks: Vec<&str> = rest.split_whitespace().collect();
            let need_shape = || shape.clone().ok_or_else(|| perr(ln, "`shape` must come first"));
            match key {
                "shape" => shape = Some(BlockShape::new(ints(&toks, ln)?)?),
                "degree" => prov.degree = *ints::<u32>(&toks, ln)?.first().ok_or_else(|| perr(ln, "missing degree"))?,
                "center" => {
                    let j: usize = ints(&toks[..1.min(toks.len())], ln)?.first().copied().ok_or_else(|| perr(ln, "missing block"))?;
                    if j != prov.centers.len() {
                        return Err(perr(ln, "centers must be listed in block order"));
                    }
                    prov.centers.push(complexes(&nums(&toks[1..], ln)?));
                }
                "pole" => {
                    if toks.len() != 4 {
                        return Err(perr(ln, "pole needs: block coord re im"));
                    }
                    let bc: Vec<usize> = ints(&toks[..2], ln)?;
                    let v = nums(&toks[2..], ln)?;
                    prov.poles.push(PoleDecl { block: bc[0], coord: bc[1], location: Complex64::new(v[0], v[1]) });
                }
                "leaf" => prov.leaf_lifts.push(*ints::<usize>(&toks, ln)?.first().ok_or_else(|| perr(ln, "missing block"))?),
                "member" => {
                    let shape = need_shape()?;
                    if let Some(m) = member.take() {
                        members.push(self.finish_member(&shape, m, ln)?);
                    }
                    member = Some(MemberBuilder {
                        label: rest.trim().to_string(),
                        comps: vec![None; shape.n_blocks()],
                        current: None,
                        pending: Pending::None,
                    });
                }
                "comp" => {
                    let shape = need_shape()?;
                    let m = member.as_mut().ok_or_else(|| perr(ln, "`comp` outside a member"))?;
                    self.finish_component(&shape, m, ln)?;
                    if toks.len() < 2 {
                        return Err(perr(ln, "comp needs: index kind"));
                    }
                    let i: usize = toks[0].parse().map_err(|_| perr(ln, "bad component index"))?;
                    if i >= shape.n_blocks() {
                        return Err(perr(ln, "component index out of range"));
                    }
                    m.current = Some(i);
                    match toks[1] {
                        "zero" => m.comps[i] = Some(Component::Zero),
                        "poly" | "leaf" => {
                            let center = complexes(&nums(&toks[2..], ln)?);
                            let p = BlockPolynomial::new(&shape, i, center)?;
                            m.pending =
                                if toks[1] == "poly" { Pending::Poly(p) } else { Pending::Leaf(p, Vec::new()) };
                        }
                        "mixed" => m.pending = Pending::Mixed(Vec::new()),
                        "modulus" => {
                            let k: usize = toks.get(2).ok_or_else(|| perr(ln, "missing coordinate"))?.parse().map_err(|_| perr(ln, "bad coordinate"))?;
                            if k >= shape.total_dim() {
                                return Err(perr(ln, "coordinate out of range"));
                            }
                            m.comps[i] = Some(Component::BlackBox(BlackBox::from_spec(BuiltinSpec::Modulus(k))));
                        }
                        other => return Err(perr(ln, format!("unknown component kind `{other}`"))),
                    }
                }
                "mono" | "laurent" | "logpow" | "mterm" => {
                    let m = member.as_mut().ok_or_else(|| perr(ln, "term outside a member"))?;
                    let poly = match &mut m.pending {
                        Pending::Poly(p) | Pending::Leaf(p, _) => Some(p),
                        _ => None,
                    };
                    match key {
                        "mono" => {
                            let p = poly.ok_or_else(|| perr(ln, "`mono` outside a poly or leaf component"))?;
                            let dim = p.dim();
                            if toks.len() != dim + 2 {
                                return Err(perr(ln, format!("mono needs {dim} exponents and a coefficient")));
                            }
                            let e: Vec<u32> = ints(&toks[..dim], ln)?;
                            let c = nums(&toks[dim..], ln)?;
                            p.terms.push(super::Monomial { exponents: e, coeff: Complex64::new(c[0], c[1]) });
                        }
                        "laurent" => {
                            let p = poly.ok_or_else(|| perr(ln, "`laurent` outside a poly or leaf component"))?;
                            if toks.len() != 6 {
                                return Err(perr(ln, "laurent needs: coord pole_re pole_im power re im"));
                            }
                            let coord: usize = toks[0].parse().map_err(|_| perr(ln, "bad coordinate"))?;
                            let power: u32 = toks[3].parse().map_err(|_| perr(ln, "bad power"))?;
                            let pole = nums(&toks[1..3], ln)?;
                            let c = nums(&toks[4..6], ln)?;
                            if coord >= p.dim() {
                                return Err(perr(ln, "coordinate out of range"));
                            }
                            p.laurent.push(super::LaurentTerm {
                                coord,
                                pole: Complex64::new(pole[0], pole[1]),
                                power,
                                coeff: Complex64::new(c[0], c[1]),
                            });
                        }
                        "logpow" => {
                            let Pending::Leaf(_, logs) = &mut m.pending else {
                                return Err(perr(ln, "`logpow` outside a leaf component"));
                            };
                            if toks.len() != 3 {
                                return Err(perr(ln, "logpow needs: p re im"));
                            }
                            let p: u32 = toks[0].parse().map_err(|_| perr(ln, "bad power"))?;
                            let c = nums(&toks[1..], ln)?;
                            logs.push((p, Complex64::new(c[0], c[1])));
                        }
                        _ => {
                            let Pending::Mixed(terms) = &mut m.pending else {
                                return Err(perr(ln, "`mterm` outside a mixed component"));
                            };
                            let zpos = toks.iter().position(|t| *t == "z").ok_or_else(|| perr(ln, "mterm needs `z`"))?;
                            let bpos = toks.iter().position(|t| *t == "zbar").ok_or_else(|| perr(ln, "mterm needs `zbar`"))?;
                            if zpos != 2 || bpos < zpos {
                                return Err(perr(ln, "mterm needs: re im z a.. zbar b.."));
                            }
                            let c = nums(&toks[..2], ln)?;
                            terms.push(MixedTerm {
                                coeff: Complex64::new(c[0], c[1]),
                                z: ints(&toks[zpos + 1..bpos], ln)?,
                                zbar: ints(&toks[bpos + 1..], ln)?,
                            });
                        }
                    }
                }
                "end" => {
                    let shape = need_shape()?;
                    if let Some(m) = member.take() {
                        members.push(self.finish_member(&shape, m, ln)?);
                    }
                    ended = true;
                    break;
                }
                other => return Err(perr(ln, format!("unknown key `{other}`"))),
            }
        }
        if !ended {
            return Err(perr(lines.last().map_or(0, |l| l.0), "missing `end`"));
        }
        let shape = shape.ok_or_else(|| perr(0, "missing `shape`"))?;
        FunctionFamily::new(shape, members, prov)
    }
}
