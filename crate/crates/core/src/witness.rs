//! Witness series `f = sum (c_m g_m)^{k_m}` that grows without bound along
//! points `p_m` escaping every compact subset, built against an exhaustion
//! `K_m = {dist >= r_m} ∩ {|z| <= R_m}`.
//!
//! Every inequality the construction relies on is stored as a certificate
//! and can be re-evaluated from scratch with [`verify_witness`].

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::funcspace::{CnFunction, FunctionFamily};
use crate::hull::{sample_max, sample_max_all, HullFilter, DEFAULT_TOL};
use crate::region::{modulus, sup_norm_slices, CompactSample, PointZ, Region};

/// Largest power `k` tried before giving up.
pub const MAX_POWER: u64 = 1_000_000;

/// `(a_1), (a_1, a_2), (a_1, a_2, a_3), ...` flattened and truncated to
/// `count`, as indices into the dense sequence.
pub fn interleave_indices(count: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(count);
    let mut row = 1;
    while out.len() < count {
        out.extend((0..row).take(count - out.len()));
        row += 1;
    }
    out
}

/// The interleaved targets for an explicit sequence.
pub fn interleave_targets<T: Clone>(a_seq: &[T], count: usize) -> Vec<T> {
    interleave_indices(count).into_iter().map(|i| a_seq[i].clone()).collect()
}

/// Family member maximising `|g(p)| / max_K |g|` (first on ties) and its ratio.
pub fn find_separating_function(family: &FunctionFamily, k: &CompactSample, p: &PointZ) -> Result<(usize, f64)> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    separator_from_sups(family, &sample_max_all(family, k)?, p)
}

/// [`find_separating_function`] with precomputed `max_K |g|` per member.
pub fn separator_from_sups(family: &FunctionFamily, sups: &[f64], p: &PointZ) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, (g, &sup)) in family.members.iter().zip(sups).enumerate() {
        let val = g.modulus_at(p.coords())?;
        let ratio = if sup > 0.0 {
            val / sup
        } else if val > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if best.is_none_or(|(_, r)| ratio > r) {
            best = Some((i, ratio));
        }
    }
    match best {
        Some((i, r)) if r > 1.0 => Ok((i, r)),
        _ => Err(Error::NoSeparator),
    }
}

/// Scale and power of one term with both certificates in log-modulus form:
/// `log_sup = k ln(c sup_K |g|)` and `log_value = k ln(c |g(p)|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalePower {
    pub c: f64,
    pub k: u64,
    pub log_sup: f64,
    pub log_value: f64,
}

fn log_bounds(m: usize, prior_sum: f64) -> (f64, f64) {
    (-((m as f64) - 1.0) * std::f64::consts::LN_2, (1.0 + m as f64 + prior_sum).ln())
}

/// `c = 1 / sqrt(sup * value)` (or `2 / value` when `sup = 0`) and the
/// smallest `k >= 1` with `(c sup)^k <= 2^{-(m-1)}` and
/// `(c value)^k >= 1 + m + sum(priors)`.
pub fn choose_scale_power_from_moduli(sup: f64, value: f64, prior_values: &[f64], m: usize) -> Result<ScalePower> {
    if m == 0 || !(value > sup) || sup < 0.0 {
        return Err(Error::NoSeparator);
    }
    let c = if sup > 0.0 { 1.0 / (sup * value).sqrt() } else { 2.0 / value };
    let prior_sum: f64 = prior_values.iter().sum();
    let (sup_bound, value_bound) = log_bounds(m, prior_sum);
    let ls = if sup > 0.0 { (c * sup).ln() } else { f64::NEG_INFINITY };
    let lv = (c * value).ln();
    if lv <= 0.0 {
        return Err(Error::ResolutionTooFine(MAX_POWER));
    }
    let need_sup = if sup_bound >= 0.0 || ls == f64::NEG_INFINITY { 1.0 } else { (sup_bound / ls).ceil() };
    let need_val = (value_bound / lv).ceil();
    let mut k = need_sup.max(need_val).max(1.0);
    if !k.is_finite() || k > MAX_POWER as f64 {
        return Err(Error::ResolutionTooFine(MAX_POWER));
    }
    // guard against rounding in the ceilings
    while k as f64 * ls > sup_bound || (k as f64) * lv < value_bound {
        k += 1.0;
        if k > MAX_POWER as f64 {
            return Err(Error::ResolutionTooFine(MAX_POWER));
        }
    }
    let k = k as u64;
    Ok(ScalePower { c, k, log_sup: k as f64 * ls, log_value: k as f64 * lv })
}

/// Scale and power for `g` separating `p` from `k_prev`.
pub fn choose_scale_power(
    g: &CnFunction,
    k_prev: &CompactSample,
    p: &PointZ,
    prior_values: &[f64],
    m: usize,
) -> Result<ScalePower> {
    choose_scale_power_from_moduli(sample_max(g, k_prev)?, g.modulus_at(p.coords())?, prior_values, m)
}

#[derive(Clone, Debug)]
pub struct WitnessTerm {
    /// Index `m >= 1`.
    pub m: usize,
    /// Family member id of `g_m`.
    pub member: usize,
    pub g: CnFunction,
    pub c: f64,
    pub k: u64,
    /// `ln sup_{K_{m-1}} |(c g)^k|`.
    pub log_sup: f64,
    /// `ln |(c g(p_m))^k|`.
    pub log_value: f64,
    /// `|(c_j g_j(p_m))^{k_j}|` for `j < m`.
    pub prior_values: Vec<f64>,
    pub separation_ratio: f64,
}

/// Componentwise `(c g(z))^k`.
fn term_value(g: &CnFunction, c: f64, k: u64, z: &[Complex64], out: &mut [Complex64]) -> Result<()> {
    g.eval_into(z, out)?;
    for v in out.iter_mut() {
        *v = (*v * c).powu(k as u32);
    }
    Ok(())
}

/// `|(c g(z))^k|` computed in log space.
fn term_modulus(g: &CnFunction, c: f64, k: u64, z: &[Complex64]) -> Result<f64> {
    let v = g.modulus_at(z)?;
    Ok(if v == 0.0 { 0.0 } else { (k as f64 * (c * v).ln()).exp() })
}

#[derive(Clone, Debug)]
pub struct WitnessSeries {
    pub terms: Vec<WitnessTerm>,
}

impl WitnessSeries {
    /// Truncated series at `z`, componentwise.
    pub fn eval(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.terms.first().map_or(0, |t| t.g.n_blocks());
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        let mut buf = acc.clone();
        for t in &self.terms {
            term_value(&t.g, t.c, t.k, z, &mut buf)?;
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a += b;
            }
        }
        Ok(acc)
    }

    pub fn modulus_at(&self, z: &[Complex64]) -> Result<f64> {
        Ok(self.eval(z)?.iter().map(|v| v.norm()).fold(0.0, f64::max))
    }

    /// `id,m,member,label,c,k,log_sup,log_value,separation_ratio` rows.
    pub fn terms_csv(&self) -> String {
        let mut out = String::from("m,member,label,c,k,log_sup,log_value,separation_ratio\n");
        for t in &self.terms {
            let _ = writeln!(
                out,
                "{},{},\"{}\",{:?},{},{:?},{:?},{:?}",
                t.m, t.member, t.g.label, t.c, t.k, t.log_sup, t.log_value, t.separation_ratio
            );
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct WitnessPlan {
    /// Dense-sequence points `a_1, a_2, ...` used as targets.
    pub a_seq: Vec<PointZ>,
    /// Index into `a_seq` of each target `q_m`, `m = 1..M`.
    pub q_index: Vec<usize>,
    pub q_seq: Vec<PointZ>,
    pub p_seq: Vec<PointZ>,
    /// `r_0..r_M` and `R_0..R_M`; `K_m` is `sublevel_compact(r_m, R_m)`.
    pub r_seq: Vec<f64>,
    pub big_r_seq: Vec<f64>,
    /// `dist_to_complement(a_k)`, the radius of `B_k`.
    pub ball_radii: Vec<f64>,
}

impl WitnessPlan {
    pub fn k_set(&self, region: &Region, m: usize) -> CompactSample {
        region.sublevel_compact(self.r_seq[m], self.big_r_seq[m])
    }

    /// `m,q,p,r,R` rows with coordinates as `re im` pairs.
    pub fn plan_csv(&self) -> String {
        let pt = |p: &PointZ| p.0.iter().map(|z| format!("{:?} {:?}", z.re, z.im)).collect::<Vec<_>>().join(" ");
        let mut out = String::from("m,q_index,q,p,r,R\n");
        let _ = writeln!(out, "0,,,,{:?},{:?}", self.r_seq[0], self.big_r_seq[0]);
        for m in 1..self.r_seq.len() {
            let _ = writeln!(
                out,
                "{m},{},{},{},{:?},{:?}",
                self.q_index[m - 1],
                pt(&self.q_seq[m - 1]),
                pt(&self.p_seq[m - 1]),
                self.r_seq[m],
                self.big_r_seq[m]
            );
        }
        out
    }
}

/// Inside cell closest to `q` (ties by grid order) that lies outside the
/// approximate hull of `k`, inside `B(q, dist(q))`, with
/// `dist <= max_dist`.
fn find_point(
    region: &Region,
    family: &FunctionFamily,
    filter: &HullFilter,
    q: &PointZ,
    max_dist: f64,
) -> Result<Option<usize>> {
    let dq = region.dist_to_complement(q)?;
    let grid = region.grid();
    let dim = region.shape().total_dim();
    let mut candidates: Vec<(f64, u32)> = (0..grid.total_cells())
        .into_par_iter()
        .filter(|&flat| region.is_inside_cell(flat) && region.cell_dist(flat) <= max_dist)
        .map_init(
            || vec![Complex64::new(0.0, 0.0); dim],
            |buf, flat| {
                grid.write_center(flat, buf);
                let d = sup_norm_slices(buf, q.coords());
                (d < dq).then_some((d, flat as u32))
            },
        )
        .flatten()
        .collect();
    candidates.par_sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut buf = vec![Complex64::new(0.0, 0.0); dim];
    for (_, flat) in candidates {
        grid.write_center(flat as usize, &mut buf);
        match filter.test(family, &buf) {
            Ok(t) if !t.inside => return Ok(Some(flat as usize)),
            _ => {}
        }
    }
    Ok(None)
}

/// Runs the exhaustion loop for `m_terms` terms.
pub fn build_witness(region: &Region, family: &FunctionFamily, m_terms: usize) -> Result<(WitnessPlan, WitnessSeries)> {
    let (plan, series, stall) = build_witness_partial(region, family, m_terms)?;
    match stall {
        Some(e) => Err(e),
        None => Ok((plan, series)),
    }
}

/// Like [`build_witness`] but keeps the terms built before a stall; the
/// stall error is returned alongside.
pub fn build_witness_partial(
    region: &Region,
    family: &FunctionFamily,
    m_terms: usize,
) -> Result<(WitnessPlan, WitnessSeries, Option<Error>)> {
    if m_terms == 0 {
        return Err(Error::Unsupported("the witness needs at least one term".into()));
    }
    if !region.recipe().flags.bounded {
        return Err(Error::RecipeFlag("bounded"));
    }
    if family.shape != *region.shape() {
        return Err(Error::InvalidShape(format!("family on {} used on region {}", family.shape, region.shape())));
    }
    let seq = region.dense_sequence()?;
    let q_index = interleave_indices(m_terms);
    let a_count = q_index.iter().max().map_or(0, |m| m + 1);
    let a_seq: Vec<PointZ> = (0..a_count).map(|k| seq.point(k)).collect();
    let ball_radii = a_seq.iter().map(|a| region.dist_to_complement(a)).collect::<Result<Vec<_>>>()?;

    let r0 = region.max_depth().min(1.0);
    let mut big_r0 = 1.0;
    while region.sublevel_compact(r0, big_r0).empty {
        big_r0 *= 2.0;
    }
    let mut plan = WitnessPlan {
        q_seq: q_index.iter().map(|&i| a_seq[i].clone()).collect(),
        a_seq,
        q_index,
        p_seq: Vec::new(),
        r_seq: vec![r0],
        big_r_seq: vec![big_r0],
        ball_radii,
    };
    let mut terms: Vec<WitnessTerm> = Vec::new();
    for m in 1..=m_terms {
        let k_prev = plan.k_set(region, m - 1);
        let filter = HullFilter::new(family, &k_prev, DEFAULT_TOL)?;
        let q = &plan.q_seq[m - 1];
        let r_prev = plan.r_seq[m - 1];
        let Some(flat) = find_point(region, family, &filter, q, r_prev / 2.0)? else {
            return Ok((plan, WitnessSeries { terms }, Some(Error::ExhaustionStalled { m })));
        };
        let p = region.cell_center(flat);
        let (member, ratio) = separator_from_sups(family, &filter.max_k, &p)?;
        let g = &family.members[member];
        let prior_values =
            terms.iter().map(|t| term_modulus(&t.g, t.c, t.k, p.coords())).collect::<Result<Vec<_>>>()?;
        let sp = choose_scale_power_from_moduli(filter.max_k[member], g.modulus_at(p.coords())?, &prior_values, m)?;
        terms.push(WitnessTerm {
            m,
            member,
            g: g.clone(),
            c: sp.c,
            k: sp.k,
            log_sup: sp.log_sup,
            log_value: sp.log_value,
            prior_values,
            separation_ratio: ratio,
        });
        plan.r_seq.push(region.cell_dist(flat));
        plan.big_r_seq.push(modulus(p.coords()).max(2.0 * plan.big_r_seq[m - 1]));
        plan.p_seq.push(p);
    }
    Ok((plan, WitnessSeries { terms }, None))
}

/// Re-evaluated certificates of one term.
#[derive(Clone, Debug)]
pub struct TermCheck {
    pub m: usize,
    pub log_sup: f64,
    pub log_value: f64,
    pub sup_ok: bool,
    pub growth_ok: bool,
    /// `sum_{j=m}^{M} sup_{K_{m-1}} |(c_j g_j)^{k_j}|` against `2^{-(m-2)}`.
    pub tail: f64,
    pub tail_ok: bool,
    /// `|f_trunc(p_m)|` against `m`.
    pub value_at_p: f64,
    pub lower_bound_ok: bool,
}

#[derive(Clone, Debug)]
pub struct WitnessVerification {
    pub terms: Vec<TermCheck>,
    /// Stored and recomputed log certificates agree bit for bit.
    pub stored_match: bool,
    pub plan_ok: bool,
}

impl WitnessVerification {
    pub fn all_ok(&self) -> bool {
        self.stored_match
            && self.plan_ok
            && self.terms.iter().all(|t| t.sup_ok && t.growth_ok && t.tail_ok && t.lower_bound_ok)
    }
}

/// Recomputes every certificate from the plan, the series and the region.
pub fn verify_witness(region: &Region, plan: &WitnessPlan, series: &WitnessSeries) -> Result<WitnessVerification> {
    let big_m = series.terms.len();
    let mut checks = Vec::with_capacity(big_m);
    let mut stored_match = true;
    let mut plan_ok = true;
    for m in 1..=big_m {
        plan_ok &= plan.r_seq[m] <= plan.r_seq[m - 1] / 2.0 && plan.big_r_seq[m] >= 2.0 * plan.big_r_seq[m - 1];
        let p = &plan.p_seq[m - 1];
        let q = &plan.q_seq[m - 1];
        plan_ok &= sup_norm_slices(p.coords(), q.coords()) < region.dist_to_complement(q)?;
        let k_prev = plan.k_set(region, m - 1);
        let t = &series.terms[m - 1];
        let sup = sample_max(&t.g, &k_prev)?;
        let value = t.g.modulus_at(p.coords())?;
        let log_sup = if sup > 0.0 { t.k as f64 * (t.c * sup).ln() } else { f64::NEG_INFINITY };
        let log_value = t.k as f64 * (t.c * value).ln();
        let priors = series.terms[..m - 1]
            .iter()
            .map(|s| term_modulus(&s.g, s.c, s.k, p.coords()))
            .collect::<Result<Vec<_>>>()?;
        stored_match &= log_sup.to_bits() == t.log_sup.to_bits()
            && log_value.to_bits() == t.log_value.to_bits()
            && priors.iter().zip(&t.prior_values).all(|(a, b)| a.to_bits() == b.to_bits());
        let (sup_bound, value_bound) = log_bounds(m, priors.iter().sum());
        let tail: f64 = series.terms[m - 1..]
            .iter()
            .map(|s| {
                let sup = sample_max(&s.g, &k_prev)?;
                Ok(if sup > 0.0 { (s.k as f64 * (s.c * sup).ln()).exp() } else { 0.0 })
            })
            .collect::<Result<Vec<f64>>>()?
            .iter()
            .sum();
        let value_at_p = series.modulus_at(p.coords())?;
        checks.push(TermCheck {
            m,
            log_sup,
            log_value,
            sup_ok: log_sup <= sup_bound,
            growth_ok: log_value >= value_bound,
            tail,
            tail_ok: tail <= 2f64.powi(2 - m as i32),
            value_at_p,
            lower_bound_ok: value_at_p >= m as f64,
        });
    }
    Ok(WitnessVerification { terms: checks, stored_match, plan_ok })
}

#[derive(Clone, Debug)]
pub struct BlowupRecord {
    pub k: usize,
    pub center: PointZ,
    pub radius: f64,
    pub samples: usize,
    pub max_value: f64,
    /// `(m, |f_trunc(p_m)|)` for the points `p_m` inside `B_k`.
    pub certified: Vec<(usize, f64)>,
}

/// Evaluates the truncated series on up to `sample_count` grid points of
/// `B_k` (evenly strided in grid order) plus every `p_m` inside the ball.
pub fn blowup_check(
    region: &Region,
    plan: &WitnessPlan,
    series: &WitnessSeries,
    k: usize,
    sample_count: usize,
) -> Result<BlowupRecord> {
    let center = plan.a_seq.get(k).ok_or(Error::Unsupported(format!("ball index {k} is beyond the plan")))?.clone();
    let radius = plan.ball_radii[k];
    let grid = region.grid();
    let dim = region.shape().total_dim();
    let cells: Vec<u32> = (0..grid.total_cells())
        .into_par_iter()
        .filter(|&f| region.is_inside_cell(f))
        .map_init(
            || vec![Complex64::new(0.0, 0.0); dim],
            |buf, flat| {
                grid.write_center(flat, buf);
                (sup_norm_slices(buf, center.coords()) < radius).then_some(flat as u32)
            },
        )
        .flatten()
        .collect();
    let stride = cells.len().div_ceil(sample_count.max(1)).max(1);
    let chosen: Vec<u32> = cells.iter().step_by(stride).copied().collect();
    let max_grid = chosen
        .par_iter()
        .map(|&c| series.modulus_at(&region.cell_center(c as usize).0))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
    let mut certified = Vec::new();
    for (i, p) in plan.p_seq.iter().enumerate().take(series.terms.len()) {
        if sup_norm_slices(p.coords(), center.coords()) < radius {
            certified.push((i + 1, series.modulus_at(p.coords())?));
        }
    }
    let max_value = certified.iter().map(|c| c.1).fold(max_grid, f64::max);
    Ok(BlowupRecord { k, center, radius, samples: chosen.len() + certified.len(), max_value, certified })
}
