//! Command-line front end. Every command builds a [`Report`]; files go to
//! `--out DIR` when given.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::funcspace::{
    cross_block_derivative_check, generate_family, holomorphy_check, triangular_check, CheckParams, DerivativeReport,
    FamilyOptions, FunctionFamily, DEFAULT_SAMPLES,
};
use crate::hull::{
    axis_circles_sample, compactness_diagnostic, heatmap_csv, hull_approx, product_decomposition_check, torus_sample,
    ConvexityStatus, DiagnosticBands, DEFAULT_PER_CIRCLE,
};
use crate::recipe::{make_region, region_from_text, DomainRecipe};
use crate::region::{CompactSample, PointZ, Region};
use crate::report::{Report, Status};
use crate::suites;
use crate::witness::{blowup_check, build_witness_partial, verify_witness};

/// Grid spacing used when a recipe is given inline without `--h`.
pub const DEFAULT_H: f64 = 1.0 / 16.0;
pub const DEFAULT_DEGREE: u32 = 6;
pub const DEFAULT_TERMS: usize = 5;

#[derive(Parser, Debug)]
#[command(name = "blockholo", version, about = "Block-holomorphic hulls, leaf spaces and witness series on grid domains")]
pub struct Cli {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    /// Grid spacing (overrides a region file's spacing unless it stores a mask).
    #[arg(long = "h", global = true)]
    pub h: Option<f64>,
    /// Family degree.
    #[arg(long, global = true)]
    pub degree: Option<u32>,
    /// Check tolerance: derivative checks default to 1e-3, hull filters to 1e-9.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Witness term count.
    #[arg(long, global = true)]
    pub terms: Option<usize>,
    /// Seed for generated recipes.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory for the report and exported tables.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Builds a region from a recipe and writes its region file.
    MakeRegion {
        /// Recipe text, e.g. `polydisk radii=1,1`.
        recipe: String,
    },
    /// Checks a family file for holomorphy and the cross-block condition.
    CheckHolo {
        /// Region file or inline recipe text.
        #[arg(long)]
        region: String,
        /// Family file; every member is checked.
        #[arg(long)]
        function: PathBuf,
        /// Judge by the triangular condition instead of the full cross condition.
        #[arg(long)]
        triangular: bool,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Finite-difference step; defaults to max(1e-4, h/10).
        #[arg(long)]
        step: Option<f64>,
    },
    /// Approximate hull of a compact sample with the convexity diagnostic.
    Hull {
        #[arg(long)]
        region: String,
        /// K spec file or inline text, e.g. `torus 0.5 0.5`.
        #[arg(long)]
        k: String,
        /// Add Laurent terms at the recipe's declared poles.
        #[arg(long)]
        poles: bool,
        /// Add powers of lifted logarithms on nontrivial leaf graphs.
        #[arg(long)]
        leaf_lifts: bool,
    },
    /// Builds and certifies a truncated witness series.
    Witness {
        #[arg(long)]
        region: String,
        /// Grid points sampled per ball in the blow-up check.
        #[arg(long, default_value_t = 2000)]
        blowup_samples: usize,
        /// Number of balls `B_k` checked.
        #[arg(long, default_value_t = 3)]
        balls: usize,
    },
    /// Runs a named property suite over the built-in corpus.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    ProductLaw,
    ConvexDecomposition,
    N1Classical,
    SpiralLeaf,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::ProductLaw => "product-law",
            Suite::ConvexDecomposition => "convex-decomposition",
            Suite::N1Classical => "n1-classical",
            Suite::SpiralLeaf => "spiral-leaf",
        }
    }
}

/// Resolved configuration, echoed into every report.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub h: Option<f64>,
    pub degree: u32,
    pub tol: Option<f64>,
    pub terms: usize,
    pub seed: u64,
    pub per_circle: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { h: None, degree: DEFAULT_DEGREE, tol: None, terms: DEFAULT_TERMS, seed: 0, per_circle: DEFAULT_PER_CIRCLE }
    }
}

impl RunConfig {
    pub fn from_args(a: &RunArgs) -> Self {
        Self {
            h: a.h,
            degree: a.degree.unwrap_or(DEFAULT_DEGREE),
            tol: a.tol,
            terms: a.terms.unwrap_or(DEFAULT_TERMS),
            seed: a.seed,
            ..Self::default()
        }
    }

    pub fn echo(&self, r: &mut Report) {
        r.config("h", self.h.map_or("default".to_string(), |h| format!("{h:?}")));
        r.config("degree", self.degree);
        r.config("tol", self.tol.map_or("default".to_string(), |t| format!("{t:?}")));
        r.config("terms", self.terms);
        r.config("seed", self.seed);
        r.config("per_circle", self.per_circle);
    }

    pub fn hull_tol(&self) -> f64 {
        self.tol.unwrap_or(crate::hull::DEFAULT_TOL)
    }
}

/// A region file path, or inline recipe text built at `h` (default 1/16).
pub fn load_region(spec: &str, h: Option<f64>) -> Result<Region> {
    let path = Path::new(spec);
    if path.is_file() {
        return region_from_text(&std::fs::read_to_string(path)?, h);
    }
    make_region(&DomainRecipe::parse(spec)?, h.unwrap_or(DEFAULT_H))
}

fn read_spec(spec: &str) -> Result<String> {
    let path = Path::new(spec);
    if path.is_file() {
        Ok(std::fs::read_to_string(path)?)
    } else {
        Ok(spec.to_string())
    }
}

fn spec_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parses a K spec; entries are separated by newlines or `;` and unioned:
///
/// ```text
/// torus 0.5 0.5        # product of circles, 64 angles each
/// axis_circles 0.75 per=32
/// sublevel 0.2 2.0     # {dist >= r} ∩ {|z| <= R}
/// point 0.1 0.0 0.3 -0.2
/// ```
pub fn parse_k_spec(region: &Region, text: &str, per_circle: usize) -> Result<CompactSample> {
    let mut parts: Vec<CompactSample> = Vec::new();
    let mut points: Vec<PointZ> = Vec::new();
    for (i, raw) in text.split(['\n', ';']).enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut per = per_circle;
        let mut nums = Vec::new();
        let mut toks = line.split_whitespace();
        let kind = toks.next().unwrap_or("");
        for t in toks {
            if let Some(v) = t.strip_prefix("per=") {
                per = v.parse().map_err(|_| spec_err(i + 1, format!("bad `{t}`")))?;
            } else {
                nums.push(t.parse::<f64>().map_err(|_| spec_err(i + 1, format!("bad number `{t}`")))?);
            }
        }
        match kind {
            "torus" => parts.push(torus_sample(region, &nums, per)?),
            "axis_circles" if nums.len() == 1 => parts.push(axis_circles_sample(region, nums[0], per)?),
            "sublevel" if nums.len() == 2 => {
                let k = region.sublevel_compact(nums[0], nums[1]);
                if k.empty {
                    return Err(Error::EmptySample);
                }
                parts.push(k);
            }
            "point" if nums.len() % 2 == 0 && !nums.is_empty() => {
                points.push(PointZ(nums.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()))
            }
            other => return Err(spec_err(i + 1, format!("unknown or malformed K entry `{other}`"))),
        }
    }
    if !points.is_empty() {
        parts.push(CompactSample::from_points(region, points)?);
    }
    let mut it = parts.into_iter();
    let first = it.next().ok_or(Error::EmptySample)?;
    Ok(it.fold(first, |acc, k| acc.union(&k)))
}

fn fmt_point(p: &PointZ) -> String {
    p.0.iter().map(|z| format!("{:?} {:?}", z.re, z.im)).collect::<Vec<_>>().join(" ")
}

fn write_out(out: Option<&Path>, name: &str, text: &str) -> Result<()> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(name), text)?;
    }
    Ok(())
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<Report> {
    let cfg = RunConfig::from_args(&cli.run);
    let out = cli.run.out.as_deref();
    let start = Instant::now();
    let mut report = match &cli.command {
        Command::MakeRegion { recipe } => cmd_make_region(recipe, &cfg, out)?,
        Command::CheckHolo { region, function, triangular, samples, step } => {
            let region = load_region(region, cfg.h)?;
            let family = FunctionFamily::load(function, Some(&region))?;
            let params = CheckParams {
                samples: *samples,
                step: *step,
                tol: cfg.tol.unwrap_or(crate::funcspace::DEFAULT_TOL),
            };
            cmd_check_holo(&region, &family, params, *triangular, &cfg)?
        }
        Command::Hull { region, k, poles, leaf_lifts } => {
            let region = load_region(region, cfg.h)?;
            let k = parse_k_spec(&region, &read_spec(k)?, cfg.per_circle)?;
            let options = FamilyOptions { poles: *poles, leaf_lifts: *leaf_lifts };
            cmd_hull(&region, &k, options, &cfg, out)?
        }
        Command::Witness { region, blowup_samples, balls } => {
            let region = load_region(region, cfg.h)?;
            cmd_witness(&region, &cfg, *blowup_samples, *balls, out)?
        }
        Command::Verify { suite } => cmd_verify(*suite, &cfg)?,
    };
    report.elapsed_ms = start.elapsed().as_millis();
    write_out(out, "report.txt", &report.to_text())?;
    Ok(report)
}

pub fn cmd_make_region(recipe: &str, cfg: &RunConfig, out: Option<&Path>) -> Result<Report> {
    let region = make_region(&DomainRecipe::parse(recipe)?, cfg.h.unwrap_or(DEFAULT_H))?;
    let mut r = Report::new("make-region");
    cfg.echo(&mut r);
    r.entry("recipe", &region.recipe().text)
        .entry("flags", region.recipe().flags.names().join(","))
        .entry("h", format!("{:?}", region.h()))
        .entry("cells", region.grid().total_cells())
        .entry("inside_cells", region.inside_count())
        .entry("max_depth", format!("{:?}", region.max_depth()));
    write_out(out, "region.txt", &region.to_text())?;
    Ok(r)
}

fn check_row(member: usize, label: &str, rep: &DerivativeReport) -> String {
    format!(
        "{member},\"{label}\",{},{:?},{:?},{:?},{},{},{},{}\n",
        rep.kind,
        rep.max_cross,
        rep.max_anti,
        rep.max_scaled,
        rep.worst_point.as_ref().map(fmt_point).unwrap_or_default(),
        rep.samples_used,
        rep.skipped,
        rep.pass
    )
}

/// Per member: holomorphy plus the cross-block condition (or the triangular
/// one with `triangular`). A member with no usable samples is inconclusive.
pub fn cmd_check_holo(
    region: &Region,
    family: &FunctionFamily,
    params: CheckParams,
    triangular: bool,
    cfg: &RunConfig,
) -> Result<Report> {
    let mut r = Report::new("check-holo");
    cfg.echo(&mut r);
    r.config("samples", params.samples).config("derivative_tol", format!("{:?}", params.tol));
    r.config("triangular", triangular);
    r.entry("region", &region.recipe().text).entry("members", family.len());
    let mut table = String::from("member,label,check,max_cross,max_anti,max_scaled,worst_point,samples_used,skipped,pass\n");
    let mut verdicts = String::from("member,label,verdict\n");
    for (i, f) in family.members.iter().enumerate() {
        let checks = [
            holomorphy_check(f, region, &params),
            cross_block_derivative_check(f, region, &params),
            triangular_check(f, region, &params),
        ];
        let mut status = Status::Pass;
        for (c, rep) in checks.into_iter().enumerate() {
            let judged = c == 0 || (c == 1) != triangular;
            match rep {
                Ok(rep) => {
                    table.push_str(&check_row(i, &f.label, &rep));
                    if judged {
                        status = status.combine(Status::from_bool(rep.pass));
                    }
                }
                Err(Error::EmptySample) => status = status.combine(Status::Inconclusive),
                Err(e) => return Err(e),
            }
        }
        verdicts.push_str(&format!("{i},\"{}\",{status}\n", f.label));
        r.fold_status(status);
    }
    r.entry("verdict", r.status);
    r.table("verdicts", verdicts).table("checks", table);
    Ok(r)
}

pub fn cmd_hull(
    region: &Region,
    k: &CompactSample,
    options: FamilyOptions,
    cfg: &RunConfig,
    out: Option<&Path>,
) -> Result<Report> {
    let mut r = Report::new("hull");
    cfg.echo(&mut r);
    r.config("poles", options.poles).config("leaf_lifts", options.leaf_lifts);
    let family = generate_family(region, cfg.degree, options)?;
    let hull = hull_approx(region, k, &family, cfg.hull_tol())?;
    let verdict = compactness_diagnostic(region, k, &hull, DiagnosticBands::for_region(region))?;
    let product = product_decomposition_check(region, Some(&verdict))?;
    r.entry("region", &region.recipe().text)
        .entry("h", format!("{:?}", region.h()))
        .entry("family_size", family.len())
        .entry("k_samples", k.len())
        .entry("k_margin", format!("{:?}", verdict.k_margin))
        .entry("k_dist", format!("{:?}", verdict.k_dist))
        .entry("inside_cells", hull.inside_cells)
        .entry("hull_cells", hull.len())
        .entry("eval_failures", hull.eval_failures)
        .entry("min_boundary_dist", format!("{:?}", verdict.min_boundary_dist))
        .entry("escape_band", format!("{:?}", verdict.bands.escape))
        .entry("verdict", verdict.status)
        .entry("note", verdict.note())
        .entry("product", product.equal)
        .entry("product_missing_cells", product.missing_cells);
    if let Some(w) = &verdict.witness {
        r.entry("closest_hull_point", fmt_point(w));
    }
    if let Some(c) = &product.contradiction {
        r.entry("contradiction", c);
        r.fold_status(Status::Fail);
    }
    if verdict.status == ConvexityStatus::Inconclusive {
        r.fold_status(Status::Inconclusive);
    }
    if out.is_some() {
        let through = match (&verdict.witness, hull.cells.first()) {
            (Some(w), _) => w.clone(),
            (None, Some(&c)) => region.cell_center(c as usize),
            (None, None) => region.cell_center(region.inside_cells().next().ok_or(Error::EmptyRegion)?),
        };
        r.entry("heatmap_through", fmt_point(&through));
        for coord in 0..region.shape().total_dim() {
            write_out(out, &format!("heatmap_z{}.csv", coord + 1), &heatmap_csv(region, &hull, coord, &through.0)?)?;
        }
        write_out(out, "hull_cells.csv", &hull.to_csv(&family))?;
    }
    Ok(r)
}

pub fn cmd_witness(
    region: &Region,
    cfg: &RunConfig,
    blowup_samples: usize,
    balls: usize,
    out: Option<&Path>,
) -> Result<Report> {
    if cfg.terms == 0 {
        return Err(Error::Unsupported("--terms must be at least 1".into()));
    }
    let mut r = Report::new("witness");
    cfg.echo(&mut r);
    r.config("blowup_samples", blowup_samples).config("balls", balls);
    let family = generate_family(region, cfg.degree, FamilyOptions::default())?;
    let (plan, series, stall) = build_witness_partial(region, &family, cfg.terms)?;
    r.entry("region", &region.recipe().text)
        .entry("family_size", family.len())
        .entry("terms_built", series.terms.len());
    if let Some(e) = &stall {
        r.entry("stalled", e);
        r.fold_status(Status::Inconclusive);
    }
    let v = verify_witness(region, &plan, &series)?;
    r.entry("certificates_match", v.stored_match).entry("plan_ok", v.plan_ok).entry("all_ok", v.all_ok());
    r.fold_status(Status::from_bool(v.all_ok()));
    let mut checks = String::from("m,log_sup,log_value,sup_ok,growth_ok,tail,tail_bound,tail_ok,value_at_p,lower_bound_ok\n");
    for t in &v.terms {
        checks.push_str(&format!(
            "{},{:?},{:?},{},{},{:?},{:?},{},{:?},{}\n",
            t.m,
            t.log_sup,
            t.log_value,
            t.sup_ok,
            t.growth_ok,
            t.tail,
            2f64.powi(2 - t.m as i32),
            t.tail_ok,
            t.value_at_p,
            t.lower_bound_ok
        ));
    }
    let mut blow = String::from("k,center,radius,samples,max_value,certified\n");
    if !series.terms.is_empty() {
        for k in 0..balls.min(plan.a_seq.len()) {
            let b = blowup_check(region, &plan, &series, k, blowup_samples)?;
            let cert: Vec<String> = b.certified.iter().map(|(m, v)| format!("{m}:{v:?}")).collect();
            blow.push_str(&format!(
                "{},{},{:?},{},{:?},{}\n",
                k + 1,
                fmt_point(&b.center),
                b.radius,
                b.samples,
                b.max_value,
                cert.join(" ")
            ));
        }
    }
    let terms = series.terms_csv();
    let plan_csv = plan.plan_csv();
    write_out(out, "witness_terms.csv", &terms)?;
    write_out(out, "witness_plan.csv", &plan_csv)?;
    r.table("terms", terms).table("plan", plan_csv).table("certificates", checks).table("blowup", blow);
    Ok(r)
}

pub fn cmd_verify(suite: Suite, cfg: &RunConfig) -> Result<Report> {
    let mut r = Report::new("verify");
    cfg.echo(&mut r);
    r.entry("suite", suite.name());
    match suite {
        Suite::ProductLaw => suites::product_law(cfg, &mut r)?,
        Suite::ConvexDecomposition => suites::convex_decomposition(cfg, &mut r)?,
        Suite::N1Classical => suites::n1_classical(cfg, &mut r)?,
        Suite::SpiralLeaf => suites::spiral_leaf(cfg, &mut r)?,
    }
    Ok(r)
}
