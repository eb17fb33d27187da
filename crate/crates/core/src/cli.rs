//! Command-line harness: one subcommand per experiment, CSV/JSON output,
//! exit status 0 (all assertions hold), 1 (an assertion failed) or 2
//! (configuration or runtime error).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::experiments::{
    half_octaves, kernel_sups, littlewood_paley_ratios, loglog_slope, lp_decay_target,
    lp_norm_slope, multilinear_checks, product_norm_slope, run_criterion, Check, DecayTarget, CRITERIA, DEFAULT_SEED,
};
use crate::exponent::Exponent;
use crate::hermite::build_basis;
use crate::hnorms::{hormander_norm_with, Flavor, HnormConfig, Mode};
use crate::operators::{symbol_at, OperatorSpec, Variant};
use crate::opnorms::{
    compactness_profile, l2_opnorm_measured, lp_opnorm_lower, lp_opnorm_lower_spec, projection_opnorm_lower, TestSet,
};
use crate::report::{emit_report, render, write_atomic, Format, Table};
use crate::symbols::{family_parts, parse_symbol_spec, Symbol, SymbolKind};
use crate::thresholds::{delta, gamma, ThresholdKind, ThresholdQuery};

#[derive(Debug, Parser)]
#[command(name = "hermite-pm", version, about = "Hermite spectral calculus experiments")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Flat key=value file; flags given on the command line take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, default_value = "csv")]
    pub format: Format,
    /// Output file (written atomically); standard output when absent.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Seed for randomized test functions.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decay of ‖φ_ν‖_p along diagonal indices and its fitted exponent.
    Asymptotics(AsymptoticsArgs),
    /// Growth of ‖φ_ν‖_p‖φ_ν‖_p' against γ_p.
    GammaFit(GammaFitArgs),
    /// Lp lower bound for a (pseudo-)multiplier from Hermite and random tests.
    Lowerbound(LowerboundArgs),
    /// L² norms of T_m minus its truncations.
    Compactness(CompactnessArgs),
    /// Norms of the dyadic blocks of an operator.
    LpBlocks(LpBlocksArgs),
    /// Dyadic Hörmander block norms of a symbol.
    HormanderNorm(HormanderArgs),
    /// Regularity thresholds and exponents.
    Thresholds(ThresholdsArgs),
    /// Norms of spectral projections P_ℓ and their growth in ℓ.
    Karadzhov(KaradzhovArgs),
    /// ‖Sf‖₂/‖f‖₂ for random band-limited f.
    LittlewoodPaley(LittlewoodPaleyArgs),
    /// Bilinear operators against products of linear ones.
    MultilinearDemo(MultilinearArgs),
    /// The acceptance suite.
    Selftest(SelftestArgs),
}

/// `lo..hi` (inclusive).
fn parse_range(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected lo..hi, got '{s}'"))?;
    let lo: usize = a.trim().parse().map_err(|_| format!("bad range start '{a}'"))?;
    let hi: usize = b.trim().trim_start_matches('=').parse().map_err(|_| format!("bad range end '{b}'"))?;
    if lo > hi {
        return Err(format!("empty range '{s}'"));
    }
    Ok((lo, hi))
}

#[derive(Debug, Args)]
pub struct AsymptoticsArgs {
    #[arg(long = "n", default_value_t = 1)]
    pub n: usize,
    #[arg(long)]
    pub p: Exponent,
    /// Per-axis degree range of the diagonal indices (k, …, k), sampled by half octaves.
    #[arg(long, value_parser = parse_range, default_value = "64..4096")]
    pub nu: (usize, usize),
    /// Allowed distance from the target exponent (0.005 at p = 2, else 0.02).
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GammaFitArgs {
    #[arg(long = "n", default_value_t = 1)]
    pub n: usize,
    #[arg(long)]
    pub p: Exponent,
    /// Per-axis degree range; defaults to 64..4096 in 1-D and 32..2048 otherwise.
    #[arg(long, value_parser = parse_range)]
    pub nu: Option<(usize, usize)>,
    /// Allowed excess over γ_p (0.02 in 1-D, 0.05 otherwise).
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LowerboundArgs {
    #[arg(long)]
    pub symbol: String,
    #[arg(long = "n", default_value_t = 1)]
    pub n: usize,
    #[arg(long)]
    pub p: Exponent,
    /// Target exponent; defaults to p.
    #[arg(long)]
    pub q: Option<Exponent>,
    #[arg(long = "N", default_value_t = 64)]
    pub cutoff: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct CompactnessArgs {
    #[arg(long)]
    pub symbol: String,
    #[arg(long = "n", default_value_t = 1)]
    pub n: usize,
    #[arg(long = "N", default_value_t = 64)]
    pub cutoff: usize,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32")]
    pub ks: Vec<usize>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct LpBlocksArgs {
    #[arg(long)]
    pub symbol: String,
    #[arg(long = "n", default_value_t = 1)]
    pub n: usize,
    #[arg(long = "N", default_value_t = 64)]
    pub cutoff: usize,
    /// Exponent of the Lp lower bound reported next to the L² norm.
    #[arg(long, default_value = "2")]
    pub p: Exponent,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct HormanderArgs {
    #[arg(long)]
    pub symbol: String,
    #[arg(long = "n", default_value_t = 1)]
    pub n: usize,
    /// FT, FHT, spectral-1d, multilinear-FT or multilinear-FHT.
    #[arg(long, default_value = "FT")]
    pub flavor: String,
    /// Regularity order.
    #[arg(long)]
    pub s: f64,
    /// literal or rescaled; defaults to rescaled for Fourier flavors and literal otherwise.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long, value_parser = parse_range, default_value = "1..12")]
    pub k: (usize, usize),
    /// Arity of a multilinear family symbol.
    #[arg(long, default_value_t = 1)]
    pub kappa: usize,
    /// radial or spectral, for the spectral-1d flavor.
    #[arg(long)]
    pub kind: Option<String>,
    /// The x-supremum is taken over a uniform grid on [−R, R]^n.
    #[arg(long, default_value_t = 2.0)]
    pub x_radius: f64,
    #[arg(long, default_value_t = 5)]
    pub x_points: usize,
    /// Frequency samples per axis for the Fourier flavors.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ThresholdsArgs {
    #[arg(long)]
    pub kind: ThresholdKind,
    #[arg(long = "n")]
    pub n: usize,
    /// One or more exponents, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<Exponent>,
    #[arg(long)]
    pub kappa: Option<usize>,
}

#[derive(Debug, Args)]
pub struct KaradzhovArgs {
    #[arg(long = "n", default_value_t = 2)]
    pub n: usize,
    /// 1 ≤ p ≤ 2; p = 1 gives the exact kernel supremum.
    #[arg(long, default_value = "1")]
    pub p: Exponent,
    #[arg(long, value_delimiter = ',', default_value = "8,12,16,24,32,48,64")]
    pub l: Vec<usize>,
    /// Allowed excess of the fitted exponent over δ(p) − 1/2.
    #[arg(long, default_value_t = 0.1)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct LittlewoodPaleyArgs {
    #[arg(long = "n", default_value_t = 1)]
    pub n: usize,
    #[arg(long = "N", default_value_t = 256)]
    pub cutoff: usize,
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct MultilinearArgs {
    #[arg(long = "N", default_value_t = 48)]
    pub cutoff: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Run only these criteria.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<usize>,
}

/// What a subcommand produced.
pub struct Outcome {
    pub table: Table,
    pub checks: Vec<Check>,
    /// Replaces the JSON rendering of `table`.
    pub json: Option<Value>,
}

impl Outcome {
    fn new(table: Table, checks: Vec<Check>) -> Self {
        Outcome { table, checks, json: None }
    }
}

fn p_cell(p: Exponent) -> Value {
    Value::String(p.to_string())
}

fn asymptotics(a: &AsymptoticsArgs) -> Result<Outcome> {
    let ks = half_octaves(a.nu.0, a.nu.1);
    let (slope, rows) = lp_norm_slope(a.n, a.p, &ks)?;
    let nf = a.n as f64;
    let check = match lp_decay_target(a.p) {
        DecayTarget::Value(t) => {
            let tol = a.tol.unwrap_or(if a.p == Exponent::Finite(2.0) { 0.005 } else { 0.02 });
            Check::within(format!("fitted exponent p={}", a.p), slope, nf * t, tol)
        }
        DecayTarget::Open(lo, hi) => Check::open_between(format!("fitted exponent p={}", a.p), slope, nf * lo, nf * hi),
    };
    let mut t = Table::new(&["n", "p", "nu", "norm", "fitted_slope", "target"]);
    for (nu, norm) in rows {
        t.push(vec![json!(a.n), p_cell(a.p), json!(nu), json!(norm), json!(slope), json!(check.target)])?;
    }
    Ok(Outcome::new(t, vec![check]))
}

fn gamma_fit(a: &GammaFitArgs) -> Result<Outcome> {
    let (lo, hi) = a.nu.unwrap_or(if a.n == 1 { (64, 4096) } else { (32, 2048) });
    let ks = half_octaves(lo, hi);
    let (slope, rows) = product_norm_slope(a.n, a.p, &ks)?;
    let g = gamma(a.n, a.p)?;
    let tol = a.tol.unwrap_or(if a.n == 1 { 0.02 } else { 0.05 });
    let check = Check::at_most(format!("fitted exponent n={} p={}", a.n, a.p), slope, g + tol);
    let mut t = Table::new(&["n", "p", "nu", "product", "fitted_slope", "gamma"]);
    for (nu, v) in rows {
        t.push(vec![json!(a.n), p_cell(a.p), json!(nu), json!(v), json!(slope), json!(g)])?;
    }
    Ok(Outcome::new(t, vec![check]))
}

fn lowerbound(a: &LowerboundArgs, seed: u64) -> Result<Outcome> {
    let s = parse_symbol_spec(&a.symbol, a.n)?;
    let q = a.q.unwrap_or(a.p);
    let basis = build_basis(a.n, a.cutoff, 1.0)?;
    let est = lp_opnorm_lower(&s, a.p, q, &basis, &TestSet::standard(&basis, seed))?;
    let mut checks = Vec::new();
    let band_sup = if s.depends_on_x() {
        Value::Null
    } else {
        let x0 = vec![0.0; a.n];
        let mut sup = 0.0f64;
        for nu in basis.indices() {
            sup = sup.max(symbol_at(&s, &x0, &nu)?.norm());
        }
        if q == a.p {
            checks.push(Check::at_least("lower bound − sup_{|ν|≤N} |m(ν)|", est.value - sup, -a.tol));
        }
        json!(sup)
    };
    let mut t = Table::new(&["symbol", "n", "p", "q", "N", "lower_bound", "witness", "band_sup", "seed"]);
    t.push(vec![
        json!(a.symbol),
        json!(a.n),
        p_cell(a.p),
        p_cell(q),
        json!(a.cutoff),
        json!(est.value),
        json!(est.witness),
        band_sup,
        json!(seed),
    ])?;
    Ok(Outcome::new(t, checks))
}

fn compactness(a: &CompactnessArgs) -> Result<Outcome> {
    let s = parse_symbol_spec(&a.symbol, a.n)?;
    let basis = build_basis(a.n, a.cutoff, 1.0)?;
    let rows = compactness_profile(&s, &a.ks, &basis)?;
    let worst = rows.iter().map(|r| (r.measured - r.tail_sup).abs()).fold(0.0, f64::max);
    let mut t = Table::new(&["symbol", "k", "tail_sup", "measured"]);
    for r in &rows {
        t.push(vec![json!(a.symbol), json!(r.k), json!(r.tail_sup), json!(r.measured)])?;
    }
    Ok(Outcome::new(t, vec![Check::at_most("max |measured − tail sup|", worst, a.tol)]))
}

fn lp_blocks(a: &LpBlocksArgs, seed: u64) -> Result<Outcome> {
    let s = parse_symbol_spec(&a.symbol, a.n)?;
    let basis = build_basis(a.n, a.cutoff, 1.0)?;
    let set = TestSet::standard(&basis, seed);
    let x0 = vec![0.0; a.n];
    let mut t = Table::new(&["symbol", "k", "l2_norm", "witness", "shell_sup", "p", "lp_lower", "seed"]);
    let mut worst = 0.0f64;
    let mut k = 0u32;
    while (1usize << k) <= a.cutoff {
        let spec = OperatorSpec::new(s.clone(), &basis, Variant::DyadicBlock(k));
        let l2 = l2_opnorm_measured(&spec)?;
        let lp = lp_opnorm_lower_spec(&spec, a.p, a.p, &set)?;
        let shell = if s.depends_on_x() {
            Value::Null
        } else {
            let mut sup = 0.0f64;
            for nu in basis.indices().iter().filter(|nu| spec.variant.weight(nu.abs()) == 1.0) {
                sup = sup.max(symbol_at(&s, &x0, nu)?.norm());
            }
            worst = worst.max((l2.value - sup).abs());
            json!(sup)
        };
        t.push(vec![
            json!(a.symbol),
            json!(k),
            json!(l2.value),
            json!(l2.witness),
            shell,
            p_cell(a.p),
            json!(lp.value),
            json!(seed),
        ])?;
        k += 1;
    }
    let checks =
        if s.depends_on_x() { Vec::new() } else { vec![Check::at_most("max |block L² norm − shell sup|", worst, a.tol)] };
    Ok(Outcome::new(t, checks))
}

fn hormander_symbol(a: &HormanderArgs) -> Result<Symbol> {
    if a.kappa >= 2 {
        let mut parts = a.symbol.split(':');
        let family = parts.next().unwrap_or_default();
        let params = parts
            .map(|p| p.parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{p}' in '{}'", a.symbol))))
            .collect::<Result<Vec<_>>>()?;
        let (profile, x) = family_parts(family, &params)?;
        return Symbol::multilinear_family(profile, x, a.n, a.kappa);
    }
    let s = parse_symbol_spec(&a.symbol, a.n)?;
    match a.kind.as_deref() {
        None => Ok(s),
        Some("radial") => s.with_kind(SymbolKind::Radial),
        Some("spectral") => s.with_kind(SymbolKind::Spectral),
        Some(other) => Err(Error::Parse(format!("unknown kind '{other}' (radial or spectral)"))),
    }
}

fn x_grid(n: usize, radius: f64, points: usize) -> Result<Vec<Vec<f64>>> {
    if points == 0 || !(radius >= 0.0) {
        return Err(Error::InvalidArgument("x grid needs at least one point and R ≥ 0".into()));
    }
    let axis: Vec<f64> = if points == 1 {
        vec![0.0]
    } else {
        (0..points).map(|i| -radius + 2.0 * radius * i as f64 / (points - 1) as f64).collect()
    };
    let mut grid = vec![Vec::new()];
    for _ in 0..n {
        grid = grid.into_iter().flat_map(|p| axis.iter().map(move |&v| [p.clone(), vec![v]].concat())).collect();
    }
    Ok(grid)
}

fn hormander(a: &HormanderArgs) -> Result<Outcome> {
    let flavor = Flavor::parse(&a.flavor)?;
    let mut s = hormander_symbol(a)?;
    if flavor == Flavor::Spectral1d && a.kind.is_none() && !s.kind().is_level() {
        s = s.with_kind(SymbolKind::Spectral)?;
    }
    let mode = match &a.mode {
        Some(m) => Mode::parse(m)?,
        None => flavor.default_mode(),
    };
    let xs = x_grid(a.n, a.x_radius, a.x_points)?;
    let k = (a.k.0 as u32)..=(a.k.1 as u32);
    let r = hormander_norm_with(&s, flavor, a.s, mode, k, &xs, HnormConfig { samples_per_axis: a.samples })?;
    let mut t = Table::new(&["flavor", "s", "mode", "k", "value", "argsup", "sup", "tail_slope"]);
    for b in &r.blocks {
        let arg: Vec<String> = b.argsup.iter().map(|v| v.to_string()).collect();
        t.push(vec![
            json!(flavor.name()),
            json!(a.s),
            json!(mode),
            json!(b.k),
            json!(b.value),
            json!(arg.join(";")),
            json!(r.sup),
            json!(r.tail_slope),
        ])?;
    }
    let mut out = Outcome::new(t, Vec::new());
    let mut obj = serde_json::to_value(&r).map_err(|e| Error::Io(e.to_string()))?;
    obj["symbol"] = json!(s.describe());
    out.json = Some(obj);
    Ok(out)
}

fn thresholds(a: &ThresholdsArgs) -> Result<Outcome> {
    if a.p.is_empty() {
        return Err(Error::InvalidArgument("--p needs at least one exponent".into()));
    }
    let multilinear = a.kind == ThresholdKind::SMultilinear;
    let name = a.kind.name();
    let mut t = if multilinear { Table::new(&["n", "kappa", "p", name]) } else { Table::new(&["n", "p", name]) };
    for &p in &a.p {
        let v = ThresholdQuery { kind: a.kind, n: a.n, p, kappa: a.kappa }.evaluate()?;
        let row = if multilinear {
            vec![json!(a.n), json!(a.kappa), p_cell(p), json!(v)]
        } else {
            vec![json!(a.n), p_cell(p), json!(v)]
        };
        t.push(row)?;
    }
    Ok(Outcome::new(t, Vec::new()))
}

fn karadzhov(a: &KaradzhovArgs) -> Result<Outcome> {
    if a.l.len() < 2 {
        return Err(Error::InvalidArgument("--l needs at least two shells".into()));
    }
    let rows: Vec<(usize, f64, String)> = if a.p == Exponent::Finite(1.0) {
        kernel_sups(a.n, &a.l)?.into_iter().map(|(l, v)| (l, v, "exact".to_string())).collect()
    } else {
        a.l.iter()
            .map(|&l| {
                let basis = build_basis(a.n, l, 1.0)?;
                let e = projection_opnorm_lower(l, a.p, &basis)?;
                Ok((l, e.value, serde_json::to_value(e.kind).unwrap().as_str().unwrap_or("").to_string()))
            })
            .collect::<Result<_>>()?
    };
    let xs: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let slope = loglog_slope(&xs, &ys)?;
    let bound = delta(a.n, a.p)? - 0.5;
    let mut t = Table::new(&["n", "p", "l", "norm", "kind", "fitted_slope", "delta_minus_half"]);
    for (l, v, kind) in rows {
        t.push(vec![json!(a.n), p_cell(a.p), json!(l), json!(v), json!(kind), json!(slope), json!(bound)])?;
    }
    // The projection estimate is stated for n ≥ 2 and 1 ≤ p ≤ 2n/(n+2).
    let nf = a.n as f64;
    let checks = if a.n >= 2 && a.p.value() <= 2.0 * nf / (nf + 2.0) {
        vec![Check::at_most("fitted exponent", slope, bound + a.tol)]
    } else {
        Vec::new()
    };
    Ok(Outcome::new(t, checks))
}

fn littlewood_paley(a: &LittlewoodPaleyArgs, seed: u64) -> Result<Outcome> {
    let (ratios, lo, hi) = littlewood_paley_ratios(a.n, a.cutoff, a.count, seed)?;
    let mut t = Table::new(&["i", "ratio", "lower", "upper", "seed"]);
    let mut checks = vec![Check::at_most("max_ν (Σψ_l²)^{1/2}", hi, 1.0 + a.tol)];
    for (i, r) in ratios.iter().enumerate() {
        t.push(vec![json!(i), json!(r), json!(lo), json!(1.0), json!(seed)])?;
    }
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    checks.push(Check::at_least("min ratio", min, lo - a.tol));
    checks.push(Check::at_most("max ratio", max, 1.0 + a.tol));
    Ok(Outcome::new(t, checks))
}

fn checks_table(checks: &[Check], seed: u64) -> Result<Table> {
    let mut t = Table::new(&["check", "value", "target", "passed", "seed"]);
    for c in checks {
        t.push(vec![json!(c.name), json!(c.value), json!(c.target), json!(c.passed), json!(seed)])?;
    }
    Ok(t)
}

fn selftest(a: &SelftestArgs, seed: u64) -> Result<Outcome> {
    let ids: Vec<usize> = if a.only.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { a.only.clone() };
    let mut t = Table::new(&["criterion", "title", "passed", "checks", "error", "seed"]);
    let mut checks = Vec::new();
    for id in ids {
        let o = run_criterion(id, seed)?;
        eprintln!("{}", o.summary());
        t.push(vec![
            json!(o.id),
            json!(o.title),
            json!(o.passed),
            json!(o.checks.len()),
            json!(o.error.clone().unwrap_or_default()),
            json!(seed),
        ])?;
        checks.push(Check {
            name: format!("criterion {}", o.id),
            value: if o.passed { 1.0 } else { 0.0 },
            target: "pass".into(),
            passed: o.passed,
        });
    }
    Ok(Outcome::new(t, checks))
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let seed = cli.common.seed;
    match &cli.command {
        Command::Asymptotics(a) => asymptotics(a),
        Command::GammaFit(a) => gamma_fit(a),
        Command::Lowerbound(a) => lowerbound(a, seed),
        Command::Compactness(a) => compactness(a),
        Command::LpBlocks(a) => lp_blocks(a, seed),
        Command::HormanderNorm(a) => hormander(a),
        Command::Thresholds(a) => thresholds(a),
        Command::Karadzhov(a) => karadzhov(a),
        Command::LittlewoodPaley(a) => littlewood_paley(a, seed),
        Command::MultilinearDemo(a) => {
            let checks = multilinear_checks(a.cutoff, seed, a.tol)?;
            Ok(Outcome::new(checks_table(&checks, seed)?, checks))
        }
        Command::Selftest(a) => selftest(a, seed),
    }
}

/// Reads `key=value` lines; blank lines and `#` comments are skipped.
pub fn read_config(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
        let k = k.trim();
        if k.is_empty() || k == "config" {
            return Err(Error::Parse(format!("{}:{}: invalid key '{k}'", path.display(), i + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Appends `--key value` for every config entry whose flag is not on the command line.
pub fn merge_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let strs: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut path = None;
    for (i, a) in strs.iter().enumerate() {
        if a == "--config" {
            path = strs.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let mut out = args;
    for (k, v) in read_config(Path::new(&path))? {
        let flag = format!("--{k}");
        let given = strs.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if !given {
            out.push(flag.into());
            out.push(v.into());
        }
    }
    Ok(out)
}

fn write_output(cli: &Cli, out: &Outcome) -> Result<()> {
    let text = match (cli.common.format, &out.json) {
        (Format::Json, Some(v)) => {
            let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
            s.push('\n');
            s
        }
        (f, _) => render(&out.table, f)?,
    };
    match &cli.common.output {
        Some(path) if out.json.is_some() && cli.common.format == Format::Json => write_atomic(path, &text),
        Some(path) => emit_report(&out.table, cli.common.format, path),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the exit status.
pub fn run(args: Vec<OsString>) -> i32 {
    let args = match merge_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let out = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Err(e) = write_output(&cli, &out) {
        eprintln!("error: {e}");
        return 2;
    }
    let mut failed = false;
    for c in &out.checks {
        eprintln!("{} {} = {:e} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.target);
        failed |= !c.passed;
    }
    if failed {
        1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("hermite-pm").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("64..4096").unwrap(), (64, 4096));
        assert_eq!(parse_range("1..=12").unwrap(), (1, 12));
        assert!(parse_range("5..2").is_err());
        assert!(parse_range("5").is_err());
    }

    #[test]
    fn threshold_row() {
        let cli = parse(&["thresholds", "--kind", "s-linear-FT", "--n", "2", "--p", "2"]);
        let out = execute(&cli).unwrap();
        assert_eq!(render(&out.table, Format::Csv).unwrap(), "n,p,s-linear-FT\n2,2,3.0\n");
    }

    #[test]
    fn x_grid_is_a_tensor_product() {
        let g = x_grid(2, 1.0, 3).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], vec![-1.0, -1.0]);
        assert_eq!(g[5], vec![0.0, 1.0]);
        assert_eq!(x_grid(1, 2.0, 1).unwrap(), vec![vec![0.0]]);
    }

    #[test]
    fn config_fills_missing_flags_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        fs::write(&path, "# comment\nn = 3\np=4\n\nformat=json\n").unwrap();
        let args: Vec<OsString> = ["hermite-pm", "thresholds", "--kind", "gamma", "--n", "2", "--config", path.to_str().unwrap()]
            .iter()
            .map(OsString::from)
            .collect();
        let merged = merge_config(args).unwrap();
        let cli = Cli::try_parse_from(merged).unwrap();
        assert_eq!(cli.common.format, Format::Json);
        match cli.command {
            Command::Thresholds(t) => {
                assert_eq!(t.n, 2);
                assert_eq!(t.p, vec![Exponent::Finite(4.0)]);
            }
            other => panic!("{other:?}"),
        }
        fs::write(&path, "no equals sign\n").unwrap();
        assert!(read_config(&path).is_err());
    }

    #[test]
    fn lowerbound_example() {
        let cli = parse(&["lowerbound", "--symbol", "power:1", "--n", "1", "--p", "3", "--N", "64"]);
        let out = execute(&cli).unwrap();
        assert!(out.checks.iter().all(|c| c.passed));
        assert_eq!(out.table.rows.len(), 1);
    }
}
