//! The `dilatlab` command line.
//!
//! Exit codes: 0 pass, 1 verdict failure or non-convergence, 2 bad id or
//! arguments, 3 I/O, 4 unsupported group or variant.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::analysis::{identity_suite, run_sweep, IdentityReport, MapKind, Suite, SweepConfig, SweepReport};
use crate::ccdist::{cc_upper, word_decomposition, CcOptions};
use crate::error::{Error, Result};
use crate::ops::{tangent_diff, tangent_dist, tangent_inv, tangent_sum};
use crate::registry::{resolve, resolve_group, Instance, PATTERNS};
use crate::scalar::{coord_distance, Scalar};
use crate::scale::ScaleGrid;
use crate::structure::{DilatationStructure, Point};

#[derive(Debug, Parser)]
#[command(name = "dilatlab", version, about = "Dilatation structures: instances, induced operations and verification")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Seed of every sampler.
    #[arg(long, global = true, env = "DILATLAB_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Print nothing; only the exit code reports the outcome.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Args)]
pub struct Sampling {
    /// Samples per suite.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Sample radius; defaults to 0.2 A.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Use f64 even when the structure supports exact or double-double arithmetic.
    #[arg(long)]
    pub float: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List structure ids.
    List,
    /// Run the identity suite and the a3, a4 and cone sweeps.
    Verify {
        id: String,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Run one defect sweep.
    Sweep {
        id: String,
        /// a3, a4, cone, tangent-metric, inflin, embed or diff.
        #[arg(long)]
        defect: String,
        /// start:ratio:count
        #[arg(long, default_value = "0.5:0.5:16")]
        grid: String,
        /// CSV output path; the JSON report goes next to it with extension .json.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Map of the diff suite: affine, quadratic, automorphism or sine.
        #[arg(long)]
        map: Option<String>,
        /// Base point; defaults to the structure's center.
        #[arg(long, allow_hyphen_values = true)]
        center: Option<String>,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Estimate the tangent distance and operations at x.
    Tangent {
        id: String,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        #[arg(long, default_value = "0.5:0.5:16")]
        grid: String,
        #[arg(long)]
        float: bool,
    },
    /// Bounds on the Carnot–Carathéodory distance.
    Ccdist {
        group: String,
        /// Defaults to the identity.
        #[arg(long, allow_hyphen_values = true)]
        from: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        /// Path segments.
        #[arg(long = "K", default_value_t = 64)]
        segments: usize,
        /// Run the optimiser even when no generator word is available.
        #[arg(long)]
        optimize_only: bool,
    },
    /// Group product g · h.
    Bch {
        group: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
    /// Write a point as a product of first-layer exponentials.
    Decompose {
        group: String,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => 3,
        Error::UnsupportedStep { .. } | Error::UnsupportedVariant(_) => 4,
        Error::UnknownName(_)
        | Error::Parse(_)
        | Error::DimensionMismatch { .. }
        | Error::InvalidScale(_)
        | Error::InvalidAlgebra { .. }
        | Error::MissingReference(_)
        | Error::NotContractive(_) => 2,
        _ => 1,
    }
}

/// Comma-separated decimals.
pub fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            let v = p.trim().parse::<f64>().map_err(|e| Error::Parse(format!("'{p}': {e}")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Parse(format!("'{p}' is not finite")))
            }
        })
        .collect()
}

fn check_dim(expected: usize, p: &[f64]) -> Result<()> {
    if p.len() != expected {
        return Err(Error::DimensionMismatch { expected, found: p.len() });
    }
    Ok(())
}

fn fmt_point(p: &[f64]) -> String {
    p.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(",")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".to_string(), |v| format!("{v:.4}"))
}

struct Out<'a> {
    w: &'a mut dyn Write,
    global: &'a Global,
}

impl Out<'_> {
    fn json<T: Serialize>(&mut self, value: &T) -> Result<()> {
        if !self.global.quiet {
            writeln!(self.w, "{}", serde_json::to_string_pretty(value)?)?;
        }
        Ok(())
    }

    fn line(&mut self, s: &str) -> Result<()> {
        if !self.global.quiet && !self.global.json {
            writeln!(self.w, "{s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub structure: String,
    pub seed: u64,
    pub arithmetic: &'static str,
    pub identities: IdentityReport,
    pub sweeps: Vec<SweepReport>,
    pub pass: bool,
}

/// Rationals when available, then double-double, then `f64`.
fn arithmetic(inst: &Instance, float: bool) -> &'static str {
    match (float, &inst.exact, &inst.extended) {
        (false, Some(_), _) => "exact",
        (false, None, Some(_)) => "extended",
        _ => "float",
    }
}

/// Evaluates `$body` with `$s` bound to the instance in the selected arithmetic.
macro_rules! with_backend {
    ($inst:expr, $mode:expr, |$s:ident| $body:expr) => {
        match ($mode, &$inst.exact, &$inst.extended) {
            ("exact", Some(e), _) => {
                let $s = e.as_ref();
                $body
            }
            ("extended", _, Some(e)) => {
                let $s = e.as_ref();
                $body
            }
            _ => {
                let $s = $inst.float.as_ref();
                $body
            }
        }
    };
}

/// Identity suite, then a3, a4 and (when a closed-form `d^x` exists) cone.
pub fn verify<S: Scalar>(
    s: &dyn DilatationStructure<S>,
    center: &[f64],
    sampling: &Sampling,
    seed: u64,
) -> Result<(IdentityReport, Vec<SweepReport>)> {
    let identities = identity_suite(s, center, sampling.radius, seed, sampling.samples, 1e-10)?;
    let x: Point<S> = Point::from_f64(center);
    let mut suites = vec![Suite::A3, Suite::A4];
    if s.tangent_distance(&x, &x, &x).is_some() {
        suites.push(Suite::Cone);
    }
    let sweeps = suites
        .into_iter()
        .map(|suite| {
            let cfg = SweepConfig {
                samples: sampling.samples,
                seed,
                radius: sampling.radius,
                ..SweepConfig::new(suite, center.to_vec())
            };
            run_sweep(s, &cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((identities, sweeps))
}

fn cmd_verify(out: &mut Out, id: &str, sampling: &Sampling) -> Result<i32> {
    let inst = resolve(id)?;
    let seed = out.global.seed;
    let mode = arithmetic(&inst, sampling.float);
    let (identities, sweeps) = with_backend!(inst, mode, |s| verify(s, &inst.center, sampling, seed)?);
    let pass = identities.pass && sweeps.iter().all(|r| r.verdict.passed());
    let report = VerifyReport { structure: inst.id.clone(), seed, arithmetic: mode, identities, sweeps, pass };
    if out.global.json {
        out.json(&report)?;
    } else {
        out.line(&format!("structure {} ({} arithmetic, seed {})", report.structure, mode, seed))?;
        for (name, r) in &report.identities.residuals {
            let ok = if *r <= report.identities.tolerance { "pass" } else { "FAIL" };
            out.line(&format!("  identity {name:<28} {r:.3e}  {ok}"))?;
        }
        if report.identities.skipped > 0 {
            out.line(&format!("  identity samples skipped: {}", report.identities.skipped))?;
        }
        for s in &report.sweeps {
            out.line(&format!(
                "  sweep {:<8} order {:>8}  final {:.3e}  skipped {}  {}",
                s.suite,
                fmt_opt(s.order),
                s.defects.last().copied().unwrap_or(0.0),
                s.skipped,
                if s.verdict.passed() { "pass" } else { "FAIL" }
            ))?;
        }
        out.line(&format!("verdict: {}", if pass { "pass" } else { "FAIL" }))?;
    }
    Ok(if pass { 0 } else { 1 })
}

fn json_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn cmd_sweep(
    out: &mut Out,
    id: &str,
    defect: &str,
    grid: &str,
    path: Option<&Path>,
    map: Option<&str>,
    center: Option<&str>,
    sampling: &Sampling,
) -> Result<i32> {
    let suite: Suite = defect.parse()?;
    let grid: ScaleGrid = grid.parse()?;
    let map = map.map(str::parse::<MapKind>).transpose()?;
    let inst = resolve(id)?;
    let center = match center {
        Some(c) => parse_point(c)?,
        None => inst.center.clone(),
    };
    check_dim(inst.float.dim(), &center)?;
    let cfg = SweepConfig {
        samples: sampling.samples,
        seed: out.global.seed,
        radius: sampling.radius,
        grid,
        map,
        ..SweepConfig::new(suite, center)
    };
    let report = with_backend!(inst, arithmetic(&inst, sampling.float), |s| run_sweep(s, &cfg)?);
    if let Some(p) = path {
        std::fs::write(p, report.to_csv())?;
        std::fs::write(json_path(p), serde_json::to_string_pretty(&report)? + "\n")?;
    }
    if out.global.json {
        out.json(&report)?;
    } else {
        out.line(&format!("{} on {} (seed {})", report.suite, report.structure, report.seed))?;
        for (e, d) in report.grid.iter().zip(&report.defects) {
            out.line(&format!("  {e:.6e}  {d:.6e}"))?;
        }
        out.line(&format!(
            "order {}  residual {}  skipped {}  verdict {}",
            fmt_opt(report.order),
            fmt_opt(report.residual),
            report.skipped,
            if report.verdict.passed() { "pass" } else { "FAIL" }
        ))?;
    }
    Ok(if report.verdict.passed() { 0 } else { 1 })
}

fn tangent_report<S: Scalar>(
    s: &dyn DilatationStructure<S>,
    x: &[f64],
    u: &[f64],
    v: &[f64],
    grid: &ScaleGrid,
) -> Result<serde_json::Value> {
    let (x, u, v): (Point<S>, Point<S>, Point<S>) = (Point::from_f64(x), Point::from_f64(u), Point::from_f64(v));
    let d = tangent_dist(s, &x, &u, &v, grid)?;
    let point = |p: &Point<S>| p.to_f64();
    let sum = tangent_sum(s, &x, &u, &v, grid)?;
    let diff = tangent_diff(s, &x, &u, &v, grid)?;
    let inv = tangent_inv(s, &x, &u, grid)?;
    let entry = |value: serde_json::Value, order: Option<f64>, gap: Option<f64>| {
        json!({"value": value, "order": order, "reference_gap": gap})
    };
    Ok(json!({
        "structure": s.name(),
        "distance": {
            "value": d.value, "order": d.order, "reference_gap": d.reference_gap, "degenerate": d.degenerate
        },
        "sum": entry(json!(point(&sum.value)), sum.order, sum.reference_gap),
        "diff": entry(json!(point(&diff.value)), diff.order, diff.reference_gap),
        "inv": entry(json!(point(&inv.value)), inv.order, inv.reference_gap),
    }))
}

fn cmd_tangent(out: &mut Out, id: &str, x: Option<&str>, u: &str, v: &str, grid: &str, float: bool) -> Result<i32> {
    let grid: ScaleGrid = grid.parse()?;
    let inst = resolve(id)?;
    let n = inst.float.dim();
    let x = match x {
        Some(p) => parse_point(p)?,
        None => inst.center.clone(),
    };
    let (u, v) = (parse_point(u)?, parse_point(v)?);
    for p in [&x, &u, &v] {
        check_dim(n, p)?;
    }
    let report = with_backend!(inst, arithmetic(&inst, float), |s| tangent_report(s, &x, &u, &v, &grid)?);
    if out.global.json {
        out.json(&report)?;
    } else {
        out.line(&format!("tangent data of {} at x = {}", inst.id, fmt_point(&x)))?;
        let d = &report["distance"];
        out.line(&format!("  d^x(u, v) = {}  order {}", d["value"], d["order"]))?;
        for op in ["sum", "diff", "inv"] {
            let e = &report[op];
            out.line(&format!("  {op:<4} = {}  order {}  reference gap {}", e["value"], e["order"], e["reference_gap"]))?;
        }
    }
    Ok(0)
}

fn cmd_ccdist(out: &mut Out, group: &str, from: Option<&str>, to: &str, k: usize, optimize_only: bool) -> Result<i32> {
    let g = resolve_group(group)?;
    let from = match from {
        Some(p) => parse_point(p)?,
        None => vec![0.0; g.dim()],
    };
    let to = parse_point(to)?;
    check_dim(g.dim(), &from)?;
    check_dim(g.dim(), &to)?;
    let target = g.mul(&g.inverse(&from), &to);
    if !optimize_only {
        // surfaces UnsupportedStep for groups without a constructive word
        word_decomposition(&g, &target)?;
    }
    let r = cc_upper(&g, &from, &to, &CcOptions { segments: k, ..CcOptions::default() })?;
    let report = json!({
        "group": group,
        "from": from,
        "to": to,
        "lower": r.lower,
        "upper": r.upper,
        "K": r.segments,
        "residual": r.residual,
        "word": r.word.as_ref().map(|w| w.to_string()),
        "word_bound": r.word_bound,
        "optimized": r.optimized,
    });
    if out.global.json {
        out.json(&report)?;
    } else {
        out.line(&format!("{} <= d_cc <= {}  (K = {}, residual {:.1e})", r.lower, r.upper, r.segments, r.residual))?;
        if let Some(w) = &r.word {
            out.line(&format!("word {w}  length {}", w.length()))?;
        }
    }
    Ok(0)
}

fn cmd_bch(out: &mut Out, group: &str, x: &str, y: &str) -> Result<i32> {
    let g = resolve_group(group)?;
    let (x, y) = (parse_point(x)?, parse_point(y)?);
    check_dim(g.dim(), &x)?;
    check_dim(g.dim(), &y)?;
    let p = g.mul(&x, &y);
    if out.global.json {
        out.json(&json!({"group": group, "x": x, "y": y, "product": p}))?;
    } else {
        out.line(&fmt_point(&p))?;
    }
    Ok(0)
}

fn cmd_decompose(out: &mut Out, group: &str, point: &str) -> Result<i32> {
    let g = resolve_group(group)?;
    let x = parse_point(point)?;
    check_dim(g.dim(), &x)?;
    let w = word_decomposition(&g, &x)?;
    let residual = coord_distance(&w.evaluate::<f64>(&g), &x);
    if out.global.json {
        out.json(&json!({
            "group": group,
            "point": x,
            "word": w.to_string(),
            "letters": w.letters,
            "length": w.length(),
            "max_param": w.max_param(),
            "residual": residual,
        }))?;
    } else {
        out.line(&format!("{w}"))?;
        out.line(&format!("length {}  max |t| {}  residual {:.1e}", w.length(), w.max_param(), residual))?;
    }
    Ok(0)
}

fn cmd_list(out: &mut Out) -> Result<i32> {
    if out.global.json {
        let items: Vec<_> = PATTERNS.iter().map(|(p, d)| json!({"id": p, "description": d})).collect();
        out.json(&items)?;
    } else {
        for (p, d) in PATTERNS {
            out.line(&format!("{p:<28} {d}"))?;
        }
    }
    Ok(0)
}

/// Runs a parsed command, writing to `w`. Returns the exit code.
pub fn run(cli: &Cli, w: &mut dyn Write) -> Result<i32> {
    let mut out = Out { w, global: &cli.global };
    match &cli.command {
        Command::List => cmd_list(&mut out),
        Command::Verify { id, sampling } => cmd_verify(&mut out, id, sampling),
        Command::Sweep { id, defect, grid, out: path, map, center, sampling } => cmd_sweep(
            &mut out,
            id,
            defect,
            grid,
            path.as_deref(),
            map.as_deref(),
            center.as_deref(),
            sampling,
        ),
        Command::Tangent { id, x, u, v, grid, float } => cmd_tangent(&mut out, id, x.as_deref(), u, v, grid, *float),
        Command::Ccdist { group, from, to, segments, optimize_only } => {
            cmd_ccdist(&mut out, group, from.as_deref(), to, *segments, *optimize_only)
        }
        Command::Bch { group, x, y } => cmd_bch(&mut out, group, x, y),
        Command::Decompose { group, point } => cmd_decompose(&mut out, group, point),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String) {
        let cli = Cli::try_parse_from(std::iter::once("dilatlab").chain(args.iter().copied())).unwrap();
        let mut buf = Vec::new();
        let code = match run(&cli, &mut buf) {
            Ok(c) => c,
            Err(e) => exit_code(&e),
        };
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn points_parse() {
        assert_eq!(parse_point("0,0.5,-1").unwrap(), vec![0.0, 0.5, -1.0]);
        assert!(parse_point("1,,2").is_err());
        assert!(parse_point("inf").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_args(&["verify", "nosuch"]).0, 2);
        assert_eq!(run_args(&["sweep", "euclidean:2", "--defect", "nosuch"]).0, 2);
        assert_eq!(run_args(&["decompose", "engel", "--point", "0,0,0,1"]).0, 4);
        assert_eq!(run_args(&["ccdist", "engel", "--to", "0,0,0,1"]).0, 4);
        assert_eq!(run_args(&["sweep", "contraction:matrix:/nonexistent/m.json", "--defect", "a3"]).0, 3);
    }

    #[test]
    fn bch_and_decompose_output() {
        let (code, text) = run_args(&["bch", "heisenberg:1", "--x", "1,0,0", "--y", "0,1,0"]);
        assert_eq!((code, text.trim()), (0, "1,1,0.5"));
        let (code, text) = run_args(&["decompose", "heisenberg:1", "--point", "0,0,1"]);
        assert_eq!(code, 0);
        assert!(text.starts_with("[X:1, Y:1, X:-1, Y:-1]"), "{text}");
    }

    #[test]
    fn quiet_prints_nothing() {
        let (code, text) = run_args(&["--quiet", "bch", "heisenberg:1", "--x", "1,0,0", "--y", "0,1,0"]);
        assert_eq!((code, text.as_str()), (0, ""));
    }
}
