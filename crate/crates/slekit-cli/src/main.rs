//! Command-line front end for the slekit toolkit: classify parameter pairs,
//! simulate traces, build light cones, estimate dimensions, compare range
//! ensembles, and render SVG figures.
//!
//! Conventions shared by every subcommand:
//!
//! * JSON for data, SVG for figures, CSV export for dimension fits.
//! * Every output file gets a manifest written beside it
//!   (`<output>.manifest.json`) recording the command, resolved parameters,
//!   seed, toolkit version, and timestamp; identical parameters and seed
//!   reproduce identical output bytes (set `SLEKIT_TIMESTAMP` to pin the
//!   manifest bytes too).
//! * All randomness flows from the single `--seed` value through
//!   counter-based stream splitting.
//! * Output files are written atomically (temp file, then rename).
//! * Exit codes: 0 success, 2 invalid parameters, 3 numerical failure
//!   (message carries the failing step), 4 malformed input file (message
//!   carries a JSON pointer to the offending field).

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_IO: u8 = 1;
const EXIT_INVALID_PARAMS: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_BAD_INPUT: u8 = 4;

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

type CliResult<T> = Result<T, Failure>;

impl From<slekit::Error> for Failure {
    fn from(e: slekit::Error) -> Self {
        let code = match &e {
            slekit::Error::InvalidParameter(_) => EXIT_INVALID_PARAMS,
            slekit::Error::Numerical(_) => EXIT_NUMERICAL,
        };
        Failure { code, message: e.to_string() }
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_INVALID_PARAMS, message: msg.into() }
}

fn bad_input(pointer: &str, what: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_BAD_INPUT,
        message: format!("malformed input at JSON pointer \"{pointer}\": {what}"),
    }
}

fn io_failure(what: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_IO, message: format!("i/o failure: {what}") }
}

#[derive(Parser)]
#[command(
    name = "slekit",
    version,
    about = "Simulate and analyze SLE_kappa(rho) processes and light cones"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify a (kappa, rho) pair: phase, constants, angles, dimension.
    Classify {
        #[arg(long, allow_negative_numbers = true)]
        kappa: f64,
        #[arg(long, allow_negative_numbers = true)]
        rho: f64,
        /// Write the JSON here instead of stdout (manifest written beside).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate an SLE_kappa(rho) trace and write it as JSON.
    Simulate {
        #[arg(long, allow_negative_numbers = true)]
        kappa: f64,
        #[arg(long, allow_negative_numbers = true)]
        rho: f64,
        /// Number of time steps (horizon = steps * dt).
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        dt: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a light cone: angle-switching tree, or direct SLE realization.
    Lightcone {
        #[arg(long, allow_negative_numbers = true)]
        kappa: f64,
        /// First extremal angle (constructive mode).
        #[arg(long, allow_negative_numbers = true)]
        theta1: Option<f64>,
        /// Second extremal angle (constructive mode).
        #[arg(long, allow_negative_numbers = true)]
        theta2: Option<f64>,
        /// Maximum number of direction switches in the tree.
        #[arg(long, default_value_t = 1)]
        switches: usize,
        /// Comma-separated rational switch times, e.g. "1/2" or "1/3,2/3".
        #[arg(long, default_value = "1/2")]
        fractions: String,
        /// Capacity budget per tree segment.
        #[arg(long, default_value_t = 0.05)]
        budget: f64,
        /// Seed point on the real axis.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        seed_x: f64,
        /// Treat the seed as lying on the negative ray (one-sided data).
        #[arg(long)]
        on_negative_ray: bool,
        /// Force-point weight: triggers direct-route mode.
        #[arg(long, allow_negative_numbers = true)]
        rho: Option<f64>,
        /// Number of time steps for the direct route.
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        dt: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Rasterization cell size; enables pocket detection when given.
        #[arg(long)]
        grid_eps: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the box-counting dimension of a point set in a JSON file.
    Dim {
        /// Trace or lightcone JSON file; "-" reads stdin.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        scale_min: Option<f64>,
        #[arg(long)]
        scale_max: Option<f64>,
        #[arg(long, default_value_t = 6)]
        scales: usize,
        /// Interpolate the polyline at this gap before counting.
        #[arg(long)]
        densify: Option<f64>,
        /// Write the JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also export the (scale, count) fit table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compare two range ensembles with Kolmogorov-Smirnov summary tests.
    Compare {
        /// Ensemble JSON: {"eps", "summaries": [...]} or {"eps", "samples": [...]}.
        #[arg(long)]
        input_a: PathBuf,
        #[arg(long)]
        input_b: PathBuf,
        /// Family significance level (Bonferroni-split across summaries).
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a trace or lightcone JSON file as an SVG figure.
    Render {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Figure width in SVG user units.
        #[arg(long, default_value_t = 800.0)]
        width: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cmd: Cmd) -> CliResult<()> {
    match cmd {
        Cmd::Classify { kappa, rho, out } => cmd_classify(kappa, rho, out.as_deref()),
        Cmd::Simulate { kappa, rho, steps, dt, seed, out } => {
            cmd_simulate(kappa, rho, steps, dt, seed, &out)
        }
        Cmd::Lightcone {
            kappa,
            theta1,
            theta2,
            switches,
            fractions,
            budget,
            seed_x,
            on_negative_ray,
            rho,
            steps,
            dt,
            seed,
            grid_eps,
            out,
        } => cmd_lightcone(LightconeArgs {
            kappa,
            theta1,
            theta2,
            switches,
            fractions,
            budget,
            seed_x,
            on_negative_ray,
            rho,
            steps,
            dt,
            seed,
            grid_eps,
            out,
        }),
        Cmd::Dim { input, scale_min, scale_max, scales, densify, out, csv } => cmd_dim(
            &input,
            scale_min,
            scale_max,
            scales,
            densify,
            out.as_deref(),
            csv.as_deref(),
        ),
        Cmd::Compare { input_a, input_b, alpha, out } => {
            cmd_compare(&input_a, &input_b, alpha, out.as_deref())
        }
        Cmd::Render { input, out, width } => cmd_render(&input, &out, width),
    }
}

// ---------------------------------------------------------------------------
// Manifest and output plumbing
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct Manifest {
    command: String,
    parameters: Value,
    seed: u64,
    toolkit_version: String,
    timestamp: String,
}

fn manifest(command: &str, parameters: Value, seed: u64) -> Manifest {
    let timestamp = std::env::var("SLEKIT_TIMESTAMP").unwrap_or_else(|_| {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs().to_string())
            .unwrap_or_else(|_| "0".to_string())
    });
    Manifest {
        command: command.to_string(),
        parameters,
        seed,
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp,
    }
}

fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| invalid(format!("output path {} has no file name", path.display())))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    std::fs::write(&tmp, contents).map_err(io_failure)?;
    std::fs::rename(&tmp, path).map_err(io_failure)?;
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

/// Write a document to `out` with its manifest beside it, or to stdout.
fn emit(out: Option<&Path>, body: &str, man: &Manifest) -> CliResult<()> {
    match out {
        Some(path) => {
            write_atomic(path, body)?;
            let man_body = to_pretty(man)?;
            write_atomic(&manifest_path(path), &man_body)
        }
        None => {
            println!("{body}");
            Ok(())
        }
    }
}

fn to_pretty<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| io_failure(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn pt(p: Complex64) -> [f64; 2] {
    [p.re, p.im]
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ClassifyDoc {
    kappa: f64,
    rho: f64,
    phase: String,
    delta: f64,
    chi: f64,
    lambda: f64,
    theta_rho: Option<f64>,
    theta_c: Option<f64>,
    dimension: Option<f64>,
    simple: bool,
    reversible: bool,
}

fn cmd_classify(kappa: f64, rho: f64, out: Option<&Path>) -> CliResult<()> {
    let params = slekit::sle::params(kappa, rho)?;
    let phase = slekit::sle::classify_phase(kappa, rho)?;
    let dimension = slekit::sle::phase_dimension(kappa, rho)?;
    let doc = ClassifyDoc {
        kappa,
        rho,
        phase: phase.label().to_string(),
        delta: params.delta,
        chi: params.chi,
        lambda: params.lambda,
        theta_rho: params.theta_rho,
        theta_c: params.theta_c,
        dimension,
        simple: phase.is_simple(),
        reversible: phase.is_reversible(),
    };
    let man = manifest("classify", json!({ "kappa": kappa, "rho": rho }), 0);
    emit(out, &to_pretty(&doc)?, &man)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct TraceDoc {
    kappa: f64,
    rho: f64,
    dt: f64,
    seed: u64,
    capacity_times: Vec<f64>,
    points: Vec<[f64; 2]>,
}

fn cmd_simulate(
    kappa: f64,
    rho: f64,
    steps: usize,
    dt: f64,
    seed: u64,
    out: &Path,
) -> CliResult<()> {
    if steps == 0 {
        return Err(invalid("steps must be >= 1"));
    }
    if !(dt > 0.0) {
        return Err(invalid(format!("dt must be > 0, got {dt}")));
    }
    let horizon = steps as f64 * dt;
    let mut rng = slekit::rng::stream(seed, 0);
    let trace = slekit::sle::sample_sle_trace(kappa, rho, horizon, dt, &mut rng)?;
    let doc = TraceDoc {
        kappa,
        rho,
        dt,
        seed,
        capacity_times: trace.capacity_times,
        points: trace.points.into_iter().map(pt).collect(),
    };
    let man = manifest(
        "simulate",
        json!({ "kappa": kappa, "rho": rho, "steps": steps, "dt": dt }),
        seed,
    );
    emit(Some(out), &to_pretty(&doc)?, &man)
}

// ---------------------------------------------------------------------------
// lightcone
// ---------------------------------------------------------------------------

struct LightconeArgs {
    kappa: f64,
    theta1: Option<f64>,
    theta2: Option<f64>,
    switches: usize,
    fractions: String,
    budget: f64,
    seed_x: f64,
    on_negative_ray: bool,
    rho: Option<f64>,
    steps: Option<usize>,
    dt: f64,
    seed: u64,
    grid_eps: Option<f64>,
    out: PathBuf,
}

#[derive(Serialize)]
struct SegmentDoc {
    node_id: usize,
    parent: Option<usize>,
    depth: usize,
    angle: f64,
    switch_fraction: Option<[u32; 2]>,
    points: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct SkipDoc {
    node_id: usize,
    parent: Option<usize>,
    angle: f64,
    reason: String,
}

#[derive(Serialize)]
struct PocketDoc {
    opening: [f64; 2],
    closing: [f64; 2],
    side1: Vec<[f64; 2]>,
    side2: Vec<[f64; 2]>,
    diameter: f64,
    order_index: Option<usize>,
    opening_visit: usize,
}

#[derive(Serialize)]
struct LightconeDoc {
    kappa: f64,
    mode: String,
    theta1: f64,
    theta2: f64,
    rho: Option<f64>,
    n_switches: usize,
    dt: f64,
    seed: u64,
    grid_eps: Option<f64>,
    segments: Vec<SegmentDoc>,
    skipped: Vec<SkipDoc>,
    pockets: Vec<PocketDoc>,
}

fn pocket_doc(p: &slekit::lightcone::Pocket) -> PocketDoc {
    PocketDoc {
        opening: pt(p.opening),
        closing: pt(p.closing),
        side1: p.side1.iter().copied().map(pt).collect(),
        side2: p.side2.iter().copied().map(pt).collect(),
        diameter: p.diameter,
        order_index: p.order_index,
        opening_visit: p.opening_visit,
    }
}

fn parse_fractions(s: &str) -> CliResult<Vec<(u32, u32)>> {
    s.split(',')
        .map(|part| {
            let part = part.trim();
            let (num, den) = part
                .split_once('/')
                .ok_or_else(|| invalid(format!("switch fraction \"{part}\" is not of the form a/b")))?;
            let num: u32 = num
                .trim()
                .parse()
                .map_err(|_| invalid(format!("bad numerator in switch fraction \"{part}\"")))?;
            let den: u32 = den
                .trim()
                .parse()
                .map_err(|_| invalid(format!("bad denominator in switch fraction \"{part}\"")))?;
            Ok((num, den))
        })
        .collect()
}

fn cmd_lightcone(args: LightconeArgs) -> CliResult<()> {
    let direct = args.rho.is_some();
    if direct && (args.theta1.is_some() || args.theta2.is_some()) {
        return Err(invalid(
            "--rho selects the direct route; --theta1/--theta2 select the \
             constructive route; give one or the other",
        ));
    }
    let (doc, params) = if direct {
        let rho = args.rho.unwrap();
        let steps = args
            .steps
            .ok_or_else(|| invalid("direct route needs --steps"))?;
        if steps == 0 {
            return Err(invalid("steps must be >= 1"));
        }
        let horizon = steps as f64 * args.dt;
        let mut rng = slekit::rng::stream(args.seed, 0);
        let trace =
            slekit::lightcone::lightcone_via_sle(args.kappa, rho, horizon, args.dt, &mut rng)?;
        let theta = slekit::lightcone::theta_of_rho(args.kappa, rho)?;
        let pockets = match args.grid_eps {
            Some(eps) => {
                let found = slekit::lightcone::detect_pockets_trace(&trace.points, eps)?;
                let (ordered, _) = slekit::lightcone::order_pockets(found, None, 1.0)?;
                ordered
            }
            None => Vec::new(),
        };
        let doc = LightconeDoc {
            kappa: args.kappa,
            mode: "direct".to_string(),
            theta1: 0.0,
            theta2: theta,
            rho: Some(rho),
            n_switches: 0,
            dt: args.dt,
            seed: args.seed,
            grid_eps: args.grid_eps,
            segments: vec![SegmentDoc {
                node_id: 0,
                parent: None,
                depth: 0,
                angle: theta,
                switch_fraction: None,
                points: trace.points.iter().copied().map(pt).collect(),
            }],
            skipped: Vec::new(),
            pockets: pockets.iter().map(pocket_doc).collect(),
        };
        let params = json!({
            "kappa": args.kappa, "rho": rho, "steps": steps, "dt": args.dt,
            "grid_eps": args.grid_eps,
        });
        (doc, params)
    } else {
        let theta1 = args
            .theta1
            .ok_or_else(|| invalid("constructive route needs --theta1 and --theta2"))?;
        let theta2 = args
            .theta2
            .ok_or_else(|| invalid("constructive route needs --theta1 and --theta2"))?;
        let fractions = parse_fractions(&args.fractions)?;
        let seed_point = if args.on_negative_ray {
            slekit::lightcone::Seed::OnNegativeRay { x: args.seed_x }
        } else {
            slekit::lightcone::Seed::BoundaryPoint { x: args.seed_x }
        };
        let approx = slekit::lightcone::build_ln(
            args.kappa,
            theta1,
            theta2,
            args.switches,
            &fractions,
            args.budget,
            args.dt,
            seed_point,
            args.seed,
        )?;
        let pockets = match args.grid_eps {
            Some(eps) => {
                let found = slekit::lightcone::detect_pockets(&approx, eps)?;
                let (ordered, _) = slekit::lightcone::order_pockets(found, None, 1.0)?;
                ordered
            }
            None => Vec::new(),
        };
        let doc = LightconeDoc {
            kappa: args.kappa,
            mode: "constructive".to_string(),
            theta1,
            theta2,
            rho: None,
            n_switches: args.switches,
            dt: args.dt,
            seed: args.seed,
            grid_eps: args.grid_eps,
            segments: approx
                .segments
                .iter()
                .map(|s| SegmentDoc {
                    node_id: s.node_id,
                    parent: s.parent,
                    depth: s.depth,
                    angle: s.angle,
                    switch_fraction: s.switch_fraction.map(|(n, d)| [n, d]),
                    points: s.points.iter().copied().map(pt).collect(),
                })
                .collect(),
            skipped: approx
                .skipped
                .iter()
                .map(|s| SkipDoc {
                    node_id: s.node_id,
                    parent: s.parent,
                    angle: s.angle,
                    reason: s.reason.clone(),
                })
                .collect(),
            pockets: pockets.iter().map(pocket_doc).collect(),
        };
        let params = json!({
            "kappa": args.kappa, "theta1": theta1, "theta2": theta2,
            "switches": args.switches, "fractions": args.fractions,
            "budget": args.budget, "dt": args.dt,
            "seed_x": args.seed_x, "on_negative_ray": args.on_negative_ray,
            "grid_eps": args.grid_eps,
        });
        (doc, params)
    };
    let man = manifest("lightcone", params, args.seed);
    emit(Some(&args.out), &to_pretty(&doc)?, &man)
}

// ---------------------------------------------------------------------------
// JSON input parsing (shared by dim / compare / render)
// ---------------------------------------------------------------------------

fn read_input(path: &Path) -> CliResult<Value> {
    let text = if path.as_os_str() == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(io_failure)?;
        buf
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| bad_input("", format!("cannot read {}: {e}", path.display())))?
    };
    serde_json::from_str(&text).map_err(|e| bad_input("", format!("not valid JSON: {e}")))
}

fn number_at(v: &Value, ptr: &str) -> CliResult<f64> {
    v.as_f64()
        .ok_or_else(|| bad_input(ptr, "expected a number"))
}

/// Parse a [[re, im], ...] array at the given pointer.
fn point_list(v: &Value, ptr: &str) -> CliResult<Vec<Complex64>> {
    let arr = v
        .as_array()
        .ok_or_else(|| bad_input(ptr, "expected an array of [re, im] pairs"))?;
    let mut out = Vec::with_capacity(arr.len());
    for (i, item) in arr.iter().enumerate() {
        let pair = item
            .as_array()
            .ok_or_else(|| bad_input(&format!("{ptr}/{i}"), "expected [re, im]"))?;
        if pair.len() != 2 {
            return Err(bad_input(
                &format!("{ptr}/{i}"),
                format!("expected 2 coordinates, got {}", pair.len()),
            ));
        }
        let re = number_at(&pair[0], &format!("{ptr}/{i}/0"))?;
        let im = number_at(&pair[1], &format!("{ptr}/{i}/1"))?;
        out.push(Complex64::new(re, im));
    }
    Ok(out)
}

/// Extract the drawable point set of a trace or lightcone document.
fn document_points(doc: &Value) -> CliResult<Vec<Complex64>> {
    if let Some(points) = doc.get("points") {
        return point_list(points, "/points");
    }
    if let Some(segments) = doc.get("segments") {
        let arr = segments
            .as_array()
            .ok_or_else(|| bad_input("/segments", "expected an array"))?;
        let mut all = Vec::new();
        for (i, seg) in arr.iter().enumerate() {
            let pts = seg
                .get("points")
                .ok_or_else(|| bad_input(&format!("/segments/{i}/points"), "missing field"))?;
            all.extend(point_list(pts, &format!("/segments/{i}/points"))?);
        }
        return Ok(all);
    }
    Err(bad_input("/points", "missing field (no points or segments)"))
}

// ---------------------------------------------------------------------------
// dim
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct DimDoc {
    value: f64,
    stderr: f64,
    intercept: f64,
    r_squared: f64,
    scales_used: Vec<f64>,
    counts: Vec<usize>,
    n_points: usize,
}

#[allow(clippy::too_many_arguments)]
fn cmd_dim(
    input: &Path,
    scale_min: Option<f64>,
    scale_max: Option<f64>,
    scales: usize,
    densify: Option<f64>,
    out: Option<&Path>,
    csv: Option<&Path>,
) -> CliResult<()> {
    let doc = read_input(input)?;
    let mut points = document_points(&doc)?;
    if let Some(gap) = densify {
        points = slekit::analysis::densify_polyline(&points, gap)?;
    }
    let estimate = match (scale_min, scale_max) {
        (Some(lo), Some(hi)) => slekit::analysis::box_dimension(&points, lo, hi, scales)?,
        (None, None) => {
            let ladder = slekit::analysis::default_box_scales(&points)?;
            slekit::analysis::box_counting_dimension(&points, &ladder)?
        }
        _ => {
            return Err(invalid(
                "give both --scale-min and --scale-max, or neither",
            ))
        }
    };
    let dim_doc = DimDoc {
        value: estimate.value,
        stderr: estimate.stderr,
        intercept: estimate.intercept,
        r_squared: estimate.r_squared,
        scales_used: estimate.scales_used.clone(),
        counts: estimate.counts.clone(),
        n_points: points.len(),
    };
    let params = json!({
        "input": input.display().to_string(),
        "scale_min": scale_min, "scale_max": scale_max, "scales": scales,
        "densify": densify,
    });
    let man = manifest("dim", params, 0);
    if let Some(csv_path) = csv {
        let mut table = String::from("scale,count\n");
        for (s, c) in estimate.scales_used.iter().zip(&estimate.counts) {
            table.push_str(&format!("{s},{c}\n"));
        }
        write_atomic(csv_path, &table)?;
        write_atomic(&manifest_path(csv_path), &to_pretty(&man)?)?;
    }
    emit(out, &to_pretty(&dim_doc)?, &man)
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CompareDoc {
    alpha: f64,
    per_summary_alpha: f64,
    verdict: String,
    passes: bool,
    comparisons: Vec<ComparisonDoc>,
}

#[derive(Serialize)]
struct ComparisonDoc {
    name: String,
    statistic: f64,
    critical: f64,
    passes: bool,
}

/// Parse one ensemble file into per-sample range summaries. Accepts either
/// precomputed summaries or raw point samples plus the normalization eps.
fn ensemble_summaries(doc: &Value) -> CliResult<Vec<slekit::analysis::RangeSummaries>> {
    let eps = number_at(
        doc.get("eps").ok_or_else(|| bad_input("/eps", "missing field"))?,
        "/eps",
    )?;
    if let Some(summaries) = doc.get("summaries") {
        let arr = summaries
            .as_array()
            .ok_or_else(|| bad_input("/summaries", "expected an array"))?;
        let mut out = Vec::with_capacity(arr.len());
        for (i, s) in arr.iter().enumerate() {
            let field = |name: &str| -> CliResult<f64> {
                let ptr = format!("/summaries/{i}/{name}");
                number_at(
                    s.get(name).ok_or_else(|| bad_input(&ptr, "missing field"))?,
                    &ptr,
                )
            };
            out.push(slekit::analysis::RangeSummaries {
                eps: field("eps")?,
                neighborhood_area: field("neighborhood_area")?,
                boundary_fraction: field("boundary_fraction")?,
                grid_coverage: field("grid_coverage")?,
            });
        }
        return Ok(out);
    }
    if let Some(samples) = doc.get("samples") {
        let arr = samples
            .as_array()
            .ok_or_else(|| bad_input("/samples", "expected an array"))?;
        let mut out = Vec::with_capacity(arr.len());
        for (i, sample) in arr.iter().enumerate() {
            let pts = point_list(sample, &format!("/samples/{i}"))?;
            out.push(slekit::analysis::range_summaries(&pts, eps)?);
        }
        return Ok(out);
    }
    Err(bad_input("/summaries", "missing field (no summaries or samples)"))
}

fn cmd_compare(input_a: &Path, input_b: &Path, alpha: f64, out: Option<&Path>) -> CliResult<()> {
    let doc_a = read_input(input_a)?;
    let doc_b = read_input(input_b)?;
    let a = ensemble_summaries(&doc_a)?;
    let b = ensemble_summaries(&doc_b)?;
    let report = slekit::analysis::range_equivalence_stat(&a, &b, alpha)?;
    let doc = CompareDoc {
        alpha: report.alpha,
        per_summary_alpha: report.per_summary_alpha,
        verdict: if report.passes { "pass" } else { "fail" }.to_string(),
        passes: report.passes,
        comparisons: report
            .comparisons
            .iter()
            .map(|c| ComparisonDoc {
                name: c.name.to_string(),
                statistic: c.statistic,
                critical: c.critical,
                passes: c.passes,
            })
            .collect(),
    };
    let params = json!({
        "input_a": input_a.display().to_string(),
        "input_b": input_b.display().to_string(),
        "alpha": alpha,
    });
    let man = manifest("compare", params, 0);
    emit(out, &to_pretty(&doc)?, &man)
}

// ---------------------------------------------------------------------------
// render
// ---------------------------------------------------------------------------

struct SvgCanvas {
    min: Complex64,
    max: Complex64,
    has_points: bool,
}

impl SvgCanvas {
    fn new() -> Self {
        SvgCanvas {
            min: Complex64::new(f64::MAX, f64::MAX),
            max: Complex64::new(f64::MIN, f64::MIN),
            has_points: false,
        }
    }

    fn absorb(&mut self, pts: &[Complex64]) {
        for p in pts {
            self.min.re = self.min.re.min(p.re);
            self.min.im = self.min.im.min(p.im);
            self.max.re = self.max.re.max(p.re);
            self.max.im = self.max.im.max(p.im);
            self.has_points = true;
        }
    }
}

fn cmd_render(input: &Path, out: &Path, width: f64) -> CliResult<()> {
    if !(width > 0.0) {
        return Err(invalid(format!("width must be > 0, got {width}")));
    }
    let doc = read_input(input)?;

    // Gather layers: polylines to stroke, pockets to shade, marked points.
    let mut polylines: Vec<(Vec<Complex64>, &'static str)> = Vec::new();
    let mut pockets: Vec<(Vec<Complex64>, Complex64, Complex64)> = Vec::new();
    if let Some(segments) = doc.get("segments") {
        let arr = segments
            .as_array()
            .ok_or_else(|| bad_input("/segments", "expected an array"))?;
        let theta1 = doc.get("theta1").and_then(|v| v.as_f64());
        for (i, seg) in arr.iter().enumerate() {
            let pts = point_list(
                seg.get("points")
                    .ok_or_else(|| bad_input(&format!("/segments/{i}/points"), "missing field"))?,
                &format!("/segments/{i}/points"),
            )?;
            let angle = seg.get("angle").and_then(|v| v.as_f64());
            let color = match (angle, theta1) {
                (Some(a), Some(t1)) if a == t1 => "#235789",
                (Some(_), Some(_)) => "#c1292e",
                _ => "#235789",
            };
            polylines.push((pts, color));
        }
    } else if let Some(points) = doc.get("points") {
        polylines.push((point_list(points, "/points")?, "#235789"));
    } else {
        return Err(bad_input("/points", "missing field (no points or segments)"));
    }
    if let Some(pks) = doc.get("pockets") {
        let arr = pks
            .as_array()
            .ok_or_else(|| bad_input("/pockets", "expected an array"))?;
        for (i, p) in arr.iter().enumerate() {
            let side1 = point_list(
                p.get("side1")
                    .ok_or_else(|| bad_input(&format!("/pockets/{i}/side1"), "missing field"))?,
                &format!("/pockets/{i}/side1"),
            )?;
            let mut side2 = point_list(
                p.get("side2")
                    .ok_or_else(|| bad_input(&format!("/pockets/{i}/side2"), "missing field"))?,
                &format!("/pockets/{i}/side2"),
            )?;
            let opening = point_list(
                &Value::Array(vec![p
                    .get("opening")
                    .ok_or_else(|| bad_input(&format!("/pockets/{i}/opening"), "missing field"))?
                    .clone()]),
                &format!("/pockets/{i}/opening"),
            )?[0];
            let closing = point_list(
                &Value::Array(vec![p
                    .get("closing")
                    .ok_or_else(|| bad_input(&format!("/pockets/{i}/closing"), "missing field"))?
                    .clone()]),
                &format!("/pockets/{i}/closing"),
            )?[0];
            side2.reverse();
            let mut boundary = side1;
            boundary.extend(side2);
            pockets.push((boundary, opening, closing));
        }
    }

    let mut canvas = SvgCanvas::new();
    for (pts, _) in &polylines {
        canvas.absorb(pts);
    }
    for (boundary, _, _) in &pockets {
        canvas.absorb(boundary);
    }

    let svg = render_svg(&canvas, &polylines, &pockets, width);
    let params = json!({
        "input": input.display().to_string(),
        "width": width,
    });
    let man = manifest("render", params, 0);
    write_atomic(out, &svg)?;
    write_atomic(&manifest_path(out), &to_pretty(&man)?)
}

fn render_svg(
    canvas: &SvgCanvas,
    polylines: &[(Vec<Complex64>, &'static str)],
    pockets: &[(Vec<Complex64>, Complex64, Complex64)],
    width: f64,
) -> String {
    let mut svg = String::new();
    if !canvas.has_points {
        svg.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
             width=\"{width}\" height=\"{width}\" viewBox=\"0 0 1 1\"></svg>\n"
        ));
        return svg;
    }
    let span_x = (canvas.max.re - canvas.min.re).max(1e-12);
    let span_y = (canvas.max.im - canvas.min.im).max(1e-12);
    let pad = 0.03 * span_x.max(span_y);
    let scale = width / (span_x + 2.0 * pad);
    let height = (span_y + 2.0 * pad) * scale;
    let map = |p: Complex64| -> (f64, f64) {
        (
            (p.re - canvas.min.re + pad) * scale,
            (canvas.max.im - p.im + pad) * scale,
        )
    };
    let coords = |pts: &[Complex64]| -> String {
        let mut s = String::with_capacity(pts.len() * 14);
        for (i, p) in pts.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let (x, y) = map(*p);
            s.push_str(&format!("{x:.3},{y:.3}"));
        }
        s
    };
    let stroke = (width / 600.0).max(0.5);
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\">\n"
    ));
    for (boundary, _, _) in pockets {
        svg.push_str(&format!(
            "  <polygon points=\"{}\" fill=\"#f4b942\" fill-opacity=\"0.45\" stroke=\"none\"/>\n",
            coords(boundary)
        ));
    }
    for (pts, color) in polylines {
        if pts.len() == 1 {
            let (x, y) = map(pts[0]);
            svg.push_str(&format!(
                "  <circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"{stroke:.3}\" fill=\"{color}\"/>\n"
            ));
        } else if pts.len() > 1 {
            svg.push_str(&format!(
                "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" \
                 stroke-width=\"{stroke:.3}\" stroke-linejoin=\"round\"/>\n",
                coords(pts)
            ));
        }
    }
    let marker = 2.5 * stroke;
    for (_, opening, closing) in pockets {
        let (ox, oy) = map(*opening);
        let (cx, cy) = map(*closing);
        svg.push_str(&format!(
            "  <circle cx=\"{ox:.3}\" cy=\"{oy:.3}\" r=\"{marker:.3}\" fill=\"#1b9e77\"/>\n"
        ));
        svg.push_str(&format!(
            "  <circle cx=\"{cx:.3}\" cy=\"{cy:.3}\" r=\"{marker:.3}\" fill=\"#d95f02\"/>\n"
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
