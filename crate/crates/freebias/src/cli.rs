//! Command-line surface: parse measure/triple documents, run transform
//! chains, convolutions, LK solves, and verification suites; emit CSV/JSON.
//!
//! Exit-code contract: 0 ok, 2 parse, 3 solver, 4 precondition,
//! 5 verification, 1 io. Documents are JSON with a "type" tag; unknown
//! fields are rejected (typos in scripts should fail loudly, not silently).

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::freeconv::{convolution_root_f, free_convolve, replace_one_check};
use crate::holomorphic::{cauchy_transform, AnalyticTransform, TransformKind};
use crate::infdiv::{
    cauchy_from_levy, gallery_azadi_density, gallery_cauchy_levy, gallery_cauchy_levy_density,
    gallery_semicircle_levy_density, levy_from_measure, levy_from_roots, LevyTriple,
};
use crate::inversion::{
    curve_from_transform, default_grid, stieltjes_density, DensityCurve,
};
use crate::measure::{Atom, ProbabilityMeasure};
use crate::transforms::{apply_chain, free_zero_bias, ChainOutput, ChainStep};
use crate::C64;

// ----- documents -----------------------------------------------------------

fn parse_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Parse(e.to_string())
}

/// Deserialize a tagged JSON object into T after removing the handled tag,
/// rejecting unknown fields via T's own deny_unknown_fields.
fn from_tagged<T: serde::de::DeserializeOwned>(mut obj: Value) -> Result<T> {
    obj.as_object_mut()
        .ok_or_else(|| Error::Parse("document must be a JSON object".into()))?
        .remove("type");
    serde_json::from_value(obj).map_err(parse_err)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomicDoc {
    atoms: Vec<(f64, f64)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridDoc {
    grid: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SemicircleDoc {
    mean: f64,
    variance: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ArcsineDoc {
    left: f64,
    right: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FreePoissonDoc {
    lambda: f64,
    alpha: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CauchyDoc {
    location: f64,
    scale: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MixtureDoc {
    weights: Vec<f64>,
    components: Vec<Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TripleDoc {
    mean: f64,
    variance: f64,
    levy: Value,
}

pub fn measure_from_value(doc: &Value, mass_tol: f64) -> Result<ProbabilityMeasure> {
    let tag = doc
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Parse("document needs a string \"type\" field".into()))?
        .to_owned();
    let body = doc.clone();
    match tag.as_str() {
        "atomic" => {
            let d: AtomicDoc = from_tagged(body)?;
            ProbabilityMeasure::atomic(
                d.atoms
                    .into_iter()
                    .map(|(location, weight)| Atom { location, weight })
                    .collect(),
            )
        }
        "grid" => {
            let d: GridDoc = from_tagged(body)?;
            ProbabilityMeasure::grid_density(d.grid, d.values, mass_tol)
        }
        "semicircle" => {
            let d: SemicircleDoc = from_tagged(body)?;
            ProbabilityMeasure::semicircle(d.mean, d.variance)
        }
        "arcsine" => {
            let d: ArcsineDoc = from_tagged(body)?;
            ProbabilityMeasure::arcsine(d.left, d.right)
        }
        "free_poisson" => {
            let d: FreePoissonDoc = from_tagged(body)?;
            ProbabilityMeasure::free_poisson(d.lambda, d.alpha)
        }
        "cauchy" => {
            let d: CauchyDoc = from_tagged(body)?;
            ProbabilityMeasure::cauchy_law(d.location, d.scale)
        }
        "mixture" => {
            let d: MixtureDoc = from_tagged(body)?;
            let comps = d
                .components
                .iter()
                .map(|c| measure_from_value(c, mass_tol))
                .collect::<Result<Vec<_>>>()?;
            ProbabilityMeasure::mixture(d.weights, comps)
        }
        other => Err(Error::Parse(format!("unknown measure type {other:?}"))),
    }
}

pub fn triple_from_value(doc: &Value, mass_tol: f64) -> Result<LevyTriple> {
    let d: TripleDoc = serde_json::from_value(doc.clone()).map_err(parse_err)?;
    LevyTriple::new(d.mean, d.variance, measure_from_value(&d.levy, mass_tol)?)
}

fn read_doc(path: &PathBuf) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(parse_err)
}

/// JSON echo of a measure: atomic measures list their atoms verbatim, grids
/// are summarized (the CSV carries the curve), named laws echo parameters.
pub fn measure_to_value(m: &ProbabilityMeasure) -> Value {
    match m {
        ProbabilityMeasure::Atomic { atoms } => json!({
            "type": "atomic",
            "atoms": atoms.iter().map(|a| json!([a.location, a.weight])).collect::<Vec<_>>(),
        }),
        ProbabilityMeasure::GridDensity { grid, .. } => json!({
            "type": "grid",
            "points": grid.len(),
            "support": [grid[0], grid[grid.len() - 1]],
        }),
        ProbabilityMeasure::Semicircle { mean, variance } => {
            json!({"type": "semicircle", "mean": mean, "variance": variance})
        }
        ProbabilityMeasure::Arcsine { left, right } => {
            json!({"type": "arcsine", "left": left, "right": right})
        }
        ProbabilityMeasure::FreePoisson { rate, jump } => {
            json!({"type": "free_poisson", "lambda": rate, "alpha": jump})
        }
        ProbabilityMeasure::CauchyLaw { location, scale } => {
            json!({"type": "cauchy", "location": location, "scale": scale})
        }
        ProbabilityMeasure::Mixture { weights, components } => json!({
            "type": "mixture",
            "weights": weights,
            "components": components.iter().map(measure_to_value).collect::<Vec<_>>(),
        }),
    }
}

/// Parse "a+bi" / "a-bi" / "bi" / "a" into a complex number.
pub fn parse_complex(s: &str) -> Result<C64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("cannot parse complex number {s:?}"));
    if let Some(body) = t.strip_suffix('i') {
        // split before the sign of the imaginary part (skipping a leading
        // sign and signs inside exponents like 1e-3)
        let chars: Vec<char> = body.chars().collect();
        let mut split = None;
        for k in (1..chars.len()).rev() {
            if (chars[k] == '+' || chars[k] == '-')
                && chars[k - 1] != 'e'
                && chars[k - 1] != 'E'
            {
                split = Some(k);
                break;
            }
        }
        match split {
            Some(k) => {
                let re: f64 = body[..k].parse().map_err(|_| bad())?;
                let im_str = &body[k..];
                let im: f64 = if im_str == "+" {
                    1.0
                } else if im_str == "-" {
                    -1.0
                } else {
                    im_str.parse().map_err(|_| bad())?
                };
                Ok(C64::new(re, im))
            }
            None => {
                let im: f64 = if body.is_empty() { 1.0 } else { body.parse().map_err(|_| bad())? };
                Ok(C64::new(0.0, im))
            }
        }
    } else {
        let re: f64 = t.parse().map_err(|_| bad())?;
        Ok(C64::new(re, 0.0))
    }
}

fn parse_step(s: &str) -> Result<ChainStep> {
    match s {
        "square_bias" => return Ok(ChainStep::SquareBias),
        "inverse_square_bias" => return Ok(ChainStep::InverseSquareBias),
        "el_gordo" => return Ok(ChainStep::ElGordo),
        "free_zero_bias" => return Ok(ChainStep::FreeZeroBias),
        "classical_zero_bias" => return Ok(ChainStep::ClassicalZeroBias),
        _ => {}
    }
    if let Some(arg) = s.strip_prefix("shift:") {
        let c: f64 = arg
            .parse()
            .map_err(|_| Error::Parse(format!("bad shift argument {arg:?}")))?;
        return Ok(ChainStep::Shift(c));
    }
    if let Some(arg) = s.strip_prefix("scale:") {
        let a: f64 = arg
            .parse()
            .map_err(|_| Error::Parse(format!("bad scale argument {arg:?}")))?;
        return Ok(ChainStep::Scale(a));
    }
    if let Some(path) = s.strip_prefix("flat:") {
        let doc = read_doc(&PathBuf::from(path))?;
        return Ok(ChainStep::FlatCombine(measure_from_value(&doc, 1e-6)?));
    }
    Err(Error::Parse(format!("unknown chain step {s:?}")))
}

fn step_name(s: &ChainStep) -> String {
    match s {
        ChainStep::SquareBias => "square_bias".into(),
        ChainStep::InverseSquareBias => "inverse_square_bias".into(),
        ChainStep::ElGordo => "el_gordo".into(),
        ChainStep::FlatCombine(_) => "flat".into(),
        ChainStep::FreeZeroBias => "free_zero_bias".into(),
        ChainStep::ClassicalZeroBias => "classical_zero_bias".into(),
        ChainStep::Shift(c) => format!("shift:{c}"),
        ChainStep::Scale(a) => format!("scale:{a}"),
    }
}

// ----- argument surface ----------------------------------------------------

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Parser)]
#[command(name = "freebias", version, about = "Numerical free probability toolkit")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Grid points for density curves
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Comma-separated descending smoothing schedule, e.g. 1e-2,5e-3
    #[arg(long, global = true, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Solver tolerance
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Solver iteration cap
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// Output base path; writes PATH.csv / PATH.json per --format
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// What to emit
    #[arg(long, global = true, value_enum, default_value = "both")]
    format: Format,
    /// Point-evaluation mode: print the transform value at z = "a+bi"
    #[arg(long, global = true)]
    z: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Density curve of a measure document via Stieltjes inversion
    Density { doc: PathBuf },
    /// Apply a chain of bias transforms, left to right
    Transform {
        doc: PathBuf,
        /// Steps: square_bias, inverse_square_bias, el_gordo, free_zero_bias,
        /// classical_zero_bias, shift:c, scale:a, flat:<doc path>
        #[arg(required = true)]
        steps: Vec<String>,
    },
    /// Density of the freely infinitely divisible law of a Levy triple
    Infdiv { doc: PathBuf },
    /// Recover the Levy measure density of a freely infinitely divisible law
    Levy { doc: PathBuf },
    /// Free additive convolution of two measures
    Convolve { a: PathBuf, b: PathBuf },
    /// n-th free convolution root (F at --z, or its density curve)
    Root {
        doc: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        n: f64,
    },
    /// Voiculescu transform phi of a measure at --z
    Phi { doc: PathBuf },
    /// Run a named verification suite and report JSON
    Verify { suite: String },
}

// ----- output plumbing -----------------------------------------------------

fn emit(curve: Option<&DensityCurve>, report: &Value, cli: &Cli) -> Result<()> {
    let want_csv = matches!(cli.format, Format::Csv | Format::Both) && curve.is_some();
    let want_json = matches!(cli.format, Format::Json | Format::Both);
    match &cli.out {
        Some(base) => {
            if want_csv {
                let mut p = base.clone();
                p.set_extension("csv");
                std::fs::write(p, curve.unwrap().to_csv())?;
            }
            if want_json {
                let mut p = base.clone();
                p.set_extension("json");
                std::fs::write(p, format!("{:#}\n", report))?;
            }
        }
        None => {
            if want_json {
                println!("{:#}", report);
            }
            if want_csv {
                print!("{}", curve.unwrap().to_csv());
            }
        }
    }
    Ok(())
}

fn complex_json(w: C64) -> Value {
    json!({"re": w.re, "im": w.im})
}

fn config_from(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(g) = cli.grid {
        cfg.grid_points = g;
    }
    if let Some(e) = &cli.eps {
        cfg.eps_schedule = e.clone();
    }
    if let Some(t) = cli.tol {
        cfg.solver_tol = t;
    }
    if let Some(k) = cli.max_iter {
        cfg.max_iter = k;
    }
    cfg.output_path = cli.out.clone();
    cfg.validate()?;
    Ok(cfg)
}

fn curve_of_measure(mu: &ProbabilityMeasure, cfg: &RunConfig) -> Result<DensityCurve> {
    let t = cauchy_transform(mu);
    let grid = default_grid(mu.support_hull(), cfg.pad_fraction, cfg.grid_points);
    stieltjes_density(&t, &grid, &cfg.eps_schedule)
}

fn point_mode(cli: &Cli) -> Result<Option<C64>> {
    cli.z.as_deref().map(parse_complex).transpose()
}

// ----- commands ------------------------------------------------------------

pub fn run() -> Result<()> {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("FREEBIAS_THREADS") {
        let n: usize = threads
            .parse()
            .map_err(|_| Error::Parse(format!("bad FREEBIAS_THREADS value {threads:?}")))?;
        // ignore the error if a pool already exists (e.g. repeated in-process runs)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cfg = config_from(&cli)?;
    match &cli.command {
        Command::Density { doc } => {
            let mu = measure_from_value(&read_doc(doc)?, cfg.mass_tol)?;
            if let Some(z) = point_mode(&cli)? {
                let v = cauchy_transform(&mu).eval(z)?;
                println!("{:.16e}{:+.16e}i", v.re, v.im);
                return Ok(());
            }
            let curve = curve_of_measure(&mu, &cfg)?;
            let report = json!({
                "command": "density",
                "input": measure_to_value(&mu),
                "summary": curve.summary(),
            });
            emit(Some(&curve), &report, &cli)
        }
        Command::Transform { doc, steps } => {
            let mu = measure_from_value(&read_doc(doc)?, cfg.mass_tol)?;
            let parsed = steps.iter().map(|s| parse_step(s)).collect::<Result<Vec<_>>>()?;
            let record = apply_chain(&mu, &parsed, &cfg)?;
            let (curve, output_json, point) = match &record.output {
                ChainOutput::Measure(m) => {
                    let c = curve_of_measure(m, &cfg)?;
                    let p = match point_mode(&cli)? {
                        Some(z) => Some(cauchy_transform(m).eval(z)?),
                        None => None,
                    };
                    (c, json!({"measure": measure_to_value(m)}), p)
                }
                ChainOutput::Transform(t) => {
                    let c = curve_from_transform(t, &cfg)?;
                    let p = match point_mode(&cli)? {
                        Some(z) => Some(t.eval(z)?),
                        None => None,
                    };
                    (c, json!({"transform": t.provenance}), p)
                }
            };
            if let Some(v) = point {
                println!("{:.16e}{:+.16e}i", v.re, v.im);
                return Ok(());
            }
            let report = json!({
                "command": "transform",
                "input": measure_to_value(&record.input),
                "steps": record.steps.iter().map(step_name).collect::<Vec<_>>(),
                "output": output_json,
                "summary": curve.summary(),
            });
            emit(Some(&curve), &report, &cli)
        }
        Command::Infdiv { doc } => {
            let triple = triple_from_value(&read_doc(doc)?, cfg.mass_tol)?;
            let g = cauchy_from_levy(&triple);
            if let Some(z) = point_mode(&cli)? {
                let v = g.eval(z)?;
                println!("{:.16e}{:+.16e}i", v.re, v.im);
                return Ok(());
            }
            let curve = curve_from_transform(&g, &cfg)?;
            let report = json!({
                "command": "infdiv",
                "triple": {
                    "mean": triple.mean,
                    "variance": triple.variance,
                    "levy": measure_to_value(&triple.levy),
                },
                "summary": curve.summary(),
            });
            emit(Some(&curve), &report, &cli)
        }
        Command::Levy { doc } => {
            let mu = measure_from_value(&read_doc(doc)?, cfg.mass_tol)?;
            let g_levy = levy_from_measure(&mu)?;
            if let Some(z) = point_mode(&cli)? {
                let v = g_levy.eval(z)?;
                println!("{:.16e}{:+.16e}i", v.re, v.im);
                return Ok(());
            }
            let curve = curve_from_transform(&g_levy, &cfg)?;
            let report = json!({
                "command": "levy",
                "input": measure_to_value(&mu),
                "summary": curve.summary(),
            });
            emit(Some(&curve), &report, &cli)
        }
        Command::Convolve { a, b } => {
            let mu = measure_from_value(&read_doc(a)?, cfg.mass_tol)?;
            let nu = measure_from_value(&read_doc(b)?, cfg.mass_tol)?;
            let g = free_convolve(&mu, &nu);
            if let Some(z) = point_mode(&cli)? {
                let v = g.eval(z)?;
                println!("{:.16e}{:+.16e}i", v.re, v.im);
                return Ok(());
            }
            let curve = curve_from_transform(&g, &cfg)?;
            let report = json!({
                "command": "convolve",
                "inputs": [measure_to_value(&mu), measure_to_value(&nu)],
                "summary": curve.summary(),
            });
            emit(Some(&curve), &report, &cli)
        }
        Command::Root { doc, n } => {
            let mu = measure_from_value(&read_doc(doc)?, cfg.mass_tol)?;
            if let Some(z) = point_mode(&cli)? {
                let v = convolution_root_f(&mu, *n, z, cfg.solver_tol)?;
                println!("{:.16e}{:+.16e}i", v.re, v.im);
                return Ok(());
            }
            let n_ord = *n;
            let tol = cfg.solver_tol;
            let root_mu = mu.clone();
            let g_root = AnalyticTransform::new(
                TransformKind::CauchyG,
                format!("root{}(measure)", n_ord),
                move |z| Ok(1.0 / convolution_root_f(&root_mu, n_ord, z, tol)?),
            );
            let curve = curve_from_transform(&g_root, &cfg)?;
            let report = json!({
                "command": "root",
                "n": n_ord,
                "input": measure_to_value(&mu),
                "summary": curve.summary(),
            });
            emit(Some(&curve), &report, &cli)
        }
        Command::Phi { doc } => {
            let mu = measure_from_value(&read_doc(doc)?, cfg.mass_tol)?;
            let z = point_mode(&cli)?.ok_or_else(|| {
                Error::Precondition("phi requires --z (point evaluation only)".into())
            })?;
            let phi = crate::freeconv::voiculescu_transform(&mu, z, None)?;
            let report = json!({
                "command": "phi",
                "value": complex_json(phi.value),
                "in_cone": phi.in_cone,
            });
            println!("{:#}", report);
            Ok(())
        }
        Command::Verify { suite } => {
            let report = run_suite(suite, &cfg)?;
            let pass = report["pass"].as_bool().unwrap_or(false);
            emit(None, &report, &cli)?;
            if pass {
                Ok(())
            } else {
                let failing: Vec<String> = report["checks"]
                    .as_array()
                    .unwrap()
                    .iter()
                    .filter(|c| !c["pass"].as_bool().unwrap_or(false))
                    .map(|c| {
                        format!(
                            "{}: measured {} vs required {}",
                            c["name"].as_str().unwrap_or("?"),
                            c["measured"],
                            c["required"]
                        )
                    })
                    .collect();
                Err(Error::Verification(failing.join("; ")))
            }
        }
    }
}

// ----- verification suites --------------------------------------------------

struct Check {
    name: String,
    measured: f64,
    required: f64,
}

impl Check {
    fn pass(&self) -> bool {
        self.measured < self.required
    }
}

fn suite_report(suite: &str, checks: Vec<Check>) -> Value {
    let pass = checks.iter().all(Check::pass);
    json!({
        "suite": suite,
        "pass": pass,
        "checks": checks
            .iter()
            .map(|c| json!({
                "name": c.name,
                "measured": c.measured,
                "required": c.required,
                "pass": c.pass(),
            }))
            .collect::<Vec<_>>(),
    })
}

fn cone_points(n: usize) -> Vec<C64> {
    (0..n)
        .map(|k| {
            let t = k as f64 / n as f64;
            C64::new(-1.5 + 3.0 * t, 0.4 + 2.0 * t)
        })
        .collect()
}

fn suite_fixed_point() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for s2 in [0.5, 1.0, 2.0] {
        let sc = ProbabilityMeasure::semicircle(0.0, s2)?;
        let g = cauchy_transform(&sc);
        let fzb = free_zero_bias(&sc)?;
        let mut sup: f64 = 0.0;
        for z in cone_points(50) {
            sup = sup.max((fzb.eval(z)? - g.eval(z)?).norm());
        }
        checks.push(Check {
            name: format!("semicircle_fixed_point_s2_{s2}"),
            measured: sup,
            required: 1e-10,
        });
    }
    Ok(checks)
}

fn azadi_mass() -> Result<f64> {
    // graded quadrature handling the |x|^{-1/3} cusp at 0 and sqrt edges
    let r = 1.5 * 3.0_f64.sqrt();
    let n = 200_000;
    let mut mass = 0.0;
    for i in 0..n {
        let u0 = i as f64 / n as f64;
        let u1 = (i + 1) as f64 / n as f64;
        let x0 = r * u0 * u0 * (3.0 - 2.0 * u0);
        let x1 = r * u1 * u1 * (3.0 - 2.0 * u1);
        let m = if i == 0 { 64 } else { 1 };
        for j in 0..m {
            let a = x0 + (x1 - x0) * j as f64 / m as f64;
            let b = x0 + (x1 - x0) * (j + 1) as f64 / m as f64;
            mass += 2.0 * (b - a) * gallery_azadi_density(0.5 * (a + b))?;
        }
    }
    Ok(mass)
}

fn suite_gallery() -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    checks.push(Check {
        name: "azadi_mass_defect".into(),
        measured: (azadi_mass()? - 1.0).abs(),
        required: 1e-4, // desk-scale quadrature; the acceptance suite pushes to 1e-6
    });

    // Cauchy-Levy tail: x^4 rho(x) -> s2/pi at s2 = 1
    let x: f64 = 200.0;
    let want = 1.0 / std::f64::consts::PI;
    checks.push(Check {
        name: "cauchy_levy_tail_relative".into(),
        measured: (x.powi(4) * gallery_cauchy_levy_density(1.0, x) - want).abs() / want,
        required: 0.02,
    });

    // generic LK solver matches the Cauchy-Levy gallery transform
    let triple = LevyTriple::new(0.0, 1.0, ProbabilityMeasure::cauchy_law(0.0, 1.0)?)?;
    let g = cauchy_from_levy(&triple);
    let mut sup: f64 = 0.0;
    for z in cone_points(20) {
        sup = sup.max((g.eval(z)? - gallery_cauchy_levy(1.0, z)?).norm());
    }
    checks.push(Check {
        name: "cauchy_levy_solver_vs_gallery".into(),
        measured: sup,
        required: 1e-6,
    });

    // generic LK solver matches the semicircle-Levy closed-form density
    let triple = LevyTriple::new(0.0, 1.0, ProbabilityMeasure::semicircle(0.0, 1.0)?)?;
    let g = cauchy_from_levy(&triple);
    let mut sup: f64 = 0.0;
    for k in 0..21 {
        let xx = -2.0 + 4.0 * k as f64 / 20.0;
        let rho = -g.eval(C64::new(xx, 1e-6))?.im / std::f64::consts::PI;
        sup = sup.max((rho - gallery_semicircle_levy_density(1.0, 1.0, xx)).abs());
    }
    checks.push(Check {
        name: "semicircle_levy_density_linf".into(),
        measured: sup,
        required: 1e-4,
    });

    Ok(checks)
}

fn suite_replace_one() -> Result<Vec<Check>> {
    let r = ProbabilityMeasure::rademacher();
    let mut checks = Vec::new();
    for n in [2usize, 3] {
        let mut sup: f64 = 0.0;
        for z in cone_points(50) {
            sup = sup.max(replace_one_check(&r, n, z)?);
        }
        checks.push(Check {
            name: format!("replace_one_rademacher_n{n}"),
            measured: sup,
            required: 1e-6,
        });
    }
    Ok(checks)
}

fn suite_lk_roundtrip() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    // semicircle recovers a point-mass Levy measure
    let sc = ProbabilityMeasure::semicircle(0.0, 1.4)?;
    let gy = levy_from_measure(&sc)?;
    let mut sup: f64 = 0.0;
    for k in 0..10 {
        let z = C64::new(-1.0 + 0.25 * k as f64, 12.0 + k as f64);
        sup = sup.max((gy.eval(z)? - 1.0 / z).norm());
    }
    checks.push(Check {
        name: "semicircle_levy_is_delta0".into(),
        measured: sup,
        required: 1e-8,
    });

    // halving: the half triple convolved with itself reproduces the whole
    for (name, levy) in [
        ("delta0", ProbabilityMeasure::point_mass(0.0)),
        ("rademacher", ProbabilityMeasure::rademacher()),
    ] {
        let whole = cauchy_from_levy(&LevyTriple::new(0.2, 1.0, levy.clone())?);
        let half = cauchy_from_levy(&LevyTriple::new(0.1, 0.5, levy)?);
        let conv = crate::freeconv::free_convolve_transforms(&half, &half);
        let mut sup: f64 = 0.0;
        for z in cone_points(20) {
            sup = sup.max((conv.eval(z)? - whole.eval(z)?).norm());
        }
        checks.push(Check {
            name: format!("halving_{name}"),
            measured: sup,
            required: 1e-6,
        });
    }
    Ok(checks)
}

fn suite_holder(cfg: &RunConfig) -> Result<Vec<Check>> {
    // mu_circ([a,b])^2 <= ((b-a)/sigma^2) E|X| for the free zero bias of
    // random mean-zero atomic measures; desk-scale sample of the
    // acceptance-suite check
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = f64::NEG_INFINITY;
    for _ in 0..5 {
        let mu = random_centered_atomic(&mut rng)?;
        let m = mu.moments();
        let s2 = m.variance_or_err()?;
        let e_abs = m.abs_first_moment.unwrap();
        let t = free_zero_bias(&mu)?;
        let curve = crate::inversion::curve_from_transform(&t, cfg)?;
        let cdf = crate::inversion::curve_cdf(&curve);
        let (lo, hi) = (curve.grid[0], curve.grid[curve.grid.len() - 1]);
        for k in 0..5 {
            let a = lo + (hi - lo) * (k as f64) / 6.0;
            let b = a + (hi - lo) * rng.gen_range(0.05..0.3);
            let mass = cdf.eval(b) - cdf.eval(a);
            let bound = (b - a) / s2 * e_abs;
            worst = worst.max(mass * mass - bound);
        }
    }
    Ok(vec![Check {
        name: "holder_excess".into(),
        measured: worst,
        required: 1e-4,
    }])
}

fn random_centered_atomic(rng: &mut impl Rng) -> Result<ProbabilityMeasure> {
    let k = rng.gen_range(3..=6);
    let mut locs: Vec<f64> = (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect();
    locs.sort_by(f64::total_cmp);
    let mut weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let mean: f64 = locs.iter().zip(&weights).map(|(x, w)| x * w).sum();
    let atoms = locs
        .iter()
        .zip(&weights)
        .map(|(&x, &w)| Atom { location: x - mean, weight: w })
        .collect();
    ProbabilityMeasure::atomic(atoms)
}

fn suite_roots() -> Result<Vec<Check>> {
    // square-biased roots of centered FreePoisson(1,1) approach G_Y = 1/(w-1)
    let fp = ProbabilityMeasure::free_poisson(1.0, 1.0)?;
    let ws = [
        C64::new(1.0, 2.0),
        C64::new(-0.5, 1.0),
        C64::new(0.0, 3.0),
        C64::new(2.0, 1.5),
        C64::new(-1.5, 2.5),
    ];
    let mut checks = Vec::new();
    let mut prev = f64::INFINITY;
    let mut monotone_defect: f64 = 0.0;
    let mut last_sup = f64::INFINITY;
    for n in [4.0, 16.0, 64.0] {
        let mut sup: f64 = 0.0;
        for &w in &ws {
            sup = sup.max((levy_from_roots(&fp, n, w)? - 1.0 / (w - 1.0)).norm());
        }
        monotone_defect = monotone_defect.max(sup - prev);
        prev = sup;
        last_sup = sup;
    }
    checks.push(Check {
        name: "roots_residual_nonincreasing".into(),
        measured: monotone_defect,
        required: 1e-12,
    });
    checks.push(Check {
        name: "roots_residual_n64".into(),
        measured: last_sup,
        required: 0.05,
    });
    Ok(checks)
}

pub fn run_suite(suite: &str, cfg: &RunConfig) -> Result<Value> {
    let checks = match suite {
        "fixed_point" => suite_fixed_point()?,
        "gallery" => suite_gallery()?,
        "replace_one" => suite_replace_one()?,
        "lk_roundtrip" => suite_lk_roundtrip()?,
        "holder" => suite_holder(cfg)?,
        "roots" => suite_roots()?,
        other => {
            return Err(Error::Parse(format!(
                "unknown suite {other:?}; expected one of fixed_point, gallery, replace_one, lk_roundtrip, holder, roots"
            )))
        }
    };
    Ok(suite_report(suite, checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("1+2i").unwrap(), C64::new(1.0, 2.0));
        assert_eq!(parse_complex("-0.5-0.25i").unwrap(), C64::new(-0.5, -0.25));
        assert_eq!(parse_complex("2i").unwrap(), C64::new(0.0, 2.0));
        assert_eq!(parse_complex("i").unwrap(), C64::new(0.0, 1.0));
        assert_eq!(parse_complex("3").unwrap(), C64::new(3.0, 0.0));
        assert_eq!(parse_complex("1e-3+1e-2i").unwrap(), C64::new(1e-3, 1e-2));
        assert_eq!(parse_complex(" 1 + 2i ").unwrap(), C64::new(1.0, 2.0));
        assert!(parse_complex("foo").is_err());
    }

    #[test]
    fn measure_docs_round() {
        let doc = json!({"type":"atomic","atoms":[[-1.0,0.5],[1.0,0.5]]});
        let m = measure_from_value(&doc, 1e-6).unwrap();
        assert_eq!(m, ProbabilityMeasure::rademacher());

        let doc = json!({"type":"semicircle","mean":0.0,"variance":1.0});
        assert!(measure_from_value(&doc, 1e-6).is_ok());

        // unknown fields rejected, not ignored
        let doc = json!({"type":"semicircle","mean":0.0,"variance":1.0,"skew":1.0});
        assert!(matches!(measure_from_value(&doc, 1e-6), Err(Error::Parse(_))));

        // under-massed atoms rejected
        let doc = json!({"type":"atomic","atoms":[[-1.0,0.5],[1.0,0.4]]});
        assert!(measure_from_value(&doc, 1e-6).is_err());

        let doc = json!({
            "type":"mixture","weights":[0.5,0.5],
            "components":[
                {"type":"atomic","atoms":[[0.0,1.0]]},
                {"type":"semicircle","mean":0.0,"variance":1.0},
            ],
        });
        assert!(measure_from_value(&doc, 1e-6).is_ok());
    }

    #[test]
    fn triple_doc_parses() {
        let doc = json!({"mean":0.0,"variance":1.0,"levy":{"type":"atomic","atoms":[[0.0,1.0]]}});
        let t = triple_from_value(&doc, 1e-6).unwrap();
        assert_eq!(t.variance, 1.0);
        let doc = json!({"mean":0.0,"variance":1.0,"levy":{"type":"atomic","atoms":[[0.0,1.0]]},"x":1});
        assert!(triple_from_value(&doc, 1e-6).is_err());
    }

    #[test]
    fn chain_step_parsing() {
        assert!(matches!(parse_step("square_bias").unwrap(), ChainStep::SquareBias));
        assert!(matches!(parse_step("shift:-1.5").unwrap(), ChainStep::Shift(c) if c == -1.5));
        assert!(matches!(parse_step("scale:2").unwrap(), ChainStep::Scale(a) if a == 2.0));
        assert!(parse_step("frobnicate").is_err());
    }

    #[test]
    fn suites_pass() {
        let cfg = RunConfig::default();
        for suite in ["fixed_point", "replace_one", "roots"] {
            let report = run_suite(suite, &cfg).unwrap();
            assert_eq!(report["pass"], Value::Bool(true), "suite {suite}: {report:#}");
        }
        assert!(run_suite("nope", &cfg).is_err());
    }
}
