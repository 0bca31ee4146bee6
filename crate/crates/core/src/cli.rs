//! Command-line front end. Every report is a JSON object carrying
//! `schema_version` and `kind`; the schema lives in `schema/report.schema.json`.
//! Exit codes: 0 when every invoked check passed, 1 when a check failed or a
//! computation errored, 2 on usage errors.

use crate::algebra::{fmt_q, parse_poly, parse_q, Poly, Q};
use crate::catalog::System;
use crate::charts::{to_chart, ChartId, ChartVectorField};
use crate::dynamics::{self, IntegratorOptions, PathSpec, C};
use crate::local::{
    a_priori_resonance_bound, characteristic_index, check_poincare_conditions, find_fixed_points_at_infinity, poincare_linearize,
    resonant_terms_present, FixedPointRecord,
};
use crate::newton_weights::{check_perturbation_lower_order, check_quasi_homogeneous, check_zs_invariance, newton_diagram, PlanarODE, Weights};
use crate::series::{all_series, default_n_max, SeriesSummary};
use crate::soic::{boutroux_soic_atlas, soic_atlas};
use crate::weyl::{weyl_report, WeylError};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use thiserror::Error;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

type Result<T> = std::result::Result<T, CliError>;

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "painleve-atlas", version, about = "Weighted projective analysis and pole-crossing integration of Painlevé systems")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Full pipeline: weights, charts, fixed points, indices, series, atlas, Weyl checks.
    Analyze(AnalyzeArgs),
    /// Vector field in one chart of the weighted projective space.
    Chart(ChartArgs),
    /// Laurent series solutions about a movable pole.
    Laurent(LaurentArgs),
    /// Characteristic indices and resonances at the movable fixed points.
    Indices(InputArgs),
    /// Poincaré linearization and its conjugacy residual.
    Linearize(LinearizeArgs),
    /// Weighted blow-up atlas of a builtin system.
    Blowup(BlowupArgs),
    /// Bäcklund and affine Weyl group verification.
    Weyl(SystemArg),
    /// Integrate through poles along a complex path.
    Integrate(IntegrateArgs),
    /// Level sets of the Hamiltonian at infinity.
    Levels(LevelsArgs),
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    /// Builtin system: P1, P2 or P4.
    #[arg(long, value_parser = parse_system, conflicts_with_all = ["f", "g"])]
    system: Option<System>,
    /// x' = f(x, y, z).
    #[arg(long, requires = "g")]
    f: Option<String>,
    /// y' = g(x, y, z).
    #[arg(long, requires = "f")]
    g: Option<String>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Truncation order of the linearization check.
    #[arg(long, default_value_t = 6)]
    order: usize,
}

#[derive(Args, Debug)]
struct ChartArgs {
    #[command(flatten)]
    input: InputArgs,
    /// c1, c2 or c3; all three when omitted.
    #[arg(long, value_parser = parse_chart)]
    chart: Option<ChartId>,
}

#[derive(Args, Debug)]
struct LaurentArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Highest coefficient index; defaults to the Kovalevskaya exponent + 4.
    #[arg(long)]
    n_max: Option<usize>,
}

#[derive(Args, Debug)]
struct LinearizeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 6)]
    order: usize,
}

#[derive(Args, Debug)]
struct BlowupArgs {
    #[arg(long, value_parser = parse_system)]
    system: System,
    /// Blow up the Boutroux chart instead of the Painlevé coordinates.
    #[arg(long)]
    boutroux: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SystemArg {
    #[arg(long, value_parser = parse_system)]
    system: System,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct IntegrateArgs {
    #[arg(long, value_parser = parse_system)]
    system: System,
    /// Initial (x, y) as two complex numbers such as `0,0` or `0.1+0.2i,-1`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    init: [C; 2],
    #[arg(long, value_parser = parse_complex, default_value = "0", allow_hyphen_values = true)]
    from: C,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    to: C,
    /// Intermediate waypoints, in order.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    via: Vec<C>,
    #[arg(long, value_parser = parse_rational)]
    alpha: Option<Q>,
    #[arg(long, value_parser = parse_rational)]
    kappa: Option<Q>,
    #[arg(long, value_parser = parse_rational)]
    theta: Option<Q>,
    #[arg(long, default_value_t = 1e-10)]
    rtol: f64,
    #[arg(long)]
    switch_out: Option<f64>,
    #[arg(long)]
    switch_back: Option<f64>,
    /// Trajectory CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Pole-event JSON.
    #[arg(long)]
    poles: Option<PathBuf>,
    /// Summary JSON; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LevelsArgs {
    #[arg(long, value_parser = parse_system)]
    system: System,
    /// Comma-separated levels; may be empty.
    #[arg(long, value_parser = parse_reals, allow_hyphen_values = true, default_value = "")]
    c: Reals,
    /// x0,x1,y0,y1.
    #[arg(long, value_parser = parse_reals, allow_hyphen_values = true, default_value = "-4,4,-4,4")]
    window: Reals,
    #[arg(long, default_value_t = 200)]
    resolution: usize,
    /// Polyline CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_system(s: &str) -> std::result::Result<System, String> {
    System::parse(s).ok_or_else(|| format!("unknown system `{s}` (expected P1, P2 or P4)"))
}

fn parse_chart(s: &str) -> std::result::Result<ChartId, String> {
    match ChartId::parse(s) {
        Some(c) if c != ChartId::Orig => Ok(c),
        _ => Err(format!("unknown chart `{s}` (expected c1, c2 or c3)")),
    }
}

fn parse_complex(s: &str) -> std::result::Result<C, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let t = match t.as_str() {
        "i" | "+i" => "1i".to_string(),
        "-i" => "-1i".to_string(),
        _ => t.replace("+i", "+1i").replace("-i", "-1i"),
    };
    let z: C = t.parse().map_err(|_| format!("malformed complex number `{s}`"))?;
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(format!("non-finite complex number `{s}`"))
    }
}

fn parse_pair(s: &str) -> std::result::Result<[C; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [a, b] => Ok([parse_complex(a)?, parse_complex(b)?]),
        _ => Err(format!("expected two comma-separated values, got `{s}`")),
    }
}

#[derive(Clone, Debug)]
struct Reals(Vec<f64>);

fn parse_reals(s: &str) -> std::result::Result<Reals, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| format!("malformed number `{t}`")))
        .collect::<std::result::Result<_, _>>()
        .map(Reals)
}

fn parse_rational(s: &str) -> std::result::Result<Q, String> {
    parse_q(s).ok_or_else(|| format!("malformed rational `{s}` (use a, a/b or a finite decimal)"))
}

/// Parses arguments and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.cmd) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(cmd: Cmd) -> Result<bool> {
    match cmd {
        Cmd::Analyze(a) => emit(analyze_report(&resolve(&a.input)?, a.order)?, a.input.out.as_ref()),
        Cmd::Chart(a) => emit(chart_report(&resolve(&a.input)?, a.chart)?, a.input.out.as_ref()),
        Cmd::Laurent(a) => emit(laurent_report(&resolve(&a.input)?, a.n_max)?, a.input.out.as_ref()),
        Cmd::Indices(a) => emit(indices_report(&resolve(&a)?)?, a.out.as_ref()),
        Cmd::Linearize(a) => emit(linearize_report(&resolve(&a.input)?, a.order)?, a.input.out.as_ref()),
        Cmd::Blowup(a) => emit(blowup_report(a.system, a.boutroux)?, a.out.as_ref()),
        Cmd::Weyl(a) => emit(weyl_cmd_report(a.system)?, a.out.as_ref()),
        Cmd::Integrate(a) => integrate_cmd(&a),
        Cmd::Levels(a) => levels_cmd(&a),
    }
}

/// Writes the report and returns its `passed` flag.
fn emit(report: Value, out: Option<&PathBuf>) -> Result<bool> {
    let passed = report["passed"].as_bool().unwrap_or(true);
    let text = serde_json::to_string_pretty(&report).expect("serializable") + "\n";
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(passed)
}

fn envelope(kind: &str, passed: bool, body: Value) -> Value {
    let mut v = json!({ "schema_version": SCHEMA_VERSION, "kind": kind, "passed": passed });
    if let (Value::Object(m), Value::Object(b)) = (&mut v, body) {
        m.extend(b);
    }
    v
}

// ---------------------------------------------------------------------------
// Input resolution

/// A system to analyse: a builtin, or user input that may coincide with one.
pub struct Input {
    pub builtin: Option<System>,
    pub ode: PlanarODE,
    pub weights: Weights,
}

impl Input {
    pub fn from_system(sys: System) -> Self {
        Input { builtin: Some(sys), ode: sys.ode(), weights: sys.weights() }
    }

    /// Parses f and g; identifies builtin systems by exact equality.
    pub fn from_text(f: &str, g: &str) -> Result<Self> {
        let parse = |name: &str, s: &str| parse_poly(s).map_err(|e| CliError::Usage(format!("cannot parse {name}: {e}")));
        let ode = PlanarODE::new(parse("f", f)?, parse("g", g)?);
        if let Some(sys) = System::ALL.into_iter().find(|s| s.ode() == ode) {
            return Ok(Input::from_system(sys));
        }
        let nd = newton_diagram(&ode).map_err(|e| failed(format!("Newton diagram: {e}")))?;
        if !nd.unique_face {
            return Err(failed("Newton diagram has more than one compact face"));
        }
        let weights = Weights::new(nd.normal[0], nd.normal[1], nd.normal[2], nd.level).map_err(failed)?;
        Ok(Input { builtin: None, ode, weights })
    }

    fn fields(&self) -> Result<Vec<ChartVectorField>> {
        match self.builtin {
            Some(sys) => Ok(ChartId::AT_INFINITY.iter().map(|c| sys.chart_field(*c)).collect()),
            None => ChartId::AT_INFINITY.iter().map(|c| to_chart(&self.ode, &self.weights, *c).map_err(failed)).collect(),
        }
    }

    fn describe(&self) -> Value {
        json!({
            "builtin": self.builtin.map(|s| s.tag()),
            "f": self.ode.f.to_string(),
            "g": self.ode.g.to_string(),
        })
    }
}

fn resolve(a: &InputArgs) -> Result<Input> {
    match (&a.system, &a.f, &a.g) {
        (Some(s), _, _) => Ok(Input::from_system(*s)),
        (None, Some(f), Some(g)) => Input::from_text(f, g),
        _ => Err(CliError::Usage("give --system or both --f and --g".into())),
    }
}

fn weights_json(w: &Weights) -> Value {
    json!([w.p, w.q, w.r, w.s])
}

fn qs(v: &[Q]) -> Vec<String> {
    v.iter().map(fmt_q).collect()
}

fn field_json(vf: &ChartVectorField) -> Value {
    let v = vf.vars();
    json!({
        "chart": vf.chart,
        "vars": v.iter().map(|x| x.name()).collect::<Vec<_>>(),
        "components": vf.components.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        "divided": vf.divided().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        "infinity_restriction": vf.infinity_restriction().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        "orbifold_order": vf.orbifold_order,
        "orbifold_residues": vf.orbifold_residues,
        "polynomial": vf.is_polynomial(),
    })
}

fn point_json(fp: &FixedPointRecord) -> Value {
    json!({
        "chart": fp.chart,
        "coords": fp.rational().map(|c| json!(qs(&c))).unwrap_or_else(|| {
            json!(fp.numeric().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
        }),
        "exact": fp.exact,
        "classification": fp.classification,
        "residual": fp.residual,
    })
}

fn movable(fields: &[ChartVectorField]) -> Vec<(FixedPointRecord, &ChartVectorField)> {
    find_fixed_points_at_infinity(fields)
        .into_iter()
        .filter(|f| f.is_movable())
        .filter_map(|f| {
            let vf = fields.iter().find(|v| v.chart == f.chart)?;
            Some((f, vf))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Reports

fn indices_entries(inp: &Input) -> Result<(Vec<Value>, bool)> {
    let fields = inp.fields()?;
    let mut out = Vec::new();
    let mut ok = true;
    for (fp, vf) in movable(&fields) {
        let idx = characteristic_index(vf, &fp).map_err(failed)?;
        let lambdas = idx.exact_lambdas();
        let bound = lambdas.as_ref().and_then(a_priori_resonance_bound).unwrap_or(12);
        let pr = check_poincare_conditions(&idx, bound.max(2)).map_err(failed)?;
        let resonant = resonant_terms_present(vf, &fp, &pr.resonances).map_err(failed)?;
        ok &= pr.complete;
        out.push(json!({
            "point": point_json(&fp),
            "jacobian": idx.jacobian.iter().map(|r| r.iter().map(|p| p.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "index": idx.lambdas,
            "upper_triangular": idx.is_upper_triangular(),
            "poincare": pr,
            "resonant_terms_present": resonant,
        }));
    }
    Ok((out, ok))
}

fn series_entries(inp: &Input, n_max: Option<usize>) -> Result<Vec<SeriesSummary>> {
    let n = match n_max {
        Some(n) => n,
        None => {
            let probe = all_series(&inp.ode, &inp.weights, 1).map_err(failed)?;
            default_n_max(probe.iter().filter_map(|s| s.kovalevskaya).max())
        }
    };
    let sols = all_series(&inp.ode, &inp.weights, n).map_err(failed)?;
    Ok(sols.iter().map(SeriesSummary::from).collect())
}

fn linearize_entries(inp: &Input, order: usize) -> Result<(Vec<Value>, bool)> {
    let fields = inp.fields()?;
    let mut out = Vec::new();
    let mut ok = true;
    for (fp, vf) in movable(&fields) {
        match poincare_linearize(vf, &fp, order) {
            Ok(lin) => {
                let zero = lin.residual.iter().all(Poly::is_zero);
                ok &= zero;
                out.push(json!({
                    "point": point_json(&fp),
                    "lambdas": qs(&lin.lambdas),
                    "order": lin.n,
                    "u": lin.u().to_string(),
                    "v": lin.v().to_string(),
                    "linear_system": lin.linear_system().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                    "residual_zero": zero,
                }));
            }
            Err(e) => {
                ok = false;
                out.push(json!({ "point": point_json(&fp), "error": e.to_string() }));
            }
        }
    }
    Ok((out, ok))
}

pub fn analyze_report(inp: &Input, order: usize) -> Result<Value> {
    let w = &inp.weights;
    let nd = newton_diagram(&inp.ode).map_err(failed)?;
    let (_, pert) = inp.ode.split(w);
    let fields = inp.fields()?;
    let all_fp = find_fixed_points_at_infinity(&fields);
    let (indices, indices_ok) = indices_entries(inp)?;
    let series = series_entries(inp, None)?;
    let (lin, lin_ok) = linearize_entries(inp, order)?;
    let mut checks = BTreeMap::new();
    checks.insert("unique_newton_face", nd.unique_face);
    checks.insert("perturbation_lower_order", check_perturbation_lower_order(&pert, w));
    checks.insert("zs_invariant", check_zs_invariance(&inp.ode, w));
    checks.insert("charts_polynomial", fields.iter().all(|f| f.is_polynomial()));
    checks.insert("indices_complete", indices_ok);
    checks.insert("linearization_residual_zero", lin_ok);
    let mut atlas = Value::Null;
    let mut weyl = Value::Null;
    if let Some(sys) = inp.builtin {
        let a = soic_atlas(sys).map_err(failed)?;
        checks.insert("atlas_polynomial", a.all_polynomial());
        atlas = json!({
            "charts": a.charts.len(),
            "all_polynomial": a.all_polynomial(),
            "labels": a.charts.iter().map(|c| c.map.label.clone()).collect::<Vec<_>>(),
        });
        match weyl_report(sys) {
            Ok(r) => {
                checks.insert("weyl", r["passed"].as_bool().unwrap_or(false));
                weyl = json!({ "passed": r["passed"], "generators": r["generators"].as_array().map_or(0, |g| g.len()) });
            }
            Err(WeylError::NoGroup(_)) => weyl = json!({ "status": no_group_message(sys) }),
            Err(e) => return Err(failed(e)),
        }
    }
    let passed = checks.values().all(|b| *b);
    let kappa: Vec<Option<usize>> = series.iter().map(|s| s.kovalevskaya).collect();
    Ok(envelope(
        "analyze",
        passed,
        json!({
            "input": inp.describe(),
            "weights": weights_json(w),
            "newton": nd,
            "quasi_homogeneous_part": check_quasi_homogeneous(&inp.ode.split(w).0, w),
            "chart_equations": fields.iter().map(field_json).collect::<Vec<_>>(),
            "fixed_points": all_fp.iter().map(point_json).collect::<Vec<_>>(),
            "characteristic_indices": indices,
            "kovalevskaya": kappa,
            "laurent_families": series.len(),
            "series": series,
            "linearization": lin,
            "atlas": atlas,
            "weyl": weyl,
            "checks": checks,
        }),
    ))
}

pub fn chart_report(inp: &Input, chart: Option<ChartId>) -> Result<Value> {
    let fields: Vec<_> = inp.fields()?.into_iter().filter(|f| chart.map_or(true, |c| f.chart == c)).collect();
    let passed = fields.iter().all(|f| f.is_polynomial());
    Ok(envelope(
        "chart",
        passed,
        json!({ "input": inp.describe(), "weights": weights_json(&inp.weights), "charts": fields.iter().map(field_json).collect::<Vec<_>>() }),
    ))
}

pub fn laurent_report(inp: &Input, n_max: Option<usize>) -> Result<Value> {
    let series = series_entries(inp, n_max)?;
    let passed = !series.is_empty();
    Ok(envelope("laurent", passed, json!({ "input": inp.describe(), "weights": weights_json(&inp.weights), "series": series })))
}

pub fn indices_report(inp: &Input) -> Result<Value> {
    let (entries, ok) = indices_entries(inp)?;
    Ok(envelope("indices", ok, json!({ "input": inp.describe(), "points": entries })))
}

pub fn linearize_report(inp: &Input, order: usize) -> Result<Value> {
    let (entries, ok) = linearize_entries(inp, order)?;
    Ok(envelope("linearize", ok, json!({ "input": inp.describe(), "points": entries })))
}

pub fn blowup_report(sys: System, boutroux: bool) -> Result<Value> {
    let atlas = if boutroux { boutroux_soic_atlas(sys) } else { soic_atlas(sys) }.map_err(failed)?;
    Ok(envelope("blowup", atlas.all_polynomial(), json!({ "atlas": atlas.report() })))
}

fn no_group_message(sys: System) -> String {
    format!("no Weyl group table for {} in scope", match sys {
        System::P1 => "P_I",
        System::P2 => "P_II",
        System::P4 => "P_IV",
    })
}

pub fn weyl_cmd_report(sys: System) -> Result<Value> {
    match weyl_report(sys) {
        Ok(r) => {
            let passed = r["passed"].as_bool().unwrap_or(false);
            Ok(envelope("weyl", passed, json!({ "weyl": r })))
        }
        Err(WeylError::NoGroup(_)) => Ok(envelope("weyl", true, json!({ "weyl": { "system": sys.tag(), "status": no_group_message(sys) } }))),
        Err(e) => Err(failed(e)),
    }
}

// ---------------------------------------------------------------------------
// Numerics

fn integrate_cmd(a: &IntegrateArgs) -> Result<bool> {
    let mut exact: BTreeMap<crate::algebra::Var, Q> = BTreeMap::new();
    for p in a.system.parameters() {
        let v = match p.name().as_str() {
            "alpha" => a.alpha.clone(),
            "kappa" => a.kappa.clone(),
            "theta" => a.theta.clone(),
            _ => None,
        };
        let v = v.ok_or_else(|| CliError::Usage(format!("{} needs --{}", a.system.tag(), p.name())))?;
        exact.insert(p, v);
    }
    let params = dynamics::numeric_params(exact.iter());
    let mut pts = vec![a.from];
    pts.extend(a.via.iter().copied());
    pts.push(a.to);
    let path = PathSpec::new(pts).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut opts = IntegratorOptions::default().with_rtol(a.rtol);
    if let Some(s) = a.switch_out {
        opts.switch_out = s;
    }
    if let Some(s) = a.switch_back {
        opts.switch_back = s;
    }
    opts.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let tr = dynamics::integrate_with_switching(a.system, &params, a.init, &path, &opts).map_err(failed)?;
    if let Some(p) = &a.csv {
        tr.write_csv(std::fs::File::create(p)?)?;
    }
    let mut fits = Vec::new();
    let mut refit_ok = true;
    for pole in &tr.poles {
        match dynamics::laurent_refit(&tr, pole, 4, 0.1) {
            Ok(r) => {
                refit_ok &= r.max_deviation < 1e-6;
                fits.push(json!({ "location": [pole.location.re, pole.location.im], "max_deviation": r.max_deviation }));
            }
            Err(e) => {
                refit_ok = false;
                fits.push(json!({ "location": [pole.location.re, pole.location.im], "error": e.to_string() }));
            }
        }
    }
    let poles = envelope("poles", true, json!({ "system": a.system.tag(), "poles": tr.poles_json() }));
    if let Some(p) = &a.poles {
        std::fs::write(p, serde_json::to_string_pretty(&poles).expect("serializable") + "\n")?;
    }
    let summary = envelope(
        "integrate",
        refit_ok,
        json!({
            "system": a.system.tag(),
            "parameters": exact.iter().map(|(k, v)| (k.name(), fmt_q(v))).collect::<BTreeMap<_, _>>(),
            "rtol": a.rtol,
            "path": path.waypoints.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "init": a.init.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "final": tr.final_base.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "samples": tr.base_samples().len(),
            "junctions": tr.junctions,
            "poles": tr.poles_json(),
            "unrefined_approaches": tr.unrefined,
            "refits": fits,
        }),
    );
    emit(summary, a.out.as_ref())
}

fn levels_cmd(a: &LevelsArgs) -> Result<bool> {
    let (levels, window) = (&a.c.0, &a.window.0);
    if levels.is_empty() {
        return Ok(true);
    }
    let w: [f64; 4] = window.as_slice().try_into().map_err(|_| CliError::Usage("window needs four values x0,x1,y0,y1".into()))?;
    if !(w[1] > w[0] && w[3] > w[2]) || a.resolution == 0 {
        return Err(CliError::Usage("window must satisfy x0 < x1, y0 < y1 and resolution > 0".into()));
    }
    let sets = dynamics::level_set_sampler(a.system, levels, w, a.resolution);
    match &a.out {
        Some(p) => dynamics::write_level_sets_csv(&sets, std::fs::File::create(p)?)?,
        None => dynamics::write_level_sets_csv(&sets, std::io::stdout().lock())?,
    }
    Ok(true)
}
