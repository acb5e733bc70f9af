//! Batch front end for the switchwalk library: parse walk-spec files,
//! run the pipeline (ladders → renewal → stationary → verification →
//! simulation), and emit machine-readable reports plus CSV plot tables.
//!
//! Reports are deterministic: identical inputs (including seeds) produce
//! byte-identical output. Every number carries a provenance field saying
//! which arithmetic backend produced it; exact rationals are printed as
//! rationals, floats as shortest round-trip decimals.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{json, Value};

use switchwalk::kernels::{
    apply_p, apply_ph, crossing_kernels, dual_kernel_q, ContinuousLaw, WalkSpec,
};
use switchwalk::ladder::{wiener_hopf_residual, LadderLaw, LadderSystem};
use switchwalk::measures::{FinitePmf, LatticeMeasure, Span, WindowDensity};
use switchwalk::montecarlo::{stationarity_test, ChainKind, Reference};
use switchwalk::stationary::{OvershootLaw, StationaryBundle};
use switchwalk::{Backend, Num};

/// Exit code classification: 2 = malformed spec or unusable request,
/// 1 = pipeline ran but a verification failed, 0 = all good.
#[derive(Debug)]
pub enum CliError {
    Malformed(String),
    Failed(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Malformed(m) => write!(f, "malformed input: {m}"),
            CliError::Failed(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn malformed(e: impl std::fmt::Display) -> CliError {
    CliError::Malformed(e.to_string())
}

// ---------------------------------------------------------------------------
// Spec files
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum LawSpec {
    /// Lattice atoms: (value as integer multiple of the base step,
    /// probability as exact rational "2/3" or decimal).
    Atoms(Vec<(i64, String)>),
    /// Continuous family with named parameters.
    Family {
        family: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tasks {
    pub window: Option<i64>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub steps: Option<u64>,
    pub replicas: Option<usize>,
    pub chain: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    /// "lattice" or "continuous".
    pub kind: String,
    /// Lattice base step as a rational string; values are integer
    /// multiples of it. Defaults to "1".
    pub base_step: Option<String>,
    pub x1: LawSpec,
    pub x1p: LawSpec,
    /// Coin bias at zero, rational or decimal string.
    pub alpha: String,
    #[serde(default)]
    pub tasks: Tasks,
}

fn parse_num(s: &str, what: &str) -> CliResult<Num> {
    Num::parse(s).ok_or_else(|| CliError::Malformed(format!("cannot parse {what}: {s:?}")))
}

fn parse_span(spec: &SpecFile) -> CliResult<Span> {
    let s = spec.base_step.as_deref().unwrap_or("1");
    let n = parse_num(s, "base_step")?;
    n.as_rational()
        .cloned()
        .ok_or_else(|| CliError::Malformed(format!("base_step must be an exact rational: {s:?}")))
}

fn parse_pmf(law: &LawSpec, span: &Span, name: &str) -> CliResult<FinitePmf> {
    match law {
        LawSpec::Atoms(atoms) => {
            let parsed: CliResult<Vec<(i64, Num)>> = atoms
                .iter()
                .map(|(v, p)| Ok((*v, parse_num(p, &format!("{name} probability"))?)))
                .collect();
            FinitePmf::from_atoms(span.clone(), parsed?).map_err(malformed)
        }
        LawSpec::Family { family, .. } => Err(CliError::Malformed(format!(
            "{name}: continuous family {family:?} in a lattice spec"
        ))),
    }
}

fn param(params: &BTreeMap<String, f64>, key: &str, family: &str) -> CliResult<f64> {
    params
        .get(key)
        .copied()
        .ok_or_else(|| CliError::Malformed(format!("family {family:?} needs parameter {key:?}")))
}

fn parse_continuous(law: &LawSpec, name: &str) -> CliResult<ContinuousLaw> {
    match law {
        LawSpec::Atoms(_) => Err(CliError::Malformed(format!(
            "{name}: atom list in a continuous spec"
        ))),
        LawSpec::Family { family, params } => match family.as_str() {
            "normal" => Ok(ContinuousLaw::Normal {
                mu: param(params, "mu", family)?,
                sigma: param(params, "sigma", family)?,
            }),
            "uniform" => Ok(ContinuousLaw::Uniform {
                a: param(params, "a", family)?,
                b: param(params, "b", family)?,
            }),
            "deterministic" => Ok(ContinuousLaw::Deterministic {
                v: param(params, "v", family)?,
            }),
            "shifted_exponential" => Ok(ContinuousLaw::ShiftedExponential {
                shift: param(params, "shift", family)?,
                rate: param(params, "rate", family)?,
                negate: params.get("negate").copied().unwrap_or(0.0) != 0.0,
            }),
            other => Err(CliError::Malformed(format!(
                "{name}: unknown continuous family {other:?}"
            ))),
        },
    }
}

pub fn load_spec(path: &Path) -> CliResult<(SpecFile, WalkSpec)> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Malformed(format!("{}: {e}", path.display())))?;
    let file: SpecFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Malformed(format!("{}: {e}", path.display())))?;
    let alpha = parse_num(&file.alpha, "alpha")?;
    let walk = match file.kind.as_str() {
        "lattice" => {
            let span = parse_span(&file)?;
            let x1 = parse_pmf(&file.x1, &span, "x1")?;
            let x1p = parse_pmf(&file.x1p, &span, "x1p")?;
            WalkSpec::lattice(x1, x1p, alpha).map_err(malformed)?
        }
        "continuous" => {
            let x1 = parse_continuous(&file.x1, "x1")?;
            let x1p = parse_continuous(&file.x1p, "x1p")?;
            WalkSpec::continuous(x1, x1p, alpha).map_err(malformed)?
        }
        other => {
            return Err(CliError::Malformed(format!(
                "kind must be \"lattice\" or \"continuous\", got {other:?}"
            )))
        }
    };
    Ok((file, walk))
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

fn backend_str(b: Backend) -> &'static str {
    match b {
        Backend::Exact => "exact",
        Backend::Float => "float",
    }
}

/// A number with provenance: exact rationals keep their rational form,
/// floats are printed as shortest round-trip decimals; `approx` is
/// always the decimal value for plotting.
pub fn num_json(n: &Num) -> Value {
    json!({
        "value": n.to_string(),
        "approx": n.to_f64(),
        "backend": backend_str(n.backend()),
    })
}

fn f64_json(x: f64) -> Value {
    json!({ "value": x.to_string(), "approx": x, "backend": "float" })
}

fn measure_table(m: &LatticeMeasure) -> Value {
    let (lo, hi) = (
        m.support_min().unwrap_or(0),
        m.support_max().unwrap_or(0),
    );
    let rows: Vec<Value> = m
        .atoms()
        .iter()
        .map(|(k, v)| json!({ "x": k, "mass": num_json(v) }))
        .collect();
    json!({
        "window": [lo, hi],
        "interior": [lo, hi],
        "span": m.span().to_string(),
        "backend": backend_str(m.backend()),
        "kind": "masses",
        "rows": rows,
        "total": num_json(&m.total()),
    })
}

fn window_table(w: &WindowDensity) -> Value {
    let (lo, hi) = w.window();
    let (ilo, ihi) = w.interior();
    let mut backend = Backend::Exact;
    let rows: Vec<Value> = (lo..=hi)
        .map(|k| {
            let v = w.density_at(k).expect("in-window density");
            if v.backend() == Backend::Float {
                backend = Backend::Float;
            }
            json!({
                "x": k,
                "density": num_json(&v),
                "interior": k >= ilo && k <= ihi,
            })
        })
        .collect();
    json!({
        "window": [lo, hi],
        "interior": [ilo, ihi],
        "span": w.span().to_string(),
        "backend": backend_str(backend),
        "kind": "densities",
        "rows": rows,
    })
}

fn ladder_table(l: &LadderLaw) -> Value {
    let (lo, hi) = (
        l.pmf.support_min().unwrap_or(0),
        l.pmf.support_max().unwrap_or(0),
    );
    let rows: Vec<Value> = l
        .pmf
        .atoms()
        .iter()
        .map(|(k, v)| json!({ "x": k, "mass": num_json(v) }))
        .collect();
    json!({
        "window": [lo, hi],
        "interior": [lo, hi],
        "span": l.pmf.span().to_string(),
        "backend": backend_str(l.backend),
        "kind": "masses",
        "rows": rows,
        "defect": num_json(l.pmf.defect()),
        "defect_bound": f64_json(l.defect_bound),
        "accuracy": f64_json(l.accuracy),
        "certified": l.certified,
        "truncation_level": l.truncation_level,
    })
}

fn spec_summary(file: &SpecFile, walk: &WalkSpec) -> Value {
    let laws = match walk.lattice_laws() {
        Ok((x1, x1p)) => json!({
            "x1": measure_table(&x1.to_measure()),
            "x1p": measure_table(&x1p.to_measure()),
        }),
        Err(_) => json!({ "x1": "continuous", "x1p": "continuous" }),
    };
    json!({
        "kind": file.kind,
        "alpha": num_json(&walk.alpha),
        "random_walk": walk.is_random_walk(),
        "laws": laws,
    })
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug)]
pub struct RunParams {
    pub spec: PathBuf,
    pub window: Option<i64>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub steps: Option<u64>,
    pub replicas: Option<usize>,
    pub chain: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

struct Resolved {
    window: i64,
    tol: f64,
    seed: u64,
    steps: u64,
    replicas: usize,
    chain: String,
}

fn resolve(p: &RunParams, t: &Tasks) -> Resolved {
    Resolved {
        window: p.window.or(t.window).unwrap_or(40),
        tol: p.tol.or(t.tol).unwrap_or(1e-10),
        seed: p.seed.or(t.seed).unwrap_or(1),
        steps: p.steps.or(t.steps).unwrap_or(1_000_000),
        replicas: p.replicas.or(t.replicas).unwrap_or(4),
        chain: p
            .chain
            .clone()
            .or_else(|| t.chain.clone())
            .unwrap_or_else(|| "occupation".into()),
    }
}

fn lattice_pipeline(
    walk: &WalkSpec,
    r: &Resolved,
) -> CliResult<(LadderSystem, StationaryBundle)> {
    let (x1, x1p) = walk.lattice_laws().map_err(malformed)?;
    let sys = LadderSystem::compute(x1, x1p, &walk.alpha, r.tol).map_err(malformed)?;
    let bundle =
        StationaryBundle::compute(&sys, &walk.alpha, r.window, r.tol).map_err(malformed)?;
    Ok((sys, bundle))
}

pub fn cmd_ladder(p: &RunParams) -> CliResult<Value> {
    let (file, walk) = load_spec(&p.spec)?;
    let r = resolve(p, &file.tasks);
    let (x1, _) = walk.lattice_laws().map_err(malformed)?;
    let (sys, _) = lattice_pipeline(&walk, &r)?;
    let wh = sys.wiener_hopf_residual_x1(x1).map_err(malformed)?;
    Ok(json!({
        "command": "ladder",
        "spec": spec_summary(&file, &walk),
        "params": { "tol": r.tol, "window": r.window },
        "laws": {
            "d_weak_descending": ladder_table(&sys.d),
            "a_weak_ascending": ladder_table(&sys.a),
            "a_strict_ascending": ladder_table(&sys.a_strict),
            "a_prime_weak_ascending": ladder_table(&sys.a_prime),
            "d_prime_weak_descending": ladder_table(&sys.d_prime),
            "d_prime_strict_descending": ladder_table(&sys.d_strict_prime),
        },
        "constants": {
            "p": num_json(&sys.p),
            "p_prime": num_json(&sys.p_prime),
            "a": num_json(&sys.a_const),
            "q": num_json(&sys.q),
            "q_prime": num_json(&sys.q_prime),
        },
        "wiener_hopf_residual": f64_json(wh),
        "tol_achieved": f64_json(sys.tol_achieved),
        "truncation_level": sys.truncation_level_used,
    }))
}

pub fn cmd_stationary(p: &RunParams) -> CliResult<Value> {
    let (file, walk) = load_spec(&p.spec)?;
    let r = resolve(p, &file.tasks);
    let (sys, bundle) = lattice_pipeline(&walk, &r)?;
    let normalized = bundle.normalize_mu().map(|(hat, total)| {
        json!({ "mu_hat": window_table(&hat), "mu_total_mass": num_json(&total) })
    });
    Ok(json!({
        "command": "stationary",
        "spec": spec_summary(&file, &walk),
        "params": { "tol": r.tol, "window": r.window },
        "nu": measure_table(&bundle.nu),
        "mu": window_table(&bundle.mu),
        "pi": bundle.pi.as_ref().map(measure_table),
        "normalized": normalized,
        "constants": {
            "p": num_json(&bundle.p),
            "p_prime": num_json(&bundle.p_prime),
            "a": num_json(&bundle.a),
            "q": num_json(&sys.q),
            "q_prime": num_json(&sys.q_prime),
        },
        "tol_achieved": f64_json(bundle.tol_achieved),
    }))
}

fn check(name: &str, residual: f64, tol: f64) -> Value {
    json!({ "name": name, "residual": f64_json(residual), "tol": tol, "pass": residual <= tol })
}

pub fn cmd_verify(p: &RunParams) -> CliResult<Value> {
    let (file, walk) = load_spec(&p.spec)?;
    let r = resolve(p, &file.tasks);
    let (x1, x1p) = walk.lattice_laws().map_err(malformed)?;
    let (sys, bundle) = lattice_pipeline(&walk, &r)?;
    // Float-backend ladder laws are only accurate to their reported
    // achieved tolerance; exact ones must meet the requested tol.
    let eff_tol = if sys.backend() == Backend::Exact {
        r.tol
    } else {
        r.tol.max(10.0 * sys.tol_achieved).max(1e-8)
    };
    let mut checks: Vec<Value> = Vec::new();

    let nu_half = r.window.max(4);
    let nu_win = bundle.nu.to_window(-nu_half, nu_half).map_err(malformed)?;
    let img = apply_ph(&nu_win, &sys, &walk.alpha).map_err(malformed)?;
    checks.push(check("nu_invariance_under_ph", img.residual_sup, eff_tol));

    let img = apply_p(&bundle.mu, &walk).map_err(malformed)?;
    checks.push(check("mu_invariance_under_p", img.residual_sup, eff_tol));

    let wh = sys.wiener_hopf_residual_x1(x1).map_err(malformed)?;
    checks.push(check("wiener_hopf_x1", wh, eff_tol));
    let wh_p = wiener_hopf_residual(
        &x1p.mirror(),
        &sys.d_strict_prime.pmf.mirror(),
        &sys.a_prime.pmf.mirror(),
    )
    .map_err(malformed)?;
    checks.push(check("wiener_hopf_x1p", wh_p, eff_tol));

    let q = dual_kernel_q(&sys, &bundle.nu, &walk.alpha).map_err(malformed)?;
    checks.push(check("dual_kernel_row_sums", q.row_sum_residual, eff_tol));
    checks.push(check(
        "dual_kernel_detailed_balance",
        q.balance_residual,
        eff_tol,
    ));

    if walk.is_random_walk() {
        let gap = (bundle.p.clone() - bundle.p_prime.clone()).abs().to_f64();
        checks.push(check("random_walk_p_equals_p_prime", gap, eff_tol));
        // μ must collapse to p·λ: constant density p over the interior.
        let (ilo, ihi) = bundle.mu.interior();
        let mut dev = 0.0f64;
        for k in ilo..=ihi {
            let d = bundle.mu.density_at(k).expect("interior density");
            dev = dev.max((d - bundle.p.clone()).abs().to_f64());
        }
        checks.push(check("random_walk_mu_is_p_lambda", dev, eff_tol));
    }

    if let Some(pi) = &bundle.pi {
        let ck = crossing_kernels(&walk, &sys, r.tol).map_err(malformed)?;
        let split = |keep: fn(i64) -> bool| {
            LatticeMeasure::new(
                pi.span().clone(),
                pi.atoms()
                    .iter()
                    .filter(|(k, _)| keep(**k))
                    .map(|(k, m)| (*k, m.clone()))
                    .collect(),
            )
        };
        let pi_plus = split(|k| k >= 0);
        let pi_minus = split(|k| k < 0);
        let down = ck.apply_down(&pi_plus).map_err(malformed)?;
        checks.push(check(
            "pi_invariance_down_crossing",
            down.sup_diff(&pi_minus),
            eff_tol,
        ));
        let up = ck.apply_up(&pi_minus).map_err(malformed)?;
        checks.push(check(
            "pi_invariance_up_crossing",
            up.sup_diff(&pi_plus),
            eff_tol,
        ));
    }

    let all_pass = checks
        .iter()
        .all(|c| c["pass"].as_bool().unwrap_or(false));
    Ok(json!({
        "command": "verify",
        "spec": spec_summary(&file, &walk),
        "params": { "tol": r.tol, "effective_tol": eff_tol, "window": r.window },
        "constants": {
            "p": num_json(&bundle.p),
            "p_prime": num_json(&bundle.p_prime),
            "a": num_json(&bundle.a),
        },
        "checks": checks,
        "pass": all_pass,
    }))
}

pub fn cmd_simulate(p: &RunParams) -> CliResult<Value> {
    let (file, walk) = load_spec(&p.spec)?;
    let r = resolve(p, &file.tasks);
    let (chain, reference) = match r.chain.as_str() {
        "occupation" => {
            let (_, bundle) = lattice_pipeline(&walk, &r)?;
            let (hat, _) = bundle.normalize_mu().ok_or_else(|| {
                CliError::Malformed(
                    "occupation comparison needs a finite invariant measure (drifted spec)"
                        .into(),
                )
            })?;
            let (ilo, ihi) = hat.interior();
            let target = hat.to_measure_on(ilo, ihi).map_err(malformed)?;
            (
                ChainKind::Occupation,
                Reference::LatticeDistribution(target),
            )
        }
        "ladder" => {
            let (sys, _) = lattice_pipeline(&walk, &r)?;
            (ChainKind::Ladder, Reference::LadderLaw(sys.d.pmf.clone()))
        }
        "overshoot" => {
            let x = match &walk.laws {
                switchwalk::kernels::SpecLaws::Continuous { x1, .. } => x1.clone(),
                _ => {
                    return Err(CliError::Malformed(
                        "overshoot chain needs a continuous spec".into(),
                    ))
                }
            };
            let law = OvershootLaw::new(x).map_err(malformed)?;
            (ChainKind::Overshoot, Reference::Overshoot(law))
        }
        other => {
            return Err(CliError::Malformed(format!(
                "chain must be occupation|ladder|overshoot, got {other:?}"
            )))
        }
    };
    let report = stationarity_test(&walk, &reference, chain, r.replicas, r.steps, r.seed)
        .map_err(malformed)?;
    Ok(json!({
        "command": "simulate",
        "spec": spec_summary(&file, &walk),
        "params": {
            "seed": r.seed,
            "steps": r.steps,
            "replicas": r.replicas,
            "chain": r.chain,
        },
        "result": serde_json::to_value(&report).map_err(malformed)?,
        "pass": report.pass,
    }))
}

/// Merge the JSON reports previously written to `dir` into one document
/// and emit CSV plot tables for every measure table found.
pub fn cmd_report(dir: &Path) -> CliResult<(Value, Vec<(String, String)>)> {
    let mut merged = BTreeMap::new();
    for name in ["ladder", "stationary", "verify", "simulate"] {
        let path = dir.join(format!("{name}.json"));
        if path.exists() {
            let text = fs::read_to_string(&path).map_err(malformed)?;
            let v: Value = serde_json::from_str(&text).map_err(malformed)?;
            merged.insert(name.to_string(), v);
        }
    }
    if merged.is_empty() {
        return Err(CliError::Malformed(format!(
            "no prior reports (ladder/stationary/verify/simulate).json in {}",
            dir.display()
        )));
    }
    let doc = json!({ "command": "report", "reports": merged });
    let mut tables = Vec::new();
    collect_tables(&doc, "report", &mut tables);
    Ok((doc, tables))
}

/// Recursively find measure tables (objects with "rows" and "window")
/// and render each as CSV named by its JSON path.
fn collect_tables(v: &Value, path: &str, out: &mut Vec<(String, String)>) {
    if let Value::Object(map) = v {
        if let (Some(Value::Array(rows)), Some(_)) = (map.get("rows"), map.get("window")) {
            out.push((path.to_string(), table_to_csv(map, rows)));
        }
        for (k, child) in map {
            collect_tables(child, &format!("{path}_{k}"), out);
        }
    } else if let Value::Array(items) = v {
        for (i, child) in items.iter().enumerate() {
            collect_tables(child, &format!("{path}_{i}"), out);
        }
    }
}

fn table_to_csv(map: &serde_json::Map<String, Value>, rows: &[Value]) -> String {
    let kind = map
        .get("kind")
        .and_then(Value::as_str)
        .unwrap_or("masses");
    let col = if kind == "densities" { "density" } else { "mass" };
    let mut csv = format!("x,{col},approx,backend\n");
    for row in rows {
        let x = row.get("x").cloned().unwrap_or(Value::Null);
        let cell = row.get(col).cloned().unwrap_or(Value::Null);
        let value = cell
            .get("value")
            .and_then(Value::as_str)
            .unwrap_or("")
            .to_string();
        let approx = cell
            .get("approx")
            .map(|a| a.to_string())
            .unwrap_or_default();
        let backend = cell
            .get("backend")
            .and_then(Value::as_str)
            .unwrap_or("")
            .to_string();
        csv.push_str(&format!("{x},{value},{approx},{backend}\n"));
    }
    csv
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

pub fn render_json(doc: &Value) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("serializable report");
    s.push('\n');
    s
}

/// Write the report (and, for CSV format, its plot tables) under `out`.
pub fn write_outputs(
    doc: &Value,
    command: &str,
    out: Option<&Path>,
    format: Format,
) -> CliResult<()> {
    let Some(dir) = out else { return Ok(()) };
    fs::create_dir_all(dir).map_err(malformed)?;
    fs::write(dir.join(format!("{command}.json")), render_json(doc)).map_err(malformed)?;
    if format == Format::Csv {
        let mut tables = Vec::new();
        collect_tables(doc, command, &mut tables);
        for (name, csv) in tables {
            fs::write(dir.join(format!("{name}.csv")), csv).map_err(malformed)?;
        }
    }
    Ok(())
}

/// Whether the report demands exit code 1 (ran, but a verification or
/// statistical comparison failed).
pub fn report_failed(doc: &Value) -> bool {
    matches!(doc.get("pass"), Some(Value::Bool(false)))
}
