//! Command implementations. Every command produces a JSON document (stdout
//! and optionally a file), an optional CSV projection, and a verification
//! flag that drives the exit code: 0 success, 2 verification failure,
//! 3 budget refusal.

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use igusa_core::characters::{
    component_series, twisted_pole_report, twisted_stream, UnitCharacter,
};
use igusa_core::counting::{
    brute_force_count, count_table, lift_count, stratified_count, verify_theorem23, Algorithm,
    CountTable, TableRequest,
};
use igusa_core::json::{
    pole_docs, rational_pair, zeta_document, CharacterDoc, CyclotomicDoc, FactorDoc, SeriesDoc,
};
use igusa_core::series::{
    check_min_pole_bound, check_valuation_lower_bound, estimate_min_pole, find_sharpness_witness,
    pole_report, poincare_series, reconstruct_with, zeta_coefficients, PoleRealPart, PoleReport,
    RationalFunction, RationalSeries, ReconstructOptions,
};
use igusa_core::{Error as CoreError, Prime};

use crate::config::{self, JobConfig, MAX_CLI_PRIME};
use crate::parse::{parse_poly, PolyExpr};

/// Set by the SIGINT handler; corpus runners stop between items and flush
/// what they have.
pub static STOP: AtomicBool = AtomicBool::new(false);

fn stopped() -> bool {
    STOP.load(Ordering::SeqCst)
}

#[derive(Debug)]
pub enum CliFailure {
    Usage(String),
    Budget {
        message: String,
        budget: u64,
    },
    Other(String),
}

impl CliFailure {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliFailure::Budget { .. } => 3,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            CliFailure::Usage(m) => json!({"error": {"kind": "usage", "message": m}}),
            CliFailure::Budget { message, budget } => {
                json!({"error": {"kind": "budget_exceeded", "message": message, "budget": budget}})
            }
            CliFailure::Other(m) => json!({"error": {"kind": "error", "message": m}}),
        }
    }
}

impl From<CoreError> for CliFailure {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::BudgetExceeded { budget, .. } => CliFailure::Budget {
                message: e.to_string(),
                budget,
            },
            other => CliFailure::Other(other.to_string()),
        }
    }
}

pub struct CmdOutput {
    pub json: Value,
    pub csv: Option<String>,
    pub verification_failed: bool,
    pub aborted: bool,
}

impl CmdOutput {
    fn ok(json: Value) -> Self {
        CmdOutput {
            json,
            csv: None,
            verification_failed: false,
            aborted: false,
        }
    }
}

/// A validated job: parsed polynomial, prime, declared dimension, budget.
pub struct Job {
    pub expr: PolyExpr,
    pub p: Prime,
    pub n: u32,
    pub budget: u64,
}

pub fn prepare_job(
    poly: &str,
    p: u64,
    n: Option<u32>,
    budget: Option<u64>,
) -> Result<Job, CliFailure> {
    if p >= MAX_CLI_PRIME {
        return Err(CliFailure::Usage(format!(
            "the CLI restricts p < {MAX_CLI_PRIME}; got {p}"
        )));
    }
    let p = Prime::new(p).map_err(|e| CliFailure::Usage(e.to_string()))?;
    let expr = parse_poly(poly).map_err(|e| CliFailure::Usage(e.to_string()))?;
    let nvars = expr.poly.nvars() as u32;
    let n = n.unwrap_or(nvars);
    if n < nvars {
        return Err(CliFailure::Usage(format!(
            "declared dimension {n} is smaller than the polynomial's {nvars} variables"
        )));
    }
    Ok(Job {
        expr,
        p,
        n,
        budget: config::resolve_budget(budget),
    })
}

fn parse_algorithm(text: &Option<String>) -> Result<Option<Algorithm>, CliFailure> {
    match text {
        None => Ok(None),
        Some(t) if t == "auto" => Ok(None),
        Some(t) => t
            .parse::<Algorithm>()
            .map(Some)
            .map_err(|e| CliFailure::Usage(e.to_string())),
    }
}

fn table_levels_json(table: &CountTable) -> Value {
    let levels: Vec<Value> = (0..=table.max_level())
        .map(|i| {
            let entries: Vec<Value> = table
                .level_entries(i)
                .map(|(u, e)| {
                    json!({
                        "u": u.to_string(),
                        "count": e.count.to_string(),
                        "algorithm": e.algorithm.to_string(),
                    })
                })
                .collect();
            json!({
                "i": i,
                "complete": table.is_complete(i),
                "entries": entries,
            })
        })
        .collect();
    Value::Array(levels)
}

fn table_csv(table: &CountTable) -> String {
    let mut out = String::from("i,u,count,algorithm\n");
    for (i, u, e) in table.entries() {
        out.push_str(&format!("{i},{u},{},{}\n", e.count, e.algorithm));
    }
    out
}

pub fn cmd_count(
    job: &Job,
    imax: u32,
    all_targets: Option<u32>,
    target: Option<BigUint>,
    algorithm: &Option<String>,
) -> Result<CmdOutput, CliFailure> {
    let algorithm = parse_algorithm(algorithm)?;
    let req = TableRequest {
        i_max: imax,
        full_target_max: all_targets,
        algorithm,
        budget: job.budget,
    };
    let mut table = count_table(&job.expr.poly, job.p, job.n, &req)?;
    if let Some(u) = &target {
        for i in 1..=imax {
            let algo = algorithm.unwrap_or(Algorithm::Lift);
            let count = match algo {
                Algorithm::BruteForce => brute_force_count(&job.expr.poly, job.p, i, u, job.budget)?,
                Algorithm::Lift => lift_count(&job.expr.poly, job.p, i, u),
                Algorithm::Stratified => {
                    stratified_count(&job.expr.poly, job.p, i, u, job.budget)?
                }
            };
            let extra = job.n - job.expr.poly.nvars() as u32;
            let scaled = count * BigInt::from(job.p.power(i * extra));
            table.insert(i, u % job.p.power(i), scaled, algo);
        }
    }
    let json = json!({
        "command": "count",
        "input": job.expr.source,
        "poly": job.expr.canonical(),
        "p": job.p.get(),
        "n": job.n,
        "imax": imax,
        "levels": table_levels_json(&table),
    });
    Ok(CmdOutput {
        csv: Some(table_csv(&table)),
        ..CmdOutput::ok(json)
    })
}

pub struct ReconFlags {
    pub num_deg: Option<usize>,
    pub den_deg: Option<usize>,
    pub guard: Option<usize>,
    pub nu_max: Option<u32>,
    pub n_exp_max: Option<u32>,
}

impl ReconFlags {
    /// Degree bounds default to an even split of what the series length
    /// leaves after the guard band.
    pub fn options(&self, series_len: usize, n: u32) -> ReconstructOptions {
        let guard = self.guard.unwrap_or(4);
        let room = series_len.saturating_sub(guard);
        let n = n.max(1);
        ReconstructOptions {
            max_num_deg: self.num_deg.unwrap_or(room / 2),
            max_den_deg: self.den_deg.unwrap_or(room - room / 2),
            guard,
            nu_max: self.nu_max.unwrap_or(4 * n),
            n_exp_max: self.n_exp_max.unwrap_or(2 * n),
        }
    }
}

pub struct ZetaPipeline {
    pub table: CountTable,
    pub poincare: RationalSeries,
    pub zeta: RationalSeries,
    pub function: RationalFunction,
    pub report: PoleReport,
}

pub fn zeta_pipeline(
    job: &Job,
    imax: u32,
    algorithm: &Option<String>,
    flags: &ReconFlags,
) -> Result<ZetaPipeline, CliFailure> {
    let algorithm = parse_algorithm(algorithm)?;
    let req = TableRequest {
        i_max: imax,
        full_target_max: None,
        algorithm,
        budget: job.budget,
    };
    let table = count_table(&job.expr.poly, job.p, job.n, &req)?;
    let poincare = poincare_series(&table, job.n, imax)?;
    let zeta = zeta_coefficients(&poincare)?;
    let opts = flags.options(zeta.len(), job.n);
    let function = reconstruct_with(&zeta, &opts)?;
    let report = pole_report(&function, job.p);
    Ok(ZetaPipeline {
        table,
        poincare,
        zeta,
        function,
        report,
    })
}

fn min_re_json(report: &PoleReport) -> (Value, Value) {
    match report.min_real_part() {
        None => (Value::Null, Value::Null),
        Some(PoleRealPart::Exact(r)) => (
            json!(r.to_f64().unwrap_or(f64::NAN)),
            json!(rational_pair(r)),
        ),
        Some(PoleRealPart::Approx(v)) => (json!(v), Value::Null),
    }
}

fn bound_outcome(report: &PoleReport, n: u32) -> (bool, Option<String>) {
    if report.is_empty() {
        return (true, None);
    }
    match check_min_pole_bound(report, n) {
        Ok(ok) => (ok, None),
        Err(e) => (false, Some(e.to_string())),
    }
}

pub fn cmd_zeta(
    job: &Job,
    imax: u32,
    algorithm: &Option<String>,
    flags: &ReconFlags,
    poles_only: bool,
) -> Result<CmdOutput, CliFailure> {
    let pipe = zeta_pipeline(job, imax, algorithm, flags)?;
    let (min_re, min_re_exact) = min_re_json(&pipe.report);
    let (bound_ok, bound_error) = bound_outcome(&pipe.report, job.n);
    let z_at_one = pipe
        .function
        .value_at_one()
        .map(|v| json!(rational_pair(&v)))
        .unwrap_or(Value::Null);

    let mut doc = json!({
        "command": if poles_only { "poles" } else { "zeta" },
        "poly": job.expr.canonical(),
        "p": job.p.get(),
        "n": job.n,
        "imax": imax,
        "min_re": min_re,
        "min_re_exact": min_re_exact,
        "bound_ok": bound_ok,
        "poles": pole_docs(&pipe.report),
        "factors": pipe.function.factors().iter().map(FactorDoc::from).collect::<Vec<_>>(),
    });
    let obj = doc.as_object_mut().expect("object");
    if let Some(err) = bound_error {
        obj.insert("bound_error".into(), json!(err));
    }
    if !poles_only {
        obj.insert(
            "counts".into(),
            json!((0..=imax)
                .map(|i| pipe.table.zero_count(i).expect("computed").to_string())
                .collect::<Vec<_>>()),
        );
        obj.insert(
            "poincare".into(),
            json!(pipe.poincare.coeffs().iter().map(rational_pair).collect::<Vec<_>>()),
        );
        obj.insert(
            "zeta".into(),
            serde_json::to_value(zeta_document(&pipe.zeta, &pipe.function, &pipe.report))
                .expect("serializable"),
        );
        obj.insert("z_at_one".into(), z_at_one);
    }

    let mut csv = String::from("kind,index,num,den\n");
    for (k, c) in pipe.poincare.coeffs().iter().enumerate() {
        let [n_, d] = rational_pair(c);
        csv.push_str(&format!("poincare,{k},{n_},{d}\n"));
    }
    for (k, c) in pipe.zeta.coeffs().iter().enumerate() {
        let [n_, d] = rational_pair(c);
        csv.push_str(&format!("zeta,{k},{n_},{d}\n"));
    }

    Ok(CmdOutput {
        json: doc,
        csv: Some(csv),
        verification_failed: !bound_ok,
        aborted: false,
    })
}

pub fn cmd_verify_t23(
    configs: &[JobConfig],
    budget_flag: Option<u64>,
) -> Result<CmdOutput, CliFailure> {
    let mut items = Vec::new();
    let mut all_pass = true;
    let mut aborted = false;
    for cfg in configs {
        if stopped() {
            aborted = true;
            break;
        }
        let job = prepare_job(&cfg.poly, cfg.p, cfg.n, cfg.budget.or(budget_flag))?;
        if job.n < 2 {
            return Err(CliFailure::Usage(format!(
                "{}: theorem checks require n > 1",
                cfg.label()
            )));
        }
        let algorithm = parse_algorithm(&cfg.algorithm)?;
        let req = TableRequest {
            i_max: cfg.imax,
            full_target_max: Some(cfg.all_targets_imax.unwrap_or(cfg.imax.min(2))),
            algorithm,
            budget: job.budget,
        };
        let table = count_table(&job.expr.poly, job.p, job.n, &req)?;
        let report = verify_theorem23(&table, job.n).map_err(CliFailure::from)?;
        all_pass &= report.pass();
        let first_failure = report.first_failure().map(|f| {
            json!({
                "i": f.level,
                "u": f.target.to_string(),
                "count": f.count.to_string(),
                "ord": f.ord.to_string(),
                "required": f.required,
            })
        });
        items.push(json!({
            "name": cfg.label(),
            "poly": job.expr.canonical(),
            "p": job.p.get(),
            "n": job.n,
            "imax": cfg.imax,
            "pass": report.pass(),
            "checked": report.checked,
            "first_failure": first_failure,
        }));
    }
    let mut csv = String::from("name,pass,checked\n");
    for item in &items {
        csv.push_str(&format!(
            "{},{},{}\n",
            item["name"].as_str().unwrap_or(""),
            item["pass"],
            item["checked"]
        ));
    }
    Ok(CmdOutput {
        json: json!({
            "command": "verify",
            "check": "t23",
            "items": items,
            "pass": all_pass,
            "aborted": aborted,
        }),
        csv: Some(csv),
        verification_failed: !all_pass,
        aborted,
    })
}

pub fn cmd_verify_bound(
    job: &Job,
    horizon: u32,
    lprime: &BigRational,
    algorithm: &Option<String>,
) -> Result<CmdOutput, CliFailure> {
    if job.n < 2 {
        return Err(CliFailure::Usage("bound checks require n > 1".into()));
    }
    let algorithm = parse_algorithm(algorithm)?;
    let req = TableRequest {
        i_max: horizon,
        full_target_max: None,
        algorithm,
        budget: job.budget,
    };
    let table = count_table(&job.expr.poly, job.p, job.n, &req)?;
    let report = check_valuation_lower_bound(&table, job.n, lprime, horizon)?;
    let deficits: Vec<Value> = report
        .deficits
        .iter()
        .map(|d| match d {
            Some(r) => json!(rational_pair(r)),
            None => Value::Null,
        })
        .collect();
    let json = json!({
        "command": "verify",
        "check": "bound",
        "poly": job.expr.canonical(),
        "p": job.p.get(),
        "n": job.n,
        "horizon": horizon,
        "lprime": rational_pair(lprime),
        "offset": report.offset,
        "prefix_offsets": report.prefix_offsets,
        "deficits": deficits,
        "diverging": report.diverging,
    });
    Ok(CmdOutput {
        verification_failed: report.diverging,
        ..CmdOutput::ok(json)
    })
}

pub fn cmd_verify_witness(
    job: &Job,
    horizon: u32,
    l_flag: Option<BigRational>,
    algorithm: &Option<String>,
    flags: &ReconFlags,
) -> Result<CmdOutput, CliFailure> {
    let (l, l_source) = match l_flag {
        Some(l) => (l, "flag"),
        None => {
            let pipe = zeta_pipeline(job, horizon, algorithm, flags)?;
            let min = pipe
                .report
                .min_real_part()
                .and_then(PoleRealPart::exact)
                .cloned()
                .ok_or_else(|| {
                    CliFailure::Other(
                        "no exact minimum pole from reconstruction; pass --l explicitly".into(),
                    )
                })?;
            (min, "reconstruction")
        }
    };
    let algorithm = parse_algorithm(algorithm)?;
    let req = TableRequest {
        i_max: horizon,
        full_target_max: None,
        algorithm,
        budget: job.budget,
    };
    let table = count_table(&job.expr.poly, job.p, job.n, &req)?;
    let witness = find_sharpness_witness(&table, job.n, &l, horizon)?;
    let estimate = estimate_min_pole(&table, job.n)
        .ok()
        .map(|e| json!({"estimate": rational_pair(&e.estimate), "degenerate": e.degenerate}));
    let json = json!({
        "command": "verify",
        "check": "witness",
        "poly": job.expr.canonical(),
        "p": job.p.get(),
        "n": job.n,
        "horizon": horizon,
        "l": rational_pair(&l),
        "l_source": l_source,
        "witness": witness.as_ref().map(|w| json!({
            "R": w.period,
            "c": w.offset,
            "a": w.a,
            "indices": w.verified_indices,
        })),
        "verdict": if witness.is_some() { "witness-found" } else { "inconclusive" },
        "min_pole_estimate": estimate,
    });
    Ok(CmdOutput::ok(json))
}

pub fn cmd_twist(
    job: &Job,
    conductor: u32,
    exps: &[u64],
    imax: u32,
    flags: &ReconFlags,
) -> Result<CmdOutput, CliFailure> {
    if job.n < 2 {
        return Err(CliFailure::Usage("twist checks require n > 1".into()));
    }
    let chi = UnitCharacter::new(job.p, conductor, exps.to_vec()).map_err(CliFailure::from)?;
    let stream = twisted_stream(&job.expr.poly, &chi, job.n, imax)?;
    let components = component_series(&stream);
    let divisibility = igusa_core::characters::verify_twisted_divisibility(
        &components,
        job.p,
        job.n,
        conductor,
        imax,
    )?;
    let opts = flags.options(imax as usize + 1, job.n);
    let poles = twisted_pole_report(&components, &opts);
    let (bound_ok, bound_error) = bound_outcome(&poles.combined, job.n);
    let (min_re, min_re_exact) = min_re_json(&poles.combined);

    let component_docs: Vec<Value> = poles
        .components
        .iter()
        .map(|c| {
            json!({
                "index": c.index,
                "zero": components[c.index].is_identically_zero(),
                "error": c.error,
                "factors": c.function.as_ref().map(|f| {
                    f.factors().iter().map(FactorDoc::from).collect::<Vec<_>>()
                }),
                "poles": c.report.as_ref().map(pole_docs),
            })
        })
        .collect();

    let failures: Vec<Value> = divisibility
        .failures
        .iter()
        .map(|f| {
            json!({
                "component": f.component,
                "i": f.index,
                "value": f.value.to_string(),
                "required": f.required,
            })
        })
        .collect();

    let mut doc = json!({
        "command": "twist",
        "poly": job.expr.canonical(),
        "p": job.p.get(),
        "n": job.n,
        "imax": imax,
        "character": serde_json::to_value(CharacterDoc::from(&chi)).expect("serializable"),
        "coefficients": stream
            .coeffs()
            .iter()
            .map(|t| serde_json::to_value(CyclotomicDoc::from(t)).expect("serializable"))
            .collect::<Vec<_>>(),
        "components": components
            .iter()
            .map(|s| serde_json::to_value(SeriesDoc::from(s)).expect("serializable"))
            .collect::<Vec<_>>(),
        "divisibility": {
            "pass": divisibility.pass(),
            "checked": divisibility.checked,
            "failures": failures,
        },
        "poles": {
            "components": component_docs,
            "combined": pole_docs(&poles.combined),
            "min_re": min_re,
            "min_re_exact": min_re_exact,
            "bound_ok": bound_ok,
        },
    });
    if let Some(err) = bound_error {
        doc.as_object_mut()
            .expect("object")
            .insert("bound_error".into(), json!(err));
    }
    let failed = !divisibility.pass() || !bound_ok;
    Ok(CmdOutput {
        json: doc,
        csv: None,
        verification_failed: failed,
        aborted: false,
    })
}

pub fn cmd_bench(
    job: &Job,
    imax: u32,
    algorithms: &[Algorithm],
    target: Option<BigUint>,
) -> Result<CmdOutput, CliFailure> {
    let u = target.unwrap_or_default();
    let mut rows = Vec::new();
    let mut agreement = true;
    for i in 1..=imax {
        let mut counts: Vec<BigInt> = Vec::new();
        for &algo in algorithms {
            let start = Instant::now();
            let result = match algo {
                Algorithm::BruteForce => {
                    brute_force_count(&job.expr.poly, job.p, i, &u, job.budget)
                }
                Algorithm::Lift => Ok(lift_count(&job.expr.poly, job.p, i, &u)),
                Algorithm::Stratified => {
                    stratified_count(&job.expr.poly, job.p, i, &u, job.budget)
                }
            };
            let micros = start.elapsed().as_micros() as u64;
            match result {
                Ok(count) => {
                    rows.push(json!({
                        "algorithm": algo.to_string(),
                        "i": i,
                        "u": u.to_string(),
                        "count": count.to_string(),
                        "micros": micros,
                    }));
                    counts.push(count);
                }
                Err(CoreError::BudgetExceeded { required, budget }) => {
                    rows.push(json!({
                        "algorithm": algo.to_string(),
                        "i": i,
                        "u": u.to_string(),
                        "skipped": "budget",
                        "required": required,
                        "budget": budget,
                    }));
                }
                Err(e) => return Err(e.into()),
            }
        }
        agreement &= counts.windows(2).all(|w| w[0] == w[1]);
    }
    let mut csv = String::from("algorithm,i,u,count,micros\n");
    for row in &rows {
        if row.get("count").is_some() {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                row["algorithm"].as_str().unwrap_or(""),
                row["i"],
                row["u"].as_str().unwrap_or(""),
                row["count"].as_str().unwrap_or(""),
                row["micros"]
            ));
        }
    }
    Ok(CmdOutput {
        json: json!({
            "command": "bench",
            "poly": job.expr.canonical(),
            "p": job.p.get(),
            "n": job.n,
            "imax": imax,
            "grid": rows,
            "agreement": agreement,
        }),
        csv: Some(csv),
        verification_failed: !agreement,
        aborted: false,
    })
}
