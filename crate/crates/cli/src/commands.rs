use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use cremona_core::classical_involutions::{bertini_batch, geiser_batch, quadratic_transformation, InstanceCheck};
use cremona_core::finite_field::{make_field, make_field_q, FieldRef};
use cremona_core::linear_parity::{
    bn_cycle_census, linear_permutation, pgl_exhaustive_parity, pgl_sample_parity, waterhouse_generators,
};
use cremona_core::permutations::{bundle_total_permutation, bundle_trials, elliptic_example, f2_counterexample};
use cremona_core::proj_geometry::PointTable;
use cremona_core::quintic_scan::{json_digest, run_scan, ScanOptions};
use cremona_core::realization::build_realization;

use crate::{BnCmd, Cli, Command, FieldCmd, PglCmd, QuinticCmd};

#[derive(Debug, Serialize)]
pub struct FieldInfo {
    pub p: u32,
    pub m: u32,
    pub q: u64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub field: FieldInfo,
    pub config: Value,
    pub tallies: Value,
    /// `pass`, `fail`, or `recorded` when no contract applies.
    pub verdict: &'static str,
    pub violations: Vec<String>,
    pub runtime_ms: Option<u64>,
    pub config_digest: String,
}

impl Report {
    pub fn summary(&self) -> String {
        let mut s = format!("{} over GF({}): {}", self.command, self.field.q, self.verdict);
        if let Some(v) = self.violations.first() {
            s.push_str(&format!(" ({} violations, first: {v})", self.violations.len()));
        }
        s
    }
}

struct Outcome {
    tallies: Value,
    violations: Vec<String>,
    /// Whether any contract was checked.
    asserted: bool,
    digest: Option<String>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report data serializes")
}

fn field_q(q: u64) -> Result<FieldRef, String> {
    make_field_q(q).map_err(|e| format!("invalid field order {q}: {e}"))
}

fn even_q_above_2(f: &FieldRef) -> bool {
    f.is_char2() && f.order() > 2
}

pub fn execute(cli: &Cli) -> Result<Report, String> {
    let start = Instant::now();
    let (name, field, config, out) = match &cli.command {
        Command::Field { cmd: FieldCmd::Info { p, m } } => {
            let f = make_field(*p, *m).map_err(|e| e.to_string())?;
            let out = field_info(&f);
            ("field info", f, json!({ "p": p, "m": m }), out)
        }
        Command::Realize(a) => {
            let f = field_q(a.q)?;
            ("realize", f.clone(), json!({ "q": a.q }), realize(&f)?)
        }
        Command::Pgl { cmd: PglCmd::Parity { q, n, sample, seed, exhaustive } } => {
            let f = field_q(*q)?;
            let count = sample.unwrap_or(1000);
            let config = if *exhaustive {
                json!({ "q": q, "n": n, "exhaustive": true })
            } else {
                json!({ "q": q, "n": n, "sample": count, "seed": seed })
            };
            ("pgl parity", f.clone(), config, pgl_parity(&f, *n, *exhaustive, count, *seed)?)
        }
        Command::Bn { cmd: BnCmd::Census { q, n } } => {
            let f = field_q(*q)?;
            ("bn census", f.clone(), json!({ "q": q, "n": n }), bn_census(&f, *n)?)
        }
        Command::Quadratic(a) => {
            let f = field_q(a.q)?;
            ("quadratic", f.clone(), json!({ "q": a.q }), quadratic(&f)?)
        }
        Command::Geiser(a) => {
            let f = field_q(a.q)?;
            let batch = geiser_batch(&f, a.samples, a.seed).map_err(|e| e.to_string())?;
            let config = json!({ "q": a.q, "samples": a.samples, "seed": a.seed });
            ("geiser", f.clone(), config, involution_batch(&batch))
        }
        Command::Bertini(a) => {
            let f = field_q(a.q)?;
            let batch = bertini_batch(&f, a.samples, a.seed).map_err(|e| e.to_string())?;
            let config = json!({ "q": a.q, "samples": a.samples, "seed": a.seed });
            ("bertini", f.clone(), config, involution_batch(&batch))
        }
        Command::Bundles(a) => {
            let f = field_q(a.q)?;
            let config = json!({ "q": a.q, "trials": a.trials, "seed": a.seed, "max_base": a.max_base });
            ("bundles", f.clone(), config, bundles(&f, a.trials, a.max_base, a.seed)?)
        }
        Command::Quintic { cmd: QuinticCmd::Scan(a) } => {
            let f = field_q(a.q)?;
            let opts = ScanOptions {
                patterns: a.patterns.clone(),
                block_size: a.block_size,
                jobs: a.jobs,
                checkpoint: a.checkpoint.clone(),
                resume: a.resume,
                stop_after_blocks: a.stop_after_blocks,
                timing: false,
            };
            let report = run_scan(&f, &opts).map_err(|e| e.to_string())?;
            let mut violations = Vec::new();
            let asserted = even_q_above_2(&f);
            if asserted && report.totals.odd > 0 {
                violations.push(format!("{} odd permutations, first at {:?}", report.totals.odd, report.odd_examples[0]));
            }
            if report.complete && report.totals.processed != report.expected_total {
                violations.push("processed count differs from the candidate total".into());
            }
            let config = to_value(&report.config);
            let out = Outcome {
                digest: Some(report.config_digest.clone()),
                tallies: to_value(&report),
                violations,
                asserted,
            };
            ("quintic scan", f, config, out)
        }
    };
    let verdict = match (out.violations.is_empty(), out.asserted) {
        (false, _) => "fail",
        (true, true) => "pass",
        (true, false) => "recorded",
    };
    Ok(Report {
        schema: 1,
        command: name.to_string(),
        field: FieldInfo { p: field.characteristic(), m: field.degree(), q: field.order() },
        config_digest: out.digest.unwrap_or_else(|| json_digest(&json!({ "command": name, "config": config }))),
        config,
        tallies: out.tallies,
        verdict,
        violations: out.violations,
        runtime_ms: cli.timing.then(|| start.elapsed().as_millis() as u64),
    })
}

fn field_info(f: &FieldRef) -> Outcome {
    let g = f.generator();
    Outcome {
        tallies: json!({
            "modulus": f.modulus(),
            "generator": g,
            "generator_text": f.format(g),
            "factored_order": f.factored_order(),
        }),
        violations: Vec::new(),
        asserted: false,
        digest: None,
    }
}

fn realize(f: &FieldRef) -> Result<Outcome, String> {
    let r = build_realization(f).map_err(|e| e.to_string())?;
    Ok(Outcome { tallies: to_value(&r), violations: r.violations.clone(), asserted: true, digest: None })
}

fn pgl_parity(f: &FieldRef, n: usize, exhaustive: bool, count: u64, seed: u64) -> Result<Outcome, String> {
    let r = if exhaustive { pgl_exhaustive_parity(n, f, 0) } else { pgl_sample_parity(n, f, count, seed) }
        .map_err(|e| e.to_string())?;
    let (a, b) = waterhouse_generators(n, f).map_err(|e| e.to_string())?;
    let table = PointTable::new(n, f).map_err(|e| e.to_string())?;
    let sign = |m| linear_permutation(m, &table).map(|(p, _)| p.sign()).map_err(|e| e.to_string());
    let (sa, sb) = (sign(&a)?, sign(&b)?);
    let asserted = even_q_above_2(f);
    let mut violations = Vec::new();
    if asserted {
        if r.odd > 0 {
            violations.push(format!("{} odd elements, first {:?}", r.odd, r.odd_examples[0]));
        }
        if sa != 1 || sb != 1 {
            violations.push(format!("generator parities A: {sa}, B: {sb}"));
        }
    }
    let mut tallies = to_value(&r);
    tallies["generator_parity"] = json!({ "a": sa, "b": sb });
    Ok(Outcome { tallies, violations, asserted, digest: None })
}

fn bn_census(f: &FieldRef, n: usize) -> Result<Outcome, String> {
    let c = bn_cycle_census(n, f).map_err(|e| e.to_string())?;
    let mut violations = Vec::new();
    if !c.matches {
        violations.push("observed census differs from the prediction".into());
    }
    if f.order() > 2 && c.parity != 1 {
        violations.push("B_n is odd".into());
    }
    Ok(Outcome { tallies: to_value(&c), violations, asserted: true, digest: None })
}

fn quadratic(f: &FieldRef) -> Result<Outcome, String> {
    let t = quadratic_transformation(f, None).map_err(|e| e.to_string())?;
    let c = &t.census;
    let q = f.order() as usize;
    let mut violations = Vec::new();
    let asserted = f.is_char2();
    if asserted {
        if !c.is_involution {
            violations.push("map is not an involution".into());
        }
        if c.fixed != 1 || t.fixed_points != [t.predicted_fixed_point.clone()] {
            violations.push(format!("fixed points {:?}, expected {:?}", t.fixed_points, t.predicted_fixed_point));
        }
        if c.transpositions != (q * q + q) / 2 {
            violations.push(format!("{} transpositions", c.transpositions));
        }
        let want = if q == 2 { -1 } else { 1 };
        if c.parity != want {
            violations.push(format!("parity {} (expected {want})", c.parity));
        }
        if !t.orbit_are_base_points {
            violations.push("orbit points are not base points".into());
        }
    }
    let tallies = json!({
        "seed_point": t.seed,
        "components": t.map.components().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        "census": to_value(c),
        "fixed_points": t.fixed_points,
        "predicted_fixed_point": t.predicted_fixed_point,
    });
    Ok(Outcome { tallies, violations, asserted, digest: None })
}

fn involution_batch(batch: &[InstanceCheck]) -> Outcome {
    let mut fixed_histogram: BTreeMap<usize, usize> = BTreeMap::new();
    let (mut even, mut odd) = (0, 0);
    let mut violations = Vec::new();
    for c in batch {
        *fixed_histogram.entry(c.census.fixed).or_default() += 1;
        if c.census.parity == 1 {
            even += 1;
        } else {
            odd += 1;
        }
        violations.extend(c.violations.iter().map(|v| format!("instance {}: {v}", c.index)));
    }
    let instances: Vec<Value> = batch
        .iter()
        .map(|c| {
            json!({
                "index": c.index,
                "coefficients": c.coefficients,
                "points": c.census.points,
                "fixed": c.census.fixed,
                "parity": c.census.parity,
            })
        })
        .collect();
    Outcome {
        tallies: json!({
            "instances": batch.len(),
            "even": even,
            "odd": odd,
            "fixed_histogram": fixed_histogram,
            "details": instances,
        }),
        violations,
        asserted: true,
        digest: None,
    }
}

fn bundles(f: &FieldRef, trials: usize, max_base: usize, seed: u64) -> Result<Outcome, String> {
    let t = bundle_trials(f, trials, max_base, seed).map_err(|e| e.to_string())?;
    let asserted = even_q_above_2(f);
    let mut violations = Vec::new();
    if asserted && t.parity_match != t.trials {
        violations.push(format!("{} trials break parity_match, first {:?}", t.trials - t.parity_match, t.mismatches));
    }
    let mut tallies = to_value(&t);
    if f.order() == 2 {
        let r = bundle_total_permutation(&f2_counterexample(f)).map_err(|e| e.to_string())?;
        tallies["counterexample"] = json!({ "base_parity": r.base_parity, "total_parity": r.total_parity });
    }
    if f.is_char2() {
        let e = elliptic_example(f);
        let r = bundle_total_permutation(&e.bundle).map_err(|e| e.to_string())?;
        tallies["elliptic"] = json!({
            "curve_points": e.points.len(),
            "base_transpositions": e.involution.cycle_type().get(&2).copied().unwrap_or(0),
            "total_transpositions": r.total.cycle_type().get(&2).copied().unwrap_or(0),
            "total_parity": r.total_parity,
        });
    }
    Ok(Outcome { tallies, violations, asserted, digest: None })
}
