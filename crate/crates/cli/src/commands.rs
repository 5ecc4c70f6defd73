use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use hjsolve::{
    compare_fields, extract_zero_levelset, lf_solve, sample_bilinear, solve_grid, solve_point, Example, FieldSource,
    Grid2DField, GridOptions, GridSpec, HjError, PointSolution, ProblemSpec, SolveConfig,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::manifest::RunManifest;

/// A failed command; `kind` is `config` for anything caught before compute.
#[derive(Debug)]
pub struct Failure {
    pub kind: &'static str,
    pub message: String,
}

impl From<HjError> for Failure {
    fn from(e: HjError) -> Self {
        let kind = match e {
            HjError::Config(_) => "config",
            HjError::Unsupported(_) => "unsupported",
            _ => "numerical",
        };
        Failure { kind, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { kind: "io", message: e.to_string() }
    }
}

impl Failure {
    pub fn to_json(&self) -> String {
        json!({ "error": { "kind": self.kind, "message": self.message } }).to_string()
    }
}

pub type CmdResult = Result<(), Failure>;

/// File-name form of a time: the shortest decimal that round-trips.
pub fn time_tag(t: f64) -> String {
    format!("t{t}")
}

fn write_json(path: &Path, value: &impl Serialize) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("artifact serialises");
    text.push('\n');
    fs::write(path, text)
}

fn with_manifest(m: &RunManifest, mut body: Value) -> Value {
    body["manifest"] = serde_json::to_value(m).expect("manifest serialises");
    body
}

struct Progress {
    label: &'static str,
    quiet: bool,
    shown: AtomicUsize,
}

impl Progress {
    fn new(label: &'static str, quiet: bool) -> Self {
        Self { label, quiet, shown: AtomicUsize::new(0) }
    }

    fn tick(&self, done: usize, total: usize) {
        if self.quiet {
            return;
        }
        // at most ~100 updates per run
        let step = (total / 100).max(1);
        if done == total || done % step == 0 {
            let prev = self.shown.fetch_max(done, Ordering::Relaxed);
            if done > prev {
                eprint!("\r[{}] {done}/{total}", self.label);
                if done == total {
                    eprintln!();
                }
            }
        }
    }
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn rate(num: usize, den: usize) -> f64 {
    if den == 0 { f64::NAN } else { num as f64 / den as f64 }
}

/// Timing percentiles and convergence / certificate rates of one field.
fn field_stats(f: &Grid2DField) -> Value {
    let n = f.values.len();
    let converged = f.converged.iter().filter(|c| **c).count();
    let certified = f.certificate_ok.iter().filter(|c| **c).count();
    let both = f.converged.iter().zip(&f.certificate_ok).filter(|(a, b)| **a && **b).count();
    let failed = f.values.iter().filter(|v| v.is_nan()).count();
    let mut times = f.wall_times.clone();
    times.sort_by(f64::total_cmp);
    let total: f64 = times.iter().sum();
    json!({
        "t": f.t,
        "nodes": n,
        "failed": failed,
        "convergence_rate": rate(converged, n),
        "certificate_rate": rate(certified, n),
        "certificate_rate_of_converged": rate(both, converged),
        "mean_trials": f.trials_used.iter().sum::<usize>() as f64 / n.max(1) as f64,
        "timing": {
            "p50": percentile(&times, 0.5),
            "p90": percentile(&times, 0.9),
            "p99": percentile(&times, 0.99),
            "max": times.last().copied().unwrap_or(f64::NAN),
            "mean": total / n.max(1) as f64,
            "total": total,
        },
    })
}

fn write_fields(dir: &Path, fields: &[Grid2DField], source: FieldSource) -> std::io::Result<()> {
    for f in fields {
        fs::write(dir.join(format!("field_{}_{}.csv", source.as_str(), time_tag(f.t))), f.to_csv())?;
    }
    let mut out = String::from("t,seg_id,x1a,x2a,x1b,x2b\n");
    for f in fields {
        for (id, s) in extract_zero_levelset(f).iter().enumerate() {
            let _ = writeln!(
                out,
                "{:.16e},{id},{:.16e},{:.16e},{:.16e},{:.16e}",
                f.t, s.a[0], s.a[1], s.b[0], s.b[1]
            );
        }
    }
    fs::write(dir.join(format!("levelset_{}.csv", source.as_str())), out)
}

fn prepare(m: &RunManifest) -> Result<ProblemSpec, Failure> {
    let spec = m.validate()?;
    fs::create_dir_all(&m.out)?;
    write_json(&m.out.join("manifest.json"), m)?;
    Ok(spec)
}

fn char_fields(spec: &ProblemSpec, m: &RunManifest, quiet: bool) -> Result<(GridSpec, Vec<Grid2DField>), Failure> {
    let grid = GridSpec::cross_section(m.dim, m.grid);
    let progress = Progress::new("char", quiet);
    let tick = |done: usize, total: usize| progress.tick(done, total);
    let opts = GridOptions { threads: None, progress: Some(&tick) };
    let fields = solve_grid(spec, &grid, &m.times, &m.solve, &opts)?;
    Ok((grid, fields))
}

pub fn cmd_solve(m: &RunManifest, quiet: bool) -> CmdResult {
    let spec = prepare(m)?;
    let start = Instant::now();
    if let Some(x) = &m.point {
        let sol = solve_point(&spec, x, m.t_final, &m.solve)?;
        write_json(&m.out.join("point.json"), &with_manifest(m, json!({ "solution": &sol })))?;
        let mut stdout = std::io::stdout().lock();
        // a closed pipe downstream is not an error of the solve
        let _ = writeln!(stdout, "{}", serde_json::to_string(&sol).expect("solution serialises"));
        if !quiet {
            eprintln!(
                "[solve] φ = {:.16e} in {:.3e} s ({} trials, converged {}, certified {})",
                sol.value, sol.wall_time, sol.trials_used, sol.converged, sol.certificate_ok
            );
        }
        return Ok(());
    }
    let (_, fields) = char_fields(&spec, m, quiet)?;
    write_fields(&m.out, &fields, FieldSource::Char)?;
    let summary = json!({
        "command": "solve",
        "mode": spec.mode,
        "wall_time": start.elapsed().as_secs_f64(),
        "snapshots": fields.iter().map(field_stats).collect::<Vec<_>>(),
    });
    write_json(&m.out.join("summary.json"), &with_manifest(m, summary))?;
    if !quiet {
        eprintln!("[solve] wrote {} snapshots to {}", fields.len(), m.out.display());
    }
    Ok(())
}

/// `reference` sampled at the nodes of `grid`.
fn resample(reference: &Grid2DField, grid: &GridSpec) -> Grid2DField {
    let values = (0..grid.len())
        .map(|k| {
            let x = grid.point(k);
            sample_bilinear(reference, x[0], x[1])
        })
        .collect();
    Grid2DField::from_values(*grid, reference.t, FieldSource::Lf, values).expect("sizes match")
}

pub fn cmd_compare(m: &RunManifest, quiet: bool) -> CmdResult {
    let spec = prepare(m)?;
    let start = Instant::now();
    let (grid, char_fields) = char_fields(&spec, m, quiet)?;
    let char_time = start.elapsed().as_secs_f64();

    let lf_start = Instant::now();
    if !quiet {
        eprintln!("[lf] dx = {}, dt = {:.6e}", m.lf.dx, m.lf.dt);
    }
    let lf_fields = lf_solve(&spec, &m.lf, m.t_final, &m.times)?;
    let lf_time = lf_start.elapsed().as_secs_f64();

    let reports = char_fields
        .iter()
        .zip(&lf_fields)
        .map(|(c, r)| compare_fields(c, r, m.mask))
        .collect::<Result<Vec<_>, _>>()?;
    let lf_on_grid: Vec<_> = lf_fields.iter().map(|f| resample(f, &grid)).collect();
    write_fields(&m.out, &char_fields, FieldSource::Char)?;
    write_fields(&m.out, &lf_on_grid, FieldSource::Lf)?;
    write_json(&m.out.join("discrepancy.json"), &with_manifest(m, json!({ "snapshots": &reports })))?;
    let alpha = m.lf.resolve_alpha(spec.model.as_ref());
    let summary = json!({
        "command": "compare",
        "mode": spec.mode,
        "wall_time": start.elapsed().as_secs_f64(),
        "char_time": char_time,
        "lf": { "time": lf_time, "alpha": [alpha.0, alpha.1], "cfl": m.lf.cfl(alpha) },
        "snapshots": char_fields.iter().map(field_stats).collect::<Vec<_>>(),
    });
    write_json(&m.out.join("summary.json"), &with_manifest(m, summary))?;
    if !quiet {
        for r in &reports {
            eprintln!(
                "[compare] t = {}: median |Δφ| = {:.3e}, max = {:.3e}, hausdorff = {:.3e} ({} failed)",
                r.t, r.outside_mask.median, r.outside_mask.max, r.hausdorff, r.failed_nodes
            );
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct SweepRow {
    kind: &'static str,
    sigma: f64,
    ds: f64,
    value: f64,
    error: f64,
    converged: bool,
    certificate_ok: bool,
    wall_time: f64,
}

const SWEEP_HEADER: &str = "kind,sigma,ds,value,error,converged,certificate_ok,wall_time";

fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{:.16e}",
            r.kind, r.sigma, r.ds, r.value, r.error, r.converged, r.certificate_ok, r.wall_time
        );
    }
    out
}

pub fn cmd_convergence(m: &RunManifest, quiet: bool) -> CmdResult {
    let spec = prepare(m)?;
    let x = m.point.clone().expect("convergence manifests always carry a point");
    let c = &m.convergence;
    let run = |ds: f64, sigma: f64| -> Result<PointSolution, Failure> {
        let cfg = SolveConfig { ds, sigma, ..m.solve.clone() };
        cfg.validate(&spec)?;
        Ok(solve_point(&spec, &x, m.t_final, &cfg)?)
    };
    let reference = run(c.reference_ds, c.reference_sigma)?;
    let row = |kind, ds, sigma, s: &PointSolution| SweepRow {
        kind,
        sigma,
        ds,
        value: s.value,
        error: (s.value - reference.value).abs(),
        converged: s.converged,
        certificate_ok: s.certificate_ok,
        wall_time: s.wall_time,
    };
    // the reference is re-run rather than copied, so its zero row checks determinism
    let again = run(c.reference_ds, c.reference_sigma)?;

    let mut sigma_sweep = vec![row("reference", c.reference_ds, c.reference_sigma, &again)];
    for &sigma in &c.sigmas {
        sigma_sweep.push(row("sweep", c.fixed_ds, sigma, &run(c.fixed_ds, sigma)?));
        if !quiet {
            eprintln!("[convergence] σ = {sigma}: error {:.3e}", sigma_sweep.last().unwrap().error);
        }
    }
    let mut step_sweep = vec![row("reference", c.reference_ds, c.reference_sigma, &again)];
    for &ds in &c.steps {
        step_sweep.push(row("sweep", ds, c.fixed_sigma, &run(ds, c.fixed_sigma)?));
        if !quiet {
            eprintln!("[convergence] Δs = {ds}: error {:.3e}", step_sweep.last().unwrap().error);
        }
    }
    fs::write(m.out.join("sigma_sweep.csv"), sweep_csv(&sigma_sweep))?;
    fs::write(m.out.join("step_sweep.csv"), sweep_csv(&step_sweep))?;
    let errors: Vec<f64> = step_sweep[1..].iter().map(|r| r.error).collect();
    let summary = json!({
        "command": "convergence",
        "mode": spec.mode,
        "point": x,
        "t": m.t_final,
        "reference_value": reference.value,
        "sigma_sweep": sigma_sweep,
        "step_sweep": step_sweep,
        // the Δs list is meant to be given coarse to fine
        "step_sweep_monotone": errors.windows(2).all(|w| w[1] <= w[0]),
    });
    write_json(&m.out.join("summary.json"), &with_manifest(m, summary))?;
    Ok(())
}

pub fn cmd_list_examples() -> CmdResult {
    for (id, desc) in Example::all_ids() {
        println!("{id:<5} {desc}");
    }
    Ok(())
}
