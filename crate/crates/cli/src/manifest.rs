//! Run manifests: example defaults, overlaid by an optional JSON file,
//! overlaid by command-line flags.

use std::path::{Path, PathBuf};

use hjsolve::{DiskMask, Example, HjError, InitialKind, LFConfig, ProblemSpec, Result, SolveConfig, SolveMode};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::ProblemArgs;

/// Settings of the two convergence sweeps at a fixed point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvergenceSpec {
    pub reference_ds: f64,
    pub reference_sigma: f64,
    /// σ sweep, run at `fixed_ds`.
    pub sigmas: Vec<f64>,
    pub fixed_ds: f64,
    /// Δs sweep, run at `fixed_sigma`.
    pub steps: Vec<f64>,
    pub fixed_sigma: f64,
}

impl Default for ConvergenceSpec {
    fn default() -> Self {
        Self {
            reference_ds: 0.005,
            reference_sigma: 0.01,
            sigmas: vec![0.06, 0.05, 0.04, 0.03, 0.02],
            fixed_ds: 0.005,
            steps: vec![0.03, 0.025, 0.02, 0.015, 0.01],
            fixed_sigma: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub example: Example,
    pub dim: usize,
    /// `None` picks the formula from the Hamiltonian.
    pub mode: Option<SolveMode>,
    pub initial: InitialKind,
    pub t_final: f64,
    /// Snapshot times; always ends at `t_final`.
    pub times: Vec<f64>,
    /// Nodes per axis of the `[-3, 3]²` cross-section.
    pub grid: usize,
    /// Single-point solve instead of a grid.
    pub point: Option<Vec<f64>>,
    pub solve: SolveConfig,
    pub lf: LFConfig,
    pub mask: Option<DiskMask>,
    pub convergence: ConvergenceSpec,
    pub threads: Option<usize>,
    pub out: PathBuf,
}

/// Default snapshot spacing of each family.
fn snapshot_spacing(example: Example) -> f64 {
    match example {
        Example::Ex1Linear => 0.02,
        Example::Ex4Evans => 0.025,
        _ => 0.1,
    }
}

/// Multiples of the example's spacing up to `t_final`, which is always last.
pub fn default_times(example: Example, t_final: f64) -> Vec<f64> {
    let h = snapshot_spacing(example);
    let mut times: Vec<f64> = (1..)
        .map(|k| k as f64 * h)
        .take_while(|t| *t < t_final * (1.0 - 1e-9))
        .map(|t| (t * 1e9).round() / 1e9)
        .collect();
    times.push(t_final);
    times
}

fn default_horizon(example: Example) -> f64 {
    match example {
        Example::Ex1Linear => 0.12,
        Example::Ex2Harmonic { .. } => 0.5,
        Example::Ex3Eikonal { sign: hjsolve::Sign::Plus } => 0.3,
        Example::Ex3Eikonal { .. } => 0.5,
        Example::Ex4Evans => 0.1,
        Example::Ex5Split { .. } => 0.3,
    }
}

/// The defect region reported for the split example in two dimensions.
pub fn default_mask(example: Example, dim: usize) -> Option<DiskMask> {
    matches!(example, Example::Ex5Split { .. } if dim == 2).then_some(DiskMask { center: [-1.0, -0.4], radius: 0.3 })
}

impl RunManifest {
    pub fn defaults(command: &str, example: Example, dim: usize) -> Self {
        let t_final = default_horizon(example);
        Self {
            command: command.to_string(),
            example,
            dim,
            mode: None,
            initial: InitialKind::Ellipse,
            t_final,
            times: default_times(example, t_final),
            grid: 121,
            point: None,
            solve: SolveConfig::for_example(example),
            lf: LFConfig::default(),
            mask: default_mask(example, dim),
            convergence: ConvergenceSpec::default(),
            threads: None,
            out: PathBuf::from("out"),
        }
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        ProblemSpec::example(self.example, self.dim, self.initial, self.mode)
    }

    /// Every check that can fail before any compute starts.
    pub fn validate(&self) -> Result<ProblemSpec> {
        let spec = self.problem()?;
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(HjError::config(format!("T must be positive, got {}", self.t_final)));
        }
        if self.times.is_empty() {
            return Err(HjError::config("no snapshot times"));
        }
        if let Some(t) = self.times.iter().find(|t| !(**t > 0.0 && **t <= self.t_final * (1.0 + 1e-12))) {
            return Err(HjError::config(format!("snapshot time {t} outside (0, T = {}]", self.t_final)));
        }
        self.solve.validate(&spec)?;
        if let Some(p) = &self.point {
            if p.len() != self.dim {
                return Err(HjError::config(format!("--point has {} components, --dim is {}", p.len(), self.dim)));
            }
        } else if self.grid < 2 {
            return Err(HjError::config(format!("grid needs at least 2 nodes per axis, got {}", self.grid)));
        }
        if self.threads == Some(0) {
            return Err(HjError::config("--threads must be at least 1"));
        }
        if self.command == "compare" {
            if self.dim != 2 {
                return Err(HjError::config(format!("compare needs d = 2 (the reference scheme is 2-D), got {}", self.dim)));
            }
            self.lf.grid()?;
            let alpha = self.lf.resolve_alpha(spec.model.as_ref());
            if self.lf.cfl(alpha) > 1.0 {
                return Err(HjError::config(format!(
                    "LF time step {} violates the CFL condition; use --lf-dt <= {:.3e}",
                    self.lf.dt,
                    self.lf.stable_dt(alpha, 1.0)
                )));
            }
        }
        if self.command == "convergence" {
            let c = &self.convergence;
            let all = [c.reference_ds, c.reference_sigma, c.fixed_ds, c.fixed_sigma];
            if all.iter().chain(&c.sigmas).chain(&c.steps).any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(HjError::config("convergence steps and sigmas must be positive"));
            }
        }
        Ok(spec)
    }
}

/// Recursively overwrites `base` with the entries of `over`.
fn merge(base: &mut Value, over: &Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (slot, v) => *slot = v.clone(),
    }
}

fn lookup<'a>(v: &'a Value, path: &[&str]) -> Option<&'a Value> {
    path.iter().try_fold(v, |cur, k| cur.get(k))
}

/// Expands `a,b,...,z` to `dim` entries by repeating the entry before `...`.
pub fn parse_point(text: &str, dim: usize) -> Result<Vec<f64>> {
    let tokens: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    let num = |s: &str| s.parse::<f64>().map_err(|_| HjError::config(format!("bad coordinate '{s}' in --point")));
    match tokens.iter().position(|t| *t == "...") {
        None => tokens.iter().map(|t| num(t)).collect(),
        Some(0) => Err(HjError::config("'...' in --point needs a value before it")),
        Some(at) => {
            let head: Vec<f64> = tokens[..at].iter().map(|t| num(t)).collect::<Result<_>>()?;
            let tail: Vec<f64> = tokens[at + 1..].iter().map(|t| num(t)).collect::<Result<_>>()?;
            if head.len() + tail.len() > dim {
                return Err(HjError::config(format!("--point lists more than {dim} coordinates")));
            }
            let fill = *head.last().expect("head is non-empty");
            let mut out = head.clone();
            out.resize(dim - tail.len(), fill);
            out.extend(tail);
            Ok(out)
        }
    }
}

pub fn parse_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| HjError::config(format!("bad number '{s}' in {what}"))))
        .collect()
}

fn read_file(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HjError::config(format!("cannot read manifest {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| HjError::config(format!("manifest {} is not valid JSON: {e}", path.display())))
}

/// Builds the resolved manifest for `command` from the manifest file (if
/// any) and the flags, in that order of precedence (flags win).
pub fn resolve(command: &str, args: &ProblemArgs) -> Result<RunManifest> {
    let file = match &args.manifest {
        Some(p) => read_file(p)?,
        None => Value::Object(Default::default()),
    };
    let file_example: Option<Example> = match file.get("example") {
        Some(v) => Some(
            serde_json::from_value(v.clone()).map_err(|e| HjError::config(format!("manifest 'example': {e}")))?,
        ),
        None => None,
    };
    let sign = args.sign.as_deref().map(hjsolve::Sign::parse).transpose()?;
    let example = match (&args.example, file_example) {
        (Some(id), _) => Example::parse(id, sign, args.k)?,
        (None, Some(ex)) => match ex {
            Example::Ex2Harmonic { .. } if sign.is_some() => Example::Ex2Harmonic { sign: sign.unwrap() },
            Example::Ex3Eikonal { .. } if sign.is_some() => Example::Ex3Eikonal { sign: sign.unwrap() },
            Example::Ex5Split { .. } if args.k.is_some() => Example::Ex5Split { k: args.k.unwrap() },
            ex => ex,
        },
        (None, None) if command == "convergence" => Example::Ex3Eikonal { sign: sign.unwrap_or(hjsolve::Sign::Plus) },
        (None, None) => return Err(HjError::config("--example is required (or an 'example' entry in --manifest)")),
    };
    let dim = args
        .dim
        .or_else(|| file.get("dim").and_then(Value::as_u64).map(|d| d as usize))
        .unwrap_or(2);

    let mut base = serde_json::to_value(RunManifest::defaults(command, example, dim)).expect("manifest serialises");
    let mut over = file.clone();
    if let Value::Object(o) = &mut over {
        // already resolved above; the command is whatever is being run now
        o.remove("example");
        o.remove("dim");
        o.remove("command");
    }
    merge(&mut base, &over);
    let mut m: RunManifest =
        serde_json::from_value(base).map_err(|e| HjError::config(format!("manifest does not match the schema: {e}")))?;

    let tol_given = args.certificate_tol.is_some() || lookup(&file, &["solve", "certificate_tol"]).is_some();
    let lf_dt_given = args.lf_dt.is_some() || lookup(&file, &["lf", "dt"]).is_some();
    let times_given = args.times.is_some() || file.get("times").is_some();

    if let Some(mode) = &args.mode {
        m.mode = Some(SolveMode::parse(mode)?);
    }
    if let Some(init) = &args.initial {
        m.initial = InitialKind::parse(init)?;
    }
    if let Some(t) = args.t_final {
        m.t_final = t;
    }
    if let Some(times) = &args.times {
        m.times = parse_list(times, "--times")?;
    } else if !times_given {
        m.times = default_times(example, m.t_final);
    }
    if let Some(n) = args.grid {
        m.grid = n;
    }
    if let Some(p) = &args.point {
        m.point = Some(parse_point(p, dim)?);
    }
    let s = &mut m.solve;
    if let Some(v) = args.ds {
        s.ds = v;
    }
    if let Some(v) = args.sigma {
        s.sigma = v;
    }
    if let Some(v) = args.lipschitz {
        s.descent.lipschitz = v;
    }
    if let Some(v) = args.max_iters {
        s.descent.max_iters = v;
    }
    if let Some(v) = args.eps {
        s.descent.eps = v;
    }
    if let Some(v) = args.max_backoffs {
        s.descent.max_backoffs = v;
    }
    if let Some(v) = args.trials {
        s.descent.trials = v;
    }
    if let Some(v) = args.seed {
        s.descent.seed = v;
    }
    if args.stop_at_first_certified {
        s.descent.stop_at_first_certified = true;
    }
    match args.certificate_tol {
        Some(v) => s.certificate_tol = v,
        // the default follows the step: the discrete terminal condition only holds to O(Δs)
        None if !tol_given => s.certificate_tol = 1e-3_f64.max(0.5 * s.ds),
        None => {}
    }
    if let Some(v) = args.lf_dx {
        m.lf.dx = v;
    }
    if let Some(v) = args.lf_dt {
        m.lf.dt = v;
    }
    if let Some(v) = args.lf_pad {
        m.lf.pad = v;
    }
    if args.no_mask {
        m.mask = None;
    } else if let Some(text) = &args.mask {
        let v = parse_list(text, "--mask")?;
        if v.len() != 3 || !(v[2] > 0.0) {
            return Err(HjError::config("--mask expects 'x1,x2,radius' with a positive radius"));
        }
        m.mask = Some(DiskMask { center: [v[0], v[1]], radius: v[2] });
    }
    if let Some(v) = &args.ref_ds {
        m.convergence.reference_ds = *v;
    }
    if let Some(v) = &args.ref_sigma {
        m.convergence.reference_sigma = *v;
    }
    if let Some(v) = &args.sigmas {
        m.convergence.sigmas = parse_list(v, "--sigmas")?;
    }
    if let Some(v) = &args.steps {
        m.convergence.steps = parse_list(v, "--steps")?;
    }
    if let Some(v) = args.fixed_ds {
        m.convergence.fixed_ds = v;
    }
    if let Some(v) = args.fixed_sigma {
        m.convergence.fixed_sigma = v;
    }
    m.threads = args.threads.or(m.threads).or_else(|| {
        std::env::var("HJ_THREADS").ok().and_then(|s| s.trim().parse().ok())
    });
    if let Some(out) = &args.out {
        m.out = out.clone();
    }

    if command == "compare" && !lf_dt_given {
        // largest default step the CFL condition allows
        if let Ok(spec) = m.problem() {
            let alpha = m.lf.resolve_alpha(spec.model.as_ref());
            m.lf.dt = m.lf.dt.min(m.lf.stable_dt(alpha, 0.9));
        }
    }
    if command == "convergence" && m.point.is_none() {
        m.point = Some(vec![-0.93, -0.35]);
        if args.t_final.is_none() && file.get("t_final").is_none() {
            m.t_final = 0.3;
        }
    }
    Ok(m)
}
