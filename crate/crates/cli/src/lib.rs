//! Experiment driver behind the `phdae-mor` binary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;

use phdae_mor::bench::{self, Forcing, MassSpringSpec, OseenSpec, SparsePhdae, Structure};
use phdae_mor::io::{self, Manifest};
use phdae_mor::irka::{irka_reduce, IrkaConfig, IrkaInit, IrkaTrace};
use phdae_mor::reduce::{
    interpolation_residual, reduce, BasisOptions, Blocks, Method, ReducedModel,
};
use phdae_mor::regularize::{self, EIGENVALUE_PROBE_CAP};
use phdae_mor::transfer::{
    frequency_response, h2_error, hinf_error, FrequencyGrid, H2Quadrature, Transfer,
};
use phdae_mor::{Benchmark, PhdaeSystem};

/// Default output directory when `--out` is not given.
pub const OUT_DIR_ENV: &str = "PHDAE_MOR_OUT";

/// Dense checks (partitions, diagnosis) are skipped above this order.
pub const DENSE_CHECK_CAP: usize = 3000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: phdae_mor::Error,
    },
    #[error("{0}")]
    Usage(String),
}

pub type CliResult<T> = Result<T, CliError>;

trait StageExt<T> {
    fn stage(self, stage: &'static str) -> CliResult<T>;
}

impl<T> StageExt<T> for phdae_mor::Result<T> {
    fn stage(self, stage: &'static str) -> CliResult<T> {
        self.map_err(|source| CliError::Stage { stage, source })
    }
}

fn write_file(path: &Path, bytes: &[u8], stage: &'static str) -> CliResult<()> {
    fs::write(path, bytes)
        .map_err(|source| phdae_mor::Error::Io {
            path: path.to_path_buf(),
            source,
        })
        .stage(stage)
}

/// Output directory from the flag, the environment, or `./phdae-mor-out`.
pub fn resolve_out(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("phdae-mor-out"))
}

/// Generator spec `kind[:key=value,...]`, e.g. `mass-spring:k=100` or
/// `oseen:cells=8,viscosity=0.05`.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    pub kind: String,
    pub params: BTreeMap<String, String>,
}

pub const BENCH_KINDS: [&str; 4] = ["mass-spring", "oseen", "random-index1", "random-mixed"];

impl FromStr for BenchSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        if !BENCH_KINDS.contains(&kind) {
            return Err(CliError::Usage(format!(
                "unknown generator `{kind}` (expected one of {})",
                BENCH_KINDS.join(", ")
            )));
        }
        let mut params = BTreeMap::new();
        for kv in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("generator parameter `{kv}` is not key=value"))
            })?;
            params.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self {
            kind: kind.to_string(),
            params,
        })
    }
}

impl BenchSpec {
    fn get<V: FromStr>(&self, key: &str, default: V) -> CliResult<V> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| {
                CliError::Usage(format!("generator parameter {key}=`{v}` does not parse"))
            }),
        }
    }

    fn check_keys(&self, allowed: &[&str]) -> CliResult<()> {
        for k in self.params.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(CliError::Usage(format!(
                    "`{}` does not take parameter `{k}` (allowed: {})",
                    self.kind,
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn build(&self) -> CliResult<Benchmark<f64>> {
        const STAGE: &str = "generate";
        match self.kind.as_str() {
            "mass-spring" => {
                self.check_keys(&["k", "seed", "b2"])?;
                let k = self.get("k", 100usize)?;
                let spec = match self.params.get("seed") {
                    Some(_) => MassSpringSpec::random(k, self.get("seed", 0u64)?),
                    None => MassSpringSpec::uniform(k),
                };
                bench::mass_spring_chain_b2(&spec, self.get("b2", 0.0f64)?).stage(STAGE)
            }
            "oseen" => {
                self.check_keys(&["cells", "viscosity", "wind-x", "wind-y", "forcing"])?;
                let mut spec = OseenSpec::new(self.get("cells", 8usize)?);
                spec.viscosity = self.get("viscosity", spec.viscosity)?;
                spec.wind = (
                    self.get("wind-x", spec.wind.0)?,
                    self.get("wind-y", spec.wind.1)?,
                );
                spec.forcing = match self.params.get("forcing").map(String::as_str) {
                    None | Some("quadrant") => Forcing::LowerLeftQuadrant,
                    Some("left-half") => Forcing::LeftHalfHorizontal,
                    Some(other) => {
                        return Err(CliError::Usage(format!(
                            "unknown forcing `{other}` (expected quadrant or left-half)"
                        )))
                    }
                };
                bench::oseen_grid(&spec).stage(STAGE)
            }
            "random-index1" | "random-mixed" => {
                self.check_keys(&["n1", "n2", "m", "seed"])?;
                let (n1, n2, m, seed) = (
                    self.get("n1", 6usize)?,
                    self.get("n2", 3usize)?,
                    self.get("m", 1usize)?,
                    self.get("seed", 0u64)?,
                );
                let (system, structure) = if self.kind == "random-index1" {
                    (
                        bench::random_ph_index1(n1, n2, m, seed),
                        Structure::Index1 { n1 },
                    )
                } else {
                    (
                        bench::random_ph_mixed(n1, n2, m, seed),
                        Structure::Mixed { n1, n2 },
                    )
                };
                Ok(Benchmark {
                    name: format!("{}-n1{n1}-n2{n2}-m{m}-seed{seed}", self.kind),
                    system: SparsePhdae::from_dense(&system.stage(STAGE)?),
                    structure,
                })
            }
            _ => unreachable!("kind checked on parse"),
        }
    }
}

/// A container directory or a generator spec.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Container(PathBuf),
    Generator(BenchSpec),
}

impl FromStr for Source {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let path = Path::new(s);
        if path.is_dir() {
            return Ok(Source::Container(path.to_path_buf()));
        }
        let kind = s.split_once(':').map_or(s, |p| p.0);
        if BENCH_KINDS.contains(&kind) {
            return s.parse().map(Source::Generator);
        }
        Err(CliError::Usage(format!(
            "`{s}`: not a container directory and not a generator spec"
        )))
    }
}

/// A loaded system with the block structure recorded for it.
pub struct Loaded {
    pub name: String,
    pub sparse: SparsePhdae<f64>,
    pub structure: Option<Structure>,
}

impl Source {
    pub fn load(&self) -> CliResult<Loaded> {
        match self {
            Source::Container(dir) => {
                let c = io::read_system::<f64>(dir).stage("load")?;
                let structure = c.manifest.structure(dir).stage("load")?;
                let name = c
                    .manifest
                    .get("name")
                    .map(str::to_string)
                    .unwrap_or_else(|| dir.display().to_string());
                Ok(Loaded {
                    name,
                    sparse: c.system,
                    structure,
                })
            }
            Source::Generator(spec) => {
                let b = spec.build()?;
                Ok(Loaded {
                    name: b.name,
                    sparse: b.system,
                    structure: Some(b.structure),
                })
            }
        }
    }
}

/// `--method` value: a reducer name or theorem tag, optionally prefixed
/// with `irka-`; bare `irka` uses the structure's default reducer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MethodSpec {
    pub irka: bool,
    pub method: Option<Method>,
}

impl FromStr for MethodSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (irka, rest) = match lower.strip_prefix("irka") {
            Some(r) => (true, r.trim_start_matches('-')),
            None => (false, lower.as_str()),
        };
        if rest.is_empty() {
            return if irka {
                Ok(Self { irka, method: None })
            } else {
                Err(CliError::Usage("empty method".into()))
            };
        }
        let method = rest
            .parse::<Method>()
            .map_err(|e| CliError::Usage(format!("method `{s}`: {e}")))?;
        Ok(Self {
            irka,
            method: Some(method),
        })
    }
}

/// `--r-sweep lo:hi:step`.
pub fn parse_r_sweep(s: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::Usage(format!("r-sweep `{s}` is not of the form lo:hi:step"));
    let parts: Vec<usize> = s
        .split(':')
        .map(|p| p.trim().parse().map_err(|_| bad()))
        .collect::<CliResult<_>>()?;
    let [lo, hi, step] = parts[..] else {
        return Err(bad());
    };
    if lo == 0 || step == 0 || hi < lo {
        return Err(CliError::Usage(format!(
            "r-sweep `{s}` needs 1 <= lo <= hi and step >= 1"
        )));
    }
    Ok((lo..=hi).step_by(step).collect())
}

/// `lo:hi` range of initial (or one-shot) interpolation points.
pub fn parse_range(s: &str) -> CliResult<(f64, f64)> {
    let bad = || {
        CliError::Usage(format!(
            "range `{s}` is not of the form lo:hi with 0 < lo <= hi"
        ))
    };
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi >= lo) {
        return Err(bad());
    }
    Ok((lo, hi))
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub source: Source,
    pub method: MethodSpec,
    pub rs: Vec<usize>,
    pub grid: FrequencyGrid,
    /// Range of the log-spaced starting points.
    pub init: (f64, f64),
    pub seed: u64,
    pub out: PathBuf,
    pub h2: bool,
    pub max_iterations: usize,
    pub tol: f64,
}

impl ExperimentConfig {
    pub fn new(source: Source, method: MethodSpec, rs: Vec<usize>, out: PathBuf) -> Self {
        Self {
            source,
            method,
            rs,
            grid: FrequencyGrid::logspace(1e-4, 1e4, 400).expect("valid default grid"),
            init: (1e-2, 1e4),
            seed: 0,
            out,
            h2: false,
            max_iterations: 100,
            tol: 1e-6,
        }
    }
}

/// One row of `errors.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub r: usize,
    pub interp_residual_max: f64,
    pub min_eig_w: f64,
    pub rel_hinf: f64,
    pub rel_h2: Option<f64>,
    pub converged: Option<bool>,
    pub iterations: Option<usize>,
}

pub const ERRORS_HEADER: [&str; 7] = [
    "r",
    "interp_residual_max",
    "min_eig_W",
    "rel_hinf",
    "rel_h2",
    "converged",
    "iterations",
];

impl SweepRow {
    fn record(&self) -> [String; 7] {
        [
            self.r.to_string(),
            format!("{:e}", self.interp_residual_max),
            format!("{:e}", self.min_eig_w),
            format!("{:e}", self.rel_hinf),
            self.rel_h2.map(|v| format!("{v:e}")).unwrap_or_default(),
            self.converged.map(|v| v.to_string()).unwrap_or_default(),
            self.iterations.map(|v| v.to_string()).unwrap_or_default(),
        ]
    }
}

struct Zero {
    p: usize,
    m: usize,
}

impl Transfer<f64> for Zero {
    fn inputs(&self) -> usize {
        self.m
    }
    fn outputs(&self) -> usize {
        self.p
    }
    fn eval(
        &self,
        _: nalgebra::Complex<f64>,
    ) -> phdae_mor::Result<nalgebra::DMatrix<nalgebra::Complex<f64>>> {
        Ok(nalgebra::DMatrix::zeros(self.p, self.m))
    }
}

/// Picks the reducer: explicit choice, else the structure's default.
pub fn resolve_method(
    spec: MethodSpec,
    structure: Option<Structure>,
    sys: &PhdaeSystem<f64>,
) -> CliResult<(Method, Blocks)> {
    let structure = structure.ok_or_else(|| {
        CliError::Usage(
            "the system has no recorded block structure (manifest `structure`), cannot reduce"
                .into(),
        )
    })?;
    let b2_zero = match structure {
        Structure::Index2 { n1 } => sys.partition_index2(n1).stage("partition")?.b2_zero(),
        _ => true,
    };
    let method = spec.method.unwrap_or(structure.default_method(b2_zero));
    Ok((method, structure.blocks()))
}

struct Outcome {
    row: SweepRow,
    model: ReducedModel<f64>,
    trace: Option<IrkaTrace>,
}

fn reduce_one(
    cfg: &ExperimentConfig,
    sys: &PhdaeSystem<f64>,
    method: Method,
    blocks: Blocks,
    h2_ref: Option<f64>,
    r: usize,
) -> CliResult<Outcome> {
    let mut icfg = IrkaConfig::<f64>::new(r);
    icfg.max_iterations = cfg.max_iterations;
    icfg.tol = cfg.tol;
    icfg.init = IrkaInit::LogSpaced {
        lo: cfg.init.0,
        hi: cfg.init.1,
        direction_seed: (sys.m() > 1).then_some(cfg.seed),
    };
    let (model, trace) = if cfg.method.irka {
        let (m, t) = irka_reduce(sys, method, blocks, &icfg).stage("irka")?;
        (m, Some(t))
    } else {
        let data = icfg.initial_data(sys.m()).stage("interpolation data")?;
        (
            reduce(sys, method, blocks, &data, &BasisOptions::default()).stage("reduce")?,
            None,
        )
    };
    let interp = interpolation_residual(sys, &model, &model.data).stage("interpolation check")?;
    let hinf = hinf_error::<f64>(sys, &model, &cfg.grid).stage("hinf error")?;
    let rel_h2 = match h2_ref {
        Some(norm) if norm > 0.0 => match h2_error::<f64>(sys, &model, &H2Quadrature::default()) {
            Ok(e) => Some(e / norm),
            Err(e) => {
                log::warn!("r = {r}: H2 error skipped: {e}");
                None
            }
        },
        _ => None,
    };
    Ok(Outcome {
        row: SweepRow {
            r,
            interp_residual_max: interp,
            min_eig_w: model.min_eig_w,
            rel_hinf: hinf.relative,
            rel_h2,
            converged: trace.as_ref().map(|t| t.converged),
            iterations: trace.as_ref().map(|t| t.len()),
        },
        model,
        trace,
    })
}

/// Runs every reduced order of the experiment and writes the artifacts:
/// `errors.csv`, `response_full.csv`, and per order `r<r>/` holding the
/// reduced container, `response.csv` and (for IRKA) `irka_trace.csv`.
pub fn run(cfg: &ExperimentConfig) -> CliResult<Vec<SweepRow>> {
    if cfg.rs.is_empty() || cfg.rs.contains(&0) {
        return Err(CliError::Usage("reduced orders must be at least 1".into()));
    }
    let loaded = cfg.source.load()?;
    if loaded.sparse.n() > DENSE_CHECK_CAP {
        log::warn!(
            "{}: order {} is reduced with dense factorizations; this may be slow",
            loaded.name,
            loaded.sparse.n()
        );
    }
    let sys = loaded.sparse.to_dense().stage("load")?;
    let (method, blocks) = resolve_method(cfg.method, loaded.structure, &sys)?;
    log::info!("{}: n = {}, method {}", loaded.name, sys.n(), method.name());
    let h2_ref = if cfg.h2 {
        let zero = Zero {
            p: sys.m(),
            m: sys.m(),
        };
        match h2_error::<f64>(&sys, &zero, &H2Quadrature::default()) {
            Ok(v) => Some(v),
            Err(e) => {
                log::warn!("H2 norm of the full model unavailable, rel_h2 skipped: {e}");
                None
            }
        }
    } else {
        None
    };
    let outcomes: Vec<Outcome> = cfg
        .rs
        .par_iter()
        .map(|&r| reduce_one(cfg, &sys, method, blocks, h2_ref, r))
        .collect::<CliResult<_>>()?;

    fs::create_dir_all(&cfg.out)
        .map_err(|source| phdae_mor::Error::Io {
            path: cfg.out.clone(),
            source,
        })
        .stage("write")?;
    let mut buf = Vec::new();
    frequency_response(&sys, &cfg.grid)
        .stage("frequency response")?
        .write_csv(&mut buf)
        .stage("write")?;
    write_file(&cfg.out.join("response_full.csv"), &buf, "write")?;
    for o in &outcomes {
        let dir = cfg.out.join(format!("r{}", o.row.r));
        io::write_reduced(&dir, &o.model).stage("write")?;
        let mut buf = Vec::new();
        frequency_response(&o.model, &cfg.grid)
            .stage("frequency response")?
            .write_csv(&mut buf)
            .stage("write")?;
        write_file(&dir.join("response.csv"), &buf, "write")?;
        if let Some(t) = &o.trace {
            let mut buf = Vec::new();
            t.write_csv(&mut buf).stage("write")?;
            write_file(&dir.join("irka_trace.csv"), &buf, "write")?;
        }
    }
    let rows: Vec<SweepRow> = outcomes.into_iter().map(|o| o.row).collect();
    write_errors_csv(&cfg.out.join("errors.csv"), &rows)?;
    Ok(rows)
}

pub fn write_errors_csv(path: &Path, rows: &[SweepRow]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Usage(format!("{}: {e}", path.display()));
    w.write_record(ERRORS_HEADER).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.record()).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    write_file(path, &bytes, "write")
}

pub fn generate(spec: &BenchSpec, out: &Path) -> CliResult<Benchmark<f64>> {
    let b = spec.build()?;
    io::write_benchmark(out, &b).stage("write")?;
    Ok(b)
}

/// Human-readable validation of a container; the flag is `true` iff every
/// structural check passes.
pub fn validate(dir: &Path) -> CliResult<(String, bool)> {
    let c = io::read_system::<f64>(dir).stage("load")?;
    let mut out = String::new();
    let n = c.system.n();
    let _ = writeln!(out, "{}: n = {}, m = {}", dir.display(), n, c.system.m());
    if !c.defaulted.is_empty() {
        let _ = writeln!(out, "defaulted to zero: {}", c.defaulted.join(", "));
    }
    let report = c.system.validate(phdae_mor::model::DEFAULT_TOL);
    let mut passed = report.passed();
    out.push_str(&report.to_string());

    let structure = c.manifest.structure(dir).stage("load")?;
    let dense = if n <= DENSE_CHECK_CAP {
        Some(c.system.to_dense().stage("load")?)
    } else {
        None
    };
    match (structure, &dense) {
        (Some(Structure::Index2 { n1 }), _) => {
            let r = c.system.validate_index2(n1, phdae_mor::model::DEFAULT_TOL);
            passed &= r.passed();
            out.push_str(&r.to_string());
        }
        (Some(Structure::Index1 { n1 }), Some(sys)) => {
            let ok = sys.partition_index1(n1);
            let _ = writeln!(
                out,
                "{:<32} {}",
                "index-1 partition",
                partition_line(&ok.as_ref().map(|_| ()))
            );
            passed &= ok.is_ok();
        }
        (Some(Structure::Mixed { n1, n2 }), Some(sys)) => {
            let ok = sys.partition_mixed(n1, n2);
            let _ = writeln!(
                out,
                "{:<32} {}",
                "mixed partition",
                partition_line(&ok.as_ref().map(|_| ()))
            );
            passed &= ok.is_ok();
        }
        _ => {}
    }
    if let Some(recorded) = c.manifest.get("ph_valid") {
        let _ = writeln!(out, "recorded ph_valid = {recorded}");
        if let Some(v) = c.manifest.get("min_eig_w") {
            let _ = writeln!(out, "recorded min eig W = {v}");
        }
    }
    if let Some(sys) = &dense {
        if sys.e().iter().all(|v| *v == 0.0) {
            let _ = writeln!(out, "note: E is zero, so the system has no dynamic states");
        }
        if n <= EIGENVALUE_PROBE_CAP {
            match regularize::diagnose(&sys.as_generic(), 16) {
                Ok(d) => {
                    if !d.pencil_regular {
                        let _ = writeln!(out, "concern: the pencil sE - A is singular");
                    }
                    let _ = writeln!(out, "{d}");
                }
                Err(e) => {
                    let _ = writeln!(out, "diagnosis unavailable: {e}");
                }
            }
        }
    }
    let _ = writeln!(out, "overall: {}", if passed { "pass" } else { "FAIL" });
    Ok((out, passed))
}

fn partition_line(r: &Result<(), &phdae_mor::Error>) -> String {
    match r {
        Ok(()) => "pass".into(),
        Err(e) => format!("FAIL  ({e})"),
    }
}

/// `--feedback` value: `I`, a scalar `k` (meaning `k·I`) or a comma list
/// for a diagonal gain.
pub fn parse_feedback(s: &str, m: usize) -> CliResult<DMatrix<f64>> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("i") {
        return Ok(DMatrix::identity(m, m));
    }
    let vals: Vec<f64> = t
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| {
            CliError::Usage(format!(
                "feedback `{s}` is not I, a number, or a comma list"
            ))
        })?;
    match vals.len() {
        1 => Ok(DMatrix::identity(m, m) * vals[0]),
        l if l == m => Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vals))),
        l => Err(CliError::Usage(format!(
            "feedback has {l} entries, the system has {m} inputs"
        ))),
    }
}

#[derive(Debug, Clone, Default)]
pub struct RegularizeOptions {
    pub condensed: bool,
    pub feedback: Option<String>,
}

/// Removes the singular part, optionally applies output feedback, and writes
/// the result to `out` (the condensed form, if requested, to `out/condensed`).
pub fn regularize(input: &Path, out: &Path, opts: &RegularizeOptions) -> CliResult<String> {
    let c = io::read_system::<f64>(input).stage("load")?;
    let sys = c.system.to_dense().stage("load")?;
    let mut report = String::new();
    let reg = regularize::remove_singular_part(&sys).stage("remove singular part")?;
    let _ = writeln!(
        report,
        "singular part: dropped {} of {} states (regular block {}, input-reached kernel {})",
        reg.dropped,
        sys.n(),
        reg.n_regular,
        reg.n_input
    );
    let mut manifest = Manifest::new();
    if let Some(name) = c.manifest.get("name") {
        manifest.set("name", name);
    }
    if reg.dropped == 0 {
        let _ = writeln!(
            report,
            "note: already regular, the system is copied unchanged"
        );
    }
    let mut result = reg.system;
    let keep_structure = reg.dropped == 0 && opts.feedback.is_none();
    if keep_structure {
        for key in ["structure", "n1", "n2"] {
            if let Some(v) = c.manifest.get(key) {
                manifest.set(key, v);
            }
        }
    }
    manifest.set("dropped", reg.dropped);
    if let Some(k) = &opts.feedback {
        let gain = parse_feedback(k, result.m())?;
        result = regularize::output_feedback_regularize(&result, &gain).stage("output feedback")?;
        manifest.set("feedback", k.trim());
        let v = result.validate();
        let _ = writeln!(
            report,
            "output feedback u = v - K y applied; closed loop {}",
            if v.passed() {
                "passes validation"
            } else {
                "FAILS validation"
            }
        );
    }
    if opts.condensed {
        let cf = regularize::condensed_form(&result).stage("condensed form")?;
        let s = cf.sizes;
        let _ = writeln!(
            report,
            "condensed form: dynamic {}, algebraic dissipative {}, algebraic conservative {}, index-2 {}, singular {}",
            s.n_dyn, s.n_alg1_diss, s.n_alg1_cons, s.n_ind2, s.n_sing
        );
        report.push_str(&cf.report());
        io::write_system(
            &out.join("condensed"),
            &SparsePhdae::from_dense(&cf.system),
            &Manifest::new(),
        )
        .stage("write")?;
    }
    io::write_system(out, &SparsePhdae::from_dense(&result), &manifest).stage("write")?;
    Ok(report)
}
