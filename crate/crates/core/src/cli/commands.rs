use super::config::Config;
use super::CliError;
use crate::diagnostics::{diagnose, weiss_csv, DiagnoseOptions};
use crate::domain::{
    extract_boundary, format_boundary_csv, format_grid_dump, read_grid_dump, shapes, DomainError, Grid, GridDomain,
};
use crate::objective::{grad_fp, ObjectiveSpec, PenaltySpec, RegularizationParams, WeightVector, Xi0Field, DEFAULT_S};
use crate::optimizer::{optimize, p_continuation, OptimizerConfig, OptimizerTrace, StopReason};
use crate::spectral::{solve_spectrum, solve_torsion, Spectrum, SpectrumOptions, CLUSTER_REL_GAP};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

/// What a command produced; the caller hashes the artifacts and writes
/// the manifest.
#[derive(Debug, Default)]
pub struct RunOutcome {
    /// file names inside the output directory
    pub artifacts: Vec<String>,
    pub converged: Option<bool>,
    pub stop: Option<String>,
    pub summary: BTreeMap<String, Value>,
    /// numerical failure after partial artifacts were written
    pub failure: Option<String>,
}

impl RunOutcome {
    fn write(&mut self, dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::Io { path, source: e })?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    fn note(&mut self, key: &str, v: Value) {
        self.summary.insert(key.to_string(), v);
    }
}

fn domain_err(e: DomainError) -> CliError {
    match e {
        DomainError::Io(source) => CliError::Io {
            path: Default::default(),
            source,
        },
        DomainError::Empty => CliError::Numerical(e.to_string()),
        other => CliError::Validation(other.to_string()),
    }
}

fn pair(v: Option<Vec<f64>>, default: [f64; 2], key: &str) -> Result<[f64; 2], CliError> {
    match v {
        None => Ok(default),
        Some(v) if v.len() == 2 => Ok([v[0], v[1]]),
        Some(_) => Err(CliError::Config(format!("`{key}` needs 2 numbers"))),
    }
}

fn quad(v: Option<Vec<f64>>, default: [f64; 4], key: &str) -> Result<[f64; 4], CliError> {
    match v {
        None => Ok(default),
        Some(v) if v.len() == 4 => Ok([v[0], v[1], v[2], v[3]]),
        Some(_) => Err(CliError::Config(format!("`{key}` needs 4 numbers"))),
    }
}

/// Builtin shape or a `GRIDDUMP` level set. Shapes: `disk`, `rectangle`,
/// `l_shape`, `slit`, `blob`, `two_blobs`, `file`.
pub fn build_domain(cfg: &Config, seed: u64) -> Result<GridDomain, CliError> {
    let default_shape = if cfg.raw("domain.file").is_some() { "file" } else { "blob" };
    let shape = cfg.raw("domain.shape").unwrap_or(default_shape).to_ascii_lowercase();
    if shape == "file" {
        let path = cfg
            .path("domain.file")?
            .ok_or_else(|| CliError::Config("shape=file needs domain.file".into()))?;
        let dump = read_grid_dump(&path).map_err(domain_err)?;
        return GridDomain::new(dump.grid, dump.values).map_err(domain_err);
    }
    let wide = shape == "two_blobs";
    let n: usize = cfg.get_or("domain.n", 128)?;
    let lo: f64 = cfg.get_or("domain.lo", if wide { -2.75 } else { -2.0 })?;
    let hi: f64 = cfg.get_or("domain.hi", if wide { 2.75 } else { 2.0 })?;
    if !(hi > lo) {
        return Err(CliError::Config("domain.hi must exceed domain.lo".into()));
    }
    let g = Grid::square(lo, hi, n).map_err(domain_err)?;
    let amplitude: f64 = cfg.get_or("domain.amplitude", if wide { 0.25 } else { 0.35 })?;
    let d = match shape.as_str() {
        "disk" => shapes::disk(
            g,
            pair(cfg.list("domain.center")?, [0.0, 0.0], "domain.center")?,
            cfg.get_or("domain.r", 1.0)?,
        ),
        "rectangle" => shapes::rectangle(g, quad(cfg.list("domain.rect")?, [-1.0, 1.0, -1.0, 1.0], "domain.rect")?),
        "l_shape" => shapes::l_shape(
            g,
            pair(cfg.list("domain.corner")?, [-1.0, -1.0], "domain.corner")?,
            cfg.get_or("domain.a", 2.0)?,
        ),
        "slit" => {
            let s = quad(cfg.list("domain.slit")?, [-0.5, 0.0, 0.5, 0.0], "domain.slit")?;
            shapes::slit_rectangle(
                g,
                quad(cfg.list("domain.rect")?, [-1.0, 1.0, -1.0, 1.0], "domain.rect")?,
                [s[0], s[1]],
                [s[2], s[3]],
            )
        }
        "blob" => shapes::random_blob(
            g,
            pair(cfg.list("domain.center")?, [0.1, -0.05], "domain.center")?,
            cfg.get_or("domain.r", 0.9)?,
            amplitude,
            seed,
        ),
        "two_blobs" => {
            let c = quad(cfg.list("domain.centers")?, [-1.3, 0.1, 1.25, -0.1], "domain.centers")?;
            let r = pair(cfg.list("domain.radii")?, [0.75, 0.9], "domain.radii")?;
            shapes::two_blobs(g, [[c[0], c[1]], [c[2], c[3]]], r, amplitude, seed)
        }
        other => return Err(CliError::Config(format!("unknown shape `{other}`"))),
    }
    .map_err(domain_err)?;
    if d.active_count() == 0 {
        return Err(CliError::Validation("domain has no interior nodes".into()));
    }
    Ok(d)
}

pub fn build_objective(cfg: &Config) -> Result<ObjectiveSpec, CliError> {
    ObjectiveSpec::from_name(
        cfg.raw("objective.family").unwrap_or("lambda1"),
        cfg.get("objective.index")?,
        cfg.list("objective.coeffs")?,
        cfg.list("objective.subset")?,
        cfg.get("objective.beta")?,
        cfg.get("objective.n")?,
    )
    .map_err(|e| CliError::Config(e.to_string()))
}

pub fn build_optimizer(cfg: &Config, seed: u64) -> Result<OptimizerConfig, CliError> {
    let bad = |e: &dyn std::fmt::Display| CliError::Config(e.to_string());
    let spec = build_objective(cfg)?;
    let p: f64 = cfg.get_or("optimizer.p", 32.0)?;
    let mut oc = OptimizerConfig::new(spec, p).map_err(|e| bad(&e))?;
    if let Some(nodes) = cfg.get::<usize>("optimizer.quad_nodes")? {
        oc.reg = RegularizationParams::with_nodes(p, nodes).map_err(|e| bad(&e))?;
    }
    oc.pen = PenaltySpec::new(cfg.get_or("optimizer.s", DEFAULT_S)?).map_err(|e| bad(&e))?;
    oc.dt0 = cfg.get_or("optimizer.dt0", oc.dt0)?;
    oc.max_steps = cfg.get_or("optimizer.max_steps", oc.max_steps)?;
    oc.conv_tol = cfg.get_or("optimizer.conv_tol", oc.conv_tol)?;
    oc.patience = cfg.get_or("optimizer.patience", oc.patience)?;
    oc.reinit_every = cfg.get_or("optimizer.reinit_every", oc.reinit_every)?;
    oc.smooth_cells = cfg.get_or("optimizer.smooth_cells", oc.smooth_cells)?;
    oc.seed = seed;
    oc.validate().map_err(|e| bad(&e))?;
    Ok(oc)
}

/// `4π|Ω|/P²`.
pub fn roundness(d: &GridDomain) -> f64 {
    let p = extract_boundary(d).perimeter();
    if p > 0.0 {
        4.0 * std::f64::consts::PI * crate::domain::volume(d) / (p * p)
    } else {
        0.0
    }
}

fn write_spectrum(out: &mut RunOutcome, dir: &Path, sp: &Spectrum) -> Result<(), CliError> {
    out.write(dir, "spectrum.csv", &sp.to_csv())?;
    for (k, m) in sp.modes.iter().enumerate() {
        out.write(dir, &format!("mode_{}.dump", k + 1), &format_grid_dump(&sp.grid, m))?;
    }
    Ok(())
}

fn write_domain(out: &mut RunOutcome, dir: &Path, d: &GridDomain) -> Result<(), CliError> {
    out.write(dir, "phi.dump", &format_grid_dump(d.grid(), d.phi()))?;
    out.write(dir, "boundary.csv", &format_boundary_csv(&extract_boundary(d)))
}

/// Spectrum, torsion function and boundary of a configured domain.
pub fn cmd_solve(cfg: &Config, dir: &Path, seed: u64) -> Result<RunOutcome, CliError> {
    let m: usize = cfg.get_or("spectrum.m", 3)?;
    if m == 0 {
        return Err(CliError::Validation("spectrum.m must be at least 1".into()));
    }
    let tol: Option<f64> = cfg.get("spectrum.tol")?;
    let d = build_domain(cfg, seed)?;
    let mut opts = SpectrumOptions::new(m).with_seed(seed);
    if let Some(t) = tol {
        opts = opts.with_tol(t);
    }
    let sp = solve_spectrum(&d, &opts).map_err(|e| CliError::Numerical(e.to_string()))?;
    let tf = solve_torsion(&d).map_err(|e| CliError::Numerical(e.to_string()))?;
    let mut out = RunOutcome::default();
    write_domain(&mut out, dir, &d)?;
    write_spectrum(&mut out, dir, &sp)?;
    out.write(dir, "torsion.dump", &format_grid_dump(&tf.grid, &tf.v))?;
    out.note("lambdas", json!(sp.lambdas));
    out.note("torsion_energy", json!(tf.energy));
    out.note("volume", json!(crate::domain::volume(&d)));
    Ok(out)
}

fn stop_name(s: StopReason) -> String {
    format!("{s:?}")
}

fn summarize_trace(out: &mut RunOutcome, t: &OptimizerTrace, spec: &ObjectiveSpec) {
    let st = &t.state;
    out.note("p", json!(t.p));
    out.note("objective", json!(st.plain_objective(spec).ok()));
    out.note("regularized_objective", json!(st.objective));
    out.note("volume", json!(st.volume));
    out.note("lambdas", json!(st.spectrum.lambdas));
    out.note("xi", json!(st.weights.xi));
    out.note("steps", json!(t.records.len() - 1));
    out.note("roundness", json!(roundness(&st.domain)));
    out.note("components", json!(st.domain.component_count()));
}

fn xi_rows(s: &mut String, t: &OptimizerTrace) {
    for (k, x) in t.state.weights.xi.iter().enumerate() {
        let _ = writeln!(s, "{},{},{:e}", t.p, k + 1, x);
    }
}

/// Runs the flow, or a p-continuation when `optimizer.schedule` is set.
pub fn cmd_optimize(cfg: &Config, dir: &Path, seed: u64) -> Result<RunOutcome, CliError> {
    let oc = build_optimizer(cfg, seed)?;
    let schedule: Option<Vec<f64>> = cfg.list("optimizer.schedule")?;
    let init = build_domain(cfg, seed)?;
    let mut out = RunOutcome::default();
    let (traces, error) = match &schedule {
        Some(s) => {
            let c = p_continuation(&oc, init, s);
            (c.stages, c.error.map(|e| e.to_string()))
        }
        None => match optimize(&oc, init) {
            Ok(t) => (vec![t], None),
            Err(e) => (Vec::new(), Some(e.to_string())),
        },
    };
    let mut xi = String::from("p,k,xi\n");
    for t in &traces {
        xi_rows(&mut xi, t);
        if schedule.is_some() {
            out.write(dir, &format!("trace_p{}.csv", t.p), &t.to_csv())?;
        }
    }
    if let Some(last) = traces.last() {
        out.write(dir, "trace.csv", &last.to_csv())?;
        out.write(dir, "xi.csv", &xi)?;
        write_domain(&mut out, dir, last.domain())?;
        write_spectrum(&mut out, dir, last.spectrum())?;
        summarize_trace(&mut out, last, &oc.spec);
        out.converged = Some(traces.iter().all(|t| t.converged()));
        out.stop = Some(stop_name(last.stop));
        if last.stop == StopReason::Failed {
            out.failure = Some("solver failure during the flow".into());
        }
    }
    if let Some(e) = error {
        out.converged = Some(false);
        out.failure = Some(e);
    }
    Ok(out)
}

/// `p`-sweep: a continuation over `optimizer.schedule` (default
/// 4,8,16,32,64) with a per-stage summary.
pub fn cmd_sweep_p(cfg: &Config, dir: &Path, seed: u64) -> Result<RunOutcome, CliError> {
    let oc = build_optimizer(cfg, seed)?;
    let schedule = cfg.list("optimizer.schedule")?.unwrap_or_else(|| vec![4.0, 8.0, 16.0, 32.0, 64.0]);
    let init = build_domain(cfg, seed)?;
    let c = p_continuation(&oc, init, &schedule);
    let mut out = RunOutcome::default();
    let n = oc.spec.n();
    let mut sweep = String::from("p,objective,plain_objective,volume");
    for k in 1..=n {
        let _ = write!(sweep, ",lambda{k}");
    }
    for k in 1..=n {
        let _ = write!(sweep, ",xi{k}");
    }
    sweep.push_str(",stop\n");
    for t in &c.stages {
        let st = &t.state;
        let plain = st.plain_objective(&oc.spec).unwrap_or(f64::NAN);
        let _ = write!(sweep, "{},{:e},{:e},{:e}", t.p, st.objective, plain, st.volume);
        for v in st.spectrum.lambdas.iter().chain(&st.weights.xi) {
            let _ = write!(sweep, ",{v:e}");
        }
        let _ = writeln!(sweep, ",{}", stop_name(t.stop));
        out.write(dir, &format!("trace_p{}.csv", t.p), &t.to_csv())?;
    }
    out.write(dir, "sweep.csv", &sweep)?;
    out.write(dir, "xi.csv", &c.xi_csv())?;
    if let Some(last) = c.stages.last() {
        write_domain(&mut out, dir, last.domain())?;
        summarize_trace(&mut out, last, &oc.spec);
        out.converged = Some(c.stages.iter().all(|t| t.converged()));
        out.stop = Some(stop_name(last.stop));
    }
    if let Some(e) = c.error {
        out.converged = Some(false);
        out.failure = Some(e.to_string());
    } else if c.stages.iter().any(|t| t.stop == StopReason::Failed) {
        out.failure = Some("solver failure during the sweep".into());
    }
    Ok(out)
}

/// Reads `spectrum.csv` and its `mode_<k>.dump` files from a directory.
pub fn read_spectrum(dir: &Path) -> Result<Spectrum, CliError> {
    let csv = dir.join("spectrum.csv");
    if !csv.exists() {
        return Err(CliError::MissingFile(csv));
    }
    let text = std::fs::read_to_string(&csv).map_err(|e| CliError::Io {
        path: csv.clone(),
        source: e,
    })?;
    let bad = |m: String| CliError::Validation(format!("{}: {m}", csv.display()));
    let mut lambdas = Vec::new();
    let mut resid = Vec::new();
    for (i, line) in text.lines().skip(1).filter(|l| !l.trim().is_empty()).enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(bad(format!("row {} needs k,lambda,resid", i + 1)));
        }
        lambdas.push(cols[1].trim().parse::<f64>().map_err(|_| bad(format!("bad lambda on row {}", i + 1)))?);
        resid.push(cols[2].trim().parse::<f64>().map_err(|_| bad(format!("bad resid on row {}", i + 1)))?);
    }
    if lambdas.is_empty() {
        return Err(bad("no eigenvalues".into()));
    }
    let mut grid = None;
    let mut modes = Vec::new();
    for k in 1..=lambdas.len() {
        let p = dir.join(format!("mode_{k}.dump"));
        if !p.exists() {
            return Err(CliError::MissingFile(p));
        }
        let dump = read_grid_dump(&p).map_err(domain_err)?;
        match grid {
            None => grid = Some(dump.grid),
            Some(g) if g != dump.grid => return Err(CliError::Validation(format!("{}: grid header differs from mode_1", p.display()))),
            _ => {}
        }
        modes.push(dump.values);
    }
    Ok(Spectrum {
        lambdas,
        modes,
        resid,
        generation: 0,
        grid: grid.expect("at least one mode"),
    })
}

/// Raw weights of the last `p` block of a `p,k,xi` file.
pub fn read_xi(path: &Path) -> Result<(f64, Vec<f64>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let bad = |m: &str| CliError::Validation(format!("{}: {m}", path.display()));
    let mut blocks: Vec<(f64, Vec<f64>)> = Vec::new();
    for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(bad("rows need p,k,xi"));
        }
        let p: f64 = cols[0].trim().parse().map_err(|_| bad("bad p"))?;
        let k: usize = cols[1].trim().parse().map_err(|_| bad("bad k"))?;
        let x: f64 = cols[2].trim().parse().map_err(|_| bad("bad xi"))?;
        if k == 1 || blocks.is_empty() {
            blocks.push((p, Vec::new()));
        }
        let last = blocks.last_mut().expect("block exists");
        if last.0 != p || last.1.len() + 1 != k {
            return Err(bad("k must count up from 1 within each p block"));
        }
        last.1.push(x);
    }
    blocks.pop().ok_or_else(|| bad("no weights"))
}

/// Full diagnostics for dumped artifacts. `ξ_0 ≡ 1`: the penalty reference
/// is not part of the dumps.
pub fn cmd_diagnose(cfg: &Config, dir: &Path, _seed: u64) -> Result<RunOutcome, CliError> {
    let dpath = cfg
        .path("diagnose.domain")?
        .ok_or_else(|| CliError::Config("diagnose needs diagnose.domain".into()))?;
    let spath = cfg
        .path("diagnose.spectrum")?
        .ok_or_else(|| CliError::Config("diagnose needs diagnose.spectrum (a directory)".into()))?;
    let dump = read_grid_dump(&dpath).map_err(domain_err)?;
    let d = GridDomain::new(dump.grid, dump.values).map_err(domain_err)?;
    let sp = read_spectrum(&spath)?;
    if sp.grid != *d.grid() {
        return Err(CliError::Validation(format!(
            "grid header of {} differs from the spectrum dumps",
            dpath.display()
        )));
    }
    let spec = match cfg.raw("objective.family") {
        Some(_) => build_objective(cfg)?,
        None => match cfg.path("diagnose.xi")? {
            Some(p) => ObjectiveSpec::single(read_xi(&p)?.1.len()).map_err(|e| CliError::Config(e.to_string()))?,
            None => ObjectiveSpec::single(1).map_err(|e| CliError::Config(e.to_string()))?,
        },
    };
    let n = spec.n();
    if sp.lambdas.len() < n {
        return Err(CliError::Validation(format!("objective needs {n} modes, dumps have {}", sp.lambdas.len())));
    }
    let xi = match cfg.path("diagnose.xi")? {
        Some(p) => read_xi(&p)?.1,
        None => {
            let reg = RegularizationParams::new(cfg.get_or("optimizer.p", 32.0)?).map_err(|e| CliError::Config(e.to_string()))?;
            grad_fp(&spec, &sp.lambdas[..n], &reg).map_err(|e| CliError::Numerical(e.to_string()))?
        }
    };
    if xi.len() != n {
        return Err(CliError::Validation(format!("xi file has {} weights, objective needs {n}", xi.len())));
    }
    let w = WeightVector::new(xi, &sp.lambdas[..n], CLUSTER_REL_GAP, Xi0Field::constant());
    let opts = DiagnoseOptions {
        weiss_points: cfg.get_or("diagnose.weiss_points", DiagnoseOptions::default().weiss_points)?,
        torsion: cfg.get_or("diagnose.torsion", true)?,
        ..Default::default()
    };
    let rep = diagnose(&d, &sp, &w, &spec, &opts).map_err(|e| CliError::Numerical(e.to_string()))?;
    let mut out = RunOutcome::default();
    out.write(dir, "diagnostics.json", &(rep.to_json() + "\n"))?;
    out.write(dir, "weiss.csv", &weiss_csv(&rep.weiss_profiles))?;
    out.note("points", json!(rep.points));
    out.note("el_median_abs", json!(rep.el_median_abs));
    out.note("reduced", json!(rep.labels.reduced));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xi_file_last_block() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("xi.csv");
        std::fs::write(&p, "p,k,xi\n4,1,0.5\n4,2,0.9\n8,1,0.2\n8,2,1.1\n").unwrap();
        assert_eq!(read_xi(&p).unwrap(), (8.0, vec![0.2, 1.1]));
        std::fs::write(&p, "p,k,xi\n4,2,0.5\n").unwrap();
        assert!(read_xi(&p).is_err());
    }

    #[test]
    fn objective_and_domain_from_config() {
        let cfg = Config::parse("[objective]\nfamily=softmin subset=1,2 beta=2\n").unwrap();
        assert_eq!(build_objective(&cfg).unwrap().n(), 2);
        let cfg = Config::parse("[objective]\nfamily=bogus").unwrap();
        assert!(matches!(build_objective(&cfg), Err(CliError::Config(_))));
        let cfg = Config::parse("shape=disk r=1 n=32").unwrap();
        let d = build_domain(&cfg, 0).unwrap();
        assert!((roundness(&d) - 1.0).abs() < 0.02);
        let cfg = Config::parse("shape=hexagon").unwrap();
        assert!(matches!(build_domain(&cfg, 0), Err(CliError::Config(_))));
    }
}
