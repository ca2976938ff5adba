//! Validated jobs, one per subcommand. `prepare` performs every check and
//! opens every output before `run` starts any computation.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use rayon::prelude::*;

use qamem::classical::{retrieve_with, ClassicalState, UpdateMode};
use qamem::format::sig;
use qamem::meanfield::{
    bifurcation_scan, capacity_at, classify_solution, solve_order_parameters, FiniteMFParams,
};
use qamem::patterns::{
    generate_random_patterns, hebb_weights, overlap, random_flip_indices, Normalization,
    PatternSet,
};
use qamem::plot::render_svg;
use qamem::quantum::{linspace, propagation_memory_bytes, retrieval_run, RunSpec};
use qamem::sweep::{refine_boundaries, run_sweep, write_boundaries_csv, write_csv, SweepGrid};

use crate::config::Resolved;

pub enum Job {
    Classical(Classical),
    Simulate(Simulate),
    MfSingle(MfSingle),
    MfSolve(FiniteMFParams),
    Sweep(Sweep),
    Capacity(Capacity),
}

pub struct Classical {
    patterns: PatternSet,
    target: usize,
    flips: Vec<usize>,
    max_sweeps: usize,
    normalization: Normalization,
    mode: UpdateMode,
}

pub struct Simulate {
    patterns: PatternSet,
    spec: RunSpec,
    jts: Vec<f64>,
}

pub struct MfSingle {
    jt_min: f64,
    jt_max: f64,
    steps: usize,
    gm: f64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Svg,
}

pub struct Sweep {
    grid: SweepGrid,
    format: Format,
    refine: Option<f64>,
    plot: Option<File>,
    boundaries: Option<File>,
}

pub struct Capacity {
    jts: Vec<f64>,
    gm: f64,
    resolution: f64,
}

fn finite(x: &f64) -> bool {
    x.is_finite()
}

fn positive(x: &f64) -> bool {
    x.is_finite() && *x > 0.0
}

fn non_negative(x: &f64) -> bool {
    x.is_finite() && *x >= 0.0
}

fn create(r: &Resolved, key: &str) -> Result<Option<File>, String> {
    let Some(path) = r.opt::<PathBuf>(key)? else { return Ok(None) };
    File::create(&path)
        .map(Some)
        .map_err(|e| format!("--{key}: cannot write {}: {e}", path.display()))
}

/// Opens the main output, falling back to stdout.
pub fn open_output(r: &Resolved) -> Result<Box<dyn Write>, String> {
    Ok(match create(r, "out")? {
        Some(f) => Box::new(BufWriter::new(f)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_or_draw(r: &Resolved, seed: u64) -> Result<PatternSet, String> {
    match r.opt::<PathBuf>("patterns")? {
        Some(path) => {
            let set = PatternSet::load(&path)
                .map_err(|e| format!("--patterns {}: {e}", path.display()))?;
            for key in ["n", "p"] {
                if r.is_explicit(key) {
                    eprintln!("note: {key} is taken from {}", path.display());
                }
            }
            Ok(set)
        }
        None => {
            let n = r.checked("n", |n: &usize| *n >= 2, "at least 2")?;
            let p = r.checked("p", |p: &usize| *p >= 1, "at least 1")?;
            generate_random_patterns(n, p, seed).map_err(|e| e.to_string())
        }
    }
}

fn jt_grid(r: &Resolved, steps_key: &str, min_ok: fn(&f64) -> bool) -> Result<Vec<f64>, String> {
    let lo = r.checked("jt-min", min_ok, "in range")?;
    let hi: f64 = r.checked("jt-max", finite, "finite")?;
    let steps: usize = r.checked(steps_key, |s: &usize| *s >= 2, "at least 2")?;
    if hi <= lo {
        return Err(format!("--jt-max {hi} must exceed --jt-min {lo}"));
    }
    Ok(linspace(lo, hi, steps))
}

impl Job {
    pub fn prepare(r: &Resolved) -> Result<Job, String> {
        let seed: u64 = r.get("seed")?;
        Ok(match r.subcommand {
            "classical" => {
                let patterns = load_or_draw(r, seed)?;
                let (n, p) = (patterns.n(), patterns.p());
                let target: usize = r.checked("target", |t| (1..=p).contains(t), "a stored pattern")?;
                let flips: usize = r.checked("flips", |f| *f <= n, "at most n")?;
                let job = Classical {
                    target: target - 1,
                    flips: random_flip_indices(n, flips, seed).map_err(|e| e.to_string())?,
                    max_sweeps: r.checked("max-sweeps", |s: &usize| *s >= 1, "at least 1")?,
                    normalization: r.get("normalization")?,
                    mode: r.get("mode")?,
                    patterns,
                };
                Job::Classical(job)
            }
            "simulate" => {
                let j: f64 = r.checked("j", positive, "positive")?;
                let g_over_j: f64 = r.checked("g-over-j", finite, "finite")?;
                let jt_max: f64 = r.checked("jt-max", non_negative, "non-negative")?;
                let steps: usize = r.checked("steps", |s: &usize| *s >= 1, "at least 1")?;
                let max_qubits: usize = r.checked("max-qubits", |m: &usize| *m >= 2, "at least 2")?;
                let normalization = r.get("normalization")?;
                if r.opt::<PathBuf>("patterns")?.is_none() {
                    let n: usize = r.get("n")?;
                    if n > max_qubits {
                        return Err(too_many(n, max_qubits));
                    }
                }
                let patterns = load_or_draw(r, seed)?;
                if patterns.n() > max_qubits {
                    return Err(too_many(patterns.n(), max_qubits));
                }
                eprintln!(
                    "memory: dense propagation for n={} needs about {} bytes",
                    patterns.n(),
                    propagation_memory_bytes(patterns.n())
                );
                let jts = if steps == 1 { vec![0.0] } else { linspace(0.0, jt_max, steps) };
                let spec = RunSpec { j, g: g_over_j * j, normalization, max_qubits };
                Job::Simulate(Simulate { patterns, spec, jts })
            }
            "mf-single" => {
                let jts = jt_grid(r, "steps", non_negative)?;
                let job = MfSingle {
                    jt_min: jts[0],
                    jt_max: jts[jts.len() - 1],
                    steps: jts.len(),
                    gm: r.checked("gm", finite, "finite")?,
                };
                Job::MfSingle(job)
            }
            "mf-solve" => {
                let p = FiniteMFParams::new(r.get("alpha")?, r.get("jt")?, r.get("gm")?)
                    .map_err(|e| e.to_string())?;
                Job::MfSolve(p)
            }
            "sweep" => {
                let grid = SweepGrid {
                    alpha_min: r.get("alpha-min")?,
                    alpha_max: r.get("alpha-max")?,
                    alpha_steps: r.get("alpha-steps")?,
                    jt_min: r.get("jt-min")?,
                    jt_max: r.get("jt-max")?,
                    jt_steps: r.get("jt-steps")?,
                    gm: r.get("gm")?,
                };
                grid.validate().map_err(|e| e.to_string())?;
                let format = match r.get::<String>("format")?.as_str() {
                    "csv" => Format::Csv,
                    "svg" => Format::Svg,
                    other => return Err(format!("--format: unknown format {other:?} (use csv or svg)")),
                };
                let tol: f64 = r.checked("refine-tol", positive, "positive")?;
                let refine = r.get::<bool>("refine")?.then_some(tol);
                let job = Sweep {
                    grid,
                    format,
                    refine,
                    plot: create(r, "plot")?,
                    boundaries: create(r, "boundaries")?,
                };
                Job::Sweep(job)
            }
            "capacity" => {
                let jts = jt_grid(r, "steps", positive)?;
                let job = Capacity {
                    jts,
                    gm: r.checked("gm", finite, "finite")?,
                    resolution: r.checked("resolution", |x: &f64| positive(x) && *x <= 0.5, "in (0, 0.5]")?,
                };
                Job::Capacity(job)
            }
            other => return Err(format!("unknown subcommand {other:?}")),
        })
    }

    pub fn run(self, out: &mut dyn Write) -> qamem::Result<()> {
        match self {
            Job::Classical(j) => run_classical(j, out),
            Job::Simulate(j) => run_simulate(j, out),
            Job::MfSingle(j) => run_mf_single(j, out),
            Job::MfSolve(p) => run_mf_solve(&p, out),
            Job::Sweep(j) => run_sweep_job(j, out),
            Job::Capacity(j) => run_capacity(j, out),
        }
    }
}

fn too_many(n: usize, max: usize) -> String {
    format!(
        "n={n} exceeds --max-qubits {max} (dense propagation would need about {} bytes)",
        propagation_memory_bytes(n)
    )
}

fn run_classical(job: Classical, out: &mut dyn Write) -> qamem::Result<()> {
    let patterns = job.patterns.patterns();
    let weights = hebb_weights(patterns, job.normalization)?;
    let probe = patterns[job.target].with_flips(&job.flips)?;
    let initial = ClassicalState::new(probe.spins().to_vec())?;
    let order: Vec<usize> = (0..initial.len()).collect();
    let mut trace: Vec<Vec<f64>> = Vec::new();
    let result = retrieve_with(&weights, &initial, job.max_sweeps, job.mode, &order, |s| {
        trace.push(patterns.iter().map(|xi| overlap(&s.spins, xi).unwrap_or(f64::NAN)).collect());
    })?;
    let header: Vec<String> = (1..=patterns.len()).map(|mu| format!("overlap_mu_{mu}")).collect();
    writeln!(out, "sweep,{}", header.join(","))?;
    for (sweep, row) in trace.iter().enumerate() {
        let cols: Vec<String> = row.iter().map(|&m| sig(m)).collect();
        writeln!(out, "{sweep},{}", cols.join(","))?;
    }
    eprintln!(
        "converged: {} after {} sweeps, final overlap with target {}",
        result.converged,
        result.sweeps_used,
        sig(overlap(&result.state.spins, &patterns[job.target])?)
    );
    Ok(())
}

fn run_simulate(job: Simulate, out: &mut dyn Write) -> qamem::Result<()> {
    let external = job.patterns.patterns()[0].clone();
    let times: Vec<f64> = job.jts.iter().map(|jt| jt / job.spec.j).collect();
    let trace = retrieval_run(&job.patterns, &external, &job.spec, &times)?;
    writeln!(out, "t,Jt,m_y,m_z,norm,energy")?;
    for k in 0..trace.len() {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            sig(trace.times[k]),
            sig(job.jts[k]),
            sig(trace.m_y[k]),
            sig(trace.m_z[k]),
            sig(trace.norm[k]),
            sig(trace.energy[k])
        )?;
    }
    Ok(())
}

fn run_mf_single(job: MfSingle, out: &mut dyn Write) -> qamem::Result<()> {
    let scan = bifurcation_scan(job.jt_min, job.jt_max, job.steps, job.gm)?;
    writeln!(out, "Jt,gM,branch_id,m_y,m_z,stable")?;
    for point in &scan.points {
        for (id, q) in point.fixed_points.iter().enumerate() {
            writeln!(
                out,
                "{},{},{id},{},{},{}",
                sig(point.jt),
                sig(scan.gm),
                sig(q.m_y),
                sig(q.m_z),
                q.stable
            )?;
        }
    }
    match scan.critical_jt {
        Some(jt) => eprintln!("first nonzero stable branch near Jt = {}", sig(jt)),
        None => eprintln!("no onset of a nonzero stable branch inside the scanned range"),
    }
    Ok(())
}

fn run_mf_solve(p: &FiniteMFParams, out: &mut dyn Write) -> qamem::Result<()> {
    let solution = solve_order_parameters(p)?;
    writeln!(out, "alpha,Jt,gM,m,r,stable,residual_m,residual_r,starts_converged")?;
    for q in solution.canonical() {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            sig(p.alpha),
            sig(p.jt),
            sig(p.gm),
            sig(q.order.m),
            sig(q.order.r),
            q.stable,
            sig(q.residual[0]),
            sig(q.residual[1]),
            q.starts_converged
        )?;
    }
    match classify_solution(&solution) {
        Ok(label) => eprintln!("phase: {}", label.phase.display_name()),
        Err(e) => eprintln!("phase: unresolved ({e})"),
    }
    Ok(())
}

fn run_sweep_job(job: Sweep, out: &mut dyn Write) -> qamem::Result<()> {
    let mut diagram = run_sweep(&job.grid)?;
    if let Some(tol) = job.refine {
        diagram.boundaries = refine_boundaries(&diagram, tol)?;
    }
    match job.format {
        Format::Csv => write_csv(&diagram, &mut *out)?,
        Format::Svg => out.write_all(render_svg(&diagram).as_bytes())?,
    }
    if let Some(f) = job.plot {
        let mut w = BufWriter::new(f);
        w.write_all(render_svg(&diagram).as_bytes())?;
        w.flush()?;
    }
    if let Some(f) = job.boundaries {
        let mut w = BufWriter::new(f);
        write_boundaries_csv(&diagram.boundaries, &mut w)?;
        w.flush()?;
    }
    let phases: Vec<&str> = diagram.phases_present().iter().map(|p| p.as_str()).collect();
    eprintln!(
        "phases: {}; unresolved cells: {}",
        phases.join(" "),
        diagram.unresolved.len()
    );
    Ok(())
}

fn run_capacity(job: Capacity, out: &mut dyn Write) -> qamem::Result<()> {
    let values = job
        .jts
        .par_iter()
        .map(|&jt| capacity_at(jt, job.gm, job.resolution))
        .collect::<qamem::Result<Vec<f64>>>()?;
    writeln!(out, "Jt,gM,alpha_c")?;
    for (jt, a) in job.jts.iter().zip(&values) {
        writeln!(out, "{},{},{}", sig(*jt), sig(job.gm), sig(*a))?;
    }
    if let Some((jt, a)) = job.jts.iter().zip(&values).max_by(|x, y| x.1.total_cmp(y.1)) {
        eprintln!("largest capacity {} at Jt = {}", sig(*a), sig(*jt));
    }
    Ok(())
}
