//! Drivers for the convergence study, the τ-sweep, the Crouzeix–Raviart
//! comparison and the inf-sup estimate. Each returns its data together with
//! byte-stable CSV text and a gnuplot script that reads that CSV.

use std::fmt;
use std::str::FromStr;

use crate::analysis::{
    compute_errors, eoc, format_error, format_order, infsup_dimensions, infsup_estimate, solution_norms, EocTable,
    ErrorReport, INFSUP_DIMENSION_LIMIT,
};
use crate::condensation::{condense, solve_condensed};
use crate::cr::{assemble_cr, compare_with_hdg, distance_to_hdg, solve_cr_system, CrDiscrepancy};
use crate::error::{Error, Result};
use crate::exact::{ExactSolution, ManufacturedFlow};
use crate::hdg::{assemble_exact, divergence_residual, HdgSolution, SpaceSpec, DEFAULT_QUAD_BOOST, MAX_K};
use crate::mesh::Mesh;
use crate::solver::LuOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Conv,
    TauSweep,
    CrEquiv,
    InfSup,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Conv => "conv",
            Experiment::TauSweep => "tau-sweep",
            Experiment::CrEquiv => "cr-equiv",
            Experiment::InfSup => "infsup",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conv" => Ok(Experiment::Conv),
            "tau-sweep" => Ok(Experiment::TauSweep),
            "cr-equiv" => Ok(Experiment::CrEquiv),
            "infsup" => Ok(Experiment::InfSup),
            other => Err(Error::InvalidArgument(format!(
                "unknown experiment '{other}' (expected conv, tau-sweep, cr-equiv or infsup)"
            ))),
        }
    }
}

/// Stabilization parameters of the τ-sweep.
pub const TAU_GRID: [f64; 6] = [10.0, 20.0, 40.0, 80.0, 160.0, 320.0];
/// Number of trailing grid points used by the slope fits.
pub const SLOPE_WINDOW: usize = 4;
pub const CR_EQUIV_TAUS: [f64; 3] = [10.0, 100.0, 1000.0];

/// Unset fields fall back to per-experiment defaults:
///
/// | experiment | base_n | levels |
/// |------------|--------|--------|
/// | conv       | 4      | 4      |
/// | tau-sweep  | 8      | 1      |
/// | cr-equiv   | 2      | 3      |
/// | infsup     | 2      | 3      |
///
/// τ defaults to 10(k+1)². A base mesh, when given, replaces
/// `structured(base_n)` and later levels come from uniform refinement.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub k: usize,
    pub tau: Option<f64>,
    pub levels: Option<usize>,
    pub base_n: Option<usize>,
    pub quad_boost: usize,
    pub base_mesh: Option<Mesh<f64>>,
}

impl RunConfig {
    pub fn new(experiment: Experiment, k: usize) -> Self {
        Self {
            experiment,
            k,
            tau: None,
            levels: None,
            base_n: None,
            quad_boost: DEFAULT_QUAD_BOOST,
            base_mesh: None,
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau.unwrap_or_else(|| SpaceSpec::<f64>::default_tau(self.k))
    }

    pub fn levels(&self) -> usize {
        self.levels.unwrap_or(match self.experiment {
            Experiment::Conv => 4,
            Experiment::TauSweep => 1,
            Experiment::CrEquiv | Experiment::InfSup => 3,
        })
    }

    pub fn base_n(&self) -> usize {
        self.base_n.unwrap_or(match self.experiment {
            Experiment::Conv => 4,
            Experiment::TauSweep => 8,
            Experiment::CrEquiv | Experiment::InfSup => 2,
        })
    }

    fn spec(&self, tau: f64) -> Result<SpaceSpec<f64>> {
        if self.k > MAX_K {
            return Err(Error::UnsupportedDegree {
                degree: self.k,
                max: MAX_K,
            });
        }
        Ok(SpaceSpec::with_tau(self.k, tau)?.quad_boost(self.quad_boost))
    }

    /// Meshes for levels 0..levels, each with a short label.
    pub fn meshes(&self) -> Result<Vec<(String, Mesh<f64>)>> {
        let levels = self.levels();
        if levels == 0 {
            return Err(Error::InvalidArgument("at least one level is required".into()));
        }
        let mut out = Vec::with_capacity(levels);
        match &self.base_mesh {
            Some(m) => {
                let mut mesh = m.clone();
                for l in 0..levels {
                    if l > 0 {
                        mesh = mesh.uniform_refine()?;
                    }
                    out.push((format!("file_r{l}"), mesh.clone()));
                }
            }
            None => {
                for l in 0..levels {
                    let n = self.base_n() << l;
                    out.push((format!("structured_{n}"), Mesh::structured_unit_square(n)?));
                }
            }
        }
        Ok(out)
    }
}

/// Output of one driver.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub csv: String,
    /// Extra CSV files as (suffix, content), written next to the main one.
    pub extra: Vec<(String, String)>,
    /// gnuplot script; `{csv}` stands for the main CSV file name.
    pub plot_script: String,
    /// Human-readable summary.
    pub summary: String,
}

impl Artifacts {
    pub fn plot_script_for(&self, csv_name: &str) -> String {
        self.plot_script.replace("{csv}", csv_name)
    }
}

fn relative(residual: f64, data: f64) -> f64 {
    if data > 0.0 {
        residual / data
    } else {
        residual
    }
}

fn solve_level<'m>(mesh: &'m Mesh<f64>, spec: &SpaceSpec<f64>) -> Result<(HdgSolution<'m, f64>, f64, f64)> {
    let sys = assemble_exact(mesh, spec, &ManufacturedFlow)?;
    let cs = condense(&sys)?;
    let sol = solve_condensed(&cs)?;
    let res = divergence_residual(&sys, &sol);
    Ok((sol, res, sys.data_norm))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRun {
    pub k: usize,
    pub tau: f64,
    pub labels: Vec<String>,
    pub table: EocTable<f64>,
    /// Norms of the discrete solutions (for the norm-equivalence ratio).
    pub solution_norms: Vec<ErrorReport<f64>>,
    /// (max |b_h(u_h, û_h; q)|, ‖f‖ + ‖P_k g‖) per level.
    pub divergence: Vec<(f64, f64)>,
    pub condensed_dims: Vec<usize>,
}

pub fn run_convergence(cfg: &RunConfig) -> Result<ConvergenceRun> {
    let spec = cfg.spec(cfg.tau())?;
    let meshes = cfg.meshes()?;
    let mut reports = Vec::new();
    let mut norms = Vec::new();
    let mut divergence = Vec::new();
    let mut dims = Vec::new();
    for (_, mesh) in &meshes {
        let (sol, res, data) = solve_level(mesh, &spec)?;
        reports.push(compute_errors(&sol, &ManufacturedFlow, cfg.quad_boost)?);
        norms.push(solution_norms(&sol)?);
        divergence.push((res, data));
        dims.push(crate::condensation::condensed_dimension(
            mesh.num_interior_edges(),
            mesh.num_triangles(),
            cfg.k,
        ));
    }
    Ok(ConvergenceRun {
        k: cfg.k,
        tau: spec.tau,
        labels: meshes.into_iter().map(|(l, _)| l).collect(),
        table: eoc(reports)?,
        solution_norms: norms,
        divergence,
        condensed_dims: dims,
    })
}

impl ConvergenceRun {
    pub fn artifacts(&self) -> Artifacts {
        let mut detail = self.table.to_csv_full(self.k);
        // Append the discrete-solution columns row by row.
        let mut lines: Vec<String> = detail.lines().map(str::to_string).collect();
        lines[0].push_str(",solution_norm_ratio,divergence_residual");
        for (i, line) in lines.iter_mut().skip(1).enumerate() {
            let (res, data) = self.divergence[i];
            line.push_str(&format!(
                ",{},{}",
                format_order(self.solution_norms[i].norm_equivalence_ratio()),
                format_error(relative(res, data))
            ));
        }
        detail = lines.join("\n") + "\n";
        let mut summary = format!("convergence k={} tau={}\n", self.k, self.tau);
        for (i, r) in self.table.reports.iter().enumerate() {
            summary.push_str(&format!(
                "  {:<14} h={:.4} dim={} l2_u={} h1_u={} l2_p={}\n",
                self.labels[i],
                r.h,
                self.condensed_dims[i],
                format_error(r.l2_u),
                format_error(r.h1_u),
                format_error(r.l2_p)
            ));
        }
        Artifacts {
            csv: self.table.to_csv(self.k),
            extra: vec![("detail".into(), detail)],
            plot_script: format!(
                "set datafile separator ','\n\
                 set logscale xy\n\
                 set xlabel 'h'\n\
                 set ylabel 'error'\n\
                 set key left top\n\
                 set title 'k = {k}'\n\
                 plot '{{csv}}' skip 1 using 2:3 with linespoints title 'L2 velocity', \\\n\
                 \x20    '{{csv}}' skip 1 using 2:5 with linespoints title 'H1 velocity', \\\n\
                 \x20    '{{csv}}' skip 1 using 2:7 with linespoints title 'L2 pressure'\n",
                k = self.k
            ),
            summary,
        }
    }
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn tail_slope(x: &[f64], y: &[f64]) -> f64 {
    let s = x.len().saturating_sub(SLOPE_WINDOW);
    loglog_slope(&x[s..], &y[s..])
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauSweepRun {
    pub k: usize,
    pub mesh_label: String,
    pub taus: Vec<f64>,
    /// |(u_h^τ, û_h^τ)|_j.
    pub jumps: Vec<f64>,
    /// |u* − u_h^τ|_{1,h} against the Crouzeix–Raviart solution (k = 0).
    pub cr_h1: Option<Vec<f64>>,
    /// ‖p* − p_h^τ‖ (k = 0).
    pub cr_p: Option<Vec<f64>>,
    /// |u_h^τ − u_h^{2τ}|_{1,h}; absent for the last τ.
    pub cauchy: Vec<Option<f64>>,
    pub jump_slope: f64,
    pub cr_h1_slope: Option<f64>,
    pub cr_p_slope: Option<f64>,
    pub cauchy_slope: f64,
    /// jump(τ_last) / jump(τ_last / 2).
    pub last_jump_ratio: f64,
    /// Largest divergence residual relative to the data norm over all solves.
    pub divergence: f64,
}

/// Broken H¹ seminorm of u₁ − u₂ for two solutions in the same space.
fn h1_distance(a: &HdgSolution<'_, f64>, b: &HdgSolution<'_, f64>) -> Result<f64> {
    let mut d = a.clone();
    for (x, y) in d.u.iter_mut().flatten().zip(b.u.iter().flatten()) {
        *x -= y;
    }
    Ok(solution_norms(&d)?.h1_u)
}

pub fn run_tau_sweep(cfg: &RunConfig) -> Result<TauSweepRun> {
    let cfg1 = RunConfig {
        levels: Some(1),
        ..cfg.clone()
    };
    let (label, mesh) = cfg1.meshes()?.remove(0);
    let exact = ManufacturedFlow;
    let cr = if cfg.k == 0 {
        let f = |x| ExactSolution::<f64>::forcing(&exact, x);
        let g = |x| ExactSolution::<f64>::velocity(&exact, x);
        Some(solve_cr_system(&assemble_cr(&mesh, &f, &g, cfg.quad_boost)?, &LuOptions::default())?)
    } else {
        None
    };
    let mut sols = Vec::new();
    let mut divergence = 0.0f64;
    for &tau in &TAU_GRID {
        let spec = cfg.spec(tau)?;
        let (sol, res, data) = solve_level(&mesh, &spec)?;
        divergence = divergence.max(relative(res, data));
        sols.push(sol);
    }
    let jumps: Vec<f64> = sols.iter().map(|s| solution_norms(s).map(|n| n.jump)).collect::<Result<_>>()?;
    let (cr_h1, cr_p) = match &cr {
        Some(cr) => {
            let d: Vec<_> = sols.iter().map(|s| distance_to_hdg(s, cr)).collect::<Result<_>>()?;
            (
                Some(d.iter().map(|x| x.h1_velocity).collect::<Vec<_>>()),
                Some(d.iter().map(|x| x.l2_pressure).collect::<Vec<_>>()),
            )
        }
        None => (None, None),
    };
    let mut cauchy: Vec<Option<f64>> = sols.windows(2).map(|w| h1_distance(&w[0], &w[1]).map(Some)).collect::<Result<_>>()?;
    cauchy.push(None);

    let taus = TAU_GRID.to_vec();
    let c_tau: Vec<f64> = taus[..taus.len() - 1].to_vec();
    let c_val: Vec<f64> = cauchy.iter().flatten().copied().collect();
    let n = jumps.len();
    Ok(TauSweepRun {
        k: cfg.k,
        mesh_label: label,
        jump_slope: tail_slope(&taus, &jumps),
        cr_h1_slope: cr_h1.as_ref().map(|v| tail_slope(&taus, v)),
        cr_p_slope: cr_p.as_ref().map(|v| tail_slope(&taus, v)),
        cauchy_slope: tail_slope(&c_tau, &c_val),
        last_jump_ratio: jumps[n - 1] / jumps[n - 2],
        divergence,
        taus,
        jumps,
        cr_h1,
        cr_p,
        cauchy,
    })
}

impl TauSweepRun {
    pub fn artifacts(&self) -> Artifacts {
        let opt = |v: Option<f64>| v.map_or_else(|| "--".to_string(), format_error);
        let mut csv = String::from("tau,jump,diff_to_cr_h1,diff_to_cr_p,cauchy_diff\n");
        for i in 0..self.taus.len() {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                self.taus[i],
                format_error(self.jumps[i]),
                opt(self.cr_h1.as_ref().map(|v| v[i])),
                opt(self.cr_p.as_ref().map(|v| v[i])),
                opt(self.cauchy[i]),
            ));
        }
        let slope = |v: Option<f64>| v.map_or_else(|| "--".to_string(), |s| format!("{s:.3}"));
        let lo = self.taus[self.taus.len().saturating_sub(SLOPE_WINDOW)];
        let hi = self.taus[self.taus.len() - 1];
        let mut slopes = String::from("quantity,slope,tau_min,tau_max\n");
        for (name, s) in [
            ("jump", Some(self.jump_slope)),
            ("diff_to_cr_h1", self.cr_h1_slope),
            ("diff_to_cr_p", self.cr_p_slope),
        ] {
            slopes.push_str(&format!("{name},{},{lo},{hi}\n", slope(s)));
        }
        let c_hi = self.taus[self.taus.len() - 2];
        let c_lo = self.taus[(self.taus.len() - 1).saturating_sub(SLOPE_WINDOW)];
        slopes.push_str(&format!("cauchy_diff,{:.3},{c_lo},{c_hi}\n", self.cauchy_slope));
        let summary = format!(
            "tau-sweep k={} on {}: jump slope {:.3}, last-pair jump ratio {:.3}, CR h1 slope {}, CR pressure slope {}, Cauchy slope {:.3}\n",
            self.k,
            self.mesh_label,
            self.jump_slope,
            self.last_jump_ratio,
            slope(self.cr_h1_slope),
            slope(self.cr_p_slope),
            self.cauchy_slope
        );
        let mut plot = String::from(
            "set datafile separator ','\nset logscale xy\nset xlabel 'tau'\nset key right top\n\
             plot '{csv}' skip 1 using 1:2 with linespoints title 'jump seminorm', \\\n\
             \x20    '{csv}' skip 1 using 1:5 with linespoints title 'Cauchy difference'",
        );
        if self.cr_h1.is_some() {
            plot.push_str(", \\\n     '{csv}' skip 1 using 1:3 with linespoints title 'H1 distance to CR'");
            plot.push_str(", \\\n     '{csv}' skip 1 using 1:4 with linespoints title 'pressure distance to CR'");
        }
        plot.push('\n');
        Artifacts {
            csv,
            extra: vec![("slopes".into(), slopes)],
            plot_script: plot,
            summary,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrEquivRun {
    /// (mesh label, τ, discrepancy).
    pub rows: Vec<(String, f64, CrDiscrepancy<f64>)>,
    /// Largest HDG divergence residual relative to the data norm.
    pub divergence: f64,
}

impl CrEquivRun {
    pub fn max_discrepancy(&self) -> f64 {
        self.rows
            .iter()
            .fold(0.0, |m: f64, (_, _, d)| m.max(d.midpoint).max(d.pressure))
    }
}

/// Always k = 0.
pub fn run_cr_equiv(cfg: &RunConfig) -> Result<CrEquivRun> {
    let cfg0 = RunConfig { k: 0, ..cfg.clone() };
    let exact = ManufacturedFlow;
    let f = |x| ExactSolution::<f64>::forcing(&exact, x);
    let g = |x| ExactSolution::<f64>::velocity(&exact, x);
    let mut rows = Vec::new();
    let mut divergence = 0.0f64;
    for (label, mesh) in cfg0.meshes()? {
        let cr = solve_cr_system(&assemble_cr(&mesh, &f, &g, cfg0.quad_boost)?, &LuOptions::default())?;
        for &tau in &CR_EQUIV_TAUS {
            let (sol, res, data) = solve_level(&mesh, &cfg0.spec(tau)?)?;
            divergence = divergence.max(relative(res, data));
            rows.push((label.clone(), tau, compare_with_hdg(&sol, &cr)?));
        }
    }
    Ok(CrEquivRun { rows, divergence })
}

impl CrEquivRun {
    pub fn artifacts(&self) -> Artifacts {
        let mut csv = String::from("mesh,tau,midpoint_disc,pressure_disc\n");
        for (label, tau, d) in &self.rows {
            csv.push_str(&format!("{label},{tau},{},{}\n", format_error(d.midpoint), format_error(d.pressure)));
        }
        Artifacts {
            csv,
            extra: Vec::new(),
            plot_script: "set datafile separator ','\nset logscale y\nset xlabel 'run'\nset ylabel 'discrepancy'\n\
                          plot '{csv}' skip 1 using 0:3 with points title 'midpoint velocity', \\\n\
                          \x20    '{csv}' skip 1 using 0:4 with points title 'pressure'\n"
                .into(),
            summary: format!(
                "cr-equiv: {} runs, largest discrepancy {}\n",
                self.rows.len(),
                format_error(self.max_discrepancy())
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfSupRun {
    pub k: usize,
    /// (mesh label, h, β_h) for the levels within the dimension guard.
    pub rows: Vec<(String, f64, f64)>,
    /// Levels dropped by the guard, with their dimension.
    pub skipped: Vec<(String, usize)>,
}

impl InfSupRun {
    /// min β_h / max β_h over the computed levels.
    pub fn ratio(&self) -> f64 {
        let (lo, hi) = self
            .rows
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r.2), hi.max(r.2)));
        lo / hi
    }

    pub fn flagged(&self) -> bool {
        self.ratio() < 0.8
    }
}

pub fn run_infsup(cfg: &RunConfig) -> Result<InfSupRun> {
    let spec = cfg.spec(cfg.tau())?;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (label, mesh) in cfg.meshes()? {
        let (nv, nq) = infsup_dimensions(&mesh, &spec);
        if nv + nq > INFSUP_DIMENSION_LIMIT {
            skipped.push((label, nv + nq));
            continue;
        }
        rows.push((label, mesh.h, infsup_estimate(&mesh, &spec)?));
    }
    if rows.is_empty() {
        let dimension = skipped.first().map_or(0, |s| s.1);
        return Err(Error::DimensionGuard {
            dimension,
            limit: INFSUP_DIMENSION_LIMIT,
        });
    }
    Ok(InfSupRun { k: cfg.k, rows, skipped })
}

impl InfSupRun {
    pub fn artifacts(&self) -> Artifacts {
        let mut csv = String::from("mesh,h,beta\n");
        for (label, h, b) in &self.rows {
            csv.push_str(&format!("{label},{h:.4},{b:.6}\n"));
        }
        let mut summary = format!("infsup k={}: min/max ratio {:.3}", self.k, self.ratio());
        if self.flagged() {
            summary.push_str(" (below 0.8)");
        }
        summary.push('\n');
        for (label, dim) in &self.skipped {
            summary.push_str(&format!("  skipped {label}: dimension {dim} exceeds {INFSUP_DIMENSION_LIMIT}\n"));
        }
        Artifacts {
            csv,
            extra: Vec::new(),
            plot_script: "set datafile separator ','\nset logscale x\nset xlabel 'h'\nset ylabel 'beta_h'\nset yrange [0:*]\n\
                          plot '{csv}' skip 1 using 2:3 with linespoints title 'inf-sup estimate'\n"
                .into(),
            summary,
        }
    }
}

/// Runs the configured experiment.
pub fn run(cfg: &RunConfig) -> Result<Artifacts> {
    Ok(match cfg.experiment {
        Experiment::Conv => run_convergence(cfg)?.artifacts(),
        Experiment::TauSweep => run_tau_sweep(cfg)?.artifacts(),
        Experiment::CrEquiv => run_cr_equiv(cfg)?.artifacts(),
        Experiment::InfSup => run_infsup(cfg)?.artifacts(),
    })
}
