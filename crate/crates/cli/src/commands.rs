//! One function per subcommand. Each writes through [`crate::output::emit`]
//! and returns the computed data for callers that want it.

use std::path::{Path, PathBuf};

use serde::Serialize;
use squeezeline::geometry::{bending_angle, effective_potential, Potential};
use squeezeline::ode::OdeOptions;
use squeezeline::pointint::{
    bound_state, check_boundary_conditions, scattering, unitarity_defect, BoundState, Mat2, Momentum,
    PointInteraction, ScatteringData,
};
use squeezeline::resonance::{
    analyze, resonance_scan, AnalysisOptions, BsOptions, Case, Constants, Detector, NystromRule, ResonanceReport,
    ScanOptions, ScanResult, ShootingOptions,
};
use squeezeline::scaled::{convergence_sweep, expansion_probe, ConvergenceRecord, ProbeGrid, ProbeTable, Target};

use crate::config::{check_eps_list, Format, RunConfig, ScanParameter};
use crate::output::{csv_bytes, emit, json_bytes};
use crate::{CliError, StageExt};

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub theta: Option<f64>,
    pub eps_list: Option<Vec<f64>>,
    pub k_re: Option<f64>,
    pub k_im: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &RunConfig) -> Result<RunConfig, CliError> {
        let mut cfg = cfg.clone();
        if let Some(eps) = &self.eps_list {
            check_eps_list("--eps-list", eps)?;
            cfg.numerics.eps_list = eps.clone();
        }
        if let Some(re) = self.k_re {
            cfg.numerics.k[0] = re;
        }
        if let Some(im) = self.k_im {
            cfg.numerics.k[1] = im;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Explicit vertex parameters given on the command line.
#[derive(Debug, Clone, Copy)]
pub struct Couplings {
    pub c1: f64,
    pub c2: f64,
    pub lambda_hat: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TargetChoice {
    Auto,
    Dirichlet,
    Point,
}

fn analysis_options(cfg: &RunConfig, authority: Detector) -> AnalysisOptions<f64> {
    let n = &cfg.numerics;
    AnalysisOptions {
        shooting: ShootingOptions {
            ode: OdeOptions {
                abs_tol: n.ode_tol,
                rel_tol: n.ode_tol,
                ..OdeOptions::default()
            },
            tol: n.resonance_tol,
        },
        bs: BsOptions {
            tol: n.bs_tol,
            rule: NystromRule::Product,
        },
        authority,
        constants_tol: n.constants_tol,
    }
}

fn lambda1(cfg: &RunConfig) -> f64 {
    cfg.scaling.lambda1()
}

fn momentum(cfg: &RunConfig) -> Result<Momentum<f64>, CliError> {
    Momentum::from_parts(cfg.numerics.k[0], cfg.numerics.k[1]).stage("momentum")
}

/// Potential of the configured profile, rescaled to bending angle `theta`
/// when given.
pub fn potential(cfg: &RunConfig, theta: Option<f64>) -> Result<Potential<f64>, CliError> {
    let profile = match theta {
        Some(t) => cfg.profile_at(ScanParameter::Theta, t).stage("profile")?,
        None => cfg.base_profile()?,
    };
    effective_potential(&profile, cfg.grid_spec()).stage("effective potential")
}

/// Serialized resonance analysis.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantsDoc {
    pub case: Case,
    pub authority: Detector,
    pub defect: f64,
    pub shooting_case: Case,
    pub shooting_defect: f64,
    pub bs_case: Case,
    pub bs_gap: f64,
    pub lambda1: f64,
    pub constants: Option<Constants<f64>>,
    /// Vertex unitary as `[row][col] = [re, im]`.
    pub vertex_unitary: Option<[[[f64; 2]; 2]; 2]>,
    pub report: ResonanceReport<f64>,
}

fn unitary_array(u: &Mat2<f64>) -> [[[f64; 2]; 2]; 2] {
    let mut out = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = [u[i][j].re, u[i][j].im];
        }
    }
    out
}

fn constants_doc(report: ResonanceReport<f64>, lambda1: f64) -> Result<ConstantsDoc, CliError> {
    let unitary = match &report.constants {
        Some(c) => Some(unitary_array(
            &PointInteraction::from_constants(c).stage("vertex unitary")?.vertex_unitary(),
        )),
        None => None,
    };
    Ok(ConstantsDoc {
        case: report.case,
        authority: report.authority,
        defect: report.defect,
        shooting_case: report.shooting_case,
        shooting_defect: report.shooting_defect,
        bs_case: report.bs_case,
        bs_gap: report.bs_gap,
        lambda1,
        constants: report.constants,
        vertex_unitary: unitary,
        report,
    })
}

#[derive(Debug, Serialize)]
struct ConstantsRow {
    case: String,
    defect: f64,
    shooting_defect: f64,
    bs_gap: f64,
    c1: Option<f64>,
    c2: Option<f64>,
    lambda_hat: Option<f64>,
}

pub fn cmd_constants(cfg: &RunConfig, theta: Option<f64>, out: Option<&Path>, format: Format) -> Result<ConstantsDoc, CliError> {
    let pot = potential(cfg, theta)?;
    let report = analyze(&pot, lambda1(cfg), &analysis_options(cfg, Detector::BirmanSchwinger)).stage("resonance")?;
    let doc = constants_doc(report, lambda1(cfg))?;
    match format {
        Format::Json => emit(out, "constants.json", &json_bytes(&doc)?)?,
        Format::Csv => {
            let row = ConstantsRow {
                case: doc.case.to_string(),
                defect: doc.defect,
                shooting_defect: doc.shooting_defect,
                bs_gap: doc.bs_gap,
                c1: doc.constants.map(|c| c.c1),
                c2: doc.constants.map(|c| c.c2),
                lambda_hat: doc.constants.map(|c| c.lambda_hat),
            };
            let header = ["case", "defect", "shooting_defect", "bs_gap", "c1", "c2", "lambda_hat"];
            emit(out, "constants.csv", &csv_bytes(&header, &[row])?)?
        }
    }
    Ok(doc)
}

#[derive(Debug, Serialize)]
struct ScanRow {
    param: f64,
    defect: f64,
    case: String,
    c1: Option<f64>,
    c2: Option<f64>,
    lambda_hat: Option<f64>,
}

const SCAN_HEADER: [&str; 6] = ["param", "defect", "case", "c1", "c2", "lambda_hat"];

fn scan_rows(scan: &ScanResult<f64>, tol: f64) -> Vec<ScanRow> {
    let mut rows: Vec<ScanRow> = scan
        .trace
        .iter()
        .map(|s| ScanRow {
            param: s.param,
            defect: s.defect,
            case: if s.defect.abs() <= tol { Case::Resonant } else { Case::NonResonant }.to_string(),
            c1: None,
            c2: None,
            lambda_hat: None,
        })
        .collect();
    for root in &scan.roots {
        rows.push(ScanRow {
            param: root.param,
            defect: root.report.shooting_defect,
            case: root.report.case.to_string(),
            c1: root.report.constants.map(|c| c.c1),
            c2: root.report.constants.map(|c| c.c2),
            lambda_hat: root.report.constants.map(|c| c.lambda_hat),
        });
    }
    rows.sort_by(|a, b| a.param.total_cmp(&b.param));
    rows
}

fn run_scan(cfg: &RunConfig) -> Result<ScanResult<f64>, CliError> {
    let scan = cfg
        .scan
        .clone()
        .ok_or_else(|| CliError::Config("a [scan] block is required".into()))?;
    let spec = cfg.grid_spec();
    let family = |p: f64| effective_potential(&cfg.profile_at(scan.parameter, p)?, spec);
    let opts = ScanOptions {
        samples: scan.samples,
        analysis: analysis_options(cfg, Detector::Shooting),
        ..ScanOptions::default()
    };
    resonance_scan(family, (scan.range[0], scan.range[1]), lambda1(cfg), &opts).stage("scan")
}

pub fn cmd_scan(cfg: &RunConfig, out: Option<&Path>, format: Format) -> Result<ScanResult<f64>, CliError> {
    let scan = run_scan(cfg)?;
    if scan.roots.is_empty() {
        log::warn!("no sign change of the shooting defect in the scan range");
    }
    match format {
        Format::Csv => emit(out, "scan.csv", &csv_bytes(&SCAN_HEADER, &scan_rows(&scan, cfg.numerics.resonance_tol))?)?,
        Format::Json => emit(out, "scan.json", &json_bytes(&scan)?)?,
    }
    Ok(scan)
}

/// Point interaction from explicit couplings or, failing that, from the
/// analysis of the configured profile (Dirichlet in case I).
fn interaction(
    couplings: Option<Couplings>,
    cfg: Option<&RunConfig>,
    theta: Option<f64>,
) -> Result<PointInteraction<f64>, CliError> {
    if let Some(c) = couplings {
        return PointInteraction::new(c.c1, c.c2, c.lambda_hat).stage("couplings");
    }
    let cfg = cfg.ok_or_else(|| CliError::Config("give --c1, --c2 and --lambda-hat, or --config".into()))?;
    let pot = potential(cfg, theta)?;
    let report = analyze(&pot, lambda1(cfg), &analysis_options(cfg, Detector::BirmanSchwinger)).stage("resonance")?;
    Target::from_report(&report).map(|t| t.interaction()).stage("constants")
}

#[derive(Debug, Serialize)]
struct ScatterRow {
    k: f64,
    t_re: f64,
    t_im: f64,
    rl_re: f64,
    rl_im: f64,
    rr_re: f64,
    rr_im: f64,
    flux: f64,
}

const SCATTER_HEADER: [&str; 8] = ["k", "t_re", "t_im", "rl_re", "rl_im", "rr_re", "rr_im", "flux"];

fn scatter_rows(data: &[ScatteringData<f64>]) -> Vec<ScatterRow> {
    data.iter()
        .map(|s| ScatterRow {
            k: s.k,
            t_re: s.t_left.re,
            t_im: s.t_left.im,
            rl_re: s.r_left.re,
            rl_im: s.r_left.im,
            rr_re: s.r_right.re,
            rr_im: s.r_right.im,
            flux: s.t_left.norm_sqr() + s.r_left.norm_sqr(),
        })
        .collect()
}

fn scatter_table(pi: &PointInteraction<f64>, k_grid: &[f64]) -> Result<Vec<ScatteringData<f64>>, CliError> {
    k_grid.iter().map(|&k| scattering(pi, k).stage("scatter")).collect()
}

pub fn cmd_scatter(
    couplings: Option<Couplings>,
    cfg: Option<&RunConfig>,
    theta: Option<f64>,
    k_grid: Option<Vec<f64>>,
    out: Option<&Path>,
    format: Format,
) -> Result<Vec<ScatteringData<f64>>, CliError> {
    let pi = interaction(couplings, cfg, theta)?;
    let k_grid = k_grid
        .or_else(|| cfg.map(|c| c.numerics.k_grid.clone()))
        .unwrap_or_else(|| crate::config::Numerics::default().k_grid);
    let table = scatter_table(&pi, &k_grid)?;
    match format {
        Format::Csv => emit(out, "scatter.csv", &csv_bytes(&SCATTER_HEADER, &scatter_rows(&table))?)?,
        Format::Json => emit(out, "scatter.json", &json_bytes(&table)?)?,
    }
    Ok(table)
}

pub fn cmd_spectrum(
    couplings: Option<Couplings>,
    cfg: Option<&RunConfig>,
    theta: Option<f64>,
    out: Option<&Path>,
) -> Result<Option<BoundState<f64>>, CliError> {
    let pi = interaction(couplings, cfg, theta)?;
    let b = bound_state(&pi);
    let bytes = match &b {
        Some(b) => json_bytes(b)?,
        None => json_bytes(&"none")?,
    };
    emit(out, "spectrum.json", &bytes)?;
    Ok(b)
}

fn resolve_target(report: &ResonanceReport<f64>, choice: TargetChoice) -> Result<Target<f64>, CliError> {
    match choice {
        TargetChoice::Dirichlet => Ok(Target::Dirichlet),
        TargetChoice::Auto => Target::from_report(report).stage("target"),
        TargetChoice::Point => match Target::from_report(report).stage("target")? {
            Target::Dirichlet => Err(CliError::Config(
                "--target point needs a resonant profile (case II), but the analysis found case I".into(),
            )),
            t => Ok(t),
        },
    }
}

#[derive(Debug, Serialize)]
struct ProbeCsvRow {
    eps: f64,
    f0_re: f64,
    f0_im: f64,
    f1_re: f64,
    f1_im: f64,
    f2_re: f64,
    f2_im: f64,
    f3_re: f64,
    f3_im: f64,
    condition_number: f64,
}

pub fn cmd_probe(cfg: &RunConfig, theta: Option<f64>, out: Option<&Path>, format: Format) -> Result<ProbeTable<f64>, CliError> {
    let pot = potential(cfg, theta)?;
    let report = analyze(&pot, lambda1(cfg), &analysis_options(cfg, Detector::BirmanSchwinger)).stage("resonance")?;
    let target = Target::from_report(&report).stage("target")?;
    let k = momentum(cfg)?;
    let eps = cfg.numerics.probe_eps.clone();
    let table = expansion_probe(&pot, &cfg.scaling, k, &eps, &target, 1e-3).stage("probe")?;
    for e in &table.estimates {
        if e.flagged {
            log::warn!("{}: extrapolation residual {:.3e} exceeds tolerance", e.name, e.residual);
        }
    }
    match format {
        Format::Json => emit(out, "probe.json", &json_bytes(&table)?)?,
        Format::Csv => {
            let rows: Vec<ProbeCsvRow> = table
                .rows
                .iter()
                .map(|r| ProbeCsvRow {
                    eps: r.eps,
                    f0_re: r.f0.re,
                    f0_im: r.f0.im,
                    f1_re: r.f1.re,
                    f1_im: r.f1.im,
                    f2_re: r.f2.re,
                    f2_im: r.f2.im,
                    f3_re: r.f3.re,
                    f3_im: r.f3.im,
                    condition_number: r.condition_number,
                })
                .collect();
            let header = [
                "eps", "f0_re", "f0_im", "f1_re", "f1_im", "f2_re", "f2_im", "f3_re", "f3_im", "condition_number",
            ];
            emit(out, "probe.csv", &csv_bytes(&header, &rows)?)?
        }
    }
    Ok(table)
}

#[derive(Debug, Serialize)]
struct ConvergeRow {
    eps: f64,
    sup_error: f64,
    condition_number: f64,
}

const CONVERGE_HEADER: [&str; 3] = ["eps", "sup_error", "condition_number"];

fn converge_rows(rec: &ConvergenceRecord<f64>) -> Vec<ConvergeRow> {
    rec.eps_list
        .iter()
        .zip(&rec.errors)
        .zip(&rec.condition_numbers)
        .map(|((&eps, &sup_error), &condition_number)| ConvergeRow {
            eps,
            sup_error,
            condition_number,
        })
        .collect()
}

/// JSON summary of a convergence sweep.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergeSummary {
    pub target: squeezeline::scaled::TargetKind,
    pub fitted_rate: Option<f64>,
    pub monotone: bool,
    pub k: [f64; 2],
    pub constants: Option<Constants<f64>>,
    pub record: ConvergenceRecord<f64>,
}

fn run_converge(
    pot: &Potential<f64>,
    cfg: &RunConfig,
    report: &ResonanceReport<f64>,
    choice: TargetChoice,
) -> Result<ConvergeSummary, CliError> {
    let target = resolve_target(report, choice)?;
    let k = momentum(cfg)?;
    let probes = ProbeGrid {
        points: cfg.numerics.probe_grid.clone(),
    };
    let rec = convergence_sweep(pot, &cfg.scaling, k, &cfg.numerics.eps_list, &probes, &target).stage("converge")?;
    Ok(ConvergeSummary {
        target: rec.target,
        fitted_rate: rec.fitted_rate,
        monotone: rec.is_monotone(),
        k: cfg.numerics.k,
        constants: match target {
            Target::Point(_) => report.constants,
            Target::Dirichlet => None,
        },
        record: rec,
    })
}

pub fn cmd_converge(
    cfg: &RunConfig,
    theta: Option<f64>,
    choice: TargetChoice,
    out: Option<&Path>,
    format: Format,
) -> Result<ConvergeSummary, CliError> {
    let pot = potential(cfg, theta)?;
    let report = analyze(&pot, lambda1(cfg), &analysis_options(cfg, Detector::BirmanSchwinger)).stage("resonance")?;
    let summary = run_converge(&pot, cfg, &report, choice)?;
    let csv = csv_bytes(&CONVERGE_HEADER, &converge_rows(&summary.record))?;
    let json = json_bytes(&summary)?;
    match (out, format) {
        (Some(dir), _) => {
            emit(Some(dir), "converge.csv", &csv)?;
            emit(Some(dir), "converge.json", &json)?;
        }
        (None, Format::Csv) => emit(None, "", &csv)?,
        (None, Format::Json) => emit(None, "", &json)?,
    }
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

fn check(name: &'static str, value: f64, tolerance: f64) -> Check {
    Check {
        name,
        passed: value <= tolerance,
        value,
        tolerance,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Selection {
    pub parameter: Option<ScanParameter>,
    pub value: Option<f64>,
    pub from_scan: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub config: RunConfig,
    pub selection: Selection,
    pub resonance: ConstantsDoc,
    pub bound_state: Option<BoundState<f64>>,
    pub convergence: ConvergeSummary,
    pub checks: Vec<Check>,
    pub passed: bool,
}

fn output_dir(cfg: &RunConfig, out: Option<&Path>) -> Result<PathBuf, CliError> {
    out.map(Path::to_path_buf)
        .or_else(|| cfg.output.dir.clone())
        .ok_or_else(|| CliError::Config("pipeline needs --out or output.dir".into()))
}

/// scan → constants → spectrum/scatter → converge, all written to one
/// directory. Returns the report; failed checks surface as
/// [`CliError::ChecksFailed`] after every file is written.
pub fn cmd_pipeline(cfg: &RunConfig, theta: Option<f64>, out: Option<&Path>) -> Result<PipelineReport, CliError> {
    let dir = output_dir(cfg, out)?;
    crate::output::ensure_dir(&dir)?;
    let opts = analysis_options(cfg, Detector::BirmanSchwinger);

    // scan stage: pick the root closest to the configured parameter value
    let base = cfg.base_profile()?;
    let (pot, selection, authority) = match &cfg.scan {
        Some(block) => {
            let scan = run_scan(cfg)?;
            emit(Some(&dir), "scan.csv", &csv_bytes(&SCAN_HEADER, &scan_rows(&scan, cfg.numerics.resonance_tol))?)?;
            let current = match (block.parameter, theta) {
                (ScanParameter::Theta, Some(t)) => t,
                (ScanParameter::Theta, None) => bending_angle(&base),
                (ScanParameter::Amplitude, _) => 1.0,
            };
            let nearest = scan
                .roots
                .iter()
                .min_by(|a, b| (a.param - current).abs().total_cmp(&(b.param - current).abs()));
            match nearest {
                Some(root) => {
                    let profile = cfg.profile_at(block.parameter, root.param).stage("scan")?;
                    let pot = effective_potential(&profile, cfg.grid_spec()).stage("scan")?;
                    let sel = Selection {
                        parameter: Some(block.parameter),
                        value: Some(root.param),
                        from_scan: true,
                    };
                    (pot, sel, Detector::Shooting)
                }
                None => {
                    let sel = Selection {
                        parameter: Some(block.parameter),
                        value: Some(current),
                        from_scan: false,
                    };
                    (potential(cfg, theta)?, sel, Detector::BirmanSchwinger)
                }
            }
        }
        None => {
            let pot = potential(cfg, theta)?;
            let report = analyze(&pot, lambda1(cfg), &opts).stage("constants")?;
            let row = ScanRow {
                param: theta.unwrap_or_else(|| bending_angle(&base)),
                defect: report.shooting_defect,
                case: report.case.to_string(),
                c1: report.constants.map(|c| c.c1),
                c2: report.constants.map(|c| c.c2),
                lambda_hat: report.constants.map(|c| c.lambda_hat),
            };
            emit(Some(&dir), "scan.csv", &csv_bytes(&SCAN_HEADER, &[row])?)?;
            let sel = Selection {
                parameter: None,
                value: theta,
                from_scan: false,
            };
            (pot, sel, Detector::BirmanSchwinger)
        }
    };

    let report = analyze(&pot, lambda1(cfg), &AnalysisOptions { authority, ..opts }).stage("constants")?;
    let target = Target::from_report(&report).stage("constants")?;
    let pi = target.interaction();
    let mut checks = vec![check(
        "detectors_agree",
        if report.methods_agree() { 0.0 } else { 1.0 },
        0.0,
    )];
    if let Some(m) = report.phi_mismatch {
        checks.push(check("u_psi_plus_phi0", m, cfg.numerics.constants_tol));
    }

    let table = scatter_table(&pi, &cfg.numerics.k_grid)?;
    emit(Some(&dir), "scatter.csv", &csv_bytes(&SCATTER_HEADER, &scatter_rows(&table))?)?;
    let s_defect = table
        .iter()
        .map(|s| unitarity_defect(&s.matrix()))
        .fold(0.0, f64::max);
    checks.push(check("s_matrix_unitary", s_defect, 1e-12));

    let bound = if pi.is_dirichlet() { None } else { bound_state(&pi) };
    if let Some(b) = &bound {
        checks.push(check(
            "bound_state_boundary_conditions",
            check_boundary_conditions(&pi, &b.boundary_data()).max(),
            1e-10,
        ));
    }

    let resonance = constants_doc(report.clone(), lambda1(cfg))?;
    let convergence = run_converge(&pot, cfg, &report, TargetChoice::Auto)?;
    emit(
        Some(&dir),
        "converge.csv",
        &csv_bytes(&CONVERGE_HEADER, &converge_rows(&convergence.record))?,
    )?;
    checks.push(check(
        "convergence_monotone",
        if convergence.monotone { 0.0 } else { 1.0 },
        0.0,
    ));
    if let Some(rate) = convergence.fitted_rate {
        checks.push(Check {
            name: "convergence_rate_positive",
            passed: rate > 0.0,
            value: rate,
            tolerance: 0.0,
        });
    }

    let passed = checks.iter().all(|c| c.passed);
    let doc = PipelineReport {
        config: cfg.clone(),
        selection,
        resonance,
        bound_state: bound,
        convergence,
        checks,
        passed,
    };
    emit(Some(&dir), "report.json", &json_bytes(&doc)?)?;
    if !passed {
        let names: Vec<&str> = doc.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        return Err(CliError::ChecksFailed(names.join(", ")));
    }
    Ok(doc)
}
