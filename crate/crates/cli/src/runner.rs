//! The four batch commands. Each returns a [`Bundle`]; nothing touches the
//! filesystem until the caller writes it.

use std::sync::Arc;

use cone_minkowski::cone::ConvexityProbe;
use cone_minkowski::identities::{
    divergence_theorem_check, flow_expansion_check, mink1_boundary_term, mink1_report, mink2_boundary_term,
    mink2_report, pointwise_identity_suite, refinement_study, rigidity_report, sample_nodes, FlowReport,
    PointwiseErrors,
};
use cone_minkowski::quadrature::{ConvergenceTable, OrderEstimate};
use cone_minkowski::spectral::{domain_eigenvalue, spectral_study};
use cone_minkowski::stability::{frame_energy_check, reilly_average_check, stability_report, FrameEnergy};
use cone_minkowski::surface::{build_polar_graph_with_tolerance, ProfileFamily, SurfaceDiagnostics};
use cone_minkowski::{
    ConeGeometry, EigenvalueBound, IdentityReport, Mink2Report, PolarGraph, QuadratureRule, RigidityReport,
    SpectralStudy, StabilityReport, Surface, TangentField,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConeSpec, ExperimentConfig, Suite};
use crate::error::CliError;
use crate::output::{line_plot, Bundle, Cell, Check, Series, Table};

/// Absolute slack allowed when comparing the two boundary integrands, for
/// surfaces where both vanish.
const FORMS_FLOOR: f64 = 1e-14;
const CONVEXITY_DENSITY: usize = 64;
const REILLY_POINTS: usize = 6;

struct Setup {
    cone: Arc<ConeGeometry>,
    graph: Arc<PolarGraph>,
}

fn setup(config: &ExperimentConfig, cone: ConeSpec, eps: Option<f64>) -> Result<Setup, CliError> {
    let cone = Arc::new(ConeGeometry::new(cone.domain()?)?);
    let mut profile = config.radial_profile();
    if let Some(eps) = eps {
        profile = profile.with_amplitude(eps);
    }
    let graph = build_polar_graph_with_tolerance(cone.clone(), profile, config.thresholds.orthogonality)?;
    Ok(Setup { cone, graph: Arc::new(graph) })
}

fn rules(config: &ExperimentConfig, surface: &dyn Surface) -> Result<Vec<QuadratureRule>, CliError> {
    config
        .level_resolutions()
        .into_iter()
        .enumerate()
        .map(|(i, res)| {
            let mut rule = QuadratureRule::new(surface.domain(), res)?;
            rule.level = i as u32;
            Ok(rule)
        })
        .collect()
}

fn is_sector(config: &ExperimentConfig) -> bool {
    matches!(config.radial_profile().family, ProfileFamily::Constant)
}

fn residuals(reports: &[IdentityReport]) -> Vec<f64> {
    reports.iter().map(|r| r.residual).collect()
}

fn finest_residual(reports: &[IdentityReport]) -> f64 {
    reports.last().map_or(f64::NAN, |r| r.residual)
}

/// Value to display for an order estimate.
fn order_value(order: &OrderEstimate) -> f64 {
    match *order {
        OrderEstimate::Rate(p) => p,
        OrderEstimate::AtFloor => f64::INFINITY,
        OrderEstimate::Insufficient => f64::NAN,
    }
}

fn bounded_slope(name: &str, diff: f64, scale: f64, relative: f64, absolute: f64) -> Check {
    if scale.abs() < absolute {
        Check::below(name, diff, absolute).with_detail("absolute")
    } else {
        Check::below(name, diff / scale, relative).with_detail("relative")
    }
}

#[derive(Serialize)]
struct LevelRow {
    level: u32,
    n_phi: usize,
    n_s: usize,
    n_b: usize,
    divergence_f1: Option<f64>,
    divergence_f2: Option<f64>,
    mink1: Option<f64>,
    mink2_lhs: Option<f64>,
    mink2_rhs: Option<f64>,
    mink2_residual: Option<f64>,
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    config: &'a ExperimentConfig,
    surface: SurfaceDiagnostics,
    convexity: Option<ConvexityProbe>,
    levels: &'a [LevelRow],
    divergence_f1: Vec<IdentityReport>,
    divergence_f2: Vec<IdentityReport>,
    mink1: Vec<IdentityReport>,
    mink1_boundary_term: Option<f64>,
    mink2: Vec<Mink2Report>,
    mink2_convergence: Option<ConvergenceTable>,
    mink2_boundary_planar: Option<f64>,
    pointwise: Option<PointwiseErrors>,
    flow: Option<FlowReport>,
    rigidity: Option<RigidityReport>,
    checks: &'a [Check],
}

/// Runs the enabled identity suites across all quadrature levels.
pub fn run_verify(config: &ExperimentConfig) -> Result<Bundle, CliError> {
    config.validate()?;
    let th = &config.thresholds;
    let Setup { cone, graph } = setup(config, config.cone.clone(), None)?;
    let surface: &dyn Surface = graph.as_ref();
    let n = cone.dim();
    let diag = *graph.diagnostics();
    let orthogonal = diag.orthogonal;
    let rules = rules(config, surface)?;
    let finest = rules.last().expect("at least one level");
    let mut checks = Vec::new();

    let (mut divergence_f1, mut divergence_f2) = (Vec::new(), Vec::new());
    if config.has_suite(Suite::Divergence) {
        for (field, out) in [(TangentField::Radial, &mut divergence_f1), (TangentField::Minkowski, &mut divergence_f2)]
        {
            *out = refinement_study(&rules, |r| divergence_theorem_check(surface, r, &field))?;
            let name = format!("divergence_{}", field.name());
            checks.push(Check::below(&name, finest_residual(out), th.divergence));
            let table = out.last().and_then(|r| r.convergence.as_ref()).expect("table on finest level");
            if rules.len() > 1 {
                checks.push(Check::new(
                    &format!("{name}_refinement"),
                    table.monotone(),
                    table.rows.last().map_or(f64::NAN, |r| r.error),
                    f64::NAN,
                    "errors do not grow under refinement".into(),
                ));
            }
        }
    }

    let mut mink1 = Vec::new();
    let mut mink1_boundary = None;
    let wants_mink1 = config.has_suite(Suite::Mink1) || config.has_suite(Suite::Mink1Strict);
    if wants_mink1 {
        mink1 = refinement_study(&rules, |r| mink1_report(surface, r))?;
        let residual = finest_residual(&mink1);
        if config.has_suite(Suite::Mink1) {
            if orthogonal {
                checks.push(Check::below("mink1", residual, th.mink1));
            } else {
                let b = mink1_boundary_term(surface, finest)?;
                mink1_boundary = Some(b);
                checks.push(
                    Check::below("mink1_boundary", residual - b, th.mink1_boundary)
                        .with_detail(format!("residual {residual:.6e} against boundary term {b:.6e}")),
                );
            }
        }
        if config.has_suite(Suite::Mink1Strict) {
            let mut c = Check::below("mink1_strict", residual, th.mink1);
            if !orthogonal {
                c = c.with_detail(format!(
                    "orthogonality residual {:.3e} exceeds tolerance {:.1e}",
                    diag.orthogonality_residual, diag.tolerance
                ));
            }
            checks.push(c);
        }
    }

    let mut mink2 = Vec::new();
    let mut mink2_convergence = None;
    let mut mink2_boundary_planar = None;
    if config.has_suite(Suite::Mink2) {
        if n >= 3 {
            mink2 = rules.iter().map(|r| mink2_report(surface, r)).collect::<Result<Vec<_>, _>>()?;
            let res: Vec<f64> = mink2.iter().map(|r| r.identity.residual).collect();
            let table = ConvergenceTable::from_values(&res, Some(0.0));
            let last = mink2.last().expect("at least one level");
            if orthogonal {
                checks.push(Check::below("mink2", last.identity.residual, th.mink2));
                if rules.len() >= 3 {
                    let detail = match table.order {
                        OrderEstimate::AtFloor => "residuals at the rounding floor",
                        _ => "observed order",
                    };
                    checks.push(Check::new(
                        "mink2_order",
                        table.order.at_least(th.mink2_order),
                        order_value(&table.order),
                        th.mink2_order,
                        detail.into(),
                    ));
                } else {
                    checks.push(Check::skipped("mink2_order", "needs at least 3 levels"));
                }
                let b = &last.boundary;
                let gap = (b.with_nu_t - b.with_nu).abs();
                let scale = b.with_nu_t.abs().max(b.with_nu.abs());
                let regularised = gap / (scale + FORMS_FLOOR / th.boundary_forms);
                checks.push(
                    Check::below("mink2_boundary_forms", regularised, th.boundary_forms)
                        .with_detail(format!("relative gap {:.3e}", b.relative_gap())),
                );
            } else {
                checks.push(Check::skipped("mink2", "surface does not meet the cone orthogonally"));
            }
            mink2_convergence = Some(table);
        } else {
            let term = mink2_boundary_term(surface, finest)?.with_nu_t;
            mink2_boundary_planar = Some(term);
            checks.push(Check::new("mink2_boundary_planar", term == 0.0, term, 0.0, "exact zero".into()));
        }
    }

    let mut pointwise = None;
    if config.has_suite(Suite::Pointwise) {
        let (interior, boundary) = sample_nodes(finest, config.sample_nodes, config.seed);
        let p = pointwise_identity_suite(surface, &interior, &boundary)?;
        checks.push(Check::below("pointwise_div_f1", p.div_f1, th.pointwise));
        checks.push(Check::below("pointwise_div_f2", p.div_f2, th.pointwise));
        if orthogonal {
            checks.push(Check::below("pointwise_boundary_flux", p.boundary_flux, th.pointwise));
        } else {
            checks.push(Check::skipped("pointwise_boundary_flux", "surface does not meet the cone orthogonally"));
        }
        pointwise = Some(p);
    }

    let mut flow = None;
    if config.has_suite(Suite::Flow) {
        if orthogonal {
            let f = flow_expansion_check(graph.clone(), finest, config.t_step)?;
            checks.push(bounded_slope(
                "flow_slope",
                f.slope_lhs - f.slope_rhs,
                f.slope_rhs,
                th.flow_slope_relative,
                th.flow_absolute,
            ));
            checks.push(bounded_slope(
                "flow_claim",
                f.claim_error,
                f.claim_scale,
                th.flow_claim_relative,
                th.flow_absolute,
            ));
            flow = Some(f);
        } else {
            checks.push(Check::skipped("flow", "surface does not meet the cone orthogonally"));
        }
    }

    let mut rigidity = None;
    let mut convexity = None;
    if config.has_suite(Suite::Rigidity) && n >= 3 {
        let r = rigidity_report(surface, finest)?;
        let probe = cone.convexity_probe(CONVEXITY_DENSITY)?;
        checks.push(Check::below("rigidity_chain", r.chain_residual, th.chain));
        if probe.convex && r.starshaped && orthogonal {
            checks.push(Check::at_least("sign_condition", r.sign_condition, -th.sign_condition));
        }
        if is_sector(config) {
            let radius = config.radial_profile().radius;
            checks.push(Check::below("sector_umbilicity", r.umbilicity_defect_pointwise, th.sector_defect));
            checks.push(Check::below("sector_mean_curvature", r.h_bar - 1.0 / radius, th.sector_defect));
        }
        rigidity = Some(r);
        convexity = Some(probe);
    }

    let levels: Vec<LevelRow> = rules
        .iter()
        .enumerate()
        .map(|(i, r)| LevelRow {
            level: r.level,
            n_phi: r.resolution.n_phi,
            n_s: r.resolution.n_s,
            n_b: r.resolution.n_b,
            divergence_f1: divergence_f1.get(i).map(|x: &IdentityReport| x.residual),
            divergence_f2: divergence_f2.get(i).map(|x: &IdentityReport| x.residual),
            mink1: mink1.get(i).map(|x: &IdentityReport| x.residual),
            mink2_lhs: mink2.get(i).map(|x: &Mink2Report| x.identity.lhs),
            mink2_rhs: mink2.get(i).map(|x: &Mink2Report| x.identity.rhs),
            mink2_residual: mink2.get(i).map(|x: &Mink2Report| x.identity.residual),
        })
        .collect();

    let mut table = Table::new(&[
        "level",
        "n_phi",
        "n_s",
        "n_b",
        "divergence_f1",
        "divergence_f2",
        "mink1",
        "mink2_lhs",
        "mink2_rhs",
        "mink2_residual",
    ]);
    for row in &levels {
        table.push(vec![
            row.level.into(),
            row.n_phi.into(),
            row.n_s.into(),
            row.n_b.into(),
            row.divergence_f1.into(),
            row.divergence_f2.into(),
            row.mink1.into(),
            row.mink2_lhs.into(),
            row.mink2_rhs.into(),
            row.mink2_residual.into(),
        ]);
    }

    let mut bundle = Bundle::default();
    bundle.add_json(
        "verify.json",
        &VerifyReport {
            config,
            surface: diag,
            convexity,
            levels: &levels,
            divergence_f1: divergence_f1.clone(),
            divergence_f2: divergence_f2.clone(),
            mink1: mink1.clone(),
            mink1_boundary_term: mink1_boundary,
            mink2: mink2.clone(),
            mink2_convergence,
            mink2_boundary_planar,
            pointwise,
            flow,
            rigidity,
            checks: &checks,
        },
    )?;
    bundle.add_table("verify_levels.csv", &table)?;
    if config.plots {
        let series_of = |name: &'static str, values: Vec<f64>| Series {
            name,
            points: values.into_iter().enumerate().map(|(i, v)| (i as f64, v)).collect(),
        };
        let mut series = Vec::new();
        for (name, values) in [
            ("div F1", residuals(&divergence_f1)),
            ("div F2", residuals(&divergence_f2)),
            ("mink1", residuals(&mink1)),
            ("mink2", mink2.iter().map(|r| r.identity.residual).collect()),
        ] {
            if !values.is_empty() {
                series.push(series_of(name, values));
            }
        }
        bundle
            .add_text("verify_convergence.svg", line_plot("Identity residuals", "level", "|residual|", &series, true));
    }
    bundle.checks = checks;
    Ok(bundle)
}

fn require_surface_mesh(config: &ExperimentConfig) -> Result<(), CliError> {
    if config.cone.dim() != 3 {
        return Err(CliError::Config("spectral and stability runs need a three-dimensional cone".into()));
    }
    if config.mesh_levels.is_empty() {
        return Err(CliError::Config("mesh_levels must not be empty".into()));
    }
    Ok(())
}

fn spectrum_table(study: &SpectralStudy, rings: &[usize]) -> Table {
    let mut t = Table::new(&["rings", "vertices", "h", "lambda1", "residual", "iterations"]);
    for (r, l) in rings.iter().zip(&study.levels) {
        t.push(vec![
            (*r).into(),
            l.vertices.into(),
            l.h.into(),
            l.lambda1.into(),
            l.residual.into(),
            l.iterations.into(),
        ]);
    }
    t
}

fn spectrum_plot(study: &SpectralStudy) -> String {
    let points = study.levels.iter().map(|l| (l.h, l.lambda1 - study.extrapolated)).collect();
    line_plot(
        "First Neumann eigenvalue",
        "mesh size h",
        "|lambda1 - extrapolated|",
        &[Series { name: "lambda1", points }],
        true,
    )
}

fn spectral_checks(study: &SpectralStudy) -> Vec<Check> {
    let mut checks =
        vec![Check::new("lambda1_positive", study.finest().lambda1 > 0.0, study.finest().lambda1, 0.0, String::new())];
    if study.levels.len() >= 3 {
        checks.push(Check::new(
            "lambda1_cauchy",
            study.is_cauchy(),
            study.delta,
            f64::NAN,
            "successive differences shrink".into(),
        ));
    }
    checks
}

#[derive(Serialize)]
struct SpectrumReport<'a> {
    config: &'a ExperimentConfig,
    surface: &'a SpectralStudy,
    domain: &'a SpectralStudy,
    checks: &'a [Check],
}

/// Neumann eigenvalue refinement table for the surface and its spherical
/// domain.
pub fn run_spectrum(config: &ExperimentConfig) -> Result<Bundle, CliError> {
    config.validate()?;
    require_surface_mesh(config)?;
    let Setup { cone, graph } = setup(config, config.cone.clone(), None)?;
    let (study, domain) = rayon::join(
        || spectral_study(graph.as_ref(), &config.mesh_levels),
        || domain_eigenvalue(&cone.domain, &config.mesh_levels),
    );
    let (study, domain) = (study?, domain?);
    let checks = spectral_checks(&study);
    let mut bundle = Bundle::default();
    bundle.add_json("spectrum.json", &SpectrumReport { config, surface: &study, domain: &domain, checks: &checks })?;
    bundle.add_table("spectrum.csv", &spectrum_table(&study, &config.mesh_levels))?;
    if config.plots {
        bundle.add_text("spectrum.svg", spectrum_plot(&study));
    }
    bundle.checks = checks;
    Ok(bundle)
}

#[derive(Serialize)]
struct ReillyCheck {
    w: Vec<f64>,
    error: f64,
}

#[derive(Serialize)]
struct StabilityBundle<'a> {
    config: &'a ExperimentConfig,
    spectrum: &'a SpectralStudy,
    report: &'a StabilityReport,
    reilly: Vec<ReillyCheck>,
    frame_energy: Vec<FrameEnergy>,
    checks: &'a [Check],
}

/// Eigenvalue study, stability report with interval margins, and the
/// averaging and frame-energy identities it rests on.
pub fn run_stability(config: &ExperimentConfig) -> Result<Bundle, CliError> {
    config.validate()?;
    require_surface_mesh(config)?;
    let th = &config.thresholds;
    let Setup { graph, .. } = setup(config, config.cone.clone(), None)?;
    let surface: &dyn Surface = graph.as_ref();
    let rule = QuadratureRule::new(surface.domain(), config.resolution())?;
    let study = spectral_study(surface, &config.mesh_levels)?;
    let report = stability_report(surface, &rule, EigenvalueBound::from(&study))?;

    let mut checks = spectral_checks(&study);
    checks.push(Check::below("stability_chain", report.chain_residual, th.chain));
    checks.push(Check::below("stability_mean_of_f", report.f_mean_defect, th.chain));
    if is_sector(config) {
        checks.push(Check::below("sector_rel_lhs", report.rel_lhs, th.sector_stability));
        checks.push(Check::below("sector_rel_rhs", report.rel_rhs, th.sector_stability));
        checks.push(Check::below("sector_q_form", report.q_form, th.sector_stability));
        checks.push(Check::below("sector_margin", report.margin, th.sector_stability));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let random: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut reilly = Vec::new();
    for (name, w) in [("reilly_e1", vec![1.0, 0.0, 0.0]), ("reilly_random", random)] {
        let error = reilly_average_check(&w, REILLY_POINTS)?;
        checks.push(Check::below(name, error, th.reilly));
        reilly.push(ReillyCheck { w, error });
    }

    let (nodes, _) = sample_nodes(&rule, config.sample_nodes, config.seed);
    let frame_energy = [0.0, report.h_bar, 1.0]
        .into_par_iter()
        .map(|c| frame_energy_check(surface, c, &nodes))
        .collect::<Result<Vec<_>, _>>()?;
    for (name, f) in ["frame_energy_zero", "frame_energy_h_bar", "frame_energy_one"].iter().zip(&frame_energy) {
        checks.push(Check::below(name, f.max_error, th.frame_energy));
    }

    let mut bundle = Bundle::default();
    bundle.add_json(
        "stability.json",
        &StabilityBundle { config, spectrum: &study, report: &report, reilly, frame_energy, checks: &checks },
    )?;
    bundle.add_table("spectrum.csv", &spectrum_table(&study, &config.mesh_levels))?;
    let mut margins = Table::new(&["lambda1", "delta", "margin", "margin_low", "margin_high", "rel_lhs", "rel_rhs"]);
    margins.push(vec![
        report.eigenvalue.lambda1.into(),
        report.eigenvalue.delta.into(),
        report.margin.into(),
        report.margin_interval[0].into(),
        report.margin_interval[1].into(),
        report.rel_lhs.into(),
        report.rel_rhs.into(),
    ]);
    bundle.add_table("stability.csv", &margins)?;
    if config.plots {
        bundle.add_text("spectrum.svg", spectrum_plot(&study));
    }
    bundle.checks = checks;
    Ok(bundle)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Eps,
    Alpha,
    Delta,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Eps => "eps",
            SweepAxis::Alpha => "alpha",
            SweepAxis::Delta => "delta",
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "eps" => Ok(SweepAxis::Eps),
            "alpha" => Ok(SweepAxis::Alpha),
            "delta" => Ok(SweepAxis::Delta),
            other => Err(CliError::Config(format!("unknown sweep axis {other:?}; expected eps, alpha or delta"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub mink2_lhs: f64,
    pub mink2_rhs: f64,
    pub mink2_residual: f64,
    /// `|rhs|`, the size of the boundary correction.
    pub correction: f64,
    pub sign_condition: f64,
    pub umbilicity_integral: f64,
    pub umbilicity_pointwise: f64,
    pub orthogonal: bool,
    pub convex: bool,
}

fn swept_cone(base: &ConeSpec, axis: SweepAxis, value: f64, k: Option<u32>) -> Result<ConeSpec, CliError> {
    Ok(match (axis, base) {
        (SweepAxis::Eps, c) => c.clone(),
        (SweepAxis::Alpha, ConeSpec::Cap { .. }) => ConeSpec::Cap { alpha: value },
        (SweepAxis::Alpha, &ConeSpec::PerturbedCap { delta, k, .. }) => {
            ConeSpec::PerturbedCap { alpha: value, delta, k }
        }
        (SweepAxis::Delta, &ConeSpec::Cap { alpha }) => {
            ConeSpec::PerturbedCap { alpha, delta: value, k: k.unwrap_or(3) }
        }
        (SweepAxis::Delta, &ConeSpec::PerturbedCap { alpha, k: k0, .. }) => {
            ConeSpec::PerturbedCap { alpha, delta: value, k: k.unwrap_or(k0) }
        }
        (_, ConeSpec::Wedge { .. }) => unreachable!("rejected before sweeping"),
    })
}

fn sweep_point(config: &ExperimentConfig, axis: SweepAxis, value: f64) -> Result<SweepRow, CliError> {
    let cone = swept_cone(&config.cone, axis, value, config.sweep.k)?;
    let eps = (axis == SweepAxis::Eps).then_some(value);
    let Setup { cone, graph } = setup(config, cone, eps)?;
    let surface: &dyn Surface = graph.as_ref();
    let rule = QuadratureRule::new(surface.domain(), config.resolution())?;
    let m = mink2_report(surface, &rule)?;
    let r = rigidity_report(surface, &rule)?;
    let probe = cone.convexity_probe(CONVEXITY_DENSITY)?;
    Ok(SweepRow {
        value,
        mink2_lhs: m.identity.lhs,
        mink2_rhs: m.identity.rhs,
        mink2_residual: m.identity.residual,
        correction: m.identity.rhs.abs(),
        sign_condition: r.sign_condition,
        umbilicity_integral: r.umbilicity_defect_integral,
        umbilicity_pointwise: r.umbilicity_defect_pointwise,
        orthogonal: graph.is_orthogonal(),
        convex: probe.convex,
    })
}

#[derive(Serialize)]
struct SweepReport<'a> {
    config: &'a ExperimentConfig,
    axis: SweepAxis,
    rows: &'a [SweepRow],
    checks: &'a [Check],
}

/// One second-identity and rigidity evaluation per grid value along `axis`.
pub fn run_sweep(config: &ExperimentConfig, axis: SweepAxis) -> Result<Bundle, CliError> {
    config.validate()?;
    if config.cone.dim() != 3 {
        return Err(CliError::Config("sweeps need a three-dimensional cone".into()));
    }
    let grid = match axis {
        SweepAxis::Eps => &config.sweep.eps,
        SweepAxis::Alpha => &config.sweep.alpha,
        SweepAxis::Delta => &config.sweep.delta,
    };
    let rows = grid.par_iter().map(|&v| sweep_point(config, axis, v)).collect::<Result<Vec<_>, _>>()?;

    let th = &config.thresholds;
    let checks: Vec<Check> = rows
        .iter()
        .filter(|r| r.orthogonal)
        .map(|r| Check::below(&format!("mink2[{}={}]", axis.name(), r.value), r.mink2_residual, th.mink2))
        .collect();

    let mut table = Table::new(&[
        axis.name(),
        "mink2_lhs",
        "mink2_rhs",
        "mink2_residual",
        "correction",
        "sign_condition",
        "umbilicity_integral",
        "umbilicity_pointwise",
        "orthogonal",
        "convex",
    ]);
    for r in &rows {
        table.push(vec![
            Cell::Num(r.value),
            r.mink2_lhs.into(),
            r.mink2_rhs.into(),
            r.mink2_residual.into(),
            r.correction.into(),
            r.sign_condition.into(),
            r.umbilicity_integral.into(),
            r.umbilicity_pointwise.into(),
            r.orthogonal.into(),
            r.convex.into(),
        ]);
    }

    let mut bundle = Bundle::default();
    bundle.add_json("sweep.json", &SweepReport { config, axis, rows: &rows, checks: &checks })?;
    bundle.add_table("sweep.csv", &table)?;
    if config.plots {
        let points = rows.iter().map(|r| (r.value, r.correction)).collect();
        bundle.add_text(
            "sweep.svg",
            line_plot("Boundary correction", axis.name(), "|rhs|", &[Series { name: "correction", points }], false),
        );
    }
    bundle.checks = checks;
    Ok(bundle)
}
