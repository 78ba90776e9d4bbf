//! Experiment orchestration: validated run configuration, paired
//! viscous/inviscid runs with full diagnostics, viscosity sweeps with a
//! grid-refinement acceptance gate, the corrector scaling study, and
//! deterministic CSV/JSON rendering.
//!
//! Everything here is seed-free and deterministic: identical configurations
//! produce byte-identical artifacts, and sweep rows are independent, so
//! serial and parallel execution agree bitwise.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corrector::{
    self, corrector_norm_table, eval_corrector, key_cancellation_residual,
    key_cancellation_scale, weighted_bound_check, CorrectorFields, CutoffSpec, NormTable,
    TraceSet,
};
use crate::diagnostics::{
    corrected_difference, energy_budget, fit_rate, gronwall_envelope,
    tangential_outflow_crosscheck, vv_error_series, EnergyBudget, GronwallFit, RateFit,
};
use crate::error::{ChannelError, Result};
use crate::euler::{EulerRun, EulerSolver, RunParams};
use crate::fields::make_initial_data;
use crate::forcing::Forcing;
use crate::grid::{BackgroundFlow, ChannelGeometry, ChannelGrid};
use crate::ns::{NsRun, NsSolver};
use crate::transport::{dt_for_cfl, AdvectionMode};

use std::sync::Arc;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub length: f64,
    pub height: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self { length: 1.0, height: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n1: usize,
    /// First wall cell is at most `nu / (layer_safety * U)`.
    pub layer_safety: f64,
    /// Largest wall-normal cell is at most `height / max_spacing_fraction`.
    pub max_spacing_fraction: f64,
    /// Explicit overrides; when absent the mesh is auto-selected per nu.
    pub n2: Option<usize>,
    pub grading_ratio: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n1: 32, layer_safety: 6.0, max_spacing_fraction: 40.0, n2: None, grading_ratio: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct BackgroundConfig {
    pub a: f64,
    pub u: f64,
}

impl Default for BackgroundConfig {
    fn default() -> Self {
        Self { a: 0.0, u: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    pub amplitude: f64,
    pub mode: usize,
    pub collar: f64,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self { amplitude: 0.1, mode: 1, collar: 0.25 }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ForcingChoice {
    Zero,
    RepairedForCond0,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GateConfig {
    pub enabled: bool,
    pub max_rel_change: f64,
}

impl Default for GateConfig {
    fn default() -> Self {
        Self { enabled: true, max_rel_change: 0.10 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub grid: GridConfig,
    pub background: BackgroundConfig,
    pub nu: f64,
    pub nu_list: Vec<f64>,
    pub t_final: f64,
    pub cfl: f64,
    pub dt: Option<f64>,
    pub initial: InitialConfig,
    pub forcing: ForcingChoice,
    /// Target snapshot count over the run (diagnostic cadence).
    pub snapshots: usize,
    /// Stand-in for the short-time smallness condition: the summary flags
    /// whether the outflow trace stayed below this value.
    pub trace_threshold: f64,
    pub gate: GateConfig,
    pub parallel: bool,
    pub output_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: GeometryConfig::default(),
            grid: GridConfig::default(),
            background: BackgroundConfig::default(),
            nu: 1e-2,
            nu_list: vec![2e-2, 1e-2, 5e-3, 2.5e-3],
            t_final: 0.5,
            cfl: 0.45,
            dt: None,
            initial: InitialConfig::default(),
            forcing: ForcingChoice::Zero,
            snapshots: 50,
            trace_threshold: 0.5,
            gate: GateConfig::default(),
            parallel: true,
            output_dir: ".".into(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| ChannelError::InvalidInput(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(ChannelError::InvalidInput(msg));
        if !(self.geometry.length > 0.0 && self.geometry.height > 0.0) {
            return bad("geometry must be positive".into());
        }
        if self.grid.n1 < 4 || self.grid.n1 % 2 != 0 {
            return bad(format!("n1 must be even and >= 4, got {}", self.grid.n1));
        }
        if !(self.grid.layer_safety >= 2.0) {
            return bad("layer_safety must be >= 2 (the resolution rule minimum)".into());
        }
        if !(self.grid.max_spacing_fraction >= 4.0) {
            return bad("max_spacing_fraction must be >= 4".into());
        }
        if !(self.background.u > 0.0) {
            return bad("background u must be strictly positive".into());
        }
        if !(self.nu > 0.0) {
            return bad(format!("nu must be positive, got {}", self.nu));
        }
        if self.nu_list.iter().any(|&n| !(n > 0.0)) {
            return bad("nu_list entries must be positive".into());
        }
        if !(self.t_final > 0.0) {
            return bad("t_final must be positive".into());
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad(format!("cfl must lie in (0, 1], got {}", self.cfl));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return bad("dt must be positive when given".into());
            }
        }
        if self.initial.mode == 0 || self.initial.mode > self.grid.n1 / 3 {
            return bad(format!(
                "initial mode must be in 1..={} for n1 = {}",
                self.grid.n1 / 3,
                self.grid.n1
            ));
        }
        if !(self.initial.collar > 0.0 && self.initial.collar < 0.5 * self.geometry.height) {
            return bad("collar must lie in (0, h/2)".into());
        }
        if self.snapshots < 4 {
            return bad("snapshots must be >= 4".into());
        }
        if !(self.trace_threshold > 0.0) {
            return bad("trace_threshold must be positive".into());
        }
        if !(self.gate.max_rel_change > 0.0) {
            return bad("gate.max_rel_change must be positive".into());
        }
        Ok(())
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Short deterministic hash used in artifact file names.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical_json().as_bytes());
        let digest = hasher.finalize();
        digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }

    pub fn geometry(&self) -> Result<ChannelGeometry> {
        ChannelGeometry::new(self.geometry.length, self.geometry.height)
    }

    pub fn background_flow(&self) -> Result<BackgroundFlow> {
        BackgroundFlow::new(self.background.a, self.background.u)
    }

    /// Mesh for viscosity `nu`: explicit override or the layer-resolution
    /// auto-selection.
    pub fn grid_for(&self, nu: f64) -> Result<Arc<ChannelGrid>> {
        let geom = self.geometry()?;
        if let (Some(n2), Some(r)) = (self.grid.n2, self.grid.grading_ratio) {
            return ChannelGrid::build(geom, self.grid.n1, n2, r);
        }
        let layer = nu / self.background.u;
        ChannelGrid::for_boundary_layer(
            geom,
            self.grid.n1,
            layer,
            self.grid.layer_safety,
            self.geometry.height / self.grid.max_spacing_fraction,
        )
    }
}

/// One diagnostic row of a paired run.
#[derive(Debug, Clone)]
pub struct SeriesRow {
    pub t: f64,
    /// `||u - u_bar||_2`.
    pub err_l2: f64,
    pub w_l2: f64,
    pub z_l2: f64,
    pub budget: Option<EnergyBudget>,
}

/// Everything measured on one paired (viscous, inviscid) run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub nu: f64,
    pub n1: usize,
    pub n2: usize,
    pub grading_ratio: f64,
    pub dt: f64,
    pub rows: Vec<SeriesRow>,
    pub sup_error: f64,
    pub gronwall: GronwallFit,
    pub budget_max_residual_rel: f64,
    pub transport_max_rel: f64,
    pub nl1_max_rel: f64,
    pub split_mismatch_max: f64,
    pub i_mismatch_max_rel: f64,
    pub cancellation_max_rel: f64,
    pub wall_w_max: f64,
    pub tangential_check_max_rel: f64,
    pub trace_max: f64,
    pub trace_below_threshold: bool,
    pub norms_final: NormTable,
}

fn build_forcing(config: &RunConfig, grid: &Arc<ChannelGrid>) -> Result<Forcing> {
    match config.forcing {
        ForcingChoice::Zero => Ok(Forcing::zero()),
        ForcingChoice::RepairedForCond0 => {
            let v0 = make_initial_data(
                grid,
                config.initial.amplitude,
                config.initial.mode,
                config.initial.collar,
            )?;
            let f0 = crate::compat::cond0_repair_forcing(&v0, config.background_flow()?)?;
            Ok(Forcing::steady(f0))
        }
    }
}

fn step_plan(config: &RunConfig, grid: &Arc<ChannelGrid>, bg: BackgroundFlow) -> (f64, usize, usize) {
    // conservative speed margin over the background for the fixed-dt CFL
    let margin = 6.0 * config.initial.amplitude.max(0.01);
    let dt_raw = config.dt.unwrap_or_else(|| dt_for_cfl(grid, bg, margin, config.cfl));
    let stride = ((config.t_final / dt_raw / config.snapshots as f64).ceil() as usize).max(1);
    let n_steps_raw = (config.t_final / dt_raw).ceil() as usize;
    let chunks = n_steps_raw.div_ceil(stride).max(1);
    let n_steps = chunks * stride;
    let dt = config.t_final / n_steps as f64;
    (dt, n_steps, stride)
}

/// Execute the paired runs at one viscosity on one mesh and assemble every
/// diagnostic the acceptance criteria reference.
pub fn execute_run_on_grid(
    config: &RunConfig,
    nu: f64,
    grid: &Arc<ChannelGrid>,
    diagnostics: bool,
) -> Result<RunOutput> {
    let bg = config.background_flow()?;
    let forcing = build_forcing(config, grid)?;
    let (dt, n_steps, stride) = step_plan(config, grid, bg);
    let params = RunParams { dt, n_steps, snapshot_stride: stride };
    let v0 = make_initial_data(
        grid,
        config.initial.amplitude,
        config.initial.mode,
        config.initial.collar,
    )?;

    let euler = EulerSolver::new(grid, bg, forcing.clone(), AdvectionMode::Full)?;
    let euler_run: EulerRun = euler.run(&v0, &params)?;
    let ns = NsSolver::new(grid, nu, bg, forcing, AdvectionMode::Full, dt)?;
    let ns_run: NsRun = ns.run(&v0, &params)?;

    let cutoff = CutoffSpec::standard(grid.geometry.height);
    let n_snaps = euler_run.snapshots.len();
    if ns_run.snapshots.len() != n_snaps {
        return Err(ChannelError::MisalignedSnapshots {
            index: n_snaps.min(ns_run.snapshots.len()),
            t_ns: f64::NAN,
            t_euler: f64::NAN,
        });
    }

    let correctors: Vec<CorrectorFields> = euler_run
        .snapshots
        .iter()
        .map(|s| {
            let traces = TraceSet::from_boundary(grid, s.trace_v1.clone(), s.trace_dv1_dt.clone());
            eval_corrector(grid, &traces, nu, bg, &cutoff)
        })
        .collect::<Result<_>>()?;

    let ns_times: Vec<f64> = ns_run.snapshots.iter().map(|s| s.t).collect();
    let euler_times: Vec<f64> = euler_run.snapshots.iter().map(|s| s.t).collect();
    let ns_fields: Vec<_> = ns_run.snapshots.iter().map(|s| s.v.clone()).collect();
    let euler_fields: Vec<_> = euler_run.snapshots.iter().map(|s| s.v.clone()).collect();
    let series = vv_error_series(&ns_times, &ns_fields, &euler_times, &euler_fields)?;

    let mut rows = Vec::with_capacity(n_snaps);
    let mut w_series = Vec::with_capacity(n_snaps);
    let mut wall_w_max: f64 = 0.0;
    let mut cancellation_max_rel: f64 = 0.0;
    let mut tangential_check_max_rel: f64 = 0.0;
    for k in 0..n_snaps {
        let diff = corrected_difference(&ns_fields[k], &euler_fields[k], &correctors[k].z)?;
        let w_norm = diff.w.l2_norm();
        w_series.push((ns_times[k], w_norm));
        let top = grid.wall_row(crate::grid::Wall::Inflow);
        for i in 0..grid.n1 {
            for j in [0, top] {
                wall_w_max = wall_w_max
                    .max(diff.w.c1[[i, j]].abs())
                    .max(diff.w.c2[[i, j]].abs());
            }
        }
        let cres = key_cancellation_residual(&correctors[k]);
        let cscale = key_cancellation_scale(&correctors[k]);
        if cscale > 0.0 {
            cancellation_max_rel = cancellation_max_rel.max(cres / cscale);
        }
        if bg.a != 0.0 {
            let (lhs, rhs) = tangential_outflow_crosscheck(&correctors[k], &diff.w);
            let scale = lhs.abs().max(rhs.abs());
            if scale > 1e-14 {
                tangential_check_max_rel =
                    tangential_check_max_rel.max((lhs - rhs).abs() / scale);
            }
        }
        rows.push(SeriesRow {
            t: ns_times[k],
            err_l2: series.errors[k],
            w_l2: w_norm,
            z_l2: correctors[k].z.l2_norm(),
            budget: None,
        });
    }

    let mut budget_max_residual_rel: f64 = 0.0;
    let mut transport_max_rel: f64 = 0.0;
    let mut nl1_max_rel: f64 = 0.0;
    let mut split_mismatch_max: f64 = 0.0;
    let mut i_mismatch_max_rel: f64 = 0.0;
    if diagnostics {
        // the first centered window is skipped: the layer-formation start
        // behaves like a fractional power of t, and a difference stencil
        // touching t = 0 cannot estimate d/dt ||w||^2 there at any spacing
        for k in 2..n_snaps.saturating_sub(1) {
            let budget = energy_budget(
                [ns_times[k - 1], ns_times[k], ns_times[k + 1]],
                [&ns_fields[k - 1], &ns_fields[k], &ns_fields[k + 1]],
                [&euler_fields[k - 1], &euler_fields[k], &euler_fields[k + 1]],
                [&correctors[k - 1], &correctors[k], &correctors[k + 1]],
                bg,
                nu,
            )?;
            if budget.dominant > 0.0 {
                budget_max_residual_rel =
                    budget_max_residual_rel.max(budget.residual / budget.dominant);
            }
            let struct_scale = (bg.u + bg.a.abs())
                * budget.w_norm
                * (budget.lhs_visc / nu).sqrt().max(budget.w_norm);
            if struct_scale > 0.0 {
                transport_max_rel =
                    transport_max_rel.max(budget.transport.abs() / struct_scale);
                nl1_max_rel = nl1_max_rel.max(budget.nl1.abs() / struct_scale);
            }
            split_mismatch_max = split_mismatch_max.max(budget.split_mismatch_rel);
            rows[k].budget = Some(budget);
        }
        // combined-term cross-assembly mismatch, relative to the run-level
        // size of the term (the pointwise relative value is meaningless when
        // the corrector is still tiny)
        let iscale_run = rows
            .iter()
            .filter_map(|r| r.budget.as_ref())
            .map(|b| b.i_combined.abs().max(b.i_direct.abs()))
            .fold(0.0f64, f64::max);
        if iscale_run > 0.0 {
            for b in rows.iter().filter_map(|r| r.budget.as_ref()) {
                i_mismatch_max_rel =
                    i_mismatch_max_rel.max((b.i_combined - b.i_direct).abs() / iscale_run);
            }
        }
    }

    let gronwall = gronwall_envelope(&w_series, nu);
    let trace_max = euler_run.snapshots.iter().fold(0.0f64, |m, s| m.max(s.trace_sup));
    let norms_final = corrector_norm_table(&correctors[n_snaps - 1])?;

    Ok(RunOutput {
        nu,
        n1: grid.n1,
        n2: grid.n2(),
        grading_ratio: grid.grading_ratio,
        dt,
        rows,
        sup_error: series.sup,
        gronwall,
        budget_max_residual_rel,
        transport_max_rel,
        nl1_max_rel,
        split_mismatch_max,
        i_mismatch_max_rel,
        cancellation_max_rel,
        wall_w_max,
        tangential_check_max_rel,
        trace_max,
        trace_below_threshold: trace_max <= config.trace_threshold,
        norms_final,
    })
}

pub fn execute_run(config: &RunConfig, nu: f64) -> Result<RunOutput> {
    let grid = config.grid_for(nu)?;
    execute_run_on_grid(config, nu, &grid, true)
}

/// One sweep row: the accepted datum plus the refinement-gate evidence.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub nu: f64,
    pub n1: usize,
    pub n2: usize,
    pub grading_ratio: f64,
    pub dt: f64,
    pub sup_error: f64,
    pub sup_error_refined: Option<f64>,
    pub gate_rel_change: Option<f64>,
    pub gate_pass: bool,
    pub gronwall_c: f64,
    pub gronwall_max_ratio: f64,
    pub budget_max_residual_rel: f64,
    pub trace_max: f64,
    pub trace_below_threshold: bool,
    pub tangential_check_max_rel: f64,
    pub norms_final: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub schema: u32,
    pub version: String,
    pub config_hash: String,
    pub rows: Vec<SweepRow>,
    pub excluded: Vec<(f64, String)>,
    pub rate: RateFit,
    pub gronwall_c_spread: f64,
}

/// Run every viscosity independently (optionally in parallel), gate each
/// datum by self-convergence under mesh doubling, and fit the rate on the
/// accepted rows.
pub fn execute_sweep(config: &RunConfig) -> Result<(SweepSummary, Vec<RunOutput>)> {
    if config.nu_list.len() < 3 {
        return Err(ChannelError::InsufficientData(format!(
            "sweep needs at least 3 viscosities, got {}",
            config.nu_list.len()
        )));
    }
    let mut nus = config.nu_list.clone();
    nus.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let work = |&nu: &f64| -> Result<(RunOutput, Option<RunOutput>)> {
        let grid = config.grid_for(nu)?;
        let base = execute_run_on_grid(config, nu, &grid, true)?;
        let refined = if config.gate.enabled {
            let fine = grid.refined()?;
            Some(execute_run_on_grid(config, nu, &fine, false)?)
        } else {
            None
        };
        Ok((base, refined))
    };
    let results: Vec<Result<(RunOutput, Option<RunOutput>)>> = if config.parallel {
        nus.par_iter().map(work).collect()
    } else {
        nus.iter().map(work).collect()
    };

    let mut rows = Vec::new();
    let mut outputs = Vec::new();
    let mut excluded = Vec::new();
    let mut fit_points = Vec::new();
    for (idx, res) in results.into_iter().enumerate() {
        let nu = nus[idx];
        let (base, refined) = res?;
        let (gate_rel_change, gate_pass, sup_refined) = match &refined {
            Some(r) => {
                let rel = (base.sup_error - r.sup_error).abs() / base.sup_error.max(1e-300);
                (Some(rel), rel <= config.gate.max_rel_change, Some(r.sup_error))
            }
            None => (None, true, None),
        };
        if gate_pass {
            fit_points.push((nu, base.sup_error));
        } else {
            excluded.push((
                nu,
                format!(
                    "refinement gate: sup error moved {:.1}% under mesh doubling",
                    gate_rel_change.unwrap_or(f64::NAN) * 100.0
                ),
            ));
        }
        rows.push(SweepRow {
            nu,
            n1: base.n1,
            n2: base.n2,
            grading_ratio: base.grading_ratio,
            dt: base.dt,
            sup_error: base.sup_error,
            sup_error_refined: sup_refined,
            gate_rel_change,
            gate_pass,
            gronwall_c: base.gronwall.c,
            gronwall_max_ratio: base.gronwall.max_ratio,
            budget_max_residual_rel: base.budget_max_residual_rel,
            trace_max: base.trace_max,
            trace_below_threshold: base.trace_below_threshold,
            tangential_check_max_rel: base.tangential_check_max_rel,
            norms_final: base.norms_final.as_array().to_vec(),
        });
        outputs.push(base);
    }
    let rate = fit_rate(&fit_points)?;
    let cs: Vec<f64> = rows.iter().filter(|r| r.gate_pass).map(|r| r.gronwall_c).collect();
    let cmax = cs.iter().cloned().fold(0.0f64, f64::max);
    let cmin = cs.iter().cloned().fold(f64::INFINITY, f64::min);
    let summary = SweepSummary {
        schema: SCHEMA_VERSION,
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config.hash(),
        rows,
        excluded,
        rate,
        gronwall_c_spread: if cmin > 0.0 { cmax / cmin } else { f64::NAN },
    };
    Ok((summary, outputs))
}

/// Corrector scaling study on analytic traces: norms, slopes, cancellation,
/// and the weighted-bound oracles per viscosity, no solver involved.
#[derive(Debug, Clone, Serialize)]
pub struct StudyRow {
    pub nu: f64,
    pub n2: usize,
    pub norms: Vec<f64>,
    pub cancellation_rel: f64,
    pub winf_over_nu: f64,
    pub w2_over_sqrt_nu: f64,
    pub layer_sup_rel_err: f64,
    pub layer_moment_rel_err: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StudySummary {
    pub schema: u32,
    pub config_hash: String,
    pub labels: Vec<String>,
    pub predicted_slopes: Vec<f64>,
    pub fitted_slopes: Vec<f64>,
    pub rows: Vec<StudyRow>,
    pub winf_spread: f64,
    pub w2_spread: f64,
}

pub fn execute_corrector_study(config: &RunConfig, nus: &[f64]) -> Result<StudySummary> {
    if nus.len() < 3 {
        return Err(ChannelError::InsufficientData(
            "corrector study needs at least 3 viscosities".into(),
        ));
    }
    let geom = config.geometry()?;
    let bg = config.background_flow()?;
    let cutoff = CutoffSpec::standard(geom.height);
    let mut rows = Vec::new();
    for &nu in nus {
        // study meshes are finer than the solver rule so the quadrature
        // oracles resolve the layer maxima to the stated 1%
        let layer = nu / bg.u;
        let r = 1.04;
        let target = layer / 10.0;
        let n2 = ((1.0 + geom.height * (r - 1.0) / target).ln() / r.ln()).ceil() as usize;
        let grid = ChannelGrid::build(geom, config.grid.n1, n2.max(16), r)?;
        let two_pi = 2.0 * std::f64::consts::PI / geom.length;
        let trace =
            ndarray::Array1::from_iter((0..grid.n1).map(|i| (two_pi * grid.x1[i]).sin()));
        let traces = TraceSet::from_boundary(&grid, trace.clone(), trace);
        let c = eval_corrector(&grid, &traces, nu, bg, &cutoff)?;
        let norms = corrector_norm_table(&c)?;
        let cres = key_cancellation_residual(&c);
        let cscale = key_cancellation_scale(&c);
        let trace_sup = 1.0;
        let wb = weighted_bound_check(&c, trace_sup)?;
        let sup = corrector::pure_layer_sup(&grid, nu, bg.u);
        let sup_want = 4.0 * (-2.0f64).exp() * nu / bg.u;
        let m = corrector::layer_second_moment(&grid, nu, bg.u);
        let m_want = nu * nu * nu / (4.0 * bg.u * bg.u * bg.u);
        rows.push(StudyRow {
            nu,
            n2: grid.n2(),
            norms: norms.as_array().to_vec(),
            cancellation_rel: if cscale > 0.0 { cres / cscale } else { 0.0 },
            winf_over_nu: wb.winf / (nu * trace_sup),
            w2_over_sqrt_nu: wb.w2 / (nu.sqrt() * trace_sup),
            layer_sup_rel_err: (sup - sup_want).abs() / sup_want,
            layer_moment_rel_err: (m - m_want).abs() / m_want,
        });
    }
    let mut fitted = Vec::with_capacity(9);
    for idx in 0..9 {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.nu, r.norms[idx])).collect();
        fitted.push(fit_rate(&pts)?.slope);
    }
    let winfs: Vec<f64> = rows.iter().map(|r| r.winf_over_nu).collect();
    let w2s: Vec<f64> = rows.iter().map(|r| r.w2_over_sqrt_nu).collect();
    let spread = |v: &[f64]| -> f64 {
        let mx = v.iter().cloned().fold(0.0f64, f64::max);
        let mn = v.iter().cloned().fold(f64::INFINITY, f64::min);
        mx / mn
    };
    Ok(StudySummary {
        schema: SCHEMA_VERSION,
        config_hash: config.hash(),
        labels: NormTable::LABELS.iter().map(|s| s.to_string()).collect(),
        predicted_slopes: NormTable::PREDICTED_SLOPES.to_vec(),
        fitted_slopes: fitted,
        rows,
        winf_spread: spread(&winfs),
        w2_spread: spread(&w2s),
    })
}

// ---- deterministic rendering ----

fn fmt(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v:.17e}")
    }
}

/// Time-series CSV: one row per snapshot, budget columns empty on the first
/// and last rows where the centered time derivative is unavailable.
pub fn render_series_csv(run: &RunOutput, config_hash: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# schema={SCHEMA_VERSION} kind=series config={config_hash} nu={} n1={} n2={} ratio={} dt={}\n",
        fmt(run.nu),
        run.n1,
        run.n2,
        fmt(run.grading_ratio),
        fmt(run.dt)
    ));
    out.push_str("# units: t nondimensional, norms are channel L2 norms\n");
    out.push_str(
        "t,err_l2,w_l2,z_l2,lhs_dwdt,lhs_visc,visc_cross,visc_euler,visc_bg,transport,stretch,nonlinear,corrector_dt,corrector_adv,corrector_stretch,i_combined,residual\n",
    );
    for row in &run.rows {
        out.push_str(&fmt(row.t));
        for v in [row.err_l2, row.w_l2, row.z_l2] {
            out.push(',');
            out.push_str(&fmt(v));
        }
        match &row.budget {
            Some(b) => {
                for v in [
                    b.lhs_dwdt,
                    b.lhs_visc,
                    b.visc_cross,
                    b.visc_euler,
                    b.visc_bg,
                    b.transport,
                    b.stretch,
                    b.nonlinear,
                    b.corrector_dt,
                    b.corrector_adv,
                    b.corrector_stretch,
                    b.i_combined,
                    b.residual,
                ] {
                    out.push(',');
                    out.push_str(&fmt(v));
                }
            }
            None => out.push_str(&",".repeat(13)),
        }
        out.push('\n');
    }
    out
}

pub fn render_sweep_csv(summary: &SweepSummary) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# schema={SCHEMA_VERSION} kind=sweep config={} version={}\n",
        summary.config_hash, summary.version
    ));
    out.push_str("nu,n1,n2,grading_ratio,dt,sup_error,sup_error_refined,gate_rel_change,gate_pass,gronwall_c,gronwall_max_ratio,budget_max_residual_rel,trace_max,trace_below_threshold,tangential_check_max_rel");
    for label in NormTable::LABELS {
        out.push_str(&format!(",norm_{label}"));
    }
    out.push('\n');
    for r in &summary.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt(r.nu),
            r.n1,
            r.n2,
            fmt(r.grading_ratio),
            fmt(r.dt),
            fmt(r.sup_error),
            r.sup_error_refined.map(fmt).unwrap_or_default(),
            r.gate_rel_change.map(fmt).unwrap_or_default(),
            r.gate_pass,
            fmt(r.gronwall_c),
            fmt(r.gronwall_max_ratio),
            fmt(r.budget_max_residual_rel),
            fmt(r.trace_max),
            r.trace_below_threshold,
            fmt(r.tangential_check_max_rel),
        ));
        for v in &r.norms_final {
            out.push(',');
            out.push_str(&fmt(*v));
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct RunSummaryJson<'a> {
    schema: u32,
    version: &'a str,
    config_hash: String,
    config: &'a RunConfig,
    nu: f64,
    n1: usize,
    n2: usize,
    grading_ratio: f64,
    dt: f64,
    sup_error: f64,
    gronwall_c: f64,
    gronwall_max_ratio: f64,
    budget_max_residual_rel: f64,
    transport_max_rel: f64,
    nl1_max_rel: f64,
    split_mismatch_max: f64,
    i_mismatch_max_rel: f64,
    cancellation_max_rel: f64,
    wall_w_max: f64,
    tangential_check_max_rel: f64,
    trace_max: f64,
    trace_below_threshold: bool,
    corrector_norm_labels: Vec<&'static str>,
    corrector_norms_final: Vec<f64>,
}

pub fn render_run_summary_json(run: &RunOutput, config: &RunConfig) -> String {
    let doc = RunSummaryJson {
        schema: SCHEMA_VERSION,
        version: env!("CARGO_PKG_VERSION"),
        config_hash: config.hash(),
        config,
        nu: run.nu,
        n1: run.n1,
        n2: run.n2,
        grading_ratio: run.grading_ratio,
        dt: run.dt,
        sup_error: run.sup_error,
        gronwall_c: run.gronwall.c,
        gronwall_max_ratio: run.gronwall.max_ratio,
        budget_max_residual_rel: run.budget_max_residual_rel,
        transport_max_rel: run.transport_max_rel,
        nl1_max_rel: run.nl1_max_rel,
        split_mismatch_max: run.split_mismatch_max,
        i_mismatch_max_rel: run.i_mismatch_max_rel,
        cancellation_max_rel: run.cancellation_max_rel,
        wall_w_max: run.wall_w_max,
        tangential_check_max_rel: run.tangential_check_max_rel,
        trace_max: run.trace_max,
        trace_below_threshold: run.trace_below_threshold,
        corrector_norm_labels: NormTable::LABELS.to_vec(),
        corrector_norms_final: run.norms_final.as_array().to_vec(),
    };
    serde_json::to_string_pretty(&doc).expect("summary serializes")
}

#[derive(Serialize)]
struct SweepSummaryJson<'a> {
    #[serde(flatten)]
    summary: &'a SweepSummary,
    config: &'a RunConfig,
}

pub fn render_sweep_summary_json(summary: &SweepSummary, config: &RunConfig) -> String {
    serde_json::to_string_pretty(&SweepSummaryJson { summary, config })
        .expect("sweep summary serializes")
}

pub fn render_study_json(study: &StudySummary) -> String {
    serde_json::to_string_pretty(study).expect("study serializes")
}
