//! One function per subcommand. Each writes its files and returns the
//! command-specific part of the JSON summary.

use eulimit::gas_model::scaled_density;
use eulimit::godunov::{
    invariant_region_audit, riemann_initial, run, snapshot_csv, snapshot_file_name, AuditReport, SimConfig,
};
use eulimit::limit_harness::{
    csv_number, decavitation_experiment, dissipation_uniformity_sweep, energy_rate_sweep, entropy_rate_sweep,
    one_side_vacuum_experiment, riemann_limit_sweep, DissipationSetup, SampleWindow, SweepReport,
};
use eulimit::riemann::{solve, Middle, RiemannData, RiemannSolution, Side, Wave};
use eulimit::{BoundBudget, ConservedState, Theta};
use serde_json::{json, Value};

use crate::config::{RunConfigFile, StatePair};
use crate::error::CliError;
use crate::output::OutDir;

/// Command-specific summary fields and whether every check passed.
pub struct Outcome {
    pub experiment_id: String,
    pub fields: Value,
    pub pass: bool,
}

fn riemann_data(cfg: &RunConfigFile, theta: Theta) -> Result<RiemannData, CliError> {
    let (l, r) = cfg.riemann_data()?;
    Ok(RiemannData::new(theta, Side::from_primitive(l.0, l.1)?, Side::from_primitive(r.0, r.1)?))
}

fn wave_json(w: &Wave) -> Value {
    match *w {
        Wave::Shock { speed, .. } => json!({"kind": w.label(), "speed": speed}),
        Wave::Rarefaction { head, tail, .. } => json!({"kind": w.label(), "head": head, "tail": tail}),
        Wave::VacuumGap { left_edge, right_edge } => {
            json!({"kind": w.label(), "left_edge": left_edge, "right_edge": right_edge})
        }
    }
}

fn solution_json(s: &RiemannSolution) -> Value {
    let middle = match s.middle {
        Middle::State(p) => json!({"rho": p.rho(), "u": p.u}),
        Middle::Vacuum => json!("vacuum"),
    };
    json!({
        "pattern": s.pattern_label(),
        "region": s.region.map(|r| format!("{r:?}")),
        "waves": s.pattern.iter().map(wave_json).collect::<Vec<_>>(),
        "middle": middle,
    })
}

pub fn riemann_solve(cfg: &RunConfigFile, _out: &mut OutDir) -> Result<Outcome, CliError> {
    let theta = cfg.theta(true)?;
    let s = solve(&riemann_data(cfg, theta)?)?;
    println!("pattern={}", s.pattern_label());
    Ok(Outcome { experiment_id: "riemann_solve".into(), fields: solution_json(&s), pass: true })
}

pub fn riemann_sample(cfg: &RunConfigFile, out: &mut OutDir) -> Result<Outcome, CliError> {
    let theta = cfg.theta(true)?;
    let s = solve(&riemann_data(cfg, theta)?)?;
    let w = window(cfg, (-2.0, 2.0), 400)?;
    let h = (w.x_max - w.x_min) / w.n_samples as f64;
    let mut csv = String::from("xi,rho,u,m\n");
    for j in 0..w.n_samples {
        let xi = (w.x_min + (j as f64 + 0.5) * h) / w.t;
        let c = s.sample(xi);
        let u = c.velocity().map_or(String::new(), csv_number);
        csv.push_str(&format!("{},{},{u},{}\n", csv_number(xi), csv_number(c.rho), csv_number(c.m)));
    }
    out.write("riemann_sample.csv", &csv)?;
    Ok(Outcome { experiment_id: "riemann_sample".into(), fields: solution_json(&s), pass: true })
}

/// Sampling window: `--t`, `--xmin`, `--xmax`, `--n`.
fn window(cfg: &RunConfigFile, x: (f64, f64), n: usize) -> Result<SampleWindow, CliError> {
    let t = cfg.sim.t_end.unwrap_or(1.0);
    let x_min = cfg.grid.x_min.unwrap_or(x.0);
    let x_max = cfg.grid.x_max.unwrap_or(x.1);
    let n = cfg.grid.n_cells.unwrap_or(n);
    if ![t, x_min, x_max].iter().all(|v| v.is_finite()) {
        return Err(CliError::Config("window values must be finite".into()));
    }
    Ok(SampleWindow::new(t, x_min, x_max, n)?)
}

/// Smallest budget `w0` containing both data states.
fn data_budget(theta: Theta, data: &StatePair) -> Result<BoundBudget, CliError> {
    let mut w: f64 = 0.0;
    for &(rho, u) in &[data.0, data.1] {
        if rho > 0.0 {
            w = w.max(u.abs() + scaled_density(theta, rho)?);
        }
    }
    Ok(BoundBudget::new(w.max(1e-12))?)
}

fn audit_json(a: &AuditReport, w0: BoundBudget) -> Value {
    json!({
        "w0": w0.value(),
        "passed": a.passed,
        "checked_levels": a.checked_levels,
        "worst_density_excess": a.worst_density_excess,
        "worst_momentum_excess": a.worst_momentum_excess,
        "first_violation": a.first_violation.map(|(t, i)| json!({"time": t, "cell": i})),
    })
}

const AUDIT_SLACK: f64 = 1e-8;

fn simulation(cfg: &RunConfigFile, history: bool) -> Result<(SimConfig, eulimit::godunov::RunOutput), CliError> {
    let theta = cfg.theta(false)?;
    let data = cfg.riemann_data()?;
    let grid = cfg.grid(200)?;
    let w0 = data_budget(theta, &data)?;
    let mut sim = SimConfig::new(theta, grid, cfg.cfl()?, cfg.t_end()?, w0)?.with_snapshots(cfg.snapshots()?)?;
    if history {
        sim = sim.with_history();
    }
    let l = ConservedState::from_primitive(data.0 .0, data.0 .1)?;
    let r = ConservedState::from_primitive(data.1 .0, data.1 .1)?;
    let init = riemann_initial(&grid, cfg.x0(&grid)?, l, r);
    let out = run(&sim, init)?;
    Ok((sim, out))
}

pub fn simulate(cfg: &RunConfigFile, out: &mut OutDir) -> Result<Outcome, CliError> {
    let (sim, run_out) = simulation(cfg, false)?;
    let mut files = Vec::new();
    for snap in &run_out.snapshots {
        let name = snapshot_file_name(snap.time);
        out.write(&name, &snapshot_csv(sim.theta, &sim.grid, snap))?;
        files.push(name);
    }
    let mut speeds = String::from("t,max_speed\n");
    for (t, s) in &run_out.max_speed {
        speeds.push_str(&format!("{},{}\n", csv_number(*t), csv_number(*s)));
    }
    out.write("max_speed.csv", &speeds)?;
    let audit = invariant_region_audit(&run_out.snapshots, sim.w0, AUDIT_SLACK);
    Ok(Outcome {
        experiment_id: "simulate".into(),
        fields: json!({
            "steps": run_out.max_speed.len(),
            "snapshots": files,
            "audit": audit_json(&audit, sim.w0),
        }),
        pass: audit.passed,
    })
}

pub fn audit(cfg: &RunConfigFile, _out: &mut OutDir) -> Result<Outcome, CliError> {
    let (sim, run_out) = simulation(cfg, true)?;
    let audit = invariant_region_audit(&run_out.history, sim.w0, AUDIT_SLACK);
    if !audit.passed {
        let (t, i) = audit.first_violation.unwrap_or_default();
        return Err(CliError::Failure(anyhow::anyhow!(
            "invariant region violated at t = {t}, cell {i} (w0 = {}, density excess {:e}, momentum excess {:e})",
            sim.w0.value(),
            audit.worst_density_excess,
            audit.worst_momentum_excess
        )));
    }
    Ok(Outcome { experiment_id: "audit".into(), fields: audit_json(&audit, sim.w0), pass: true })
}

fn report_outcome(rep: SweepReport, out: &mut OutDir) -> Result<Outcome, CliError> {
    out.write(&format!("{}.csv", rep.experiment_id), &rep.to_csv())?;
    let fits: Vec<Value> = rep
        .fits
        .iter()
        .map(|f| match &f.fit {
            Some(r) => json!({"metric": f.metric, "slope": r.slope, "intercept": r.intercept, "r2": r.r_squared}),
            None => json!({"metric": f.metric, "flat_zero": true}),
        })
        .collect();
    let checks: Vec<Value> = rep
        .checks
        .iter()
        .map(|c| json!({"name": c.name, "passed": c.passed, "detail": c.detail}))
        .collect();
    for (k, v) in &rep.scalars {
        println!("{k}={v}");
    }
    let scalars: serde_json::Map<String, Value> =
        rep.scalars.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
    Ok(Outcome {
        experiment_id: rep.experiment_id.clone(),
        fields: json!({"fits": fits, "checks": checks, "scalars": scalars}),
        pass: rep.passed(),
    })
}

pub fn sweep_entropy_rate(cfg: &RunConfigFile, out: &mut OutDir) -> Result<Outcome, CliError> {
    report_outcome(entropy_rate_sweep(&cfg.sweep()?)?, out)
}

pub fn sweep_energy_rate(cfg: &RunConfigFile, out: &mut OutDir) -> Result<Outcome, CliError> {
    report_outcome(energy_rate_sweep(&cfg.sweep()?)?, out)
}

pub fn sweep_riemann_limit(cfg: &RunConfigFile, out: &mut OutDir) -> Result<Outcome, CliError> {
    let (l, r) = cfg.riemann_data()?;
    let w = window(cfg, (-2.0, 2.0), 2000)?;
    report_outcome(riemann_limit_sweep(l, r, w, &cfg.sweep()?)?, out)
}

pub fn decavitation(cfg: &RunConfigFile, out: &mut OutDir) -> Result<Outcome, CliError> {
    let (l, r) = cfg.riemann_data()?;
    report_outcome(decavitation_experiment(l, r, &cfg.sweep()?)?, out)
}

pub fn one_side_vacuum(cfg: &RunConfigFile, out: &mut OutDir) -> Result<Outcome, CliError> {
    let r = &cfg.riemann;
    let rho_r = r.rho_r.ok_or_else(|| CliError::Config("missing --rho-r".into()))?.value();
    let u_r = r.u_r.ok_or_else(|| CliError::Config("missing --u-r".into()))?;
    let w = window(cfg, (-3.0, 3.0), 3000)?;
    report_outcome(one_side_vacuum_experiment(rho_r, u_r, w, &cfg.sweep()?)?, out)
}

pub fn dissipation_sweep(cfg: &RunConfigFile, out: &mut OutDir) -> Result<Outcome, CliError> {
    let (left, right) = cfg.riemann_data()?;
    let grid = cfg.grid(200)?;
    let t_end = cfg.t_end()?;
    let setup = DissipationSetup {
        left,
        right,
        x0: cfg.x0(&grid)?,
        grid,
        t_end,
        cfl: cfg.cfl()?,
        set: cfg.compact_set(&grid, t_end)?,
    };
    report_outcome(dissipation_uniformity_sweep(&setup, &cfg.sweep()?)?, out)
}
