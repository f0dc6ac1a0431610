use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use latent_battleship::board::LayoutSet;
use latent_battleship::defenders::{shift_metrics, DefenderPolytope, ExplicitDistribution};
use latent_battleship::evaluation::{csv_field, evaluate, marginal_insufficiency_demo, robustness_gaps, EvalReport};
use latent_battleship::game::{any_dominated, double_oracle_solve};
use latent_battleship::selfplay::{
    run_stage1, run_stage2, write_generation_csv, DefenderSpace, ReferenceAttacker, ReferenceDefender,
};

use crate::config::{DefenderSpaceKind, ExperimentConfig, PolytopeKind};
use crate::error::CliError;
use crate::manifest::OutputEntry;

/// Subcommands that produce artifacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Eval,
    Gaps,
    SolveMinimax,
    ShiftMetrics,
    RunStage1,
    RunStage2,
    DemoMarginal,
    ParetoSweep,
}

impl Task {
    pub const ALL: [Task; 8] = [
        Task::Eval,
        Task::Gaps,
        Task::SolveMinimax,
        Task::ShiftMetrics,
        Task::RunStage1,
        Task::RunStage2,
        Task::DemoMarginal,
        Task::ParetoSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Eval => "eval",
            Task::Gaps => "gaps",
            Task::SolveMinimax => "solve-minimax",
            Task::ShiftMetrics => "shift-metrics",
            Task::RunStage1 => "run-stage1",
            Task::RunStage2 => "run-stage2",
            Task::DemoMarginal => "demo-marginal",
            Task::ParetoSweep => "pareto-sweep",
        }
    }

    pub fn from_name(name: &str) -> Option<Task> {
        Task::ALL.into_iter().find(|t| t.name() == name)
    }
}

/// Files written and headline numbers of one run.
#[derive(Debug, Default)]
pub struct Outcome {
    pub outputs: BTreeMap<String, OutputEntry>,
    pub results: toml::Table,
    /// Lines echoed to stdout.
    pub summary: Vec<String>,
}

impl Outcome {
    fn emit<F>(&mut self, dir: &Path, name: &str, format: &str, body: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<(), CliError>,
    {
        let path = dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        body(&mut w)?;
        w.flush().map_err(|e| CliError::io(&path, e))?;
        let key = name.split('.').next().unwrap_or(name).to_string();
        self.outputs.insert(
            key,
            OutputEntry {
                file: name.to_string(),
                format: format.to_string(),
            },
        );
        Ok(())
    }

    fn result(&mut self, key: &str, value: impl Into<toml::Value>) {
        self.results.insert(key.to_string(), value.into());
    }
}

fn io_err(dir: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::io(dir, e)
}

pub fn run(task: Task, cfg: &ExperimentConfig, dir: &Path) -> Result<Outcome, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    match task {
        Task::Eval => eval(cfg, dir),
        Task::Gaps => gaps(cfg, dir),
        Task::SolveMinimax => solve_minimax(cfg, dir),
        Task::ShiftMetrics => shift(cfg, dir),
        Task::RunStage1 => stage1(cfg, dir),
        Task::RunStage2 => stage2(cfg, dir),
        Task::DemoMarginal => demo_marginal(dir),
        Task::ParetoSweep => pareto(cfg, dir),
    }
}

fn eval(cfg: &ExperimentConfig, dir: &Path) -> Result<Outcome, CliError> {
    let board = cfg.board()?;
    let attacker = cfg.attacker();
    let mut reports = Vec::new();
    for r in &cfg.defenders.evaluate {
        let dist = cfg.distribution(&board, r)?;
        reports.push((r.label(), evaluate(&attacker, &dist, cfg.eval.episodes, cfg.seed)?));
    }
    let mut out = Outcome::default();
    out.emit(dir, "eval.csv", "eval-csv/1", |w| {
        writeln!(w, "{}", EvalReport::CSV_HEADER).map_err(io_err(dir))?;
        for (_, rep) in &reports {
            writeln!(w, "{}", rep.csv_row()).map_err(io_err(dir))?;
        }
        Ok(())
    })?;
    for (i, (tag, rep)) in reports.iter().enumerate() {
        let mut key = format!("mean_{tag}");
        if out.results.contains_key(&key) {
            key = format!("{key}_{i}");
        }
        out.result(&key, rep.mean);
        out.summary.push(format!(
            "{tag}: mean {:.3} p95 {:.1} cvar10 {:.2}",
            rep.mean, rep.p95, rep.cvar10
        ));
    }
    Ok(out)
}

fn gaps(cfg: &ExperimentConfig, dir: &Path) -> Result<Outcome, CliError> {
    let board = cfg.board()?;
    let attacker = cfg.attacker();
    let nominal = evaluate(
        &attacker,
        &cfg.distribution(&board, &cfg.defenders.nominal)?,
        cfg.eval.episodes,
        cfg.seed,
    )?;
    let stress = evaluate(
        &attacker,
        &cfg.distribution(&board, &cfg.defenders.stress)?,
        cfg.eval.episodes,
        cfg.seed,
    )?;
    let gap = robustness_gaps(&nominal, &stress)?;
    let mut out = Outcome::default();
    out.emit(dir, "gaps.csv", "gaps-csv/1", |w| {
        writeln!(
            w,
            "policy,nominal,stress,n,nominal_mean,stress_mean,mean_gap,p95_gap,cvar_gap"
        )
        .map_err(io_err(dir))?;
        writeln!(
            w,
            "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6}",
            csv_field(&nominal.policy_id),
            csv_field(&nominal.distribution_id),
            csv_field(&stress.distribution_id),
            nominal.n,
            nominal.mean,
            stress.mean,
            gap.mean_gap,
            gap.p95_gap,
            gap.cvar_gap
        )
        .map_err(io_err(dir))
    })?;
    out.result("mean_gap", gap.mean_gap);
    out.result("p95_gap", gap.p95_gap);
    out.result("cvar_gap", gap.cvar_gap);
    out.summary.push(format!(
        "mean gap {:.3}, p95 gap {:.1}, cvar10 gap {:.2}",
        gap.mean_gap, gap.p95_gap, gap.cvar_gap
    ));
    Ok(out)
}

fn universe(cfg: &ExperimentConfig) -> Result<Arc<LayoutSet>, CliError> {
    Ok(LayoutSet::enumerate(&cfg.board()?)?)
}

fn polytope(cfg: &ExperimentConfig, universe: &Arc<LayoutSet>) -> Result<DefenderPolytope, CliError> {
    Ok(match cfg.polytope.kind {
        PolytopeKind::Simplex => DefenderPolytope::simplex(universe),
        PolytopeKind::Families => DefenderPolytope::new(
            cfg.polytope
                .families
                .iter()
                .map(|r| cfg.explicit(universe, r))
                .collect::<Result<Vec<ExplicitDistribution>, _>>()?,
        )?,
    })
}

fn solve_minimax(cfg: &ExperimentConfig, dir: &Path) -> Result<Outcome, CliError> {
    let universe = universe(cfg)?;
    let solution = double_oracle_solve(&polytope(cfg, &universe)?, cfg.solver)?;
    let mut out = Outcome::default();
    out.emit(dir, "minimax_summary.txt", "minimax-summary/1", |w| {
        Ok(solution.write_summary(w)?)
    })?;
    out.emit(dir, "minimax_trace.csv", "minimax-trace-csv/1", |w| {
        Ok(solution.write_trace_csv(w)?)
    })?;
    out.emit(dir, "minimax_defender.csv", "distribution-csv/1", |w| {
        Ok(solution.rho.write_csv(w)?)
    })?;
    out.emit(dir, "minimax_matrix.csv", "loss-matrix-csv/1", |w| {
        Ok(solution.matrix.write_csv(w)?)
    })?;
    out.result("value", solution.value);
    out.result("duality_gap", solution.duality_gap);
    out.result("iterations", solution.iterations as i64);
    out.summary.push(format!(
        "value = {:.12} (gap {:.3e}, {} iterations)",
        solution.value, solution.duality_gap, solution.iterations
    ));
    Ok(out)
}

fn shift(cfg: &ExperimentConfig, dir: &Path) -> Result<Outcome, CliError> {
    let board = cfg.board()?;
    let mut rows = Vec::new();
    for r in &cfg.shift.families {
        let dist = cfg.distribution(&board, r)?;
        rows.push((dist.to_string(), shift_metrics(&dist, cfg.shift.samples, cfg.seed)?));
    }
    let mut out = Outcome::default();
    out.emit(dir, "shift_metrics.csv", "shift-metrics-csv/1", |w| {
        writeln!(
            w,
            "family,centroid_dist_mean,cluster_score,marginal_entropy,quadrant_mass_std,sample_count"
        )
        .map_err(io_err(dir))?;
        for (name, m) in &rows {
            writeln!(
                w,
                "{},{:.6},{:.6},{:.6},{:.6},{}",
                csv_field(name),
                m.centroid_dist_mean,
                m.cluster_score,
                m.marginal_entropy,
                m.quadrant_mass_std,
                m.sample_count
            )
            .map_err(io_err(dir))?;
        }
        Ok(())
    })?;
    for (name, m) in &rows {
        out.summary.push(format!(
            "{name}: centroid {:.3} cluster {:.3} entropy {:.4} quadrant std {:.4}",
            m.centroid_dist_mean, m.cluster_score, m.marginal_entropy, m.quadrant_mass_std
        ));
    }
    Ok(out)
}

fn stage1(cfg: &ExperimentConfig, dir: &Path) -> Result<Outcome, CliError> {
    let board = cfg.board()?;
    let nominal = cfg.distribution(&board, &cfg.defenders.nominal)?;
    let stress = cfg.distribution(&board, &cfg.defenders.stress)?;
    let trainer = ReferenceAttacker(cfg.attacker_trainer);
    let outcome = run_stage1(&cfg.stage1, &trainer, cfg.attacker(), &nominal, &stress)?;
    let mut out = Outcome::default();
    out.emit(dir, "stage1.csv", "stage1-csv/1", |w| Ok(outcome.write_trace_csv(w)?))?;
    out.result("final_policy", outcome.policy.id());
    out.result("trainer", latent_battleship::selfplay::AttackerTrainer::id(&trainer));
    if let Some(last) = outcome.trace.last() {
        out.result("final_gap", last.stress.mean - last.nominal.mean);
        out.summary.push(format!(
            "generation {}: nominal {:.3} stress {:.3} gap {:.3}",
            last.generation,
            last.nominal.mean,
            last.stress.mean,
            last.stress.mean - last.nominal.mean
        ));
    }
    Ok(out)
}

fn stage2(cfg: &ExperimentConfig, dir: &Path) -> Result<Outcome, CliError> {
    let board = cfg.board()?;
    let nominal = cfg.distribution(&board, &cfg.defenders.nominal)?;
    let stress = cfg.distribution(&board, &cfg.defenders.stress)?;
    let space = match cfg.defender_trainer.space {
        DefenderSpaceKind::Polytope => DefenderSpace::Polytope(polytope(cfg, &universe(cfg)?)?),
        DefenderSpaceKind::Family => DefenderSpace::Family {
            board: Arc::clone(&board),
            bounds: cfg.defender_trainer.family.clone(),
        },
    };
    let attacker_trainer = ReferenceAttacker(cfg.attacker_trainer);
    let defender_trainer = ReferenceDefender(space);
    let outcome = run_stage2(
        &cfg.stage2,
        &attacker_trainer,
        &defender_trainer,
        cfg.attacker(),
        &nominal,
        &stress,
    )?;
    let mut out = Outcome::default();
    out.emit(dir, "stage2.csv", "generation-log-csv/1", |w| {
        Ok(write_generation_csv(&outcome.logs, w)?)
    })?;
    let certified = outcome
        .logs
        .iter()
        .filter(|l| l.defender_certificate.sign_certified)
        .count();
    out.result("generations", outcome.logs.len() as i64);
    out.result("defender_certified", certified as i64);
    out.result(
        "residual_certified",
        outcome
            .logs
            .iter()
            .filter(|l| l.residual_certificate.sign_certified)
            .count() as i64,
    );
    for l in &outcome.logs {
        out.summary.push(format!(
            "k={}: defender_adversarial {:.3} (radius {:.2}), weighted_residual {:.3} (radius {:.2})",
            l.k,
            l.defender_adversarial,
            l.defender_certificate.radius,
            l.weighted_residual,
            l.residual_certificate.radius
        ));
    }
    Ok(out)
}

fn demo_marginal(dir: &Path) -> Result<Outcome, CliError> {
    let demo = marginal_insufficiency_demo();
    let mut out = Outcome::default();
    out.emit(dir, "demo_marginal.csv", "demo-marginal-csv/1", |w| {
        writeln!(w, "distribution,loss,marginal_z1,marginal_z2").map_err(io_err(dir))?;
        writeln!(
            w,
            "rho_plus,{:.6},{:.6},{:.6}",
            demo.loss_plus, demo.marginals_plus.0, demo.marginals_plus.1
        )
        .map_err(io_err(dir))?;
        writeln!(
            w,
            "rho_minus,{:.6},{:.6},{:.6}",
            demo.loss_minus, demo.marginals_minus.0, demo.marginals_minus.1
        )
        .map_err(io_err(dir))
    })?;
    out.result("loss_plus", demo.loss_plus);
    out.result("loss_minus", demo.loss_minus);
    out.summary.push(format!(
        "rho+: loss {} marginals ({}, {})",
        demo.loss_plus, demo.marginals_plus.0, demo.marginals_plus.1
    ));
    out.summary.push(format!(
        "rho-: loss {} marginals ({}, {})",
        demo.loss_minus, demo.marginals_minus.0, demo.marginals_minus.1
    ));
    Ok(out)
}

fn pareto(cfg: &ExperimentConfig, dir: &Path) -> Result<Outcome, CliError> {
    let universe = universe(cfg)?;
    let rho_u = cfg.explicit(&universe, &cfg.defenders.nominal)?;
    let rho_d = cfg.explicit(&universe, &cfg.defenders.stress)?;
    let points = latent_battleship::game::scalarization_sweep(&rho_d, &rho_u, &cfg.pareto.lambdas)?;
    let mut out = Outcome::default();
    out.emit(dir, "pareto.csv", "pareto-csv/1", |w| {
        writeln!(w, "lambda,nominal_loss,adversarial_loss,policy").map_err(io_err(dir))?;
        for p in &points {
            writeln!(
                w,
                "{:.6},{:.6},{:.6},{}",
                p.lambda,
                p.nominal_loss,
                p.adversarial_loss,
                csv_field(&p.policy_id())
            )
            .map_err(io_err(dir))?;
        }
        Ok(())
    })?;
    let dominated = any_dominated(&points, &[]);
    out.result("points", points.len() as i64);
    out.result("any_dominated", dominated);
    for p in &points {
        out.summary.push(format!(
            "lambda {:.2}: nominal {:.4} adversarial {:.4}",
            p.lambda, p.nominal_loss, p.adversarial_loss
        ));
    }
    Ok(out)
}
