//! The ten acceptance criteria. Each check returns a one-line detail on
//! success or a reason on failure; `acceptance_criteria` prints one line
//! per criterion and fails if any of them did.
//!
//! Run with `cargo test -p latent-battleship --test acceptance -- --nocapture`.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use latent_battleship::attackers::{AttackerSpec, ParticleSettings, ProbMapSettings};
use latent_battleship::board::{rollout, sample_uniform_layout, Board, BoardConfig, LayoutSet, PublicState};
use latent_battleship::defenders::shift_metrics;
use latent_battleship::defenders::{
    DefenderFamily, DefenderPolytope, ExplicitDistribution, FamilyTag, LatentDistribution,
};
use latent_battleship::evaluation::{
    discounted_return, empirical_cvar10, empirical_p95, evaluate, hoeffding_radius, marginal_insufficiency_demo,
    undiscounted_identity_check, RadiusTerm,
};
use latent_battleship::game::{double_oracle_solve, scalarization_sweep, strictly_dominates, SolverSettings};
use latent_battleship::selfplay::{
    run_stage2, AttackerTrainerMode, DefenderSpace, ReferenceAttacker, ReferenceAttackerConfig, ReferenceDefender,
    Stage2Config,
};

use common::{fictitious_play, two_column_value, OneShip};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64, what: &str) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || {
        format!("{what} took {:.1}s, limit {limit_s}s", elapsed.as_secs_f64())
    })
}

fn board(h: usize, w: usize, ships: &[usize]) -> Arc<Board> {
    Board::new(BoardConfig::new(h, w, ships)).unwrap()
}

fn minimax(b: &Arc<Board>) -> Result<(latent_battleship::game::GameSolution, Duration), String> {
    let universe = LayoutSet::shared(b, 10_000).ok_or("board is not enumerable")?;
    let started = Instant::now();
    let sol = double_oracle_solve(&DefenderPolytope::simplex(&universe), SolverSettings::default())
        .map_err(|e| e.to_string())?;
    Ok((sol, started.elapsed()))
}

fn criterion_1_minimax() -> Check {
    let (strip, t1) = minimax(&board(1, 3, &[2]))?;
    let oracle = two_column_value(&OneShip::new(1, 3, 2).all_policy_losses());
    ensure((strip.value - 2.5).abs() <= 1e-9, || {
        format!("1x3 value {}", strip.value)
    })?;
    ensure((oracle - 2.5).abs() <= 1e-12, || {
        format!("exhaustive oracle gives {oracle}")
    })?;
    ensure(strip.duality_gap <= 1e-9, || format!("1x3 gap {}", strip.duality_gap))?;
    within(t1, 10.0, "1x3 solve")?;

    let (square, t3) = minimax(&board(3, 3, &[2]))?;
    ensure(square.duality_gap <= 1e-9, || format!("3x3 gap {}", square.duality_gap))?;
    within(t3, 10.0, "3x3 solve")?;
    let game = OneShip::new(3, 3, 2);
    ensure(game.layouts.len() == square.rho.universe().len(), || {
        "3x3 layout counts differ".into()
    })?;
    // a bracket of width 2e-3 containing the value puts its midpoint within 1e-3
    let (lo, hi) = fictitious_play(&game, 2e-3, 100_000);
    let mid = 0.5 * (lo + hi);
    ensure(
        square.value >= lo - 1e-9 && square.value <= hi + 1e-9 && (square.value - mid).abs() <= 1e-3,
        || {
            format!(
                "3x3 value {} disagrees with fictitious-play bracket [{lo}, {hi}]",
                square.value
            )
        },
    )?;
    Ok(format!(
        "1x3 value {:.12} gap {:.1e} ({:.2}s); 3x3 value {:.9} gap {:.1e} ({:.2}s), fictitious play [{lo:.6}, {hi:.6}]",
        strip.value,
        strip.duality_gap,
        t1.as_secs_f64(),
        square.value,
        square.duality_gap,
        t3.as_secs_f64()
    ))
}

fn criterion_2_marginal_demo() -> Check {
    let started = Instant::now();
    let demo = marginal_insufficiency_demo();
    let elapsed = started.elapsed();
    ensure(demo.loss_plus == 0.0 && demo.loss_minus == 1.0, || {
        format!("losses {} / {}", demo.loss_plus, demo.loss_minus)
    })?;
    ensure(
        demo.marginals_plus == (0.5, 0.5) && demo.marginals_minus == (0.5, 0.5),
        || format!("marginals {:?} / {:?}", demo.marginals_plus, demo.marginals_minus),
    )?;
    within(elapsed, 1.0, "demo")?;
    Ok(format!(
        "losses 0 and 1, marginals (0.5, 0.5) on both sides in {elapsed:?}"
    ))
}

/// A random small board; `None` when no layout fits.
fn fuzz_board(rng: &mut ChaCha8Rng, truncate: bool) -> Option<Arc<Board>> {
    let h = rng.gen_range(1..=7);
    let w = rng.gen_range(1..=7);
    let ships: Vec<usize> = (0..rng.gen_range(1..=3))
        .map(|_| rng.gen_range(1..=h.max(w).min(4)))
        .collect();
    let mut cfg = BoardConfig::new(h, w, &ships).with_no_touch(rng.gen_bool(0.2));
    if truncate && rng.gen_bool(0.7) {
        cfg = cfg.with_truncation(rng.gen_range(1..=h * w + 5));
    }
    let b = Board::new(cfg).ok()?;
    sample_uniform_layout(&b, rng).ok().map(|_| b)
}

fn fuzz_attacker(rng: &mut ChaCha8Rng, cells: usize) -> AttackerSpec {
    match rng.gen_range(0..10) {
        0..=3 => AttackerSpec::Random,
        4..=6 => AttackerSpec::ProbMap(ProbMapSettings::default()),
        7 => AttackerSpec::Particle(ParticleSettings {
            particles: 30,
            ..Default::default()
        }),
        _ => {
            let mut order: Vec<usize> = (0..cells).collect();
            order.shuffle(rng);
            AttackerSpec::Fixed(order)
        }
    }
}

/// Plays `episodes` fuzzed episodes and hands each to `check`.
fn fuzz(
    seed: u64,
    episodes: usize,
    truncate: bool,
    mut check: impl FnMut(
        &Board,
        &latent_battleship::board::Layout,
        &latent_battleship::board::EpisodeResult,
    ) -> Result<(), String>,
) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut played = 0;
    let mut truncated = 0;
    while played < episodes {
        let Some(b) = fuzz_board(&mut rng, truncate) else {
            continue;
        };
        let spec = fuzz_attacker(&mut rng, b.cells());
        let mut policy = spec.build(&b).map_err(|e| e.to_string())?;
        for _ in 0..20.min(episodes - played) {
            let layout = sample_uniform_layout(&b, &mut rng).map_err(|e| e.to_string())?;
            let ep = rollout(policy.as_mut(), &layout, &b, rng.gen()).map_err(|e| e.to_string())?;
            truncated += ep.truncated as usize;
            check(&b, &layout, &ep).map_err(|e| format!("{e} ({:?}, {spec})", b.config()))?;
            played += 1;
        }
    }
    Ok(truncated)
}

fn criterion_3_reward_identity() -> Check {
    let mut checked = 0;
    fuzz(3, 10_000, false, |b, layout, ep| {
        ensure(!ep.truncated, || {
            "untruncated board produced a truncated episode".into()
        })?;
        // replay the log through the environment, collecting -1 per step
        let mut state = PublicState::new(b);
        let mut reward_sum = 0i64;
        for shot in &ep.shot_log {
            let obs = state.apply(layout, shot.cell).map_err(|e| e.to_string())?;
            ensure(obs == shot.outcome, || "replayed observation differs".into())?;
            reward_sum -= 1;
        }
        ensure(state.all_sunk(), || "episode ended before every ship sank".into())?;
        ensure(reward_sum == -(ep.tau as i64), || {
            format!("sum {reward_sum} vs tau {}", ep.tau)
        })?;
        ensure(undiscounted_identity_check(ep), || {
            "identity check rejected a finished episode".into()
        })?;
        checked += 1;
        Ok(())
    })?;
    Ok(format!("sum of rewards = -tau on {checked} fuzzed episodes"))
}

fn criterion_4_boundedness() -> Check {
    let mut worst_ratio: f64 = 0.0;
    let truncated = fuzz(4, 10_000, true, |b, _, ep| {
        let cfg = b.config();
        let bound = cfg.truncation_cap.map_or(cfg.cells(), |cap| cap.min(cfg.cells()));
        ensure(ep.tau <= bound, || format!("tau {} exceeds {bound}", ep.tau))?;
        ensure(ep.shot_log.len() == ep.tau, || "log length differs from tau".into())?;
        let mut seen = vec![false; cfg.cells()];
        for s in &ep.shot_log {
            ensure(!std::mem::replace(&mut seen[s.cell], true), || {
                format!("cell {} fired twice", s.cell)
            })?;
        }
        ensure(!ep.truncated || ep.tau == bound, || {
            "truncated before the horizon".into()
        })?;
        worst_ratio = worst_ratio.max(ep.tau as f64 / bound as f64);
        Ok(())
    })?;
    ensure(truncated > 0, || {
        "no episode was truncated; the fuzzer misses the cap".into()
    })?;
    Ok(format!(
        "tau <= min(HW, cap) on 10000 episodes, {truncated} truncated, max tau/bound {worst_ratio:.2}"
    ))
}

fn criterion_5_stage2_exact() -> Check {
    let b = board(3, 4, &[3, 2]);
    let universe = LayoutSet::shared(&b, 10_000).ok_or("board is not enumerable")?;
    let nominal = LatentDistribution::family(b.clone(), DefenderFamily::uniform());
    let stress = LatentDistribution::family(b.clone(), DefenderFamily::from_tag(FamilyTag::Spread, None).unwrap());
    let attacker = ReferenceAttacker(ReferenceAttackerConfig {
        mode: AttackerTrainerMode::Exact,
        ..Default::default()
    });
    let defender = ReferenceDefender(DefenderSpace::Polytope(DefenderPolytope::simplex(&universe)));
    let cfg = Stage2Config {
        generations: 3,
        seed: 11,
        ..Default::default()
    };
    let started = Instant::now();
    let out = run_stage2(
        &cfg,
        &attacker,
        &defender,
        AttackerSpec::Fixed((0..12).collect()),
        &nominal,
        &stress,
    )
    .map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    ensure(out.logs.len() == 3, || format!("{} generations logged", out.logs.len()))?;
    let mut parts = Vec::new();
    for log in &out.logs {
        let p = log
            .population
            .ok_or_else(|| format!("generation {} has no exact diagnostics", log.k))?;
        ensure(p.defender_adversarial >= 0.0, || {
            format!("generation {}: defender_adversarial {}", log.k, p.defender_adversarial)
        })?;
        // the residual is a difference of two sums over the same weights; allow rounding only
        ensure(p.weighted_residual <= 1e-9, || {
            format!("generation {}: weighted_residual {}", log.k, p.weighted_residual)
        })?;
        ensure(log.identities_hold(), || {
            format!("generation {}: identities fail", log.k)
        })?;
        parts.push(format!(
            "g{} DA {:.4} R {:.4}",
            log.k, p.defender_adversarial, p.weighted_residual
        ));
    }
    within(elapsed, 60.0, "stage 2")?;
    Ok(format!(
        "3x4 [3,2]: {} ({:.1}s)",
        parts.join(", "),
        elapsed.as_secs_f64()
    ))
}

/// Fraction of `reps` trials whose weighted estimate lands within the
/// radius of the truth. Even terms average variables on `{0, t_max}`, odd
/// terms uniform draws on `[0, t_max]`.
fn coverage(rng: &mut ChaCha8Rng, terms: &[RadiusTerm], t_max: usize, delta: f64, reps: usize) -> Result<f64, String> {
    let radius = hoeffding_radius(terms, t_max, delta).map_err(|e| e.to_string())?;
    let t = t_max as f64;
    let p: Vec<f64> = (0..terms.len()).map(|i| 0.3 + 0.1 * i as f64).collect();
    let truth: Vec<f64> = (0..terms.len())
        .map(|i| if i % 2 == 0 { t * p[i] } else { t / 2.0 })
        .collect();
    let mut covered = 0;
    for _ in 0..reps {
        let estimate: f64 = terms
            .iter()
            .enumerate()
            .map(|(i, term)| {
                let mean = (0..term.n)
                    .map(|_| {
                        if i % 2 == 0 {
                            t * rng.gen_bool(p[i]) as u8 as f64
                        } else {
                            t * rng.gen::<f64>()
                        }
                    })
                    .sum::<f64>()
                    / term.n as f64;
                term.weight * (mean - truth[i])
            })
            .sum();
        covered += (estimate.abs() <= radius) as usize;
    }
    Ok(covered as f64 / reps as f64)
}

fn criterion_6_coverage() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let reps = 2000;
    let lambda = 0.5;
    let two = [RadiusTerm::new(50, 1.0), RadiusTerm::new(100, 1.0)];
    let four = [
        RadiusTerm::new(100, lambda),
        RadiusTerm::new(50, lambda),
        RadiusTerm::new(100, 1.0 - lambda),
        RadiusTerm::new(100, 1.0 - lambda),
    ];
    let mut parts = Vec::new();
    for delta in [0.05, 0.2] {
        let slack = 3.0 * (delta * (1.0 - delta) / reps as f64).sqrt();
        for (name, terms) in [("two-term", &two[..]), ("four-term", &four[..])] {
            let c = coverage(&mut rng, terms, 20, delta, reps)?;
            ensure(c >= 1.0 - delta - slack, || {
                format!("{name} delta {delta}: coverage {c}")
            })?;
            parts.push(format!("{name}@{delta} {c:.3}"));
        }
    }
    let paper = hoeffding_radius(&two, 100, 0.05).map_err(|e| e.to_string())?;
    ensure((paper - 35.7).abs() < 0.05, || format!("T_max=100 radius {paper}"))?;
    Ok(format!("coverage {}; T_max=100 radius {paper:.2}", parts.join(", ")))
}

fn criterion_7_baselines() -> Check {
    let b = Board::new(BoardConfig::standard()).unwrap();
    let uniform = LatentDistribution::family(b, DefenderFamily::uniform());
    let started = Instant::now();
    let mut parts = Vec::new();
    for (spec, target, tol) in [
        (AttackerSpec::Random, 96.0, 5.0),
        (AttackerSpec::ProbMap(ProbMapSettings::default()), 44.7, 6.0),
        (
            AttackerSpec::Particle(ParticleSettings {
                particles: 1000,
                ..Default::default()
            }),
            48.2,
            6.0,
        ),
    ] {
        let r = evaluate(&spec, &uniform, 500, 7).map_err(|e| e.to_string())?;
        ensure((r.mean - target).abs() <= tol, || {
            format!("{spec}: mean {:.2}, target {target} +- {tol}", r.mean)
        })?;
        parts.push(format!("{spec} {:.2}", r.mean));
    }
    within(started.elapsed(), 300.0, "baselines")?;
    Ok(format!(
        "{} ({:.0}s)",
        parts.join(", "),
        started.elapsed().as_secs_f64()
    ))
}

fn criterion_8_shift_anchors() -> Check {
    let b = Board::new(BoardConfig::standard()).unwrap();
    let mut rows = Vec::new();
    for tag in FamilyTag::SCRIPTED {
        let d = LatentDistribution::family(b.clone(), DefenderFamily::from_tag(tag, None).unwrap());
        rows.push((tag, shift_metrics(&d, 20_000, 8).map_err(|e| e.to_string())?));
    }
    let uniform = &rows.iter().find(|(t, _)| *t == FamilyTag::Uniform).unwrap().1;
    ensure(uniform.centroid_dist_mean == 0.0, || {
        format!("UNIFORM centroid {}", uniform.centroid_dist_mean)
    })?;
    ensure((uniform.marginal_entropy - 0.451).abs() <= 0.02, || {
        format!("UNIFORM entropy {}", uniform.marginal_entropy)
    })?;
    let argmax = |f: fn(&latent_battleship::defenders::ShiftMetrics) -> f64| {
        rows.iter().max_by(|a, b| f(&a.1).total_cmp(&f(&b.1))).unwrap().0
    };
    let argmin = |f: fn(&latent_battleship::defenders::ShiftMetrics) -> f64| {
        rows.iter().min_by(|a, b| f(&a.1).total_cmp(&f(&b.1))).unwrap().0
    };
    ensure(argmax(|m| m.cluster_score) == FamilyTag::Cluster, || {
        "CLUSTER is not the most clustered".into()
    })?;
    ensure(argmin(|m| m.marginal_entropy) == FamilyTag::Cluster, || {
        "CLUSTER is not the lowest entropy".into()
    })?;
    ensure(argmin(|m| m.cluster_score) == FamilyTag::Spread, || {
        "SPREAD is not the least clustered".into()
    })?;
    let clusters: Vec<String> = rows
        .iter()
        .map(|(t, m)| format!("{t} {:.2}", m.cluster_score))
        .collect();
    Ok(format!(
        "UNIFORM centroid 0, entropy {:.4}; cluster scores {}",
        uniform.marginal_entropy,
        clusters.join(", ")
    ))
}

fn brute_p95(xs: &[usize]) -> f64 {
    let n = xs.len();
    let mut candidates = xs.to_vec();
    candidates.sort_unstable();
    candidates.dedup();
    *candidates
        .iter()
        .find(|&&c| 100 * xs.iter().filter(|&&x| x <= c).count() >= 95 * n)
        .unwrap() as f64
}

fn brute_cvar10(xs: &[usize]) -> f64 {
    let k = (xs.len() + 9) / 10;
    let mut pool = xs.to_vec();
    let mut total = 0;
    for _ in 0..k {
        let (i, &m) = pool.iter().enumerate().max_by_key(|(_, &v)| v).unwrap();
        total += m;
        pool.swap_remove(i);
    }
    total as f64 / k as f64
}

fn criterion_9_estimators() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for trial in 0..50 {
        let n = if trial == 0 { 1000 } else { rng.gen_range(1..=1000) };
        let xs: Vec<usize> = (0..n).map(|_| rng.gen_range(17..=100)).collect();
        ensure(empirical_p95(&xs) == brute_p95(&xs), || {
            format!("p95 differs at n = {n}")
        })?;
        ensure(empirical_cvar10(&xs) == brute_cvar10(&xs), || {
            format!("cvar10 differs at n = {n}")
        })?;
    }
    let g = discounted_return(100, 0.99).map_err(|e| e.to_string())?;
    let direct: f64 = (0..100).map(|t| -(0.99f64.powi(t))).sum();
    ensure((g - direct).abs() <= 1e-12, || {
        format!("discounted return {g} vs {direct}")
    })?;
    Ok(format!(
        "p95 and cvar10 match brute force on 50 samples up to n = 1000; G = {g:.12}"
    ))
}

fn criterion_10_pareto() -> Check {
    let b = board(1, 3, &[2]);
    let universe = LayoutSet::shared(&b, 10).ok_or("board is not enumerable")?;
    let rho_u = ExplicitDistribution::uniform(universe.clone());
    let rho_d = ExplicitDistribution::from_masses(universe, vec![0.2, 0.8]).map_err(|e| e.to_string())?;
    let lambdas: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let points = scalarization_sweep(&rho_d, &rho_u, &lambdas).map_err(|e| e.to_string())?;
    for a in &points {
        for b in &points {
            let (pa, pb) = (
                (a.nominal_loss, a.adversarial_loss),
                (b.nominal_loss, b.adversarial_loss),
            );
            ensure(!strictly_dominates(pb, pa), || {
                format!("lambda {} dominates lambda {}", b.lambda, a.lambda)
            })?;
        }
    }
    let min_nominal = points.iter().map(|p| p.nominal_loss).fold(f64::INFINITY, f64::min);
    let min_adversarial = points.iter().map(|p| p.adversarial_loss).fold(f64::INFINITY, f64::min);
    let (first, last) = (&points[0], points.last().unwrap());
    ensure(first.nominal_loss == min_nominal, || {
        format!("lambda 0 nominal loss {}", first.nominal_loss)
    })?;
    ensure(last.adversarial_loss == min_adversarial, || {
        format!("lambda 1 adversarial loss {}", last.adversarial_loss)
    })?;
    Ok(format!(
        "{} points, none strictly dominated; lambda 0 at ({}, {}), lambda 1 at ({}, {})",
        points.len(),
        first.nominal_loss,
        first.adversarial_loss,
        last.nominal_loss,
        last.adversarial_loss
    ))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("1 minimax reproduction", criterion_1_minimax),
        ("2 marginal insufficiency", criterion_2_marginal_demo),
        ("3 reward identity", criterion_3_reward_identity),
        ("4 boundedness", criterion_4_boundedness),
        ("5 stage-2 exact trainers", criterion_5_stage2_exact),
        ("6 hoeffding coverage", criterion_6_coverage),
        ("7 baseline calibration", criterion_7_baselines),
        ("8 shift-metric anchors", criterion_8_shift_anchors),
        ("9 estimator oracles", criterion_9_estimators),
        ("10 pareto sweep", criterion_10_pareto),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name} [{secs:.1}s]: {detail}"),
            Err(reason) => {
                println!("FAIL criterion {name} [{secs:.1}s]: {reason}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
