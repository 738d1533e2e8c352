//! Acceptance suite: one integration test per numbered criterion.
//!
//! Every test prints a single `criterion NN PASS/FAIL` line carrying the
//! measured quantity and its pinned tolerance (run with `--nocapture` to
//! see the lines), then asserts. Identity criteria enumerate the sampling
//! randomness exactly through the audit module; behavioral criteria run
//! the production solver on synthetic datasets built in-test; the sweep
//! criterion shells out to the installed binary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use provar_cli::io::CSV_HEADER;
use provar_core::audit::{
    bias_identity_residual, bmse_constants, for_each_reachable_state, mse_decomposition_residual,
    mse_table_identity_residual, prox_optimality_residual, trajectory_expectation,
};
use provar_core::dataset::{LabeledDataset, SparseRow};
use provar_core::estimator::{EstimatorKind, EstimatorState};
use provar_core::objective::{FiniteSumObjective, ObjectiveKind};
use provar_core::regularizer::Regularizer;
use provar_core::rng::SplitMix64;
use provar_core::solver::{self, Reference, SolverConfig, StepPolicy};
use provar_core::stepsize::Regime;

/// Prints the verdict line for one criterion, then asserts it.
fn report(number: u32, ok: bool, detail: &str) {
    let status = if ok { "PASS" } else { "FAIL" };
    println!("criterion {number:02} {status}: {detail}");
    assert!(ok, "criterion {number:02} failed: {detail}");
}

fn random_dataset(rng: &mut SplitMix64, n: usize, p: usize) -> LabeledDataset {
    let rows = (0..n)
        .map(|_| SparseRow {
            indices: (0..p).collect(),
            values: (0..p).map(|_| 4.0 * rng.next_f64() - 2.0).collect(),
        })
        .collect();
    let labels = (0..n).map(|_| 2.0 * rng.next_f64() - 1.0).collect();
    LabeledDataset::from_rows(rows, labels).unwrap()
}

fn random_vec(rng: &mut SplitMix64, p: usize) -> Vec<f64> {
    (0..p).map(|_| 6.0 * rng.next_f64() - 3.0).collect()
}

/// Overwrites the gradient/ψ table with arbitrary values, keeping the
/// stored mean consistent with the rows.
fn scramble_table(rng: &mut SplitMix64, state: &mut EstimatorState) {
    let (n, p) = (state.n, state.dim);
    for v in state.grad_table.iter_mut() {
        *v = 8.0 * rng.next_f64() - 4.0;
    }
    for q in 0..p {
        state.table_mean[q] = (0..n).map(|i| state.grad_table[i * p + q]).sum::<f64>() / n as f64;
    }
}

/// Dense design whose rows sample `harmonics` cosine/sine pairs on the
/// circle, scaled by `scale`, with the first cosine column additionally
/// multiplied by `first_cos_boost`. With boost 1 all rows share the same
/// norm (so the component Lipschitz bound is tight for every row); with
/// boost > 1 the quadratic form gains a strictly dominant direction along
/// coordinate 0, which is nonnegative and hence feasible for the
/// nonnegative-ball constraint. Labels follow the sign of the first
/// cosine, giving a signal that correlates with a few columns only.
fn fourier_design(n: usize, harmonics: usize, scale: f64, first_cos_boost: f64) -> LabeledDataset {
    let p = 2 * harmonics;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let base = std::f64::consts::TAU * i as f64 / n as f64;
        let mut values = Vec::with_capacity(p);
        for q in 1..=harmonics {
            let ang = base * q as f64;
            let boost = if q == 1 { first_cos_boost } else { 1.0 };
            values.push(scale * boost * ang.cos());
            values.push(scale * ang.sin());
        }
        rows.push(SparseRow {
            indices: (0..p).collect(),
            values,
        });
        labels.push(if base.cos() >= 0.0 { 1.0 } else { -1.0 });
    }
    LabeledDataset::from_rows(rows, labels).unwrap()
}

/// Deterministic strictly positive unit vector (feasible for the
/// nonnegative ball).
fn positive_unit_start(p: usize, seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::new(seed);
    let mut x: Vec<f64> = (0..p).map(|_| 0.1 + rng.next_f64()).collect();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in x.iter_mut() {
        *v /= norm;
    }
    x
}

struct MeanCurve {
    dist_sq: Vec<f64>,
    avg_gap: Vec<f64>,
}

/// Runs `seeds` independent trajectories from the origin with theory step
/// sizes and averages the per-pass checkpoint columns across seeds.
fn mean_over_seeds(
    obj: &FiniteSumObjective<'_>,
    reg: &Regularizer,
    reference: &Reference,
    kind: EstimatorKind,
    regime: Regime,
    passes: usize,
    seeds: u64,
) -> MeanCurve {
    let n = obj.n();
    let x0 = vec![0.0; obj.dim()];
    let mut dist_sq = vec![0.0f64; passes + 1];
    let mut avg_gap = vec![0.0f64; passes + 1];
    for seed in 0..seeds {
        let config = SolverConfig {
            estimator: kind,
            step: StepPolicy::Theory(regime),
            iterations: passes * n,
            record_every: n,
            seed,
            sarge_cold_start: false,
        };
        let out = solver::run(obj, reg, &config, &x0, Some(reference)).unwrap();
        assert_eq!(out.checkpoints.len(), passes + 1);
        for (k, c) in out.checkpoints.iter().enumerate() {
            dist_sq[k] += c.dist_sq;
            avg_gap[k] += c.avg_gap;
        }
    }
    for v in dist_sq.iter_mut() {
        *v /= seeds as f64;
    }
    for v in avg_gap.iter_mut() {
        *v /= seeds as f64;
    }
    MeanCurve { dist_sq, avg_gap }
}

#[test]
fn criterion_01_bias_identities_on_randomized_states() {
    let started = Instant::now();
    let mut rng = SplitMix64::new(909);
    let mut worst = 0.0f64;
    let mut states = 0u32;
    for trial in 0..25usize {
        let n = 2 + trial % 5;
        let p = 2 + trial % 3;
        let data = random_dataset(&mut rng, n, p);
        let obj = FiniteSumObjective::new(ObjectiveKind::LeastSquares, &data).unwrap();
        let x = random_vec(&mut rng, p);

        // Stored-gradient table bias, table contents arbitrary.
        for theta in [0.7, 1.0, 2.0, 3.5] {
            let mut state = EstimatorState::init(EstimatorKind::BSaga { theta }, &obj, &x).unwrap();
            scramble_table(&mut rng, &mut state);
            worst = worst.max(bias_identity_residual(&obj, &state, &x, None, None));
            states += 1;
        }

        // Snapshot bias at an inner step, snapshot point independent of x.
        for theta in [0.5, 1.5] {
            let z = random_vec(&mut rng, p);
            let mut state = EstimatorState::init(
                EstimatorKind::BSvrg {
                    theta,
                    epoch_len: 3,
                },
                &obj,
                &z,
            )
            .unwrap();
            state.step_index = 1;
            worst = worst.max(bias_identity_residual(&obj, &state, &x, None, None));
            states += 1;
        }

        // Recursive bias with arbitrary previous point and estimate.
        {
            let z = random_vec(&mut rng, p);
            let mut state =
                EstimatorState::init(EstimatorKind::Sarah { epoch_len: 4 }, &obj, &z).unwrap();
            state.prev_point = random_vec(&mut rng, p);
            state.prev_estimate = random_vec(&mut rng, p);
            state.step_index = 2;
            worst = worst.max(bias_identity_residual(&obj, &state, &x, None, None));
            states += 1;
        }
        {
            let z = random_vec(&mut rng, p);
            let mut state = EstimatorState::init(EstimatorKind::Sarge, &obj, &z).unwrap();
            scramble_table(&mut rng, &mut state);
            state.prev_point = random_vec(&mut rng, p);
            state.prev_estimate = random_vec(&mut rng, p);
            state.step_index = 3;
            worst = worst.max(bias_identity_residual(&obj, &state, &x, None, None));
            states += 1;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    let ok = states >= 100 && worst <= 1e-10 && secs < 1.0;
    report(
        1,
        ok,
        &format!(
            "worst bias-identity residual {worst:.3e} over {states} randomized states \
             (tol 1e-10), {secs:.3}s (limit 1s)"
        ),
    );
}

#[test]
fn criterion_02_closed_form_mse_on_enumerated_trajectories() {
    let started = Instant::now();
    let mut rng = SplitMix64::new(404);
    let mut worst = 0.0f64;
    let mut nodes = 0u64;
    for (n, horizon) in [(3usize, 5usize), (2, 5)] {
        let data = random_dataset(&mut rng, n, 2);
        let obj = FiniteSumObjective::new(ObjectiveKind::LeastSquares, &data).unwrap();
        let reg = Regularizer::SquaredL2 { beta: 0.25 };
        let x0 = random_vec(&mut rng, 2);
        let kinds = [
            EstimatorKind::BSaga { theta: 1.0 },
            EstimatorKind::BSaga { theta: 2.5 },
            EstimatorKind::BSvrg {
                theta: 0.5,
                epoch_len: 2,
            },
            EstimatorKind::BSvrg {
                theta: 1.0,
                epoch_len: 3,
            },
            EstimatorKind::BSvrg {
                theta: 3.0,
                epoch_len: 2,
            },
        ];
        for kind in kinds {
            for_each_reachable_state(&obj, &reg, kind, &x0, 0.05, horizon, |_, state, x, _| {
                let r = mse_table_identity_residual(&obj, state, x)
                    .expect("closed form is defined for table-based estimators");
                worst = worst.max(r);
                nodes += 1;
            })
            .unwrap();
        }
    }
    let secs = started.elapsed().as_secs_f64();
    let ok = worst <= 1e-10 && nodes > 0 && secs < 5.0;
    report(
        2,
        ok,
        &format!(
            "worst closed-form MSE residual {worst:.3e} over {nodes} enumerated states \
             (tol 1e-10), {secs:.2}s (limit 5s)"
        ),
    );
}

#[test]
fn criterion_03_mse_decomposition_on_enumerated_trajectories() {
    let mut rng = SplitMix64::new(505);
    let mut worst = 0.0f64;
    let mut nodes = 0u64;
    for (n, horizon) in [(3usize, 4usize), (2, 5)] {
        let data = random_dataset(&mut rng, n, 2);
        let obj = FiniteSumObjective::new(ObjectiveKind::LeastSquares, &data).unwrap();
        let reg = Regularizer::L1 { beta: 0.1 };
        let x0 = random_vec(&mut rng, 2);
        let kinds = [
            EstimatorKind::Sgd,
            EstimatorKind::BSaga { theta: 1.6 },
            EstimatorKind::BSvrg {
                theta: 0.8,
                epoch_len: 2,
            },
            EstimatorKind::Sarah { epoch_len: 2 },
            EstimatorKind::Sarge,
        ];
        for kind in kinds {
            for_each_reachable_state(&obj, &reg, kind, &x0, 0.05, horizon, |_, state, x, _| {
                worst = worst.max(mse_decomposition_residual(&obj, state, x));
                nodes += 1;
            })
            .unwrap();
        }
    }
    let ok = worst <= 1e-10 && nodes > 0;
    report(
        3,
        ok,
        &format!(
            "worst MSE = bias² + variance residual {worst:.3e} over {nodes} enumerated \
             states, all five estimators (tol 1e-10)"
        ),
    );
}

#[test]
fn criterion_04_estimator_reductions() {
    let mut rng = SplitMix64::new(808);

    // θ = 1 stored-gradient table: enumerated bias vanishes for any table.
    let mut worst_bias = 0.0f64;
    for trial in 0..50usize {
        let n = 2 + trial % 5;
        let p = 2 + trial % 3;
        let data = random_dataset(&mut rng, n, p);
        let obj = FiniteSumObjective::new(ObjectiveKind::LeastSquares, &data).unwrap();
        let x = random_vec(&mut rng, p);
        let mut state =
            EstimatorState::init(EstimatorKind::BSaga { theta: 1.0 }, &obj, &x).unwrap();
        scramble_table(&mut rng, &mut state);
        worst_bias = worst_bias.max(bias_identity_residual(&obj, &state, &x, None, None));
    }

    // θ = n against an independent transcription of the classical
    // stored-gradient-average update: v = (∇f_j(x) − y_j)/n + ȳ, then
    // y_j ← ∇f_j(x), with ȳ recomputed from scratch each step.
    let n = 4;
    let p = 3;
    let data = random_dataset(&mut rng, n, p);
    let obj = FiniteSumObjective::new(ObjectiveKind::LeastSquares, &data).unwrap();
    let x0 = random_vec(&mut rng, p);
    let mut prod =
        EstimatorState::init(EstimatorKind::BSaga { theta: n as f64 }, &obj, &x0).unwrap();
    let mut table = vec![vec![0.0f64; p]; n];
    let mut worst_avg = 0.0f64;
    for _ in 0..1000 {
        let x = random_vec(&mut rng, p);
        let j = rng.next_index(n);
        let got = prod.next_estimate(&obj, &x, j);
        let g = obj.component_gradient(j, &x);
        let mut mean = vec![0.0f64; p];
        for row in &table {
            for q in 0..p {
                mean[q] += row[q];
            }
        }
        for q in 0..p {
            mean[q] /= n as f64;
        }
        let want: Vec<f64> = (0..p)
            .map(|q| (g[q] - table[j][q]) / n as f64 + mean[q])
            .collect();
        table[j] = g;
        for q in 0..p {
            worst_avg = worst_avg.max((got[q] - want[q]).abs());
        }
    }

    // θ = 1 against an independent transcription of the classical
    // snapshot-correction update: v = ∇f_j(x) − ∇f_j(x̃) + ∇f(x̃), with
    // x̃ refreshed at the current iterate every m steps.
    let x0 = random_vec(&mut rng, p);
    let m = 3usize;
    let mut prod = EstimatorState::init(
        EstimatorKind::BSvrg {
            theta: 1.0,
            epoch_len: m,
        },
        &obj,
        &x0,
    )
    .unwrap();
    let mut snapshot = x0.clone();
    let mut full = obj.full_gradient(&x0);
    let mut worst_snap = 0.0f64;
    for k in 0..1000usize {
        let x = random_vec(&mut rng, p);
        let j = rng.next_index(n);
        let got = prod.next_estimate(&obj, &x, j);
        let want: Vec<f64> = if k % m == 0 {
            if k > 0 {
                snapshot = x.clone();
                full = obj.full_gradient(&x);
            }
            full.clone()
        } else {
            let gx = obj.component_gradient(j, &x);
            let gs = obj.component_gradient(j, &snapshot);
            (0..p).map(|q| gx[q] - gs[q] + full[q]).collect()
        };
        for q in 0..p {
            worst_snap = worst_snap.max((got[q] - want[q]).abs());
        }
    }

    let ok = worst_bias <= 1e-12 && worst_avg <= 1e-10 && worst_snap <= 1e-12;
    report(
        4,
        ok,
        &format!(
            "θ=1 enumerated bias {worst_bias:.3e} (tol 1e-12); θ=n vs stored-average \
             transcription {worst_avg:.3e} over 1000 steps (tol 1e-10); θ=1 vs snapshot \
             transcription {worst_snap:.3e} over 1000 steps (tol 1e-12)"
        ),
    );
}

#[test]
fn criterion_05_oracle_call_accounting() {
    let mut rng = SplitMix64::new(606);
    let n = 6usize;
    let p = 2usize;
    let data = random_dataset(&mut rng, n, p);
    let obj = FiniteSumObjective::new(ObjectiveKind::LeastSquares, &data).unwrap();
    let epochs = 10usize;
    let total_steps = epochs * n; // epoch length m = n

    let drive = |kind: EstimatorKind| -> (u64, Vec<u64>) {
        let mut walk = SplitMix64::new(707);
        let mut x = random_vec(&mut walk, p);
        let mut state = EstimatorState::init(kind, &obj, &x).unwrap();
        let init = state.oracle_calls;
        let mut increments = Vec::with_capacity(total_steps);
        for _ in 0..total_steps {
            let j = walk.next_index(n);
            let before = state.oracle_calls;
            let _ = state.next_estimate(&obj, &x, j);
            increments.push(state.oracle_calls - before);
            for v in x.iter_mut() {
                *v += 0.05 * (walk.next_f64() - 0.5);
            }
        }
        (init, increments)
    };

    let (sarge_init, sarge_incs) = drive(EstimatorKind::Sarge);
    let (sarah_init, sarah_incs) = drive(EstimatorKind::Sarah { epoch_len: n });
    let (bsvrg_init, bsvrg_incs) = drive(EstimatorKind::BSvrg {
        theta: 1.0,
        epoch_len: n,
    });
    let (bsaga_init, bsaga_incs) = drive(EstimatorKind::BSaga { theta: 1.0 });

    // SARGE: full pass once at init, then exactly two calls every step.
    let sarge_ok = sarge_init == n as u64 && sarge_incs.iter().all(|&c| c == 2);
    // SARAH / B-SVRG: two calls per inner step plus a full pass at every
    // epoch boundary after the first (init already anchored step zero).
    let epoch_pattern = |incs: &[u64]| {
        incs.iter().enumerate().all(|(k, &c)| {
            if k % n == 0 {
                c == if k == 0 { 0 } else { n as u64 }
            } else {
                c == 2
            }
        })
    };
    let sarah_ok = sarah_init == n as u64 && epoch_pattern(&sarah_incs);
    let bsvrg_ok = bsvrg_init == n as u64 && epoch_pattern(&bsvrg_incs);
    let bsaga_ok = bsaga_init == 0 && bsaga_incs.iter().all(|&c| c == 1);

    let total = |init: u64, incs: &[u64]| init + incs.iter().sum::<u64>();
    let sarge_total = total(sarge_init, &sarge_incs);
    let sarah_total = total(sarah_init, &sarah_incs);
    let bsvrg_total = total(bsvrg_init, &bsvrg_incs);
    let bsaga_total = total(bsaga_init, &bsaga_incs);
    // Frozen totals for n = 6, m = n, 10 epochs: 6 + 2·60, 6 + 9·6 + 50·2,
    // and 60; SARGE buys strictly fewer calls than the epoch-based pair.
    let totals_ok = sarge_total == 126
        && sarah_total == 160
        && bsvrg_total == 160
        && bsaga_total == 60
        && sarge_total < sarah_total
        && sarge_total < bsvrg_total;

    let ok = sarge_ok && sarah_ok && bsvrg_ok && bsaga_ok && totals_ok;
    report(
        5,
        ok,
        &format!(
            "10-epoch totals: sarge {sarge_total} (2/step post-init), sarah {sarah_total}, \
             bsvrg {bsvrg_total} (2/inner + n/epoch), bsaga {bsaga_total} (1/step); \
             sarge < sarah and sarge < bsvrg"
        ),
    );
}

/// ½‖z − y‖² + η·g(z); +infinity outside the constraint set.
fn prox_objective(reg: &Regularizer, y: &[f64; 2], z: &[f64; 2], eta: f64) -> f64 {
    let d0 = z[0] - y[0];
    let d1 = z[1] - y[1];
    0.5 * (d0 * d0 + d1 * d1) + eta * reg.value(z)
}

/// Brute-force minimizer of the prox objective, refined over five stages.
///
/// Each stage evaluates a 201×201 lattice whose lines are snapped to
/// integer multiples of the spacing, so the coordinate axes — where the
/// L1 term has kinks and the nonnegativity constraint has faces — are
/// sampled exactly whenever they cross the window. For the ball
/// constraint an additional one-dimensional sweep over the arc
/// (cos t, sin t), t ∈ [0, π/2], samples the curved boundary face
/// exactly. With every candidate face on-lattice the objective gap at
/// the nearest lattice point is quadratic in the spacing, so the argmin
/// localizes to a few spacings per stage and the four-spacing window
/// around the incumbent always contains the true minimizer.
fn grid_argmin(reg: &Regularizer, y: &[f64; 2], eta: f64) -> [f64; 2] {
    let mut center = [0.0f64, 0.0];
    let mut half = 3.0f64;
    let mut best = [0.0f64, 0.0];
    let mut best_val = f64::INFINITY;
    for _stage in 0..5 {
        let spacing = half / 100.0;
        let m0 = ((center[0] - half) / spacing).round() as i64;
        let m1 = ((center[1] - half) / spacing).round() as i64;
        for a in 0..=200i64 {
            let z0 = (m0 + a) as f64 * spacing;
            for b in 0..=200i64 {
                let z1 = (m1 + b) as f64 * spacing;
                let v = prox_objective(reg, y, &[z0, z1], eta);
                if v < best_val {
                    best_val = v;
                    best = [z0, z1];
                }
            }
        }
        center = best;
        half = 4.0 * spacing;
    }

    if matches!(reg, Regularizer::NonnegativeBall) {
        let quarter = std::f64::consts::FRAC_PI_2;
        let mut t_center = 0.5 * quarter;
        let mut t_half = 0.5 * quarter;
        let mut arc_best_t = t_center;
        let mut arc_best_val = f64::INFINITY;
        for _stage in 0..5 {
            let spacing = t_half / 100.0;
            let m = ((t_center - t_half) / spacing).round() as i64;
            for a in 0..=200i64 {
                let t = ((m + a) as f64 * spacing).clamp(0.0, quarter);
                let z = [t.cos(), t.sin()];
                let v = prox_objective(reg, y, &z, eta);
                if v < arc_best_val {
                    arc_best_val = v;
                    arc_best_t = t;
                }
            }
            t_center = arc_best_t;
            t_half = 4.0 * spacing;
        }
        if arc_best_val < best_val {
            best = [arc_best_t.cos(), arc_best_t.sin()];
        }
    }
    best
}

#[test]
fn criterion_06_prox_maps() {
    let regs = [
        Regularizer::Zero,
        Regularizer::SquaredL2 { beta: 0.7 },
        Regularizer::L1 { beta: 0.45 },
        Regularizer::NonnegativeBall,
    ];

    // Variational-inequality / subdifferential residual on random inputs.
    let mut rng = SplitMix64::new(1212);
    let mut worst_residual = 0.0f64;
    for reg in &regs {
        for trial in 0..1000usize {
            let p = 1 + trial % 4;
            let y = random_vec(&mut rng, p);
            let eta = 0.05 + 3.0 * rng.next_f64();
            worst_residual = worst_residual.max(prox_optimality_residual(reg, &y, eta));
        }
    }

    // Agreement with brute-force grid minimization on 2-D instances.
    let mut worst_grid = 0.0f64;
    let mut worst_value_slack = f64::NEG_INFINITY;
    for reg in &regs {
        for _ in 0..10 {
            let y = [5.0 * rng.next_f64() - 2.5, 5.0 * rng.next_f64() - 2.5];
            let eta = 0.1 + 2.0 * rng.next_f64();
            let prox = reg.prox(&y, eta);
            let grid = grid_argmin(reg, &y, eta);
            worst_grid = worst_grid
                .max((prox[0] - grid[0]).abs())
                .max((prox[1] - grid[1]).abs());
            // The prox output can never lose to any grid point.
            let slack = prox_objective(reg, &y, &[prox[0], prox[1]], eta)
                - prox_objective(reg, &y, &grid, eta);
            worst_value_slack = worst_value_slack.max(slack);
        }
    }

    let ok = worst_residual <= 1e-10 && worst_grid <= 1e-6 && worst_value_slack <= 1e-12;
    report(
        6,
        ok,
        &format!(
            "worst optimality residual {worst_residual:.3e} over 4×1000 random (y, η) \
             (tol 1e-10); worst |prox − grid argmin| {worst_grid:.3e} (tol 1e-6); \
             prox objective never above grid minimum by more than {worst_value_slack:.3e}"
        ),
    );
}

#[test]
fn criterion_07_strongly_convex_convergence() {
    let started = Instant::now();
    let data = fourier_design(50, 5, 0.03, 1.0);
    let obj = FiniteSumObjective::new(ObjectiveKind::LeastSquares, &data).unwrap();
    let reg = Regularizer::SquaredL2 { beta: 1.0 / 50.0 };
    let x0 = vec![0.0; obj.dim()];
    let reference = solver::reference_solution(
        &obj,
        &reg,
        &x0,
        1.0 / obj.lipschitz_bound(),
        1e-13,
        1_000_000,
    );
    assert!(reference.converged, "reference solve must converge");

    let kinds = [
        ("bsaga(θ=1)", EstimatorKind::BSaga { theta: 1.0 }),
        ("bsaga(θ=2)", EstimatorKind::BSaga { theta: 2.0 }),
        (
            "bsvrg(θ=1)",
            EstimatorKind::BSvrg {
                theta: 1.0,
                epoch_len: 50,
            },
        ),
        ("sarah", EstimatorKind::Sarah { epoch_len: 50 }),
        ("sarge", EstimatorKind::Sarge),
    ];
    let passes = 500usize;
    let burn_in = 100usize;
    let mut ok = true;
    let mut detail = String::new();
    let mut worst_ratio = f64::NEG_INFINITY;
    for (name, kind) in kinds {
        let curve = mean_over_seeds(
            &obj,
            &reg,
            &reference,
            kind,
            Regime::StronglyConvex,
            passes,
            20,
        );
        let hit = curve.dist_sq.iter().position(|&v| v < 1e-10);
        ok &= hit.is_some();
        // Mean distance must decay monotonically once past burn-in; stop
        // checking near the reference solver's own accuracy floor.
        for k in burn_in..passes {
            if curve.dist_sq[k] <= 1e-18 {
                break;
            }
            worst_ratio = worst_ratio.max(curve.dist_sq[k + 1] / curve.dist_sq[k]);
        }
        match hit {
            Some(h) => write!(detail, "{name} < 1e-10 at pass {h}; ").unwrap(),
            None => write!(detail, "{name} never < 1e-10; ").unwrap(),
        }
    }
    ok &= worst_ratio <= 1.0 + 1e-9;
    let secs = started.elapsed().as_secs_f64();
    ok &= secs < 30.0;
    report(
        7,
        ok,
        &format!(
            "{detail}worst post-burn-in checkpoint ratio {worst_ratio:.6} (limit 1+1e-9); \
             20 seeds, {secs:.1}s (limit 30s)"
        ),
    );
}

#[test]
fn criterion_08_convex_averaged_gap_decay() {
    let data = fourier_design(50, 5, 0.03, 1.0);
    let obj = FiniteSumObjective::new(ObjectiveKind::LeastSquares, &data).unwrap();
    let reg = Regularizer::L1 { beta: 1.0 / 50.0 };
    let x0 = vec![0.0; obj.dim()];
    let reference = solver::reference_solution(
        &obj,
        &reg,
        &x0,
        1.0 / obj.lipschitz_bound(),
        1e-12,
        1_000_000,
    );
    assert!(reference.converged, "reference solve must converge");

    let kinds = [
        ("bsaga(θ=1)", EstimatorKind::BSaga { theta: 1.0 }),
        ("bsaga(θ=2)", EstimatorKind::BSaga { theta: 2.0 }),
        (
            "bsvrg(θ=1)",
            EstimatorKind::BSvrg {
                theta: 1.0,
                epoch_len: 50,
            },
        ),
        ("sarah", EstimatorKind::Sarah { epoch_len: 50 }),
        ("sarge", EstimatorKind::Sarge),
    ];
    let mut ok = true;
    let mut detail = String::new();
    for (name, kind) in kinds {
        let curve = mean_over_seeds(&obj, &reg, &reference, kind, Regime::Convex, 400, 20);
        let g200 = curve.avg_gap[200];
        let g400 = curve.avg_gap[400];
        let ratio = g400 / g200;
        ok &= g200 > 1e-15 && ratio <= 0.6;
        write!(detail, "{name} gap(400n)/gap(200n) = {ratio:.3}; ").unwrap();
    }
    report(
        8,
        ok,
        &format!("{detail}averaged-iterate gap halving ratio ≤ 0.6 over 20 seeds"),
    );
}

#[test]
fn criterion_09_nonconvex_stationarity() {
    let data = fourier_design(50, 5, 0.03, 3.0);
    let obj = FiniteSumObjective::new(ObjectiveKind::NegSquare, &data).unwrap();
    let reg = Regularizer::NonnegativeBall;
    let x0 = positive_unit_start(obj.dim(), 7);
    let kinds = [
        ("bsaga(θ=1)", EstimatorKind::BSaga { theta: 1.0 }),
        (
            "bsvrg(θ=1)",
            EstimatorKind::BSvrg {
                theta: 1.0,
                epoch_len: 50,
            },
        ),
        ("sarah", EstimatorKind::Sarah { epoch_len: 50 }),
        ("sarge", EstimatorKind::Sarge),
    ];
    let passes = 2000usize;
    let mut ok = true;
    let mut detail = String::new();
    for (name, kind) in kinds {
        let config = SolverConfig {
            estimator: kind,
            step: StepPolicy::Theory(Regime::NonConvex),
            iterations: passes * 50,
            record_every: 50,
            seed: 11,
            sarge_cold_start: false,
        };
        let out = solver::run(&obj, &reg, &config, &x0, None).unwrap();
        let best = out
            .checkpoints
            .iter()
            .map(|c| c.gen_grad_norm * c.gen_grad_norm)
            .fold(f64::INFINITY, f64::min);
        ok &= best < 1e-8;
        write!(detail, "{name} min ‖G‖² {best:.3e}; ").unwrap();
    }
    report(
        9,
        ok,
        &format!("{detail}(tol 1e-8 within {passes} passes, half-step gradient map)"),
    );
}

const TOY_8X2: &str = "\
1 1:0.9 2:0.1
-1 1:-0.7 2:0.3
0.5 1:0.2 2:-0.8
-0.5 1:-0.4 2:0.6
1 1:0.8 2:0.5
-1 1:-0.6 2:-0.2
0.25 1:0.1 2:0.7
-0.25 1:-0.3 2:-0.9
";

#[test]
fn criterion_10_sweep_reproducibility() {
    let root = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance_sweep");
    fs::create_dir_all(&root).unwrap();
    let data_path = root.join("toy.libsvm");
    fs::write(&data_path, TOY_8X2).unwrap();

    let run_sweep = |out_dir: &Path| {
        let output = Command::new(env!("CARGO_BIN_EXE_provar"))
            .args([
                "sweep",
                "--data",
                data_path.to_str().unwrap(),
                "--problem",
                "ridge",
                "--estimator",
                "bsaga",
                "--theta",
                "1,10,100,n",
                "--step",
                "paper",
                "--seed",
                "3",
                "--epochs",
                "6",
                "--out",
                out_dir.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(
            output.status.success(),
            "sweep failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
    };

    let dir_a = root.join("a");
    let dir_b = root.join("b");
    run_sweep(&dir_a);
    run_sweep(&dir_b);

    // θ = n resolves to the sample count (8), so four distinct files.
    let stems = [
        "bsaga_theta1",
        "bsaga_theta10",
        "bsaga_theta100",
        "bsaga_theta8",
    ];
    let mut ok = true;
    let mut first_rows: Vec<String> = Vec::new();
    for stem in stems {
        let path_a = dir_a.join(format!("{stem}.csv"));
        let path_b = dir_b.join(format!("{stem}.csv"));
        let a = fs::read_to_string(&path_a).unwrap();
        let b = fs::read(&path_b).unwrap();
        ok &= a.as_bytes() == b.as_slice();

        let mut lines = a.lines();
        ok &= lines.next() == Some(CSV_HEADER);
        let rows: Vec<&str> = lines.collect();
        ok &= rows.len() == 7; // checkpoints at passes 0..=6 of an n = 8 run
        for (k, row) in rows.iter().enumerate() {
            let fields: Vec<&str> = row.split(',').collect();
            ok &= fields.len() == 7;
            ok &= fields[0].parse::<usize>() == Ok(k * 8);
            ok &= fields[1].parse::<u64>().is_ok();
            ok &= fields[2..]
                .iter()
                .all(|f| f.parse::<f64>().map(|v| v.is_finite()).unwrap_or(false));
        }
        first_rows.push(rows.first().copied().unwrap_or("").to_string());
    }
    // Shared seed and starting point: the pass-0 row is identical across θ.
    ok &= first_rows
        .iter()
        .all(|r| !r.is_empty() && r == &first_rows[0]);
    report(
        10,
        ok,
        "four θ-sweep CSVs valid (header, 7 rows, stride-8 iterations), pass-0 row shared \
         across θ, byte-identical on rerun",
    );
}

#[test]
fn criterion_11_epoch_mse_bounds_on_enumerated_trajectories() {
    let mut rng = SplitMix64::new(1111);
    let n = 3usize;
    let data = random_dataset(&mut rng, n, 2);
    let obj = FiniteSumObjective::new(ObjectiveKind::LeastSquares, &data).unwrap();
    let reg = Regularizer::SquaredL2 { beta: 0.25 };
    let x0 = random_vec(&mut rng, 2);
    let eta = 0.05;
    let nf = n as f64;

    // Stored-gradient table: the explicit envelope M_k = D_k/θ² (with D_k
    // the mean squared table drift) dominates the exact MSE at every step
    // and itself contracts geometrically up to the successive-gradient
    // term, with the published constants ρ_M = 1/(2n), M₁ = (2n+1)/θ².
    let mut constants_ok = true;
    let mut worst_step = f64::NEG_INFINITY;
    let mut worst_recursion = f64::NEG_INFINITY;
    for theta in [1.0f64, 2.0] {
        let kind = EstimatorKind::BSaga { theta };
        let c = bmse_constants(kind, n).unwrap();
        constants_ok &= c.rho_m == 1.0 / (2.0 * nf);
        constants_ok &= c.m1 == (2.0 * nf + 1.0) / (theta * theta);
        let traj = trajectory_expectation(&obj, &reg, kind, &x0, eta, 5).unwrap();
        let envelope: Vec<f64> = traj
            .steps
            .iter()
            .map(|s| s.table_dist_sq / (theta * theta))
            .collect();
        for (k, step) in traj.steps.iter().enumerate() {
            worst_step = worst_step.max(step.mse - envelope[k]);
            if k > 0 {
                let bound =
                    (1.0 - c.rho_m) * envelope[k - 1] + c.m1 * traj.steps[k - 1].grad_diff_sq;
                worst_recursion = worst_recursion.max(envelope[k] - bound);
            }
        }
    }

    // Recursive estimator: accumulated MSE within each epoch is bounded by
    // m times the accumulated successive-gradient differences.
    let kind = EstimatorKind::Sarah { epoch_len: 2 };
    let c = bmse_constants(kind, n).unwrap();
    let traj = trajectory_expectation(&obj, &reg, kind, &x0, eta, 4).unwrap();
    let mut worst_epoch = f64::NEG_INFINITY;
    for chunk in traj.steps.chunks(2) {
        let mse_sum: f64 = chunk.iter().map(|s| s.mse).sum();
        let drift_sum: f64 = chunk.iter().map(|s| s.grad_diff_sq).sum();
        worst_epoch = worst_epoch.max(mse_sum - c.m1 * drift_sum);
    }

    let ok =
        constants_ok && worst_step <= 1e-12 && worst_recursion <= 1e-12 && worst_epoch <= 1e-12;
    report(
        11,
        ok,
        &format!(
            "one-step MSE ≤ envelope slack {worst_step:.3e}; envelope recursion slack \
             {worst_recursion:.3e} with ρ_M = 1/(2n), M₁ = (2n+1)/θ²; within-epoch \
             accumulated-MSE slack {worst_epoch:.3e} (all ≤ 1e-12)"
        ),
    );
}
