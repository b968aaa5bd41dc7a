mod common;

use common::{ball_optimum, ball_radius, disk_first_mode_normal_derivative};
use shapeopt::domain::{extract_boundary, shapes, Grid, GridDomain};
use shapeopt::objective::{grad_fp, ObjectiveSpec, PenaltySpec, RegularizationParams, WeightVector, Xi0Field, DEFAULT_S};
use shapeopt::optimizer::{optimize, p_continuation, shape_velocity, Optimizer, OptimizerConfig, StepOutcome, StopReason, DESCENT_SLACK};
use shapeopt::spectral::{solve_spectrum, SpectrumOptions, CLUSTER_REL_GAP};

fn ball(r: f64, n: usize) -> GridDomain {
    shapes::disk(Grid::square(-2.5, 2.5, n).unwrap(), [0.0, 0.0], r).unwrap()
}

fn lambda1_velocity(d: &GridDomain, p: f64) -> Vec<f64> {
    let sp = solve_spectrum(d, &SpectrumOptions::new(1)).unwrap();
    let xi = grad_fp(&ObjectiveSpec::single(1).unwrap(), &sp.lambdas, &RegularizationParams::new(p).unwrap()).unwrap();
    let w = WeightVector::new(xi, &sp.lambdas, CLUSTER_REL_GAP, Xi0Field::constant());
    let bm = extract_boundary(d);
    shape_velocity(&sp, &w, &bm, d).into_iter().flatten().collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

#[test]
fn optimal_ball_is_nearly_stationary() {
    let v = lambda1_velocity(&ball(ball_radius(), 160), 64.0);
    assert!(median(v.iter().map(|x| x.abs()).collect()) <= 0.1);
}

#[test]
fn oversized_ball_shrinks_everywhere() {
    let r = 2.0 * ball_radius();
    let v = lambda1_velocity(&ball(r, 128), 64.0);
    assert!(!v.is_empty());
    assert!(v.iter().all(|&x| x < 0.0), "max V = {}", v.iter().fold(f64::MIN, |m, x| m.max(*x)));
    // (1 + 1/p) u_ν² - 1 with the radial oracle for u_ν
    let exact = (1.0 + 1.0 / 64.0) * disk_first_mode_normal_derivative(r).powi(2) - 1.0;
    assert!((median(v) - exact).abs() <= 0.05, "{exact}");
}

#[test]
fn one_step_from_a_nonoptimal_ball_descends() {
    for r in [0.8 * ball_radius(), 1.3 * ball_radius()] {
        let cfg = OptimizerConfig::new(ObjectiveSpec::single(1).unwrap(), 32.0).unwrap();
        let mut opt = Optimizer::new(cfg, ball(r, 96)).unwrap();
        let before = opt.state().objective;
        match opt.step().unwrap() {
            StepOutcome::Accepted { decrease, .. } => assert!(decrease > 0.0),
            other => panic!("r={r}: {other:?}"),
        }
        assert!(opt.state().objective < before);
    }
}

#[test]
fn optimal_ball_converges_within_five_steps() {
    let cfg = OptimizerConfig::new(ObjectiveSpec::single(1).unwrap(), 64.0).unwrap();
    let trace = optimize(&cfg, ball(ball_radius(), 128)).unwrap();
    assert_eq!(trace.stop, StopReason::Converged);
    assert!(trace.records.len() - 1 <= 5, "{} steps", trace.records.len() - 1);
}

#[test]
fn blob_run_descends_and_finds_the_ball() {
    let g = Grid::square(-2.0, 2.0, 96).unwrap();
    let init = shapes::random_blob(g, [0.1, -0.05], 0.9, 0.35, 11).unwrap();
    let cfg = OptimizerConfig::new(ObjectiveSpec::single(1).unwrap(), 32.0).unwrap();
    let trace = optimize(&cfg, init).unwrap();
    assert!(trace.converged(), "{:?}", trace.stop);
    for w in trace.records.windows(2) {
        assert!(w[1].objective <= w[0].objective + DESCENT_SLACK, "{} -> {}", w[0].objective, w[1].objective);
        assert!(w[1].volume > 0.0);
    }
    let plain = trace.state.plain_objective(&cfg.spec).unwrap();
    assert!((plain - ball_optimum()).abs() <= 0.02 * ball_optimum(), "{plain}");
}

#[test]
fn identical_seeds_give_identical_traces() {
    let run = || {
        let g = Grid::square(-2.0, 2.0, 64).unwrap();
        let init = shapes::random_blob(g, [0.0, 0.0], 0.9, 0.3, 5).unwrap();
        let mut cfg = OptimizerConfig::new(ObjectiveSpec::single(1).unwrap(), 16.0).unwrap();
        cfg.max_steps = 12;
        cfg.seed = 5;
        optimize(&cfg, init).unwrap().to_csv()
    };
    assert_eq!(run(), run());
}

#[test]
fn lambda1_continuation_weights_follow_closed_form() {
    let g = Grid::square(-2.0, 2.0, 96).unwrap();
    let init = shapes::random_blob(g, [0.0, 0.0], 0.9, 0.3, 2).unwrap();
    let cfg = OptimizerConfig::new(ObjectiveSpec::single(1).unwrap(), 4.0).unwrap();
    let run = p_continuation(&cfg, init, &[4.0, 8.0, 16.0, 32.0]);
    assert!(run.error.is_none(), "{:?}", run.error);
    assert_eq!(run.stages.len(), 4);
    for t in &run.stages {
        let xi = t.state.weights.xi[0];
        assert!((xi - (1.0 + 1.0 / t.p)).abs() <= 1e-12, "p={}: {xi}", t.p);
    }
}

fn two_blob_continuation() -> shapeopt::optimizer::Continuation {
    let g = Grid::square(-2.75, 2.75, 96).unwrap();
    let init = shapes::two_blobs(g, [[-1.3, 0.1], [1.25, -0.1]], [0.75, 0.9], 0.25, 3).unwrap();
    let mut cfg = OptimizerConfig::new(ObjectiveSpec::single(2).unwrap(), 8.0).unwrap();
    cfg.pen = PenaltySpec::new(DEFAULT_S).unwrap();
    cfg.seed = 3;
    p_continuation(&cfg, init, &[8.0, 16.0, 32.0, 64.0])
}

#[test]
fn lambda2_continuation_properties() {
    let run = two_blob_continuation();
    assert!(run.error.is_none(), "{:?}", run.error);
    let stages = &run.stages;
    assert_eq!(stages.len(), 4);

    // ξ₁ loses weight as p grows
    let xi1: Vec<f64> = stages.iter().map(|t| t.state.weights.xi[0]).collect();
    assert!(xi1.windows(2).all(|w| w[1] < w[0]), "{xi1:?}");

    // the pair stays distinct at every stage, though the gap may shrink
    for t in stages {
        let l = &t.state.spectrum.lambdas;
        assert!(l[1] > l[0], "p={}: {l:?}", t.p);
        assert_eq!(t.state.domain.component_count(), 2);
    }

    // the anchoring penalty does not grow over the last two stages
    let e: Vec<f64> = stages.iter().map(|t| t.state.penalty).collect();
    assert!(e[3] <= e[2] + 1e-9, "{e:?}");

    // diameter stays put across the schedule
    let diam = |d: &GridDomain| {
        let bm = extract_boundary(d);
        let xs = bm.points.iter().map(|p| p[0]);
        let (lo, hi) = xs.fold((f64::MAX, f64::MIN), |(a, b), x| (a.min(x), b.max(x)));
        hi - lo
    };
    let d0 = diam(&stages[0].state.domain);
    for t in stages {
        assert!((diam(&t.state.domain) - d0).abs() <= 0.1 * d0);
    }
}

#[test]
fn lambda2_weights_on_a_fixed_simple_spectrum_concentrate_on_the_top() {
    // with the spectrum frozen at the first stage, p → ∞ moves weight to ξ₂;
    // below p = 16, and again once ξ₂ nears 1 + 1/p, the 1/p term dominates
    let run = two_blob_continuation();
    let kappa = run.stages[0].state.spectrum.lambdas[..2].to_vec();
    assert!(kappa[1] - kappa[0] >= CLUSTER_REL_GAP * kappa[1], "{kappa:?}");
    let spec = ObjectiveSpec::single(2).unwrap();
    let xi: Vec<Vec<f64>> = [16.0, 32.0, 64.0, 256.0]
        .iter()
        .map(|&p| grad_fp(&spec, &kappa, &RegularizationParams::new(p).unwrap()).unwrap())
        .collect();
    assert!(xi.windows(2).all(|w| w[1][0] < w[0][0]), "{xi:?}");
    assert!(xi.windows(2).all(|w| w[1][1] > w[0][1]), "{xi:?}");
    let last = xi.last().unwrap();
    assert!(last[0] <= 0.05 && (0.95..=1.02).contains(&last[1]), "{last:?}");
}
