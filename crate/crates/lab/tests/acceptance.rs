//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::path::Path;
use std::time::{Duration, Instant};

use gesmr::analysis::{
    group_size_ablation, min_normal_expectation, mr_objective_curves, sample_delta, theorem_check, DeltaSampling,
    XSource,
};
use gesmr::controllers::{default_groups, GesmrParams, SamrParams};
use gesmr::oracles::{ofmr_search, MrGrid};
use gesmr::rng::Purpose;
use gesmr::stats::{log_space, median};
use gesmr::{ControllerSpec, Evolution, EvolutionParams, GenerationTrace, Objective, RngStream};
use gesmr_lab::config::{Algorithm, GridSettings, GroupSettings, ObjectiveConfig, SelfAdaptSettings};
use gesmr_lab::{compare, run, RunConfig, TraceSet};

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

type Criterion = (&'static str, Duration, Box<dyn Fn() -> Verdict>);

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn outcome(obj: &Objective, spec: &ControllerSpec, params: EvolutionParams) -> Vec<GenerationTrace> {
    Evolution::new(obj, params, spec.build(obj, &params).unwrap()).unwrap().run().unwrap().traces
}

/// Median over seeds of (final geometric-mean σ, final elite).
fn final_medians(obj: &Objective, spec: &ControllerSpec, n: usize, generations: usize) -> (f64, f64) {
    let (mut mr, mut elite) = (Vec::new(), Vec::new());
    for seed in SEEDS {
        let traces = outcome(obj, spec, EvolutionParams::new(n, generations, seed));
        let last = traces.last().unwrap();
        mr.push(last.mr.geometric_mean());
        elite.push(last.elite_value);
    }
    (median(&mr), median(&elite))
}

fn invariant_suite() -> Verdict {
    let mut failures = Vec::new();
    let mut runs = 0;
    for obj_name in ["sphere", "ackley"] {
        for d in [2, 10] {
            let obj = Objective::by_name(obj_name, d, 1).unwrap();
            for n in [16, 64] {
                for seed in [1u64, 2, 3] {
                    let g = 100;
                    let params = EvolutionParams::new(n, g, seed);
                    for spec in ControllerSpec::roster(n) {
                        let tag = format!("{} {obj_name} d={d} N={n} seed={seed}", spec.name());
                        let traces = outcome(&obj, &spec, params);
                        runs += 1;
                        if traces.windows(2).any(|w| w[1].elite_value > w[0].elite_value) {
                            failures.push(format!("elite rose: {tag}"));
                        }
                        if traces.iter().any(|t| t.mr.min.is_nan() || t.mr.min <= 1e-300) {
                            failures.push(format!("rate not positive: {tag}"));
                        }
                        if traces[g].cumulative_evaluations != (n * g + n + 1) as u64 {
                            failures.push(format!("evaluation count: {tag}"));
                        }
                        if traces != outcome(&obj, &spec, params) {
                            failures.push(format!("not reproducible: {tag}"));
                        }
                    }
                    let single = ControllerSpec::Gesmr(GesmrParams::new(1));
                    let mut evo = Evolution::new(&obj, params, single.build(&obj, &params).unwrap()).unwrap();
                    let start = evo.controller().rates();
                    for _ in 0..g {
                        evo.step().unwrap();
                        if evo.controller().rates() != start {
                            failures.push(format!("K=1 pool moved: {obj_name} d={d} N={n} seed={seed}"));
                            break;
                        }
                    }
                    let a = outcome(&obj, &ControllerSpec::Gesmr(GesmrParams::new(n)), params);
                    let b = outcome(&obj, &ControllerSpec::Gesmr(GesmrParams::new(n).averaged()), params);
                    if a != b {
                        failures.push(format!("K=N min/mean differ: {obj_name} d={d} N={n} seed={seed}"));
                    }
                }
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("{runs} runs, all invariants hold")
    } else {
        format!("{} violations, first: {}", failures.len(), failures[0])
    };
    verdict(failures.is_empty(), detail)
}

fn theorem() -> Verdict {
    let check = theorem_check(10, &[0.5, 1.0, 2.0, 4.0], 1_000_000, 0.02, 1).unwrap();
    let mut rng = RngStream::new(2).substream(Purpose::Sampling, 0, 0);
    let two = min_normal_expectation(2, 1.0, 1_000_000, &mut rng).unwrap();
    let target = -1.0 / std::f64::consts::PI.sqrt();
    let ok = check.all_negative() && check.passed() && (two - target).abs() <= 0.005;
    verdict(
        ok,
        format!(
            "q=10 normalized {:?}, spread {:.3}%; q=2 estimate {two:.5} vs {target:.5}",
            check.normalized.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
            100.0 * check.relative_spread
        ),
    )
}

fn outlier_shape() -> Verdict {
    let obj = Objective::ackley(2).unwrap();
    let grid = log_space(1e-4, 1e2, 33);
    let hist =
        sample_delta(&obj, &XSource::StandardNormal, &grid, &DeltaSampling::new(20_000, 16), &RngStream::new(1)).unwrap();
    let curves = mr_objective_curves(&hist);
    let i_min = curves.sigma_star_min_index();
    let interior = i_min > 0 && i_min < grid.len() - 1;
    let ok = interior && curves.outlier_curve[i_min] < 0.0 && curves.sigma_star_mean == grid[0];
    verdict(
        ok,
        format!(
            "sigma*_min = {:.3e} (index {i_min}, E[min] = {:.4}), sigma*_mean = {:.1e}",
            curves.sigma_star_min, curves.outlier_curve[i_min], curves.sigma_star_mean
        ),
    )
}

fn vanishing_rates() -> Verdict {
    let obj = Objective::rastrigin(100).unwrap();
    let n = 100;
    let (g_mr, g_elite) = final_medians(&obj, &ControllerSpec::Gesmr(GesmrParams::new(default_groups(n))), n, 1000);
    let (s_mr, s_elite) = final_medians(&obj, &ControllerSpec::Samr(SamrParams::default()), n, 1000);
    verdict(
        g_mr > s_mr && g_elite < s_elite,
        format!("final MR gesmr {g_mr:.3e} vs samr {s_mr:.3e}; final elite gesmr {g_elite:.2} vs samr {s_elite:.2}"),
    )
}

fn linear_escalation() -> Verdict {
    let obj = Objective::linear(10).unwrap();
    let (mr, _) = final_medians(&obj, &ControllerSpec::gesmr_default(64), 64, 300);
    verdict(mr > 1e2, format!("median final MR {mr:.3e}"))
}

fn group_size_shape() -> Verdict {
    let obj = Objective::ackley(100).unwrap();
    let base = EvolutionParams::new(64, 500, 0);
    let rows = group_size_ablation(&obj, &[64], &SEEDS, &base, &GesmrParams::new(1)).unwrap();
    let at = |k: usize| rows.iter().find(|r| r.groups == k).unwrap().median_final_elite;
    let (k1, k8, k64) = (at(1), at(8), at(64));
    verdict(k8 < k1 && k8 < k64, format!("median final elite K=1 {k1:.4}, K=8 {k8:.4}, K=64 {k64:.4}"))
}

fn lab_config(name: &str, algorithm: Algorithm) -> RunConfig {
    RunConfig {
        objective: ObjectiveConfig::new(name, 10),
        init_std: 1.0,
        algorithm,
        population_size: 64,
        selection_rate: 0.5,
        generations: 500,
        seeds: SEEDS.to_vec(),
    }
}

fn mr_error_table(dir: &Path) -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for name in ["ackley", "rastrigin"] {
        let lamr = Algorithm::Lamr { period: 50, repeats: 3, grid: GridSettings::default() };
        let algorithms = [
            ("lamr", lamr),
            ("gesmr", Algorithm::Gesmr(GroupSettings::default())),
            ("samr", Algorithm::Samr(SelfAdaptSettings::default())),
        ];
        let mut sets = Vec::new();
        for (tag, algorithm) in algorithms {
            let out = dir.join(format!("{name}-{tag}"));
            run(&lab_config(name, algorithm), &out).unwrap();
            sets.push(TraceSet::load(&out).unwrap());
        }
        let rows = compare(&sets[1..], &sets[0]).unwrap();
        let (g, s) = (rows[0].median_log_mr_mse(), rows[1].median_log_mr_mse());
        ok &= g <= s;
        parts.push(format!("{name}: gesmr {g:.3} vs samr {s:.3}"));
    }
    verdict(ok, format!("median log-MR MSE against the look-ahead reference, {}", parts.join("; ")))
}

fn oracle_sanity() -> Verdict {
    let obj = Objective::linear(10).unwrap();
    let grid = MrGrid::log_spaced(1e-2, 1e2, 5).unwrap();
    let out = ofmr_search(&grid, &obj, &EvolutionParams::new(64, 100, 0), &SEEDS).unwrap();
    let largest = out.best_sigma == *grid.values().last().unwrap();
    let argmin = out.medians.iter().all(|m| out.medians[out.best_index] <= *m);
    verdict(largest && argmin, format!("selected {:e} from {:?}", out.best_sigma, grid.values()))
}

fn mlp_task() -> Verdict {
    // Each seed trains on its own dataset, shared by both algorithms.
    let final_loss = |spec: &ControllerSpec| {
        let finals: Vec<f64> = SEEDS
            .iter()
            .map(|&seed| {
                let obj = Objective::by_name("mlp", 33, seed).unwrap();
                outcome(&obj, spec, EvolutionParams::new(64, 500, seed)).last().unwrap().elite_value
            })
            .collect();
        median(&finals)
    };
    let gesmr = final_loss(&ControllerSpec::gesmr_default(64));
    let fmr = final_loss(&ControllerSpec::Fixed { sigma: 0.01 });
    verdict(gesmr <= fmr, format!("median final loss gesmr {gesmr:.5e} vs fmr(0.01) {fmr:.5e}"))
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let dir_path = dir.path().to_path_buf();
    let criteria: Vec<Criterion> = vec![
        ("invariant suite", Duration::from_secs(60), Box::new(invariant_suite)),
        ("expected-minimum scaling", Duration::from_secs(30), Box::new(theorem)),
        ("outlier objective shape on Ackley-2", Duration::from_secs(60), Box::new(outlier_shape)),
        ("vanishing rates on Rastrigin-100", Duration::from_secs(300), Box::new(vanishing_rates)),
        ("linear rate escalation", Duration::from_secs(60), Box::new(linear_escalation)),
        ("group-size U-shape on Ackley-100", Duration::from_secs(300), Box::new(group_size_shape)),
        ("log-MR error against look-ahead", Duration::from_secs(900), Box::new(move || mr_error_table(&dir_path))),
        ("oracle sanity", Duration::from_secs(120), Box::new(oracle_sanity)),
        ("MLP task against fixed rate", Duration::from_secs(120), Box::new(mlp_task)),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let passed = v.passed && elapsed <= *budget;
        if !passed {
            failed += 1;
        }
        println!(
            "{} criterion {} ({name}): {} [{:.1}s of {}s]",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    drop(dir);
    if failed > 0 {
        std::process::exit(1);
    }
}

