use std::sync::OnceLock;

use cdkit::data::{
    generate_linear_regression, parse_libsvm, read_dataset, write_dataset, write_libsvm, Dataset, SyntheticSpec,
    TaskKind,
};
use cdkit::matrix::{CscMatrix, Design};
use cdkit::numerics::{weighted_dist_sq, Smoothness};
use cdkit::objectives::{GradientCache, Iterate, LeastSquaresProblem, LogisticProblem, MuMode, Objective, Point};
use cdkit::rng::ShiftRng;
use cdkit::solvers::{run, select_greedy, Method, Mode, Rule, RunOptions};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn random_ls(seed: u64) -> LeastSquaresProblem {
    let mut rng = ShiftRng::new(seed);
    let n = 3 + rng.uniform_index(15);
    let p = 1 + rng.uniform_index(8);
    let x = DMatrix::from_row_slice(n, p, &rng.normal_vec(n * p));
    LeastSquaresProblem::new(x, rng.normal_vec(n)).unwrap()
}

fn random_logistic(seed: u64) -> LogisticProblem {
    let mut rng = ShiftRng::new(seed);
    let n = 3 + rng.uniform_index(15);
    let p = 1 + rng.uniform_index(8);
    let sparse = rng.next_f64() < 0.5;
    let mut rows = vec![Vec::new(); n];
    for row in rows.iter_mut() {
        for j in 0..p {
            if !sparse || rng.next_f64() < 0.4 {
                row.push((j, 3.0 * rng.normal()));
            }
        }
    }
    for j in 0..p {
        if !rows.iter().any(|r| r.iter().any(|&(c, _)| c == j)) {
            rows[0].push((j, 1.0));
            rows[0].sort_by_key(|e| e.0);
        }
    }
    let csc = CscMatrix::from_rows(n, p, &rows);
    let design = if sparse { Design::Sparse(csc) } else { Design::Dense(csc.to_dense()) };
    let labels = (0..n).map(|_| if rng.next_f64() < 0.5 { 1.0 } else { -1.0 }).collect();
    LogisticProblem::new(design, labels).unwrap()
}

fn both(seed: u64) -> [Box<dyn Objective>; 2] {
    [Box::new(random_ls(seed)), Box::new(random_logistic(seed))]
}

fn point(problem: &dyn Objective, seed: u64, scale: f64) -> Vec<f64> {
    let mut rng = ShiftRng::new(seed ^ 0x9e37_79b9);
    rng.normal_vec(problem.dim()).into_iter().map(|v| v * scale).collect()
}

fn kappa_100() -> &'static (LeastSquaresProblem, f64) {
    static CELL: OnceLock<(LeastSquaresProblem, f64)> = OnceLock::new();
    CELL.get_or_init(|| {
        let ds = generate_linear_regression(&SyntheticSpec {
            n_samples: 200,
            dim: 100,
            kappa: 100.0,
            sigma: 1.0,
            seed: 7,
        })
        .unwrap();
        let problem = LeastSquaresProblem::new(ds.matrix.to_dense(), ds.target).unwrap();
        let mu = problem.strong_convexity(MuMode::Exact).unwrap();
        (problem, mu)
    })
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn finite_f64() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

fn rows_bits(d: &Dataset) -> Vec<Vec<(usize, u64)>> {
    d.matrix
        .to_rows()
        .into_iter()
        .map(|r| r.into_iter().map(|(j, v)| (j, v.to_bits())).collect())
        .collect()
}

fn dataset_strategy() -> impl Strategy<Value = Dataset> {
    (1usize..8, 1usize..6, any::<bool>(), any::<bool>()).prop_flat_map(|(n, p, sparse, classification)| {
        let cells = prop::collection::vec(prop::option::weighted(if sparse { 0.5 } else { 0.9 }, finite_f64()), n * p);
        let target = prop::collection::vec(
            if classification { prop_oneof![Just(1.0), Just(-1.0)].boxed() } else { finite_f64().boxed() },
            n,
        );
        let truth = prop::option::of(prop::collection::vec(finite_f64(), p));
        (cells, target, truth).prop_map(move |(cells, target, ground_truth)| {
            let rows: Vec<Vec<(usize, f64)>> = cells
                .chunks(p)
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter_map(|(j, v)| match (v, sparse) {
                            (Some(0.0), true) => Some((j, 1.0)),
                            (Some(v), _) => Some((j, *v)),
                            (None, true) => None,
                            (None, false) => Some((j, 0.0)),
                        })
                        .collect()
                })
                .collect();
            let csc = CscMatrix::from_rows(n, p, &rows);
            Dataset {
                matrix: if sparse { Design::Sparse(csc) } else { Design::Dense(csc.to_dense()) },
                target,
                kind: if classification { TaskKind::Classification } else { TaskKind::Regression },
                ground_truth,
            }
        })
    })
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn coordinate_gradients_are_lipschitz(seed in any::<u64>(), h in -5.0f64..5.0) {
        for problem in both(seed) {
            let beta = point(problem.as_ref(), seed, 2.0);
            let i = (seed % problem.dim() as u64) as usize;
            let mut moved = beta.clone();
            moved[i] += h;
            let g0 = problem.full_gradient(&beta).unwrap()[i];
            let g1 = problem.full_gradient(&moved).unwrap()[i];
            let li = problem.smoothness().get(i);
            prop_assert!((g1 - g0).abs() <= li * h.abs() * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn one_coordinate_quadratic_upper_bound(seed in any::<u64>(), h in -5.0f64..5.0) {
        for problem in both(seed) {
            let beta = point(problem.as_ref(), seed, 2.0);
            let i = (seed % problem.dim() as u64) as usize;
            let mut moved = beta.clone();
            moved[i] += h;
            let f0 = problem.value(&beta).unwrap();
            let gi = problem.full_gradient(&beta).unwrap()[i];
            let upper = f0 + h * gi + 0.5 * h * h * problem.smoothness().get(i);
            let f1 = problem.value(&moved).unwrap();
            prop_assert!(f1 <= upper + 1e-10 * (1.0 + f0.abs()), "{} > {}", f1, upper);
        }
    }

    #[test]
    fn strong_convexity_in_weighted_norm(seed in any::<u64>(), spread in 0.01f64..10.0) {
        let (problem, mu) = kappa_100();
        let u = point(problem, seed, 1.0);
        let v = point(problem, seed.wrapping_add(1), spread);
        let gu = problem.full_gradient(&u).unwrap();
        let inner: f64 = gu.iter().zip(v.iter().zip(&u)).map(|(g, (a, b))| g * (a - b)).sum();
        let lower = problem.value(&u).unwrap() + inner + 0.5 * mu * weighted_dist_sq(&v, &u, problem.smoothness()).unwrap();
        let fv = problem.value(&v).unwrap();
        prop_assert!(fv >= lower - 1e-9 * fv.abs().max(1.0), "{} < {}", fv, lower);
    }
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn gradient_matches_central_differences(seed in any::<u64>()) {
        for problem in both(seed) {
            let beta = point(problem.as_ref(), seed, 1.0);
            let g = problem.full_gradient(&beta).unwrap();
            let h = 1e-5;
            let fd: Vec<f64> = (0..beta.len())
                .map(|i| {
                    let (mut a, mut b) = (beta.clone(), beta.clone());
                    a[i] += h;
                    b[i] -= h;
                    (problem.value(&a).unwrap() - problem.value(&b).unwrap()) / (2.0 * h)
                })
                .collect();
            let diff = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let norm = g.iter().map(|a| a * a).sum::<f64>().sqrt().max(fd.iter().map(|a| a * a).sum::<f64>().sqrt());
            prop_assert!(diff <= 1e-6 * norm.max(1e-3), "relative error {}", diff / norm);
        }
    }

    #[test]
    fn lazy_combination_matches_explicit_point(
        seed in any::<u64>(),
        steps in prop::collection::vec((any::<bool>(), any::<u16>(), -2.0f64..2.0), 0..200),
        t in 0.0f64..=1.0,
    ) {
        for problem in both(seed) {
            let p = problem.dim();
            let mut cache = GradientCache::new(problem.as_ref(), point(problem.as_ref(), seed, 1.0)).unwrap();
            for &(on_x, i, h) in &steps {
                let which = if on_x { Iterate::X } else { Iterate::Z };
                cache.apply_coordinate_step(problem.as_ref(), which, i as usize % p, h).unwrap();
            }
            prop_assert!(cache.max_deviation(problem.as_ref()) <= 1e-8);
            let y: Vec<f64> = cache.x().iter().zip(cache.z()).map(|(a, b)| (1.0 - t) * a + t * b).collect();
            let fresh = problem.full_gradient(&y).unwrap();
            for (i, g) in fresh.iter().enumerate() {
                let cached = cache.coordinate_gradient(problem.as_ref(), Point::Combination(t), i).unwrap();
                prop_assert!((cached - g).abs() <= 1e-8 * (1.0 + g.abs()));
            }
        }
    }

    #[test]
    fn greedy_is_first_maximizer_of_scaled_magnitude(
        entries in prop::collection::vec((-3i32..=3, 1u32..5), 1..40),
    ) {
        // Small integer grid forces frequent ties.
        let g: Vec<f64> = entries.iter().map(|e| e.0 as f64).collect();
        let l = Smoothness::new(entries.iter().map(|e| (e.1 * e.1) as f64).collect()).unwrap();
        let score = |i: usize| g[i].abs() / entries[i].1 as f64;
        let best = (0..g.len()).map(score).fold(f64::NEG_INFINITY, f64::max);
        let expected = (0..g.len()).find(|&i| score(i) == best).unwrap();
        prop_assert_eq!(select_greedy(&g, &l), expected);
    }

    #[test]
    fn container_roundtrip_is_bit_exact(ds in dataset_strategy()) {
        let mut buf = Vec::new();
        write_dataset(&ds, &mut buf).unwrap();
        let back = read_dataset(buf.as_slice()).unwrap();
        prop_assert_eq!(back.kind, ds.kind);
        prop_assert_eq!(back.matrix.is_sparse(), ds.matrix.is_sparse());
        prop_assert_eq!(back.matrix.ncols(), ds.matrix.ncols());
        prop_assert_eq!(rows_bits(&back), rows_bits(&ds));
        prop_assert_eq!(bits(&back.target), bits(&ds.target));
        prop_assert_eq!(back.ground_truth.as_deref().map(bits), ds.ground_truth.as_deref().map(bits));
    }

    #[test]
    fn libsvm_parser_accepts_serializer_output(ds in dataset_strategy()) {
        prop_assume!(ds.kind == TaskKind::Classification);
        let mut buf = Vec::new();
        write_libsvm(&ds, &mut buf).unwrap();
        let back = parse_libsvm(buf.as_slice()).unwrap();
        prop_assert_eq!(bits(&back.target), bits(&ds.target));
        let nonzero = |d: &Dataset| -> Vec<Vec<(usize, u64)>> {
            rows_bits(d).into_iter().map(|r| r.into_iter().filter(|e| f64::from_bits(e.1) != 0.0).collect()).collect()
        };
        prop_assert_eq!(nonzero(&back), nonzero(&ds));
    }

    #[test]
    fn traces_have_increasing_k_and_nondecreasing_time(
        seed in any::<u64>(),
        iters in 0usize..300,
        period in 1usize..20,
        method_ix in 0usize..7,
    ) {
        let problem = random_ls(seed);
        let mu = 0.5 * problem.strong_convexity(MuMode::SmallestPositive).unwrap();
        let rules = [Rule::Greedy, Rule::SemiGreedy, Rule::Random];
        let method = if method_ix == 6 {
            Method::GreedyBaseline
        } else {
            let mode = if method_ix % 2 == 0 { Mode::Plain } else { Mode::Strong { mu } };
            Method::Accelerated { rule: rules[method_ix / 2], mode }
        };
        let trace = run(&problem, method, &RunOptions { iters, seed, record_period: period, ..Default::default() }).unwrap();
        prop_assert_eq!(trace.records[0].k, 0);
        prop_assert_eq!(trace.last().k, iters);
        for w in trace.records.windows(2) {
            prop_assert!(w[0].k < w[1].k);
            prop_assert!(w[0].elapsed_seconds <= w[1].elapsed_seconds);
        }
    }
}
