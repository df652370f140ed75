//! Distance routines checked against independent oracles: factorial
//! enumeration of couplings, finite differences and Monte-Carlo expectations.

use proptest::prelude::*;
use rand::Rng;
use swae::ot::{
    exact_wasserstein_small, project, sliced_wasserstein, sliced_wasserstein_estimate,
    sliced_wasserstein_gradient, wasserstein_1d,
};
use swae::sampling::sample_unit_sphere;
use swae::{CostExponent, Matrix, PointCloud, ProjectionSet, RngSeed};

/// Minimum over all `N!` permutations of the mean paired cost.
fn brute_force_wpp(a: &PointCloud<f64>, b: &PointCloud<f64>, p: CostExponent) -> f64 {
    let n = a.n();
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let sq: f64 = a
                        .point(i)
                        .iter()
                        .zip(b.point(j))
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum();
                    match p {
                        CostExponent::One => sq.sqrt(),
                        CostExponent::Two => sq,
                    }
                })
                .collect()
        })
        .collect();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    permute(&mut perm, 0, &cost, &mut best);
    best / n as f64
}

fn permute(perm: &mut Vec<usize>, k: usize, cost: &[Vec<f64>], best: &mut f64) {
    if k == perm.len() {
        let total: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        if total < *best {
            *best = total;
        }
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute(perm, k + 1, cost, best);
        perm.swap(k, i);
    }
}

fn random_cloud<R: Rng>(rng: &mut R, n: usize, d: usize) -> PointCloud<f64> {
    let data = (0..n * d).map(|_| rng.random_range(-2.0..2.0)).collect();
    PointCloud::new(Matrix::from_vec(n, d, data).unwrap()).unwrap()
}

#[test]
fn exact_solver_matches_enumeration() {
    let mut rng = RngSeed(100).stream(0);
    for trial in 0..1000 {
        let n = rng.random_range(1..=8);
        let d = rng.random_range(1..=4);
        let p = if trial % 2 == 0 {
            CostExponent::Two
        } else {
            CostExponent::One
        };
        let a = random_cloud(&mut rng, n, d);
        let b = random_cloud(&mut rng, n, d);
        let exact = exact_wasserstein_small(&a, &b, p).unwrap();
        let brute = brute_force_wpp(&a, &b, p);
        assert!(
            (exact - brute).abs() < 1e-10,
            "trial {trial}: {exact} vs {brute}"
        );
        // symmetry of the assignment path is exact up to summation order
        let back = exact_wasserstein_small(&b, &a, p).unwrap();
        assert!((exact - back).abs() < 1e-12);
    }
}

#[test]
fn one_dimensional_routes_agree() {
    let mut rng = RngSeed(101).stream(0);
    let plus = ProjectionSet::from_rows(&[[1.0]]).unwrap();
    for _ in 0..300 {
        let n = rng.random_range(1..=8);
        let a = random_cloud(&mut rng, n, 1);
        let b = random_cloud(&mut rng, n, 1);
        for p in [CostExponent::One, CostExponent::Two] {
            let sw = sliced_wasserstein(&a, &b, &plus, p).unwrap();
            let w1 = wasserstein_1d(a.points().as_slice(), b.points().as_slice(), p).unwrap();
            let exact = exact_wasserstein_small(&a, &b, p).unwrap();
            assert!((sw - w1).abs() < 1e-10 && (w1 - exact).abs() < 1e-10);
        }
    }
}

#[test]
fn sliced_is_below_exact() {
    let mut rng = RngSeed(102).stream(0);
    for trial in 0..100 {
        let n = rng.random_range(1..=8);
        let d = rng.random_range(2..=4);
        let a = random_cloud(&mut rng, n, d);
        let b = random_cloud(&mut rng, n, d);
        let thetas = sample_unit_sphere(2000, d, &mut rng).unwrap();
        let est = sliced_wasserstein_estimate(&a, &b, &thetas, CostExponent::Two).unwrap();
        let exact = exact_wasserstein_small(&a, &b, CostExponent::Two).unwrap();
        assert!(
            est.value <= exact + 3.0 * est.std_error,
            "trial {trial}: sw {} > exact {exact} + 3 * {}",
            est.value,
            est.std_error
        );
    }
}

#[test]
fn sliced_singleton_expectation() {
    // E[(theta . v)^2] = ||v||^2 / d for theta uniform on the sphere
    let mut rng = RngSeed(103).stream(0);
    for (d, v) in [
        (2, vec![3.0, -1.0]),
        (3, vec![1.0, 2.0, 2.0]),
        (5, vec![0.5; 5]),
    ] {
        let zero = PointCloud::from_rows(&[vec![0.0; d]]).unwrap();
        let point = PointCloud::from_rows(std::slice::from_ref(&v)).unwrap();
        let thetas = sample_unit_sphere(100_000, d, &mut rng).unwrap();
        let est = sliced_wasserstein_estimate(&zero, &point, &thetas, CostExponent::Two).unwrap();
        let expected = v.iter().map(|x| x * x).sum::<f64>() / d as f64;
        assert!(
            (est.value - expected).abs() < 4.0 * est.std_error,
            "d = {d}: {} vs {expected} (se {})",
            est.value,
            est.std_error
        );
    }
}

fn min_projection_gap(cloud: &PointCloud<f64>, thetas: &ProjectionSet<f64>) -> f64 {
    let mut gap = f64::INFINITY;
    for theta in thetas.iter() {
        let mut p = project(cloud, theta).unwrap();
        p.sort_by(f64::total_cmp);
        for w in p.windows(2) {
            gap = gap.min(w[1] - w[0]);
        }
    }
    gap
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = RngSeed(104).stream(0);
    let eps = 1e-5;
    let mut checked = 0;
    while checked < 100 {
        let (n, d, l) = (5, 3, 7);
        let a = random_cloud(&mut rng, n, d);
        let b = random_cloud(&mut rng, n, d);
        let thetas = sample_unit_sphere(l, d, &mut rng).unwrap();
        if min_projection_gap(&a, &thetas) < 1e-3 {
            continue;
        }
        let grad = sliced_wasserstein_gradient(&a, &b, &thetas, CostExponent::Two).unwrap();
        let mut fd = Matrix::zeros(n, d);
        for i in 0..n {
            for k in 0..d {
                let shifted = |delta: f64| {
                    let mut m = a.points().clone();
                    m[(i, k)] += delta;
                    let c = PointCloud::new(m).unwrap();
                    sliced_wasserstein(&c, &b, &thetas, CostExponent::Two).unwrap()
                };
                fd[(i, k)] = (shifted(eps) - shifted(-eps)) / (2.0 * eps);
            }
        }
        let err: f64 = grad
            .as_slice()
            .iter()
            .zip(fd.as_slice())
            .map(|(g, f)| (g - f) * (g - f))
            .sum::<f64>()
            .sqrt();
        let scale = fd.as_slice().iter().map(|f| f * f).sum::<f64>().sqrt();
        assert!(err / scale < 1e-4, "relative error {}", err / scale);
        checked += 1;
    }
}

#[test]
fn per_direction_values_average_to_sliced() {
    let mut rng = RngSeed(105).stream(0);
    let a = random_cloud(&mut rng, 16, 3);
    let b = random_cloud(&mut rng, 16, 3);
    let thetas = sample_unit_sphere(9, 3, &mut rng).unwrap();
    let sw = sliced_wasserstein(&a, &b, &thetas, CostExponent::Two).unwrap();
    let mean: f64 = thetas
        .iter()
        .map(|t| {
            let one = ProjectionSet::from_rows(&[t.to_vec()]).unwrap();
            sliced_wasserstein(&a, &b, &one, CostExponent::Two).unwrap()
        })
        .sum::<f64>()
        / 9.0;
    assert!((sw - mean).abs() < 1e-12);
}

#[test]
fn parallel_reduction_is_thread_count_independent() {
    let mut rng = RngSeed(106).stream(0);
    let a = random_cloud(&mut rng, 64, 4);
    let b = random_cloud(&mut rng, 64, 4);
    let thetas = sample_unit_sphere(500, 4, &mut rng).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                (
                    sliced_wasserstein(&a, &b, &thetas, CostExponent::Two).unwrap(),
                    sliced_wasserstein_gradient(&a, &b, &thetas, CostExponent::Two).unwrap(),
                )
            })
    };
    let (v1, g1) = run(1);
    let (v4, g4) = run(4);
    assert_eq!(v1.to_bits(), v4.to_bits());
    assert_eq!(g1, g4);
}

#[test]
fn f32_clouds_follow_f64() {
    let mut rng = RngSeed(107).stream(0);
    let a = random_cloud(&mut rng, 8, 3);
    let b = random_cloud(&mut rng, 8, 3);
    let thetas: ProjectionSet<f64> = sample_unit_sphere(32, 3, &mut rng).unwrap();
    let thetas32 = ProjectionSet::normalized(
        Matrix::from_vec(
            32,
            3,
            thetas
                .directions()
                .as_slice()
                .iter()
                .map(|&v| v as f32)
                .collect(),
        )
        .unwrap(),
    )
    .unwrap();
    let sw64 = sliced_wasserstein(&a, &b, &thetas, CostExponent::Two).unwrap();
    let sw32 = sliced_wasserstein(
        &a.cast::<f32>(),
        &b.cast::<f32>(),
        &thetas32,
        CostExponent::Two,
    )
    .unwrap();
    assert!((sw64 - sw32 as f64).abs() < 1e-4 * (1.0 + sw64));
    let ex32 =
        exact_wasserstein_small(&a.cast::<f32>(), &b.cast::<f32>(), CostExponent::Two).unwrap();
    let ex64 = exact_wasserstein_small(&a, &b, CostExponent::Two).unwrap();
    assert!((ex64 - ex32 as f64).abs() < 1e-4 * (1.0 + ex64));
}

fn cloud_strategy() -> impl Strategy<Value = (PointCloud<f64>, PointCloud<f64>)> {
    (1usize..=6, 1usize..=3).prop_flat_map(|(n, d)| {
        (
            prop::collection::vec(-3.0f64..3.0, n * d),
            prop::collection::vec(-3.0f64..3.0, n * d),
        )
            .prop_map(move |(x, y)| {
                (
                    PointCloud::new(Matrix::from_vec(n, d, x).unwrap()).unwrap(),
                    PointCloud::new(Matrix::from_vec(n, d, y).unwrap()).unwrap(),
                )
            })
    })
}

proptest! {
    #[test]
    fn distances_are_symmetric((a, b) in cloud_strategy(), seed in any::<u64>()) {
        let thetas = sample_unit_sphere(5, a.d(), &mut RngSeed(seed).stream(0)).unwrap();
        for p in [CostExponent::One, CostExponent::Two] {
            prop_assert_eq!(
                sliced_wasserstein(&a, &b, &thetas, p).unwrap(),
                sliced_wasserstein(&b, &a, &thetas, p).unwrap()
            );
            let ab = exact_wasserstein_small(&a, &b, p).unwrap();
            let ba = exact_wasserstein_small(&b, &a, p).unwrap();
            prop_assert!((ab - ba).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_is_zero_for_permuted_copy((a, _b) in cloud_strategy(), seed in any::<u64>()) {
        let mut idx: Vec<usize> = (0..a.n()).collect();
        use rand::seq::SliceRandom;
        idx.shuffle(&mut RngSeed(seed).stream(0));
        let perm = a.select(&idx).unwrap();
        prop_assert_eq!(exact_wasserstein_small(&a, &perm, CostExponent::Two).unwrap(), 0.0);
    }

    /// The slice of an empirical measure along theta is the empirical measure
    /// of the projected points: its CDF at t counts the points with x . theta <= t.
    #[test]
    fn empirical_slice_is_projected_multiset((a, _b) in cloud_strategy(), seed in any::<u64>(), t in -4.0f64..4.0) {
        let thetas = sample_unit_sphere(1, a.d(), &mut RngSeed(seed).stream(0)).unwrap();
        let theta = thetas.direction(0);
        let slice = project(&a, theta).unwrap();
        let cdf = slice.iter().filter(|&&s| s <= t).count() as f64 / a.n() as f64;
        let direct = (0..a.n())
            .filter(|&m| a.point(m).iter().zip(theta).map(|(x, y)| x * y).sum::<f64>() <= t)
            .count() as f64 / a.n() as f64;
        prop_assert_eq!(cdf, direct);
    }
}
