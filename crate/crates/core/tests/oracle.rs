mod common;

use common::*;
use dht_rebalance::bounds::{self, ClusterParams, Scenario, StabilizationMode, WritePattern};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

fn params(p: &Point) -> ClusterParams {
    ClusterParams::new(p.n, p.bandwidth, p.value_size, p.mu, 1, p.storage).unwrap()
}

fn check_bounds(p: &Point) {
    let c = params(p);
    let pairs = [
        (
            "storage/increasing",
            bounds::storage_bound_increasing(&c),
            storage_increasing(p),
        ),
        (
            "bandwidth/increasing",
            bounds::bandwidth_bound_increasing(&c),
            bandwidth_increasing(p),
        ),
        (
            "time/increasing",
            bounds::time_bound_clear_increasing(&c),
            time_increasing(p),
        ),
        (
            "storage/stable",
            bounds::storage_bound_stable(&c),
            storage_stable(p),
        ),
        (
            "bandwidth/stable",
            bounds::bandwidth_bound_stable(&c),
            bandwidth_stable(p),
        ),
        (
            "time/stable",
            bounds::time_bound_clear_stable(&c),
            time_stable(p),
        ),
    ];
    for (name, got, want) in pairs {
        let e = rel_err(got, &want);
        assert!(
            e <= TOL,
            "{name} at {p:?}: got {got}, want {}, rel {e:e}",
            to_f64(&want)
        );
    }
}

#[test]
fn bounds_match_oracle_on_grid() {
    for n in 1..=64 {
        for k in 1..=10 {
            check_bounds(&Point::gigabit(n, k as f64 / 10.0));
        }
    }
}

fn random_point(rng: &mut ChaCha8Rng) -> Point {
    Point {
        n: rng.random_range(1..=5000),
        mu: rng.random_range(0.01..=1.0),
        bandwidth: 10f64.powf(rng.random_range(6.0..10.0)),
        value_size: rng.random_range(1.0..2048.0),
        storage: 10f64.powf(rng.random_range(9.0..13.0)),
    }
}

#[test]
fn bounds_match_oracle_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..20 {
        check_bounds(&random_point(&mut rng));
    }
}

#[test]
fn derived_quantities_match_oracle_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let p = random_point(&mut rng);
        let c = params(&p);
        let alpha: f64 = rng.random_range(0.01..0.99);
        let lambda = alpha * p.bandwidth / p.value_size;
        let a = bounds::alpha(&c, lambda);
        for (pattern, stable) in [
            (WritePattern::Increasing, false),
            (WritePattern::Stable, true),
        ] {
            let concurrent = Scenario::new(pattern, StabilizationMode::Concurrent);
            let clear = Scenario::new(pattern, StabilizationMode::Clear);
            let checks = [
                (
                    "migration",
                    bounds::migration_volume(&c),
                    migration_volume(&p),
                ),
                (
                    "concurrent join",
                    bounds::stabilization_time(&c, concurrent, lambda).unwrap(),
                    concurrent_join_time(&p, lambda, stable),
                ),
                (
                    "clear join",
                    bounds::stabilization_time(&c, clear, lambda).unwrap(),
                    clear_join_time(&p),
                ),
                (
                    "backlog",
                    bounds::accumulated_backlog(&c, a, pattern).unwrap(),
                    backlog(&p, lambda, stable),
                ),
                (
                    "catch-up",
                    bounds::catchup_time(&c, a, pattern).unwrap(),
                    catchup_time(&p, lambda, stable),
                ),
                (
                    "inter-expansion",
                    bounds::inter_expansion_time(&c, a, pattern).unwrap(),
                    inter_expansion_time(&p, lambda, stable),
                ),
            ];
            for (name, got, want) in checks {
                // Allow a few more ulps: α itself is rounded once more.
                let e = rel_err(got, &want);
                assert!(
                    e <= 1e-11,
                    "{name} ({pattern:?}) at {p:?}, alpha {alpha}: rel {e:e}"
                );
            }
        }
    }
}

#[test]
fn perfect_square_spot_values_are_exact() {
    let at = |n| ClusterParams::with_defaults(n, 0.5).unwrap();
    assert_eq!(bounds::storage_bound_stable(&at(10)), 4_687_500.0);
    assert_eq!(bounds::time_bound_clear_increasing(&at(2)), 3_906_250.0);
    assert_eq!(bounds::time_bound_clear_stable(&at(2)), 5_859_375.0);
    assert!(rel_err(3_906_250.0, &time_increasing(&Point::gigabit(2, 0.5))) < 1e-30);
    assert!(rel_err(5_859_375.0, &time_stable(&Point::gigabit(2, 0.5))) < 1e-30);
}
