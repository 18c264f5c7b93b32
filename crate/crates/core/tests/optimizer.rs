use std::cell::RefCell;

use dualscore_core::optim::{
    de_minimize, minimize, random_minimize, tpe_minimize, IndexVector, Method, SearchConfig, SearchResult,
};

fn sphere_quadratic(xi: &IndexVector) -> f64 {
    let s = xi.as_slice();
    (s[0] - 1.0).powi(2) + s[1..].iter().map(|x| x * x).sum::<f64>()
}

fn cfg(method: Method, budget: usize, seed: u64) -> SearchConfig {
    SearchConfig::new(3, budget, seed, method)
}

fn check_contract(result: &SearchResult, seen: &[f64], budget: usize) {
    assert!(result.evaluations <= budget);
    assert_eq!(result.trace.len(), result.evaluations);
    for w in result.trace.windows(2) {
        assert!(w[1].1 <= w[0].1);
    }
    let min = seen.iter().cloned().fold(f64::INFINITY, f64::min);
    assert_eq!(result.best_value, min);
    assert_eq!(result.trace.last().unwrap().1, min);
}

/// Wraps the objective to check every candidate lies on the constraint set.
fn run(method: Method, budget: usize, seed: u64) -> (SearchResult, Vec<f64>) {
    let seen = RefCell::new(Vec::new());
    let objective = |xi: &IndexVector| {
        let norm: f64 = xi.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(*xi.as_slice().iter().find(|x| **x != 0.0).unwrap() > 0.0);
        let v = sphere_quadratic(xi);
        seen.borrow_mut().push(v);
        v
    };
    let result = minimize(objective, &cfg(method, budget, seed)).unwrap();
    (result, seen.into_inner())
}

#[test]
fn de_solves_sphere_quadratic() {
    let (r, seen) = run(Method::De, 600, 7);
    check_contract(&r, &seen, 600);
    assert!(r.best_value < 1e-3, "{}", r.best_value);
}

#[test]
fn tpe_solves_sphere_quadratic() {
    let (r, seen) = run(Method::Tpe, 600, 7);
    check_contract(&r, &seen, 600);
    assert!(r.best_value < 1e-2, "{}", r.best_value);
}

#[test]
fn random_search_keeps_contract() {
    let (r, seen) = run(Method::Random, 300, 7);
    check_contract(&r, &seen, 300);
}

#[test]
fn searches_are_deterministic() {
    for method in [Method::De, Method::Tpe, Method::Random] {
        let a = run(method, 150, 99).0;
        let b = run(method, 150, 99).0;
        assert_eq!(a, b, "{method}");
        assert_ne!(a.trace, run(method, 150, 100).0.trace, "{method}");
    }
}

#[test]
fn tpe_matches_random_during_startup() {
    let c = cfg(Method::Tpe, 24, 5);
    let tpe = tpe_minimize(sphere_quadratic, &c).unwrap();
    let rnd = random_minimize(sphere_quadratic, &c).unwrap();
    assert_eq!(tpe, rnd);
    let small = cfg(Method::Tpe, 10, 5);
    assert_eq!(tpe_minimize(sphere_quadratic, &small).unwrap(), random_minimize(sphere_quadratic, &small).unwrap());
}

#[test]
fn de_budget_below_one_generation() {
    let r = de_minimize(sphere_quadratic, &cfg(Method::De, 5, 1)).unwrap();
    assert_eq!(r.evaluations, 5);
    let rnd = random_minimize(sphere_quadratic, &cfg(Method::Random, 1, 3)).unwrap();
    assert_eq!(rnd.evaluations, 1);
    assert_eq!(rnd.trace, vec![(0, rnd.best_value)]);
}

#[test]
fn random_search_improves_with_nested_budgets() {
    let mut last = f64::INFINITY;
    for budget in [1, 5, 20, 80, 300] {
        let r = random_minimize(sphere_quadratic, &cfg(Method::Random, budget, 42)).unwrap();
        assert!(r.best_value <= last);
        last = r.best_value;
    }
}

#[test]
fn de_beats_random_on_average() {
    let mean = |method| {
        (0..5)
            .map(|s| minimize(sphere_quadratic, &cfg(method, 600, s)).unwrap().best_value)
            .sum::<f64>()
            / 5.0
    };
    assert!(mean(Method::Random) >= mean(Method::De));
}

#[test]
fn infinite_objective_values_are_tolerated() {
    let objective = |xi: &IndexVector| if xi.as_slice()[0] > 0.9 { f64::NAN } else { sphere_quadratic(xi) };
    for method in [Method::De, Method::Tpe, Method::Random] {
        let r = minimize(objective, &cfg(method, 200, 3)).unwrap();
        assert!(r.best_value.is_finite());
        assert!(r.best_xi.as_slice()[0] <= 0.9);
    }
}
