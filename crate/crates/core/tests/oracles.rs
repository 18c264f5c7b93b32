//! Brute-force oracles for the smoothing, profiling and metric code.

use dualscore_core::distill::{classification_metrics, expert_probabilities, train_expert, BoostParams, Node};
use dualscore_core::kernel::{nw_estimate, nw_residuals_loo, Kernel};
use dualscore_core::model::{profile_beta, FitParts, ModelFit};
use dualscore_core::optim::project_to_constraint;
use dualscore_core::{Dataset, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_matrix(r: &mut ChaCha8Rng, n: usize, d: usize, scale: f64) -> Matrix {
    let data = (0..n * d).map(|_| r.random_range(-scale..scale)).collect();
    Matrix::from_row_major(n, d, data).unwrap()
}

fn direct_nw(z: &[f64], t: &Matrix, q: f64, h: f64, kernel: Kernel, skip: Option<usize>) -> Option<Vec<f64>> {
    let mut num = vec![0.0; t.cols()];
    let mut den = 0.0;
    for j in 0..z.len() {
        if Some(j) == skip {
            continue;
        }
        let w = kernel.eval((z[j] - q) / h);
        den += w;
        for k in 0..t.cols() {
            num[k] += w * t.get(j, k);
        }
    }
    (den > 0.0).then(|| num.iter().map(|v| v / den).collect())
}

fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!((a - b).abs() <= tol, "{what}: {a} vs {b} (diff {:e})", (a - b).abs());
}

#[test]
fn nw_estimate_matches_direct_sum() {
    let mut r = rng(1);
    for case in 0..200 {
        let n = r.random_range(1..40);
        let z: Vec<f64> = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
        let t = random_matrix(&mut r, n, 3, 5.0);
        let h = r.random_range(0.05..2.0);
        let q = r.random_range(-3.5..3.5);
        for kernel in [Kernel::Epanechnikov, Kernel::Gaussian] {
            let got = nw_estimate(&z, &t, q, h, kernel).unwrap();
            if let Some(want) = direct_nw(&z, &t, q, h, kernel, None) {
                for k in 0..3 {
                    assert_close(got[k], want[k], 1e-12, &format!("case {case}"));
                }
            }
        }
    }
}

#[test]
fn loo_residuals_match_direct_sum() {
    let mut r = rng(2);
    let mut cases: Vec<(usize, f64)> = (0..300).map(|_| (r.random_range(2..60), r.random_range(0.02..1.5))).collect();
    cases.extend([(3, 0.5), (3, 10.0), (2000, 0.15), (2000, 0.4), (5000, 0.25)]);
    for (case, &(n, h)) in cases.iter().enumerate() {
        let clustered = case % 3 == 0;
        let z: Vec<f64> = (0..n)
            .map(|_| {
                if clustered {
                    f64::from(r.random_range(-4..4)) * 0.1
                } else {
                    let a: f64 = r.random_range(-1.0..1.0);
                    let b: f64 = r.random_range(-1.0..1.0);
                    1.7 * (a + b)
                }
            })
            .collect();
        let t = random_matrix(&mut r, n, 4, 8.0);
        for kernel in [Kernel::Epanechnikov, Kernel::Gaussian] {
            let got = nw_residuals_loo(&z, &t, h, kernel).unwrap();
            for i in 0..n {
                let want = match direct_nw(&z, &t, z[i], h, kernel, Some(i)) {
                    Some(m) => m,
                    None => (0..4)
                        .map(|k| (0..n).filter(|&j| j != i).map(|j| t.get(j, k)).sum::<f64>() / (n - 1) as f64)
                        .collect(),
                };
                for k in 0..4 {
                    assert_close(
                        got.residuals.get(i, k),
                        t.get(i, k) - want[k],
                        1e-12,
                        &format!("case {case} n {n} h {h} row {i} {kernel}"),
                    );
                }
            }
        }
    }
}

#[test]
fn profile_beta_matches_normal_equations() {
    let mut r = rng(3);
    for _ in 0..50 {
        let n = 6;
        let x = random_matrix(&mut r, n, 2, 2.0);
        let tau: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        let probs: Vec<f64> = (0..n).map(|_| r.random_range(0.05..0.95)).collect();
        let ds = Dataset::new(x.clone(), tau.clone(), Some(probs.clone()), None, Dataset::default_names(2)).unwrap();
        let y: Vec<f64> = probs.iter().map(|p| (p / (1.0 - p)).ln()).collect();
        let xi = project_to_constraint(&[r.random_range(0.1..1.0), r.random_range(-1.0..1.0)]).unwrap();
        let h = 1.5;
        let prof = profile_beta(&ds, &y, &xi, h, Kernel::Gaussian).unwrap();

        // independent residualization on the standardized index
        let z: Vec<f64> = (0..n).map(|i| x.get(i, 0) * xi.as_slice()[0] + x.get(i, 1) * xi.as_slice()[1] - tau[i]).collect();
        let mean = z.iter().sum::<f64>() / n as f64;
        let sd = (z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        let u: Vec<f64> = z.iter().map(|v| v / sd).collect();
        let mut stacked = Vec::new();
        for i in 0..n {
            stacked.extend_from_slice(&[x.get(i, 0), x.get(i, 1), y[i]]);
        }
        let stacked = Matrix::from_row_major(n, 3, stacked).unwrap();
        let mut ex = vec![[0.0; 2]; n];
        let mut ey = vec![0.0; n];
        for i in 0..n {
            let m = direct_nw(&u, &stacked, u[i], h, Kernel::Gaussian, Some(i)).unwrap();
            ex[i] = [x.get(i, 0) - m[0], x.get(i, 1) - m[1]];
            ey[i] = y[i] - m[2];
        }
        // explicit 2x2 inverse
        let (mut a, mut b, mut c, mut g0, mut g1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            a += ex[i][0] * ex[i][0];
            b += ex[i][0] * ex[i][1];
            c += ex[i][1] * ex[i][1];
            g0 += ex[i][0] * ey[i];
            g1 += ex[i][1] * ey[i];
        }
        let det = a * c - b * b;
        let beta = [(c * g0 - b * g1) / det, (a * g1 - b * g0) / det];
        for k in 0..2 {
            assert_close(prof.beta[k], beta[k], 1e-8 * (1.0 + beta[k].abs()), "beta");
        }
        for i in 0..n {
            let r_i = ey[i] - ex[i][0] * beta[0] - ex[i][1] * beta[1];
            assert_close(prof.residuals[i], r_i, 1e-8, "residual");
        }
    }
}

fn random_fit(r: &mut ChaCha8Rng, n: usize, p: usize, kernel: Kernel) -> ModelFit {
    let raw: Vec<f64> = (0..p).map(|_| r.random_range(-1.0..1.0)).collect();
    ModelFit::from_parts(FitParts {
        beta: (0..p).map(|_| r.random_range(-2.0..2.0)).collect(),
        xi: project_to_constraint(&raw).unwrap(),
        train_index: (0..n).map(|_| r.random_range(-3.0..3.0)).collect(),
        link_residuals: (0..n).map(|_| r.random_range(-2.0..2.0)).collect(),
        bandwidth: r.random_range(0.1..0.6),
        kernel,
        lasso_penalty: 1e-3,
        index_scale: r.random_range(0.5..2.0),
        objective_value: 0.1,
        feature_names: Dataset::default_names(p),
    })
    .unwrap()
}

#[test]
fn estimate_g_matches_direct_sum() {
    let mut r = rng(4);
    for _ in 0..100 {
        let kernel = if r.random_bool(0.5) { Kernel::Epanechnikov } else { Kernel::Gaussian };
        let fit = random_fit(&mut r, 50, 3, kernel);
        let s = fit.index_scale();
        let u: Vec<f64> = fit.train_index().iter().map(|z| z / s).collect();
        let t = Matrix::column(fit.link_residuals());
        for _ in 0..20 {
            let z = r.random_range(-3.5..3.5);
            let want = direct_nw(&u, &t, z / s, fit.bandwidth(), kernel, None)
                .map_or_else(|| fit.link_residuals().iter().sum::<f64>() / 50.0, |v| v[0]);
            assert_close(fit.estimate_g(z).unwrap(), want, 1e-12, "estimate_g");
        }
    }
}

#[test]
fn predict_matches_manual_composition() {
    let mut r = rng(5);
    for _ in 0..50 {
        let fit = random_fit(&mut r, 40, 4, Kernel::Epanechnikov);
        for _ in 0..20 {
            let x: Vec<f64> = (0..4).map(|_| r.random_range(-2.0..2.0)).collect();
            let tau = r.random_range(-1.0..1.0);
            let s = fit.dual_scores(&x).unwrap();
            let prognostic: f64 = x.iter().zip(fit.beta()).map(|(a, b)| a * b).sum();
            let interaction: f64 = x.iter().zip(fit.xi().as_slice()).map(|(a, b)| a * b).sum();
            assert_close(s.prognostic, prognostic, 1e-14, "prognostic");
            assert_close(s.interaction, interaction, 1e-14, "interaction");
            let want = prognostic + fit.estimate_g(interaction - tau).unwrap();
            let got = fit.predict(&x, tau).unwrap();
            assert_close(got.log_odds, want, 1e-12, "log odds");
            assert_close(got.prob, 1.0 / (1.0 + (-want).exp()), 1e-12, "prob");
        }
    }
}

#[test]
fn metrics_four_point_fixture() {
    let m = classification_metrics(&[1, 0, 1, 0], &[0.9, 0.8, 0.7, 0.1], 0.5).unwrap();
    // pairs (pos, neg): (0.9,0.8) (0.9,0.1) (0.7,0.8) (0.7,0.1) → 3 of 4 concordant
    assert_eq!(m.auc, Some(0.75));
    // predicted positive: rows 0, 1, 2; true positives 0, 2
    assert_eq!(m.precision, 2.0 / 3.0);
    assert_eq!(m.recall, 1.0);
    assert_eq!(m.f1, 2.0 * (2.0 / 3.0) / (2.0 / 3.0 + 1.0));
    assert!((m.f1 - 0.8).abs() < 1e-15);
}

#[test]
fn expert_probabilities_match_tree_walk() {
    let mut r = rng(6);
    let x = random_matrix(&mut r, 60, 3, 1.0);
    let y: Vec<u8> = (0..60).map(|i| u8::from(x.get(i, 0) + 0.3 * x.get(i, 2) > 0.1)).collect();
    let params = BoostParams {
        rounds: 15,
        max_depth: 3,
        ..BoostParams::default()
    };
    let model = train_expert(&x, &y, &params).unwrap();
    let rows = random_matrix(&mut r, 5, 3, 1.2);
    let got = expert_probabilities(&model, &rows).unwrap();
    for i in 0..5 {
        let row = rows.row(i);
        let mut raw = model.base_score();
        for tree in model.trees() {
            let nodes = tree.nodes();
            let mut k = 0;
            let leaf = loop {
                match &nodes[k] {
                    Node::Leaf { value } => break *value,
                    Node::Split { feature, threshold, left, right } => {
                        k = if row[*feature] <= *threshold { *left } else { *right };
                    }
                }
            };
            raw += model.learning_rate() * leaf;
        }
        assert_close(got[i], 1.0 / (1.0 + (-raw).exp()), 1e-12, "expert probability");
    }
}
