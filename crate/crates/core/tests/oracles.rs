//! Monte Carlo oracles for the quadrature-based moment machinery. Each
//! oracle simulates the underlying random variables directly and must
//! agree with the exact computation within three standard errors.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use relsim_core::enumeration::{
    enumerate_forms, AbstractPool, DEFAULT_ENUMERATION_CAP,
};
use relsim_core::harness::{aggregate_form_reliabilities, CaseMeta};
use relsim_core::irt::{
    irf, item_moments, true_score_cov, FormReliability, ItemParams, ItemPool, LatentSpec,
    ModelConstants, PoolContext,
};
use relsim_core::quad::{QuadratureRule, DEFAULT_QUAD_ORDER};
use relsim_core::rng::RandomStream;
use relsim_core::sampler::{sample_form, TestForm};
use relsim_core::sb;

fn rule() -> QuadratureRule {
    QuadratureRule::new(DEFAULT_QUAD_ORDER).unwrap()
}

#[test]
fn item_moments_match_simulated_trait_draws() {
    // mu, tau_sq, eps_sq for a = 1.2, b = 0.4 against 1e7 trait draws
    let c = ModelConstants::default();
    let item = ItemParams::unidimensional(1.2, 0.4).unwrap();
    let exact = item_moments(&item, &rule(), c).unwrap();

    let draws: usize = 10_000_000;
    let chunks = 64usize;
    let per = draws / chunks;
    let stream = RandomStream::new(901).child("item-mc");
    let sums: (f64, f64, f64, f64) = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream.child_index(k as u64).rng();
            let mut s = (0.0, 0.0, 0.0, 0.0);
            for _ in 0..per {
                let theta: f64 = StandardNormal.sample(&mut rng);
                let p = irf(&item, theta, c);
                s.0 += p;
                s.1 += p * p;
                s.2 += p * p * p;
                s.3 += p * p * p * p;
            }
            s
        })
        .reduce(|| (0.0, 0.0, 0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3));
    let k = (per * chunks) as f64;
    let (m1, m2, m3, m4) = (sums.0 / k, sums.1 / k, sums.2 / k, sums.3 / k);

    let mu_mc = m1;
    let se_mu = ((m2 - m1 * m1) / k).sqrt();
    assert!((exact.mu - mu_mc).abs() <= 3.0 * se_mu, "mu");

    let tau_mc = m2 - m1 * m1;
    let h_var = m4 - 4.0 * m1 * m3 + 4.0 * m1 * m1 * m2 - (m2 - 2.0 * m1 * m1).powi(2);
    let se_tau = (h_var / k).sqrt();
    assert!((exact.tau_sq - tau_mc).abs() <= 3.0 * se_tau, "tau_sq");

    let eps_mc = m1 - m2;
    let g_var = (m2 - 2.0 * m3 + m4) - (m1 - m2).powi(2);
    let se_eps = (g_var / k).sqrt();
    assert!((exact.eps_sq - eps_mc).abs() <= 3.0 * se_eps, "eps_sq");
}

#[test]
fn pair_covariance_matches_simulated_trait_draws() {
    let c = ModelConstants::default();
    let i = ItemParams::unidimensional(1.0, -0.5).unwrap();
    let j = ItemParams::unidimensional(1.5, 0.5).unwrap();
    let exact = true_score_cov(&i, &j, &rule(), c).unwrap();

    let draws: usize = 10_000_000;
    let chunks = 64usize;
    let per = draws / chunks;
    let stream = RandomStream::new(902).child("pair-mc");
    // accumulate sums for cov(Pi, Pj) and its standard error
    let sums: (f64, f64, f64, f64) = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream.child_index(k as u64).rng();
            let mut s = (0.0, 0.0, 0.0, 0.0);
            for _ in 0..per {
                let theta: f64 = StandardNormal.sample(&mut rng);
                let pi = irf(&i, theta, c);
                let pj = irf(&j, theta, c);
                s.0 += pi;
                s.1 += pj;
                s.2 += pi * pj;
                s.3 += (pi * pj) * (pi * pj);
            }
            s
        })
        .reduce(|| (0.0, 0.0, 0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3));
    let k = (per * chunks) as f64;
    let (mi, mj, mij, mij2) = (sums.0 / k, sums.1 / k, sums.2 / k, sums.3 / k);
    let cov_mc = mij - mi * mj;
    // dominant uncertainty is the product term; inflate for the cross terms
    let se = ((mij2 - mij * mij) / k).sqrt() * 1.5;
    assert!((exact - cov_mc).abs() <= 3.0 * se, "cov {exact} vs {cov_mc} (se {se})");
}

#[test]
fn form_reliability_matches_person_simulation() {
    // A 10-item unidimensional form: simulate 1e6 examinees, compare the
    // variance ratio against the quadrature-based reliability.
    let items: Vec<ItemParams> = vec![
        (0.6, -1.4), (0.9, -0.9), (1.2, -0.45), (1.6, -0.1), (0.75, 0.2),
        (1.05, 0.55), (1.35, 0.95), (1.9, 1.3), (0.5, 1.7), (1.45, -1.9),
    ]
    .into_iter()
    .map(|(a, b)| ItemParams::unidimensional(a, b).unwrap())
    .collect();
    let pool = ItemPool::unidimensional(items).unwrap();
    let r = rule();
    let ctx = PoolContext::new(&pool, &r).unwrap();
    let form = TestForm::new((0..10).collect()).unwrap();
    let exact = ctx.form_reliability(&form).unwrap();

    let persons: usize = 1_000_000;
    let chunks = 64usize;
    let per = persons / chunks;
    let stream = RandomStream::new(903).child("person-mc");
    let n = 10.0f64;
    let results: Vec<(f64, f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream.child_index(k as u64).rng();
            let mut acc = (0.0, 0.0, 0.0);
            for _ in 0..per {
                let theta: f64 = StandardNormal.sample(&mut rng);
                let mut t = 0.0;
                let mut e = 0.0;
                for it in &pool.items {
                    let p = irf(it, theta, ModelConstants::default());
                    t += p;
                    e += p * (1.0 - p);
                }
                let t_bar = t / n;
                acc.0 += t_bar;
                acc.1 += t_bar * t_bar;
                acc.2 += e / (n * n);
            }
            acc
        })
        .collect();
    let k = (per * chunks) as f64;
    let sum_t: f64 = results.iter().map(|r| r.0).sum();
    let sum_t2: f64 = results.iter().map(|r| r.1).sum();
    let sum_e: f64 = results.iter().map(|r| r.2).sum();
    let mean_t = sum_t / k;
    let tv_mc = sum_t2 / k - mean_t * mean_t;
    let ev_mc = sum_e / k;
    let rho_mc = tv_mc / (tv_mc + ev_mc);
    // variance-of-variance for a roughly normal-ish bounded statistic:
    // conservative SE via 2 var / sqrt(k)
    let se_tv = 2.0 * tv_mc / k.sqrt() * 2.0;
    let drho_dtv = ev_mc / (tv_mc + ev_mc).powi(2);
    let se_rho = drho_dtv * se_tv + 1e-6;
    assert!(
        (exact.rho - rho_mc).abs() <= 3.0 * se_rho,
        "rho {} vs {rho_mc} (se {se_rho})",
        exact.rho
    );

    assert!((exact.err_var - ev_mc).abs() <= 3.0 * (0.25 / n / k.sqrt() + 1e-9));
}

#[test]
fn marginal_moments_match_double_simulation() {
    // Mixed 4-item pool: simulate persons and independent item draws.
    let pool = ItemPool::new(
        LatentSpec { num_dimensions: 2 },
        vec![
            ItemParams::new(0.7, -0.8, 1).unwrap(),
            ItemParams::new(1.8, 0.3, 1).unwrap(),
            ItemParams::new(1.1, 1.1, 2).unwrap(),
            ItemParams::new(2.6, -0.2, 2).unwrap(),
        ],
    )
    .unwrap();
    let r = rule();
    let ctx = PoolContext::new(&pool, &r).unwrap();
    let exact = relsim_core::enumeration::marginal_moments(&ctx);

    let c = ModelConstants::default();
    let persons: usize = 2_000_000;
    let chunks = 64usize;
    let per = persons / chunks;
    let stream = RandomStream::new(904).child("marg-mc");
    // For each person draw a trait vector and two independent items, then
    // simulate both responses (independent replications when the items
    // coincide).
    let acc: (f64, f64, f64, f64) = (0..chunks)
        .into_par_iter()
        .map(|ch| {
            let mut rng = stream.child_index(ch as u64).rng();
            let mut s = (0.0, 0.0, 0.0, 0.0);
            for _ in 0..per {
                let thetas: [f64; 2] = [
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                ];
                let w1 = rng.gen_range(0..pool.len());
                let w2 = rng.gen_range(0..pool.len());
                let p1 = irf(&pool.items[w1], thetas[pool.items[w1].dim - 1], c);
                let p2 = irf(&pool.items[w2], thetas[pool.items[w2].dim - 1], c);
                let x1 = f64::from(rng.gen_bool(p1));
                let x2 = f64::from(rng.gen_bool(p2));
                s.0 += x1;
                s.1 += x1 * x1;
                s.2 += x1 * x2;
                s.3 += x2;
            }
            s
        })
        .reduce(|| (0.0, 0.0, 0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3));
    let k = (per * chunks) as f64;
    let m1 = acc.0 / k;
    let m2 = acc.1 / k;
    let m12 = acc.2 / k;
    let m1b = acc.3 / k;
    let var1_mc = m2 - m1 * m1;
    let cov12_mc = m12 - m1 * m1b;
    // binary products: SEs bounded by bernoulli variance
    let se = (0.5 / k.sqrt()) * 3.0;
    assert!((exact.var1 - var1_mc).abs() <= 3.0 * se, "var1");
    assert!((exact.cov12 - cov12_mc).abs() <= 3.0 * se, "cov12");
}

#[test]
fn form_true_variance_dominates_universe_variance() {
    // var(T over forms and traits) = E[form true variance] + var(form mean)
    // and must be at least the universe-score variance.
    let spec_stream = RandomStream::new(905).child("pool");
    let mut rng = spec_stream.rng();
    let items: Vec<ItemParams> = (0..50)
        .map(|_| {
            ItemParams::unidimensional(0.2 + 4.8 * rng.gen::<f64>(), -2.0 + 4.0 * rng.gen::<f64>())
                .unwrap()
        })
        .collect();
    let pool = ItemPool::unidimensional(items).unwrap();
    let r = rule();
    let ctx = PoolContext::new(&pool, &r).unwrap();
    let universe_var = ctx.universe_limit().universe_var;

    let forms = 4000usize;
    let n = 5usize;
    let stream = RandomStream::new(906).child("forms");
    let mut true_vars = Vec::with_capacity(forms);
    let mut mean_mus = Vec::with_capacity(forms);
    for rep in 0..forms {
        let f = sample_form(&pool, n, &stream.child_index(rep as u64)).unwrap();
        let fr = ctx.form_reliability(&f).unwrap();
        true_vars.push(fr.true_var);
        let mu = f
            .item_indices()
            .iter()
            .map(|&i| ctx.item_moments(i).mu)
            .sum::<f64>()
            / n as f64;
        mean_mus.push(mu);
    }
    let k = forms as f64;
    let mean_tv = true_vars.iter().sum::<f64>() / k;
    let mu_bar = mean_mus.iter().sum::<f64>() / k;
    let var_mu = mean_mus.iter().map(|m| (m - mu_bar).powi(2)).sum::<f64>() / (k - 1.0);
    let var_t_forms = mean_tv + var_mu;

    let se_tv = (true_vars.iter().map(|t| (t - mean_tv).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt();
    assert!(
        var_t_forms >= universe_var - 3.0 * se_tv,
        "total {var_t_forms} vs universe {universe_var} (se {se_tv})"
    );
}

#[test]
fn covariance_matrices_positive_semidefinite() {
    // pivoted Cholesky on the true-score covariance of random forms
    let stream = RandomStream::new(907);
    let mut rng = stream.child("psd-pool").rng();
    let items: Vec<ItemParams> = (0..40)
        .map(|k| {
            ItemParams::new(
                0.1 + 4.9 * rng.gen::<f64>(),
                -2.0 + 4.0 * rng.gen::<f64>(),
                1 + k % 3,
            )
            .unwrap()
        })
        .collect();
    let pool = ItemPool::new(LatentSpec { num_dimensions: 3 }, items).unwrap();
    let r = rule();
    let ctx = PoolContext::new(&pool, &r).unwrap();

    for rep in 0..20u64 {
        let form = sample_form(&pool, 12, &stream.child("psd-form").child_index(rep)).unwrap();
        let idx = form.item_indices();
        let n = idx.len();
        let mut m: Vec<f64> = vec![0.0; n * n];
        for p in 0..n {
            for q in 0..n {
                m[p * n + q] = ctx.true_score_cov(idx[p], idx[q]);
                // symmetry is structural
                assert_eq!(
                    ctx.true_score_cov(idx[p], idx[q]),
                    ctx.true_score_cov(idx[q], idx[p])
                );
            }
        }
        let trace: f64 = (0..n).map(|p| m[p * n + p]).sum();
        let min_pivot = pivoted_cholesky_min_pivot(&mut m, n);
        assert!(
            min_pivot >= -1e-10 * trace.max(1.0),
            "min pivot {min_pivot} on replicate {rep}"
        );
    }
}

/// Runs pivoted Cholesky in place and returns the smallest pivot
/// encountered (negative values signal indefiniteness beyond rounding).
fn pivoted_cholesky_min_pivot(m: &mut [f64], n: usize) -> f64 {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut min_pivot = f64::INFINITY;
    for step in 0..n {
        // choose the largest remaining diagonal
        let (best, &best_val) = perm[step..]
            .iter()
            .enumerate()
            .map(|(off, &p)| (step + off, &m[p * n + p]))
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        perm.swap(step, best);
        min_pivot = min_pivot.min(best_val);
        if best_val <= 0.0 {
            continue;
        }
        let p = perm[step];
        let l = best_val.sqrt();
        for &q in &perm[step + 1..] {
            let v = m[p * n + q] / l;
            // rank-one downdate of the trailing submatrix
            for &t in &perm[step + 1..] {
                let w = m[p * n + t] / l;
                m[q * n + t] -= v * w;
            }
        }
        // zero the used row to avoid reuse
        for &q in &perm[step + 1..] {
            m[p * n + q] = 0.0;
        }
    }
    min_pivot
}

#[test]
fn sampling_harness_agrees_with_enumeration_oracle() {
    // Exhaustive aggregation over the three-class pool equals the
    // enumeration summaries exactly when every ordered form is fed through
    // the harness aggregation path.
    let pool = AbstractPool::three_class_example();
    let enumerated = enumerate_forms(&pool, 3, DEFAULT_ENUMERATION_CAP).unwrap();
    let meta = CaseMeta {
        case_id: "abstract3".into(),
        group: "custom".into(),
        dims: 1,
        a_max: f64::NAN,
    };
    let forms: Vec<FormReliability> = enumerated
        .records
        .iter()
        .map(|rec| {
            let rho = rec.rho;
            FormReliability {
                true_var: pool.tau_sq(),
                err_var: rec.mean_eps_sq / 3.0,
                mean_eps_sq: rec.mean_eps_sq,
                rho,
                rescaled: sb::spearman_brown(
                    sb::Reliability::saturating(rho),
                    sb::LengthFactor::unit_rescale(3).unwrap(),
                )
                .get(),
            }
        })
        .collect();
    let agg = aggregate_form_reliabilities(&meta, 3, &forms, pool.universe_limit());
    assert_eq!(agg.mean_rho, enumerated.full_length.mean_rho);
    assert_eq!(agg.median_rho, enumerated.full_length.median_rho);

    // Monte Carlo over the same universe converges to the enumerated mean.
    let mut rng = RandomStream::new(908).child("abstract-mc").rng();
    let reps = 200_000usize;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..reps {
        let classes: Vec<usize> = (0..3).map(|_| rng.gen_range(0..3)).collect();
        let rho = pool.form_rho(&classes);
        sum += rho;
        sum_sq += rho * rho;
    }
    let mean = sum / reps as f64;
    let var = sum_sq / reps as f64 - mean * mean;
    let se = (var / reps as f64).sqrt();
    assert!(
        (mean - enumerated.full_length.mean_rho).abs() <= 3.0 * se,
        "MC mean {mean} vs enumerated {}",
        enumerated.full_length.mean_rho
    );
}

#[test]
fn small_pool_monte_carlo_matches_exhaustive_2pl_enumeration() {
    let pool = ItemPool::unidimensional(vec![
        ItemParams::unidimensional(0.6, -0.7).unwrap(),
        ItemParams::unidimensional(1.3, 0.1).unwrap(),
        ItemParams::unidimensional(2.1, 0.9).unwrap(),
    ])
    .unwrap();
    let r = rule();
    let ctx = PoolContext::new(&pool, &r).unwrap();
    let all = relsim_core::enumeration::enumerate_form_reliabilities(&ctx, 3, 1000).unwrap();
    let exact_mean = all.iter().map(|f| f.rho).sum::<f64>() / all.len() as f64;

    let stream = RandomStream::new(909).child("mc-vs-enum");
    let reps = 20_000usize;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for rep in 0..reps {
        let form = sample_form(&pool, 3, &stream.child_index(rep as u64)).unwrap();
        let rho = ctx.form_reliability(&form).unwrap().rho;
        sum += rho;
        sum_sq += rho * rho;
    }
    let mean = sum / reps as f64;
    let se = ((sum_sq / reps as f64 - mean * mean) / reps as f64).sqrt();
    assert!(
        (mean - exact_mean).abs() <= 3.0 * se,
        "MC {mean} vs exact {exact_mean} (se {se})"
    );
}
