use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use ranksinr::closed_form::{BfAnalytic, OstbcAnalytic, SinrModel};
use ranksinr::montecarlo::{
    ks_statistic, ks_two_sample, random_precoder, simulate_bf_sinr, simulate_ostbc_sinr,
    simulate_ostbc_sinr_with, ChannelDraw, McOptions, OstbcPath, C64,
};
use ranksinr::scenario::{InterfererSpec, OwnMode, ScenarioConfig};
use ranksinr::special::gamma_p_int;

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

#[test]
fn rayleigh_single_antenna() {
    let cfg = ScenarioConfig::new(1, 1, 0.0, OwnMode::Beamforming);
    let d = simulate_bf_sinr(&cfg, 1_000_000, 11).unwrap();
    let ks = d.ks_distance(|x| 1.0 - (-x).exp());
    assert!(ks < 0.005, "KS {ks}");
}

#[test]
fn ostbc_noise_only_is_gamma() {
    let cfg = ScenarioConfig::new(2, 2, 10.0, OwnMode::Ostbc);
    let d = simulate_ostbc_sinr(&cfg, 1_000_000, 12).unwrap();
    let scale = db(10.0) / 4.0;
    let ks = d.ks_distance(|x| gamma_p_int(4, x / scale));
    assert!(ks < 0.005, "KS {ks}");
}

#[test]
fn reference_bf_outage_matches_closed_form() {
    let cfg = ScenarioConfig::reference(OwnMode::Beamforming);
    let model = BfAnalytic::from_config(&cfg).unwrap();
    let d = simulate_bf_sinr(&cfg, 1_000_000, 1).unwrap();
    let g0 = 1.0;
    let delta = (d.cdf(g0) - model.outage(g0).unwrap()).abs();
    assert!(delta < 0.005, "{delta}");
    let ks = d.ks_distance_smooth(|x| model.outage(x).unwrap(), 4000);
    assert!(ks < 0.005, "KS {ks}");
}

#[test]
fn reference_ostbc_outage_within_approximation_bound() {
    let cfg = ScenarioConfig::reference(OwnMode::Ostbc);
    let model = OstbcAnalytic::from_config(&cfg).unwrap();
    let d = simulate_ostbc_sinr(&cfg, 400_000, 2).unwrap();
    let worst = (0..=50)
        .map(|i| {
            let g = db(-5.0 + 0.5 * i as f64);
            (d.cdf(g) - model.outage(g).unwrap()).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst < 0.03, "{worst}");
}

#[test]
fn alamouti_and_component_paths_agree_in_distribution() {
    let cfg = ScenarioConfig::reference(OwnMode::Ostbc);
    let run = |path| {
        let opts = McOptions {
            ostbc_path: Some(path),
            ..Default::default()
        };
        simulate_ostbc_sinr_with(&cfg, 1_000_000, 5, &opts).unwrap()
    };
    let a = run(OstbcPath::Alamouti);
    let b = run(OstbcPath::Component);
    let ks = ks_two_sample(&a.samples, &b.samples);
    assert!(ks < 0.01, "KS {ks}");
}

#[test]
fn bf_receiver_layer_term_is_exponential_with_rate_layers() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n_l in [1usize, 2, 4] {
        let mut s: Vec<f64> = (0..200_000)
            .map(|_| {
                let ch = ChannelDraw::draw(4, 4, 1, &mut rng);
                let (w, lambda) =
                    ranksinr::montecarlo::dominant_eigvec(&ch.h0.gram(), 1e-10, &mut rng).unwrap();
                let u = ch.h0.mul_vec(&w);
                let v = random_precoder(4, n_l, &mut rng);
                let g = ch.interferers[0].mul_vec(&v.col(0));
                let p: C64 = u.iter().zip(&g).map(|(a, b)| a.conj() * b).sum();
                p.norm_sqr() / lambda
            })
            .collect();
        s.sort_by(f64::total_cmp);
        let rate = n_l as f64;
        let ks = ks_statistic(&s, |x| 1.0 - (-rate * x).exp());
        assert!(ks < 0.005, "n_l {n_l}: KS {ks}");
    }
}

#[test]
fn channel_entries_are_unit_variance_circular() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let n = 100_000;
    let (mut p, mut re2, mut cross) = ([0.0; 4], 0.0, 0.0);
    for _ in 0..n {
        let ch = ChannelDraw::draw(2, 2, 0, &mut rng);
        for (k, z) in ch.h0.data.iter().enumerate() {
            p[k] += z.norm_sqr();
        }
        let z = ch.h0.data[0];
        re2 += z.re * z.re;
        cross += z.re * z.im;
    }
    for v in p {
        assert!((v / n as f64 - 1.0).abs() < 0.02);
    }
    assert!((re2 / n as f64 - 0.5).abs() < 0.01);
    assert!((cross / n as f64).abs() < 0.01);
}

#[test]
fn precoder_covariance_is_isotropic() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for (n_t, n_l) in [(2usize, 2usize), (4, 2), (4, 1)] {
        let n = 100_000;
        let mut acc = vec![C64::new(0.0, 0.0); n_t * n_t];
        for _ in 0..n {
            let v = random_precoder(n_t, n_l, &mut rng);
            let vvh = v.mul(&v.adjoint());
            acc.iter_mut().zip(&vvh.data).for_each(|(a, b)| *a += b);
        }
        for r in 0..n_t {
            for c in 0..n_t {
                let want = if r == c { 1.0 / n_t as f64 } else { 0.0 };
                let got = acc[r * n_t + c] / n as f64;
                assert!(
                    (got - C64::new(want, 0.0)).norm() < 0.01 / n_t as f64 + 1e-3,
                    "{got}"
                );
            }
        }
        let v = random_precoder(n_t, n_l, &mut rng);
        assert!((v.frob_norm_sqr() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn closed_form_gamma_oracle_matches_rand_distr() {
    // The numerator gamma law checked against an independent sampler.
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let g = Gamma::new(4.0, 2.5).unwrap();
    let mut s: Vec<f64> = (0..200_000).map(|_| g.sample(&mut rng)).collect();
    s.sort_by(f64::total_cmp);
    let cfg = ScenarioConfig::new(2, 2, db(10.0).log10() * 10.0, OwnMode::Ostbc);
    let model = OstbcAnalytic::from_config(&cfg).unwrap();
    assert!((model.rho_bar - 2.5).abs() < 1e-12);
    let ks = ks_statistic(&s, |x| model.outage(x).unwrap());
    assert!(ks < 0.005, "{ks}");
}

#[test]
fn spatial_multiplexing_rank_changes_bf_distribution() {
    let base = ScenarioConfig::new(4, 4, 15.0, OwnMode::Beamforming);
    for layers in [1usize, 4] {
        let cfg = base
            .clone()
            .with_interferer(InterfererSpec::spatial_multiplexing(layers, 10.0));
        let model = BfAnalytic::from_config(&cfg).unwrap();
        let d = simulate_bf_sinr(&cfg, 200_000, 61).unwrap();
        let ks = d.ks_distance_smooth(|x| model.outage(x).unwrap(), 4000);
        assert!(ks < 0.006, "layers {layers}: KS {ks}");
    }
}

#[test]
fn dominant_eigenvalue_matches_dense_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for _ in 0..200 {
        let h = ranksinr::montecarlo::CMat::gaussian(4, 4, &mut rng);
        let m = h.gram();
        let (w, lambda) = ranksinr::montecarlo::dominant_eigvec(&m, 1e-10, &mut rng).unwrap();
        let dense = nalgebra::DMatrix::from_fn(4, 4, |r, c| {
            nalgebra::Complex::new(m[(r, c)].re, m[(r, c)].im)
        });
        let oracle = dense
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::MIN, f64::max);
        let hw: f64 = h.mul_vec(&w).iter().map(|z| z.norm_sqr()).sum();
        assert!((hw - oracle).abs() < 1e-8 * oracle, "{hw} vs {oracle}");
        assert!((lambda - oracle).abs() < 1e-8 * oracle);
    }
}
