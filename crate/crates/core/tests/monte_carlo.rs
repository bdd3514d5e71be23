//! Closed-form quantities checked against independent Monte Carlo estimates.

use histrule::grid::{CellBox, GridSpec};
use histrule::hist::HistogramClassifier;
use histrule::risk::{empirical_risk, excess_risk_exact};
use histrule::synth::{Label, SyntheticFamily};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn families() -> Vec<SyntheticFamily> {
    vec![
        SyntheticFamily::linear(1, 1.0).unwrap(),
        SyntheticFamily::linear(2, 2.0).unwrap(),
        SyntheticFamily::power_mass(1, 2.0, 1.0).unwrap(),
        SyntheticFamily::power_mass(2, 0.5, 1.5).unwrap(),
        SyntheticFamily::far_noise(1, 1.0).unwrap(),
        SyntheticFamily::far_noise(2, 2.0).unwrap(),
    ]
}

#[test]
fn bayes_risk_matches_sampled_labels() {
    for (i, fam) in families().into_iter().enumerate() {
        let m = 400_000;
        let sample = fam.sample(m, 50 + i as u64).unwrap();
        let errors = sample
            .iter()
            .filter(|(x, y)| fam.bayes_label(x).unwrap() != *y)
            .count() as f64;
        let p = errors / m as f64;
        let se = (p * (1.0 - p) / m as f64).sqrt();
        assert!(
            (p - fam.bayes_risk()).abs() <= 4.0 * se,
            "{:?} d={}: sampled {p}, exact {}",
            fam.kind(),
            fam.d(),
            fam.bayes_risk()
        );
    }
}

#[test]
fn box_masses_match_sampling() {
    let boxes = [
        CellBox {
            lower: vec![-0.3, -1.0],
            upper: vec![0.55, 0.2],
        },
        CellBox {
            lower: vec![0.5, -0.2],
            upper: vec![0.9, 0.2],
        },
        CellBox {
            lower: vec![-1.5, 0.5],
            upper: vec![-0.1, 2.0],
        },
    ];
    for (i, fam) in families().into_iter().filter(|f| f.d() == 2).enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + i as u64);
        let m = 400_000;
        let pts = fam.sample_points(m, &mut rng);
        for b in &boxes {
            let (mut mass, mut signed, mut pos_abs) = (0.0, 0.0, 0.0);
            let (mut sq_s, mut sq_p) = (0.0, 0.0);
            for x in pts.chunks_exact(2) {
                if b.contains(x) {
                    let v = fam.noise(x).unwrap();
                    mass += 1.0;
                    signed += v;
                    sq_s += v * v;
                    if x[0] >= 0.0 {
                        pos_abs += v.abs();
                        sq_p += v * v;
                    }
                }
            }
            let mf = m as f64;
            let p = mass / mf;
            let se_p = (p * (1.0 - p) / mf).sqrt();
            assert!((p - fam.prob_mass(b)).abs() <= 4.0 * se_p + 1e-12);
            let se_s = (sq_s / mf / mf).sqrt();
            assert!((signed / mf - fam.signed_mass(b)).abs() <= 4.0 * se_s + 1e-12);
            let se_a = (sq_p / mf / mf).sqrt();
            assert!((pos_abs / mf - fam.abs_mass_on_side(b, Label::Pos)).abs() <= 4.0 * se_a + 1e-12);
        }
    }
}

#[test]
fn empirical_risk_converges_to_exact_risk() {
    let fam = SyntheticFamily::linear(2, 1.0).unwrap();
    let grid = GridSpec::new(2, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let c = HistogramClassifier::random_cellwise(&grid, &mut rng).unwrap();
    let exact = excess_risk_exact(&c, &fam, None).unwrap().risk;
    let small = empirical_risk(&c, &fam.sample(10_000, 1).unwrap(), None).unwrap();
    let large = empirical_risk(&c, &fam.sample(1_000_000, 2).unwrap(), None).unwrap();
    let se = |m: f64| (exact * (1.0 - exact) / m).sqrt();
    assert!((small - exact).abs() <= 4.0 * se(1e4));
    assert!((large - exact).abs() <= 4.0 * se(1e6));
}

#[test]
fn estimator_error_shrinks_with_sample_size() {
    use histrule::margin::{estimate_me, DEFAULT_T_GRID};
    let fam = SyntheticFamily::power_mass(1, 1.5, 1.0).unwrap();
    // average absolute error over a few seeds to avoid a lucky small-sample fit
    let err = |m: usize| -> f64 {
        (0..4)
            .map(|k| (estimate_me(&fam, m, &DEFAULT_T_GRID, 100 + k).unwrap().exponent - 1.5).abs())
            .sum::<f64>()
            / 4.0
    };
    let e_small = err(10_000);
    let e_large = err(1_000_000);
    assert!(e_large < e_small, "error {e_large} at 1e6 vs {e_small} at 1e4");
}

#[test]
fn far_noise_lowers_the_noise_exponent_slope() {
    use histrule::margin::estimate_ne;
    let eps = [0.2, 0.1, 0.05, 0.02, 0.01];
    let lin = SyntheticFamily::linear(1, 1.0).unwrap();
    let bump = histrule::synth::Bump {
        floor: 0.0,
        ..histrule::synth::Bump::default_for(1)
    };
    let far = SyntheticFamily::far_noise_with(1, 1.0, bump).unwrap();
    let q_lin = estimate_ne(&lin, 500_000, &eps, 3).unwrap().exponent;
    let q_far = estimate_ne(&far, 500_000, &eps, 3).unwrap().exponent;
    assert!(q_far < q_lin, "far_noise slope {q_far} vs linear {q_lin}");
}
