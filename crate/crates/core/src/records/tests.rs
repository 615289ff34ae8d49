use super::*;
use num_complex::Complex64;
use rand::RngCore;
use rand_distr::{Distribution, Poisson};

fn poisson_pmf(lambda: f64, bins: usize) -> Vec<f64> {
    // last bin holds the tail
    let mut p = Vec::with_capacity(bins);
    let mut term = (-lambda).exp();
    for n in 0..bins {
        p.push(term);
        term *= lambda / (n + 1) as f64;
    }
    let head: f64 = p[..bins - 1].iter().sum();
    p[bins - 1] = 1.0 - head;
    p
}

#[test]
fn streams_are_deterministic() {
    let mut a = SeededStream::new(7, 3);
    let mut b = SeededStream::new(7, 3);
    let xa: Vec<u64> = (0..64).map(|_| a.next_u64()).collect();
    let xb: Vec<u64> = (0..64).map(|_| b.next_u64()).collect();
    assert_eq!(xa, xb);
    let mut c = SeededStream::new(7, 4);
    assert_ne!(xa[0], c.next_u64());
}

#[test]
fn streams_are_uncorrelated() {
    let n = 100_000;
    let mut s1 = SeededStream::new(11, 0);
    let mut s2 = SeededStream::new(11, 1);
    let (mut sxy, mut sx, mut sy, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for _ in 0..n {
        let (x, y) = (s1.uniform(), s2.uniform());
        sxy += x * y;
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
    }
    let nf = n as f64;
    let cov = sxy / nf - sx * sy / (nf * nf);
    let corr = cov / ((sxx / nf - (sx / nf).powi(2)) * (syy / nf - (sy / nf).powi(2))).sqrt();
    assert!(corr.abs() < 3.0 / nf.sqrt(), "corr={corr}");
}

#[test]
fn complex_gaussian_moments() {
    let mut s = SeededStream::new(5, 0);
    let n = 200_000;
    let (mut m, mut m2) = (Complex64::new(0.0, 0.0), 0.0);
    for _ in 0..n {
        let z = s.complex_gaussian(2.0);
        m += z;
        m2 += z.norm_sqr();
    }
    assert!((m / n as f64).norm() < 4.0 * (2.0 / n as f64).sqrt());
    assert!((m2 / n as f64 - 2.0).abs() < 0.02);
}

#[test]
fn thinning_with_zero_rate_is_empty() {
    let mut s = SeededStream::new(1, 0);
    assert!(poisson_thinning_times(|_| 0.0, 1.0, 1e-3, &mut s)
        .unwrap()
        .is_empty());
}

#[test]
fn thinning_rejects_coarse_steps() {
    let mut s = SeededStream::new(1, 0);
    let err = poisson_thinning_times(|_| 200.0, 1.0, 1e-3, &mut s).unwrap_err();
    assert!(matches!(err, Error::StepTooCoarse(_)));
}

#[test]
fn thinning_times_lie_on_grid_and_are_sorted() {
    let mut s = SeededStream::new(2, 9);
    let dt = 1e-3;
    let times = poisson_thinning_times(|_| 20.0, 2.0, dt, &mut s).unwrap();
    assert!(!times.is_empty());
    assert!(times.windows(2).all(|w| w[0] < w[1]));
    for t in times {
        assert!(((t / dt) - (t / dt).round()).abs() < 1e-9 && t < 2.0);
    }
}

#[test]
fn screened_rate_gives_poisson_half() {
    // integrated rate kappa_o T = ln 2 gives mean 1 - e^{-ln 2} = 0.5
    let (kappa, dt) = (1.0, 1e-3);
    let horizon = (std::f64::consts::LN_2 / dt).round() * dt;
    let lambda = 1.0 - (-kappa * horizon).exp();
    let bins = 8;
    let counts = try_ensemble(99, 100_000, |_, mut rng| {
        Ok(poisson_thinning_times(|t| kappa * (-kappa * t).exp(), horizon, dt, &mut rng)?.len())
    })
    .unwrap();
    let summary = EnsembleSummary::from_counts(&counts, Histogram::new(BinSpec::Counts { bins }));
    let tv = tv_to_pmf(&summary.histogram, &poisson_pmf(lambda, bins)).unwrap();
    assert!(tv < 0.01, "tv={tv}");
}

#[test]
fn constant_rate_mean_count() {
    let (kappa, horizon, dt) = (2.0, 1.5, 1e-3);
    let n = 20_000;
    let counts = try_ensemble(3, n, |_, mut rng| {
        Ok(poisson_thinning_times(|_| kappa, horizon, dt, &mut rng)?.len())
    })
    .unwrap();
    let mean = counts.iter().sum::<usize>() as f64 / n as f64;
    let sigma = (kappa * horizon / n as f64).sqrt();
    assert!((mean - kappa * horizon).abs() < 3.0 * sigma, "mean={mean}");
}

#[test]
fn tv_examples() {
    let spec = BinSpec::Counts { bins: 3 };
    let h1 = Histogram::from_masses(spec.clone(), vec![1.0, 2.0, 3.0]).unwrap();
    assert_eq!(two_sample_tv(&h1, &h1).unwrap(), 0.0);
    let a = Histogram::from_masses(spec.clone(), vec![1.0, 0.0, 0.0]).unwrap();
    let b = Histogram::from_masses(spec.clone(), vec![0.0, 4.0, 5.0]).unwrap();
    assert!((two_sample_tv(&a, &b).unwrap() - 1.0).abs() < 1e-15);
    let other = Histogram::new(BinSpec::Counts { bins: 4 });
    assert!(matches!(two_sample_tv(&a, &other), Err(Error::Spec(_))));
}

#[test]
fn tv_between_independent_poisson_samples() {
    let draw = |seed: u64| {
        let mut s = SeededStream::new(seed, 0);
        let pois = Poisson::new(0.5).unwrap();
        let mut h = Histogram::new(BinSpec::Counts { bins: 8 });
        for _ in 0..100_000 {
            let n: f64 = pois.sample(&mut s);
            h.add_count(n as usize, 1.0);
        }
        h
    };
    assert!(two_sample_tv(&draw(1), &draw(2)).unwrap() < 0.01);
}

#[test]
fn chi_square_exact_expectations() {
    let pmf = [0.2, 0.3, 0.5];
    let h = Histogram::from_masses(BinSpec::Counts { bins: 3 }, vec![200.0, 300.0, 500.0]).unwrap();
    assert!((chi_square_gof(&h, &pmf).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn chi_square_detects_wrong_mean() {
    let mut s = SeededStream::new(8, 0);
    let pois = Poisson::new(0.5).unwrap();
    let bins = 10;
    let mut h = Histogram::new(BinSpec::Counts { bins });
    for _ in 0..100_000 {
        let n: f64 = pois.sample(&mut s);
        h.add_count(n as usize, 1.0);
    }
    assert!(chi_square_gof(&h, &poisson_pmf(0.5, bins)).unwrap() > 0.001);
    assert!(chi_square_gof(&h, &poisson_pmf(0.6, bins)).unwrap() < 1e-6);
}

#[test]
fn chi_square_rejects_empty_histogram() {
    let h = Histogram::new(BinSpec::Counts { bins: 3 });
    assert!(matches!(
        chi_square_gof(&h, &[0.3, 0.3, 0.4]),
        Err(Error::Data(_))
    ));
}

#[test]
fn grid_binning() {
    let spec = BinSpec::Grid {
        re_edges: vec![-1.0, 0.0, 1.0],
        im_edges: vec![-1.0, 1.0],
    };
    assert_eq!(spec.len(), 3);
    assert_eq!(spec.index_of_complex(Complex64::new(-0.5, 0.0)), Some(0));
    assert_eq!(spec.index_of_complex(Complex64::new(0.5, 0.9)), Some(1));
    assert_eq!(spec.index_of_complex(Complex64::new(2.0, 0.0)), Some(2));
}

#[test]
fn ensemble_is_schedule_independent() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| ensemble(42, 1000, |_, mut s| s.uniform()))
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn summary_invariants() {
    let z = [
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 2.0),
        Complex64::new(0.5, 0.5),
    ];
    let spec = BinSpec::Grid {
        re_edges: vec![-2.0, 0.0, 2.0],
        im_edges: vec![-2.0, 0.0, 2.0],
    };
    let s = EnsembleSummary::from_complex(&z, Histogram::new(spec));
    assert_eq!(s.count as f64, s.histogram.total());
    assert!(s.second_moment >= s.mean.norm_sqr());
}
