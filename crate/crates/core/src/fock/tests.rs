use super::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[test]
fn lowering_d2() {
    let a = make_lowering::<f64>(2).unwrap();
    assert_eq!(a.get(0, 1), c(1.0, 0.0));
    assert_eq!(a.get(0, 0), c(0.0, 0.0));
    assert_eq!(a.get(1, 0), c(0.0, 0.0));
    assert_eq!(a.get(1, 1), c(0.0, 0.0));
}

#[test]
fn lowering_rejects_small_dimension() {
    assert!(matches!(
        make_lowering::<f64>(1),
        Err(Error::InvalidDimension(_))
    ));
}

#[test]
fn lowering_annihilates_vacuum() {
    let a = make_lowering::<f64>(6).unwrap();
    let out = a.apply(&Ket::number(6, 0).unwrap());
    assert_eq!(out.norm_sqr(), 0.0);
}

#[test]
fn canonical_commutator_exposes_truncation() {
    // brute-force matrix products: diag(1, ..., 1, -(d-1))
    let d = 8;
    let a = make_lowering::<f64>(d).unwrap();
    let comm = a.commutator(&a.adjoint());
    for i in 0..d {
        for j in 0..d {
            let want = if i != j {
                0.0
            } else if i == d - 1 {
                -7.0
            } else {
                1.0
            };
            assert!((comm.get(i, j) - c(want, 0.0)).norm() < 1e-14);
        }
    }
}

#[test]
fn number_exp_examples() {
    let id = number_exp::<f64>(5, 0.0).unwrap();
    assert_eq!(id, Operator::identity(5));
    let half = number_exp::<f64>(3, std::f64::consts::LN_2).unwrap();
    for (n, want) in [1.0, 0.5, 0.25].into_iter().enumerate() {
        assert!((half.get(n, n).re - want).abs() < 1e-15);
    }
    // partial geometric sum oracle
    let oracle: f64 = (0..50).map(|n| 0.5f64.powi(n)).sum();
    let tr = number_exp::<f64>(50, std::f64::consts::LN_2)
        .unwrap()
        .trace();
    assert!((tr.re - oracle).abs() < 1e-12);
    assert!((tr.re - (2.0 - 2f64.powi(-49))).abs() < 1e-12);
}

#[test]
fn number_exp_rejects_negative_exponent() {
    assert!(matches!(number_exp::<f64>(4, -0.1), Err(Error::Domain(_))));
    assert!(matches!(
        number_exp::<f64>(4, f64::NAN),
        Err(Error::Domain(_))
    ));
}

#[test]
fn exp_lowering_examples() {
    assert_eq!(exp_lowering::<f64>(4, c(0.0, 0.0)), Operator::identity(4));
    let e = exp_lowering::<f64>(2, c(0.3, 0.0));
    assert!((e.get(0, 1) - c(0.3, 0.0)).norm() < 1e-16);
    assert_eq!(e.get(1, 0), c(0.0, 0.0));
    assert_eq!(e.get(0, 0), c(1.0, 0.0));

    // eigenrelation exp(c a)|alpha> = exp(c alpha)|alpha>
    let (alpha, cc) = (c(0.5, 0.0), c(0.4, 0.0));
    let ket = coherent_state::<f64>(40, alpha);
    let out = exp_lowering::<f64>(40, cc).apply(&ket);
    let factor = (cc * alpha).exp();
    for n in 0..20 {
        assert!((out.amplitudes()[n] - factor * ket.amplitudes()[n]).norm() < 1e-10);
    }
}

#[test]
fn exp_lowering_matches_general_exponential() {
    let a = make_lowering::<f64>(12).unwrap();
    let cc = c(0.7, -1.1);
    let oracle = matrix_exp(&a.scale(cc)).unwrap();
    assert!(subblock_norm_diff(&oracle, &exp_lowering(12, cc), 12).unwrap() < 1e-12);
}

#[test]
fn displacement_examples() {
    assert!(displacement::<f64>(10, c(0.0, 0.0)).max_abs() - 1.0 < 1e-15);
    assert!(
        subblock_norm_diff(
            &displacement::<f64>(10, c(0.0, 0.0)),
            &Operator::identity(10),
            10
        )
        .unwrap()
            < 1e-15
    );

    // coherent-state expansion oracle for D_alpha|0>
    let d = 40;
    let alpha = 1.0f64;
    let col = displacement::<f64>(d, c(alpha, 0.0)).apply(&Ket::number(d, 0).unwrap());
    for n in 0..d {
        let want = (-alpha * alpha / 2.0).exp() * alpha.powi(n as i32) / factorial(n).sqrt();
        assert!((col.amplitudes()[n] - c(want, 0.0)).norm() < 1e-10, "n={n}");
    }

    // unitarity on the safe subblock
    let dmat = displacement::<f64>(d, c(1.0, 0.0));
    let prod = &dmat.adjoint() * &dmat;
    assert!(subblock_norm_diff(&prod, &Operator::identity(d), 20).unwrap() < 1e-8);
}

#[test]
fn displacement_adjoint_is_inverse_displacement() {
    let d = 40;
    let alpha = c(0.6, -0.4);
    let forward = displacement::<f64>(d, alpha).adjoint();
    let backward = displacement::<f64>(d, -alpha);
    assert!(subblock_norm_diff(&forward, &backward, d).unwrap() < 1e-12);
}

#[test]
fn displacement_matches_generator_exponential() {
    let d = 60;
    let alpha = c(0.8, 0.3);
    let a = make_lowering::<f64>(d).unwrap();
    let gen = &a.adjoint().scale(alpha) - &a.scale(alpha.conj());
    let oracle = matrix_exp(&gen).unwrap();
    assert!(subblock_norm_diff(&oracle, &displacement(d, alpha), 20).unwrap() < 1e-10);
}

#[test]
fn coherent_state_examples() {
    let vac = coherent_state::<f64>(10, c(0.0, 0.0));
    assert_eq!(vac, Ket::number(10, 0).unwrap());
    assert!((coherent_state::<f64>(40, c(1.0, 0.0)).norm_sqr() - 1.0).abs() < 1e-12);

    let (alpha, beta) = (c(0.5, 0.0), c(0.0, 0.5));
    let overlap = coherent_state::<f64>(40, alpha).inner(&coherent_state(40, beta));
    let want = (-alpha.norm_sqr() / 2.0 - beta.norm_sqr() / 2.0 + alpha.conj() * beta).exp();
    assert!((overlap - want).norm() < 1e-10);
}

#[test]
fn matrix_exp_examples() {
    assert_eq!(
        matrix_exp(&Operator::<f64>::zeros(5)).unwrap(),
        Operator::identity(5)
    );
    let diag = Operator::<f64>::diagonal([c(0.3, 0.0), c(-1.0, 2.0), c(2.5, 0.0)]);
    let e = matrix_exp(&diag).unwrap();
    for (i, z) in [c(0.3, 0.0), c(-1.0, 2.0), c(2.5, 0.0)].iter().enumerate() {
        assert!((e.get(i, i) - z.exp()).norm() < 1e-13 * z.exp().norm().max(1.0));
    }
    let r = 0.7;
    let gen = number_operator::<f64>(30).scale_real(-r);
    let diff =
        subblock_norm_diff(&matrix_exp(&gen).unwrap(), &number_exp(30, r).unwrap(), 30).unwrap();
    assert!(diff < 1e-12, "{diff}");
}

#[test]
fn subblock_norm_examples() {
    let id = Operator::<f64>::identity(6);
    assert_eq!(subblock_norm_diff(&id, &id, 6).unwrap(), 0.0);
    for sub in 1..=6 {
        assert!((subblock_norm_diff(&id, &Operator::zeros(6), sub).unwrap() - 1.0).abs() < 1e-14);
    }
    let a = Operator::<f64>::diagonal([c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
    let b = Operator::<f64>::diagonal([c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
    assert_eq!(subblock_norm_diff(&a, &b, 2).unwrap(), 0.0);
    assert!(matches!(
        subblock_norm_diff(&a, &b, 4),
        Err(Error::InvalidDimension(_))
    ));
}

#[test]
fn density_validation() {
    assert!(Density::<f64>::number(5, 2).is_ok());
    let mut bad = Array2::<Complex64>::zeros((2, 2));
    bad[[0, 0]] = c(1.2, 0.0);
    bad[[1, 1]] = c(-0.2, 0.0);
    assert!(matches!(Density::from_matrix(bad), Err(Error::Domain(_))));
    let mut nonherm = Array2::<Complex64>::zeros((2, 2));
    nonherm[[0, 0]] = c(1.0, 0.0);
    nonherm[[0, 1]] = c(0.1, 0.0);
    assert!(matches!(
        Density::from_matrix(nonherm),
        Err(Error::Domain(_))
    ));
}

#[test]
fn density_ensemble_reconstructs_state() {
    let d = 6;
    let mut m = Array2::<Complex64>::zeros((d, d));
    let psi = coherent_state::<f64>(d, c(0.3, 0.2)).normalized().unwrap();
    for i in 0..d {
        for j in 0..d {
            m[[i, j]] = psi.amplitudes()[i] * psi.amplitudes()[j].conj() * 0.7;
        }
    }
    m[[2, 2]] += c(0.3, 0.0);
    let rho = Density::from_matrix(m.clone()).unwrap();
    let ens = rho.ensemble(1e-14).unwrap();
    assert_eq!(ens.len(), 2);
    let mut recon = Array2::<Complex64>::zeros((d, d));
    for (p, k) in &ens {
        let a = k.amplitudes();
        for i in 0..d {
            for j in 0..d {
                recon[[i, j]] += a[i] * a[j].conj() * *p;
            }
        }
    }
    assert!(linalg::max_abs((&recon - &m).view()) < 1e-12);
}

#[test]
fn displaced_columns_agree_with_small_amplitude_displacement() {
    let alpha = c(0.7, -0.5);
    let d = 40;
    let cols = displaced_number_states::<f64>(d, alpha, 10);
    let dmat = displacement::<f64>(d, alpha);
    for n in 0..10 {
        for k in 0..20 {
            assert!((cols[[k, n]] - dmat.get(k, n)).norm() < 1e-12);
        }
    }
}

#[test]
fn displaced_columns_stay_orthonormal_at_large_amplitude() {
    // |alpha|^2 = 121: far outside the regime of the triangular product
    let alpha = c(11.0, 0.0);
    let count = 20;
    let work = displacement_work_dim(alpha.norm(), count);
    let cols = displaced_number_states::<f64>(work, alpha, count);
    let gram = linalg::conj_t(cols.view()).dot(&cols);
    assert!(linalg::max_abs((&gram - &linalg::identity::<f64>(count)).view()) < 1e-12);
    assert!(linalg::max_abs(cols.slice(ndarray::s![work - 5.., ..])) < 1e-30);
}

#[test]
fn single_precision_kernels() {
    let a = make_lowering::<f32>(10).unwrap();
    let r = 0.3f32;
    let lhs = &a * &number_exp(10, r).unwrap();
    let rhs = (&number_exp(10, r).unwrap() * &a).scale_real((-r).exp());
    assert!(subblock_norm_diff(&lhs, &rhs, 10).unwrap() < 1e-6);
    let e = matrix_exp(&number_operator::<f32>(10).scale_real(-r)).unwrap();
    assert!(subblock_norm_diff(&e, &number_exp(10, r).unwrap(), 10).unwrap() < 1e-5);
}

proptest! {
    #[test]
    fn number_exp_is_a_semigroup(r1 in 0.0f64..3.0, r2 in 0.0f64..3.0, d in 2usize..30) {
        let lhs = &number_exp::<f64>(d, r1).unwrap() * &number_exp(d, r2).unwrap();
        let rhs = number_exp::<f64>(d, r1 + r2).unwrap();
        prop_assert!(subblock_norm_diff(&lhs, &rhs, d).unwrap() < 1e-15);
    }

    #[test]
    fn exp_lowering_is_a_group(re1 in -1.0f64..1.0, im1 in -1.0f64..1.0, re2 in -1.0f64..1.0, im2 in -1.0f64..1.0, d in 2usize..30) {
        let (c1, c2) = (c(re1, im1), c(re2, im2));
        let lhs = &exp_lowering::<f64>(d, c1) * &exp_lowering(d, c2);
        let scale = lhs.subblock_norm(d).unwrap();
        prop_assert!(subblock_norm_diff(&lhs, &exp_lowering(d, c1 + c2), d).unwrap() < 1e-12 * scale);
    }

    #[test]
    fn commutator_is_identity_except_top(d in 2usize..25) {
        let a = make_lowering::<f64>(d).unwrap();
        let comm = a.commutator(&a.adjoint());
        let mut want = Operator::<f64>::identity(d);
        want = Operator::from_matrix({
            let mut m = want.into_matrix();
            m[[d - 1, d - 1]] = c(-((d - 1) as f64), 0.0);
            m
        }).unwrap();
        prop_assert!(subblock_norm_diff(&comm, &want, d).unwrap() < 1e-13);
    }

    #[test]
    fn lowering_renormalization_is_exact(r in 0.0f64..5.0, d in 2usize..45) {
        let a = make_lowering::<f64>(d).unwrap();
        let e = number_exp::<f64>(d, r).unwrap();
        let lhs = &a * &e;
        let rhs = (&e * &a).scale_real((-r).exp());
        prop_assert!(subblock_norm_diff(&lhs, &rhs, d).unwrap() < 1e-15);
    }

    #[test]
    fn exponential_renormalization_is_exact(r in 0.0f64..5.0, re in -2.0f64..2.0, im in -2.0f64..2.0, d in 2usize..45) {
        let cc = c(re, im);
        let e = number_exp::<f64>(d, r).unwrap();
        let lhs = &exp_lowering::<f64>(d, cc) * &e;
        let rhs = &e * &exp_lowering(d, cc * (-r).exp());
        let scale = lhs.subblock_norm(d).unwrap();
        prop_assert!(subblock_norm_diff(&lhs, &rhs, d).unwrap() < 1e-12 * scale);
    }
}
