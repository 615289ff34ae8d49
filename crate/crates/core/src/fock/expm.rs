//! Matrix exponential by scaling and squaring with a degree-13 Padé approximant.

use ndarray::Array2;

use super::linalg::{identity, norm_one, solve};
use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the degree-13 approximant meets unit roundoff in double precision.
const THETA13: f64 = 5.371920351148152;

pub(crate) fn expm<T: Real>(a: &Array2<Cx<T>>) -> Result<Array2<Cx<T>>> {
    let n = a.nrows();
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric(
            "matrix exponential of non-finite matrix".into(),
        ));
    }
    let nrm = norm_one(a.view()).as_f64();
    let squarings = if nrm > THETA13 {
        (nrm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.mapv(|z| z / T::lit(2f64.powi(squarings)));

    let b = |k: usize| T::lit(PADE13[k]);
    let eye = identity::<T>(n);
    let a2 = scaled.dot(&scaled);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let lin = |c6: usize, c4: usize, c2: usize| {
        a6.mapv(|z| z * b(c6)) + a4.mapv(|z| z * b(c4)) + a2.mapv(|z| z * b(c2))
    };
    // U = A [A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I]
    let mut u_inner = a6.dot(&lin(13, 11, 9));
    u_inner = u_inner + lin(7, 5, 3) + eye.mapv(|z| z * b(1));
    let u = scaled.dot(&u_inner);
    // V = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let v = a6.dot(&lin(12, 10, 8)) + lin(6, 4, 2) + eye.mapv(|z| z * b(0));

    let mut x = solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..squarings {
        x = x.dot(&x);
    }
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("matrix exponential overflowed".into()));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::linalg::max_abs;
    use ndarray::array;
    use num_complex::Complex64;

    #[test]
    fn rotation_generator() {
        // exp([[0, -t], [t, 0]]) = [[cos t, -sin t], [sin t, cos t]]
        let t = 2.7;
        let a = array![
            [Complex64::new(0.0, 0.0), Complex64::new(-t, 0.0)],
            [Complex64::new(t, 0.0), Complex64::new(0.0, 0.0)]
        ];
        let e = expm(&a).unwrap();
        let want = array![
            [Complex64::new(t.cos(), 0.0), Complex64::new(-t.sin(), 0.0)],
            [Complex64::new(t.sin(), 0.0), Complex64::new(t.cos(), 0.0)]
        ];
        assert!(max_abs((&e - &want).view()) < 1e-14);
    }

    #[test]
    fn nilpotent_jordan_block() {
        // exp of a 3x3 shift is I + N + N^2/2
        let mut a = Array2::<Complex64>::zeros((3, 3));
        a[[0, 1]] = Complex64::new(1.0, 0.0);
        a[[1, 2]] = Complex64::new(1.0, 0.0);
        let e = expm(&a).unwrap();
        assert!((e[[0, 2]] - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((e[[0, 1]] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn overflow_is_an_error() {
        let a = array![[Complex64::new(1.0e3, 0.0)]];
        assert!(matches!(expm(&a), Err(Error::Numeric(_))));
    }
}
