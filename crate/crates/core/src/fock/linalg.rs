//! Dense complex kernels: LU solves, Hermitian eigendecomposition, norms.

use ndarray::{s, Array1, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::scalar::{real, Cx, Real};

/// Maximum absolute column sum.
pub fn norm_one<T: Real>(m: ArrayView2<'_, Cx<T>>) -> T {
    m.columns()
        .into_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<T>())
        .fold(T::zero(), T::max)
}

pub fn max_abs<T: Real>(m: ArrayView2<'_, Cx<T>>) -> T {
    m.iter().map(|z| z.norm()).fold(T::zero(), T::max)
}

/// Solves `A X = B` by LU with partial pivoting.
pub fn solve<T: Real>(a: &Array2<Cx<T>>, b: &Array2<Cx<T>>) -> Result<Array2<Cx<T>>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::InvalidDimension(format!(
            "solve: {}x{} system with {} rhs rows",
            n,
            a.ncols(),
            b.nrows()
        )));
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, lu[[i, k]].norm()))
            .fold((k, T::zero()), |acc, v| if v.1 > acc.1 { v } else { acc });
        if pmax == T::zero() || !pmax.is_finite() {
            return Err(Error::Numeric("singular matrix in LU solve".into()));
        }
        if p != k {
            for j in 0..n {
                lu.swap([k, j], [p, j]);
            }
            for j in 0..x.ncols() {
                x.swap([k, j], [p, j]);
            }
        }
        let pivot = lu[[k, k]];
        for i in k + 1..n {
            let f = lu[[i, k]] / pivot;
            if f == Cx::new(T::zero(), T::zero()) {
                continue;
            }
            lu[[i, k]] = f;
            for j in k + 1..n {
                let t = lu[[k, j]];
                lu[[i, j]] -= f * t;
            }
            for j in 0..x.ncols() {
                let t = x[[k, j]];
                x[[i, j]] -= f * t;
            }
        }
    }
    for k in (0..n).rev() {
        let pivot = lu[[k, k]];
        for j in 0..x.ncols() {
            let mut acc = x[[k, j]];
            for i in k + 1..n {
                acc -= lu[[k, i]] * x[[i, j]];
            }
            x[[k, j]] = acc / pivot;
        }
    }
    Ok(x)
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// The matrix `H = A + iB` is embedded as the real symmetric `[[A, -B], [B, A]]`,
/// which is diagonalised by cyclic Jacobi sweeps. Every eigenvalue of `H` then
/// appears twice; one complex eigenvector per pair is recovered by Gram-Schmidt.
/// Eigenvalues are returned in ascending order with eigenvectors as columns.
pub fn hermitian_eigen<T: Real>(h: &Array2<Cx<T>>) -> Result<(Array1<T>, Array2<Cx<T>>)> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::InvalidDimension("eigen: matrix not square".into()));
    }
    let m = 2 * n;
    let mut s = Array2::<T>::zeros((m, m));
    for i in 0..n {
        for j in 0..n {
            // symmetrise to absorb rounding-level non-Hermiticity
            let z = (h[[i, j]] + h[[j, i]].conj()) * T::lit(0.5);
            s[[i, j]] = z.re;
            s[[i + n, j + n]] = z.re;
            s[[i + n, j]] = z.im;
            s[[i, j + n]] = -z.im;
        }
    }
    let (vals, vecs) = jacobi_symmetric(s)?;

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).expect("finite eigenvalues"));

    let mut out_vals = Vec::with_capacity(n);
    let mut out_vecs: Vec<Array1<Cx<T>>> = Vec::with_capacity(n);
    for &idx in &order {
        if out_vecs.len() == n {
            break;
        }
        let mut v: Array1<Cx<T>> =
            Array1::from_shape_fn(n, |i| Cx::new(vecs[[i, idx]], vecs[[i + n, idx]]));
        for u in &out_vecs {
            let proj: Cx<T> = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
            v.zip_mut_with(u, |x, y| *x -= proj * y);
        }
        let nrm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if nrm > T::lit(0.5) {
            v.mapv_inplace(|z| z / nrm);
            out_vals.push(vals[idx]);
            out_vecs.push(v);
        }
    }
    if out_vecs.len() != n {
        return Err(Error::Numeric("eigenvector recovery failed".into()));
    }
    let mut q = Array2::zeros((n, n));
    for (j, v) in out_vecs.iter().enumerate() {
        q.column_mut(j).assign(v);
    }
    Ok((Array1::from(out_vals), q))
}

fn jacobi_symmetric<T: Real>(mut a: Array2<T>) -> Result<(Array1<T>, Array2<T>)> {
    let n = a.nrows();
    let mut v = Array2::<T>::eye(n);
    let frob_sq = a.iter().map(|x| *x * *x).sum::<T>();
    if frob_sq == T::zero() {
        return Ok((Array1::zeros(n), v));
    }
    // off-diagonal mass at rounding level relative to the whole matrix
    let tiny = T::epsilon() * T::epsilon() * frob_sq;
    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                off += a[[i, j]] * a[[i, j]];
            }
        }
        if off <= tiny {
            let d = Array1::from_shape_fn(n, |i| a[[i, i]]);
            return Ok((d, v));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[[p, q]];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - sn * akq;
                    a[[k, q]] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - sn * aqk;
                    a[[q, k]] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - sn * vkq;
                    v[[k, q]] = sn * vkp + c * vkq;
                }
            }
        }
    }
    Err(Error::Numeric(
        "Jacobi eigen-iteration did not converge".into(),
    ))
}

/// Largest singular value.
pub fn spectral_norm<T: Real>(m: ArrayView2<'_, Cx<T>>) -> Result<T> {
    if m.is_empty() {
        return Ok(T::zero());
    }
    let scale = max_abs(m);
    if scale == T::zero() {
        return Ok(T::zero());
    }
    // rescale so the Gram matrix neither underflows nor overflows
    let x = m.mapv(|z| z / scale);
    let gram = conj_t(x.view()).dot(&x);
    let (vals, _) = hermitian_eigen(&gram)?;
    let top = vals.iter().copied().fold(T::zero(), T::max);
    Ok(top.sqrt() * scale)
}

pub fn conj_t<T: Real>(m: ArrayView2<'_, Cx<T>>) -> Array2<Cx<T>> {
    m.t().mapv(|z| z.conj())
}

pub fn top_left<T: Real>(m: ArrayView2<'_, Cx<T>>, d: usize) -> ArrayView2<'_, Cx<T>> {
    m.slice_move(s![..d, ..d])
}

pub fn identity<T: Real>(d: usize) -> Array2<Cx<T>> {
    Array2::from_shape_fn((d, d), |(i, j)| {
        if i == j {
            real(T::one())
        } else {
            real(T::zero())
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solve_recovers_known_solution() {
        let a = array![[c(2.0, 1.0), c(0.0, -1.0)], [c(1.0, 0.0), c(3.0, 0.5)]];
        let x = array![[c(1.0, 2.0)], [c(-0.5, 0.25)]];
        let b = a.dot(&x);
        let got = solve(&a, &b).unwrap();
        assert!(max_abs((&got - &x).view()) < 1e-14);
    }

    #[test]
    fn singular_system_is_reported() {
        let a = Array2::<Complex64>::zeros((2, 2));
        let b = identity::<f64>(2);
        assert!(matches!(solve(&a, &b), Err(Error::Numeric(_))));
    }

    #[test]
    fn eigen_of_pauli_y() {
        let y = array![[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]];
        let (vals, vecs) = hermitian_eigen(&y).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        let recon = vecs
            .dot(&Array2::from_diag(&vals.mapv(|v| c(v, 0.0))))
            .dot(&conj_t(vecs.view()));
        assert!(max_abs((&recon - &y).view()) < 1e-13);
    }

    #[test]
    fn eigen_handles_degenerate_spectrum() {
        let h = identity::<f64>(4).mapv(|z| z * 3.0);
        let (vals, vecs) = hermitian_eigen(&h).unwrap();
        assert!(vals.iter().all(|v| (v - 3.0).abs() < 1e-14));
        let gram = conj_t(vecs.view()).dot(&vecs);
        assert!(max_abs((&gram - &identity::<f64>(4)).view()) < 1e-13);
    }

    #[test]
    fn spectral_norm_of_rank_one() {
        // u v^† has norm |u||v|
        let u = array![c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 1.0)];
        let v = array![c(0.5, 0.5), c(1.0, 0.0), c(0.0, 0.0)];
        let m = Array2::from_shape_fn((3, 3), |(i, j)| u[i] * v[j].conj());
        let want = (1.0f64 + 4.0 + 2.0).sqrt() * (0.5f64 + 1.0).sqrt();
        assert!((spectral_norm(m.view()).unwrap() - want).abs() < 1e-13);
    }
}
