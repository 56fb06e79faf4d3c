//! Householder tridiagonalisation followed by implicit QL with Wilkinson
//! shifts, generic over real and complex scalars.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use crate::linalg::{HermitianMatrix, C64};
use crate::{math, Error, Result};

pub(crate) trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + PartialEq
{
    const ZERO: Self;
    fn conj(self) -> Self;
    fn abs2(self) -> f64;
    fn re(self) -> f64;
    fn from_re(x: f64) -> Self;
    fn scale(self, s: f64) -> Self;
    fn into_c64(self) -> C64;
}

impl Scalar for f64 {
    const ZERO: f64 = 0.0;
    fn conj(self) -> f64 {
        self
    }
    fn abs2(self) -> f64 {
        self * self
    }
    fn re(self) -> f64 {
        self
    }
    fn from_re(x: f64) -> f64 {
        x
    }
    fn scale(self, s: f64) -> f64 {
        self * s
    }
    fn into_c64(self) -> C64 {
        C64::new(self, 0.0)
    }
}

impl Scalar for C64 {
    const ZERO: C64 = C64::new(0.0, 0.0);
    fn conj(self) -> C64 {
        C64::conj(&self)
    }
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
    fn re(self) -> f64 {
        self.re
    }
    fn from_re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }
    fn scale(self, s: f64) -> C64 {
        C64::new(self.re * s, self.im * s)
    }
    fn into_c64(self) -> C64 {
        self
    }
}

fn phase<S: Scalar>(x: S) -> S {
    let a = math::sqrt(x.abs2());
    if a == 0.0 {
        S::from_re(1.0)
    } else {
        x.scale(1.0 / a)
    }
}

/// Eigenvalues (ascending) and, when requested, eigenvectors stored column by
/// column, of the Hermitian matrix held column-major in `a` (overwritten).
pub(crate) fn hermitian_eigen<S: Scalar>(a: &mut [S], n: usize, vectors: bool) -> Result<(Vec<f64>, Vec<S>)> {
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let mut d = vec![0.0; n];
    let mut sub = vec![S::ZERO; n];
    // Reflector k is stored in column k, rows k+1..n.
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let col = (k * n + k + 1)..(k * n + n);
        let xnorm2: f64 = a[col.clone()].iter().map(|v| v.abs2()).sum();
        let tail2 = xnorm2 - a[col.start].abs2();
        d[k] = a[k * n + k].re();
        if tail2 <= f64::MIN_POSITIVE {
            sub[k] = a[col.start];
            for v in &mut a[col] {
                *v = S::ZERO;
            }
            continue;
        }
        let xnorm = math::sqrt(xnorm2);
        let alpha = -phase(a[col.start]).scale(xnorm);
        sub[k] = alpha;
        let mut v: Vec<S> = a[col.clone()].to_vec();
        v[0] -= alpha;
        let vn = math::sqrt(v.iter().map(|x| x.abs2()).sum::<f64>());
        for x in v.iter_mut() {
            *x = x.scale(1.0 / vn);
        }
        // p = A22 v, trailing block starts at (k+1, k+1)
        let off = k + 1;
        let mut p = vec![S::ZERO; m];
        for (j, &vj) in v.iter().enumerate() {
            if vj == S::ZERO {
                continue;
            }
            let c = &a[(off + j) * n + off..(off + j) * n + n];
            for (pi, &aij) in p.iter_mut().zip(c) {
                *pi += aij * vj;
            }
        }
        let kk: f64 = v.iter().zip(&p).map(|(&vi, &pi)| (vi.conj() * pi).re()).sum();
        let q: Vec<S> = p.iter().zip(&v).map(|(&pi, &vi)| pi - vi.scale(kk)).collect();
        for j in 0..m {
            let (vj, qj) = (v[j].conj().scale(2.0), q[j].conj().scale(2.0));
            let c = &mut a[(off + j) * n + off..(off + j) * n + n];
            for i in 0..m {
                c[i] -= v[i] * qj + q[i] * vj;
            }
        }
        a[col].copy_from_slice(&v);
    }
    if n >= 2 {
        d[n - 2] = a[(n - 2) * n + n - 2].re();
        sub[n - 2] = a[(n - 2) * n + n - 1];
    }
    d[n - 1] = a[(n - 1) * n + n - 1].re();

    // Diagonal phases making the subdiagonal real and non-negative.
    let mut phi = vec![S::from_re(1.0); n];
    let mut e = vec![0.0; n];
    for k in 0..n - 1 {
        e[k] = math::sqrt(sub[k].abs2());
        phi[k + 1] = phi[k] * phase(sub[k]);
    }

    let mut z = Vec::new();
    if vectors {
        z = vec![S::ZERO; n * n];
        for i in 0..n {
            z[i * n + i] = phi[i];
        }
        for k in (0..n.saturating_sub(2)).rev() {
            let v = &a[k * n + k + 1..k * n + n];
            if v.iter().all(|x| *x == S::ZERO) {
                continue;
            }
            for c in k + 1..n {
                let col = &mut z[c * n + k + 1..c * n + n];
                let s: S = v.iter().zip(col.iter()).fold(S::ZERO, |acc, (&vi, &wi)| acc + vi.conj() * wi);
                let s2 = s.scale(2.0);
                for (wi, &vi) in col.iter_mut().zip(v) {
                    *wi -= vi * s2;
                }
            }
        }
    }
    tql2(&mut d, &mut e, if vectors { Some(&mut z) } else { None }, n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let vecs = if vectors {
        let mut out = Vec::with_capacity(n * n);
        for &i in &order {
            out.extend_from_slice(&z[i * n..(i + 1) * n]);
        }
        out
    } else {
        Vec::new()
    };
    Ok((values, vecs))
}

/// Implicit QL on the symmetric tridiagonal (d, e), e[i] = T[i+1][i],
/// rotating the columns of `z` when given.
fn tql2<S: Scalar>(d: &mut [f64], e: &mut [f64], mut z: Option<&mut Vec<S>>, n: usize) -> Result<()> {
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::NoConvergence);
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = math::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = math::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        let (lo, hi) = z.split_at_mut((i + 1) * n);
                        let zi = &mut lo[i * n..];
                        let zi1 = &mut hi[..n];
                        for k in 0..n {
                            let t = zi1[k];
                            zi1[k] = zi[k].scale(s) + t.scale(c);
                            zi[k] = zi[k].scale(c) - t.scale(s);
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Solve a Hermitian matrix, using real arithmetic when every entry is real.
pub(crate) fn solve(h: &HermitianMatrix, vectors: bool) -> Result<(Vec<f64>, Vec<C64>)> {
    let n = h.dim();
    let m = h.as_matrix();
    if h.is_real(0.0) {
        let mut a: Vec<f64> = (0..n * n).map(|idx| m[(idx % n, idx / n)].re).collect();
        let (w, v) = hermitian_eigen(&mut a, n, vectors)?;
        Ok((w, v.into_iter().map(Scalar::into_c64).collect()))
    } else {
        let mut a: Vec<C64> = (0..n * n).map(|idx| m[(idx % n, idx / n)]).collect();
        hermitian_eigen(&mut a, n, vectors)
    }
}
