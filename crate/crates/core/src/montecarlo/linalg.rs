//! Small dense complex matrices for the per-draw simulation.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CMat { rows, cols, data }
    }

    /// I.i.d. CN(0, 1) entries.
    pub fn gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        Self::from_fn(rows, cols, |_, _| complex_normal(rng))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn mul(&self, rhs: &CMat) -> Self {
        assert_eq!(self.cols, rhs.rows);
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                for c in 0..rhs.cols {
                    out.data[r * rhs.cols + c] += a * rhs[(k, c)];
                }
            }
        }
        out
    }

    /// AᴴA.
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut s = C64::new(0.0, 0.0);
                for r in 0..self.rows {
                    s += self[(r, i)].conj() * self[(r, j)];
                }
                out[(i, j)] = s;
                out[(j, i)] = s.conj();
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                self.data[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn col(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn frob_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|z| *z *= s);
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

/// CN(0, 1): real and imaginary parts each N(0, 1/2).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// aᴴb.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn normalize(v: &mut [C64]) -> bool {
    let n = norm_sqr(v).sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return false;
    }
    v.iter_mut().for_each(|z| *z /= n);
    true
}

/// `n_cols` Haar-distributed orthonormal columns in Cⁿ (Gram-Schmidt on a
/// Gaussian matrix), returned as an n × n_cols matrix.
pub fn haar_columns<R: Rng + ?Sized>(n: usize, n_cols: usize, rng: &mut R) -> CMat {
    assert!(n_cols <= n);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n_cols);
    while cols.len() < n_cols {
        let mut v: Vec<C64> = (0..n).map(|_| complex_normal(rng)).collect();
        for q in &cols {
            let p = inner(q, &v);
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= p * y);
        }
        if normalize(&mut v) {
            cols.push(v);
        }
    }
    CMat::from_fn(n, n_cols, |r, c| cols[c][r])
}

const MAX_SQUARINGS: usize = 64;
const MAX_RESTARTS: usize = 8;

/// Unit dominant eigenvector of a Hermitian PSD matrix and its eigenvalue.
///
/// Power iteration on repeatedly squared, trace-normalized powers of `m`; a
/// random start vector is drawn from `rng` when the iterate stagnates.
pub fn dominant_eigvec<R: Rng + ?Sized>(
    m: &CMat,
    tol: f64,
    rng: &mut R,
) -> Result<(Vec<C64>, f64)> {
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(Error::InvalidArgument(format!(
            "eigenvector tolerance must lie in (0, 1e-6], got {tol}"
        )));
    }
    let n = m.rows;
    assert_eq!(n, m.cols);
    let tr = m.trace().re;
    if !(tr > 0.0) {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[0] = C64::new(1.0, 0.0);
        return Ok((e, 0.0));
    }
    let residual = |v: &[C64]| -> (f64, f64) {
        let mv = m.mul_vec(v);
        let lambda = inner(v, &mv).re;
        let r: f64 = mv
            .iter()
            .zip(v)
            .map(|(a, b)| (a - b * lambda).norm_sqr())
            .sum();
        (lambda, r.sqrt())
    };

    for restart in 0..MAX_RESTARTS {
        let mut b = m.clone();
        b.scale(1.0 / tr);
        let mut v: Vec<C64> = if restart == 0 {
            let best = (0..n)
                .max_by(|&i, &j| norm_sqr(&b.col(i)).total_cmp(&norm_sqr(&b.col(j))))
                .unwrap_or(0);
            b.col(best)
        } else {
            (0..n).map(|_| complex_normal(rng)).collect()
        };
        if !normalize(&mut v) {
            continue;
        }
        for _ in 0..MAX_SQUARINGS {
            let (lambda, r) = residual(&v);
            if r <= tol * lambda {
                return Ok((v, lambda));
            }
            b = b.mul(&b);
            let t = b.trace().re;
            if !(t > 0.0 && t.is_finite()) {
                break;
            }
            b.scale(1.0 / t);
            v = b.mul_vec(&v);
            if !normalize(&mut v) {
                break;
            }
        }
    }
    Err(Error::NumericInstability(
        "dominant eigenvector iteration did not converge".into(),
    ))
}
