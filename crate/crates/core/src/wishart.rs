//! Distribution of the dominant eigenvalue of an uncorrelated complex
//! Wishart matrix HᴴH, H being n_R×n_T with i.i.d. CN(0, 1) entries.
//!
//! The CDF is det Ψ(x) / K with Ψ_ij = γ(q − p + i + j − 1, x) (lower
//! incomplete gamma, integer order) and K = Π_s (p − s)!(q − s)!. Each entry
//! is an integer-coefficient combination of x^l e^{−kx}, so the determinant
//! is expanded exactly over that ring and differentiated term-wise. The
//! density is then rewritten in the gamma basis
//!
//! ```text
//! p(x) = Σ_k Σ_l ψ_kl · x^l / l! · k^{l+1} e^{−kx}
//! ```
//!
//! in which Σψ_kl = 1 holds exactly.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};
use crate::special::{gamma_p_int, ln_factorial, NeumaierSum};

/// Largest antenna dimension accepted by [`compute_weights`].
pub const DIMENSION_CAP: usize = 8;

/// Exponential-polynomial Σ c_{k,l} x^l e^{−kx} with exact integer coefficients.
#[derive(Debug, Clone, Default, PartialEq)]
struct ExpPoly {
    terms: BTreeMap<(u32, u32), BigInt>,
}

impl ExpPoly {
    /// γ(n, x) = (n−1)! − e^{−x} Σ_{m<n} (n−1)!/m! x^m
    fn lower_incomplete_gamma(n: u32) -> Self {
        let mut terms = BTreeMap::new();
        let fact = factorial(n - 1);
        terms.insert((0, 0), fact.clone());
        // (n−1)!/m! built downward from m = n−1
        let mut ratio = BigInt::one();
        for m in (0..n).rev() {
            terms.insert((1, m), -ratio.clone());
            ratio *= BigInt::from(m.max(1));
        }
        ExpPoly { terms }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_scaled(&mut self, other: &ExpPoly, sign: i32) {
        for (key, c) in &other.terms {
            let entry = self.terms.entry(*key).or_insert_with(BigInt::zero);
            if sign >= 0 {
                *entry += c;
            } else {
                *entry -= c;
            }
        }
        self.terms.retain(|_, c| !c.is_zero());
    }

    fn mul(&self, other: &ExpPoly) -> ExpPoly {
        let mut terms: BTreeMap<(u32, u32), BigInt> = BTreeMap::new();
        for ((k1, l1), c1) in &self.terms {
            for ((k2, l2), c2) in &other.terms {
                *terms.entry((k1 + k2, l1 + l2)).or_insert_with(BigInt::zero) += c1 * c2;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        ExpPoly { terms }
    }
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, m| acc * BigInt::from(m))
}

/// Laplace expansion along rows, memoized on the set of remaining columns.
fn determinant(matrix: &[Vec<ExpPoly>]) -> ExpPoly {
    let p = matrix.len();
    let mut memo: Vec<Option<ExpPoly>> = vec![None; 1 << p];
    fn minor(matrix: &[Vec<ExpPoly>], cols: usize, memo: &mut Vec<Option<ExpPoly>>) -> ExpPoly {
        if cols == 0 {
            let mut one = ExpPoly::default();
            one.terms.insert((0, 0), BigInt::one());
            return one;
        }
        if let Some(d) = &memo[cols] {
            return d.clone();
        }
        let p = matrix.len();
        let row = p - cols.count_ones() as usize;
        let mut acc = ExpPoly::default();
        let mut position = 0;
        for c in 0..p {
            if cols & (1 << c) == 0 {
                continue;
            }
            let sub = minor(matrix, cols & !(1 << c), memo);
            if !sub.is_zero() {
                let sign = if position % 2 == 0 { 1 } else { -1 };
                acc.add_scaled(&matrix[row][c].mul(&sub), sign);
            }
            position += 1;
        }
        memo[cols] = Some(acc.clone());
        acc
    }
    minor(matrix, (1 << p) - 1, &mut memo)
}

/// One term ψ_kl of the dominant-eigenvalue density.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenWeight {
    pub k: u32,
    pub l: u32,
    pub exact: BigRational,
    pub psi: f64,
}

/// Weight table of the dominant-eigenvalue density for one antenna configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenWeightTable {
    pub p: usize,
    pub q: usize,
    pub weights: Vec<EigenWeight>,
}

/// Exact ψ_kl table for an n_R×n_T Rayleigh channel.
pub fn compute_weights(n_r: usize, n_t: usize) -> Result<EigenWeightTable> {
    if n_r == 0 || n_t == 0 {
        return invalid("antenna counts must be at least 1");
    }
    if n_r > DIMENSION_CAP || n_t > DIMENSION_CAP {
        return Err(Error::UnsupportedDimension {
            n_r,
            n_t,
            cap: DIMENSION_CAP,
        });
    }
    let p = n_r.min(n_t);
    let q = n_r.max(n_t);

    let matrix: Vec<Vec<ExpPoly>> = (1..=p)
        .map(|i| {
            (1..=p)
                .map(|j| ExpPoly::lower_incomplete_gamma((q - p + i + j - 1) as u32))
                .collect()
        })
        .collect();
    let det = determinant(&matrix);

    let norm: BigInt = (1..=p)
        .map(|s| factorial((p - s) as u32) * factorial((q - s) as u32))
        .product();
    // F(∞) = 1: only the constant survives at infinity and it must equal K.
    for ((k, l), c) in &det.terms {
        if *k == 0 {
            let ok = if *l == 0 { *c == norm } else { c.is_zero() };
            if !ok {
                return Err(Error::NumericInstability(format!(
                    "Wishart CDF expansion has stray term x^{l} with coefficient {c}"
                )));
            }
        }
    }

    // d/dx c x^l e^{−kx} = c l x^{l−1} e^{−kx} − c k x^l e^{−kx}
    let mut density: BTreeMap<(u32, u32), BigInt> = BTreeMap::new();
    for ((k, l), c) in &det.terms {
        if *k == 0 {
            continue;
        }
        if *l > 0 {
            *density.entry((*k, l - 1)).or_insert_with(BigInt::zero) += c * BigInt::from(*l);
        }
        *density.entry((*k, *l)).or_insert_with(BigInt::zero) -= c * BigInt::from(*k);
    }

    let weights = density
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|((k, l), c)| {
            // ψ = d · l! / k^{l+1}, d = c / K
            let numer = c * factorial(l);
            let denom = &norm * BigInt::from(k).pow(l + 1);
            let exact = BigRational::new(numer, denom);
            let psi = exact.to_f64().unwrap_or(f64::NAN);
            EigenWeight { k, l, exact, psi }
        })
        .collect();

    Ok(EigenWeightTable { p, q, weights })
}

impl EigenWeightTable {
    /// Σψ_kl in exact arithmetic.
    pub fn exact_sum(&self) -> BigRational {
        self.weights
            .iter()
            .fold(BigRational::zero(), |acc, w| acc + &w.exact)
    }

    /// Largest |ψ_kl|; a proxy for cancellation in floating-point evaluation.
    pub fn max_abs_weight(&self) -> f64 {
        self.weights.iter().map(|w| w.psi.abs()).fold(0.0, f64::max)
    }

    /// Density of ρ̄·λ_max at x.
    pub fn pdf(&self, x: f64, scale: f64) -> Result<f64> {
        check_args(x, scale)?;
        Ok(self.pdf_unchecked(x, scale))
    }

    pub(crate) fn pdf_unchecked(&self, x: f64, scale: f64) -> f64 {
        let mut sum = NeumaierSum::default();
        for w in &self.weights {
            let rate = w.k as f64 / scale;
            let term = if x == 0.0 {
                if w.l == 0 {
                    rate
                } else {
                    0.0
                }
            } else {
                let z = x * rate;
                (w.l as f64 * z.ln() - ln_factorial(w.l) + rate.ln() - z).exp()
            };
            sum.add(w.psi * term);
        }
        sum.value().max(0.0)
    }

    /// CDF of ρ̄·λ_max at x, integrated term-wise.
    pub fn cdf(&self, x: f64, scale: f64) -> Result<f64> {
        check_args(x, scale)?;
        let s: NeumaierSum = self
            .weights
            .iter()
            .map(|w| w.psi * gamma_p_int(w.l + 1, x * w.k as f64 / scale))
            .collect();
        Ok(s.value().clamp(0.0, 1.0))
    }

    /// E[λ_max]·ρ̄ = Σ ψ_kl (l+1) ρ̄/k.
    pub fn mean(&self, scale: f64) -> f64 {
        self.weights
            .iter()
            .map(|w| w.psi * (w.l + 1) as f64 * scale / w.k as f64)
            .collect::<NeumaierSum>()
            .value()
    }

    /// Rows (k, l, ψ_kl).
    pub fn rows(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.weights.iter().map(|w| (w.k, w.l, w.psi))
    }
}

fn check_args(x: f64, scale: f64) -> Result<()> {
    if !(x >= 0.0) {
        return invalid(format!("x must be nonnegative, got {x}"));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return invalid(format!("scale must be positive, got {scale}"));
    }
    Ok(())
}

/// Density of the dominant eigenvalue scaled by ρ̄.
pub fn pdf_lambda_max(x: f64, table: &EigenWeightTable, scale: f64) -> Result<f64> {
    table.pdf(x, scale)
}
