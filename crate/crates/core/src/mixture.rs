//! Total normalized interference power Y as a sum of weighted exponentials.
//!
//! Layer contributions with equal scale are pooled into groups; Y is then
//! gamma distributed (one group) or a signed mixture of gamma densities
//!
//! ```text
//! p_Y(y) = Σ_i Σ_j Ξ_ij · y^{j−1} e^{−y/ρ_i} / (Γ(j) ρ_i^j)
//! ```
//!
//! The Ξ_ij are evaluated in exact rational arithmetic from the (exactly
//! representable) floating-point group scales and rounded once at the end.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};
use crate::scenario::{RateSet, Warning};
use crate::special::{gamma_p_int, gamma_pdf, NeumaierSum};

/// Default relative tolerance below which two scales are pooled.
pub const DEFAULT_GROUP_TOL: f64 = 1e-9;

/// Below this relative separation the Ξ expansion is flagged as ill-conditioned.
pub const CONDITIONING_WARN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateGroup {
    /// Exponential scale ρ_i (mean of one contribution).
    pub rate: f64,
    /// Number of contributions β_i sharing the scale.
    pub multiplicity: u32,
}

/// Grouped scales without coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct RateGroups {
    pub groups: Vec<RateGroup>,
}

impl RateGroups {
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// min over group pairs of |1 − ρ_small/ρ_large|; +∞ for a single group.
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (a, ga) in self.groups.iter().enumerate() {
            for gb in &self.groups[a + 1..] {
                let (lo, hi) = if ga.rate < gb.rate {
                    (ga.rate, gb.rate)
                } else {
                    (gb.rate, ga.rate)
                };
                best = best.min(1.0 - lo / hi);
            }
        }
        best
    }
}

/// Grouped interference distribution with its mixture coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    pub groups: Vec<RateGroup>,
    /// `xi[i][j − 1]` = Ξ_ij
    pub xi: Vec<Vec<f64>>,
    pub min_separation: f64,
}

/// Pools scales whose relative difference is within `rel_tol`.
///
/// Pooled groups take the arithmetic mean scale, which preserves E[Y].
/// Groups come out sorted by descending scale.
pub fn group_rates(rates: &RateSet, rel_tol: f64) -> Result<RateGroups> {
    if rates.is_empty() {
        return Err(Error::EmptyMixture);
    }
    if !(rel_tol > 0.0 && rel_tol < 0.1) {
        return invalid(format!(
            "grouping tolerance must lie in (0, 0.1), got {rel_tol}"
        ));
    }
    if let Some(bad) = rates.rates.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return invalid(format!("interference scales must be positive, got {bad}"));
    }
    let mut sorted = rates.rates.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));

    let mut groups = Vec::new();
    let mut members: Vec<f64> = Vec::new();
    for r in sorted {
        if let Some(&head) = members.first() {
            if (head - r) / head > rel_tol {
                groups.push(pool(&members));
                members.clear();
            }
        }
        members.push(r);
    }
    groups.push(pool(&members));
    Ok(RateGroups { groups })
}

fn pool(members: &[f64]) -> RateGroup {
    let s: NeumaierSum = members.iter().copied().collect();
    RateGroup {
        rate: s.value() / members.len() as f64,
        multiplicity: members.len() as u32,
    }
}

/// Ω(i, j): G-tuples with q_i = 0 and Σq = β_i − j. Indices are 1-based.
pub fn enumerate_tuples(i: usize, j: u32, groups: &RateGroups) -> Result<Vec<Vec<u32>>> {
    let g = groups.len();
    if i < 1 || i > g {
        return invalid(format!("group index {i} outside [1, {g}]"));
    }
    let beta = groups.groups[i - 1].multiplicity;
    if j < 1 || j > beta {
        return invalid(format!("coefficient index {j} outside [1, {beta}]"));
    }
    let free: Vec<usize> = (0..g).filter(|&k| k != i - 1).collect();
    let mut out = Vec::new();
    let mut tuple = vec![0u32; g];
    compositions(&free, beta - j, &mut tuple, &mut out);
    Ok(out)
}

fn compositions(free: &[usize], remaining: u32, tuple: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    match free {
        [] => {
            if remaining == 0 {
                out.push(tuple.clone());
            }
        }
        [last] => {
            tuple[*last] = remaining;
            out.push(tuple.clone());
            tuple[*last] = 0;
        }
        [first, rest @ ..] => {
            for v in (0..=remaining).rev() {
                tuple[*first] = v;
                compositions(rest, remaining - v, tuple, out);
            }
            tuple[*first] = 0;
        }
    }
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite scale")
}

fn binomial(n: u32, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for m in 0..k {
        acc = acc * BigInt::from(n - m) / BigInt::from(m + 1);
    }
    acc
}

/// Fills in Ξ_ij for grouped scales.
pub fn xi_coefficients(groups: &RateGroups) -> Result<MixtureSpec> {
    if groups.is_empty() {
        return Err(Error::EmptyMixture);
    }
    let g = groups.len();
    for a in 0..g {
        for b in a + 1..g {
            if groups.groups[a].rate == groups.groups[b].rate {
                return Err(Error::DegenerateRates(a + 1, b + 1));
            }
        }
    }
    let rates: Vec<BigRational> = groups.groups.iter().map(|gr| exact(gr.rate)).collect();

    let mut xi = Vec::with_capacity(g);
    for i in 0..g {
        let beta_i = groups.groups[i].multiplicity;
        // Per-k factors that do not depend on the tuple.
        let ratio: Vec<BigRational> = rates.iter().map(|r| r / &rates[i]).collect();
        let complement: Vec<BigRational> = ratio.iter().map(|r| BigRational::one() - r).collect();
        let mut row = Vec::with_capacity(beta_i as usize);
        for j in 1..=beta_i {
            let mut total = BigRational::zero();
            for tuple in enumerate_tuples(i + 1, j, groups)? {
                let mut prod = BigRational::one();
                for (k, &q) in tuple.iter().enumerate() {
                    if k == i {
                        continue;
                    }
                    let beta_k = groups.groups[k].multiplicity;
                    let numer =
                        BigRational::from_integer(binomial(beta_k + q - 1, q)) * pow(&ratio[k], q);
                    prod *= numer / pow(&complement[k], beta_k + q);
                }
                total += prod;
            }
            if (beta_i + j) % 2 == 1 {
                total = -total;
            }
            row.push(total.to_f64().unwrap_or(f64::NAN));
        }
        xi.push(row);
    }
    Ok(MixtureSpec {
        groups: groups.groups.clone(),
        xi,
        min_separation: groups.min_separation(),
    })
}

fn pow(x: &BigRational, n: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..n {
        acc *= x;
    }
    acc
}

impl MixtureSpec {
    /// Groups `rates` with the default tolerance and computes Ξ.
    pub fn from_rates(rates: &RateSet) -> Result<Self> {
        Self::from_rates_with_tol(rates, DEFAULT_GROUP_TOL)
    }

    pub fn from_rates_with_tol(rates: &RateSet, rel_tol: f64) -> Result<Self> {
        xi_coefficients(&group_rates(rates, rel_tol)?)
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn warnings(&self) -> Vec<Warning> {
        if self.min_separation < CONDITIONING_WARN {
            vec![Warning::IllConditionedMixture {
                min_separation: self.min_separation,
            }]
        } else {
            Vec::new()
        }
    }

    /// Iterates (i, j, Ξ_ij) with 1-based indices.
    pub fn coefficients(&self) -> impl Iterator<Item = (usize, u32, f64)> + '_ {
        self.xi.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(move |(j, &x)| (i + 1, j as u32 + 1, x))
        })
    }

    pub fn coefficient_sum(&self) -> f64 {
        self.coefficients()
            .map(|(_, _, x)| x)
            .collect::<NeumaierSum>()
            .value()
    }

    /// Density of Y.
    pub fn pdf(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0) {
            return invalid(format!("y must be nonnegative, got {y}"));
        }
        if let [only] = self.groups.as_slice() {
            return Ok(gamma_pdf(y, only.multiplicity, only.rate));
        }
        let s: NeumaierSum = self
            .coefficients()
            .map(|(i, j, x)| x * gamma_pdf(y, j, self.groups[i - 1].rate))
            .collect();
        Ok(s.value().max(0.0))
    }

    pub fn cdf(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0) {
            return invalid(format!("y must be nonnegative, got {y}"));
        }
        let s: NeumaierSum = self
            .coefficients()
            .map(|(i, j, x)| x * gamma_p_int(j, y / self.groups[i - 1].rate))
            .collect();
        Ok(s.value().clamp(0.0, 1.0))
    }

    /// E[Y] = Σ Ξ_ij j ρ_i.
    pub fn mean(&self) -> f64 {
        self.coefficients()
            .map(|(i, j, x)| x * j as f64 * self.groups[i - 1].rate)
            .collect::<NeumaierSum>()
            .value()
    }
}

/// Density of the normalized interference power.
pub fn pdf_y(y: f64, spec: &MixtureSpec) -> Result<f64> {
    spec.pdf(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn groups(pairs: &[(f64, u32)]) -> RateGroups {
        RateGroups {
            groups: pairs
                .iter()
                .map(|&(rate, multiplicity)| RateGroup { rate, multiplicity })
                .collect(),
        }
    }

    #[test]
    fn grouping() {
        let g = group_rates(
            &RateSet {
                rates: vec![5.0, 5.0],
            },
            DEFAULT_GROUP_TOL,
        )
        .unwrap();
        assert_eq!(
            g.groups,
            vec![RateGroup {
                rate: 5.0,
                multiplicity: 2
            }]
        );

        let g = group_rates(
            &RateSet {
                rates: vec![3.98, 10.0, 6.31],
            },
            DEFAULT_GROUP_TOL,
        )
        .unwrap();
        assert_eq!(g.len(), 3);
        assert!(g.groups.iter().all(|x| x.multiplicity == 1));
        assert_eq!(g.groups[0].rate, 10.0);
        assert_eq!(g.groups[2].rate, 3.98);

        let g = group_rates(
            &RateSet {
                rates: vec![5.0, 5.0 * (1.0 + 1e-12)],
            },
            1e-9,
        )
        .unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.groups[0].multiplicity, 2);
        assert!((g.groups[0].rate - 5.0).abs() < 1e-10);
    }

    #[test]
    fn grouping_errors() {
        assert!(matches!(
            group_rates(&RateSet { rates: vec![] }, 1e-9),
            Err(Error::EmptyMixture)
        ));
        assert!(group_rates(&RateSet { rates: vec![1.0] }, 0.5).is_err());
        assert!(group_rates(
            &RateSet {
                rates: vec![1.0, -2.0]
            },
            1e-9
        )
        .is_err());
    }

    #[test]
    fn tuples() {
        let g = groups(&[(2.0, 2), (1.0, 1)]);
        assert_eq!(enumerate_tuples(1, 1, &g).unwrap(), vec![vec![0, 1]]);
        assert_eq!(enumerate_tuples(1, 2, &g).unwrap(), vec![vec![0, 0]]);

        let g = groups(&[(3.0, 3), (2.0, 1), (1.0, 1)]);
        assert_eq!(
            enumerate_tuples(1, 1, &g).unwrap(),
            vec![vec![0, 2, 0], vec![0, 1, 1], vec![0, 0, 2]]
        );
        assert_eq!(enumerate_tuples(1, 3, &g).unwrap(), vec![vec![0, 0, 0]]);
        assert!(enumerate_tuples(0, 1, &g).is_err());
        assert!(enumerate_tuples(2, 2, &g).is_err());
    }

    #[test]
    fn single_group_is_gamma() {
        let m = xi_coefficients(&groups(&[(1.7, 4)])).unwrap();
        assert_eq!(m.xi, vec![vec![0.0, 0.0, 0.0, 1.0]]);
        let m = xi_coefficients(&groups(&[(1.0, 1)])).unwrap();
        assert_eq!(m.pdf(0.0).unwrap(), 1.0);
        let m = xi_coefficients(&groups(&[(1.0, 2)])).unwrap();
        assert!((m.pdf(1.0).unwrap() - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn two_rate_hypoexponential() {
        let m = xi_coefficients(&groups(&[(2.0, 1), (1.0, 1)])).unwrap();
        assert_eq!(m.xi, vec![vec![2.0], vec![-1.0]]);
        for &y in &[0.0, 0.1, 0.7, 2.0, 9.0, 30.0] {
            // (e^{−y/2} − e^{−y}) / (2 − 1)
            let exact = (-y / 2.0f64).exp() - (-y as f64).exp();
            assert!((m.pdf(y).unwrap() - exact).abs() < 1e-12, "y = {y}");
        }
    }

    #[test]
    fn degenerate_groups_rejected() {
        assert!(matches!(
            xi_coefficients(&groups(&[(2.0, 1), (2.0, 3)])),
            Err(Error::DegenerateRates(1, 2))
        ));
        assert!(matches!(
            xi_coefficients(&groups(&[])),
            Err(Error::EmptyMixture)
        ));
    }

    #[test]
    fn coefficients_sum_to_one() {
        let m = xi_coefficients(&groups(&[(10.0, 3), (6.31, 4), (3.98, 2), (0.5, 5)])).unwrap();
        assert!((m.coefficient_sum() - 1.0).abs() < 1e-9);
        let mean = 3.0 * 10.0 + 4.0 * 6.31 + 2.0 * 3.98 + 5.0 * 0.5;
        assert!((m.mean() - mean).abs() < 1e-9 * mean);
    }

    #[test]
    fn conditioning_warning() {
        let m = xi_coefficients(&groups(&[(1.0005, 1), (1.0, 1)])).unwrap();
        assert!(!m.warnings().is_empty());
        let m = xi_coefficients(&groups(&[(2.0, 1), (1.0, 1)])).unwrap();
        assert!(m.warnings().is_empty());
        assert!((m.min_separation - 0.5).abs() < 1e-15);
    }
}
