//! Per-component sums shared by the beamforming and OSTBC closed forms.
//!
//! Every closed form is a weighted double sum over numerator components
//! X ~ Γ(a, θ_x) and interference components Y ~ Γ(b, θ_y). The functions
//! here evaluate one such pair. All inner terms are positive, so they are
//! summed in the log domain; the signed outer weights are handled by the
//! callers.
//!
//! Two algebraic routes are kept apart on purpose: the "scale" route writes
//! the interference factor as (1/θ_y)^b (c + 1/θ_y)^{−(s+b)}, the "kappa"
//! route writes it as (κ/(kγ + κ))^b (ρ̄/(kγ + κ))^s with κ = ρ̄/θ_y.

use crate::special::{ln_binomial, ln_factorial, ln_gamma_int, NeumaierSum};

/// Density of X/(Y+1) at γ for X ~ Γ(a, θ_x), Y ~ Γ(b, θ_y), scale route.
pub(crate) fn pdf_scale_form(gamma: f64, a: u32, theta_x: f64, b: u32, theta_y: f64) -> f64 {
    if gamma == 0.0 && a > 1 {
        return 0.0;
    }
    let lg = if gamma == 0.0 { 0.0 } else { gamma.ln() };
    let base = (a - 1) as f64 * lg
        - gamma / theta_x
        - ln_gamma_int(a)
        - ln_gamma_int(b)
        - a as f64 * theta_x.ln()
        - b as f64 * theta_y.ln();
    let ln_mix = (gamma / theta_x + 1.0 / theta_y).ln();
    (0..=a)
        .map(|r| (base + ln_binomial(a, r) + ln_gamma_int(r + b) - (r + b) as f64 * ln_mix).exp())
        .collect::<NeumaierSum>()
        .value()
}

/// Same density written with κ = ρ̄/ρ_i for numerator shape l+1, scale ρ̄/k.
pub(crate) fn pdf_kappa_form(gamma: f64, k: u32, l: u32, rho_bar: f64, j: u32, rho_i: f64) -> f64 {
    if gamma == 0.0 && l > 0 {
        return 0.0;
    }
    let kf = k as f64;
    let kappa = rho_bar / rho_i;
    let lg = if gamma == 0.0 { 0.0 } else { gamma.ln() };
    let base = l as f64 * lg - kf * gamma / rho_bar - ln_factorial(l) - ln_gamma_int(j)
        + (l + 1) as f64 * (kf / rho_bar).ln()
        - j as f64 * rho_i.ln();
    let ln_ratio = (rho_bar / (kf * gamma + kappa)).ln();
    (0..=l + 1)
        .map(|r| {
            (base + ln_binomial(l + 1, r) + ln_gamma_int(r + j) + (r + j) as f64 * ln_ratio).exp()
        })
        .collect::<NeumaierSum>()
        .value()
}

/// P(X > γ₀(Y+1)) for X ~ Γ(a, θ_x), Y ~ Γ(b, θ_y), scale route.
pub(crate) fn survival_scale_form(gamma0: f64, a: u32, theta_x: f64, b: u32, theta_y: f64) -> f64 {
    let c = gamma0 / theta_x;
    let lc = c.ln();
    let ln_mix = (c + 1.0 / theta_y).ln();
    let ln_inv = -theta_y.ln();
    let mut sum = NeumaierSum::default();
    for r in 0..a {
        let outer = r as f64 * lc - ln_factorial(r) - c;
        for s in 0..=r {
            let t = outer + ln_binomial(r, s) + ln_gamma_int(s + b) - ln_gamma_int(b)
                + b as f64 * ln_inv
                - (s + b) as f64 * ln_mix;
            sum.add(t.exp());
        }
    }
    sum.value()
}

/// P(X > γ₀(Y+1)) with X ~ Γ(l+1, ρ̄/k), Y ~ Γ(j, ρ_i), kappa route.
pub(crate) fn survival_kappa_form(
    gamma0: f64,
    k: u32,
    l: u32,
    rho_bar: f64,
    j: u32,
    rho_i: f64,
) -> f64 {
    let kf = k as f64;
    let kappa = rho_bar / rho_i;
    let c = kf * gamma0 / rho_bar;
    let lc = c.ln();
    let denom = kf * gamma0 + kappa;
    let front = -c + j as f64 * (kappa / denom).ln();
    let ln_ratio = (rho_bar / denom).ln();
    let mut sum = NeumaierSum::default();
    for r in 0..=l {
        for s in 0..=r {
            let t =
                front + ln_binomial(r, s) + ln_gamma_int(s + j) - ln_factorial(r) - ln_gamma_int(j)
                    + r as f64 * lc
                    + s as f64 * ln_ratio;
            sum.add(t.exp());
        }
    }
    sum.value()
}

/// Lower tail P(X ≤ γ₀(Y+1)) summed directly as Σ_{r≥a}, for use when the
/// survival is close to one and 1 − S would cancel. `None` if the series
/// does not settle within the term budget.
fn lower_tail_series(gamma0: f64, a: u32, theta_x: f64, b: u32, theta_y: f64) -> Option<f64> {
    let c = gamma0 / theta_x;
    if c == 0.0 {
        return Some(0.0);
    }
    let lc = c.ln();
    let ln_mix = (c + 1.0 / theta_y).ln();
    let ln_inv = -theta_y.ln();
    let mut sum = NeumaierSum::default();
    for r in a..a + TAIL_TERMS {
        let outer = r as f64 * lc - ln_factorial(r) - c;
        let term: NeumaierSum = (0..=r)
            .map(|s| {
                (outer + ln_binomial(r, s) + ln_gamma_int(s + b) - ln_gamma_int(b)
                    + b as f64 * ln_inv
                    - (s + b) as f64 * ln_mix)
                    .exp()
            })
            .collect();
        let t = term.value();
        sum.add(t);
        if t <= 1e-17 * sum.value() {
            return Some(sum.value());
        }
    }
    None
}

const TAIL_TERMS: u32 = 400;

/// (P(X ≤ γ₀(Y+1)), P(X > γ₀(Y+1))) with both sides accurate.
pub(crate) fn tails_scale_form(
    gamma0: f64,
    a: u32,
    theta_x: f64,
    b: u32,
    theta_y: f64,
) -> (f64, f64) {
    let surv = survival_scale_form(gamma0, a, theta_x, b, theta_y);
    (
        lower_from(surv, || lower_tail_series(gamma0, a, theta_x, b, theta_y)),
        surv,
    )
}

/// As [`tails_scale_form`], survival taken from the kappa route.
pub(crate) fn tails_kappa_form(
    gamma0: f64,
    k: u32,
    l: u32,
    rho_bar: f64,
    j: u32,
    rho_i: f64,
) -> (f64, f64) {
    let surv = survival_kappa_form(gamma0, k, l, rho_bar, j, rho_i);
    (
        lower_from(surv, || {
            lower_tail_series(gamma0, l + 1, rho_bar / k as f64, j, rho_i)
        }),
        surv,
    )
}

fn lower_from(surv: f64, series: impl FnOnce() -> Option<f64>) -> f64 {
    if surv < 0.5 {
        return 1.0 - surv;
    }
    series().unwrap_or(1.0 - surv)
}

/// Noise-only tails of Γ(a, θ_x) at γ₀.
pub(crate) fn tails_noise_only(gamma0: f64, a: u32, theta_x: f64) -> (f64, f64) {
    let x = gamma0 / theta_x;
    (
        crate::special::gamma_p_int(a, x),
        crate::special::gamma_q_int(a, x),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, integrate_to_infinity};
    use crate::special::{gamma_p_int, gamma_pdf};

    // Direct quadrature of ∫ (y+1) f_X((y+1)γ) f_Y(y) dy.
    fn pdf_oracle(gamma: f64, a: u32, tx: f64, b: u32, ty: f64) -> f64 {
        integrate_to_infinity(
            |y| (y + 1.0) * gamma_pdf((y + 1.0) * gamma, a, tx) * gamma_pdf(y, b, ty),
            0.0,
            1e-14,
            1e-12,
        )
        .unwrap()
        .value
    }

    fn survival_oracle(g0: f64, a: u32, tx: f64, b: u32, ty: f64) -> f64 {
        integrate_to_infinity(
            |y| (1.0 - gamma_p_int(a, (y + 1.0) * g0 / tx)) * gamma_pdf(y, b, ty),
            0.0,
            1e-14,
            1e-12,
        )
        .unwrap()
        .value
    }

    #[test]
    fn routes_agree_with_quadrature() {
        for &(k, l, rho_bar, j, rho) in &[
            (1u32, 0u32, 1.0, 1u32, 1.0),
            (2, 3, 31.62, 2, 5.0),
            (1, 6, 7.9, 4, 0.6),
            (3, 1, 10.0, 1, 0.1),
        ] {
            let tx = rho_bar / k as f64;
            for &g in &[0.05, 0.8, 3.0, 20.0] {
                let oracle = pdf_oracle(g, l + 1, tx, j, rho);
                let a = pdf_scale_form(g, l + 1, tx, j, rho);
                let b = pdf_kappa_form(g, k, l, rho_bar, j, rho);
                assert!(
                    (a - oracle).abs() < 1e-10 * oracle.max(1.0),
                    "scale pdf {a} vs {oracle}"
                );
                assert!(
                    (b - oracle).abs() < 1e-10 * oracle.max(1.0),
                    "kappa pdf {b} vs {oracle}"
                );

                let so = survival_oracle(g, l + 1, tx, j, rho);
                let sa = survival_scale_form(g, l + 1, tx, j, rho);
                let sb = survival_kappa_form(g, k, l, rho_bar, j, rho);
                assert!((sa - so).abs() < 1e-11, "scale survival {sa} vs {so}");
                assert!((sb - so).abs() < 1e-11, "kappa survival {sb} vs {so}");
            }
        }
    }

    #[test]
    fn integrate_density_to_survival() {
        let (a, tx, b, ty) = (4u32, 3.0, 3u32, 0.7);
        let g0 = 1.3;
        let mass = integrate(|g| pdf_scale_form(g, a, tx, b, ty), 0.0, g0, 1e-14, 1e-13)
            .unwrap()
            .value;
        assert!((1.0 - mass - survival_scale_form(g0, a, tx, b, ty)).abs() < 1e-12);
    }

    #[test]
    fn lower_tail_keeps_relative_accuracy() {
        let (a, tx, b, ty) = (3u32, 10.0, 2u32, 0.5);
        for &g0 in &[1e-6, 1e-3, 0.05] {
            let (lo, hi) = tails_scale_form(g0, a, tx, b, ty);
            let oracle = integrate_to_infinity(
                |y| gamma_p_int(a, (y + 1.0) * g0 / tx) * gamma_pdf(y, b, ty),
                0.0,
                0.0,
                1e-12,
            )
            .unwrap()
            .value;
            assert!((lo - oracle).abs() < 1e-10 * oracle, "{lo} vs {oracle}");
            assert!((lo + hi - 1.0).abs() < 1e-14);
            let (lk, _) = tails_kappa_form(g0, 2, a - 1, 2.0 * tx, b, ty);
            assert!((lk - oracle).abs() < 1e-10 * oracle);
        }
    }
}
