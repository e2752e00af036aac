//! Small special-function helpers over integer arguments.
//!
//! Every shape parameter that appears in the closed forms is an integer, so
//! log-factorials cover all of the Γ and binomial factors we need.

use std::sync::OnceLock;

const LN_FACT_TABLE: usize = 1024;

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACT_TABLE);
        let mut acc = 0.0f64;
        t.push(0.0);
        for n in 1..LN_FACT_TABLE {
            acc += (n as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// ln(n!)
pub fn ln_factorial(n: u32) -> f64 {
    let n = n as usize;
    if n < LN_FACT_TABLE {
        ln_fact_table()[n]
    } else {
        // Stirling series; n is far outside anything the closed forms produce.
        let x = n as f64 + 1.0;
        (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x * x * x)
    }
}

/// ln Γ(n) for a positive integer n.
pub fn ln_gamma_int(n: u32) -> f64 {
    debug_assert!(n >= 1);
    ln_factorial(n - 1)
}

/// ln C(n, k)
pub fn ln_binomial(n: u32, k: u32) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Regularized lower incomplete gamma P(n, x) for integer shape n ≥ 1.
pub fn gamma_p_int(n: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < n as f64 {
        // P = e^{-x} Σ_{m ≥ n} x^m / m!, summed upward from m = n.
        let mut term = (n as f64 * x.ln() - x - ln_factorial(n)).exp();
        let mut sum = 0.0;
        let mut m = n;
        while term > sum * 1e-17 || m == n {
            sum += term;
            m += 1;
            term *= x / m as f64;
            if term == 0.0 {
                break;
            }
        }
        sum.min(1.0)
    } else {
        1.0 - gamma_q_int(n, x)
    }
}

/// Regularized upper incomplete gamma Q(n, x) = e^{-x} Σ_{m<n} x^m/m! for integer n ≥ 1.
pub fn gamma_q_int(n: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < n as f64 {
        return 1.0 - gamma_p_int(n, x);
    }
    let lx = x.ln();
    let mut sum = NeumaierSum::default();
    for m in 0..n {
        sum.add((m as f64 * lx - x - ln_factorial(m)).exp());
    }
    sum.value().min(1.0)
}

/// Density of a gamma distribution with integer shape and the given scale.
pub fn gamma_pdf(x: f64, shape: u32, scale: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    if x == 0.0 {
        return if shape == 1 { 1.0 / scale } else { 0.0 };
    }
    let z = x / scale;
    ((shape - 1) as f64 * z.ln() - z - ln_gamma_int(shape)).exp() / scale
}

/// Neumaier's variant of Kahan compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}
