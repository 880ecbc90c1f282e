//! Truncated Taylor-coefficient arithmetic. A series is stored as
//! `c[n] = f^(n)(x0) / n!`.

/// Cauchy product truncated to `len` terms.
pub fn mul(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| {
            (0..=n)
                .filter(|&i| i < a.len() && n - i < b.len())
                .map(|i| a[i] * b[n - i])
                .sum()
        })
        .collect()
}

/// Coefficient `n` of the product, without forming the rest.
pub fn mul_at(a: &[f64], b: &[f64], n: usize) -> f64 {
    (0..=n)
        .filter(|&i| i < a.len() && n - i < b.len())
        .map(|i| a[i] * b[n - i])
        .sum()
}

/// Quotient `a / b`, requires `b[0] != 0`.
pub fn div(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut q = vec![0.0; len];
    for n in 0..len {
        let mut acc = a.get(n).copied().unwrap_or(0.0);
        for i in 1..=n.min(b.len().saturating_sub(1)) {
            acc -= b[i] * q[n - i];
        }
        q[n] = acc / b[0];
    }
    q
}

/// Real power `a^alpha` by the J.C.P. Miller recurrence, requires `a[0] > 0`.
pub fn powf(a: &[f64], alpha: f64, len: usize) -> Vec<f64> {
    let mut b = vec![0.0; len];
    if len == 0 {
        return b;
    }
    b[0] = a[0].powf(alpha);
    for n in 1..len {
        let mut acc = 0.0;
        for k in 1..=n.min(a.len().saturating_sub(1)) {
            acc += (alpha * k as f64 - (n - k) as f64) * a[k] * b[n - k];
        }
        b[n] = acc / (n as f64 * a[0]);
    }
    b
}

/// Coefficients of the derivative series.
pub fn derivative(a: &[f64]) -> Vec<f64> {
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(n, c)| n as f64 * c)
        .collect()
}

/// Horner evaluation at offset `dx` from the expansion point.
pub fn eval(a: &[f64], dx: f64) -> f64 {
    a.iter().rev().fold(0.0, |acc, &c| acc * dx + c)
}

/// `j`-th derivative at the expansion point.
pub fn nth_derivative(a: &[f64], j: usize) -> f64 {
    a.get(j).map_or(0.0, |c| c * factorial(j))
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_series(len: usize) -> Vec<f64> {
        (0..len).map(factorial).map(|f| 1.0 / f).collect()
    }

    #[test]
    fn product_and_quotient_of_exponentials() {
        let e = exp_series(10);
        let sq = mul(&e, &e, 10);
        for (n, c) in sq.iter().enumerate() {
            assert!((c - 2f64.powi(n as i32) / factorial(n)).abs() < 1e-14);
        }
        let one = div(&e, &e, 10);
        assert!((one[0] - 1.0).abs() < 1e-15);
        assert!(one[1..].iter().all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn power_of_linear_matches_binomial() {
        let a = [2.0, 1.0];
        let p = powf(&a, 1.5, 6);
        let x = 0.1;
        assert!((eval(&p, x) - (2.0f64 + x).powf(1.5)).abs() < 1e-9);
        let inv = powf(&a, -1.0, 8);
        assert!((eval(&inv, x) - 1.0 / (2.0 + x)).abs() < 1e-10);
    }

    #[test]
    fn derivative_and_nth() {
        let e = exp_series(8);
        let d = derivative(&e);
        assert!((d[3] - e[3]).abs() < 1e-15);
        assert!((nth_derivative(&e, 5) - 1.0).abs() < 1e-14);
        assert_eq!(nth_derivative(&e, 20), 0.0);
    }
}
