//! Independent reference solutions for the affine two-layer column.
#![allow(dead_code)]

/// Continuous growth rate by shooting the first-order system
/// `psi' = w/a - k phi`, `w' = l2 rho psi - g k rho phi`,
/// `phi = k (w/rho - g psi) / (-l2 - 4 omega^2 / l2)`
/// from both walls and matching `(psi, w)` at the interface.
pub struct AffineColumn {
    pub k_upper: f64,
    pub k_lower: f64,
    pub rho_upper0: f64,
    pub rho_lower0: f64,
    pub gravity: f64,
    pub omega: f64,
    pub depth: f64,
    pub height: f64,
}

impl AffineColumn {
    pub fn reference(omega: f64) -> Self {
        Self {
            k_upper: 1.0,
            k_lower: 2.0,
            rho_upper0: 2.0,
            rho_lower0: 1.0,
            gravity: 1.0,
            omega,
            depth: 1.0,
            height: 1.0,
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        if x >= 0.0 {
            self.rho_upper0 * (-self.gravity * x / self.k_upper).exp()
        } else {
            self.rho_lower0 * (-self.gravity * x / self.k_lower).exp()
        }
    }

    fn rhs(&self, upper: bool, x: f64, y: [f64; 2], k: f64, l2: f64) -> [f64; 2] {
        let (stiff, rho) = if upper {
            (self.k_upper, self.rho_upper0 * (-self.gravity * x / self.k_upper).exp())
        } else {
            (self.k_lower, self.rho_lower0 * (-self.gravity * x / self.k_lower).exp())
        };
        let g = self.gravity;
        let d = -l2 - 4.0 * self.omega * self.omega / l2;
        let phi = k * (y[1] / rho - g * y[0]) / d;
        [y[1] / (stiff * rho) - k * phi, l2 * rho * y[0] - g * k * rho * phi]
    }

    fn shoot(&self, upper: bool, k: f64, l2: f64, steps: usize) -> [f64; 2] {
        let (x0, x1) = if upper { (self.height, 0.0) } else { (-self.depth, 0.0) };
        let h = (x1 - x0) / steps as f64;
        let mut y = [0.0, 1.0];
        let mut x = x0;
        for _ in 0..steps {
            let k1 = self.rhs(upper, x, y, k, l2);
            let k2 = self.rhs(upper, x + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]], k, l2);
            let k3 = self.rhs(upper, x + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]], k, l2);
            let k4 = self.rhs(upper, x + h, [y[0] + h * k3[0], y[1] + h * k3[1]], k, l2);
            for i in 0..2 {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            x += h;
            let s = y[0].abs().max(y[1].abs());
            y = [y[0] / s, y[1] / s];
        }
        y
    }

    /// Normalized matching determinant at growth rate `lambda`.
    pub fn mismatch(&self, k: f64, lambda: f64, steps: usize) -> f64 {
        let l2 = lambda * lambda;
        let lo = self.shoot(false, k, l2, steps);
        let up = self.shoot(true, k, l2, steps);
        let n = |v: [f64; 2]| v[0].hypot(v[1]);
        (lo[0] * up[1] - up[0] * lo[1]) / (n(lo) * n(up))
    }

    /// Largest root below `sqrt(g k)`, scanning downward then bisecting.
    pub fn growth_rate(&self, k: f64, steps: usize) -> Option<f64> {
        let top = (self.gravity * k).sqrt() * (1.0 - 1e-9);
        let scan = 4000;
        let mut hi = top;
        let mut f_hi = self.mismatch(k, hi, steps);
        for i in 1..=scan {
            let lo = top * (1.0 - i as f64 / scan as f64).max(1e-3);
            let f_lo = self.mismatch(k, lo, steps);
            if f_lo.signum() != f_hi.signum() {
                let (mut a, mut b, mut fa) = (lo, hi, f_lo);
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    let fm = self.mismatch(k, m, steps);
                    if fm.signum() == fa.signum() {
                        a = m;
                        fa = fm;
                    } else {
                        b = m;
                    }
                    if b - a < 1e-14 * b {
                        break;
                    }
                }
                return Some(0.5 * (a + b));
            }
            hi = lo;
            f_hi = f_lo;
        }
        None
    }
}
