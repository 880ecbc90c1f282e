//! Two-point quintic Hermite interpolation from values and two derivatives.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quintic {
    c: [f64; 6],
    h: f64,
}

impl Quintic {
    /// `left` and `right` hold `[f, f', f'']` at the two ends of an interval of width `h`.
    pub fn new(h: f64, left: [f64; 3], right: [f64; 3]) -> Self {
        let a0 = left[0];
        let a1 = h * left[1];
        let a2 = h * h * left[2];
        let r0 = right[0] - a0 - a1 - 0.5 * a2;
        let r1 = h * right[1] - a1 - a2;
        let r2 = h * h * right[2] - a2;
        Self {
            c: [
                a0,
                a1,
                0.5 * a2,
                10.0 * r0 - 4.0 * r1 + 0.5 * r2,
                -15.0 * r0 + 7.0 * r1 - r2,
                6.0 * r0 - 3.0 * r1 + 0.5 * r2,
            ],
            h,
        }
    }

    /// `d`-th derivative in the physical variable at local coordinate `t` in `[0, 1]`.
    pub fn eval(&self, t: f64, d: usize) -> f64 {
        let mut acc = 0.0;
        for n in (d..6).rev() {
            let fall: f64 = (0..d).map(|k| (n - k) as f64).product();
            acc = acc * t + fall * self.c[n];
        }
        acc / self.h.powi(d as i32)
    }
}
