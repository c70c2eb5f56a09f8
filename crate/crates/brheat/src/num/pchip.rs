//! Shape preserving cubic interpolation (Fritsch-Carlson node slopes).
//!
//! Used for tabulated frequency schedules and protocol paths, where an
//! interpolant that invents wiggles would corrupt the driving-speed
//! functional that gets integrated over it.

use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct Pchip {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl Pchip {
    /// Build from strictly increasing abscissae, at least two points.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidInput("pchip: length mismatch".into()));
        }
        if xs.len() < 2 {
            return Err(Error::InvalidInput("pchip: need at least two points".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("pchip: abscissae must strictly increase".into()));
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("pchip: non-finite sample".into()));
        }
        let n = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let slope: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut ds = vec![0.0; n];
        if n == 2 {
            ds[0] = slope[0];
            ds[1] = slope[0];
        } else {
            for i in 1..n - 1 {
                if slope[i - 1] * slope[i] <= 0.0 {
                    ds[i] = 0.0;
                } else {
                    // Weighted harmonic mean keeps the interpolant monotone.
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    ds[i] = (w1 + w2) / (w1 / slope[i - 1] + w2 / slope[i]);
                }
            }
            ds[0] = end_slope(h[0], h[1], slope[0], slope[1]);
            ds[n - 1] = end_slope(h[n - 2], h[n - 3], slope[n - 2], slope[n - 3]);
        }
        Ok(Pchip { xs, ys, ds })
    }

    fn segment(&self, x: f64) -> usize {
        // partition_point returns the first index with xs[i] > x.
        let idx = self.xs.partition_point(|&v| v <= x);
        idx.clamp(1, self.xs.len() - 1) - 1
    }

    /// Interpolated value; clamps outside the sample range.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.ys[i]
            + (t3 - 2.0 * t2 + t) * h * self.ds[i]
            + (-2.0 * t3 + 3.0 * t2) * self.ys[i + 1]
            + (t3 - t2) * h * self.ds[i + 1]
    }

    /// Derivative of the interpolant; zero outside the sample range.
    pub fn deriv(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] || x >= self.xs[n - 1] {
            return 0.0;
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        ((6.0 * t2 - 6.0 * t) * self.ys[i]
            + (3.0 * t2 - 4.0 * t + 1.0) * h * self.ds[i]
            + (-6.0 * t2 + 6.0 * t) * self.ys[i + 1]
            + (3.0 * t2 - 2.0 * t) * h * self.ds[i + 1])
            / h
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn range(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }
}

// Three point one-sided slope with the usual shape clamps.
fn end_slope(h0: f64, h1: f64, s0: f64, s1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if d * s0 <= 0.0 {
        0.0
    } else if s0 * s1 < 0.0 && d.abs() > 3.0 * s0.abs() {
        3.0 * s0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, a: f64, b: f64) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn reproduces_nodes() {
        let xs = vec![0.0, 0.4, 1.1, 2.0, 3.5];
        let ys = vec![1.0, -0.3, 0.8, 0.8, 2.0];
        let p = Pchip::new(xs.clone(), ys.clone()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((p.eval(*x) - y).abs() < 1e-14);
        }
    }

    #[test]
    fn linear_data_is_exact() {
        let xs = grid(9, -1.0, 3.0);
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 0.7).collect();
        let p = Pchip::new(xs, ys).unwrap();
        for i in 0..200 {
            let x = -1.0 + 4.0 * i as f64 / 199.0;
            assert!((p.eval(x) - (2.5 * x - 0.7)).abs() < 1e-12);
            if x > -1.0 + 1e-9 && x < 3.0 - 1e-9 {
                assert!((p.deriv(x) - 2.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn monotone_data_stays_monotone() {
        let xs = grid(12, 0.0, 1.0);
        let ys: Vec<f64> = xs.iter().map(|x| (5.0 * x).tanh() + 0.2 * x).collect();
        let p = Pchip::new(xs, ys).unwrap();
        let mut prev = p.eval(0.0);
        for i in 1..=1000 {
            let x = i as f64 / 1000.0;
            let v = p.eval(x);
            assert!(v >= prev - 1e-13, "dip at x = {x}");
            prev = v;
        }
    }

    #[test]
    fn smooth_function_accuracy() {
        let xs = grid(64, 0.0, std::f64::consts::PI);
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let p = Pchip::new(xs, ys).unwrap();
        let mut worst = 0.0f64;
        for i in 0..=500 {
            let x = std::f64::consts::PI * i as f64 / 500.0;
            worst = worst.max((p.eval(x) - x.sin()).abs());
        }
        assert!(worst < 5e-4, "max error {worst}");
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let xs = grid(40, 0.1, 2.0);
        let ys: Vec<f64> = xs.iter().map(|x| x.ln() + x).collect();
        let p = Pchip::new(xs, ys).unwrap();
        for i in 1..20 {
            let x = 0.15 + i as f64 * 0.09;
            let h = 1e-6;
            let fd = (p.eval(x + h) - p.eval(x - h)) / (2.0 * h);
            assert!((p.deriv(x) - fd).abs() < 1e-7, "at {x}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Pchip::new(vec![0.0, 0.0, 1.0], vec![1.0, 2.0, 3.0]).is_err());
        assert!(Pchip::new(vec![0.0], vec![1.0]).is_err());
        assert!(Pchip::new(vec![0.0, 1.0], vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn clamps_outside_range() {
        let p = Pchip::new(vec![0.0, 1.0], vec![2.0, 3.0]).unwrap();
        assert_eq!(p.eval(-5.0), 2.0);
        assert_eq!(p.eval(9.0), 3.0);
        assert_eq!(p.deriv(9.0), 0.0);
    }
}
