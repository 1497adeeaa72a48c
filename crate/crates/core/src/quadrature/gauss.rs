//! Gauss–Legendre nodes and graded composite rules.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, t);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

/// One-dimensional rule as `(nodes, weights)`.
#[derive(Clone, Debug, Default)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1d {
    /// `order`-point Gauss–Legendre on `[a, b]`.
    pub fn interval(a: f64, b: f64, order: usize) -> Self {
        let mut r = Rule1d::default();
        r.push_interval(a, b, order);
        r
    }

    pub fn push_interval(&mut self, a: f64, b: f64, order: usize) {
        if b <= a {
            return;
        }
        let (x, w) = gauss_legendre(order);
        let h = 0.5 * (b - a);
        for (xi, wi) in x.iter().zip(&w) {
            self.nodes.push(a + h * (xi + 1.0));
            self.weights.push(h * wi);
        }
    }

    /// Gauss–Legendre on `[a, a + h]` after the substitution `t = a + h u^2`,
    /// which absorbs an inverse square-root endpoint singularity at `a`.
    pub fn push_endpoint_panel(&mut self, a: f64, h: f64, order: usize) {
        if h <= 0.0 {
            return;
        }
        let (x, w) = gauss_legendre(order);
        for (xi, wi) in x.iter().zip(&w) {
            let u = 0.5 * (xi + 1.0);
            self.nodes.push(a + h * u * u);
            self.weights.push(0.5 * wi * 2.0 * h * u);
        }
    }

    /// Composite rule on `[a, b]` with panels growing geometrically away from
    /// `a`. The first panel has width `h0` and uses the endpoint substitution
    /// when `singular` is set.
    pub fn graded(a: f64, b: f64, h0: f64, order: usize, singular: bool) -> Self {
        let mut r = Rule1d::default();
        r.push_graded(a, b, h0, order, singular);
        r
    }

    pub fn push_graded(&mut self, a: f64, b: f64, h0: f64, order: usize, singular: bool) {
        if b <= a {
            return;
        }
        let mut h = h0.min(b - a).max((b - a) * 1e-15);
        if singular {
            self.push_endpoint_panel(a, h, order);
        } else {
            self.push_interval(a, a + h, order);
        }
        let mut lo = a + h;
        while lo < b {
            let hi = if b - (lo + h) < 0.5 * h { b } else { lo + h };
            self.push_interval(lo, hi, order);
            lo = hi;
            h *= 2.0;
        }
    }

    /// Same grading but towards the right endpoint `b`.
    pub fn push_graded_right(&mut self, a: f64, b: f64, h0: f64, order: usize, singular: bool) {
        let mut tmp = Rule1d::default();
        tmp.push_graded(0.0, b - a, h0, order, singular);
        for (x, w) in tmp.nodes.iter().zip(&tmp.weights) {
            self.nodes.push(b - x);
            self.weights.push(*w);
        }
    }

    /// `n`-point periodic trapezoid rule on `[a, a + 2 pi)`.
    pub fn periodic(a: f64, n: usize) -> Self {
        let h = 2.0 * PI / n as f64;
        Rule1d { nodes: (0..n).map(|k| a + h * k as f64).collect(), weights: vec![h; n] }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn apply(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomials() {
        for n in [1, 2, 5, 16, 64] {
            let r = Rule1d::interval(0.0, 1.0, n);
            for deg in 0..(2 * n).min(40) {
                let v = r.apply(|x| x.powi(deg as i32));
                assert!((v - 1.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn weights_sum_to_two() {
        let (_, w) = gauss_legendre(101);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn graded_rule_handles_endpoint_singularity() {
        let r = Rule1d::graded(0.0, 1.0, 1e-6, 8, true);
        assert!((r.apply(|x| x.powf(-0.5)) - 2.0).abs() < 1e-10);
        assert!((r.apply(|x| x.powf(0.5)) - 2.0 / 3.0).abs() < 1e-10);
        let r = Rule1d::graded(1e-4, 1.0, 1e-4, 8, false);
        let exact = 2.0 * (1e-4f64.powf(-0.5) - 1.0);
        assert!((r.apply(|x| x.powf(-1.5)) / exact - 1.0).abs() < 1e-10);
    }

    #[test]
    fn periodic_rule_is_exact_for_low_modes() {
        let r = Rule1d::periodic(0.3, 16);
        assert!((r.apply(|t| (5.0 * t).cos())).abs() < 1e-13);
        assert!((r.apply(|_| 1.0) - 2.0 * PI).abs() < 1e-13);
    }
}
