//! Gauss-Legendre rules.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The rule affinely mapped onto `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> MappedRule {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        MappedRule {
            nodes: self.nodes.iter().map(|t| mid + half * t).collect(),
            weights: self.weights.iter().map(|w| w * half).collect(),
        }
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Clone, Debug, Default)]
pub struct MappedRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl MappedRule {
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }

    pub fn extend(&mut self, other: MappedRule) {
        self.nodes.extend(other.nodes);
        self.weights.extend(other.weights);
    }
}

/// Composite rule on `[a, b]` with dyadic refinement towards the endpoints
/// flagged in `graded`: subintervals shrink geometrically over `levels`
/// halvings.
pub fn graded_rule(
    rule: &GaussRule,
    a: f64,
    b: f64,
    graded: (bool, bool),
    levels: usize,
) -> MappedRule {
    let mut breaks = vec![a, b];
    let len = b - a;
    let (left, right) = graded;
    let mut h = 0.5;
    for _ in 0..levels {
        if left && right {
            breaks.push(a + 0.5 * h * len);
            breaks.push(b - 0.5 * h * len);
        } else if left {
            breaks.push(a + h * len);
        } else if right {
            breaks.push(b - h * len);
        }
        h *= 0.5;
    }
    if left && right {
        breaks.push(0.5 * (a + b));
    }
    breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
    breaks.dedup();
    let mut out = MappedRule::default();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            out.extend(rule.on(w[0], w[1]));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let r = GaussRule::new(64);
        let m = r.on(0.0, 1.0);
        for k in 0..127 {
            let got = m.integrate(|x| x.powi(k));
            assert!((got - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "k={k}");
        }
        let w: f64 = GaussRule::new(7).weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn graded_rule_handles_sqrt_endpoint() {
        let r = GaussRule::new(64);
        let m = graded_rule(&r, 0.0, 1.0, (true, false), 40);
        let got = m.integrate(|x| x.sqrt());
        assert!((got - 2.0 / 3.0).abs() < 1e-15);
        let both = graded_rule(&r, 0.0, 2.0, (true, true), 40);
        let got = both.integrate(|x| (x * (2.0 - x)).sqrt());
        assert!((got - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
    }
}
