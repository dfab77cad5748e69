use std::sync::OnceLock;

use crate::mesh::Point;

const MAX_CACHED: usize = 32;

/// Gauss-Legendre rule on [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct LineRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

impl LineRule {
    /// `n`-point rule, exact for polynomials of degree `2n - 1`.
    pub fn gauss_legendre(n: usize) -> LineRule {
        assert!(n >= 1, "a Gauss rule needs at least one node");
        if n <= MAX_CACHED {
            static CACHE: OnceLock<Vec<LineRule>> = OnceLock::new();
            let table = CACHE.get_or_init(|| (1..=MAX_CACHED).map(compute_gauss_legendre).collect());
            table[n - 1].clone()
        } else {
            compute_gauss_legendre(n)
        }
    }

    /// Smallest Gauss rule exact for degree `exactness`.
    pub fn with_exactness(exactness: usize) -> LineRule {
        Self::gauss_legendre(exactness / 2 + 1)
    }
}

/// Newton iteration on the three-term Legendre recurrence.
fn compute_gauss_legendre(n: usize) -> LineRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map from [-1, 1] to [0, 1].
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.5;
    }
    LineRule {
        nodes,
        weights,
        exactness: 2 * n - 1,
    }
}

/// Quadrature rule on the reference triangle (0,0), (1,0), (0,1).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

impl QuadRule {
    /// Collapsed-coordinate (Duffy) product of Gauss rules: the square
    /// (s, t) maps to (s, t (1 - s)) with Jacobian 1 - s, so the s-direction
    /// carries one extra degree.
    pub fn triangle(exactness: usize) -> QuadRule {
        let n = (exactness + 3) / 2;
        let line = LineRule::gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (s, ws) in line.nodes.iter().zip(&line.weights) {
            for (t, wt) in line.nodes.iter().zip(&line.weights) {
                points.push([*s, t * (1.0 - s)]);
                weights.push(ws * wt * (1.0 - s));
            }
        }
        QuadRule {
            points,
            weights,
            exactness,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Maps a reference rule onto the triangle `tri`.
pub fn map_to_triangle(rule: &QuadRule, tri: &[Point; 3], out: &mut Vec<(Point, f64)>) {
    let [a, b, c] = *tri;
    let jac = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        let x = [
            a[0] + p[0] * (b[0] - a[0]) + p[1] * (c[0] - a[0]),
            a[1] + p[0] * (b[1] - a[1]) + p[1] * (c[1] - a[1]),
        ];
        out.push((x, w * jac));
    }
}
