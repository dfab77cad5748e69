use crate::mesh::{ElementGeometry, Point};

/// Number of bivariate monomials of total degree at most `k`.
pub const fn dim_poly(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// Same as [`dim_poly`] but returns 0 for negative degrees.
pub const fn dim_poly_signed(k: isize) -> usize {
    if k < 0 {
        0
    } else {
        dim_poly(k as usize)
    }
}

/// Exponents `(a, b)` ordered by total degree, then by decreasing power of x.
pub fn exponents(k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(dim_poly(k));
    for d in 0..=k {
        for b in 0..=d {
            out.push((d - b, b));
        }
    }
    out
}

/// Position of `x^a y^b` in the ordering of [`exponents`].
pub const fn index_of(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

/// Scaled monomials `((x - x_E) / h_E)^alpha` on one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonomialBasis {
    pub degree: usize,
    pub center: Point,
    pub scale: f64,
}

impl MonomialBasis {
    pub fn new(degree: usize, center: Point, scale: f64) -> Self {
        MonomialBasis {
            degree,
            center,
            scale,
        }
    }

    pub fn on_element(degree: usize, geom: &ElementGeometry) -> Self {
        Self::new(degree, geom.centroid, geom.diameter)
    }

    pub fn dim(&self) -> usize {
        dim_poly(self.degree)
    }

    pub fn local(&self, x: Point) -> (f64, f64) {
        (
            (x[0] - self.center[0]) / self.scale,
            (x[1] - self.center[1]) / self.scale,
        )
    }

    pub fn eval(&self, x: Point) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(x, &mut out);
        out
    }

    /// Writes the values of all monomials at `x` into `out`.
    pub fn eval_into(&self, x: Point, out: &mut [f64]) {
        let (s, t) = self.local(x);
        let k = self.degree;
        let mut ps = vec![1.0; k + 1];
        let mut pt = vec![1.0; k + 1];
        for i in 1..=k {
            ps[i] = ps[i - 1] * s;
            pt[i] = pt[i - 1] * t;
        }
        let mut idx = 0;
        for d in 0..=k {
            for b in 0..=d {
                out[idx] = ps[d - b] * pt[b];
                idx += 1;
            }
        }
    }

    pub fn eval_grad(&self, x: Point) -> Vec<[f64; 2]> {
        let (s, t) = self.local(x);
        let k = self.degree;
        let mut ps = vec![1.0; k + 1];
        let mut pt = vec![1.0; k + 1];
        for i in 1..=k {
            ps[i] = ps[i - 1] * s;
            pt[i] = pt[i - 1] * t;
        }
        let h = self.scale;
        let mut out = Vec::with_capacity(self.dim());
        for d in 0..=k {
            for b in 0..=d {
                let a = d - b;
                let gx = if a > 0 { a as f64 * ps[a - 1] * pt[b] / h } else { 0.0 };
                let gy = if b > 0 { b as f64 * ps[a] * pt[b - 1] / h } else { 0.0 };
                out.push([gx, gy]);
            }
        }
        out
    }

    /// Evaluates the polynomial with coefficients `coeffs` at `x`.
    pub fn eval_poly(&self, coeffs: &[f64], x: Point) -> f64 {
        let vals = self.eval(x);
        coeffs.iter().zip(&vals).map(|(c, v)| c * v).sum()
    }

    /// Coefficients of the gradient of `coeffs` in the basis of degree
    /// `degree - 1` on the same element.
    pub fn gradient_coeffs(&self, coeffs: &[f64]) -> [Vec<f64>; 2] {
        let k = self.degree;
        let n = if k == 0 { 0 } else { dim_poly(k - 1) };
        let mut gx = vec![0.0; n.max(1)];
        let mut gy = vec![0.0; n.max(1)];
        for (i, (a, b)) in exponents(k).into_iter().enumerate() {
            if a > 0 {
                gx[index_of(a - 1, b)] += a as f64 * coeffs[i] / self.scale;
            }
            if b > 0 {
                gy[index_of(a, b - 1)] += b as f64 * coeffs[i] / self.scale;
            }
        }
        [gx, gy]
    }

    /// Coefficients of the Laplacian of monomial `(a, b)`, as pairs of
    /// (exponent index, coefficient) in degree `a + b - 2`.
    pub fn laplacian_of(&self, a: usize, b: usize) -> Vec<(usize, f64)> {
        let h2 = self.scale * self.scale;
        let mut out = Vec::with_capacity(2);
        if a >= 2 {
            out.push((index_of(a - 2, b), (a * (a - 1)) as f64 / h2));
        }
        if b >= 2 {
            out.push((index_of(a, b - 2), (b * (b - 1)) as f64 / h2));
        }
        out
    }
}
