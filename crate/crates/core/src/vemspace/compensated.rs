//! Double-double products and refined dense solves for the projector
//! systems. Monomial Gram systems at k = 4 have condition numbers near 1e8,
//! so plain double arithmetic leaves reproduction errors around 1e-11.

use nalgebra::DMatrix;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Accumulator carrying a double-double value.
#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    hi: f64,
    lo: f64,
}

impl Acc {
    #[inline]
    fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.hi, x);
        self.hi = s;
        self.lo += e;
    }

    #[inline]
    fn add_prod(&mut self, a: f64, b: f64) {
        let p = a * b;
        let e = a.mul_add(b, -p);
        self.add(p);
        self.lo += e;
    }

    fn split(self) -> (f64, f64) {
        two_sum(self.hi, self.lo)
    }
}

/// `a b` as an unevaluated sum `hi + lo`.
#[derive(Debug, Clone)]
pub(crate) struct DdMatrix {
    pub hi: DMatrix<f64>,
    pub lo: DMatrix<f64>,
}

pub(crate) fn product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DdMatrix {
    assert_eq!(a.ncols(), b.nrows());
    let (m, n) = (a.nrows(), b.ncols());
    let mut hi = DMatrix::zeros(m, n);
    let mut lo = DMatrix::zeros(m, n);
    for j in 0..n {
        for i in 0..m {
            let mut acc = Acc::default();
            for l in 0..a.ncols() {
                acc.add_prod(a[(i, l)], b[(l, j)]);
            }
            let (h, e) = acc.split();
            hi[(i, j)] = h;
            lo[(i, j)] = e;
        }
    }
    DdMatrix { hi, lo }
}

/// `rhs - (a.hi + a.lo) x`, accumulated in double-double.
fn residual(a: &DdMatrix, x: &DMatrix<f64>, rhs: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(rhs.nrows(), rhs.ncols(), |i, j| {
        let mut acc = Acc::default();
        acc.add(rhs[(i, j)]);
        for l in 0..x.nrows() {
            acc.add_prod(-a.hi[(i, l)], x[(l, j)]);
            acc.add_prod(-a.lo[(i, l)], x[(l, j)]);
        }
        acc.split().0
    })
}

/// Solves `(a.hi + a.lo) x = rhs` by pivoted LU on `a.hi` with residuals
/// taken against the double-double matrix. Returns `None` when singular.
pub(crate) fn solve(a: &DdMatrix, rhs: &DMatrix<f64>, steps: usize) -> Option<DMatrix<f64>> {
    let lu = a.hi.clone().lu();
    let mut x = lu.solve(rhs)?;
    for _ in 0..steps {
        let r = residual(a, &x, rhs);
        x += lu.solve(&r)?;
    }
    Some(x)
}
