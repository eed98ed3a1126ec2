//! Bicubic Hermite interpolation of nodal data with finite-difference
//! derivatives, giving continuous values, gradients and Hessians.

use crate::geometry::Point;
use crate::laplace::Grid;

/// Value, gradient and Hessian at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sample {
    pub v: f64,
    pub gx: f64,
    pub gy: f64,
    pub hxx: f64,
    pub hxy: f64,
    pub hyy: f64,
}

impl Sample {
    pub fn grad_norm(&self) -> f64 {
        self.gx.hypot(self.gy)
    }

    /// Eigenvalues (descending) of the Hessian and the angle in degrees of
    /// the eigenvector belonging to the larger one.
    pub fn eigen(&self) -> (f64, f64, f64) {
        sym_eigen(self.hxx, self.hxy, self.hyy)
    }
}

/// Eigen-decomposition of `[[a, b], [b, c]]`: `(λ_max, λ_min, angle_of_λ_max_deg)`.
pub fn sym_eigen(a: f64, b: f64, c: f64) -> (f64, f64, f64) {
    let m = (a + c) / 2.0;
    let r = ((a - c) / 2.0).hypot(b);
    let theta = 0.5 * (2.0 * b).atan2(a - c);
    (m + r, m - r, theta.to_degrees())
}

/// Bicubic interpolant over `values` on `grid`.
pub struct Bicubic<'a> {
    pub grid: Grid,
    pub values: &'a [f64],
}

fn h00(t: f64) -> (f64, f64, f64) {
    (2.0 * t * t * t - 3.0 * t * t + 1.0, 6.0 * t * t - 6.0 * t, 12.0 * t - 6.0)
}
fn h01(t: f64) -> (f64, f64, f64) {
    (-2.0 * t * t * t + 3.0 * t * t, -6.0 * t * t + 6.0 * t, -12.0 * t + 6.0)
}
fn h10(t: f64) -> (f64, f64, f64) {
    (t * t * t - 2.0 * t * t + t, 3.0 * t * t - 4.0 * t + 1.0, 6.0 * t - 4.0)
}
fn h11(t: f64) -> (f64, f64, f64) {
    (t * t * t - t * t, 3.0 * t * t - 2.0 * t, 6.0 * t - 2.0)
}

impl<'a> Bicubic<'a> {
    pub fn new(grid: Grid, values: &'a [f64]) -> Self {
        assert_eq!(values.len(), grid.len());
        Bicubic { grid, values }
    }

    fn f(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    // Derivatives in index units (per cell), one-sided at the box edge.
    fn d_i(&self, i: usize, j: usize) -> f64 {
        let nx = self.grid.nx;
        if i == 0 {
            self.f(1, j) - self.f(0, j)
        } else if i == nx {
            self.f(nx, j) - self.f(nx - 1, j)
        } else {
            0.5 * (self.f(i + 1, j) - self.f(i - 1, j))
        }
    }

    fn d_j(&self, i: usize, j: usize) -> f64 {
        let ny = self.grid.ny;
        if j == 0 {
            self.f(i, 1) - self.f(i, 0)
        } else if j == ny {
            self.f(i, ny) - self.f(i, ny - 1)
        } else {
            0.5 * (self.f(i, j + 1) - self.f(i, j - 1))
        }
    }

    fn d_ij(&self, i: usize, j: usize) -> f64 {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let (i0, i1) = (i.saturating_sub(1), (i + 1).min(nx));
        let (j0, j1) = (j.saturating_sub(1), (j + 1).min(ny));
        (self.f(i1, j1) - self.f(i1, j0) - self.f(i0, j1) + self.f(i0, j0)) / ((i1 - i0) * (j1 - j0)) as f64
    }

    /// Interpolated value and derivatives; `None` outside the grid.
    pub fn sample(&self, p: Point) -> Option<Sample> {
        let (i, j, u, v) = self.grid.locate(p)?;
        let mut s = Sample::default();
        let hu = [h00(u), h01(u), h10(u), h11(u)];
        let hv = [h00(v), h01(v), h10(v), h11(v)];
        for (a, b) in [(0usize, 0usize), (1, 0), (0, 1), (1, 1)] {
            let (ci, cj) = (i + a, j + b);
            let terms = [
                (self.f(ci, cj), hu[a], hv[b]),
                (self.d_i(ci, cj), hu[2 + a], hv[b]),
                (self.d_j(ci, cj), hu[a], hv[2 + b]),
                (self.d_ij(ci, cj), hu[2 + a], hv[2 + b]),
            ];
            for (c, bu, bv) in terms {
                s.v += c * bu.0 * bv.0;
                s.gx += c * bu.1 * bv.0;
                s.gy += c * bu.0 * bv.1;
                s.hxx += c * bu.2 * bv.0;
                s.hxy += c * bu.1 * bv.1;
                s.hyy += c * bu.0 * bv.2;
            }
        }
        let h = self.grid.h;
        s.gx /= h;
        s.gy /= h;
        s.hxx /= h * h;
        s.hxy /= h * h;
        s.hyy /= h * h;
        Some(s)
    }

    /// Index of the cell holding `p` and whether all nodes feeding its
    /// interpolant (the surrounding 4×4 block) satisfy `ok`.
    pub fn cell_ok(&self, p: Point, ok: impl Fn(usize) -> bool) -> bool {
        let Some((i, j, _, _)) = self.grid.locate(p) else {
            return false;
        };
        if i == 0 || j == 0 || i + 2 > self.grid.nx || j + 2 > self.grid.ny {
            return false;
        }
        (j - 1..=j + 2).all(|jj| (i - 1..=i + 2).all(|ii| ok(self.grid.idx(ii, jj))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_quadratics() {
        let grid = Grid::new(20, 20, 0.1, Point::new(-1.0, -1.0)).unwrap();
        let f = |x: f64, y: f64| 3.0 * x * x - 2.0 * x * y + 0.5 * y * y + x - 4.0 * y + 2.0;
        let vals: Vec<f64> = (0..=20)
            .flat_map(|j| (0..=20).map(move |i| (i, j)))
            .map(|(i, j)| f(grid.x(i), grid.y(j)))
            .collect();
        let b = Bicubic::new(grid, &vals);
        let p = Point::new(0.237, -0.411);
        let s = b.sample(p).unwrap();
        assert!((s.v - f(p.x, p.y)).abs() < 1e-12);
        assert!((s.gx - (6.0 * p.x - 2.0 * p.y + 1.0)).abs() < 1e-10);
        assert!((s.gy - (-2.0 * p.x + p.y - 4.0)).abs() < 1e-10);
        assert!((s.hxx - 6.0).abs() < 1e-9);
        assert!((s.hxy + 2.0).abs() < 1e-9);
        assert!((s.hyy - 1.0).abs() < 1e-9);
    }

    #[test]
    fn eigen_of_rotated_diagonal() {
        let (c, s) = (30f64.to_radians().cos(), 30f64.to_radians().sin());
        let (l1, l2) = (5.0, 2.0);
        let a = l1 * c * c + l2 * s * s;
        let b = (l1 - l2) * c * s;
        let cc = l1 * s * s + l2 * c * c;
        let (e1, e2, ang) = sym_eigen(a, b, cc);
        assert!((e1 - 5.0).abs() < 1e-12 && (e2 - 2.0).abs() < 1e-12);
        assert!((ang - 30.0).abs() < 1e-10);
    }
}
