//! Local derivatives of the total potential built from interpolated field
//! components. Near an RF null `|E|²` has large third derivatives, so the
//! Hessian of a nodal `U` interpolant jumps from cell to cell; assembling it
//! from `∇E` instead keeps it continuous.

use crate::geometry::Point;
use crate::interp::{Bicubic, Sample};
use crate::laplace::FieldMap;

pub(crate) struct Derivatives {
    pub grad: [f64; 2],
    /// Total Hessian `[xx, xy, yy]`.
    pub hess: [f64; 3],
    /// RF pseudopotential part alone.
    pub rf_hess: [f64; 3],
}

pub(crate) struct FieldModel<'a> {
    field: &'a FieldMap,
    rf: [Bicubic<'a>; 2],
    st: Option<[Bicubic<'a>; 2]>,
    /// `Q²/(4mΩ²)`
    k: f64,
    charge: f64,
}

impl<'a> FieldModel<'a> {
    pub fn new(rf: &'a FieldMap, st: Option<&'a FieldMap>, k: f64, charge: f64) -> Self {
        FieldModel {
            field: rf,
            rf: [Bicubic::new(rf.grid, &rf.ex), Bicubic::new(rf.grid, &rf.ey)],
            st: st.map(|s| [Bicubic::new(s.grid, &s.ex), Bicubic::new(s.grid, &s.ey)]),
            k,
            charge,
        }
    }

    fn pair(b: &[Bicubic<'a>; 2], p: Point) -> Option<[Sample; 2]> {
        Some([b[0].sample(p)?, b[1].sample(p)?])
    }

    pub fn at(&self, p: Point) -> Option<Derivatives> {
        if !self.rf[0].cell_ok(p, |q| !self.field.disc.is_fixed(q)) {
            return None;
        }
        let e = Self::pair(&self.rf, p)?;
        let k2 = 2.0 * self.k;
        let mut grad = [0.0; 2];
        let mut rf_hess = [0.0; 3];
        for c in &e {
            grad[0] += k2 * c.v * c.gx;
            grad[1] += k2 * c.v * c.gy;
            rf_hess[0] += k2 * (c.gx * c.gx + c.v * c.hxx);
            rf_hess[1] += k2 * (c.gx * c.gy + c.v * c.hxy);
            rf_hess[2] += k2 * (c.gy * c.gy + c.v * c.hyy);
        }
        let mut hess = rf_hess;
        if let Some(st) = &self.st {
            let [sx, sy] = Self::pair(st, p)?;
            let q = self.charge;
            grad[0] -= q * sx.v;
            grad[1] -= q * sy.v;
            hess[0] -= q * sx.gx;
            hess[1] -= q * 0.5 * (sx.gy + sy.gx);
            hess[2] -= q * sy.gy;
        }
        Some(Derivatives { grad, hess, rf_hess })
    }

    /// Newton on the model gradient, steps capped at `max_step`.
    pub fn refine(&self, start: Point, max_step: f64) -> Option<(Point, Derivatives)> {
        let h = self.field.grid.h;
        let mut x = start;
        for _ in 0..100 {
            let d = self.at(x)?;
            let [a, b, c] = d.hess;
            let det = a * c - b * b;
            if det <= 0.0 || a <= 0.0 {
                return None;
            }
            let mut dx = -(c * d.grad[0] - b * d.grad[1]) / det;
            let mut dy = -(-b * d.grad[0] + a * d.grad[1]) / det;
            let len = dx.hypot(dy);
            if len > max_step {
                dx *= max_step / len;
                dy *= max_step / len;
            }
            x = Point::new(x.x + dx, x.y + dy);
            if len < 1e-10 * h {
                return Some((x, self.at(x)?));
            }
        }
        None
    }
}
