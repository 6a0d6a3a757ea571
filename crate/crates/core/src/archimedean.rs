//! The real picture in double precision: SL(2,R) inside SL(2,C), rotated so that 0 and infinity
//! sit off the rotated hyperbolic plane, then conjugated by diag(e^n, e^-n).

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::chabauty::fit_slope;

type C = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArchError {
    #[error("no real root at n = {n} (discriminant {disc:e}); retry with a larger n")]
    NoRealRoot { n: i64, disc: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMat2 {
    pub e: [C; 4],
}

impl CMat2 {
    pub fn new(a: C, b: C, c: C, d: C) -> CMat2 {
        CMat2 { e: [a, b, c, d] }
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> CMat2 {
        CMat2::new(
            C::new(a, 0.0),
            C::new(b, 0.0),
            C::new(c, 0.0),
            C::new(d, 0.0),
        )
    }

    pub fn identity() -> CMat2 {
        CMat2::real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn mul(&self, o: &CMat2) -> CMat2 {
        let [a, b, c, d] = self.e;
        let [p, q, r, s] = o.e;
        CMat2::new(a * p + b * r, a * q + b * s, c * p + d * r, c * q + d * s)
    }

    pub fn det(&self) -> C {
        self.e[0] * self.e[3] - self.e[1] * self.e[2]
    }

    /// The adjugate, which is the inverse for det 1.
    pub fn inv_sl(&self) -> CMat2 {
        let [a, b, c, d] = self.e;
        CMat2::new(d, -b, -c, a)
    }

    pub fn is_sl(&self, tol: f64) -> bool {
        (self.det() - 1.0).norm() <= tol
    }

    /// Largest entrywise distance.
    pub fn dist(&self, o: &CMat2) -> f64 {
        self.e
            .iter()
            .zip(o.e.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    /// diag(e^n, e^-n) g diag(e^-n, e^n).
    pub fn conjugate_exp_diag(&self, n: i64) -> CMat2 {
        let t = (2.0 * n as f64).exp();
        CMat2::new(self.e[0], self.e[1] * t, self.e[2] / t, self.e[3])
    }

    pub fn to_strings(&self) -> [String; 4] {
        self.e.map(|x| format!("{:.12}{:+.12}i", x.re, x.im))
    }
}

/// M = [[1/(2i) + i, 1], [-2, 2i]], the product of [[1/(2i), 1], [0, 2i]] and [[1, 0], [i, 1]].
pub fn rotation() -> CMat2 {
    let i = C::i();
    CMat2::new(
        C::new(1.0, 0.0) / (2.0 * i) + i,
        C::new(1.0, 0.0),
        C::new(-2.0, 0.0),
        2.0 * i,
    )
}

/// M h M^-1 for h = [[a, b], [c, d]] in SL(2,R).
pub fn rotated_real_subgroup_element(a: f64, b: f64, c: f64, d: f64) -> Result<CMat2, ArchError> {
    if (a * d - b * c - 1.0).abs() > 1e-12 {
        return Err(ArchError::Precondition(format!(
            "ad - bc = {} is not 1",
            a * d - b * c
        )));
    }
    let m = rotation();
    Ok(m.mul(&CMat2::real(a, b, c, d)).mul(&m.inv_sl()))
}

/// A limit target: [[a - ib, z1 + i z2 / 2], [0, a + ib]] with a^2 + b^2 = 1. The recipe is
/// parametrised by z = z1 + i z2 and reaches z1 + i z2 / 2 in the corner.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RealTarget {
    pub a: f64,
    pub b: f64,
    pub z: (f64, f64),
}

impl RealTarget {
    pub fn new(a: f64, b: f64, z: C) -> Result<RealTarget, ArchError> {
        if (a * a + b * b - 1.0).abs() > 1e-12 {
            return Err(ArchError::Precondition(format!(
                "a^2 + b^2 = {} is not 1",
                a * a + b * b
            )));
        }
        Ok(RealTarget {
            a,
            b,
            z: (z.re, z.im),
        })
    }

    /// The point on the unit circle at angle t.
    pub fn on_circle(t: f64, z: C) -> RealTarget {
        RealTarget {
            a: t.cos(),
            b: t.sin(),
            z: (z.re, z.im),
        }
    }

    pub fn limit(&self) -> CMat2 {
        let (z1, z2) = self.z;
        CMat2::new(
            C::new(self.a, -self.b),
            C::new(z1, z2 / 2.0),
            C::new(0.0, 0.0),
            C::new(self.a, self.b),
        )
    }
}

/// The root of x^2 + p x + q of smaller magnitude, computed without cancellation.
fn small_root(p: f64, q: f64, n: i64) -> Result<f64, ArchError> {
    let disc = p * p - 4.0 * q;
    if disc < 0.0 {
        return Err(ArchError::NoRealRoot { n, disc });
    }
    let big = -(p + p.signum() * disc.sqrt()) / 2.0;
    Ok(if big == 0.0 { 0.0 } else { q / big })
}

/// One element of SL(2,R) split as limit + perturbation. The limit part has -c - b/4 = 0 and
/// d = a exactly, so its rotated upper-right entry is an exact zero and the e^2n amplification
/// only ever sees the perturbation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RealSequencePoint {
    pub limit: (f64, f64, f64, f64),
    pub perturbation: (f64, f64, f64, f64),
}

impl RealSequencePoint {
    pub fn tuple(&self) -> (f64, f64, f64, f64) {
        let (l, d) = (self.limit, self.perturbation);
        (l.0 + d.0, l.1 + d.1, l.2 + d.2, l.3 + d.3)
    }

    /// M h M^-1 diag-conjugated by e^n, using that conjugation is linear in h.
    pub fn rotated_conjugate(&self, n: i64) -> CMat2 {
        let m = rotation();
        let rot =
            |(a, b, c, d): (f64, f64, f64, f64)| m.mul(&CMat2::real(a, b, c, d)).mul(&m.inv_sl());
        let (x, y) = (rot(self.limit), rot(self.perturbation));
        let sum = CMat2::new(
            x.e[0] + y.e[0],
            x.e[1] + y.e[1],
            x.e[2] + y.e[2],
            x.e[3] + y.e[3],
        );
        sum.conjugate_exp_diag(n)
    }
}

/// (a_n, b_n, c_n, d_n) in SL(2,R) whose rotated conjugates by diag(e^n, e^-n) tend to the
/// target. With t = e^-2n:
/// - b^2 != 1: c_n = b/2, d_n = z2 t + a_n, b_n = -4(z1 t + b/2) and a_n solves
///   a_n^2 + z2 t a_n + 2 b z1 t + b^2 - 1 = 0, taking the root nearest a;
/// - b^2 = 1: a_n = 0, d_n = z2 t, b_n = -4(z1 t + c_n) and c_n solves
///   4 c_n^2 + 4 z1 t c_n - 1 = 0, taking the root nearest b/2.
///
/// The roots are found as small corrections to a and b/2, which is what keeps them accurate.
pub fn real_limit_sequence(target: &RealTarget, n: i64) -> Result<RealSequencePoint, ArchError> {
    let t = (-2.0 * n as f64).exp();
    let (z1, z2) = target.z;
    let (a, b) = (target.a, target.b);
    if (b * b - 1.0).abs() <= 1e-12 {
        // c_n = b/2 + g: g^2 + (b + z1 t) g + b z1 t / 2 = 0
        let g = small_root(b + z1 * t, b * z1 * t / 2.0, n)?;
        Ok(RealSequencePoint {
            limit: (0.0, -2.0 * b, b / 2.0, 0.0),
            perturbation: (0.0, -4.0 * (z1 * t + g), g, z2 * t),
        })
    } else {
        // a_n = a + d: d^2 + (2a + z2 t) d + (z2 a + 2 b z1) t = 0, using a^2 + b^2 = 1
        let d = small_root(2.0 * a + z2 * t, (z2 * a + 2.0 * b * z1) * t, n)?;
        Ok(RealSequencePoint {
            limit: (a, -2.0 * b, b / 2.0, a),
            perturbation: (d, -4.0 * z1 * t, 0.0, d + z2 * t),
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RealRecord {
    pub n: i64,
    pub entries: [String; 4],
    /// |lower-left entry|
    pub lower: f64,
    /// max over the diagonal of the distance to a -+ ib
    pub diagonal: f64,
    /// |upper-right entry - (z1 + i z2 / 2)|
    pub upper: f64,
    /// max of the three
    pub error: f64,
    /// |a_n d_n - b_n c_n - 1|
    pub det_defect: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RealConvergenceReport {
    pub target: RealTarget,
    pub records: Vec<RealRecord>,
    /// slope of ln(error) against n over the points above the rounding floor
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// |conj(g11) - g22| at the last n
    pub diagonal_conjugacy: f64,
    /// ||g11|^2 - 1| at the last n
    pub norm_defect: f64,
    pub max_det_defect: f64,
}

/// Errors below this are rounding, not signal.
const FLOOR: f64 = 1e-14;

pub fn verify_real_convergence(
    target: &RealTarget,
    ns: &[i64],
) -> Result<RealConvergenceReport, ArchError> {
    let lim = target.limit();
    let mut records = Vec::with_capacity(ns.len());
    let mut last = None;
    for &n in ns {
        let pt = real_limit_sequence(target, n)?;
        let (a, b, c, d) = pt.tuple();
        let det_defect = (a * d - b * c - 1.0).abs();
        let g = pt.rotated_conjugate(n);
        let lower = g.e[2].norm();
        let diagonal = (g.e[0] - lim.e[0]).norm().max((g.e[3] - lim.e[3]).norm());
        let upper = (g.e[1] - lim.e[1]).norm();
        records.push(RealRecord {
            n,
            entries: g.to_strings(),
            lower,
            diagonal,
            upper,
            error: lower.max(diagonal).max(upper),
            det_defect,
        });
        last = Some(g);
    }
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.error > FLOOR)
        .map(|r| (r.n as f64, r.error.ln()))
        .collect();
    let fit = fit_slope(&pts);
    let (diagonal_conjugacy, norm_defect) = match last {
        Some(g) => (
            (g.e[0].conj() - g.e[3]).norm(),
            (g.e[0].norm_sqr() - 1.0).abs(),
        ),
        None => (0.0, 0.0),
    };
    Ok(RealConvergenceReport {
        target: *target,
        max_det_defect: records.iter().map(|r| r.det_defect).fold(0.0, f64::max),
        records,
        slope: fit.map(|f| f.0),
        intercept: fit.map(|f| f.1),
        diagonal_conjugacy,
        norm_defect,
    })
}
