use std::fmt;

use crate::padic::{Ext, Level, Padic, PadicError, Tower};

/// 2x2 matrix over one tower, entries in row-major order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat2 {
    pub e: [Ext; 4],
}

impl Mat2 {
    pub fn new(e11: Ext, e12: Ext, e21: Ext, e22: Ext) -> Mat2 {
        Mat2 {
            e: [e11, e12, e21, e22],
        }
    }

    pub fn from_i64(tower: &'static Tower, m: [[i64; 2]; 2]) -> Mat2 {
        let f = |x| Ext::from_i64(tower, x);
        Mat2::new(f(m[0][0]), f(m[0][1]), f(m[1][0]), f(m[1][1]))
    }

    pub fn identity(tower: &'static Tower) -> Mat2 {
        Mat2::from_i64(tower, [[1, 0], [0, 1]])
    }

    pub fn diag(a: Ext, d: Ext) -> Mat2 {
        let z = Ext::zero(a.tower());
        Mat2::new(a, z.clone(), z, d)
    }

    pub fn upper(tower: &'static Tower, b: Ext) -> Mat2 {
        Mat2::new(Ext::one(tower), b, Ext::zero(tower), Ext::one(tower))
    }

    pub fn lower(tower: &'static Tower, c: Ext) -> Mat2 {
        Mat2::new(Ext::one(tower), Ext::zero(tower), c, Ext::one(tower))
    }

    /// Entry (i, j), zero-based.
    pub fn at(&self, i: usize, j: usize) -> &Ext {
        &self.e[2 * i + j]
    }

    pub fn level(&self) -> Level {
        self.e.iter().map(|x| x.level()).max().unwrap()
    }

    /// The most specific tower among the entries.
    pub fn tower(&self) -> &'static Tower {
        self.e
            .iter()
            .map(|x| x.tower())
            .max_by_key(|t| t.top_level())
            .unwrap()
    }

    pub fn precision(&self) -> u32 {
        self.e[0].ctx().n
    }

    pub fn map(&self, f: impl Fn(&Ext) -> Ext) -> Mat2 {
        Mat2 {
            e: [f(&self.e[0]), f(&self.e[1]), f(&self.e[2]), f(&self.e[3])],
        }
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let (a, b) = (&self.e, &o.e);
        Mat2::new(
            &a[0] * &b[0] + &a[1] * &b[2],
            &a[0] * &b[1] + &a[1] * &b[3],
            &a[2] * &b[0] + &a[3] * &b[2],
            &a[2] * &b[1] + &a[3] * &b[3],
        )
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            e: [0, 1, 2, 3].map(|i| &self.e[i] + &o.e[i]),
        }
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            e: [0, 1, 2, 3].map(|i| &self.e[i] - &o.e[i]),
        }
    }

    pub fn scale(&self, k: &Ext) -> Mat2 {
        self.map(|x| x * k)
    }

    pub fn det(&self) -> Ext {
        &self.e[0] * &self.e[3] - &self.e[1] * &self.e[2]
    }

    pub fn trace(&self) -> Ext {
        &self.e[0] + &self.e[3]
    }

    pub fn inv(&self) -> Result<Mat2, PadicError> {
        let d = self.det().inv()?;
        Ok(Mat2::new(
            &self.e[3] * &d,
            -(&self.e[1] * &d),
            -(&self.e[2] * &d),
            &self.e[0] * &d,
        ))
    }

    /// Inverse of a determinant-one matrix (the adjugate), exact when the entries are.
    pub fn inv_sl(&self) -> Mat2 {
        Mat2::new(
            self.e[3].clone(),
            -&self.e[1],
            -&self.e[2],
            self.e[0].clone(),
        )
    }

    /// self * o * self^-1
    pub fn conj(&self, o: &Mat2) -> Result<Mat2, PadicError> {
        Ok(self.mul(o).mul(&self.inv()?))
    }

    pub fn sigma(&self) -> Mat2 {
        self.map(|x| x.sigma())
    }

    pub fn apply(&self, v: &(Ext, Ext)) -> (Ext, Ext) {
        (
            &self.e[0] * &v.0 + &self.e[1] * &v.1,
            &self.e[2] * &v.0 + &self.e[3] * &v.1,
        )
    }

    pub fn is_zero(&self) -> bool {
        self.e.iter().all(|x| x.is_zero())
    }

    pub fn is_exact(&self) -> bool {
        self.e.iter().all(|x| x.is_exact())
    }

    /// Minimum entry valuation (v(p) = 1).
    pub fn defect(&self) -> f64 {
        self.e
            .iter()
            .map(|x| x.defect())
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest local valuation deficit: max over entries of -valuation, in p-digits.
    pub fn norm_exponent(&self) -> f64 {
        -self.defect()
    }

    /// Digits to which self and o agree, relative to the larger of the two: v(self - o) minus
    /// the smaller of their minimum entry valuations. Infinite when they agree exactly.
    pub fn rel_defect(&self, o: &Mat2) -> f64 {
        let d = self.sub(o);
        if d.e.iter().all(|x| x.is_exact_zero()) {
            return f64::INFINITY;
        }
        let scale = self.defect().min(o.defect());
        d.defect() - if scale.is_finite() { scale } else { 0.0 }
    }

    /// Entries agree with o to within N - slack digits of the larger matrix.
    pub fn approx_eq(&self, o: &Mat2, slack: u32) -> bool {
        self.rel_defect(o) >= (self.precision() - slack) as f64
    }

    /// v(det - 1) >= N - slack, less the digits the determinant loses when entries exceed 1.
    pub fn is_sl(&self, slack: u32) -> bool {
        let d = &self.det() - &Ext::one(self.tower());
        let lost = 2.0 * self.norm_exponent().max(0.0);
        d.is_exact_zero() || d.defect() >= (self.precision() - slack) as f64 - lost
    }

    /// Entries of `self` as strings, for reports.
    pub fn to_strings(&self) -> [String; 4] {
        self.e.clone().map(|x| x.to_string())
    }

    pub fn scale_padic(&self, k: &Padic) -> Mat2 {
        self.map(|x| x.scale(k))
    }
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.e[0], self.e[1], self.e[2], self.e[3]
        )
    }
}

impl std::ops::Mul for &Mat2 {
    type Output = Mat2;
    fn mul(self, o: &Mat2) -> Mat2 {
        Mat2::mul(self, o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{ExtKind, PrimeContext};

    #[test]
    fn test_inverse_and_det() {
        let tw = Tower::e(PrimeContext::get(5, 40).unwrap(), ExtKind::Unramified);
        let a = Ext::alpha(tw);
        let m = Mat2::new(
            &a + &Ext::from_i64(tw, 1),
            a.clone(),
            Ext::from_i64(tw, 3),
            Ext::from_i64(tw, 7),
        );
        let mi = m.inv().unwrap();
        assert!(m.mul(&mi).approx_eq(&Mat2::identity(tw), 0));
        let u = Mat2::upper(tw, a.clone());
        assert!(u.is_sl(0));
        assert!(u.mul(&u.inv_sl()).approx_eq(&Mat2::identity(tw), 0));
    }
}
