use std::fmt;

use super::{lv, BtError};
use crate::padic::{hensel_root, Ext, Level, PadicError};
use crate::sl2::{Mat2, SLACK};

/// A point of P^1: `Inf` is [0 : 1], `Finite(x)` is [1 : x].
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq)]
pub enum End {
    Inf,
    Finite(Ext),
}

impl End {
    /// Projective point of the column (top, bottom).
    pub fn from_column(top: &Ext, bottom: &Ext) -> Result<End, BtError> {
        if top.is_zero() {
            if bottom.is_zero() {
                return Err(PadicError::PrecisionExhausted(
                    "both coordinates of the image vanish".into(),
                )
                .into());
            }
            return Ok(End::Inf);
        }
        Ok(End::Finite(bottom.div(top)?))
    }

    /// Equality at precision, relative to the size of the coordinates.
    pub fn same_as(&self, o: &End) -> bool {
        match (self, o) {
            (End::Inf, End::Inf) => true,
            (End::Finite(x), End::Finite(y)) => {
                let d = x - y;
                if d.is_exact_zero() {
                    return true;
                }
                let scale = x.defect().min(y.defect()).min(0.0);
                let scale = if scale.is_finite() { scale } else { 0.0 };
                d.is_zero() || d.defect() - scale >= (x.ctx().n - SLACK) as f64
            }
            _ => false,
        }
    }

    pub fn level(&self) -> Level {
        match self {
            End::Inf => Level::Qp,
            End::Finite(x) => x.level(),
        }
    }
}

impl fmt::Display for End {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            End::Inf => f.write_str("[0 : 1]"),
            End::Finite(x) => write!(f, "[1 : {x}]"),
        }
    }
}

/// g . e with ends as columns: [1 : x] goes to [a + b x : c + d x].
pub fn act_end(g: &Mat2, e: &End) -> Result<End, BtError> {
    let (top, bottom) = match e {
        End::Inf => (g.e[1].clone(), g.e[3].clone()),
        End::Finite(x) => (&g.e[0] + &(&g.e[1] * x), &g.e[2] + &(&g.e[3] * x)),
    };
    End::from_column(&top, &bottom)
}

#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug)]
pub enum Hyperbolic {
    Hyperbolic {
        length: i64,
        attracting: End,
        repelling: End,
    },
    NotHyperbolic,
}

/// Eigen-end of g for eigenvalue lambda: the kernel of g - lambda, read off the better row.
fn eigen_end(g: &Mat2, lambda: &Ext) -> Result<End, BtError> {
    let r1 = (g.e[1].clone(), lambda - &g.e[0]);
    let r2 = (lambda - &g.e[3], g.e[2].clone());
    let size = |v: &(Ext, Ext)| v.0.defect().min(v.1.defect());
    let v = if size(&r1) <= size(&r2) { r1 } else { r2 };
    End::from_column(&v.0, &v.1)
}

/// Translation length and axis ends of g in SL(2). g is hyperbolic iff its trace has negative
/// valuation; the length is -2 v(tr g) in units of the level's uniformizer. The attracting end
/// belongs to the eigenvalue of negative valuation.
pub fn hyperbolic_data(g: &Mat2) -> Result<Hyperbolic, BtError> {
    let level = g.level();
    if level == Level::K {
        return Err(PadicError::UnsupportedLevel(Level::K).into());
    }
    let tw = g.tower();
    let tr = g.trace();
    let vt = match lv(&tr, level, tw) {
        Some(v) if v < 0 => v,
        _ => return Ok(Hyperbolic::NotHyperbolic),
    };
    // lambda = tr Y with Y^2 - Y + tr^-2 = 0; the root near 1 gives the large eigenvalue
    let t2i = tr.pow(2).inv()?;
    let f = [t2i, Ext::from_i64(tw, -1), Ext::one(tw)];
    let y = hensel_root(&f, &Ext::one(tw).at_level(level))
        .map_err(|e| BtError::EigenvalueExtensionRequired(e.to_string()))?;
    let big = &tr * &y;
    let small = big.inv()?;
    Ok(Hyperbolic::Hyperbolic {
        length: -2 * vt,
        attracting: eigen_end(g, &big)?,
        repelling: eigen_end(g, &small)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bttree::{act_vertex, ball, distance, TreeVertex};
    use crate::padic::{ExtKind, Padic, PrimeContext, Tower};

    fn ctx() -> &'static PrimeContext {
        PrimeContext::get(5, 40).unwrap()
    }

    #[test]
    fn test_act_end_examples() {
        let e = Tower::e(ctx(), ExtKind::RamifiedP);
        let a = Ext::alpha(e);
        let g = Mat2::lower(e, a.clone());
        assert_eq!(
            act_end(&g, &End::Finite(Ext::zero(e))).unwrap(),
            End::Finite(a.clone())
        );
        let w = Ext::uniformizer(e, Level::E);
        let d = Mat2::diag(w.clone(), w.inv().unwrap());
        let x = Ext::from_i64(e, 3);
        let End::Finite(y) = act_end(&d, &End::Finite(x.clone())).unwrap() else {
            panic!()
        };
        assert!(End::Finite(y).same_as(&End::Finite(&x * &w.powi(-2).unwrap())));
        let sw = Mat2::from_i64(e, [[0, 1], [1, 0]]);
        assert_eq!(act_end(&sw, &End::Inf).unwrap(), End::Finite(Ext::zero(e)));
        assert!(act_end(&sw, &End::Finite(Ext::zero(e))).unwrap() == End::Inf);
    }

    #[test]
    fn test_hyperbolic_examples() {
        let qp = Tower::qp(ctx());
        let p = Ext::from_i64(qp, 5);
        let d = Mat2::diag(p.clone(), p.inv().unwrap());
        let Hyperbolic::Hyperbolic {
            length,
            attracting,
            repelling,
        } = hyperbolic_data(&d).unwrap()
        else {
            panic!()
        };
        assert_eq!(length, 2);
        assert_eq!(attracting, End::Inf);
        assert!(repelling.same_as(&End::Finite(Ext::zero(qp))));
        assert!(matches!(
            hyperbolic_data(&Mat2::upper(qp, Ext::one(qp))).unwrap(),
            Hyperbolic::NotHyperbolic
        ));
        assert!(matches!(
            hyperbolic_data(&Mat2::from_i64(qp, [[0, 1], [-1, 0]])).unwrap(),
            Hyperbolic::NotHyperbolic
        ));
    }

    #[test]
    fn test_hyperbolic_axis_displacement() {
        let qp = Tower::qp(ctx());
        let p = Padic::p(ctx());
        // conjugate diag(p, 1/p) by a unipotent so the axis moves off the standard one
        let u = Mat2::upper(qp, Ext::from_i64(qp, 2));
        let d = Mat2::diag(
            Ext::from_padic(qp, p.clone()),
            Ext::from_padic(qp, p.inv().unwrap()),
        );
        let g = u.mul(&d).mul(&u.inv_sl());
        let Hyperbolic::Hyperbolic {
            length, attracting, ..
        } = hyperbolic_data(&g).unwrap()
        else {
            panic!()
        };
        assert_eq!(length, 2);
        assert!(attracting.same_as(&act_end(&u, &End::Inf).unwrap()));
        let base = TreeVertex::base(qp, Level::Qp);
        for v in ball(&base, 2) {
            assert!(distance(&v, &act_vertex(&g, &v).unwrap()) >= length);
        }
        assert_eq!(distance(&base, &act_vertex(&g, &base).unwrap()), length);
    }
}
