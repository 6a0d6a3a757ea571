//! Chabauty-limit experiments: the rotated copy of SL(2,F) inside SL(2,E), conjugation by
//! powers of a diagonal element, limit-group membership defects, Hensel-lifted limit sequences,
//! the polar decomposition and the boundary-disjointness sampler.

mod boundary;
mod limits;
mod polar;
mod rotation;

pub use boundary::{boundary_disjointness_check, BoundaryReport};
pub use limits::{
    condition2_sweep, fit_slope, htheta_limit_sequence, limit_sequence_for_target,
    verify_convergence, ConvergenceReport, ConvergenceSetup, LimitTarget, NRecord, SweepReport,
};
pub use polar::{polar_decompose, PolarContext, PolarDecomposition, PolarPair};
pub use rotation::{rotated_subgroup_element, RotationContext};

use thiserror::Error;

use crate::bttree::BtError;
use crate::padic::{Ext, Level, PadicError};
use crate::sl2::{Mat2, Sl2Error};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChabautyError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Tree(#[from] BtError),
    #[error(transparent)]
    Sl2(#[from] Sl2Error),
    #[error("decomposition search exhausted: {0}")]
    DecompositionSearchExhausted(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// The limit groups that occur, in the lower-triangular form the diagonal conjugation produces.
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug)]
pub enum LimitGroupDescriptor {
    /// [[a - alpha b, 0], [z, a + alpha b]] with a, b in F, a^2 - alpha^2 b^2 = 1, z in E.
    LowerTriangularNorm1,
    /// +-[[1, 0], [z, 1]] with z in F.
    UnipotentMu2,
    /// W SL(2,F) W^-1 for the given witness W.
    ConjugateOfH { witness: Mat2 },
}

/// Exact zero counts as infinitely close.
fn dv(x: &Ext) -> f64 {
    if x.is_exact_zero() {
        f64::INFINITY
    } else {
        x.defect_e_units()
    }
}

/// Entrywise defect valuation of g from L, in units of the uniformizer of g's top field.
/// Member iff the defect reaches the precision.
pub fn limit_membership_defect(g: &Mat2, l: &LimitGroupDescriptor) -> f64 {
    let tw = g.tower();
    let [a, b, c, d] = &g.e;
    match l {
        LimitGroupDescriptor::LowerTriangularNorm1 => {
            let norm = a * &a.sigma();
            let n1 = &norm - &Ext::one(tw);
            dv(b).min(dv(&(d - &a.sigma()))).min(dv(&n1))
        }
        LimitGroupDescriptor::UnipotentMu2 => {
            let _ = c;
            let one = Ext::one(tw);
            let plus = dv(&(a - &one)).min(dv(&(d - &one)));
            let minus = dv(&(a + &one)).min(dv(&(d + &one)));
            dv(b).min(plus.max(minus))
        }
        LimitGroupDescriptor::ConjugateOfH { witness } => {
            let Ok(wi) = witness.inv() else {
                return f64::NEG_INFINITY;
            };
            let h = wi.mul(g).mul(witness);
            h.e.iter()
                .map(|x| dv(&(x - &x.sigma())))
                .fold(f64::INFINITY, f64::min)
        }
    }
}

/// Precision in units of the uniformizer of the tower's top field below K.
pub fn precision_units(g: &Mat2) -> f64 {
    (g.precision() * g.tower().e_index()) as f64
}

/// D^n g D^-n for D = diag(w, 1/w), w the uniformizer of `level`: e12 gains w^2n, e21 gains
/// w^-2n.
pub fn conjugate_by_diag_power(g: &Mat2, n: i64, level: Level) -> Result<Mat2, ChabautyError> {
    let tw = g.tower();
    let w = Ext::uniformizer(tw, level);
    let up = w.powi(2 * n)?;
    let down = w.powi(-2 * n)?;
    let e12 = &g.e[1] * &up;
    let e21 = &g.e[2] * &down;
    for x in [&e12, &e21] {
        if x.is_zero() && !x.is_exact_zero() && x.defect() < 0.0 {
            return Err(PadicError::PrecisionExhausted(format!(
                "conjugation by the {n}-th power leaves no digits"
            ))
            .into());
        }
    }
    Ok(Mat2::new(g.e[0].clone(), e12, e21, g.e[3].clone()))
}

/// w L w^-1 for w = [[0, 1], [-1, 0]]: turns the lower-triangular limits into the upper-triangular
/// form of the Borel subgroup fixing [1 : 0].
pub fn weyl_flip(g: &Mat2) -> Mat2 {
    let w = Mat2::from_i64(g.tower(), [[0, 1], [-1, 0]]);
    w.mul(g).mul(&w.inv_sl())
}
