use rand::Rng;
use serde::Serialize;

use super::{
    conjugate_by_diag_power, dv, limit_membership_defect, precision_units, weyl_flip,
    ChabautyError, LimitGroupDescriptor, RotationContext,
};
use crate::padic::{hensel_root, sqrt, Ext, Level, Padic, Tower};
use crate::sl2::{random_sl2, Mat2, SLACK};

/// A point of the limit group: a, b in F with a^2 - alpha^2 b^2 = 1 and C in E, giving
/// [[a - alpha b, 0], [4 alpha^2 C, a + alpha b]].
#[derive(Clone, Debug)]
pub struct LimitTarget {
    pub a: Padic,
    pub b: Padic,
    pub c: Ext,
}

impl LimitTarget {
    /// a = sign times the canonical root of 1 + alpha^2 b^2.
    pub fn new(
        tower: &'static Tower,
        b: Padic,
        c: Ext,
        sign: i32,
    ) -> Result<LimitTarget, ChabautyError> {
        let rad = &Padic::one(tower.ctx) + &(tower.s() * &(&b * &b));
        let r = sqrt(&Ext::from_padic(Tower::qp(tower.ctx), rad))?;
        let a = if sign < 0 {
            -r.coord(0)
        } else {
            r.coord(0).clone()
        };
        Ok(LimitTarget {
            a,
            b,
            c: c.in_tower(tower).at_level(Level::E),
        })
    }

    pub fn tower(&self) -> &'static Tower {
        self.c.tower()
    }

    pub fn limit_element(&self) -> Mat2 {
        let tw = self.tower();
        let al = Ext::alpha(tw);
        let a = Ext::from_padic(tw, self.a.clone());
        let ab = al.scale(&self.b);
        let z = (&al * &al).scale(&Padic::from_i64(tw.ctx, 4)).mul(&self.c);
        Mat2::new(&a - &ab, Ext::zero(tw), z, &a + &ab)
    }
}

/// w_E^2n, which always lies in F.
fn w2n(tower: &'static Tower, n: i64) -> Result<Padic, ChabautyError> {
    Ok(Ext::uniformizer(tower, Level::E)
        .powi(2 * n)?
        .coord(0)
        .clone())
}

/// The element of SL(2,F) whose rotated conjugate by D^n approaches the target: d_n is the root
/// of X^2 + w^2n C2 X - alpha^2 b^2 - w^2n C1 b - 1 near a, a_n = d_n + w^2n C2,
/// c_n = alpha^2 b + w^2n C1 and b_n = b.
///
/// Newton starts at the limit value a rather than at 1: when E is unramified b can be a unit and
/// then 1 is not a root modulo the uniformizer, while f_n(a) = w^2n (C2 a - C1 b) always is.
pub fn limit_sequence_for_target(target: &LimitTarget, n: i64) -> Result<Mat2, ChabautyError> {
    let tw = target.tower();
    let ctx = tw.ctx;
    let qp = Tower::qp(ctx);
    let w = w2n(tw, n)?;
    let (c1, c2) = (target.c.coord(0), target.c.coord(1));
    let s = tw.s();
    let b = &target.b;
    let f0 = -(&(&(s * &(b * b)) + &(&w * &(c1 * b))) + &Padic::one(ctx));
    let f1 = &w * c2;
    let f = [
        Ext::from_padic(qp, f0),
        Ext::from_padic(qp, f1.clone()),
        Ext::one(qp),
    ];
    let d = hensel_root(&f, &Ext::from_padic(qp, target.a.clone()))?
        .coord(0)
        .clone();
    let a_n = &d + &f1;
    let c_n = &(s * b) + &(&w * c1);
    let k = |x: Padic| Ext::from_padic(tw, x);
    Ok(Mat2::new(k(a_n), k(b.clone()), k(c_n), k(d)))
}

/// [[x_n, y_n], [a y_n, x_n]] in H_theta_a with y_n = (z/a) p^2n and x_n the root of
/// X^2 - a y_n^2 - 1 near `sign`. Conjugated by diag(p^n, p^-n) it tends to
/// [[sign, 0], [z, sign]].
pub fn htheta_limit_sequence(
    tower: &'static Tower,
    a: &Padic,
    z: &Padic,
    sign: i32,
    n: i64,
) -> Result<Mat2, ChabautyError> {
    let ctx = tower.ctx;
    let qp = Tower::qp(ctx);
    let y = &z.div(a)? * &Padic::p_pow(ctx, 2 * n);
    let f0 = -(&(a * &(&y * &y)) + &Padic::one(ctx));
    let f = [Ext::from_padic(qp, f0), Ext::zero(qp), Ext::one(qp)];
    let x = hensel_root(&f, &Ext::from_i64(qp, sign.signum() as i64))?
        .coord(0)
        .clone();
    let k = |v: Padic| Ext::from_padic(tower, v);
    Ok(Mat2::new(k(x.clone()), k(y.clone()), k(a * &y), k(x)))
}

/// What a convergence run measures: conjugation by diag(w, 1/w) at `level`, after the optional
/// rotation, against the limit group and optionally one target element.
#[derive(Clone, Debug)]
pub struct ConvergenceSetup {
    pub level: Level,
    pub rotation: Option<RotationContext>,
    pub limit_group: LimitGroupDescriptor,
    pub target: Option<Mat2>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NRecord {
    pub n: i64,
    pub entries: [String; 4],
    pub defect_to_limit_group: f64,
    pub defect_to_target: Option<f64>,
    pub sl_defect: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub records: Vec<NRecord>,
    /// least-squares slope of the tracked defect against n, over unsaturated points
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// max over n of 2n - defect to the limit group
    pub c: Option<f64>,
    /// how far the conjugates reach outside the unit ball: max over n of -min entry valuation,
    /// at least 0
    pub radius: f64,
    pub non_decreasing: bool,
    /// smallest increase between consecutive unsaturated defects
    pub min_step: Option<f64>,
    /// points at or above precision minus slack, left out of the fit
    pub saturated: usize,
    /// the target moved to upper-triangular form by the Weyl element
    pub target_upper: Option<[String; 4]>,
}

/// Least-squares line through the points; None with fewer than two distinct abscissae.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let m = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let den = m * sxx - sx * sx;
    if den.abs() < 1e-12 {
        return None;
    }
    let slope = (m * sxy - sx * sy) / den;
    Some((slope, (sy - slope * sx) / m))
}

fn entrywise_defect(g: &Mat2, t: &Mat2) -> f64 {
    g.e.iter()
        .zip(t.e.iter())
        .map(|(x, y)| dv(&(x - y)))
        .fold(f64::INFINITY, f64::min)
}

/// Runs the recipe over `ns` and records, per n, the defect of the conjugate to the limit group
/// and to the target. The slope is fitted to the target defect when a target is given, else to
/// the limit-group defect.
pub fn verify_convergence(
    recipe: &dyn Fn(i64) -> Result<Mat2, ChabautyError>,
    ns: &[i64],
    setup: &ConvergenceSetup,
) -> Result<ConvergenceReport, ChabautyError> {
    let mut records = Vec::with_capacity(ns.len());
    let mut ceiling = f64::INFINITY;
    let mut radius = 0.0f64;
    for &n in ns {
        let h = recipe(n)?;
        let g = match &setup.rotation {
            Some(r) => r.rotate(&h),
            None => h,
        };
        let conj = conjugate_by_diag_power(&g, n, setup.level)?;
        let det1 = &conj.det() - &Ext::one(conj.tower());
        let e = conj.tower().e_index() as f64;
        ceiling = ceiling.min(precision_units(&conj) - SLACK as f64 * e);
        radius = radius.max(-conj.e.iter().map(dv).fold(f64::INFINITY, f64::min));
        records.push(NRecord {
            n,
            entries: conj.to_strings(),
            defect_to_limit_group: limit_membership_defect(&conj, &setup.limit_group),
            defect_to_target: setup.target.as_ref().map(|t| entrywise_defect(&conj, t)),
            sl_defect: dv(&det1),
        });
    }
    let tracked: Vec<(f64, f64)> = records
        .iter()
        .map(|r| {
            (
                r.n as f64,
                r.defect_to_target.unwrap_or(r.defect_to_limit_group),
            )
        })
        .collect();
    let live: Vec<(f64, f64)> = tracked.iter().copied().filter(|p| p.1 < ceiling).collect();
    let saturated = tracked.len() - live.len();
    let fit = fit_slope(&live);
    let c = records
        .iter()
        .filter(|r| r.defect_to_limit_group.is_finite())
        .map(|r| 2.0 * r.n as f64 - r.defect_to_limit_group)
        .fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))));
    let capped: Vec<f64> = tracked
        .iter()
        .map(|p| if p.1 >= ceiling { f64::INFINITY } else { p.1 })
        .collect();
    let non_decreasing = capped.windows(2).all(|w| w[1] >= w[0]);
    let min_step = live
        .windows(2)
        .map(|w| w[1].1 - w[0].1)
        .fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.min(x))));
    Ok(ConvergenceReport {
        records,
        slope: fit.map(|f| f.0),
        intercept: fit.map(|f| f.1),
        c,
        radius,
        non_decreasing,
        min_step,
        saturated,
        target_upper: setup.target.as_ref().map(|t| weyl_flip(t).to_strings()),
    })
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SweepReport {
    pub drawn: usize,
    pub bounded: usize,
    pub violations: usize,
    /// min over bounded conjugates of defect - (2n - c)
    pub worst_margin: Option<f64>,
}

/// Condition 2 at desk scale: elements of SL(2,F) whose rotated D^n-conjugates stay in the ball
/// {min entry valuation >= -radius} must be within 2n - c of the limit group. c and the radius
/// belong together: pass the constant fitted on recipe runs whose conjugates stay in that ball. Candidates are
/// recipe outputs whose free parameters (b, C1, C2) are redrawn and perturbed at scale w^n, plus
/// plain random elements of SL(2,F), which are rarely bounded for large n.
#[allow(clippy::too_many_arguments)]
pub fn condition2_sweep<R: Rng + ?Sized>(
    tower: &'static Tower,
    rotation: &RotationContext,
    ns: &[i64],
    c: f64,
    samples: usize,
    radius: i64,
    rng: &mut R,
) -> Result<SweepReport, ChabautyError> {
    let ctx = tower.ctx;
    let unram = tower.e_index() == 1;
    let mut rep = SweepReport::default();
    let check = |n: i64, h: &Mat2, rep: &mut SweepReport| -> Result<(), ChabautyError> {
        rep.drawn += 1;
        let conj = conjugate_by_diag_power(&rotation.rotate(h), n, Level::E)?;
        let size = conj.e.iter().map(dv).fold(f64::INFINITY, f64::min);
        if size < -(radius as f64) {
            return Ok(());
        }
        rep.bounded += 1;
        let d = limit_membership_defect(&conj, &super::LimitGroupDescriptor::LowerTriangularNorm1);
        let margin = d - (2.0 * n as f64 - c);
        if margin < 0.0 {
            rep.violations += 1;
        }
        if margin.is_finite() {
            rep.worst_margin = Some(rep.worst_margin.map_or(margin, |m: f64| m.min(margin)));
        }
        Ok(())
    };
    for _ in 0..samples {
        let n = ns[rng.gen_range(0..ns.len())];
        let b = if unram {
            Padic::random_exact(ctx, rng, 1, 2, 3)
        } else {
            Padic::random_exact(ctx, rng, 0, 2, 3)
        };
        let c1 =
            &Padic::random_exact(ctx, rng, 0, 1, 3) + &Padic::random_exact(ctx, rng, n, n + 1, 2);
        let c2 =
            &Padic::random_exact(ctx, rng, 0, 1, 3) + &Padic::random_exact(ctx, rng, n, n + 1, 2);
        let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
        let t = LimitTarget::new(tower, b, Ext::new_e(tower, c1, c2), sign)?;
        let h = limit_sequence_for_target(&t, n)?;
        check(n, &h, &mut rep)?;
        let h = random_sl2(Tower::qp(ctx), Level::Qp, rng, 3);
        let h = h.map(|x| x.in_tower(tower));
        check(n, &h, &mut rep)?;
    }
    Ok(rep)
}
