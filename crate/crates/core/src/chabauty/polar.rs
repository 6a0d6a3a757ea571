use serde::Serialize;

use super::ChabautyError;
use crate::bttree::{act_vertex, distance, TreeVertex};
use crate::padic::{sqrt, Ext, Level, Padic, PrimeContext, Tower};
use crate::sl2::Mat2;

/// The two pairs (G, H) with finitely many H-orbits on the boundary outside that of T_H.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PolarPair {
    /// G = SL(2,E), H = SL(2,F); V is one edge of T_F (two edges of T_E when E is ramified).
    SlESlF,
    /// G = SL(2,F), H = H_theta_1 = C Diag C^-1 with C = [[1, -1], [1, 1]]; T_H is the line
    /// between [1 : 1] and [1 : -1] and V one of its edges.
    SlFHTheta1,
}

/// g = k a_i^n h with h in H, a_i one of the fixed hyperbolic elements (i = None when n = 0 and
/// no a_i is needed) and k moving x0 by at most diam(V).
#[derive(Clone, Debug)]
pub struct PolarDecomposition {
    pub k: Mat2,
    pub i: Option<usize>,
    pub n: i64,
    pub h: Mat2,
    pub pair: PolarPair,
    /// d(x0, k x0)
    pub displacement: i64,
    /// relative defect of k a_i^n h against g, capped at the precision of g
    pub reconstruction_defect: f64,
}

/// The data of one pair, in a working frame where H is SL(2,F) or the diagonal torus.
///
/// Orbit representatives: after H moves the projection of g^-1 x0 into V, the end beyond it is
/// [X : 1] with X = alpha p^j r (first pair) or X = p^j r (second pair), j in {0, 1} and r in
/// {1, S} (j = 0 only when E is ramified); index i = 2 j + [r = S]. a_i = [[w, X (1/w - w)], [0, 1/w]] translates by 2 along the
/// line from [1 : 0] through [X : 1], attracting towards [X : 1].
#[derive(Clone, Debug)]
pub struct PolarContext {
    pub pair: PolarPair,
    /// the caller's precision
    tower: &'static Tower,
    /// the same tower at the working precision 2N + 16, enough to absorb the cancellation in
    /// k a_i^n h when h and a_i^n are large
    work: &'static Tower,
    level: Level,
    xs: Vec<Ext>,
    conj: Option<(Mat2, Mat2)>,
    pub diam: i64,
}

impl PolarContext {
    /// `tower` must carry E for the first pair; the second pair works over Q_p of its prime.
    pub fn new(pair: PolarPair, tower: &'static Tower) -> Result<PolarContext, ChabautyError> {
        let wctx = PrimeContext::get(tower.ctx.p, 2 * tower.ctx.n + 16)?;
        let (caller, level) = match pair {
            PolarPair::SlESlF => {
                if tower.kind().is_none() {
                    return Err(ChabautyError::Precondition(
                        "SL(2,E) needs a quadratic extension".into(),
                    ));
                }
                (tower.e_tower(), Level::E)
            }
            PolarPair::SlFHTheta1 => (Tower::qp(tower.ctx), Level::Qp),
        };
        let tower = caller.with_ctx(wctx);
        let ctx = wctx;
        // a ramified branch always leaves T_F at an edge midpoint, so only j = 0 occurs there
        let depths = if pair == PolarPair::SlESlF && tower.e_index() == 2 {
            1
        } else {
            2
        };
        let mut xs = Vec::with_capacity(4);
        for j in 0..depths {
            for r in [1, ctx.s as i64] {
                let x = Ext::from_padic(tower, Padic::from_i64(ctx, r).shift(j));
                xs.push(if pair == PolarPair::SlESlF {
                    &Ext::alpha(tower) * &x
                } else {
                    x
                });
            }
        }
        let conj = (pair == PolarPair::SlFHTheta1).then(|| {
            let c = Mat2::from_i64(tower, [[1, -1], [1, 1]]);
            let ci = c.inv().expect("det 2 is a unit");
            (c, ci)
        });
        let diam = if pair == PolarPair::SlESlF {
            tower.e_index() as i64
        } else {
            1
        };
        Ok(PolarContext {
            pair,
            tower: caller,
            work: tower,
            level,
            xs,
            conj,
            diam,
        })
    }

    pub fn tower(&self) -> &'static Tower {
        self.tower
    }

    /// The tower the factors of a decomposition live in.
    pub fn work_tower(&self) -> &'static Tower {
        self.work
    }

    pub fn orbit_count(&self) -> usize {
        self.xs.len()
    }

    /// a_i^n in the working frame, in closed form: [[w^n, X (w^-n - w^n)], [0, w^-n]].
    fn a_pow_local(&self, i: usize, n: i64) -> Mat2 {
        let w = Ext::uniformizer(self.work, self.level);
        let up = w.powi(n).unwrap();
        let down = w.powi(-n).unwrap();
        let x = &self.xs[i] * &(&down - &up);
        Mat2::new(up, x, Ext::zero(self.work), down)
    }

    fn to_g(&self, m: &Mat2) -> Mat2 {
        match &self.conj {
            Some((c, ci)) => c.mul(m).mul(ci),
            None => m.clone(),
        }
    }

    fn to_local(&self, m: &Mat2) -> Mat2 {
        match &self.conj {
            Some((c, ci)) => ci.mul(m).mul(c),
            None => m.clone(),
        }
    }

    /// a_i^n as an element of G, at the working precision.
    pub fn a_pow_work(&self, i: usize, n: i64) -> Mat2 {
        self.to_g(&self.a_pow_local(i, n))
    }

    /// a_i^n as an element of G, at the caller's precision.
    pub fn a_pow(&self, i: usize, n: i64) -> Mat2 {
        self.a_pow_work(i, n).map(|x| x.recontext(self.tower.ctx))
    }

    /// The attracting end [X_i : 1] of a_i in the working frame, as a string for reports.
    pub fn label(&self, i: usize) -> String {
        format!("[{} : 1]", self.xs[i])
    }
}

fn diag_p(tower: &'static Tower, m: i64) -> Mat2 {
    let ctx = tower.ctx;
    Mat2::diag(
        Ext::from_padic(tower, Padic::p_pow(ctx, -m)),
        Ext::from_padic(tower, Padic::p_pow(ctx, m)),
    )
}

/// Decomposes g following the fundamental-domain argument: move the projection of g^-1 x0 onto
/// T_H into V by an element of H, turn the branch leaving T_H onto one of the fixed rays with a
/// diagonal unit of H, then strip the power of a_i that walks back along the ray.
pub fn polar_decompose(pc: &PolarContext, g: &Mat2) -> Result<PolarDecomposition, ChabautyError> {
    let tw = pc.work;
    let ctx = tw.ctx;
    let base = TreeVertex::base(tw, pc.level);
    // the unknown digits of g are read as zeros; the factors then reproduce g to all its digits
    let glift = g.map(|x| x.lift_exact(ctx).in_tower(tw));
    let gl = pc.to_local(&glift);
    let ginv = gl.inv_sl();
    let w = act_vertex(&ginv, &base)?;
    let e = match pc.pair {
        PolarPair::SlESlF => tw.e_index() as i64,
        PolarPair::SlFHTheta1 => 1,
    };
    // the coordinate whose vanishing means membership in T_H, after H has cleared the rest
    let (mut h, y) = match pc.pair {
        PolarPair::SlESlF => (
            Mat2::upper(tw, Ext::from_padic(tw, -w.u.coord(0))),
            w.u.coord(1).clone(),
        ),
        PolarPair::SlFHTheta1 => (Mat2::identity(tw), w.u.coord(0).clone()),
    };
    let mut index = None;
    let mut steps = 0;
    if y.is_zero() {
        match pc.pair {
            PolarPair::SlESlF => {
                // shift k into [-e, e) by p^2 steps, then reflect into [0, e]
                let m = (w.k + e).div_euclid(2 * e);
                h = diag_p(tw, m).mul(&h);
                if w.k - 2 * e * m < 0 {
                    h = Mat2::from_i64(tw, [[0, 1], [-1, 0]]).mul(&h);
                }
            }
            PolarPair::SlFHTheta1 => {
                h = diag_p(tw, w.k.div_euclid(2)).mul(&h);
            }
        }
    } else {
        let mut jv = y.local_valuation().expect("nonzero");
        let mut m = jv.div_euclid(2);
        h = diag_p(tw, m).mul(&h);
        let mut y = y.shift(-2 * m);
        jv -= 2 * m;
        if pc.pair == PolarPair::SlESlF && e == 2 && jv == 1 {
            // the branch leaves T_F at the midpoint of the edge from (2,0) to (4,0); the
            // type-preserving reflection diag(p, 1/p) w brings that edge back onto V
            h = diag_p(tw, -1)
                .mul(&Mat2::from_i64(tw, [[0, 1], [-1, 0]]))
                .mul(&h);
            let w2 = act_vertex(&h.mul(&ginv), &base)?;
            h = Mat2::upper(tw, Ext::from_padic(tw, -w2.u.coord(0))).mul(&h);
            let w3 = act_vertex(&h.mul(&ginv), &base)?;
            y = w3.u.coord(1).clone();
            jv = y
                .local_valuation()
                .expect("reflection keeps the branch off T_F");
            m = jv.div_euclid(2);
            h = diag_p(tw, m).mul(&h);
            y = y.shift(-2 * m);
            jv -= 2 * m;
        }
        let unit = y.shift(-jv);
        let qr = ctx.is_qr(unit.residue().expect("unit"));
        let r = if qr {
            Padic::one(ctx)
        } else {
            Padic::from_i64(ctx, ctx.s as i64)
        };
        // diag(eps, 1/eps) multiplies u by eps^2 = r / unit
        let eps = sqrt(&Ext::from_padic(Tower::qp(ctx), r.div(&unit)?))?;
        let eps = eps.in_tower(tw);
        h = Mat2::diag(eps.clone(), eps.inv()?).mul(&h);
        let i = 2 * jv as usize + usize::from(!qr);
        let w1 = act_vertex(&h.mul(&ginv), &base)?;
        steps = w1.k.div_euclid(2);
        index = Some(i);
    }
    let kinv = match index {
        Some(i) => pc.a_pow_local(i, -steps).mul(&h).mul(&ginv),
        None => h.mul(&ginv),
    };
    let displacement = distance(&base, &act_vertex(&kinv, &base)?);
    if displacement > pc.diam {
        return Err(ChabautyError::DecompositionSearchExhausted(format!(
            "g^-1 x0 = {w}: reduced vertex still {displacement} from x0 (orbit {index:?}, power {steps})"
        )));
    }
    let k = pc.to_g(&kinv.inv_sl());
    let hg = pc.to_g(&h);
    let n = -steps;
    let rebuilt = match index {
        Some(i) => k.mul(&pc.a_pow_work(i, n)).mul(&hg),
        None => k.mul(&hg),
    };
    let reconstruction_defect = rebuilt.rel_defect(&glift).min(g.precision() as f64);
    Ok(PolarDecomposition {
        k,
        i: index,
        n,
        h: hg,
        pair: pc.pair,
        displacement,
        reconstruction_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bttree::{hyperbolic_data, Hyperbolic};
    use crate::padic::{ExtKind, PrimeContext};
    use crate::sl2::{fixed_point_test, random_sl2, Involution};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx() -> &'static PrimeContext {
        PrimeContext::get(5, 40).unwrap()
    }

    fn in_h(pc: &PolarContext, h: &Mat2) -> bool {
        match pc.pair {
            PolarPair::SlESlF => h.e.iter().all(|x| x.coord(1).is_zero()),
            PolarPair::SlFHTheta1 => {
                let th = Involution::f2(h.tower(), Padic::one(h.tower().ctx)).unwrap();
                fixed_point_test(&th, h).unwrap().0
            }
        }
    }

    #[test]
    fn test_identity() {
        let e = Tower::e(ctx(), ExtKind::Unramified);
        for pair in [PolarPair::SlESlF, PolarPair::SlFHTheta1] {
            let pc = PolarContext::new(pair, e).unwrap();
            let d = polar_decompose(&pc, &Mat2::identity(pc.tower())).unwrap();
            let id = Mat2::identity(pc.work_tower());
            assert_eq!((d.i, d.n, d.displacement), (None, 0, 0));
            assert!(d.k.approx_eq(&id, 0) && d.h.approx_eq(&id, 0));
        }
    }

    #[test]
    fn test_generators_are_hyperbolic_of_length_two() {
        for kind in ExtKind::ALL {
            let pc = PolarContext::new(PolarPair::SlESlF, Tower::e(ctx(), kind)).unwrap();
            for i in 0..pc.orbit_count() {
                let Hyperbolic::Hyperbolic { length, .. } =
                    hyperbolic_data(&pc.a_pow(i, 1)).unwrap()
                else {
                    panic!()
                };
                assert_eq!(length, 2);
                assert!(pc
                    .a_pow(i, 3)
                    .approx_eq(&pc.a_pow(i, 1).mul(&pc.a_pow(i, 1)).mul(&pc.a_pow(i, 1)), 0));
            }
        }
    }

    #[test]
    fn test_subgroup_elements_need_no_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for kind in ExtKind::ALL {
            let e = Tower::e(ctx(), kind);
            let pc = PolarContext::new(PolarPair::SlESlF, e).unwrap();
            for _ in 0..20 {
                let g = random_sl2(e, Level::Qp, &mut rng, 4);
                let d = polar_decompose(&pc, &g).unwrap();
                assert_eq!(d.n, 0);
                assert!(d.displacement <= pc.diam);
            }
        }
    }

    #[test]
    fn test_recovers_the_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for kind in ExtKind::ALL {
            let e = Tower::e(ctx(), kind);
            let pc = PolarContext::new(PolarPair::SlESlF, e).unwrap();
            for i in 0..pc.orbit_count() {
                for m in 2..4 {
                    let h0 = random_sl2(e, Level::Qp, &mut rng, 3);
                    let g = pc.a_pow(i, -m).mul(&h0);
                    let d = polar_decompose(&pc, &g).unwrap();
                    // r may change within an orbit of H, the depth parity j may not
                    assert_eq!(
                        (d.i.map(|x| x / 2), d.n),
                        (Some(i / 2), -m),
                        "{kind:?} i={i} m={m}"
                    );
                }
            }
        }
    }

    #[test]
    fn test_random_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for kind in ExtKind::ALL {
            let e = Tower::e(ctx(), kind);
            for pair in [PolarPair::SlESlF, PolarPair::SlFHTheta1] {
                let pc = PolarContext::new(pair, e).unwrap();
                let level = if pair == PolarPair::SlESlF {
                    Level::E
                } else {
                    Level::Qp
                };
                for _ in 0..40 {
                    let g = random_sl2(pc.tower(), level, &mut rng, 5);
                    let d = polar_decompose(&pc, &g).unwrap();
                    assert!(
                        d.reconstruction_defect >= 36.0,
                        "{pair:?} {kind:?}: {}",
                        d.reconstruction_defect
                    );
                    assert!(d.displacement <= pc.diam);
                    assert!(in_h(&pc, &d.h), "{pair:?}: h = {}", d.h);
                }
            }
        }
    }
}
