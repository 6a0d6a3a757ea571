use rand::Rng;
use serde::Serialize;

use super::{random_sl2, Mat2, Sl2Error, SLACK};
use crate::padic::{Ext, Level, Padic, PadicError, Tower};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Gamma {
    Identity,
    Sigma,
}

/// Parameters of the three families theta = iota_A o gamma.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// A = [[z, y], [1, -sigma(z)]] with gamma = sigma, z sigma(z) + y != 0.
    F1A { z: Ext, y: Padic },
    /// A = diag(x, 1) with gamma = sigma, x sigma(x) = 1.
    F1B { x: Ext },
    /// A = [[0, 1], [a, 0]] with gamma = id.
    F2 { a: Padic },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::F1A { .. } => "F1A",
            Family::F1B { .. } => "F1B",
            Family::F2 { .. } => "F2",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Involution {
    pub gamma: Gamma,
    pub a: Mat2,
    a_inv: Mat2,
    pub family: Family,
    /// A gamma(A) = q Id
    pub q: Ext,
    loss: u32,
}

impl Involution {
    fn build(gamma: Gamma, a: Mat2, family: Family) -> Result<Involution, Sl2Error> {
        let a_inv = a.inv()?;
        let ga = if gamma == Gamma::Sigma {
            a.sigma()
        } else {
            a.clone()
        };
        let q = a.mul(&ga).e[0].clone();
        let loss = (a.det().valuation() - 2.0 * a.defect()).max(0.0).ceil() as u32;
        Ok(Involution {
            gamma,
            a,
            a_inv,
            family,
            q,
            loss,
        })
    }

    /// theta_a = iota_[[0,1],[a,0]]; `tower` fixes the field the matrices live over.
    pub fn f2(tower: &'static Tower, a: Padic) -> Result<Involution, Sl2Error> {
        if a.is_zero() {
            return Err(Sl2Error::Precondition("a must be nonzero".into()));
        }
        let t = tower;
        let m = Mat2::new(
            Ext::zero(t),
            Ext::one(t),
            Ext::from_padic(t, a.clone()),
            Ext::zero(t),
        );
        Involution::build(Gamma::Identity, m, Family::F2 { a })
    }

    pub fn f1a(z: Ext, y: Padic) -> Result<Involution, Sl2Error> {
        let t = z.tower();
        if t.ext.is_none() || z.level() == Level::K {
            return Err(Sl2Error::Precondition("z must lie in E".into()));
        }
        let z = z.at_level(Level::E);
        let q = &(&z * &z.sigma()) + &Ext::from_padic(t, y.clone());
        if q.is_zero() {
            return Err(Sl2Error::Precondition("z sigma(z) + y vanishes".into()));
        }
        let m = Mat2::new(
            z.clone(),
            Ext::from_padic(t, y.clone()),
            Ext::one(t),
            -z.sigma(),
        );
        Involution::build(Gamma::Sigma, m, Family::F1A { z, y })
    }

    pub fn f1b(x: Ext) -> Result<Involution, Sl2Error> {
        let t = x.tower();
        if t.ext.is_none() || x.level() == Level::K {
            return Err(Sl2Error::Precondition("x must lie in E".into()));
        }
        let x = x.at_level(Level::E);
        let n = &x.norm_to_qp() - &Padic::one(t.ctx);
        if !n.is_zero() {
            return Err(Sl2Error::Precondition(format!(
                "x sigma(x) = 1 fails for x = {x}"
            )));
        }
        let m = Mat2::diag(x.clone(), Ext::one(t));
        Involution::build(Gamma::Sigma, m, Family::F1B { x })
    }

    /// The plain Galois involution sigma (A = Id).
    pub fn sigma(tower: &'static Tower) -> Involution {
        Involution::f1b(Ext::one(tower).at_level(Level::E)).expect("x = 1 has norm 1")
    }

    /// Digits iota_A can destroy: v(det A) - 2 min v(A_ij). A perturbation of g of size p^k
    /// comes out of A g A^-1 as large as p^(k - loss), so equality tests after applying theta
    /// are made this much coarser.
    pub fn precision_loss(&self) -> u32 {
        self.loss
    }

    pub fn a_inv(&self) -> &Mat2 {
        &self.a_inv
    }

    pub fn gamma_of(&self, g: &Mat2) -> Mat2 {
        match self.gamma {
            Gamma::Identity => g.clone(),
            Gamma::Sigma => g.sigma(),
        }
    }

    /// Level of the group the involution acts on.
    pub fn level(&self) -> Level {
        match self.gamma {
            Gamma::Sigma => Level::E,
            Gamma::Identity => self.a.tower().top_level().min(Level::E),
        }
    }

    pub fn tower(&self) -> &'static Tower {
        self.a.tower()
    }
}

/// A gamma(g) A^-1
pub fn apply_involution(theta: &Involution, g: &Mat2) -> Result<Mat2, Sl2Error> {
    if !Tower::compatible(theta.tower(), g.tower()) {
        return Err(PadicError::LevelMismatch(
            "matrix and involution live over different fields".into(),
        )
        .into());
    }
    Ok(theta.a.mul(&theta.gamma_of(g)).mul(&theta.a_inv))
}

/// Checks A gamma(A) = q Id and theta^2 = Id on ten random group elements; returns q.
pub fn verify_involution<R: Rng + ?Sized>(
    theta: &Involution,
    rng: &mut R,
) -> Result<Ext, Sl2Error> {
    let ga = theta.a.mul(&theta.gamma_of(&theta.a));
    let qi = Mat2::diag(theta.q.clone(), theta.q.clone());
    let r = ga.rel_defect(&qi);
    if r < (ga.precision() - SLACK) as f64 {
        return Err(Sl2Error::NotAnInvolution(r));
    }
    for _ in 0..10 {
        let g = random_sl2(theta.tower(), theta.level(), rng, 4);
        let back = apply_involution(theta, &apply_involution(theta, &g)?)?;
        let r = back.rel_defect(&g);
        if r < tolerance(theta, &g, 2) {
            return Err(Sl2Error::NotAnInvolution(r));
        }
    }
    Ok(theta.q.clone())
}

/// Digits to demand after `times` applications of theta to g.
fn tolerance(theta: &Involution, g: &Mat2, times: u32) -> f64 {
    g.precision() as f64 - SLACK as f64 - (times * theta.loss) as f64
}

/// Whether theta(g) = g at precision, with the relative defect in p-digits.
pub fn fixed_point_test(theta: &Involution, g: &Mat2) -> Result<(bool, f64), Sl2Error> {
    let d = apply_involution(theta, g)?.rel_defect(g);
    Ok((d >= tolerance(theta, g, 1), d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{ExtKind, PrimeContext};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e5() -> &'static Tower {
        Tower::e(PrimeContext::get(5, 40).unwrap(), ExtKind::Unramified)
    }

    fn qp5() -> &'static Tower {
        Tower::qp(PrimeContext::get(5, 40).unwrap())
    }

    #[test]
    fn test_apply_examples() {
        let t = qp5();
        let th = Involution::f2(t, Padic::from_i64(t.ctx, 2)).unwrap();
        let id = Mat2::identity(t);
        assert!(apply_involution(&th, &id).unwrap().approx_eq(&id, 0));
        let th1 = Involution::f2(t, Padic::one(t.ctx)).unwrap();
        // conjugating by the swap [[0,1],[1,0]] sends w to w^-1, not to w
        let w = Mat2::from_i64(t, [[0, 1], [-1, 0]]);
        assert!(apply_involution(&th1, &w)
            .unwrap()
            .approx_eq(&w.inv_sl(), 0));
        let s = Involution::sigma(e5());
        let u = Mat2::upper(e5(), Ext::alpha(e5()));
        let expect = Mat2::upper(e5(), -Ext::alpha(e5()));
        assert!(apply_involution(&s, &u).unwrap().approx_eq(&expect, 0));
    }

    #[test]
    fn test_verify_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = e5();
        let ctx = t.ctx;
        let q = verify_involution(
            &Involution::f2(t, Padic::from_i64(ctx, 2)).unwrap(),
            &mut rng,
        )
        .unwrap();
        assert_eq!(q.as_padic().unwrap(), &Padic::from_i64(ctx, 2));
        let th = Involution::f1a(Ext::alpha(t), Padic::one(ctx)).unwrap();
        let q = verify_involution(&th, &mut rng).unwrap();
        assert_eq!(q.as_padic().unwrap(), &Padic::from_i64(ctx, -1));
        let q = verify_involution(&Involution::sigma(t), &mut rng).unwrap();
        assert_eq!(q.as_padic().unwrap(), &Padic::one(ctx));
    }

    #[test]
    fn test_fixed_point_examples() {
        let t = qp5();
        let th = Involution::f2(t, Padic::from_i64(t.ctx, 2)).unwrap();
        assert!(fixed_point_test(&th, &Mat2::identity(t)).unwrap().0);
        assert!(
            fixed_point_test(&th, &Mat2::from_i64(t, [[3, 2], [4, 3]]))
                .unwrap()
                .0
        );
        let (ok, d) = fixed_point_test(&th, &Mat2::from_i64(t, [[1, 1], [0, 1]])).unwrap();
        assert!(!ok);
        assert_eq!(d, 0.0);
    }

    #[test]
    fn test_constraints_enforced() {
        let t = e5();
        let ctx = t.ctx;
        // z = 1, y = -1 gives z sigma(z) + y = 0
        assert!(Involution::f1a(Ext::one(t), Padic::from_i64(ctx, -1)).is_err());
        assert!(Involution::f1b(Ext::from_i64(t, 2)).is_err());
        assert!(Involution::f2(t, Padic::zero(ctx)).is_err());
    }
}
