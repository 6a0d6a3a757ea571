use std::fmt;

use num_traits::Signed;
use serde::Serialize;

use super::{hensel_root, Ext, ExtKind, Level, Padic, PadicError, PrimeContext, Tower};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ClassLabel {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "w")]
    Omega,
    #[serde(rename = "S")]
    S,
    #[serde(rename = "Sw")]
    SOmega,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 4] = [
        ClassLabel::One,
        ClassLabel::Omega,
        ClassLabel::S,
        ClassLabel::SOmega,
    ];

    /// Fixed representative in {1, p, S, Sp}.
    pub fn representative(self, ctx: &'static PrimeContext) -> Padic {
        let (p, s) = (ctx.p as i64, ctx.s as i64);
        Padic::from_i64(
            ctx,
            match self {
                ClassLabel::One => 1,
                ClassLabel::Omega => p,
                ClassLabel::S => s,
                ClassLabel::SOmega => s * p,
            },
        )
    }

    pub fn from_parts(vparity: u8, unit_qr: bool) -> ClassLabel {
        match (vparity, unit_qr) {
            (0, true) => ClassLabel::One,
            (1, true) => ClassLabel::Omega,
            (0, false) => ClassLabel::S,
            _ => ClassLabel::SOmega,
        }
    }

    /// Product of classes.
    pub fn times(self, o: ClassLabel) -> ClassLabel {
        let (a, b) = (self.parts(), o.parts());
        ClassLabel::from_parts((a.0 + b.0) % 2, a.1 == b.1)
    }

    fn parts(self) -> (u8, bool) {
        match self {
            ClassLabel::One => (0, true),
            ClassLabel::Omega => (1, true),
            ClassLabel::S => (0, false),
            ClassLabel::SOmega => (1, false),
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassLabel::One => "1",
            ClassLabel::Omega => "w",
            ClassLabel::S => "S",
            ClassLabel::SOmega => "Sw",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SquareClass {
    pub vparity: u8,
    pub unit_qr: bool,
    pub label: ClassLabel,
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)
    }
}

/// Class of x in Q_p^* / (Q_p^*)^2.
pub fn square_class(x: &Padic) -> Result<SquareClass, PadicError> {
    let v = x.local_valuation().ok_or(PadicError::ZeroHasNoClass)?;
    let r = x.residue().unwrap();
    let vparity = v.rem_euclid(2) as u8;
    let unit_qr = x.ctx().is_qr(r);
    Ok(SquareClass {
        vparity,
        unit_qr,
        label: ClassLabel::from_parts(vparity, unit_qr),
    })
}

fn sqrt_qp(x: &Padic) -> Result<Padic, PadicError> {
    let ctx = x.ctx();
    if x.is_exact_zero() {
        return Ok(x.clone());
    }
    if x.is_zero() {
        return Ok(Padic::big_o(ctx, x.val_bound().div_euclid(2)));
    }
    let cls = square_class(x)?;
    if cls.label != ClassLabel::One {
        return Err(PadicError::NonSquare(cls));
    }
    let v = x.local_valuation().unwrap();
    let u = x.unit_part().unwrap();
    let r0 = ctx.residue_sqrt(x.residue().unwrap()).unwrap();
    if x.is_exact() && u.is_positive() {
        let r = u.sqrt();
        if &(&r * &r) == u {
            let r = if super::residue_u32(&r, ctx.p) == r0 {
                r
            } else {
                -r
            };
            return Ok(Padic::from_bigint(ctx, r).shift(v / 2));
        }
    }
    let m = x.rel_prec().unwrap_or(ctx.n);
    let unit = Padic::from_parts(ctx, 0, u.clone(), m);
    let tw = Tower::qp(ctx);
    let f = [Ext::from_padic(tw, -unit), Ext::zero(tw), Ext::one(tw)];
    let root = hensel_root(&f, &Ext::from_i64(tw, r0 as i64))?;
    Ok(root.coord(0).shift(v / 2))
}

fn sqrt_e(x: &Ext) -> Result<Ext, PadicError> {
    let tw = x.tower();
    let ctx = tw.ctx;
    if let Some(q) = x.as_padic() {
        if x.is_zero() {
            return Ok(Ext::from_padic(tw, sqrt_qp(q)?).at_level(Level::E));
        }
        let cls = square_class(q)?;
        if cls.label == ClassLabel::One {
            return Ok(Ext::from_padic(tw, sqrt_qp(q)?).at_level(Level::E));
        }
        if ExtKind::for_class(cls.label) == tw.kind() {
            let r = sqrt_qp(&q.div(tw.s())?)?;
            return Ok(&Ext::alpha(tw) * &Ext::from_padic(tw, r));
        }
        return Err(PadicError::NonSquareInE);
    }
    let k = x.local_valuation().unwrap();
    if k % 2 != 0 {
        return Err(PadicError::NonSquareInE);
    }
    let w = Ext::uniformizer(tw, Level::E);
    let unit = x.div(&w.powi(k)?)?;
    let p = ctx.p as i64;
    let residue = |c: &Padic| -> i64 {
        c.trunc_below(1)
            .ok()
            .and_then(|t| t.as_exact_integer())
            .map_or(0, |b| i64::try_from(b).unwrap())
    };
    let (a0, b0) = (residue(unit.coord(0)), residue(unit.coord(1)));
    let s = ctx.s as i64;
    let start = if tw.e_index() == 1 {
        // residue field F_p[alpha] with alpha^2 = S
        (0..p * p).map(|i| (i / p, i % p)).find(|&(r0, r1)| {
            (r0 * r0 + s * r1 * r1 - a0).rem_euclid(p) == 0 && (2 * r0 * r1 - b0).rem_euclid(p) == 0
        })
    } else {
        ctx.residue_sqrt(a0 as u32).map(|r| (r as i64, 0))
    };
    let (r0, r1) = start.ok_or(PadicError::NonSquareInE)?;
    let a = Ext::new_e(tw, Padic::from_i64(ctx, r0), Padic::from_i64(ctx, r1));
    let f = [-unit, Ext::zero(tw), Ext::one(tw)];
    let root = hensel_root(&f, &a)?;
    Ok(&root * &w.powi(k / 2)?)
}

/// Square root at level Q_p or E. The branch at Q_p has unit residue in [1, (p-1)/2].
pub fn sqrt(x: &Ext) -> Result<Ext, PadicError> {
    match x.level() {
        Level::Qp => Ok(Ext::from_padic(x.tower(), sqrt_qp(x.coord(0))?)),
        Level::E => sqrt_e(x),
        Level::K => Err(PadicError::UnsupportedLevel(Level::K)),
    }
}

/// Square root of x in Q_p, adjoining beta to `tower` when x is not a square in E. The new beta
/// squares to the representative of x's class in {S, p, Sp}.
pub fn sqrt_in_tower(x: &Padic, tower: &'static Tower) -> Result<Ext, PadicError> {
    let ctx = tower.ctx;
    let cls = square_class(x)?;
    if cls.label == ClassLabel::One {
        return Ok(Ext::from_padic(tower, sqrt_qp(x)?));
    }
    let kind = tower
        .kind()
        .ok_or_else(|| PadicError::LevelMismatch("tower has no alpha".into()))?;
    if ExtKind::for_class(cls.label) == Some(kind) {
        let r = sqrt_qp(&x.div(tower.s())?)?;
        return Ok(&Ext::alpha(tower) * &Ext::from_padic(tower, r));
    }
    let tower = match &tower.t {
        Some(_) => tower,
        None => Tower::k(ctx, kind, cls.label.representative(ctx))?,
    };
    let t = tower.t.as_ref().unwrap();
    let tcls = square_class(t)?.label;
    if tcls == cls.label {
        let r = sqrt_qp(&x.div(t)?)?;
        return Ok(&Ext::beta(tower) * &Ext::from_padic(tower, r));
    }
    // remaining class is that of s t
    let st = tower.s() * t;
    let r = sqrt_qp(&x.div(&st)?)?;
    Ok(&(&Ext::alpha(tower) * &Ext::beta(tower)) * &Ext::from_padic(tower, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn ctx5() -> &'static PrimeContext {
        PrimeContext::get(5, 40).unwrap()
    }

    #[test]
    fn test_square_class_examples() {
        let c = ctx5();
        assert_eq!(
            square_class(&Padic::from_i64(c, 1)).unwrap().label,
            ClassLabel::One
        );
        assert_eq!(
            square_class(&Padic::from_i64(c, 2)).unwrap().label,
            ClassLabel::S
        );
        assert_eq!(
            square_class(&Padic::from_i64(c, 50)).unwrap().label,
            ClassLabel::S
        );
        assert_eq!(
            square_class(&Padic::from_i64(c, 10)).unwrap().label,
            ClassLabel::SOmega
        );
        assert_eq!(
            square_class(&Padic::zero(c)),
            Err(PadicError::ZeroHasNoClass)
        );
    }

    #[test]
    fn test_sqrt_examples() {
        let c = ctx5();
        let tw = Tower::qp(c);
        let r = sqrt(&Ext::from_i64(tw, 4)).unwrap();
        assert_eq!(r, Ext::from_i64(tw, 2));
        assert!(matches!(
            sqrt(&Ext::from_i64(tw, 5)),
            Err(PadicError::NonSquare(SquareClass { vparity: 1, .. }))
        ));
        let r = sqrt(&Ext::from_i64(tw, 6)).unwrap();
        let t = r
            .coord(0)
            .trunc_below(2)
            .unwrap()
            .as_exact_integer()
            .unwrap();
        assert_eq!(t, BigInt::from(16));
    }

    #[test]
    fn test_sqrt_in_e() {
        let c = PrimeContext::get(7, 30).unwrap();
        for kind in ExtKind::ALL {
            let tw = Tower::e(c, kind);
            for (a, b) in [(1, 1), (3, 2), (0, 1), (5, 0), (2, 0), (3, 0)] {
                let y = Ext::new_e(tw, Padic::from_i64(c, a), Padic::from_i64(c, b));
                let x = &y * &y;
                let r = sqrt(&x).unwrap();
                assert!((&(&r * &r) - &x).is_zero(), "{kind:?} sqrt({x}) = {r}");
            }
        }
    }

    #[test]
    fn test_sqrt_in_tower_extends() {
        let c = ctx5();
        let tw = Tower::e(c, ExtKind::Unramified);
        for x in [4, 2, 8, 5, 10, 20, 45, -1, 3] {
            let xp = Padic::from_i64(c, x);
            let r = sqrt_in_tower(&xp, tw).unwrap();
            let sq = &r * &r;
            assert!(
                (&sq - &Ext::from_padic(r.tower(), xp)).is_zero(),
                "sqrt({x}) = {r}"
            );
        }
        let r = sqrt_in_tower(&Padic::from_i64(c, 5), tw).unwrap();
        assert_eq!(r.level(), Level::K);
    }
}
