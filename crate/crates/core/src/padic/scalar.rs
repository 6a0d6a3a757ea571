use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use super::{residue_u32, PadicError, PrimeContext};

/// Relative precision marker for values known exactly.
pub const EXACT: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    /// `None` is the exact zero, `Some(k)` is O(p^k).
    Zero(Option<i64>),
    /// p^v * u with u a unit. When `m == EXACT`, `u` is a signed integer with |u| < p^N and the
    /// value is known exactly; otherwise `u` lies in [0, p^m) and only m digits are known.
    Unit { v: i64, u: BigInt, m: u32 },
}

/// An element of Q_p at fixed relative precision.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Padic {
    ctx: &'static PrimeContext,
    repr: Repr,
}

fn strip(ctx: &PrimeContext, mut u: BigInt) -> (i64, BigInt) {
    let p = BigInt::from(ctx.p);
    let mut t = 0;
    loop {
        let (q, r) = u.div_rem(&p);
        if !r.is_zero() {
            return (t, u);
        }
        u = q;
        t += 1;
    }
}

impl Padic {
    pub fn ctx(&self) -> &'static PrimeContext {
        self.ctx
    }

    pub fn zero(ctx: &'static PrimeContext) -> Padic {
        Padic {
            ctx,
            repr: Repr::Zero(None),
        }
    }

    /// O(p^k): zero to absolute precision k.
    pub fn big_o(ctx: &'static PrimeContext, k: i64) -> Padic {
        Padic {
            ctx,
            repr: Repr::Zero(Some(k)),
        }
    }

    pub fn one(ctx: &'static PrimeContext) -> Padic {
        Padic::from_i64(ctx, 1)
    }

    pub fn from_i64(ctx: &'static PrimeContext, x: i64) -> Padic {
        Padic::from_bigint(ctx, BigInt::from(x))
    }

    pub fn from_bigint(ctx: &'static PrimeContext, x: BigInt) -> Padic {
        if x.is_zero() {
            return Padic::zero(ctx);
        }
        let (v, u) = strip(ctx, x);
        Padic::exact_unit(ctx, v, u)
    }

    /// n / d as an element of Q_p.
    pub fn ratio(ctx: &'static PrimeContext, n: i64, d: i64) -> Padic {
        let d = Padic::from_i64(ctx, d);
        &Padic::from_i64(ctx, n) * &d.inv().expect("nonzero denominator")
    }

    /// The uniformizer p.
    pub fn p(ctx: &'static PrimeContext) -> Padic {
        Padic::from_i64(ctx, ctx.p as i64)
    }

    /// p^k, exact for any integer k.
    pub fn p_pow(ctx: &'static PrimeContext, k: i64) -> Padic {
        Padic {
            ctx,
            repr: Repr::Unit {
                v: k,
                u: BigInt::one(),
                m: EXACT,
            },
        }
    }

    /// p^v * u known to m digits. `u` must be a unit mod p.
    pub fn from_parts(ctx: &'static PrimeContext, v: i64, u: BigInt, m: u32) -> Padic {
        if m == EXACT {
            return Padic::exact_unit(ctx, v, u);
        }
        let m = m.min(ctx.n);
        assert!(m >= 1, "relative precision must be positive");
        let u = u.mod_floor(&ctx.pow(m));
        assert!(residue_u32(&u, ctx.p) != 0, "from_parts needs a unit");
        Padic {
            ctx,
            repr: Repr::Unit { v, u, m },
        }
    }

    /// Exact p^v * u with u a unit; falls back to N known digits when |u| grows past p^N.
    fn exact_unit(ctx: &'static PrimeContext, v: i64, u: BigInt) -> Padic {
        let pn = ctx.pow_ref(ctx.n);
        if u.abs() < *pn {
            Padic {
                ctx,
                repr: Repr::Unit { v, u, m: EXACT },
            }
        } else {
            let u = u.mod_floor(&pn);
            Padic {
                ctx,
                repr: Repr::Unit { v, u, m: ctx.n },
            }
        }
    }

    /// Builds p^v0 * s known to absolute precision `abs` (None = exact), normalizing s.
    fn from_sum(ctx: &'static PrimeContext, v0: i64, s: BigInt, abs: Option<i64>) -> Padic {
        if s.is_zero() {
            return match abs {
                None => Padic::zero(ctx),
                Some(a) => Padic::big_o(ctx, a),
            };
        }
        let (t, u) = strip(ctx, s);
        let v = v0 + t;
        match abs {
            None => Padic::exact_unit(ctx, v, u),
            Some(a) if a <= v => Padic::big_o(ctx, a),
            Some(a) => Padic::from_parts(ctx, v, u, (a - v).min(ctx.n as i64) as u32),
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero(None))
    }

    /// True when every known digit is zero (exact zero or O(p^k)).
    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero(_))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.repr, Repr::Zero(None) | Repr::Unit { m: EXACT, .. })
    }

    /// Valuation with v(p) = 1; +inf for exact zero, k for O(p^k).
    pub fn valuation(&self) -> f64 {
        match &self.repr {
            Repr::Zero(None) => f64::INFINITY,
            Repr::Zero(Some(k)) => *k as f64,
            Repr::Unit { v, .. } => *v as f64,
        }
    }

    /// Integer valuation of a nonzero scalar.
    pub fn local_valuation(&self) -> Option<i64> {
        match &self.repr {
            Repr::Unit { v, .. } => Some(*v),
            _ => None,
        }
    }

    /// Lower bound on the valuation as an integer; i64::MAX for the exact zero.
    pub fn val_bound(&self) -> i64 {
        match &self.repr {
            Repr::Zero(None) => i64::MAX,
            Repr::Zero(Some(k)) => *k,
            Repr::Unit { v, .. } => *v,
        }
    }

    /// Absolute precision; None when exact.
    pub fn abs_prec(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero(None) => None,
            Repr::Zero(Some(k)) => Some(*k),
            Repr::Unit { m: EXACT, .. } => None,
            Repr::Unit { v, m, .. } => Some(v + *m as i64),
        }
    }

    /// Known digits of a nonzero value; None when exact or zero.
    pub fn rel_prec(&self) -> Option<u32> {
        match &self.repr {
            Repr::Unit { m, .. } if *m != EXACT => Some(*m),
            _ => None,
        }
    }

    pub fn unit_part(&self) -> Option<&BigInt> {
        match &self.repr {
            Repr::Unit { u, .. } => Some(u),
            _ => None,
        }
    }

    /// Leading digit u mod p of a nonzero value.
    pub fn residue(&self) -> Option<u32> {
        self.unit_part().map(|u| residue_u32(u, self.ctx.p))
    }

    /// The exact integer this value equals, if it is one.
    pub fn as_exact_integer(&self) -> Option<BigInt> {
        match &self.repr {
            Repr::Zero(None) => Some(BigInt::zero()),
            Repr::Unit { v, u, m: EXACT } if *v >= 0 => Some(u * self.ctx.pow(*v as u32)),
            _ => None,
        }
    }

    pub fn neg(&self) -> Padic {
        let repr = match &self.repr {
            Repr::Zero(k) => Repr::Zero(*k),
            Repr::Unit { v, u, m: EXACT } => Repr::Unit {
                v: *v,
                u: -u,
                m: EXACT,
            },
            Repr::Unit { v, u, m } => Repr::Unit {
                v: *v,
                u: (self.ctx.pow(*m) - u).mod_floor(&self.ctx.pow(*m)),
                m: *m,
            },
        };
        Padic {
            ctx: self.ctx,
            repr,
        }
    }

    fn check_ctx(&self, o: &Padic) {
        assert!(
            self.ctx.same(o.ctx),
            "scalars from different prime contexts"
        );
    }

    pub fn add(&self, o: &Padic) -> Padic {
        self.check_ctx(o);
        let ctx = self.ctx;
        match (&self.repr, &o.repr) {
            (Repr::Zero(None), _) => o.clone(),
            (_, Repr::Zero(None)) => self.clone(),
            (Repr::Zero(Some(a)), Repr::Zero(Some(b))) => Padic::big_o(ctx, *a.min(b)),
            (Repr::Zero(Some(k)), Repr::Unit { .. }) => o.add_big_o(*k),
            (Repr::Unit { .. }, Repr::Zero(Some(k))) => self.add_big_o(*k),
            (
                Repr::Unit {
                    v: v1,
                    u: u1,
                    m: m1,
                },
                Repr::Unit {
                    v: v2,
                    u: u2,
                    m: m2,
                },
            ) => {
                let v0 = *v1.min(v2);
                let gap = (v1 - v2).unsigned_abs();
                if *m1 == EXACT && *m2 == EXACT {
                    if gap >= ctx.n as u64 {
                        // result is a unit at v0 with more than N digits: keep the low digits
                        let low = if v1 < v2 { u1 } else { u2 };
                        return Padic::from_parts(ctx, v0, low.clone(), ctx.n);
                    }
                    let s = u1 * ctx.pow_ref((v1 - v0) as u32).as_ref()
                        + u2 * ctx.pow_ref((v2 - v0) as u32).as_ref();
                    return Padic::from_sum(ctx, v0, s, None);
                }
                let abs = self
                    .abs_prec()
                    .unwrap_or(i64::MAX)
                    .min(o.abs_prec().unwrap_or(i64::MAX));
                let width = ((abs - v0) as u64).min(ctx.n as u64) as u32;
                let modulus = ctx.pow(width);
                let term = |u: &BigInt, v: i64| -> BigInt {
                    let shift = (v - v0) as u64;
                    if shift >= width as u64 {
                        BigInt::zero()
                    } else {
                        u * ctx.pow_ref(shift as u32).as_ref()
                    }
                };
                let s = (term(u1, *v1) + term(u2, *v2)).mod_floor(&modulus);
                Padic::from_sum(ctx, v0, s, Some(v0 + width as i64))
            }
        }
    }

    /// self + O(p^k)
    fn add_big_o(&self, k: i64) -> Padic {
        match &self.repr {
            Repr::Zero(None) => Padic::big_o(self.ctx, k),
            Repr::Zero(Some(j)) => Padic::big_o(self.ctx, k.min(*j)),
            Repr::Unit { v, u, m } => {
                if k <= *v {
                    return Padic::big_o(self.ctx, k);
                }
                let m = if *m == EXACT {
                    (k - v).min(self.ctx.n as i64) as u32
                } else {
                    (*m).min((k - v) as u32)
                };
                Padic::from_parts(self.ctx, *v, u.clone(), m)
            }
        }
    }

    pub fn sub(&self, o: &Padic) -> Padic {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Padic) -> Padic {
        self.check_ctx(o);
        let ctx = self.ctx;
        match (&self.repr, &o.repr) {
            (Repr::Zero(None), _) | (_, Repr::Zero(None)) => Padic::zero(ctx),
            (Repr::Zero(Some(a)), _) => Padic::big_o(ctx, a + o.val_bound()),
            (_, Repr::Zero(Some(b))) => Padic::big_o(ctx, b + self.val_bound()),
            (
                Repr::Unit {
                    v: v1,
                    u: u1,
                    m: m1,
                },
                Repr::Unit {
                    v: v2,
                    u: u2,
                    m: m2,
                },
            ) => {
                let m = *m1.min(m2);
                if m == EXACT {
                    Padic::exact_unit(ctx, v1 + v2, u1 * u2)
                } else {
                    Padic::from_parts(ctx, v1 + v2, u1 * u2, m)
                }
            }
        }
    }

    pub fn inv(&self) -> Result<Padic, PadicError> {
        match &self.repr {
            Repr::Zero(None) => Err(PadicError::DivisionByZero),
            Repr::Zero(Some(_)) => Err(PadicError::DivisionByInexactZero),
            Repr::Unit { v, u, m } => {
                if *m == EXACT && u.abs().is_one() {
                    return Ok(Padic {
                        ctx: self.ctx,
                        repr: Repr::Unit {
                            v: -v,
                            u: u.clone(),
                            m: EXACT,
                        },
                    });
                }
                let m = if *m == EXACT { self.ctx.n } else { *m };
                let modulus = self.ctx.pow(m);
                let g = u.mod_floor(&modulus).extended_gcd(&modulus);
                debug_assert!(g.gcd.is_one());
                Ok(Padic::from_parts(self.ctx, -v, g.x, m))
            }
        }
    }

    pub fn div(&self, o: &Padic) -> Result<Padic, PadicError> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, mut e: u32) -> Padic {
        let mut base = self.clone();
        let mut acc = Padic::one(self.ctx);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Multiplies by p^k.
    pub fn shift(&self, k: i64) -> Padic {
        let repr = match &self.repr {
            Repr::Zero(None) => Repr::Zero(None),
            Repr::Zero(Some(j)) => Repr::Zero(Some(j + k)),
            Repr::Unit { v, u, m } => Repr::Unit {
                v: v + k,
                u: u.clone(),
                m: *m,
            },
        };
        Padic {
            ctx: self.ctx,
            repr,
        }
    }

    /// The known digits as an exact value over another context for the same prime. An inexact
    /// zero becomes the exact zero.
    pub fn lift_exact(&self, ctx: &'static PrimeContext) -> Padic {
        assert_eq!(ctx.p, self.ctx.p);
        match &self.repr {
            Repr::Zero(_) => Padic::zero(ctx),
            Repr::Unit { v, u, .. } => Padic::from_parts(ctx, *v, u.clone(), EXACT),
        }
    }

    /// The same value over another context for the same prime, keeping at most that context's
    /// digits.
    pub fn recontext(&self, ctx: &'static PrimeContext) -> Padic {
        assert_eq!(ctx.p, self.ctx.p);
        match &self.repr {
            Repr::Zero(None) => Padic::zero(ctx),
            Repr::Zero(Some(k)) => Padic::big_o(ctx, *k),
            Repr::Unit { v, u, m } => Padic::from_parts(
                ctx,
                *v,
                u.clone(),
                (*m).min(if *m == EXACT { EXACT } else { ctx.n }),
            ),
        }
    }

    /// Drops digits so that at most `m` relative digits remain.
    pub fn with_rel_prec(&self, m: u32) -> Padic {
        match &self.repr {
            Repr::Unit { v, u, m: m0 } if *m0 > m => Padic::from_parts(self.ctx, *v, u.clone(), m),
            _ => self.clone(),
        }
    }

    /// x mod p^k as an exact value whose digits below k are the canonical ones in [0, p).
    pub fn trunc_below(&self, k: i64) -> Result<Padic, PadicError> {
        if let Some(a) = self.abs_prec() {
            if a < k {
                return Err(PadicError::PrecisionExhausted(format!(
                    "need digits below p^{k}, known only below p^{a}"
                )));
            }
        }
        match &self.repr {
            Repr::Zero(_) => Ok(Padic::zero(self.ctx)),
            Repr::Unit { v, .. } if *v >= k => Ok(Padic::zero(self.ctx)),
            Repr::Unit { v, u, .. } => {
                let w = (k - v) as u32;
                let r = u.mod_floor(&self.ctx.pow(w));
                Ok(Padic::exact_unit(self.ctx, *v, r))
            }
        }
    }

    /// True if the two scalars agree to absolute precision `k` (or to all known digits).
    pub fn agrees_to(&self, o: &Padic, k: i64) -> bool {
        self.sub(o).val_bound() >= k
    }

    /// Random integral unit-or-zero-free scalar p^v * u with v in [vmin, vmax] and u an exact
    /// signed integer of `digits` base-p digits.
    pub fn random_exact<R: Rng + ?Sized>(
        ctx: &'static PrimeContext,
        rng: &mut R,
        vmin: i64,
        vmax: i64,
        digits: u32,
    ) -> Padic {
        let v = rng.gen_range(vmin..=vmax);
        let bound = ctx
            .pow(digits)
            .to_u128()
            .expect("digits small enough for u128");
        let p = ctx.p as u128;
        let u = loop {
            let u = rng.gen_range(1..bound);
            if u % p != 0 {
                break u;
            }
        };
        let u = if rng.gen_bool(0.5) {
            -BigInt::from(u)
        } else {
            BigInt::from(u)
        };
        Padic::exact_unit(ctx, v, u)
    }

    /// Random scalar with all N digits filled (inexact).
    pub fn random_full<R: Rng + ?Sized>(
        ctx: &'static PrimeContext,
        rng: &mut R,
        vmin: i64,
        vmax: i64,
    ) -> Padic {
        let v = rng.gen_range(vmin..=vmax);
        let mut u = BigInt::zero();
        for i in 0..ctx.n {
            let d = if i == 0 {
                rng.gen_range(1..ctx.p)
            } else {
                rng.gen_range(0..ctx.p)
            };
            u += BigInt::from(d) * ctx.pow(i);
        }
        Padic::from_parts(ctx, v, u, ctx.n)
    }
}

impl fmt::Debug for Padic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Padic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.ctx.p;
        match &self.repr {
            Repr::Zero(None) => write!(f, "0"),
            Repr::Zero(Some(k)) => write!(f, "O({p}^{k})"),
            Repr::Unit { v, u, m: EXACT } if *v == 0 => write!(f, "{u}"),
            Repr::Unit { v, u, m: EXACT } => write!(f, "{p}^{v}*{u}"),
            Repr::Unit { v, u, m } => write!(f, "{p}^{v}*{u} + O({p}^{})", v + *m as i64),
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $ty:ty, $call:ident) => {
        impl std::ops::$tr<&$ty> for &$ty {
            type Output = $ty;
            fn $method(self, o: &$ty) -> $ty {
                <$ty>::$call(self, o)
            }
        }
        impl std::ops::$tr<$ty> for $ty {
            type Output = $ty;
            fn $method(self, o: $ty) -> $ty {
                <$ty>::$call(&self, &o)
            }
        }
        impl std::ops::$tr<&$ty> for $ty {
            type Output = $ty;
            fn $method(self, o: &$ty) -> $ty {
                <$ty>::$call(&self, o)
            }
        }
        impl std::ops::$tr<$ty> for &$ty {
            type Output = $ty;
            fn $method(self, o: $ty) -> $ty {
                <$ty>::$call(self, &o)
            }
        }
    };
}
pub(crate) use forward_binop;

forward_binop!(Add, add, Padic, add);
forward_binop!(Sub, sub, Padic, sub);
forward_binop!(Mul, mul, Padic, mul);

impl std::ops::Neg for &Padic {
    type Output = Padic;
    fn neg(self) -> Padic {
        Padic::neg(self)
    }
}

impl std::ops::Neg for Padic {
    type Output = Padic;
    fn neg(self) -> Padic {
        Padic::neg(&self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q5() -> &'static PrimeContext {
        PrimeContext::get(5, 40).unwrap()
    }

    fn int(x: i64) -> Padic {
        Padic::from_i64(q5(), x)
    }

    #[test]
    fn test_exact_cancellation() {
        let z = &int(1) + &int(-1);
        assert!(z.is_exact_zero());
        assert_eq!(z.valuation(), f64::INFINITY);
    }

    #[test]
    fn test_inverse_of_uniformizer() {
        let x = int(5).inv().unwrap();
        assert_eq!(x.local_valuation(), Some(-1));
        assert_eq!(x.unit_part(), Some(&BigInt::from(1)));
        assert!(x.is_exact());
    }

    #[test]
    fn test_inverse_of_unit_is_inexact() {
        let x = int(3).inv().unwrap();
        assert_eq!(x.rel_prec(), Some(40));
        assert!((&x * &int(3) - int(1)).is_zero());
    }

    #[test]
    fn test_cancellation_reduces_precision() {
        // 1/3 - (1/3 + 5^10) has absolute precision 40 but valuation 10
        let a = int(3).inv().unwrap();
        let b = &a + &int(5).pow(10);
        let d = &b - &a;
        assert_eq!(d.local_valuation(), Some(10));
        assert_eq!(d.rel_prec(), Some(30));
        let z = &a - &a;
        assert!(z.is_zero() && !z.is_exact_zero());
        assert_eq!(z.val_bound(), 40);
    }

    #[test]
    fn test_division_errors() {
        assert_eq!(Padic::zero(q5()).inv(), Err(PadicError::DivisionByZero));
        assert_eq!(
            Padic::big_o(q5(), 3).inv(),
            Err(PadicError::DivisionByInexactZero)
        );
    }

    #[test]
    fn test_exact_growth_is_capped() {
        let x = int(2).pow(200);
        assert_eq!(x.rel_prec(), Some(40));
        let y = int(2).pow(10);
        assert!(y.is_exact());
        assert_eq!(y.as_exact_integer(), Some(BigInt::from(1024)));
    }

    #[test]
    fn test_trunc_below() {
        let x = int(-1);
        let t = x.trunc_below(2).unwrap();
        assert_eq!(t.as_exact_integer(), Some(BigInt::from(24)));
        let y = int(3).inv().unwrap();
        let t = y.trunc_below(1).unwrap();
        assert_eq!(t.as_exact_integer(), Some(BigInt::from(2)));
        assert!(Padic::big_o(q5(), 3).trunc_below(4).is_err());
    }

    #[test]
    fn test_ratio_matches_product() {
        let h = Padic::ratio(q5(), 1, 2);
        assert!((&h * &int(2) - int(1)).is_zero());
    }
}
