use std::fmt;
use std::sync::{Mutex, OnceLock};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::scalar::forward_binop;
use super::{square_class, ClassLabel, Padic, PadicError, PrimeContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtKind {
    #[serde(alias = "unram")]
    Unramified,
    #[serde(alias = "ram-p")]
    RamifiedP,
    #[serde(alias = "ram-ps")]
    RamifiedPS,
}

impl ExtKind {
    pub const ALL: [ExtKind; 3] = [ExtKind::Unramified, ExtKind::RamifiedP, ExtKind::RamifiedPS];

    pub fn parse(s: &str) -> Option<ExtKind> {
        match s {
            "unram" | "unramified" => Some(ExtKind::Unramified),
            "ram-p" | "ramified-p" => Some(ExtKind::RamifiedP),
            "ram-ps" | "ramified-ps" => Some(ExtKind::RamifiedPS),
            _ => None,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            ExtKind::Unramified => "unram",
            ExtKind::RamifiedP => "ram-p",
            ExtKind::RamifiedPS => "ram-ps",
        }
    }

    /// The extension generated by the square root of an element of this class.
    pub fn for_class(label: ClassLabel) -> Option<ExtKind> {
        match label {
            ClassLabel::One => None,
            ClassLabel::S => Some(ExtKind::Unramified),
            ClassLabel::Omega => Some(ExtKind::RamifiedP),
            ClassLabel::SOmega => Some(ExtKind::RamifiedPS),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExtensionDescriptor {
    pub kind: ExtKind,
    /// alpha^2
    pub s: Padic,
    /// ramification index over Q_p
    pub e: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Level {
    Qp,
    E,
    K,
}

/// Q_p, E = Q_p(alpha) or K = E(beta) with beta^2 = t in Q_p. Towers are interned.
#[derive(Debug)]
pub struct Tower {
    pub ctx: &'static PrimeContext,
    pub ext: Option<ExtensionDescriptor>,
    pub t: Option<Padic>,
}

impl PartialEq for Tower {
    fn eq(&self, o: &Self) -> bool {
        std::ptr::eq(self, o)
    }
}

impl Eq for Tower {}

impl std::hash::Hash for Tower {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        (self as *const Tower as usize).hash(h)
    }
}

static TOWERS: OnceLock<Mutex<Vec<&'static Tower>>> = OnceLock::new();

fn intern(
    ctx: &'static PrimeContext,
    ext: Option<ExtensionDescriptor>,
    t: Option<Padic>,
) -> &'static Tower {
    let reg = TOWERS.get_or_init(|| Mutex::new(Vec::new()));
    let mut guard = reg.lock().unwrap();
    if let Some(tw) = guard
        .iter()
        .find(|tw| tw.ctx.same(ctx) && tw.ext == ext && tw.t == t)
    {
        return tw;
    }
    let tw: &'static Tower = Box::leak(Box::new(Tower { ctx, ext, t }));
    guard.push(tw);
    tw
}

impl Tower {
    pub fn qp(ctx: &'static PrimeContext) -> &'static Tower {
        intern(ctx, None, None)
    }

    pub fn e(ctx: &'static PrimeContext, kind: ExtKind) -> &'static Tower {
        let s = match kind {
            ExtKind::Unramified => Padic::from_i64(ctx, ctx.s as i64),
            ExtKind::RamifiedP => Padic::p(ctx),
            ExtKind::RamifiedPS => Padic::from_i64(ctx, (ctx.p * ctx.s) as i64),
        };
        let e = if kind == ExtKind::Unramified { 1 } else { 2 };
        intern(ctx, Some(ExtensionDescriptor { kind, s, e }), None)
    }

    /// K = E(beta), beta^2 = t. `t` must not be a square in E.
    pub fn k(
        ctx: &'static PrimeContext,
        kind: ExtKind,
        t: Padic,
    ) -> Result<&'static Tower, PadicError> {
        let cls = square_class(&t)?;
        if cls.label == ClassLabel::One || ExtKind::for_class(cls.label) == Some(kind) {
            return Err(PadicError::InvalidContext(format!(
                "t = {t} is a square in E"
            )));
        }
        let e = Tower::e(ctx, kind);
        Ok(intern(ctx, e.ext.clone(), Some(t)))
    }

    /// The same tower over another precision context for the same prime.
    pub fn with_ctx(&self, ctx: &'static PrimeContext) -> &'static Tower {
        let ext = self.ext.as_ref().map(|d| ExtensionDescriptor {
            kind: d.kind,
            s: d.s.lift_exact(ctx),
            e: d.e,
        });
        intern(ctx, ext, self.t.as_ref().map(|t| t.lift_exact(ctx)))
    }

    pub fn kind(&self) -> Option<ExtKind> {
        self.ext.as_ref().map(|d| d.kind)
    }

    /// alpha^2, or an error for a bare Q_p tower.
    pub fn s(&self) -> &Padic {
        &self
            .ext
            .as_ref()
            .expect("tower has no quadratic extension")
            .s
    }

    /// Ramification index of E over Q_p (1 for a bare Q_p tower).
    pub fn e_index(&self) -> u32 {
        self.ext.as_ref().map_or(1, |d| d.e)
    }

    pub fn top_level(&self) -> Level {
        match (&self.ext, &self.t) {
            (None, _) => Level::Qp,
            (Some(_), None) => Level::E,
            _ => Level::K,
        }
    }

    /// The E-level tower underneath (itself when no beta is adjoined).
    pub fn e_tower(&'static self) -> &'static Tower {
        match self.kind() {
            Some(k) if self.t.is_some() => Tower::e(self.ctx, k),
            _ => self,
        }
    }

    pub fn compatible(a: &'static Tower, b: &'static Tower) -> bool {
        Tower::join(a, b).is_ok()
    }

    /// The smallest interned tower containing both, if they can share elements.
    pub fn join(a: &'static Tower, b: &'static Tower) -> Result<&'static Tower, PadicError> {
        if std::ptr::eq(a, b) {
            return Ok(a);
        }
        if !a.ctx.same(b.ctx) {
            return Err(PadicError::LevelMismatch(
                "different primes or precisions".into(),
            ));
        }
        match (a.kind(), b.kind()) {
            (Some(x), Some(y)) if x != y => {
                return Err(PadicError::LevelMismatch(format!("{x:?} vs {y:?}")));
            }
            _ => {}
        }
        match (&a.t, &b.t) {
            (Some(_), Some(_)) => Err(PadicError::LevelMismatch("two different towers K".into())),
            (Some(_), None) => Ok(a),
            (None, Some(_)) => Ok(b),
            (None, None) => Ok(if a.ext.is_some() { a } else { b }),
        }
    }

    fn alpha_weight(&self) -> f64 {
        if self.e_index() == 2 {
            0.5
        } else {
            0.0
        }
    }

    fn beta_weight(&self) -> f64 {
        self.t.as_ref().map_or(0.0, |t| t.valuation() / 2.0)
    }
}

/// x = c0 + alpha c1 + beta c2 + alpha beta c3 with c_i in Q_p. At level E the last two
/// coordinates are exact zeros, at level Q_p the last three are.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Ext {
    tower: &'static Tower,
    level: Level,
    c: [Padic; 4],
}

impl Ext {
    pub fn from_padic(tower: &'static Tower, x: Padic) -> Ext {
        let z = Padic::zero(tower.ctx);
        Ext {
            tower,
            level: Level::Qp,
            c: [x, z.clone(), z.clone(), z],
        }
    }

    pub fn from_i64(tower: &'static Tower, x: i64) -> Ext {
        Ext::from_padic(tower, Padic::from_i64(tower.ctx, x))
    }

    pub fn zero(tower: &'static Tower) -> Ext {
        Ext::from_i64(tower, 0)
    }

    pub fn one(tower: &'static Tower) -> Ext {
        Ext::from_i64(tower, 1)
    }

    /// a + alpha b
    pub fn new_e(tower: &'static Tower, a: Padic, b: Padic) -> Ext {
        assert!(tower.ext.is_some(), "tower has no alpha");
        let z = Padic::zero(tower.ctx);
        Ext {
            tower,
            level: Level::E,
            c: [a, b, z.clone(), z],
        }
    }

    /// u + beta w with u, w in E.
    pub fn new_k(tower: &'static Tower, u: &Ext, w: &Ext) -> Ext {
        assert!(tower.t.is_some(), "tower has no beta");
        Ext {
            tower,
            level: Level::K,
            c: [
                u.c[0].clone(),
                u.c[1].clone(),
                w.c[0].clone(),
                w.c[1].clone(),
            ],
        }
    }

    pub fn from_coords(tower: &'static Tower, level: Level, c: [Padic; 4]) -> Ext {
        assert!(level <= tower.top_level());
        match level {
            Level::Qp => {
                assert!(c[1].is_exact_zero() && c[2].is_exact_zero() && c[3].is_exact_zero())
            }
            Level::E => assert!(c[2].is_exact_zero() && c[3].is_exact_zero()),
            Level::K => {}
        }
        Ext { tower, level, c }
    }

    pub fn alpha(tower: &'static Tower) -> Ext {
        let ctx = tower.ctx;
        Ext::new_e(tower, Padic::zero(ctx), Padic::one(ctx))
    }

    pub fn beta(tower: &'static Tower) -> Ext {
        let ctx = tower.ctx;
        let z = Padic::zero(ctx);
        Ext {
            tower,
            level: Level::K,
            c: [z.clone(), z.clone(), Padic::one(ctx), z],
        }
    }

    /// Uniformizer of the level: p at Q_p, alpha for a ramified E, p for an unramified E.
    pub fn uniformizer(tower: &'static Tower, level: Level) -> Ext {
        match level {
            Level::Qp => Ext::from_padic(tower, Padic::p(tower.ctx)),
            Level::E if tower.e_index() == 2 => Ext::alpha(tower),
            Level::E => Ext::from_padic(tower, Padic::p(tower.ctx)).at_level(Level::E),
            Level::K => panic!("no uniformizer is fixed for the tower K"),
        }
    }

    /// Coordinatewise `Padic::lift_exact` into the same tower over `ctx`.
    pub fn lift_exact(&self, ctx: &'static PrimeContext) -> Ext {
        let c = self.c.clone().map(|x| x.lift_exact(ctx));
        Ext::from_coords(self.tower.with_ctx(ctx), self.level, c)
    }

    /// Coordinatewise `Padic::recontext`.
    pub fn recontext(&self, ctx: &'static PrimeContext) -> Ext {
        let c = self.c.clone().map(|x| x.recontext(ctx));
        Ext::from_coords(self.tower.with_ctx(ctx), self.level, c)
    }

    pub fn tower(&self) -> &'static Tower {
        self.tower
    }

    pub fn ctx(&self) -> &'static PrimeContext {
        self.tower.ctx
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn coords(&self) -> &[Padic; 4] {
        &self.c
    }

    pub fn coord(&self, i: usize) -> &Padic {
        &self.c[i]
    }

    /// Same value, declared at a higher level.
    pub fn at_level(&self, level: Level) -> Ext {
        assert!(level >= self.level && level <= self.tower.top_level());
        Ext {
            tower: self.tower,
            level,
            c: self.c.clone(),
        }
    }

    /// Same value viewed in a compatible, larger tower.
    pub fn in_tower(&self, tower: &'static Tower) -> Ext {
        let t = Tower::join(self.tower, tower).expect("incompatible towers");
        assert!(
            std::ptr::eq(t, tower),
            "target tower does not contain this value"
        );
        Ext {
            tower,
            level: self.level,
            c: self.c.clone(),
        }
    }

    /// The E-part u and beta-part w of x = u + beta w.
    pub fn split_k(&self) -> (Ext, Ext) {
        let tw = self.tower.e_tower();
        let z = Padic::zero(self.ctx());
        let lvl = self.level.min(Level::E);
        (
            Ext {
                tower: tw,
                level: lvl,
                c: [self.c[0].clone(), self.c[1].clone(), z.clone(), z.clone()],
            },
            Ext {
                tower: tw,
                level: lvl,
                c: [self.c[2].clone(), self.c[3].clone(), z.clone(), z],
            },
        )
    }

    pub fn is_exact_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_exact_zero())
    }

    /// Every known digit of every coordinate is zero.
    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn is_exact(&self) -> bool {
        self.c.iter().all(|x| x.is_exact())
    }

    /// The Q_p value, if the alpha, beta and alpha-beta coordinates vanish at precision.
    pub fn as_padic(&self) -> Option<&Padic> {
        if self.c[1..].iter().all(|x| x.is_zero()) {
            Some(&self.c[0])
        } else {
            None
        }
    }

    /// The E value, if the beta and alpha-beta coordinates vanish at precision.
    pub fn as_e(&self) -> Option<Ext> {
        if self.c[2].is_zero() && self.c[3].is_zero() {
            Some(self.split_k().0)
        } else {
            None
        }
    }

    fn joined(&self, o: &Ext) -> Result<(&'static Tower, Level), PadicError> {
        let tw = Tower::join(self.tower, o.tower)?;
        Ok((tw, self.level.max(o.level)))
    }

    pub fn checked_add(&self, o: &Ext) -> Result<Ext, PadicError> {
        let (tower, level) = self.joined(o)?;
        let c = [0, 1, 2, 3].map(|i| &self.c[i] + &o.c[i]);
        Ok(Ext { tower, level, c })
    }

    pub fn checked_sub(&self, o: &Ext) -> Result<Ext, PadicError> {
        self.checked_add(&o.neg())
    }

    pub fn checked_mul(&self, o: &Ext) -> Result<Ext, PadicError> {
        let (tower, level) = self.joined(o)?;
        let (c, d) = (&self.c, &o.c);
        let z = || Padic::zero(tower.ctx);
        let out = match level {
            Level::Qp => [&c[0] * &d[0], z(), z(), z()],
            Level::E => {
                let s = tower.s();
                [
                    &c[0] * &d[0] + s * &(&c[1] * &d[1]),
                    &c[0] * &d[1] + &c[1] * &d[0],
                    z(),
                    z(),
                ]
            }
            Level::K => {
                let s = tower.s();
                let t = tower.t.as_ref().unwrap();
                let st = s * t;
                [
                    &c[0] * &d[0]
                        + s * &(&c[1] * &d[1])
                        + t * &(&c[2] * &d[2])
                        + &st * &(&c[3] * &d[3]),
                    &c[0] * &d[1] + &c[1] * &d[0] + t * &(&c[2] * &d[3] + &c[3] * &d[2]),
                    &c[0] * &d[2] + &c[2] * &d[0] + s * &(&c[1] * &d[3] + &c[3] * &d[1]),
                    &c[0] * &d[3] + &c[3] * &d[0] + &c[1] * &d[2] + &c[2] * &d[1],
                ]
            }
        };
        Ok(Ext {
            tower,
            level,
            c: out,
        })
    }

    pub fn add(&self, o: &Ext) -> Ext {
        self.checked_add(o).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn sub(&self, o: &Ext) -> Ext {
        self.checked_sub(o).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn mul(&self, o: &Ext) -> Ext {
        self.checked_mul(o).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn neg(&self) -> Ext {
        Ext {
            tower: self.tower,
            level: self.level,
            c: self.c.clone().map(|x| -x),
        }
    }

    /// Multiplication by a Q_p scalar.
    pub fn scale(&self, k: &Padic) -> Ext {
        Ext {
            tower: self.tower,
            level: self.level,
            c: self.c.clone().map(|x| &x * k),
        }
    }

    pub fn pow(&self, mut e: u32) -> Ext {
        let mut base = self.clone();
        let mut acc = Ext::one(self.tower).at_level(self.level);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// x^k for any integer k.
    pub fn powi(&self, k: i64) -> Result<Ext, PadicError> {
        if k >= 0 {
            Ok(self.pow(k as u32))
        } else {
            Ok(self.inv()?.pow((-k) as u32))
        }
    }

    /// sigma: alpha -> -alpha, beta fixed. Identity on Q_p.
    pub fn sigma(&self) -> Ext {
        let mut c = self.c.clone();
        c[1] = -&c[1];
        c[3] = -&c[3];
        Ext {
            tower: self.tower,
            level: self.level,
            c,
        }
    }

    /// sigma, refusing Q_p-level input.
    pub fn try_sigma(&self) -> Result<Ext, PadicError> {
        if self.level == Level::Qp {
            return Err(PadicError::LevelMismatch("sigma needs level E or K".into()));
        }
        Ok(self.sigma())
    }

    /// tau: beta -> -beta, alpha fixed.
    pub fn tau(&self) -> Ext {
        let mut c = self.c.clone();
        c[2] = -&c[2];
        c[3] = -&c[3];
        Ext {
            tower: self.tower,
            level: self.level,
            c,
        }
    }

    /// Norm one level down: x sigma(x) from E to Q_p, x tau(x) from K to E.
    pub fn norm(&self) -> Result<Ext, PadicError> {
        match self.level {
            Level::Qp => Err(PadicError::LevelMismatch("norm needs level E or K".into())),
            Level::E => {
                let n = &self.c[0] * &self.c[0] - self.tower.s() * &(&self.c[1] * &self.c[1]);
                Ok(Ext::from_padic(self.tower, n))
            }
            Level::K => {
                let (u, w) = self.split_k();
                let t = self.tower.t.as_ref().unwrap();
                let n = &(&u * &u) - &(&w * &w).scale(t);
                Ok(n)
            }
        }
    }

    /// Norm all the way down to Q_p.
    pub fn norm_to_qp(&self) -> Padic {
        match self.level {
            Level::Qp => self.c[0].clone(),
            Level::E => self.norm().unwrap().c[0].clone(),
            Level::K => self.norm().unwrap().at_level(Level::E).norm().unwrap().c[0].clone(),
        }
    }

    pub fn inv(&self) -> Result<Ext, PadicError> {
        if self.is_exact_zero() {
            return Err(PadicError::DivisionByZero);
        }
        if self.is_zero() {
            return Err(PadicError::DivisionByInexactZero);
        }
        match self.level {
            Level::Qp => Ok(Ext::from_padic(self.tower, self.c[0].inv()?)),
            Level::E => {
                let n = self.norm()?.c[0].inv()?;
                Ok(self.sigma().scale(&n))
            }
            Level::K => {
                let n = self.norm()?.at_level(Level::E).inv()?;
                Ok(&self.tau() * &n.in_tower(self.tower))
            }
        }
    }

    pub fn div(&self, o: &Ext) -> Result<Ext, PadicError> {
        Ok(self * &o.inv()?)
    }

    /// Valuation normalized by v(p) = 1. Level K uses v_p(N_{K/Q_p}(x)) / 4.
    pub fn valuation(&self) -> f64 {
        match self.level {
            Level::K if !self.is_zero() => {
                let n = self.norm_to_qp();
                if n.is_zero() {
                    self.defect()
                } else {
                    n.valuation() / 4.0
                }
            }
            _ => self.defect(),
        }
    }

    /// Integer valuation in units of the level's uniformizer; None for zero.
    pub fn local_valuation(&self) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let v = self.valuation();
        let e = match self.level {
            Level::Qp => 1.0,
            Level::E => self.tower.e_index() as f64,
            Level::K => 2.0,
        };
        Some((v * e).round() as i64)
    }

    /// Weighted minimum of coordinate valuations (v(p) = 1). Equal to the valuation on E and a
    /// lower bound for values that are zero at precision.
    pub fn defect(&self) -> f64 {
        let wa = self.tower.alpha_weight();
        let wb = self.tower.beta_weight();
        [
            self.c[0].valuation(),
            self.c[1].valuation() + wa,
            self.c[2].valuation() + wb,
            self.c[3].valuation() + wa + wb,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }

    /// `defect` in units of the E-uniformizer (p-digits when E/Q_p is unramified).
    pub fn defect_e_units(&self) -> f64 {
        self.defect() * self.tower.e_index() as f64
    }

    /// Reduces an element of O_E modulo omega_E^k to its canonical digits.
    pub fn trunc_below_local(&self, k: i64) -> Result<Ext, PadicError> {
        match self.level {
            Level::Qp => Ok(Ext::from_padic(self.tower, self.c[0].trunc_below(k)?)),
            Level::E => {
                let (ka, kb) = if self.tower.e_index() == 2 {
                    ((k + 1).div_euclid(2), k.div_euclid(2))
                } else {
                    (k, k)
                };
                Ok(Ext::new_e(
                    self.tower,
                    self.c[0].trunc_below(ka)?,
                    self.c[1].trunc_below(kb)?,
                ))
            }
            Level::K => Err(PadicError::UnsupportedLevel(Level::K)),
        }
    }

    /// Random value at `level` with exact coordinates p^v u, v in [vmin, vmax], u of `digits`
    /// digits; each non-leading coordinate is zero with probability 1/4.
    pub fn random_exact<R: Rng + ?Sized>(
        tower: &'static Tower,
        level: Level,
        rng: &mut R,
        vmin: i64,
        vmax: i64,
        digits: u32,
    ) -> Ext {
        let ctx = tower.ctx;
        let dim = match level {
            Level::Qp => 1,
            Level::E => 2,
            Level::K => 4,
        };
        let mut c = [0, 1, 2, 3].map(|_| Padic::zero(ctx));
        for (i, ci) in c.iter_mut().enumerate().take(dim) {
            if i == 0 || rng.gen_range(0..4) != 0 {
                *ci = Padic::random_exact(ctx, rng, vmin, vmax, digits);
            }
        }
        Ext { tower, level, c }
    }
}

impl fmt::Debug for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["", "a", "b", "ab"];
        let mut first = true;
        for (i, x) in self.c.iter().enumerate() {
            if x.is_exact_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if i == 0 {
                write!(f, "{x}")?;
            } else {
                write!(f, "({x})*{}", names[i])?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

forward_binop!(Add, add, Ext, add);
forward_binop!(Sub, sub, Ext, sub);
forward_binop!(Mul, mul, Ext, mul);

impl std::ops::Neg for &Ext {
    type Output = Ext;
    fn neg(self) -> Ext {
        Ext::neg(self)
    }
}

impl std::ops::Neg for Ext {
    type Output = Ext;
    fn neg(self) -> Ext {
        Ext::neg(&self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e5() -> &'static Tower {
        Tower::e(PrimeContext::get(5, 40).unwrap(), ExtKind::Unramified)
    }

    fn e(a: i64, b: i64) -> Ext {
        let ctx = e5().ctx;
        Ext::new_e(e5(), Padic::from_i64(ctx, a), Padic::from_i64(ctx, b))
    }

    #[test]
    fn test_alpha_squared() {
        let a = Ext::alpha(e5());
        let x = &a * &a;
        assert!(x.coord(1).is_exact_zero());
        assert_eq!(x.as_padic().unwrap().as_exact_integer().unwrap(), 2.into());
    }

    #[test]
    fn test_sigma_and_norm() {
        let x = e(3, 4);
        assert_eq!(x.sigma(), e(3, -4));
        assert_eq!(e(3, 2).norm_to_qp(), Padic::from_i64(e5().ctx, 1));
        assert_eq!(e(1, 0).norm_to_qp(), Padic::from_i64(e5().ctx, 1));
        assert!(Ext::from_i64(e5(), 3).try_sigma().is_err());
    }

    #[test]
    fn test_valuations() {
        let ctx = PrimeContext::get(5, 40).unwrap();
        for kind in ExtKind::ALL {
            let tw = Tower::e(ctx, kind);
            assert_eq!(Ext::from_i64(tw, 5).at_level(Level::E).valuation(), 1.0);
        }
        let ram = Tower::e(ctx, ExtKind::RamifiedP);
        let a = Ext::alpha(ram);
        assert_eq!(a.valuation(), 0.5);
        assert_eq!(a.local_valuation(), Some(1));
        assert_eq!(e(3, 5).valuation(), 0.0);
        let k = Tower::k(ctx, ExtKind::Unramified, Padic::from_i64(ctx, 5)).unwrap();
        assert_eq!(Ext::from_i64(k, 5).at_level(Level::K).valuation(), 1.0);
        assert_eq!(Ext::beta(k).valuation(), 0.5);
        assert_eq!(Ext::beta(k).local_valuation(), Some(1));
    }

    #[test]
    fn test_k_rejects_squares_of_e() {
        let ctx = PrimeContext::get(5, 40).unwrap();
        assert!(Tower::k(ctx, ExtKind::Unramified, Padic::from_i64(ctx, 2)).is_err());
        assert!(Tower::k(ctx, ExtKind::Unramified, Padic::from_i64(ctx, 4)).is_err());
        assert!(Tower::k(ctx, ExtKind::RamifiedP, Padic::from_i64(ctx, 2)).is_ok());
    }

    #[test]
    fn test_inverse_at_each_level() {
        let ctx = PrimeContext::get(7, 30).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kind in ExtKind::ALL {
            let t = if kind == ExtKind::Unramified { 7 } else { 3 };
            let tw = Tower::k(ctx, kind, Padic::from_i64(ctx, t)).unwrap();
            for level in [Level::Qp, Level::E, Level::K] {
                for _ in 0..20 {
                    let x = Ext::random_exact(tw, level, &mut rng, -2, 3, 4);
                    let y = x.inv().unwrap();
                    let one = &x * &y;
                    assert!((&one - &Ext::one(tw)).is_zero(), "{x} * {y} = {one}");
                }
            }
        }
    }

    #[test]
    fn test_mixed_levels_promote() {
        let x = &e(1, 1) * &Ext::from_i64(e5(), 3);
        assert_eq!(x.level(), Level::E);
        assert_eq!(x, e(3, 3));
    }
}
