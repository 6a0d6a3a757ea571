use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::One;

use super::PadicError;

/// Read-only data shared by every scalar over one Q_p at one working precision.
#[derive(Debug)]
pub struct PrimeContext {
    pub p: u32,
    /// Relative precision in base-p digits.
    pub n: u32,
    /// Smallest positive quadratic non-residue mod p.
    pub s: u32,
    residue_is_square: Vec<bool>,
    pows: Vec<BigInt>,
}

static REGISTRY: OnceLock<Mutex<Vec<&'static PrimeContext>>> = OnceLock::new();

fn is_prime(p: u32) -> bool {
    p >= 2
        && (2..)
            .take_while(|d| d * d <= p)
            .all(|d| !p.is_multiple_of(d))
}

impl PrimeContext {
    /// Interned context for (p, n). Contexts live for the whole process so scalars can hold a
    /// plain `&'static` reference.
    pub fn get(p: u32, n: u32) -> Result<&'static PrimeContext, PadicError> {
        if p < 3 || !is_prime(p) {
            return Err(PadicError::InvalidContext(format!(
                "p = {p} must be an odd prime"
            )));
        }
        if n < 8 {
            return Err(PadicError::InvalidContext(format!(
                "precision {n} below the floor of 8"
            )));
        }
        let reg = REGISTRY.get_or_init(|| Mutex::new(Vec::new()));
        let mut guard = reg.lock().unwrap();
        if let Some(ctx) = guard.iter().find(|c| c.p == p && c.n == n) {
            return Ok(ctx);
        }
        let mut residue_is_square = vec![false; p as usize];
        for r in 1..p as u64 {
            residue_is_square[((r * r) % p as u64) as usize] = true;
        }
        let s = (1..p).find(|&r| !residue_is_square[r as usize]).unwrap();
        let mut pows = Vec::with_capacity(4 * n as usize + 9);
        let mut acc = BigInt::one();
        for _ in 0..4 * n + 9 {
            pows.push(acc.clone());
            acc *= p;
        }
        let ctx: &'static PrimeContext = Box::leak(Box::new(PrimeContext {
            p,
            n,
            s,
            residue_is_square,
            pows,
        }));
        guard.push(ctx);
        Ok(ctx)
    }

    pub fn pow(&self, k: u32) -> BigInt {
        match self.pows.get(k as usize) {
            Some(x) => x.clone(),
            None => num_traits::pow(BigInt::from(self.p), k as usize),
        }
    }

    pub fn pow_ref(&self, k: u32) -> std::borrow::Cow<'_, BigInt> {
        match self.pows.get(k as usize) {
            Some(x) => std::borrow::Cow::Borrowed(x),
            None => std::borrow::Cow::Owned(num_traits::pow(BigInt::from(self.p), k as usize)),
        }
    }

    /// Quadratic-residue test for a residue class mod p (0 is not a residue).
    pub fn is_qr(&self, r: u32) -> bool {
        self.residue_is_square[(r % self.p) as usize]
    }

    /// Canonical square root of a nonzero residue: the root lying in [1, (p-1)/2].
    pub fn residue_sqrt(&self, r: u32) -> Option<u32> {
        let r = r % self.p;
        (1..=(self.p - 1) / 2).find(|&x| (x as u64 * x as u64) % self.p as u64 == r as u64)
    }

    pub fn same(&self, other: &PrimeContext) -> bool {
        std::ptr::eq(self, other)
    }
}

// Contexts are interned, so identity is (p, n).
impl PartialEq for PrimeContext {
    fn eq(&self, o: &Self) -> bool {
        self.p == o.p && self.n == o.n
    }
}

impl Eq for PrimeContext {}

impl std::hash::Hash for PrimeContext {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        (self.p, self.n).hash(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_non_residue_choice() {
        assert_eq!(PrimeContext::get(3, 40).unwrap().s, 2);
        assert_eq!(PrimeContext::get(5, 40).unwrap().s, 2);
        assert_eq!(PrimeContext::get(7, 40).unwrap().s, 3);
        assert_eq!(PrimeContext::get(11, 20).unwrap().s, 2);
    }

    #[test]
    fn test_rejects_bad_parameters() {
        assert!(PrimeContext::get(2, 40).is_err());
        assert!(PrimeContext::get(9, 40).is_err());
        assert!(PrimeContext::get(5, 4).is_err());
    }

    #[test]
    fn test_interning() {
        let a = PrimeContext::get(7, 30).unwrap();
        let b = PrimeContext::get(7, 30).unwrap();
        assert!(a.same(b));
        assert_eq!(a.residue_sqrt(2), Some(3));
    }
}
