use rand::Rng;
use serde::Serialize;

use super::ChabautyError;
use crate::bttree::{act_end, End};
use crate::padic::{Ext, Level, Padic};
use crate::sl2::{ConjugatorCertificate, Involution, Mat2, SLACK};

#[derive(Clone, Debug, Default, Serialize)]
pub struct BoundaryReport {
    pub samples: usize,
    /// images whose beta-part vanishes exactly (ends of T_E)
    pub e_rational: usize,
    /// images whose beta-part is zero only to within precision
    pub inconclusive: usize,
    /// images that fail A sigma(xi) = c xi, i.e. are not fixed by the induced involution
    pub fixed_check_failures: usize,
    /// smallest valuation of a beta-part seen
    pub min_beta_valuation: Option<f64>,
}

impl BoundaryReport {
    pub fn passes(&self) -> bool {
        self.e_rational == 0 && self.inconclusive == 0 && self.fixed_check_failures == 0
    }
}

fn beta_part(x: &Ext) -> Ext {
    let c = x.coords();
    let z = Padic::zero(x.ctx());
    Ext::from_coords(
        x.tower(),
        Level::K,
        [z.clone(), z, c[2].clone(), c[3].clone()],
    )
}

/// Column (x1, x2) with A sigma(x) = c x at precision, relative to the size of x.
fn is_fixed(a: &Mat2, c: &Ext, v: &(Ext, Ext)) -> bool {
    let (s0, s1) = (v.0.sigma(), v.1.sigma());
    let l = a.apply(&(s0, s1));
    let d0 = &l.0 - &(c * &v.0);
    let d1 = &l.1 - &(c * &v.1);
    let scale = v.0.defect().min(v.1.defect()).min(0.0) + c.defect().min(0.0);
    let tol = (a.precision() - SLACK) as f64;
    [d0, d1]
        .iter()
        .all(|d| d.is_zero() || d.defect() - scale >= tol)
}

/// Samples ends [1 : x] with x in K^sigma = Q_p(beta), plus [0 : 1], and maps them by B. Each
/// image is an end fixed by the involution induced on the boundary of T_K; it must not lie on
/// the boundary of T_E, so its beta-part has to be genuinely nonzero. Each image is also checked
/// against the fixed-end system A sigma(xi) = c xi.
pub fn boundary_disjointness_check<R: Rng + ?Sized>(
    theta: &Involution,
    cert: &ConjugatorCertificate,
    samples: usize,
    rng: &mut R,
) -> Result<BoundaryReport, ChabautyError> {
    if cert.level() != Level::K {
        return Err(ChabautyError::Precondition(format!(
            "certificate for case {:?} stays in E: c = {} is E-rational",
            cert.case, cert.c
        )));
    }
    let tw = cert.b.tower();
    let ctx = tw.ctx;
    let a = theta.a.map(|x| x.in_tower(tw));
    let mut rep = BoundaryReport::default();
    for s in 0..samples.max(1) {
        let v = if s == 0 {
            (
                Ext::zero(tw).at_level(Level::K),
                Ext::one(tw).at_level(Level::K),
            )
        } else {
            let c0 = Padic::random_exact(ctx, rng, -2, 3, 4);
            let c2 = if rng.gen_range(0..4) == 0 {
                Padic::zero(ctx)
            } else {
                Padic::random_exact(ctx, rng, -2, 3, 4)
            };
            let z = Padic::zero(ctx);
            (
                Ext::one(tw).at_level(Level::K),
                Ext::from_coords(tw, Level::K, [c0, z.clone(), c2, z]),
            )
        };
        rep.samples += 1;
        let image = cert.b.apply(&v);
        if !is_fixed(&a, &cert.c, &image) {
            rep.fixed_check_failures += 1;
        }
        let e = match act_end(
            &cert.b,
            &if s == 0 {
                End::Inf
            } else {
                End::Finite(v.1.clone())
            },
        ) {
            Ok(e) => e,
            Err(_) => {
                rep.inconclusive += 1;
                continue;
            }
        };
        let End::Finite(y) = e else {
            // [0 : 1] is an end of T_E
            rep.e_rational += 1;
            continue;
        };
        let bp = beta_part(&y);
        if bp.is_exact_zero() {
            rep.e_rational += 1;
        } else if bp.is_zero() {
            rep.inconclusive += 1;
        } else {
            let v = bp.valuation();
            rep.min_beta_valuation = Some(rep.min_beta_valuation.map_or(v, |m: f64| m.min(v)));
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{ExtKind, PrimeContext, Tower};
    use crate::sl2::conjugator_to_sigma;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e5() -> &'static Tower {
        Tower::e(PrimeContext::get(5, 40).unwrap(), ExtKind::Unramified)
    }

    #[test]
    fn test_case_four_has_no_e_rational_images() {
        let ctx = e5().ctx;
        let th = Involution::f1a(Ext::alpha(e5()), Padic::from_i64(ctx, 7)).unwrap();
        let cert = conjugator_to_sigma(&th, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rep = boundary_disjointness_check(&th, &cert, 500, &mut rng).unwrap();
        assert_eq!(rep.samples, 500);
        assert!(rep.passes(), "{rep:?}");
    }

    #[test]
    fn test_rational_c_is_rejected() {
        // z = 0, y = 1: c1 = 1 lies in Q_p, so the certificate stays in E
        let ctx = e5().ctx;
        let th = Involution::f1a(Ext::zero(e5()), Padic::one(ctx)).unwrap();
        let cert = conjugator_to_sigma(&th, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            boundary_disjointness_check(&th, &cert, 10, &mut rng),
            Err(ChabautyError::Precondition(_))
        ));
    }

    #[test]
    fn test_infinity_sample_is_the_image_column() {
        let ctx = e5().ctx;
        let th = Involution::f1a(Ext::zero(e5()), Padic::from_i64(ctx, 5)).unwrap();
        let cert = conjugator_to_sigma(&th, None).unwrap();
        assert_eq!(cert.level(), Level::K);
        let End::Finite(y) = act_end(&cert.b, &End::Inf).unwrap() else {
            panic!()
        };
        let direct = cert.b.e[3].div(&cert.b.e[1]).unwrap();
        assert!(End::Finite(y.clone()).same_as(&End::Finite(direct)));
        assert!(!beta_part(&y).is_zero());
    }
}
