use rand::Rng;

use super::{conjugator_to_sigma, CaseTag, Involution, Mat2, Sl2Error};
use crate::padic::{sqrt, Ext, Level, Padic, PadicError, Tower};

fn elementary<R: Rng + ?Sized>(
    tower: &'static Tower,
    level: Level,
    rng: &mut R,
    step: usize,
) -> Mat2 {
    let x = Ext::random_exact(tower, level, rng, -1, 2, 3);
    if step.is_multiple_of(2) {
        Mat2::upper(tower, x)
    } else {
        Mat2::lower(tower, x)
    }
}

/// Random element of SL(2) at `level`: a word in elementary matrices with entries of valuation
/// in [-1, 2], interleaved with occasional diag(w^k, w^-k), k = +-1.
pub fn random_sl2<R: Rng + ?Sized>(
    tower: &'static Tower,
    level: Level,
    rng: &mut R,
    depth: usize,
) -> Mat2 {
    let level = level.min(tower.top_level());
    let w = if level == Level::K {
        Ext::from_padic(tower, Padic::p(tower.ctx))
    } else {
        Ext::uniformizer(tower, level)
    };
    let mut g = Mat2::identity(tower);
    for step in 0..depth {
        let flip = rng.gen_range(0..2);
        g = g.mul(&elementary(tower, level, rng, step + flip));
        if rng.gen_range(0..3) == 0 {
            let k = if rng.gen_bool(0.5) { 1 } else { -1 };
            let d = w.powi(k).unwrap();
            g = g.mul(&Mat2::diag(d.clone(), d.inv().unwrap()));
        }
    }
    g
}

/// Random element of SL(2) with exact entries: elementary matrices and diag(p^k, p^-k).
pub fn random_sl2_exact<R: Rng + ?Sized>(
    tower: &'static Tower,
    level: Level,
    rng: &mut R,
    depth: usize,
) -> Mat2 {
    let level = level.min(tower.top_level());
    let mut g = Mat2::identity(tower);
    for step in 0..depth {
        g = g.mul(&elementary(tower, level, rng, step));
        if rng.gen_range(0..3) == 0 {
            let k = if rng.gen_bool(0.5) { 1 } else { -1 };
            let c = tower.ctx;
            g = g.mul(&Mat2::diag(
                Ext::from_padic(tower, Padic::p_pow(c, k)),
                Ext::from_padic(tower, Padic::p_pow(c, -k)),
            ));
        }
    }
    g
}

/// [[x, y], [a y, x]] with x = sign * sqrt(1 + a y^2), the canonical root carrying the sign.
pub fn h_theta_a_element(
    tower: &'static Tower,
    a: &Padic,
    y: &Padic,
    sign: i32,
) -> Result<Mat2, PadicError> {
    let rad = &Padic::one(tower.ctx) + &(a * &(y * y));
    let x = sqrt(&Ext::from_padic(tower, rad))?;
    let x = if sign < 0 { -x } else { x };
    let y = Ext::from_padic(tower, y.clone());
    let ay = y.scale(a);
    Ok(Mat2::new(x.clone(), y, ay, x))
}

/// `count` elements of H_theta_a with y = z_seed * r, r a random integer, both signs of x.
/// Draws for which 1 + a y^2 is not a square are skipped.
pub fn h_theta_a_sample<R: Rng + ?Sized>(
    tower: &'static Tower,
    a: &Padic,
    z_seed: &Padic,
    count: usize,
    rng: &mut R,
) -> Vec<Mat2> {
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < 50 * count.max(1) {
        attempts += 1;
        let r = Padic::random_exact(tower.ctx, rng, 0, 1, 3);
        let y = z_seed * &r;
        let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
        if let Ok(g) = h_theta_a_element(tower, a, &y, sign) {
            out.push(g);
        }
    }
    out
}

/// Random parameters that land in `case` of the certificate dispatch for gamma = sigma, with
/// the c2 to pass along. Draws are redrawn until the dispatch agrees (at most 200 tries), so
/// the result is always admissible.
pub fn draw_case_parameters<R: Rng + ?Sized>(
    tower: &'static Tower,
    case: CaseTag,
    rng: &mut R,
) -> Result<(Involution, Option<Padic>), Sl2Error> {
    let tw = tower.e_tower();
    if tw.kind().is_none() || case == CaseTag::Diag {
        return Err(Sl2Error::Precondition(format!(
            "case {case:?} needs gamma = sigma over a quadratic E"
        )));
    }
    let ctx = tw.ctx;
    let unit = |rng: &mut R| Padic::random_exact(ctx, rng, 0, 1, 3);
    let e_of = |a: Padic, b: Padic| Ext::new_e(tw, a, b);
    let zero = || Padic::zero(ctx);
    for _ in 0..200 {
        let drawn = (|| -> Result<(Involution, Option<Padic>), Sl2Error> {
            Ok(match case {
                CaseTag::C1 => {
                    let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
                    (
                        Involution::f1b(Ext::from_i64(tw, sign).at_level(Level::E))?,
                        None,
                    )
                }
                CaseTag::C2 => {
                    // u / sigma(u) has norm 1 and a nonzero alpha-part when u is in neither Q_p
                    // nor alpha Q_p
                    let u = e_of(unit(rng), unit(rng));
                    (Involution::f1b(u.div(&u.sigma())?)?, None)
                }
                CaseTag::C4 => {
                    let z = e_of(unit(rng), unit(rng));
                    let c2 = Padic::from_i64(ctx, rng.gen_range(0..ctx.p as i64));
                    (Involution::f1a(z, unit(rng))?, Some(c2))
                }
                CaseTag::C51 | CaseTag::C52 => {
                    let z2 = unit(rng);
                    let c2 = if case == CaseTag::C51 {
                        z2.clone()
                    } else {
                        -&z2
                    };
                    (Involution::f1a(e_of(unit(rng), z2), unit(rng))?, Some(c2))
                }
                CaseTag::C53 => (
                    Involution::f1a(e_of(unit(rng), zero()), unit(rng))?,
                    Some(zero()),
                ),
                // y = 0 is only reached once z2^2 = c2^2
                CaseTag::C54a => {
                    let z2 = unit(rng);
                    (
                        Involution::f1a(e_of(unit(rng), z2.clone()), zero())?,
                        Some(z2),
                    )
                }
                CaseTag::C54b => {
                    let z2 = unit(rng);
                    (Involution::f1a(e_of(zero(), z2.clone()), zero())?, Some(z2))
                }
                CaseTag::C54c => (
                    Involution::f1a(e_of(unit(rng), zero()), zero())?,
                    Some(zero()),
                ),
                CaseTag::Diag => unreachable!(),
            })
        })();
        // z sigma(z) + y = 0 and similar degenerate draws are simply redrawn
        let Ok((theta, c2)) = drawn else { continue };
        match conjugator_to_sigma(&theta, c2.as_ref()) {
            Ok(cert) if cert.case == case => return Ok((theta, c2)),
            Ok(_) | Err(Sl2Error::NoAdmissibleC(_)) | Err(Sl2Error::Precondition(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Sl2Error::NoAdmissibleC(format!(
        "200 draws missed case {case:?}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{ExtKind, PrimeContext};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn test_random_sl2_has_det_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = PrimeContext::get(5, 40).unwrap();
        for kind in ExtKind::ALL {
            let t = Tower::e(c, kind);
            for _ in 0..20 {
                assert!(random_sl2(t, Level::E, &mut rng, 5).is_sl(4));
                let g = random_sl2_exact(t, Level::E, &mut rng, 5);
                assert!(g.is_exact(), "{g}");
                // det may overflow the exact range and carry N relative digits
                assert!(g.is_sl(4), "{g} det {}", g.det());
            }
        }
    }

    #[test]
    fn test_h_theta_a_examples() {
        let c = PrimeContext::get(5, 40).unwrap();
        let t = Tower::qp(c);
        let two = Padic::from_i64(c, 2);
        let g = h_theta_a_element(t, &two, &Padic::zero(c), 1).unwrap();
        assert!(g.approx_eq(&Mat2::identity(t), 0));
        let g = h_theta_a_element(t, &two, &Padic::zero(c), -1).unwrap();
        assert!(g.approx_eq(&Mat2::from_i64(t, [[-1, 0], [0, -1]]), 0));
        // 1 + 2*4 = 9; the canonical root is -3 (residue 2), the other branch is 3
        let g = h_theta_a_element(t, &two, &two, 1).unwrap();
        assert_eq!(g.e[0], Ext::from_i64(t, -3));
        let g = h_theta_a_element(t, &two, &two, -1).unwrap();
        assert_eq!(g.e[0], Ext::from_i64(t, 3));
        assert!(h_theta_a_element(t, &two, &Padic::one(c), 1).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = h_theta_a_sample(t, &two, &Padic::from_i64(c, 5), 40, &mut rng);
        assert_eq!(s.len(), 40);
        let residues: std::collections::BTreeSet<u32> = s
            .iter()
            .map(|g| g.e[0].coord(0).residue().unwrap())
            .collect();
        assert_eq!(residues.into_iter().collect::<Vec<_>>(), vec![1, 4]);
        for g in &s {
            assert!(g.is_sl(4));
        }
    }

    #[test]
    fn test_case_draws_land_in_their_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for kind in crate::padic::ExtKind::ALL {
            let tw = Tower::e(crate::padic::PrimeContext::get(5, 40).unwrap(), kind);
            for case in CaseTag::SIGMA_CASES {
                for _ in 0..3 {
                    let (th, c2) = draw_case_parameters(tw, case, &mut rng).unwrap();
                    let cert = conjugator_to_sigma(&th, c2.as_ref()).unwrap();
                    assert_eq!(cert.case, case);
                    assert!(cert.passes(), "{kind:?} {case:?}");
                }
            }
        }
    }
}
