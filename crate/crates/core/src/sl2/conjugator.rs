use serde::Serialize;

use super::{decide_zero, Family, Gamma, Involution, Mat2, Sl2Error, SLACK};
use crate::bttree::End;
use crate::padic::{
    sqrt_in_tower, square_class, ClassLabel, Ext, ExtKind, Level, Padic, PrimeContext, Tower,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CaseTag {
    C1,
    C2,
    C4,
    #[serde(rename = "C5_1")]
    C51,
    #[serde(rename = "C5_2")]
    C52,
    #[serde(rename = "C5_3")]
    C53,
    #[serde(rename = "C5_4a")]
    C54a,
    #[serde(rename = "C5_4b")]
    C54b,
    #[serde(rename = "C5_4c")]
    C54c,
    /// conjugation of theta_a to iota_diag(1,-1)
    Diag,
}

impl CaseTag {
    pub const SIGMA_CASES: [CaseTag; 9] = [
        CaseTag::C1,
        CaseTag::C2,
        CaseTag::C4,
        CaseTag::C51,
        CaseTag::C52,
        CaseTag::C53,
        CaseTag::C54a,
        CaseTag::C54b,
        CaseTag::C54c,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Target {
    Sigma,
    Diag,
}

#[derive(Clone, Debug)]
pub struct ConjugatorCertificate {
    pub b: Mat2,
    pub c: Ext,
    pub case: CaseTag,
    pub target: Target,
    /// the c2 used by the F1A dispatch
    pub c2: Option<Padic>,
    /// relative defect of A sigma(B) - c B (target Sigma) or C^-1 A C - c diag(1,-1) (Diag)
    pub residual: f64,
}

impl ConjugatorCertificate {
    pub fn level(&self) -> Level {
        self.b.level().max(self.c.level())
    }

    /// True when H_theta is conjugate to SL(2,Q_p) inside GL(2,E).
    pub fn conjugate_to_sl2_qp(&self) -> bool {
        self.target == Target::Sigma && self.level() <= Level::E
    }

    pub fn passes(&self) -> bool {
        self.residual >= (self.b.precision() - SLACK) as f64
    }
}

fn certify(
    theta: &Involution,
    b: Mat2,
    c: Ext,
    case: CaseTag,
    c2: Option<Padic>,
) -> Result<ConjugatorCertificate, Sl2Error> {
    if b.det().is_zero() {
        return Err(Sl2Error::NoAdmissibleC(format!(
            "B is singular in case {case:?}"
        )));
    }
    let residual = theta.a.mul(&b.sigma()).rel_defect(&b.scale(&c));
    Ok(ConjugatorCertificate {
        b,
        c,
        case,
        target: Target::Sigma,
        c2,
        residual,
    })
}

/// sigma-fixed square root c1 of c1sq, extending E by beta when needed.
fn sigma_fixed_root(c1sq: &Padic, tower: &'static Tower) -> Result<Ext, Sl2Error> {
    if decide_zero(c1sq, "c1^2")? {
        return Err(Sl2Error::NoAdmissibleC("c1^2 = 0".into()));
    }
    let cls = square_class(c1sq)?;
    if ExtKind::for_class(cls.label) == tower.kind() {
        return Err(Sl2Error::NoAdmissibleC(format!(
            "c1^2 = {c1sq} lies in the class of alpha^2"
        )));
    }
    Ok(sqrt_in_tower(c1sq, tower)?)
}

fn f1a_case(
    theta: &Involution,
    z: &Ext,
    y: &Padic,
    c2: &Padic,
) -> Result<ConjugatorCertificate, Sl2Error> {
    let tw = z.tower();
    let ctx = tw.ctx;
    let (z1, z2) = (z.coord(0).clone(), z.coord(1).clone());
    let s = tw.s().clone();
    let al = Ext::alpha(tw);
    let k = |x: &Padic| Ext::from_padic(tw, x.clone());
    let one = Ext::one(tw);
    let c2e = k(c2);
    let z1e = k(&z1);
    let z2e = k(&z2);
    let ye = k(y);

    let d = &(&z2 * &z2) - &(c2 * c2);
    if !decide_zero(&d, "z2^2 - c2^2")? {
        // Case 4
        let c1sq = &(&(&z1 * &z1) + y) - &(&s * &d);
        let c1 = sigma_fixed_root(&c1sq, tw)?;
        let inv_d = (&z2e - &c2e).inv()?;
        let b = Mat2::new(
            &ye * &inv_d,
            &(&(&z1e + &c1) * &inv_d) + &al,
            &(&(&c1 - &z1e) * &inv_d) + &al,
            inv_d.clone(),
        );
        let c = &c1 + &(&al * &c2e);
        return certify(theta, b, c, CaseTag::C4, Some(c2.clone()));
    }
    if !decide_zero(y, "y")? {
        let c1sq = &(&z1 * &z1) + y;
        let c1 = sigma_fixed_root(&c1sq, tw)?;
        let c = &c1 + &(&al * &c2e);
        let yi = ye.inv()?;
        let zp = &z1e + &c1;
        let zm = &z1e - &c1;
        if decide_zero(&z2, "z2")? {
            let b = Mat2::new(&al * &zm, one.clone(), al.clone(), -(&zm * &yi));
            return certify(theta, b, c, CaseTag::C53, Some(c2.clone()));
        }
        if decide_zero(&(&z2 - c2), "z2 - c2")? {
            let sz = Ext::from_padic(tw, &s * &(&z2 + c2));
            let b = Mat2::new(
                &(-(&(&sz * &zp) * &yi)) + &al,
                &(&sz + &zp) + &(&al * &zm),
                -(&(&al * &zp) * &yi),
                &one + &al,
            );
            return certify(theta, b, c, CaseTag::C51, Some(c2.clone()));
        }
        // z2 = -c2 != 0. Both 2 z2 terms enter with a plus sign; with minus signs
        // A sigma(B) - c B is off by 4 alpha z2 in two entries.
        let zpi = zp.inv()?;
        let two_z2 = z2e.scale(&Padic::from_i64(ctx, 2));
        let b = Mat2::new(
            &one + &(&(&al * &two_z2) * &zpi),
            &zp + &(&al * &(&zm + &two_z2)),
            zpi,
            &one + &al,
        );
        return certify(theta, b, c, CaseTag::C52, Some(c2.clone()));
    }
    // Case 5.4: y = 0. Normalize A to [[x, 0], [w, 1]] with x = -z/sigma(z), w = -1/sigma(z);
    // the certificate for A itself then has c = -sigma(z).
    let sz = z.sigma();
    let szi = sz.inv()?;
    let x = -(z * &szi);
    let w = -szi;
    let c = -sz;
    let z1zero = decide_zero(&z1, "z1")?;
    let z2zero = decide_zero(&z2, "z2")?;
    let half = Padic::ratio(ctx, 1, 2);
    let (b, tag) = match (z1zero, z2zero) {
        (false, false) => {
            let (x1, x2) = (k(x.coord(0)), k(x.coord(1)));
            let x2i = x2.inv()?;
            let w2 = k(w.coord(1));
            (
                Mat2::new(
                    &(&(&one + &x1) * &x2i) + &al,
                    Ext::zero(tw),
                    &(&al * &w2) * &x2i,
                    one.clone(),
                ),
                CaseTag::C54a,
            )
        }
        (true, false) => {
            let w2 = k(w.coord(1));
            (
                Mat2::new(
                    one.clone(),
                    Ext::zero(tw),
                    (&al * &w2).scale(&half),
                    one.clone(),
                ),
                CaseTag::C54b,
            )
        }
        (false, true) => {
            let hw = (&al * &k(w.coord(0))).scale(&half);
            (
                Mat2::new(al.clone(), al.clone(), &one - &hw, -(&one + &hw)),
                CaseTag::C54c,
            )
        }
        (true, true) => return Err(Sl2Error::Precondition("z = 0 with y = 0".into())),
    };
    certify(theta, b, c, tag, Some(c2.clone()))
}

fn c2_candidates(ctx: &'static PrimeContext) -> Vec<Padic> {
    let mut out = vec![Padic::zero(ctx)];
    for k in 1..=ctx.p as i64 {
        out.push(Padic::from_i64(ctx, k));
        out.push(Padic::from_i64(ctx, -k));
    }
    out
}

/// Certificate B with A sigma(B) = c B, following the case analysis for gamma = sigma.
///
/// For the family with A = [[z, y], [1, -sigma(z)]] the free parameter c2 is `c2_choice` when
/// given; otherwise 0, 1, -1, 2, -2, ... up to p are tried until one admits a sigma-fixed c1.
pub fn conjugator_to_sigma(
    theta: &Involution,
    c2_choice: Option<&Padic>,
) -> Result<ConjugatorCertificate, Sl2Error> {
    if theta.gamma != Gamma::Sigma {
        return Err(Sl2Error::Precondition(
            "conjugator_to_sigma needs gamma = sigma".into(),
        ));
    }
    match &theta.family {
        Family::F1B { x } => {
            let tw = x.tower();
            let (x1, x2) = (x.coord(0), x.coord(1));
            let one = Ext::one(tw);
            let c = one.clone().at_level(Level::E);
            if decide_zero(x2, "x2")? {
                // x = 1 needs B = Id; x = -1 takes B = diag(alpha, 1)
                let b = if decide_zero(&(x1 - &Padic::one(tw.ctx)), "x1 - 1")? {
                    Mat2::identity(tw)
                } else {
                    Mat2::diag(Ext::alpha(tw), one)
                };
                certify(theta, b, c, CaseTag::C1, None)
            } else {
                let b11 =
                    &Ext::from_padic(tw, (x1 + &Padic::one(tw.ctx)).div(x2)?) + &Ext::alpha(tw);
                certify(theta, Mat2::diag(b11, one), c, CaseTag::C2, None)
            }
        }
        Family::F1A { z, y } => {
            let ctx = z.ctx();
            let cands = match c2_choice {
                Some(c2) => vec![c2.clone()],
                None => c2_candidates(ctx),
            };
            let mut last = Sl2Error::NoAdmissibleC("no candidate tried".into());
            for c2 in &cands {
                match f1a_case(theta, z, y, c2) {
                    Ok(cert) => return Ok(cert),
                    Err(e @ Sl2Error::NoAdmissibleC(_)) => last = e,
                    Err(e) => return Err(e),
                }
            }
            Err(last)
        }
        Family::F2 { .. } => unreachable!("F2 has gamma = id"),
    }
}

/// q with A sigma(X) = q X, if X is such a matrix.
pub fn conj_cond_check(x: &Mat2, theta: &Involution) -> Result<Option<Ext>, Sl2Error> {
    if theta.gamma != Gamma::Sigma {
        return Err(Sl2Error::Precondition(
            "conj_cond_check needs gamma = sigma".into(),
        ));
    }
    if x.det().is_zero() {
        return Err(Sl2Error::Precondition("X must be invertible".into()));
    }
    let l = theta.a.mul(&x.sigma());
    let i = (0..4)
        .min_by(|&i, &j| x.e[i].defect().partial_cmp(&x.e[j].defect()).unwrap())
        .unwrap();
    let q = l.e[i].div(&x.e[i])?;
    Ok(l.approx_eq(&x.scale(&q), SLACK).then_some(q))
}

/// The ends [1 : +-sqrt(a)] fixed by A = [[0,1],[a,0]], over K_a = Q_p(sqrt(a)).
pub fn fixed_ends(theta: &Involution) -> Result<(End, End), Sl2Error> {
    let Family::F2 { a } = &theta.family else {
        return Err(Sl2Error::Precondition(
            "fixed_ends needs the family F2".into(),
        ));
    };
    let r = sqrt_a(a, theta.tower())?;
    let check = &r * &r - Ext::from_padic(r.tower(), a.clone());
    if !check.is_zero() {
        return Err(Sl2Error::Precondition("eigen-check failed".into()));
    }
    let one = Ext::one(r.tower());
    // A (1, r) = (r, a) = r (1, r)
    let (top, bottom) = theta.a.apply(&(one.clone(), r.clone()));
    let prop = &(&top * &r) - &bottom;
    if !prop.is_zero() {
        return Err(Sl2Error::Precondition(
            "A(1, sqrt a) is not proportional to (1, sqrt a)".into(),
        ));
    }
    Ok((End::Finite(r.clone()), End::Finite(-r)))
}

/// sqrt(a) in the tower over which theta lives if possible, else in Q_p(sqrt a).
fn sqrt_a(a: &Padic, tower: &'static Tower) -> Result<Ext, Sl2Error> {
    let cls = square_class(a)?;
    let tw = match ExtKind::for_class(cls.label) {
        None => tower,
        Some(kind) if tower.kind() == Some(kind) => tower,
        Some(kind) => Tower::e(tower.ctx, kind),
    };
    let r = sqrt_in_tower(a, tw)?;
    Ok(if cls.label == ClassLabel::One {
        r
    } else {
        r.at_level(Level::E)
    })
}

/// C = [[1, -1/sqrt a], [sqrt a, 1]] with C^-1 A C = sqrt(a) diag(1, -1).
pub fn conjugator_to_diagonal(
    ctx: &'static PrimeContext,
    a: &Padic,
) -> Result<ConjugatorCertificate, Sl2Error> {
    if a.is_zero() {
        return Err(Sl2Error::Precondition("a must be nonzero".into()));
    }
    let r = sqrt_a(a, Tower::qp(ctx))?;
    let tw = r.tower();
    let theta = Involution::f2(tw, a.clone())?;
    let one = Ext::one(tw);
    let cm = Mat2::new(one.clone(), -r.inv()?, r.clone(), one.clone());
    let lhs = cm.inv()?.mul(&theta.a).mul(&cm);
    let rhs = Mat2::diag(r.clone(), -&r);
    let residual = lhs.rel_defect(&rhs);
    Ok(ConjugatorCertificate {
        b: cm,
        c: r,
        case: CaseTag::Diag,
        target: Target::Diag,
        c2: None,
        residual,
    })
}

/// g in B SL(2, K^sigma) B^-1: the entries of B^-1 g B are sigma-fixed at precision.
pub fn h_theta_sigma_membership(cert: &ConjugatorCertificate, g: &Mat2) -> Result<bool, Sl2Error> {
    if cert.target != Target::Sigma {
        return Err(Sl2Error::Precondition(
            "membership needs a certificate targeting sigma".into(),
        ));
    }
    let h = cert.b.inv()?.mul(g).mul(&cert.b);
    let scale = h.defect();
    let tol = (g.precision() - SLACK) as f64;
    Ok(h.e.iter().all(|x| {
        let d = x - &x.sigma();
        d.is_exact_zero() || d.defect() - scale >= tol
    }))
}
