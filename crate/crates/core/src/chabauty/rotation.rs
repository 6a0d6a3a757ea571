use crate::bttree::TreeVertex;
use crate::padic::{Ext, Level, Padic, Tower};
use crate::sl2::Mat2;

/// The rotation M = U L with L = [[1, 0], [alpha, 1]] and U = [[1/(2 alpha), 1], [0, 2 alpha]],
/// so M = [[1/(2 alpha) + alpha, 1], [2 alpha^2, 2 alpha]] and det M = 1. After conjugating by M
/// the diagonal subgroup of SL(2,E) translates along a line that meets the rotated T_F only in a
/// vertex or an edge.
#[derive(Clone, Debug)]
pub struct RotationContext {
    pub m_rot: Mat2,
    pub m_inv: Mat2,
    pub base: TreeVertex,
}

impl RotationContext {
    pub fn new(tower: &'static Tower) -> RotationContext {
        let al = Ext::alpha(tower);
        let two_a = al.scale(&Padic::from_i64(tower.ctx, 2));
        let l = Mat2::lower(tower, al.clone());
        let u = Mat2::new(
            two_a.inv().expect("alpha is a unit times a root"),
            Ext::one(tower),
            Ext::zero(tower),
            two_a,
        );
        let m_rot = u.mul(&l);
        let m_inv = m_rot.inv_sl();
        RotationContext {
            m_rot,
            m_inv,
            base: TreeVertex::base(tower, Level::E),
        }
    }

    /// The two factors, for re-checking the construction.
    pub fn factors(&self) -> (Mat2, Mat2) {
        let tw = self.m_rot.tower();
        let al = Ext::alpha(tw);
        let two_a = al.scale(&Padic::from_i64(tw.ctx, 2));
        let u = Mat2::new(two_a.inv().unwrap(), Ext::one(tw), Ext::zero(tw), two_a);
        (u, Mat2::lower(tw, al))
    }

    pub fn rotate(&self, h: &Mat2) -> Mat2 {
        self.m_rot.mul(h).mul(&self.m_inv)
    }
}

/// M h M^-1 for h in SL(2,F).
pub fn rotated_subgroup_element(ctx: &RotationContext, h: &Mat2) -> Mat2 {
    ctx.rotate(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bttree::{act_end, End};
    use crate::padic::{ExtKind, PrimeContext};
    use crate::sl2::random_sl2_exact;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// The entries of M [[a, b], [c, d]] M^-1 written out in a, b, c, d and alpha.
    fn closed_form(tw: &'static Tower, h: &Mat2) -> Mat2 {
        let [a, b, c, d] = h.e.clone();
        let al = Ext::alpha(tw);
        let a2 = &al * &al;
        let a4 = &a2 * &a2;
        let k = |n: i64| Ext::from_i64(tw, n);
        let r = &Ext::from_i64(tw, 2).mul(&al).inv().unwrap() + &al;
        let e11 = &(&(&a + &(&k(2) * &(&a * &a2))) - &(&k(2) * &(&d * &a2)))
            + &(&al * &(&(&(&k(2) * &c) - &b) - &(&k(2) * &(&b * &a2))));
        let e12 = &(&r * &(&(&(&b * &r) + &d) - &a)) - &c;
        let e21 = &(&(&k(4) * &(&c * &a2)) - &(&k(4) * &(&b * &a4)))
            + &(&al * &(&(&k(4) * &(&a * &a2)) - &(&k(4) * &(&d * &a2))));
        let e22 = &(&(&(-(&k(2) * &(&a * &a2))) + &(&k(2) * &(&d * &a2))) + &d)
            + &(&al * &(&(&b + &(&k(2) * &(&b * &a2))) - &(&k(2) * &c)));
        Mat2::new(e11, e12, e21, e22)
    }

    #[test]
    fn test_factors_move_the_right_ends() {
        for kind in ExtKind::ALL {
            let tw = Tower::e(PrimeContext::get(5, 40).unwrap(), kind);
            let rc = RotationContext::new(tw);
            let (u, l) = rc.factors();
            assert!(u.mul(&l).approx_eq(&rc.m_rot, 0));
            assert!(rc.m_rot.det().sub(&Ext::one(tw)).is_zero());
            let al = Ext::alpha(tw);
            assert!(act_end(&l, &End::Finite(Ext::zero(tw)))
                .unwrap()
                .same_as(&End::Finite(al.clone())));
            let two_a = al.scale(&Padic::from_i64(tw.ctx, 2));
            assert!(act_end(&u, &End::Inf).unwrap().same_as(&End::Finite(two_a)));
        }
    }

    #[test]
    fn test_examples_against_closed_form() {
        let tw = Tower::e(PrimeContext::get(5, 40).unwrap(), ExtKind::RamifiedP);
        let rc = RotationContext::new(tw);
        let id = Mat2::identity(tw);
        assert!(rotated_subgroup_element(&rc, &id).approx_eq(&id, 4));
        for h in [
            Mat2::from_i64(tw, [[1, 1], [0, 1]]),
            Mat2::from_i64(tw, [[0, 1], [-1, 0]]),
        ] {
            assert!(rotated_subgroup_element(&rc, &h).approx_eq(&closed_form(tw, &h), 4));
        }
    }

    #[test]
    fn test_random_against_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in ExtKind::ALL {
            let tw = Tower::e(PrimeContext::get(7, 40).unwrap(), kind);
            let rc = RotationContext::new(tw);
            for _ in 0..100 {
                let h = random_sl2_exact(tw, Level::Qp, &mut rng, 4);
                assert!(rotated_subgroup_element(&rc, &h).approx_eq(&closed_form(tw, &h), 4));
            }
        }
    }
}
