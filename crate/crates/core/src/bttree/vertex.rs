use std::collections::{HashSet, VecDeque};
use std::fmt;

use super::BtError;
use crate::padic::{Ext, Level, Padic, Tower};
use crate::sl2::Mat2;

/// Lattice class [[w^k, u], [0, 1]] with u reduced modulo w^k, w the uniformizer of the level.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TreeVertex {
    pub k: i64,
    pub u: Ext,
    pub level: Level,
}

/// Tower that carries the vertex coordinates of the tree at `level`.
pub(crate) fn base_tower(tower: &'static Tower, level: Level) -> &'static Tower {
    match level {
        Level::Qp => Tower::qp(tower.ctx),
        _ => tower.e_tower(),
    }
}

/// Ramification index of the tree level over Q_p.
pub(crate) fn level_e(tower: &'static Tower, level: Level) -> i64 {
    match level {
        Level::Qp => 1,
        _ => tower.e_index() as i64,
    }
}

/// Valuation in units of the level's uniformizer; None for zero.
pub(crate) fn lv(x: &Ext, level: Level, tower: &'static Tower) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    Some((x.valuation() * level_e(tower, level) as f64).round() as i64)
}

fn rehome(x: &Ext, tower: &'static Tower, level: Level) -> Ext {
    Ext::from_coords(tower, level, x.coords().clone())
}

impl TreeVertex {
    /// The base vertex x0 = [O + O].
    pub fn base(tower: &'static Tower, level: Level) -> TreeVertex {
        let tw = base_tower(tower, level);
        TreeVertex {
            k: 0,
            u: Ext::zero(tw).at_level(level),
            level,
        }
    }

    pub fn tower(&self) -> &'static Tower {
        self.u.tower()
    }

    pub fn uniformizer(&self) -> Ext {
        Ext::uniformizer(self.tower(), self.level)
    }

    /// [[w^k, u], [0, 1]]
    pub fn matrix(&self) -> Mat2 {
        let tw = self.tower();
        let wk = self
            .uniformizer()
            .powi(self.k)
            .expect("uniformizer is invertible");
        Mat2::new(wk, self.u.clone(), Ext::zero(tw), Ext::one(tw))
    }

    pub fn type_parity(&self) -> i64 {
        self.k.rem_euclid(2)
    }

    /// The p + 1 (or p^2 + 1) adjacent vertices.
    pub fn neighbors(&self) -> Vec<TreeVertex> {
        let tw = self.tower();
        let ctx = tw.ctx;
        let p = ctx.p as i64;
        let wk = self.uniformizer().powi(self.k).unwrap();
        let reps: Vec<Ext> = if self.level == Level::E && tw.e_index() == 1 {
            (0..p * p)
                .map(|i| Ext::new_e(tw, Padic::from_i64(ctx, i / p), Padic::from_i64(ctx, i % p)))
                .collect()
        } else {
            (0..p)
                .map(|i| Ext::from_i64(tw, i).at_level(self.level))
                .collect()
        };
        let mut out: Vec<TreeVertex> = reps
            .iter()
            .map(|r| {
                let u = (&self.u + &(&wk * r))
                    .trunc_below_local(self.k + 1)
                    .unwrap();
                TreeVertex {
                    k: self.k + 1,
                    u: rehome(&u, tw, self.level),
                    level: self.level,
                }
            })
            .collect();
        let u = self.u.trunc_below_local(self.k - 1).unwrap();
        out.push(TreeVertex {
            k: self.k - 1,
            u: rehome(&u, tw, self.level),
            level: self.level,
        });
        out
    }

    /// Vertex of T_E lying on the embedded tree of Q_p: u has no alpha part and k is a multiple
    /// of the ramification index.
    pub fn in_subtree_f(&self) -> bool {
        self.u.coord(1).is_zero() && self.k.rem_euclid(level_e(self.tower(), self.level)) == 0
    }

    /// On the subdivided copy of T_F (members and the midpoints of its edges).
    pub fn on_subdivided_f(&self) -> bool {
        self.u.coord(1).is_zero()
    }

    /// The same lattice class as a vertex of T_F, for members of the subtree.
    pub fn to_f_vertex(&self) -> Option<TreeVertex> {
        if !self.in_subtree_f() {
            return None;
        }
        let e = level_e(self.tower(), self.level);
        let tw = Tower::qp(self.tower().ctx);
        Some(TreeVertex {
            k: self.k / e,
            u: Ext::from_padic(tw, self.u.coord(0).clone()),
            level: Level::Qp,
        })
    }

    /// Vertex of T_E corresponding to a vertex of T_F.
    pub fn embed(&self, e_tower: &'static Tower) -> TreeVertex {
        assert_eq!(self.level, Level::Qp);
        let e = e_tower.e_index() as i64;
        TreeVertex {
            k: self.k * e,
            u: Ext::from_padic(e_tower.e_tower(), self.u.coord(0).clone()).at_level(Level::E),
            level: Level::E,
        }
    }
}

impl fmt::Debug for TreeVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.k, self.u)
    }
}

impl fmt::Display for TreeVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Normal form (k, u mod w^k) of the lattice class spanned by the columns of M.
pub fn canonical_vertex(m: &Mat2, level: Level) -> Result<TreeVertex, BtError> {
    let tw = m.tower();
    if level == Level::K || m.level() > level {
        return Err(BtError::Padic(crate::padic::PadicError::UnsupportedLevel(
            m.level().max(level),
        )));
    }
    let det = m.det();
    if det.is_zero() {
        return Err(BtError::SingularMatrix);
    }
    let (b, d) = (&m.e[1], &m.e[3]);
    let (a, c) = (&m.e[0], &m.e[2]);
    let vd = lv(d, level, tw);
    let vc = lv(c, level, tw);
    // pivot on the bottom entry of smaller valuation
    let (top, bot, vbot) = match (vd, vc) {
        (Some(x), Some(y)) if x <= y => (b, d, x),
        (Some(x), None) => (b, d, x),
        (_, Some(y)) => (a, c, y),
        (None, None) => return Err(BtError::SingularMatrix),
    };
    let k = lv(&det, level, tw).unwrap() - 2 * vbot;
    let u = top
        .div(bot)?
        .at_level(level.max(top.level()).max(bot.level()));
    let u = u.at_level(level).trunc_below_local(k)?;
    let base = base_tower(tw, level);
    Ok(TreeVertex {
        k,
        u: rehome(&u, base, level),
        level,
    })
}

/// Path length between two vertices of the same tree.
pub fn distance(v1: &TreeVertex, v2: &TreeVertex) -> i64 {
    assert_eq!(v1.level, v2.level, "vertices of different trees");
    let dk = v2.k - v1.k;
    let du = &v2.u - &v1.u;
    let m = match lv(&du, v1.level, v1.tower()) {
        Some(x) => (x - v1.k).min(dk).min(0),
        None => dk.min(0),
    };
    dk - 2 * m
}

/// g . v; the result lives in the tree of the larger of the two levels.
pub fn act_vertex(g: &Mat2, v: &TreeVertex) -> Result<TreeVertex, BtError> {
    let level = v.level.max(g.level());
    canonical_vertex(&g.mul(&v.matrix()), level)
}

/// All vertices within `radius` of `center`.
pub fn ball(center: &TreeVertex, radius: i64) -> Vec<TreeVertex> {
    let mut seen: HashSet<TreeVertex> = HashSet::new();
    let mut out = vec![center.clone()];
    let mut queue = VecDeque::from([(center.clone(), 0)]);
    seen.insert(center.clone());
    while let Some((v, d)) = queue.pop_front() {
        if d == radius {
            continue;
        }
        for w in v.neighbors() {
            if seen.insert(w.clone()) {
                out.push(w.clone());
                queue.push_back((w, d + 1));
            }
        }
    }
    out
}

pub fn subtree_membership_tf(v: &TreeVertex) -> bool {
    v.in_subtree_f()
}

/// Nearest vertex of the embedded T_F. The ball u + w^k O either meets Q_p (then v itself or,
/// for an edge midpoint, the endpoint with smaller k is returned) or the nearest member is the
/// smallest enclosing ball that meets Q_p.
pub fn project_to_subtree(v: &TreeVertex, radius: i64) -> Result<TreeVertex, BtError> {
    let tw = v.tower();
    let e = level_e(tw, v.level);
    let alpha_part = Ext::new_e(tw, Padic::zero(tw.ctx), v.u.coord(1).clone());
    let reach = lv(&alpha_part, v.level, tw).map_or(v.k, |x| x.min(v.k));
    let k = reach - reach.rem_euclid(e);
    if v.k - k > radius {
        return Err(BtError::ProjectionRadiusExceeded(radius));
    }
    let u = v.u.trunc_below_local(k)?;
    Ok(TreeVertex {
        k,
        u: rehome(&u, tw, v.level),
        level: v.level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{ExtKind, PrimeContext};

    fn ctx() -> &'static crate::padic::PrimeContext {
        PrimeContext::get(5, 40).unwrap()
    }

    #[test]
    fn test_canonical_examples() {
        let qp = Tower::qp(ctx());
        let base = TreeVertex::base(qp, Level::Qp);
        assert_eq!(
            canonical_vertex(&Mat2::identity(qp), Level::Qp).unwrap(),
            base
        );
        let v = canonical_vertex(&Mat2::from_i64(qp, [[5, 0], [0, 1]]), Level::Qp).unwrap();
        assert_eq!((v.k, v.u.is_exact_zero()), (1, true));
        let v = canonical_vertex(&Mat2::from_i64(qp, [[1, 0], [1, 1]]), Level::Qp).unwrap();
        assert_eq!(v, base);
        assert!(matches!(
            canonical_vertex(&Mat2::from_i64(qp, [[1, 2], [2, 4]]), Level::Qp),
            Err(BtError::SingularMatrix)
        ));
    }

    #[test]
    fn test_distance_examples() {
        let qp = Tower::qp(ctx());
        let base = TreeVertex::base(qp, Level::Qp);
        let v1 = canonical_vertex(&Mat2::from_i64(qp, [[5, 0], [0, 1]]), Level::Qp).unwrap();
        let v2 = canonical_vertex(&Mat2::from_i64(qp, [[25, 0], [0, 1]]), Level::Qp).unwrap();
        assert_eq!(distance(&base, &base), 0);
        assert_eq!(distance(&base, &v1), 1);
        assert_eq!(distance(&base, &v2), 2);
        for w in base.neighbors() {
            assert_eq!(distance(&base, &w), 1);
            assert_eq!(distance(&w, &base), 1);
        }
        assert_eq!(base.neighbors().len(), 6);
    }

    #[test]
    fn test_ball_sizes() {
        let c = ctx();
        let ram = Tower::e(c, ExtKind::RamifiedP);
        let un = Tower::e(c, ExtKind::Unramified);
        assert_eq!(
            ball(&TreeVertex::base(ram, Level::E), 2).len(),
            1 + 6 + 6 * 5
        );
        assert_eq!(ball(&TreeVertex::base(un, Level::E), 1).len(), 1 + 26);
    }

    #[test]
    fn test_subtree_examples() {
        let c = ctx();
        let ram = Tower::e(c, ExtKind::RamifiedP);
        let un = Tower::e(c, ExtKind::Unramified);
        assert!(subtree_membership_tf(&TreeVertex::base(ram, Level::E)));
        let mid = canonical_vertex(&Mat2::diag(Ext::alpha(ram), Ext::one(ram)), Level::E).unwrap();
        assert_eq!(mid.k, 1);
        assert!(!subtree_membership_tf(&mid));
        let off = TreeVertex {
            k: 0,
            u: Ext::alpha(un),
            level: Level::E,
        };
        let off = canonical_vertex(&off.matrix(), Level::E).unwrap();
        // alpha is integral, so (0, alpha) is the base vertex; take (1, alpha) instead
        assert_eq!(off, TreeVertex::base(un, Level::E));
        let v = canonical_vertex(
            &Mat2::new(
                Ext::from_i64(un, 5),
                Ext::alpha(un),
                Ext::zero(un),
                Ext::one(un),
            ),
            Level::E,
        )
        .unwrap();
        assert!(!subtree_membership_tf(&v));
        let pr = project_to_subtree(&v, 12).unwrap();
        assert_eq!(pr, TreeVertex::base(un, Level::E));
        assert_eq!(distance(&v, &pr), 1);
    }
}
