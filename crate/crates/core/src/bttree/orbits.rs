use std::collections::HashMap;

use num_bigint::BigInt;
use serde::Serialize;

use super::{act_end, BtError, End};
use crate::padic::{sqrt, square_class, ClassLabel, Ext, ExtKind, Level, Padic, PadicError};
use crate::sl2::Mat2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum OrbitLabel {
    /// the boundary of the tree of Q_p inside that of E
    Rational,
    Class(ClassLabel),
    EndZero,
    EndInf,
}

impl std::fmt::Display for OrbitLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OrbitLabel::Rational => f.write_str("rational"),
            OrbitLabel::Class(c) => write!(f, "class {c}"),
            OrbitLabel::EndZero => f.write_str("[1 : 0]"),
            OrbitLabel::EndInf => f.write_str("[0 : 1]"),
        }
    }
}

fn qp_coordinate(x: &Ext) -> Result<&Padic, BtError> {
    x.as_padic()
        .ok_or_else(|| BtError::Precondition(format!("end coordinate {x} is not in Q_p")))
}

/// Orbit of an end of the tree of Q_p under the diagonal torus: the two fixed ends and the
/// square class of x for [1 : x].
pub fn end_orbit_label_diag(e: &End) -> Result<OrbitLabel, BtError> {
    match e {
        End::Inf => Ok(OrbitLabel::EndInf),
        End::Finite(x) => {
            let x = qp_coordinate(x)?;
            if x.is_zero() {
                return Ok(OrbitLabel::EndZero);
            }
            Ok(OrbitLabel::Class(square_class(x)?.label))
        }
    }
}

/// diag(1/d, d) with d^2 = x2/x1, carrying [1 : x1] to [1 : x2].
pub fn transitivity_witness_diag(e1: &End, e2: &End) -> Result<Mat2, BtError> {
    let (l1, l2) = (end_orbit_label_diag(e1)?, end_orbit_label_diag(e2)?);
    let (End::Finite(x1), End::Finite(x2), OrbitLabel::Class(_)) = (e1, e2, l1) else {
        return Err(BtError::Precondition("both ends need a class label".into()));
    };
    if l1 != l2 {
        return Err(BtError::Precondition(format!(
            "labels differ: {l1} vs {l2}"
        )));
    }
    let ratio = x2.div(x1)?;
    let d = sqrt(&ratio)
        .map_err(|e| BtError::InternalInvariantViolation(format!("x2/x1 has no root: {e}")))?;
    let g = Mat2::diag(d.inv()?, d);
    let image = act_end(&g, e1)?;
    if !image.same_as(e2) {
        return Err(BtError::InternalInvariantViolation(
            "witness misses the target end".into(),
        ));
    }
    Ok(g)
}

/// Orbit of an end of the tree of E under SL(2, Q_p). For x = w1 + alpha w2 with w2 != 0 the
/// alpha-part of g.x is w2 / N(a + b x), so the invariant is the class of w2 modulo norms:
/// multiplying by S (unramified) or by -alpha^2 (ramified) stays in the same orbit. The smaller
/// label of each such pair is reported.
pub fn end_orbit_label_slf(e: &End) -> Result<OrbitLabel, BtError> {
    let x = match e {
        End::Inf => return Ok(OrbitLabel::Rational),
        End::Finite(x) => x,
    };
    if x.level() == Level::K {
        return Err(PadicError::UnsupportedLevel(Level::K).into());
    }
    let w2 = x.coord(1);
    if x.level() == Level::Qp || w2.is_zero() {
        return Ok(OrbitLabel::Rational);
    }
    let tw = x.tower();
    let label = square_class(w2)?.label;
    let norm_class = match tw.kind() {
        Some(ExtKind::Unramified) => ClassLabel::S,
        _ => square_class(&-tw.s())?.label,
    };
    Ok(OrbitLabel::Class(label.min(label.times(norm_class))))
}

/// The square class of t^2 - a for [1 : t] (class 1 at infinity). Y^2 - a X^2 is preserved by
/// every [[x, y], [a y, x]] with x^2 - a y^2 = 1, so the class is constant on orbits of H_theta_a.
pub fn theta_a_invariant(a: Padic) -> impl Fn(&End) -> Option<ClassLabel> {
    move |e| match e {
        End::Inf => Some(ClassLabel::One),
        End::Finite(t) => {
            let t = t.as_padic()?;
            let q = &(t * t) - &a;
            square_class(&q).ok().map(|c| c.label)
        }
    }
}

/// Relative digits kept in the hashing key of an end.
pub const KEY_DIGITS: i64 = 4;
/// Total number of distinct ends the closure may visit.
pub const ORBIT_CELL_CAP: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum EndKey {
    Inf,
    Zero,
    Finite(i64, Vec<BigInt>),
}

fn end_key(e: &End) -> Result<EndKey, PadicError> {
    let x = match e {
        End::Inf => return Ok(EndKey::Inf),
        End::Finite(x) => x,
    };
    if x.is_zero() {
        return Ok(EndKey::Zero);
    }
    let shift = x.defect().floor() as i64;
    let mut digits = Vec::new();
    for c in x.coords() {
        let c = c.shift(-shift).trunc_below(KEY_DIGITS)?;
        digits.push(
            c.as_exact_integer()
                .expect("truncation is exact and integral"),
        );
    }
    Ok(EndKey::Finite(shift, digits))
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn push(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.parent.len() - 1
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.parent[a.max(b)] = a.min(b);
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitExperiment {
    /// classes among the input ends after closure (an upper bound on the true orbit count)
    pub class_count: usize,
    /// class count after each round
    pub history: Vec<usize>,
    /// (representative, member) pairs of input indices found in one class
    pub merges: Vec<(usize, usize)>,
    /// group actions abandoned for lack of precision
    pub skipped: usize,
    /// identifications refused because the invariant differed
    pub conflicts: usize,
    /// distinct ends visited
    pub cells: usize,
    pub cap_reached: bool,
}

/// Labels an end, e.g. by the square class of its coordinate.
pub type EndInvariant<'a> = &'a dyn Fn(&End) -> Option<ClassLabel>;

/// Union-find closure of `ends` under the generators and their inverses. Ends are hashed by
/// their leading KEY_DIGITS relative digits; each round applies every generator to the ends
/// discovered in the previous round. When `invariant` is given, identifications between ends
/// with different invariants are refused and counted.
pub fn orbit_experiment(
    generators: &[Mat2],
    ends: &[End],
    steps: usize,
    invariant: Option<EndInvariant>,
) -> Result<OrbitExperiment, BtError> {
    let mut gens = Vec::with_capacity(2 * generators.len());
    for g in generators {
        gens.push(g.clone());
        gens.push(g.inv()?);
    }
    let mut uf = UnionFind { parent: Vec::new() };
    let mut index: HashMap<EndKey, usize> = HashMap::new();
    let mut inv: Vec<Option<ClassLabel>> = Vec::new();
    let mut skipped = 0;
    let mut conflicts = 0;
    let mut roots_of_input = Vec::with_capacity(ends.len());
    let mut frontier = Vec::new();
    let label = |e: &End| invariant.and_then(|f| f(e));
    for e in ends {
        let key = end_key(e).map_err(BtError::from)?;
        let id = match index.get(&key) {
            Some(&id) => id,
            None => {
                let id = uf.push();
                index.insert(key, id);
                inv.push(label(e));
                frontier.push((id, e.clone()));
                id
            }
        };
        roots_of_input.push(id);
    }
    let count = |uf: &mut UnionFind| {
        let mut r: Vec<usize> = roots_of_input.iter().map(|&i| uf.find(i)).collect();
        r.sort_unstable();
        r.dedup();
        r.len()
    };
    let mut history = vec![count(&mut uf)];
    let mut cap_reached = false;
    for _ in 0..steps {
        let mut next = Vec::new();
        for (id, e) in &frontier {
            for g in &gens {
                let image = match act_end(g, e) {
                    Ok(x) => x,
                    Err(BtError::Padic(_)) => {
                        skipped += 1;
                        continue;
                    }
                    Err(err) => return Err(err),
                };
                let key = match end_key(&image) {
                    Ok(k) => k,
                    Err(_) => {
                        skipped += 1;
                        continue;
                    }
                };
                let target = match index.get(&key) {
                    Some(&t) => t,
                    None => {
                        if uf.parent.len() >= ORBIT_CELL_CAP {
                            cap_reached = true;
                            continue;
                        }
                        let t = uf.push();
                        index.insert(key, t);
                        inv.push(label(&image));
                        next.push((t, image));
                        t
                    }
                };
                match (inv[*id], inv[target]) {
                    (Some(a), Some(b)) if a != b => conflicts += 1,
                    _ => uf.union(*id, target),
                }
            }
        }
        history.push(count(&mut uf));
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    let mut merges = Vec::new();
    let mut rep_of_root: HashMap<usize, usize> = HashMap::new();
    for (i, &id) in roots_of_input.iter().enumerate() {
        let r = uf.find(id);
        match rep_of_root.get(&r) {
            Some(&j) => merges.push((j, i)),
            None => {
                rep_of_root.insert(r, i);
            }
        }
    }
    Ok(OrbitExperiment {
        class_count: rep_of_root.len(),
        history,
        merges,
        skipped,
        conflicts,
        cells: uf.parent.len(),
        cap_reached,
    })
}
