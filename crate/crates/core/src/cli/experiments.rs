use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, GammaArg, LimitFamily, TreeLevel};
use super::report::Report;
use super::Command;
use crate::archimedean::{verify_real_convergence, RealTarget};
use crate::bttree::{
    act_end, end_orbit_label_diag, end_orbit_label_slf, orbit_experiment, theta_a_invariant,
    transitivity_witness_diag, tree_dot, End, OrbitLabel, TreeVertex,
};
use crate::chabauty::{
    boundary_disjointness_check, condition2_sweep, htheta_limit_sequence,
    limit_sequence_for_target, polar_decompose, verify_convergence, ConvergenceReport,
    ConvergenceSetup, LimitGroupDescriptor, LimitTarget, PolarContext, PolarPair, RotationContext,
};
use crate::padic::{square_class, ClassLabel, Ext, ExtKind, Level, Padic, PrimeContext, Tower};
use crate::sl2::{
    conjugator_to_diagonal, conjugator_to_sigma, draw_case_parameters, fixed_point_test,
    h_theta_a_sample, h_theta_sigma_membership, random_sl2, random_sl2_exact, verify_involution,
    CaseTag, ConjugatorCertificate, Involution, Mat2, SLACK,
};

type Res<T> = Result<T, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Independent stream `stream` of the seeded generator, so parallel work items draw the same
/// numbers whatever the scheduling.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub(super) fn claim(cmd: Command, cfg: &ExperimentConfig) -> &'static str {
    match cmd {
        Command::Classify => {
            "an involution of SL(2,E) is iota_A composed with id or sigma, lies in one of three \
             families, and carries a certificate conjugating its fixed group to a standard one"
        }
        Command::FixedGroup => {
            "conjugating SL(2) of the sigma-fixed field by the certificate gives elements fixed \
             by the involution, and the H_theta_a samples are fixed by theta_a"
        }
        Command::Orbits => {
            "the diagonal torus has 6 orbits on the boundary of the tree of Q_p, SL(2,Q_p) has at \
             most 5 on that of E, and H_theta_a has at most 8"
        }
        Command::Polar => {
            "every g factors as k a_i^n h with h in H, a_i one of finitely many hyperbolic \
             elements and k moving the base vertex a bounded distance"
        }
        Command::LimitsPadic => match cfg.limits_padic.family {
            LimitFamily::Rotated => {
                "conjugates of the rotated SL(2,Q_p) by powers of a diagonal element converge to \
                 the norm-one lower-triangular group at defect rate 2 per step, reaching every \
                 target"
            }
            LimitFamily::Htheta => {
                "conjugates of H_theta_a by powers of diag(p, 1/p) converge to +-[[1, 0], [z, 1]] \
                 at defect rate 2 per step"
            }
        },
        Command::LimitsReal => {
            "conjugates of the rotated SL(2,R) by exp-diagonal powers converge to \
             [[a - ib, z], [0, a + ib]] with a^2 + b^2 = 1, error shrinking like e^-2n"
        }
        Command::TreeDot => "ball in the Bruhat-Tits tree with the tree of Q_p marked",
    }
}

/// Runs one experiment and returns its finished report; errors land in `error`.
pub fn run_experiment(cmd: Command, cfg: &ExperimentConfig) -> Report {
    let mut rep = Report::new(cmd.name(), claim(cmd, cfg), cfg);
    let out = match cmd {
        Command::Classify => classify(cfg, &mut rep),
        Command::FixedGroup => fixed_group(cfg, &mut rep),
        Command::Orbits => orbits(cfg, &mut rep),
        Command::Polar => polar(cfg, &mut rep),
        Command::LimitsPadic => match cfg.limits_padic.family {
            LimitFamily::Rotated => limits_rotated(cfg, &mut rep),
            LimitFamily::Htheta => limits_htheta(cfg, &mut rep),
        },
        Command::LimitsReal => limits_real(cfg, &mut rep),
        Command::TreeDot => tree_dot_text(cfg).map(|dot| rep.record(&dot)),
    };
    if let Err(e) = out {
        rep.error = Some(e);
    }
    rep.finish()
}

fn ctx_of(cfg: &ExperimentConfig) -> Res<&'static PrimeContext> {
    PrimeContext::get(cfg.p, cfg.precision).map_err(err)
}

fn e_tower(cfg: &ExperimentConfig) -> Res<&'static Tower> {
    Ok(Tower::e(ctx_of(cfg)?, cfg.ext.kind()))
}

/// Representatives 1, S, p, Sp of the square classes, as Q_p elements.
fn class_reps(ctx: &'static PrimeContext) -> Vec<(ClassLabel, Padic)> {
    ClassLabel::ALL
        .iter()
        .map(|&c| (c, c.representative(ctx)))
        .collect()
}

fn class_name(c: ClassLabel) -> String {
    serde_json::to_value(c)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

// ---------------------------------------------------------------- classify

#[derive(Serialize)]
struct ClassifyRecord {
    family: String,
    normalized_a: [String; 4],
    q: String,
    case: CaseTag,
    certificate_level: Level,
    certificate_b: [String; 4],
    certificate_c: String,
    residual: f64,
    /// for the family with gamma = id: the square class of a and the field K_a = Q_p(sqrt a)
    a_class: Option<String>,
    k_a: Option<String>,
}

/// A / lambda in one of the normal forms [[0, 1], [a, 0]] (gamma = id), [[z, y], [1, -sigma z]]
/// or diag(x, 1) (gamma = sigma).
fn normalize(tw: &'static Tower, m: [[Ext; 2]; 2], gamma: GammaArg) -> Res<Involution> {
    let [[a11, a12], [a21, a22]] = m;
    let scaled = |l: &Ext| -> Res<[Ext; 4]> {
        Ok([
            a11.div(l).map_err(err)?,
            a12.div(l).map_err(err)?,
            a21.div(l).map_err(err)?,
            a22.div(l).map_err(err)?,
        ])
    };
    match gamma {
        GammaArg::Id => {
            if !a11.is_zero() || !a22.is_zero() || a12.is_zero() {
                return Err("with gamma = id the matrix must be [[0, b], [c, 0]], b != 0".into());
            }
            let [_, _, a, _] = scaled(&a12)?;
            let a = a
                .as_padic()
                .cloned()
                .ok_or_else(|| format!("a = {a} does not lie in Q_p"))?;
            Involution::f2(Tower::qp(tw.ctx), a).map_err(err)
        }
        GammaArg::Sigma => {
            if !a21.is_zero() {
                let [z, y, _, w] = scaled(&a21)?;
                if !(&w + &z.sigma()).is_zero() {
                    return Err("normalized A needs A22 = -sigma(A11)".into());
                }
                let y = y
                    .as_padic()
                    .cloned()
                    .or_else(|| (y.coord(1).is_zero()).then(|| y.coord(0).clone()))
                    .ok_or_else(|| format!("normalized A12 = {y} does not lie in Q_p"))?;
                Involution::f1a(z.at_level(Level::E), y).map_err(err)
            } else if a12.is_zero() {
                let [x, _, _, _] = scaled(&a22)?;
                Involution::f1b(x.at_level(Level::E)).map_err(err)
            } else {
                Err("upper-triangular A with nonzero A12 has no normal form here".into())
            }
        }
    }
}

fn classify(cfg: &ExperimentConfig, rep: &mut Report) -> Res<()> {
    let tw = e_tower(cfg)?;
    let ctx = tw.ctx;
    let m = cfg.classify.matrix.map(|row| {
        row.map(|x| {
            let (c0, c1) = x.parts();
            Ext::new_e(tw, Padic::from_i64(ctx, c0), Padic::from_i64(ctx, c1))
        })
    });
    if Mat2::new(
        m[0][0].clone(),
        m[0][1].clone(),
        m[1][0].clone(),
        m[1][1].clone(),
    )
    .det()
    .is_zero()
    {
        return Err("A is singular".into());
    }
    let theta = normalize(tw, m, cfg.classify.gamma)?;
    let mut rng = stream_rng(cfg.seed, 0);
    let q = verify_involution(&theta, &mut rng);
    rep.verdict(
        "involution",
        q.is_ok(),
        match &q {
            Ok(q) => format!("A gamma(A) = {q} Id and theta^2 = Id on 10 elements"),
            Err(e) => e.to_string(),
        },
    );
    let q = q.map_err(err)?;
    let (cert, a_class, k_a) = match &theta.family {
        crate::sl2::Family::F2 { a } => {
            let cert = conjugator_to_diagonal(ctx, a).map_err(err)?;
            let label = square_class(a).map_err(err)?.label;
            let k = match ExtKind::for_class(label) {
                None => "Q_p".to_string(),
                Some(k) => format!("E of kind {}", k.short_name()),
            };
            (cert, Some(class_name(label)), Some(k))
        }
        _ => (conjugator_to_sigma(&theta, None).map_err(err)?, None, None),
    };
    rep.verdict(
        "certificate",
        cert.passes(),
        format!(
            "case {:?} at level {:?}, residual {:.1} digits",
            cert.case,
            cert.level(),
            cert.residual
        ),
    );
    rep.fit("residual", cert.residual);
    rep.record(&ClassifyRecord {
        family: theta.family.name().to_string(),
        normalized_a: theta.a.to_strings(),
        q: q.to_string(),
        case: cert.case,
        certificate_level: cert.level(),
        certificate_b: cert.b.to_strings(),
        certificate_c: cert.c.to_string(),
        residual: cert.residual,
        a_class,
        k_a,
    });
    if cert.level() == Level::K {
        let b = boundary_disjointness_check(&theta, &cert, 50, &mut rng).map_err(err)?;
        rep.verdict(
            "boundary-disjoint",
            b.passes(),
            format!(
                "{} fixed ends off the boundary of T_E: {} rational, {} inconclusive, {} not fixed",
                b.samples, b.e_rational, b.inconclusive, b.fixed_check_failures
            ),
        );
        rep.record(&b);
    }
    Ok(())
}

// ---------------------------------------------------------------- fixed-group

#[derive(Serialize)]
struct FixedRecord {
    family: String,
    case: String,
    level: Option<Level>,
    tested: usize,
    fixed: usize,
    members: usize,
    min_defect: f64,
}

fn sigma_case_run(
    tw: &'static Tower,
    case: CaseTag,
    draws: usize,
    elements: usize,
    rng: &mut ChaCha8Rng,
) -> Res<(FixedRecord, Vec<ConjugatorCertificate>)> {
    let mut rec = FixedRecord {
        family: String::new(),
        case: format!("{case:?}"),
        level: None,
        tested: 0,
        fixed: 0,
        members: 0,
        min_defect: f64::INFINITY,
    };
    let mut certs = Vec::new();
    for _ in 0..draws {
        let (theta, c2) = draw_case_parameters(tw, case, rng).map_err(err)?;
        rec.family = theta.family.name().to_string();
        let cert = conjugator_to_sigma(&theta, c2.as_ref()).map_err(err)?;
        rec.level = rec.level.max(Some(cert.level()));
        let btw = cert.b.tower();
        let b_inv = cert.b.inv().map_err(err)?;
        for _ in 0..elements {
            let h = random_sl2_exact(Tower::qp(tw.ctx), Level::Qp, rng, 3);
            let h = h.map(|x| x.in_tower(btw));
            let g = cert.b.mul(&h).mul(&b_inv);
            let (ok, d) = fixed_point_test(&theta, &g).map_err(err)?;
            rec.tested += 1;
            rec.fixed += ok as usize;
            rec.min_defect = rec.min_defect.min(d);
            if h_theta_sigma_membership(&cert, &g).map_err(err)? {
                rec.members += 1;
            }
        }
        certs.push(cert);
    }
    Ok((rec, certs))
}

fn fixed_group(cfg: &ExperimentConfig, rep: &mut Report) -> Res<()> {
    let tw = e_tower(cfg)?;
    let ctx = tw.ctx;
    let qp = Tower::qp(ctx);
    let fg = &cfg.fixed_group;
    let runs: Vec<Res<(FixedRecord, Vec<ConjugatorCertificate>)>> = CaseTag::SIGMA_CASES
        .par_iter()
        .enumerate()
        .map(|(i, &case)| {
            let mut rng = stream_rng(cfg.seed, i as u64);
            sigma_case_run(tw, case, fg.draws, fg.elements, &mut rng)
        })
        .collect();
    let mut bad = Vec::new();
    let mut weak = 0;
    for r in runs {
        let (rec, certs) = r?;
        weak += certs.iter().filter(|c| !c.passes()).count();
        if rec.fixed < rec.tested || rec.members < rec.tested {
            bad.push(rec.case.clone());
        }
        rep.record(&rec);
    }
    rep.verdict(
        "sigma-families-fixed",
        bad.is_empty(),
        if bad.is_empty() {
            "every B h B^-1 is fixed and passes the membership test".to_string()
        } else {
            format!("failures in cases {}", bad.join(", "))
        },
    );
    rep.verdict(
        "certificates",
        weak == 0,
        format!("{weak} certificates below precision"),
    );
    let mut rng = stream_rng(cfg.seed, 100);
    let mut f2_fail = 0;
    for (label, a) in class_reps(ctx) {
        let theta = Involution::f2(qp, a.clone()).map_err(err)?;
        let sample = h_theta_a_sample(qp, &a, &Padic::one(ctx), fg.elements * fg.draws, &mut rng);
        let mut rec = FixedRecord {
            family: "F2".into(),
            case: format!("a = {}", class_name(label)),
            level: Some(Level::Qp),
            tested: sample.len(),
            fixed: 0,
            members: 0,
            min_defect: f64::INFINITY,
        };
        for g in &sample {
            let (ok, d) = fixed_point_test(&theta, g).map_err(err)?;
            rec.fixed += ok as usize;
            rec.members += ok as usize;
            rec.min_defect = rec.min_defect.min(d);
        }
        f2_fail += rec.tested - rec.fixed;
        rep.record(&rec);
    }
    rep.verdict(
        "theta-a-fixed",
        f2_fail == 0,
        format!("{f2_fail} H_theta_a samples not fixed"),
    );
    Ok(())
}

// ---------------------------------------------------------------- orbits

#[derive(Serialize)]
struct LabelRecord {
    action: &'static str,
    samples: usize,
    labels: Vec<String>,
    invariance_checks: usize,
    invariance_failures: usize,
    skipped: usize,
}

fn random_qp_end(ctx: &'static PrimeContext, rng: &mut ChaCha8Rng) -> End {
    let qp = Tower::qp(ctx);
    End::Finite(Ext::from_padic(qp, Padic::random_exact(ctx, rng, -3, 3, 4)))
}

fn diag_labels(
    ctx: &'static PrimeContext,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Res<LabelRecord> {
    let qp = Tower::qp(ctx);
    let mut ends = vec![End::Inf, End::Finite(Ext::zero(qp))];
    while ends.len() < samples.max(2) {
        ends.push(random_qp_end(ctx, rng));
    }
    let mut labels = BTreeSet::new();
    let (mut checks, mut fails, mut skipped) = (0, 0, 0);
    for e in &ends {
        let l = end_orbit_label_diag(e).map_err(err)?;
        labels.insert(l);
        let t = Padic::random_exact(ctx, rng, -2, 2, 3);
        let t = Ext::from_padic(qp, t);
        let g = Mat2::diag(t.clone(), t.inv().map_err(err)?);
        match act_end(&g, e).and_then(|x| end_orbit_label_diag(&x)) {
            Ok(l2) => {
                checks += 1;
                fails += (l2 != l) as usize;
            }
            Err(_) => skipped += 1,
        }
    }
    // equal labels must be joined by an explicit torus element
    for w in ends.windows(2) {
        if let (Ok(OrbitLabel::Class(a)), Ok(OrbitLabel::Class(b))) =
            (end_orbit_label_diag(&w[0]), end_orbit_label_diag(&w[1]))
        {
            if a == b {
                checks += 1;
                fails += transitivity_witness_diag(&w[0], &w[1]).is_err() as usize;
            }
        }
    }
    Ok(LabelRecord {
        action: "diagonal torus on the boundary of T_Qp",
        samples: ends.len(),
        labels: labels.iter().map(|l| l.to_string()).collect(),
        invariance_checks: checks,
        invariance_failures: fails,
        skipped,
    })
}

fn slf_labels(tw: &'static Tower, samples: usize, rng: &mut ChaCha8Rng) -> Res<LabelRecord> {
    let mut ends = vec![End::Inf, End::Finite(Ext::zero(tw))];
    while ends.len() < samples.max(2) {
        let x = if rng.gen_range(0..10) == 0 {
            Ext::from_padic(tw, Padic::random_exact(tw.ctx, rng, -2, 2, 4))
        } else {
            Ext::random_exact(tw, Level::E, rng, -2, 2, 4)
        };
        ends.push(End::Finite(x));
    }
    let mut labels = BTreeSet::new();
    let (mut checks, mut fails, mut skipped) = (0, 0, 0);
    for e in &ends {
        let l = end_orbit_label_slf(e).map_err(err)?;
        labels.insert(l);
        let g = random_sl2_exact(tw, Level::Qp, rng, 3);
        match act_end(&g, e).and_then(|x| end_orbit_label_slf(&x)) {
            Ok(l2) => {
                checks += 1;
                fails += (l2 != l) as usize;
            }
            Err(_) => skipped += 1,
        }
    }
    Ok(LabelRecord {
        action: "SL(2,Q_p) on the boundary of T_E",
        samples: ends.len(),
        labels: labels.iter().map(|l| l.to_string()).collect(),
        invariance_checks: checks,
        invariance_failures: fails,
        skipped,
    })
}

#[derive(Serialize)]
struct ThetaOrbitRecord {
    a: String,
    ends: usize,
    rounds: usize,
    class_count: usize,
    conflicts: usize,
    skipped: usize,
    cells: usize,
    cap_reached: bool,
}

fn orbits(cfg: &ExperimentConfig, rep: &mut Report) -> Res<()> {
    let tw = e_tower(cfg)?;
    let ctx = tw.ctx;
    let qp = Tower::qp(ctx);
    let op = &cfg.orbits;
    let mut rng = stream_rng(cfg.seed, 0);
    let diag = diag_labels(ctx, op.samples, &mut rng)?;
    rep.verdict(
        "diagonal-six-orbits",
        diag.labels.len() == 6 && diag.invariance_failures == 0,
        format!(
            "{} labels realized, {} of {} invariance checks failed",
            diag.labels.len(),
            diag.invariance_failures,
            diag.invariance_checks
        ),
    );
    rep.fit("diagonal_orbits", diag.labels.len() as f64);
    rep.record(&diag);
    let mut rng = stream_rng(cfg.seed, 1);
    let slf = slf_labels(tw, op.samples, &mut rng)?;
    rep.verdict(
        "slf-at-most-five-orbits",
        slf.labels.len() <= 5 && slf.invariance_failures == 0,
        format!(
            "{} labels realized, {} of {} invariance checks failed",
            slf.labels.len(),
            slf.invariance_failures,
            slf.invariance_checks
        ),
    );
    rep.fit("slf_orbits", slf.labels.len() as f64);
    rep.record(&slf);
    let nontrivial: Vec<(ClassLabel, Padic)> = class_reps(ctx)
        .into_iter()
        .filter(|(c, _)| *c != ClassLabel::One)
        .collect();
    let runs: Vec<Res<ThetaOrbitRecord>> = nontrivial
        .par_iter()
        .enumerate()
        .map(|(i, (label, a))| {
            let mut rng = stream_rng(cfg.seed, 10 + i as u64);
            let gens = h_theta_a_sample(qp, a, &Padic::one(ctx), 6, &mut rng);
            let mut ends = vec![End::Inf];
            ends.extend(
                (0..op.theta_ends.saturating_sub(1) as i64)
                    .map(|x| End::Finite(Ext::from_i64(qp, x))),
            );
            let inv = theta_a_invariant(a.clone());
            let ex = orbit_experiment(&gens, &ends, op.rounds, Some(&inv)).map_err(err)?;
            Ok(ThetaOrbitRecord {
                a: class_name(*label),
                ends: ends.len(),
                rounds: op.rounds,
                class_count: ex.class_count,
                conflicts: ex.conflicts,
                skipped: ex.skipped,
                cells: ex.cells,
                cap_reached: ex.cap_reached,
            })
        })
        .collect();
    let mut worst = 0;
    let mut conflicts = 0;
    for r in runs {
        let r = r?;
        worst = worst.max(r.class_count);
        conflicts += r.conflicts;
        rep.fit(&format!("theta_{}_classes", r.a), r.class_count as f64);
        rep.record(&r);
    }
    rep.verdict(
        "theta-a-at-most-eight",
        worst <= 8 && conflicts == 0,
        format!("largest class count {worst}, {conflicts} invariant conflicts"),
    );
    Ok(())
}

// ---------------------------------------------------------------- polar

#[derive(Serialize)]
struct PolarRecord {
    pair: PolarPair,
    samples: usize,
    /// how often each a_i was used; the last slot counts n = 0
    generator_use: Vec<usize>,
    /// smallest and largest power n seen
    n_range: (i64, i64),
    max_displacement: i64,
    diam: i64,
    min_reconstruction: f64,
    h_failures: usize,
    errors: Vec<String>,
}

struct PolarOutcome {
    i: Option<usize>,
    n: i64,
    displacement: i64,
    reconstruction: f64,
    in_h: bool,
}

fn polar_one(pc: &PolarContext, g: &Mat2) -> Res<PolarOutcome> {
    let d = polar_decompose(pc, g).map_err(err)?;
    let in_h = match pc.pair {
        PolarPair::SlESlF => d.h.e.iter().all(|x| x.coord(1).is_zero()),
        PolarPair::SlFHTheta1 => {
            let th = Involution::f2(d.h.tower(), Padic::one(d.h.tower().ctx)).map_err(err)?;
            fixed_point_test(&th, &d.h).map_err(err)?.0
        }
    };
    Ok(PolarOutcome {
        i: d.i,
        n: d.n,
        displacement: d.displacement,
        reconstruction: d.reconstruction_defect,
        in_h,
    })
}

fn polar(cfg: &ExperimentConfig, rep: &mut Report) -> Res<()> {
    let tw = e_tower(cfg)?;
    let pp = &cfg.polar;
    let need = (cfg.precision - SLACK) as f64;
    for (pi, pair) in [PolarPair::SlESlF, PolarPair::SlFHTheta1]
        .into_iter()
        .enumerate()
    {
        let pc = PolarContext::new(pair, tw).map_err(err)?;
        let level = if pair == PolarPair::SlESlF {
            Level::E
        } else {
            Level::Qp
        };
        let outs: Vec<Res<PolarOutcome>> = (0..pp.samples)
            .into_par_iter()
            .map(|k| {
                let mut rng = stream_rng(cfg.seed, ((pi as u64) << 32) | k as u64);
                let g = random_sl2(pc.tower(), level, &mut rng, pp.depth);
                polar_one(&pc, &g)
            })
            .collect();
        let mut rec = PolarRecord {
            pair,
            samples: pp.samples,
            generator_use: vec![0; pc.orbit_count() + 1],
            n_range: (0, 0),
            max_displacement: 0,
            diam: pc.diam,
            min_reconstruction: f64::INFINITY,
            h_failures: 0,
            errors: Vec::new(),
        };
        for o in outs {
            match o {
                Ok(o) => {
                    rec.generator_use[o.i.unwrap_or(pc.orbit_count())] += 1;
                    rec.n_range = (rec.n_range.0.min(o.n), rec.n_range.1.max(o.n));
                    rec.max_displacement = rec.max_displacement.max(o.displacement);
                    rec.min_reconstruction = rec.min_reconstruction.min(o.reconstruction);
                    rec.h_failures += (!o.in_h) as usize;
                }
                Err(e) => rec.errors.push(e),
            }
        }
        let name = match pair {
            PolarPair::SlESlF => "sle-slf",
            PolarPair::SlFHTheta1 => "slf-htheta1",
        };
        let ok = rec.errors.is_empty()
            && rec.h_failures == 0
            && rec.max_displacement <= rec.diam
            && rec.min_reconstruction >= need;
        rep.verdict(
            name,
            ok,
            format!(
                "{} errors, {} h outside H, displacement {} (diam {}), reconstruction {:.1} digits \
                 (need {need})",
                rec.errors.len(),
                rec.h_failures,
                rec.max_displacement,
                rec.diam,
                rec.min_reconstruction
            ),
        );
        rep.fit(
            &format!("{name}_min_reconstruction"),
            rec.min_reconstruction,
        );
        rep.record(&rec);
    }
    Ok(())
}

// ---------------------------------------------------------------- limits-padic

#[derive(Serialize)]
struct RotatedRecord {
    b: String,
    sign: i32,
    c: String,
    report: ConvergenceReport,
}

fn in_window(s: Option<f64>, w: [f64; 2]) -> bool {
    s.is_some_and(|s| s >= w[0] && s <= w[1])
}

fn summarize_slopes(rep: &mut Report, slopes: &[Option<f64>], window: [f64; 2]) {
    let live: Vec<f64> = slopes.iter().flatten().copied().collect();
    let lo = live.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = live.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let missing = slopes.len() - live.len();
    rep.fit("slope_min", lo);
    rep.fit("slope_max", hi);
    let bad = slopes.iter().filter(|s| !in_window(**s, window)).count();
    rep.verdict(
        "rate",
        bad == 0,
        format!(
            "slopes in [{lo:.3}, {hi:.3}] over {} runs, {missing} without a fit, window [{}, {}]",
            slopes.len(),
            window[0],
            window[1]
        ),
    );
}

fn limits_rotated(cfg: &ExperimentConfig, rep: &mut Report) -> Res<()> {
    let tw = e_tower(cfg)?;
    let ctx = tw.ctx;
    let lp = &cfg.limits_padic;
    let p = cfg.p as i64;
    let bs = lp.b_values.clone().unwrap_or_else(|| {
        if tw.e_index() == 1 {
            vec![0, p, 2 * p]
        } else {
            vec![0, 1, 2]
        }
    });
    let mut targets = Vec::new();
    for (bi, &b) in bs.iter().enumerate() {
        let sign = if bi % 2 == 0 { 1 } else { -1 };
        for &c1 in &lp.c1_values {
            for &c2 in &lp.c2_values {
                targets.push((b, sign, c1, c2));
            }
        }
    }
    let ns: Vec<i64> = (lp.n_min..=lp.n_max).collect();
    let rot = RotationContext::new(tw);
    let runs: Vec<Res<RotatedRecord>> = targets
        .par_iter()
        .map(|&(b, sign, c1, c2)| {
            let c = Ext::new_e(tw, Padic::from_i64(ctx, c1), Padic::from_i64(ctx, c2));
            let t = LimitTarget::new(tw, Padic::from_i64(ctx, b), c.clone(), sign)
                .map_err(|e| format!("target b = {b}: {e}"))?;
            let setup = ConvergenceSetup {
                level: Level::E,
                rotation: Some(rot.clone()),
                limit_group: LimitGroupDescriptor::LowerTriangularNorm1,
                target: Some(t.limit_element()),
            };
            let report = verify_convergence(&|n| limit_sequence_for_target(&t, n), &ns, &setup)
                .map_err(err)?;
            Ok(RotatedRecord {
                b: b.to_string(),
                sign,
                c: c.to_string(),
                report,
            })
        })
        .collect();
    let mut slopes = Vec::new();
    let (mut c_fit, mut radius) = (f64::NEG_INFINITY, 0.0f64);
    let mut monotone = 0;
    for r in runs {
        let r = r?;
        slopes.push(r.report.slope);
        if let Some(c) = r.report.c {
            c_fit = c_fit.max(c);
        }
        radius = radius.max(r.report.radius);
        monotone += r.report.non_decreasing as usize;
        rep.record(&r);
    }
    summarize_slopes(rep, &slopes, lp.slope_range);
    rep.verdict(
        "monotone",
        monotone == slopes.len(),
        format!(
            "{monotone} of {} defect sequences non-decreasing",
            slopes.len()
        ),
    );
    let c_fit = if c_fit.is_finite() { c_fit } else { 0.0 };
    rep.fit("c", c_fit);
    rep.fit("radius", radius.max(0.0));
    let mut rng = stream_rng(cfg.seed, 0);
    let sweep = condition2_sweep(
        tw,
        &rot,
        &ns,
        c_fit,
        lp.sweep_samples,
        radius.ceil() as i64,
        &mut rng,
    )
    .map_err(err)?;
    rep.verdict(
        "condition-2-sweep",
        sweep.violations == 0,
        format!(
            "{} of {} drawn elements stay bounded, {} of those sit farther than 2n - c from \
             the limit group",
            sweep.bounded, sweep.drawn, sweep.violations
        ),
    );
    rep.record(&sweep);
    Ok(())
}

#[derive(Serialize)]
struct HthetaRecord {
    a: String,
    z: i64,
    sign: i32,
    report: ConvergenceReport,
}

fn limits_htheta(cfg: &ExperimentConfig, rep: &mut Report) -> Res<()> {
    let ctx = ctx_of(cfg)?;
    let qp = Tower::qp(ctx);
    let lp = &cfg.limits_padic;
    let ns: Vec<i64> = (lp.n_min..=lp.n_max).collect();
    let mut jobs = Vec::new();
    for (label, a) in class_reps(ctx) {
        for &z in &lp.z_values {
            for sign in [1, -1] {
                jobs.push((label, a.clone(), z, sign));
            }
        }
    }
    let runs: Vec<Res<HthetaRecord>> = jobs
        .par_iter()
        .map(|(label, a, z, sign)| {
            let zp = Padic::from_i64(ctx, *z);
            let s = Ext::from_i64(qp, *sign as i64);
            let setup = ConvergenceSetup {
                level: Level::Qp,
                rotation: None,
                limit_group: LimitGroupDescriptor::UnipotentMu2,
                target: Some(Mat2::new(
                    s.clone(),
                    Ext::zero(qp),
                    Ext::from_i64(qp, *z),
                    s,
                )),
            };
            let report = verify_convergence(
                &|n| htheta_limit_sequence(qp, a, &zp, *sign, n),
                &ns,
                &setup,
            )
            .map_err(err)?;
            Ok(HthetaRecord {
                a: class_name(*label),
                z: *z,
                sign: *sign,
                report,
            })
        })
        .collect();
    let mut slopes = Vec::new();
    let mut off = 0;
    for r in runs {
        let r = r?;
        slopes.push(r.report.slope);
        // at the last n the conjugate must sit within 2n of +-[[1, 0], [*, 1]]
        let last = r.report.records.last().map_or(0.0, |x| x.defect_to_limit_group);
        off += (!r.report.non_decreasing || last < 2.0 * lp.n_max as f64) as usize;
        rep.record(&r);
    }
    summarize_slopes(rep, &slopes, lp.slope_range);
    rep.verdict(
        "diagonal-in-mu2",
        off == 0,
        format!("{off} of {} runs fail to approach diagonal +-1", slopes.len()),
    );
    Ok(())
}

// ---------------------------------------------------------------- limits-real

/// The two targets with b = +-1, then points spread around the rest of the circle with
/// varying z.
pub fn real_targets(count: usize) -> Vec<RealTarget> {
    let mut out = Vec::with_capacity(count);
    for (k, b) in [1.0, -1.0].into_iter().enumerate().take(count) {
        let z = Complex64::new(1.0 - k as f64, 0.5 + k as f64);
        out.push(RealTarget {
            a: 0.0,
            b,
            z: (z.re, z.im),
        });
    }
    let m = count.saturating_sub(2);
    for k in 0..m {
        let t = 0.4 + k as f64 * std::f64::consts::TAU / m as f64;
        let z = Complex64::new(1.0 + 0.5 * k as f64, -1.0 + 0.25 * k as f64);
        out.push(RealTarget::on_circle(t, z));
    }
    out
}

fn limits_real(cfg: &ExperimentConfig, rep: &mut Report) -> Res<()> {
    let lr = &cfg.limits_real;
    let ns: Vec<i64> = (lr.n_min..=lr.n_max).collect();
    let targets = real_targets(lr.targets);
    let runs: Vec<_> = targets
        .par_iter()
        .map(|t| verify_real_convergence(t, &ns).map_err(err))
        .collect();
    let mut slopes = Vec::new();
    let (mut conj, mut norm, mut det) = (0.0f64, 0.0f64, 0.0f64);
    for r in runs {
        let r = r?;
        slopes.push(r.slope);
        conj = conj.max(r.diagonal_conjugacy);
        norm = norm.max(r.norm_defect);
        det = det.max(r.max_det_defect);
        rep.record(&r);
    }
    summarize_slopes(rep, &slopes, lr.slope_range);
    rep.fit("diagonal_conjugacy", conj);
    rep.fit("norm_defect", norm);
    rep.fit("det_defect", det);
    rep.verdict(
        "limit-shape",
        conj <= 1e-9 && norm <= 1e-9,
        format!("|conj(g11) - g22| <= {conj:.2e}, ||g11|^2 - 1| <= {norm:.2e}"),
    );
    rep.verdict(
        "determinant",
        det <= 1e-9,
        format!("|det - 1| <= {det:.2e}"),
    );
    Ok(())
}

// ---------------------------------------------------------------- tree-dot

pub fn tree_dot_text(cfg: &ExperimentConfig) -> Res<String> {
    let tw = e_tower(cfg)?;
    let center = match cfg.tree_dot.level {
        TreeLevel::E => TreeVertex::base(tw, Level::E),
        TreeLevel::Qp => TreeVertex::base(Tower::qp(tw.ctx), Level::Qp),
    };
    Ok(tree_dot(&center, cfg.tree_dot.radius))
}
