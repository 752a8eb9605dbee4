//! End-to-end acceptance suite: one PASS/FAIL line per criterion, non-zero
//! exit if any criterion fails. Runs without the libtest harness so the lines
//! always reach the console.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use common::{distance_oracle, euclidean_ratio_floor, lp_sip, model_for, orthonormal};
use rand::Rng;
use siplab::counterexample::{run_pipeline, Certificate, Evidence, PipelineConfig, ReplayMode};
use siplab::harness::{hanner_check, hanner_suite, lp_sl_coordinate_case, thm2_forward_harness, HSection, Thm2Options};
use siplab::harness::thm2::NormScramble;
use siplab::norms::{finite_difference_gradient, flatten, support_functional, Block, EvalPath, FD_STEP};
use siplab::ortho::{best_approximation_with, birkhoff_check, orthogonal_decompose, sip_orthogonal, ApproxOptions};
use siplab::quotient::quotient_sip;
use siplab::sip::{axioms_check, sip_eval, sip_sum_eval};
use siplab::{sampling, Error, FiniteSupportElement, NormModel, QuotientSpace, SubspaceBasis, Vector};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn sum4() -> NormModel {
    NormModel::sum_space(
        3.0,
        vec![
            NormModel::lp(3.0, 2).unwrap(),
            NormModel::default_mixed(),
            NormModel::lp(1.5, 2).unwrap(),
            NormModel::mixed_block(2.5, vec![Block { size: 1, q: 3.0 }, Block { size: 1, q: 1.5 }], 1.0).unwrap(),
        ],
    )
    .unwrap()
}

fn smooth_models() -> Vec<(&'static str, NormModel)> {
    vec![
        ("lp(1.5)", NormModel::lp(1.5, 3).unwrap()),
        ("lp(3)", NormModel::lp(3.0, 3).unwrap()),
        ("mixed", NormModel::default_mixed()),
        ("sum4", sum4()),
    ]
}

fn axioms() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, (name, m)) in smooth_models().into_iter().enumerate() {
        let tol = match m.path() {
            EvalPath::ClosedForm => 1e-9,
            EvalPath::Solver => 1e-6,
        };
        match axioms_check(&m, 1000, 100 + i as u64, tol) {
            Ok(r) => {
                ok &= r.passed();
                parts.push(format!("{name} {:.1e}/{tol:.0e}", r.worst()));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{name} error {e}"));
            }
        }
    }
    let t = start.elapsed();
    ok &= t < Duration::from_secs(10);
    outcome(ok, format!("{} in {:.2}s", parts.join(", "), t.as_secs_f64()))
}

fn oracle_equivalence() -> Outcome {
    let mut worst_fd = 0.0_f64;
    for (i, (_, m)) in smooth_models().into_iter().enumerate() {
        let mut rng = sampling::rng(200 + i as u64);
        for _ in 0..100 {
            let y = sampling::scaled_sphere(&mut rng, m.dim());
            let a = support_functional(&y, &m).unwrap();
            let b = finite_difference_gradient(&y, &m, FD_STEP).unwrap();
            worst_fd = worst_fd.max(a.linf_distance(&b));
        }
    }
    // lp(3) planes flatten to lp(3); the mixed sum is compared with its own flat model
    let planes = NormModel::sum_space(3.0, vec![NormModel::lp(3.0, 2).unwrap(); 4]).unwrap();
    let flat = NormModel::lp(3.0, 8).unwrap();
    let mixed = sum4();
    let mut worst_sum = 0.0_f64;
    let mut rng = sampling::rng(250);
    for _ in 0..1000 {
        let x = sampling::scaled_sphere(&mut rng, 8);
        let y = sampling::scaled_sphere(&mut rng, 8);
        let split = |x: &Vector| FiniteSupportElement::from_blocks(x.as_slice().chunks(2).map(|c| Vector::from(c)).collect());
        let (bx, by) = (split(&x), split(&y));
        worst_sum = worst_sum.max((sip_sum_eval(&bx, &by, &planes).unwrap() - sip_eval(&x, &y, &flat).unwrap()).abs());
        worst_sum = worst_sum.max((lp_sip(x.as_slice(), y.as_slice(), 3.0) - sip_eval(&x, &y, &flat).unwrap()).abs());

        let x = sampling::scaled_sphere(&mut rng, mixed.dim());
        let y = sampling::scaled_sphere(&mut rng, mixed.dim());
        let (bx, by) = (siplab::norms::unflatten(&x, &mixed).unwrap(), siplab::norms::unflatten(&y, &mixed).unwrap());
        assert_eq!(flatten(&bx, &mixed).unwrap(), x);
        worst_sum = worst_sum.max((sip_sum_eval(&bx, &by, &mixed).unwrap() - sip_eval(&x, &y, &mixed).unwrap()).abs());
    }
    outcome(
        worst_fd <= 1e-5 && worst_sum <= 1e-10,
        format!("support vs differences {worst_fd:.1e} (<= 1e-5), blocks vs flattened {worst_sum:.1e} (<= 1e-10)"),
    )
}

/// Pairs at controlled distances from orthogonality: exact, tol/100, 100·tol, and random.
fn orthogonality_equivalence() -> Outcome {
    const TOL: f64 = 1e-7;
    let mut disagreements = 0;
    let mut both_true = 0;
    let mut total = 0;
    for (i, (_, m)) in smooth_models().into_iter().enumerate() {
        let mut rng = sampling::rng(300 + i as u64);
        for k in 0..1000 {
            let x = sampling::scaled_sphere(&mut rng, m.dim());
            let r = sampling::scaled_sphere(&mut rng, m.dim());
            let phi = support_functional(&x, &m).unwrap();
            // y with φ_x(y) = 0, i.e. [y|x] = 0
            let y0 = r.axpy(-phi.dot(&r) / phi.dot(&x), &x);
            let scale = m.norm(&y0).unwrap();
            let y = match k % 4 {
                0 => y0,
                1 => y0.axpy(1e-2 * TOL * scale / m.norm(&x).unwrap(), &x),
                2 => y0.axpy(1e2 * TOL * scale / m.norm(&x).unwrap(), &x),
                _ => r,
            };
            let b = birkhoff_check(&x, &y, &m, TOL).unwrap();
            let s = sip_orthogonal(&x, &y, &m, TOL).unwrap();
            disagreements += usize::from(b != s);
            both_true += usize::from(b && s);
            total += 1;
        }
    }
    outcome(
        disagreements == 0 && both_true >= total / 2,
        format!("{disagreements} disagreements over {total} pairs ({both_true} orthogonal)"),
    )
}

fn decomposition() -> Outcome {
    let mut rng = sampling::rng(400);
    let (mut worst_dist, mut worst_restart, mut worst_res) = (0.0_f64, 0.0_f64, 0.0_f64);
    for k in 0..100 {
        let dim = 3 + k % 4;
        let m = model_for(dim, k);
        let floor = euclidean_ratio_floor(&m, k as u64);
        let x = sampling::scaled_sphere(&mut rng, dim);
        let b = orthonormal(&mut rng, dim, 1 + k % 2);
        let sub = SubspaceBasis::new(b.clone(), m.clone()).unwrap();
        let d = orthogonal_decompose(&x, &sub, 1e-10).unwrap();
        worst_res = worst_res.max(d.residual_orth);
        let oracle = distance_oracle(&x, &b, &m, floor);
        worst_dist = worst_dist.max((m.norm(&d.z).unwrap() - oracle).abs());
        for _ in 0..3 {
            let start = (0..b.len()).map(|_| 4.0 * rng.random_range(-1.0..1.0)).collect();
            let again = best_approximation_with(&x, &sub, &ApproxOptions::with_tol(1e-10).start(start)).unwrap();
            worst_restart = worst_restart.max(again.point.linf_distance(&d.y));
        }
    }
    outcome(
        worst_dist <= 1e-6 && worst_restart <= 1e-7,
        format!(
            "|‖z‖ − dist| {worst_dist:.1e} (<= 1e-6), restarts {worst_restart:.1e} (<= 1e-7), orthogonality {worst_res:.1e}"
        ),
    )
}

fn quotient_sip_checks() -> Outcome {
    let m = NormModel::default_mixed();
    let mut rng = sampling::rng(500);
    let mut worst_shift = 0.0_f64;
    for _ in 0..1000 {
        let dir = sampling::unit_sphere(&mut rng, 3);
        let sub = SubspaceBasis::span(dir.clone(), m.clone()).unwrap();
        let q = QuotientSpace::new(sub).unwrap();
        let u = sampling::scaled_sphere(&mut rng, 3);
        let w = sampling::scaled_sphere(&mut rng, 3);
        let base = quotient_sip(&u.clone().into(), &w.clone().into(), &q, 1e-12).unwrap();
        let u2 = u.axpy(3.0 * sampling::scalar(&mut rng), &dir);
        let w2 = w.axpy(3.0 * sampling::scalar(&mut rng), &dir);
        let moved = quotient_sip(&u2.into(), &w2.into(), &q, 1e-12).unwrap();
        worst_shift = worst_shift.max((base - moved).abs());
    }
    let mut worst_coord = 0.0_f64;
    for p in [1.5, 3.0] {
        for n in [3, 5] {
            let q = QuotientSpace::new(SubspaceBasis::coordinate(&[0], NormModel::lp(p, n).unwrap()).unwrap()).unwrap();
            for _ in 0..100 {
                let u = sampling::scaled_sphere(&mut rng, n);
                let w = sampling::scaled_sphere(&mut rng, n);
                let s = quotient_sip(&u.clone().into(), &w.clone().into(), &q, 1e-12).unwrap();
                worst_coord = worst_coord.max((s - lp_sip(&u.as_slice()[1..], &w.as_slice()[1..], p)).abs());
            }
        }
    }
    outcome(
        worst_shift <= 1e-8 && worst_coord <= 1e-9,
        format!("representative shift {worst_shift:.1e} (<= 1e-8), coordinate case {worst_coord:.1e} (<= 1e-9)"),
    )
}

fn measured(c: &Certificate) -> f64 {
    c.evidence.measured()[0].1
}

fn pipeline(cache: &mut Option<siplab::counterexample::PipelineResult>) -> Outcome {
    let start = Instant::now();
    let cfg = PipelineConfig::default();
    let r = match run_pipeline(&cfg) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("pipeline failed: {e}")),
    };
    let t = start.elapsed();
    let complement = measured(&r.complement);
    let Evidence::Preservation {
        n_pairs,
        max_residual,
        max_norm_residual,
        max_sip4_residual,
        ..
    } = r.preservation.evidence
    else {
        unreachable!()
    };
    let violation = measured(&r.nonlinearity);
    let control = run_pipeline(&PipelineConfig::new(NormModel::lp(2.0, 3).unwrap(), 3.0, 42));
    let control_ok = matches!(&control, Err(e @ Error::NoNonlinearComplement { .. })
        if e.to_string().starts_with("no non-linear complement found"));
    let ok = complement >= 1e-2
        && n_pairs == 1000
        && max_residual.max(max_norm_residual).max(max_sip4_residual) <= 1e-6
        && violation >= 1e-2
        && r.passed()
        && t < Duration::from_secs(60)
        && control_ok;
    let detail = format!(
        "complement {complement:.3} (>= 1e-2), preservation {max_residual:.1e} over {n_pairs} pairs (<= 1e-6), \
         violation {violation:.3} (>= 1e-2), {:.1}s, hilbert control {}",
        t.as_secs_f64(),
        if control_ok { "refused" } else { "NOT refused" }
    );
    *cache = Some(r);
    outcome(ok, detail)
}

fn hanner() -> Outcome {
    let mut violations = 0;
    let mut not_equal = 0;
    for (i, p) in [1.5, 2.0, 3.0, 4.0].into_iter().enumerate() {
        let s = hanner_suite(p, 4, 10_000, 700 + i as u64).unwrap();
        violations += s.violations;
        let mut rng = sampling::rng(750 + i as u64);
        for k in 0..1000 {
            let u = sampling::scaled_sphere(&mut rng, 4);
            let w = sampling::scaled_sphere(&mut rng, 4);
            let r = if p == 2.0 && k % 2 == 0 {
                hanner_check(&u, &w, p).unwrap()
            } else {
                // disjoint supports: first two coordinates against the last two
                let cut = |v: &Vector, lo: bool| {
                    Vector::from((0..4).map(|j| if (j < 2) == lo { v[j] } else { 0.0 }).collect::<Vec<_>>())
                };
                hanner_check(&cut(&u, true), &cut(&w, false), p).unwrap()
            };
            not_equal += usize::from(!r.equal);
        }
    }
    outcome(
        violations == 0 && not_equal == 0,
        format!("{violations} direction violations in 4x10^4 pairs, {not_equal} equality failures in 4000 cases"),
    )
}

fn coordinate_case() -> Outcome {
    let mut failures = 0;
    let mut worst = 0.0_f64;
    let mut rng = sampling::rng(800);
    for p in [1.5, 3.0] {
        for k in 0..100u64 {
            let n = rng.random_range(2..=8usize);
            let n_coords = rng.random_range(1..n);
            let mut all: Vec<usize> = (0..n).collect();
            rand::seq::SliceRandom::shuffle(all.as_mut_slice(), &mut rng);
            let coords = &all[..n_coords];
            let r = lp_sl_coordinate_case(n, p, coords, 900 + k, 1e-9).unwrap();
            failures += usize::from(!r.passed);
            worst = worst.max(r.worst);
        }
    }
    outcome(failures == 0, format!("{failures} failing instances of 200, worst residual {worst:.1e} (<= 1e-9)"))
}

fn forward_harness(cache: &Option<siplab::counterexample::PipelineResult>) -> Outcome {
    let Some(r) = cache else {
        return outcome(false, "no pipeline instance");
    };
    let h = HSection::new(&r.instance, 2, 1).unwrap();
    let rep = thm2_forward_harness(&h, &Thm2Options::new(64, 42, 1e-6)).unwrap();
    let ctl = thm2_forward_harness(&NormScramble::new(3).unwrap(), &Thm2Options::new(64, 42, 1e-6)).unwrap();
    let ok = rep.passed
        && rep.membership_residual <= 1e-6
        && rep.isometry_residual <= 1e-6
        && rep.nonlinearity >= 1e-2
        && !ctl.passed
        && ctl.membership_residual >= 1e-2;
    outcome(
        ok,
        format!(
            "h: membership {:.1e}, isometry {:.1e}, non-linearity {:.3}, dim Y {}; control membership {:.3}",
            rep.membership_residual, rep.isometry_residual, rep.nonlinearity, rep.y_dim, ctl.membership_residual
        ),
    )
}

fn replay_cli(path: &std::path::Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_siplab"))
        .arg("replay")
        .arg(path)
        .output()
        .expect("binary runs")
        .status
        .code()
        .unwrap_or(-1)
}

fn replay(cache: &Option<siplab::counterexample::PipelineResult>) -> Outcome {
    let Some(r) = cache else {
        return outcome(false, "no pipeline certificates");
    };
    let dir = tempfile::tempdir().unwrap();
    let certs: Vec<Certificate> = r.certificates().into_iter().cloned().collect();
    let library_ok = certs
        .iter()
        .all(|c| siplab::counterexample::replay(c, ReplayMode::Exact).map(|o| o.ok()).unwrap_or(false));
    let all = dir.path().join("certs.json");
    std::fs::write(&all, serde_json::to_string_pretty(&certs).unwrap()).unwrap();
    let mut codes = vec![replay_cli(&all)];
    for (i, c) in certs.iter().enumerate() {
        let single = dir.path().join(format!("cert{i}.json"));
        std::fs::write(&single, c.to_json()).unwrap();
        codes.push(replay_cli(&single));
    }
    let mut tampered_codes = Vec::new();
    for (i, c) in certs.iter().enumerate() {
        let mut v: serde_json::Value = serde_json::from_str(&c.to_json()).unwrap();
        let key = c.evidence.measured()[0].0;
        let bits = v[key].as_f64().unwrap().to_bits() ^ 1;
        v[key] = serde_json::json!(f64::from_bits(bits));
        let bad = dir.path().join(format!("bad{i}.json"));
        std::fs::write(&bad, serde_json::to_string(&v).unwrap()).unwrap();
        tampered_codes.push(replay_cli(&bad));
    }
    let ok = library_ok && codes.iter().all(|&c| c == 0) && tampered_codes.iter().all(|&c| c == 2);
    outcome(ok, format!("replay exits {codes:?}, tampered exits {tampered_codes:?}"))
}

fn main() {
    let mut cache = None;
    let criteria: Vec<(&str, Box<dyn FnOnce(&mut Option<_>) -> Outcome>)> = vec![
        ("axiom suite", Box::new(|_| axioms())),
        ("oracle equivalence", Box::new(|_| oracle_equivalence())),
        ("orthogonality equivalence", Box::new(|_| orthogonality_equivalence())),
        ("decomposition", Box::new(|_| decomposition())),
        ("quotient semi-inner product", Box::new(|_| quotient_sip_checks())),
        ("shift-map pipeline", Box::new(pipeline)),
        ("hanner inequality", Box::new(|_| hanner())),
        ("coordinate subspaces of lp", Box::new(|_| coordinate_case())),
        ("forward harness", Box::new(|c: &mut Option<_>| forward_harness(c))),
        ("certificate replay", Box::new(|c: &mut Option<_>| replay(c))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let o = run(&mut cache);
        println!("{} {:>2} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, i + 1, o.detail);
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
