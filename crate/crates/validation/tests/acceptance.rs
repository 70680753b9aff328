//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use dhinf::config::HinfConfig;
use dhinf::lmi::{assemble_nominal_brl, assemble_robust_brl, petersen_absorb_numeric, GammaSpec};
use dhinf::model::{spectral_radius, Mat, SvdEquivalentForm, UncertainPlant, UncertaintyFactors, DEFAULT_RANK_TOL};
use dhinf::random::{self, Dims};
use dhinf::sdp::{solve_feasibility, SdpProblem, SolveStatus, SolverConfig};
use dhinf::synth::{recover_gain, roundtrip_error, synthesize_in_form, synthesize_optimal};
use dhinf::verify::{hinf_norm, robust_verify, sample_uncertainty, SampleMode};
use dhinf::{example, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn grid41() -> Vec<Mat> {
    sample_uncertainty(1, 41, SampleMode::Grid, 0).unwrap()
}

fn optimal_gamma(alpha: f64, lo: f64, hi: f64) -> Outcome {
    let t0 = Instant::now();
    let res = synthesize_optimal(&example::plant(), alpha, &SolverConfig::default());
    let secs = t0.elapsed().as_secs_f64();
    match res {
        Ok(r) => outcome(
            r.gamma >= lo && r.gamma <= hi && secs < 30.0,
            format!("gamma_min = {:.5}, target [{lo}, {hi}], {secs:.2} s", r.gamma),
        ),
        Err(e) => outcome(false, format!("synthesis failed: {e}")),
    }
}

fn c1() -> Outcome {
    optimal_gamma(0.0, 1.871, 1.948)
}

fn c2() -> Outcome {
    optimal_gamma(1000.0, 1.161, 1.209)
}

fn c3() -> Outcome {
    let form = SvdEquivalentForm::new(&example::plant(), DEFAULT_RANK_TOL).unwrap();
    let rho = spectral_radius(&form).unwrap();
    outcome((rho - 2.5).abs() <= 1e-9, format!("rho = {rho:.12}"))
}

fn c4() -> Outcome {
    let up = example::plant();
    let hinf = HinfConfig::default();
    let check = |name: &str, k: &Mat, rho: (f64, f64), norm: f64| -> (bool, String) {
        let rep = robust_verify(&up, Some(k), &grid41(), None, &hinf).unwrap();
        let (lo, hi) = (rep.rho_min.unwrap(), rep.rho_max.unwrap());
        let ok = rep.all_admissible
            && lo >= rho.0 - 1e-3
            && hi <= rho.1 + 1e-3
            && rep.sampled_worst_case_norm <= norm + 1e-3;
        (
            ok,
            format!(
                "{name}: admissible {}, rho [{lo:.4}, {hi:.4}] vs [{}, {}], norm {:.4} vs {norm}",
                rep.all_admissible, rho.0, rho.1, rep.sampled_worst_case_norm
            ),
        )
    };
    let (ok1, d1) = check("K1", &example::gain_k1(), (0.2473, 0.3480), 2.0089);
    let (ok2, d2) = check("K2", &example::gain_k2(), (0.4835, 0.5008), 1.1044);
    outcome(ok1 && ok2, format!("{d1}; {d2}"))
}

fn c5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cfg = SolverConfig::default();
    let hinf = HinfConfig::default();
    let (mut ok, mut violations, mut uncertified) = (0, 0, 0);
    let mut worst_slack = f64::INFINITY;
    for _ in 0..20 {
        let d = Dims::random(&mut rng, 4);
        let up = random::uncertain_plant(&mut rng, d, 0.2);
        match synthesize_optimal(&up, 0.0, &cfg) {
            Ok(res) => {
                let rep = robust_verify(&up, Some(&res.gain), &grid41(), Some(res.gamma + 1e-3), &hinf).unwrap();
                worst_slack = worst_slack.min(res.gamma - rep.sampled_worst_case_norm);
                if rep.pass {
                    ok += 1;
                } else {
                    violations += 1;
                }
            }
            Err(Error::Infeasible(_)) | Err(Error::Numerical(_)) => uncertified += 1,
            Err(e) => return outcome(false, format!("unexpected error: {e}")),
        }
    }
    outcome(
        violations == 0 && ok > 0,
        format!("{ok} certified and verified, {violations} violations, {uncertified} without certificate; min gamma - norm = {worst_slack:.2e}"),
    )
}

fn c6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cfg = SolverConfig::default();
    let (mut feasible, mut violations) = (0, 0);
    for _ in 0..50 {
        let n = rng.gen_range(1..=4);
        let s = rng.gen_range(1..=2);
        let a = random::matrix(&mut rng, n, n, 1.0);
        let g = -(a.transpose() * &a) - Mat::identity(n, n) * rng.gen_range(0.05..1.0);
        let m = random::matrix(&mut rng, n, s, 1.0);
        let nn = random::matrix(&mut rng, s, n, 1.0);
        let ami = petersen_absorb_numeric(&g, &m, &nn).unwrap();
        let sol = solve_feasibility(&SdpProblem::from_ami(&ami, cfg.margin).unwrap(), &cfg).unwrap();
        if sol.status != SolveStatus::Feasible {
            continue;
        }
        feasible += 1;
        let mut deltas = sample_uncertainty(s, 100 - (1 << s), SampleMode::Random, rng.gen()).unwrap();
        deltas.extend(sample_uncertainty(s, 0, SampleMode::Vertices, 0).unwrap());
        for d in &deltas {
            let t = &m * d * &nn;
            let lhs = &g + &t + t.transpose();
            if lhs.symmetric_eigenvalues().max() >= 0.0 {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0 && feasible > 0,
        format!("{feasible}/50 absorbed forms feasible, {violations} sampled violations"),
    )
}

fn zero_factor_plant(plant: dhinf::DescriptorPlant) -> UncertainPlant {
    let (n, q, p) = (plant.n(), plant.q(), plant.p());
    UncertainPlant::new(
        plant,
        UncertaintyFactors {
            ma: Some(Mat::zeros(n, 1)),
            na: Some(Mat::zeros(1, n)),
            mb: Some(Mat::zeros(n, 1)),
            nb: Some(Mat::zeros(1, q)),
            mc: Some(Mat::zeros(p, 1)),
            nc: Some(Mat::zeros(1, n)),
            md: Some(Mat::zeros(p, 1)),
            nd: Some(Mat::zeros(1, q)),
            s: Some(1),
        },
    )
    .unwrap()
}

fn c7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = SolverConfig::default();
    let (mut agree, mut both_fail_above, mut disagreements, mut unsound) = (0, 0, 0, 0);
    for _ in 0..10 {
        let d = Dims::random(&mut rng, 4);
        let plant = random::admissible_plant(&mut rng, d, 0.9);
        let norm = hinf_norm(&plant.realization(), &HinfConfig::default()).unwrap().norm;
        let up = zero_factor_plant(plant);
        let form = SvdEquivalentForm::new(&up, DEFAULT_RANK_TOL).unwrap();
        let certified = |ami| {
            let sol = solve_feasibility(&SdpProblem::from_ami(&ami, cfg.margin).unwrap(), &cfg).unwrap();
            sol.status == SolveStatus::Feasible
        };
        for (factor, above) in [(0.9, false), (1.1, true)] {
            let gamma = factor * norm;
            let robust = certified(assemble_robust_brl(&form, GammaSpec::Fixed(gamma)).unwrap());
            let nominal = certified(assemble_nominal_brl(&form, gamma, 0.0).unwrap());
            if !above {
                if robust || nominal {
                    unsound += 1;
                }
                continue;
            }
            if robust == nominal {
                agree += 1;
                if !robust {
                    both_fail_above += 1;
                }
            } else {
                disagreements += 1;
            }
        }
    }
    outcome(
        unsound == 0 && disagreements == 0,
        format!("1.1 side: {agree}/10 agree ({both_fail_above} uncertified by both), {disagreements} disagree; 0.9 side: {unsound} certified"),
    )
}

fn c8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(2..=5);
        let r = rng.gen_range(1..n);
        let m = rng.gen_range(1..=3);
        let q = random::well_conditioned(&mut rng, r, 0.2, 5.0);
        let rr = random::matrix(&mut rng, r, n - r, 2.0);
        let s = random::well_conditioned(&mut rng, n - r, 0.2, 5.0);
        let z = random::matrix(&mut rng, n, m, 3.0);
        let v = random::well_conditioned(&mut rng, n, 0.3, 3.0);
        let f = recover_gain(&q, &rr, &s, &z, &v).unwrap();
        worst = worst.max(roundtrip_error(&q, &rr, &s, &z, &v, &f));
    }
    outcome(worst <= 1e-8, format!("max relative round-trip error {worst:.2e}"))
}

fn c9() -> Outcome {
    let up = example::plant();
    let cfg = SolverConfig::default();
    let a = SvdEquivalentForm::new(&up, DEFAULT_RANK_TOL).unwrap();
    let (n, r) = (a.n(), a.r);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let t1 = random::well_conditioned(&mut rng, r, 0.5, 2.0);
    let t2 = random::well_conditioned(&mut rng, n - r, 0.5, 2.0);
    let t3 = random::well_conditioned(&mut rng, n - r, 0.5, 2.0);
    let mut left = Mat::zeros(n, n);
    left.view_mut((0, 0), (r, r)).copy_from(&t1);
    left.view_mut((r, r), (n - r, n - r)).copy_from(&t2);
    let mut right = Mat::zeros(n, n);
    right
        .view_mut((0, 0), (r, r))
        .copy_from(&t1.clone().try_inverse().unwrap());
    right.view_mut((r, r), (n - r, n - r)).copy_from(&t3);
    let b = SvdEquivalentForm::from_transforms(&up, &left * &a.w, &a.v * &right).unwrap();

    let mut details = Vec::new();
    let mut ok = true;
    // The alpha-extended blocks are not form-invariant, so only the alpha = 0 program is compared.
    let ga = synthesize_in_form(&up, &a, GammaSpec::Minimize, 0.0, &cfg).map(|s| s.gamma);
    let gb = synthesize_in_form(&up, &b, GammaSpec::Minimize, 0.0, &cfg).map(|s| s.gamma);
    match (ga, gb) {
        (Ok(x), Ok(y)) => {
            ok &= (x - y).abs() <= 1e-3;
            details.push(format!("gamma_min {x:.6} vs {y:.6}"));
        }
        (x, y) => {
            ok = false;
            details.push(format!(
                "gamma_min {:?} vs {:?}",
                x.map_err(|e| e.to_string()),
                y.map_err(|e| e.to_string())
            ));
        }
    }
    for gamma in [1.95, 2.1] {
        let fa = synthesize_in_form(&up, &a, GammaSpec::Fixed(gamma), 0.0, &cfg).is_ok();
        let fb = synthesize_in_form(&up, &b, GammaSpec::Fixed(gamma), 0.0, &cfg).is_ok();
        ok &= fa == fb;
        details.push(format!("gamma {gamma}: {fa} vs {fb}"));
    }
    outcome(ok, details.join("; "))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("optimal gamma, alpha = 0", c1),
        ("optimal gamma, alpha = 1000", c2),
        ("open-loop spectral radius", c3),
        ("published gains on the uncertainty grid", c4),
        ("guarantee chain on random plants", c5),
        ("Petersen absorption soundness", c6),
        ("zero-uncertainty reduction", c7),
        ("gain recovery round trip", c8),
        ("equivalent-form invariance", c9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| outcome(false, "panicked"));
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} | {name} | {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {}/{} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
