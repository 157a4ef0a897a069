//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion
//! and exits nonzero when any fails.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use common::c;
use jetsuita_core::analysis::appendix_row;
use jetsuita_core::forms::{gram_analytic, gram_analytic_disc, jet_constraints};
use jetsuita_core::solver::{kkt_minimize, oracle_minimize};
use jetsuita_core::weights::PsiSpec;
use jetsuita_core::{
    linear_restriction_identity, minimal_integral, scan_g, verify_mass, verify_orthogonality, DomainSpec,
    GainFunction, MarkedPoint, Method, Problem, QuadratureConfig, RatioTrend, SolveOptions, WeightPair,
};
use rand::Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn sweep() -> Vec<f64> {
    (0..41).map(|i| -1.0 + 0.05 * i as f64).collect()
}

fn appendix_reproduction() -> Outcome {
    let start = Instant::now();
    let mut worst = (0.0f64, 0.0f64);
    for a in [-1.0 / 3.0, 0.25, 1.0, -1.0] {
        let row = appendix_row(a).map_err(|e| e.to_string())?;
        let ec = rel(row.c_omega_f, row.c_target);
        let eb = rel(row.bound, row.bound_target);
        check(ec <= 1e-8, format!("a = {a}: C rel error {ec:.2e}"))?;
        check(eb <= 1e-10, format!("a = {a}: bound rel error {eb:.2e}"))?;
        worst = (worst.0.max(ec), worst.1.max(eb));
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!("max rel error C {:.1e}, bound {:.1e}, {elapsed:.2?}", worst.0, worst.1))
}

fn equality_dichotomy() -> Outcome {
    let mut worst = 0.0f64;
    for a in sweep() {
        let row = appendix_row(a).map_err(|e| e.to_string())?;
        check(!row.equality, format!("equality reported at a = {a}"))?;
        let e = rel(row.gap, row.gap_target);
        check(e <= 1e-6, format!("a = {a}: gap rel error {e:.2e}"))?;
        worst = worst.max(e);
    }
    let row = appendix_row(-1.0 / 3.0).map_err(|e| e.to_string())?;
    check(row.equality, "no equality at a = -1/3")?;
    check(row.gap.abs() <= 1e-8 * row.bound, format!("gap {:.2e} at a = -1/3", row.gap))?;
    Ok(format!("41-point sweep strict, equality at a = -1/3, max gap rel error {worst:.1e}"))
}

fn criterion_biconditional() -> Outcome {
    let mut points = sweep();
    points.push(-1.0 / 3.0);
    for a in points {
        let row = appendix_row(a).map_err(|e| e.to_string())?;
        check(row.equality == row.criterion_all, format!("a = {a}: equality {} vs criteria {}", row.equality, row.criterion_all))?;
        let unit = -row.ratios[0];
        check((unit.norm() - 1.0).abs() < 1e-12, format!("a = {a}: first ratio {}", row.ratios[0]))?;
        let second = row.ratios[1] / unit;
        check((second - c(3.0 * a, 0.0)).norm() <= 1e-12 * (3.0 * a).abs().max(1.0), format!("a = {a}: second ratio {second}"))?;
        let equal = (row.ratios[0] - row.ratios[1]).norm() <= 1e-8;
        let at_third = (a + 1.0 / 3.0).abs() < 1e-12;
        check(equal == at_third, format!("a = {a}: ratios equal = {equal}"))?;
    }
    Ok("equality == all criteria at 42 points; ratios {-1, 3a}".into())
}

fn suita_linearity() -> Outcome {
    let start = Instant::now();
    let p = Problem::single_point();
    let w = p.weights().map_err(|e| e.to_string())?;
    let quad = SolveOptions {
        method: Method::Quadrature,
        ..p.solve_options()
    };
    let (mut wq, mut wa) = (0.0f64, 0.0f64);
    for t in [0.0, 0.5, 1.0, 2.0] {
        let expected = 2.0 * PI * (-t as f64).exp();
        let q = minimal_integral(&w, &p.gain, t, &quad).map_err(|e| e.to_string())?.value;
        let a = minimal_integral(&w, &p.gain, t, &p.solve_options()).map_err(|e| e.to_string())?.value;
        check(rel(q, expected) <= 1e-6, format!("t = {t}: quadrature G rel error {:.2e}", rel(q, expected)))?;
        check(rel(a, expected) <= 1e-12, format!("t = {t}: analytic G rel error {:.2e}", rel(a, expected)))?;
        wq = wq.max(rel(q, expected));
        wa = wa.max(rel(a, expected));
    }
    let scan = scan_g(&p, 17).map_err(|e| e.to_string())?;
    check(scan.is_linear, format!("not linear, residual {:.2e}", scan.residual))?;
    check((scan.slope - 2.0 * PI).abs() <= 1e-4, format!("slope {}", scan.slope))?;
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(30), format!("took {elapsed:?}"))?;
    Ok(format!("G rel error quadrature {wq:.1e}, analytic {wa:.1e}; slope {:.10}, {elapsed:.2?}", scan.slope))
}

fn concavity_suite() -> Outcome {
    let mut margins = Vec::new();
    for seed in 0..10 {
        let p = common::random_problem(seed);
        let r = scan_g(&p, 17).map_err(|e| format!("{}: {e}", p.name))?;
        check(r.r_grid.len() == 17, "grid size")?;
        let allowed = 10.0 * r.quadrature_errors.iter().cloned().fold(0.0, f64::max) + 1e-12 * r.g_values.iter().cloned().fold(0.0, f64::max);
        check(
            r.concave && r.max_violation <= allowed,
            format!("{}: max second difference {:.3e} > {:.3e}", p.name, r.max_violation, allowed),
        )?;
        margins.push(r.max_violation);
    }
    let worst = margins.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(format!("10 random problems concave; largest second difference {worst:.2e}"))
}

fn nonlinearity_detection() -> Outcome {
    let r = scan_g(&Problem::epsilon_bump(0.1), 17).map_err(|e| e.to_string())?;
    check(!r.is_linear, "epsilon bump reported linear")?;
    check(r.residual > 1e-3, format!("residual {:.2e}", r.residual))?;
    check(r.concave, "epsilon bump not concave")?;
    Ok(format!("is_linear = false, line-fit residual {:.2e}", r.residual))
}

fn lemma_identities() -> Outcome {
    let start = Instant::now();
    let cfg = QuadratureConfig::default();
    let configs: [&[(f64, f64)]; 3] = [&[(0.0, 3.0)], &[(0.0, 3.0), (0.5, 3.0)], &[(0.0, 2.5), (0.5, 4.5)]];
    let (mut wm, mut wo) = (0.0f64, 0.0f64);
    for cfgp in configs {
        let poles: Vec<_> = cfgp.iter().map(|&(x, p)| (c(x, 0.0), p)).collect();
        let psi = PsiSpec::from_poles(&poles).map_err(|e| e.to_string())?;
        let m = verify_mass(&psi, &cfg).map_err(|e| e.to_string())?;
        check(m.relative <= 1e-3, format!("{cfgp:?}: mass {} vs {}", m.value, m.reference))?;
        wm = wm.max(m.relative);
        for n in 0..=3 {
            let o = verify_orthogonality(&psi, n, &cfg).map_err(|e| e.to_string())?;
            check(o.relative <= 1e-6, format!("{cfgp:?}, degree {n}: {:.2e}", o.relative))?;
            wo = wo.max(o.relative);
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(60), format!("took {elapsed:?}"))?;
    Ok(format!("mass rel error {wm:.1e}, orthogonality {wo:.1e}, {elapsed:.2?}"))
}

fn restriction_identity() -> Outcome {
    let mut moebius = Problem::single_point();
    moebius.name = "moebius_single".into();
    moebius.domain = DomainSpec::moebius(c(2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).map_err(|e| e.to_string())?;
    moebius.marked = vec![MarkedPoint::new(c(1.0, 0.0), 1.0, 0, c(1.0, 0.0))];
    let mut exp_gain = Problem::single_point();
    exp_gain.name = "single_exp".into();
    exp_gain.gain = GainFunction::exponential(0.5).map_err(|e| e.to_string())?;
    let configs = [Problem::single_point(), Problem::appendix(c(-1.0 / 3.0, 0.0)), moebius, exp_gain];
    let densities = [GainFunction::constant(1.0).unwrap(), GainFunction::exponential(0.5).unwrap()];
    let mut worst = 0.0f64;
    let mut linear = 0;
    for p in &configs {
        let scan = scan_g(p, 17).map_err(|e| format!("{}: {e}", p.name))?;
        if !scan.is_linear {
            continue;
        }
        linear += 1;
        for (t1, t2) in [(2.0, 1.0), (1.0, 0.25)] {
            for a in &densities {
                let r = linear_restriction_identity(p, t1, t2, a).map_err(|e| format!("{}: {e}", p.name))?;
                check(r.relative_error <= 1e-5, format!("{} ({t1}, {t2}): lhs {} rhs {}", p.name, r.lhs, r.rhs))?;
                worst = worst.max(r.relative_error);
            }
        }
    }
    check(linear >= 3, format!("only {linear} configurations detected linear"))?;
    Ok(format!("{linear} linear configurations x 2 bands x 2 densities, max rel error {worst:.1e}"))
}

fn oracle_equivalence() -> Outcome {
    let mut r = common::rng(2024);
    let mut worst = 0.0f64;
    for i in 0..10 {
        let n = 32;
        let m = r.random_range(1..=5);
        let pts = common::random_points(&mut r, m, 0.7, 0.2);
        let marked: Vec<MarkedPoint> = pts
            .iter()
            .map(|&z| MarkedPoint::new(z, 1.0, r.random_range(0..=1), common::random_coeff(&mut r)))
            .collect();
        let w = WeightPair::canonical(DomainSpec::UnitDisc, marked).map_err(|e| e.to_string())?;
        let cs = jet_constraints(&w, n).map_err(|e| e.to_string())?;
        let h = match i % 3 {
            0 => gram_analytic_disc(n),
            1 => common::random_gram(&mut r, n + 1, 1e3),
            _ => {
                let single = WeightPair::canonical(DomainSpec::UnitDisc, vec![MarkedPoint::new(c(0.0, 0.0), 1.5, 0, c(1.0, 0.0))]).unwrap();
                let mut g = gram_analytic(&single, &GainFunction::exponential(0.5).unwrap(), 0.3, n).map_err(|e| e.to_string())?;
                g.t = 0.0;
                g
            }
        };
        let kkt = kkt_minimize(&h, &cs).map_err(|e| e.to_string())?.value;
        let oracle = oracle_minimize(&h, &cs, 4, 100 + i as u64).map_err(|e| e.to_string())?;
        let e = (kkt - oracle).abs() / (1.0 + kkt.abs());
        check(e <= 1e-6, format!("instance {i}: kkt {kkt} oracle {oracle}"))?;
        worst = worst.max(e);
    }
    Ok(format!("10 instances, max relative disagreement {worst:.1e}"))
}

fn ratio_trichotomy() -> Outcome {
    let grid: Vec<f64> = (0..=20).map(|i| 2.0 * i as f64).collect();
    for gain in [GainFunction::constant(1.0).unwrap(), GainFunction::exponential(0.25).unwrap()] {
        for (a, expected) in [(0.5, RatioTrend::ToInfinity), (1.0, RatioTrend::ToOne), (2.0, RatioTrend::ToZero)] {
            let probe = gain.ratio_probe(a, &grid).map_err(|e| e.to_string())?;
            check(probe.trend == expected, format!("{gain:?}, a = {a}: {:?}", probe.trend))?;
        }
    }
    Ok("a = 0.5 -> inf, a = 1 -> 1, a = 2 -> 0 for c = 1 and c = e^(t/4)".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("appendix reproduction", appendix_reproduction),
        ("appendix equality dichotomy", equality_dichotomy),
        ("criterion biconditional", criterion_biconditional),
        ("single-point linearity", suita_linearity),
        ("concavity suite", concavity_suite),
        ("nonlinearity detection", nonlinearity_detection),
        ("mass and orthogonality identities", lemma_identities),
        ("linear restriction identity", restriction_identity),
        ("oracle equivalence", oracle_equivalence),
        ("ratio trichotomy", ratio_trichotomy),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
