use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use jetsuita_core::analysis::{appendix_row, AppendixRow, LemmaCheck};
use jetsuita_core::report::{to_json, write_plot_data, write_scan_csv};
use jetsuita_core::{
    green_disc, log_capacity, minimal_integral, scan_g, suita_compare, verify_mass, verify_orthogonality, DomainSpec,
    MarkedPoint, Problem, PsiSpec, QuadratureConfig,
};
use num_complex::Complex64;
use serde::Serialize;

use crate::{Command, Output};

/// How a command that ran to completion ended.
#[derive(Debug, PartialEq)]
pub enum Status {
    Ok,
    /// A proven property failed numerically: an internal bug sentinel.
    Violation(String),
}

/// 4 for bad input (unreadable files, schema or invariant errors), 2 for
/// numerical failure.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    match e.chain().find_map(|c| c.downcast_ref::<jetsuita_core::Error>()) {
        Some(core) if !core.is_input() => 2,
        _ => 4,
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    problem: &'a Problem,
    report: &'a T,
}

pub fn run(cmd: Command) -> Result<Status> {
    match cmd {
        Command::Green { z0, z } => {
            let z0 = parse_complex(&z0)?;
            println!("z\tG(z, z0)");
            for s in &z {
                let g = green_disc(parse_complex(s)?, z0)?;
                println!("{s}\t{g:.6}");
            }
            Ok(Status::Ok)
        }
        Command::Capacity { z0 } => {
            println!("z0\tc_beta");
            for s in &z0 {
                let pt = MarkedPoint::new(parse_complex(s)?, 1.0, 0, Complex64::new(1.0, 0.0));
                println!("{s}\t{:.6}", log_capacity(&DomainSpec::UnitDisc, &pt)?);
            }
            Ok(Status::Ok)
        }
        Command::Problem { name } => {
            let p = Problem::builtin(&name).ok_or_else(|| anyhow!("unknown built-in problem {name:?}"))?;
            print!("{}", to_json(&p.resolved())?);
            Ok(Status::Ok)
        }
        Command::Solve { problem, t, out } => {
            let p = load_problem(&problem)?;
            let res = minimal_integral(&p.weights()?, &p.gain, t, &p.solve_options())?;
            emit(&out, &p, &res)?;
            Ok(Status::Ok)
        }
        Command::Scan {
            problem,
            r_count,
            csv,
            emit_plot_data,
            out,
        } => {
            let mut p = load_problem(&problem)?;
            if let Some(n) = r_count {
                p.numerics.r_count = n;
                p.validate()?;
            }
            let report = scan_g(&p, p.numerics.r_count)?;
            if let Some(path) = csv {
                write_scan_csv(&report, create(&path)?)?;
            }
            if let Some(path) = emit_plot_data {
                write_plot_data(&report, create(&path)?)?;
            }
            emit(&out, &p, &report)?;
            Ok(if report.concave {
                Status::Ok
            } else {
                Status::Violation(format!(
                    "second difference {:e} exceeds tolerance {:e}",
                    report.max_violation, report.tolerance
                ))
            })
        }
        Command::Suita { problem, out } => {
            let p = load_problem(&problem)?;
            let report = suita_compare(&p)?;
            emit(&out, &p, &report)?;
            Ok(if !report.inequality_holds {
                Status::Violation(format!("bound {} below minimal integral {}", report.bound, report.c_omega_f))
            } else if !report.criteria_agree {
                Status::Violation(format!(
                    "equality is {} but the criteria give {}",
                    report.equality,
                    report.criterion.all()
                ))
            } else {
                Status::Ok
            })
        }
        Command::Appendix { a, json } => appendix(if a.is_empty() { vec![-1.0 / 3.0, 0.25, 1.0, -1.0] } else { a }, json),
        Command::VerifyLemmas {
            problem,
            pole,
            max_degree,
            mass_tolerance,
            orthogonality_tolerance,
            out,
        } => verify_lemmas(problem, pole, max_degree, mass_tolerance, orthogonality_tolerance, &out),
    }
}

/// `re` or `re,im`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().with_context(|| format!("bad number {t:?} in {s:?}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => bail!("expected `re` or `re,im`, got {s:?}"),
    }
}

/// `re,im:p` or `re:p`.
pub fn parse_pole(s: &str) -> Result<(Complex64, f64)> {
    let (z, p) = s.split_once(':').ok_or_else(|| anyhow!("expected `re,im:p`, got {s:?}"))?;
    let p = p.trim().parse::<f64>().with_context(|| format!("bad weight in {s:?}"))?;
    Ok((parse_complex(z)?, p))
}

/// A path to a JSON problem file, or the name of a built-in problem.
pub fn load_problem(arg: &str) -> Result<Problem> {
    let path = Path::new(arg);
    let p = if path.exists() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {arg}"))?;
        Problem::from_json(&text).with_context(|| format!("loading {arg}"))?
    } else if let Some(p) = Problem::builtin(arg) {
        p
    } else {
        bail!("{arg:?} is neither a file nor a built-in problem (appendix, single_point, epsilon_bump)");
    };
    Ok(p.resolved())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_out(out: &Output, text: &str) -> Result<()> {
    match &out.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn emit<T: Serialize>(out: &Output, problem: &Problem, report: &T) -> Result<()> {
    write_out(out, &to_json(&Envelope { problem, report })?)
}

fn appendix(values: Vec<f64>, json: bool) -> Result<Status> {
    let rows = values.iter().map(|&a| appendix_row(a)).collect::<jetsuita_core::Result<Vec<AppendixRow>>>()?;
    if json {
        print!("{}", to_json(&rows)?);
    } else {
        println!(
            "{:>10} {:>20} {:>20} {:>20} {:>20} {:>20} {:>20} {:>9} {:>9}  ratios",
            "a", "bound", "bound_target", "C", "C_target", "gap", "gap_target", "equality", "criteria"
        );
        for r in &rows {
            let ratios: Vec<String> = r.ratios.iter().map(|z| format!("{:.9}{:+.9}i", z.re, z.im)).collect();
            println!(
                "{:>10.6} {:>20.14} {:>20.14} {:>20.14} {:>20.14} {:>20.14} {:>20.14} {:>9} {:>9}  {}",
                r.a,
                r.bound,
                r.bound_target,
                r.c_omega_f,
                r.c_target,
                r.gap,
                r.gap_target,
                r.equality,
                r.criterion_all,
                ratios.join(" ")
            );
        }
    }
    let bad: Vec<String> = rows.iter().filter_map(appendix_mismatch).collect();
    Ok(if bad.is_empty() { Status::Ok } else { Status::Violation(bad.join("; ")) })
}

fn appendix_mismatch(r: &AppendixRow) -> Option<String> {
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs();
    let expect_equal = (r.a + 1.0 / 3.0).abs() < 1e-12;
    if rel(r.bound, r.bound_target) > 1e-10 {
        Some(format!("a = {}: bound {} vs {}", r.a, r.bound, r.bound_target))
    } else if rel(r.c_omega_f, r.c_target) > 1e-8 {
        Some(format!("a = {}: C {} vs {}", r.a, r.c_omega_f, r.c_target))
    } else if (r.gap - r.gap_target).abs() > 1e-6 * r.gap_target.max(1e-8 * r.bound) {
        Some(format!("a = {}: gap {} vs {}", r.a, r.gap, r.gap_target))
    } else if r.equality != expect_equal || r.criterion_all != expect_equal {
        Some(format!("a = {}: equality {} criteria {}", r.a, r.equality, r.criterion_all))
    } else {
        None
    }
}

#[derive(Serialize)]
struct DegreeCheck {
    degree: usize,
    #[serde(flatten)]
    check: LemmaCheck,
}

#[derive(Serialize)]
struct LemmaReport {
    problem: Option<Problem>,
    poles: Vec<(Complex64, f64)>,
    mesh: QuadratureConfig,
    mass: LemmaCheck,
    mass_tolerance: f64,
    orthogonality: Vec<DegreeCheck>,
    orthogonality_tolerance: f64,
    passed: bool,
}

fn verify_lemmas(
    problem: Option<String>,
    pole: Vec<String>,
    max_degree: usize,
    mass_tolerance: f64,
    orthogonality_tolerance: f64,
    out: &Output,
) -> Result<Status> {
    let (problem, psi, mesh) = if !pole.is_empty() {
        let poles = pole.iter().map(|s| parse_pole(s)).collect::<Result<Vec<_>>>()?;
        (None, PsiSpec::from_poles(&poles)?, QuadratureConfig::default())
    } else if let Some(arg) = problem {
        let p = load_problem(&arg)?;
        let psi = p.weights()?.psi;
        let mesh = p.numerics.mesh.clone();
        (Some(p), psi, mesh)
    } else {
        bail!("give a problem or at least one --pole");
    };
    let mass = verify_mass(&psi, &mesh)?;
    let orthogonality = (0..=max_degree)
        .map(|n| verify_orthogonality(&psi, n, &mesh).map(|check| DegreeCheck { degree: n, check }))
        .collect::<jetsuita_core::Result<Vec<_>>>()?;
    let mut bad = Vec::new();
    if mass.relative > mass_tolerance {
        bad.push(format!("mass {} vs {} (relative {:e})", mass.value, mass.reference, mass.relative));
    }
    for d in &orthogonality {
        if d.check.relative > orthogonality_tolerance {
            bad.push(format!("orthogonality at degree {}: relative {:e}", d.degree, d.check.relative));
        }
    }
    let report = LemmaReport {
        problem,
        poles: psi.terms().map(|t| (t.pole, 0.5 * t.coeff)).collect(),
        mesh,
        mass,
        mass_tolerance,
        orthogonality,
        orthogonality_tolerance,
        passed: bad.is_empty(),
    };
    write_out(out, &to_json(&report)?)?;
    Ok(if bad.is_empty() { Status::Ok } else { Status::Violation(bad.join("; ")) })
}
