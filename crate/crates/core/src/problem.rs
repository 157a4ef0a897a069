//! Problem files: the domain, marked points, weight data, gain and the
//! numerics block, as one JSON document.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gain::GainFunction;
use crate::geometry::{DomainSpec, MarkedPoint};
use crate::polar::QuadratureConfig;
use crate::solver::{Method, SolveOptions};
use crate::weights::{WeightData, WeightPair};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtraGreen {
    pub location: Complex64,
    /// Coefficient of `G(·, location)` in `ψ`.
    pub coeff: f64,
}

/// `ψ = Σ 2pⱼ G(·, zⱼ) + Σ extra`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsiInput {
    pub extra: Vec<ExtraGreen>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Zero {
    pub location: Complex64,
    pub multiplicity: usize,
}

/// `φ + ψ = 2 log|g| + 2 Re q(ζ) + ε|ζ|²` with `g = lead · Π f_w^{m}`.
/// Without `zeros`, `g` vanishes to order `kⱼ + 1` at each marked point.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhiInput {
    pub zeros: Option<Vec<Zero>>,
    pub lead: Option<Complex64>,
    /// Coefficients of `q` in the disc coordinate.
    pub harmonic_poly: Vec<Complex64>,
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Floor of the relative line-fit residual below which a scan is linear.
    pub linearity: f64,
    /// Relative gap below which the extension bound is attained.
    pub equality: f64,
    /// Relative spread below which the point ratios count as one constant.
    pub criterion: f64,
    /// Second differences may exceed zero by this multiple of the
    /// quadrature error estimate.
    pub concavity_factor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            linearity: 1e-6,
            equality: 1e-8,
            criterion: 1e-8,
            concavity_factor: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Numerics {
    /// Truncation degree `N`.
    pub degree: usize,
    pub mesh: QuadratureConfig,
    pub method: Method,
    pub r_count: usize,
    pub tolerances: Tolerances,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            degree: 64,
            mesh: QuadratureConfig::default(),
            method: Method::Auto,
            r_count: 17,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub domain: DomainSpec,
    pub marked: Vec<MarkedPoint>,
    #[serde(default)]
    pub psi: PsiInput,
    #[serde(default)]
    pub phi: PhiInput,
    #[serde(default = "unit_gain")]
    pub gain: GainFunction,
    #[serde(default)]
    pub numerics: Numerics,
}

fn unit_gain() -> GainFunction {
    GainFunction::Constant { value: 1.0 }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl Problem {
    pub fn from_json(text: &str) -> Result<Self> {
        let p: Problem = serde_json::from_str(text).map_err(|e| Error::Problem(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    /// Re-checks every invariant of the parts.
    pub fn validate(&self) -> Result<()> {
        self.gain.validate()?;
        self.numerics.mesh.validate()?;
        let t = &self.numerics.tolerances;
        for (name, v) in [
            ("linearity", t.linearity),
            ("equality", t.equality),
            ("criterion", t.criterion),
            ("concavity_factor", t.concavity_factor),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Problem(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        if self.numerics.r_count < 5 {
            return Err(Error::Problem(format!("r_count must be at least 5, got {}", self.numerics.r_count)));
        }
        self.weights().map(|_| ())
    }

    /// The file with every default written out.
    pub fn resolved(&self) -> Problem {
        let mut p = self.clone();
        if p.phi.zeros.is_none() {
            p.phi.zeros = Some(
                self.marked
                    .iter()
                    .map(|m| Zero {
                        location: m.location,
                        multiplicity: m.jet_order + 1,
                    })
                    .collect(),
            );
        }
        p.phi.lead.get_or_insert(c(1.0, 0.0));
        p
    }

    pub fn weights(&self) -> Result<WeightPair> {
        let zeros = match &self.phi.zeros {
            Some(z) => z.iter().map(|z| (z.location, z.multiplicity)).collect(),
            None => self.marked.iter().map(|m| (m.location, m.jet_order + 1)).collect(),
        };
        WeightPair::new(
            self.domain.clone(),
            self.marked.clone(),
            WeightData {
                extra_green: self.psi.extra.iter().map(|e| (e.location, e.coeff)).collect(),
                zeros,
                lead: self.phi.lead,
                harmonic_poly: self.phi.harmonic_poly.clone(),
                epsilon: self.phi.epsilon,
            },
        )
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            degree: self.numerics.degree,
            mesh: self.numerics.mesh.clone(),
            method: self.numerics.method,
        }
    }

    fn on_disc(name: &str, marked: Vec<MarkedPoint>, phi: PhiInput) -> Problem {
        Problem {
            name: name.into(),
            domain: DomainSpec::UnitDisc,
            marked,
            psi: PsiInput::default(),
            phi,
            gain: unit_gain(),
            numerics: Numerics::default(),
        }
    }

    /// Two points on the disc: `z₁ = 0` with `p = 2`, `k = 1`, `a = 1` and
    /// `z₂ = ½` with `p = 1`, `k = 0`, `a`; `φ ≡ 0`, `c ≡ 1`.
    pub fn appendix(a: Complex64) -> Problem {
        Problem::on_disc(
            "appendix",
            vec![
                MarkedPoint::new(c(0.0, 0.0), 2.0, 1, c(1.0, 0.0)),
                MarkedPoint::new(c(0.5, 0.0), 1.0, 0, a),
            ],
            PhiInput::default(),
        )
    }

    /// One point at the origin, `p = 1`, `k = 0`, `a = 1`, `φ ≡ 0`, `c ≡ 1`.
    pub fn single_point() -> Problem {
        Problem::on_disc(
            "single_point",
            vec![MarkedPoint::new(c(0.0, 0.0), 1.0, 0, c(1.0, 0.0))],
            PhiInput::default(),
        )
    }

    /// The single-point problem with the non-harmonic bump `ε|ζ|²` added
    /// to `φ + ψ`.
    pub fn epsilon_bump(epsilon: f64) -> Problem {
        Problem::on_disc(
            "epsilon_bump",
            vec![MarkedPoint::new(c(0.0, 0.0), 1.0, 0, c(1.0, 0.0))],
            PhiInput {
                epsilon,
                ..PhiInput::default()
            },
        )
    }

    /// `m` points equally spaced on the circle of radius ½, each with
    /// `p = 1`, `k = 0`, `a = 1`.
    pub fn circle_family(m: usize) -> Problem {
        let marked = (0..m)
            .map(|j| {
                let z = Complex64::from_polar(0.5, 2.0 * std::f64::consts::PI * j as f64 / m as f64);
                MarkedPoint::new(z, 1.0, 0, c(1.0, 0.0))
            })
            .collect();
        Problem::on_disc("circle_family", marked, PhiInput::default())
    }

    pub fn builtin(name: &str) -> Option<Problem> {
        match name {
            "appendix" => Some(Problem::appendix(c(-1.0 / 3.0, 0.0))),
            "single_point" => Some(Problem::single_point()),
            "epsilon_bump" => Some(Problem::epsilon_bump(0.1)),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let text = r#"{"marked": [{"location": [0, 0], "green_weight": 1, "jet_order": 0, "jet_coeff": [1, 0]}]}"#;
        let p = Problem::from_json(text).unwrap();
        assert_eq!(p.numerics, Numerics::default());
        assert_eq!(p.gain, unit_gain());
        assert_eq!(p.domain, DomainSpec::UnitDisc);
        let r = p.resolved();
        assert_eq!(r.phi.zeros.as_ref().unwrap()[0].multiplicity, 1);
        assert!(r.weights().unwrap().phi_is_trivial());
    }

    #[test]
    fn round_trip() {
        let p = Problem::appendix(c(0.25, 0.0)).resolved();
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(Problem::from_json(&text).unwrap(), p);
    }

    #[test]
    fn bad_files_are_rejected() {
        assert!(matches!(Problem::from_json("{"), Err(Error::Problem(_))));
        let outside = r#"{"marked": [{"location": [2, 0], "green_weight": 1, "jet_order": 0, "jet_coeff": [1, 0]}]}"#;
        assert!(Problem::from_json(outside).is_err());
        let mut p = Problem::single_point();
        p.numerics.r_count = 3;
        assert!(p.validate().is_err());
        p = Problem::single_point();
        p.numerics.tolerances.equality = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn builtins_are_valid() {
        for name in ["appendix", "single_point", "epsilon_bump"] {
            Problem::builtin(name).unwrap().validate().unwrap();
        }
        assert!(Problem::builtin("nope").is_none());
        assert_eq!(Problem::circle_family(5).weights().unwrap().len(), 5);
    }
}
