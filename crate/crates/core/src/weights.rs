//! Structural weights `ψ` and `φ`.
//!
//! `ψ = Σ 2pⱼ G(·, zⱼ) + Σ (extra Green terms)` and
//! `φ + ψ = 2 log|g| + 2 Re q + ε|ζ|²`, where `g` is a Blaschke product
//! with a prescribed zero list. Lelong numbers and the constants `αⱼ` are
//! read off this data exactly.
//!
//! Locations are stored in the disc coordinate `ζ = T⁻¹(z)`; the harmonic
//! part `Re q` and the bump `ε|ζ|²` are also expressed in `ζ`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{fmt_point, Error, Result};
use crate::gain::GainFunction;
use crate::polar::Point;
use crate::geometry::{
    blaschke_unchecked, check_distinct, check_finite, green_disc_unchecked, DomainSpec, MarkedPoint,
};

/// Points closer than this (in the disc coordinate) are the same point.
pub(crate) const SAME_POINT: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GreenTerm {
    /// Pole, in the disc coordinate.
    pub pole: Complex64,
    /// Coefficient of `G(·, pole)`; twice the Lelong contribution.
    pub coeff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsiSpec {
    /// One term `2pⱼ G(·, zⱼ)` per marked point, in marked-point order.
    pub green_terms: Vec<GreenTerm>,
    /// Additional Green terms (auxiliary poles, or stacked on marked points).
    pub extra: Vec<GreenTerm>,
}

impl PsiSpec {
    /// `ψ = Σ 2pⱼ G(·, zⱼ)` from `(zⱼ, pⱼ)` pairs in the disc coordinate.
    pub fn from_poles(poles: &[(Complex64, f64)]) -> Result<Self> {
        let mut green_terms = Vec::with_capacity(poles.len());
        for (i, &(z, p)) in poles.iter().enumerate() {
            check_finite(z)?;
            if z.norm() >= 1.0 {
                return Err(Error::OutsideDomain(fmt_point(z)));
            }
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::InvalidWeight(format!("weight must be positive, got {p}")));
            }
            if poles[..i].iter().any(|(w, _)| (w - z).norm() <= SAME_POINT) {
                return Err(Error::InvalidWeight(format!("repeated pole {}", fmt_point(z))));
            }
            green_terms.push(GreenTerm { pole: z, coeff: 2.0 * p });
        }
        Ok(PsiSpec {
            green_terms,
            extra: Vec::new(),
        })
    }

    pub fn terms(&self) -> impl Iterator<Item = &GreenTerm> {
        self.green_terms.iter().chain(self.extra.iter())
    }

    /// `ψ(ζ)` in the disc coordinate.
    pub fn eval_disc(&self, zeta: Complex64) -> Result<f64> {
        let mut v = 0.0;
        for term in self.terms() {
            if (zeta - term.pole).norm() == 0.0 {
                return Err(Error::Pole(fmt_point(term.pole)));
            }
            v += term.coeff * green_disc_unchecked(zeta, term.pole);
        }
        Ok(v)
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, zeta: Complex64) -> f64 {
        self.terms()
            .map(|t| t.coeff * green_disc_unchecked(zeta, t.pole))
            .sum()
    }

    /// `ψ` at a quadrature node, exact near the node's patch center.
    #[inline]
    pub fn eval_point(&self, p: &Point) -> f64 {
        self.terms().map(|t| t.coeff * green_at_point(p, t.pole)).sum()
    }

    /// `Σ coeff · G(ζ, pole)` restricted to the marked-point terms.
    pub fn eval_green_part(&self, zeta: Complex64) -> f64 {
        self.green_terms
            .iter()
            .map(|t| t.coeff * green_disc_unchecked(zeta, t.pole))
            .sum()
    }

    /// Half the Lelong number at `zeta`.
    pub fn half_lelong_at(&self, zeta: Complex64) -> f64 {
        self.terms()
            .filter(|t| (t.pole - zeta).norm() <= SAME_POINT)
            .map(|t| 0.5 * t.coeff)
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhiSpec {
    /// Zeros of `g` (disc coordinate) with multiplicities.
    pub zeros: Vec<(Complex64, usize)>,
    pub lead: Complex64,
    /// Coefficients of `q`, `u = Re q(ζ)`.
    pub harmonic_poly: Vec<Complex64>,
    pub epsilon: f64,
}

impl PhiSpec {
    #[inline]
    pub fn log_abs_g(&self, zeta: Complex64) -> f64 {
        let mut v = self.lead.norm().ln();
        for &(z0, m) in &self.zeros {
            v += m as f64 * 0.5 * blaschke_unchecked(z0, zeta).norm_sqr().ln();
        }
        v
    }

    #[inline]
    pub fn log_abs_g_point(&self, p: &Point) -> f64 {
        let mut v = self.lead.norm().ln();
        for &(z0, m) in &self.zeros {
            v += m as f64 * green_at_point(p, z0);
        }
        v
    }

    #[inline]
    pub fn phi_plus_psi_point(&self, p: &Point) -> f64 {
        2.0 * self.log_abs_g_point(p) + 2.0 * self.u(p.z) + self.epsilon * p.z.norm_sqr()
    }

    #[inline]
    pub fn q(&self, zeta: Complex64) -> Complex64 {
        self.harmonic_poly
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * zeta + c)
    }

    #[inline]
    pub fn u(&self, zeta: Complex64) -> f64 {
        self.q(zeta).re
    }

    /// `φ + ψ = 2 log|g| + 2u + ε|ζ|²`.
    #[inline]
    pub fn phi_plus_psi(&self, zeta: Complex64) -> f64 {
        2.0 * self.log_abs_g(zeta) + 2.0 * self.u(zeta) + self.epsilon * zeta.norm_sqr()
    }

    pub fn order_at(&self, zeta: Complex64) -> usize {
        self.zeros
            .iter()
            .filter(|(z0, _)| (z0 - zeta).norm() <= SAME_POINT)
            .map(|(_, m)| m)
            .sum()
    }

    pub fn harmonic_is_zero(&self) -> bool {
        self.harmonic_poly
            .iter()
            .enumerate()
            .all(|(i, c)| if i == 0 { c.re == 0.0 } else { c.norm() == 0.0 })
    }
}

/// A singular point of the weighted integrand, with the leading exponent
/// data the quadrature needs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingularCenter {
    pub zeta: Complex64,
    /// Half Lelong number of ψ at the point.
    pub half_lelong: f64,
    /// Order of `g` at the point.
    pub divisor_order: usize,
    /// Index of the marked point here, if any.
    pub marked: Option<usize>,
}

impl SingularCenter {
    /// Exponent `ω` with `e^{-φ} c(-ψ) ~ ρ^ω` near the point, for a gain
    /// growing like `e^{κt}`.
    pub fn weight_exponent(&self, kappa: f64) -> f64 {
        2.0 * self.half_lelong * (1.0 - kappa) - 2.0 * self.divisor_order as f64
    }
}

/// The pair `(φ, ψ)` together with the marked points and the domain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightPair {
    pub domain: DomainSpec,
    pub marked: Vec<MarkedPoint>,
    /// Disc coordinates of the marked points.
    pub marked_disc: Vec<Complex64>,
    pub psi: PsiSpec,
    pub phi: PhiSpec,
}

/// Inputs for [`WeightPair::new`]; locations are in Ω.
#[derive(Clone, Debug, Default)]
pub struct WeightData {
    /// Extra Green terms `(location, coefficient)`.
    pub extra_green: Vec<(Complex64, f64)>,
    /// Zeros of `g` `(location, multiplicity)`.
    pub zeros: Vec<(Complex64, usize)>,
    pub lead: Option<Complex64>,
    pub harmonic_poly: Vec<Complex64>,
    pub epsilon: f64,
}

impl WeightPair {
    pub fn new(domain: DomainSpec, marked: Vec<MarkedPoint>, data: WeightData) -> Result<Self> {
        domain.validate()?;
        if marked.is_empty() {
            return Err(Error::InvalidMarkedPoint("at least one marked point is required".into()));
        }
        for p in &marked {
            p.validate(&domain)?;
        }
        check_distinct(&marked)?;
        let marked_disc: Vec<Complex64> =
            marked.iter().map(|p| domain.to_disc(p.location)).collect::<Result<_>>()?;
        let green_terms = marked
            .iter()
            .zip(&marked_disc)
            .map(|(p, &z)| GreenTerm {
                pole: z,
                coeff: 2.0 * p.green_weight,
            })
            .collect();
        let mut extra = Vec::new();
        for &(z, coeff) in &data.extra_green {
            if !(coeff > 0.0 && coeff.is_finite()) {
                return Err(Error::InvalidWeight(format!(
                    "extra Green coefficient must be positive, got {coeff}"
                )));
            }
            extra.push(GreenTerm {
                pole: domain.to_disc(z)?,
                coeff,
            });
        }
        let mut zeros = Vec::new();
        for &(z, m) in &data.zeros {
            if m == 0 {
                return Err(Error::InvalidWeight("zero multiplicity must be at least 1".into()));
            }
            zeros.push((domain.to_disc(z)?, m));
        }
        let lead = check_finite(data.lead.unwrap_or(Complex64::new(1.0, 0.0)))?;
        if lead.norm() == 0.0 {
            return Err(Error::InvalidWeight("leading constant of g vanishes".into()));
        }
        for &c in &data.harmonic_poly {
            check_finite(c)?;
        }
        if !(data.epsilon >= 0.0 && data.epsilon.is_finite()) {
            return Err(Error::InvalidWeight(format!(
                "bump coefficient must be non-negative, got {}",
                data.epsilon
            )));
        }
        Ok(WeightPair {
            domain,
            marked,
            marked_disc,
            psi: PsiSpec { green_terms, extra },
            phi: PhiSpec {
                zeros,
                lead,
                harmonic_poly: data.harmonic_poly,
                epsilon: data.epsilon,
            },
        })
    }

    /// The weight pair whose `φ` vanishes when each `pⱼ = kⱼ + 1`:
    /// `g = Π f_{zⱼ}^{kⱼ+1}`, `u ≡ 0`, `ε = 0`.
    pub fn canonical(domain: DomainSpec, marked: Vec<MarkedPoint>) -> Result<Self> {
        let zeros = marked.iter().map(|p| (p.location, p.jet_order + 1)).collect();
        WeightPair::new(
            domain,
            marked,
            WeightData {
                zeros,
                ..WeightData::default()
            },
        )
    }

    pub fn len(&self) -> usize {
        self.marked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marked.is_empty()
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j >= self.marked.len() {
            return Err(Error::OutOfRange(format!(
                "marked point index {j} out of range ({} points)",
                self.marked.len()
            )));
        }
        Ok(())
    }

    pub fn eval_psi(&self, z: Complex64) -> Result<f64> {
        let zeta = self.domain.to_disc(z)?;
        self.psi.eval_disc(zeta)
    }

    pub fn eval_phi(&self, z: Complex64) -> Result<f64> {
        let zeta = self.domain.to_disc(z)?;
        for &(z0, _) in &self.phi.zeros {
            if (zeta - z0).norm() == 0.0 {
                return Err(Error::Pole(fmt_point(z)));
            }
        }
        let psi = self.psi.eval_disc(zeta)?;
        Ok(self.phi.phi_plus_psi(zeta) - psi)
    }

    /// `pⱼ = ½ ν(dd^c ψ, zⱼ)`, including extra terms stacked on `zⱼ`.
    pub fn lelong_psi(&self, j: usize) -> Result<f64> {
        self.check_index(j)?;
        Ok(self.psi.half_lelong_at(self.marked_disc[j]))
    }

    /// `ord_{zⱼ}(g)`.
    pub fn divisor_order(&self, j: usize) -> Result<usize> {
        self.check_index(j)?;
        Ok(self.phi.order_at(self.marked_disc[j]))
    }

    /// `g / f_{zⱼ}^{ord}` evaluated at `zⱼ` (the leading Blaschke coefficient).
    pub(crate) fn divisor_cofactor(&self, j: usize) -> Complex64 {
        let zj = self.marked_disc[j];
        let mut v = self.phi.lead;
        for &(z0, m) in &self.phi.zeros {
            if (z0 - zj).norm() > SAME_POINT {
                v *= blaschke_unchecked(z0, zj).powu(m as u32);
            }
        }
        v
    }

    /// `αⱼ = lim_{z→zⱼ} (φ + ψ − 2(kⱼ+1) G(·, zⱼ))`.
    pub fn alpha_j(&self, j: usize) -> Result<f64> {
        self.check_index(j)?;
        let expected = self.marked[j].jet_order + 1;
        let order = self.divisor_order(j)?;
        if order != expected {
            return Err(Error::OrderMismatch {
                index: j,
                divisor_order: order,
                expected,
            });
        }
        let zj = self.marked_disc[j];
        Ok(2.0 * self.divisor_cofactor(j).norm().ln()
            + 2.0 * self.phi.u(zj)
            + self.phi.epsilon * zj.norm_sqr())
    }

    /// `log(e^{-φ} c(-ψ))` at a disc point away from singularities.
    #[inline]
    pub fn log_weight(&self, zeta: Complex64, gain: &GainFunction) -> f64 {
        let psi = self.psi.eval_unchecked(zeta);
        psi - self.phi.phi_plus_psi(zeta) + gain.log_c(-psi)
    }

    /// `log(e^{-φ} c(-ψ))` at a quadrature node.
    #[inline]
    pub fn log_weight_point(&self, p: &Point, gain: &GainFunction) -> f64 {
        let psi = self.psi.eval_point(p);
        psi - self.phi.phi_plus_psi_point(p) + gain.log_c(-psi)
    }

    /// Whether `φ ≡ 0` holds structurally.
    pub fn phi_is_trivial(&self) -> bool {
        if self.phi.epsilon != 0.0 || !self.phi.harmonic_is_zero() || !self.psi.extra.is_empty() {
            return false;
        }
        if (self.phi.lead.norm() - 1.0).abs() > 1e-15 {
            return false;
        }
        // Each zero must carry exactly the Green mass of ψ at its location.
        let mut covered = 0usize;
        for (j, p) in self.marked.iter().enumerate() {
            let order = self.phi.order_at(self.marked_disc[j]);
            if (p.green_weight - order as f64).abs() > 0.0 {
                return false;
            }
            covered += order;
        }
        covered == self.phi.zeros.iter().map(|(_, m)| m).sum::<usize>()
    }

    /// Marked-point jet coefficients converted to the disc coordinate:
    /// `bⱼ = aⱼ (dw/dζ)^{kⱼ+1}`.
    pub fn disc_jet_coeffs(&self) -> Result<Vec<Complex64>> {
        self.marked
            .iter()
            .map(|p| {
                let jac = p.coordinate_jacobian(&self.domain)?;
                Ok(p.jet_coeff * jac.powu(p.jet_order as u32 + 1))
            })
            .collect()
    }

    /// All singular points of the weighted integrand: marked points, zeros
    /// of `g` and extra Green poles.
    pub fn singular_centers(&self) -> Vec<SingularCenter> {
        let mut pts: Vec<(Complex64, Option<usize>)> = self
            .marked_disc
            .iter()
            .enumerate()
            .map(|(j, &z)| (z, Some(j)))
            .collect();
        let push = |z: Complex64, pts: &mut Vec<(Complex64, Option<usize>)>| {
            if !pts.iter().any(|(p, _)| (p - z).norm() <= SAME_POINT) {
                pts.push((z, None));
            }
        };
        for &(z, _) in &self.phi.zeros {
            push(z, &mut pts);
        }
        for t in &self.psi.extra {
            push(t.pole, &mut pts);
        }
        pts.into_iter()
            .map(|(zeta, marked)| SingularCenter {
                zeta,
                half_lelong: self.psi.half_lelong_at(zeta),
                divisor_order: self.phi.order_at(zeta),
                marked,
            })
            .collect()
    }

    /// Reject weights for which every admissible form has a divergent
    /// weighted norm near some singular point.
    pub fn check_integrable(&self, gain: &GainFunction) -> Result<()> {
        let kappa = gain.growth_rate();
        for c in self.singular_centers() {
            let order = c.marked.map(|j| self.marked[j].jet_order).unwrap_or(0);
            let mu = 2.0 * order as f64 + c.weight_exponent(kappa) + 2.0;
            if !(mu > 0.0) {
                return Err(Error::NonIntegrable(format!(
                    "{} (local exponent {mu})",
                    fmt_point(self.domain.from_disc(c.zeta))
                )));
            }
        }
        Ok(())
    }
}

/// `G_Δ(ζ, pole)` at a node, using the node's exact offset from `pole`.
#[inline]
pub(crate) fn green_at_point(p: &Point, pole: Complex64) -> f64 {
    let num = p.offset(pole).norm_sqr();
    let den = (Complex64::new(1.0, 0.0) - pole.conj() * p.z).norm_sqr();
    0.5 * (num.ln() - den.ln())
}
