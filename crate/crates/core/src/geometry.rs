//! Simply connected planar domains, their Green functions and capacities.
//!
//! Every domain is the image of the unit disc under a Möbius map
//! `T(ζ) = (aζ + b)/(cζ + d)`. All potential-theoretic quantities are
//! computed in the disc coordinate `ζ = T⁻¹(z)`, where the Green function
//! has the closed form `log|ζ − ζ₀| − log|1 − ζ̄₀ζ|`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{fmt_point, Error, Result};
use crate::weights::PsiSpec;

/// A point of the plane. Finite components are checked at API boundaries.
pub type ComplexPoint = Complex64;

pub(crate) fn check_finite(z: Complex64) -> Result<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::NonFinite(fmt_point(z)))
    }
}

/// The domain Ω, given by the Möbius map from the unit disc onto it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[derive(Default)]
pub enum DomainSpec {
    #[default]
    UnitDisc,
    Moebius {
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
    },
}


impl DomainSpec {
    pub fn moebius(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let dom = DomainSpec::Moebius { a, b, c, d };
        dom.validate()?;
        Ok(dom)
    }

    /// The coefficients `(a, b, c, d)`; the identity for the unit disc.
    pub fn coeffs(&self) -> (Complex64, Complex64, Complex64, Complex64) {
        match *self {
            DomainSpec::UnitDisc => (
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ),
            DomainSpec::Moebius { a, b, c, d } => (a, b, c, d),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b, c, d) = self.coeffs();
        for z in [a, b, c, d] {
            check_finite(z)?;
        }
        let det = a * d - b * c;
        if det.norm() <= 1e-14 * (a.norm() * d.norm() + b.norm() * c.norm()).max(1e-300) {
            return Err(Error::InvalidDomain("ad - bc vanishes".into()));
        }
        if c.norm() > 0.0 {
            let pole = -d / c;
            if pole.norm() <= 1.0 + 1e-12 {
                return Err(Error::InvalidDomain(format!(
                    "pole {} of the map lies in the closed unit disc",
                    fmt_point(pole)
                )));
            }
        }
        Ok(())
    }

    /// `T(ζ)`.
    pub fn from_disc(&self, zeta: Complex64) -> Complex64 {
        match self {
            DomainSpec::UnitDisc => zeta,
            DomainSpec::Moebius { a, b, c, d } => (a * zeta + b) / (c * zeta + d),
        }
    }

    /// `T⁻¹(z)` without the membership check.
    pub fn to_disc_unchecked(&self, z: Complex64) -> Complex64 {
        match self {
            DomainSpec::UnitDisc => z,
            DomainSpec::Moebius { a, b, c, d } => (d * z - b) / (a - c * z),
        }
    }

    /// `T⁻¹(z)`, failing when `z` is not strictly inside Ω.
    pub fn to_disc(&self, z: Complex64) -> Result<Complex64> {
        check_finite(z)?;
        let zeta = self.to_disc_unchecked(z);
        if !(zeta.norm() < 1.0) {
            return Err(Error::OutsideDomain(fmt_point(z)));
        }
        Ok(zeta)
    }

    /// `T'(ζ)`.
    pub fn map_derivative(&self, zeta: Complex64) -> Complex64 {
        let (a, b, c, d) = self.coeffs();
        let den = c * zeta + d;
        (a * d - b * c) / (den * den)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.to_disc(z).is_ok()
    }

    /// Center and radius of the image disc `T(Δ)`.
    pub fn image_disc(&self) -> (Complex64, f64) {
        match self {
            DomainSpec::UnitDisc => (Complex64::new(0.0, 0.0), 1.0),
            DomainSpec::Moebius { .. } => {
                let p1 = self.from_disc(Complex64::new(1.0, 0.0));
                let p2 = self.from_disc(Complex64::new(0.0, 1.0));
                let p3 = self.from_disc(Complex64::new(-1.0, 0.0));
                circumcircle(p1, p2, p3)
            }
        }
    }
}

fn circumcircle(p1: Complex64, p2: Complex64, p3: Complex64) -> (Complex64, f64) {
    let (ax, ay, bx, by, cx, cy) = (p1.re, p1.im, p2.re, p2.im, p3.re, p3.im);
    let d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
    let a2 = ax * ax + ay * ay;
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d;
    let uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d;
    let center = Complex64::new(ux, uy);
    (center, (p1 - center).norm())
}

/// A marked point `zⱼ` with its Green weight `pⱼ`, jet order `kⱼ`, jet
/// coefficient `aⱼ` and the affine local coordinate `w = λ (z − zⱼ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkedPoint {
    pub location: Complex64,
    pub green_weight: f64,
    pub jet_order: usize,
    pub jet_coeff: Complex64,
    #[serde(default = "unit_scale")]
    pub coord_scale: Complex64,
}

fn unit_scale() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

impl MarkedPoint {
    pub fn new(location: Complex64, green_weight: f64, jet_order: usize, jet_coeff: Complex64) -> Self {
        MarkedPoint {
            location,
            green_weight,
            jet_order,
            jet_coeff,
            coord_scale: unit_scale(),
        }
    }

    pub fn with_coord_scale(mut self, scale: Complex64) -> Self {
        self.coord_scale = scale;
        self
    }

    pub fn validate(&self, dom: &DomainSpec) -> Result<()> {
        check_finite(self.location)?;
        check_finite(self.jet_coeff)?;
        check_finite(self.coord_scale)?;
        dom.to_disc(self.location)?;
        if !(self.green_weight > 0.0) || !self.green_weight.is_finite() {
            return Err(Error::InvalidMarkedPoint(format!(
                "Green weight must be positive, got {}",
                self.green_weight
            )));
        }
        if self.coord_scale.norm() == 0.0 {
            return Err(Error::InvalidMarkedPoint(
                "local coordinate has zero derivative".into(),
            ));
        }
        Ok(())
    }

    /// Disc coordinate of the point.
    pub fn disc_location(&self, dom: &DomainSpec) -> Result<Complex64> {
        dom.to_disc(self.location)
    }

    /// `dw/dζ` at the point, with `w = λ (T(ζ) − zⱼ)`.
    pub fn coordinate_jacobian(&self, dom: &DomainSpec) -> Result<Complex64> {
        let zeta = dom.to_disc(self.location)?;
        Ok(self.coord_scale * dom.map_derivative(zeta))
    }
}

/// Reject coincident marked points.
pub fn check_distinct(points: &[MarkedPoint]) -> Result<()> {
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            if (p.location - q.location).norm() <= 1e-12 {
                return Err(Error::InvalidMarkedPoint(format!(
                    "marked points coincide at {}",
                    fmt_point(p.location)
                )));
            }
        }
    }
    Ok(())
}

#[inline]
pub(crate) fn green_disc_unchecked(z: Complex64, z0: Complex64) -> f64 {
    let num = (z - z0).norm_sqr();
    let den = (Complex64::new(1.0, 0.0) - z0.conj() * z).norm_sqr();
    0.5 * (num.ln() - den.ln())
}

/// Green function of the unit disc with pole at `z0`.
pub fn green_disc(z: Complex64, z0: Complex64) -> Result<f64> {
    check_finite(z)?;
    check_finite(z0)?;
    if !(z.norm() < 1.0) {
        return Err(Error::OutsideDomain(fmt_point(z)));
    }
    if !(z0.norm() < 1.0) {
        return Err(Error::OutsideDomain(fmt_point(z0)));
    }
    if z == z0 {
        return Err(Error::Pole(fmt_point(z0)));
    }
    Ok(green_disc_unchecked(z, z0))
}

/// Green function of Ω, transported from the disc through `T⁻¹`.
pub fn green_domain(dom: &DomainSpec, z: Complex64, z0: Complex64) -> Result<f64> {
    let zeta = dom.to_disc(z)?;
    let zeta0 = dom.to_disc(z0)?;
    if z == z0 || zeta == zeta0 {
        return Err(Error::Pole(fmt_point(z0)));
    }
    Ok(green_disc_unchecked(zeta, zeta0))
}

#[inline]
pub(crate) fn blaschke_unchecked(z0: Complex64, z: Complex64) -> Complex64 {
    (z - z0) / (Complex64::new(1.0, 0.0) - z0.conj() * z)
}

/// `d/dz` of the Blaschke factor: `(1 − |z0|²)/(1 − z̄0 z)²`.
#[inline]
pub(crate) fn blaschke_derivative(z0: Complex64, z: Complex64) -> Complex64 {
    let den = Complex64::new(1.0, 0.0) - z0.conj() * z;
    Complex64::new(1.0 - z0.norm_sqr(), 0.0) / (den * den)
}

/// Blaschke factor `(z − z0)/(1 − z̄0 z)`, whose modulus is `exp G_Δ(z, z0)`.
pub fn blaschke_factor(z0: Complex64, z: Complex64) -> Result<Complex64> {
    check_finite(z)?;
    check_finite(z0)?;
    if !(z0.norm() < 1.0) {
        return Err(Error::OutsideDomain(fmt_point(z0)));
    }
    if z.norm() > 1.0 + 1e-15 {
        return Err(Error::OutsideDomain(fmt_point(z)));
    }
    Ok(blaschke_unchecked(z0, z))
}

/// Logarithmic capacity `c_β(zⱼ) = exp lim (G(z, zⱼ) − log|w(z)|)` for the
/// affine coordinate `w = λ (z − zⱼ)`, in closed form:
/// `1 / ((1 − |ζⱼ|²) |λ T'(ζⱼ)|)`.
pub fn log_capacity(dom: &DomainSpec, pt: &MarkedPoint) -> Result<f64> {
    if pt.coord_scale.norm() == 0.0 || !pt.coord_scale.norm().is_finite() {
        return Err(Error::InvalidMarkedPoint(
            "local coordinate has zero derivative".into(),
        ));
    }
    let zeta = pt.disc_location(dom)?;
    let jac = pt.coordinate_jacobian(dom)?.norm();
    Ok(1.0 / ((1.0 - zeta.norm_sqr()) * jac))
}

/// Whether `z` lies in the sublevel set `{ψ < −t}`.
pub fn sublevel_member(psi: &PsiSpec, t: f64, z: Complex64) -> bool {
    match psi.eval_disc(z) {
        Ok(v) => v < -t,
        // Poles of ψ belong to every sublevel set.
        Err(Error::Pole(_)) => true,
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn green_at_origin_is_log_modulus() {
        let g = green_disc(c(0.5, 0.0), c(0.0, 0.0)).unwrap();
        assert!((g + LN_2).abs() < 1e-15);
        let g = green_disc(c(0.0, 0.0), c(0.5, 0.0)).unwrap();
        assert!((g + LN_2).abs() < 1e-15);
    }

    #[test]
    fn green_pole_is_error() {
        assert!(matches!(
            green_disc(c(0.2, 0.1), c(0.2, 0.1)),
            Err(Error::Pole(_))
        ));
        assert!(matches!(
            green_disc(c(1.2, 0.0), c(0.0, 0.0)),
            Err(Error::OutsideDomain(_))
        ));
    }

    #[test]
    fn scaled_disc_green() {
        let dom = DomainSpec::moebius(c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let g = green_domain(&dom, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        assert!((g - 0.5f64.ln()).abs() < 1e-15);
        assert!(green_domain(&dom, c(2.5, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn unit_disc_domain_matches_disc_formula() {
        let dom = DomainSpec::UnitDisc;
        let z = c(0.3, 0.4);
        let z0 = c(0.5, 0.0);
        assert_eq!(
            green_domain(&dom, z, z0).unwrap(),
            green_disc(z, z0).unwrap()
        );
    }

    #[test]
    fn blaschke_examples() {
        let b = blaschke_factor(c(0.0, 0.0), c(0.3, -0.2)).unwrap();
        assert_eq!(b, c(0.3, -0.2));
        let b = blaschke_factor(c(0.5, 0.0), c(0.0, 0.0)).unwrap();
        assert!((b - c(-0.5, 0.0)).norm() < 1e-16);
    }

    #[test]
    fn capacity_examples() {
        let dom = DomainSpec::UnitDisc;
        let p0 = MarkedPoint::new(c(0.0, 0.0), 1.0, 0, c(1.0, 0.0));
        assert!((log_capacity(&dom, &p0).unwrap() - 1.0).abs() < 1e-15);
        let p1 = MarkedPoint::new(c(0.5, 0.0), 1.0, 0, c(1.0, 0.0));
        assert!((log_capacity(&dom, &p1).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        let z0 = c(0.3, -0.6);
        let p2 = MarkedPoint::new(z0, 1.0, 0, c(1.0, 0.0));
        let expected = 1.0 / (1.0 - z0.norm_sqr());
        assert!((log_capacity(&dom, &p2).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn capacity_matches_shrinking_limit() {
        let z0 = c(-0.45, 0.25);
        let p = MarkedPoint::new(z0, 1.0, 0, c(1.0, 0.0));
        let exact = log_capacity(&DomainSpec::UnitDisc, &p).unwrap();
        let mut prev_err = f64::INFINITY;
        for k in 2..7 {
            let h = 10f64.powi(-k);
            let z = z0 + c(h, 0.0);
            let approx = (green_disc(z, z0).unwrap() - h.ln()).exp();
            let err = (approx - exact).abs();
            assert!(err < prev_err);
            prev_err = err;
        }
        assert!(prev_err < 1e-5);
    }

    #[test]
    fn capacity_scales_inversely_with_coordinate() {
        let dom = DomainSpec::UnitDisc;
        let p = MarkedPoint::new(c(0.2, 0.1), 1.0, 0, c(1.0, 0.0));
        let base = log_capacity(&dom, &p).unwrap();
        let lambda = c(0.0, 3.0);
        let scaled = log_capacity(&dom, &p.clone().with_coord_scale(lambda)).unwrap();
        assert!((scaled - base / 3.0).abs() < 1e-15);
        let zero = p.with_coord_scale(c(0.0, 0.0));
        assert!(log_capacity(&dom, &zero).is_err());
    }

    #[test]
    fn invalid_moebius_rejected() {
        assert!(DomainSpec::moebius(c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.0)).is_err());
        assert!(DomainSpec::moebius(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn image_disc_of_scaling() {
        let dom = DomainSpec::moebius(c(2.0, 0.0), c(1.0, 1.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let (center, radius) = dom.image_disc();
        assert!((center - c(1.0, 1.0)).norm() < 1e-12);
        assert!((radius - 2.0).abs() < 1e-12);
    }
}
