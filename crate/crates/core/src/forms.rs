//! Truncated holomorphic (1,0)-forms, weighted Gram matrices and jet
//! interpolation constraints.
//!
//! A form `F = f(ζ) dζ` is stored in the disc coordinate. The weighted
//! inner product is `⟨F, G⟩ = 2 ∫ conj(f) g e^{-φ} c(-ψ) dA`, so that
//! `‖ζˡ dζ‖² = 2π/(l+1)` on the unweighted disc.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gain::GainFunction;
use crate::polar::{build_nodes, Center, Nodes, Point, QuadratureConfig, Region};
use crate::weights::WeightPair;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `F = (Σ aₗ ζˡ) dζ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedForm {
    pub coeffs: Vec<Complex64>,
}

impl TruncatedForm {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Dimension("a form needs at least one coefficient".into()));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite("form coefficient".into()));
        }
        Ok(TruncatedForm { coeffs })
    }

    pub fn zero(degree: usize) -> Self {
        TruncatedForm {
            coeffs: vec![ZERO; degree + 1],
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `f(ζ)` by Horner's rule.
    pub fn eval(&self, zeta: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * zeta + c)
    }

    /// The order-`nu` Taylor coefficient of `f` at `zeta`.
    pub fn taylor_coeff(&self, zeta: Complex64, nu: usize) -> Complex64 {
        let mut v = ZERO;
        for (l, row) in taylor_row(zeta, nu, self.degree()).iter().enumerate() {
            v += row * self.coeffs[l];
        }
        v
    }
}

/// Binomial coefficient as a float.
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut v = 1.0;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// Row `l ↦ C(l, ν) ζ^{l−ν}` of the order-`ν` Taylor functional at `ζ`.
fn taylor_row(zeta: Complex64, nu: usize, degree: usize) -> Vec<Complex64> {
    let mut row = vec![ZERO; degree + 1];
    let mut pow = ONE;
    for l in nu..=degree {
        row[l] = pow * binomial(l, nu);
        pow *= zeta;
    }
    row
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    Monomial,
    Reduced,
}

/// Hermitian Gram matrix `H[l][m] = ⟨eₗ, eₘ⟩` of a basis under the
/// weighted inner product over a region.
#[derive(Clone, Debug)]
pub struct GramMatrix {
    pub entries: DMatrix<Complex64>,
    pub basis: BasisKind,
    pub t: f64,
    pub description: String,
    /// Largest entrywise difference between the two finest mesh levels
    /// (zero for closed forms).
    pub error_estimate: f64,
    /// Set when the region contains no quadrature node.
    pub empty_region: bool,
}

impl GramMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

/// Jet constraints `C a = b` in the monomial basis.
#[derive(Clone, Debug)]
pub struct JetConstraintSystem {
    pub rows: DMatrix<Complex64>,
    pub rhs: DVector<Complex64>,
    /// `(marked point, order)` of every row.
    pub labels: Vec<(usize, usize)>,
}

/// Unweighted disc Gram in the monomial basis: `diag(2π/(l+1))`.
pub fn gram_analytic_disc(degree: usize) -> GramMatrix {
    let entries = DMatrix::from_fn(degree + 1, degree + 1, |l, m| {
        if l == m {
            Complex64::new(2.0 * PI / (l as f64 + 1.0), 0.0)
        } else {
            ZERO
        }
    });
    GramMatrix {
        entries,
        basis: BasisKind::Monomial,
        t: 0.0,
        description: "unweighted unit disc".into(),
        error_estimate: 0.0,
        empty_region: false,
    }
}

/// The single marked point sits at the disc origin and all of the weight
/// data is concentrated there, so the weight is radial.
pub(crate) fn is_centered_radial(w: &WeightPair, gain: &GainFunction) -> bool {
    let origin = |z: Complex64| z.norm() == 0.0;
    w.len() == 1
        && origin(w.marked_disc[0])
        && w.psi.extra.iter().all(|t| origin(t.pole))
        && w.phi.zeros.iter().all(|(z, _)| origin(*z))
        && w.phi.epsilon == 0.0
        && w.phi.harmonic_is_zero()
        && !matches!(gain, GainFunction::Tabulated { .. })
}

/// Whether `e^{-φ} c(-ψ)` is the constant `c` on `{ψ < −t}` with `t = 0`.
pub(crate) fn is_trivial_disc(w: &WeightPair, gain: &GainFunction, t: f64) -> bool {
    t == 0.0 && w.phi_is_trivial() && matches!(gain, GainFunction::Constant { .. })
}

/// Closed-form monomial Gram, available for the unweighted disc (up to a
/// constant gain) and for radial weights centered at the origin.
pub fn gram_analytic(w: &WeightPair, gain: &GainFunction, t: f64, degree: usize) -> Result<GramMatrix> {
    if is_trivial_disc(w, gain, t) {
        let GainFunction::Constant { value } = *gain else {
            unreachable!()
        };
        let mut g = gram_analytic_disc(degree);
        g.entries *= Complex64::new(value, 0.0);
        g.description = format!("unweighted unit disc, c = {value}");
        return Ok(g);
    }
    if is_centered_radial(w, gain) {
        return gram_radial(w, gain, t, degree);
    }
    Err(Error::NontrivialWeight(
        "no closed form for this weight; use the quadrature Gram".into(),
    ))
}

fn gram_radial(w: &WeightPair, gain: &GainFunction, t: f64, degree: usize) -> Result<GramMatrix> {
    // ψ = 2q log ρ, e^{-φ} = ρ^{2q − 2m}/|lead|², c(−ψ) = C ρ^{−2qκ}.
    let q = w.psi.half_lelong_at(w.marked_disc[0]);
    let m = w.phi.order_at(w.marked_disc[0]) as f64;
    let (cst, kappa) = match *gain {
        GainFunction::Constant { value } => (value, 0.0),
        GainFunction::Exponential { rate } => (1.0, rate),
        GainFunction::Tabulated { .. } => unreachable!(),
    };
    let rho_t = (-t / (2.0 * q)).exp();
    let lead2 = w.phi.lead.norm_sqr();
    let mut entries = DMatrix::from_element(degree + 1, degree + 1, ZERO);
    for l in 0..=degree {
        let e = 2.0 * l as f64 + 2.0 + 2.0 * q - 2.0 * m - 2.0 * q * kappa;
        if !(e > 0.0) {
            return Err(Error::NonIntegrable(format!(
                "monomial of degree {l} at the origin (exponent {e})"
            )));
        }
        entries[(l, l)] = Complex64::new(4.0 * PI * cst / lead2 * rho_t.powf(e) / e, 0.0);
    }
    Ok(GramMatrix {
        entries,
        basis: BasisKind::Monomial,
        t,
        description: format!("radial weight at the origin, t = {t}"),
        error_estimate: 0.0,
        empty_region: false,
    })
}

/// Jet constraints: the order-`ν` Taylor coefficient of `f` at `ζⱼ` is `0`
/// for `ν < kⱼ` and `bⱼ = aⱼ (dwⱼ/dζ)^{kⱼ+1}` for `ν = kⱼ`.
pub fn jet_constraints(w: &WeightPair, degree: usize) -> Result<JetConstraintSystem> {
    let total: usize = w.marked.iter().map(|p| p.jet_order + 1).sum();
    if degree + 1 < total {
        return Err(Error::Dimension(format!(
            "degree {degree} cannot carry {total} jet conditions"
        )));
    }
    let b = w.disc_jet_coeffs()?;
    let mut rows = DMatrix::from_element(total, degree + 1, ZERO);
    let mut rhs = DVector::from_element(total, ZERO);
    let mut labels = Vec::with_capacity(total);
    let mut r = 0;
    for (j, p) in w.marked.iter().enumerate() {
        for nu in 0..=p.jet_order {
            for (l, v) in taylor_row(w.marked_disc[j], nu, degree).into_iter().enumerate() {
                rows[(r, l)] = v;
            }
            if nu == p.jet_order {
                rhs[r] = b[j];
            }
            labels.push((j, nu));
            r += 1;
        }
    }
    let svd = rows.clone().svd(false, false);
    let s = &svd.singular_values;
    let (smax, smin) = (s.max(), s.min());
    if !(smin > 1e-13 * smax) {
        return Err(Error::RankDeficient(format!(
            "singular values range over [{smin:e}, {smax:e}]"
        )));
    }
    Ok(JetConstraintSystem { rows, rhs, labels })
}

/// `a* H a`.
pub fn norm_of_form(form: &TruncatedForm, gram: &GramMatrix) -> Result<f64> {
    quadratic_form(&form.coeffs, &gram.entries)
}

pub(crate) fn quadratic_form(a: &[Complex64], h: &DMatrix<Complex64>) -> Result<f64> {
    if h.nrows() != a.len() || h.ncols() != a.len() {
        return Err(Error::Dimension(format!(
            "form has {} coefficients, Gram is {}x{}",
            a.len(),
            h.nrows(),
            h.ncols()
        )));
    }
    let x = DVector::from_column_slice(a);
    Ok((x.adjoint() * h * &x)[(0, 0)].re.max(0.0))
}

/// Accumulate `H = Σₖ 2 wₖ W(ζₖ) conj(e(ζₖ)) e(ζₖ)ᵀ`. `fill` writes the
/// basis values at a node and returns `log W` there.
pub(crate) fn assemble(
    nodes: &Nodes,
    ncols: usize,
    mut fill: impl FnMut(&Point, &mut [Complex64]) -> f64,
) -> DMatrix<Complex64> {
    const CHUNK: usize = 2048;
    let mut hre = DMatrix::<f64>::zeros(ncols, ncols);
    let mut him = DMatrix::<f64>::zeros(ncols, ncols);
    let mut buf = vec![ZERO; ncols];
    let mut start = 0;
    while start < nodes.len() {
        let end = (start + CHUNK).min(nodes.len());
        let rows = end - start;
        let mut a = DMatrix::<f64>::zeros(rows, ncols);
        let mut b = DMatrix::<f64>::zeros(rows, ncols);
        for k in 0..rows {
            let p = &nodes.points[start + k];
            let lw = fill(p, &mut buf);
            let s = (0.5 * (lw + (2.0 * nodes.weights[start + k]).ln())).exp();
            if !s.is_finite() {
                continue;
            }
            for (c, v) in buf.iter().enumerate() {
                a[(k, c)] = s * v.re;
                b[(k, c)] = s * v.im;
            }
        }
        hre += a.tr_mul(&a) + b.tr_mul(&b);
        him += a.tr_mul(&b) - b.tr_mul(&a);
        start = end;
    }
    let h = DMatrix::from_fn(ncols, ncols, |i, j| Complex64::new(hre[(i, j)], him[(i, j)]));
    (&h + h.adjoint()) * Complex64::new(0.5, 0.0)
}

fn region_for(t: f64) -> Region {
    if t == 0.0 {
        Region::Whole
    } else {
        Region::Sublevel { t }
    }
}

/// Quadrature centers for a weight, given the minimal vanishing order of
/// the integrated forms at each marked point.
pub(crate) fn weight_centers(w: &WeightPair, gain: &GainFunction, marked_orders: &[usize]) -> Vec<Center> {
    let kappa = gain.growth_rate();
    w.singular_centers()
        .into_iter()
        .map(|c| {
            let order = c.marked.map_or(0, |j| marked_orders[j]);
            Center {
                zeta: c.zeta,
                mu: 2.0 * order as f64 + c.weight_exponent(kappa) + 2.0,
            }
        })
        .collect()
}

/// Nodes for `{ψ < −t}` adapted to the weight's singular centers.
pub(crate) fn weight_nodes(
    w: &WeightPair,
    gain: &GainFunction,
    region: Region,
    marked_orders: &[usize],
    mesh: &QuadratureConfig,
    level: usize,
) -> Result<Nodes> {
    let centers = weight_centers(w, gain, marked_orders);
    let psi = |p: &Point| w.psi.eval_point(p);
    build_nodes(&centers, Some(&psi), region, mesh, level)
}

/// Monomial Gram over `{ψ < −t}` by polar quadrature.
pub fn gram_quadrature(
    w: &WeightPair,
    gain: &GainFunction,
    t: f64,
    degree: usize,
    mesh: &QuadratureConfig,
) -> Result<GramMatrix> {
    if !(t >= 0.0) {
        return Err(Error::OutOfRange(format!("t must be non-negative, got {t}")));
    }
    let zeros = vec![0; w.len()];
    for c in weight_centers(w, gain, &zeros) {
        if !(c.mu > 0.0) {
            return Err(Error::NonIntegrable(format!(
                "monomials near ({}, {}); use the reduced basis",
                c.zeta.re, c.zeta.im
            )));
        }
    }
    let levels = mesh.levels.min(2);
    let mut grams = Vec::with_capacity(levels);
    let mut empty = false;
    for level in 0..levels {
        let nodes = weight_nodes(w, gain, region_for(t), &zeros, mesh, level)?;
        empty |= nodes.is_empty();
        grams.push(assemble(&nodes, degree + 1, |p, buf| {
            let mut pow = ONE;
            for v in buf.iter_mut() {
                *v = pow;
                pow *= p.z;
            }
            w.log_weight_point(p, gain)
        }));
    }
    let error_estimate = if grams.len() > 1 {
        (&grams[0] - &grams[1]).iter().map(|z| z.norm()).fold(0.0, f64::max)
    } else {
        0.0
    };
    Ok(GramMatrix {
        entries: grams.swap_remove(0),
        basis: BasisKind::Monomial,
        t,
        description: format!("quadrature over {{psi < -{t}}}"),
        error_estimate,
        empty_region: empty,
    })
}

/// Basis of polynomials of degree ≤ N adapted to the jet conditions:
/// one particular column per marked point,
/// `e⁽ʲ⁾ = (ζ − ζⱼ)^{kⱼ} Pⱼ(ζ)/Pⱼ(ζⱼ)` with `Pⱼ = Π_{l≠j} (ζ − ζₗ)^{kₗ+1}`,
/// followed by the null columns `P(ζ) ξⁱ`, `P = Π (ζ − ζₗ)^{kₗ+1}`,
/// `ξ = (ζ − center)/scale`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedBasis {
    pub points: Vec<Complex64>,
    pub orders: Vec<usize>,
    pub center: Complex64,
    pub scale: f64,
    pub null_count: usize,
    inv_norm: Vec<Complex64>,
}

impl ReducedBasis {
    pub fn new(w: &WeightPair, degree: usize, center: Complex64, scale: f64) -> Result<Self> {
        let points = w.marked_disc.clone();
        let orders: Vec<usize> = w.marked.iter().map(|p| p.jet_order).collect();
        let total: usize = orders.iter().map(|k| k + 1).sum();
        if degree + 1 < total {
            return Err(Error::Dimension(format!(
                "degree {degree} cannot carry {total} jet conditions"
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::OutOfRange(format!("basis scale must be positive, got {scale}")));
        }
        let inv_norm = (0..points.len())
            .map(|j| {
                let mut v = ONE;
                for (l, &zl) in points.iter().enumerate() {
                    if l != j {
                        v *= (points[j] - zl).powu(orders[l] as u32 + 1);
                    }
                }
                ONE / v
            })
            .collect();
        Ok(ReducedBasis {
            points,
            orders,
            center,
            scale,
            null_count: degree + 1 - total,
            inv_norm,
        })
    }

    pub fn particular_count(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> usize {
        self.points.len() + self.null_count
    }

    /// Minimal vanishing order of the basis at each marked point.
    pub fn marked_orders(&self) -> Vec<usize> {
        self.orders.clone()
    }

    pub fn eval(&self, p: &Point, out: &mut [Complex64]) {
        let m = self.points.len();
        let mut full = ONE;
        let mut d = [ZERO; 16];
        let mut dv: Vec<Complex64>;
        let ds: &mut [Complex64] = if m <= 16 {
            &mut d[..m]
        } else {
            dv = vec![ZERO; m];
            &mut dv
        };
        for (l, &zl) in self.points.iter().enumerate() {
            ds[l] = p.offset(zl);
            full *= ds[l].powu(self.orders[l] as u32 + 1);
        }
        for j in 0..m {
            let mut v = ds[j].powu(self.orders[j] as u32) * self.inv_norm[j];
            for l in 0..m {
                if l != j {
                    v *= ds[l].powu(self.orders[l] as u32 + 1);
                }
            }
            out[j] = v;
        }
        let xi = (p.z - self.center) / self.scale;
        let mut v = full;
        for slot in out[m..m + self.null_count].iter_mut() {
            *slot = v;
            v *= xi;
        }
    }

    /// Monomial coefficients of `Σ cᵢ eᵢ`.
    pub fn to_monomial(&self, coords: &[Complex64]) -> TruncatedForm {
        let m = self.points.len();
        let jets: usize = self.orders.iter().map(|k| k + 1).sum();
        let mut total = vec![ZERO; jets + self.null_count];
        let linear = |root: Complex64| vec![-root, ONE];
        for j in 0..m {
            let mut poly = vec![self.inv_norm[j]];
            for _ in 0..self.orders[j] {
                poly = poly_mul(&poly, &linear(self.points[j]));
            }
            for l in 0..m {
                if l != j {
                    for _ in 0..=self.orders[l] {
                        poly = poly_mul(&poly, &linear(self.points[l]));
                    }
                }
            }
            add_scaled(&mut total, &poly, coords[j]);
        }
        let mut full = vec![ONE];
        for l in 0..m {
            for _ in 0..=self.orders[l] {
                full = poly_mul(&full, &linear(self.points[l]));
            }
        }
        let xi = vec![-self.center / self.scale, Complex64::new(1.0 / self.scale, 0.0)];
        let mut col = full;
        for i in 0..self.null_count {
            add_scaled(&mut total, &col, coords[m + i]);
            col = poly_mul(&col, &xi);
        }
        TruncatedForm { coeffs: total }
    }
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn add_scaled(acc: &mut [Complex64], poly: &[Complex64], c: Complex64) {
    for (a, p) in acc.iter_mut().zip(poly) {
        *a += p * c;
    }
}

/// Reduced-basis Gram over `region`, at one mesh level.
pub(crate) fn gram_reduced_level(
    w: &WeightPair,
    gain: &GainFunction,
    basis: &ReducedBasis,
    nodes: &Nodes,
) -> DMatrix<Complex64> {
    assemble(nodes, basis.dim(), |p, buf| {
        basis.eval(p, buf);
        w.log_weight_point(p, gain)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DomainSpec, MarkedPoint};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn appendix(a: Complex64) -> WeightPair {
        WeightPair::canonical(
            DomainSpec::UnitDisc,
            vec![
                MarkedPoint::new(c(0.0, 0.0), 2.0, 1, c(1.0, 0.0)),
                MarkedPoint::new(c(0.5, 0.0), 1.0, 0, a),
            ],
        )
        .unwrap()
    }

    fn single() -> WeightPair {
        WeightPair::canonical(
            DomainSpec::UnitDisc,
            vec![MarkedPoint::new(c(0.0, 0.0), 1.0, 0, c(1.0, 0.0))],
        )
        .unwrap()
    }

    #[test]
    fn analytic_disc_gram_values() {
        let g = gram_analytic_disc(0);
        assert!((g.entries[(0, 0)].re - 2.0 * PI).abs() < 1e-15);
        let g = gram_analytic_disc(2);
        assert!((g.entries[(1, 1)].re - PI).abs() < 1e-15);
        assert!((g.entries[(2, 2)].re - 2.0 * PI / 3.0).abs() < 1e-15);
        assert_eq!(g.entries[(0, 1)], ZERO);
    }

    #[test]
    fn norms_of_simple_forms() {
        let g = gram_analytic_disc(3);
        let one = TruncatedForm::new(vec![ONE, ZERO, ZERO, ZERO]).unwrap();
        assert!((norm_of_form(&one, &g).unwrap() - 2.0 * PI).abs() < 1e-14);
        let z = TruncatedForm::new(vec![ZERO, ONE, ZERO, ZERO]).unwrap();
        assert!((norm_of_form(&z, &g).unwrap() - PI).abs() < 1e-14);
        let both = TruncatedForm::new(vec![ONE, ONE, ZERO, ZERO]).unwrap();
        assert!((norm_of_form(&both, &g).unwrap() - 3.0 * PI).abs() < 1e-14);
        let short = TruncatedForm::new(vec![ONE]).unwrap();
        assert!(matches!(norm_of_form(&short, &g), Err(Error::Dimension(_))));
    }

    #[test]
    fn analytic_gram_refuses_nontrivial_weight() {
        let w = appendix(c(1.0, 0.0));
        let gain = GainFunction::exponential(0.5).unwrap();
        assert!(matches!(
            gram_analytic(&w, &gain, 0.0, 4),
            Err(Error::NontrivialWeight(_))
        ));
        let one = GainFunction::constant(1.0).unwrap();
        assert!(gram_analytic(&w, &one, 0.0, 4).is_ok());
        assert!(gram_analytic(&w, &one, 1.0, 4).is_err());
    }

    #[test]
    fn quadrature_matches_disc_closed_form() {
        let w = appendix(c(1.0, 0.0));
        let gain = GainFunction::constant(1.0).unwrap();
        let q = gram_quadrature(&w, &gain, 0.0, 2, &QuadratureConfig::default()).unwrap();
        let a = gram_analytic_disc(2);
        let scale = a.entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let err = (&q.entries - &a.entries).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-8 * scale, "{err}");
    }

    #[test]
    fn quadrature_on_sublevel_disc() {
        let w = single();
        let gain = GainFunction::constant(1.0).unwrap();
        let q = gram_quadrature(&w, &gain, 2.0, 3, &QuadratureConfig::default()).unwrap();
        let expected = 2.0 * PI * (-2f64).exp();
        assert!((q.entries[(0, 0)].re - expected).abs() < 1e-10 * expected);
        let radial = gram_analytic(&w, &gain, 2.0, 3).unwrap();
        for l in 0..4 {
            let r = radial.entries[(l, l)].re;
            assert!((q.entries[(l, l)].re - r).abs() < 1e-10 * r);
        }
    }

    #[test]
    fn appendix_constraint_rows() {
        let a = c(0.3, -0.2);
        let w = appendix(a);
        let sys = jet_constraints(&w, 6).unwrap();
        assert_eq!(sys.rows.nrows(), 3);
        assert_eq!(sys.rows[(0, 0)], ONE);
        assert!(sys.rows.row(0).iter().skip(1).all(|z| *z == ZERO));
        assert_eq!(sys.rows[(1, 1)], ONE);
        assert_eq!(sys.rhs[0], ZERO);
        assert_eq!(sys.rhs[1], ONE);
        for l in 0..=6 {
            assert!((sys.rows[(2, l)].re - 0.5f64.powi(l as i32)).abs() < 1e-16);
        }
        assert_eq!(sys.rhs[2], a);
    }

    #[test]
    fn derivative_rows_match_symbolic_derivative() {
        // f(ζ) = Σ aₗ ζˡ; the order-1 coefficient at ½ is f'(½).
        let w = WeightPair::canonical(
            DomainSpec::UnitDisc,
            vec![MarkedPoint::new(c(0.5, 0.0), 1.0, 1, ONE)],
        )
        .unwrap();
        let sys = jet_constraints(&w, 5).unwrap();
        let coeffs: Vec<Complex64> = (0..6).map(|l| c(l as f64 + 1.0, -(l as f64))).collect();
        let f = TruncatedForm::new(coeffs.clone()).unwrap();
        let deriv: Complex64 = (1..6)
            .map(|l| coeffs[l] * l as f64 * 0.5f64.powi(l as i32 - 1))
            .sum();
        let row: Complex64 = (0..6).map(|l| sys.rows[(1, l)] * coeffs[l]).sum();
        assert!((row - deriv).norm() < 1e-13);
        assert!((f.taylor_coeff(c(0.5, 0.0), 1) - deriv).norm() < 1e-13);
    }

    #[test]
    fn constraint_dimension_errors() {
        let w = appendix(ONE);
        assert!(matches!(jet_constraints(&w, 1), Err(Error::Dimension(_))));
    }

    #[test]
    fn reduced_basis_satisfies_jets() {
        let w = appendix(c(0.7, 0.1));
        let basis = ReducedBasis::new(&w, 8, c(0.1, 0.0), 0.8).unwrap();
        assert_eq!(basis.dim(), 8);
        let mut coords = vec![ZERO; 8];
        coords[0] = c(1.3, 0.0);
        coords[1] = c(0.7, 0.1);
        coords[4] = c(-2.0, 1.0);
        coords[7] = c(0.5, 0.25);
        let f = basis.to_monomial(&coords);
        assert!((f.taylor_coeff(ZERO, 0)).norm() < 1e-13);
        assert!((f.taylor_coeff(ZERO, 1) - c(1.3, 0.0)).norm() < 1e-13);
        assert!((f.eval(c(0.5, 0.0)) - c(0.7, 0.1)).norm() < 1e-13);
        // Pointwise evaluation agrees with the monomial expansion.
        let z = c(0.3, -0.4);
        let mut buf = vec![ZERO; 8];
        basis.eval(&Point::plain(z), &mut buf);
        let direct: Complex64 = buf.iter().zip(&coords).map(|(b, c)| b * c).sum();
        assert!((direct - f.eval(z)).norm() < 1e-12);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(3, 5), 0.0);
        assert!((binomial(60, 30) / 118264581564861424.0 - 1.0).abs() < 1e-14);
    }
}
