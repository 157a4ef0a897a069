//! The minimal weighted L² integral `G(t; c)` as an equality-constrained
//! quadratic minimization, an independent descent oracle, and the
//! extension bound it is compared against.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{
    gram_analytic, gram_reduced_level, is_centered_radial, is_trivial_disc, jet_constraints, weight_nodes,
    GramMatrix, JetConstraintSystem, ReducedBasis, TruncatedForm,
};
use crate::gain::GainFunction;
use crate::geometry::log_capacity;
use crate::polar::{Nodes, Point, QuadratureConfig, Region};
use crate::weights::WeightPair;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative eigenvalue cutoff for the reduced Hessian.
const EIGEN_CUTOFF: f64 = 1e-13;

/// How the Gram matrix is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Closed form when the weight allows it, quadrature otherwise.
    #[default]
    Auto,
    Analytic,
    Quadrature,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    /// Truncation degree `N`.
    pub degree: usize,
    pub mesh: QuadratureConfig,
    pub method: Method,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            degree: 64,
            mesh: QuadratureConfig::default(),
            method: Method::Auto,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Which Gram was used: `analytic` or `quadrature`.
    pub gram: String,
    /// Ratio of extreme eigenvalues of the Jacobi-scaled reduced Hessian.
    pub condition_estimate: f64,
    /// Smallest eigenvalue of the scaled reduced Hessian; positive values
    /// certify a unique minimizer.
    pub min_reduced_eigenvalue: f64,
    /// Reduced directions discarded by the eigenvalue cutoff.
    pub dropped_directions: usize,
    /// `‖C a − b‖` of the reported monomial coefficients.
    pub constraint_residual: f64,
    /// `|G_fine − Q_coarse(F)|`: the fine-level minimizer integrated on the
    /// next coarser mesh.
    pub quadrature_error: f64,
    /// Relative tail `Σ_{l>N} (l+1)^{2K+1} ρ^{2l}` of the jet functionals,
    /// `ρ = max |ζⱼ|`, `K = max kⱼ`.
    pub truncation_tail: f64,
    /// Set when `{ψ < −t}` contains no quadrature node; `G` is then 0.
    pub empty_region: bool,
}

/// Evaluable form of the minimizer, kept in the basis it was computed in.
#[derive(Clone, Debug, PartialEq)]
pub enum FormRepresentation {
    Monomial(TruncatedForm),
    Reduced { basis: ReducedBasis, coords: Vec<Complex64> },
}

impl FormRepresentation {
    pub fn eval(&self, p: &Point) -> Complex64 {
        match self {
            FormRepresentation::Monomial(f) => f.eval(p.z),
            FormRepresentation::Reduced { basis, coords } => {
                let mut buf = vec![ZERO; basis.dim()];
                basis.eval(p, &mut buf);
                buf.iter().zip(coords).map(|(b, c)| b * c).sum()
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimalIntegralResult {
    /// `G(t; c)`.
    pub value: f64,
    pub t: f64,
    pub extremal: TruncatedForm,
    pub multipliers: Vec<Complex64>,
    pub diagnostics: Diagnostics,
    #[serde(skip)]
    pub representation: FormRepresentation,
}

/// Minimizer of `y* K y + 2 Re(y* g)` by a Jacobi-scaled eigen-decomposition.
struct ReducedSolve {
    y: DVector<Complex64>,
    condition: f64,
    min_eig: f64,
    dropped: usize,
}

fn solve_reduced(k: &DMatrix<Complex64>, g: &DVector<Complex64>) -> ReducedSolve {
    let n = k.nrows();
    if n == 0 {
        return ReducedSolve {
            y: DVector::zeros(0),
            condition: 1.0,
            min_eig: 1.0,
            dropped: 0,
        };
    }
    let d: Vec<f64> = (0..n)
        .map(|i| {
            let v = k[(i, i)].re;
            if v > 0.0 {
                1.0 / v.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let ks = DMatrix::from_fn(n, n, |i, j| k[(i, j)] * (d[i] * d[j]));
    let ks = (&ks + ks.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(ks);
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let lmin = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let gs = DVector::from_fn(n, |i, _| g[i] * d[i]);
    let proj = eig.eigenvectors.adjoint() * &gs;
    let mut coef = DVector::from_element(n, ZERO);
    let mut dropped = 0;
    for i in 0..n {
        let l = eig.eigenvalues[i];
        if l > EIGEN_CUTOFF * lmax && lmax > 0.0 {
            coef[i] = -proj[i] / l;
        } else {
            dropped += 1;
        }
    }
    let ys = &eig.eigenvectors * coef;
    let y = DVector::from_fn(n, |i, _| ys[i] * d[i]);
    ReducedSolve {
        y,
        condition: if lmin > 0.0 { lmax / lmin } else { f64::INFINITY },
        min_eig: lmin,
        dropped,
    }
}

/// `min a*Ha` subject to `C a = b`, by the null-space method.
pub fn kkt_minimize(h: &GramMatrix, c: &JetConstraintSystem) -> Result<MinimalIntegralResult> {
    let n = h.dim();
    if c.rows.ncols() != n {
        return Err(Error::Dimension(format!(
            "Gram is {n}x{n}, constraints have {} columns",
            c.rows.ncols()
        )));
    }
    let r = c.rows.nrows();
    let svd = c.rows.clone().svd(true, true);
    let (u, vt) = (svd.u.as_ref().expect("u"), svd.v_t.as_ref().expect("v_t"));
    let s = &svd.singular_values;
    let smax = s.max();
    if !(s.min() > 1e-13 * smax) {
        return Err(Error::RankDeficient("constraint rows are dependent".into()));
    }
    // Minimum-norm particular solution.
    let ub = u.adjoint() * &c.rhs;
    let scaled = DVector::from_fn(r, |i, _| ub[i] / s[i]);
    let a_p = vt.adjoint() * scaled;
    // Orthonormal null space: unit eigenvectors of I − V Vᵀ.
    let v = vt.adjoint();
    let proj = DMatrix::<Complex64>::identity(n, n) - &v * v.adjoint();
    let eig = SymmetricEigen::new((&proj + proj.adjoint()) * Complex64::new(0.5, 0.0));
    let cols: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    let z = DMatrix::from_fn(n, cols.len(), |i, j| eig.eigenvectors[(i, cols[j])]);
    let hz = &h.entries * &z;
    let k = z.adjoint() * &hz;
    let g = hz.adjoint() * &a_p;
    let sol = solve_reduced(&k, &g);
    let a = &a_p + &z * &sol.y;
    let coeffs: Vec<Complex64> = a.iter().cloned().collect();
    let value = crate::forms::quadratic_form(&coeffs, &h.entries)?;
    let residual = (&c.rows * &a - &c.rhs).norm();
    // Multipliers: H a = C* μ.
    let cc = &c.rows * c.rows.adjoint();
    let rhs = &c.rows * (&h.entries * &a);
    let mu = cc
        .cholesky()
        .ok_or_else(|| Error::RankDeficient("C C* is not positive definite".into()))?
        .solve(&rhs);
    Ok(MinimalIntegralResult {
        value,
        t: h.t,
        extremal: TruncatedForm { coeffs: coeffs.clone() },
        multipliers: mu.iter().cloned().collect(),
        diagnostics: Diagnostics {
            gram: if h.error_estimate == 0.0 { "analytic".into() } else { "quadrature".into() },
            condition_estimate: sol.condition,
            min_reduced_eigenvalue: sol.min_eig,
            dropped_directions: sol.dropped,
            constraint_residual: residual,
            quadrature_error: h.error_estimate,
            truncation_tail: 0.0,
            empty_region: h.empty_region,
        },
        representation: FormRepresentation::Monomial(TruncatedForm { coeffs }),
    })
}

/// Projected, accelerated gradient descent on `a*Ha` over `{C a = b}` from
/// random starts; returns the best value found.
pub fn oracle_minimize(h: &GramMatrix, c: &JetConstraintSystem, restarts: usize, seed: u64) -> Result<f64> {
    let n = h.dim();
    if c.rows.ncols() != n || restarts == 0 {
        return Err(Error::Dimension("oracle needs matching sizes and at least one start".into()));
    }
    let hm = &h.entries;
    let cc = (&c.rows * c.rows.adjoint())
        .cholesky()
        .ok_or_else(|| Error::RankDeficient("C C* is not positive definite".into()))?;
    let project = |x: &DVector<Complex64>| -> DVector<Complex64> {
        let defect = &c.rows * x - &c.rhs;
        x - c.rows.adjoint() * cc.solve(&defect)
    };
    // Lipschitz constant of the gradient 2Hx by power iteration.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = DVector::from_fn(n, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let mut lmax = 0.0;
    for _ in 0..200 {
        let hv = hm * &v;
        let nrm = hv.norm();
        if nrm == 0.0 {
            break;
        }
        lmax = nrm / v.norm();
        v = hv / Complex64::new(nrm, 0.0);
    }
    if lmax == 0.0 {
        return Ok(0.0);
    }
    let step = Complex64::new(1.0 / (2.0 * lmax * 1.01), 0.0);
    let f = |x: &DVector<Complex64>| (x.adjoint() * hm * x)[(0, 0)].re;
    let mut best = f64::INFINITY;
    for _ in 0..restarts {
        let x0 = DVector::from_fn(n, |_, _| Complex64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0));
        let mut x = project(&x0);
        let mut y = x.clone();
        let mut tk = 1.0f64;
        let mut prev = f(&x);
        let mut converged = false;
        for it in 0..200_000 {
            let grad = (hm * &y) * Complex64::new(2.0, 0.0);
            let xn = project(&(&y - grad * step));
            let tn = 0.5 * (1.0 + (1.0 + 4.0 * tk * tk).sqrt());
            let mom = Complex64::new((tk - 1.0) / tn, 0.0);
            let fx = f(&xn);
            // Restart the momentum whenever the objective increases.
            if fx > prev {
                tk = 1.0;
                y = xn.clone();
            } else {
                y = &xn + (&xn - &x) * mom;
                tk = tn;
            }
            let moved = (&xn - &x).norm();
            x = xn;
            if it > 10 && moved <= 1e-13 * (1.0 + x.norm()) {
                converged = true;
                break;
            }
            prev = fx;
        }
        if !converged {
            return Err(Error::Solver("projected gradient did not converge".into()));
        }
        best = best.min(f(&x));
    }
    Ok(best)
}

fn truncation_tail(w: &WeightPair, degree: usize) -> f64 {
    let rho = w.marked_disc.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if rho == 0.0 {
        return 0.0;
    }
    let k = w.marked.iter().map(|p| p.jet_order).max().unwrap_or(0) as i32;
    let term = |l: usize| ((l + 1) as f64).powi(2 * k + 1) * rho.powi(2 * l as i32);
    let (mut head, mut tail) = (0.0, 0.0);
    for l in 0..20_000 {
        let v = term(l);
        if l <= degree {
            head += v;
        } else {
            tail += v;
            if v < 1e-300 || v < 1e-18 * tail {
                break;
            }
        }
    }
    tail / (head + tail)
}

/// `G(t; c)`: assembles the constraints and the Gram over `{ψ < −t}` and
/// minimizes.
pub fn minimal_integral(w: &WeightPair, gain: &GainFunction, t: f64, opts: &SolveOptions) -> Result<MinimalIntegralResult> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::OutOfRange(format!("t must be non-negative, got {t}")));
    }
    opts.mesh.validate()?;
    let analytic_ok = is_trivial_disc(w, gain, t) || is_centered_radial(w, gain);
    let use_analytic = match opts.method {
        Method::Auto => analytic_ok,
        Method::Analytic => true,
        Method::Quadrature => false,
    };
    let mut result = if use_analytic {
        let h = gram_analytic(w, gain, t, opts.degree)?;
        let c = jet_constraints(w, opts.degree)?;
        kkt_minimize(&h, &c)?
    } else {
        reduced_quadrature(w, gain, t, opts)?
    };
    result.t = t;
    result.diagnostics.truncation_tail = truncation_tail(w, opts.degree);
    Ok(result)
}

fn reduced_quadrature(w: &WeightPair, gain: &GainFunction, t: f64, opts: &SolveOptions) -> Result<MinimalIntegralResult> {
    w.check_integrable(gain)?;
    let region = if t == 0.0 { Region::Whole } else { Region::Sublevel { t } };
    let orders: Vec<usize> = w.marked.iter().map(|p| p.jet_order).collect();
    let fine = weight_nodes(w, gain, region, &orders, &opts.mesh, 0)?;
    let b = w.disc_jet_coeffs()?;
    if fine.is_empty() {
        let basis = ReducedBasis::new(w, opts.degree, ZERO, 1.0)?;
        let coords: Vec<Complex64> = b.iter().cloned().chain(std::iter::repeat_n(ZERO, basis.null_count)).collect();
        return Ok(MinimalIntegralResult {
            value: 0.0,
            t,
            extremal: basis.to_monomial(&coords),
            multipliers: vec![ZERO; w.len()],
            diagnostics: Diagnostics {
                gram: "quadrature".into(),
                empty_region: true,
                ..Diagnostics::default()
            },
            representation: FormRepresentation::Reduced { basis, coords },
        });
    }
    let (center, scale) = fine.bounding_disc();
    let basis = ReducedBasis::new(w, opts.degree, center, scale)?;
    let h_fine = gram_reduced_level(w, gain, &basis, &fine);
    let solve = |h: &DMatrix<Complex64>| -> Result<(f64, DVector<Complex64>, ReducedSolve)> {
        let m = basis.particular_count();
        let nn = basis.null_count;
        let beta = DVector::from_column_slice(&b);
        let bblk = h.view((m, 0), (nn, m)).into_owned();
        let dblk = h.view((m, m), (nn, nn)).into_owned();
        let g = &bblk * &beta;
        let sol = solve_reduced(&dblk, &g);
        let v = DVector::from_fn(m + nn, |i, _| if i < m { beta[i] } else { sol.y[i - m] });
        let value = (v.adjoint() * h * &v)[(0, 0)].re.max(0.0);
        Ok((value, v, sol))
    };
    let (value, v, sol) = solve(&h_fine)?;
    let mut quad_err = 0.0;
    if opts.mesh.levels >= 2 {
        let coarse = weight_nodes(w, gain, region, &orders, &opts.mesh, 1)?;
        // The fine minimizer integrated on the coarse mesh: G is stationary
        // in the coefficients, so this measures the quadrature error of G
        // without letting the coarse level overfit its own nodes.
        let coords: Vec<Complex64> = v.iter().cloned().collect();
        quad_err = (value - weighted_norm(w, gain, &basis, &coarse, &coords)).abs();
    }
    let m = basis.particular_count();
    let mu_full = &h_fine * &v;
    let multipliers: Vec<Complex64> = mu_full.iter().take(m).cloned().collect();
    let coords: Vec<Complex64> = v.iter().cloned().collect();
    let extremal = basis.to_monomial(&coords);
    let c = jet_constraints(w, opts.degree)?;
    let a = DVector::from_column_slice(&extremal.coeffs);
    let residual = (&c.rows * &a - &c.rhs).norm();
    Ok(MinimalIntegralResult {
        value,
        t,
        extremal,
        multipliers,
        diagnostics: Diagnostics {
            gram: "quadrature".into(),
            condition_estimate: sol.condition,
            min_reduced_eigenvalue: sol.min_eig,
            dropped_directions: sol.dropped,
            constraint_residual: residual,
            quadrature_error: quad_err,
            truncation_tail: 0.0,
            empty_region: false,
        },
        representation: FormRepresentation::Reduced { basis, coords },
    })
}

/// `2 Σₖ wₖ W(ζₖ) |F(ζₖ)|²` for `F = Σ coordsᵢ eᵢ`.
fn weighted_norm(w: &WeightPair, gain: &GainFunction, basis: &ReducedBasis, nodes: &Nodes, coords: &[Complex64]) -> f64 {
    let mut buf = vec![ZERO; basis.dim()];
    let mut total = 0.0;
    for (p, &wt) in nodes.points.iter().zip(&nodes.weights) {
        basis.eval(p, &mut buf);
        let f: Complex64 = buf.iter().zip(coords).map(|(b, c)| b * c).sum();
        let v = 2.0 * wt * w.log_weight_point(p, gain).exp() * f.norm_sqr();
        if v.is_finite() {
            total += v;
        }
    }
    total
}

/// `h(t) Σⱼ 2π|aⱼ|² e^{−αⱼ} / (pⱼ c_β(zⱼ)^{2(kⱼ+1)})`.
pub fn extension_bound(w: &WeightPair, gain: &GainFunction, t: f64) -> Result<f64> {
    let h = gain.eval_h(t)?;
    let mut sum = 0.0;
    for (j, p) in w.marked.iter().enumerate() {
        let alpha = w.alpha_j(j)?;
        let pj = w.lelong_psi(j)?;
        let cb = log_capacity(&w.domain, p)?;
        sum += 2.0 * PI * p.jet_coeff.norm_sqr() * (-alpha).exp()
            / (pj * cb.powi(2 * (p.jet_order as i32 + 1)));
    }
    Ok(h * sum)
}
