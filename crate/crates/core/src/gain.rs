//! Gain functions `c(t)` and the tail transform `h(t) = ∫ₜ^∞ c(s)e^{-s} ds`.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::adaptive_gk;

/// A positive function on `(0, ∞)` with `c(t)e^{-t}` non-increasing and
/// `∫₀^∞ c(s)e^{-s} ds < ∞`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GainFunction {
    Constant { value: f64 },
    /// `c(t) = e^{rate·t}` with `rate < 1`.
    Exponential { rate: f64 },
    /// Samples `(t, c(t))`, log-linearly interpolated. Outside the sampled
    /// range the first/last segment is continued log-linearly.
    Tabulated { points: Vec<(f64, f64)> },
}

/// Empirical limit of the tail ratio probed by [`GainFunction::ratio_probe`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RatioTrend {
    #[serde(rename = "->1")]
    ToOne,
    #[serde(rename = "->0")]
    ToZero,
    #[serde(rename = "->inf")]
    ToInfinity,
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioProbe {
    pub trend: RatioTrend,
    /// Least-squares slope of `log ratio` against `t`.
    pub rate: f64,
    pub ratios: Vec<f64>,
}

impl GainFunction {
    pub fn constant(value: f64) -> Result<Self> {
        let g = GainFunction::Constant { value };
        g.validate()?;
        Ok(g)
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        let g = GainFunction::Exponential { rate };
        g.validate()?;
        Ok(g)
    }

    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self> {
        let g = GainFunction::Tabulated { points };
        g.validate()?;
        Ok(g)
    }

    /// Read a two-column `t,c` CSV (header optional).
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut points = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::InvalidGain(format!("csv: {e}")))?;
            if rec.len() != 2 {
                return Err(Error::InvalidGain(format!(
                    "line {}: expected two columns, found {}",
                    line + 1,
                    rec.len()
                )));
            }
            let t = rec[0].parse::<f64>();
            let c = rec[1].parse::<f64>();
            match (t, c) {
                (Ok(t), Ok(c)) => points.push((t, c)),
                _ if line == 0 => continue,
                _ => {
                    return Err(Error::InvalidGain(format!(
                        "line {}: non-numeric entry",
                        line + 1
                    )))
                }
            }
        }
        GainFunction::tabulated(points)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GainFunction::Constant { value } => {
                if !(*value > 0.0 && value.is_finite()) {
                    return Err(Error::InvalidGain(format!("constant must be positive, got {value}")));
                }
            }
            GainFunction::Exponential { rate } => {
                if !rate.is_finite() || *rate >= 1.0 {
                    return Err(Error::InvalidGain(format!(
                        "exponential rate must be < 1 for a finite h(0), got {rate}"
                    )));
                }
            }
            GainFunction::Tabulated { points } => {
                if points.len() < 2 {
                    return Err(Error::InvalidGain("need at least two samples".into()));
                }
                for w in points.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return Err(Error::InvalidGain("sample abscissae must be strictly increasing".into()));
                    }
                }
                for &(t, c) in points {
                    if !(t.is_finite() && c.is_finite() && c > 0.0) {
                        return Err(Error::InvalidGain(format!("bad sample ({t}, {c})")));
                    }
                }
                if points[0].0 < 0.0 {
                    return Err(Error::InvalidGain("samples must lie in [0, inf)".into()));
                }
                // c(t)e^{-t} non-increasing at the samples.
                for w in points.windows(2) {
                    let left = w[0].1.ln() - w[0].0;
                    let right = w[1].1.ln() - w[1].0;
                    if right > left + 1e-12 * left.abs().max(1.0) {
                        return Err(Error::InvalidGain(format!(
                            "c(t)e^(-t) increases between t={} and t={}",
                            w[0].0, w[1].0
                        )));
                    }
                }
                if self.growth_rate() >= 1.0 {
                    return Err(Error::InvalidGain(
                        "last segment grows like e^t or faster; h(0) diverges".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Asymptotic exponential growth rate `κ` with `c(t) ~ e^{κt}` near ∞.
    pub fn growth_rate(&self) -> f64 {
        match self {
            GainFunction::Constant { .. } => 0.0,
            GainFunction::Exponential { rate } => *rate,
            GainFunction::Tabulated { points } => segment_slope(points, points.len() - 2),
        }
    }

    /// `log c(t)` for any real `t` (no domain check; used on hot paths).
    #[inline]
    pub fn log_c(&self, t: f64) -> f64 {
        match self {
            GainFunction::Constant { value } => value.ln(),
            GainFunction::Exponential { rate } => rate * t,
            GainFunction::Tabulated { points } => {
                let n = points.len();
                let seg = match points.binary_search_by(|p| p.0.total_cmp(&t)) {
                    Ok(i) => return points[i].1.ln(),
                    Err(0) => 0,
                    Err(i) if i >= n => n - 2,
                    Err(i) => i - 1,
                };
                let (t0, c0) = points[seg];
                c0.ln() + segment_slope(points, seg) * (t - t0)
            }
        }
    }

    pub fn eval_c(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::OutOfRange(format!("c(t) requires t > 0, got {t}")));
        }
        Ok(self.log_c(t).exp())
    }

    /// `∫ₜ^∞ c(s) e^{-a s} ds`.
    pub fn tail_integral(&self, a: f64, t: f64) -> Result<f64> {
        let kappa = self.growth_rate();
        if !(a > kappa) {
            return Err(Error::OutOfRange(format!(
                "∫ c(s)e^(-{a}s) ds diverges for a gain growing like e^({kappa}s)"
            )));
        }
        match self {
            GainFunction::Constant { value } => Ok(value * (-a * t).exp() / a),
            GainFunction::Exponential { rate } => Ok(((rate - a) * t).exp() / (a - rate)),
            GainFunction::Tabulated { points } => {
                let (t_last, c_last) = *points.last().expect("validated");
                let scale = c_last * (-a * t_last).exp();
                let mut total = 0.0;
                let start = t.min(t_last);
                // Adaptive quadrature over the sampled range, segment by segment.
                let mut knots: Vec<f64> = vec![start];
                knots.extend(points.iter().map(|p| p.0).filter(|&s| s > start && s < t_last));
                knots.push(t_last);
                for w in knots.windows(2) {
                    let (lo, hi) = (w[0], w[1]);
                    if hi <= lo {
                        continue;
                    }
                    let f = |s: f64| (self.log_c(s) - a * s).exp();
                    // Integrand is negligible relative to the running total.
                    if total > 0.0 && f(lo) * (hi - lo) < 1e-17 * total {
                        break;
                    }
                    let (v, _) = adaptive_gk(f, lo, hi, 0.0, 1e-14, 2000)?;
                    total += v;
                }
                // Exact exponential tail beyond the last sample.
                let from = t.max(t_last);
                let tail = scale * ((kappa - a) * (from - t_last)).exp() / (a - kappa);
                Ok(total + tail)
            }
        }
    }

    pub fn eval_h(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::OutOfRange(format!("h(t) requires t >= 0, got {t}")));
        }
        self.tail_integral(1.0, t)
    }

    pub fn h0(&self) -> f64 {
        self.eval_h(0.0).expect("validated gain has finite h(0)")
    }

    /// `∫_{lo}^{hi} c(s) e^{-s} ds` without forming a difference of tails.
    pub fn band_integral(&self, lo: f64, hi: f64) -> Result<f64> {
        if hi <= lo {
            return Ok(0.0);
        }
        let f = |s: f64| (self.log_c(s) - s).exp();
        let (v, _) = adaptive_gk(f, lo, hi, 0.0, 1e-14, 4000)?;
        Ok(v)
    }

    /// The `t` with `h(t) = r`, by bisection on a growing bracket.
    pub fn invert_h(&self, r: f64) -> Result<f64> {
        let h0 = self.h0();
        if !(r > 0.0 && r < h0) {
            return Err(Error::OutOfRange(format!("r = {r} outside (0, h(0) = {h0})")));
        }
        let mut lo = 0.0;
        let mut hi = 1.0;
        while self.eval_h(hi)? > r {
            lo = hi;
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::OutOfRange(format!("h^-1({r}) beyond bracket")));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval_h(mid)? > r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        debug_assert!((self.eval_h(t)? - r).abs() <= 1e-12 * h0);
        Ok(t)
    }

    /// Sample `∫ₜ^∞ c e^{-as} / ∫ₜ^∞ c e^{-s}` on a grid and classify its trend.
    pub fn ratio_probe(&self, a: f64, t_grid: &[f64]) -> Result<RatioProbe> {
        if t_grid.len() < 2 {
            return Err(Error::OutOfRange("ratio probe needs at least two grid points".into()));
        }
        let mut ratios = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            ratios.push(self.tail_integral(a, t)? / self.tail_integral(1.0, t)?);
        }
        let n = t_grid.len() as f64;
        let logs: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
        let mt = t_grid.iter().sum::<f64>() / n;
        let ml = logs.iter().sum::<f64>() / n;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (t, l) in t_grid.iter().zip(&logs) {
            sxy += (t - mt) * (l - ml);
            sxx += (t - mt) * (t - mt);
        }
        let rate = sxy / sxx;
        let last = *logs.last().expect("non-empty");
        let trend = if rate.abs() <= 1e-6 && last.abs() <= 1e-6 {
            RatioTrend::ToOne
        } else if rate < 0.0 {
            RatioTrend::ToZero
        } else {
            RatioTrend::ToInfinity
        };
        Ok(RatioProbe { trend, rate, ratios })
    }

    /// Check `c(tᵢ)e^{-tᵢ} ≥ c(tⱼ)e^{-tⱼ}` for `tᵢ < tⱼ` on a uniform grid.
    pub fn is_class_p_on_grid(&self, t_max: f64, n: usize) -> bool {
        let mut prev = f64::INFINITY;
        for i in 1..=n {
            let t = t_max * i as f64 / n as f64;
            let v = self.log_c(t) - t;
            if v > prev + 1e-12 * prev.abs().max(1.0) {
                return false;
            }
            prev = v;
        }
        true
    }
}

fn segment_slope(points: &[(f64, f64)], seg: usize) -> f64 {
    let (t0, c0) = points[seg];
    let (t1, c1) = points[seg + 1];
    (c1.ln() - c0.ln()) / (t1 - t0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, LN_2};

    fn flat_table() -> GainFunction {
        GainFunction::tabulated((0..=20).map(|i| (i as f64 * 0.5, 1.0)).collect()).unwrap()
    }

    #[test]
    fn eval_c_examples() {
        assert_eq!(GainFunction::constant(1.0).unwrap().eval_c(5.0).unwrap(), 1.0);
        let e = GainFunction::exponential(0.5).unwrap().eval_c(2.0).unwrap();
        assert!((e - E).abs() < 1e-15);
        assert!((flat_table().eval_c(0.7).unwrap() - 1.0).abs() < 1e-12);
        assert!(GainFunction::constant(1.0).unwrap().eval_c(0.0).is_err());
    }

    #[test]
    fn eval_h_examples() {
        let c1 = GainFunction::constant(1.0).unwrap();
        assert!((c1.eval_h(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((c1.eval_h(3.0).unwrap() - (-3f64).exp()).abs() < 1e-16);
        assert!((GainFunction::exponential(0.5).unwrap().h0() - 2.0).abs() < 1e-15);
        let h1 = flat_table().eval_h(1.0).unwrap();
        assert!((h1 - (-1f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn invert_h_examples() {
        let c1 = GainFunction::constant(1.0).unwrap();
        assert!((c1.invert_h(0.5).unwrap() - LN_2).abs() < 1e-12);
        let ex = GainFunction::exponential(0.5).unwrap();
        assert!((ex.invert_h(1.0).unwrap() - 2.0 * LN_2).abs() < 1e-12);
        assert!(c1.invert_h(1.0).is_err());
        assert!(c1.invert_h(0.0).is_err());
        for g in [c1, ex, flat_table()] {
            for t in [0.1, 1.0, 5.0] {
                let back = g.invert_h(g.eval_h(t).unwrap()).unwrap();
                assert!((back - t).abs() < 1e-10, "{g:?} t={t} back={back}");
            }
        }
    }

    #[test]
    fn divergent_gain_rejected() {
        assert!(GainFunction::exponential(1.0).is_err());
        assert!(GainFunction::tabulated(vec![(0.0, 1.0), (1.0, 3.0)]).is_err());
        assert!(GainFunction::tabulated(vec![(0.0, 1.0), (0.0, 1.0)]).is_err());
        assert!(GainFunction::constant(-1.0).is_err());
    }

    #[test]
    fn ratio_probe_trichotomy_for_constant_gain() {
        let c1 = GainFunction::constant(1.0).unwrap();
        let grid: Vec<f64> = (1..=20).map(f64::from).collect();
        let p = c1.ratio_probe(2.0, &grid).unwrap();
        assert_eq!(p.trend, RatioTrend::ToZero);
        assert!((p.rate + 1.0).abs() < 1e-10);
        // closed form e^{(1-a)t}/a
        assert!((p.ratios[0] - (-1f64).exp() / 2.0).abs() < 1e-14);
        assert_eq!(c1.ratio_probe(1.0, &grid).unwrap().trend, RatioTrend::ToOne);
        let p = c1.ratio_probe(0.5, &grid).unwrap();
        assert_eq!(p.trend, RatioTrend::ToInfinity);
        assert!((p.ratios[3] - (2.0f64).exp() / 0.5).abs() < 1e-12);
    }

    #[test]
    fn ratio_probe_rejects_divergent_numerator() {
        let ex = GainFunction::exponential(0.25).unwrap();
        assert!(ex.ratio_probe(0.2, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn tabulated_matches_closed_form_exponential() {
        let pts: Vec<(f64, f64)> = (0..=40).map(|i| {
            let t = i as f64 * 0.25;
            (t, (0.3 * t).exp())
        }).collect();
        let tab = GainFunction::tabulated(pts).unwrap();
        let ex = GainFunction::exponential(0.3).unwrap();
        for t in [0.0, 0.8, 4.0, 15.0] {
            let a = tab.eval_h(t).unwrap();
            let b = ex.eval_h(t).unwrap();
            assert!((a - b).abs() < 1e-12 * b, "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn csv_loading() {
        let data = "t,c\n0,1\n1,1\n2,1\n";
        let g = GainFunction::from_csv(data.as_bytes()).unwrap();
        assert!((g.eval_c(1.5).unwrap() - 1.0).abs() < 1e-15);
        assert!(GainFunction::from_csv("0,1\n0,2\n".as_bytes()).is_err());
        assert!(GainFunction::from_csv("0,1,3\n".as_bytes()).is_err());
    }

    #[test]
    fn h_vanishes_at_infinity() {
        // h(40)/h(0) = e^{-40(1-rate)}, below 1e-12 once rate < 0.31.
        for g in [
            GainFunction::constant(1.0).unwrap(),
            GainFunction::exponential(0.25).unwrap(),
            GainFunction::exponential(-0.5).unwrap(),
        ] {
            assert!(g.eval_h(40.0).unwrap() < 1e-12 * g.h0());
        }
        let half = GainFunction::exponential(0.5).unwrap();
        assert!(half.eval_h(80.0).unwrap() < 1e-12 * half.h0());
    }
}
