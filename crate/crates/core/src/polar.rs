//! Polar quadrature on sublevel regions of the unit disc.
//!
//! The disc is covered by a family of rays from the origin together with a
//! small disc ("patch") around every singular center. Patches are integrated
//! in local polar coordinates: geometric rings towards the center and a
//! power substitution on the innermost core, which integrates `ρ^{μ-1}`
//! behaviour exactly. Region boundaries are located along every ray by
//! bisection, and the angular rule is split into panels wherever the
//! boundary structure of a ray changes, so that each panel integrand is
//! smooth.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::rc::Rc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::GaussLegendre;

/// Mesh sizes for the polar quadrature.
///
/// `angular` and `radial` are node counts for the global ray family per
/// full turn and per unit length. In patches, `patch_angular` is the node
/// count per turn and `patch_radial / 6` the order of the rule on each
/// geometric ring.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    pub angular: usize,
    pub radial: usize,
    pub patch_angular: usize,
    pub patch_radial: usize,
    pub patch_radius: f64,
    /// Number of mesh levels; every level halves the node counts of the
    /// previous one. The spread between the two finest levels is the
    /// reported error estimate.
    pub levels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            angular: 256,
            radial: 256,
            patch_angular: 64,
            patch_radial: 64,
            patch_radius: 0.15,
            levels: 2,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.angular < 16 || self.radial < 16 || self.patch_angular < 16 || self.patch_radial < 12 {
            return Err(Error::Problem("quadrature mesh counts are too small".into()));
        }
        if !(self.patch_radius > 0.0 && self.patch_radius < 1.0) {
            return Err(Error::Problem(format!(
                "patch radius must lie in (0, 1), got {}",
                self.patch_radius
            )));
        }
        if self.levels == 0 {
            return Err(Error::Problem("at least one mesh level is required".into()));
        }
        Ok(())
    }

    /// The mesh of the given level (0 is the finest).
    pub fn level(&self, level: usize) -> QuadratureConfig {
        let div = 1usize << level;
        QuadratureConfig {
            angular: (self.angular / div).max(16),
            radial: (self.radial / div).max(16),
            patch_angular: (self.patch_angular / div).max(16),
            patch_radial: (self.patch_radial / div).max(12),
            patch_radius: self.patch_radius,
            levels: 1,
        }
    }
}

/// The integration region, in terms of level values `v = ψ(ζ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Whole,
    /// `{ψ < −t}`.
    Sublevel { t: f64 },
    /// `{−t1 ≤ ψ < −t2}`.
    Band { t1: f64, t2: f64 },
}

impl Region {
    #[inline]
    pub fn contains_level(&self, v: f64) -> bool {
        match *self {
            Region::Whole => true,
            Region::Sublevel { t } => v < -t,
            Region::Band { t1, t2 } => v >= -t1 && v < -t2,
        }
    }
}

/// A singular center: the integrand times the polar Jacobian behaves like
/// `ρ^{μ-1}` in the distance `ρ` to `zeta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Center {
    pub zeta: Complex64,
    pub mu: f64,
}

/// A quadrature node. Nodes inside a patch also carry their offset from
/// the patch center, so that `ζ − center` keeps full relative precision
/// arbitrarily close to the center.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub z: Complex64,
    pub center: Complex64,
    pub delta: Complex64,
}

impl Point {
    pub fn plain(z: Complex64) -> Self {
        Point {
            z,
            center: z,
            delta: Complex64::new(0.0, 0.0),
        }
    }

    /// `ζ − p`, exact relative to the patch center when `p` is that center.
    #[inline]
    pub fn offset(&self, p: Complex64) -> Complex64 {
        if self.center == p {
            self.delta
        } else {
            self.z - p
        }
    }
}

/// Quadrature nodes with area weights (`∫ f dA ≈ Σ wₖ f(ζₖ)`).
#[derive(Clone, Debug, Default)]
pub struct Nodes {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl Nodes {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_area(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Center and radius of a disc containing all nodes.
    pub fn bounding_disc(&self) -> (Complex64, f64) {
        if self.points.is_empty() {
            return (Complex64::new(0.0, 0.0), 1.0);
        }
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in self.points.iter().map(|p| p.z) {
            x0 = x0.min(p.re);
            x1 = x1.max(p.re);
            y0 = y0.min(p.im);
            y1 = y1.max(p.im);
        }
        let c = Complex64::new(0.5 * (x0 + x1), 0.5 * (y0 + y1));
        let r = self.points.iter().map(|p| (p.z - c).norm()).fold(0.0, f64::max);
        (c, r.max(f64::MIN_POSITIVE))
    }
}

const RING_RATIO: f64 = 0.35;
const GLOBAL_PIECE: usize = 16;
const MIN_PANEL: usize = 8;

type LevelFn<'a> = &'a dyn Fn(&Point) -> f64;

/// Boundary structure of one ray: for each region interval, the index of
/// its segment and whether it touches the segment ends.
type Signature = Vec<(usize, bool, bool)>;

struct Interval {
    lo: f64,
    hi: f64,
    seg: usize,
    at_start: bool,
    at_end: bool,
}

struct Patch {
    center: Complex64,
    radius: f64,
    mu: f64,
}

struct Mesh<'a> {
    patches: Vec<Patch>,
    level: Option<LevelFn<'a>>,
    region: Region,
    cfg: QuadratureConfig,
    rules: RefCell<HashMap<usize, Rc<GaussLegendre>>>,
}

/// Build quadrature nodes for `region`, with patches at `centers`, at mesh
/// level `level` of `cfg`.
pub fn build_nodes(
    centers: &[Center],
    level: Option<&dyn Fn(&Point) -> f64>,
    region: Region,
    cfg: &QuadratureConfig,
    mesh_level: usize,
) -> Result<Nodes> {
    cfg.validate()?;
    if region != Region::Whole && level.is_none() {
        return Err(Error::Quadrature("a level function is required for sublevel regions".into()));
    }
    for c in centers {
        if !(c.zeta.norm() < 1.0) {
            return Err(Error::Quadrature("singular center outside the disc".into()));
        }
        if !(c.mu > 0.0) {
            return Err(Error::NonIntegrable(format!(
                "({}, {}) with local exponent {}",
                c.zeta.re, c.zeta.im, c.mu
            )));
        }
    }
    let cfg = cfg.level(mesh_level);
    let patches = centers
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut r = cfg.patch_radius.min(0.5 * (1.0 - c.zeta.norm()));
            for (j, d) in centers.iter().enumerate() {
                if i != j {
                    r = r.min(0.4 * (c.zeta - d.zeta).norm());
                }
            }
            Patch {
                center: c.zeta,
                radius: r,
                mu: c.mu,
            }
        })
        .collect();
    let mesh = Mesh {
        patches,
        level,
        region,
        cfg,
        rules: RefCell::new(HashMap::new()),
    };
    let mut nodes = Nodes::default();
    mesh.global(&mut nodes);
    for i in 0..mesh.patches.len() {
        mesh.patch(i, &mut nodes);
    }
    Ok(nodes)
}

/// `θ = a + (b − a)(3u² − 2u³)`, with its derivative.
fn smoothstep(a: f64, b: f64, u: f64) -> (f64, f64) {
    (a + (b - a) * u * u * (3.0 - 2.0 * u), (b - a) * 6.0 * u * (1.0 - u))
}

impl<'a> Mesh<'a> {
    fn rule(&self, n: usize) -> Rc<GaussLegendre> {
        self.rules
            .borrow_mut()
            .entry(n)
            .or_insert_with(|| Rc::new(GaussLegendre::new(n)))
            .clone()
    }

    /// Level values at which region membership changes.
    fn boundaries(&self) -> Vec<f64> {
        match self.region {
            Region::Whole => Vec::new(),
            Region::Sublevel { t } => vec![-t],
            Region::Band { t1, t2 } => vec![-t1, -t2],
        }
    }

    #[inline]
    fn value(&self, p: &Point) -> f64 {
        self.level.map_or(0.0, |f| f(p))
    }

    #[inline]
    fn inside(&self, p: &Point) -> bool {
        self.level.is_none() || self.region.contains_level(self.value(p))
    }

    /// Region intervals of the ray `point(ρ)` over the given segments. The
    /// level function is sampled at the given positions; near misses (local
    /// extrema of the level close to a boundary value) are refined by
    /// golden-section search so that thin slivers are not skipped, and every
    /// membership change is then located by bisection. A first segment
    /// starting at a singular center (`ρ = 0`) inherits the membership of
    /// its smallest sample.
    fn intervals(
        &self,
        point: &dyn Fn(f64) -> Point,
        segments: &[(f64, f64)],
        samples: &dyn Fn(f64, f64) -> Vec<f64>,
    ) -> Vec<Interval> {
        let mut out = Vec::new();
        let levels = self.boundaries();
        for (si, &(a, b)) in segments.iter().enumerate() {
            if self.level.is_none() {
                out.push(Interval {
                    lo: a,
                    hi: b,
                    seg: si,
                    at_start: true,
                    at_end: true,
                });
                continue;
            }
            let mut pos = samples(a, b);
            let vals: Vec<f64> = pos.iter().map(|&r| self.value(&point(r))).collect();
            let mut extra = Vec::new();
            for &lv in &levels {
                for k in 1..pos.len().saturating_sub(1) {
                    let (g0, g1, g2) = (vals[k - 1] - lv, vals[k] - lv, vals[k + 1] - lv);
                    let same = g0.signum() == g1.signum() && g1.signum() == g2.signum();
                    if same && g1.abs() < g0.abs() && g1.abs() <= g2.abs() && g1.is_finite() {
                        let s = g1.signum();
                        let f = |r: f64| s * (self.value(&point(r)) - lv);
                        extra.push(golden_min(f, pos[k - 1], pos[k + 1]));
                    }
                }
            }
            if !extra.is_empty() {
                pos.extend(extra);
                pos.sort_by(f64::total_cmp);
                pos.dedup();
            }
            let flags: Vec<bool> = pos.iter().map(|&r| self.inside(&point(r))).collect();
            let mut open: Option<(f64, bool)> = if flags[0] { Some((a, true)) } else { None };
            for k in 1..pos.len() {
                if flags[k] == flags[k - 1] {
                    continue;
                }
                let x = self.bisect(point, pos[k - 1], pos[k], flags[k - 1]);
                if flags[k] {
                    open = Some((x, false));
                } else if let Some((lo, at_start)) = open.take() {
                    out.push(Interval {
                        lo,
                        hi: x,
                        seg: si,
                        at_start,
                        at_end: false,
                    });
                }
            }
            if let Some((lo, at_start)) = open {
                out.push(Interval {
                    lo,
                    hi: b,
                    seg: si,
                    at_start,
                    at_end: true,
                });
            }
        }
        out.retain(|iv| iv.hi > iv.lo);
        out
    }

    fn bisect(&self, point: &dyn Fn(f64) -> Point, mut lo: f64, mut hi: f64, flag_lo: bool) -> f64 {
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.inside(&point(mid)) == flag_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn signature(intervals: &[Interval], n_segments: usize) -> Signature {
        let mut sig: Signature = intervals.iter().map(|iv| (iv.seg, iv.at_start, iv.at_end)).collect();
        sig.push((n_segments, false, false));
        sig
    }

    /// Angular nodes for a ray family, split into smooth panels at the
    /// forced angles and at every detected change of ray signature.
    fn angular_rule(
        &self,
        n_target: usize,
        probes: usize,
        forced: &[f64],
        signature: &dyn Fn(f64) -> Signature,
    ) -> Vec<(f64, f64)> {
        let shift = 0.123_456_789 * TAU / probes as f64;
        let mut breaks: Vec<f64> = forced.iter().map(|t| t.rem_euclid(TAU)).collect();
        if self.level.is_some() {
            let thetas: Vec<f64> = (0..probes).map(|i| shift + TAU * i as f64 / probes as f64).collect();
            let sigs: Vec<Signature> = thetas.iter().map(|&t| signature(t)).collect();
            for i in 0..probes {
                let j = (i + 1) % probes;
                if sigs[i] == sigs[j] {
                    continue;
                }
                let mut lo = thetas[i];
                let mut hi = if j == 0 { thetas[0] + TAU } else { thetas[j] };
                for _ in 0..44 {
                    let mid = 0.5 * (lo + hi);
                    if signature(mid) == sigs[i] {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                breaks.push((0.5 * (lo + hi)).rem_euclid(TAU));
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
        if breaks.len() > 1 && (breaks[0] + TAU - breaks[breaks.len() - 1]) < 1e-13 {
            breaks.pop();
        }
        let mut out = Vec::new();
        if breaks.is_empty() {
            // Periodic smooth integrand: trapezoidal rule.
            let w = TAU / n_target as f64;
            for i in 0..n_target {
                out.push((shift + w * i as f64, w));
            }
            return out;
        }
        for i in 0..breaks.len() {
            let a = breaks[i];
            let b = if i + 1 < breaks.len() { breaks[i + 1] } else { breaks[0] + TAU };
            let len = b - a;
            if len <= 0.0 {
                continue;
            }
            let n = MIN_PANEL.max((n_target as f64 * len / TAU).ceil() as usize);
            let gl = self.rule(n);
            for (u, wu) in gl.on_interval(0.0, 1.0) {
                let (th, d) = smoothstep(a, b, u);
                out.push((th, wu * d));
            }
        }
        out
    }

    /// Segments of the global ray at `theta`: `[0, 1]` minus patch chords.
    fn global_segments(&self, theta: f64) -> Vec<(f64, f64)> {
        let dir = Complex64::from_polar(1.0, theta);
        let mut cuts: Vec<(f64, f64)> = Vec::new();
        for p in &self.patches {
            let b = (p.center * dir.conj()).re;
            let disc = b * b - p.center.norm_sqr() + p.radius * p.radius;
            if disc > 0.0 {
                let s = disc.sqrt();
                let (lo, hi) = ((b - s).max(0.0), (b + s).min(1.0));
                if hi > lo {
                    cuts.push((lo, hi));
                }
            }
        }
        cuts.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut segs = Vec::new();
        let mut cur = 0.0;
        for (lo, hi) in cuts {
            if lo > cur {
                segs.push((cur, lo));
            }
            cur = cur.max(hi);
        }
        if cur < 1.0 {
            segs.push((cur, 1.0));
        }
        segs
    }

    fn global_samples(&self, a: f64, b: f64) -> Vec<f64> {
        let n = ((b - a) * self.cfg.radial as f64).ceil().max(8.0) as usize;
        (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
    }

    fn global(&self, nodes: &mut Nodes) {
        let point_at = |theta: f64| {
            let dir = Complex64::from_polar(1.0, theta);
            move |r: f64| Point::plain(dir * r)
        };
        let samples = |a: f64, b: f64| self.global_samples(a, b);
        let signature = |theta: f64| {
            let segs = self.global_segments(theta);
            let iv = self.intervals(&point_at(theta), &segs, &samples);
            Self::signature(&iv, segs.len())
        };
        let mut forced = Vec::new();
        for p in &self.patches {
            let d = p.center.norm();
            if d > p.radius {
                let half = (p.radius / d).asin();
                let arg = p.center.arg();
                forced.push(arg - half);
                forced.push(arg + half);
            }
        }
        let probes = (2 * self.cfg.angular).max(128);
        let angles = self.angular_rule(self.cfg.angular, probes, &forced, &signature);
        let gl = self.rule(GLOBAL_PIECE);
        for (theta, wt) in angles {
            let segs = self.global_segments(theta);
            let pt = point_at(theta);
            for iv in self.intervals(&pt, &segs, &samples) {
                let pieces = ((iv.hi - iv.lo) * self.cfg.radial as f64 / GLOBAL_PIECE as f64)
                    .ceil()
                    .max(1.0) as usize;
                let h = (iv.hi - iv.lo) / pieces as f64;
                for k in 0..pieces {
                    let a = iv.lo + h * k as f64;
                    for (r, wr) in gl.on_interval(a, a + h) {
                        nodes.points.push(pt(r));
                        nodes.weights.push(wt * wr * r);
                    }
                }
            }
        }
    }

    fn patch_samples(radius: f64, a: f64, b: f64) -> Vec<f64> {
        let mut pos: Vec<f64> = (0..=32).map(|i| a + (b - a) * i as f64 / 32.0).collect();
        let mut r = b;
        for _ in 0..80 {
            r *= 0.75;
            if r <= a || r < 1e-9 * radius {
                break;
            }
            pos.push(r);
        }
        pos.retain(|&x| x > 0.0);
        if a > 0.0 {
            pos.push(a);
        }
        pos.sort_by(f64::total_cmp);
        pos.dedup();
        pos
    }

    fn patch(&self, index: usize, nodes: &mut Nodes) {
        let p = &self.patches[index];
        let (c, radius, mu) = (p.center, p.radius, p.mu);
        let point_at = |theta: f64| {
            let dir = Complex64::from_polar(1.0, theta);
            move |r: f64| Point {
                z: c + dir * r,
                center: c,
                delta: dir * r,
            }
        };
        let segs = [(0.0, radius)];
        let samples = |a: f64, b: f64| Self::patch_samples(radius, a, b);
        let signature = |theta: f64| {
            let iv = self.intervals(&point_at(theta), &segs, &samples);
            Self::signature(&iv, 1)
        };
        let probes = (2 * self.cfg.patch_angular).max(64);
        let angles = self.angular_rule(self.cfg.patch_angular, probes, &[], &signature);
        let n_ring = (self.cfg.patch_radial / 6).max(6);
        let gl = self.rule(n_ring);
        // Rings until the core carries a relative share below ~1e-14.
        let rings = ((14.0 * std::f64::consts::LN_10) / (mu * -RING_RATIO.ln()))
            .ceil()
            .clamp(3.0, 80.0) as usize;
        let mut radial: Vec<(f64, f64)> = Vec::new();
        for (theta, wt) in angles {
            let pt = point_at(theta);
            for iv in self.intervals(&pt, &segs, &samples) {
                radial.clear();
                let mut hi = iv.hi;
                if iv.at_start && iv.lo == 0.0 {
                    for _ in 0..rings {
                        let lo = hi * RING_RATIO;
                        radial.extend(gl.on_interval(lo, hi).map(|(r, w)| (r, w * r)));
                        hi = lo;
                    }
                    // Core: ρ = hi · s^{1/μ}.
                    for (s, ws) in gl.on_interval(0.0, 1.0) {
                        let r = hi * s.powf(1.0 / mu);
                        radial.push((r, ws * hi * hi / mu * s.powf(2.0 / mu - 1.0)));
                    }
                } else {
                    while hi * RING_RATIO > iv.lo {
                        let lo = hi * RING_RATIO;
                        radial.extend(gl.on_interval(lo, hi).map(|(r, w)| (r, w * r)));
                        hi = lo;
                    }
                    radial.extend(gl.on_interval(iv.lo, hi).map(|(r, w)| (r, w * r)));
                }
                for &(r, wr) in &radial {
                    nodes.points.push(pt(r));
                    nodes.weights.push(wt * wr);
                }
            }
        }
    }
}

/// Minimizer of `f` on `[a, b]` by golden-section search.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if b - a <= 1e-15 * b.abs().max(1e-300) {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        x1
    } else {
        x2
    }
}


/// `∫ f dA` over the nodes.
pub fn integrate(nodes: &Nodes, f: impl Fn(&Point) -> f64) -> f64 {
    nodes.points.iter().zip(&nodes.weights).map(|(p, &w)| w * f(p)).sum()
}

/// `∫ f dA` for complex integrands.
pub fn integrate_complex(nodes: &Nodes, f: impl Fn(&Point) -> Complex64) -> Complex64 {
    nodes.points.iter().zip(&nodes.weights).map(|(p, &w)| f(p) * w).sum()
}

/// Area of the unit disc, for sanity checks.
pub const DISC_AREA: f64 = PI;
