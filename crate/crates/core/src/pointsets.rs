//! Planar point configurations: lattices, perturbations, separation,
//! uniform closeness and Beurling-Landau uniform densities.

use std::collections::HashMap;
use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::Complex;
use crate::error::{FockError, Result};
use crate::space::FockParameter;
use crate::spatial::SpatialGrid;

/// A finite set of distinct points inside the disk `|z| <= window_radius`,
/// optionally indexed by lattice pairs `(m, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<Complex>,
    window_radius: f64,
    lattice_index: Option<Vec<(i64, i64)>>,
    by_index: HashMap<(i64, i64), usize>,
}

fn check_distinct(points: &[Complex]) -> Result<()> {
    let mut keys: Vec<(u64, u64, usize)> = points
        .iter()
        .enumerate()
        // +0.0 normalizes negative zero
        .map(|(i, z)| ((z.re + 0.0).to_bits(), (z.im + 0.0).to_bits(), i))
        .collect();
    keys.sort_unstable();
    for w in keys.windows(2) {
        if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
            let z = points[w[0].2];
            return Err(FockError::DuplicatePoint(z.re, z.im));
        }
    }
    Ok(())
}

impl PointSet {
    /// Unindexed point set. Points outside the window are rejected.
    pub fn new(points: Vec<Complex>, window_radius: f64) -> Result<Self> {
        Self::build(points, window_radius, None)
    }

    /// Point set with a lattice index per point; indices must be distinct.
    pub fn with_index(points: Vec<Complex>, index: Vec<(i64, i64)>, window_radius: f64) -> Result<Self> {
        if index.len() != points.len() {
            return Err(FockError::invalid(
                "lattice_index",
                format!("{} indices for {} points", index.len(), points.len()),
            ));
        }
        Self::build(points, window_radius, Some(index))
    }

    fn build(points: Vec<Complex>, window_radius: f64, lattice_index: Option<Vec<(i64, i64)>>) -> Result<Self> {
        if window_radius.is_nan() || window_radius < 0.0 {
            return Err(FockError::EmptyWindow(window_radius));
        }
        if let Some(z) = points.iter().find(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(FockError::invalid("points", format!("non-finite point {z}")));
        }
        if let Some(z) = points.iter().find(|z| z.norm() > window_radius) {
            return Err(FockError::invalid(
                "points",
                format!("point {z} lies outside the window of radius {window_radius}"),
            ));
        }
        check_distinct(&points)?;
        let mut by_index = HashMap::new();
        if let Some(idx) = &lattice_index {
            for (i, &k) in idx.iter().enumerate() {
                if by_index.insert(k, i).is_some() {
                    return Err(FockError::NotUniformlyClose(k.0, k.1));
                }
            }
        }
        Ok(PointSet {
            points,
            window_radius,
            lattice_index,
            by_index,
        })
    }

    pub fn points(&self) -> &[Complex] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn window_radius(&self) -> f64 {
        self.window_radius
    }

    pub fn lattice_index(&self) -> Option<&[(i64, i64)]> {
        self.lattice_index.as_deref()
    }

    /// Position of the point carrying lattice index `(m, n)`.
    pub fn position_of_index(&self, m: i64, n: i64) -> Option<usize> {
        self.by_index.get(&(m, n)).copied()
    }

    /// The point carrying lattice index `(m, n)`.
    pub fn point_at_index(&self, m: i64, n: i64) -> Option<Complex> {
        self.position_of_index(m, n).map(|i| self.points[i])
    }

    /// Position of an exact member.
    pub fn position_of(&self, z: Complex) -> Option<usize> {
        self.points.iter().position(|p| *p == z)
    }

    /// `gamma + a`, with the window enlarged so it still contains every point.
    pub fn translated(&self, a: Complex) -> Result<PointSet> {
        let points = self.points.iter().map(|z| z + a).collect();
        Self::build(points, self.window_radius + a.norm(), self.lattice_index.clone())
    }

    /// The set with the point at `position` removed.
    pub fn without(&self, position: usize) -> PointSet {
        let mut points = self.points.clone();
        points.remove(position);
        let lattice_index = self.lattice_index.clone().map(|mut idx| {
            idx.remove(position);
            idx
        });
        Self::build(points, self.window_radius, lattice_index).expect("removing a point keeps a valid set")
    }

    /// The set with extra points appended (index dropped).
    pub fn with_points(&self, extra: &[Complex]) -> Result<PointSet> {
        let mut points = self.points.clone();
        points.extend_from_slice(extra);
        let far = extra.iter().map(|z| z.norm()).fold(self.window_radius, f64::max);
        Self::build(points, far, None)
    }
}

/// The square lattice `lambda_{mn} = s (m + i n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquareLattice {
    spacing: f64,
    density: f64,
}

impl SquareLattice {
    pub fn new(spacing: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(FockError::invalid(
                "spacing",
                format!("must be positive, got {spacing}"),
            ));
        }
        Ok(SquareLattice {
            spacing,
            density: 1.0 / (spacing * spacing),
        })
    }

    /// Spacing `sqrt(pi / (alpha * ratio))`, i.e. density `ratio * alpha / pi`.
    pub fn with_density_ratio(alpha: FockParameter, ratio: f64) -> Result<Self> {
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(FockError::invalid(
                "density_ratio",
                format!("must be positive, got {ratio}"),
            ));
        }
        Self::new((PI / (alpha.value() * ratio)).sqrt())
    }

    /// The von Neumann lattice of spacing `sqrt(pi / alpha)`.
    pub fn von_neumann(alpha: FockParameter) -> Self {
        Self::with_density_ratio(alpha, 1.0).expect("positive ratio")
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Points per unit area, `1/s^2`.
    pub fn density(&self) -> f64 {
        self.density
    }

    /// The `beta` with density `beta/pi`.
    pub fn beta(&self) -> f64 {
        PI * self.density
    }

    pub fn point(&self, m: i64, n: i64) -> Complex {
        Complex::new(self.spacing * m as f64, self.spacing * n as f64)
    }

    /// Index of the lattice point nearest to `z` (coordinates rounded).
    pub fn nearest_index(&self, z: Complex) -> (i64, i64) {
        (
            (z.re / self.spacing).round() as i64,
            (z.im / self.spacing).round() as i64,
        )
    }

    /// All indices with `|lambda_{mn}| <= window_radius`: the origin first,
    /// then row-major in `(n, m)`.
    pub fn indices_in_disk(&self, window_radius: f64) -> Vec<(i64, i64)> {
        let k = (window_radius / self.spacing).floor() as i64;
        let mut out = vec![(0, 0)];
        for n in -k..=k {
            for m in -k..=k {
                if (m, n) != (0, 0) && self.point(m, n).norm() <= window_radius {
                    out.push((m, n));
                }
            }
        }
        out
    }
}

/// Lattice points with `|lambda| <= window_radius`, indexed by `(m, n)`.
pub fn square_lattice(spacing: f64, window_radius: f64) -> Result<PointSet> {
    if window_radius.is_nan() || window_radius < 0.0 {
        return Err(FockError::EmptyWindow(window_radius));
    }
    let lattice = SquareLattice::new(spacing)?;
    lattice_points(&lattice, window_radius)
}

/// [`square_lattice`] for an existing lattice.
pub fn lattice_points(lattice: &SquareLattice, window_radius: f64) -> Result<PointSet> {
    if window_radius.is_nan() || window_radius < 0.0 {
        return Err(FockError::EmptyWindow(window_radius));
    }
    let index = lattice.indices_in_disk(window_radius);
    let points = index.iter().map(|&(m, n)| lattice.point(m, n)).collect();
    PointSet::with_index(points, index, window_radius)
}

/// Square lattice of density `density_ratio * alpha / pi`.
pub fn scale_lattice_to_density(alpha: FockParameter, density_ratio: f64, window_radius: f64) -> Result<PointSet> {
    let lattice = SquareLattice::with_density_ratio(alpha, density_ratio)?;
    lattice_points(&lattice, window_radius)
}

/// Rectangular lattice `m a + i n b` in the disk, indexed by `(m, n)`.
pub fn rectangular_lattice(a: f64, b: f64, window_radius: f64) -> Result<PointSet> {
    if !(a.is_finite() && a > 0.0) {
        return Err(FockError::invalid("a", "must be positive"));
    }
    if !(b.is_finite() && b > 0.0) {
        return Err(FockError::invalid("b", "must be positive"));
    }
    if window_radius.is_nan() || window_radius < 0.0 {
        return Err(FockError::EmptyWindow(window_radius));
    }
    let km = (window_radius / a).floor() as i64;
    let kn = (window_radius / b).floor() as i64;
    let mut index = vec![(0, 0)];
    for n in -kn..=kn {
        for m in -km..=km {
            let z = Complex::new(a * m as f64, b * n as f64);
            if (m, n) != (0, 0) && z.norm() <= window_radius {
                index.push((m, n));
            }
        }
    }
    let points = index
        .iter()
        .map(|&(m, n)| Complex::new(a * m as f64, b * n as f64))
        .collect();
    PointSet::with_index(points, index, window_radius)
}

/// Move every point by an independent shift drawn uniformly from the disk of
/// radius `max_shift`. The window grows by `max_shift`.
pub fn perturb(lattice: &PointSet, max_shift: f64, seed: u64) -> Result<PointSet> {
    perturb_with_shifts(lattice, max_shift, seed).map(|(p, _)| p)
}

/// [`perturb`], also returning the realized shifts `new - old`.
pub fn perturb_with_shifts(lattice: &PointSet, max_shift: f64, seed: u64) -> Result<(PointSet, Vec<Complex>)> {
    if !(max_shift.is_finite() && max_shift >= 0.0) {
        return Err(FockError::invalid(
            "max_shift",
            format!("must be nonnegative, got {max_shift}"),
        ));
    }
    let index = lattice.lattice_index().ok_or(FockError::MissingLatticeIndex)?;
    if max_shift == 0.0 {
        return Ok((lattice.clone(), vec![Complex::new(0.0, 0.0); lattice.len()]));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(lattice.len());
    let mut shifts = Vec::with_capacity(lattice.len());
    for &z in lattice.points() {
        let u: f64 = rng.random();
        let v: f64 = rng.random();
        let mut r = max_shift * u.sqrt();
        let theta = 2.0 * PI * v;
        // keep the realized displacement within max_shift after rounding
        let w = loop {
            let w = z + Complex::from_polar(r, theta);
            if (w - z).norm() <= max_shift {
                break w;
            }
            r *= 1.0 - 4.0 * f64::EPSILON;
        };
        points.push(w);
        shifts.push(w - z);
    }
    let mut keys: Vec<(u64, u64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, z)| ((z.re + 0.0).to_bits(), (z.im + 0.0).to_bits(), i))
        .collect();
    keys.sort_unstable();
    if let Some(w) = keys.windows(2).find(|w| w[0].0 == w[1].0 && w[0].1 == w[1].1) {
        let (i, j) = (w[0].2.min(w[1].2), w[0].2.max(w[1].2));
        return Err(FockError::CollisionAfterPerturbation(i, j));
    }
    let set = PointSet::with_index(points, index.to_vec(), lattice.window_radius() + max_shift)?;
    Ok((set, shifts))
}

/// Minimum pairwise distance `q`.
pub fn separation(gamma: &PointSet) -> Result<f64> {
    let pts = gamma.points();
    if pts.len() < 2 {
        return Err(FockError::TooFewPoints(pts.len()));
    }
    let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for z in pts {
        lo_x = lo_x.min(z.re);
        hi_x = hi_x.max(z.re);
        lo_y = lo_y.min(z.im);
        hi_y = hi_y.max(z.im);
    }
    let (wx, wy) = (hi_x - lo_x, hi_y - lo_y);
    let n = pts.len() as f64;
    let mut h = if wx > 0.0 && wy > 0.0 {
        (wx * wy / n).sqrt()
    } else {
        wx.max(wy) / n
    };
    loop {
        let grid = SpatialGrid::new(pts, h);
        let d2 = grid.min_neighbor_dist2();
        if d2 <= h * h {
            return Ok(d2.sqrt());
        }
        // no pair closer than h: every pair within the best candidate
        // distance is seen once the cells are that large
        h = if d2.is_finite() {
            d2.sqrt() * (1.0 + 1e-9)
        } else {
            2.0 * h
        };
    }
}

/// Uniform-closeness matching against a square lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Closeness {
    /// `max_j |z_j - lambda_{k(j)}|`.
    pub q: f64,
    /// Lattice index assigned to each point.
    pub matching: Vec<(i64, i64)>,
}

/// Assign each point the index of its nearest lattice point; the assignment
/// must be injective.
pub fn closeness(gamma: &PointSet, lattice: &SquareLattice) -> Result<Closeness> {
    let mut seen = HashMap::with_capacity(gamma.len());
    let mut q: f64 = 0.0;
    let mut matching = Vec::with_capacity(gamma.len());
    for &z in gamma.points() {
        let k = lattice.nearest_index(z);
        if seen.insert(k, ()).is_some() {
            return Err(FockError::NotUniformlyClose(k.0, k.1));
        }
        q = q.max((z - lattice.point(k.0, k.1)).norm());
        matching.push(k);
    }
    Ok(Closeness { q, matching })
}

/// Extremal counts `n^-(r), n^+(r)` over translates of the half-open square
/// `[0, r)^2` inside the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub n_minus: usize,
    pub n_plus: usize,
}

/// Side of the scanned region: translates live in `[-L, L - r]^2` with
/// `L = window / sqrt 2`, the largest square inside the window disk.
fn scan_half_side(window_radius: f64) -> f64 {
    window_radius / SQRT_2
}

/// Snap `v` onto the nearest entry of the sorted `values` within `eps`.
fn snap(v: f64, values: &[f64], eps: f64) -> f64 {
    let i = values.partition_point(|&x| x < v);
    let mut best = v;
    let mut gap = eps;
    for j in [i.wrapping_sub(1), i] {
        if let Some(&x) = values.get(j) {
            let d = (x - v).abs();
            if d <= gap {
                gap = d;
                best = x;
            }
        }
    }
    best
}

/// Exact extremal counts of points in translates `t + [0, r)^2` that fit in
/// the window's inscribed square.
///
/// The count is piecewise constant in `t`; it only changes where a square
/// edge crosses a point coordinate, so scanning those event coordinates gives
/// the exact extrema. Event coordinates `x - r` that agree with a point
/// coordinate to within a relative `1e-12` are treated as coincident, so
/// lattices generated in floating point count like the exact lattice.
/// `translate_step` is validated but not needed by the exact scan.
pub fn counts(gamma: &PointSet, r: f64, translate_step: f64) -> Result<Counts> {
    if !(r.is_finite() && r > 0.0) {
        return Err(FockError::invalid("r", format!("must be positive, got {r}")));
    }
    if !(translate_step.is_finite() && translate_step > 0.0) {
        return Err(FockError::invalid("translate_step", "must be positive"));
    }
    let l = scan_half_side(gamma.window_radius());
    if r > 2.0 * l {
        return Err(FockError::WindowTooSmall {
            r,
            window: gamma.window_radius(),
        });
    }
    let (a, b) = (-l, l - r);
    let eps = 1e-12 * (gamma.window_radius() + r).max(1.0);

    let mut pts: Vec<Complex> = gamma.points().to_vec();
    pts.sort_by(|p, q| p.re.total_cmp(&q.re));
    let mut xs: Vec<f64> = pts.iter().map(|z| z.re).collect();
    let mut ys: Vec<f64> = pts.iter().map(|z| z.im).collect();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let x_sorted = xs.clone();
    xs.dedup();
    // point j lies in the slab of tx iff lo_x[j] < tx <= x_j
    let lo_x: Vec<f64> = pts.iter().map(|z| snap(z.re - r, &xs, eps)).collect();
    let lo_y: Vec<f64> = pts.iter().map(|z| snap(z.im - r, &ys, eps)).collect();

    let mut tx: Vec<f64> = vec![a, b];
    for j in 0..pts.len() {
        for v in [pts[j].re, lo_x[j]] {
            if v > a && v < b {
                tx.push(v);
            }
        }
    }
    tx.sort_by(f64::total_cmp);
    tx.dedup();

    let (n_minus, n_plus) = tx
        .par_iter()
        .map(|&t| {
            let start = x_sorted.partition_point(|&x| x < t);
            let end = x_sorted.partition_point(|&x| x < t + r + 2.0 * eps);
            let mut y_hi = Vec::new();
            let mut y_lo = Vec::new();
            for j in start..end {
                if lo_x[j] < t {
                    y_hi.push(pts[j].im);
                    y_lo.push(lo_y[j]);
                }
            }
            let mut ty: Vec<f64> = vec![a, b];
            ty.extend(y_hi.iter().chain(&y_lo).copied().filter(|&v| v > a && v < b));
            ty.sort_by(f64::total_cmp);
            ty.dedup();
            y_hi.sort_by(f64::total_cmp);
            y_lo.sort_by(f64::total_cmp);
            let mut mn = usize::MAX;
            let mut mx = 0;
            for &u in &ty {
                let c =
                    (y_hi.len() - y_hi.partition_point(|&y| y < u)) - (y_lo.len() - y_lo.partition_point(|&y| y < u));
                mn = mn.min(c);
                mx = mx.max(c);
            }
            (mn, mx)
        })
        .reduce(|| (usize::MAX, 0), |p, q| (p.0.min(q.0), p.1.max(q.1)));
    Ok(Counts { n_minus, n_plus })
}

/// Uniform-density estimate with the full `(r, n^-, n^+)` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub radii: Vec<f64>,
    pub n_minus: Vec<usize>,
    pub n_plus: Vec<usize>,
    pub reliable: Vec<bool>,
    pub d_minus_estimate: f64,
    pub d_plus_estimate: f64,
}

/// Estimate `D^-` and `D^+` from the largest third of the radii whose
/// translates fit in the window.
///
/// Radii that do not fit are flagged unreliable with zero counts. With no
/// reliable radius both estimates are 0.
pub fn density_estimate(gamma: &PointSet, radii: &[f64], translate_step: f64) -> Result<DensityReport> {
    if radii.is_empty() {
        return Err(FockError::invalid("radii", "empty"));
    }
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(FockError::invalid("radii", "must be positive"));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FockError::invalid("radii", "must be strictly increasing"));
    }
    let mut report = DensityReport {
        radii: radii.to_vec(),
        n_minus: Vec::with_capacity(radii.len()),
        n_plus: Vec::with_capacity(radii.len()),
        reliable: Vec::with_capacity(radii.len()),
        d_minus_estimate: 0.0,
        d_plus_estimate: 0.0,
    };
    for &r in radii {
        match counts(gamma, r, translate_step) {
            Ok(c) => {
                report.n_minus.push(c.n_minus);
                report.n_plus.push(c.n_plus);
                report.reliable.push(true);
            }
            Err(FockError::WindowTooSmall { .. }) => {
                report.n_minus.push(0);
                report.n_plus.push(0);
                report.reliable.push(false);
            }
            Err(e) => return Err(e),
        }
    }
    let good: Vec<usize> = (0..radii.len()).filter(|&i| report.reliable[i]).collect();
    if !good.is_empty() {
        let take = good.len().div_ceil(3);
        let tail = &good[good.len() - take..];
        report.d_minus_estimate = tail
            .iter()
            .map(|&i| report.n_minus[i] as f64 / (radii[i] * radii[i]))
            .fold(f64::INFINITY, f64::min);
        report.d_plus_estimate = tail
            .iter()
            .map(|&i| report.n_plus[i] as f64 / (radii[i] * radii[i]))
            .fold(0.0, f64::max);
    }
    Ok(report)
}

/// Brute-force counts on the translate grid `-L + k * step`; the extrema
/// bracket the exact ones from inside.
pub fn grid_counts(gamma: &PointSet, r: f64, translate_step: f64) -> Result<Counts> {
    let l = scan_half_side(gamma.window_radius());
    if r > 2.0 * l {
        return Err(FockError::WindowTooSmall {
            r,
            window: gamma.window_radius(),
        });
    }
    let steps = ((2.0 * l - r) / translate_step).floor() as i64;
    let mut out = Counts {
        n_minus: usize::MAX,
        n_plus: 0,
    };
    for i in 0..=steps {
        let tx = -l + i as f64 * translate_step;
        for j in 0..=steps {
            let ty = -l + j as f64 * translate_step;
            let c = gamma
                .points()
                .iter()
                .filter(|z| tx <= z.re && z.re < tx + r && ty <= z.im && z.im < ty + r)
                .count();
            out.n_minus = out.n_minus.min(c);
            out.n_plus = out.n_plus.max(c);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn lattice_examples() {
        let l = square_lattice(1.0, 1.5).unwrap();
        assert_eq!(l.len(), 9);
        assert_eq!(l.points()[0], c(0.0, 0.0));
        let o = square_lattice(1.0, 0.0).unwrap();
        assert_eq!(o.points(), &[c(0.0, 0.0)]);
        assert!(matches!(square_lattice(1.0, -1.0), Err(FockError::EmptyWindow(_))));
        assert!(square_lattice(0.0, 1.0).is_err());
    }

    #[test]
    fn root_pi_lattice_count() {
        // independent count of pi (m^2 + n^2) <= 100
        let mut brute = 0;
        for m in -10i64..=10 {
            for n in -10i64..=10 {
                if PI * ((m * m + n * n) as f64) <= 100.0 {
                    brute += 1;
                }
            }
        }
        assert_eq!(brute, 97);
        assert_eq!(square_lattice(PI.sqrt(), 10.0).unwrap().len(), brute);
    }

    #[test]
    fn scaled_lattices() {
        let pi = FockParameter::new(PI).unwrap();
        let one = FockParameter::new(1.0).unwrap();
        assert!((SquareLattice::with_density_ratio(pi, 1.0).unwrap().spacing() - 1.0).abs() < 1e-15);
        assert!((SquareLattice::with_density_ratio(pi, 4.0).unwrap().spacing() - 0.5).abs() < 1e-15);
        let l = SquareLattice::with_density_ratio(one, 1.2).unwrap();
        assert!((l.spacing() - 1.618_021_593_796_416).abs() < 1e-12);
        assert!((l.density() - 1.2 / PI).abs() < 1e-15);
        assert!((l.density() * l.spacing() * l.spacing() - 1.0).abs() <= 1e-15);
        let set = scale_lattice_to_density(one, 1.2, 8.0).unwrap();
        assert_eq!(
            set.points()[1],
            l.point(set.lattice_index().unwrap()[1].0, set.lattice_index().unwrap()[1].1)
        );
    }

    #[test]
    fn separation_examples() {
        assert_eq!(separation(&square_lattice(1.0, 5.0).unwrap()).unwrap(), 1.0);
        let s = PointSet::new(vec![c(0.0, 0.0), c(3.0, 0.0), c(3.0, 4.0)], 5.0).unwrap();
        assert_eq!(separation(&s).unwrap(), 3.0);
        let one = PointSet::new(vec![c(0.0, 0.0)], 1.0).unwrap();
        assert!(matches!(separation(&one), Err(FockError::TooFewPoints(1))));
        // collinear input
        let line = PointSet::new((0..50).map(|k| c(k as f64 * 0.1, 0.0)).collect(), 5.0).unwrap();
        assert!((separation(&line).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn separation_of_perturbed_matches_brute_force() {
        let p = perturb(&square_lattice(1.0, 25.0).unwrap(), 0.2, 3).unwrap();
        assert!(p.len() <= 2000);
        let pts = p.points();
        let mut brute = f64::INFINITY;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                brute = brute.min((pts[i] - pts[j]).norm());
            }
        }
        let q = separation(&p).unwrap();
        assert!((q - brute).abs() < 1e-15);
        assert!((0.6..=1.4).contains(&q));
    }

    #[test]
    fn perturb_contract() {
        let l = square_lattice(1.0, 6.0).unwrap();
        assert_eq!(perturb(&l, 0.0, 9).unwrap(), l);
        let a = perturb(&l, 0.2, 42).unwrap();
        let b = perturb(&l, 0.2, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.lattice_index(), l.lattice_index());
        let cl = closeness(&a, &SquareLattice::new(1.0).unwrap()).unwrap();
        assert!(cl.q <= 0.2);
        let bare = PointSet::new(vec![c(0.0, 0.0)], 1.0).unwrap();
        assert!(matches!(perturb(&bare, 0.1, 1), Err(FockError::MissingLatticeIndex)));
    }

    #[test]
    fn closeness_examples() {
        let lat = SquareLattice::new(1.0).unwrap();
        let l = square_lattice(1.0, 4.0).unwrap();
        let cl = closeness(&l, &lat).unwrap();
        assert_eq!(cl.q, 0.0);
        assert_eq!(cl.matching.as_slice(), l.lattice_index().unwrap());

        let shifted = PointSet::new(l.points().iter().map(|z| z + 0.1).collect(), 4.2).unwrap();
        assert!((closeness(&shifted, &lat).unwrap().q - 0.1).abs() < 1e-15);

        let (p, shifts) = perturb_with_shifts(&l, 0.3, 5).unwrap();
        let cl = closeness(&p, &lat).unwrap();
        let max_shift = shifts.iter().map(|s| s.norm()).fold(0.0, f64::max);
        assert!((cl.q - max_shift).abs() <= 1e-15);
        assert_eq!(cl.matching.as_slice(), l.lattice_index().unwrap());

        let clash = PointSet::new(vec![c(0.1, 0.0), c(-0.1, 0.0)], 1.0).unwrap();
        assert!(matches!(
            closeness(&clash, &lat),
            Err(FockError::NotUniformlyClose(0, 0))
        ));
    }

    #[test]
    fn counts_examples() {
        let l = square_lattice(1.0, 10.0).unwrap();
        assert_eq!(counts(&l, 2.5, 0.5).unwrap(), Counts { n_minus: 4, n_plus: 9 });
        assert_eq!(counts(&l, 1.0, 0.5).unwrap(), Counts { n_minus: 1, n_plus: 1 });
        let o = PointSet::new(vec![c(0.0, 0.0)], 5.0).unwrap();
        assert_eq!(counts(&o, 0.5, 0.1).unwrap().n_minus, 0);
        assert_eq!(counts(&o, 0.5, 0.1).unwrap().n_plus, 1);
        assert!(matches!(counts(&l, 15.0, 0.5), Err(FockError::WindowTooSmall { .. })));
    }

    #[test]
    fn counts_match_grid_oracle() {
        let l = square_lattice(1.0, 6.0).unwrap();
        for r in [1.0, 1.5, 2.5, 3.2] {
            let exact = counts(&l, r, 0.5).unwrap();
            // a 0.05 grid hits every count cell of the unit lattice for these r
            let grid = grid_counts(&l, r, 0.05).unwrap();
            assert_eq!(exact, grid, "r = {r}");
        }
        let p = perturb(&square_lattice(1.0, 5.0).unwrap(), 0.25, 11).unwrap();
        for r in [1.3, 2.2] {
            let exact = counts(&p, r, 0.5).unwrap();
            let grid = grid_counts(&p, r, 0.02).unwrap();
            assert!(exact.n_minus <= grid.n_minus && grid.n_plus <= exact.n_plus);
        }
    }

    #[test]
    fn density_examples() {
        let radii: Vec<f64> = (5..=15).map(f64::from).collect();
        let rep = density_estimate(&square_lattice(1.0, 40.0).unwrap(), &radii, 0.5).unwrap();
        assert!((0.9..=1.1).contains(&rep.d_minus_estimate));
        assert!((0.9..=1.1).contains(&rep.d_plus_estimate));
        assert!(rep.reliable.iter().all(|&r| r));

        let one = FockParameter::new(1.0).unwrap();
        let lat = SquareLattice::with_density_ratio(one, 1.2).unwrap();
        let radii: Vec<f64> = (5..=15).map(|k| k as f64 * lat.spacing()).collect();
        let rep = density_estimate(&scale_lattice_to_density(one, 1.2, 40.0).unwrap(), &radii, 0.5).unwrap();
        let target = 1.2 / PI;
        assert!((rep.d_minus_estimate / target - 1.0).abs() < 0.05);
        assert!((rep.d_plus_estimate / target - 1.0).abs() < 0.05);

        let base = square_lattice(1.0, 30.0).unwrap();
        let offset: Vec<Complex> = base
            .points()
            .iter()
            .map(|z| z + c(0.5, 0.5))
            .filter(|z| z.norm() <= 30.0)
            .collect();
        let both = base.with_points(&offset).unwrap();
        let radii: Vec<f64> = (5..=15).map(f64::from).collect();
        let rep = density_estimate(&both, &radii, 0.25).unwrap();
        assert!((rep.d_minus_estimate / 2.0 - 1.0).abs() < 0.05);
        assert!((rep.d_plus_estimate / 2.0 - 1.0).abs() < 0.05);
    }

    #[test]
    fn unreliable_radii_are_flagged() {
        let rep = density_estimate(&square_lattice(1.0, 5.0).unwrap(), &[2.0, 3.0, 8.0], 0.5).unwrap();
        assert_eq!(rep.reliable, vec![true, true, false]);
        assert_eq!(rep.d_minus_estimate, 1.0);
        assert_eq!(rep.d_plus_estimate, 1.0);
    }
}
