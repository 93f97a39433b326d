//! Uniform-grid spatial index for planar points.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::complex::Complex;

/// Points bucketed into square cells of side `h` (compressed-row layout).
#[derive(Debug, Clone)]
pub struct SpatialGrid {
    h: f64,
    origin: (f64, f64),
    points: Vec<Complex>,
    /// point indices grouped by cell
    order: Vec<u32>,
    cells: HashMap<(i64, i64), (u32, u32)>,
    /// inclusive cell-coordinate bounds
    extent: ((i64, i64), (i64, i64)),
}

impl SpatialGrid {
    pub fn new(points: &[Complex], h: f64) -> Self {
        assert!(h > 0.0 && h.is_finite(), "cell size must be positive");
        assert!(!points.is_empty(), "spatial grid needs at least one point");
        let min_x = points.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        let min_y = points.iter().map(|z| z.im).fold(f64::INFINITY, f64::min);
        let origin = (min_x, min_y);
        let key = |z: &Complex| {
            (
                ((z.re - origin.0) / h).floor() as i64,
                ((z.im - origin.1) / h).floor() as i64,
            )
        };
        let keys: Vec<(i64, i64)> = points.iter().map(key).collect();
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        order.sort_unstable_by_key(|&i| (keys[i as usize], i));
        let mut cells = HashMap::new();
        let mut start = 0usize;
        while start < order.len() {
            let k = keys[order[start] as usize];
            let mut end = start + 1;
            while end < order.len() && keys[order[end] as usize] == k {
                end += 1;
            }
            cells.insert(k, (start as u32, end as u32));
            start = end;
        }
        let max_kx = keys.iter().map(|k| k.0).max().unwrap_or(0);
        let max_ky = keys.iter().map(|k| k.1).max().unwrap_or(0);
        SpatialGrid {
            h,
            origin,
            points: points.to_vec(),
            order,
            cells,
            extent: ((0, 0), (max_kx, max_ky)),
        }
    }

    pub fn cell_size(&self) -> f64 {
        self.h
    }

    fn key(&self, z: Complex) -> (i64, i64) {
        (
            ((z.re - self.origin.0) / self.h).floor() as i64,
            ((z.im - self.origin.1) / self.h).floor() as i64,
        )
    }

    fn cell(&self, k: (i64, i64)) -> &[u32] {
        match self.cells.get(&k) {
            Some(&(a, b)) => &self.order[a as usize..b as usize],
            None => &[],
        }
    }

    /// Smallest squared distance between a point and any other point in its
    /// own or an adjacent cell. Every pair closer than `h` is inspected.
    pub fn min_neighbor_dist2(&self) -> f64 {
        (0..self.points.len())
            .into_par_iter()
            .map(|i| {
                let z = self.points[i];
                let (kx, ky) = self.key(z);
                let mut best = f64::INFINITY;
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        for &j in self.cell((kx + dx, ky + dy)) {
                            if j as usize != i {
                                let w = self.points[j as usize] - z;
                                best = best.min(w.re * w.re + w.im * w.im);
                            }
                        }
                    }
                }
                best
            })
            .reduce(|| f64::INFINITY, f64::min)
    }

    /// Exact distance from `z` to the nearest indexed point, with its index.
    pub fn nearest(&self, z: Complex) -> (f64, usize) {
        let (kx, ky) = self.key(z);
        let ((x0, y0), (x1, y1)) = self.extent;
        let k_max = [kx - x0, x1 - kx, ky - y0, y1 - ky]
            .into_iter()
            .map(i64::abs)
            .max()
            .unwrap_or(0)
            + 1;
        let mut best = (f64::INFINITY, usize::MAX);
        let visit = |cx: i64, cy: i64, best: &mut (f64, usize)| {
            for &j in self.cell((cx, cy)) {
                let w = self.points[j as usize] - z;
                let d2 = w.re * w.re + w.im * w.im;
                if d2 < best.0 || (d2 == best.0 && (j as usize) < best.1) {
                    *best = (d2, j as usize);
                }
            }
        };
        for k in 0..=k_max {
            if k == 0 {
                visit(kx, ky, &mut best);
            } else {
                for d in -k..=k {
                    visit(kx + d, ky - k, &mut best);
                    visit(kx + d, ky + k, &mut best);
                }
                for d in (-k + 1)..k {
                    visit(kx - k, ky + d, &mut best);
                    visit(kx + k, ky + d, &mut best);
                }
            }
            // points in ring k+1 lie at least k*h away
            let reach = k as f64 * self.h;
            if best.1 != usize::MAX && reach * reach > best.0 {
                break;
            }
        }
        (best.0.sqrt(), best.1)
    }
}
