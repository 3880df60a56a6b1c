//! Grid scans over `(tau1, tau2)`, negative-region masks and minimum refinement.

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::closed_form;
use crate::error::{Error, Result};
use crate::fock::{self, CVector, FockSpace, InitialState};
use crate::model::{Context, ModelParams, OscillatorInit, QuasiResult, SignPair};

/// Cells count as negative below this value; exact zeros pick up rounding noise.
pub const NEGATIVE_THRESHOLD: f64 = -1e-12;
pub const DEFAULT_RESOLUTION: usize = 401;
/// Largest grid the Fock engine will scan.
pub const ORACLE_MAX_RESOLUTION: usize = 101;
/// Refinement stops once a full sweep improves the value by less than this.
pub const REFINE_TOLERANCE: f64 = 1e-12;
const MAX_SWEEPS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Closed,
    Oracle,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Closed => "closed",
            Engine::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanWindow {
    pub lo: f64,
    pub hi: f64,
    pub resolution: usize,
}

impl Default for ScanWindow {
    fn default() -> Self {
        ScanWindow { lo: 0.0, hi: 4.0 * std::f64::consts::PI, resolution: DEFAULT_RESOLUTION }
    }
}

impl ScanWindow {
    pub fn new(lo: f64, hi: f64, resolution: usize) -> Self {
        ScanWindow { lo, hi, resolution }
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 {
            return Err(Error::InvalidResolution(self.resolution));
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi && self.lo >= 0.0) {
            return Err(Error::InvalidWindow);
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.resolution - 1) as f64
    }

    /// Equally spaced sample times, endpoints included.
    pub fn axis(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.resolution)
            .map(|i| if i + 1 == self.resolution { self.hi } else { self.lo + h * i as f64 })
            .collect()
    }
}

/// Everything needed to re-evaluate cells of a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanMeta {
    pub params: ModelParams,
    pub init: OscillatorInit,
    pub engine: Engine,
    pub window: ScanWindow,
}

/// Quasiprobabilities on the upper triangle `tau1 <= tau2`.
///
/// Rows index `tau1`, columns index `tau2`; cells below the diagonal are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    pub tau1_axis: Vec<f64>,
    pub tau2_axis: Vec<f64>,
    pub cells: Vec<Option<[f64; 4]>>,
    pub meta: ScanMeta,
}

impl ScanGrid {
    pub fn resolution(&self) -> usize {
        self.tau1_axis.len()
    }

    pub fn cell(&self, row: usize, col: usize) -> Option<[f64; 4]> {
        self.cells[row * self.resolution() + col]
    }

    pub fn value(&self, row: usize, col: usize, pair: SignPair) -> Option<f64> {
        self.cell(row, col).map(|q| q[pair.index()])
    }

    /// Populated cells as `(row, col, q)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, [f64; 4])> + '_ {
        let n = self.resolution();
        self.cells.iter().enumerate().filter_map(move |(i, c)| c.map(|q| (i / n, i % n, q)))
    }
}

/// Evaluates every cell of the upper triangle.
///
/// `workers` sets the thread count (`None` uses the global rayon pool);
/// results do not depend on it.
pub fn grid_scan(
    params: &ModelParams,
    init: &OscillatorInit,
    window: ScanWindow,
    engine: Engine,
    workers: Option<usize>,
) -> Result<ScanGrid> {
    window.validate()?;
    let ctx = match engine {
        Engine::Closed => Context::ClosedForm,
        Engine::Oracle => Context::Oracle,
    };
    let params = params.validate(ctx)?;
    init.validate()?;
    if engine == Engine::Oracle && window.resolution > ORACLE_MAX_RESOLUTION {
        return Err(Error::EngineUnavailable(format!(
            "oracle scans are limited to resolution {ORACLE_MAX_RESOLUTION} (got {})",
            window.resolution
        )));
    }
    let taus = window.axis();
    let run = || match engine {
        Engine::Closed => closed_cells(&taus, &params, init),
        Engine::Oracle => oracle_cells(&taus, &params, init),
    };
    let cells = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::EngineUnavailable(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    Ok(ScanGrid {
        tau1_axis: taus.clone(),
        tau2_axis: taus,
        cells,
        meta: ScanMeta { params, init: *init, engine, window },
    })
}

fn closed_cells(taus: &[f64], params: &ModelParams, init: &OscillatorInit) -> Result<Vec<Option<[f64; 4]>>> {
    let n = taus.len();
    let rows: Vec<Vec<Option<[f64; 4]>>> = (0..n)
        .into_par_iter()
        .map(|row| {
            (0..n)
                .map(|col| {
                    if col < row {
                        return Ok(None);
                    }
                    closed_form::quasiprob(taus[row], taus[col], params, init).map(|r| Some(r.q))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Heisenberg images `Q(tau) psi` for every sample time and mixture component,
/// contracted into the moments of each cell.
fn oracle_cells(taus: &[f64], params: &ModelParams, init: &OscillatorInit) -> Result<Vec<Option<[f64; 4]>>> {
    let (space, state) = fock::build_adaptive(params, init, fock::DEFAULT_TOL_TRUNCATION)?;
    let axis = space.params().measurement_axis();
    let images: Vec<Vec<CVector>> = taus
        .par_iter()
        .map(|&t| state.components.iter().map(|(_, psi)| space.apply_heisenberg(t, &axis, psi)).collect())
        .collect();
    let expect: Vec<f64> = images
        .iter()
        .map(|img| state.components.iter().zip(img).map(|((p, psi), a)| p * psi.dotc(a).re).sum())
        .collect();
    let n = taus.len();
    let rows: Vec<Vec<Option<[f64; 4]>>> = (0..n)
        .into_par_iter()
        .map(|row| {
            (0..n)
                .map(|col| {
                    if col < row {
                        return None;
                    }
                    let corr: f64 = state
                        .components
                        .iter()
                        .enumerate()
                        .map(|(k, (p, _))| p * images[col][k].dotc(&images[row][k]).re)
                        .sum();
                    Some(QuasiResult::from_moments(taus[row], taus[col], expect[row], expect[col], corr).q)
                })
                .collect()
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// A 4-connected set of negative cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub size: usize,
    /// `(row_min, row_max, col_min, col_max)`.
    pub bbox: (usize, usize, usize, usize),
    pub min_value: f64,
    /// Lowest cell; ties resolve to the smallest `(row, col)`.
    pub min_cell: (usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    pub pair: SignPair,
    pub resolution: usize,
    /// Row-major flags for `q < NEGATIVE_THRESHOLD`.
    pub mask: Vec<bool>,
    /// Components in order of their first cell in row-major order.
    pub components: Vec<Component>,
}

impl RegionMask {
    pub fn negative_cells(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_negative(&self, row: usize, col: usize) -> bool {
        self.mask[row * self.resolution + col]
    }
}

/// Negative cells of one sign pair and their connected components.
pub fn region_mask(grid: &ScanGrid, pair: SignPair) -> RegionMask {
    let n = grid.resolution();
    let value = |i: usize| grid.cells[i].map(|q| q[pair.index()]);
    let mask: Vec<bool> = (0..n * n).map(|i| value(i).is_some_and(|v| v < NEGATIVE_THRESHOLD)).collect();
    let mut seen = vec![false; n * n];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n * n {
        if !mask[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let (r0, c0) = (start / n, start % n);
        let mut comp = Component {
            size: 0,
            bbox: (r0, r0, c0, c0),
            min_value: f64::INFINITY,
            min_cell: (r0, c0),
        };
        while let Some(i) = queue.pop_front() {
            let (r, c) = (i / n, i % n);
            let v = value(i).expect("masked cells are populated");
            comp.size += 1;
            comp.bbox = (comp.bbox.0.min(r), comp.bbox.1.max(r), comp.bbox.2.min(c), comp.bbox.3.max(c));
            if v < comp.min_value || (v == comp.min_value && (r, c) < comp.min_cell) {
                comp.min_value = v;
                comp.min_cell = (r, c);
            }
            let mut visit = |j: usize| {
                if mask[j] && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            };
            if r > 0 {
                visit(i - n);
            }
            if r + 1 < n {
                visit(i + n);
            }
            if c > 0 {
                visit(i - 1);
            }
            if c + 1 < n {
                visit(i + 1);
            }
        }
        components.push(comp);
    }
    RegionMask { pair, resolution: n, mask, components }
}

/// Lowest populated cell for `pair` as `(row, col, value)`; ties go to the
/// smallest `(row, col)`.
pub fn global_min_cell(grid: &ScanGrid, pair: SignPair) -> Option<(usize, usize, f64)> {
    grid.iter()
        .map(|(r, c, q)| (r, c, q[pair.index()]))
        .fold(None, |best, cur| match best {
            Some(b) if b.2 <= cur.2 => Some(b),
            _ => Some(cur),
        })
}

/// Populated 8-neighbours of a cell.
fn neighbours(grid: &ScanGrid, row: usize, col: usize) -> Vec<(usize, usize)> {
    let n = grid.resolution() as isize;
    let mut out = Vec::with_capacity(8);
    for dr in -1..=1isize {
        for dc in -1..=1isize {
            let (r, c) = (row as isize + dr, col as isize + dc);
            if (dr, dc) == (0, 0) || r < 0 || c < 0 || r >= n || c >= n {
                continue;
            }
            if grid.cell(r as usize, c as usize).is_some() {
                out.push((r as usize, c as usize));
            }
        }
    }
    out
}

pub fn is_local_min(grid: &ScanGrid, pair: SignPair, row: usize, col: usize) -> bool {
    let Some(v) = grid.value(row, col, pair) else {
        return false;
    };
    neighbours(grid, row, col)
        .into_iter()
        .all(|(r, c)| grid.value(r, c, pair).is_some_and(|w| v <= w))
}

/// Steepest descent over 8-neighbours from the populated cell nearest to
/// `(tau1, tau2)`.
pub fn local_min_near(grid: &ScanGrid, pair: SignPair, tau1: f64, tau2: f64) -> Option<(usize, usize)> {
    let nearest = |axis: &[f64], t: f64| {
        axis.iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(i, _)| i)
    };
    let mut row = nearest(&grid.tau1_axis, tau1)?;
    let mut col = nearest(&grid.tau2_axis, tau2)?.max(row);
    loop {
        let v = grid.value(row, col, pair)?;
        let best = neighbours(grid, row, col)
            .into_iter()
            .filter_map(|(r, c)| grid.value(r, c, pair).map(|w| (r, c, w)))
            .filter(|&(_, _, w)| w < v)
            .min_by(|a, b| a.2.total_cmp(&b.2).then((a.0, a.1).cmp(&(b.0, b.1))));
        match best {
            Some((r, c, _)) => (row, col) = (r, c),
            None => return Some((row, col)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinedMinimum {
    pub tau1: f64,
    pub tau2: f64,
    pub value: f64,
    pub sweeps: usize,
}

/// Refines a grid minimum with the engine recorded in the scan.
pub fn refine_minimum(grid: &ScanGrid, pair: SignPair, seed: (usize, usize)) -> Result<RefinedMinimum> {
    let meta = &grid.meta;
    match meta.engine {
        Engine::Closed => {
            let f = |t1: f64, t2: f64| {
                closed_form::quasiprob(t1, t2, &meta.params, &meta.init).map(|r| r.get(pair)).unwrap_or(f64::INFINITY)
            };
            refine_minimum_with(grid, pair, seed, f)
        }
        Engine::Oracle => {
            let (space, state) = fock::build_adaptive(&meta.params, &meta.init, fock::DEFAULT_TOL_TRUNCATION)?;
            let f = oracle_fn(&space, &state, pair);
            refine_minimum_with(grid, pair, seed, f)
        }
    }
}

fn oracle_fn<'a>(space: &'a FockSpace, state: &'a InitialState, pair: SignPair) -> impl Fn(f64, f64) -> f64 + 'a {
    let axis = space.params().measurement_axis();
    move |t1, t2| {
        space.quasiprob_oracle(state, t1, t2, &axis).map(|r| r.get(pair)).unwrap_or(f64::INFINITY)
    }
}

/// Coordinate descent with Brent line searches, seeded at a grid local
/// minimum and kept inside the window and the ordering `tau1 <= tau2`.
pub fn refine_minimum_with<F: Fn(f64, f64) -> f64>(
    grid: &ScanGrid,
    pair: SignPair,
    seed: (usize, usize),
    f: F,
) -> Result<RefinedMinimum> {
    let (row, col) = seed;
    if !is_local_min(grid, pair, row, col) {
        return Err(Error::NotALocalMin { row, col });
    }
    let window = grid.meta.window;
    let step = window.step();
    let (mut t1, mut t2) = (grid.tau1_axis[row], grid.tau2_axis[col]);
    let mut value = f(t1, t2);
    let mut reach = step;
    for sweep in 1..=MAX_SWEEPS {
        let before = (t1, t2, value);

        let (lo, hi) = ((t1 - reach).max(window.lo), (t1 + reach).min(t2));
        if hi > lo {
            let (x, fx) = brent_min(|x| f(x, t2), lo, hi);
            if fx < value {
                (t1, value) = (x, fx);
            }
        }
        let (lo, hi) = ((t2 - reach).max(t1), (t2 + reach).min(window.hi));
        if hi > lo {
            let (x, fx) = brent_min(|x| f(t1, x), lo, hi);
            if fx < value {
                (t2, value) = (x, fx);
            }
        }

        let moved = (t1 - before.0).abs().max((t2 - before.1).abs());
        if before.2 - value < REFINE_TOLERANCE {
            return Ok(RefinedMinimum { tau1: t1, tau2: t2, value, sweeps: sweep });
        }
        reach = (4.0 * moved).clamp(1e-6, step);
    }
    Err(Error::NotALocalMin { row, col })
}

/// Brent's parabolic-interpolation minimizer on `[a, b]`.
fn brent_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    const GOLD: f64 = 0.381_966_011_250_105_1;
    const REL_TOL: f64 = 1e-9;
    let mut x = a + GOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let tol1 = REL_TOL * x.abs() + 1e-12;
        let tol2 = 2.0 * tol1;
        if (x - mid).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            if p.abs() < (0.5 * q * e).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                golden = false;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < mid { tol1 } else { -tol1 };
                }
            }
        }
        if golden {
            e = if x < mid { b - x } else { a - x };
            d = GOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            (v, fv, w, fw, x, fx) = (w, fw, x, fx, u, fu);
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                (v, fv, w, fw) = (w, fw, u, fu);
            } else if fu <= fv || v == x || v == w {
                (v, fv) = (u, fu);
            }
        }
    }
    (x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Sign::{Minus, Plus};

    /// Synthetic grid `q_pm = (t1 - 1)^2 + (t2 - 2)^2 - 1` on `[0, 3]`.
    fn bowl(n: usize) -> ScanGrid {
        let window = ScanWindow::new(0.0, 3.0, n);
        let taus = window.axis();
        let mut cells = vec![None; n * n];
        for r in 0..n {
            for c in r..n {
                let v = (taus[r] - 1.0).powi(2) + (taus[c] - 2.0).powi(2) - 1.0;
                cells[r * n + c] = Some([1.0, v, 1.0, 1.0]);
            }
        }
        ScanGrid {
            tau1_axis: taus.clone(),
            tau2_axis: taus,
            cells,
            meta: ScanMeta {
                params: ModelParams::new(0.0),
                init: OscillatorInit::Ground,
                engine: Engine::Closed,
                window,
            },
        }
    }

    const PM: SignPair = SignPair(Plus, Minus);

    #[test]
    fn window_axis_hits_both_ends() {
        let w = ScanWindow::default();
        let a = w.axis();
        assert_eq!(a.len(), 401);
        assert_eq!(a[0], 0.0);
        assert_eq!(a[400], 4.0 * std::f64::consts::PI);
        assert_eq!(ScanWindow::new(0.0, 1.0, 1).validate(), Err(Error::InvalidResolution(1)));
        assert_eq!(ScanWindow::new(1.0, 1.0, 5).validate(), Err(Error::InvalidWindow));
    }

    #[test]
    fn bowl_has_one_component() {
        let g = bowl(31);
        let m = region_mask(&g, PM);
        assert_eq!(m.components.len(), 1);
        assert_eq!(m.components[0].min_cell, (10, 20));
        assert!(region_mask(&g, SignPair(Plus, Plus)).components.is_empty());
    }

    #[test]
    fn bowl_refines_to_centre() {
        let g = bowl(31);
        let seed = local_min_near(&g, PM, 0.5, 2.5).unwrap();
        assert_eq!(seed, (10, 20));
        let r = refine_minimum_with(&g, PM, seed, |a, b| (a - 1.03).powi(2) + (b - 1.98).powi(2) - 1.0).unwrap();
        assert!((r.tau1 - 1.03).abs() < 1e-6 && (r.tau2 - 1.98).abs() < 1e-6);
        assert!((r.value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn refinement_requires_local_min() {
        let g = bowl(31);
        let err = refine_minimum_with(&g, PM, (0, 5), |_, _| 0.0).unwrap_err();
        assert_eq!(err, Error::NotALocalMin { row: 0, col: 5 });
    }

    #[test]
    fn brent_finds_parabola_vertex() {
        let (x, fx) = brent_min(|x| (x - 0.3).powi(2) + 2.0, -1.0, 2.0);
        assert!((x - 0.3).abs() < 1e-8);
        assert!((fx - 2.0).abs() < 1e-15);
    }

    #[test]
    fn components_split_on_diagonal_contact() {
        // two negative cells touching only at a corner are separate components
        let mut g = bowl(4);
        for c in g.cells.iter_mut().flatten() {
            c[3] = 1.0;
        }
        g.cells[1] = Some([1.0, 1.0, 1.0, -1.0]);
        g.cells[4 + 2] = Some([1.0, 1.0, 1.0, -2.0]);
        let m = region_mask(&g, SignPair(Minus, Minus));
        assert_eq!(m.components.len(), 2);
        assert_eq!(m.negative_cells(), 2);
    }

    #[test]
    fn oracle_resolution_cap() {
        let err = grid_scan(
            &ModelParams::new(0.05),
            &OscillatorInit::Ground,
            ScanWindow::new(0.0, 1.0, 102),
            Engine::Oracle,
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::EngineUnavailable(_)));
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let p = ModelParams::from_eight_lambda_sq(1e-2);
        let w = ScanWindow::new(0.0, 12.0, 41);
        let a = grid_scan(&p, &OscillatorInit::Ground, w, Engine::Closed, Some(1)).unwrap();
        let b = grid_scan(&p, &OscillatorInit::Ground, w, Engine::Closed, Some(4)).unwrap();
        assert_eq!(a, b);
    }
}
