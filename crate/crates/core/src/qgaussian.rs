//! Unit-variance q-Gaussian likelihoods and the two-hypothesis polynomial
//! regression experiment.
//!
//! The density is `N_q(z; μ) = √β / C_q · e_q(−β (z − μ)²)` with
//! `β = 1 / (5 − 3q)`, which fixes the variance at one. Here `e_q(x) =
//! [1 + (1 − q) x]₊^{1/(1−q)}` for `q ≠ 1` and `exp(x)` for `q = 1`. For
//! `q < 1` the density vanishes outside `|z − μ| ≤ 1/√(β(1 − q))`.
//!
//! The regression experiment fits a line (`h₁`) and a parabola (`h₂`) to
//! two data sets sampled at `x = −1, −1, 0, 0, 1, 1` with responses
//! `y = a, −a, Δ+a, Δ−a, a, −a`. `D₁` holds the first four points, `D₂`
//! all six. Each entry of the 2×2 likelihood matrix is the maximized
//! likelihood of one hypothesis on one data set.

use std::io::Write;

use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::matrix::{NonnegativeMatrix, SpaceIndex};
use crate::sinkhorn::{cooperative_index, CiMode, DEFAULT_ITERATION_TOLERANCE};

/// q-Gaussian with unit variance centred at `mu`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QGaussian {
    q: f64,
    mu: f64,
    beta: f64,
    /// `√β / C_q`
    peak: f64,
}

impl QGaussian {
    pub fn new(q: f64, mu: f64) -> Result<Self> {
        if !q.is_finite() || q >= 5.0 / 3.0 || !mu.is_finite() {
            return Err(Error::InvalidQ(q));
        }
        let beta = 1.0 / (5.0 - 3.0 * q);
        let peak = beta.sqrt() / normalizer(q);
        Ok(Self { q, mu, beta, peak })
    }

    pub fn standard(q: f64) -> Result<Self> {
        Self::new(q, 0.0)
    }

    /// Same shape, new location.
    pub fn centered_at(&self, mu: f64) -> Self {
        Self { mu, ..*self }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Half-width of the support for `q < 1`; `None` when the support is unbounded.
    pub fn support_radius(&self) -> Option<f64> {
        (self.q < 1.0).then(|| 1.0 / (self.beta * (1.0 - self.q)).sqrt())
    }

    pub fn density(&self, z: f64) -> f64 {
        let d = z - self.mu;
        self.peak * q_exponential(-self.beta * d * d, self.q)
    }
}

/// `e_q(x)`, with the positive-part cutoff for `q < 1`.
pub fn q_exponential(x: f64, q: f64) -> f64 {
    if q == 1.0 {
        return x.exp();
    }
    let base = 1.0 + (1.0 - q) * x;
    if base <= 0.0 {
        0.0
    } else {
        base.powf(1.0 / (1.0 - q))
    }
}

/// The normalizing constant `C_q`, evaluated through log-gamma.
pub fn normalizer(q: f64) -> f64 {
    use std::f64::consts::PI;
    if q == 1.0 {
        PI.sqrt()
    } else if q < 1.0 {
        let r = 1.0 - q;
        let ln_c = 2f64.ln() + 0.5 * PI.ln() + ln_gamma(1.0 / r)
            - (3.0 - q).ln()
            - 0.5 * r.ln()
            - ln_gamma((3.0 - q) / (2.0 * r));
        ln_c.exp()
    } else {
        let r = q - 1.0;
        let ln_c =
            0.5 * PI.ln() + ln_gamma((3.0 - q) / (2.0 * r)) - 0.5 * r.ln() - ln_gamma(1.0 / r);
        ln_c.exp()
    }
}

pub fn q_gaussian_density(z: f64, params: &QGaussian) -> f64 {
    params.density(z)
}

/// Evenly spaced offsets `lo, lo + step, …` not exceeding `hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl FitGrid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidGrid(format!(
                "need lo < hi, got [{lo}, {hi}]"
            )));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "step must be positive, got {step}"
            )));
        }
        Ok(Self { lo, hi, step })
    }

    pub fn len(&self) -> usize {
        ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |k| self.lo + k as f64 * self.step)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HorizontalFit {
    pub offset: f64,
    pub likelihood: f64,
}

/// Grid-search maximum-likelihood constant fit `f(x) = b` to `ys`: the grid
/// point maximizing `Π_i N_q(y_i; b)`, ties going to the smallest `b`.
pub fn ml_horizontal_fit(ys: &[f64], q: f64, grid: &FitGrid) -> Result<HorizontalFit> {
    let shape = QGaussian::standard(q)?;
    let mut best: Option<HorizontalFit> = None;
    for b in grid.points() {
        let noise = shape.centered_at(b);
        let likelihood: f64 = ys.iter().map(|&y| noise.density(y)).product();
        if likelihood > best.map_or(0.0, |f| f.likelihood) {
            best = Some(HorizontalFit {
                offset: b,
                likelihood,
            });
        }
    }
    best.ok_or(Error::NoFeasibleFit)
}

/// One `(a, Δ, q)` configuration of the regression experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegressionScenario {
    pub a: f64,
    pub delta: f64,
    pub q: f64,
    pub fit_grid: FitGrid,
}

pub const DEFAULT_FIT_STEP: f64 = 1e-3;

impl RegressionScenario {
    /// Scenario with the default offset grid `[−(Δ+a)−1, Δ+a+1]`, step `1e-3`.
    pub fn new(a: f64, delta: f64, q: f64) -> Result<Self> {
        Self::with_fit_step(a, delta, q, DEFAULT_FIT_STEP)
    }

    pub fn with_fit_step(a: f64, delta: f64, q: f64, step: f64) -> Result<Self> {
        let reach = delta + a + 1.0;
        Self::with_fit_grid(a, delta, q, FitGrid::new(-reach, reach, step)?)
    }

    pub fn with_fit_grid(a: f64, delta: f64, q: f64, fit_grid: FitGrid) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidScenario(format!(
                "a must be positive, got {a}"
            )));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidScenario(format!(
                "delta must be positive, got {delta}"
            )));
        }
        QGaussian::standard(q)?;
        Ok(Self {
            a,
            delta,
            q,
            fit_grid,
        })
    }

    /// Responses of `D₂`; `D₁` is the first four.
    pub fn responses(&self) -> [f64; 6] {
        let (a, d) = (self.a, self.delta);
        [a, -a, d + a, d - a, a, -a]
    }
}

/// The 2×2 likelihood matrix together with its cross-checks.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionMatrix {
    /// Rows `D₁, D₂`; columns `h₁` (linear), `h₂` (quadratic).
    pub matrix: NonnegativeMatrix,
    /// ML offset of the horizontal fit to `D₂`, if any offset is feasible.
    pub horizontal_offset: Option<f64>,
    /// `N_q(a; 0)⁴`, the midpoint value of `M₁,₁`.
    pub m11_midpoint: f64,
    /// `M₂,₂` by per-location grid search.
    pub m22_grid: f64,
    /// The grid search found a strictly better parabola than the midpoint one.
    pub midpoint_discrepancy: bool,
}

/// Largest `N_q(y₁ − c; 0)·N_q(y₂ − c; 0)` over the grid, or 0 if infeasible.
fn pair_fit(y1: f64, y2: f64, q: f64, grid: &FitGrid) -> Result<f64> {
    match ml_horizontal_fit(&[y1, y2], q, grid) {
        Ok(fit) => Ok(fit.likelihood),
        Err(Error::NoFeasibleFit) => Ok(0.0),
        Err(e) => Err(e),
    }
}

pub fn build_regression_matrix(s: &RegressionScenario) -> Result<RegressionMatrix> {
    let (a, delta, q) = (s.a, s.delta, s.q);
    let grid = &s.fit_grid;
    let noise = QGaussian::standard(q)?;

    let outer = pair_fit(a, -a, q, grid)?;
    let middle = pair_fit(delta + a, delta - a, q, grid)?;
    // Both polynomial orders fit D₁ through its two location means.
    let m11 = outer * middle;

    let (m21, horizontal_offset) = match ml_horizontal_fit(&s.responses(), q, grid) {
        Ok(fit) => (fit.likelihood, Some(fit.offset)),
        Err(Error::NoFeasibleFit) => (0.0, None),
        Err(e) => return Err(e),
    };

    let n_a = noise.density(a);
    let m22 = n_a.powi(6);
    let m22_grid = outer * outer * middle;
    let midpoint_discrepancy = m22_grid > m22 * (1.0 + 1e-9);

    let index = SpaceIndex::new(
        vec!["linear".into(), "quadratic".into()],
        vec!["D1".into(), "D2".into()],
        vec![4, 6],
    )?;
    let matrix = NonnegativeMatrix::from_rows(&[[m11, m11], [m21, m22]])?.with_index(index)?;
    Ok(RegressionMatrix {
        matrix,
        horizontal_offset,
        m11_midpoint: n_a.powi(4),
        m22_grid,
        midpoint_discrepancy,
    })
}

pub const DEFAULT_AXIS_MAX: f64 = 3.0;
pub const DEFAULT_AXIS_STEP: f64 = 0.1;

/// `step, 2·step, …` up to and including `max` (the half-open range `(0, max]`).
pub fn axis(max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite() && max >= step) {
        return Err(Error::InvalidGrid(format!(
            "bad axis (0, {max}] with step {step}"
        )));
    }
    let n = (max / step + 1e-9).floor() as usize;
    Ok((1..=n).map(|k| k as f64 * step).collect())
}

/// Evenly spaced values from `lo` to `hi` inclusive.
pub fn axis_range(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if lo == hi && lo.is_finite() && step > 0.0 {
        return Ok(vec![lo]);
    }
    Ok(FitGrid::new(lo, hi, step)?.points().collect())
}

#[derive(Clone, Debug)]
pub struct PhaseDiagramConfig {
    pub q: f64,
    pub a_values: Vec<f64>,
    pub delta_values: Vec<f64>,
    pub fit_step: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl PhaseDiagramConfig {
    /// Both axes on `(0, 3]` with step 0.1; offsets searched with step `1e-3`.
    pub fn with_defaults(q: f64) -> Self {
        let default_axis = axis(DEFAULT_AXIS_MAX, DEFAULT_AXIS_STEP).expect("static axis");
        Self {
            q,
            a_values: default_axis.clone(),
            delta_values: default_axis,
            fit_step: DEFAULT_FIT_STEP,
            max_iter: 100_000,
            tol: DEFAULT_ITERATION_TOLERANCE,
        }
    }
}

/// Cooperative index over an `(a, Δ)` grid. Cells are stored row-major with
/// `Δ` as the slow index; failed cells hold `NaN`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseDiagram {
    pub q: f64,
    pub a_values: Vec<f64>,
    pub delta_values: Vec<f64>,
    pub ci_values: Vec<f64>,
}

impl PhaseDiagram {
    pub fn ci(&self, delta_idx: usize, a_idx: usize) -> f64 {
        self.ci_values[delta_idx * self.a_values.len() + a_idx]
    }

    /// The CI column for one value of `a`, ordered by `Δ`.
    pub fn a_column(&self, a_idx: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.delta_values.len()).map(move |d| self.ci(d, a_idx))
    }

    /// Indices of `a` values whose CI is exactly 1 for every `Δ`.
    pub fn optimal_a_columns(&self) -> Vec<usize> {
        (0..self.a_values.len())
            .filter(|&k| self.a_column(k).all(|ci| ci == 1.0))
            .collect()
    }

    /// CSV `a,delta,ci`, rows ordered by `Δ` then `a`; NaN cells leave `ci` empty.
    pub fn write_csv<W: Write>(&self, mut w: W, precision: usize) -> Result<()> {
        writeln!(w, "a,delta,ci")?;
        for (d, delta) in self.delta_values.iter().enumerate() {
            for (k, a) in self.a_values.iter().enumerate() {
                let ci = self.ci(d, k);
                if ci.is_nan() {
                    writeln!(w, "{a:.precision$},{delta:.precision$},")?;
                } else {
                    writeln!(w, "{a:.precision$},{delta:.precision$},{ci:.precision$}")?;
                }
            }
        }
        Ok(())
    }
}

fn cell_ci(q: f64, a: f64, delta: f64, cfg: &PhaseDiagramConfig) -> f64 {
    RegressionScenario::with_fit_step(a, delta, q, cfg.fit_step)
        .and_then(|s| build_regression_matrix(&s))
        .and_then(|r| cooperative_index(&r.matrix, CiMode::Structural, cfg.max_iter, cfg.tol))
        .unwrap_or(f64::NAN)
}

/// Structural-mode CI for every `(a, Δ)` cell. Cells run in parallel; the
/// result does not depend on scheduling.
pub fn phase_diagram(cfg: &PhaseDiagramConfig) -> Result<PhaseDiagram> {
    QGaussian::standard(cfg.q)?;
    if cfg.a_values.is_empty() || cfg.delta_values.is_empty() {
        return Err(Error::InvalidGrid(
            "phase-diagram axes must be nonempty".into(),
        ));
    }
    let cells: Vec<(f64, f64)> = cfg
        .delta_values
        .iter()
        .flat_map(|&d| cfg.a_values.iter().map(move |&a| (a, d)))
        .collect();
    let ci_values = cells
        .par_iter()
        .map(|&(a, d)| cell_ci(cfg.q, a, d, cfg))
        .collect();
    Ok(PhaseDiagram {
        q: cfg.q,
        a_values: cfg.a_values.clone(),
        delta_values: cfg.delta_values.clone(),
        ci_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn density_examples() {
        let normal = QGaussian::standard(1.0).unwrap();
        assert!((normal.density(0.0) - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);

        let compact = QGaussian::standard(0.0).unwrap();
        assert!((normalizer(0.0) - 4.0 / 3.0).abs() < 1e-14);
        assert!((compact.density(0.0) - 3.0 / (4.0 * 5f64.sqrt())).abs() < 1e-14);
        assert_eq!(compact.density(3.0), 0.0);
        assert!((compact.support_radius().unwrap() - 5f64.sqrt()).abs() < 1e-15);
        assert!(normal.support_radius().is_none());
    }

    #[test]
    fn fat_tailed_closed_form() {
        // q = 1.5: β = 2 and the density is (2/π)(1 + z²)⁻².
        let fat = QGaussian::standard(1.5).unwrap();
        assert_eq!(fat.beta(), 2.0);
        for z in [0.0f64, 0.5, 1.0, 3.0, 10.0] {
            let expected = 2.0 / PI / (1.0 + z * z).powi(2);
            assert!((fat.density(z) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_unsupported_q() {
        assert!(matches!(
            QGaussian::standard(5.0 / 3.0),
            Err(Error::InvalidQ(_))
        ));
        assert!(QGaussian::standard(2.0).is_err());
        assert!(QGaussian::standard(f64::NAN).is_err());
        assert!(QGaussian::standard(-1.0).is_ok());
    }

    #[test]
    fn fit_grid_points() {
        let g = FitGrid::new(-1.0, 1.0, 0.5).unwrap();
        assert_eq!(
            g.points().collect::<Vec<_>>(),
            vec![-1.0, -0.5, 0.0, 0.5, 1.0]
        );
        assert!(FitGrid::new(1.0, 1.0, 0.1).is_err());
        assert!(FitGrid::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn horizontal_fit_constant_data() {
        let grid = FitGrid::new(-3.0, 3.0, 1e-3).unwrap();
        for q in [0.0, 1.0, 1.5] {
            let fit = ml_horizontal_fit(&[0.7; 5], q, &grid).unwrap();
            assert!((fit.offset - 0.7).abs() <= 1e-3, "q={q}: {}", fit.offset);
        }
    }

    #[test]
    fn horizontal_fit_gaussian_is_mean() {
        let (a, delta) = (0.8, 1.3);
        let s = RegressionScenario::new(a, delta, 1.0).unwrap();
        let fit = ml_horizontal_fit(&s.responses(), 1.0, &s.fit_grid).unwrap();
        assert!((fit.offset - delta / 3.0).abs() <= 1e-3);
    }

    #[test]
    fn horizontal_fit_infeasible() {
        let grid = FitGrid::new(-5.0, 5.0, 1e-3).unwrap();
        assert!(matches!(
            ml_horizontal_fit(&[-3.0, 3.0], 0.0, &grid),
            Err(Error::NoFeasibleFit)
        ));
    }

    #[test]
    fn regression_matrix_gaussian_entries() {
        let (a, delta) = (0.6, 1.7);
        let s = RegressionScenario::new(a, delta, 1.0).unwrap();
        let r = build_regression_matrix(&s).unwrap();
        let n = QGaussian::standard(1.0).unwrap();
        let b = delta / 3.0;
        let at = |z: f64| n.density(z - b);
        let closed = at(a).powi(2) * at(-a).powi(2) * at(delta + a) * at(delta - a);
        let m21 = r.matrix.get(1, 0);
        assert!((m21 - closed).abs() / closed < 1e-5, "{m21} vs {closed}");
        assert_eq!(r.matrix.get(0, 0), r.matrix.get(0, 1));
        assert!((r.matrix.get(0, 0) - r.m11_midpoint).abs() / r.m11_midpoint < 1e-9);
        let m22 = n.density(a).powi(6);
        assert!((r.matrix.get(1, 1) - m22).abs() <= 1e-14 * m22);
        assert!(!r.midpoint_discrepancy);
    }

    #[test]
    fn compact_noise_gives_triangular_matrix() {
        let s = RegressionScenario::new(1.0, 3.0, 0.0).unwrap();
        let r = build_regression_matrix(&s).unwrap();
        assert_eq!(r.matrix.get(1, 0), 0.0);
        assert!(r.matrix.get(1, 1) > 0.0);
        assert!(r.horizontal_offset.is_none());
        let ci = cooperative_index(&r.matrix, CiMode::Structural, 1000, 1e-10).unwrap();
        assert_eq!(ci, 1.0);
    }

    #[test]
    fn fat_tails_flag_off_centre_fits() {
        // For q = 1.5 the midpoint of a pair is a local minimum once a > 1.
        let s = RegressionScenario::new(2.0, 1.0, 1.5).unwrap();
        let r = build_regression_matrix(&s).unwrap();
        assert!(r.midpoint_discrepancy);
        assert!(r.m22_grid > r.matrix.get(1, 1));
        let s = RegressionScenario::new(0.5, 1.0, 1.5).unwrap();
        assert!(!build_regression_matrix(&s).unwrap().midpoint_discrepancy);
    }

    #[test]
    fn vanishing_signal_makes_rows_alike() {
        for q in [0.0, 1.0, 1.5] {
            let s = RegressionScenario::new(0.5, 1e-6, q).unwrap();
            let r = build_regression_matrix(&s).unwrap();
            let (m21, m22) = (r.matrix.get(1, 0), r.matrix.get(1, 1));
            assert!(m21 > 0.0 && m22 > 0.0);
            assert!((m21 - m22).abs() / m22 < 1e-3, "q={q}: {m21} vs {m22}");
            let ci = cooperative_index(&r.matrix, CiMode::Structural, 100_000, 1e-12).unwrap();
            assert!(ci < 1.0);
        }
    }

    #[test]
    fn axis_values() {
        let ax = axis(3.0, 0.1).unwrap();
        assert_eq!(ax.len(), 30);
        assert!((ax[29] - 3.0).abs() < 1e-12);
        assert_eq!(axis(3.0, 0.05).unwrap().len(), 60);
        assert!(axis(0.01, 0.05).is_err());
        assert_eq!(axis_range(1.0, 1.0, 0.1).unwrap(), vec![1.0]);
        assert_eq!(axis_range(1.0, 1.2, 0.1).unwrap().len(), 3);
        assert!(axis_range(2.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn single_cell_phase_diagram() {
        let cfg = PhaseDiagramConfig {
            a_values: vec![1.0],
            delta_values: vec![3.0],
            ..PhaseDiagramConfig::with_defaults(0.0)
        };
        let pd = phase_diagram(&cfg).unwrap();
        assert_eq!(pd.ci_values, vec![1.0]);
    }

    #[test]
    fn failed_cells_are_nan_and_blank_in_csv() {
        // a beyond the support radius zeroes every entry.
        let cfg = PhaseDiagramConfig {
            a_values: vec![0.5, 2.5],
            delta_values: vec![1.0],
            ..PhaseDiagramConfig::with_defaults(0.0)
        };
        let pd = phase_diagram(&cfg).unwrap();
        assert!(pd.ci(0, 1).is_nan());
        let mut buf = Vec::new();
        pd.write_csv(&mut buf, 3).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "a,delta,ci");
        assert!(lines[1].starts_with("0.500,1.000,0."));
        assert_eq!(lines[2], "2.500,1.000,");
    }
}
