//! Benchmark differential equations, collocation grids, the training loss
//! and the measure of success (MoS).
//!
//! The loss is `L = L_DE + L_BC` with `L_DE` the mean squared residual over
//! grid points and equations and `L_BC` the summed squared boundary
//! violations. Each dependent variable is modelled by its own trial model.

use std::f64::consts::PI;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Block, Deriv, Point, TrialModel};
use crate::training::{EvalCounter, Phase};

pub const DAMPED_KAPPA: f64 = 3.0;
pub const DAMPED_LAMBDA: f64 = 12.0;
pub const BURGERS_NU: f64 = 0.1;
pub const BURGERS_A: f64 = 1.0;
pub const BURGERS_B: f64 = 0.5;
pub const COUPLED_OMEGA: f64 = 3.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    DampedOsc,
    Burgers,
    Coupled,
    Twod,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 4] = [ProblemKind::DampedOsc, ProblemKind::Burgers, ProblemKind::Coupled, ProblemKind::Twod];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::DampedOsc => "damped_osc",
            ProblemKind::Burgers => "burgers",
            ProblemKind::Coupled => "coupled",
            ProblemKind::Twod => "twod",
        }
    }

    pub fn dim(self) -> usize {
        if self == ProblemKind::Twod {
            2
        } else {
            1
        }
    }

    pub fn default_counts(self) -> Vec<usize> {
        vec![20; self.dim()]
    }

    pub fn build(self) -> DEProblem {
        self.build_with_counts(&self.default_counts()).expect("default grid is valid")
    }

    pub fn build_with_counts(self, counts: &[usize]) -> Result<DEProblem> {
        DEProblem::new(self, counts)
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "damped_osc" | "damped_oscillator" => Ok(ProblemKind::DampedOsc),
            "burgers" | "stationary_burgers" => Ok(ProblemKind::Burgers),
            "coupled" | "coupled_oscillators" => Ok(ProblemKind::Coupled),
            "twod" | "2d" | "twod_linear" => Ok(ProblemKind::Twod),
            other => Err(Error::Config(format!("unknown problem `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub points: Vec<Point>,
    pub counts: Vec<usize>,
    pub bounds: Vec<(f64, f64)>,
}

/// Interior uniform points `lo + (i+1)(hi-lo)/(m+1)` per axis; the
/// Cartesian product in two dimensions with the last axis fastest.
pub fn make_grid(counts: &[usize], bounds: &[(f64, f64)]) -> Result<Grid> {
    if counts.is_empty() || counts.len() != bounds.len() || counts.len() > 2 {
        return Err(Error::Config("grid needs one count and one bound pair per axis (1 or 2 axes)".into()));
    }
    if let Some(&c) = counts.iter().find(|&&c| c < 2) {
        return Err(Error::Config(format!("grid count {c} is below 2")));
    }
    if let Some(&(lo, hi)) = bounds.iter().find(|(lo, hi)| lo.partial_cmp(hi) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::Config(format!("empty grid interval ({lo}, {hi})")));
    }
    let axes: Vec<Vec<f64>> = counts.iter().zip(bounds).map(|(&m, &(lo, hi))| axis_points(m, lo, hi)).collect();
    let points = if axes.len() == 1 {
        axes[0].iter().map(|&x| vec![x]).collect()
    } else {
        axes[0].iter().flat_map(|&x| axes[1].iter().map(move |&y| vec![x, y])).collect()
    };
    Ok(Grid { points, counts: counts.to_vec(), bounds: bounds.to_vec() })
}

fn axis_points(m: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..m).map(|i| lo + (i + 1) as f64 * (hi - lo) / (m + 1) as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTerm {
    pub point: Point,
    pub target: f64,
    pub function: usize,
}

/// One equation's residual at one point with its partials with respect to
/// the requested derivatives `(function, derivative, ∂r/∂value)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub value: f64,
    pub partials: Vec<(usize, Deriv, f64)>,
}

#[derive(Debug, Clone)]
pub struct DEProblem {
    kind: ProblemKind,
    grid: Grid,
    boundary: Vec<BoundaryTerm>,
    references: Vec<Vec<f64>>,
    burgers: Option<BurgersOracle>,
}

pub fn damped_oscillator() -> DEProblem {
    ProblemKind::DampedOsc.build()
}

pub fn stationary_burgers() -> DEProblem {
    ProblemKind::Burgers.build()
}

pub fn coupled_oscillators() -> DEProblem {
    ProblemKind::Coupled.build()
}

pub fn twod_linear() -> DEProblem {
    ProblemKind::Twod.build()
}

impl DEProblem {
    pub fn new(kind: ProblemKind, counts: &[usize]) -> Result<Self> {
        let dim = kind.dim();
        if counts.len() != dim {
            return Err(Error::Config(format!("{} needs {dim} grid counts, got {}", kind.name(), counts.len())));
        }
        let grid = make_grid(counts, &vec![(0.0, 1.0); dim])?;
        let boundary = match kind {
            ProblemKind::DampedOsc => vec![BoundaryTerm { point: vec![0.0], target: 1.0, function: 0 }],
            ProblemKind::Burgers => vec![
                BoundaryTerm { point: vec![0.0], target: burgers_closed_form(0.0), function: 0 },
                BoundaryTerm { point: vec![1.0], target: burgers_closed_form(1.0), function: 0 },
            ],
            ProblemKind::Coupled => vec![
                BoundaryTerm { point: vec![0.0], target: 1.0, function: 0 },
                BoundaryTerm { point: vec![0.0], target: -1.0, function: 1 },
            ],
            ProblemKind::Twod => axis_points(counts[0], 0.0, 1.0)
                .into_iter()
                .map(|x| BoundaryTerm { point: vec![x, 0.0], target: 1.0, function: 0 })
                .collect(),
        };
        let burgers = (kind == ProblemKind::Burgers)
            .then(|| BurgersOracle::solve(BURGERS_NU, boundary[0].target, boundary[1].target, 4000))
            .transpose()?;
        let mut p = Self { kind, grid, boundary, references: Vec::new(), burgers };
        p.references = (0..p.n_functions())
            .map(|f| p.grid.points.iter().map(|x| p.reference(x, f)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        Ok(p)
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    /// Highest derivative order in the residual.
    pub fn order(&self) -> usize {
        if self.kind == ProblemKind::Burgers {
            2
        } else {
            1
        }
    }

    pub fn n_functions(&self) -> usize {
        if self.kind == ProblemKind::Coupled {
            2
        } else {
            1
        }
    }

    pub fn n_equations(&self) -> usize {
        self.n_functions()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn boundary(&self) -> &[BoundaryTerm] {
        &self.boundary
    }

    pub fn function_names(&self) -> Vec<&'static str> {
        if self.kind == ProblemKind::Coupled {
            vec!["f", "g"]
        } else {
            vec!["f"]
        }
    }

    /// Derivatives evaluated at every grid point, for every function. The
    /// value is always included since MoS needs it.
    pub fn grid_derivs(&self) -> Vec<Deriv> {
        match self.kind {
            ProblemKind::DampedOsc | ProblemKind::Coupled => vec![Deriv::Value, Deriv::First(0)],
            ProblemKind::Burgers => vec![Deriv::Value, Deriv::First(0), Deriv::Second(0)],
            ProblemKind::Twod => vec![Deriv::Value, Deriv::First(1)],
        }
    }

    /// Boundary points of one function, in [`Self::boundary`] order.
    pub fn boundary_points(&self, function: usize) -> Vec<Point> {
        self.boundary.iter().filter(|b| b.function == function).map(|b| b.point.clone()).collect()
    }

    /// Residuals at `x`; `jets[f][k]` holds function `f` at
    /// `grid_derivs()[k]`.
    pub fn residuals(&self, x: &[f64], jets: &[Vec<f64>]) -> Vec<Residual> {
        use Deriv::*;
        match self.kind {
            ProblemKind::DampedOsc => {
                let (k, l) = (DAMPED_KAPPA, DAMPED_LAMBDA);
                let e = (-k * x[0]).exp();
                let src = k * e * (l * x[0]).cos() + l * e * (l * x[0]).sin();
                vec![Residual { value: jets[0][1] + src, partials: vec![(0, First(0), 1.0)] }]
            }
            ProblemKind::Burgers => {
                let (f, fp, fpp) = (jets[0][0], jets[0][1], jets[0][2]);
                vec![Residual {
                    value: f * fp - BURGERS_NU * fpp,
                    partials: vec![(0, Value, fp), (0, First(0), f), (0, Second(0), -BURGERS_NU)],
                }]
            }
            ProblemKind::Coupled => {
                let w = COUPLED_OMEGA;
                let (f, fp, g, gp) = (jets[0][0], jets[0][1], jets[1][0], jets[1][1]);
                vec![
                    Residual { value: fp - w * g, partials: vec![(0, First(0), 1.0), (1, Value, -w)] },
                    Residual { value: gp + w * f, partials: vec![(1, First(0), 1.0), (0, Value, w)] },
                ]
            }
            ProblemKind::Twod => {
                vec![Residual { value: jets[0][1] - 2.0 * x[1] - x[0], partials: vec![(0, First(1), 1.0)] }]
            }
        }
    }

    /// Closed-form solution where one exists (`None` for Burgers, whose
    /// printed closed form has a pole inside the domain).
    pub fn analytic(&self, x: &[f64], function: usize) -> Option<f64> {
        match self.kind {
            ProblemKind::DampedOsc => Some((-DAMPED_KAPPA * x[0]).exp() * (DAMPED_LAMBDA * x[0]).cos()),
            ProblemKind::Burgers => None,
            ProblemKind::Coupled => {
                let t = COUPLED_OMEGA * x[0];
                Some(if function == 0 { t.cos() - t.sin() } else { -t.sin() - t.cos() })
            }
            ProblemKind::Twod => Some(x[1] * x[1] + x[0] * x[1] + 1.0),
        }
    }

    /// The analytic derivative jet `[f, f', f'']` used by oracle checks.
    pub fn analytic_jet(&self, x: &[f64], function: usize) -> Option<Vec<f64>> {
        match self.kind {
            ProblemKind::DampedOsc => {
                let (k, l) = (DAMPED_KAPPA, DAMPED_LAMBDA);
                let e = (-k * x[0]).exp();
                let (c, s) = ((l * x[0]).cos(), (l * x[0]).sin());
                Some(vec![e * c, -k * e * c - l * e * s])
            }
            ProblemKind::Burgers => {
                let (c, k) = burgers_constants();
                let t = k * (x[0] + BURGERS_B);
                let sec2 = 1.0 / t.cos().powi(2);
                Some(vec![c * t.tan(), c * k * sec2, 2.0 * c * k * k * sec2 * t.tan()])
            }
            ProblemKind::Coupled => {
                let w = COUPLED_OMEGA;
                let t = w * x[0];
                Some(if function == 0 {
                    vec![t.cos() - t.sin(), -w * t.sin() - w * t.cos()]
                } else {
                    vec![-t.sin() - t.cos(), -w * t.cos() + w * t.sin()]
                })
            }
            ProblemKind::Twod => Some(vec![x[1] * x[1] + x[0] * x[1] + 1.0, 2.0 * x[1] + x[0]]),
        }
    }

    /// Reference used for MoS: the closed form, or the boundary-value
    /// solver for Burgers.
    pub fn reference(&self, x: &[f64], function: usize) -> Result<f64> {
        match (&self.burgers, self.analytic(x, function)) {
            (_, Some(v)) => Ok(v),
            (Some(o), None) => Ok(o.eval(x[0])),
            (None, None) => Err(Error::Config(format!("{} has no reference solution", self.name()))),
        }
    }

    /// Grid references `[function][point]`.
    pub fn references(&self) -> &[Vec<f64>] {
        &self.references
    }

    pub fn burgers_oracle(&self) -> Option<&BurgersOracle> {
        self.burgers.as_ref()
    }
}

/// `(c, k)` with `f̄ = c·tan(k(x+b))`, `c = √(2νa)`, `k = √(a/2ν)`.
pub fn burgers_constants() -> (f64, f64) {
    ((2.0 * BURGERS_NU * BURGERS_A).sqrt(), (BURGERS_A / (2.0 * BURGERS_NU)).sqrt())
}

pub fn burgers_closed_form(x: f64) -> f64 {
    let (c, k) = burgers_constants();
    c * (k * (x + BURGERS_B)).tan()
}

/// Poles of the Burgers closed form inside `(lo, hi)`, where
/// `k(x+b) = π/2 + jπ`.
pub fn burgers_poles(lo: f64, hi: f64) -> Vec<f64> {
    let (_, k) = burgers_constants();
    let first = ((k * (lo + BURGERS_B) - PI / 2.0) / PI).ceil() as i64;
    (first..)
        .map(|j| (PI / 2.0 + j as f64 * PI) / k - BURGERS_B)
        .take_while(|&x| x < hi)
        .filter(|&x| x > lo)
        .collect()
}

/// Locates sign changes through a blow-up on a uniform scan, refined by
/// bisection. Separate from [`burgers_poles`] so the two can check each
/// other.
pub fn scan_poles<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize, threshold: f64) -> Vec<f64> {
    let mut found = Vec::new();
    let h = (hi - lo) / n as f64;
    for i in 0..n {
        let (mut a, mut b) = (lo + i as f64 * h, lo + (i + 1) as f64 * h);
        let (fa, fb) = (f(a), f(b));
        if fa.signum() == fb.signum() || fa.abs().max(fb.abs()) < threshold {
            continue;
        }
        let sign_a = fa.signum();
        for _ in 0..100 {
            let mid = 0.5 * (a + b);
            if f(mid).signum() == sign_a {
                a = mid;
            } else {
                b = mid;
            }
        }
        // a root has |f| → 0 at the crossing, a pole has |f| → ∞
        if f(0.5 * (a + b)).abs() > threshold {
            found.push(0.5 * (a + b));
        }
    }
    found
}

/// Smooth solution of `f f' = ν f''` with `f(0) = f0`, `f(1) = f1`, by
/// shooting on the initial slope with RK4 and bisection; samples are
/// interpolated with cubic Hermite polynomials.
#[derive(Debug, Clone)]
pub struct BurgersOracle {
    nu: f64,
    xs: Vec<f64>,
    f: Vec<f64>,
    fp: Vec<f64>,
}

impl BurgersOracle {
    pub fn solve(nu: f64, f0: f64, f1: f64, steps: usize) -> Result<Self> {
        let shoot = |s: f64| integrate(nu, f0, s, steps);
        let end = |s: f64| {
            let (_, f, _) = shoot(s);
            f.last().copied().unwrap_or(f64::INFINITY) - f1
        };
        let (mut lo, mut hi) = (-50.0f64, 50.0f64);
        if !(end(lo) < 0.0 && end(hi) > 0.0) {
            return Err(Error::Numerical("Burgers shooting bracket does not straddle the target".into()));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if end(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        let (xs, f, fp) = shoot(0.5 * (lo + hi));
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("Burgers shooting diverged".into()));
        }
        Ok(Self { nu, xs, f, fp })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn initial_slope(&self) -> f64 {
        self.fp[0]
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_jet(x).0
    }

    /// `(f, f')` at `x`, clamped to `[0, 1]`.
    pub fn eval_jet(&self, x: f64) -> (f64, f64) {
        let n = self.xs.len() - 1;
        let h = self.xs[1] - self.xs[0];
        let x = x.clamp(0.0, 1.0);
        let i = ((x / h).floor() as usize).min(n - 1);
        let t = (x - self.xs[i]) / h;
        let (y0, y1, d0, d1) = (self.f[i], self.f[i + 1], self.fp[i] * h, self.fp[i + 1] * h);
        let (t2, t3) = (t * t, t * t * t);
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * d1;
        let dv = (6.0 * t2 - 6.0 * t) * y0 + (3.0 * t2 - 4.0 * t + 1.0) * d0 + (-6.0 * t2 + 6.0 * t) * y1 + (3.0 * t2 - 2.0 * t) * d1;
        (v, dv / h)
    }
}

fn integrate(nu: f64, f0: f64, s: f64, steps: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let h = 1.0 / steps as f64;
    let rhs = |y: [f64; 2]| [y[1], y[0] * y[1] / nu];
    let mut xs = Vec::with_capacity(steps + 1);
    let mut f = Vec::with_capacity(steps + 1);
    let mut fp = Vec::with_capacity(steps + 1);
    let mut y = [f0, s];
    for i in 0..=steps {
        xs.push(i as f64 * h);
        f.push(y[0]);
        fp.push(y[1]);
        if i == steps {
            break;
        }
        if !(y[0].abs() < 1e8 && y[1].abs() < 1e12) {
            // blown up: pin the remaining samples to the overshoot sign
            let sign = if y[0] > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
            for j in i + 1..=steps {
                xs.push(j as f64 * h);
                f.push(sign);
                fp.push(sign);
            }
            break;
        }
        let k1 = rhs(y);
        let k2 = rhs([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = rhs([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = rhs([y[0] + h * k3[0], y[1] + h * k3[1]]);
        for d in 0..2 {
            y[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
        }
    }
    (xs, f, fp)
}

/// Loss terms, grid values and (optionally) the gradient per model.
#[derive(Debug, Clone, PartialEq)]
pub struct LossEval {
    pub total: f64,
    pub de: f64,
    pub bc: f64,
    pub mos: Option<f64>,
    /// `[function][point]` model values on the grid.
    pub values: Vec<Vec<f64>>,
    pub grads: Option<Vec<Vec<f64>>>,
}

/// Evaluates `L = L_DE + L_BC` through the models, one per function. Each
/// model evaluates its grid block and boundary block in a single call.
pub fn loss(
    problem: &DEProblem,
    models: &mut [Box<dyn TrialModel>],
    gradient: bool,
    counter: &EvalCounter,
    phase: Phase,
) -> Result<LossEval> {
    let nf = problem.n_functions();
    if models.len() != nf {
        return Err(Error::Config(format!("{} needs {nf} models, got {}", problem.name(), models.len())));
    }
    let derivs = problem.grid_derivs();
    for m in models.iter() {
        if let Some(&d) = derivs.iter().find(|&&d| !m.supports(d)) {
            return Err(Error::UnsupportedOrder(d.order()));
        }
        if m.dim() != problem.dim() {
            return Err(Error::Config("model dimension does not match the problem".into()));
        }
    }
    let grid = &problem.grid.points;
    let bpoints: Vec<Vec<Point>> = (0..nf).map(|f| problem.boundary_points(f)).collect();
    let mut evals = Vec::with_capacity(nf);
    for (f, m) in models.iter_mut().enumerate() {
        let mut blocks = vec![Block { points: grid, derivs: &derivs }];
        if !bpoints[f].is_empty() {
            blocks.push(Block { points: &bpoints[f], derivs: &[Deriv::Value] });
        }
        evals.push(m.evaluate(&blocks, gradient, counter, phase)?);
    }

    let m = grid.len() as f64;
    let n_eq = problem.n_equations() as f64;
    let norm = 1.0 / (m * n_eq);
    let mut grads: Option<Vec<Vec<f64>>> = gradient.then(|| models.iter().map(|m| vec![0.0; m.params().len()]).collect());
    let mut de = 0.0;
    for (pi, x) in grid.iter().enumerate() {
        let jets: Vec<Vec<f64>> = (0..nf).map(|f| (0..derivs.len()).map(|k| evals[f][0].values[k][pi]).collect()).collect();
        for r in problem.residuals(x, &jets) {
            de += norm * r.value * r.value;
            if let Some(g) = grads.as_mut() {
                for &(f, d, c) in &r.partials {
                    let k = derivs.iter().position(|&e| e == d).expect("residual uses grid derivatives");
                    let src = &evals[f][0].grads.as_ref().expect("gradients requested")[k][pi];
                    let w = 2.0 * norm * r.value * c;
                    for (gj, s) in g[f].iter_mut().zip(src) {
                        *gj += w * s;
                    }
                }
            }
        }
    }
    let mut bc = 0.0;
    let mut seen = vec![0usize; nf];
    for b in &problem.boundary {
        let f = b.function;
        let bi = seen[f];
        seen[f] += 1;
        let diff = evals[f][1].values[0][bi] - b.target;
        bc += diff * diff;
        if let Some(g) = grads.as_mut() {
            let src = &evals[f][1].grads.as_ref().expect("gradients requested")[0][bi];
            for (gj, s) in g[f].iter_mut().zip(src) {
                *gj += 2.0 * diff * s;
            }
        }
    }
    let values: Vec<Vec<f64>> = evals.iter().map(|e| e[0].values[0].clone()).collect();
    let mos = mos(problem, &values).ok();
    Ok(LossEval { total: de + bc, de, bc, mos, values, grads })
}

/// `Σ_f Σ_i (f(x_i) − f̄(x_i))²` over the grid.
pub fn mos(problem: &DEProblem, values: &[Vec<f64>]) -> Result<f64> {
    if values.len() != problem.n_functions() || values.iter().any(|v| v.len() != problem.grid.points.len()) {
        return Err(Error::Config("MoS needs one value per grid point and function".into()));
    }
    Ok(values
        .iter()
        .zip(&problem.references)
        .map(|(v, r)| v.iter().zip(r).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::BlockEval;

    type Jet = fn(&[f64]) -> [f64; 3];

    /// Evaluates a fixed function through the model interface.
    struct Fixed {
        dim: usize,
        jets: Vec<Jet>,
        which: usize,
        params: Vec<f64>,
    }

    impl TrialModel for Fixed {
        fn variant(&self) -> crate::models::Variant {
            crate::models::Variant::To
        }
        fn dim(&self) -> usize {
            self.dim
        }
        fn params(&self) -> &[f64] {
            &self.params
        }
        fn params_mut(&mut self) -> &mut [f64] {
            &mut self.params
        }
        fn param_names(&self) -> Vec<String> {
            vec!["c".into()]
        }
        fn supports(&self, _: Deriv) -> bool {
            true
        }
        fn evaluate(&mut self, blocks: &[Block<'_>], _: bool, _: &EvalCounter, _: Phase) -> Result<Vec<BlockEval>> {
            let f = self.jets[self.which];
            Ok(blocks
                .iter()
                .map(|b| BlockEval {
                    values: b
                        .derivs
                        .iter()
                        .map(|d| {
                            b.points
                                .iter()
                                .map(|p| {
                                    let j = f(p);
                                    self.params[0] * if *d == Deriv::Value { 1.0 } else { 0.0 }
                                        + match d {
                                            Deriv::Value => j[0],
                                            Deriv::First(_) => j[1],
                                            Deriv::Second(_) => j[2],
                                        }
                                })
                                .collect()
                        })
                        .collect(),
                    grads: None,
                })
                .collect())
        }
        fn metadata(&self) -> serde_json::Value {
            serde_json::Value::Null
        }
    }

    fn fixed(dim: usize, f: fn(&[f64]) -> [f64; 3], shift: f64) -> Box<dyn TrialModel> {
        Box::new(Fixed { dim, jets: vec![f], which: 0, params: vec![shift] })
    }

    #[test]
    fn grids() {
        let g = make_grid(&[3], &[(0.0, 1.0)]).unwrap();
        assert_eq!(g.points, vec![vec![0.25], vec![0.5], vec![0.75]]);
        let g = make_grid(&[20], &[(0.0, 1.0)]).unwrap();
        assert!((g.points[0][0] - 1.0 / 21.0).abs() < 1e-15);
        for i in 0..20 {
            assert!((g.points[i][0] + g.points[19 - i][0] - 1.0).abs() < 1e-15);
        }
        assert_eq!(make_grid(&[20, 20], &[(0.0, 1.0); 2]).unwrap().points.len(), 400);
        assert!(make_grid(&[1], &[(0.0, 1.0)]).is_err());
    }

    #[test]
    fn analytic_values() {
        let p = damped_oscillator();
        assert_eq!(p.analytic(&[0.0], 0), Some(1.0));
        let v = p.analytic(&[0.5], 0).unwrap();
        assert!((v - (-1.5f64).exp() * 6f64.cos()).abs() < 1e-15);
        assert!((v - 0.214_24).abs() < 1e-5);
        let t = twod_linear();
        assert_eq!(t.analytic(&[0.0, 0.0], 0), Some(1.0));
        assert_eq!(t.analytic(&[0.5, 0.5], 0), Some(1.5));
        let c = coupled_oscillators();
        assert_eq!(c.analytic(&[0.0], 0), Some(1.0));
        assert_eq!(c.analytic(&[0.0], 1), Some(-1.0));
        for x in c.grid().points.iter() {
            let (f, g) = (c.analytic(x, 0).unwrap(), c.analytic(x, 1).unwrap());
            assert!((f * f + g * g - 2.0).abs() < 1e-12);
        }
        assert_eq!(t.boundary().len(), 20);
    }

    #[test]
    fn analytic_residuals_vanish() {
        for kind in [ProblemKind::DampedOsc, ProblemKind::Coupled, ProblemKind::Twod] {
            let p = kind.build();
            let mut pts = p.grid().points.clone();
            pts.push(if kind == ProblemKind::Twod { vec![0.3, 0.7] } else { vec![0.3] });
            for x in &pts {
                let jets: Vec<Vec<f64>> = (0..p.n_functions()).map(|f| p.analytic_jet(x, f).unwrap()).collect();
                for r in p.residuals(x, &jets) {
                    assert!(r.value.abs() < 1e-9, "{kind:?} at {x:?}: {}", r.value);
                }
            }
        }
    }

    #[test]
    fn burgers_constants_and_pole() {
        let (c, k) = burgers_constants();
        assert!((c - 0.447_21).abs() < 1e-5);
        assert!((k - 2.236_07).abs() < 1e-5);
        assert!((c - 2.0 * BURGERS_NU * k).abs() < 1e-15);
        let p = stationary_burgers();
        let jet = p.analytic_jet(&[0.9], 0).unwrap();
        let r = p.residuals(&[0.9], &[jet]);
        assert!(r[0].value.abs() < 1e-8);
        let poles = burgers_poles(0.0, 1.0);
        assert_eq!(poles.len(), 1);
        assert!((poles[0] - 0.2025).abs() < 1e-4);
        let scanned = scan_poles(burgers_closed_form, 0.0, 1.0, 1000, 10.0);
        assert_eq!(scanned.len(), 1);
        assert!((scanned[0] - poles[0]).abs() < 1e-9);
    }

    #[test]
    fn burgers_oracle_solves_bvp() {
        let p = stationary_burgers();
        let o = p.burgers_oracle().unwrap();
        let (f0, f1) = (burgers_closed_form(0.0), burgers_closed_form(1.0));
        assert!((o.eval(0.0) - f0).abs() < 1e-12);
        assert!((o.eval(1.0) - f1).abs() < 1e-9);
        // independent closed form of ν f' = f²/2 + C with C < 0: f = -q tanh(q (x - x0) / 2ν)
        let c2 = 2.0 * BURGERS_NU * o.initial_slope() - f0 * f0;
        assert!(c2 < 0.0);
        let q = (-c2).sqrt();
        let x0 = (2.0 * BURGERS_NU / q) * (-f0 / q).atanh();
        let x0 = -x0;
        for x in [0.1, 0.2025, 0.5, 0.8] {
            let exact = -q * (q * (x - x0) / (2.0 * BURGERS_NU)).tanh();
            assert!((o.eval(x) - exact).abs() < 1e-8, "{x}: {} vs {exact}", o.eval(x));
        }
    }

    #[test]
    fn exact_solution_has_zero_loss() {
        let c = EvalCounter::new();
        let p = damped_oscillator();
        let jet = |x: &[f64]| {
            let e = (-3.0 * x[0]).exp();
            [e * (12.0 * x[0]).cos(), -3.0 * e * (12.0 * x[0]).cos() - 12.0 * e * (12.0 * x[0]).sin(), 0.0]
        };
        let mut models = vec![fixed(1, jet, 0.0)];
        let l = loss(&p, &mut models, false, &c, Phase::Training).unwrap();
        assert!(l.total < 1e-9);
        assert!(l.mos.unwrap() < 1e-12);
        models[0].params_mut()[0] = 0.1;
        let l = loss(&p, &mut models, false, &c, Phase::Training).unwrap();
        assert!((l.mos.unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn constant_and_zero_models_on_damped_oscillator() {
        let c = EvalCounter::new();
        let p = damped_oscillator();
        let mut one = vec![fixed(1, |_| [1.0, 0.0, 0.0], 0.0)];
        let l = loss(&p, &mut one, false, &c, Phase::Training).unwrap();
        assert_eq!(l.bc, 0.0);
        let expect: f64 = p
            .grid()
            .points
            .iter()
            .map(|x| {
                let e = (-3.0 * x[0]).exp();
                (3.0 * e * (12.0 * x[0]).cos() + 12.0 * e * (12.0 * x[0]).sin()).powi(2)
            })
            .sum::<f64>()
            / 20.0;
        assert!((l.de - expect).abs() < 1e-12);
        let mut zero = vec![fixed(1, |_| [0.0, 0.0, 0.0], 0.0)];
        assert_eq!(loss(&p, &mut zero, false, &c, Phase::Training).unwrap().bc, 1.0);
    }

    #[test]
    fn constant_is_a_burgers_residual_zero() {
        let p = stationary_burgers();
        let r = p.residuals(&[0.4], &[vec![0.7, 0.0, 0.0]]);
        assert_eq!(r[0].value, 0.0);
        let c = EvalCounter::new();
        let mut k = vec![fixed(1, |_| [0.7, 0.0, 0.0], 0.0)];
        let l = loss(&p, &mut k, false, &c, Phase::Training).unwrap();
        assert_eq!(l.de, 0.0);
        assert!(l.bc > 0.1);
    }

    #[test]
    fn wrong_model_count_rejected() {
        let c = EvalCounter::new();
        let p = coupled_oscillators();
        let mut one = vec![fixed(1, |_| [1.0, 0.0, 0.0], 0.0)];
        assert!(loss(&p, &mut one, false, &c, Phase::Training).is_err());
    }

    #[test]
    fn names_parse() {
        for k in ProblemKind::ALL {
            assert_eq!(k.name().parse::<ProblemKind>().unwrap(), k);
        }
        assert!("heat".parse::<ProblemKind>().is_err());
    }
}
