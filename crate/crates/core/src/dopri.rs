//! Dormand–Prince 5(4) integrator with Hairer's dense output and event location.

use serde::Serialize;

/// Step-size control parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
    /// `|y|₁` above which the trajectory is declared escaped.
    pub escape_bound: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-14, h_max: 0.5, max_steps: 200_000, escape_bound: 1e6 }
    }
}

/// How an integration ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Completed,
    Event,
    Escaped,
    StepLimit,
}

#[derive(Debug, Clone)]
struct DenseStep<const N: usize> {
    x0: f64,
    h: f64,
    r: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    fn eval(&self, x: f64) -> [f64; N] {
        let th = (x - self.x0) / self.h;
        let th1 = 1.0 - th;
        let mut y = [0.0; N];
        for i in 0..N {
            let r = &self.r;
            y[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        y
    }
}

/// Trajectory with dense output between accepted steps.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    steps: Vec<DenseStep<N>>,
    pub xs: Vec<f64>,
    pub ys: Vec<[f64; N]>,
    pub status: Status,
    /// Largest accepted normalized local error estimate.
    pub max_error: f64,
}

impl<const N: usize> Trajectory<N> {
    pub fn x_start(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_end(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    pub fn y_end(&self) -> [f64; N] {
        *self.ys.last().unwrap()
    }

    /// Dense value at `x` (clamped to the integrated range).
    pub fn eval(&self, x: f64) -> [f64; N] {
        if self.steps.is_empty() {
            return self.ys[0];
        }
        let forward = self.x_end() >= self.x_start();
        let key = |s: &DenseStep<N>| if forward { s.x0 } else { -s.x0 };
        let target = if forward { x } else { -x };
        let idx = self.steps.partition_point(|s| key(s) <= target).saturating_sub(1);
        let s = &self.steps[idx];
        let lo = self.xs[idx].min(self.xs[idx + 1]);
        let hi = self.xs[idx].max(self.xs[idx + 1]);
        s.eval(x.clamp(lo, hi))
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates `y' = f(x, y)` from `x0` to `x_end` (either direction).
///
/// With an event function `g`, integration stops at the first sign change of `g(y)`
/// after the initial point, located by bisection on the dense output.
pub fn integrate<const N: usize, F, G>(
    mut f: F,
    x0: f64,
    y0: [f64; N],
    x_end: f64,
    opts: &Options,
    mut event: Option<G>,
) -> Trajectory<N>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    G: FnMut(&[f64; N]) -> f64,
{
    let dir = if x_end >= x0 { 1.0 } else { -1.0 };
    let span = (x_end - x0).abs();
    let mut traj = Trajectory { steps: Vec::new(), xs: vec![x0], ys: vec![y0], status: Status::Completed, max_error: 0.0 };
    if span == 0.0 {
        return traj;
    }
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y);
    let mut g_prev = event.as_mut().map(|g| g(&y));
    let mut h = dir * (1e-3f64).min(span).min(opts.h_max);
    for _ in 0..opts.max_steps {
        if (x_end - x) * dir <= 0.0 {
            return traj;
        }
        if (x + h - x_end) * dir > 0.0 {
            h = x_end - x;
        }
        let k2 = f(x + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(x + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(x + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(x + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(x + h, &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y1 = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(x + h, &y1);
        let mut err = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y1[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() {
            h *= 0.2;
            continue;
        }
        if err > 1.0 {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            continue;
        }
        let mut r = [[0.0; N]; 5];
        for i in 0..N {
            r[0][i] = y[i];
            r[1][i] = y1[i] - y[i];
            r[2][i] = h * k1[i] - r[1][i];
            r[3][i] = r[1][i] - h * k7[i] - r[2][i];
            r[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        let step = DenseStep { x0: x, h, r };
        traj.max_error = traj.max_error.max(err);
        if let (Some(g), Some(gp)) = (event.as_mut(), g_prev) {
            let g1 = g(&y1);
            if gp != 0.0 && (g1 == 0.0 || g1.signum() != gp.signum()) {
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                while (hi - lo) * h.abs() > 1e-13 {
                    let mid = 0.5 * (lo + hi);
                    let gm = g(&step.eval(x + mid * h));
                    if gm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if gm.signum() == gp.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let xe = x + 0.5 * (lo + hi) * h;
                let ye = step.eval(xe);
                traj.steps.push(step);
                traj.xs.push(xe);
                traj.ys.push(ye);
                traj.status = Status::Event;
                return traj;
            }
            g_prev = Some(g1);
        }
        traj.steps.push(step);
        x += h;
        y = y1;
        k1 = k7;
        traj.xs.push(x);
        traj.ys.push(y);
        if y.iter().map(|v| v.abs()).sum::<f64>() > opts.escape_bound {
            traj.status = Status::Escaped;
            return traj;
        }
        let fac = if err == 0.0 { 10.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 10.0) };
        h = dir * (h.abs() * fac).min(opts.h_max);
    }
    traj.status = Status::StepLimit;
    traj
}

/// Integration without events.
pub fn integrate_plain<const N: usize, F>(f: F, x0: f64, y0: [f64; N], x_end: f64, opts: &Options) -> Trajectory<N>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    integrate(f, x0, y0, x_end, opts, None::<fn(&[f64; N]) -> f64>)
}
