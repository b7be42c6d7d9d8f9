//! Connecting orbits of the scaled reduced system and their variational equations.

use serde::Serialize;

use crate::dopri::{integrate, integrate_plain, Options, Status, Trajectory};
use crate::error::{Error, Result};
use crate::reduced::{Application, Equilibrium, EquilibriumKind, ReducedOde, ScaledSystem};

/// Default half-width of the scaled window.
pub const WINDOW: f64 = 40.0;
/// Offset of shooting seeds along the unstable eigenvector.
pub const SEED_OFFSET: f64 = 1e-7;
/// Radius of the sink ball that ends a Fisher-KPP front integration.
pub const SINK_RADIUS: f64 = 1e-9;

/// `exp(tA)` for a 2×2 matrix.
pub fn expm2(a: [[f64; 2]; 2], t: f64) -> [[f64; 2]; 2] {
    let s = 0.5 * (a[0][0] + a[1][1]);
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let q = s * s - det;
    let (c, sh) = if q > 0.0 {
        let r = q.sqrt();
        ((r * t).cosh(), (r * t).sinh() / r)
    } else if q < 0.0 {
        let r = (-q).sqrt();
        ((r * t).cos(), (r * t).sin() / r)
    } else {
        (1.0, t)
    };
    let e = (s * t).exp();
    let b = [[a[0][0] - s, a[0][1]], [a[1][0], a[1][1] - s]];
    [[e * (c + sh * b[0][0]), e * sh * b[0][1]], [e * sh * b[1][0], e * (c + sh * b[1][1])]]
}

fn mat_vec(m: [[f64; 2]; 2], v: [f64; 2]) -> [f64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// Maps a trajectory point into orbit coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Reflection {
    None,
    /// `(V, W)(X) ↦ (2m − V(−X), W(−X))`.
    PointAbout(f64),
    /// `(V, W)(X) ↦ (V(−X), −W(−X))`.
    Axis,
}

#[derive(Debug, Clone)]
enum PieceKind {
    /// Linear flow near an equilibrium: `base + Σ cₖ e^{μₖ(X − anchor)} (1, μₖ)`.
    Tail { anchor: f64, base: [f64; 2], modes: Vec<(f64, f64)> },
    /// Linear flow `base + exp(J(X − anchor)) offset` for non-real spectra.
    Focus { anchor: f64, base: [f64; 2], offset: [f64; 2], jac: [[f64; 2]; 2] },
    /// Integrated trajectory `y(s)` with `X = s + shift`, then reflected.
    Dense { traj: Box<Trajectory<2>>, shift: f64, reflection: Reflection },
}

/// One segment of an orbit on `[x_lo, x_hi]`.
#[derive(Debug, Clone)]
pub struct Piece {
    pub x_lo: f64,
    pub x_hi: f64,
    kind: PieceKind,
}

impl Piece {
    fn eval(&self, x: f64) -> [f64; 2] {
        match &self.kind {
            PieceKind::Tail { anchor, base, modes } => {
                let mut out = *base;
                for (mu, c) in modes {
                    let e = c * (mu * (x - anchor)).exp();
                    out[0] += e;
                    out[1] += e * mu;
                }
                out
            }
            PieceKind::Focus { anchor, base, offset, jac } => {
                let d = mat_vec(expm2(*jac, x - anchor), *offset);
                [base[0] + d[0], base[1] + d[1]]
            }
            PieceKind::Dense { traj, shift, reflection } => match reflection {
                Reflection::None => traj.eval(x - shift),
                Reflection::PointAbout(m) => {
                    let y = traj.eval(-x - shift);
                    [2.0 * m - y[0], y[1]]
                }
                Reflection::Axis => {
                    let y = traj.eval(-x - shift);
                    [y[0], -y[1]]
                }
            },
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.kind, PieceKind::Dense { .. })
    }
}

/// Sampled connection with diagnostics.
#[derive(Debug, Clone)]
pub struct Orbit {
    pub pieces: Vec<Piece>,
    pub x_lo: f64,
    pub x_hi: f64,
    /// Equilibrium values at `X → −∞` and `X → +∞`.
    pub from: f64,
    pub to: f64,
    /// Distance of the end of the computed orbit to its target rest point.
    pub endpoint_error: f64,
    /// Gap between matched halves, when the orbit is stitched.
    pub mismatch: f64,
    /// Largest normalized local error of the integrations.
    pub max_local_error: f64,
    pub status: Status,
}

impl Orbit {
    /// `(V, W)` at scaled position `X`.
    pub fn eval(&self, x: f64) -> [f64; 2] {
        let x = x.clamp(self.x_lo, self.x_hi);
        let p = self
            .pieces
            .iter()
            .find(|p| x >= p.x_lo && x <= p.x_hi)
            .unwrap_or_else(|| if x <= self.pieces[0].x_lo { &self.pieces[0] } else { self.pieces.last().unwrap() });
        p.eval(x)
    }

    /// Uniform samples `(X, V, W)` across the window.
    pub fn sample(&self, count: usize) -> Vec<[f64; 3]> {
        (0..count)
            .map(|k| {
                let x = self.x_lo + (self.x_hi - self.x_lo) * k as f64 / (count - 1) as f64;
                let y = self.eval(x);
                [x, y[0], y[1]]
            })
            .collect()
    }

    /// Dense pieces with their `X` ranges.
    pub fn dense_ranges(&self) -> Vec<(f64, f64)> {
        self.pieces.iter().filter(|p| p.is_dense()).map(|p| (p.x_lo, p.x_hi)).collect()
    }

    /// CSV with columns X, V, W and the conserved value when defined.
    pub fn to_csv(&self, ode: &ReducedOde, eps: f64, count: usize) -> String {
        let mut out = String::from("X,V,W,conserved\n");
        for [x, v, w] in self.sample(count) {
            let c = ode.conserved_scaled(eps, v, w).map(|c| format!("{c:.16e}")).unwrap_or_default();
            out.push_str(&format!("{x:.16e},{v:.16e},{w:.16e},{c}\n"));
        }
        out
    }
}

fn unstable_direction(sys: &ScaledSystem, v: f64) -> Result<(f64, [f64; 2])> {
    let (fv, fw) = sys.grad(v, 0.0);
    let disc = fw * fw + 4.0 * fv;
    if disc <= 0.0 {
        return Err(Error::ConnectionNotFound(format!("rest point {v} is not a saddle")));
    }
    let mu = 0.5 * (fw + disc.sqrt());
    if mu <= 0.0 {
        return Err(Error::ConnectionNotFound(format!("rest point {v} has no unstable direction")));
    }
    let n = (1.0 + mu * mu).sqrt();
    Ok((mu, [1.0 / n, mu / n]))
}

fn stable_direction(sys: &ScaledSystem, v: f64) -> Result<(f64, [f64; 2])> {
    let (fv, fw) = sys.grad(v, 0.0);
    let disc = fw * fw + 4.0 * fv;
    if disc <= 0.0 {
        return Err(Error::ConnectionNotFound(format!("rest point {v} is not a saddle")));
    }
    let mu = 0.5 * (fw - disc.sqrt());
    let n = (1.0 + mu * mu).sqrt();
    Ok((mu, [1.0 / n, mu / n]))
}

fn opts() -> Options {
    Options { rtol: 1e-12, atol: 1e-15, h_max: 0.25, max_steps: 400_000, escape_bound: 1e3 }
}

/// Linearized tail on `[x_lo, x_hi]` through `base + offset` at `anchor`; modes that grow away
/// from the anchor are dropped.
fn tail(x_lo: f64, x_hi: f64, anchor: f64, base: [f64; 2], offset: [f64; 2], sys: &ScaledSystem) -> Piece {
    let jac = sys.jacobian(base[0], base[1]);
    let (tr, det) = (jac[1][1], -jac[1][0]);
    let disc = tr * tr - 4.0 * det;
    if disc <= 0.0 {
        return Piece { x_lo, x_hi, kind: PieceKind::Focus { anchor, base, offset, jac } };
    }
    let (m1, m2) = (0.5 * (tr + disc.sqrt()), 0.5 * (tr - disc.sqrt()));
    let alpha = (offset[1] - m2 * offset[0]) / (m1 - m2);
    let beta = offset[0] - alpha;
    let right = x_lo >= anchor;
    let keep = |mu: f64| if right { mu <= 0.0 } else { mu >= 0.0 };
    let modes = [(m1, alpha), (m2, beta)].into_iter().filter(|(mu, _)| keep(*mu)).collect();
    Piece { x_lo, x_hi, kind: PieceKind::Tail { anchor, base, modes } }
}

fn find(eqs: &[Equilibrium], v: f64) -> Result<&Equilibrium> {
    eqs.iter()
        .min_by(|a, b| (a.v_scaled - v).abs().total_cmp(&(b.v_scaled - v).abs()))
        .filter(|e| (e.v_scaled - v).abs() < 1e-8 * (1.0 + v.abs()))
        .ok_or_else(|| Error::ConnectionNotFound(format!("no rest point at V = {v}")))
}

/// Shoots the unstable manifold of `from` to the reversor's fixed set and reflects.
fn reversible_connection(ode: &ReducedOde, eps: f64, from: f64, to: f64, window: f64) -> Result<Orbit> {
    let sys = ode.scaled(eps)?;
    let eqs = ode.equilibria(eps)?;
    let start = find(&eqs, from)?;
    if start.kind != EquilibriumKind::Saddle {
        return Err(Error::ConnectionNotFound("start is not a saddle".into()));
    }
    let (_, mut dir) = unstable_direction(&sys, from)?;
    if (to - from) * dir[0] < 0.0 {
        dir = [-dir[0], -dir[1]];
    }
    let heteroclinic = (to - from).abs() > 1e-12;
    let mid = 0.5 * (from + to);
    let seed = [from + SEED_OFFSET * dir[0], SEED_OFFSET * dir[1]];
    let traj = if heteroclinic {
        integrate(|_, y: &[f64; 2]| sys.rhs(y), 0.0, seed, 400.0, &opts(), Some(|y: &[f64; 2]| y[0] - mid))
    } else {
        integrate(|_, y: &[f64; 2]| sys.rhs(y), 0.0, seed, 400.0, &opts(), Some(|y: &[f64; 2]| y[1]))
    };
    if traj.status != Status::Event {
        return Err(Error::ConnectionNotFound(format!("no crossing of the symmetry line ({:?})", traj.status)));
    }
    let t_cross = traj.x_end();
    let shift = -t_cross;
    let reflection = if heteroclinic { Reflection::PointAbout(mid) } else { Reflection::Axis };
    let x_seed = shift;
    let mut pieces = Vec::new();
    let lo = -window;
    if x_seed > lo {
        pieces.push(tail(lo, x_seed, x_seed, [from, 0.0], [seed[0] - from, seed[1]], &sys));
    }
    pieces.push(Piece {
        x_lo: x_seed.max(lo),
        x_hi: 0.0,
        kind: PieceKind::Dense { traj: Box::new(traj.clone()), shift, reflection: Reflection::None },
    });
    pieces.push(Piece {
        x_lo: 0.0,
        x_hi: (-x_seed).min(window),
        kind: PieceKind::Dense { traj: Box::new(traj.clone()), shift, reflection },
    });
    let mirrored_seed = match reflection {
        Reflection::PointAbout(m) => [2.0 * m - seed[0], seed[1]],
        _ => [seed[0], -seed[1]],
    };
    if -x_seed < window {
        pieces.push(tail(-x_seed, window, -x_seed, [to, 0.0], [mirrored_seed[0] - to, mirrored_seed[1]], &sys));
    }
    let mut orbit = Orbit {
        pieces,
        x_lo: lo,
        x_hi: window,
        from,
        to,
        endpoint_error: 0.0,
        mismatch: 0.0,
        max_local_error: traj.max_error,
        status: Status::Completed,
    };
    let end = orbit.eval(window);
    orbit.endpoint_error = ((end[0] - to).powi(2) + end[1].powi(2)).sqrt();
    Ok(orbit)
}

/// Invariant triangle of the scaled Fisher–KPP system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KppTriangle {
    pub sigma: f64,
    pub lambda1: f64,
    pub mu_plus: f64,
}

impl KppTriangle {
    pub fn new(sigma: f64, lambda1: f64) -> Self {
        Self { sigma, lambda1, mu_plus: 0.5 * (-lambda1 + (lambda1 * lambda1 + 4.0).sqrt()) }
    }

    /// Smallest margin of the three defining inequalities (positive inside).
    pub fn margin(&self, v: f64, w: f64) -> f64 {
        let a = -w;
        let b = w + 0.5 * self.lambda1 * v;
        let c = w - 2.0 * self.mu_plus * (v - 1.0 / self.sigma);
        a.min(b).min(c)
    }
}

/// Unstable manifold of `1/σ` followed into the sink at 0.
fn fkpp_connection(ode: &ReducedOde, eps: f64, window: f64) -> Result<(Orbit, KppTriangle)> {
    if eps <= 0.0 {
        return Err(Error::NoProfile("Fisher-KPP fronts need epsilon > 0".into()));
    }
    let sys = ode.scaled(eps)?;
    let sigma = sys.coefficient(2, 0);
    let lambda1 = -sys.coefficient(0, 1);
    if !(sigma > 0.0) || lambda1 < 2.0 {
        return Err(Error::NoProfile(format!("need sigma > 0 and lambda1 >= 2 (sigma = {sigma}, lambda1 = {lambda1})")));
    }
    let tri = KppTriangle::new(sigma, lambda1);
    let from = 1.0 / sigma;
    let (_, u) = unstable_direction(&sys, from)?;
    let dir = [-u[0], -u[1]];
    let seed = [from + SEED_OFFSET * dir[0], SEED_OFFSET * dir[1]];
    let traj = integrate(
        |_, y: &[f64; 2]| sys.rhs(y),
        0.0,
        seed,
        400.0,
        &opts(),
        Some(|y: &[f64; 2]| (y[0] * y[0] + y[1] * y[1]).sqrt() - SINK_RADIUS),
    );
    if traj.status != Status::Event {
        return Err(Error::ConnectionNotFound(format!("front did not reach the sink ({:?})", traj.status)));
    }
    for (x, y) in traj.xs.iter().zip(&traj.ys).skip(1) {
        if tri.margin(y[0], y[1]) <= 0.0 {
            return Err(Error::TriangleViolated { x: *x });
        }
    }
    // Centre the front where V crosses half the saddle value.
    let half = 0.5 * from;
    let k = traj.ys.iter().position(|y| y[0] < half).unwrap_or(0).max(1);
    let mut lo_s = traj.xs[k - 1];
    let mut hi_s = traj.xs[k];
    for _ in 0..100 {
        let m = 0.5 * (lo_s + hi_s);
        if traj.eval(m)[0] > half {
            lo_s = m;
        } else {
            hi_s = m;
        }
    }
    let shift = -0.5 * (lo_s + hi_s);
    let (x_seed, x_end) = (shift, traj.x_end() + shift);
    let end = traj.y_end();
    let mut pieces = Vec::new();
    if x_seed > -window {
        pieces.push(tail(-window, x_seed, x_seed, [from, 0.0], [seed[0] - from, seed[1]], &sys));
    }
    pieces.push(Piece {
        x_lo: x_seed.max(-window),
        x_hi: x_end.min(window),
        kind: PieceKind::Dense { traj: Box::new(traj.clone()), shift, reflection: Reflection::None },
    });
    if x_end < window {
        pieces.push(tail(x_end, window, x_end, [0.0, 0.0], end, &sys));
    }
    let orbit = Orbit {
        pieces,
        x_lo: -window,
        x_hi: window,
        from,
        to: 0.0,
        endpoint_error: (end[0] * end[0] + end[1] * end[1]).sqrt(),
        mismatch: 0.0,
        max_local_error: traj.max_error,
        status: Status::Completed,
    };
    Ok((orbit, tri))
}

/// Bore between the saddles `0` and `a₁`, matched at `V = a₁/2`.
fn waterwave_connection(ode: &ReducedOde, eps: f64, window: f64) -> Result<Orbit> {
    let sys = ode.scaled(eps)?;
    let shape = ode.profile_shape(eps)?;
    let a1 = shape.amplitude;
    let eqs = ode.equilibria(eps)?;
    let (e0, e1) = (find(&eqs, 0.0)?, find(&eqs, a1)?);
    if e0.kind != EquilibriumKind::Saddle || e1.kind != EquilibriumKind::Saddle {
        return Err(Error::ConnectionNotFound("bore end states are not both saddles".into()));
    }
    let a1 = e1.v_scaled;
    let mid = 0.5 * a1;
    let (_, mut u) = unstable_direction(&sys, 0.0)?;
    if u[0] * a1 < 0.0 {
        u = [-u[0], -u[1]];
    }
    let (_, mut s) = stable_direction(&sys, a1)?;
    // Backward in X from a₁ the stable direction expands; approach from the side of 0.
    if s[0] * (0.0 - a1) < 0.0 {
        s = [-s[0], -s[1]];
    }
    let seed_l = [SEED_OFFSET * u[0], SEED_OFFSET * u[1]];
    let seed_r = [a1 + SEED_OFFSET * s[0], SEED_OFFSET * s[1]];
    let ev = |y: &[f64; 2]| y[0] - mid;
    let left = integrate(|_, y: &[f64; 2]| sys.rhs(y), 0.0, seed_l, 400.0, &opts(), Some(ev));
    let right = integrate(|_, y: &[f64; 2]| sys.rhs(y), 0.0, seed_r, -400.0, &opts(), Some(ev));
    if left.status != Status::Event || right.status != Status::Event {
        return Err(Error::ConnectionNotFound("bore halves did not reach the matching line".into()));
    }
    let (sl, sr) = (-left.x_end(), -right.x_end());
    let mismatch = (left.y_end()[1] - right.y_end()[1]).abs();
    let mut pieces = Vec::new();
    if sl > -window {
        pieces.push(tail(-window, sl, sl, [0.0, 0.0], seed_l, &sys));
    }
    pieces.push(Piece {
        x_lo: sl.max(-window),
        x_hi: 0.0,
        kind: PieceKind::Dense { traj: Box::new(left.clone()), shift: sl, reflection: Reflection::None },
    });
    pieces.push(Piece {
        x_lo: 0.0,
        x_hi: sr.min(window),
        kind: PieceKind::Dense { traj: Box::new(right.clone()), shift: sr, reflection: Reflection::None },
    });
    if sr < window {
        pieces.push(tail(sr, window, sr, [a1, 0.0], [seed_r[0] - a1, seed_r[1]], &sys));
    }
    let mut orbit = Orbit {
        pieces,
        x_lo: -window,
        x_hi: window,
        from: 0.0,
        to: a1,
        endpoint_error: 0.0,
        mismatch,
        max_local_error: left.max_error.max(right.max_error),
        status: Status::Completed,
    };
    let end = orbit.eval(window);
    orbit.endpoint_error = ((end[0] - a1).powi(2) + end[1].powi(2)).sqrt();
    Ok(orbit)
}

/// Connecting orbit of the application's generic regime on `X ∈ [−window, window]`.
pub fn connect(ode: &ReducedOde, eps: f64, window: f64) -> Result<Orbit> {
    match ode.application {
        Application::Elasticity => {
            let shape = ode.profile_shape(eps)?;
            match shape.kind {
                crate::reduced::ProfileKind::Front => {
                    reversible_connection(ode, eps, -shape.amplitude, shape.amplitude, window)
                }
                _ => reversible_connection(ode, eps, 0.0, 0.0, window),
            }
        }
        Application::Fkpp => fkpp_connection(ode, eps, window).map(|(o, _)| o),
        Application::Waterwave => waterwave_connection(ode, eps, window),
    }
}

/// Fisher–KPP front with its invariant triangle.
pub fn connect_fkpp(ode: &ReducedOde, eps: f64, window: f64) -> Result<(Orbit, KppTriangle)> {
    fkpp_connection(ode, eps, window)
}

/// Trajectory from an arbitrary phase state.
pub fn integrate_orbit(ode: &ReducedOde, eps: f64, start: [f64; 2], x0: f64, x1: f64) -> Result<Trajectory<2>> {
    let sys = ode.scaled(eps)?;
    Ok(integrate_plain(|_, y: &[f64; 2]| sys.rhs(y), x0, start, x1, &opts()))
}

/// Fundamental matrix of `ξ' = J(X)ξ` along the trajectory through `start` at `X = 0`.
pub fn variational_from(ode: &ReducedOde, eps: f64, start: [f64; 2], x_end: f64) -> Result<Trajectory<6>> {
    let sys = ode.scaled(eps)?;
    let y0 = [start[0], start[1], 1.0, 0.0, 0.0, 1.0];
    Ok(integrate_plain(
        |_, y: &[f64; 6]| {
            let j = sys.jacobian(y[0], y[1]);
            [
                y[1],
                sys.f(y[0], y[1]),
                j[0][0] * y[2] + j[0][1] * y[4],
                j[0][0] * y[3] + j[0][1] * y[5],
                j[1][0] * y[2] + j[1][1] * y[4],
                j[1][0] * y[3] + j[1][1] * y[5],
            ]
        },
        0.0,
        y0,
        x_end,
        &Options { escape_bound: 1e200, ..opts() },
    ))
}

/// Result of integrating the variational equation along an orbit.
#[derive(Debug, Clone, Serialize)]
pub struct Linearization {
    /// `max |Φ(X) t(X₀) − t(X)| / max |t|` with `t = (W, F)`.
    pub tangent_residual: f64,
    /// `det Φ` at the end of each dense piece.
    pub wronskians: Vec<f64>,
    /// Growth `|Φ n|` of the solution transverse to the tangent at each end.
    pub transverse_growth: Vec<f64>,
}

fn mat_mul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Checks that `(v̇, v̇') = (v', v'')` solves the variational equation on every dense piece.
///
/// Each piece is cut into segments on which `‖J‖·length ≤ 1`; a fresh fundamental matrix is
/// integrated on each and the segment matrices are composed. The Wronskian is the product of
/// segment determinants, which avoids cancellation in the large composed matrix.
pub fn linearize_along(ode: &ReducedOde, eps: f64, orbit: &Orbit) -> Result<Linearization> {
    let sys = ode.scaled(eps)?;
    let tangent = |y: [f64; 2]| [y[1], sys.f(y[0], y[1])];
    let mut residual: f64 = 0.0;
    let mut wronskians = Vec::new();
    let mut growth = Vec::new();
    for (lo, hi) in orbit.dense_ranges() {
        if hi - lo <= 0.0 {
            continue;
        }
        let probes: Vec<f64> = (0..=400).map(|k| lo + (hi - lo) * k as f64 / 400.0).collect();
        let mut jmax: f64 = 1.0;
        let mut tmax: f64 = 0.0;
        for x in &probes {
            let y = orbit.eval(*x);
            let j = sys.jacobian(y[0], y[1]);
            jmax = jmax.max(j[1][0].abs() + j[1][1].abs());
            let t = tangent(y);
            tmax = tmax.max(t[0].abs().max(t[1].abs()));
        }
        let segments = ((hi - lo) * jmax).ceil().max(1.0) as usize;
        let len = (hi - lo) / segments as f64;
        let mut total = [[1.0, 0.0], [0.0, 1.0]];
        let mut det = 1.0;
        for s in 0..segments {
            let a = lo + s as f64 * len;
            let start = orbit.eval(a);
            let traj = variational_from(ode, eps, start, len)?;
            let t0 = tangent(start);
            for k in 0..=20 {
                let u = len * k as f64 / 20.0;
                let y = traj.eval(u);
                let pred = mat_vec([[y[2], y[3]], [y[4], y[5]]], t0);
                let t = tangent(orbit.eval(a + u));
                residual = residual.max((pred[0] - t[0]).abs().max((pred[1] - t[1]).abs()) / tmax);
            }
            let y = traj.y_end();
            total = mat_mul([[y[2], y[3]], [y[4], y[5]]], total);
            det *= y[2] * y[5] - y[3] * y[4];
        }
        wronskians.push(det);
        let t0 = tangent(orbit.eval(lo));
        let n = (t0[0] * t0[0] + t0[1] * t0[1]).sqrt();
        let g = mat_vec(total, [-t0[1] / n, t0[0] / n]);
        growth.push((g[0] * g[0] + g[1] * g[1]).sqrt());
    }
    Ok(Linearization { tangent_residual: residual, wronskians, transverse_growth: growth })
}
