//! Leading-order two-layer bore `(ψ₁, ψ₂, η)` reconstructed from the reduced orbit, with
//! critical-layer, cat's-eye and streamline queries.
//!
//! The corrections are composed with the layer-wise linear change of coordinates, so the
//! lower stream function carries `cηY/(h+η)` and the upper one `cη(1−Y)/(1−h−η)`. Scaled
//! positions use `X = |ε|x`.

use serde::Serialize;

use crate::conjugate::ConjugateSolution;
use crate::error::{Error, Result};
use crate::numerics::{brent, gauss_integrate};
use crate::orbit::{connect, Orbit, WINDOW};
use crate::reduced::ScaledSystem;
use crate::waterwave::WaterwaveModel;

/// Base arc-length step of the streamline tracer, in channel heights.
pub const TRACE_STEP: f64 = 1e-3;
/// Largest allowed distance between a turning point and the critical layer for an eye streamline.
pub const TURNING_TOL: f64 = 1e-4;

#[derive(Debug, Clone)]
enum Profile {
    Flat,
    Tanh { kappa: f64 },
    Orbit { orbit: Box<Orbit>, sys: ScaledSystem, scale: f64 },
}

/// Interface displacement and its first two `x`-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interface {
    pub eta: f64,
    pub eta_x: f64,
    pub eta_xx: f64,
}

/// Stream function value with the derivatives needed for residuals and tracing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamValue {
    pub psi: f64,
    pub psi_x: f64,
    pub psi_y: f64,
    pub psi_xx: f64,
    pub psi_yy: f64,
}

/// Fluid layer of a point or streamline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Lower,
    Upper,
    /// The `ψ = 0` streamline separating the layers.
    Interface,
}

/// Reconstructed bore at fixed `ε`.
#[derive(Debug, Clone)]
pub struct WaveField {
    pub eps: f64,
    pub h: f64,
    pub hp: f64,
    pub c: f64,
    pub rho: f64,
    pub omega: f64,
    /// Downstream interface jump `h₊ − h`.
    pub amplitude: f64,
    pub lambda1: f64,
    /// `c₀(c₀ + (1−h₀)ω) < 0` at the base point.
    pub critical_hypothesis: bool,
    pub h0: f64,
    pub c0: f64,
    pub a1: f64,
    profile: Profile,
}

fn sech2(z: f64) -> f64 {
    let s = 1.0 / z.cosh();
    s * s
}

impl WaveField {
    /// Field driven by the computed connecting orbit of the reduced equation.
    pub fn reconstruct(model: &WaterwaveModel, eps: f64) -> Result<Self> {
        let mut field = Self::base(model, eps)?;
        if eps != 0.0 {
            let ode = model.reduced_ode()?;
            let orbit = connect(&ode, eps, WINDOW)?;
            let sys = ode.scaled(eps)?;
            let scale = field.amplitude / orbit.to;
            field.profile = Profile::Orbit { orbit: Box::new(orbit), sys, scale };
        }
        field.check_channel()?;
        Ok(field)
    }

    /// Field driven by the closed-form `tanh` profile of the truncated equation.
    pub fn closed_form(model: &WaterwaveModel, eps: f64) -> Result<Self> {
        let mut field = Self::base(model, eps)?;
        if eps != 0.0 {
            field.profile = Profile::Tanh { kappa: field.lambda1 * eps.abs() };
        }
        field.check_channel()?;
        Ok(field)
    }

    fn base(model: &WaterwaveModel, eps: f64) -> Result<Self> {
        if !eps.is_finite() {
            return Err(Error::InvalidParameter(format!("epsilon must be finite, got {eps}")));
        }
        let (h0, c0) = (model.h0(), model.c0.to_f64());
        let state = if eps == 0.0 {
            ConjugateSolution { h: h0, hp: h0, c: c0, residual: 0.0, iterations: 0 }
        } else {
            model.flows.continue_to(&model.series, eps)?
        };
        Ok(Self {
            eps,
            h: state.h,
            hp: state.hp,
            c: state.c,
            rho: model.rho(),
            omega: model.omega(),
            amplitude: state.hp - state.h,
            lambda1: model.coefficients.lambda1_sq.to_f64().sqrt(),
            critical_hypothesis: model.admissibility.critical_layer,
            h0,
            c0,
            a1: model.coefficients.a1.to_f64(),
            profile: Profile::Flat,
        })
    }

    fn check_channel(&self) -> Result<()> {
        for k in 0..=4000 {
            let x = -WINDOW + 2.0 * WINDOW * k as f64 / 4000.0;
            let top = self.h + self.interface_scaled(x).eta;
            if !(top > 0.0 && top < 1.0) {
                return Err(Error::InterfaceExitsChannel { x: x / self.scale() });
            }
        }
        Ok(())
    }

    /// Conversion factor `X = scale·x`; `|ε|`, or 1 when `ε = 0`.
    pub fn scale(&self) -> f64 {
        if self.eps == 0.0 {
            1.0
        } else {
            self.eps.abs()
        }
    }

    /// Lower-layer flux `m₁ = ch`.
    pub fn m1(&self) -> f64 {
        self.c * self.h
    }

    /// Upper-layer flux `m₂ = c(1−h) + ω(1−h)²/2`.
    pub fn m2(&self) -> f64 {
        let d = 1.0 - self.h;
        self.c * d + 0.5 * self.omega * d * d
    }

    /// Bernoulli jump `Q = (ρ−1)c²/2` of the upstream state.
    pub fn bernoulli(&self) -> f64 {
        0.5 * (self.rho - 1.0) * self.c * self.c
    }

    /// `η` and its derivatives at unscaled `x`.
    pub fn interface(&self, x: f64) -> Interface {
        self.interface_scaled(x * self.scale())
    }

    /// `η` and its unscaled `x`-derivatives at scaled `X`.
    pub fn interface_scaled(&self, xs: f64) -> Interface {
        match &self.profile {
            Profile::Flat => Interface { eta: 0.0, eta_x: 0.0, eta_xx: 0.0 },
            Profile::Tanh { kappa } => {
                let z = xs * self.lambda1;
                let (t, s2) = (z.tanh(), sech2(z));
                let a = self.amplitude;
                Interface { eta: 0.5 * a * (1.0 + t), eta_x: 0.5 * a * kappa * s2, eta_xx: -a * kappa * kappa * t * s2 }
            }
            Profile::Orbit { orbit, sys, scale } => {
                if xs < orbit.x_lo {
                    return Interface { eta: 0.0, eta_x: 0.0, eta_xx: 0.0 };
                }
                if xs > orbit.x_hi {
                    return Interface { eta: self.amplitude, eta_x: 0.0, eta_xx: 0.0 };
                }
                let [v, w] = orbit.eval(xs);
                let e = self.eps.abs();
                Interface { eta: scale * v, eta_x: scale * e * w, eta_xx: scale * e * e * sys.f(v, w) }
            }
        }
    }

    /// Layer containing `(X, Y)`; points on the interface count as lower.
    pub fn layer_at(&self, xs: f64, y: f64) -> Layer {
        if y <= self.h + self.interface_scaled(xs).eta {
            Layer::Lower
        } else {
            Layer::Upper
        }
    }

    /// Lower-layer stream function at unscaled `x`.
    pub fn psi1(&self, x: f64, y: f64) -> StreamValue {
        self.lower(self.interface(x), y)
    }

    /// Upper-layer stream function at unscaled `x`.
    pub fn psi2(&self, x: f64, y: f64) -> StreamValue {
        self.upper(self.interface(x), y)
    }

    fn lower(&self, i: Interface, y: f64) -> StreamValue {
        let (h, c) = (self.h, self.c);
        let d = h + i.eta;
        let g = i.eta / d;
        let g1 = i.eta_x * h / (d * d);
        let g2 = h * (i.eta_xx * d - 2.0 * i.eta_x * i.eta_x) / (d * d * d);
        StreamValue {
            psi: -c * (y - h) + c * y * g,
            psi_x: c * y * g1,
            psi_y: -c + c * g,
            psi_xx: c * y * g2,
            psi_yy: 0.0,
        }
    }

    fn upper(&self, i: Interface, y: f64) -> StreamValue {
        let (h, c, w) = (self.h, self.c, self.omega);
        let e = 1.0 - h - i.eta;
        let k = i.eta / e;
        let k1 = i.eta_x * (1.0 - h) / (e * e);
        let k2 = (1.0 - h) * (i.eta_xx * e + 2.0 * i.eta_x * i.eta_x) / (e * e * e);
        let s = y - h;
        StreamValue {
            psi: -c * s - 0.5 * w * s * s + c * (1.0 - y) * k,
            psi_x: c * (1.0 - y) * k1,
            psi_y: -c - w * s - c * k,
            psi_xx: c * (1.0 - y) * k2,
            psi_yy: -w,
        }
    }

    /// Stream function of the layer containing `(x, Y)`.
    pub fn psi(&self, x: f64, y: f64) -> StreamValue {
        let i = self.interface(x);
        if y <= self.h + i.eta {
            self.lower(i, y)
        } else {
            self.upper(i, y)
        }
    }

    /// Upstream closed forms `ψ₁⁻ = −c(Y−h)` and `ψ₂⁻ = −c(Y−h) − ω(Y−h)²/2`.
    pub fn upstream(&self, y: f64) -> (f64, f64) {
        let s = y - self.h;
        (-self.c * s, -self.c * s - 0.5 * self.omega * s * s)
    }

    /// Sup-norm residuals sampled on `nx` scaled positions across the window.
    pub fn residuals(&self, nx: usize) -> FieldResiduals {
        let ny = 17;
        let q = self.bernoulli();
        let mut r = FieldResiduals { eps: self.eps, ..FieldResiduals::default() };
        for k in 0..nx {
            let xs = -WINDOW + 2.0 * WINDOW * k as f64 / (nx - 1) as f64;
            let i = self.interface_scaled(xs);
            let top = self.h + i.eta;
            for j in 1..ny {
                let t = j as f64 / ny as f64;
                let lo = self.lower(i, t * top);
                r.laplace_lower = r.laplace_lower.max((lo.psi_xx + lo.psi_yy).abs());
                let up = self.upper(i, top + t * (1.0 - top));
                r.laplace_upper = r.laplace_upper.max((up.psi_xx + up.psi_yy + self.omega).abs());
            }
            let (a, b) = (self.lower(i, top), self.upper(i, top));
            r.kinematic_interface = r.kinematic_interface.max(a.psi.abs()).max(b.psi.abs());
            r.lower_wall = r.lower_wall.max((self.lower(i, 0.0).psi - self.m1()).abs());
            r.upper_wall = r.upper_wall.max((self.upper(i, 1.0).psi + self.m2()).abs());
            let dynamic = 0.5 * self.rho * (b.psi_x * b.psi_x + b.psi_y * b.psi_y)
                - 0.5 * (a.psi_x * a.psi_x + a.psi_y * a.psi_y)
                + (self.rho - 1.0) * i.eta
                - q;
            r.dynamic = r.dynamic.max(dynamic.abs());
        }
        r
    }

    /// Flow force on the vertical slice at scaled `X`, by Gauss quadrature in each layer.
    pub fn flow_force_slice(&self, xs: f64) -> f64 {
        let i = self.interface_scaled(xs);
        let top = self.h + i.eta;
        let k = 0.5 * self.c * self.c + self.h;
        let lower = gauss_integrate(
            |y| {
                let p = self.lower(i, y);
                0.5 * (p.psi_y * p.psi_y - p.psi_x * p.psi_x) - y + k
            },
            0.0,
            top,
            4,
        );
        let upper = gauss_integrate(
            |y| {
                let p = self.upper(i, y);
                0.5 * (p.psi_y * p.psi_y - p.psi_x * p.psi_x) - y - self.omega * p.psi + k
            },
            top,
            1.0,
            4,
        );
        lower + self.rho * upper
    }

    /// Spread `max − min` of the flow force over `n` slices across the window.
    pub fn flow_force_drift(&self, n: usize) -> f64 {
        let values: Vec<f64> =
            (0..n).map(|k| self.flow_force_slice(-WINDOW + 2.0 * WINDOW * k as f64 / (n - 1) as f64)).collect();
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min
    }

    fn require_critical(&self) -> Result<()> {
        if self.omega == 0.0 {
            return Err(Error::NoCriticalLayer("the flow is irrotational".into()));
        }
        if !self.critical_hypothesis {
            return Err(Error::NoCriticalLayer("c0(c0 + (1 - h0) omega) is not negative".into()));
        }
        Ok(())
    }

    /// Height where `ψ₂Y` vanishes above the interface `i`, by Newton from the upstream height.
    fn critical_height(&self, i: Interface) -> f64 {
        let mut y = self.h - self.c / self.omega;
        for _ in 0..4 {
            let p = self.upper(i, y);
            let step = p.psi_y / p.psi_yy;
            y -= step;
            if step.abs() <= 1e-15 {
                break;
            }
        }
        y
    }

    /// Samples the critical layer on `n` scaled positions across the window.
    pub fn critical_layer(&self, n: usize) -> Result<CriticalLayer> {
        self.require_critical()?;
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        let mut sign_pattern_ok = true;
        let above = -self.omega.signum();
        for k in 0..n {
            let x = -WINDOW + 2.0 * WINDOW * k as f64 / (n - 1) as f64;
            let i = self.interface_scaled(x);
            let y = self.critical_height(i);
            if !(y > self.h + i.eta && y < 1.0) {
                return Err(Error::NoCriticalLayer(format!("root leaves the upper layer at X = {x:.6}")));
            }
            let d = 1e-6;
            sign_pattern_ok &= self.upper(i, y + d).psi_y * above > 0.0 && self.upper(i, y - d).psi_y * above < 0.0;
            xs.push(x);
            ys.push(y);
        }
        let zero = Interface { eta: 0.0, eta_x: 0.0, eta_xx: 0.0 };
        let far = Interface { eta: self.amplitude, ..zero };
        Ok(CriticalLayer {
            xs,
            ys,
            upstream: self.critical_height(zero),
            downstream: self.critical_height(far),
            psi_yy: -self.omega,
            sign_pattern_ok,
        })
    }

    /// Critical-layer height at scaled `X`.
    pub fn critical_height_at(&self, xs: f64) -> Result<f64> {
        self.require_critical()?;
        Ok(self.critical_height(self.interface_scaled(xs)))
    }

    /// Downstream heights where `ψ₂` attains the critical level `c²/(2ω)`.
    pub fn eye_bounds(&self) -> Result<EyeRegion> {
        self.require_critical()?;
        let far = Interface { eta: self.amplitude, eta_x: 0.0, eta_xx: 0.0 };
        let level = self.c * self.c / (2.0 * self.omega);
        let center = self.critical_height(far);
        let top = self.h + self.amplitude;
        if !(center > top && center < 1.0) {
            return Err(Error::NoCriticalLayer("downstream critical point leaves the upper layer".into()));
        }
        let g = |y: f64| self.upper(far, y).psi - level;
        let gc = g(center);
        let closed_form = self.closed_form_bounds();
        if gc.abs() <= 1e-15 * (1.0 + level.abs()) {
            return Ok(EyeRegion { level, lower: center, upper: center, center, half_width: 0.0, closed_form });
        }
        if gc * self.omega <= 0.0 {
            return Err(Error::EyeAbsent(format!("critical level not attained downstream (gap {gc:.3e})")));
        }
        if g(top) * gc > 0.0 || g(1.0) * gc > 0.0 {
            return Err(Error::EyeAbsent("bounding streamline leaves the upper layer".into()));
        }
        let lower = brent(|y| Ok(g(y)), top, center, 1e-15)?;
        let upper = brent(|y| Ok(g(y)), center, 1.0, 1e-15)?;
        Ok(EyeRegion { level, lower, upper, center, half_width: 0.5 * (upper - lower), closed_form })
    }

    /// Leading-order eye bounds `Y_c⁰ ± (1/ω)√(2c₀(c₀+ω(1−h₀))a₁ε/(1−h₀))`, when the radicand is positive.
    pub fn closed_form_bounds(&self) -> Option<(f64, f64)> {
        let (h0, c0, w) = (self.h0, self.c0, self.omega);
        let radicand = 2.0 * c0 * (c0 + w * (1.0 - h0)) * self.a1 * self.eps / (1.0 - h0);
        if !(radicand >= 0.0) || w == 0.0 {
            return None;
        }
        let yc = h0 - c0 / w;
        let r = radicand.sqrt() / w.abs();
        Some((yc - r, yc + r))
    }

    /// Signs of `ηₓ` and interior `ψₓ` on an `nx × ny` grid.
    pub fn monotonicity(&self, nx: usize, ny: usize) -> Monotonicity {
        let mut m = Monotonicity {
            eta_x_min: f64::INFINITY,
            eta_x_max: f64::NEG_INFINITY,
            psi_x_min: f64::INFINITY,
            psi_x_max: f64::NEG_INFINITY,
            sign: MonotoneSign::Trivial,
            pass: false,
        };
        for k in 0..nx {
            let xs = -WINDOW + 2.0 * WINDOW * k as f64 / (nx - 1) as f64;
            let i = self.interface_scaled(xs);
            m.eta_x_min = m.eta_x_min.min(i.eta_x);
            m.eta_x_max = m.eta_x_max.max(i.eta_x);
            let top = self.h + i.eta;
            for j in 1..ny {
                let t = j as f64 / ny as f64;
                let a = self.lower(i, t * top).psi_x;
                let b = self.upper(i, top + t * (1.0 - top)).psi_x;
                m.psi_x_min = m.psi_x_min.min(a.min(b));
                m.psi_x_max = m.psi_x_max.max(a.max(b));
            }
        }
        let all = [m.eta_x_min, m.eta_x_max, m.psi_x_min, m.psi_x_max];
        m.sign = if all.iter().all(|v| *v == 0.0) {
            MonotoneSign::Trivial
        } else if m.eta_x_max < 0.0 && m.psi_x_max < 0.0 {
            MonotoneSign::Decreasing
        } else if m.eta_x_min > 0.0 && m.psi_x_min > 0.0 {
            MonotoneSign::Increasing
        } else {
            MonotoneSign::Mixed
        };
        m.pass = m.sign != MonotoneSign::Mixed;
        m
    }

    /// Level function of `layer` in scaled coordinates: `(F, F_X, F_Y)`.
    fn level_fn(&self, layer: Layer, xs: f64, y: f64) -> (f64, f64, f64) {
        let i = self.interface_scaled(xs);
        let p = match layer {
            Layer::Upper => self.upper(i, y),
            _ => self.lower(i, y),
        };
        (p.psi, p.psi_x / self.scale(), p.psi_y)
    }

    /// Traces the streamline through the scaled seed `(X, Y)` in both directions and classifies it.
    pub fn streamline(&self, seed: [f64; 2], opts: &TraceOptions) -> Result<Streamline> {
        let [xs, y] = seed;
        if !(y > 0.0 && y < 1.0) || xs.abs() > opts.window {
            return Err(Error::InvalidParameter(format!("seed ({xs}, {y}) is outside the fluid window")));
        }
        let top = self.h + self.interface_scaled(xs).eta;
        let layer = if (y - top).abs() <= 1e-12 {
            Layer::Interface
        } else if y < top {
            Layer::Lower
        } else {
            Layer::Upper
        };
        let level = if layer == Layer::Interface { 0.0 } else { self.level_fn(layer, xs, y).0 };
        let start = if layer == Layer::Interface { [xs, top] } else { seed };
        let (fwd, exit_f) = self.trace_half(layer, level, start, 1.0, opts);
        let (bwd, exit_b) = self.trace_half(layer, level, start, -1.0, opts);
        let mut points: Vec<[f64; 2]> = bwd.into_iter().rev().collect();
        points.pop();
        points.extend(fwd);
        let turning_points = self.turning_points(layer, &points);
        let kind = classify(exit_b, exit_f, &turning_points);
        Ok(Streamline { seed, level, layer, points, exits: [exit_b, exit_f], turning_points, kind })
    }

    fn trace_half(&self, layer: Layer, level: f64, start: [f64; 2], sense: f64, opts: &TraceOptions) -> (Vec<[f64; 2]>, Exit) {
        let tangent = |p: [f64; 2]| {
            let (_, fx, fy) = self.level_fn(layer, p[0], p[1]);
            let n = fx.hypot(fy);
            [fy / n, -fx / n]
        };
        let mut p = start;
        let mut t = tangent(p);
        t = [sense * t[0], sense * t[1]];
        let mut pts = vec![p];
        let mut step = opts.step;
        let tol = 1e-13 * (1.0 + level.abs());
        let mut accepted = 0usize;
        loop {
            if accepted >= opts.max_steps {
                return (pts, Exit::Budget);
            }
            let mut q = [p[0] + step * t[0], p[1] + step * t[1]];
            let mut ok = false;
            for _ in 0..12 {
                let (f, fx, fy) = self.level_fn(layer, q[0], q[1]);
                let g2 = fx * fx + fy * fy;
                let r = f - level;
                q = [q[0] - r * fx / g2, q[1] - r * fy / g2];
                if r.abs() <= tol {
                    ok = true;
                    break;
                }
            }
            let mut tn = tangent(q);
            if tn[0] * t[0] + tn[1] * t[1] < 0.0 {
                tn = [-tn[0], -tn[1]];
            }
            let dist = (q[0] - p[0]).hypot(q[1] - p[1]);
            let turn = (tn[0] * t[0] + tn[1] * t[1]).clamp(-1.0, 1.0).acos();
            if !ok || !q[0].is_finite() || dist > 2.0 * step || turn > 0.2 {
                step *= 0.5;
                if step < opts.step * 1e-7 {
                    return (pts, Exit::Stalled);
                }
                continue;
            }
            p = q;
            t = tn;
            pts.push(p);
            accepted += 1;
            if turn < 0.05 {
                step = (2.0 * step).min(opts.step);
            }
            if p[0] > opts.window {
                return (pts, Exit::Right);
            }
            if p[0] < -opts.window {
                return (pts, Exit::Left);
            }
            if p[1] <= 0.0 || p[1] >= 1.0 {
                return (pts, Exit::Wall);
            }
            if layer != Layer::Interface && self.layer_at(p[0], p[1]) != layer {
                return (pts, Exit::Interface);
            }
        }
    }

    /// Local extrema of `X` along the polyline, refined by a parabola `X(Y)` through three points.
    fn turning_points(&self, layer: Layer, pts: &[[f64; 2]]) -> Vec<TurningPoint> {
        let mut out = Vec::new();
        for k in 1..pts.len().saturating_sub(1) {
            let (a, b, c) = (pts[k - 1], pts[k], pts[k + 1]);
            let is_min = b[0] < a[0] && b[0] <= c[0];
            let is_max = b[0] > a[0] && b[0] >= c[0];
            if !(is_min || is_max) {
                continue;
            }
            let (y, x) = parabola_vertex([a[1], b[1], c[1]], [a[0], b[0], c[0]]).unwrap_or((b[1], b[0]));
            let critical_offset = match layer {
                Layer::Upper => self.critical_height_at(x).ok().map(|yc| (y - yc).abs()),
                _ => None,
            };
            out.push(TurningPoint { x, y, critical_offset });
        }
        out
    }
}

/// Vertex `(u*, v(u*))` of the parabola `v(u)` through three points.
fn parabola_vertex(u: [f64; 3], v: [f64; 3]) -> Option<(f64, f64)> {
    let d1 = (v[1] - v[0]) / (u[1] - u[0]);
    let d2 = (v[2] - v[1]) / (u[2] - u[1]);
    let a = (d2 - d1) / (u[2] - u[0]);
    if !a.is_finite() || a == 0.0 {
        return None;
    }
    let b = d1 - a * (u[0] + u[1]);
    let us = -b / (2.0 * a);
    let vs = v[0] + (us - u[0]) * (d1 + a * (us - u[1]));
    Some((us, vs))
}

fn classify(back: Exit, front: Exit, turning: &[TurningPoint]) -> StreamlineKind {
    match (back, front, turning) {
        (Exit::Left, Exit::Right, []) | (Exit::Right, Exit::Left, []) => StreamlineKind::Through,
        (Exit::Right, Exit::Right, [tp]) | (Exit::Left, Exit::Left, [tp])
            if tp.critical_offset.is_some_and(|d| d <= TURNING_TOL) =>
        {
            StreamlineKind::Eye
        }
        _ => StreamlineKind::Truncated,
    }
}

/// Sup-norm residuals of the reconstructed field.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct FieldResiduals {
    pub eps: f64,
    /// `|Δψ₁|` in the lower layer.
    pub laplace_lower: f64,
    /// `|Δψ₂ + ω|` in the upper layer.
    pub laplace_upper: f64,
    /// `max(|ψ₁|, |ψ₂|)` on `Y = h + η`.
    pub kinematic_interface: f64,
    /// `|ψ₁ − m₁|` on `Y = 0`.
    pub lower_wall: f64,
    /// `|ψ₂ + m₂|` on `Y = 1`.
    pub upper_wall: f64,
    /// `|½ρ|∇ψ₂|² − ½|∇ψ₁|² + (ρ−1)η − Q|` on the interface.
    pub dynamic: f64,
}

impl FieldResiduals {
    pub fn max(&self) -> f64 {
        [self.laplace_lower, self.laplace_upper, self.kinematic_interface, self.lower_wall, self.upper_wall, self.dynamic]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Sampled critical layer `ψ₂Y(X, Y_c(X)) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalLayer {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// `Y_c⁻ = h − c/ω`.
    pub upstream: f64,
    pub downstream: f64,
    /// `ψ₂YY = −ω` along the curve.
    pub psi_yy: f64,
    /// `ψ₂Y` has the sign of `−ω` above the curve and the opposite sign below.
    pub sign_pattern_ok: bool,
}

/// Downstream extent of the half cat's eye.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EyeRegion {
    /// Critical streamline level `c²/(2ω)`.
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
    /// Downstream critical height.
    pub center: f64,
    pub half_width: f64,
    pub closed_form: Option<(f64, f64)>,
}

/// Sign of the horizontal derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MonotoneSign {
    Decreasing,
    Increasing,
    Trivial,
    Mixed,
}

/// Extremes of `ηₓ` and `ψₓ` on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Monotonicity {
    pub eta_x_min: f64,
    pub eta_x_max: f64,
    pub psi_x_min: f64,
    pub psi_x_max: f64,
    pub sign: MonotoneSign,
    pub pass: bool,
}

/// Tracer settings in scaled coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    pub step: f64,
    pub window: f64,
    pub max_steps: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self { step: TRACE_STEP, window: WINDOW, max_steps: 2_000_000 }
    }
}

/// How a traced half-streamline ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Exit {
    Left,
    Right,
    Wall,
    Interface,
    Budget,
    Stalled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StreamlineKind {
    Eye,
    Through,
    /// The trace left the domain or stopped early.
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TurningPoint {
    pub x: f64,
    pub y: f64,
    /// Vertical distance to the critical layer at the same `X`.
    pub critical_offset: Option<f64>,
}

/// Classified level-set trace in scaled coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Streamline {
    pub seed: [f64; 2],
    pub level: f64,
    pub layer: Layer,
    pub points: Vec<[f64; 2]>,
    /// Exits of the backward and forward halves.
    pub exits: [Exit; 2],
    pub turning_points: Vec<TurningPoint>,
    pub kind: StreamlineKind,
}

impl Streamline {
    /// Bounded on the left and unbounded on the right.
    pub fn opens_right(&self) -> bool {
        self.exits == [Exit::Right, Exit::Right]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waterwave::Preset;

    #[test]
    fn vertex_of_exact_parabola() {
        let v = |u: f64| 3.0 * (u - 0.25) * (u - 0.25) - 1.0;
        let (u, w) = parabola_vertex([0.0, 0.4, 1.1], [v(0.0), v(0.4), v(1.1)]).unwrap();
        assert!((u - 0.25).abs() < 1e-14 && (w + 1.0).abs() < 1e-14);
    }

    #[test]
    fn flat_field_is_upstream() {
        let m = WaterwaveModel::from_preset(Preset::Homogeneous).unwrap();
        let f = WaveField::reconstruct(&m, 0.0).unwrap();
        for y in [0.1, 0.5, 0.9] {
            let (a, b) = f.upstream(y);
            assert_eq!(f.psi1(3.0, y).psi, a);
            assert_eq!(f.psi2(-3.0, y).psi, b);
        }
    }
}
