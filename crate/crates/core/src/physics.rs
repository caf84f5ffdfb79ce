//! Euler state algebra: conversions, the entropy pair, entropy variables and
//! potentials, physical fluxes, wave speeds, and the entropy-conservative and
//! local Lax-Friedrichs numerical fluxes.
//!
//! Everything is a pure function of one or two states; gamma = 1.4 throughout.

use crate::error::{Error, Result};
use std::ops::{Add, Mul, Neg, Sub};

pub const GAMMA: f64 = 1.4;

/// Density/pressure floor below which a state counts as inadmissible.
pub const ADMISSIBILITY_EPS: f64 = 1e-13;

/// Conservative variables (rho, rho*u, rho*v, E) at one nodal point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub rho: f64,
    pub mx: f64,
    pub my: f64,
    pub e: f64,
}

impl State {
    pub const ZERO: State = State {
        rho: 0.0,
        mx: 0.0,
        my: 0.0,
        e: 0.0,
    };

    pub fn new(rho: f64, mx: f64, my: f64, e: f64) -> Self {
        State { rho, mx, my, e }
    }

    /// Builds a conservative state from primitive variables (rho, u, v, p).
    pub fn from_primitive(rho: f64, u: f64, v: f64, p: f64) -> Self {
        State {
            rho,
            mx: rho * u,
            my: rho * v,
            e: p / (GAMMA - 1.0) + 0.5 * rho * (u * u + v * v),
        }
    }

    #[inline]
    pub fn u(&self) -> f64 {
        self.mx / self.rho
    }

    #[inline]
    pub fn v(&self) -> f64 {
        self.my / self.rho
    }

    #[inline]
    pub fn pressure(&self) -> f64 {
        (GAMMA - 1.0) * (self.e - 0.5 * (self.mx * self.mx + self.my * self.my) / self.rho)
    }

    #[inline]
    pub fn sound_speed(&self) -> f64 {
        (GAMMA * self.pressure() / self.rho).sqrt()
    }

    /// Physical specific entropy s = log(p rho^-gamma).
    #[inline]
    pub fn specific_entropy(&self) -> f64 {
        self.pressure().ln() - GAMMA * self.rho.ln()
    }

    #[inline]
    pub fn is_admissible(&self) -> bool {
        self.rho >= ADMISSIBILITY_EPS && self.pressure() >= ADMISSIBILITY_EPS
    }

    pub fn validate(&self) -> Result<()> {
        if !self.rho.is_finite() || !self.e.is_finite() {
            return Err(Error::admissibility("non-finite state"));
        }
        if self.rho < ADMISSIBILITY_EPS {
            return Err(Error::admissibility(format!(
                "density {} below floor {}",
                self.rho, ADMISSIBILITY_EPS
            )));
        }
        let p = self.pressure();
        if p < ADMISSIBILITY_EPS {
            return Err(Error::admissibility(format!(
                "pressure {} below floor {}",
                p, ADMISSIBILITY_EPS
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn as_array(&self) -> [f64; 4] {
        [self.rho, self.mx, self.my, self.e]
    }

    #[inline]
    pub fn from_array(a: [f64; 4]) -> Self {
        State::new(a[0], a[1], a[2], a[3])
    }

    #[inline]
    pub fn component(&self, k: usize) -> f64 {
        match k {
            0 => self.rho,
            1 => self.mx,
            2 => self.my,
            _ => self.e,
        }
    }
}

impl Add for State {
    type Output = State;
    fn add(self, rhs: State) -> State {
        State::new(
            self.rho + rhs.rho,
            self.mx + rhs.mx,
            self.my + rhs.my,
            self.e + rhs.e,
        )
    }
}

impl Sub for State {
    type Output = State;
    fn sub(self, rhs: State) -> State {
        State::new(
            self.rho - rhs.rho,
            self.mx - rhs.mx,
            self.my - rhs.my,
            self.e - rhs.e,
        )
    }
}

impl Mul<State> for f64 {
    type Output = State;
    fn mul(self, s: State) -> State {
        State::new(self * s.rho, self * s.mx, self * s.my, self * s.e)
    }
}

impl Neg for State {
    type Output = State;
    fn neg(self) -> State {
        State::new(-self.rho, -self.mx, -self.my, -self.e)
    }
}

/// Entropy variables V = d(eta)/dU for eta = -rho s / (gamma - 1).
#[derive(Debug, Clone, Copy)]
pub struct EntropyVars {
    pub v: [f64; 4],
}

/// Cartesian flux pair (f, g).
#[derive(Debug, Clone, Copy)]
pub struct FluxPair {
    pub f: [f64; 4],
    pub g: [f64; 4],
}

/// Physical flux tensor of the 2D Euler equations.
pub fn physical_flux(state: &State) -> FluxPair {
    let u = state.u();
    let v = state.v();
    let p = state.pressure();
    FluxPair {
        f: [
            state.mx,
            state.mx * u + p,
            state.my * u,
            (state.e + p) * u,
        ],
        g: [
            state.my,
            state.mx * v,
            state.my * v + p,
            (state.e + p) * v,
        ],
    }
}

/// Entropy pair (eta, q) with eta = -rho s/(gamma-1) and q = eta * (u, v).
pub fn entropy_pair(state: &State) -> (f64, f64, f64) {
    let s = state.specific_entropy();
    let eta = -state.rho * s / (GAMMA - 1.0);
    (eta, eta * state.u(), eta * state.v())
}

/// Entropy variables for the pair above:
/// V = ((gamma - s)/(gamma - 1) - rho |u|^2 / (2p), rho u / p, rho v / p, -rho / p).
pub fn entropy_variables(state: &State) -> EntropyVars {
    let s = state.specific_entropy();
    let p = state.pressure();
    let u = state.u();
    let v = state.v();
    let rho_over_p = state.rho / p;
    EntropyVars {
        v: [
            (GAMMA - s) / (GAMMA - 1.0) - 0.5 * rho_over_p * (u * u + v * v),
            rho_over_p * u,
            rho_over_p * v,
            -rho_over_p,
        ],
    }
}

/// Inverse of [`entropy_variables`] on admissible states.
pub fn state_from_entropy(vars: &EntropyVars) -> State {
    let [v1, v2, v3, v4] = vars.v;
    let u = -v2 / v4;
    let v = -v3 / v4;
    let s = GAMMA - (GAMMA - 1.0) * (v1 - 0.5 * (v2 * v2 + v3 * v3) / v4);
    let rho = (-(s + (-v4).ln()) / (GAMMA - 1.0)).exp();
    let p = rho / (-v4);
    State::from_primitive(rho, u, v, p)
}

/// Entropy potential and potential fluxes: phi = U.V - eta, psi = (rho u, rho v).
pub fn entropy_potentials(state: &State) -> (f64, f64, f64) {
    let vars = entropy_variables(state);
    let (eta, _, _) = entropy_pair(state);
    let u = state.as_array();
    let phi = u[0] * vars.v[0] + u[1] * vars.v[1] + u[2] * vars.v[2] + u[3] * vars.v[3] - eta;
    (phi, state.mx, state.my)
}

/// Logarithmic mean (a - b) / (log a - log b) with a series branch near a = b.
///
/// The branch test and both branches are symmetric in (a, b), so
/// log_mean(a, b) == log_mean(b, a) bitwise.
pub fn log_mean(a: f64, b: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    let u = (a - b) / (a + b);
    let u2 = u * u;
    if u2 < 2.5e-5 {
        // log(a/b) = 2 atanh(u); truncation below 1e-16 for |u| < 5e-3.
        (0.5 * (a + b)) / (1.0 + u2 * (1.0 / 3.0 + u2 * (0.2 + u2 / 7.0)))
    } else {
        (a - b) / (a.ln() - b.ln())
    }
}

/// Entropy-conservative, kinetic-energy-preserving two-point flux.
pub fn ec_flux(left: &State, right: &State) -> FluxPair {
    if left == right {
        // Consistency is exact; taking the physical flux here keeps the
        // flux-differencing volume term at exactly zero for constant states.
        return physical_flux(left);
    }
    let ul = left.u();
    let vl = left.v();
    let ur = right.u();
    let vr = right.v();
    let pl = left.pressure();
    let pr = right.pressure();
    let beta_l = left.rho / (2.0 * pl);
    let beta_r = right.rho / (2.0 * pr);

    let rho_log = log_mean(left.rho, right.rho);
    let beta_log = log_mean(beta_l, beta_r);
    let rho_avg = 0.5 * (left.rho + right.rho);
    let beta_avg = 0.5 * (beta_l + beta_r);
    let u_avg = 0.5 * (ul + ur);
    let v_avg = 0.5 * (vl + vr);
    let u2_avg = 0.5 * (ul * ul + ur * ur);
    let v2_avg = 0.5 * (vl * vl + vr * vr);

    let p_hat = rho_avg / (2.0 * beta_avg);
    let h_hat = 0.5 / (beta_log * (GAMMA - 1.0)) - 0.5 * (u2_avg + v2_avg)
        + p_hat / rho_log
        + u_avg * u_avg
        + v_avg * v_avg;

    FluxPair {
        f: [
            rho_log * u_avg,
            rho_log * u_avg * u_avg + p_hat,
            rho_log * u_avg * v_avg,
            rho_log * u_avg * h_hat,
        ],
        g: [
            rho_log * v_avg,
            rho_log * u_avg * v_avg,
            rho_log * v_avg * v_avg + p_hat,
            rho_log * v_avg * h_hat,
        ],
    }
}

/// Maximum directional wave speed |u.n| + c.
pub fn wave_speed(state: &State, n: [f64; 2]) -> f64 {
    (state.u() * n[0] + state.v() * n[1]).abs() + state.sound_speed()
}

/// Local Lax-Friedrichs (Rusanov) flux in the unit normal direction.
pub fn llf_flux(left: &State, right: &State, n: [f64; 2]) -> [f64; 4] {
    let fl = physical_flux(left);
    let fr = physical_flux(right);
    let alpha = wave_speed(left, n).max(wave_speed(right, n));
    let mut out = [0.0; 4];
    let dl = right.as_array();
    let ll = left.as_array();
    for k in 0..4 {
        let central = 0.5 * (n[0] * (fl.f[k] + fr.f[k]) + n[1] * (fl.g[k] + fr.g[k]));
        out[k] = central - 0.5 * alpha * (dl[k] - ll[k]);
    }
    out
}
