//! Test-case catalog: initial conditions, exact solutions, and ghost-state
//! rules for the boundary conditions, all pure functions of position and
//! time.

use crate::error::{Error, Result};
use crate::physics::{State, GAMMA};

/// How a boundary tag resolves at flux-evaluation time. Periodic faces never
/// reach this point; they are identified at the mesh level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryKind {
    Inflow(State),
    Outflow,
    SlipWall,
    /// Moving-shock state switch along the top of the double Mach reflection.
    DmrTop,
    /// Post-shock strip then reflecting wall along the bottom of the DMR.
    DmrBottom,
}

/// Identifiers accepted by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseId {
    Vortex,
    Riemann12,
    Riemann13,
    Dmr,
    Freestream,
    CustomMesh,
}

impl CaseId {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "vortex" => Ok(CaseId::Vortex),
            "riemann12" => Ok(CaseId::Riemann12),
            "riemann13" => Ok(CaseId::Riemann13),
            "dmr" => Ok(CaseId::Dmr),
            "freestream" => Ok(CaseId::Freestream),
            "custom-mesh" => Ok(CaseId::CustomMesh),
            other => Err(Error::config(format!(
                "unknown case `{}` (expected vortex | riemann12 | riemann13 | dmr | freestream | custom-mesh)",
                other
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CaseId::Vortex => "vortex",
            CaseId::Riemann12 => "riemann12",
            CaseId::Riemann13 => "riemann13",
            CaseId::Dmr => "dmr",
            CaseId::Freestream => "freestream",
            CaseId::CustomMesh => "custom-mesh",
        }
    }
}

pub const VORTEX_BETA: f64 = 5.0;
pub const VORTEX_BACKGROUND: [f64; 2] = [1.0, 1.0];
/// Period of the vortex domain [-10, 10]^2.
pub const VORTEX_DOMAIN_HALF: f64 = 10.0;

/// Exact isentropic vortex solution with strength beta = 5 advected by the
/// unit diagonal background velocity.
pub fn vortex_exact(x: f64, y: f64, t: f64) -> State {
    let dx = x - VORTEX_BACKGROUND[0] * t;
    let dy = y - VORTEX_BACKGROUND[1] * t;
    vortex_from_offsets(dx, dy)
}

/// Exact vortex solution on the periodic square, with the advection offsets
/// wrapped back into one period. This is the right comparison state once the
/// vortex has crossed the domain boundary.
pub fn vortex_exact_periodic(x: f64, y: f64, t: f64) -> State {
    let period = 2.0 * VORTEX_DOMAIN_HALF;
    let wrap = |d: f64| d - period * (d / period).round();
    let dx = wrap(x - VORTEX_BACKGROUND[0] * t);
    let dy = wrap(y - VORTEX_BACKGROUND[1] * t);
    vortex_from_offsets(dx, dy)
}

fn vortex_from_offsets(dx: f64, dy: f64) -> State {
    use std::f64::consts::PI;
    let r2 = dx * dx + dy * dy;
    let gauss = (0.5 * (1.0 - r2)).exp();
    let u = VORTEX_BACKGROUND[0] - VORTEX_BETA / (2.0 * PI) * dy * gauss;
    let v = VORTEX_BACKGROUND[1] + VORTEX_BETA / (2.0 * PI) * dx * gauss;
    let temperature = 1.0
        - (GAMMA - 1.0) * VORTEX_BETA * VORTEX_BETA / (8.0 * GAMMA * PI * PI) * (1.0 - r2).exp();
    let rho = temperature.powf(1.0 / (GAMMA - 1.0));
    let p = temperature.powf(GAMMA / (GAMMA - 1.0));
    State::from_primitive(rho, u, v, p)
}

/// Quadrant states (rho, u, v, p) of the two 2D Riemann configurations,
/// ordered (x<1/2, y<1/2), (x<1/2, y>1/2), (x>1/2, y<1/2), (x>1/2, y>1/2).
fn riemann_quadrants(case: u8) -> Result<[[f64; 4]; 4]> {
    match case {
        12 => Ok([
            [0.8, 0.0, 0.0, 1.0],
            [1.0, 0.7276, 0.0, 1.0],
            [1.0, 0.0, 0.7276, 1.0],
            [0.5313, 0.0, 0.0, 0.4],
        ]),
        13 => Ok([
            [0.8, 0.1, -0.3, 0.4],
            [0.5197, -0.6259, -0.3, 0.4],
            [0.5313, 0.1, 0.4276, 0.4],
            [1.0, 0.1, -0.3, 1.0],
        ]),
        other => Err(Error::config(format!(
            "unknown Riemann case {} (expected 12 or 13)",
            other
        ))),
    }
}

/// Initial state of the periodically extended Riemann problem on [0, 2]^2:
/// the standard four-quadrant data on [0, 1]^2, mirrored across x = 1 and
/// y = 1.
pub fn riemann_initial(case: u8, x: f64, y: f64) -> Result<State> {
    let quadrants = riemann_quadrants(case)?;
    let xm = if x > 1.0 { 2.0 - x } else { x };
    let ym = if y > 1.0 { 2.0 - y } else { y };
    let idx = match (xm < 0.5, ym < 0.5) {
        (true, true) => 0,
        (true, false) => 1,
        (false, true) => 2,
        (false, false) => 3,
    };
    let [rho, u, v, p] = quadrants[idx];
    Ok(State::from_primitive(rho, u, v, p))
}

/// Post-shock state of the Mach 10 oblique shock used by the double Mach
/// reflection problem.
pub fn dmr_post_shock() -> State {
    let angle = std::f64::consts::PI / 6.0;
    State::from_primitive(8.0, 8.25 * angle.cos(), -8.25 * angle.sin(), 116.5)
}

/// Quiescent pre-shock state of the DMR problem.
pub fn dmr_pre_shock() -> State {
    State::from_primitive(1.4, 0.0, 0.0, 1.0)
}

/// Initial oblique shock through (1/6, 0) at 60 degrees.
pub fn dmr_initial(x: f64, y: f64) -> State {
    if x < 1.0 / 6.0 + y / 3.0_f64.sqrt() {
        dmr_post_shock()
    } else {
        dmr_pre_shock()
    }
}

/// Exterior state along the top boundary: post-shock behind the moving
/// front x = 1/6 + (1 + 20 t)/sqrt(3), pre-shock ahead of it.
pub fn dmr_top_boundary(x: f64, t: f64) -> State {
    if x < 1.0 / 6.0 + (1.0 + 20.0 * t) / 3.0_f64.sqrt() {
        dmr_post_shock()
    } else {
        dmr_pre_shock()
    }
}

/// Mirrors the velocity about a wall with outward unit normal `n`.
pub fn mirror_state(interior: &State, n: [f64; 2]) -> State {
    let un = interior.mx * n[0] + interior.my * n[1];
    State::new(
        interior.rho,
        interior.mx - 2.0 * un * n[0],
        interior.my - 2.0 * un * n[1],
        interior.e,
    )
}

/// Exterior trace used by the interface flux at a boundary node.
///
/// `n` is the outward unit normal and `pos` the physical node position; the
/// DMR rules need the position and time.
pub fn ghost_state(
    kind: BoundaryKind,
    interior: &State,
    n: [f64; 2],
    pos: [f64; 2],
    t: f64,
) -> State {
    match kind {
        BoundaryKind::Inflow(state) => state,
        BoundaryKind::Outflow => *interior,
        BoundaryKind::SlipWall => mirror_state(interior, n),
        BoundaryKind::DmrTop => dmr_top_boundary(pos[0], t),
        BoundaryKind::DmrBottom => {
            if pos[0] < 1.0 / 6.0 {
                dmr_post_shock()
            } else {
                mirror_state(interior, n)
            }
        }
    }
}
