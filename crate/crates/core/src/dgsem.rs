//! Semidiscrete residual assembly: entropy-stable split-form volume terms
//! with averaged metrics, the baseline strong-form volume terms, and surface
//! terms with numerical fluxes.
//!
//! The split-form volume term is written in flux-differencing form with the
//! pointwise flux subtracted, `sum_{i != p} 2 D_{p,i} (ftilde#_{(i,p)} -
//! ftilde_p)`. This is algebraically identical to the plain two-point sum
//! (zero row sums plus flux consistency) and makes the volume term vanish
//! exactly for constant states on constant-metric elements.
//!
//! Interface fluxes are evaluated once per face in scaled-normal form and
//! deposited with opposite signs to both sides, so conservation across a
//! face is exact by construction rather than by cancellation of separately
//! computed values.

use crate::cases::{ghost_state, BoundaryKind};
use crate::error::{Error, Result};
use crate::mesh::{matched_node, node_index, side_node, ElementGeometry, FaceKind, Mesh, MetricTerms};
use crate::par;
use crate::physics::{ec_flux, physical_flux, wave_speed, FluxPair, State};
use crate::refops::ReferenceOperators;
use std::collections::HashMap;

/// Nodal states of one element, row-major with the xi index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementSolution {
    pub nodal: Vec<State>,
}

impl ElementSolution {
    pub fn constant(degree: usize, state: State) -> Self {
        ElementSolution {
            nodal: vec![state; (degree + 1) * (degree + 1)],
        }
    }
}

/// The global DG solution: one [`ElementSolution`] per mesh element plus the
/// simulation time.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub elements: Vec<ElementSolution>,
    pub time: f64,
}

impl FieldState {
    /// Samples a pointwise function at every node of the mesh.
    pub fn sample(mesh: &Mesh, f: impl Fn(f64, f64) -> State + Sync) -> Self {
        let elements = par::map_collect(mesh.n_elements(), |e| ElementSolution {
            nodal: mesh.elements[e]
                .coords
                .iter()
                .map(|c| f(c[0], c[1]))
                .collect(),
        });
        FieldState {
            elements,
            time: 0.0,
        }
    }

    pub fn constant(mesh: &Mesh, state: State) -> Self {
        FieldState {
            elements: vec![ElementSolution::constant(mesh.degree, state); mesh.n_elements()],
            time: 0.0,
        }
    }

    /// Minimum nodal density and pressure over the whole field.
    pub fn min_density_pressure(&self) -> (f64, f64) {
        let partials = par::map_collect(self.elements.len(), |e| {
            let mut rho = f64::INFINITY;
            let mut p = f64::INFINITY;
            for s in &self.elements[e].nodal {
                rho = rho.min(s.rho);
                p = p.min(s.pressure());
            }
            (rho, p)
        });
        partials
            .into_iter()
            .fold((f64::INFINITY, f64::INFINITY), |(ar, ap), (r, p)| {
                (ar.min(r), ap.min(p))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxChoice {
    /// Local Lax-Friedrichs interface dissipation (the production scheme).
    Llf,
    /// Entropy-conservative interface flux, for entropy-conservation tests.
    Ec,
}

impl FluxChoice {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "llf" => Ok(FluxChoice::Llf),
            "ec" => Ok(FluxChoice::Ec),
            other => Err(Error::config(format!(
                "unknown flux `{}` (expected llf | ec)",
                other
            ))),
        }
    }
}

/// Boundary kinds resolved per face at setup time. Interior faces carry
/// `None`; every boundary face must resolve or construction fails.
#[derive(Debug, Clone)]
pub struct ResolvedBcs {
    kinds: Vec<Option<BoundaryKind>>,
}

impl ResolvedBcs {
    pub fn resolve(mesh: &Mesh, table: &HashMap<String, BoundaryKind>) -> Result<Self> {
        let kinds = mesh
            .faces
            .iter()
            .map(|face| match &face.kind {
                FaceKind::Interior { .. } => Ok(None),
                FaceKind::Boundary { tag } => table.get(tag).copied().map(Some).ok_or_else(|| {
                    Error::config(format!("no boundary condition for tag `{}`", tag))
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ResolvedBcs { kinds })
    }

    /// For fully periodic meshes with no boundary faces.
    pub fn none(mesh: &Mesh) -> Result<Self> {
        let table = HashMap::new();
        ResolvedBcs::resolve(mesh, &table)
    }

    #[inline]
    fn kind(&self, face: usize) -> BoundaryKind {
        self.kinds[face].expect("boundary kind queried for interior face")
    }
}

/// Contravariant flux components at one node:
/// ftilde = y_eta f - x_eta g, gtilde = -y_xi f + x_xi g.
pub fn contravariant_flux(met: &MetricTerms, flux: &FluxPair) -> ([f64; 4], [f64; 4]) {
    let mut ft = [0.0; 4];
    let mut gt = [0.0; 4];
    for k in 0..4 {
        ft[k] = met.y_eta * flux.f[k] - met.x_eta * flux.g[k];
        gt[k] = -met.y_xi * flux.f[k] + met.x_xi * flux.g[k];
    }
    (ft, gt)
}

fn validate_element(elem: &ElementSolution, e: usize) -> Result<()> {
    for (node, s) in elem.nodal.iter().enumerate() {
        s.validate().map_err(|err| {
            Error::admissibility(format!("element {} node {}: {}", e, node, err))
        })?;
    }
    Ok(())
}

fn pointwise_contravariant(
    elem: &ElementSolution,
    geom: &ElementGeometry,
) -> (Vec<[f64; 4]>, Vec<[f64; 4]>) {
    let mut ftilde = Vec::with_capacity(elem.nodal.len());
    let mut gtilde = Vec::with_capacity(elem.nodal.len());
    for (s, met) in elem.nodal.iter().zip(&geom.metric) {
        let flux = physical_flux(s);
        let (ft, gt) = contravariant_flux(met, &flux);
        ftilde.push(ft);
        gtilde.push(gt);
    }
    (ftilde, gtilde)
}

/// Entropy-stable split-form volume term, per node:
/// `2 sum_i D_{p1,i} ftilde#_{(i,p1),p2} + 2 sum_j D_{p2,j} gtilde#_{p1,(j,p2)}`
/// with arithmetic-mean metrics inside the two-point contravariant fluxes.
/// The result is not yet divided by the Jacobian or multiplied by quadrature
/// weights.
pub fn volume_residual_es(
    elem: &ElementSolution,
    geom: &ElementGeometry,
    ops: &ReferenceOperators,
) -> Result<Vec<[f64; 4]>> {
    let n = ops.degree;
    let nn = n + 1;
    for (node, s) in elem.nodal.iter().enumerate() {
        s.validate()
            .map_err(|err| Error::admissibility(format!("node {}: {}", node, err)))?;
    }
    let (ftilde, gtilde) = pointwise_contravariant(elem, geom);
    let mut out = vec![[0.0; 4]; nn * nn];

    // xi-direction lines (each unordered node pair evaluated once).
    for p2 in 0..nn {
        for a in 0..nn {
            let ia = node_index(n, a, p2);
            for b in a + 1..nn {
                let ib = node_index(n, b, p2);
                let two_point = ec_flux(&elem.nodal[ia], &elem.nodal[ib]);
                let y_eta = 0.5 * (geom.metric[ia].y_eta + geom.metric[ib].y_eta);
                let x_eta = 0.5 * (geom.metric[ia].x_eta + geom.metric[ib].x_eta);
                let dab = 2.0 * ops.d(a, b);
                let dba = 2.0 * ops.d(b, a);
                for k in 0..4 {
                    let fsharp = y_eta * two_point.f[k] - x_eta * two_point.g[k];
                    out[ia][k] += dab * (fsharp - ftilde[ia][k]);
                    out[ib][k] += dba * (fsharp - ftilde[ib][k]);
                }
            }
        }
    }

    // eta-direction lines.
    for p1 in 0..nn {
        for a in 0..nn {
            let ia = node_index(n, p1, a);
            for b in a + 1..nn {
                let ib = node_index(n, p1, b);
                let two_point = ec_flux(&elem.nodal[ia], &elem.nodal[ib]);
                let y_xi = 0.5 * (geom.metric[ia].y_xi + geom.metric[ib].y_xi);
                let x_xi = 0.5 * (geom.metric[ia].x_xi + geom.metric[ib].x_xi);
                let dab = 2.0 * ops.d(a, b);
                let dba = 2.0 * ops.d(b, a);
                for k in 0..4 {
                    let gsharp = -y_xi * two_point.f[k] + x_xi * two_point.g[k];
                    out[ia][k] += dab * (gsharp - gtilde[ia][k]);
                    out[ib][k] += dba * (gsharp - gtilde[ib][k]);
                }
            }
        }
    }
    Ok(out)
}

/// Baseline strong-form volume term (pointwise contravariant flux
/// interpolants differentiated with D), used for cross-validation only.
pub fn volume_residual_standard(
    elem: &ElementSolution,
    geom: &ElementGeometry,
    ops: &ReferenceOperators,
) -> Result<Vec<[f64; 4]>> {
    let n = ops.degree;
    let nn = n + 1;
    for (node, s) in elem.nodal.iter().enumerate() {
        s.validate()
            .map_err(|err| Error::admissibility(format!("node {}: {}", node, err)))?;
    }
    let (ftilde, gtilde) = pointwise_contravariant(elem, geom);
    let mut out = vec![[0.0; 4]; nn * nn];
    for p2 in 0..nn {
        for i in 0..nn {
            let ii = node_index(n, i, p2);
            for p in 0..nn {
                if p == i {
                    continue;
                }
                let ip = node_index(n, p, p2);
                let d = ops.d(i, p);
                for k in 0..4 {
                    out[ii][k] += d * (ftilde[ip][k] - ftilde[ii][k]);
                }
            }
        }
    }
    for p1 in 0..nn {
        for j in 0..nn {
            let jj = node_index(n, p1, j);
            for p in 0..nn {
                if p == j {
                    continue;
                }
                let jp = node_index(n, p1, p);
                let d = ops.d(j, p);
                for k in 0..4 {
                    out[jj][k] += d * (gtilde[jp][k] - gtilde[jj][k]);
                }
            }
        }
    }
    Ok(out)
}

/// Scaled interface fluxes, one entry per face in the left side's node
/// ordering: `fn_star[face][q]` is the numerical flux dotted with the left
/// element's scaled outward normal.
#[derive(Debug, Clone)]
pub struct FaceFluxes {
    pub fn_star: Vec<Vec<[f64; 4]>>,
}

/// Evaluates the interface flux once per face node.
pub fn surface_flux_pass(
    field: &FieldState,
    mesh: &Mesh,
    ops: &ReferenceOperators,
    flux_choice: FluxChoice,
    bcs: &ResolvedBcs,
) -> Result<FaceFluxes> {
    let n = ops.degree;
    let t = field.time;
    let per_face = par::map_collect(mesh.faces.len(), |fi| -> Result<Vec<[f64; 4]>> {
        let face = &mesh.faces[fi];
        let left_geom = &mesh.elements[face.left_elem];
        let normals = &left_geom.face_normals[face.left_side];
        let mut vals = Vec::with_capacity(n + 1);
        for q in 0..=n {
            let ln = side_node(n, face.left_side, q);
            let ul = field.elements[face.left_elem].nodal[ln];
            let nvec = normals[q];
            let measure = (nvec[0] * nvec[0] + nvec[1] * nvec[1]).sqrt();
            let unit = [nvec[0] / measure, nvec[1] / measure];
            let ur = match &face.kind {
                FaceKind::Interior {
                    right_elem,
                    right_side,
                    reversed,
                } => {
                    field.elements[*right_elem].nodal
                        [side_node(n, *right_side, matched_node(n, q, *reversed))]
                }
                FaceKind::Boundary { .. } => {
                    let pos = left_geom.coords[ln];
                    ghost_state(bcs.kind(fi), &ul, unit, pos, t)
                }
            };
            ur.validate().map_err(|err| {
                Error::admissibility(format!("face {} node {}: exterior trace: {}", fi, q, err))
            })?;
            let val = match flux_choice {
                FluxChoice::Llf => {
                    let fl = physical_flux(&ul);
                    let fr = physical_flux(&ur);
                    let alpha = wave_speed(&ul, unit).max(wave_speed(&ur, unit));
                    let diss = alpha * measure;
                    let mut out = [0.0; 4];
                    let la = ul.as_array();
                    let ra = ur.as_array();
                    for k in 0..4 {
                        let central = 0.5
                            * (nvec[0] * (fl.f[k] + fr.f[k]) + nvec[1] * (fl.g[k] + fr.g[k]));
                        out[k] = central - 0.5 * diss * (ra[k] - la[k]);
                    }
                    out
                }
                FluxChoice::Ec => {
                    let two_point = ec_flux(&ul, &ur);
                    let mut out = [0.0; 4];
                    for k in 0..4 {
                        out[k] = nvec[0] * two_point.f[k] + nvec[1] * two_point.g[k];
                    }
                    out
                }
            };
            vals.push(val);
        }
        Ok(vals)
    });
    let mut fn_star = Vec::with_capacity(per_face.len());
    for v in per_face {
        fn_star.push(v?);
    }
    Ok(FaceFluxes { fn_star })
}

/// Calls `deposit(node, w_q, delta)` for every side node of element `e`,
/// where `delta` is the interior normal flux minus the numerical flux, both
/// dotted with the element's scaled outward normal.
fn for_each_side_node(
    field: &FieldState,
    mesh: &Mesh,
    ops: &ReferenceOperators,
    fluxes: &FaceFluxes,
    e: usize,
    mut deposit: impl FnMut(usize, f64, [f64; 4]),
) {
    let n = mesh.degree;
    let geom = &mesh.elements[e];
    for side in 0..4 {
        let sref = mesh.element_sides[e][side];
        let vals = &fluxes.fn_star[sref.face];
        let reversed = match mesh.faces[sref.face].kind {
            FaceKind::Interior { reversed, .. } => reversed,
            FaceKind::Boundary { .. } => false,
        };
        for q in 0..=n {
            let node = side_node(n, side, q);
            let nvec = geom.face_normals[side][q];
            let flux = physical_flux(&field.elements[e].nodal[node]);
            let star = if sref.is_left {
                vals[q]
            } else {
                let lq = matched_node(n, q, reversed);
                let v = vals[lq];
                [-v[0], -v[1], -v[2], -v[3]]
            };
            let mut delta = [0.0; 4];
            for k in 0..4 {
                let interior = nvec[0] * flux.f[k] + nvec[1] * flux.g[k];
                delta[k] = interior - star[k];
            }
            deposit(node, ops.weights[q], delta);
        }
    }
}

/// Surface increments exactly as they appear in the semidiscrete equation:
/// the weighted `(Delta ftilde, Delta gtilde)` terms deposited at boundary
/// rows and columns (still to be divided by `w w J` together with the volume
/// term).
pub fn surface_residual(
    field: &FieldState,
    mesh: &Mesh,
    ops: &ReferenceOperators,
    flux_choice: FluxChoice,
    bcs: &ResolvedBcs,
) -> Result<Vec<Vec<[f64; 4]>>> {
    let fluxes = surface_flux_pass(field, mesh, ops, flux_choice, bcs)?;
    let nn = mesh.nodes_per_element();
    Ok(par::map_collect(mesh.n_elements(), |e| {
        let mut out = vec![[0.0; 4]; nn];
        for_each_side_node(field, mesh, ops, &fluxes, e, |node, w_q, delta| {
            for k in 0..4 {
                out[node][k] -= w_q * delta[k];
            }
        });
        out
    }))
}

/// Assembles `dU/dt` for the whole field and also returns the interface
/// fluxes (the entropy-balance diagnostic needs them).
pub fn residual_with_fluxes(
    field: &FieldState,
    mesh: &Mesh,
    ops: &ReferenceOperators,
    flux_choice: FluxChoice,
    bcs: &ResolvedBcs,
) -> Result<(FieldState, FaceFluxes)> {
    let n = mesh.degree;
    let nn = mesh.nodes_per_element();
    let volumes = par::map_collect(mesh.n_elements(), |e| {
        volume_residual_es(&field.elements[e], &mesh.elements[e], ops)
            .map_err(|err| Error::admissibility(format!("element {}: {}", e, err)))
    });
    let mut vols = Vec::with_capacity(volumes.len());
    for v in volumes {
        vols.push(v?);
    }
    let fluxes = surface_flux_pass(field, mesh, ops, flux_choice, bcs)?;
    let w_end = ops.weights[n];

    let elements = par::map_collect(mesh.n_elements(), |e| {
        let geom = &mesh.elements[e];
        let vol = &vols[e];
        let mut out = Vec::with_capacity(nn);
        for node in 0..nn {
            let jac = geom.metric[node].jac;
            out.push(State::new(
                -vol[node][0] / jac,
                -vol[node][1] / jac,
                -vol[node][2] / jac,
                -vol[node][3] / jac,
            ));
        }
        let mut sol = ElementSolution { nodal: out };
        for_each_side_node(field, mesh, ops, &fluxes, e, |node, _w_q, delta| {
            let jac = geom.metric[node].jac;
            let scale = 1.0 / (w_end * jac);
            let s = &mut sol.nodal[node];
            s.rho += delta[0] * scale;
            s.mx += delta[1] * scale;
            s.my += delta[2] * scale;
            s.e += delta[3] * scale;
        });
        sol
    });

    Ok((
        FieldState {
            elements,
            time: field.time,
        },
        fluxes,
    ))
}

/// Physical-time derivative of the field under the entropy-stable scheme.
pub fn residual(
    field: &FieldState,
    mesh: &Mesh,
    ops: &ReferenceOperators,
    flux_choice: FluxChoice,
    bcs: &ResolvedBcs,
) -> Result<FieldState> {
    residual_with_fluxes(field, mesh, ops, flux_choice, bcs).map(|(rhs, _)| rhs)
}

pub(crate) fn validate_field(field: &FieldState) -> Result<()> {
    for (e, elem) in field.elements.iter().enumerate() {
        validate_element(elem, e)?;
    }
    Ok(())
}
