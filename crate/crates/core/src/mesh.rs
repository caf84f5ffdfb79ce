//! Quadrilateral meshes with per-element Q_N coordinate mappings.
//!
//! Each element stores the nodal coordinates of its mapping, the metric
//! derivatives obtained by applying the LGL differentiation matrix to those
//! coordinates, the Jacobian, and scaled outward face normals. Storing the
//! mapping as its Q_N interpolant (never the analytic map) is what makes the
//! discrete metric identities hold, so free-stream preservation is structural.
//!
//! Node ordering is row-major with the xi index fastest: `idx = j*(N+1) + i`.
//! Sides are numbered 0 bottom (eta=-1), 1 right (xi=+1), 2 top (eta=+1),
//! 3 left (xi=-1), each parameterized by its reference coordinate ascending.

use crate::error::{Error, Result};
use crate::refops::ReferenceOperators;
use std::fmt::Write as _;
use std::path::Path;

/// Pointwise mapping derivatives and Jacobian.
#[derive(Debug, Clone, Copy, Default)]
pub struct MetricTerms {
    pub x_xi: f64,
    pub x_eta: f64,
    pub y_xi: f64,
    pub y_eta: f64,
    pub jac: f64,
}

/// Geometry of one element: nodal coordinates, metric terms, scaled face
/// normals and the inscribed-radius proxy `h_e`.
#[derive(Debug, Clone)]
pub struct ElementGeometry {
    pub coords: Vec<[f64; 2]>,
    pub metric: Vec<MetricTerms>,
    /// Scaled outward normals (J G^-T n_hat) at the N+1 nodes of each side.
    /// The Euclidean norm of an entry is the surface measure per unit
    /// reference length.
    pub face_normals: [Vec<[f64; 2]>; 4],
    /// Minimum distance from the element centroid to a face chord.
    pub h_e: f64,
    /// True when all metric terms are constant over the element.
    pub affine: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FaceKind {
    Interior {
        right_elem: usize,
        right_side: usize,
        reversed: bool,
    },
    Boundary {
        tag: String,
    },
}

#[derive(Debug, Clone)]
pub struct Face {
    pub left_elem: usize,
    pub left_side: usize,
    pub kind: FaceKind,
}

/// Which face a given element side belongs to and on which side of it.
#[derive(Debug, Clone, Copy)]
pub struct SideRef {
    pub face: usize,
    pub is_left: bool,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub degree: usize,
    pub elements: Vec<ElementGeometry>,
    pub faces: Vec<Face>,
    /// Per element, the face record of each of its four sides.
    pub element_sides: Vec<[SideRef; 4]>,
    pub all_affine: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    pub fn square(lo: f64, hi: f64) -> Self {
        Rect::new(lo, hi, lo, hi)
    }
}

#[inline]
pub fn node_index(degree: usize, i: usize, j: usize) -> usize {
    j * (degree + 1) + i
}

/// Flat node index of the q-th node on a side, q ascending in the side's
/// reference parameter.
#[inline]
pub fn side_node(degree: usize, side: usize, q: usize) -> usize {
    match side {
        0 => node_index(degree, q, 0),
        1 => node_index(degree, degree, q),
        2 => node_index(degree, q, degree),
        _ => node_index(degree, 0, q),
    }
}

/// Node index on the right side of a face matching node q on the left side.
#[inline]
pub fn matched_node(degree: usize, q: usize, reversed: bool) -> usize {
    if reversed {
        degree - q
    } else {
        q
    }
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let dx = p[0] - (a[0] + t * ab[0]);
    let dy = p[1] - (a[1] + t * ab[1]);
    (dx * dx + dy * dy).sqrt()
}

/// Builds the geometry of one element from its nodal coordinates.
///
/// Metric derivatives come from applying D along each reference direction,
/// so they are the derivatives of the Q_N interpolant of the mapping.
pub fn compute_geometry(coords: Vec<[f64; 2]>, ops: &ReferenceOperators) -> Result<ElementGeometry> {
    let n = ops.degree;
    let nn = n + 1;
    if coords.len() != nn * nn {
        return Err(Error::geometry(format!(
            "expected {} nodal coordinates, got {}",
            nn * nn,
            coords.len()
        )));
    }
    if coords.iter().any(|c| !c[0].is_finite() || !c[1].is_finite()) {
        return Err(Error::geometry("non-finite nodal coordinates"));
    }

    let mut metric = vec![MetricTerms::default(); nn * nn];
    for j in 0..nn {
        for i in 0..nn {
            let mut x_xi = 0.0;
            let mut y_xi = 0.0;
            let mut x_eta = 0.0;
            let mut y_eta = 0.0;
            for p in 0..nn {
                let d_xi = ops.d(i, p);
                let c_xi = coords[node_index(n, p, j)];
                x_xi += d_xi * c_xi[0];
                y_xi += d_xi * c_xi[1];
                let d_eta = ops.d(j, p);
                let c_eta = coords[node_index(n, i, p)];
                x_eta += d_eta * c_eta[0];
                y_eta += d_eta * c_eta[1];
            }
            let jac = x_xi * y_eta - x_eta * y_xi;
            if !(jac > 0.0) {
                return Err(Error::geometry(format!(
                    "non-positive Jacobian {} at node ({}, {})",
                    jac, i, j
                )));
            }
            metric[node_index(n, i, j)] = MetricTerms {
                x_xi,
                x_eta,
                y_xi,
                y_eta,
                jac,
            };
        }
    }

    let mut affine = true;
    let first = metric[0];
    for m in &metric {
        let scale = 1.0
            + m.x_xi
                .abs()
                .max(m.x_eta.abs())
                .max(m.y_xi.abs())
                .max(m.y_eta.abs());
        if (m.x_xi - first.x_xi).abs() > 1e-13 * scale
            || (m.x_eta - first.x_eta).abs() > 1e-13 * scale
            || (m.y_xi - first.y_xi).abs() > 1e-13 * scale
            || (m.y_eta - first.y_eta).abs() > 1e-13 * scale
        {
            affine = false;
            break;
        }
    }
    if affine {
        // Snap to the exact constant metric of the affine mapping (corner
        // differences). The D-based values carry per-row rounding noise at
        // the last bit; the snap removes it so constant states produce a
        // bitwise-zero residual on Cartesian meshes.
        let c00 = coords[node_index(n, 0, 0)];
        let cn0 = coords[node_index(n, n, 0)];
        let c0n = coords[node_index(n, 0, n)];
        let x_xi = 0.5 * (cn0[0] - c00[0]);
        let y_xi = 0.5 * (cn0[1] - c00[1]);
        let x_eta = 0.5 * (c0n[0] - c00[0]);
        let y_eta = 0.5 * (c0n[1] - c00[1]);
        let jac = x_xi * y_eta - x_eta * y_xi;
        if !(jac > 0.0) {
            return Err(Error::geometry(format!(
                "non-positive Jacobian {} on affine element",
                jac
            )));
        }
        for m in metric.iter_mut() {
            *m = MetricTerms {
                x_xi,
                x_eta,
                y_xi,
                y_eta,
                jac,
            };
        }
    }

    // Scaled outward normals per side; consistent with the contravariant
    // fluxes (side 1 normal flux equals f-tilde, side 0 equals -g-tilde).
    let mut face_normals: [Vec<[f64; 2]>; 4] = Default::default();
    for side in 0..4 {
        let mut normals = Vec::with_capacity(nn);
        for q in 0..nn {
            let m = metric[side_node(n, side, q)];
            let v = match side {
                0 => [m.y_xi, -m.x_xi],
                1 => [m.y_eta, -m.x_eta],
                2 => [-m.y_xi, m.x_xi],
                _ => [-m.y_eta, m.x_eta],
            };
            normals.push(v);
        }
        face_normals[side] = normals;
    }

    // Quadrature centroid and centroid-to-chord distances.
    let mut mass = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for j in 0..nn {
        for i in 0..nn {
            let w = ops.weights[i] * ops.weights[j] * metric[node_index(n, i, j)].jac;
            mass += w;
            cx += w * coords[node_index(n, i, j)][0];
            cy += w * coords[node_index(n, i, j)][1];
        }
    }
    let centroid = [cx / mass, cy / mass];
    let corner = |i: usize, j: usize| coords[node_index(n, i, j)];
    let chords = [
        (corner(0, 0), corner(n, 0)),
        (corner(n, 0), corner(n, n)),
        (corner(0, n), corner(n, n)),
        (corner(0, 0), corner(0, n)),
    ];
    let h_e = chords
        .iter()
        .map(|(a, b)| point_segment_distance(centroid, *a, *b))
        .fold(f64::INFINITY, f64::min);

    Ok(ElementGeometry {
        coords,
        metric,
        face_normals,
        h_e,
        affine,
    })
}

impl Mesh {
    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn nodes_per_element(&self) -> usize {
        (self.degree + 1) * (self.degree + 1)
    }

    pub fn min_h(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| e.h_e)
            .fold(f64::INFINITY, f64::min)
    }

    /// Maximum residual of the discrete metric identities over all elements
    /// and nodes: the mixed reference derivatives of each coordinate must
    /// commute.
    pub fn metric_identity_residual(&self, ops: &ReferenceOperators) -> f64 {
        let n = self.degree;
        let nn = n + 1;
        let mut worst = 0.0_f64;
        for geom in &self.elements {
            for q2 in 0..nn {
                for q1 in 0..nn {
                    let mut dx_eta_of_xi = 0.0;
                    let mut dy_eta_of_xi = 0.0;
                    let mut dx_xi_of_eta = 0.0;
                    let mut dy_xi_of_eta = 0.0;
                    for p in 0..nn {
                        let m_row = geom.metric[node_index(n, p, q2)];
                        dx_eta_of_xi += ops.d(q1, p) * m_row.x_eta;
                        dy_eta_of_xi += ops.d(q1, p) * m_row.y_eta;
                        let m_col = geom.metric[node_index(n, q1, p)];
                        dx_xi_of_eta += ops.d(q2, p) * m_col.x_xi;
                        dy_xi_of_eta += ops.d(q2, p) * m_col.y_xi;
                    }
                    worst = worst
                        .max((dx_xi_of_eta - dx_eta_of_xi).abs())
                        .max((dy_xi_of_eta - dy_eta_of_xi).abs());
                }
            }
        }
        worst
    }

    /// All boundary tags present in the mesh.
    pub fn boundary_tags(&self) -> Vec<&str> {
        let mut tags: Vec<&str> = self
            .faces
            .iter()
            .filter_map(|f| match &f.kind {
                FaceKind::Boundary { tag } => Some(tag.as_str()),
                _ => None,
            })
            .collect();
        tags.sort_unstable();
        tags.dedup();
        tags
    }
}

fn build_element_sides(n_elements: usize, faces: &[Face]) -> Result<Vec<[SideRef; 4]>> {
    let mut sides: Vec<[Option<SideRef>; 4]> = vec![[None; 4]; n_elements];
    let mut set = |elem: usize, side: usize, sref: SideRef| -> Result<()> {
        if elem >= n_elements || side > 3 {
            return Err(Error::geometry(format!(
                "face references element {} side {} out of range",
                elem, side
            )));
        }
        if sides[elem][side].is_some() {
            return Err(Error::geometry(format!(
                "element {} side {} appears in more than one face record",
                elem, side
            )));
        }
        sides[elem][side] = Some(sref);
        Ok(())
    };
    for (fi, face) in faces.iter().enumerate() {
        set(
            face.left_elem,
            face.left_side,
            SideRef {
                face: fi,
                is_left: true,
            },
        )?;
        if let FaceKind::Interior {
            right_elem,
            right_side,
            ..
        } = face.kind
        {
            set(
                right_elem,
                right_side,
                SideRef {
                    face: fi,
                    is_left: false,
                },
            )?;
        }
    }
    sides
        .into_iter()
        .enumerate()
        .map(|(e, s)| {
            let mut out = [SideRef {
                face: 0,
                is_left: true,
            }; 4];
            for (k, v) in s.into_iter().enumerate() {
                out[k] = v.ok_or_else(|| {
                    Error::geometry(format!("element {} side {} has no face record", e, k))
                })?;
            }
            Ok(out)
        })
        .collect()
}

/// Checks that the nodal traces of every interior face agree from both sides
/// up to a uniform translation (the translation admits periodic
/// identifications).
fn validate_conforming(mesh: &Mesh) -> Result<()> {
    let n = mesh.degree;
    for (fi, face) in mesh.faces.iter().enumerate() {
        let FaceKind::Interior {
            right_elem,
            right_side,
            reversed,
        } = face.kind
        else {
            continue;
        };
        let left = &mesh.elements[face.left_elem];
        let right = &mesh.elements[right_elem];
        let mut shift = [0.0; 2];
        let mut scale = 1.0_f64;
        for q in 0..=n {
            let lc = left.coords[side_node(n, face.left_side, q)];
            let rc = right.coords[side_node(n, right_side, matched_node(n, q, reversed))];
            scale = scale.max(lc[0].abs()).max(lc[1].abs());
            let d = [lc[0] - rc[0], lc[1] - rc[1]];
            if q == 0 {
                shift = d;
            } else if (d[0] - shift[0]).abs() > 1e-12 * scale
                || (d[1] - shift[1]).abs() > 1e-12 * scale
            {
                return Err(Error::geometry(format!(
                    "face {} is non-conforming: trace mismatch at node {}",
                    fi, q
                )));
            }
        }
    }
    Ok(())
}

/// Uniform nx-by-ny Cartesian mesh of axis-aligned quadrilaterals.
pub fn build_cartesian(
    nx: usize,
    ny: usize,
    rect: Rect,
    ops: &ReferenceOperators,
    periodic_x: bool,
    periodic_y: bool,
) -> Result<Mesh> {
    build_mapped(nx, ny, rect, ops, periodic_x, periodic_y, |x, y| (x, y))
}

/// Structured mesh whose nodes are the image of a uniform Cartesian grid
/// under `map`, stored as the Q_N interpolant of the transformed mapping.
pub fn build_mapped(
    nx: usize,
    ny: usize,
    rect: Rect,
    ops: &ReferenceOperators,
    periodic_x: bool,
    periodic_y: bool,
    map: impl Fn(f64, f64) -> (f64, f64),
) -> Result<Mesh> {
    if nx < 1 || ny < 1 {
        return Err(Error::config("mesh must have at least one element per side"));
    }
    if !(rect.x1 > rect.x0 && rect.y1 > rect.y0) {
        return Err(Error::geometry("degenerate domain rectangle"));
    }
    let n = ops.degree;
    let nn = n + 1;
    let dx = (rect.x1 - rect.x0) / nx as f64;
    let dy = (rect.y1 - rect.y0) / ny as f64;

    let mut elements = Vec::with_capacity(nx * ny);
    for ey in 0..ny {
        for ex in 0..nx {
            let mut coords = Vec::with_capacity(nn * nn);
            for j in 0..nn {
                for i in 0..nn {
                    // Shared edges evaluate the map at bitwise-identical base
                    // points from both sides.
                    let bx = rect.x0 + dx * (ex as f64 + 0.5 * (ops.nodes[i] + 1.0));
                    let by = rect.y0 + dy * (ey as f64 + 0.5 * (ops.nodes[j] + 1.0));
                    let (x, y) = map(bx, by);
                    coords.push([x, y]);
                }
            }
            let geom = compute_geometry(coords, ops).map_err(|e| {
                Error::geometry(format!("element ({}, {}): {}", ex, ey, e))
            })?;
            elements.push(geom);
        }
    }

    let elem = |ex: usize, ey: usize| ey * nx + ex;
    let mut faces = Vec::new();
    for ey in 0..ny {
        for ex in 0..nx {
            if ex + 1 < nx || periodic_x {
                faces.push(Face {
                    left_elem: elem(ex, ey),
                    left_side: 1,
                    kind: FaceKind::Interior {
                        right_elem: elem((ex + 1) % nx, ey),
                        right_side: 3,
                        reversed: false,
                    },
                });
            } else {
                faces.push(Face {
                    left_elem: elem(ex, ey),
                    left_side: 1,
                    kind: FaceKind::Boundary {
                        tag: "right".into(),
                    },
                });
            }
        }
        if !periodic_x {
            faces.push(Face {
                left_elem: elem(0, ey),
                left_side: 3,
                kind: FaceKind::Boundary { tag: "left".into() },
            });
        }
    }
    for ex in 0..nx {
        for ey in 0..ny {
            if ey + 1 < ny || periodic_y {
                faces.push(Face {
                    left_elem: elem(ex, ey),
                    left_side: 2,
                    kind: FaceKind::Interior {
                        right_elem: elem(ex, (ey + 1) % ny),
                        right_side: 0,
                        reversed: false,
                    },
                });
            } else {
                faces.push(Face {
                    left_elem: elem(ex, ey),
                    left_side: 2,
                    kind: FaceKind::Boundary { tag: "top".into() },
                });
            }
        }
        if !periodic_y {
            faces.push(Face {
                left_elem: elem(ex, 0),
                left_side: 0,
                kind: FaceKind::Boundary {
                    tag: "bottom".into(),
                },
            });
        }
    }

    let element_sides = build_element_sides(elements.len(), &faces)?;
    let all_affine = elements.iter().all(|e| e.affine);
    let mesh = Mesh {
        degree: n,
        elements,
        faces,
        element_sides,
        all_affine,
    };
    validate_conforming(&mesh)?;
    Ok(mesh)
}

/// M-by-M mesh of the square distorted by the smooth transformation
/// x' = x + 0.05 sin(a pi x) cos(a pi y), y' = y + 0.10 cos(a pi x) sin(a pi y).
pub fn build_sinusoidal(
    m: usize,
    rect: Rect,
    alpha: f64,
    ops: &ReferenceOperators,
) -> Result<Mesh> {
    use std::f64::consts::PI;
    build_mapped(m, m, rect, ops, true, true, |x, y| {
        (
            x + 0.05 * (alpha * PI * x).sin() * (alpha * PI * y).cos(),
            y + 0.10 * (alpha * PI * x).cos() * (alpha * PI * y).sin(),
        )
    })
}

/// Writes a mesh in the `esdg-mesh v1` text format.
pub fn save_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    writeln!(
        out,
        "esdg-mesh v1 N={} elements={}",
        mesh.degree,
        mesh.n_elements()
    )
    .unwrap();
    for geom in &mesh.elements {
        for c in &geom.coords {
            writeln!(out, "{:.16e} {:.16e}", c[0], c[1]).unwrap();
        }
    }
    writeln!(out, "faces").unwrap();
    for face in &mesh.faces {
        match &face.kind {
            FaceKind::Interior {
                right_elem,
                right_side,
                reversed,
            } => writeln!(
                out,
                "{} {} {} {} {}",
                face.left_elem,
                face.left_side,
                right_elem,
                right_side,
                if *reversed { 1 } else { 0 }
            )
            .unwrap(),
            FaceKind::Boundary { tag } => {
                writeln!(out, "{} {} BOUNDARY {}", face.left_elem, face.left_side, tag).unwrap()
            }
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads a mesh written by [`save_mesh`], recomputing all geometry from the
/// stored coordinates.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();

    let (lno, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty mesh file"))?;
    let header_err = |msg: &str| Error::parse(lno + 1, msg.to_string());
    let mut degree = None;
    let mut n_elements = None;
    let mut words = header.split_whitespace();
    if words.next() != Some("esdg-mesh") || words.next() != Some("v1") {
        return Err(header_err("expected header `esdg-mesh v1 N=<degree> elements=<E>`"));
    }
    for word in words {
        if let Some(v) = word.strip_prefix("N=") {
            degree = Some(
                v.parse::<usize>()
                    .map_err(|_| header_err("bad degree in header"))?,
            );
        } else if let Some(v) = word.strip_prefix("elements=") {
            n_elements = Some(
                v.parse::<usize>()
                    .map_err(|_| header_err("bad element count in header"))?,
            );
        }
    }
    let degree = degree.ok_or_else(|| header_err("header missing N="))?;
    let n_elements = n_elements.ok_or_else(|| header_err("header missing elements="))?;
    let ops = ReferenceOperators::new(degree)?;
    let nn = degree + 1;

    let mut elements = Vec::with_capacity(n_elements);
    for e in 0..n_elements {
        let mut coords = Vec::with_capacity(nn * nn);
        for _ in 0..nn * nn {
            let (lno, line) = lines.next().ok_or_else(|| {
                Error::parse(
                    0,
                    format!("file ended before the coordinates of element {}", e),
                )
            })?;
            let mut parts = line.split_whitespace();
            let parse = |s: Option<&str>| -> Result<f64> {
                s.ok_or_else(|| Error::parse(lno + 1, "expected `x y`"))?
                    .parse::<f64>()
                    .map_err(|_| Error::parse(lno + 1, "bad coordinate"))
            };
            let x = parse(parts.next())?;
            let y = parse(parts.next())?;
            if parts.next().is_some() {
                return Err(Error::parse(lno + 1, "trailing tokens after `x y`"));
            }
            coords.push([x, y]);
        }
        let geom = compute_geometry(coords, &ops)
            .map_err(|err| Error::parse(0, format!("element {}: {}", e, err)))?;
        elements.push(geom);
    }

    let (lno, marker) = lines
        .next()
        .ok_or_else(|| Error::parse(0, "missing `faces` section"))?;
    if marker.trim() != "faces" {
        return Err(Error::parse(
            lno + 1,
            format!("expected `faces`, found `{}` (element count mismatch?)", marker.trim()),
        ));
    }

    let mut faces = Vec::new();
    for (lno, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let parse_idx = |s: &str, what: &str| -> Result<usize> {
            s.parse::<usize>()
                .map_err(|_| Error::parse(lno + 1, format!("bad {}", what)))
        };
        if parts.len() == 4 && parts[2] == "BOUNDARY" {
            faces.push(Face {
                left_elem: parse_idx(parts[0], "element index")?,
                left_side: parse_idx(parts[1], "side index")?,
                kind: FaceKind::Boundary {
                    tag: parts[3].to_string(),
                },
            });
        } else if parts.len() == 5 {
            faces.push(Face {
                left_elem: parse_idx(parts[0], "element index")?,
                left_side: parse_idx(parts[1], "side index")?,
                kind: FaceKind::Interior {
                    right_elem: parse_idx(parts[2], "element index")?,
                    right_side: parse_idx(parts[3], "side index")?,
                    reversed: match parts[4] {
                        "0" => false,
                        "1" => true,
                        _ => return Err(Error::parse(lno + 1, "reversed flag must be 0 or 1")),
                    },
                },
            });
        } else {
            return Err(Error::parse(lno + 1, "malformed face record"));
        }
    }

    let element_sides = build_element_sides(n_elements, &faces)
        .map_err(|e| Error::parse(0, e.to_string()))?;
    let all_affine = elements.iter().all(|e| e.affine);
    let mesh = Mesh {
        degree,
        elements,
        faces,
        element_sides,
        all_affine,
    };
    validate_conforming(&mesh).map_err(|e| Error::parse(0, e.to_string()))?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ops(n: usize) -> ReferenceOperators {
        ReferenceOperators::new(n).unwrap()
    }

    #[test]
    fn single_identity_element() {
        let ops = ops(3);
        let mesh = build_cartesian(1, 1, Rect::square(-1.0, 1.0), &ops, true, true).unwrap();
        assert_eq!(mesh.n_elements(), 1);
        let geom = &mesh.elements[0];
        for m in &geom.metric {
            assert!((m.jac - 1.0).abs() < 1e-14);
            assert!((m.x_xi - 1.0).abs() < 1e-14);
            assert!((m.y_eta - 1.0).abs() < 1e-14);
            assert!(m.x_eta.abs() < 1e-14);
            assert!(m.y_xi.abs() < 1e-14);
        }
        assert!(geom.affine);
        assert!((geom.h_e - 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_by_two_jacobian() {
        let ops = ops(2);
        let mesh = build_cartesian(2, 2, Rect::square(0.0, 2.0), &ops, false, false).unwrap();
        for geom in &mesh.elements {
            for m in &geom.metric {
                assert!((m.jac - 0.25).abs() < 1e-15);
            }
        }
        assert!(mesh.all_affine);
    }

    #[test]
    fn periodic_mesh_has_no_boundary_faces() {
        let ops = ops(2);
        let mesh = build_cartesian(3, 3, Rect::square(0.0, 1.0), &ops, true, true).unwrap();
        assert!(mesh
            .faces
            .iter()
            .all(|f| matches!(f.kind, FaceKind::Interior { .. })));
        assert_eq!(mesh.faces.len(), 2 * 9);
    }

    #[test]
    fn non_periodic_mesh_has_tagged_boundaries() {
        let ops = ops(1);
        let mesh = build_cartesian(2, 3, Rect::square(0.0, 1.0), &ops, false, false).unwrap();
        let tags = mesh.boundary_tags();
        assert_eq!(tags, vec!["bottom", "left", "right", "top"]);
    }

    #[test]
    fn degenerate_rectangle_is_rejected() {
        let ops = ops(2);
        let r = Rect::new(0.0, 0.0, 0.0, 1.0);
        assert!(matches!(
            build_cartesian(1, 1, r, &ops, false, false),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn folded_map_names_offending_element() {
        let ops = ops(2);
        // A reflection in x makes the Jacobian negative everywhere.
        let err = build_mapped(2, 2, Rect::square(0.0, 1.0), &ops, false, false, |x, y| {
            (-x, y)
        })
        .unwrap_err();
        match err {
            Error::Geometry(msg) => assert!(msg.contains("element"), "{}", msg),
            other => panic!("expected geometry error, got {:?}", other),
        }
    }

    #[test]
    fn sinusoidal_alpha_15_is_valid() {
        let ops = ops(3);
        let mesh = build_sinusoidal(40, Rect::square(-10.0, 10.0), 1.5, &ops).unwrap();
        assert_eq!(mesh.n_elements(), 1600);
        assert!(!mesh.all_affine);
        assert!(mesh.elements.iter().all(|g| g.metric.iter().all(|m| m.jac > 0.0)));
    }

    #[test]
    fn zero_amplitude_matches_cartesian_bitwise() {
        let ops = ops(3);
        let rect = Rect::square(-10.0, 10.0);
        let cart = build_cartesian(4, 4, rect, &ops, true, true).unwrap();
        let mapped = build_mapped(4, 4, rect, &ops, true, true, |x, y| {
            (
                x + 0.0 * (1.5 * PI * x).sin() * (1.5 * PI * y).cos(),
                y + 0.0 * (1.5 * PI * x).cos() * (1.5 * PI * y).sin(),
            )
        })
        .unwrap();
        for (a, b) in cart.elements.iter().zip(&mapped.elements) {
            assert_eq!(a.coords, b.coords);
        }
    }

    #[test]
    fn metric_identities_hold_on_sinusoidal_mesh() {
        for (n, m) in [(3, 10), (3, 20), (4, 16), (4, 20)] {
            let ops = ops(n);
            let mesh = build_sinusoidal(m, Rect::square(-10.0, 10.0), 1.5, &ops).unwrap();
            let res = mesh.metric_identity_residual(&ops);
            assert!(res <= 1e-12, "N={} M={} residual={}", n, m, res);
        }
    }

    #[test]
    fn coarse_quartic_interpolant_of_sinusoidal_map_folds() {
        // At M=10 a 2-unit element spans 1.5 wavelengths of the alpha=1.5
        // distortion; the Q4 interpolant of the map overshoots into a
        // negative Jacobian even though the analytic map is invertible.
        let ops = ops(4);
        let err = build_sinusoidal(10, Rect::square(-10.0, 10.0), 1.5, &ops).unwrap_err();
        match err {
            Error::Geometry(msg) => assert!(msg.contains("element"), "{}", msg),
            other => panic!("expected geometry error, got {:?}", other),
        }
    }

    #[test]
    fn affine_unit_square_metric_terms() {
        let ops = ops(3);
        let mesh = build_cartesian(1, 1, Rect::square(0.0, 1.0), &ops, false, false).unwrap();
        let geom = &mesh.elements[0];
        for m in &geom.metric {
            assert!((m.x_xi - 0.5).abs() < 1e-15);
            assert!((m.y_eta - 0.5).abs() < 1e-15);
            assert!(m.x_eta.abs() < 1e-15);
            assert!(m.y_xi.abs() < 1e-15);
            assert!((m.jac - 0.25).abs() < 1e-15);
        }
        // Face normals are axis-aligned with measure 1/2 per reference unit.
        let expected = [[0.0, -0.5], [0.5, 0.0], [0.0, 0.5], [-0.5, 0.0]];
        for side in 0..4 {
            for v in &geom.face_normals[side] {
                assert!((v[0] - expected[side][0]).abs() < 1e-15);
                assert!((v[1] - expected[side][1]).abs() < 1e-15);
            }
        }
        assert!((geom.h_e - 0.5).abs() < 1e-14);
    }

    #[test]
    fn bilinear_trapezoid_satisfies_metric_identities() {
        let ops = ops(4);
        // Bilinear interpolation of an arbitrary convex quadrilateral is in
        // Q_N, so the identities must hold to round-off.
        let corners = [[0.0, 0.0], [1.2, 0.1], [0.9, 1.0], [-0.1, 0.8]];
        let nn = ops.degree + 1;
        let mut coords = Vec::new();
        for j in 0..nn {
            for i in 0..nn {
                let xi = 0.5 * (ops.nodes[i] + 1.0);
                let eta = 0.5 * (ops.nodes[j] + 1.0);
                let x = (1.0 - xi) * (1.0 - eta) * corners[0][0]
                    + xi * (1.0 - eta) * corners[1][0]
                    + xi * eta * corners[2][0]
                    + (1.0 - xi) * eta * corners[3][0];
                let y = (1.0 - xi) * (1.0 - eta) * corners[0][1]
                    + xi * (1.0 - eta) * corners[1][1]
                    + xi * eta * corners[2][1]
                    + (1.0 - xi) * eta * corners[3][1];
                coords.push([x, y]);
            }
        }
        let geom = compute_geometry(coords, &ops).unwrap();
        let mesh = Mesh {
            degree: ops.degree,
            elements: vec![geom],
            faces: vec![],
            element_sides: vec![],
            all_affine: false,
        };
        assert!(mesh.metric_identity_residual(&ops) <= 1e-12);
    }

    #[test]
    fn shared_face_normals_are_opposite() {
        let ops = ops(3);
        let mesh = build_sinusoidal(6, Rect::square(-10.0, 10.0), 1.5, &ops).unwrap();
        let n = mesh.degree;
        for face in &mesh.faces {
            let FaceKind::Interior {
                right_elem,
                right_side,
                reversed,
            } = face.kind
            else {
                continue;
            };
            let ln = &mesh.elements[face.left_elem].face_normals[face.left_side];
            let rn = &mesh.elements[right_elem].face_normals[right_side];
            for q in 0..=n {
                let r = rn[matched_node(n, q, reversed)];
                assert!((ln[q][0] + r[0]).abs() <= 1e-12);
                assert!((ln[q][1] + r[1]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn save_load_round_trip() {
        let ops = ops(2);
        let mesh = build_cartesian(2, 2, Rect::square(0.0, 2.0), &ops, false, true).unwrap();
        let dir = std::env::temp_dir().join("esdg_mesh_roundtrip");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("mesh.txt");
        save_mesh(&mesh, &path).unwrap();
        let loaded = load_mesh(&path).unwrap();
        assert_eq!(loaded.degree, mesh.degree);
        assert_eq!(loaded.n_elements(), mesh.n_elements());
        for (a, b) in mesh.elements.iter().zip(&loaded.elements) {
            assert_eq!(a.coords, b.coords);
        }
        assert_eq!(mesh.faces.len(), loaded.faces.len());
        for (a, b) in mesh.faces.iter().zip(&loaded.faces) {
            assert_eq!(a.left_elem, b.left_elem);
            assert_eq!(a.left_side, b.left_side);
            assert_eq!(a.kind, b.kind);
        }
        // Saving the loaded mesh reproduces the file byte for byte.
        let path2 = dir.join("mesh2.txt");
        save_mesh(&loaded, &path2).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
    }

    #[test]
    fn element_count_mismatch_is_parse_error() {
        let dir = std::env::temp_dir().join("esdg_mesh_badcount");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.txt");
        // Header claims two elements but only one is present.
        let ops = ops(1);
        let mesh = build_cartesian(1, 1, Rect::square(0.0, 1.0), &ops, true, true).unwrap();
        let mut text = String::new();
        text.push_str("esdg-mesh v1 N=1 elements=2\n");
        for c in &mesh.elements[0].coords {
            text.push_str(&format!("{:.16e} {:.16e}\n", c[0], c[1]));
        }
        text.push_str("faces\n");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(load_mesh(&path), Err(Error::Parse { .. })));
    }

    #[test]
    fn hand_written_curved_element_loads() {
        let dir = std::env::temp_dir().join("esdg_mesh_curved");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("curved.txt");
        // One N=2 element, gently curved by bending the midline nodes.
        let mut text = String::from("esdg-mesh v1 N=2 elements=1\n");
        let nodes = [0.0, 0.5, 1.0];
        for j in 0..3 {
            for i in 0..3 {
                let x: f64 = nodes[i];
                let y = nodes[j] + 0.1 * (PI * x).sin() * nodes[j] * (1.0 - nodes[j]);
                text.push_str(&format!("{:.16e} {:.16e}\n", x, y));
            }
        }
        text.push_str("faces\n");
        text.push_str("0 0 BOUNDARY bottom\n");
        text.push_str("0 1 BOUNDARY right\n");
        text.push_str("0 2 BOUNDARY top\n");
        text.push_str("0 3 BOUNDARY left\n");
        let _ = std::fs::write(&path, text);
        let mesh = load_mesh(&path).unwrap();
        assert_eq!(mesh.n_elements(), 1);
        assert!(mesh.elements[0].metric.iter().all(|m| m.jac > 0.0));
    }

    #[test]
    fn missing_side_record_is_error() {
        let faces = vec![Face {
            left_elem: 0,
            left_side: 0,
            kind: FaceKind::Boundary { tag: "b".into() },
        }];
        assert!(build_element_sides(1, &faces).is_err());
    }
}
