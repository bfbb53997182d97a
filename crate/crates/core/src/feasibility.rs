//! Feasible endpoint force sets.
//!
//! At a posture `q` the endpoint force produced by activations `a ∈ [0,1]³`
//! is `w = J⁻ᵀ·R·diag(F_max)·a = H·a`. The image of the activation cube is a
//! zonotope whose vertices are among the images of the eight binary
//! activation vectors, so the feasible set is the convex hull of those eight
//! points and any linear objective over it peaks at one of them.

use std::io::Write;
use std::path::Path;

use nalgebra::{Matrix2x3, Vector3};
use serde::Serialize;

use crate::limb_sim::{fmt_sig9, jacobian, LimbParams};
use crate::{Error, Result};

/// Postures whose `|det J|` falls below this are treated as singular.
pub const SINGULAR_DET: f64 = 1e-9;

/// Relative tolerance below which three hull points count as collinear.
const COLLINEAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputMap {
    /// N per unit activation; column `i` is the force of tendon `i` at full drive.
    pub h: Matrix2x3<f64>,
}

impl OutputMap {
    pub fn apply(&self, a: &[f64; 3]) -> [f64; 2] {
        let w = self.h * Vector3::from(*a);
        [w[0], w[1]]
    }

    /// Images of the eight binary activation vectors, in binary counting order
    /// (`a_i` is bit `i`).
    pub fn binary_images(&self) -> [[f64; 2]; 8] {
        std::array::from_fn(|bits| {
            let a = [0, 1, 2].map(|i| ((bits >> i) & 1) as f64);
            self.apply(&a)
        })
    }
}

pub fn output_map(params: &LimbParams, q: &[f64; 2]) -> Result<OutputMap> {
    let jac = jacobian(params, q);
    let det = jac.determinant();
    if det.abs() < SINGULAR_DET {
        return Err(Error::SingularPosture { det });
    }
    let inv_t = jac
        .try_inverse()
        .ok_or(Error::SingularPosture { det })?
        .transpose();
    let r = &params.moment_arms;
    let rf = Matrix2x3::from_fn(|i, j| r[i][j] * params.f_max[j]);
    Ok(OutputMap { h: inv_t * rf })
}

/// A convex polygon with counterclockwise vertices and no collinear runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForcePolygon {
    pub vertices: Vec<[f64; 2]>,
}

impl ForcePolygon {
    /// Point-in-convex-polygon test with absolute tolerance `tol` on the
    /// signed edge distances.
    pub fn contains(&self, p: &[f64; 2], tol: f64) -> bool {
        let v = &self.vertices;
        match v.len() {
            0 => false,
            1 => dist(&v[0], p) <= tol,
            2 => segment_distance(&v[0], &v[1], p) <= tol,
            n => (0..n).all(|i| {
                let a = &v[i];
                let b = &v[(i + 1) % n];
                let len = dist(a, b);
                cross(a, b, p) / len >= -tol
            }),
        }
    }

    /// Maximum of `c·w` over the polygon.
    pub fn support(&self, c: &[f64; 2]) -> f64 {
        self.vertices
            .iter()
            .map(|v| c[0] * v[0] + c[1] * v[1])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn cross(o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn dist(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn segment_distance(a: &[f64; 2], b: &[f64; 2], p: &[f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 {
        return dist(a, p);
    }
    let t = (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0);
    dist(&[a[0] + t * ab[0], a[1] + t * ab[1]], p)
}

/// Andrew's monotone chain. Returns the hull counterclockwise starting from
/// the lowest-x (then lowest-y) point. Collinear and duplicate points are
/// dropped; with fewer than three distinct non-collinear points the result
/// is the extreme points themselves.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let scale = pts
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0_f64, |m, x| m.max(x.abs()))
        .max(f64::MIN_POSITIVE);
    let tol = COLLINEAR_TOL * scale * scale;

    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for p in iter {
            while hull.len() >= start + 2
                && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= tol
            {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    if hull.len() < 3 {
        // Everything collinear: keep the two extremes.
        hull.truncate(2);
    }
    hull
}

pub fn feasible_force_set(params: &LimbParams, q: &[f64; 2]) -> Result<ForcePolygon> {
    let map = output_map(params, q)?;
    Ok(ForcePolygon { vertices: convex_hull(&map.binary_images()) })
}

/// Largest achievable downward endpoint force `max(−f_y)`, in newtons.
pub fn max_downward_force(params: &LimbParams, q: &[f64; 2]) -> Result<f64> {
    let map = output_map(params, q)?;
    Ok(map
        .binary_images()
        .iter()
        .map(|w| -w[1])
        .fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub q: [f64; 2],
    /// `None` at a singular posture.
    pub max_down_n: Option<f64>,
    /// Downforce minus total limb weight.
    pub weight_margin_n: Option<f64>,
}

impl SweepRow {
    pub fn is_singular(&self) -> bool {
        self.max_down_n.is_none()
    }
}

/// Downforce at each posture of a propulsive stroke, in input order.
/// Singular postures are flagged rather than aborting the sweep.
pub fn stroke_sweep(params: &LimbParams, postures: &[[f64; 2]]) -> Vec<SweepRow> {
    let weight = params.weight();
    postures
        .iter()
        .map(|q| match max_downward_force(params, q) {
            Ok(f) => SweepRow { q: *q, max_down_n: Some(f), weight_margin_n: Some(f - weight) },
            Err(_) => SweepRow { q: *q, max_down_n: None, weight_margin_n: None },
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["q0", "q1", "max_down_N", "weight_margin_N"])?;
    for r in rows {
        let opt = |x: Option<f64>| x.map_or_else(|| "nan".to_owned(), fmt_sig9);
        wtr.write_record([
            fmt_sig9(r.q[0]),
            fmt_sig9(r.q[1]),
            opt(r.max_down_n),
            opt(r.weight_margin_n),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    write_sweep_csv(rows, std::io::BufWriter::new(std::fs::File::create(path)?))
}

/// Postures spanning a propulsive stroke: the proximal joint swinging
/// through its middle range with the distal joint partly flexed.
pub fn default_stroke_postures() -> Vec<[f64; 2]> {
    vec![[-0.5, 0.6], [-0.25, 0.5], [0.0, 0.45], [0.25, 0.5], [0.5, 0.6]]
}
