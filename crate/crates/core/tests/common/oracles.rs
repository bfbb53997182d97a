use g2p::feasibility::{feasible_force_set, max_downward_force, ForcePolygon};
use g2p::limb_sim::LimbParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GRID_STEPS: usize = 21;

/// `H = J⁻ᵀ·R·diag(F_max)` rebuilt from the link geometry alone.
pub fn force_map(p: &LimbParams, q: &[f64; 2]) -> [[f64; 3]; 2] {
    let [l1, l2] = p.link_lengths;
    let (s1, c1) = q[0].sin_cos();
    let (s12, c12) = (q[0] + q[1]).sin_cos();
    // Endpoint (x, y) = (l1 s1 + l2 s12, -l1 c1 - l2 c12).
    let j = [[l1 * c1 + l2 * c12, l2 * c12], [l1 * s1 + l2 * s12, l2 * s12]];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    // (J⁻¹)ᵀ for a 2×2 matrix.
    let inv_t = [[j[1][1] / det, -j[1][0] / det], [-j[0][1] / det, j[0][0] / det]];
    let mut h = [[0.0; 3]; 2];
    for r in 0..2 {
        for c in 0..3 {
            h[r][c] = (inv_t[r][0] * p.moment_arms[0][c] + inv_t[r][1] * p.moment_arms[1][c]) * p.f_max[c];
        }
    }
    h
}

pub fn apply(h: &[[f64; 3]; 2], a: &[f64; 3]) -> [f64; 2] {
    [0, 1].map(|r| h[r][0] * a[0] + h[r][1] * a[1] + h[r][2] * a[2])
}

pub fn jacobian_det(p: &LimbParams, q: &[f64; 2]) -> f64 {
    // det J = l1 l2 sin(q2), independent of q1.
    p.link_lengths[0] * p.link_lengths[1] * q[1].sin()
}

/// Images of every activation on a uniform `GRID_STEPS³` grid over `[0,1]³`.
pub fn grid_images(h: &[[f64; 3]; 2]) -> Vec<[f64; 2]> {
    let step = 1.0 / (GRID_STEPS - 1) as f64;
    let mut out = Vec::with_capacity(GRID_STEPS.pow(3));
    for i in 0..GRID_STEPS {
        for j in 0..GRID_STEPS {
            for k in 0..GRID_STEPS {
                out.push(apply(h, &[i as f64 * step, j as f64 * step, k as f64 * step]));
            }
        }
    }
    out
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Gift-wrapping hull, counterclockwise, strict vertices only. Points within
/// `eps · scale²` of a line through the current vertex count as collinear
/// and the farthest one wins.
pub fn jarvis_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let scale = points.iter().map(|p| p[0].abs().max(p[1].abs())).fold(1.0, f64::max);
    let eps = 1e-12 * scale * scale;
    let start = *points
        .iter()
        .min_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])))
        .expect("nonempty point set");
    let mut hull = vec![start];
    let mut current = start;
    loop {
        let mut next = if points[0] == current { points[1 % points.len()] } else { points[0] };
        for &p in points {
            if p == current {
                continue;
            }
            let c = cross(current, next, p);
            // p is clockwise of current→next, or collinear and farther.
            if c < -eps || (c.abs() <= eps && dist2(current, p) > dist2(current, next)) {
                next = p;
            }
        }
        if dist2(next, start) <= eps || hull.len() > points.len() {
            break;
        }
        hull.push(next);
        current = next;
    }
    hull
}

/// Both polygons have the same vertices, each within `tol` of a partner.
pub fn same_vertices(a: &[[f64; 2]], b: &[[f64; 2]], tol: f64) -> bool {
    let covered = |x: &[[f64; 2]], y: &[[f64; 2]]| {
        x.iter().all(|p| y.iter().any(|q| (p[0] - q[0]).abs() <= tol && (p[1] - q[1]).abs() <= tol))
    };
    a.len() == b.len() && covered(a, b) && covered(b, a)
}

pub fn random_postures(p: &LimbParams, n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let q = [0, 1].map(|j| {
            let [lo, hi] = p.joint_limits[j];
            rng.random_range(lo..=hi)
        });
        if jacobian_det(p, &q).abs() > 1e-3 {
            out.push(q);
        }
    }
    out
}

#[derive(Debug, Default)]
pub struct GridReport {
    pub postures: usize,
    pub vertex_mismatches: usize,
    pub worst_downforce_error: f64,
    pub worst_support_error: f64,
    pub containment_failures: usize,
}

impl GridReport {
    pub fn passed(&self) -> bool {
        self.vertex_mismatches == 0
            && self.worst_downforce_error < 1e-9
            && self.worst_support_error < 1e-9
            && self.containment_failures == 0
    }
}

/// Check the binary-vertex polygon, downforce, support and containment at
/// `postures` against the dense grid.
pub fn grid_oracle(p: &LimbParams, postures: &[[f64; 2]], seed: u64) -> GridReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = GridReport { postures: postures.len(), ..Default::default() };
    for q in postures {
        let h = force_map(p, q);
        let grid = grid_images(&h);
        let poly: ForcePolygon = feasible_force_set(p, q).expect("nonsingular posture");
        if !same_vertices(&jarvis_hull(&grid), &poly.vertices, 1e-9) {
            report.vertex_mismatches += 1;
        }

        let grid_down = grid.iter().map(|w| -w[1]).fold(f64::NEG_INFINITY, f64::max);
        let down = max_downward_force(p, q).expect("nonsingular posture");
        report.worst_downforce_error = report.worst_downforce_error.max((down - grid_down).abs());

        for _ in 0..100 {
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            let c = [angle.cos(), angle.sin()];
            let best = grid.iter().map(|w| c[0] * w[0] + c[1] * w[1]).fold(f64::NEG_INFINITY, f64::max);
            report.worst_support_error = report.worst_support_error.max((poly.support(&c) - best).abs());
        }

        for _ in 0..10_000 {
            let a = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
            if !poly.contains(&apply(&h, &a), 1e-9) {
                report.containment_failures += 1;
            }
        }
    }
    report
}
