//! Objects as unions of rigidly placed primitives.
//!
//! Every primitive has an exact signed distance function and a closed-form
//! closest-point query, so the union keeps exact distances outside the object.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::math::{sqrt, RigidTransform, Vec3};
use crate::rng::Rng;
use crate::{Error, Result};

/// Surface tolerance for sphere tracing.
pub const TRACE_EPSILON: f64 = 1e-6;
pub const TRACE_MAX_STEPS: usize = 256;
/// Central-difference step for surface normals.
pub const NORMAL_STEP: f64 = 1e-6;

/// Primitive shapes in their local frame.
///
/// Cylinders and prisms are centered on the origin with their axis along `z`.
/// A cone has its base disk in the `z = 0` plane and its apex at `z = height`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    Sphere { radius: f64 },
    Box { half_extents: Vec3 },
    Cylinder { radius: f64, half_height: f64 },
    Cone { radius: f64, height: f64 },
    /// Equilateral cross-section with side `edge`, centroid on the axis.
    TriangularPrism { edge: f64, half_length: f64 },
}

impl Shape {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Shape::Sphere { .. } => "sphere",
            Shape::Box { .. } => "box",
            Shape::Cylinder { .. } => "cylinder",
            Shape::Cone { .. } => "cone",
            Shape::TriangularPrism { .. } => "prism",
        }
    }

    pub fn parameters(&self) -> Vec<f64> {
        match *self {
            Shape::Sphere { radius } => alloc::vec![radius],
            Shape::Box { half_extents: h } => alloc::vec![h.x, h.y, h.z],
            Shape::Cylinder { radius, half_height } => alloc::vec![radius, half_height],
            Shape::Cone { radius, height } => alloc::vec![radius, height],
            Shape::TriangularPrism { edge, half_length } => alloc::vec![edge, half_length],
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.parameters().iter().all(|v| v.is_finite() && *v > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter("primitive sizes must be positive"))
        }
    }

    pub fn sdf(&self, p: Vec3) -> f64 {
        match *self {
            Shape::Sphere { radius } => p.norm() - radius,
            Shape::Box { half_extents: b } => {
                let q = Vec3::new(p.x.abs() - b.x, p.y.abs() - b.y, p.z.abs() - b.z);
                let outside = Vec3::new(q.x.max(0.0), q.y.max(0.0), q.z.max(0.0)).norm();
                outside + q.x.max(q.y.max(q.z)).min(0.0)
            }
            Shape::Cylinder { .. } | Shape::Cone { .. } => {
                let (rho, z) = (sqrt(p.x * p.x + p.y * p.y), p.z);
                let profile = self.revolved_profile();
                let (c, _) = closest_on_polyline(&profile, [rho, z]);
                let d = dist2(c, [rho, z]);
                if inside_polygon(&profile, [rho, z]) {
                    -d
                } else {
                    d
                }
            }
            Shape::TriangularPrism { edge, half_length } => {
                let tri = triangle(edge);
                let xy = [p.x, p.y];
                let (c, _) = closest_on_polygon(&tri, xy);
                let mut d2 = dist2(c, xy);
                if inside_polygon(&tri, xy) {
                    d2 = -d2;
                }
                extrusion_sdf(d2, p.z.abs() - half_length)
            }
        }
    }

    /// Closest point on the surface of the solid to `p` (local frame).
    pub fn closest_point(&self, p: Vec3) -> Vec3 {
        match *self {
            Shape::Sphere { radius } => p.normalized().unwrap_or(Vec3::X) * radius,
            Shape::Box { half_extents: b } => {
                let inside = p.x.abs() <= b.x && p.y.abs() <= b.y && p.z.abs() <= b.z;
                if !inside {
                    return Vec3::new(
                        p.x.clamp(-b.x, b.x),
                        p.y.clamp(-b.y, b.y),
                        p.z.clamp(-b.z, b.z),
                    );
                }
                let gaps = [b.x - p.x.abs(), b.y - p.y.abs(), b.z - p.z.abs()];
                let axis = argmin3(gaps);
                let mut out = p.to_array();
                let half = b.to_array()[axis];
                out[axis] = if out[axis] < 0.0 { -half } else { half };
                Vec3::from_array(out)
            }
            Shape::Cylinder { .. } | Shape::Cone { .. } => {
                let rho = sqrt(p.x * p.x + p.y * p.y);
                let (c, _) = closest_on_polyline(&self.revolved_profile(), [rho, p.z]);
                let dir = if rho > 1e-300 { Vec3::new(p.x / rho, p.y / rho, 0.0) } else { Vec3::X };
                Vec3::new(dir.x * c[0], dir.y * c[0], c[1])
            }
            Shape::TriangularPrism { edge, half_length } => {
                let tri = triangle(edge);
                let xy = [p.x, p.y];
                let (c, _) = closest_on_polygon(&tri, xy);
                let mut d2 = dist2(c, xy);
                if inside_polygon(&tri, xy) {
                    d2 = -d2;
                }
                let dz = p.z.abs() - half_length;
                let cap_z = if p.z < 0.0 { -half_length } else { half_length };
                if d2 > 0.0 || dz > 0.0 {
                    let (x, y) = if d2 > 0.0 { (c[0], c[1]) } else { (p.x, p.y) };
                    Vec3::new(x, y, p.z.clamp(-half_length, half_length))
                } else if d2 > dz {
                    Vec3::new(c[0], c[1], p.z)
                } else {
                    Vec3::new(p.x, p.y, cap_z)
                }
            }
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Shape::Sphere { radius } => 4.0 * PI * radius * radius,
            Shape::Box { half_extents: b } => 8.0 * (b.x * b.y + b.y * b.z + b.x * b.z),
            Shape::Cylinder { radius, half_height } => {
                2.0 * PI * radius * 2.0 * half_height + 2.0 * PI * radius * radius
            }
            Shape::Cone { radius, height } => {
                PI * radius * radius + PI * radius * sqrt(radius * radius + height * height)
            }
            Shape::TriangularPrism { edge, half_length } => {
                2.0 * (sqrt(3.0) / 4.0) * edge * edge + 3.0 * edge * 2.0 * half_length
            }
        }
    }

    /// Area-uniform point on the surface with its outward unit normal.
    pub fn sample_surface(&self, rng: &mut Rng) -> (Vec3, Vec3) {
        match *self {
            Shape::Sphere { radius } => loop {
                let v = Vec3::new(
                    StandardNormal.sample(rng),
                    StandardNormal.sample(rng),
                    StandardNormal.sample(rng),
                );
                if let Some(n) = v.normalized() {
                    break (n * radius, n);
                }
            },
            Shape::Box { half_extents: b } => {
                let areas = [b.y * b.z, b.x * b.z, b.x * b.y];
                let axis = pick_weighted(&areas, rng);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let mut p = [
                    rng.random_range(-b.x..=b.x),
                    rng.random_range(-b.y..=b.y),
                    rng.random_range(-b.z..=b.z),
                ];
                p[axis] = sign * b.to_array()[axis];
                let mut n = [0.0; 3];
                n[axis] = sign;
                (Vec3::from_array(p), Vec3::from_array(n))
            }
            Shape::Cylinder { radius, half_height } => {
                let side = 2.0 * PI * radius * 2.0 * half_height;
                let cap = PI * radius * radius;
                let theta = rng.random_range(0.0..2.0 * PI);
                let (s, c) = (crate::math::sin(theta), crate::math::cos(theta));
                match pick_weighted(&[side, cap, cap], rng) {
                    0 => {
                        let z = rng.random_range(-half_height..=half_height);
                        (Vec3::new(radius * c, radius * s, z), Vec3::new(c, s, 0.0))
                    }
                    k => {
                        let rho = radius * sqrt(rng.random::<f64>());
                        let sign = if k == 1 { 1.0 } else { -1.0 };
                        (Vec3::new(rho * c, rho * s, sign * half_height), Vec3::new(0.0, 0.0, sign))
                    }
                }
            }
            Shape::Cone { radius, height } => {
                let slant = sqrt(radius * radius + height * height);
                let base = PI * radius * radius;
                let flank = PI * radius * slant;
                let theta = rng.random_range(0.0..2.0 * PI);
                let (s, c) = (crate::math::sin(theta), crate::math::cos(theta));
                if pick_weighted(&[flank, base], rng) == 0 {
                    // density along the slant grows linearly away from the apex
                    let u = sqrt(rng.random::<f64>());
                    let rho = radius * u;
                    let z = height * (1.0 - u);
                    let n = Vec3::new(height * c, height * s, radius) / slant;
                    (Vec3::new(rho * c, rho * s, z), n)
                } else {
                    let rho = radius * sqrt(rng.random::<f64>());
                    (Vec3::new(rho * c, rho * s, 0.0), Vec3::new(0.0, 0.0, -1.0))
                }
            }
            Shape::TriangularPrism { edge, half_length } => {
                let tri = triangle(edge);
                let cap = (sqrt(3.0) / 4.0) * edge * edge;
                let side = edge * 2.0 * half_length;
                match pick_weighted(&[cap, cap, side, side, side], rng) {
                    k @ (0 | 1) => {
                        let (mut a, mut b) = (rng.random::<f64>(), rng.random::<f64>());
                        if a + b > 1.0 {
                            a = 1.0 - a;
                            b = 1.0 - b;
                        }
                        let x = tri[0][0] + a * (tri[1][0] - tri[0][0]) + b * (tri[2][0] - tri[0][0]);
                        let y = tri[0][1] + a * (tri[1][1] - tri[0][1]) + b * (tri[2][1] - tri[0][1]);
                        let sign = if k == 0 { 1.0 } else { -1.0 };
                        (Vec3::new(x, y, sign * half_length), Vec3::new(0.0, 0.0, sign))
                    }
                    k => {
                        let i = k - 2;
                        let (a, b) = (tri[i], tri[(i + 1) % 3]);
                        let u = rng.random::<f64>();
                        let x = a[0] + u * (b[0] - a[0]);
                        let y = a[1] + u * (b[1] - a[1]);
                        let z = rng.random_range(-half_length..=half_length);
                        // vertices run counter-clockwise, so (dy, -dx) points outward
                        let n = Vec3::new(b[1] - a[1], -(b[0] - a[0]), 0.0) / edge;
                        (Vec3::new(x, y, z), n)
                    }
                }
            }
        }
    }

    /// Closed (rho, z) profile whose revolution about `z` gives the solid.
    /// The first and last vertices lie on the axis; the axis segment is not surface.
    fn revolved_profile(&self) -> Vec<[f64; 2]> {
        match *self {
            Shape::Cylinder { radius, half_height: h } => {
                alloc::vec![[0.0, h], [radius, h], [radius, -h], [0.0, -h]]
            }
            Shape::Cone { radius, height } => alloc::vec![[0.0, height], [radius, 0.0], [0.0, 0.0]],
            _ => unreachable!("not a solid of revolution"),
        }
    }
}

fn extrusion_sdf(d2: f64, dz: f64) -> f64 {
    let (ox, oz) = (d2.max(0.0), dz.max(0.0));
    let outside = sqrt(ox * ox + oz * oz);
    d2.max(dz).min(0.0) + outside
}

fn argmin3(v: [f64; 3]) -> usize {
    let mut best = 0;
    for i in 1..3 {
        if v[i] < v[best] {
            best = i;
        }
    }
    best
}

fn pick_weighted(weights: &[f64], rng: &mut Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Counter-clockwise equilateral triangle with centroid at the origin.
fn triangle(edge: f64) -> [[f64; 2]; 3] {
    let r = edge / sqrt(3.0);
    [[0.0, r], [-edge / 2.0, -r / 2.0], [edge / 2.0, -r / 2.0]]
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    sqrt(dx * dx + dy * dy)
}

fn closest_on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> [f64; 2] {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0);
    [a[0] + t * ab[0], a[1] + t * ab[1]]
}

/// Closest point on an open polyline and the index of its segment.
fn closest_on_polyline(pts: &[[f64; 2]], p: [f64; 2]) -> ([f64; 2], usize) {
    let mut best = (pts[0], 0, f64::INFINITY);
    for i in 0..pts.len() - 1 {
        let c = closest_on_segment(pts[i], pts[i + 1], p);
        let d = dist2(c, p);
        if d < best.2 {
            best = (c, i, d);
        }
    }
    (best.0, best.1)
}

fn closest_on_polygon(pts: &[[f64; 2]], p: [f64; 2]) -> ([f64; 2], usize) {
    let mut best = (pts[0], 0, f64::INFINITY);
    for i in 0..pts.len() {
        let c = closest_on_segment(pts[i], pts[(i + 1) % pts.len()], p);
        let d = dist2(c, p);
        if d < best.2 {
            best = (c, i, d);
        }
    }
    (best.0, best.1)
}

/// Even-odd point-in-polygon test (boundary counts as either).
pub(crate) fn inside_polygon(pts: &[[f64; 2]], p: [f64; 2]) -> bool {
    let mut inside = false;
    let n = pts.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (pts[i], pts[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0];
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// A shape placed in its object's frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Primitive {
    shape: Shape,
    local_pose: RigidTransform,
}

impl Primitive {
    pub fn new(shape: Shape, local_pose: RigidTransform) -> Result<Self> {
        shape.validate()?;
        Ok(Self { shape, local_pose })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn local_pose(&self) -> &RigidTransform {
        &self.local_pose
    }
}

/// Named union of primitives placed in the world by `base_pose`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectModel {
    name: String,
    parts: Vec<Primitive>,
    base_pose: RigidTransform,
    // part pose composed with base pose
    world_poses: Vec<RigidTransform>,
}

impl ObjectModel {
    pub fn new(name: impl Into<String>, parts: Vec<Primitive>, base_pose: RigidTransform) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidParameter("object needs at least one part"));
        }
        let world_poses = parts.iter().map(|p| base_pose.compose(&p.local_pose)).collect();
        Ok(Self { name: name.into(), parts, base_pose, world_poses })
    }

    /// Single primitive at the origin.
    pub fn single(name: impl Into<String>, shape: Shape) -> Result<Self> {
        Self::new(name, alloc::vec![Primitive::new(shape, RigidTransform::IDENTITY)?], RigidTransform::IDENTITY)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn parts(&self) -> &[Primitive] {
        &self.parts
    }

    pub fn base_pose(&self) -> &RigidTransform {
        &self.base_pose
    }

    /// Same object under a different base pose.
    pub fn with_base_pose(&self, base_pose: RigidTransform) -> Self {
        Self::new(self.name.clone(), self.parts.clone(), base_pose).expect("parts already validated")
    }

    pub fn part_sdf(&self, part: usize, p: Vec3) -> f64 {
        self.parts[part].shape.sdf(self.world_poses[part].apply_inverse(p))
    }

    /// Signed distance of the union: the minimum over parts.
    pub fn sdf(&self, p: Vec3) -> f64 {
        (0..self.parts.len())
            .map(|i| self.part_sdf(i, p))
            .fold(f64::INFINITY, f64::min)
    }

    fn part_closest(&self, part: usize, p: Vec3) -> Vec3 {
        let pose = &self.world_poses[part];
        pose.apply(self.parts[part].shape.closest_point(pose.apply_inverse(p)))
    }

    fn inside_other_part(&self, skip: &[usize], q: Vec3) -> bool {
        (0..self.parts.len())
            .filter(|i| !skip.contains(i))
            .any(|i| self.part_sdf(i, q) < -1e-9)
    }

    fn part_gradient(&self, part: usize, x: Vec3) -> Vec3 {
        let h = 1e-7;
        let f = |d: Vec3| self.part_sdf(part, x + d) - self.part_sdf(part, x - d);
        Vec3::new(f(Vec3::X * h), f(Vec3::Y * h), f(Vec3::Z * h)) / (2.0 * h)
    }

    /// Nearest point to `p` on the curve where the surfaces of parts `a` and `b`
    /// meet, by repeated projection onto the linearised constraint pair.
    fn crease_point(&self, a: usize, b: usize, p: Vec3, start: Vec3) -> Option<Vec3> {
        let mut x = start;
        for _ in 0..60 {
            let (fa, fb) = (self.part_sdf(a, x), self.part_sdf(b, x));
            let (ga, gb) = (self.part_gradient(a, x), self.part_gradient(b, x));
            let (g11, g12, g22) = (ga.dot(ga), ga.dot(gb), gb.dot(gb));
            let det = g11 * g22 - g12 * g12;
            if det.abs() < 1e-12 {
                return None;
            }
            // y = v - G^T (G G^T)^-1 (G v - r), v = p - x, r = -(fa, fb)
            let v = p - x;
            let r1 = ga.dot(v) + fa;
            let r2 = gb.dot(v) + fb;
            let l1 = (g22 * r1 - g12 * r2) / det;
            let l2 = (g11 * r2 - g12 * r1) / det;
            let mut step = v - ga * l1 - gb * l2;
            let len = step.norm();
            let cap = 0.25 * (p - x).norm().max(1e-4);
            if len > cap {
                step = step * (cap / len);
            }
            x += step;
            if len < 1e-12 {
                break;
            }
        }
        let on_both = self.part_sdf(a, x).abs() < 1e-9 && self.part_sdf(b, x).abs() < 1e-9;
        (on_both && x.is_finite()).then_some(x)
    }

    /// Closest point on the object's surface and its distance from `p`.
    pub fn nearest_surface_point(&self, p: Vec3) -> (Vec3, f64) {
        let n = self.parts.len();
        let closest: Vec<Vec3> = (0..n).map(|i| self.part_closest(i, p)).collect();
        let by_distance = |cands: &mut dyn Iterator<Item = Vec3>| {
            cands.fold((Vec3::ZERO, f64::INFINITY), |best, q| {
                let d = p.distance(q);
                if d < best.1 {
                    (q, d)
                } else {
                    best
                }
            })
        };
        if n == 1 || self.sdf(p) >= 0.0 {
            // outside a union the nearest part's closest point is exact
            return by_distance(&mut closest.iter().copied());
        }
        let mut candidates: Vec<Vec3> = closest
            .iter()
            .enumerate()
            .filter(|(i, q)| !self.inside_other_part(&[*i], **q))
            .map(|(_, q)| *q)
            .collect();
        for a in 0..n {
            for b in (a + 1)..n {
                for start in [closest[a], closest[b]] {
                    if let Some(x) = self.crease_point(a, b, p, start) {
                        if !self.inside_other_part(&[a, b], x) {
                            candidates.push(x);
                        }
                    }
                }
            }
        }
        if candidates.is_empty() {
            return by_distance(&mut closest.iter().copied());
        }
        by_distance(&mut candidates.into_iter())
    }

    /// Unit outward normal at a surface point from the central-difference SDF gradient.
    pub fn surface_normal(&self, q: Vec3) -> Result<Vec3> {
        if self.sdf(q).abs() >= 1e-4 {
            return Err(Error::InvalidParameter("point is not on the surface"));
        }
        let h = NORMAL_STEP;
        let f = |d: Vec3| self.sdf(q + d) - self.sdf(q - d);
        let g = Vec3::new(f(Vec3::X * h), f(Vec3::Y * h), f(Vec3::Z * h)) / (2.0 * h);
        if g.norm() < 1e-9 {
            return Err(Error::AmbiguousNormal);
        }
        Ok(g / g.norm())
    }

    /// Sphere-traced first hit along a unit ray within `(0, t_max]`.
    pub fn raycast(&self, origin: Vec3, dir: Vec3, t_max: f64) -> Option<f64> {
        let mut t = 0.0;
        for _ in 0..TRACE_MAX_STEPS {
            let d = self.sdf(origin + dir * t);
            if d.abs() < TRACE_EPSILON && t > 0.0 {
                return Some(self.refine_hit(origin, dir, t, d).min(t_max));
            }
            t += d.abs().max(if t == 0.0 { 2.0 * TRACE_EPSILON } else { 0.0 });
            if t > t_max {
                return None;
            }
        }
        None
    }

    /// Newton steps along the ray; sphere tracing stops short at grazing incidence.
    fn refine_hit(&self, origin: Vec3, dir: Vec3, mut t: f64, mut d: f64) -> f64 {
        for _ in 0..3 {
            let h = NORMAL_STEP;
            let slope = (self.sdf(origin + dir * (t + h)) - self.sdf(origin + dir * (t - h))) / (2.0 * h);
            if slope > -1e-3 {
                break;
            }
            let t_next = t - d / slope;
            let d_next = self.sdf(origin + dir * t_next);
            if !(t_next > 0.0 && d_next.abs() <= d.abs()) {
                break;
            }
            t = t_next;
            d = d_next;
        }
        t
    }

    pub fn area(&self) -> f64 {
        self.parts.iter().map(|p| p.shape.area()).sum()
    }

    /// Approximately area-uniform surface point with its outward normal.
    ///
    /// Parts are chosen by area; points buried inside another part are rejected.
    pub fn sample_surface_point(&self, rng: &mut Rng) -> (Vec3, Vec3) {
        let areas: Vec<f64> = self.parts.iter().map(|p| p.shape.area()).collect();
        let mut fallback = None;
        for _ in 0..10_000 {
            let i = pick_weighted(&areas, rng);
            let (q, n) = self.parts[i].shape.sample_surface(rng);
            let pose = &self.world_poses[i];
            let (q, n) = (pose.apply(q), pose.apply_vector(n));
            if !self.inside_other_part(&[i], q) {
                return (q, n);
            }
            fallback.get_or_insert((q, n));
        }
        fallback.expect("at least one draw")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Mat3;
    use crate::rng::seeded;

    fn unit_sphere() -> ObjectModel {
        ObjectModel::single("sphere", Shape::Sphere { radius: 1.0 }).unwrap()
    }

    fn at(shape: Shape, t: Vec3) -> Primitive {
        Primitive::new(shape, RigidTransform::from_translation(t)).unwrap()
    }

    #[test]
    fn sphere_sdf_examples() {
        let s = unit_sphere();
        assert_eq!(s.sdf(Vec3::ZERO), -1.0);
        assert_eq!(s.sdf(Vec3::new(2.0, 0.0, 0.0)), 1.0);
    }

    #[test]
    fn union_takes_minimum() {
        let sph = Shape::Sphere { radius: 1.0 };
        let o = ObjectModel::new(
            "pair",
            alloc::vec![at(sph, Vec3::ZERO), at(sph, Vec3::new(3.0, 0.0, 0.0))],
            RigidTransform::IDENTITY,
        )
        .unwrap();
        assert_eq!(o.sdf(Vec3::new(3.0, 0.0, 0.0)), -1.0);
    }

    #[test]
    fn nearest_point_examples() {
        let (q, d) = unit_sphere().nearest_surface_point(Vec3::new(2.0, 0.0, 0.0));
        assert!((q - Vec3::X).norm() < 1e-15);
        assert!((d - 1.0).abs() < 1e-15);
        let cube = ObjectModel::single("cube", Shape::Box { half_extents: Vec3::new(1.0, 1.0, 1.0) }).unwrap();
        let (q, d) = cube.nearest_surface_point(Vec3::new(2.0, 2.0, 2.0));
        assert!((q - Vec3::new(1.0, 1.0, 1.0)).norm() < 1e-15);
        assert!((d - sqrt(3.0)).abs() < 1e-12);
    }

    #[test]
    fn normals_on_sphere_and_box() {
        let n = unit_sphere().surface_normal(Vec3::X).unwrap();
        assert!((n - Vec3::X).norm() < 1e-6);
        let cube = ObjectModel::single("cube", Shape::Box { half_extents: Vec3::new(1.0, 1.0, 1.0) }).unwrap();
        let n = cube.surface_normal(Vec3::new(1.0, 0.2, 0.3)).unwrap();
        assert!((n - Vec3::X).norm() < 1e-5);
    }

    #[test]
    fn cone_flank_normal_matches_closed_form() {
        let (r, h) = (0.02, 0.05);
        let cone = ObjectModel::single("cone", Shape::Cone { radius: r, height: h }).unwrap();
        let theta: f64 = 0.7;
        let u = 0.4;
        let q = Vec3::new(r * u * libm::cos(theta), r * u * libm::sin(theta), h * (1.0 - u));
        let slant = sqrt(r * r + h * h);
        let analytic = Vec3::new(h * libm::cos(theta), h * libm::sin(theta), r) / slant;
        let n = cone.surface_normal(q).unwrap();
        assert!((n - analytic).norm() < 1e-4, "{n:?} vs {analytic:?}");
    }

    #[test]
    fn normal_off_surface_is_rejected() {
        assert!(unit_sphere().surface_normal(Vec3::new(3.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn raycast_examples() {
        let s = unit_sphere();
        let t = s.raycast(Vec3::new(0.0, 0.0, -5.0), Vec3::Z, 10.0).unwrap();
        assert!((t - 4.0).abs() < 1e-6);
        assert_eq!(s.raycast(Vec3::new(0.0, 0.0, -5.0), Vec3::Z, 3.0), None);
    }

    #[test]
    fn raycast_cylinder_side_matches_quadratic() {
        let (r, h) = (0.02, 0.03);
        let cyl = ObjectModel::single("cyl", Shape::Cylinder { radius: r, half_height: h }).unwrap();
        let origin = Vec3::new(-0.1, 0.007, 0.004);
        let dir = Vec3::new(1.0, 0.1, -0.05).normalized().unwrap();
        // |o_xy + t d_xy|^2 = r^2
        let a = dir.x * dir.x + dir.y * dir.y;
        let b = 2.0 * (origin.x * dir.x + origin.y * dir.y);
        let c = origin.x * origin.x + origin.y * origin.y - r * r;
        let t_exact = (-b - sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
        let t = cyl.raycast(origin, dir, 1.0).unwrap();
        assert!((t - t_exact).abs() < 1e-5, "{t} vs {t_exact}");
        assert!(cyl.sdf(origin + dir * t).abs() < 1e-5);
    }

    #[test]
    fn sphere_samples_are_centered() {
        let s = unit_sphere();
        let mut rng = seeded(1);
        let mut acc = Vec3::ZERO;
        let n = 100_000;
        for _ in 0..n {
            let (q, normal) = s.sample_surface_point(&mut rng);
            assert!(s.sdf(q).abs() < 1e-12);
            assert!((normal - q).norm() < 1e-12);
            acc += q;
        }
        assert!((acc / n as f64).norm() < 0.02);
    }

    #[test]
    fn box_face_frequencies_follow_areas() {
        let b = Vec3::new(0.03, 0.02, 0.01);
        let cube = ObjectModel::single("box", Shape::Box { half_extents: b }).unwrap();
        let mut rng = seeded(5);
        let mut counts = [0usize; 3];
        let n = 100_000;
        for _ in 0..n {
            let (_, normal) = cube.sample_surface_point(&mut rng);
            let axis = argmin3([-normal.x.abs(), -normal.y.abs(), -normal.z.abs()]);
            counts[axis] += 1;
        }
        let areas = [b.y * b.z, b.x * b.z, b.x * b.y];
        let total: f64 = areas.iter().sum();
        for k in 0..3 {
            let expected = areas[k] / total;
            let observed = counts[k] as f64 / n as f64;
            assert!((observed - expected).abs() < 0.02 * expected.max(0.1), "{k}: {observed} vs {expected}");
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = unit_sphere();
        assert_eq!(s.sample_surface_point(&mut seeded(42)), s.sample_surface_point(&mut seeded(42)));
    }

    #[test]
    fn composite_samples_stay_on_union_surface() {
        let o = ObjectModel::new(
            "screwdriver",
            alloc::vec![
                at(Shape::Cylinder { radius: 0.01, half_height: 0.03 }, Vec3::ZERO),
                at(Shape::Cone { radius: 0.008, height: 0.03 }, Vec3::new(0.0, 0.0, 0.02)),
            ],
            RigidTransform::IDENTITY,
        )
        .unwrap();
        let mut rng = seeded(3);
        for _ in 0..2000 {
            let (q, _) = o.sample_surface_point(&mut rng);
            assert!(o.sdf(q).abs() < 1e-9);
        }
    }

    #[test]
    fn prism_closest_point_is_on_surface() {
        let prism = ObjectModel::new(
            "prism",
            alloc::vec![Primitive::new(
                Shape::TriangularPrism { edge: 0.04, half_length: 0.02 },
                RigidTransform::new(Mat3::rot_x(0.5), Vec3::new(0.01, 0.0, 0.0)).unwrap(),
            )
            .unwrap()],
            RigidTransform::IDENTITY,
        )
        .unwrap();
        let mut rng = seeded(9);
        for _ in 0..500 {
            let p = Vec3::new(
                rng.random_range(-0.05..0.05),
                rng.random_range(-0.05..0.05),
                rng.random_range(-0.05..0.05),
            );
            let (q, d) = prism.nearest_surface_point(p);
            assert!(prism.sdf(q).abs() < 1e-12);
            assert!((d - prism.sdf(p).abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_sizes_are_rejected() {
        assert!(Primitive::new(Shape::Sphere { radius: 0.0 }, RigidTransform::IDENTITY).is_err());
        assert!(ObjectModel::new("empty", Vec::new(), RigidTransform::IDENTITY).is_err());
    }
}
