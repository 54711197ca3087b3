//! Synthetic magnetometer skin.
//!
//! The gel pad's indentation field is mapped to three readings per site: a
//! normal component from a Gaussian-weighted sum of penetration, and two
//! lateral components from the first moment of that weighting.

use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, Normal};

use crate::math::{cos, exp, sin, sqrt};
use crate::render::{pixel_center, Heightfield, PATCH_PIXELS, PATCH_SIZE};
use crate::shapeclass::StampShape;
use crate::{Error, Result};

pub const SITES: usize = 5;
pub const SIGNAL_DIM: usize = 3 * SITES;
/// Gel saturation depth (mm); also the stamp depth.
pub const DELTA_MAX_MM: f64 = 3.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignalSpace {
    Raw,
    Standardized,
}

/// Readings ordered `(site0.x, site0.y, site0.z, …, site4.z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TactileSignal {
    pub values: [f64; SIGNAL_DIM],
    pub space: SignalSpace,
}

impl TactileSignal {
    pub fn raw(values: [f64; SIGNAL_DIM]) -> Self {
        Self { values, space: SignalSpace::Raw }
    }

    pub fn standardized(values: [f64; SIGNAL_DIM]) -> Self {
        Self { values, space: SignalSpace::Standardized }
    }

    pub fn from_slice(values: &[f64], space: SignalSpace) -> Result<Self> {
        let values: [f64; SIGNAL_DIM] = values
            .try_into()
            .map_err(|_| Error::DimensionMismatch { expected: SIGNAL_DIM, actual: values.len() })?;
        Ok(Self { values, space })
    }

    pub fn expect_space(&self, space: SignalSpace) -> Result<()> {
        if self.space == space {
            Ok(())
        } else {
            Err(Error::SignalSpaceMismatch { expected: space })
        }
    }

    pub fn distance(&self, other: &TactileSignal) -> f64 {
        sqrt(self.values.iter().zip(&other.values).map(|(a, b)| (a - b) * (a - b)).sum())
    }

    pub fn site(&self, j: usize) -> [f64; 3] {
        [self.values[3 * j], self.values[3 * j + 1], self.values[3 * j + 2]]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SensorLayout {
    /// Site positions in the pad plane (mm).
    pub sites: [(f64, f64); SITES],
    pub kernel_sigma: f64,
    pub gain_z: f64,
    pub gain_t: f64,
    pub noise_std: f64,
}

impl Default for SensorLayout {
    fn default() -> Self {
        Self {
            // center, then the corners counter-clockwise from (+,+)
            sites: [(0.0, 0.0), (5.0, 5.0), (-5.0, 5.0), (-5.0, -5.0), (5.0, -5.0)],
            kernel_sigma: 3.0,
            gain_z: 1.0,
            gain_t: 1.0,
            noise_std: 0.01,
        }
    }
}

impl SensorLayout {
    pub fn validate(&self) -> Result<()> {
        for a in 0..SITES {
            for b in (a + 1)..SITES {
                if self.sites[a] == self.sites[b] {
                    return Err(Error::InvalidParameter("sensor sites must be distinct"));
                }
            }
        }
        if !(self.kernel_sigma > 0.0) {
            return Err(Error::InvalidParameter("kernel_sigma must be positive"));
        }
        if !(self.noise_std >= 0.0) {
            return Err(Error::InvalidParameter("noise_std must be non-negative"));
        }
        Ok(())
    }
}

/// Per-pixel gel penetration (mm), row-major 48×48.
#[derive(Clone, Debug, PartialEq)]
pub struct IndentationField {
    pub delta: Vec<f64>,
    pub pixel_pitch: f64,
}

impl IndentationField {
    pub fn zeros(pixel_pitch: f64) -> Self {
        Self { delta: vec![0.0; PATCH_PIXELS], pixel_pitch }
    }

    pub fn pad_side(&self) -> f64 {
        self.pixel_pitch * PATCH_SIZE as f64
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { delta: self.delta.iter().map(|d| d * c).collect(), pixel_pitch: self.pixel_pitch }
    }
}

/// Press the pad `penetration_mm` past first contact.
///
/// `δ = clamp(h_min + penetration − h, 0, δmax)` on hit pixels; misses stay at 0.
pub fn indentation_from_heightfield(h: &Heightfield, penetration_mm: f64) -> Result<IndentationField> {
    if !(penetration_mm > 0.0 && penetration_mm <= DELTA_MAX_MM) {
        return Err(Error::InvalidParameter("penetration must lie in (0, 3.5] mm"));
    }
    let pitch = h.pad_side * 1e3 / PATCH_SIZE as f64;
    let mut field = IndentationField::zeros(pitch);
    let Some((_, h_min)) = h.first_contact() else {
        return Ok(field);
    };
    let h_min_mm = h_min * 1e3;
    for ((delta, depth), hit) in field.delta.iter_mut().zip(&h.depths).zip(&h.hits) {
        if *hit {
            *delta = (h_min_mm + penetration_mm - depth * 1e3).clamp(0.0, DELTA_MAX_MM);
        }
    }
    Ok(field)
}

/// Raw 15-dim reading for an indentation field. Gaussian noise is added only
/// when `noise_seed` is given.
pub fn simulate_tactile(field: &IndentationField, layout: &SensorLayout, noise_seed: Option<u64>) -> TactileSignal {
    let sigma = layout.kernel_sigma;
    let pitch = field.pixel_pitch;
    let pixel_area = pitch * pitch;
    let pad = field.pad_side();
    let mut values = [0.0; SIGNAL_DIM];
    for (j, &(sx, sy)) in layout.sites.iter().enumerate() {
        let (mut lx, mut ly, mut lz) = (0.0, 0.0, 0.0);
        for (k, &d) in field.delta.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let (x, y) = pixel_center(pad, k / PATCH_SIZE, k % PATCH_SIZE);
            let (dx, dy) = (x - sx, y - sy);
            let w = d * exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma)) * pixel_area;
            lz += w;
            lx += w * dx / sigma;
            ly += w * dy / sigma;
        }
        values[3 * j] = layout.gain_t * lx;
        values[3 * j + 1] = layout.gain_t * ly;
        values[3 * j + 2] = layout.gain_z * lz;
    }
    if let Some(seed) = noise_seed {
        if layout.noise_std > 0.0 {
            let mut rng = crate::rng::seeded(seed);
            let normal = Normal::new(0.0, layout.noise_std).expect("validated std");
            for v in values.iter_mut() {
                *v += normal.sample(&mut rng);
            }
        }
    }
    TactileSignal::raw(values)
}

/// Stamp cross-section dimensions (mm).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StampConfig {
    /// Overall width of every stamp.
    pub width: f64,
    /// Bar thickness of the T, angle and cross.
    pub bar: f64,
    /// Contact plane depth of pressed pixels.
    pub depth: f64,
    pub pad_side: f64,
    pub standoff: f64,
}

impl Default for StampConfig {
    fn default() -> Self {
        Self { width: 10.0, bar: 2.0, depth: DELTA_MAX_MM, pad_side: 20.0, standoff: 10.0 }
    }
}

type Rect = [f64; 4]; // x0, x1, y0, y1

enum Outline {
    Rects(Vec<Rect>),
    Disk(f64),
    Polygon(Vec<[f64; 2]>),
}

fn outline(shape: StampShape, c: &StampConfig) -> Outline {
    let h = c.width / 2.0;
    let b = c.bar;
    match shape {
        StampShape::T => Outline::Rects(vec![[-h, h, h - b, h], [-b / 2.0, b / 2.0, -h, h - b]]),
        StampShape::Circle => Outline::Disk(h),
        StampShape::Angle => Outline::Rects(vec![[-h, -h + b, -h, h], [-h, h, -h, -h + b]]),
        StampShape::Triangle => {
            let r = c.width / sqrt(3.0);
            Outline::Polygon(vec![[0.0, r], [-h, -r / 2.0], [h, -r / 2.0]])
        }
        StampShape::Cross => Outline::Rects(vec![[-h, h, -b / 2.0, b / 2.0], [-b / 2.0, b / 2.0, -h, h]]),
    }
}

impl Outline {
    fn contains(&self, u: f64, v: f64) -> bool {
        match self {
            Outline::Rects(rs) => rs.iter().any(|r| u >= r[0] && u <= r[1] && v >= r[2] && v <= r[3]),
            Outline::Disk(r) => u * u + v * v <= r * r,
            Outline::Polygon(p) => crate::geometry::inside_polygon(p, [u, v]),
        }
    }

    /// Points whose images bound the outline's extent after a rigid motion.
    fn extreme_points(&self) -> Vec<[f64; 2]> {
        match self {
            Outline::Rects(rs) => rs
                .iter()
                .flat_map(|r| [[r[0], r[2]], [r[0], r[3]], [r[1], r[2]], [r[1], r[3]]])
                .collect(),
            Outline::Disk(r) => (0..64)
                .map(|k| {
                    let a = k as f64 * core::f64::consts::TAU / 64.0;
                    [r * cos(a), r * sin(a)]
                })
                .collect(),
            Outline::Polygon(p) => p.clone(),
        }
    }
}

/// Heightfield of a flat stamp pressed into the pad: pixels under the rotated
/// and offset cross-section read `depth`, all others miss.
pub fn stamp_heightfield(
    shape: StampShape,
    offset_mm: (f64, f64),
    rotation: f64,
    config: &StampConfig,
) -> Result<Heightfield> {
    let o = outline(shape, config);
    let (s, c) = (sin(rotation), cos(rotation));
    let half = config.pad_side / 2.0;
    let reach = match o {
        Outline::Disk(r) => {
            let (x, y) = offset_mm;
            x.abs() + r <= half && y.abs() + r <= half
        }
        _ => o.extreme_points().iter().all(|p| {
            let x = c * p[0] - s * p[1] + offset_mm.0;
            let y = s * p[0] + c * p[1] + offset_mm.1;
            x.abs() <= half && y.abs() <= half
        }),
    };
    if !reach {
        return Err(Error::StampOutOfPad);
    }
    let mut h = Heightfield::empty(config.pad_side * 1e-3, config.standoff * 1e-3);
    for i in 0..PATCH_SIZE {
        for j in 0..PATCH_SIZE {
            let (x, y) = pixel_center(config.pad_side, i, j);
            let (dx, dy) = (x - offset_mm.0, y - offset_mm.1);
            // rotate back into the stamp's own frame
            let u = c * dx + s * dy;
            let v = -s * dx + c * dy;
            if o.contains(u, v) {
                let k = i * PATCH_SIZE + j;
                h.depths[k] = config.depth * 1e-3;
                h.hits[k] = true;
            }
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_heightfield(depth_m: f64) -> Heightfield {
        let mut h = Heightfield::empty(0.02, 0.01);
        h.depths.iter_mut().for_each(|d| *d = depth_m);
        h.hits.iter_mut().for_each(|x| *x = true);
        h
    }

    #[test]
    fn uniform_press() {
        let f = indentation_from_heightfield(&uniform_heightfield(0.005), 2.0).unwrap();
        assert!(f.delta.iter().all(|d| (d - 2.0).abs() < 1e-12));
    }

    #[test]
    fn press_saturates() {
        // penetration beyond the gel depth is rejected, full depth saturates
        assert!(indentation_from_heightfield(&uniform_heightfield(0.005), 5.0).is_err());
        let f = indentation_from_heightfield(&uniform_heightfield(0.005), 3.5).unwrap();
        assert!(f.delta.iter().all(|d| (d - 3.5).abs() < 1e-12));
    }

    #[test]
    fn two_level_press() {
        let mut h = uniform_heightfield(0.005);
        for k in 0..PATCH_PIXELS / 2 {
            h.depths[k] = 0.006;
        }
        let f = indentation_from_heightfield(&h, 1.5).unwrap();
        for (k, d) in f.delta.iter().enumerate() {
            let want = if k < PATCH_PIXELS / 2 { 0.5 } else { 1.5 };
            assert!((d - want).abs() < 1e-9);
        }
    }

    #[test]
    fn missing_surface_gives_no_indentation() {
        let f = indentation_from_heightfield(&Heightfield::empty(0.02, 0.01), 1.0).unwrap();
        assert!(f.delta.iter().all(|d| *d == 0.0));
    }

    #[test]
    fn zero_field_is_silent() {
        let s = simulate_tactile(&IndentationField::zeros(20.0 / 48.0), &SensorLayout::default(), None);
        assert_eq!(s.values, [0.0; SIGNAL_DIM]);
        assert_eq!(s.space, SignalSpace::Raw);
    }

    #[test]
    fn uniform_field_has_no_lateral_center_response() {
        let mut f = IndentationField::zeros(20.0 / 48.0);
        f.delta.iter_mut().for_each(|d| *d = 1.0);
        let s = simulate_tactile(&f, &SensorLayout::default(), None);
        assert!(s.values[0].abs() < 1e-9 && s.values[1].abs() < 1e-9);
        assert!(s.values[2] > 0.0);
    }

    #[test]
    fn single_pixel_under_site() {
        let mut layout = SensorLayout::default();
        let pitch = 20.0 / 48.0;
        let (x, y) = pixel_center(20.0, 30, 12);
        layout.sites[2] = (x, y);
        let mut f = IndentationField::zeros(pitch);
        f.delta[30 * PATCH_SIZE + 12] = 1.0;
        let s = simulate_tactile(&f, &layout, None);
        let [sx, sy, sz] = s.site(2);
        assert!(sx.abs() < 1e-12 && sy.abs() < 1e-12);
        assert!((sz - pitch * pitch).abs() < 1e-15);
    }

    #[test]
    fn noise_is_seeded() {
        let f = IndentationField::zeros(20.0 / 48.0);
        let layout = SensorLayout::default();
        let a = simulate_tactile(&f, &layout, Some(7));
        assert_eq!(a, simulate_tactile(&f, &layout, Some(7)));
        assert_ne!(a, simulate_tactile(&f, &layout, Some(8)));
        assert!(a.values.iter().all(|v| v.abs() < 0.1));
    }

    #[test]
    fn layout_validation() {
        let mut l = SensorLayout::default();
        l.sites[1] = l.sites[0];
        assert!(l.validate().is_err());
        let l = SensorLayout { kernel_sigma: 0.0, ..SensorLayout::default() };
        assert!(l.validate().is_err());
    }

    #[test]
    fn centered_circle_is_a_disk() {
        let c = StampConfig::default();
        let h = stamp_heightfield(StampShape::Circle, (0.0, 0.0), 0.0, &c).unwrap();
        for k in 0..PATCH_PIXELS {
            let (x, y) = pixel_center(20.0, k / PATCH_SIZE, k % PATCH_SIZE);
            assert_eq!(h.hits[k], x * x + y * y <= 25.0);
            if h.hits[k] {
                assert!((h.depths[k] - 0.0035).abs() < 1e-15);
            }
        }
        let rotated = stamp_heightfield(StampShape::Circle, (0.0, 0.0), core::f64::consts::FRAC_PI_3, &c).unwrap();
        assert_eq!(h, rotated);
    }

    #[test]
    fn cross_and_t_differ() {
        let c = StampConfig::default();
        let a = stamp_heightfield(StampShape::Cross, (1.0, -1.0), 0.2, &c).unwrap();
        let b = stamp_heightfield(StampShape::T, (1.0, -1.0), 0.2, &c).unwrap();
        let differing = a.hits.iter().zip(&b.hits).filter(|(x, y)| x != y).count();
        assert!(differing as f64 >= 0.05 * PATCH_PIXELS as f64, "{differing}");
    }

    #[test]
    fn stamp_must_stay_on_pad() {
        let c = StampConfig::default();
        assert_eq!(
            stamp_heightfield(StampShape::Cross, (6.0, 0.0), 0.0, &c),
            Err(Error::StampOutOfPad)
        );
        assert!(stamp_heightfield(StampShape::Cross, (4.0, 4.0), 0.0, &c).is_ok());
    }
}
