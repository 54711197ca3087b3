//! Sensor-aligned orthographic depth rendering.
//!
//! The pad is a square in the frame's xy-plane; each of the 48×48 pixels casts
//! one ray along the frame's +z axis (the approach direction) for at most
//! `standoff` meters.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::ObjectModel;
use crate::math::{cos, sin, Mat3, RigidTransform, Vec3};
use crate::{Error, Result};

pub const PATCH_SIZE: usize = 48;
pub const PATCH_PIXELS: usize = PATCH_SIZE * PATCH_SIZE;

pub const DEFAULT_PAD_SIDE: f64 = 0.02;
pub const DEFAULT_STANDOFF: f64 = 0.01;

/// Anything rays can be cast against.
pub trait Raycast {
    fn raycast(&self, origin: Vec3, dir: Vec3, t_max: f64) -> Option<f64>;
}

impl Raycast for ObjectModel {
    fn raycast(&self, origin: Vec3, dir: Vec3, t_max: f64) -> Option<f64> {
        ObjectModel::raycast(self, origin, dir, t_max)
    }
}

/// Nearest hit over all objects; an empty slice is an empty scene.
impl Raycast for [ObjectModel] {
    fn raycast(&self, origin: Vec3, dir: Vec3, t_max: f64) -> Option<f64> {
        self.iter()
            .filter_map(|o| o.raycast(origin, dir, t_max))
            .fold(None, |best: Option<f64>, t| Some(best.map_or(t, |b| b.min(t))))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensorFrame {
    /// Pad center at the origin; +z is the inward touch direction.
    pub pose: RigidTransform,
    pub pad_side: f64,
    pub standoff: f64,
}

impl SensorFrame {
    pub fn new(pose: RigidTransform, pad_side: f64, standoff: f64) -> Result<Self> {
        if !(pad_side > 0.0 && standoff > 0.0) {
            return Err(Error::InvalidParameter("pad_side and standoff must be positive"));
        }
        Ok(Self { pose, pad_side, standoff })
    }

    /// Frame facing a surface point `q` with outward normal `n`: the pad sits
    /// `gap` meters off the surface, looks along `-n`, and is rolled by `roll`
    /// radians about its approach axis.
    pub fn facing(q: Vec3, n: Vec3, roll: f64, gap: f64, pad_side: f64, standoff: f64) -> Result<Self> {
        let z = -n.normalized().ok_or(Error::InvalidParameter("zero normal"))?;
        let x0 = z.any_orthonormal();
        let y0 = z.cross(x0);
        let (s, c) = (sin(roll), cos(roll));
        let x = x0 * c + y0 * s;
        let y = z.cross(x);
        let pose = RigidTransform::new(Mat3::from_columns(x, y, z), q - z * gap)?;
        Self::new(pose, pad_side, standoff)
    }

    pub fn pixel_pitch(&self) -> f64 {
        self.pad_side / PATCH_SIZE as f64
    }

    /// Pixel center in pad coordinates (meters). Row `i` runs along +y, column `j` along +x.
    pub fn pixel_center(&self, i: usize, j: usize) -> (f64, f64) {
        pixel_center(self.pad_side, i, j)
    }

    pub fn approach_direction(&self) -> Vec3 {
        self.pose.rotation().column(2)
    }
}

pub(crate) fn pixel_center(pad_side: f64, i: usize, j: usize) -> (f64, f64) {
    let pitch = pad_side / PATCH_SIZE as f64;
    let half = pad_side / 2.0;
    ((j as f64 + 0.5) * pitch - half, (i as f64 + 0.5) * pitch - half)
}

/// Raw per-pixel ray depths in meters; misses read `standoff`.
#[derive(Clone, Debug, PartialEq)]
pub struct Heightfield {
    pub depths: Vec<f64>,
    pub hits: Vec<bool>,
    pub pad_side: f64,
    pub standoff: f64,
}

impl Heightfield {
    pub fn empty(pad_side: f64, standoff: f64) -> Self {
        Self {
            depths: vec![standoff; PATCH_PIXELS],
            hits: vec![false; PATCH_PIXELS],
            pad_side,
            standoff,
        }
    }

    /// Hit pixel with the smallest depth, i.e. the first point the pad would touch.
    pub fn first_contact(&self) -> Option<(usize, f64)> {
        self.depths
            .iter()
            .zip(&self.hits)
            .enumerate()
            .filter(|(_, (_, hit))| **hit)
            .map(|(k, (d, _))| (k, *d))
            .fold(None, |best: Option<(usize, f64)>, (k, d)| match best {
                Some((_, bd)) if bd <= d => best,
                _ => Some((k, d)),
            })
    }
}

/// Processed patch: `(standoff - depth) / standoff`, so nearer surface reads larger.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthPatch {
    pub values: Vec<f64>,
    pub frame: SensorFrame,
}

impl DepthPatch {
    pub fn from_heightfield(h: &Heightfield, frame: SensorFrame) -> Self {
        let values = h.depths.iter().map(|d| ((h.standoff - d) / h.standoff).clamp(0.0, 1.0)).collect();
        Self { values, frame }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * PATCH_SIZE + j]
    }

    /// Inverse of the normalisation; zero-valued pixels come back as misses.
    pub fn to_heightfield(&self) -> Heightfield {
        let s = self.frame.standoff;
        Heightfield {
            depths: self.values.iter().map(|v| s - v * s).collect(),
            hits: self.values.iter().map(|v| *v > 0.0).collect(),
            pad_side: self.frame.pad_side,
            standoff: s,
        }
    }
}

pub fn heightfield<S: Raycast + ?Sized>(scene: &S, frame: &SensorFrame) -> Heightfield {
    let dir = frame.approach_direction();
    let mut h = Heightfield::empty(frame.pad_side, frame.standoff);
    for i in 0..PATCH_SIZE {
        for j in 0..PATCH_SIZE {
            let (x, y) = frame.pixel_center(i, j);
            let origin = frame.pose.apply(Vec3::new(x, y, 0.0));
            if let Some(t) = scene.raycast(origin, dir, frame.standoff) {
                let k = i * PATCH_SIZE + j;
                h.depths[k] = t;
                h.hits[k] = true;
            }
        }
    }
    h
}

pub fn render_depth_patch<S: Raycast + ?Sized>(scene: &S, frame: &SensorFrame) -> DepthPatch {
    DepthPatch::from_heightfield(&heightfield(scene, frame), *frame)
}
