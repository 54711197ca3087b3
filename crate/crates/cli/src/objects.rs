//! Textual object descriptions.
//!
//! An object is a `;`-separated list of parts, each written
//! `kind:p1,p2,..[@x,y,z][^rx,ry,rz]` with lengths in meters and Euler angles
//! (about x, then y, then z) in degrees. Kinds and parameters:
//!
//! | kind       | parameters                   |
//! |------------|------------------------------|
//! | `sphere`   | radius                       |
//! | `box`      | half extents x, y, z         |
//! | `cylinder` | radius, half height          |
//! | `cone`     | base radius, height          |
//! | `prism`    | triangle edge, half length   |

use std::fmt;

use touchbench_core::geometry::{ObjectModel, Primitive, Shape};
use touchbench_core::{Mat3, RigidTransform, Vec3};

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("object `{object}`: {message}")]
pub struct ObjectSpecError {
    pub object: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartSpec {
    pub shape: Shape,
    pub translation: [f64; 3],
    pub rotation_deg: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObjectSpec {
    pub name: String,
    pub parts: Vec<PartSpec>,
}

fn numbers(text: &str, expected: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("`{}` is not a number", t.trim())))
        .collect::<Result<_, _>>()?;
    if v.len() != expected {
        return Err(format!("expected {expected} numbers in `{text}`, found {}", v.len()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(format!("non-finite number in `{text}`"));
    }
    Ok(v)
}

fn parse_part(text: &str) -> Result<PartSpec, String> {
    let (body, rotation) = match text.split_once('^') {
        Some((b, r)) => (b, Some(r)),
        None => (text, None),
    };
    let (body, translation) = match body.split_once('@') {
        Some((b, t)) => (b, Some(t)),
        None => (body, None),
    };
    let (kind, params) = body.split_once(':').ok_or_else(|| format!("part `{text}` lacks `kind:`"))?;
    let kind = kind.trim();
    let shape = match kind {
        "sphere" => Shape::Sphere { radius: numbers(params, 1)?[0] },
        "box" => {
            let p = numbers(params, 3)?;
            Shape::Box { half_extents: Vec3::new(p[0], p[1], p[2]) }
        }
        "cylinder" => {
            let p = numbers(params, 2)?;
            Shape::Cylinder { radius: p[0], half_height: p[1] }
        }
        "cone" => {
            let p = numbers(params, 2)?;
            Shape::Cone { radius: p[0], height: p[1] }
        }
        "prism" => {
            let p = numbers(params, 2)?;
            Shape::TriangularPrism { edge: p[0], half_length: p[1] }
        }
        other => return Err(format!("unknown primitive kind `{other}`")),
    };
    let triple = |t: Option<&str>| -> Result<[f64; 3], String> {
        match t {
            Some(t) => {
                let v = numbers(t, 3)?;
                Ok([v[0], v[1], v[2]])
            }
            None => Ok([0.0; 3]),
        }
    };
    Ok(PartSpec { shape, translation: triple(translation)?, rotation_deg: triple(rotation)? })
}

impl ObjectSpec {
    pub fn parse(name: &str, text: &str) -> Result<Self, ObjectSpecError> {
        let err = |message: String| ObjectSpecError { object: name.to_string(), message };
        let parts: Vec<PartSpec> = text
            .split(';')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(parse_part)
            .collect::<Result<_, _>>()
            .map_err(err)?;
        if parts.is_empty() {
            return Err(err("no parts".into()));
        }
        let spec = Self { name: name.to_string(), parts };
        spec.build()?;
        Ok(spec)
    }

    pub fn build(&self) -> Result<ObjectModel, ObjectSpecError> {
        let err = |e: touchbench_core::Error| ObjectSpecError { object: self.name.clone(), message: e.to_string() };
        let parts = self
            .parts
            .iter()
            .map(|p| {
                let [rx, ry, rz] = p.rotation_deg.map(f64::to_radians);
                let [x, y, z] = p.translation;
                Primitive::new(p.shape, RigidTransform::new(Mat3::from_euler_xyz(rx, ry, rz), Vec3::new(x, y, z))?)
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        ObjectModel::new(self.name.clone(), parts, RigidTransform::IDENTITY).map_err(err)
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for PartSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.shape.kind_name(), join(&self.shape.parameters()))?;
        if self.translation != [0.0; 3] {
            write!(f, "@{}", join(&self.translation))?;
        }
        if self.rotation_deg != [0.0; 3] {
            write!(f, "^{}", join(&self.rotation_deg))?;
        }
        Ok(())
    }
}

impl fmt::Display for ObjectSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        f.write_str(&parts.join(" ; "))
    }
}
