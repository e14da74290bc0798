//! Serde adapters pinning the on-disk JSON layout: 3-vectors as `[x, y, z]`,
//! complex vectors as `[re, im]` pairs, and orientation matrices as lists of
//! 3-element columns.

use nalgebra::{Matrix3xX, Vector3};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Complex;

pub mod vec3 {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Vector3<f64>, s: S) -> Result<S::Ok, S::Error> {
        [v.x, v.y, v.z].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vector3<f64>, D::Error> {
        let [x, y, z] = <[f64; 3]>::deserialize(d)?;
        Ok(Vector3::new(x, y, z))
    }
}

pub mod vec3_list {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Vector3<f64>], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|p| [p.x, p.y, p.z])
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vector3<f64>>, D::Error> {
        let raw = Vec::<[f64; 3]>::deserialize(d)?;
        Ok(raw
            .into_iter()
            .map(|[x, y, z]| Vector3::new(x, y, z))
            .collect())
    }
}

pub mod vec3_list2 {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Vec<Vector3<f64>>], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|row| row.iter().map(|p| [p.x, p.y, p.z]).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<Vec<Vec<Vector3<f64>>>, D::Error> {
        let raw = Vec::<Vec<[f64; 3]>>::deserialize(d)?;
        Ok(raw
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|[x, y, z]| Vector3::new(x, y, z))
                    .collect()
            })
            .collect())
    }
}

pub mod complex_list {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Complex], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|z| [z.re, z.im])
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex>, D::Error> {
        let raw = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(raw.into_iter().map(|[re, im]| Complex::new(re, im)).collect())
    }
}

/// Orientation matrices serialize as a list of their columns.
pub mod mat3x_cols {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Matrix3xX<f64>, s: S) -> Result<S::Ok, S::Error> {
        m.column_iter()
            .map(|c| [c[0], c[1], c[2]])
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix3xX<f64>, D::Error> {
        let cols = Vec::<[f64; 3]>::deserialize(d)?;
        Ok(Matrix3xX::from_columns(
            &cols
                .into_iter()
                .map(|[x, y, z]| Vector3::new(x, y, z))
                .collect::<Vec<_>>(),
        ))
    }
}
