//! JSON state descriptions.
//!
//! Exactly one of three keys must be present:
//!
//! * `"rho"`: 4x4 row-major array of `[re, im]` pairs;
//! * `"r"`: `{"x": [..3], "y": [..3], "t": [[..3]; 3]}`;
//! * `"xstate"`: `{"x3", "y3", "t1", "t2", "t3"}`.

use nalgebra::{Matrix3, Matrix4, Vector3};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::Value;

use crate::error::InputError;
use crate::state::{DensityMatrix4, RMatrix, XStateParams};

#[derive(Debug, Clone, PartialEq)]
pub enum StateInput {
    Rho(DensityMatrix4),
    R(RMatrix),
    XState(XStateParams),
}

impl StateInput {
    /// Bloch form without any physical validation.
    pub fn r_matrix(&self) -> RMatrix {
        match self {
            StateInput::Rho(rho) => rho.r_matrix_unchecked(),
            StateInput::R(r) => *r,
            StateInput::XState(p) => p.to_r_matrix(),
        }
    }

    pub fn density(&self) -> DensityMatrix4 {
        match self {
            StateInput::Rho(rho) => *rho,
            StateInput::R(r) => r.to_density(),
            StateInput::XState(p) => p.to_density(),
        }
    }
}

#[derive(Deserialize)]
struct RInput {
    x: [f64; 3],
    y: [f64; 3],
    t: [[f64; 3]; 3],
}

pub fn parse_state(text: &str) -> Result<StateInput, InputError> {
    let value: Value = serde_json::from_str(text)?;
    let obj = value
        .as_object()
        .ok_or_else(|| InputError::Shape("top level must be a JSON object".into()))?;
    let present: Vec<&str> = ["rho", "r", "xstate"]
        .into_iter()
        .filter(|k| obj.contains_key(*k))
        .collect();
    if present.len() != 1 {
        return Err(InputError::KeyCount(present.len()));
    }
    let inner = obj[present[0]].clone();
    match present[0] {
        "rho" => {
            let rows: Vec<Vec<[f64; 2]>> = serde_json::from_value(inner)?;
            if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
                return Err(InputError::Shape("\"rho\" must be 4x4".into()));
            }
            Ok(StateInput::Rho(DensityMatrix4(Matrix4::from_fn(|i, j| {
                Complex64::new(rows[i][j][0], rows[i][j][1])
            }))))
        }
        "r" => {
            let r: RInput = serde_json::from_value(inner)?;
            Ok(StateInput::R(RMatrix::new(
                Vector3::from(r.x),
                Vector3::from(r.y),
                Matrix3::from_fn(|i, j| r.t[i][j]),
            )))
        }
        _ => Ok(StateInput::XState(serde_json::from_value(inner)?)),
    }
}
