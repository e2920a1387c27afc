//! Snapshot tensors: field-tagged third-order stacks of trajectory data.

use super::{PodError, Result};
use crate::fom::{FomSpatialBlocks, ParameterVector};
use crate::tensor::Tensor3;
use crate::DMat;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Which unknown a snapshot stack or basis belongs to. Multiplier blocks
/// are numbered by their boundary, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldTag {
    Velocity,
    Pressure,
    Multiplier(u8),
}

impl fmt::Display for FieldTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldTag::Velocity => write!(f, "velocity"),
            FieldTag::Pressure => write!(f, "pressure"),
            FieldTag::Multiplier(k) => write!(f, "multiplier_{k}"),
        }
    }
}

/// Trajectories of one field over a parameter sample, stored as a tensor
/// with dimensions (spatial unknowns, time steps, parameters).
#[derive(Debug, Clone)]
pub struct SnapshotTensor {
    field: FieldTag,
    data: Tensor3,
    parameters: Vec<ParameterVector>,
}

impl SnapshotTensor {
    /// Wraps an already-stacked tensor; the third dimension must match the
    /// parameter list.
    pub fn new(field: FieldTag, data: Tensor3, parameters: Vec<ParameterVector>) -> Result<Self> {
        if data.dims().2 != parameters.len() {
            return Err(PodError::ParameterCount {
                count: data.dims().2,
                parameters: parameters.len(),
            });
        }
        Ok(Self { field, data, parameters })
    }

    /// Stacks per-parameter trajectory matrices (unknowns by steps) into a
    /// tensor, checking that every slab has the same shape.
    pub fn from_trajectories(
        field: FieldTag,
        trajectories: &[DMat],
        parameters: &[ParameterVector],
    ) -> Result<Self> {
        if trajectories.len() != parameters.len() {
            return Err(PodError::ParameterCount {
                count: trajectories.len(),
                parameters: parameters.len(),
            });
        }
        let (rows, cols) = match trajectories.first() {
            Some(t) => (t.nrows(), t.ncols()),
            None => {
                return Err(PodError::ParameterCount { count: 0, parameters: parameters.len() })
            }
        };
        let mut data = Tensor3::zeros(rows, cols, trajectories.len());
        for (k, t) in trajectories.iter().enumerate() {
            if (t.nrows(), t.ncols()) != (rows, cols) {
                return Err(PodError::TrajectoryShape {
                    index: k,
                    rows: t.nrows(),
                    cols: t.ncols(),
                    expected_rows: rows,
                    expected_cols: cols,
                });
            }
            data.set_slab(k, t);
        }
        Ok(Self { field, data, parameters: parameters.to_vec() })
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn data(&self) -> &Tensor3 {
        &self.data
    }

    pub fn parameters(&self) -> &[ParameterVector] {
        &self.parameters
    }

    /// (spatial unknowns, time steps, parameters).
    pub fn dims(&self) -> (usize, usize, usize) {
        self.data.dims()
    }
}

/// The per-field snapshot tensors cut out of monolithic trajectories.
#[derive(Debug, Clone)]
pub struct FieldSnapshots {
    pub velocity: SnapshotTensor,
    pub pressure: SnapshotTensor,
    /// One stack per constrained boundary, in boundary order.
    pub multipliers: Vec<SnapshotTensor>,
}

/// Slices monolithic trajectories (all unknowns by steps) into velocity,
/// pressure, and per-boundary multiplier stacks.
pub fn split_fields(
    blocks: &FomSpatialBlocks,
    trajectories: &[DMat],
    parameters: &[ParameterVector],
) -> Result<FieldSnapshots> {
    let total = blocks.n_total();
    for (k, t) in trajectories.iter().enumerate() {
        if t.nrows() != total {
            return Err(PodError::TrajectoryShape {
                index: k,
                rows: t.nrows(),
                cols: t.ncols(),
                expected_rows: total,
                expected_cols: t.ncols(),
            });
        }
    }
    let cut = |range: std::ops::Range<usize>| -> Vec<DMat> {
        trajectories
            .iter()
            .map(|t| t.rows(range.start, range.end - range.start).clone_owned())
            .collect()
    };
    let velocity = SnapshotTensor::from_trajectories(
        FieldTag::Velocity,
        &cut(blocks.velocity_range()),
        parameters,
    )?;
    let pressure = SnapshotTensor::from_trajectories(
        FieldTag::Pressure,
        &cut(blocks.pressure_range()),
        parameters,
    )?;
    let mut multipliers = Vec::new();
    let l0 = blocks.multiplier_range().start;
    for k in 1..=blocks.multiplier_sizes().len() as u8 {
        // The per-boundary range is local to the multiplier block.
        let local = blocks.multiplier_block_range(k);
        multipliers.push(SnapshotTensor::from_trajectories(
            FieldTag::Multiplier(k),
            &cut(l0 + local.start..l0 + local.end),
            parameters,
        )?);
    }
    Ok(FieldSnapshots { velocity, pressure, multipliers })
}
