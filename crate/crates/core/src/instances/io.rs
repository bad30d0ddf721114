//! Instance file format: a single JSON document tagged by `kind`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{InstanceError, MultiReceiverInstance, SingleReceiverInstance};
use crate::scalar::Scalar;

/// A problem instance of either kind, as stored on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(serialize = "S: serde::Serialize", deserialize = "S: serde::de::DeserializeOwned"))]
pub enum Instance<S> {
    Single(SingleReceiverInstance<S>),
    Multi(MultiReceiverInstance<S>),
}

impl<S: Scalar> Instance<S> {
    pub fn validate(&self) -> Result<(), InstanceError> {
        match self {
            Instance::Single(inst) => inst.validate(),
            Instance::Multi(inst) => inst.validate(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Single(_) => "single",
            Instance::Multi(_) => "multi",
        }
    }
}

impl<S> From<SingleReceiverInstance<S>> for Instance<S> {
    fn from(inst: SingleReceiverInstance<S>) -> Self {
        Instance::Single(inst)
    }
}

impl<S> From<MultiReceiverInstance<S>> for Instance<S> {
    fn from(inst: MultiReceiverInstance<S>) -> Self {
        Instance::Multi(inst)
    }
}

/// Parses and validates an instance document.
pub fn load_instance_str<S: Scalar>(text: &str) -> Result<Instance<S>, InstanceError> {
    let inst: Instance<S> = serde_json::from_str(text)?;
    inst.validate()?;
    Ok(inst)
}

pub fn load_instance<S: Scalar>(path: impl AsRef<Path>) -> Result<Instance<S>, InstanceError> {
    let text = std::fs::read_to_string(path)?;
    load_instance_str(&text)
}

/// Validates and writes an instance; `load_instance` of the result is
/// field-for-field identical (floats are printed in shortest round-trip
/// form).
pub fn save_instance<S: Scalar>(inst: &Instance<S>, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    inst.validate()?;
    let mut text = serde_json::to_string_pretty(inst)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
