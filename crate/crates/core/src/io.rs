//! JSON file formats for orbits, invariant specs and states.
//!
//! Orbit: `{"k": 3, "m": 2, "perms": [[2,1],[1,2]]}` in 1-based one-line
//! notation, with `k - 1` permutations for a pure-state invariant and `k`
//! for a mixed-state one. An optional `"kind": "pure" | "mixed"` turns it
//! into an invariant spec.
//!
//! State: `{"dims": [2,2], "coeffs": [[re, im], …]}`, row-major with the last
//! party fastest. Mixed states add `"kind": "mixed"` and hold `(∏ n_j)²`
//! entries, row multi-index first.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::{InvariantKind, InvariantSpec};
use crate::perm::{OrbitKey, PermTuple};
use crate::states::{MixedState, PureState, SystemShape};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitFile {
    pub k: usize,
    pub m: usize,
    pub perms: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<InvariantKind>,
}

impl OrbitFile {
    /// Orbit record for `k`-partite pure states.
    pub fn pure(orbit: &OrbitKey) -> Self {
        Self {
            k: orbit.arity() + 1,
            m: orbit.degree(),
            perms: orbit.tuple().to_one_based(),
            kind: None,
        }
    }

    pub fn from_spec(spec: &InvariantSpec) -> Self {
        Self {
            k: spec.parties(),
            m: spec.degree(),
            perms: spec.orbit.tuple().to_one_based(),
            kind: Some(spec.kind),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// The kind recorded in the file, else `default`.
    pub fn kind_or(&self, default: InvariantKind) -> InvariantKind {
        self.kind.unwrap_or(default)
    }

    /// Validates the record and returns the tuple as written.
    pub fn tuple(&self, kind: InvariantKind) -> Result<PermTuple> {
        let expected = match kind {
            InvariantKind::Pure => self.k.checked_sub(1),
            InvariantKind::Mixed => Some(self.k),
        };
        if self.k < 1 || expected != Some(self.perms.len()) || self.perms.is_empty() {
            return Err(Error::ShapeMismatch(format!(
                "{kind:?} invariant with k = {} needs {} permutations, found {}",
                self.k,
                expected.map_or("a positive number of".to_string(), |e| e.to_string()),
                self.perms.len()
            )));
        }
        let tuple = PermTuple::from_one_based(&self.perms)?;
        if tuple.m() != self.m {
            return Err(Error::InvalidTuple(format!(
                "declared m = {} but permutations act on {} points",
                self.m,
                tuple.m()
            )));
        }
        Ok(tuple)
    }

    pub fn spec(&self, default: InvariantKind) -> Result<InvariantSpec> {
        let kind = self.kind_or(default);
        let orbit = OrbitKey::of(&self.tuple(kind)?);
        Ok(InvariantSpec { kind, orbit })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub dims: Vec<usize>,
    pub coeffs: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LoadedState {
    Pure(PureState),
    Mixed(MixedState),
}

fn pack(coeffs: &[Complex64]) -> Vec<[f64; 2]> {
    coeffs.iter().map(|c| [c.re, c.im]).collect()
}

impl StateFile {
    pub fn from_pure(psi: &PureState) -> Self {
        Self {
            kind: None,
            dims: psi.shape().dims().to_vec(),
            coeffs: pack(psi.coeffs()),
        }
    }

    pub fn from_mixed(rho: &MixedState) -> Self {
        Self {
            kind: Some("mixed".into()),
            dims: rho.shape().dims().to_vec(),
            coeffs: pack(rho.coeffs()),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(&self) -> Result<LoadedState> {
        let shape = SystemShape::new(self.dims.clone())?;
        let coeffs = self.coeffs.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        match self.kind.as_deref() {
            None | Some("pure") => Ok(LoadedState::Pure(PureState::new(shape, coeffs)?)),
            Some("mixed") => Ok(LoadedState::Mixed(MixedState::new(shape, coeffs)?)),
            Some(other) => Err(Error::Parse(format!("unknown state kind {other:?}"))),
        }
    }
}
