//! The assembled output of a full identification run.

use serde::{Deserialize, Serialize};

use super::RationalStateModel;
use crate::dynamics::{OdeModel, StateRhs};
use crate::error::{Error, Result};
use crate::library::LibrarySpec;
use crate::poly::Poly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentificationMethod {
    /// Null-space + ADM over an implicit library.
    ImplicitAdm,
    /// Sequentially thresholded least squares over an explicit library.
    Stlsq,
    /// Coordinate-descent LASSO over an explicit library.
    Lasso,
}

/// Identified dynamics of a single state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StateModel {
    Rational(RationalStateModel),
    Polynomial { state_index: usize, poly: Poly },
}

impl StateModel {
    pub fn state_index(&self) -> usize {
        match self {
            StateModel::Rational(r) => r.state_index,
            StateModel::Polynomial { state_index, .. } => *state_index,
        }
    }

    pub fn to_state_rhs(&self) -> StateRhs {
        match self {
            StateModel::Rational(r) => r.to_state_rhs(),
            StateModel::Polynomial { poly, .. } => StateRhs::Polynomial { poly: poly.clone() },
        }
    }
}

/// How one state's model was obtained.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateProvenance {
    pub method: IdentificationMethod,
    pub library: LibrarySpec,
    pub lambda: f64,
    pub residual: f64,
    pub term_count: usize,
    pub n_samples: usize,
}

/// Per-state identified models plus how each was produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentifiedModel {
    pub n_states: usize,
    pub states: Vec<StateModel>,
    pub provenance: Vec<Option<StateProvenance>>,
}

impl IdentifiedModel {
    pub fn new(n_states: usize, states: Vec<StateModel>) -> Result<Self> {
        let provenance = vec![None; states.len()];
        let model = IdentifiedModel {
            n_states,
            states,
            provenance,
        };
        model.check()?;
        Ok(model)
    }

    fn check(&self) -> Result<()> {
        if self.states.len() != self.n_states {
            return Err(Error::InvalidModel(format!(
                "{} state models for {} states",
                self.states.len(),
                self.n_states
            )));
        }
        for (k, s) in self.states.iter().enumerate() {
            if s.state_index() != k {
                return Err(Error::InvalidModel(format!(
                    "state model at position {} claims index {}",
                    k,
                    s.state_index()
                )));
            }
        }
        Ok(())
    }

    /// Convert to a simulatable ODE model.
    pub fn to_ode_model(&self) -> Result<OdeModel> {
        self.check()?;
        OdeModel::new(
            self.n_states,
            self.states.iter().map(|s| s.to_state_rhs()).collect(),
        )
    }
}
