use std::collections::BTreeMap;

use serde::Serialize;

use crate::riesz::EigenvalueSpectrum;

/// Which estimate a [`BoundReport`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Riesz mean of a power-law horn, σ ≥ 3/2.
    HornRiesz,
    /// Eigenvalue counting bound for a power-law horn.
    HornCounting,
    /// Riesz mean of the critical horn |x y| < 1.
    CriticalHornRiesz,
    /// Eigenvalue counting bound for the critical horn.
    CriticalHornCounting,
    /// Upper bound for the spiny urchin from its section traces.
    UrchinUpper,
    /// Constructive lower bound from packed squares inside the urchin.
    UrchinLower,
    /// van den Berg's counting bound for the urchin.
    UrchinVdbCounting,
    /// Order-of-growth bound for the named urchin families.
    UrchinOrder,
    /// Ground-state gap between the whole line and a Dirichlet interval.
    GroundStateGap,
    /// One-dimensional Lieb–Thirring bound with ground-state remainder.
    LiebThirringRemainder1d,
    /// Sectionwise Lieb–Thirring bound with remainder on a planar or higher domain.
    LiebThirringRemainder,
    /// Closed form for the planar horn carrying a power-law potential.
    HornPotentialExample,
}

/// A bound value together with the hypotheses it was evaluated under.
///
/// Bounds whose hypotheses fail are still evaluated; `hypotheses_ok` is then
/// false and `violations` says why.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub value: f64,
    pub hypotheses_ok: bool,
    pub violations: Vec<String>,
    pub params: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<EigenvalueSpectrum>,
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn new(kind: BoundKind, value: f64) -> Self {
        Self {
            kind,
            value,
            hypotheses_ok: true,
            violations: Vec::new(),
            params: BTreeMap::new(),
            comparison: None,
            notes: Vec::new(),
        }
    }

    pub fn param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn violation(mut self, msg: impl Into<String>) -> Self {
        self.hypotheses_ok = false;
        self.violations.push(msg.into());
        self
    }

    /// Adds a violation unless `ok` holds.
    pub fn require(self, ok: bool, msg: impl Into<String>) -> Self {
        if ok {
            self
        } else {
            self.violation(msg)
        }
    }

    pub fn note(mut self, msg: impl Into<String>) -> Self {
        self.notes.push(msg.into());
        self
    }

    pub fn with_comparison(mut self, spectrum: EigenvalueSpectrum) -> Self {
        self.comparison = Some(spectrum);
        self
    }

    /// Looks up a recorded parameter.
    pub fn get(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }
}
