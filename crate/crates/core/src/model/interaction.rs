//! Pair interaction potentials, described by their Fourier multipliers Ŵ(k).

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InteractionSign {
    Repulsive,
    Attractive,
}

impl InteractionSign {
    pub fn factor(self) -> f64 {
        match self {
            InteractionSign::Repulsive => 1.0,
            InteractionSign::Attractive => -1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InteractionKind {
    /// Ŵ(k) = sign · A / |k|^{1+γ}.
    Power { sign: InteractionSign, amplitude: f64 },
    /// Explicit coefficients for k ≥ 1, extended evenly; modes absent from the table vanish.
    Tabulated { coefficients: BTreeMap<u64, f64> },
}

/// Real, even interaction potential with a neutralising background (Ŵ(0) = 0).
#[derive(Clone, Debug, PartialEq)]
pub struct Interaction {
    kind: InteractionKind,
    gamma: f64,
}

impl Interaction {
    /// Power-law multiplier; `amplitude = 0` gives the free (interaction-less) system.
    pub fn power(sign: InteractionSign, amplitude: f64, gamma: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::invalid(format!(
                "interaction amplitude must be nonnegative, got {amplitude}"
            )));
        }
        if !(gamma.is_finite() && gamma >= 1.0) {
            return Err(Error::invalid(format!("gamma must be at least 1, got {gamma}")));
        }
        Ok(Self {
            kind: InteractionKind::Power { sign, amplitude },
            gamma,
        })
    }

    pub fn repulsive(amplitude: f64) -> Result<Self> {
        Self::power(InteractionSign::Repulsive, amplitude, 1.0)
    }

    pub fn attractive(amplitude: f64) -> Result<Self> {
        Self::power(InteractionSign::Attractive, amplitude, 1.0)
    }

    /// Ŵ ≡ 0.
    pub fn free() -> Self {
        Self {
            kind: InteractionKind::Power {
                sign: InteractionSign::Repulsive,
                amplitude: 0.0,
            },
            gamma: 1.0,
        }
    }

    /// Tabulated multiplier. Rows with `k ≤ 0` are rejected; `k` must be integral.
    pub fn tabulated(rows: &[(f64, f64)], gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 1.0) {
            return Err(Error::invalid(format!("gamma must be at least 1, got {gamma}")));
        }
        let mut coefficients = BTreeMap::new();
        for &(k, w) in rows {
            if !(k >= 1.0 && k.fract() == 0.0) {
                return Err(Error::invalid(format!(
                    "tabulated interaction modes must be positive integers, got {k}"
                )));
            }
            if !w.is_finite() {
                return Err(Error::invalid(format!("non-finite coefficient at k = {k}")));
            }
            if coefficients.insert(k as u64, w).is_some() {
                return Err(Error::invalid(format!("duplicate mode k = {k}")));
            }
        }
        Ok(Self {
            kind: InteractionKind::Tabulated { coefficients },
            gamma,
        })
    }

    /// Reads a two-column CSV (`k, W`) with a header row.
    pub fn from_csv(path: impl AsRef<Path>, gamma: f64) -> Result<Self> {
        let (k, w) = crate::io::read_two_columns(path)?;
        let rows: Vec<(f64, f64)> = k.into_iter().zip(w).collect();
        Self::tabulated(&rows, gamma)
    }

    pub fn kind(&self) -> &InteractionKind {
        &self.kind
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Ŵ(k).
    pub fn coeff(&self, k: i64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let ak = k.unsigned_abs();
        match &self.kind {
            InteractionKind::Power { sign, amplitude } => {
                sign.factor() * amplitude / (ak as f64).powf(1.0 + self.gamma)
            }
            InteractionKind::Tabulated { coefficients } => {
                coefficients.get(&ak).copied().unwrap_or(0.0)
            }
        }
    }

    /// Smallest C_W with |Ŵ(k)| ≤ C_W / |k|^{1+γ} over `1 ≤ |k| ≤ k_max`.
    pub fn bound_constant(&self, k_max: u64) -> f64 {
        match &self.kind {
            InteractionKind::Power { amplitude, .. } => *amplitude,
            InteractionKind::Tabulated { coefficients } => coefficients
                .iter()
                .filter(|(k, _)| **k <= k_max)
                .map(|(k, w)| w.abs() * (*k as f64).powf(1.0 + self.gamma))
                .fold(0.0, f64::max),
        }
    }

    /// max_{1≤|k|≤k_max} |Ŵ(k)|.
    pub fn max_abs_coeff(&self, k_max: u64) -> f64 {
        (1..=k_max as i64)
            .map(|k| self.coeff(k).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            InteractionKind::Power { amplitude, .. } => *amplitude == 0.0,
            InteractionKind::Tabulated { coefficients } => coefficients.values().all(|w| *w == 0.0),
        }
    }

    /// Same potential with the sign of every coefficient flipped.
    pub fn negated(&self) -> Self {
        let kind = match &self.kind {
            InteractionKind::Power { sign, amplitude } => InteractionKind::Power {
                sign: match sign {
                    InteractionSign::Repulsive => InteractionSign::Attractive,
                    InteractionSign::Attractive => InteractionSign::Repulsive,
                },
                amplitude: *amplitude,
            },
            InteractionKind::Tabulated { coefficients } => InteractionKind::Tabulated {
                coefficients: coefficients.iter().map(|(k, w)| (*k, -w)).collect(),
            },
        };
        Self {
            kind,
            gamma: self.gamma,
        }
    }
}
