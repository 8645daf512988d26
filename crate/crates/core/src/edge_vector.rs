use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeVectorKind {
    Gradient,
    Resistance,
    Weight,
}

/// One real value per edge, in canonical edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeVector {
    kind: EdgeVectorKind,
    values: Vec<f64>,
}

impl EdgeVector {
    pub fn gradient(values: Vec<f64>) -> Self {
        Self {
            kind: EdgeVectorKind::Gradient,
            values,
        }
    }

    /// Values must be non-negative.
    pub fn resistance(values: Vec<f64>) -> Result<Self> {
        if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::invalid(
                "resistance",
                format!("resistance on edge {k} is {v}, expected >= 0"),
            ));
        }
        Ok(Self {
            kind: EdgeVectorKind::Resistance,
            values,
        })
    }

    /// Skips the sign check, for diagnostics that may undershoot zero.
    pub(crate) fn resistance_unchecked(values: Vec<f64>) -> Self {
        Self {
            kind: EdgeVectorKind::Resistance,
            values,
        }
    }

    /// Values must lie in `(0, 1]`.
    pub fn weight(values: Vec<f64>) -> Result<Self> {
        if let Some((k, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > 0.0 && **v <= 1.0))
        {
            return Err(Error::invalid(
                "weights",
                format!("weight on edge {k} is {v}, expected a value in (0, 1]"),
            ));
        }
        Ok(Self {
            kind: EdgeVectorKind::Weight,
            values,
        })
    }

    pub fn kind(&self) -> EdgeVectorKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Euclidean distance to another vector of the same length.
    pub fn distance(&self, other: &EdgeVector) -> f64 {
        assert_eq!(self.len(), other.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl AsRef<[f64]> for EdgeVector {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

impl std::ops::Index<usize> for EdgeVector {
    type Output = f64;

    fn index(&self, k: usize) -> &f64 {
        &self.values[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_invariants() {
        assert!(EdgeVector::resistance(vec![0.0, 1.5]).is_ok());
        assert!(EdgeVector::resistance(vec![-1e-3]).is_err());
        assert!(EdgeVector::resistance(vec![f64::NAN]).is_err());
        assert!(EdgeVector::weight(vec![1.0, 0.25]).is_ok());
        assert!(EdgeVector::weight(vec![0.0]).is_err());
        assert!(EdgeVector::weight(vec![1.0 + 1e-12]).is_err());
    }
}
