use serde::{Deserialize, Serialize};

use super::NeuralError;

/// Dense row-major array of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, values: Vec<f64>) -> Result<Self, NeuralError> {
        let count = shape
            .iter()
            .try_fold(1usize, |acc, d| acc.checked_mul(*d))
            .ok_or_else(|| NeuralError::Dimension("shape product overflows".into()))?;
        if count != values.len() {
            return Err(NeuralError::Dimension(format!(
                "shape {shape:?} holds {count} values, got {}",
                values.len()
            )));
        }
        Ok(Self { shape, values })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self {
            shape,
            values: vec![0.0; n],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
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

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Validates the value count after deserialization.
    pub fn check(&self) -> Result<(), NeuralError> {
        let count = self
            .shape
            .iter()
            .try_fold(1usize, |acc, d| acc.checked_mul(*d));
        match count {
            Some(c) if c == self.values.len() => Ok(()),
            _ => Err(NeuralError::Dimension(format!(
                "shape {:?} does not match {} values",
                self.shape,
                self.values.len()
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_must_match_shape() {
        assert!(Tensor::new(vec![2, 3], vec![0.0; 6]).is_ok());
        assert!(Tensor::new(vec![2, 3], vec![0.0; 5]).is_err());
        assert!(Tensor::new(vec![usize::MAX, 2], vec![]).is_err());
    }

    #[test]
    fn check_after_deserialize() {
        let t: Tensor = serde_json::from_str(r#"{"shape":[2],"values":[1.0,2.0]}"#).unwrap();
        assert!(t.check().is_ok());
        let bad: Tensor = serde_json::from_str(r#"{"shape":[3],"values":[1.0,2.0]}"#).unwrap();
        assert!(bad.check().is_err());
        let empty: Tensor = serde_json::from_str(r#"{"shape":[0],"values":[]}"#).unwrap();
        assert!(empty.check().is_ok());
    }
}
