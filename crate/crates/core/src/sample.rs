use crate::error::{Error, Result};

/// An ordered list of observations, each a fixed-dimension real vector.
///
/// Scalar data is stored as 1-vectors so that scalar, clustering, ranking and
/// metric kernels share one interface. Storage is a single row-major buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    dim: usize,
    data: Vec<f64>,
}

impl Sample {
    /// Scalar sample; every value becomes a 1-vector.
    pub fn scalar(values: Vec<f64>) -> Self {
        Sample { dim: 1, data: values }
    }

    /// Sample of `data.len() / dim` points of dimension `dim`.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::invalid(format!(
                "buffer of length {} is not a multiple of dimension {dim}",
                data.len()
            )));
        }
        Ok(Sample { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(1, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::invalid(format!(
                    "row {i} has {} columns, expected {dim}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Sample::from_flat(dim.max(1), data)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// The raw buffer; for scalar samples these are the observations.
    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.data
    }

    /// New sample made of the points at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Sample {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.point(i));
        }
        Sample { dim: self.dim, data }
    }

    /// Scalar view, failing for multi-dimensional samples.
    pub fn scalars(&self) -> Result<&[f64]> {
        if self.dim != 1 {
            return Err(Error::invalid(format!(
                "expected scalar observations, got dimension {}",
                self.dim
            )));
        }
        Ok(&self.data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_round_trip() {
        let s = Sample::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.point(1), &[3.0, 4.0]);
        assert_eq!(s.select(&[2, 0]).as_flat(), &[5.0, 6.0, 1.0, 2.0]);
        assert!(s.scalars().is_err());
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(Sample::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(Sample::from_flat(2, vec![1.0, 2.0, 3.0]).is_err());
    }
}
