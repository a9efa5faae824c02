use crate::error::{Error, Result};

/// Dense row-major space-time array: `levels` time rows of `width` space columns.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeField {
    levels: usize,
    width: usize,
    data: Vec<f64>,
}

impl SpaceTimeField {
    pub fn zeros(levels: usize, width: usize) -> Self {
        Self { levels, width, data: vec![0.0; levels * width] }
    }

    pub fn from_fn(levels: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(levels * width);
        for n in 0..levels {
            for j in 0..width {
                data.push(f(n, j));
            }
        }
        Self { levels, width, data }
    }

    pub fn from_vec(levels: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != levels * width {
            return Err(Error::ShapeMismatch {
                expected: format!("{levels} x {width}"),
                got: format!("{} values", data.len()),
            });
        }
        Ok(Self { levels, width, data })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(&self, n: usize, j: usize) -> f64 {
        self.data[n * self.width + j]
    }

    #[inline]
    pub fn set(&mut self, n: usize, j: usize, v: f64) {
        self.data[n * self.width + j] = v;
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.data[n * self.width..(n + 1) * self.width]
    }

    pub fn row_mut(&mut self, n: usize) -> &mut [f64] {
        &mut self.data[n * self.width..(n + 1) * self.width]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.levels).map(|n| self.get(n, j)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if self.levels != other.levels || self.width != other.width {
            return Err(Error::ShapeMismatch {
                expected: format!("{} x {}", self.levels, self.width),
                got: format!("{} x {}", other.levels, other.width),
            });
        }
        Ok(())
    }
}
