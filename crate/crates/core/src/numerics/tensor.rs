use crate::error::{Error, Result};

/// Dense row-major array of `f64` values.
///
/// Axis 0 is the frame (or batch) axis wherever a module talks about frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let numel: usize = shape.iter().product();
        if numel != data.len() {
            return Err(Error::invalid(format!(
                "shape {shape:?} needs {numel} values, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self::full(shape, 0.0)
    }

    pub fn full(shape: &[usize], value: f64) -> Self {
        let numel = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![value; numel],
        }
    }

    /// 1-D tensor copied from a slice.
    pub fn from_slice(values: &[f64]) -> Self {
        Self {
            shape: vec![values.len()],
            data: values.to_vec(),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(&self.shape)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn reshape(self, shape: Vec<usize>) -> Result<Self> {
        Self::new(shape, self.data)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn ensure_same_shape(&self, other: &Tensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                expected: self.shape.clone(),
                found: other.shape.clone(),
            });
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Tensor, f: impl Fn(f64, f64) -> f64) -> Result<Tensor> {
        self.ensure_same_shape(other)?;
        Ok(Tensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> Tensor {
        self.map(|v| v * factor)
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &Tensor) -> Result<Tensor> {
        self.zip_map(other, |a, b| a + alpha * b)
    }

    /// Number of frames (extent of axis 0). Rank-0 tensors have none.
    pub fn frames(&self) -> usize {
        self.shape.first().copied().unwrap_or(0)
    }

    /// Values per frame (product of the trailing extents).
    pub fn frame_size(&self) -> usize {
        self.shape.iter().skip(1).product()
    }

    pub fn frame(&self, index: usize) -> &[f64] {
        let fs = self.frame_size();
        &self.data[index * fs..(index + 1) * fs]
    }

    pub fn frame_mut(&mut self, index: usize) -> &mut [f64] {
        let fs = self.frame_size();
        &mut self.data[index * fs..(index + 1) * fs]
    }

    /// Frames `start..end` along axis 0.
    pub fn slice_frames(&self, start: usize, end: usize) -> Result<Tensor> {
        if self.rank() == 0 || start > end || end > self.frames() {
            return Err(Error::invalid(format!(
                "frame range {start}..{end} outside 0..{}",
                self.frames()
            )));
        }
        let fs = self.frame_size();
        let mut shape = self.shape.clone();
        shape[0] = end - start;
        Ok(Tensor {
            shape,
            data: self.data[start * fs..end * fs].to_vec(),
        })
    }

    /// Overwrites frames `start..start + src.frames()` with `src`.
    pub fn write_frames(&mut self, start: usize, src: &Tensor) -> Result<()> {
        if src.shape.get(1..) != self.shape.get(1..) || start + src.frames() > self.frames() {
            return Err(Error::ShapeMismatch {
                expected: self.shape.clone(),
                found: src.shape.clone(),
            });
        }
        let fs = self.frame_size();
        self.data[start * fs..(start + src.frames()) * fs].copy_from_slice(&src.data);
        Ok(())
    }

    /// Concatenates along axis 0. All parts must agree on trailing extents.
    pub fn concat_frames(parts: &[Tensor]) -> Result<Tensor> {
        let first = parts.first().ok_or(Error::EmptyInput("concat of zero tensors"))?;
        let tail = first.shape.get(1..).unwrap_or(&[]).to_vec();
        let mut frames = 0;
        let mut data = Vec::new();
        for p in parts {
            if p.rank() == 0 || p.shape[1..] != tail[..] {
                return Err(Error::ShapeMismatch {
                    expected: first.shape.clone(),
                    found: p.shape.clone(),
                });
            }
            frames += p.frames();
            data.extend_from_slice(&p.data);
        }
        let mut shape = vec![frames];
        shape.extend(tail);
        Ok(Tensor { shape, data })
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> Result<f64> {
        self.ensure_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// `w * a + (1 - w) * b`, evaluated so that equal inputs come back unchanged
/// and the endpoints `w = 1`, `w = 0` select an input exactly.
#[inline]
pub fn convex_blend(a: f64, b: f64, w: f64) -> f64 {
    if w == 1.0 {
        a
    } else if w == 0.0 {
        b
    } else {
        b + w * (a - b)
    }
}
