use crate::error::{Error, Result};

/// What kind of data a [`Signal`] holds. Determines how its shape splits into
/// coordinate axes and channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modality {
    /// `[len]` or `[len, channels]`
    Audio1D,
    /// `[height, width, channels]`
    Image2D,
    /// `[depth, height, width, channels]`
    Volume3D,
    /// every axis is a coordinate axis, one channel
    Synthetic,
}

impl Modality {
    pub fn tag(self) -> u8 {
        match self {
            Modality::Audio1D => 1,
            Modality::Image2D => 2,
            Modality::Volume3D => 3,
            Modality::Synthetic => 0,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Some(match tag {
            0 => Modality::Synthetic,
            1 => Modality::Audio1D,
            2 => Modality::Image2D,
            3 => Modality::Volume3D,
            _ => return None,
        })
    }
}

/// A dense buffer of finite samples with shape metadata.
///
/// Data is stored row-major with the channel axis (if any) last.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    data: Vec<f64>,
    shape: Vec<usize>,
    modality: Modality,
}

impl Signal {
    pub fn new(data: Vec<f64>, shape: Vec<usize>, modality: Modality) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptySignal);
        }
        if shape.iter().any(|&d| d == 0) || shape.iter().product::<usize>() != data.len() {
            return Err(Error::ShapeMismatch {
                expected: vec![data.len()],
                actual: shape,
            });
        }
        let rank_ok = match modality {
            Modality::Audio1D => matches!(shape.len(), 1 | 2),
            Modality::Image2D => shape.len() == 3,
            Modality::Volume3D => shape.len() == 4,
            Modality::Synthetic => !shape.is_empty(),
        };
        if !rank_ok {
            return Err(Error::InvalidParameter(format!(
                "rank {} is not valid for {modality:?}",
                shape.len()
            )));
        }
        if let Some((index, &value)) = data.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self {
            data,
            shape,
            modality,
        })
    }

    /// One-axis synthetic signal, handy for tests and scalar distributions.
    pub fn from_vec(data: Vec<f64>) -> Result<Self> {
        let n = data.len();
        Self::new(data, vec![n], Modality::Synthetic)
    }

    /// Grayscale image with a trailing channel axis of 1.
    pub fn image(data: Vec<f64>, height: usize, width: usize, channels: usize) -> Result<Self> {
        Self::new(data, vec![height, width, channels], Modality::Image2D)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Extents of the coordinate axes (everything except the channel axis).
    pub fn coord_shape(&self) -> &[usize] {
        match self.modality {
            Modality::Audio1D => &self.shape[..1],
            Modality::Image2D => &self.shape[..2],
            Modality::Volume3D => &self.shape[..3],
            Modality::Synthetic => &self.shape,
        }
    }

    pub fn channels(&self) -> usize {
        match self.modality {
            Modality::Audio1D => self.shape.get(1).copied().unwrap_or(1),
            Modality::Image2D => self.shape[2],
            Modality::Volume3D => self.shape[3],
            Modality::Synthetic => 1,
        }
    }

    /// Same shape and modality, new samples. Samples must be finite.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self> {
        Self::new(data, self.shape.clone(), self.modality)
    }

    /// Applies `f` to every sample. The caller guarantees `f` keeps samples finite.
    pub(crate) fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            data: self.data.iter().map(|&v| f(v)).collect(),
            shape: self.shape.clone(),
            modality: self.modality,
        }
    }

    pub(crate) fn replace_data(&self, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), self.data.len());
        Self {
            data,
            shape: self.shape.clone(),
            modality: self.modality,
        }
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn check_same_shape(&self, other: &Signal) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                expected: self.shape.clone(),
                actual: other.shape.clone(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(matches!(Signal::from_vec(vec![]), Err(Error::EmptySignal)));
        assert!(matches!(
            Signal::new(vec![0.0; 5], vec![2, 2], Modality::Synthetic),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(matches!(
            Signal::from_vec(vec![0.0, f64::NAN]),
            Err(Error::NonFinite { index: 1, .. })
        ));
        assert!(Signal::new(vec![0.0; 4], vec![4], Modality::Image2D).is_err());
    }

    #[test]
    fn coord_and_channel_split() {
        let s = Signal::image(vec![0.0; 2 * 3 * 3], 2, 3, 3).unwrap();
        assert_eq!(s.coord_shape(), &[2, 3]);
        assert_eq!(s.channels(), 3);
        let a = Signal::new(vec![0.0; 8], vec![8], Modality::Audio1D).unwrap();
        assert_eq!(a.coord_shape(), &[8]);
        assert_eq!(a.channels(), 1);
    }
}
