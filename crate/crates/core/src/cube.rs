//! Data cube and label raster types.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// A rows x cols x bands reflectance-like cube, stored band-sequential
/// (band-major, then row, then column), entries nonnegative and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct HsiCube {
    rows: usize,
    cols: usize,
    bands: usize,
    data: Vec<f64>,
    wavelengths: Option<Vec<f64>>,
}

impl HsiCube {
    pub fn new(
        rows: usize,
        cols: usize,
        bands: usize,
        data: Vec<f64>,
        wavelengths: Option<Vec<f64>>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 || bands == 0 {
            return Err(Error::shape("cube dimensions must be positive"));
        }
        if data.len() != rows * cols * bands {
            return Err(Error::shape(format!(
                "cube data length {} does not match {rows}x{cols}x{bands}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::domain("cube entries must be finite and nonnegative"));
        }
        if let Some(ref w) = wavelengths {
            if w.len() != bands {
                return Err(Error::shape("wavelength count does not match band count"));
            }
        }
        Ok(Self { rows, cols, bands, data, wavelengths })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn wavelengths(&self) -> Option<&[f64]> {
        self.wavelengths.as_deref()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, band: usize) -> f64 {
        self.data[band * self.rows * self.cols + row * self.cols + col]
    }

    /// Spectrum at one pixel.
    pub fn spectrum(&self, row: usize, col: usize) -> Vec<f64> {
        (0..self.bands).map(|b| self.get(row, col, b)).collect()
    }

    /// All pixels as a (rows*cols) x bands matrix in raster-scan order.
    pub fn pixel_matrix(&self) -> Matrix {
        Matrix::from_fn(self.rows * self.cols, self.bands, |p, b| {
            self.get(p / self.cols, p % self.cols, b)
        })
    }

    /// Mean over bands per pixel, as a rows x cols image.
    pub fn band_mean_image(&self) -> Matrix {
        let inv = 1.0 / self.bands as f64;
        Matrix::from_fn(self.rows, self.cols, |r, c| {
            (0..self.bands).map(|b| self.get(r, c, b)).sum::<f64>() * inv
        })
    }
}

/// Integer label per pixel; 0 means unlabeled, classes are 1..=C.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelRaster {
    rows: usize,
    cols: usize,
    labels: Vec<usize>,
}

impl LabelRaster {
    pub fn new(rows: usize, cols: usize, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != rows * cols {
            return Err(Error::shape(format!(
                "label raster length {} does not match {rows}x{cols}",
                labels.len()
            )));
        }
        Ok(Self { rows, cols, labels })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> usize {
        self.labels[row * self.cols + col]
    }

    /// Largest class id present.
    pub fn n_classes(&self) -> usize {
        self.labels.iter().copied().max().unwrap_or(0)
    }

    /// Raster-scan list of labeled pixels as (row, col, class).
    pub fn labeled_pixels(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                let l = self.get(r, c);
                if l > 0 {
                    out.push((r, c, l));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_layout_is_band_sequential() {
        // 2x2x2 cube: band 0 = [[0,1],[2,3]], band 1 = [[4,5],[6,7]].
        let cube =
            HsiCube::new(2, 2, 2, (0..8).map(|v| v as f64).collect(), None).unwrap();
        assert_eq!(cube.get(0, 1, 0), 1.0);
        assert_eq!(cube.get(1, 0, 1), 6.0);
        assert_eq!(cube.spectrum(1, 1), vec![3.0, 7.0]);
        let px = cube.pixel_matrix();
        assert_eq!(px.row(2), &[2.0, 6.0]);
    }

    #[test]
    fn cube_rejects_negative_and_mismatched() {
        assert!(HsiCube::new(1, 1, 2, vec![1.0, -0.1], None).is_err());
        assert!(HsiCube::new(1, 1, 2, vec![1.0], None).is_err());
        assert!(HsiCube::new(1, 1, 1, vec![1.0], Some(vec![400.0, 500.0])).is_err());
    }

    #[test]
    fn raster_lists_labeled_pixels_in_scan_order() {
        let raster = LabelRaster::new(2, 2, vec![0, 1, 2, 1]).unwrap();
        assert_eq!(raster.n_classes(), 2);
        assert_eq!(
            raster.labeled_pixels(),
            vec![(0, 1, 1), (1, 0, 2), (1, 1, 1)]
        );
    }
}
