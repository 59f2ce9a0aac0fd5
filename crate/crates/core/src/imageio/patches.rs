//! Non-overlapping block tiling of an image into patch columns.

use nalgebra::DMatrix;

use super::Image;
use crate::{Error, Result};

/// Flattening convention of a [`PatchGrid`]: blocks scanned row-major over
/// the image, pixels within a block flattened row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockOrder {
    #[default]
    RowMajor,
}

/// Bookkeeping needed to put patch columns back into an image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchGrid {
    pub block: usize,
    pub rows: usize,
    pub cols: usize,
    pub orig_width: usize,
    pub orig_height: usize,
    pub order: BlockOrder,
}

impl PatchGrid {
    pub fn for_image(width: usize, height: usize, block: usize) -> Result<Self> {
        if block == 0 {
            return Err(Error::contract("block size must be at least 1"));
        }
        Ok(PatchGrid {
            block,
            rows: height.div_ceil(block),
            cols: width.div_ceil(block),
            orig_width: width,
            orig_height: height,
            order: BlockOrder::RowMajor,
        })
    }

    /// Patch dimension, `block²`.
    pub fn patch_len(&self) -> usize {
        self.block * self.block
    }

    pub fn num_patches(&self) -> usize {
        self.rows * self.cols
    }

    pub fn padded_width(&self) -> usize {
        self.cols * self.block
    }

    pub fn padded_height(&self) -> usize {
        self.rows * self.block
    }

    /// Index of the patch column holding pixel `(x, y)` of the padded image.
    pub fn patch_of(&self, x: usize, y: usize) -> usize {
        (y / self.block) * self.cols + x / self.block
    }
}

/// `n × N` matrix whose column `j` is the vectorized block `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchMatrix {
    values: DMatrix<f64>,
}

impl PatchMatrix {
    pub fn new(values: DMatrix<f64>) -> Self {
        PatchMatrix { values }
    }

    /// Patch dimension `n`.
    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    /// Number of patches `N`.
    pub fn len(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.values.ncols() == 0
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.values
    }
}

/// Splits `img` into non-overlapping `block × block` patches.
///
/// The image is padded to multiples of `block` by repeating its last row and
/// column. Column `j` of the result holds block `(j / cols, j % cols)`.
pub fn to_patches(img: &Image, block: usize) -> Result<(PatchMatrix, PatchGrid)> {
    let grid = PatchGrid::for_image(img.width(), img.height(), block)?;
    let n = grid.patch_len();
    let mut values = DMatrix::zeros(n, grid.num_patches());
    for br in 0..grid.rows {
        for bc in 0..grid.cols {
            let mut col = values.column_mut(br * grid.cols + bc);
            for dy in 0..block {
                let y = (br * block + dy).min(img.height() - 1);
                for dx in 0..block {
                    let x = (bc * block + dx).min(img.width() - 1);
                    col[dy * block + dx] = img.get(x, y);
                }
            }
        }
    }
    Ok((PatchMatrix::new(values), grid))
}

/// Inverse of [`to_patches`]: untiles, crops the padding and clamps to `[0, 1]`.
pub fn from_patches(pm: &PatchMatrix, grid: &PatchGrid) -> Result<Image> {
    if pm.dim() != grid.patch_len() || pm.len() != grid.num_patches() {
        return Err(Error::contract(format!(
            "patch matrix is {}x{}, grid expects {}x{}",
            pm.dim(),
            pm.len(),
            grid.patch_len(),
            grid.num_patches()
        )));
    }
    let (w, h, b) = (grid.orig_width, grid.orig_height, grid.block);
    let m = pm.as_matrix();
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            data.push(m[((y % b) * b + x % b, grid.patch_of(x, y))]);
        }
    }
    Image::from_clamped(w, h, data)
}
