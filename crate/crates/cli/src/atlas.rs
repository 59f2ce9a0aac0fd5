use nalgebra::DMatrix;
use rarity_core::imageio::Image;

use crate::run::Failure;

/// Tiles square atoms (columns of `atoms`) into a `⌈√K⌉`-wide grid, each
/// atom min-max normalized on its own. Gaps and unused cells are black.
pub fn atlas(atoms: &DMatrix<f64>, gap: usize) -> Result<Image, Failure> {
    let (n, k) = atoms.shape();
    let side = (n as f64).sqrt().round() as usize;
    if side * side != n {
        return Err(Failure::Contract(format!(
            "atom length {n} is not a square"
        )));
    }
    let cols = (k as f64).sqrt().ceil() as usize;
    let rows = k.div_ceil(cols);
    let width = cols * side + (cols - 1) * gap;
    let height = rows * side + (rows - 1) * gap;
    let mut data = vec![0.0; width * height];
    for (i, atom) in atoms.column_iter().enumerate() {
        let lo = atom.min();
        let span = atom.max() - lo;
        let (x0, y0) = ((i % cols) * (side + gap), (i / cols) * (side + gap));
        for (p, &v) in atom.iter().enumerate() {
            let level = if span > 0.0 { (v - lo) / span } else { 0.5 };
            data[(y0 + p / side) * width + x0 + p % side] = level;
        }
    }
    Image::new(width, height, data).map_err(Failure::from)
}
