use crate::imageio::Image;

/// Single-channel float plane, row-major. Values are unconstrained.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Plane {
            width,
            height,
            data,
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Plane::new(width, height, vec![0.0; width * height])
    }

    pub fn from_image(img: &Image) -> Self {
        Plane::new(img.width(), img.height(), img.data().to_vec())
    }

    /// Sample with coordinates clamped to the border.
    #[inline]
    pub fn at(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Separable convolution with a symmetric odd-length kernel, border replicated.
    pub fn convolve_separable(&self, kernel: &[f64]) -> Plane {
        let r = (kernel.len() / 2) as isize;
        let (w, h) = (self.width, self.height);
        let mut tmp = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for (t, k) in kernel.iter().enumerate() {
                    acc += k * self.at(x as isize + t as isize - r, y as isize);
                }
                tmp[y * w + x] = acc;
            }
        }
        let tmp = Plane::new(w, h, tmp);
        let mut out = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for (t, k) in kernel.iter().enumerate() {
                    acc += k * tmp.at(x as isize, y as isize + t as isize - r);
                }
                out[y * w + x] = acc;
            }
        }
        Plane::new(w, h, out)
    }

    /// Bilinear resampling with pixel centers aligned.
    pub fn resize(&self, width: usize, height: usize) -> Plane {
        if width == self.width && height == self.height {
            return self.clone();
        }
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        let mut out = Vec::with_capacity(width * height);
        for y in 0..height {
            let fy = ((y as f64 + 0.5) * sy - 0.5).max(0.0);
            let y0 = fy.floor() as isize;
            let ty = fy - y0 as f64;
            for x in 0..width {
                let fx = ((x as f64 + 0.5) * sx - 0.5).max(0.0);
                let x0 = fx.floor() as isize;
                let tx = fx - x0 as f64;
                let top = self.at(x0, y0) * (1.0 - tx) + self.at(x0 + 1, y0) * tx;
                let bottom = self.at(x0, y0 + 1) * (1.0 - tx) + self.at(x0 + 1, y0 + 1) * tx;
                out.push(top * (1.0 - ty) + bottom * ty);
            }
        }
        Plane::new(width, height, out)
    }

    /// Rescales to `[0, 1]`. A plane whose range is zero, or negligible next
    /// to its magnitude, becomes all zeros.
    pub fn min_max_normalized(&self) -> Plane {
        let (lo, hi) = (self.min(), self.max());
        let span = hi - lo;
        let scale = hi.abs().max(lo.abs());
        if !(span > 1e-12 * scale) || !span.is_finite() {
            return Plane::zeros(self.width, self.height);
        }
        Plane::new(
            self.width,
            self.height,
            self.data
                .iter()
                .map(|v| ((v - lo) / span).clamp(0.0, 1.0))
                .collect(),
        )
    }

    pub fn into_image(self) -> Image {
        Image::from_clamped(self.width, self.height, self.data)
            .expect("plane dimensions are positive")
    }
}

pub(crate) fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as usize;
    let mut k: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= total);
    k
}

/// Gaussian blur with standard deviation `sigma` pixels (border replicated).
/// `sigma = 0` returns the input unchanged.
pub fn gaussian_blur(img: &Image, sigma: f64) -> Image {
    blur_plane(&Plane::from_image(img), sigma).into_image()
}

pub(crate) fn blur_plane(p: &Plane, sigma: f64) -> Plane {
    if sigma <= 0.0 {
        return p.clone();
    }
    p.convolve_separable(&gaussian_kernel(sigma))
}
