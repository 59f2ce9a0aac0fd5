//! Grayscale Itti–Koch saliency with intensity and orientation channels.

use std::f64::consts::SQRT_2;

use super::filter::Plane;
use super::SaliencyMap;
use crate::imageio::Image;
use crate::{Error, Result};

const LEVELS: usize = 6;
const MIN_SIDE: usize = 64;
/// (center, surround) pyramid level pairs.
const PAIRS: [(usize, usize); 4] = [(1, 3), (1, 4), (2, 4), (2, 5)];
/// Feature maps are summed at this pyramid level's resolution.
const COMBINE_LEVEL: usize = 1;
/// Local maxima below this fraction of the global maximum are ignored.
const LOCAL_MAX_THRESHOLD: f64 = 0.1;
/// Maps whose peak is below this are treated as empty.
const EMPTY_MAP: f64 = 1e-12;

/// 5-tap binomial low-pass used between pyramid levels.
const PYRAMID_KERNEL: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

fn pyramid(base: Plane) -> Vec<Plane> {
    let mut levels = vec![base];
    while levels.len() < LEVELS {
        let prev = levels.last().expect("non-empty");
        let blurred = prev.convolve_separable(&PYRAMID_KERNEL);
        let (w, h) = (prev.width.div_ceil(2), prev.height.div_ceil(2));
        let mut data = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                data.push(blurred.data[2 * y * blurred.width + 2 * x]);
            }
        }
        levels.push(Plane::new(w, h, data));
    }
    levels
}

/// Absolute directional derivative (central difference) along 0°, 45°, 90° or 135°.
fn orientation(p: &Plane, angle: usize) -> Plane {
    let (dx, dy, norm): (isize, isize, f64) = match angle {
        0 => (1, 0, 2.0),
        45 => (1, -1, 2.0 * SQRT_2),
        90 => (0, 1, 2.0),
        135 => (1, 1, 2.0 * SQRT_2),
        _ => unreachable!("unsupported angle"),
    };
    let mut data = Vec::with_capacity(p.data.len());
    for y in 0..p.height as isize {
        for x in 0..p.width as isize {
            data.push(((p.at(x + dx, y + dy) - p.at(x - dx, y - dy)) / norm).abs());
        }
    }
    Plane::new(p.width, p.height, data)
}

fn center_surround(levels: &[Plane], c: usize, s: usize) -> Plane {
    let center = &levels[c];
    let surround = levels[s].resize(center.width, center.height);
    Plane::new(
        center.width,
        center.height,
        center
            .data
            .iter()
            .zip(&surround.data)
            .map(|(a, b)| (a - b).abs())
            .collect(),
    )
}

/// Map normalization operator: scales the map to `[0, 1]` and multiplies it
/// by `(1 − m̄)²`, where `m̄` is the mean of the local maxima other than the
/// global one. Maps with one dominant peak are kept; maps with many similar
/// peaks are suppressed.
fn normalize_map(p: &Plane) -> Plane {
    let peak = p.max();
    if !(peak > EMPTY_MAP) {
        return Plane::zeros(p.width, p.height);
    }
    let scaled: Vec<f64> = p.data.iter().map(|v| v / peak).collect();
    let q = Plane::new(p.width, p.height, scaled);

    let mut global_seen = false;
    let mut sum = 0.0;
    let mut count = 0usize;
    for y in 0..q.height as isize {
        for x in 0..q.width as isize {
            let v = q.at(x, y);
            if v < LOCAL_MAX_THRESHOLD {
                continue;
            }
            let is_max = (-1..=1).all(|oy| {
                (-1..=1).all(|ox| {
                    let (nx, ny) = (x + ox, y + oy);
                    (ox == 0 && oy == 0)
                        || nx < 0
                        || ny < 0
                        || nx >= q.width as isize
                        || ny >= q.height as isize
                        || q.at(nx, ny) <= v
                })
            });
            if !is_max {
                continue;
            }
            if v == 1.0 && !global_seen {
                global_seen = true;
            } else {
                sum += v;
                count += 1;
            }
        }
    }
    let mean = if count > 0 { sum / count as f64 } else { 0.0 };
    let gain = (1.0 - mean).powi(2);
    Plane::new(q.width, q.height, q.data.iter().map(|v| v * gain).collect())
}

fn accumulate(acc: &mut Plane, p: &Plane) {
    let r = p.resize(acc.width, acc.height);
    for (a, b) in acc.data.iter_mut().zip(&r.data) {
        *a += b;
    }
}

/// Simplified Itti–Koch saliency for grayscale images.
///
/// Builds a 6-level Gaussian pyramid, takes center-surround differences
/// for level pairs (1,3), (1,4), (2,4), (2,5) on the intensity and on four
/// directional-gradient maps, normalizes and sums them into an intensity
/// and an orientation conspicuity map, averages the two, and resizes the
/// result to the input size with min-max normalization. A uniform image
/// yields an all-zero map. Inputs must be at least 64×64.
pub fn itti_lite(img: &Image) -> Result<SaliencyMap> {
    if img.width() < MIN_SIDE || img.height() < MIN_SIDE {
        return Err(Error::contract(format!(
            "itti_lite needs at least {MIN_SIDE}x{MIN_SIDE} pixels, got {}x{}",
            img.width(),
            img.height()
        )));
    }
    let levels = pyramid(Plane::from_image(img));
    let (cw, ch) = (levels[COMBINE_LEVEL].width, levels[COMBINE_LEVEL].height);

    let mut intensity = Plane::zeros(cw, ch);
    for &(c, s) in &PAIRS {
        accumulate(
            &mut intensity,
            &normalize_map(&center_surround(&levels, c, s)),
        );
    }

    let mut orient = Plane::zeros(cw, ch);
    for angle in [0, 45, 90, 135] {
        let maps: Vec<Plane> = levels.iter().map(|l| orientation(l, angle)).collect();
        let mut per_angle = Plane::zeros(cw, ch);
        for &(c, s) in &PAIRS {
            accumulate(
                &mut per_angle,
                &normalize_map(&center_surround(&maps, c, s)),
            );
        }
        accumulate(&mut orient, &normalize_map(&per_angle));
    }

    let i_bar = normalize_map(&intensity);
    let o_bar = normalize_map(&orient);
    let combined = Plane::new(
        cw,
        ch,
        i_bar
            .data
            .iter()
            .zip(&o_bar.data)
            .map(|(a, b)| 0.5 * (a + b))
            .collect(),
    );
    Ok(SaliencyMap::from_plane(
        combined.resize(img.width(), img.height()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{disk_image, uniform_image};

    fn argmax(img: &Image) -> (usize, usize) {
        let d = img.data();
        let mut best = 0;
        for i in 0..d.len() {
            if d[i] > d[best] {
                best = i;
            }
        }
        (best % img.width(), best / img.width())
    }

    #[test]
    fn too_small() {
        let img = Image::filled(63, 100, 0.5).unwrap();
        assert!(matches!(itti_lite(&img), Err(Error::Contract(_))));
    }

    #[test]
    fn uniform_is_zero() {
        let img = Image::filled(96, 64, 0.37).unwrap();
        let map = itti_lite(&img).unwrap();
        assert!(map.image().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bright_disk_is_found() {
        let img = disk_image(128, 128, &[(64.0, 64.0)], 8.0, 1.0, 0.0);
        let map = itti_lite(&img).unwrap();
        let (x, y) = argmax(map.image());
        let d2 = (x as f64 + 0.5 - 64.0).powi(2) + (y as f64 + 0.5 - 64.0).powi(2);
        assert!(d2 <= 64.0, "argmax at ({x}, {y})");
    }

    #[test]
    fn twin_disks_have_similar_peaks() {
        let img = disk_image(128, 128, &[(32.0, 64.0), (96.0, 64.0)], 8.0, 1.0, 0.0);
        let map = itti_lite(&img).unwrap();
        let m = map.image();
        let peak = |cx: f64| {
            let mut best: f64 = 0.0;
            for y in 0..128 {
                for x in 0..128 {
                    if (x as f64 + 0.5 - cx).abs() <= 16.0 && (y as f64 + 0.5 - 64.0).abs() <= 16.0
                    {
                        best = best.max(m.get(x, y));
                    }
                }
            }
            best
        };
        let (a, b) = (peak(32.0), peak(96.0));
        assert!((a - b).abs() <= 0.1 * a.max(b), "{a} vs {b}");
    }

    #[test]
    fn offset_invariance() {
        let base = uniform_image(96, 80, 4);
        let low = Image::new(96, 80, base.data().iter().map(|v| v * 0.8).collect()).unwrap();
        let high = Image::new(96, 80, low.data().iter().map(|v| v + 0.1).collect()).unwrap();
        let (a, b) = (itti_lite(&low).unwrap(), itti_lite(&high).unwrap());
        for (x, y) in a.image().data().iter().zip(b.image().data()) {
            assert!((x - y).abs() < 1e-6);
        }
    }
}
