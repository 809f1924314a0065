//! Binary opening and closing with a disk structuring element.
//!
//! Pixels outside the canvas are ignored: erosion never eats in from the
//! border and dilation never grows in from it.

use crate::image::BinaryMask;

/// Offsets `(dx, dy)` with `dx² + dy² ≤ radius²`.
pub fn disk(radius: usize) -> Vec<(i64, i64)> {
    let r = radius as i64;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                out.push((dx, dy));
            }
        }
    }
    out
}

fn apply(mask: &BinaryMask, element: &[(i64, i64)], erode: bool) -> BinaryMask {
    let (w, h) = mask.dims();
    BinaryMask::from_fn(w, h, |x, y| {
        let mut neighbours = element.iter().filter_map(|&(dx, dy)| {
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            (nx >= 0 && ny >= 0 && nx < w as i64 && ny < h as i64)
                .then(|| mask.get(nx as usize, ny as usize))
        });
        if erode {
            neighbours.all(|v| v)
        } else {
            neighbours.any(|v| v)
        }
    })
    .expect("dimensions come from a valid mask")
}

pub fn erode(mask: &BinaryMask, radius: usize) -> BinaryMask {
    apply(mask, &disk(radius), true)
}

pub fn dilate(mask: &BinaryMask, radius: usize) -> BinaryMask {
    apply(mask, &disk(radius), false)
}

pub fn open(mask: &BinaryMask, radius: usize) -> BinaryMask {
    dilate(&erode(mask, radius), radius)
}

pub fn close(mask: &BinaryMask, radius: usize) -> BinaryMask {
    erode(&dilate(mask, radius), radius)
}
