use crate::error::{Error, Result};
use crate::types::ForegroundMask;

/// Square structuring element of side `2 * radius + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructuringElement {
    radius: usize,
}

impl StructuringElement {
    pub fn square(radius: usize) -> Result<Self> {
        if radius == 0 {
            return Err(Error::InvalidConfig {
                field: "opening_radius",
                requirement: "opening_radius ≥ 1",
            });
        }
        Ok(Self { radius })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }
}

/// Sliding-window count of set bits along one line. `keep` decides the output
/// bit from the number of set bits inside the clipped window.
fn window_pass(line: &[bool], out: &mut [bool], radius: usize, keep: impl Fn(usize) -> bool) {
    let n = line.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0usize);
    for &b in line {
        prefix.push(prefix.last().unwrap() + b as usize);
    }
    for (i, o) in out.iter_mut().enumerate() {
        let lo = i.saturating_sub(radius);
        let hi = (i + radius + 1).min(n);
        *o = keep(prefix[hi] - prefix[lo]);
    }
}

/// Applies `window_pass` along rows, then along columns.
fn separable(mask: &ForegroundMask, radius: usize, keep: impl Fn(usize) -> bool + Copy) -> ForegroundMask {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let mut out = ForegroundMask::new(mask.width(), mask.height());
    if w == 0 || h == 0 {
        return out;
    }
    let mut rows = vec![false; w * h];
    for (src, dst) in mask.bits().chunks(w).zip(rows.chunks_mut(w)) {
        window_pass(src, dst, radius, keep);
    }
    let mut col = vec![false; h];
    let mut col_out = vec![false; h];
    let bits = out.bits_mut();
    for x in 0..w {
        for y in 0..h {
            col[y] = rows[y * w + x];
        }
        window_pass(&col, &mut col_out, radius, keep);
        for y in 0..h {
            bits[y * w + x] = col_out[y];
        }
    }
    out
}

/// Keeps pixels whose whole neighbourhood is foreground. Pixels outside the
/// frame count as background.
pub fn erode(mask: &ForegroundMask, se: &StructuringElement) -> ForegroundMask {
    let side = se.side();
    separable(mask, se.radius, move |c| c == side)
}

pub fn dilate(mask: &ForegroundMask, se: &StructuringElement) -> ForegroundMask {
    separable(mask, se.radius, |c| c > 0)
}

/// Erosion followed by dilation.
pub fn open(mask: &ForegroundMask, se: &StructuringElement) -> ForegroundMask {
    dilate(&erode(mask, se), se)
}
