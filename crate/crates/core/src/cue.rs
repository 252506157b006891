//! Conversion of raw sensor planes into normalised observation vectors.

use crate::error::{Error, Result};
use crate::types::{BitDepth, FrameStack, ObservationVector, PipelineConfig};

/// Chromaticity `(r, g)` of an 8-bit RGB triple. Black maps to the neutral
/// point `(1/3, 1/3)`.
#[inline]
pub fn to_chromaticity(rgb: [u8; 3]) -> (f64, f64) {
    let [r, g, b] = rgb.map(f64::from);
    let sum = r + g + b;
    if sum == 0.0 {
        (1.0 / 3.0, 1.0 / 3.0)
    } else {
        (r / sum, g / sum)
    }
}

/// Raw depth to `[0, 1]`, or `None` for the zero sentinel.
#[inline]
pub fn normalize_depth(raw: u16, depth_max: f64) -> Option<f64> {
    debug_assert!(depth_max > 0.0);
    (raw != 0).then(|| (raw as f64 / depth_max).min(1.0))
}

/// Raw thermal intensity scaled by the full range of its bit depth.
pub fn normalize_thermal(raw: u16, bit_depth: BitDepth) -> Result<f64> {
    let max = bit_depth.max_value();
    if raw > max {
        return Err(Error::OutOfRange {
            what: "thermal intensity",
            value: raw as u64,
        });
    }
    Ok(raw as f64 / max as f64)
}

/// Observation at plane offset `idx`; the frame constructor has already
/// checked thermal range.
#[inline]
pub(crate) fn observation_at(frame: &FrameStack, idx: usize, depth_max: f64) -> ObservationVector {
    let (r, g) = to_chromaticity(frame.rgb_at(idx));
    ObservationVector {
        r,
        g,
        depth: normalize_depth(frame.depth_at(idx), depth_max),
        thermal: frame.thermal_at(idx) as f64 / frame.thermal_bits().max_value() as f64,
    }
}

pub fn build_observation(frame: &FrameStack, x: u32, y: u32, config: &PipelineConfig) -> Result<ObservationVector> {
    if !frame.contains(x, y) {
        return Err(Error::OutOfBounds {
            x,
            y,
            width: frame.width(),
            height: frame.height(),
        });
    }
    Ok(observation_at(frame, frame.offset(x, y), config.depth_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const THIRD: f64 = 1.0 / 3.0;

    #[test]
    fn chromaticity_examples() {
        assert_eq!(to_chromaticity([100, 100, 100]), (THIRD, THIRD));
        assert_eq!(to_chromaticity([255, 0, 0]), (1.0, 0.0));
        assert_eq!(to_chromaticity([0, 0, 0]), (THIRD, THIRD));
        let (r, g) = to_chromaticity([50, 100, 150]);
        assert!((r - 0.166_666_666_666_666_67).abs() < 1e-15);
        assert!((g - 0.333_333_333_333_333_3).abs() < 1e-15);
    }

    #[test]
    fn depth_examples() {
        assert_eq!(normalize_depth(0, 8000.0), None);
        assert_eq!(normalize_depth(8000, 8000.0), Some(1.0));
        assert_eq!(normalize_depth(16000, 8000.0), Some(1.0));
        assert_eq!(normalize_depth(4000, 8000.0), Some(0.5));
    }

    #[test]
    fn thermal_examples() {
        assert_eq!(normalize_thermal(255, BitDepth::Eight).unwrap(), 1.0);
        assert_eq!(normalize_thermal(0, BitDepth::Eight).unwrap(), 0.0);
        let v = normalize_thermal(128, BitDepth::Eight).unwrap();
        assert!((v - 0.501_96).abs() < 1e-5);
        assert_eq!(v, 128.0 / 255.0);
        assert_eq!(normalize_thermal(65535, BitDepth::Sixteen).unwrap(), 1.0);
        assert!(matches!(
            normalize_thermal(256, BitDepth::Eight),
            Err(Error::OutOfRange { value: 256, .. })
        ));
    }

    fn one_pixel(rgb: [u8; 3], depth: u16, thermal: u16) -> FrameStack {
        FrameStack::new(1, 1, rgb.to_vec(), vec![depth], vec![thermal], BitDepth::Eight, 0).unwrap()
    }

    #[test]
    fn observation_examples() {
        let cfg = PipelineConfig::default();
        let o = build_observation(&one_pixel([100, 100, 100], 4000, 128), 0, 0, &cfg).unwrap();
        assert_eq!(o, ObservationVector::new(THIRD, THIRD, Some(0.5), 128.0 / 255.0));
        assert!(!o.ado());

        let o = build_observation(&one_pixel([255, 0, 0], 0, 0), 0, 0, &cfg).unwrap();
        assert_eq!(o, ObservationVector::new(1.0, 0.0, None, 0.0));
        assert!(o.ado());
    }

    #[test]
    fn out_of_bounds_pixel() {
        let cfg = PipelineConfig::default();
        let frame = one_pixel([1, 2, 3], 1, 1);
        assert!(matches!(
            build_observation(&frame, 1, 0, &cfg),
            Err(Error::OutOfBounds { x: 1, y: 0, .. })
        ));
    }

    proptest! {
        #[test]
        fn observation_is_composition_of_transforms(
            rgb in any::<[u8; 3]>(),
            depth in any::<u16>(),
            thermal in any::<u16>(),
            depth_max in 1.0f64..20000.0,
        ) {
            let cfg = PipelineConfig { depth_max, ..Default::default() };
            let frame = FrameStack::new(1, 1, rgb.to_vec(), vec![depth], vec![thermal], BitDepth::Sixteen, 3).unwrap();
            let o = build_observation(&frame, 0, 0, &cfg).unwrap();
            let (r, g) = to_chromaticity(rgb);
            prop_assert_eq!(o.r, r);
            prop_assert_eq!(o.g, g);
            prop_assert_eq!(o.depth, normalize_depth(depth, depth_max));
            prop_assert_eq!(o.thermal, normalize_thermal(thermal, BitDepth::Sixteen).unwrap());
            prop_assert_eq!(o.ado(), depth == 0);
        }

        #[test]
        fn chromaticity_in_simplex(rgb in any::<[u8; 3]>()) {
            let (r, g) = to_chromaticity(rgb);
            prop_assert!((0.0..=1.0).contains(&r) && (0.0..=1.0).contains(&g));
            prop_assert!(r + g <= 1.0 + 1e-9);
        }

        #[test]
        fn depth_monotone(a in 1u16.., b in 1u16.., depth_max in 1.0f64..70000.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(normalize_depth(lo, depth_max).unwrap() <= normalize_depth(hi, depth_max).unwrap());
        }
    }
}
