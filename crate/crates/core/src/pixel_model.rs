//! Fixed-capacity sample window for a single pixel.

use crate::types::ObservationVector;

/// Compact stored form of an observation. Absent depth is encoded as NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Sample {
    pub r: f32,
    pub g: f32,
    pub depth: f32,
    pub thermal: f32,
}

impl Sample {
    #[inline]
    pub fn is_ado(&self) -> bool {
        self.depth.is_nan()
    }
}

impl From<&ObservationVector> for Sample {
    fn from(obs: &ObservationVector) -> Self {
        Sample {
            r: obs.r as f32,
            g: obs.g as f32,
            depth: obs.depth.map_or(f32::NAN, |d| d as f32),
            thermal: obs.thermal as f32,
        }
    }
}

impl From<&Sample> for ObservationVector {
    fn from(s: &Sample) -> Self {
        ObservationVector {
            r: s.r as f64,
            g: s.g as f64,
            depth: (!s.is_ado()).then_some(s.depth as f64),
            thermal: s.thermal as f64,
        }
    }
}

/// Circular buffer of the most recent `capacity` observations of a pixel.
///
/// Samples are stored in single precision; [`PixelModel::samples`] yields
/// them widened back to `f64`.
#[derive(Debug, Clone)]
pub struct PixelModel {
    samples: Vec<Sample>,
    capacity: usize,
    /// Slot holding the oldest sample once the buffer is full.
    head: usize,
    ado_count: usize,
}

impl PixelModel {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "pixel model capacity must be positive");
        Self {
            samples: Vec::with_capacity(capacity),
            capacity,
            head: 0,
            ado_count: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn count(&self) -> usize {
        self.samples.len()
    }

    pub fn ado_count(&self) -> usize {
        self.ado_count
    }

    pub fn valid_count(&self) -> usize {
        self.samples.len() - self.ado_count
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Appends `obs`, evicting the oldest sample when full.
    pub fn update(&mut self, obs: &ObservationVector) {
        let sample = Sample::from(obs);
        if self.samples.len() < self.capacity {
            self.samples.push(sample);
        } else {
            let evicted = std::mem::replace(&mut self.samples[self.head], sample);
            if evicted.is_ado() {
                self.ado_count -= 1;
            }
            self.head = (self.head + 1) % self.capacity;
        }
        if sample.is_ado() {
            self.ado_count += 1;
        }
    }

    /// Stored slots in arbitrary (storage) order.
    #[inline]
    pub(crate) fn raw_samples(&self) -> &[Sample] {
        &self.samples
    }

    /// Samples oldest first.
    pub fn samples(&self) -> impl Iterator<Item = ObservationVector> + '_ {
        let (newer, older) = self.samples.split_at(self.head);
        older.iter().chain(newer).map(ObservationVector::from)
    }

    /// Rebuilds a model holding `samples` in the given order. Used to check
    /// order-independence of density evaluation.
    pub fn from_samples(capacity: usize, samples: &[ObservationVector]) -> Self {
        let mut model = Self::new(capacity);
        for s in samples {
            model.update(s);
        }
        model
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::VecDeque;

    fn obs(v: f64, ado: bool) -> ObservationVector {
        ObservationVector::new(v, 0.25, (!ado).then_some(0.5), 0.125)
    }

    #[test]
    fn empty_then_one() {
        let mut m = PixelModel::new(4);
        assert!(m.is_empty());
        m.update(&obs(0.5, false));
        assert_eq!(m.count(), 1);
    }

    #[test]
    fn full_model_evicts_oldest() {
        let mut m = PixelModel::new(3);
        for v in [0.0, 0.25, 0.5, 0.75] {
            m.update(&obs(v, false));
        }
        assert_eq!(m.count(), 3);
        let r: Vec<f64> = m.samples().map(|o| o.r).collect();
        assert_eq!(r, vec![0.25, 0.5, 0.75]);
    }

    #[test]
    fn ado_samples_flushed_by_valid_ones() {
        let n = 5;
        let mut m = PixelModel::new(n);
        for _ in 0..n {
            m.update(&obs(0.5, true));
        }
        assert_eq!(m.ado_count(), n);
        for _ in 0..n {
            m.update(&obs(0.5, false));
        }
        assert_eq!(m.ado_count(), 0);
    }

    #[test]
    fn round_trip_preserves_absent_depth() {
        let o = obs(0.5, true);
        let back = ObservationVector::from(&Sample::from(&o));
        assert_eq!(back, o);
        assert!(back.ado());
    }

    proptest! {
        // Insertion of n + k samples retains exactly the last n, in order,
        // and the ADO counter agrees with a list-based reference.
        #[test]
        fn matches_reference_queue(
            capacity in 1usize..12,
            flags in proptest::collection::vec(any::<bool>(), 0..60),
        ) {
            let mut model = PixelModel::new(capacity);
            let mut reference: VecDeque<ObservationVector> = VecDeque::new();
            for (i, &ado) in flags.iter().enumerate() {
                let o = obs(i as f64 / 64.0, ado);
                model.update(&o);
                reference.push_back(o);
                if reference.len() > capacity {
                    reference.pop_front();
                }
                prop_assert_eq!(model.count(), reference.len());
                prop_assert_eq!(model.ado_count(), reference.iter().filter(|o| o.ado()).count());
                prop_assert!(model.ado_count() <= model.count() && model.count() <= capacity);
            }
            let got: Vec<ObservationVector> = model.samples().collect();
            let want: Vec<ObservationVector> = reference.into_iter().collect();
            prop_assert_eq!(got, want);
        }
    }
}
