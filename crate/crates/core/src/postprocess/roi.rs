use super::components::Blob;
use crate::types::RegionOfInterest;

/// One tight box per blob of at least `min_blob_area` pixels, ordered by
/// `y_min`, then `x_min`, then descending area.
pub fn extract_rois(blobs: &[Blob], min_blob_area: usize) -> Vec<RegionOfInterest> {
    let mut rois: Vec<RegionOfInterest> = blobs
        .iter()
        .filter(|b| b.area >= min_blob_area)
        .map(|b| RegionOfInterest {
            blob_id: b.label,
            x_min: b.bbox.x_min,
            y_min: b.bbox.y_min,
            x_max: b.bbox.x_max,
            y_max: b.bbox.y_max,
            area: b.area,
        })
        .collect();
    rois.sort_by(|a, b| {
        a.y_min
            .cmp(&b.y_min)
            .then(a.x_min.cmp(&b.x_min))
            .then(b.area.cmp(&a.area))
            .then(a.blob_id.cmp(&b.blob_id))
    });
    rois
}
