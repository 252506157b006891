use crate::types::{BoundingBox, ForegroundMask};

/// One 8-connected foreground region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Blob {
    /// 1-based label, assigned in raster order of each blob's first pixel.
    pub label: u32,
    pub area: usize,
    pub bbox: BoundingBox,
}

/// Label image plus per-blob statistics. Label 0 is background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub width: u32,
    pub height: u32,
    pub labels: Vec<u32>,
    pub blobs: Vec<Blob>,
}

impl Components {
    pub fn label_at(&self, x: u32, y: u32) -> u32 {
        self.labels[y as usize * self.width as usize + x as usize]
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> u32 {
        let (ra, rb) = (self.find(a), self.find(b));
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
        lo
    }
}

/// Two-pass 8-connectivity labelling with union-find.
pub fn connected_components(mask: &ForegroundMask) -> Components {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let bits = mask.bits();
    let mut provisional = vec![u32::MAX; w * h];
    let mut sets = DisjointSet { parent: Vec::new() };

    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !bits[i] {
                continue;
            }
            // Already-visited neighbours: W, NW, N, NE.
            let mut label: Option<u32> = None;
            let mut visit = |j: usize, sets: &mut DisjointSet| {
                let l = provisional[j];
                if l != u32::MAX {
                    label = Some(match label {
                        Some(cur) => sets.union(cur, l),
                        None => l,
                    });
                }
            };
            if x > 0 {
                visit(i - 1, &mut sets);
            }
            if y > 0 {
                if x > 0 {
                    visit(i - w - 1, &mut sets);
                }
                visit(i - w, &mut sets);
                if x + 1 < w {
                    visit(i - w + 1, &mut sets);
                }
            }
            provisional[i] = match label {
                Some(l) => l,
                None => sets.make(),
            };
        }
    }

    let mut final_label = vec![0u32; sets.parent.len()];
    let mut labels = vec![0u32; w * h];
    let mut blobs: Vec<Blob> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if provisional[i] == u32::MAX {
                continue;
            }
            let root = sets.find(provisional[i]) as usize;
            if final_label[root] == 0 {
                blobs.push(Blob {
                    label: blobs.len() as u32 + 1,
                    area: 0,
                    bbox: BoundingBox::new(x as u32, y as u32, x as u32, y as u32),
                });
                final_label[root] = blobs.len() as u32;
            }
            let label = final_label[root];
            labels[i] = label;
            let blob = &mut blobs[label as usize - 1];
            blob.area += 1;
            let b = &mut blob.bbox;
            b.x_min = b.x_min.min(x as u32);
            b.x_max = b.x_max.max(x as u32);
            b.y_max = b.y_max.max(y as u32);
        }
    }

    Components {
        width: mask.width(),
        height: mask.height(),
        labels,
        blobs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask_from(rows: &[&str]) -> ForegroundMask {
        let h = rows.len() as u32;
        let w = rows[0].len() as u32;
        let bits = rows.iter().flat_map(|r| r.bytes().map(|b| b == b'#')).collect();
        ForegroundMask::from_bits(w, h, bits).unwrap()
    }

    #[test]
    fn diagonal_pixels_join() {
        let c = connected_components(&mask_from(&["#.", ".#"]));
        assert_eq!(c.blobs.len(), 1);
        assert_eq!(c.blobs[0].area, 2);
    }

    #[test]
    fn gap_splits() {
        let c = connected_components(&mask_from(&["#.#"]));
        assert_eq!(c.blobs.len(), 2);
        assert_eq!(c.labels, vec![1, 0, 2]);
    }

    #[test]
    fn u_shape_merges_late() {
        let c = connected_components(&mask_from(&["#..#", "#..#", "####"]));
        assert_eq!(c.blobs.len(), 1);
        assert_eq!(c.blobs[0].area, 8);
        assert_eq!(c.blobs[0].bbox, BoundingBox::new(0, 0, 3, 2));
    }

    #[test]
    fn empty_mask() {
        let c = connected_components(&ForegroundMask::new(5, 5));
        assert!(c.blobs.is_empty());
        assert!(c.labels.iter().all(|&l| l == 0));
    }
}
