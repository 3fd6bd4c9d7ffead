use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use super::{EnvGraph, PanoDims, PlacedObject, Point};
use crate::graph::NodeId;

/// Height of the panoramic camera above the floor.
pub const CAMERA_HEIGHT_M: f64 = 1.5;

/// Objects closer than this are projected as if at this distance.
const MIN_VIEW_DISTANCE_M: f64 = 0.25;

/// Row-major binary mask.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryMask {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl BinaryMask {
    pub fn zeros(width: usize, height: usize) -> Self {
        BinaryMask {
            width,
            height,
            data: vec![0; width * height],
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize) {
        self.data[row * self.width + col] = 1;
    }

    pub fn count(&self) -> usize {
        self.data.iter().map(|&v| v as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    /// OR a box into the mask, wrapping columns around the seam.
    pub fn fill(&mut self, b: &PixelBox) {
        for r in b.row_start..b.row_end.min(self.height) {
            for dc in 0..b.col_len.min(self.width) {
                self.set(r, (b.col_start + dc) % self.width);
            }
        }
    }

    /// Circular shift of every row by `shift` columns to the right.
    pub fn roll_columns(&self, shift: usize) -> Self {
        let mut out = BinaryMask::zeros(self.width, self.height);
        for r in 0..self.height {
            for c in 0..self.width {
                out.data[r * self.width + (c + shift) % self.width] = self.get(r, c);
            }
        }
        out
    }
}

/// Panorama box in pixel units. Columns `col_start .. col_start + col_len`
/// are taken modulo the panorama width; rows are not wrapped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelBox {
    pub category: usize,
    pub col_start: usize,
    pub col_len: usize,
    pub row_start: usize,
    pub row_end: usize,
}

impl PixelBox {
    pub fn height(&self) -> usize {
        self.row_end - self.row_start
    }

    pub fn wraps(&self, width: usize) -> bool {
        self.col_start + self.col_len > width
    }
}

/// Per-category binary masks of one panoramic view.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanoObservation {
    pub masks: Vec<BinaryMask>,
}

impl PanoObservation {
    pub fn empty(category_count: usize, dims: PanoDims) -> Self {
        PanoObservation {
            masks: vec![BinaryMask::zeros(dims.width, dims.height); category_count],
        }
    }

    pub fn from_boxes(category_count: usize, dims: PanoDims, boxes: &[PixelBox]) -> Self {
        let mut obs = Self::empty(category_count, dims);
        for b in boxes {
            obs.masks[b.category].fill(b);
        }
        obs
    }

    pub fn category_count(&self) -> usize {
        self.masks.len()
    }

    pub fn dims(&self) -> PanoDims {
        self.masks
            .first()
            .map(|m| PanoDims {
                width: m.width,
                height: m.height,
            })
            .unwrap_or(PanoDims {
                width: 0,
                height: 0,
            })
    }
}

fn round_half_up(x: f64) -> i64 {
    libm::floor(x + 0.5) as i64
}

fn row_of_elevation(elevation: f64, height: usize) -> f64 {
    (FRAC_PI_2 - elevation) / PI * height as f64
}

/// Project one object seen from `viewpoint` into panorama pixels.
///
/// Heading `atan2(dy, dx) + yaw` maps to column `θ / 2π · W`, with the +x
/// direction at column 0. The angular width is `2 atan(w / 2d)`; rows come
/// from the elevation of the object's top and bottom edges relative to a
/// camera at [`CAMERA_HEIGHT_M`], mapped linearly from `π/2` (row 0) to
/// `-π/2` (row H). Returns `None` beyond the object's visibility radius.
pub fn project_object(viewpoint: Point, obj: &PlacedObject, dims: PanoDims, yaw: f64) -> Option<PixelBox> {
    let dx = obj.position.x - viewpoint.x;
    let dy = obj.position.y - viewpoint.y;
    let true_dist = libm::hypot(dx, dy);
    if true_dist > obj.visibility_radius {
        return None;
    }
    let dist = true_dist.max(MIN_VIEW_DISTANCE_M);
    let w = dims.width as f64;

    let heading = if true_dist > 0.0 { libm::atan2(dy, dx) } else { 0.0 } + yaw;
    let heading = crate::wrap_angle(heading);
    let center = heading / TAU * w;
    let angular_width = 2.0 * libm::atan(obj.width_m / (2.0 * dist));
    let half = angular_width / TAU * w / 2.0;
    let start = round_half_up(center - half);
    let end = round_half_up(center + half).max(start + 1);
    let col_len = ((end - start) as usize).min(dims.width);
    let col_start = start.rem_euclid(dims.width as i64) as usize;

    let top = libm::atan2(obj.height_m - CAMERA_HEIGHT_M, dist);
    let bottom = libm::atan2(-CAMERA_HEIGHT_M, dist);
    let h = dims.height as i64;
    let row_start = round_half_up(row_of_elevation(top, dims.height)).clamp(0, h - 1);
    let row_end = round_half_up(row_of_elevation(bottom, dims.height)).clamp(row_start + 1, h);

    Some(PixelBox {
        category: obj.category,
        col_start,
        col_len,
        row_start: row_start as usize,
        row_end: row_end as usize,
    })
}

/// Pixel boxes of every object visible from `node`, in object order.
pub fn render_boxes(env: &EnvGraph, node: NodeId) -> Vec<PixelBox> {
    boxes_with_yaw(env, node, 0.0)
}

fn boxes_with_yaw(env: &EnvGraph, node: NodeId, yaw: f64) -> Vec<PixelBox> {
    let at = env.position(node);
    env.objects()
        .iter()
        .filter_map(|o| project_object(at, o, env.pano_dims(), yaw))
        .collect()
}

/// Render the per-category panoramic masks at `node`.
pub fn render_pano(env: &EnvGraph, node: NodeId) -> PanoObservation {
    render_pano_rotated(env, node, 0.0)
}

/// Render with every object heading offset by `yaw` radians.
pub fn render_pano_rotated(env: &EnvGraph, node: NodeId, yaw: f64) -> PanoObservation {
    let boxes = boxes_with_yaw(env, node, yaw);
    PanoObservation::from_boxes(env.category_count(), env.pano_dims(), &boxes)
}

/// Category covering the most pixels, ties to the smallest index.
pub fn dominant_category(obs: &PanoObservation) -> Option<usize> {
    let mut best: Option<(usize, usize)> = None;
    for (k, m) in obs.masks.iter().enumerate() {
        let c = m.count();
        if c > 0 && best.is_none_or(|(_, bc)| c > bc) {
            best = Some((k, c));
        }
    }
    best.map(|(k, _)| k)
}
