//! Front camera: procedurally drawn frames sized to the configured byte rate.
//!
//! Frames are uncompressed PPM so that their size follows directly from the
//! pixel count. Faces are drawn as a fine-grained checkerboard, scene text
//! as barred labels and objects as outlined blocks.

use crate::model::{ImageFrame, MediaRef, Payload, Rect, SampleEnvelope, SessionConfig, StreamId};

use super::driver::{
    sub_seed, Capture, FaceTruth, FrameTruth, RawFrame, Schedule, SensorDriver, Sidecar,
};
use super::raster::Raster;
use super::scenario::{EventKind, NormBox, ScenarioEvent, ScenarioScript};

pub const FRAME_EXT: &str = "ppm";
/// Allowed relative error between the target and the achieved frame size.
pub const SIZE_TOLERANCE: f64 = 0.20;
const MIN_WIDTH: u32 = 64;
const MIN_HEIGHT: u32 = 48;
const MAX_SIDE: u32 = 8192;
const STAMP_CELL_PX: u32 = 2;
/// Checkerboard cell size for rendered faces.
pub const FACE_CELL_PX: u32 = 3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("image byte-rate target of {target_bytes} bytes/frame is unreachable within 20%: {reason}")]
pub struct FrameSizeError {
    pub target_bytes: f64,
    pub reason: String,
}

/// Chooses 4:3 frame dimensions whose PPM encoding is closest to `target_bytes`.
pub fn frame_dims_for(target_bytes: f64) -> Result<(u32, u32), FrameSizeError> {
    let err = |reason: &str| FrameSizeError {
        target_bytes,
        reason: reason.to_string(),
    };
    if !(target_bytes.is_finite() && target_bytes > 0.0) {
        return Err(err("target must be positive"));
    }
    let pixels = target_bytes / 3.0;
    let width = (pixels * 4.0 / 3.0).sqrt().round().max(1.0) as u32;
    let height = (pixels / width as f64).round().max(1.0) as u32;
    if width < MIN_WIDTH || height < MIN_HEIGHT {
        return Err(err("frame would be smaller than 64x48"));
    }
    if width > MAX_SIDE || height > MAX_SIDE {
        return Err(err("frame would exceed 8192 px per side"));
    }
    let achieved = Raster::encoded_len(width, height) as f64;
    if (achieved - target_bytes).abs() / target_bytes > SIZE_TOLERANCE {
        return Err(err("achieved size off target"));
    }
    Ok((width, height))
}

pub fn to_pixels(b: &NormBox, width: u32, height: u32) -> Rect {
    let x = ((b.x * width as f64).floor() as u32).min(width - 1);
    let y = ((b.y * height as f64).floor() as u32).min(height - 1);
    let w = ((b.w * width as f64).round() as u32).clamp(1, width - x);
    let h = ((b.h * height as f64).round() as u32).clamp(1, height - y);
    Rect::new(x, y, w, h)
}

fn colour_of(label: &str, seed: u64) -> [u8; 3] {
    let h = sub_seed(seed, label);
    [
        64 + (h & 0x7f) as u8,
        64 + ((h >> 8) & 0x7f) as u8,
        64 + ((h >> 16) & 0x7f) as u8,
    ]
}

pub struct CameraDriver {
    schedule: Schedule,
    rate: f64,
    end_ms: u64,
    width: u32,
    height: u32,
    seed: u64,
    events: Vec<ScenarioEvent>,
}

impl CameraDriver {
    pub fn new(config: &SessionConfig, scenario: &ScenarioScript) -> Result<Self, FrameSizeError> {
        let per_s =
            config.stream(StreamId::ImageFrame).target_kb_per_s * config.rate_unit.bytes_per_unit();
        let (width, height) = frame_dims_for(per_s / config.image.rate)?;
        let events = scenario
            .events
            .iter()
            .filter(|e| {
                matches!(
                    e.kind,
                    EventKind::Face { .. }
                        | EventKind::SceneText { .. }
                        | EventKind::SceneObject { .. }
                )
            })
            .cloned()
            .collect();
        Ok(CameraDriver {
            schedule: Schedule::new(config.image.rate),
            rate: config.image.rate,
            end_ms: scenario.duration_ms,
            width,
            height,
            seed: scenario.seed,
            events,
        })
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    /// Ground truth for the frame captured at `t_ms`.
    fn truth_at(&self, t_ms: u64) -> FrameTruth {
        let mut truth = FrameTruth::default();
        for e in self.events.iter().filter(|e| e.active_at(t_ms)) {
            match &e.kind {
                EventKind::Face {
                    person_id,
                    signature,
                    bbox,
                    ..
                } => truth.faces.push(FaceTruth {
                    person_id: person_id.clone(),
                    signature: signature.clone().unwrap_or_else(|| person_id.clone()),
                    bbox: to_pixels(bbox, self.width, self.height),
                }),
                EventKind::SceneText { value, bbox, .. } => truth
                    .texts
                    .push((value.clone(), to_pixels(bbox, self.width, self.height))),
                EventKind::SceneObject { label, bbox, .. } => truth
                    .objects
                    .push((label.clone(), to_pixels(bbox, self.width, self.height))),
                _ => {}
            }
        }
        truth
    }

    fn render(&self, k: u64, truth: &FrameTruth) -> Raster {
        // Slowly drifting background.
        let shade = (k % 64) as u8;
        let mut img = Raster::filled(self.width, self.height, [40 + shade, 48 + shade / 2, 60]);
        // Frame index as a row of bit cells, so no two frames are identical.
        for bit in 0..32u32 {
            let on = (k >> bit) & 1 == 1;
            let x = bit * STAMP_CELL_PX;
            let rgb = if on { [250, 250, 250] } else { [5, 5, 5] };
            img.fill_rect(
                Rect::new(x, self.height - STAMP_CELL_PX, STAMP_CELL_PX, STAMP_CELL_PX),
                rgb,
            );
        }
        for (label, r) in &truth.objects {
            let c = colour_of(label, self.seed);
            img.fill_rect(*r, [c[0] / 2, c[1] / 2, c[2] / 2]);
            if r.w > 4 && r.h > 4 {
                img.fill_rect(Rect::new(r.x + 2, r.y + 2, r.w - 4, r.h - 4), c);
            }
        }
        for (value, r) in &truth.texts {
            img.fill_rect(*r, [245, 245, 240]);
            let bars = value.chars().count().max(1) as u32;
            let pitch = (r.w / (bars + 1)).max(1);
            for i in 0..bars {
                let bx = r.x + pitch / 2 + i * pitch;
                img.fill_rect(
                    Rect::new(bx, r.y + r.h / 4, (pitch / 2).max(1), (r.h / 2).max(1)),
                    [10, 10, 10],
                );
            }
        }
        for face in &truth.faces {
            let tone = [224, 172, 105];
            let ink = colour_of(&face.signature, self.seed);
            let r = img.clip(face.bbox);
            for y in r.y..r.bottom() {
                for x in r.x..r.right() {
                    let cell = ((x - r.x) / FACE_CELL_PX + (y - r.y) / FACE_CELL_PX) % 2;
                    img.set(x, y, if cell == 0 { tone } else { ink });
                }
            }
        }
        img
    }
}

impl SensorDriver for CameraDriver {
    fn streams(&self) -> &[StreamId] {
        &[StreamId::ImageFrame]
    }

    fn nominal_rates(&self) -> Vec<(StreamId, f64)> {
        vec![(StreamId::ImageFrame, self.rate)]
    }

    fn next_batch(&mut self, now_ms: u64) -> Vec<Capture> {
        let mut out = Vec::new();
        while let Some((k, t)) = self.schedule.pop_due(now_ms, self.end_ms) {
            let truth = self.truth_at(t);
            let pixels = self.render(k, &truth);
            let encoded = pixels.encode_ppm();
            let payload = Payload::ImageFrame(ImageFrame {
                media: MediaRef::for_content(&encoded, FRAME_EXT),
                width_px: self.width,
                height_px: self.height,
                blurred_regions: Vec::new(),
            });
            out.push(Capture {
                envelope: SampleEnvelope::new(t, k, payload),
                sidecar: Some(Sidecar::Frame(RawFrame { pixels, truth })),
            });
        }
        out
    }
}
