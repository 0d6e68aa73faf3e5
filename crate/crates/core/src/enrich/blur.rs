//! Consent-aware face redaction. Runs before a frame is persisted.

use crate::model::{BlurMode, ConsentRegistry, ImageFrame, MediaRef, Rect};
use crate::sim::{Raster, RawFrame, FRAME_EXT};

use super::clients::{DetectError, FaceDetection};

/// Side of one mosaic cell in pixels.
pub const MOSAIC_CELL_PX: u32 = 16;
const FILL_RGB: [u8; 3] = [0, 0, 0];

/// Replaces each `cell`-sized tile of `rect` (anchored at its top-left
/// corner, clipped to the rectangle) by the tile's mean colour.
pub fn mosaic(img: &mut Raster, rect: Rect, cell: u32) {
    let r = img.clip(rect);
    let cell = cell.max(1);
    let mut cy = r.y;
    while cy < r.bottom() {
        let ch = cell.min(r.bottom() - cy);
        let mut cx = r.x;
        while cx < r.right() {
            let cw = cell.min(r.right() - cx);
            let tile = Rect::new(cx, cy, cw, ch);
            let mut sum = [0u64; 3];
            for y in tile.y..tile.bottom() {
                for x in tile.x..tile.right() {
                    let p = img.get(x, y);
                    for c in 0..3 {
                        sum[c] += p[c] as u64;
                    }
                }
            }
            let n = (cw * ch) as u64;
            let mean = sum.map(|s| ((s + n / 2) / n) as u8);
            img.fill_rect(tile, mean);
            cx += cw;
        }
        cy += ch;
    }
}

fn redact(img: &mut Raster, rect: Rect, mode: BlurMode) {
    match mode {
        BlurMode::Pixelate => mosaic(img, rect, MOSAIC_CELL_PX),
        BlurMode::Fill => img.fill_rect(rect, FILL_RGB),
    }
}

/// Whether a detected face may be stored unredacted for `wearer`.
pub fn is_consented(face: &FaceDetection, registry: &ConsentRegistry, wearer: &str) -> bool {
    let person = face
        .signature
        .as_deref()
        .and_then(|s| registry.by_signature(s))
        .map(|r| r.person_id.as_str());
    registry.permits(person, wearer)
}

#[derive(Debug, Clone)]
pub enum BlurOutcome {
    Redacted {
        payload: ImageFrame,
        encoded: Vec<u8>,
    },
    /// Detection failed; the frame must not be stored or served.
    Quarantined { reason: String },
}

/// Redacts every non-consented detected face of `raw`.
///
/// When detection failed, the faces it did report are still redacted in
/// the working copy, but the frame is quarantined.
pub fn blur_frame(
    frame: &ImageFrame,
    raw: &RawFrame,
    detections: Result<Vec<FaceDetection>, DetectError>,
    registry: &ConsentRegistry,
    wearer: &str,
    mode: BlurMode,
) -> BlurOutcome {
    let (faces, failure) = match detections {
        Ok(f) => (f, None),
        Err(e) => (e.partial, Some(e.error)),
    };
    let mut pixels = raw.pixels.clone();
    let mut regions = Vec::new();
    for face in &faces {
        if failure.is_none() && is_consented(face, registry, wearer) {
            continue;
        }
        let r = pixels.clip(face.bbox);
        if r.w == 0 || r.h == 0 {
            continue;
        }
        redact(&mut pixels, r, mode);
        regions.push(r);
    }
    if let Some(err) = failure {
        return BlurOutcome::Quarantined {
            reason: err.to_string(),
        };
    }
    let encoded = pixels.encode_ppm();
    let payload = ImageFrame {
        media: MediaRef::for_content(&encoded, FRAME_EXT),
        width_px: frame.width_px,
        height_px: frame.height_px,
        blurred_regions: regions,
    };
    BlurOutcome::Redacted { payload, encoded }
}

/// True if every mosaic tile of `rect` is a single colour.
pub fn is_pixelated(img: &Raster, rect: Rect, cell: u32) -> bool {
    let r = img.clip(rect);
    let mut cy = r.y;
    while cy < r.bottom() {
        let ch = cell.min(r.bottom() - cy);
        let mut cx = r.x;
        while cx < r.right() {
            let cw = cell.min(r.right() - cx);
            let first = img.get(cx, cy);
            for y in cy..cy + ch {
                for x in cx..cx + cw {
                    if img.get(x, y) != first {
                        return false;
                    }
                }
            }
            cx += cw;
        }
        cy += ch;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enrich::clients::ClientError;
    use crate::model::{ConsentRecord, ConsentScope};
    use crate::sim::FrameTruth;

    fn checker(w: u32, h: u32) -> Raster {
        let mut r = Raster::filled(w, h, [0, 0, 0]);
        for y in 0..h {
            for x in 0..w {
                if (x + y) % 2 == 0 {
                    r.set(x, y, [255, 255, 255]);
                }
            }
        }
        r
    }

    fn frame(w: u32, h: u32) -> (ImageFrame, RawFrame) {
        let pixels = checker(w, h);
        let payload = ImageFrame {
            media: MediaRef::for_content(&pixels.encode_ppm(), FRAME_EXT),
            width_px: w,
            height_px: h,
            blurred_regions: vec![],
        };
        (
            payload,
            RawFrame {
                pixels,
                truth: FrameTruth::default(),
            },
        )
    }

    fn face(x: u32, sig: &str) -> FaceDetection {
        FaceDetection {
            bbox: Rect::new(x, 0, 20, 20),
            signature: Some(sig.into()),
        }
    }

    #[test]
    fn mosaic_makes_uniform_tiles() {
        let mut r = checker(40, 40);
        let rect = Rect::new(3, 5, 30, 21);
        assert!(!is_pixelated(&r, rect, 16));
        mosaic(&mut r, rect, 16);
        assert!(is_pixelated(&r, rect, 16));
        assert_eq!(r.get(0, 0), [255, 255, 255]);
    }

    #[test]
    fn only_unconsented_face_is_blurred() {
        let (p, raw) = frame(64, 32);
        let mut reg = ConsentRegistry::default();
        reg.insert(ConsentRecord::new("a", "a", ConsentScope::Global))
            .unwrap();
        let out = blur_frame(
            &p,
            &raw,
            Ok(vec![face(0, "a"), face(30, "b")]),
            &reg,
            "w",
            BlurMode::Pixelate,
        );
        let BlurOutcome::Redacted { payload, encoded } = out else {
            panic!()
        };
        assert_eq!(payload.blurred_regions, vec![Rect::new(30, 0, 20, 20)]);
        let img = Raster::decode_ppm(&encoded).unwrap();
        assert!(is_pixelated(&img, Rect::new(30, 0, 20, 20), MOSAIC_CELL_PX));
        assert!(!is_pixelated(&img, Rect::new(0, 0, 20, 20), MOSAIC_CELL_PX));
    }

    #[test]
    fn no_faces_is_identity() {
        let (p, raw) = frame(32, 32);
        let out = blur_frame(
            &p,
            &raw,
            Ok(vec![]),
            &ConsentRegistry::default(),
            "w",
            BlurMode::Pixelate,
        );
        let BlurOutcome::Redacted { payload, .. } = out else {
            panic!()
        };
        assert_eq!(payload, p);
    }

    #[test]
    fn detector_failure_quarantines() {
        let (p, raw) = frame(32, 32);
        let err = DetectError {
            error: ClientError::Failed("face-detect", "boom".into()),
            partial: vec![face(0, "a")],
        };
        let out = blur_frame(
            &p,
            &raw,
            Err(err),
            &ConsentRegistry::default(),
            "w",
            BlurMode::Pixelate,
        );
        assert!(matches!(out, BlurOutcome::Quarantined { .. }));
    }
}
