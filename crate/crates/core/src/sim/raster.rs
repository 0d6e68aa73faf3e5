//! Minimal RGB raster with binary PPM encoding.

use crate::model::Rect;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub width: u32,
    pub height: u32,
    /// Row-major RGB triplets.
    pub data: Vec<u8>,
}

impl Raster {
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let mut data = Vec::with_capacity((width * height * 3) as usize);
        for _ in 0..width * height {
            data.extend_from_slice(&rgb);
        }
        Raster {
            width,
            height,
            data,
        }
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        ((y * self.width + x) * 3) as usize
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let o = self.offset(x, y);
        [self.data[o], self.data[o + 1], self.data[o + 2]]
    }

    pub fn set(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let o = self.offset(x, y);
        self.data[o..o + 3].copy_from_slice(&rgb);
    }

    /// Clips `r` to the raster bounds.
    pub fn clip(&self, r: Rect) -> Rect {
        let x = r.x.min(self.width);
        let y = r.y.min(self.height);
        Rect {
            x,
            y,
            w: r.w.min(self.width - x),
            h: r.h.min(self.height - y),
        }
    }

    pub fn fill_rect(&mut self, r: Rect, rgb: [u8; 3]) {
        let r = self.clip(r);
        for y in r.y..r.bottom() {
            for x in r.x..r.right() {
                self.set(x, y, rgb);
            }
        }
    }

    /// Binary PPM (P6) header for the given size.
    pub fn ppm_header(width: u32, height: u32) -> String {
        format!("P6\n{width} {height}\n255\n")
    }

    pub fn encoded_len(width: u32, height: u32) -> usize {
        Self::ppm_header(width, height).len() + (width * height * 3) as usize
    }

    pub fn encode_ppm(&self) -> Vec<u8> {
        let header = Self::ppm_header(self.width, self.height);
        let mut out = Vec::with_capacity(header.len() + self.data.len());
        out.extend_from_slice(header.as_bytes());
        out.extend_from_slice(&self.data);
        out
    }

    pub fn decode_ppm(bytes: &[u8]) -> Option<Raster> {
        // "P6\n<w> <h>\n255\n" as written by encode_ppm.
        let mut fields = Vec::new();
        let mut pos = 0;
        while fields.len() < 4 {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return None;
            }
            fields.push(std::str::from_utf8(&bytes[start..pos]).ok()?.to_string());
        }
        pos += 1;
        if fields[0] != "P6" || fields[3] != "255" {
            return None;
        }
        let width: u32 = fields[1].parse().ok()?;
        let height: u32 = fields[2].parse().ok()?;
        let data = bytes.get(pos..)?.to_vec();
        if data.len() != (width * height * 3) as usize {
            return None;
        }
        Some(Raster {
            width,
            height,
            data,
        })
    }
}
