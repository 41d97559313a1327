//! Binary greyscale images (P5).

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

impl Pgm {
    /// A white canvas.
    pub fn blank(width: u32, height: u32) -> Self {
        Self { width, height, pixels: vec![255; width as usize * height as usize] }
    }

    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        self.pixels[y as usize * self.width as usize + x as usize] = value;
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    /// Places `other` to the right of `self`, separated by a grey bar.
    pub fn beside(&self, other: &Pgm, gap: u32) -> Pgm {
        let height = self.height.max(other.height);
        let mut out = Pgm::blank(self.width + gap + other.width, height);
        for y in 0..height {
            for x in 0..gap {
                out.set(self.width + x, y, 128);
            }
        }
        for (img, x0) in [(self, 0), (other, self.width + gap)] {
            for y in 0..img.height {
                for x in 0..img.width {
                    out.set(x0 + x, y, img.get(x, y));
                }
            }
        }
        out
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
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
                return Err(invalid("truncated PGM header"));
            }
            fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
        }
        if fields[0] != "P5" || fields[3] != "255" {
            return Err(invalid("expected an 8-bit P5 image"));
        }
        let num = |s: &str| s.parse::<u32>().map_err(|e| invalid(format!("bad PGM size: {e}")));
        let (width, height) = (num(&fields[1])?, num(&fields[2])?);
        let pixels = bytes.get(pos + 1..).unwrap_or_default().to_vec();
        if pixels.len() != width as usize * height as usize {
            return Err(invalid("PGM pixel count does not match its size"));
        }
        Ok(Self { width, height, pixels })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut img = Pgm::blank(3, 2);
        img.set(2, 1, 0);
        let bytes = img.to_bytes();
        assert!(bytes.starts_with(b"P5\n3 2\n255\n"));
        assert_eq!(Pgm::from_bytes(&bytes).unwrap(), img);
        let wide = img.beside(&img, 1);
        assert_eq!((wide.width, wide.height), (7, 2));
        assert_eq!(wide.get(3, 0), 128);
        assert_eq!(wide.get(6, 1), 0);
    }
}
