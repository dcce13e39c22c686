//! Grayscale images in plain-text PGM (P2), values normalized to `[0, 1]`.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    height: usize,
    width: usize,
    /// Row-major.
    pixels: Vec<f64>,
}

/// 11×11 stand-in for a musical note: a stem with a flag and a filled head.
const NOTE: [&str; 11] = [
    "...........",
    "......#....",
    "......##...",
    "......#.#..",
    "......#..#.",
    "......#....",
    "......#....",
    "...####....",
    "..#####....",
    "..#####....",
    "...###.....",
];

impl ImageGrid {
    pub fn new(height: usize, width: usize, pixels: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(HarnessError::Image("empty image".into()));
        }
        if pixels.len() != height * width {
            return Err(HarnessError::Image(format!(
                "{} pixels for a {height}x{width} image",
                pixels.len()
            )));
        }
        let mut clamped = 0;
        let pixels = pixels
            .into_iter()
            .map(|p| {
                if (0.0..=1.0).contains(&p) {
                    p
                } else {
                    clamped += 1;
                    if p.is_nan() {
                        0.0
                    } else {
                        p.clamp(0.0, 1.0)
                    }
                }
            })
            .collect();
        if clamped > 0 {
            log::warn!("clamped {clamped} out-of-range pixels to [0, 1]");
        }
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    /// The builtin 11×11 note pattern (1 = ink).
    pub fn builtin_note() -> Self {
        let pixels = NOTE
            .iter()
            .flat_map(|row| row.chars().map(|c| if c == '#' { 1.0 } else { 0.0 }))
            .collect();
        Self {
            height: 11,
            width: 11,
            pixels,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    /// Row-major flatten.
    pub fn to_signal(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.pixels)
    }

    /// Image of a recovered signal. The global sign is chosen to maximize
    /// agreement with `reference` when given, else to make the sum nonnegative.
    pub fn from_recovered(
        height: usize,
        width: usize,
        u: &DVector<f64>,
        reference: Option<&DVector<f64>>,
    ) -> Result<Self> {
        let flip = match reference {
            Some(x) => u.dot(x) < 0.0,
            None => u.sum() < 0.0,
        };
        let s = if flip { -1.0 } else { 1.0 };
        let pixels = u.iter().map(|v| (s * v).clamp(0.0, 1.0)).collect();
        Self::new(height, width, pixels)
    }

    /// Writes P2 with maxval 255 when every pixel is a multiple of 1/255,
    /// otherwise 65535 (values are then quantized).
    pub fn to_pgm(&self) -> String {
        let on_grid = |max: f64| {
            self.pixels
                .iter()
                .all(|p| ((p * max).round() - p * max).abs() < 1e-9)
        };
        let max = if on_grid(255.0) { 255.0 } else { 65535.0 };
        let mut out = format!("P2\n{} {}\n{}\n", self.width, self.height, max as u32);
        for row in self.pixels.chunks(self.width) {
            let line: Vec<String> = row
                .iter()
                .map(|p| ((p * max).round() as u32).to_string())
                .collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn parse_pgm(text: &str) -> Result<Self> {
        let bad = |msg: &str| HarnessError::Image(msg.to_string());
        let mut tokens = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(str::split_whitespace);
        if tokens.next() != Some("P2") {
            return Err(bad("not a plain PGM (P2) file"));
        }
        let mut header = || -> Result<usize> {
            tokens
                .next()
                .ok_or_else(|| bad("truncated header"))?
                .parse()
                .map_err(|_| bad("malformed header"))
        };
        let (width, height, max) = (header()?, header()?, header()?);
        if max == 0 || max > 65535 {
            return Err(bad("maxval must be in 1..=65535"));
        }
        let pixels: Vec<f64> = tokens
            .map(|t| {
                t.parse::<f64>()
                    .map(|v| v / max as f64)
                    .map_err(|_| bad("malformed pixel"))
            })
            .collect::<Result<_>>()?;
        Self::new(height, width, pixels)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse_pgm(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_pgm())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn note_has_ink_and_background() {
        let g = ImageGrid::builtin_note();
        assert_eq!(g.to_signal().len(), 121);
        let ink = g.pixels().iter().filter(|&&p| p == 1.0).count();
        assert!(ink > 10 && ink < 111);
    }

    #[test]
    fn pgm_round_trip() {
        let g = ImageGrid::builtin_note();
        assert_eq!(ImageGrid::parse_pgm(&g.to_pgm()).unwrap(), g);
        let fine = ImageGrid::new(1, 3, vec![0.0, 1.0 / 65535.0, 0.5]).unwrap();
        let back = ImageGrid::parse_pgm(&fine.to_pgm()).unwrap();
        assert_eq!(ImageGrid::parse_pgm(&back.to_pgm()).unwrap(), back);
        assert!(back
            .pixels()
            .iter()
            .zip(fine.pixels())
            .all(|(a, b)| (a - b).abs() <= 1.0 / 65535.0));
    }

    #[test]
    fn zero_image_is_zero_signal() {
        let g = ImageGrid::new(2, 2, vec![0.0; 4]).unwrap();
        assert_eq!(g.to_signal(), DVector::zeros(4));
    }

    #[test]
    fn parse_errors_and_clamping() {
        assert!(ImageGrid::parse_pgm("P5\n1 1\n255\n0").is_err());
        assert!(ImageGrid::parse_pgm("P2\n2 2\n255\n0 0 0").is_err());
        assert!(ImageGrid::parse_pgm("P2\n# comment\n1 1\n255\nx").is_err());
        let g = ImageGrid::new(1, 2, vec![-0.5, 1.5]).unwrap();
        assert_eq!(g.pixels(), &[0.0, 1.0]);
    }

    #[test]
    fn recovered_image_fixes_sign() {
        let u = DVector::from_vec(vec![-1.0, -0.5]);
        let g = ImageGrid::from_recovered(1, 2, &u, None).unwrap();
        assert_eq!(g.pixels(), &[1.0, 0.5]);
        let x = DVector::from_vec(vec![-1.0, 0.0]);
        let g = ImageGrid::from_recovered(1, 2, &u, Some(&x)).unwrap();
        assert_eq!(g.pixels(), &[0.0, 0.0]);
    }
}
