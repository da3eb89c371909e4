/// Offsets used for synthetic bold: the glyph is stamped at each of these.
pub const BOLD_OFFSETS: [(u32, u32); 4] = [(0, 0), (1, 0), (0, 1), (1, 1)];

/// 8-bit coverage bitmap of one glyph. `left`/`top` place the bitmap's
/// top-left pixel relative to the glyph's pen position on the baseline.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GlyphMask {
    pub left: i32,
    pub top: i32,
    pub width: u32,
    pub height: u32,
    pub coverage: Vec<u8>,
}

impl GlyphMask {
    pub fn new(left: i32, top: i32, width: u32, height: u32) -> Self {
        Self {
            left,
            top,
            width,
            height,
            coverage: vec![0; (width * height) as usize],
        }
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.coverage[(y * self.width + x) as usize]
    }

    pub fn ink_pixels(&self) -> usize {
        self.coverage.iter().filter(|&&c| c > 0).count()
    }
}

/// Pixelwise maximum of the mask stamped at every offset. The result grows
/// by the largest offset on each axis; its origin is unchanged.
pub fn bold_overdraw(mask: &GlyphMask, offsets: &[(u32, u32)]) -> GlyphMask {
    let dx = offsets.iter().map(|o| o.0).max().unwrap_or(0);
    let dy = offsets.iter().map(|o| o.1).max().unwrap_or(0);
    let mut out = GlyphMask::new(mask.left, mask.top, mask.width + dx, mask.height + dy);
    for &(ox, oy) in offsets {
        for y in 0..mask.height {
            let src = &mask.coverage[(y * mask.width) as usize..((y + 1) * mask.width) as usize];
            let row = ((y + oy) * out.width + ox) as usize;
            for (dst, &c) in out.coverage[row..row + mask.width as usize]
                .iter_mut()
                .zip(src)
            {
                *dst = (*dst).max(c);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blank_stays_blank() {
        let mask = GlyphMask::new(0, -10, 6, 10);
        let bold = bold_overdraw(&mask, &BOLD_OFFSETS);
        assert_eq!(bold.ink_pixels(), 0);
    }

    #[test]
    fn single_pixel_becomes_two_by_two() {
        let mut mask = GlyphMask::new(0, 0, 5, 5);
        mask.coverage[2 * 5 + 3] = 200;
        let bold = bold_overdraw(&mask, &BOLD_OFFSETS);
        let inked: Vec<(u32, u32)> = (0..bold.height)
            .flat_map(|y| (0..bold.width).map(move |x| (x, y)))
            .filter(|&(x, y)| bold.get(x, y) > 0)
            .collect();
        assert_eq!(inked, vec![(3, 2), (4, 2), (3, 3), (4, 3)]);
        assert!(inked.iter().all(|&(x, y)| bold.get(x, y) == 200));
    }

    #[test]
    fn bold_is_superset_of_plain() {
        let mut mask = GlyphMask::new(0, 0, 4, 3);
        for (i, c) in mask.coverage.iter_mut().enumerate() {
            *c = (i * 37 % 255) as u8;
        }
        let bold = bold_overdraw(&mask, &BOLD_OFFSETS);
        for y in 0..mask.height {
            for x in 0..mask.width {
                assert!(bold.get(x, y) >= mask.get(x, y));
            }
        }
    }
}
