use super::{PageImage, RenderError};

/// 8-bit RGB PNG with fixed encoder settings, so equal pixels give equal bytes.
pub fn encode_png(image: &PageImage) -> Result<Vec<u8>, RenderError> {
    let expected = image.width as usize * image.height as usize * 3;
    if image.width == 0 || image.height == 0 || image.pixels.len() != expected {
        return Err(RenderError::Png(format!(
            "{}x{} image carries {} bytes, expected {expected}",
            image.width,
            image.height,
            image.pixels.len()
        )));
    }
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, image.width, image.height);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        encoder.set_compression(png::Compression::Fast);
        let mut writer = encoder
            .write_header()
            .map_err(|e| RenderError::Png(e.to_string()))?;
        writer
            .write_image_data(&image.pixels)
            .map_err(|e| RenderError::Png(e.to_string()))?;
        writer.finish().map_err(|e| RenderError::Png(e.to_string()))?;
    }
    Ok(out)
}

/// Decodes an 8-bit RGB PNG into `(width, height, pixels)`.
pub fn decode_png(bytes: &[u8]) -> Result<(u32, u32, Vec<u8>), RenderError> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder
        .read_info()
        .map_err(|e| RenderError::Png(e.to_string()))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| RenderError::Png("image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| RenderError::Png(e.to_string()))?;
    if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
        return Err(RenderError::Png(format!(
            "expected 8-bit RGB, found {:?} {:?}",
            info.color_type, info.bit_depth
        )));
    }
    buf.truncate(info.buffer_size());
    Ok((info.width, info.height, buf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::PageLayout;

    fn layout() -> PageLayout {
        PageLayout {
            page_index: 0,
            line_range: 0..0,
            rows: 0,
            cols: 1,
            wrap_events: 0,
            clipped_lines: 0,
        }
    }

    #[test]
    fn round_trip_and_determinism() {
        let mut img = PageImage::filled(7, 5, [255, 255, 255], layout());
        for (i, b) in img.pixels.iter_mut().enumerate() {
            *b = (i * 31 % 256) as u8;
        }
        let a = encode_png(&img).unwrap();
        let b = encode_png(&img).unwrap();
        assert_eq!(a, b);
        let (w, h, px) = decode_png(&a).unwrap();
        assert_eq!((w, h), (7, 5));
        assert_eq!(px, img.pixels);
    }

    #[test]
    fn rejects_inconsistent_buffer() {
        let mut img = PageImage::filled(2, 2, [0, 0, 0], layout());
        img.pixels.pop();
        assert!(encode_png(&img).is_err());
    }
}
