use std::path::Path;

use image::{ImageBuffer, Luma};

use crate::annotation::GrayImage;
use crate::error::{FiberError, Result};
use crate::geometry::RasterMask;

fn image_err(path: &Path) -> impl FnOnce(image::ImageError) -> FiberError + '_ {
    move |source| FiberError::Image {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads any image the decoder understands and converts it to 8-bit gray.
pub fn read_gray_png(path: &Path) -> Result<GrayImage> {
    let img = image::open(path).map_err(image_err(path))?.into_luma8();
    let (w, h) = img.dimensions();
    GrayImage::new(w, h, img.into_raw())
}

pub fn write_gray_png(image: &GrayImage, path: &Path) -> Result<()> {
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> =
        ImageBuffer::from_raw(image.width(), image.height(), image.pixels().to_vec())
            .expect("buffer matches dimensions");
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(image_err(path))
}

/// Non-zero pixels are foreground.
pub fn read_mask_png(path: &Path) -> Result<RasterMask> {
    let img = read_gray_png(path)?;
    RasterMask::from_bits(
        img.width(),
        img.height(),
        img.pixels().iter().map(|&v| v > 0).collect(),
    )
}

/// Foreground is written as 255, background as 0.
pub fn write_mask_png(mask: &RasterMask, path: &Path) -> Result<()> {
    let pixels = mask
        .bits()
        .iter()
        .map(|&b| if b { 255 } else { 0 })
        .collect();
    write_gray_png(&GrayImage::new(mask.width(), mask.height(), pixels)?, path)
}
