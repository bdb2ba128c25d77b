#![allow(dead_code)]

use gelfand_core::spaces::{raster_from_shape, sample_raster};
use gelfand_core::{Complex64, FiniteSpace, SampleStrategy, Shape};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Circle samples of an annulus or disk raster, concatenated in the given
/// order, with the index range of each part.
pub fn sampled(shape: &Shape, parts: &[SampleStrategy]) -> (FiniteSpace, Vec<std::ops::Range<usize>>) {
    let raster = raster_from_shape(shape, 16.0).unwrap();
    let mut space: Option<FiniteSpace> = None;
    let mut ranges = Vec::new();
    for part in parts {
        let s = sample_raster(&raster, part).unwrap();
        let start = space.as_ref().map_or(0, FiniteSpace::len);
        ranges.push(start..start + s.len());
        space = Some(match space {
            None => s,
            Some(acc) => acc.concat(&s),
        });
    }
    (space.unwrap(), ranges)
}

pub fn circle(radius: f64, n: usize) -> SampleStrategy {
    SampleStrategy::Circle { center: c(0.0, 0.0), radius, n }
}
