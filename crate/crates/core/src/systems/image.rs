//! Embedding of a planar system into binary disc images (D = 12,500).
//!
//! A point `x` becomes the image of the disc of radius 1/2 around it on the
//! pixel mesh of `[-1.5, 3.5] x [-1.5, 2.5]` with spacing 0.04. Images are
//! compared with the Hamming distance scaled by `0.04^2 / 2`, which makes it
//! locally comparable to the planar distance.

use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{AtlasError, Result};
use crate::netspace::StateSpace;
use crate::rng::SimRng;

pub const SPACING: f64 = 0.04;
pub const NX: usize = 125;
pub const NY: usize = 100;
pub const ORIGIN: [f64; 2] = [-1.5, -1.5];
pub const RADIUS: f64 = 0.5;
pub const N_PIXELS: usize = NX * NY;
pub const DISTANCE_SCALE: f64 = SPACING * SPACING / 2.0;

const N_WORDS: usize = N_PIXELS.div_ceil(64);

/// Packed binary image, pixel `j = iy * NX + ix`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitImage {
    words: Box<[u64]>,
}

impl std::fmt::Debug for BitImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitImage({} pixels set)", self.count_ones())
    }
}

impl BitImage {
    pub fn empty() -> Self {
        BitImage {
            words: vec![0; N_WORDS].into_boxed_slice(),
        }
    }

    pub fn set(&mut self, j: usize) {
        self.words[j / 64] |= 1 << (j % 64);
    }

    pub fn get(&self, j: usize) -> bool {
        self.words[j / 64] >> (j % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn hamming(&self, other: &BitImage) -> u32 {
        self.words
            .iter()
            .zip(other.words.iter())
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let t = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(w * 64 + t)
                }
            })
        })
    }

    pub fn to_dense(&self) -> Vec<f64> {
        (0..N_PIXELS)
            .map(|j| if self.get(j) { 1.0 } else { 0.0 })
            .collect()
    }
}

impl Serialize for BitImage {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(N_PIXELS))?;
        for j in 0..N_PIXELS {
            seq.serialize_element(&u8::from(self.get(j)))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for BitImage {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct Pixels;
        impl<'de> Visitor<'de> for Pixels {
            type Value = BitImage;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                write!(f, "a sequence of {N_PIXELS} pixel values")
            }
            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<BitImage, A::Error> {
                let mut img = BitImage::empty();
                let mut j = 0;
                while let Some(v) = seq.next_element::<f64>()? {
                    if j >= N_PIXELS {
                        return Err(de::Error::invalid_length(j + 1, &self));
                    }
                    if v != 0.0 {
                        img.set(j);
                    }
                    j += 1;
                }
                if j != N_PIXELS {
                    return Err(de::Error::invalid_length(j, &self));
                }
                Ok(img)
            }
        }
        deserializer.deserialize_seq(Pixels)
    }
}

pub fn pixel_center(j: usize) -> [f64; 2] {
    let ix = j % NX;
    let iy = j / NX;
    [
        ORIGIN[0] + ix as f64 * SPACING,
        ORIGIN[1] + iy as f64 * SPACING,
    ]
}

/// Pixel `j` is set iff its center lies strictly within 1/2 of `x`.
pub fn embed(x: &[f64]) -> BitImage {
    let mut img = BitImage::empty();
    let range = |c: f64, o: f64, n: usize| {
        let lo = (((c - RADIUS - o) / SPACING).floor() - 1.0).max(0.0) as usize;
        let hi = (((c + RADIUS - o) / SPACING).ceil() + 1.0).clamp(0.0, (n - 1) as f64) as usize;
        (lo, hi)
    };
    let (x0, x1) = range(x[0], ORIGIN[0], NX);
    let (y0, y1) = range(x[1], ORIGIN[1], NY);
    if x[0] + RADIUS < ORIGIN[0] || x[1] + RADIUS < ORIGIN[1] {
        return img;
    }
    for iy in y0..=y1 {
        for ix in x0..=x1 {
            let j = iy * NX + ix;
            let z = pixel_center(j);
            let dx = z[0] - x[0];
            let dy = z[1] - x[1];
            if dx * dx + dy * dy < RADIUS * RADIUS {
                img.set(j);
            }
        }
    }
    img
}

/// Mean position of the set pixels.
pub fn approx_invert(v: &BitImage) -> Result<[f64; 2]> {
    let mut sum = [0.0, 0.0];
    let mut n = 0usize;
    for j in v.ones() {
        let z = pixel_center(j);
        sum[0] += z[0];
        sum[1] += z[1];
        n += 1;
    }
    if n == 0 {
        return Err(AtlasError::EmptyImage);
    }
    Ok([sum[0] / n as f64, sum[1] / n as f64])
}

pub fn image_distance(a: &BitImage, b: &BitImage) -> f64 {
    a.hamming(b) as f64 * DISTANCE_SCALE
}

/// A planar state space seen through the image embedding.
pub struct ImageSpace<S> {
    pub base: S,
    initial: Vec<BitImage>,
}

impl<S: StateSpace<Point = Vec<f64>>> ImageSpace<S> {
    pub fn new(base: S) -> Self {
        let initial = base.initial_points().iter().map(|p| embed(p)).collect();
        ImageSpace { base, initial }
    }
}

impl<S: StateSpace<Point = Vec<f64>>> StateSpace for ImageSpace<S> {
    type Point = BitImage;

    fn distance(&self, a: &BitImage, b: &BitImage) -> f64 {
        image_distance(a, b)
    }

    fn simulate(
        &self,
        start: &BitImage,
        n_paths: usize,
        t0: f64,
        rng: &mut SimRng,
    ) -> Result<Vec<BitImage>> {
        let x = approx_invert(start)?;
        Ok(self
            .base
            .simulate(&x.to_vec(), n_paths, t0, rng)?
            .iter()
            .map(|p| embed(p))
            .collect())
    }

    fn initial_points(&self) -> &[BitImage] {
        &self.initial
    }

    fn micro_dt(&self) -> Option<f64> {
        self.base.micro_dt()
    }
}
