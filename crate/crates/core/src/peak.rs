//! Peak extraction with optional three-point quadratic refinement.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Index of the largest magnitude.
    pub index: usize,
    /// Refined (fractional) index; equals `index` without refinement.
    pub location: f64,
    pub magnitude: f64,
    pub phase: f64,
}

/// Vertex offset of the parabola through `(-1, y0), (0, y1), (1, y2)`.
/// Lies in `[-0.5, 0.5]` whenever `y1` is the largest of the three.
pub fn parabolic_offset(y0: f64, y1: f64, y2: f64) -> f64 {
    let den = y0 - 2.0 * y1 + y2;
    if den == 0.0 {
        0.0
    } else {
        (0.5 * (y0 - y2) / den).clamp(-0.5, 0.5)
    }
}

/// Global maximum of a real sequence, optionally refined. Ties resolve to
/// the first index.
pub fn find_peak_real(values: &[f64], refine: bool) -> Result<(usize, f64)> {
    let (index, &max) = values
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, &f64)>, (i, v)| match best {
            Some((_, b)) if *v <= *b => best,
            _ => Some((i, v)),
        })
        .ok_or(Error::NoPeak)?;
    if !(max > 0.0) {
        return Err(Error::NoPeak);
    }
    let mut location = index as f64;
    if refine && index > 0 && index + 1 < values.len() {
        location += parabolic_offset(values[index - 1], max, values[index + 1]);
    }
    Ok((index, location))
}

/// Global magnitude peak of a complex spectrum.
pub fn find_peak(spectrum: &[Complex64], refine: bool) -> Result<Peak> {
    let mags: Vec<f64> = spectrum.iter().map(|z| z.norm()).collect();
    let (index, location) = find_peak_real(&mags, refine)?;
    Ok(Peak {
        index,
        location,
        magnitude: mags[index],
        phase: spectrum[index].arg(),
    })
}
