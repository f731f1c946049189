//! Digital Butterworth bandpass design and zero-phase (forward-backward)
//! filtering as a cascade of second-order sections.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

/// One second-order section, normalized so that `a0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (self.a[0] + self.a[1] + self.a[2])
    }

    /// Transposed direct form II state for a unit step held forever.
    fn unit_step_state(&self) -> [f64; 2] {
        let g = self.dc_gain();
        [g - self.b[0], self.b[2] - self.a[2] * g]
    }

    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        (self.b[0] + z_inv * self.b[1] + z2 * self.b[2]) / (self.a[0] + z_inv * self.a[1] + z2 * self.a[2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum DesignError {
    #[error("band {low_hz}..{high_hz} Hz invalid for sample rate {sample_rate_hz} Hz")]
    InvalidBand { low_hz: f64, high_hz: f64, sample_rate_hz: f64 },
    #[error("filter order must be at least 1")]
    ZeroOrder,
}

/// A designed bandpass filter: `order` analog prototype poles, so `order`
/// sections and `2 * order` digital poles.
#[derive(Debug, Clone, PartialEq)]
pub struct BandpassFilter {
    pub sections: Vec<Biquad>,
    pub order: usize,
}

fn quadratic_roots(b: Complex64, c: Complex64) -> (Complex64, Complex64) {
    // s^2 + b s + c = 0
    let disc = (b * b - c * 4.0).sqrt();
    ((-b + disc) * 0.5, (-b - disc) * 0.5)
}

fn bilinear(s: Complex64, fs2: f64) -> Complex64 {
    (s + fs2) / (-s + fs2)
}

fn section_from_poles(p1: Complex64, p2: Complex64) -> Biquad {
    // Zeros at z = 1 and z = -1 for every bandpass section.
    let sum = p1 + p2;
    let prod = p1 * p2;
    Biquad { b: [1.0, 0.0, -1.0], a: [1.0, -sum.re, prod.re] }
}

impl BandpassFilter {
    /// Designs a digital Butterworth bandpass via prewarped bilinear transform.
    pub fn design(order: usize, low_hz: f64, high_hz: f64, sample_rate_hz: f64) -> Result<Self, DesignError> {
        if order == 0 {
            return Err(DesignError::ZeroOrder);
        }
        let nyquist = sample_rate_hz / 2.0;
        if !(low_hz > 0.0 && low_hz < high_hz && high_hz < nyquist) {
            return Err(DesignError::InvalidBand { low_hz, high_hz, sample_rate_hz });
        }
        let fs2 = 2.0 * sample_rate_hz;
        let warp = |f: f64| fs2 * libm::tan(PI * f / sample_rate_hz);
        let (w_lo, w_hi) = (warp(low_hz), warp(high_hz));
        let bw = w_hi - w_lo;
        let w0_sq = w_lo * w_hi;

        let mut sections = Vec::with_capacity(order);
        let mut analog_gain = Complex64::new(libm::pow(bw, order as f64), 0.0);
        let mut analog_poles = Vec::with_capacity(2 * order);
        let n = order as f64;
        for k in 0..order {
            let theta = PI * (2.0 * k as f64 + n + 1.0) / (2.0 * n);
            let proto = Complex64::new(libm::cos(theta), libm::sin(theta));
            if proto.im < -1e-12 {
                continue;
            }
            let (s1, s2) = quadratic_roots(-proto * bw, Complex64::new(w0_sq, 0.0));
            if proto.im > 1e-12 {
                analog_poles.extend([s1, s1.conj(), s2, s2.conj()]);
                sections.push(section_from_poles(bilinear(s1, fs2), bilinear(s1.conj(), fs2)));
                sections.push(section_from_poles(bilinear(s2, fs2), bilinear(s2.conj(), fs2)));
            } else {
                analog_poles.extend([s1, s2]);
                sections.push(section_from_poles(bilinear(s1, fs2), bilinear(s2, fs2)));
            }
        }
        // Bilinear gain: order zeros at s = 0, order zeros at infinity.
        analog_gain *= libm::pow(fs2, n);
        for p in &analog_poles {
            analog_gain /= -*p + fs2;
        }
        let gain = analog_gain.re;
        if let Some(first) = sections.first_mut() {
            for b in first.b.iter_mut() {
                *b *= gain;
            }
        }
        Ok(BandpassFilter { sections, order })
    }

    /// Complex frequency response at `freq_hz`.
    pub fn response(&self, freq_hz: f64, sample_rate_hz: f64) -> Complex64 {
        let w = 2.0 * PI * freq_hz / sample_rate_hz;
        let z_inv = Complex64::new(libm::cos(w), -libm::sin(w));
        self.sections.iter().fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z_inv))
    }

    fn steady_state(&self) -> Vec<[f64; 2]> {
        let mut scale = 1.0;
        self.sections
            .iter()
            .map(|s| {
                let zi = s.unit_step_state();
                let out = [zi[0] * scale, zi[1] * scale];
                scale *= s.dc_gain();
                out
            })
            .collect()
    }

    /// Single forward pass starting from `state` scaled by `x[0]`.
    fn run(&self, x: &mut [f64], zi: &[[f64; 2]]) {
        let Some(&x0) = x.first() else { return };
        for (section, unit) in self.sections.iter().zip(zi) {
            let mut z = [unit[0] * x0, unit[1] * x0];
            let Biquad { b, a } = *section;
            for v in x.iter_mut() {
                let input = *v;
                let y = b[0] * input + z[0];
                z[0] = b[1] * input - a[1] * y + z[1];
                z[1] = b[2] * input - a[2] * y;
                *v = y;
            }
        }
    }

    /// Forward-backward filtering with odd-reflection padding of `pad`
    /// samples per side and steady-state initial conditions, trimmed back to
    /// the input length.
    pub fn filtfilt(&self, x: &[f64], pad: usize) -> Vec<f64> {
        let n = x.len();
        if n == 0 {
            return Vec::new();
        }
        let pad = pad.min(n - 1);
        let (first, last) = (x[0], x[n - 1]);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * first - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * last - x[n - 1 - i]));

        let zi = self.steady_state();
        self.run(&mut ext, &zi);
        ext.reverse();
        self.run(&mut ext, &zi);
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Analog Butterworth bandpass magnitude after frequency prewarping; the
    /// bilinear transform maps it exactly onto the digital response.
    fn analytic_gain(order: usize, lo: f64, hi: f64, fs: f64, f: f64) -> f64 {
        let warp = |x: f64| 2.0 * fs * (PI * x / fs).tan();
        let (wl, wh, w) = (warp(lo), warp(hi), warp(f));
        let ratio = (w * w - wl * wh) / (w * (wh - wl));
        1.0 / (1.0 + ratio.powi(2 * order as i32)).sqrt()
    }

    #[test]
    fn designed_response_matches_analytic_butterworth() {
        for order in 1..=4 {
            let filt = BandpassFilter::design(order, 0.5, 4.0, 25.0).unwrap();
            assert_eq!(filt.sections.len(), order);
            for f in [0.05, 0.3, 0.5, 1.0, 1.2, 2.0, 4.0, 6.0, 10.0, 12.0] {
                let got = filt.response(f, 25.0).norm();
                let want = analytic_gain(order, 0.5, 4.0, 25.0, f);
                assert!((got - want).abs() < 1e-9, "order {order} f {f}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn half_power_at_band_edges() {
        let filt = BandpassFilter::design(2, 0.5, 4.0, 25.0).unwrap();
        for f in [0.5, 4.0] {
            assert!((filt.response(f, 25.0).norm() - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        }
        assert!(filt.response(0.0, 25.0).norm() < 1e-12);
    }

    #[test]
    fn rejects_bad_band() {
        assert!(BandpassFilter::design(2, 4.0, 0.5, 25.0).is_err());
        assert!(BandpassFilter::design(2, 0.0, 4.0, 25.0).is_err());
        assert!(BandpassFilter::design(2, 0.5, 12.5, 25.0).is_err());
        assert_eq!(BandpassFilter::design(0, 0.5, 4.0, 25.0), Err(DesignError::ZeroOrder));
    }

    #[test]
    fn constant_input_is_removed_from_the_first_sample() {
        let filt = BandpassFilter::design(2, 0.5, 4.0, 25.0).unwrap();
        let y = filt.filtfilt(&[512.0; 300], 6);
        assert!(y.iter().all(|v| v.abs() < 1e-9), "{:?}", &y[..5]);
    }
}
