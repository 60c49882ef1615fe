//! Complex vectors, the plain DFT pair and modular index helpers.
//!
//! The transform convention is the non-unitary one: the forward DFT carries no
//! scale factor and the inverse divides by `N`.

use std::f64::consts::TAU;
use std::ops::{Index, IndexMut, Neg};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Reduce `j` into `[0, n)`; correct for negative `j`.
pub fn mod_index(j: i64, n: usize) -> usize {
    assert!(n >= 1, "modulus must be positive");
    j.rem_euclid(n as i64) as usize
}

/// `e^{sign * 2πi * j / n}` with `j` reduced mod `n` before the angle is formed.
pub(crate) fn root_of_unity(j: i64, n: usize, sign: f64) -> Complex64 {
    let r = mod_index(j, n);
    // quarter turns are exact
    if (4 * r).is_multiple_of(n) {
        return match 4 * r / n {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, sign),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -sign),
        };
    }
    Complex64::from_polar(1.0, sign * TAU * r as f64 / n as f64)
}

pub(crate) fn l2_norm(values: &[Complex64]) -> f64 {
    values.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn sup_norm(values: &[Complex64]) -> f64 {
    values.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

macro_rules! complex_vector {
    ($name:ident, $field:ident) => {
        impl $name {
            pub fn new($field: Vec<Complex64>) -> Result<Self> {
                if $field.is_empty() {
                    return Err(Error::InvalidParameter(concat!(stringify!($name), " must be nonempty").into()));
                }
                Ok(Self { $field })
            }

            pub fn zeros(n: usize) -> Self {
                assert!(n >= 1);
                Self { $field: vec![Complex64::new(0.0, 0.0); n] }
            }

            pub fn from_parts(re: &[f64], im: &[f64]) -> Result<Self> {
                if re.len() != im.len() {
                    return Err(Error::LengthMismatch { expected: re.len(), got: im.len() });
                }
                Self::new(re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect())
            }

            pub fn from_real(re: &[f64]) -> Result<Self> {
                Self::new(re.iter().map(|&a| Complex64::new(a, 0.0)).collect())
            }

            pub fn n(&self) -> usize {
                self.$field.len()
            }

            pub fn as_slice(&self) -> &[Complex64] {
                &self.$field
            }

            pub fn into_vec(self) -> Vec<Complex64> {
                self.$field
            }

            /// Entry at a possibly negative or out-of-range index, reduced mod `n`.
            pub fn at(&self, j: i64) -> Complex64 {
                self.$field[mod_index(j, self.n())]
            }

            pub fn norm(&self) -> f64 {
                l2_norm(&self.$field)
            }

            pub fn sup_norm(&self) -> f64 {
                sup_norm(&self.$field)
            }

            pub fn scale(&self, factor: Complex64) -> Self {
                Self { $field: self.$field.iter().map(|c| c * factor).collect() }
            }

            pub fn re(&self) -> Vec<f64> {
                self.$field.iter().map(|c| c.re).collect()
            }

            pub fn im(&self) -> Vec<f64> {
                self.$field.iter().map(|c| c.im).collect()
            }
        }

        impl Neg for &$name {
            type Output = $name;
            fn neg(self) -> $name {
                $name { $field: self.$field.iter().map(|c| -c).collect() }
            }
        }

        impl Index<usize> for $name {
            type Output = Complex64;
            fn index(&self, i: usize) -> &Complex64 {
                &self.$field[i]
            }
        }

        impl IndexMut<usize> for $name {
            fn index_mut(&mut self, i: usize) -> &mut Complex64 {
                &mut self.$field[i]
            }
        }
    };
}

/// An `N`-periodic complex time-domain signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    values: Vec<Complex64>,
}

/// DFT coefficients of a length-`N` signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    coeffs: Vec<Complex64>,
}

complex_vector!(Signal, values);
complex_vector!(Spectrum, coeffs);

fn transform(input: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = input.len();
    let twiddle: Vec<Complex64> = (0..n).map(|j| root_of_unity(j as i64, n, sign)).collect();
    (0..n)
        .map(|k| {
            input
                .iter()
                .enumerate()
                .map(|(t, &x)| x * twiddle[(k * t) % n])
                .sum()
        })
        .collect()
}

/// Forward DFT, `ẑ_k = Σ_n z_n e^{-2πikn/N}`.
pub fn dft(z: &Signal) -> Spectrum {
    Spectrum { coeffs: transform(z.as_slice(), -1.0) }
}

/// Inverse DFT, `z_k = (1/N) Σ_n ẑ_n e^{2πikn/N}`.
pub fn idft(s: &Spectrum) -> Signal {
    let scale = 1.0 / s.n() as f64;
    let values = transform(s.as_slice(), 1.0).into_iter().map(|c| c * scale).collect();
    Signal { values }
}
