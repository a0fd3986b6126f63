//! Physical constants and unit conversions.
//!
//! Everything inside the crate works in SI with angular frequency in rad/s.
//! Conversions to Hz, THz, GHz and wavelength live here and nowhere else.

use std::f64::consts::PI;

/// Speed of light in vacuum, m/s.
pub const C: f64 = 299_792_458.0;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 8.854_187_812_8e-12;

pub fn thz_to_omega(f_thz: f64) -> f64 {
    2.0 * PI * f_thz * 1e12
}

pub fn omega_to_thz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e12)
}

pub fn ghz_to_omega(f_ghz: f64) -> f64 {
    2.0 * PI * f_ghz * 1e9
}

pub fn omega_to_ghz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e9)
}

pub fn hz_to_omega(f_hz: f64) -> f64 {
    2.0 * PI * f_hz
}

pub fn omega_to_hz(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

/// Vacuum wavelength (m) to angular frequency.
pub fn wavelength_to_omega(lambda_m: f64) -> f64 {
    2.0 * PI * C / lambda_m
}

/// Dimensional bookkeeping for the SPDC coupling constant.
///
/// Exponents are stored doubled so half-integer powers (ħ^{3/2}, ε₀^{-1/2})
/// stay exact.
pub mod dims {
    use std::ops::{Div, Mul};

    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub struct Dim {
        /// Doubled exponents of (kg, m, s, A).
        pub twice: [i32; 4],
    }

    impl Dim {
        pub const NONE: Dim = Dim { twice: [0; 4] };
        pub const KG: Dim = Dim { twice: [2, 0, 0, 0] };
        pub const M: Dim = Dim { twice: [0, 2, 0, 0] };
        pub const S: Dim = Dim { twice: [0, 0, 2, 0] };
        pub const A: Dim = Dim { twice: [0, 0, 0, 2] };

        /// Raise to the power `num/2`.
        pub fn pow_half(self, num: i32) -> Dim {
            let mut twice = self.twice;
            for t in &mut twice {
                assert!((*t * num) % 2 == 0, "non-representable power");
                *t = *t * num / 2;
            }
            Dim { twice }
        }

        pub fn powi(self, n: i32) -> Dim {
            self.pow_half(2 * n)
        }

        pub fn is_dimensionless(self) -> bool {
            self == Dim::NONE
        }

        pub fn joule() -> Dim {
            Dim::KG * Dim::M.powi(2) / Dim::S.powi(2)
        }
        pub fn volt() -> Dim {
            Dim::joule() / (Dim::A * Dim::S)
        }
        pub fn farad_per_metre() -> Dim {
            Dim::A.powi(2) * Dim::S.powi(4) / (Dim::KG * Dim::M.powi(3))
        }
    }

    impl Mul for Dim {
        type Output = Dim;
        fn mul(self, rhs: Dim) -> Dim {
            let mut twice = self.twice;
            for (a, b) in twice.iter_mut().zip(rhs.twice) {
                *a += b;
            }
            Dim { twice }
        }
    }

    impl Div for Dim {
        type Output = Dim;
        fn div(self, rhs: Dim) -> Dim {
            let mut twice = self.twice;
            for (a, b) in twice.iter_mut().zip(rhs.twice) {
                *a -= b;
            }
            Dim { twice }
        }
    }
}
