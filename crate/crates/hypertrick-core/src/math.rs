//! Float helpers routed through `libm` so the crate builds without `std`.

pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

/// Integer power by repeated squaring. Every intermediate product is a plain
/// f64 multiply, so results are exact whenever the true value is representable
/// (e.g. `0.75^p` for all phase counts used here).
pub(crate) fn powi(base: f64, exp: u32) -> f64 {
    let mut acc = 1.0;
    let mut b = base;
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc *= b;
        }
        b *= b;
        e >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powi_matches_exact_rationals() {
        // 0.75^p = 3^p / 4^p is representable while 3^p fits in 53 bits.
        assert_eq!(powi(0.75, 0), 1.0);
        assert_eq!(powi(0.75, 1), 0.75);
        assert_eq!(powi(0.75, 2), 0.5625);
        assert_eq!(powi(0.75, 3), 0.421875);
        assert_eq!(powi(0.75, 10), 59049.0 / 1048576.0);
        assert_eq!(powi(2.0, 20), 1048576.0);
    }

    #[test]
    fn powi_zero_exponent_is_one() {
        assert_eq!(powi(0.0, 0), 1.0);
        assert_eq!(powi(123.456, 0), 1.0);
    }
}
