//! Plain-text number formatting shared by the writers.

/// Scientific notation with 17 significant digits, enough to round-trip an f64.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 123456.789] {
            assert_eq!(sig17(x).parse::<f64>().unwrap(), x);
        }
    }
}
