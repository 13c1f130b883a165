//! Rationals in reports are written as `"p/q"` (or `"p"` when integral).

use num_rational::Ratio;
use serde::Serializer;

pub fn format_ratio(r: &Ratio<i64>) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn serialize<S: Serializer>(r: &Ratio<i64>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_ratio(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(format_ratio(&Ratio::new(6, 4)), "3/2");
        assert_eq!(format_ratio(&Ratio::new(-8, 4)), "-2");
        assert_eq!(format_ratio(&Ratio::new(1, -4)), "-1/4");
    }
}
