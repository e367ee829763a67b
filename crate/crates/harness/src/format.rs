//! Deterministic decimal formatting.
//!
//! Every fractional value that reaches a report is rounded once to six
//! decimal places with round-half-even, using integer arithmetic only, and
//! carried as an integer scaled by 10^6 from then on. This makes output
//! bytes independent of platform float formatting.

pub const SCALE: u128 = 1_000_000;

/// Rounds `num / den` to the nearest integer, ties to even.
pub fn div_round_half_even(num: u128, den: u128) -> u128 {
    assert!(den > 0, "division by zero");
    let q = num / den;
    let r = num % den;
    match (2 * r).cmp(&den) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => {
            if q.is_multiple_of(2) {
                q
            } else {
                q + 1
            }
        }
    }
}

/// Rounds the nonnegative rational `num / den` to six decimal places,
/// returning the value scaled by 10^6.
pub fn scaled_6dp(num: u128, den: u128) -> u64 {
    div_round_half_even(num * SCALE, den) as u64
}

/// Renders a 10^6-scaled value with exactly six decimal places.
pub fn format_scaled(scaled: u64) -> String {
    format!(
        "{}.{:06}",
        u128::from(scaled) / SCALE,
        u128::from(scaled) % SCALE
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_half_to_even() {
        assert_eq!(div_round_half_even(5, 2), 2); // 2.5 -> 2
        assert_eq!(div_round_half_even(7, 2), 4); // 3.5 -> 4
        assert_eq!(div_round_half_even(3, 2), 2); // 1.5 -> 2
        assert_eq!(div_round_half_even(1, 2), 0); // 0.5 -> 0
        assert_eq!(div_round_half_even(10, 4), 2); // 2.5 -> 2
        assert_eq!(div_round_half_even(11, 4), 3); // 2.75 -> 3
    }

    #[test]
    fn scaling_and_formatting() {
        assert_eq!(scaled_6dp(1, 1), 1_000_000);
        assert_eq!(format_scaled(scaled_6dp(1, 1)), "1.000000");
        assert_eq!(format_scaled(scaled_6dp(10, 8)), "1.250000");
        assert_eq!(format_scaled(scaled_6dp(1, 3)), "0.333333");
        assert_eq!(format_scaled(scaled_6dp(2, 3)), "0.666667");
        assert_eq!(format_scaled(scaled_6dp(3, 10)), "0.300000");
        // Tie at the sixth place: 0.0000005 rounds to the even digit.
        assert_eq!(format_scaled(scaled_6dp(1, 2_000_000)), "0.000000");
        assert_eq!(format_scaled(scaled_6dp(3, 2_000_000)), "0.000002");
    }
}
