//! Exactly rounded floating-point summation.
//!
//! Binned estimates are sums over pair sets whose enumeration order is an
//! implementation detail (edge-list order, worker scheduling, vertex
//! relabelling). To keep estimates bitwise independent of that order, sums
//! are accumulated as a list of non-overlapping partials (Shewchuk's
//! error-free transformation) and rounded once at the end, so the result is
//! the correctly rounded value of the exact real sum — for any input order.

/// Accumulator that sums `f64` values without intermediate rounding error.
///
/// `value` returns the correctly rounded sum of everything added so far;
/// the accumulator can keep absorbing values afterwards.
#[derive(Debug, Clone, Default)]
pub struct ExactSum {
    /// Non-overlapping partials in increasing magnitude order.
    partials: Vec<f64>,
    /// Sticky accumulator for non-finite inputs; zero while all inputs are
    /// finite, otherwise it carries the IEEE-mandated inf/NaN outcome.
    special: f64,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one value. Exact: no information is lost until rounding time.
    pub fn add(&mut self, x: f64) {
        if !x.is_finite() {
            self.special += x;
            return;
        }
        let mut x = x;
        let mut used = 0;
        for k in 0..self.partials.len() {
            let mut y = self.partials[k];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            // Two-sum: hi + lo == x + y exactly, given |x| >= |y|.
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[used] = lo;
                used += 1;
            }
            x = hi;
        }
        self.partials.truncate(used);
        self.partials.push(x);
    }

    /// Correctly rounded sum of all values added so far.
    pub fn value(&self) -> f64 {
        if self.special != 0.0 {
            return self.special;
        }
        let p = &self.partials;
        let mut n = p.len();
        let mut hi = 0.0;
        if n > 0 {
            n -= 1;
            hi = p[n];
            let mut lo = 0.0;
            while n > 0 {
                let x = hi;
                n -= 1;
                let y = p[n];
                hi = x + y;
                lo = y - (hi - x);
                if lo != 0.0 {
                    break;
                }
            }
            // If the discarded tail has the same sign as the remaining
            // partials, the half-way case must round away from `hi`.
            if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
                let y = lo * 2.0;
                let x = hi + y;
                if y == x - hi {
                    hi = x;
                }
            }
        }
        hi
    }
}

/// Correctly rounded sum of an iterator of values.
pub fn sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = ExactSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cancellation_across_magnitudes() {
        assert_eq!(sum([1e100, 1.0, -1e100]), 1.0);
        assert_eq!(sum([1e16, 1.0, -1e16]), 1.0);
        assert_eq!(sum([1e308, -1e308, 3.5]), 3.5);
    }

    #[test]
    fn matches_naive_sum_on_exact_inputs() {
        // Integers up to 2^53 sum without rounding, so naive == exact.
        let values: Vec<f64> = (1..=1000).map(|k| k as f64).collect();
        assert_eq!(sum(values.iter().copied()), 500_500.0);
    }

    #[test]
    fn half_even_rounding_of_the_exact_sum() {
        // 1 + 2^-53 + 2^-53: the exact sum 1 + 2^-52 is representable and
        // must be returned even though each partial addition would round.
        let eps = (2.0f64).powi(-53);
        assert_eq!(sum([1.0, eps, eps]), 1.0 + 2.0 * eps);
        // A single half-ulp ties to even (stays at 1.0).
        assert_eq!(sum([1.0, eps]), 1.0);
    }

    #[test]
    fn empty_and_special_values() {
        assert_eq!(sum([]), 0.0);
        assert_eq!(sum([f64::INFINITY, 1.0]), f64::INFINITY);
        assert!(sum([f64::INFINITY, f64::NEG_INFINITY]).is_nan());
        assert!(sum([f64::NAN, 0.0]).is_nan());
    }

    proptest! {
        /// The whole point: any permutation yields the identical bit pattern.
        #[test]
        fn permutation_invariant(mut values in proptest::collection::vec(-1e12f64..1e12, 1..60),
                                 seed in 0u64..1024) {
            let forward = sum(values.iter().copied());
            // Deterministic shuffle driven by the seed.
            let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
            for i in (1..values.len()).rev() {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                values.swap(i, (state % (i as u64 + 1)) as usize);
            }
            let shuffled = sum(values.iter().copied());
            prop_assert_eq!(forward.to_bits(), shuffled.to_bits());
        }

        /// Scaling every input by a power of two scales the sum exactly.
        #[test]
        fn pow2_scaling_commutes(values in proptest::collection::vec(-1e6f64..1e6, 1..40),
                                 exp in -20i32..20) {
            let a = (2.0f64).powi(exp);
            let direct = sum(values.iter().map(|v| v * a));
            let scaled = sum(values.iter().copied()) * a;
            prop_assert_eq!(direct.to_bits(), scaled.to_bits());
        }
    }
}
