//! Small helpers for `u64` bit masks.

/// Iterate the indices of the set bits of `mask`, lowest first.
pub fn ones(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}

/// Mask with the lowest `n` bits set (`n <= 64`).
pub fn low_mask(n: usize) -> u64 {
    debug_assert!(n <= 64);
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Iterate every subset of `mask` (including 0 and `mask` itself) in
/// increasing numeric order.
pub fn subsets(mask: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(0u64);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == mask {
            None
        } else {
            Some(((cur | !mask).wrapping_add(1)) & mask)
        };
        Some(cur)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ones_lists_set_bits() {
        assert_eq!(ones(0b1011).collect::<Vec<_>>(), vec![0, 1, 3]);
        assert_eq!(ones(0).count(), 0);
        assert_eq!(ones(u64::MAX).count(), 64);
    }

    #[test]
    fn subsets_enumerates_power_set() {
        let all: Vec<u64> = subsets(0b1010).collect();
        assert_eq!(all, vec![0b0000, 0b0010, 0b1000, 0b1010]);
        assert_eq!(subsets(0).count(), 1);
        assert_eq!(subsets(0b1111).count(), 16);
    }

    #[test]
    fn low_mask_edges() {
        assert_eq!(low_mask(0), 0);
        assert_eq!(low_mask(3), 0b111);
        assert_eq!(low_mask(64), u64::MAX);
    }
}
