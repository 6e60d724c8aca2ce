//! Fixed-width vertex/element sets. Every poset and every complex universe
//! holds at most [`MAX_ELEMENTS`] labels.

pub(crate) type Mask = u128;

/// Largest number of labels a poset or complex universe may hold.
pub const MAX_ELEMENTS: usize = 128;

#[inline]
pub(crate) fn bit(i: usize) -> Mask {
    1u128 << i
}

#[inline]
pub(crate) fn has(m: Mask, i: usize) -> bool {
    (m >> i) & 1 == 1
}

#[inline]
pub(crate) fn count(m: Mask) -> usize {
    m.count_ones() as usize
}

#[inline]
pub(crate) fn lowest(m: Mask) -> Option<usize> {
    if m == 0 {
        None
    } else {
        Some(m.trailing_zeros() as usize)
    }
}

#[inline]
pub(crate) fn is_subset(a: Mask, b: Mask) -> bool {
    a & !b == 0
}

pub(crate) fn full(n: usize) -> Mask {
    if n >= 128 {
        Mask::MAX
    } else {
        bit(n) - 1
    }
}

/// Iterates set bits in ascending order.
#[derive(Clone, Copy)]
pub(crate) struct Bits(pub Mask);

impl Iterator for Bits {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }
}

#[inline]
pub(crate) fn bits(m: Mask) -> Bits {
    Bits(m)
}

/// Lexicographic comparison of two sets read as ascending index sequences.
pub(crate) fn lex_cmp(a: Mask, b: Mask) -> std::cmp::Ordering {
    let mut x = bits(a);
    let mut y = bits(b);
    loop {
        match (x.next(), y.next()) {
            (None, None) => return std::cmp::Ordering::Equal,
            (None, Some(_)) => return std::cmp::Ordering::Less,
            (Some(_), None) => return std::cmp::Ordering::Greater,
            (Some(i), Some(j)) if i != j => return i.cmp(&j),
            _ => {}
        }
    }
}
