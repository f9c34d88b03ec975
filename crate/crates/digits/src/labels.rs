//! Constraint strings: binary strings identifying partial output labelings.

use std::cmp::Ordering;
use std::fmt;

/// A binary string `sigma`; bit `i` (0-based) is the required output on the
/// sample added at depth `i + 1`. Bits are packed 64 per block.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ConstraintString {
    len: usize,
    blocks: Vec<u64>,
}

impl ConstraintString {
    /// The empty string epsilon.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut s = Self::empty();
        for b in bits {
            s.push(b);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range (len {})", self.len);
        (self.blocks[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn push(&mut self, b: bool) {
        if self.len % 64 == 0 {
            self.blocks.push(0);
        }
        if b {
            *self.blocks.last_mut().unwrap() |= 1 << (self.len % 64);
        }
        self.len += 1;
    }

    /// The child string `sigma b`.
    pub fn child(&self, b: bool) -> Self {
        let mut c = self.clone();
        c.push(b);
        c
    }

    /// The parent string (all but the last bit); `None` for epsilon.
    pub fn parent(&self) -> Option<Self> {
        if self.len == 0 {
            return None;
        }
        let mut p = self.clone();
        p.len -= 1;
        if p.len % 64 == 0 {
            p.blocks.pop();
        } else {
            let last = p.blocks.last_mut().unwrap();
            *last &= (1u64 << (p.len % 64)) - 1;
        }
        Some(p)
    }

    pub fn last_bit(&self) -> Option<bool> {
        if self.len == 0 {
            None
        } else {
            Some(self.bit(self.len - 1))
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.bit(i))
    }
}

// Lexicographic with 0 < 1; a proper prefix precedes its extensions.
impl Ord for ConstraintString {
    fn cmp(&self, other: &Self) -> Ordering {
        let n = self.len.min(other.len);
        for i in 0..n {
            match (self.bit(i), other.bit(i)) {
                (false, true) => return Ordering::Less,
                (true, false) => return Ordering::Greater,
                _ => {}
            }
        }
        self.len.cmp(&other.len)
    }
}

impl PartialOrd for ConstraintString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for ConstraintString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl fmt::Display for ConstraintString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for ConstraintString {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = Self::empty();
        for c in s.chars() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                _ => return Err(format!("invalid bit character {c:?}")),
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_and_bits_across_blocks() {
        let mut s = ConstraintString::empty();
        for i in 0..130 {
            s.push(i % 3 == 0);
        }
        assert_eq!(s.len(), 130);
        for i in 0..130 {
            assert_eq!(s.bit(i), i % 3 == 0);
        }
    }

    #[test]
    fn parent_of_child() {
        let s: ConstraintString = "0110".parse().unwrap();
        assert_eq!(s.child(true).parent().unwrap(), s);
        assert_eq!(s.last_bit(), Some(false));
        assert!(ConstraintString::empty().parent().is_none());
    }

    #[test]
    fn lexicographic_order() {
        let a: ConstraintString = "01".parse().unwrap();
        let b: ConstraintString = "10".parse().unwrap();
        let prefix: ConstraintString = "0".parse().unwrap();
        assert!(a < b);
        assert!(prefix < a);
    }
}
