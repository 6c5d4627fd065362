//! Item references: a 16-bit space id over a 48-bit byte offset.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ItemRef(pub u64);

const OFFSET_MASK: u64 = (1 << 48) - 1;

impl ItemRef {
    /// Cells owned by the host (the entry call's inouts and outs).
    pub const HOST: u16 = 0xFFFF;
    /// The direct interpreter's call stack.
    pub const DIRECT: u16 = 0xFFFE;
    /// A task body's local arrays before they move into `_skip` payloads.
    pub const SCRATCH: u16 = 0xFFFD;
    /// Reference to an empty slice; never dereferenced.
    pub const NULL: u16 = 0xFFFC;

    pub const fn new(space: u16, offset: usize) -> Self {
        ItemRef(((space as u64) << 48) | (offset as u64 & OFFSET_MASK))
    }

    pub const fn null() -> Self {
        ItemRef::new(Self::NULL, 0)
    }

    pub const fn stack(id: usize, offset: usize) -> Self {
        ItemRef::new(id as u16, offset)
    }

    pub const fn space(self) -> u16 {
        (self.0 >> 48) as u16
    }

    pub const fn offset(self) -> usize {
        (self.0 & OFFSET_MASK) as usize
    }

    /// Reference `cells` cells further on.
    pub const fn add_cells(self, cells: i64) -> Self {
        ItemRef((self.0 & !OFFSET_MASK) | ((self.0 as i64).wrapping_add(cells * 8) as u64 & OFFSET_MASK))
    }

    pub fn is_stack(self) -> bool {
        self.space() < Self::NULL
    }

    pub const fn bits(self) -> i64 {
        self.0 as i64
    }

    pub const fn from_bits(v: i64) -> Self {
        ItemRef(v as u64)
    }
}

impl fmt::Display for ItemRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.space() {
            Self::HOST => write!(f, "@h+{}", self.offset()),
            Self::DIRECT => write!(f, "@d+{}", self.offset()),
            Self::SCRATCH => write!(f, "@x+{}", self.offset()),
            Self::NULL => f.write_str("@null"),
            s => write!(f, "@s{}+{}", s, self.offset()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packs_space_and_offset() {
        let r = ItemRef::stack(3, 1_999_984);
        assert_eq!(r.space(), 3);
        assert_eq!(r.offset(), 1_999_984);
        assert_eq!(r.to_string(), "@s3+1999984");
        assert_eq!(r.add_cells(2).offset(), 2_000_000);
        assert_eq!(ItemRef::new(ItemRef::HOST, 8).to_string(), "@h+8");
        assert_eq!(ItemRef::from_bits(r.bits()), r);
        assert!(!ItemRef::null().is_stack());
    }
}
