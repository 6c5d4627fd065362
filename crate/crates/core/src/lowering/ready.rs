//! Static ready flags for the frames of one spawn group.
//!
//! A frame may run out of stack order only if it is independent of every
//! frame spawned before it in the same group.

use crate::frontend::ast;

use super::ir::Reg;

/// Part of an array touched by one argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Part {
    Whole,
    /// Cells `[0, len)`; the length expression with its variable versions.
    Prefix(SliceKey),
    /// Cells from `offset` on.
    Suffix(SliceKey),
}

/// A source expression plus the version of every variable it reads, so
/// two keys are equal only if they denote the same runtime value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceKey {
    pub expr: ast::Expr,
    pub versions: Vec<(String, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resource {
    /// A pending local item.
    Item(u32),
    /// The cell behind a scalar reference parameter.
    Param(Reg),
    /// An array, identified by its base register.
    Array(Reg, Part),
    Effect(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Access {
    pub reads: Vec<Resource>,
    pub writes: Vec<Resource>,
}

fn overlaps(a: &Resource, b: &Resource) -> bool {
    match (a, b) {
        (Resource::Array(x, p), Resource::Array(y, q)) => {
            x == y
                && !matches!((p, q),
                    (Part::Prefix(k1), Part::Suffix(k2)) | (Part::Suffix(k2), Part::Prefix(k1))
                    if k1 == k2)
        }
        _ => a == b,
    }
}

fn intersects(xs: &[Resource], ys: &[Resource]) -> bool {
    xs.iter().any(|x| ys.iter().any(|y| overlaps(x, y)))
}

/// True if spawn `later` must not run before spawn `earlier` completes.
pub fn conflicts(earlier: &Access, later: &Access) -> bool {
    intersects(&earlier.writes, &later.reads)
        || intersects(&earlier.writes, &later.writes)
        || intersects(&later.writes, &earlier.reads)
}

/// Ready flag per spawn: the first is always ready; spawn k is ready iff it
/// conflicts with no earlier spawn.
pub fn analyze(spawns: &[Access]) -> Vec<bool> {
    (0..spawns.len())
        .map(|k| spawns[..k].iter().all(|j| !conflicts(j, &spawns[k])))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(name: &str) -> SliceKey {
        SliceKey { expr: ast::Expr::var(name), versions: vec![(name.to_string(), 0)] }
    }

    #[test]
    fn single_spawn_is_ready() {
        assert_eq!(analyze(&[Access::default()]), [true]);
        assert!(analyze(&[]).is_empty());
    }

    #[test]
    fn split_halves_are_independent() {
        let first = Access {
            reads: vec![Resource::Array(0, Part::Prefix(key("k")))],
            writes: vec![Resource::Item(0)],
        };
        let second = Access {
            reads: vec![Resource::Array(0, Part::Suffix(key("k")))],
            writes: vec![Resource::Item(1)],
        };
        let add = Access { reads: vec![Resource::Item(0), Resource::Item(1)], writes: vec![Resource::Param(3)] };
        assert_eq!(analyze(&[first, second, add]), [true, true, false]);
    }

    #[test]
    fn halves_written_at_different_splits_conflict() {
        let mut other = key("k");
        other.versions[0].1 = 1;
        let a = Access { reads: vec![], writes: vec![Resource::Array(0, Part::Prefix(key("k")))] };
        let b = Access { reads: vec![], writes: vec![Resource::Array(0, Part::Suffix(other))] };
        assert_eq!(analyze(&[a, b]), [true, false]);
    }

    #[test]
    fn shared_effect_token() {
        let put = Access {
            reads: vec![Resource::Effect("stdout".into())],
            writes: vec![Resource::Effect("stdout".into())],
        };
        assert_eq!(analyze(&[put.clone(), put]), [true, false]);
    }
}
