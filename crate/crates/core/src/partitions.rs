//! Integer partitions of bounded length.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Non-increasing sequence of positive parts. The empty partition has weight 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    /// Sorts the parts and drops zeros.
    pub fn new(mut parts: Vec<usize>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition { parts }
    }

    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn weight(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Part `i` (0-based), zero past the end.
    pub fn part(&self, i: usize) -> usize {
        self.parts.get(i).copied().unwrap_or(0)
    }

    pub fn conjugate(&self) -> Partition {
        let first = self.part(0);
        let parts = (1..=first).map(|j| self.parts.iter().take_while(|&&p| p >= j).count()).collect();
        Partition { parts }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// All partitions of `k` with at most `max_len` parts, in reverse-lexicographic order.
pub fn enumerate(k: usize, max_len: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fill(k, k, max_len, &mut cur, &mut out);
    out
}

fn fill(rest: usize, cap: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
    if rest == 0 {
        out.push(Partition { parts: cur.clone() });
        return;
    }
    if slots == 0 {
        return;
    }
    for p in (1..=cap.min(rest)).rev() {
        // The remaining slots must be able to hold what is left.
        if p * slots < rest {
            break;
        }
        cur.push(p);
        fill(rest - p, p, slots - 1, cur, out);
        cur.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_enumerations() {
        assert_eq!(enumerate(0, 3), vec![Partition::empty()]);
        assert_eq!(enumerate(3, 2), vec![Partition::new(vec![3]), Partition::new(vec![2, 1])]);
        assert_eq!(enumerate(8, 4).len(), 15);
    }

    #[test]
    fn conjugates() {
        assert_eq!(Partition::new(vec![3]).conjugate(), Partition::new(vec![1, 1, 1]));
        assert_eq!(Partition::new(vec![2, 1]).conjugate(), Partition::new(vec![2, 1]));
        assert_eq!(Partition::new(vec![4, 2, 2, 1]).conjugate(), Partition::new(vec![4, 3, 1, 1]));
    }

    #[test]
    fn display() {
        assert_eq!(Partition::new(vec![1, 3]).to_string(), "(3,1)");
    }
}
