use nalgebra::Point3;

use crate::constraints::{check_all, outside_exclusion, ConstellationConstraints};
use crate::patch::GrippingPoint;
use crate::scalar::Scalar;

use super::Constellation;

struct Level {
    survivors: Vec<usize>,
    next: usize,
}

/// Lazy depth-first walk over k-subsets of the candidate list.
///
/// Each level only offers candidates that come later in the list than the
/// one chosen above it and lie outside the exclusion ball of every chosen
/// point, so sets appear in lexicographic order of candidate indices.
pub struct Constellations<'a, T: Scalar> {
    candidates: &'a [GrippingPoint<T>],
    com: Point3<T>,
    constraints: ConstellationConstraints<T>,
    k: usize,
    stack: Vec<Level>,
    chosen: Vec<usize>,
    /// k-sets checked against the constellation rules so far.
    pub examined: usize,
}

impl<'a, T: Scalar> Constellations<'a, T> {
    pub fn new(
        candidates: &'a [GrippingPoint<T>],
        com: Point3<T>,
        constraints: ConstellationConstraints<T>,
        k: usize,
    ) -> Self {
        assert!(k >= 3, "cup count must be at least 3");
        let stack = vec![Level { survivors: (0..candidates.len()).collect(), next: 0 }];
        Self { candidates, com, constraints, k, stack, chosen: Vec::with_capacity(k), examined: 0 }
    }

    fn chosen_points(&self) -> Vec<GrippingPoint<T>> {
        self.chosen.iter().map(|&i| self.candidates[i]).collect()
    }
}

impl<T: Scalar> Iterator for Constellations<'_, T> {
    type Item = (Vec<usize>, Constellation<T>);

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let depth = self.stack.len().checked_sub(1)?;
            let level = &mut self.stack[depth];
            if level.survivors.len() - level.next < self.k - depth {
                self.stack.pop();
                self.chosen.pop();
                continue;
            }
            let pick = level.survivors[level.next];
            level.next += 1;

            if depth + 1 == self.k {
                self.chosen.push(pick);
                self.examined += 1;
                let pts = self.chosen_points();
                let indices = self.chosen.clone();
                self.chosen.pop();
                let found = check_all(&pts, &self.com, &self.constraints)
                    .and_then(|_| Constellation::canonical(pts, self.com, &self.constraints.gravity).ok());
                if let Some(c) = found {
                    return Some((indices, c));
                }
                continue;
            }

            let placed = self.candidates[pick].position;
            let survivors: Vec<usize> = level.survivors[level.next..]
                .iter()
                .copied()
                .filter(|&j| outside_exclusion(&self.candidates[j].position, &placed, self.constraints.min_spacing))
                .collect();
            self.chosen.push(pick);
            self.stack.push(Level { survivors, next: 0 });
        }
    }
}
