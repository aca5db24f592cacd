//! Maximum bipartite matching by augmenting paths.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub left_to_right: Vec<Option<usize>>,
    pub right_to_left: Vec<Option<usize>>,
    pub size: usize,
}

impl Matching {
    pub fn is_perfect_on(&self, left: impl IntoIterator<Item = usize>) -> bool {
        left.into_iter().all(|l| self.left_to_right[l].is_some())
    }
}

/// Kuhn's algorithm. `adj[l]` lists right vertices adjacent to left vertex
/// `l`; left vertices are tried in `order`, candidates in list order.
pub fn max_bipartite_matching(
    n_left: usize,
    n_right: usize,
    adj: &[Vec<usize>],
    order: &[usize],
) -> Matching {
    let mut m = Matching {
        left_to_right: vec![None; n_left],
        right_to_left: vec![None; n_right],
        size: 0,
    };
    let mut visited = vec![0u32; n_right];
    let mut stamp = 0u32;
    for &l in order {
        stamp += 1;
        if augment(l, adj, &mut m, &mut visited, stamp) {
            m.size += 1;
        }
    }
    m
}

fn augment(
    l: usize,
    adj: &[Vec<usize>],
    m: &mut Matching,
    visited: &mut [u32],
    stamp: u32,
) -> bool {
    for &r in &adj[l] {
        if visited[r] == stamp {
            continue;
        }
        visited[r] = stamp;
        let free = match m.right_to_left[r] {
            None => true,
            Some(l2) => augment(l2, adj, m, visited, stamp),
        };
        if free {
            m.left_to_right[l] = Some(r);
            m.right_to_left[r] = Some(l);
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn needs_augmentation() {
        // Greedy 0->0 blocks 1 unless the path 1->0, 0->1 is found.
        let adj = vec![vec![0, 1], vec![0]];
        let m = max_bipartite_matching(2, 2, &adj, &[0, 1]);
        assert_eq!(m.size, 2);
        assert_eq!(m.left_to_right, vec![Some(1), Some(0)]);
    }

    #[test]
    fn hall_violation() {
        let adj = vec![vec![0], vec![0], vec![0, 1, 2]];
        assert_eq!(max_bipartite_matching(3, 3, &adj, &[0, 1, 2]).size, 2);
    }
}
