use std::collections::VecDeque;

use crate::grid::Lattice;

/// Union of the 6-connected components of `inside` that contain a seed.
pub fn connected_component(
    lattice: &Lattice,
    inside: &[bool],
    seeds: impl IntoIterator<Item = usize>,
) -> Vec<bool> {
    let n = lattice.n;
    let mut mask = vec![false; lattice.len()];
    let mut queue = VecDeque::new();
    for s in seeds {
        if inside[s] && !mask[s] {
            mask[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(idx) = queue.pop_front() {
        let c = lattice.ijk(idx);
        for a in 0..3 {
            let s = lattice.stride(a);
            if c[a] > 0 && inside[idx - s] && !mask[idx - s] {
                mask[idx - s] = true;
                queue.push_back(idx - s);
            }
            if c[a] + 1 < n && inside[idx + s] && !mask[idx + s] {
                mask[idx + s] = true;
                queue.push_back(idx + s);
            }
        }
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn diagonal_neighbours_are_not_connected() {
        let lat = GridSpec::new(1.0, 2.0).unwrap().lattice().unwrap();
        let mut inside = vec![false; lat.len()];
        inside[lat.index(1, 1, 1)] = true;
        inside[lat.index(2, 2, 1)] = true;
        inside[lat.index(2, 1, 1)] = false;
        let m = connected_component(&lat, &inside, [lat.index(1, 1, 1)]);
        assert_eq!(m.iter().filter(|&&b| b).count(), 1);
        inside[lat.index(2, 1, 1)] = true;
        let m = connected_component(&lat, &inside, [lat.index(1, 1, 1)]);
        assert_eq!(m.iter().filter(|&&b| b).count(), 3);
    }
}
