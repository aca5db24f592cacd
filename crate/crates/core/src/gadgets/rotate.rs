use super::GadgetError;
use crate::digraph::{Arc, ColouredDigraph};

/// Replaces arcs `a->b` and `v->w` (one colour, not `protected`) with `a->w`
/// and `v->b` in the same colour. With `a` in `A`, `b` in `B`, `v` outside
/// `A` and `w` outside `B`, this destroys exactly one arc from `A` to `B`.
#[allow(clippy::too_many_arguments)]
pub fn rotate(
    h: &ColouredDigraph,
    a: usize,
    b: usize,
    v: usize,
    w: usize,
    set_a: &[usize],
    set_b: &[usize],
    protected: usize,
) -> Result<ColouredDigraph, GadgetError> {
    let fail = |m: String| Err(GadgetError::Rotate(m));
    if !set_a.contains(&a) {
        return fail(format!("a = {a} is not in A"));
    }
    if !set_b.contains(&b) {
        return fail(format!("b = {b} is not in B"));
    }
    if set_a.contains(&v) {
        return fail(format!("v = {v} lies in A"));
    }
    if set_b.contains(&w) {
        return fail(format!("w = {w} lies in B"));
    }
    let Some(d) = h.colour(a, b) else {
        return fail(format!("arc {a}->{b} is absent"));
    };
    match h.colour(v, w) {
        None => return fail(format!("arc {v}->{w} is absent")),
        Some(d2) if d2 != d => {
            return fail(format!(
                "arcs {a}->{b} and {v}->{w} differ in colour ({d} vs {d2})"
            ))
        }
        _ => {}
    }
    if d == protected {
        return fail(format!("both arcs carry the protected colour {d}"));
    }
    if h.has_arc(a, w) {
        return fail(format!("arc {a}->{w} is already present"));
    }
    if h.has_arc(v, b) {
        return fail(format!("arc {v}->{b} is already present"));
    }
    Ok(h.with_edits(
        &[Arc::new(a, b, d), Arc::new(v, w, d)],
        &[Arc::new(a, w, d), Arc::new(v, b, d)],
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::arc_count_between;
    use crate::sampler::{sample_latin_rectangle_with, task_rng};

    #[test]
    fn rotation_drops_one_arc_and_reverses() {
        let mut rng = task_rng(31, 0);
        let h = sample_latin_rectangle_with(12, 4, &mut rng);
        let set_a = vec![1, 2, 3, 4];
        let set_b = vec![5, 6, 7, 8];
        let mut done = 0;
        for &a in &set_a {
            for &d in h.colours().iter().filter(|&&d| d != 1) {
                let b = h.out_nb(d, a);
                if !set_b.contains(&b) {
                    continue;
                }
                for v in (1..=12).filter(|v| !set_a.contains(v)) {
                    let w = h.out_nb(d, v);
                    if set_b.contains(&w) || h.has_arc(a, w) || h.has_arc(v, b) {
                        continue;
                    }
                    let h2 = rotate(&h, a, b, v, w, &set_a, &set_b, 1).unwrap();
                    assert_eq!(
                        arc_count_between(&h2, &set_a, &set_b) + 1,
                        arc_count_between(&h, &set_a, &set_b)
                    );
                    assert_eq!(h2.class(1), h.class(1));
                    let back = rotate(&h2, a, w, v, b, &[a], &[w], 1).unwrap();
                    assert_eq!(back, h);
                    done += 1;
                }
            }
        }
        assert!(done > 0);
    }

    #[test]
    fn preconditions_are_named() {
        let mut rng = task_rng(32, 0);
        let h = sample_latin_rectangle_with(8, 3, &mut rng);
        let err = rotate(&h, 1, 2, 3, 4, &[5], &[2], 1).unwrap_err();
        assert!(err.to_string().contains("a = 1 is not in A"));
    }
}
