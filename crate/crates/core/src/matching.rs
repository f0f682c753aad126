//! Perfect matching of slots to items with per-slot preference lists.

/// Assign each slot an item. Slots are processed in order; a slot takes the
/// first unassigned eligible item in `preference` order, and only if none is
/// free does it displace earlier assignments along an augmenting path.
///
/// Returns `assignment[slot] = item`, or `None` if no perfect matching of
/// the slots exists.
pub fn assign_slots<F>(slots: usize, items: usize, preference: &[usize], eligible: F) -> Option<Vec<usize>>
where
    F: Fn(usize, usize) -> bool,
{
    let adj: Vec<Vec<usize>> = (0..slots)
        .map(|s| preference.iter().copied().filter(|&it| it < items && eligible(s, it)).collect())
        .collect();
    let mut item_owner: Vec<Option<usize>> = vec![None; items];
    let mut slot_item: Vec<Option<usize>> = vec![None; slots];
    for s in 0..slots {
        if let Some(&it) = adj[s].iter().find(|&&it| item_owner[it].is_none()) {
            item_owner[it] = Some(s);
            slot_item[s] = Some(it);
            continue;
        }
        let mut seen = vec![false; items];
        if !augment(s, &adj, &mut seen, &mut item_owner, &mut slot_item) {
            return None;
        }
    }
    slot_item.into_iter().collect()
}

fn augment(
    s: usize,
    adj: &[Vec<usize>],
    seen: &mut [bool],
    item_owner: &mut [Option<usize>],
    slot_item: &mut [Option<usize>],
) -> bool {
    for &it in &adj[s] {
        if seen[it] {
            continue;
        }
        seen[it] = true;
        let free = match item_owner[it] {
            None => true,
            Some(other) => augment(other, adj, seen, item_owner, slot_item),
        };
        if free {
            item_owner[it] = Some(s);
            slot_item[s] = Some(it);
            return true;
        }
    }
    false
}
