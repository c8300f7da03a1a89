use super::MatchMatrix;

/// Outcome of the MLE existence check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FordCheck {
    Satisfied,
    /// No item in `losers` ever beat an item in `winners`. Both sides are
    /// nonempty and together cover every item.
    Violated {
        winners: Vec<usize>,
        losers: Vec<usize>,
    },
}

impl FordCheck {
    pub fn holds(&self) -> bool {
        matches!(self, FordCheck::Satisfied)
    }
}

/// Every bipartition must be crossed by a win in both directions. Equivalent
/// to strong connectivity of the digraph with an edge `i -> j` whenever `i`
/// beat `j`; on failure the witness is a source component of the condensation.
pub fn check_ford_condition(m: &MatchMatrix) -> FordCheck {
    let n = m.n();
    let comp = strongly_connected_components(m);
    let n_comp = comp.iter().copied().max().map_or(0, |c| c + 1);
    if n_comp <= 1 {
        return FordCheck::Satisfied;
    }

    // a component is a source when nobody outside it ever beat anyone inside
    let mut beaten_from_outside = vec![false; n_comp];
    for i in 0..n {
        for j in 0..n {
            if m.get(i, j) > 0 && comp[i] != comp[j] {
                beaten_from_outside[comp[j]] = true;
            }
        }
    }
    // components are numbered in discovery order, so take the source holding the smallest item
    let source = (0..n)
        .map(|i| comp[i])
        .find(|&c| !beaten_from_outside[c])
        .expect("a finite DAG has a source");
    let (winners, losers) = (0..n).partition(|&i| comp[i] == source);
    FordCheck::Violated { winners, losers }
}

/// Kosaraju's algorithm, iterative. Returns a component id per item.
fn strongly_connected_components(m: &MatchMatrix) -> Vec<usize> {
    let n = m.n();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for start in 0..n {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut stack = vec![(start, 0usize)];
        while let Some((v, next)) = stack.last_mut() {
            let v = *v;
            if let Some(w) = (*next..n).find(|&w| m.get(v, w) > 0 && !visited[w]) {
                *next = w + 1;
                visited[w] = true;
                stack.push((w, 0));
            } else {
                order.push(v);
                stack.pop();
            }
        }
    }

    const UNSET: usize = usize::MAX;
    let mut comp = vec![UNSET; n];
    let mut next_id = 0;
    for &root in order.iter().rev() {
        if comp[root] != UNSET {
            continue;
        }
        comp[root] = next_id;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for u in 0..n {
                // reversed edge: u beat v
                if m.get(u, v) > 0 && comp[u] == UNSET {
                    comp[u] = next_id;
                    stack.push(u);
                }
            }
        }
        next_id += 1;
    }
    // renumber by smallest member so ids are stable under traversal order
    let mut remap = vec![UNSET; next_id];
    let mut fresh = 0;
    for c in comp.iter_mut() {
        if remap[*c] == UNSET {
            remap[*c] = fresh;
            fresh += 1;
        }
        *c = remap[*c];
    }
    comp
}
