//! Structural checks over head arrays.
//!
//! A head array `heads` describes a sentence of `heads.len()` tokens: the
//! token at 1-based position `i` has head `heads[i - 1]`, where `0` is the
//! artificial root.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("empty sentence")]
    Empty,
    #[error("token {token} has head {head} outside 0..={len}")]
    HeadOutOfRange {
        token: usize,
        head: usize,
        len: usize,
    },
    #[error("token {0} is its own head")]
    SelfLoop(usize),
    #[error("expected exactly one root, found {0}")]
    RootCount(usize),
    #[error("cycle through token {0}")]
    Cycle(usize),
}

/// Checks that `heads` is a single-rooted, acyclic, connected tree.
pub fn check_tree(heads: &[usize]) -> Result<(), TreeError> {
    let n = heads.len();
    if n == 0 {
        return Err(TreeError::Empty);
    }
    for (i, &h) in heads.iter().enumerate() {
        let token = i + 1;
        if h > n {
            return Err(TreeError::HeadOutOfRange {
                token,
                head: h,
                len: n,
            });
        }
        if h == token {
            return Err(TreeError::SelfLoop(token));
        }
    }
    let roots = heads.iter().filter(|&&h| h == 0).count();
    if roots != 1 {
        return Err(TreeError::RootCount(roots));
    }

    // 0 = unvisited, 1 = on current path, 2 = known to reach the root.
    let mut mark = vec![0u8; n + 1];
    mark[0] = 2;
    for start in 1..=n {
        let mut path = Vec::new();
        let mut cur = start;
        while mark[cur] == 0 {
            mark[cur] = 1;
            path.push(cur);
            cur = heads[cur - 1];
        }
        if mark[cur] == 1 {
            return Err(TreeError::Cycle(cur));
        }
        for t in path {
            mark[t] = 2;
        }
    }
    Ok(())
}

pub fn is_tree(heads: &[usize]) -> bool {
    check_tree(heads).is_ok()
}

/// True when every arc's span is covered by the head's descendants.
///
/// Expects a valid tree; returns `false` otherwise.
pub fn is_projective(heads: &[usize]) -> bool {
    if !is_tree(heads) {
        return false;
    }
    let n = heads.len();
    // Subtree extents: leftmost and rightmost descendant of each token plus
    // its subtree size. A subtree is contiguous iff size == right - left + 1,
    // and a tree is projective iff every subtree is contiguous.
    let mut left: Vec<usize> = (0..=n).collect();
    let mut right: Vec<usize> = (0..=n).collect();
    let mut size = vec![1usize; n + 1];
    let order = bottom_up_order(heads);
    for &t in &order {
        let h = heads[t - 1];
        if h == 0 {
            continue;
        }
        left[h] = left[h].min(left[t]);
        right[h] = right[h].max(right[t]);
        size[h] += size[t];
    }
    (1..=n).all(|t| right[t] - left[t] + 1 == size[t])
}

/// Tokens ordered so that every dependent precedes its head.
fn bottom_up_order(heads: &[usize]) -> Vec<usize> {
    let n = heads.len();
    let mut depth = vec![usize::MAX; n + 1];
    depth[0] = 0;
    fn depth_of(t: usize, heads: &[usize], depth: &mut [usize]) -> usize {
        if depth[t] == usize::MAX {
            let d = depth_of(heads[t - 1], heads, depth) + 1;
            depth[t] = d;
        }
        depth[t]
    }
    for t in 1..=n {
        depth_of(t, heads, &mut depth);
    }
    let mut order: Vec<usize> = (1..=n).collect();
    order.sort_by(|a, b| depth[*b].cmp(&depth[*a]));
    order
}

/// Children of each token (index 0 = root), in increasing position.
pub fn dependents(heads: &[usize]) -> Vec<Vec<usize>> {
    let mut deps = vec![Vec::new(); heads.len() + 1];
    for (i, &h) in heads.iter().enumerate() {
        if h <= heads.len() {
            deps[h].push(i + 1);
        }
    }
    deps
}
