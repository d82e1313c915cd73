//! Task partitioning of ordered frame/pixel sequences.

use std::ops::Range;

use crate::error::{CnfError, Result};

/// Contiguous equal splits of `n_frames` into `n_tasks`; remainder frames
/// go to the last task.
pub fn partition_frames(n_frames: usize, n_tasks: usize) -> Result<Vec<Range<usize>>> {
    if n_tasks == 0 || n_tasks > n_frames {
        return Err(CnfError::usage(format!(
            "partition: need 1 <= n_tasks <= {n_frames}, got {n_tasks}"
        )));
    }
    let base = n_frames / n_tasks;
    let mut out = Vec::with_capacity(n_tasks);
    let mut start = 0;
    for t in 0..n_tasks {
        let end = if t + 1 == n_tasks { n_frames } else { start + base };
        out.push(start..end);
        start = end;
    }
    Ok(out)
}

/// Balanced contiguous splits: sizes differ by at most one, larger chunks
/// last. Used for pixel strips where near-equal widths are wanted.
pub fn partition_balanced(n_items: usize, n_tasks: usize) -> Result<Vec<Range<usize>>> {
    if n_tasks == 0 || n_tasks > n_items {
        return Err(CnfError::usage(format!(
            "partition: need 1 <= n_tasks <= {n_items}, got {n_tasks}"
        )));
    }
    let base = n_items / n_tasks;
    let rem = n_items % n_tasks;
    let mut out = Vec::with_capacity(n_tasks);
    let mut start = 0;
    for t in 0..n_tasks {
        let size = base + usize::from(t >= n_tasks - rem);
        out.push(start..start + size);
        start += size;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_split() {
        let p = partition_frames(100, 10).unwrap();
        assert_eq!(p.len(), 10);
        assert!(p.iter().all(|r| r.len() == 10));
        assert_eq!(p[0], 0..10);
        assert_eq!(p[9], 90..100);
    }

    #[test]
    fn single_task() {
        let p = partition_frames(10, 1).unwrap();
        assert_eq!(p, vec![0..10]);
    }

    #[test]
    fn remainder_to_last() {
        let p = partition_frames(103, 10).unwrap();
        assert!(p[..9].iter().all(|r| r.len() == 10));
        assert_eq!(p[9].len(), 13);
    }

    #[test]
    fn balanced_strips() {
        let p = partition_balanced(512, 10).unwrap();
        let sizes: Vec<usize> = p.iter().map(|r| r.len()).collect();
        assert_eq!(sizes.iter().sum::<usize>(), 512);
        assert!(sizes.iter().all(|&s| s == 51 || s == 52));
    }

    #[test]
    fn disjoint_cover_property() {
        for (n, k) in [(100, 7), (512, 20), (40, 10), (9, 9)] {
            for part in [partition_frames(n, k).unwrap(), partition_balanced(n, k).unwrap()] {
                let mut covered = 0;
                let mut prev_end = 0;
                for r in &part {
                    assert_eq!(r.start, prev_end);
                    covered += r.len();
                    prev_end = r.end;
                }
                assert_eq!(covered, n);
                assert_eq!(prev_end, n);
            }
        }
    }

    #[test]
    fn rejects_bad_counts() {
        assert!(partition_frames(5, 0).is_err());
        assert!(partition_frames(5, 6).is_err());
    }
}
