//! Levenshtein alignment with unit costs.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    Match,
    Sub,
    Del,
    Ins,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignOp<T> {
    pub kind: OpKind,
    pub reference: Option<T>,
    pub hypothesis: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentResult<T> {
    pub n_ref: usize,
    pub matches: usize,
    pub subs: usize,
    pub dels: usize,
    pub ins: usize,
    pub ops: Vec<AlignOp<T>>,
}

impl<T> AlignmentResult<T> {
    pub fn errors(&self) -> usize {
        self.subs + self.dels + self.ins
    }

    /// `100 * (S + D + I) / n_ref`; undefined for an empty reference.
    pub fn error_rate(&self) -> Option<f64> {
        (self.n_ref > 0).then(|| 100.0 * self.errors() as f64 / self.n_ref as f64)
    }
}

/// Unit-cost edit distance table, `(n + 1) x (m + 1)` row-major.
fn cost_table<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> Vec<usize> {
    let (n, m) = (reference.len(), hypothesis.len());
    let w = m + 1;
    let mut d = vec![0usize; (n + 1) * w];
    for j in 0..=m {
        d[j] = j;
    }
    for i in 1..=n {
        d[i * w] = i;
        for j in 1..=m {
            let diag = d[(i - 1) * w + j - 1] + usize::from(reference[i - 1] != hypothesis[j - 1]);
            let del = d[(i - 1) * w + j] + 1;
            let ins = d[i * w + j - 1] + 1;
            d[i * w + j] = diag.min(del).min(ins);
        }
    }
    d
}

pub fn edit_distance<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> usize {
    cost_table(reference, hypothesis)[(reference.len() + 1) * (hypothesis.len() + 1) - 1]
}

/// Minimum-edit alignment. Among optimal paths the backtrace prefers
/// match, then substitution, then deletion, then insertion.
pub fn align<T: PartialEq + Clone>(reference: &[T], hypothesis: &[T]) -> AlignmentResult<T> {
    let (n, m) = (reference.len(), hypothesis.len());
    let w = m + 1;
    let d = cost_table(reference, hypothesis);
    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = d[i * w + j];
        if i > 0 && j > 0 {
            let same = reference[i - 1] == hypothesis[j - 1];
            let diag = d[(i - 1) * w + j - 1];
            if same && diag == here {
                ops.push(AlignOp {
                    kind: OpKind::Match,
                    reference: Some(reference[i - 1].clone()),
                    hypothesis: Some(hypothesis[j - 1].clone()),
                });
                i -= 1;
                j -= 1;
                continue;
            }
            if !same && diag + 1 == here {
                ops.push(AlignOp {
                    kind: OpKind::Sub,
                    reference: Some(reference[i - 1].clone()),
                    hypothesis: Some(hypothesis[j - 1].clone()),
                });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && d[(i - 1) * w + j] + 1 == here {
            ops.push(AlignOp {
                kind: OpKind::Del,
                reference: Some(reference[i - 1].clone()),
                hypothesis: None,
            });
            i -= 1;
        } else {
            ops.push(AlignOp {
                kind: OpKind::Ins,
                reference: None,
                hypothesis: Some(hypothesis[j - 1].clone()),
            });
            j -= 1;
        }
    }
    ops.reverse();
    let count = |k: OpKind| ops.iter().filter(|o| o.kind == k).count();
    AlignmentResult {
        n_ref: n,
        matches: count(OpKind::Match),
        subs: count(OpKind::Sub),
        dels: count(OpKind::Del),
        ins: count(OpKind::Ins),
        ops,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn identical() {
        let a = align(&toks("a b c"), &toks("a b c"));
        assert_eq!((a.subs, a.dels, a.ins, a.matches), (0, 0, 0, 3));
        assert_eq!(a.error_rate(), Some(0.0));
    }

    #[test]
    fn substitution_and_insertion() {
        let a = align(&toks("a b c"), &toks("a x c d"));
        assert_eq!((a.subs, a.dels, a.ins), (1, 0, 1));
        assert!((a.error_rate().unwrap() - 66.666_666).abs() < 1e-3);
    }

    #[test]
    fn empty_hypothesis_is_all_deletions() {
        let a = align(&toks("a b c"), &[]);
        assert_eq!((a.subs, a.dels, a.ins), (0, 3, 0));
        assert_eq!(a.error_rate(), Some(100.0));
    }

    #[test]
    fn empty_reference_has_undefined_rate() {
        let a = align(&[], &toks("x y"));
        assert_eq!((a.n_ref, a.ins), (0, 2));
        assert_eq!(a.error_rate(), None);
    }

    #[test]
    fn tie_prefers_substitution_over_del_ins() {
        // "a" vs "b": one sub (cost 1) beats del + ins (cost 2); "a b" vs
        // "b a" has several optimal paths and must pick subs first.
        let a = align(&toks("a b"), &toks("b a"));
        assert_eq!(a.errors(), 2);
        assert_eq!((a.subs, a.dels, a.ins), (2, 0, 0));
    }

    proptest! {
        #[test]
        fn swap_exchanges_deletions_and_insertions(
            r in prop::collection::vec(0u8..4, 0..10),
            h in prop::collection::vec(0u8..4, 0..10),
        ) {
            let ab = align(&r, &h);
            let ba = align(&h, &r);
            prop_assert_eq!(ab.errors(), ba.errors());
            prop_assert_eq!(ab.subs + ab.dels + ab.matches, r.len());
            prop_assert_eq!(ab.subs + ab.ins + ab.matches, h.len());
            prop_assert_eq!(ab.errors(), edit_distance(&r, &h));
        }

        #[test]
        fn triangle_inequality(
            a in prop::collection::vec(0u8..3, 0..8),
            b in prop::collection::vec(0u8..3, 0..8),
            c in prop::collection::vec(0u8..3, 0..8),
        ) {
            prop_assert!(edit_distance(&a, &c) <= edit_distance(&a, &b) + edit_distance(&b, &c));
        }
    }
}
