//! Per-group summaries of estimated warp factors.

use crate::corpus::SpeakerGroup;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub count: usize,
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Min, quartiles (linear interpolation between order statistics) and max.
pub fn five_number(values: &[f64]) -> Option<FiveNumber> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(FiveNumber {
        min: v[0],
        q1: quantile(&v, 0.25),
        median: quantile(&v, 0.5),
        q3: quantile(&v, 0.75),
        max: v[v.len() - 1],
        count: v.len(),
    })
}

/// Summaries in input order; empty groups are dropped with a warning.
pub fn warp_statistics(groups: &[(SpeakerGroup, Vec<f64>)]) -> Vec<(SpeakerGroup, FiveNumber)> {
    groups
        .iter()
        .filter_map(|(g, vals)| match five_number(vals) {
            Some(s) => Some((g.clone(), s)),
            None => {
                log::warn!("no warp factors for group {g}; skipped");
                None
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_value() {
        let s = five_number(&[0.94]).unwrap();
        assert_eq!([s.min, s.q1, s.median, s.q3, s.max], [0.94; 5]);
    }

    #[test]
    fn odd_count() {
        let s = five_number(&[1.2, 0.8, 1.0, 0.9, 1.1]).unwrap();
        assert!((s.median - 1.0).abs() < 1e-12);
        assert!((s.q1 - 0.9).abs() < 1e-12);
        assert!((s.q3 - 1.1).abs() < 1e-12);
        assert_eq!((s.min, s.max), (0.8, 1.2));
    }

    #[test]
    fn even_count_interpolates() {
        let s = five_number(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((s.median - 2.5).abs() < 1e-12);
        assert!((s.q1 - 1.75).abs() < 1e-12);
        assert!((s.q3 - 3.25).abs() < 1e-12);
    }

    #[test]
    fn empty_group_skipped() {
        let out = warp_statistics(&[
            (SpeakerGroup::DC, vec![]),
            (SpeakerGroup::Norm, vec![1.0, 1.02]),
        ]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].0, SpeakerGroup::Norm);
    }
}
