//! Bias of diverse speaker groups relative to the norm group.
//!
//! The individual bias of a group is its error rate minus the norm rate;
//! the overall bias is the mean of the individual biases over `G` groups.

use super::GroupScore;
use crate::corpus::{SpeakerGroup, SpeakingStyle};
use crate::{Error, Result};

/// Signed `rate_g - rate_norm`, in percentage points.
pub fn individual_bias(rate_g: f64, rate_norm: f64) -> f64 {
    rate_g - rate_norm
}

/// Mean individual bias over `group_rates`.
pub fn overall_bias(group_rates: &[f64], rate_norm: f64) -> Result<f64> {
    if group_rates.is_empty() {
        return Err(Error::Scoring("overall bias over an empty group list".into()));
    }
    let sum: f64 = group_rates.iter().map(|&r| individual_bias(r, rate_norm)).sum();
    Ok(sum / group_rates.len() as f64)
}

/// Group error rates of one speaking style plus the style-matched norm rate.
#[derive(Debug, Clone, PartialEq)]
pub struct StyleRates {
    pub style: SpeakingStyle,
    pub norm_rate: f64,
    pub groups: Vec<(SpeakerGroup, f64)>,
}

impl StyleRates {
    /// Collects rates from scored groups. `norm_style_for` names the norm
    /// style matched to each diverse style (e.g. HMI is compared with
    /// conversational norm speech).
    pub fn from_scores(
        scores: &[GroupScore],
        norm_style_for: impl Fn(&SpeakingStyle) -> SpeakingStyle,
    ) -> Result<Vec<StyleRates>> {
        let mut out: Vec<StyleRates> = Vec::new();
        for s in scores.iter().filter(|s| !s.group.is_norm()) {
            let idx = match out.iter().position(|r| r.style == s.style) {
                Some(i) => i,
                None => {
                    let norm_style = norm_style_for(&s.style);
                    let norm = scores
                        .iter()
                        .find(|n| n.group.is_norm() && n.style == norm_style)
                        .ok_or_else(|| {
                            Error::Scoring(format!(
                                "missing norm group score for style {norm_style} (needed by {})",
                                s.style
                            ))
                        })?;
                    out.push(StyleRates {
                        style: s.style.clone(),
                        norm_rate: norm.error_rate,
                        groups: Vec::new(),
                    });
                    out.len() - 1
                }
            };
            out[idx].groups.push((s.group.clone(), s.error_rate));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupBias {
    pub group: SpeakerGroup,
    pub rate: f64,
    pub bias: f64,
    /// The group is not worse than the norm, so its bias is not positive.
    pub not_above_norm: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StyleBias {
    pub style: SpeakingStyle,
    pub norm_rate: f64,
    pub groups: Vec<GroupBias>,
    pub overall: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasReport {
    pub styles: Vec<StyleBias>,
    /// Mean of the per-style overall biases.
    pub average: f64,
    /// Overall bias over all `group_count` (group, style) cells at once.
    pub pooled_overall: f64,
    pub group_count: usize,
    /// Mean individual bias of each group across styles, in first-seen order.
    pub group_average: Vec<(SpeakerGroup, f64)>,
    /// Mean error rate over all diverse (group, style) cells.
    pub mean_group_rate: f64,
}

impl BiasReport {
    pub fn style(&self, style: &SpeakingStyle) -> Option<&StyleBias> {
        self.styles.iter().find(|s| &s.style == style)
    }

    /// Cells whose rate does not exceed the norm rate.
    pub fn violations(&self) -> Vec<(&SpeakingStyle, &SpeakerGroup)> {
        self.styles
            .iter()
            .flat_map(|s| {
                s.groups
                    .iter()
                    .filter(|g| g.not_above_norm)
                    .map(move |g| (&s.style, &g.group))
            })
            .collect()
    }
}

pub fn bias_report(styles: &[StyleRates]) -> Result<BiasReport> {
    if styles.is_empty() {
        return Err(Error::Scoring("bias report needs at least one style".into()));
    }
    let mut out = Vec::with_capacity(styles.len());
    let mut all_rates = Vec::new();
    let mut all_biases = Vec::new();
    let mut group_sums: Vec<(SpeakerGroup, f64, usize)> = Vec::new();
    for s in styles {
        if !s.norm_rate.is_finite() || s.groups.iter().any(|(_, r)| !r.is_finite()) {
            return Err(Error::Scoring(format!("non-finite rate in style {}", s.style)));
        }
        let rates: Vec<f64> = s.groups.iter().map(|(_, r)| *r).collect();
        let overall = overall_bias(&rates, s.norm_rate)
            .map_err(|_| Error::Scoring(format!("style {} has no groups", s.style)))?;
        let groups = s
            .groups
            .iter()
            .map(|(g, r)| {
                let bias = individual_bias(*r, s.norm_rate);
                all_rates.push(*r);
                all_biases.push(bias);
                match group_sums.iter_mut().find(|(k, _, _)| k == g) {
                    Some(e) => {
                        e.1 += bias;
                        e.2 += 1;
                    }
                    None => group_sums.push((g.clone(), bias, 1)),
                }
                GroupBias {
                    group: g.clone(),
                    rate: *r,
                    bias,
                    not_above_norm: *r <= s.norm_rate,
                }
            })
            .collect();
        out.push(StyleBias {
            style: s.style.clone(),
            norm_rate: s.norm_rate,
            groups,
            overall,
        });
    }
    let n = all_biases.len() as f64;
    Ok(BiasReport {
        average: out.iter().map(|s| s.overall).sum::<f64>() / out.len() as f64,
        pooled_overall: all_biases.iter().sum::<f64>() / n,
        group_count: all_biases.len(),
        group_average: group_sums
            .into_iter()
            .map(|(g, sum, k)| (g, sum / k as f64))
            .collect(),
        mean_group_rate: all_rates.iter().sum::<f64>() / n,
        styles: out,
    })
}
