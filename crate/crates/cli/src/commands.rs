use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use asrfair::config::PipelineConfig;
use asrfair::corpus::{
    load_manifest, read_feature_archive, read_wav, render_manifest, write_feature_archive, write_wav,
    FeatureArchive, SpeakerGroup, SpeakingStyle, UtteranceRecord,
};
use asrfair::dsp::synth::synth_utterance;
use asrfair::dsp::{power_spectrum, speed_perturb, FeatureMatrix, SpeedFactor, Waveform};
use asrfair::fsutil::write_atomic;
use asrfair::report::{
    plot_bias_bars, plot_warp_boxplot, render_shaded_csv, render_shaded_html, BarSeries, ShadeScope, ShadedTable,
};
use asrfair::scoring::{
    group_scores, parse_group_scores_csv, read_hypotheses, read_wer_table, render_bias_csv, render_bias_text,
    render_group_scores_csv, BiasReport, LabeledReport, StyleRates, TokenMode,
};
use asrfair::specaug::spec_augment;
use asrfair::vtln::{
    apply_warp, estimate_warp, parse_assignments, read_model, render_assignments, train_vtln, warp_statistics,
    write_model, FeatureSpec, NamedWave,
};
use asrfair::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::args::*;

struct Ctx {
    cfg: PipelineConfig,
    audio_root: Option<PathBuf>,
}

impl Ctx {
    fn audio_base(&self, manifest: &Path) -> PathBuf {
        self.audio_root
            .clone()
            .or_else(|| self.cfg.paths.audio_root.clone())
            .unwrap_or_else(|| manifest.parent().map(Path::to_path_buf).unwrap_or_default())
    }

    /// Manifest records with their decoded audio, in manifest order.
    fn load_audio(&self, manifest: &Path) -> Result<(Vec<UtteranceRecord>, Vec<Waveform>)> {
        let records = load_manifest(manifest)?;
        let base = self.audio_base(manifest);
        let waves = records
            .par_iter()
            .map(|r| read_wav(&r.resolve_audio(&base)))
            .collect::<Result<Vec<_>>>()?;
        Ok((records, waves))
    }

    fn spec(&self, kind: Kind) -> Option<FeatureSpec> {
        match kind {
            Kind::Logmel => Some(FeatureSpec::LogMel {
                frame: self.cfg.frame.clone(),
                mel: self.cfg.mel.clone(),
            }),
            Kind::Mfcc => Some(FeatureSpec::Mfcc {
                frame: self.cfg.frame.clone(),
                mfcc: self.cfg.mfcc.clone(),
            }),
            Kind::Power => None,
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(j) = cli.global.jobs {
        if j == 0 {
            return Err(Error::InvalidArgument("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let mut cfg = match &cli.global.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.global.seed {
        cfg.seed = s;
    }
    let ctx = Ctx {
        cfg,
        audio_root: cli.global.audio_root.clone(),
    };
    match cli.command {
        Command::Corpus(CorpusCmd::Validate { manifest, no_audio }) => corpus_validate(&ctx, &manifest, no_audio),
        Command::Features(FeaturesCmd::Extract {
            manifest,
            out,
            kind,
            warps,
        }) => extract(&ctx, &manifest, &out, kind, warps.as_deref(), false),
        Command::Augment(AugmentCmd::Speed {
            manifest,
            out_dir,
            factors,
        }) => augment_speed(&ctx, &manifest, &out_dir, factors),
        Command::Augment(AugmentCmd::Specaug { features, out }) => augment_specaug(&ctx, &features, &out),
        Command::Vtln(VtlnCmd::Train {
            manifest,
            model,
            assignments,
        }) => vtln_train(&ctx, &manifest, &model, assignments.as_deref()),
        Command::Vtln(VtlnCmd::Estimate { manifest, model, out }) => vtln_estimate(&ctx, &manifest, &model, &out),
        Command::Vtln(VtlnCmd::Apply {
            manifest,
            warps,
            out,
            kind,
        }) => extract(&ctx, &manifest, &out, kind, Some(&warps), true),
        Command::Score(a) => score(&ctx, &a),
        Command::BiasReport(a) => bias(&a),
        Command::Plot(PlotCmd::Warps {
            manifest,
            warps,
            title,
            out,
        }) => plot_warps(&manifest, &warps, &title, &out),
        Command::Plot(PlotCmd::Bias {
            source,
            norm_style,
            rows,
            title,
            out,
        }) => plot_bias(&source, &norm_style, rows.as_deref(), &title, &out),
        Command::SynthCorpus(a) => synth_corpus(&ctx, &a),
        Command::ShowConfig => {
            print!("{}", ctx.cfg.render()?);
            Ok(())
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, text.as_bytes())
}

fn corpus_validate(ctx: &Ctx, manifest: &Path, no_audio: bool) -> Result<()> {
    let records = load_manifest(manifest)?;
    let mut seconds = 0.0;
    if !no_audio {
        let base = ctx.audio_base(manifest);
        seconds = records
            .par_iter()
            .map(|r| read_wav(&r.resolve_audio(&base)).map(|w| w.duration_s()))
            .collect::<Result<Vec<_>>>()?
            .iter()
            .sum();
    }
    let mut counts: Vec<((SpeakerGroup, SpeakingStyle), usize)> = Vec::new();
    for r in &records {
        let key = (r.group.clone(), r.style.clone());
        match counts.iter_mut().find(|(k, _)| *k == key) {
            Some((_, n)) => *n += 1,
            None => counts.push((key, 1)),
        }
    }
    println!("utterances\t{}", records.len());
    if !no_audio {
        println!("seconds\t{seconds:.2}");
    }
    for ((g, s), n) in counts {
        println!("{s}:{g}\t{n}");
    }
    Ok(())
}

fn load_warps(path: &Path) -> Result<HashMap<String, f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = HashMap::new();
    for a in parse_assignments(&text, &path.display().to_string())? {
        if out.insert(a.utt_id.clone(), a.alpha).is_some() {
            return Err(Error::DuplicateUtterance(a.utt_id));
        }
    }
    Ok(out)
}

fn extract(ctx: &Ctx, manifest: &Path, out: &Path, kind: Kind, warps: Option<&Path>, require_all: bool) -> Result<()> {
    let (records, waves) = ctx.load_audio(manifest)?;
    let warps = warps.map(load_warps).transpose()?.unwrap_or_default();
    if require_all {
        if let Some(r) = records.iter().find(|r| !warps.contains_key(&r.utt_id)) {
            return Err(Error::UnknownUtterance(format!("{} has no warp factor", r.utt_id)));
        }
    }
    let spec = ctx.spec(kind);
    let feats = records
        .par_iter()
        .zip(&waves)
        .map(|(r, w)| -> Result<FeatureMatrix> {
            let alpha = warps.get(&r.utt_id).copied().unwrap_or(1.0);
            match &spec {
                Some(s) => apply_warp(w, alpha, s),
                None if alpha == 1.0 => power_spectrum(w, &ctx.cfg.frame),
                None => Err(Error::InvalidArgument("power spectra cannot be warped".into())),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut archive = FeatureArchive::new();
    for (r, f) in records.iter().zip(feats) {
        archive.insert(r.utt_id.clone(), f)?;
    }
    write_feature_archive(&archive, out)?;
    log::info!("wrote {} feature matrices to {}", archive.len(), out.display());
    Ok(())
}

/// `0.9 -> "0.9"`, `1.0 -> "1.0"`.
fn factor_tag(b: f64) -> String {
    if b.fract() == 0.0 {
        format!("{b:.1}")
    } else {
        format!("{b}")
    }
}

fn augment_speed(ctx: &Ctx, manifest: &Path, out_dir: &Path, factors: Option<Vec<f64>>) -> Result<()> {
    let factors = factors.unwrap_or_else(|| ctx.cfg.speed_factors.clone());
    let factors: Vec<SpeedFactor> = factors.into_iter().map(SpeedFactor::new).collect::<Result<_>>()?;
    let (records, waves) = ctx.load_audio(manifest)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let jobs: Vec<(usize, SpeedFactor)> = (0..records.len())
        .flat_map(|i| factors.iter().map(move |&f| (i, f)))
        .collect();
    let out = jobs
        .par_iter()
        .map(|&(i, f)| -> Result<UtteranceRecord> {
            let r = &records[i];
            let id = format!("{}#sp{}", r.utt_id, factor_tag(f.get()));
            let file = PathBuf::from(format!("{}.wav", id.replace(['/', '\\'], "_")));
            let wave = speed_perturb(&waves[i], f)?;
            let report = write_wav(&wave, &out_dir.join(&file))?;
            if report.clip_count > 0 {
                log::warn!("{id}: {} samples clipped", report.clip_count);
            }
            Ok(UtteranceRecord {
                utt_id: id,
                audio_path: file,
                ..r.clone()
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_text(&out_dir.join("manifest.tsv"), &render_manifest(&out))?;
    log::info!("{} utterances x {} factors -> {}", records.len(), factors.len(), out.len());
    Ok(())
}

fn augment_specaug(ctx: &Ctx, input: &Path, out: &Path) -> Result<()> {
    let archive = read_feature_archive(input)?;
    let policy = ctx.cfg.specaug_policy();
    let entries: Vec<(&str, &FeatureMatrix)> = archive.iter().collect();
    let augmented = entries
        .par_iter()
        .map(|(id, f)| spec_augment(f, &policy, &mut policy.utterance_rng(id)))
        .collect::<Result<Vec<_>>>()?;
    let mut result = FeatureArchive::new();
    for ((id, _), f) in entries.iter().zip(augmented) {
        result.insert(*id, f)?;
    }
    write_feature_archive(&result, out)
}

fn vtln_train(ctx: &Ctx, manifest: &Path, model_path: &Path, assignments: Option<&Path>) -> Result<()> {
    let (records, waves) = ctx.load_audio(manifest)?;
    let corpus: Vec<NamedWave> = records
        .iter()
        .zip(waves)
        .map(|(r, wave)| NamedWave {
            id: r.utt_id.clone(),
            wave,
        })
        .collect();
    let trained = train_vtln(&corpus, &ctx.cfg.frontend(), &ctx.cfg.vtln_config())?;
    write_model(model_path, &trained.model)?;
    if let Some(p) = assignments {
        write_text(p, &render_assignments(&trained.assignments))?;
    }
    Ok(())
}

fn vtln_estimate(ctx: &Ctx, manifest: &Path, model_path: &Path, out: &Path) -> Result<()> {
    let model = read_model(model_path)?;
    let (records, waves) = ctx.load_audio(manifest)?;
    let assignments = records
        .par_iter()
        .zip(&waves)
        .map(|(r, w)| estimate_warp(&r.utt_id, &model.frontend.features(w)?, &model))
        .collect::<Result<Vec<_>>>()?;
    write_text(out, &render_assignments(&assignments))
}

fn score(ctx: &Ctx, a: &ScoreArgs) -> Result<()> {
    let records = load_manifest(&a.manifest)?;
    let hyps = read_hypotheses(&a.hyp)?;
    let mode = match a.unit {
        Some(Unit::Word) => TokenMode::Word,
        Some(Unit::Char) => TokenMode::Char,
        None => ctx.cfg.scoring.mode,
    };
    let mut opts = ctx.cfg.scoring.tokenize;
    opts.lowercase |= a.lowercase;
    opts.strip_punct |= a.strip_punct;
    let scores = group_scores(&records, &hyps, mode, opts)?;
    let csv = render_group_scores_csv(&scores);
    match &a.out {
        Some(p) => write_text(p, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn norm_style_map(specs: &[String]) -> Result<HashMap<SpeakingStyle, SpeakingStyle>> {
    let mut map = HashMap::new();
    map.insert(SpeakingStyle::HMI, SpeakingStyle::CTS);
    for s in specs {
        let (d, n) = s
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("--norm-style expects DIVERSE=NORM, got `{s}`")))?;
        let parse = |v: &str| v.parse::<SpeakingStyle>().map_err(Error::InvalidArgument);
        map.insert(parse(d)?, parse(n)?);
    }
    Ok(map)
}

struct Labeled {
    model: String,
    augmentation: String,
    normalization: String,
    report: BiasReport,
}

fn load_reports(source: &BiasSource, norm_style: &[String]) -> Result<Vec<Labeled>> {
    if let Some(p) = &source.wer_table {
        let table = read_wer_table(p)?;
        return table
            .rows
            .iter()
            .map(|r| {
                Ok(Labeled {
                    model: r.model.clone(),
                    augmentation: r.augmentation.clone(),
                    normalization: r.normalization.clone(),
                    report: r.bias_report()?,
                })
            })
            .collect();
    }
    let map = norm_style_map(norm_style)?;
    source
        .scores
        .iter()
        .map(|spec| {
            let (label, path) = match spec.rsplit_once('=') {
                Some((l, p)) => (Some(l), PathBuf::from(p)),
                None => (None, PathBuf::from(spec)),
            };
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let scores = parse_group_scores_csv(&text, &path)?;
            let styles = StyleRates::from_scores(&scores, |s| map.get(s).cloned().unwrap_or_else(|| s.clone()))?;
            let report = asrfair::scoring::bias_report(&styles)?;
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let (augmentation, normalization) = match label.and_then(|l| l.split_once('|')) {
                Some((a, n)) => (a.trim().to_string(), n.trim().to_string()),
                None => (label.unwrap_or(&stem).to_string(), "-".to_string()),
            };
            Ok(Labeled {
                model: stem,
                augmentation,
                normalization,
                report,
            })
        })
        .collect()
}

fn labeled(reports: &[Labeled]) -> Vec<LabeledReport<'_>> {
    reports
        .iter()
        .map(|r| LabeledReport {
            model: &r.model,
            augmentation: &r.augmentation,
            normalization: &r.normalization,
            report: &r.report,
        })
        .collect()
}

fn bias(a: &BiasArgs) -> Result<()> {
    let reports = load_reports(&a.source, &a.norm_style)?;
    let views = labeled(&reports);
    print!("{}", render_bias_text(&views));
    if let Some(p) = &a.csv {
        write_text(p, &render_bias_csv(&views))?;
    }
    if let Some(p) = &a.html {
        let table = ShadedTable::from_reports(&views);
        let scope = match a.shade_scope {
            Scope::Column => ShadeScope::Column,
            Scope::Table => ShadeScope::Table,
        };
        write_text(p, &render_shaded_html(&table, scope)?)?;
        write_text(&p.with_extension("csv"), &render_shaded_csv(&table)?)?;
    }
    Ok(())
}

fn plot_warps(manifest: &Path, warps: &Path, title: &str, out: &Path) -> Result<()> {
    let records = load_manifest(manifest)?;
    let warps = load_warps(warps)?;
    let mut groups: Vec<(SpeakerGroup, Vec<f64>)> = Vec::new();
    for r in &records {
        let idx = match groups.iter().position(|(g, _)| *g == r.group) {
            Some(i) => i,
            None => {
                groups.push((r.group.clone(), Vec::new()));
                groups.len() - 1
            }
        };
        if let Some(&a) = warps.get(&r.utt_id) {
            groups[idx].1.push(a);
        }
    }
    let stats: Vec<(String, _)> = warp_statistics(&groups)
        .into_iter()
        .map(|(g, s)| (g.label().to_string(), s))
        .collect();
    write_text(out, &plot_warp_boxplot(title, &stats)?)
}

fn plot_bias(
    source: &BiasSource,
    norm_style: &[String],
    rows: Option<&[String]>,
    title: &str,
    out: &Path,
) -> Result<()> {
    let reports = load_reports(source, norm_style)?;
    let chosen: Vec<&Labeled> = match rows {
        Some(keep) => {
            for k in keep {
                if !reports.iter().any(|r| &r.model == k) {
                    return Err(Error::InvalidArgument(format!("no model `{k}` in the input")));
                }
            }
            reports.iter().filter(|r| keep.contains(&r.model)).collect()
        }
        None => reports.iter().collect(),
    };
    let first = chosen
        .first()
        .ok_or_else(|| Error::InvalidArgument("no models to plot".into()))?;
    let groups: Vec<String> = first
        .report
        .styles
        .iter()
        .flat_map(|s| s.groups.iter().map(move |g| format!("{}:{}", s.style, g.group)))
        .collect();
    let series: Vec<BarSeries> = chosen
        .iter()
        .map(|r| BarSeries {
            label: format!("{} | {}", r.augmentation, r.normalization),
            values: r
                .report
                .styles
                .iter()
                .flat_map(|s| s.groups.iter().map(|g| g.bias))
                .collect(),
        })
        .collect();
    write_text(out, &plot_bias_bars(title, &groups, &series)?)
}

fn synth_corpus(ctx: &Ctx, a: &SynthArgs) -> Result<()> {
    if a.per_scale == 0 || a.scales.is_empty() {
        return Err(Error::InvalidArgument("need at least one scale and one utterance per scale".into()));
    }
    fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
    let mut records = Vec::new();
    for i in 0..a.per_scale {
        for &s in &a.scales {
            let wave = synth_utterance(s, a.vowels, a.rate, &mut rng)?;
            let id = format!("synth{i:03}-s{s}");
            let file = PathBuf::from(format!("{id}.wav"));
            write_wav(&wave, &a.out_dir.join(&file))?;
            let group = if s == 1.0 {
                SpeakerGroup::Norm
            } else {
                SpeakerGroup::Custom(format!("scale{s}"))
            };
            records.push(UtteranceRecord {
                utt_id: id.clone(),
                audio_path: file,
                transcript: String::new(),
                speaker_id: id,
                group,
                style: SpeakingStyle::Read,
            });
        }
    }
    write_text(&a.out_dir.join("manifest.tsv"), &render_manifest(&records))
}
