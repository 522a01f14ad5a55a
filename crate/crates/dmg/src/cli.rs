//! Command-line entry point.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::corpus::io::{load_songs_jsonl, save_songs_jsonl, write_atomic};
use crate::corpus::key::normalize_key;
use crate::corpus::split::split_corpus;
use crate::corpus::syllabify::{load_dict_tsv, syllabify};
use crate::corpus::synth::generate_synthetic_corpus;
use crate::corpus::tokens::pair_lines;
use crate::decode::{generate, src_from_lines, to_midi_bytes, Generation, Melody};
use crate::error::{DmgError, Result};
use crate::eval::{
    alignment_rate, histogram_csv, histogram_gnuplot, pitch_histogram, posterior_accuracy,
    style_divergence, tonality_score, MetricReport,
};
use crate::model::config::QVariant;
use crate::model::posterior::for_variant;
use crate::model::{load_checkpoint, LoadedCheckpoint};
use crate::training::{fit, TrainConfig};

#[derive(Parser)]
#[command(name = "dmg", version, about = "Style-conditioned melody generation from lyrics")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic style-labeled corpus
    Synth {
        #[arg(long, default_value_t = 200)]
        songs: usize,
        #[arg(long, default_value_t = 2)]
        styles: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Normalize keys, tokenize and report split sizes
    Preprocess {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Pronunciation dictionary (TSV: char <tab> syllable)
        #[arg(long)]
        dict: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train the pitch and duration networks
    Train {
        /// JSON training config; flags below override its fields
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        k_styles: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        /// Posterior estimator: gru or lp
        #[arg(long)]
        q: Option<String>,
        /// Train the two networks on separate threads
        #[arg(long)]
        parallel: bool,
    },
    /// Generate a melody for a lyrics file
    Generate {
        #[arg(long)]
        style_id: usize,
        #[arg(long)]
        lyrics_file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Directory holding the pitch/duration checkpoints from `train`
        #[arg(long)]
        model_dir: PathBuf,
        #[arg(long)]
        dict: Option<PathBuf>,
    },
    /// Generate over the test split and report objective metrics
    Eval {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        model_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Convert a melody JSON file to a standard MIDI file
    ExportMidi {
        #[arg(long)]
        melody: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Synth {
            songs,
            styles,
            seed,
            out,
        } => {
            let corpus = generate_synthetic_corpus(songs, styles, seed)?;
            save_songs_jsonl(&out, &corpus)?;
            println!("wrote {} songs to {}", corpus.len(), out.display());
        }
        Cmd::Preprocess {
            input,
            out,
            dict,
            seed,
        } => {
            let dict = dict.map(|p| load_dict_tsv(&p)).transpose()?;
            let songs = load_songs_jsonl(&input, dict.as_ref())?;
            let normalized: Vec<_> = songs
                .iter()
                .map(normalize_key)
                .collect::<Result<_>>()?;
            save_songs_jsonl(&out, &normalized)?;
            let pairs: usize = normalized
                .iter()
                .map(|s| pair_lines(s).map(|p| p.len()))
                .sum::<Result<usize>>()?;
            let split = split_corpus(&normalized, seed)?;
            println!(
                "normalized {} songs ({} aligned pairs); split {}/{}/{} train/valid/test",
                normalized.len(),
                pairs,
                split.train.len(),
                split.valid.len(),
                split.test.len()
            );
        }
        Cmd::Train {
            config,
            corpus,
            out,
            seed,
            lambda,
            mu,
            epochs,
            k_styles,
            batch_size,
            learning_rate,
            q,
            parallel,
        } => {
            let mut cfg = match config {
                Some(path) => TrainConfig::from_json_file(&path)?,
                None => TrainConfig::default(),
            };
            if let Some(v) = seed {
                cfg.seed = v;
            }
            if let Some(v) = lambda {
                cfg.lambda = v;
            }
            if let Some(v) = mu {
                cfg.mu = v;
            }
            if let Some(v) = epochs {
                cfg.epochs = v;
            }
            if let Some(v) = k_styles {
                cfg.k_styles = v;
            }
            if let Some(v) = batch_size {
                cfg.batch_size = v;
            }
            if let Some(v) = learning_rate {
                cfg.learning_rate = v;
            }
            if let Some(name) = q {
                cfg.q_variant = QVariant::parse(&name)?;
            }
            cfg.validate()?;

            let songs = load_songs_jsonl(&corpus, None)?;
            let normalized: Vec<_> = songs
                .iter()
                .map(normalize_key)
                .collect::<Result<_>>()?;
            let split = split_corpus(&normalized, cfg.seed)?;
            std::fs::create_dir_all(&out)?;
            let report = fit(&split, &cfg, &out, parallel)?;
            println!(
                "pitch best val ce {:.4} -> {}; duration best val ce {:.4} -> {}",
                report.pitch.best_val_ce,
                report.pitch.checkpoint_base.display(),
                report.duration.best_val_ce,
                report.duration.checkpoint_base.display()
            );
        }
        Cmd::Generate {
            style_id,
            lyrics_file,
            out,
            model_dir,
            dict,
        } => {
            let (pitch, dur) = load_model(&model_dir)?;
            if style_id >= pitch.params.cfg.n_styles {
                return Err(DmgError::invalid(format!(
                    "style id {style_id} out of range (model has {} styles)",
                    pitch.params.cfg.n_styles
                )));
            }
            let dict = dict.map(|p| load_dict_tsv(&p)).transpose()?;
            let lines = read_lyric_lines(&lyrics_file, dict.as_ref())?;
            let src = src_from_lines(&lines)?;
            let gen = generate(&src, style_id, &pitch, &dur)?;
            write_atomic(&out, generation_json(&gen)?.as_bytes())?;
            println!(
                "generated {} events over {} source tokens -> {}",
                gen.melody.events.len(),
                src.len(),
                out.display()
            );
        }
        Cmd::Eval {
            corpus,
            model_dir,
            out,
            seed,
        } => {
            let report = run_eval(&corpus, &model_dir, &out, seed)?;
            println!(
                "tonality {:.4} | style divergence {:.4} | alignment {:.4} | posterior acc {:.4}",
                report.tonality,
                report.style_divergence,
                report.alignment_rate,
                report.posterior_accuracy
            );
        }
        Cmd::ExportMidi { melody, out } => {
            let text = std::fs::read_to_string(&melody)?;
            let melody = melody_from_text(&text)?;
            write_atomic(&out, &to_midi_bytes(&melody)?)?;
            println!("wrote {} notes to {}", melody.events.len(), out.display());
        }
    }
    Ok(())
}

fn load_model(dir: &Path) -> Result<(LoadedCheckpoint, LoadedCheckpoint)> {
    let pitch = load_checkpoint(&dir.join("pitch"))?;
    let dur = load_checkpoint(&dir.join("duration"))?;
    Ok((pitch, dur))
}

fn read_lyric_lines(
    path: &Path,
    dict: Option<&crate::corpus::syllabify::PronDict>,
) -> Result<Vec<Vec<String>>> {
    let text = std::fs::read_to_string(path)?;
    let lines: Vec<Vec<String>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| match dict {
            Some(d) => syllabify(l.trim(), d),
            None => l.split_whitespace().map(str::to_string).collect(),
        })
        .collect();
    if lines.is_empty() {
        return Err(DmgError::invalid(format!(
            "no lyric lines in {}",
            path.display()
        )));
    }
    Ok(lines)
}

fn generation_json(gen: &Generation) -> Result<String> {
    let melody: serde_json::Value = serde_json::from_str(&gen.melody.to_json()?)?;
    Ok(serde_json::to_string_pretty(&serde_json::json!({
        "src": gen.src,
        "pitch_tokens": gen.pitch_tokens,
        "dur_tokens": gen.dur_tokens,
        "melody": melody,
    }))?)
}

/// Accepts either a bare melody JSON or the `generate` output wrapping one.
fn melody_from_text(text: &str) -> Result<Melody> {
    if let Ok(m) = Melody::from_json(text) {
        return Ok(m);
    }
    let value: serde_json::Value = serde_json::from_str(text)?;
    match value.get("melody") {
        Some(inner) => Melody::from_json(&inner.to_string()),
        None => Err(DmgError::invalid("file holds neither a melody nor a generation")),
    }
}

fn run_eval(corpus: &Path, model_dir: &Path, out: &Path, seed: u64) -> Result<MetricReport> {
    let (pitch, dur) = load_model(model_dir)?;
    let n_styles = pitch.params.cfg.n_styles;

    let songs = load_songs_jsonl(corpus, None)?;
    let normalized: Vec<_> = songs.iter().map(normalize_key).collect::<Result<_>>()?;
    let split = split_corpus(&normalized, seed)?;
    let pairs = if split.test.is_empty() {
        &split.train
    } else {
        &split.test
    };

    let mut melodies = Vec::new();
    let mut streams = Vec::new();
    let mut q_items = Vec::new();
    for pair in pairs {
        for style in 0..n_styles {
            let gen = generate(&pair.src, style, &pitch, &dur)?;
            let idx: Vec<usize> = gen
                .pitch_tokens
                .iter()
                .map(|t| pitch.vocab_tgt.get_or_unk(t))
                .collect();
            q_items.push((idx, style));
            streams.push((pair.src.clone(), gen.pitch_tokens.clone(), gen.dur_tokens.clone()));
            melodies.push((gen.melody, style));
        }
    }

    let tonality = melodies
        .iter()
        .map(|(m, _)| tonality_score(m))
        .sum::<Result<f64>>()?
        / melodies.len() as f64;
    let hist_all = pitch_histogram(&melodies, None)?;
    let divergence = if n_styles >= 2 {
        let h0 = pitch_histogram(&melodies, Some(0))?;
        let h1 = pitch_histogram(&melodies, Some(1))?;
        style_divergence(&h0, &h1)?
    } else {
        0.0
    };
    let alignment = alignment_rate(&streams)?;
    let q = match pitch
        .extra
        .as_ref()
        .and_then(|e| e.pointer("/train_config/q_variant"))
        .and_then(|v| v.as_str())
    {
        Some(name) => crate::model::posterior::by_name(name)?,
        None => for_variant(QVariant::Gru),
    };
    let accuracy = posterior_accuracy(&pitch.params, q.as_ref(), &q_items)?;

    let report = MetricReport {
        tonality,
        pitch_histogram: hist_all.to_vec(),
        style_divergence: divergence,
        alignment_rate: alignment,
        posterior_accuracy: accuracy,
    };
    std::fs::create_dir_all(out)?;
    write_atomic(&out.join("report.json"), report.to_json()?.as_bytes())?;
    write_atomic(&out.join("report.csv"), report.to_csv().as_bytes())?;
    for style in 0..n_styles {
        let hist = pitch_histogram(&melodies, Some(style))?;
        write_atomic(
            &out.join(format!("hist_style{style}.csv")),
            histogram_csv(&hist).as_bytes(),
        )?;
        write_atomic(
            &out.join(format!("hist_style{style}.dat")),
            histogram_gnuplot(&hist).as_bytes(),
        )?;
    }
    write_atomic(&out.join("hist_all.csv"), histogram_csv(&hist_all).as_bytes())?;
    Ok(report)
}
