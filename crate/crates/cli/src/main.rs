mod args;
mod fetch;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use awe_core::corpus::{EncodedCorpus, Vocabulary};
use awe_core::eval::{self, SimilarityDataset, WordEmbeddings};
use awe_core::io::{self as aio, AnyCheckpoint, Checkpoint, Embeddings, CHECKPOINT_MAGIC};
use awe_core::subword::{LemmaTable, SubwordMap};
use awe_core::trainer::{TrainConfig, TrainState, Trainer};
use awe_core::{inspect, Mode, Real};
use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command, DTypeArg, EvalArgs, ExportArgs, InspectArgs, NnArgs, TrainArgs};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .format_target(false)
        .init();

    let result = match cli.command {
        Command::Train(a) => train(*a),
        Command::Eval(a) => evaluate(a),
        Command::Inspect(a) => inspect_cmd(a),
        Command::Nn(a) => neighbors(a),
        Command::Export(a) => export(a),
        Command::FetchData(a) => fetch::run(&a.dest),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Defaults, then the config file, then flags.
fn resolve_config(a: &TrainArgs) -> Result<(TrainConfig, Option<String>)> {
    let (mut c, text) = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let c: TrainConfig = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            (c, Some(text))
        }
        None => (TrainConfig::default(), None),
    };
    macro_rules! set {
        ($flag:expr => $($field:tt)+) => {
            if let Some(v) = $flag {
                c.$($field)+ = v.into();
            }
        };
    }
    set!(a.mode => mode);
    set!(a.dim => dim);
    set!(a.dim_kq => dim_kq);
    set!(a.window => window);
    set!(a.negatives => negatives);
    set!(a.epochs => epochs);
    set!(a.lr => initial_lr);
    set!(a.kq_lr_mult => kq_lr_multiplier);
    set!(a.min_count => vocab.min_count);
    set!(a.subsample => vocab.subsample);
    set!(a.workers => workers);
    set!(a.seed => seed);
    set!(a.attn_clamp => model.attn_clamp);
    set!(a.logit_clamp => model.logit_clamp);
    if a.min_lr.is_some() {
        c.min_lr = a.min_lr;
    }
    if let Some(clip) = a.max_grad_norm {
        c.max_grad_norm = (clip > 0.0).then_some(clip);
    }
    if a.max_vocab.is_some() {
        c.vocab.max_size = a.max_vocab;
    }
    if a.normalize_attention {
        c.model.normalize_attention = true;
    }
    match a.progress_every {
        Some(0) => c.progress_interval = None,
        Some(n) => c.progress_interval = Some(n),
        None if c.progress_interval.is_none() && text.is_none() => c.progress_interval = Some(1_000_000),
        None => {}
    }
    c.validate()?;
    Ok((c, text))
}

fn train(a: TrainArgs) -> Result<()> {
    if let Some(ckpt) = &a.resume {
        return match AnyCheckpoint::load(ckpt)? {
            AnyCheckpoint::F32(c) => resume_with(c, &a),
            AnyCheckpoint::F64(c) => resume_with(c, &a),
        };
    }
    let (config, config_text) = resolve_config(&a)?;
    log::info!("building vocabulary from {} file(s)", a.corpus.len());
    let vocab = Vocabulary::from_files(&a.corpus, &config.vocab)?;
    log::info!("{} words, {} tokens", vocab.len(), vocab.total_tokens());

    let subwords = match (config.mode, &a.lemmas) {
        (Mode::AweS, Some(path)) => {
            let table = LemmaTable::read_tsv(path)?;
            let sw = SubwordMap::build(&vocab, &table);
            log::info!("{} subword units for {} words", sw.num_units(), vocab.len());
            Some(sw)
        }
        (Mode::AweS, None) => {
            log::warn!("awe-s without --lemmas: every word is its own single unit, which reduces to awe");
            Some(SubwordMap::singletons(&vocab))
        }
        (_, Some(_)) => {
            log::warn!("--lemmas is only used in awe-s mode; ignoring it");
            None
        }
        (_, None) => None,
    };

    let corpus = EncodedCorpus::from_files(&a.corpus, &vocab)?;
    match a.dtype.unwrap_or(DTypeArg::F32) {
        DTypeArg::F32 => {
            let t = Trainer::<f32>::new(config.clone(), &vocab, subwords.as_ref(), &corpus)?;
            run_training(t, &config, &vocab, subwords.as_ref(), config_text, &a)
        }
        DTypeArg::F64 => {
            let t = Trainer::<f64>::new(config.clone(), &vocab, subwords.as_ref(), &corpus)?;
            run_training(t, &config, &vocab, subwords.as_ref(), config_text, &a)
        }
    }
}

/// Continues a checkpoint; only the epoch count, workers and progress
/// interval may change.
fn resume_with<T: Real>(ck: Checkpoint<T>, a: &TrainArgs) -> Result<()> {
    let mut config = ck.config.clone();
    if let Some(e) = a.epochs {
        config.epochs = e;
    }
    if let Some(w) = a.workers {
        config.workers = w;
    }
    if let Some(p) = a.progress_every {
        config.progress_interval = (p > 0).then_some(p);
    }
    let ignored = a.mode.is_some()
        || a.dim.is_some()
        || a.dim_kq.is_some()
        || a.lemmas.is_some()
        || a.config.is_some()
        || a.min_count.is_some()
        || a.seed.is_some()
        || a.lr.is_some();
    if ignored {
        log::warn!("resuming: model, vocabulary and schedule settings come from the checkpoint");
    }
    let corpus = EncodedCorpus::from_files(&a.corpus, &ck.vocab)?;
    log::info!(
        "resuming after epoch {} of {}",
        ck.state.epochs_completed,
        config.epochs
    );
    let t = Trainer::resume(
        config.clone(),
        &ck.vocab,
        ck.subwords.as_ref(),
        &corpus,
        ck.params.clone(),
        ck.state,
    )?;
    run_training(t, &config, &ck.vocab, ck.subwords.as_ref(), None, a)
}

fn run_training<T: Real>(
    mut t: Trainer<'_, T>,
    config: &TrainConfig,
    vocab: &Vocabulary,
    subwords: Option<&SubwordMap>,
    config_text: Option<String>,
    a: &TrainArgs,
) -> Result<()> {
    let save = |params: &awe_core::ModelParams<T>, state: TrainState| -> Result<()> {
        Checkpoint {
            config: config.clone(),
            vocab: vocab.clone(),
            subwords: subwords.cloned(),
            params: params.clone(),
            state,
        }
        .save(&a.out)
        .with_context(|| format!("saving {}", a.out.display()))
    };
    while !t.is_done() {
        let stats = t.train_epoch()?;
        log::info!(
            "epoch {} done: mean loss {:.4}, {:.0} windows/sec",
            stats.epoch,
            stats.mean_loss,
            stats.windows_per_sec
        );
        save(t.params(), t.state())?;
    }
    if t.report().epochs.is_empty() {
        save(t.params(), t.state())?;
    }
    let mut report = t.report().clone();
    report.config_file = config_text;
    if let Some(path) = &a.report {
        write_json(path, &report)?;
    }
    log::info!("saved {}", a.out.display());
    Ok(())
}

fn write_json<S: serde::Serialize>(path: &Path, value: &S) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

enum Loaded {
    Checkpoint(Box<AnyCheckpoint>),
    Vectors(Embeddings),
}

fn load_model(path: &Path) -> Result<Loaded> {
    let mut head = [0u8; 8];
    let n = std::fs::File::open(path)
        .and_then(|mut f| std::io::Read::read(&mut f, &mut head))
        .with_context(|| format!("opening {}", path.display()))?;
    if n == 8 && &head == CHECKPOINT_MAGIC {
        Ok(Loaded::Checkpoint(Box::new(AnyCheckpoint::load(path)?)))
    } else {
        Ok(Loaded::Vectors(aio::import_text(path)?))
    }
}

/// Runs `f` on whatever `path` holds, as word embeddings.
fn with_embeddings<R>(path: &Path, f: impl FnOnce(&dyn WordEmbeddings) -> Result<R>) -> Result<R> {
    match load_model(path)? {
        Loaded::Vectors(e) => f(&e),
        Loaded::Checkpoint(ck) => match *ck {
            AnyCheckpoint::F32(c) => f(&c.model()?),
            AnyCheckpoint::F64(c) => f(&c.model()?),
        },
    }
}

fn resolve_dataset(name: &str, data_dir: &Path) -> Result<PathBuf> {
    let direct = PathBuf::from(name);
    if direct.is_file() {
        return Ok(direct);
    }
    if let Some(p) = fetch::dataset_path(data_dir, name) {
        return Ok(p);
    }
    bail!(
        "dataset {name:?} is neither a file nor a fetched dataset in {} (run `awe fetch-data`)",
        data_dir.display()
    )
}

fn evaluate(a: EvalArgs) -> Result<()> {
    let datasets = a
        .dataset
        .iter()
        .map(|d| SimilarityDataset::load(&resolve_dataset(d, &a.data_dir)?).map_err(Into::into))
        .collect::<Result<Vec<_>>>()?;
    let reports = with_embeddings(&a.model, |emb| {
        datasets
            .iter()
            .map(|d| eval::evaluate(emb, d).map_err(Into::into))
            .collect::<Result<Vec<_>>>()
    })?;
    let name = a
        .model
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".into());
    print!("{}", eval::score_table(&[(name, reports.clone())]));
    if let Some(path) = &a.report {
        write_json(path, &reports)?;
    }
    Ok(())
}

fn inspect_cmd(a: InspectArgs) -> Result<()> {
    let table = match AnyCheckpoint::load(&a.model)? {
        AnyCheckpoint::F32(c) => inspect::attention_table_for(&a.sentence, &a.mask, &c.model()?, a.frequent)?,
        AnyCheckpoint::F64(c) => inspect::attention_table_for(&a.sentence, &a.mask, &c.model()?, a.frequent)?,
    };
    let mut out = std::io::stdout().lock();
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&table)?)?;
    } else {
        write!(out, "{}", table.render())?;
    }
    Ok(())
}

fn neighbors(a: NnArgs) -> Result<()> {
    let nn = with_embeddings(&a.model, |emb| Ok(eval::nearest_neighbors(emb, &a.word, a.k)?))?;
    let mut out = std::io::stdout().lock();
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&nn)?)?;
    } else {
        let w = nn.iter().map(|(w, _)| w.len()).max().unwrap_or(0);
        for (word, cos) in &nn {
            writeln!(out, "{word:<w$}  {cos:.4}")?;
        }
    }
    Ok(())
}

fn export(a: ExportArgs) -> Result<()> {
    with_embeddings(&a.model, |emb| {
        if a.binary {
            aio::export_binary(emb, &a.out)?;
        } else {
            aio::export_text(emb, &a.out)?;
        }
        log::info!(
            "wrote {} vectors of dimension {} to {}",
            emb.len(),
            emb.dim(),
            a.out.display()
        );
        Ok(())
    })
}
