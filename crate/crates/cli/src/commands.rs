use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::num::NonZeroUsize;
use std::path::Path;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context};
use log::{info, warn};
use serde::Serialize;
use triplecheck_core::ingest::{read_jsonl, write_jsonl, write_report};
use triplecheck_core::similarity::{ExternalProvider, ExternalProviderConfig};
use triplecheck_core::{
    assemble_corpus, compare, parse_fact_file, score_corpus, select_top_types, tfidf_weights,
    ComparisonResult, Corpus, FactSet, ScoreError, ScoreMatrix, ScoreReport, ScoringMode,
    SimilarityProvider, TrigramProvider, TypeSet,
};

use crate::args::{Command, CompareArgs, ProviderArg, RunArgs, ScoreArgs, ScoringArgs, WeightsArgs};

/// Failure classes map onto exit codes 1 and 2.
#[derive(Debug)]
pub enum Failure {
    Validation(anyhow::Error),
    Provider(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Validation(e)
    }
}

fn scoring_failure(e: ScoreError) -> Failure {
    match &e {
        ScoreError::Similarity(s) if s.is_provider_failure() => Failure::Provider(e.into()),
        _ => Failure::Validation(e.into()),
    }
}

pub fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Weights(args) => weights(args),
        Command::Score(args) => score(args),
        Command::Compare(args) => compare_reports(args),
        Command::Run(args) => run(args),
    }
}

fn open_input(path: &str) -> anyhow::Result<Box<dyn BufRead>> {
    if path == "-" {
        Ok(Box::new(BufReader::new(io::stdin())))
    } else {
        let file = File::open(path).with_context(|| format!("cannot open {path}"))?;
        Ok(Box::new(BufReader::new(file)))
    }
}

fn check_inputs(inputs: &[String]) -> anyhow::Result<()> {
    if inputs.iter().filter(|p| *p == "-").count() > 1 {
        bail!("standard input (\"-\") can only be read once");
    }
    Ok(())
}

fn read_fact_sets(inputs: &[String]) -> anyhow::Result<Vec<FactSet>> {
    check_inputs(inputs)?;
    let mut all = Vec::new();
    for path in inputs {
        let parsed = parse_fact_file(open_input(path)?).with_context(|| path.clone())?;
        if parsed.duplicates > 0 {
            warn!("{path}: dropped {} duplicate fact(s)", parsed.duplicates);
        }
        all.extend(parsed.fact_sets);
    }
    Ok(all)
}

fn load_corpus(inputs: &[String]) -> anyhow::Result<Corpus> {
    let corpus = assemble_corpus(read_fact_sets(inputs)?)?;
    info!(
        "loaded {} document(s), models: {}",
        corpus.documents.len(),
        corpus.model_names.join(", ")
    );
    Ok(corpus)
}

fn open_output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn check_alpha(alpha: f64) -> anyhow::Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        bail!("--alpha must lie strictly between 0 and 1, got {alpha}");
    }
    Ok(())
}

fn timestamp(enabled: bool) -> Option<u64> {
    enabled.then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or_default()
    })
}

fn check_scoring(args: &ScoringArgs) -> anyhow::Result<()> {
    match (args.provider, &args.provider_url) {
        (ProviderArg::Trigram, Some(_)) => bail!("--provider-url requires --provider external"),
        (ProviderArg::External, None) => bail!("--provider external requires --provider-url"),
        _ => Ok(()),
    }
}

fn build_provider(args: &ScoringArgs) -> Result<Box<dyn SimilarityProvider>, Failure> {
    check_scoring(args)?;
    match (args.provider, &args.provider_url) {
        (ProviderArg::External, Some(url)) => {
            let config = ExternalProviderConfig::new(
                url.clone(),
                Duration::from_millis(args.provider_timeout_ms.get()),
            );
            ExternalProvider::connect(config)
                .map(|p| Box::new(p) as Box<dyn SimilarityProvider>)
                .map_err(|e| Failure::Provider(anyhow::Error::new(e).context("similarity provider unavailable")))
        }
        _ => Ok(Box::new(TrigramProvider)),
    }
}

fn jobs(args: &ScoringArgs) -> NonZeroUsize {
    args.jobs.unwrap_or_else(|| {
        std::thread::available_parallelism().unwrap_or(NonZeroUsize::MIN)
    })
}

fn top_types(corpus: &Corpus, top_n: NonZeroUsize) -> anyhow::Result<TypeSet> {
    let types = select_top_types(&tfidf_weights(corpus), top_n);
    if types.is_empty() {
        bail!("no entity types found in the source annotations");
    }
    info!("selected entity types: {}", types.types.join(", "));
    Ok(types)
}

fn score_all(corpus: &Corpus, args: &ScoringArgs) -> Result<(TypeSet, Vec<ScoreReport>), Failure> {
    let types = top_types(corpus, args.top_n)?;
    let provider = build_provider(args)?;
    let reports = score_corpus(corpus, &types, &provider, ScoringMode::from(args.mode), jobs(args))
        .map_err(scoring_failure)?;
    Ok((types, reports))
}

fn weights(args: WeightsArgs) -> Result<(), Failure> {
    let corpus = load_corpus(&args.input.input)?;
    let weights = tfidf_weights(&corpus);
    let ranking = match NonZeroUsize::new(weights.aggregate.len()) {
        Some(all) => select_top_types(&weights, all).types,
        None => Vec::new(),
    };
    let mut out = open_output(args.output.output.as_deref())?;
    let write = |out: &mut dyn Write| -> io::Result<()> {
        writeln!(out, "type\taggregate_weight\tdf\tselected")?;
        for (rank, ty) in ranking.iter().enumerate() {
            writeln!(
                out,
                "{ty}\t{}\t{}\t{}",
                weights.aggregate_weight(ty),
                weights.df[ty],
                rank < args.top_n.get()
            )?;
        }
        out.flush()
    };
    write(&mut out).context("writing weights")?;
    Ok(())
}

fn score(args: ScoreArgs) -> Result<(), Failure> {
    check_scoring(&args.scoring)?;
    let corpus = load_corpus(&args.input.input)?;
    let (_, reports) = score_all(&corpus, &args.scoring)?;
    let mut out = open_output(args.output.output.as_deref())?;
    write_jsonl(&reports, &mut out).context("writing reports")?;
    out.flush().context("writing reports")?;
    Ok(())
}

#[derive(Serialize)]
struct ComparisonDocument<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at: Option<u64>,
    #[serde(flatten)]
    comparison: &'a ComparisonResult,
}

fn compare_reports(args: CompareArgs) -> Result<(), Failure> {
    check_alpha(args.alpha)?;
    check_inputs(&args.input.input)?;
    let mut reports: Vec<ScoreReport> = Vec::new();
    for path in &args.input.input {
        reports.extend(read_jsonl(open_input(path)?).with_context(|| path.clone())?);
    }
    let matrix = ScoreMatrix::from_reports(&reports).context("building score matrix")?;
    let comparison = compare(&matrix, args.alpha).context("comparing models")?;
    let mut out = open_output(args.output.output.as_deref())?;
    let doc = ComparisonDocument {
        generated_at: timestamp(args.timestamps),
        comparison: &comparison,
    };
    write_report(&doc, &mut out).context("writing comparison")?;
    out.flush().context("writing comparison")?;
    Ok(())
}

#[derive(Serialize)]
struct RunDocument<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at: Option<u64>,
    top_n: usize,
    mode: ScoringMode,
    provider: &'static str,
    selected_types: &'a [String],
    reports: &'a [ScoreReport],
    comparison: Option<ComparisonResult>,
}

fn run(args: RunArgs) -> Result<(), Failure> {
    check_alpha(args.alpha)?;
    check_scoring(&args.scoring)?;
    let corpus = load_corpus(&args.input.input)?;
    let (types, reports) = score_all(&corpus, &args.scoring)?;

    let comparison = match ScoreMatrix::from_reports(&reports).and_then(|m| compare(&m, args.alpha)) {
        Ok(c) => Some(c),
        Err(e) => {
            warn!("model comparison skipped: {e}");
            None
        }
    };
    let doc = RunDocument {
        generated_at: timestamp(args.timestamps),
        top_n: args.scoring.top_n.get(),
        mode: args.scoring.mode.into(),
        provider: match args.scoring.provider {
            ProviderArg::Trigram => "trigram",
            ProviderArg::External => "external",
        },
        selected_types: &types.types,
        reports: &reports,
        comparison,
    };
    let mut out = open_output(args.output.output.as_deref())?;
    write_report(&doc, &mut out).context("writing run output")?;
    out.flush().context("writing run output")?;
    Ok(())
}
