//! The `ontodiff` command line: each subcommand reads its inputs, writes
//! its outputs into `--out`, records the effective configuration next to
//! them and returns the text it prints.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ontodiff_core::calibration::{calibrate, read_responses, write_calibration};
use ontodiff_core::features::{feature_report, Feature};
use ontodiff_core::irt::{CategoryVerdicts, DifficultyLevel, LearnerCategory, ThetaMap};
use ontodiff_core::model::{cross_validate, default_mask, train, CvReport, Hyper, LogisticModel};
use ontodiff_core::question::{generate_all, read_questions, select_patterns, write_questions};
use ontodiff_core::records::{read_any, write_records, write_records_csv, LabeledDataset, TrainingRecord};
use ontodiff_core::report::{agreement, read_levels, write_predictions, LevelTally, Prediction};
use ontodiff_core::selection::{majority_last, rank_all, FeatureRanking, Method};
use ontodiff_core::{Ontology, Question, SourceFormat};

#[derive(Debug, Parser)]
#[command(name = "ontodiff", version, about = "Question generation and difficulty prediction over OWL ontologies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Instantiate question patterns over an ontology.
    Generate(GenerateArgs),
    /// Compute the five difficulty features of generated questions.
    Featurize(FeaturizeArgs),
    /// Rank features per learner category with three filter methods.
    RankFeatures(RankArgs),
    /// Train and cross-validate one logistic model per learner category.
    Train(TrainArgs),
    /// Predict difficulty levels with trained models.
    Predict(PredictArgs),
    /// Estimate item difficulty from learner responses.
    Calibrate(CalibrateArgs),
    /// Compare predicted levels with gold levels.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    /// Pick from the file extension (`.nt` is N-Triples, anything else Turtle).
    Auto,
    Turtle,
    Ntriples,
}

#[derive(Debug, Clone, Args)]
pub struct OntologyArgs {
    #[arg(long)]
    pub ontology: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    pub format: FormatArg,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub source: OntologyArgs,
    /// Comma-separated pattern ids; all built-in patterns when omitted.
    #[arg(long, value_delimiter = ',')]
    pub patterns: Vec<String>,
    /// Maximum questions per pattern.
    #[arg(long, default_value_t = 100)]
    pub limit: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct FeaturizeArgs {
    #[command(flatten)]
    pub source: OntologyArgs,
    #[arg(long)]
    pub questions: PathBuf,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CategoryFiles {
    /// Labeled records for experts.
    #[arg(long)]
    pub expert: PathBuf,
    #[arg(long)]
    pub intermediate: PathBuf,
    #[arg(long)]
    pub beginner: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub data: CategoryFiles,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskChoice {
    /// Drop the feature the reference rankings found least influential.
    Default,
    /// Drop the feature the rankings of this data find least influential.
    Ranked,
    /// Use all five features.
    All,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: CategoryFiles,
    #[arg(long, value_enum, default_value_t = MaskChoice::Default)]
    pub masks: MaskChoice,
    #[arg(long, default_value_t = 0.1)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 5000)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub l2: f64,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    /// Directory holding `model-<category>.txt` files.
    #[arg(long)]
    pub models: PathBuf,
    /// Precomputed feature records.
    #[arg(long, conflicts_with_all = ["ontology", "questions"])]
    pub features: Option<PathBuf>,
    #[arg(long, requires = "questions")]
    pub ontology: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    pub format: FormatArg,
    #[arg(long, requires = "ontology")]
    pub questions: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CalibrateArgs {
    /// CSV with columns item_id, learner_id, category, correct.
    #[arg(long)]
    pub responses: PathBuf,
    #[arg(long, default_value = "expert=1.25,intermediate=0,beginner=-1.25")]
    pub thetas: ThetaMap,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Tab-separated file with `id` and `level` columns.
    #[arg(long)]
    pub predictions: PathBuf,
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Also write the summary to `<out>/report.txt`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Effective settings of one run, written as `<command>.config.json`.
#[derive(Debug, Default, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub inputs: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<FormatArg>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub patterns: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hyper: Option<HyperConfig>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub masks: BTreeMap<String, Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thetas: Option<BTreeMap<String, f64>>,
    pub out: String,
}

#[derive(Debug, Serialize)]
pub struct HyperConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub folds: usize,
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

fn save_config(dir: &Path, config: &RunConfig) -> Result<()> {
    let mut json = serde_json::to_string_pretty(config)?;
    json.push('\n');
    write_file(dir, &format!("{}.config.json", config.command), json.as_bytes())?;
    Ok(())
}

fn source_format(path: &Path, format: FormatArg) -> SourceFormat {
    match format {
        FormatArg::Auto => SourceFormat::from_path(path),
        FormatArg::Turtle => SourceFormat::Turtle,
        FormatArg::Ntriples => SourceFormat::NTriples,
    }
}

pub fn load_ontology(path: &Path, format: FormatArg) -> Result<Ontology> {
    let text = read_text(path)?;
    Ontology::parse_str(&text, source_format(path, format)).with_context(|| format!("{}", path.display()))
}

fn load_questions(path: &Path) -> Result<Vec<Question>> {
    let text = read_text(path)?;
    read_questions(text.as_bytes()).with_context(|| format!("{}", path.display()))
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<String> {
    let o = load_ontology(&args.source.ontology, args.source.format)?;
    let patterns = select_patterns(&args.patterns)?;
    let questions = generate_all(&o, &patterns, args.limit)?;
    let mut buf = Vec::new();
    write_questions(&mut buf, &questions)?;
    write_file(&args.out, "questions.tsv", &buf)?;
    save_config(
        &args.out,
        &RunConfig {
            command: "generate".into(),
            seed: args.seed,
            inputs: BTreeMap::from([("ontology".into(), display(&args.source.ontology))]),
            format: Some(args.source.format),
            patterns: patterns.iter().map(|p| p.id().to_string()).collect(),
            limit: Some(args.limit),
            out: display(&args.out),
            ..RunConfig::default()
        },
    )?;
    let mut out = String::new();
    for w in o.warnings() {
        writeln!(out, "warning: {w}")?;
    }
    for p in &patterns {
        let n = questions.iter().filter(|q| q.pattern_id == p.id()).count();
        writeln!(out, "{}\t{n}", p.id())?;
    }
    writeln!(out, "total\t{}", questions.len())?;
    Ok(out)
}

/// Feature records for `questions`, with the flags raised for each.
pub fn featurize(o: &Ontology, questions: &[Question]) -> Result<Vec<(TrainingRecord, Vec<String>)>> {
    questions
        .iter()
        .map(|q| {
            q.check(o).map_err(|e| anyhow::anyhow!("question {} does not fit the ontology: {e}", q.id))?;
            let (v, flags) = feature_report(o, q)?;
            Ok((
                TrainingRecord::unlabeled(q.id.clone(), v),
                flags.iter().map(ToString::to_string).collect(),
            ))
        })
        .collect()
}

pub fn cmd_featurize(args: &FeaturizeArgs) -> Result<String> {
    let o = load_ontology(&args.source.ontology, args.source.format)?;
    let questions = load_questions(&args.questions)?;
    let rows = featurize(&o, &questions)?;
    let records: Vec<TrainingRecord> = rows.iter().map(|(r, _)| r.clone()).collect();
    let mut text = Vec::new();
    write_records(&mut text, &records)?;
    write_file(&args.out, "features.txt", &text)?;
    let mut csv = Vec::new();
    write_records_csv(&mut csv, &records)?;
    write_file(&args.out, "features.csv", &csv)?;
    let mut flags = String::from("id\tflag\n");
    let mut flagged = 0;
    for (r, fs) in &rows {
        flagged += usize::from(!fs.is_empty());
        for f in fs {
            writeln!(flags, "{}\t{f}", r.id)?;
        }
    }
    write_file(&args.out, "flags.tsv", flags.as_bytes())?;
    save_config(
        &args.out,
        &RunConfig {
            command: "featurize".into(),
            seed: args.seed,
            inputs: BTreeMap::from([
                ("ontology".into(), display(&args.source.ontology)),
                ("questions".into(), display(&args.questions)),
            ]),
            format: Some(args.source.format),
            out: display(&args.out),
            ..RunConfig::default()
        },
    )?;
    Ok(format!("featurized {} questions, {flagged} with flags\n", records.len()))
}

fn load_dataset(category: LearnerCategory, path: &Path) -> Result<LabeledDataset> {
    let records = read_any(&read_text(path)?).with_context(|| format!("{}", path.display()))?;
    LabeledDataset::from_records(category, records).with_context(|| format!("{}", path.display()))
}

fn load_datasets(files: &CategoryFiles) -> Result<Vec<LabeledDataset>> {
    LearnerCategory::ALL
        .into_iter()
        .map(|c| {
            let path = match c {
                LearnerCategory::Expert => &files.expert,
                LearnerCategory::Intermediate => &files.intermediate,
                LearnerCategory::Beginner => &files.beginner,
            };
            load_dataset(c, path)
        })
        .collect()
}

fn category_inputs(files: &CategoryFiles) -> BTreeMap<String, String> {
    BTreeMap::from([
        ("expert".into(), display(&files.expert)),
        ("intermediate".into(), display(&files.intermediate)),
        ("beginner".into(), display(&files.beginner)),
    ])
}

/// Aligned methods × features table for one category.
fn ranking_table(category: LearnerCategory, rankings: &[FeatureRanking]) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<14}{:<4}", category.name(), "");
    for f in Feature::ALL {
        let _ = write!(out, "{:>16}", f.name());
    }
    let _ = writeln!(out);
    for r in rankings {
        let _ = write!(out, "{:<14}{:<4}", "", r.method.short());
        for f in Feature::ALL {
            let mark = if r.last() == f { "*" } else { " " };
            let _ = write!(out, "{:>15.4}{mark}", r.score(f));
        }
        let _ = writeln!(out);
    }
    out
}

pub fn cmd_rank_features(args: &RankArgs) -> Result<String> {
    let datasets = load_datasets(&args.data)?;
    let mut text = String::new();
    let mut csv = String::from("category,method,feature,score,rank\n");
    for d in &datasets {
        let rankings = rank_all(d).with_context(|| format!("{} data", d.category))?;
        text.push_str(&ranking_table(d.category, &rankings));
        let verdict = majority_last(&rankings).map_or("none (no majority)".to_string(), |f| f.name().to_string());
        writeln!(text, "{:<18}least influential: {verdict}\n", "")?;
        for r in &rankings {
            for (rank, f) in r.order().iter().enumerate() {
                writeln!(csv, "{},{},{},{:.6},{}", d.category, r.method, f.name(), r.score(*f), rank + 1)?;
            }
        }
    }
    writeln!(text, "* lowest score for the method; IG = {}, RF = {}, CB = {}", Method::InfoGain, Method::ReliefF, Method::Correlation)?;
    write_file(&args.out, "rankings.csv", csv.as_bytes())?;
    write_file(&args.out, "rankings.txt", text.as_bytes())?;
    save_config(
        &args.out,
        &RunConfig {
            command: "rank-features".into(),
            seed: args.seed,
            inputs: category_inputs(&args.data),
            out: display(&args.out),
            ..RunConfig::default()
        },
    )?;
    Ok(text)
}

fn model_file(category: LearnerCategory) -> String {
    format!("model-{category}.txt")
}

fn feature_names(mask: &[Feature]) -> Vec<String> {
    mask.iter().map(|f| f.name().to_string()).collect()
}

pub fn cmd_train(args: &TrainArgs) -> Result<String> {
    let datasets = load_datasets(&args.data)?;
    let hyper = Hyper {
        learning_rate: args.learning_rate,
        epochs: args.epochs,
        l2: args.l2,
        seed: args.seed,
    };
    let mut text = String::new();
    let mut cv_rows = String::from("category\tmask\tmean_accuracy");
    for k in 1..=args.folds {
        write!(cv_rows, "\tfold_{k}")?;
    }
    cv_rows.push_str("\ttp\tfp\ttn\tfn\n");
    let mut masks = BTreeMap::new();
    for d in &datasets {
        let (mask, why) = match args.masks {
            MaskChoice::All => (Feature::ALL.to_vec(), "all features".to_string()),
            MaskChoice::Default => {
                let mask = default_mask(d.category);
                let dropped = Feature::ALL.into_iter().find(|f| !mask.contains(f)).expect("default masks drop one feature");
                (mask, format!("default mask, without {dropped}"))
            }
            MaskChoice::Ranked => match majority_last(&rank_all(d)?) {
                Some(dropped) => (
                    Feature::ALL.into_iter().filter(|f| *f != dropped).collect(),
                    format!("ranked mask, without {dropped}"),
                ),
                None => (Feature::ALL.to_vec(), "ranked mask, no majority so all features".to_string()),
            },
        };
        let model = train(d, &mask, hyper).with_context(|| format!("{} model", d.category))?;
        let cv: CvReport =
            cross_validate(d, &mask, hyper, args.folds).with_context(|| format!("{} cross-validation", d.category))?;
        write_file(&args.out, &model_file(d.category), model.to_text().as_bytes())?;
        let names = feature_names(&mask);
        write!(cv_rows, "{}\t{}\t{:.2}", d.category, names.join(","), cv.mean_accuracy)?;
        for a in &cv.fold_accuracies {
            write!(cv_rows, "\t{a:.2}")?;
        }
        writeln!(cv_rows, "\t{}\t{}\t{}\t{}", cv.tp, cv.fp, cv.tn, cv.fn_)?;
        writeln!(
            text,
            "{:<14}{:>6.2}%  ({} records, {why}, final loss {:.4})",
            d.category.name(),
            cv.mean_accuracy,
            d.len(),
            model.final_loss
        )?;
        masks.insert(d.category.to_string(), names);
    }
    write_file(&args.out, "cv.tsv", cv_rows.as_bytes())?;
    save_config(
        &args.out,
        &RunConfig {
            command: "train".into(),
            seed: args.seed,
            inputs: category_inputs(&args.data),
            hyper: Some(HyperConfig {
                learning_rate: args.learning_rate,
                epochs: args.epochs,
                l2: args.l2,
                folds: args.folds,
            }),
            masks,
            out: display(&args.out),
            ..RunConfig::default()
        },
    )?;
    Ok(format!("{}-fold cross-validated accuracy\n{text}", args.folds))
}

pub fn load_models(dir: &Path) -> Result<[LogisticModel; 3]> {
    let load = |c: LearnerCategory| -> Result<LogisticModel> {
        let path = dir.join(model_file(c));
        let model = LogisticModel::from_text(&read_text(&path)?).with_context(|| format!("{}", path.display()))?;
        if model.category != c {
            bail!("{} holds a {} model", path.display(), model.category);
        }
        Ok(model)
    };
    Ok([
        load(LearnerCategory::Expert)?,
        load(LearnerCategory::Intermediate)?,
        load(LearnerCategory::Beginner)?,
    ])
}

pub fn predict_records(models: &[LogisticModel; 3], records: &[TrainingRecord]) -> Vec<Prediction> {
    records
        .iter()
        .map(|r| {
            let [(pe, ve), (pi, vi), (pb, vb)] = models.each_ref().map(|m| m.predict(&r.features));
            Prediction {
                id: r.id.clone(),
                probabilities: [pe, pi, pb],
                verdicts: CategoryVerdicts::new(ve, vi, vb),
            }
        })
        .collect()
}

pub fn cmd_predict(args: &PredictArgs) -> Result<String> {
    let models = load_models(&args.models)?;
    let mut inputs = BTreeMap::from([("models".to_string(), display(&args.models))]);
    let records = match (&args.features, &args.ontology, &args.questions) {
        (Some(path), _, _) => {
            inputs.insert("features".into(), display(path));
            read_any(&read_text(path)?).with_context(|| format!("{}", path.display()))?
        }
        (None, Some(onto), Some(qs)) => {
            inputs.insert("ontology".into(), display(onto));
            inputs.insert("questions".into(), display(qs));
            let o = load_ontology(onto, args.format)?;
            featurize(&o, &load_questions(qs)?)?.into_iter().map(|(r, _)| r).collect()
        }
        _ => bail!("predict needs --features or both --ontology and --questions"),
    };
    let predictions = predict_records(&models, &records);
    let mut buf = Vec::new();
    write_predictions(&mut buf, &predictions)?;
    write_file(&args.out, "predictions.tsv", &buf)?;
    let tally = LevelTally::from_levels(predictions.iter().map(Prediction::level)).render();
    write_file(&args.out, "levels.txt", tally.as_bytes())?;
    save_config(
        &args.out,
        &RunConfig {
            command: "predict".into(),
            seed: args.seed,
            inputs,
            format: args.ontology.as_ref().map(|_| args.format),
            masks: models
                .iter()
                .map(|m| (m.category.to_string(), feature_names(m.mask())))
                .collect(),
            out: display(&args.out),
            ..RunConfig::default()
        },
    )?;
    Ok(tally)
}

fn theta_config(t: &ThetaMap) -> BTreeMap<String, f64> {
    LearnerCategory::ALL.into_iter().map(|c| (c.to_string(), t.get(c))).collect()
}

pub fn cmd_calibrate(args: &CalibrateArgs) -> Result<String> {
    let text = read_text(&args.responses)?;
    let responses = read_responses(text.as_bytes()).with_context(|| format!("{}", args.responses.display()))?;
    let items = calibrate(&responses, &args.thetas)?;
    let mut buf = Vec::new();
    write_calibration(&mut buf, &items)?;
    write_file(&args.out, "calibration.tsv", &buf)?;
    save_config(
        &args.out,
        &RunConfig {
            command: "calibrate".into(),
            seed: args.seed,
            inputs: BTreeMap::from([("responses".into(), display(&args.responses))]),
            thetas: Some(theta_config(&args.thetas)),
            out: display(&args.out),
            ..RunConfig::default()
        },
    )?;
    let incomplete = items.iter().filter(|i| !i.is_complete()).count();
    let tally = LevelTally::from_levels(items.iter().filter_map(|i| i.level));
    let mut out = format!("calibrated {} items ({incomplete} incomplete)\n", items.len());
    out.push_str(&tally.render());
    Ok(out)
}

fn load_levels(path: &Path) -> Result<Vec<(String, DifficultyLevel)>> {
    read_levels(read_text(path)?.as_bytes()).with_context(|| format!("{}", path.display()))
}

pub fn cmd_report(args: &ReportArgs) -> Result<String> {
    let predictions = load_levels(&args.predictions)?;
    let gold = load_levels(&args.gold)?;
    let summary = agreement(&predictions, &gold)?.render();
    if let Some(dir) = &args.out {
        write_file(dir, "report.txt", summary.as_bytes())?;
        save_config(
            dir,
            &RunConfig {
                command: "report".into(),
                seed: args.seed,
                inputs: BTreeMap::from([
                    ("predictions".into(), display(&args.predictions)),
                    ("gold".into(), display(&args.gold)),
                ]),
                out: display(dir),
                ..RunConfig::default()
            },
        )?;
    }
    Ok(summary)
}

pub fn execute(command: &Command) -> Result<String> {
    match command {
        Command::Generate(a) => cmd_generate(a),
        Command::Featurize(a) => cmd_featurize(a),
        Command::RankFeatures(a) => cmd_rank_features(a),
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Calibrate(a) => cmd_calibrate(a),
        Command::Report(a) => cmd_report(a),
    }
}

/// 2 when the failure is a broken internal invariant, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    let invariant = err
        .chain()
        .filter_map(|e| e.downcast_ref::<ontodiff_core::Error>())
        .any(ontodiff_core::Error::is_invariant);
    if invariant {
        2
    } else {
        1
    }
}

/// Parses `args`, runs the command and prints its output.
pub fn run(args: impl IntoIterator<Item = impl Into<OsString> + Clone>) -> ExitCode {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(&cli.command) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
