use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use policy_overlap::analysis::{analyze, AnalysisReport, ScoringConfig};
use policy_overlap::corpus::{
    parse_records, read_curated, split_by_service, trim_records, write_curated, CaseTaxonomy,
    CuratedRecord, DocType, InputFormat, MappingRuleset, SplitReport, Status, TrimPolicy, TrimReport,
};
use policy_overlap::eval::{
    confusion, interpret_pairwise, metrics, pairwise_table, ConfusionMatrix, EvalReport, PairwiseEntry,
};
use policy_overlap::models::{import_predictions, ModelKind, PredictionRow, PredictionSet, Task};
use policy_overlap::overlap::{
    agreement_report, encroachment_report, regime_partition, tv_loss, AgreementReport, AnnotatorLabels,
    CaseFrequencyTable, EncroachmentReport, RegimeReport,
};
use policy_overlap::pipeline::{task_label, train_pipeline, Sampling, TrainLog, TrainedPipeline};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::manifest::{require_artifact, write_manifest, RunRecord};
use crate::{
    AnalyzeArgs, Command, Context, EvaluateArgs, Format, IngestArgs, KappaArgs, ModelArg, OverlapArgs,
    PredictArgs, SamplingArg, SplitArgs, TaskArg, TrainArgs,
};

pub const REPORT_FORMAT_VERSION: u32 = 1;

pub fn dispatch(ctx: &Context, command: &Command) -> CliResult<String> {
    match command {
        Command::Ingest(a) => cmd_ingest(ctx, a).map(|r| r.rendered),
        Command::Split(a) => cmd_split(ctx, a).map(|r| r.rendered),
        Command::Train(a) => cmd_train(ctx, a).map(|r| r.rendered),
        Command::Predict(a) => cmd_predict(ctx, a).map(|r| r.rendered),
        Command::Evaluate(a) => cmd_evaluate(ctx, a).map(|r| r.rendered),
        Command::Overlap(a) => cmd_overlap(ctx, a).map(|r| r.rendered),
        Command::Kappa(a) => cmd_kappa(ctx, a).map(|r| r.rendered),
        Command::Analyze(a) => cmd_analyze(ctx, a).map(|r| r.rendered),
    }
}

/// A command's structured result, the files it wrote and its stdout text.
#[derive(Debug)]
pub struct Outcome<T> {
    pub report: T,
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
    pub rendered: String,
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    kind: &'a str,
    format_version: u32,
    #[serde(flatten)]
    body: &'a T,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Usage(format!("{}: {e}", path.display()))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(io_err(path))
}

fn write_report<T: Serialize>(path: &Path, kind: &str, body: &T) -> CliResult<()> {
    let v = Versioned {
        kind,
        format_version: REPORT_FORMAT_VERSION,
        body,
    };
    let text = serde_json::to_string_pretty(&v).expect("report serializes");
    write_text(path, &(text + "\n"))
}

fn ensure_out(ctx: &Context) -> CliResult<()> {
    std::fs::create_dir_all(&ctx.out).map_err(io_err(&ctx.out))
}

fn require_input(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::MissingArtifact {
            path: path.to_path_buf(),
            hint: "check the path".into(),
        })
    }
}

/// Writes the JSON report and, for md/csv, a sibling file in that format;
/// returns the stdout rendering.
fn emit<T: Serialize>(
    ctx: &Context,
    record: &mut RunRecord,
    name: &str,
    report: &T,
    markdown: impl FnOnce() -> String,
    csv: Option<String>,
) -> CliResult<String> {
    let json_path = ctx.out.join(format!("{name}.json"));
    write_report(&json_path, name, report)?;
    record.output(&json_path);
    match ctx.format {
        Format::Json => Ok(serde_json::to_string_pretty(report).expect("report serializes") + "\n"),
        Format::Md => {
            let md = markdown();
            let path = ctx.out.join(format!("{name}.md"));
            write_text(&path, &md)?;
            Ok(md)
        }
        Format::Csv => {
            let csv = csv.ok_or_else(|| {
                CliError::Usage(format!("--format csv is not available for `{}`", record.command))
            })?;
            let path = ctx.out.join(format!("{name}.csv"));
            write_text(&path, &csv)?;
            Ok(csv)
        }
    }
}

fn finish<T>(
    ctx: &Context,
    record: RunRecord,
    manifest_name: &str,
    report: T,
    rendered: String,
) -> CliResult<Outcome<T>> {
    let manifest = write_manifest(
        &ctx.out,
        manifest_name,
        &record,
        &ctx.args,
        ctx.seed,
        ctx.config_path.as_deref(),
    )?;
    Ok(Outcome {
        report,
        files: record.outputs,
        manifest,
        rendered,
    })
}

fn task_of(t: TaskArg) -> Task {
    match t {
        TaskArg::Case => Task::Case,
        TaskArg::Doctype => Task::DocType,
    }
}

fn load_taxonomy(ctx: &Context, explicit: Option<&Path>, record: &mut RunRecord) -> CliResult<CaseTaxonomy> {
    let path = match explicit {
        Some(p) => {
            require_input(p)?;
            p.to_path_buf()
        }
        None => {
            let p = ctx.out.join("taxonomy.json");
            if !p.is_file() {
                return Ok(CaseTaxonomy::default());
            }
            p
        }
    };
    record.input(&path);
    CaseTaxonomy::load(&path).map_err(CliError::input(path.display()))
}

fn curated_from(ctx: &Context, explicit: Option<&PathBuf>, default: &str, hint: &str) -> CliResult<(PathBuf, Vec<CuratedRecord>)> {
    let path = explicit.cloned().unwrap_or_else(|| ctx.out.join(default));
    require_artifact(&path, &ctx.out, hint)?;
    let records = read_curated(&path).map_err(CliError::input(path.display()))?;
    Ok((path, records))
}

// ---------------------------------------------------------------- ingest

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IngestReport {
    pub source: String,
    pub rows_read: usize,
    pub bad_rows_skipped: usize,
    pub trim: TrimReport,
    pub doctypes: BTreeMap<String, usize>,
}

pub fn cmd_ingest(ctx: &Context, args: &IngestArgs) -> CliResult<Outcome<IngestReport>> {
    let mut record = RunRecord::new("ingest");
    require_input(&args.raw)?;
    record.input(&args.raw);

    let taxonomy = match &args.taxonomy {
        Some(p) => {
            require_input(p)?;
            record.input(p);
            Some(CaseTaxonomy::load(p).map_err(CliError::input(p.display()))?)
        }
        None => None,
    };
    let mapping = match &args.mapping {
        Some(p) => {
            require_input(p)?;
            record.input(p);
            MappingRuleset::load(p).map_err(CliError::input(p.display()))?
        }
        None => MappingRuleset::default(),
    };
    let status_allowlist = if args.statuses.iter().any(|s| s.eq_ignore_ascii_case("any")) {
        None
    } else {
        let parsed = args
            .statuses
            .iter()
            .map(|s| s.parse::<Status>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Some(parsed)
    };
    let policy = TrimPolicy {
        status_allowlist,
        drop_empty: !args.keep_empty,
        dedup: !args.no_dedup,
    };

    let parsed = parse_records(&args.raw, InputFormat::from_path(&args.raw))
        .map_err(CliError::input(args.raw.display()))?;
    if !parsed.errors.is_empty() && !args.skip_bad_rows {
        let mut msg = String::new();
        for e in parsed.errors.iter().take(10) {
            let _ = writeln!(msg, "{}:{}: {}", args.raw.display(), e.line, e.message);
        }
        if parsed.errors.len() > 10 {
            let _ = writeln!(msg, "... and {} more", parsed.errors.len() - 10);
        }
        msg.push_str("  hint: fix the rows or pass --skip-bad-rows");
        return Err(CliError::Usage(msg));
    }
    let rows_read = parsed.records.len() + parsed.errors.len();
    let (kept, trim) = trim_records(parsed.records, &policy);
    let curated: Vec<CuratedRecord> = kept
        .into_iter()
        .map(|r| {
            let d = mapping.map(&r.doc_type_raw);
            CuratedRecord::new(r, d)
        })
        .collect();
    let mut doctypes: BTreeMap<String, usize> = DocType::ALL.iter().map(|d| (d.name().to_string(), 0)).collect();
    for r in &curated {
        *doctypes.entry(r.doctype.name().to_string()).or_default() += 1;
    }

    ensure_out(ctx)?;
    let curated_path = ctx.out.join("curated.jsonl");
    write_curated(&curated_path, &curated).map_err(CliError::input(curated_path.display()))?;
    record.output(&curated_path);
    if let Some(t) = &taxonomy {
        let p = ctx.out.join("taxonomy.json");
        write_text(&p, &t.to_json())?;
        record.output(&p);
    }

    let report = IngestReport {
        source: args.raw.display().to_string(),
        rows_read,
        bad_rows_skipped: parsed.errors.len(),
        trim,
        doctypes,
    };
    let md = || {
        let t = &report.trim;
        let mut s = format!(
            "## Ingest\n\n| step | records |\n|---|---:|\n| rows read | {} |\n| malformed rows skipped | {} |\n| parsed | {} |\n| dropped: status | {} |\n| dropped: empty | {} |\n| dropped: duplicate | {} |\n| curated | {} |\n\n| docType | records |\n|---|---:|\n",
            report.rows_read, report.bad_rows_skipped, t.input, t.dropped_status, t.dropped_empty, t.dropped_duplicate, t.output
        );
        for (d, n) in &report.doctypes {
            let _ = writeln!(s, "| {d} | {n} |");
        }
        s
    };
    let csv = format!(
        "input,dropped_status,dropped_empty,dropped_duplicate,output\n{},{},{},{},{}\n",
        report.trim.input, report.trim.dropped_status, report.trim.dropped_empty, report.trim.dropped_duplicate, report.trim.output
    );
    let rendered = emit(ctx, &mut record, "trim_report", &report, md, Some(csv))?;
    finish(ctx, record, "ingest", report, rendered)
}

// ----------------------------------------------------------------- split

pub fn cmd_split(ctx: &Context, args: &SplitArgs) -> CliResult<Outcome<SplitReport>> {
    let mut record = RunRecord::new("split");
    let (path, records) = curated_from(ctx, args.curated.as_ref(), "curated.jsonl", "run `policy-overlap ingest <raw>` first")?;
    record.input(&path);
    if args.threshold == 0 {
        return Err(CliError::Usage("--threshold must be at least 1".into()));
    }
    let split = split_by_service(&records, args.threshold);
    ensure_out(ctx)?;
    for (name, side) in [("train.jsonl", &split.train), ("test.jsonl", &split.test)] {
        let p = ctx.out.join(name);
        write_curated(&p, side).map_err(CliError::input(p.display()))?;
        record.output(&p);
    }
    let report = split.report;
    let md = || {
        let mut s = format!(
            "## Split (threshold {})\n\n| side | groups | records |\n|---|---:|---:|\n| train | {} | {} |\n| test | {} | {} |\n\nannotation ratio {:.4} · document ratio {:.4}\n",
            report.threshold,
            report.groups_train,
            report.records_train,
            report.groups_test,
            report.records_test,
            report.annotation_ratio,
            report.document_ratio
        );
        for w in &report.warnings {
            let _ = writeln!(s, "\nwarning: {w}");
        }
        s
    };
    let csv = format!(
        "side,groups,records\ntrain,{},{}\ntest,{},{}\n",
        report.groups_train, report.records_train, report.groups_test, report.records_test
    );
    let rendered = emit(ctx, &mut record, "split_report", &report, md, Some(csv))?;
    finish(ctx, record, "split", report, rendered)
}

// ----------------------------------------------------------------- train

pub fn model_name(task: TaskArg, model: ModelArg, sampling: SamplingArg) -> String {
    let t = match task {
        TaskArg::Case => "case",
        TaskArg::Doctype => "doctype",
    };
    let m = match model {
        ModelArg::Svm => "svm",
        ModelArg::Rf => "rf",
    };
    let s = match sampling {
        SamplingArg::Normal => "normal",
        SamplingArg::Oversample => "oversample",
    };
    format!("{t}_{m}_{s}")
}

pub fn cmd_train(ctx: &Context, args: &TrainArgs) -> CliResult<Outcome<TrainLog>> {
    let mut record = RunRecord::new("train");
    let (path, records) = curated_from(ctx, args.train.as_ref(), "train.jsonl", "run `policy-overlap split` first")?;
    record.input(&path);
    let task = task_of(args.task);
    let kind = match args.model {
        ModelArg::Svm => ModelKind::Svm,
        ModelArg::Rf => ModelKind::Forest,
    };
    let sampling = match args.sampling {
        SamplingArg::Normal => Sampling::Normal,
        SamplingArg::Oversample => Sampling::Oversample,
    };
    let outcome = train_pipeline(&records, task, kind, sampling, &ctx.config.train_config(), ctx.seed, ctx.threads)?;

    ensure_out(ctx)?;
    let name = model_name(args.task, args.model, args.sampling);
    let model_path = ctx.out.join(format!("model_{name}.json"));
    outcome.pipeline.save(&model_path).map_err(CliError::input(model_path.display()))?;
    record.output(&model_path);
    if let Some(over) = &outcome.oversampled {
        let p = ctx.out.join(format!("oversampled_{}_seed{}.jsonl", task, ctx.seed));
        write_curated(&p, over).map_err(CliError::input(p.display()))?;
        record.output(&p);
    }
    let log = outcome.log;
    let md = || {
        let mut s = format!(
            "## Train {name}\n\n- examples: {}\n- training examples: {}\n- vocabulary: {}\n- seed: {}\n\n| class | examples | after sampling |\n|---|---:|---:|\n",
            log.examples, log.training_examples, log.vocabulary_size, ctx.seed
        );
        for (c, n) in &log.class_counts {
            let _ = writeln!(
                s,
                "| {} | {n} | {} |",
                task.label_name(*c),
                log.training_class_counts.get(c).copied().unwrap_or(0)
            );
        }
        s
    };
    let mut csv = String::from("class,examples,training_examples\n");
    for (c, n) in &log.class_counts {
        let _ = writeln!(csv, "{},{n},{}", task.label_name(*c), log.training_class_counts.get(c).copied().unwrap_or(0));
    }
    let rendered = emit(ctx, &mut record, &format!("train_log_{name}"), &log, md, Some(csv))?;
    finish(ctx, record, &format!("train_{name}"), log, rendered)
}

// --------------------------------------------------------------- predict

pub fn cmd_predict(ctx: &Context, args: &PredictArgs) -> CliResult<Outcome<PredictionSet>> {
    let mut record = RunRecord::new("predict");
    require_artifact(&args.model, &ctx.out, "run `policy-overlap train` first")?;
    record.input(&args.model);
    let pipeline = TrainedPipeline::load(&args.model).map_err(CliError::input(args.model.display()))?;
    let (path, records) = curated_from(ctx, args.input.as_ref(), "test.jsonl", "run `policy-overlap split` first")?;
    record.input(&path);

    let kind = pipeline.classifier.kind();
    let rows = records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let p = pipeline.predict_text(&r.record.description)?;
            Ok(PredictionRow {
                example_id: i.to_string(),
                gold: task_label(pipeline.task, r),
                predicted: p.label,
                score: Some(p.confidence(kind)),
                doctype: Some(r.doctype),
            })
        })
        .collect::<policy_overlap::Result<Vec<_>>>()?;
    let stem = args
        .model
        .file_stem()
        .map_or_else(|| "model".to_string(), |s| s.to_string_lossy().into_owned());
    let stem = stem.strip_prefix("model_").unwrap_or(&stem).to_string();
    let set = PredictionSet::new(pipeline.task, stem.clone(), pipeline.task.label_space(), rows)?;

    ensure_out(ctx)?;
    let out = ctx.out.join(format!("predictions_{stem}.csv"));
    set.write_csv(&out).map_err(CliError::input(out.display()))?;
    record.output(&out);
    let correct = set.rows().iter().filter(|r| r.gold == r.predicted).count();
    let rendered = format!(
        "wrote {} predictions to {} ({} correct)\n",
        set.len(),
        out.display(),
        correct
    );
    finish(ctx, record, &format!("predict_{stem}"), set, rendered)
}

// -------------------------------------------------------------- evaluate

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub source: String,
    pub task: Task,
    pub metrics: EvalReport,
    pub confusion: ConfusionMatrix,
    /// Only for the docType task.
    pub pairwise: Vec<PairwiseEntry>,
}

pub fn cmd_evaluate(ctx: &Context, args: &EvaluateArgs) -> CliResult<Outcome<EvaluationReport>> {
    let mut record = RunRecord::new("evaluate");
    require_artifact(&args.predictions, &ctx.out, "run `policy-overlap predict` or export predictions first")?;
    record.input(&args.predictions);
    let task = task_of(args.task);
    let set = import_predictions(&args.predictions, task, task.label_space())
        .map_err(CliError::input(args.predictions.display()))?;
    let matrix = confusion(&set)?;
    let m = metrics(&matrix)?;
    let pairwise = if task == Task::DocType {
        pairwise_table(&matrix)
    } else {
        Vec::new()
    };
    let report = EvaluationReport {
        source: set.source_name.clone(),
        task,
        metrics: m,
        confusion: matrix,
        pairwise,
    };
    ensure_out(ctx)?;
    let name = format!("eval_{}", report.source);
    let cm_path = ctx.out.join(format!("confusion_{}.csv", report.source));
    let label = |l: usize| task.label_name(l);
    report.confusion.write_csv(&cm_path, label).map_err(CliError::input(cm_path.display()))?;
    record.output(&cm_path);

    let md = || {
        let mut s = format!("## Evaluation: {} ({task})\n\n", report.source);
        s.push_str(&report.metrics.to_markdown(label));
        if !report.pairwise.is_empty() {
            s.push_str("\n### Pairwise accuracy\n\n| pair | accuracy | reading |\n|---|---:|---|\n");
            for p in &report.pairwise {
                match p.accuracy {
                    Some(a) => {
                        let _ = writeln!(s, "| {} / {} | {a:.4} | {} |", label(p.a), label(p.b), interpret_pairwise(a));
                    }
                    None => {
                        let _ = writeln!(s, "| {} / {} | n/a | no examples |", label(p.a), label(p.b));
                    }
                }
            }
        }
        s
    };
    let csv = report.confusion.to_csv(label);
    let rendered = emit(ctx, &mut record, &name, &report, md, Some(csv))?;
    finish(ctx, record, &format!("evaluate_{}", report.source), report, rendered)
}

// --------------------------------------------------------------- overlap

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverlapReport {
    pub source: String,
    pub include_abstain: bool,
    pub pp_total: u64,
    pub tos_total: u64,
    pub tv_loss: f64,
    pub regimes: RegimeReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub encroachment: Option<EncroachmentReport>,
}

pub fn cmd_overlap(ctx: &Context, args: &OverlapArgs) -> CliResult<Outcome<OverlapReport>> {
    let mut record = RunRecord::new("overlap");
    require_artifact(&args.predictions, &ctx.out, "run `policy-overlap predict` with a case model first")?;
    record.input(&args.predictions);
    let set = import_predictions(&args.predictions, Task::Case, Task::Case.label_space())
        .map_err(CliError::input(args.predictions.display()))?;
    let include_abstain = !args.exclude_abstain;
    let table = CaseFrequencyTable::from_predictions(&set, include_abstain)
        .map_err(CliError::input(args.predictions.display()))?;
    let pp = table.fractions(DocType::PrivacyPolicy);
    let tos = table.fractions(DocType::TermsOfService);
    let (Some(pp), Some(tos)) = (pp, tos) else {
        return Err(CliError::Analysis(policy_overlap::Error::Empty(
            "no case predictions for privacy policies or terms of service".into(),
        )));
    };
    let loss = tv_loss(&pp, &tos)?;

    let mut params = ctx.config.regimes.clone();
    if let Some(m) = args.min_count {
        params.min_count = m;
    }
    if let Some(b) = args.band {
        params.band = b;
    }
    params.exclusions.extend(args.exclude.iter().copied());
    let regimes = regime_partition(&table, &params);

    let taxonomy = load_taxonomy(ctx, args.taxonomy.as_deref(), &mut record)?;
    let encroachment = match &args.labels {
        Some(p) => {
            require_input(p)?;
            record.input(p);
            let labels = AnnotatorLabels::load(p).map_err(CliError::input(p.display()))?;
            let agreement = agreement_report(&labels)?;
            Some(encroachment_report(&regimes, &agreement, &taxonomy).map_err(CliError::input(p.display()))?)
        }
        None => None,
    };
    let report = OverlapReport {
        source: set.source_name.clone(),
        include_abstain,
        pp_total: table.get(DocType::PrivacyPolicy).total,
        tos_total: table.get(DocType::TermsOfService).total,
        tv_loss: loss,
        regimes,
        encroachment,
    };
    let describe = |c: usize| {
        policy_overlap::corpus::CaseId::new(c)
            .map(|id| taxonomy.description(id).to_string())
            .unwrap_or_default()
    };
    let md = || {
        let mut s = format!(
            "## Overlap: {}\n\n- distribution loss (PP vs ToS): {:.4}\n- abstain included: {}\n- PP sentences: {} · ToS sentences: {}\n\n",
            report.source, report.tv_loss, report.include_abstain, report.pp_total, report.tos_total
        );
        s.push_str(&report.regimes.to_markdown(describe));
        if let Some(e) = &report.encroachment {
            s.push_str("\n## Encroachment\n\n");
            s.push_str(&e.to_markdown());
        }
        s
    };
    let mut csv = String::from("case_id,count_pp,count_tos,diff,regime\n");
    for (bucket, entries) in [
        ("pp_dominant", &report.regimes.pp_dominant),
        ("tos_dominant", &report.regimes.tos_dominant),
        ("contested", &report.regimes.contested),
        ("filtered", &report.regimes.filtered_out),
    ] {
        for e in entries {
            let _ = writeln!(csv, "{},{},{},{},{bucket}", e.case_id, e.count_pp, e.count_tos, e.diff);
        }
    }
    ensure_out(ctx)?;
    let rendered = emit(ctx, &mut record, &format!("overlap_{}", report.source), &report, md, Some(csv))?;
    finish(ctx, record, &format!("overlap_{}", report.source), report, rendered)
}

// ----------------------------------------------------------------- kappa

pub fn cmd_kappa(ctx: &Context, args: &KappaArgs) -> CliResult<Outcome<AgreementReport>> {
    let mut record = RunRecord::new("kappa");
    require_input(&args.labels)?;
    record.input(&args.labels);
    let labels = AnnotatorLabels::load(&args.labels).map_err(CliError::input(args.labels.display()))?;
    let report = agreement_report(&labels)?;
    let mut csv = String::from("annotator");
    for a in &report.annotators {
        let _ = write!(csv, ",{a}");
    }
    csv.push('\n');
    for (i, row) in report.matrix.iter().enumerate() {
        csv.push_str(&report.annotators[i]);
        for k in row {
            let _ = write!(csv, ",{}", k.map_or_else(String::new, |v| v.to_string()));
        }
        csv.push('\n');
    }
    ensure_out(ctx)?;
    let rendered = emit(ctx, &mut record, "kappa_report", &report, || report.to_markdown(), Some(csv))?;
    finish(ctx, record, "kappa", report, rendered)
}

// --------------------------------------------------------------- analyze

pub fn cmd_analyze(ctx: &Context, args: &AnalyzeArgs) -> CliResult<Outcome<AnalysisReport>> {
    let mut record = RunRecord::new("analyze");
    require_input(&args.document)?;
    record.input(&args.document);
    let mut load = |p: &Path| -> CliResult<TrainedPipeline> {
        require_artifact(p, &ctx.out, "run `policy-overlap train` for this task first")?;
        record.input(p);
        TrainedPipeline::load(p).map_err(CliError::input(p.display()))
    };
    let case_model = load(&args.case_model)?;
    let doctype_model = load(&args.doctype_model)?;
    let scoring = match &args.scoring {
        Some(p) => {
            require_input(p)?;
            record.input(p);
            ScoringConfig::load(p).map_err(CliError::input(p.display()))?
        }
        None => ctx.config.scoring.clone().unwrap_or_default(),
    };
    let taxonomy = load_taxonomy(ctx, args.taxonomy.as_deref(), &mut record)?;
    let bytes = std::fs::read(&args.document).map_err(io_err(&args.document))?;
    let text = String::from_utf8_lossy(&bytes);

    let report = analyze(&text, &case_model, &doctype_model, &scoring, &ctx.config.sentences, &taxonomy)?;
    let mut csv = String::from("index,case_id,confidence,doctype,text\n");
    for (i, s) in report.sentences.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{i},{},{},{},\"{}\"",
            s.case_id,
            s.confidence,
            s.doctype.short_name(),
            s.text.replace('"', "\"\"")
        );
    }
    ensure_out(ctx)?;
    let name = format!("analysis_{}", &report.digest[..12]);
    let rendered = emit(ctx, &mut record, &name, &report, || report.to_markdown(), Some(csv))?;
    finish(ctx, record, &name, report, rendered)
}
