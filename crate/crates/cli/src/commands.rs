use crate::format::{prefix, pretty, sig10, with_ieee};
use crate::generate::{random_input, SpecLimits};
use crate::{CliError, Command, Outcome, OutputFormat, RunConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use sponge_dims::dimension::{
    dimension_drop, lg_exponents, old_formula_spread, Caveat, DimensionReport,
};
use sponge_dims::measure::{
    lg_weights, pcu_weights, ratio_bound_check, DepthError, RatioConstants, RatioReport, RatioRow,
};
use sponge_dims::oracle::{count_table, default_anchor, fit_exponent, CountTable, OracleError};
use sponge_dims::rational;
use sponge_dims::sponge::{validate_bm, validate_lg, SpongeFile, SpongeInput, Warning};
use sponge_dims::tangent::{
    containment_check, convergence_sweep, is_nonincreasing, prefractal, prefractal_rectangles,
    ContainmentReport, SweepOptions, SweepRow, TangentError, DEFAULT_EXTRA_DEPTH,
};
use sponge_dims::{
    assouad_lower_bm, assouad_lower_lg, assouad_lower_old, LgSponge, Rational, SpongeSpec,
    SymbolicSponge,
};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

const DEFAULT_ORACLE_DEPTHS: std::ops::RangeInclusive<usize> = 4..=10;
const DEFAULT_EXPORT_DEPTH: usize = 3;

pub(crate) fn dispatch(config: &RunConfig) -> Result<Outcome, CliError> {
    match config.command {
        Command::Validate => validate(config),
        Command::Dims => dims(config),
        Command::Compare => compare(config),
        Command::MeasureCheck => measure_check(config),
        Command::Tangent => tangent(config),
        Command::Oracle => oracle(config),
        Command::ExportGeometry => export_geometry(config),
        Command::Generate => generate(config),
    }
}

enum Sponge {
    Bm(SpongeSpec),
    Lg(LgSponge),
}

impl Sponge {
    fn as_symbolic(&self) -> &dyn SymbolicSponge {
        match self {
            Sponge::Bm(spec) => spec,
            Sponge::Lg(lg) => lg,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Sponge::Bm(_) => "bedford-mcmullen",
            Sponge::Lg(_) => "lalley-gatzouras",
        }
    }
}

fn read_input(config: &RunConfig) -> Result<SpongeInput, CliError> {
    let path = config
        .input
        .as_ref()
        .ok_or_else(|| CliError::Parse("--input is required".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    SpongeFile::parse(&text)
        .and_then(SpongeFile::into_input)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn load(config: &RunConfig) -> Result<Sponge, CliError> {
    match read_input(config)? {
        SpongeInput::Bm(input) => SpongeSpec::new(input)
            .map(Sponge::Bm)
            .map_err(|report| CliError::Validation(report.to_string().trim_end().to_string())),
        SpongeInput::Lg(input) => LgSponge::new(input)
            .map(Sponge::Lg)
            .map_err(|report| CliError::Validation(report.to_string().trim_end().to_string())),
    }
}

fn load_bm(config: &RunConfig) -> Result<SpongeSpec, CliError> {
    match load(config)? {
        Sponge::Bm(spec) => Ok(spec),
        Sponge::Lg(_) => Err(CliError::Validation(format!(
            "{} needs a bedford-mcmullen sponge",
            command_name(config.command)
        ))),
    }
}

fn command_name(command: Command) -> String {
    use clap::ValueEnum;
    command
        .to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default()
}

fn from_depth(error: DepthError) -> CliError {
    match error {
        DepthError::ScaleOutOfRange { .. } => CliError::Validation(error.to_string()),
        other => CliError::Invariant(other.to_string()),
    }
}

fn from_tangent(error: TangentError) -> CliError {
    match error {
        TangentError::BudgetExceeded { .. } | TangentError::ResolutionOverflow(_) => {
            CliError::Budget(error.to_string())
        }
        TangentError::RTooLarge(_) | TangentError::NoTwistAvailable { .. } => {
            CliError::Validation(error.to_string())
        }
        TangentError::Depth(inner) => from_depth(inner),
        other => CliError::Invariant(other.to_string()),
    }
}

fn from_oracle(error: OracleError) -> CliError {
    match error {
        OracleError::BudgetExceeded { .. } => CliError::Budget(error.to_string()),
        OracleError::InsufficientData(_) => CliError::Validation(error.to_string()),
    }
}

fn csv_unsupported(config: &RunConfig) -> Result<(), CliError> {
    if config.format == OutputFormat::Csv {
        return Err(CliError::Validation(format!(
            "{} has no csv output; use text or json",
            command_name(config.command)
        )));
    }
    Ok(())
}

fn validate(config: &RunConfig) -> Result<Outcome, CliError> {
    csv_unsupported(config)?;
    let input = read_input(config)?;
    let (kind, ok, text, value) = match &input {
        SpongeInput::Bm(input) => {
            let report = validate_bm(input);
            (
                "bedford-mcmullen",
                report.is_ok(),
                report.to_string(),
                json!(report),
            )
        }
        SpongeInput::Lg(input) => {
            let report = validate_lg(input);
            (
                "lalley-gatzouras",
                report.is_ok(),
                report.to_string(),
                json!(report),
            )
        }
    };
    let report = match config.format {
        OutputFormat::Json => pretty(&json!({ "type": kind, "valid": ok, "report": value })),
        _ => format!("{kind}: {text}"),
    };
    let failure = (!ok).then(|| CliError::Validation("sponge is invalid".into()));
    Ok(Outcome {
        report,
        failure,
        note: None,
    })
}

fn caveat_text(caveat: &Caveat) -> String {
    match caveat {
        Caveat::OrderDependent => {
            "equal bases make the per-coordinate formula order dependent".into()
        }
        Caveat::SingleCluster => "single cluster: the sponge is self-similar up to scaling".into(),
        Caveat::Hyperplane { coordinate, value } => Warning::Hyperplane {
            coordinate: *coordinate,
            value: *value,
        }
        .to_string(),
    }
}

fn write_terms(out: &mut String, report: &DimensionReport, label: &str) {
    for term in &report.per_cluster_terms {
        let _ = writeln!(
            out,
            "  {label} {}: max {} at {}, min {} at {}",
            term.cluster,
            sig10(term.max_term),
            prefix(&term.argmax_prefix),
            sig10(term.min_term),
            prefix(&term.argmin_prefix)
        );
    }
}

fn sponge_header(out: &mut String, sponge: &Sponge) {
    let symbolic = sponge.as_symbolic();
    let clusters = symbolic.clusters();
    let _ = writeln!(
        out,
        "sponge: {}, d = {}, |D| = {}",
        sponge.kind(),
        symbolic.dims(),
        symbolic.digits().len()
    );
    if let Sponge::Bm(spec) = sponge {
        let _ = writeln!(out, "bases: {}", prefix(spec.bases()));
    }
    let sizes: Vec<u32> = clusters.sizes.iter().map(|&a| a as u32).collect();
    let _ = writeln!(out, "cluster sizes: {}", prefix(&sizes));
}

fn dims(config: &RunConfig) -> Result<Outcome, CliError> {
    csv_unsupported(config)?;
    let sponge = load(config)?;
    let report = match &sponge {
        Sponge::Bm(spec) => assouad_lower_bm(spec),
        Sponge::Lg(lg) => assouad_lower_lg(lg).map_err(|e| CliError::Invariant(e.to_string()))?,
    };
    if config.format == OutputFormat::Json {
        let value = with_ieee(
            json!(report),
            &[("assouad", report.assouad), ("lower", report.lower)],
        );
        return Ok(Outcome::ok(pretty(&value)));
    }
    let mut out = String::new();
    sponge_header(&mut out, &sponge);
    let formula = serde_json::to_value(report.formula).expect("formula tags serialize");
    let _ = writeln!(out, "formula: {}", formula.as_str().unwrap_or_default());
    let _ = writeln!(out, "assouad: {}", sig10(report.assouad));
    let _ = writeln!(out, "lower: {}", sig10(report.lower));
    let _ = writeln!(out, "terms:");
    write_terms(&mut out, &report, "cluster");
    for caveat in &report.caveats {
        let _ = writeln!(out, "caveat: {}", caveat_text(caveat));
    }
    Ok(Outcome::ok(out))
}

fn compare(config: &RunConfig) -> Result<Outcome, CliError> {
    csv_unsupported(config)?;
    let spec = load_bm(config)?;
    let clustered = assouad_lower_bm(&spec);
    let per_coordinate = assouad_lower_old(&spec);
    let drop = dimension_drop(&spec);
    let spread = old_formula_spread(&spec);
    if config.format == OutputFormat::Json {
        let value = json!({
            "assouad": drop.assouad,
            "assouad_per_coordinate": drop.assouad_per_coordinate,
            "drop": drop.drop,
            "equality_condition_holds": drop.equality_condition_holds,
            "clusters": drop.clusters,
            "caveats": drop.caveats,
            "clustered": clustered,
            "per_coordinate": per_coordinate,
            "order_spread": spread,
        });
        let value = with_ieee(
            value,
            &[
                ("assouad", drop.assouad),
                ("assouad_per_coordinate", drop.assouad_per_coordinate),
                ("drop", drop.drop),
            ],
        );
        return Ok(Outcome::ok(pretty(&value)));
    }
    let mut out = String::new();
    sponge_header(&mut out, &Sponge::Bm(spec.clone()));
    let _ = writeln!(out, "assouad (clustered): {}", sig10(clustered.assouad));
    let _ = writeln!(
        out,
        "assouad (per-coordinate): {}",
        sig10(per_coordinate.assouad)
    );
    let _ = writeln!(out, "drop: {}", sig10(drop.drop));
    let _ = writeln!(out, "lower (clustered): {}", sig10(clustered.lower));
    let _ = writeln!(
        out,
        "lower (per-coordinate): {}",
        sig10(per_coordinate.lower)
    );
    let verdict = if drop.equality_condition_holds {
        "holds"
    } else {
        "fails"
    };
    let _ = writeln!(out, "equality condition: {verdict}");
    for row in &drop.clusters {
        let _ = writeln!(
            out,
            "  cluster {}: max count {}, product of coordinate maxima {}",
            row.cluster, row.clustered_max, row.coordinate_product
        );
    }
    let _ = writeln!(
        out,
        "per-coordinate formula over {} within-cluster orders: assouad [{}, {}], lower [{}, {}]",
        spread.orders,
        sig10(spread.assouad_min),
        sig10(spread.assouad_max),
        sig10(spread.lower_min),
        sig10(spread.lower_max)
    );
    for caveat in &drop.caveats {
        let _ = writeln!(out, "caveat: {}", caveat_text(caveat));
    }
    Ok(Outcome::ok(out))
}

fn run_ratio_check(sponge: &Sponge, trials: usize, seed: u64) -> Result<RatioReport, CliError> {
    match sponge {
        Sponge::Bm(spec) => {
            let report = assouad_lower_bm(spec);
            let weights = pcu_weights(spec);
            let constants = RatioConstants::for_sponge(spec);
            ratio_bound_check(
                spec,
                &weights,
                report.assouad,
                report.lower,
                constants,
                trials,
                seed,
            )
            .map_err(from_depth)
        }
        Sponge::Lg(lg) => {
            let exponents = lg_exponents(lg).map_err(|e| CliError::Invariant(e.to_string()))?;
            let report = assouad_lower_lg(lg).map_err(|e| CliError::Invariant(e.to_string()))?;
            let weights = lg_weights(lg, &exponents);
            let constants = RatioConstants::for_sponge(lg);
            ratio_bound_check(
                lg,
                &weights,
                report.assouad,
                report.lower,
                constants,
                trials,
                seed,
            )
            .map_err(from_depth)
        }
    }
}

fn measure_check(config: &RunConfig) -> Result<Outcome, CliError> {
    let sponge = load(config)?;
    let report = run_ratio_check(&sponge, config.trials, config.seed)?;
    let failure = (!report.is_clean()).then(|| {
        CliError::Invariant(format!(
            "{} of {} trials violate a ratio bound",
            report.violations.len(),
            report.trials
        ))
    });
    let text = match config.format {
        OutputFormat::Json => pretty(&with_ieee(
            json!(report),
            &[
                ("max_normalized_upper", report.max_normalized_upper),
                ("min_normalized_lower", report.min_normalized_lower),
            ],
        )),
        OutputFormat::Csv => {
            let mut out = format!(
                "# seed={} trials={}\n{}\n",
                report.seed,
                report.trials,
                RatioRow::CSV_HEADER
            );
            for row in &report.rows {
                out.push_str(&row.to_csv());
                out.push('\n');
            }
            out
        }
        OutputFormat::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "seed: {}", report.seed);
            let _ = writeln!(out, "trials: {}", report.trials);
            sponge_header(&mut out, &sponge);
            let _ = writeln!(out, "assouad: {}", sig10(report.assouad));
            let _ = writeln!(out, "lower: {}", sig10(report.lower));
            let _ = writeln!(out, "upper constant: {}", sig10(report.constants.upper));
            let _ = writeln!(out, "lower constant: {}", sig10(report.constants.lower));
            let _ = writeln!(
                out,
                "max normalized upper ratio: {}",
                sig10(report.max_normalized_upper)
            );
            let _ = writeln!(
                out,
                "min normalized lower ratio: {}",
                sig10(report.min_normalized_lower)
            );
            let _ = writeln!(out, "violations: {}", report.violations.len());
            for row in report.violations.iter().take(10) {
                let _ = writeln!(out, "  {}", row.to_csv());
            }
            out
        }
    };
    Ok(Outcome {
        report: text,
        failure,
        note: None,
    })
}

fn default_scales() -> Vec<Rational> {
    (4..=6).map(|k| rational::inv_pow(3, k)).collect()
}

/// Containment at the largest extra depth that fits the budget.
fn containment_within_budget(
    spec: &SpongeSpec,
    big_r: &Rational,
    budget: u64,
) -> Result<ContainmentReport, TangentError> {
    let mut last = None;
    for extra_depth in (0..=DEFAULT_EXTRA_DEPTH).rev() {
        match containment_check(spec, big_r, extra_depth, budget) {
            Err(error @ TangentError::BudgetExceeded { .. }) => last = Some(error),
            other => return other,
        }
    }
    Err(last.expect("at least one extra depth was tried"))
}

fn tangent(config: &RunConfig) -> Result<Outcome, CliError> {
    let spec = load_bm(config)?;
    let scales = config.scales.clone().unwrap_or_else(default_scales);
    let containment = scales
        .iter()
        .map(|r| containment_within_budget(&spec, r, config.budget))
        .collect::<Result<Vec<_>, _>>()
        .map_err(from_tangent)?;
    let options = SweepOptions {
        budget: config.budget,
        ..SweepOptions::default()
    };
    let sweep = convergence_sweep(&spec, &scales, &options).map_err(from_tangent)?;
    let monotone = is_nonincreasing(&sweep, options.hausdorff.tolerance);
    let escaped: Vec<&ContainmentReport> = containment.iter().filter(|c| !c.contained).collect();
    let failure = (!escaped.is_empty()).then(|| {
        let scales: Vec<&str> = escaped.iter().map(|c| c.scale.as_str()).collect();
        CliError::Invariant(format!(
            "zoomed cube leaves the cluster product at R = {}",
            scales.join(", ")
        ))
    });
    let note = (!monotone)
        .then(|| "note: Hausdorff distances increase somewhere along the sweep".to_string());
    let text = match config.format {
        OutputFormat::Json => pretty(
            &json!({ "containment": containment, "sweep": sweep, "nonincreasing": monotone }),
        ),
        OutputFormat::Csv => sweep_csv(&sweep),
        OutputFormat::Text => {
            let mut out = String::new();
            sponge_header(&mut out, &Sponge::Bm(spec.clone()));
            let _ = writeln!(out, "containment:");
            for c in &containment {
                let verdict = if c.contained { "contained" } else { "ESCAPES" };
                let _ = writeln!(
                    out,
                    "  R = {}: depths {:?}, gaps {:?}, e = {}, {} zoomed boxes in {} target boxes: {verdict}",
                    c.scale, c.cluster_depths, c.gaps, c.extra_depth, c.zoomed_boxes, c.target_boxes
                );
                if let Some(witness) = &c.witness {
                    let _ = writeln!(out, "    witness box {witness:?}");
                }
            }
            let _ = writeln!(out, "convergence:");
            for row in &sweep {
                let _ = writeln!(
                    out,
                    "  R = {}: e = {}, {} zoomed vs {} product boxes, d_H in [{}, {}]",
                    row.scale,
                    row.extra_depth,
                    row.zoomed_boxes,
                    row.product_boxes,
                    sig10(row.distance.lower),
                    sig10(row.distance.upper)
                );
            }
            let _ = writeln!(out, "nonincreasing: {monotone}");
            out
        }
    };
    Ok(Outcome {
        report: text,
        failure,
        note,
    })
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "R,extra_depth,zoomed_boxes,product_boxes,distance_lower,distance_upper,contained\n",
    );
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.10e},{:.10e},{}",
            row.scale,
            row.extra_depth,
            row.zoomed_boxes,
            row.product_boxes,
            row.distance.lower,
            row.distance.upper,
            row.contained
        );
    }
    out
}

fn oracle(config: &RunConfig) -> Result<Outcome, CliError> {
    let spec = load_bm(config)?;
    let ms = config
        .depths
        .clone()
        .unwrap_or_else(|| DEFAULT_ORACLE_DEPTHS.collect());
    let m_max = *ms
        .iter()
        .max()
        .ok_or_else(|| CliError::Validation("no refinement levels".into()))?;
    let k = default_anchor(&spec, m_max);
    let table: CountTable = count_table(&spec, k, &ms);
    let fit = fit_exponent(&table).map_err(from_oracle)?;
    let formula = assouad_lower_bm(&spec);
    let text = match config.format {
        OutputFormat::Json => pretty(&with_ieee(
            json!({ "anchor": k, "table": table, "fit": fit, "formula": formula }),
            &[
                ("assouad_estimate", fit.assouad_estimate),
                ("lower_estimate", fit.lower_estimate),
            ],
        )),
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Text => {
            let mut out = String::new();
            sponge_header(&mut out, &Sponge::Bm(spec.clone()));
            let _ = writeln!(
                out,
                "anchor k = {k}, R = {}^-{k}, r = R {}^-m",
                table.base, table.base
            );
            let _ = writeln!(
                out,
                "{:>4} {:>24} {:>24} {:>14}",
                "m", "max_count", "min_count", "slope"
            );
            for row in &table.rows {
                let slope = row.incremental_slope.map(sig10).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{:>4} {:>24} {:>24} {:>14}",
                    row.m, row.max_count, row.min_count, slope
                );
            }
            let _ = writeln!(
                out,
                "assouad: fitted {}, formula {}",
                sig10(fit.assouad_estimate),
                sig10(formula.assouad)
            );
            let _ = writeln!(
                out,
                "lower: fitted {}, formula {}",
                sig10(fit.lower_estimate),
                sig10(formula.lower)
            );
            out
        }
    };
    Ok(Outcome::ok(text))
}

fn rectangles_text(rects: &[Vec<sponge_dims::measure::Interval>]) -> String {
    let mut out = String::new();
    for rect in rects {
        let fields: Vec<String> = rect
            .iter()
            .map(|side| {
                format!(
                    "{:.17e} {:.17e}",
                    rational::to_f64(&side.lo),
                    rational::to_f64(&side.hi)
                )
            })
            .collect();
        let _ = writeln!(out, "{}", fields.join(" "));
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::Parse(format!("cannot write {}: {e}", path.display())))
}

fn export_geometry(config: &RunConfig) -> Result<Outcome, CliError> {
    csv_unsupported(config)?;
    let sponge = load(config)?;
    let dir = config.output.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::Parse(format!("cannot create {}: {e}", dir.display())))?;
    let depths = config
        .depths
        .clone()
        .unwrap_or_else(|| vec![DEFAULT_EXPORT_DEPTH]);
    let mut files = Vec::new();
    for &m in &depths {
        let m32 =
            u32::try_from(m).map_err(|_| CliError::Budget(format!("depth {m} is too large")))?;
        let boxes_path = dir.join(format!("prefractal-m{m}.boxes"));
        match &sponge {
            Sponge::Bm(spec) => {
                let set = prefractal(spec, m32, config.budget).map_err(from_tangent)?;
                let voxel_path = dir.join(format!("prefractal-m{m}.vox"));
                write_file(&boxes_path, &set.to_text())?;
                write_file(&voxel_path, &set.to_voxels())?;
                files.push((m, boxes_path, set.len()));
                files.push((m, voxel_path, set.len()));
            }
            Sponge::Lg(lg) => {
                let rects = prefractal_rectangles(lg, m32, config.budget).map_err(from_tangent)?;
                write_file(&boxes_path, &rectangles_text(&rects))?;
                files.push((m, boxes_path, rects.len()));
            }
        }
    }
    let report = match config.format {
        OutputFormat::Json => {
            let entries: Vec<_> = files
                .iter()
                .map(|(m, path, boxes)| json!({ "depth": m, "path": path.display().to_string(), "boxes": boxes }))
                .collect();
            pretty(&json!({ "files": entries }))
        }
        _ => files
            .iter()
            .map(|(m, path, boxes)| format!("depth {m}: {boxes} boxes -> {}\n", path.display()))
            .collect(),
    };
    Ok(Outcome::ok(report))
}

fn generate(config: &RunConfig) -> Result<Outcome, CliError> {
    csv_unsupported(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let spec = SpongeSpec::new(random_input(&mut rng, SpecLimits::default()))
        .map_err(|report| CliError::Invariant(format!("generated an invalid sponge: {report}")))?;
    let mut text = SpongeFile::from_bm(&spec).to_json();
    text.push('\n');
    let note = Some(format!("generated with seed {}", config.seed));
    Ok(Outcome {
        report: text,
        failure: None,
        note,
    })
}
