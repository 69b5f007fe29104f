use std::fs;
use std::io::Write;

use anyhow::{bail, Context, Result};
use lvsde::io::{
    load_config, load_dataset, query_rect, render_svg, EmbeddingDocument, LoadOptions,
    RenderOptions,
};
use lvsde::{lambda_measure, run_with_progress, LambdaSpec, LayerSet, Rect, RunConfig, Vec2, TABLE_COMBINATIONS};

use crate::{EmbedArgs, EvaluateArgs, QueryArgs, RenderArgs};

pub fn build_config(args: &EmbedArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => load_config(path, RunConfig::default())
            .with_context(|| format!("reading config {}", path.display()))?,
        None => RunConfig::default(),
    };
    if let Some(v) = args.metric {
        cfg.metric = v;
    }
    if let Some(v) = args.b {
        cfg.b = v;
    }
    if let Some(v) = args.p_hat {
        cfg.p_hat = v;
    }
    if let Some(v) = args.z {
        cfg.z = v;
    }
    if let Some(v) = args.u_bar {
        cfg.u_bar = v;
    }
    if let Some(v) = &args.iterations {
        cfg.phase_iterations = v[..]
            .try_into()
            .map_err(|_| anyhow::anyhow!("--iterations needs four counts, got {}", v.len()))?;
    }
    if let Some(v) = args.width {
        cfg.width = v;
    }
    if let Some(v) = args.height {
        cfg.height = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.frame_margin {
        cfg.frame_margin_fraction = v;
    }
    if let Some(v) = args.snapshots {
        cfg.snapshot_every = Some(v);
    }
    if args.parallel {
        cfg.parallel = true;
    }
    if let Some(v) = args.mode {
        cfg.repulsion_mode = v;
    }
    Ok(cfg)
}

pub fn embed(args: &EmbedArgs, out: &mut impl Write) -> Result<()> {
    let cfg = build_config(args)?;
    let opts = LoadOptions {
        format: args.format,
        label_column: args.label_column,
        has_header: args.header,
    };
    let data = load_dataset(&args.input, &opts)
        .with_context(|| format!("loading {}", args.input.display()))?;
    log::info!("{} instances loaded from {}", data.len(), args.input.display());

    let total = cfg.total_iterations();
    let mut done = 0;
    let mut trace = run_with_progress(&data, &cfg, |p| {
        done += 1;
        if done % 100 == 0 || done == total {
            log::info!(
                "iteration {done}/{total}: phase {} step {}, temperature {:.2}, {} points",
                p.phase,
                p.iteration,
                p.temperature,
                p.point_count
            );
        }
    })?;
    log::info!(
        "gray budget {}, splits {} of {} attempted",
        trace.gray_budget,
        trace.duplication.succeeded,
        trace.duplication.attempted
    );

    if let Some(k) = args.select_best {
        let labels = data
            .labels()
            .context("--select-best needs labels (--label-column)")?;
        let spec = LambdaSpec::new(LayerSet::ALL, LayerSet::ALL, k);
        let score = trace.select_best_by_lambda(labels, &spec)?;
        let snap = trace.selected_result();
        log::info!("selected phase {} step {} with accuracy {score:.3}", snap.phase, snap.iteration);
    }

    if let Some(dir) = &args.snapshot_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for snap in &trace.snapshots {
            let path = dir.join(format!("snapshot_p{}_i{:04}.csv", snap.phase, snap.iteration));
            EmbeddingDocument::from_points(&snap.points, &data, &cfg)
                .write(&path)
                .with_context(|| format!("writing {}", path.display()))?;
        }
    }

    let doc = EmbeddingDocument::from_points(&trace.selected_result().points, &data, &cfg);
    match &args.output {
        Some(path) => doc
            .write(path)
            .with_context(|| format!("writing {}", path.display()))?,
        None => out.write_all(doc.to_text()?.as_bytes())?,
    }
    Ok(())
}

/// Rows of the accuracy table: layer sets and the value, or `None` when a
/// combination has nothing to evaluate.
pub fn lambda_table(doc: &EmbeddingDocument, k: usize, include_own: bool) -> Result<Vec<(LayerSet, LayerSet, Option<f64>)>> {
    let labels = doc
        .labels
        .as_ref()
        .context("the document has no labels to evaluate against")?;
    let points = doc.projected_points();
    let mut rows = Vec::new();
    for (evaluation, classification) in TABLE_COMBINATIONS {
        let spec = LambdaSpec {
            exclude_own_instance: !include_own,
            ..LambdaSpec::new(evaluation, classification, k)
        };
        let value = match lambda_measure(&points, labels, &spec) {
            Ok(v) => Some(v),
            Err(lvsde::LvsdeError::EmptyEvaluationSet) => None,
            Err(lvsde::LvsdeError::InsufficientNeighbours { available, .. }) => {
                log::warn!("{evaluation}/{classification}: only {available} neighbours for k = {k}");
                None
            }
            Err(e) => return Err(e.into()),
        };
        rows.push((evaluation, classification, value));
    }
    Ok(rows)
}

pub fn evaluate(args: &EvaluateArgs, out: &mut impl Write) -> Result<()> {
    if args.k == 0 {
        bail!("k must be positive");
    }
    let doc = EmbeddingDocument::read(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    writeln!(out, "{:<10} {:<14} {:>7}", "L", "L_hat", "lambda")?;
    for (e, c, v) in lambda_table(&doc, args.k, args.include_own_instance)? {
        let value = v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.3}"));
        writeln!(out, "{:<10} {:<14} {:>7}", e.to_string(), c.to_string(), value)?;
    }
    Ok(())
}

pub fn render(args: &RenderArgs) -> Result<()> {
    if !(args.width > 0.0 && args.height > 0.0 && args.radius > 0.0) {
        bail!("width, height and radius must be positive");
    }
    let doc = EmbeddingDocument::read(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let opts = RenderOptions {
        width: args.width,
        height: args.height,
        radius: args.radius,
        metaphor: args.metaphor,
        legend: !args.no_legend,
    };
    fs::write(&args.output, render_svg(&doc, &opts))
        .with_context(|| format!("writing {}", args.output.display()))?;
    Ok(())
}

pub fn query(args: &QueryArgs, out: &mut impl Write) -> Result<()> {
    let corners: Vec<f64> = args
        .rect
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad --rect `{}`", args.rect))?;
    let [x0, y0, x1, y1] = corners[..] else {
        bail!("--rect needs four numbers x0,y0,x1,y1, got `{}`", args.rect);
    };
    let doc = EmbeddingDocument::read(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let rect = Rect::from_corners(Vec2::new(x0, y0), Vec2::new(x1, y1));
    writeln!(out, "point,instance,x,y,sibling,sibling_x,sibling_y")?;
    for c in query_rect(&doc, &rect) {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            c.point, c.instance, c.position.x, c.position.y, c.sibling, c.sibling_position.x, c.sibling_position.y
        )?;
    }
    Ok(())
}
