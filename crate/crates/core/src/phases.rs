//! The four-phase controller.
//!
//! 1. plain force-directed drawing, no frame;
//! 2. a frame is fixed around the layout and, one per iteration, the point under
//!    the highest replication pressure is made ineffective and moved to gray;
//! 3. gray points become effective and mobile, red points freeze;
//! 4. every gray point is offered a split once, then the gray layer keeps relaxing.

use crate::distances::{build_neighbourhood_graph, DistanceModel, NeighbourhoodGraph};
use crate::error::Result;
use crate::eval::{lambda_measure, LambdaSpec};
use crate::forces::{attractive_pass, repulsive_pass, temperature_for, ForceRecord, PassOptions};
use crate::geometry::Rect;
use crate::model::{init_random_embedding, DataSet, EmbeddingState, Layer, ProjectedPoint, RunConfig};
use crate::splitting::{duplicate_point, replication_pressure, select_gray_budget, DuplicationOutcome, PressureResult};

/// Reported after every iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Progress {
    pub phase: u8,
    pub iteration: usize,
    pub temperature: f64,
    pub point_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub phase: u8,
    /// 0-based iteration within the phase.
    pub iteration: usize,
    pub points: Vec<ProjectedPoint>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DuplicationSummary {
    pub attempted: usize,
    pub succeeded: usize,
    pub failed: usize,
    pub rejected: usize,
}

#[derive(Debug, Clone)]
pub struct RunTrace {
    /// Opt-in intermediate snapshots; the last entry is always the final state.
    pub snapshots: Vec<Snapshot>,
    /// Index into `snapshots` of the designated result.
    pub selected: usize,
    pub final_state: EmbeddingState,
    pub graph: NeighbourhoodGraph,
    pub gray_budget: usize,
    pub duplication: DuplicationSummary,
    pub iterations_run: usize,
}

impl RunTrace {
    pub fn selected_result(&self) -> &Snapshot {
        &self.snapshots[self.selected]
    }

    /// Designates the snapshot with the highest layered KNN accuracy as the
    /// result; ties go to the later snapshot.
    pub fn select_best_by_lambda(&mut self, labels: &[String], spec: &LambdaSpec) -> Result<f64> {
        let mut best: Option<(usize, f64)> = None;
        for (i, snap) in self.snapshots.iter().enumerate() {
            let score = lambda_measure(&snap.points, labels, spec)?;
            if best.is_none_or(|(_, s)| score >= s) {
                best = Some((i, score));
            }
        }
        let (index, score) = best.expect("a trace always holds the final snapshot");
        self.selected = index;
        Ok(score)
    }
}

struct Engine<'a> {
    cfg: &'a RunConfig,
    model: DistanceModel,
    graph: NeighbourhoodGraph,
    state: EmbeddingState,
    record: ForceRecord,
    opts: PassOptions,
    snapshots: Vec<Snapshot>,
    iterations_run: usize,
}

impl Engine<'_> {
    fn step<F: FnMut(&Progress)>(&mut self, phase: u8, mu: usize, progress: &mut F) {
        self.state.phase = phase;
        self.state.iteration_in_phase = mu;
        self.state.temperature = temperature_for(phase, mu, self.cfg.u_bar);
        self.record.clear(self.state.points.len());
        repulsive_pass(&mut self.state, &self.opts, &mut self.record);
        attractive_pass(&mut self.state, &self.graph, &self.model, &self.opts, &mut self.record);
        self.iterations_run += 1;
        if let Some(every) = self.cfg.snapshot_every {
            if self.iterations_run.is_multiple_of(every) {
                self.snapshots.push(self.snapshot());
            }
        }
        progress(&Progress {
            phase,
            iteration: mu,
            temperature: self.state.temperature,
            point_count: self.state.points.len(),
        });
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            phase: self.state.phase,
            iteration: self.state.iteration_in_phase,
            points: self.state.points.clone(),
        }
    }

    fn pressures(&self) -> Vec<PressureResult> {
        (0..self.state.points.len())
            .map(|p| replication_pressure(&self.record.vectors_on(p), self.cfg.axis_count))
            .collect()
    }

    fn phase_one<F: FnMut(&Progress)>(&mut self, progress: &mut F) {
        self.record.set_enabled(false);
        for mu in 0..self.cfg.phase_iterations[0] {
            self.step(1, mu, progress);
        }
    }

    fn phase_two<F: FnMut(&Progress)>(&mut self, progress: &mut F) -> usize {
        let bounds = Rect::bounding(self.state.points.iter().map(|p| p.position))
            .expect("at least two points");
        self.state.frame = Some(bounds.expanded(self.cfg.frame_margin_fraction));
        self.record.set_enabled(true);
        let n = self.state.instance_count();
        let mut budget = 0;
        let mut marked = 0;
        for mu in 0..self.cfg.phase_iterations[1] {
            self.step(2, mu, progress);
            let pressures = self.pressures();
            if mu == 0 {
                let values: Vec<f64> = pressures.iter().map(|r| r.pressure).collect();
                budget = select_gray_budget(
                    &values,
                    n,
                    self.cfg.gray_sigma_factor,
                    self.cfg.gray_cap_fraction,
                );
                log::debug!("gray budget {budget} of {n} instances");
            }
            if marked < budget {
                let candidate = pressures
                    .iter()
                    .enumerate()
                    .filter(|(p, _)| !self.state.points[*p].ineffective)
                    .fold(None, |best: Option<(usize, f64)>, (p, r)| match best {
                        Some((_, v)) if v >= r.pressure => best,
                        _ => Some((p, r.pressure)),
                    });
                if let Some((p, _)) = candidate {
                    let point = &mut self.state.points[p];
                    point.make_ineffective();
                    point.layer = Layer::Gray;
                    marked += 1;
                }
            }
        }
        self.record.set_enabled(false);
        budget
    }

    fn phase_three<F: FnMut(&Progress)>(&mut self, progress: &mut F) {
        for point in &mut self.state.points {
            if point.ineffective {
                point.ineffective = false;
                point.frozen = false;
            } else {
                point.frozen = true;
            }
        }
        for mu in 0..self.cfg.phase_iterations[2] {
            self.step(3, mu, progress);
        }
    }

    fn phase_four<F: FnMut(&Progress)>(&mut self, progress: &mut F) -> DuplicationSummary {
        let mut summary = DuplicationSummary::default();
        self.record.set_enabled(true);
        self.step(4, 0, progress);
        let pressures = self.pressures();
        self.record.set_enabled(false);
        for (p, pressure) in pressures.iter().enumerate() {
            if self.state.points[p].layer != Layer::Gray {
                continue;
            }
            summary.attempted += 1;
            match duplicate_point(
                &mut self.state,
                &mut self.graph,
                p,
                pressure.split_angle(),
                self.cfg.max_projections,
            ) {
                DuplicationOutcome::Duplicated { .. } => summary.succeeded += 1,
                DuplicationOutcome::Failed => summary.failed += 1,
                DuplicationOutcome::Rejected => summary.rejected += 1,
            }
        }
        log::debug!("duplication: {summary:?}");
        for mu in 1..self.cfg.phase_iterations[3] {
            self.step(4, mu, progress);
        }
        summary
    }
}

/// Runs the full pipeline with default settings for progress reporting.
pub fn run(data: &DataSet, cfg: &RunConfig) -> Result<RunTrace> {
    run_with_progress(data, cfg, |_| {})
}

/// Preliminary steps, random layout and the four phases. `progress` is called
/// after every iteration.
pub fn run_with_progress<F: FnMut(&Progress)>(
    data: &DataSet,
    cfg: &RunConfig,
    mut progress: F,
) -> Result<RunTrace> {
    cfg.validate(data.len())?;
    let model = DistanceModel::build(data, cfg.metric, cfg.z)?;
    let graph = build_neighbourhood_graph(&model.transformed, cfg.p_hat)?;
    let state = init_random_embedding(data, cfg)?;
    let mut engine = Engine {
        cfg,
        model,
        graph,
        state,
        record: ForceRecord::new(false),
        opts: PassOptions {
            b: cfg.b,
            seed: cfg.seed,
            mode: cfg.repulsion_mode,
            parallel: cfg.parallel,
        },
        snapshots: Vec::new(),
        iterations_run: 0,
    };

    engine.phase_one(&mut progress);
    let gray_budget = engine.phase_two(&mut progress);
    engine.phase_three(&mut progress);
    let duplication = engine.phase_four(&mut progress);

    let last_saved = engine
        .snapshots
        .last()
        .is_some_and(|s| s.phase == 4 && s.iteration + 1 == cfg.phase_iterations[3]);
    if !last_saved {
        let snap = engine.snapshot();
        engine.snapshots.push(snap);
    }
    Ok(RunTrace {
        selected: engine.snapshots.len() - 1,
        snapshots: engine.snapshots,
        final_state: engine.state,
        graph: engine.graph,
        gray_budget,
        duplication,
        iterations_run: engine.iterations_run,
    })
}
