//! The outer loop: restarts with a growing population, hill-valley
//! clustering of each initial population, one core search per cluster and an
//! elite archive holding the presumed optima.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::amalgam::{guideline_pop_size, init_core_search, AmalgamParams, Termination};
use crate::error::{Error, EvalError, Result};
use crate::hillvalley::{expected_edge_length, hill_valley_clustering_with_anchors, hill_valley_test_with_depth, n_test_points, Cluster};
use crate::problems::{Bounds, Evaluator, Problem};
use crate::sampling::{sample_initial_population, LabeledHistory};
use crate::solution::{sort_by_fitness_desc, Solution};

/// Population sizing recursion `(N, N_inc, N_C, N_C_inc)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestartParams {
    pub n: usize,
    pub n_inc: f64,
    pub n_c: f64,
    pub n_c_inc: f64,
}

impl RestartParams {
    pub fn new(n: usize, n_inc: f64, n_c: f64, n_c_inc: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidRestartParams(format!("N = {n} must be at least 2")));
        }
        if !(n_inc > 1.0) {
            return Err(Error::InvalidRestartParams(format!("N_inc = {n_inc} must exceed 1")));
        }
        if !(n_c > 0.0) {
            return Err(Error::InvalidRestartParams(format!("N_C = {n_c} must be positive")));
        }
        if !(n_c_inc >= 1.0) {
            return Err(Error::InvalidRestartParams(format!("N_C_inc = {n_c_inc} must be at least 1")));
        }
        Ok(Self { n, n_inc, n_c, n_c_inc })
    }

    /// `(2^6, 2, 0.8, 1.1)`.
    pub fn hillvallea19() -> Self {
        Self {
            n: 64,
            n_inc: 2.0,
            n_c: 0.8,
            n_c_inc: 1.1,
        }
    }
}

impl Default for RestartParams {
    fn default() -> Self {
        Self::hillvallea19()
    }
}

/// Grows the population and the cluster-size factor for the next restart.
pub fn restart_update(p: RestartParams) -> RestartParams {
    RestartParams {
        n: (p.n as f64 * p.n_inc).round() as usize,
        n_c: p.n_c * p.n_c_inc,
        ..p
    }
}

/// Core-search population size for a cluster: `max(2, ceil(N_C * guideline(d)))`.
pub fn cluster_pop_size(p: &RestartParams, d: usize, _cluster: &Cluster) -> usize {
    // the small slack keeps 0.8 * 10 = 8.000000000000002 at 8
    let raw = p.n_c * guideline_pop_size(d) as f64;
    ((raw - 1e-9).ceil() as usize).max(2)
}

/// How the initial population size scales with dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum XiScaling {
    /// `N * d`.
    #[default]
    WithDimension,
    /// `N`, regardless of dimension.
    Literal,
}

impl XiScaling {
    pub fn initial_size(self, n: usize, d: usize) -> usize {
        match self {
            XiScaling::WithDimension => n * d,
            XiScaling::Literal => n,
        }
    }
}

/// Everything a run needs besides the problem and the seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub restart: RestartParams,
    pub xi_scaling: XiScaling,
    /// Fraction of each initial population passed to clustering.
    pub selection_fraction: f64,
    pub amalgam: AmalgamParams,
    /// Elites more than this below the best elite are dropped. `None` keeps
    /// every distinct niche, local optima included.
    pub archive_tolerance: Option<f64>,
    /// Relative depth a valley needs before the archive separates two
    /// elites; scaled by `max(1, |f|)`.
    pub archive_valley_depth: f64,
    /// Cluster the archive elites together with the selection and skip
    /// every cluster that contains one.
    pub skip_known_niches: bool,
    /// A core search stops early once the best elite exceeds its best by
    /// more than this multiple of its selection's fitness spread.
    pub dominated_abort: Option<f64>,
    /// Floor on the number of test points in the archive's niche test.
    pub archive_min_test_points: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            restart: RestartParams::hillvallea19(),
            xi_scaling: XiScaling::WithDimension,
            selection_fraction: 0.35,
            amalgam: AmalgamParams::default(),
            archive_tolerance: Some(1e-6),
            archive_valley_depth: 1e-12,
            skip_known_niches: true,
            dominated_abort: Some(100.0),
            archive_min_test_points: 5,
        }
    }
}

/// What [`EliteArchive::update`] did with a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArchiveDecision {
    /// New niche; appended.
    Appended,
    /// Same niche as an elite and fitter; the elite was replaced.
    Replaced,
    /// Same niche as an elite that is at least as fit.
    Duplicate,
    /// Worse than the best elite by more than the archive tolerance.
    BelowTolerance,
    /// The budget ran out during the niche test.
    Unverified,
}

/// The presumed optima found so far with their acceptance times.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EliteArchive {
    elites: Vec<Solution>,
    accept_feval: Vec<u64>,
    unverified: Vec<Solution>,
    tolerance: Option<f64>,
    valley_depth: f64,
    min_test_points: usize,
}

impl EliteArchive {
    pub fn new(tolerance: Option<f64>) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }

    /// Sets the relative valley depth used by the niche test.
    pub fn with_valley_depth(mut self, depth: f64) -> Self {
        self.valley_depth = depth;
        self
    }

    /// Sets a floor on the number of test points of the niche test.
    pub fn with_min_test_points(mut self, n: usize) -> Self {
        self.min_test_points = n;
        self
    }

    pub fn len(&self) -> usize {
        self.elites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elites.is_empty()
    }

    pub fn elites(&self) -> &[Solution] {
        &self.elites
    }

    pub fn accept_feval(&self) -> &[u64] {
        &self.accept_feval
    }

    /// Candidates whose niche test was cut off by the budget; not part of
    /// the solution set.
    pub fn unverified(&self) -> &[Solution] {
        &self.unverified
    }

    fn best_fitness(&self) -> Option<f64> {
        self.elites.iter().map(|e| e.f).reduce(f64::max)
    }

    /// Offers a terminated core search's best to the archive. The candidate
    /// is tested against its nearest elite. New niches are stamped with the
    /// evaluation count at acceptance, replacements with the candidate's own
    /// evaluation index.
    pub fn update(&mut self, candidate: Solution, ev: &mut Evaluator<'_>, bounds: &Bounds) -> ArchiveDecision {
        if let (Some(tol), Some(best)) = (self.tolerance, self.best_fitness()) {
            if candidate.f < best - tol {
                return ArchiveDecision::BelowTolerance;
            }
        }
        if self.elites.is_empty() {
            self.push(candidate, ev.evals_used());
            return ArchiveDecision::Appended;
        }
        let (nearest, dist) = self
            .elites
            .iter()
            .enumerate()
            .map(|(i, e)| (i, e.distance(&candidate)))
            .fold((0, f64::INFINITY), |acc, (i, d)| if d < acc.1 { (i, d) } else { acc });
        let eel = expected_edge_length(self.elites.len() + 1, bounds);
        let n_t = n_test_points(dist, eel).max(self.min_test_points);
        let elite = &self.elites[nearest];
        let depth = self.valley_depth * candidate.f.min(elite.f).abs().max(1.0);
        let same_niche = match hill_valley_test_with_depth(ev, &candidate, elite, n_t, depth) {
            Ok(v) => v,
            Err(EvalError::BudgetExhausted) => {
                self.unverified.push(candidate);
                return ArchiveDecision::Unverified;
            }
            Err(e) => panic!("niche test on in-bounds points failed: {e}"),
        };
        let decision = if !same_niche {
            self.push(candidate, ev.evals_used());
            ArchiveDecision::Appended
        } else if candidate.f > self.elites[nearest].f {
            self.elites.remove(nearest);
            self.accept_feval.remove(nearest);
            let stamp = candidate.eval_index;
            self.insert(candidate, stamp);
            ArchiveDecision::Replaced
        } else {
            ArchiveDecision::Duplicate
        };
        self.prune();
        decision
    }

    // A replacement is stamped with the time its point was evaluated, which
    // can precede later acceptances; keep the list ordered by stamp.
    fn insert(&mut self, s: Solution, mut feval: u64) {
        while self.accept_feval.binary_search(&feval).is_ok() {
            feval += 1;
        }
        let at = self.accept_feval.partition_point(|&t| t < feval);
        self.elites.insert(at, s);
        self.accept_feval.insert(at, feval);
    }

    fn push(&mut self, s: Solution, feval: u64) {
        // Acceptance times must increase strictly along the list.
        let stamp = match self.accept_feval.last() {
            Some(&last) if feval <= last => last + 1,
            _ => feval,
        };
        self.elites.push(s);
        self.accept_feval.push(stamp);
    }

    fn prune(&mut self) {
        let (Some(tol), Some(best)) = (self.tolerance, self.best_fitness()) else {
            return;
        };
        let keep: Vec<bool> = self.elites.iter().map(|e| e.f >= best - tol).collect();
        let mut k = keep.iter();
        self.elites.retain(|_| *k.next().unwrap());
        let mut k = keep.iter();
        self.accept_feval.retain(|_| *k.next().unwrap());
    }
}

/// `update_elite_archive` in free-function form.
pub fn update_elite_archive(
    archive: &mut EliteArchive,
    candidate: Solution,
    ev: &mut Evaluator<'_>,
    bounds: &Bounds,
) -> ArchiveDecision {
    archive.update(candidate, ev, bounds)
}

/// One accepted elite, as needed for dynamic F1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub feval: u64,
    pub fitness: f64,
    pub x: Vec<f64>,
}

/// The final solution set ordered by acceptance time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
    pub budget: u64,
    pub seed: u64,
}

impl RunTrace {
    pub fn from_archive(archive: &EliteArchive, budget: u64, seed: u64) -> Self {
        let records = archive
            .elites()
            .iter()
            .zip(archive.accept_feval())
            .map(|(e, &feval)| TraceRecord {
                feval,
                fitness: e.f,
                x: e.x.clone(),
            })
            .collect();
        Self { records, budget, seed }
    }

    /// The records as solutions stamped with their acceptance time.
    pub fn solutions(&self) -> Vec<Solution> {
        self.records
            .iter()
            .map(|r| Solution::new(r.x.clone(), r.fitness, r.feval))
            .collect()
    }
}

/// Bookkeeping for one restart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub population_size: usize,
    pub cluster_size_factor: f64,
    pub n_clusters: usize,
    pub evals_at_start: u64,
    /// Evaluations spent on hill-valley tests while clustering.
    pub clustering_evals: u64,
}

/// Per-cluster bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreSearchRecord {
    pub restart: usize,
    /// The cluster's best solution, where the search started.
    pub start: Solution,
    /// The search's best at termination.
    pub end: Solution,
    pub pop_size: usize,
    pub generations: usize,
    pub termination: Termination,
    pub decision: ArchiveDecision,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub archive: EliteArchive,
    pub trace: RunTrace,
    pub restarts: Vec<RestartRecord>,
    pub core_searches: Vec<CoreSearchRecord>,
    pub evals_used: u64,
}

/// Runs the optimizer on `problem` until its budget is spent.
pub fn run(problem: &Problem, config: &RunConfig, seed: u64) -> RunOutcome {
    let bounds = problem.bounds();
    let d = problem.dim();
    let mut ev = Evaluator::new(problem);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = RestartParams {
        n: config.xi_scaling.initial_size(config.restart.n, d),
        ..config.restart
    };
    let mut archive = EliteArchive::new(config.archive_tolerance).with_valley_depth(config.archive_valley_depth)
        .with_min_test_points(config.archive_min_test_points);
    let mut history = LabeledHistory::empty();
    let mut restarts = Vec::new();
    let mut core_searches = Vec::new();

    'restarts: while !ev.is_exhausted() {
        let n = params.n.min(ev.remaining_budget() as usize);
        let record_index = restarts.len();
        restarts.push(RestartRecord {
            population_size: n,
            cluster_size_factor: params.n_c,
            n_clusters: 0,
            evals_at_start: ev.evals_used(),
            clustering_evals: 0,
        });

        let points = sample_initial_population(n, bounds, &history, &mut rng);
        let mut population = Vec::with_capacity(n);
        for x in points {
            match ev.evaluate_solution(x) {
                Ok(s) => population.push(s),
                Err(_) => break 'restarts,
            }
        }
        sort_by_fitness_desc(&mut population);
        let n_sel = ((config.selection_fraction * n as f64).ceil() as usize).clamp(1, n);
        // Elites join the selection so that niches found earlier can be
        // recognised; they sit at the end of `pool` before sorting.
        let mut pool: Vec<(Solution, bool)> = population[..n_sel].iter().cloned().map(|s| (s, false)).collect();
        if config.skip_known_niches {
            pool.extend(archive.elites().iter().cloned().map(|s| (s, true)));
        }
        let mut order: Vec<usize> = (0..pool.len()).collect();
        order.sort_by(|&a, &b| pool[b].0.f.total_cmp(&pool[a].0.f));
        let selection: Vec<Solution> = order.iter().map(|&i| pool[i].0.clone()).collect();
        let anchors: Vec<bool> = order.iter().map(|&i| pool[i].1).collect();
        let clustering = hill_valley_clustering_with_anchors(&selection, &anchors, &mut ev, bounds);

        let mut pop_labels = vec![None; n];
        let mut known = vec![false; clustering.clusters.len()];
        for (rank, &i) in order.iter().enumerate() {
            let label = clustering.labels[rank];
            if pool[i].1 {
                known[label] = true;
            } else {
                pop_labels[i] = Some(label);
            }
        }
        history = LabeledHistory::new(population.into_iter().map(|s| s.x).collect(), pop_labels)
            .expect("one label per point");

        let mut clusters: Vec<Cluster> = clustering
            .clusters
            .into_iter()
            .zip(&known)
            .filter(|(_, &k)| !k)
            .map(|(c, _)| c)
            .collect();
        clusters.sort_by(|a, b| b.best().f.total_cmp(&a.best().f));
        restarts[record_index].n_clusters = clusters.len();
        restarts[record_index].clustering_evals = clustering.evaluations;

        for cluster in &clusters {
            if ev.is_exhausted() {
                break 'restarts;
            }
            let pop_size = cluster_pop_size(&params, d, cluster);
            let mut state = init_core_search(cluster, pop_size, bounds, config.amalgam);
            let target = archive.elites().iter().map(|e| e.f).fold(f64::NEG_INFINITY, f64::max);
            let termination = loop {
                state.step(&mut ev, bounds, &mut rng);
                if let Some(t) = state.termination(state.params().fitness_tol, state.params().param_tol) {
                    break t;
                }
                if let (Some(k), Some(spread)) = (config.dominated_abort, state.selection_spread) {
                    if target - state.best.f > k * spread {
                        break Termination::Dominated;
                    }
                }
            };
            let decision = archive.update(state.best.clone(), &mut ev, bounds);
            core_searches.push(CoreSearchRecord {
                restart: record_index,
                start: cluster.best().clone(),
                end: state.best.clone(),
                pop_size,
                generations: state.generation,
                termination,
                decision,
            });
        }
        params = restart_update(params);
    }

    let trace = RunTrace::from_archive(&archive, problem.budget(), seed);
    RunOutcome {
        evals_used: ev.evals_used(),
        archive,
        trace,
        restarts,
        core_searches,
    }
}
