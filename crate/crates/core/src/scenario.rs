//! Experiment workload: a random connected infrastructure, a sequence of
//! cumulative embeddings at increasing utilization, and head-to-head runs of
//! every algorithm on each of them.

use std::path::Path;
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algorithm::{run_algorithm, Algorithm};
use crate::embedding::{utilization, EmbeddingState, ServiceChain};
use crate::ilp::SolveConfig;
use crate::par::{self, Execution};
use crate::survivability::{measure, verify_all_failures, write_csv, ScenarioReport};
use crate::topology::{NetworkFile, NodeId, PhysicalNetwork};

/// Consecutive rejected chains after which a scenario stops growing.
pub const MAX_CONSECUTIVE_REJECTIONS: u32 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub node_count: usize,
    pub link_count: usize,
    /// Inclusive range of per-node VNF slots.
    pub capacity_range: [u32; 2],
    pub type_count: usize,
    pub target_utilizations: Vec<f64>,
    /// Inclusive range of VNFs per chain.
    pub chain_length_range: [usize; 2],
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            node_count: 24,
            link_count: 55,
            capacity_range: [20, 50],
            type_count: 3,
            target_utilizations: vec![0.10, 0.20, 0.30, 0.40, 0.55, 0.65, 0.75, 0.85],
            chain_length_range: [2, 5],
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("{links} links requested but {nodes} nodes allow at most {max}")]
    TooManyLinks { links: usize, nodes: usize, max: usize },
    #[error("{links} links cannot connect {nodes} nodes")]
    TooFewLinks { links: usize, nodes: usize },
    #[error("invalid generator config: {0}")]
    InvalidConfig(&'static str),
    #[error("scenario index {index} out of range ({count} targets)")]
    IndexOutOfRange { index: usize, count: usize },
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let n = self.node_count;
        if n == 0 {
            return Err(ScenarioError::InvalidConfig("node_count must be positive"));
        }
        let max = n * (n - 1) / 2;
        if self.link_count > max {
            return Err(ScenarioError::TooManyLinks {
                links: self.link_count,
                nodes: n,
                max,
            });
        }
        if self.link_count + 1 < n {
            return Err(ScenarioError::TooFewLinks {
                links: self.link_count,
                nodes: n,
            });
        }
        if self.capacity_range[0] > self.capacity_range[1] {
            return Err(ScenarioError::InvalidConfig("capacity_range is reversed"));
        }
        let [lo, hi] = self.chain_length_range;
        if lo == 0 || lo > hi {
            return Err(ScenarioError::InvalidConfig(
                "chain_length_range must be non-empty and positive",
            ));
        }
        if self.type_count == 0 {
            return Err(ScenarioError::InvalidConfig("type_count must be positive"));
        }
        if self.target_utilizations.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(ScenarioError::InvalidConfig("targets must lie in [0, 1]"));
        }
        Ok(())
    }

    fn infrastructure_rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn workload_rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(1);
        rng
    }
}

/// Uniform random labelled tree from a random Prüfer sequence.
fn random_tree(n: usize, rng: &mut impl Rng) -> Vec<(NodeId, NodeId)> {
    if n < 2 {
        return Vec::new();
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &v in &seq {
        degree[v] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &v in &seq {
        let leaf = (0..n).find(|&u| degree[u] == 1).expect("a leaf always exists");
        edges.push((leaf.min(v), leaf.max(v)));
        degree[leaf] -= 1;
        degree[v] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&u| degree[u] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Random connected network: a uniform spanning tree plus uniformly chosen
/// extra links up to `link_count`, and uniform integer capacities.
pub fn generate_infrastructure(gcfg: &GeneratorConfig) -> Result<PhysicalNetwork, ScenarioError> {
    gcfg.validate()?;
    let n = gcfg.node_count;
    let mut rng = gcfg.infrastructure_rng();
    let [lo, hi] = gcfg.capacity_range;
    let capacity: Vec<u32> = (0..n).map(|_| rng.gen_range(lo..=hi)).collect();

    let mut links = random_tree(n, &mut rng);
    let mut others: Vec<(NodeId, NodeId)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .filter(|e| !links.contains(e))
        .collect();
    others.shuffle(&mut rng);
    links.extend(others.into_iter().take(gcfg.link_count - links.len()));

    Ok(PhysicalNetwork::new(n, &links, capacity).expect("generated links are in range"))
}

/// One embedding scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub index: usize,
    pub target: f64,
    pub state: EmbeddingState,
    pub utilization: f64,
    /// Chains embedded so far, this scenario included.
    pub chains: usize,
    pub rejections: u64,
    /// Growth stopped on consecutive rejections before reaching the target.
    pub stalled: bool,
}

impl Scenario {
    pub fn label(&self) -> String {
        format!("s{}", self.index + 1)
    }
}

fn random_chain(id: u64, gcfg: &GeneratorConfig, nodes: usize, rng: &mut impl Rng) -> ServiceChain {
    let [lo, hi] = gcfg.chain_length_range;
    let len = rng.gen_range(lo..=hi);
    ServiceChain {
        id,
        vnf_types: (0..len).map(|_| rng.gen_range(0..gcfg.type_count)).collect(),
        source: rng.gen_range(0..nodes),
        destination: rng.gen_range(0..nodes),
    }
}

/// All scenarios; scenario `k + 1` extends the embedding of scenario `k`.
pub fn generate_scenarios(net: &PhysicalNetwork, gcfg: &GeneratorConfig) -> Vec<Scenario> {
    let mut rng = gcfg.workload_rng();
    let mut state = EmbeddingState::empty(net.node_count(), gcfg.type_count);
    let mut next_id = 0u64;
    let mut rejections = 0u64;
    let mut out = Vec::with_capacity(gcfg.target_utilizations.len());
    for (index, &target) in gcfg.target_utilizations.iter().enumerate() {
        let mut streak = 0;
        let mut stalled = false;
        while utilization(net, &state) < target {
            let chain = random_chain(next_id, gcfg, net.node_count(), &mut rng);
            next_id += 1;
            match state.embed_chain(net, &chain) {
                Ok(_) => streak = 0,
                Err(e) => {
                    log::trace!("{e}");
                    rejections += 1;
                    streak += 1;
                    if streak >= MAX_CONSECUTIVE_REJECTIONS {
                        stalled = true;
                        log::info!(
                            "scenario s{} stalled at utilization {:.3} (target {target})",
                            index + 1,
                            utilization(net, &state)
                        );
                        break;
                    }
                }
            }
        }
        out.push(Scenario {
            index,
            target,
            utilization: utilization(net, &state),
            chains: state.placements().len(),
            state: state.clone(),
            rejections,
            stalled,
        });
    }
    out
}

pub fn generate_scenario(
    net: &PhysicalNetwork,
    gcfg: &GeneratorConfig,
    k: usize,
) -> Result<Scenario, ScenarioError> {
    let count = gcfg.target_utilizations.len();
    if k >= count {
        return Err(ScenarioError::IndexOutOfRange { index: k, count });
    }
    let truncated = GeneratorConfig {
        target_utilizations: gcfg.target_utilizations[..=k].to_vec(),
        ..gcfg.clone()
    };
    Ok(generate_scenarios(net, &truncated).pop().expect("k < count"))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub generator: GeneratorConfig,
    pub solve: SolveConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteOptions {
    pub execution: Execution,
    /// Reported runtimes are the median of this many identical runs.
    pub timing_repeats: u32,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            execution: Execution::Parallel,
            timing_repeats: 5,
        }
    }
}

/// Per-scenario embedding summary (the utilization profile).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSummary {
    pub scenario: String,
    pub target: f64,
    pub utilization: f64,
    pub chains: usize,
    pub vnfs: u64,
    pub active_pairs: usize,
    pub rejections: u64,
    pub stalled: bool,
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub network: PhysicalNetwork,
    pub scenarios: Vec<Scenario>,
    /// Ordered by scenario, then algorithm (pull, push, exact).
    pub reports: Vec<ScenarioReport>,
}

/// Runs every algorithm on every scenario, verifies and measures each plan.
pub fn run_suite(
    gcfg: &GeneratorConfig,
    scfg: &SolveConfig,
    opts: SuiteOptions,
) -> Result<SuiteResult, ScenarioError> {
    let net = generate_infrastructure(gcfg)?;
    let scenarios = generate_scenarios(&net, gcfg);
    let cells: Vec<(usize, Algorithm)> = (0..scenarios.len())
        .flat_map(|k| Algorithm::ALL.into_iter().map(move |a| (k, a)))
        .collect();
    let reports = par::map(&cells, opts.execution, |&(k, alg)| {
        run_cell(&net, &scenarios[k], scfg, alg, opts.timing_repeats)
    });
    Ok(SuiteResult {
        network: net,
        scenarios,
        reports,
    })
}

/// Runs one algorithm on one scenario and builds its report.
pub fn run_cell(
    net: &PhysicalNetwork,
    scenario: &Scenario,
    cfg: &SolveConfig,
    algorithm: Algorithm,
    timing_repeats: u32,
) -> ScenarioReport {
    let state = &scenario.state;
    let run = run_algorithm(net, state, cfg, algorithm);
    let mut runtime = run.runtime;
    if timing_repeats > 1 {
        let mut times: Vec<Duration> = (1..timing_repeats)
            .map(|_| run_algorithm(net, state, cfg, algorithm).runtime)
            .chain(std::iter::once(runtime))
            .collect();
        times.sort_unstable();
        runtime = times[times.len() / 2];
    }
    let (metrics, survivable, matches) = match &run.plan {
        Some(plan) => {
            let verdict = verify_all_failures(net, state, plan, cfg, Execution::Sequential);
            let mut uncovered = verdict.uncovered_groups();
            uncovered.sort_unstable();
            (
                Some(measure(net, state, plan, runtime)),
                Some(verdict.is_survivable()),
                Some(uncovered == plan.unprotected),
            )
        }
        None => (None, None, None),
    };
    ScenarioReport {
        scenario: scenario.label(),
        utilization: scenario.utilization,
        algorithm,
        status: run.status,
        metrics,
        runtime,
        optimal: run.status.optimal_flag(),
        survivable,
        sweep_matches_plan: matches,
        search_nodes: run.search_nodes,
    }
}

impl SuiteResult {
    pub fn summaries(&self) -> Vec<ScenarioSummary> {
        self.scenarios
            .iter()
            .map(|s| ScenarioSummary {
                scenario: s.label(),
                target: s.target,
                utilization: s.utilization,
                chains: s.chains,
                vnfs: s.state.total_vnfs(),
                active_pairs: s.state.active_pairs().count(),
                rejections: s.rejections,
                stalled: s.stalled,
            })
            .collect()
    }

    /// Results CSV as bytes.
    pub fn csv(&self, with_timing: bool) -> Vec<u8> {
        let mut buf = Vec::new();
        write_csv(&mut buf, &self.reports, with_timing).expect("writing to memory");
        buf
    }

    /// Writes `results.csv`, `results.json`, `scenarios.csv`, `network.json`
    /// and `config.json` into `dir`.
    pub fn write_outputs(
        &self,
        dir: &Path,
        config: &SuiteConfig,
        with_timing: bool,
    ) -> Result<(), SuiteIoError> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("results.csv"), self.csv(with_timing))?;

        let reports: Vec<ScenarioReport> = if with_timing {
            self.reports.clone()
        } else {
            self.reports
                .iter()
                .cloned()
                .map(|mut r| {
                    r.runtime = Duration::ZERO;
                    if let Some(m) = &mut r.metrics {
                        m.runtime = Duration::ZERO;
                    }
                    r
                })
                .collect()
        };
        std::fs::write(
            dir.join("results.json"),
            serde_json::to_string_pretty(&reports)?,
        )?;

        let mut w = csv::Writer::from_path(dir.join("scenarios.csv"))?;
        for s in self.summaries() {
            w.serialize(s)?;
        }
        w.flush()?;

        let network: NetworkFile = self.network.to_file();
        std::fs::write(dir.join("network.json"), serde_json::to_string(&network)?)?;
        std::fs::write(dir.join("config.json"), serde_json::to_string_pretty(config)?)?;
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
