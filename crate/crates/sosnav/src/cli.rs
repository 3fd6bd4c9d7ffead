//! Command-line interface. Every flag can also be set through an
//! environment variable named `SOSNAV_<FLAG>` (for example `SOSNAV_SEED`).

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sosnav_core::controller::{Scene, DEFAULT_ETA};
use sosnav_core::env_model::{generate_env, generate_episode_with, EpisodeParams, GeneratorParams, PanoDims};
use sosnav_core::nav_scoring::{build_toy_scenario, similarity_matrix, SimilarityMatrix, ToyParams};
use sosnav_core::rng::derive_seed;
use sosnav_core::NodeId;

use crate::config::RunConfig;
use crate::formats::{env_path, episodes_path, to_document, write_text, EnvFile, EpisodeFile};
use crate::runner::{comparison_table, run_suite, thread_pool};
use crate::study::{report, scatter_svg, score_nds_points, StudyParams};
use crate::{svg, Error};

#[derive(Debug, Parser)]
#[command(name = "sosnav", version, about = "Spectral explore/exploit navigation benchmark")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an environment and write it to `<out-dir>/env.json`.
    GenEnv(GenEnvArgs),
    /// Sample episodes for an environment into `<out-dir>/episodes.json`.
    GenEpisodes(GenEpisodesArgs),
    /// Run policies on episodes; writes results.jsonl, summary.json and
    /// comparison.txt to the output directory.
    Run(RunArgs),
    /// Relate navigation score to nDS on augmented trajectories.
    StudyScoreNds(StudyArgs),
    /// Draw the node-by-token similarity matrix of a trajectory.
    PlotSimmatrix(PlotArgs),
}

#[derive(Debug, Args)]
pub struct GenEnvArgs {
    #[arg(long, env = "SOSNAV_SEED")]
    pub seed: u64,
    #[arg(long, env = "SOSNAV_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 40)]
    pub nodes: usize,
    #[arg(long, default_value_t = 8)]
    pub rooms: usize,
    #[arg(long, default_value_t = 12)]
    pub categories: usize,
    #[arg(long, default_value_t = 256)]
    pub pano_width: usize,
    #[arg(long, default_value_t = 64)]
    pub pano_height: usize,
}

#[derive(Debug, Args)]
pub struct GenEpisodesArgs {
    #[arg(long, env = "SOSNAV_ENV")]
    pub env: PathBuf,
    #[arg(long, env = "SOSNAV_SEED")]
    pub seed: u64,
    #[arg(long, env = "SOSNAV_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long, default_value_t = 3.0)]
    pub d_success: f64,
    /// Step budget is `ceil(factor · ground-truth edges) + slack`.
    #[arg(long, default_value_t = 2.0)]
    pub budget_factor: f64,
    #[arg(long, default_value_t = 4)]
    pub budget_slack: usize,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long, env = "SOSNAV_ENV")]
    pub env: PathBuf,
    #[arg(long, env = "SOSNAV_EPISODES")]
    pub episodes: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Policy configuration (TOML). Defaults to the built-in comparison of
    /// all exploitation strategies.
    #[arg(long, env = "SOSNAV_CONFIG")]
    pub config: Option<PathBuf>,
    #[arg(long, env = "SOSNAV_SEED")]
    pub seed: u64,
    #[arg(long, env = "SOSNAV_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    /// Comma-separated subset of configured policy names.
    #[arg(long, env = "SOSNAV_POLICIES", value_delimiter = ',')]
    pub policies: Vec<String>,
    /// Worker threads; 0 uses one per core.
    #[arg(long, env = "SOSNAV_JOBS", default_value_t = 0)]
    pub jobs: usize,
    /// Also write the final map of every run to snapshots.jsonl.
    #[arg(long)]
    pub snapshots: bool,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, env = "SOSNAV_SEED")]
    pub seed: u64,
    #[arg(long, env = "SOSNAV_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, env = "SOSNAV_JOBS", default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, default_value_t = 10)]
    pub per_episode: usize,
    #[arg(long, default_value_t = sosnav_core::data_aug::DEFAULT_MAX_HOPS)]
    pub max_hops: usize,
    #[arg(long, default_value_t = DEFAULT_ETA)]
    pub eta: usize,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long, env = "SOSNAV_ENV", required_unless_present = "toy_seed")]
    pub env: Option<PathBuf>,
    #[arg(long, env = "SOSNAV_EPISODES", required_unless_present = "toy_seed")]
    pub episodes: Option<PathBuf>,
    #[arg(long, required_unless_present = "toy_seed")]
    pub episode_id: Option<u64>,
    /// Comma-separated node ids; defaults to the ground-truth path.
    #[arg(long, value_delimiter = ',')]
    pub trajectory: Option<Vec<u32>>,
    /// Plot a seeded two-candidate toy scenario instead (the candidate that
    /// continues the instruction order).
    #[arg(long, conflicts_with_all = ["env", "episodes", "episode_id", "trajectory"])]
    pub toy_seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_ETA)]
    pub eta: usize,
    #[arg(long, env = "SOSNAV_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
}

/// Execute `cli`, returning the text meant for standard output.
pub fn execute(cli: Cli) -> Result<String, Error> {
    match cli.command {
        Command::GenEnv(a) => gen_env(a),
        Command::GenEpisodes(a) => gen_episodes(a),
        Command::Run(a) => run(a),
        Command::StudyScoreNds(a) => study(a),
        Command::PlotSimmatrix(a) => plot_simmatrix(a),
    }
}

fn gen_env(a: GenEnvArgs) -> Result<String, Error> {
    let params = GeneratorParams {
        node_count: a.nodes,
        room_count: a.rooms,
        category_count: a.categories,
        pano: PanoDims {
            width: a.pano_width,
            height: a.pano_height,
        },
        ..Default::default()
    };
    let env = generate_env(a.seed, &params)?;
    let path = env_path(&a.out_dir);
    EnvFile::new(env).save(&path)?;
    Ok(format!("wrote {}\n", path.display()))
}

fn gen_episodes(a: GenEpisodesArgs) -> Result<String, Error> {
    let env = EnvFile::load(&a.env)?;
    let params = EpisodeParams {
        d_success: a.d_success,
        step_budget_factor: a.budget_factor,
        step_budget_slack: a.budget_slack,
        ..Default::default()
    };
    if !(params.d_success > 0.0) || !(params.step_budget_factor >= 0.0) {
        return Err(Error::Config("d-success must be positive and budget-factor nonnegative".into()));
    }
    let episodes = (0..a.count as u64)
        .map(|i| {
            let mut ep = generate_episode_with(&env, derive_seed(a.seed, &[i]), &params)?;
            ep.id = i;
            Ok(ep)
        })
        .collect::<Result<Vec<_>, sosnav_core::Error>>()?;
    let path = episodes_path(&a.out_dir);
    EpisodeFile::new(env.id(), episodes).save(&path)?;
    Ok(format!("wrote {} episodes to {}\n", a.count, path.display()))
}

fn load_inputs(input: &InputArgs) -> Result<(sosnav_core::env_model::EnvGraph, Vec<sosnav_core::env_model::Episode>), Error> {
    let env = EnvFile::load(&input.env)?;
    let episodes = EpisodeFile::load(&input.episodes, &env)?;
    Ok((env, episodes))
}

fn run(a: RunArgs) -> Result<String, Error> {
    let mut cfg = match &a.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if !a.policies.is_empty() {
        cfg = cfg.select(&a.policies)?;
    }
    let (env, episodes) = load_inputs(&a.input)?;
    let pool = thread_pool(a.jobs)?;
    let output = pool.install(|| {
        let scene = Scene::new(env, cfg.eta)?;
        run_suite(&scene, &episodes, &cfg, a.seed, a.snapshots)
    })?;
    write_text(&a.out_dir.join("results.jsonl"), &output.results_jsonl()?)?;
    if a.snapshots {
        write_text(&a.out_dir.join("snapshots.jsonl"), &output.snapshots_jsonl()?)?;
    }
    write_text(&a.out_dir.join("summary.json"), &to_document(&output.summary)?)?;
    let table = comparison_table(&output.summary);
    write_text(&a.out_dir.join("comparison.txt"), &table)?;
    Ok(table)
}

fn study(a: StudyArgs) -> Result<String, Error> {
    let (env, episodes) = load_inputs(&a.input)?;
    let params = StudyParams {
        per_episode: a.per_episode,
        max_hops: a.max_hops,
    };
    let pool = thread_pool(a.jobs)?;
    let rep = pool.install(|| {
        let scene = Scene::new(env, a.eta)?;
        report(score_nds_points(&scene, &episodes, a.seed, params)?, a.seed)
    })?;
    write_text(&a.out_dir.join("score_nds.json"), &to_document(&rep)?)?;
    write_text(&a.out_dir.join("score_nds.svg"), &scatter_svg(&rep))?;
    Ok(format!(
        "{} points, Spearman rho = {:.4} (inverted variance ratio: {:.4})\n",
        rep.points.len(),
        rep.spearman,
        rep.spearman_alt
    ))
}

/// SVG heatmap of a similarity matrix, nodes as rows and tokens as columns.
pub fn simmatrix_svg(m: &SimilarityMatrix, title: &str, node_labels: &[String], token_labels: &[String]) -> String {
    let values: Vec<f64> = (0..m.rows).flat_map(|t| m.row(t).to_vec()).collect();
    svg::heatmap(&values, m.rows, m.cols, title, node_labels, token_labels)
}

fn plot_simmatrix(a: PlotArgs) -> Result<String, Error> {
    let path = a.out_dir.join("simmatrix.svg");
    if let Some(seed) = a.toy_seed {
        let toy = build_toy_scenario(seed, &ToyParams::default())?;
        let m = toy.similarity_a()?;
        let nodes: Vec<String> = (0..m.rows).map(|i| format!("v{i}")).collect();
        let tokens: Vec<String> = toy.tokens.iter().map(|t| format!("c{t}")).collect();
        write_text(&path, &simmatrix_svg(&m, &format!("toy scenario {seed}"), &nodes, &tokens))?;
        return Ok(format!("wrote {}\n", path.display()));
    }
    let input = InputArgs {
        env: a.env.expect("required by clap"),
        episodes: a.episodes.expect("required by clap"),
    };
    let id = a.episode_id.expect("required by clap");
    let (env, episodes) = load_inputs(&input)?;
    let ep = episodes
        .iter()
        .find(|e| e.id == id)
        .ok_or_else(|| Error::Config(format!("no episode with id {id} in {}", input.episodes.display())))?;
    let trajectory: Vec<NodeId> = match a.trajectory {
        Some(ids) => ids.into_iter().map(NodeId).collect(),
        None => ep.gt_path.clone(),
    };
    if let Some(&bad) = trajectory.iter().find(|&&v| !env.contains(v)) {
        return Err(sosnav_core::Error::UnknownNode(bad).into());
    }
    let scene = Scene::new(env, a.eta)?;
    let refs = scene.references(&ep.instruction.tokens)?;
    let m = similarity_matrix(&refs, &scene.features(&trajectory))?;
    let nodes: Vec<String> = trajectory.iter().map(|v| v.to_string()).collect();
    let tokens: Vec<String> = ep.instruction.tokens.iter().map(|t| format!("c{t}")).collect();
    write_text(&path, &simmatrix_svg(&m, &format!("episode {id}"), &nodes, &tokens))?;
    Ok(format!("wrote {}\n", path.display()))
}

/// Parse arguments, run, and map failures to exit codes: 2 for invalid
/// configuration or inputs, 1 for anything else.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_configuration() {
                2
            } else {
                1
            }
        }
    }
}

