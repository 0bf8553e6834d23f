mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use opfactor::bitgraphs::{
    Caps, DEFAULT_DIAMOND_CAP, DEFAULT_LAAKSO_CAP, DEFAULT_TREE_DEPTH_CAP,
};
use opfactor::embeddings::DEFAULT_GLUED_LEVEL_CAP;
use opfactor::analysis::{DEFAULT_SAMPLE_SIZE, DEFAULT_SAMPLE_THRESHOLD};
use opfactor::Error;

pub const DEFAULT_SEED: u64 = 0;

#[derive(Parser)]
#[command(name = "opfactor", version, about = "Graph factorization through operators: generation, embeddings, reports and certificates")]
pub struct Cli {
    /// Worker threads for parallel scans and searches.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Output file; standard output when absent.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, default_value_t = DEFAULT_TREE_DEPTH_CAP)]
    pub tree_cap: usize,

    #[arg(long, global = true, default_value_t = DEFAULT_DIAMOND_CAP)]
    pub diamond_cap: usize,

    #[arg(long, global = true, default_value_t = DEFAULT_LAAKSO_CAP)]
    pub laakso_cap: usize,

    /// Deepest partition level for glued embeddings.
    #[arg(long, global = true, default_value_t = DEFAULT_GLUED_LEVEL_CAP)]
    pub level_cap: usize,

    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    pub fn caps(&self) -> Caps {
        Caps {
            tree_depth: self.tree_cap,
            diamond: self.diamond_cap,
            laakso: self.laakso_cap,
            partition_level: self.level_cap,
        }
    }
}

#[derive(Args, Clone)]
pub struct GraphSource {
    /// Graph JSON written by `gen`.
    #[arg(long, conflicts_with_all = ["family", "n"])]
    pub graph: Option<PathBuf>,

    #[arg(long, value_parser = parse_family)]
    pub family: Option<opfactor::Family>,

    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Args, Clone)]
pub struct Budget {
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,

    #[arg(long, default_value_t = 500)]
    pub steps: usize,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Construction {
    Js,
    Bourgain,
    Baudier,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate a tree, diamond or Laakso graph.
    Gen {
        #[arg(long, value_parser = parse_family)]
        family: opfactor::Family,
        #[arg(long)]
        n: usize,
    },
    /// Write the distance matrix of a graph as CSV.
    Dist {
        #[command(flatten)]
        source: GraphSource,
    },
    /// Build one of the explicit embeddings.
    Embed {
        #[arg(long, value_enum)]
        construction: Construction,
        #[command(flatten)]
        source: GraphSource,
        /// Target space: l1, l2, linf or lp:<p>.
        #[arg(long, default_value = "l1")]
        space: String,
        /// Dimension for random-sign node vectors.
        #[arg(long)]
        dim: Option<usize>,
        /// JSON list of basis vectors for `js`.
        #[arg(long)]
        basis: Option<PathBuf>,
        /// JSON object of node vectors for `bourgain`, keyed by bit string.
        #[arg(long)]
        node_vectors: Option<PathBuf>,
        /// Random-sign node vectors for `bourgain`.
        #[arg(long)]
        random_signs: bool,
        /// Partition level for `baudier`.
        #[arg(long)]
        level: Option<usize>,
    },
    /// Lipschitz and co-Lipschitz constants of an embedding through an operator.
    Report {
        #[arg(long)]
        embedding: PathBuf,
        /// Operator JSON; the identity on the embedding's space when absent.
        #[arg(long)]
        operator: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SAMPLE_THRESHOLD)]
        sample_threshold: u64,
        #[arg(long, default_value_t = DEFAULT_SAMPLE_SIZE)]
        sample_size: u64,
    },
    /// Extract a collapse certificate.
    Certify {
        #[arg(long)]
        embedding: PathBuf,
        #[arg(long)]
        operator: Option<PathBuf>,
        /// Two-sided constant; the measured distortion when absent.
        #[arg(long = "d")]
        d: Option<f64>,
        /// l2-analytic, constant:<v> or numerical.
        #[arg(long, default_value = "l2-analytic")]
        modulus: String,
        #[command(flatten)]
        budget: Budget,
    },
    /// Tabulate the modulus of convexity over an ε grid.
    Modulus {
        #[arg(long, conflicts_with_all = ["space", "dim"])]
        operator: Option<PathBuf>,
        #[arg(long)]
        space: Option<String>,
        #[arg(long)]
        dim: Option<usize>,
        /// Comma-separated ε values.
        #[arg(long, default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
        eps: String,
        #[command(flatten)]
        budget: Budget,
    },
    /// Convex separation ψ and basis constant c of a vector family.
    Witness {
        /// JSON list of vectors.
        #[arg(long)]
        vectors: PathBuf,
        #[arg(long, default_value = "l2")]
        space: String,
        #[command(flatten)]
        budget: Budget,
    },
    /// Search for a low-distortion placement of a graph.
    Search {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, default_value = "l2")]
        space: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[command(flatten)]
        budget: Budget,
    },
    /// Smallest distortion allowed by the collapse inequality.
    Bound {
        #[arg(long, value_parser = parse_family)]
        family: opfactor::Family,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "l2-analytic")]
        modulus: String,
        /// Operator for the numerical modulus.
        #[arg(long)]
        operator: Option<PathBuf>,
        #[command(flatten)]
        budget: Budget,
    },
}

fn parse_family(s: &str) -> Result<opfactor::Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Resource { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
