use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const DEFAULT_HBAR: f64 = 1.0;
pub const DEFAULT_COUNT: usize = 256;
pub const DEFAULT_STEP: f64 = 0.1;
pub const DEFAULT_DELTA: f64 = 1.0;
pub const DEFAULT_WIDTH: f64 = 1.0;
pub const DEFAULT_MASS: f64 = 1.0;
pub const DEFAULT_FORCE: f64 = 0.0;
pub const DEFAULT_OMEGA: f64 = 1.0;
pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_ACCURACY: usize = 12;
pub const DEFAULT_CONTINUUM_COUNT: usize = 64;
pub const DEFAULT_CONTINUUM_STEP: f64 = 0.25;

/// Quantum states, observables and dynamics in the ambiguity-function representation.
#[derive(Debug, Parser)]
#[command(name = "ambiq", version)]
pub struct Cli {
    /// Reduced Planck constant; documents read from disk must agree with it.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub hbar: Option<f64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Prepare a test state on a centered position grid.
    State {
        #[command(subcommand)]
        kind: StateKind,
    },
    /// Convert between psi, rho, ambiguity and Wigner documents.
    Transform {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, value_enum)]
        to: Target,
        #[command(flatten)]
        out: Output,
    },
    /// Expectation value of a polynomial in Q and P from derivatives at the origin.
    Expect {
        #[arg(long)]
        state: PathBuf,
        /// Operator such as "0.5*P^2 - 3*Q"; words are ordered products.
        #[arg(long, allow_hyphen_values = true)]
        op: String,
        /// Accuracy order of the finite-difference stencils.
        #[arg(long, default_value_t = DEFAULT_ACCURACY)]
        accuracy: usize,
    },
    /// Propagate an ambiguity field in time.
    Evolve(EvolveArgs),
    /// Integrate an ambiguity field over one axis.
    Marginal {
        #[arg(long, short)]
        input: PathBuf,
        /// Axis integrated out: eta gives the position anti-diagonal, xi the momentum one.
        #[arg(long, value_enum)]
        axis: AxisChoice,
        /// JSON output; printed to stdout when omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the exact discrete identities or the grid-level continuum checks.
    Verify(VerifyArgs),
    /// Print defaults, methods and exit codes.
    Info,
}

#[derive(Debug, Subcommand)]
pub enum StateKind {
    /// Gaussian packet (pi delta)^(-1/4) exp[-(q - x)^2 / 2 delta + i k q / hbar].
    Gaussian {
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        k: f64,
        #[arg(long, default_value_t = DEFAULT_DELTA, allow_negative_numbers = true)]
        delta: f64,
        #[command(flatten)]
        grid: GridArgs,
        /// Write the density matrix instead of the wavefunction.
        #[arg(long)]
        rho: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Superposition of zero-momentum packets of common width.
    Superposition {
        /// Packet as `center:re:im`; repeat for each term.
        #[arg(long = "term", required = true, allow_hyphen_values = true)]
        terms: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_WIDTH, allow_negative_numbers = true)]
        width: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        rho: bool,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Number of grid points.
    #[arg(long, default_value_t = DEFAULT_COUNT)]
    pub n: usize,
    /// Position step.
    #[arg(long, default_value_t = DEFAULT_STEP, allow_negative_numbers = true)]
    pub step: f64,
}

#[derive(Debug, Args)]
pub struct Output {
    /// JSON document to write.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Optional CSV export with header `axis1,axis2,re,im`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub method: Method,
    /// Total time.
    #[arg(long, allow_negative_numbers = true)]
    pub t: f64,
    /// RK4 step for the generator and kernel methods.
    #[arg(long, default_value_t = DEFAULT_DT, allow_negative_numbers = true)]
    pub dt: f64,
    #[arg(long, default_value_t = DEFAULT_MASS, allow_negative_numbers = true)]
    pub mass: f64,
    /// Constant force F in H = p^2/2m - F q.
    #[arg(long, default_value_t = DEFAULT_FORCE, allow_negative_numbers = true)]
    pub force: f64,
    /// Potential for the kernel and canonical methods.
    #[arg(long, value_enum, default_value_t = Potential::Free)]
    pub potential: Potential,
    /// Oscillator frequency, or inverse width of the Gaussian well.
    #[arg(long, default_value_t = DEFAULT_OMEGA, allow_negative_numbers = true)]
    pub omega: f64,
    /// Depth of the Gaussian well.
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub depth: f64,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "mode")]
pub struct VerifyMode {
    /// Dimension for the discrete identities.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Grid-level checks of the continuum displacement algebra.
    #[arg(long)]
    pub continuum: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub mode: VerifyMode,
    /// Seed of the random Hermitian test matrix (discrete mode).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Grid points (continuum mode).
    #[arg(long, default_value_t = DEFAULT_CONTINUUM_COUNT)]
    pub n: usize,
    /// Position step (continuum mode).
    #[arg(long, default_value_t = DEFAULT_CONTINUUM_STEP, allow_negative_numbers = true)]
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Rho,
    Ambiguity,
    Wigner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Phase-shear closed form for the constant-force Hamiltonian.
    Closed,
    /// RK4 on the constant-force generator.
    Generator,
    /// RK4 on the sine-kernel equation for a general potential.
    Kernel,
    /// Linear canonical substitution for free or harmonic motion.
    Canonical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Potential {
    Free,
    Harmonic,
    /// -depth * exp(-(omega q)^2 / 2)
    Well,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisChoice {
    Eta,
    Xi,
}
