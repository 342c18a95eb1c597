use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use qneuron_core::classical::{run_xor_baseline, BaselineConfig, BaselineModel};
use qneuron_core::encoders::{
    angle_encode, block_encode, block_encoding_template, suggest_layout, BlockEncodingSpec, MinMaxScaler,
};
use qneuron_core::gradient::identities::identity_report;
use qneuron_core::report::{emit_reports, format_f64, read_numeric_csv, write_csv, write_dataset_csv};
use qneuron_core::text::{parse_circuit, render_circuit};
use qneuron_core::xor::{generate_xor_dataset, train_quantum, TrainConfig, XorLoss, XorVariant};
use qneuron_core::{circuit, StateVector};

#[derive(Parser)]
#[command(name = "qneuron", version, about = "Single quantum neuron simulator and trainer")]
struct Cli {
    /// Worker threads for circuit evaluations (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the XOR classifier and write CSV/SVG reports.
    XorTrain(XorTrainArgs),
    /// Write an XOR dataset as `x1,x2,label`.
    XorData {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a circuit file on |0…0⟩ and print the state or a shot table.
    Simulate {
        #[arg(long)]
        circuit: PathBuf,
        /// Comma-separated parameter values for `$0, $1, …`.
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Qubit whose `Z` expectation is reported.
        #[arg(long, default_value_t = 0)]
        readout: usize,
    },
    /// Check the commutator, BCH, exponential-derivative and beta identities.
    VerifyIdentities {
        #[arg(long, default_value_t = 1000)]
        sweep: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Encode one row of a feature CSV as a circuit file.
    Encode(EncodeArgs),
    /// Classical XOR baseline on four Gaussian clusters.
    ClassicalXor {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        n_per_cluster: usize,
        #[arg(long, default_value_t = 0.3)]
        spread: f64,
        #[arg(long, default_value_t = 8)]
        hidden: usize,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        #[arg(long, default_value_t = 0.05)]
        lr: f64,
        #[arg(long, default_value_t = 10)]
        batch: usize,
    },
}

#[derive(clap::Args)]
struct XorTrainArgs {
    #[arg(long, value_enum)]
    variant: VariantArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 150)]
    epochs: usize,
    #[arg(long, default_value_t = 25)]
    batch: usize,
    #[arg(long, default_value_t = 0.025)]
    lr: f64,
    #[arg(long, default_value_t = FRAC_PI_2)]
    shift: f64,
    /// Estimate expectations from N measurement shots.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long, value_enum, default_value_t = LossArg::Mse)]
    loss: LossArg,
    /// Dataset size before the train/validation/test split.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Fraction of (batch, parameter) gradients checked against finite differences.
    #[arg(long, default_value_t = 0.0)]
    audit: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct EncodeArgs {
    #[arg(long, value_enum)]
    method: MethodArg,
    /// `D,Q,L,G`, or `D,Q` to pick the smallest layout.
    #[arg(long)]
    spec: String,
    /// CSV with a header row and one sample per row.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Zero-based data row to encode.
    #[arg(long, default_value_t = 0)]
    row: usize,
    /// Skip min-max scaling; values must already lie in [0, 1].
    #[arg(long)]
    no_scale: bool,
    /// Emit the block layout with `$k` slots instead of literal angles.
    #[arg(long)]
    template: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Original,
    Modified,
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    Mse,
    HalfMse,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Angle,
    Block,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Perceptron,
    Mlp,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = cli.jobs {
        if k == 0 {
            eprintln!("error: --jobs must be >= 1");
            return ExitCode::from(2);
        }
        pool = pool.num_threads(k);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    match pool.install(|| run(cli.command)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::XorTrain(args) => xor_train(args),
        Command::XorData { n, seed, out } => {
            let data = generate_xor_dataset(n, seed)?;
            write_dataset_csv(&data, &out)?;
            println!(
                "wrote {} samples ({} train, {} validation, {} test) to {}",
                n,
                data.train.len(),
                data.validation.len(),
                data.test.len(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate {
            circuit,
            params,
            shots,
            seed,
            readout,
        } => simulate(&circuit, &params, shots, seed, readout),
        Command::VerifyIdentities { sweep, seed } => verify_identities(sweep, seed),
        Command::Encode(args) => encode(args),
        Command::ClassicalXor {
            model,
            seed,
            out,
            n_per_cluster,
            spread,
            hidden,
            epochs,
            lr,
            batch,
        } => {
            let config = BaselineConfig {
                n_per_cluster,
                spread,
                hidden,
                epochs,
                learning_rate: lr,
                batch_size: batch,
            };
            let model = match model {
                ModelArg::Perceptron => BaselineModel::Perceptron,
                ModelArg::Mlp => BaselineModel::Mlp,
            };
            classical_xor(model, &config, seed, &out)
        }
    }
}

fn xor_train(args: XorTrainArgs) -> Result<ExitCode> {
    let variant = match args.variant {
        VariantArg::Original => XorVariant::Original,
        VariantArg::Modified => XorVariant::Modified,
    };
    let mut cfg = TrainConfig::new(variant, args.seed);
    cfg.epochs = args.epochs;
    cfg.batch_size = args.batch;
    cfg.learning_rate = args.lr;
    cfg.shift = args.shift;
    cfg.shots = args.shots;
    cfg.audit_fraction = args.audit;
    cfg.loss = match args.loss {
        LossArg::Mse => XorLoss::Mse,
        LossArg::HalfMse => XorLoss::HalfMse,
    };
    let data = generate_xor_dataset(args.n, args.seed)?;
    let run = train_quantum(&data, &cfg)?;
    emit_reports(&run, &args.out).with_context(|| format!("writing reports to {}", args.out.display()))?;

    let [t1, t2, a1, a2] = run.model.all_four();
    println!("variant        {}", variant.name());
    println!("batches        {}", run.history.len());
    println!("final loss     {:.6}", run.history.last().map_or(f64::NAN, |h| h.loss));
    println!("theta1 theta2  {t1:.5} {t2:.5}");
    println!("alpha1 alpha2  {a1:.5} {a2:.5}");
    println!("test accuracy  {:.4}", run.test_accuracy);
    if run.audit.checks > 0 {
        println!(
            "gradient audit {} checks, max error {:.3e}",
            run.audit.checks, run.audit.max_abs_error
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_params(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().with_context(|| format!("bad parameter `{s}`")))
        .collect()
}

fn simulate(path: &Path, params: &str, shots: Option<u64>, seed: u64, readout: usize) -> Result<ExitCode> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let circ = parse_circuit(&text)?;
    let params = parse_params(params)?;
    let input = StateVector::zero(circ.num_qubits());
    if let Some(shots) = shots {
        let res = circuit::sample_expectation(&circ, &params, &input, readout, shots, seed)?;
        println!("eigenvalue,count");
        for (eig, count) in res.counts.iter().rev() {
            println!("{eig:+},{count}");
        }
        println!("expectation,{}", format_f64(res.empirical_expectation));
        return Ok(ExitCode::SUCCESS);
    }
    let out = circuit::apply(&circ, &params, &input)?;
    let n = circ.num_qubits();
    println!("basis,re,im,probability");
    for (i, a) in out.amplitudes().iter().enumerate() {
        println!(
            "{:0width$b},{},{},{}",
            i,
            format_f64(a.re),
            format_f64(a.im),
            format_f64(a.norm_sqr()),
            width = n
        );
    }
    if readout >= n {
        bail!("readout qubit {readout} out of range for {n} qubits");
    }
    println!("expectation,{}", format_f64(out.z_expectation(readout)));
    Ok(ExitCode::SUCCESS)
}

fn verify_identities(sweep: usize, seed: u64) -> Result<ExitCode> {
    let checks = identity_report(sweep, seed)?;
    println!("{:<24} {:>7} {:>12} {:>10}  result", "identity", "cases", "max error", "tolerance");
    let mut ok = true;
    for c in &checks {
        ok &= c.passed();
        println!(
            "{:<24} {:>7} {:>12.3e} {:>10.0e}  {}",
            c.name,
            c.cases,
            c.max_error,
            c.tolerance,
            if c.passed() { "pass" } else { "FAIL" }
        );
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn parse_spec(text: &str) -> Result<Vec<usize>> {
    let parts = text
        .split(',')
        .map(|s| s.trim().parse::<usize>().with_context(|| format!("bad --spec entry `{s}`")))
        .collect::<Result<Vec<_>>>()?;
    if parts.len() != 2 && parts.len() != 4 {
        bail!("--spec takes D,Q,L,G or D,Q");
    }
    Ok(parts)
}

fn load_row(args: &EncodeArgs) -> Result<Vec<f64>> {
    let path = args.input.as_ref().context("--in is required unless --template is given")?;
    let (_, rows) = read_numeric_csv(path)?;
    let Some(raw) = rows.get(args.row) else {
        bail!("{} has {} data rows, asked for row {}", path.display(), rows.len(), args.row);
    };
    if args.no_scale {
        return Ok(raw.clone());
    }
    Ok(MinMaxScaler::fit(&rows)?.transform(raw)?)
}

fn encode(args: EncodeArgs) -> Result<ExitCode> {
    let spec = parse_spec(&args.spec)?;
    let circuit = match args.method {
        MethodArg::Angle => {
            if spec.len() == 4 && (spec[2] != 1 || spec[3] != 1) {
                bail!("angle encoding uses one rotation per qubit: L and G must be 1");
            }
            if args.template {
                bail!("--template applies to block encoding only");
            }
            let features = load_row(&args)?;
            if features.len() != spec[0] {
                bail!("--spec gives D = {}, but the row has {} features", spec[0], features.len());
            }
            angle_encode(&features, spec[1])?
        }
        MethodArg::Block => {
            let layout = match spec[..] {
                [d, q] => suggest_layout(d, q)?,
                [d, q, l, g] => BlockEncodingSpec::new(d, q, l, g)?,
                _ => unreachable!(),
            };
            if args.template {
                block_encoding_template(&layout)?
            } else {
                let features = load_row(&args)?;
                if features.len() != layout.data_dim {
                    bail!("--spec gives D = {}, but the row has {} features", layout.data_dim, features.len());
                }
                block_encode(&features, &layout)?
            }
        }
    };
    fs::write(&args.out, render_circuit(&circuit)).with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "wrote {} gates on {} qubits to {}",
        circuit.ops().len(),
        circuit.num_qubits(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn classical_xor(model: BaselineModel, config: &BaselineConfig, seed: u64, out: &Path) -> Result<ExitCode> {
    let res = run_xor_baseline(model, config, seed)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let rows: Vec<Vec<String>> = res
        .test_predictions
        .iter()
        .map(|(p, truth, pred)| vec![format_f64(p[0]), format_f64(p[1]), truth.to_string(), pred.to_string()])
        .collect();
    write_csv(&out.join("predictions.csv"), &["x1", "x2", "true", "predicted"], &rows)?;
    if !res.loss_history.is_empty() {
        let rows: Vec<Vec<String>> = res
            .loss_history
            .iter()
            .enumerate()
            .map(|(i, l)| vec![(i + 1).to_string(), format_f64(*l)])
            .collect();
        write_csv(&out.join("loss.csv"), &["epoch", "loss"], &rows)?;
    }
    let name = match model {
        BaselineModel::Perceptron => "perceptron",
        BaselineModel::Mlp => "mlp",
    };
    let summary = vec![
        vec!["model".to_string(), name.to_string()],
        vec!["seed".to_string(), seed.to_string()],
        vec!["train_accuracy".to_string(), format_f64(res.train_accuracy)],
        vec!["test_accuracy".to_string(), format_f64(res.test_accuracy)],
    ];
    write_csv(&out.join("summary.csv"), &["key", "value"], &summary)?;
    println!("{name}: train accuracy {:.4}, test accuracy {:.4}", res.train_accuracy, res.test_accuracy);
    Ok(ExitCode::SUCCESS)
}
