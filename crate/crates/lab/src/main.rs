use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use armor_core::data::{sample_dataset, RewardNoise};
use armor_core::fixed_point::{is_fixed_point, psi_policy, PsiKind, PsiSpec};
use armor_core::instance::{generate_instance, RandomInstanceRecipe};
use armor_core::maximin::{armor_policy, ReturnTable, SolvedPolicy};
use armor_core::version_space::build_version_space;
use armor_lab::config::{CraftedName, ExperimentConfig, ModeName, Suite};
use armor_lab::formats::{
    read_behavior, read_class, read_dataset, read_mdp, read_policy, write_dataset, write_json, BehaviorDoc, ClassDoc,
    InstanceDoc, MdpDoc, PolicyDoc,
};
use armor_lab::sweep::{self, CSV_COLUMNS};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(name = "armor-lab", version, about = "Relative-pessimism offline RL on finite MDPs")]
struct Cli {
    /// Seed for generation commands; overrides the config seed for verify and sweep.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PsiArg {
    Zero,
    Ref,
    Regret,
    Singleton,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random or crafted instance as instance.json plus one file per part.
    GenInstance {
        #[arg(long, value_enum)]
        crafted: Option<CraftedArg>,
        #[arg(long, default_value_t = 3)]
        n_states: usize,
        #[arg(long, default_value_t = 2)]
        n_actions: usize,
        #[arg(long, default_value_t = 5)]
        class_size: usize,
        #[arg(long, default_value_t = 0.3)]
        perturbation: f64,
        #[arg(long, default_value_t = 1.0)]
        temperature: f64,
        #[arg(long, default_value_t = 0.9)]
        gamma: f64,
    },
    /// Sample a JSONL dataset from an MDP and a behavior (file or `uniform`).
    GenData {
        #[arg(long)]
        mdp: PathBuf,
        #[arg(long)]
        behavior: String,
        #[arg(long)]
        n: usize,
        /// Half-width of uniform reward noise.
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print per-model loss, gap and membership as CSV.
    Vspace {
        #[arg(long)]
        class: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Radius; `inf` keeps every model with finite loss.
        #[arg(long)]
        alpha: f64,
    },
    /// Solve the relative-pessimism game and print the result as JSON.
    Solve {
        #[arg(long)]
        class: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long, value_enum, default_value = "pure")]
        mode: ModeName,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        /// Also write the payoff matrix as CSV.
        #[arg(long)]
        payoff_csv: Option<PathBuf>,
    },
    /// Solve a psi-shifted max-min and certify that the result is a fixed point.
    Fixedpoint {
        #[arg(long)]
        class: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_enum)]
        psi: PsiArg,
        #[arg(long = "ref")]
        reference: Option<PathBuf>,
        /// Model index for `--psi singleton`.
        #[arg(long)]
        model: Option<usize>,
        /// Comma-separated model indices; defaults to the whole version space.
        #[arg(long, value_delimiter = ',')]
        subset: Option<Vec<usize>>,
    },
    /// Run one check suite; exits 1 if an asserted check fails.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long)]
        config: PathBuf,
    },
    /// Run every suite listed in the config and write CSV, JSONL and plot data.
    #[command(after_long_help = csv_help())]
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Also render plot data as SVG.
        #[arg(long)]
        svg: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CraftedArg {
    TwoStateFamily,
    SeparationInstance,
    RpiCounterexample,
}

impl From<CraftedArg> for CraftedName {
    fn from(c: CraftedArg) -> Self {
        match c {
            CraftedArg::TwoStateFamily => CraftedName::TwoStateFamily,
            CraftedArg::SeparationInstance => CraftedName::SeparationInstance,
            CraftedArg::RpiCounterexample => CraftedName::RpiCounterexample,
        }
    }
}

fn csv_help() -> String {
    let mut s = String::from("CSV columns (each file starts with a `# config_sha256=... seed=...` line):\n");
    for (name, cols) in CSV_COLUMNS {
        s.push_str(&format!("  {name}.csv: {}\n", cols.join(", ")));
    }
    s.push_str("  plot_game_value_vs_alpha.csv: n, alpha, mean_game_value, mean_improvement, truth_in_space_fraction, points\n");
    s.push_str(
        "  plot_suboptimality_vs_n.csv: instance, alpha, n, mean_suboptimality, std_err, mean_excess, fitted_bound\n",
    );
    s
}

fn out_dir(cli: &Option<PathBuf>, cfg: Option<&ExperimentConfig>) -> PathBuf {
    cli.clone()
        .or_else(|| cfg.and_then(|c| c.output.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn load_config(path: &Path, seed: Option<u64>) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn policy_json(p: &SolvedPolicy) -> serde_json::Value {
    match p {
        SolvedPolicy::Pure(pi) => json!({"pure": PolicyDoc::from_policy(pi)}),
        SolvedPolicy::Mixed(m) => json!({
            "mixed": {
                "atoms": m.atoms().iter().map(PolicyDoc::from_policy).collect::<Vec<_>>(),
                "weights": m.weights(),
            }
        }),
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .context("configuring the worker pool")?;
    }
    match cli.command {
        Command::GenInstance {
            crafted,
            n_states,
            n_actions,
            class_size,
            perturbation,
            temperature,
            gamma,
        } => {
            let inst = match crafted {
                Some(c) => CraftedName::from(c).build(),
                None => {
                    let Some(seed) = cli.seed else {
                        bail!("gen-instance needs an explicit --seed for random instances");
                    };
                    let recipe = RandomInstanceRecipe {
                        n_states,
                        n_actions,
                        class_size,
                        perturbation,
                        behavior_temperature: temperature,
                        gamma,
                    };
                    generate_instance(&recipe, seed)?
                }
            };
            let dir = out_dir(&cli.out_dir, None);
            fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            write_json(&dir.join("instance.json"), &InstanceDoc::from_instance(&inst))?;
            write_json(&dir.join("mdp.json"), &MdpDoc::from_mdp(&inst.m_star))?;
            write_json(&dir.join("class.json"), &ClassDoc::from_class(&inst.class))?;
            write_json(&dir.join("behavior.json"), &BehaviorDoc::from_behavior(&inst.behavior))?;
            write_json(&dir.join("reference.json"), &PolicyDoc::from_policy(&inst.reference))?;
            if let Some(c) = &inst.comparator {
                write_json(&dir.join("comparator.json"), &PolicyDoc::from_policy(c))?;
            }
            println!("wrote instance (seed {}) to {}", inst.seed, dir.display());
            Ok(true)
        }
        Command::GenData {
            mdp,
            behavior,
            n,
            noise,
            out,
        } => {
            let Some(seed) = cli.seed else {
                bail!("gen-data needs an explicit --seed");
            };
            let m = read_mdp(&mdp)?;
            let mu = read_behavior(&behavior, &m)?;
            let noise = noise.map(|half_width| RewardNoise::Uniform { half_width });
            let d = sample_dataset(&m, &mu, n, seed, noise)?;
            write_dataset(&out, &d)?;
            println!("wrote {n} transitions to {}", out.display());
            Ok(true)
        }
        Command::Vspace { class, data, alpha } => {
            let class = read_class(&class)?;
            let d = read_dataset(&data)?;
            let vs = build_version_space(&class, &d, alpha)?;
            let mut w = csv::Writer::from_writer(std::io::stdout());
            w.write_record(["model", "loss", "gap", "member"])?;
            for i in 0..class.len() {
                w.write_record([
                    i.to_string(),
                    vs.losses[i].to_string(),
                    vs.gap(i).to_string(),
                    vs.contains(i).to_string(),
                ])?;
            }
            w.flush()?;
            Ok(true)
        }
        Command::Solve {
            class,
            data,
            alpha,
            reference,
            mode,
            eps,
            payoff_csv,
        } => {
            let class = read_class(&class)?;
            let d = read_dataset(&data)?;
            let reference = read_policy(&reference)?;
            if mode == ModeName::Pure && !reference.is_deterministic() {
                eprintln!(
                    "warning: the reference policy is stochastic and lies outside the enumerated deterministic policies; \
                     the improvement guarantee needs it inside"
                );
            }
            let alg = armor_lab::config::AlgorithmSpec {
                alpha_grid: None,
                alpha_from_theory: None,
                mode,
                eps,
            };
            let out = armor_policy(&class, &d, alpha, &reference, alg.solver_mode())?;
            if let Some(path) = payoff_csv {
                let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
                let mut header = vec!["policy".to_string()];
                header.extend(out.game.model_ids.iter().map(|i| format!("model_{i}")));
                w.write_record(&header)?;
                for (i, p) in out.game.policies.iter().enumerate() {
                    let mut row = vec![format!("{:?}", p.actions().unwrap_or_default())];
                    row.extend(out.game.payoff.row(i).iter().map(f64::to_string));
                    w.write_record(&row)?;
                }
                w.flush()?;
            }
            let doc = json!({
                "mode": mode,
                "alpha": if alpha.is_finite() { json!(alpha) } else { json!("inf") },
                "version_space": out.version_space.members,
                "policy": policy_json(&out.result.policy),
                "value": out.result.value,
                "worst_model": out.result.worst_model,
                "duality_gap": out.result.duality_gap,
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
            Ok(true)
        }
        Command::Fixedpoint {
            class,
            data,
            alpha,
            psi,
            reference,
            model,
            subset,
        } => {
            let class = read_class(&class)?;
            let d = read_dataset(&data)?;
            let vs = build_version_space(&class, &d, alpha)?;
            let table = ReturnTable::for_version_space(&class, &vs)?;
            let subset = subset.unwrap_or_else(|| vs.members.clone());
            let spec = match psi {
                PsiArg::Zero => PsiSpec::new(PsiKind::Zero, subset),
                PsiArg::Regret => PsiSpec::new(PsiKind::NegOptimalReturn, subset),
                PsiArg::Ref => {
                    let Some(r) = reference else {
                        bail!("--psi ref needs --ref <policy file>")
                    };
                    PsiSpec::new(PsiKind::NegReferenceReturn(read_policy(&r)?), subset)
                }
                PsiArg::Singleton => {
                    let Some(m) = model else {
                        bail!("--psi singleton needs --model <index>")
                    };
                    PsiSpec::singleton(m)
                }
            };
            let solved = psi_policy(&table, &spec)?;
            let pi = solved.policy.as_pure().expect("psi solutions are pure");
            let check = is_fixed_point(pi, &table)?;
            let doc = json!({
                "psi": spec.kind.name(),
                "subset": spec.subset,
                "policy": PolicyDoc::from_policy(pi),
                "psi_value": solved.value,
                "certificate": check.certificate,
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
            println!(
                "{} fixed point: certificate {:e}",
                if check.is_fixed_point { "PASS" } else { "FAIL" },
                check.certificate
            );
            Ok(check.is_fixed_point)
        }
        Command::Verify { suite, config } => {
            let cfg = load_config(&config, cli.seed)?;
            let dir = out_dir(&cli.out_dir, Some(&cfg));
            fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let run = sweep::run_suite(&cfg, &cfg.instances()?, suite)?;
            sweep::write_csv(&cfg, &dir, &run.table)?;
            let runs = [run];
            sweep::write_reports(&cfg, &dir.join(format!("{}.jsonl", suite.name())), &runs)?;
            let text = sweep::summary(&cfg, &runs);
            fs::write(dir.join(format!("{}_summary.txt", suite.name())), &text)?;
            print!("{text}");
            let ok = runs[0].failures().next().is_none();
            Ok(ok)
        }
        Command::Sweep { config, svg } => {
            let cfg = load_config(&config, cli.seed)?;
            if cfg.suites.is_empty() {
                bail!("the config selects no suites");
            }
            let dir = out_dir(&cli.out_dir, Some(&cfg));
            let instances = cfg.instances()?;
            let runs = cfg
                .suites
                .iter()
                .map(|&s| sweep::run_suite(&cfg, &instances, s))
                .collect::<armor_lab::Result<Vec<_>>>()?;
            let files = sweep::write_sweep(&cfg, &dir, &runs, svg || cfg.output.svg)?;
            print!("{}", sweep::summary(&cfg, &runs));
            for f in files {
                println!("wrote {}", f.display());
            }
            let failed: usize = runs.iter().map(|r| r.failures().count()).sum();
            if failed > 0 {
                eprintln!("{failed} asserted checks failed");
            }
            Ok(failed == 0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
