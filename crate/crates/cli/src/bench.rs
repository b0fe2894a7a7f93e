use sagin_core::experiment::{
    emit_report, plot_data, run_experiment, trial_tables, verify_report, ExperimentSpec, Figure, ReportFormat, Sweep,
};
use sagin_core::topology::load_topology;
use sagin_core::Error;

use crate::place::{config, solver_options};
use crate::{BenchArgs, Failure};

pub fn spec_of(args: &BenchArgs) -> Result<ExperimentSpec, Failure> {
    let sweep = args.sweep.iter().map(|s| s.parse::<Sweep>()).collect::<Result<Vec<_>, Error>>()?;
    Ok(ExperimentSpec {
        experiment: args.exp,
        topologies: args.topo.clone(),
        case: args.case,
        trials: args.trials,
        seed: args.knobs.seed,
        cfg: config(&args.knobs),
        solver: solver_options(&args.knobs),
        sweep,
        exact: args.exact.into(),
        timing: args.timing,
    })
}

pub fn run(args: &BenchArgs) -> Result<(), Failure> {
    let spec = spec_of(args)?;
    spec.validate()?;
    let figures = args.figure.iter().map(|f| f.parse::<Figure>()).collect::<Result<Vec<_>, Error>>()?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return Err(Error::Invalid("--jobs must be at least 1".into()).into());
        }
        pool = pool.num_threads(jobs);
    }
    let pool = pool.build().map_err(|e| Failure { code: 1, message: e.to_string() })?;
    let report = pool.install(|| run_experiment(&spec))?;

    for path in emit_report(&report, ReportFormat::from(args.format), &args.out)? {
        println!("{}", path.display());
    }
    for figure in figures {
        let data = plot_data(&report, figure)?;
        let path = args.out.join(format!("fig_{}.csv", figure.name()));
        data.save_csv(&path)?;
        println!("{}", path.display());
    }
    if args.dump_tables {
        let point = spec.points()[0];
        let cfg = point.apply(&spec.cfg);
        for name in &spec.topologies {
            let base = load_topology(name)?;
            let (topo, tables) = trial_tables(&base, point.case, spec.seed, 0, cfg.k_paths)?;
            let dir = args.out.join("tables").join(name);
            tables.write_csv(&topo, &dir)?;
            println!("{}", dir.display());
        }
    }

    for a in &report.aggregates {
        eprintln!(
            "{:<12} {:<6} trials={:<4} objective={:.6} latency_ms={:.4} reliability={:.6} facilities={:.2}{}",
            a.topology,
            a.method,
            a.trials,
            a.objective.mean,
            a.avg_latency_ms.mean,
            a.avg_reliability.mean,
            a.facilities.mean,
            a.approx_ratio.map(|r| format!(" ratio={:.4}", r.mean)).unwrap_or_default(),
        );
    }

    if args.verify {
        let outcome = verify_report(&report)?;
        if !outcome.ok() {
            for m in &outcome.mismatches {
                eprintln!("verify: {m}");
            }
            return Err(Failure {
                code: 1,
                message: format!("verification failed on {} of {} rows", outcome.mismatches.len(), outcome.rows_checked),
            });
        }
        eprintln!("verify: {} rows consistent", outcome.rows_checked);
    }
    Ok(())
}
