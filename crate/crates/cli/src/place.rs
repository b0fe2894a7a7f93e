use std::io::Write;

use serde_json::{json, Value};

use sagin_core::objectives::{
    controller_cost_breakdown, controller_utility, gateway_cost, gateway_utility, ControllerPolicy, GatewayPolicy,
    ObjectiveConfig,
};
use sagin_core::paths::build_reliability_tables;
use sagin_core::solvers::{
    solve_controller_overhead, solve_controller_reliability, solve_gateway_latency, solve_gateway_reliability,
    solve_joint, JointMode, Method, SolveResult, SolverOptions,
};
use sagin_core::topology::{load_topology, sample_failures, FailureCase, Topology};
use sagin_core::Error;

use crate::{Failure, FormatArg, Knobs, MethodArg, Mode, PlaceArgs, Target};

pub fn config(k: &Knobs) -> ObjectiveConfig {
    ObjectiveConfig {
        alpha: k.alpha,
        beta: k.beta,
        psi: k.psi,
        l_con: k.lcon,
        g_max: k.gmax,
        k_max: k.kmax,
        k_paths: k.kpaths,
    }
}

pub fn solver_options(k: &Knobs) -> SolverOptions {
    SolverOptions { epsilon: k.epsilon, restarts: k.restarts, seed: k.seed }
}

struct Placement {
    gateway: Option<(GatewayPolicy, SolveResult)>,
    controller: Option<(ControllerPolicy, SolveResult)>,
}

fn stage_json(r: &SolveResult, timing: bool) -> Value {
    let mut v = json!({ "value": r.value, "evaluations": r.evaluations, "seed": r.seed });
    if timing {
        v["wall_time_ms"] = json!(r.wall_time_ms);
    }
    v
}

fn named(topo: &Topology, ids: &[usize]) -> Value {
    ids.iter().map(|&i| json!({ "id": i, "name": topo.node(i).name })).collect()
}

pub fn run(args: &PlaceArgs) -> Result<(), Failure> {
    let base = load_topology(&args.topo)?;
    let topo = match args.case {
        Some(c) => sample_failures(&base, &FailureCase::builtin(c)?, args.knobs.seed),
        None => base,
    };
    let cfg = config(&args.knobs);
    let opts = solver_options(&args.knobs);
    let tables = build_reliability_tables(&topo, cfg.k_paths)?;
    cfg.validate(&tables)?;
    if !(opts.epsilon > 0.0 && opts.epsilon < 1.0) {
        return Err(Error::Invalid(format!("epsilon must be in (0, 1), got {}", opts.epsilon)).into());
    }
    let method = match args.method {
        MethodArg::Approx => Method::Approx,
        MethodArg::Exact => Method::Exact,
    };
    let reliability = args.mode == Mode::Reliability;

    let placement = match args.target {
        Target::Gateway => {
            if args.mode == Mode::Overhead {
                return Err(Error::Invalid("gateway placement takes --mode latency or reliability".into()).into());
            }
            let g = if reliability {
                solve_gateway_reliability(&tables, &cfg, method, &opts)?
            } else {
                solve_gateway_latency(&tables, &cfg, method, &opts)?
            };
            Placement { gateway: Some(g), controller: None }
        }
        Target::Controller => {
            if reliability {
                Placement { gateway: None, controller: Some(solve_controller_reliability(&tables, &cfg, method, &opts)?) }
            } else {
                let (gw, gr) = solve_gateway_latency(&tables, &cfg, method, &opts)?;
                let c = solve_controller_overhead(&gw, &tables, &cfg, method, &opts)?;
                Placement { gateway: Some((gw, gr)), controller: Some(c) }
            }
        }
        Target::Joint => {
            let mode = if reliability { JointMode::Reliability } else { JointMode::LatencyOverhead };
            let s = solve_joint(&tables, &cfg, mode, method, &opts)?;
            Placement {
                gateway: Some((s.gateway, s.gateway_result)),
                controller: Some((s.controller, s.controller_result)),
            }
        }
    };

    let body = match args.format {
        FormatArg::Json => {
            let mut doc = render_json(args, &topo, &tables, &cfg, &placement)?;
            doc.push('\n');
            doc
        }
        FormatArg::Csv => render_csv(&topo, &placement)?,
    };
    match &args.out {
        Some(path) => std::fs::write(path, body)?,
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn render_json(
    args: &PlaceArgs,
    topo: &Topology,
    tables: &sagin_core::paths::PathTables,
    cfg: &ObjectiveConfig,
    p: &Placement,
) -> Result<String, Failure> {
    let mut doc = json!({
        "topology": args.topo,
        "nodes": topo.node_count(),
        "links": topo.link_count(),
        "target": args.target_name(),
        "mode": args.mode_name(),
        "method": args.method_name(),
        "seed": args.knobs.seed,
        "case": args.case,
        "config": serde_json::to_value(cfg).map_err(Error::from)?,
    });
    if let Some((gw, r)) = &p.gateway {
        doc["gateways"] = named(topo, &gw.open);
        doc["gateway_assignment"] = json!(gw.assign);
        doc["gateway_stage"] = stage_json(r, args.timing);
        doc["gateway_metrics"] = json!({
            "count": gw.open.len(),
            "cost": gateway_cost(&gw.open, tables, cfg)?,
            "utility": gateway_utility(&gw.open, tables)?,
            "avg_latency_ms": gw.avg_latency_ms(tables),
            "avg_reliability": gw.avg_reliability(tables),
        });
    }
    if let Some((ctl, r)) = &p.controller {
        doc["controllers"] = named(topo, &ctl.open);
        doc["controller_assignment"] = json!(ctl.assign);
        doc["controller_stage"] = stage_json(r, args.timing);
        let mut m = json!({
            "count": ctl.open.len(),
            "utility": controller_utility(&ctl.open, tables)?,
            "avg_latency_ms": ctl.avg_latency_ms(tables),
            "avg_reliability": ctl.avg_reliability(tables),
        });
        if let Some((gw, _)) = &p.gateway {
            let c = controller_cost_breakdown(&ctl.open, gw, tables, cfg)?;
            m["cost"] = serde_json::to_value(c).map_err(Error::from)?;
        }
        doc["controller_metrics"] = m;
    }
    if let (Some((gw, _)), Some((ctl, _))) = (&p.gateway, &p.controller) {
        doc["joint_utility"] = json!(sagin_core::objectives::joint_utility(gw, ctl, tables)?);
        doc["joint_cost"] = json!(sagin_core::objectives::joint_cost(gw, &ctl.open, tables, cfg)?);
    }
    Ok(serde_json::to_string_pretty(&doc).map_err(Error::from)?)
}

fn render_csv(topo: &Topology, p: &Placement) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Failure::from(Error::from(e));
    w.write_record(["node", "name", "gateway", "controller", "assigned_gateway", "assigned_controller"])
        .map_err(err)?;
    for v in 0..topo.node_count() {
        let flag = |open: Option<&Vec<usize>>| match open {
            Some(o) => (o.binary_search(&v).is_ok() as u8).to_string(),
            None => String::new(),
        };
        let gw = p.gateway.as_ref().map(|(g, _)| g);
        let ctl = p.controller.as_ref().map(|(c, _)| c);
        w.write_record([
            v.to_string(),
            topo.node(v).name.clone(),
            flag(gw.map(|g| &g.open)),
            flag(ctl.map(|c| &c.open)),
            gw.map(|g| g.assign[v].to_string()).unwrap_or_default(),
            ctl.map(|c| c.assign[v].to_string()).unwrap_or_default(),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::from(std::io::Error::from(e.into_error())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

impl PlaceArgs {
    fn target_name(&self) -> &'static str {
        match self.target {
            Target::Gateway => "gateway",
            Target::Controller => "controller",
            Target::Joint => "joint",
        }
    }

    fn mode_name(&self) -> &'static str {
        match self.mode {
            Mode::Latency => "latency",
            Mode::Reliability => "reliability",
            Mode::Overhead => "overhead",
        }
    }

    fn method_name(&self) -> &'static str {
        match self.method {
            MethodArg::Approx => "approx",
            MethodArg::Exact => "exact",
        }
    }
}
