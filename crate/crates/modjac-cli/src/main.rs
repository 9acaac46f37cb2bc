//! Command-line front end: builds the modular-symbol pipeline for a level
//! and emits machine-readable certificates for each quantity.

use clap::{Parser, Subcommand};
use modjac::arith::factor_string;
use modjac::classify::{jacobian_count, run_level, LevelConstants};
use modjac::hecke::{build_order, HeckeOrder};
use modjac::ideals::{
    eisenstein_ideal, eisenstein_maximal_ideals, ideal_product, multiplier_ring,
    principal_generator_odd, socle_dimension, spectrum_report, EisensteinData,
};
use modjac::modsym::{build_space, ModSymSpace};
use modjac::redgraph::{component_group, cusp_reduction_map, dual_graph, dual_graph_from_lengths};
use modjac::BigInt;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "modjac",
    about = "Exact arithmetic for modular Jacobians of two-prime level: Hecke orders, \
             Eisenstein ideals, component groups, point counts and isogeny-kernel \
             classification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, default_value = "text", value_parser = ["text", "json"])]
    format: String,
    /// Path to a level-constants JSON file (defaults to the built-in
    /// constants for the level).
    #[arg(long, global = true)]
    constants: Option<String>,
    /// Override the prime bound for Eisenstein ideal generation.
    #[arg(long, global = true)]
    prime_bound: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Dimensions and cusps of the modular symbols space.
    Space {
        #[arg(long)]
        level: u64,
    },
    /// Hecke order data and operators.
    Hecke {
        #[arg(long)]
        level: u64,
        #[command(subcommand)]
        what: HeckeAction,
    },
    /// Eisenstein and maximal ideal certificates.
    Ideals {
        #[arg(long)]
        level: u64,
        #[arg(value_parser = ["eisenstein", "maximal", "gorenstein", "principal"])]
        target: String,
    },
    /// Component group of the Jacobian at a bad prime.
    Components {
        #[arg(long)]
        level: u64,
        #[arg(long)]
        prime: u64,
    },
    /// Point count of the Jacobian over F_l.
    Jcount {
        #[arg(long)]
        level: u64,
        #[arg(long)]
        prime: u64,
    },
    /// Classify the odd kernel candidates of an equivariant isogeny.
    Classify {
        #[arg(long)]
        level: u64,
    },
    /// Run the complete verification suite, one line per criterion.
    VerifyPaper,
}

#[derive(Subcommand)]
enum HeckeAction {
    /// Discriminant and index in the normalization.
    Disc,
    /// The distinguished operator basis with etale coordinates.
    Basis,
    /// Matrix and etale form of T_n on the cuspidal lattice.
    Op { n: u64 },
    /// Coefficients of T_n on the operator basis.
    Expand { n: u64 },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    std::process::exit(code);
}

fn load_constants(cli: &Cli, level: u64) -> Result<LevelConstants, String> {
    if let Some(path) = &cli.constants {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
        let consts: LevelConstants =
            serde_json::from_str(&text).map_err(|e| format!("{path}: {e}"))?;
        if consts.level != level {
            return Err(format!(
                "constants file is for level {}, not {level}",
                consts.level
            ));
        }
        Ok(consts)
    } else {
        LevelConstants::builtin(level)
            .ok_or_else(|| format!("no built-in constants for level {level}"))
    }
}

fn emit(cli: &Cli, value: Value, text: String) {
    if cli.format == "json" {
        println!(
            "{}",
            serde_json::to_string_pretty(&value).expect("serializable")
        );
    } else {
        println!("{text}");
    }
}

struct Pipeline {
    space: ModSymSpace,
    order: HeckeOrder,
}

fn pipeline(level: u64) -> Result<Pipeline, String> {
    let space = build_space(level).map_err(|e| e.to_string())?;
    let order = build_order(&space).map_err(|e| e.to_string())?;
    Ok(Pipeline { space, order })
}

fn eisenstein(p: &Pipeline, cli: &Cli) -> Result<EisensteinData, String> {
    let bound = cli.prime_bound.unwrap_or(p.order.sturm_bound);
    eisenstein_ideal(&p.space, &p.order, bound).map_err(|e| e.to_string())
}

fn s(x: &BigInt) -> String {
    x.to_string()
}

fn matrix_json(m: &modjac::IntMatrix) -> Value {
    let rows: Vec<Vec<String>> = (0..m.rows())
        .map(|i| m.row(i).iter().map(s).collect())
        .collect();
    json!(rows)
}

fn run(cli: &Cli) -> Result<(), String> {
    match &cli.command {
        Command::Space { level } => {
            let p = pipeline(*level)?;
            let value = json!({
                "level": level,
                "p1_size": p.space.p1_size(),
                "ambient_dim": p.space.ambient_dim,
                "cuspidal_dim": p.space.cuspidal_dim,
                "genus": p.space.genus(),
                "cusps": p.space.cusp_list(),
            });
            let text = format!(
                "level {level}: P1 size {}, ambient dim {}, cuspidal dim {}, genus {}, cusps {}",
                p.space.p1_size(),
                p.space.ambient_dim,
                p.space.cuspidal_dim,
                p.space.genus(),
                p.space.cusp_list().join(" ")
            );
            emit(cli, value, text);
            Ok(())
        }
        Command::Hecke { level, what } => {
            let p = pipeline(*level)?;
            match what {
                HeckeAction::Disc => {
                    let value = json!({
                        "level": level,
                        "disc": s(&p.order.disc),
                        "disc_factored": factor_string(&p.order.disc),
                        "disc_normalization": s(&p.order.disc_max),
                        "index_in_normalization": s(&p.order.index_in_max),
                        "rank": p.order.rank,
                        "sturm_bound": p.order.sturm_bound,
                    });
                    let text = format!(
                        "disc(T) = {} = {}; disc(Tmax) = {}; [Tmax : T] = {}; rank {}",
                        p.order.disc,
                        factor_string(&p.order.disc),
                        p.order.disc_max,
                        p.order.index_in_max,
                        p.order.rank
                    );
                    emit(cli, value, text);
                }
                HeckeAction::Basis => {
                    let elts: Vec<Value> = p
                        .order
                        .basis
                        .iter()
                        .map(|b| {
                            json!({
                                "index": b.index,
                                "etale": format!("{}", b.etale),
                                "coords": p.order.algebra.int_coords(&b.etale)
                                    .expect("integral").iter().map(s).collect::<Vec<_>>(),
                            })
                        })
                        .collect();
                    let value = json!({ "level": level, "basis": elts });
                    let text = p
                        .order
                        .basis
                        .iter()
                        .map(|b| format!("T_{} = {}", b.index.unwrap_or(0), b.etale))
                        .collect::<Vec<_>>()
                        .join("\n");
                    emit(cli, value, text);
                }
                HeckeAction::Op { n } => {
                    let t = p.space.hecke_operator(*n).map_err(|e| e.to_string())?;
                    let etale = p
                        .order
                        .etale_of_matrix(&t.matrix)
                        .map_err(|e| e.to_string())?;
                    let value = json!({
                        "level": level,
                        "n": n,
                        "matrix": matrix_json(&t.matrix),
                        "etale": format!("{etale}"),
                    });
                    let text = format!(
                        "T_{n} = {etale}\nmatrix on the cuspidal lattice:\n{:?}",
                        t.matrix
                    );
                    emit(cli, value, text);
                }
                HeckeAction::Expand { n } => {
                    let t = p.space.hecke_operator(*n).map_err(|e| e.to_string())?;
                    let etale = p
                        .order
                        .etale_of_matrix(&t.matrix)
                        .map_err(|e| e.to_string())?;
                    let coeffs = p.order.expand_in_basis(&etale).map_err(|e| e.to_string())?;
                    let value = json!({
                        "level": level,
                        "n": n,
                        "basis_indices": p.order.basis_indices,
                        "coefficients": coeffs.iter().map(s).collect::<Vec<_>>(),
                    });
                    let terms: Vec<String> = coeffs
                        .iter()
                        .zip(&p.order.basis_indices)
                        .map(|(c, i)| format!("{c} T_{i}"))
                        .collect();
                    emit(cli, value, format!("T_{n} = {}", terms.join(" + ")));
                }
            }
            Ok(())
        }
        Command::Ideals { level, target } => {
            let p = pipeline(*level)?;
            let eis = eisenstein(&p, cli)?;
            match target.as_str() {
                "eisenstein" => {
                    // residues of the bad-prime operators in the quotient
                    let mut residues = Vec::new();
                    for r in [p.space.p, p.space.q] {
                        let t = p.space.hecke_operator(r).map_err(|e| e.to_string())?;
                        let e = p
                            .order
                            .etale_of_matrix(&t.matrix)
                            .map_err(|e| e.to_string())?;
                        if let Some(v) = eis.residue(&p.order, &e) {
                            let action: Vec<Value> = eis
                                .component_action(&v)
                                .iter()
                                .map(|(q, a)| json!({"modulus": s(q), "acts_as": s(a)}))
                                .collect();
                            residues.push(json!({
                                "operator": format!("T_{r}"),
                                "residue": s(&v),
                                "component_action": action,
                            }));
                        }
                    }
                    let value = json!({
                        "level": level,
                        "quotient": format!("{}", eis.quotient),
                        "invariant_factors": eis.quotient.invariant_factors.iter().map(s).collect::<Vec<_>>(),
                        "index": s(&eis.ideal.index),
                        "prime_bound": eis.prime_bound,
                        "bad_prime_residues": residues,
                        "basis": matrix_json(&eis.ideal.basis),
                    });
                    let mut text = format!("T/E = {} (index {})", eis.quotient, eis.ideal.index);
                    for r in &residues {
                        text.push_str(&format!(
                            "\n{} = {} mod {}",
                            r["operator"].as_str().unwrap(),
                            r["residue"].as_str().unwrap(),
                            eis.quotient.order()
                        ));
                    }
                    emit(cli, value, text);
                }
                "maximal" => {
                    let max = eisenstein_maximal_ideals(&p.order, &eis);
                    let spectrum = spectrum_report(&p.order, &max);
                    let items: Vec<Value> = max
                        .iter()
                        .zip(&spectrum)
                        .map(|(m, sp)| {
                            json!({
                                "residue_char": m.residue_char,
                                "residue_degree": m.residue_degree,
                                "index": s(&m.ideal.index),
                                "basis": matrix_json(&m.ideal.basis),
                                "components": sp.component_names,
                                "completion": sp.completion,
                                "generator": m.generator.as_ref().map(|g| format!("{g}")),
                            })
                        })
                        .collect();
                    let text = max
                        .iter()
                        .zip(&spectrum)
                        .map(|(m, sp)| {
                            format!(
                                "m_{}: components {:?}, completion {}, generator {}",
                                m.residue_char,
                                sp.component_names,
                                sp.completion.as_deref().unwrap_or("-"),
                                m.generator
                                    .as_ref()
                                    .map(|g| g.to_string())
                                    .unwrap_or_else(|| "-".into())
                            )
                        })
                        .collect::<Vec<_>>()
                        .join("\n");
                    emit(
                        cli,
                        json!({ "level": level, "maximal_ideals": items }),
                        text,
                    );
                }
                "gorenstein" => {
                    let max = eisenstein_maximal_ideals(&p.order, &eis);
                    let items: Vec<Value> = max
                        .iter()
                        .map(|m| {
                            let dim = socle_dimension(&p.order, m);
                            json!({
                                "residue_char": m.residue_char,
                                "socle_dim": dim,
                                "gorenstein": dim == 1,
                            })
                        })
                        .collect();
                    let text = max
                        .iter()
                        .map(|m| {
                            let dim = socle_dimension(&p.order, m);
                            format!(
                                "m_{}: socle dim {} ({})",
                                m.residue_char,
                                dim,
                                if dim == 1 {
                                    "Gorenstein"
                                } else {
                                    "not Gorenstein"
                                }
                            )
                        })
                        .collect::<Vec<_>>()
                        .join("\n");
                    emit(cli, json!({ "level": level, "socles": items }), text);
                }
                "principal" => {
                    let max = eisenstein_maximal_ideals(&p.order, &eis);
                    let mut items = Vec::new();
                    let mut lines = Vec::new();
                    for m in &max {
                        if m.residue_char % 2 == 1 {
                            let (theta, case) =
                                principal_generator_odd(&p.order, m).map_err(|e| e.to_string())?;
                            items.push(json!({
                                "residue_char": m.residue_char,
                                "principal": true,
                                "generator": format!("{theta}"),
                                "case": case,
                            }));
                            lines.push(format!("m_{}: theta = {theta} ({case})", m.residue_char));
                        } else {
                            // negative certificate through the multiplier ring
                            let mut power = m.ideal.clone();
                            let mut certs = Vec::new();
                            for n in 1..=4 {
                                let mult = multiplier_ring(&p.order, &power);
                                certs.push(json!({
                                    "power": n,
                                    "multiplier_strictly_larger": mult.strictly_contains_order,
                                    "witness": mult.witness.map(|w| w.iter().map(s).collect::<Vec<_>>()),
                                }));
                                power = ideal_product(&p.order, &power, &m.ideal);
                            }
                            items.push(json!({
                                "residue_char": m.residue_char,
                                "principal": false,
                                "multiplier_certificates": certs,
                            }));
                            lines.push(format!(
                                "m_{}: not principal (multiplier ring strictly contains the order, powers 1..4)",
                                m.residue_char
                            ));
                        }
                    }
                    emit(
                        cli,
                        json!({ "level": level, "principality": items }),
                        lines.join("\n"),
                    );
                }
                _ => unreachable!("validated by clap"),
            }
            Ok(())
        }
        Command::Components { level, prime } => {
            let consts = load_constants(cli, *level)?;
            let fac = modjac::arith::factor(&BigInt::from(*level));
            if fac.len() != 2 || fac.iter().any(|&(_, e)| e != 1) {
                return Err(format!("level {level} is not a product of two primes"));
            }
            let (p, q) = (fac[0].0, fac[1].0);
            if *prime != p && *prime != q {
                return Err(format!("{prime} is not a bad prime of level {level}"));
            }
            let other = if *prime == p { q } else { p };
            let graph = if let Some(over) = consts.component_overrides.get(prime) {
                match &over.edge_lengths {
                    Some(lengths) => dual_graph_from_lengths(other, *prime, lengths),
                    None => {
                        return Err(format!(
                            "characteristic {prime} needs edge lengths in the constants file"
                        ))
                    }
                }
            } else {
                dual_graph(other, *prime).map_err(|e| e.to_string())?
            };
            let comp = component_group(&graph);
            let report = cusp_reduction_map(&graph, &comp);
            let value = json!({
                "level": level,
                "prime": prime,
                "edge_lengths": graph.edge_lengths,
                "cusps": graph.cusps.iter().map(|(d, h)| json!({"label": d, "hub": format!("{h:?}")})).collect::<Vec<_>>(),
                "component_group": format!("{}", comp.group),
                "invariant_factors": comp.group.invariant_factors.iter().map(s).collect::<Vec<_>>(),
                "reduction_orders": report.orders.iter().map(|(d, o)| json!({"cusp_difference": format!("[1]-[{d}]"), "order": s(o)})).collect::<Vec<_>>(),
                "cuspidal_image_order": s(&report.image_order),
                "cokernel": format!("{}", report.cokernel),
            });
            let text = format!(
                "Phi({prime}) = {} from chain lengths {:?}; {}; image order {}, cokernel {}",
                comp.group,
                graph.edge_lengths,
                report
                    .orders
                    .iter()
                    .map(|(d, o)| format!("ord([1]-[{d}]) = {o}"))
                    .collect::<Vec<_>>()
                    .join(", "),
                report.image_order,
                report.cokernel
            );
            emit(cli, value, text);
            Ok(())
        }
        Command::Jcount { level, prime } => {
            let p = pipeline(*level)?;
            let jc = jacobian_count(&p.space, &p.order, *prime).map_err(|e| e.to_string())?;
            let value = json!({
                "level": level,
                "prime": prime,
                "count": s(&jc.count),
                "count_factored": factor_string(&jc.count),
                "frobenius_trace": format!("{}", jc.frobenius_trace),
            });
            let text = format!(
                "#J(F_{prime}) = {} = {} (T_{prime} = {})",
                jc.count,
                factor_string(&jc.count),
                jc.frobenius_trace
            );
            emit(cli, value, text);
            Ok(())
        }
        Command::Classify { level } => {
            let consts = load_constants(cli, *level)?;
            let cert = run_level(&consts, cli.prime_bound).map_err(|e| e.to_string())?;
            let value = serde_json::to_value(&cert).expect("serializable");
            let mut lines = Vec::new();
            lines.push(format!(
                "level {level}: T/E = {}, cuspidal group {}",
                cert.eisenstein_quotient, cert.cuspidal_group
            ));
            for ob in &cert.obstructions {
                let tried: Vec<String> = ob
                    .attempts
                    .iter()
                    .map(|a| format!("l={} (#J = {})", a.ell, factor_string(&a.count)))
                    .collect();
                lines.push(format!(
                    "obstruction p = {}, {}^{} forbidden: {} [{}]{}",
                    ob.p,
                    ob.p,
                    ob.forbidden_power,
                    if ob.passes { "holds" } else { "FAILS" },
                    tried.join(", "),
                    if ob.informational {
                        " (informational)"
                    } else {
                        ""
                    }
                ));
            }
            for v in &cert.candidates {
                let mut parts = Vec::new();
                for (r, preds, target) in &v.per_prime {
                    let shown: Vec<String> = preds
                        .iter()
                        .map(|b| b.predicted_odd_order.to_string())
                        .collect();
                    parts.push(format!(
                        "at {r}: predicts {{{}}} needs {target}",
                        shown.join(", ")
                    ));
                }
                lines.push(format!(
                    "candidate {:11} {} -- {}",
                    v.candidate.name(),
                    if v.survives { "SURVIVES" } else { "rejected" },
                    parts.join("; ")
                ));
            }
            let names: Vec<String> = cert.survivors.iter().map(|c| c.name()).collect();
            lines.push(format!("survivors: {names:?}"));
            emit(cli, value, lines.join("\n"));
            if cert.survivors.len() != 1 {
                return Err(format!(
                    "expected a unique survivor, found {}",
                    cert.survivors.len()
                ));
            }
            Ok(())
        }
        Command::VerifyPaper => {
            let results = modjac::verify::run_all();
            let all_pass = results.iter().all(|r| r.passed);
            if cli.format == "json" {
                let value = serde_json::to_value(&results).expect("serializable");
                println!(
                    "{}",
                    serde_json::to_string_pretty(&value).expect("serializable")
                );
            } else {
                for r in &results {
                    println!("{}", r.line());
                }
            }
            if all_pass {
                Ok(())
            } else {
                Err("verification failed".into())
            }
        }
    }
}
