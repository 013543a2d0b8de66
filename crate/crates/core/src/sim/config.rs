use std::time::Duration;

use super::{ChurnModel, ScenarioConfig};
use crate::bbbc::BbbcConfig;
use crate::error::{Error, Result};
use crate::topology::{ChurnEvent, Node, NodeId, TopologyParams};

/// Parses a flat `key = value` scenario file.
///
/// Blank lines are skipped and `#` starts a comment. Unknown or repeated keys
/// are errors, except `leave` and `join`, which may repeat. Scripted churn
/// (`leave` / `join`) and random churn (`joins` / `leaves`) are exclusive.
///
/// ```text
/// n = 25
/// width = 500
/// height = 500
/// range = 250
/// epochs = 5
/// pairs = 1-25, 2-10
/// joins = 2
/// leaves = 2
/// population = 50
/// generations = 200
/// seed = 7
/// ```
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let mut params = TopologyParams::new(25, 500.0, 500.0, 250.0);
    let mut bbbc = BbbcConfig::default();
    let mut epochs = 1;
    let mut pairs: Option<Vec<(NodeId, NodeId)>> = None;
    let mut joins = 0;
    let mut leaves = 0;
    let mut scripted: Vec<(usize, ScriptedEvent)> = Vec::new();
    let mut energy_drain = 0.02;
    let mut seed = 0;
    let mut seen: Vec<String> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| Error::parse(line_no, format!("expected key = value, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        if key != "leave" && key != "join" {
            if seen.iter().any(|k| k == key) {
                return Err(Error::parse(line_no, format!("duplicate key {key:?}")));
            }
            seen.push(key.to_string());
        }
        let num = |v: &str| -> Result<f64> {
            v.parse::<f64>().map_err(|_| Error::parse(line_no, format!("{key}: {v:?} is not a number")))
        };
        let count = |v: &str| -> Result<usize> {
            v.parse::<usize>().map_err(|_| Error::parse(line_no, format!("{key}: {v:?} is not a count")))
        };
        let m = &mut params.metrics;
        match key {
            "n" => params.n = count(value)?,
            "width" => params.area.width = num(value)?,
            "height" => params.area.height = num(value)?,
            "range" => params.range = num(value)?,
            "energy_min" => m.energy.lo = num(value)?,
            "energy_max" => m.energy.hi = num(value)?,
            "throughput_min" => m.throughput.lo = num(value)?,
            "throughput_max" => m.throughput.hi = num(value)?,
            "delay_min" => m.delay_ms.lo = num(value)?,
            "delay_max" => m.delay_ms.hi = num(value)?,
            "jitter_min" => m.jitter_ms.lo = num(value)?,
            "jitter_max" => m.jitter_ms.hi = num(value)?,
            "epochs" => epochs = count(value)?,
            "pairs" => pairs = Some(parse_pairs(value, line_no)?),
            "joins" => joins = count(value)?,
            "leaves" => leaves = count(value)?,
            "leave" | "join" => scripted.push((line_no, parse_event(key, value, line_no)?)),
            "population" => bbbc.population_size = count(value)?,
            "generations" => bbbc.max_generations = count(value)?,
            "time_budget" => {
                let secs = num(value)?;
                bbbc.time_budget = Some(
                    Duration::try_from_secs_f64(secs)
                        .map_err(|_| Error::parse(line_no, format!("time_budget: {value:?} is not a duration")))?,
                );
            }
            "shrink_exponent" => bbbc.shrink_exponent = num(value)?,
            "stagnation" => bbbc.stagnation_limit = Some(count(value)?),
            "energy_drain" => energy_drain = num(value)?,
            "seed" => {
                seed = value.parse().map_err(|_| Error::parse(line_no, format!("seed: {value:?} is not a u64")))?
            }
            _ => return Err(Error::parse(line_no, format!("unknown key {key:?}"))),
        }
    }

    let churn = if scripted.is_empty() {
        if joins == 0 && leaves == 0 {
            ChurnModel::None
        } else {
            ChurnModel::Random { joins, leaves }
        }
    } else {
        if joins != 0 || leaves != 0 {
            return Err(Error::invalid("scripted and random churn cannot be combined"));
        }
        let mut events = Vec::with_capacity(scripted.len());
        for (line_no, e) in scripted {
            events.push(match e {
                ScriptedEvent::Leave { id, epoch } => ChurnEvent::leave(NodeId(id), epoch),
                ScriptedEvent::Join { id, epoch, x, y, energy } => {
                    let node = Node::new(id, x, y, energy, params.range);
                    if !params.area.contains(x, y) {
                        return Err(Error::parse(line_no, format!("join of {id} lies outside the area")));
                    }
                    ChurnEvent::join(node, epoch)
                }
            });
        }
        ChurnModel::Scripted(events)
    };

    let n = params.n as u32;
    let config = ScenarioConfig {
        pairs: pairs.unwrap_or_else(|| vec![(NodeId(1), NodeId(n))]),
        epochs,
        churn,
        bbbc,
        energy_drain,
        seed,
        topology: super::InitialTopology::Generated(params),
    };
    config.validate()?;
    Ok(config)
}

enum ScriptedEvent {
    Leave { id: u32, epoch: u64 },
    Join { id: u32, epoch: u64, x: f64, y: f64, energy: f64 },
}

/// `1-25, 2-10`
fn parse_pairs(value: &str, line_no: usize) -> Result<Vec<(NodeId, NodeId)>> {
    value
        .split(',')
        .map(|p| {
            let p = p.trim();
            let (s, t) = p
                .split_once('-')
                .ok_or_else(|| Error::parse(line_no, format!("pair {p:?} is not <source>-<terminal>")))?;
            let id = |v: &str| v.trim().parse::<u32>().map_err(|_| Error::parse(line_no, format!("bad node id {v:?}")));
            Ok((NodeId(id(s)?), NodeId(id(t)?)))
        })
        .collect()
}

/// `leave = <id>@<epoch>` or `join = <id>@<epoch> <x> <y> <energy>`.
fn parse_event(key: &str, value: &str, line_no: usize) -> Result<ScriptedEvent> {
    let bad = || Error::parse(line_no, format!("{key}: cannot parse {value:?}"));
    let mut fields = value.split_whitespace();
    let (id, epoch) = fields.next().and_then(|f| f.split_once('@')).ok_or_else(bad)?;
    let id: u32 = id.parse().map_err(|_| bad())?;
    let epoch: u64 = epoch.parse().map_err(|_| bad())?;
    let rest: Vec<f64> = fields.map(|f| f.parse().map_err(|_| bad())).collect::<Result<_>>()?;
    match (key, rest.as_slice()) {
        ("leave", []) => Ok(ScriptedEvent::Leave { id, epoch }),
        ("join", &[x, y, energy]) => Ok(ScriptedEvent::Join { id, epoch, x, y, energy }),
        _ => Err(bad()),
    }
}
