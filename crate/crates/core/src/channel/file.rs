//! JSON channel files.
//!
//! ```json
//! {
//!   "states": ["0", "1"],
//!   "inputs": ["0", "1"],
//!   "outputs": ["0", "1"],
//!   "initial_state": "0",
//!   "next_state": { "0,0": "1", "0,1": "0", "1,0": "1", "1,1": "0" },
//!   "emission": { "0,0": ["0.9", "0.1"], "0,1": ["0.1", "0.9"],
//!                 "1,0": ["0.9", "0.1"], "1,1": ["0.1", "0.9"] },
//!   "allowed": { "0": ["0"], "1": ["0", "1"] }
//! }
//! ```
//!
//! Keys of `next_state` and `emission` are `"state,input"`. Probabilities are
//! decimal strings (plain JSON numbers are accepted too). A row whose sum is
//! off by more than [`ROW_SUM_TOL`] is rejected; smaller drift is
//! renormalized. `allowed` is optional and defaults to every input.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Fsc;
use crate::{Error, Result};

/// Largest accepted deviation of an emission row sum from one.
pub const ROW_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub(crate) enum Decimal {
    Text(String),
    Number(f64),
}

impl Decimal {
    fn value(&self) -> std::result::Result<f64, String> {
        match self {
            Decimal::Number(v) => Ok(*v),
            Decimal::Text(s) => s.trim().parse::<f64>().map_err(|_| format!("{s:?} is not a decimal number")),
        }
    }
}

/// On-disk form of a channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub states: Vec<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub initial_state: String,
    pub next_state: BTreeMap<String, String>,
    pub(crate) emission: BTreeMap<String, Vec<Decimal>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowed: Option<BTreeMap<String, Vec<String>>>,
}

impl ChannelFile {
    pub fn from_fsc(fsc: &Fsc) -> Self {
        let mut next_state = BTreeMap::new();
        let mut emission = BTreeMap::new();
        for (s, sname) in fsc.state_names.iter().enumerate() {
            for (x, xname) in fsc.input_names.iter().enumerate() {
                let key = format!("{sname},{xname}");
                next_state.insert(key.clone(), fsc.state_names[fsc.next_state[s][x]].clone());
                emission.insert(key, fsc.emission[s][x].iter().map(|p| Decimal::Text(p.to_string())).collect());
            }
        }
        let all_allowed = fsc.allowed.iter().all(|r| r.iter().all(|&a| a));
        let allowed = (!all_allowed).then(|| {
            fsc.state_names
                .iter()
                .enumerate()
                .map(|(s, name)| (name.clone(), fsc.allowed_inputs(s).into_iter().map(|x| fsc.input_names[x].clone()).collect()))
                .collect()
        });
        ChannelFile {
            states: fsc.state_names.clone(),
            inputs: fsc.input_names.clone(),
            outputs: fsc.output_names.clone(),
            initial_state: fsc.state_names[fsc.initial_state].clone(),
            next_state,
            emission,
            allowed,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("channel file serializes")
    }
}

/// 1-based line of the first occurrence of `"needle"` in `text`.
pub(crate) fn line_of(text: &str, needle: &str) -> Option<usize> {
    let quoted = format!("\"{needle}\"");
    text.find(&quoted).map(|pos| text[..pos].matches('\n').count() + 1)
}

pub(crate) fn located(text: &str, key: &str, msg: String) -> String {
    match line_of(text, key) {
        Some(line) => format!("line {line}: {msg}"),
        None => msg,
    }
}

/// Like [`located`], but looks for `key` only after the first occurrence of `section`.
pub(crate) fn located_in(text: &str, section: &str, key: &str, msg: String) -> String {
    let start = text.find(&format!("\"{section}\"")).unwrap_or(0);
    let offset = text[..start].matches('\n').count();
    match line_of(&text[start..], key).map(|l| l + offset) {
        Some(line) => format!("line {line}: {msg}"),
        None => msg,
    }
}

pub(crate) fn index_of(names: &[String], name: &str) -> Option<usize> {
    names.iter().position(|n| n == name)
}

/// Parse and validate a JSON channel file.
///
/// Every problem found is reported, each prefixed with the line it refers to.
pub fn parse_channel(text: &str) -> Result<Fsc> {
    let file: ChannelFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {}: {e}", e.line())))?;
    let mut problems = Vec::new();

    for (what, names) in [("states", &file.states), ("inputs", &file.inputs), ("outputs", &file.outputs)] {
        if names.is_empty() {
            problems.push(located(text, what, format!("`{what}` is empty")));
        }
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != names.len() {
            problems.push(located(text, what, format!("`{what}` has duplicate names")));
        }
    }

    let n_s = file.states.len();
    let n_x = file.inputs.len();
    let n_y = file.outputs.len();
    let initial_state = index_of(&file.states, &file.initial_state).unwrap_or_else(|| {
        problems.push(located(text, "initial_state", format!("initial state {:?} is not a state", file.initial_state)));
        0
    });

    let split_key = |key: &str| -> std::result::Result<(usize, usize), String> {
        let (s, x) = key.split_once(',').ok_or_else(|| format!("key {key:?} is not of the form \"state,input\""))?;
        let s = index_of(&file.states, s.trim()).ok_or_else(|| format!("key {key:?}: unknown state"))?;
        let x = index_of(&file.inputs, x.trim()).ok_or_else(|| format!("key {key:?}: unknown input"))?;
        Ok((s, x))
    };

    let mut next_state = vec![vec![None; n_x]; n_s];
    for (key, target) in &file.next_state {
        match split_key(key) {
            Ok((s, x)) => match index_of(&file.states, target) {
                Some(t) => next_state[s][x] = Some(t),
                None => problems.push(located_in(text, "next_state", key, format!("next_state {key:?} -> {target:?}: unknown state"))),
            },
            Err(msg) => problems.push(located_in(text, "next_state", key, msg)),
        }
    }

    let mut emission = vec![vec![None; n_x]; n_s];
    for (key, row) in &file.emission {
        let (s, x) = match split_key(key) {
            Ok(sx) => sx,
            Err(msg) => {
                problems.push(located_in(text, "emission", key, msg));
                continue;
            }
        };
        if row.len() != n_y {
            problems.push(located_in(text, "emission", key, format!("emission {key:?} has {} entries, expected {n_y}", row.len())));
            continue;
        }
        let mut values = Vec::with_capacity(n_y);
        for d in row {
            match d.value() {
                Ok(v) if (0.0..=1.0).contains(&v) => values.push(v),
                Ok(v) => problems.push(located_in(text, "emission", key, format!("emission {key:?}: probability {v} outside [0, 1]"))),
                Err(msg) => problems.push(located_in(text, "emission", key, format!("emission {key:?}: {msg}"))),
            }
        }
        if values.len() != n_y {
            continue;
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            problems.push(located_in(text, "emission", key, format!("emission {key:?} sums to {sum}, not 1")));
            continue;
        }
        values.iter_mut().for_each(|v| *v /= sum);
        emission[s][x] = Some(values);
    }

    let mut allowed = vec![vec![true; n_x]; n_s];
    if let Some(map) = &file.allowed {
        allowed = vec![vec![false; n_x]; n_s];
        for s in 0..n_s {
            if !map.contains_key(&file.states[s]) {
                allowed[s] = vec![true; n_x];
            }
        }
        for (state, inputs) in map {
            let Some(s) = index_of(&file.states, state) else {
                problems.push(located(text, state, format!("allowed: unknown state {state:?}")));
                continue;
            };
            for input in inputs {
                match index_of(&file.inputs, input) {
                    Some(x) => allowed[s][x] = true,
                    None => problems.push(located(text, state, format!("allowed[{state:?}]: unknown input {input:?}"))),
                }
            }
            if inputs.is_empty() {
                problems.push(located(text, state, format!("allowed[{state:?}] is empty")));
            }
        }
    }

    let mut ns = vec![vec![0; n_x]; n_s];
    let mut em = vec![vec![Vec::new(); n_x]; n_s];
    for s in 0..n_s {
        for x in 0..n_x {
            let key = format!("{},{}", file.states[s], file.inputs[x]);
            match next_state[s][x] {
                Some(t) => ns[s][x] = t,
                None => problems.push(located(text, "next_state", format!("next_state is missing entry {key:?}"))),
            }
            match emission[s][x].take() {
                Some(row) => em[s][x] = row,
                None if file.emission.contains_key(&key) => {}
                None => problems.push(located(text, "emission", format!("emission is missing entry {key:?}"))),
            }
        }
    }

    if !problems.is_empty() {
        return Err(Error::Parse(problems.join("\n")));
    }
    let fsc = Fsc {
        state_names: file.states,
        input_names: file.inputs,
        output_names: file.outputs,
        next_state: ns,
        emission: em,
        allowed,
        initial_state,
    };
    fsc.ensure_valid()?;
    Ok(fsc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{make_rll_dmc, Dmc, RllSpec};

    const SAMPLE: &str = r#"{
  "states": ["0", "1"],
  "inputs": ["0", "1"],
  "outputs": ["0", "1"],
  "initial_state": "0",
  "next_state": { "0,0": "1", "0,1": "0", "1,0": "1", "1,1": "0" },
  "emission": {
    "0,0": ["0.9", "0.1"],
    "0,1": ["0.1", "0.9"],
    "1,0": ["0.9", "0.1"],
    "1,1": ["0.1", "0.9"]
  },
  "allowed": { "0": ["0"], "1": ["0", "1"] }
}"#;

    #[test]
    fn parses_sample_into_rll_bsc() {
        let fsc = parse_channel(SAMPLE).unwrap();
        let reference = make_rll_dmc(RllSpec::d_inf(1), Dmc::Bsc(0.1)).unwrap();
        assert_eq!(fsc.next_state, reference.next_state);
        assert_eq!(fsc.allowed, reference.allowed);
        for s in 0..2 {
            for x in 0..2 {
                for y in 0..2 {
                    assert!((fsc.emission[s][x][y] - reference.emission[s][x][y]).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn small_drift_is_renormalized() {
        let text = SAMPLE.replace(r#""0,0": ["0.9", "0.1"]"#, r#""0,0": ["0.9000000001", "0.1"]"#);
        let fsc = parse_channel(&text).unwrap();
        let sum: f64 = fsc.emission[0][0].iter().sum();
        assert!((sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn large_drift_is_rejected_with_line() {
        let text = SAMPLE.replace(r#""1,0": ["0.9", "0.1"]"#, r#""1,0": ["0.8", "0.1"]"#);
        let err = parse_channel(&text).unwrap_err().to_string();
        assert!(err.contains("line 10"), "{err}");
        assert!(err.contains("sums to"), "{err}");
    }

    #[test]
    fn missing_entry_reported() {
        let text = SAMPLE.replace(r#""1,1": "0" }"#, "}").replace(r#", }"#, " }");
        let err = parse_channel(&text).unwrap_err().to_string();
        assert!(err.contains("missing entry \"1,1\""), "{err}");
    }

    #[test]
    fn syntax_errors_carry_line() {
        let err = parse_channel("{\n  \"states\": [\n}").unwrap_err().to_string();
        assert!(err.starts_with("line "), "{err}");
    }

    #[test]
    fn writer_round_trips() {
        let fsc = make_rll_dmc(RllSpec::new(1, crate::channel::RunLimit::Finite(3)).unwrap(), Dmc::Bec(0.25)).unwrap();
        let text = ChannelFile::from_fsc(&fsc).to_json();
        assert_eq!(parse_channel(&text).unwrap(), fsc);
    }
}
