use serde_json::Value as Json;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::Report;
use crate::run::{pool, verify};

/// Expands the `grid` of `doc` into its cross product and verifies each
/// point.
///
/// Grid keys are JSON pointers into `doc`, taken in sorted order with the
/// first key varying slowest; each key's values keep their listed order.
/// Rows are prefixed with the grid assignment that produced them. A missing
/// or empty grid, or a key with no values, yields an empty report.
pub fn run_sweep(doc: &Json, jobs: Option<usize>) -> Result<Report, CliError> {
    let grid = RunConfig::from_json(&doc.to_string())?.grid;
    if grid.is_empty() || grid.values().any(Vec::is_empty) {
        return Ok(Report::default());
    }
    let keys: Vec<&String> = grid.keys().collect();
    let mut base = doc.clone();
    base.as_object_mut().expect("config is an object").remove("grid");

    let pool = pool(jobs)?;
    let mut rows = Vec::new();
    let mut index = vec![0usize; keys.len()];
    loop {
        let mut point = base.clone();
        let mut label = Vec::with_capacity(keys.len());
        for (key, &i) in keys.iter().zip(&index) {
            let value = &grid[*key][i];
            set_pointer(&mut point, key, value.clone())?;
            label.push(format!("{key}={value}"));
        }
        let cfg: RunConfig = serde_json::from_value(point).map_err(|e| CliError::Config(format!("{}: {e}", label.join(" "))))?;
        cfg.validate()?;
        let prefix = label.join(" ");
        let report = pool.install(|| verify(&cfg))?;
        rows.extend(report.rows.into_iter().map(|mut r| {
            r.inputs = format!("{prefix} {}", r.inputs);
            r
        }));
        // Odometer step, last key fastest.
        let mut k = keys.len();
        loop {
            if k == 0 {
                return Ok(Report::new(rows));
            }
            k -= 1;
            index[k] += 1;
            if index[k] < grid[keys[k]].len() {
                break;
            }
            index[k] = 0;
        }
    }
}

/// Writes `value` at `pointer`, creating the final object member or
/// appending to an array when the index equals its length.
fn set_pointer(doc: &mut Json, pointer: &str, value: Json) -> Result<(), CliError> {
    let bad = |why: &str| CliError::Config(format!("grid key `{pointer}`: {why}"));
    let (parent, last) = pointer.rsplit_once('/').ok_or_else(|| bad("not a JSON pointer"))?;
    if !pointer.starts_with('/') {
        return Err(bad("not a JSON pointer"));
    }
    let last = last.replace("~1", "/").replace("~0", "~");
    match doc.pointer_mut(parent).ok_or_else(|| bad("parent does not exist"))? {
        Json::Object(map) => {
            map.insert(last, value);
        }
        Json::Array(items) => {
            let i: usize = last.parse().map_err(|_| bad("array index expected"))?;
            match i.cmp(&items.len()) {
                std::cmp::Ordering::Less => items[i] = value,
                std::cmp::Ordering::Equal => items.push(value),
                std::cmp::Ordering::Greater => return Err(bad("array index out of range")),
            }
        }
        _ => return Err(bad("parent is not a container")),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn pointers_replace_and_create() {
        let mut doc = json!({"checks": [{"type": "young"}], "x": {"y~/z": 1}});
        set_pointer(&mut doc, "/checks/0/mesh", json!(3)).unwrap();
        set_pointer(&mut doc, "/x/y~0~1z", json!(2)).unwrap();
        set_pointer(&mut doc, "/checks/1", json!({"type": "lemma22"})).unwrap();
        assert_eq!(doc, json!({"checks": [{"type": "young", "mesh": 3}, {"type": "lemma22"}], "x": {"y~/z": 2}}));
        assert!(set_pointer(&mut doc, "/checks/5", json!(0)).is_err());
        assert!(set_pointer(&mut doc, "/nope/a", json!(0)).is_err());
        assert!(set_pointer(&mut doc, "checks", json!(0)).is_err());
    }

    #[test]
    fn empty_grid_gives_empty_report() {
        let doc = json!({"scale": [{"integers": [0, 3]}], "function": "identity", "checks": [{"type": "young"}]});
        assert!(run_sweep(&doc, None).unwrap().rows.is_empty());
        let doc = json!({"checks": [], "grid": {"/tolerance": []}});
        assert_eq!(run_sweep(&doc, None).unwrap().exit_code(), 0);
    }

    #[test]
    fn grid_order_is_sorted_keys_then_listed_values() {
        let doc = json!({
            "checks": [{"type": "examples", "example": "geometric_b", "base": 2, "range": [0, 1]}],
            "grid": {"/checks/0/base": [3, 2], "/checks/0/range/1": [1, 2]}
        });
        let report = run_sweep(&doc, Some(2)).unwrap();
        let prefixes: Vec<String> = report
            .rows
            .iter()
            .map(|r| r.inputs.split(' ').take(2).collect::<Vec<_>>().join(" "))
            .collect();
        let mut seen: Vec<String> = Vec::new();
        for p in prefixes {
            if seen.last() != Some(&p) {
                seen.push(p);
            }
        }
        assert_eq!(
            seen,
            [
                "/checks/0/base=3 /checks/0/range/1=1",
                "/checks/0/base=3 /checks/0/range/1=2",
                "/checks/0/base=2 /checks/0/range/1=1",
                "/checks/0/base=2 /checks/0/range/1=2",
            ]
        );
    }
}
