//! Line-oriented `key = value` scenario documents.
//!
//! Blank lines and text after `#` are ignored. Lists are comma separated and
//! may contain inclusive ranges `start:stop:step`.

use std::collections::HashMap;
use std::path::PathBuf;

use super::{Param, Refinement, Scenario, ScenarioKind, Sweep, TimeGrid};
use crate::error::{Error, Result};
use crate::lattice::{Boundary, QuenchProtocol};

const KEYS: [&str; 21] = [
    "name",
    "kind",
    "n",
    "j",
    "lambda_i",
    "lambda_f",
    "epsilon",
    "d",
    "boundary",
    "t_max",
    "dt",
    "times",
    "sweep",
    "values",
    "series",
    "series_values",
    "refine_width",
    "refine_step",
    "cases",
    "seed",
    "output",
];

struct Document {
    entries: HashMap<&'static str, String>,
}

impl Document {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::ConfigParse { line, message: format!("expected `key = value`, found `{content}`") });
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                return Err(Error::UnknownKey { line, key: key.into() });
            };
            if value.is_empty() {
                return Err(Error::ConfigParse { line, message: format!("`{key}` has no value") });
            }
            if entries.insert(known, value.to_string()).is_some() {
                return Err(Error::ConfigParse { line, message: format!("`{key}` is given twice") });
            }
        }
        Ok(Document { entries })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key).map(|v| parse_number(key, v)).transpose()
    }

    fn integer(&self, key: &str) -> Result<Option<u64>> {
        self.raw(key)
            .map(|v| {
                v.parse::<u64>().map_err(|_| Error::ConfigValue {
                    key: key.into(),
                    message: format!("`{v}` is not a non-negative integer"),
                })
            })
            .transpose()
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.raw(key).map(|v| parse_list(key, v)).transpose()
    }
}

fn parse_number(key: &str, text: &str) -> Result<f64> {
    let v: f64 = text.trim().parse().map_err(|_| Error::ConfigValue {
        key: key.into(),
        message: format!("`{}` is not a number", text.trim()),
    })?;
    if !v.is_finite() {
        return Err(Error::ConfigValue { key: key.into(), message: format!("`{}` is not finite", text.trim()) });
    }
    Ok(v)
}

/// Rounds to twelve significant digits so that range points such as
/// `0.05 + 9 * 0.05` land on the literal they denote.
pub(crate) fn tidy(v: f64) -> f64 {
    format!("{v:.11e}").parse().unwrap_or(v)
}

fn parse_list(key: &str, text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in text.split(',') {
        let item = item.trim();
        if item.is_empty() {
            return Err(Error::ConfigValue { key: key.into(), message: "empty list element".into() });
        }
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [single] => out.push(parse_number(key, single)?),
            [start, stop, step] => {
                let (a, b, h) = (parse_number(key, start)?, parse_number(key, stop)?, parse_number(key, step)?);
                if !(h > 0.0) || b < a {
                    return Err(Error::ConfigValue {
                        key: key.into(),
                        message: format!("range `{item}` needs start <= stop and a positive step"),
                    });
                }
                let steps = ((b - a) / h).round();
                if (a + steps * h - b).abs() > 1e-9 * b.abs().max(1.0) {
                    return Err(Error::ConfigValue {
                        key: key.into(),
                        message: format!("range `{item}` does not end on a grid point"),
                    });
                }
                if steps > 1e6 {
                    return Err(Error::ConfigValue { key: key.into(), message: format!("range `{item}` is too long") });
                }
                out.extend((0..=steps as usize).map(|i| tidy(a + i as f64 * h)));
            }
            _ => {
                return Err(Error::ConfigValue {
                    key: key.into(),
                    message: format!("`{item}` is neither a number nor start:stop:step"),
                })
            }
        }
    }
    Ok(out)
}

fn read_sweep(doc: &Document, param_key: &str, values_key: &str) -> Result<Option<Sweep>> {
    match (doc.raw(param_key), doc.list(values_key)?) {
        (Some(p), Some(values)) => Ok(Some(Sweep { param: p.parse().map_err(|e| rename(e, param_key))?, values })),
        (None, None) => Ok(None),
        (Some(_), None) => Err(Error::ConfigValue { key: values_key.into(), message: format!("required by `{param_key}`") }),
        (None, Some(_)) => Err(Error::ConfigValue { key: param_key.into(), message: format!("required by `{values_key}`") }),
    }
}

fn rename(e: Error, key: &str) -> Error {
    match e {
        Error::ConfigValue { message, .. } => Error::ConfigValue { key: key.into(), message },
        other => other,
    }
}

/// Parses and validates a scenario document. Unknown keys are rejected with
/// their line number; `j` defaults to 1 and `boundary` to periodic-spin.
pub fn parse_config(text: &str) -> Result<Scenario> {
    let doc = Document::parse(text)?;
    let kind: ScenarioKind = doc
        .raw("kind")
        .ok_or_else(|| Error::ConfigValue { key: "kind".into(), message: "missing".into() })?
        .parse()?;

    // `sweep = t` is the time grid spelled as a sweep.
    let time_sweep = doc.raw("sweep") == Some("t");
    let sweep = if time_sweep { None } else { read_sweep(&doc, "sweep", "values")? };
    let series = read_sweep(&doc, "series", "series_values")?;
    let swept = |p: Param| {
        sweep.as_ref().is_some_and(|s| s.param == p) || series.as_ref().is_some_and(|s| s.param == p)
    };

    let oracle = kind == ScenarioKind::OracleCompare;
    let field = |key: &str, param: Param, fallback: f64| -> Result<f64> {
        match doc.number(key)? {
            Some(v) => Ok(v),
            None if swept(param) => Ok(first_value(&sweep, &series, param)),
            None if oracle && param != Param::N => Ok(fallback),
            None => Err(Error::ConfigValue { key: key.into(), message: "missing".into() }),
        }
    };
    let index = |key: &str, v: f64| -> Result<usize> {
        if v >= 0.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(Error::ConfigValue { key: key.into(), message: format!("{v} is not a non-negative integer") })
        }
    };
    let boundary = match doc.raw("boundary") {
        Some(b) => b.parse::<Boundary>().map_err(|e| rename(e, "boundary"))?,
        None => Boundary::PeriodicSpin,
    };
    let base = QuenchProtocol {
        n: index("n", field("n", Param::N, 0.0)?)?,
        j: doc.number("j")?.unwrap_or(1.0),
        lambda_i: field("lambda_i", Param::LambdaI, 1.0)?,
        lambda_f: field("lambda_f", Param::LambdaF, 1.0)?,
        epsilon: field("epsilon", Param::Epsilon, 1.0)?,
        d: index("d", field("d", Param::D, 0.0)?)?,
        boundary,
    };

    let time_grid = match (doc.number("t_max")?, doc.number("dt")?, doc.list("times")?) {
        (_, _, Some(_)) if time_sweep => {
            return Err(Error::ConfigValue { key: "times".into(), message: "conflicts with `sweep = t`".into() })
        }
        (None, None, None) if time_sweep => TimeGrid::Explicit(doc.list("values")?.unwrap_or_default()),
        (Some(_), _, Some(_)) | (_, Some(_), Some(_)) => {
            return Err(Error::ConfigValue { key: "times".into(), message: "give either `times` or `t_max`/`dt`".into() })
        }
        (None, Some(_), None) => {
            return Err(Error::ConfigValue { key: "t_max".into(), message: "required by `dt`".into() })
        }
        (Some(t_max), dt, None) => TimeGrid::Uniform { t_max, dt: dt.unwrap_or(kind.default_dt()) },
        (None, None, Some(t)) => TimeGrid::Explicit(t),
        (None, None, None) if oracle => TimeGrid::Uniform { t_max: 10.0, dt: 0.5 },
        (None, None, None) => TimeGrid::Unset,
    };

    let refine = match (doc.number("refine_width")?, doc.number("refine_step")?) {
        (Some(half_width), Some(step)) => Some(Refinement { half_width, step }),
        (None, None) => None,
        (Some(_), None) => return Err(Error::ConfigValue { key: "refine_step".into(), message: "required by `refine_width`".into() }),
        (None, Some(_)) => return Err(Error::ConfigValue { key: "refine_width".into(), message: "required by `refine_step`".into() }),
    };

    let mut scenario = Scenario::new(doc.raw("name").unwrap_or(kind.as_str()), kind, base);
    scenario.sweep = sweep;
    scenario.series = series;
    scenario.time_grid = time_grid;
    scenario.refine = refine;
    if let Some(c) = doc.integer("cases")? {
        scenario.cases = c as usize;
    }
    if let Some(s) = doc.integer("seed")? {
        scenario.seed = s;
    }
    scenario.output = doc.raw("output").map(PathBuf::from);
    scenario.validate()?;
    Ok(scenario)
}

fn first_value(sweep: &Option<Sweep>, series: &Option<Sweep>, param: Param) -> f64 {
    [sweep, series]
        .into_iter()
        .flatten()
        .find(|s| s.param == param)
        .and_then(|s| s.values.first().copied())
        .unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "kind = epsilon-sweep\nn = 16\nlambda_i = 1.5\nlambda_f = 0.5\nepsilon = 0.1\nd = 1\nt_max = 2\ndt = 0.5\nsweep = epsilon\nvalues = 0.1, 1\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let s = parse_config(MINIMAL).unwrap();
        assert_eq!(s.kind, ScenarioKind::EpsilonSweep);
        assert_eq!(s.base.j, 1.0);
        assert_eq!(s.base.boundary, Boundary::PeriodicSpin);
        assert_eq!(s.times(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(s.name, "epsilon-sweep");
    }

    #[test]
    fn misspelled_key_is_named() {
        let text = MINIMAL.replace("lambda_i = 1.5", "lamda_i = 1.5");
        match parse_config(&text) {
            Err(Error::UnknownKey { line, key }) => {
                assert_eq!(key, "lamda_i");
                assert_eq!(line, 3);
            }
            other => panic!("expected unknown key, got {other:?}"),
        }
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(parse_config("kind epsilon-sweep"), Err(Error::ConfigParse { line: 1, .. })));
        let twice = format!("{MINIMAL}n = 8\n");
        assert!(matches!(parse_config(&twice), Err(Error::ConfigParse { line: 11, .. })));
        assert!(matches!(parse_config("# only a comment\n"), Err(Error::ConfigValue { .. })));
    }

    #[test]
    fn bad_values() {
        for (from, to) in [
            ("n = 16", "n = sixteen"),
            ("n = 16", "n = 15"),
            ("d = 1", "d = 1.5"),
            ("dt = 0.5", "dt = -0.5"),
            ("values = 0.1, 1", "values = 0.1,,1"),
            ("sweep = epsilon", "sweep = lambda_i"),
            ("epsilon = 0.1", "epsilon = nan"),
        ] {
            let text = MINIMAL.replace(from, to);
            let err = parse_config(&text).unwrap_err();
            assert_eq!(err.class(), crate::ErrorClass::Validation, "{to}: {err}");
        }
    }

    #[test]
    fn ranges_expand_on_clean_values() {
        let v = parse_list("values", "0.05:0.5:0.05, 2").unwrap();
        assert_eq!(v.len(), 11);
        assert_eq!(v[2], 0.15);
        assert_eq!(v[9], 0.5);
        assert_eq!(v[10], 2.0);
        assert!(parse_list("values", "0:1:0.3").is_err());
        assert!(parse_list("values", "1:0:0.1").is_err());
        assert!(parse_list("values", "0:1").is_err());
    }

    #[test]
    fn swept_fields_may_be_omitted() {
        let text = MINIMAL.replace("epsilon = 0.1\n", "");
        assert_eq!(parse_config(&text).unwrap().base.epsilon, 0.1);
        let text = MINIMAL.replace("d = 1\n", "");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn time_sweep_is_the_time_grid() {
        let text = "kind = quench-protocol-grid\nn = 8\nlambda_i = 1\nlambda_f = 0.5\nepsilon = 0.1\nd = 1\nsweep = t\nvalues = 10, 20\n";
        let s = parse_config(text).unwrap();
        assert!(s.sweep.is_none());
        assert_eq!(s.times(), vec![10.0, 20.0]);
    }

    #[test]
    fn oracle_compare_defaults() {
        let s = parse_config("kind = oracle-compare\nn = 6\ncases = 3\nseed = 9\n").unwrap();
        assert_eq!((s.base.n, s.cases, s.seed), (6, 3, 9));
        assert_eq!(s.times().len(), 21);
        assert!(matches!(
            parse_config("kind = oracle-compare\nn = 12\n"),
            Err(Error::SizeGuard { .. })
        ));
    }

    #[test]
    fn resource_guard() {
        let text = MINIMAL.replace("n = 16", "n = 4096");
        assert!(matches!(parse_config(&text), Err(Error::SizeGuard { .. })));
    }
}
