//! Grid data given on the command line: an expression in one variable, an
//! inline `[v0, v1, …]` list, or the path of a `node,value` CSV file.

use std::path::Path;

use solmap_core::{Expression, GridFn1D};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Expression(String),
    List(Vec<f64>),
    File(String),
}

/// Parses `[a, b, c]`. Whitespace is allowed anywhere; an empty list is
/// rejected.
pub fn parse_list(text: &str) -> Result<Vec<f64>, CliError> {
    let inner = text
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| CliError::Usage(format!("list must be enclosed in brackets: `{text}`")))?;
    if inner.trim().is_empty() {
        return Err(CliError::Usage("empty data list".into()));
    }
    inner
        .split(',')
        .map(|item| {
            let t = item.trim().replace('\u{2212}', "-");
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Usage(format!("bad list entry `{}`", item.trim())))
        })
        .collect()
}

impl DataSource {
    pub fn parse(text: &str) -> Result<DataSource, CliError> {
        let t = text.trim();
        if t.starts_with('[') {
            return Ok(DataSource::List(parse_list(t)?));
        }
        if t.to_ascii_lowercase().ends_with(".csv") || Path::new(t).is_file() {
            return Ok(DataSource::File(t.to_string()));
        }
        Ok(DataSource::Expression(t.to_string()))
    }

    /// Samples onto `n + 1` uniform nodes of `[a, b]`. Expressions use
    /// `var`. Lists of `n + 1` values are taken as they are; with
    /// `periodic`, a list of `n` values is closed by repeating the first.
    /// Files must already live on the requested grid.
    pub fn sample(
        &self,
        var: &str,
        a: f64,
        b: f64,
        n: usize,
        periodic: bool,
    ) -> Result<GridFn1D, CliError> {
        match self {
            DataSource::Expression(text) => {
                let e = Expression::parse(text, &[var])?;
                let h = (b - a) / n as f64;
                let values = (0..=n)
                    .map(|i| {
                        let x = if i == n { b } else { a + i as f64 * h };
                        e.eval(&[x])
                            .map_err(|err| CliError::Domain(format!("{var}={x}: {err}")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(GridFn1D::new(a, b, values)?)
            }
            DataSource::List(v) => {
                let mut v = v.clone();
                if periodic && v.len() == n {
                    v.push(v[0]);
                }
                if v.len() != n + 1 {
                    return Err(CliError::Usage(format!(
                        "data list has {} values, the grid has {} nodes",
                        v.len(),
                        n + 1
                    )));
                }
                Ok(GridFn1D::new(a, b, v)?)
            }
            DataSource::File(path) => {
                let f = std::fs::File::open(path)
                    .map_err(|e| CliError::Usage(format!("cannot open data file `{path}`: {e}")))?;
                let g = GridFn1D::read_csv(std::io::BufReader::new(f))?;
                if g.n() != n || (g.a() - a).abs() > 1e-12 || (g.b() - b).abs() > 1e-12 {
                    return Err(CliError::Usage(format!(
                        "data file `{path}` lives on [{}, {}] with {} cells, expected [{a}, {b}] with {n}",
                        g.a(),
                        g.b(),
                        g.n()
                    )));
                }
                Ok(g)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_parsing() {
        assert_eq!(parse_list("[1, -2.5,3e1]").unwrap(), vec![1.0, -2.5, 30.0]);
        assert_eq!(parse_list(" [ \u{2212}1 ] ").unwrap(), vec![-1.0]);
        for bad in ["[]", "1,2", "[1,,2]", "[nan]", "[1"] {
            assert!(parse_list(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn source_kinds() {
        assert_eq!(
            DataSource::parse("[0, 1]").unwrap(),
            DataSource::List(vec![0.0, 1.0])
        );
        assert_eq!(
            DataSource::parse("y0.csv").unwrap(),
            DataSource::File("y0.csv".into())
        );
        assert_eq!(
            DataSource::parse("0.5").unwrap(),
            DataSource::Expression("0.5".into())
        );
    }

    #[test]
    fn sampling() {
        let g = DataSource::parse("2*eta")
            .unwrap()
            .sample("eta", 0.0, 1.0, 4, false)
            .unwrap();
        assert_eq!(g.values(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
        let l = DataSource::parse("[1,2,3]").unwrap();
        assert_eq!(
            l.sample("eta", 0.0, 1.0, 3, true).unwrap().values(),
            &[1.0, 2.0, 3.0, 1.0]
        );
        assert!(l.sample("eta", 0.0, 1.0, 3, false).is_err());
        let d = DataSource::parse("log(eta - 2)").unwrap();
        assert!(matches!(
            d.sample("eta", 0.0, 1.0, 4, false),
            Err(CliError::Domain(_))
        ));
        assert!(matches!(
            DataSource::parse("x")
                .unwrap()
                .sample("eta", 0.0, 1.0, 4, false),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let g = GridFn1D::from_fn(0.0, 1.0, 8, |x| x * x).unwrap();
        g.write_csv(std::fs::File::create(&path).unwrap()).unwrap();
        let source = DataSource::parse(path.to_str().unwrap()).unwrap();
        assert_eq!(source.sample("eta", 0.0, 1.0, 8, false).unwrap(), g);
        assert!(source.sample("eta", 0.0, 1.0, 16, false).is_err());
    }
}
