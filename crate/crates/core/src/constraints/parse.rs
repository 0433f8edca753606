//! Line-oriented constraint spec format.
//!
//! ```text
//! # comment
//! label <id> <name>          (optional; the WHS table is used when absent)
//! connectivity <6|18|26>
//! background_in_y <true|false>
//! contain <inner> <outer>
//! exclude <a> <b>
//! ```

use super::{Constraint, ConstraintSpec};
use crate::error::{Error, Result};
use crate::morph::Connectivity;
use crate::volume::LabelTable;

enum Relation<'a> {
    Contain(&'a str, &'a str),
    Exclude(&'a str, &'a str),
}

pub(super) fn parse_spec(text: &str) -> Result<ConstraintSpec> {
    let mut labels = Vec::new();
    let mut relations = Vec::new();
    let mut connectivity = None;
    let mut background = None;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| Error::SpecParse {
            line: line_no,
            message,
        };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let args = &tokens[1..];
        let expect = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(err(format!(
                    "`{}` takes {n} argument(s), got {}",
                    tokens[0],
                    args.len()
                )))
            }
        };
        match tokens[0] {
            "label" => {
                expect(2)?;
                let id: u32 = args[0]
                    .parse()
                    .map_err(|_| err(format!("invalid label id `{}`", args[0])))?;
                labels.push((id, args[1].to_string()));
            }
            "connectivity" => {
                expect(1)?;
                let conn = args[0]
                    .parse()
                    .ok()
                    .and_then(Connectivity::from_count)
                    .ok_or_else(|| err(format!("connectivity must be 6, 18 or 26, got `{}`", args[0])))?;
                if connectivity.replace(conn).is_some() {
                    return Err(err("connectivity given twice".into()));
                }
            }
            "background_in_y" => {
                expect(1)?;
                let flag = match args[0] {
                    "true" => true,
                    "false" => false,
                    other => return Err(err(format!("expected true or false, got `{other}`"))),
                };
                if background.replace(flag).is_some() {
                    return Err(err("background_in_y given twice".into()));
                }
            }
            "contain" => {
                expect(2)?;
                relations.push((line_no, Relation::Contain(args[0], args[1])));
            }
            "exclude" => {
                expect(2)?;
                relations.push((line_no, Relation::Exclude(args[0], args[1])));
            }
            other => return Err(err(format!("unknown directive `{other}`"))),
        }
    }

    let table = if labels.is_empty() {
        LabelTable::whs()
    } else {
        LabelTable::from_pairs(&labels).map_err(|e| Error::SpecParse {
            line: 0,
            message: e.to_string(),
        })?
    };
    let mut spec = ConstraintSpec::new(table);
    if let Some(conn) = connectivity {
        spec.set_connectivity(conn);
    }
    if let Some(flag) = background {
        spec.set_background_in_y(flag);
    }
    for (line, rel) in relations {
        let wrap = |e: Error| Error::SpecParse {
            line,
            message: e.to_string(),
        };
        let c = match rel {
            Relation::Contain(a, b) => Constraint::contain(
                spec.table().resolve(a).map_err(wrap)?,
                spec.table().resolve(b).map_err(wrap)?,
            ),
            Relation::Exclude(a, b) => Constraint::exclude(
                spec.table().resolve(a).map_err(wrap)?,
                spec.table().resolve(b).map_err(wrap)?,
            ),
        };
        spec.push(c).map_err(wrap)?;
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::ConstraintKind;

    #[test]
    fn defaults_to_whs_table() {
        let spec = parse_spec("# whs\ncontain LV Myo\nexclude AO RA\n").unwrap();
        assert_eq!(spec.table(), &LabelTable::whs());
        assert_eq!(spec.constraints().len(), 2);
        assert_eq!(spec.connectivity(), Connectivity::Vertex26);
        assert!(spec.include_background_in_y());
        assert_eq!(spec.constraints()[1].kind, ConstraintKind::Exclude);
        assert_eq!(spec, ConstraintSpec::whs());
    }

    #[test]
    fn custom_table_and_settings() {
        let text = "label 2 beta\nlabel 0 bg\nlabel 1 alpha\nconnectivity 6\nbackground_in_y false\ncontain alpha beta\n";
        let spec = parse_spec(text).unwrap();
        assert_eq!(spec.table().len(), 3);
        assert_eq!(spec.table().name(2), Some("beta"));
        assert_eq!(spec.connectivity(), Connectivity::Face6);
        assert!(!spec.include_background_in_y());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("frobnicate LV\n", 1),
            ("\n\nconnectivity 8\n", 3),
            ("contain LV\n", 1),
            ("# c\ncontain LV Heart\n", 2),
            ("exclude RA RA\n", 1),
            ("exclude RA AO\nexclude AO RA\n", 2),
            ("background_in_y maybe\n", 1),
        ];
        for (text, line) in cases {
            match parse_spec(text) {
                Err(Error::SpecParse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn empty_spec_has_no_constraints() {
        let spec = parse_spec("").unwrap();
        assert!(spec.constraints().is_empty());
    }
}
