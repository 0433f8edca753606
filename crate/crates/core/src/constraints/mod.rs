//! Containment and exclusion constraints between label classes, and the
//! detection of voxels that violate them.
//!
//! Every constraint is first rewritten as a pair of label sets `(X, Y)` that
//! must never occupy adjacent voxels. The key-voxel mask is then
//! `(dilate(X) ∧ Y) ∨ (dilate(Y) ∧ X)`, unioned over all constraints.

mod keyvox;
mod parse;
mod report;

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::morph::Connectivity;
use crate::volume::{LabelId, LabelTable};

pub use keyvox::{brute_force_key_voxels, key_voxels, key_voxels_one};
pub use report::{validate, validate_with, BoundingBox, ConstraintViolations, ViolationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    /// `subject` is enclosed by `object`: it may touch nothing else.
    Contain,
    /// `subject` and `object` may never be adjacent.
    Exclude,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub subject: LabelId,
    pub object: LabelId,
}

impl Constraint {
    /// `inner` is enclosed by `outer`.
    pub fn contain(inner: LabelId, outer: LabelId) -> Self {
        Self {
            kind: ConstraintKind::Contain,
            subject: inner,
            object: outer,
        }
    }

    /// `a` and `b` never touch; stored with the smaller id first.
    pub fn exclude(a: LabelId, b: LabelId) -> Self {
        Self {
            kind: ConstraintKind::Exclude,
            subject: a.min(b),
            object: a.max(b),
        }
    }

    fn normalized(self) -> Self {
        match self.kind {
            ConstraintKind::Contain => self,
            ConstraintKind::Exclude => Self::exclude(self.subject, self.object),
        }
    }

    fn check(&self, table: &LabelTable) -> Result<()> {
        for id in [self.subject, self.object] {
            if id as usize >= table.len() {
                return Err(Error::UnknownLabel(id as u32));
            }
            if id == 0 {
                return Err(Error::InvalidConstraint(format!(
                    "background cannot appear in a constraint ({})",
                    self.display(table)
                )));
            }
        }
        if self.subject == self.object {
            return Err(Error::InvalidConstraint(format!(
                "label {} is paired with itself",
                self.subject
            )));
        }
        Ok(())
    }

    /// Text form, e.g. `contain LV Myo`.
    pub fn display<'a>(&'a self, table: &'a LabelTable) -> impl fmt::Display + 'a {
        DisplayConstraint { c: self, table }
    }
}

struct DisplayConstraint<'a> {
    c: &'a Constraint,
    table: &'a LabelTable,
}

impl fmt::Display for DisplayConstraint<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kw = match self.c.kind {
            ConstraintKind::Contain => "contain",
            ConstraintKind::Exclude => "exclude",
        };
        let name = |id: LabelId| {
            self.table
                .name(id)
                .map(str::to_string)
                .unwrap_or_else(|| id.to_string())
        };
        write!(f, "{kw} {} {}", name(self.c.subject), name(self.c.object))
    }
}

/// Disjoint label sets that must never be adjacent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XYPair {
    x: Vec<LabelId>,
    y: Vec<LabelId>,
}

impl XYPair {
    pub fn new(mut x: Vec<LabelId>, mut y: Vec<LabelId>) -> Result<Self> {
        x.sort_unstable();
        x.dedup();
        y.sort_unstable();
        y.dedup();
        if x.is_empty() || y.is_empty() {
            return Err(Error::InvalidConstraint("X and Y must be non-empty".into()));
        }
        if x.iter().any(|l| y.contains(l)) {
            return Err(Error::InvalidConstraint("X and Y must be disjoint".into()));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &[LabelId] {
        &self.x
    }

    pub fn y(&self) -> &[LabelId] {
        &self.y
    }
}

/// Rewrites a constraint as a forbidden adjacency between two label sets.
///
/// `exclude a b` gives `X = {a}, Y = {b}`. `contain a b` gives `X = {a}` and
/// `Y` = every label except `a` and `b`, background included iff
/// `include_bg`.
pub fn reduce_to_xy(c: &Constraint, table: &LabelTable, include_bg: bool) -> Result<XYPair> {
    c.check(table)?;
    let y = match c.kind {
        ConstraintKind::Exclude => vec![c.object],
        ConstraintKind::Contain => table
            .iter()
            .map(|(id, _)| id)
            .filter(|&id| id != c.subject && id != c.object && (include_bg || id != 0))
            .collect(),
    };
    XYPair::new(vec![c.subject], y)
}

/// A validated set of constraints over a label table.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSpec {
    table: LabelTable,
    constraints: Vec<Constraint>,
    connectivity: Connectivity,
    include_background_in_y: bool,
}

impl ConstraintSpec {
    pub fn new(table: LabelTable) -> Self {
        Self {
            table,
            constraints: Vec::new(),
            connectivity: Connectivity::default(),
            include_background_in_y: true,
        }
    }

    /// The two relations stated for whole-heart segmentation:
    /// `contain LV Myo` and `exclude RA AO`, 26-connectivity.
    pub fn whs() -> Self {
        let table = LabelTable::whs();
        let id = |n: &str| table.id(n).expect("WHS label");
        let (lv, myo, ra, ao) = (id("LV"), id("Myo"), id("RA"), id("AO"));
        let mut spec = Self::new(table);
        spec.push(Constraint::contain(lv, myo)).expect("valid");
        spec.push(Constraint::exclude(ra, ao)).expect("valid");
        spec
    }

    pub fn with_connectivity(mut self, conn: Connectivity) -> Self {
        self.connectivity = conn;
        self
    }

    pub fn with_background_in_y(mut self, include: bool) -> Self {
        self.include_background_in_y = include;
        self
    }

    pub fn set_connectivity(&mut self, conn: Connectivity) {
        self.connectivity = conn;
    }

    pub fn set_background_in_y(&mut self, include: bool) {
        self.include_background_in_y = include;
    }

    /// Adds a constraint, normalizing exclusions; duplicates are rejected.
    pub fn push(&mut self, c: Constraint) -> Result<()> {
        c.check(&self.table)?;
        let c = c.normalized();
        if self.constraints.contains(&c) {
            return Err(Error::DuplicateConstraint(c.display(&self.table).to_string()));
        }
        self.constraints.push(c);
        Ok(())
    }

    pub fn table(&self) -> &LabelTable {
        &self.table
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn connectivity(&self) -> Connectivity {
        self.connectivity
    }

    pub fn include_background_in_y(&self) -> bool {
        self.include_background_in_y
    }

    /// X/Y pairs of every constraint, in declaration order.
    pub fn xy_pairs(&self) -> Result<Vec<XYPair>> {
        self.constraints
            .iter()
            .map(|c| reduce_to_xy(c, &self.table, self.include_background_in_y))
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse::parse_spec(text)
    }

    /// Text form accepted by [`ConstraintSpec::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, name) in self.table.iter() {
            out.push_str(&format!("label {id} {name}\n"));
        }
        out.push_str(&format!("connectivity {}\n", self.connectivity.count()));
        out.push_str(&format!("background_in_y {}\n", self.include_background_in_y));
        for c in &self.constraints {
            out.push_str(&format!("{}\n", c.display(&self.table)));
        }
        out
    }
}

impl Default for ConstraintSpec {
    fn default() -> Self {
        Self::whs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn whs(name: &str) -> LabelId {
        LabelTable::whs().id(name).unwrap()
    }

    #[test]
    fn exclude_reduces_to_pair() {
        let t = LabelTable::whs();
        let xy = reduce_to_xy(&Constraint::exclude(whs("RA"), whs("AO")), &t, true).unwrap();
        // normalized order puts the smaller id in X
        assert_eq!(xy.x(), &[whs("RA")]);
        assert_eq!(xy.y(), &[whs("AO")]);
    }

    #[test]
    fn contain_reduces_to_everything_else() {
        let t = LabelTable::whs();
        let c = Constraint::contain(whs("LV"), whs("Myo"));
        let xy = reduce_to_xy(&c, &t, true).unwrap();
        assert_eq!(xy.x(), &[whs("LV")]);
        let names: Vec<&str> = xy.y().iter().map(|&i| t.name(i).unwrap()).collect();
        assert_eq!(names, ["BG", "RV", "LA", "RA", "AO", "PA"]);
        let xy = reduce_to_xy(&c, &t, false).unwrap();
        assert!(!xy.y().contains(&0));
    }

    #[test]
    fn contain_in_three_label_table() {
        let t = LabelTable::new(["BG", "a", "b"]).unwrap();
        let xy = reduce_to_xy(&Constraint::contain(1, 2), &t, true).unwrap();
        assert_eq!(xy.y(), &[0]);
        // nothing left for Y without background
        assert!(reduce_to_xy(&Constraint::contain(1, 2), &t, false).is_err());
    }

    #[test]
    fn invalid_constraints() {
        let t = LabelTable::whs();
        assert!(reduce_to_xy(&Constraint::contain(2, 2), &t, true).is_err());
        assert!(reduce_to_xy(&Constraint::contain(2, 9), &t, true).is_err());
        assert!(reduce_to_xy(&Constraint::exclude(0, 3), &t, true).is_err());
    }

    #[test]
    fn exclusion_is_symmetric_and_deduplicated() {
        let mut spec = ConstraintSpec::new(LabelTable::whs());
        spec.push(Constraint::exclude(6, 5)).unwrap();
        assert_eq!(spec.constraints()[0], Constraint::exclude(5, 6));
        assert!(matches!(
            spec.push(Constraint::exclude(5, 6)),
            Err(Error::DuplicateConstraint(_))
        ));
    }

    #[test]
    fn text_round_trip() {
        let spec = ConstraintSpec::whs().with_connectivity(Connectivity::Edge18);
        assert_eq!(ConstraintSpec::parse(&spec.to_text()).unwrap(), spec);
    }
}
