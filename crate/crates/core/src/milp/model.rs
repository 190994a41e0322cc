use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

pub type VarId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

/// Identity of a decision variable. Stop indices are direction-stops except
/// `d`, which is the physical destination; `c` indexes the (route, period)
/// combination set; `h` is a headway index with `0` meaning out of service.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarTag {
    /// Pattern arc.
    X { r: u32, t: u32, p: u32, i: u32, j: u32 },
    /// Pattern arc operated at headway `h`.
    XEta { r: u32, t: u32, p: u32, i: u32, j: u32, h: u32 },
    /// Pattern headway choice.
    Y { r: u32, t: u32, p: u32, h: u32 },
    /// Combination assigned to riders at `i` bound for `d`.
    Z { r: u32, t: u32, i: u32, d: u32, c: u32 },
    /// Entry flow.
    FOmega { r: u32, t: u32, d: u32, i: u32, c: u32 },
    /// Boarding flow.
    FAlpha { r: u32, t: u32, d: u32, i: u32, c: u32, p: u32 },
    /// Inter-stop flow.
    FLambda { r: u32, t: u32, d: u32, p: u32, i: u32, j: u32 },
    /// Exit flow; the destination is implied by `j`.
    FBeta { r: u32, t: u32, j: u32, p: u32 },
    /// Transfer flow: alight `p` at `i`, join combination `c` at `j`.
    FChi { r: u32, t: u32, d: u32, i: u32, j: u32, p: u32, c: u32 },
    /// Vehicles assigned to a route in a period.
    NFleet { r: u32, t: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarFamily {
    X,
    XEta,
    Y,
    Z,
    FOmega,
    FAlpha,
    FLambda,
    FBeta,
    FChi,
    NFleet,
}

impl VarFamily {
    pub const ALL: [VarFamily; 10] = [
        VarFamily::X,
        VarFamily::XEta,
        VarFamily::Y,
        VarFamily::Z,
        VarFamily::FOmega,
        VarFamily::FAlpha,
        VarFamily::FLambda,
        VarFamily::FBeta,
        VarFamily::FChi,
        VarFamily::NFleet,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VarFamily::X => "x",
            VarFamily::XEta => "x_eta",
            VarFamily::Y => "y",
            VarFamily::Z => "z",
            VarFamily::FOmega => "f_omega",
            VarFamily::FAlpha => "f_alpha",
            VarFamily::FLambda => "f_lambda",
            VarFamily::FBeta => "f_beta",
            VarFamily::FChi => "f_chi",
            VarFamily::NFleet => "n_fleet",
        }
    }
}

impl VarTag {
    pub fn family(&self) -> VarFamily {
        match self {
            VarTag::X { .. } => VarFamily::X,
            VarTag::XEta { .. } => VarFamily::XEta,
            VarTag::Y { .. } => VarFamily::Y,
            VarTag::Z { .. } => VarFamily::Z,
            VarTag::FOmega { .. } => VarFamily::FOmega,
            VarTag::FAlpha { .. } => VarFamily::FAlpha,
            VarTag::FLambda { .. } => VarFamily::FLambda,
            VarTag::FBeta { .. } => VarFamily::FBeta,
            VarTag::FChi { .. } => VarFamily::FChi,
            VarTag::NFleet { .. } => VarFamily::NFleet,
        }
    }

    pub fn route_period(&self) -> (usize, usize) {
        let (r, t) = match *self {
            VarTag::X { r, t, .. }
            | VarTag::XEta { r, t, .. }
            | VarTag::Y { r, t, .. }
            | VarTag::Z { r, t, .. }
            | VarTag::FOmega { r, t, .. }
            | VarTag::FAlpha { r, t, .. }
            | VarTag::FLambda { r, t, .. }
            | VarTag::FBeta { r, t, .. }
            | VarTag::FChi { r, t, .. }
            | VarTag::NFleet { r, t } => (r, t),
        };
        (r as usize, t as usize)
    }
}

/// Interchange-file name, e.g. `x_r0_t0_p1_i3_j5`.
impl fmt::Display for VarTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            VarTag::X { r, t, p, i, j } => write!(f, "x_r{r}_t{t}_p{p}_i{i}_j{j}"),
            VarTag::XEta { r, t, p, i, j, h } => write!(f, "xh_r{r}_t{t}_p{p}_i{i}_j{j}_h{h}"),
            VarTag::Y { r, t, p, h } => write!(f, "y_r{r}_t{t}_p{p}_h{h}"),
            VarTag::Z { r, t, i, d, c } => write!(f, "z_r{r}_t{t}_i{i}_d{d}_c{c}"),
            VarTag::FOmega { r, t, d, i, c } => write!(f, "fw_r{r}_t{t}_d{d}_i{i}_c{c}"),
            VarTag::FAlpha { r, t, d, i, c, p } => write!(f, "fa_r{r}_t{t}_d{d}_i{i}_c{c}_p{p}"),
            VarTag::FLambda { r, t, d, p, i, j } => write!(f, "fl_r{r}_t{t}_d{d}_p{p}_i{i}_j{j}"),
            VarTag::FBeta { r, t, j, p } => write!(f, "fb_r{r}_t{t}_j{j}_p{p}"),
            VarTag::FChi { r, t, d, i, j, p, c } => write!(f, "fx_r{r}_t{t}_d{d}_i{i}_j{j}_p{p}_c{c}"),
            VarTag::NFleet { r, t } => write!(f, "n_r{r}_t{t}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableRef {
    pub id: VarId,
    pub kind: VarKind,
    pub lo: f64,
    pub hi: f64,
    pub tag: VarTag,
}

impl VariableRef {
    pub fn is_integral(&self) -> bool {
        !matches!(self.kind, VarKind::Continuous)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

/// Constraint family a row was generated from. `SingleLoop` and `ServiceLink`
/// belong to the loop-forming (16) and pattern-alignment (22) groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Provenance {
    Eq15,
    Eq16,
    SingleLoop,
    Eq17,
    Eq18,
    Eq19,
    Eq20,
    Eq21,
    Eq22,
    ServiceLink,
    Eq23,
    Eq24,
    Eq26,
    Eq27,
    Eq28,
    Eq29,
    Eq30,
    Eq31,
    Eq32,
    Eq33,
    Eq34,
    Eq35,
    Eq36,
}

impl Provenance {
    pub fn equation(self) -> u8 {
        match self {
            Provenance::Eq15 => 15,
            Provenance::Eq16 | Provenance::SingleLoop => 16,
            Provenance::Eq17 => 17,
            Provenance::Eq18 => 18,
            Provenance::Eq19 => 19,
            Provenance::Eq20 => 20,
            Provenance::Eq21 => 21,
            Provenance::Eq22 | Provenance::ServiceLink => 22,
            Provenance::Eq23 => 23,
            Provenance::Eq24 => 24,
            Provenance::Eq26 => 26,
            Provenance::Eq27 => 27,
            Provenance::Eq28 => 28,
            Provenance::Eq29 => 29,
            Provenance::Eq30 => 30,
            Provenance::Eq31 => 31,
            Provenance::Eq32 => 32,
            Provenance::Eq33 => 33,
            Provenance::Eq34 => 34,
            Provenance::Eq35 => 35,
            Provenance::Eq36 => 36,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Provenance::Eq15 => "e15",
            Provenance::Eq16 => "e16",
            Provenance::SingleLoop => "e16b",
            Provenance::Eq17 => "e17",
            Provenance::Eq18 => "e18",
            Provenance::Eq19 => "e19",
            Provenance::Eq20 => "e20",
            Provenance::Eq21 => "e21",
            Provenance::Eq22 => "e22",
            Provenance::ServiceLink => "e22b",
            Provenance::Eq23 => "e23",
            Provenance::Eq24 => "e24",
            Provenance::Eq26 => "e26",
            Provenance::Eq27 => "e27",
            Provenance::Eq28 => "e28",
            Provenance::Eq29 => "e29",
            Provenance::Eq30 => "e30",
            Provenance::Eq31 => "e31",
            Provenance::Eq32 => "e32",
            Provenance::Eq33 => "e33",
            Provenance::Eq34 => "e34",
            Provenance::Eq35 => "e35",
            Provenance::Eq36 => "e36",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub coefs: Vec<(VarId, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
    pub provenance: Provenance,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coefs.iter().map(|&(v, a)| a * x[v]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.sense {
            RowSense::Le => (lhs - self.rhs).max(0.0),
            RowSense::Ge => (self.rhs - lhs).max(0.0),
            RowSense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Sparse minimisation MILP.
#[derive(Debug, Clone, Default)]
pub struct MilpModel {
    pub variables: Vec<VariableRef>,
    pub objective: Vec<(VarId, f64)>,
    pub rows: Vec<Row>,
    tags: HashMap<VarTag, VarId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelStats {
    pub variables: usize,
    pub binary_variables: usize,
    pub integer_variables: usize,
    pub continuous_variables: usize,
    pub constraints: usize,
    pub nonzeros: usize,
    pub variables_by_family: BTreeMap<String, usize>,
    pub constraints_by_equation: BTreeMap<String, usize>,
}

impl MilpModel {
    pub fn add_var(&mut self, tag: VarTag, kind: VarKind, lo: f64, hi: f64, cost: f64) -> VarId {
        let id = self.variables.len();
        self.variables.push(VariableRef { id, kind, lo, hi, tag });
        let previous = self.tags.insert(tag, id);
        debug_assert!(previous.is_none(), "duplicate variable {tag}");
        if cost != 0.0 {
            self.objective.push((id, cost));
        }
        id
    }

    pub fn add_row(
        &mut self,
        provenance: Provenance,
        name: String,
        coefs: Vec<(VarId, f64)>,
        sense: RowSense,
        rhs: f64,
    ) {
        debug_assert!(coefs.iter().all(|&(v, _)| v < self.variables.len()));
        self.rows.push(Row {
            name,
            coefs,
            sense,
            rhs,
            provenance,
        });
    }

    pub fn var(&self, tag: &VarTag) -> Option<VarId> {
        self.tags.get(tag).copied()
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * x[v]).sum()
    }

    /// Largest row or bound violation of an assignment.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|r| r.violation(x)).fold(0.0, f64::max);
        let bounds = self
            .variables
            .iter()
            .map(|v| (v.lo - x[v.id]).max(x[v.id] - v.hi).max(0.0))
            .fold(0.0, f64::max);
        rows.max(bounds)
    }

    pub fn stats(&self) -> ModelStats {
        let mut stats = ModelStats {
            variables: self.variables.len(),
            constraints: self.rows.len(),
            ..ModelStats::default()
        };
        for family in VarFamily::ALL {
            stats.variables_by_family.insert(family.as_str().to_string(), 0);
        }
        for v in &self.variables {
            match v.kind {
                VarKind::Binary => stats.binary_variables += 1,
                VarKind::Integer => stats.integer_variables += 1,
                VarKind::Continuous => stats.continuous_variables += 1,
            }
            *stats
                .variables_by_family
                .get_mut(v.tag.family().as_str())
                .expect("every family is pre-seeded") += 1;
        }
        for row in &self.rows {
            stats.nonzeros += row.coefs.len();
            *stats
                .constraints_by_equation
                .entry(format!("eq{}", row.provenance.equation()))
                .or_insert(0) += 1;
        }
        stats
    }
}
