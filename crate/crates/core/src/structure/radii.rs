use std::collections::BTreeMap;

/// Radius used for elements missing from the table, Å.
pub const DEFAULT_RADIUS: f64 = 1.70;

/// Bondi (1964) van der Waals radii, Å.
const BONDI: &[(&str, f64)] = &[
    ("H", 1.20),
    ("He", 1.40),
    ("Li", 1.82),
    ("C", 1.70),
    ("N", 1.55),
    ("O", 1.52),
    ("F", 1.47),
    ("Ne", 1.54),
    ("Na", 2.27),
    ("Mg", 1.73),
    ("Si", 2.10),
    ("P", 1.80),
    ("S", 1.80),
    ("Cl", 1.75),
    ("Ar", 1.88),
    ("K", 2.75),
    ("Ni", 1.63),
    ("Cu", 1.40),
    ("Zn", 1.39),
    ("Ga", 1.87),
    ("As", 1.85),
    ("Se", 1.90),
    ("Br", 1.85),
    ("Kr", 2.02),
    ("Pd", 1.63),
    ("Ag", 1.72),
    ("Cd", 1.58),
    ("In", 1.93),
    ("Sn", 2.17),
    ("Te", 2.06),
    ("I", 1.98),
    ("Xe", 2.16),
    ("Pt", 1.72),
    ("Au", 1.66),
    ("Hg", 1.55),
    ("Tl", 1.96),
    ("Pb", 2.02),
    ("U", 1.86),
];

/// Element symbol → van der Waals radius lookup with a fallback radius.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusTable {
    radii: BTreeMap<String, f64>,
    default: f64,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum RadiusTableError {
    #[error("radius for {0:?} must be positive and finite")]
    NonPositive(String),
    #[error("radius table is missing required element {0}")]
    MissingElement(&'static str),
}

impl RadiusTable {
    pub fn bondi() -> Self {
        RadiusTable {
            radii: BONDI.iter().map(|&(e, r)| (e.to_string(), r)).collect(),
            default: DEFAULT_RADIUS,
        }
    }

    /// Builds a custom table. It must cover H, C, N, O, S and P.
    pub fn new<I, S>(entries: I, default: f64) -> Result<Self, RadiusTableError>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        if !(default > 0.0 && default.is_finite()) {
            return Err(RadiusTableError::NonPositive("<default>".into()));
        }
        let mut radii = BTreeMap::new();
        for (sym, r) in entries {
            let sym = normalize_symbol(sym.as_ref());
            if !(r > 0.0 && r.is_finite()) {
                return Err(RadiusTableError::NonPositive(sym));
            }
            radii.insert(sym, r);
        }
        for required in ["H", "C", "N", "O", "S", "P"] {
            if !radii.contains_key(required) {
                return Err(RadiusTableError::MissingElement(required));
            }
        }
        Ok(RadiusTable { radii, default })
    }

    pub fn default_radius(&self) -> f64 {
        self.default
    }

    pub fn get(&self, element: &str) -> Option<f64> {
        self.radii.get(&normalize_symbol(element)).copied()
    }

    pub fn max_radius(&self) -> f64 {
        self.radii.values().copied().fold(self.default, f64::max)
    }
}

impl Default for RadiusTable {
    fn default() -> Self {
        Self::bondi()
    }
}

/// Van der Waals radius of `element`; unknown symbols get the table default
/// and a warning on the `log` channel.
pub fn vdw_radius(element: &str, table: &RadiusTable) -> f64 {
    match table.get(element) {
        Some(r) => r,
        None => {
            log::warn!(
                "no van der Waals radius for element {element:?}; using default {} Å",
                table.default
            );
            table.default
        }
    }
}

/// Canonical capitalization: first letter upper, rest lower ("CL" → "Cl").
pub fn normalize_symbol(s: &str) -> String {
    let s = s.trim();
    let mut out = String::with_capacity(s.len());
    for (i, c) in s.chars().enumerate() {
        if i == 0 {
            out.extend(c.to_uppercase());
        } else {
            out.extend(c.to_lowercase());
        }
    }
    out
}
