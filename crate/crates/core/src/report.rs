use serde::{Deserialize, Serialize};

/// Outcome of a sampled property check. `pass` holds exactly when
/// `worst_violation <= tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: String,
    pub subject: String,
    pub sample_count: usize,
    pub worst_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl PropertyReport {
    pub fn new(
        property: impl Into<String>,
        subject: impl Into<String>,
        sample_count: usize,
        worst_violation: f64,
        tolerance: f64,
    ) -> Self {
        Self {
            property: property.into(),
            subject: subject.into(),
            sample_count,
            worst_violation,
            tolerance,
            pass: worst_violation <= tolerance,
            note: None,
        }
    }

    /// A check that could not be run; it passes vacuously with a note.
    pub fn skipped(property: impl Into<String>, subject: impl Into<String>, why: impl Into<String>) -> Self {
        let mut r = Self::new(property, subject, 0, 0.0, 0.0);
        r.note = Some(format!("skipped: {}", why.into()));
        r
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Combines reports of the same property, keeping the worst violation.
    /// The tolerance of the result is the smallest slack among the parts,
    /// so `pass` is the conjunction.
    pub fn merge(property: impl Into<String>, subject: impl Into<String>, parts: &[PropertyReport]) -> Self {
        let count = parts.iter().map(|r| r.sample_count).sum();
        let pass = parts.iter().all(|r| r.pass);
        let worst = parts.iter().map(|r| r.worst_violation - r.tolerance).fold(f64::NEG_INFINITY, f64::max);
        let worst_abs = parts.iter().map(|r| r.worst_violation).fold(0.0, f64::max);
        let mut r = Self::new(property, subject, count, worst_abs, 0.0);
        r.tolerance = if parts.is_empty() { 0.0 } else { worst_abs - worst };
        r.pass = pass;
        let notes: Vec<String> = parts.iter().filter_map(|p| p.note.clone()).collect();
        if !notes.is_empty() {
            r.note = Some(notes.join("; "));
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_within_tolerance() {
        assert!(PropertyReport::new("x", "s", 1, 1e-10, 1e-9).pass);
        assert!(!PropertyReport::new("x", "s", 1, 1e-8, 1e-9).pass);
        assert!(PropertyReport::skipped("x", "s", "n/a").pass);
    }

    #[test]
    fn merge_is_conjunction() {
        let a = PropertyReport::new("x", "s", 3, 1e-10, 1e-9);
        let b = PropertyReport::new("x", "s", 2, 0.5, 0.1);
        let m = PropertyReport::merge("x", "s", &[a.clone(), b]);
        assert!(!m.pass);
        assert_eq!(m.sample_count, 5);
        assert!(PropertyReport::merge("x", "s", &[a.clone(), a]).pass);
    }
}
