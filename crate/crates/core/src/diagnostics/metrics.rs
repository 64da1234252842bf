//! Three-class confusion matrix and precision / recall / F1.

use super::{Class, DiagnosticsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    /// `counts[truth][predicted]`, indexed by [`Class::index`].
    pub counts: [[u64; 3]; 3],
}

fn safe_div(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn precision(&self, c: Class) -> f64 {
        let j = c.index();
        let col: u64 = (0..3).map(|i| self.counts[i][j]).sum();
        safe_div(self.counts[j][j] as f64, col as f64)
    }

    pub fn recall(&self, c: Class) -> f64 {
        let i = c.index();
        let row: u64 = self.counts[i].iter().sum();
        safe_div(self.counts[i][i] as f64, row as f64)
    }

    pub fn f1(&self, c: Class) -> f64 {
        let (p, r) = (self.precision(c), self.recall(c));
        safe_div(2.0 * p * r, p + r)
    }

    pub fn support(&self, c: Class) -> u64 {
        self.counts[c.index()].iter().sum()
    }

    pub fn macro_precision(&self) -> f64 {
        Class::ALL.iter().map(|&c| self.precision(c)).sum::<f64>() / 3.0
    }

    pub fn macro_recall(&self) -> f64 {
        Class::ALL.iter().map(|&c| self.recall(c)).sum::<f64>() / 3.0
    }

    pub fn macro_f1(&self) -> f64 {
        Class::ALL.iter().map(|&c| self.f1(c)).sum::<f64>() / 3.0
    }

    /// Pump faults called system faults plus the reverse.
    pub fn cross_fault_confusions(&self) -> u64 {
        let (p, s) = (Class::PumpFault.index(), Class::SystemFault.index());
        self.counts[p][s] + self.counts[s][p]
    }
}

pub fn classification_metrics(predicted: &[Class], truth: &[Class]) -> Result<ConfusionMatrix, DiagnosticsError> {
    if predicted.len() != truth.len() {
        return Err(DiagnosticsError::LengthMismatch { left: predicted.len(), right: truth.len() });
    }
    let mut m = ConfusionMatrix::default();
    for (p, t) in predicted.iter().zip(truth) {
        m.counts[t.index()][p.index()] += 1;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect() {
        let truth = [Class::Normal, Class::PumpFault, Class::SystemFault, Class::Normal];
        let m = classification_metrics(&truth, &truth).unwrap();
        assert_eq!(m.macro_precision(), 1.0);
        assert_eq!(m.macro_recall(), 1.0);
        assert_eq!(m.macro_f1(), 1.0);
    }

    #[test]
    fn all_normal_predictions() {
        let truth = [Class::Normal, Class::PumpFault, Class::SystemFault];
        let m = classification_metrics(&[Class::Normal; 3], &truth).unwrap();
        assert_eq!(m.recall(Class::PumpFault), 0.0);
        assert_eq!(m.recall(Class::SystemFault), 0.0);
        assert_eq!(m.precision(Class::PumpFault), 0.0);
        assert!((m.precision(Class::Normal) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn hand_counted() {
        let truth = [Class::Normal, Class::Normal, Class::PumpFault, Class::PumpFault, Class::SystemFault];
        let pred = [Class::Normal, Class::PumpFault, Class::PumpFault, Class::SystemFault, Class::SystemFault];
        let m = classification_metrics(&pred, &truth).unwrap();
        assert_eq!(m.precision(Class::PumpFault), 0.5);
        assert_eq!(m.recall(Class::PumpFault), 0.5);
        assert_eq!(m.precision(Class::SystemFault), 0.5);
        assert_eq!(m.recall(Class::SystemFault), 1.0);
        assert!((m.f1(Class::SystemFault) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.cross_fault_confusions(), 1);
    }

    #[test]
    fn length_mismatch() {
        assert!(classification_metrics(&[Class::Normal], &[]).is_err());
    }
}
