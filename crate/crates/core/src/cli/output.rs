//! Deterministic text emitters: CSV with 17 significant digits, LF endings.

use super::CliError;

/// 17 significant digits; negative zero is printed as zero.
pub fn num(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[String]) -> Self {
        let mut c = Csv {
            text: String::new(),
        };
        c.row(header.to_vec());
        c
    }

    pub fn with(header: &[&str]) -> Self {
        Self::new(&header.iter().map(|s| s.to_string()).collect::<Vec<_>>())
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// `pos1..posd` header cells.
pub fn pos_header(d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("pos{i}")).collect()
}

/// Re-verify a probability column before it is written.
pub fn check_mass(weights: &[f64], mass: f64, what: &str) -> Result<(), CliError> {
    let total: f64 = weights.iter().sum();
    if (total - mass).abs() > 1e-8 || weights.iter().any(|w| *w < 0.0) {
        return Err(CliError::Invariant(format!(
            "{what} has mass {total}, expected {mass}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_format() {
        assert_eq!(num(1.0), "1.0000000000000000e0");
        assert_eq!(num(-0.0), "0.0000000000000000e0");
        assert_eq!(num(0.1), "1.0000000000000001e-1");
    }
}
