use crate::error::{ensure, Result};

/// Fixed self-similar sampling radius `C`.
///
/// In self-similar space the window is the ball `|xi| <= C` (a disk in 2D, an
/// interval in 1D). Its physical image at time `t` is the expanding ball
/// `|x| <= C * sqrt(t + 1)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Window {
    radius: f64,
}

impl Window {
    pub fn new(radius: f64) -> Result<Self> {
        ensure!(radius.is_finite() && radius > 0.0, "window radius must be > 0, got {radius}");
        Ok(Self { radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn physical_radius(&self, t: f64) -> f64 {
        self.radius * (t + 1.0).sqrt()
    }

    pub fn contains_ssv(&self, xi: &[f64]) -> bool {
        norm(xi) <= self.radius
    }

    pub fn contains_phys(&self, x: &[f64], t: f64) -> bool {
        norm(x) <= self.physical_radius(t)
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_geometry() {
        assert!(Window::new(0.0).is_err());
        let w = Window::new(5.0).unwrap();
        assert_eq!(w.physical_radius(3.0), 10.0);
        assert!(w.contains_ssv(&[3.0, 4.0]));
        assert!(!w.contains_ssv(&[3.0, 4.1]));
        assert!(w.contains_phys(&[6.0, 8.0], 3.0));
    }
}
