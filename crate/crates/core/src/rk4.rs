/// Classical fixed-step fourth-order Runge-Kutta with reusable stage buffers.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    probe: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Rk4 {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            probe: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.k1.len()
    }

    /// Advances `y` from `t` to `t + dt` in place. `rhs(t, y, dy)` writes the
    /// derivative into `dy`; it is called four times per step.
    pub fn step<F>(&mut self, mut rhs: F, t: f64, y: &mut [f64], dt: f64)
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        debug_assert_eq!(y.len(), self.dim());
        let half = 0.5 * dt;

        rhs(t, y, &mut self.k1);
        for ((p, y), k) in self.probe.iter_mut().zip(y.iter()).zip(&self.k1) {
            *p = y + half * k;
        }
        rhs(t + half, &self.probe, &mut self.k2);
        for ((p, y), k) in self.probe.iter_mut().zip(y.iter()).zip(&self.k2) {
            *p = y + half * k;
        }
        rhs(t + half, &self.probe, &mut self.k3);
        for ((p, y), k) in self.probe.iter_mut().zip(y.iter()).zip(&self.k3) {
            *p = y + dt * k;
        }
        rhs(t + dt, &self.probe, &mut self.k4);

        let sixth = dt / 6.0;
        for i in 0..y.len() {
            y[i] += sixth * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_is_fourth_order() {
        let solve = |dt: f64| {
            let mut rk = Rk4::new(1);
            let mut y = [1.0];
            let steps = (1.0 / dt).round() as usize;
            for s in 0..steps {
                rk.step(|_, y, dy| dy[0] = -y[0], s as f64 * dt, &mut y, dt);
            }
            (y[0] - (-1.0f64).exp()).abs()
        };
        let ratio = solve(0.1) / solve(0.05);
        assert!((14.0..18.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn time_dependent_rhs() {
        // y' = cos t, y(0) = 0 -> sin t
        let mut rk = Rk4::new(1);
        let mut y = [0.0];
        let dt = 1e-2;
        for s in 0..100 {
            rk.step(|t, _, dy| dy[0] = t.cos(), s as f64 * dt, &mut y, dt);
        }
        assert!((y[0] - 1f64.sin()).abs() < 1e-10);
    }
}
