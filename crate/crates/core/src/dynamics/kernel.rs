//! Sparse right-hand sides for the Schrodinger and Lindblad equations.
//!
//! States are flat row-major buffers; a density matrix `rho[a][b]` lives at
//! `a * d + b`.

use crate::qcore::{c, DrivenHamiltonian, Operator, Tone, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Default)]
pub(crate) struct Sparse {
    pub entries: Vec<(usize, usize, C64)>,
}

impl Sparse {
    pub fn from_op(op: &Operator) -> Self {
        Sparse {
            entries: op.nonzeros(),
        }
    }

    fn dagger(&self) -> Self {
        Sparse {
            entries: self
                .entries
                .iter()
                .map(|&(i, j, z)| (j, i, z.conj()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
struct Term {
    a: Sparse,
    a_dag: Sparse,
    tones: Vec<Tone>,
}

/// `H(t) - (i/2) sum L^dag L` and the jump operators, in sparse form.
#[derive(Debug, Clone)]
pub(crate) struct Kernel {
    pub dim: usize,
    static_nh: Sparse,
    terms: Vec<Term>,
    jumps: Vec<Sparse>,
}

impl Kernel {
    pub fn new(h: &DrivenHamiltonian, lindblads: &[Operator]) -> Self {
        let mut s = h.static_part.clone();
        for l in lindblads {
            s = &s - &(&l.dagger() * l).scale(c(0.0, 0.5));
        }
        Kernel {
            dim: h.dim(),
            static_nh: Sparse::from_op(&s),
            terms: h
                .terms
                .iter()
                .map(|t| {
                    let a = Sparse::from_op(&t.op);
                    Term {
                        a_dag: a.dagger(),
                        a,
                        tones: t.tones.clone(),
                    }
                })
                .collect(),
            jumps: lindblads
                .iter()
                .map(Sparse::from_op)
                .filter(|s| !s.entries.is_empty())
                .collect(),
        }
    }

    // Effective non-Hermitian Hamiltonian at time t as (row, col, value).
    fn h_nh(&self, t: f64, buf: &mut Vec<(usize, usize, C64)>) {
        buf.clear();
        buf.extend_from_slice(&self.static_nh.entries);
        for term in &self.terms {
            let f: C64 = term
                .tones
                .iter()
                .map(|tn| tn.amplitude * C64::from_polar(1.0, tn.freq * t))
                .sum();
            if f == c(0.0, 0.0) {
                continue;
            }
            let fc = f.conj();
            buf.extend(term.a.entries.iter().map(|&(i, j, z)| (i, j, f * z)));
            buf.extend(term.a_dag.entries.iter().map(|&(i, j, z)| (i, j, fc * z)));
        }
    }

    /// `d psi/dt = -i H psi`; jump terms are ignored, the anti-Hermitian part is not.
    pub fn ket_rhs(
        &self,
        t: f64,
        psi: &[C64],
        out: &mut [C64],
        buf: &mut Vec<(usize, usize, C64)>,
    ) {
        self.h_nh(t, buf);
        out.iter_mut().for_each(|z| *z = c(0.0, 0.0));
        for &(i, j, h) in buf.iter() {
            out[i] += -I * h * psi[j];
        }
    }

    /// `d rho/dt = -i (H_nh rho - rho H_nh^dag) + sum_k L rho L^dag`.
    pub fn rho_rhs(
        &self,
        t: f64,
        rho: &[C64],
        out: &mut [C64],
        buf: &mut Vec<(usize, usize, C64)>,
    ) {
        let d = self.dim;
        self.h_nh(t, buf);
        out.iter_mut().for_each(|z| *z = c(0.0, 0.0));
        for &(i, j, h) in buf.iter() {
            let mh = -I * h;
            let mhc = I * h.conj();
            let (ri, rj) = (i * d, j * d);
            // (H rho)[i][b] += h rho[j][b]
            for b in 0..d {
                out[ri + b] += mh * rho[rj + b];
            }
            // (rho H^dag)[a][i] += rho[a][j] conj(h)
            for a in 0..d {
                out[a * d + i] += mhc * rho[a * d + j];
            }
        }
        for l in &self.jumps {
            for &(i, j, x) in &l.entries {
                for &(k, m, y) in &l.entries {
                    out[i * d + k] += x * rho[j * d + m] * y.conj();
                }
            }
        }
    }

    pub fn max_jump_rate(&self) -> f64 {
        self.jumps
            .iter()
            .map(|l| l.entries.iter().map(|e| e.2.norm_sqr()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Classical fourth-order Runge-Kutta workspace.
pub(crate) struct Rk4 {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
    buf: Vec<(usize, usize, C64)>,
}

impl Rk4 {
    pub fn new(n: usize) -> Self {
        let z = vec![c(0.0, 0.0); n];
        Rk4 {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
            buf: Vec::new(),
        }
    }

    pub fn step<F>(&mut self, f: F, t: f64, dt: f64, y: &mut [C64])
    where
        F: Fn(f64, &[C64], &mut [C64], &mut Vec<(usize, usize, C64)>),
    {
        let n = y.len();
        let h = c(dt, 0.0);
        let h2 = c(0.5 * dt, 0.0);
        f(t, y, &mut self.k1, &mut self.buf);
        for i in 0..n {
            self.tmp[i] = y[i] + h2 * self.k1[i];
        }
        f(t + 0.5 * dt, &self.tmp, &mut self.k2, &mut self.buf);
        for i in 0..n {
            self.tmp[i] = y[i] + h2 * self.k2[i];
        }
        f(t + 0.5 * dt, &self.tmp, &mut self.k3, &mut self.buf);
        for i in 0..n {
            self.tmp[i] = y[i] + h * self.k3[i];
        }
        f(t + dt, &self.tmp, &mut self.k4, &mut self.buf);
        let w = dt / 6.0;
        for i in 0..n {
            y[i] += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * w;
        }
    }
}
