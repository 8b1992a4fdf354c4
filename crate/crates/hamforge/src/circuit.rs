//! Gate-level circuit representation.
//!
//! Circuits are flat sequences of gates from a fixed alphabet
//! {h, x, y, z, s, sdg, rx, ry, rz, u3, cx, gphase} acting on qubits indexed
//! MSB-first: flat qubit 0 carries bit weight 2^(N-1) of the basis index.
//! Registers are named contiguous spans used by the simulator and the
//! block-encoding descriptors; they carry no semantics at the gate level.
//!
//! The alphabet is closed under inversion, transposition and single-qubit
//! control, so structural transforms ([`Circuit::inverse_of`],
//! [`Circuit::transpose_of`], [`Circuit::controlled_of`]) stay inside it.

use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

/// Errors raised while building or parsing circuits.
#[derive(Error, Debug)]
pub enum CircuitError {
    #[error("qubit {qubit} out of range for {n_qubits}-qubit circuit")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("cx control and target coincide on qubit {0}")]
    ControlIsTarget(usize),
    #[error("register {0} not found")]
    UnknownRegister(String),
    #[error("malformed gate line {line}: {reason}")]
    ParseError { line: usize, reason: String },
}

/// Role of a register, recorded in serialized circuits.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RegKind {
    /// Carries the encoded matrix indices.
    Data,
    /// Must read |0> to select the encoded block.
    Flag,
    /// Guaranteed |0> before and after the circuit.
    Ancilla,
}

impl RegKind {
    /// Text-format token for this register kind.
    #[must_use]
    pub fn as_str(self) -> &'static str {
        match self {
            RegKind::Data => "data",
            RegKind::Flag => "flag",
            RegKind::Ancilla => "ancilla",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "data" => Some(RegKind::Data),
            "flag" => Some(RegKind::Flag),
            "ancilla" => Some(RegKind::Ancilla),
            _ => None,
        }
    }
}

/// Named contiguous span of qubits, MSB first.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Register {
    pub name: String,
    pub start: usize,
    pub width: usize,
    pub kind: RegKind,
}

impl Register {
    /// Flat indices of the span, MSB first.
    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.start..self.start + self.width
    }
}

/// One gate from the fixed alphabet.
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum Gate {
    H(usize),
    X(usize),
    Y(usize),
    Z(usize),
    S(usize),
    Sdg(usize),
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    /// u3(theta, phi, lambda) = [[cos(t/2), -e^{il} sin(t/2)], [e^{ip} sin(t/2), e^{i(p+l)} cos(t/2)]].
    U3(usize, f64, f64, f64),
    /// Control first, target second.
    Cx(usize, usize),
    GPhase(f64),
}

impl Gate {
    /// Qubits the gate touches.
    pub fn support(&self) -> impl Iterator<Item = usize> {
        let (a, b) = match *self {
            Gate::H(q)
            | Gate::X(q)
            | Gate::Y(q)
            | Gate::Z(q)
            | Gate::S(q)
            | Gate::Sdg(q)
            | Gate::Rx(q, _)
            | Gate::Ry(q, _)
            | Gate::Rz(q, _)
            | Gate::U3(q, _, _, _) => (Some(q), None),
            Gate::Cx(c, t) => (Some(c), Some(t)),
            Gate::GPhase(_) => (None, None),
        };
        a.into_iter().chain(b)
    }

    /// True for members of the alphabet acting on exactly one qubit.
    #[inline]
    #[must_use]
    pub fn is_one_qubit(&self) -> bool {
        !matches!(self, Gate::Cx(_, _) | Gate::GPhase(_))
    }

    /// 2x2 matrix of a one-qubit gate; `None` for cx and gphase.
    pub fn matrix(&self) -> Option<[[Complex64; 2]; 2]> {
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let m = match *self {
            Gate::H(_) => {
                let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                [[h, h], [h, -h]]
            }
            Gate::X(_) => [[zero, one], [one, zero]],
            Gate::Y(_) => [[zero, -i], [i, zero]],
            Gate::Z(_) => [[one, zero], [zero, -one]],
            Gate::S(_) => [[one, zero], [zero, i]],
            Gate::Sdg(_) => [[one, zero], [zero, -i]],
            Gate::Rx(_, th) => {
                let c = Complex64::new((th / 2.0).cos(), 0.0);
                let s = -i * (th / 2.0).sin();
                [[c, s], [s, c]]
            }
            Gate::Ry(_, th) => {
                let c = Complex64::new((th / 2.0).cos(), 0.0);
                let s = Complex64::new((th / 2.0).sin(), 0.0);
                [[c, -s], [s, c]]
            }
            Gate::Rz(_, th) => [
                [(-i * (th / 2.0)).exp(), zero],
                [zero, (i * (th / 2.0)).exp()],
            ],
            Gate::U3(_, th, ph, la) => {
                let c = Complex64::new((th / 2.0).cos(), 0.0);
                let s = Complex64::new((th / 2.0).sin(), 0.0);
                [
                    [c, -(i * la).exp() * s],
                    [(i * ph).exp() * s, (i * (ph + la)).exp() * c],
                ]
            }
            Gate::Cx(_, _) | Gate::GPhase(_) => return None,
        };
        Some(m)
    }

    /// Inverse gate within the alphabet.
    #[must_use]
    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::S(q) => Gate::Sdg(q),
            Gate::Sdg(q) => Gate::S(q),
            Gate::Rx(q, th) => Gate::Rx(q, -th),
            Gate::Ry(q, th) => Gate::Ry(q, -th),
            Gate::Rz(q, th) => Gate::Rz(q, -th),
            Gate::U3(q, th, ph, la) => Gate::U3(q, -th, -la, -ph),
            Gate::GPhase(th) => Gate::GPhase(-th),
            g => g,
        }
    }

    /// Transposed gate; `Y` needs a compensating global phase, returned as
    /// an extra gate.
    #[must_use]
    pub fn transpose(&self) -> (Gate, Option<Gate>) {
        match *self {
            Gate::Y(q) => (Gate::Y(q), Some(Gate::GPhase(std::f64::consts::PI))),
            Gate::Ry(q, th) => (Gate::Ry(q, -th), None),
            Gate::U3(q, th, ph, la) => (Gate::U3(q, -th, la, ph), None),
            g => (g, None),
        }
    }

    /// Gate with every qubit index sent through `map`.
    #[must_use]
    pub fn remapped(&self, map: impl Fn(usize) -> usize) -> Gate {
        match *self {
            Gate::H(q) => Gate::H(map(q)),
            Gate::X(q) => Gate::X(map(q)),
            Gate::Y(q) => Gate::Y(map(q)),
            Gate::Z(q) => Gate::Z(map(q)),
            Gate::S(q) => Gate::S(map(q)),
            Gate::Sdg(q) => Gate::Sdg(map(q)),
            Gate::Rx(q, a) => Gate::Rx(map(q), a),
            Gate::Ry(q, a) => Gate::Ry(map(q), a),
            Gate::Rz(q, a) => Gate::Rz(map(q), a),
            Gate::U3(q, a, b, c) => Gate::U3(map(q), a, b, c),
            Gate::Cx(c, t) => Gate::Cx(map(c), map(t)),
            Gate::GPhase(a) => Gate::GPhase(a),
        }
    }

    /// Euler decomposition U = e^{i alpha} Rz(beta) Ry(gamma) Rz(delta).
    fn euler_zyz(&self) -> Option<(f64, f64, f64, f64)> {
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
        let e = match *self {
            Gate::H(_) => (FRAC_PI_2, 0.0, FRAC_PI_2, PI),
            Gate::Y(_) => (FRAC_PI_2, FRAC_PI_2, PI, FRAC_PI_2),
            Gate::Z(_) => (FRAC_PI_2, 0.0, 0.0, PI),
            Gate::S(_) => (FRAC_PI_4, 0.0, 0.0, FRAC_PI_2),
            Gate::Sdg(_) => (-FRAC_PI_4, 0.0, 0.0, -FRAC_PI_2),
            Gate::Rx(_, th) => (0.0, -FRAC_PI_2, th, FRAC_PI_2),
            Gate::Ry(_, th) => (0.0, 0.0, th, 0.0),
            Gate::Rz(_, th) => (0.0, 0.0, 0.0, th),
            Gate::U3(_, th, ph, la) => ((ph + la) / 2.0, ph, th, la),
            Gate::X(_) | Gate::Cx(_, _) | Gate::GPhase(_) => return None,
        };
        Some(e)
    }
}

/// Gate list over a fixed qubit count plus named register layout.
///
/// # Examples
///
/// ```
/// use hamforge::circuit::{Circuit, Gate};
/// let mut c = Circuit::new(2);
/// c.push(Gate::H(0));
/// c.push(Gate::Cx(0, 1));
/// assert_eq!(c.count_1q(), 1);
/// assert_eq!(c.count_cx(), 1);
/// ```
#[derive(Clone, PartialEq, Debug, Default)]
pub struct Circuit {
    pub n_qubits: usize,
    pub regs: Vec<Register>,
    pub gates: Vec<Gate>,
}

impl Circuit {
    /// Empty circuit on `n_qubits` qubits with no registers declared.
    #[must_use]
    pub fn new(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            regs: Vec::new(),
            gates: Vec::new(),
        }
    }

    /// Declares a register spanning `start..start+width`.
    pub fn add_register(&mut self, name: &str, start: usize, width: usize, kind: RegKind) {
        debug_assert!(start + width <= self.n_qubits);
        self.regs.push(Register {
            name: name.to_string(),
            start,
            width,
            kind,
        });
    }

    /// Looks a register up by name.
    pub fn register(&self, name: &str) -> Result<&Register, CircuitError> {
        self.regs
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| CircuitError::UnknownRegister(name.to_string()))
    }

    /// Appends one gate.
    #[inline]
    pub fn push(&mut self, g: Gate) {
        debug_assert!(g.support().all(|q| q < self.n_qubits));
        self.gates.push(g);
    }

    /// Appends `other`'s gates verbatim (qubit indexing must already agree).
    pub fn extend(&mut self, other: &Circuit) {
        debug_assert!(other.n_qubits <= self.n_qubits);
        self.gates.extend_from_slice(&other.gates);
    }

    /// Appends `other` with its qubit `k` routed to `map[k]`.
    pub fn extend_mapped(&mut self, other: &Circuit, map: &[usize]) {
        debug_assert_eq!(map.len(), other.n_qubits);
        for g in &other.gates {
            self.push(g.remapped(|q| map[q]));
        }
    }

    /// Number of one-qubit gates (gphase excluded).
    #[must_use]
    pub fn count_1q(&self) -> usize {
        self.gates.iter().filter(|g| g.is_one_qubit()).count()
    }

    /// Number of cx gates.
    #[must_use]
    pub fn count_cx(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::Cx(_, _)))
            .count()
    }

    /// Circuit implementing the inverse unitary.
    #[must_use]
    pub fn inverse_of(&self) -> Circuit {
        let mut out = Circuit {
            n_qubits: self.n_qubits,
            regs: self.regs.clone(),
            gates: Vec::with_capacity(self.gates.len()),
        };
        for g in self.gates.iter().rev() {
            out.gates.push(g.inverse());
        }
        out
    }

    /// Circuit implementing the transposed unitary.
    #[must_use]
    pub fn transpose_of(&self) -> Circuit {
        let mut out = Circuit {
            n_qubits: self.n_qubits,
            regs: self.regs.clone(),
            gates: Vec::with_capacity(self.gates.len()),
        };
        for g in self.gates.iter().rev() {
            let (t, extra) = g.transpose();
            out.gates.push(t);
            if let Some(e) = extra {
                out.gates.push(e);
            }
        }
        out
    }

    /// Emits this circuit controlled on qubit `ctrl` into `out`.
    ///
    /// Every alphabet gate maps back into the alphabet: plain x becomes cx,
    /// cx becomes an expanded Toffoli, gphase becomes a phase on the control,
    /// and any other one-qubit gate U goes through the exact ABC split
    /// U = e^{i a} A X B X C with A B C = I, at most 4 one-qubit gates and
    /// 2 cx.
    pub fn controlled_of(&self, ctrl: usize, out: &mut Circuit) {
        for g in &self.gates {
            debug_assert!(g.support().all(|q| q != ctrl));
            match *g {
                Gate::X(t) => out.push(Gate::Cx(ctrl, t)),
                Gate::Cx(c, t) => emit_toffoli(out, ctrl, c, t),
                Gate::GPhase(th) => out.push(Gate::U3(ctrl, 0.0, 0.0, th)),
                ref g1 => {
                    let q = g1.support().next().expect("one-qubit gate");
                    let (al, be, ga, de) = g1.euler_zyz().expect("one-qubit gate");
                    emit_controlled_1q(out, ctrl, q, al, be, ga, de);
                }
            }
        }
    }

    /// Serializes to the line-based text format.
    ///
    /// One register header per line, then one gate per line; angles printed
    /// with 17 significant digits so parsing is bit-exact.
    #[must_use]
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# qubits {}", self.n_qubits);
        for r in &self.regs {
            let _ = writeln!(
                s,
                "# reg {} {} {} {}",
                r.name,
                r.start,
                r.width,
                r.kind.as_str()
            );
        }
        for g in &self.gates {
            match *g {
                Gate::H(q) => {
                    let _ = writeln!(s, "h {q}");
                }
                Gate::X(q) => {
                    let _ = writeln!(s, "x {q}");
                }
                Gate::Y(q) => {
                    let _ = writeln!(s, "y {q}");
                }
                Gate::Z(q) => {
                    let _ = writeln!(s, "z {q}");
                }
                Gate::S(q) => {
                    let _ = writeln!(s, "s {q}");
                }
                Gate::Sdg(q) => {
                    let _ = writeln!(s, "sdg {q}");
                }
                Gate::Rx(q, a) => {
                    let _ = writeln!(s, "rx {q} {a:.16e}");
                }
                Gate::Ry(q, a) => {
                    let _ = writeln!(s, "ry {q} {a:.16e}");
                }
                Gate::Rz(q, a) => {
                    let _ = writeln!(s, "rz {q} {a:.16e}");
                }
                Gate::U3(q, a, b, c) => {
                    let _ = writeln!(s, "u3 {q} {a:.16e} {b:.16e} {c:.16e}");
                }
                Gate::Cx(c, t) => {
                    let _ = writeln!(s, "cx {c} {t}");
                }
                Gate::GPhase(a) => {
                    let _ = writeln!(s, "gphase {a:.16e}");
                }
            }
        }
        s
    }

    /// Parses the text format produced by [`Circuit::to_text`].
    pub fn from_text(text: &str) -> Result<Circuit, CircuitError> {
        let mut c = Circuit::new(0);
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let mut tok = line.split_whitespace();
            let head = tok.next().unwrap();
            let err = |reason: &str| CircuitError::ParseError {
                line: idx + 1,
                reason: reason.to_string(),
            };
            if head == "#" {
                match tok.next() {
                    Some("qubits") => {
                        c.n_qubits = tok
                            .next()
                            .and_then(|v| v.parse().ok())
                            .ok_or_else(|| err("bad qubit count"))?;
                    }
                    Some("reg") => {
                        let name = tok.next().ok_or_else(|| err("missing register name"))?;
                        let start: usize = tok
                            .next()
                            .and_then(|v| v.parse().ok())
                            .ok_or_else(|| err("bad register start"))?;
                        let width: usize = tok
                            .next()
                            .and_then(|v| v.parse().ok())
                            .ok_or_else(|| err("bad register width"))?;
                        let kind = tok
                            .next()
                            .and_then(RegKind::parse)
                            .ok_or_else(|| err("bad register kind"))?;
                        c.regs.push(Register {
                            name: name.to_string(),
                            start,
                            width,
                            kind,
                        });
                    }
                    _ => return Err(err("unknown header")),
                }
                continue;
            }
            let mut q = || -> Result<usize, CircuitError> {
                tok.next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| CircuitError::ParseError {
                        line: idx + 1,
                        reason: "bad qubit index".to_string(),
                    })
            };
            macro_rules! ang {
                () => {
                    tok.next().and_then(|v| v.parse::<f64>().ok()).ok_or_else(|| {
                        CircuitError::ParseError {
                            line: idx + 1,
                            reason: "bad angle".to_string(),
                        }
                    })?
                };
            }
            let gate = match head {
                "h" => Gate::H(q()?),
                "x" => Gate::X(q()?),
                "y" => Gate::Y(q()?),
                "z" => Gate::Z(q()?),
                "s" => Gate::S(q()?),
                "sdg" => Gate::Sdg(q()?),
                "rx" => {
                    let t = q()?;
                    Gate::Rx(t, ang!())
                }
                "ry" => {
                    let t = q()?;
                    Gate::Ry(t, ang!())
                }
                "rz" => {
                    let t = q()?;
                    Gate::Rz(t, ang!())
                }
                "u3" => {
                    let t = q()?;
                    Gate::U3(t, ang!(), ang!(), ang!())
                }
                "cx" => {
                    let ctl = q()?;
                    let tgt = q()?;
                    if ctl == tgt {
                        return Err(CircuitError::ControlIsTarget(ctl));
                    }
                    Gate::Cx(ctl, tgt)
                }
                "gphase" => Gate::GPhase(ang!()),
                other => {
                    return Err(CircuitError::ParseError {
                        line: idx + 1,
                        reason: format!("unknown gate {other}"),
                    })
                }
            };
            for used in gate.support() {
                if used >= c.n_qubits {
                    return Err(CircuitError::QubitOutOfRange {
                        qubit: used,
                        n_qubits: c.n_qubits,
                    });
                }
            }
            c.gates.push(gate);
        }
        Ok(c)
    }
}

/// Emits a Toffoli with controls `a`, `b` and target `t`: 8 one-qubit gates
/// and 6 cx, with the trailing T and H on the target fused into one u3.
pub fn emit_toffoli(out: &mut Circuit, a: usize, b: usize, t: usize) {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
    out.push(Gate::H(t));
    out.push(Gate::Cx(b, t));
    out.push(Gate::U3(t, 0.0, 0.0, -FRAC_PI_4));
    out.push(Gate::Cx(a, t));
    out.push(Gate::U3(t, 0.0, 0.0, FRAC_PI_4));
    out.push(Gate::Cx(b, t));
    out.push(Gate::U3(t, 0.0, 0.0, -FRAC_PI_4));
    out.push(Gate::Cx(a, t));
    out.push(Gate::U3(b, 0.0, 0.0, FRAC_PI_4));
    out.push(Gate::U3(t, FRAC_PI_2, 0.0, 5.0 * PI / 4.0));
    out.push(Gate::Cx(a, b));
    out.push(Gate::U3(a, 0.0, 0.0, FRAC_PI_4));
    out.push(Gate::U3(b, 0.0, 0.0, -FRAC_PI_4));
    out.push(Gate::Cx(a, b));
}

/// Emits U controlled on `ctrl` for U = e^{i al} Rz(be) Ry(ga) Rz(de) on `q`.
///
/// The split C = Rz((de-be)/2), B = Ry(-ga/2) Rz(-(de+be)/2),
/// A = Rz(be) Ry(ga/2) satisfies A B C = I and A X B X C = e^{-i al} U, and
/// the u3 substitutions below carry phases that cancel exactly, so no global
/// phase correction is needed. Gates that reduce to the identity are skipped.
fn emit_controlled_1q(
    out: &mut Circuit,
    ctrl: usize,
    q: usize,
    al: f64,
    be: f64,
    ga: f64,
    de: f64,
) {
    let c_ang = (de - be) / 2.0;
    if c_ang != 0.0 {
        out.push(Gate::U3(q, 0.0, 0.0, c_ang));
    }
    out.push(Gate::Cx(ctrl, q));
    let b_ang = -(de + be) / 2.0;
    if ga != 0.0 || b_ang != 0.0 {
        out.push(Gate::U3(q, -ga / 2.0, 0.0, b_ang));
    }
    out.push(Gate::Cx(ctrl, q));
    if ga != 0.0 || be != 0.0 {
        out.push(Gate::U3(q, ga / 2.0, be, 0.0));
    }
    if al != 0.0 {
        out.push(Gate::U3(ctrl, 0.0, 0.0, al));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toffoli_gate_budget() {
        let mut c = Circuit::new(3);
        emit_toffoli(&mut c, 0, 1, 2);
        assert_eq!(c.count_1q(), 8);
        assert_eq!(c.count_cx(), 6);
    }

    #[test]
    fn controlled_1q_budget() {
        let mut c = Circuit::new(2);
        let mut base = Circuit::new(2);
        base.push(Gate::H(1));
        base.controlled_of(0, &mut c);
        assert!(c.count_1q() <= 4);
        assert_eq!(c.count_cx(), 2);
    }

    #[test]
    fn text_round_trip_is_bit_exact() {
        let mut c = Circuit::new(3);
        c.add_register("sys", 0, 2, RegKind::Data);
        c.add_register("anc", 2, 1, RegKind::Ancilla);
        c.push(Gate::H(0));
        c.push(Gate::Ry(1, 0.1234567890123456789));
        c.push(Gate::U3(2, 1.0 / 3.0, -2.0 / 7.0, std::f64::consts::PI));
        c.push(Gate::Cx(0, 2));
        c.push(Gate::GPhase(-1.0 / 9.0));
        let text = c.to_text();
        let back = Circuit::from_text(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!(Circuit::from_text("# qubits 2\ncx 0 0\n").is_err());
        assert!(Circuit::from_text("# qubits 1\nh 3\n").is_err());
        assert!(Circuit::from_text("# qubits 1\nfoo 0\n").is_err());
        assert!(Circuit::from_text("# qubits 1\nry 0 notanumber\n").is_err());
    }

    #[test]
    fn inverse_reverses_and_flips() {
        let mut c = Circuit::new(2);
        c.push(Gate::S(0));
        c.push(Gate::Ry(1, 0.7));
        c.push(Gate::Cx(0, 1));
        let inv = c.inverse_of();
        assert_eq!(
            inv.gates,
            vec![Gate::Cx(0, 1), Gate::Ry(1, -0.7), Gate::Sdg(0)]
        );
    }

    #[test]
    fn euler_tables_match_matrices() {
        let gates = [
            Gate::H(0),
            Gate::Y(0),
            Gate::Z(0),
            Gate::S(0),
            Gate::Sdg(0),
            Gate::Rx(0, 0.3),
            Gate::Ry(0, -1.1),
            Gate::Rz(0, 2.4),
            Gate::U3(0, 0.5, 1.3, -0.8),
        ];
        for g in gates {
            let (al, be, ga, de) = g.euler_zyz().unwrap();
            let m = g.matrix().unwrap();
            let rz = |t: f64| Gate::Rz(0, t).matrix().unwrap();
            let ry = |t: f64| Gate::Ry(0, t).matrix().unwrap();
            let mul = |a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]| {
                let mut r = [[Complex64::new(0.0, 0.0); 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        for k in 0..2 {
                            r[i][j] += a[i][k] * b[k][j];
                        }
                    }
                }
                r
            };
            let rec = mul(mul(rz(be), ry(ga)), rz(de));
            let ph = (Complex64::i() * al).exp();
            for i in 0..2 {
                for j in 0..2 {
                    assert!((ph * rec[i][j] - m[i][j]).norm() < 1e-14, "{g:?}");
                }
            }
        }
    }
}
