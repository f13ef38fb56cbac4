//! Gate-level combinational netlists.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateFunction {
    And,
    Nand,
    Or,
    Nor,
    Xor,
    Xnor,
    Not,
    Buf,
}

impl GateFunction {
    pub const ALL: [GateFunction; 8] = [
        GateFunction::And,
        GateFunction::Nand,
        GateFunction::Or,
        GateFunction::Nor,
        GateFunction::Xor,
        GateFunction::Xnor,
        GateFunction::Not,
        GateFunction::Buf,
    ];

    /// Spelling used when writing `.bench` text.
    pub fn name(self) -> &'static str {
        match self {
            GateFunction::And => "AND",
            GateFunction::Nand => "NAND",
            GateFunction::Or => "OR",
            GateFunction::Nor => "NOR",
            GateFunction::Xor => "XOR",
            GateFunction::Xnor => "XNOR",
            GateFunction::Not => "NOT",
            GateFunction::Buf => "BUFF",
        }
    }

    pub fn is_unary(self) -> bool {
        matches!(self, GateFunction::Not | GateFunction::Buf)
    }

    pub fn accepts_arity(self, n: usize) -> bool {
        if self.is_unary() {
            n == 1
        } else {
            n >= 1
        }
    }

    /// Whether the gate can take one more fanin without changing its kind.
    pub fn widenable(self) -> bool {
        !self.is_unary()
    }

    pub fn eval(self, inputs: &[bool]) -> bool {
        match self {
            GateFunction::And => inputs.iter().all(|&b| b),
            GateFunction::Nand => !inputs.iter().all(|&b| b),
            GateFunction::Or => inputs.iter().any(|&b| b),
            GateFunction::Nor => !inputs.iter().any(|&b| b),
            GateFunction::Xor => inputs.iter().fold(false, |acc, &b| acc ^ b),
            GateFunction::Xnor => !inputs.iter().fold(false, |acc, &b| acc ^ b),
            GateFunction::Not => !inputs[0],
            GateFunction::Buf => inputs[0],
        }
    }

    /// Bit-parallel evaluation: each bit position is an independent vector.
    pub fn eval_words<I: IntoIterator<Item = u64>>(self, inputs: I) -> u64 {
        let mut it = inputs.into_iter();
        let first = it.next().unwrap_or(0);
        match self {
            GateFunction::And => it.fold(first, |a, b| a & b),
            GateFunction::Nand => !it.fold(first, |a, b| a & b),
            GateFunction::Or => it.fold(first, |a, b| a | b),
            GateFunction::Nor => !it.fold(first, |a, b| a | b),
            GateFunction::Xor => it.fold(first, |a, b| a ^ b),
            GateFunction::Xnor => !it.fold(first, |a, b| a ^ b),
            GateFunction::Not => !first,
            GateFunction::Buf => first,
        }
    }
}

impl fmt::Display for GateFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateFunction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "AND" => Ok(GateFunction::And),
            "NAND" => Ok(GateFunction::Nand),
            "OR" => Ok(GateFunction::Or),
            "NOR" => Ok(GateFunction::Nor),
            "XOR" => Ok(GateFunction::Xor),
            "XNOR" => Ok(GateFunction::Xnor),
            "NOT" => Ok(GateFunction::Not),
            "BUF" | "BUFF" => Ok(GateFunction::Buf),
            _ => Err(s.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub id: String,
    pub function: GateFunction,
    pub fanins: Vec<String>,
}

impl Gate {
    pub fn new(id: impl Into<String>, function: GateFunction, fanins: Vec<String>) -> Self {
        Gate {
            id: id.into(),
            function,
            fanins,
        }
    }
}

/// A validated combinational netlist.
///
/// Every fanin refers to a declared input or gate, identifiers are defined
/// once, and the gate graph is acyclic. Declaration order is preserved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Netlist {
    name: String,
    inputs: Vec<String>,
    outputs: Vec<String>,
    gates: Vec<Gate>,
    topo: Vec<usize>,
}

/// Source positions of each statement, used for error reporting.
#[derive(Debug, Default, Clone)]
pub(crate) struct Positions {
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub gates: Vec<usize>,
}

impl Positions {
    fn sequential(inputs: usize, outputs: usize, gates: usize) -> Self {
        let mut n = 0;
        let mut next = |count: usize| {
            (0..count)
                .map(|_| {
                    n += 1;
                    n
                })
                .collect::<Vec<_>>()
        };
        Positions {
            inputs: next(inputs),
            outputs: next(outputs),
            gates: next(gates),
        }
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

impl Netlist {
    /// Builds a netlist, checking every structural invariant.
    pub fn new(
        name: impl Into<String>,
        inputs: Vec<String>,
        outputs: Vec<String>,
        gates: Vec<Gate>,
    ) -> Result<Self, Error> {
        let pos = Positions::sequential(inputs.len(), outputs.len(), gates.len());
        Self::checked(name.into(), inputs, outputs, gates, &pos)
            .map_err(|e| Error::InvalidNetlist(e.to_string().replacen("line", "statement", 1)))
    }

    pub(crate) fn checked(
        name: String,
        inputs: Vec<String>,
        outputs: Vec<String>,
        gates: Vec<Gate>,
        pos: &Positions,
    ) -> Result<Self, ParseError> {
        if inputs.is_empty() {
            return Err(ParseError::NoInputs);
        }
        let mut defined: HashMap<&str, Option<usize>> = HashMap::new();
        for (i, input) in inputs.iter().enumerate() {
            if defined.insert(input.as_str(), None).is_some() {
                return Err(ParseError::Duplicate {
                    line: pos.inputs[i],
                    net: input.clone(),
                });
            }
        }
        for (i, gate) in gates.iter().enumerate() {
            if defined.insert(gate.id.as_str(), Some(i)).is_some() {
                return Err(ParseError::Duplicate {
                    line: pos.gates[i],
                    net: gate.id.clone(),
                });
            }
        }
        for (i, gate) in gates.iter().enumerate() {
            if !gate.function.accepts_arity(gate.fanins.len()) {
                return Err(ParseError::Arity {
                    line: pos.gates[i],
                    net: gate.id.clone(),
                    function: gate.function.name().to_string(),
                    got: gate.fanins.len(),
                });
            }
            if let Some(missing) = gate.fanins.iter().find(|f| !defined.contains_key(f.as_str())) {
                return Err(ParseError::Undefined {
                    line: pos.gates[i],
                    net: missing.clone(),
                });
            }
        }
        let mut seen_outputs = HashSet::new();
        for (i, output) in outputs.iter().enumerate() {
            if !defined.contains_key(output.as_str()) {
                return Err(ParseError::Undefined {
                    line: pos.outputs[i],
                    net: output.clone(),
                });
            }
            if !seen_outputs.insert(output.as_str()) {
                return Err(ParseError::Duplicate {
                    line: pos.outputs[i],
                    net: output.clone(),
                });
            }
        }

        // Kahn's algorithm over gate-to-gate dependencies.
        let mut pending: Vec<usize> = vec![0; gates.len()];
        let mut readers: Vec<Vec<usize>> = vec![Vec::new(); gates.len()];
        for (i, gate) in gates.iter().enumerate() {
            for fanin in &gate.fanins {
                if let Some(Some(src)) = defined.get(fanin.as_str()) {
                    pending[i] += 1;
                    readers[*src].push(i);
                }
            }
        }
        let mut ready: Vec<usize> = (0..gates.len()).filter(|&i| pending[i] == 0).collect();
        ready.reverse();
        let mut topo = Vec::with_capacity(gates.len());
        while let Some(g) = ready.pop() {
            topo.push(g);
            for &r in readers[g].iter().rev() {
                pending[r] -= 1;
                if pending[r] == 0 {
                    ready.push(r);
                }
            }
        }
        if topo.len() != gates.len() {
            let stuck = (0..gates.len()).find(|&i| pending[i] > 0).unwrap();
            return Err(ParseError::Cycle {
                line: pos.gates[stuck],
                net: gates[stuck].id.clone(),
            });
        }
        Ok(Netlist {
            name,
            inputs,
            outputs,
            gates,
            topo,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, id: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.id == id)
    }

    pub fn is_input(&self, id: &str) -> bool {
        self.inputs.iter().any(|i| i == id)
    }

    /// Gate indices in an order where every gate follows its fanins.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn into_parts(self) -> (String, Vec<String>, Vec<String>, Vec<Gate>) {
        (self.name, self.inputs, self.outputs, self.gates)
    }

    /// Returns an identifier not yet used in this netlist, starting from `base`.
    pub fn fresh_identifier(&self, base: &str) -> String {
        let taken = |s: &str| self.is_input(s) || self.gate(s).is_some();
        if !taken(base) {
            return base.to_string();
        }
        (1..)
            .map(|i| format!("{base}_{i}"))
            .find(|c| !taken(c))
            .unwrap()
    }

    /// True when both netlists have the same name-level structure.
    pub fn isomorphic_by_name(&self, other: &Netlist) -> bool {
        self.inputs == other.inputs && self.outputs == other.outputs && self.gates == other.gates
    }
}
