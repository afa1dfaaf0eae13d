//! Behavioral covert cells (fake inverter, fake buffer, universal
//! transmitter) and the key-programmable model an attacker assigns to every
//! cell that looks like one.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CovertGateKind {
    #[serde(rename = "FI")]
    Fi,
    #[serde(rename = "FB")]
    Fb,
    #[serde(rename = "UT_A")]
    UtA,
    #[serde(rename = "UT_B")]
    UtB,
}

impl CovertGateKind {
    pub const ALL: [CovertGateKind; 4] = [CovertGateKind::Fi, CovertGateKind::Fb, CovertGateKind::UtA, CovertGateKind::UtB];

    pub fn legal_configs(self) -> &'static [CovertConfig] {
        match self {
            CovertGateKind::Fi | CovertGateKind::Fb => &[CovertConfig::Const1, CovertConfig::Const0],
            CovertGateKind::UtA | CovertGateKind::UtB => &[CovertConfig::Normal, CovertConfig::Const1, CovertConfig::Const0],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CovertConfig {
    #[serde(rename = "NORMAL")]
    Normal,
    #[serde(rename = "CONST1")]
    Const1,
    #[serde(rename = "CONST0")]
    Const0,
}

pub type NetId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CovertInstance {
    pub kind: CovertGateKind,
    pub config: CovertConfig,
    pub real_input: Option<NetId>,
    pub dummy_inputs: Vec<NetId>,
    pub output: NetId,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CovertError {
    #[error("{kind:?} cannot be configured as {config:?}")]
    IllegalConfig { kind: CovertGateKind, config: CovertConfig },
    #[error("{kind:?} in normal mode needs a real input")]
    MissingRealInput { kind: CovertGateKind },
    #[error("net {0} has no value")]
    MissingNet(NetId),
}

impl CovertInstance {
    pub fn check(&self) -> Result<(), CovertError> {
        if !self.kind.legal_configs().contains(&self.config) {
            return Err(CovertError::IllegalConfig { kind: self.kind, config: self.config });
        }
        if self.config == CovertConfig::Normal && self.real_input.is_none() {
            return Err(CovertError::MissingRealInput { kind: self.kind });
        }
        Ok(())
    }
}

/// True output of a covert cell given the values of all nets.
pub fn gate_function(inst: &CovertInstance, nets: &[bool]) -> Result<bool, CovertError> {
    inst.check()?;
    match inst.config {
        CovertConfig::Const1 => Ok(true),
        CovertConfig::Const0 => Ok(false),
        CovertConfig::Normal => {
            let r = inst.real_input.expect("checked");
            let x = *nets.get(r).ok_or(CovertError::MissingNet(r))?;
            Ok(match inst.kind {
                CovertGateKind::UtA => x,
                CovertGateKind::UtB => !x,
                CovertGateKind::Fi | CovertGateKind::Fb => unreachable!("checked"),
            })
        }
    }
}

/// Cell classes visible to an attacker that a covert cell can hide behind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ApparentCell {
    Inverter,
    /// Two chained inverters.
    Buffer,
    Nand,
}

impl ApparentCell {
    pub fn arity(self) -> usize {
        match self {
            ApparentCell::Inverter | ApparentCell::Buffer => 1,
            ApparentCell::Nand => 2,
        }
    }

    /// Standard cells the class occupies.
    pub fn cells(self) -> usize {
        match self {
            ApparentCell::Inverter | ApparentCell::Nand => 1,
            ApparentCell::Buffer => 2,
        }
    }
}

pub fn gate_appearance(kind: CovertGateKind) -> ApparentCell {
    match kind {
        CovertGateKind::Fi => ApparentCell::Inverter,
        CovertGateKind::Fb => ApparentCell::Buffer,
        CovertGateKind::UtA | CovertGateKind::UtB => ApparentCell::Nand,
    }
}

/// Two key bits, written `k0 k1`.
pub type Key = [bool; 2];

pub const KEY_NORMAL: Key = [false, false];
pub const KEY_CONST0: Key = [false, true];
pub const KEY_CONST1: Key = [true, false];
pub const KEY_SPARE: Key = [true, true];

/// Output of a keyed cell. `00` is the apparent function, `01` constant 0,
/// `10` constant 1. The spare code `11` is constant 1 for inverter and
/// buffer cells and passes the first input through for NAND cells.
pub fn keyed_eval(cell: ApparentCell, key: Key, inputs: &[bool]) -> bool {
    match (key, cell) {
        (KEY_CONST0, _) => false,
        (KEY_CONST1, _) => true,
        (KEY_NORMAL, ApparentCell::Inverter) => !inputs[0],
        (KEY_NORMAL, ApparentCell::Buffer) => inputs[0],
        (KEY_NORMAL, ApparentCell::Nand) => !(inputs[0] && inputs[1]),
        (_, ApparentCell::Nand) => inputs[0],
        (_, _) => true,
    }
}

/// Key that makes the keyed model of `kind`'s appearance behave like the
/// covert cell configured as `config`. A UT-B's NAND has both pins on the
/// real input; a UT-A's NAND has the real input on its first pin.
pub fn correct_key(kind: CovertGateKind, config: CovertConfig) -> Key {
    match (kind, config) {
        (_, CovertConfig::Const1) => KEY_CONST1,
        (_, CovertConfig::Const0) => KEY_CONST0,
        (CovertGateKind::UtA, CovertConfig::Normal) => KEY_SPARE,
        (_, CovertConfig::Normal) => KEY_NORMAL,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(kind: CovertGateKind, config: CovertConfig) -> CovertInstance {
        let (real, dummy) = match kind {
            CovertGateKind::UtA => (Some(0), vec![1, 2]),
            CovertGateKind::UtB => (Some(0), vec![]),
            _ => (None, vec![0, 1, 2]),
        };
        CovertInstance { kind, config, real_input: real, dummy_inputs: dummy, output: 3 }
    }

    fn all_nets(arity: usize) -> impl Iterator<Item = Vec<bool>> {
        (0..1usize << arity).map(move |r| (0..arity).map(|k| (r >> k) & 1 == 1).collect())
    }

    #[test]
    fn fake_inverter_is_constant() {
        assert!(gate_function(&inst(CovertGateKind::Fi, CovertConfig::Const1), &[false, true, false]).unwrap());
        assert!(!gate_function(&inst(CovertGateKind::Fi, CovertConfig::Const0), &[true, true, true]).unwrap());
    }

    #[test]
    fn transmitters_follow_the_real_input() {
        for nets in all_nets(3) {
            assert_eq!(gate_function(&inst(CovertGateKind::UtA, CovertConfig::Normal), &nets).unwrap(), nets[0]);
            assert_eq!(gate_function(&inst(CovertGateKind::UtB, CovertConfig::Normal), &nets).unwrap(), !nets[0]);
        }
    }

    #[test]
    fn illegal_configs() {
        for k in [CovertGateKind::Fi, CovertGateKind::Fb] {
            assert_eq!(
                gate_function(&inst(k, CovertConfig::Normal), &[true; 3]),
                Err(CovertError::IllegalConfig { kind: k, config: CovertConfig::Normal })
            );
        }
    }

    #[test]
    fn appearances() {
        assert_eq!(gate_appearance(CovertGateKind::Fi), ApparentCell::Inverter);
        assert_eq!(gate_appearance(CovertGateKind::Fi).arity(), 1);
        assert_eq!(gate_appearance(CovertGateKind::Fb), ApparentCell::Buffer);
        assert_eq!(gate_appearance(CovertGateKind::Fb).cells(), 2);
        assert_eq!(gate_appearance(CovertGateKind::UtA), gate_appearance(CovertGateKind::UtB));
        assert_eq!(gate_appearance(CovertGateKind::UtA).arity(), 2);
    }

    #[test]
    fn constant_modes_ignore_inputs_exhaustively() {
        for kind in CovertGateKind::ALL {
            for &config in kind.legal_configs() {
                if config == CovertConfig::Normal {
                    continue;
                }
                for arity in 1..=3 {
                    let outs: Vec<bool> = all_nets(arity)
                        .map(|mut nets| {
                            nets.resize(3, false);
                            gate_function(&inst(kind, config), &nets).unwrap()
                        })
                        .collect();
                    assert!(outs.iter().all(|&o| o == (config == CovertConfig::Const1)));
                }
            }
        }
    }

    #[test]
    fn keyed_model_can_imitate_every_instance() {
        for kind in CovertGateKind::ALL {
            let cell = gate_appearance(kind);
            for &config in kind.legal_configs() {
                let key = correct_key(kind, config);
                for nets in all_nets(3) {
                    let i = inst(kind, config);
                    let pins: Vec<bool> = match kind {
                        CovertGateKind::UtA => vec![nets[0], nets[1]],
                        CovertGateKind::UtB => vec![nets[0], nets[0]],
                        _ => vec![nets[0]],
                    };
                    assert_eq!(keyed_eval(cell, key, &pins), gate_function(&i, &nets).unwrap(), "{kind:?} {config:?}");
                }
            }
        }
    }

    #[test]
    fn keyed_normal_and_constants() {
        for (a, b) in [(false, false), (false, true), (true, false), (true, true)] {
            assert_eq!(keyed_eval(ApparentCell::Nand, KEY_NORMAL, &[a, b]), !(a && b));
            for cell in [ApparentCell::Inverter, ApparentCell::Buffer, ApparentCell::Nand] {
                assert!(keyed_eval(cell, KEY_CONST1, &[a, b]));
                assert!(!keyed_eval(cell, KEY_CONST0, &[a, b]));
            }
            assert!(keyed_eval(ApparentCell::Inverter, KEY_SPARE, &[a]));
        }
    }
}
