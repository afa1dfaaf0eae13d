//! Prints the truth table of every covert gate under every legal configuration.

use ipcamo::covert::{gate_appearance, gate_function, CovertGateKind, CovertInstance};

fn main() {
    for kind in CovertGateKind::ALL {
        for &config in kind.legal_configs() {
            let inst = CovertInstance { kind, config, real_input: Some(0), dummy_inputs: vec![1], output: 2 };
            let rows: Vec<String> = (0..4)
                .map(|x| {
                    let nets = [x & 1 == 1, x & 2 == 2];
                    format!("{}{}->{}", nets[0] as u8, nets[1] as u8, gate_function(&inst, &nets).unwrap() as u8)
                })
                .collect();
            println!("{kind:?} looks like {:?}, {config:?}: {}", gate_appearance(kind), rows.join(" "));
        }
    }
}
