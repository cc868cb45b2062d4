use num_complex::Complex64;

use crate::linalg::Operator;

use super::serialize::serialize_spec;
use super::{ComponentDecl, Connection, NetworkSpec, Payload, PortRef};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn port(component: &str, port: &str) -> PortRef {
    PortRef {
        component: component.to_string(),
        port: port.to_string(),
    }
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

/// Two-port beam splitter in Stratonovich form with `E_kk = [[α, β], [β*, 0]]`,
/// port 2 fed back into itself. Well-posed, but the Schur pivot `E_ii = γ` is zero.
fn beam_splitter() -> NetworkSpec {
    let (alpha, beta) = (0.5, c(0.8, 0.6));
    let z = || Operator::zeros(1);
    let s = |x: Complex64| Operator::scalar(1, x);
    let e = vec![
        vec![z(), z(), z()],
        vec![z(), s(c(alpha, 0.0)), s(beta)],
        vec![z(), s(beta.conj()), z()],
    ];
    let mut spec = NetworkSpec::single("bs", names(&["1", "2"]), Payload::Strat { e }, 1);
    spec.connections.push(Connection {
        from: port("bs", "2"),
        to: port("bs", "2"),
    });
    spec
}

/// `S = [[0, 1], [1, 0]]`, no coupling.
fn swap_gate() -> NetworkSpec {
    let s = |x: f64| Operator::scalar(1, c(x, 0.0));
    let payload = Payload::Slh {
        s: vec![vec![s(0.0), s(1.0)], vec![s(1.0), s(0.0)]],
        l: vec![s(0.0), s(0.0)],
        h: s(0.0),
    };
    NetworkSpec::single("swap", names(&["1", "2"]), payload, 1)
}

/// `S = -1`: no Stratonovich form.
fn mirror() -> NetworkSpec {
    let s = |x: f64| Operator::scalar(1, c(x, 0.0));
    let payload = Payload::Slh {
        s: vec![vec![s(-1.0)]],
        l: vec![s(0.0)],
        h: s(0.0),
    };
    NetworkSpec::single("mirror", names(&["1"]), payload, 1)
}

/// One two-level system with two decay ports, the output of the first port
/// driving the second. Both components act on the shared `d = 2` space.
fn cascade() -> NetworkSpec {
    let lower = Operator::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
    let number = Operator::from_real(&[&[0.0, 0.0], &[0.0, 1.0]]).unwrap();
    let port_decl = |name: &str, kappa: f64, detuning: f64| ComponentDecl {
        name: name.to_string(),
        inputs: names(&["a"]),
        payload: Payload::Slh {
            s: vec![vec![Operator::identity(2)]],
            l: vec![lower.scale(c(kappa.sqrt(), 0.0))],
            h: number.scale(c(detuning, 0.0)),
        },
    };
    NetworkSpec {
        hilbert_dim: 2,
        components: vec![port_decl("c1", 1.0, 0.25), port_decl("c2", 0.5, -0.5)],
        connections: vec![Connection {
            from: port("c1", "a"),
            to: port("c2", "a"),
        }],
    }
}

/// File names and canonical contents of the bundled example documents.
pub fn bundled_examples() -> Vec<(&'static str, String)> {
    vec![
        ("beamsplitter_gamma0.json", serialize_spec(&beam_splitter())),
        ("swap_gate.json", serialize_spec(&swap_gate())),
        ("cascade.json", serialize_spec(&cascade())),
        ("mirror.json", serialize_spec(&mirror())),
    ]
}
